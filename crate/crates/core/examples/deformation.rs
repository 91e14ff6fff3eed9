//! Splits a perturbation of the coassociative 4-form into its five blocks
//! and shows which part is transverse to every fibered structure.

use g2lab::exterior::ConstForm;
use g2lab::fibration::{decompose_deformation, type_iv_form};
use g2lab::scalar::{Rational, Scalar};

fn main() -> g2lab::Result<()> {
    let r = |n, d| Rational::from_ratio(n, d);
    let xi = ConstForm::term(7, &[1, 2, 3, 4], r(1, 2))?
        .add(&ConstForm::term(7, &[1, 3, 6, 7], r(-3, 1))?)?
        .add(&type_iv_form(&[r(0, 1), r(1, 4), r(0, 1), r(-1, 1)])?)?;
    let split = decompose_deformation(&xi)?;
    for (name, norm) in ["I", "II", "III_pp", "III_mp", "IV"].iter().zip(split.block_norms_sq()) {
        println!("|{name:<6}|^2 = {norm}");
    }
    println!("transverse part present: {}", split.has_type_iv());
    println!("reassembles exactly: {}", split.reassemble() == xi);
    Ok(())
}
