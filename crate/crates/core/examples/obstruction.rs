//! Perturbs the coassociative form in each deformation class and asks
//! whether the lifted charge -1 instanton survives.

use g2lab::chernsimons::{obstruction_verdict, CSContext};
use g2lab::exterior::ConstForm;
use g2lab::fibration::{build_fibration, type_iv_form, FibrationSpec};
use g2lab::gauge::{constant_curvature_u1, Flux};

fn main() -> g2lab::Result<()> {
    let ctx = CSContext::new(build_fibration(&FibrationSpec::standard())?)?;
    let f = constant_curvature_u1(&Flux::four(1, 0, 0, 0, 0, 1)).lift(7)?.field;
    let e = |idx: &[usize]| ConstForm::<f64>::basis(7, idx);
    let perturbations = [
        ("type I", e(&[1, 2, 3, 4])?),
        ("type II", e(&[1, 2, 3, 5])?),
        ("type III", e(&[1, 2, 5, 6])?),
        ("type IV", type_iv_form(&[0.0, 0.0, 0.5, 0.0])?),
    ];
    for (name, xi) in perturbations {
        let rep = obstruction_verdict(&ctx, &f, &xi)?;
        println!("{name:<9} r_phi = {:+.6}  q = {:+.3}  {:?}", rep.r_phi_value, rep.q, rep.verdict);
    }
    Ok(())
}
