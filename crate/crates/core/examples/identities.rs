//! Runs the identity suite of the model G2-structure over the rationals
//! and in double precision, side by side.

use g2lab::identities::identity_suite;
use g2lab::scalar::Precision;

fn main() -> g2lab::Result<()> {
    let exact = identity_suite(Precision::Exact)?;
    let double = identity_suite(Precision::Double)?;
    println!("lambda7 = {}, lambda14 = {}", exact.lambda7, exact.lambda14);
    println!("{:<24} {:>10} {:>12}", "identity", "exact", "double");
    for (e, d) in exact.checks.iter().zip(&double.checks) {
        println!("{:<24} {:>10} {:>12.2e}", e.name, e.residual, d.residual);
    }
    Ok(())
}
