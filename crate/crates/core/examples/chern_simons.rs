//! Finite-difference check of the Chern-Simons functional against its
//! 1-form, and the functional along two different paths.

use g2lab::chernsimons::{cs_functional, cs_one_form, path_integrate, CSContext, CsPath};
use g2lab::fibration::{build_fibration, FibrationSpec};
use g2lab::gauge::{Connection, FourierField, Group};
use g2lab::rng::stream;

fn main() -> g2lab::Result<()> {
    let ctx = CSContext::new(build_fibration(&FibrationSpec::standard())?)?;
    let mut rng = stream(1, "example");
    let modes = [[1, 0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0, 0], [1, 0, 0, 0, 1, 0, 0]];
    let a = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, 0.3);
    let b = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, 0.3);

    let f = Connection::trivial(a.clone())?.curvature()?.field;
    let rho = cs_one_form(&ctx, &f, &b)?;
    println!("rho_A(b) = {rho:.12}");
    for h in [1e-1, 1e-2, 1e-3] {
        let fd = (cs_functional(&ctx, &a.add(&b.scale(h))?)? - cs_functional(&ctx, &a.sub(&b.scale(h))?)?) / (2.0 * h);
        println!("h = {h:.0e}: |fd - rho| = {:.3e}", (fd - rho).abs());
    }

    let w = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, 0.3);
    println!("theta(A)          {:.12}", cs_functional(&ctx, &a)?);
    println!("straight path     {:.12}", path_integrate(&ctx, &a, 32, &CsPath::Linear)?);
    println!("quadratic detour  {:.12}", path_integrate(&ctx, &a, 64, &CsPath::QuadraticDetour(w))?);
    Ok(())
}
