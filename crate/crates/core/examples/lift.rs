//! Lifts constant U(1) fluxes from the 4-torus to the 7-torus: self-dual
//! fluxes become G2-instantons, anti-self-dual ones do not.

use g2lab::g2core::{eigen_split, standard_phi};
use g2lab::gauge::{constant_curvature_u1, field_residual, Flux, ResidualOperators};

fn main() -> g2lab::Result<()> {
    let ops = ResidualOperators::new(&eigen_split(&standard_phi::<f64>())?)?;
    let cases = [
        ("self-dual e12+e34", Flux::four(1, 0, 0, 0, 0, 1)),
        ("self-dual, charge -2", Flux::four(1, 1, 0, 0, -1, 1)),
        ("anti-self-dual e12-e34", Flux::four(1, 0, 0, 0, 0, -1)),
        ("mixed e12", Flux::four(1, 0, 0, 0, 0, 0)),
    ];
    println!("{:<24} {:>6} {:>10} {:>10} {:>10}", "flux", "q", "r_a", "r_b", "f7");
    for (name, flux) in cases {
        let r = field_residual(&constant_curvature_u1(&flux).lift(7)?.field, &ops)?;
        println!("{name:<24} {:>6} {:>10.4} {:>10.4} {:>10.4}", flux.base_charge(), r.r_a, r.r_b, r.f7_norm);
    }
    Ok(())
}
