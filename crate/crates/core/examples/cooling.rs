//! Cools a noisy twisted SU(2) configuration of charge −1 on a 6⁴ lattice
//! back to self-duality, printing the flow history every 50 steps.

use g2lab::gauge::{cool_to_sd, CoolingParams, Flux, LatticeField};
use g2lab::rng::stream;

fn main() -> g2lab::Result<()> {
    let flux = Flux::four(1, 1, 0, 0, -1, 1);
    let mut field = LatticeField::su2_half_flux(&[6; 4], &flux)?;
    println!("noise-free charge {:.6}", field.clover_charge()?);
    field.add_noise(&mut stream(42, "noise"), 0.05);
    let start = field.actions()?;
    println!("initial asd_fraction {:.3e}", start.asd_fraction);
    let out = cool_to_sd(&field, &CoolingParams::default())?;
    for r in out.history.iter().filter(|r| r.step % 50 == 0) {
        println!("{:>5} {:.3e} {:+.6}", r.step, r.asd_fraction, r.charge);
    }
    let last = out.history.last().unwrap();
    println!("{:?} after {} steps: asd_fraction {:.3e}, charge {:+.6}", out.status, out.steps, last.asd_fraction, last.charge);
    Ok(())
}
