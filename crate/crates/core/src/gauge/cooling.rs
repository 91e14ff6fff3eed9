//! Gradient descent of the anti-self-dual clover action on 4D lattices.
//!
//! The action `S⁻ = a⁴ Σ_x ½ Σ_pairs −tr((F̂_μν − F̂_ρσ)²)` is differentiated
//! analytically. Writing a variation of one link as `δU = εXU` with `X` in
//! the Lie algebra, every clover leaf `W = P·U·R` containing that link
//! changes by `εP X U R`, and a daggered occurrence `W = P·U†·R` by
//! `−εP U† X R`. Collecting the leaves gives `δS⁻ = ε⟨X, grad⟩` with
//! `⟨X, Y⟩ = −Re tr(XY)`.

use serde::Serialize;

use super::algebra::{c, M2};
use super::lattice::{actions_from, charge_from, oriented, LatticeField, DUAL_PAIRS};
use crate::error::{Error, Result};

/// Settings of the descent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoolingParams {
    pub max_steps: usize,
    pub step_size: f64,
    /// Stop once `asd_fraction` falls below this.
    pub tol: f64,
}

impl Default for CoolingParams {
    fn default() -> Self {
        CoolingParams { max_steps: 5000, step_size: 0.05, tol: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoolingRecord {
    pub step: usize,
    pub asd_fraction: f64,
    pub charge: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoolingStatus {
    Converged,
    /// Backtracking could not find a decreasing step.
    Plateau,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct CoolingOutcome {
    pub field: LatticeField,
    pub history: Vec<CoolingRecord>,
    pub status: CoolingStatus,
    pub steps: usize,
}

const MAX_HALVINGS: usize = 30;

/// Signed weight of each stored plane in `S⁻`: `+1` for the first plane of
/// a dual pair and `−1` for the second, flipped when the second plane is
/// stored with the opposite orientation.
fn plane_partner(mu: usize, nu: usize) -> ((usize, usize), (usize, usize), f64) {
    for (a, b) in DUAL_PAIRS {
        let norm = |(p, q): (usize, usize)| (p.min(q), p.max(q));
        let flip = |(p, q): (usize, usize)| if p < q { 1.0 } else { -1.0 };
        if norm(a) == (mu, nu) {
            return (a, b, flip(a));
        }
        if norm(b) == (mu, nu) {
            return (a, b, -flip(b));
        }
    }
    unreachable!("every 4D plane belongs to a dual pair")
}

/// Gradient of `S⁻` with respect to left multiplication of each link,
/// one Lie algebra element per link.
pub fn asd_gradient(u: &LatticeField) -> Result<Vec<M2>> {
    if u.ndim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: u.ndim() });
    }
    let fields = u.field_strengths();
    let cell = u.cell_volume();
    let a = u.spacings();
    let mut gamma = vec![M2::zeros(); u.links().len()];
    for x in 0..u.sites() {
        let f = &fields[x];
        for mu in 0..4 {
            for nu in mu + 1..4 {
                let (pa, pb, sign) = plane_partner(mu, nu);
                let d = oriented(f, pa.0, pa.1) - oriented(f, pb.0, pb.1);
                let g = d * c(sign * cell / (4.0 * a[mu] * a[nu]), 0.0);
                for (corner, factors) in u.clover_leaves(x, mu, nu) {
                    let z = u.twist_factor(corner, mu, nu);
                    let mats: Vec<M2> = factors.iter().map(|&fac| u.factor(fac)).collect();
                    for (k, &(site, dir, dagger)) in factors.iter().enumerate() {
                        let p = mats[..k].iter().fold(M2::identity(), |acc, m| acc * m);
                        let r = mats[k + 1..].iter().fold(M2::identity(), |acc, m| acc * m);
                        let y = if dagger {
                            -(r * g * p * mats[k]) * c(z, 0.0)
                        } else {
                            mats[k] * r * g * p * c(z, 0.0)
                        };
                        gamma[site * 4 + dir] += y;
                    }
                }
            }
        }
    }
    let group = u.group();
    Ok(gamma.iter().map(|y| group.project(y)).collect())
}

fn step_along(u: &LatticeField, grad: &[M2], eps: f64) -> LatticeField {
    let mut out = u.clone();
    let group = u.group();
    for (link, g) in out.links_mut().iter_mut().zip(grad) {
        *link = group.reunitarize(&(group.exp(&(g * c(-eps, 0.0))) * *link));
    }
    out
}

fn record(u: &LatticeField, step: usize) -> (CoolingRecord, f64) {
    let fields = u.field_strengths();
    let actions = actions_from(&fields, u.cell_volume());
    let charge = charge_from(&fields, u.cell_volume());
    (CoolingRecord { step, asd_fraction: actions.asd_fraction, charge }, actions.asd)
}

fn divergence(steps: usize, reason: String, history: &[CoolingRecord]) -> Error {
    Error::Divergence { steps, reason, history: history.iter().map(|r| (r.step, r.asd_fraction, r.charge)).collect() }
}

/// Descends `S⁻` from `u` with backtracking line search. Each accepted step
/// does not increase `S⁻`, and links are re-unitarized after every step.
pub fn cool_to_sd(u: &LatticeField, params: &CoolingParams) -> Result<CoolingOutcome> {
    if u.ndim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: u.ndim() });
    }
    if !(params.step_size > 0.0 && params.step_size.is_finite()) || !(params.tol >= 0.0) {
        return Err(Error::Invalid("cooling needs a positive step size and a non-negative tolerance".into()));
    }
    let mut field = u.clone();
    field.reunitarize();
    let (rec, mut energy) = record(&field, 0);
    let mut history = vec![rec];
    let mut eps = params.step_size;
    let mut step = 0;
    let status = loop {
        let last = history.last().unwrap();
        if last.asd_fraction <= params.tol {
            break CoolingStatus::Converged;
        }
        if step >= params.max_steps {
            break CoolingStatus::MaxSteps;
        }
        let grad = asd_gradient(&field)?;
        if grad.iter().any(|g| g.iter().any(|z| !z.is_finite())) {
            return Err(divergence(step, "non-finite gradient".into(), &history));
        }
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = step_along(&field, &grad, eps);
            let (rec, e) = record(&trial, step + 1);
            if !e.is_finite() {
                return Err(divergence(step, "non-finite action".into(), &history));
            }
            if e <= energy {
                accepted = Some((trial, rec, e));
                break;
            }
            eps *= 0.5;
        }
        let Some((trial, rec, e)) = accepted else { break CoolingStatus::Plateau };
        step += 1;
        field = trial;
        energy = e;
        history.push(rec);
        eps *= 1.2;
    };
    Ok(CoolingOutcome { field, history, status, steps: step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::algebra::Group;
    use crate::gauge::fourier::Flux;
    use crate::rng::seeded;

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = seeded(31);
        for group in [Group::U1, Group::Su2] {
            let mut u = match group {
                Group::U1 => LatticeField::u1_flux(&[3, 3, 4, 3], &Flux::four(1, 0, 0, 0, 0, -1)).unwrap(),
                Group::Su2 => LatticeField::su2_half_flux(&[3, 3, 4, 3], &Flux::four(1, 1, 0, 0, -1, 1)).unwrap(),
            };
            u.add_noise(&mut rng, 0.3);
            let grad = asd_gradient(&u).unwrap();
            let s = |v: &LatticeField| v.actions().unwrap().asd;
            for trial in 0..6 {
                let idx = (trial * 37 + 11) % u.links().len();
                let x = group.random_algebra(&mut rng, 1.0);
                let h = 1e-5;
                let shifted = |eps: f64| {
                    let mut v = u.clone();
                    v.links_mut()[idx] = group.exp(&(x * c(eps, 0.0))) * v.links()[idx];
                    s(&v)
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                let analytic = -(x * grad[idx]).trace().re;
                assert!((fd - analytic).abs() < 1e-6 * (1.0 + analytic.abs()), "{group}: fd {fd} vs {analytic}");
            }
        }
    }

    #[test]
    fn identity_start_needs_no_steps() {
        let u = LatticeField::identity(&[3; 4], Group::Su2).unwrap();
        let out = cool_to_sd(&u, &CoolingParams::default()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.status, CoolingStatus::Converged);
    }

    #[test]
    fn u1_cooling_recovers_self_dual_flux() {
        let mut rng = seeded(32);
        let mut u = LatticeField::u1_flux(&[8; 4], &Flux::four(1, 0, 0, 0, 0, 1)).unwrap();
        u.add_noise(&mut rng, 0.05);
        let out = cool_to_sd(&u, &CoolingParams { max_steps: 5000, step_size: 0.05, tol: 1e-3 }).unwrap();
        assert_eq!(out.status, CoolingStatus::Converged);
        for w in out.history.windows(2) {
            assert!(w[1].asd_fraction <= w[0].asd_fraction * (1.0 + 1e-9) + 1e-15);
        }
        let q = out.history.last().unwrap().charge;
        assert!((q + 1.0).abs() < 0.05, "q = {q}");
        assert!(out.field.max_defect() < 1e-12);
    }

    #[test]
    fn random_su2_flow_ends_near_integer_or_plateau() {
        let mut rng = seeded(33);
        let mut u = LatticeField::identity(&[4; 4], Group::Su2).unwrap();
        u.add_noise(&mut rng, 0.4);
        let out = cool_to_sd(&u, &CoolingParams { max_steps: 400, step_size: 0.05, tol: 1e-3 }).unwrap();
        let q = out.history.last().unwrap().charge;
        assert!(out.status != CoolingStatus::MaxSteps || out.history.last().unwrap().asd_fraction < 1.0);
        assert!((q - q.round()).abs() < 0.1, "q = {q}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let u = LatticeField::identity(&[2; 4], Group::U1).unwrap();
        assert!(cool_to_sd(&u, &CoolingParams { step_size: 0.0, ..Default::default() }).is_err());
        let u7 = LatticeField::identity(&[2; 7], Group::U1).unwrap();
        assert!(matches!(cool_to_sd(&u7, &CoolingParams::default()), Err(Error::DimensionMismatch { .. })));
    }
}
