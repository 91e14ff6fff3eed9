//! The Chern–Simons functional on the 7-torus and its derivative 1-form.
//!
//! All integrals are taken in frame coordinates, where the torus is the unit
//! cube, the 3-form is the standard one and the metric is Euclidean, and
//! every functional carries the factor `1/8π²`:
//!
//! ```text
//! ρ_A(b)   = (1/8π²) ∫ tr(F_A ∧ b) ∧ ⋆φ
//! ϑ(A₀+a)  = (1/8π²) · ½ ∫ tr(da ∧ a + ⅔ a∧a∧a) ∧ ⋆φ      (A₀ flat, trivial)
//! r_φ,A(b) = (1/8π²) ∫ tr(F_A ∧ b) ∧ ξ
//! ```
//!
//! With this normalization the perturbed pairing on a translation tangent
//! `β_v = v⌟F` is an integer multiple of `ε(v)` for integral bundles.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior::ConstForm;
use crate::fibration::{decompose_deformation, frame_pairing, type_iv_covector, TorusFibration};
use crate::g2core::{eigen_split, standard_phi, G2Structure};
use crate::gauge::algebra::{Group, M2};
use crate::gauge::fourier::trace_wedge_table;
use crate::gauge::lattice::plane_index;
use crate::gauge::{Connection, FourierField, LatticeField};

/// `1/8π²`.
pub fn normalization() -> f64 {
    1.0 / (8.0 * PI * PI)
}

/// Absolute tolerance of mode-space quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// The obstruction verdict fires above this multiple of [`QUADRATURE_TOL`].
pub const VERDICT_FACTOR: f64 = 10.0;

/// Geometric data shared by the Chern–Simons computations.
#[derive(Clone, Debug)]
pub struct CSContext {
    fib: TorusFibration<f64>,
    frame: G2Structure<f64>,
}

impl CSContext {
    /// Checks that the fibration's 3-form is standard in its frame.
    pub fn new(fib: TorusFibration<f64>) -> Result<Self> {
        let phi0 = standard_phi::<f64>();
        let defect = fib.to_frame_form(fib.phi())?.max_abs_diff(&phi0);
        if defect > 1e-9 {
            return Err(Error::Invalid(format!("fibration 3-form is not standard in its frame (defect {defect:.3e})")));
        }
        Ok(CSContext { fib, frame: eigen_split(&phi0)? })
    }

    pub fn fibration(&self) -> &TorusFibration<f64> {
        &self.fib
    }

    /// The G2-structure in frame coordinates.
    pub fn structure(&self) -> &G2Structure<f64> {
        &self.frame
    }

    pub fn star_phi(&self) -> &ConstForm<f64> {
        self.frame.star_phi()
    }

    /// Converts an ambient 4-form to frame coordinates.
    pub fn frame_form(&self, xi: &ConstForm<f64>) -> Result<ConstForm<f64>> {
        self.fib.to_frame_form(xi)
    }
}

fn check_field(f: &FourierField, degree: usize) -> Result<()> {
    if f.dim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: f.dim() });
    }
    if f.degree() != degree {
        return Err(Error::DegreeMismatch { expected: degree, got: f.degree() });
    }
    Ok(())
}

/// `ρ_A(b)` for the curvature `f` of `A`.
pub fn cs_one_form(ctx: &CSContext, f: &FourierField, b: &FourierField) -> Result<f64> {
    check_field(f, 2)?;
    check_field(b, 1)?;
    Ok(normalization() * f.integral_trace_wedge(b, ctx.star_phi())?)
}

/// `ϑ(A₀ + a)` relative to the trivial flat connection `A₀ = 0`.
pub fn cs_functional(ctx: &CSContext, a: &FourierField) -> Result<f64> {
    check_field(a, 1)?;
    let x = a.d().add(&a.wedge(a)?.scale(2.0 / 3.0))?;
    Ok(0.5 * normalization() * x.integral_trace_wedge(a, ctx.star_phi())?)
}

/// Path from `A₀ = 0` to `a` for [`path_integrate`].
#[derive(Clone, Debug)]
pub enum CsPath {
    /// `A(t) = t·a`.
    Linear,
    /// `A(t) = t·a + t(1 − t)·w`.
    QuadraticDetour(FourierField),
}

/// `∫₀¹ ρ_{A(t)}(Ȧ(t)) dt` by composite Simpson quadrature.
pub fn path_integrate(ctx: &CSContext, a: &FourierField, n_steps: usize, path: &CsPath) -> Result<f64> {
    check_field(a, 1)?;
    if n_steps < 16 || n_steps % 2 == 1 {
        return Err(Error::Invalid(format!("path integration needs an even number of steps ≥ 16, got {n_steps}")));
    }
    if let CsPath::QuadraticDetour(w) = path {
        check_field(w, 1)?;
    }
    let integrand = |t: f64| -> Result<f64> {
        let (at, velocity) = match path {
            CsPath::Linear => (a.scale(t), a.clone()),
            CsPath::QuadraticDetour(w) => {
                (a.scale(t).add(&w.scale(t * (1.0 - t)))?, a.add(&w.scale(1.0 - 2.0 * t))?)
            }
        };
        let f = Connection::trivial(at)?.curvature()?.field;
        cs_one_form(ctx, &f, &velocity)
    };
    let values: Vec<f64> = (0..=n_steps)
        .into_par_iter()
        .map(|k| integrand(k as f64 / n_steps as f64))
        .collect::<Result<_>>()?;
    let h = 1.0 / n_steps as f64;
    let weighted: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let w = if k == 0 || k == n_steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * v
        })
        .sum();
    Ok(weighted * h / 3.0)
}

/// `|(1/8π²)∫ tr(d_A a ∧ b − a ∧ d_A b) ∧ ⋆φ|`, zero by Stokes.
pub fn closedness_residual(ctx: &CSContext, conn: &Connection, a: &FourierField, b: &FourierField) -> Result<f64> {
    check_field(a, 1)?;
    check_field(b, 1)?;
    let da = conn.covariant_d(a)?;
    let db = conn.covariant_d(b)?;
    let lhs = da.integral_trace_wedge(b, ctx.star_phi())?;
    let rhs = a.integral_trace_wedge(&db, ctx.star_phi())?;
    Ok((normalization() * (lhs - rhs)).abs())
}

/// The translation tangent `β_v = v⌟F`.
pub fn translation_tangent(f: &FourierField, v: &[f64]) -> Result<FourierField> {
    check_field(f, 2)?;
    f.interior(v)
}

/// `−½(1/8π²) ∫ tr(F∧F) ∧ (v⌟⋆φ)`, the value `ρ(β_v)` must take.
pub fn translation_oracle(ctx: &CSContext, f: &FourierField, v: &[f64]) -> Result<f64> {
    let c = ctx.star_phi().interior(v)?;
    Ok(-0.5 * normalization() * f.integral_trace_wedge(f, &c)?)
}

/// `ρ_{A+o}(β_v)` at each probe `A + o`, recomputing the curvature.
pub fn rho_on_translation(ctx: &CSContext, conn: &Connection, v: &[f64], offsets: &[FourierField]) -> Result<Vec<f64>> {
    if v.len() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: v.len() });
    }
    offsets
        .iter()
        .map(|o| {
            let f = conn.shifted(o, 1.0)?.curvature()?.field;
            cs_one_form(ctx, &f, &translation_tangent(&f, v)?)
        })
        .collect()
}

/// Random periodic 1-forms of size `h` used as probe offsets.
pub fn probe_offsets<R: Rng>(rng: &mut R, group: Group, count: usize, max_freq: i32, h: f64) -> Vec<FourierField> {
    (0..count).map(|_| FourierField::random(rng, group, 7, 1, 2, max_freq, h)).collect()
}

/// `r_φ,A(b)` for a constant 4-form `ξ` in frame coordinates.
pub fn perturbed_rho(f: &FourierField, b: &FourierField, xi: &ConstForm<f64>) -> Result<f64> {
    check_field(f, 2)?;
    check_field(b, 1)?;
    if xi.dim() != 7 || xi.degree() != 4 {
        return Err(Error::Shape("the perturbation must be a 4-form on ℝ⁷".into()));
    }
    Ok(normalization() * f.integral_trace_wedge(b, xi)?)
}

/// `(1/8π²) ∫ tr(F∧F) ∧ e⁵⁶⁷`: the charge of the base bundle.
pub fn fibre_charge(f: &FourierField) -> Result<f64> {
    check_field(f, 2)?;
    Ok(normalization() * f.integral_trace_wedge(f, &ConstForm::basis(7, &[5, 6, 7])?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "instanton-survives")]
    Survives,
    #[serde(rename = "instanton-obstructed")]
    Obstructed,
}

/// Outcome of testing whether a perturbation of the 3-form obstructs the
/// instantons of a lifted bundle.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionReport {
    pub xi: Value,
    pub split: Value,
    /// Base covector `ε` of the transverse component `−2ε∧e⁵⁶⁷`.
    pub epsilon: Vec<f64>,
    pub v: Vec<f64>,
    pub rho_value: f64,
    pub r_phi_value: f64,
    pub n_phi_value: f64,
    pub q: f64,
    pub verdict: Verdict,
}

/// Site-sum or mode-sum evaluations the verdict needs.
trait CurvatureSource {
    fn rho(&self, ctx: &CSContext, v: &[f64]) -> Result<f64>;
    fn r_phi(&self, v: &[f64], xi: &ConstForm<f64>) -> Result<f64>;
    fn charge(&self) -> Result<f64>;
    /// Smallest `|r_φ|` read as a genuine obstruction.
    fn verdict_threshold(&self, eps_max: f64) -> f64;
}

impl CurvatureSource for FourierField {
    fn rho(&self, ctx: &CSContext, v: &[f64]) -> Result<f64> {
        cs_one_form(ctx, self, &translation_tangent(self, v)?)
    }

    fn r_phi(&self, v: &[f64], xi: &ConstForm<f64>) -> Result<f64> {
        perturbed_rho(self, &translation_tangent(self, v)?, xi)
    }

    fn charge(&self) -> Result<f64> {
        fibre_charge(self)
    }

    fn verdict_threshold(&self, _eps_max: f64) -> f64 {
        VERDICT_FACTOR * QUADRATURE_TOL
    }
}

impl CurvatureSource for LatticeField {
    fn rho(&self, ctx: &CSContext, v: &[f64]) -> Result<f64> {
        lattice_translation_pairing(self, v, ctx.star_phi())
    }

    fn r_phi(&self, v: &[f64], xi: &ConstForm<f64>) -> Result<f64> {
        lattice_translation_pairing(self, v, xi)
    }

    fn charge(&self) -> Result<f64> {
        lattice_fibre_charge(self)
    }

    // Clover sums carry discretization error far above quadrature
    // tolerance, but the pairing is quantized in steps of `|ε(v)|`.
    fn verdict_threshold(&self, eps_max: f64) -> f64 {
        (0.5 * eps_max).max(VERDICT_FACTOR * QUADRATURE_TOL)
    }
}

fn verdict_for<F: CurvatureSource>(ctx: &CSContext, f: &F, xi: &ConstForm<f64>) -> Result<ObstructionReport> {
    let split = decompose_deformation(xi)?;
    let epsilon = type_iv_covector(&split);
    let best = (0..4).fold(0, |b, i| if epsilon[i].abs() > epsilon[b].abs() { i } else { b });
    let mut v = vec![0.0; 7];
    v[best] = 1.0;
    let q = f.charge()?;
    let rho_value = f.rho(ctx, &v)?;
    let r_phi_value = f.r_phi(&v, xi)?;
    let n_phi_value = frame_pairing(xi, &v, &q)?;
    let threshold = f.verdict_threshold(epsilon[best].abs());
    let verdict = if r_phi_value.abs() > threshold { Verdict::Obstructed } else { Verdict::Survives };
    Ok(ObstructionReport {
        xi: xi.to_json(),
        split: split.to_json(),
        epsilon,
        v,
        rho_value,
        r_phi_value,
        n_phi_value,
        q,
        verdict,
    })
}

/// Decomposes `ξ` (frame coordinates), picks the unit base vector with the
/// largest `|ε(v)|`, and evaluates `ρ(β_v)`, `r_φ(β_v)` and the Poincaré
/// pairing on the curvature of a lifted bundle.
pub fn obstruction_verdict(ctx: &CSContext, f: &FourierField, xi: &ConstForm<f64>) -> Result<ObstructionReport> {
    check_field(f, 2)?;
    verdict_for(ctx, f, xi)
}

/// [`obstruction_verdict`] with clover curvature and site sums.
pub fn lattice_obstruction_verdict(ctx: &CSContext, u: &LatticeField, xi: &ConstForm<f64>) -> Result<ObstructionReport> {
    if u.ndim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: u.ndim() });
    }
    verdict_for(ctx, u, xi)
}

/// `v⌟F` at one site from the 21 clover components.
fn pointwise_interior(f: &[M2], v: &[f64]) -> Vec<M2> {
    let mut b = vec![M2::zeros(); 7];
    for mu in 0..7 {
        for nu in mu + 1..7 {
            let x = f[plane_index(7, mu, nu)];
            b[nu] += x * crate::gauge::algebra::c(v[mu], 0.0);
            b[mu] -= x * crate::gauge::algebra::c(v[nu], 0.0);
        }
    }
    b
}

/// `(1/8π²) Σ_x a⁷ tr(F̂ ∧ v⌟F̂) ∧ c` on a 7D lattice.
pub fn lattice_translation_pairing(u: &LatticeField, v: &[f64], c: &ConstForm<f64>) -> Result<f64> {
    if u.ndim() != 7 || v.len() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: u.ndim().min(v.len()) });
    }
    let table = trace_wedge_table(
        &crate::exterior::MultiIndex::all(7, 2),
        &crate::exterior::MultiIndex::all(7, 1),
        c,
    );
    let per_site: Vec<f64> = (0..u.sites())
        .into_par_iter()
        .map(|x| {
            let f = u.field_strength(x);
            let b = pointwise_interior(&f, v);
            table.iter().map(|&(i, j, w)| w * (f[i] * b[j]).trace().re).sum()
        })
        .collect();
    Ok(normalization() * u.cell_volume() * per_site.iter().sum::<f64>())
}

/// `(1/8π²) Σ_x a⁷ tr(F̂∧F̂) ∧ e⁵⁶⁷` on a 7D lattice.
pub fn lattice_fibre_charge(u: &LatticeField) -> Result<f64> {
    if u.ndim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: u.ndim() });
    }
    let two = crate::exterior::MultiIndex::all(7, 2);
    let table = trace_wedge_table(&two, &two, &ConstForm::basis(7, &[5, 6, 7])?);
    let per_site: Vec<f64> = (0..u.sites())
        .into_par_iter()
        .map(|x| {
            let f = u.field_strength(x);
            table.iter().map(|&(i, j, w)| w * (f[i] * f[j]).trace().re).sum()
        })
        .collect();
    Ok(normalization() * u.cell_volume() * per_site.iter().sum::<f64>())
}
