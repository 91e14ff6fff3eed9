//! G2-structures on ℝ⁷.
//!
//! A stable 3-form determines a metric, an orientation and a coassociative
//! 4-form. The 2-forms then split into the 7- and 14-dimensional
//! eigenspaces of `T(η) = ⋆(η ∧ φ)`. With the orientation fixed by the
//! metric construction below, the model form has `T = −2` on the
//! 7-dimensional piece (spanned by the contractions `eᵢ ⌟ φ`) and `T = +1`
//! on the 14-dimensional piece (the Lie algebra g₂).
//!
//! Instanton conditions, energy bookkeeping and the residual norms used by
//! the gauge module are built on these projections.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{omegas, shift, extend, ConstForm, Metric, MultiIndex, Orientation};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Eigenvalue of `T` on the 7-dimensional piece at the standard orientation.
pub const LAMBDA_7: i64 = -2;
/// Eigenvalue of `T` on the 14-dimensional piece at the standard orientation.
pub const LAMBDA_14: i64 = 1;

const STABILITY_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-8;

fn e7<S: Scalar>(idx: &[usize]) -> ConstForm<S> {
    ConstForm::basis(7, idx).expect("valid basis index")
}

/// The model form `e⁵⁶⁷ + ω₁∧e⁵ + ω₂∧e⁶ + ω₃∧e⁷`.
pub fn standard_phi<S: Scalar>() -> ConstForm<S> {
    let mut phi = e7::<S>(&[5, 6, 7]);
    for (k, w) in omegas::<S>().iter().enumerate() {
        let w = extend(w, 7).unwrap();
        phi = phi.add(&w.wedge(&e7(&[5 + k])).unwrap()).unwrap();
    }
    phi
}

/// The model coassociative form `e¹²³⁴ − ω₁∧e⁶⁷ − ω₂∧e⁷⁵ − ω₃∧e⁵⁶`,
/// written out directly rather than computed with a Hodge star.
pub fn standard_psi<S: Scalar>() -> ConstForm<S> {
    let fibre = [[6, 7], [7, 5], [5, 6]];
    let mut psi = e7::<S>(&[1, 2, 3, 4]);
    for (w, f) in omegas::<S>().iter().zip(fibre) {
        let w = extend(w, 7).unwrap();
        psi = psi.sub(&w.wedge(&e7(&f)).unwrap()).unwrap();
    }
    psi
}

/// The forms `ω₁, ω₂, ω₃` placed on the fibre coordinates 5, 6, 7 of ℝ⁷.
pub fn fibre_omegas<S: Scalar>() -> [ConstForm<S>; 3] {
    omegas::<S>().map(|w| shift(&w, 3, 7).unwrap())
}

/// Lexicographic basis of Λ²(ℝ⁷).
pub fn two_form_basis() -> Vec<MultiIndex> {
    MultiIndex::all(7, 2)
}

/// Matrix of a linear map on forms, in lexicographic bases.
pub fn operator_matrix<S: Scalar>(
    dim: usize,
    from_degree: usize,
    to_degree: usize,
    op: impl Fn(&ConstForm<S>) -> Result<ConstForm<S>>,
) -> Result<Mat<S>> {
    let from = MultiIndex::all(dim, from_degree);
    let to = MultiIndex::all(dim, to_degree);
    let mut m = Mat::zeros(to.len(), from.len());
    for (j, k) in from.iter().enumerate() {
        let image = op(&ConstForm::from_terms(dim, from_degree, [(*k, S::one())])?)?;
        for (i, l) in to.iter().enumerate() {
            m[(i, j)] = image.get(*l);
        }
    }
    Ok(m)
}

/// Applies a matrix in lexicographic bases to a form.
pub fn apply<S: Scalar>(m: &Mat<S>, a: &ConstForm<S>, to_degree: usize) -> Result<ConstForm<S>> {
    let v = a.to_vector();
    if v.len() != m.cols() {
        return Err(Error::Shape(format!("operator expects {} coefficients, got {}", m.cols(), v.len())));
    }
    ConstForm::from_vector(a.dim(), to_degree, &m.mul_vec(&v))
}

fn b_matrix<S: Scalar>(phi: &ConstForm<S>) -> Result<Mat<S>> {
    let contractions: Vec<ConstForm<S>> = (0..7)
        .map(|i| {
            let mut v = vec![S::zero(); 7];
            v[i] = S::one();
            phi.interior(&v)
        })
        .collect::<Result<_>>()?;
    let top = MultiIndex::EMPTY.complement(7);
    let sixth = S::from_ratio(1, 6);
    let mut b = Mat::zeros(7, 7);
    for i in 0..7 {
        let left = contractions[i].wedge(phi)?;
        for j in i..7 {
            let c = left.wedge(&contractions[j])?.get(top) * sixth.clone();
            b[(i, j)] = c.clone();
            b[(j, i)] = c;
        }
    }
    Ok(b)
}

/// Metric, orientation and volume form determined by a 3-form on ℝ⁷.
///
/// With `B(u, v) = ⅙ (u⌟φ)∧(v⌟φ)∧φ / e¹…⁷`, the metric is
/// `g = B / det(B)^{1/9}` and the orientation is `−sign det B`, which makes
/// `⟨u,v⟩_g dVol_g = −⅙ (u⌟φ)∧(v⌟φ)∧φ` and gives `(I₇, +)` for the model
/// form.
pub fn metric_from_phi<S: Scalar>(
    phi: &ConstForm<S>,
) -> Result<(Metric<S>, Orientation, ConstForm<S>)> {
    if phi.dim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: phi.dim() });
    }
    if phi.degree() != 3 {
        return Err(Error::DegreeMismatch { expected: 3, got: phi.degree() });
    }
    let b = b_matrix(phi)?;
    let det = b.det();
    if det.is_zero() {
        return Err(Error::UnstableForm("the bilinear form B is degenerate".into()));
    }
    let scale = det
        .root(9)
        .ok_or_else(|| Error::Inexact("ninth root of det B".into()))?;
    let g = b.scale(&(S::one() / scale));

    let gf = g.to_f64().to_nalgebra();
    let eig = SymmetricEigen::new((&gf + gf.transpose()) * 0.5);
    let trace: f64 = eig.eigenvalues.iter().map(|x| x.abs()).sum();
    let smallest = eig.eigenvalues.min();
    if !(smallest > STABILITY_TOL * trace) {
        return Err(Error::UnstableForm(format!(
            "B is not definite: smallest normalized eigenvalue {smallest:.3e} relative to trace {trace:.3e}"
        )));
    }
    let metric = if S::EXACT { Metric::new(g) } else { Metric::symmetrized(g) }
        .map_err(|e| Error::UnstableForm(format!("normalized B failed the definiteness check: {e}")))?;
    let orientation = Orientation::from_sign(if det.is_negative() { 1 } else { -1 });
    let vol = metric.volume(orientation)?;
    Ok((metric, orientation, vol))
}

/// A stable 3-form with its metric data and the Λ² eigen-splitting.
#[derive(Clone, Debug)]
pub struct G2Structure<S: Scalar> {
    phi: ConstForm<S>,
    metric: Metric<S>,
    orientation: Orientation,
    vol: ConstForm<S>,
    star_phi: ConstForm<S>,
    lambda7: S,
    lambda14: S,
    t: Mat<S>,
    p7: Mat<S>,
    p14: Mat<S>,
}

/// Builds the full structure, splitting Λ² by the eigenvalues of `T`.
///
/// Exact scalars use the minimal polynomial of `T`, whose roots are
/// rational for rational `φ`; doubles use a symmetric eigensolver after
/// whitening by the Λ² Gram matrix.
pub fn eigen_split<S: Scalar>(phi: &ConstForm<S>) -> Result<G2Structure<S>> {
    let (metric, orientation, vol) = metric_from_phi(phi)?;
    let star_phi = phi.hodge(&metric, orientation)?;
    let t = operator_matrix(7, 2, 2, |a| a.wedge(phi)?.hodge(&metric, orientation))?;
    let (lambda7, lambda14) = if S::EXACT { exact_eigenvalues(&t)? } else { float_eigenvalues(&t, &metric)? };
    let n = t.rows();
    let shifted = t.sub(&Mat::identity(n).scale(&lambda14));
    let p7 = shifted.scale(&(S::one() / (lambda7.clone() - lambda14.clone())));
    let p14 = Mat::identity(n).sub(&p7);
    Ok(G2Structure { phi: phi.clone(), metric, orientation, vol, star_phi, lambda7, lambda14, t, p7, p14 })
}

fn flat_dot<S: Scalar>(a: &Mat<S>, b: &Mat<S>) -> S {
    let mut acc = S::zero();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc = acc + a[(i, j)].clone() * b[(i, j)].clone();
        }
    }
    acc
}

fn exact_eigenvalues<S: Scalar>(t: &Mat<S>) -> Result<(S, S)> {
    let n = t.rows();
    let id = Mat::identity(n);
    let t2 = t.mul(t);
    // Fit T² = x·T + y·I by the 2×2 normal equations, then demand exactness.
    let (tt, ti, ii) = (flat_dot(t, t), flat_dot(t, &id), flat_dot(&id, &id));
    let (rt, ri) = (flat_dot(&t2, t), flat_dot(&t2, &id));
    let det = tt.clone() * ii.clone() - ti.clone() * ti.clone();
    if det.is_zero() {
        return Err(Error::EigenSplit("T is a multiple of the identity".into()));
    }
    let x = (rt.clone() * ii - ri.clone() * ti.clone()) / det.clone();
    let y = (tt * ri - ti * rt) / det;
    let residual = t2.sub(&t.scale(&x)).sub(&id.scale(&y));
    if residual.max_abs() != 0.0 {
        return Err(Error::EigenSplit("T does not satisfy a quadratic polynomial".into()));
    }
    let two = S::from_i64(2);
    let disc = x.clone() * x.clone() + S::from_i64(4) * y;
    let root = disc
        .root(2)
        .ok_or_else(|| Error::Inexact("square root of the discriminant of T".into()))?;
    if root.is_zero() {
        return Err(Error::EigenSplit("T has a single eigenvalue".into()));
    }
    let hi = (x.clone() + root.clone()) / two.clone();
    let lo = (x - root) / two;
    let nullity = |l: &S| n - t.sub(&id.scale(l)).rank(0.0);
    match (nullity(&hi), nullity(&lo)) {
        (7, 14) => Ok((hi, lo)),
        (14, 7) => Ok((lo, hi)),
        (a, b) => Err(Error::EigenSplit(format!("eigenspace dimensions ({a}, {b}) are not (7, 14)"))),
    }
}

fn float_eigenvalues<S: Scalar>(t: &Mat<S>, metric: &Metric<S>) -> Result<(S, S)> {
    let basis = two_form_basis();
    let gram = Mat::from_fn(basis.len(), basis.len(), |i, j| metric.basis_inner(basis[i], basis[j]).to_f64());
    let (half, inv_half) = gram.spd_sqrt()?;
    let sym = half.mul(&t.to_f64()).mul(&inv_half).to_nalgebra();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    let (cut, gap) = values
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i + 1, w[1] - w[0]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("21 eigenvalues");
    if gap < GAP_TOL {
        return Err(Error::EigenSplit(format!("largest eigenvalue gap {gap:.3e} is below {GAP_TOL:e}")));
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (low, high) = values.split_at(cut);
    let (l7, l14) = match (low.len(), high.len()) {
        (7, 14) => (mean(low), mean(high)),
        (14, 7) => (mean(high), mean(low)),
        (a, b) => return Err(Error::EigenSplit(format!("eigenvalue clusters of sizes ({a}, {b})"))),
    };
    let conv = |x: f64| S::from_f64(x).ok_or_else(|| Error::EigenSplit("non-finite eigenvalue".into()));
    Ok((conv(l7)?, conv(l14)?))
}

/// Squared instanton residuals; additive over the components of a
/// Lie-algebra-valued curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSquares<S> {
    pub wedge_star_phi: S,
    pub star_equation: S,
    pub seven: S,
}

impl<S: Scalar> ResidualSquares<S> {
    pub fn zero() -> Self {
        ResidualSquares { wedge_star_phi: S::zero(), star_equation: S::zero(), seven: S::zero() }
    }

    pub fn accumulate(&mut self, other: &Self) {
        self.wedge_star_phi = self.wedge_star_phi.clone() + other.wedge_star_phi.clone();
        self.star_equation = self.star_equation.clone() + other.star_equation.clone();
        self.seven = self.seven.clone() + other.seven.clone();
    }

    pub fn norms(&self) -> InstantonResidual {
        InstantonResidual {
            r_a: self.wedge_star_phi.to_f64().max(0.0).sqrt(),
            r_b: self.star_equation.to_f64().max(0.0).sqrt(),
            f7_norm: self.seven.to_f64().max(0.0).sqrt(),
        }
    }
}

/// Norms of `F∧⋆φ`, of `F − λ₁₄⁻¹ ⋆(F∧φ)` and of the Λ²₇ part of `F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstantonResidual {
    pub r_a: f64,
    pub r_b: f64,
    pub f7_norm: f64,
}

impl InstantonResidual {
    pub fn max(&self) -> f64 {
        self.r_a.max(self.r_b).max(self.f7_norm)
    }
}

impl<S: Scalar> G2Structure<S> {
    pub fn phi(&self) -> &ConstForm<S> {
        &self.phi
    }

    pub fn metric(&self) -> &Metric<S> {
        &self.metric
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn volume(&self) -> &ConstForm<S> {
        &self.vol
    }

    pub fn star_phi(&self) -> &ConstForm<S> {
        &self.star_phi
    }

    pub fn lambda7(&self) -> &S {
        &self.lambda7
    }

    pub fn lambda14(&self) -> &S {
        &self.lambda14
    }

    /// `T` as a 21×21 matrix in the lexicographic Λ² basis.
    pub fn t_matrix(&self) -> &Mat<S> {
        &self.t
    }

    pub fn p7_matrix(&self) -> &Mat<S> {
        &self.p7
    }

    pub fn p14_matrix(&self) -> &Mat<S> {
        &self.p14
    }

    fn check_two_form(&self, a: &ConstForm<S>) -> Result<()> {
        if a.dim() != 7 {
            return Err(Error::DimensionMismatch { expected: 7, got: a.dim() });
        }
        if a.degree() != 2 {
            return Err(Error::DegreeMismatch { expected: 2, got: a.degree() });
        }
        Ok(())
    }

    pub fn t(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        self.check_two_form(a)?;
        a.wedge(&self.phi)?.hodge(&self.metric, self.orientation)
    }

    pub fn l_star_phi(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        self.check_two_form(a)?;
        a.wedge(&self.star_phi)
    }

    pub fn p7(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        self.check_two_form(a)?;
        apply(&self.p7, a, 2)
    }

    pub fn p14(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        self.check_two_form(a)?;
        apply(&self.p14, a, 2)
    }

    pub fn norm_sq(&self, a: &ConstForm<S>) -> Result<S> {
        a.inner(a, &self.metric)
    }

    /// Squared residuals of a single real 2-form.
    pub fn residual_squares(&self, f: &ConstForm<S>) -> Result<ResidualSquares<S>> {
        let a = self.l_star_phi(f)?;
        let b = f.sub(&self.t(f)?.scale(&(S::one() / self.lambda14.clone())))?;
        let seven = self.p7(f)?;
        Ok(ResidualSquares {
            wedge_star_phi: self.norm_sq(&a)?,
            star_equation: self.norm_sq(&b)?,
            seven: self.norm_sq(&seven)?,
        })
    }

    pub fn instanton_residual(&self, f: &ConstForm<S>) -> Result<InstantonResidual> {
        Ok(self.residual_squares(f)?.norms())
    }

    /// Energy bookkeeping with the realized eigenvalues as κ-weights.
    pub fn energy_report(&self, f7sq: S, f14sq: S) -> Result<EnergyReport<S>> {
        energy_report_weighted(f7sq, f14sq, self.lambda7.clone(), self.lambda14.clone())
    }
}

pub fn t_phi<S: Scalar>(a: &ConstForm<S>, s: &G2Structure<S>) -> Result<ConstForm<S>> {
    s.t(a)
}

pub fn l_star_phi<S: Scalar>(a: &ConstForm<S>, s: &G2Structure<S>) -> Result<ConstForm<S>> {
    s.l_star_phi(a)
}

pub fn instanton_residual<S: Scalar>(f: &ConstForm<S>, s: &G2Structure<S>) -> Result<InstantonResidual> {
    s.instanton_residual(f)
}

/// Yang–Mills energy and topological charge from the two squared norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport<S> {
    pub ym: S,
    pub kappa: S,
    /// `ym − (−½κ + 3/2‖F₁₄‖²)`.
    pub residual_fourteen: S,
    /// `ym − (κ + 3‖F₇‖²)`.
    pub residual_seven: S,
}

pub fn energy_report<S: Scalar>(f7sq: S, f14sq: S) -> Result<EnergyReport<S>> {
    energy_report_weighted(f7sq, f14sq, S::from_i64(LAMBDA_7), S::from_i64(LAMBDA_14))
}

fn energy_report_weighted<S: Scalar>(f7sq: S, f14sq: S, l7: S, l14: S) -> Result<EnergyReport<S>> {
    if f7sq.is_negative() || f14sq.is_negative() {
        return Err(Error::Invalid("squared norms must be non-negative".into()));
    }
    let ym = f7sq.clone() + f14sq.clone();
    let kappa = l7 * f7sq.clone() + l14 * f14sq.clone();
    let half = S::from_ratio(1, 2);
    let three_halves = S::from_ratio(3, 2);
    let residual_fourteen = ym.clone() - (-(half * kappa.clone()) + three_halves * f14sq);
    let residual_seven = ym.clone() - (kappa.clone() + S::from_i64(3) * f7sq);
    Ok(EnergyReport { ym, kappa, residual_fourteen, residual_seven })
}
