//! Lie-algebra-valued differential forms on the unit torus `ℝⁿ/ℤⁿ`, stored
//! as finite Fourier series.
//!
//! A field is `Σ_m Σ_I C_{m,I} e^{2πi m·x} e^I` with 2×2 complex coefficient
//! matrices. Real fields (valued in u(1) or su(2)) satisfy
//! `C_{−m} = −C_m†`. Products are exact convolutions of finitely many modes,
//! so no truncation occurs, and integrals are read off from the constant
//! mode.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::algebra::{c, Group, M2};
use crate::error::{Error, Result};
use crate::exterior::{ConstForm, Metric, MultiIndex, Orientation};
use crate::g2core::{operator_matrix, G2Structure, InstantonResidual, ResidualSquares};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Integer frequency vector, zero-padded to seven entries.
pub type Mode = [i32; 7];

pub const ZERO_MODE: Mode = [0; 7];

fn neg_mode(m: &Mode) -> Mode {
    m.map(|x| -x)
}

fn add_modes(a: &Mode, b: &Mode) -> Mode {
    let mut out = [0; 7];
    for i in 0..7 {
        out[i] = a[i] + b[i];
    }
    out
}

fn basis_position(basis: &[MultiIndex], k: MultiIndex) -> usize {
    basis.binary_search(&k).expect("multi-index of the right degree")
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    dim: usize,
    degree: usize,
    group: Group,
    basis: Vec<MultiIndex>,
    modes: BTreeMap<Mode, Vec<M2>>,
}

impl FourierField {
    pub fn zero(dim: usize, degree: usize, group: Group) -> Self {
        assert!(dim <= 7 && degree <= dim, "field of degree {degree} on T^{dim}");
        FourierField { dim, degree, group, basis: MultiIndex::all(dim, degree), modes: BTreeMap::new() }
    }

    /// The constant field `a ⊗ X` for a real form `a` and algebra element `X`.
    pub fn constant(a: &ConstForm<f64>, x: M2, group: Group) -> Self {
        let mut f = Self::zero(a.dim(), a.degree(), group);
        let mut comps = vec![M2::zeros(); f.basis.len()];
        for (k, v) in a.terms() {
            comps[basis_position(&f.basis, k)] = x * c(*v, 0.0);
        }
        f.add_mode(ZERO_MODE, comps);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Mode, &Vec<M2>)> {
        self.modes.iter()
    }

    pub fn mode(&self, m: &Mode) -> Option<&Vec<M2>> {
        self.modes.get(m)
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `|mᵢ|` over stored modes.
    pub fn max_frequency(&self) -> i32 {
        self.modes.keys().flat_map(|m| m.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    pub fn component(&self, m: &Mode, idx: &[usize]) -> M2 {
        let Ok(Some((k, s))) = MultiIndex::sorted(idx) else { return M2::zeros() };
        match (self.modes.get(m), self.basis.binary_search(&k)) {
            (Some(v), Ok(p)) => v[p] * c(s as f64, 0.0),
            _ => M2::zeros(),
        }
    }

    /// Adds `comps` at mode `m`, dropping the mode if it cancels.
    pub fn add_mode(&mut self, m: Mode, comps: Vec<M2>) {
        assert_eq!(comps.len(), self.basis.len());
        assert!(m[self.dim..].iter().all(|&x| x == 0), "mode outside the torus dimension");
        let entry = self.modes.entry(m).or_insert_with(|| vec![M2::zeros(); comps.len()]);
        for (e, v) in entry.iter_mut().zip(comps) {
            *e += v;
        }
        if entry.iter().all(|x| x.iter().all(|z| *z == c(0.0, 0.0))) {
            self.modes.remove(&m);
        }
    }

    /// Adds `C` at `m` and `−C†` at `−m`, keeping the field real.
    pub fn add_real_mode(&mut self, m: Mode, comps: Vec<M2>) {
        if m == ZERO_MODE {
            let real = comps.iter().map(|x| (x - x.adjoint()) * c(0.5, 0.0)).collect();
            self.add_mode(m, real);
            return;
        }
        let conj = comps.iter().map(|x| -x.adjoint()).collect();
        self.add_mode(m, comps);
        self.add_mode(neg_mode(&m), conj);
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, got: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (m, v) in &other.modes {
            out.add_mode(*m, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.dim, self.degree, self.group);
        if s != 0.0 {
            for (m, v) in &self.modes {
                out.modes.insert(*m, v.iter().map(|x| x * c(s, 0.0)).collect());
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.dim, self.degree + 1, self.group);
        if self.degree == self.dim {
            return out;
        }
        for (m, v) in &self.modes {
            let mut comps = vec![M2::zeros(); out.basis.len()];
            for (j, &mj) in m.iter().enumerate().take(self.dim) {
                if mj == 0 {
                    continue;
                }
                let ej = MultiIndex::from_mask(1 << j);
                let factor = c(0.0, 2.0 * PI * mj as f64);
                for (p, k) in self.basis.iter().enumerate() {
                    let s = ej.wedge_sign(*k);
                    if s != 0 {
                        comps[basis_position(&out.basis, ej.union(*k))] += v[p] * factor * c(s as f64, 0.0);
                    }
                }
            }
            out.add_mode(*m, comps);
        }
        out
    }

    /// Wedge product with matrix multiplication of coefficients.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree.min(self.dim), self.group);
        if degree > self.dim {
            out.degree = degree;
            out.basis.clear();
            return Ok(out);
        }
        let table: Vec<(usize, usize, usize, f64)> = self
            .basis
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                let out_basis = &out.basis;
                other.basis.iter().enumerate().filter_map(move |(j, b)| {
                    let s = a.wedge_sign(*b);
                    (s != 0).then(|| (i, j, basis_position(out_basis, a.union(*b)), s as f64))
                })
            })
            .collect();
        let mut acc: BTreeMap<Mode, Vec<M2>> = BTreeMap::new();
        for (m1, v1) in &self.modes {
            for (m2, v2) in &other.modes {
                let entry = acc.entry(add_modes(m1, m2)).or_insert_with(|| vec![M2::zeros(); out.basis.len()]);
                for &(i, j, k, s) in &table {
                    entry[k] += v1[i] * v2[j] * c(s, 0.0);
                }
            }
        }
        for (m, v) in acc {
            out.add_mode(m, v);
        }
        Ok(out)
    }

    /// Graded commutator `[self ∧ other] = self∧other − (−1)^{pq} other∧self`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let sign = if (self.degree * other.degree) % 2 == 0 { -1.0 } else { 1.0 };
        self.wedge(other)?.add(&other.wedge(self)?.scale(sign))
    }

    /// Interior product with a constant vector.
    pub fn interior(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        if self.degree == 0 {
            return Ok(Self::zero(self.dim, 0, self.group));
        }
        let mut out = Self::zero(self.dim, self.degree - 1, self.group);
        for (m, comps) in &self.modes {
            let mut acc = vec![M2::zeros(); out.basis.len()];
            for (p, k) in self.basis.iter().enumerate() {
                for (pos, i) in k.indices().enumerate() {
                    if v[i - 1] == 0.0 {
                        continue;
                    }
                    let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                    let rest = MultiIndex::from_mask(k.mask() & !(1 << (i - 1)));
                    acc[basis_position(&out.basis, rest)] += comps[p] * c(sign * v[i - 1], 0.0);
                }
            }
            out.add_mode(*m, acc);
        }
        Ok(out)
    }

    /// Wedge with a constant real form on the right.
    pub fn wedge_const(&self, a: &ConstForm<f64>) -> Result<Self> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.dim() });
        }
        let degree = self.degree + a.degree();
        if degree > self.dim {
            return Err(Error::DegreeMismatch { expected: self.dim, got: degree });
        }
        let mut out = Self::zero(self.dim, degree, self.group);
        for (m, comps) in &self.modes {
            let mut acc = vec![M2::zeros(); out.basis.len()];
            for (p, k) in self.basis.iter().enumerate() {
                for (l, v) in a.terms() {
                    let s = k.wedge_sign(l);
                    if s != 0 {
                        acc[basis_position(&out.basis, k.union(l))] += comps[p] * c(s as f64 * v, 0.0);
                    }
                }
            }
            out.add_mode(*m, acc);
        }
        Ok(out)
    }

    /// Applies a real matrix to the form components of every mode.
    pub fn map_components(&self, m: &Mat<f64>, to_degree: usize) -> Result<Self> {
        if m.cols() != self.basis.len() {
            return Err(Error::Shape(format!("operator has {} columns for {} components", m.cols(), self.basis.len())));
        }
        let mut out = Self::zero(self.dim, to_degree, self.group);
        if m.rows() != out.basis.len() {
            return Err(Error::Shape(format!("operator has {} rows for {} components", m.rows(), out.basis.len())));
        }
        for (mode, comps) in &self.modes {
            let acc = (0..m.rows())
                .map(|i| {
                    let mut s = M2::zeros();
                    for (j, x) in comps.iter().enumerate() {
                        let w = m[(i, j)];
                        if w != 0.0 {
                            s += x * c(w, 0.0);
                        }
                    }
                    s
                })
                .collect();
            out.add_mode(*mode, acc);
        }
        Ok(out)
    }

    /// Pads the field to a higher-dimensional torus; no dependence on and
    /// no legs along the new coordinates.
    pub fn lift(&self, dim: usize) -> Result<Self> {
        if dim < self.dim || dim > 7 {
            return Err(Error::DimensionMismatch { expected: self.dim, got: dim });
        }
        let mut out = Self::zero(dim, self.degree, self.group);
        for (m, comps) in &self.modes {
            let mut acc = vec![M2::zeros(); out.basis.len()];
            for (k, x) in self.basis.iter().zip(comps) {
                acc[basis_position(&out.basis, *k)] = *x;
            }
            out.add_mode(*m, acc);
        }
        Ok(out)
    }

    /// `∫ tr(self ∧ other ∧ a)` over the unit torus, for a constant real `a`.
    pub fn integral_trace_wedge(&self, other: &Self, a: &ConstForm<f64>) -> Result<f64> {
        if other.dim != self.dim || a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim.max(a.dim()) });
        }
        let total = self.degree + other.degree + a.degree();
        if total != self.dim {
            return Err(Error::DegreeMismatch { expected: self.dim, got: total });
        }
        let table = trace_wedge_table(&self.basis, &other.basis, a);
        let mut acc = 0.0;
        for (m, u) in &self.modes {
            let Some(w) = other.modes.get(&neg_mode(m)) else { continue };
            for &(i, j, s) in &table {
                acc += s * (u[i] * w[j]).trace().re;
            }
        }
        Ok(acc)
    }

    /// `∫ tr(self)` for a top-degree field: the trace of the constant mode.
    pub fn integral_trace(&self) -> Result<f64> {
        if self.degree != self.dim {
            return Err(Error::DegreeMismatch { expected: self.dim, got: self.degree });
        }
        Ok(self.modes.get(&ZERO_MODE).map_or(0.0, |v| v[0].trace().re))
    }

    /// `∫ −tr(X ∧ ⋆X)` with the Λᵏ Gram matrix of a constant metric,
    /// excluding the volume factor.
    pub fn gram_norm_sq(&self, gram: &Mat<f64>) -> f64 {
        let mut acc = 0.0;
        for comps in self.modes.values() {
            for (i, x) in comps.iter().enumerate() {
                for (j, y) in comps.iter().enumerate() {
                    let g = gram[(i, j)];
                    if g != 0.0 {
                        acc += g * (x * y.adjoint()).trace().re;
                    }
                }
            }
        }
        acc
    }

    /// Euclidean `∫ −tr(X ∧ ⋆X)`: the sum of squared Frobenius norms.
    pub fn norm_sq(&self) -> f64 {
        self.modes.values().flat_map(|v| v.iter()).map(|x| x.norm_squared()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.values().flat_map(|v| v.iter()).flat_map(|x| x.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of `C_{−m} = −C_m†`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, v) in &self.modes {
            let partner = self.modes.get(&neg_mode(m));
            for (i, x) in v.iter().enumerate() {
                let y = partner.map_or(M2::zeros(), |p| p[i]);
                worst = worst.max((y + x.adjoint()).norm());
            }
        }
        worst
    }

    /// Values of the components at a point.
    pub fn eval(&self, x: &[f64]) -> Vec<M2> {
        let mut out = vec![M2::zeros(); self.basis.len()];
        for (m, comps) in &self.modes {
            let phase: f64 = m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
            let w = Complex64::from_polar(1.0, 2.0 * PI * phase);
            for (o, v) in out.iter_mut().zip(comps) {
                *o += v * w;
            }
        }
        out
    }

    /// A random real field with `n_modes` random frequencies in
    /// `[−max_freq, max_freq]ⁿ` (and their negatives) of amplitude `amp`.
    pub fn random<R: Rng>(
        rng: &mut R,
        group: Group,
        dim: usize,
        degree: usize,
        n_modes: usize,
        max_freq: i32,
        amp: f64,
    ) -> Self {
        let modes: Vec<Mode> = (0..n_modes)
            .map(|_| {
                let mut m = ZERO_MODE;
                for x in m.iter_mut().take(dim) {
                    *x = rng.random_range(-max_freq..=max_freq);
                }
                m
            })
            .collect();
        Self::random_on_modes(rng, group, dim, degree, &modes, amp)
    }

    /// A random real field supported on the given frequencies and their
    /// negatives.
    pub fn random_on_modes<R: Rng>(rng: &mut R, group: Group, dim: usize, degree: usize, modes: &[Mode], amp: f64) -> Self {
        let mut f = Self::zero(dim, degree, group);
        for &m in modes {
            let comps = (0..f.basis.len()).map(|_| random_coefficient(rng, group, amp, m == ZERO_MODE)).collect();
            f.add_real_mode(m, comps);
        }
        f
    }

    /// Frequencies carrying nonzero coefficients.
    pub fn frequencies(&self) -> Vec<Mode> {
        self.modes.keys().copied().collect()
    }
}

/// Nonzero coefficients `w` with `eᴵ ∧ eᴶ ∧ a = w·vol`, as `(i, j, w)` for
/// positions in the two bases.
pub(crate) fn trace_wedge_table(left: &[MultiIndex], right: &[MultiIndex], a: &ConstForm<f64>) -> Vec<(usize, usize, f64)> {
    let mut table = Vec::new();
    for (i, x) in left.iter().enumerate() {
        for (j, y) in right.iter().enumerate() {
            let s1 = x.wedge_sign(*y);
            if s1 == 0 {
                continue;
            }
            for (k, v) in a.terms() {
                let s2 = x.union(*y).wedge_sign(k);
                if s2 != 0 {
                    table.push((i, j, (s1 * s2) as f64 * v));
                }
            }
        }
    }
    table
}

fn random_coefficient<R: Rng>(rng: &mut R, group: Group, amp: f64, real: bool) -> M2 {
    let mut z = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if real { 0.0 } else { rng.sample(StandardNormal) };
        c(amp * re, amp * im)
    };
    match group {
        Group::U1 => super::algebra::u1_generator() * z(),
        Group::Su2 => super::algebra::su2_basis().iter().fold(M2::zeros(), |acc, b| acc + b * z()),
    }
}

/// Integer flux `m_{jk}` of a constant-curvature U(1) connection; the
/// curvature is `2πi Σ_{j<k} m_{jk} eʲᵏ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flux {
    dim: usize,
    entries: BTreeMap<(usize, usize), i64>,
}

impl Flux {
    /// From an antisymmetric integer matrix.
    pub fn from_matrix(m: &[Vec<i64>]) -> Result<Self> {
        let dim = m.len();
        if dim > 7 || m.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("flux must be a square matrix of size at most 7".into()));
        }
        let mut entries = BTreeMap::new();
        for j in 0..dim {
            for k in 0..dim {
                if m[j][k] != -m[k][j] {
                    return Err(Error::Invalid(format!("flux matrix is not antisymmetric at ({}, {})", j + 1, k + 1)));
                }
                if j < k && m[j][k] != 0 {
                    entries.insert((j + 1, k + 1), m[j][k]);
                }
            }
        }
        Ok(Flux { dim, entries })
    }

    /// From the six 4D entries `(m₁₂, m₁₃, m₁₄, m₂₃, m₂₄, m₃₄)`.
    pub fn four(m12: i64, m13: i64, m14: i64, m23: i64, m24: i64, m34: i64) -> Self {
        let rows = vec![
            vec![0, m12, m13, m14],
            vec![-m12, 0, m23, m24],
            vec![-m13, -m23, 0, m34],
            vec![-m14, -m24, -m34, 0],
        ];
        Self::from_matrix(&rows).expect("antisymmetric by construction")
    }

    /// Parses a JSON array of arrays, rejecting non-integers.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = || Error::Invalid("flux must be a square array of integers".into());
        let rows = v.as_array().ok_or_else(bad)?;
        let m: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| r.as_array().ok_or_else(bad)?.iter().map(|x| x.as_i64().ok_or_else(bad)).collect())
            .collect::<Result<_>>()?;
        Self::from_matrix(&m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m_{jk}` for 1-based indices in either order.
    pub fn get(&self, j: usize, k: usize) -> i64 {
        if j < k {
            self.entries.get(&(j, k)).copied().unwrap_or(0)
        } else {
            -self.entries.get(&(k, j)).copied().unwrap_or(0)
        }
    }

    pub fn matrix(&self) -> Vec<Vec<i64>> {
        (1..=self.dim).map(|j| (1..=self.dim).map(|k| self.get(j, k)).collect()).collect()
    }

    /// The real form `2π Σ m_{jk} eʲᵏ`, so the curvature is `i` times it.
    pub fn real_form(&self) -> ConstForm<f64> {
        let mut f = ConstForm::zero(self.dim, 2);
        for (&(j, k), &m) in &self.entries {
            f = f.add(&ConstForm::term(self.dim, &[j, k], 2.0 * PI * m as f64).unwrap()).unwrap();
        }
        f
    }

    /// `(1/8π²)∫ tr(F∧F)` over the base `T⁴` (coordinates 1–4):
    /// `−(m₁₂m₃₄ + m₁₃m₄₂ + m₁₄m₂₃)`.
    pub fn base_charge(&self) -> i64 {
        -(self.get(1, 2) * self.get(3, 4) + self.get(1, 3) * self.get(4, 2) + self.get(1, 4) * self.get(2, 3))
    }

    /// `m₁₂ = m₃₄`, `m₁₃ = m₄₂`, `m₁₄ = m₂₃`.
    pub fn is_self_dual(&self) -> bool {
        self.get(1, 2) == self.get(3, 4) && self.get(1, 3) == self.get(4, 2) && self.get(1, 4) == self.get(2, 3)
    }

    pub fn is_anti_self_dual(&self) -> bool {
        self.get(1, 2) == -self.get(3, 4) && self.get(1, 3) == -self.get(4, 2) && self.get(1, 4) == -self.get(2, 3)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same flux on a higher-dimensional torus.
    pub fn lift(&self, dim: usize) -> Result<Self> {
        if dim < self.dim || dim > 7 {
            return Err(Error::DimensionMismatch { expected: self.dim, got: dim });
        }
        Ok(Flux { dim, entries: self.entries.clone() })
    }
}

/// A curvature 2-form, with the integer flux of its constant part when it
/// describes a nontrivial U(1) bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub field: FourierField,
    pub flux: Option<Flux>,
}

impl CurvatureField {
    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Same curvature on a torus of dimension `dim` with no dependence on
    /// the extra coordinates.
    pub fn lift(&self, dim: usize) -> Result<Self> {
        Ok(CurvatureField {
            field: self.field.lift(dim)?,
            flux: self.flux.as_ref().map(|f| f.lift(dim)).transpose()?,
        })
    }

    /// Largest deviation of the constant U(1) part from `2πi·m`.
    pub fn flux_defect(&self) -> f64 {
        let Some(flux) = &self.flux else { return 0.0 };
        let expected = FourierField::constant(&flux.real_form(), super::algebra::u1_generator(), Group::U1);
        let zero = |f: &FourierField| f.mode(&ZERO_MODE).cloned().unwrap_or_else(|| vec![M2::zeros(); f.basis().len()]);
        zero(&self.field).iter().zip(zero(&expected)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Curvature `2πi Σ_{j<k} m_{jk} eʲᵏ` of a constant-curvature U(1)
/// connection on the unit torus.
pub fn constant_curvature_u1(flux: &Flux) -> CurvatureField {
    CurvatureField {
        field: FourierField::constant(&flux.real_form(), super::algebra::u1_generator(), Group::U1),
        flux: Some(flux.clone()),
    }
}

/// A connection `A = A_flux + a` with a periodic part `a` and an optional
/// constant-curvature U(1) background.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub flux: Option<Flux>,
    pub a: FourierField,
}

impl Connection {
    pub fn trivial(a: FourierField) -> Result<Self> {
        Self::new(None, a)
    }

    pub fn new(flux: Option<Flux>, a: FourierField) -> Result<Self> {
        if a.degree() != 1 {
            return Err(Error::DegreeMismatch { expected: 1, got: a.degree() });
        }
        if let Some(f) = &flux {
            if a.group() != Group::U1 {
                return Err(Error::Invalid("flux backgrounds are only supported for U(1)".into()));
            }
            if f.dim() != a.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), got: f.dim() });
            }
        }
        Ok(Connection { flux, a })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn group(&self) -> Group {
        self.a.group()
    }

    /// `F = F_flux + da + a∧a`.
    pub fn curvature(&self) -> Result<CurvatureField> {
        let mut f = self.a.d().add(&self.a.wedge(&self.a)?)?;
        if let Some(flux) = &self.flux {
            f = f.add(&constant_curvature_u1(flux).field)?;
        }
        Ok(CurvatureField { field: f, flux: self.flux.clone() })
    }

    /// Covariant derivative `d_A ω = dω + [a ∧ ω]`; the abelian background
    /// acts trivially on adjoint-valued forms.
    pub fn covariant_d(&self, w: &FourierField) -> Result<FourierField> {
        w.d().add(&self.a.bracket(w)?)
    }

    /// `A + h·b`.
    pub fn shifted(&self, b: &FourierField, h: f64) -> Result<Self> {
        Ok(Connection { flux: self.flux.clone(), a: self.a.add(&b.scale(h))? })
    }

    /// Same connection pulled back to a torus of dimension `dim`.
    pub fn lift(&self, dim: usize) -> Result<Self> {
        Connection::new(self.flux.as_ref().map(|f| f.lift(dim)).transpose()?, self.a.lift(dim)?)
    }
}

/// Energy split of a curvature on `T⁴` with metric `η`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YmEnergy4 {
    pub total: f64,
    pub sd_part: f64,
    pub asd_part: f64,
    pub q: f64,
}

/// `∫−tr(F∧⋆F)`, its split by `⋆_η` (orientation `e¹²³⁴`) and
/// `q = (1/8π²)∫tr(F∧F)`.
pub fn ym_energy_4d(f: &CurvatureField, eta: &Metric<f64>) -> Result<YmEnergy4> {
    let field = &f.field;
    if field.dim() != 4 || eta.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: field.dim().min(eta.dim()) });
    }
    if field.degree() != 2 {
        return Err(Error::DegreeMismatch { expected: 2, got: field.degree() });
    }
    let star = operator_matrix(4, 2, 2, |a| a.hodge(eta, Orientation::Positive))?;
    let basis = MultiIndex::all(4, 2);
    let gram = Mat::from_fn(6, 6, |i, j| eta.basis_inner(basis[i], basis[j]));
    let id = Mat::identity(6);
    let plus = id.add(&star).scale(&0.5);
    let minus = id.sub(&star).scale(&0.5);
    let vol = eta.sqrt_det()?;
    let sd = field.map_components(&plus, 2)?;
    let asd = field.map_components(&minus, 2)?;
    let total = vol * field.gram_norm_sq(&gram);
    let sd_part = vol * sd.gram_norm_sq(&gram);
    let asd_part = vol * asd.gram_norm_sq(&gram);
    let q = field.integral_trace_wedge(field, &ConstForm::scalar(4, 1.0))? / (8.0 * PI * PI);
    Ok(YmEnergy4 { total, sd_part, asd_part, q })
}

/// The 21×21 Gram matrix of Λ² and the 7×7 one of Λ⁶ for a metric on ℝ⁷.
fn grams(g: &Metric<f64>) -> (Mat<f64>, Mat<f64>) {
    let b2 = MultiIndex::all(7, 2);
    let b6 = MultiIndex::all(7, 6);
    (
        Mat::from_fn(21, 21, |i, j| g.basis_inner(b2[i], b2[j])),
        Mat::from_fn(7, 7, |i, j| g.basis_inner(b6[i], b6[j])),
    )
}

/// Linear maps entering the instanton residuals, as matrices.
#[derive(Clone, Debug)]
pub struct ResidualOperators {
    pub wedge_star_phi: Mat<f64>,
    pub star_equation: Mat<f64>,
    pub p7: Mat<f64>,
    pub p14: Mat<f64>,
    pub gram2: Mat<f64>,
    pub gram6: Mat<f64>,
    pub volume: f64,
}

impl ResidualOperators {
    pub fn new(s: &G2Structure<f64>) -> Result<Self> {
        let wedge_star_phi = operator_matrix(7, 2, 6, |a| s.l_star_phi(a))?;
        let inv = 1.0 / s.lambda14();
        let star_equation = Mat::identity(21).sub(&s.t_matrix().scale(&inv));
        let (gram2, gram6) = grams(s.metric());
        Ok(ResidualOperators {
            wedge_star_phi,
            star_equation,
            p7: s.p7_matrix().clone(),
            p14: s.p14_matrix().clone(),
            gram2,
            gram6,
            volume: s.metric().sqrt_det()?,
        })
    }

    /// Squared residual norms of a real 2-form given by its 21 components.
    pub fn squares(&self, v: &[f64]) -> ResidualSquares<f64> {
        let quad = |m: &Mat<f64>, g: &Mat<f64>| {
            let w = m.mul_vec(v);
            let gw = g.mul_vec(&w);
            w.iter().zip(&gw).map(|(a, b)| a * b).sum::<f64>()
        };
        ResidualSquares {
            wedge_star_phi: quad(&self.wedge_star_phi, &self.gram6),
            star_equation: quad(&self.star_equation, &self.gram2),
            seven: quad(&self.p7, &self.gram2),
        }
    }
}

/// L² instanton residuals of a 7D curvature field.
pub fn field_residual(f: &FourierField, ops: &ResidualOperators) -> Result<InstantonResidual> {
    if f.dim() != 7 || f.degree() != 2 {
        return Err(Error::Shape("instanton residuals need a 2-form on T⁷".into()));
    }
    let a = f.map_components(&ops.wedge_star_phi, 6)?.gram_norm_sq(&ops.gram6);
    let b = f.map_components(&ops.star_equation, 2)?.gram_norm_sq(&ops.gram2);
    let s = f.map_components(&ops.p7, 2)?.gram_norm_sq(&ops.gram2);
    Ok(ResidualSquares { wedge_star_phi: a * ops.volume, star_equation: b * ops.volume, seven: s * ops.volume }.norms())
}

/// Energy split of a curvature on the 7-torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Energy7 {
    pub f7sq: f64,
    pub f14sq: f64,
    pub ym: f64,
    pub kappa_integral: f64,
    /// `κ − (λ₇‖F₇‖² + λ₁₄‖F₁₄‖²)`.
    pub kappa_residual: f64,
}

/// `‖F₇‖²`, `‖F₁₄‖²` and, computed independently, `κ = −∫tr(F∧F)∧φ`.
pub fn energy_decomposition_7d(f: &FourierField, s: &G2Structure<f64>) -> Result<Energy7> {
    let ops = ResidualOperators::new(s)?;
    let f7sq = ops.volume * f.map_components(&ops.p7, 2)?.gram_norm_sq(&ops.gram2);
    let f14sq = ops.volume * f.map_components(&ops.p14, 2)?.gram_norm_sq(&ops.gram2);
    let kappa_integral = -f.integral_trace_wedge(f, s.phi())?;
    let ym = ops.volume * f.gram_norm_sq(&ops.gram2);
    let kappa_residual = kappa_integral - (s.lambda7() * f7sq + s.lambda14() * f14sq);
    Ok(Energy7 { f7sq, f14sq, ym, kappa_integral, kappa_residual })
}

/// The rational coefficients of `O(F⁻) = (F₃₄−F₁₂)e⁵ + (F₄₂−F₁₃)e⁶ + (F₂₃−F₁₄)e⁷`
/// for a constant base 2-form given by its flux.
pub fn anti_self_dual_defect(flux: &Flux) -> [i64; 3] {
    [
        flux.get(3, 4) - flux.get(1, 2),
        flux.get(4, 2) - flux.get(1, 3),
        flux.get(2, 3) - flux.get(1, 4),
    ]
}

/// Convenience: `Scalar` conversion for exact flux arithmetic in tests and
/// reports.
pub fn flux_form<S: Scalar>(flux: &Flux) -> ConstForm<S> {
    let mut f = ConstForm::zero(flux.dim(), 2);
    for j in 1..=flux.dim() {
        for k in j + 1..=flux.dim() {
            let m = flux.get(j, k);
            if m != 0 {
                f = f.add(&ConstForm::term(flux.dim(), &[j, k], S::from_i64(m)).unwrap()).unwrap();
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{eigen_split, standard_phi};
    use crate::rng::seeded;

    fn unit(dim: usize, i: usize) -> Vec<f64> {
        (0..dim).map(|j| (i == j) as i64 as f64).collect()
    }

    #[test]
    fn derivative_of_single_mode() {
        let mut a = FourierField::zero(4, 1, Group::U1);
        let mut m = ZERO_MODE;
        m[0] = 2;
        m[2] = -1;
        let coeff = super::super::algebra::u1_generator();
        let mut comps = vec![M2::zeros(); 4];
        comps[1] = coeff;
        a.add_real_mode(m, comps);
        let f = a.d();
        // d(C e^{2πi m·x} e²) = 2πi m₁ C e¹² + 2πi m₃ C e³² .
        assert!((f.component(&m, &[1, 2]) - coeff * c(0.0, 2.0 * PI * 2.0)).norm() < 1e-14);
        assert!((f.component(&m, &[3, 2]) - coeff * c(0.0, 2.0 * PI * -1.0)).norm() < 1e-14);
        assert!(f.reality_defect() < 1e-14);
        assert!(f.d().is_zero());
    }

    #[test]
    fn derivative_matches_pointwise_finite_difference() {
        let mut rng = seeded(4);
        let a = FourierField::random(&mut rng, Group::Su2, 4, 1, 3, 2, 0.5);
        let da = a.d();
        let x = [0.13, 0.71, 0.42, 0.05];
        let h = 1e-5;
        // (da)_{12} = ∂₁a₂ − ∂₂a₁.
        let deriv = |j: usize, comp: usize| {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            (a.eval(&xp)[comp] - a.eval(&xm)[comp]) / c(2.0 * h, 0.0)
        };
        let fd = deriv(0, 1) - deriv(1, 0);
        assert!((da.eval(&x)[0] - fd).norm() < 1e-6);
        assert!(a.reality_defect() < 1e-14);
        let v = a.eval(&x);
        assert!((v[0] + v[0].adjoint()).norm() < 1e-12);
    }

    #[test]
    fn abelian_gauge_invariance() {
        let mut rng = seeded(5);
        let a = FourierField::random(&mut rng, Group::U1, 4, 1, 4, 2, 0.3);
        let chi = FourierField::random(&mut rng, Group::U1, 4, 0, 2, 3, 0.3);
        let conn = Connection::trivial(a.clone()).unwrap();
        let gauged = Connection::trivial(a.add(&chi.d()).unwrap()).unwrap();
        let diff = conn.curvature().unwrap().field.sub(&gauged.curvature().unwrap().field).unwrap();
        assert!(diff.max_abs() < 1e-12);
        assert!(Connection::trivial(FourierField::zero(4, 1, Group::U1)).unwrap().curvature().unwrap().field.is_zero());
    }

    #[test]
    fn nonabelian_bianchi() {
        let mut rng = seeded(6);
        let a = FourierField::random(&mut rng, Group::Su2, 4, 1, 2, 1, 0.4);
        let conn = Connection::trivial(a).unwrap();
        let f = conn.curvature().unwrap().field;
        assert!(conn.covariant_d(&f).unwrap().max_abs() < 1e-11);
        assert!(f.reality_defect() < 1e-13);
    }

    #[test]
    fn constant_flux_examples() {
        let zero = constant_curvature_u1(&Flux::four(0, 0, 0, 0, 0, 0));
        assert!(zero.field.is_zero());
        let eta = Metric::euclidean(4);
        let sd = Flux::four(1, 0, 0, 0, 0, 1);
        assert!(sd.is_self_dual());
        assert_eq!(sd.base_charge(), -1);
        let e = ym_energy_4d(&constant_curvature_u1(&sd), &eta).unwrap();
        assert!((e.total - 2.0 * (2.0 * PI).powi(2)).abs() < 1e-12);
        assert!(e.asd_part.abs() < 1e-12);
        assert!((e.q + 1.0).abs() < 1e-14);
        let asd = Flux::four(1, 0, 0, 0, 0, -1);
        assert!(asd.is_anti_self_dual());
        assert_eq!(asd.base_charge(), 1);
        let e = ym_energy_4d(&constant_curvature_u1(&asd), &eta).unwrap();
        assert!(e.sd_part.abs() < 1e-12);
        assert!((e.q - 1.0).abs() < 1e-14);
        assert_eq!(constant_curvature_u1(&sd).flux_defect(), 0.0);
        assert!(Flux::from_matrix(&[vec![0, 1], vec![1, 0]]).is_err());
        assert!(Flux::from_json(&serde_json::json!([[0, 0.5], [-0.5, 0]])).is_err());
    }

    #[test]
    fn charge_formula_over_all_small_fluxes() {
        let eta = Metric::euclidean(4);
        let vals = [-1i64, 0, 1];
        for &a in &vals {
            for &b in &vals {
                for &c6 in &vals {
                    for &d in &vals {
                        let flux = Flux::four(a, b, c6, d, -b, a);
                        let e = ym_energy_4d(&constant_curvature_u1(&flux), &eta).unwrap();
                        assert!((e.q - flux.base_charge() as f64).abs() < 1e-13);
                        assert!((e.total - e.sd_part - e.asd_part).abs() < 1e-10);
                        assert!(e.q.abs() <= e.total / (8.0 * PI * PI) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn energy_with_fluctuation_and_general_metric() {
        let mut rng = seeded(8);
        let a = FourierField::random(&mut rng, Group::U1, 4, 1, 3, 2, 0.2);
        let conn = Connection::new(Some(Flux::four(1, 0, 1, 1, 0, 1)), a).unwrap();
        let f = conn.curvature().unwrap();
        let eta = Metric::new(Mat::diag(&[1.0, 2.0, 0.5, 1.5])).unwrap();
        let e = ym_energy_4d(&f, &eta).unwrap();
        assert!((e.total - e.sd_part - e.asd_part).abs() < 1e-9 * e.total);
        // Exact fluctuations do not change the charge.
        assert!((e.q - f.flux.as_ref().unwrap().base_charge() as f64).abs() < 1e-12);
        assert!(e.asd_part > 0.0);
    }

    #[test]
    fn integral_of_wedge_matches_pointwise_average() {
        let mut rng = seeded(9);
        let x = FourierField::random(&mut rng, Group::Su2, 4, 2, 2, 1, 0.5);
        let y = FourierField::random(&mut rng, Group::Su2, 4, 2, 2, 1, 0.5);
        let exact = x.integral_trace_wedge(&y, &ConstForm::scalar(4, 1.0)).unwrap();
        // Trapezoidal rule is exact for trigonometric polynomials of low degree.
        let n = 4usize;
        let mut acc = 0.0;
        let basis = MultiIndex::all(4, 2);
        for idx in 0..n.pow(4) {
            let p: Vec<f64> = (0..4).map(|k| ((idx / n.pow(k as u32)) % n) as f64 / n as f64).collect();
            let (u, w) = (x.eval(&p), y.eval(&p));
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let s = a.wedge_sign(*b);
                    if s != 0 {
                        acc += s as f64 * (u[i] * w[j]).trace().re;
                    }
                }
            }
        }
        acc /= n.pow(4) as f64;
        assert!((exact - acc).abs() < 1e-12);
        let top = x.wedge(&y).unwrap();
        assert!((top.integral_trace().unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn interior_and_const_wedge() {
        let mut rng = seeded(10);
        let f = FourierField::random(&mut rng, Group::Su2, 7, 2, 2, 1, 0.5);
        let v = unit(7, 0);
        let g = f.interior(&v).unwrap();
        assert!(g.interior(&v).unwrap().is_zero() || g.interior(&v).unwrap().max_abs() < 1e-15);
        let phi = standard_phi::<f64>();
        let lhs = f.wedge_const(&phi).unwrap();
        assert_eq!(lhs.degree(), 5);
        assert!(f.wedge_const(&ConstForm::volume(7)).is_err());
    }

    #[test]
    fn lifted_constant_fields() {
        let s = eigen_split(&standard_phi::<f64>()).unwrap();
        let ops = ResidualOperators::new(&s).unwrap();
        let sd = constant_curvature_u1(&Flux::four(1, 0, 0, 0, 0, 1)).lift(7).unwrap();
        let r = field_residual(&sd.field, &ops).unwrap();
        assert!(r.max() < 1e-12);
        let e = energy_decomposition_7d(&sd.field, &s).unwrap();
        assert!(e.f7sq.abs() < 1e-12);
        assert!((e.ym - e.kappa_integral.abs()).abs() < 1e-9);
        assert!((e.kappa_integral - 8.0 * PI * PI).abs() < 1e-9);
        let asd = constant_curvature_u1(&Flux::four(1, 0, 0, 0, 0, -1)).lift(7).unwrap();
        let e = energy_decomposition_7d(&asd.field, &s).unwrap();
        assert!(e.kappa_integral < 0.0);
        assert!((e.ym - (e.kappa_integral + 3.0 * e.f7sq)).abs() < 1e-9);
        assert!(e.kappa_residual.abs() < 1e-9);
        let zero = energy_decomposition_7d(&FourierField::zero(7, 2, Group::U1), &s).unwrap();
        assert_eq!((zero.f7sq, zero.f14sq, zero.ym, zero.kappa_integral), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn kappa_identity_on_random_fields() {
        let s = eigen_split(&standard_phi::<f64>()).unwrap();
        let mut rng = seeded(11);
        for _ in 0..5 {
            let f = FourierField::random(&mut rng, Group::Su2, 7, 2, 3, 1, 0.7);
            let e = energy_decomposition_7d(&f, &s).unwrap();
            assert!(e.kappa_residual.abs() < 1e-9 * (1.0 + e.ym));
            assert!((e.ym - e.f7sq - e.f14sq).abs() < 1e-9 * (1.0 + e.ym));
        }
    }
}
