//! Constant-coefficient exterior algebra on ℝⁿ, n ≤ 7.
//!
//! Forms are stored sparsely as maps from [`MultiIndex`] to coefficients,
//! with zero coefficients removed, so equality of forms is structural.
//! Basis symbols are 1-based: `e^{125}` is `MultiIndex::new(&[1, 2, 5])`.
//!
//! The Hodge star for a general metric uses the induced inner product on
//! Λᵏ, whose matrix entries are the Gram determinants `det(g⁻¹[I, J])`,
//! together with the identity `α ∧ ⋆β = ⟨α, β⟩ dVol`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Largest ambient dimension supported.
pub const MAX_DIM: usize = 7;

/// A strictly increasing tuple of indices in `1..=n`, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex(u8);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    /// Builds from strictly increasing 1-based indices.
    pub fn new(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u8;
        let mut last = 0;
        for &i in indices {
            if i == 0 || i > MAX_DIM || i <= last {
                return Err(Error::InvalidIndex { indices: indices.to_vec(), dim: MAX_DIM });
            }
            mask |= 1 << (i - 1);
            last = i;
        }
        Ok(MultiIndex(mask))
    }

    /// Sorts arbitrary indices, returning the permutation sign, or `None`
    /// when an index repeats.
    pub fn sorted(indices: &[usize]) -> Result<Option<(Self, i64)>> {
        let mut mask = 0u8;
        let mut sign = 1;
        for (k, &i) in indices.iter().enumerate() {
            if i == 0 || i > MAX_DIM {
                return Err(Error::InvalidIndex { indices: indices.to_vec(), dim: MAX_DIM });
            }
            if mask & (1 << (i - 1)) != 0 {
                return Ok(None);
            }
            let inversions = indices[..k].iter().filter(|&&j| j > i).count();
            if inversions % 2 == 1 {
                sign = -sign;
            }
            mask |= 1 << (i - 1);
        }
        Ok(Some((MultiIndex(mask), sign)))
    }

    pub fn from_mask(mask: u8) -> Self {
        MultiIndex(mask)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=8).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |b| self.0 & (1 << b) != 0).map(|b| b + 1)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn max_index(self) -> usize {
        8 - self.0.leading_zeros() as usize
    }

    /// Complement inside `1..=dim`.
    pub fn complement(self, dim: usize) -> Self {
        let full = if dim >= 8 { u8::MAX } else { (1u8 << dim) - 1 };
        MultiIndex(full & !self.0)
    }

    /// Sign of `e^self ∧ e^other`, zero when the indices overlap.
    pub fn wedge_sign(self, other: MultiIndex) -> i64 {
        if self.0 & other.0 != 0 {
            return 0;
        }
        let mut swaps = 0u32;
        for b in 0..8 {
            if other.0 & (1 << b) != 0 {
                swaps += (self.0 >> b).count_ones();
            }
        }
        if swaps % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn union(self, other: MultiIndex) -> MultiIndex {
        MultiIndex(self.0 | other.0)
    }

    /// All multi-indices of degree `k` in `1..=dim`, lexicographically.
    pub fn all(dim: usize, k: usize) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (0u16..(1u16 << dim))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| MultiIndex(m as u8))
            .collect();
        out.sort();
        out
    }

    fn reversed(self) -> u8 {
        self.0.reverse_bits()
    }
}

impl Ord for MultiIndex {
    // Lexicographic on the index tuple within a degree.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.reversed().cmp(&self.reversed()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^")?;
        for i in self.indices() {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Orientation relative to `e¹ ∧ … ∧ eⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> i64 {
        match self {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }

    pub fn from_sign(s: i64) -> Self {
        if s < 0 {
            Orientation::Negative
        } else {
            Orientation::Positive
        }
    }

    pub fn reversed(self) -> Self {
        Orientation::from_sign(-self.sign())
    }
}

/// A symmetric positive-definite inner product on vectors of ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric<S> {
    g: Mat<S>,
    inv: Mat<S>,
    sqrt_det: Option<S>,
    identity: bool,
}

impl<S: Scalar> Metric<S> {
    pub fn new(g: Mat<S>) -> Result<Self> {
        if !g.is_square() || g.rows() > MAX_DIM {
            return Err(Error::Shape(format!("metric must be square with n ≤ 7, got {}x{}", g.rows(), g.cols())));
        }
        if !g.is_symmetric() {
            return Err(Error::NotPositiveDefinite("matrix is not symmetric".into()));
        }
        let scale = (0..g.rows()).map(|i| g[(i, i)].to_f64().abs()).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        for p in g.ldl_pivots() {
            let bad = if S::EXACT { !p.is_positive() } else { p.to_f64() <= tol };
            if bad {
                return Err(Error::NotPositiveDefinite(format!("pivot {p:?} is not positive")));
            }
        }
        let inv = g.inverse()?;
        let sqrt_det = g.det().root(2);
        let identity = g == Mat::identity(g.rows());
        Ok(Metric { g, inv, sqrt_det, identity })
    }

    /// Averages `g` with its transpose before validating; for metrics
    /// produced by floating-point arithmetic.
    pub fn symmetrized(g: Mat<S>) -> Result<Self> {
        let two = S::from_i64(2);
        let s = Mat::from_fn(g.rows(), g.cols(), |i, j| {
            (g[(i, j)].clone() + g[(j, i)].clone()) / two.clone()
        });
        Self::new(s)
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(Mat::identity(n)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.g
    }

    pub fn inverse(&self) -> &Mat<S> {
        &self.inv
    }

    pub fn is_euclidean(&self) -> bool {
        self.identity
    }

    pub fn sqrt_det(&self) -> Result<S> {
        self.sqrt_det
            .clone()
            .ok_or_else(|| Error::Inexact("square root of the metric determinant".into()))
    }

    /// Induced inner product of the basis forms `e^I`, `e^J`.
    pub fn basis_inner(&self, a: MultiIndex, b: MultiIndex) -> S {
        if a.degree() != b.degree() {
            return S::zero();
        }
        if self.identity {
            return if a == b { S::one() } else { S::zero() };
        }
        let ia: Vec<usize> = a.indices().map(|i| i - 1).collect();
        let ib: Vec<usize> = b.indices().map(|i| i - 1).collect();
        self.inv.select(&ia, &ib).det()
    }

    pub fn vector_inner(&self, u: &[S], v: &[S]) -> S {
        let gv = self.g.mul_vec(v);
        u.iter().zip(&gv).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// Volume form `o · √det g · e^{1…n}`.
    pub fn volume(&self, o: Orientation) -> Result<ConstForm<S>> {
        let n = self.dim();
        let c = self.sqrt_det()? * S::from_i64(o.sign());
        Ok(ConstForm::volume(n).scale(&c))
    }
}

/// A constant-coefficient k-form on ℝⁿ.
#[derive(Clone, PartialEq)]
pub struct ConstForm<S> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> fmt::Debug for ConstForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}·{k}")?;
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::DimensionMismatch { expected: MAX_DIM, got: dim });
    }
    Ok(())
}

impl<S: Scalar> ConstForm<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        ConstForm { dim, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: S) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(MultiIndex::EMPTY, c);
        f
    }

    pub fn volume(dim: usize) -> Self {
        let mut f = Self::zero(dim, dim);
        f.add_term(MultiIndex::EMPTY.complement(dim), S::one());
        f
    }

    /// `c · e^{i₁…i_k}` for indices in any order; repeated indices give 0.
    pub fn term(dim: usize, indices: &[usize], c: S) -> Result<Self> {
        check_dim(dim)?;
        if indices.iter().any(|&i| i == 0 || i > dim) {
            return Err(Error::InvalidIndex { indices: indices.to_vec(), dim });
        }
        let mut f = Self::zero(dim, indices.len());
        if let Some((idx, s)) = MultiIndex::sorted(indices)? {
            f.add_term(idx, c * S::from_i64(s));
        }
        Ok(f)
    }

    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        Self::term(dim, indices, S::one())
    }

    pub fn from_terms(
        dim: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (MultiIndex, S)>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let mut f = Self::zero(dim, degree);
        for (k, c) in terms {
            if k.degree() != degree || k.max_index() > dim {
                return Err(Error::InvalidIndex { indices: k.to_vec(), dim });
            }
            f.add_term(k, c);
        }
        Ok(f)
    }

    /// The 1-form `Σ vᵢ eⁱ`.
    pub fn one_form(v: &[S]) -> Self {
        let mut f = Self::zero(v.len(), 1);
        for (i, c) in v.iter().enumerate() {
            f.add_term(MultiIndex(1 << i), c.clone());
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &S)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn get(&self, idx: MultiIndex) -> S {
        self.terms.get(&idx).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of `e^{i₁…i_k}` with indices in any order.
    pub fn coeff(&self, indices: &[usize]) -> S {
        match MultiIndex::sorted(indices) {
            Ok(Some((idx, s))) => self.get(idx) * S::from_i64(s),
            _ => S::zero(),
        }
    }

    /// Adds `c · e^idx`, dropping the entry if it cancels.
    pub fn add_term(&mut self, idx: MultiIndex, c: S) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(idx.degree(), self.degree);
        match self.terms.get_mut(&idx) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&idx);
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
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
        for (k, c) in &other.terms {
            out.add_term(*k, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, v) in &self.terms {
            out.add_term(*k, v.clone() * c.clone());
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree);
        if degree > self.dim {
            return Ok(out);
        }
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let s = a.wedge_sign(*b);
                if s != 0 {
                    out.add_term(a.union(*b), x.clone() * y.clone() * S::from_i64(s));
                }
            }
        }
        Ok(out)
    }

    /// Interior product `v ⌟ self`.
    pub fn interior(&self, v: &[S]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        if self.degree == 0 {
            return Ok(Self::zero(self.dim, 0));
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (k, c) in &self.terms {
            for (pos, i) in k.indices().enumerate() {
                let vi = &v[i - 1];
                if vi.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { S::one() } else { -S::one() };
                out.add_term(MultiIndex(k.0 & !(1 << (i - 1))), c.clone() * vi.clone() * sign);
            }
        }
        Ok(out)
    }

    /// Hodge star `⋆: Λᵏ → Λⁿ⁻ᵏ` for the metric `g` and orientation `o`.
    pub fn hodge(&self, g: &Metric<S>, o: Orientation) -> Result<Self> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.dim() });
        }
        let n = self.dim;
        if self.degree > n {
            return Err(Error::DegreeMismatch { expected: n, got: self.degree });
        }
        let factor = g.sqrt_det()? * S::from_i64(o.sign());
        let mut out = Self::zero(n, n - self.degree);
        if g.is_euclidean() {
            for (k, c) in &self.terms {
                let comp = k.complement(n);
                let s = k.wedge_sign(comp);
                out.add_term(comp, c.clone() * factor.clone() * S::from_i64(s));
            }
            return Ok(out);
        }
        for i in MultiIndex::all(n, self.degree) {
            let mut pairing = S::zero();
            for (j, c) in &self.terms {
                let gij = g.basis_inner(i, *j);
                if !gij.is_zero() {
                    pairing = pairing + gij * c.clone();
                }
            }
            if pairing.is_zero() {
                continue;
            }
            let comp = i.complement(n);
            let s = i.wedge_sign(comp);
            out.add_term(comp, pairing * factor.clone() * S::from_i64(s));
        }
        Ok(out)
    }

    /// Induced inner product `⟨self, other⟩_g`.
    pub fn inner(&self, other: &Self, g: &Metric<S>) -> Result<S> {
        self.same_shape(other)?;
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: g.dim() });
        }
        let mut acc = S::zero();
        if g.is_euclidean() {
            for (k, c) in &self.terms {
                if let Some(d) = other.terms.get(k) {
                    acc = acc + c.clone() * d.clone();
                }
            }
            return Ok(acc);
        }
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                acc = acc + g.basis_inner(*a, *b) * x.clone() * y.clone();
            }
        }
        Ok(acc)
    }

    /// Pullback along the linear map `ℝᵐ → ℝⁿ` with `n × m` matrix `m`:
    /// `(M*a)(v₁,…) = a(Mv₁,…)`.
    pub fn pullback(&self, m: &Mat<S>) -> Result<Self> {
        if m.rows() != self.dim {
            return Err(Error::Shape(format!(
                "pullback matrix has {} rows, form has dimension {}",
                m.rows(),
                self.dim
            )));
        }
        check_dim(m.cols())?;
        let target = m.cols();
        let rows: Vec<Self> = (0..self.dim).map(|i| Self::one_form(m.row(i))).collect();
        let mut out = Self::zero(target, self.degree);
        for (k, c) in &self.terms {
            let mut acc = Self::scalar(target, c.clone());
            for i in k.indices() {
                acc = acc.wedge(&rows[i - 1])?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ConstForm<T> {
        let mut out = ConstForm::zero(self.dim, self.degree);
        for (k, c) in &self.terms {
            out.add_term(*k, f(c));
        }
        out
    }

    pub fn to_f64(&self) -> ConstForm<f64> {
        self.map(S::to_f64)
    }

    /// Coefficient vector in the lexicographic basis of Λᵏ.
    pub fn to_vector(&self) -> Vec<S> {
        MultiIndex::all(self.dim, self.degree).into_iter().map(|k| self.get(k)).collect()
    }

    pub fn from_vector(dim: usize, degree: usize, v: &[S]) -> Result<Self> {
        let basis = MultiIndex::all(dim, degree);
        if basis.len() != v.len() {
            return Err(Error::Shape(format!("expected {} coefficients, got {}", basis.len(), v.len())));
        }
        Self::from_terms(dim, degree, basis.into_iter().zip(v.iter().cloned()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (k, c) in &self.terms {
            worst = worst.max((c.clone() - other.get(*k)).to_f64().abs());
        }
        for (k, c) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(c.to_f64().abs());
            }
        }
        worst
    }

    /// Drops coefficients with `|c| ≤ tol` (no-op in exact mode).
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, c) in &self.terms {
            if !c.is_negligible(tol) {
                out.add_term(*k, c.clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(k, c)| json!({ "idx": k.to_vec(), "c": c.to_json() }))
            .collect();
        json!({ "dim": self.dim, "degree": self.degree, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Invalid(format!("form JSON is missing {name:?}")))
        };
        let dim = field("dim")?;
        let degree = field("degree")?;
        check_dim(dim)?;
        if degree > dim {
            return Err(Error::Invalid(format!("degree {degree} exceeds dimension {dim}")));
        }
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("form JSON is missing \"terms\"".into()))?;
        let mut f = Self::zero(dim, degree);
        for t in terms {
            let idx: Vec<usize> = t
                .get("idx")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid("term is missing \"idx\"".into()))?
                .iter()
                .map(|x| x.as_u64().map(|x| x as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Invalid("non-integer index".into()))?;
            if idx.len() != degree {
                return Err(Error::DegreeMismatch { expected: degree, got: idx.len() });
            }
            let c = S::from_json(
                t.get("c").ok_or_else(|| Error::Invalid("term is missing \"c\"".into()))?,
            )?;
            f = f.add(&Self::term(dim, &idx, c)?)?;
        }
        Ok(f)
    }
}

impl<S: Scalar> Serialize for ConstForm<S> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for ConstForm<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ConstForm::from_json(&v).map_err(serde::de::Error::custom)
    }
}

pub fn wedge<S: Scalar>(a: &ConstForm<S>, b: &ConstForm<S>) -> Result<ConstForm<S>> {
    a.wedge(b)
}

pub fn hodge<S: Scalar>(a: &ConstForm<S>, g: &Metric<S>, o: Orientation) -> Result<ConstForm<S>> {
    a.hodge(g, o)
}

pub fn interior<S: Scalar>(v: &[S], a: &ConstForm<S>) -> Result<ConstForm<S>> {
    a.interior(v)
}

pub fn form_inner<S: Scalar>(a: &ConstForm<S>, b: &ConstForm<S>, g: &Metric<S>) -> Result<S> {
    a.inner(b, g)
}

pub fn pullback_linear<S: Scalar>(m: &Mat<S>, a: &ConstForm<S>) -> Result<ConstForm<S>> {
    a.pullback(m)
}

/// The three forms `ω₁ = e¹²−e³⁴`, `ω₂ = e¹³−e⁴²`, `ω₃ = e¹⁴−e²³` on ℝ⁴.
pub fn omegas<S: Scalar>() -> [ConstForm<S>; 3] {
    let pair = |a: [usize; 2], b: [usize; 2]| {
        ConstForm::basis(4, &a).unwrap().sub(&ConstForm::basis(4, &b).unwrap()).unwrap()
    };
    [pair([1, 2], [3, 4]), pair([1, 3], [4, 2]), pair([1, 4], [2, 3])]
}

/// Embeds a form on ℝᵐ into ℝⁿ (n ≥ m) along the first m coordinates.
pub fn extend<S: Scalar>(a: &ConstForm<S>, n: usize) -> Result<ConstForm<S>> {
    if n < a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: n });
    }
    ConstForm::from_terms(n, a.degree(), a.terms().map(|(k, c)| (k, c.clone())))
}

/// Shifts every index of a form on ℝᵐ by `offset` inside ℝⁿ.
pub fn shift<S: Scalar>(a: &ConstForm<S>, offset: usize, n: usize) -> Result<ConstForm<S>> {
    if a.dim() + offset > n {
        return Err(Error::DimensionMismatch { expected: n, got: a.dim() + offset });
    }
    ConstForm::from_terms(
        n,
        a.degree(),
        a.terms().map(|(k, c)| (MultiIndex::from_mask(k.mask() << offset), c.clone())),
    )
}
