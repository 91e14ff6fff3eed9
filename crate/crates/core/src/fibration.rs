//! Flat G2-torus fibrations `T³ → 𝕋 → T⁴`.
//!
//! A fibration is specified by a metric `η` on ℝ⁴, a lattice `L` in the
//! fibre `Λ²₊ ≅ ℝ³` and a twisting map `α: ℝ⁴ → Λ²₊`. The seven lattice
//! generators are the columns of
//!
//! ```text
//!     G = ⎡ η^{-1/2}      0  ⎤
//!         ⎣ α·η^{-1/2}    L  ⎦
//! ```
//!
//! in ambient coordinates `(x, y) ∈ ℝ⁴ ⊕ ℝ³`, so the base generators form an
//! η-orthonormal basis and are sheared into the fibre by `α`. The 3-form is
//! `φ = (G⁻¹)*φ₀`, which makes all seven generators orthonormal and turns
//! `c = G⁻¹(x, y)` into frame coordinates where `φ = φ₀` and the torus is
//! the unit cube. The fibration map is the projection `(x, y) ↦ x`.
//!
//! Deformations of the coassociative form are classified in frame
//! coordinates by how many fibre legs each basis 4-form carries.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{extend, omegas, shift, ConstForm, Metric, MultiIndex, Orientation};
use crate::g2core::{eigen_split, metric_from_phi, standard_phi, G2Structure};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Symmetric square root of an SPD matrix and its inverse.
///
/// Exact scalars support diagonal matrices with rational square roots.
pub fn spd_sqrt<S: Scalar>(m: &Mat<S>) -> Result<(Mat<S>, Mat<S>)> {
    if !S::EXACT {
        let (r, ri) = m.to_f64().spd_sqrt()?;
        let back = |x: &Mat<f64>| -> Result<Mat<S>> {
            let mut out = Mat::zeros(x.rows(), x.cols());
            for i in 0..x.rows() {
                for j in 0..x.cols() {
                    out[(i, j)] = S::from_f64(x[(i, j)])
                        .ok_or_else(|| Error::NotPositiveDefinite("non-finite square root".into()))?;
                }
            }
            Ok(out)
        };
        return Ok((back(&r)?, back(&ri)?));
    }
    let n = m.rows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)].is_zero()));
    if !diagonal {
        return Err(Error::Inexact("square root of a non-diagonal matrix".into()));
    }
    let roots: Vec<S> = (0..n)
        .map(|i| {
            m[(i, i)]
                .root(2)
                .filter(|r| r.is_positive())
                .ok_or_else(|| Error::Inexact(format!("square root of {:?}", m[(i, i)])))
        })
        .collect::<Result<_>>()?;
    let inv: Vec<S> = roots.iter().map(|r| S::one() / r.clone()).collect();
    Ok((Mat::diag(&roots), Mat::diag(&inv)))
}

/// The η-adapted forms `ω₁, ω₂, ω₃` on ℝ⁴.
///
/// These are `(η^{1/2})*ωᵢ / det(η)^{1/4}`: they reduce to the standard
/// forms at `η = I`, depend continuously on `η`, are unchanged by constant
/// rescaling of `η`, and satisfy `ωᵢ∧ωⱼ = −2δᵢⱼ e¹²³⁴`. They span the
/// `−1` eigenspace of `⋆_η` for the orientation `e¹²³⁴`, i.e. the `+1`
/// eigenspace for the opposite orientation.
pub fn sd_basis<S: Scalar>(eta: &Metric<S>) -> Result<[ConstForm<S>; 3]> {
    if eta.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: eta.dim() });
    }
    let (half, _) = spd_sqrt(eta.matrix())?;
    let scale = half
        .det()
        .root(2)
        .ok_or_else(|| Error::Inexact("fourth root of det η".into()))?;
    let inv = S::one() / scale;
    let [a, b, c] = omegas::<S>();
    Ok([
        a.pullback(&half)?.scale(&inv),
        b.pullback(&half)?.scale(&inv),
        c.pullback(&half)?.scale(&inv),
    ])
}

/// The data `(η, L, α)` defining a fibration.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrationSpec<S> {
    eta: Metric<S>,
    l_basis: Mat<S>,
    alpha: Mat<S>,
}

impl<S: Scalar> FibrationSpec<S> {
    /// `l_basis` holds the three fibre lattice vectors as columns, in the
    /// unit-normalized coordinates of [`sd_basis`]; `alpha` is 3×4.
    pub fn new(eta: Metric<S>, l_basis: Mat<S>, alpha: Mat<S>) -> Result<Self> {
        if eta.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: eta.dim() });
        }
        if l_basis.rows() != 3 || l_basis.cols() != 3 {
            return Err(Error::Shape(format!("fibre lattice must be 3x3, got {}x{}", l_basis.rows(), l_basis.cols())));
        }
        if alpha.rows() != 3 || alpha.cols() != 4 {
            return Err(Error::Shape(format!("twisting map must be 3x4, got {}x{}", alpha.rows(), alpha.cols())));
        }
        if l_basis.rank(1e-12) < 3 {
            return Err(Error::Invalid("fibre lattice vectors are linearly dependent".into()));
        }
        Ok(FibrationSpec { eta, l_basis, alpha })
    }

    /// The untwisted product torus: `η = I`, standard `L`, `α = 0`.
    pub fn standard() -> Self {
        Self::new(Metric::euclidean(4), Mat::identity(3), Mat::zeros(3, 4)).expect("standard data is valid")
    }

    pub fn eta(&self) -> &Metric<S> {
        &self.eta
    }

    pub fn l_basis(&self) -> &Mat<S> {
        &self.l_basis
    }

    pub fn alpha(&self) -> &Mat<S> {
        &self.alpha
    }

    pub fn with_alpha(&self, alpha: Mat<S>) -> Result<Self> {
        Self::new(self.eta.clone(), self.l_basis.clone(), alpha)
    }

    pub fn to_json(&self) -> Value {
        let rows = |m: &Mat<S>| -> Value {
            Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(S::to_json).collect())).collect())
        };
        json!({
            "eta": rows(self.eta.matrix()),
            "l_basis": rows(&self.l_basis.transpose()),
            "alpha": rows(&self.alpha),
        })
    }

    /// Parses `{"eta": 4x4, "l_basis": three 3-vectors, "alpha": 3x4}`;
    /// unknown keys are rejected and omitted keys take standard values.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Invalid("fibration spec must be a JSON object".into()))?;
        if let Some(k) = obj.keys().find(|k| !["eta", "l_basis", "alpha"].contains(&k.as_str())) {
            return Err(Error::Invalid(format!("unknown fibration spec key {k:?}")));
        }
        let matrix = |name: &str, rows: usize, cols: usize| -> Result<Option<Mat<S>>> {
            let Some(m) = obj.get(name) else { return Ok(None) };
            let bad = || Error::Invalid(format!("{name:?} must be a {rows}x{cols} array"));
            let arr = m.as_array().ok_or_else(bad)?;
            if arr.len() != rows {
                return Err(bad());
            }
            let mut out = Vec::with_capacity(rows);
            for r in arr {
                let r = r.as_array().ok_or_else(bad)?;
                if r.len() != cols {
                    return Err(bad());
                }
                out.push(r.iter().map(S::from_json).collect::<Result<Vec<S>>>()?);
            }
            Mat::from_rows(&out).map(Some)
        };
        let eta = match matrix("eta", 4, 4)? {
            Some(m) => Metric::new(m)?,
            None => Metric::euclidean(4),
        };
        let l_basis = matrix("l_basis", 3, 3)?.map(|m| m.transpose()).unwrap_or_else(|| Mat::identity(3));
        let alpha = matrix("alpha", 3, 4)?.unwrap_or_else(|| Mat::zeros(3, 4));
        Self::new(eta, l_basis, alpha)
    }
}

/// A fibration together with its lattice and induced G2-structure.
#[derive(Clone, Debug)]
pub struct TorusFibration<S: Scalar> {
    spec: FibrationSpec<S>,
    generators: Mat<S>,
    generators_inv: Mat<S>,
    phi: ConstForm<S>,
    g2: G2Structure<S>,
    f_matrix: Mat<S>,
}

pub fn build_fibration<S: Scalar>(spec: &FibrationSpec<S>) -> Result<TorusFibration<S>> {
    let (_, base) = spd_sqrt(spec.eta.matrix())?;
    let shear = spec.alpha.mul(&base);
    let generators = Mat::from_fn(7, 7, |i, j| match (i < 4, j < 4) {
        (true, true) => base[(i, j)].clone(),
        (true, false) => S::zero(),
        (false, true) => shear[(i - 4, j)].clone(),
        (false, false) => spec.l_basis[(i - 4, j - 4)].clone(),
    });
    let generators_inv = generators.inverse()?;
    let phi = standard_phi::<S>().pullback(&generators_inv)?;
    let g2 = eigen_split(&phi)?;
    let f_matrix = Mat::from_fn(4, 7, |i, j| if i == j { S::one() } else { S::zero() });
    Ok(TorusFibration { spec: spec.clone(), generators, generators_inv, phi, g2, f_matrix })
}

impl<S: Scalar> TorusFibration<S> {
    pub fn spec(&self) -> &FibrationSpec<S> {
        &self.spec
    }

    /// Lattice generators as columns.
    pub fn generators(&self) -> &Mat<S> {
        &self.generators
    }

    pub fn phi(&self) -> &ConstForm<S> {
        &self.phi
    }

    pub fn structure(&self) -> &G2Structure<S> {
        &self.g2
    }

    /// The 4×7 matrix of the projection onto the base.
    pub fn f_matrix(&self) -> &Mat<S> {
        &self.f_matrix
    }

    /// Largest entry of `Gᵀ g G − I`.
    pub fn orthonormality_residual(&self) -> f64 {
        let g = self.g2.metric().matrix();
        self.generators.transpose().mul(g).mul(&self.generators).max_abs_diff(&Mat::identity(7))
    }

    /// Whether the lattice splits as base × fibre (`α = 0`).
    pub fn is_product(&self) -> bool {
        self.spec.alpha.max_abs() == 0.0
    }

    /// `φ` restricted to the fibre `{0} ⊕ ℝ³`, as a 3-form on ℝ³.
    pub fn fibre_restriction(&self) -> Result<ConstForm<S>> {
        let inclusion = Mat::from_fn(7, 3, |i, j| if i == j + 4 { S::one() } else { S::zero() });
        self.phi.pullback(&inclusion)
    }

    /// Riemannian volume form of the fibre, as a 3-form on ℝ³.
    pub fn fibre_volume(&self) -> Result<ConstForm<S>> {
        let g = self.g2.metric().matrix();
        let idx = [4, 5, 6];
        let fibre = Metric::new(g.select(&idx, &idx))?;
        fibre.volume(Orientation::Positive)
    }

    /// Frame coordinates of an ambient vector.
    pub fn to_frame_vector(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != 7 {
            return Err(Error::DimensionMismatch { expected: 7, got: v.len() });
        }
        Ok(self.generators_inv.mul_vec(v))
    }

    /// Rewrites an ambient form in frame coordinates.
    pub fn to_frame_form(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        a.pullback(&self.generators)
    }

    /// Rewrites a frame-coordinate form in ambient coordinates.
    pub fn from_frame_form(&self, a: &ConstForm<S>) -> Result<ConstForm<S>> {
        a.pullback(&self.generators_inv)
    }

    /// Deformation types of an ambient 4-form.
    pub fn decompose(&self, xi: &ConstForm<S>) -> Result<DeformationSplit<S>> {
        decompose_deformation(&self.to_frame_form(xi)?)
    }
}

/// Pulls a constant base form back to the total space.
pub fn pullback_along_f<S: Scalar>(fib: &TorusFibration<S>, a: &ConstForm<S>) -> Result<ConstForm<S>> {
    if a.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: a.dim() });
    }
    a.pullback(fib.f_matrix())
}

/// The five orthogonal blocks of a 4-form on ℝ⁷ = ℝ⁴ ⊕ ℝ³.
///
/// With `⋆₄` the Euclidean star of the base, the basis elements are
/// `e¹²³⁴` (I), `(⋆₄eʲ)∧e^{4+i}` (II), `ωⱼ^±∧fₖ` with fibre 2-forms
/// `f = (e⁶⁷, e⁷⁵, e⁵⁶)` (III) and `eʲ∧e⁵⁶⁷` (IV). Here `ω⁺ = (e¹²−e³⁴,
/// e¹³−e⁴², e¹⁴−e²³)` pairs with the fibre in the model form and `ω⁻`
/// flips the inner signs. Type III basis elements have squared norm 2.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSplit<S> {
    pub c_i: S,
    /// Row `i` is the fibre direction, column `j` the base direction.
    pub c_ii: Mat<S>,
    /// Row `k` is the fibre 2-form, column `j` the base 2-form.
    pub c_iii_pp: Mat<S>,
    pub c_iii_mp: Mat<S>,
    pub c_iv: Vec<S>,
}

struct Basis<S> {
    ii: Vec<Vec<ConstForm<S>>>,
    iii_pp: Vec<Vec<ConstForm<S>>>,
    iii_mp: Vec<Vec<ConstForm<S>>>,
    iv: Vec<ConstForm<S>>,
}

fn e7<S: Scalar>(idx: &[usize]) -> ConstForm<S> {
    ConstForm::basis(7, idx).expect("valid basis index")
}

fn anti_omegas<S: Scalar>() -> [ConstForm<S>; 3] {
    let pair = |a: [usize; 2], b: [usize; 2]| {
        ConstForm::<S>::basis(4, &a).unwrap().add(&ConstForm::basis(4, &b).unwrap()).unwrap()
    };
    [pair([1, 2], [3, 4]), pair([1, 3], [4, 2]), pair([1, 4], [2, 3])]
}

fn deformation_basis<S: Scalar>() -> Basis<S> {
    let g4 = Metric::<S>::euclidean(4);
    let fibre_two = [[6, 7], [7, 5], [5, 6]];
    let ii = (0..3)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let star = ConstForm::<S>::basis(4, &[j + 1]).unwrap().hodge(&g4, Orientation::Positive).unwrap();
                    extend(&star, 7).unwrap().wedge(&e7(&[5 + i])).unwrap()
                })
                .collect()
        })
        .collect();
    let iii = |family: [ConstForm<S>; 3]| -> Vec<Vec<ConstForm<S>>> {
        fibre_two
            .iter()
            .map(|f| family.iter().map(|w| extend(w, 7).unwrap().wedge(&e7(f)).unwrap()).collect())
            .collect()
    };
    let iv = (0..4).map(|j| e7::<S>(&[j + 1, 5, 6, 7])).collect();
    Basis { ii, iii_pp: iii(omegas()), iii_mp: iii(anti_omegas()), iv }
}

/// Splits a frame-coordinate 4-form into its deformation types.
pub fn decompose_deformation<S: Scalar>(xi: &ConstForm<S>) -> Result<DeformationSplit<S>> {
    if xi.dim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: xi.dim() });
    }
    if xi.degree() != 4 {
        return Err(Error::DegreeMismatch { expected: 4, got: xi.degree() });
    }
    let basis = deformation_basis::<S>();
    let g = Metric::<S>::euclidean(7);
    let pair = |b: &ConstForm<S>| xi.inner(b, &g).expect("shapes agree");
    let half = S::from_ratio(1, 2);
    let grid = |rows: &Vec<Vec<ConstForm<S>>>, weight: &S| {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| pair(&rows[i][j]) * weight.clone())
    };
    Ok(DeformationSplit {
        c_i: xi.coeff(&[1, 2, 3, 4]),
        c_ii: grid(&basis.ii, &S::one()),
        c_iii_pp: grid(&basis.iii_pp, &half),
        c_iii_mp: grid(&basis.iii_mp, &half),
        c_iv: basis.iv.iter().map(pair).collect(),
    })
}

impl<S: Scalar> DeformationSplit<S> {
    /// The five block components as frame-coordinate 4-forms, in the order
    /// I, II, III(+), III(−), IV.
    pub fn components(&self) -> [ConstForm<S>; 5] {
        let basis = deformation_basis::<S>();
        let sum = |rows: &Vec<Vec<ConstForm<S>>>, c: &Mat<S>| {
            let mut acc = ConstForm::zero(7, 4);
            for (i, row) in rows.iter().enumerate() {
                for (j, b) in row.iter().enumerate() {
                    acc = acc.add(&b.scale(&c[(i, j)])).unwrap();
                }
            }
            acc
        };
        let mut iv = ConstForm::zero(7, 4);
        for (b, c) in basis.iv.iter().zip(&self.c_iv) {
            iv = iv.add(&b.scale(c)).unwrap();
        }
        [
            e7::<S>(&[1, 2, 3, 4]).scale(&self.c_i),
            sum(&basis.ii, &self.c_ii),
            sum(&basis.iii_pp, &self.c_iii_pp),
            sum(&basis.iii_mp, &self.c_iii_mp),
            iv,
        ]
    }

    pub fn reassemble(&self) -> ConstForm<S> {
        self.components().iter().fold(ConstForm::zero(7, 4), |acc, c| acc.add(c).unwrap())
    }

    /// Squared Euclidean norms of the five blocks.
    pub fn block_norms_sq(&self) -> [S; 5] {
        let sq = |m: &Mat<S>| {
            let mut acc = S::zero();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    acc = acc + m[(i, j)].clone() * m[(i, j)].clone();
                }
            }
            acc
        };
        let two = S::from_i64(2);
        [
            self.c_i.clone() * self.c_i.clone(),
            sq(&self.c_ii),
            sq(&self.c_iii_pp) * two.clone(),
            sq(&self.c_iii_mp) * two,
            self.c_iv.iter().fold(S::zero(), |a, c| a + c.clone() * c.clone()),
        ]
    }

    pub fn has_type_iv(&self) -> bool {
        self.c_iv.iter().any(|c| !c.is_zero())
    }

    pub fn to_json(&self) -> Value {
        let mat = |m: &Mat<S>| -> Value {
            Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(S::to_json).collect())).collect())
        };
        let norms: Vec<Value> = self.block_norms_sq().iter().map(|x| json!(x.to_f64().sqrt())).collect();
        json!({
            "c_I": self.c_i.to_json(),
            "c_II": mat(&self.c_ii),
            "c_III_pp": mat(&self.c_iii_pp),
            "c_III_mp": mat(&self.c_iii_mp),
            "c_IV": Value::Array(self.c_iv.iter().map(S::to_json).collect()),
            "norms": {
                "I": norms[0], "II": norms[1], "III_pp": norms[2], "III_mp": norms[3], "IV": norms[4],
            },
        })
    }
}

/// `⋆_{φ+φ'}(φ+φ') − ⋆_φ φ`, computed without linearization.
pub fn xi_from_perturbation<S: Scalar>(phi: &ConstForm<S>, dphi: &ConstForm<S>) -> Result<ConstForm<S>> {
    let perturbed = phi.add(dphi)?;
    let star = |p: &ConstForm<S>, what: &str| -> Result<ConstForm<S>> {
        let (g, o, _) = metric_from_phi(p).map_err(|e| match e {
            Error::UnstableForm(msg) => Error::UnstableForm(format!("{what} 3-form: {msg}")),
            other => other,
        })?;
        p.hodge(&g, o)
    };
    star(&perturbed, "perturbed")?.sub(&star(phi, "unperturbed")?)
}

/// `−½ q · (coefficient of e⁵⁶⁷ in v⌟ξ)` for frame-coordinate `ξ` and `v`.
///
/// On the unit-volume torus this is the pairing of the base class `q·[e¹²³⁴]`
/// with the Poincaré dual of `−½ v⌟ξ`; only the type IV block contributes.
pub fn frame_pairing<S: Scalar>(xi: &ConstForm<S>, v: &[S], q: &S) -> Result<S> {
    if xi.dim() != 7 || xi.degree() != 4 {
        return Err(Error::Shape("pairing expects a 4-form on ℝ⁷".into()));
    }
    let contracted = xi.interior(v)?;
    Ok(-(S::from_ratio(1, 2) * q.clone()) * contracted.coeff(&[5, 6, 7]))
}

/// The pairing for an ambient 4-form and ambient vector on `fib`.
pub fn poincare_pairing<S: Scalar>(xi: &ConstForm<S>, v: &[S], q: &S, fib: &TorusFibration<S>) -> Result<S> {
    frame_pairing(&fib.to_frame_form(xi)?, &fib.to_frame_vector(v)?, q)
}

/// The base 1-form `ε` with `ξ_IV = −2ε∧e⁵⁶⁷`.
pub fn type_iv_covector<S: Scalar>(split: &DeformationSplit<S>) -> Vec<S> {
    let factor = S::from_ratio(-1, 2);
    split.c_iv.iter().map(|c| c.clone() * factor.clone()).collect()
}

/// The 4-form `−2ε∧e⁵⁶⁷` for a base covector `ε`.
pub fn type_iv_form<S: Scalar>(eps: &[S]) -> Result<ConstForm<S>> {
    if eps.len() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: eps.len() });
    }
    let one = extend(&ConstForm::one_form(eps), 7)?;
    Ok(one.wedge(&e7(&[5, 6, 7]))?.scale(&S::from_i64(-2)))
}

/// Fibre copies of the base forms: `ωᵢ` on coordinates 5, 6, 7.
pub fn fibre_copy<S: Scalar>(a: &ConstForm<S>) -> Result<ConstForm<S>> {
    shift(a, 3, 7)
}

/// Dimension count of the five blocks.
pub const BLOCK_DIMS: [usize; 5] = [1, 12, 9, 9, 4];

/// Multi-indices of degree 4 in ℝ⁷ with exactly `fibre_legs` indices in 5..7.
pub fn indices_with_fibre_legs(fibre_legs: usize) -> Vec<MultiIndex> {
    MultiIndex::all(7, 4).into_iter().filter(|k| (k.mask() >> 4).count_ones() as usize == fibre_legs).collect()
}
