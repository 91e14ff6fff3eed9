//! Algebraic identities of the model G2-structure, checked in either
//! precision.
//!
//! In exact mode every residual is computed over the rationals and must be
//! exactly zero. In double mode the same computations run over `f64` and a
//! residual passes below [`DOUBLE_TOL`].

use serde::Serialize;

use crate::error::Result;
use crate::exterior::{extend, omegas, ConstForm, Metric, MultiIndex, Orientation};
use crate::fibration::{decompose_deformation, BLOCK_DIMS};
use crate::g2core::{eigen_split, metric_from_phi, operator_matrix, standard_phi, standard_psi, LAMBDA_14, LAMBDA_7};
use crate::gauge::q_map;
use crate::linalg::Mat;
use crate::scalar::{Precision, Rational, Scalar};

/// Pass threshold for double-precision residuals.
pub const DOUBLE_TOL: f64 = 1e-12;

/// Rank threshold for double-precision elimination.
const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub mode: Precision,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub mode: Precision,
    pub lambda7: f64,
    pub lambda14: f64,
    pub checks: Vec<IdentityCheck>,
    pub all_pass: bool,
}

pub fn identity_suite(mode: Precision) -> Result<IdentityReport> {
    match mode {
        Precision::Exact => suite::<Rational>(mode),
        Precision::Double => suite::<f64>(mode),
    }
}

fn unit<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    (0..n).map(|j| if j == i { S::one() } else { S::zero() }).collect()
}

fn rank_gap<S: Scalar>(m: &Mat<S>, expected: usize) -> f64 {
    (m.rank(RANK_TOL) as f64 - expected as f64).abs()
}

fn suite<S: Scalar>(mode: Precision) -> Result<IdentityReport> {
    let phi = standard_phi::<S>();
    let g7 = Metric::<S>::euclidean(7);
    let mut checks = Vec::new();
    let mut push = |name: &'static str, residual: f64| {
        let pass = match mode {
            Precision::Exact => residual == 0.0,
            Precision::Double => residual <= DOUBLE_TOL,
        };
        checks.push(IdentityCheck { name, mode, residual, pass });
    };

    push("hodge_star_of_phi", phi.hodge(&g7, Orientation::Positive)?.max_abs_diff(&standard_psi()));

    let (metric, orientation, _) = metric_from_phi(&phi)?;
    let wrong_orientation = if orientation == Orientation::Positive { 0.0 } else { 1.0 };
    push("metric_of_phi", metric.matrix().max_abs_diff(&Mat::identity(7)) + wrong_orientation);

    let s = eigen_split(&phi)?;
    let spectrum = (s.lambda7().clone() - S::from_i64(LAMBDA_7)).abs().to_f64()
        + (s.lambda14().clone() - S::from_i64(LAMBDA_14)).abs().to_f64();
    let id21 = Mat::<S>::identity(21);
    let multiplicities = rank_gap(&s.t_matrix().sub(&id21.scale(s.lambda14())), 7)
        + rank_gap(&s.t_matrix().sub(&id21.scale(s.lambda7())), 14);
    push("t_spectrum", spectrum + multiplicities);

    // Λ²₇ is spanned by the seven contractions eᵢ⌟φ.
    let generators: Vec<ConstForm<S>> = (0..7).map(|i| phi.interior(&unit(7, i))).collect::<Result<_>>()?;
    let mut fixed = 0.0f64;
    for g in &generators {
        fixed = fixed.max(s.p7(g)?.max_abs_diff(g));
    }
    let gen_matrix = Mat::from_fn(21, 7, |i, j| generators[j].to_vector()[i].clone());
    push("lambda7_span", fixed + rank_gap(&gen_matrix, 7) + rank_gap(s.p7_matrix(), 7));

    let l = operator_matrix(7, 2, 6, |a| a.wedge(s.star_phi()))?;
    push("l_star_phi_kernel", l.mul(s.p14_matrix()).max_abs() + rank_gap(&l, 7));

    // Q(dtⁱ∧dtʲ) against the cyclic formula and against the double
    // contraction of the coassociative form by fibre vectors.
    let w = omegas::<S>();
    let mut q_defect = 0.0f64;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let mut x: [[S; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| S::zero()));
        x[i][j] = S::one();
        x[j][i] = -S::one();
        let q = q_map(&x)?;
        let contracted = standard_psi::<S>().interior(&unit(7, 4 + j))?.interior(&unit(7, 4 + i))?;
        q_defect = q_defect.max(q.max_abs_diff(&w[k])).max(extend(&q, 7)?.max_abs_diff(&contracted));
    }
    push("fibre_map_q", q_defect);

    let basis4 = MultiIndex::all(7, 4);
    let xi = ConstForm::from_terms(
        7,
        4,
        basis4.iter().enumerate().map(|(k, idx)| {
            let sign = if k % 3 == 1 { -1 } else { 1 };
            (*idx, S::from_ratio(sign * (k as i64 + 1), k as i64 + 3))
        }),
    )?;
    let split = decompose_deformation(&xi)?;
    let parseval = split.block_norms_sq().into_iter().fold(S::zero(), |a, b| a + b) - xi.inner(&xi, &g7)?;
    push("deformation_reassembly", split.reassemble().max_abs_diff(&xi) + parseval.abs().to_f64());

    let mut blocks: Vec<Mat<S>> = (0..5).map(|_| Mat::zeros(35, 35)).collect();
    for (col, idx) in basis4.iter().enumerate() {
        let e = ConstForm::from_terms(7, 4, [(*idx, S::one())])?;
        for (b, comp) in decompose_deformation(&e)?.components().iter().enumerate() {
            for (row, c) in comp.to_vector().into_iter().enumerate() {
                blocks[b][(row, col)] = c;
            }
        }
    }
    let dims: f64 = blocks.iter().zip(BLOCK_DIMS).map(|(m, d)| rank_gap(m, d)).sum();
    let total = (BLOCK_DIMS.iter().sum::<usize>() as f64 - basis4.len() as f64).abs();
    push("deformation_dimensions", dims + total);

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(IdentityReport {
        mode,
        lambda7: s.lambda7().to_f64(),
        lambda14: s.lambda14().to_f64(),
        checks,
        all_pass,
    })
}
