//! Structure groups U(1) and SU(2) as 2×2 complex matrices.
//!
//! U(1) elements and Lie algebra elements are stored in the top-left entry
//! with the rest of the matrix zero, so products and traces reduce to the
//! scalar ones. The trace form `−tr(XY)` is positive-definite on both Lie
//! algebras.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type M2 = Matrix2<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zero() -> M2 {
    M2::zeros()
}

/// `i·σₖ` for the Pauli matrices; a basis of su(2).
pub fn su2_basis() -> [M2; 3] {
    let z = c(0.0, 0.0);
    [
        M2::new(z, c(0.0, 1.0), c(0.0, 1.0), z),
        M2::new(z, c(1.0, 0.0), c(-1.0, 0.0), z),
        M2::new(c(0.0, 1.0), z, z, c(0.0, -1.0)),
    ]
}

/// `i` in the top-left entry: the generator of u(1).
pub fn u1_generator() -> M2 {
    M2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

pub fn dagger(m: &M2) -> M2 {
    m.adjoint()
}

/// `−Re tr(XY)`.
pub fn neg_trace(x: &M2, y: &M2) -> f64 {
    -(x * y).trace().re
}

/// Real coordinates of a matrix whose Euclidean norm is the Frobenius norm.
///
/// For anti-Hermitian `X` the squared norm equals `−tr(X²)`, and
/// `Σ xᵢyᵢ = −Re tr(XY)` for anti-Hermitian `X`, `Y`.
pub fn real_coordinates(x: &M2) -> [f64; 8] {
    [
        x[(0, 0)].re,
        x[(0, 0)].im,
        x[(1, 1)].re,
        x[(1, 1)].im,
        x[(0, 1)].re,
        x[(0, 1)].im,
        x[(1, 0)].re,
        x[(1, 0)].im,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    U1,
    Su2,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::U1 => "u1",
            Group::Su2 => "su2",
        })
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(Group::U1),
            "su2" => Ok(Group::Su2),
            other => Err(Error::Invalid(format!("unknown group {other:?}; expected u1 or su2"))),
        }
    }
}

impl Group {
    pub fn code(self) -> u32 {
        match self {
            Group::U1 => 0,
            Group::Su2 => 1,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Group::U1),
            1 => Ok(Group::Su2),
            other => Err(Error::Invalid(format!("unknown group code {other}"))),
        }
    }

    pub fn identity(self) -> M2 {
        match self {
            Group::U1 => M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            Group::Su2 => M2::identity(),
        }
    }

    /// Number of real parameters of a group element in snapshots.
    pub fn stored_reals(self) -> usize {
        match self {
            Group::U1 => 2,
            Group::Su2 => 8,
        }
    }

    /// Projection onto the Lie algebra: the traceless anti-Hermitian part
    /// for SU(2), `i·Im` of the top-left entry for U(1).
    pub fn project(self, x: &M2) -> M2 {
        match self {
            Group::U1 => {
                let mut out = M2::zeros();
                out[(0, 0)] = c(0.0, x[(0, 0)].im);
                out
            }
            Group::Su2 => {
                let ah = (x - x.adjoint()) * c(0.5, 0.0);
                let t = ah.trace() * c(0.5, 0.0);
                ah - M2::identity() * t
            }
        }
    }

    /// Exponential of a Lie algebra element.
    pub fn exp(self, x: &M2) -> M2 {
        match self {
            Group::U1 => {
                let mut out = M2::zeros();
                out[(0, 0)] = x[(0, 0)].exp();
                out
            }
            Group::Su2 => {
                // x = i(a σ₁ + b σ₂ + c σ₃) with |x|² = a² + b² + c².
                let a = x[(0, 1)].im;
                let b = x[(0, 1)].re;
                let cc = x[(0, 0)].im;
                let norm = (a * a + b * b + cc * cc).sqrt();
                let sinc = if norm < 1e-8 { 1.0 - norm * norm / 6.0 } else { norm.sin() / norm };
                M2::identity() * c(norm.cos(), 0.0) + x * c(sinc, 0.0)
            }
        }
    }

    /// Nearest group element to an almost-unitary matrix.
    pub fn reunitarize(self, u: &M2) -> M2 {
        match self {
            Group::U1 => {
                let mut out = M2::zeros();
                let z = u[(0, 0)];
                out[(0, 0)] = z / z.norm();
                out
            }
            Group::Su2 => {
                let alpha = (u[(0, 0)] + u[(1, 1)].conj()) * 0.5;
                let beta = (u[(0, 1)] - u[(1, 0)].conj()) * 0.5;
                let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
                let (alpha, beta) = (alpha / n, beta / n);
                M2::new(alpha, beta, -beta.conj(), alpha.conj())
            }
        }
    }

    /// Distance from the group: `‖U U† − 1‖` plus the determinant defect.
    pub fn defect(self, u: &M2) -> f64 {
        let id = self.identity();
        let unitary = (u * u.adjoint() - id).norm();
        match self {
            Group::U1 => unitary + u[(0, 1)].norm() + u[(1, 0)].norm() + u[(1, 1)].norm(),
            Group::Su2 => unitary + (u.determinant() - c(1.0, 0.0)).norm(),
        }
    }

    /// Lie algebra element with independent normal coordinates of size `amp`.
    pub fn random_algebra<R: Rng>(self, rng: &mut R, amp: f64) -> M2 {
        match self {
            Group::U1 => u1_generator() * c(amp * rng.sample::<f64, _>(StandardNormal), 0.0),
            Group::Su2 => {
                let basis = su2_basis();
                let mut out = M2::zeros();
                for b in basis {
                    out += b * c(amp * rng.sample::<f64, _>(StandardNormal), 0.0);
                }
                out
            }
        }
    }

    pub fn random_element<R: Rng>(self, rng: &mut R, amp: f64) -> M2 {
        self.exp(&self.random_algebra(rng, amp))
    }

    /// Embeds a U(1) phase angle: `diag(e^{iθ}, 0)` for U(1) and
    /// `diag(e^{iθ}, e^{−iθ})` for SU(2).
    pub fn abelian(self, theta: f64) -> M2 {
        let z = c(0.0, theta).exp();
        match self {
            Group::U1 => M2::new(z, c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)),
            Group::Su2 => M2::new(z, c(0.0, 0.0), c(0.0, 0.0), z.conj()),
        }
    }

    /// Lie algebra element `θ·diag(i, 0)` or `θ·diag(i, −i)`.
    pub fn abelian_algebra(self, theta: f64) -> M2 {
        match self {
            Group::U1 => u1_generator() * c(theta, 0.0),
            Group::Su2 => su2_basis()[2] * c(theta, 0.0),
        }
    }
}
