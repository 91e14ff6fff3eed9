//! Connections on the 7-torus written as a family of base connections plus
//! Higgs-like fibre components, `𝐀 = A_t + Σ σᵢ dtⁱ`.
//!
//! The family is sampled on a periodic grid of `T₁ × T₂ × T₃` fibre points
//! (last index fastest); base fields are Fourier series on `T⁴`. Fibre
//! derivatives are centred differences with spacing `1/Tᵢ`.

use std::f64::consts::PI;

use serde::Serialize;

use super::algebra::Group;
use super::fourier::{field_residual, Connection, FourierField, ResidualOperators};
use crate::error::{Error, Result};
use crate::exterior::{omegas, ConstForm, MultiIndex};
use crate::g2core::{InstantonResidual, ResidualSquares};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct FiberedConnection {
    pub t_dims: [usize; 3],
    /// `A_t` at every grid point.
    pub base: Vec<Connection>,
    /// `(σ₁, σ₂, σ₃)` at every grid point, as Lie-algebra-valued functions on `T⁴`.
    pub sigma: Vec<[FourierField; 3]>,
}

/// The three blocks of the curvature at one fibre point.
#[derive(Clone, Debug)]
pub struct FiberedSlice {
    /// `F_{A_t}`.
    pub base: FourierField,
    /// `d_{A_t}σᵢ − ∂A_t/∂tⁱ` for `i = 1, 2, 3`.
    pub mixed: [FourierField; 3],
    /// `Xᵢⱼ = ½(∂ᵢσⱼ − ∂ⱼσᵢ + [σᵢ, σⱼ])`, antisymmetric, so that the
    /// `dt`-block of the curvature is `Σ_{i,j} Xᵢⱼ dtⁱ∧dtʲ`.
    pub sigma: [[FourierField; 3]; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockNorms {
    pub base: f64,
    pub mixed: f64,
    pub sigma: f64,
}

impl FiberedConnection {
    pub fn new(t_dims: [usize; 3], base: Vec<Connection>, sigma: Vec<[FourierField; 3]>) -> Result<Self> {
        let n: usize = t_dims.iter().product();
        if t_dims.iter().any(|&t| t < 4) {
            return Err(Error::Shape(format!("fibre grid {t_dims:?} needs at least 4 points per direction")));
        }
        if base.len() != n || sigma.len() != n {
            return Err(Error::Shape(format!(
                "fibre grid has {n} points but {} base fields and {} sigma triples",
                base.len(),
                sigma.len()
            )));
        }
        let group = base[0].group();
        for a in &base {
            if a.dim() != 4 || a.group() != group {
                return Err(Error::Shape("base connections must share the group and live on T⁴".into()));
            }
        }
        for s in sigma.iter().flatten() {
            if s.dim() != 4 || s.degree() != 0 || s.group() != group {
                return Err(Error::Shape("sigma components must be Lie-algebra-valued functions on T⁴".into()));
            }
        }
        Ok(FiberedConnection { t_dims, base, sigma })
    }

    /// The pullback of a single base connection: `A_t ≡ A`, `σ ≡ 0`.
    pub fn pullback(a: &Connection, t_dims: [usize; 3]) -> Result<Self> {
        let n = t_dims.iter().product();
        let zero = FourierField::zero(4, 0, a.group());
        Self::new(t_dims, vec![a.clone(); n], vec![[zero.clone(), zero.clone(), zero]; n])
    }

    /// `A_t = A + Σᵢ sin(2πtⁱ)/2π · dχᵢ` with `σᵢ = cos(2πtⁱ) χᵢ`, for an
    /// abelian `A`. Then `∂A_t/∂tⁱ = d_{A_t}σᵢ` exactly and every slice has
    /// the curvature of `A`, so the mixed block only sees the error of the
    /// centred differences.
    pub fn periodic_gauge_family(a: &Connection, chis: &[FourierField; 3], t_dims: [usize; 3]) -> Result<Self> {
        if a.group() != Group::U1 || chis.iter().any(|c| c.group() != Group::U1 || c.degree() != 0) {
            return Err(Error::Invalid("the periodic gauge family needs a U(1) connection and U(1) functions".into()));
        }
        let n: usize = t_dims.iter().product();
        let mut base = Vec::with_capacity(n);
        let mut sigma = Vec::with_capacity(n);
        for idx in 0..n {
            let [_, t2, t3] = t_dims;
            let t = [idx / (t2 * t3), (idx / t3) % t2, idx % t3];
            let phase: [f64; 3] = std::array::from_fn(|i| 2.0 * PI * t[i] as f64 / t_dims[i] as f64);
            let mut at = a.a.clone();
            for i in 0..3 {
                at = at.add(&chis[i].d().scale(phase[i].sin() / (2.0 * PI)))?;
            }
            base.push(Connection::new(a.flux.clone(), at)?);
            sigma.push(std::array::from_fn(|i| chis[i].scale(phase[i].cos())));
        }
        Self::new(t_dims, base, sigma)
    }

    pub fn points(&self) -> usize {
        self.base.len()
    }

    pub fn group(&self) -> Group {
        self.base[0].group()
    }

    pub fn index(&self, t: [usize; 3]) -> usize {
        (t[0] * self.t_dims[1] + t[1]) * self.t_dims[2] + t[2]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [_, t2, t3] = self.t_dims;
        [idx / (t2 * t3), (idx / t3) % t2, idx % t3]
    }

    fn shifted(&self, idx: usize, dir: usize, step: isize) -> usize {
        let mut t = self.coords(idx);
        let n = self.t_dims[dir] as isize;
        t[dir] = (t[dir] as isize + step).rem_euclid(n) as usize;
        self.index(t)
    }

    /// `(f(t + hεᵢ) − f(t − hεᵢ)) / 2h` with `h = 1/Tᵢ`.
    fn t_derivative(&self, idx: usize, dir: usize, f: impl Fn(usize) -> FourierField) -> Result<FourierField> {
        let h = 1.0 / self.t_dims[dir] as f64;
        let up = f(self.shifted(idx, dir, 1));
        let down = f(self.shifted(idx, dir, -1));
        Ok(up.sub(&down)?.scale(0.5 / h))
    }
}

/// The curvature blocks of `𝐀` at every fibre grid point.
pub fn fibered_curvature(conn: &FiberedConnection) -> Result<Vec<FiberedSlice>> {
    (0..conn.points())
        .map(|idx| {
            let a = &conn.base[idx];
            let s = &conn.sigma[idx];
            let base = a.curvature()?.field;
            let mixed = try_triple(|i| {
                let dt_a = conn.t_derivative(idx, i, |k| conn.base[k].a.clone())?;
                a.covariant_d(&s[i])?.sub(&dt_a)
            })?;
            let mut sigma: [[FourierField; 3]; 3] =
                std::array::from_fn(|_| std::array::from_fn(|_| FourierField::zero(4, 0, conn.group())));
            for i in 0..3 {
                for j in i + 1..3 {
                    let dj_i = conn.t_derivative(idx, i, |k| conn.sigma[k][j].clone())?;
                    let di_j = conn.t_derivative(idx, j, |k| conn.sigma[k][i].clone())?;
                    let x = dj_i.sub(&di_j)?.add(&s[i].bracket(&s[j])?)?.scale(0.5);
                    sigma[j][i] = x.scale(-1.0);
                    sigma[i][j] = x;
                }
            }
            Ok(FiberedSlice { base, mixed, sigma })
        })
        .collect()
}

fn try_triple<T>(mut f: impl FnMut(usize) -> Result<T>) -> Result<[T; 3]> {
    Ok([f(0)?, f(1)?, f(2)?])
}

impl FiberedSlice {
    /// The curvature at this fibre point as a 2-form on `T⁷` with the fibre
    /// coordinates `5, 6, 7`.
    pub fn assemble(&self) -> Result<FourierField> {
        let mut f = self.base.lift(7)?;
        for i in 0..3 {
            let dt = ConstForm::basis(7, &[5 + i])?;
            f = f.add(&self.mixed[i].lift(7)?.wedge_const(&dt)?)?;
            for j in i + 1..3 {
                let dtt = ConstForm::term(7, &[5 + i, 5 + j], 2.0)?;
                f = f.add(&self.sigma[i][j].lift(7)?.wedge_const(&dtt)?)?;
            }
        }
        Ok(f)
    }

    pub fn norms_sq(&self) -> BlockNorms {
        let mut sigma = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                sigma += 4.0 * self.sigma[i][j].norm_sq();
            }
        }
        BlockNorms { base: self.base.norm_sq(), mixed: self.mixed.iter().map(|m| m.norm_sq()).sum(), sigma }
    }
}

/// L² norms of the three blocks over `T⁴ × T³`, with the fibre average as
/// the quadrature in `t`.
pub fn block_norms(slices: &[FiberedSlice]) -> BlockNorms {
    let n = slices.len() as f64;
    let mut acc = BlockNorms { base: 0.0, mixed: 0.0, sigma: 0.0 };
    for s in slices {
        let b = s.norms_sq();
        acc.base += b.base / n;
        acc.mixed += b.mixed / n;
        acc.sigma += b.sigma / n;
    }
    BlockNorms { base: acc.base.sqrt(), mixed: acc.mixed.sqrt(), sigma: acc.sigma.sqrt() }
}

/// Instanton residuals of the assembled 7D curvature, with each fibre
/// point weighted by `1/(T₁T₂T₃)`.
pub fn assembled_residual(slices: &[FiberedSlice], ops: &ResidualOperators) -> Result<InstantonResidual> {
    let n = slices.len() as f64;
    let mut acc = ResidualSquares::zero();
    for s in slices {
        let r = field_residual(&s.assemble()?, ops)?;
        acc.accumulate(&ResidualSquares {
            wedge_star_phi: r.r_a * r.r_a / n,
            star_equation: r.r_b * r.r_b / n,
            seven: r.f7_norm * r.f7_norm / n,
        });
    }
    Ok(acc.norms())
}

/// `Q(Σ Xᵢⱼ dtⁱ∧dtʲ) = Σ_{i<j} Xᵢⱼ Σ_k εᵢⱼₖ ω_k` on an antisymmetric block.
pub fn q_map<S: Scalar>(x: &[[S; 3]; 3]) -> Result<ConstForm<S>> {
    for i in 0..3 {
        for j in 0..3 {
            if !(x[i][j].clone() + x[j][i].clone()).is_negligible(1e-12) {
                return Err(Error::Invalid(format!("fibre block is not antisymmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    let w = omegas::<S>();
    let mut out = ConstForm::zero(4, 2);
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        out = out.add(&w[k].scale(&x[i][j]))?;
    }
    Ok(out)
}

/// Indices of `dtⁱ ∧ dtʲ` in the fibre directions of `T⁷`.
pub fn fibre_plane(i: usize, j: usize) -> Result<MultiIndex> {
    MultiIndex::new(&[5 + i.min(j), 5 + i.max(j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{eigen_split, standard_phi};
    use crate::gauge::algebra::{c, su2_basis, M2};
    use crate::gauge::fourier::{Flux, ZERO_MODE};
    use crate::rng::seeded;
    use crate::scalar::rat;

    fn gauge_exact_family(t: usize) -> FiberedConnection {
        let mut rng = seeded(51);
        let a = FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.2).d();
        let chis = std::array::from_fn(|_| FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.3));
        let base = Connection::new(Some(Flux::four(1, 0, 0, 0, 0, 1)), a).unwrap();
        FiberedConnection::periodic_gauge_family(&base, &chis, [t; 3]).unwrap()
    }

    #[test]
    fn pullback_has_only_base_block() {
        let mut rng = seeded(52);
        let a = Connection::trivial(FourierField::random(&mut rng, Group::Su2, 4, 1, 2, 1, 0.3)).unwrap();
        let slices = fibered_curvature(&FiberedConnection::pullback(&a, [4; 3]).unwrap()).unwrap();
        let f = a.curvature().unwrap().field;
        for s in &slices {
            assert_eq!(s.base, f);
            assert!(s.mixed.iter().all(|m| m.is_zero()));
            assert!(s.sigma.iter().flatten().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn gauge_exact_family_has_second_order_mixed_block() {
        let errs: Vec<f64> = [4, 8, 16].iter().map(|&t| block_norms(&fibered_curvature(&gauge_exact_family(t)).unwrap()).mixed).collect();
        let slope = (errs[0] / errs[2]).ln() / 4f64.ln();
        assert!((slope - 2.0).abs() < 0.2, "errors {errs:?} slope {slope}");
        let sig = block_norms(&fibered_curvature(&gauge_exact_family(4)).unwrap()).sigma;
        assert!(sig < 1e-12);
    }

    #[test]
    fn constant_noncommuting_sigmas() {
        let b = su2_basis();
        let zero_a = Connection::trivial(FourierField::zero(4, 1, Group::Su2)).unwrap();
        let constant = |x: M2| {
            let mut f = FourierField::zero(4, 0, Group::Su2);
            f.add_mode(ZERO_MODE, vec![x]);
            f
        };
        let (s1, s2) = (b[0] * c(0.3, 0.0), b[1] * c(-0.5, 0.0));
        let n = 64;
        let conn = FiberedConnection::new(
            [4; 3],
            vec![zero_a; n],
            vec![[constant(s1), constant(s2), FourierField::zero(4, 0, Group::Su2)]; n],
        )
        .unwrap();
        let slices = fibered_curvature(&conn).unwrap();
        let expected = (s1 * s2 - s2 * s1) * c(0.5, 0.0);
        for s in &slices {
            assert_eq!(s.sigma[0][1].mode(&ZERO_MODE).unwrap()[0], expected);
            assert_eq!(s.sigma[1][0].mode(&ZERO_MODE).unwrap()[0], -expected);
            assert!(s.sigma[0][2].is_zero() && s.sigma[1][2].is_zero());
            assert!(s.mixed.iter().all(|m| m.is_zero()));
            assert!(s.base.is_zero());
        }
    }

    #[test]
    fn assembled_residual_vanishes_for_gauge_exact_sd_family_and_grows_with_sigma() {
        let s = eigen_split(&standard_phi::<f64>()).unwrap();
        let ops = ResidualOperators::new(&s).unwrap();
        let r4 = assembled_residual(&fibered_curvature(&gauge_exact_family(4)).unwrap(), &ops).unwrap().max();
        let r16 = assembled_residual(&fibered_curvature(&gauge_exact_family(16)).unwrap(), &ops).unwrap().max();
        assert!(r16 < r4 / 10.0);

        let b = su2_basis();
        let mut ratios = Vec::new();
        for scale in [0.1, 0.2, 0.4] {
            let constant = |x: M2| {
                let mut f = FourierField::zero(4, 0, Group::Su2);
                f.add_mode(ZERO_MODE, vec![x]);
                f
            };
            let conn = FiberedConnection::new(
                [4; 3],
                vec![Connection::trivial(FourierField::zero(4, 1, Group::Su2)).unwrap(); 64],
                vec![[constant(b[0] * c(scale, 0.0)), constant(b[1] * c(scale, 0.0)), FourierField::zero(4, 0, Group::Su2)]; 64],
            )
            .unwrap();
            let slices = fibered_curvature(&conn).unwrap();
            let r = assembled_residual(&slices, &ops).unwrap().max();
            ratios.push(r / block_norms(&slices).sigma);
        }
        assert!(ratios.iter().all(|&q| q > 0.1 && (q - ratios[0]).abs() < 1e-9), "{ratios:?}");
    }

    #[test]
    fn q_map_values() {
        let mut x = [[rat(0, 1), rat(0, 1), rat(0, 1)], [rat(0, 1), rat(0, 1), rat(0, 1)], [rat(0, 1), rat(0, 1), rat(0, 1)]];
        assert!(q_map(&x).unwrap().is_zero());
        x[0][1] = rat(1, 1);
        x[1][0] = rat(-1, 1);
        assert_eq!(q_map(&x).unwrap(), omegas()[2]);
        let y = [[rat(0, 1), rat(-1, 1), rat(0, 1)], [rat(1, 1), rat(0, 1), rat(0, 1)], [rat(0, 1), rat(0, 1), rat(0, 1)]];
        assert_eq!(q_map(&y).unwrap(), omegas()[2].neg());
        let bad = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        assert!(q_map(&bad).is_err());
    }
}
