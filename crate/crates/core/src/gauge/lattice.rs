//! Link variables on periodic hypercubic lattices.
//!
//! Sites are numbered row-major with the last coordinate fastest; links are
//! stored site-major with the direction innermost. `U_μ(x)` transports from
//! `x + μ̂` back to `x`, so with `U_μ(x) ≈ exp(a A_μ)` the plaquette is
//! `≈ exp(a² F_μν)`.
//!
//! A plane may carry a central twist: the plaquette whose lower corner sits
//! at `(N_μ − 1, N_ν − 1)` is multiplied by `−1`. This describes SU(2)
//! bundles whose transition functions commute only up to the centre, and
//! lets abelian constant-curvature configurations with odd half-integer
//! flux live on the lattice.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::algebra::{c, real_coordinates, Group, M2};
use super::fourier::{Flux, ResidualOperators};
use crate::error::{Error, Result};
use crate::g2core::{InstantonResidual, ResidualSquares};

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    dims: Vec<usize>,
    strides: Vec<usize>,
    group: Group,
    links: Vec<M2>,
    spacings: Vec<f64>,
    twists: Vec<(usize, usize)>,
}

/// Wilson-type lattice actions built from the clover field strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeActions {
    /// `Σ_x a⁴ Σ_{μ<ν} −tr(F̂_μν²)`.
    pub total: f64,
    /// The same for the anti-self-dual part.
    pub asd: f64,
    /// `asd / total`, zero for a flat field.
    pub asd_fraction: f64,
}

/// Plane pairs `(μν, ρσ)` with `e^{μνρσ} = e^{1234}`, 0-based, in the order
/// `(12, 34)`, `(13, 42)`, `(14, 23)`.
pub const DUAL_PAIRS: [((usize, usize), (usize, usize)); 3] = [((0, 1), (2, 3)), ((0, 2), (3, 1)), ((0, 3), (1, 2))];

fn strides_for(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// 0-based plane index of `(μ, ν)`, `μ < ν`, in the lexicographic order of
/// the 2-form basis.
pub fn plane_index(d: usize, mu: usize, nu: usize) -> usize {
    debug_assert!(mu < nu && nu < d);
    (0..mu).map(|k| d - 1 - k).sum::<usize>() + (nu - mu - 1)
}

impl LatticeField {
    /// All links set to the identity, spacings `1/N_μ`.
    pub fn identity(dims: &[usize], group: Group) -> Result<Self> {
        if dims.is_empty() || dims.len() > 7 {
            return Err(Error::Shape(format!("lattice dimension {} is not in 1..=7", dims.len())));
        }
        if let Some(n) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::Shape(format!("every lattice extent must be at least 2, got {n}")));
        }
        let sites: usize = dims.iter().product();
        Ok(LatticeField {
            dims: dims.to_vec(),
            strides: strides_for(dims),
            group,
            links: vec![group.identity(); sites * dims.len()],
            spacings: dims.iter().map(|&n| 1.0 / n as f64).collect(),
            twists: Vec::new(),
        })
    }

    /// Assembles a field from raw parts, checking shapes.
    pub fn from_parts(
        dims: Vec<usize>,
        group: Group,
        links: Vec<M2>,
        spacings: Vec<f64>,
        twists: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let mut f = Self::identity(&dims, group)?;
        if links.len() != f.links.len() {
            return Err(Error::Shape(format!("expected {} links, got {}", f.links.len(), links.len())));
        }
        if spacings.len() != dims.len() || spacings.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Shape("one positive spacing per direction is required".into()));
        }
        f.links = links;
        f.spacings = spacings;
        f.set_twists(twists)?;
        Ok(f)
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn sites(&self) -> usize {
        self.links.len() / self.dims.len()
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    pub fn twists(&self) -> &[(usize, usize)] {
        &self.twists
    }

    pub fn links(&self) -> &[M2] {
        &self.links
    }

    pub fn links_mut(&mut self) -> &mut [M2] {
        &mut self.links
    }

    pub fn set_twists(&mut self, twists: Vec<(usize, usize)>) -> Result<()> {
        let mut t = Vec::new();
        for (a, b) in twists {
            let (mu, nu) = (a.min(b), a.max(b));
            if mu == nu || nu >= self.ndim() {
                return Err(Error::Invalid(format!("invalid twist plane ({a}, {b})")));
            }
            if self.group == Group::U1 {
                return Err(Error::Invalid("twisted planes require SU(2)".into()));
            }
            t.push((mu, nu));
        }
        t.sort_unstable();
        t.dedup();
        self.twists = t;
        Ok(())
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        self.dims.iter().zip(&self.strides).map(|(&n, &s)| (site / s) % n).collect()
    }

    pub fn site_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.ndim() {
            return Err(Error::DimensionMismatch { expected: self.ndim(), got: coords.len() });
        }
        if coords.iter().zip(&self.dims).any(|(x, n)| x >= n) {
            return Err(Error::Invalid(format!("site {coords:?} outside lattice {:?}", self.dims)));
        }
        Ok(coords.iter().zip(&self.strides).map(|(x, s)| x * s).sum())
    }

    /// Neighbouring site one step forward or backward along `mu`.
    pub fn neighbor(&self, site: usize, mu: usize, forward: bool) -> usize {
        let n = self.dims[mu];
        let s = self.strides[mu];
        let x = (site / s) % n;
        match (forward, x) {
            (true, x) if x + 1 == n => site - x * s,
            (true, _) => site + s,
            (false, 0) => site + (n - 1) * s,
            (false, _) => site - s,
        }
    }

    pub fn link(&self, site: usize, mu: usize) -> &M2 {
        &self.links[site * self.ndim() + mu]
    }

    pub fn set_link(&mut self, site: usize, mu: usize, u: M2) {
        let d = self.ndim();
        self.links[site * d + mu] = u;
    }

    fn check_plane(&self, site: usize, mu: usize, nu: usize) -> Result<()> {
        if site >= self.sites() {
            return Err(Error::Invalid(format!("site {site} outside a lattice of {} sites", self.sites())));
        }
        if mu >= self.ndim() || nu >= self.ndim() || mu == nu {
            return Err(Error::Invalid(format!("invalid plane ({mu}, {nu}) in dimension {}", self.ndim())));
        }
        Ok(())
    }

    /// `−1` for the twisted corner plaquette of a twisted plane.
    pub fn twist_factor(&self, site: usize, mu: usize, nu: usize) -> f64 {
        let plane = (mu.min(nu), mu.max(nu));
        if self.twists.contains(&plane) {
            let at_edge = |k: usize| (site / self.strides[k]) % self.dims[k] == self.dims[k] - 1;
            if at_edge(mu) && at_edge(nu) {
                return -1.0;
            }
        }
        1.0
    }

    /// `U_μ(x) U_ν(x+μ) U_μ(x+ν)† U_ν(x)†`, including any twist.
    pub fn plaquette(&self, site: usize, mu: usize, nu: usize) -> Result<M2> {
        self.check_plane(site, mu, nu)?;
        Ok(self.plaquette_at(site, mu, nu))
    }

    fn plaquette_at(&self, x: usize, mu: usize, nu: usize) -> M2 {
        let xm = self.neighbor(x, mu, true);
        let xn = self.neighbor(x, nu, true);
        self.link(x, mu) * self.link(xm, nu) * self.link(xn, mu).adjoint() * self.link(x, nu).adjoint()
            * c(self.twist_factor(x, mu, nu), 0.0)
    }

    /// The four leaves of the clover at `x` in the plane `(μ, ν)`, each a
    /// closed loop starting at `x`, as `(corner, factors)` where a factor is
    /// `(site, direction, daggered)`.
    pub(crate) fn clover_leaves(&self, x: usize, mu: usize, nu: usize) -> [(usize, [(usize, usize, bool); 4]); 4] {
        let xpm = self.neighbor(x, mu, true);
        let xpn = self.neighbor(x, nu, true);
        let xmm = self.neighbor(x, mu, false);
        let xmn = self.neighbor(x, nu, false);
        let xmm_pn = self.neighbor(xmm, nu, true);
        let xmm_mn = self.neighbor(xmm, nu, false);
        let xpm_mn = self.neighbor(xmn, mu, true);
        [
            (x, [(x, mu, false), (xpm, nu, false), (xpn, mu, true), (x, nu, true)]),
            (xmm, [(x, nu, false), (xmm_pn, mu, true), (xmm, nu, true), (xmm, mu, false)]),
            (xmm_mn, [(xmm, mu, true), (xmm_mn, nu, true), (xmm_mn, mu, false), (xmn, nu, false)]),
            (xmn, [(xmn, nu, true), (xmn, mu, false), (xpm_mn, nu, false), (x, mu, true)]),
        ]
    }

    pub(crate) fn factor(&self, f: (usize, usize, bool)) -> M2 {
        let u = self.link(f.0, f.1);
        if f.2 {
            u.adjoint()
        } else {
            *u
        }
    }

    /// Clover-averaged field strength `F̂_μν(x)` in the Lie algebra.
    pub fn clover(&self, site: usize, mu: usize, nu: usize) -> Result<M2> {
        self.check_plane(site, mu, nu)?;
        Ok(self.clover_at(site, mu, nu))
    }

    fn clover_at(&self, x: usize, mu: usize, nu: usize) -> M2 {
        let mut sum = M2::zeros();
        for (corner, factors) in self.clover_leaves(x, mu, nu) {
            let leaf = factors.iter().fold(M2::identity(), |acc, &f| acc * self.factor(f));
            sum += leaf * c(self.twist_factor(corner, mu, nu), 0.0);
        }
        self.group.project(&sum) / c(4.0 * self.spacings[mu] * self.spacings[nu], 0.0)
    }

    /// `F̂_μν(x)` for all planes `μ < ν` in lexicographic order.
    pub fn field_strength(&self, site: usize) -> Vec<M2> {
        let d = self.ndim();
        let mut out = Vec::with_capacity(d * (d - 1) / 2);
        for mu in 0..d {
            for nu in mu + 1..d {
                out.push(self.clover_at(site, mu, nu));
            }
        }
        out
    }

    /// Field strengths at every site, computed in parallel.
    pub fn field_strengths(&self) -> Vec<Vec<M2>> {
        (0..self.sites()).into_par_iter().map(|x| self.field_strength(x)).collect()
    }

    fn require_4d(&self) -> Result<()> {
        if self.ndim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: self.ndim() });
        }
        Ok(())
    }

    /// `(1/8π²) Σ_x a⁴ tr(F̂∧F̂)`.
    pub fn clover_charge(&self) -> Result<f64> {
        self.require_4d()?;
        Ok(charge_from(&self.field_strengths(), self.cell_volume()))
    }

    pub fn actions(&self) -> Result<LatticeActions> {
        self.require_4d()?;
        Ok(actions_from(&self.field_strengths(), self.cell_volume()))
    }

    /// `‖F̂⁻‖`, the L² norm of the anti-self-dual part.
    pub fn asd_norm(&self) -> Result<f64> {
        Ok(self.actions()?.asd.max(0.0).sqrt())
    }

    /// `U_μ(x) → g(x) U_μ(x) g(x+μ)†`.
    pub fn gauge_transform(&self, g: &[M2]) -> Result<Self> {
        if g.len() != self.sites() {
            return Err(Error::Shape(format!("gauge transformation has {} sites, lattice has {}", g.len(), self.sites())));
        }
        let mut out = self.clone();
        for x in 0..self.sites() {
            for mu in 0..self.ndim() {
                let y = self.neighbor(x, mu, true);
                out.set_link(x, mu, g[x] * self.link(x, mu) * g[y].adjoint());
            }
        }
        Ok(out)
    }

    pub fn random_gauge<R: Rng>(&self, rng: &mut R, amp: f64) -> Vec<M2> {
        (0..self.sites()).map(|_| self.group.random_element(rng, amp)).collect()
    }

    /// Multiplies every link on the left by `exp(X)` with random `X` of size `amp`.
    pub fn add_noise<R: Rng>(&mut self, rng: &mut R, amp: f64) {
        let g = self.group;
        for u in self.links.iter_mut() {
            *u = g.exp(&g.random_algebra(rng, amp)) * *u;
        }
    }

    pub fn reunitarize(&mut self) {
        let g = self.group;
        self.links.par_iter_mut().for_each(|u| *u = g.reunitarize(u));
    }

    /// Largest distance of a link from the group.
    pub fn max_defect(&self) -> f64 {
        self.links.iter().map(|u| self.group.defect(u)).fold(0.0, f64::max)
    }

    /// Phase angles of the U(1) links discretizing the constant curvature
    /// `2πi Σ m_{μν} e^{μν}` on the unit torus: every plaquette in the
    /// plane `(μ, ν)` has angle `2π m_{μν}/(N_μ N_ν)`.
    fn flux_angles(dims: &[usize], flux: &Flux) -> Result<Vec<f64>> {
        if flux.dim() != dims.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), got: flux.dim() });
        }
        let proto = Self::identity(dims, Group::U1)?;
        let d = dims.len();
        let mut angles = vec![0.0; proto.links.len()];
        for x in 0..proto.sites() {
            let n = proto.coords(x);
            for nu in 0..d {
                let mut theta = 0.0;
                for mu in 0..nu {
                    let m = flux.get(mu + 1, nu + 1) as f64;
                    theta += 2.0 * PI * m * n[mu] as f64 / (dims[mu] * dims[nu]) as f64;
                }
                if n[nu] == dims[nu] - 1 {
                    for rho in nu + 1..d {
                        let m = flux.get(nu + 1, rho + 1) as f64;
                        theta -= 2.0 * PI * m * n[rho] as f64 / dims[rho] as f64;
                    }
                }
                angles[x * d + nu] = theta;
            }
        }
        Ok(angles)
    }

    /// U(1) discretization of a constant-curvature connection with integer flux.
    pub fn u1_flux(dims: &[usize], flux: &Flux) -> Result<Self> {
        let mut f = Self::identity(dims, Group::U1)?;
        let angles = Self::flux_angles(dims, flux)?;
        for (u, t) in f.links.iter_mut().zip(angles) {
            *u = Group::U1.abelian(t);
        }
        Ok(f)
    }

    /// SU(2) configuration `diag(e^{iθ/2}, e^{−iθ/2})` built from the U(1)
    /// flux angles `θ`; planes with odd flux carry a twist. The curvature is
    /// `πi σ₃ Σ m_{μν} e^{μν}`, with charge `−½(m₁₂m₃₄ + m₁₃m₄₂ + m₁₄m₂₃)`.
    pub fn su2_half_flux(dims: &[usize], flux: &Flux) -> Result<Self> {
        let mut f = Self::identity(dims, Group::Su2)?;
        let angles = Self::flux_angles(dims, flux)?;
        for (u, t) in f.links.iter_mut().zip(angles) {
            *u = Group::Su2.abelian(t / 2.0);
        }
        let mut twists = Vec::new();
        for mu in 0..dims.len() {
            for nu in mu + 1..dims.len() {
                if flux.get(mu + 1, nu + 1).rem_euclid(2) == 1 {
                    twists.push((mu, nu));
                }
            }
        }
        f.set_twists(twists)?;
        Ok(f)
    }

    /// Extends a field to `dims × t_dims`: base links copied across every
    /// fibre slice, fibre links set to the identity.
    pub fn lift(&self, t_dims: &[usize]) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(t_dims);
        let mut out = Self::identity(&dims, self.group)?;
        out.spacings = self.spacings.clone();
        out.spacings.extend(t_dims.iter().map(|&n| 1.0 / n as f64));
        out.set_twists(self.twists.clone())?;
        let fibre_sites: usize = t_dims.iter().product();
        let (d_base, d) = (self.ndim(), dims.len());
        for xb in 0..self.sites() {
            for t in 0..fibre_sites {
                let x = xb * fibre_sites + t;
                for mu in 0..d_base {
                    out.links[x * d + mu] = *self.link(xb, mu);
                }
            }
        }
        Ok(out)
    }

    /// L² instanton residuals of a 7D lattice field, with the clover field
    /// strength read in coordinates where the lattice is the unit cube.
    pub fn residual_7d(&self, ops: &ResidualOperators) -> Result<InstantonResidual> {
        if self.ndim() != 7 {
            return Err(Error::DimensionMismatch { expected: 7, got: self.ndim() });
        }
        let per_site: Vec<ResidualSquares<f64>> = (0..self.sites())
            .into_par_iter()
            .map(|x| {
                let f = self.field_strength(x);
                let coords: Vec<[f64; 8]> = f.iter().map(real_coordinates).collect();
                let mut acc = ResidualSquares::zero();
                for r in 0..8 {
                    let v: Vec<f64> = coords.iter().map(|cc| cc[r]).collect();
                    acc.accumulate(&ops.squares(&v));
                }
                acc
            })
            .collect();
        let mut total = ResidualSquares::zero();
        for s in &per_site {
            total.accumulate(s);
        }
        let w = self.cell_volume() * ops.volume;
        Ok(ResidualSquares {
            wedge_star_phi: total.wedge_star_phi * w,
            star_equation: total.star_equation * w,
            seven: total.seven * w,
        }
        .norms())
    }
}

pub(crate) fn charge_from(fields: &[Vec<M2>], cell: f64) -> f64 {
    let mut acc = 0.0;
    for f in fields {
        for ((a, b), (p, q)) in DUAL_PAIRS {
            let fa = f[plane_index(4, a, b)];
            let fb = oriented(f, p, q);
            acc += (fa * fb).trace().re;
        }
    }
    acc * cell / (4.0 * PI * PI)
}

/// `F̂_pq` for either order of `p`, `q` in 4D.
pub(crate) fn oriented(f: &[M2], p: usize, q: usize) -> M2 {
    if p < q {
        f[plane_index(4, p, q)]
    } else {
        -f[plane_index(4, q, p)]
    }
}

pub(crate) fn actions_from(fields: &[Vec<M2>], cell: f64) -> LatticeActions {
    let mut total = 0.0;
    let mut asd = 0.0;
    for f in fields {
        total += f.iter().map(|x| x.norm_squared()).sum::<f64>();
        for ((a, b), (p, q)) in DUAL_PAIRS {
            let d = f[plane_index(4, a, b)] - oriented(f, p, q);
            asd += 0.5 * d.norm_squared();
        }
    }
    let (total, asd) = (total * cell, asd * cell);
    LatticeActions { total, asd, asd_fraction: if total > 0.0 { asd / total } else { 0.0 } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2core::{eigen_split, standard_phi};
    use crate::rng::seeded;

    #[test]
    fn plane_indices_are_lexicographic() {
        let mut k = 0;
        for mu in 0..7 {
            for nu in mu + 1..7 {
                assert_eq!(plane_index(7, mu, nu), k);
                k += 1;
            }
        }
    }

    #[test]
    fn identity_links_are_flat() {
        let f = LatticeField::identity(&[3, 3, 3, 3], Group::Su2).unwrap();
        assert_eq!(f.plaquette(5, 0, 2).unwrap(), M2::identity());
        assert_eq!(f.clover_charge().unwrap(), 0.0);
        assert_eq!(f.actions().unwrap().asd_fraction, 0.0);
        assert!(f.plaquette(5, 1, 1).is_err());
        assert!(f.plaquette(81, 0, 1).is_err());
    }

    #[test]
    fn neighbours_wrap() {
        let f = LatticeField::identity(&[2, 3, 4], Group::U1).unwrap();
        let x = f.site_index(&[1, 2, 3]).unwrap();
        assert_eq!(f.coords(f.neighbor(x, 2, true)), vec![1, 2, 0]);
        assert_eq!(f.coords(f.neighbor(x, 0, true)), vec![0, 2, 3]);
        let o = f.site_index(&[0, 0, 0]).unwrap();
        assert_eq!(f.coords(f.neighbor(o, 1, false)), vec![0, 2, 0]);
    }

    #[test]
    fn u1_flux_plaquettes_are_uniform() {
        let flux = Flux::four(1, 0, 2, -1, 0, 1);
        let dims = [4, 3, 5, 4];
        let f = LatticeField::u1_flux(&dims, &flux).unwrap();
        for x in 0..f.sites() {
            for mu in 0..4 {
                for nu in mu + 1..4 {
                    let p = f.plaquette(x, mu, nu).unwrap()[(0, 0)];
                    let expected = 2.0 * PI * flux.get(mu + 1, nu + 1) as f64 / (dims[mu] * dims[nu]) as f64;
                    assert!((p - c(0.0, expected).exp()).norm() < 1e-12, "site {x} plane {mu}{nu}");
                }
            }
        }
    }

    #[test]
    fn u1_charge_of_self_dual_flux() {
        let f = LatticeField::u1_flux(&[8; 4], &Flux::four(1, 0, 0, 0, 0, 1)).unwrap();
        let q = f.clover_charge().unwrap();
        assert!((q + 1.0).abs() < 0.05, "q = {q}");
        assert!(f.actions().unwrap().asd < 1e-20);
    }

    #[test]
    fn twisted_su2_half_flux() {
        let flux = Flux::four(1, 1, 0, 0, -1, 1);
        let f = LatticeField::su2_half_flux(&[6; 4], &flux).unwrap();
        assert_eq!(f.twists(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        for x in 0..f.sites() {
            let p = f.plaquette(x, 0, 1).unwrap();
            assert!((p - Group::Su2.abelian(PI / 36.0)).norm() < 1e-12);
        }
        let q = f.clover_charge().unwrap();
        let s = (PI / 36.0).sin();
        assert!((q + s * s * 6f64.powi(4) / (PI * PI)).abs() < 1e-10);
        assert!(f.actions().unwrap().asd < 1e-20);
        assert!(f.max_defect() < 1e-14);
    }

    #[test]
    fn gauge_invariance_of_charge_and_action() {
        let mut rng = seeded(21);
        let mut f = LatticeField::su2_half_flux(&[4; 4], &Flux::four(1, 1, 0, 0, -1, 1)).unwrap();
        f.add_noise(&mut rng, 0.2);
        let (q, a) = (f.clover_charge().unwrap(), f.actions().unwrap());
        for _ in 0..20 {
            let g = f.random_gauge(&mut rng, 2.0);
            let h = f.gauge_transform(&g).unwrap();
            assert!((h.clover_charge().unwrap() - q).abs() < 1e-12);
            let b = h.actions().unwrap();
            assert!((b.total - a.total).abs() < 1e-10 * a.total);
            assert!((b.asd - a.asd).abs() < 1e-10 * a.total);
        }
    }

    #[test]
    fn single_plaquette_excitation_is_trivial() {
        let mut f = LatticeField::identity(&[6; 4], Group::Su2).unwrap();
        let x = f.site_index(&[2, 3, 1, 4]).unwrap();
        let kick = Group::Su2.exp(&(crate::gauge::algebra::su2_basis()[0] * c(0.1, 0.0)));
        f.set_link(x, 1, kick);
        assert!(f.clover_charge().unwrap().abs() < 1e-10);
        assert!(f.actions().unwrap().total > 0.0);
    }

    #[test]
    fn lift_preserves_base_and_gives_instanton() {
        let base = LatticeField::u1_flux(&[4; 4], &Flux::four(1, 0, 0, 0, 0, 1)).unwrap();
        let lifted = base.lift(&[2, 3, 2]).unwrap();
        assert_eq!(lifted.dims(), &[4, 4, 4, 4, 2, 3, 2]);
        let s = eigen_split(&standard_phi::<f64>()).unwrap();
        let ops = ResidualOperators::new(&s).unwrap();
        assert!(lifted.residual_7d(&ops).unwrap().max() < 1e-12);
        let flat = LatticeField::identity(&[2; 4], Group::Su2).unwrap().lift(&[2, 2, 2]).unwrap();
        assert_eq!(flat.residual_7d(&ops).unwrap().max(), 0.0);
    }

    #[test]
    fn lifted_asd_residual_tracks_asd_norm() {
        let base = LatticeField::u1_flux(&[4; 4], &Flux::four(1, 0, 0, 0, 0, -1)).unwrap();
        let asd = base.asd_norm().unwrap();
        let s = eigen_split(&standard_phi::<f64>()).unwrap();
        let ops = ResidualOperators::new(&s).unwrap();
        let r = base.lift(&[2, 2, 2]).unwrap().residual_7d(&ops).unwrap();
        assert!((r.f7_norm - (2.0f64 / 3.0).sqrt() * asd).abs() < 1e-10 * asd);
    }
}
