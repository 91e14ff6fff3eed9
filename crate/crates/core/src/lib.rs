//! Numerical and exact tools for G2-structures on flat 7-tori.
//!
//! [`exterior`] and [`g2core`] handle constant forms, exactly over the
//! rationals or in `f64`. [`fibration`] builds G2-torus fibrations and
//! splits perturbations of the coassociative form. [`gauge`] carries smooth
//! connections as Fourier series and lattice link fields, with cooling to
//! self-duality and lifting to seven dimensions. [`chernsimons`] evaluates
//! the Chern–Simons functional and decides whether a perturbation
//! obstructs the lifted instantons. [`cli`] drives all of it from the
//! `g2lab` binary.

pub mod chernsimons;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod fibration;
pub mod g2core;
pub mod gauge;
pub mod identities;
pub mod linalg;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
