//! Gauge fields on flat tori: structure groups, smooth connections as
//! Fourier series, and link variables on periodic lattices.

pub mod algebra;
pub mod cooling;
pub mod fibered;
pub mod fourier;
pub mod lattice;
pub mod snapshot;

pub use algebra::{Group, M2};
pub use fourier::{
    constant_curvature_u1, energy_decomposition_7d, field_residual, ym_energy_4d, Connection, CurvatureField,
    Energy7, FourierField, Flux, Mode, ResidualOperators, YmEnergy4,
};
pub use lattice::{LatticeActions, LatticeField};
pub use cooling::{cool_to_sd, CoolingOutcome, CoolingParams, CoolingRecord, CoolingStatus};
pub use snapshot::{read_snapshot, write_snapshot, Manifest};
pub use fibered::{assembled_residual, block_norms, fibered_curvature, q_map, FiberedConnection, FiberedSlice};
