use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{Flux, Group};
use crate::scalar::Precision;

/// Grid sizes written `6x6x6x6`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

impl FromStr for Dims {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: std::result::Result<Vec<usize>, _> = s.split(['x', 'X']).map(|p| p.trim().parse::<usize>()).collect();
        match parts {
            Ok(v) if !v.is_empty() => Ok(Dims(v)),
            _ => Err(Error::Invalid(format!("cannot parse grid {s:?}; expected sizes like 6x6x6x6"))),
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

/// The six flux integers `m12,m13,m14,m23,m24,m34`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FluxArg(pub [i64; 6]);

impl FromStr for FluxArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("cannot parse flux {s:?}; expected six integers m12,m13,m14,m23,m24,m34"));
        let v: Vec<i64> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        Ok(FluxArg(v.try_into().map_err(|_| bad())?))
    }
}

/// Numerical parameters of a run.
///
/// Every field has a default, so a config file only lists what it changes.
/// Keys not listed here are rejected. Command-line flags override the file.
///
/// | key               | default         | used by                 |
/// |-------------------|-----------------|-------------------------|
/// | `mode`            | per command     | identities, fibration, deform, report |
/// | `seed`            | 42              | flow, cs, report        |
/// | `lattice`         | `[6, 6, 6, 6]`  | flow, report            |
/// | `group`           | `"su2"`         | flow, report            |
/// | `flux`            | `[1,1,0,0,-1,1]`| flow, report            |
/// | `noise`           | 0.05            | flow, report            |
/// | `tol`             | 1e-3            | flow, report            |
/// | `max_steps`       | 5000            | flow, report            |
/// | `step_size`       | 0.05            | flow, report            |
/// | `tgrid`           | `[4, 4, 4]`     | lift, report            |
/// | `cutoff`          | 8               | report                  |
/// | `probe_offsets`   | 5               | cs, report              |
/// | `probe_amplitude` | 0.1             | cs, report              |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// `None` lets each command pick its natural precision.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Precision>,
    pub seed: u64,
    pub lattice: Vec<usize>,
    pub group: Group,
    pub flux: [i64; 6],
    /// Amplitude of the Lie-algebra noise added before cooling.
    pub noise: f64,
    pub tol: f64,
    pub max_steps: usize,
    pub step_size: f64,
    pub tgrid: [usize; 3],
    /// Largest Fourier frequency per axis in continuum checks.
    pub cutoff: i32,
    pub probe_offsets: usize,
    pub probe_amplitude: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            seed: 42,
            lattice: vec![6; 4],
            group: Group::Su2,
            flux: [1, 1, 0, 0, -1, 1],
            noise: 0.05,
            tol: 1e-3,
            max_steps: 5000,
            step_size: 0.05,
            tgrid: [4; 3],
            cutoff: 8,
            probe_offsets: 5,
            probe_amplitude: 0.1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("config {}: {e}", path.display())))
    }

    pub fn flux(&self) -> Flux {
        let [a, b, c, d, e, f] = self.flux;
        Flux::four(a, b, c, d, e, f)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invalid(msg));
        if self.lattice.len() != 4 || self.lattice.iter().any(|n| !(2..=64).contains(n)) {
            return fail(format!("lattice must have four sizes in 2..=64, got {:?}", self.lattice));
        }
        if self.tgrid.iter().any(|n| !(2..=64).contains(n)) {
            return fail(format!("tgrid sizes must lie in 2..=64, got {:?}", self.tgrid));
        }
        if self.flux.iter().any(|m| m.abs() > 1000) {
            return fail(format!("flux entries must satisfy |m| <= 1000, got {:?}", self.flux));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return fail(format!("noise must be finite and non-negative, got {}", self.noise));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return fail(format!("step_size must be positive, got {}", self.step_size));
        }
        if self.max_steps == 0 {
            return fail("max_steps must be at least 1".into());
        }
        if !(2..=16).contains(&self.cutoff) {
            return fail(format!("cutoff must lie in 2..=16, got {}", self.cutoff));
        }
        if !(1..=100).contains(&self.probe_offsets) {
            return fail(format!("probe_offsets must lie in 1..=100, got {}", self.probe_offsets));
        }
        if !(self.probe_amplitude.is_finite() && self.probe_amplitude > 0.0) {
            return fail(format!("probe_amplitude must be positive, got {}", self.probe_amplitude));
        }
        Ok(())
    }
}
