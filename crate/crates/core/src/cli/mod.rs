//! The `g2lab` command line.
//!
//! Every subcommand prints one JSON document on stdout. Failures print
//! `{"error": {"kind", "message", "exit_code"}}` on stderr and exit with
//! 1 for bad input or 2 for a numerical failure. A run whose own checks
//! fail also exits with 2.
//!
//! `G2LAB_THREADS` caps the worker pool used by the lattice and
//! Fourier-mode sums.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use commands::Outcome;
pub use config::{Dims, FluxArg, RunConfig};
pub use report::{report, table, Check, PERIOD_FORMULA};

use crate::error::{Error, Result};
use crate::gauge::Group;
use crate::scalar::Precision;

#[derive(Parser, Debug)]
#[command(name = "g2lab", version, about = "G2-structures, lifted instantons and Chern-Simons obstructions on flat 7-tori")]
struct Cli {
    /// JSON file of run parameters; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

/// Parameters shared by the cooling flow and the report.
#[derive(Args, Debug, Default)]
struct FlowArgs {
    /// Lattice sizes, e.g. 6x6x6x6.
    #[arg(long)]
    lattice: Option<Dims>,
    /// Gauge group: su2 or u1.
    #[arg(long)]
    group: Option<Group>,
    /// Flux integers m12,m13,m14,m23,m24,m34 of the starting configuration.
    #[arg(long, allow_hyphen_values = true)]
    flux: Option<FluxArg>,
    /// Stop once the anti-self-dual fraction drops below this.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    step_size: Option<f64>,
    /// Amplitude of the seeded noise added to the starting links.
    #[arg(long, allow_hyphen_values = true)]
    noise: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Algebraic identities of the model G2-structure.
    Identities {
        /// Defaults to exact.
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Build a G2-torus fibration and diagnose it.
    Fibration {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Defaults to double.
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Split a 4-form perturbation into its five blocks.
    Deform {
        #[arg(long)]
        xi: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Defaults to double.
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Cool a seeded lattice configuration toward self-duality.
    Flow {
        /// Snapshot of the cooled field.
        #[arg(long)]
        out: PathBuf,
        /// History as CSV; defaults to the snapshot path with extension csv.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Lift a 4D lattice field to the 7-torus.
    Lift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Fibre sizes, e.g. 4x4x4.
        #[arg(long)]
        tgrid: Option<Dims>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Instanton residual of a 7D lattice field.
    Residual {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Chern-Simons 1-form on translations, probed around a lattice field.
    Cs {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        probe_offsets: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        probe_amplitude: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Decide whether a perturbation obstructs the instantons of a field.
    Obstruct {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        xi: PathBuf,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        mode: Option<Precision>,
    },
    /// Run every check and bundle the results.
    Report {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Write the JSON here and print a table on stdout instead.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tgrid: Option<Dims>,
        /// Largest Fourier frequency in the continuum checks.
        #[arg(long)]
        cutoff: Option<i32>,
        #[arg(long)]
        probe_offsets: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        probe_amplitude: Option<f64>,
        #[command(flatten)]
        flow: FlowArgs,
        /// Precision of the identity section; defaults to exact.
        #[arg(long)]
        mode: Option<Precision>,
    },
}

impl FlowArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = &self.lattice {
            cfg.lattice = d.0.clone();
        }
        if let Some(g) = self.group {
            cfg.group = g;
        }
        if let Some(f) = self.flux {
            cfg.flux = f.0;
        }
        set(&mut cfg.tol, self.tol);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.max_steps, self.max_steps);
        set(&mut cfg.step_size, self.step_size);
        set(&mut cfg.noise, self.noise);
    }
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn tgrid(d: &Dims) -> Result<[usize; 3]> {
    d.0.as_slice()
        .try_into()
        .map_err(|_| Error::Invalid(format!("tgrid must have three sizes, got {d}")))
}

/// What a subcommand hands back for printing.
struct Output {
    outcome: Outcome,
    /// Replaces the JSON on stdout when set.
    text: Option<String>,
}

impl From<Outcome> for Output {
    fn from(outcome: Outcome) -> Self {
        Output { outcome, text: None }
    }
}

fn execute(cli: Cli) -> Result<Output> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let pick = |flag: Option<Precision>, cfg: &RunConfig| flag.or(cfg.mode);
    let out = match cli.command {
        Command::Identities { mode } => {
            let mode = pick(mode, &cfg).unwrap_or(Precision::Exact);
            cfg.validate()?;
            commands::identities(mode)?
        }
        Command::Fibration { spec, mode } => {
            let mode = pick(mode, &cfg).unwrap_or(Precision::Double);
            cfg.validate()?;
            commands::fibration(spec.as_deref(), mode)?
        }
        Command::Deform { xi, spec, mode } => {
            let mode = pick(mode, &cfg).unwrap_or(Precision::Double);
            cfg.validate()?;
            commands::deform(&xi, spec.as_deref(), mode)?
        }
        Command::Flow { out, csv, flow, mode } => {
            flow.apply(&mut cfg);
            cfg.mode = pick(mode, &cfg);
            cfg.validate()?;
            commands::flow(&cfg, &out, csv.as_deref())?
        }
        Command::Lift { input, spec, tgrid: grid, out, mode } => {
            if let Some(d) = &grid {
                cfg.tgrid = tgrid(d)?;
            }
            let mode = pick(mode, &cfg);
            cfg.validate()?;
            commands::lift(&input, spec.as_deref(), &cfg.tgrid, &out, mode)?
        }
        Command::Residual { input, spec, mode } => {
            let mode = pick(mode, &cfg);
            cfg.validate()?;
            commands::residual(&input, spec.as_deref(), mode)?
        }
        Command::Cs { field, spec, probe_offsets, probe_amplitude, seed, mode } => {
            set(&mut cfg.probe_offsets, probe_offsets);
            set(&mut cfg.probe_amplitude, probe_amplitude);
            set(&mut cfg.seed, seed);
            cfg.mode = pick(mode, &cfg);
            cfg.validate()?;
            commands::cs(&field, spec.as_deref(), &cfg)?
        }
        Command::Obstruct { field, xi, spec, mode } => {
            let mode = pick(mode, &cfg);
            cfg.validate()?;
            commands::obstruct(&field, &xi, spec.as_deref(), mode)?
        }
        Command::Report { spec, out, tgrid: grid, cutoff, probe_offsets, probe_amplitude, flow, mode } => {
            flow.apply(&mut cfg);
            if let Some(d) = &grid {
                cfg.tgrid = tgrid(d)?;
            }
            set(&mut cfg.cutoff, cutoff);
            set(&mut cfg.probe_offsets, probe_offsets);
            set(&mut cfg.probe_amplitude, probe_amplitude);
            cfg.mode = pick(mode, &cfg);
            cfg.validate()?;
            let outcome = report(&cfg, spec.as_deref())?;
            return match out {
                Some(path) => {
                    std::fs::write(&path, pretty(&outcome.json)?)
                        .map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
                    let text = Some(table(&outcome.json));
                    Ok(Output { outcome, text })
                }
                None => Ok(outcome.into()),
            };
        }
    };
    Ok(out.into())
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn configure_threads() -> Result<()> {
    let raw = match std::env::var("G2LAB_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Error::Invalid(format!("G2LAB_THREADS: {e}"))),
    };
    let n = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Invalid(format!("G2LAB_THREADS must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Exit code for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// The error document written to stderr.
pub fn error_json(e: &Error) -> serde_json::Value {
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) } })
}

fn fail(e: &Error) -> i32 {
    eprintln!("{}", error_json(e));
    exit_code(e)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => return fail(&Error::Invalid(e.render().to_string().trim_end().to_owned())),
    };
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let printed = execute(cli).and_then(|out| {
        let text = match out.text {
            Some(t) => t,
            None => pretty(&out.outcome.json)?,
        };
        Ok((text, out.outcome.ok))
    });
    match printed {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                0
            } else {
                2
            }
        }
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn flags_override_config_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"seed": 7, "noise": 0.2, "lattice": [4, 4, 4, 4]}"#).unwrap();
        let cli = parse(&["g2lab", "--config", path.to_str().unwrap(), "flow", "--out", "x.lat", "--seed", "9", "--flux", "-1,0,0,0,0,-1"]);
        let mut cfg = RunConfig::from_file(cli.config.as_ref().unwrap()).unwrap();
        let Command::Flow { flow, .. } = cli.command else { panic!("expected flow") };
        flow.apply(&mut cfg);
        assert_eq!((cfg.seed, cfg.noise, cfg.lattice.clone()), (9, 0.2, vec![4; 4]));
        assert_eq!(cfg.flux, [-1, 0, 0, 0, 0, -1]);
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::Invalid("x".into())), 1);
        assert_eq!(exit_code(&Error::UnstableForm("x".into())), 2);
        let io = Error::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(error_json(&io)["error"]["exit_code"], 1);
        assert_eq!(run(["g2lab", "no-such-command"]), 1);
    }

    #[test]
    fn bad_tgrid_is_a_validation_error() {
        assert!(tgrid(&Dims(vec![4, 4])).is_err());
        assert_eq!(tgrid(&Dims(vec![2, 3, 4])).unwrap(), [2, 3, 4]);
    }
}
