use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::RunConfig;
use crate::chernsimons::{lattice_fibre_charge, lattice_obstruction_verdict, lattice_translation_pairing, CSContext};
use crate::error::{Error, Result};
use crate::exterior::ConstForm;
use crate::fibration::{build_fibration, type_iv_form, FibrationSpec};
use crate::g2core::{eigen_split, standard_phi, InstantonResidual};
use crate::gauge::{
    cool_to_sd, read_snapshot, write_snapshot, CoolingParams, CoolingRecord, Group, LatticeField, ResidualOperators,
};
use crate::identities::identity_suite;
use crate::linalg::Mat;
use crate::rng::stream;
use crate::scalar::{Precision, Rational, Scalar};

/// JSON for stdout plus whether every check it carries passed.
pub struct Outcome {
    pub json: Value,
    pub ok: bool,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Outcome { json, ok: true }
    }
}

pub(super) fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn read_field(path: &Path) -> Result<LatticeField> {
    read_snapshot(path).map_err(|e| match e {
        Error::Io(io) => Error::Invalid(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

pub(super) fn load_spec<S: Scalar>(path: Option<&Path>) -> Result<FibrationSpec<S>> {
    match path {
        Some(p) => FibrationSpec::from_json(&read_json(p)?),
        None => Ok(FibrationSpec::standard()),
    }
}

/// A perturbation 4-form in ambient coordinates: either a form object
/// `{"dim": 7, "degree": 4, "terms": [...]}` or the transverse shorthand
/// `{"epsilon": [ε₁, ε₂, ε₃, ε₄]}` for `−2ε∧e⁵⁶⁷`.
pub(super) fn parse_xi<S: Scalar>(v: &Value) -> Result<ConstForm<S>> {
    let obj = v.as_object().ok_or_else(|| Error::Invalid("xi must be a JSON object".into()))?;
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    if keys == ["epsilon"] {
        let eps = obj["epsilon"]
            .as_array()
            .ok_or_else(|| Error::Invalid("epsilon must be an array of four numbers".into()))?
            .iter()
            .map(S::from_json)
            .collect::<Result<Vec<S>>>()?;
        return type_iv_form(&eps);
    }
    if let Some(k) = keys.iter().find(|k| !["dim", "degree", "terms"].contains(k)) {
        return Err(Error::Invalid(format!("unknown xi key {k:?}")));
    }
    let xi = ConstForm::from_json(v)?;
    if xi.dim() != 7 || xi.degree() != 4 {
        return Err(Error::Invalid(format!("xi must be a 4-form on R^7, got degree {} in dimension {}", xi.degree(), xi.dim())));
    }
    Ok(xi)
}

pub(super) fn mat_json<S: Scalar>(m: &Mat<S>) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(S::to_json).collect())).collect())
}

fn with_command(command: &str, body: impl Serialize) -> Result<Value> {
    let mut out = Map::new();
    out.insert("command".into(), json!(command));
    match serde_json::to_value(body)? {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

fn frame_operators() -> Result<ResidualOperators> {
    ResidualOperators::new(&eigen_split(&standard_phi::<f64>())?)
}

fn residual_json(r: &InstantonResidual) -> Value {
    json!({ "r_a": r.r_a, "r_b": r.r_b, "f7_norm": r.f7_norm, "max": r.max() })
}

fn require_double(command: &str, mode: Option<Precision>) -> Result<()> {
    if mode == Some(Precision::Exact) {
        return Err(Error::Invalid(format!("{command} runs in double precision only; drop --mode exact")));
    }
    Ok(())
}

fn context(spec: Option<&Path>) -> Result<CSContext> {
    CSContext::new(build_fibration(&load_spec::<f64>(spec)?)?)
}

pub fn identities(mode: Precision) -> Result<Outcome> {
    let report = identity_suite(mode)?;
    let ok = report.all_pass;
    Ok(Outcome { json: with_command("identities", report)?, ok })
}

pub(super) fn fibration_json<S: Scalar>(spec: &FibrationSpec<S>, mode: Precision) -> Result<Value> {
    let fib = build_fibration(spec)?;
    let residual = fib.orthonormality_residual();
    Ok(json!({
        "mode": mode,
        "spec": spec.to_json(),
        "generators": mat_json(fib.generators()),
        "phi": fib.phi().to_json(),
        "metric": mat_json(fib.structure().metric().matrix()),
        "orthonormality_residual": residual,
        "is_product": fib.is_product(),
        "diagnosis": if fib.is_product() { "product" } else { "non-product" },
    }))
}

pub fn fibration(spec: Option<&Path>, mode: Precision) -> Result<Outcome> {
    let body = match mode {
        Precision::Exact => fibration_json(&load_spec::<Rational>(spec)?, mode)?,
        Precision::Double => fibration_json(&load_spec::<f64>(spec)?, mode)?,
    };
    let ok = body["orthonormality_residual"].as_f64().is_some_and(|r| r <= 1e-12);
    Ok(Outcome { json: with_command("fibration", body)?, ok })
}

fn deform_json<S: Scalar>(xi: &Value, spec: Option<&Path>, mode: Precision) -> Result<Value> {
    let fib = build_fibration(&load_spec::<S>(spec)?)?;
    let xi = parse_xi::<S>(xi)?;
    let split = fib.decompose(&xi)?;
    let mut out = json!({ "mode": mode, "has_type_iv": split.has_type_iv() });
    if let (Value::Object(o), Value::Object(s)) = (&mut out, split.to_json()) {
        o.extend(s);
    }
    Ok(out)
}

pub fn deform(xi: &Path, spec: Option<&Path>, mode: Precision) -> Result<Outcome> {
    let v = read_json(xi)?;
    let body = match mode {
        Precision::Exact => deform_json::<Rational>(&v, spec, mode)?,
        Precision::Double => deform_json::<f64>(&v, spec, mode)?,
    };
    Ok(Outcome::ok(with_command("deform", body)?))
}

/// The starting configuration of a flow: the flux configuration plus
/// seeded noise.
pub(super) fn initial_field(cfg: &RunConfig) -> Result<LatticeField> {
    let flux = cfg.flux();
    let mut field = match cfg.group {
        Group::Su2 => LatticeField::su2_half_flux(&cfg.lattice, &flux)?,
        Group::U1 => LatticeField::u1_flux(&cfg.lattice, &flux)?,
    };
    field.add_noise(&mut stream(cfg.seed, "noise"), cfg.noise);
    Ok(field)
}

/// Charge of the noise-free flux configuration.
pub(super) fn expected_charge(cfg: &RunConfig) -> f64 {
    let q = cfg.flux().base_charge() as f64;
    match cfg.group {
        Group::Su2 => 0.5 * q,
        Group::U1 => q,
    }
}

pub(super) fn write_history(path: &Path, history: &[CoolingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    for r in history {
        w.serialize(r).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn flow(cfg: &RunConfig, out: &Path, csv_path: Option<&Path>) -> Result<Outcome> {
    require_double("flow", cfg.mode)?;
    let field = initial_field(cfg)?;
    let start = field.actions()?;
    let q0 = field.clover_charge()?;
    let params = CoolingParams { max_steps: cfg.max_steps, step_size: cfg.step_size, tol: cfg.tol };
    let cooled = cool_to_sd(&field, &params)?;
    let end = cooled.field.actions()?;
    let q1 = cooled.field.clover_charge()?;
    write_snapshot(out, &cooled.field)?;
    let csv_path = csv_path.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("csv"));
    write_history(&csv_path, &cooled.history)?;
    let json = json!({
        "command": "flow",
        "group": cfg.group,
        "lattice": cfg.lattice,
        "flux": cfg.flux,
        "seed": cfg.seed,
        "noise": cfg.noise,
        "params": params,
        "expected_charge": expected_charge(cfg),
        "initial": { "action": start.total, "asd_fraction": start.asd_fraction, "charge": q0 },
        "final": { "action": end.total, "asd_fraction": end.asd_fraction, "charge": q1 },
        "status": cooled.status,
        "steps": cooled.steps,
        "out": out,
        "history": csv_path,
    });
    Ok(Outcome::ok(json))
}

pub fn lift(input: &Path, spec: Option<&Path>, tgrid: &[usize], out: &Path, mode: Option<Precision>) -> Result<Outcome> {
    require_double("lift", mode)?;
    context(spec)?;
    let base = read_field(input)?;
    if base.ndim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: base.ndim() });
    }
    if tgrid.len() != 3 || tgrid.contains(&0) {
        return Err(Error::Invalid(format!("tgrid must have three positive sizes, got {tgrid:?}")));
    }
    let lifted = base.lift(tgrid)?;
    let r = lifted.residual_7d(&frame_operators()?)?;
    let actions = base.actions()?;
    let asd_norm = base.asd_norm()?;
    write_snapshot(out, &lifted)?;
    let json = json!({
        "command": "lift",
        "input": input,
        "out": out,
        "group": lifted.group(),
        "dims": lifted.dims(),
        "tgrid": tgrid,
        "base": { "asd_fraction": actions.asd_fraction, "asd_norm": asd_norm, "charge": base.clover_charge()? },
        "residual": residual_json(&r),
        "f7_over_base_asd": if asd_norm > 0.0 { json!(r.f7_norm / asd_norm) } else { Value::Null },
    });
    Ok(Outcome::ok(json))
}

pub fn residual(input: &Path, spec: Option<&Path>, mode: Option<Precision>) -> Result<Outcome> {
    require_double("residual", mode)?;
    context(spec)?;
    let u = read_field(input)?;
    let r = u.residual_7d(&frame_operators()?)?;
    let json = json!({
        "command": "residual",
        "input": input,
        "group": u.group(),
        "dims": u.dims(),
        "residual": residual_json(&r),
        "charge": lattice_fibre_charge(&u)?,
    });
    Ok(Outcome::ok(json))
}

fn unit(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 7];
    v[i] = 1.0;
    v
}

pub fn cs(field: &Path, spec: Option<&Path>, cfg: &RunConfig) -> Result<Outcome> {
    require_double("cs", cfg.mode)?;
    let ctx = context(spec)?;
    let u = read_field(field)?;
    if u.ndim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, got: u.ndim() });
    }
    let rho_all = |f: &LatticeField| -> Result<Vec<f64>> {
        (0..7).map(|i| lattice_translation_pairing(f, &unit(i), ctx.star_phi())).collect()
    };
    let rho = rho_all(&u)?;
    let mut rng = stream(cfg.seed, "probe");
    let mut probes = Vec::with_capacity(cfg.probe_offsets);
    for _ in 0..cfg.probe_offsets {
        let mut p = u.clone();
        p.add_noise(&mut rng, cfg.probe_amplitude);
        probes.push(rho_all(&p)?);
    }
    let spread: Vec<f64> = (0..7)
        .map(|i| {
            let vals = std::iter::once(rho[i]).chain(probes.iter().map(|p| p[i]));
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            hi - lo
        })
        .collect();
    let json = json!({
        "command": "cs",
        "input": field,
        "dims": u.dims(),
        "seed": cfg.seed,
        "probe_offsets": cfg.probe_offsets,
        "probe_amplitude": cfg.probe_amplitude,
        "charge": lattice_fibre_charge(&u)?,
        "rho_translation": rho,
        "probes": probes,
        "spread": spread,
        "max_spread": spread.iter().cloned().fold(0.0, f64::max),
    });
    Ok(Outcome::ok(json))
}

pub fn obstruct(field: &Path, xi: &Path, spec: Option<&Path>, mode: Option<Precision>) -> Result<Outcome> {
    require_double("obstruct", mode)?;
    let ctx = context(spec)?;
    let xi_ambient = parse_xi::<f64>(&read_json(xi)?)?;
    let u = read_field(field)?;
    let report = lattice_obstruction_verdict(&ctx, &u, &ctx.frame_form(&xi_ambient)?)?;
    let mut json = with_command("obstruct", &report)?;
    json["input"] = json!(field);
    Ok(Outcome::ok(json))
}
