//! `g2lab report`: every module's checks in one JSON document, plus a
//! plain-text table of the same rows.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::commands::{expected_charge, fibration_json, initial_field, load_spec, Outcome};
use super::config::RunConfig;
use crate::chernsimons::{
    closedness_residual, cs_functional, cs_one_form, obstruction_verdict, path_integrate, perturbed_rho,
    probe_offsets, rho_on_translation, translation_tangent, CSContext, CsPath, Verdict,
};
use crate::error::Result;
use crate::exterior::{extend, omegas, ConstForm};
use crate::fibration::{build_fibration, type_iv_form};
use crate::g2core::{eigen_split, standard_phi, G2Structure};
use crate::gauge::algebra::{c, su2_basis};
use crate::gauge::fibered::block_norms;
use crate::gauge::fourier::{anti_self_dual_defect, ZERO_MODE};
use crate::gauge::{
    constant_curvature_u1, cool_to_sd, energy_decomposition_7d, fibered_curvature, field_residual, Connection,
    CoolingParams, CoolingStatus, FiberedConnection, Flux, FourierField, Group, Mode, ResidualOperators, M2,
};
use crate::identities::{identity_suite, DOUBLE_TOL};
use crate::rng::stream;
use crate::scalar::Precision;

/// The period relation of the Chern–Simons functional under large gauge
/// transformations; reported as a formula, not evaluated.
pub const PERIOD_FORMULA: &str = "theta(g.A) - theta(A) = <[*phi], S_g>";

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub section: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// Passes when `residual <= tolerance`.
    fn push(&mut self, section: &'static str, name: &'static str, value: f64, residual: f64, tolerance: f64) {
        let pass = residual.is_finite() && residual <= tolerance;
        self.0.push(Check { section, name, value, residual, tolerance, pass });
    }

    fn zero(&mut self, section: &'static str, name: &'static str, residual: f64, tolerance: f64) {
        self.push(section, name, residual, residual, tolerance);
    }
}

fn unit(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 7];
    v[i] = 1.0;
    v
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

fn spectrum(cfg: &RunConfig, s: &G2Structure<f64>, checks: &mut Checks) -> Result<Value> {
    checks.push("spectrum", "lambda7", *s.lambda7(), (s.lambda7() + 2.0).abs(), 1e-10);
    checks.push("spectrum", "lambda14", *s.lambda14(), (s.lambda14() - 1.0).abs(), 1e-10);
    let mut rng = stream(cfg.seed, "kappa");
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = FourierField::random(&mut rng, Group::Su2, 7, 2, 3, 1, 0.5);
        worst = worst.max(energy_decomposition_7d(&f, s)?.kappa_residual.abs());
    }
    checks.zero("spectrum", "kappa_weights", worst, 1e-9);
    Ok(json!({ "lambda7": s.lambda7(), "lambda14": s.lambda14(), "kappa_residual": worst }))
}

fn lifting(ops: &ResidualOperators, checks: &mut Checks) -> Result<Value> {
    let mut sd_worst = 0.0f64;
    let mut asd_worst = 0.0f64;
    let mut count = 0;
    for a in -1..=1 {
        for b in -1..=1 {
            for cc in -1..=1 {
                let sd = Flux::four(a, b, cc, cc, -b, a);
                let r = field_residual(&constant_curvature_u1(&sd).lift(7)?.field, ops)?;
                sd_worst = sd_worst.max(r.max());
                count += 1;
                if (a, b, cc) == (0, 0, 0) {
                    continue;
                }
                let asd = Flux::four(a, b, cc, -cc, b, -a);
                let r = field_residual(&constant_curvature_u1(&asd).lift(7)?.field, ops)?;
                let d = anti_self_dual_defect(&asd);
                let o = 2.0 * PI * ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt();
                asd_worst = asd_worst.max((r.r_a - o).abs());
            }
        }
    }
    checks.zero("lifting", "self_dual_residual", sd_worst, 1e-12);
    checks.zero("lifting", "anti_self_dual_vs_formula", asd_worst, 1e-10);
    Ok(json!({ "self_dual_fluxes": count, "self_dual_residual": sd_worst, "anti_self_dual_deviation": asd_worst }))
}

fn fibered(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let mut rng = stream(cfg.seed, "fibered");
    let a = FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.2).d();
    let chis = std::array::from_fn(|_| FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.3));
    let base = Connection::new(Some(Flux::four(1, 0, 0, 0, 0, 1)), a)?;
    let grids = [4usize, 8, 16];
    let mut mixed = Vec::new();
    for t in grids {
        let family = FiberedConnection::periodic_gauge_family(&base, &chis, [t; 3])?;
        mixed.push(block_norms(&fibered_curvature(&family)?).mixed);
    }
    let slope = (mixed[0] / mixed[2]).ln() / 4f64.ln();
    checks.push("fibered", "mixed_block_slope", slope, (slope - 2.0).abs(), 0.2);

    let basis = su2_basis();
    let constant = |x: M2| {
        let mut f = FourierField::zero(4, 0, Group::Su2);
        f.add_mode(ZERO_MODE, vec![x]);
        f
    };
    let (s1, s2) = (basis[0] * c(0.3, 0.0), basis[1] * c(-0.5, 0.0));
    let zero_a = Connection::trivial(FourierField::zero(4, 1, Group::Su2))?;
    let conn = FiberedConnection::new(
        [4; 3],
        vec![zero_a; 64],
        vec![[constant(s1), constant(s2), FourierField::zero(4, 0, Group::Su2)]; 64],
    )?;
    let expected = (s1 * s2 - s2 * s1) * c(0.5, 0.0);
    let bracket = fibered_curvature(&conn)?
        .iter()
        .map(|s| (s.sigma[0][1].component(&ZERO_MODE, &[]) - expected).norm())
        .fold(0.0, f64::max);
    checks.zero("fibered", "bracket_term", bracket, 0.0);
    Ok(json!({ "t_grids": grids, "mixed_norms": mixed, "slope": slope, "bracket_deviation": bracket }))
}

fn chern_simons(cfg: &RunConfig, ctx: &CSContext, checks: &mut Checks) -> Result<Value> {
    let mut rng = stream(cfg.seed, "chern-simons");
    let p = cfg.cutoff / 2;
    let r = cfg.cutoff - p;
    let modes: [Mode; 3] = [[p, 0, 0, 0, 0, 0, 0], [0, r, 0, 0, 0, 0, 0], [p, r, 0, 0, 0, 0, 0]];
    let amp = 0.2;
    let a = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, amp);
    let b = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, amp);
    let w = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &a.frequencies(), amp);
    let conn = Connection::trivial(a.clone())?;
    let f = conn.curvature()?.field;
    let rho = cs_one_form(ctx, &f, &b)?;
    let steps = [1e-2, 1e-3, 1e-4];
    let mut errors = Vec::new();
    for h in steps {
        let plus = cs_functional(ctx, &a.add(&b.scale(h))?)?;
        let minus = cs_functional(ctx, &a.sub(&b.scale(h))?)?;
        errors.push(((plus - minus) / (2.0 * h) - rho).abs());
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.log10()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log10()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    checks.push("chern_simons", "gradient_slope", slope, (slope - 2.0).abs(), 0.1);

    let theta = cs_functional(ctx, &a)?;
    let linear = path_integrate(ctx, &a, 16, &CsPath::Linear)?;
    let detour = path_integrate(ctx, &a, 64, &CsPath::QuadraticDetour(w))?;
    let path = (linear - theta).abs().max((detour - theta).abs()).max((linear - detour).abs());
    checks.zero("chern_simons", "path_independence", path, 1e-8);

    let x = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, amp);
    let y = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &modes, amp);
    let closed = closedness_residual(ctx, &conn, &x, &y)?;
    checks.zero("chern_simons", "closedness", closed, 1e-10);

    let chi = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 0, &modes, amp);
    let orbit = cs_one_form(ctx, &f, &conn.covariant_d(&chi)?)?.abs();
    checks.zero("chern_simons", "gauge_orbit", orbit, 1e-10);

    Ok(json!({
        "modes": modes,
        "rho": rho,
        "theta": theta,
        "fd_steps": steps,
        "fd_errors": errors,
        "gradient_slope": slope,
        "path_linear": linear,
        "path_detour": detour,
        "closedness": closed,
        "gauge_orbit": orbit,
    }))
}

fn translation_constancy(cfg: &RunConfig, ctx: &CSContext, checks: &mut Checks) -> Result<Value> {
    let mut rng = stream(cfg.seed, "probe");
    let mut rows = Vec::new();
    let mut seven = vec![vec![0i64; 7]; 7];
    (seven[0][1], seven[1][0], seven[4][5], seven[5][4]) = (1, -1, 1, -1);
    let cases: [(&'static str, Flux); 3] = [
        ("lifted_self_dual", Flux::four(1, 0, 0, 0, 0, 1).lift(7)?),
        ("lifted_anti_self_dual", Flux::four(1, 0, 0, 0, 0, -1).lift(7)?),
        ("seven_dimensional", Flux::from_matrix(&seven)?),
    ];
    for (name, flux) in cases {
        let conn = Connection::new(Some(flux), FourierField::zero(7, 1, Group::U1))?;
        let mut offsets = vec![FourierField::zero(7, 1, Group::U1)];
        offsets.extend(probe_offsets(&mut rng, Group::U1, cfg.probe_offsets, cfg.cutoff, cfg.probe_amplitude));
        let mut values = Vec::new();
        let mut worst = 0.0f64;
        for i in 0..7 {
            let vals = rho_on_translation(ctx, &conn, &unit(i), &offsets)?;
            worst = worst.max(spread(&vals));
            values.push(vals[0]);
        }
        checks.zero("translation", name, worst, 1e-9);
        rows.push(json!({ "field": name, "rho_at_base": values, "spread": worst }));
    }
    Ok(Value::Array(rows))
}

fn obstruction(ctx: &CSContext, checks: &mut Checks) -> Result<Value> {
    let e7 = |idx: &[usize]| ConstForm::<f64>::basis(7, idx);
    let eps = [0.5, -0.25, 0.125, 1.0];
    let type_iii = extend(&omegas::<f64>()[0], 7)?.wedge(&e7(&[6, 7])?)?;
    let mut cases: Vec<(&'static str, ConstForm<f64>)> = vec![
        ("I", e7(&[1, 2, 3, 4])?),
        ("II", e7(&[2, 3, 4, 5])?),
        ("III", type_iii),
        ("IV", type_iv_form(&eps)?),
    ];
    let mixed = cases.iter().try_fold(ConstForm::zero(7, 4), |acc, (_, x)| acc.add(x))?;
    cases.push(("mixed", mixed));
    cases.push(("zero", ConstForm::zero(7, 4)));

    let fields = [
        (0.0, FourierField::zero(7, 2, Group::U1)),
        (-1.0, constant_curvature_u1(&Flux::four(1, 0, 0, 0, 0, 1)).lift(7)?.field),
    ];
    let mut table = Vec::new();
    let mut mismatches = 0;
    for (q, f) in &fields {
        for (name, xi) in &cases {
            let rep = obstruction_verdict(ctx, f, xi)?;
            let transverse = matches!(*name, "IV" | "mixed");
            let expected = if *q != 0.0 && transverse { Verdict::Obstructed } else { Verdict::Survives };
            if rep.verdict != expected {
                mismatches += 1;
            }
            table.push(json!({
                "q": q, "xi": name, "verdict": rep.verdict, "expected": expected,
                "r_phi": rep.r_phi_value, "n_phi": rep.n_phi_value,
            }));
        }
    }
    checks.push("obstruction", "truth_table_mismatches", mismatches as f64, mismatches as f64, 0.0);

    let xi = type_iv_form(&eps)?;
    let mut worst = 0.0f64;
    for (flux, q) in [(Flux::four(1, 0, 0, 0, 0, 1), -1.0), (Flux::four(1, 1, 0, 0, -1, 1), -2.0)] {
        let f = constant_curvature_u1(&flux).lift(7)?.field;
        for (i, e) in eps.iter().enumerate() {
            let r = perturbed_rho(&f, &translation_tangent(&f, &unit(i))?, &xi)?;
            worst = worst.max((r - e * q).abs());
        }
    }
    checks.zero("obstruction", "pairing_equals_eps_times_q", worst, 1e-9);
    Ok(json!({ "truth_table": table, "pairing_deviation": worst }))
}

fn lattice(cfg: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let field = initial_field(cfg)?;
    let start = field.actions()?;
    let params = CoolingParams { max_steps: cfg.max_steps, step_size: cfg.step_size, tol: cfg.tol };
    let cooled = cool_to_sd(&field, &params)?;
    let end = cooled.field.actions()?;
    let q = cooled.field.clover_charge()?;
    let converged = if cooled.status == CoolingStatus::Converged { 0.0 } else { 1.0 };
    checks.push("lattice", "cooling_asd_fraction", end.asd_fraction, end.asd_fraction + converged, cfg.tol);
    let target = expected_charge(cfg);
    checks.push("lattice", "clover_charge", q, (q - target).abs(), 0.1 * target.abs().max(1.0));

    let asd4 = cooled.field.asd_norm()?;
    let lifted = cooled.field.lift(&cfg.tgrid)?;
    let s = eigen_split(&standard_phi::<f64>())?;
    let r = lifted.residual_7d(&ResidualOperators::new(&s)?)?;
    checks.push("lattice", "lift_f7_vs_base_asd", r.f7_norm, r.f7_norm, 2.0 * asd4);
    Ok(json!({
        "group": cfg.group,
        "lattice": cfg.lattice,
        "flux": cfg.flux,
        "status": cooled.status,
        "steps": cooled.steps,
        "initial_asd_fraction": start.asd_fraction,
        "final_asd_fraction": end.asd_fraction,
        "charge": q,
        "expected_charge": target,
        "base_asd_norm": asd4,
        "tgrid": cfg.tgrid,
        "lifted_residual": { "r_a": r.r_a, "r_b": r.r_b, "f7_norm": r.f7_norm },
    }))
}

pub fn report(cfg: &RunConfig, spec: Option<&Path>) -> Result<Outcome> {
    let mode = cfg.mode.unwrap_or(Precision::Exact);
    let mut checks = Checks::default();

    let ids = identity_suite(mode)?;
    let id_tol = if mode == Precision::Exact { 0.0 } else { DOUBLE_TOL };
    for c in &ids.checks {
        checks.zero("identities", c.name, c.residual, id_tol);
    }

    let spec_f = load_spec::<f64>(spec)?;
    let fibration = fibration_json(&spec_f, Precision::Double)?;
    let ortho = fibration["orthonormality_residual"].as_f64().unwrap_or(f64::NAN);
    checks.zero("fibration", "orthonormality", ortho, 1e-12);
    let ctx = CSContext::new(build_fibration(&spec_f)?)?;

    let s = eigen_split(&standard_phi::<f64>())?;
    let spectrum = spectrum(cfg, &s, &mut checks)?;
    let lifting = lifting(&ResidualOperators::new(&s)?, &mut checks)?;
    let fibered = fibered(cfg, &mut checks)?;
    let chern_simons = chern_simons(cfg, &ctx, &mut checks)?;
    let translation = translation_constancy(cfg, &ctx, &mut checks)?;
    let obstruction = obstruction(&ctx, &mut checks)?;
    let lattice = lattice(cfg, &mut checks)?;

    let all_pass = checks.0.iter().all(|c| c.pass);
    let json = json!({
        "command": "report",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "identities": ids,
        "spectrum": spectrum,
        "fibration": fibration,
        "lifting": lifting,
        "fibered": fibered,
        "chern_simons": chern_simons,
        "translation": translation,
        "obstruction": obstruction,
        "lattice": lattice,
        "period_formula": PERIOD_FORMULA,
        "checks": checks.0,
        "all_pass": all_pass,
    });
    Ok(Outcome { json, ok: all_pass })
}

/// Renders the `checks` rows of a report as an aligned table.
pub fn table(report: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<13} {:<27} {:>12} {:>12} {:>10}  result", "section", "check", "value", "residual", "tolerance");
    let num = |v: &Value| v.as_f64().map(|x| format!("{x:.4e}")).unwrap_or_else(|| "nan".into());
    for row in report["checks"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "{:<13} {:<27} {:>12} {:>12} {:>10}  {}",
            row["section"].as_str().unwrap_or(""),
            row["name"].as_str().unwrap_or(""),
            num(&row["value"]),
            num(&row["residual"]),
            num(&row["tolerance"]),
            if row["pass"].as_bool() == Some(true) { "pass" } else { "FAIL" },
        );
    }
    let verdict = if report["all_pass"].as_bool() == Some(true) { "all checks pass" } else { "some checks FAIL" };
    let _ = writeln!(out, "{verdict}");
    out
}
