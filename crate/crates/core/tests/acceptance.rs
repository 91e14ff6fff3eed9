//! Acceptance run: nine end-to-end criteria, one line each.
//!
//! Built with `harness = false`, so the lines show up in plain
//! `cargo test` output. Each criterion compares library output against an
//! oracle computed here by a separate route, at a fixed tolerance.

use std::error::Error as StdError;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use g2lab::chernsimons::{
    closedness_residual, cs_functional, cs_one_form, obstruction_verdict, path_integrate, perturbed_rho,
    probe_offsets, rho_on_translation, translation_oracle, translation_tangent, CSContext, CsPath, Verdict,
};
use g2lab::cli::{report, RunConfig};
use g2lab::exterior::{ConstForm, Metric, Orientation};
use g2lab::fibration::{build_fibration, decompose_deformation, type_iv_form, FibrationSpec};
use g2lab::g2core::{eigen_split, metric_from_phi, standard_phi};
use g2lab::gauge::algebra::{c, su2_basis};
use g2lab::gauge::fourier::ZERO_MODE;
use g2lab::gauge::{
    block_norms, constant_curvature_u1, cool_to_sd, fibered_curvature, field_residual, q_map, Connection,
    CoolingParams, CoolingStatus, FiberedConnection, Flux, FourierField, Group, LatticeField, Mode,
    ResidualOperators, M2,
};
use g2lab::identities::identity_suite;
use g2lab::linalg::Mat;
use g2lab::rng::stream;
use g2lab::scalar::{Precision, Rational, Scalar};

type Verdictline = Result<String, Box<dyn StdError>>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), Box<dyn StdError>> {
    if ok {
        Ok(())
    } else {
        Err(msg().into())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), Box<dyn StdError>> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("{what} took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn form<S: Scalar>(dim: usize, terms: &[(i64, &[usize])]) -> ConstForm<S> {
    terms.iter().fold(ConstForm::zero(dim, terms[0].1.len()), |acc, (c, idx)| {
        acc.add(&ConstForm::term(dim, idx, S::from_i64(*c)).unwrap()).unwrap()
    })
}

fn unit(i: usize) -> Vec<f64> {
    let mut v = vec![0.0; 7];
    v[i] = 1.0;
    v
}

/// `−(m12·m34 + m13·m42 + m14·m23)` from the raw entries.
fn charge_of(m: [i64; 6]) -> f64 {
    let [m12, m13, m14, m23, m24, m34] = m;
    -((m12 * m34 - m13 * m24 + m14 * m23) as f64)
}

fn flux(m: [i64; 6]) -> Flux {
    Flux::four(m[0], m[1], m[2], m[3], m[4], m[5])
}

fn exact_identities() -> Verdictline {
    let start = Instant::now();
    let phi = form::<Rational>(7, &[(1, &[5, 6, 7]), (1, &[1, 2, 5]), (-1, &[3, 4, 5]), (1, &[1, 3, 6]), (1, &[2, 4, 6]), (1, &[1, 4, 7]), (-1, &[2, 3, 7])]);
    let psi = form::<Rational>(
        7,
        &[(1, &[1, 2, 3, 4]), (-1, &[1, 2, 6, 7]), (1, &[3, 4, 6, 7]), (1, &[1, 3, 5, 7]), (1, &[2, 4, 5, 7]), (-1, &[1, 4, 5, 6]), (1, &[2, 3, 5, 6])],
    );
    ensure(phi == standard_phi(), || "model 3-form differs from its written expansion".into())?;
    let star = phi.hodge(&Metric::euclidean(7), Orientation::Positive)?;
    ensure(star == psi, || "Hodge dual of the 3-form differs from the written 4-form".into())?;
    let (g, o, _) = metric_from_phi(&phi)?;
    ensure(*g.matrix() == Mat::identity(7) && o == Orientation::Positive, || "metric of the 3-form is not I7".into())?;

    let s = eigen_split(&phi)?;
    for i in 1..=7 {
        let gen = phi.interior(&(1..=7).map(|j| Rational::from_i64((i == j) as i64)).collect::<Vec<_>>())?;
        ensure(s.p7(&gen)? == gen, || format!("projector moves e{i} contracted into the 3-form"))?;
    }
    let l = |a: &ConstForm<Rational>| a.wedge(&psi);
    for col in 0..21 {
        let basis = ConstForm::<Rational>::from_vector(7, 2, &s.p14_matrix().column(col))?;
        ensure(l(&basis)?.is_zero(), || "wedge with the 4-form does not kill the 14-dimensional part".into())?;
    }

    let w = [
        form::<Rational>(4, &[(1, &[1, 2]), (-1, &[3, 4])]),
        form::<Rational>(4, &[(1, &[1, 3]), (-1, &[4, 2])]),
        form::<Rational>(4, &[(1, &[1, 4]), (-1, &[2, 3])]),
    ];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let mut x: [[Rational; 3]; 3] = Default::default();
        x[i][j] = Rational::from_i64(1);
        x[j][i] = Rational::from_i64(-1);
        ensure(q_map(&x)? == w[k], || format!("fibre map on dt{}dt{} is not omega{}", i + 1, j + 1, k + 1))?;
    }

    let xi = form::<Rational>(7, &[(3, &[1, 2, 3, 4]), (-2, &[1, 5, 6, 7]), (5, &[1, 2, 5, 6]), (1, &[3, 4, 6, 7]), (7, &[2, 3, 5, 7])]);
    let split = decompose_deformation(&xi)?;
    ensure(split.reassemble() == xi, || "deformation blocks do not reassemble".into())?;

    let suite = identity_suite(Precision::Exact)?;
    let nonzero: Vec<_> = suite.checks.iter().filter(|c| c.residual != 0.0).map(|c| c.name).collect();
    ensure(nonzero.is_empty(), || format!("nonzero exact residuals: {nonzero:?}"))?;
    within(start.elapsed(), 1.0, "exact identity suite")?;
    Ok(format!("{} identities exactly zero", suite.checks.len()))
}

fn spectrum_and_weights() -> Verdictline {
    let s = eigen_split(&standard_phi::<f64>())?;
    let eig = nalgebra::SymmetricEigen::new(s.t_matrix().to_nalgebra()).eigenvalues;
    let near = |x: f64| eig.iter().filter(|&&e| (e - x).abs() < 1e-10).count();
    ensure(near(-2.0) == 7 && near(1.0) == 14, || format!("eigenvalues {:?}", eig.as_slice()))?;
    ensure((s.lambda7() + 2.0).abs() < 1e-10 && (s.lambda14() - 1.0).abs() < 1e-10, || "reported pairing".into())?;

    let phi = standard_phi::<f64>();
    let ops = ResidualOperators::new(&s)?;
    let mut rng = stream(2024, "acceptance-kappa");
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = FourierField::random(&mut rng, Group::Su2, 7, 2, 3, 2, 0.4);
        let kappa = -f.integral_trace_wedge(&f, &phi)?;
        let f7 = f.map_components(&ops.p7, 2)?.gram_norm_sq(&ops.gram2);
        let f14 = f.map_components(&ops.p14, 2)?.gram_norm_sq(&ops.gram2);
        worst = worst.max((kappa - (-2.0 * f7 + f14)).abs());
    }
    ensure(worst < 1e-9, || format!("kappa weight residual {worst:e}"))?;
    Ok(format!("lambda = (-2 x7, +1 x14), kappa residual {worst:.1e}"))
}

/// `‖F ∧ ⋆φ‖` for constant `F = 2π Σ m_jk e^jk` on the unit torus.
fn wedge_star_norm(m: [i64; 6]) -> f64 {
    let planes: [&[usize]; 6] = [&[1, 2], &[1, 3], &[1, 4], &[2, 3], &[2, 4], &[3, 4]];
    let f = planes.iter().zip(m).fold(ConstForm::<f64>::zero(7, 2), |acc, (idx, k)| {
        acc.add(&ConstForm::term(7, idx, 2.0 * PI * k as f64).unwrap()).unwrap()
    });
    let star = eigen_split(&standard_phi::<f64>()).unwrap().star_phi().clone();
    f.wedge(&star).unwrap().terms().map(|(_, c)| c * c).sum::<f64>().sqrt()
}

fn lifting() -> Verdictline {
    let start = Instant::now();
    let ops = ResidualOperators::new(&eigen_split(&standard_phi::<f64>())?)?;
    let (mut sd, mut asd, mut count) = (0.0f64, 0.0f64, 0);
    for a in -1..=1 {
        for b in -1..=1 {
            for cc in -1..=1 {
                let m = [a, b, cc, cc, -b, a];
                let r = field_residual(&constant_curvature_u1(&flux(m)).lift(7)?.field, &ops)?;
                sd = sd.max(r.max());
                count += 1;
                if (a, b, cc) == (0, 0, 0) {
                    continue;
                }
                let m = [a, b, cc, -cc, b, -a];
                let r = field_residual(&constant_curvature_u1(&flux(m)).lift(7)?.field, &ops)?;
                let [m12, m13, m14, m23, m24, m34] = m;
                let defect = [m34 - m12, -m24 - m13, m23 - m14].iter().map(|d| (d * d) as f64).sum::<f64>();
                let formula = 2.0 * PI * defect.sqrt();
                asd = asd.max((r.r_a - formula).abs()).max((wedge_star_norm(m) - formula).abs());
            }
        }
    }
    ensure(sd < 1e-12, || format!("self-dual residual {sd:e}"))?;
    ensure(asd < 1e-10, || format!("anti-self-dual residual off the formula by {asd:e}"))?;
    within(start.elapsed(), 5.0, "lifting sweep")?;
    Ok(format!("{count} self-dual fluxes max residual {sd:.1e}; anti-self-dual deviation {asd:.1e}"))
}

fn fibered_decomposition() -> Verdictline {
    let mut rng = stream(7, "acceptance-fibered");
    let a = FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.2).d();
    let chis = std::array::from_fn(|_| FourierField::random(&mut rng, Group::U1, 4, 0, 2, 1, 0.3));
    let base = Connection::new(Some(Flux::four(1, 0, 0, 0, 0, 1)), a)?;
    let mut norms = Vec::new();
    for t in [4, 8, 16] {
        let family = FiberedConnection::periodic_gauge_family(&base, &chis, [t; 3])?;
        norms.push(block_norms(&fibered_curvature(&family)?).mixed);
    }
    let slope = (norms[0] / norms[2]).ln() / 4f64.ln();
    ensure((slope - 2.0).abs() <= 0.2, || format!("mixed-block slope {slope:.3} from {norms:?}"))?;

    let b = su2_basis();
    let (s1, s2, s3) = (b[0] * c(0.7, 0.0), b[1] * c(-0.4, 0.0), b[2] * c(0.25, 0.0));
    let constant = |x: M2| {
        let mut f = FourierField::zero(4, 0, Group::Su2);
        f.add_mode(ZERO_MODE, vec![x]);
        f
    };
    let flat = Connection::trivial(FourierField::zero(4, 1, Group::Su2))?;
    let conn = FiberedConnection::new([4; 3], vec![flat; 64], vec![[constant(s1), constant(s2), constant(s3)]; 64])?;
    let sigmas = [s1, s2, s3];
    let mut gap = 0.0f64;
    for slice in fibered_curvature(&conn)? {
        for i in 0..3 {
            for j in 0..3 {
                let expected = (sigmas[i] * sigmas[j] - sigmas[j] * sigmas[i]) * c(0.5, 0.0);
                gap = gap.max((slice.sigma[i][j].component(&ZERO_MODE, &[]) - expected).norm());
            }
        }
    }
    ensure(gap == 0.0, || format!("bracket block off by {gap:e}"))?;
    Ok(format!("mixed-block slope {slope:.3}; bracket term exact"))
}

fn chern_simons_consistency() -> Verdictline {
    let start = Instant::now();
    let ctx = CSContext::new(build_fibration(&FibrationSpec::<f64>::standard())?)?;
    let mut rng = stream(11, "acceptance-cs");
    let modes: [Mode; 3] = [[4, 0, 0, 0, 0, 0, 0], [0, 0, 4, 0, 0, 0, 0], [4, 0, 4, 0, 0, 0, 0]];
    let field = |rng: &mut _, degree| FourierField::random_on_modes(rng, Group::Su2, 7, degree, &modes, 0.2);
    let a = field(&mut rng, 1);
    let b = field(&mut rng, 1);
    let conn = Connection::trivial(a.clone())?;
    let f = conn.curvature()?.field;
    let rho = cs_one_form(&ctx, &f, &b)?;
    let hs = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let up = cs_functional(&ctx, &a.add(&b.scale(h))?)?;
            let down = cs_functional(&ctx, &a.sub(&b.scale(h))?)?;
            Ok(((up - down) / (2.0 * h) - rho).abs())
        })
        .collect::<g2lab::Result<_>>()?;
    let slope = (errs[0] / errs[1]).log10();
    let slope_fine = (errs[1] / errs[2]).log10();
    ensure((slope - 2.0).abs() <= 0.1 && (slope_fine - 2.0).abs() <= 0.1, || format!("FD errors {errs:?}"))?;

    let w = FourierField::random_on_modes(&mut rng, Group::Su2, 7, 1, &a.frequencies(), 0.2);
    let linear = path_integrate(&ctx, &a, 16, &CsPath::Linear)?;
    let detour = path_integrate(&ctx, &a, 64, &CsPath::QuadraticDetour(w))?;
    ensure((linear - detour).abs() < 1e-8, || format!("paths differ by {:e}", (linear - detour).abs()))?;

    let closed = closedness_residual(&ctx, &conn, &field(&mut rng, 1), &field(&mut rng, 1))?;
    ensure(closed < 1e-10, || format!("closedness {closed:e}"))?;
    let chi = field(&mut rng, 0);
    let orbit = cs_one_form(&ctx, &f, &conn.covariant_d(&chi)?)?.abs();
    ensure(orbit < 1e-10, || format!("gauge orbit {orbit:e}"))?;
    within(start.elapsed(), 30.0, "Chern-Simons checks")?;
    Ok(format!(
        "FD slopes {slope:.3}/{slope_fine:.3}, paths {:.1e}, closedness {closed:.1e}, orbit {orbit:.1e}",
        (linear - detour).abs()
    ))
}

fn translation_constancy() -> Verdictline {
    let ctx = CSContext::new(build_fibration(&FibrationSpec::<f64>::standard())?)?;
    let mut rng = stream(5, "acceptance-probe");
    let mut offsets = vec![FourierField::zero(7, 1, Group::U1)];
    offsets.extend(probe_offsets(&mut rng, Group::U1, 9, 3, 0.1));
    let mut worst = 0.0f64;
    for m in [[1, 0, 0, 0, 0, 1], [1, 1, 0, 0, -1, 1], [1, 0, 0, 0, 0, -1], [0, 1, -1, 1, 1, 0]] {
        let conn = Connection::new(Some(flux(m).lift(7)?), FourierField::zero(7, 1, Group::U1))?;
        let f = conn.curvature()?.field;
        for i in 0..7 {
            let values = rho_on_translation(&ctx, &conn, &unit(i), &offsets)?;
            let oracle = translation_oracle(&ctx, &f, &unit(i))?;
            for v in values {
                worst = worst.max((v - oracle).abs());
            }
        }
    }
    ensure(worst < 1e-9, || format!("spread {worst:e}"))?;
    Ok(format!("10 probe points, self-dual and anti-self-dual lifts, spread {worst:.1e}"))
}

fn obstruction() -> Verdictline {
    let ctx = CSContext::new(build_fibration(&FibrationSpec::<f64>::standard())?)?;
    let eps = [0.75, -0.5, 0.25, -1.25];
    let xi = type_iv_form(&eps)?;
    let expected_xi = (1..=4).fold(ConstForm::<f64>::zero(7, 4), |acc, i| {
        acc.add(&ConstForm::term(7, &[i, 5, 6, 7], -2.0 * eps[i - 1]).unwrap()).unwrap()
    });
    ensure(xi.max_abs_diff(&expected_xi) == 0.0, || "transverse form".into())?;
    let mut worst = 0.0f64;
    for m in [[1, 0, 0, 0, 0, 1], [1, 1, 0, 0, -1, 1]] {
        let q = charge_of(m);
        let f = constant_curvature_u1(&flux(m)).lift(7)?.field;
        for (i, e) in eps.iter().enumerate() {
            let r = perturbed_rho(&f, &translation_tangent(&f, &unit(i))?, &xi)?;
            worst = worst.max((r - e * q).abs());
        }
    }
    ensure(worst < 1e-9, || format!("pairing off eps(v) q by {worst:e}"))?;

    let e = |idx: &[usize]| ConstForm::<f64>::basis(7, idx).unwrap();
    let cases = [
        ("I", e(&[1, 2, 3, 4]), false),
        ("II", e(&[1, 3, 4, 6]), false),
        ("III", e(&[1, 2, 6, 7]).sub(&e(&[3, 4, 6, 7]))?, false),
        ("IV", type_iv_form(&[0.0, 0.3, 0.0, 0.0])?, true),
        ("mixed", e(&[1, 2, 3, 4]).add(&e(&[2, 3, 6, 7]))?.add(&e(&[1, 5, 6, 7]))?, true),
        ("zero", ConstForm::zero(7, 4), false),
    ];
    let mut table = 0;
    for (q, field) in [
        (0.0, FourierField::zero(7, 2, Group::U1)),
        (-1.0, constant_curvature_u1(&Flux::four(1, 0, 0, 0, 0, 1)).lift(7)?.field),
    ] {
        for (name, xi, transverse) in &cases {
            let want = if q != 0.0 && *transverse { Verdict::Obstructed } else { Verdict::Survives };
            let got = obstruction_verdict(&ctx, &field, xi)?.verdict;
            ensure(got == want, || format!("q = {q}, xi {name}: got {got:?}, want {want:?}"))?;
            table += 1;
        }
    }
    Ok(format!("pairing deviation {worst:.1e}; {table}/12 verdicts match"))
}

fn lattice_pipeline() -> Verdictline {
    let start = Instant::now();
    let m = [1, 1, 0, 0, -1, 1];
    let target = 0.5 * charge_of(m);
    let mut field = LatticeField::su2_half_flux(&[6; 4], &flux(m))?;
    field.add_noise(&mut stream(42, "noise"), 0.05);
    let out = cool_to_sd(&field, &CoolingParams { max_steps: 5000, step_size: 0.05, tol: 1e-3 })?;
    let end = out.field.actions()?;
    ensure(out.status == CoolingStatus::Converged && end.asd_fraction < 1e-3, || {
        format!("cooling ended {:?} at asd_fraction {:e}", out.status, end.asd_fraction)
    })?;
    let q = out.field.clover_charge()?;
    ensure((q - target).abs() <= 0.1 * target.abs(), || format!("clover charge {q} vs {target}"))?;
    let asd4 = out.field.asd_norm()?;
    let ops = ResidualOperators::new(&eigen_split(&standard_phi::<f64>())?)?;
    let r = out.field.lift(&[4; 3])?.residual_7d(&ops)?;
    ensure(r.f7_norm <= 2.0 * asd4, || format!("f7 {} above twice the base residual {asd4}", r.f7_norm))?;
    within(start.elapsed(), 300.0, "lattice pipeline")?;
    Ok(format!(
        "{} steps, asd_fraction {:.2e}, charge {q:.4}, f7 {:.3} <= 2 x {asd4:.3}",
        out.steps, end.asd_fraction, r.f7_norm
    ))
}

fn determinism() -> Verdictline {
    let cfg = RunConfig::default();
    let first = serde_json::to_string(&report(&cfg, None)?.json)?;
    let second = serde_json::to_string(&report(&cfg, None)?.json)?;
    ensure(first == second, || "report JSON differs between runs".into())?;
    Ok(format!("two reports identical ({} bytes)", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdictline); 9] = [
        ("exact identity suite", exact_identities),
        ("spectrum and kappa weights", spectrum_and_weights),
        ("lifting of self-dual fluxes", lifting),
        ("fibered curvature decomposition", fibered_decomposition),
        ("Chern-Simons consistency", chern_simons_consistency),
        ("translation constancy", translation_constancy),
        ("transverse obstruction", obstruction),
        ("lattice pipeline", lattice_pipeline),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let line = match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => format!("PASS  {}. {name}: {detail}", k + 1),
            Ok(Err(e)) => {
                failures += 1;
                format!("FAIL  {}. {name}: {e}", k + 1)
            }
            Err(_) => {
                failures += 1;
                format!("FAIL  {}. {name}: panicked", k + 1)
            }
        };
        println!("{line}  [{:.2}s]", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
