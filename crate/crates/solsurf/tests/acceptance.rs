//! Acceptance run: one PASS/FAIL line per criterion with its measured
//! worst case and wall time. Exits nonzero on any unexpected outcome.

use std::process::{Command, ExitCode};
use std::time::Instant;

use solsurf::report::{Check, Relation};
use solsurf::suites::{run, Ctx};
use solsurf_core::field::Field;
use solsurf_core::immersion::{conformal_immersion_closed, conjugate, constant_difference_check, prolong_immersion};
use solsurf_core::sigma::traveling_solution;
use solsurf_core::spectral::WaveBuilder;
use solsurf_core::symmetry::{conformal_characteristic, ConformalSpec, FrechetPolicy};
use solsurf_core::C64;

/// Refinement must shrink a defect by this factor...
const REFINE_RATIO: f64 = 8.0;
/// ...unless it sits at this floor relative to the compared terms.
const FLOOR: f64 = 1e-12;

struct Line {
    id: &'static str,
    passed: bool,
    /// A failure that is known and explained; passing would be unexpected.
    expected_fail: bool,
    text: String,
}

struct Criterion {
    id: &'static str,
    what: &'static str,
    prefixes: &'static [&'static str],
    limit_s: f64,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: "1/N=2", what: "Veronese CP1 solution identities", prefixes: &["identities.veronese_n2."], limit_s: 10.0 },
    Criterion { id: "1/N=3", what: "Veronese CP2 solution identities", prefixes: &["identities.veronese_n3."], limit_s: 10.0 },
    Criterion { id: "2", what: "Euclidean LSP, all levels, three lambdas", prefixes: &["identities.lsp."], limit_s: 20.0 },
    Criterion { id: "3", what: "Minkowski LSP, traveling wave", prefixes: &["identities.traveling.lsp"], limit_s: 5.0 },
    Criterion {
        id: "4",
        what: "conformal tangents, compatibility, path independence",
        prefixes: &["prop2.euclidean_conformal.", "prop2.minkowski_conformal.", "prop4."],
        limit_s: 30.0,
    },
    Criterion { id: "5", what: "Euclidean prolonged wave function and immersion", prefixes: &["prop8."], limit_s: 30.0 },
    Criterion { id: "6a", what: "traveling prolonged immersion closed form", prefixes: &["prop5.x1sq.prolonged_closed_form", "prop5.linear.prolonged_closed_form"], limit_s: 30.0 },
    Criterion {
        id: "6b",
        what: "f=(x1)^2: tangent identity fails, R-fields match",
        prefixes: &["prop6.f11.tangent_identity", "prop5.x1sq.r_field_tangents"],
        limit_s: 30.0,
    },
    Criterion {
        id: "6c",
        what: "f=ax1+b, g=ax2+c: identity holds, constant difference",
        prefixes: &["prop6.f1g2.tangent_identity", "prop6.constant_difference.variation", "prop6.constant_difference.mean"],
        limit_s: 30.0,
    },
    Criterion { id: "7", what: "commutation of prolongation and derivative, eps and h studies", prefixes: &["appendix."], limit_s: 30.0 },
];

fn matching<'a>(checks: &'a [Check], prefixes: &[&str]) -> Vec<&'a Check> {
    checks.iter().filter(|c| prefixes.iter().any(|p| c.name.starts_with(p))).collect()
}

/// Worst check: the smallest margin to its tolerance in log terms.
fn worst<'a>(cs: &[&'a Check]) -> Option<&'a Check> {
    let slack = |c: &Check| match c.relation {
        Relation::Below => (c.tolerance / c.measured).log10(),
        Relation::Above => (c.measured / c.tolerance).log10(),
    };
    cs.iter().copied().min_by(|a, b| {
        let (x, y) = (slack(a), slack(b));
        x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Less)
    })
}

fn criterion_line(cr: &Criterion, checks: &[Check]) -> Line {
    let cs = matching(checks, cr.prefixes);
    let time: f64 = cs.iter().map(|c| c.elapsed).sum();
    let ok = !cs.is_empty() && cs.iter().all(|c| c.passed);
    let in_time = time < cr.limit_s;
    let detail = match worst(&cs) {
        Some(c) => format!(
            "worst {} = {:.3e} {} {:.1e}",
            c.name,
            c.measured,
            if c.relation == Relation::Below { "<" } else { ">" },
            c.tolerance
        ),
        None => "no checks ran".into(),
    };
    let failed: Vec<_> = cs.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let mut text = format!("{} checks; {detail}; {time:.2}s (limit {}s)", cs.len(), cr.limit_s);
    if !failed.is_empty() {
        text.push_str(&format!("; failed: {}", failed.join(", ")));
    }
    Line { id: cr.id, passed: ok && in_time, expected_fail: false, text: format!("[{}] {text}", cr.what) }
}

/// F − 𝓕 for f = ax¹+b, g = ax²+c against the constant with +2cκλ/(1−λ).
fn stated_sign_line() -> Line {
    let (a, b, c) = (0.7, 0.3, -0.4);
    let kappa = 2.0;
    let lam = C64::new(0.5, 0.0);
    let run = || -> solsurf_core::Result<(f64, f64)> {
        let grid = solsurf_core::grid::Grid2::minkowski_default();
        let (tw, j) = traveling_solution(kappa, 1.0, grid)?;
        let builder = WaveBuilder::Traveling { kappa, jets: j.clone() };
        let w = builder.build(lam)?;
        let spec = ConformalSpec::real(&[b, a], &[c, a]);
        let q = conformal_characteristic(&spec, &j)?;
        let calf = prolong_immersion(&builder, &j, &q, lam, &FrechetPolicy::default())?;
        let f = conformal_immersion_closed(&spec, &j, &w, lam)?;
        let (mean, _) = constant_difference_check(&f, &calf);
        let phi = w.phi.values();
        let m = conjugate(&phi.inverse()?, &Field::constant(*phi.grid(), &tw.m, 0), &phi);
        let mid = m.value(phi.grid().dims[0] / 2, phi.grid().dims[1] / 2);
        let stated = 2.0 * b * lam / (1.0 + lam) + 2.0 * c * kappa * lam / (1.0 - lam);
        let derived = 2.0 * b * lam / (1.0 + lam) - 2.0 * c * kappa * lam / (1.0 - lam);
        Ok(((&mean - &mid.scale(stated)).norm(), (&mean - &mid.scale(derived)).norm()))
    };
    match run() {
        Ok((stated, derived)) => Line {
            id: "6c/sign",
            passed: stated < 1e-8,
            expected_fail: true,
            text: format!(
                "[mean of F - prolonged immersion with +2c kappa l/(1-l)] error {stated:.3e} (tol 1.0e-8); \
                 with -2c kappa l/(1-l): {derived:.3e}"
            ),
        },
        Err(e) => Line { id: "6c/sign", passed: false, expected_fail: false, text: format!("error: {e}") },
    }
}

/// Every stencil-certified check re-run at h/2 over the coarse boxes.
/// Checks without an ε-quotient must shrink ≥ 8x or sit at the floor.
/// Checks with one carry roundoff ~u/ε (times Σ|c|/h when differentiated)
/// far above the floor; they are reported against the same rule as a known
/// failure, and must still stay within tolerance and grow no faster than
/// roundoff does (ratio ≥ 1/4).
fn refinement_lines(ctx: &Ctx, coarse: &[Check]) -> Vec<Line> {
    let t0 = Instant::now();
    let fine = run("all", &ctx.refined(coarse));
    let time = t0.elapsed().as_secs_f64();
    let mut out = Vec::new();
    for eps in [false, true] {
        let mut bad = Vec::new();
        let mut odd = Vec::new();
        let mut worst_ratio = f64::INFINITY;
        let (mut count, mut floored) = (0, 0);
        for c in coarse.iter().filter(|c| c.refinable && c.eps_quotient == eps) {
            count += 1;
            let Some(f) = fine.iter().find(|f| f.name == c.name) else {
                odd.push(format!("{} missing", c.name));
                continue;
            };
            let floor = FLOOR * c.scale.max(1.0);
            if f.measured <= floor || c.measured <= floor {
                floored += 1;
                continue;
            }
            let ratio = c.measured / f.measured;
            worst_ratio = worst_ratio.min(ratio);
            if !(ratio >= REFINE_RATIO) {
                bad.push(format!("{} {:.3e} -> {:.3e} ({ratio:.2}x, {:.1e} rel)", c.name, c.measured, f.measured, f.measured / c.scale.max(1.0)));
            }
            if eps && !(ratio >= 0.25 && f.passed) {
                odd.push(format!("{} beyond roundoff growth or tolerance", c.name));
            }
        }
        let what = if eps { "with an eps-quotient" } else { "without an eps-quotient" };
        let mut text = format!(
            "[h/2 re-run, {count} stencil-certified checks {what}] worst ratio {worst_ratio:.2}x (need {REFINE_RATIO}x), \
             {floored} at floor; {time:.2}s for the re-run (limit 120s)"
        );
        if !bad.is_empty() {
            text.push_str(&format!("; below 8x: {}", bad.join(", ")));
        }
        if !odd.is_empty() {
            text.push_str(&format!("; unexpected: {}", odd.join(", ")));
        }
        let passed = bad.is_empty() && count > 0 && time < 120.0;
        let line = if eps {
            // a known failure only while it behaves as roundoff
            Line { id: "8/eps", passed: passed && odd.is_empty(), expected_fail: odd.is_empty(), text }
        } else {
            Line { id: "8", passed: passed && odd.is_empty(), expected_fail: false, text }
        };
        out.push(line);
    }
    out
}

/// Two runs of the binary produce identical report bytes.
fn determinism_line() -> Line {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, format!("{{\"model\": \"cp\", \"output_dir\": {:?}}}", dir.path().join("out").display().to_string()))
        .expect("write config");
    let mut times = Vec::new();
    let mut reports = Vec::new();
    for k in 0..2 {
        let report = dir.path().join(format!("report{k}.json"));
        let t0 = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_solsurf"))
            .args(["verify", "--suite", "all", "--config"])
            .arg(&cfg)
            .arg("--report")
            .arg(&report)
            .output()
            .expect("run solsurf");
        times.push(t0.elapsed().as_secs_f64());
        if out.status.code() != Some(0) {
            return Line {
                id: "9",
                passed: false,
                expected_fail: false,
                text: format!("verify exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)),
            };
        }
        reports.push(std::fs::read(&report).expect("read report"));
    }
    let same = reports[0] == reports[1];
    let slowest = times.iter().copied().fold(0.0, f64::max);
    Line {
        id: "9",
        passed: same && slowest < 120.0,
        expected_fail: false,
        text: format!(
            "[verify --suite all twice] reports {} ({} bytes); slowest run {slowest:.2}s (limit 120s)",
            if same { "byte-identical" } else { "differ" },
            reports[0].len()
        ),
    }
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--list`; nothing to list here.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    solsurf::tune_allocator();
    let ctx = Ctx::with_defaults();
    let t0 = Instant::now();
    let coarse = run("all", &ctx);
    let suite_time = t0.elapsed().as_secs_f64();

    let mut lines: Vec<Line> = CRITERIA.iter().map(|c| criterion_line(c, &coarse)).collect();
    lines.insert(lines.iter().position(|l| l.id == "7").unwrap(), stated_sign_line());
    lines.extend(refinement_lines(&ctx, &coarse));
    lines.push(determinism_line());

    let mut unexpected = 0;
    for l in &lines {
        let tag = match (l.passed, l.expected_fail) {
            (true, false) => "PASS",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
            (false, true) => "FAIL (known)",
            (true, true) => {
                unexpected += 1;
                "PASS (unexpected)"
            }
        };
        println!("{tag} criterion {}: {}", l.id, l.text);
    }
    let other: Vec<_> = coarse.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    println!("suite: {} checks in {suite_time:.2}s, {} failed {:?}", coarse.len(), other.len(), other);
    if unexpected == 0 && other.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
