//! The four subcommands. Each returns a report; configuration and input
//! problems are errors, computational failures become failed checks.

use std::fs;
use std::path::{Path, PathBuf};

use solsurf_core::field::{Field, RealField};
use solsurf_core::geometry::{
    embed_su2, export_csv, export_json, export_obj, first_fundamental_form, gauss_curvature, ExportFormat, TOL_METRIC,
};
use solsurf_core::immersion::{
    assemble_tangents, compatibility_defect, conformal_immersion_closed, constant_difference_check, gauge_immersion,
    integrate_surface, prolong_immersion, sym_tafel, ImmersionInputs, IntegrationRule,
};
use solsurf_core::io::{read_field, read_json, write_field, write_json, ImmersionFile, WaveFile};
use solsurf_core::sigma::{
    el_residual, projector_field_defect, traveling_constant_defect, traveling_constraint_defect,
    traveling_solution, u_pair, veronese_field, build_ladder,
};
use solsurf_core::spectral::{SpectralParam, WaveBuilder};
use solsurf_core::symmetry::{conformal_characteristic, frechet_u, ConformalSpec};
use solsurf_core::{Error, C64};

use crate::config::{invalid, Artifact, ConfigError, GaugePreset, GaugeSpec, Quantity, RunConfig, Solution, Space};
use crate::report::{Check, Relation, Report};
use crate::suites::{bilinear_gauge, linear_gauge, run, tangent_check, Checker, Ctx, Measure, Spec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Immerse,
    Verify,
    Export,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Immerse => "immerse",
            Command::Verify => "verify",
            Command::Export => "export",
        }
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let ctx = Ctx::from_config(cfg).map_err(CliError::Input)?;
    let checks = match cmd {
        Command::Solve => solve(cfg, &ctx)?,
        Command::Immerse => immerse(cfg, &ctx)?,
        Command::Verify => run(&cfg.suite, &ctx),
        Command::Export => export(cfg, &ctx)?,
    };
    let suite = if cmd == Command::Verify { cfg.suite.as_str() } else { "-" };
    Ok(Report::new(cmd.name(), suite, checks))
}

fn input(e: Error) -> CliError {
    CliError::Input(e)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| input(Error::Io { path: dir.display().to_string(), source: e }))
}

fn artifact_path(cfg: &RunConfig, a: Artifact) -> PathBuf {
    cfg.output_dir.join(format!("{}.json", a.file_stem()))
}

/// Solution jets and the matching wave-function builder.
fn builder(cfg: &RunConfig) -> solsurf_core::Result<WaveBuilder> {
    let g = cfg.grid();
    Ok(match cfg.solution() {
        Solution::Veronese { k } => {
            WaveBuilder::Euclidean { ladder: build_ladder(&veronese_field(cfg.n, g)?)?.with_active(k)? }
        }
        Solution::Traveling { kappa, omega } => {
            WaveBuilder::Traveling { kappa, jets: traveling_solution(kappa, omega, g)?.1 }
        }
    })
}

fn solve(cfg: &RunConfig, ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    ensure_dir(&cfg.output_dir)?;
    let mut ck = Checker::new(ctx);
    let t = "solve";
    ck.group("solve", t, |ck| {
        let g = cfg.grid();
        let lam = cfg.lambda();
        let b = match cfg.solution() {
            Solution::Veronese { k } => {
                let ladder = build_ladder(&veronese_field(cfg.n, g)?)?;
                for (i, p) in ladder.levels.iter().enumerate() {
                    write_field(&cfg.output_dir.join(format!("ladder_{i}.json")), p)?;
                    ck.below(&format!("solve.level{i}.projector"), t, "projector", projector_field_defect(p));
                }
                ck.below("solve.ladder_orthogonality", t, "ladder_orthogonality", ladder.orthogonality_defect);
                ck.below("solve.ladder_completeness", t, "projector", ladder.completeness_defect);
                WaveBuilder::Euclidean { ladder: ladder.with_active(k)? }
            }
            Solution::Traveling { kappa, omega } => {
                let (tw, j) = traveling_solution(kappa, omega, g)?;
                ck.below("solve.traveling.constraint", t, "exact", traveling_constraint_defect(&tw, &j));
                ck.below("solve.traveling.constant_commutator", t, "exact", traveling_constant_defect(&tw, &j));
                WaveBuilder::Traveling { kappa, jets: j }
            }
        };
        let j = b.jets();
        write_field(&cfg.output_dir.join("theta.json"), &j.theta)?;
        ck.below("solve.el_residual", t, "el_residual", el_residual(&j));
        let w = b.build(lam)?;
        write_json(&cfg.output_dir.join("phi.json"), &WaveFile::from_wave(&w)?)?;
        ck.below("solve.det_constant", t, "det_constant", w.det_variation());
        Ok(())
    });
    Ok(ck.checks)
}

fn gauge_field(cfg: &RunConfig) -> Result<Option<Field>, CliError> {
    let g = cfg.grid();
    let order = solsurf_core::sigma::jet_order_for(cfg.n);
    Ok(match &cfg.gauge {
        None | Some(GaugeSpec::None) => None,
        Some(GaugeSpec::Preset(GaugePreset::Linear)) => Some(linear_gauge(g, cfg.n, order)),
        Some(GaugeSpec::Preset(GaugePreset::Bilinear)) => Some(bilinear_gauge(g, cfg.n, order)),
        Some(GaugeSpec::File(p)) => {
            let p = if p.is_relative() { cfg.output_dir.join(p) } else { p.clone() };
            let f = read_field(&p).map_err(input)?;
            if f.grid() != &g || f.rows() != cfg.n {
                return Err(invalid("gauge", format!("{} does not match the configured grid and N", p.display())).into());
            }
            // values only: derivatives come from stencils
            Some(f)
        }
    })
}

/// Whether the prolonged immersion is expected to satisfy its tangent
/// identity: always on the Euclidean side, and for f₁₁ = 0, f₁ = g₂ on the
/// Minkowski side.
pub fn prolonged_integrable(space: Space, spec: &ConformalSpec) -> bool {
    if space == Space::Euclidean {
        return true;
    }
    let zero = C64::new(0.0, 0.0);
    let linear = |c: &[C64]| c.iter().skip(2).all(|x| *x == zero);
    let slope = |c: &[C64]| c.get(1).copied().unwrap_or(zero);
    linear(&spec.f) && linear(&spec.g) && slope(&spec.f) == slope(&spec.g)
}

fn immerse(cfg: &RunConfig, ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    let gauge = gauge_field(cfg)?;
    let inp = ImmersionInputs { a: cfg.a_coeffs(), gauge, q: None };
    if inp.is_empty() && cfg.symmetry.is_none() {
        return Err(invalid("a_coeffs", "immerse needs a nonzero a(lambda), a gauge or a symmetry").into());
    }
    ensure_dir(&cfg.output_dir)?;
    let mut ck = Checker::new(ctx);
    let t = "immerse";
    ck.group("immerse", t, |ck| {
        let lam = cfg.lambda();
        let pol = cfg.policy();
        let b = builder(cfg)?;
        let j = b.jets();
        let w = b.build(lam)?;
        let q = match &cfg.symmetry {
            Some(s) => Some(conformal_characteristic(s, &j)?),
            None => None,
        };
        let inp = ImmersionInputs { q: q.clone(), ..inp };
        let (ta, tb) = assemble_tangents(&inp, &j, lam, &pol)?;
        let (u1, u2) = u_pair(&j, lam)?;
        ck.below("immerse.compatibility", t, "compat", compatibility_defect(&ta, &tb, &u1, &u2));
        let res = integrate_surface(&ta, &tb, &w, &u1, &u2, None, IntegrationRule::default())?;
        write_json(&artifact_path(cfg, Artifact::Immersion), &ImmersionFile::from_result(&res)?)?;

        // closed forms of each ingredient, summed for comparison
        let mut closed: Option<Field> = None;
        let mut add = |f: &Field| closed = Some(match closed.take() { Some(c) => c.add(f), None => f.clone() });
        let coef = inp.a_at(lam);
        if coef != C64::new(0.0, 0.0) {
            let st = sym_tafel(&b, coef, SpectralParam::new(lam)?)?;
            write_field(&artifact_path(cfg, Artifact::SymTafel), &st)?;
            add(&st);
        }
        if let Some(s) = &inp.gauge {
            let gf = gauge_immersion(s, &w)?;
            write_field(&artifact_path(cfg, Artifact::Gauge), &gf)?;
            add(&gf);
        }
        if let Some(spec) = &cfg.symmetry {
            let cf = conformal_immersion_closed(spec, &j, &w, lam)?;
            write_field(&artifact_path(cfg, Artifact::Conformal), &cf)?;
            add(&cf);
        }
        let closed = closed.expect("at least one ingredient");
        let (r, scale) = tangent_check(&closed, &ta, &tb, &w.phi)?;
        ck.below_fd("immerse.tangent_identity", t, "tangent", r, scale);
        ck.below_fd("immerse.path_defect", t, "path", res.path_residual.clone(), scale);
        let (_, var) = constant_difference_check(&res.f_raw, &closed);
        ck.below("immerse.integrated_minus_closed", t, "path", var);
        ck.push(
            Spec {
                name: "immerse.su_correction",
                target: t,
                tol: ctx.tol.get("tangent"),
                relation: Relation::Below,
                refinable: false,
                eps_quotient: false,
                scale: 1.0,
            },
            Measure::Value(res.su_correction / res.f_raw.max_norm().max(1.0)),
            None,
        );

        if let (Some(spec), Some(q)) = (&cfg.symmetry, &q) {
            let pf = prolong_immersion(&b, &j, q, lam, &pol)?;
            write_field(&artifact_path(cfg, Artifact::Prolonged), &pf)?;
            let (p1, p2) = frechet_u(&j, q, lam, &pol)?;
            let (r, scale) = tangent_check(&pf, &p1, &p2, &w.phi)?;
            if prolonged_integrable(cfg.space, spec) {
                ck.below_fd("immerse.prolonged_tangent_identity", t, "tangent", r, scale);
            } else {
                ck.above("immerse.prolonged_tangent_identity", "expected to fail: f11 != 0 or f1 != g2", "negative_control", r);
            }
        }
        Ok(())
    });
    Ok(ck.checks)
}

fn read_artifact(cfg: &RunConfig, a: Artifact) -> Result<Field, CliError> {
    let p = artifact_path(cfg, a);
    if !p.exists() {
        return Err(input(Error::Invalid(format!(
            "{} not found; run `solsurf immerse` with an ingredient that produces it",
            p.display()
        ))));
    }
    let f = match a {
        Artifact::Immersion => read_json::<ImmersionFile>(&p).and_then(|f| f.field()),
        _ => read_field(&p),
    };
    f.map_err(input)
}

fn quantity(f: &Field, q: Quantity) -> solsurf_core::Result<RealField> {
    Ok(match q {
        Quantity::Norm => f.values().norm_field(),
        Quantity::MetricDet => first_fundamental_form(f)?.det(),
        Quantity::GaussCurvature => gauss_curvature(&first_fundamental_form(f)?, TOL_METRIC).k,
    })
}

fn export(cfg: &RunConfig, ctx: &Ctx) -> Result<Vec<Check>, CliError> {
    if cfg.outputs.is_empty() {
        return Err(invalid("outputs", "nothing to export").into());
    }
    // every input must exist before anything is written
    let fields = cfg.outputs.iter().map(|o| read_artifact(cfg, o.source)).collect::<Result<Vec<_>, _>>()?;
    ensure_dir(&cfg.output_dir)?;
    let mut ck = Checker::new(ctx);
    for (o, f) in cfg.outputs.iter().zip(&fields) {
        let path = if o.path.is_relative() { cfg.output_dir.join(&o.path) } else { o.path.clone() };
        let name = format!("export.{}.{}", o.source.file_stem(), path.display());
        ck.group(&name.clone(), "export", |ck| {
            // measured: non-finite entries written
            let bad = match o.format {
                ExportFormat::Obj => {
                    let s = embed_su2(f)?;
                    export_obj(&s, &path)?;
                    0
                }
                ExportFormat::Csv => {
                    let r = quantity(f, o.quantity.expect("validated"))?;
                    export_csv(&r, &path)?;
                    r.data.iter().filter(|v| !v.is_finite()).count()
                }
                ExportFormat::Json => {
                    export_json(f, &path)?;
                    0
                }
            };
            ck.push(
                Spec { name: &name, target: "export", tol: 0.5, relation: Relation::Below, refinable: false, eps_quotient: false, scale: 1.0 },
                Measure::Value(0.0),
                Some(format!("wrote {}; {bad} masked nodes", path.display())),
            );
            Ok(())
        });
    }
    Ok(ck.checks)
}
