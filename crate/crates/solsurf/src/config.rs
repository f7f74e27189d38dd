//! Run configuration: one JSON document, unknown keys rejected, cross-field
//! consistency checked before any computation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use solsurf_core::geometry::ExportFormat;
use solsurf_core::grid::{Chart, Grid2, DEFAULT_STENCIL_ORDER};
use solsurf_core::sigma::require_lambda;
use solsurf_core::symmetry::{ConformalSpec, FrechetPolicy};
use solsurf_core::C64;

use crate::report::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("config key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

pub(crate) fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.into(), msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Cp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Euclidean,
    Minkowski,
}

impl Space {
    pub fn chart(self) -> Chart {
        match self {
            Space::Euclidean => Chart::EuclideanComplex,
            Space::Minkowski => Chart::MinkowskiLightcone,
        }
    }

    pub fn default_h(self) -> f64 {
        match self {
            Space::Euclidean => 0.05,
            Space::Minkowski => 0.04,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Solution {
    /// Ladder level k built from the Veronese projector.
    Veronese {
        #[serde(default)]
        k: usize,
    },
    Traveling { kappa: f64, omega: f64 },
}

/// Square grid given by centre, spacing and node count per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub center: [f64; 2],
    pub h: f64,
    pub points: usize,
    #[serde(default = "default_stencil")]
    pub stencil_order: usize,
}

fn default_stencil() -> usize {
    DEFAULT_STENCIL_ORDER
}

impl GridSpec {
    pub fn default_for(space: Space) -> Self {
        Self { center: [0.0, 0.0], h: space.default_h(), points: 101, stencil_order: DEFAULT_STENCIL_ORDER }
    }

    pub fn build(&self, chart: Chart) -> solsurf_core::Result<Grid2> {
        Grid2::centered(chart, self.center, self.h, self.points)?.with_stencil_order(self.stencil_order)
    }

    /// New spacing over the same extent; the node count follows.
    pub fn with_h(&self, h: f64) -> Self {
        let extent = (self.points as f64 - 1.0) * self.h;
        let points = (extent / h).round() as usize + 1;
        Self { h, points, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GaugeSpec {
    None,
    Preset(GaugePreset),
    /// A field file holding S.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugePreset {
    /// S = (x + y/2)·i diag(1, −1, 0, …) in real coordinates.
    Linear,
    /// S = (0.2 + 0.5x)(1 + 0.3y)·i diag(1, −1, 0, …).
    Bilinear,
}

/// Which immersion an export reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Artifact {
    /// Integrated F.
    Immersion,
    SymTafel,
    Gauge,
    Conformal,
    /// 𝓕 from the prolonged wave function.
    Prolonged,
}

impl Artifact {
    pub fn file_stem(self) -> &'static str {
        match self {
            Artifact::Immersion => "immersion",
            Artifact::SymTafel => "sym_tafel",
            Artifact::Gauge => "gauge",
            Artifact::Conformal => "conformal",
            Artifact::Prolonged => "prolonged",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    GaussCurvature,
    MetricDet,
    Norm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportRequest {
    pub source: Artifact,
    pub format: ExportFormat,
    /// Relative paths resolve against `output_dir`.
    pub path: PathBuf,
    /// Scalar written by CSV exports.
    #[serde(default)]
    pub quantity: Option<Quantity>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    #[serde(default = "default_space")]
    pub space: Space,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub solution: Option<Solution>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_lambda")]
    pub lambda: [f64; 2],
    /// a(λ) as ascending coefficients [[re, im], ...].
    #[serde(default)]
    pub a_coeffs: Vec<[f64; 2]>,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub symmetry: Option<ConformalSpec>,
    #[serde(default)]
    pub outputs: Vec<ExportRequest>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub frechet: Option<FrechetPolicy>,
    #[serde(default = "default_suite")]
    pub suite: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_space() -> Space {
    Space::Euclidean
}

fn default_n() -> usize {
    2
}

fn default_lambda() -> [f64; 2] {
    [0.5, 0.0]
}

fn default_suite() -> String {
    "all".into()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("solsurf-out")
}

pub const SUITES: [&str; 11] =
    ["all", "identities", "prop1", "prop2", "prop3", "prop4", "prop5", "prop6", "prop7", "prop8", "appendix"];

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub lambda: Option<[f64; 2]>,
    pub grid_h: Option<f64>,
    pub suite: Option<String>,
}

pub fn parse_lambda(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("expected `re` or `re,im`, got `{s}`")),
    }
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|source| ConfigError::Parse { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::from_json(&text, path)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.lambda {
            self.lambda = l;
        }
        if let Some(h) = o.grid_h {
            self.grid = Some(self.grid_spec().with_h(h));
        }
        if let Some(s) = &o.suite {
            self.suite = s.clone();
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.clone().unwrap_or_else(|| GridSpec::default_for(self.space))
    }

    pub fn grid(&self) -> Grid2 {
        self.grid_spec().build(self.space.chart()).expect("validated grid")
    }

    pub fn solution(&self) -> Solution {
        self.solution.clone().unwrap_or(match self.space {
            Space::Euclidean => Solution::Veronese { k: 0 },
            Space::Minkowski => Solution::Traveling { kappa: 2.0, omega: 1.0 },
        })
    }

    pub fn lambda(&self) -> C64 {
        C64::new(self.lambda[0], self.lambda[1])
    }

    pub fn a_coeffs(&self) -> Vec<C64> {
        self.a_coeffs.iter().map(|[re, im]| C64::new(*re, *im)).collect()
    }

    pub fn policy(&self) -> FrechetPolicy {
        self.frechet.unwrap_or_default()
    }

    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        for (k, v) in &self.tolerances {
            t.set(k, *v);
        }
        t
    }

    /// Refinement factor of the configured spacing relative to the default.
    pub fn refinement(&self) -> f64 {
        self.space.default_h() / self.grid_spec().h
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let chart = self.space.chart();
        if !(2..=4).contains(&self.n) {
            return Err(invalid("n", format!("N must be 2, 3 or 4, got {}", self.n)));
        }
        match (self.space, self.solution()) {
            (Space::Euclidean, Solution::Traveling { .. }) => {
                return Err(invalid("solution", "traveling waves live on the minkowski space"));
            }
            (Space::Minkowski, Solution::Veronese { .. }) => {
                return Err(invalid("solution", "veronese solutions live on the euclidean space"));
            }
            (Space::Euclidean, Solution::Veronese { k }) => {
                if k >= self.n {
                    return Err(invalid("solution.k", format!("ladder level {k} does not exist for N = {}", self.n)));
                }
            }
            (Space::Minkowski, Solution::Traveling { kappa, omega }) => {
                if self.n != 2 {
                    return Err(invalid("n", "traveling waves are built for N = 2 only"));
                }
                if !kappa.is_finite() || !omega.is_finite() {
                    return Err(invalid("solution", "kappa and omega must be finite"));
                }
            }
        }
        let gs = self.grid_spec();
        if !(gs.h > 0.0 && gs.h.is_finite()) {
            return Err(invalid("grid.h", format!("spacing must be positive, got {}", gs.h)));
        }
        let grid = gs.build(chart).map_err(|e| invalid("grid", e.to_string()))?;
        // room for stencils to second order on both sides plus a few nodes
        let need = 4 * grid.half_width() + 9;
        if gs.points < need {
            return Err(invalid("grid.points", format!("need at least {need} points for stencil order {}", gs.stencil_order)));
        }
        require_lambda(self.lambda()).map_err(|e| invalid("lambda", e.to_string()))?;
        if !self.lambda.iter().all(|x| x.is_finite()) {
            return Err(invalid("lambda", "must be finite"));
        }
        if self.a_coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(invalid("a_coeffs", "coefficients must be finite"));
        }
        if let Some(s) = &self.symmetry {
            s.validate(chart).map_err(|e| invalid("symmetry", e.to_string()))?;
        }
        if let Some(p) = &self.frechet {
            p.validate().map_err(|e| invalid("frechet", e.to_string()))?;
        }
        for (k, v) in &self.tolerances {
            if !Tolerances::is_known(k) {
                return Err(invalid(&format!("tolerances.{k}"), format!("unknown tolerance; known: {}", Tolerances::names().join(", "))));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(invalid(&format!("tolerances.{k}"), "must be positive"));
            }
        }
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(invalid("suite", format!("unknown suite `{}`; known: {}", self.suite, SUITES.join(", "))));
        }
        for (i, o) in self.outputs.iter().enumerate() {
            let key = format!("outputs[{i}]");
            match (o.format, o.quantity) {
                (ExportFormat::Csv, None) => return Err(invalid(&key, "csv exports need a `quantity`")),
                (ExportFormat::Obj, _) if self.n != 2 => {
                    return Err(invalid(&key, "obj meshes need the su(2) embedding (N = 2)"))
                }
                (ExportFormat::Obj | ExportFormat::Json, Some(_)) => {
                    return Err(invalid(&key, "`quantity` only applies to csv exports"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, ConfigError> {
        let c = RunConfig::from_json(s, Path::new("test.json"))?;
        c.validate()?;
        Ok(c)
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(r#"{"model": "cp"}"#).unwrap();
        assert_eq!(c.solution(), Solution::Veronese { k: 0 });
        assert_eq!(c.grid().dims, [101, 101]);
        assert_eq!(c.suite, "all");
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(parse(r#"{"model": "cp", "lamda": [0.5, 0]}"#), Err(ConfigError::Parse { .. })));
        assert!(parse(r#"{"model": "cp", "grid": {"h": 0.05, "points": 101, "size": 3}}"#).is_err());
    }

    #[test]
    fn euclidean_traveling_is_inconsistent() {
        let e = parse(r#"{"model": "cp", "solution": {"kind": "traveling", "kappa": 2, "omega": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("`solution`"), "{e}");
        let e = parse(r#"{"model": "cp", "space": "minkowski", "n": 3}"#).unwrap_err();
        assert!(e.to_string().contains("`n`"), "{e}");
    }

    #[test]
    fn symmetry_reality_is_checked_per_space() {
        let s = r#"{"model": "cp", "space": "minkowski", "symmetry": {"f": [[0, 1]], "g": []}}"#;
        assert!(parse(s).unwrap_err().to_string().contains("`symmetry`"));
        let s = r#"{"model": "cp", "symmetry": {"f": [[0, 0], [0, 0], [1, 0]], "g": [[0, 0], [0, 0], [1, 0]]}}"#;
        assert!(parse(s).is_ok());
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut c = parse(r#"{"model": "cp", "lambda": [0.5, 0.0], "suite": "prop1"}"#).unwrap();
        c.apply(&Overrides { lambda: Some([-0.3, 0.0]), grid_h: Some(0.025), suite: Some("prop6".into()) });
        c.validate().unwrap();
        assert_eq!(c.lambda, [-0.3, 0.0]);
        assert_eq!(c.grid().dims, [201, 201]);
        assert!((c.refinement() - 2.0).abs() < 1e-15);
        assert_eq!(c.suite, "prop6");
    }

    #[test]
    fn bad_values_name_their_key() {
        for (s, key) in [
            (r#"{"model": "cp", "lambda": [1.0, 0.0]}"#, "`lambda`"),
            (r#"{"model": "cp", "suite": "prop9"}"#, "`suite`"),
            (r#"{"model": "cp", "tolerances": {"nonsense": 1e-3}}"#, "`tolerances.nonsense`"),
            (r#"{"model": "cp", "grid": {"h": 0.05, "points": 20}}"#, "`grid.points`"),
            (r#"{"model": "cp", "outputs": [{"source": "immersion", "format": "csv", "path": "k.csv"}]}"#, "`outputs[0]`"),
        ] {
            let e = parse(s).unwrap_err().to_string();
            assert!(e.contains(key), "{e}");
        }
    }

    #[test]
    fn lambda_flag_syntax() {
        assert_eq!(parse_lambda("0.5").unwrap(), [0.5, 0.0]);
        assert_eq!(parse_lambda("0.5, -1").unwrap(), [0.5, -1.0]);
        assert!(parse_lambda("a,b,c").is_err());
    }
}
