//! Verification records, tolerances and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Named tolerances with their defaults.
const DEFAULTS: &[(&str, f64)] = &[
    ("closed_form", 1e-10),
    ("commutation", 1e-6),
    ("compat", 1e-6),
    ("constant_mean", 1e-8),
    ("constant_variation", 1e-8),
    ("counterexample", 0.1),
    ("det_constant", 1e-10),
    ("dlambda", 1e-7),
    ("el_residual", 1e-8),
    ("eps_floor", 1e-12),
    ("exact", 1e-12),
    ("frechet", 1e-6),
    ("h_order", 3.0),
    ("identity", 1e-10),
    ("ladder_orthogonality", 1e-9),
    ("linearity", 1e-14),
    ("lsp_euclidean", 1e-7),
    ("lsp_symmetry", 1e-6),
    ("lsp_traveling", 1e-8),
    ("negative_control", 1e-3),
    ("path", 1e-6),
    ("projector", 1e-10),
    ("rank", 1e-10),
    ("su_closure", 1e-12),
    ("sym_tafel_constant", 1e-7),
    ("tangent", 1e-6),
];

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULTS.iter().copied().collect())
    }
}

impl Tolerances {
    pub fn names() -> Vec<&'static str> {
        DEFAULTS.iter().map(|(k, _)| *k).collect()
    }

    pub fn is_known(name: &str) -> bool {
        DEFAULTS.iter().any(|(k, _)| *k == name)
    }

    pub fn get(&self, name: &str) -> f64 {
        *self.0.get(name).unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    /// Ignores unknown names; configs are validated before this is called.
    pub fn set(&mut self, name: &str, v: f64) {
        if let Some(slot) = self.0.iter_mut().find(|(k, _)| **k == name) {
            *slot.1 = v;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Passes when measured < tolerance.
    Below,
    /// Passes when measured > tolerance (negative controls, counterexamples).
    Above,
}

impl Relation {
    pub fn holds(self, measured: f64, tol: f64) -> bool {
        match self {
            Relation::Below => measured < tol,
            Relation::Above => measured > tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub target: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    /// Certified by spatial stencils, so an h/2 rerun should shrink it.
    #[serde(skip)]
    pub refinable: bool,
    /// The defect contains a finite-difference quotient in ε, whose
    /// roundoff (~u/ε) does not shrink with h.
    #[serde(skip)]
    pub eps_quotient: bool,
    /// Physical box the measurement was taken over.
    #[serde(skip)]
    pub region: Option<[f64; 4]>,
    /// Magnitude of the compared terms.
    #[serde(skip)]
    pub scale: f64,
    #[serde(skip)]
    pub elapsed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub suite: String,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, suite: &str, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed };
        Self { command: command.into(), suite: suite.into(), checks, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// JSON document; wall-clock times only when asked for, since they
    /// differ between runs.
    pub fn to_json(&self, timings: bool) -> String {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.runtime_s = timings.then_some(c.elapsed);
        }
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = write!(
                s,
                "{} {:<58} {:>10.3e} {} {:<8.1e} [{}] {:.2}s",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.relation.symbol(),
                c.tolerance,
                c.target,
                c.elapsed
            );
            if let Some(n) = &c.note {
                let _ = write!(s, "  ({n})");
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "{} {}: {} checks, {} passed, {} failed",
            self.command, self.suite, self.summary.total, self.summary.passed, self.summary.failed
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(name: &str, measured: f64, passed: bool) -> Check {
        Check {
            name: name.into(),
            target: "t".into(),
            measured,
            tolerance: 1e-6,
            relation: Relation::Below,
            passed,
            note: None,
            runtime_s: None,
            refinable: true,
            eps_quotient: false,
            region: None,
            scale: 1.0,
            elapsed: 0.25,
        }
    }

    #[test]
    fn json_omits_timings_unless_requested() {
        let r = Report::new("verify", "x", vec![check("a", 1e-9, true), check("b", 1.0, false)]);
        let plain = r.to_json(false);
        assert!(!plain.contains("runtime_s") && !plain.contains("refinable"));
        assert!(r.to_json(true).contains("\"runtime_s\": 0.25"));
        assert_eq!(r.summary.failed, 1);
        assert!(!r.all_passed());
        assert!(r.to_text().contains("FAIL b"));
    }

    #[test]
    fn relations_and_tolerance_names() {
        assert!(Relation::Below.holds(1e-9, 1e-6) && !Relation::Below.holds(1e-6, 1e-6));
        assert!(Relation::Above.holds(0.2, 0.1));
        let mut t = Tolerances::default();
        t.set("tangent", 2e-6);
        assert_eq!(t.get("tangent"), 2e-6);
        assert!(Tolerances::is_known("lsp_traveling") && !Tolerances::is_known("bogus"));
        let names = Tolerances::names();
        assert!(names.windows(2).all(|w| w[0] < w[1]));
    }
}
