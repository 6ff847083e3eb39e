//! Hypothesis checkers with witnesses, assembled into a [`Certificate`].
//!
//! No check computes the Oka property. Each one tests a geometric
//! hypothesis at a sampled resolution, or exactly where the data allow,
//! and each route names the result that turns its hypotheses into the
//! conclusion.

mod checks;
mod hyperplane;
mod sweep;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::convex::{ConvexSet, ConvexSetSpec};
use crate::exec::Execution;

pub use checks::{
    check_chart_compact, check_complex_tangent_halfline, check_connectivity, check_line_lift, check_lineality,
    check_normcombo_smoothing, check_weak_projective, recheck_witness, Node, WeakProjective,
};
pub use hyperplane::{conormal, lerp, polar_lerp, Hyperplane};
pub use sweep::{hull_sweep_witness, SweepError, SweepPath, SweepStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "Certified-Exact")]
    CertifiedExact,
    #[serde(rename = "Verified-Sampled")]
    VerifiedSampled,
    Refuted,
    Inconclusive,
}

impl Verdict {
    pub fn passes(self) -> bool {
        matches!(self, Verdict::CertifiedExact | Verdict::VerifiedSampled)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedExact => "Certified-Exact",
            Verdict::VerifiedSampled => "Verified-Sampled",
            Verdict::Refuted => "Refuted",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub seed: u64,
    pub boundary: usize,
    pub exterior: usize,
    pub lines: usize,
    pub hyperplanes: usize,
    pub path_steps: usize,
    pub window: f64,
    pub tol: f64,
    /// Not part of the serialized plan: results do not depend on it.
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            seed: 42,
            boundary: 500,
            exterior: 200,
            lines: 100,
            hyperplanes: 60,
            path_steps: 64,
            window: 10.0,
            tol: 1e-9,
            execution: Execution::default(),
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<(), String> {
        let counts = [self.boundary, self.exterior, self.lines, self.hyperplanes, self.path_steps];
        if counts.iter().any(|&c| c == 0) {
            return Err("sample counts must be at least 1".into());
        }
        if !(self.window > 0.0) || !(self.tol > 0.0) {
            return Err("window and tolerance must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub note: String,
}

impl CheckResult {
    pub(crate) fn new(name: &str, anchor: &str, plan: &SamplingPlan) -> Self {
        CheckResult {
            name: name.into(),
            anchor: anchor.into(),
            verdict: Verdict::Inconclusive,
            witnesses: Vec::new(),
            samples: 0,
            seed: plan.seed,
            tol: plan.tol,
            note: String::new(),
        }
    }

    pub(crate) fn with(mut self, verdict: Verdict, note: impl Into<String>) -> Self {
        self.verdict = verdict;
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub name: String,
    /// The result that converts the route's hypotheses into the conclusion.
    pub conclusion: String,
    pub checks: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub input_digest: String,
    pub metric: String,
    pub plan: SamplingPlan,
    pub checks: Vec<CheckResult>,
    pub routes: Vec<RouteResult>,
    pub overall: Verdict,
}

impl Certificate {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// SHA-256 of the canonical JSON of a set spec.
pub fn input_digest(spec: &ConvexSetSpec) -> String {
    let v: Value = serde_json::to_value(spec).expect("spec serializes");
    let mut h = Sha256::new();
    h.update(canonical_json(&v).as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON with object keys sorted, no whitespace.
pub fn canonical_json(v: &Value) -> String {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let parts: Vec<String> =
                keys.iter().map(|k| format!("{}:{}", Value::String((*k).clone()), canonical_json(&m[*k]))).collect();
            format!("{{{}}}", parts.join(","))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

struct RouteDef {
    name: &'static str,
    conclusion: &'static str,
    checks: &'static [&'static str],
}

const ROUTES: &[RouteDef] = &[
    RouteDef {
        name: "no-line",
        conclusion: "a closed convex set containing no affine real line has an Oka complement",
        checks: &["lineality"],
    },
    RouteDef {
        name: "strictly-convex-tangent",
        conclusion: "a closed convex set with C^1 boundary whose complex tangent slices contain no halfline has an Oka complement",
        checks: &["complex_tangent_halfline"],
    },
    RouteDef {
        name: "projective-convexity",
        conclusion: "a closed set whose projective closure is projectively convex has an Oka complement",
        checks: &["weak_projective", "line_lift", "connectivity"],
    },
    RouteDef {
        name: "irreducible-epigraph",
        conclusion: "the epigraph of an irreducible convex function has an Oka complement",
        checks: &["normcombo_smoothing"],
    },
];

pub(crate) fn overall(checks: &[CheckResult], routes: &[RouteResult]) -> Verdict {
    if checks.iter().any(|c| c.verdict == Verdict::Refuted) {
        Verdict::Refuted
    } else if !checks.is_empty() && checks.iter().all(|c| c.verdict == Verdict::CertifiedExact) {
        Verdict::CertifiedExact
    } else if routes.iter().any(|r| r.passed) {
        Verdict::VerifiedSampled
    } else {
        Verdict::Inconclusive
    }
}

/// Run every applicable check and assemble the certificate.
pub fn certify_oka_complement(set: &ConvexSet, plan: &SamplingPlan) -> Certificate {
    let mut checks = vec![check_lineality(set, plan), check_complex_tangent_halfline(set, plan)];
    let wp = check_weak_projective(set, plan);
    let candidates: Vec<Hyperplane> = wp.nodes.iter().map(|n| n.h.clone()).collect();
    checks.push(wp.result);
    checks.push(check_line_lift(set, plan));
    checks.push(check_connectivity(set, plan));
    checks.push(check_chart_compact(set, &candidates, &[1.0, 0.1, 0.01], plan));
    if let Some(c) = check_normcombo_smoothing(set, plan) {
        checks.push(c);
    }
    let routes: Vec<RouteResult> = ROUTES
        .iter()
        .filter(|r| r.checks.iter().all(|n| checks.iter().any(|c| c.name == *n)))
        .map(|r| RouteResult {
            name: r.name.into(),
            conclusion: r.conclusion.into(),
            checks: r.checks.iter().map(|s| s.to_string()).collect(),
            passed: r.checks.iter().all(|n| checks.iter().any(|c| c.name == *n && c.verdict.passes())),
        })
        .collect();
    Certificate {
        input_digest: input_digest(set.spec()),
        metric: "standard-hermitian".into(),
        plan: *plan,
        overall: overall(&checks, &routes),
        checks,
        routes,
    }
}
