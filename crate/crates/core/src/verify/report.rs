use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ext::{self, ExtReal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Violated => "VIOLATED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// What the caller expects; counterexample demonstrations expect a violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Expectation {
    #[default]
    Holds,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "==",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Failed, but the estimators had not settled.
    Unsettled,
}

/// One inequality or identity evaluated at finite scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "ext::as_string")]
    pub lhs: ExtReal,
    pub relation: Relation,
    #[serde(with = "ext::as_string")]
    pub rhs: ExtReal,
    /// Nonnegative when the relation holds exactly; for identities this is
    /// minus the distance.
    #[serde(with = "ext::as_string")]
    pub margin: ExtReal,
    pub tolerance: f64,
    pub spread: f64,
    /// Abscissa (R or theta) at which the margin was attained.
    pub location: Option<f64>,
    /// False when the hypotheses of the statement are not met; the check is
    /// then reported but does not enter the verdict.
    pub asserted: bool,
    pub status: CheckStatus,
}

impl Check {
    /// Evaluates `lhs relation rhs` with `tolerance = allowance + spread`.
    /// A failure is only conclusive when `spread <= settled`.
    pub(crate) fn evaluate(
        name: impl Into<String>,
        lhs: ExtReal,
        relation: Relation,
        rhs: ExtReal,
        allowance: f64,
        spread: f64,
        settled: f64,
    ) -> Check {
        let margin = match relation {
            Relation::Le => lhs.slack_le(rhs),
            Relation::Eq => -lhs.distance(rhs),
        };
        let tolerance = allowance + spread;
        let status = if margin >= ExtReal::from(-tolerance) {
            CheckStatus::Pass
        } else if spread > settled {
            CheckStatus::Unsettled
        } else {
            CheckStatus::Fail
        };
        Check {
            name: name.into(),
            lhs,
            relation,
            rhs,
            margin,
            tolerance,
            spread,
            location: None,
            asserted: true,
            status,
        }
    }

    pub(crate) fn at(mut self, x: f64) -> Check {
        self.location = Some(x);
        self
    }

    pub(crate) fn asserted(mut self, asserted: bool) -> Check {
        self.asserted = asserted;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub verdict: Verdict,
    pub expected: Expectation,
    pub source: String,
    pub gamma: Option<String>,
    /// Diagnostic outcomes the statement's hypotheses depend on.
    pub preconditions: BTreeMap<String, String>,
    #[serde(serialize_with = "ser_quantities", deserialize_with = "de_quantities")]
    pub quantities: BTreeMap<String, ExtReal>,
    pub checks: Vec<Check>,
    pub tolerance: f64,
    /// SHA-256 over the source, grids, schedules and set.
    pub fingerprint: String,
    pub notes: Vec<String>,
}

fn ser_quantities<S: Serializer>(q: &BTreeMap<String, ExtReal>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(q.iter().map(|(k, v)| (k, v.to_string())))
}

fn de_quantities<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, ExtReal>, D::Error> {
    let raw = BTreeMap::<String, String>::deserialize(d)?;
    raw.into_iter().map(|(k, v)| v.parse().map(|x| (k, x)).map_err(serde::de::Error::custom)).collect()
}

impl VerificationReport {
    pub(crate) fn new(theorem: &str, source: String, tolerance: f64) -> Self {
        VerificationReport {
            theorem: theorem.to_string(),
            verdict: Verdict::Holds,
            expected: Expectation::Holds,
            source,
            gamma: None,
            preconditions: BTreeMap::new(),
            quantities: BTreeMap::new(),
            checks: Vec::new(),
            tolerance,
            fingerprint: String::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn quantity(&mut self, name: &str, value: ExtReal) {
        self.quantities.insert(name.to_string(), value);
    }

    pub(crate) fn precondition(&mut self, name: &str, value: impl Into<String>) {
        self.preconditions.insert(name.to_string(), value.into());
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Recomputes the verdict from the asserted checks.
    pub(crate) fn finish(mut self) -> Self {
        let asserted = self.checks.iter().filter(|c| c.asserted);
        let mut verdict = Verdict::Holds;
        for c in asserted {
            match c.status {
                CheckStatus::Fail => verdict = Verdict::Violated,
                CheckStatus::Unsettled if verdict == Verdict::Holds => verdict = Verdict::Inconclusive,
                _ => {}
            }
        }
        self.verdict = verdict;
        self
    }

    pub fn expecting(mut self, expected: Expectation) -> Self {
        self.expected = expected;
        self
    }

    /// False for an unexpected violation or a missed expected one.
    pub fn meets_expectation(&self) -> bool {
        match self.expected {
            Expectation::Holds => self.verdict != Verdict::Violated,
            Expectation::Violated => self.verdict == Verdict::Violated,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Fixed-width text rendering.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{} [{}] {}", self.theorem, self.source, self.verdict.as_str());
        if self.expected == Expectation::Violated {
            out.push_str(" (expected VIOLATED)");
        }
        out.push('\n');
        if let Some(g) = &self.gamma {
            let _ = writeln!(out, "  set: {g}");
        }
        for (k, v) in &self.preconditions {
            let _ = writeln!(out, "  {k}: {v}");
        }
        for (k, v) in &self.quantities {
            let _ = writeln!(out, "  {k} = {}", fmt_value(*v));
        }
        let _ = writeln!(
            out,
            "  {:<44} {:>10}    {:>10} {:>10} {:>8} {:>9}  at",
            "check", "lhs", "rhs", "margin", "tol", "status"
        );
        for c in &self.checks {
            let status = match (c.asserted, c.status) {
                (false, CheckStatus::Pass) => "(pass)",
                (false, _) => "(fail)",
                (true, CheckStatus::Pass) => "pass",
                (true, CheckStatus::Fail) => "FAIL",
                (true, CheckStatus::Unsettled) => "unsettled",
            };
            let at = c.location.map(|x| format!("{x:.4}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:<44} {:>10} {:>2} {:>10} {:>10} {:>8.4} {:>9}  {}",
                truncate(&c.name, 44),
                fmt_value(c.lhs),
                c.relation.symbol(),
                fmt_value(c.rhs),
                fmt_value(c.margin),
                c.tolerance,
                status,
                at
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "  note: {n}");
        }
        out
    }
}

fn fmt_value(v: ExtReal) -> String {
    match v {
        ExtReal::Finite(x) => format!("{x:.5}"),
        other => other.to_string(),
    }
}

fn truncate(s: &str, width: usize) -> String {
    if s.chars().count() <= width {
        s.to_string()
    } else {
        s.chars().take(width - 1).chain(std::iter::once('~')).collect()
    }
}
