use serde::Serialize;
use serde_json::Value;

/// How a check's value is compared against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub paper_ref: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        paper_ref: impl Into<String>,
        value: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Self {
        let pass = match relation {
            Relation::Below => value < tolerance,
            Relation::AtMost => value <= tolerance,
            Relation::Above => value > tolerance,
        };
        Self {
            name: name.into(),
            paper_ref: paper_ref.into(),
            value,
            tolerance,
            relation,
            pass,
        }
    }

    /// Residual check: passes when `value < tolerance`.
    pub fn residual(
        name: impl Into<String>,
        paper_ref: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        Self::new(name, paper_ref, value, Relation::Below, tolerance)
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::Above => ">",
        };
        format!(
            "{:<4} {:<44} {:<10} {:>13.6e} {rel} {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.paper_ref,
            self.value,
            self.tolerance
        )
    }
}

/// Machine-readable output of one command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
