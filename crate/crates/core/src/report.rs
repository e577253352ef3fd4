//! Verification report structure shared by all harnesses.
//!
//! Reports carry every measured quantity, bound, constant, and tolerance as
//! named entries in insertion order so serialized output is reproducible
//! byte-for-byte for a fixed run.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    ToleranceFailure,
    HypothesisFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub inputs: Vec<(String, String)>,
    pub measured: Vec<NamedValue>,
    pub bound: Vec<NamedValue>,
    pub constants: Vec<NamedValue>,
    pub tolerances: Vec<NamedValue>,
    pub warnings: Vec<String>,
    pub verdict: Verdict,
    pub pass: bool,
    /// Worst slack across all checked inequalities; nonnegative on pass.
    pub margin: f64,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            inputs: Vec::new(),
            measured: Vec::new(),
            bound: Vec::new(),
            constants: Vec::new(),
            tolerances: Vec::new(),
            warnings: Vec::new(),
            verdict: Verdict::Pass,
            pass: true,
            margin: f64::INFINITY,
        }
    }

    pub fn input(&mut self, name: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.inputs.push((name.into(), value.into()));
        self
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.measured.push(NamedValue { name: name.into(), value });
        self
    }

    pub fn bound(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.bound.push(NamedValue { name: name.into(), value });
        self
    }

    pub fn constant(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.constants.push(NamedValue { name: name.into(), value });
        self
    }

    pub fn tolerance(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.tolerances.push(NamedValue { name: name.into(), value });
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    /// Record one inequality `measured <= bound` (slack = bound - measured);
    /// the report fails once any slack drops below -slack_tol.
    pub fn check(&mut self, slack: f64, slack_tol: f64) -> &mut Self {
        if slack < self.margin {
            self.margin = slack;
        }
        if slack < -slack_tol {
            self.pass = false;
            if self.verdict == Verdict::Pass {
                self.verdict = Verdict::ToleranceFailure;
            }
        }
        self
    }

    pub fn fail_hypothesis(&mut self, reason: impl Into<String>) -> &mut Self {
        self.pass = false;
        self.verdict = Verdict::HypothesisFailure;
        self.warnings.push(reason.into());
        self
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
