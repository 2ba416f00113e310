use serde::Serialize;

/// Outcome of a numerical check of `lhs <= rhs`.
///
/// `slack = rhs - lhs` and `pass` holds when `slack >= -tolerance`.
/// `hypotheses_hold` records whether the assumptions under which the
/// inequality is expected were themselves verified; a failing check with
/// `hypotheses_hold == false` is not a counterexample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Node index (or sample index) where the slack is smallest, when meaningful.
    pub worst_point: Option<usize>,
    pub hypotheses_hold: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<(String, f64)>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
            worst_point: None,
            hypotheses_hold: true,
            notes: Vec::new(),
            details: Vec::new(),
        }
    }

    pub fn at(mut self, worst: usize) -> Self {
        self.worst_point = Some(worst);
        self
    }

    pub fn with_hypotheses(mut self, hold: bool) -> Self {
        self.hypotheses_hold = hold;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_and_pass() {
        let r = InequalityReport::new("x", 1.0, 0.5, 0.1);
        assert_eq!(r.slack, -0.5);
        assert!(!r.pass);
        let r = InequalityReport::new("x", 1.0, 0.95, 0.1);
        assert!(r.pass);
        let r = r.detail("a", 2.0);
        assert_eq!(r.get("a"), Some(2.0));
    }
}
