use crate::error::Error;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Tolerance for treating a slack as an equality.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

/// What a criterion can tell about membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    /// failure excludes membership
    Necessary,
    /// success implies the stated conclusion
    Sufficient,
    /// decides membership on its hypothesis domain
    Classifier,
    /// numeric check of a lemma feeding another criterion
    Auxiliary,
    /// truncation-level evidence only
    Diagnostic,
}

/// Insertion-ordered `name -> value` list that serializes as a map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Named(pub Vec<(String, f64)>);

impl Named {
    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.0.push((name.into(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn min(&self) -> Option<(&str, f64)> {
        self.0
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, v)| (n.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(n, v)| (n.as_str(), *v))
    }
}

impl Serialize for Named {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            if v.is_finite() {
                m.serialize_entry(k, v)?;
            } else {
                m.serialize_entry(k, &Option::<f64>::None)?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessRecord {
    Point { x: f64, value: f64 },
    Index { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
    /// numerical refusal rather than bad input
    pub numerical: bool,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord {
            kind: e.kind(),
            message: e.to_string(),
            numerical: e.is_numerical(),
        }
    }
}

/// Outcome of one criterion. Margins are slacks `bound - value`, so `>= 0`
/// reads as "holds".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub criterion: String,
    pub kind: CriterionKind,
    pub status: Status,
    pub margins: Named,
    pub computed: Named,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

impl CriterionVerdict {
    pub fn new(criterion: &str, kind: CriterionKind) -> Self {
        CriterionVerdict {
            criterion: criterion.to_string(),
            kind,
            status: Status::Inconclusive,
            margins: Named::default(),
            computed: Named::default(),
            witness: None,
            flags: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn from_error(criterion: &str, kind: CriterionKind, e: &Error) -> Self {
        let mut v = Self::new(criterion, kind);
        v.error = Some(e.into());
        v.notes.push(e.to_string());
        v
    }

    pub fn margin(mut self, name: impl Into<String>, value: f64) -> Self {
        self.margins.push(name, value);
        self
    }

    pub fn value(mut self, name: impl Into<String>, value: f64) -> Self {
        self.computed.push(name, value);
        self
    }

    pub fn flag(mut self, f: impl Into<String>) -> Self {
        self.flags.push(f.into());
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn inconclusive(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Inconclusive;
        self.notes.push(reason.into());
        self
    }

    /// Fails when some margin is below `-tol`, holds otherwise.
    pub fn decide(mut self, tol: f64) -> Self {
        self.status = if self.margins.iter().any(|(_, v)| v < -tol || v.is_nan()) {
            Status::Fails
        } else {
            Status::Holds
        };
        self
    }

    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|x| x == f)
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }
}
