//! Semi-labeling: named edges that must correspond across a pair of shapes.

use std::collections::BTreeSet;

use crate::tree_model::TreeShape;

/// Labels whose edges must be matched to the equally labeled edge of the
/// other shape. A label missing from either shape is ignored for that pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelConstraint {
    pub required: BTreeSet<String>,
}

impl LabelConstraint {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LabelConstraint { required: labels.into_iter().map(Into::into).collect() }
    }

    /// One label per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub(crate) fn rules(&self, s: &TreeShape, t: &TreeShape) -> LabelRules {
        let present = |x: &TreeShape| -> BTreeSet<String> {
            x.topology().labels().iter().flatten().cloned().collect()
        };
        let (ps, pt) = (present(s), present(t));
        LabelRules {
            active: self
                .required
                .iter()
                .filter(|l| ps.contains(*l) && pt.contains(*l))
                .cloned()
                .collect(),
        }
    }
}

/// Constraint specialized to one pair of shapes.
#[derive(Clone, Debug, Default)]
pub(crate) struct LabelRules {
    active: BTreeSet<String>,
}

impl LabelRules {
    pub fn from_option(c: Option<&LabelConstraint>, s: &TreeShape, t: &TreeShape) -> Self {
        c.map(|c| c.rules(s, t)).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    fn binding(&self, l: Option<&str>) -> bool {
        l.is_some_and(|l| self.active.contains(l))
    }

    pub fn can_match(&self, a: Option<&str>, b: Option<&str>) -> bool {
        a == b || !(self.binding(a) || self.binding(b))
    }

    pub fn can_drop(&self, a: Option<&str>) -> bool {
        !self.binding(a)
    }
}
