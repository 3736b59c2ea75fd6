//! Metric selection shared by the unordered search, statistics and the CLI.

use crate::error::Result;
use crate::labels::LabelConstraint;
use crate::qed::{qed_approx, qed_distance, GeodesicPath, QedConfig};
use crate::ted::{ted_edit_script_constrained, ted_ordered, ted_path, EditScript};
use crate::tree_model::{TreeShape, DEFAULT_DEPTH};
use crate::unordered::unordered_distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ted,
    Qed(QedConfig),
}

/// What realizes a distance.
#[derive(Clone, Debug)]
pub enum Witness {
    Script(EditScript),
    Path(GeodesicPath),
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Ted => "ted",
            Metric::Qed(_) => "qed",
        }
    }

    fn depth(&self) -> usize {
        match self {
            Metric::Ted => DEFAULT_DEPTH,
            Metric::Qed(c) => c.capacity.unwrap_or(c.depth),
        }
    }

    /// Ordered distance.
    pub fn distance(&self, s: &TreeShape, t: &TreeShape, labels: Option<&LabelConstraint>) -> Result<f64> {
        match self {
            Metric::Ted => ted_ordered(s, t, labels),
            Metric::Qed(cfg) => qed_distance(s, t, cfg, labels),
        }
    }

    /// Ordered distance with its edit script (TED) or path (QED).
    pub fn witness(&self, s: &TreeShape, t: &TreeShape, labels: Option<&LabelConstraint>) -> Result<(f64, Witness)> {
        match self {
            Metric::Ted => {
                let script = ted_edit_script_constrained(s, t, labels)?;
                Ok((script.cost, Witness::Script(script)))
            }
            Metric::Qed(cfg) => {
                let (d, p) = qed_approx(s, t, cfg, labels)?;
                Ok((d, Witness::Path(p)))
            }
        }
    }

    /// Ordered distance with a geodesic; TED uses its canonical edit path.
    pub fn path(&self, s: &TreeShape, t: &TreeShape, labels: Option<&LabelConstraint>) -> Result<(f64, GeodesicPath)> {
        match self.witness(s, t, labels)? {
            (d, Witness::Path(p)) => Ok((d, p)),
            (d, Witness::Script(script)) => Ok((d, ted_path(s, &script, self.depth())?)),
        }
    }
}

/// Distance under `metric`, minimized over sibling orderings unless `ordered`.
pub fn distance(
    metric: &Metric,
    s: &TreeShape,
    t: &TreeShape,
    ordered: bool,
    labels: Option<&LabelConstraint>,
) -> Result<f64> {
    if ordered {
        metric.distance(s, t, labels)
    } else {
        Ok(unordered_distance(s, t, metric, labels)?.distance)
    }
}

/// A geodesic with the endpoint orderings it connects.
#[derive(Clone, Debug)]
pub struct Geodesic {
    pub distance: f64,
    pub path: GeodesicPath,
    /// The source, reordered in the unordered case; edge ids are kept.
    pub source: TreeShape,
    pub target: TreeShape,
}

/// Geodesic from `s` to `t`. In the unordered case the path runs between
/// the optimal orderings of both shapes.
pub fn geodesic(
    metric: &Metric,
    s: &TreeShape,
    t: &TreeShape,
    ordered: bool,
    labels: Option<&LabelConstraint>,
) -> Result<Geodesic> {
    let (source, target) = if ordered {
        (s.clone(), t.clone())
    } else {
        let r = unordered_distance(s, t, metric, labels)?;
        (r.source, r.target)
    };
    let (distance, path) = metric.path(&source, &target, labels)?;
    Ok(Geodesic { distance, path, source, target })
}
