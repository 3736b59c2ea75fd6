//! Unordered shapes: distances minimized over sibling reorderings.

use rayon::prelude::*;

use crate::error::{Error, Result};
pub use crate::labels::LabelConstraint;
use crate::labels::LabelRules;
use crate::metric::{Metric, Witness};
use crate::tree_model::TreeShape;

/// Default cap on vertices with two or more children for a complete search.
pub const MAX_FREE_VERTICES: usize = 12;
/// Cap on the number of ordering pairs tried for one pair of shapes.
pub const MAX_ORDERINGS: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct UnorderedResult {
    pub distance: f64,
    /// Reordering of the source realizing the minimum.
    pub source: TreeShape,
    /// Reordering of the target realizing the minimum.
    pub target: TreeShape,
    pub witness: Witness,
}

fn free_vertices(s: &TreeShape) -> usize {
    s.vertex_degrees().iter().filter(|&&d| d >= 2).count()
}

fn ordering_count(s: &TreeShape) -> f64 {
    s.vertex_degrees().iter().map(|&d| (1..=d).map(|x| x as f64).product::<f64>()).product()
}

/// Order-invariant representative: the reordering with the smallest key.
pub fn canonical_ordering(s: &TreeShape) -> TreeShape {
    s.reorderings().into_iter().next().expect("identity reordering")
}

/// Active labels in preorder and postorder; ordered matchings preserve both.
fn label_signature(t: &TreeShape, rules: &LabelRules) -> (Vec<String>, Vec<String>) {
    let topo = t.topology();
    let pick = |e: usize| topo.label(e).filter(|l| !rules.can_drop(Some(l))).map(String::from);
    let pre: Vec<String> = (0..t.len()).filter_map(pick).collect();
    let mut post_order: Vec<usize> = (0..t.len()).collect();
    post_order.sort_by_key(|&e| (topo.subtree_end(e), std::cmp::Reverse(e)));
    let post = post_order.into_iter().filter_map(pick).collect();
    (pre, post)
}

/// `min_{g,h} d(g·s, h·t)` over sibling reorderings of both shapes. Ordered
/// tree metrics are not invariant under a joint reordering, so fixing one
/// side would overestimate. The arguments are put in canonical orientation
/// first, which makes the result exactly symmetric. With a constraint,
/// pairs whose active labels cannot line up are skipped.
pub fn unordered_distance(
    s: &TreeShape,
    t: &TreeShape,
    metric: &Metric,
    constraint: Option<&LabelConstraint>,
) -> Result<UnorderedResult> {
    s.layout().check_same(&t.layout())?;
    let limit = if constraint.is_some() { 2 * MAX_FREE_VERTICES } else { MAX_FREE_VERTICES };
    for x in [s, t] {
        let free = free_vertices(x);
        if free > limit {
            return Err(Error::ComplexityGuard(format!(
                "{free} branching vertices exceed the complete-search budget of {limit}"
            )));
        }
    }
    let pairs = ordering_count(s) * ordering_count(t);
    if pairs > MAX_ORDERINGS as f64 {
        return Err(Error::ComplexityGuard(format!(
            "{pairs:.0} ordering pairs exceed the complete-search budget of {MAX_ORDERINGS}"
        )));
    }
    let (cs, ct) = (canonical_ordering(s), canonical_ordering(t));
    let swapped = (ct.key(), ct.topology().labels()) < (cs.key(), cs.topology().labels());
    let (first, second) = if swapped { (&ct, &cs) } else { (&cs, &ct) };
    let rules = LabelRules::from_option(constraint, first, second);
    let (left, right) = (first.reorderings(), second.reorderings());
    let candidates: Vec<(usize, usize)> = if rules.is_empty() {
        (0..left.len()).flat_map(|i| (0..right.len()).map(move |j| (i, j))).collect()
    } else {
        let ls: Vec<_> = left.iter().map(|g| label_signature(g, &rules)).collect();
        let rs: Vec<_> = right.iter().map(|h| label_signature(h, &rules)).collect();
        (0..left.len()).flat_map(|i| (0..right.len()).map(move |j| (i, j))).filter(|&(i, j)| ls[i] == rs[j]).collect()
    };
    let scored: Vec<(f64, usize)> = candidates
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let d = match metric.distance(&left[i], &right[j], constraint) {
                Ok(d) => d,
                Err(Error::NotApplicable(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok((d, k))
        })
        .collect::<Result<_>>()?;
    // reorderings are sorted by key, so the index breaks ties canonically
    let best = scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .filter(|b| b.0.is_finite())
        .ok_or_else(|| Error::NotApplicable("no ordering satisfies the label constraint".into()))?;
    let (i, j) = candidates[best.1];
    let (g, h) = (left[i].clone(), right[j].clone());
    let (source, target) = if swapped { (h, g) } else { (g, h) };
    let (distance, witness) = metric.witness(&source, &target, constraint)?;
    Ok(UnorderedResult { distance, source, target, witness })
}
