//! Approximate quotient Euclidean distance (QED) with explicit geodesics.
//!
//! `d_1` is the best single Euclidean stretch, `d_2` additionally considers
//! every two-stretch path through a common contraction with bounded vertex
//! degree, and `d_K` for `K > 2` splits the path at intermediate trees seeded
//! from the two-stretch optima.

mod alignment;
mod path;
mod transitions;

pub use alignment::{single_stretch, Alignment, JointNode};
pub use path::{derive_edge_matching, geodesic_point, GeodesicPath, JointStretch, MatchRow, PathMetric, Stretch, Transition};
pub use transitions::{
    enumerate_transitions, solve_two_stretch, two_stretch_distance, EdgeClass, TaggedTree, Token,
    TransitionCandidate, TwoStretchOptimum,
};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::labels::{LabelConstraint, LabelRules};
use crate::tree_model::{TreeShape, DEFAULT_DEPTH};
use alignment::align;
use transitions::{realize, score_all};

/// Search bounds for [`qed_approx`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QedConfig {
    /// Maximum number of Euclidean stretches.
    pub k: usize,
    /// Maximum vertex degree of the common contraction at a transition.
    pub degree: usize,
    /// `Some(L)` confines every stretch to the maximal tree of depth `L`,
    /// truncating pendant subtrees of intermediate trees that do not fit.
    /// `None` grows the maximal tree as needed and flags the path.
    pub capacity: Option<usize>,
    /// Maximal tree depth used to materialize paths.
    pub depth: usize,
    /// How many two-stretch optima seed the intermediate trees for `k > 2`.
    /// `None` uses every candidate.
    pub seed_limit: Option<usize>,
}

impl Default for QedConfig {
    fn default() -> Self {
        QedConfig { k: 2, degree: 3, capacity: None, depth: DEFAULT_DEPTH, seed_limit: Some(16) }
    }
}

impl QedConfig {
    pub fn new(k: usize, degree: usize) -> Self {
        QedConfig { k, degree, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Parameter("K must be at least 1".into()));
        }
        if self.degree < 3 {
            return Err(Error::Parameter("D must be at least 3".into()));
        }
        if self.capacity == Some(0) || self.depth == 0 {
            return Err(Error::Parameter("maximal tree depth must be positive".into()));
        }
        Ok(())
    }

    fn min_depth(&self) -> usize {
        self.capacity.unwrap_or(self.depth)
    }
}

#[derive(Clone, Debug)]
enum How {
    Same,
    Single,
    Two((u64, u64)),
    /// Split at `w`: `left` stretches to `w`, then `right` to the target.
    Via { w: TreeShape, masks: (u64, u64), left: usize, right: usize },
}

type CacheKey = (Vec<i64>, Vec<Option<String>>, Vec<i64>, Vec<Option<String>>, usize);

struct Solver<'a> {
    cfg: QedConfig,
    labels: Option<&'a LabelConstraint>,
    cache: HashMap<CacheKey, (f64, How)>,
}

fn cache_key(a: &TreeShape, b: &TreeShape, k: usize) -> CacheKey {
    (
        a.key().to_vec(),
        a.topology().labels().to_vec(),
        b.key().to_vec(),
        b.topology().labels().to_vec(),
        k,
    )
}

fn ordered_pair<'x>(a: &'x TreeShape, b: &'x TreeShape) -> (&'x TreeShape, &'x TreeShape, bool) {
    let swap = (b.key(), b.topology().labels()) < (a.key(), a.topology().labels());
    if swap {
        (b, a, true)
    } else {
        (a, b, false)
    }
}

impl<'a> Solver<'a> {
    fn rules(&self, a: &TreeShape, b: &TreeShape) -> LabelRules {
        LabelRules::from_option(self.labels, a, b)
    }

    /// `d_k(a, b)` with `a`, `b` in canonical order.
    fn dist(&mut self, a: &TreeShape, b: &TreeShape, k: usize) -> Result<f64> {
        let (a, b, _) = ordered_pair(a, b);
        let ck = cache_key(a, b, k);
        if let Some((v, _)) = self.cache.get(&ck) {
            return Ok(*v);
        }
        let best = self.solve(a, b, k)?;
        let v = best.0;
        self.cache.insert(ck, best);
        Ok(v)
    }

    fn solve(&mut self, a: &TreeShape, b: &TreeShape, k: usize) -> Result<(f64, How)> {
        if a == b && a.topology().labels() == b.topology().labels() {
            return Ok((0.0, How::Same));
        }
        if k == 1 {
            let al = align(a, b, &self.rules(a, b), self.cfg.capacity);
            return Ok((al.length(), How::Single));
        }
        self.dist(a, b, k - 1)?;
        let mut best = self.cache[&cache_key(a, b, k - 1)].clone();
        let rules = self.rules(a, b);
        let scored = score_all(a, b, self.cfg.degree, &rules)?;
        if k == 2 {
            for sc in &scored {
                let value = if self.cfg.capacity.is_some() {
                    let (cand, _) = realize(a, b, sc.masks, self.cfg.capacity);
                    let (dsq, x, y) = cand.pieces(a, b);
                    solve_two_stretch(dsq.sqrt(), x.sqrt(), y.sqrt()).value
                } else {
                    sc.value
                };
                if value < best.0 {
                    best = (value, How::Two(sc.masks));
                }
            }
            return Ok(best);
        }
        // intermediate trees from the two-stretch optima that really cross
        let mut seeds: Vec<(TreeShape, (u64, u64))> = Vec::new();
        for sc in scored.iter().filter(|sc| sc.a > 0.0 && sc.b > 0.0) {
            if self.cfg.seed_limit.is_some_and(|n| seeds.len() >= n) {
                break;
            }
            let (cand, _) = realize(a, b, sc.masks, self.cfg.capacity);
            let (dsq, x, y) = cand.pieces(a, b);
            let opt = solve_two_stretch(dsq.sqrt(), x.sqrt(), y.sqrt());
            let w = cand.intermediate(a, b, opt.tau)?;
            if w != *a && w != *b && !seeds.iter().any(|(v, _)| *v == w) {
                seeds.push((w, sc.masks));
            }
        }
        for (w, masks) in seeds {
            for (left, right) in [(1, k - 1), (k - 1, 1)] {
                let lv = self.dist(a, &w, left)?;
                if !(lv < best.0) {
                    continue;
                }
                let value = lv + self.dist(&w, b, right)?;
                if value < best.0 {
                    best = (value, How::Via { w: w.clone(), masks, left, right });
                }
            }
        }
        Ok(best)
    }

    fn path(&mut self, a: &TreeShape, b: &TreeShape, k: usize) -> Result<GeodesicPath> {
        let (x, y, swapped) = ordered_pair(a, b);
        self.dist(x, y, k)?;
        let how = self.cache[&cache_key(x, y, k)].1.clone();
        let p = self.build(x, y, &how)?;
        if swapped {
            p.reversed()
        } else {
            Ok(p)
        }
    }

    fn build(&mut self, a: &TreeShape, b: &TreeShape, how: &How) -> Result<GeodesicPath> {
        let depth = self.cfg.min_depth();
        match how {
            How::Same => GeodesicPath::trivial(a, PathMetric::L2, depth),
            How::Single => {
                let al = align(a, b, &self.rules(a, b), self.cfg.capacity);
                if !al.cost_sq.is_finite() {
                    return Err(Error::NotApplicable("no admissible path under the label constraint".into()));
                }
                GeodesicPath::from_joints(a.layout(), vec![al.joint(a, b)], vec![], PathMetric::L2, depth)
            }
            How::Two(masks) => {
                let (cand, truncated) = realize(a, b, *masks, self.cfg.capacity);
                Ok(two_stretch_distance(a, b, &cand, depth)?.1.mark_truncated(truncated))
            }
            How::Via { w, masks, left, right } => {
                let first = self.path(a, w, *left)?;
                let second = self.path(w, b, *right)?;
                let (cand, _) = realize(a, b, *masks, self.cfg.capacity);
                first.concat(&second, Transition { candidate: Some(cand), shape: w.clone() })
            }
        }
    }
}

/// Approximate QED between `s` and `t` with at most `cfg.k` Euclidean
/// stretches, together with a path realizing the value.
///
/// With a label constraint, edges carrying an active label can be matched
/// only to the equally labeled edge and never shrink away.
pub fn qed_approx(
    s: &TreeShape,
    t: &TreeShape,
    cfg: &QedConfig,
    labels: Option<&LabelConstraint>,
) -> Result<(f64, GeodesicPath)> {
    cfg.validate()?;
    s.layout().check_same(&t.layout())?;
    let mut solver = Solver { cfg: *cfg, labels, cache: HashMap::new() };
    let value = solver.dist(s, t, cfg.k)?;
    if !value.is_finite() {
        return Err(Error::NotApplicable("no admissible path under the label constraint".into()));
    }
    let path = solver.path(s, t, cfg.k)?;
    Ok((value, path))
}

/// Distance only; skips path materialization.
pub fn qed_distance(s: &TreeShape, t: &TreeShape, cfg: &QedConfig, labels: Option<&LabelConstraint>) -> Result<f64> {
    cfg.validate()?;
    s.layout().check_same(&t.layout())?;
    let mut solver = Solver { cfg: *cfg, labels, cache: HashMap::new() };
    let value = solver.dist(s, t, cfg.k)?;
    if !value.is_finite() {
        return Err(Error::NotApplicable("no admissible path under the label constraint".into()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::Layout;

    fn s(text: &str) -> TreeShape {
        TreeShape::from_bracket(Layout::scalar(), text).unwrap()
    }

    #[test]
    fn identity_is_trivial() {
        let a = s("1[2,3]");
        let (d, p) = qed_approx(&a, &a, &QedConfig::new(3, 3), None).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p.total_length(), 0.0);
    }

    #[test]
    fn flat_region_is_euclidean() {
        let (d, p) = qed_approx(&s("1[2,3]"), &s("1[2,5]"), &QedConfig::default(), None).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(p.stretches().len(), 1);
    }

    #[test]
    fn structural_identification() {
        let (a, b) = (s("1[0.2[1,3],1]"), s("1[1,0.2[3,1]]"));
        let (d, p) = qed_approx(&a, &b, &QedConfig::default(), None).unwrap();
        assert!((d - 0.4).abs() < 1e-12);
        assert!((p.total_length() - d).abs() < 1e-10);
        assert_eq!(p.source(), a);
        assert_eq!(p.target(), b);
        let (r, _) = qed_approx(&b, &a, &QedConfig::default(), None).unwrap();
        assert_eq!(d, r);
    }

    #[test]
    fn non_increasing_in_k() {
        let (a, b) = (s("1[0.5[1,3],2[1,1]]"), s("1[2[1,0.7[3,1]],0.4]"));
        let mut last = f64::INFINITY;
        for k in 1..=3 {
            let cfg = QedConfig { seed_limit: None, ..QedConfig::new(k, 3) };
            let (d, p) = qed_approx(&a, &b, &cfg, None).unwrap();
            assert!(d <= last + 1e-12);
            assert!((p.total_length() - d).abs() < 1e-9, "{} {}", p.total_length(), d);
            last = d;
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = s("1");
        assert!(qed_approx(&a, &a, &QedConfig::new(0, 3), None).is_err());
        assert!(qed_approx(&a, &a, &QedConfig::new(2, 2), None).is_err());
    }

    #[test]
    fn labels_forbid_shrinking() {
        let a = s("1[2,3]").with_labels(vec![Some("root".into()), None, None]);
        let b = s("0.1[2,3]").with_labels(vec![Some("root".into()), None, None]);
        let c = LabelConstraint::new(["root"]);
        let (d, _) = qed_approx(&a, &b, &QedConfig::default(), Some(&c)).unwrap();
        assert!((d - 0.9).abs() < 1e-12);
    }
}
