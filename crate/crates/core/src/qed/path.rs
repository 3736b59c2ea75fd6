use super::transitions::TransitionCandidate;
use crate::error::{Error, Result};
use crate::preshape_metrics::{d1, d2};
use crate::tree_model::{
    collapse, Attribute, CombinatorialTree, Embedder, Layout, MaximalTree, PreShape, TreeShape,
};

/// How stretch lengths are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMetric {
    /// Euclidean norm of the pre-shape difference (QED).
    L2,
    /// Sum of edge norms (TED).
    L1,
}

/// A linear stretch described without reference to a maximal tree: an
/// ordered joint tree carrying a start and an end attribute on every edge.
/// Edges that are absent at one end carry zeros there.
#[derive(Clone, Debug)]
pub struct JointStretch {
    pub topology: CombinatorialTree,
    pub start: Vec<Attribute>,
    pub end: Vec<Attribute>,
}

impl JointStretch {
    pub fn constant(s: &TreeShape) -> Self {
        JointStretch {
            topology: s.topology().clone(),
            start: s.attrs().to_vec(),
            end: s.attrs().to_vec(),
        }
    }

    pub fn reversed(&self) -> Self {
        JointStretch { topology: self.topology.clone(), start: self.end.clone(), end: self.start.clone() }
    }

    pub fn length(&self, metric: PathMetric) -> f64 {
        let it = self.start.iter().zip(&self.end);
        match metric {
            PathMetric::L2 => it.map(|(a, b)| a.dist_sq(b)).sum::<f64>().sqrt(),
            PathMetric::L1 => it.map(|(a, b)| a.dist(b)).sum(),
        }
    }
}

/// One Euclidean segment of a geodesic in the pre-shape space.
#[derive(Clone, Debug)]
pub struct Stretch {
    pub start: PreShape,
    pub end: PreShape,
}

/// The structural change between two consecutive stretches.
#[derive(Clone, Debug)]
pub struct Transition {
    /// Candidate that produced the crossing, when known.
    pub candidate: Option<TransitionCandidate>,
    /// The shape at which the stretches meet.
    pub shape: TreeShape,
}

/// A piecewise linear path between two shapes.
///
/// Stretches live on a common maximal tree large enough to hold every joint
/// tree. When that is deeper than the configured maximal tree the path is
/// flagged with `exceeds_capacity` instead of being cut down.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    layout: Layout,
    metric: PathMetric,
    joints: Vec<JointStretch>,
    stretches: Vec<Stretch>,
    transitions: Vec<Transition>,
    lengths: Vec<f64>,
    total_length: f64,
    maximal_tree: MaximalTree,
    exceeds_capacity: bool,
    truncated: bool,
}

/// One row of an edge correspondence derived from a path.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchRow {
    /// Source edge index, `None` for edges that appear.
    pub source: Option<usize>,
    /// Target edge index, `None` for edges that disappear.
    pub target: Option<usize>,
    pub cost: f64,
}

const ZERO_LENGTH: f64 = 1e-14;

impl GeodesicPath {
    /// Materializes the joint stretches on a maximal tree of depth at least
    /// `min_depth`. Zero-length stretches are dropped unless all are.
    pub fn from_joints(
        layout: Layout,
        joints: Vec<JointStretch>,
        transitions: Vec<Transition>,
        metric: PathMetric,
        min_depth: usize,
    ) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Parameter("a path needs at least one stretch".into()));
        }
        if transitions.len() + 1 != joints.len() {
            return Err(Error::Parameter("one transition between consecutive stretches".into()));
        }
        let (joints, transitions) = drop_empty(joints, transitions, metric);
        let required = joints
            .iter()
            .map(|j| Embedder::new(&j.topology).required_depth())
            .max()
            .unwrap_or(1);
        let depth = required.max(min_depth).max(1);
        let mt = MaximalTree::new(depth)?;
        let mut stretches = Vec::with_capacity(joints.len());
        for j in &joints {
            let map = Embedder::new(&j.topology).embed(mt).ok_or(Error::Capacity { depth })?;
            let mut start = PreShape::zeros(mt, layout);
            let mut end = PreShape::zeros(mt, layout);
            for (e, &h) in map.iter().enumerate() {
                start.set(h, j.start[e].clone());
                end.set(h, j.end[e].clone());
            }
            stretches.push(Stretch { start, end });
        }
        let lengths: Vec<f64> = stretches
            .iter()
            .map(|s| match metric {
                PathMetric::L2 => d2(&s.start, &s.end),
                PathMetric::L1 => d1(&s.start, &s.end),
            })
            .collect::<Result<_>>()?;
        let total_length = lengths.iter().sum();
        Ok(GeodesicPath {
            layout,
            metric,
            joints,
            stretches,
            transitions,
            lengths,
            total_length,
            maximal_tree: mt,
            exceeds_capacity: required > min_depth,
            truncated: false,
        })
    }

    /// The constant path at `s`.
    pub fn trivial(s: &TreeShape, metric: PathMetric, min_depth: usize) -> Result<Self> {
        Self::from_joints(s.layout(), vec![JointStretch::constant(s)], vec![], metric, min_depth)
    }

    pub(crate) fn mark_truncated(mut self, truncated: bool) -> Self {
        self.truncated |= truncated;
        self
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn metric(&self) -> PathMetric {
        self.metric
    }

    pub fn stretches(&self) -> &[Stretch] {
        &self.stretches
    }

    pub fn joints(&self) -> &[JointStretch] {
        &self.joints
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn stretch_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn maximal_tree(&self) -> MaximalTree {
        self.maximal_tree
    }

    /// The path needed a deeper maximal tree than requested.
    pub fn exceeds_capacity(&self) -> bool {
        self.exceeds_capacity
    }

    /// Some intermediate tree was cut down to fit a bounded maximal tree.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn source(&self) -> TreeShape {
        collapse(&self.stretches[0].start).to_shape()
    }

    pub fn target(&self) -> TreeShape {
        collapse(&self.stretches.last().unwrap().end).to_shape()
    }

    /// The path traversed backwards.
    pub fn reversed(&self) -> Result<Self> {
        let joints = self.joints.iter().rev().map(JointStretch::reversed).collect();
        let transitions = self
            .transitions
            .iter()
            .rev()
            .map(|t| Transition { candidate: t.candidate.as_ref().map(|c| c.reversed()), shape: t.shape.clone() })
            .collect();
        let p = Self::from_joints(self.layout, joints, transitions, self.metric, self.min_depth())?;
        Ok(p.mark_truncated(self.truncated))
    }

    /// `self` followed by `other`, meeting at `junction`.
    pub fn concat(&self, other: &GeodesicPath, junction: Transition) -> Result<Self> {
        if self.metric != other.metric {
            return Err(Error::Parameter("cannot join paths measured differently".into()));
        }
        let mut joints = self.joints.clone();
        joints.extend(other.joints.iter().cloned());
        let mut transitions = self.transitions.clone();
        transitions.push(junction);
        transitions.extend(other.transitions.iter().cloned());
        let depth = self.min_depth().max(other.min_depth());
        let p = Self::from_joints(self.layout, joints, transitions, self.metric, depth)?;
        Ok(p.mark_truncated(self.truncated || other.truncated))
    }

    fn min_depth(&self) -> usize {
        if self.exceeds_capacity {
            1
        } else {
            self.maximal_tree.depth()
        }
    }

    /// Pre-shape at arc-length fraction `t` together with its stretch index.
    pub fn preshape_at(&self, t: f64) -> Result<(usize, PreShape)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("path parameter {t} outside [0, 1]")));
        }
        let target = t * self.total_length;
        let mut acc = 0.0;
        let last = self.stretches.len() - 1;
        for (i, (s, &len)) in self.stretches.iter().zip(&self.lengths).enumerate() {
            if i == last || target <= acc + len {
                let local = if len > 0.0 { ((target - acc) / len).clamp(0.0, 1.0) } else { 1.0 };
                let local = if t == 1.0 && i == last { 1.0 } else { local };
                return Ok((i, s.start.lerp(&s.end, local)?));
            }
            acc += len;
        }
        unreachable!()
    }

    /// Shape at arc-length fraction `t`.
    pub fn point(&self, t: f64) -> Result<TreeShape> {
        Ok(collapse(&self.preshape_at(t)?.1).to_shape())
    }

    /// Arc-length fractions at which consecutive stretches meet.
    pub fn transition_fractions(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::new();
        for &l in &self.lengths[..self.lengths.len() - 1] {
            acc += l;
            out.push(if self.total_length > 0.0 { acc / self.total_length } else { 0.0 });
        }
        out
    }

    /// Edge correspondence obtained by following maximal-tree coordinates
    /// through each stretch and the collapsed isomorphism at each junction.
    pub fn edge_matching(&self) -> Vec<MatchRow> {
        let source = self.source();
        let target = self.target();
        let mut cur: Vec<Option<usize>> = (0..source.len()).map(Some).collect();
        for s in &self.stretches {
            let cs = collapse(&s.start);
            let ce = collapse(&s.end);
            for slot in cur.iter_mut() {
                *slot = slot.and_then(|j| {
                    let h = cs.source[j];
                    ce.source.iter().position(|&x| x == h)
                });
            }
        }
        let mut hit = vec![false; target.len()];
        let mut rows = Vec::new();
        for (e, c) in cur.iter().enumerate() {
            match *c {
                Some(f) => {
                    hit[f] = true;
                    rows.push(MatchRow { source: Some(e), target: Some(f), cost: source.attr(e).dist(target.attr(f)) });
                }
                None => rows.push(MatchRow { source: Some(e), target: None, cost: source.attr(e).norm() }),
            }
        }
        for (f, h) in hit.iter().enumerate() {
            if !h {
                rows.push(MatchRow { source: None, target: Some(f), cost: target.attr(f).norm() });
            }
        }
        rows
    }
}

fn drop_empty(
    joints: Vec<JointStretch>,
    transitions: Vec<Transition>,
    metric: PathMetric,
) -> (Vec<JointStretch>, Vec<Transition>) {
    let keep: Vec<bool> = joints.iter().map(|j| j.length(metric) > ZERO_LENGTH).collect();
    if !keep.iter().any(|&k| k) {
        return (vec![joints.into_iter().next().unwrap()], vec![]);
    }
    let kept_idx: Vec<usize> = (0..joints.len()).filter(|&i| keep[i]).collect();
    let mut out_t = Vec::new();
    for w in kept_idx.windows(2) {
        // the junction closest to the later stretch carries the structural change
        out_t.push(transitions[w[1] - 1].clone());
    }
    let out_j = kept_idx.iter().map(|&i| joints[i].clone()).collect();
    (out_j, out_t)
}

/// Free-function form of [`GeodesicPath::point`].
pub fn geodesic_point(p: &GeodesicPath, t: f64) -> Result<TreeShape> {
    p.point(t)
}

/// Free-function form of [`GeodesicPath::edge_matching`].
pub fn derive_edge_matching(p: &GeodesicPath) -> Vec<MatchRow> {
    p.edge_matching()
}
