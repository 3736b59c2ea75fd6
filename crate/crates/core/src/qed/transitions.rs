//! Two-stretch paths through a common contraction.
//!
//! A candidate picks edge subsets `Y_s` of the source and `Y_t` of the target
//! whose contractions are the same ordered tree `ȳ`. Every other edge is
//! internal when it has a `Y` edge below it and external otherwise. Internal
//! edges shrink to zero in their own stretch; external edges persist into the
//! intermediate tree `w` and deform along the whole path. `w` consists of the
//! shared edges plus the external edges of both sides, ordered so that within
//! each gap between consecutive shared edges the source's externals come
//! first.
//!
//! All constructions go through balanced-parenthesis words: contracting a set
//! of edges is deleting their symbols, and the joint trees of both stretches
//! are obtained by splicing the other side's external blocks into each gap.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::path::{GeodesicPath, JointStretch, PathMetric, Transition};
use crate::error::{Error, Result};
use crate::labels::LabelRules;
use crate::tree_model::{Attribute, CombinatorialTree, Embedder, Paren, TreeShape};

/// Role of an endpoint edge in a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    /// Survives in the common contraction as edge `k` of `ȳ`.
    Shared(usize),
    /// Has no shared edge below it; persists into the intermediate tree.
    External,
    /// Has a shared edge below it; shrinks within its own stretch.
    Internal,
    /// External edge dropped so that the stretches fit a bounded maximal tree.
    Truncated,
}

/// Edge of a joint or intermediate tree, by origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Source(usize),
    Target(usize),
    Shared(usize),
}

impl Token {
    fn encode(self) -> usize {
        match self {
            Token::Source(e) => 3 * e,
            Token::Target(f) => 3 * f + 1,
            Token::Shared(k) => 3 * k + 2,
        }
    }

    fn decode(x: usize) -> Self {
        match x % 3 {
            0 => Token::Source(x / 3),
            1 => Token::Target(x / 3),
            _ => Token::Shared(x / 3),
        }
    }
}

/// A tree whose edges are tagged by origin.
#[derive(Clone, Debug)]
pub struct TaggedTree {
    pub topology: CombinatorialTree,
    pub tokens: Vec<Token>,
}

impl TaggedTree {
    fn from_word(word: &[(bool, Token)]) -> Self {
        let w: Vec<Paren> = word
            .iter()
            .map(|&(open, t)| if open { Paren::Open(t.encode()) } else { Paren::Close(t.encode()) })
            .collect();
        let (topology, toks) = CombinatorialTree::from_word(&w).expect("spliced words stay balanced");
        TaggedTree { topology, tokens: toks.into_iter().map(Token::decode).collect() }
    }
}

/// One way of crossing between the source and target topologies.
#[derive(Clone, Debug)]
pub struct TransitionCandidate {
    /// The common contraction `ȳ`.
    pub common_collapsed: CombinatorialTree,
    /// Topology of the intermediate tree `w` (shared plus external edges).
    pub grown: TaggedTree,
    pub source_classes: Vec<EdgeClass>,
    pub target_classes: Vec<EdgeClass>,
    /// `(source edge, target edge)` for each edge of `ȳ`.
    pub shared: Vec<(usize, usize)>,
    /// Joint tree of the first stretch (source plus target externals).
    pub first: TaggedTree,
    /// Joint tree of the second stretch (target plus source externals).
    pub second: TaggedTree,
    pub(crate) masks: (u64, u64),
}

fn mask_vec(mask: u64, m: usize) -> Vec<bool> {
    (0..m).map(|e| mask >> e & 1 == 1).collect()
}

/// Non-shared edges with a shared descendant.
fn internal_flags(t: &CombinatorialTree, keep: &[bool]) -> Vec<bool> {
    let m = t.len();
    let mut prefix = vec![0usize; m + 1];
    for e in 0..m {
        prefix[e + 1] = prefix[e] + keep[e] as usize;
    }
    (0..m).map(|e| !keep[e] && prefix[t.subtree_end(e)] > prefix[e + 1]).collect()
}

fn classify(t: &CombinatorialTree, keep: &[bool], kept: &[usize], truncated: &[bool]) -> Vec<EdgeClass> {
    let internal = internal_flags(t, keep);
    let mut out = vec![EdgeClass::External; t.len()];
    for (k, &e) in kept.iter().enumerate() {
        out[e] = EdgeClass::Shared(k);
    }
    for e in 0..t.len() {
        if internal[e] {
            out[e] = EdgeClass::Internal;
        } else if !keep[e] && truncated[e] {
            out[e] = EdgeClass::Truncated;
        }
    }
    out
}

/// Word of `t` with shared edges renamed, split into gaps at shared symbols.
fn gapped_word(
    t: &CombinatorialTree,
    classes: &[EdgeClass],
    own: fn(usize) -> Token,
) -> (Vec<(bool, Token)>, Vec<Vec<(bool, Token)>>) {
    let mut word = Vec::with_capacity(2 * t.len());
    let mut gaps = vec![Vec::new()];
    for p in t.word() {
        let (open, e) = match p {
            Paren::Open(e) => (true, e),
            Paren::Close(e) => (false, e),
        };
        match classes[e] {
            EdgeClass::Shared(k) => {
                word.push((open, Token::Shared(k)));
                gaps.push(Vec::new());
            }
            EdgeClass::External => {
                word.push((open, own(e)));
                gaps.last_mut().unwrap().push((open, own(e)));
            }
            _ => word.push((open, own(e))),
        }
    }
    (word, gaps)
}

impl TransitionCandidate {
    pub(crate) fn build(
        s: &CombinatorialTree,
        t: &CombinatorialTree,
        masks: (u64, u64),
        trunc_s: &[bool],
        trunc_t: &[bool],
    ) -> Self {
        let (ks, kt) = (mask_vec(masks.0, s.len()), mask_vec(masks.1, t.len()));
        let (ybar, ys) = s.contract(&ks);
        let (ybar_t, yt) = t.contract(&kt);
        debug_assert!(ybar.same_shape(&ybar_t));
        let source_classes = classify(s, &ks, &ys, trunc_s);
        let target_classes = classify(t, &kt, &yt, trunc_t);
        let (ws, gs) = gapped_word(s, &source_classes, Token::Source);
        let (wt, gt) = gapped_word(t, &target_classes, Token::Target);

        let mut w = Vec::new();
        let mut u1 = Vec::new();
        let mut u2 = Vec::new();
        let mut g = 0;
        for &sym in &ws {
            if let Token::Shared(_) = sym.1 {
                w.extend_from_slice(&gs[g]);
                w.extend_from_slice(&gt[g]);
                w.push(sym);
                u1.extend_from_slice(&gt[g]);
                g += 1;
            }
            u1.push(sym);
        }
        w.extend_from_slice(&gs[g]);
        w.extend_from_slice(&gt[g]);
        u1.extend_from_slice(&gt[g]);
        let mut g = 0;
        u2.extend_from_slice(&gs[0]);
        for &sym in &wt {
            u2.push(sym);
            if let Token::Shared(_) = sym.1 {
                g += 1;
                u2.extend_from_slice(&gs[g]);
            }
        }
        TransitionCandidate {
            common_collapsed: ybar,
            grown: TaggedTree::from_word(&w),
            source_classes,
            target_classes,
            shared: ys.into_iter().zip(yt).collect(),
            first: TaggedTree::from_word(&u1),
            second: TaggedTree::from_word(&u2),
            masks,
        }
    }

    /// The same crossing seen from the target side.
    pub fn reversed(&self) -> Self {
        let swap = |tt: &TaggedTree| TaggedTree {
            topology: tt.topology.clone(),
            tokens: tt
                .tokens
                .iter()
                .map(|t| match *t {
                    Token::Source(e) => Token::Target(e),
                    Token::Target(f) => Token::Source(f),
                    k => k,
                })
                .collect(),
        };
        TransitionCandidate {
            common_collapsed: self.common_collapsed.clone(),
            grown: swap(&self.grown),
            source_classes: self.target_classes.clone(),
            target_classes: self.source_classes.clone(),
            shared: self.shared.iter().map(|&(a, b)| (b, a)).collect(),
            first: swap(&self.second),
            second: swap(&self.first),
            masks: (self.masks.1, self.masks.0),
        }
    }

    /// Squared shared-edge gap `‖P − Q‖²` and the internal masses `A`, `B`.
    pub fn pieces(&self, s: &TreeShape, t: &TreeShape) -> (f64, f64, f64) {
        let mut dsq: f64 = self.shared.iter().map(|&(e, f)| s.attr(e).dist_sq(t.attr(f))).sum();
        let (mut a, mut b) = (0.0, 0.0);
        for (e, c) in self.source_classes.iter().enumerate() {
            match c {
                EdgeClass::External => dsq += s.attr(e).norm_sq(),
                EdgeClass::Internal | EdgeClass::Truncated => a += s.attr(e).norm_sq(),
                EdgeClass::Shared(_) => {}
            }
        }
        for (f, c) in self.target_classes.iter().enumerate() {
            match c {
                EdgeClass::External => dsq += t.attr(f).norm_sq(),
                EdgeClass::Internal | EdgeClass::Truncated => b += t.attr(f).norm_sq(),
                EdgeClass::Shared(_) => {}
            }
        }
        (dsq, a, b)
    }

    fn endpoint_values(&self, s: &TreeShape, t: &TreeShape, tok: Token) -> (Attribute, Attribute) {
        let zero = Attribute::zeros(s.layout());
        match tok {
            Token::Shared(k) => {
                let (e, f) = self.shared[k];
                (s.attr(e).clone(), t.attr(f).clone())
            }
            Token::Source(e) => (s.attr(e).clone(), zero),
            Token::Target(f) => (zero, t.attr(f).clone()),
        }
    }

    /// Intermediate attribute on `w` for parameter `tau`.
    fn z(&self, s: &TreeShape, t: &TreeShape, tok: Token, tau: f64) -> Attribute {
        let (p, q) = self.endpoint_values(s, t, tok);
        p.lerp(&q, tau)
    }

    /// The intermediate shape `w` at parameter `tau`, carrying labels.
    pub fn intermediate(&self, s: &TreeShape, t: &TreeShape, tau: f64) -> Result<TreeShape> {
        let attrs = self.grown.tokens.iter().map(|&k| self.z(s, t, k, tau)).collect();
        let labels = self
            .grown
            .tokens
            .iter()
            .map(|&k| match k {
                Token::Shared(i) => s.topology().label(self.shared[i].0).map(String::from),
                Token::Source(e) => s.topology().label(e).map(String::from),
                Token::Target(f) => t.topology().label(f).map(String::from),
            })
            .collect();
        let topo = self.grown.topology.clone().with_labels(labels);
        TreeShape::from_parts_collapsing(s.layout(), topo, attrs, None)
    }

    /// Joint stretches of the two-stretch path through `w` at parameter `tau`.
    pub fn joints(&self, s: &TreeShape, t: &TreeShape, tau: f64) -> (JointStretch, JointStretch) {
        let zero = Attribute::zeros(s.layout());
        let first = {
            let (mut start, mut end) = (Vec::new(), Vec::new());
            for &tok in &self.first.tokens {
                let (p, _) = self.endpoint_values(s, t, tok);
                start.push(p);
                end.push(match tok {
                    Token::Source(e) if self.source_classes[e] != EdgeClass::External => zero.clone(),
                    _ => self.z(s, t, tok, tau),
                });
            }
            JointStretch { topology: self.first.topology.clone(), start, end }
        };
        let second = {
            let (mut start, mut end) = (Vec::new(), Vec::new());
            for &tok in &self.second.tokens {
                let (_, q) = self.endpoint_values(s, t, tok);
                start.push(match tok {
                    Token::Target(f) if self.target_classes[f] != EdgeClass::External => zero.clone(),
                    _ => self.z(s, t, tok, tau),
                });
                end.push(q);
            }
            JointStretch { topology: self.second.topology.clone(), start, end }
        };
        (first, second)
    }

    /// Whether both joint trees fit a maximal tree of depth `depth`.
    pub fn fits(&self, depth: usize) -> bool {
        Embedder::new(&self.first.topology).fits(depth) && Embedder::new(&self.second.topology).fits(depth)
    }
}

/// Optimum of `sqrt(A + ‖P − z‖²) + sqrt(B + ‖Q − z‖²)` over `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStretchOptimum {
    /// The optimal `z` is `P + tau (Q − P)`.
    pub tau: f64,
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// Closed-form inner solve. With `D = ‖P − Q‖`, `a = √A` and `b = √B` the
/// optimum lies on the segment at `tau = a / (a + b)`, where the two
/// stretches are proportional to `a` and `b`, and the value is
/// `sqrt(D² + (a + b)²)`: the straight line after unfolding both
/// collapse directions into one.
pub fn solve_two_stretch(dist_pq: f64, a: f64, b: f64) -> TwoStretchOptimum {
    let sum = a + b;
    let value = (dist_pq * dist_pq + sum * sum).sqrt();
    if sum == 0.0 {
        return TwoStretchOptimum { tau: 0.0, value, first: 0.0, second: value };
    }
    let tau = a / sum;
    TwoStretchOptimum { tau, value, first: value * tau, second: value * (1.0 - tau) }
}

/// Value and path of the best two-stretch path through `cand`.
pub fn two_stretch_distance(
    s: &TreeShape,
    t: &TreeShape,
    cand: &TransitionCandidate,
    min_depth: usize,
) -> Result<(f64, GeodesicPath)> {
    let (dsq, a, b) = cand.pieces(s, t);
    let opt = solve_two_stretch(dsq.sqrt(), a.sqrt(), b.sqrt());
    let (j1, j2) = cand.joints(s, t, opt.tau);
    let w = cand.intermediate(s, t, opt.tau)?;
    let path = GeodesicPath::from_joints(
        s.layout(),
        vec![j1, j2],
        vec![Transition { candidate: Some(cand.clone()), shape: w }],
        PathMetric::L2,
        min_depth,
    )?;
    Ok((opt.value, path))
}

pub(crate) const MAX_ENUM_EDGES: usize = 22;

/// Per-side data for every admissible shared subset, grouped by the
/// topology of the contraction.
pub(crate) struct SideTable {
    pub groups: BTreeMap<Vec<u32>, Vec<u64>>,
}

impl SideTable {
    pub fn new(t: &TreeShape, degree: usize, required: &[bool]) -> Result<Self> {
        let m = t.len();
        if m > MAX_ENUM_EDGES {
            return Err(Error::ComplexityGuard(format!(
                "{m} edges exceed the {MAX_ENUM_EDGES}-edge limit for transition enumeration"
            )));
        }
        let req: u64 = (0..m).filter(|&e| required[e]).fold(0, |acc, e| acc | 1 << e);
        let masks: Vec<u64> = (0..1u64 << m).filter(|mask| mask & req == req).collect();
        let keyed: Vec<(Vec<u32>, u64)> = masks
            .par_iter()
            .filter_map(|&mask| {
                let (c, _) = t.topology().contract(&mask_vec(mask, m));
                (c.max_children() <= degree).then(|| (c.shape_key(), mask))
            })
            .collect();
        let mut groups: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
        for (k, mask) in keyed {
            groups.entry(k).or_default().push(mask);
        }
        Ok(SideTable { groups })
    }
}

/// Masses of the external and internal parts for one side and mask.
fn side_masses(t: &TreeShape, mask: u64) -> (f64, f64) {
    let keep = mask_vec(mask, t.len());
    let internal = internal_flags(t.topology(), &keep);
    let (mut ext, mut int) = (0.0, 0.0);
    for e in 0..t.len() {
        if keep[e] {
            continue;
        }
        if internal[e] {
            int += t.attr(e).norm_sq();
        } else {
            ext += t.attr(e).norm_sq();
        }
    }
    (ext, int)
}

fn kept(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&e| mask >> e & 1 == 1).collect()
}

/// A scored pair of masks.
#[derive(Clone, Debug)]
pub(crate) struct Scored {
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub key: Vec<u32>,
    pub masks: (u64, u64),
}

impl Scored {
    fn rank(&self, other: &Scored) -> std::cmp::Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| self.key.cmp(&other.key))
            .then_with(|| self.masks.cmp(&other.masks))
    }
}

/// Scores every admissible mask pair with the closed-form value.
pub(crate) fn score_all(
    s: &TreeShape,
    t: &TreeShape,
    degree: usize,
    rules: &LabelRules,
) -> Result<Vec<Scored>> {
    let req_s: Vec<bool> = (0..s.len()).map(|e| !rules.can_drop(s.topology().label(e))).collect();
    let req_t: Vec<bool> = (0..t.len()).map(|f| !rules.can_drop(t.topology().label(f))).collect();
    let ss = SideTable::new(s, degree, &req_s)?;
    let ts = SideTable::new(t, degree, &req_t)?;
    let mut jobs = Vec::new();
    for (key, ms) in &ss.groups {
        if let Some(mt) = ts.groups.get(key) {
            jobs.push((key, ms, mt));
        }
    }
    let scored: Vec<Vec<Scored>> = jobs
        .par_iter()
        .map(|&(key, ms, mt)| {
            let sm: Vec<(Vec<usize>, f64, f64)> = ms
                .iter()
                .map(|&m| {
                    let (ext, int) = side_masses(s, m);
                    (kept(m, s.len()), ext, int)
                })
                .collect();
            let tm: Vec<(Vec<usize>, f64, f64)> = mt
                .iter()
                .map(|&m| {
                    let (ext, int) = side_masses(t, m);
                    (kept(m, t.len()), ext, int)
                })
                .collect();
            let mut out = Vec::new();
            for (i, (ys, ext_s, int_s)) in sm.iter().enumerate() {
                for (j, (yt, ext_t, int_t)) in tm.iter().enumerate() {
                    let ok = ys.iter().zip(yt).all(|(&e, &f)| {
                        rules.can_match(s.topology().label(e), t.topology().label(f))
                    });
                    if !ok {
                        continue;
                    }
                    let dsq: f64 = ys.iter().zip(yt).map(|(&e, &f)| s.attr(e).dist_sq(t.attr(f))).sum::<f64>()
                        + ext_s
                        + ext_t;
                    let opt = solve_two_stretch(dsq.sqrt(), int_s.sqrt(), int_t.sqrt());
                    out.push(Scored {
                        value: opt.value,
                        a: *int_s,
                        b: *int_t,
                        key: key.clone(),
                        masks: (ms[i], mt[j]),
                    });
                }
            }
            out
        })
        .collect();
    let mut all: Vec<Scored> = scored.into_iter().flatten().collect();
    all.sort_by(|x, y| x.rank(y));
    Ok(all)
}

/// Candidate for a mask pair, truncated to fit `capacity` when given.
pub(crate) fn realize(
    s: &TreeShape,
    t: &TreeShape,
    masks: (u64, u64),
    capacity: Option<usize>,
) -> (TransitionCandidate, bool) {
    let (st, tt) = (s.topology(), t.topology());
    let mut trunc_s = vec![false; s.len()];
    let mut trunc_t = vec![false; t.len()];
    let mut cand = TransitionCandidate::build(st, tt, masks, &trunc_s, &trunc_t);
    let Some(depth) = capacity else {
        return (cand, false);
    };
    // pendant roots, deepest subtree bottom first
    let mut pendants: Vec<(usize, bool, usize)> = Vec::new();
    for (side, (topo, classes)) in [(st, &cand.source_classes), (tt, &cand.target_classes)].into_iter().enumerate() {
        for e in 0..topo.len() {
            let root = classes[e] == EdgeClass::External
                && topo.parent(e).is_none_or(|p| classes[p] != EdgeClass::External);
            if root {
                let bottom = (e..topo.subtree_end(e)).map(|x| topo.level(x)).max().unwrap();
                pendants.push((bottom, side == 1, e));
            }
        }
    }
    pendants.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    let mut truncated = false;
    for (_, target_side, e) in pendants {
        if cand.fits(depth) {
            break;
        }
        let (topo, flags) = if target_side { (tt, &mut trunc_t) } else { (st, &mut trunc_s) };
        for x in e..topo.subtree_end(e) {
            flags[x] = true;
        }
        truncated = true;
        cand = TransitionCandidate::build(st, tt, masks, &trunc_s, &trunc_t);
    }
    (cand, truncated)
}

/// All candidates whose common contraction has at most `degree` children
/// at every vertex, in canonical order (contraction topology, then masks).
pub fn enumerate_transitions(
    s: &TreeShape,
    t: &TreeShape,
    degree: usize,
    labels: Option<&crate::labels::LabelConstraint>,
) -> Result<Vec<TransitionCandidate>> {
    if degree < 3 {
        return Err(Error::Parameter("degree bound must be at least 3".into()));
    }
    let rules = LabelRules::from_option(labels, s, t);
    let mut all = score_all(s, t, degree, &rules)?;
    all.sort_by(|x, y| x.key.cmp(&y.key).then(x.masks.cmp(&y.masks)));
    Ok(all
        .iter()
        .map(|sc| TransitionCandidate::build(s.topology(), t.topology(), sc.masks, &vec![false; s.len()], &vec![false; t.len()]))
        .collect())
}
