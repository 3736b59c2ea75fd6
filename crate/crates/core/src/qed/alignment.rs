//! Best single Euclidean stretch between two shapes.
//!
//! A stretch from `s` to `t` is an ordered joint tree `U` whose contraction
//! of the target-only edges is `s` and whose contraction of the source-only
//! edges is `t`. Its squared length is the sum of squared attribute
//! differences, with absent edges counted as zero. Minimizing over `U` is an
//! ordered tree alignment problem solved here by dynamic programming over
//! pairs of sibling ranges. The bounded variant additionally requires `U` to
//! fit a complete binary maximal tree of a given depth.

use std::collections::HashMap;

use super::path::JointStretch;
use crate::labels::LabelRules;
use crate::tree_model::{Attribute, CombinatorialTree, TreeShape};

/// A node of the joint tree: which source and/or target edge it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct JointNode {
    pub source: Option<usize>,
    pub target: Option<usize>,
    pub children: Vec<JointNode>,
}

/// Optimal alignment: squared stretch length and the joint forest.
#[derive(Clone, Debug)]
pub struct Alignment {
    pub cost_sq: f64,
    pub forest: Vec<JointNode>,
}

impl Alignment {
    pub fn length(&self) -> f64 {
        self.cost_sq.sqrt()
    }

    /// Joint stretch from `s` to `t` realizing this alignment.
    pub fn joint(&self, s: &TreeShape, t: &TreeShape) -> JointStretch {
        let zero = Attribute::zeros(s.layout());
        let mut roots = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut start = Vec::new();
        let mut end = Vec::new();
        fn walk(
            n: &JointNode,
            s: &TreeShape,
            t: &TreeShape,
            zero: &Attribute,
            children: &mut Vec<Vec<usize>>,
            start: &mut Vec<Attribute>,
            end: &mut Vec<Attribute>,
        ) -> usize {
            let id = children.len();
            children.push(vec![]);
            start.push(n.source.map_or_else(|| zero.clone(), |e| s.attr(e).clone()));
            end.push(n.target.map_or_else(|| zero.clone(), |f| t.attr(f).clone()));
            let ch: Vec<usize> = n.children.iter().map(|c| walk(c, s, t, zero, children, start, end)).collect();
            children[id] = ch;
            id
        }
        for n in &self.forest {
            roots.push(walk(n, s, t, &zero, &mut children, &mut start, &mut end));
        }
        let (topology, new_index) = CombinatorialTree::from_children(&roots, &children, None).unwrap();
        let mut st = vec![zero.clone(); start.len()];
        let mut en = vec![zero; end.len()];
        for (old, &new) in new_index.iter().enumerate() {
            st[new] = start[old].clone();
            en[new] = end[old].clone();
        }
        JointStretch { topology, start: st, end: en }
    }

    /// Matched (source, target) pairs.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        fn walk(n: &JointNode, out: &mut Vec<(usize, usize)>) {
            if let (Some(a), Some(b)) = (n.source, n.target) {
                out.push((a, b));
            }
            n.children.iter().for_each(|c| walk(c, out));
        }
        self.forest.iter().for_each(|n| walk(n, &mut out));
        out.sort_unstable();
        out
    }
}

/// Range of a child list: `(vertex, lo, hi)` with vertex 0 the root vertex
/// and `e + 1` the vertex below edge `e`.
type Range = (usize, usize, usize);

struct Costs<'a> {
    s: &'a TreeShape,
    t: &'a TreeShape,
    rules: &'a LabelRules,
}

impl Costs<'_> {
    fn pair(&self, x: usize, y: usize) -> f64 {
        if self.rules.can_match(self.s.topology().label(x), self.t.topology().label(y)) {
            self.s.attr(x).dist_sq(self.t.attr(y))
        } else {
            f64::INFINITY
        }
    }

    fn del(&self, x: usize) -> f64 {
        if self.rules.can_drop(self.s.topology().label(x)) {
            self.s.attr(x).norm_sq()
        } else {
            f64::INFINITY
        }
    }

    fn ins(&self, y: usize) -> f64 {
        if self.rules.can_drop(self.t.topology().label(y)) {
            self.t.attr(y).norm_sq()
        } else {
            f64::INFINITY
        }
    }
}

fn list(t: &CombinatorialTree, v: usize) -> &[usize] {
    t.child_list(if v == 0 { None } else { Some(v - 1) })
}

fn kids(t: &CombinatorialTree, e: usize) -> Range {
    (e + 1, 0, t.children(e).len())
}

#[derive(Clone, Copy)]
enum Step {
    Empty,
    Pair,
    Del(usize),
    Ins(usize),
}

/// Unbounded alignment by rightmost-root decomposition.
struct Free<'a> {
    c: Costs<'a>,
    memo: HashMap<(Range, Range), (f64, Step)>,
}

impl Free<'_> {
    fn solve(&mut self, f: Range, g: Range) -> f64 {
        if let Some(&(v, _)) = self.memo.get(&(f, g)) {
            return v;
        }
        let (ss, ts) = (self.c.s.topology(), self.c.t.topology());
        let mut best = (f64::INFINITY, Step::Empty);
        if f.1 == f.2 && g.1 == g.2 {
            best = (0.0, Step::Empty);
        }
        if f.1 < f.2 && g.1 < g.2 {
            let (x, y) = (list(ss, f.0)[f.2 - 1], list(ts, g.0)[g.2 - 1]);
            let v = self.solve((f.0, f.1, f.2 - 1), (g.0, g.1, g.2 - 1))
                + self.c.pair(x, y)
                + self.solve(kids(ss, x), kids(ts, y));
            if v < best.0 {
                best = (v, Step::Pair);
            }
        }
        if f.1 < f.2 {
            let x = list(ss, f.0)[f.2 - 1];
            let dx = self.c.del(x);
            for k in g.1..=g.2 {
                let v = self.solve((f.0, f.1, f.2 - 1), (g.0, g.1, k)) + dx + self.solve(kids(ss, x), (g.0, k, g.2));
                if v < best.0 {
                    best = (v, Step::Del(k));
                }
            }
        }
        if g.1 < g.2 {
            let y = list(ts, g.0)[g.2 - 1];
            let iy = self.c.ins(y);
            for k in f.1..=f.2 {
                let v = self.solve((f.0, f.1, k), (g.0, g.1, g.2 - 1)) + iy + self.solve((f.0, k, f.2), kids(ts, y));
                if v < best.0 {
                    best = (v, Step::Ins(k));
                }
            }
        }
        self.memo.insert((f, g), best);
        best.0
    }

    fn build(&self, f: Range, g: Range, out: &mut Vec<JointNode>) {
        let (ss, ts) = (self.c.s.topology(), self.c.t.topology());
        let (_, step) = self.memo[&(f, g)];
        match step {
            Step::Empty => {}
            Step::Pair => {
                let (x, y) = (list(ss, f.0)[f.2 - 1], list(ts, g.0)[g.2 - 1]);
                self.build((f.0, f.1, f.2 - 1), (g.0, g.1, g.2 - 1), out);
                let mut ch = Vec::new();
                self.build(kids(ss, x), kids(ts, y), &mut ch);
                out.push(JointNode { source: Some(x), target: Some(y), children: ch });
            }
            Step::Del(k) => {
                let x = list(ss, f.0)[f.2 - 1];
                self.build((f.0, f.1, f.2 - 1), (g.0, g.1, k), out);
                let mut ch = Vec::new();
                self.build(kids(ss, x), (g.0, k, g.2), &mut ch);
                out.push(JointNode { source: Some(x), target: None, children: ch });
            }
            Step::Ins(k) => {
                let y = list(ts, g.0)[g.2 - 1];
                self.build((f.0, f.1, k), (g.0, g.1, g.2 - 1), out);
                let mut ch = Vec::new();
                self.build((f.0, k, f.2), kids(ts, y), &mut ch);
                out.push(JointNode { source: None, target: Some(y), children: ch });
            }
        }
    }
}

#[derive(Clone, Copy)]
enum SlotStep {
    Pair,
    Del,
    Ins,
    Zero,
}

/// Alignment whose joint forest must fit slots of a complete binary tree.
struct Bounded<'a> {
    c: Costs<'a>,
    slot: HashMap<(Range, Range, usize), (f64, SlotStep)>,
    forest: HashMap<(Range, Range, usize), (f64, usize, usize)>,
}

impl Bounded<'_> {
    fn single(t: &CombinatorialTree, r: Range) -> Option<usize> {
        (r.2 - r.1 == 1).then(|| list(t, r.0)[r.1])
    }

    /// Both ranges placed in one slot of height `h`.
    fn slot(&mut self, f: Range, g: Range, h: usize) -> f64 {
        if f.1 == f.2 && g.1 == g.2 {
            return 0.0;
        }
        if h == 0 {
            return f64::INFINITY;
        }
        if let Some(&(v, _)) = self.slot.get(&(f, g, h)) {
            return v;
        }
        let (ss, ts) = (self.c.s.topology(), self.c.t.topology());
        let mut best = (self.forest_cost(f, g, h - 1), SlotStep::Zero);
        let (sx, sy) = (Self::single(ss, f), Self::single(ts, g));
        if let (Some(x), Some(y)) = (sx, sy) {
            let v = self.c.pair(x, y) + self.forest_cost(kids(ss, x), kids(ts, y), h - 1);
            if v < best.0 {
                best = (v, SlotStep::Pair);
            }
        }
        if let Some(x) = sx {
            let v = self.c.del(x) + self.forest_cost(kids(ss, x), g, h - 1);
            if v < best.0 {
                best = (v, SlotStep::Del);
            }
        }
        if let Some(y) = sy {
            let v = self.c.ins(y) + self.forest_cost(f, kids(ts, y), h - 1);
            if v < best.0 {
                best = (v, SlotStep::Ins);
            }
        }
        self.slot.insert((f, g, h), best);
        best.0
    }

    /// Both ranges placed below a vertex with two slots of height `h`.
    fn forest_cost(&mut self, f: Range, g: Range, h: usize) -> f64 {
        if f.1 == f.2 && g.1 == g.2 {
            return 0.0;
        }
        if h == 0 {
            return f64::INFINITY;
        }
        if let Some(&(v, _, _)) = self.forest.get(&(f, g, h)) {
            return v;
        }
        let mut best = (f64::INFINITY, f.1, g.1);
        for i in f.1..=f.2 {
            for j in g.1..=g.2 {
                let v = self.slot((f.0, f.1, i), (g.0, g.1, j), h) + self.slot((f.0, i, f.2), (g.0, j, g.2), h);
                if v < best.0 {
                    best = (v, i, j);
                }
            }
        }
        self.forest.insert((f, g, h), best);
        best.0
    }

    fn build_slot(&self, f: Range, g: Range, h: usize, out: &mut Vec<JointNode>) {
        if (f.1 == f.2 && g.1 == g.2) || h == 0 {
            return;
        }
        let (ss, ts) = (self.c.s.topology(), self.c.t.topology());
        let (_, step) = self.slot[&(f, g, h)];
        let mut node = |source: Option<usize>, target: Option<usize>, cf: Range, cg: Range| {
            let mut ch = Vec::new();
            self.build_forest(cf, cg, h - 1, &mut ch);
            out.push(JointNode { source, target, children: ch });
        };
        match step {
            SlotStep::Pair => {
                let (x, y) = (list(ss, f.0)[f.1], list(ts, g.0)[g.1]);
                node(Some(x), Some(y), kids(ss, x), kids(ts, y));
            }
            SlotStep::Del => {
                let x = list(ss, f.0)[f.1];
                node(Some(x), None, kids(ss, x), g);
            }
            SlotStep::Ins => {
                let y = list(ts, g.0)[g.1];
                node(None, Some(y), f, kids(ts, y));
            }
            SlotStep::Zero => self.build_forest(f, g, h - 1, out),
        }
    }

    fn build_forest(&self, f: Range, g: Range, h: usize, out: &mut Vec<JointNode>) {
        if (f.1 == f.2 && g.1 == g.2) || h == 0 {
            return;
        }
        let (_, i, j) = self.forest[&(f, g, h)];
        self.build_slot((f.0, f.1, i), (g.0, g.1, j), h, out);
        self.build_slot((f.0, i, f.2), (g.0, j, g.2), h, out);
    }
}

/// Best single stretch. With `depth = Some(L)` the joint tree must fit the
/// complete binary maximal tree of depth `L`; the result is then infinite
/// when no such stretch exists.
pub(crate) fn align(s: &TreeShape, t: &TreeShape, rules: &LabelRules, depth: Option<usize>) -> Alignment {
    let c = Costs { s, t, rules };
    let f = (0, 0, s.topology().roots().len());
    let g = (0, 0, t.topology().roots().len());
    match depth {
        None => {
            let mut dp = Free { c, memo: HashMap::new() };
            let cost_sq = dp.solve(f, g);
            let mut forest = Vec::new();
            if cost_sq.is_finite() {
                dp.build(f, g, &mut forest);
            }
            Alignment { cost_sq, forest }
        }
        Some(h) => {
            let mut dp = Bounded { c, slot: HashMap::new(), forest: HashMap::new() };
            let cost_sq = dp.slot(f, g, h);
            let mut forest = Vec::new();
            if cost_sq.is_finite() {
                dp.build_slot(f, g, h, &mut forest);
            }
            Alignment { cost_sq, forest }
        }
    }
}

/// Best single stretch between `s` and `t` without label constraints.
pub fn single_stretch(s: &TreeShape, t: &TreeShape, depth: Option<usize>) -> Alignment {
    align(s, t, &LabelRules::default(), depth)
}
