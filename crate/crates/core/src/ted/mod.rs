//! Tree edit distance with attribute-norm costs: deleting or inserting an
//! edge costs its attribute norm and relabeling costs the attribute
//! difference. Also builds edit paths and a family of equal-length paths.

mod zs;

use crate::error::{Error, Result};
use crate::labels::{LabelConstraint, LabelRules};
use crate::qed::{GeodesicPath, JointStretch, PathMetric, Transition};
use crate::tree_model::{Attribute, CombinatorialTree, TreeShape, DEFAULT_DEPTH, EPS_ZERO};
use zs::ZhangShasha;

#[derive(Clone, Debug, PartialEq)]
pub enum EditOp {
    Relabel { source: usize, target: usize, cost: f64 },
    Delete { source: usize, cost: f64 },
    Insert { target: usize, cost: f64 },
}

impl EditOp {
    pub fn cost(&self) -> f64 {
        match *self {
            EditOp::Relabel { cost, .. } | EditOp::Delete { cost, .. } | EditOp::Insert { cost, .. } => cost,
        }
    }
}

/// An optimal edit script. Edge references are preorder indices into the
/// source and target shapes. Matched edges with identical attributes carry
/// no operation but appear in `matching`.
#[derive(Clone, Debug)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub matching: Vec<(usize, usize)>,
    pub cost: f64,
    target: TreeShape,
}

impl EditScript {
    pub fn deleted(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().filter_map(|o| match o {
            EditOp::Delete { source, .. } => Some(*source),
            _ => None,
        })
    }

    pub fn inserted(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().filter_map(|o| match o {
            EditOp::Insert { target, .. } => Some(*target),
            _ => None,
        })
    }

    /// Runs the script on `s`: relabels, then contractions, then insertions
    /// in target preorder.
    pub fn apply(&self, s: &TreeShape) -> Result<TreeShape> {
        let t = &self.target;
        let layout = s.layout();
        let n = s.len();
        // working forest: node ids < n are source edges, n + f inserted target edges
        let mut kids: Vec<Vec<usize>> = (0..n).map(|e| s.topology().children(e).to_vec()).collect();
        kids.resize(n + t.len(), vec![]);
        let mut roots: Vec<usize> = s.topology().roots().to_vec();
        let mut image: Vec<Option<usize>> = vec![None; n + t.len()];
        let mut attr: Vec<Attribute> = s.attrs().to_vec();
        attr.resize(n + t.len(), Attribute::zeros(layout));
        let mut node_of_target = vec![usize::MAX; t.len()];
        for &(e, f) in &self.matching {
            image[e] = Some(f);
            attr[e] = t.attr(f).clone();
            node_of_target[f] = e;
        }
        let mut parent_of = vec![None; n + t.len()];
        for (p, ch) in kids.iter().enumerate() {
            for &c in ch {
                parent_of[c] = Some(p);
            }
        }
        let deleted: Vec<usize> = self.deleted().collect();
        for &e in &deleted {
            let children = std::mem::take(&mut kids[e]);
            let list = match parent_of[e] {
                Some(p) => &mut kids[p],
                None => &mut roots,
            };
            let pos = list.iter().position(|&c| c == e).ok_or_else(|| Error::Input("bad script".into()))?;
            list.splice(pos..=pos, children.iter().copied());
            for &c in &children {
                parent_of[c] = parent_of[e];
            }
        }
        let mut inserted: Vec<usize> = self.inserted().collect();
        inserted.sort_unstable();
        let tt = t.topology();
        for f in inserted {
            let node = n + f;
            image[node] = Some(f);
            attr[node] = t.attr(f).clone();
            node_of_target[f] = node;
            let host = tt.parent(f).map(|p| node_of_target[p]);
            if host == Some(usize::MAX) {
                return Err(Error::Input("insertion below an unknown edge".into()));
            }
            let list = match host {
                Some(h) => &mut kids[h],
                None => &mut roots,
            };
            let adopt: Vec<usize> = (0..list.len())
                .filter(|&k| image[list[k]].is_some_and(|g| tt.is_ancestor(f, g)))
                .collect();
            if let (Some(&lo), Some(&hi)) = (adopt.first(), adopt.last()) {
                if hi - lo + 1 != adopt.len() {
                    return Err(Error::Input("insertion would adopt a non-contiguous range".into()));
                }
                let adopted: Vec<usize> = list.splice(lo..=hi, [node]).collect();
                for &c in &adopted {
                    parent_of[c] = Some(node);
                }
                kids[node] = adopted;
            } else {
                let pos = list.iter().filter(|&&c| image[c].is_some_and(|g| g < f)).count();
                list.insert(pos, node);
            }
            parent_of[node] = host;
        }
        let live: Vec<bool> = image.iter().map(Option::is_some).collect();
        let (topo, new_index) = compact(&roots, &kids, &live)?;
        let mut attrs = vec![Attribute::zeros(layout); topo.len()];
        for (old, &new) in new_index.iter().enumerate() {
            if new != usize::MAX {
                attrs[new] = attr[old].clone();
            }
        }
        TreeShape::new(layout, topo, attrs, None)
    }

    /// Swaps the roles of source and target.
    fn reversed(&self, target: &TreeShape) -> EditScript {
        let ops = self
            .ops
            .iter()
            .map(|o| match *o {
                EditOp::Relabel { source, target, cost } => EditOp::Relabel { source: target, target: source, cost },
                EditOp::Delete { source, cost } => EditOp::Insert { target: source, cost },
                EditOp::Insert { target, cost } => EditOp::Delete { source: target, cost },
            })
            .collect();
        let mut script = EditScript {
            ops,
            matching: self.matching.iter().map(|&(a, b)| (b, a)).collect(),
            cost: self.cost,
            target: target.clone(),
        };
        script.normalize();
        script
    }

    fn normalize(&mut self) {
        self.matching.sort_unstable();
        let rank = |o: &EditOp| match *o {
            EditOp::Relabel { source, .. } => (0, source),
            EditOp::Delete { source, .. } => (1, source),
            EditOp::Insert { target, .. } => (2, target),
        };
        self.ops.sort_by_key(rank);
    }
}

fn compact(roots: &[usize], kids: &[Vec<usize>], live: &[bool]) -> Result<(CombinatorialTree, Vec<usize>)> {
    let ids: Vec<usize> = (0..kids.len()).filter(|&x| live[x]).collect();
    let mut local = vec![usize::MAX; kids.len()];
    for (i, &x) in ids.iter().enumerate() {
        local[x] = i;
    }
    let r: Vec<usize> = roots.iter().map(|&x| local[x]).collect();
    let k: Vec<Vec<usize>> = ids.iter().map(|&x| kids[x].iter().map(|&c| local[c]).collect()).collect();
    let (t, idx) = CombinatorialTree::from_children(&r, &k, None)?;
    let mut new_index = vec![usize::MAX; kids.len()];
    for (i, &x) in ids.iter().enumerate() {
        new_index[x] = idx[i];
    }
    Ok((t, new_index))
}

fn script_oriented(s: &TreeShape, t: &TreeShape, c: Option<&LabelConstraint>) -> Result<EditScript> {
    let rules = LabelRules::from_option(c, s, t);
    let mut zs = ZhangShasha::new(s, t, &rules);
    if !zs.distance().is_finite() {
        return Err(Error::NotApplicable("label constraint cannot be satisfied".into()));
    }
    let al = zs.alignment();
    let mut ops = Vec::new();
    for &(e, f) in &al.pairs {
        let cost = s.attr(e).dist(t.attr(f));
        if cost > 0.0 {
            ops.push(EditOp::Relabel { source: e, target: f, cost });
        }
    }
    ops.extend(al.deleted.iter().map(|&e| EditOp::Delete { source: e, cost: s.attr(e).norm() }));
    ops.extend(al.inserted.iter().map(|&f| EditOp::Insert { target: f, cost: t.attr(f).norm() }));
    let mut script = EditScript { ops, matching: al.pairs, cost: al.cost, target: t.clone() };
    script.normalize();
    Ok(script)
}

/// Ordered edit script, optionally honoring a label constraint. The pair is
/// evaluated in canonical order so that distances are exactly symmetric.
pub fn ted_edit_script_constrained(
    s: &TreeShape,
    t: &TreeShape,
    c: Option<&LabelConstraint>,
) -> Result<EditScript> {
    s.layout().check_same(&t.layout())?;
    if t < s {
        Ok(script_oriented(t, s, c)?.reversed(t))
    } else {
        script_oriented(s, t, c)
    }
}

pub fn ted_edit_script(s: &TreeShape, t: &TreeShape) -> Result<EditScript> {
    ted_edit_script_constrained(s, t, None)
}

pub fn ted_ordered(s: &TreeShape, t: &TreeShape, c: Option<&LabelConstraint>) -> Result<f64> {
    s.layout().check_same(&t.layout())?;
    let (a, b) = if t < s { (t, s) } else { (s, t) };
    let rules = LabelRules::from_option(c, a, b);
    let d = ZhangShasha::new(a, b, &rules).distance();
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::NotApplicable("label constraint cannot be satisfied".into()))
    }
}

/// Tree edit distance; `ordered = false` minimizes over sibling reorderings of both shapes.
pub fn ted_distance(s: &TreeShape, t: &TreeShape, ordered: bool) -> Result<f64> {
    if ordered {
        ted_ordered(s, t, None)
    } else {
        let r = crate::unordered::unordered_distance(s, t, &crate::metric::Metric::Ted, None)?;
        Ok(r.distance)
    }
}

/// The edit path of `script`: all deletions shrink together, then matched
/// edges move to their targets, then insertions grow. Measured in `d1`.
pub fn ted_path(s: &TreeShape, script: &EditScript, min_depth: usize) -> Result<GeodesicPath> {
    let t = &script.target;
    let layout = s.layout();
    let zero = Attribute::zeros(layout);
    let deleted: Vec<usize> = script.deleted().collect();
    let mut shrink_end = s.attrs().to_vec();
    for &e in &deleted {
        shrink_end[e] = zero.clone();
    }
    let shrink = JointStretch { topology: s.topology().clone(), start: s.attrs().to_vec(), end: shrink_end };
    let mut keep = vec![false; s.len()];
    let mut target_of = vec![usize::MAX; s.len()];
    for &(e, f) in &script.matching {
        keep[e] = true;
        target_of[e] = f;
    }
    let (core, kept) = s.topology().contract(&keep);
    let relabel = JointStretch {
        topology: core,
        start: kept.iter().map(|&e| s.attr(e).clone()).collect(),
        end: kept.iter().map(|&e| t.attr(target_of[e]).clone()).collect(),
    };
    let mut grow_start = vec![zero; t.len()];
    for &(_, f) in &script.matching {
        grow_start[f] = t.attr(f).clone();
    }
    let grow = JointStretch { topology: t.topology().clone(), start: grow_start, end: t.attrs().to_vec() };
    let mid1 = shape_of(&relabel.topology, &relabel.start, layout)?;
    let mid2 = shape_of(&relabel.topology, &relabel.end, layout)?;
    GeodesicPath::from_joints(
        layout,
        vec![shrink, relabel, grow],
        vec![Transition { candidate: None, shape: mid1 }, Transition { candidate: None, shape: mid2 }],
        PathMetric::L1,
        min_depth,
    )
}

fn shape_of(t: &CombinatorialTree, attrs: &[Attribute], layout: crate::tree_model::Layout) -> Result<TreeShape> {
    TreeShape::from_parts_collapsing(layout, t.clone(), attrs.to_vec(), None)
}

/// Equal-length edit paths between two shapes of the same topology that
/// differ on at least two edges. The first changed edge forms one
/// deformation and the remaining changed edges the other; path `i` first
/// applies fraction `i / count` of the first, then all of the second, then
/// the rest of the first. Path 0 deforms everything simultaneously.
pub fn ted_geodesic_family(s: &TreeShape, t: &TreeShape, count: usize) -> Result<Vec<GeodesicPath>> {
    s.layout().check_same(&t.layout())?;
    if count == 0 {
        return Err(Error::Parameter("count must be positive".into()));
    }
    if !s.topology().same_shape(t.topology()) {
        return Err(Error::NotApplicable("shapes must share one topology".into()));
    }
    let changed: Vec<usize> = (0..s.len())
        .filter(|&e| s.attr(e).coords().iter().zip(t.attr(e).coords()).any(|(a, b)| (a - b).abs() > EPS_ZERO))
        .collect();
    if changed.len() < 2 {
        return Err(Error::NotApplicable("shapes must differ on at least two edges".into()));
    }
    let straight: f64 = changed.iter().map(|&e| s.attr(e).dist(t.attr(e))).sum();
    let d = ted_ordered(s, t, None)?;
    if (d - straight).abs() > 1e-12 * straight.max(1.0) {
        return Err(Error::NotApplicable("the edge-wise deformation is not an optimal edit path".into()));
    }
    let first = changed[0];
    let topo = s.topology().clone();
    let layout = s.layout();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let f = i as f64 / count as f64;
        let joints = if i == 0 {
            vec![JointStretch { topology: topo.clone(), start: s.attrs().to_vec(), end: t.attrs().to_vec() }]
        } else {
            let mut a = s.attrs().to_vec();
            a[first] = s.attr(first).lerp(t.attr(first), f);
            let mut b = t.attrs().to_vec();
            b[first] = a[first].clone();
            vec![
                JointStretch { topology: topo.clone(), start: s.attrs().to_vec(), end: a.clone() },
                JointStretch { topology: topo.clone(), start: a, end: b.clone() },
                JointStretch { topology: topo.clone(), start: b, end: t.attrs().to_vec() },
            ]
        };
        let transitions = joints[1..]
            .iter()
            .map(|j| Ok(Transition { candidate: None, shape: shape_of(&topo, &j.start, layout)? }))
            .collect::<Result<Vec<_>>>()?;
        out.push(GeodesicPath::from_joints(layout, joints, transitions, PathMetric::L1, DEFAULT_DEPTH)?);
    }
    Ok(out)
}
