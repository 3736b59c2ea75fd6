use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use super::attribute::{Attribute, Layout, EPS_ZERO};
use super::maximal::{Embedder, MaximalTree};
use super::preshape::PreShape;
use super::topology::CombinatorialTree;
use crate::error::{Error, Result};

/// A tree-shape: the canonical collapsed ordered attributed tree of an
/// equivalence class of pre-shapes.
///
/// Equality, hashing and ordering use the canonical key (preorder child
/// counts and attribute coordinates on the `EPS_ZERO` grid). Edge ids and
/// labels are carried along but do not take part in equality.
#[derive(Clone, Debug)]
pub struct TreeShape {
    layout: Layout,
    topology: CombinatorialTree,
    attrs: Vec<Attribute>,
    ids: Vec<String>,
    key: Vec<i64>,
}

fn grid(c: f64) -> i64 {
    (c / EPS_ZERO).round() as i64
}

impl TreeShape {
    pub fn new(
        layout: Layout,
        topology: CombinatorialTree,
        attrs: Vec<Attribute>,
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if attrs.len() != topology.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} attributes for {} edges",
                attrs.len(),
                topology.len()
            )));
        }
        for a in &attrs {
            if a.coords().len() != layout.free_len() {
                return Err(Error::DimensionMismatch("attribute length".into()));
            }
            if a.is_collapsed(layout) {
                return Err(Error::Input("canonical shapes cannot contain collapsed edges".into()));
            }
        }
        let ids = match ids {
            Some(ids) if ids.len() == topology.len() => ids,
            Some(_) => return Err(Error::Input("one id per edge required".into())),
            None => (0..topology.len()).map(|e| format!("e{e}")).collect(),
        };
        let mut key = Vec::with_capacity(1 + attrs.len() * (1 + layout.free_len()));
        key.push(topology.roots().len() as i64);
        for (e, a) in attrs.iter().enumerate() {
            key.push(topology.children(e).len() as i64);
            key.extend(a.coords().iter().map(|&c| grid(c)));
        }
        Ok(TreeShape { layout, topology, attrs, ids, key })
    }

    /// Like [`TreeShape::new`] but contracts edges whose attribute is collapsed.
    pub fn from_parts_collapsing(
        layout: Layout,
        topology: CombinatorialTree,
        attrs: Vec<Attribute>,
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if attrs.len() != topology.len() {
            return Err(Error::DimensionMismatch("one attribute per edge required".into()));
        }
        let keep: Vec<bool> = attrs.iter().map(|a| !a.is_collapsed(layout)).collect();
        let (t, kept) = topology.contract(&keep);
        let attrs = kept.iter().map(|&e| attrs[e].clone()).collect();
        let ids = ids.map(|ids| kept.iter().map(|&e| ids[e].clone()).collect());
        TreeShape::new(layout, t, attrs, ids)
    }

    /// The one-vertex shape.
    pub fn trivial(layout: Layout) -> Self {
        TreeShape::new(layout, CombinatorialTree::empty(), vec![], None).unwrap()
    }

    /// Parses a compact bracket notation with one scalar per edge stored in
    /// the first free coordinate: `1[0.2[1,3],1]` is an edge of value 1 whose
    /// lower vertex carries an edge 0.2 (with children 1 and 3) and an edge 1.
    /// A top-level comma list gives several edges at the root vertex.
    pub fn from_bracket(layout: Layout, text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut values = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut pos = 0;
        let roots = parse_forest(&chars, &mut pos, &mut values, &mut children)?;
        if pos != chars.len() {
            return Err(Error::Input(format!("unexpected '{}' in bracket tree", chars[pos])));
        }
        let (topology, new_index) = CombinatorialTree::from_children(&roots, &children, None)?;
        let mut attrs = vec![Attribute::zeros(layout); values.len()];
        for (old, &v) in values.iter().enumerate() {
            attrs[new_index[old]] = Attribute::scalar(layout, v);
        }
        TreeShape::from_parts_collapsing(layout, topology, attrs, None)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn topology(&self) -> &CombinatorialTree {
        &self.topology
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn attr(&self, e: usize) -> &Attribute {
        &self.attrs[e]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.topology.is_empty()
    }

    pub fn key(&self) -> &[i64] {
        &self.key
    }

    pub fn norm_sq(&self) -> f64 {
        self.attrs.iter().map(Attribute::norm_sq).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Sum of edge attribute norms (the distance to the one-vertex tree in TED).
    pub fn norm_l1(&self) -> f64 {
        self.attrs.iter().map(Attribute::norm).sum()
    }

    /// Same topology and coordinates within `tol`.
    pub fn approx_eq(&self, other: &TreeShape, tol: f64) -> bool {
        self.layout == other.layout
            && self.topology.same_shape(&other.topology)
            && self
                .attrs
                .iter()
                .zip(&other.attrs)
                .all(|(a, b)| a.coords().iter().zip(b.coords()).all(|(u, v)| (u - v).abs() <= tol))
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Self {
        self.topology = self.topology.with_labels(labels);
        self
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Self {
        assert_eq!(ids.len(), self.len());
        self.ids = ids;
        self
    }

    pub fn scaled(&self, s: f64) -> Result<TreeShape> {
        let attrs = self.attrs.iter().map(|a| a.scaled(s)).collect();
        TreeShape::from_parts_collapsing(self.layout, self.topology.clone(), attrs, Some(self.ids.clone()))
    }

    /// Smallest maximal-tree depth holding this shape.
    pub fn required_depth(&self) -> usize {
        Embedder::new(&self.topology).required_depth()
    }

    /// One deterministic representative on `mt`.
    pub fn to_preshape(&self, mt: MaximalTree) -> Result<PreShape> {
        let map = Embedder::new(&self.topology).embed(mt).ok_or(Error::Capacity { depth: mt.depth() })?;
        Ok(self.scatter(mt, &map))
    }

    /// All pre-shapes on `mt` whose collapse is this shape.
    pub fn representatives(&self, mt: MaximalTree) -> Result<Vec<PreShape>> {
        let maps = Embedder::new(&self.topology).all_embeddings(mt);
        if maps.is_empty() {
            return Err(Error::Capacity { depth: mt.depth() });
        }
        Ok(maps.iter().map(|m| self.scatter(mt, m)).collect())
    }

    fn scatter(&self, mt: MaximalTree, map: &[usize]) -> PreShape {
        let mut x = PreShape::zeros(mt, self.layout);
        for (e, &h) in map.iter().enumerate() {
            x.set(h, self.attrs[e].clone());
        }
        x
    }

    /// Children counts per vertex: index 0 is the root vertex, `e + 1` the
    /// vertex below edge `e`.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        std::iter::once(self.topology.roots().len())
            .chain((0..self.len()).map(|e| self.topology.children(e).len()))
            .collect()
    }

    /// Applies per-vertex child permutations (indexed like [`Self::vertex_degrees`]).
    pub fn reordered(&self, perms: &[Vec<usize>]) -> TreeShape {
        let (t, new_index) = self.topology.permuted(perms);
        let mut attrs = vec![Attribute::zeros(self.layout); self.len()];
        let mut ids = vec![String::new(); self.len()];
        for (old, &new) in new_index.iter().enumerate() {
            attrs[new] = self.attrs[old].clone();
            ids[new] = self.ids[old].clone();
        }
        TreeShape::new(self.layout, t, attrs, Some(ids)).unwrap()
    }

    /// All distinct shapes obtained by permuting siblings at every vertex.
    pub fn reorderings(&self) -> Vec<TreeShape> {
        let mut out: Vec<TreeShape> = all_permutation_sets(&self.vertex_degrees())
            .iter()
            .map(|p| self.reordered(p))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Cartesian product of all permutations of `0..deg` for every degree.
pub(crate) fn all_permutation_sets(degrees: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![Vec::new()];
    for &d in degrees {
        let perms = permutations(d);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for prefix in &out {
            for p in &perms {
                let mut v = prefix.clone();
                v.push(p.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn parse_forest(
    s: &[char],
    pos: &mut usize,
    values: &mut Vec<f64>,
    children: &mut Vec<Vec<usize>>,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    if *pos >= s.len() || s[*pos] == ']' {
        return Ok(out);
    }
    loop {
        let start = *pos;
        while *pos < s.len() && !matches!(s[*pos], '[' | ']' | ',') {
            *pos += 1;
        }
        let tok: String = s[start..*pos].iter().collect();
        let v: f64 = tok.parse().map_err(|_| Error::Input(format!("bad edge value '{tok}'")))?;
        let e = values.len();
        values.push(v);
        children.push(Vec::new());
        if *pos < s.len() && s[*pos] == '[' {
            *pos += 1;
            let ch = parse_forest(s, pos, values, children)?;
            if *pos >= s.len() || s[*pos] != ']' {
                return Err(Error::Input("missing ']'".into()));
            }
            *pos += 1;
            children[e] = ch;
        }
        out.push(e);
        if *pos < s.len() && s[*pos] == ',' {
            *pos += 1;
        } else {
            return Ok(out);
        }
    }
}

impl PartialEq for TreeShape {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.key == other.key
    }
}

impl Eq for TreeShape {}

impl Hash for TreeShape {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}

impl PartialOrd for TreeShape {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TreeShape {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.cmp(&other.key)
    }
}
