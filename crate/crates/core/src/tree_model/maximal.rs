use std::collections::HashMap;

use super::topology::CombinatorialTree;
use crate::error::{Error, Result};

/// Complete binary maximal tree with a single root edge.
///
/// Edges use heap numbering: the root edge is 0 and the children of edge
/// `i` are `2i + 1` (left) and `2i + 2` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MaximalTree {
    depth: usize,
}

pub const MAX_DEPTH: usize = 24;

impl MaximalTree {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Parameter(format!("maximal tree depth must be in 1..={MAX_DEPTH}")));
        }
        Ok(MaximalTree { depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn edge_count(&self) -> usize {
        (1usize << self.depth) - 1
    }

    pub fn children(&self, e: usize) -> Option<(usize, usize)> {
        let l = 2 * e + 1;
        (l < self.edge_count()).then_some((l, l + 1))
    }

    pub fn parent(&self, e: usize) -> Option<usize> {
        (e > 0).then(|| (e - 1) / 2)
    }

    /// Edge indices in depth-first preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.edge_count());
        let mut stack = vec![0];
        while let Some(e) = stack.pop() {
            out.push(e);
            if let Some((l, r)) = self.children(e) {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }

    /// The maximal tree as a combinatorial tree plus the heap index of each
    /// of its (preorder) edges.
    pub fn topology(&self) -> (CombinatorialTree, Vec<usize>) {
        let m = self.edge_count();
        let children: Vec<Vec<usize>> = (0..m)
            .map(|e| self.children(e).map_or(vec![], |(l, r)| vec![l, r]))
            .collect();
        let (t, new_index) = CombinatorialTree::from_children(&[0], &children, None).unwrap();
        let mut heap = vec![0; m];
        for (old, &new) in new_index.iter().enumerate() {
            heap[new] = old;
        }
        (t, heap)
    }
}

/// Order-preserving embeddings of ordered forests into complete binary trees.
///
/// A vertex of the maximal tree offers two child slots. A slot either hosts a
/// single tree on its edge, or is left collapsed and hosts a forest under its
/// lower vertex one level down.
pub struct Embedder<'a> {
    tree: &'a CombinatorialTree,
    slot: HashMap<(usize, usize, usize, usize), bool>,
    forest: HashMap<(usize, usize, usize, usize), bool>,
    need: Vec<Option<usize>>,
}

fn vkey(v: Option<usize>) -> usize {
    v.map_or(0, |e| e + 1)
}

impl<'a> Embedder<'a> {
    pub fn new(tree: &'a CombinatorialTree) -> Self {
        Embedder { tree, slot: HashMap::new(), forest: HashMap::new(), need: vec![None; tree.len()] }
    }

    /// Smallest slot height that hosts edge `e` with its subtree on the slot edge.
    pub fn need(&mut self, e: usize) -> usize {
        if let Some(n) = self.need[e] {
            return n;
        }
        let deg = self.tree.children(e).len();
        let mut h = 0;
        while !self.forest_fits(Some(e), 0, deg, h) {
            h += 1;
        }
        self.need[e] = Some(h + 1);
        h + 1
    }

    /// Whether children `lo..hi` of `v` fit into one slot of height `h`.
    pub fn slot_fits(&mut self, v: Option<usize>, lo: usize, hi: usize, h: usize) -> bool {
        if lo == hi {
            return true;
        }
        if h == 0 {
            return false;
        }
        let key = (vkey(v), lo, hi, h);
        if let Some(&b) = self.slot.get(&key) {
            return b;
        }
        let single = hi - lo == 1 && {
            let e = self.tree.child_list(v)[lo];
            self.need(e) <= h
        };
        let b = single || self.forest_fits(v, lo, hi, h - 1);
        self.slot.insert(key, b);
        b
    }

    /// Whether children `lo..hi` of `v` fit below a vertex whose two slots have height `h`.
    pub fn forest_fits(&mut self, v: Option<usize>, lo: usize, hi: usize, h: usize) -> bool {
        if lo == hi {
            return true;
        }
        if h == 0 {
            return false;
        }
        let key = (vkey(v), lo, hi, h);
        if let Some(&b) = self.forest.get(&key) {
            return b;
        }
        let b = (lo..=hi).any(|k| self.slot_fits(v, lo, k, h) && self.slot_fits(v, k, hi, h));
        self.forest.insert(key, b);
        b
    }

    pub fn fits(&mut self, depth: usize) -> bool {
        let n = self.tree.roots().len();
        self.slot_fits(None, 0, n, depth)
    }

    /// Smallest maximal-tree depth that hosts the whole forest.
    pub fn required_depth(&mut self) -> usize {
        let mut d = 1;
        while !self.fits(d) {
            d += 1;
        }
        d
    }

    /// One deterministic embedding: heap index of every edge.
    pub fn embed(&mut self, mt: MaximalTree) -> Option<Vec<usize>> {
        if !self.fits(mt.depth()) {
            return None;
        }
        let mut out = vec![usize::MAX; self.tree.len()];
        let n = self.tree.roots().len();
        self.place_slot(None, 0, n, mt.depth(), 0, mt, &mut out);
        Some(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn place_slot(
        &mut self,
        v: Option<usize>,
        lo: usize,
        hi: usize,
        h: usize,
        slot: usize,
        mt: MaximalTree,
        out: &mut [usize],
    ) {
        if lo == hi {
            return;
        }
        if hi - lo == 1 {
            let e = self.tree.child_list(v)[lo];
            if self.need(e) <= h {
                out[e] = slot;
                let deg = self.tree.children(e).len();
                if deg > 0 {
                    self.place_forest(Some(e), 0, deg, h - 1, slot, mt, out);
                }
                return;
            }
        }
        self.place_forest(v, lo, hi, h - 1, slot, mt, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn place_forest(
        &mut self,
        v: Option<usize>,
        lo: usize,
        hi: usize,
        h: usize,
        above: usize,
        mt: MaximalTree,
        out: &mut [usize],
    ) {
        let (l, r) = mt.children(above).expect("fit check guarantees a lower level");
        let mut splits: Vec<usize> = (lo..=hi).collect();
        // balanced splits first, left-heavy on ties
        splits.sort_by_key(|&k| ((2 * k).abs_diff(lo + hi), std::cmp::Reverse(k)));
        for k in splits {
            if self.slot_fits(v, lo, k, h) && self.slot_fits(v, k, hi, h) {
                self.place_slot(v, lo, k, h, l, mt, out);
                self.place_slot(v, k, hi, h, r, mt, out);
                return;
            }
        }
        unreachable!("forest fit was checked");
    }

    /// Every order-preserving embedding into `mt`.
    pub fn all_embeddings(&mut self, mt: MaximalTree) -> Vec<Vec<usize>> {
        let n = self.tree.roots().len();
        let base = vec![usize::MAX; self.tree.len()];
        if !self.fits(mt.depth()) {
            return vec![];
        }
        self.enum_slot(None, 0, n, mt.depth(), 0, mt, base)
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_slot(
        &mut self,
        v: Option<usize>,
        lo: usize,
        hi: usize,
        h: usize,
        slot: usize,
        mt: MaximalTree,
        partial: Vec<usize>,
    ) -> Vec<Vec<usize>> {
        if lo == hi {
            return vec![partial];
        }
        if h == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        if hi - lo == 1 {
            let e = self.tree.child_list(v)[lo];
            if self.need(e) <= h {
                let mut p = partial.clone();
                p[e] = slot;
                let deg = self.tree.children(e).len();
                if deg == 0 {
                    out.push(p);
                } else {
                    out.extend(self.enum_forest(Some(e), 0, deg, h - 1, slot, mt, p));
                }
            }
        }
        if self.forest_fits(v, lo, hi, h - 1) {
            out.extend(self.enum_forest(v, lo, hi, h - 1, slot, mt, partial));
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enum_forest(
        &mut self,
        v: Option<usize>,
        lo: usize,
        hi: usize,
        h: usize,
        above: usize,
        mt: MaximalTree,
        partial: Vec<usize>,
    ) -> Vec<Vec<usize>> {
        let Some((l, r)) = mt.children(above) else {
            return if lo == hi { vec![partial] } else { vec![] };
        };
        let mut out = Vec::new();
        for k in lo..=hi {
            if !(self.slot_fits(v, lo, k, h) && self.slot_fits(v, k, hi, h)) {
                continue;
            }
            for p in self.enum_slot(v, lo, k, h, l, mt, partial.clone()) {
                out.extend(self.enum_slot(v, k, hi, h, r, mt, p));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> CombinatorialTree {
        let children: Vec<Vec<usize>> = (0..n).map(|e| if e + 1 < n { vec![e + 1] } else { vec![] }).collect();
        CombinatorialTree::from_children(&[0], &children, None).unwrap().0
    }

    #[test]
    fn heap_numbering() {
        let mt = MaximalTree::new(3).unwrap();
        assert_eq!(mt.edge_count(), 7);
        assert_eq!(mt.children(1), Some((3, 4)));
        assert_eq!(mt.children(3), None);
        assert_eq!(mt.preorder(), vec![0, 1, 3, 4, 2, 5, 6]);
        let (t, heap) = mt.topology();
        assert!(t.is_binary());
        assert_eq!(heap, mt.preorder());
    }

    #[test]
    fn single_edge_in_two_levels() {
        // root edge, or either child below a collapsed root edge
        let mt = MaximalTree::new(2).unwrap();
        let t = path(1);
        let mut emb = Embedder::new(&t);
        let mut all = emb.all_embeddings(mt);
        all.sort();
        assert_eq!(all, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn full_tree_has_one_embedding() {
        let mt = MaximalTree::new(3).unwrap();
        let (t, _) = mt.topology();
        assert_eq!(Embedder::new(&t).all_embeddings(mt).len(), 1);
    }

    #[test]
    fn capacity() {
        assert!(Embedder::new(&path(3)).fits(3));
        assert!(!Embedder::new(&path(4)).fits(3));
        // three root-level edges need a collapsed root and a collapsed slot
        let star = CombinatorialTree::from_children(&[0, 1, 2], &[vec![], vec![], vec![]], None).unwrap().0;
        assert_eq!(Embedder::new(&star).required_depth(), 3);
    }

    #[test]
    fn embedding_preserves_order_and_ancestry() {
        let mt = MaximalTree::new(4).unwrap();
        let t = CombinatorialTree::from_children(&[0], &[vec![1, 2, 3], vec![], vec![], vec![]], None).unwrap().0;
        let mut emb = Embedder::new(&t);
        let all = emb.all_embeddings(mt);
        assert!(!all.is_empty());
        let pre = mt.preorder();
        let pos = |h: usize| pre.iter().position(|&x| x == h).unwrap();
        for m in &all {
            for e in 0..t.len() {
                for f in e + 1..t.len() {
                    assert!(pos(m[e]) < pos(m[f]));
                }
            }
        }
    }
}
