use crate::error::{Error, Result};

/// One symbol of the balanced-parenthesis word of an ordered forest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Paren {
    Open(usize),
    Close(usize),
}

/// Rooted ordered forest of edges hanging from a single root vertex.
///
/// Edges are stored in depth-first preorder, so edge indices increase along
/// any root-to-leaf chain and the subtree of `e` is the index range
/// `e..subtree_end(e)`. The vertex below edge `e` is identified with `e`;
/// the root vertex is `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CombinatorialTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    end: Vec<usize>,
    level: Vec<usize>,
    labels: Vec<Option<String>>,
}

impl CombinatorialTree {
    /// The one-vertex tree.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a tree from ordered child lists in arbitrary numbering.
    ///
    /// Returns the tree together with `new_index[old]`.
    pub fn from_children(
        roots: &[usize],
        children: &[Vec<usize>],
        labels: Option<&[Option<String>]>,
    ) -> Result<(Self, Vec<usize>)> {
        let m = children.len();
        let mut new_index = vec![usize::MAX; m];
        let mut order = Vec::with_capacity(m);
        let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
        while let Some(e) = stack.pop() {
            if e >= m || new_index[e] != usize::MAX {
                return Err(Error::Input("child lists do not describe a forest".into()));
            }
            new_index[e] = order.len();
            order.push(e);
            stack.extend(children[e].iter().rev());
        }
        if order.len() != m {
            return Err(Error::Input("unreachable or cyclic edges".into()));
        }
        let mut parent = vec![None; m];
        let mut kids = vec![Vec::new(); m];
        for (old, ch) in children.iter().enumerate() {
            let p = new_index[old];
            kids[p] = ch.iter().map(|&c| new_index[c]).collect();
            for &c in &kids[p] {
                parent[c] = Some(p);
            }
        }
        let new_roots = roots.iter().map(|&r| new_index[r]).collect();
        let new_labels = match labels {
            Some(l) => order.iter().map(|&old| l[old].clone()).collect(),
            None => vec![None; m],
        };
        Ok((Self::assemble(parent, kids, new_roots, new_labels), new_index))
    }

    fn assemble(
        parent: Vec<Option<usize>>,
        children: Vec<Vec<usize>>,
        roots: Vec<usize>,
        labels: Vec<Option<String>>,
    ) -> Self {
        let m = parent.len();
        let mut end = vec![0; m];
        for e in (0..m).rev() {
            end[e] = children[e].last().map_or(e + 1, |&c| end[c]);
        }
        let mut level = vec![0; m];
        for e in 0..m {
            level[e] = parent[e].map_or(1, |p| level[p] + 1);
        }
        CombinatorialTree { parent, children, roots, end, level, labels }
    }

    /// Builds a tree from a balanced word whose tokens are arbitrary ids.
    /// Edges are numbered in order of their opening symbol; returns the tree
    /// and, for each new edge, the token that produced it.
    pub fn from_word(word: &[Paren]) -> Result<(Self, Vec<usize>)> {
        let mut parent = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut roots = Vec::new();
        let mut tokens = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for sym in word {
            match *sym {
                Paren::Open(tok) => {
                    let e = parent.len();
                    let p = stack.last().map(|&(e, _)| e);
                    parent.push(p);
                    children.push(Vec::new());
                    match p {
                        Some(p) => children[p].push(e),
                        None => roots.push(e),
                    }
                    tokens.push(tok);
                    stack.push((e, tok));
                }
                Paren::Close(tok) => match stack.pop() {
                    Some((_, t)) if t == tok => {}
                    _ => return Err(Error::Input("unbalanced edge word".into())),
                },
            }
        }
        if !stack.is_empty() {
            return Err(Error::Input("unbalanced edge word".into()));
        }
        let m = parent.len();
        Ok((Self::assemble(parent, children, roots, vec![None; m]), tokens))
    }

    /// Balanced word of the forest with tokens equal to edge indices.
    pub fn word(&self) -> Vec<Paren> {
        let mut out = Vec::with_capacity(2 * self.len());
        fn walk(t: &CombinatorialTree, e: usize, out: &mut Vec<Paren>) {
            out.push(Paren::Open(e));
            for &c in t.children(e) {
                walk(t, c, out);
            }
            out.push(Paren::Close(e));
        }
        for &r in &self.roots {
            walk(self, r, &mut out);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.len() + 1
    }

    /// Edges as (child vertex, parent vertex) pairs with vertex 0 the root.
    pub fn vertex_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .map(|e| (e + 1, self.parent[e].map_or(0, |p| p + 1)))
            .collect()
    }

    pub fn parent(&self, e: usize) -> Option<usize> {
        self.parent[e]
    }

    pub fn children(&self, e: usize) -> &[usize] {
        &self.children[e]
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    /// Ordered children of a vertex (`None` is the root vertex).
    pub fn child_list(&self, v: Option<usize>) -> &[usize] {
        match v {
            Some(e) => &self.children[e],
            None => &self.roots,
        }
    }

    /// Position of `e` among its siblings.
    pub fn sibling_order(&self, e: usize) -> usize {
        self.child_list(self.parent[e]).iter().position(|&c| c == e).unwrap()
    }

    pub fn subtree_end(&self, e: usize) -> usize {
        self.end[e]
    }

    /// 1 for edges at the root vertex.
    pub fn level(&self, e: usize) -> usize {
        self.level[e]
    }

    /// Number of edges on the longest root-to-leaf chain.
    pub fn height(&self) -> usize {
        self.level.iter().copied().max().unwrap_or(0)
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a < b && b < self.end[a]
    }

    pub fn is_leaf(&self, e: usize) -> bool {
        self.children[e].is_empty()
    }

    pub fn label(&self, e: usize) -> Option<&str> {
        self.labels[e].as_deref()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Self {
        assert_eq!(labels.len(), self.len());
        self.labels = labels;
        self
    }

    /// Largest number of children at any vertex, the root vertex included.
    pub fn max_children(&self) -> usize {
        self.children
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(self.roots.len()))
            .max()
            .unwrap_or(0)
    }

    /// True when every vertex has 0 or 2 children and the root vertex has one.
    pub fn is_binary(&self) -> bool {
        self.roots.len() == 1 && self.children.iter().all(|c| c.is_empty() || c.len() == 2)
    }

    /// Contracts every edge with `keep[e] == false`. Children of a contracted
    /// edge move to its parent vertex in depth-first order. Returns the new
    /// tree and the old index of each surviving edge.
    pub fn contract(&self, keep: &[bool]) -> (Self, Vec<usize>) {
        let m = self.len();
        let mut new_index = vec![usize::MAX; m];
        let kept: Vec<usize> = (0..m).filter(|&e| keep[e]).collect();
        for (i, &e) in kept.iter().enumerate() {
            new_index[e] = i;
        }
        let mut parent = Vec::with_capacity(kept.len());
        let mut children = vec![Vec::new(); kept.len()];
        let mut roots = Vec::new();
        for (i, &e) in kept.iter().enumerate() {
            let mut p = self.parent[e];
            while let Some(q) = p {
                if keep[q] {
                    break;
                }
                p = self.parent[q];
            }
            let np = p.map(|q| new_index[q]);
            parent.push(np);
            match np {
                Some(q) => children[q].push(i),
                None => roots.push(i),
            }
        }
        let labels = kept.iter().map(|&e| self.labels[e].clone()).collect();
        (Self::assemble(parent, children, roots, labels), kept)
    }

    /// Child counts in preorder, preceded by the root vertex's count. Two
    /// ordered forests are isomorphic iff their keys are equal.
    pub fn shape_key(&self) -> Vec<u32> {
        let mut k = Vec::with_capacity(self.len() + 1);
        k.push(self.roots.len() as u32);
        k.extend(self.children.iter().map(|c| c.len() as u32));
        k
    }

    /// Same ordered topology, labels ignored.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.parent == other.parent && self.roots == other.roots
    }

    /// Reorders children: `perms[v]` permutes the child list of vertex `v`,
    /// where vertex 0 is the root vertex and vertex `e + 1` lies below edge
    /// `e`. Returns the new tree and `new_index[old]`.
    pub fn permuted(&self, perms: &[Vec<usize>]) -> (Self, Vec<usize>) {
        let roots: Vec<usize> = perms[0].iter().map(|&i| self.roots[i]).collect();
        let children: Vec<Vec<usize>> = (0..self.len())
            .map(|e| perms[e + 1].iter().map(|&i| self.children[e][i]).collect())
            .collect();
        Self::from_children(&roots, &children, Some(&self.labels)).expect("permutation of a valid tree")
    }
}
