use super::attribute::{Attribute, Layout, EPS_ZERO};
use super::maximal::MaximalTree;
use super::shape::TreeShape;
use super::topology::CombinatorialTree;
use crate::error::{Error, Result};

/// A point of the pre-shape space: one attribute per maximal-tree edge
/// (heap numbering).
#[derive(Clone, Debug, PartialEq)]
pub struct PreShape {
    tree: MaximalTree,
    layout: Layout,
    attrs: Vec<Attribute>,
}

impl PreShape {
    pub fn new(tree: MaximalTree, layout: Layout, attrs: Vec<Attribute>) -> Result<Self> {
        if attrs.len() != tree.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} attributes for {} maximal-tree edges",
                attrs.len(),
                tree.edge_count()
            )));
        }
        if attrs.iter().any(|a| a.coords().len() != layout.free_len()) {
            return Err(Error::DimensionMismatch("attribute length".into()));
        }
        Ok(PreShape { tree, layout, attrs })
    }

    pub fn zeros(tree: MaximalTree, layout: Layout) -> Self {
        PreShape { tree, layout, attrs: vec![Attribute::zeros(layout); tree.edge_count()] }
    }

    pub fn tree(&self) -> MaximalTree {
        self.tree
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn attrs(&self) -> &[Attribute] {
        &self.attrs
    }

    pub fn attr(&self, e: usize) -> &Attribute {
        &self.attrs[e]
    }

    pub fn set(&mut self, e: usize, a: Attribute) {
        assert_eq!(a.coords().len(), self.layout.free_len());
        self.attrs[e] = a;
    }

    pub fn norm(&self) -> f64 {
        self.attrs.iter().map(Attribute::norm_sq).sum::<f64>().sqrt()
    }

    pub(crate) fn check_compatible(&self, other: &PreShape) -> Result<()> {
        self.layout.check_same(&other.layout)?;
        if self.tree != other.tree {
            return Err(Error::DimensionMismatch(format!(
                "maximal trees of depth {} and {}",
                self.tree.depth(),
                other.tree.depth()
            )));
        }
        Ok(())
    }

    /// Point at parameter `t` of the straight segment to `other`.
    pub fn lerp(&self, other: &PreShape, t: f64) -> Result<PreShape> {
        self.check_compatible(other)?;
        let attrs = self.attrs.iter().zip(&other.attrs).map(|(a, b)| a.lerp(b, t)).collect();
        Ok(PreShape { tree: self.tree, layout: self.layout, attrs })
    }

    pub fn collapse(&self) -> CollapsedTree {
        collapse(self)
    }
}

/// Attributed tree with every collapsed edge contracted. `source[e]` is the
/// maximal-tree edge that carried edge `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapsedTree {
    pub layout: Layout,
    pub topology: CombinatorialTree,
    pub attributes: Vec<Attribute>,
    pub source: Vec<usize>,
}

impl CollapsedTree {
    pub fn to_shape(&self) -> TreeShape {
        TreeShape::new(self.layout, self.topology.clone(), self.attributes.clone(), None)
            .expect("collapsed trees have no zero edges")
    }
}

/// Contracts every collapsed edge of `x`, keeping depth-first order.
pub fn collapse(x: &PreShape) -> CollapsedTree {
    let (topo, heap) = x.tree.topology();
    let keep: Vec<bool> = heap.iter().map(|&h| !x.attrs[h].is_collapsed(x.layout)).collect();
    let (topology, kept) = topo.contract(&keep);
    let source: Vec<usize> = kept.iter().map(|&i| heap[i]).collect();
    let attributes = source.iter().map(|&h| x.attrs[h].clone()).collect();
    CollapsedTree { layout: x.layout, topology, attributes, source }
}

/// Same collapsed ordered topology and attributes within `EPS_ZERO` per coordinate.
pub fn equivalent(x: &PreShape, y: &PreShape) -> Result<bool> {
    x.check_compatible(y)?;
    let (a, b) = (collapse(x), collapse(y));
    Ok(a.topology.same_shape(&b.topology)
        && a.attributes.iter().zip(&b.attributes).all(|(p, q)| {
            p.coords().iter().zip(q.coords()).all(|(u, v)| (u - v).abs() <= EPS_ZERO)
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(v: f64) -> Attribute {
        Attribute::scalar(Layout::scalar(), v)
    }

    #[test]
    fn all_zero_collapses_to_one_vertex() {
        let x = PreShape::zeros(MaximalTree::new(3).unwrap(), Layout::scalar());
        let c = collapse(&x);
        assert!(c.topology.is_empty());
        assert!(c.to_shape().is_trivial());
    }

    #[test]
    fn single_contraction_keeps_order() {
        let mt = MaximalTree::new(2).unwrap();
        let x = PreShape::new(mt, Layout::scalar(), vec![sc(1.0), sc(0.0), sc(2.0)]).unwrap();
        let c = collapse(&x);
        assert_eq!(c.topology.len(), 2);
        assert_eq!(c.topology.children(0), &[1]);
        assert_eq!(c.source, vec![0, 2]);
        assert_eq!(c.attributes[1], sc(2.0));
    }

    #[test]
    fn internal_contraction_makes_trifurcation() {
        let mt = MaximalTree::new(3).unwrap();
        let mut attrs: Vec<Attribute> = (0..7).map(|i| sc(1.0 + i as f64)).collect();
        attrs[1] = sc(0.0);
        let x = PreShape::new(mt, Layout::scalar(), attrs).unwrap();
        let c = collapse(&x);
        assert_eq!(c.topology.len(), 6);
        assert_eq!(c.topology.children(0).len(), 3);
        // left grandchildren 3, 4 then the right child 2
        assert_eq!(c.source, vec![0, 3, 4, 2, 5, 6]);
    }

    #[test]
    fn equivalence_across_placements() {
        let mt = MaximalTree::new(2).unwrap();
        let l = Layout::scalar();
        let x = PreShape::new(mt, l, vec![sc(1.0), sc(0.0), sc(0.0)]).unwrap();
        let y = PreShape::new(mt, l, vec![sc(0.0), sc(0.0), sc(1.0)]).unwrap();
        let z = PreShape::new(mt, l, vec![sc(0.0), sc(1.0 + 10.0 * EPS_ZERO), sc(0.0)]).unwrap();
        assert!(equivalent(&x, &y).unwrap());
        assert!(!equivalent(&x, &z).unwrap());
        assert_eq!(x.norm(), y.norm());
    }

    #[test]
    fn mismatched_trees_rejected() {
        let l = Layout::scalar();
        let x = PreShape::zeros(MaximalTree::new(2).unwrap(), l);
        let y = PreShape::zeros(MaximalTree::new(3).unwrap(), l);
        assert!(matches!(equivalent(&x, &y), Err(Error::DimensionMismatch(_))));
    }
}
