//! The two pre-shape distances: sum of edge norms (`d1`) and the Euclidean
//! norm of the stacked attribute vector (`d2`).

use crate::error::Result;
use crate::tree_model::PreShape;

pub fn d1(x: &PreShape, y: &PreShape) -> Result<f64> {
    x.check_compatible(y)?;
    Ok(x.attrs().iter().zip(y.attrs()).map(|(a, b)| a.dist(b)).sum())
}

pub fn d2(x: &PreShape, y: &PreShape) -> Result<f64> {
    x.check_compatible(y)?;
    Ok(x.attrs().iter().zip(y.attrs()).map(|(a, b)| a.dist_sq(b)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::{Attribute, Layout, MaximalTree};

    fn pre(vals: &[[f64; 2]]) -> PreShape {
        let l = Layout::planar(2);
        let attrs = vals.iter().map(|v| Attribute::from_coords(l, v.to_vec()).unwrap()).collect();
        PreShape::new(MaximalTree::new(2).unwrap(), l, attrs).unwrap()
    }

    #[test]
    fn three_four_five() {
        let x = pre(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]);
        let y = pre(&[[3.0, 0.0], [1.0, 1.0], [0.0, 4.0]]);
        assert_eq!(d1(&x, &y).unwrap(), 7.0);
        assert_eq!(d2(&x, &y).unwrap(), 5.0);
        assert_eq!(d1(&x, &x).unwrap(), 0.0);
        assert_eq!(d2(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn mismatch_is_an_error() {
        let x = pre(&[[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]);
        let y = PreShape::zeros(MaximalTree::new(3).unwrap(), Layout::planar(2));
        assert!(d2(&x, &y).is_err());
    }
}
