use crate::error::{Error, Result};

/// Coordinates (and landmark norms) at or below this are treated as zero.
pub const EPS_ZERO: f64 = 1e-9;

/// Attribute space layout shared by every edge of a shape space: `landmarks`
/// points in R^`dim`, the first of which is pinned at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    pub dim: usize,
    pub landmarks: usize,
}

impl Layout {
    pub fn new(dim: usize, landmarks: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dim must be positive".into()));
        }
        if landmarks < 2 {
            return Err(Error::Parameter("need at least 2 landmarks per edge".into()));
        }
        Ok(Layout { dim, landmarks })
    }

    /// One free real coordinate per edge. Handy for the scalar toy trees.
    pub fn scalar() -> Self {
        Layout { dim: 1, landmarks: 2 }
    }

    pub fn planar(landmarks: usize) -> Self {
        Layout { dim: 2, landmarks }
    }

    /// Number of free coordinates per edge, `(landmarks - 1) * dim`.
    pub fn free_len(&self) -> usize {
        (self.landmarks - 1) * self.dim
    }

    pub(crate) fn check_same(&self, other: &Layout) -> Result<()> {
        if self != other {
            return Err(Error::DimensionMismatch(format!(
                "layouts (d={}, n={}) and (d={}, n={})",
                self.dim, self.landmarks, other.dim, other.landmarks
            )));
        }
        Ok(())
    }
}

/// Free landmark coordinates of one edge, landmark-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Attribute {
    coords: Vec<f64>,
}

impl Attribute {
    pub fn zeros(layout: Layout) -> Self {
        Attribute { coords: vec![0.0; layout.free_len()] }
    }

    pub fn from_coords(layout: Layout, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != layout.free_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} free coordinates, got {}",
                layout.free_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite attribute coordinate".into()));
        }
        Ok(Attribute { coords })
    }

    /// Attribute whose first free coordinate is `v` and all others zero.
    pub fn scalar(layout: Layout, v: f64) -> Self {
        let mut a = Attribute::zeros(layout);
        a.coords[0] = v;
        a
    }

    /// Builds from the full landmark list; the first landmark must be the origin.
    pub fn from_landmarks(layout: Layout, points: &[Vec<f64>]) -> Result<Self> {
        if points.len() != layout.landmarks {
            return Err(Error::Input(format!(
                "expected {} landmarks, got {}",
                layout.landmarks,
                points.len()
            )));
        }
        if points.iter().any(|p| p.len() != layout.dim) {
            return Err(Error::Input(format!("landmarks must have {} coordinates", layout.dim)));
        }
        if points[0].iter().any(|c| c.abs() > EPS_ZERO) {
            return Err(Error::Input("first landmark must be the origin".into()));
        }
        let coords = points[1..].iter().flatten().copied().collect();
        Attribute::from_coords(layout, coords)
    }

    /// Full landmark list including the pinned origin.
    pub fn landmarks(&self, layout: Layout) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; layout.dim]];
        out.extend(self.coords.chunks(layout.dim).map(|c| c.to_vec()));
        out
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Attribute) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn dist(&self, other: &Attribute) -> f64 {
        self.dist_sq(other).sqrt()
    }

    /// Collapsed iff every landmark lies within `EPS_ZERO` of the origin.
    pub fn is_collapsed(&self, layout: Layout) -> bool {
        self.coords
            .chunks(layout.dim)
            .all(|p| p.iter().map(|c| c * c).sum::<f64>() <= EPS_ZERO * EPS_ZERO)
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(&self, other: &Attribute, t: f64) -> Attribute {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + t * (b - a))
            .collect();
        Attribute { coords }
    }

    pub fn scaled(&self, s: f64) -> Attribute {
        Attribute { coords: self.coords.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Attribute) -> Attribute {
        Attribute {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Attribute) -> Attribute {
        Attribute {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }
}
