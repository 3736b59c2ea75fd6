//! Geodesic prototypes of a dataset: Fréchet mean, centroid, circumcenter.
//!
//! All three only need distances and points along geodesics, so they work
//! with either metric. The data are sorted by canonical form first, which
//! makes every result independent of the input order.

use rayon::prelude::*;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::labels::LabelConstraint;
use crate::metric::{self, Metric};
use crate::qed::GeodesicPath;
use crate::tree_model::TreeShape;

pub const DEFAULT_MAX_ITER: usize = 1000;
/// Default tolerance relative to the dataset diameter.
pub const DEFAULT_REL_TOL: f64 = 1e-6;
/// Largest set for which the centroid recursion runs over every subset.
pub const CENTROID_EXACT_LIMIT: usize = 8;
const INNER_REL: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct Dataset {
    pub shapes: Vec<TreeShape>,
    pub metric: Metric,
    pub ordered: bool,
    pub labels: Option<LabelConstraint>,
}

impl Dataset {
    pub fn new(mut shapes: Vec<TreeShape>, metric: Metric) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::Parameter("dataset is empty".into()));
        }
        for s in &shapes[1..] {
            s.layout().check_same(&shapes[0].layout())?;
        }
        shapes.sort_by(|a, b| a.cmp(b).then_with(|| a.topology().labels().cmp(b.topology().labels())));
        Ok(Dataset { shapes, metric, ordered: true, labels: None })
    }

    pub fn unordered(mut self, unordered: bool) -> Self {
        self.ordered = !unordered;
        self
    }

    pub fn with_labels(mut self, labels: Option<LabelConstraint>) -> Self {
        self.labels = labels;
        self
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn distance(&self, a: &TreeShape, b: &TreeShape) -> Result<f64> {
        metric::distance(&self.metric, a, b, self.ordered, self.labels.as_ref())
    }

    pub fn path(&self, a: &TreeShape, b: &TreeShape) -> Result<GeodesicPath> {
        Ok(metric::geodesic(&self.metric, a, b, self.ordered, self.labels.as_ref())?.path)
    }

    /// Point at arc-length fraction `t` from `a` towards `b`.
    pub fn toward(&self, a: &TreeShape, b: &TreeShape, t: f64) -> Result<TreeShape> {
        if t <= 0.0 || a == b {
            return Ok(a.clone());
        }
        if t >= 1.0 {
            return Ok(b.clone());
        }
        self.path(a, b)?.point(t)
    }

    pub fn distances_to(&self, x: &TreeShape) -> Result<Vec<f64>> {
        self.shapes.par_iter().map(|s| self.distance(x, s)).collect()
    }

    pub fn diameter(&self) -> Result<f64> {
        let n = self.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let d: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| self.distance(&self.shapes[i], &self.shapes[j]))
            .collect::<Result<_>>()?;
        Ok(d.into_iter().fold(0.0, f64::max))
    }

    fn tolerance(&self, tol: Option<f64>) -> Result<f64> {
        match tol {
            Some(t) if t > 0.0 => Ok(t),
            Some(t) => Err(Error::Parameter(format!("tolerance {t} must be positive"))),
            None => Ok((DEFAULT_REL_TOL * self.diameter()?).max(f64::MIN_POSITIVE)),
        }
    }
}

/// Point halfway along the geodesic.
pub fn midpoint(ds: &Dataset, s: &TreeShape, t: &TreeShape) -> Result<TreeShape> {
    ds.toward(s, t, 0.5)
}

#[derive(Clone, Debug)]
pub struct MeanResult {
    pub shape: TreeShape,
    /// Sum of squared distances to the data at `shape`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the end of every pass through the data.
    pub trace: Vec<f64>,
}

fn objective(ds: &Dataset, x: &TreeShape) -> Result<f64> {
    Ok(ds.distances_to(x)?.iter().map(|d| d * d).sum())
}

/// Inductive mean: step `k` moves fraction `1 / (k + 1)` of the way to the
/// next data point, cycling through the data. Iterates are compared at the
/// end of each pass and the best one seen is returned.
pub fn frechet_mean(ds: &Dataset, max_iter: usize, tol: Option<f64>) -> Result<MeanResult> {
    let tol = ds.tolerance(tol)?;
    let n = ds.len();
    let mut y = ds.shapes[0].clone();
    let mut best = (objective(ds, &y)?, y.clone());
    let mut trace = vec![best.0];
    if n == 1 {
        return Ok(MeanResult { shape: y, objective: 0.0, iterations: 0, converged: true, trace });
    }
    let mut last_pass_end: Option<TreeShape> = None;
    let mut k = 1;
    while k <= max_iter {
        y = ds.toward(&y, &ds.shapes[k % n], 1.0 / (k as f64 + 1.0))?;
        if (k + 1) % n == 0 {
            let f = objective(ds, &y)?;
            trace.push(f);
            if f < best.0 {
                best = (f, y.clone());
            }
            if let Some(prev) = &last_pass_end {
                if ds.distance(prev, &y)? < tol {
                    return Ok(MeanResult { shape: best.1, objective: best.0, iterations: k, converged: true, trace });
                }
            }
            last_pass_end = Some(y.clone());
        }
        k += 1;
    }
    Ok(MeanResult { shape: best.1, objective: best.0, iterations: max_iter, converged: false, trace })
}

#[derive(Clone, Debug)]
pub struct CentroidResult {
    pub shape: TreeShape,
    pub iterations: usize,
    pub converged: bool,
    /// Diameter of the final iterated set.
    pub spread: f64,
}

fn set_diameter(ds: &Dataset, set: &[TreeShape]) -> Result<f64> {
    let n = set.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let d: Vec<f64> = pairs.par_iter().map(|&(i, j)| ds.distance(&set[i], &set[j])).collect::<Result<_>>()?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

struct CentroidRun<'a> {
    ds: &'a Dataset,
    max_iter: usize,
    rng: ChaCha8Rng,
    iterations: usize,
    converged: bool,
}

impl CentroidRun<'_> {
    /// Subset centroids are solved to `INNER_REL · tol`: their errors add up
    /// in the limit, and a child that only matched its parent's tolerance
    /// would stall the parent just above it. Only the outermost loop
    /// (`top`) reports iterations and convergence.
    fn centroid(&mut self, set: Vec<TreeShape>, tol: f64, top: bool) -> Result<(TreeShape, f64)> {
        let n = set.len();
        if n == 1 {
            return Ok((set[0].clone(), 0.0));
        }
        if n == 2 {
            return Ok((midpoint(self.ds, &set[0], &set[1])?, 0.0));
        }
        let mut cur = set;
        let mut spread = set_diameter(self.ds, &cur)?;
        for it in 0..self.max_iter {
            if spread < tol {
                if top {
                    self.iterations = it;
                }
                return Ok((cur[0].clone(), spread));
            }
            let subsets: Vec<Vec<TreeShape>> = if n <= CENTROID_EXACT_LIMIT {
                (0..n)
                    .map(|skip| cur.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, s)| s.clone()).collect())
                    .collect()
            } else {
                (0..n)
                    .map(|_| sample(&mut self.rng, n, n - 1).into_iter().map(|i| cur[i].clone()).collect())
                    .collect()
            };
            let inner = INNER_REL * tol;
            let mut next = Vec::with_capacity(n);
            for sub in subsets {
                next.push(self.centroid(sub, inner, false)?.0);
            }
            cur = next;
            spread = set_diameter(self.ds, &cur)?;
        }
        if top {
            self.iterations = self.max_iter;
            self.converged = spread < tol;
        }
        Ok((cur[0].clone(), spread))
    }
}

/// Recursive centroid: the set is replaced by the centroids of its
/// `(n − 1)`-subsets until its diameter drops below `tol`; two shapes have
/// their midpoint as centroid. Above [`CENTROID_EXACT_LIMIT`] shapes, `n`
/// random subsets (seeded by `seed`) replace the exhaustive ones.
pub fn centroid(ds: &Dataset, max_iter: usize, tol: Option<f64>, seed: u64) -> Result<CentroidResult> {
    if ds.len() < 2 {
        return Err(Error::Parameter("centroid needs at least two shapes".into()));
    }
    let tol = ds.tolerance(tol)?;
    let mut run = CentroidRun { ds, max_iter, rng: ChaCha8Rng::seed_from_u64(seed), iterations: 0, converged: true };
    let (shape, spread) = run.centroid(ds.shapes.clone(), tol, true)?;
    Ok(CentroidResult { shape, iterations: run.iterations, converged: run.converged, spread })
}

#[derive(Clone, Debug)]
pub struct CircumResult {
    pub shape: TreeShape,
    pub radius: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Smallest enclosing ball by geodesic pulls. Each round tries moving a
/// fraction `step` of the way towards the farthest data points and towards
/// midpoints between them; the best strict improvement is taken, otherwise
/// the step is halved. Stops once `step` times the radius is below `tol`.
pub fn circumcenter(ds: &Dataset, max_iter: usize, tol: Option<f64>) -> Result<CircumResult> {
    let tol = ds.tolerance(tol)?;
    let n = ds.len();
    if n == 1 {
        return Ok(CircumResult { shape: ds.shapes[0].clone(), radius: 0.0, iterations: 0, converged: true });
    }
    let radius_at = |x: &TreeShape| -> Result<(f64, Vec<f64>)> {
        let d = ds.distances_to(x)?;
        Ok((d.iter().copied().fold(0.0, f64::max), d))
    };
    // start at the midpoint of the farthest pair
    let mut far = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = ds.distance(&ds.shapes[i], &ds.shapes[j])?;
            if d > far.2 {
                far = (i, j, d);
            }
        }
    }
    let mut x = midpoint(ds, &ds.shapes[far.0], &ds.shapes[far.1])?;
    let (mut r, mut dist) = radius_at(&x)?;
    let mut step = 0.5;
    for it in 0..max_iter {
        if step * r < tol || r == 0.0 {
            return Ok(CircumResult { shape: x, radius: r, iterations: it, converged: true });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
        let top = &order[..n.min(3)];
        let mut targets: Vec<TreeShape> = top.iter().map(|&i| ds.shapes[i].clone()).collect();
        for a in 0..top.len() {
            for b in a + 1..top.len() {
                targets.push(midpoint(ds, &ds.shapes[top[a]], &ds.shapes[top[b]])?);
            }
        }
        let trials: Vec<(f64, Vec<f64>, TreeShape)> = targets
            .par_iter()
            .map(|q| {
                let y = ds.toward(&x, q, step)?;
                let (ry, dy) = radius_at(&y)?;
                Ok((ry, dy, y))
            })
            .collect::<Result<_>>()?;
        let best = trials
            .into_iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
            .map(|(_, t)| t)
            .unwrap();
        if best.0 < r {
            (r, dist, x) = best;
            step = (step * 1.5).min(0.5);
        } else {
            step *= 0.5;
        }
    }
    Ok(CircumResult { shape: x, radius: r, iterations: max_iter, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qed::QedConfig;
    use crate::tree_model::Layout;

    fn s(text: &str) -> TreeShape {
        TreeShape::from_bracket(Layout::scalar(), text).unwrap()
    }

    fn qed(shapes: &[&str]) -> Dataset {
        Dataset::new(shapes.iter().map(|t| s(t)).collect(), Metric::Qed(QedConfig::default())).unwrap()
    }

    fn first(x: &TreeShape) -> Vec<f64> {
        x.attrs().iter().map(|a| a.coords()[0]).collect()
    }

    #[test]
    fn single_shape_mean() {
        let ds = qed(&["1[2,3]"]);
        let m = frechet_mean(&ds, 100, None).unwrap();
        assert_eq!(m.shape, s("1[2,3]"));
        assert_eq!(m.objective, 0.0);
    }

    #[test]
    fn flat_mean_and_centroid_are_arithmetic() {
        let ds = qed(&["1[2,3]", "2[2,4]", "3[5,3]"]);
        let m = frechet_mean(&ds, 1000, Some(1e-10)).unwrap();
        assert!(m.converged);
        for (a, b) in first(&m.shape).iter().zip([2.0, 3.0, 10.0 / 3.0]) {
            assert!((a - b).abs() < 1e-9);
        }
        let c = centroid(&ds, 200, Some(1e-10), 0).unwrap();
        for (a, b) in first(&c.shape).iter().zip([2.0, 3.0, 10.0 / 3.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn order_does_not_matter() {
        let a = frechet_mean(&qed(&["1[2,3]", "2[2,4]", "3[5,3]"]), 100, Some(1e-10)).unwrap();
        let b = frechet_mean(&qed(&["3[5,3]", "1[2,3]", "2[2,4]"]), 100, Some(1e-10)).unwrap();
        assert_eq!(a.shape, b.shape);
    }

    #[test]
    fn circumcenter_of_collinear_points() {
        let ds = qed(&["1", "2", "4"]);
        let c = circumcenter(&ds, 10_000, Some(1e-9)).unwrap();
        assert!(c.converged);
        assert!((c.radius - 1.5).abs() < 1e-8);
        assert!((first(&c.shape)[0] - 2.5).abs() < 1e-8);
    }

    #[test]
    fn two_point_circumcenter_is_the_midpoint() {
        let ds = qed(&["1[2,3]", "2[2,4]"]);
        let c = circumcenter(&ds, 100, Some(1e-9)).unwrap();
        let half = ds.distance(&ds.shapes[0], &ds.shapes[1]).unwrap() / 2.0;
        assert!((c.radius - half).abs() < 1e-9);
    }
}
