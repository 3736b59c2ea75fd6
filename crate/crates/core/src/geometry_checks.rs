//! Numerical probes of metric and curvature properties.
//!
//! Probes run on computed paths. For the approximate QED a negative slack can
//! come from curvature or from the approximation itself, so reports carry
//! magnitudes rather than a bare pass/fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::preshape_metrics::{d1, d2};
use crate::qed::{qed_distance, QedConfig};
use crate::ted::ted_ordered;
use crate::tree_model::{collapse, MaximalTree, PreShape, TreeShape, DEFAULT_DEPTH};

/// Absolute slack allowed when placing a comparison triangle.
const TRIANGLE_SLACK: f64 = 1e-10;
/// Relative tolerance (of the perimeter) for thinness verdicts.
pub const THIN_TOL: f64 = 1e-6;

/// Planar triangle with `|p0 p1| = a`, `|p1 p2| = b`, `|p0 p2| = c`,
/// `p0` at the origin and `p1` on the positive x-axis.
pub fn comparison_triangle(a: f64, b: f64, c: f64) -> Result<[[f64; 2]; 3]> {
    let (x, y, z) = (a.max(0.0), b.max(0.0), c.max(0.0));
    let worst = (x - y - z).max(y - x - z).max(z - x - y);
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || worst > TRIANGLE_SLACK || a.min(b).min(c) < -TRIANGLE_SLACK {
        return Err(Error::InfeasibleTriangle(a, b, c));
    }
    if x == 0.0 {
        return Ok([[0.0, 0.0], [0.0, 0.0], [z, 0.0]]);
    }
    let px = ((x * x + z * z - y * y) / (2.0 * x)).clamp(-z, z);
    let py = (z * z - px * px).max(0.0).sqrt();
    Ok([[0.0, 0.0], [x, 0.0], [px, py]])
}

fn planar_dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Thin,
    Violated,
    Degenerate,
}

#[derive(Clone, Debug)]
pub struct TriangleSample {
    /// Side `i` runs from vertex `i` to vertex `(i + 1) % 3`.
    pub side: usize,
    pub t: f64,
    pub measured: f64,
    pub comparison: f64,
    /// `comparison − measured`; CAT(0) requires it to be non-negative.
    pub slack: f64,
}

#[derive(Clone, Debug)]
pub struct TriangleReport {
    pub vertices: [TreeShape; 3],
    pub sides: [f64; 3],
    pub perimeter: f64,
    pub samples: Vec<TriangleSample>,
    pub min_slack: f64,
    pub max_abs_slack: f64,
    pub verdict: Verdict,
    pub metric: Metric,
}

/// Compares distances from points on each side to the opposite vertex with
/// the same quantity in the planar comparison triangle, at `samples`
/// interior points per side.
pub fn cat0_probe(metric: &Metric, s: [&TreeShape; 3], samples: usize) -> Result<TriangleReport> {
    let mut paths = Vec::with_capacity(3);
    let mut sides = [0.0; 3];
    for i in 0..3 {
        let (d, p) = metric.path(s[i], s[(i + 1) % 3], None)?;
        sides[i] = d;
        paths.push(p);
    }
    let perimeter = sides.iter().sum::<f64>();
    let vertices = [s[0].clone(), s[1].clone(), s[2].clone()];
    if perimeter == 0.0 || sides.iter().any(|&d| d == 0.0) {
        return Ok(TriangleReport {
            vertices,
            sides,
            perimeter,
            samples: vec![],
            min_slack: 0.0,
            max_abs_slack: 0.0,
            verdict: Verdict::Degenerate,
            metric: *metric,
        });
    }
    let planar = comparison_triangle(sides[0], sides[1], sides[2])?;
    let jobs: Vec<(usize, f64)> = (0..3)
        .flat_map(|side| (1..=samples).map(move |k| (side, k as f64 / (samples + 1) as f64)))
        .collect();
    let out: Vec<TriangleSample> = jobs
        .par_iter()
        .map(|&(side, t)| {
            let x = paths[side].point(t)?;
            let opposite = (side + 2) % 3;
            let measured = metric.distance(&x, s[opposite], None)?;
            let (p, q) = (planar[side], planar[(side + 1) % 3]);
            let px = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            let comparison = planar_dist(px, planar[opposite]);
            Ok(TriangleSample { side, t, measured, comparison, slack: comparison - measured })
        })
        .collect::<Result<_>>()?;
    let min_slack = out.iter().map(|x| x.slack).fold(f64::INFINITY, f64::min);
    let max_abs_slack = out.iter().map(|x| x.slack.abs()).fold(0.0, f64::max);
    let verdict = if min_slack >= -THIN_TOL * perimeter { Verdict::Thin } else { Verdict::Violated };
    Ok(TriangleReport { vertices, sides, perimeter, samples: out, min_slack, max_abs_slack, verdict, metric: *metric })
}

/// Distance under test by the axiom suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxiomMetric {
    Ted,
    Qed(QedConfig),
    /// Sum of landmark norms on maximal-tree representatives.
    D1,
    /// Euclidean norm on maximal-tree representatives.
    D2,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AxiomReport {
    pub trials: usize,
    pub symmetry_violations: usize,
    pub identity_violations: usize,
    pub triangle_violations: usize,
    pub worst_symmetry: f64,
    pub worst_identity: f64,
    /// Largest `d(x, z) − d(x, y) − d(y, z)` seen, violating or not.
    pub worst_triangle: f64,
}

impl AxiomReport {
    pub fn violations(&self) -> usize {
        self.symmetry_violations + self.identity_violations + self.triangle_violations
    }
}

fn axiom_distance(m: &AxiomMetric, a: &TreeShape, b: &TreeShape, mt: MaximalTree) -> Result<f64> {
    match m {
        AxiomMetric::Ted => ted_ordered(a, b, None),
        AxiomMetric::Qed(cfg) => qed_distance(a, b, cfg, None),
        AxiomMetric::D1 => d1(&a.to_preshape(mt)?, &b.to_preshape(mt)?),
        AxiomMetric::D2 => d2(&a.to_preshape(mt)?, &b.to_preshape(mt)?),
    }
}

/// Counts violations of symmetry, identity and the triangle inequality on
/// `trials` triples drawn from `sampler`. Tolerances are `tol` times the
/// scale of the triple.
pub fn metric_axiom_suite<F>(sampler: F, trials: usize, metric: AxiomMetric, seed: u64, tol: f64) -> Result<AxiomReport>
where
    F: Fn(&mut ChaCha8Rng) -> TreeShape,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<[TreeShape; 3]> = (0..trials).map(|_| [sampler(&mut rng), sampler(&mut rng), sampler(&mut rng)]).collect();
    let depth = triples
        .iter()
        .flatten()
        .map(TreeShape::required_depth)
        .max()
        .unwrap_or(1)
        .max(DEFAULT_DEPTH);
    let mt = MaximalTree::new(depth)?;
    let rows: Vec<[f64; 3]> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let d = |a: &TreeShape, b: &TreeShape| axiom_distance(&metric, a, b, mt);
            let scale = 1.0 + x.norm() + y.norm() + z.norm();
            let sym = (d(x, y)? - d(y, x)?).abs() / scale;
            let id = d(x, x)?.abs().max(d(y, y)?.abs()) / scale;
            let tri = (d(x, z)? - d(x, y)? - d(y, z)?) / scale;
            Ok([sym, id, tri])
        })
        .collect::<Result<_>>()?;
    let mut r = AxiomReport { trials, worst_triangle: f64::NEG_INFINITY, ..Default::default() };
    for [sym, id, tri] in rows {
        r.symmetry_violations += (sym > tol) as usize;
        r.identity_violations += (id > tol) as usize;
        r.triangle_violations += (tri > tol) as usize;
        r.worst_symmetry = r.worst_symmetry.max(sym);
        r.worst_identity = r.worst_identity.max(id);
        r.worst_triangle = r.worst_triangle.max(tri);
    }
    Ok(r)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OrderingReport {
    pub trials: usize,
    /// Pairs with QED above TED.
    pub qed_above_ted: usize,
    /// Pairs where adding stretches increased the value.
    pub not_monotone_in_k: usize,
    /// Largest `QED − TED`.
    pub worst_gap: f64,
}

/// Checks `QED_K ≤ TED` and `QED_K ≤ QED_1` on sampled pairs.
pub fn ordering_suite<F>(sampler: F, trials: usize, cfg: QedConfig, seed: u64, tol: f64) -> Result<OrderingReport>
where
    F: Fn(&mut ChaCha8Rng) -> TreeShape,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(TreeShape, TreeShape)> = (0..trials).map(|_| (sampler(&mut rng), sampler(&mut rng))).collect();
    let k1 = QedConfig { k: 1, ..cfg };
    let rows: Vec<(f64, f64, f64)> = pairs
        .par_iter()
        .map(|(a, b)| Ok((qed_distance(a, b, &cfg, None)?, ted_ordered(a, b, None)?, qed_distance(a, b, &k1, None)?)))
        .collect::<Result<_>>()?;
    let mut r = OrderingReport { trials, worst_gap: f64::NEG_INFINITY, ..Default::default() };
    for (q, t, q1) in rows {
        r.qed_above_ted += (q > t + tol) as usize;
        r.not_monotone_in_k += (q > q1 + tol) as usize;
        r.worst_gap = r.worst_gap.max(q - t);
    }
    Ok(r)
}

/// Fraction of random perturbations of `shape` whose collapse is a binary
/// tree. The shape is placed on the maximal tree and every coordinate of
/// every maximal-tree edge, collapsed or not, receives independent noise
/// with total magnitude at most `radius` per edge.
pub fn genericity_probe(shape: &TreeShape, radius: f64, trials: usize, seed: u64) -> Result<f64> {
    if radius < 0.0 || !radius.is_finite() {
        return Err(Error::Parameter(format!("radius {radius} must be non-negative")));
    }
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is needed".into()));
    }
    let mt = MaximalTree::new(shape.required_depth().max(DEFAULT_DEPTH))?;
    let base = shape.to_preshape(mt)?;
    let layout = shape.layout();
    let per_coord = radius / (layout.free_len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut binary = 0;
    for _ in 0..trials {
        let mut attrs = base.attrs().to_vec();
        if radius > 0.0 {
            for a in &mut attrs {
                for c in a.coords_mut() {
                    *c += rng.gen_range(-per_coord..=per_coord);
                }
            }
        }
        let x = PreShape::new(mt, layout, attrs)?;
        binary += collapse(&x).topology.is_binary() as usize;
    }
    Ok(binary as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::Layout;

    fn s(text: &str) -> TreeShape {
        TreeShape::from_bracket(Layout::scalar(), text).unwrap()
    }

    #[test]
    fn comparison_triangles() {
        let p = comparison_triangle(3.0, 4.0, 5.0).unwrap();
        assert!((planar_dist(p[0], p[1]) - 3.0).abs() < 1e-12);
        assert!((planar_dist(p[1], p[2]) - 4.0).abs() < 1e-12);
        assert!((planar_dist(p[0], p[2]) - 5.0).abs() < 1e-12);
        let p = comparison_triangle(1.0, 1.0, 2.0).unwrap();
        assert!(p[2][1].abs() < 1e-12);
        assert!(comparison_triangle(1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn flat_triangle_has_zero_slack() {
        let m = Metric::Qed(QedConfig::default());
        let (a, b, c) = (s("1[2,3]"), s("1.1[2.1,2.9]"), s("1.05[1.9,3.2]"));
        let r = cat0_probe(&m, [&a, &b, &c], 5).unwrap();
        assert_eq!(r.verdict, Verdict::Thin);
        assert!(r.max_abs_slack < 1e-9 * r.perimeter);
    }

    #[test]
    fn genericity() {
        let bin = s("1[2,3]");
        let tri = s("1[2,3,4]");
        assert_eq!(genericity_probe(&bin, 0.0, 3, 0).unwrap(), 1.0);
        assert_eq!(genericity_probe(&tri, 0.0, 3, 0).unwrap(), 0.0);
        assert_eq!(genericity_probe(&tri, 1e-3, 200, 0).unwrap(), 1.0);
        assert_eq!(genericity_probe(&bin, 1e-12, 50, 0).unwrap(), 1.0);
    }
}
