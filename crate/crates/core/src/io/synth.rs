//! Seeded synthetic tree-shapes.
//!
//! Edges are landmark chains grown with bounded random turning; children
//! branch off to both sides of their parent's final direction. Branch drops
//! remove terminal bifurcations (a pair of leaf edges below a common parent)
//! and draw from their own random stream, so the drop rate does not change
//! the geometry of the surviving branches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tree_model::{Attribute, CombinatorialTree, Layout, TreeShape, MAX_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    /// Maximal number of edges on a root-to-leaf path.
    pub depth: usize,
    /// Spatial dimension (2 or 3).
    pub dim: usize,
    pub landmarks: usize,
    pub count: usize,
    /// Probability of dropping each terminal bifurcation.
    pub drop: f64,
    /// Probability that an edge above the deepest level bifurcates.
    /// `1.0` gives complete binary trees.
    pub branching: f64,
    /// When set, all shapes share one template tree and differ by this much
    /// relative jitter in edge lengths and angles.
    pub template_jitter: Option<f64>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            depth: 3,
            dim: 2,
            landmarks: 6,
            count: 10,
            drop: 0.0,
            branching: 0.8,
            template_jitter: None,
            seed: 0,
        }
    }
}

const MAX_TURN: f64 = 0.15;
const DECAY: f64 = 0.7;

/// Nominal geometry of one edge before jitter.
#[derive(Clone, Debug)]
struct EdgePlan {
    parent: Option<usize>,
    length: f64,
    /// Branching angle relative to the parent's final direction.
    angle: f64,
    /// Out-of-plane tilt (3-D only).
    tilt: f64,
    turns: Vec<f64>,
}

fn plan_tree(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<EdgePlan> {
    let segs = spec.landmarks - 1;
    let mut edges = Vec::new();
    let mut stack = vec![(None, 1usize, 0.0)];
    while let Some((parent, level, angle)) = stack.pop() {
        let e = edges.len();
        edges.push(EdgePlan {
            parent,
            length: DECAY.powi(level as i32 - 1) * rng.gen_range(0.8..1.2),
            angle,
            tilt: rng.gen_range(-0.3..0.3),
            turns: (0..segs).map(|_| rng.gen_range(-MAX_TURN..MAX_TURN)).collect(),
        });
        if level < spec.depth && (level == 1 || rng.gen_bool(spec.branching)) {
            let spread = rng.gen_range(0.35..0.75);
            // right child pushed first so the left one is visited first
            stack.push((Some(e), level + 1, -spread));
            stack.push((Some(e), level + 1, spread));
        }
    }
    edges
}

fn jittered(plan: &[EdgePlan], jitter: f64, rng: &mut ChaCha8Rng) -> Vec<EdgePlan> {
    plan.iter()
        .map(|p| {
            let mut q = p.clone();
            q.length *= 1.0 + jitter * rng.gen_range(-1.0..1.0);
            q.angle += jitter * rng.gen_range(-1.0..1.0);
            q.tilt += jitter * rng.gen_range(-1.0..1.0);
            for t in &mut q.turns {
                *t += jitter * rng.gen_range(-1.0..1.0);
            }
            q
        })
        .collect()
}

/// Edges to keep after dropping terminal bifurcations with probability `drop`.
fn drop_mask(plan: &[EdgePlan], drop: f64, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let m = plan.len();
    let mut children = vec![Vec::new(); m];
    for (e, p) in plan.iter().enumerate() {
        if let Some(q) = p.parent {
            children[q].push(e);
        }
    }
    let mut keep = vec![true; m];
    for c in &children {
        let terminal = c.len() == 2 && c.iter().all(|&x| children[x].is_empty());
        if terminal && rng.gen_bool(drop) {
            for &x in c {
                keep[x] = false;
            }
        }
    }
    keep
}

fn rotate(v: [f64; 3], angle: f64, tilt: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let w = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
    let (st, ct) = tilt.sin_cos();
    let h = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if h == 0.0 {
        return w;
    }
    let (ux, uy) = (w[0] / h, w[1] / h);
    [ux * (h * ct - w[2] * st), uy * (h * ct - w[2] * st), h * st + w[2] * ct]
}

fn build(spec: &SynthSpec, plan: &[EdgePlan], keep: &[bool]) -> Result<TreeShape> {
    let layout = Layout::new(spec.dim, spec.landmarks)?;
    let segs = spec.landmarks - 1;
    let m = plan.len();
    let mut end_dir = vec![[0.0, 1.0, 0.0]; m];
    let mut attrs = Vec::with_capacity(m);
    for (e, p) in plan.iter().enumerate() {
        let start = p.parent.map_or([0.0, 1.0, 0.0], |q| end_dir[q]);
        let tilt = if spec.dim == 3 { p.tilt } else { 0.0 };
        let mut dir = rotate(start, p.angle, tilt);
        let step = p.length / segs as f64;
        let mut pt = [0.0; 3];
        let mut points = vec![vec![0.0; spec.dim]];
        for &turn in &p.turns {
            dir = rotate(dir, turn, 0.0);
            for k in 0..3 {
                pt[k] += step * dir[k];
            }
            points.push(pt[..spec.dim].to_vec());
        }
        end_dir[e] = dir;
        attrs.push(Attribute::from_landmarks(layout, &points)?);
    }
    let mut children = vec![Vec::new(); m];
    let mut roots = Vec::new();
    for (e, p) in plan.iter().enumerate() {
        match p.parent {
            Some(q) => children[q].push(e),
            None => roots.push(e),
        }
    }
    let (full, index) = CombinatorialTree::from_children(&roots, &children, None)?;
    let mut ordered = vec![Attribute::zeros(layout); m];
    let mut keep_new = vec![false; m];
    for e in 0..m {
        ordered[index[e]] = attrs[e].clone();
        keep_new[index[e]] = keep[e];
    }
    let (topo, kept) = full.contract(&keep_new);
    let attrs = kept.iter().map(|&e| ordered[e].clone()).collect();
    TreeShape::new(layout, topo, attrs, None)
}

fn validate(spec: &SynthSpec) -> Result<()> {
    if spec.depth == 0 || spec.depth > MAX_DEPTH {
        return Err(Error::Parameter(format!("depth must be in 1..={MAX_DEPTH}")));
    }
    if !(2..=3).contains(&spec.dim) {
        return Err(Error::Parameter("synthetic shapes are planar or spatial".into()));
    }
    if spec.landmarks < 2 {
        return Err(Error::Parameter("at least two landmarks per edge".into()));
    }
    if !(0.0..=1.0).contains(&spec.drop) || !(0.0..=1.0).contains(&spec.branching) {
        return Err(Error::Parameter("probabilities must lie in [0, 1]".into()));
    }
    Ok(())
}

/// One random shape without branch drops, drawn from `rng`.
pub fn sample_shape(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<TreeShape> {
    validate(spec)?;
    let plan = plan_tree(spec, rng);
    build(spec, &plan, &vec![true; plan.len()])
}

/// `spec.count` seeded random shapes.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Vec<TreeShape>> {
    validate(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drops = ChaCha8Rng::seed_from_u64(spec.seed);
    drops.set_stream(1);
    let template = spec.template_jitter.map(|_| plan_tree(spec, &mut rng));
    (0..spec.count)
        .map(|_| {
            let plan = match (&template, spec.template_jitter) {
                (Some(t), Some(j)) => jittered(t, j, &mut rng),
                _ => plan_tree(spec, &mut rng),
            };
            let keep = drop_mask(&plan, spec.drop, &mut drops);
            build(spec, &plan, &keep)
        })
        .collect()
}
