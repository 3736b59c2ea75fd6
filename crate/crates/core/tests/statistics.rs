//! Prototype computations and synthetic data.

mod common;

use common::scalar;
use treeshape::io::synth::{generate_synthetic, SynthSpec};
use treeshape::metric::Metric;
use treeshape::qed::QedConfig;
use treeshape::statistics::{centroid, circumcenter, frechet_mean, midpoint, Dataset};
use treeshape::tree_model::TreeShape;

fn qed() -> Metric {
    Metric::Qed(QedConfig::default())
}

#[test]
fn mean_of_two_shapes_is_their_midpoint() {
    let (a, b) = (scalar("1[0.2[1,3],1]"), scalar("1[1,0.2[3,1]]"));
    let ds = Dataset::new(vec![a.clone(), b.clone()], qed()).unwrap();
    let m = frechet_mean(&ds, 100, None).unwrap();
    let d = ds.distance(&a, &b).unwrap();
    assert!((ds.distance(&a, &m.shape).unwrap() - d / 2.0).abs() < 1e-9);
    assert!((ds.distance(&m.shape, &b).unwrap() - d / 2.0).abs() < 1e-9);
    // the midpoint of this pair is the trifurcation
    assert_eq!(m.shape.topology().children(0).len(), 3);
    assert!(midpoint(&ds, &a, &b).unwrap().approx_eq(&m.shape, 1e-12));
}

#[test]
fn mean_beats_every_data_point() {
    let spec = SynthSpec { count: 6, landmarks: 4, seed: 3, ..SynthSpec::default() };
    let shapes = generate_synthetic(&spec).unwrap();
    let ds = Dataset::new(shapes.clone(), qed()).unwrap();
    let m = frechet_mean(&ds, 1000, None).unwrap();
    let cost = |x: &TreeShape| ds.distances_to(x).unwrap().iter().map(|d| d * d).sum::<f64>();
    assert!((cost(&m.shape) - m.objective).abs() < 1e-9);
    for s in &shapes {
        assert!(m.objective <= cost(s) + 1e-12);
    }
}

#[test]
fn circumradius_lies_between_half_diameter_and_diameter() {
    let spec = SynthSpec { count: 5, landmarks: 4, template_jitter: Some(0.2), seed: 4, ..SynthSpec::default() };
    let ds = Dataset::new(generate_synthetic(&spec).unwrap(), qed()).unwrap();
    let r = circumcenter(&ds, 1000, None).unwrap();
    let diam = ds.diameter().unwrap();
    assert!(r.converged);
    assert!(r.radius >= diam / 2.0 - 1e-9 && r.radius <= diam);
    let far = ds.distances_to(&r.shape).unwrap().into_iter().fold(0.0, f64::max);
    assert!((far - r.radius).abs() < 1e-9);
}

#[test]
fn centroid_is_seeded_and_deterministic() {
    let spec = SynthSpec { count: 4, landmarks: 4, template_jitter: Some(0.1), seed: 5, ..SynthSpec::default() };
    let ds = Dataset::new(generate_synthetic(&spec).unwrap(), qed()).unwrap();
    let a = centroid(&ds, 200, None, 9).unwrap();
    let b = centroid(&ds, 200, None, 9).unwrap();
    assert_eq!(a.shape.attrs(), b.shape.attrs());
    assert!(a.converged);
}

#[test]
fn prototypes_ignore_input_order() {
    let spec = SynthSpec { count: 4, landmarks: 4, template_jitter: Some(0.1), seed: 6, ..SynthSpec::default() };
    let shapes = generate_synthetic(&spec).unwrap();
    let mut rev = shapes.clone();
    rev.reverse();
    let a = frechet_mean(&Dataset::new(shapes, qed()).unwrap(), 500, None).unwrap();
    let b = frechet_mean(&Dataset::new(rev, qed()).unwrap(), 500, None).unwrap();
    assert_eq!(a.shape.attrs(), b.shape.attrs());
}

#[test]
fn terminal_pairs_drop_at_the_requested_rate() {
    // complete depth-3 trees have two terminal pairs; with p = 0.3 a tree
    // loses at least one with probability 1 - 0.7² = 0.51
    let spec = SynthSpec { count: 1000, landmarks: 2, branching: 1.0, drop: 0.3, seed: 7, ..SynthSpec::default() };
    let shapes = generate_synthetic(&spec).unwrap();
    let hit = shapes.iter().filter(|s| s.len() < 7).count() as f64 / 1000.0;
    let sigma = (0.51f64 * 0.49 / 1000.0).sqrt();
    assert!((hit - 0.51).abs() < 3.0 * sigma, "{hit}");
}

#[test]
fn drops_leave_surviving_geometry_alone() {
    let base = SynthSpec { count: 20, landmarks: 3, branching: 1.0, seed: 8, ..SynthSpec::default() };
    let full = generate_synthetic(&base).unwrap();
    let dropped = generate_synthetic(&SynthSpec { drop: 0.5, ..base }).unwrap();
    let mut untouched = 0;
    for (f, d) in full.iter().zip(&dropped) {
        if d.len() == f.len() {
            assert_eq!(f.attrs(), d.attrs());
            untouched += 1;
        } else {
            assert!(d.len() < f.len());
        }
    }
    assert!(untouched > 0 && untouched < 20);
}
