//! Invariants checked on seeded random shapes.

mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treeshape::io::format::{from_json, to_json};
use treeshape::io::synth::{sample_shape, SynthSpec};
use treeshape::metric::Metric;
use treeshape::qed::{qed_approx, qed_distance, solve_two_stretch, QedConfig};
use treeshape::ted::{ted_distance, ted_edit_script, ted_path};
use treeshape::tree_model::{Attribute, CombinatorialTree, TreeShape, DEFAULT_DEPTH};
use treeshape::unordered::unordered_distance;

fn pair(seed: u64, max_edges: usize) -> (TreeShape, TreeShape) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed % 3 == 0 {
        regrouped_pair(&mut rng, 4, false)
    } else {
        (random_scalar_shape(&mut rng, max_edges), random_scalar_shape(&mut rng, max_edges))
    }
}

fn planar(seed: u64) -> TreeShape {
    let spec = SynthSpec { landmarks: 4, ..SynthSpec::default() };
    sample_shape(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ted_is_a_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_scalar_shape(&mut rng, 6);
        let b = random_scalar_shape(&mut rng, 6);
        let c = random_scalar_shape(&mut rng, 6);
        let ab = ted_distance(&a, &b, true).unwrap();
        let ba = ted_distance(&b, &a, true).unwrap();
        let bc = ted_distance(&b, &c, true).unwrap();
        let ac = ted_distance(&a, &c, true).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert_eq!(ted_distance(&a, &a, true).unwrap(), 0.0);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn qed_is_symmetric_and_below_ted(seed in any::<u64>()) {
        // with a degree bound this loose every edit mapping is a candidate
        let (s, t) = pair(seed, 6);
        let cfg = QedConfig::new(2, 8);
        let st = qed_distance(&s, &t, &cfg, None).unwrap();
        let ts = qed_distance(&t, &s, &cfg, None).unwrap();
        prop_assert!((st - ts).abs() < 1e-12);
        prop_assert!(st <= ted_distance(&s, &t, true).unwrap() + 1e-10);
        prop_assert!(st >= (s.norm() - t.norm()).abs() - 1e-10);
    }

    #[test]
    fn more_stretches_never_cost_more(seed in any::<u64>()) {
        let (s, t) = pair(seed, 5);
        let d: Vec<f64> = (1..=3)
            .map(|k| qed_distance(&s, &t, &QedConfig::new(k, 3), None).unwrap())
            .collect();
        prop_assert!(d[1] <= d[0] + 1e-12 && d[2] <= d[1] + 1e-12);
    }

    #[test]
    fn qed_path_realizes_its_value(seed in any::<u64>()) {
        let (s, t) = pair(seed, 6);
        let (v, p) = qed_approx(&s, &t, &QedConfig::default(), None).unwrap();
        prop_assert!((p.total_length() - v).abs() <= 1e-9 * (1.0 + v));
        prop_assert_eq!(&p.source(), &s);
        prop_assert_eq!(&p.target(), &t);
        prop_assert_eq!(&p.point(0.0).unwrap(), &s);
        prop_assert_eq!(&p.point(1.0).unwrap(), &t);
        // every point splits the length in proportion; the degree bound
        // constrains only the common contraction, so the pieces are
        // re-measured without it
        for f in [0.25, 0.5, 0.75] {
            let m = p.point(f).unwrap();
            let cfg = QedConfig::new(2, 8);
            let left = qed_distance(&s, &m, &cfg, None).unwrap();
            let right = qed_distance(&m, &t, &cfg, None).unwrap();
            prop_assert!(left <= f * v + 1e-7 && right <= (1.0 - f) * v + 1e-7);
        }
    }

    #[test]
    fn ted_path_has_edit_cost_length(seed in any::<u64>()) {
        let (s, t) = pair(seed, 6);
        let script = ted_edit_script(&s, &t).unwrap();
        prop_assert_eq!(&script.apply(&s).unwrap(), &t);
        let p = ted_path(&s, &script, DEFAULT_DEPTH).unwrap();
        let d = ted_distance(&s, &t, true).unwrap();
        prop_assert!((p.total_length() - d).abs() <= 1e-9 * (1.0 + d));
        prop_assert_eq!(&p.target(), &t);
    }

    #[test]
    fn two_stretch_closed_form_is_the_minimum(dist in 0.0..5.0f64, a in 0.0..3.0f64, b in 0.0..3.0f64) {
        let opt = solve_two_stretch(dist, a, b);
        let f = |tau: f64| (a * a + (tau * dist).powi(2)).sqrt() + (b * b + ((1.0 - tau) * dist).powi(2)).sqrt();
        prop_assert!((f(opt.tau) - opt.value).abs() < 1e-9);
        for i in 0..=200 {
            prop_assert!(opt.value <= f(i as f64 / 200.0) + 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let s = planar(seed);
        let back = from_json(&to_json(&s)).unwrap();
        prop_assert_eq!(back.attrs(), s.attrs());
        prop_assert_eq!(&back, &s);
    }

    #[test]
    fn collapsed_edges_do_not_change_the_shape(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scalar_shape(&mut rng, 6);
        // graft a zero edge above a random edge
        let topo = s.topology();
        let host = rng.gen_range(0..s.len());
        let m = s.len() + 1;
        let z = s.len();
        let mut children: Vec<Vec<usize>> = (0..s.len()).map(|e| topo.children(e).to_vec()).collect();
        children.push(vec![host]);
        let mut roots = topo.roots().to_vec();
        match topo.parent(host) {
            Some(p) => {
                let i = children[p].iter().position(|&c| c == host).unwrap();
                children[p][i] = z;
            }
            None => {
                let i = roots.iter().position(|&c| c == host).unwrap();
                roots[i] = z;
            }
        }
        let (grown, idx) = CombinatorialTree::from_children(&roots, &children, None).unwrap();
        let mut attrs = vec![Attribute::zeros(s.layout()); m];
        for e in 0..s.len() {
            attrs[idx[e]] = s.attr(e).clone();
        }
        let back = TreeShape::from_parts_collapsing(s.layout(), grown, attrs, None).unwrap();
        prop_assert_eq!(back, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unordered_distance_ignores_sibling_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scalar_shape(&mut rng, 5);
        let t = random_scalar_shape(&mut rng, 5);
        let orders = t.reorderings();
        let t2 = &orders[rng.gen_range(0..orders.len())];
        let orders = s.reorderings();
        let s2 = &orders[rng.gen_range(0..orders.len())];
        for metric in [Metric::Ted, Metric::Qed(QedConfig::default())] {
            let d = unordered_distance(&s, &t, &metric, None).unwrap().distance;
            let d2 = unordered_distance(s2, t2, &metric, None).unwrap().distance;
            let d3 = unordered_distance(&t, &s, &metric, None).unwrap().distance;
            prop_assert!((d - d2).abs() < 1e-12 && (d - d3).abs() < 1e-12);
            prop_assert!(d <= metric.distance(&s, &t, None).unwrap() + 1e-12);
        }
    }
}
