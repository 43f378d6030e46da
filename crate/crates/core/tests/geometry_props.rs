use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use stubgraph::geometry::{
    count_in_ball, kth_nearest_distance, neighbors_sorted, sample_poisson, seeded_rng, GridIndex,
};
use stubgraph::{Boundary, PointSet, SimDomain};

fn domain_strategy() -> impl Strategy<Value = SimDomain<f64>> {
    (1usize..=3, 1.0f64..50.0, any::<bool>()).prop_map(|(d, l, torus)| {
        let b = if torus { Boundary::Torus } else { Boundary::EuclideanWindow };
        SimDomain::new(d, l, b).unwrap()
    })
}

fn points_in(domain: SimDomain<f64>, n: std::ops::Range<usize>) -> impl Strategy<Value = (SimDomain<f64>, PointSet<f64>)> {
    let d = domain.dim();
    let l = domain.side();
    prop::collection::vec(prop::collection::vec(0.0..l, d), n)
        .prop_map(move |pts| (domain, PointSet::from_points(&domain, &pts).unwrap()))
}

fn setup(n: std::ops::Range<usize>) -> impl Strategy<Value = (SimDomain<f64>, PointSet<f64>)> {
    domain_strategy().prop_flat_map(move |dom| points_in(dom, n.clone()))
}

proptest! {
    #[test]
    fn metric_axioms((dom, p) in setup(3..4)) {
        let (a, b, c) = (p.point(0), p.point(1), p.point(2));
        let ab = dom.distance(a, b);
        prop_assert_eq!(dom.distance(a, a), 0.0);
        prop_assert_eq!(ab, dom.distance(b, a));
        prop_assert!(dom.distance(a, c) <= ab + dom.distance(b, c) + 1e-9);
        let cap = if dom.is_torus() { 0.5 } else { 1.0 };
        prop_assert!(ab <= cap * dom.side() * (dom.dim() as f64).sqrt() + 1e-9);
    }

    #[test]
    fn kth_radius_ball_holds_k_points((dom, p) in setup(1..40), k in 1usize..6) {
        prop_assume!(k <= p.len());
        let center = vec![dom.side() / 3.0; dom.dim()];
        let r = kth_nearest_distance(&dom, &p, &center, k, None).unwrap();
        prop_assert!(count_in_ball(&dom, &p, &center, r, None) >= k);
        if k > 1 {
            let prev = kth_nearest_distance(&dom, &p, &center, k - 1, None).unwrap();
            prop_assert!(prev <= r);
        }
    }

    #[test]
    fn grid_agrees_with_brute_force((dom, p) in setup(0..80), cells in 1usize..9, q in 0usize..80) {
        let grid = GridIndex::with_cells_per_axis(&dom, &p, None, cells);
        let query = vec![dom.side() * 0.37; dom.dim()];
        let exclude = if p.is_empty() { None } else { Some(q % p.len()) };
        let mut brute: Vec<(f64, usize)> = (0..p.len())
            .filter(|&j| Some(j) != exclude)
            .map(|j| (dom.sq_distance(&query, p.point(j)), j))
            .collect();
        brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got: Vec<(f64, usize)> = grid.neighbors(&query, exclude).map(|n| (n.sq_distance, n.index)).collect();
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn ranked_neighbours_exclude_the_query((dom, p) in setup(1..50)) {
        let order: Vec<usize> = neighbors_sorted(&dom, &p, 0, &vec![true; p.len()]).map(|n| n.index).collect();
        prop_assert_eq!(order.len(), p.len() - 1);
        prop_assert!(!order.contains(&0));
    }

    #[test]
    fn translation_preserves_distances_on_torus((dom, p) in setup(2..10), s in 0.0f64..100.0) {
        prop_assume!(dom.is_torus());
        let shift = vec![s; dom.dim()];
        let q = p.translated(&dom, &shift);
        for i in 0..p.len() {
            prop_assert!(dom.contains(q.point(i)));
            for j in 0..p.len() {
                let before = dom.distance(p.point(i), p.point(j));
                let after = dom.distance(q.point(i), q.point(j));
                prop_assert!((before - after).abs() <= 1e-9 * dom.side());
            }
        }
    }
}

#[test]
fn poisson_counts_pass_chi_square() {
    // counts of a Poisson(4) process in a unit square, binned 0..=9, 10+
    let dom = SimDomain::torus(2, 1.0).unwrap();
    let mut rng = seeded_rng(2024);
    let trials = 20_000;
    let mut bins = [0usize; 11];
    for _ in 0..trials {
        let p: PointSet<f64> = sample_poisson(&dom, 4.0, &mut rng).unwrap();
        bins[p.len().min(10)] += 1;
    }
    let mut probs = [0.0; 11];
    let mut pk = (-4.0f64).exp();
    for (k, slot) in probs.iter_mut().enumerate().take(10) {
        *slot = pk;
        pk *= 4.0 / (k + 1) as f64;
    }
    probs[10] = 1.0 - probs[..10].iter().sum::<f64>();
    let stat: f64 = bins
        .iter()
        .zip(probs)
        .map(|(&o, p)| (o as f64 - trials as f64 * p).powi(2) / (trials as f64 * p))
        .sum();
    let crit = ChiSquared::new(10.0).unwrap().inverse_cdf(0.999);
    assert!(stat < crit, "chi-square {stat} above {crit}");
}

#[test]
fn uniform_coordinates_fill_the_box() {
    let dom = SimDomain::window(3, 2.0).unwrap();
    let mut rng = seeded_rng(5);
    let p: PointSet<f64> = sample_poisson(&dom, 2000.0, &mut rng).unwrap();
    for axis in 0..3 {
        let mean = p.iter().map(|q| q[axis]).sum::<f64>() / p.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "axis {axis}: {mean}");
    }
    let _: f64 = rng.random();
}

#[test]
fn f32_geometry_matches_f64() {
    let d64 = SimDomain::torus(2, 10.0f64).unwrap();
    let d32 = SimDomain::torus(2, 10.0f32).unwrap();
    let a = [0.5, 9.5];
    let b = [9.0, 0.25];
    let x = d64.distance(&a, &b);
    let y = d32.distance(&[0.5f32, 9.5], &[9.0f32, 0.25]);
    assert!((x - y as f64).abs() < 1e-5);
}
