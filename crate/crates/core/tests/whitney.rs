use doubling_core::whitney::{self, Ball, WhitneyCover};
use proptest::prelude::*;

fn none(_: u32, _: &[u32]) -> bool {
    false
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn build(m: usize, punctures: &[Vec<f64>], delta: f64, gamma: f64) -> WhitneyCover {
    whitney::build_cover_dim(m, punctures, delta, gamma, &none).unwrap()
}

#[test]
fn intersection_radius_cases() {
    let a = Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let far = Ball { center: vec![3.0, 0.0], radius: 1.0 };
    let inner = Ball { center: vec![0.2, 0.0], radius: 0.5 };
    let lens = Ball { center: vec![1.0, 0.0], radius: 1.0 };
    assert_eq!(whitney::intersection_ball_radius(&a, &far), 0.0);
    assert_eq!(whitney::intersection_ball_radius(&a, &inner), 0.5);
    assert_eq!(whitney::intersection_ball_radius(&a, &lens), 0.5);
}

#[test]
fn neighborhood_k_is_minimal() {
    for m in 1..=4 {
        for gamma in [1.0, 1.5, 2.0, 4.0, 6.0] {
            let k = whitney::neighborhood_k(m, gamma);
            let g2m = gamma * gamma * m as f64;
            assert!(g2m <= ((2 * k + 1) as f64).powi(2));
            assert!(k == 0 || g2m > ((2 * k - 1) as f64).powi(2));
        }
    }
}

#[test]
fn count_bound_value() {
    // 2 (3√2·2)² log2(12·16) = 144 log2(192)
    let b = whitney::count_bound(2, 2, 2.0, 1.0 / 16.0);
    assert!((b - 144.0 * 192f64.log2()).abs() < 1e-9);
    assert_eq!(whitney::count_bound(0, 2, 2.0, 0.5), whitney::count_bound(1, 2, 2.0, 0.5));
}

#[test]
fn single_puncture_square() {
    let c = build(2, &[vec![0.0, 0.0]], 1.0 / 64.0, 2.0);
    assert!(!c.is_empty());
    assert!(c.stop_verified);
    assert!((c.len() as f64) <= c.count_bound());
    assert!((0..c.len()).all(|i| c.exact_separated(i)));
    // levels of retained cubes grow towards the puncture
    let near = c.locate(&[0.05, 0.05]).unwrap();
    let far = c.locate(&[0.9, -0.9]).unwrap();
    assert!(c.cube(near).level > c.cube(far).level);
    assert!(c.locate(&[0.0, 0.0]).is_none());
    assert!(c.locate(&[1.5, 0.0]).is_none());
}

#[test]
fn empty_puncture_set() {
    let c = build(2, &[], 0.1, 2.0);
    assert!(!c.is_empty());
    assert!(c.locate(&[0.3, -0.2]).is_some());
}

#[test]
fn rejects_bad_parameters() {
    assert!(whitney::build_cover_dim(2, &[vec![0.0, 0.0]], 0.0, 2.0, &none).is_err());
    assert!(whitney::build_cover_dim(2, &[vec![0.0, 0.0]], 0.1, 0.5, &none).is_err());
    assert!(whitney::build_cover_dim(2, &[vec![0.0]], 0.1, 2.0, &none).is_err());
}

#[test]
fn document_is_sorted_and_complete() {
    let c = build(2, &[vec![0.5, -0.25]], 1.0 / 32.0, 1.5);
    let doc = c.to_document(true);
    assert_eq!(doc.cubes.len(), c.len());
    assert!(doc.cubes.windows(2).all(|w| (w[0].level, &w[0].coords) <= (w[1].level, &w[1].coords)));
    let adj = doc.adjacency.unwrap();
    assert!(adj.iter().all(|e| e[0] < e[1] && e[1] < c.len()));
}

#[test]
fn bfs_path_on_a_line() {
    let p = whitney::bfs_path(0, 5, |i| if i < 9 { vec![i + 1] } else { vec![] }).unwrap();
    assert_eq!(p, vec![0, 1, 2, 3, 4, 5]);
    assert!(whitney::bfs_path(0, 5, |_| vec![]).is_none());
}

fn arb_dyadic_point(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-16i32..=16, m).prop_map(|v| v.into_iter().map(|k| k as f64 / 16.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cover_invariants(
        m in 1usize..=3,
        pts in proptest::collection::vec(arb_dyadic_point(3), 1..=4),
        e in 3i32..=7,
        gi in 0usize..3,
        probes in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 64),
    ) {
        let gamma = [1.5, 2.0, 4.0][gi];
        let delta = 0.5f64.powi(e);
        let punct: Vec<Vec<f64>> = pts.iter().map(|p| p[..m].to_vec()).collect();
        let c = build(m, &punct, delta, gamma);
        prop_assert!((c.len() as f64) <= c.count_bound());
        for i in 0..c.len() {
            prop_assert!(c.exact_separated(i));
            let b = c.ball(i);
            for p in &punct {
                prop_assert!(dist(&b.center, p) >= gamma * b.radius * (1.0 - 1e-12));
            }
        }
        for x in &probes {
            let x = &x[..m];
            if punct.iter().all(|p| dist(p, x) >= delta) {
                let i = c.locate(x);
                prop_assert!(i.is_some());
                prop_assert!(c.cube(i.unwrap()).contains(x));
            }
        }
    }

    #[test]
    fn neighbors_are_symmetric_and_face_adjacent(
        m in 2usize..=3,
        p in arb_dyadic_point(3),
        e in 3i32..=6,
    ) {
        let c = build(m, &[p[..m].to_vec()], 0.5f64.powi(e), 2.0);
        let step = (c.len() / 200).max(1);
        for i in (0..c.len()).step_by(step) {
            for j in c.neighbors(i) {
                prop_assert!(c.neighbors(j).contains(&i));
                let (a, b) = (c.cube(i), c.cube(j));
                let q = b.radius() / a.radius();
                prop_assert!(q == 0.5 || q == 1.0 || q == 2.0);
                prop_assert!(whitney::intersection_ball_radius(&a.ball(), &b.ball()) > 0.0);
            }
        }
    }

    #[test]
    fn chains_link_neighbors(
        p in arb_dyadic_point(3),
        a in proptest::collection::vec(-1.0f64..1.0, 3),
        b in proptest::collection::vec(-1.0f64..1.0, 3),
    ) {
        let delta = 1.0 / 32.0;
        let c = build(3, &[p.clone()], delta, 2.0);
        prop_assume!(dist(&a, &p) >= delta && dist(&b, &p) >= delta);
        let ch = c.find_chain(&a, &b).unwrap();
        prop_assert!(c.cube(ch.indices[0]).contains(&a));
        prop_assert!(c.cube(*ch.indices.last().unwrap()).contains(&b));
        for w in ch.indices.windows(2) {
            prop_assert!(c.neighbors(w[0]).contains(&w[1]));
            let r = whitney::intersection_ball_radius(&c.ball(w[0]), &c.ball(w[1]));
            prop_assert!(r >= c.ball(w[0]).radius.min(c.ball(w[1]).radius) / 3.0);
        }
    }
}
