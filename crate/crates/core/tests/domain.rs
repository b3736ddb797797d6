use doubling_core::domain::{self, Constraint, DomainSpec, Region};
use doubling_core::experiments;
use doubling_core::polyalg::parse_poly;
use doubling_core::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn regions() {
    let z = [C64::new(0.9, 0.9)];
    assert!(Region::Cube.contains(&z));
    assert!(!Region::Polydisc.contains(&z));
    assert!((Region::Cube.margin(&z) - 0.1).abs() < 1e-15);
    assert!(Region::Polydisc.margin(&z) < 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        assert!(Region::Polydisc.contains(&Region::Polydisc.sample(&mut rng, 3)));
        assert!(Region::Cube.contains(&Region::Cube.sample(&mut rng, 3)));
    }
}

#[test]
fn samples_lie_on_y_and_are_seeded() {
    let p = experiments::quadric_poly(3);
    let c = C64::new(0.04, 0.0);
    let a = domain::sample_g(&p, c, Region::Cube, 50, 7);
    let b = domain::sample_g(&p, c, Region::Cube, 50, 7);
    assert_eq!(a, b);
    assert_eq!(a.len(), 50);
    for z in &a {
        assert!((p.eval(z) - c).norm() <= domain::TOL_ON_Y);
        assert!(Region::Cube.contains(z));
    }
}

#[test]
fn omega_samples_satisfy_constraints() {
    let p = experiments::hyperbola_poly();
    let c = C64::new(0.01, 0.0);
    let om = experiments::hyperbola_omega(Region::Polydisc);
    let pts = om.sample(&p, c, 100, 3);
    assert_eq!(pts.len(), 100);
    assert!(pts.iter().all(|z| z[0].norm() >= 0.5 && Region::Polydisc.contains(z)));
}

#[test]
fn distance_minimizer_on_quadric() {
    let p = experiments::quadric_poly(2);
    let eps = 0.2;
    let c = C64::new(eps * eps, 0.0);
    let zero = [C64::new(0.0, 0.0); 2];
    let start = domain::project_to_y(&p, c, &[C64::new(0.6, 0.3), C64::new(-0.2, 0.5)], 100).unwrap();
    let (_, d) = domain::minimize_distance_on_y(&p, c, &zero, &start, 400).unwrap();
    assert!((d - eps).abs() < 1e-10, "{d}");
}

#[test]
fn constraint_margins_are_certified() {
    let s = parse_poly("z1 + z2", 2).unwrap();
    let at_least = Constraint::ModulusAtLeast { poly: s.clone(), bound: 0.5 };
    let at_most = Constraint::ModulusAtMost { poly: s, bound: 2.0 };
    let norm = Constraint::NormAtLeast { bound: 0.25 };
    let z = [C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
    for con in [&at_least, &at_most, &norm] {
        assert!(con.holds(&z));
        let r = con.margin(&z, 1.0);
        assert!(r > 0.0);
        // |S(z+h) − S(z)| ≤ 2·max|h_i|
        let h = 0.99 * r / 2f64.sqrt();
        assert!(con.holds(&[z[0] - h, z[1] - h]));
    }
    assert_eq!(at_least.margin(&[C64::new(0.1, 0.0), C64::new(0.0, 0.0)], 1.0), 0.0);
    let omega = DomainSpec { region: Region::Cube, constraints: vec![at_least, norm] };
    assert!(omega.contains(&z));
    assert!(omega.margin(&z, 1.0) > 0.0);
    assert_eq!(omega.margin(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1.0), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projection_lands_on_y(re in -1.0f64..1.0, im in -1.0f64..1.0, y in -1.0f64..1.0, eps in 0.05f64..0.45) {
        let p = experiments::hyperbola_poly();
        let c = C64::new(eps * eps, 0.0);
        if let Some(z) = domain::project_to_y(&p, c, &[C64::new(re, im), C64::new(y, 0.3)], 100) {
            prop_assert!((p.eval(&z) - c).norm() <= domain::TOL_ON_Y);
        }
    }

    #[test]
    fn norm_margin_ball_stays_inside(a in -1.0f64..1.0, b in -1.0f64..1.0, t in 0.0f64..6.28) {
        let z = [C64::new(a, 0.0), C64::new(b, 0.1)];
        let con = Constraint::NormAtLeast { bound: 0.3 };
        let r = con.margin(&z, 1.0);
        if r > 0.0 {
            let d = C64::from_polar(r * 0.999, t);
            prop_assert!(con.holds(&[z[0] + d, z[1]]));
        }
    }
}
