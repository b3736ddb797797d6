use doubling_core::polyalg::{self, parse_poly, PolyC, TermRecord};
use doubling_core::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn arb_poly() -> impl Strategy<Value = PolyC> {
    proptest::collection::vec(((0u32..4, 0u32..4), (-2.0f64..2.0, -2.0f64..2.0)), 1..7).prop_map(|ts| {
        PolyC::from_terms(2, ts.into_iter().map(|((a, b), (re, im))| (vec![a, b], c(re, im)))).unwrap()
    })
}

fn arb_point() -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

#[test]
fn parse_and_evaluate() {
    let p = parse_poly("z1*z2 - 0.25", 2).unwrap();
    assert_eq!(p.degree(), 2);
    assert_eq!(p.eval(&[c(0.5, 0.0), c(0.5, 0.0)]), c(0.0, 0.0));
    let q = parse_poly("(1+2i)*z1^2 + (-i)*z2 + 3", 2).unwrap();
    let z = [c(0.3, -0.2), c(0.1, 0.7)];
    let want = c(1.0, 2.0) * z[0] * z[0] - c(0.0, 1.0) * z[1] + c(3.0, 0.0);
    assert!((q.eval(&z) - want).norm() < 1e-15);
}

#[test]
fn parse_errors() {
    assert!(matches!(parse_poly("", 2), Err(Error::Syntax { .. })));
    assert!(matches!(parse_poly("z3", 2), Err(Error::VariableOutOfRange { index: 3, n: 2 })));
    assert!(matches!(parse_poly("z1^-2", 2), Err(Error::NegativeExponent { .. })));
    assert!(matches!(parse_poly("z1**z2", 2), Err(Error::Syntax { .. })));
    assert!(matches!(parse_poly("2*", 1), Err(Error::Syntax { .. })));
}

#[test]
fn repeated_monomials_merge() {
    let p = PolyC::from_terms(1, [(vec![2], c(1.0, 0.0)), (vec![2], c(-1.0, 0.0)), (vec![1], c(2.0, 0.0))]).unwrap();
    assert_eq!(p.terms().len(), 1);
    assert_eq!(p.degree(), 1);
}

#[test]
fn records_round_trip() {
    let p = parse_poly("(0.5-1i)*z1*z2^3 + z2", 2).unwrap();
    let rec = p.to_records();
    assert_eq!(PolyC::from_records(2, &rec).unwrap(), p);
    let bad = [TermRecord { exponents: vec![1, -1], re: 1.0, im: 0.0 }];
    assert!(PolyC::from_records(2, &bad).is_err());
}

#[test]
fn markov_bound() {
    let p = parse_poly("z1*z2 + (3+4i)", 2).unwrap();
    assert_eq!(polyalg::l1_norm(&p), 6.0);
    assert_eq!(polyalg::markov_m(&p).unwrap(), 2.0 * 16.0 * 6.0);
    assert!(matches!(polyalg::markov_m(&PolyC::zero(2)), Err(Error::ZeroPolynomial)));
}

#[test]
fn hyperbola_singular_point() {
    let p = parse_poly("z1*z2", 2).unwrap();
    let s = polyalg::find_singular_points(&p, 3, 8, 1).unwrap();
    assert_eq!(s.points.len(), 1);
    assert!(s.points[0].iter().all(|z| z.norm() < 1e-12));
    assert!(s.all_nondegenerate());
    let k = polyalg::estimate_k(&p, &s, 2000).unwrap();
    // ‖∇(z1 z2)‖ = ‖z‖ exactly
    assert!((k - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_point_flagged() {
    let p = parse_poly("z1^3 + z2^2", 2).unwrap();
    let s = polyalg::SingularSet::classify(&p, vec![vec![c(0.0, 0.0); 2]]).unwrap();
    assert!(!s.all_nondegenerate());
    assert!(matches!(polyalg::estimate_k(&p, &s, 10), Err(Error::DegenerateSingularity { index: 0 })));
}

#[test]
fn realify_round_trip() {
    let z = vec![c(1.0, -2.0), c(0.5, 0.25)];
    assert_eq!(polyalg::realify(&z), vec![1.0, -2.0, 0.5, 0.25]);
    assert_eq!(polyalg::complexify(&polyalg::realify(&z)), z);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_matches_difference_quotient(p in arb_poly(), z in arb_point(), dir in 0usize..2) {
        let (_, g) = polyalg::eval_grad(&p, &z);
        let h = 1e-6;
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[dir] += h;
        zm[dir] -= h;
        let fd = (p.eval(&zp) - p.eval(&zm)) / (2.0 * h);
        prop_assert!((fd - g[dir]).norm() <= 1e-6 * (1.0 + g[dir].norm()));
    }

    #[test]
    fn taylor_shift_is_translation(p in arb_poly(), a in arb_point(), h in arb_point()) {
        let s = p.taylor_shift(&a);
        let ah: Vec<C64> = a.iter().zip(&h).map(|(x, y)| x + y).collect();
        prop_assert!((s.eval(&h) - p.eval(&ah)).norm() <= 1e-10 * (1.0 + polyalg::l1_norm(&p) * 100.0));
    }

    #[test]
    fn majorants_dominate(p in arb_poly(), a in arb_point(), h in arb_point(), r in 0.01f64..0.5) {
        // h scaled into the polydisc of radius r
        let hm = h.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-12);
        let z: Vec<C64> = a.iter().zip(&h).map(|(x, y)| x + y * (r / hm)).collect();
        prop_assert!((p.eval(&z) - p.eval(&a)).norm() <= p.increment_bound(&a, r));
        let (_, g) = polyalg::eval_grad(&p, &z);
        prop_assert!(g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() <= p.grad_bound(&a, r));
        let hess = p.hessian(&z);
        let worst = hess.iter().map(|x| x.norm()).fold(0.0, f64::max);
        prop_assert!(worst <= p.second_bound(&a, r));
    }

    #[test]
    fn markov_bounds_second_partials_on_cube(p in arb_poly(), z in arb_point()) {
        prop_assume!(p.degree() >= 1);
        let m = polyalg::markov_m(&p).unwrap();
        let worst = p.hessian(&z).iter().map(|x| x.norm()).fold(0.0, f64::max);
        prop_assert!(worst <= m);
    }
}
