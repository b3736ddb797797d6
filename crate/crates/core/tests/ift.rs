use doubling_core::ift::{self, ImplicitChart};
use doubling_core::polyalg::{self, parse_poly, PolyC};
use doubling_core::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn quadric_chart(eps: f64, scale: f64) -> ImplicitChart {
    let p = parse_poly("z1^2 + z2^2", 2).unwrap();
    let m = polyalg::markov_m(&p).unwrap();
    let origin = [c(eps, 0.0), c(0.0, 0.0)];
    let theta = ift::chart_radius(2.0 * eps, m, 2).unwrap() * scale;
    ImplicitChart::new(&p, c(eps * eps, 0.0), &origin, theta, m).unwrap()
}

#[test]
fn chart_radius_formula() {
    let t = ift::chart_radius(1.0, 2.0, 3).unwrap();
    assert!((t - 1.0 / (100.0 * 12f64.sqrt())).abs() < 1e-15);
    assert!(ift::chart_radius(0.0, 1.0, 2).is_err());
    assert!(ift::chart_radius(1.0, 0.0, 2).is_err());
    assert!(ift::chart_radius(1.0, 1.0, 1).is_err());
}

#[test]
fn quadric_chart_certifies() {
    let ch = quadric_chart(0.1, 1.0);
    let cert = ift::verify_chart(&ch, 500, 3);
    assert!(cert.passed, "{cert:?}");
    assert!(cert.max_residual <= ift::TOL_RESID_ACCEPT);
    assert!(cert.distortion >= ift::MIN_DISTORTION);
    assert_eq!(ch.zeros_on_line(&[c(0.0, 0.0)]), Some(1));
    assert_eq!(ch.solve_implicit(&[c(0.0, 0.0)]).unwrap(), c(0.0, 0.0));
    assert!(cert.require().is_ok());
}

#[test]
fn oversized_chart_fails() {
    // θ far beyond the IFT radius reaches the other sheet of the quadric
    let ch = quadric_chart(0.1, 2000.0);
    let cert = ift::verify_chart(&ch, 200, 3);
    assert!(!cert.passed);
    assert!(matches!(cert.require(), Err(Error::ChartRejected(_))));
}

#[test]
fn chart_rejects_bad_input() {
    let p = parse_poly("z1*z2", 2).unwrap();
    let off = [c(1.0, 0.0), c(1.0, 0.0)];
    assert!(ImplicitChart::new(&p, c(0.5, 0.0), &off, 0.01, 1.0).is_err());
    let on = [c(1.0, 0.0), c(0.5, 0.0)];
    assert!(ImplicitChart::new(&p, c(0.5, 0.0), &on, 0.0, 1.0).is_err());
    let q = parse_poly("z1", 1).unwrap();
    assert!(ImplicitChart::new(&q, c(0.0, 0.0), &[c(0.0, 0.0)], 0.1, 1.0).is_err());
    let ch = ImplicitChart::new(&p, c(0.5, 0.0), &on, 0.01, 1.0).unwrap();
    assert!(ch.solve_implicit(&[c(0.02, 0.0)]).is_err());
    assert!(ch.solve_implicit(&[]).is_err());
}

#[test]
fn zero_gradient_frame() {
    assert!(matches!(ift::align_frame(&[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2]), Err(Error::ZeroGradient)));
}

fn arb_vec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn frame_is_unitary_and_aligned(g in arb_vec(3), z0 in arb_vec(3)) {
        let gn = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(gn > 1e-3);
        let f = ift::align_frame(&z0, &g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ci = f.column(i);
                let cj = f.column(j);
                let ip: C64 = ci.iter().zip(&cj).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - c(want, 0.0)).norm() < 1e-12);
            }
        }
        let last = f.column(2);
        for k in 0..3 {
            prop_assert!((last[k] - g[k].conj() / gn).norm() < 1e-12);
        }
        let v = [c(0.1, 0.2), c(-0.3, 0.0), c(0.05, -0.4)];
        let mut z = vec![c(0.0, 0.0); 3];
        f.to_ambient(&v, &mut z);
        let back = f.to_frame(&z);
        for k in 0..3 {
            prop_assert!((back[k] - v[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn frame_derivatives_at_origin(a in 0.2f64..1.0, b in -1.0f64..1.0, t in 0.0f64..6.28) {
        // chart through an arbitrary point of its own level set
        let p = PolyC::from_terms(2, [(vec![1, 1], c(1.0, 0.0)), (vec![2, 0], c(0.3, 0.1))]).unwrap();
        let origin = [C64::from_polar(a, t), c(b, 0.5)];
        let level = p.eval(&origin);
        let ch = ImplicitChart::new(&p, level, &origin, 1e-3, 10.0).unwrap();
        let mut df = vec![c(0.0, 0.0); 2];
        let f0 = ch.f_and_grad(&[c(0.0, 0.0)], c(0.0, 0.0), &mut df);
        prop_assert!(f0.norm() < 1e-14);
        prop_assert!(df[0].norm() < 1e-12 * (1.0 + ch.eta));
        prop_assert!((df[1] - c(ch.eta, 0.0)).norm() < 1e-12 * (1.0 + ch.eta));
    }

    #[test]
    fn graph_points_lie_on_y(eps in 0.01f64..0.4, u in arb_vec(1)) {
        let ch = quadric_chart(eps, 1.0);
        let vbar: Vec<C64> = u.iter().map(|x| x * ch.theta() / 2f64.sqrt()).collect();
        let vn = ch.solve_implicit(&vbar).unwrap();
        let z = ch.point(&vbar, vn);
        prop_assert!((ch.poly.eval(&z) - ch.level).norm() <= ift::TOL_RESID_ACCEPT);
        prop_assert!(vn.norm() <= ch.theta() * ift::SLOPE);
        let gp = ch.grad_phi(&vbar, vn);
        prop_assert!(gp[0].norm() <= ift::SLOPE);
    }
}
