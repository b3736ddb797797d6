use doubling_core::experiments::{self, DoublingArgs, ExperimentConfig};
use doubling_core::polyalg::{self, parse_poly};
use doubling_core::C64;

fn cfg() -> ExperimentConfig {
    ExperimentConfig { samples: 400, ..ExperimentConfig::default() }
}

fn check<'a>(r: &'a experiments::ExperimentReport, name: &str) -> &'a experiments::Check {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("missing check {name}"))
}

#[test]
fn affine_fit_exact_line() {
    let f = experiments::affine_fit("x", "y", &[1.0, 2.0, 3.0], &[5.0, 7.0, 9.0]).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 3.0).abs() < 1e-14);
    assert_eq!(f.r2, 1.0);
    assert!(experiments::affine_fit("x", "y", &[1.0], &[1.0]).is_err());
    assert!(experiments::affine_fit("x", "y", &[1.0, 1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn cube_cover_in_three_dimensions_passes() {
    let r = experiments::cover_cube(3, &[vec![0.0, 0.5, -0.25]], 1.0 / 32.0, 2.0, &cfg()).unwrap();
    assert!(r.passed, "{}", r.to_json());
    assert!(check(&r, "chain_intersection_ratio").passed);
}

#[test]
fn square_cover_reports_intersection_ratio_below_a_third() {
    // face-adjacent equal squares give 1 − 1/√2 < 1/3
    let r = experiments::cover_cube(2, &[vec![0.0, 0.0]], 1.0 / 64.0, 2.0, &cfg()).unwrap();
    assert!(check(&r, "exact_separation").passed);
    assert!(check(&r, "coverage").passed);
    assert!(check(&r, "count_bound").passed);
    assert!(!check(&r, "chain_intersection_ratio").passed);
    assert!(!r.passed);
}

#[test]
fn cube_cover_rejects_mismatched_points() {
    assert!(experiments::cover_cube(2, &[vec![0.0]], 0.1, 2.0, &cfg()).is_err());
}

#[test]
fn product_critical_counts() {
    for d in 1..=3u32 {
        let (crit, zeros) = experiments::product_critical_points(d);
        assert_eq!(crit.len(), (d * d) as usize);
        assert_eq!(zeros.len(), ((d + 1) * (d + 1)) as usize);
        let p = experiments::product_poly(d).unwrap();
        for w in crit.iter().chain(&zeros) {
            let (_, g) = polyalg::eval_grad(&p, w);
            assert!(g.iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-9);
        }
        for w in &zeros {
            assert!(p.eval(w).norm() < 1e-12);
        }
    }
}

#[test]
fn doubling_report() {
    let args = DoublingArgs { p: 1, a_p: 1.0, alpha: 0.5, beta: 0.25, rho: 0.5, poly: Some((2, 2, 1, 1.0, 0.1)), dc: Some(50.0) };
    let r = experiments::doubling_bound(&args, 0).unwrap();
    assert!(r.passed);
    assert!((r.records[0]["c_p_alpha_beta"].as_f64().unwrap() - 36.0).abs() < 1e-12);
    assert_eq!(r.records.len(), 3);
    let bad = DoublingArgs { alpha: 0.2, ..args };
    assert!(experiments::doubling_bound(&bad, 0).is_err());
}

#[test]
fn hypersurface_preparation_finds_singularity() {
    let h = experiments::prepare_hypersurface(parse_poly("z1^2 + z2^2", 2).unwrap(), C64::new(0.04, 0.0), None, None, 0).unwrap();
    assert_eq!(h.singular.len(), 1);
    assert!((h.k_const - 2.0).abs() < 1e-9);
    assert!((h.delta - 0.9 * 0.2).abs() < 1e-9);
    let on_sigma = experiments::prepare_hypersurface(parse_poly("z1^2 + z2^2", 2).unwrap(), C64::new(0.0, 0.0), None, None, 0);
    assert!(on_sigma.is_err());
}

#[test]
fn self_check_passes() {
    let r = experiments::verify(&ExperimentConfig { samples: 2000, ..ExperimentConfig::default() }).unwrap();
    assert!(r.passed, "{}", r.to_json());
}

#[test]
fn reports_are_deterministic() {
    let a = experiments::quadric(3, &[0.1, 0.05], &cfg()).unwrap();
    let b = experiments::quadric(3, &[0.05, 0.1], &cfg()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_table(), b.to_table());
    assert!(a.passed);
    assert!(experiments::quadric(4, &[0.1], &cfg()).is_err());
    assert!(experiments::hyperbola(&[0.7], &cfg()).is_err());
    assert!(experiments::product(5, &[0.1], &cfg()).is_err());
}
