use doubling_core::valency::{self, DoublingParams, EulerianTriangle};
use doubling_core::C64;
use num_bigint::BigUint;
use proptest::prelude::*;

fn descent_counts(n: usize) -> Vec<u64> {
    fn rec(k: usize, perm: &mut Vec<usize>, used: &mut Vec<bool>, counts: &mut Vec<u64>) {
        let n = used.len();
        if k == n {
            counts[perm.windows(2).filter(|w| w[0] > w[1]).count()] += 1;
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                perm.push(v);
                rec(k + 1, perm, used, counts);
                perm.pop();
                used[v] = false;
            }
        }
    }
    let mut counts = vec![0; n];
    rec(0, &mut Vec::new(), &mut vec![false; n], &mut counts);
    counts
}

/// `Σ_{k=1}^{N} k^n z^k` with Kahan summation; adequate for `z ≥ 0`.
fn series_real(n: i32, z: f64) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for k in 1..5000 {
        let t = (k as f64).powi(n) * z.powi(k) - comp;
        let u = s + t;
        comp = (u - s) - t;
        s = u;
    }
    s
}

#[test]
fn eulerian_matches_descents() {
    let tri = EulerianTriangle::new(8);
    for n in 1..=8 {
        let row: Vec<u64> = tri.row(n).iter().map(|b| u64::try_from(b).unwrap()).collect();
        assert_eq!(row, descent_counts(n), "row {n}");
    }
}

#[test]
fn eulerian_examples() {
    assert_eq!(valency::eulerian(1, 0).unwrap(), BigUint::from(1u32));
    assert_eq!(valency::eulerian(3, 1).unwrap(), BigUint::from(4u32));
    let sum: BigUint = EulerianTriangle::new(4).row(4).iter().sum();
    assert_eq!(sum, BigUint::from(24u32));
    assert!(valency::eulerian(0, 0).is_err());
    assert!(valency::eulerian(4, 4).is_err());
}

#[test]
fn eulerian_symmetry_and_row_sums() {
    let tri = EulerianTriangle::new(12);
    let mut fact = BigUint::from(1u32);
    for n in 1..=12usize {
        fact *= BigUint::from(n);
        let row = tri.row(n);
        assert_eq!(row.iter().sum::<BigUint>(), fact);
        for k in 0..n {
            assert_eq!(row[k], row[n - 1 - k]);
        }
    }
}

#[test]
fn polylog_examples() {
    let half = C64::new(0.5, 0.0);
    assert!((valency::polylog_neg(1, half).unwrap().re - 2.0).abs() < 1e-14);
    assert!((valency::polylog_neg(2, half).unwrap().re - 6.0).abs() < 1e-14);
    assert!((valency::polylog_neg(3, half).unwrap().re - 26.0).abs() < 1e-13);
    assert_eq!(valency::polylog_neg(4, C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
    assert!(valency::polylog_neg(2, C64::new(0.6, 0.8)).is_err());
    assert!(valency::polylog_neg(0, half).is_err());
}

#[test]
fn polylog_matches_series_on_positive_axis() {
    for n in 1..=6 {
        for z in [0.1, 0.3, 0.5, 0.7] {
            let closed = valency::polylog_neg(n, C64::new(z, 0.0)).unwrap().re;
            let series = series_real(n as i32, z);
            assert!((closed - series).abs() <= 1e-12 * series, "n={n} z={z}");
        }
    }
}

#[test]
fn tail_examples() {
    assert!((valency::tail_sum(1, 0.5).unwrap() - 1.5).abs() < 1e-14);
    assert!((valency::tail_sum(2, 0.5).unwrap() - 23.5).abs() < 1e-12);
    assert!(valency::tail_sum(3, 1e-4).unwrap().abs() < 1e-12);
    assert!(valency::tail_sum(0, 0.5).is_err());
    assert!(valency::tail_sum(1, 1.0).is_err());
}

#[test]
fn c_p_example() {
    let p1 = DoublingParams::new(1).unwrap();
    assert!((valency::c_p_constant(&p1, 0.5, 0.25).unwrap() - 36.0).abs() < 1e-12);
    let near_pole = valency::c_p_constant(&p1, 1.0 - 1e-6, 0.5).unwrap();
    assert!(near_pole > 1e17);
}

#[test]
fn nonconcentric_regression() {
    let p1 = DoublingParams::new(1).unwrap();
    let at_one = valency::nonconcentric_constant(&p1, 1.0).unwrap();
    // c₁(1/4,1/8) = 8(1/2 + 1/(3/4)³) = 620/27, c₁(1/2,1/4) = 36
    assert!((at_one - 36.0 * 620.0 / 27.0).abs() < 1e-9);
    let at_half = valency::nonconcentric_constant(&p1, 0.5).unwrap();
    assert!((at_half - 2.0 * at_one).abs() < 1e-9);
    assert!(valency::nonconcentric_constant(&p1, 0.0).is_err());
    assert!(valency::nonconcentric_constant(&p1, 1.5).is_err());
}

#[test]
fn bezout_examples() {
    assert_eq!(valency::bezout_valency(2, 1), 2);
    assert_eq!(valency::bezout_valency(2, 2), 4);
    assert_eq!(valency::bezout_valency(3, 0), 1);
}

#[test]
fn concentric_examples() {
    let dc = valency::concentric_dc_check(|z| z, 0.5, 0.25, 256).unwrap();
    assert!((dc - 2.0).abs() < 1e-12);
    let dc = valency::concentric_dc_check(|_| C64::new(3.0, 0.0), 0.5, 0.25, 64).unwrap();
    assert_eq!(dc, 1.0);
    let dc = valency::concentric_dc_check(|z| z.powi(3), 0.9, 0.3, 256).unwrap();
    assert!((dc - 27.0).abs() < 1e-9);
    assert!(valency::concentric_dc_check(|_| C64::new(0.0, 0.0), 0.5, 0.25, 8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn c_p_monotone(p in 1u32..5, a in 0.05f64..0.95, b_frac in 0.05f64..0.95, t in 0.0f64..1.0) {
        let params = DoublingParams::new(p).unwrap();
        let beta = a * b_frac;
        let c = valency::c_p_constant(&params, a, beta).unwrap();
        let a2 = a + (0.99 - a) * t;
        prop_assert!(valency::c_p_constant(&params, a2, beta).unwrap() >= c);
        let b2 = beta + (a - beta) * t * 0.999;
        prop_assert!(valency::c_p_constant(&params, a, b2).unwrap() <= c);
    }

    #[test]
    fn nonconcentric_homogeneous(p in 1u32..6, rho in 1e-3f64..1.0) {
        let params = DoublingParams::new(p).unwrap();
        let c = valency::nonconcentric_c(&params).unwrap();
        let v = valency::nonconcentric_constant(&params, rho).unwrap() * rho.powi(p as i32);
        prop_assert!((v - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn polynomial_dc_below_c_p(
        p in 1u32..=5,
        coefs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        which in 0usize..3,
    ) {
        let (alpha, beta) = [(0.5, 0.25), (0.75, 0.5), (0.9, 0.3)][which];
        let params = DoublingParams::new(p).unwrap();
        let mut c: Vec<C64> = coefs[..=p as usize].iter().map(|&(a, b)| C64::new(a, b)).collect();
        c[p as usize] += C64::new(1.0, 0.0);
        let f = |z: C64| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a);
        let dc = valency::concentric_dc_check(f, alpha, beta, 512).unwrap();
        prop_assert!(dc <= valency::c_p_constant(&params, alpha, beta).unwrap());
    }
}
