//! Doubling constants of p-valent functions on disks and balls.
//!
//! Eulerian numbers use the descent convention: `a_{n,k}` counts the
//! permutations of `{1..n}` with exactly `k` descents, `0 ≤ k ≤ n−1`, so
//! `a_{n,k} = (k+1) a_{n−1,k} + (n−k) a_{n−1,k−1}` and
//! `Li_{−n}(z) = Σ_{k=1}^{n} a_{n,k−1} z^k / (1−z)^{n+1}`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Rows `a_{n,·}` for `0 ≤ n ≤ n_max`; row 0 is `[1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerianTriangle {
    rows: Vec<Vec<BigUint>>,
}

impl EulerianTriangle {
    pub fn new(n_max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let row = (0..n)
                .map(|k| {
                    let mut v = BigUint::zero();
                    if k < prev.len() {
                        v += &prev[k] * BigUint::from(k + 1);
                    }
                    if k >= 1 && k - 1 < prev.len() {
                        v += &prev[k - 1] * BigUint::from(n - k);
                    }
                    v
                })
                .collect();
            rows.push(row);
        }
        EulerianTriangle { rows }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, n: usize) -> &[BigUint] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, k: usize) -> Result<&BigUint> {
        if n == 0 || n > self.n_max() || k >= n {
            return Err(Error::InvalidParameter(format!("Eulerian index ({n},{k}) out of range")));
        }
        Ok(&self.rows[n][k])
    }
}

/// `a_{n,k}` for `n ≥ 1`, `0 ≤ k ≤ n−1`.
pub fn eulerian(n: usize, k: usize) -> Result<BigUint> {
    if n == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("Eulerian index ({n},{k}) out of range")));
    }
    EulerianTriangle::new(n).get(n, k).cloned()
}

fn big_to_f64(b: &BigUint) -> f64 {
    b.to_f64().unwrap_or(f64::INFINITY)
}

/// `Li_{−n}(z)` for `|z| < 1` by the Eulerian closed form.
pub fn polylog_neg(n: usize, z: C64) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidParameter("polylog order must be >= 1".into()));
    }
    if !(z.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!("|z| = {} must be < 1", z.norm())));
    }
    let tri = EulerianTriangle::new(n);
    let mut num = C64::new(0.0, 0.0);
    let mut zk = z;
    for a in tri.row(n) {
        num += zk * big_to_f64(a);
        zk *= z;
    }
    Ok(num / (C64::new(1.0, 0.0) - z).powi(n as i32 + 1))
}

/// `Σ_{k>p} k^{2p−1} α^k = Li_{1−2p}(α) − Σ_{k=1}^{p} k^{2p−1} α^k`.
pub fn tail_sum(p: u32, alpha: f64) -> Result<f64> {
    if p == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter("tail_sum needs p >= 1 and 0 < alpha < 1".into()));
    }
    let s = 2 * p as usize - 1;
    let full = polylog_neg(s, C64::new(alpha, 0.0))?.re;
    let head: f64 = (1..=p).map(|k| (k as f64).powi(s as i32) * alpha.powi(k as i32)).sum();
    Ok(full - head)
}

/// Valency `p` with the coefficient constants `A_p` and
/// `A'_p = A_p · max_j a_{2p−1,j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingParams {
    pub p: u32,
    pub a_p: f64,
    pub a_prime: f64,
}

impl DoublingParams {
    /// `A_p = 1`.
    pub fn new(p: u32) -> Result<Self> {
        Self::with_a_p(p, 1.0)
    }

    pub fn with_a_p(p: u32, a_p: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("valency p must be >= 1".into()));
        }
        if !(a_p >= 1.0) {
            return Err(Error::InvalidParameter(format!("A_p must be >= 1, got {a_p}")));
        }
        Ok(DoublingParams { p, a_p, a_prime: a_p * eulerian_row_max(2 * p as usize - 1) })
    }
}

/// `max_j a_{n,j}`.
pub fn eulerian_row_max(n: usize) -> f64 {
    let tri = EulerianTriangle::new(n);
    tri.row(n).iter().max().map(big_to_f64).unwrap_or(1.0)
}

/// `c_p(α,β) = ((p+1)α^p + A'_p/(1−α)^{2p+1}) / β^p` for `0 < β < α < 1`.
pub fn c_p_constant(params: &DoublingParams, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0 < beta && beta < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}")));
    }
    let p = params.p as i32;
    Ok(((p as f64 + 1.0) * alpha.powi(p) + params.a_prime / (1.0 - alpha).powi(2 * p + 1)) / beta.powi(p))
}

/// Ball-to-offset-ball constant `c_p(1/4,1/8) · c_p(1/2, ρ/4)`, which equals
/// `c/ρ^p` with `c` independent of `ρ`.
pub fn nonconcentric_constant(params: &DoublingParams, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0,1], got {rho}")));
    }
    Ok(c_p_constant(params, 0.25, 0.125)? * c_p_constant(params, 0.5, rho / 4.0)?)
}

/// The `ρ`-free factor `c_p = nonconcentric_constant(ρ) · ρ^p`.
pub fn nonconcentric_c(params: &DoublingParams) -> Result<f64> {
    nonconcentric_constant(params, 1.0)
}

/// `max(d · d₁, 1)`.
pub fn bezout_valency(d: u32, d1: u32) -> u32 {
    (d * d1).max(1)
}

/// `max_{|z|=α}|f| / max_{|z|=β}|f|` on `samples` equispaced boundary points.
pub fn concentric_dc_check<F: Fn(C64) -> C64>(f: F, alpha: f64, beta: f64, samples: usize) -> Result<f64> {
    let circle_max = |r: f64| {
        (0..samples)
            .map(|i| f(C64::from_polar(r, std::f64::consts::TAU * i as f64 / samples as f64)).norm())
            .fold(0.0, f64::max)
    };
    let lo = circle_max(beta);
    if lo == 0.0 {
        return Err(Error::InvalidParameter("function vanishes on the inner circle".into()));
    }
    Ok(circle_max(alpha) / lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eulerian_rows() {
        let t = EulerianTriangle::new(5);
        let row: Vec<u64> = t.row(4).iter().map(|b| b.to_u64().unwrap()).collect();
        assert_eq!(row, vec![1, 11, 11, 1]);
        assert_eq!(eulerian(3, 1).unwrap(), BigUint::from(4u32));
        assert!(eulerian(3, 3).is_err());
    }

    #[test]
    fn params_for_small_p() {
        assert_eq!(DoublingParams::new(1).unwrap().a_prime, 1.0);
        assert_eq!(DoublingParams::new(2).unwrap().a_prime, 4.0);
        assert_eq!(DoublingParams::new(3).unwrap().a_prime, 66.0);
        assert!(DoublingParams::with_a_p(1, 0.5).is_err());
    }

    #[test]
    fn c_p_rejects_bad_order() {
        let p = DoublingParams::new(1).unwrap();
        assert!(c_p_constant(&p, 0.25, 0.5).is_err());
        assert!(c_p_constant(&p, 1.0, 0.5).is_err());
    }
}
