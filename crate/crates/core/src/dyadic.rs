//! Exact predicates on dyadic rationals.
//!
//! Every finite `f64` is `mant · 2^exp` with an odd (or zero) integer
//! mantissa, so cube/puncture comparisons reduce to integer arithmetic.
//! An `i128` path is tried first and a `BigInt` path takes over on overflow.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// `mant · 2^exp` with `mant` odd or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub mant: i64,
    pub exp: i32,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Dyadic {
        assert!(x.is_finite(), "non-finite coordinate");
        if x == 0.0 {
            return Dyadic { mant: 0, exp: 0 };
        }
        let bits = x.to_bits();
        let sign: i64 = if bits >> 63 == 0 { 1 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
        let (mut mant, mut exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1 << 52), raw_exp - 1075)
        };
        let tz = mant.trailing_zeros() as i32;
        mant >>= tz;
        exp += tz;
        Dyadic { mant: sign * mant, exp }
    }

    pub fn to_big(self, shift: i64) -> BigInt {
        let e = self.exp as i64 + shift;
        assert!(e >= 0);
        BigInt::from(self.mant) << (e as usize)
    }
}

/// Index range `[lo, hi]` of level-`s` closed cubes of `[-1,1]` containing
/// `x`: cube `c` covers `[-1 + c·2^{1-s}, -1 + (c+1)·2^{1-s}]`. Values are
/// clamped to `[-2^40, 2^40]`, which never meets a cube of `Q`.
pub fn containing_range(x: f64, s: u32) -> (i64, i64) {
    let d = Dyadic::from_f64(x);
    let e = d.exp as i64 + s as i64 - 1;
    let one = BigInt::from(1) << (s as usize - 1);
    let (fl, exact) = if e >= 0 {
        ((BigInt::from(d.mant) << (e as usize)) + &one, true)
    } else {
        let denom = BigInt::from(1) << ((-e) as usize);
        let num = BigInt::from(d.mant);
        let q = floor_div(&num, &denom);
        let exact = (&q * &denom) == num;
        (q + &one, exact)
    };
    let clamp = |b: BigInt| -> i64 {
        let lim = BigInt::from(1i64 << 40);
        if b > lim {
            1i64 << 40
        } else if b < -lim.clone() {
            -(1i64 << 40)
        } else {
            i64::try_from(b).unwrap()
        }
    };
    let hi = clamp(fl);
    let lo = if exact { hi - 1 } else { hi };
    (lo, hi)
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    let q = a / b;
    if a.is_negative() && &q * b != *a {
        q - 1
    } else {
        q
    }
}

/// Exact test `‖center - p‖² > γ² · r²` for the circumscribed ball of the
/// level-`s` cube `coords`, where `r² = m / 4^s`.
pub fn separated(s: u32, coords: &[u32], p: &[Dyadic], gamma: Dyadic) -> bool {
    separated_i128(s, coords, p, gamma).unwrap_or_else(|| separated_big(s, coords, p, gamma))
}

fn common_shift(s: u32, p: &[Dyadic]) -> i64 {
    p.iter()
        .filter(|d| d.mant != 0)
        .map(|d| -(d.exp as i64))
        .fold(s as i64, i64::max)
}

fn separated_i128(s: u32, coords: &[u32], p: &[Dyadic], gamma: Dyadic) -> Option<bool> {
    let m = coords.len() as i128;
    let w = common_shift(s, p);
    if w > 120 {
        return None;
    }
    let mut lhs: i128 = 0;
    for (&c, d) in coords.iter().zip(p) {
        let center = (2 * c as i128 + 1 - (1i128 << s)).checked_mul(1i128.checked_shl((w - s as i64) as u32)?)?;
        let pv = if d.mant == 0 {
            0
        } else {
            (d.mant as i128).checked_mul(1i128.checked_shl((d.exp as i64 + w) as u32)?)?
        };
        let diff = center.checked_sub(pv)?;
        lhs = lhs.checked_add(diff.checked_mul(diff)?)?;
    }
    let g2 = (gamma.mant as i128).checked_mul(gamma.mant as i128)?.checked_mul(m)?;
    let e = 2 * w - 2 * s as i64 + 2 * gamma.exp as i64;
    if e >= 0 {
        if e > 125 {
            return None;
        }
        let rhs = g2.checked_mul(1i128.checked_shl(e as u32)?)?;
        if rhs < 0 {
            return None;
        }
        Some(lhs > rhs)
    } else {
        if -e > 125 {
            return None;
        }
        let l = lhs.checked_mul(1i128.checked_shl((-e) as u32)?)?;
        if l < 0 {
            return None;
        }
        Some(l > g2)
    }
}

fn separated_big(s: u32, coords: &[u32], p: &[Dyadic], gamma: Dyadic) -> bool {
    let m = coords.len();
    let w = common_shift(s, p);
    let mut lhs = BigInt::zero();
    for (&c, d) in coords.iter().zip(p) {
        let center = (BigInt::from(2 * c as i64 + 1) - (BigInt::from(1) << s as usize)) << ((w - s as i64) as usize);
        let pv = if d.mant == 0 { BigInt::zero() } else { d.to_big(w) };
        let diff = center - pv;
        lhs += &diff * &diff;
    }
    let g2 = BigInt::from(gamma.mant) * BigInt::from(gamma.mant) * BigInt::from(m);
    let e = 2 * w - 2 * s as i64 + 2 * gamma.exp as i64;
    if e >= 0 {
        lhs > (g2 << (e as usize))
    } else {
        (lhs << ((-e) as usize)) > g2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_roundtrip() {
        for &x in &[0.0, 1.0, -0.75, 0.3, 6.0, 1e-300, -123456.789, f64::MIN_POSITIVE / 8.0] {
            let d = Dyadic::from_f64(x);
            assert_eq!(d.mant as f64 * 2f64.powi(d.exp), x);
            assert!(d.mant == 0 || d.mant % 2 != 0);
        }
    }

    #[test]
    fn containing_ranges() {
        assert_eq!(containing_range(0.0, 1), (0, 1));
        assert_eq!(containing_range(0.1, 1), (1, 1));
        assert_eq!(containing_range(-1.0, 3), (-1, 0));
        assert_eq!(containing_range(1e-30, 4), (8, 8));
        assert_eq!(containing_range(-1e-30, 4), (7, 7));
    }

    #[test]
    fn separation_matches_big_path() {
        let g = Dyadic::from_f64(1.5);
        let p: Vec<Dyadic> = [0.25, -0.125].iter().map(|&x| Dyadic::from_f64(x)).collect();
        for s in 1..6u32 {
            for c0 in 0..(1u32 << s) {
                for c1 in 0..(1u32 << s) {
                    let c = [c0, c1];
                    assert_eq!(separated_i128(s, &c, &p, g).unwrap(), separated_big(s, &c, &p, g));
                }
            }
        }
    }

    #[test]
    fn tangent_case_is_not_separated() {
        // center (0.5, 0.5) of the level-1 cube (1,1); radius sqrt(2)/2; the
        // puncture at distance exactly 2·radius with γ = 2 is on the boundary.
        let g = Dyadic::from_f64(2.0);
        let p = [Dyadic::from_f64(-0.5), Dyadic::from_f64(-0.5)];
        assert!(!separated(1, &[1, 1], &p, g));
        let p = [Dyadic::from_f64(-0.5), Dyadic::from_f64(-0.5000001)];
        assert!(separated(1, &[1, 1], &p, g));
    }
}
