//! Points of `Y = {P = c}`: Newton projection, seeded samplers, distance
//! minimization and semi-algebraic domains `Ω ⊂ G = Y ∩ Q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, C64};
use crate::polyalg::PolyC;

/// Residual accepted for projected points.
pub const TOL_ON_Y: f64 = 1e-12;

/// Shape of the ambient unit box `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `|Re z_i|, |Im z_i| ≤ 1`.
    Cube,
    /// `|z_i| ≤ 1`.
    Polydisc,
}

impl Region {
    pub fn contains(&self, z: &[C64]) -> bool {
        match self {
            Region::Cube => z.iter().all(|c| c.re.abs() <= 1.0 && c.im.abs() <= 1.0),
            Region::Polydisc => z.iter().all(|c| c.norm() <= 1.0),
        }
    }

    /// Euclidean distance from `z` to the complement, `≤ 0` outside.
    pub fn margin(&self, z: &[C64]) -> f64 {
        match self {
            Region::Cube => z
                .iter()
                .flat_map(|c| [1.0 - c.re.abs(), 1.0 - c.im.abs()])
                .fold(f64::INFINITY, f64::min),
            Region::Polydisc => z.iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| match self {
                Region::Cube => C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)),
                Region::Polydisc => {
                    let r = rng.gen::<f64>().sqrt();
                    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
                }
            })
            .collect()
    }
}

/// Minimal-norm Newton projection `z ← z − (P(z)−c)·conj(∇P)/‖∇P‖²`.
pub fn project_to_y(p: &PolyC, c: C64, start: &[C64], max_iter: usize) -> Option<Vec<C64>> {
    let mut z = start.to_vec();
    let mut g = vec![C64::new(0.0, 0.0); p.n()];
    for _ in 0..max_iter {
        let f = p.eval_grad_into(&z, &mut g) - c;
        if f.norm() <= TOL_ON_Y {
            return Some(z);
        }
        let g2: f64 = g.iter().map(|x| x.norm_sqr()).sum();
        if g2 == 0.0 || !g2.is_finite() {
            return None;
        }
        for (zi, gi) in z.iter_mut().zip(&g) {
            *zi -= f * gi.conj() / g2;
        }
    }
    let f = p.eval(&z) - c;
    (f.norm() <= TOL_ON_Y).then_some(z)
}

/// One point of `G = Y ∩ region` by projection of a uniform point of the
/// region; `None` when the projection fails or leaves the region.
pub fn sample_on_y<R: Rng>(p: &PolyC, c: C64, region: Region, rng: &mut R) -> Option<Vec<C64>> {
    let start = region.sample(rng, p.n());
    let z = project_to_y(p, c, &start, 60)?;
    region.contains(&z).then_some(z)
}

/// `count` points of `G` (attempts are capped at `50 · count`).
pub fn sample_g(p: &PolyC, c: C64, region: Region, count: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 50 * count.max(1) {
        tries += 1;
        if let Some(z) = sample_on_y(p, c, region, &mut rng) {
            out.push(z);
        }
    }
    out
}

/// Local minimization of `‖z − target‖` over `Y` from `start`: steps along
/// the tangent part of `z − target` with a golden-section search over the
/// step length, each trial point reprojected onto `Y`.
pub fn minimize_distance_on_y(p: &PolyC, c: C64, target: &[C64], start: &[C64], iters: usize) -> Option<(Vec<C64>, f64)> {
    let n = p.n();
    let mut z = project_to_y(p, c, start, 100)?;
    let mut best = linalg::dist(&z, target);
    let mut g = vec![C64::new(0.0, 0.0); n];
    for _ in 0..iters {
        p.eval_grad_into(&z, &mut g);
        let g2: f64 = g.iter().map(|x| x.norm_sqr()).sum();
        if g2 == 0.0 {
            break;
        }
        // tangent component of (z − target): remove the conj(∇P) direction
        let d: Vec<C64> = z.iter().zip(target).map(|(a, b)| a - b).collect();
        let coef: C64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum::<C64>() / g2;
        let t: Vec<C64> = d.iter().zip(&g).map(|(di, gi)| di - coef * gi.conj()).collect();
        if linalg::norm(&t) <= 1e-15 * (1.0 + best) {
            break;
        }
        let trial = |s: f64| -> (f64, Option<Vec<C64>>) {
            let cand: Vec<C64> = z.iter().zip(&t).map(|(a, b)| a - b * s).collect();
            match project_to_y(p, c, &cand, 100) {
                Some(y) => (linalg::dist(&y, target), Some(y)),
                None => (f64::INFINITY, None),
            }
        };
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, 2.0);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = trial(x1);
        let mut f2 = trial(x2);
        for _ in 0..60 {
            if f1.0 <= f2.0 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = trial(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = trial(x2);
            }
            if b - a < 1e-14 {
                break;
            }
        }
        let cand = if f1.0 <= f2.0 { f1 } else { f2 };
        match cand {
            (dy, Some(y)) if dy < best => {
                let gain = best - dy;
                z = y;
                best = dy;
                if gain <= 1e-17 * (1.0 + best) {
                    break;
                }
            }
            _ => break,
        }
    }
    Some((z, best))
}

/// Constraint on points of `Y`.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// `|S(z)| ≥ bound`.
    ModulusAtLeast { poly: PolyC, bound: f64 },
    /// `|S(z)| ≤ bound`.
    ModulusAtMost { poly: PolyC, bound: f64 },
    /// `‖z‖ ≥ bound`.
    NormAtLeast { bound: f64 },
}

impl Constraint {
    pub fn holds(&self, z: &[C64]) -> bool {
        match self {
            Constraint::ModulusAtLeast { poly, bound } => poly.eval(z).norm() >= *bound,
            Constraint::ModulusAtMost { poly, bound } => poly.eval(z).norm() <= *bound,
            Constraint::NormAtLeast { bound } => linalg::norm(z) >= *bound,
        }
    }

    /// A radius `r ≤ cap` such that the constraint holds on the ball
    /// `B(z, r)`, certified by a majorant of `|S(z+h) − S(z)|`; `0` when no
    /// positive radius is certified.
    pub fn margin(&self, z: &[C64], cap: f64) -> f64 {
        let (poly, slack) = match self {
            Constraint::ModulusAtLeast { poly, bound } => (poly, poly.eval(z).norm() - bound),
            Constraint::ModulusAtMost { poly, bound } => (poly, bound - poly.eval(z).norm()),
            Constraint::NormAtLeast { bound } => return (linalg::norm(z) - bound).clamp(0.0, cap),
        };
        if !(slack > 0.0) {
            return 0.0;
        }
        let mut r = cap;
        for _ in 0..60 {
            if poly.increment_bound(z, r) < slack {
                return r;
            }
            r *= 0.5;
        }
        0.0
    }
}

/// `Ω = {z ∈ Y ∩ region : every constraint holds}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub region: Region,
    pub constraints: Vec<Constraint>,
}

impl DomainSpec {
    pub fn contains(&self, z: &[C64]) -> bool {
        self.region.contains(z) && self.constraints.iter().all(|c| c.holds(z))
    }

    /// Certified radius `≤ cap` of a ball around `z` inside the domain
    /// (ignoring the `Y` condition).
    pub fn margin(&self, z: &[C64], cap: f64) -> f64 {
        let mut r = cap.min(self.region.margin(z));
        if !(r > 0.0) {
            return 0.0;
        }
        for c in &self.constraints {
            r = r.min(c.margin(z, r));
            if r <= 0.0 {
                return 0.0;
            }
        }
        r
    }

    /// Points of `Ω` from points of `G` (attempts capped at `200 · count`).
    pub fn sample(&self, p: &PolyC, c: C64, count: usize, seed: u64) -> Vec<Vec<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count && tries < 200 * count.max(1) {
            tries += 1;
            if let Some(z) = sample_on_y(p, c, self.region, &mut rng) {
                if self.contains(&z) {
                    out.push(z);
                }
            }
        }
        out
    }
}

/// `{|z_index| ≥ bound}` as a constraint.
pub fn coordinate_at_least(n: usize, index: usize, bound: f64) -> Constraint {
    let mut e = vec![0u32; n];
    e[index] = 1;
    let poly = PolyC::from_terms(n, [(e, C64::new(1.0, 0.0))]).expect("valid monomial");
    Constraint::ModulusAtLeast { poly, bound }
}
