//! Quantitative implicit-function charts of `Y = {P = c}`.
//!
//! In frame coordinates `z = origin + U v` the last axis is the conjugate
//! gradient direction, so `∂f/∂v_j(0) = 0` for `j < n` and
//! `∂f/∂v_n(0) = ‖∇P(origin)‖ > 0`. Over the diskoball `B̄_θ × D_θ` the
//! hypersurface is the graph `v_n = φ(v̄)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::polyalg::PolyC;

/// Newton residual target.
pub const TOL_RESID: f64 = 1e-12;
/// Residual accepted on return from the implicit solve.
pub const TOL_RESID_ACCEPT: f64 = 1e-10;
pub const MAX_ITER: usize = 50;
/// Slope bound on `φ` certified by the charts.
pub const SLOPE: f64 = 1.0 / 49.0;
/// Lower bound on the projection distortion `1/√(1+SLOPE²)`.
pub const MIN_DISTORTION: f64 = 0.99;

/// `θ = η / (50 M √(2n(n−1)))`.
pub fn chart_radius(eta: f64, m: f64, n: usize) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter("eta must be positive (near-critical point)".into()));
    }
    if !(m > 0.0) || n < 2 {
        return Err(Error::InvalidParameter("need M > 0 and n >= 2".into()));
    }
    let nf = n as f64;
    Ok(eta / (50.0 * m * (2.0 * nf * (nf - 1.0)).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFrame {
    /// Row-major `n × n` unitary matrix; column `j` is the image of `e_j`.
    pub matrix: Vec<C64>,
    pub origin: Vec<C64>,
}

impl UnitaryFrame {
    pub fn n(&self) -> usize {
        self.origin.len()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        let n = self.n();
        (0..n).map(|i| self.matrix[i * n + j]).collect()
    }

    pub fn to_ambient(&self, v: &[C64], z: &mut [C64]) {
        linalg::mat_vec(&self.matrix, v, z);
        for (zi, oi) in z.iter_mut().zip(&self.origin) {
            *zi += oi;
        }
    }

    pub fn to_frame(&self, z: &[C64]) -> Vec<C64> {
        let d: Vec<C64> = z.iter().zip(&self.origin).map(|(a, b)| a - b).collect();
        let mut v = vec![C64::new(0.0, 0.0); self.n()];
        linalg::adj_vec(&self.matrix, &d, &mut v);
        v
    }
}

/// Unitary frame at `z0` whose last column is `conj(grad)/‖grad‖`, built
/// from one complex Householder reflection.
pub fn align_frame(z0: &[C64], grad: &[C64]) -> Result<UnitaryFrame> {
    let n = grad.len();
    if z0.len() != n {
        return Err(Error::Dimension { expected: n, got: z0.len() });
    }
    let g = linalg::norm(grad);
    if !(g > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let u: Vec<C64> = grad.iter().map(|c| c.conj() / g).collect();
    // β rotates u so its last entry is real and non-negative
    let beta = if u[n - 1].norm() > 0.0 {
        u[n - 1].conj() / u[n - 1].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    // w = e_n + βu; H = I − 2ww*/(w*w) sends e_n to −βu
    let mut w: Vec<C64> = u.iter().map(|x| beta * x).collect();
    w[n - 1] += 1.0;
    let ww: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let mut h = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            h[i * n + j] = C64::new(id, 0.0) - 2.0 * w[i] * w[j].conj() / ww;
        }
    }
    // U = H · diag(1, …, 1, −β̄) so that U e_n = u
    for i in 0..n {
        h[i * n + n - 1] *= -beta.conj();
    }
    Ok(UnitaryFrame { matrix: h, origin: z0.to_vec() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskoBall {
    pub frame: UnitaryFrame,
    pub radius: f64,
}

#[derive(Clone, Debug)]
pub struct ImplicitChart {
    pub diskoball: DiskoBall,
    pub poly: PolyC,
    pub level: C64,
    pub eta: f64,
    pub m_bound: f64,
}

/// Serializable chart summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub origin: Vec<C64>,
    pub frame: Vec<C64>,
    pub theta: f64,
    pub eta: f64,
    pub m_bound: f64,
    pub level: C64,
}

impl ImplicitChart {
    /// Chart of `{P = level}` centred at `origin ∈ Y` with radius `theta`.
    pub fn new(poly: &PolyC, level: C64, origin: &[C64], theta: f64, m_bound: f64) -> Result<Self> {
        let n = poly.n();
        if n < 2 {
            return Err(Error::InvalidParameter("charts need n >= 2".into()));
        }
        if !(theta > 0.0) {
            return Err(Error::InvalidParameter("theta must be positive".into()));
        }
        let mut g = vec![C64::new(0.0, 0.0); n];
        let val = poly.eval_grad_into(origin, &mut g);
        if (val - level).norm() > TOL_RESID_ACCEPT {
            return Err(Error::ChartRejected(format!("origin off Y: residual {:.3e}", (val - level).norm())));
        }
        let frame = align_frame(origin, &g)?;
        Ok(ImplicitChart {
            diskoball: DiskoBall { frame, radius: theta },
            poly: poly.clone(),
            level,
            eta: linalg::norm(&g),
            m_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    pub fn theta(&self) -> f64 {
        self.diskoball.radius
    }

    pub fn frame(&self) -> &UnitaryFrame {
        &self.diskoball.frame
    }

    pub fn record(&self) -> ChartRecord {
        ChartRecord {
            origin: self.frame().origin.clone(),
            frame: self.frame().matrix.clone(),
            theta: self.theta(),
            eta: self.eta,
            m_bound: self.m_bound,
            level: self.level,
        }
    }

    /// Ambient point of frame coordinates `(vbar, vn)`.
    pub fn point(&self, vbar: &[C64], vn: C64) -> Vec<C64> {
        let n = self.n();
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(vbar);
        v.push(vn);
        let mut z = vec![C64::new(0.0, 0.0); n];
        self.frame().to_ambient(&v, &mut z);
        z
    }

    /// `f(v)` and `∂f/∂v_j` in frame coordinates.
    pub fn f_and_grad(&self, vbar: &[C64], vn: C64, df: &mut [C64]) -> C64 {
        let n = self.n();
        let z = self.point(vbar, vn);
        let mut g = vec![C64::new(0.0, 0.0); n];
        let val = self.poly.eval_grad_into(&z, &mut g);
        // ∂f/∂v_j = Σ_i ∂P/∂z_i U_ij
        let u = &self.frame().matrix;
        for (j, d) in df.iter_mut().enumerate().take(n) {
            *d = (0..n).map(|i| g[i] * u[i * n + j]).sum();
        }
        val - self.level
    }

    /// `φ(v̄)` by Newton iteration on the last frame coordinate from 0,
    /// with step halving whenever the residual grows.
    pub fn solve_implicit(&self, vbar: &[C64]) -> Result<C64> {
        let n = self.n();
        if vbar.len() != n - 1 {
            return Err(Error::Dimension { expected: n - 1, got: vbar.len() });
        }
        let theta = self.theta();
        if linalg::norm(vbar) > theta * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter("point outside the chart ball".into()));
        }
        let mut df = vec![C64::new(0.0, 0.0); n];
        let mut vn = C64::new(0.0, 0.0);
        let mut f = self.f_and_grad(vbar, vn, &mut df);
        for _ in 0..MAX_ITER {
            if f.norm() <= TOL_RESID {
                return Ok(vn);
            }
            let d = df[n - 1];
            if d.norm() == 0.0 {
                return Err(Error::NoConvergence);
            }
            let step = f / d;
            let mut t = 1.0;
            loop {
                let cand = vn - step * t;
                let fc = self.f_and_grad(vbar, cand, &mut df);
                if fc.norm() < f.norm() || t < 1e-3 {
                    vn = cand;
                    f = fc;
                    break;
                }
                t *= 0.5;
            }
            if vn.norm() > theta {
                return Err(Error::NoConvergence);
            }
            if (step * t).norm() <= 1e-16 * (theta + vn.norm()) {
                break;
            }
        }
        if f.norm() <= TOL_RESID_ACCEPT {
            Ok(vn)
        } else {
            Err(Error::NoConvergence)
        }
    }

    /// `∇φ(v̄) = −(∂f/∂v_j)/(∂f/∂v_n)` at `(v̄, vn)`.
    pub fn grad_phi(&self, vbar: &[C64], vn: C64) -> Vec<C64> {
        let n = self.n();
        let mut df = vec![C64::new(0.0, 0.0); n];
        self.f_and_grad(vbar, vn, &mut df);
        (0..n - 1).map(|j| -df[j] / df[n - 1]).collect()
    }

    /// Number of zeros of `v_n ↦ f(v̄, v_n)` in the open disk `|v_n| < θ`,
    /// from the winding number of the boundary image.
    pub fn zeros_on_line(&self, vbar: &[C64]) -> Option<i64> {
        let theta = self.theta();
        let mut df = vec![C64::new(0.0, 0.0); self.n()];
        let mut k = 64usize;
        'outer: while k <= 1 << 14 {
            let mut total = 0.0;
            let mut prev = self.f_and_grad(vbar, C64::from_polar(theta, 0.0), &mut df);
            if prev.norm() == 0.0 {
                return None;
            }
            for i in 1..=k {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                let cur = self.f_and_grad(vbar, C64::from_polar(theta, t), &mut df);
                if cur.norm() == 0.0 {
                    return None;
                }
                let da = (cur / prev).arg();
                if da.abs() > std::f64::consts::FRAC_PI_4 {
                    k *= 4;
                    continue 'outer;
                }
                total += da;
                prev = cur;
            }
            return Some((total / (2.0 * std::f64::consts::PI)).round() as i64);
        }
        None
    }
}

/// Sampled certificate for one chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartCertificate {
    pub samples: usize,
    pub slope_bound: f64,
    pub max_grad_phi: f64,
    /// `max |φ| / θ`.
    pub max_phi_ratio: f64,
    pub max_residual: f64,
    /// `max |φ(a) − φ(b)| / ‖a − b‖` over sampled segments.
    pub max_lipschitz: f64,
    /// `1/√(1 + max_grad_phi²)`.
    pub distortion: f64,
    pub newton_failures: usize,
    pub uniqueness_lines: usize,
    pub uniqueness_ok: bool,
    pub passed: bool,
}

impl ChartCertificate {
    pub fn require(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::ChartRejected(format!(
                "grad {:.4e}, tube {:.4e}, residual {:.3e}, failures {}, unique {}",
                self.max_grad_phi, self.max_phi_ratio, self.max_residual, self.newton_failures, self.uniqueness_ok
            )))
        }
    }
}

/// Uniform sample of the complex `k`-ball of radius `r`; `on_sphere` puts
/// the point on the boundary.
pub fn sample_ball<R: Rng>(rng: &mut R, k: usize, r: f64, on_sphere: bool) -> Vec<C64> {
    let mut x: Vec<f64> = (0..2 * k).map(|_| rng.sample(StandardNormal)).collect();
    let nrm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let rad = if on_sphere {
        r
    } else {
        r * rng.gen::<f64>().powf(1.0 / (2 * k) as f64)
    };
    for a in x.iter_mut() {
        *a *= rad / nrm;
    }
    x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Checks `‖∇φ‖ ≤ 1/49`, `|φ| ≤ θ/49`, the residual, segment Lipschitz
/// ratios and uniqueness on vertical lines at `samples` points.
pub fn verify_chart(chart: &ImplicitChart, samples: usize, seed: u64) -> ChartCertificate {
    verify_chart_with(chart, samples, seed, SLOPE)
}

/// As [`verify_chart`] with a custom slope bound `L`: `‖∇φ‖ ≤ L`,
/// `|φ| ≤ Lθ`.
pub fn verify_chart_with(chart: &ImplicitChart, samples: usize, seed: u64, slope: f64) -> ChartCertificate {
    let n = chart.n();
    let theta = chart.theta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_grad: f64 = 0.0;
    let mut max_phi: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    let mut max_lip: f64 = 0.0;
    let mut failures = 0usize;
    let mut prev: Option<(Vec<C64>, C64)> = None;
    let mut df = vec![C64::new(0.0, 0.0); n];
    for i in 0..samples {
        // holomorphic maxima sit on the boundary sphere: sample it half the time
        let vbar = if i == 0 {
            vec![C64::new(0.0, 0.0); n - 1]
        } else {
            sample_ball(&mut rng, n - 1, theta, i % 2 == 1)
        };
        match chart.solve_implicit(&vbar) {
            Ok(vn) => {
                let res = chart.f_and_grad(&vbar, vn, &mut df).norm();
                let gp: f64 = (0..n - 1).map(|j| (df[j] / df[n - 1]).norm_sqr()).sum::<f64>().sqrt();
                max_res = max_res.max(res);
                max_grad = max_grad.max(gp);
                max_phi = max_phi.max(vn.norm() / theta);
                if let Some((pv, pn)) = &prev {
                    let d = linalg::dist(pv, &vbar);
                    if d > 0.0 {
                        max_lip = max_lip.max((vn - pn).norm() / d);
                    }
                }
                prev = Some((vbar, vn));
            }
            Err(_) => failures += 1,
        }
    }
    let lines = (samples / 100).clamp(1, 8);
    let mut unique = true;
    for i in 0..lines {
        let vbar = if i == 0 {
            vec![C64::new(0.0, 0.0); n - 1]
        } else {
            sample_ball(&mut rng, n - 1, theta, i % 2 == 1)
        };
        if chart.zeros_on_line(&vbar) != Some(1) {
            unique = false;
        }
    }
    let distortion = 1.0 / (1.0 + max_grad * max_grad).sqrt();
    let passed = failures == 0
        && samples > 0
        && max_grad <= slope
        && max_phi <= slope
        && max_res <= TOL_RESID_ACCEPT
        && max_lip <= slope * (1.0 + 1e-9) + 1e-12
        && unique;
    ChartCertificate {
        samples,
        slope_bound: slope,
        max_grad_phi: max_grad,
        max_phi_ratio: max_phi,
        max_residual: max_res,
        max_lipschitz: max_lip,
        distortion,
        newton_failures: failures,
        uniqueness_lines: lines,
        uniqueness_ok: unique,
        passed,
    }
}
