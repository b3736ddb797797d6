//! Reproducible experiment drivers with structured reports: punctured-cube
//! covers, the hyperbola `zy = ε²`, the quadrics `Σ z_j² = ε²` and the
//! product curves `∏(z−i) ∏(y−j) = ε²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::atlas::{self, AtlasConfig, AtlasMode};
use crate::domain::{self, Constraint, DomainSpec, Region};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::polyalg::{self, PolyC, SingularSet};
use crate::propagate;
use crate::valency::{self, DoublingParams};
use crate::whitney::{self, WhitneyCover};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Least-squares line `y ≈ slope·x + intercept` with its `R²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub x: String,
    pub y: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `R² = 1 − SS_res/SS_tot`; a constant `y` fits with `R² = 1`.
pub fn affine_fit(x_name: &str, y_name: &str, xs: &[f64], ys: &[f64]) -> Result<AffineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("affine fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("affine fit needs distinct x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(AffineFit { x: x_name.into(), y: y_name.into(), slope, intercept, r2 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub parameters: Value,
    pub records: Vec<Value>,
    pub fits: Vec<AffineFit>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, parameters: Value) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            parameters,
            records: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Tab-separated rows, one per record, columns in sorted key order.
    pub fn to_table(&self) -> String {
        let mut cols: Vec<String> = Vec::new();
        for r in &self.records {
            if let Value::Object(map) = r {
                for k in map.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
        }
        cols.sort();
        let mut out = cols.join("\t");
        out.push('\n');
        for r in &self.records {
            let row: Vec<String> = cols
                .iter()
                .map(|c| match r.get(c) {
                    Some(Value::String(s)) => s.clone(),
                    Some(v) if !v.is_null() => v.to_string(),
                    _ => String::new(),
                })
                .collect();
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Options shared by every experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Sample count for sampled checks (coverage, maxima, chains).
    pub samples: usize,
    pub mode: AtlasMode,
    pub gamma: Option<f64>,
    /// Samples per chart during atlas construction.
    pub chart_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { seed: 0, samples: 2000, mode: AtlasMode::Practical, gamma: None, chart_samples: 100 }
    }
}

impl ExperimentConfig {
    pub fn atlas_config(&self) -> AtlasConfig {
        AtlasConfig {
            mode: self.mode,
            gamma: self.gamma,
            verify_samples: self.chart_samples,
            seed: self.seed,
            ..AtlasConfig::default()
        }
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

// ------------------------------------------------------------ cube covers

/// Uniform point of `Q = [−1,1]^m` outside every open `δ`-ball.
pub fn sample_q_delta<R: Rng>(rng: &mut R, m: usize, punctures: &[Vec<f64>], delta: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let ok = punctures.iter().all(|p| p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= delta);
        if ok {
            return x;
        }
    }
}

/// Exact separation, sampled coverage of `Q_δ` and the count bound.
pub fn whitney_checks(cover: &WhitneyCover, coverage_points: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let bad = (0..cover.len()).filter(|&i| !cover.exact_separated(i)).count();
    out.push(Check::new("exact_separation", bad == 0, format!("{bad} of {} balls fail", cover.len())));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut missed = 0;
    for _ in 0..coverage_points {
        let x = sample_q_delta(&mut rng, cover.m, &cover.punctures, cover.delta);
        match cover.locate(&x) {
            Some(i) if cover.cube(i).contains(&x) => {}
            _ => missed += 1,
        }
    }
    out.push(Check::new("coverage", missed == 0, format!("{missed} of {coverage_points} points uncovered")));
    let bound = cover.count_bound();
    out.push(Check::new("count_bound", (cover.len() as f64) <= bound, format!("{} <= {bound:.6e}", cover.len())));
    out
}

/// Worst ratios along chains between random point pairs of `Q_δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    pub pairs: usize,
    pub max_len: usize,
    pub radius_ratios_ok: bool,
    pub min_intersection_ratio: f64,
}

pub fn chain_stats(cover: &WhitneyCover, pairs: usize, seed: u64) -> Result<ChainStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = ChainStats { pairs, max_len: 0, radius_ratios_ok: true, min_intersection_ratio: f64::INFINITY };
    for _ in 0..pairs {
        let a = sample_q_delta(&mut rng, cover.m, &cover.punctures, cover.delta);
        let b = sample_q_delta(&mut rng, cover.m, &cover.punctures, cover.delta);
        let ch = cover.find_chain(&a, &b)?;
        stats.max_len = stats.max_len.max(ch.len());
        for w in ch.indices.windows(2) {
            let (b1, b2) = (cover.ball(w[0]), cover.ball(w[1]));
            let q = b2.radius / b1.radius;
            stats.radius_ratios_ok &= q == 0.5 || q == 1.0 || q == 2.0;
            let r = whitney::intersection_ball_radius(&b1, &b2) / b1.radius.min(b2.radius);
            stats.min_intersection_ratio = stats.min_intersection_ratio.min(r);
        }
    }
    Ok(stats)
}

pub fn cover_cube(m: usize, punctures: &[Vec<f64>], delta: f64, gamma: f64, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if punctures.iter().any(|p| p.len() != m) {
        return Err(Error::Dimension { expected: m, got: punctures.iter().map(|p| p.len()).find(|&l| l != m).unwrap_or(0) });
    }
    let none = |_: u32, _: &[u32]| false;
    let cover = whitney::build_cover_dim(m, punctures, delta, gamma, &none)?;
    let mut rep = ExperimentReport::new(
        "cover-cube",
        cfg.seed,
        json!({ "m": m, "punctures": punctures, "delta": delta, "gamma": gamma, "samples": cfg.samples }),
    );
    for (level, &count) in cover.level_counts().iter().enumerate() {
        if count > 0 {
            rep.records.push(json!({ "level": level, "retained": count }));
        }
    }
    rep.records.push(json!({
        "level": "total",
        "retained": cover.len(),
        "count_bound": cover.count_bound(),
        "k": cover.k,
        "final_level": cover.final_level(),
        "stop_verified": cover.stop_verified,
    }));
    for c in whitney_checks(&cover, cfg.samples, cfg.seed) {
        rep.check(c.name, c.passed, c.detail);
    }
    if !cover.is_empty() {
        let pairs = (cfg.samples / 100).max(1);
        let st = chain_stats(&cover, pairs, cfg.seed ^ 0xc4a1)?;
        rep.check("chain_radius_ratios", st.radius_ratios_ok, format!("{} pairs, longest chain {}", st.pairs, st.max_len));
        rep.check(
            "chain_intersection_ratio",
            st.min_intersection_ratio >= 1.0 / 3.0,
            format!("min ratio {:.12}", st.min_intersection_ratio),
        );
    }
    Ok(rep)
}

// --------------------------------------------------------------- hyperbola

pub fn hyperbola_poly() -> PolyC {
    PolyC::from_terms(2, [(vec![1, 1], C64::new(1.0, 0.0))]).expect("valid monomial")
}

/// `Ω = {|z| ≥ 1/2} ∩ G` inside the given region.
pub fn hyperbola_omega(region: Region) -> DomainSpec {
    DomainSpec { region, constraints: vec![domain::coordinate_at_least(2, 0, 0.5)] }
}

/// Minimum of `‖w‖` over `Y` found by local minimization from `count`
/// sampled starts.
pub fn sampled_distance_to_origin(p: &PolyC, c: C64, count: usize, seed: u64) -> Option<f64> {
    let n = p.n();
    let zero = vec![C64::new(0.0, 0.0); n];
    domain::sample_g(p, c, Region::Cube, count, seed)
        .into_iter()
        .filter_map(|s| domain::minimize_distance_on_y(p, c, &zero, &s, 400).map(|r| r.1))
        .reduce(f64::min)
}

/// Measured `DC_y(G, Ω)` with `G` in the unit polydisc.
pub fn hyperbola_dc(eps: f64, samples: usize, seed: u64) -> Result<propagate::EmpiricalDc> {
    let p = hyperbola_poly();
    let c = C64::new(eps * eps, 0.0);
    let g = domain::sample_g(&p, c, Region::Polydisc, samples, seed);
    let om = hyperbola_omega(Region::Polydisc).sample(&p, c, samples, seed ^ 0x0e);
    propagate::empirical_dc(|z| z[1], &g, &om)
}

pub fn check_eps(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidParameter("no epsilon values".into()));
    }
    if let Some(e) = eps.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1/2), got {e}")));
    }
    Ok(())
}

pub fn hyperbola(eps: &[f64], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    check_eps(eps)?;
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let p = hyperbola_poly();
    let sing = vec![vec![C64::new(0.0, 0.0); 2]];
    let params = DoublingParams::new(valency::bezout_valency(2, 1))?;
    let mut rep = ExperimentReport::new(
        "hyperbola",
        cfg.seed,
        json!({ "epsilons": eps, "config": cfg, "k_const": 1.0, "rho": 0.1, "p": params.p }),
    );
    let (mut xs, mut kappas, mut lowers) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &e) in eps.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let c = C64::new(e * e, 0.0);
        let expected = 1.0 / (2.0 * e * e);
        let dc = hyperbola_dc(e, cfg.samples, seed)?;
        let rel = (dc.dc - expected).abs() / expected;
        rep.check(format!("dc_eps_{e}"), rel <= 0.05, format!("measured {:.6} expected {expected:.6}", dc.dc));
        let lower = propagate::kappa_lower(dc.dc, 0.1, &params)?;
        let dist = sampled_distance_to_origin(&p, c, 8, seed).unwrap_or(f64::NAN);
        let dist_err = (dist - 2f64.sqrt() * e).abs();
        rep.check(format!("distance_eps_{e}"), dist_err <= 1e-10, format!("|{dist:.15} - sqrt(2) eps| = {dist_err:.3e}"));
        let cycle_ok = (0..16).all(|k| {
            let t = std::f64::consts::TAU * k as f64 / 16.0;
            let w = [C64::from_polar(e, t), C64::from_polar(e, -t)];
            (p.eval(&w) - c).norm() <= 1e-15 && (linalg::norm(&w) - 2f64.sqrt() * e).abs() <= 1e-15
        });
        rep.check(format!("vanishing_cycle_eps_{e}"), cycle_ok, "cycle points on Y at distance sqrt(2) eps");
        let mut rec = json!({
            "eps": e,
            "log2_inv_eps": (1.0 / e).log2(),
            "dc_measured": dc.dc,
            "dc_expected": expected,
            "kappa_lower": lower,
            "distance": dist,
        });
        match atlas::build_atlas(&p, c, 1.0, e, &sing, &cfg.atlas_config()) {
            Ok(a) => {
                let cov = a.coverage(cfg.samples.min(1000), seed ^ 0xc0, Region::Cube);
                rep.check(format!("kappa_lower_le_kappa_eps_{e}"), lower <= a.kappa() as f64, format!("{lower:.4} <= {}", a.kappa()));
                rec["kappa"] = json!(a.kappa());
                rec["edges"] = json!(a.edges.len());
                rec["inconclusive"] = json!(a.inconclusive);
                rec["rejected"] = json!(a.rejected);
                rec["coverage"] = json!(cov.fraction());
                rec["kappa_bound"] = finite_or_null(a.summary().kappa_bound);
                xs.push((1.0 / e).log2());
                kappas.push(a.kappa() as f64);
                lowers.push(lower);
            }
            Err(err) => {
                rep.check(format!("atlas_eps_{e}"), false, err.to_string());
                rec["atlas_error"] = json!(err.to_string());
            }
        }
        rep.records.push(rec);
    }
    if xs.len() >= 2 {
        let fit = affine_fit("log2_inv_eps", "kappa", &xs, &kappas)?;
        if xs.len() >= 3 {
            rep.check("kappa_affine_fit", fit.r2 >= 0.99, format!("R^2 = {:.6}", fit.r2));
        }
        rep.fits.push(fit);
        let lf = affine_fit("log2_inv_eps", "kappa_lower", &xs, &lowers)?;
        if xs.len() >= 3 {
            rep.check("kappa_lower_affine_fit", lf.r2 >= 0.99, format!("R^2 = {:.6}", lf.r2));
        }
        rep.fits.push(lf);
    }
    Ok(rep)
}

// ----------------------------------------------------------------- quadric

pub fn quadric_poly(n: usize) -> PolyC {
    PolyC::from_terms(
        n,
        (0..n).map(|j| {
            let mut e = vec![0u32; n];
            e[j] = 2;
            (e, C64::new(1.0, 0.0))
        }),
    )
    .expect("valid monomials")
}

pub fn quadric(n: usize, eps: &[f64], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidParameter(format!("quadric dimension must be 2 or 3, got {n}")));
    }
    check_eps(eps)?;
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let p = quadric_poly(n);
    let sing = vec![vec![C64::new(0.0, 0.0); n]];
    let mut rep = ExperimentReport::new("quadric", cfg.seed, json!({ "n": n, "epsilons": eps, "config": cfg, "k_const": 2.0 }));
    let (mut xs, mut kappas) = (Vec::new(), Vec::new());
    for (i, &e) in eps.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let c = C64::new(e * e, 0.0);
        let pts = domain::sample_g(&p, c, Region::Cube, cfg.samples, seed);
        let min_norm = pts.iter().map(|z| linalg::norm(z)).fold(f64::INFINITY, f64::min);
        rep.check(format!("norm_lower_bound_eps_{e}"), min_norm >= e * (1.0 - 1e-12), format!("min sampled norm {min_norm:.15}"));
        let dist = sampled_distance_to_origin(&p, c, 8, seed).unwrap_or(f64::NAN);
        let err = (dist - e).abs();
        rep.check(format!("distance_eps_{e}"), err <= 1e-10, format!("|{dist:.15} - eps| = {err:.3e}"));
        let omega = DomainSpec { region: Region::Cube, constraints: vec![Constraint::NormAtLeast { bound: 0.5 }] };
        let om = omega.sample(&p, c, cfg.samples, seed ^ 0x0e);
        let dc = propagate::empirical_dc(|z| z[0], &pts, &om).ok();
        let mut rec = json!({
            "eps": e,
            "log2_inv_eps": (1.0 / e).log2(),
            "distance": dist,
            "dc_z1": dc.as_ref().map(|d| d.dc),
        });
        if n == 2 {
            match atlas::build_atlas(&p, c, 2.0, e, &sing, &cfg.atlas_config()) {
                Ok(a) => {
                    rec["kappa"] = json!(a.kappa());
                    rec["inconclusive"] = json!(a.inconclusive);
                    rec["coverage"] = json!(a.coverage(cfg.samples.min(1000), seed ^ 0xc0, Region::Cube).fraction());
                    xs.push((1.0 / e).log2());
                    kappas.push(a.kappa() as f64);
                }
                Err(err) => {
                    rep.check(format!("atlas_eps_{e}"), false, err.to_string());
                    rec["atlas_error"] = json!(err.to_string());
                }
            }
        }
        rep.records.push(rec);
    }
    if xs.len() >= 2 {
        let fit = affine_fit("log2_inv_eps", "kappa", &xs, &kappas)?;
        if xs.len() >= 3 {
            rep.check("kappa_affine_fit", fit.r2 >= 0.99, format!("R^2 = {:.6}", fit.r2));
        }
        rep.fits.push(fit);
    }
    Ok(rep)
}

// ----------------------------------------------------------------- product

/// Coefficients (ascending) of `∏_{j=0}^{d} (c + s·w − j)` in `w`.
fn shifted_factor(d: u32, c: f64, s: f64) -> Vec<f64> {
    let mut poly = vec![1.0];
    for j in 0..=d {
        let mut next = vec![0.0; poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k] += a * (c - j as f64);
            next[k + 1] += a * s;
        }
        poly = next;
    }
    poly
}

fn eval_real(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn derivative(coef: &[f64]) -> Vec<f64> {
    coef.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

/// Real roots of a real polynomial inside `(lo, hi)` that separate
/// consecutive sign changes on a fine grid, refined by bisection.
fn real_roots(coef: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let steps = 20_000;
    let mut out = Vec::new();
    let mut xa = lo;
    let mut fa = eval_real(coef, xa);
    for i in 1..=steps {
        let xb = lo + (hi - lo) * i as f64 / steps as f64;
        let fb = eval_real(coef, xb);
        if fa == 0.0 {
            out.push(xa);
        } else if fa * fb < 0.0 {
            let (mut a, mut b) = (xa, xb);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if eval_real(coef, mid) * eval_real(coef, a) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        xa = xb;
        fa = fb;
    }
    out
}

/// `P(w) = A(w₁)A(w₂)` with `A(w) = ∏_{j=0}^{d}(d/2 + (d+1)/2·w − j)`: the
/// product curve in coordinates mapping `[−1,1]` onto `[−1/2, d+1/2]`.
pub fn product_poly(d: u32) -> Result<PolyC> {
    let a = shifted_factor(d, d as f64 / 2.0, (d as f64 + 1.0) / 2.0);
    let mut terms = Vec::new();
    for (i, &ai) in a.iter().enumerate() {
        for (j, &aj) in a.iter().enumerate() {
            terms.push((vec![i as u32, j as u32], C64::new(ai * aj, 0.0)));
        }
    }
    PolyC::from_terms(2, terms)
}

/// Critical points of `A(w₁)A(w₂)`: pairs of critical points of `A`
/// (nonzero critical value) and pairs of roots of `A` (critical value 0).
pub fn product_critical_points(d: u32) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let a = shifted_factor(d, d as f64 / 2.0, (d as f64 + 1.0) / 2.0);
    let crit = real_roots(&derivative(&a), -1.0, 1.0);
    let roots: Vec<f64> = (0..=d).map(|j| (2.0 * j as f64 - d as f64) / (d as f64 + 1.0)).collect();
    let grid = |v: &[f64]| -> Vec<Vec<C64>> {
        v.iter().flat_map(|&x| v.iter().map(move |&y| vec![C64::new(x, 0.0), C64::new(y, 0.0)])).collect()
    };
    (grid(&crit), grid(&roots))
}

/// Smallest distance from `Y = {P = c}` to the given points, by local
/// minimization from projections of nearby starts.
pub fn distance_to_points(p: &PolyC, c: C64, points: &[Vec<C64>], seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for w in points {
        for _ in 0..6 {
            let s: Vec<C64> = w.iter().map(|x| x + C64::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05))).collect();
            if let Some((_, d)) = domain::minimize_distance_on_y(p, c, w, &s, 400) {
                best = best.min(d);
            }
        }
    }
    best.is_finite().then_some(best)
}

pub fn product(d: u32, eps: &[f64], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if !(1..=4).contains(&d) {
        return Err(Error::InvalidParameter(format!("product degree must lie in 1..=4, got {d}")));
    }
    check_eps(eps)?;
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let p = product_poly(d)?;
    let (crit, zeros) = product_critical_points(d);
    let mut all = crit.clone();
    all.extend(zeros.iter().cloned());
    let analytic = SingularSet::classify(&p, all)?;
    let brute = polyalg::find_singular_points(&p, 5, 200, cfg.seed)?;
    let mut rep = ExperimentReport::new("product", cfg.seed, json!({ "d": d, "epsilons": eps, "config": cfg }));
    rep.check(
        "critical_points_nondegenerate",
        analytic.all_nondegenerate(),
        format!("{} nonzero-level and {} zero-level points", crit.len(), zeros.len()),
    );
    let matched = brute.points.len() == analytic.points.len()
        && analytic.points.iter().all(|w| brute.points.iter().any(|b| linalg::dist(b, w) < 1e-6));
    rep.check(
        "critical_points_match_search",
        matched,
        format!("analytic {} vs Newton search {}", analytic.points.len(), brute.points.len()),
    );
    rep.check("nonzero_level_count", crit.len() == (d * d) as usize, format!("{} critical points with nonzero value, d^2 = {}", crit.len(), d * d));
    let k = polyalg::estimate_k(&p, &analytic, 4000)?;
    let (mut xs, mut kappas) = (Vec::new(), Vec::new());
    for (i, &e) in eps.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let c = C64::new(e * e, 0.0);
        let dist = distance_to_points(&p, c, &analytic.points, seed).ok_or(Error::NoConvergence)?;
        let delta = (0.9 * dist).min(0.5);
        let mut rec = json!({ "eps": e, "log2_inv_eps": (1.0 / e).log2(), "distance_to_sigma": dist, "delta": delta, "k_estimate": k });
        match atlas::build_atlas(&p, c, k, delta, &analytic.points, &cfg.atlas_config()) {
            Ok(a) => {
                rec["kappa"] = json!(a.kappa());
                rec["inconclusive"] = json!(a.inconclusive);
                rec["kappa_per_log"] = json!(a.kappa() as f64 / (1.0 / e).ln());
                xs.push((1.0 / e).log2());
                kappas.push(a.kappa() as f64);
            }
            Err(err) => {
                rep.check(format!("atlas_eps_{e}"), false, err.to_string());
                rec["atlas_error"] = json!(err.to_string());
            }
        }
        rep.records.push(rec);
    }
    if xs.len() >= 2 {
        let fit = affine_fit("log2_inv_eps", "kappa", &xs, &kappas)?;
        rep.check(
            "kappa_slope_positive",
            fit.slope > 0.0,
            format!("slope {:.4} per halving of eps", fit.slope),
        );
        let ratios: Vec<f64> = xs.iter().zip(&kappas).map(|(x, k)| k / (x * std::f64::consts::LN_2)).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        rep.check("kappa_per_log_stable", hi <= 1.15 * lo, format!("kappa/log(1/eps) in [{lo:.2}, {hi:.2}]"));
        rep.fits.push(fit);
    }
    Ok(rep)
}

// ------------------------------------------------------ ad-hoc hypersurface

/// Inputs of an atlas construction for `{P = level}`.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    pub poly: PolyC,
    pub level: C64,
    pub singular: Vec<Vec<C64>>,
    pub k_const: f64,
    pub delta: f64,
}

/// Fills in `Σ` by Newton search, `K` by sampling and `δ` as `0.9·dist(Y, Σ)`
/// (capped at `1/2`) unless given.
pub fn prepare_hypersurface(poly: PolyC, level: C64, k: Option<f64>, delta: Option<f64>, seed: u64) -> Result<Hypersurface> {
    let per_axis = if poly.n() <= 2 { 4 } else { 3 };
    let sing = polyalg::find_singular_points(&poly, per_axis, 200, seed)?;
    for (i, w) in sing.points.iter().enumerate() {
        if (poly.eval(w) - level).norm() <= 1e-9 {
            return Err(Error::DegenerateSingularity { index: i });
        }
    }
    let k_const = match k {
        Some(k) => k,
        None if sing.points.is_empty() => 1.0,
        None => polyalg::estimate_k(&poly, &sing, 4000)?,
    };
    let delta = match delta {
        Some(d) => d,
        None if sing.points.is_empty() => 0.5,
        None => (0.9 * distance_to_points(&poly, level, &sing.points, seed).ok_or(Error::NoConvergence)?).min(0.5),
    };
    Ok(Hypersurface { poly, level, singular: sing.points, k_const, delta })
}

fn hypersurface_params(h: &Hypersurface) -> Value {
    json!({
        "poly": h.poly.to_records(),
        "level": [h.level.re, h.level.im],
        "singular": h.singular.iter().map(|w| polyalg::realify(w)).collect::<Vec<_>>(),
        "k_const": h.k_const,
        "delta": h.delta,
    })
}

pub fn cover_hypersurface(h: &Hypersurface, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new("cover-hypersurface", cfg.seed, json!({ "input": hypersurface_params(h), "config": cfg }));
    let a = atlas::build_atlas(&h.poly, h.level, h.k_const, h.delta, &h.singular, &cfg.atlas_config())?;
    let cov = a.coverage(cfg.samples.min(2000), cfg.seed ^ 0xc0, Region::Cube);
    let summary = a.summary();
    rep.records.push(serde_json::to_value(&summary).expect("summary serializes"));
    rep.records.push(json!({ "coverage_samples": cov.samples, "coverage_covered": cov.covered, "coverage": cov.fraction() }));
    let failed = a.charts.iter().filter(|c| !c.certificate.passed).count();
    rep.check("charts_verified", failed == 0, format!("{failed} of {} charts fail", a.kappa()));
    if a.mode == AtlasMode::Covering {
        rep.check("coverage", cov.covered == cov.samples, format!("{} of {} sampled points covered", cov.covered, cov.samples));
    }
    Ok(rep)
}

/// Chart chain and Kobayashi bound between the projections of `from` and
/// `to` onto `Y`.
pub fn chain_report(h: &Hypersurface, from: &[C64], to: &[C64], cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "chain",
        cfg.seed,
        json!({ "input": hypersurface_params(h), "from": polyalg::realify(from), "to": polyalg::realify(to), "config": cfg }),
    );
    let a = atlas::build_atlas(&h.poly, h.level, h.k_const, h.delta, &h.singular, &cfg.atlas_config())?;
    let (pn, scale) = h.poly.normalized()?;
    let level = h.level / scale;
    let u1 = domain::project_to_y(&pn, level, from, 100).ok_or(Error::NoConvergence)?;
    let u2 = domain::project_to_y(&pn, level, to, 100).ok_or(Error::NoConvergence)?;
    let kob = a.kobayashi_bound(&u1, &u2)?;
    rep.records.push(json!({
        "kappa": a.kappa(),
        "from_on_y": polyalg::realify(&u1),
        "to_on_y": polyalg::realify(&u2),
        "chain": kob.chain.charts,
        "edge_rho": kob.chain.edge_rho,
        "length": kob.chain.len(),
        "kobayashi_bound": kob.bound,
    }));
    for (i, l) in kob.links.iter().enumerate() {
        rep.records.push(json!({ "link": i, "alpha": l.alpha.norm(), "beta": l.beta.norm(), "poincare": l.distance, "ok": l.ok }));
    }
    rep.check("links_in_third_disk", kob.all_ok, format!("{} links", kob.links.len()));
    rep.check("bound_is_three_ell", kob.bound == 3.0 * kob.chain.len() as f64, format!("{} = 3 * {}", kob.bound, kob.chain.len()));
    Ok(rep)
}

/// Arguments of the doubling-constant calculator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingArgs {
    pub p: u32,
    pub a_p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    /// `(n, d, d₁, K, δ)` for the polynomial bound.
    pub poly: Option<(usize, u32, u32, f64, f64)>,
    /// Doubling constant for the κ lower bound.
    pub dc: Option<f64>,
}

pub fn doubling_bound(args: &DoublingArgs, seed: u64) -> Result<ExperimentReport> {
    let params = DoublingParams::with_a_p(args.p, args.a_p)?;
    let mut rep = ExperimentReport::new("doubling-bound", seed, serde_json::to_value(args).expect("args serialize"));
    let cp = valency::c_p_constant(&params, args.alpha, args.beta)?;
    let nc = valency::nonconcentric_constant(&params, args.rho)?;
    let c = valency::nonconcentric_c(&params)?;
    rep.records.push(json!({
        "p": params.p,
        "a_p": params.a_p,
        "a_prime": params.a_prime,
        "c_p_alpha_beta": cp,
        "nonconcentric": nc,
        "nonconcentric_c": c,
        "tail_sum_alpha": valency::tail_sum(params.p, args.alpha)?,
    }));
    let homog = (nc * args.rho.powi(params.p as i32) - c).abs() / c;
    rep.check("nonconcentric_homogeneity", homog <= 1e-12, format!("relative deviation {homog:.3e}"));
    if let Some(dc) = args.dc {
        let kl = propagate::kappa_lower(dc, args.rho, &params)?;
        rep.records.push(json!({ "dc": dc, "kappa_lower": kl }));
    }
    if let Some((n, d, d1, k, delta)) = args.poly {
        let b = propagate::poly_dc_bound(n, d, d1, k, delta, args.a_p)?;
        rep.records.push(json!({
            "n": n, "d": d, "d1": d1, "k_const": k, "delta": delta,
            "bezout_p": b.p, "c3": b.c3, "exponent": b.exponent, "log_bound": b.log_bound,
            "bound": finite_or_null(b.bound),
            "kappa_bound": finite_or_null(atlas::kappa_bound(n, d, k, delta)),
        }));
    }
    Ok(rep)
}

// ------------------------------------------------------------------ verify

fn descents_brute_force(n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, counts: &mut Vec<u64>) {
        if k == perm.len() {
            let d = perm.windows(2).filter(|w| w[0] > w[1]).count();
            counts[d] += 1;
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, counts);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, &mut counts);
    counts
}

/// Quick self-check over every module on small instances.
pub fn verify(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    use num_traits::ToPrimitive;
    let mut rep = ExperimentReport::new("verify", cfg.seed, json!({ "config": cfg }));

    let tri = valency::EulerianTriangle::new(7);
    let eul_ok = (1..=7).all(|n| {
        let row: Vec<u64> = tri.row(n).iter().map(|b| b.to_u64().unwrap_or(0)).collect();
        row == descents_brute_force(n)
    });
    rep.check("eulerian_vs_permutations", eul_ok, "n <= 7");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let z = C64::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..std::f64::consts::TAU));
        for n in 1..=6 {
            let closed = valency::polylog_neg(n, z)?;
            let series = dd::polylog_series(n as u32, z, 6000);
            worst = worst.max((closed - series).norm() / series.norm());
        }
    }
    rep.check("polylog_closed_form", worst <= 1e-10, format!("max relative error {worst:.3e}"));

    let punct = vec![vec![0.0, 0.0, 0.0]];
    let none = |_: u32, _: &[u32]| false;
    let cover = whitney::build_cover_dim(3, &punct, 1.0 / 16.0, 2.0, &none)?;
    for c in whitney_checks(&cover, cfg.samples.min(10_000), cfg.seed) {
        rep.check(format!("whitney_{}", c.name), c.passed, c.detail);
    }
    let st = chain_stats(&cover, 20, cfg.seed)?;
    rep.check("whitney_chain_ratios", st.radius_ratios_ok && st.min_intersection_ratio >= 1.0 / 3.0, format!("min intersection ratio {:.6}", st.min_intersection_ratio));

    let eps = 0.1;
    let p = hyperbola_poly();
    let sing = vec![vec![C64::new(0.0, 0.0); 2]];
    let a = atlas::build_atlas(&p, C64::new(eps * eps, 0.0), 1.0, eps, &sing, &AtlasConfig { verify_samples: 20, seed: cfg.seed, ..AtlasConfig::default() })?;
    let step = (a.kappa() / 50).max(1);
    let bad = (0..a.kappa())
        .step_by(step)
        .filter(|&j| !crate::ift::verify_chart(&a.charts[j].chart, 200, cfg.seed ^ j as u64).passed)
        .count();
    rep.check("hyperbola_charts", bad == 0, format!("{bad} failing among every {step}-th of {} charts", a.kappa()));

    let dist = sampled_distance_to_origin(&quadric_poly(2), C64::new(eps * eps, 0.0), 4, cfg.seed).unwrap_or(f64::NAN);
    rep.check("quadric_distance", (dist - eps).abs() <= 1e-10, format!("{dist:.15}"));

    // level-0 cube [0,2]² and the level-1 cube in the corner of its face
    let b = whitney::Ball { center: vec![1.0, 1.0], radius: 2f64.sqrt() };
    let b2 = whitney::Ball { center: vec![2.5, 0.5], radius: 0.5 * 2f64.sqrt() };
    let worst_ratio = whitney::intersection_ball_radius(&b, &b2) / b2.radius;
    rep.check("worst_intersection_ratio", (worst_ratio - (1.5 - 1.25f64.sqrt())).abs() <= 1e-12, format!("{worst_ratio:.15}"));
    Ok(rep)
}

/// Double-double arithmetic for reference sums.
mod dd {
    use crate::linalg::C64;

    #[derive(Clone, Copy)]
    pub struct Dd(f64, f64);

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    impl Dd {
        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.0, o.0);
            let (hi, lo) = two_sum(s, e + self.1 + o.1);
            Dd(hi, lo)
        }

        pub fn mul_f(self, b: f64) -> Dd {
            let p = self.0 * b;
            let e = self.0.mul_add(b, -p);
            let (hi, lo) = two_sum(p, e + self.1 * b);
            Dd(hi, lo)
        }

        pub fn neg(self) -> Dd {
            Dd(-self.0, -self.1)
        }

        pub fn to_f64(self) -> f64 {
            self.0 + self.1
        }
    }

    /// `Σ_{k<terms} k^n z^k` with every term and partial sum in
    /// double-double precision.
    pub fn polylog_series(n: u32, z: C64, terms: usize) -> C64 {
        let (mut zr, mut zi) = (Dd(1.0, 0.0), Dd(0.0, 0.0));
        let (mut sr, mut si) = (Dd(0.0, 0.0), Dd(0.0, 0.0));
        for k in 1..terms {
            let nr = zr.mul_f(z.re).add(zi.mul_f(z.im).neg());
            let ni = zr.mul_f(z.im).add(zi.mul_f(z.re));
            zr = nr;
            zi = ni;
            let (mut tr, mut ti) = (zr, zi);
            for _ in 0..n {
                tr = tr.mul_f(k as f64);
                ti = ti.mul_f(k as f64);
            }
            sr = sr.add(tr);
            si = si.add(ti);
        }
        C64::new(sr.to_f64(), si.to_f64())
    }
}
