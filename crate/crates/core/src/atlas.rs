//! Doubling chart atlases of `G = Y ∩ Q` built on a Whitney cover of the
//! realified cube punctured at the singular points of `P`.
//!
//! Every chart is an implicit-function chart `ψ_j(u) = φ̃_j(λ_j u)` over the
//! unit ball, with IFT radius `r_j = θ_j` and doubling radius `λ_j = r_j/4`.
//! Three construction modes exist:
//!
//! * `Faithful`: γ and constants from the theorem; runs only under a budget.
//! * `Practical`: one chart per ball meeting `Y`,
//!   `r_j = min(12R_j, chart_radius(η_j, M, n))`; coverage is measured.
//! * `Covering`: `r_j = 12R_j` with cubes refined until the chart verifies
//!   under a configurable slope bound, so each chart contains `Y ∩ B_j`.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{self, DomainSpec, Region};
use crate::error::{Error, Result};
use crate::ift::{self, ChartCertificate, ImplicitChart};
use crate::linalg::{self, C64};
use crate::polyalg::{self, complexify, realify, PolyC};
use crate::whitney::{self, Ball, SubCube};

/// Default γ outside faithful mode.
pub const PRACTICAL_GAMMA: f64 = 6.0;
/// Certified ρ required of faithful-mode edges.
pub const FAITHFUL_RHO: f64 = 0.1;

/// `γ = 600 n d⁴ √(2n(n−1)) / K + 1`.
pub fn faithful_gamma(n: usize, d: u32, k: f64) -> f64 {
    let nf = n as f64;
    600.0 * nf * (d as f64).powi(4) * (2.0 * nf * (nf - 1.0)).sqrt() / k + 1.0
}

/// `(C₁, C₂) = ((4000 n² d⁵)^{2n}, 6000 n³ d⁴)`.
pub fn kappa_constants(n: usize, d: u32) -> (f64, f64) {
    let nf = n as f64;
    let df = d as f64;
    ((4000.0 * nf * nf * df.powi(5)).powi(2 * n as i32), 6000.0 * nf.powi(3) * df.powi(4))
}

/// `κ ≤ C₁/K^{2n} · log₂(C₂/(Kδ))`, clamped at 0.
pub fn kappa_bound(n: usize, d: u32, k: f64, delta: f64) -> f64 {
    let (c1, c2) = kappa_constants(n, d);
    (c1 / k.powi(2 * n as i32) * (c2 / (k * delta)).log2()).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtlasMode {
    Faithful,
    Practical,
    Covering,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasConfig {
    pub mode: AtlasMode,
    /// γ override (ignored in faithful mode).
    pub gamma: Option<f64>,
    /// Samples per chart during construction.
    pub verify_samples: usize,
    /// Slope bound verified by covering-mode charts.
    pub covering_slope: f64,
    /// Extra subdivision depth allowed below a Whitney cube.
    pub max_refine: u32,
    /// Largest estimated Whitney count faithful mode will construct.
    pub budget: f64,
    /// Smallest edge ρ used by chain searches; defaults by mode.
    pub rho_min: Option<f64>,
    pub seed: u64,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        AtlasConfig {
            mode: AtlasMode::Practical,
            gamma: None,
            verify_samples: 100,
            covering_slope: 0.5,
            max_refine: 14,
            budget: 5e7,
            rho_min: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AtlasChart {
    pub cube: SubCube,
    pub ball: Ball,
    pub base_point: Vec<C64>,
    pub chart: ImplicitChart,
    /// IFT radius `r_j`.
    pub r: f64,
    /// Doubling radius `λ_j = r_j / 4`.
    pub lambda: f64,
    /// Slope bound the chart was verified against.
    pub slope: f64,
    pub certificate: ChartCertificate,
}

impl AtlasChart {
    /// `ψ_j(u)` for `u` in the unit ball of `C^{n−1}`.
    pub fn psi(&self, u: &[C64]) -> Result<Vec<C64>> {
        let vbar: Vec<C64> = u.iter().map(|x| x * self.lambda).collect();
        let vn = self.chart.solve_implicit(&vbar)?;
        Ok(self.chart.point(&vbar, vn))
    }

    /// Chart coordinates `u = π(z)/λ` (no membership test).
    pub fn preimage(&self, z: &[C64]) -> Vec<C64> {
        let v = self.chart.frame().to_frame(z);
        v[..v.len() - 1].iter().map(|x| x / self.lambda).collect()
    }

    /// Whether `z` lies on `ψ_j(B̄₁)`.
    pub fn contains(&self, z: &[C64]) -> bool {
        let v = self.chart.frame().to_frame(z);
        let n = v.len();
        let vbar = &v[..n - 1];
        if linalg::norm(vbar) > self.lambda * (1.0 + 1e-12) || v[n - 1].norm() > self.r {
            return false;
        }
        match self.chart.solve_implicit(vbar) {
            Ok(phi) => (v[n - 1] - phi).norm() <= 1e-8 * self.r + 1e-10 / self.chart.eta,
            Err(_) => false,
        }
    }

    fn q(&self) -> f64 {
        (1.0 + self.slope * self.slope).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasEdge {
    pub i: usize,
    pub j: usize,
    pub rho: f64,
    /// A point of `U_i ∩ U_j` at the centre of the certified subballs.
    pub witness: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct Atlas {
    /// Normalized polynomial (`‖P‖₁ = 1`) and level.
    pub poly: PolyC,
    pub level: C64,
    pub k_const: f64,
    pub delta: f64,
    pub gamma: f64,
    pub mode: AtlasMode,
    pub markov: f64,
    pub singular: Vec<Vec<C64>>,
    pub charts: Vec<AtlasChart>,
    pub edges: Vec<AtlasEdge>,
    pub rho_min: f64,
    /// Whitney balls that met `Y` (possibly) before refinement.
    pub whitney_balls: usize,
    /// Balls where no base point was found.
    pub inconclusive: usize,
    /// Charts that failed verification and were dropped.
    pub rejected: usize,
    /// Face-adjacent chart pairs examined for edges.
    pub adjacent_pairs: usize,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: CubeIndex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasSummary {
    pub mode: AtlasMode,
    pub gamma: f64,
    pub delta: f64,
    pub k_const: f64,
    pub markov: f64,
    pub kappa: usize,
    pub edges: usize,
    pub whitney_balls: usize,
    pub inconclusive: usize,
    pub rejected: usize,
    pub adjacent_pairs: usize,
    pub min_edge_rho: Option<f64>,
    pub kappa_bound: f64,
}

/// Map from cubes to chart indices with the set of strict ancestors.
#[derive(Clone, Debug, Default)]
struct CubeIndex {
    map: HashMap<(u32, Vec<u32>), usize>,
    interior: HashSet<(u32, Vec<u32>)>,
    max_level: u32,
}

impl CubeIndex {
    fn insert(&mut self, cube: &SubCube, idx: usize) {
        self.map.insert((cube.level, cube.coords.clone()), idx);
        self.max_level = self.max_level.max(cube.level);
        let mut c = cube.coords.clone();
        for l in (1..cube.level).rev() {
            for ci in c.iter_mut() {
                *ci /= 2;
            }
            if !self.interior.insert((l, c.clone())) {
                break;
            }
        }
    }

    fn get(&self, level: u32, c: &[u32]) -> Option<usize> {
        self.map.get(&(level, c.to_vec())).copied()
    }

    fn is_interior(&self, level: u32, c: &[u32]) -> bool {
        self.interior.contains(&(level, c.to_vec()))
    }

    fn neighbors(&self, cube: &SubCube) -> BTreeSet<usize> {
        let m = cube.coords.len();
        let mut out = BTreeSet::new();
        for axis in 0..m {
            for dir in [-1i64, 1] {
                let v = cube.coords[axis] as i64 + dir;
                if v < 0 || v >= (1i64 << cube.level) {
                    continue;
                }
                let mut nb = cube.coords.clone();
                nb[axis] = v as u32;
                self.face(cube.level, &nb, axis, dir, &mut out);
            }
        }
        out
    }

    fn face(&self, level: u32, nb: &[u32], axis: usize, dir: i64, out: &mut BTreeSet<usize>) {
        if let Some(i) = self.get(level, nb) {
            out.insert(i);
            return;
        }
        if self.is_interior(level, nb) {
            let m = nb.len();
            let fixed = if dir > 0 { 2 * nb[axis] } else { 2 * nb[axis] + 1 };
            for idx in 0..(1u32 << (m - 1)) {
                let mut child = Vec::with_capacity(m);
                let mut bit = 0;
                for i in 0..m {
                    if i == axis {
                        child.push(fixed);
                    } else {
                        child.push(2 * nb[i] + ((idx >> bit) & 1));
                        bit += 1;
                    }
                }
                self.face(level + 1, &child, axis, dir, out);
            }
            return;
        }
        let mut c = nb.to_vec();
        let mut l = level;
        while l > 1 {
            for ci in c.iter_mut() {
                *ci /= 2;
            }
            l -= 1;
            if let Some(i) = self.get(l, &c) {
                out.insert(i);
                return;
            }
            if self.is_interior(l, &c) {
                return;
            }
        }
    }

    fn containing(&self, x: &[f64]) -> Option<usize> {
        let mut c = vec![0u32; x.len()];
        for level in 1..=self.max_level {
            let n = 1u64 << level;
            for (ci, &xi) in c.iter_mut().zip(x) {
                let v = ((xi + 1.0) * (n as f64) / 2.0).floor() as i64;
                *ci = v.clamp(0, n as i64 - 1) as u32;
            }
            if let Some(i) = self.get(level, &c) {
                return Some(i);
            }
            if !self.is_interior(level, &c) {
                return None;
            }
        }
        None
    }
}

fn ball_misses_y(p: &PolyC, c: C64, level: u32, coords: &[u32]) -> bool {
    let center = complexify(&whitney::cube_center(level, coords));
    let r = (coords.len() as f64).sqrt() / 2f64.powi(level as i32);
    (p.eval(&center) - c).norm() > p.increment_bound(&center, r)
}

fn cube_seed(seed: u64, cube: &SubCube) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15 ^ (cube.level as u64).wrapping_mul(0x1000_0000_01b3);
    for &c in &cube.coords {
        h = (h ^ c as u64).wrapping_mul(0x0100_0000_01b3);
        h ^= h >> 29;
    }
    h
}

/// Base point of `Y ∩ B` by Newton projection from the centre and then
/// from deterministic interior points.
fn base_point(p: &PolyC, c: C64, cube: &SubCube) -> Option<Vec<C64>> {
    let ball = cube.ball();
    let center = complexify(&ball.center);
    let h = cube.edge();
    let mut starts = vec![center.clone()];
    let m = cube.coords.len();
    for axis in 0..m {
        for s in [-0.25, 0.25] {
            let mut x = ball.center.clone();
            x[axis] += s * h;
            starts.push(complexify(&x));
        }
    }
    for s in starts {
        if let Some(z) = domain::project_to_y(p, c, &s, 60) {
            if linalg::dist(&z, &center) <= ball.radius {
                return Some(z);
            }
        }
    }
    None
}

struct Builder<'a> {
    p: &'a PolyC,
    c: C64,
    cfg: &'a AtlasConfig,
    markov: f64,
    charts: Vec<AtlasChart>,
    inconclusive: usize,
    rejected: usize,
}

impl<'a> Builder<'a> {
    fn make_chart(&self, cube: &SubCube, base: Vec<C64>, theta: f64, slope: f64) -> Result<AtlasChart> {
        let chart = ImplicitChart::new(self.p, self.c, &base, theta, self.markov)?;
        let cert = ift::verify_chart_with(&chart, self.cfg.verify_samples, cube_seed(self.cfg.seed, cube), slope);
        cert.require()?;
        Ok(AtlasChart {
            cube: cube.clone(),
            ball: cube.ball(),
            base_point: base,
            chart,
            r: theta,
            lambda: theta / 4.0,
            slope,
            certificate: cert,
        })
    }

    fn process(&mut self, cube: SubCube, depth: u32) {
        if ball_misses_y(self.p, self.c, cube.level, &cube.coords) {
            return;
        }
        let n = self.p.n();
        let r12 = 12.0 * cube.radius();
        let base = base_point(self.p, self.c, &cube);
        match self.cfg.mode {
            AtlasMode::Covering => {
                let accepted = base.and_then(|b| self.make_chart(&cube, b, r12, self.cfg.covering_slope).ok());
                match accepted {
                    Some(ch) => self.charts.push(ch),
                    None if depth < self.cfg.max_refine && cube.level < whitney::MAX_LEVEL => {
                        let m = cube.coords.len();
                        for idx in 0..(1u32 << m) {
                            let coords = (0..m).map(|i| 2 * cube.coords[i] + ((idx >> i) & 1)).collect();
                            self.process(SubCube { level: cube.level + 1, coords }, depth + 1);
                        }
                    }
                    None => self.inconclusive += 1,
                }
            }
            AtlasMode::Practical | AtlasMode::Faithful => {
                let Some(b) = base else {
                    self.inconclusive += 1;
                    return;
                };
                let mut theta = if self.cfg.mode == AtlasMode::Faithful {
                    r12
                } else {
                    let mut g = vec![C64::new(0.0, 0.0); n];
                    self.p.eval_grad_into(&b, &mut g);
                    match ift::chart_radius(linalg::norm(&g), self.markov, n) {
                        Ok(t) => r12.min(t),
                        Err(_) => {
                            self.inconclusive += 1;
                            return;
                        }
                    }
                };
                let tries = if self.cfg.mode == AtlasMode::Practical { 8 } else { 1 };
                for _ in 0..tries {
                    if let Ok(ch) = self.make_chart(&cube, b.clone(), theta, ift::SLOPE) {
                        self.charts.push(ch);
                        return;
                    }
                    theta *= 0.5;
                }
                self.rejected += 1;
            }
        }
    }
}

/// Builds an atlas of `G = {P = c} ∩ Q` for a polynomial with the given
/// singular points, `K` and `δ = dist(G, Σ)`. The input is normalized to
/// `‖P‖₁ = 1` first; the Whitney cover punctures `Σ` at radius `δ/2`.
pub fn build_atlas(p: &PolyC, c: C64, k: f64, delta: f64, singular: &[Vec<C64>], cfg: &AtlasConfig) -> Result<Atlas> {
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidParameter("atlases need n >= 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter("K must be positive".into()));
    }
    let (pn, scale) = p.normalized()?;
    let cn = c / scale;
    let markov = polyalg::markov_m(&pn)?;
    let m = 2 * n;
    let gamma = match cfg.mode {
        AtlasMode::Faithful => faithful_gamma(n, pn.degree(), k),
        _ => cfg.gamma.unwrap_or(PRACTICAL_GAMMA),
    };
    let punctures: Vec<Vec<f64>> = singular.iter().map(|w| realify(w)).collect();
    let wdelta = delta / 2.0;
    if cfg.mode == AtlasMode::Faithful {
        let est = whitney::count_bound(punctures.len(), m, gamma, wdelta);
        if est > cfg.budget {
            return Err(Error::BudgetExceeded { estimate: est, budget: cfg.budget });
        }
    }
    let prune = |level: u32, coords: &[u32]| ball_misses_y(&pn, cn, level, coords);
    let cover = whitney::build_cover_dim(m, &punctures, wdelta, gamma, &prune)?;
    let mut b = Builder { p: &pn, c: cn, cfg, markov, charts: Vec::new(), inconclusive: 0, rejected: 0 };
    for i in 0..cover.len() {
        b.process(cover.cube(i), 0);
    }
    let Builder { charts, inconclusive, rejected, .. } = b;
    let rho_min = cfg.rho_min.unwrap_or(if cfg.mode == AtlasMode::Faithful { FAITHFUL_RHO } else { 0.0 });
    let mut atlas = Atlas {
        poly: pn,
        level: cn,
        k_const: k,
        delta,
        gamma,
        mode: cfg.mode,
        markov,
        singular: singular.to_vec(),
        charts,
        edges: Vec::new(),
        rho_min,
        whitney_balls: cover.len(),
        inconclusive,
        rejected,
        adjacent_pairs: 0,
        adjacency: Vec::new(),
        index: CubeIndex::default(),
    };
    atlas.rebuild_index();
    atlas.build_edges();
    Ok(atlas)
}

impl Atlas {
    pub fn kappa(&self) -> usize {
        self.charts.len()
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    fn rebuild_index(&mut self) {
        let mut index = CubeIndex::default();
        for (i, ch) in self.charts.iter().enumerate() {
            index.insert(&ch.cube, i);
        }
        self.index = index;
    }

    fn build_edges(&mut self) {
        let mut edges = Vec::new();
        let mut pairs = 0;
        for i in 0..self.charts.len() {
            for j in self.index.neighbors(&self.charts[i].cube) {
                if j <= i {
                    continue;
                }
                pairs += 1;
                let (rho, w) = self.rho_with_witness(i, j);
                if rho > 0.0 {
                    edges.push(AtlasEdge { i, j, rho, witness: w });
                }
            }
        }
        self.adjacent_pairs = pairs;
        self.set_edges(edges);
    }

    fn set_edges(&mut self, edges: Vec<AtlasEdge>) {
        let mut adj = vec![Vec::new(); self.charts.len()];
        for (e, edge) in edges.iter().enumerate() {
            adj[edge.i].push((edge.j, e));
            adj[edge.j].push((edge.i, e));
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        self.adjacency = adj;
        self.edges = edges;
    }

    /// `(neighbor, edge index)` pairs of chart `i`, sorted by neighbor.
    pub fn adjacency(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<&AtlasEdge> {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(nb, _)| nb)
            .ok()
            .map(|pos| &self.edges[self.adjacency[i][pos].1])
    }

    /// Sub-atlas on the given charts (indices renumbered in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Atlas {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let charts = keep.iter().map(|&i| self.charts[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (*pos.get(&e.i)?, *pos.get(&e.j)?);
                let (i, j) = if a < b { (a, b) } else { (b, a) };
                Some(AtlasEdge { i, j, rho: e.rho, witness: e.witness.clone() })
            })
            .collect();
        let mut out = Atlas {
            poly: self.poly.clone(),
            level: self.level,
            k_const: self.k_const,
            delta: self.delta,
            gamma: self.gamma,
            mode: self.mode,
            markov: self.markov,
            singular: self.singular.clone(),
            charts,
            edges: Vec::new(),
            rho_min: self.rho_min,
            whitney_balls: self.whitney_balls,
            inconclusive: self.inconclusive,
            rejected: self.rejected,
            adjacent_pairs: self.adjacent_pairs,
            adjacency: Vec::new(),
            index: CubeIndex::default(),
        };
        out.rebuild_index();
        out.set_edges(edges);
        out
    }

    pub fn summary(&self) -> AtlasSummary {
        AtlasSummary {
            mode: self.mode,
            gamma: self.gamma,
            delta: self.delta,
            k_const: self.k_const,
            markov: self.markov,
            kappa: self.kappa(),
            edges: self.edges.len(),
            whitney_balls: self.whitney_balls,
            inconclusive: self.inconclusive,
            rejected: self.rejected,
            adjacent_pairs: self.adjacent_pairs,
            min_edge_rho: self.edges.iter().map(|e| e.rho).reduce(f64::min),
            kappa_bound: kappa_bound(self.n(), self.poly.degree(), self.k_const, self.delta),
        }
    }

    /// Smallest chart index whose image contains `z`.
    pub fn locate(&self, z: &[C64]) -> Option<usize> {
        let x = realify(z);
        let i = self.index.containing(&x)?;
        if self.charts[i].contains(z) {
            return Some(i);
        }
        self.index
            .neighbors(&self.charts[i].cube)
            .into_iter()
            .find(|&j| self.charts[j].contains(z))
    }

    /// Charts whose image contains `z`, searched among the chart of the cube
    /// containing `z` and its face neighbours; sorted.
    pub fn charts_containing(&self, z: &[C64]) -> Vec<usize> {
        let x = realify(z);
        let Some(i) = self.index.containing(&x) else { return Vec::new() };
        let mut out: Vec<usize> = std::iter::once(i)
            .chain(self.index.neighbors(&self.charts[i].cube))
            .filter(|&j| self.charts[j].contains(z))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Certified lower bound for `ρ(U_i, U_j)`.
    pub fn rho_lower_bound(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        self.rho_with_witness(i, j).0
    }

    fn rho_with_witness(&self, i: usize, j: usize) -> (f64, Vec<C64>) {
        let (a, b) = (&self.charts[i], &self.charts[j]);
        if !balls_may_meet(a, b) {
            return (0.0, Vec::new());
        }
        let mut cands = vec![a.base_point.clone(), b.base_point.clone()];
        let mid: Vec<C64> = a.base_point.iter().zip(&b.base_point).map(|(x, y)| (x + y) * 0.5).collect();
        if let Some(z) = domain::project_to_y(&self.poly, self.level, &mid, 60) {
            cands.push(z);
        }
        let cmid: Vec<f64> = a.ball.center.iter().zip(&b.ball.center).map(|(x, y)| 0.5 * (x + y)).collect();
        if let Some(z) = domain::project_to_y(&self.poly, self.level, &complexify(&cmid), 60) {
            cands.push(z);
        }
        let mut best = (0.0, Vec::new());
        for w in cands {
            let r = pair_rho(a, b, &w).max(pair_rho(b, a, &w));
            if r > best.0 {
                best = (r, w);
            }
        }
        best
    }

    /// Certified lower bound for `ρ(U_j, Ω)`: a ball in the chart
    /// preimage whose image stays inside `Ω`, with witness centre.
    pub fn rho_to_domain(&self, j: usize, omega: &DomainSpec) -> (f64, Vec<C64>) {
        let ch = &self.charts[j];
        let n = self.n();
        let mut best = (0.0, Vec::new());
        let mut us: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n - 1]];
        for k in 0..n - 1 {
            for d in [C64::new(0.5, 0.0), C64::new(-0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5)] {
                let mut u = vec![C64::new(0.0, 0.0); n - 1];
                u[k] = d;
                us.push(u);
            }
        }
        for u in us {
            let Ok(w) = ch.psi(&u) else { continue };
            if !omega.contains(&w) {
                continue;
            }
            let room = 1.0 - linalg::norm(&u);
            // graph points over a preimage ball of radius s lie within λ q s of w
            let cap = ch.lambda * ch.q() * room;
            let margin = omega.margin(&w, cap);
            let s = (margin / (ch.lambda * ch.q())).min(room);
            if s > best.0 {
                best = (s, w);
            }
        }
        best
    }

    /// Shortest chain (in chart count) between the charts containing `u1`
    /// and `u2` over edges with `ρ ≥ rho_min`.
    pub fn chain_between(&self, u1: &[C64], u2: &[C64]) -> Result<ChartChain> {
        for u in [u1, u2] {
            if (self.poly.eval(u) - self.level).norm() > 1e-9 {
                return Err(Error::InvalidParameter("point is not on Y".into()));
            }
        }
        let a = self.locate(u1).ok_or(Error::PointNotCovered)?;
        let b = self.locate(u2).ok_or(Error::PointNotCovered)?;
        let rho_min = self.rho_min;
        let path = whitney::bfs_path(a, b, |x| {
            self.adjacency[x]
                .iter()
                .filter(|&&(_, e)| self.edges[e].rho >= rho_min && self.edges[e].rho > 0.0)
                .map(|&(nb, _)| nb)
                .collect()
        })
        .ok_or(Error::Disconnected)?;
        Ok(self.chain_from_path(path))
    }

    pub fn chain_from_path(&self, path: Vec<usize>) -> ChartChain {
        let rhos = path
            .windows(2)
            .map(|w| self.edge_between(w[0], w[1]).map(|e| e.rho).unwrap_or(0.0))
            .collect();
        ChartChain { charts: path, edge_rho: rhos, omega_rho: None }
    }

    /// Fraction of sampled points of `G` at distance `≥ δ` from `Σ` that lie
    /// in some chart image.
    pub fn coverage(&self, samples: usize, seed: u64, region: Region) -> CoverageReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut got = 0;
        let mut covered = 0;
        let mut tries = 0;
        while got < samples && tries < 100 * samples.max(1) {
            tries += 1;
            let Some(z) = domain::sample_on_y(&self.poly, self.level, region, &mut rng) else { continue };
            let dz = self.singular.iter().map(|w| linalg::dist(w, &z)).fold(f64::INFINITY, f64::min);
            if dz < self.delta {
                continue;
            }
            got += 1;
            if self.locate(&z).is_some() {
                covered += 1;
            }
        }
        CoverageReport { samples: got, covered }
    }

    /// Upper bound `3ℓ(Ch)` on the Kobayashi distance between `p` and `q`
    /// together with the per-link Poincaré checks.
    pub fn kobayashi_bound(&self, p: &[C64], q: &[C64]) -> Result<KobayashiReport> {
        let chain = self.chain_between(p, q)?;
        let mut points = vec![p.to_vec()];
        for w in chain.charts.windows(2) {
            let e = self.edge_between(w[0], w[1]).ok_or(Error::Disconnected)?;
            points.push(e.witness.clone());
        }
        points.push(q.to_vec());
        let mut links = Vec::with_capacity(chain.charts.len());
        for (k, &c) in chain.charts.iter().enumerate() {
            let ch = &self.charts[c];
            let a = ch.preimage(&points[k]);
            let b = ch.preimage(&points[k + 1]);
            links.push(link_check(&a, &b));
        }
        let ok = links.iter().all(|l| l.ok);
        Ok(KobayashiReport { bound: 3.0 * chain.len() as f64, chain, links, all_ok: ok })
    }
}

fn balls_may_meet(a: &AtlasChart, b: &AtlasChart) -> bool {
    linalg::dist(&a.base_point, &b.base_point) <= a.r + b.r
}

/// Certified preimage radius for `U_a ∩ U_b` around the witness `w`,
/// measured from chart `a`. A preimage ball of radius `s` (frame units)
/// around `π_a(w)` lifts to points within `q_a s` of `w`; they lie on the
/// graph of `b` and inside `λ_b` when `a_b + q_a s ≤ λ_b` and
/// `|v_n^b(w)| + q_a s ≤ θ_b`. Projection to `b` shrinks distances by at
/// most `q_b`.
fn pair_rho(a: &AtlasChart, b: &AtlasChart, w: &[C64]) -> f64 {
    if !a.contains(w) || !b.contains(w) {
        return 0.0;
    }
    let n = w.len();
    let va = a.chart.frame().to_frame(w);
    let vb = b.chart.frame().to_frame(w);
    let aa = linalg::norm(&va[..n - 1]);
    let ab = linalg::norm(&vb[..n - 1]);
    let qa = a.q();
    let s = (a.lambda - aa)
        .min((b.lambda - ab) / qa)
        .min((b.r - vb[n - 1].norm()) / qa)
        .min((a.r - va[n - 1].norm()) / qa);
    if !(s > 0.0) {
        return 0.0;
    }
    (s / a.lambda).min(s / (b.q() * b.lambda)).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub samples: usize,
    pub covered: usize,
}

impl CoverageReport {
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.covered as f64 / self.samples as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartChain {
    pub charts: Vec<usize>,
    pub edge_rho: Vec<f64>,
    pub omega_rho: Option<f64>,
}

impl ChartChain {
    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }
}

/// Poincaré distance `log((1+t)/(1−t))`, `t = |a−b|/|1−āb|`, on the unit
/// disk with metric `2|dz|/(1−|z|²)`.
pub fn poincare_distance(a: C64, b: C64) -> f64 {
    let t = (a - b).norm() / (C64::new(1.0, 0.0) - a.conj() * b).norm();
    ((1.0 + t) / (1.0 - t)).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkCheck {
    pub alpha: C64,
    pub beta: C64,
    pub distance: f64,
    pub ok: bool,
}

/// Pulls the pair `a, b ∈ B̄₁ ⊂ C^{n−1}` back to the unit disk through the
/// complex line they span, normalized so the line's section of `B₃` is the
/// unit disk; both images then lie in `D_{1/3}`.
pub fn link_check(a: &[C64], b: &[C64]) -> LinkCheck {
    let d = linalg::dist(a, b);
    let (alpha, beta) = if d == 0.0 {
        let r = linalg::norm(a) / 3.0;
        (C64::new(r, 0.0), C64::new(r, 0.0))
    } else {
        let e: Vec<C64> = a.iter().zip(b).map(|(x, y)| (y - x) / d).collect();
        let ae: C64 = a.iter().zip(&e).map(|(x, y)| x * y.conj()).sum();
        let be: C64 = b.iter().zip(&e).map(|(x, y)| x * y.conj()).sum();
        let c0: Vec<C64> = a.iter().zip(&e).map(|(x, y)| x - ae * y).collect();
        let rad = (9.0 - linalg::norm(&c0).powi(2)).sqrt();
        (ae / rad, be / rad)
    };
    let distance = poincare_distance(alpha, beta);
    let third = 1.0 / 3.0 + 1e-12;
    LinkCheck { alpha, beta, distance, ok: alpha.norm() <= third && beta.norm() <= third && distance <= 1.5 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KobayashiReport {
    pub bound: f64,
    pub chain: ChartChain,
    pub links: Vec<LinkCheck>,
    pub all_ok: bool,
}
