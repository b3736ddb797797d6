//! Doubling inequalities propagated along chains of charts.
//!
//! A chain `j₁, …, j_ℓ` from a chart meeting `Ω` to a chart containing `z`
//! bounds `|f(z)| / max_Ω |f|` by
//! `c^ℓ / (ρ(U_{j₁},Ω)^p ∏ ρ(U_{j_i},U_{j_{i+1}})^p)` for `f` sectionally
//! p-valent on the charts, where `c/ρ^p` is the non-concentric constant.
//! In logarithms every factor `log c − p log ρ` is non-negative, so the
//! infimum over chains is a shortest path.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::atlas::{self, Atlas};
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::valency::{self, DoublingParams};

/// Certified link from a chart to `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaLink {
    pub chart: usize,
    pub rho: f64,
    pub witness: Vec<C64>,
}

/// One factor of a propagated bound; `from = None` is the `Ω` link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub from: Option<usize>,
    pub to: usize,
    pub rho: f64,
    /// `log c − p log ρ`.
    pub log_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    /// `exp(log_bound)`; may be infinite for long chains.
    pub bound: f64,
    pub log_bound: f64,
    /// Charts from the `Ω` side to the chart containing `z`.
    pub chain: Vec<usize>,
    pub breakdown: Vec<Contribution>,
    pub p: u32,
    pub c: f64,
}

impl PropagationResult {
    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// `c^ℓ / ∏ ρ^p` recomputed from the breakdown by direct products.
    pub fn recompute(&self) -> f64 {
        let rho_prod: f64 = self.breakdown.iter().map(|b| b.rho.powi(self.p as i32)).product();
        self.c.powi(self.breakdown.len() as i32) / rho_prod
    }

    /// `Σ (ln c − p ln ρ)` recomputed from the breakdown radii.
    pub fn recompute_log(&self) -> f64 {
        self.breakdown.iter().map(|b| self.c.ln() - self.p as f64 * b.rho.ln()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Chain-bound engine for one atlas, domain and valency.
pub struct Propagator<'a> {
    pub atlas: &'a Atlas,
    pub params: DoublingParams,
    /// `c` with `DC(B₁, Δ_ρ) ≤ c/ρ^p`.
    pub c: f64,
    pub omega_links: Vec<OmegaLink>,
}

impl<'a> Propagator<'a> {
    pub fn new(atlas: &'a Atlas, omega: &DomainSpec, params: DoublingParams) -> Result<Self> {
        let omega_links = omega_links(atlas, omega);
        Self::with_links(atlas, omega_links, params)
    }

    pub fn with_links(atlas: &'a Atlas, omega_links: Vec<OmegaLink>, params: DoublingParams) -> Result<Self> {
        let c = valency::nonconcentric_c(&params)?;
        Ok(Propagator { atlas, params, c, omega_links })
    }

    fn weight(&self, rho: f64) -> f64 {
        self.c.ln() - self.params.p as f64 * rho.ln()
    }

    /// Minimal chain bound for `z ∈ Y`.
    pub fn chain_bound(&self, z: &[C64]) -> Result<PropagationResult> {
        let targets = self.atlas.charts_containing(z);
        if targets.is_empty() {
            return Err(Error::PointNotCovered);
        }
        self.chain_bound_to(&targets)
    }

    /// Minimal chain bound ending at any of the `targets`.
    pub fn chain_bound_to(&self, targets: &[usize]) -> Result<PropagationResult> {
        if self.omega_links.is_empty() {
            return Err(Error::DomainUnreachable);
        }
        let k = self.atlas.kappa();
        let mut dist = vec![f64::INFINITY; k];
        let mut prev: Vec<Option<usize>> = vec![None; k];
        let mut heap = BinaryHeap::new();
        for l in &self.omega_links {
            let w = self.weight(l.rho);
            if w < dist[l.chart] {
                dist[l.chart] = w;
                heap.push(HeapItem(w, l.chart));
            }
        }
        let mut is_target = vec![false; k];
        for &t in targets {
            is_target[t] = true;
        }
        let mut done = vec![false; k];
        let mut reached = None;
        while let Some(HeapItem(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if is_target[u] {
                reached = Some(u);
                break;
            }
            for &(v, e) in self.atlas.adjacency(u) {
                let nd = d + self.weight(self.atlas.edges[e].rho);
                if nd < dist[v] {
                    dist[v] = nd;
                    prev[v] = Some(u);
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        let end = reached.ok_or(Error::Disconnected)?;
        let mut chain = vec![end];
        while let Some(u) = prev[*chain.last().unwrap()] {
            chain.push(u);
        }
        chain.reverse();
        Ok(self.result_for_chain(&chain, dist[end]))
    }

    fn omega_rho(&self, chart: usize) -> f64 {
        self.omega_links.iter().filter(|l| l.chart == chart).map(|l| l.rho).fold(0.0, f64::max)
    }

    fn result_for_chain(&self, chain: &[usize], log_bound: f64) -> PropagationResult {
        let mut breakdown = Vec::with_capacity(chain.len());
        let r0 = self.omega_rho(chain[0]);
        breakdown.push(Contribution { from: None, to: chain[0], rho: r0, log_factor: self.weight(r0) });
        for w in chain.windows(2) {
            let rho = self.atlas.edge_between(w[0], w[1]).map(|e| e.rho).unwrap_or(0.0);
            breakdown.push(Contribution { from: Some(w[0]), to: w[1], rho, log_factor: self.weight(rho) });
        }
        PropagationResult {
            bound: log_bound.exp(),
            log_bound,
            chain: chain.to_vec(),
            breakdown,
            p: self.params.p,
            c: self.c,
        }
    }

    /// Minimum over all simple chains by depth-first enumeration; the sum is
    /// accumulated in chain order exactly as in the shortest-path search.
    pub fn exhaustive_chain_bound(&self, targets: &[usize]) -> Result<PropagationResult> {
        if self.omega_links.is_empty() {
            return Err(Error::DomainUnreachable);
        }
        let k = self.atlas.kappa();
        let mut is_target = vec![false; k];
        for &t in targets {
            is_target[t] = true;
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut starts: Vec<(usize, f64)> = Vec::new();
        for l in &self.omega_links {
            let w = self.weight(l.rho);
            match starts.iter_mut().find(|s| s.0 == l.chart) {
                Some(s) => s.1 = s.1.min(w),
                None => starts.push((l.chart, w)),
            }
        }
        let mut on_path = vec![false; k];
        let mut path = Vec::new();
        for (s, w) in starts {
            on_path[s] = true;
            path.push(s);
            self.dfs(s, w, &is_target, &mut on_path, &mut path, &mut best);
            path.pop();
            on_path[s] = false;
        }
        let (total, chain) = best.ok_or(Error::Disconnected)?;
        Ok(self.result_for_chain(&chain, total))
    }

    fn dfs(
        &self,
        u: usize,
        total: f64,
        is_target: &[bool],
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if is_target[u] && best.as_ref().map_or(true, |b| total < b.0) {
            *best = Some((total, path.clone()));
        }
        for &(v, e) in self.atlas.adjacency(u) {
            if on_path[v] {
                continue;
            }
            on_path[v] = true;
            path.push(v);
            self.dfs(v, total + self.weight(self.atlas.edges[e].rho), is_target, on_path, path, best);
            path.pop();
            on_path[v] = false;
        }
    }
}

/// Certified `ρ(U_j, Ω)` for every chart where it is positive.
pub fn omega_links(atlas: &Atlas, omega: &DomainSpec) -> Vec<OmegaLink> {
    (0..atlas.kappa())
        .filter_map(|j| {
            let (rho, witness) = atlas.rho_to_domain(j, omega);
            (rho > 0.0).then_some(OmegaLink { chart: j, rho, witness })
        })
        .collect()
}

/// Single-query convenience over [`Propagator`].
pub fn chain_bound(atlas: &Atlas, omega: &DomainSpec, z: &[C64], params: &DoublingParams) -> Result<PropagationResult> {
    Propagator::new(atlas, omega, params.clone())?.chain_bound(z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBound {
    /// `ℓ(U)`: charts in a longest shortest chain (or an upper bound).
    pub ell: usize,
    pub ell_exact: bool,
    pub kappa: usize,
    /// `log(c/ρ^p)`.
    pub log_step: f64,
    /// `(c/ρ^p)^ℓ`.
    pub bound: f64,
    /// `(c/ρ^p)^κ`.
    pub kappa_bound: f64,
    pub log_bound: f64,
    pub log_kappa_bound: f64,
}

/// Graphs up to this many charts get an exact diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 4000;

/// `(c/ρ^p)^{ℓ(U)}` with `ℓ(U)` the chain-length diameter of the graph of
/// edges with `ρ ≥ rho`. Larger graphs use `ℓ ≤ 2·ecc(0) + 1`.
pub fn uniform_bound(atlas: &Atlas, rho: f64, params: &DoublingParams) -> Result<UniformBound> {
    let k = atlas.kappa();
    if k == 0 {
        return Err(Error::InvalidParameter("empty atlas".into()));
    }
    let log_step = valency::nonconcentric_constant(params, rho)?.ln();
    let ecc = |s: usize| -> Option<usize> {
        let mut d = vec![usize::MAX; k];
        d[s] = 0;
        let mut q = VecDeque::from([s]);
        let mut far = 0;
        let mut seen = 1;
        while let Some(u) = q.pop_front() {
            far = far.max(d[u]);
            for &(v, e) in atlas.adjacency(u) {
                if d[v] == usize::MAX && atlas.edges[e].rho >= rho {
                    d[v] = d[u] + 1;
                    seen += 1;
                    q.push_back(v);
                }
            }
        }
        (seen == k).then_some(far)
    };
    let (hops, exact) = if k <= EXACT_DIAMETER_LIMIT {
        let mut h = 0;
        for s in 0..k {
            h = h.max(ecc(s).ok_or(Error::Disconnected)?);
        }
        (h, true)
    } else {
        (2 * ecc(0).ok_or(Error::Disconnected)?, false)
    };
    let ell = hops + 1;
    let log_bound = ell as f64 * log_step;
    let log_kappa_bound = k as f64 * log_step;
    Ok(UniformBound {
        ell,
        ell_exact: exact,
        kappa: k,
        log_step,
        bound: log_bound.exp(),
        kappa_bound: log_kappa_bound.exp(),
        log_bound,
        log_kappa_bound,
    })
}

/// `κ ≥ log(dc) / log(c/ρ^p)`.
pub fn kappa_lower(dc: f64, rho: f64, params: &DoublingParams) -> Result<f64> {
    if !(dc > 1.0) {
        return Err(Error::InvalidParameter(format!("doubling constant must exceed 1, got {dc}")));
    }
    let step = valency::nonconcentric_constant(params, rho)?;
    if !(step > 1.0) {
        return Err(Error::InvalidParameter("c/rho^p must exceed 1".into()));
    }
    Ok(dc.ln() / step.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDcBound {
    pub p: u32,
    /// `C₃ = log₂(10^p c_p) · C₁`.
    pub c3: f64,
    /// `C₃ / K^{2n}`.
    pub exponent: f64,
    /// `ln` of `(C₂/(Kδ))^{C₃/K^{2n}}`.
    pub log_bound: f64,
    pub bound: f64,
}

/// `DC_f(G,Ω) ≤ (C₂/(Kδ))^{C₃/K^{2n}}` for restrictions of degree-`d₁`
/// polynomials, with `p = d·d₁`, `ρ = 1/10` and the coefficient constant `A_p`.
pub fn poly_dc_bound(n: usize, d: u32, d1: u32, k: f64, delta: f64, a_p: f64) -> Result<PolyDcBound> {
    if d1 == 0 {
        return Err(Error::InvalidParameter("d1 must be >= 1".into()));
    }
    if !(k > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter("K and delta must be positive".into()));
    }
    let p = valency::bezout_valency(d, d1);
    let params = DoublingParams::with_a_p(p, a_p)?;
    let (c1, c2) = atlas::kappa_constants(n, d);
    let c3 = valency::nonconcentric_constant(&params, 0.1)?.log2() * c1;
    let exponent = c3 / k.powi(2 * n as i32);
    let log_bound = exponent * (c2 / (k * delta)).ln().max(0.0);
    Ok(PolyDcBound { p, c3, exponent, log_bound, bound: log_bound.exp() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDc {
    pub max_g: f64,
    pub max_omega: f64,
    pub dc: f64,
    pub g_samples: usize,
    pub omega_samples: usize,
}

/// `max_G |f| / max_Ω |f|` over the given samples. Each maximum is
/// non-decreasing as samples are added; their ratio need not be.
pub fn empirical_dc<F: Fn(&[C64]) -> C64>(f: F, g_points: &[Vec<C64>], omega_points: &[Vec<C64>]) -> Result<EmpiricalDc> {
    let max_of = |pts: &[Vec<C64>]| pts.iter().map(|z| f(z).norm()).fold(0.0, f64::max);
    let max_g = max_of(g_points);
    let max_omega = max_of(omega_points);
    if !(max_omega > 0.0) {
        return Err(Error::DegenerateMaximum("max over the domain is zero".into()));
    }
    Ok(EmpiricalDc { max_g, max_omega, dc: max_g / max_omega, g_samples: g_points.len(), omega_samples: omega_points.len() })
}
