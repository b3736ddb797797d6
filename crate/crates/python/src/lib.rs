//! Python bindings: polynomials, Whitney covers, chart atlases, valency
//! constants, chain propagation and the example experiments.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use doubling_core::atlas::{self, AtlasConfig, AtlasMode};
use doubling_core::domain::{self, DomainSpec, Region};
use doubling_core::experiments::{self, DoublingArgs, ExperimentConfig, ExperimentReport};
use doubling_core::polyalg::{self, PolyC};
use doubling_core::valency::DoublingParams;
use doubling_core::{propagate, valency, whitney, C64};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode(s: &str) -> PyResult<AtlasMode> {
    match s {
        "faithful" => Ok(AtlasMode::Faithful),
        "practical" => Ok(AtlasMode::Practical),
        "covering" => Ok(AtlasMode::Covering),
        _ => Err(err(format!("unknown mode `{s}`"))),
    }
}

fn region(s: &str) -> PyResult<Region> {
    match s {
        "cube" => Ok(Region::Cube),
        "polydisc" => Ok(Region::Polydisc),
        _ => Err(err(format!("unknown region `{s}`"))),
    }
}

/// Complex polynomial in `n` variables.
#[pyclass(name = "Poly", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPoly(PolyC);

#[pymethods]
impl PyPoly {
    #[new]
    fn new(text: &str, n: usize) -> PyResult<Self> {
        polyalg::parse_poly(text, n).map(PyPoly).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    /// `[(exponents, coefficient)]` in canonical order.
    fn terms(&self) -> Vec<(Vec<u32>, C64)> {
        self.0.terms().iter().map(|t| (t.exps.clone(), t.coef)).collect()
    }

    fn eval(&self, z: Vec<C64>) -> PyResult<C64> {
        if z.len() != self.0.n() {
            return Err(err(format!("expected {} coordinates", self.0.n())));
        }
        Ok(self.0.eval(&z))
    }

    fn gradient(&self, z: Vec<C64>) -> PyResult<Vec<C64>> {
        if z.len() != self.0.n() {
            return Err(err(format!("expected {} coordinates", self.0.n())));
        }
        Ok(polyalg::eval_grad(&self.0, &z).1)
    }

    fn markov(&self) -> PyResult<f64> {
        polyalg::markov_m(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Poly(n={}, degree={}, terms={})", self.0.n(), self.0.degree(), self.0.terms().len())
    }
}

/// Whitney cover of `[-1,1]^m` punctured at finitely many points.
#[pyclass(name = "WhitneyCover", frozen)]
struct PyWhitneyCover(whitney::WhitneyCover);

#[pymethods]
impl PyWhitneyCover {
    #[new]
    #[pyo3(signature = (punctures, delta, gamma=2.0, m=None))]
    fn new(punctures: Vec<Vec<f64>>, delta: f64, gamma: f64, m: Option<usize>) -> PyResult<Self> {
        let cover = match m {
            Some(m) => whitney::build_cover_dim(m, &punctures, delta, gamma, &|_, _| false),
            None => whitney::build_cover(&punctures, delta, gamma),
        };
        cover.map(PyWhitneyCover).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn final_level(&self) -> u32 {
        self.0.final_level()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k
    }

    #[getter]
    fn stop_verified(&self) -> bool {
        self.0.stop_verified
    }

    fn level_counts(&self) -> Vec<usize> {
        self.0.level_counts()
    }

    fn count_bound(&self) -> f64 {
        self.0.count_bound()
    }

    /// `(center, radius)` of the ball of cube `idx`.
    fn ball(&self, idx: usize) -> PyResult<(Vec<f64>, f64)> {
        if idx >= self.0.len() {
            return Err(err("cube index out of range"));
        }
        let b = self.0.ball(idx);
        Ok((b.center, b.radius))
    }

    fn locate(&self, x: Vec<f64>) -> Option<usize> {
        self.0.locate(&x)
    }

    fn neighbors(&self, idx: usize) -> PyResult<Vec<usize>> {
        if idx >= self.0.len() {
            return Err(err("cube index out of range"));
        }
        Ok(self.0.neighbors(idx))
    }

    fn find_chain(&self, v: Vec<f64>, w: Vec<f64>) -> PyResult<Vec<usize>> {
        self.0.find_chain(&v, &w).map(|c| c.indices).map_err(err)
    }

    #[pyo3(signature = (with_adjacency=false))]
    fn to_json(&self, with_adjacency: bool) -> PyResult<String> {
        serde_json::to_string(&self.0.to_document(with_adjacency)).map_err(err)
    }
}

/// `½(r₁ + r₂ − |c₁ − c₂|)`.
#[pyfunction]
fn intersection_ball_radius(c1: Vec<f64>, r1: f64, c2: Vec<f64>, r2: f64) -> PyResult<f64> {
    if c1.len() != c2.len() {
        return Err(err("centers differ in dimension"));
    }
    let b1 = whitney::Ball { center: c1, radius: r1 };
    let b2 = whitney::Ball { center: c2, radius: r2 };
    Ok(whitney::intersection_ball_radius(&b1, &b2))
}

/// Certified chart atlas of `{P = level}`.
#[pyclass(name = "Atlas", frozen)]
struct PyAtlas(atlas::Atlas);

#[pymethods]
impl PyAtlas {
    #[new]
    #[pyo3(signature = (poly, level, k=None, delta=None, mode="practical", gamma=None, verify_samples=100, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        poly: &PyPoly,
        level: C64,
        k: Option<f64>,
        delta: Option<f64>,
        mode: &str,
        gamma: Option<f64>,
        verify_samples: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let h = experiments::prepare_hypersurface(poly.0.clone(), level, k, delta, seed).map_err(err)?;
        let cfg = AtlasConfig { mode: self::mode(mode)?, gamma, verify_samples, seed, ..AtlasConfig::default() };
        atlas::build_atlas(&h.poly, h.level, h.k_const, h.delta, &h.singular, &cfg).map(PyAtlas).map_err(err)
    }

    #[getter]
    fn kappa(&self) -> usize {
        self.0.kappa()
    }

    fn __len__(&self) -> usize {
        self.0.kappa()
    }

    fn summary(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.summary()).map_err(err)
    }

    fn locate(&self, z: Vec<C64>) -> Option<usize> {
        self.0.locate(&z)
    }

    fn charts_containing(&self, z: Vec<C64>) -> Vec<usize> {
        self.0.charts_containing(&z)
    }

    /// `(charts, edge_rho)` of a shortest chain.
    fn chain_between(&self, u1: Vec<C64>, u2: Vec<C64>) -> PyResult<(Vec<usize>, Vec<f64>)> {
        self.0.chain_between(&u1, &u2).map(|c| (c.charts, c.edge_rho)).map_err(err)
    }

    /// `(bound, all_links_ok)`.
    fn kobayashi_bound(&self, p: Vec<C64>, q: Vec<C64>) -> PyResult<(f64, bool)> {
        self.0.kobayashi_bound(&p, &q).map(|r| (r.bound, r.all_ok)).map_err(err)
    }

    /// Fraction of seeded samples of `Y ∩ region` inside some chart.
    #[pyo3(signature = (samples, seed=0, region="cube"))]
    fn coverage(&self, samples: usize, seed: u64, region: &str) -> PyResult<f64> {
        Ok(self.0.coverage(samples, seed, self::region(region)?).fraction())
    }

    /// `(log_bound, chain)` for `|f|` on the chart of `z` relative to
    /// `Ω = {|z_index| ≥ bound}`.
    #[pyo3(signature = (z, p, index, bound, a_p=1.0, region="cube"))]
    fn chain_bound(&self, z: Vec<C64>, p: u32, index: usize, bound: f64, a_p: f64, region: &str) -> PyResult<(f64, Vec<usize>)> {
        let n = self.0.n();
        if index >= n {
            return Err(err("coordinate index out of range"));
        }
        let omega = DomainSpec { region: self::region(region)?, constraints: vec![domain::coordinate_at_least(n, index, bound)] };
        let params = DoublingParams::with_a_p(p, a_p).map_err(err)?;
        propagate::chain_bound(&self.0, &omega, &z, &params).map(|r| (r.log_bound, r.chain)).map_err(err)
    }

    /// `(ell, ell_exact, log_bound, log_kappa_bound)`.
    #[pyo3(signature = (rho, p, a_p=1.0))]
    fn uniform_bound(&self, rho: f64, p: u32, a_p: f64) -> PyResult<(usize, bool, f64, f64)> {
        let params = DoublingParams::with_a_p(p, a_p).map_err(err)?;
        propagate::uniform_bound(&self.0, rho, &params)
            .map(|u| (u.ell, u.ell_exact, u.log_bound, u.log_kappa_bound))
            .map_err(err)
    }
}

/// Eulerian number `A(n, k)`: permutations of `n` with `k` descents.
#[pyfunction]
fn eulerian(py: Python<'_>, n: usize, k: usize) -> PyResult<Bound<'_, PyAny>> {
    let v = valency::eulerian(n, k).map_err(err)?;
    Ok(v.into_pyobject(py)?.into_any())
}

/// `Li_{-n}(z)` for `|z| < 1`.
#[pyfunction]
fn polylog_neg(n: usize, z: C64) -> PyResult<C64> {
    valency::polylog_neg(n, z).map_err(err)
}

/// `Σ_{k>p} k^{2p−1} α^k`.
#[pyfunction]
fn tail_sum(p: u32, alpha: f64) -> PyResult<f64> {
    valency::tail_sum(p, alpha).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, alpha, beta, a_p=1.0))]
fn c_p_constant(p: u32, alpha: f64, beta: f64, a_p: f64) -> PyResult<f64> {
    valency::c_p_constant(&DoublingParams::with_a_p(p, a_p).map_err(err)?, alpha, beta).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, rho, a_p=1.0))]
fn nonconcentric_constant(p: u32, rho: f64, a_p: f64) -> PyResult<f64> {
    valency::nonconcentric_constant(&DoublingParams::with_a_p(p, a_p).map_err(err)?, rho).map_err(err)
}

#[pyfunction]
fn bezout_valency(d: u32, d1: u32) -> u32 {
    valency::bezout_valency(d, d1)
}

/// Lower bound on the chart count forced by a doubling constant `dc`.
#[pyfunction]
#[pyo3(signature = (dc, rho, p, a_p=1.0))]
fn kappa_lower(dc: f64, rho: f64, p: u32, a_p: f64) -> PyResult<f64> {
    propagate::kappa_lower(dc, rho, &DoublingParams::with_a_p(p, a_p).map_err(err)?).map_err(err)
}

/// `(p, c3, exponent, log_bound)` of the polynomial doubling bound.
#[pyfunction]
#[pyo3(signature = (n, d, d1, k, delta, a_p=1.0))]
fn poly_dc_bound(n: usize, d: u32, d1: u32, k: f64, delta: f64, a_p: f64) -> PyResult<(u32, f64, f64, f64)> {
    propagate::poly_dc_bound(n, d, d1, k, delta, a_p).map(|b| (b.p, b.c3, b.exponent, b.log_bound)).map_err(err)
}

/// Result of an experiment run.
#[pyclass(name = "Report", frozen)]
struct PyReport(ExperimentReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed
    }

    /// `[(name, passed, detail)]`.
    fn checks(&self) -> Vec<(String, bool, String)> {
        self.0.checks.iter().map(|c| (c.name.clone(), c.passed, c.detail.clone())).collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_table(&self) -> String {
        self.0.to_table()
    }
}

fn config(seed: u64, samples: usize, mode: &str, gamma: Option<f64>) -> PyResult<ExperimentConfig> {
    Ok(ExperimentConfig { seed, samples, mode: self::mode(mode)?, gamma, ..ExperimentConfig::default() })
}

#[pyfunction]
#[pyo3(signature = (m, punctures, delta, gamma=2.0, seed=0, samples=2000))]
fn cover_cube(m: usize, punctures: Vec<Vec<f64>>, delta: f64, gamma: f64, seed: u64, samples: usize) -> PyResult<PyReport> {
    let cfg = config(seed, samples, "practical", Some(gamma))?;
    experiments::cover_cube(m, &punctures, delta, gamma, &cfg).map(PyReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (eps, seed=0, samples=2000, mode="practical", gamma=None))]
fn experiment_hyperbola(eps: Vec<f64>, seed: u64, samples: usize, mode: &str, gamma: Option<f64>) -> PyResult<PyReport> {
    experiments::hyperbola(&eps, &config(seed, samples, mode, gamma)?).map(PyReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, eps, seed=0, samples=2000, mode="practical", gamma=None))]
fn experiment_quadric(n: usize, eps: Vec<f64>, seed: u64, samples: usize, mode: &str, gamma: Option<f64>) -> PyResult<PyReport> {
    experiments::quadric(n, &eps, &config(seed, samples, mode, gamma)?).map(PyReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, eps, seed=0, samples=2000, mode="practical", gamma=None))]
fn experiment_product(d: u32, eps: Vec<f64>, seed: u64, samples: usize, mode: &str, gamma: Option<f64>) -> PyResult<PyReport> {
    experiments::product(d, &eps, &config(seed, samples, mode, gamma)?).map(PyReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p=1, alpha=0.5, beta=0.25, rho=0.1, a_p=1.0, dc=None, seed=0))]
fn doubling_bound(p: u32, alpha: f64, beta: f64, rho: f64, a_p: f64, dc: Option<f64>, seed: u64) -> PyResult<PyReport> {
    let args = DoublingArgs { p, a_p, alpha, beta, rho, poly: None, dc };
    experiments::doubling_bound(&args, seed).map(PyReport).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (seed=0, samples=2000))]
fn verify(seed: u64, samples: usize) -> PyResult<PyReport> {
    experiments::verify(&config(seed, samples, "practical", None)?).map(PyReport).map_err(err)
}

#[pymodule]
fn doubling_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyWhitneyCover>()?;
    m.add_class::<PyAtlas>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(intersection_ball_radius, m)?)?;
    m.add_function(wrap_pyfunction!(eulerian, m)?)?;
    m.add_function(wrap_pyfunction!(polylog_neg, m)?)?;
    m.add_function(wrap_pyfunction!(tail_sum, m)?)?;
    m.add_function(wrap_pyfunction!(c_p_constant, m)?)?;
    m.add_function(wrap_pyfunction!(nonconcentric_constant, m)?)?;
    m.add_function(wrap_pyfunction!(bezout_valency, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_lower, m)?)?;
    m.add_function(wrap_pyfunction!(poly_dc_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cover_cube, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_hyperbola, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_quadric, m)?)?;
    m.add_function(wrap_pyfunction!(experiment_product, m)?)?;
    m.add_function(wrap_pyfunction!(doubling_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
