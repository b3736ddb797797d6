//! Sparse multivariate complex polynomials: parsing, evaluation, norms,
//! Markov bounds, local majorants and singular-set utilities.
//!
//! Complex points are realified as `(Re z1, Im z1, Re z2, ...)` whenever a
//! real coordinate system is needed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Gradient norm below which a point counts as critical.
pub const TOL_SINGULAR: f64 = 1e-10;
/// Minimum `|det Hess|` for a nondegenerate critical point.
pub const TOL_HESSIAN_DET: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coef: C64,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Structured term record: `{exponents, re, im}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Sparse polynomial in `n` complex variables. Terms are sorted by exponent
/// vector and carry no zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyC {
    n: usize,
    terms: Vec<Term>,
    degree: u32,
}

impl PolyC {
    pub fn zero(n: usize) -> Self {
        PolyC { n, terms: Vec::new(), degree: 0 }
    }

    /// Builds a polynomial, summing repeated monomials and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (exps, coef) in terms {
            if exps.len() != n {
                return Err(Error::Dimension { expected: n, got: exps.len() });
            }
            *map.entry(exps).or_insert(C64::new(0.0, 0.0)) += coef;
        }
        let terms: Vec<Term> = map
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .map(|(exps, coef)| Term { exps, coef })
            .collect();
        let degree = terms.iter().map(Term::degree).max().unwrap_or(0);
        Ok(PolyC { n, terms, degree })
    }

    pub fn from_records(n: usize, records: &[TermRecord]) -> Result<Self> {
        let mut terms = Vec::with_capacity(records.len());
        for r in records {
            if r.exponents.len() != n {
                return Err(Error::Dimension { expected: n, got: r.exponents.len() });
            }
            let mut exps = Vec::with_capacity(n);
            for (i, &e) in r.exponents.iter().enumerate() {
                if e < 0 {
                    return Err(Error::NegativeExponent { index: i + 1, exp: e });
                }
                exps.push(e as u32);
            }
            terms.push((exps, C64::new(r.re, r.im)));
        }
        PolyC::from_terms(n, terms)
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|t| TermRecord {
                exponents: t.exps.iter().map(|&e| e as i64).collect(),
                re: t.coef.re,
                im: t.coef.im,
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C64 {
        self.terms
            .binary_search_by(|t| t.exps.as_slice().cmp(exps))
            .map(|i| self.terms[i].coef)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn scale(&self, s: C64) -> PolyC {
        PolyC::from_terms(self.n, self.terms.iter().map(|t| (t.exps.clone(), t.coef * s)))
            .expect("dimension preserved")
    }

    /// `P - c`.
    pub fn sub_const(&self, c: C64) -> PolyC {
        let zero = vec![0u32; self.n];
        PolyC::from_terms(
            self.n,
            self.terms
                .iter()
                .map(|t| (t.exps.clone(), t.coef))
                .chain(std::iter::once((zero, -c))),
        )
        .expect("dimension preserved")
    }

    /// Returns `P / ‖P‖₁` together with the divisor.
    pub fn normalized(&self) -> Result<(PolyC, f64)> {
        let s = l1_norm(self);
        if s == 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        Ok((self.scale(C64::new(1.0 / s, 0.0)), s))
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut v = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut m = t.coef;
            for (zi, &e) in z.iter().zip(&t.exps) {
                if e > 0 {
                    m *= zi.powu(e);
                }
            }
            v += m;
        }
        v
    }

    /// Evaluates `P(z)` and writes `∇P(z)` into `grad`.
    pub fn eval_grad_into(&self, z: &[C64], grad: &mut [C64]) -> C64 {
        let n = self.n;
        for g in grad.iter_mut() {
            *g = C64::new(0.0, 0.0);
        }
        let mut v = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut full = t.coef;
            for i in 0..n {
                if t.exps[i] > 0 {
                    full *= z[i].powu(t.exps[i]);
                }
            }
            v += full;
            for k in 0..n {
                let ek = t.exps[k];
                if ek == 0 {
                    continue;
                }
                let mut m = t.coef * ek as f64;
                for i in 0..n {
                    let e = if i == k { ek - 1 } else { t.exps[i] };
                    if e > 0 {
                        m *= z[i].powu(e);
                    }
                }
                grad[k] += m;
            }
        }
        v
    }

    /// Row-major complex Hessian `∂²P/∂z_i∂z_j`.
    pub fn hessian(&self, z: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut h = vec![C64::new(0.0, 0.0); n * n];
        for t in &self.terms {
            for i in 0..n {
                for j in i..n {
                    let mut e = t.exps.clone();
                    let f = if i == j {
                        if e[i] < 2 {
                            continue;
                        }
                        let f = (e[i] * (e[i] - 1)) as f64;
                        e[i] -= 2;
                        f
                    } else {
                        if e[i] == 0 || e[j] == 0 {
                            continue;
                        }
                        let f = (e[i] * e[j]) as f64;
                        e[i] -= 1;
                        e[j] -= 1;
                        f
                    };
                    let mut m = t.coef * f;
                    for (zk, &ek) in z.iter().zip(&e) {
                        if ek > 0 {
                            m *= zk.powu(ek);
                        }
                    }
                    h[i * n + j] += m;
                    if i != j {
                        h[j * n + i] += m;
                    }
                }
            }
        }
        h
    }

    /// Taylor coefficients at `c`: the polynomial `h ↦ P(c + h)`.
    pub fn taylor_shift(&self, c: &[C64]) -> PolyC {
        let n = self.n;
        let mut out: Vec<(Vec<u32>, C64)> = Vec::new();
        for t in &self.terms {
            let mut beta = vec![0u32; n];
            loop {
                let mut coef = t.coef;
                for i in 0..n {
                    coef *= binomial(t.exps[i], beta[i]) as f64;
                    let rest = t.exps[i] - beta[i];
                    if rest > 0 {
                        coef *= c[i].powu(rest);
                    }
                }
                out.push((beta.clone(), coef));
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    if beta[i] < t.exps[i] {
                        beta[i] += 1;
                        break;
                    }
                    beta[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        PolyC::from_terms(n, out).expect("dimension preserved")
    }

    /// Upper bound for `|P(c+h) - P(c)|` over the polydisc `|h_i| ≤ r`.
    pub fn increment_bound(&self, c: &[C64], r: f64) -> f64 {
        let s = self.taylor_shift(c);
        let b: f64 = s
            .terms
            .iter()
            .filter(|t| t.degree() > 0)
            .map(|t| t.coef.norm() * r.powi(t.degree() as i32))
            .sum();
        outward(b)
    }

    /// Upper bound for `‖∇P‖` over the polydisc `|h_i| ≤ r` around `c`.
    pub fn grad_bound(&self, c: &[C64], r: f64) -> f64 {
        let s = self.taylor_shift(c);
        let mut acc = vec![0.0; self.n];
        for t in &s.terms {
            let deg = t.degree() as i32;
            for k in 0..self.n {
                if t.exps[k] > 0 {
                    acc[k] += t.coef.norm() * t.exps[k] as f64 * r.powi(deg - 1);
                }
            }
        }
        outward(acc.iter().map(|a| a * a).sum::<f64>().sqrt())
    }

    /// Upper bound for every `|∂²P/∂z_i∂z_j|` over the polydisc `|h_i| ≤ r`.
    pub fn second_bound(&self, c: &[C64], r: f64) -> f64 {
        let s = self.taylor_shift(c);
        let n = self.n;
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for t in &s.terms {
                    let deg = t.degree() as i32;
                    let f = if i == j {
                        t.exps[i] as f64 * (t.exps[i] as f64 - 1.0)
                    } else {
                        t.exps[i] as f64 * t.exps[j] as f64
                    };
                    if f > 0.0 {
                        acc += t.coef.norm() * f * r.powi(deg - 2);
                    }
                }
                best = best.max(acc);
            }
        }
        outward(best)
    }
}

fn outward(x: f64) -> f64 {
    x * (1.0 + 1e-12) + f64::MIN_POSITIVE
}

fn binomial(n: u32, k: u32) -> u64 {
    let mut r: u64 = 1;
    for i in 0..k as u64 {
        r = r * (n as u64 - i) / (i + 1);
    }
    r
}

/// `(P(z), ∇P(z))`.
pub fn eval_grad(p: &PolyC, z: &[C64]) -> (C64, Vec<C64>) {
    let mut g = vec![C64::new(0.0, 0.0); p.n()];
    let v = p.eval_grad_into(z, &mut g);
    (v, g)
}

/// `‖P‖₁ = Σ|a_α|`.
pub fn l1_norm(p: &PolyC) -> f64 {
    p.terms.iter().map(|t| t.coef.norm()).sum()
}

/// Markov bound `M = n d⁴ ‖P‖₁` on second partials over the unit cube.
pub fn markov_m(p: &PolyC) -> Result<f64> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let d = p.degree() as f64;
    Ok(p.n() as f64 * d.powi(4) * l1_norm(p))
}

// ---------------------------------------------------------------- parsing

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            let exp_sign = (c == b'+' || c == b'-')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return self.err("expected number");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.err("malformed number")
        })
    }

    fn integer(&mut self) -> Result<i64> {
        let neg = self.eat(b'-');
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let v: i64 = std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .or_else(|_| self.err("integer overflow"))?;
        Ok(if neg { -v } else { v })
    }

    /// `(a+bi)`, `(bi)`, `(a)`.
    fn complex(&mut self) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        let mut first = true;
        loop {
            if self.eat(b')') {
                if first {
                    return self.err("empty parentheses");
                }
                return Ok(acc);
            }
            let sign = if self.eat(b'-') {
                -1.0
            } else if self.eat(b'+') || first {
                1.0
            } else {
                return self.err("expected sign inside complex literal");
            };
            let v = if self.peek() == Some(b'i') {
                1.0
            } else {
                self.number()?
            };
            if self.eat(b'i') {
                acc.im += sign * v;
            } else {
                acc.re += sign * v;
            }
            first = false;
        }
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<()> {
        if !self.eat(b'z') {
            return self.err("expected variable zK");
        }
        let k = self.integer()?;
        if k < 1 || k as usize > self.n {
            return Err(Error::VariableOutOfRange { index: k.max(0) as usize, n: self.n });
        }
        let e = if self.eat(b'^') { self.integer()? } else { 1 };
        if e < 0 {
            return Err(Error::NegativeExponent { index: k as usize, exp: e });
        }
        exps[k as usize - 1] += e as u32;
        Ok(())
    }

    fn term(&mut self) -> Result<(Vec<u32>, C64)> {
        let mut coef = C64::new(1.0, 0.0);
        let mut exps = vec![0u32; self.n];
        let mut has_coef = false;
        if self.eat(b'(') {
            coef = self.complex()?;
            has_coef = true;
        } else if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            coef = C64::new(self.number()?, 0.0);
            has_coef = true;
        }
        let mut need_factor = !has_coef;
        loop {
            let star = self.eat(b'*');
            if self.peek() == Some(b'z') {
                self.factor(&mut exps)?;
                need_factor = false;
            } else if star || need_factor {
                return self.err("expected variable zK");
            } else {
                break;
            }
        }
        Ok((exps, coef))
    }
}

/// Parses `text` in the grammar: terms joined by `+`/`-`, each an optional
/// `(a+bi)` or real coefficient followed by `*`-separated `zK^E` powers.
pub fn parse_poly(text: &str, n: usize) -> Result<PolyC> {
    let cleaned: Vec<u8> = text.bytes().filter(|c| !c.is_ascii_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::Syntax { pos: 0, msg: "empty input".into() });
    }
    let mut p = Parser { s: &cleaned, pos: 0, n };
    let mut terms = Vec::new();
    let mut first = true;
    while p.pos < cleaned.len() {
        let sign = if p.eat(b'-') {
            -1.0
        } else if p.eat(b'+') || first {
            1.0
        } else {
            return p.err("expected + or -");
        };
        let (exps, coef) = p.term()?;
        terms.push((exps, coef * sign));
        first = false;
    }
    PolyC::from_terms(n, terms)
}

// ----------------------------------------------------------- singular set

/// Critical points of `P` with per-point nondegeneracy flags.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSet {
    pub points: Vec<Vec<C64>>,
    pub nondegenerate: Vec<bool>,
}

impl SingularSet {
    /// Flags each supplied point: critical (`‖∇P‖ ≤ TOL_SINGULAR`) with
    /// `|det Hess| ≥ TOL_HESSIAN_DET`.
    pub fn classify(p: &PolyC, points: Vec<Vec<C64>>) -> Result<Self> {
        let mut flags = Vec::with_capacity(points.len());
        for w in &points {
            if w.len() != p.n() {
                return Err(Error::Dimension { expected: p.n(), got: w.len() });
            }
            let (_, g) = eval_grad(p, w);
            let crit = linalg::norm(&g) <= TOL_SINGULAR;
            let det = linalg::det(&p.hessian(w), p.n()).norm();
            flags.push(crit && det >= TOL_HESSIAN_DET);
        }
        let s = SingularSet { points, nondegenerate: flags };
        s.check_bezout(p)?;
        Ok(s)
    }

    fn check_bezout(&self, p: &PolyC) -> Result<()> {
        let count = self.nondegenerate.iter().filter(|&&f| f).count();
        let cap = (p.degree().saturating_sub(1) as usize).pow(p.n() as u32);
        if count > cap {
            return Err(Error::TooManySingularPoints { count, cap });
        }
        Ok(())
    }

    pub fn all_nondegenerate(&self) -> bool {
        self.nondegenerate.iter().all(|&f| f)
    }

    pub fn dist(&self, z: &[C64]) -> f64 {
        self.points
            .iter()
            .map(|w| linalg::dist(w, z))
            .fold(f64::INFINITY, f64::min)
    }

    /// Realified coordinates of every point.
    pub fn realified(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|w| realify(w)).collect()
    }
}

pub fn realify(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn complexify(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Seeded Newton search for `∇P = 0` from a `per_axis^(2n)` grid on the
/// unit cube plus random starts; returns distinct converged points.
pub fn find_singular_points(p: &PolyC, per_axis: usize, random_starts: usize, seed: u64) -> Result<SingularSet> {
    let n = p.n();
    let m = 2 * n;
    let mut starts: Vec<Vec<C64>> = Vec::new();
    if per_axis > 0 {
        let total = per_axis.pow(m as u32);
        for idx in 0..total {
            let mut x = vec![0.0; m];
            let mut r = idx;
            for xi in x.iter_mut() {
                let k = r % per_axis;
                r /= per_axis;
                *xi = if per_axis == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (per_axis - 1) as f64 };
            }
            starts.push(complexify(&x));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_starts {
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        starts.push(complexify(&x));
    }
    let mut found: Vec<Vec<C64>> = Vec::new();
    for s in starts {
        if let Some(w) = newton_critical(p, s) {
            if !found.iter().any(|f| linalg::dist(f, &w) < 1e-7) {
                found.push(w);
            }
        }
    }
    found.sort_by(|a, b| realify(a).partial_cmp(&realify(b)).unwrap());
    SingularSet::classify(p, found)
}

fn newton_critical(p: &PolyC, mut z: Vec<C64>) -> Option<Vec<C64>> {
    for _ in 0..100 {
        let (_, g) = eval_grad(p, &z);
        if linalg::norm(&g) <= TOL_SINGULAR * 1e-2 {
            return Some(z);
        }
        let h = p.hessian(&z);
        let step = linalg::solve(&h, &g)?;
        for (zi, si) in z.iter_mut().zip(&step) {
            *zi -= si;
        }
        if linalg::norm(&z) > 1e6 {
            return None;
        }
    }
    let (_, g) = eval_grad(p, &z);
    (linalg::norm(&g) <= TOL_SINGULAR).then_some(z)
}

/// Sampled `K̂ = min ‖∇P(z)‖ / dist(z, Σ)` over uniform points of the
/// realified unit cube.
pub fn estimate_k(p: &PolyC, sing: &SingularSet, sample_count: usize) -> Result<f64> {
    if sing.points.is_empty() {
        return Err(Error::EmptySingularSet);
    }
    for (i, w) in sing.points.iter().enumerate() {
        let (_, g) = eval_grad(p, w);
        let det = linalg::det(&p.hessian(w), p.n()).norm();
        if !sing.nondegenerate[i] || linalg::norm(&g) > TOL_SINGULAR || det < TOL_HESSIAN_DET {
            return Err(Error::DegenerateSingularity { index: i });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x4b);
    let mut g = vec![C64::new(0.0, 0.0); p.n()];
    let mut best = f64::INFINITY;
    for _ in 0..sample_count {
        let z: Vec<C64> = (0..p.n())
            .map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect();
        let dz = sing.dist(&z);
        if dz <= 0.0 {
            continue;
        }
        p.eval_grad_into(&z, &mut g);
        best = best.min(linalg::norm(&g) / dz);
    }
    if !best.is_finite() {
        return Err(Error::InvalidParameter("no usable samples".into()));
    }
    Ok(best)
}
