//! γ-doubling ball coverings of a punctured cube `[-1,1]^m` by dyadic
//! subdivision.
//!
//! Level-`s` cubes have edge `2/2^s` and integer coordinates in
//! `[0, 2^s)^m`. `Σ_s` is the set of level-`s` cubes within Chebyshev index
//! distance `k` of a closed cube containing a puncture; `S_{s+1}` is
//! `children(Σ_s) \ Σ_{s+1}`. Retained balls are the circumscribed balls of
//! the `S_l` cubes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dyadic::{self, Dyadic};
use crate::error::{Error, Result};

/// Deepest level the construction will visit.
pub const MAX_LEVEL: u32 = 30;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubCube {
    pub level: u32,
    pub coords: Vec<u32>,
}

impl SubCube {
    pub fn edge(&self) -> f64 {
        2.0 / 2f64.powi(self.level as i32)
    }

    pub fn radius(&self) -> f64 {
        (self.coords.len() as f64).sqrt() / 2f64.powi(self.level as i32)
    }

    pub fn center(&self) -> Vec<f64> {
        cube_center(self.level, &self.coords)
    }

    pub fn ball(&self) -> Ball {
        Ball { center: self.center(), radius: self.radius() }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = self.edge();
        self.coords.iter().zip(x).all(|(&c, &xi)| {
            let lo = -1.0 + c as f64 * h;
            xi >= lo && xi <= lo + h
        })
    }
}

pub fn cube_center(level: u32, coords: &[u32]) -> Vec<f64> {
    let h = 2.0 / 2f64.powi(level as i32);
    coords.iter().map(|&c| -1.0 + (c as f64 + 0.5) * h).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Sorted flat set of level-`s` coordinate vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelSet {
    m: usize,
    data: Vec<u32>,
}

impl LevelSet {
    fn from_unsorted(m: usize, mut rows: Vec<u32>) -> Self {
        let mut idx: Vec<usize> = (0..rows.len() / m.max(1)).collect();
        idx.sort_unstable_by(|&a, &b| rows[a * m..(a + 1) * m].cmp(&rows[b * m..(b + 1) * m]));
        idx.dedup_by(|a, b| rows[*a * m..(*a + 1) * m] == rows[*b * m..(*b + 1) * m]);
        let mut data = Vec::with_capacity(idx.len() * m);
        for i in idx {
            data.extend_from_slice(&rows[i * m..(i + 1) * m]);
        }
        rows.clear();
        LevelSet { m, data }
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            0
        } else {
            self.data.len() / self.m
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn position(&self, c: &[u32]) -> Option<usize> {
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(c) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks(self.m.max(1))
    }
}

/// `k = ⌈(√m γ − 1)/2⌉`, the smallest integer with `γ r_s ≤ k·edge_s + edge_s/2`.
pub fn neighborhood_k(m: usize, gamma: f64) -> u32 {
    let v = ((m as f64).sqrt() * gamma - 1.0) / 2.0;
    let mut k = v.ceil().max(0.0) as u32;
    // exact guard: γ² m ≤ (2k+1)² must hold
    while gamma * gamma * m as f64 > ((2 * k + 1) as f64).powi(2) {
        k += 1;
    }
    k
}

/// `d (3√m γ)^m log₂(3mγ/δ)` with `d ≥ 1`.
pub fn count_bound(d: usize, m: usize, gamma: f64, delta: f64) -> f64 {
    let mf = m as f64;
    d.max(1) as f64 * (3.0 * mf.sqrt() * gamma).powi(m as i32) * (3.0 * mf * gamma / delta).log2()
}

/// `⌈log₂(3mγ/δ)⌉`.
pub fn stop_level(m: usize, gamma: f64, delta: f64) -> u32 {
    (3.0 * m as f64 * gamma / delta).log2().ceil().max(1.0) as u32
}

/// Membership of a cube in the subdivision: retained, subdivided, or absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Retained(usize),
    Subdivided,
    Absent,
}

#[derive(Clone, Debug)]
pub struct WhitneyCover {
    pub m: usize,
    pub punctures: Vec<Vec<f64>>,
    pub delta: f64,
    pub gamma: f64,
    pub k: u32,
    /// `retained[l-1] = S_l`.
    pub retained: Vec<LevelSet>,
    /// `sigma[l-1] = Σ_l`; the last entry is the final `Σ_s`.
    pub sigma: Vec<LevelSet>,
    /// Whether the final `Σ_s ⊂ U_δ` check succeeded.
    pub stop_verified: bool,
    offsets: Vec<usize>,
    pdy: Vec<Vec<Dyadic>>,
}

/// Subtree filter used by restricted constructions: `true` means the cube
/// and all its descendants are dropped.
pub type Prune<'a> = dyn Fn(u32, &[u32]) -> bool + 'a;

pub fn build_cover(punctures: &[Vec<f64>], delta: f64, gamma: f64) -> Result<WhitneyCover> {
    build_cover_pruned(punctures, delta, gamma, &|_, _| false)
}

pub fn build_cover_pruned(punctures: &[Vec<f64>], delta: f64, gamma: f64, prune: &Prune) -> Result<WhitneyCover> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
    }
    let m = match punctures.first() {
        Some(p) => p.len(),
        None => return Err(Error::InvalidParameter("dimension unknown: use build_cover_dim".into())),
    };
    build_cover_dim(m, punctures, delta, gamma, prune)
}

/// Construction with an explicit dimension (allows an empty puncture set).
pub fn build_cover_dim(m: usize, punctures: &[Vec<f64>], delta: f64, gamma: f64, prune: &Prune) -> Result<WhitneyCover> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
    }
    if m == 0 || m > 16 {
        return Err(Error::InvalidParameter(format!("unsupported dimension {m}")));
    }
    for p in punctures {
        if p.len() != m || p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("malformed puncture".into()));
        }
    }
    let k = neighborhood_k(m, gamma);
    let s_stop = stop_level(m, gamma, delta);
    let cap = (s_stop + 12).min(MAX_LEVEL);
    let mut retained = Vec::new();
    let mut sigma = Vec::new();
    let mut stop_verified = false;

    // level 1: all 2^m cubes
    let mut candidates: Vec<u32> = Vec::with_capacity(m << m);
    for idx in 0..(1u32 << m) {
        for i in 0..m {
            candidates.push((idx >> i) & 1);
        }
    }
    let mut level = 1u32;
    loop {
        let ranges = puncture_ranges(punctures, level, k);
        let mut s_rows = Vec::new();
        let mut sig_rows = Vec::new();
        for c in candidates.chunks(m) {
            if prune(level, c) {
                continue;
            }
            if in_sigma(&ranges, c) {
                sig_rows.extend_from_slice(c);
            } else {
                s_rows.extend_from_slice(c);
            }
        }
        retained.push(LevelSet::from_unsorted(m, s_rows));
        let sig = LevelSet::from_unsorted(m, sig_rows);
        let done = sig.iter().all(|c| cube_inside_puncture_ball(level, c, punctures, delta));
        let sig_empty = sig.is_empty();
        sigma.push(sig);
        if done {
            stop_verified = true;
            break;
        }
        if level >= cap || sig_empty {
            break;
        }
        // children of Σ_level
        let cur = sigma.last().unwrap();
        candidates = Vec::with_capacity(cur.len() * (m << m));
        for c in cur.iter() {
            for idx in 0..(1u32 << m) {
                for i in 0..m {
                    candidates.push(2 * c[i] + ((idx >> i) & 1));
                }
            }
        }
        level += 1;
    }
    let mut offsets = Vec::with_capacity(retained.len() + 1);
    let mut acc = 0;
    for r in &retained {
        offsets.push(acc);
        acc += r.len();
    }
    offsets.push(acc);
    let pdy = punctures
        .iter()
        .map(|p| p.iter().map(|&x| Dyadic::from_f64(x)).collect())
        .collect();
    Ok(WhitneyCover {
        m,
        punctures: punctures.to_vec(),
        delta,
        gamma,
        k,
        retained,
        sigma,
        stop_verified,
        offsets,
        pdy,
    })
}

type Ranges = Vec<Vec<(i64, i64)>>;

fn puncture_ranges(punctures: &[Vec<f64>], level: u32, k: u32) -> Ranges {
    punctures
        .iter()
        .map(|p| {
            p.iter()
                .map(|&x| {
                    let (lo, hi) = dyadic::containing_range(x, level);
                    (lo - k as i64, hi + k as i64)
                })
                .collect()
        })
        .collect()
}

fn in_sigma(ranges: &Ranges, c: &[u32]) -> bool {
    ranges.iter().any(|r| {
        r.iter()
            .zip(c)
            .all(|(&(lo, hi), &ci)| (ci as i64) >= lo && (ci as i64) <= hi)
    })
}

/// Conservative test that the closed cube lies in an open δ-ball of a
/// single puncture.
fn cube_inside_puncture_ball(level: u32, c: &[u32], punctures: &[Vec<f64>], delta: f64) -> bool {
    let h = 2.0 / 2f64.powi(level as i32);
    punctures.iter().any(|p| {
        let far2: f64 = c
            .iter()
            .zip(p)
            .map(|(&ci, &pi)| {
                let lo = -1.0 + ci as f64 * h;
                let a = (lo - pi).abs().max((lo + h - pi).abs());
                a * a
            })
            .sum();
        far2 * (1.0 + 1e-12) < delta * delta
    })
}

impl WhitneyCover {
    pub fn final_level(&self) -> u32 {
        self.retained.len() as u32
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.retained.iter().map(LevelSet::len).collect()
    }

    pub fn sigma_final(&self) -> &LevelSet {
        self.sigma.last().unwrap()
    }

    pub fn cube(&self, idx: usize) -> SubCube {
        let l = self.offsets.partition_point(|&o| o <= idx) - 1;
        SubCube { level: l as u32 + 1, coords: self.retained[l].get(idx - self.offsets[l]).to_vec() }
    }

    pub fn ball(&self, idx: usize) -> Ball {
        self.cube(idx).ball()
    }

    pub fn count_bound(&self) -> f64 {
        count_bound(self.punctures.len(), self.m, self.gamma, self.delta)
    }

    pub fn status(&self, level: u32, c: &[u32]) -> Status {
        if level == 0 || level > self.final_level() {
            return Status::Absent;
        }
        let l = level as usize - 1;
        if let Some(p) = self.retained[l].position(c) {
            return Status::Retained(self.offsets[l] + p);
        }
        if self.sigma[l].position(c).is_some() {
            return Status::Subdivided;
        }
        Status::Absent
    }

    /// Exact γ-separation of retained ball `idx` from every puncture.
    pub fn exact_separated(&self, idx: usize) -> bool {
        let c = self.cube(idx);
        let g = Dyadic::from_f64(self.gamma);
        self.pdy.iter().all(|p| dyadic::separated(c.level, &c.coords, p, g))
    }

    /// Index of the retained cube containing `x`, preferring the finest
    /// level, or `None` when `x` falls in the final `Σ_s` or outside `Q`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.m || x.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return None;
        }
        let mut c = vec![0u32; self.m];
        for level in 1..=self.final_level() {
            let n = 1u64 << level;
            for (ci, &xi) in c.iter_mut().zip(x) {
                let v = ((xi + 1.0) * (n as f64) / 2.0).floor() as i64;
                *ci = v.clamp(0, n as i64 - 1) as u32;
            }
            match self.status(level, &c) {
                Status::Retained(i) => return Some(i),
                Status::Subdivided => continue,
                Status::Absent => return None,
            }
        }
        None
    }

    /// Retained cubes sharing part of an (m−1)-face with cube `idx`,
    /// sorted by index.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let cube = self.cube(idx);
        let mut out = BTreeSet::new();
        for axis in 0..self.m {
            for dir in [-1i64, 1] {
                let v = cube.coords[axis] as i64 + dir;
                if v < 0 || v >= (1i64 << cube.level) {
                    continue;
                }
                let mut nb = cube.coords.clone();
                nb[axis] = v as u32;
                self.face_neighbors(cube.level, &nb, axis, dir, &mut out);
            }
        }
        out.into_iter().collect()
    }

    fn face_neighbors(&self, level: u32, nb: &[u32], axis: usize, dir: i64, out: &mut BTreeSet<usize>) {
        match self.status(level, nb) {
            Status::Retained(i) => {
                out.insert(i);
            }
            Status::Subdivided => {
                let m = self.m;
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
                    self.face_neighbors(level + 1, &child, axis, dir, out);
                }
            }
            Status::Absent => {
                let mut c = nb.to_vec();
                let mut l = level;
                while l > 1 {
                    for ci in c.iter_mut() {
                        *ci /= 2;
                    }
                    l -= 1;
                    match self.status(l, &c) {
                        Status::Retained(i) => {
                            out.insert(i);
                            return;
                        }
                        Status::Subdivided => return,
                        Status::Absent => {}
                    }
                }
            }
        }
    }

    /// Breadth-first chain of face-adjacent retained cubes from the cube
    /// containing `v` to the cube containing `w`.
    pub fn find_chain(&self, v: &[f64], w: &[f64]) -> Result<CubeChain> {
        let a = self.locate(v).ok_or(Error::PointNotCovered)?;
        let b = self.locate(w).ok_or(Error::PointNotCovered)?;
        let path = bfs_path(a, b, |i| self.neighbors(i)).ok_or(Error::Disconnected)?;
        Ok(CubeChain { indices: path })
    }

    /// Deterministic structured document (level, then lexicographic coords).
    pub fn to_document(&self, with_adjacency: bool) -> CoverDocument {
        let mut cubes = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let c = self.cube(i);
            cubes.push(CubeRecord {
                level: c.level,
                center: c.center(),
                radius: c.radius(),
                coords: c.coords,
            });
        }
        let adjacency = if with_adjacency {
            let mut e = Vec::new();
            for i in 0..self.len() {
                for j in self.neighbors(i) {
                    if j > i {
                        e.push([i, j]);
                    }
                }
            }
            Some(e)
        } else {
            None
        };
        CoverDocument {
            m: self.m,
            gamma: self.gamma,
            delta: self.delta,
            k: self.k,
            punctures: self.punctures.clone(),
            final_level: self.final_level(),
            stop_verified: self.stop_verified,
            cubes,
            adjacency,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub level: u32,
    pub coords: Vec<u32>,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverDocument {
    pub m: usize,
    pub gamma: f64,
    pub delta: f64,
    pub k: u32,
    pub punctures: Vec<Vec<f64>>,
    pub final_level: u32,
    pub stop_verified: bool,
    pub cubes: Vec<CubeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<[usize; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeChain {
    pub indices: Vec<usize>,
}

impl CubeChain {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Shortest path in hop count by breadth-first search grown from both
/// ends, one full layer at a time from the smaller frontier. Among the
/// meeting points of minimal total length the smallest index wins, and
/// parents are the first discoverers in sorted-neighbor order, so the
/// result is deterministic.
pub fn bfs_path<F>(a: usize, b: usize, mut nbrs: F) -> Option<Vec<usize>>
where
    F: FnMut(usize) -> Vec<usize>,
{
    use std::collections::HashMap;
    if a == b {
        return Some(vec![a]);
    }
    let mut pa: HashMap<usize, (usize, usize)> = HashMap::from([(a, (a, 0))]);
    let mut pb: HashMap<usize, (usize, usize)> = HashMap::from([(b, (b, 0))]);
    let mut fa = vec![a];
    let mut fb = vec![b];
    while !fa.is_empty() && !fb.is_empty() {
        let grow_a = fa.len() <= fb.len();
        let (front, own, other) = if grow_a {
            (&mut fa, &mut pa, &pb)
        } else {
            (&mut fb, &mut pb, &pa)
        };
        let mut next = Vec::new();
        let mut meets: Vec<(usize, usize)> = Vec::new();
        for &u in front.iter() {
            let du = own[&u].1;
            for v in nbrs(u) {
                if own.contains_key(&v) {
                    continue;
                }
                own.insert(v, (u, du + 1));
                if let Some(&(_, dv)) = other.get(&v) {
                    meets.push((du + 1 + dv, v));
                }
                next.push(v);
            }
        }
        if let Some(&(_, meet)) = meets.iter().min() {
            let walk = |map: &HashMap<usize, (usize, usize)>, start: usize| {
                let mut out = vec![start];
                let mut cur = start;
                while map[&cur].1 > 0 {
                    cur = map[&cur].0;
                    out.push(cur);
                }
                out
            };
            let mut left = walk(&pa, meet);
            left.reverse();
            let right = walk(&pb, meet);
            left.extend_from_slice(&right[1..]);
            return Some(left);
        }
        *front = next;
    }
    None
}

/// Largest radius of a ball inside `B1 ∩ B2`: `½(r1 + r2 − ‖A−B‖)`,
/// `min(r1, r2)` when one ball contains the other, `0` when disjoint.
pub fn intersection_ball_radius(b1: &Ball, b2: &Ball) -> f64 {
    let d = b1
        .center
        .iter()
        .zip(&b2.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if d >= b1.radius + b2.radius {
        0.0
    } else if d <= (b1.radius - b2.radius).abs() {
        b1.radius.min(b2.radius)
    } else {
        0.5 * (b1.radius + b2.radius - d)
    }
}
