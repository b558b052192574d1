//! Closed paths and the exact trace expansion.
//!
//! A term of `E[Tr A^{2s}]` is indexed by a vertex sequence
//! `i_0 → i_1 → … → i_{2s} = i_0` on `{1, …, n}`. Its expectation factorizes
//! over distinct non-oriented edges because the entries `a_ij, i ≤ j` are
//! independent, so the weight of a path is `Π_e m_{k_e} / N^s` with `k_e` the
//! number of traversals of `e` and `m_k` the k-th moment of the entry law.
//!
//! Instants are 1-based: instant `j` is the step `i_{j-1} → i_j`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use thiserror::Error;

use crate::ensemble::EntryDistribution;

/// Enumeration guard for the brute-force oracle.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path must start and end at the same vertex")]
    NotClosed,
    #[error("path has odd length {0}")]
    OddLength(usize),
    #[error("vertex {vertex} is outside 1..={n}")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("a path needs at least one vertex")]
    Empty,
    #[error("enumeration of {n}^{len} sequences exceeds the limit of {limit}")]
    TooLarge { n: u64, len: u64, limit: u128 },
    #[error("cannot parse vertex list `{0}`")]
    Parse(String),
}

/// A non-oriented edge `{u, v}` stored with `u <= v`; loops have `u == v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub u32, pub u32);

impl Edge {
    #[inline]
    pub fn new(a: u32, b: u32) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    #[inline]
    pub fn is_loop(self) -> bool {
        self.0 == self.1
    }

    #[inline]
    pub fn touches(self, v: u32) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint opposite to `v`.
    #[inline]
    pub fn other(self, v: u32) -> u32 {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

/// Multiplicities of non-oriented edges in a walk.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeCount(BTreeMap<Edge, usize>);

impl EdgeCount {
    pub fn get(&self, e: Edge) -> usize {
        self.0.get(&e).copied().unwrap_or(0)
    }

    pub fn add(&mut self, e: Edge, k: usize) {
        if k > 0 {
            *self.0.entry(e).or_insert(0) += k;
        }
    }

    /// Removes `k` occurrences; panics if fewer are present.
    pub fn remove(&mut self, e: Edge, k: usize) {
        let slot = self.0.get_mut(&e).expect("edge present");
        assert!(*slot >= k, "removing more occurrences than present");
        *slot -= k;
        if *slot == 0 {
            self.0.remove(&e);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, usize)> + '_ {
        self.0.iter().map(|(e, k)| (*e, *k))
    }

    /// Number of distinct edges.
    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    /// Total number of traversals.
    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn odd_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.iter().filter(|(_, k)| k % 2 == 1).map(|(e, _)| e)
    }

    pub fn is_even(&self) -> bool {
        self.0.values().all(|k| k % 2 == 0)
    }

    /// Multiset union.
    pub fn merged(&self, other: &EdgeCount) -> EdgeCount {
        let mut out = self.clone();
        for (e, k) in other.iter() {
            out.add(e, k);
        }
        out
    }
}

/// A closed walk `v_0 → … → v_L = v_0` of any length, used for the pieces
/// produced by gluing (which need not have even length).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedWalk {
    vertices: Vec<u32>,
}

impl ClosedWalk {
    pub fn new(vertices: Vec<u32>) -> Result<Self, PathError> {
        match (vertices.first(), vertices.last()) {
            (None, _) => Err(PathError::Empty),
            (Some(a), Some(b)) if a != b => Err(PathError::NotClosed),
            _ => Ok(Self { vertices }),
        }
    }

    /// The zero-length walk sitting at `v`.
    pub fn trivial(v: u32) -> Self {
        Self { vertices: alloc::vec![v] }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn origin(&self) -> u32 {
        self.vertices[0]
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Oriented steps; the `j`-th item (0-based) is instant `j + 1`.
    pub fn steps(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn edge_multiplicities(&self) -> EdgeCount {
        edge_counts(&self.vertices)
    }

    pub fn is_even(&self) -> bool {
        self.edge_multiplicities().is_even()
    }

    pub fn marked_instants(&self) -> Vec<usize> {
        marked(&self.vertices)
    }

    pub fn into_vertices(self) -> Vec<u32> {
        self.vertices
    }
}

impl fmt::Display for ClosedWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vertex_list(f, &self.vertices)
    }
}

/// A closed path of even length `2s` on the vertex set `{1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedPath {
    walk: ClosedWalk,
    n: u32,
}

impl ClosedPath {
    pub fn new(vertices: Vec<u32>, n: u32) -> Result<Self, PathError> {
        let walk = ClosedWalk::new(vertices)?;
        if walk.len() % 2 == 1 {
            return Err(PathError::OddLength(walk.len()));
        }
        if let Some(&v) = walk.vertices.iter().find(|&&v| v == 0 || v > n) {
            return Err(PathError::VertexOutOfRange { vertex: v, n });
        }
        Ok(Self { walk, n })
    }

    /// Parses a comma-separated vertex list such as `1,2,1`.
    pub fn parse(text: &str, n: u32) -> Result<Self, PathError> {
        let vertices = text
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PathError::Parse(text.into()))?;
        Self::new(vertices, n)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Half length `s`.
    pub fn s(&self) -> usize {
        self.walk.len() / 2
    }

    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }

    pub fn vertices(&self) -> &[u32] {
        self.walk.vertices()
    }

    pub fn origin(&self) -> u32 {
        self.walk.origin()
    }

    pub fn as_walk(&self) -> &ClosedWalk {
        &self.walk
    }

    pub fn steps(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.walk.steps()
    }
}

impl fmt::Display for ClosedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vertex_list(f, self.vertices())
    }
}

fn write_vertex_list(f: &mut fmt::Formatter<'_>, vertices: &[u32]) -> fmt::Result {
    for (i, v) in vertices.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

pub(crate) fn edge_counts(vertices: &[u32]) -> EdgeCount {
    let mut c = EdgeCount::default();
    for w in vertices.windows(2) {
        c.add(Edge::new(w[0], w[1]), 1);
    }
    c
}

pub(crate) fn marked(vertices: &[u32]) -> Vec<usize> {
    let mut seen: BTreeMap<Edge, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for (j, w) in vertices.windows(2).enumerate() {
        let k = seen.entry(Edge::new(w[0], w[1])).or_insert(0);
        *k += 1;
        if *k % 2 == 1 {
            out.push(j + 1);
        }
    }
    out
}

/// Counts each step as one traversal of its non-oriented edge.
pub fn edge_multiplicities(p: &ClosedPath) -> EdgeCount {
    p.walk.edge_multiplicities()
}

/// `Π_e m_{k_e}`, divided by `N^s` when `normalized`.
pub fn path_weight(p: &ClosedPath, dist: &EntryDistribution, normalized: bool) -> f64 {
    let w: f64 = edge_multiplicities(p).iter().map(|(_, k)| dist.moment(k as u32)).product();
    if normalized {
        w / libm::pow(p.n as f64, p.s() as f64)
    } else {
        w
    }
}

/// Instants `j` whose edge has been traversed an odd number of times up to and
/// including `j`.
pub fn marked_instants(p: &ClosedPath) -> Vec<usize> {
    p.walk.marked_instants()
}

/// Instants of the last traversal of every edge with odd multiplicity, sorted.
/// The list always has even length `2l`.
pub fn nonreturned_edges(p: &ClosedPath) -> Vec<usize> {
    nonreturned(p.vertices())
}

pub(crate) fn nonreturned(vertices: &[u32]) -> Vec<usize> {
    let counts = edge_counts(vertices);
    let mut last: BTreeMap<Edge, usize> = BTreeMap::new();
    for (j, w) in vertices.windows(2).enumerate() {
        last.insert(Edge::new(w[0], w[1]), j + 1);
    }
    let mut out: Vec<usize> = last
        .into_iter()
        .filter(|(e, _)| counts.get(*e) % 2 == 1)
        .map(|(_, j)| j)
        .collect();
    out.sort_unstable();
    out
}

pub fn is_even_path(p: &ClosedPath) -> bool {
    edge_multiplicities(p).is_even()
}

/// Replaces every non-returned step `(a, b)` by `(a, n+1), (n+1, b)`. The result
/// is an even closed path of length `2s + 2l` on `n + 1` vertices.
pub fn fk_lift(p: &ClosedPath) -> ClosedPath {
    let fresh = p.n + 1;
    let nonreturned = nonreturned_edges(p);
    let v = p.vertices();
    let mut out = Vec::with_capacity(v.len() + nonreturned.len());
    out.push(v[0]);
    let mut next = nonreturned.iter().peekable();
    for j in 1..v.len() {
        if next.peek() == Some(&&j) {
            next.next();
            out.push(fresh);
        }
        out.push(v[j]);
    }
    ClosedPath::new(out, fresh).expect("lift of a closed path is closed")
}

/// Even and odd parts of the exact trace expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSplit {
    /// `E[Tr]` over all closed sequences.
    pub total: f64,
    /// Contribution `Z_e` of even paths.
    pub even: f64,
}

impl TraceSplit {
    /// `Z_o = total − Z_e`.
    pub fn odd(&self) -> f64 {
        self.total - self.even
    }
}

fn check_guard(n: usize, s: usize) -> Result<(), PathError> {
    let len = 2 * s as u64;
    let mut total: u128 = 1;
    for _ in 0..len {
        total = total.saturating_mul(n as u128);
        if total > ENUMERATION_LIMIT {
            return Err(PathError::TooLarge { n: n as u64, len, limit: ENUMERATION_LIMIT });
        }
    }
    Ok(())
}

/// `E[Tr M^{2s}]` (or `E[Tr A^{2s}]`) by summing [`path_weight`] over all `n^{2s}`
/// closed sequences.
pub fn exact_expected_trace(dist: &EntryDistribution, n: usize, s: usize, normalized: bool) -> Result<f64, PathError> {
    Ok(exact_trace_split(dist, n, s, normalized)?.total)
}

/// `Z_e`, the part of [`exact_expected_trace`] carried by even paths.
pub fn even_path_contribution(dist: &EntryDistribution, n: usize, s: usize, normalized: bool) -> Result<TraceSplit, PathError> {
    exact_trace_split(dist, n, s, normalized)
}

/// Sum over the sequences starting at `first` (1-based), unnormalized.
///
/// Sequences are visited in odometer order. The full trace is the sum of these
/// partial sums for `first = 1, …, n` in that order, which is how both the
/// sequential and the parallel drivers reduce.
pub fn exact_trace_from(dist: &EntryDistribution, n: usize, s: usize, first: u32) -> Result<TraceSplit, PathError> {
    check_guard(n, s)?;
    let mut walker = Enumerator::new(dist, n as u32, 2 * s, first);
    walker.run();
    Ok(TraceSplit { total: walker.total, even: walker.even })
}

/// Combines per-leading-vertex partial sums in vertex order.
pub fn reduce_trace_parts(parts: &[TraceSplit], n: usize, s: usize, normalized: bool) -> TraceSplit {
    let mut total = 0.0;
    let mut even = 0.0;
    for p in parts {
        total += p.total;
        even += p.even;
    }
    if normalized {
        let scale = libm::pow(n as f64, s as f64);
        total /= scale;
        even /= scale;
    }
    TraceSplit { total, even }
}

fn exact_trace_split(dist: &EntryDistribution, n: usize, s: usize, normalized: bool) -> Result<TraceSplit, PathError> {
    check_guard(n, s)?;
    let parts = (1..=n as u32)
        .map(|v| exact_trace_from(dist, n, s, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reduce_trace_parts(&parts, n, s, normalized))
}

/// Depth-first odometer over closed sequences with incremental edge counts.
struct Enumerator<'a> {
    dist: &'a EntryDistribution,
    n: u32,
    len: usize,
    seq: Vec<u32>,
    edges: Vec<(Edge, u32)>,
    singletons: usize,
    total: f64,
    even: f64,
}

impl<'a> Enumerator<'a> {
    fn new(dist: &'a EntryDistribution, n: u32, len: usize, first: u32) -> Self {
        let mut seq = Vec::with_capacity(len + 1);
        seq.push(first);
        Self { dist, n, len, seq, edges: Vec::new(), singletons: 0, total: 0.0, even: 0.0 }
    }

    fn push(&mut self, e: Edge) {
        match self.edges.iter_mut().find(|(f, _)| *f == e) {
            Some((_, k)) => {
                if *k == 1 {
                    self.singletons -= 1;
                }
                *k += 1;
            }
            None => {
                self.edges.push((e, 1));
                self.singletons += 1;
            }
        }
    }

    fn pop(&mut self, e: Edge) {
        let idx = self.edges.iter().position(|(f, _)| *f == e).expect("edge present");
        let k = &mut self.edges[idx].1;
        *k -= 1;
        match *k {
            0 => {
                self.edges.swap_remove(idx);
                self.singletons -= 1;
            }
            1 => self.singletons += 1,
            _ => {}
        }
    }

    fn run(&mut self) {
        let steps = self.seq.len() - 1;
        let remaining = self.len - steps;
        if remaining == 0 {
            let mut w = 1.0;
            let mut even = true;
            for (_, k) in &self.edges {
                w *= self.dist.moment(*k);
                even &= k % 2 == 0;
            }
            self.total += w;
            if even {
                self.even += w;
            }
            return;
        }
        // every singleton edge needs a later traversal, one per remaining step
        if self.singletons > remaining {
            return;
        }
        let last = *self.seq.last().expect("non-empty");
        if remaining == 1 {
            let e = Edge::new(last, self.seq[0]);
            self.step(e, self.seq[0]);
            return;
        }
        for v in 1..=self.n {
            self.step(Edge::new(last, v), v);
        }
    }

    fn step(&mut self, e: Edge, v: u32) {
        self.push(e);
        self.seq.push(v);
        self.run();
        self.seq.pop();
        self.pop(e);
    }
}

/// Uniformly random closed path: `2s − 1` free vertices, then back to the start.
pub fn random_path<R: Rng + ?Sized>(n: u32, s: usize, rng: &mut R) -> ClosedPath {
    let mut v = Vec::with_capacity(2 * s + 1);
    let first = rng.gen_range(1..=n);
    v.push(first);
    for _ in 1..2 * s {
        v.push(rng.gen_range(1..=n));
    }
    v.push(first);
    ClosedPath::new(v, n).expect("valid by construction")
}

/// Every closed sequence `i_0, …, i_{2s−1}, i_0` on `{1, …, n}` in odometer
/// order (last position fastest).
pub fn closed_sequences(n: u32, s: usize) -> Result<ClosedSequences, PathError> {
    check_guard(n as usize, s)?;
    if n == 0 || s == 0 {
        return Err(PathError::Empty);
    }
    Ok(ClosedSequences { n, next: Some(alloc::vec![1; 2 * s]) })
}

#[derive(Debug, Clone)]
pub struct ClosedSequences {
    n: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for ClosedSequences {
    type Item = ClosedPath;

    fn next(&mut self) -> Option<ClosedPath> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if let Some(pos) = succ.iter().rposition(|&v| v < self.n) {
            succ[pos] += 1;
            succ[pos + 1..].iter_mut().for_each(|v| *v = 1);
            self.next = Some(succ);
        }
        let mut v = current;
        v.push(v[0]);
        Some(ClosedPath::new(v, self.n).expect("valid by construction"))
    }
}

/// Random closed path that re-walks an already used edge at the current vertex
/// with probability `revisit`, which makes repeated edges (and hence paths with
/// nonzero weight) common.
pub fn sticky_random_path<R: Rng + ?Sized>(n: u32, s: usize, revisit: f64, rng: &mut R) -> ClosedPath {
    let first = rng.gen_range(1..=n);
    let mut v = alloc::vec![first];
    let mut used: Vec<Edge> = Vec::new();
    for _ in 1..2 * s {
        let cur = *v.last().expect("non-empty");
        let incident: Vec<Edge> = used.iter().copied().filter(|e| e.touches(cur)).collect();
        let next = if !incident.is_empty() && rng.gen::<f64>() < revisit {
            incident[rng.gen_range(0..incident.len())].other(cur)
        } else {
            rng.gen_range(1..=n)
        };
        let e = Edge::new(cur, next);
        if !used.contains(&e) {
            used.push(e);
        }
        v.push(next);
    }
    v.push(first);
    ClosedPath::new(v, n).expect("valid by construction")
}
