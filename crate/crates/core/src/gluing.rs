//! From odd paths to even paths.
//!
//! A closed path `P` of length `2s` with `2l` non-returned instants is cut at
//! the maximal runs `S_1, …, S_J` of non-returned instants. What remains are
//! `J + 1` subpaths `P_0, …, P_J`; `P_i` runs from `f_i` (right end of `S_i`)
//! to `e_{i+1}` (left end of `S_{i+1}`), with `f_0 = e_{J+1} = i_0`.
//!
//! Gluing reads `P_0` and then keeps attaching an unused subpath that has the
//! current end vertex as an endpoint, reversed if it is attached at its right
//! end. When the growing piece returns to its own origin it is closed; a new
//! piece starts from an unused subpath touching `i_0` if there is one, else
//! from the first unused subpath. Pieces are grouped by origin into closed
//! walks `W_0, …, W_{I−1}` whose concatenation `P′` has length `2s − 2l` and
//! carries every edge of `P` except one traversal of each odd edge.
//!
//! Among several candidate subpaths the lowest index wins; [`count_gluings`]
//! enumerates all choices instead.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::numeric::{ln_binomial, ln_catalan, ln_factorial, ln_falling, log_sum_exp};
use crate::paths::{self, ClosedPath, ClosedWalk, Edge, EdgeCount};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GluingError {
    #[error("path has no odd edges")]
    EvenPath,
    #[error("no unused subpath ends at vertex {0}; the odd edges do not close up")]
    Malformed(u32),
    #[error("the union of the walks has an odd edge {0:?}")]
    OddUnion(Edge),
    #[error("walk has an odd edge {0:?} with no partner walk")]
    Unpaired(Edge),
    #[error("parameters out of range: {0}")]
    Domain(&'static str),
    #[error("enumeration too large: {0}")]
    TooLarge(&'static str),
}

/// Maximal runs of non-returned instants and their end vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddStructure {
    /// Inclusive instant ranges `[a_i, b_i]`, sorted and pairwise separated.
    pub intervals: Vec<(usize, usize)>,
    /// `(e_i, f_i)`: the vertices just before and just after each run.
    pub endpoints: Vec<(u32, u32)>,
    pub j: usize,
    pub l: usize,
}

impl OddStructure {
    /// How many times each vertex occurs among `e_1, f_1, …, e_J, f_J`.
    pub fn endpoint_occurrences(&self) -> BTreeMap<u32, usize> {
        let mut occ = BTreeMap::new();
        for &(e, f) in &self.endpoints {
            *occ.entry(e).or_insert(0) += 1;
            *occ.entry(f).or_insert(0) += 1;
        }
        occ
    }
}

pub fn odd_interval_decomposition(p: &ClosedPath) -> Result<OddStructure, GluingError> {
    let nonreturned = paths::nonreturned_edges(p);
    if nonreturned.is_empty() {
        return Err(GluingError::EvenPath);
    }
    let v = p.vertices();
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    for &t in &nonreturned {
        match intervals.last_mut() {
            Some((_, b)) if *b + 1 == t => *b = t,
            _ => intervals.push((t, t)),
        }
    }
    let endpoints = intervals.iter().map(|&(a, b)| (v[a - 1], v[b])).collect();
    Ok(OddStructure { j: intervals.len(), l: nonreturned.len() / 2, intervals, endpoints })
}

/// The gluing outcome classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GluingCase {
    /// One closed even path.
    A,
    /// Several closed even paths.
    B,
    /// Several closed paths, some with odd edges (their union is even).
    C,
}

impl core::fmt::Display for GluingCase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            GluingCase::A => "A",
            GluingCase::B => "B",
            GluingCase::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluedDecomposition {
    /// `W_0, …, W_{I−1}`; `W_0` starts at `i_0`.
    pub w_paths: Vec<ClosedWalk>,
    /// Origins `v_0 = i_0, v_1, …, v_{I−1}`, pairwise distinct.
    pub origins: Vec<u32>,
    pub case: GluingCase,
    /// `2s − 2l`.
    pub total_length: usize,
    /// Half the number of non-returned instants of the input.
    pub l: usize,
    /// Number of odd runs (0 for an even input).
    pub j: usize,
}

impl GluedDecomposition {
    /// Number of walks `I`.
    pub fn i(&self) -> usize {
        self.w_paths.len()
    }

    /// Steps of `P′`, the concatenation `W_0 W_1 ⋯ W_{I−1}`.
    pub fn concatenated_steps(&self) -> Vec<(u32, u32)> {
        self.w_paths.iter().flat_map(|w| w.steps()).collect()
    }

    /// Edge multiset of `P′`.
    pub fn edge_multiplicities(&self) -> EdgeCount {
        let mut c = EdgeCount::default();
        for w in &self.w_paths {
            c = c.merged(&w.edge_multiplicities());
        }
        c
    }
}

/// One subpath read in a given direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Piece {
    index: usize,
    reversed: bool,
}

/// A closed piece built by one run of the gluing loop.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Trail {
    origin: u32,
    pieces: Vec<Piece>,
}

/// Subpaths `P_0..P_J` of a path with their end vertices.
struct Split {
    subpaths: Vec<Vec<u32>>,
    origin: u32,
}

impl Split {
    fn new(p: &ClosedPath, odd: Option<&OddStructure>) -> Self {
        let v = p.vertices();
        let subpaths = match odd {
            None => vec![v.to_vec()],
            Some(odd) => {
                let mut out = Vec::with_capacity(odd.j + 1);
                let mut start = 0;
                for &(a, b) in &odd.intervals {
                    out.push(v[start..a].to_vec());
                    start = b;
                }
                out.push(v[start..].to_vec());
                out
            }
        };
        Split { subpaths, origin: p.origin() }
    }

    fn left(&self, i: usize) -> u32 {
        self.subpaths[i][0]
    }

    fn right(&self, i: usize) -> u32 {
        *self.subpaths[i].last().expect("non-empty")
    }

    fn start_of(&self, piece: Piece) -> u32 {
        if piece.reversed {
            self.right(piece.index)
        } else {
            self.left(piece.index)
        }
    }

    fn end_of(&self, piece: Piece) -> u32 {
        if piece.reversed {
            self.left(piece.index)
        } else {
            self.right(piece.index)
        }
    }

    /// Ways to continue from `vertex` with an unused subpath: each subpath may
    /// be entered at either end that sits on `vertex`.
    fn candidates(&self, used: &[bool], vertex: u32) -> Vec<Piece> {
        let mut out = Vec::new();
        for i in 0..self.subpaths.len() {
            if used[i] {
                continue;
            }
            if self.left(i) == vertex {
                out.push(Piece { index: i, reversed: false });
            }
            if self.right(i) == vertex && !(self.left(i) == vertex && self.subpaths[i].len() == 1) {
                out.push(Piece { index: i, reversed: true });
            }
        }
        out
    }

    fn read(&self, piece: Piece, out: &mut Vec<u32>) {
        let sp = &self.subpaths[piece.index];
        if piece.reversed {
            out.extend(sp.iter().rev().skip(1));
        } else {
            out.extend(sp.iter().skip(1));
        }
    }
}

/// Where the gluing loop asks for a decision.
trait Chooser {
    fn choose(&mut self, options: &[Piece]) -> Piece;
}

struct LowestIndex;

impl Chooser for LowestIndex {
    fn choose(&mut self, options: &[Piece]) -> Piece {
        options[0]
    }
}

/// Runs the gluing loop with the given chooser.
fn run_gluing<C: Chooser>(split: &Split, chooser: &mut C) -> Result<Vec<Trail>, GluingError> {
    let count = split.subpaths.len();
    let mut used = vec![false; count];
    let mut trails = Vec::new();
    let first = Piece { index: 0, reversed: false };
    used[0] = true;
    let mut trail = Trail { origin: split.origin, pieces: vec![first] };
    let mut end = split.end_of(first);
    loop {
        if end == trail.origin {
            trails.push(core::mem::replace(&mut trail, Trail { origin: 0, pieces: Vec::new() }));
            let at_root = split.candidates(&used, split.origin);
            let next = if !at_root.is_empty() {
                chooser.choose(&at_root)
            } else if let Some(i) = used.iter().position(|u| !u) {
                Piece { index: i, reversed: false }
            } else {
                return Ok(trails);
            };
            used[next.index] = true;
            trail = Trail { origin: split.start_of(next), pieces: vec![next] };
            end = split.end_of(next);
            continue;
        }
        let options = split.candidates(&used, end);
        if options.is_empty() {
            return Err(GluingError::Malformed(end));
        }
        let next = chooser.choose(&options);
        used[next.index] = true;
        trail.pieces.push(next);
        end = split.end_of(next);
    }
}

fn assemble(split: &Split, trails: &[Trail], l: usize, j: usize) -> GluedDecomposition {
    let mut origins: Vec<u32> = Vec::new();
    let mut walks: Vec<Vec<u32>> = Vec::new();
    for t in trails {
        let slot = match origins.iter().position(|&o| o == t.origin) {
            Some(k) => k,
            None => {
                origins.push(t.origin);
                walks.push(vec![t.origin]);
                origins.len() - 1
            }
        };
        for piece in &t.pieces {
            split.read(*piece, &mut walks[slot]);
        }
    }
    let w_paths: Vec<ClosedWalk> = walks
        .into_iter()
        .map(|w| ClosedWalk::new(w).expect("trails are closed"))
        .collect();
    let all_even = w_paths.iter().all(ClosedWalk::is_even);
    let case = match (w_paths.len(), all_even) {
        (1, _) => GluingCase::A,
        (_, true) => GluingCase::B,
        (_, false) => GluingCase::C,
    };
    let total_length = w_paths.iter().map(ClosedWalk::len).sum();
    GluedDecomposition { w_paths, origins, case, total_length, l, j }
}

/// Runs the gluing procedure with lowest-index tie-breaking. An even path is
/// returned unchanged as Case A.
pub fn glue(p: &ClosedPath) -> Result<GluedDecomposition, GluingError> {
    let odd = match odd_interval_decomposition(p) {
        Ok(odd) => Some(odd),
        Err(GluingError::EvenPath) => None,
        Err(e) => return Err(e),
    };
    let split = Split::new(p, odd.as_ref());
    let trails = run_gluing(&split, &mut LowestIndex)?;
    let (l, j) = odd.as_ref().map_or((0, 0), |o| (o.l, o.j));
    Ok(assemble(&split, &trails, l, j))
}

/// Number of gluings and the endpoint classes `E_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingCount {
    /// Number of ways to pair subpath ends at every shared vertex.
    pub gluings: u128,
    /// `E_i`: number of vertices occurring `2i` times as an endpoint of an odd run.
    pub endpoint_classes: BTreeMap<usize, usize>,
    /// Number of subpath ends at each vertex (the two ends of the path count at `i_0`).
    pub ends: BTreeMap<u32, usize>,
}

impl GluingCount {
    /// `Π_{i ≥ 2} (i!)^{E_i}`.
    pub fn factorial_product(&self) -> f64 {
        self.endpoint_classes
            .iter()
            .filter(|(i, _)| **i >= 2)
            .map(|(i, e)| libm::exp(ln_factorial(*i as u64) * *e as f64))
            .product()
    }
}

/// Lower-bound constant for `gluings ≥ const · Π_{i≥2}(i!)^{E_i}`, the minimum
/// ratio over every odd closed sequence with `n ≤ 4`, length `≤ 8`.
pub const GLUING_COUNT_CONSTANT: f64 = 1.0;

/// Counts gluings: at a vertex carrying `2a` subpath ends the ends can be
/// paired in `(2a − 1)!!` ways, and choices at distinct vertices are
/// independent. Every pairing splits the subpaths into closed trails.
pub fn count_gluings(p: &ClosedPath) -> Result<GluingCount, GluingError> {
    let odd = odd_interval_decomposition(p)?;
    let mut ends = odd.endpoint_occurrences();
    *ends.entry(p.origin()).or_insert(0) += 2;
    let mut gluings: u128 = 1;
    for &k in ends.values() {
        if k % 2 == 1 {
            return Err(GluingError::Malformed(0));
        }
        let mut f = k as u128 - 1;
        while f > 1 {
            gluings = gluings.checked_mul(f).ok_or(GluingError::TooLarge("gluing count overflows"))?;
            f -= 2;
        }
    }
    let mut endpoint_classes = BTreeMap::new();
    for (_, occ) in odd.endpoint_occurrences() {
        *endpoint_classes.entry(occ / 2).or_insert(0) += 1;
    }
    Ok(GluingCount { gluings, endpoint_classes, ends })
}

/// Odd edges split into cycles following the order in which the gluing pairs
/// the ends of odd runs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleDecomposition {
    /// Each cycle as the closed vertex sequence of its odd edges.
    pub cycles: Vec<Vec<u32>>,
    /// `c_i`: number of cycles with `i` odd edges.
    pub sizes: BTreeMap<usize, usize>,
}

impl CycleDecomposition {
    /// Number of cycles `c`.
    pub fn c(&self) -> usize {
        self.cycles.len()
    }

    /// Edge multiset of all cycles together.
    pub fn edge_multiplicities(&self) -> EdgeCount {
        let mut c = EdgeCount::default();
        for cyc in &self.cycles {
            for w in cyc.windows(2) {
                c.add(Edge::new(w[0], w[1]), 1);
            }
        }
        c
    }
}

/// End `k` of subpath `i`: 0 = left (`f_i`), 1 = right (`e_{i+1}`).
type End = (usize, u8);

pub fn cycle_decomposition(p: &ClosedPath) -> Result<CycleDecomposition, GluingError> {
    let odd = match odd_interval_decomposition(p) {
        Ok(odd) => odd,
        Err(GluingError::EvenPath) => return Ok(CycleDecomposition::default()),
        Err(e) => return Err(e),
    };
    let split = Split::new(p, Some(&odd));
    let trails = run_gluing(&split, &mut LowestIndex)?;
    let enter = |pc: &Piece| -> End { (pc.index, if pc.reversed { 1 } else { 0 }) };
    let exit = |pc: &Piece| -> End { (pc.index, if pc.reversed { 0 } else { 1 }) };
    // gluing links between consecutive pieces, and the closing link of each trail
    let mut partner: BTreeMap<End, End> = BTreeMap::new();
    for t in &trails {
        let k = t.pieces.len();
        for idx in 0..k {
            let a = exit(&t.pieces[idx]);
            let b = enter(&t.pieces[(idx + 1) % k]);
            partner.insert(a, b);
            partner.insert(b, a);
        }
    }
    // odd run i (1-based) links the right end of P_{i−1} to the left end of P_i;
    // the virtual link J+1 closes P_J back to P_0 at the origin.
    let j = odd.j;
    let run_of = |end: End| -> usize {
        match end {
            (i, 0) if i == 0 => j + 1,
            (i, 0) => i,
            (i, _) if i == j => j + 1,
            (i, _) => i + 1,
        }
    };
    let run_ends = |run: usize| -> (End, End) {
        if run == j + 1 {
            ((j, 1), (0, 0))
        } else {
            ((run - 1, 1), (run, 0))
        }
    };
    let v = p.vertices();
    let run_vertices = |run: usize, forward: bool| -> Vec<u32> {
        let (a, b) = odd.intervals[run - 1];
        let seg = &v[a - 1..=b];
        if forward {
            seg.to_vec()
        } else {
            seg.iter().rev().copied().collect()
        }
    };
    let mut visited = vec![false; j + 2];
    let mut cycles = Vec::new();
    for start in 1..=j + 1 {
        if visited[start] {
            continue;
        }
        let mut seq: Vec<u32> = Vec::new();
        let mut run = start;
        let mut entry = run_ends(run).0;
        loop {
            visited[run] = true;
            let (from, to) = run_ends(run);
            let forward = entry == from;
            let leave = if forward { to } else { from };
            if run != j + 1 {
                let verts = run_vertices(run, forward);
                if seq.is_empty() {
                    seq.extend(verts);
                } else {
                    seq.extend(verts.into_iter().skip(1));
                }
            }
            let next_end = partner[&leave];
            run = run_of(next_end);
            entry = next_end;
            if run == start {
                break;
            }
        }
        if !seq.is_empty() {
            cycles.push(seq);
        }
    }
    let mut sizes = BTreeMap::new();
    for cyc in &cycles {
        *sizes.entry(cyc.len() - 1).or_insert(0) += 1;
    }
    Ok(CycleDecomposition { cycles, sizes })
}

/// Merges walks sharing odd edges until every walk is even.
///
/// Returns the even walks `D_j` and the number of merges `I₁`. Each merge
/// removes two traversals of the shared edge.
pub fn second_gluing(w_paths: &[ClosedWalk]) -> Result<(Vec<ClosedWalk>, usize), GluingError> {
    let mut union = EdgeCount::default();
    for w in w_paths {
        union = union.merged(&w.edge_multiplicities());
    }
    if let Some(e) = union.odd_edges().next() {
        return Err(GluingError::OddUnion(e));
    }
    let mut walks: Vec<Vec<u32>> = w_paths.iter().map(|w| w.vertices().to_vec()).collect();
    let mut merges = 0;
    loop {
        let counts: Vec<EdgeCount> = walks.iter().map(|w| paths::edge_counts(w)).collect();
        let Some(i) = counts.iter().position(|c| !c.is_even()) else {
            break;
        };
        // first traversal of an odd edge in W_i
        let (t, edge) = walks[i]
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k + 1, Edge::new(w[0], w[1])))
            .find(|(_, e)| counts[i].get(*e) % 2 == 1)
            .expect("walk has an odd edge");
        let j = (i + 1..walks.len())
            .find(|&j| counts[j].get(edge) % 2 == 1)
            .ok_or(GluingError::Unpaired(edge))?;
        let t2 = walks[j]
            .windows(2)
            .position(|w| Edge::new(w[0], w[1]) == edge)
            .expect("edge present")
            + 1;
        let merged = splice(&walks[i], t, &walks[j], t2);
        walks[i] = merged;
        walks.remove(j);
        merges += 1;
    }
    let out = walks
        .into_iter()
        .map(|w| ClosedWalk::new(w).expect("splices stay closed"))
        .collect();
    Ok((out, merges))
}

/// Joins `u` and `w` along the edge traversed at instant `t` of `u` and instant
/// `t2` of `w`, dropping both traversals.
fn splice(u: &[u32], t: usize, w: &[u32], t2: usize) -> Vec<u32> {
    let (a, b) = (u[t - 1], u[t]);
    let len_w = w.len() - 1;
    let opposite = (w[t2 - 1], w[t2]) == (b, a);
    let mut out: Vec<u32> = u[..t].to_vec();
    if opposite {
        // from a = w[t2], forward around w back to w[t2−1] = b
        for k in 1..len_w {
            out.push(w[(t2 + k) % len_w]);
        }
    } else {
        // from a = w[t2−1], backward around w to w[t2] = b
        for k in 1..len_w {
            out.push(w[(t2 - 1 + len_w - k) % len_w]);
        }
    }
    if len_w == 1 {
        // w is a single loop step a → a
        debug_assert_eq!(a, b);
    }
    out.extend_from_slice(&u[t..]);
    // the element u[t] = b is already the last pushed vertex when len_w > 1
    if len_w > 1 || a == b {
        out.remove(t + len_w - 1);
    }
    out
}

/// Self-intersection and degree statistics of a (concatenated) even path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathStatistics {
    /// `κ = r + Σ_{k>2} k·n_k`.
    pub kappa: usize,
    /// Number of non-closed simple self-intersections.
    pub r: usize,
    /// `n_k` for `k ≥ 2`: vertices reached at exactly `k` marked instants
    /// (the start vertex counts time 0 as one arrival).
    pub n_k: BTreeMap<usize, usize>,
    /// `ν_N = max_x ν(x)`, with `ν(x)` the number of distinct edges at `x`.
    pub nu_max: usize,
    pub nu: BTreeMap<u32, usize>,
    /// `M(v) = Σ_{v₁ : {v,v₁} ∈ P} ν(v₁)`.
    pub m: BTreeMap<u32, usize>,
}

impl PathStatistics {
    /// Number of self-intersections `Σ_{k≥2} n_k`.
    pub fn self_intersections(&self) -> usize {
        self.n_k.values().sum()
    }
}

/// Statistics of an even closed path.
pub fn path_statistics(p_even: &ClosedPath) -> PathStatistics {
    let steps: Vec<(u32, u32)> = p_even.steps().collect();
    statistics_of_steps(p_even.origin(), &steps)
}

/// Arrival type of each vertex: marked arrivals plus one for `origin`.
fn vertex_types(origin: u32, steps: &[(u32, u32)], marks: &[bool]) -> BTreeMap<u32, usize> {
    let mut types: BTreeMap<u32, usize> = BTreeMap::new();
    *types.entry(origin).or_insert(0) += 1;
    for (k, &(_, to)) in steps.iter().enumerate() {
        if marks[k] {
            *types.entry(to).or_insert(0) += 1;
        }
    }
    types
}

fn step_marks(steps: &[(u32, u32)]) -> Vec<bool> {
    let mut seen: BTreeMap<Edge, usize> = BTreeMap::new();
    steps
        .iter()
        .map(|&(a, b)| {
            let k = seen.entry(Edge::new(a, b)).or_insert(0);
            *k += 1;
            *k % 2 == 1
        })
        .collect()
}

/// Statistics of a concatenation of closed walks given as steps. `origin` is the
/// start of the first walk.
///
/// A simple self-intersection `v` is non-closed when some unmarked step leaves
/// `v` along an edge other than the most recently opened one: marked steps
/// push their edge on a stack, unmarked steps pop it, and a pop below the top
/// flags the departure vertex.
pub fn statistics_of_steps(origin: u32, steps: &[(u32, u32)]) -> PathStatistics {
    let marks = step_marks(steps);
    let types = vertex_types(origin, steps, &marks);
    let mut n_k = BTreeMap::new();
    for &k in types.values() {
        if k >= 2 {
            *n_k.entry(k).or_insert(0) += 1;
        }
    }
    let mut stack: Vec<Edge> = Vec::new();
    let mut flagged: BTreeSet<u32> = BTreeSet::new();
    for (k, &(a, b)) in steps.iter().enumerate() {
        let e = Edge::new(a, b);
        if marks[k] {
            stack.push(e);
        } else if stack.last() == Some(&e) {
            stack.pop();
        } else {
            if let Some(pos) = stack.iter().rposition(|f| *f == e) {
                stack.remove(pos);
            }
            flagged.insert(a);
        }
    }
    let r = flagged.iter().filter(|v| types.get(v) == Some(&2)).count();
    let kappa = r + n_k.iter().filter(|(k, _)| **k > 2).map(|(k, n)| k * n).sum::<usize>();

    let mut neighbours: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(a, b) in steps {
        neighbours.entry(a).or_default().insert(b);
        neighbours.entry(b).or_default().insert(a);
    }
    let nu: BTreeMap<u32, usize> = neighbours.iter().map(|(v, s)| (*v, s.len())).collect();
    let m = neighbours
        .iter()
        .map(|(v, s)| (*v, s.iter().map(|x| nu[x]).sum()))
        .collect();
    PathStatistics { kappa, r, n_k, nu_max: nu.values().copied().max().unwrap_or(0), nu, m }
}

/// `κ` recomputed instant by instant: `r` plus every marked arrival (and the
/// time-0 arrival at the origin) at a vertex of type at least 3.
pub fn kappa_by_instants(origin: u32, steps: &[(u32, u32)], r: usize) -> usize {
    let marks = step_marks(steps);
    let types = vertex_types(origin, steps, &marks);
    let heavy = |v: u32| types.get(&v).copied().unwrap_or(0) >= 3;
    let mut kappa = r + usize::from(heavy(origin));
    for (k, &(_, to)) in steps.iter().enumerate() {
        if marks[k] && heavy(to) {
            kappa += 1;
        }
    }
    kappa
}

/// Guard on the number of sequences scanned by [`insertion_enumerate`].
pub const INSERTION_LIMIT: u64 = 20_000_000;

/// All closed paths `P` from the origin of `p_prime`, on the same vertex set,
/// with at most `l_max` pairs of odd edges, such that removing one traversal of
/// each odd edge of `P` leaves exactly the edge multiset of `p_prime`, and every
/// odd edge of `P` is an edge of `p_prime`. For `l_max = 0` the fiber is
/// `{p_prime}`. Output is sorted lexicographically.
pub fn insertion_enumerate(p_prime: &ClosedPath, l_max: usize) -> Result<Vec<ClosedPath>, GluingError> {
    if !paths::is_even_path(p_prime) {
        return Err(GluingError::Domain("p_prime must be an even path"));
    }
    let target = paths::edge_multiplicities(p_prime);
    let n = p_prime.n();
    let mut out = vec![p_prime.clone()];
    for l in 1..=l_max {
        let len = p_prime.len() + 2 * l;
        let mut total: u64 = 1;
        for _ in 1..len {
            total = total.saturating_mul(n as u64);
        }
        if total > INSERTION_LIMIT {
            return Err(GluingError::TooLarge("insertion enumeration"));
        }
        let mut seq = vec![p_prime.origin(); len + 1];
        scan_sequences(&mut seq, 1, n, &mut |v| {
            let counts = paths::edge_counts(v);
            let odd: Vec<Edge> = counts.odd_edges().collect();
            if odd.len() != 2 * l || odd.iter().any(|e| target.get(*e) == 0) {
                return;
            }
            let mut reduced = counts.clone();
            for e in &odd {
                reduced.remove(*e, 1);
            }
            if reduced == target {
                out.push(ClosedPath::new(v.to_vec(), n).expect("closed by construction"));
            }
        });
    }
    out.sort();
    Ok(out)
}

fn scan_sequences<F: FnMut(&[u32])>(seq: &mut [u32], pos: usize, n: u32, f: &mut F) {
    let last = seq.len() - 1;
    if pos == last {
        f(seq);
        return;
    }
    for v in 1..=n {
        seq[pos] = v;
        scan_sequences(seq, pos + 1, n, f);
    }
}

/// `C(2m, J)·J!·2^J·C(2l, J)·(2m)!/(2m − 2l + J)!`, in log form.
pub fn ln_case_a_insertion_bound(m: u64, l: u64, j: u64) -> Result<f64, GluingError> {
    if !(1 <= j && j <= 2 * l && 2 * l <= 2 * m) {
        return Err(GluingError::Domain("need 1 <= J <= 2l <= 2m"));
    }
    Ok(ln_binomial(2 * m, j)
        + ln_factorial(j)
        + j as f64 * core::f64::consts::LN_2
        + ln_binomial(2 * l, j)
        + ln_falling(2 * m, 2 * m - 2 * l + j))
}

/// Number of ways to choose and insert `2l` odd edges in `J` runs into an even
/// path of length `2m` (Case A count).
pub fn case_a_insertion_bound(m: u64, l: u64, j: u64) -> Result<f64, GluingError> {
    ln_case_a_insertion_bound(m, l, j).map(libm::exp)
}

/// Per-`l` terms of a contribution bound, all in log form.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSweep {
    /// `(l, ln term_l)`.
    pub terms: Vec<(u64, f64)>,
    /// `ln Σ_l term_l` (`-inf` for an empty sum).
    pub ln_total: f64,
    /// `ln (n·T_{0,2s}·σ^{2s})`, the even-path scale.
    pub ln_even_scale: f64,
}

impl BoundSweep {
    fn new(terms: Vec<(u64, f64)>, s: u64, n: f64, sigma: f64) -> Self {
        let ln_total = log_sum_exp(terms.iter().map(|t| t.1));
        let ln_even_scale = libm::log(n) + ln_catalan(s) + 2.0 * s as f64 * libm::log(sigma);
        Self { terms, ln_total, ln_even_scale }
    }

    pub fn total(&self) -> f64 {
        libm::exp(self.ln_total)
    }

    /// `ln(total / (n·T_{0,2s}·σ^{2s}))`.
    pub fn ln_ratio_to_even(&self) -> f64 {
        self.ln_total - self.ln_even_scale
    }
}

/// `Σ_{l=1}^{s−1} C1·n·T_{0,2s−2l}·σ^{2s−2l}·(16K(s−l)/√n)^{2l}`.
pub fn case_a_contribution_bound(s: u64, n: f64, sigma: f64, k: f64, c1: f64) -> BoundSweep {
    let terms = (1..s)
        .map(|l| {
            let rest = s - l;
            let t = libm::log(c1) + libm::log(n) + ln_catalan(rest) + 2.0 * rest as f64 * libm::log(sigma)
                + 2.0 * l as f64 * libm::log(16.0 * k * rest as f64 / libm::sqrt(n));
            (l, t)
        })
        .collect();
    BoundSweep::new(terms, s, n, sigma)
}

/// Constant `c` in `Σ_{k=1}^{s−1} k^{−3/2}(s−k)^{−3/2} ≤ c·s^{−3/2}`, as the
/// supremum of `s^{3/2}·Σ` over `2 ≤ s ≤ s_max`.
pub fn catalan_tail_constant(s_max: u64) -> f64 {
    (2..=s_max)
        .map(|s| {
            let sum: f64 = (1..s)
                .map(|k| libm::pow(k as f64, -1.5) * libm::pow((s - k) as f64, -1.5))
                .sum();
            sum * libm::pow(s as f64, 1.5)
        })
        .fold(0.0, f64::max)
}

/// Multiple-cluster bound: the displayed Case B sum after bounding the cluster
/// binomials by `2^J·C(2s−2l, J)` and the cluster Catalan sum by
/// `const^{2l}·T_{0,2s−2l}`.
pub fn case_b_contribution_bound(s: u64, n: f64, sigma: f64, k: f64, c1: f64, cluster_const: f64) -> BoundSweep {
    let ln2 = core::f64::consts::LN_2;
    let terms = (1..s)
        .filter_map(|l| {
            let rest = 2 * s - 2 * l;
            let per_j: Vec<f64> = (2..=2 * l)
                .filter(|&j| 2 * s + j >= 4 * l && j <= rest)
                .map(|j| {
                    2.0 * j as f64 * ln2
                        + ln_factorial(j)
                        + ln_binomial(2 * l, j)
                        + ln_falling(rest, 2 * s + j - 4 * l)
                        + ln_binomial(rest, j)
                        + j as f64 * libm::log(c1.max(1.0))
                })
                .collect();
            if per_j.is_empty() {
                return None;
            }
            let t = log_sum_exp(per_j)
                + 2.0 * l as f64 * (libm::log(k) + libm::log(cluster_const))
                - l as f64 * libm::log(n)
                + libm::log(n)
                + ln_catalan(s - l)
                + rest as f64 * libm::log(sigma);
            Some((l, t))
        })
        .collect();
    BoundSweep::new(terms, s, n, sigma)
}

/// Case C reduction factors in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseCReduction {
    /// `ln [C(2s,I₁)(4s)^{I₁}(2s)^{I₁}(c/n)^{I₁}]`.
    pub ln_trivial: f64,
    /// `ln [C(2s′,I₁)(C·s^{3/2}/n)^{I₁}]` with `2s′ = 2s − 2l − 2I₁`.
    pub ln_refined: f64,
    /// `ln C(2s, I₁)`.
    pub ln_binomial: f64,
}

impl CaseCReduction {
    pub fn trivial_ratio(&self) -> f64 {
        libm::exp(self.ln_trivial - self.ln_binomial)
    }

    pub fn refined_ratio(&self) -> f64 {
        libm::exp(self.ln_refined - self.ln_binomial)
    }
}

pub fn case_c_reduction_bound(
    s: u64,
    n: f64,
    l: u64,
    i: u64,
    i1: u64,
    trivial_const: f64,
    refined_const: f64,
) -> Result<CaseCReduction, GluingError> {
    if i1 >= i.max(1) && i1 != 0 {
        return Err(GluingError::Domain("need I1 < I"));
    }
    if 2 * l + 2 * i1 > 2 * s {
        return Err(GluingError::Domain("need l + I1 <= s"));
    }
    let sf = s as f64;
    let x = i1 as f64;
    let ln_binomial = ln_binomial(2 * s, i1);
    let ln_trivial = ln_binomial + x * (libm::log(4.0 * sf) + libm::log(2.0 * sf) + libm::log(trivial_const / n));
    let ln_refined =
        crate::numeric::ln_binomial(2 * s - 2 * l - 2 * i1, i1) + x * libm::log(refined_const * libm::pow(sf, 1.5) / n);
    Ok(CaseCReduction { ln_trivial, ln_refined, ln_binomial })
}

/// One term `(1/c!)·s^c·s^l·(1/(J−c)!)·s^{J−c}·C^{2l}` of the refined insertion count.
pub fn refined_insertion_term(s: f64, l: u64, j: u64, c: u64, big_c: f64) -> Result<f64, GluingError> {
    ln_refined_insertion_term(s, l, j, c, big_c).map(libm::exp)
}

pub fn ln_refined_insertion_term(s: f64, l: u64, j: u64, c: u64, big_c: f64) -> Result<f64, GluingError> {
    if !(1 <= c && c <= j && j <= 2 * l) {
        return Err(GluingError::Domain("need 1 <= c <= J <= 2l"));
    }
    let ls = libm::log(s);
    Ok(-ln_factorial(c) + c as f64 * ls + l as f64 * ls - ln_factorial(j - c)
        + (j - c) as f64 * ls
        + 2.0 * l as f64 * libm::log(big_c))
}

/// `ln Σ_{1≤c≤J≤2l}` of [`refined_insertion_term`].
pub fn ln_refined_insertion_bound(s: f64, l: u64, big_c: f64) -> f64 {
    log_sum_exp((1..=2 * l).flat_map(|j| {
        (1..=j).map(move |c| ln_refined_insertion_term(s, l, j, c, big_c).expect("in range"))
    }))
}

/// Odd-edge count above which paths are negligible at `s = n^{1/2+η}`:
/// `n^{1/4 + η/2 − ε/2}`.
pub fn odd_edge_cutoff(n: f64, eta: f64, epsilon: f64) -> f64 {
    libm::pow(n, 0.25 + eta / 2.0 - epsilon / 2.0)
}

/// Log of the per-`(r, κ₀₁, κ₀₂)` even-path contribution factor at
/// `s = n^{1/2+η}` (without the common `σ^{2s−2l}T_{0,2s−2l}` prefactor):
/// `n^{2η} − ln r! + r·ln n^{−1/8+9η/4} − ln κ₀₁! + κ₀₁·ln n^{3η−1/2} + κ₀₂·ln(C′s/n^{199/200})`.
pub fn ln_self_intersection_factor(n: f64, eta: f64, r: u64, kappa01: u64, kappa02: u64, c_prime: f64) -> f64 {
    let ln_n = libm::log(n);
    let s = libm::pow(n, 0.5 + eta);
    libm::pow(n, 2.0 * eta) - ln_factorial(r) + r as f64 * (-0.125 + 2.25 * eta) * ln_n - ln_factorial(kappa01)
        + kappa01 as f64 * (3.0 * eta - 0.5) * ln_n
        + kappa02 as f64 * (libm::log(c_prime * s) - 0.995 * ln_n)
}

/// `ln [(s/κ)^{4κ} e^{−C₀ M}]`.
pub fn ln_distance_two_factor(s: f64, kappa: u64, m: f64, c0: f64) -> f64 {
    if kappa == 0 {
        return -c0 * m;
    }
    4.0 * kappa as f64 * libm::log(s / kappa as f64) - c0 * m
}

/// Names of the invariants checked by [`check_invariants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    /// `W` edges plus one traversal per odd edge equal the edges of `P`.
    Conservation,
    /// `Σ len(W_i) = 2s − 2l`.
    Length,
    /// Every `W_i` is even in Cases A and B.
    Evenness,
    /// Origins are distinct, and those of `W_i, i ≥ 1` are reached at marked
    /// instants of `P′` (paths with all multiplicities ≥ 2).
    OriginsMarked,
    /// `c ≤ J ≤ 2l`.
    CycleCount,
    /// Cycles use exactly the odd edges and every vertex has even degree in them.
    EvenDegree,
    /// `P′` has at least `c` self-intersections (paths with all multiplicities ≥ 2).
    SelfIntersections,
    /// Second gluing yields even walks of total length `2s − 2l − 2I₁`.
    SecondGluing,
    /// `κ` agrees with its instant-by-instant recount.
    Kappa,
    /// The gluing loop failed.
    Structure,
}

impl Invariant {
    pub const ALL: [Invariant; 10] = [
        Invariant::Conservation,
        Invariant::Length,
        Invariant::Evenness,
        Invariant::OriginsMarked,
        Invariant::CycleCount,
        Invariant::EvenDegree,
        Invariant::SelfIntersections,
        Invariant::SecondGluing,
        Invariant::Kappa,
        Invariant::Structure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Invariant::Conservation => "edge-multiset-conservation",
            Invariant::Length => "length-bookkeeping",
            Invariant::Evenness => "case-ab-evenness",
            Invariant::OriginsMarked => "origins-are-marked",
            Invariant::CycleCount => "c<=J<=2l",
            Invariant::EvenDegree => "even-degree-odd-multigraph",
            Invariant::SelfIntersections => "self-intersections>=c",
            Invariant::SecondGluing => "second-gluing",
            Invariant::Kappa => "kappa-identity",
            Invariant::Structure => "gluing-structure",
        }
    }
}

/// Shape of one path under gluing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GluingSummary {
    pub l: usize,
    pub j: usize,
    pub i: usize,
    pub c: usize,
    pub case: GluingCase,
}

/// Result of running every invariant on one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub summary: Option<GluingSummary>,
    pub violations: Vec<Invariant>,
    /// Whether the path has nonzero weight (all multiplicities ≥ 2); the
    /// marked-origin and self-intersection claims are checked only then.
    pub contributing: bool,
    /// Some origin of `W_i, i ≥ 1` is not a marked vertex of `P′` (reported
    /// for every path, a violation only when `contributing`).
    pub unmarked_origin: bool,
}

/// Runs the gluing invariants on `p`.
pub fn check_invariants(p: &ClosedPath) -> InvariantReport {
    let counts = paths::edge_multiplicities(p);
    let contributing = counts.iter().all(|(_, k)| k >= 2);
    let mut violations = Vec::new();
    let glued = match glue(p) {
        Ok(g) => g,
        Err(_) => {
            return InvariantReport {
                summary: None,
                violations: vec![Invariant::Structure],
                contributing,
                unmarked_origin: false,
            };
        }
    };
    let cycles = match cycle_decomposition(p) {
        Ok(c) => c,
        Err(_) => {
            return InvariantReport {
                summary: None,
                violations: vec![Invariant::Structure],
                contributing,
                unmarked_origin: false,
            };
        }
    };
    let odd: Vec<Edge> = counts.odd_edges().collect();
    let l = odd.len() / 2;

    let mut restored = glued.edge_multiplicities();
    for e in &odd {
        restored.add(*e, 1);
    }
    if restored != counts {
        violations.push(Invariant::Conservation);
    }
    if glued.total_length != p.len() - 2 * l || glued.l != l {
        violations.push(Invariant::Length);
    }
    if matches!(glued.case, GluingCase::A | GluingCase::B) && !glued.w_paths.iter().all(ClosedWalk::is_even) {
        violations.push(Invariant::Evenness);
    }
    if glued.case == GluingCase::A && glued.i() != 1 {
        violations.push(Invariant::Evenness);
    }

    let steps = glued.concatenated_steps();
    let marks = step_marks(&steps);
    let marked_vertices: BTreeSet<u32> = steps
        .iter()
        .zip(&marks)
        .filter(|(_, m)| **m)
        .map(|(s, _)| s.1)
        .collect();
    let distinct: BTreeSet<u32> = glued.origins.iter().copied().collect();
    if distinct.len() != glued.origins.len() || glued.origins[0] != p.origin() {
        violations.push(Invariant::OriginsMarked);
    }
    // the restart vertex is reached through odd edges of multiplicity at least 3,
    // which survive in P′; with a multiplicity-1 odd edge it may be absent
    let unmarked_origin = glued.origins.iter().skip(1).any(|o| !marked_vertices.contains(o));
    if contributing && unmarked_origin {
        violations.push(Invariant::OriginsMarked);
    }

    let c = cycles.c();
    if l > 0 && !(c <= glued.j && glued.j <= 2 * l) || (l == 0 && c != 0) {
        violations.push(Invariant::CycleCount);
    }
    let cycle_edges = cycles.edge_multiplicities();
    let mut odd_set = EdgeCount::default();
    for e in &odd {
        odd_set.add(*e, 1);
    }
    let closed = cycles.cycles.iter().all(|cyc| cyc.first() == cyc.last());
    if cycle_edges != odd_set || !closed || !even_degrees(&odd) {
        violations.push(Invariant::EvenDegree);
    }

    let stats = statistics_of_steps(p.origin(), &steps);
    if contributing && stats.self_intersections() < c {
        violations.push(Invariant::SelfIntersections);
    }
    if kappa_by_instants(p.origin(), &steps, stats.r) != stats.kappa {
        violations.push(Invariant::Kappa);
    }

    if glued.case == GluingCase::C {
        match second_gluing(&glued.w_paths) {
            Ok((d, merges)) => {
                let total: usize = d.iter().map(ClosedWalk::len).sum();
                if !d.iter().all(ClosedWalk::is_even) || total + 2 * merges != glued.total_length {
                    violations.push(Invariant::SecondGluing);
                }
            }
            Err(_) => violations.push(Invariant::SecondGluing),
        }
    }

    violations.sort();
    violations.dedup();
    InvariantReport {
        summary: Some(GluingSummary { l, j: glued.j, i: glued.i(), c, case: glued.case }),
        violations,
        contributing,
        unmarked_origin,
    }
}

fn even_degrees(edges: &[Edge]) -> bool {
    let mut degree: BTreeMap<u32, usize> = BTreeMap::new();
    for e in edges {
        *degree.entry(e.0).or_insert(0) += 1;
        *degree.entry(e.1).or_insert(0) += 1;
    }
    degree.values().all(|d| d % 2 == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(v: &[u32], n: u32) -> ClosedPath {
        ClosedPath::new(v.to_vec(), n).unwrap()
    }

    fn walk(v: &[u32]) -> ClosedWalk {
        ClosedWalk::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_run_fixture() {
        // loop {1,1} ×3 then {1,2} ×2 and loop {2,2} ×1: runs at instants 3 and 5
        let p = path(&[1, 1, 1, 1, 2, 2, 1], 2);
        let odd = odd_interval_decomposition(&p).unwrap();
        assert_eq!(odd.intervals, vec![(3, 3), (5, 5)]);
        assert_eq!(odd.endpoints, vec![(1, 1), (2, 2)]);
        assert_eq!((odd.j, odd.l), (2, 1));

        // loops separated by a return step stay separate runs
        let q = path(&[1, 2, 2, 3, 3, 2, 1], 3);
        let odd = odd_interval_decomposition(&q).unwrap();
        assert_eq!(odd.intervals, vec![(2, 2), (4, 4)]);
        assert_eq!((odd.j, odd.l), (2, 1));

        // {1,2} ×3 then the triangle 2 → 2 → 3 → 1 closes one run of four
        let q = path(&[1, 2, 1, 2, 2, 3, 1], 3);
        let odd = odd_interval_decomposition(&q).unwrap();
        assert_eq!(odd.intervals, vec![(3, 6)]);
        assert_eq!((odd.j, odd.l), (1, 2));
        assert_eq!(odd.endpoints, vec![(1, 1)]);
    }

    #[test]
    fn even_paths_are_case_a() {
        let p = path(&[1, 2, 1, 3, 1], 3);
        assert_eq!(odd_interval_decomposition(&p), Err(GluingError::EvenPath));
        let g = glue(&p).unwrap();
        assert_eq!(g.case, GluingCase::A);
        assert_eq!(g.w_paths, vec![p.as_walk().clone()]);
        assert_eq!(cycle_decomposition(&p).unwrap().c(), 0);
    }

    #[test]
    fn glue_fixture() {
        let p = path(&[1, 1, 1, 1, 2, 2, 1], 2);
        let g = glue(&p).unwrap();
        assert_eq!(g.total_length, 4);
        assert_eq!(g.case, GluingCase::A);
        assert_eq!(g.w_paths[0].vertices(), &[1, 1, 1, 2, 1]);
        let cyc = cycle_decomposition(&p).unwrap();
        assert_eq!(cyc.c(), 2);
        assert_eq!(cyc.sizes.get(&1), Some(&2));
    }

    #[test]
    fn two_cycle_of_parallel_loops() {
        // odd edges {1,2} ×3 and loops: build a 4-cycle 1-2-3-4 traversed three times
        let base = [1u32, 2, 3, 4];
        let mut v: Vec<u32> = Vec::new();
        for _ in 0..3 {
            v.extend_from_slice(&base);
        }
        v.push(1);
        // length 12 with four edges each ×3; all four odd
        let p = path(&v, 4);
        let cyc = cycle_decomposition(&p).unwrap();
        assert_eq!(cyc.c(), 1);
        assert_eq!(cyc.sizes.get(&4), Some(&1));
        let report = check_invariants(&p);
        assert!(report.violations.is_empty(), "{report:?}");
    }

    #[test]
    fn second_gluing_opposite_and_same_direction() {
        let (d, merges) = second_gluing(&[walk(&[1, 2, 1]), walk(&[2, 3, 2])]).unwrap();
        assert_eq!((d.len(), merges), (2, 0));

        // triangles sharing {1,2}: opposite directions
        let u = walk(&[1, 2, 3, 1]);
        let w = walk(&[2, 1, 3, 2]);
        let (d, merges) = second_gluing(&[u.clone(), w]).unwrap();
        assert_eq!(merges, 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].len(), 4);
        assert!(d[0].is_even());
        assert_eq!(d[0].vertices(), &[1, 3, 2, 3, 1]);

        // same direction
        let w = walk(&[1, 2, 3, 1]);
        let (d, merges) = second_gluing(&[u, w]).unwrap();
        assert_eq!(merges, 1);
        assert_eq!(d[0].len(), 4);
        assert!(d[0].is_even());
        assert_eq!(d[0].vertices(), &[1, 3, 2, 3, 1]);

        assert!(matches!(second_gluing(&[walk(&[1, 2, 3, 1])]), Err(GluingError::OddUnion(_))));
    }

    #[test]
    fn second_gluing_with_loops() {
        let (d, merges) = second_gluing(&[walk(&[1, 1, 2, 1]), walk(&[1, 1])]).unwrap();
        assert_eq!(merges, 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].vertices(), &[1, 2, 1]);
    }

    #[test]
    fn statistics_examples() {
        let star = path(&[1, 2, 1, 3, 1], 3);
        let st = path_statistics(&star);
        assert_eq!(st.nu[&1], 2);
        assert_eq!(st.m[&1], 2);
        assert_eq!(st.nu_max, 2);
        assert!(st.n_k.is_empty());
        assert_eq!(st.kappa, st.r);
        assert_eq!(st.r, 0);

        // 1→2→3→1 twice: vertex 1 arrived at time 0 and at instant 3
        let tri = path(&[1, 2, 3, 1, 2, 3, 1], 3);
        let st = path_statistics(&tri);
        assert_eq!(st.n_k.get(&2), Some(&1));
    }

    #[test]
    fn gluing_counts() {
        let p = path(&[1, 1, 1, 1, 2, 2, 1], 2);
        // ends: vertex 1 carries e_1, f_1 and both path ends; vertex 2 carries e_2, f_2
        let c = count_gluings(&p).unwrap();
        assert_eq!(c.gluings, 3);
        assert_eq!(c.endpoint_classes.get(&1), Some(&2));
        // a loop run away from the origin leaves no choice
        let q = path(&[1, 2, 2, 3, 3, 2, 1], 3);
        assert_eq!(count_gluings(&q).unwrap().gluings, 1);
        assert!(count_gluings(&path(&[1, 2, 1], 2)).is_err());
    }

    #[test]
    fn insertion_bound_arithmetic() {
        assert!((case_a_insertion_bound(2, 1, 1).unwrap() - 64.0).abs() < 1e-9);
        assert!((case_a_insertion_bound(2, 1, 2).unwrap() - 48.0).abs() < 1e-9);
        assert!(case_a_insertion_bound(2, 1, 3).is_err());
        assert!(case_a_insertion_bound(1, 2, 1).is_err());
    }

    #[test]
    fn insertion_fiber_trivial_case() {
        let p = path(&[1, 1, 1, 2, 2, 2, 1], 2);
        assert_eq!(insertion_enumerate(&p, 0).unwrap(), vec![p.clone()]);
        // a single distinct edge cannot host two odd edges
        let q = path(&[1, 2, 1, 2, 1], 2);
        assert_eq!(insertion_enumerate(&q, 1).unwrap(), vec![q.clone()]);
        let fiber = insertion_enumerate(&p, 1).unwrap();
        assert!(fiber.len() > 1);
        assert!(fiber.contains(&path(&[1, 1, 1, 1, 2, 2, 2, 2, 1], 2)));
        for x in fiber.iter().filter(|x| *x != &p) {
            let g = glue(x).unwrap();
            assert_eq!(g.l, 1);
            let mut restored = g.edge_multiplicities();
            for e in paths::edge_multiplicities(x).odd_edges() {
                restored.add(e, 1);
            }
            assert_eq!(restored, paths::edge_multiplicities(x));
        }
        assert!(insertion_enumerate(&path(&[1, 2, 3, 1, 1], 3), 1).is_err());
    }

    #[test]
    fn refined_term_examples() {
        let t = refined_insertion_term(10.0, 1, 1, 1, 3.0).unwrap();
        assert!((t - 100.0 * 9.0).abs() < 1e-9);
        assert!(refined_insertion_term(10.0, 1, 3, 1, 3.0).is_err());
        let a = ln_refined_insertion_bound(10.0, 2, 1.5);
        let b = ln_refined_insertion_bound(20.0, 2, 1.5);
        assert!(b > a);
    }

    #[test]
    fn contribution_bounds() {
        assert!(case_a_contribution_bound(1, 100.0, 1.0, 1.0, 1.0).terms.is_empty());
        let sweep = case_a_contribution_bound(3, 100.0, 1.0, 1.0, 1.0);
        // l = 1: 100·T_{0,4}·(16·2/10)² = 100·2·10.24
        let (l, t) = sweep.terms[0];
        assert_eq!(l, 1);
        assert!((libm::exp(t) - 2048.0).abs() < 1e-9);
        assert!(case_b_contribution_bound(1, 100.0, 1.0, 1.0, 1.0, 2.0).terms.is_empty());
        let c = case_c_reduction_bound(10, 1000.0, 1, 3, 0, 1.0, 1.0).unwrap();
        assert_eq!(c.trivial_ratio(), 1.0);
        assert_eq!(c.refined_ratio(), 1.0);
    }
}
