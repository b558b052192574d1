//! Gluing verification suites over exhaustive and random path families.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use tml_core::gluing::{
    self, check_invariants, count_gluings, glue, second_gluing, GluingCase, GluingError, GluingSummary, Invariant,
    GLUING_COUNT_CONSTANT,
};
use tml_core::paths::{self, ClosedPath, ClosedWalk, PathError};

/// Paths handed to the thread pool at a time; batches are reduced in order.
const BATCH: usize = 4096;

/// Outcome of one invariant check over a path family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRow {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Name of the gluing-count check in [`SuiteReport::checks`].
pub const GLUING_COUNT_CHECK: &str = "gluing-count-lower-bound";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub paths: usize,
    pub contributing: usize,
    pub odd: usize,
    pub case_c: usize,
    pub violations: BTreeMap<Invariant, usize>,
    /// Odd paths whose gluing count falls below `GLUING_COUNT_CONSTANT·Π(i!)^{E_i}`.
    pub count_violations: usize,
    /// Smallest observed `gluings / Π(i!)^{E_i}` over odd paths.
    pub min_count_ratio: Option<f64>,
    /// Zero-weight paths with an unmarked restart origin (not violations).
    pub unmarked_origin_zero_weight: usize,
    pub histogram: BTreeMap<GluingSummary, usize>,
    /// Up to ten failing paths with the invariants they broke.
    pub failures: Vec<(ClosedPath, Vec<&'static str>)>,
}

impl SuiteReport {
    fn single(p: &ClosedPath) -> Self {
        let report = check_invariants(p);
        let mut out = SuiteReport { paths: 1, ..Default::default() };
        out.contributing = report.contributing as usize;
        if let Some(summary) = report.summary {
            out.histogram.insert(summary, 1);
            out.odd = (summary.l > 0) as usize;
            out.case_c = (summary.case == GluingCase::C) as usize;
        }
        if !report.contributing && report.unmarked_origin {
            out.unmarked_origin_zero_weight = 1;
        }
        let mut failed: Vec<&'static str> = report.violations.iter().map(|v| v.name()).collect();
        for v in report.violations {
            out.violations.insert(v, 1);
        }
        if out.odd == 1 {
            match count_gluings(p) {
                Ok(count) => {
                    let ratio = count.gluings as f64 / count.factorial_product();
                    out.min_count_ratio = Some(ratio);
                    if ratio < GLUING_COUNT_CONSTANT {
                        out.count_violations = 1;
                        failed.push(GLUING_COUNT_CHECK);
                    }
                }
                Err(_) => {
                    out.count_violations = 1;
                    failed.push(GLUING_COUNT_CHECK);
                }
            }
        }
        if !failed.is_empty() {
            out.failures.push((p.clone(), failed));
        }
        out
    }

    /// Appends `other`, which must describe paths that come after `self`.
    pub fn merge(mut self, other: SuiteReport) -> Self {
        self.paths += other.paths;
        self.contributing += other.contributing;
        self.odd += other.odd;
        self.case_c += other.case_c;
        self.count_violations += other.count_violations;
        self.unmarked_origin_zero_weight += other.unmarked_origin_zero_weight;
        self.min_count_ratio = match (self.min_count_ratio, other.min_count_ratio) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        for (k, v) in other.violations {
            *self.violations.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_insert(0) += v;
        }
        let room = 10usize.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        self
    }

    pub fn violation_count(&self, inv: Invariant) -> usize {
        self.violations.get(&inv).copied().unwrap_or(0)
    }

    /// One row per invariant plus the gluing-count check. The marked-origin and
    /// self-intersection checks apply to contributing paths, the second-gluing
    /// check to Case C paths, the count check to paths with odd edges.
    pub fn checks(&self) -> Vec<CheckRow> {
        let mut rows: Vec<CheckRow> = Invariant::ALL
            .iter()
            .map(|&inv| {
                let checked = match inv {
                    Invariant::OriginsMarked | Invariant::SelfIntersections => self.contributing,
                    Invariant::SecondGluing => self.case_c,
                    _ => self.paths,
                };
                CheckRow { name: inv.name(), checked, violations: self.violation_count(inv) }
            })
            .collect();
        rows.push(CheckRow { name: GLUING_COUNT_CHECK, checked: self.odd, violations: self.count_violations });
        rows
    }

    pub fn passed(&self) -> bool {
        self.violations.values().all(|&v| v == 0) && self.count_violations == 0
    }
}

/// Checks every path of `family`, in parallel batches, reducing in input order.
pub fn run_suite<I: IntoIterator<Item = ClosedPath>>(family: I) -> SuiteReport {
    let mut iter = family.into_iter();
    let mut report = SuiteReport::default();
    loop {
        let batch: Vec<ClosedPath> = iter.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return report;
        }
        let parts: Vec<SuiteReport> = batch.par_iter().map(SuiteReport::single).collect();
        report = parts.into_iter().fold(report, SuiteReport::merge);
    }
}

/// Every closed sequence of length `2s` on `n` vertices.
pub fn exhaustive_gluing_suite(n: u32, s: usize) -> Result<SuiteReport, PathError> {
    Ok(run_suite(paths::closed_sequences(n, s)?))
}

/// Path `index` of a random family. With `revisit = Some(p)` the walk re-uses
/// an incident edge with probability `p` at each step.
pub fn random_family_path(n: u32, s: usize, seed: u64, index: u64, revisit: Option<f64>) -> ClosedPath {
    let mut rng = ChaCha8Rng::seed_from_u64(tml_core::trial_seed(seed, index));
    match revisit {
        Some(p) => paths::sticky_random_path(n, s, p, &mut rng),
        None => paths::random_path(n, s, &mut rng),
    }
}

pub fn random_gluing_suite(n: u32, s: usize, count: usize, seed: u64, revisit: Option<f64>) -> SuiteReport {
    run_suite((0..count as u64).map(|k| random_family_path(n, s, seed, k, revisit)))
}

/// Maximum fiber size and bound at one `(m, l, J)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionRow {
    pub m: u64,
    pub l: u64,
    pub j: u64,
    pub even_paths: usize,
    pub max_fiber: usize,
    pub bound: f64,
    pub violations: usize,
}

/// For every even path `p′` of length `≤ max_len` on `n ≤ n_max` vertices,
/// groups the insertion fiber (with `l ≤ m`, `2m = len p′`) by `(l, J)` and
/// compares each group size with the Case A insertion bound.
pub fn insertion_dominance(n_max: u32, max_len: usize) -> Result<Vec<InsertionRow>, GluingError> {
    let mut evens = Vec::new();
    for n in 1..=n_max {
        for s in 1..=max_len / 2 {
            let family = paths::closed_sequences(n, s).map_err(|_| GluingError::TooLarge("closed sequences"))?;
            evens.extend(family.filter(paths::is_even_path));
        }
    }
    let per_path: Vec<BTreeMap<(u64, u64), usize>> = evens
        .par_iter()
        .map(|p| {
            let fiber = gluing::insertion_enumerate(p, p.s())?;
            let mut groups = BTreeMap::new();
            for q in fiber.iter().filter(|q| **q != *p) {
                let odd = gluing::odd_interval_decomposition(q)?;
                *groups.entry((odd.l as u64, odd.j as u64)).or_insert(0) += 1;
            }
            Ok(groups)
        })
        .collect::<Result<_, GluingError>>()?;
    let mut table: BTreeMap<(u64, u64, u64), InsertionRow> = BTreeMap::new();
    for (p, groups) in evens.iter().zip(per_path) {
        let m = p.s() as u64;
        for ((l, j), size) in groups {
            let bound = gluing::case_a_insertion_bound(m, l, j)?;
            let row = table.entry((m, l, j)).or_insert(InsertionRow {
                m,
                l,
                j,
                even_paths: 0,
                max_fiber: 0,
                bound,
                violations: 0,
            });
            row.even_paths += 1;
            row.max_fiber = row.max_fiber.max(size);
            row.violations += (size as f64 > bound) as usize;
        }
    }
    Ok(table.into_values().collect())
}

/// Named families of closed walks with an even union and odd members.
pub fn second_gluing_fixtures() -> Vec<(String, Vec<ClosedWalk>)> {
    let walk = |v: &[u32]| ClosedWalk::new(v.to_vec()).expect("fixture walks are closed");
    let mut out = vec![
        ("triangle-opposite".to_string(), vec![walk(&[1, 2, 3, 1]), walk(&[1, 3, 2, 1])]),
        ("triangle-same".to_string(), vec![walk(&[1, 2, 3, 1]), walk(&[2, 3, 1, 2])]),
        ("three-walks".to_string(), vec![walk(&[1, 2, 3, 1]), walk(&[2, 1, 4, 2]), walk(&[2, 3, 1, 4, 2])]),
        (
            "square-and-diagonals".to_string(),
            vec![walk(&[1, 2, 3, 4, 1]), walk(&[1, 2, 4, 1]), walk(&[2, 3, 4, 2])],
        ),
    ];
    // Case C decompositions produced by the first gluing
    for text in ["3,2,1,1,2,1,1,1,3", "1,2,3,1,1,3,2,1,1", "2,1,3,2,2,3,1,2,2"] {
        let p = ClosedPath::parse(text, 4).expect("fixture path");
        if let Ok(g) = glue(&p) {
            if g.case == GluingCase::C {
                out.push((format!("glued:{text}"), g.w_paths));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecondGluingRow {
    pub name: String,
    pub input_length: usize,
    pub output_length: usize,
    pub merges: usize,
    pub outputs: usize,
    pub all_even: bool,
}

impl SecondGluingRow {
    /// Even outputs, `Σ len D_j = Σ len W_i − 2I₁`, at least one merge.
    pub fn passed(&self) -> bool {
        self.all_even && self.output_length + 2 * self.merges == self.input_length && self.merges >= 1
    }
}

pub fn second_gluing_suite(fixtures: &[(String, Vec<ClosedWalk>)]) -> Result<Vec<SecondGluingRow>, GluingError> {
    fixtures
        .iter()
        .map(|(name, walks)| {
            let (d, merges) = second_gluing(walks)?;
            Ok(SecondGluingRow {
                name: name.clone(),
                input_length: walks.iter().map(ClosedWalk::len).sum(),
                output_length: d.iter().map(ClosedWalk::len).sum(),
                merges,
                outputs: d.len(),
                all_even: d.iter().all(ClosedWalk::is_even),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_small_suite_passes() {
        let r = exhaustive_gluing_suite(3, 2).unwrap();
        assert_eq!(r.paths, 81);
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.histogram.values().sum::<usize>(), 81);
        assert_eq!(r.checks().len(), Invariant::ALL.len() + 1);
    }

    #[test]
    fn batches_do_not_change_the_result() {
        let family: Vec<ClosedPath> = (0..5000).map(|k| random_family_path(5, 4, 3, k, Some(0.5))).collect();
        let whole = run_suite(family.clone());
        let split = run_suite(family[..2500].to_vec()).merge(run_suite(family[2500..].to_vec()));
        assert_eq!(whole, split);
    }

    #[test]
    fn fixtures_are_case_c_shaped() {
        let fixtures = second_gluing_fixtures();
        assert!(fixtures.len() >= 5);
        for row in second_gluing_suite(&fixtures).unwrap() {
            assert!(row.passed(), "{row:?}");
        }
    }

    #[test]
    fn insertion_dominance_tiny() {
        let rows = insertion_dominance(2, 4).unwrap();
        assert!(rows.iter().all(|r| r.violations == 0));
    }
}
