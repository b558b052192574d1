use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tml_core::dyck::{self, DyckPath};
use tml_core::ensemble::{sample_symmetric_matrix, EntryDistribution};
use tml_core::gluing::{self, GluingCase};
use tml_core::paths::{self, ClosedPath};
use tml_core::spectral;

fn closed_path() -> impl Strategy<Value = ClosedPath> {
    (1u32..=5, 1usize..=6).prop_flat_map(|(n, s)| {
        prop::collection::vec(1..=n, 2 * s).prop_map(move |mut v| {
            v.push(v[0]);
            ClosedPath::new(v, n).unwrap()
        })
    })
}

fn sticky_path() -> impl Strategy<Value = ClosedPath> {
    (2u32..=8, 2usize..=10, any::<u64>(), 0.3f64..0.9).prop_map(|(n, s, seed, p)| {
        paths::sticky_random_path(n, s, p, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

fn dyck_path() -> impl Strategy<Value = DyckPath> {
    (0usize..=40, any::<u64>()).prop_map(|(s, seed)| dyck::sample_dyck(s, seed))
}

proptest! {
    #[test]
    fn gluing_invariants_hold(p in closed_path()) {
        let report = gluing::check_invariants(&p);
        prop_assert!(report.violations.is_empty(), "{:?}: {:?}", p.vertices(), report.violations);
    }

    #[test]
    fn gluing_invariants_hold_on_repetitive_paths(p in sticky_path()) {
        let report = gluing::check_invariants(&p);
        prop_assert!(report.violations.is_empty(), "{:?}: {:?}", p.vertices(), report.violations);
    }

    #[test]
    fn glued_walks_conserve_edges(p in sticky_path()) {
        let g = gluing::glue(&p).unwrap();
        let mut restored = g.edge_multiplicities();
        for e in paths::edge_multiplicities(&p).odd_edges() {
            restored.add(e, 1);
        }
        prop_assert_eq!(restored, paths::edge_multiplicities(&p));
        let total: usize = g.w_paths.iter().map(|w| w.len()).sum();
        prop_assert_eq!(total, p.len() - 2 * g.l);
        if g.case != GluingCase::C {
            prop_assert!(g.w_paths.iter().all(|w| w.is_even()));
        }
    }

    #[test]
    fn second_gluing_yields_even_walks(p in sticky_path()) {
        let g = gluing::glue(&p).unwrap();
        if g.case == GluingCase::C {
            let (d, merges) = gluing::second_gluing(&g.w_paths).unwrap();
            prop_assert!(d.iter().all(|w| w.is_even()));
            let total: usize = d.iter().map(|w| w.len()).sum();
            prop_assert_eq!(total + 2 * merges, g.total_length);
        }
    }

    #[test]
    fn lift_is_even(p in closed_path()) {
        let q = paths::fk_lift(&p);
        prop_assert!(paths::is_even_path(&q));
        prop_assert_eq!(q.len(), p.len() + paths::nonreturned_edges(&p).len());
    }

    #[test]
    fn sampled_dyck_paths_are_valid(s in 0usize..=60, seed in any::<u64>()) {
        let x = dyck::sample_dyck(s, seed);
        prop_assert_eq!(x.s(), s);
        prop_assert!(DyckPath::new(x.steps().to_vec()).is_ok());
        prop_assert!(x.levels().iter().all(|&l| l as usize <= s));
    }

    #[test]
    fn window_split_gives_two_dyck_paths(x in dyck_path(), pick in any::<prop::sample::Index>()) {
        let t1 = pick.index(x.len() + 1);
        let r = dyck::descent_window(&x, t1).unwrap();
        let (y, z) = dyck::split_at_window(&x, t1).unwrap();
        prop_assert_eq!(y.len(), r);
        prop_assert_eq!(z.len(), x.len() - r);
    }

    #[test]
    fn k_functional_routes_agree(x in dyck_path()) {
        prop_assert_eq!(dyck::k_functional(&x), dyck::k_functional_double_sum(&x));
        let windows = dyck::descent_windows(&x);
        for t in (0..=x.len()).step_by(3) {
            prop_assert_eq!(windows[t], dyck::descent_window(&x, t).unwrap());
        }
    }

    #[test]
    fn tensor_dp_matches_tuples(s in 0usize..=6, seed in any::<u64>(), i in 0usize..=3) {
        let x = dyck::sample_dyck(s, seed);
        prop_assert_eq!(dyck::k_functional_tensor(&x, i).unwrap(), dyck::k_functional_tensor_brute(&x, i));
    }

    #[test]
    fn trace_routes_agree(n in 1usize..=12, s in 1usize..=4, seed in any::<u64>()) {
        let m = sample_symmetric_matrix(&EntryDistribution::skew12(), n, seed);
        let a = spectral::trace_power(&m, s, true).unwrap();
        let b = spectral::trace_power_by_eigenvalues(&m, s, true).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn kappa_recount_matches(p in sticky_path()) {
        let g = gluing::glue(&p).unwrap();
        let steps = g.concatenated_steps();
        let stats = gluing::statistics_of_steps(p.origin(), &steps);
        prop_assert_eq!(gluing::kappa_by_instants(p.origin(), &steps, stats.r), stats.kappa);
    }
}

#[test]
fn enumeration_is_lexicographic() {
    for s in 0..=8 {
        let all: Vec<DyckPath> = dyck::enumerate_dyck(s).unwrap().collect();
        assert_eq!(all.len() as u128, dyck::catalan_u128(s).unwrap());
        // `+` sorts before `−`
        assert!(all.windows(2).all(|w| w[0].steps() > w[1].steps()), "s = {s}");
    }
}

#[test]
fn split_identity_exhaustive() {
    for s in 0..=6 {
        for x in dyck::enumerate_dyck(s).unwrap() {
            for t1 in 0..=x.len() {
                let (y, z) = dyck::split_at_window(&x, t1).unwrap();
                assert_eq!(y.len() + z.len(), x.len());
            }
        }
    }
}

#[test]
fn k_routes_exhaustive() {
    for s in 0..=8 {
        for x in dyck::enumerate_dyck(s).unwrap() {
            assert_eq!(dyck::k_functional(&x), dyck::k_functional_double_sum(&x));
        }
    }
    for s in 0..=5 {
        for x in dyck::enumerate_dyck(s).unwrap() {
            for i in 0..=3 {
                assert_eq!(dyck::k_functional_tensor(&x, i).unwrap(), dyck::k_functional_tensor_brute(&x, i));
            }
        }
    }
}
