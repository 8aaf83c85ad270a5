mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{add_to_model, all_assignments, primary_vars, random_constraint, Constraint};
use molgen_core::diagnostics::{find_iis, Iis};
use molgen_core::pb::{enumerate, solve_one, ActiveGroups, PbModel, SolveOutcome, StopReason};

fn random_model(seed: u64, n: usize, count: usize) -> (PbModel, Vec<Constraint>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = PbModel::new();
    let vars = primary_vars(&mut m, n);
    let cs: Vec<Constraint> = (0..count).map(|_| random_constraint(&mut rng, n)).collect();
    for (i, c) in cs.iter().enumerate() {
        add_to_model(&mut m, &vars, c, &format!("g{i}"));
    }
    (m, cs)
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn enumeration_equals_truth_table(seed in any::<u64>(), n in 1usize..=10, count in 1usize..=6) {
        let (m, cs) = random_model(seed, n, count);
        let got = enumerate(&m, usize::MAX, seed, None, &ActiveGroups::all(&m));
        prop_assert_eq!(got.stop, StopReason::Exhausted);
        let set: BTreeSet<Vec<bool>> = got.solutions.iter().cloned().collect();
        prop_assert_eq!(set.len(), got.solutions.len());
        let expected: BTreeSet<Vec<bool>> = all_assignments(n)
            .filter(|a| cs.iter().all(|c| c.holds(a)))
            .collect();
        prop_assert_eq!(set, expected);
    }

    #[test]
    fn returned_assignments_satisfy_everything(seed in any::<u64>(), n in 1usize..=24, count in 1usize..=10) {
        let (m, cs) = random_model(seed, n, count);
        let got = enumerate(&m, 50, seed ^ 0x5eed, None, &ActiveGroups::all(&m));
        for a in &got.solutions {
            prop_assert!(cs.iter().all(|c| c.holds(a)));
        }
    }

    #[test]
    fn same_seed_same_sequence(seed in any::<u64>(), n in 1usize..=16) {
        let (m, _) = random_model(seed, n, 4);
        let all = ActiveGroups::all(&m);
        let a = enumerate(&m, 30, seed, None, &all);
        let b = enumerate(&m, 30, seed, None, &all);
        prop_assert_eq!(a.solutions, b.solutions);
    }

    #[test]
    fn iis_is_sound_and_minimal(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = rng.gen_range(3..=8);
        let (m, _) = random_model(seed, n, count);
        let infeasible = solve_one(&m, 0, None, &ActiveGroups::all(&m)) == SolveOutcome::Unsat;
        if !infeasible {
            return Ok(());
        }
        let Ok(Iis::Groups(groups)) = find_iis(&m) else {
            return Err(TestCaseError::fail("infeasible model not diagnosed"));
        };
        prop_assert!(!groups.is_empty());
        let unsat = |names: &[String]| {
            let active = ActiveGroups::only(&m, names).unwrap();
            solve_one(&m, 0, None, &active) == SolveOutcome::Unsat
        };
        prop_assert!(unsat(&groups));
        for i in 0..groups.len() {
            let mut rest = groups.clone();
            rest.remove(i);
            prop_assert!(!unsat(&rest), "dropping {} keeps it infeasible", groups[i]);
        }
    }
}
