mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_key, random_molecule};
use molgen_core::canon::canonical_form;
use molgen_core::layout::{Bounds, CountRange, FeatureLayout};
use molgen_core::molecule::check_molecule;
use molgen_core::smiles::{graph_to_smiles, parse_smiles};
use molgen_core::validator::validate_pool;

const CNOS: [&str; 4] = ["C", "N", "O", "S"];

fn layout(n: usize) -> FeatureLayout {
    FeatureLayout::with_defaults(&CNOS, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn random_molecules_are_valid(seed in any::<u64>(), n in 2usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_molecule(&mut rng, n, &CNOS);
        let report = check_molecule(&g, &layout(n), &Bounds::none());
        prop_assert!(report.is_valid(), "{:?}", report.violations);
    }

    #[test]
    fn check_molecule_ignores_labels(seed in any::<u64>(), n in 2usize..=10, tamper in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_molecule(&mut rng, n, &CNOS);
        match tamper {
            0 => {}
            1 => g.atoms[0].hydrogens += 1,
            2 => {
                if let Some(b) = g.bonds.first_mut() {
                    b.order = 3;
                }
            }
            _ => g.bonds.clear(),
        }
        let mut bounds = Bounds {
            double_bonds: CountRange::new(None, Some(rng.gen_range(0..3))),
            rings: CountRange::new(None, Some(rng.gen_range(0..2))),
            ..Bounds::none()
        };
        let lb: Vec<Option<i64>> = (0..4).map(|_| Some(rng.gen_range(0..2))).collect();
        bounds.set_atoms(Some(&lb), None, 4).unwrap();
        let verdict = check_molecule(&g, &layout(n), &bounds).is_valid();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted = check_molecule(&g.permuted(&perm), &layout(n), &bounds).is_valid();
        prop_assert_eq!(verdict, permuted);
    }

    #[test]
    fn smiles_round_trip(seed in any::<u64>(), n in 2usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_molecule(&mut rng, n, &CNOS);
        let text = graph_to_smiles(&g);
        let back = parse_smiles(&text, &layout(n)).unwrap();
        prop_assert_eq!(brute_key(&back), brute_key(&g), "{}", text);
    }

    #[test]
    fn smiles_round_trip_large(seed in any::<u64>(), n in 8usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_molecule(&mut rng, n, &CNOS);
        let text = graph_to_smiles(&g);
        let back = parse_smiles(&text, &layout(n)).unwrap();
        prop_assert_eq!(back.len(), g.len());
        prop_assert_eq!(back.bonds.len(), g.bonds.len());
        prop_assert_eq!(canonical_form(&back), canonical_form(&g), "{}", text);
    }

    #[test]
    fn canonical_form_ignores_labels(seed in any::<u64>(), n in 2usize..=25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_molecule(&mut rng, n, &CNOS);
        let key = canonical_form(&g);
        for _ in 0..10 {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            prop_assert_eq!(&canonical_form(&g.permuted(&perm)), &key);
        }
    }

    #[test]
    fn canonical_form_separates_exactly_at_small_n(seed in any::<u64>(), n in 2usize..=5) {
        // a two-letter alphabet makes isomorphic pairs common
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_molecule(&mut rng, n, &["C", "O"]);
        let b = random_molecule(&mut rng, n, &["C", "O"]);
        prop_assert_eq!(
            canonical_form(&a) == canonical_form(&b),
            brute_key(&a) == brute_key(&b)
        );
    }

    #[test]
    fn validate_pool_is_idempotent(seed in any::<u64>(), size in 1usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<_> = (0..size)
            .map(|_| random_molecule(&mut rng, 4, &["C", "O"]))
            .collect();
        let once = validate_pool(&pool, &[]);
        prop_assert_eq!(validate_pool(&once, &[]), once.clone());
        let keys: std::collections::BTreeSet<_> = pool.iter().map(brute_key).collect();
        prop_assert_eq!(once.len(), keys.len());
    }
}
