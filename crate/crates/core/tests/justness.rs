//! The occurrence-counting justness test against the literal definition.

use justcheck::checker::random::{random_lasso, random_model};
use justcheck::checker::{check_liveness, is_just_lasso, is_just_lasso_by_definition, Property, Witness};
use justcheck::interference::{check_thread_consistency, BlockableSet, ConcurrencyMode};
use justcheck::lts::Limits;
use justcheck::registers::RegisterKind;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [RegisterKind; 3] = [RegisterKind::Safe, RegisterKind::Regular, RegisterKind::Atomic];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_matches_definition(seed in 0u64..10_000, kind in 0usize..3, walk in any::<u64>()) {
        let m = random_model(seed, KINDS[kind], 120).unwrap();
        prop_assume!(check_thread_consistency(m.lts()).is_none());
        let b = BlockableSet::noncrit(m.lts().alphabet());
        let mut rng = ChaCha8Rng::seed_from_u64(walk);
        for _ in 0..4 {
            let l = random_lasso(&m, &mut rng);
            for mode in ConcurrencyMode::ALL {
                prop_assert_eq!(
                    is_just_lasso(&m, &l, mode, &b).unwrap(),
                    is_just_lasso_by_definition(&m, &l, mode, &b).unwrap(),
                    "mode {}", mode
                );
            }
        }
    }
}

#[test]
fn both_verdicts_occur_over_many_lassos() {
    // Random walks mostly produce unjust lassos; checker witnesses supply
    // just ones. Both feed the same comparison.
    let (mut just, mut unjust, mut total) = (0, 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..40 {
        let m = random_model(seed, KINDS[seed as usize % 3], 120).unwrap();
        let b = BlockableSet::noncrit(m.lts().alphabet());
        let mut lassos: Vec<_> = (0..6).map(|_| random_lasso(&m, &mut rng)).collect();
        for mode in ConcurrencyMode::ALL {
            let v = check_liveness(&m, Property::StarvationFreedom, mode, &b, &Limits::default()).unwrap();
            if let Some(Witness::Liveness(w)) = v.witness {
                lassos.push(w.lasso);
            }
        }
        for l in &lassos {
            for mode in ConcurrencyMode::ALL {
                let fast = is_just_lasso(&m, l, mode, &b).unwrap();
                assert_eq!(fast, is_just_lasso_by_definition(&m, l, mode, &b).unwrap(), "seed {seed} mode {mode}");
                total += 1;
                if fast { just += 1 } else { unjust += 1 }
            }
        }
    }
    assert!(total >= 200 && just > 0 && unjust > 0, "{total} lassos, {just} just, {unjust} unjust");
}
