//! Register semantics checked on random operation schedules.

mod common;

use common::*;
use justcheck::harness::Outcome;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn safe_overlap_is_arbitrary(c in choices(3, 3, 10)) {
        common::safe_overlap_is_arbitrary(&c)?;
    }

    #[test]
    fn regular_reads_return_possible_values(c in choices(3, 1, 12)) {
        common::regular_reads_return_possible_values(&c)?;
    }

    #[test]
    fn atomic_results_are_linearizable(c in choices(3, 3, 11)) {
        common::atomic_results_are_linearizable(&c)?;
    }

    #[test]
    fn results_shrink_along_the_hierarchy(c in choices(3, 2, 10)) {
        common::results_shrink_along_the_hierarchy(&c)?;
    }
}

#[test]
fn regular_finish_reads_respect_posv() {
    assert!(common::regular_finish_reads_respect_posv(2, 3));
    assert!(common::regular_finish_reads_respect_posv(3, 2));
}

#[test]
fn new_old_inversion() {
    let [safe, regular, atomic] = new_old_inversion_outcomes();
    let inversion: Outcome = vec![1, 0];
    assert!(safe.contains(&inversion));
    assert!(regular.contains(&inversion));
    assert!(!atomic.contains(&inversion));
    assert_eq!(atomic, [vec![0, 0], vec![0, 1], vec![1, 1]].into_iter().collect());
}
