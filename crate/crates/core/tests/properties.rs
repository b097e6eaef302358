use ergolab::blockseq::PerturbedBlockSequence;
use ergolab::levelset::{compute_level_set, decompose_level_set};
use ergolab::numerics::MonotoneFunction;
use ergolab::rotation::{CircleArc, CirclePoint, RotationSystem};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn level_sets_shrink_as_lambda_grows(n in 1u64..20, l1 in 1.05f64..10.0, step in 0.0f64..5.0) {
        let sys = RotationSystem::golden();
        let f = MonotoneFunction::power(0.5);
        let seq: Vec<u64> = (1..=n).collect();
        let a = compute_level_set(&sys, &f, &seq, l1, 4096).unwrap();
        let b = compute_level_set(&sys, &f, &seq, l1 + step, 4096).unwrap();
        prop_assert!(b.outer_measure <= a.outer_measure + 1e-12);
        prop_assert!(a.inner_measure <= a.outer_measure);
    }

    #[test]
    fn decomposition_pieces_are_disjoint_subsets(n in 1u64..8, lambda in 1.1f64..8.0) {
        let sys = RotationSystem::sqrt2();
        let f = MonotoneFunction::power(0.5);
        let seq: Vec<u64> = (1..=n).collect();
        let d = decompose_level_set(&sys, &f, &seq, lambda, 8192).unwrap();
        prop_assert!(d.disjoint);
        prop_assert!(d.union_measure <= d.levelset_outer + 1e-12);
    }

    #[test]
    fn block_sequence_text_round_trips(sizes in prop::collection::vec((1u64..50, 0u64..6), 1..6), start in 1u64..100) {
        let l: Vec<u64> = sizes.iter().map(|p| p.0).collect();
        let d: Vec<u64> = sizes.iter().map(|p| p.1).collect();
        let seq = PerturbedBlockSequence::from_sizes(&l, &d, start).unwrap();
        let back: PerturbedBlockSequence = seq.to_string().parse().unwrap();
        prop_assert_eq!(&back, &seq);
        let elems: Vec<u64> = seq.iter().map(|(n, _)| n).collect();
        prop_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(elems.len() as u64, seq.total_len());
    }

    #[test]
    fn arcs_translate_without_changing_measure(start: u128, len in 1u128.., shift: u128) {
        let arc = CircleArc::new(CirclePoint(start), len);
        let moved = arc.translate(CirclePoint(shift));
        prop_assert_eq!(moved.measure(), arc.measure());
        prop_assert!(moved.contains(CirclePoint(start.wrapping_add(shift))));
    }
}
