use std::sync::Arc;

use polarlab::channel::Classifier;
use polarlab::lab::{polarize_erasure, polarize_tree, TreeOptions};
use polarlab::transform::apply_sequence;
use polarlab::zoo;
use polarlab::{minus, plus, Channel, GroupSpec, SignSequence, TransformOptions};
use proptest::prelude::*;

const GROUPS: &[&[usize]] = &[&[2], &[3], &[4], &[2, 2], &[5], &[6], &[7], &[8], &[2, 4]];

fn group() -> impl Strategy<Value = Arc<GroupSpec>> {
    (0..GROUPS.len()).prop_map(|i| Arc::new(GroupSpec::new(GROUPS[i]).unwrap()))
}

fn channel() -> impl Strategy<Value = Channel> {
    (group(), 1usize..6, any::<u64>()).prop_map(|(g, m, seed)| zoo::random_channel(g, m, seed).unwrap())
}

/// Splits every output into two outputs with the same posterior.
fn split_outputs(w: &Channel) -> Channel {
    let rows: Vec<Vec<f64>> = w
        .rows()
        .into_iter()
        .map(|r| r.iter().flat_map(|&v| [0.25 * v, 0.75 * v]).collect())
        .collect();
    Channel::new(w.group_arc().clone(), &rows, "split").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduction_preserves_all_capacities(w in channel()) {
        let c = Classifier::new(w.group_arc().clone());
        let split = split_outputs(&w);
        let r = split.reduce();
        prop_assert!(r.num_outputs() <= w.num_outputs());
        prop_assert!((r.symmetric_capacity() - w.symmetric_capacity()).abs() < 1e-9);
        for (a, b) in c.quotient_capacities(&r).iter().zip(c.quotient_capacities(&w)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn transforms_conserve_capacity(w in channel()) {
        let total = minus(&w).unwrap().symmetric_capacity() + plus(&w).unwrap().symmetric_capacity();
        prop_assert!((total - 2.0 * w.symmetric_capacity()).abs() < 1e-8);
    }

    #[test]
    fn minus_degrades_and_plus_upgrades(w in channel()) {
        let i = w.symmetric_capacity();
        prop_assert!(minus(&w).unwrap().symmetric_capacity() <= i + 1e-9);
        prop_assert!(plus(&w).unwrap().symmetric_capacity() >= i - 1e-9);
    }

    #[test]
    fn capacity_bounds_and_monotone_in_subgroup(w in channel()) {
        let g = w.group_arc().clone();
        let c = Classifier::new(g.clone());
        let i = w.symmetric_capacity();
        let log_q = (g.order() as f64).log2();
        prop_assert!(i >= 0.0 && i <= log_q + 1e-12);
        let qc = c.quotient_capacities(&w);
        for (a, ha) in c.subgroups().iter().enumerate() {
            prop_assert!(qc[a] >= 0.0 && qc[a] <= i + 1e-12);
            for (b, hb) in c.subgroups().iter().enumerate() {
                if ha.is_subset_of(hb) {
                    prop_assert!(qc[b] <= qc[a] + 1e-12, "{:?} in {:?}", ha.members(), hb.members());
                }
            }
        }
        let triv = c.subgroups().iter().position(|h| h.order() == 1).unwrap();
        let full = c.subgroups().iter().position(|h| h.order() == g.order()).unwrap();
        prop_assert!((qc[triv] - i).abs() < 1e-12);
        prop_assert_eq!(qc[full], 0.0);
    }

    #[test]
    fn sequences_do_not_depend_on_representation(gi in 0usize..4, m in 1usize..4, seed in any::<u64>(), bits in 0u64..4) {
        let w = zoo::random_channel(Arc::new(GroupSpec::new(GROUPS[gi]).unwrap()), m, seed).unwrap();
        let s = SignSequence::from_index(bits, 2);
        let opts = TransformOptions::default();
        let a = apply_sequence(&w, &s, &opts).unwrap();
        let b = apply_sequence(&split_outputs(&w), &s, &opts).unwrap();
        prop_assert_eq!(a.num_outputs(), b.num_outputs());
        prop_assert!((a.symmetric_capacity() - b.symmetric_capacity()).abs() < 1e-9);
    }

    #[test]
    fn homomorphism_is_a_fixed_point(gi in 0..GROUPS.len(), pick in any::<usize>(), n in 1usize..=3) {
        let g = Arc::new(GroupSpec::new(GROUPS[gi]).unwrap());
        let subs = g.enumerate_subgroups();
        let h = &subs[pick % subs.len()];
        let w = zoo::deterministic_homomorphism(g, h).unwrap();
        let r = polarize_tree(&w, n, 0.01, &TreeOptions::default()).unwrap();
        prop_assert_eq!(r.count_for(h.members()), 1u64 << n);
        prop_assert!(r.branches.iter().all(|b| b.gap_capacity < 1e-12 && b.gap_quotient < 1e-12));
    }

    #[test]
    fn report_counts_sum_to_leaves(eps in 0.0f64..=1.0, n in 1usize..=12, gi in 0..GROUPS.len()) {
        let g = Arc::new(GroupSpec::new(GROUPS[gi]).unwrap());
        let r = polarize_erasure(g, eps, n, 0.1, false).unwrap();
        let total: u64 = r.subgroups.iter().map(|s| s.count).sum::<u64>() + r.unclassified;
        prop_assert_eq!(total, 1u64 << n);
    }
}

#[test]
fn erasure_matrix_path_matches_closed_form() {
    for orders in [&[2][..], &[3], &[4], &[6]] {
        let g = Arc::new(GroupSpec::new(orders).unwrap());
        for k in 0..=100 {
            let eps = k as f64 / 100.0;
            let w = zoo::qec(g.clone(), eps).unwrap();
            let em = minus(&w).unwrap().erasure_equivalent().unwrap();
            let ep = plus(&w).unwrap().erasure_equivalent().unwrap();
            assert!((em - (2.0 * eps - eps * eps)).abs() < 1e-9, "{orders:?} {eps}");
            assert!((ep - eps * eps).abs() < 1e-9, "{orders:?} {eps}");
        }
    }
}

#[test]
fn erasure_minus_plus_value() {
    let g = Arc::new(GroupSpec::new(&[2]).unwrap());
    let w = zoo::qec(g, 0.5).unwrap();
    let s: SignSequence = "-+".parse().unwrap();
    let out = apply_sequence(&w, &s, &TransformOptions::default()).unwrap();
    assert!((out.erasure_equivalent().unwrap() - 0.5625).abs() < 1e-12);
}

#[test]
fn z4_mixture_shows_three_levels() {
    let g = Arc::new(GroupSpec::new(&[4]).unwrap());
    let perfect = zoo::deterministic_homomorphism(g.clone(), &g.trivial_subgroup()).unwrap();
    let half = zoo::deterministic_homomorphism(g.clone(), &g.subgroup_from_members(&[0, 2]).unwrap()).unwrap();
    let erased = zoo::qec(g.clone(), 1.0).unwrap();
    // Without an erasing component every leaf still learns the coset of {0,2}.
    let two = zoo::flagged_mixture(&perfect, &half, 0.5).unwrap();
    let r = polarize_tree(&two, 10, 0.1, &TreeOptions::default()).unwrap();
    assert_eq!(r.count_for(&[0, 1, 2, 3]), 0);
    assert!(r.count_for(&[0]) > 0 && r.count_for(&[0, 2]) > 0);

    let rest = zoo::flagged_mixture(&half, &erased, 0.5).unwrap();
    let w = zoo::flagged_mixture(&perfect, &rest, 1.0 / 3.0).unwrap();
    let r = polarize_tree(&w, 10, 0.1, &TreeOptions::default()).unwrap();
    assert!(r.count_for(&[0]) > 0);
    assert!(r.count_for(&[0, 2]) > 0);
    assert!(r.count_for(&[0, 1, 2, 3]) > 0);
}

#[test]
fn binary_erasure_mostly_polarized_at_ten() {
    let g = Arc::new(GroupSpec::new(&[2]).unwrap());
    let r = polarize_erasure(g, 0.5, 10, 0.1, false).unwrap();
    assert!(r.classified_fraction() >= 0.75, "{}", r.classified_fraction());
}

#[test]
fn erasure_unclassified_fraction_is_non_increasing() {
    let g = Arc::new(GroupSpec::new(&[4]).unwrap());
    for eps in [0.2, 0.5, 0.7] {
        let fractions: Vec<f64> = (4..=20)
            .step_by(2)
            .map(|n| polarize_erasure(g.clone(), eps, n, 0.1, false).unwrap().unclassified_fraction)
            .collect();
        assert!(fractions.windows(2).all(|w| w[1] <= w[0]), "{eps}: {fractions:?}");
    }
}

#[test]
fn matrix_and_erasure_paths_agree_up_to_eight() {
    for orders in [&[2][..], &[4], &[2, 2], &[6]] {
        let g = Arc::new(GroupSpec::new(orders).unwrap());
        for eps in [0.1, 0.5, 0.9] {
            let w = zoo::qec(g.clone(), eps).unwrap();
            let a = polarize_tree(&w, 8, 0.1, &TreeOptions::default()).unwrap();
            let b = polarize_erasure(g.clone(), eps, 8, 0.1, false).unwrap();
            let ca: Vec<u64> = a.subgroups.iter().map(|s| s.count).collect();
            let cb: Vec<u64> = b.subgroups.iter().map(|s| s.count).collect();
            assert_eq!(ca, cb, "{orders:?} {eps}");
        }
    }
}
