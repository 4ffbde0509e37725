//! Cross-checks between the fast routines and independent reference oracles.

use proptest::prelude::*;
use secleds::distance::{dtw, euclidean};
use secleds::eval::{pairwise_f1, LabelMap};
use secleds::oracle::{dtw_bruteforce, f1_bruteforce, pam_exact};
use secleds::{AssignmentRecord, DistanceFn, Execution, StreamItem};

fn seq(values: Vec<Vec<f64>>) -> StreamItem {
    StreamItem::from_rows("s", 0, &values, None).unwrap()
}

/// Sequences of dimensionality `d` and length 1..=6.
fn small_seq(d: usize) -> impl Strategy<Value = StreamItem> {
    (1usize..=6).prop_flat_map(move |w| {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, w), d).prop_map(seq)
    })
}

fn pair(d: usize) -> impl Strategy<Value = (StreamItem, StreamItem)> {
    (small_seq(d), small_seq(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn dtw_matches_path_enumeration((a, b) in (1usize..=3).prop_flat_map(pair)) {
        let fast = dtw(&a, &b, None).unwrap();
        let slow = dtw_bruteforce(&a, &b).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow), "{fast} vs {slow}");
    }

    #[test]
    fn dtw_symmetric_and_zero_on_self((a, b) in pair(2)) {
        prop_assert_eq!(dtw(&a, &a, None).unwrap(), 0.0);
        prop_assert_eq!(dtw(&a, &b, None).unwrap(), dtw(&b, &a, None).unwrap());
    }

    #[test]
    fn widening_band_never_increases((a, b) in pair(1)) {
        let min_band = a.len().abs_diff(b.len());
        let mut last = f64::INFINITY;
        for band in min_band..=6 {
            let v = dtw(&a, &b, Some(band)).unwrap();
            prop_assert!(v <= last);
            last = v;
        }
        prop_assert_eq!(last, dtw(&a, &b, None).unwrap());
    }

    #[test]
    fn dtw_below_diagonal_path(w in 1usize..20, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = seq(vec![(0..w).map(|_| rng.random_range(-5.0..5.0)).collect()]);
        let b = seq(vec![(0..w).map(|_| rng.random_range(-5.0..5.0)).collect()]);
        let diag: f64 = a.flat().iter().zip(b.flat()).map(|(x, y)| (x - y).abs()).sum();
        prop_assert!(dtw(&a, &b, None).unwrap() <= diag + 1e-12);
        prop_assert_eq!(euclidean(&a, &b).unwrap(), euclidean(&b, &a).unwrap());
        prop_assert_eq!(euclidean(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn dtw_example_against_oracle() {
    let a = seq(vec![vec![1.0, 2.0, 3.0]]);
    let b = seq(vec![vec![1.0, 3.0]]);
    assert_eq!(dtw(&a, &b, None).unwrap(), dtw_bruteforce(&a, &b).unwrap());
}

fn labeled_records() -> impl Strategy<Value = (Vec<AssignmentRecord>, LabelMap)> {
    (1usize..=200, 1usize..6, 1usize..6).prop_flat_map(|(n, nl, nc)| {
        prop::collection::vec((0..nl, 0..nc), n).prop_map(|v| {
            let mut labels = LabelMap::new();
            let recs = v
                .into_iter()
                .enumerate()
                .map(|(i, (l, c))| {
                    labels.insert(format!("i{i}"), format!("L{l}"));
                    AssignmentRecord { item_id: format!("i{i}"), arrival_index: i as u64, cluster_id: c }
                })
                .collect();
            (recs, labels)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contingency_f1_matches_pair_enumeration((recs, labels) in labeled_records()) {
        let fast = pairwise_f1(&recs, &labels).unwrap();
        let slow = f1_bruteforce(&recs, &labels).unwrap();
        prop_assert_eq!(fast, slow);
        let n = recs.len() as u64;
        let c = fast.confusion;
        prop_assert_eq!(c.tp + c.fp + c.fn_ + c.tn, n * (n - 1) / 2);
    }

    #[test]
    fn f1_ignores_cluster_relabeling((recs, labels) in labeled_records(), shift in 1usize..10) {
        let relabeled: Vec<AssignmentRecord> = recs
            .iter()
            .map(|r| AssignmentRecord { cluster_id: (r.cluster_id * 7 + shift) % 97, ..r.clone() })
            .collect();
        prop_assert_eq!(pairwise_f1(&recs, &labels).unwrap(), pairwise_f1(&relabeled, &labels).unwrap());
    }

    #[test]
    fn duplicating_items_never_lowers_tp((recs, labels) in labeled_records()) {
        let mut labels2 = labels.clone();
        let mut doubled = recs.clone();
        for r in &recs {
            let id = format!("{}-dup", r.item_id);
            labels2.insert(id.clone(), labels[&r.item_id].clone());
            doubled.push(AssignmentRecord { item_id: id, ..r.clone() });
        }
        prop_assert!(pairwise_f1(&doubled, &labels2).unwrap().confusion.tp >= pairwise_f1(&recs, &labels).unwrap().confusion.tp);
    }

    #[test]
    fn f1_is_one_exactly_for_matching_partitions((recs, labels) in labeled_records()) {
        let perfect: Vec<AssignmentRecord> = recs
            .iter()
            .map(|r| AssignmentRecord { cluster_id: labels[&r.item_id][1..].parse().unwrap(), ..r.clone() })
            .collect();
        let s = pairwise_f1(&perfect, &labels).unwrap();
        let has_pairs = s.confusion.tp > 0;
        prop_assert_eq!(s.f1 == 1.0, has_pairs);
    }
}

/// Exhaustive k-medoids optimum over all medoid subsets.
fn best_subset_cost(xs: &[f64], k: usize) -> f64 {
    fn rec(xs: &[f64], k: usize, start: usize, chosen: &mut Vec<usize>, best: &mut f64) {
        if chosen.len() == k {
            let cost: f64 = xs
                .iter()
                .map(|x| chosen.iter().map(|&m| (x - xs[m]).abs()).fold(f64::INFINITY, f64::min))
                .sum();
            *best = best.min(cost);
            return;
        }
        for i in start..xs.len() {
            chosen.push(i);
            rec(xs, k, i + 1, chosen, best);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(xs, k, 0, &mut Vec::new(), &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pam_result_is_swap_local_optimum(xs in prop::collection::vec(-50.0f64..50.0, 1..=8), k in 1usize..=3) {
        prop_assume!(k <= xs.len());
        let items: Vec<StreamItem> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| StreamItem::point(format!("p{i}"), i as u64, &[x], None).unwrap())
            .collect();
        let r = pam_exact(&items, k, DistanceFn::EUCLIDEAN, 1000, Execution::Sequential).unwrap();
        let cost = |m: &[usize]| -> f64 {
            xs.iter()
                .map(|x| m.iter().map(|&j| (x - xs[j]).abs()).fold(f64::INFINITY, f64::min))
                .sum()
        };
        let tol = 1e-9 * (1.0 + r.total_cost);
        prop_assert!((cost(&r.medoid_indices) - r.total_cost).abs() <= tol);
        // no single swap improves
        for slot in 0..k {
            for h in 0..xs.len() {
                if r.medoid_indices.contains(&h) {
                    continue;
                }
                let mut m = r.medoid_indices.clone();
                m[slot] = h;
                prop_assert!(cost(&m) >= r.total_cost - tol);
            }
        }
        let best = best_subset_cost(&xs, k);
        prop_assert!(r.total_cost >= best - tol);
        if k == 1 {
            prop_assert!((r.total_cost - best).abs() <= tol);
        }
        prop_assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn pam_reaches_exhaustive_optimum_on_separated_groups(
        centers in prop::collection::vec(-1000.0f64..1000.0, 1..=3),
        spread in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        // well separated groups: the optimum puts one medoid in each group
        let mut cs = centers.clone();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(cs.windows(2).all(|w| w[1] - w[0] > 100.0));
        let xs: Vec<f64> = cs.iter().flat_map(|c| spread.iter().take(2).map(move |s| c + s)).collect();
        let k = cs.len();
        let items: Vec<StreamItem> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| StreamItem::point(format!("p{i}"), i as u64, &[x], None).unwrap())
            .collect();
        let r = pam_exact(&items, k, DistanceFn::EUCLIDEAN, 1000, Execution::Sequential).unwrap();
        let best = best_subset_cost(&xs, k);
        prop_assert!((r.total_cost - best).abs() <= 1e-9 * (1.0 + best));
    }
}
