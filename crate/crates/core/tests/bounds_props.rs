use proptest::prelude::*;

use shf_core::bounds::{
    best_upper_bound, grouping_composition_bound, johnson_closed_form_bound, johnson_recursive_bound, prob_lower_bound,
    trung_bound, BoundFlag,
};
use shf_core::pstar::{objective, pstar_optimize, row_separation_probability};
use shf_core::search::exact_capacity;
use shf_core::{Matrix, SeparationType};

fn arb_type(max_t: usize, max_w: usize) -> impl Strategy<Value = SeparationType> {
    proptest::collection::vec(1..=max_w, 2..=max_t).prop_map(|w| SeparationType::new(w).unwrap())
}

#[test]
fn sandwich_on_desk_grid() {
    let types: Vec<SeparationType> = [&[1, 1][..], &[1, 2], &[1, 1, 1], &[2, 2], &[1, 3]]
        .iter()
        .map(|w| SeparationType::new(w.to_vec()).unwrap())
        .collect();
    for s in &types {
        for (rows, q) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2), (4, 2)] {
            let c = exact_capacity(rows, q, s, u64::MAX).unwrap();
            assert!(!c.lower_bound_only);
            let lower = prob_lower_bound(rows, q, s).unwrap().value.to_f64();
            let upper = best_upper_bound(rows, q, s).unwrap().best.value.to_f64();
            assert!(lower <= c.value as f64, "{rows} {q} {s}: {lower} > {}", c.value);
            assert!(c.value as f64 <= upper, "{rows} {q} {s}: {} > {upper}", c.value);
        }
    }
}

proptest! {
    #[test]
    fn closed_form_equals_trung_at_u_minus_one(s in arb_type(4, 4), q in 1u32..12) {
        let a = johnson_closed_form_bound(s.u() - 1, q, &s).unwrap();
        prop_assert_eq!(a.value, trung_bound(q, &s).unwrap().value);
    }

    #[test]
    fn recursion_beats_grouping(s in arb_type(3, 3), extra in 0u32..5, rows in 1usize..12) {
        let q = s.u() as u32 + extra;
        let j = johnson_recursive_bound(rows, q, &s).unwrap().value;
        let g = grouping_composition_bound(rows, q, &s).unwrap().value;
        prop_assert!(j.compare(&g).is_le(), "{} > {}", j, g);
    }

    #[test]
    fn recursion_monotone_in_rows(s in arb_type(3, 3), q in 2u32..6, rows in 1usize..10) {
        let a = johnson_recursive_bound(rows, q, &s).unwrap().value;
        let b = johnson_recursive_bound(rows + 1, q, &s).unwrap().value;
        prop_assert!(a.compare(&b).is_le());
    }

    #[test]
    fn best_is_finite_and_above_lower(s in arb_type(3, 3), q in 2u32..8, rows in 1usize..10) {
        let r = best_upper_bound(rows, q, &s).unwrap();
        prop_assert!(r.best.value.is_finite());
        prop_assert!(!r.best.flags.contains(&BoundFlag::BelowVacuousFloor));
        prop_assert!(r.best.value.to_f64() >= r.lower.value.to_f64());
        prop_assert!(r.best.value.to_f64() >= (s.u() - 1) as f64);
    }

    #[test]
    fn pstar_sorted_and_on_simplex(s in arb_type(4, 3)) {
        let r = pstar_optimize(&s, 1e-9).unwrap();
        prop_assert!(r.p.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((r.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(r.p.iter().all(|&x| x >= 0.0));
        prop_assert!((objective(&r.p, s.weights()) - r.value).abs() < 1e-12);
        prop_assert!(r.value > 0.0);
    }
}

/// Counts (w1-1, .., wt-1)-tuples of disjoint columns of a one-row matrix
/// that the row separates.
fn brute_separation(row: &[u32], weights: &[usize]) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        row: &[u32],
        weights: &[usize],
        part: usize,
        used: &mut Vec<bool>,
        colors: &mut Vec<u32>,
        hits: &mut u64,
        total: &mut u64,
        start: usize,
        left: usize,
    ) {
        if part == weights.len() {
            *total += 1;
            let mut seen = std::collections::BTreeSet::new();
            if colors.iter().all(|&c| seen.insert(c)) {
                *hits += 1;
            }
            return;
        }
        if left == 0 {
            let next = weights.get(part + 1).map_or(0, |w| w - 1);
            return rec(row, weights, part + 1, used, colors, hits, total, 0, next);
        }
        for j in start..row.len() {
            if used[j] {
                continue;
            }
            let first = left == weights[part] - 1;
            if !first && row[j] != colors[part] {
                continue;
            }
            used[j] = true;
            if first {
                colors.push(row[j]);
            }
            rec(row, weights, part, used, colors, hits, total, j + 1, left - 1);
            if first {
                colors.pop();
            }
            used[j] = false;
        }
    }
    // count all tuples, then the separated ones among them
    fn all_tuples(n: usize, weights: &[usize]) -> f64 {
        let mut taken = 0;
        let mut total = 1.0;
        for &w in weights {
            let k = w - 1;
            total *= (0..k).fold(1.0, |a, i| a * (n - taken - i) as f64 / (i + 1) as f64);
            taken += k;
        }
        total
    }
    let mut hits = 0;
    let mut total = 0;
    rec(
        row,
        weights,
        0,
        &mut vec![false; row.len()],
        &mut Vec::new(),
        &mut hits,
        &mut total,
        0,
        weights[0] - 1,
    );
    hits as f64 / all_tuples(row.len(), weights)
}

proptest! {
    #[test]
    fn exact_row_probability_matches_enumeration(counts in proptest::collection::vec(1usize..5, 2..4), extra in 0usize..2) {
        let t = counts.len();
        let s = SeparationType::new(vec![2 + extra; t]).unwrap();
        let row: Vec<u32> = counts.iter().enumerate().flat_map(|(sym, &c)| std::iter::repeat_n(sym as u32, c)).collect();
        prop_assume!(row.len() >= s.u() - t);
        let m = Matrix::new(1, row.len(), t as u32, row.clone()).unwrap();
        let _ = m;
        let brute = brute_separation(&row, s.weights());
        let exact = row_separation_probability(&counts, &s);
        prop_assert!((brute - exact).abs() < 1e-9, "{} vs {}", brute, exact);
    }
}
