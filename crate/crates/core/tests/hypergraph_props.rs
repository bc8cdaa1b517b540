use proptest::prelude::*;

use shf_core::hypergraph::{find_rainbow_cycle, PartiteHypergraph};
use shf_core::verify::{find_violation, is_linear_shf};
use shf_core::{Matrix, SeparationType};

fn arb_matrix(
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
    q: std::ops::Range<u32>,
) -> impl Strategy<Value = Matrix> {
    (rows, cols, q).prop_flat_map(|(rows, cols, q)| {
        proptest::collection::vec(0..q, rows * cols).prop_map(move |data| Matrix::new(rows, cols, q, data).unwrap())
    })
}

proptest! {
    #[test]
    fn matrix_round_trip(m in arb_matrix(1..6, 0..8, 1..6)) {
        prop_assert_eq!(PartiteHypergraph::from_matrix(&m).to_matrix().unwrap(), m);
    }

    #[test]
    fn linearity_agrees(m in arb_matrix(1..5, 0..8, 1..5)) {
        prop_assert_eq!(PartiteHypergraph::from_matrix(&m).is_linear(), is_linear_shf(&m));
    }

    #[test]
    fn found_cycles_validate(m in arb_matrix(3..6, 0..9, 2..5), k in 3usize..6) {
        let h = PartiteHypergraph::from_matrix(&m);
        if k <= h.parts() {
            if let Some(c) = find_rainbow_cycle(&h, k).unwrap() {
                prop_assert!(c.validate(&h).is_ok());
                prop_assert_eq!(c.edges[0], *c.edges.iter().min().unwrap());
            }
        }
    }

    #[test]
    fn spanning_even_cycle_breaks_separation(m in arb_matrix(4..5, 4..9, 2..5)) {
        let h = PartiteHypergraph::from_matrix(&m);
        if find_rainbow_cycle(&h, 4).unwrap().is_some() {
            prop_assert!(find_violation(&m, &SeparationType::new(vec![2, 2]).unwrap()).is_some());
        }
    }

    #[test]
    fn linear_shadow_is_edge_disjoint(m in arb_matrix(3..5, 0..8, 3..7)) {
        let h = PartiteHypergraph::from_matrix(&m);
        if h.is_linear() {
            let stats = h.shadow_graph().stats();
            prop_assert!(stats.max_multiplicity <= 1);
            prop_assert_eq!(stats.edge_disjoint_cliques, h.edge_count());
            let r = h.parts();
            prop_assert_eq!(stats.edges, h.edge_count() * r * (r - 1) / 2);
        }
    }
}
