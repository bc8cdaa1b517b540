use proptest::prelude::*;

use shf_core::coverfree::{cff_derived, cff_is_shf_check, is_cff, shf_to_cff_double, BinaryFamily};
use shf_core::verify::find_violation;
use shf_core::{Matrix, SeparationType};

fn arb_binary() -> impl Strategy<Value = Matrix> {
    (1usize..7, 0usize..7).prop_flat_map(|(rows, cols)| {
        proptest::collection::vec(0u32..2, rows * cols).prop_map(move |data| Matrix::new(rows, cols, 2, data).unwrap())
    })
}

proptest! {
    #[test]
    fn cover_free_families_separate(m in arb_binary(), w in 1usize..4) {
        let f = BinaryFamily::new(m).unwrap();
        if is_cff(&f, w).is_none() {
            prop_assert_eq!(cff_is_shf_check(&f, w), Ok(true));
        }
    }

    #[test]
    fn doubling_gives_cover_free(m in arb_binary(), w in 1usize..4) {
        if find_violation(&m, &SeparationType::new(vec![1, w]).unwrap()).is_none() {
            let d = shf_to_cff_double(&m, w).unwrap();
            prop_assert_eq!(d.points(), 2 * m.rows());
            prop_assert!(is_cff(&d, w).is_none());
            for j in 0..d.members() {
                prop_assert_eq!(d.member(j).len(), m.rows());
            }
        }
    }

    #[test]
    fn derived_lowers_order(m in arb_binary(), w in 2usize..4, a in 0usize..7) {
        let f = BinaryFamily::new(m).unwrap();
        if a < f.members() && is_cff(&f, w).is_none() {
            let d = cff_derived(&f, a, w).unwrap();
            prop_assert_eq!(d.members(), f.members() - 1);
            prop_assert!(is_cff(&d, w - 1).is_none());
        }
    }
}
