mod common;

use cadlabel::metrics::{confusion, report, row_normalize, row_normalize_rounded, ConfusionMatrix};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn labels(seed: u64, n: usize, k: u8) -> (Vec<u8>, Vec<u8>) {
    let mut r = rng(seed);
    let reference: Vec<u8> = (0..n).map(|_| r.random_range(0..k)).collect();
    let predicted = reference
        .iter()
        .map(|&l| if r.random_range(0..4) == 0 { r.random_range(0..k) } else { l })
        .collect();
    (reference, predicted)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scores_match_naive_counting(seed in any::<u64>(), n in 1usize..3000, k in 1u8..19) {
        let (a, b) = labels(seed, n, k);
        let r = report(&confusion(&a, &b, k as usize).unwrap()).unwrap();
        let o = naive_scores(&a, &b, k as usize);
        prop_assert!((r.oa - o.oa).abs() <= 1e-12);
        prop_assert!((r.aa - o.aa).abs() <= 1e-12);
        prop_assert!((r.miou - o.miou).abs() <= 1e-12);
        for c in 0..k as usize {
            prop_assert_eq!(r.iou[c].is_some(), o.iou[c].is_some());
            if let (Some(x), Some(y)) = (r.iou[c], o.iou[c]) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            if let (Some(x), Some(y)) = (r.recall[c], o.recall[c]) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn recall_bounds_iou(seed in any::<u64>(), n in 1usize..2000, k in 1u8..19) {
        let (a, b) = labels(seed, n, k);
        let r = report(&confusion(&a, &b, k as usize).unwrap()).unwrap();
        for c in 0..k as usize {
            if let (Some(rec), Some(iou)) = (r.recall[c], r.iou[c]) {
                prop_assert!(rec >= iou);
            }
        }
    }

    #[test]
    fn relabeling_permutes_the_matrix(seed in any::<u64>(), n in 1usize..2000, k in 1u8..19) {
        let (a, b) = labels(seed, n, k);
        let mut perm: Vec<u8> = (0..k).collect();
        perm.shuffle(&mut rng(seed ^ 1));
        let pa: Vec<u8> = a.iter().map(|&l| perm[l as usize]).collect();
        let pb: Vec<u8> = b.iter().map(|&l| perm[l as usize]).collect();
        let m = confusion(&a, &b, k as usize).unwrap();
        let pm = confusion(&pa, &pb, k as usize).unwrap();
        for i in 0..k as usize {
            for j in 0..k as usize {
                prop_assert_eq!(m.get(i, j), pm.get(perm[i] as usize, perm[j] as usize));
            }
        }
    }

    #[test]
    fn absent_classes_do_not_change_scores(seed in any::<u64>(), n in 1usize..2000, k in 2u8..10) {
        // Labels only use 0..k; pad the matrix with never-occurring classes.
        let (a, b) = labels(seed, n, k);
        let small = report(&confusion(&a, &b, k as usize).unwrap()).unwrap();
        let big = report(&confusion(&a, &b, 18).unwrap()).unwrap();
        prop_assert_eq!(&small.iou[..], &big.iou[..k as usize]);
        prop_assert_eq!(&small.recall[..], &big.recall[..k as usize]);
        prop_assert!(big.iou[k as usize..].iter().all(Option::is_none));
        prop_assert_eq!(small.miou, big.miou);
        prop_assert_eq!(small.aa, big.aa);
    }

    #[test]
    fn rounded_rows_sum_to_one_hundred(seed in any::<u64>(), n in 1usize..2000, k in 1u8..19) {
        let (a, b) = labels(seed, n, k);
        let m = confusion(&a, &b, k as usize).unwrap();
        let exact = row_normalize(&m);
        for (row, c) in row_normalize_rounded(&m, 1).iter().zip(0..) {
            if m.row_sum(c) == 0 {
                continue;
            }
            prop_assert!((row.iter().sum::<f64>() - 100.0).abs() <= 0.05);
            prop_assert!((exact[c].iter().sum::<f64>() - 100.0).abs() <= 1e-9);
            for (x, e) in row.iter().zip(&exact[c]) {
                prop_assert!((x - e).abs() < 0.1 + 1e-9);
            }
        }
    }
}

#[test]
fn matrix_helpers() {
    let m = ConfusionMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
    assert_eq!((m.row_sum(0), m.col_sum(0), m.trace(), m.total()), (3, 4, 5, 10));
}
