#[path = "support/wilcoxon_oracle.rs"]
mod wilcoxon_oracle;

use proptest::prelude::*;
use semgest_core::evalstats::{bh_adjust, wilcoxon_signed_rank, StatsError, Tails};
use wilcoxon_oracle::wilcoxon_enumerate;

fn pairs(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec((1i32..=10).prop_map(f64::from), n),
            prop::collection::vec((1i32..=10).prop_map(f64::from), n),
        )
    })
}

/// Step-up adjustment written out directly from its definition.
fn bh_oracle(p: &[f64]) -> Vec<f64> {
    let m = p.len() as f64;
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj >= pi)
                .map(|&pj| {
                    let rank = p.iter().filter(|&&pk| pk <= pj).count() as f64;
                    (pj * m / rank).min(1.0)
                })
                .fold(1.0f64, f64::min)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bh_fixes_constant_lists(c in 0.0f64..=1.0, m in 1usize..10) {
        prop_assert_eq!(bh_adjust(&vec![c; m]).unwrap(), vec![c; m]);
    }

    #[test]
    fn exact_p_matches_enumeration((x, y) in pairs(12)) {
        match (wilcoxon_signed_rank(&x, &y, Tails::Two), wilcoxon_enumerate(&x, &y)) {
            (Ok(r), Some((p, w_plus, w_minus))) => {
                prop_assert!(r.exact);
                prop_assert!((r.p - p).abs() <= 1e-12, "{} vs {}", r.p, p);
                prop_assert_eq!((r.w_plus, r.w_minus), (w_plus, w_minus));
            }
            (Err(StatsError::AllZeroDifferences), None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn shifting_both_samples_changes_nothing((x, y) in pairs(16), c in -50i32..50) {
        let shift = |v: &[f64]| v.iter().map(|a| a + f64::from(c)).collect::<Vec<_>>();
        let a = wilcoxon_signed_rank(&x, &y, Tails::Two);
        let b = wilcoxon_signed_rank(&shift(&x), &shift(&y), Tails::Two);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn swapping_samples_swaps_sums((x, y) in pairs(30)) {
        if let (Ok(a), Ok(b)) = (wilcoxon_signed_rank(&x, &y, Tails::Two), wilcoxon_signed_rank(&y, &x, Tails::Two)) {
            prop_assert_eq!((a.w_plus, a.w_minus), (b.w_minus, b.w_plus));
            prop_assert_eq!(a.p, b.p);
            prop_assert!((0.0..=1.0).contains(&a.p));
            let g = wilcoxon_signed_rank(&x, &y, Tails::Greater).unwrap().p;
            let l = wilcoxon_signed_rank(&y, &x, Tails::Less).unwrap().p;
            prop_assert_eq!(g, l);
        }
    }

    #[test]
    fn bh_properties(p in prop::collection::vec(0.0f64..=1.0, 0..12)) {
        let adj = bh_adjust(&p).unwrap();
        for ((a, raw), o) in adj.iter().zip(&p).zip(bh_oracle(&p)) {
            prop_assert!(a >= raw);
            prop_assert!(*a <= 1.0);
            prop_assert!((a - o).abs() <= 1e-12);
        }
        // a second pass can only raise values; it is not a fixed point in general
        for (again, once) in bh_adjust(&adj).unwrap().iter().zip(&adj) {
            prop_assert!(again >= once);
        }
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p[i] <= p[j] {
                    prop_assert!(adj[i] <= adj[j]);
                }
            }
        }
    }
}
