use proptest::prelude::*;
use sybil_lowpass::{auc, Orientation, ScoreVector};

fn pair_count(s: &[f64], truth: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (si, _) in s.iter().zip(truth).filter(|x| *x.1) {
        for (sj, _) in s.iter().zip(truth).filter(|x| !*x.1) {
            pairs += 1.0;
            wins += match si.total_cmp(sj) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Equal => 0.5,
                std::cmp::Ordering::Less => 0.0,
            };
        }
    }
    wins / pairs
}

/// Integer-valued scores (so ties occur) with both classes present.
fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..15).prop_map(f64::from), n),
            prop::collection::vec(any::<bool>(), n).prop_map(|mut t| {
                t[0] = true;
                t[1] = false;
                t
            }),
        )
    })
}

fn sybil(s: Vec<f64>) -> ScoreVector {
    ScoreVector::new(s, Orientation::HigherIsSybil).unwrap()
}

proptest! {
    #[test]
    fn auc_matches_pair_counting((s, t) in instance()) {
        prop_assert_eq!(auc(&sybil(s.clone()), &t).unwrap(), pair_count(&s, &t));
    }

    #[test]
    fn auc_invariant_under_increasing_affine_maps((s, t) in instance(), a in 0.5f64..10.0, b in -100f64..100.0) {
        let mapped: Vec<f64> = s.iter().map(|x| a * x + b).collect();
        prop_assert_eq!(auc(&sybil(s), &t).unwrap(), auc(&sybil(mapped), &t).unwrap());
    }

    #[test]
    fn reversing_orientation_complements((s, t) in instance()) {
        let up = auc(&sybil(s.clone()), &t).unwrap();
        let down = auc(&ScoreVector::new(s.clone(), Orientation::HigherIsBenign).unwrap(), &t).unwrap();
        let negated = auc(&sybil(s.iter().map(|x| -x).collect()), &t).unwrap();
        prop_assert!((up + down - 1.0).abs() < 1e-12);
        prop_assert_eq!(down, negated);
    }
}
