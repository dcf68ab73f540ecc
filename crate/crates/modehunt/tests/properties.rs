//! Property tests for the metric axioms, refinement invariances, the
//! taut-string ball guarantee, and the estimator monotonicities.

use modehunt::kolmsig::kolmogorov_signatures;
use modehunt::persistence::persistence_pairs;
use modehunt::signal::{kolmogorov_distance, mode_count, sup_distance, StepSignal};
use modehunt::stats::mode_estimate;
use modehunt::tautstring::{min_modes_in_ball, taut_derivative};
use proptest::prelude::*;

fn signal_strategy(max_n: usize) -> impl Strategy<Value = StepSignal> {
    prop::collection::vec(-8.0f64..8.0, 1..=max_n)
        .prop_map(|v| StepSignal::new(v).expect("finite values"))
}

fn refine(f: &StepSignal, factor: usize) -> StepSignal {
    let vals: Vec<f64> = f
        .values()
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, factor))
        .collect();
    StepSignal::new(vals).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distances_are_metrics(
        f in signal_strategy(12),
        g in signal_strategy(12),
        h in signal_strategy(12),
    ) {
        for dist in [kolmogorov_distance, sup_distance] {
            let fg = dist(&f, &g);
            let gf = dist(&g, &f);
            let fh = dist(&f, &h);
            let gh = dist(&g, &h);
            prop_assert!(fg >= 0.0);
            prop_assert!((fg - gf).abs() <= 1e-12 * fg.max(1.0));
            prop_assert!(fh <= fg + gh + 1e-12 * (fg + gh).max(1.0));
            prop_assert_eq!(dist(&f, &f), 0.0);
        }
    }

    #[test]
    fn mode_count_and_distance_survive_refinement(
        f in signal_strategy(10),
        g in signal_strategy(10),
        factor in 2usize..4,
    ) {
        let rf = refine(&f, factor);
        let rg = refine(&g, factor);
        prop_assert_eq!(mode_count(&f), mode_count(&rf));
        let d = kolmogorov_distance(&f, &g);
        let rd = kolmogorov_distance(&rf, &rg);
        prop_assert!((d - rd).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn taut_derivative_stays_in_the_ball(
        f in signal_strategy(14),
        alpha in 0.0f64..2.0,
    ) {
        let d = taut_derivative(&f, alpha).unwrap();
        prop_assert!(kolmogorov_distance(&f, &d) <= alpha + 1e-12);
    }

    #[test]
    fn min_modes_monotone_in_radius(f in signal_strategy(10)) {
        let mut last = usize::MAX;
        for step in 0..25 {
            let alpha = step as f64 * 0.05;
            let m = min_modes_in_ball(&f, alpha).unwrap();
            prop_assert!(m <= last);
            last = m;
        }
    }

    #[test]
    fn signature_count_equals_mode_count(f in signal_strategy(16)) {
        let s = kolmogorov_signatures(&f);
        prop_assert_eq!(s.len(), mode_count(&f));
        for k in 1..s.len() as isize {
            prop_assert!(s.at(k) <= s.at(k - 1));
            prop_assert!(s.at(k) > 0.0);
        }
        prop_assert_eq!(persistence_pairs(&f).len(), mode_count(&f));
    }

    #[test]
    fn mode_estimate_monotone_in_threshold(f in signal_strategy(16)) {
        let s = kolmogorov_signatures(&f);
        let mut last = usize::MAX;
        for step in 1..40 {
            let eps = step as f64 * 0.01;
            let k = mode_estimate(&s, eps).unwrap();
            prop_assert!(k <= last);
            last = k;
        }
        // Below the smallest positive signature the estimate is exact.
        if let Some(&smallest) = s.as_slice().last() {
            prop_assert_eq!(mode_estimate(&s, smallest * 0.5).unwrap(), mode_count(&f));
        }
    }
}
