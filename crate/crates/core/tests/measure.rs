//! Grid cross-check of the stopping-window measure against the induction
//! itself.

use disco::exactnum::{q, Rational};
use disco::rauzy::{coverage_measure, feasible_words, run, InductionOutcome};

#[test]
fn stopping_fraction_matches_window_measure() {
    let n = 10_000i64;
    for k in 0..=5 {
        let stopped = (0..n)
            .filter(|i| {
                let s = q(2 * i + 1, 2 * n);
                matches!(run(&s, k).unwrap(), InductionOutcome::Stopped { .. })
            })
            .count();
        let measure = coverage_measure(k).to_f64();
        // each window can miscount at most one grid point per end
        let slack = (2 * feasible_words(k).len()) as f64 / n as f64;
        let fraction = stopped as f64 / n as f64;
        assert!((fraction - measure).abs() <= slack, "k = {k}: grid {fraction}, exact {measure}");
    }
}

#[test]
fn unstopped_measure_shrinks_geometrically() {
    let mut previous = Rational::one();
    for k in 0..=8 {
        let rest = Rational::one() - coverage_measure(k);
        assert!(rest < previous);
        assert!(rest <= &previous * &q(5, 6));
        previous = rest;
    }
}
