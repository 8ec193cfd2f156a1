use approx::assert_abs_diff_eq;
use chancoh::harness::{check_condition, reproduce_counterexample, CheckOptions, Condition, Dims};
use chancoh::{Measure, SolverOptions};

fn opts(a: usize, b: usize, trials: usize, seed: u64) -> CheckOptions {
    CheckOptions { dims: Dims::new(a, b).unwrap(), trials, seed, ..CheckOptions::default() }
}

#[test]
fn closed_form_measures_satisfy_every_condition() {
    for (a, b) in [(2, 2), (2, 3), (3, 2)] {
        for measure in [Measure::L1, Measure::RelativeEntropy] {
            for condition in Condition::ALL {
                let report = check_condition(condition, measure, &opts(a, b, 40, 1)).unwrap();
                assert_eq!(report.violations, 0, "{measure} {condition} at {a}x{b}: {report:?}");
                assert_eq!(report.trials, 40);
            }
        }
    }
}

#[test]
fn trace_distance_passes_the_monotone_conditions() {
    for condition in [Condition::C1, Condition::C2, Condition::B4] {
        let mut o = opts(2, 2, 12, 3);
        o.channels_per_isc = 3;
        let report = check_condition(condition, Measure::TraceDistance, &o).unwrap();
        assert_eq!(report.violations, 0, "{condition}: {report:?}");
    }
}

#[test]
fn trace_distance_fails_additivity() {
    let report = check_condition(Condition::C3, Measure::TraceDistance, &opts(2, 2, 4, 0)).unwrap();
    assert!(report.violations >= 1);
    assert_abs_diff_eq!(report.worst_gap.abs(), 1.0 / 12.0, epsilon = 1e-4);

    let selective = check_condition(Condition::B3, Measure::TraceDistance, &opts(2, 2, 2, 0)).unwrap();
    assert!(selective.violations >= 1);
    assert!(selective.worst_gap > 0.08);
}

#[test]
fn reports_are_deterministic() {
    let o = opts(2, 3, 10, 42);
    for condition in [Condition::C2, Condition::C3, Condition::B3] {
        let first = check_condition(condition, Measure::RelativeEntropy, &o).unwrap();
        let second = check_condition(condition, Measure::RelativeEntropy, &o).unwrap();
        assert_eq!(first, second);
    }
    let other = check_condition(Condition::C2, Measure::L1, &opts(2, 3, 10, 43)).unwrap();
    let base = check_condition(Condition::C2, Measure::L1, &o).unwrap();
    assert_ne!(other.worst_gap, base.worst_gap);
}

#[test]
fn zero_trials_report_nothing() {
    let report = check_condition(Condition::C3, Measure::L1, &opts(2, 2, 0, 0)).unwrap();
    assert_eq!(report.violations, 0);
    assert_eq!(report.worst_gap, 0.0);
}

#[test]
fn counterexample_values() {
    let r = reproduce_counterexample(&SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert_abs_diff_eq!(r.ctr_phi1, 1.5, epsilon = 1e-4);
    assert_abs_diff_eq!(r.ctr_phi2, 5.0 / 3.0, epsilon = 1e-4);
    assert_abs_diff_eq!(r.additive_rhs, 19.0 / 12.0, epsilon = 1e-4);
    assert_abs_diff_eq!(r.closed_form_phi1, 1.5, epsilon = 1e-15);
    assert_abs_diff_eq!(r.closed_form_phi2, 5.0 / 3.0, epsilon = 1e-15);
    // the reference operator as printed does not give distance 1
    assert_abs_diff_eq!(r.ctr_mix_upper, 1.1403882032, epsilon = 1e-9);
    assert_abs_diff_eq!(r.ctr_mix_solved, 1.5, epsilon = 1e-4);
    assert_abs_diff_eq!(r.gap, 1.0 / 12.0, epsilon = 1e-4);
    assert!(r.violated);
    assert!(r.ctr_mix_upper_channel >= r.ctr_mix_solved - 1e-6);
}
