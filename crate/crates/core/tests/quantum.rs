mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use sepbell::bell::{build_separation_bell, build_zg_svetlichny, evaluate};
use sepbell::prob::validate_no_signaling;
use sepbell::quantum::{
    figure3_sweep, ghz_qubit_behavior, ghz_qubit_closed_form, ghz_qudit_behavior, qudit_expression_value, sweep_csv,
    QubitPlan, QuditPlan,
};
use sepbell::separation::separation_value;
use sepbell::{Measurement, SeparationTerm, Setting};

use common::{oracle_value, rng};
use rand::Rng;

fn default_value(n: usize) -> f64 {
    let e = build_separation_bell(&(0..n).collect::<Vec<_>>(), None).unwrap();
    evaluate(&e, &ghz_qubit_behavior(&QubitPlan::standard(n).unwrap()).unwrap()).unwrap()
}

#[test]
fn default_plan_values() {
    assert!((default_value(3) + 1.0).abs() < 1e-9);
    assert!((default_value(4) + 0.75).abs() < 1e-9);
    assert!((default_value(5) + 1.0).abs() < 1e-9);
    let six = default_value(6);
    assert!(six < 0.0);
    assert!((six - ((1.0 - (PI / 5.0).cos()) / 2.0 - 1.0)).abs() < 1e-9);
}

#[test]
fn quantum_behaviors_are_no_signaling() {
    for n in 2..=6 {
        let b = ghz_qubit_behavior(&QubitPlan::standard(n).unwrap()).unwrap();
        assert!(validate_no_signaling(&b, 1e-9).unwrap().pass, "N = {n}");
    }
    for d in 2..=5 {
        let b = ghz_qudit_behavior(d, &QuditPlan::standard()).unwrap();
        assert!(validate_no_signaling(&b, 1e-9).unwrap().pass, "d = {d}");
    }
}

#[test]
fn qudit_fast_path_matches_state_vector() {
    for d in 2..=10 {
        let b = ghz_qudit_behavior(d, &QuditPlan::standard()).unwrap();
        for swapped in [false, true] {
            let e = build_zg_svetlichny(d, swapped).unwrap();
            let fast = qudit_expression_value(&e, d, &QuditPlan::standard()).unwrap();
            assert!((fast - evaluate(&e, &b).unwrap()).abs() < 1e-12, "d = {d}");
            assert!((fast - oracle_value(&e, &b)).abs() < 1e-12, "d = {d}");
        }
    }
}

#[test]
fn dimension_sweep() {
    let rows = figure3_sweep(2, 50, &QuditPlan::standard()).unwrap();
    assert_eq!(rows.len(), 49);
    assert!((rows[0].value + 0.25).abs() < 1e-9);
    for r in &rows {
        assert!(r.value < -1e-6, "d = {}: {}", r.d, r.value);
    }
    assert!(rows.windows(2).all(|w| w[0].d + 1 == w[1].d));
    let csv = sweep_csv(&rows);
    assert!(csv.starts_with("d,value\n2,-0.25\n"));
    assert_eq!(csv.lines().count(), 50);
    assert!(figure3_sweep(1, 5, &QuditPlan::standard()).is_err());
    assert!(figure3_sweep(5, 4, &QuditPlan::standard()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_state_vector(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let angles: Vec<[f64; 2]> = (0..n)
            .map(|_| [r.random_range(-PI..PI), r.random_range(-PI..PI)])
            .collect();
        let plan = QubitPlan::new(angles).unwrap();
        let sv = ghz_qubit_behavior(&plan).unwrap();
        let cf = ghz_qubit_closed_form(&plan).unwrap();
        for (a, b) in sv.table().iter().zip(cf.table()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        let settings: Vec<Setting> = (0..n).map(|_| if r.random::<bool>() { Setting::FIRST } else { Setting::SECOND }).collect();
        let term = SeparationTerm::new(settings.iter().enumerate().map(|(k, &s)| Measurement::new(k, s)).collect()).unwrap();
        let total: f64 = settings.iter().enumerate().map(|(k, s)| plan.angle(k, s.index())).sum();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let expected = (1.0 + sign * total.cos()) / 2.0;
        prop_assert!((separation_value(&sv, &term, Setting::FIRST).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn swap_symmetry_on_conjugate_plan(d in 2usize..=10, a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let plan = QuditPlan::from_party_phases([a, b], [0.0, c], [b, a]);
        let plain = qudit_expression_value(&build_zg_svetlichny(d, false).unwrap(), d, &plan).unwrap();
        let swapped = qudit_expression_value(&build_zg_svetlichny(d, true).unwrap(), d, &plan.conjugate()).unwrap();
        prop_assert!((plain - swapped).abs() < 1e-10);
    }
}
