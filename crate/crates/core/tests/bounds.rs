mod common;

use proptest::prelude::*;
use sepbell::bell::{build_separation_bell, build_zg_svetlichny, compose_monogamy, evaluate};
use sepbell::bounds::{
    lr_minimum, lr_minimum_with_cap, ns_minimum, ns_minimum_exact, pairwise_monogamy_certificates,
    search_monogamy_signs, LinearProgramInstance, Method,
};
use sepbell::prob::validate_no_signaling;
use sepbell::{Behavior, BellExpression, Error, Preset, Rational, Scenario, TermSum};

use common::{oracle_value, random_local, rng};

/// Minimum over deterministic strategies, built directly as 0/1 tables.
fn brute_force_minimum<E: TermSum + ?Sized>(expr: &E) -> f64 {
    let sc = *expr.scenario();
    let (n, d) = (sc.parties(), sc.outcomes());
    let dn = d.pow(n as u32);
    let slots = 2 * n;
    let mut best = f64::INFINITY;
    for code in 0..d.pow(slots as u32) {
        // Slot 2k + x holds party k's outcome at setting x.
        let answer = |k: usize, x: usize| (code / d.pow((slots - 1 - (2 * k + x)) as u32)) % d;
        let mut table = vec![0.0; sc.table_len()];
        for s in 0..1usize << n {
            let o = (0..n).fold(0, |acc, k| acc * d + answer(k, (s >> (n - 1 - k)) & 1));
            table[s * dn + o] = 1.0;
        }
        let b = Behavior::from_table(sc, table, 1e-12).unwrap();
        best = best.min(oracle_value(expr, &b));
    }
    best
}

#[test]
fn local_minima_match_direct_enumeration() {
    let mut exprs: Vec<BellExpression> = vec![build_separation_bell(&[0, 1, 2], None).unwrap()];
    exprs.extend((0..3).map(|m| build_separation_bell(&[0, 1, 2], Some(m)).unwrap()));
    exprs.push(build_zg_svetlichny(2, false).unwrap());
    exprs.push(build_zg_svetlichny(3, true).unwrap());
    for e in &exprs {
        let lr = lr_minimum::<_, f64>(e).unwrap();
        assert_eq!(lr.value, brute_force_minimum(e), "{e}");
        assert_eq!(lr.value, 0.0, "{e}");
        assert_eq!(lr.method, Method::BruteForce);
        assert_eq!(evaluate(e, &lr.optimizer).unwrap(), lr.value);
        assert!(lr.strategy.is_some());
    }
}

#[test]
fn four_party_variants_are_local() {
    for m in [None, Some(0), Some(1), Some(2), Some(3)] {
        let e = build_separation_bell(&[0, 1, 2, 3], m).unwrap();
        assert_eq!(lr_minimum::<_, Rational>(&e).unwrap().value, Rational::from_integer(0.into()));
    }
}

#[test]
fn monogamy_summands_are_local() {
    for preset in Preset::ALL {
        if preset == Preset::DivisionN5Ab {
            continue;
        }
        let m = compose_monogamy(preset, &preset.default_pool(), 2).unwrap();
        for s in m.summands() {
            assert_eq!(lr_minimum::<_, f64>(s).unwrap().value, 0.0, "{preset}: {s}");
        }
    }
}

#[test]
fn three_party_no_signaling_minimum() {
    let e = build_separation_bell(&[0, 1, 2], None).unwrap();
    let r = ns_minimum::<_, f64>(&e).unwrap();
    assert!((r.value + 1.0).abs() < 1e-9);
    assert!(validate_no_signaling(&r.optimizer, 1e-9).unwrap().pass);
    assert!((oracle_value(&e, &r.optimizer) - r.value).abs() < 1e-7);

    let exact = ns_minimum_exact(&e).unwrap();
    assert_eq!(exact.value, Rational::from_integer((-1).into()));
    assert_eq!(exact.tolerance, 0.0);

    // Independent formulation over the full table.
    let lp = LinearProgramInstance::new(*e.scenario(), sepbell::bounds::expression_coefficients(&e).unwrap()).unwrap();
    let (direct, optimizer) = lp.solve_direct::<Rational>().unwrap();
    assert_eq!(direct, exact.value);
    assert!(lp.is_feasible(&optimizer.to_f64(), 1e-12));
}

#[test]
fn every_separation_inequality_is_violable() {
    for parties in [vec![0, 1, 2], vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4]] {
        let e = build_separation_bell(&parties, None).unwrap();
        let r = ns_minimum::<_, f64>(&e).unwrap();
        assert!(r.value < -0.5, "{e}: {}", r.value);
    }
    for d in [2, 3] {
        let r = ns_minimum::<_, f64>(&build_zg_svetlichny(d, false).unwrap()).unwrap();
        assert!(r.value < -0.5, "d = {d}: {}", r.value);
    }
}

#[test]
fn zg_no_signaling_minima() {
    let exact = |d| ns_minimum_exact(&build_zg_svetlichny(d, false).unwrap()).unwrap().value;
    assert_eq!(exact(2), Rational::from_integer((-1).into()));
    assert_eq!(exact(3), Rational::new((-4).into(), 3.into()));
}

#[test]
fn pairwise_certificates_are_nonnegative() {
    for preset in [Preset::Strong3FourParty, Preset::Full4FourParty] {
        let m = compose_monogamy(preset, &preset.default_pool(), 2).unwrap();
        let certs = pairwise_monogamy_certificates::<f64>(&m).unwrap();
        let k = m.summands().len();
        assert_eq!(certs.len(), k * (k - 1) / 2);
        for c in certs {
            assert!(c.result.value >= -1e-7, "{preset} {}: {}", c.label, c.result.value);
        }
    }
}

#[test]
fn pairwise_needs_two_summands() {
    let m = compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 2).unwrap();
    let single = sepbell::MonogamyExpression::new("one", vec![m.summands()[0].clone()]);
    if let Ok(single) = single {
        assert!(matches!(pairwise_monogamy_certificates::<f64>(&single), Err(Error::Input(_))));
    }
}

#[test]
fn exclusivity() {
    for preset in [Preset::PrimaryAbcAbd, Preset::Strong3FourParty] {
        let m = compose_monogamy(preset, &preset.default_pool(), 2).unwrap();
        for (i, s) in m.summands().iter().enumerate() {
            let r = ns_minimum::<_, f64>(s).unwrap();
            assert!(r.value < 0.0);
            for (j, other) in m.summands().iter().enumerate() {
                if i != j {
                    let v = evaluate(other, &r.optimizer).unwrap();
                    assert!(v >= r.value.abs() - 1e-7, "{preset}: summand {j} at {v} on optimizer of {i}");
                }
            }
        }
    }
}

#[test]
fn lp_is_reproducible() {
    let m = compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 2).unwrap();
    let a = ns_minimum::<_, f64>(&m).unwrap();
    let b = ns_minimum::<_, f64>(&m).unwrap();
    assert!((a.value - b.value).abs() < 1e-9);
}

#[test]
fn enumeration_limits() {
    let big = build_separation_bell(&(0..9).collect::<Vec<_>>(), None).unwrap();
    assert!(matches!(lr_minimum::<_, f64>(&big), Err(Error::CountTooLarge { .. })));
    let e = build_separation_bell(&[0, 1, 2], None).unwrap();
    assert!(matches!(lr_minimum_with_cap::<_, f64>(&e, 10), Err(Error::CountTooLarge { .. })));
    assert!(matches!(ns_minimum::<_, f64>(&big), Err(Error::SizeCap { .. })));
}

#[test]
fn sign_search_finds_valid_placements() {
    let placements = search_monogamy_signs(&[vec![0, 1, 2], vec![0, 1, 3]], 1e-7).unwrap();
    assert!(placements.iter().any(|p| p.valid));
    assert!(placements.iter().any(|p| !p.valid));
    for p in &placements {
        assert_eq!(p.valid, p.ns_minimum >= -1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_bound_dominates_no_signaling(minus in proptest::option::of(0usize..3), d in 2usize..=3, swapped: bool) {
        let e = build_separation_bell(&[0, 1, 2], minus).unwrap();
        let lr = lr_minimum::<_, f64>(&e).unwrap().value;
        let ns = ns_minimum::<_, f64>(&e).unwrap().value;
        prop_assert!(lr >= ns - 1e-9);
        let zg = build_zg_svetlichny(d, swapped).unwrap();
        let lr = lr_minimum::<_, f64>(&zg).unwrap().value;
        let ns = ns_minimum::<_, f64>(&zg).unwrap().value;
        prop_assert!(lr >= ns - 1e-9);
    }

    #[test]
    fn mixtures_stay_above_no_signaling_minimum(seed in any::<u64>(), weight in 0.0f64..=1.0) {
        let e = build_separation_bell(&[0, 1, 2], None).unwrap();
        let opt = ns_minimum::<_, f64>(&e).unwrap();
        let mut r = rng(seed);
        let local = random_local(&mut r, Scenario::binary(3).unwrap(), 4);
        let mix = Behavior::mixture(&[(weight, &opt.optimizer), (1.0 - weight, &local)]).unwrap();
        let report = validate_no_signaling(&mix, 1e-9).unwrap();
        prop_assert!(report.pass);
        let v = evaluate(&e, &mix).unwrap();
        let expected = weight * opt.value + (1.0 - weight) * evaluate(&e, &local).unwrap();
        prop_assert!((v - expected).abs() < 1e-9);
        prop_assert!(v >= opt.value - 1e-9);
    }

    #[test]
    fn local_behaviors_respect_local_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 2).unwrap();
        let b = random_local(&mut r, Scenario::binary(4).unwrap(), 3);
        for s in m.summands() {
            prop_assert!(evaluate(s, &b).unwrap() >= -1e-12);
        }
    }
}
