use std::fmt;
use std::str::FromStr;

use super::{BellExpression, MonogamyExpression, Sign, SignedTerm, Term};
use crate::error::{Error, Result};
use crate::prob::{party_name, Scenario, Setting};
use crate::separation::{Direction, Measurement, QuasiTerm, SeparationTerm};

fn label_for(parties: &[usize]) -> String {
    let names: String = parties.iter().map(|&p| party_name(p)).collect();
    format!("B_{names}")
}

fn scenario_for(parties: &[usize], outcomes: usize) -> Result<Scenario> {
    let max = parties
        .iter()
        .max()
        .ok_or_else(|| Error::Input("empty party list".into()))?;
    Scenario::new((max + 1).max(2), outcomes)
}

fn check_party_list(parties: &[usize]) -> Result<()> {
    let mut sorted = parties.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != parties.len() {
        return Err(Error::Input(format!("repeated party in {parties:?}")));
    }
    Ok(())
}

/// Setting patterns of the N-party separation inequality, in term order:
/// the N cyclic shifts of `(1,2,…,2)`, then `(2,…,2)` for even N, then the
/// all-ones pattern (the default negative term) last.
pub fn standard_patterns(n: usize) -> Vec<Vec<Setting>> {
    let mut patterns: Vec<Vec<Setting>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Setting::FIRST } else { Setting::SECOND })
                .collect()
        })
        .collect();
    if n.is_multiple_of(2) {
        patterns.push(vec![Setting::SECOND; n]);
    }
    patterns.push(vec![Setting::FIRST; n]);
    patterns
}

fn separation_terms(parties: &[usize], patterns: &[Vec<Setting>]) -> Result<Vec<Term>> {
    patterns
        .iter()
        .map(|pattern| {
            let events = parties
                .iter()
                .zip(pattern)
                .map(|(&p, &s)| Measurement::new(p, s))
                .collect();
            Ok(Term::Separation(SeparationTerm::new(events)?))
        })
        .collect()
}

/// N-party separation inequality over `parties` (in pattern order).
///
/// `minus_position` picks which term is negative; `None` is the all-ones
/// term. Any other choice swaps the minus onto that term and makes the
/// all-ones term positive.
pub fn build_separation_bell(parties: &[usize], minus_position: Option<usize>) -> Result<BellExpression> {
    let n = parties.len();
    if n < 3 {
        return Err(Error::Unsupported(format!(
            "separation inequalities need N >= 3 parties, got {n}"
        )));
    }
    check_party_list(parties)?;
    let patterns = standard_patterns(n);
    let minus = minus_position.unwrap_or(patterns.len() - 1);
    if minus >= patterns.len() {
        return Err(Error::Input(format!(
            "minus position {minus} out of range for {} terms",
            patterns.len()
        )));
    }
    let terms = separation_terms(parties, &patterns)?
        .into_iter()
        .enumerate()
        .map(|(i, term)| SignedTerm {
            sign: if i == minus { Sign::Minus } else { Sign::Plus },
            term,
        })
        .collect();
    BellExpression::new(label_for(parties), scenario_for(parties, 2)?, terms)
}

/// Separation inequality whose single negative term has the given settings.
///
/// When the pattern belongs to the standard term set this is the plain
/// minus swap. Otherwise the standard inequality is relabeled (settings
/// `1↔2`) on every party whose pattern entry is `2`, which carries the
/// all-ones term onto the pattern; relabeling local settings preserves the
/// local bound.
pub fn separation_bell_with_minus_term(parties: &[usize], minus: &[Setting]) -> Result<BellExpression> {
    let n = parties.len();
    if minus.len() != n {
        return Err(Error::Input(format!(
            "minus pattern has {} settings for {n} parties",
            minus.len()
        )));
    }
    let standard = standard_patterns(n);
    if let Some(pos) = standard.iter().position(|p| p.as_slice() == minus) {
        return build_separation_bell(parties, Some(pos));
    }
    check_party_list(parties)?;
    let relabeled: Vec<Vec<Setting>> = standard
        .iter()
        .map(|p| {
            p.iter()
                .zip(minus)
                .map(|(&s, &m)| if m == Setting::SECOND { s.flipped() } else { s })
                .collect()
        })
        .collect();
    let last = relabeled.len() - 1;
    let terms = separation_terms(parties, &relabeled)?
        .into_iter()
        .enumerate()
        .map(|(i, term)| SignedTerm {
            sign: if i == last { Sign::Minus } else { Sign::Plus },
            term,
        })
        .collect();
    BellExpression::new(label_for(parties), scenario_for(parties, 2)?, terms)
}

fn quasi(
    lhs: [(usize, Setting); 2],
    rhs: (usize, Setting),
    direction: Direction,
) -> Result<Term> {
    let lhs = lhs.iter().map(|&(p, s)| Measurement::new(p, s)).collect();
    Ok(Term::Quasi(QuasiTerm::new(lhs, Measurement::new(rhs.0, rhs.1), direction)?))
}

const S1: Setting = Setting::FIRST;
const S2: Setting = Setting::SECOND;

/// Tripartite d-outcome inequality on parties A, B, C.
pub fn build_zg_svetlichny(d: usize, direction_swapped: bool) -> Result<BellExpression> {
    build_zg_svetlichny_on([0, 1, 2], d, direction_swapped)
}

/// The eight quasi-distance terms, signs `(+,+,+,−,+,+,+,−)`:
///
/// ```text
/// P([A1+B2]<C2) + P(C2<[A2+B1]) + P([A2+B1]<C1) − P([A1+B2]<C1)
/// P([A1+B1]<C2) + P(C2<[A2+B2]) + P([A2+B2]<C1) − P([A1+B1]<C1)
/// ```
///
/// `direction_swapped` turns every `<` into `>`.
pub fn build_zg_svetlichny_on(parties: [usize; 3], d: usize, direction_swapped: bool) -> Result<BellExpression> {
    if d < 2 {
        return Err(Error::Input(format!("need d >= 2, got {d}")));
    }
    check_party_list(&parties)?;
    let [a, b, c] = parties;
    let lt = if direction_swapped {
        Direction::RhsLessThanLhs
    } else {
        Direction::LhsLessThanRhs
    };
    let gt = lt.flipped();
    let mut terms = Vec::with_capacity(8);
    for bob_first in [S2, S1] {
        let bob_second = bob_first.flipped();
        terms.push(SignedTerm::plus(quasi([(a, S1), (b, bob_first)], (c, S2), lt)?));
        terms.push(SignedTerm::plus(quasi([(a, S2), (b, bob_second)], (c, S2), gt)?));
        terms.push(SignedTerm::plus(quasi([(a, S2), (b, bob_second)], (c, S1), lt)?));
        terms.push(SignedTerm::minus(quasi([(a, S1), (b, bob_first)], (c, S1), lt)?));
    }
    let label = format!(
        "ZG_{}{}{}{}",
        party_name(a),
        party_name(b),
        party_name(c),
        if direction_swapped { "_swapped" } else { "" }
    );
    BellExpression::new(label, scenario_for(&parties, d)?, terms)
}

/// Second summand of the d-outcome primary monogamy, over parties
/// `(a, b, x)` with `x` the party that replaces C:
///
/// ```text
/// P(X2<[A1+B2]) − P(X2<[A2+B1]) + P(X1<[A2+B1]) + P([A1+B2]<X1)
/// P(X2<[A1+B1]) − P(X2<[A2+B2]) + P(X1<[A2+B2]) + P([A1+B1]<X1)
/// ```
pub fn zg_companion(parties: [usize; 3], d: usize) -> Result<BellExpression> {
    if d < 2 {
        return Err(Error::Input(format!("need d >= 2, got {d}")));
    }
    check_party_list(&parties)?;
    let [a, b, x] = parties;
    let lt = Direction::LhsLessThanRhs;
    let gt = Direction::RhsLessThanLhs;
    let mut terms = Vec::with_capacity(8);
    for bob_first in [S2, S1] {
        let bob_second = bob_first.flipped();
        terms.push(SignedTerm::plus(quasi([(a, S1), (b, bob_first)], (x, S2), gt)?));
        terms.push(SignedTerm::minus(quasi([(a, S2), (b, bob_second)], (x, S2), gt)?));
        terms.push(SignedTerm::plus(quasi([(a, S2), (b, bob_second)], (x, S1), gt)?));
        terms.push(SignedTerm::plus(quasi([(a, S1), (b, bob_first)], (x, S1), lt)?));
    }
    let label = format!("ZG_{}{}{}_companion", party_name(a), party_name(b), party_name(x));
    BellExpression::new(label, scenario_for(&parties, d)?, terms)
}

/// Named monogamy compositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `B_ABC + B_ABD` with the ABD minus on `A2B1D2`.
    PrimaryAbcAbd,
    /// `B_ABC + B_ABD + B_ACD`, minus terms on `111`, `A1B2D2`, `A2C1D2`.
    Strong3FourParty,
    /// The strong triple plus `B_BCD` with minus on `B1C2D2`.
    Full4FourParty,
    /// Four five-party inequalities over six parties, A and B shared.
    DivisionN5Ab,
    /// d-outcome inequality on ABC plus its companion on ABD.
    PrimaryQuasi,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::PrimaryAbcAbd,
        Preset::Strong3FourParty,
        Preset::Full4FourParty,
        Preset::DivisionN5Ab,
        Preset::PrimaryQuasi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PrimaryAbcAbd => "primary_ABC_ABD",
            Preset::Strong3FourParty => "strong3_4party",
            Preset::Full4FourParty => "full4_4party",
            Preset::DivisionN5Ab => "division_N5_AB",
            Preset::PrimaryQuasi => "primary_quasi",
        }
    }

    pub fn pool_size(self) -> usize {
        match self {
            Preset::DivisionN5Ab => 6,
            _ => 4,
        }
    }

    pub fn is_quasi(self) -> bool {
        self == Preset::PrimaryQuasi
    }

    pub fn default_pool(self) -> Vec<usize> {
        (0..self.pool_size()).collect()
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

fn settings(labels: &str) -> Vec<Setting> {
    labels
        .bytes()
        .map(|b| if b == b'1' { S1 } else { S2 })
        .collect()
}

/// Builds a preset over `pool` (party indices, in role order A, B, C, …).
/// `outcomes` must be 2 for the separation presets.
pub fn compose_monogamy(preset: Preset, pool: &[usize], outcomes: usize) -> Result<MonogamyExpression> {
    if pool.len() != preset.pool_size() {
        return Err(Error::Input(format!(
            "preset {preset} needs {} parties, got {}",
            preset.pool_size(),
            pool.len()
        )));
    }
    check_party_list(pool)?;
    if !preset.is_quasi() && outcomes != 2 {
        return Err(Error::Unsupported(format!("preset {preset} is binary-outcome only")));
    }
    let sc = scenario_for(pool, outcomes)?;
    let sub = |roles: &[usize]| -> Vec<usize> { roles.iter().map(|&r| pool[r]).collect() };
    let (a, b, c, d) = (0, 1, 2, 3);
    let summands = match preset {
        Preset::PrimaryAbcAbd => vec![
            build_separation_bell(&sub(&[a, b, c]), None)?,
            build_separation_bell(&sub(&[a, b, d]), Some(1))?,
        ],
        Preset::Strong3FourParty | Preset::Full4FourParty => {
            let mut s = vec![
                build_separation_bell(&sub(&[a, b, c]), None)?,
                build_separation_bell(&sub(&[a, b, d]), Some(0))?,
                build_separation_bell(&sub(&[a, c, d]), Some(1))?,
            ];
            if preset == Preset::Full4FourParty {
                s.push(build_separation_bell(&sub(&[b, c, d]), Some(0))?);
            }
            s
        }
        Preset::DivisionN5Ab => {
            let (e, f) = (4, 5);
            vec![
                separation_bell_with_minus_term(&sub(&[a, b, c, d, e]), &settings("11111"))?,
                separation_bell_with_minus_term(&sub(&[a, b, c, d, f]), &settings("22121"))?,
                separation_bell_with_minus_term(&sub(&[a, b, c, e, f]), &settings("22212"))?,
                separation_bell_with_minus_term(&sub(&[a, b, d, e, f]), &settings("22122"))?,
            ]
        }
        Preset::PrimaryQuasi => vec![
            build_zg_svetlichny_on([pool[a], pool[b], pool[c]], outcomes, false)?,
            zg_companion([pool[a], pool[b], pool[d]], outcomes)?,
        ],
    };
    let summands = summands
        .into_iter()
        .map(|s| s.with_scenario(sc))
        .collect::<Result<Vec<_>>>()?;
    MonogamyExpression::new(preset.name(), summands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::TermSum;

    fn rendered(e: &BellExpression) -> Vec<String> {
        e.terms().iter().map(ToString::to_string).collect()
    }

    #[test]
    fn tripartite_default() {
        let e = build_separation_bell(&[0, 1, 2], None).unwrap();
        assert_eq!(rendered(&e), ["+A1B2C2", "+A2B1C2", "+A2B2C1", "-A1B1C1"]);
        assert_eq!(e.negative_count(), 1);
    }

    #[test]
    fn tripartite_swapped_minus() {
        let e = build_separation_bell(&[0, 1, 3], Some(0)).unwrap();
        assert_eq!(rendered(&e), ["-A1B2D2", "+A2B1D2", "+A2B2D1", "+A1B1D1"]);
        assert_eq!(e.label(), "B_ABD");
    }

    #[test]
    fn four_party_has_six_terms() {
        let e = build_separation_bell(&[0, 1, 2, 3], None).unwrap();
        assert_eq!(e.terms().len(), 6);
        assert_eq!(e.negative_count(), 1);
        assert_eq!(e.terms()[4].to_string(), "+A2B2C2D2");
        assert_eq!(e.terms()[5].to_string(), "-A1B1C1D1");
    }

    #[test]
    fn term_counts_by_parity() {
        for n in 3..=7 {
            let parties: Vec<usize> = (0..n).collect();
            let e = build_separation_bell(&parties, None).unwrap();
            let expected = if n % 2 == 1 { n + 1 } else { n + 2 };
            assert_eq!(e.terms().len(), expected);
        }
    }

    #[test]
    fn odd_n_second_settings_appear_evenly() {
        for n in [3, 5, 7] {
            let x = &standard_patterns(n)[..n];
            for party in 0..n {
                let count = x.iter().filter(|p| p[party] == Setting::SECOND).count();
                assert_eq!(count % 2, 0, "party {party} for N = {n}");
            }
        }
    }

    #[test]
    fn builder_errors() {
        assert!(matches!(build_separation_bell(&[0, 1], None), Err(Error::Unsupported(_))));
        assert!(matches!(build_separation_bell(&[0, 1, 2], Some(4)), Err(Error::Input(_))));
        assert!(build_separation_bell(&[0, 1, 1], None).is_err());
        assert!(build_zg_svetlichny(1, false).is_err());
    }

    #[test]
    fn zg_terms() {
        let e = build_zg_svetlichny(2, false).unwrap();
        assert_eq!(
            rendered(&e),
            [
                "+P([A1+B2]<C2)",
                "+P(C2<[A2+B1])",
                "+P([A2+B1]<C1)",
                "-P([A1+B2]<C1)",
                "+P([A1+B1]<C2)",
                "+P(C2<[A2+B2])",
                "+P([A2+B2]<C1)",
                "-P([A1+B1]<C1)",
            ]
        );
        let swapped = build_zg_svetlichny(2, true).unwrap();
        assert_eq!(swapped.terms()[0].to_string(), "+P(C2<[A1+B2])");
        assert_eq!(swapped.negative_count(), 2);
    }

    #[test]
    fn primary_monogamy_terms() {
        let m = compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 2).unwrap();
        let terms: Vec<String> = m.terms().map(ToString::to_string).collect();
        assert_eq!(
            terms,
            [
                "+A1B2C2", "+A2B1C2", "+A2B2C1", "-A1B1C1", "+A1B2D2", "-A2B1D2", "+A2B2D1", "+A1B1D1"
            ]
        );
    }

    #[test]
    fn strong_and_full_presets() {
        let m = compose_monogamy(Preset::Strong3FourParty, &[0, 1, 2, 3], 2).unwrap();
        let minus: Vec<String> = m
            .terms()
            .filter(|t| t.sign == Sign::Minus)
            .map(|t| t.term.to_string())
            .collect();
        assert_eq!(minus, ["A1B1C1", "A1B2D2", "A2C1D2"]);
        let full = compose_monogamy(Preset::Full4FourParty, &[0, 1, 2, 3], 2).unwrap();
        assert_eq!(full.summands().len(), 4);
        assert_eq!(full.terms().count(), 16);
        assert_eq!(
            rendered(&full.summands()[3]),
            ["-B1C2D2", "+B2C1D2", "+B2C2D1", "+B1C1D1"]
        );
    }

    #[test]
    fn division_preset_minus_terms() {
        let m = compose_monogamy(Preset::DivisionN5Ab, &[0, 1, 2, 3, 4, 5], 2).unwrap();
        assert_eq!(m.summands().len(), 4);
        let minus: Vec<String> = m
            .summands()
            .iter()
            .map(|s| {
                assert_eq!(s.negative_count(), 1);
                assert_eq!(s.terms().len(), 6);
                s.terms()
                    .iter()
                    .find(|t| t.sign == Sign::Minus)
                    .unwrap()
                    .term
                    .to_string()
            })
            .collect();
        assert_eq!(minus, ["A1B1C1D1E1", "A2B2C1D2F1", "A2B2C2E1F2", "A2B2D1E2F2"]);
        // Remaining-party settings of the minus terms.
        let rest: Vec<String> = minus
            .iter()
            .map(|t| t.chars().skip(4).filter(|c| c.is_ascii_digit()).collect())
            .collect();
        assert_eq!(rest, ["111", "121", "212", "122"]);
        assert_eq!(m.scenario().parties(), 6);
    }

    #[test]
    fn relabeled_minus_term_keeps_structure() {
        let pattern = settings("22121");
        let e = separation_bell_with_minus_term(&[0, 1, 2, 3, 5], &pattern).unwrap();
        assert_eq!(e.terms().len(), 6);
        assert_eq!(e.terms()[5].to_string(), "-A2B2C1D2F1");
        // Pattern already in the standard set: a plain swap.
        let swap = separation_bell_with_minus_term(&[0, 1, 2], &settings("122")).unwrap();
        assert_eq!(swap, build_separation_bell(&[0, 1, 2], Some(0)).unwrap());
    }

    #[test]
    fn quasi_preset() {
        let m = compose_monogamy(Preset::PrimaryQuasi, &[0, 1, 2, 3], 3).unwrap();
        assert_eq!(m.scenario().outcomes(), 3);
        assert_eq!(
            rendered(&m.summands()[1]),
            [
                "+P(D2<[A1+B2])",
                "-P(D2<[A2+B1])",
                "+P(D1<[A2+B1])",
                "+P([A1+B2]<D1)",
                "+P(D2<[A1+B1])",
                "-P(D2<[A2+B2])",
                "+P(D1<[A2+B2])",
                "+P([A1+B1]<D1)",
            ]
        );
    }

    #[test]
    fn preset_errors() {
        assert!(matches!("nope".parse::<Preset>(), Err(Error::UnknownPreset(_))));
        assert!(compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2], 2).is_err());
        assert!(compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 3).is_err());
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }
}
