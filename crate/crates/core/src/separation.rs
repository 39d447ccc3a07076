//! Statistical separation (probability of an N-event symmetric difference)
//! and the directed d-outcome quasi-distance.
//!
//! Event convention for binary outcomes: a party's event "occurs" when it
//! reports encoded outcome `1` (physical `+1`). The N-event separation is the
//! probability that an odd number of the events occur, which reduces to
//! `P(A)+P(B)-2P(A∩B)` for two events and to the four-atom union for three.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result, ValidationError};
use crate::prob::{parse_party, party_name, Behavior, Scenario, Setting};
use crate::scalar::Scalar;

/// One party measured at one setting, written `A1`, `C2`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Measurement {
    pub party: usize,
    pub setting: Setting,
}

impl Measurement {
    pub fn new(party: usize, setting: Setting) -> Self {
        Measurement { party, setting }
    }

    /// From a party index and the external setting label `1`/`2`.
    pub fn labeled(party: usize, label: u8) -> Result<Self> {
        Ok(Measurement::new(party, Setting::from_label(label)?))
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", party_name(self.party), self.setting)
    }
}

/// Splits `A1B2C1` into measurements.
pub fn parse_measurements(text: &str) -> Result<Vec<Measurement>> {
    let bad = || Error::Input(format!("cannot parse measurements from `{text}`"));
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() || !chars.len().is_multiple_of(2) {
        return Err(bad());
    }
    chars
        .chunks(2)
        .map(|pair| {
            let party = parse_party(&pair[0].to_string())?;
            let label = pair[1].to_digit(10).ok_or_else(bad)?;
            Measurement::labeled(party, label as u8)
        })
        .collect()
}

fn check_distinct(parties: impl IntoIterator<Item = usize>) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for p in parties {
        if !seen.insert(p) {
            return Err(Error::Input(format!("party {} appears twice in a term", party_name(p))));
        }
    }
    Ok(())
}

/// `P(X₁ ⊕ X₂ ⊕ …)` over distinct parties, written `A1B2C2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeparationTerm {
    events: Vec<Measurement>,
}

impl SeparationTerm {
    /// Events are stored sorted by party.
    pub fn new(mut events: Vec<Measurement>) -> Result<Self> {
        if events.len() < 2 {
            return Err(Error::Input("a separation term needs at least two events".into()));
        }
        events.sort();
        check_distinct(events.iter().map(|m| m.party))?;
        Ok(SeparationTerm { events })
    }

    /// From `(party, setting label)` pairs.
    pub fn from_labels(pairs: &[(usize, u8)]) -> Result<Self> {
        let events = pairs
            .iter()
            .map(|&(p, s)| Measurement::labeled(p, s))
            .collect::<Result<Vec<_>>>()?;
        SeparationTerm::new(events)
    }

    pub fn events(&self) -> &[Measurement] {
        &self.events
    }

    pub fn arity(&self) -> usize {
        self.events.len()
    }

    /// Whether an odd number of the events occur for the given outcomes.
    pub fn holds(&self, outcome: impl Fn(Measurement) -> usize) -> bool {
        self.events.iter().filter(|&&m| outcome(m) == 1).count() % 2 == 1
    }
}

impl fmt::Display for SeparationTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.events.iter().try_for_each(|m| write!(f, "{m}"))
    }
}

impl FromStr for SeparationTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeparationTerm::new(parse_measurements(s)?)
    }
}

/// Which side of a quasi-distance term is the smaller one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `P([lhs] < rhs)`
    LhsLessThanRhs,
    /// `P(rhs < [lhs])`
    RhsLessThanLhs,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::LhsLessThanRhs => Direction::RhsLessThanLhs,
            Direction::RhsLessThanLhs => Direction::LhsLessThanRhs,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LhsLessThanRhs => "lhs<rhs",
            Direction::RhsLessThanLhs => "rhs<lhs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lhs<rhs" => Ok(Direction::LhsLessThanRhs),
            "rhs<lhs" => Ok(Direction::RhsLessThanLhs),
            other => Err(Error::Input(format!("unknown direction `{other}`"))),
        }
    }
}

/// Directed comparison between a sum of outcomes modulo `d` and a single
/// outcome, e.g. `P([A1+B2] < C2)`. Not symmetric.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuasiTerm {
    lhs: Vec<Measurement>,
    rhs: Measurement,
    direction: Direction,
}

impl QuasiTerm {
    pub fn new(lhs: Vec<Measurement>, rhs: Measurement, direction: Direction) -> Result<Self> {
        if lhs.is_empty() {
            return Err(Error::Input("quasi term needs a nonempty sum".into()));
        }
        check_distinct(lhs.iter().map(|m| m.party).chain(std::iter::once(rhs.party)))?;
        Ok(QuasiTerm { lhs, rhs, direction })
    }

    pub fn lhs(&self) -> &[Measurement] {
        &self.lhs
    }

    pub fn rhs(&self) -> Measurement {
        self.rhs
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn measurements(&self) -> impl Iterator<Item = Measurement> + '_ {
        self.lhs.iter().copied().chain(std::iter::once(self.rhs))
    }

    pub fn with_direction(&self, direction: Direction) -> Self {
        QuasiTerm {
            direction,
            ..self.clone()
        }
    }

    /// Evaluates the strict comparison on residues `0..d`.
    pub fn holds(&self, outcome: impl Fn(Measurement) -> usize, d: usize) -> bool {
        let sum = self.lhs.iter().map(|&m| outcome(m)).sum::<usize>() % d;
        let single = outcome(self.rhs);
        match self.direction {
            Direction::LhsLessThanRhs => sum < single,
            Direction::RhsLessThanLhs => single < sum,
        }
    }

    /// `[A1+B2]` for a sum, `A1` for a single measurement.
    pub fn lhs_label(&self) -> String {
        sum_label(&self.lhs)
    }
}

pub(crate) fn sum_label(ms: &[Measurement]) -> String {
    if ms.len() == 1 {
        ms[0].to_string()
    } else {
        let inner: Vec<String> = ms.iter().map(ToString::to_string).collect();
        format!("[{}]", inner.join("+"))
    }
}

impl fmt::Display for QuasiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::LhsLessThanRhs => write!(f, "{}<{}", self.lhs_label(), self.rhs),
            Direction::RhsLessThanLhs => write!(f, "{}<{}", self.rhs, self.lhs_label()),
        }
    }
}

fn parse_sum(text: &str) -> Result<Vec<Measurement>> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .unwrap_or(text);
    let parts = inner
        .split('+')
        .map(|p| {
            let ms = parse_measurements(p.trim())?;
            match ms.as_slice() {
                [m] => Ok(*m),
                _ => Err(Error::Input(format!("`{p}` is not a single measurement"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts)
}

impl FromStr for QuasiTerm {
    type Err = Error;

    /// Parses `[A1+B2]<C2` or `C2<[A2+B1]`; the bracketed side is the sum.
    fn from_str(s: &str) -> Result<Self> {
        let (left, right) = s
            .split_once('<')
            .ok_or_else(|| Error::Input(format!("quasi term `{s}` lacks `<`")))?;
        let (left, right) = (left.trim(), right.trim());
        let single = |side: Vec<Measurement>| match side.as_slice() {
            [m] => Ok(*m),
            _ => Err(Error::Input(format!("quasi term `{s}` compares two sums"))),
        };
        if right.starts_with('[') {
            if left.starts_with('[') {
                return Err(Error::Input(format!("quasi term `{s}` compares two sums")));
            }
            QuasiTerm::new(parse_sum(right)?, single(parse_sum(left)?)?, Direction::RhsLessThanLhs)
        } else {
            QuasiTerm::new(parse_sum(left)?, single(parse_sum(right)?)?, Direction::LhsLessThanRhs)
        }
    }
}

fn check_parties(scenario: &Scenario, ms: impl IntoIterator<Item = Measurement>) -> Result<()> {
    for m in ms {
        if m.party >= scenario.parties() {
            return Err(Error::Input(format!(
                "party {} is not part of a {}-party scenario",
                party_name(m.party),
                scenario.parties()
            )));
        }
    }
    Ok(())
}

/// Setting tuple in which the listed measurements are made and every other
/// party uses `fill`.
pub(crate) fn context_index(
    scenario: &Scenario,
    ms: impl IntoIterator<Item = Measurement>,
    fill: Setting,
) -> usize {
    let mut settings = vec![fill; scenario.parties()];
    for m in ms {
        settings[m.party] = m.setting;
    }
    scenario.setting_index(&settings)
}

fn sum_where<T: Scalar>(
    behavior: &Behavior<T>,
    setting_index: usize,
    holds: impl Fn(usize) -> bool,
) -> T {
    behavior
        .context(setting_index)
        .iter()
        .enumerate()
        .filter(|(o, _)| holds(*o))
        .fold(T::zero(), |acc, (_, p)| acc + p.clone())
}

/// `P(odd number of the term's events occur)` in the context fixed by the
/// term, with absent parties measured at `fill` and marginalized.
pub fn separation_value<T: Scalar>(
    behavior: &Behavior<T>,
    term: &SeparationTerm,
    fill: Setting,
) -> Result<T> {
    let sc = behavior.scenario();
    if sc.outcomes() != 2 {
        return Err(Error::Unsupported(format!(
            "separation needs binary outcomes, scenario has d = {}",
            sc.outcomes()
        )));
    }
    check_parties(sc, term.events().iter().copied())?;
    let s = context_index(sc, term.events().iter().copied(), fill);
    Ok(sum_where(behavior, s, |o| term.holds(|m| sc.outcome_of(o, m.party))))
}

/// Quasi-distance with absent parties at setting 1.
pub fn quasi_value<T: Scalar>(behavior: &Behavior<T>, term: &QuasiTerm) -> Result<T> {
    quasi_value_with_fill(behavior, term, Setting::FIRST)
}

pub fn quasi_value_with_fill<T: Scalar>(
    behavior: &Behavior<T>,
    term: &QuasiTerm,
    fill: Setting,
) -> Result<T> {
    let sc = behavior.scenario();
    check_parties(sc, term.measurements())?;
    let d = sc.outcomes();
    let s = context_index(sc, term.measurements(), fill);
    Ok(sum_where(behavior, s, |o| term.holds(|m| sc.outcome_of(o, m.party), d)))
}

/// Joint distribution over `n` binary events; atom `i` has bit `k` set when
/// event `k` occurs.
#[derive(Clone, Debug, PartialEq)]
pub struct EventDistribution {
    events: usize,
    probs: Vec<f64>,
}

impl EventDistribution {
    pub fn new(events: usize, probs: Vec<f64>) -> Result<Self, ValidationError> {
        let expected = 1usize << events;
        if probs.len() != expected {
            return Err(ValidationError::DistributionSize {
                n: events,
                expected,
                actual: probs.len(),
            });
        }
        check_distribution(&probs)?;
        Ok(EventDistribution { events, probs })
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Separation of a subset of the events. Repeated indices cancel in pairs.
    pub fn separation_of(&self, subset: &[usize]) -> f64 {
        let mask = subset.iter().fold(0usize, |m, &k| m ^ (1 << k));
        self.probs
            .iter()
            .enumerate()
            .filter(|(atom, _)| (atom & mask).count_ones() % 2 == 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// `P(A ∩ B ∩ …)` for a subset of events.
    pub fn intersection(&self, subset: &[usize]) -> f64 {
        let mask = subset.iter().fold(0usize, |m, &k| m | (1 << k));
        self.probs
            .iter()
            .enumerate()
            .filter(|(atom, _)| atom & mask == mask)
            .map(|(_, p)| p)
            .sum()
    }

    /// Relabels events: event `j` of the result is event `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for (atom, p) in self.probs.iter().enumerate() {
            let new_atom = perm
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &old)| acc | (((atom >> old) & 1) << j));
            probs[new_atom] += p;
        }
        EventDistribution {
            events: self.events,
            probs,
        }
    }
}

fn check_distribution(probs: &[f64]) -> Result<(), ValidationError> {
    if let Some(&p) = probs.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(ValidationError::Negative {
            settings: String::new(),
            outcomes: String::new(),
            value: p,
        });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > crate::prob::NUMERIC_TOL {
        return Err(ValidationError::Unnormalized { sum });
    }
    Ok(())
}

/// Probability that an odd number of all events in `dist` occur.
pub fn event_space_separation(dist: &EventDistribution) -> f64 {
    let all: Vec<usize> = (0..dist.events()).collect();
    dist.separation_of(&all)
}

/// Joint distribution over `n` variables with outcomes `0..d`; variable 0
/// is the most significant digit of the atom index.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularDistribution {
    outcomes: usize,
    variables: usize,
    probs: Vec<f64>,
}

impl ModularDistribution {
    pub fn new(outcomes: usize, variables: usize, probs: Vec<f64>) -> Result<Self, ValidationError> {
        let expected = outcomes.pow(variables as u32);
        if probs.len() != expected {
            return Err(ValidationError::DistributionSize {
                n: variables,
                expected,
                actual: probs.len(),
            });
        }
        check_distribution(&probs)?;
        Ok(ModularDistribution {
            outcomes,
            variables,
            probs,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    fn value_of(&self, atom: usize, var: usize) -> usize {
        (atom / self.outcomes.pow((self.variables - 1 - var) as u32)) % self.outcomes
    }

    fn residue(&self, atom: usize, vars: &[usize]) -> usize {
        vars.iter().map(|&v| self.value_of(atom, v)).sum::<usize>() % self.outcomes
    }

    /// `P([Σ smaller] < [Σ larger])` with both sides reduced modulo `d`.
    pub fn prob_less(&self, smaller: &[usize], larger: &[usize]) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(atom, _)| self.residue(*atom, smaller) < self.residue(*atom, larger))
            .map(|(_, p)| p)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{behavior_from_strategy, DeterministicStrategy, ANALYTIC_TOL};
    use crate::scalar::Rational;

    fn term(s: &str) -> SeparationTerm {
        s.parse().unwrap()
    }

    fn quasi(s: &str) -> QuasiTerm {
        s.parse().unwrap()
    }

    #[test]
    fn measurement_parsing() {
        let ms = parse_measurements("A1B2C2").unwrap();
        assert_eq!(ms.len(), 3);
        assert_eq!(ms[1], Measurement::labeled(1, 2).unwrap());
        assert!(parse_measurements("A3").is_err());
        assert!(parse_measurements("A").is_err());
        assert!(parse_measurements("a1").is_err());
        assert_eq!(term("C1A2B2").to_string(), "A2B2C1");
    }

    #[test]
    fn separation_term_invariants() {
        assert!("A1A2".parse::<SeparationTerm>().is_err());
        assert!("A1".parse::<SeparationTerm>().is_err());
        assert_eq!(term("A1B2C2D1").arity(), 4);
    }

    #[test]
    fn quasi_term_round_trip() {
        for text in ["[A1+B2]<C2", "C2<[A2+B1]", "[A1+B1]<D1", "D2<[A1+B2]"] {
            let q = quasi(text);
            assert_eq!(q.to_string(), text);
        }
        let q = quasi("C2<[A2+B1]");
        assert_eq!(q.direction(), Direction::RhsLessThanLhs);
        assert_eq!(q.rhs(), Measurement::labeled(2, 2).unwrap());
        assert!("[A1+B1]<[C1+D1]".parse::<QuasiTerm>().is_err());
        assert!("[A1+A2]<C1".parse::<QuasiTerm>().is_err());
    }

    #[test]
    fn uniform_separation_is_half() {
        let b = Behavior::<Rational>::uniform(Scenario::binary(3).unwrap());
        let v = separation_value(&b, &term("A1B1C1"), Setting::FIRST).unwrap();
        assert_eq!(v, Rational::ratio(1, 2));
    }

    #[test]
    fn all_ones_strategy_has_separation_one() {
        let sc = Scenario::binary(3).unwrap();
        let b: Behavior<f64> =
            behavior_from_strategy(&DeterministicStrategy::new(vec![[1, 1]; 3]), sc).unwrap();
        for t in ["A1B1C1", "A2B1C2", "A2B2C2"] {
            assert_eq!(separation_value(&b, &term(t), Setting::FIRST).unwrap(), 1.0);
        }
        // Two events: even count, separation 0.
        assert_eq!(separation_value(&b, &term("A1B2"), Setting::SECOND).unwrap(), 0.0);
    }

    #[test]
    fn two_event_separation_matches_inclusion_exclusion() {
        let sc = Scenario::binary(2).unwrap();
        let ctx = [0.1, 0.2, 0.3, 0.4];
        let table: Vec<f64> = ctx.repeat(4);
        let b = Behavior::from_table(sc, table, ANALYTIC_TOL).unwrap();
        let pa = ctx[2] + ctx[3];
        let pb = ctx[1] + ctx[3];
        let pab = ctx[3];
        let v = separation_value(&b, &term("A1B1"), Setting::FIRST).unwrap();
        assert!((v - (pa + pb - 2.0 * pab)).abs() < 1e-15);
    }

    #[test]
    fn separation_rejects_bad_inputs() {
        let b3 = Behavior::<f64>::uniform(Scenario::new(3, 3).unwrap());
        assert!(matches!(
            separation_value(&b3, &term("A1B1C1"), Setting::FIRST),
            Err(Error::Unsupported(_))
        ));
        let b2 = Behavior::<f64>::uniform(Scenario::binary(2).unwrap());
        assert!(matches!(
            separation_value(&b2, &term("A1B1C1"), Setting::FIRST),
            Err(Error::Input(_))
        ));
        assert!(quasi_value(&b2, &quasi("[A1+B1]<C1")).is_err());
    }

    #[test]
    fn quasi_examples() {
        let sc = Scenario::binary(3).unwrap();
        let zero: Behavior<Rational> =
            behavior_from_strategy(&DeterministicStrategy::new(vec![[0, 0]; 3]), sc).unwrap();
        assert_eq!(quasi_value(&zero, &quasi("[A1+B1]<C1")).unwrap(), Rational::from_int(0));

        let uniform = Behavior::<Rational>::uniform(sc);
        assert_eq!(quasi_value(&uniform, &quasi("[A1+B1]<C1")).unwrap(), Rational::ratio(1, 4));

        let c_one: Behavior<Rational> = behavior_from_strategy(
            &DeterministicStrategy::new(vec![[0, 0], [0, 0], [1, 1]]),
            sc,
        )
        .unwrap();
        assert_eq!(quasi_value(&c_one, &quasi("[A1+B1]<C1")).unwrap(), Rational::from_int(1));
        assert_eq!(quasi_value(&c_one, &quasi("C1<[A1+B1]")).unwrap(), Rational::from_int(0));
    }

    #[test]
    fn quasi_uses_strict_modular_comparison() {
        // d = 3, a = 2, b = 2 → [a+b] = 1; c = 1 is not strictly larger.
        let sc = Scenario::new(3, 3).unwrap();
        let strat = DeterministicStrategy::new(vec![[2, 2], [2, 2], [1, 2]]);
        let b: Behavior<f64> = behavior_from_strategy(&strat, sc).unwrap();
        assert_eq!(quasi_value(&b, &quasi("[A1+B1]<C1")).unwrap(), 0.0);
        assert_eq!(quasi_value(&b, &quasi("[A1+B1]<C2")).unwrap(), 1.0);
        assert_eq!(quasi_value(&b, &quasi("C1<[A1+B1]")).unwrap(), 0.0);
    }

    #[test]
    fn event_space_examples() {
        let indep = EventDistribution::new(2, vec![0.25; 4]).unwrap();
        assert_eq!(event_space_separation(&indep), 0.5);

        let same = EventDistribution::new(2, vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        assert_eq!(event_space_separation(&same), 0.0);

        // Atoms (1,0,0), (0,1,0), (0,0,1), (1,1,1).
        let mut probs = vec![0.0; 8];
        for atom in [0b001, 0b010, 0b100, 0b111] {
            probs[atom] = 0.25;
        }
        let odd = EventDistribution::new(3, probs).unwrap();
        assert_eq!(event_space_separation(&odd), 1.0);
    }

    #[test]
    fn event_space_rejects_unnormalized() {
        assert!(matches!(
            EventDistribution::new(2, vec![0.25, 0.25, 0.25, 0.2]),
            Err(ValidationError::Unnormalized { .. })
        ));
        assert!(EventDistribution::new(2, vec![0.5; 2]).is_err());
        assert!(EventDistribution::new(1, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn modular_prob_less_counts_strictly() {
        // Two fair independent bits: P(X < Y) = 1/4.
        let dist = ModularDistribution::new(2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(dist.prob_less(&[0], &[1]), 0.25);
        assert_eq!(dist.prob_less(&[0], &[0]), 0.0);
        // [X+Y] < X only when X=1, Y=1 → 0 < 1.
        assert_eq!(dist.prob_less(&[0, 1], &[0]), 0.25);
    }
}
