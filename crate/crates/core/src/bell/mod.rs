//! Bell expressions as signed lists of separation / quasi-distance terms,
//! monogamy sums of such expressions, and their numeric evaluation.

mod build;
mod json;

pub use build::{
    build_separation_bell, build_zg_svetlichny, build_zg_svetlichny_on, compose_monogamy,
    separation_bell_with_minus_term, standard_patterns, zg_companion, Preset,
};

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::prob::{party_name, Behavior, Scenario, Setting};
use crate::scalar::Scalar;
use crate::separation::{quasi_value_with_fill, separation_value, Measurement, QuasiTerm, SeparationTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::Input(format!("sign must be 1 or -1, got {other}"))),
        }
    }

    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Separation(SeparationTerm),
    Quasi(QuasiTerm),
}

impl Term {
    pub fn measurements(&self) -> Vec<Measurement> {
        match self {
            Term::Separation(t) => t.events().to_vec(),
            Term::Quasi(q) => q.measurements().collect(),
        }
    }

    /// Whether the term's event happens for the given outcomes.
    pub fn holds(&self, outcome: impl Fn(Measurement) -> usize, d: usize) -> bool {
        match self {
            Term::Separation(t) => t.holds(outcome),
            Term::Quasi(q) => q.holds(outcome, d),
        }
    }

    pub fn value<T: Scalar>(&self, behavior: &Behavior<T>, fill: Setting) -> Result<T> {
        match self {
            Term::Separation(t) => separation_value(behavior, t, fill),
            Term::Quasi(q) => quasi_value_with_fill(behavior, q, fill),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Separation(t) => write!(f, "{t}"),
            Term::Quasi(q) => write!(f, "P({q})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedTerm {
    pub sign: Sign,
    pub term: Term,
}

impl SignedTerm {
    pub fn plus(term: Term) -> Self {
        SignedTerm { sign: Sign::Plus, term }
    }

    pub fn minus(term: Term) -> Self {
        SignedTerm { sign: Sign::Minus, term }
    }
}

impl fmt::Display for SignedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign == Sign::Plus { '+' } else { '-' };
        write!(f, "{s}{}", self.term)
    }
}

/// Anything that is a signed sum of terms over one scenario.
pub trait TermSum {
    fn scenario(&self) -> &Scenario;
    fn label(&self) -> &str;
    fn signed_terms(&self) -> Vec<&SignedTerm>;
}

/// Left-hand side of one Bell inequality `Σ ±term ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BellExpression {
    label: String,
    scenario: Scenario,
    terms: Vec<SignedTerm>,
}

impl BellExpression {
    pub fn new(label: impl Into<String>, scenario: Scenario, terms: Vec<SignedTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Input("expression has no terms".into()));
        }
        for st in &terms {
            if let Term::Separation(_) = st.term {
                if scenario.outcomes() != 2 {
                    return Err(Error::Unsupported(format!(
                        "separation term {} in a d = {} scenario",
                        st.term,
                        scenario.outcomes()
                    )));
                }
            }
            if let Some(m) = st.term.measurements().iter().find(|m| m.party >= scenario.parties()) {
                return Err(Error::Input(format!(
                    "party {} outside the {}-party scenario",
                    party_name(m.party),
                    scenario.parties()
                )));
            }
        }
        Ok(BellExpression {
            label: label.into(),
            scenario,
            terms,
        })
    }

    pub fn terms(&self) -> &[SignedTerm] {
        &self.terms
    }

    pub fn negative_count(&self) -> usize {
        self.terms.iter().filter(|t| t.sign == Sign::Minus).count()
    }

    /// Parties that appear in some term.
    pub fn parties(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.term.measurements())
            .map(|m| m.party)
            .collect()
    }

    /// Same terms over a (larger) scenario.
    pub fn with_scenario(&self, scenario: Scenario) -> Result<Self> {
        BellExpression::new(self.label.clone(), scenario, self.terms.clone())
    }
}

impl TermSum for BellExpression {
    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn signed_terms(&self) -> Vec<&SignedTerm> {
        self.terms.iter().collect()
    }
}

impl fmt::Display for BellExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} =", self.label)?;
        self.terms.iter().try_for_each(|t| write!(f, " {t}"))
    }
}

/// Sum of Bell expressions over a common scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct MonogamyExpression {
    label: String,
    scenario: Scenario,
    summands: Vec<BellExpression>,
}

impl MonogamyExpression {
    pub fn new(label: impl Into<String>, summands: Vec<BellExpression>) -> Result<Self> {
        let scenario = *summands
            .first()
            .ok_or_else(|| Error::Input("monogamy needs at least one summand".into()))?
            .scenario();
        if summands.iter().any(|s| *s.scenario() != scenario) {
            return Err(Error::ScenarioMismatch("summands use different scenarios".into()));
        }
        Ok(MonogamyExpression {
            label: label.into(),
            scenario,
            summands,
        })
    }

    pub fn summands(&self) -> &[BellExpression] {
        &self.summands
    }

    pub fn terms(&self) -> impl Iterator<Item = &SignedTerm> {
        self.summands.iter().flat_map(|s| s.terms.iter())
    }

    /// Monogamy made of summands `i` and `j` only.
    pub fn pair(&self, i: usize, j: usize) -> Result<Self> {
        let pick = |k: usize| {
            self.summands
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Input(format!("no summand {k}")))
        };
        let (a, b) = (pick(i)?, pick(j)?);
        MonogamyExpression::new(format!("{} + {}", a.label, b.label), vec![a, b])
    }
}

impl TermSum for MonogamyExpression {
    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn signed_terms(&self) -> Vec<&SignedTerm> {
        self.terms().collect()
    }
}

impl fmt::Display for MonogamyExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}:", self.label)?;
        self.summands.iter().try_for_each(|s| writeln!(f, "  {s}"))
    }
}

/// `Σ sign_i · value_i` with absent parties at setting 1.
pub fn evaluate<E, T>(expression: &E, behavior: &Behavior<T>) -> Result<T>
where
    E: TermSum + ?Sized,
    T: Scalar,
{
    let (es, bs) = (expression.scenario(), behavior.scenario());
    if es.outcomes() != bs.outcomes() || es.parties() > bs.parties() {
        return Err(Error::ScenarioMismatch(format!(
            "expression over {} parties / d = {} evaluated on {} parties / d = {}",
            es.parties(),
            es.outcomes(),
            bs.parties(),
            bs.outcomes()
        )));
    }
    expression
        .signed_terms()
        .into_iter()
        .try_fold(T::zero(), |acc, st| {
            Ok(acc + st.sign.apply(st.term.value(behavior, Setting::FIRST)?))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{behavior_from_strategy, enumerate_strategies, DEFAULT_ENUMERATION_CAP};
    use crate::scalar::Rational;

    #[test]
    fn eq2_on_uniform_is_one() {
        let e = build_separation_bell(&[0, 1, 2], None).unwrap();
        let b = Behavior::<Rational>::uniform(Scenario::binary(3).unwrap());
        assert_eq!(evaluate(&e, &b).unwrap(), Rational::from_int(1));
    }

    #[test]
    fn zg_on_uniform_is_one() {
        let e = build_zg_svetlichny(2, false).unwrap();
        let b = Behavior::<Rational>::uniform(Scenario::binary(3).unwrap());
        assert_eq!(evaluate(&e, &b).unwrap(), Rational::from_int(1));
    }

    #[test]
    fn eq6_nonnegative_on_every_strategy() {
        let m = compose_monogamy(Preset::PrimaryAbcAbd, &[0, 1, 2, 3], 2).unwrap();
        let sc = *m.scenario();
        let mut min = i64::MAX;
        for strat in enumerate_strategies(sc, DEFAULT_ENUMERATION_CAP).unwrap() {
            let b: Behavior<Rational> = behavior_from_strategy(&strat, sc).unwrap();
            let v = evaluate(&m, &b).unwrap();
            assert!(v.is_integer());
            min = min.min(v.to_integer().try_into().unwrap());
        }
        assert_eq!(min, 0);
    }

    #[test]
    fn evaluate_checks_scenario() {
        let e = build_separation_bell(&[0, 1, 3], None).unwrap();
        let small = Behavior::<f64>::uniform(Scenario::binary(3).unwrap());
        assert!(matches!(evaluate(&e, &small), Err(Error::ScenarioMismatch(_))));
        let big = Behavior::<f64>::uniform(Scenario::binary(5).unwrap());
        assert!((evaluate(&e, &big).unwrap() - 1.0).abs() < 1e-15);
        let ternary = Behavior::<f64>::uniform(Scenario::new(3, 3).unwrap());
        assert!(evaluate(&build_zg_svetlichny(2, false).unwrap(), &ternary).is_err());
    }

    #[test]
    fn expression_rejects_separation_in_d_outcome_scenario() {
        let t = Term::Separation("A1B1".parse().unwrap());
        let sc = Scenario::new(2, 3).unwrap();
        assert!(BellExpression::new("x", sc, vec![SignedTerm::plus(t)]).is_err());
    }

    #[test]
    fn pair_extracts_two_summands() {
        let m = compose_monogamy(Preset::Full4FourParty, &[0, 1, 2, 3], 2).unwrap();
        let p = m.pair(0, 3).unwrap();
        assert_eq!(p.summands().len(), 2);
        assert_eq!(p.signed_terms().len(), 8);
        assert!(m.pair(0, 4).is_err());
    }

    #[test]
    fn display_lists_signed_terms() {
        let e = build_separation_bell(&[0, 1, 2], None).unwrap();
        assert_eq!(e.to_string(), "B_ABC = +A1B2C2 +A2B1C2 +A2B2C1 -A1B1C1");
    }
}
