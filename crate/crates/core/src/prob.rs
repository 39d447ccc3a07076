//! Multiparty conditional probability tables ("behaviors"), deterministic
//! local strategies, and the no-signaling check.
//!
//! Indexing convention: setting and outcome tuples are mixed-radix numbers
//! with party 0 as the most significant digit, so index order equals the
//! lexicographic order of the tuples. Settings are stored 0-based; the
//! user-facing labels are `1` and `2` (see [`Setting`]).

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{Map, Value};

use crate::error::{Error, Result, ValidationError};
use crate::scalar::{reciprocal, Scalar};

/// Tolerance for behaviors built from closed forms.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Tolerance for behaviors coming out of LP solves or state-vector sums.
pub const NUMERIC_TOL: f64 = 1e-9;
/// Default upper bound on the number of enumerated deterministic strategies.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

/// Every party chooses between exactly two measurement settings.
pub const SETTINGS: usize = 2;

/// A measurement setting. Labelled `1`/`2` externally, `0`/`1` internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting(u8);

impl Setting {
    pub const FIRST: Setting = Setting(0);
    pub const SECOND: Setting = Setting(1);

    /// From the external label `1` or `2`.
    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 | 2 => Ok(Setting(label - 1)),
            other => Err(Error::Input(format!("setting label must be 1 or 2, got {other}"))),
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            0 | 1 => Ok(Setting(index as u8)),
            other => Err(Error::Input(format!("setting index must be 0 or 1, got {other}"))),
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn label(self) -> u8 {
        self.0 + 1
    }

    pub fn flipped(self) -> Self {
        Setting(1 - self.0)
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Party names are letters: party 0 is `A`.
pub fn party_name(party: usize) -> String {
    if party < 26 {
        char::from(b'A' + party as u8).to_string()
    } else {
        format!("P{party}")
    }
}

/// Inverse of [`party_name`] for the single-letter names.
pub fn parse_party(name: &str) -> Result<usize> {
    match name.as_bytes() {
        [c] if c.is_ascii_uppercase() => Ok((c - b'A') as usize),
        _ => Err(Error::Input(format!("bad party name `{name}`"))),
    }
}

/// Index space: party count, two settings per party, `outcomes` results per
/// setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scenario {
    parties: usize,
    outcomes: usize,
}

impl Scenario {
    pub fn new(parties: usize, outcomes: usize) -> Result<Self> {
        if parties < 2 {
            return Err(Error::Input(format!("need at least 2 parties, got {parties}")));
        }
        if outcomes < 2 {
            return Err(Error::Input(format!("need at least 2 outcomes, got {outcomes}")));
        }
        let entries = (SETTINGS as u128)
            .checked_pow(parties as u32)
            .and_then(|s| (outcomes as u128).checked_pow(parties as u32).and_then(|o| s.checked_mul(o)));
        match entries {
            Some(n) if n <= usize::MAX as u128 / 2 => Ok(Scenario { parties, outcomes }),
            _ => Err(Error::Input(format!(
                "table for {parties} parties with {outcomes} outcomes is not enumerable"
            ))),
        }
    }

    pub fn binary(parties: usize) -> Result<Self> {
        Scenario::new(parties, 2)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn settings(&self) -> usize {
        SETTINGS
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn setting_tuples(&self) -> usize {
        SETTINGS.pow(self.parties as u32)
    }

    pub fn outcome_tuples(&self) -> usize {
        self.outcomes.pow(self.parties as u32)
    }

    pub fn table_len(&self) -> usize {
        self.setting_tuples() * self.outcome_tuples()
    }

    pub(crate) fn setting_stride(&self, party: usize) -> usize {
        SETTINGS.pow((self.parties - 1 - party) as u32)
    }

    pub(crate) fn outcome_stride(&self, party: usize) -> usize {
        self.outcomes.pow((self.parties - 1 - party) as u32)
    }

    pub fn setting_of(&self, setting_index: usize, party: usize) -> Setting {
        Setting(((setting_index / self.setting_stride(party)) % SETTINGS) as u8)
    }

    pub fn outcome_of(&self, outcome_index: usize, party: usize) -> usize {
        (outcome_index / self.outcome_stride(party)) % self.outcomes
    }

    pub fn setting_index(&self, settings: &[Setting]) -> usize {
        debug_assert_eq!(settings.len(), self.parties);
        settings.iter().fold(0, |acc, s| acc * SETTINGS + s.index())
    }

    pub fn outcome_index(&self, outcomes: &[usize]) -> usize {
        debug_assert_eq!(outcomes.len(), self.parties);
        outcomes.iter().fold(0, |acc, &o| acc * self.outcomes + o)
    }

    pub fn entry_index(&self, setting_index: usize, outcome_index: usize) -> usize {
        setting_index * self.outcome_tuples() + outcome_index
    }

    pub fn settings_label(&self, setting_index: usize) -> String {
        (0..self.parties)
            .map(|k| char::from(b'0' + self.setting_of(setting_index, k).label()))
            .collect()
    }

    pub fn outcomes_label(&self, outcome_index: usize) -> String {
        (0..self.parties)
            .map(|k| {
                let o = self.outcome_of(outcome_index, k);
                std::char::from_digit(o as u32, 36).unwrap_or('?')
            })
            .collect()
    }
}

/// Conditional outcome distributions `p(o|s)` for every setting tuple,
/// stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior<T> {
    scenario: Scenario,
    table: Vec<T>,
}

impl<T: Scalar> Behavior<T> {
    /// Validates size, nonnegativity and per-context normalization.
    pub fn from_table(scenario: Scenario, table: Vec<T>, tol: f64) -> Result<Self, ValidationError> {
        let behavior = Behavior { scenario, table };
        behavior.check(tol)?;
        Ok(behavior)
    }

    pub(crate) fn from_table_unchecked(scenario: Scenario, table: Vec<T>) -> Self {
        Behavior { scenario, table }
    }

    /// All entries equal to `1/d^N`.
    pub fn uniform(scenario: Scenario) -> Self {
        let p = reciprocal::<T>(scenario.outcome_tuples());
        Behavior {
            scenario,
            table: vec![p; scenario.table_len()],
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn prob(&self, setting_index: usize, outcome_index: usize) -> &T {
        &self.table[self.scenario.entry_index(setting_index, outcome_index)]
    }

    /// Slice of `p(·|s)` for one setting tuple.
    pub fn context(&self, setting_index: usize) -> &[T] {
        let width = self.scenario.outcome_tuples();
        &self.table[setting_index * width..(setting_index + 1) * width]
    }

    pub fn check(&self, tol: f64) -> Result<(), ValidationError> {
        let sc = &self.scenario;
        if self.table.len() != sc.table_len() {
            return Err(ValidationError::TableSize {
                expected: sc.table_len(),
                actual: self.table.len(),
            });
        }
        for s in 0..sc.setting_tuples() {
            let mut sum = T::zero();
            for (o, p) in self.context(s).iter().enumerate() {
                if p.is_negative() {
                    return Err(ValidationError::Negative {
                        settings: sc.settings_label(s),
                        outcomes: sc.outcomes_label(o),
                        value: p.to_f64(),
                    });
                }
                sum = sum + p.clone();
            }
            let dev = (sum.clone() - T::one()).abs().to_f64();
            if dev.is_nan() || dev > tol {
                return Err(ValidationError::Normalization {
                    settings: sc.settings_label(s),
                    sum: sum.to_f64(),
                    tol,
                });
            }
        }
        Ok(())
    }

    /// Relabels parties: party `j` of the result is party `perm[j]` of `self`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let sc = self.scenario;
        let n = sc.parties();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Input(format!("{perm:?} is not a permutation of {n} parties")));
        }
        let mut table = vec![T::zero(); sc.table_len()];
        let mut settings = vec![Setting::FIRST; n];
        let mut outcomes = vec![0; n];
        for s in 0..sc.setting_tuples() {
            for (j, &old) in perm.iter().enumerate() {
                settings[j] = sc.setting_of(s, old);
            }
            let new_s = sc.setting_index(&settings);
            for o in 0..sc.outcome_tuples() {
                for (j, &old) in perm.iter().enumerate() {
                    outcomes[j] = sc.outcome_of(o, old);
                }
                table[sc.entry_index(new_s, sc.outcome_index(&outcomes))] = self.prob(s, o).clone();
            }
        }
        Ok(Behavior { scenario: sc, table })
    }

    /// Convex combination `Σ w_i b_i`. Weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(T, &Behavior<T>)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Input("empty mixture".into()))?
            .1;
        let sc = first.scenario;
        let mut weight_sum = T::zero();
        let mut table = vec![T::zero(); sc.table_len()];
        for (w, b) in parts {
            if b.scenario != sc {
                return Err(Error::ScenarioMismatch("mixture components differ".into()));
            }
            if w.is_negative() {
                return Err(Error::Input("negative mixture weight".into()));
            }
            weight_sum = weight_sum + w.clone();
            for (acc, p) in table.iter_mut().zip(&b.table) {
                *acc = acc.clone() + w.clone() * p.clone();
            }
        }
        if (weight_sum - T::one()).abs().to_f64() > NUMERIC_TOL {
            return Err(Error::Input("mixture weights must sum to 1".into()));
        }
        Ok(Behavior { scenario: sc, table })
    }

    pub fn to_f64(&self) -> Behavior<f64> {
        Behavior {
            scenario: self.scenario,
            table: self.table.iter().map(Scalar::to_f64).collect(),
        }
    }
}

impl Behavior<f64> {
    /// Behavior JSON: `{"scenario": {...}, "table": {"12..": {"01..": p}}}`.
    pub fn to_json(&self) -> Result<Value> {
        let sc = &self.scenario;
        if sc.outcomes() > 10 {
            return Err(Error::Unsupported(format!(
                "behavior JSON writes outcomes as single digits; d = {} is too large",
                sc.outcomes()
            )));
        }
        let mut table = Map::new();
        for s in 0..sc.setting_tuples() {
            let mut row = Map::new();
            for (o, p) in self.context(s).iter().enumerate() {
                row.insert(sc.outcomes_label(o), Value::from(*p));
            }
            table.insert(sc.settings_label(s), Value::Object(row));
        }
        Ok(serde_json::json!({
            "scenario": scenario_json(sc),
            "table": table,
        }))
    }

    pub fn from_json(value: &Value, tol: f64) -> Result<Self> {
        let sc = scenario_from_json(
            value
                .get("scenario")
                .ok_or_else(|| Error::Input("behavior JSON lacks `scenario`".into()))?,
        )?;
        let table_json = value
            .get("table")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Input("behavior JSON lacks object `table`".into()))?;
        let mut table = vec![0.0; sc.table_len()];
        for (skey, row) in table_json {
            let s = parse_digits(skey, sc.parties(), |c| {
                let v = c.to_digit(10)? as usize;
                (1..=2).contains(&v).then(|| v - 1)
            })
            .map(|digits| digits.iter().fold(0, |acc, &v| acc * SETTINGS + v))
            .ok_or_else(|| Error::Input(format!("bad settings key `{skey}`")))?;
            let row = row
                .as_object()
                .ok_or_else(|| Error::Input(format!("row `{skey}` is not an object")))?;
            for (okey, p) in row {
                let o = parse_digits(okey, sc.parties(), |c| {
                    let v = c.to_digit(10)? as usize;
                    (v < sc.outcomes()).then_some(v)
                })
                .map(|d| sc.outcome_index(&d))
                .ok_or_else(|| Error::Input(format!("bad outcomes key `{okey}`")))?;
                let idx = sc.entry_index(s, o);
                table[idx] = p
                    .as_f64()
                    .ok_or_else(|| Error::Input(format!("entry {skey}/{okey} is not a number")))?;
            }
        }
        // Omitted outcome entries read as zero; a missing context fails
        // normalization below.
        Ok(Behavior::from_table(sc, table, tol)?)
    }
}

fn parse_digits(key: &str, len: usize, digit: impl Fn(char) -> Option<usize>) -> Option<Vec<usize>> {
    let digits: Option<Vec<usize>> = key.chars().map(digit).collect();
    digits.filter(|d| d.len() == len)
}

pub(crate) fn scenario_json(sc: &Scenario) -> Value {
    serde_json::json!({
        "parties": sc.parties(),
        "settings": SETTINGS,
        "outcomes": sc.outcomes(),
    })
}

pub(crate) fn scenario_from_json(value: &Value) -> Result<Scenario> {
    let field = |name: &str| {
        value
            .get(name)
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Input(format!("scenario lacks integer `{name}`")))
    };
    let settings = field("settings")?;
    if settings != SETTINGS as u64 {
        return Err(Error::Unsupported(format!("{settings} settings per party")));
    }
    Scenario::new(field("parties")? as usize, field("outcomes")? as usize)
}

/// Result of [`validate_no_signaling`].
#[derive(Clone, Debug, PartialEq)]
pub struct NoSignalingReport {
    pub max_violation: f64,
    /// Worst marginal difference caused by each party's setting change.
    pub per_party: Vec<f64>,
    pub pass: bool,
}

/// Checks that no party's setting choice changes the marginal of the others.
///
/// Fails with a [`ValidationError`] (not a report) when the behavior is not
/// a normalized probability table in the first place.
pub fn validate_no_signaling<T: Scalar>(
    behavior: &Behavior<T>,
    tol: f64,
) -> Result<NoSignalingReport, ValidationError> {
    behavior.check(tol.max(NUMERIC_TOL))?;
    let sc = behavior.scenario();
    let d = sc.outcomes();
    let per_party: Vec<f64> = (0..sc.parties())
        .map(|k| {
            let s_stride = sc.setting_stride(k);
            let o_stride = sc.outcome_stride(k);
            let mut worst = 0.0_f64;
            let mut marginals: Vec<T> = Vec::with_capacity(SETTINGS);
            for s0 in (0..sc.setting_tuples()).filter(|s| sc.setting_of(*s, k) == Setting::FIRST) {
                for o0 in (0..sc.outcome_tuples()).filter(|o| sc.outcome_of(*o, k) == 0) {
                    marginals.clear();
                    for x in 0..SETTINGS {
                        let s = s0 + x * s_stride;
                        let mut m = T::zero();
                        for j in 0..d {
                            m = m + behavior.prob(s, o0 + j * o_stride).clone();
                        }
                        marginals.push(m);
                    }
                    for x in 0..SETTINGS {
                        for y in x + 1..SETTINGS {
                            let diff = (marginals[x].clone() - marginals[y].clone()).abs().to_f64();
                            worst = worst.max(diff);
                        }
                    }
                }
            }
            worst
        })
        .collect();
    let max_violation = per_party.iter().copied().fold(0.0, f64::max);
    Ok(NoSignalingReport {
        max_violation,
        per_party,
        pass: max_violation <= tol,
    })
}

/// A local deterministic strategy: one fixed outcome per party and setting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    outcomes: Vec<[usize; SETTINGS]>,
}

impl DeterministicStrategy {
    pub fn new(outcomes: Vec<[usize; SETTINGS]>) -> Self {
        DeterministicStrategy { outcomes }
    }

    pub fn parties(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome(&self, party: usize, setting: Setting) -> usize {
        self.outcomes[party][setting.index()]
    }

    pub fn outcomes(&self) -> &[[usize; SETTINGS]] {
        &self.outcomes
    }

    fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.parties() != scenario.parties() {
            return Err(Error::Input(format!(
                "strategy covers {} parties, scenario has {}",
                self.parties(),
                scenario.parties()
            )));
        }
        for (k, pair) in self.outcomes.iter().enumerate() {
            if let Some(bad) = pair.iter().find(|&&o| o >= scenario.outcomes()) {
                return Err(Error::Input(format!(
                    "party {} outcome {bad} out of range for d = {}",
                    party_name(k),
                    scenario.outcomes()
                )));
            }
        }
        Ok(())
    }

    /// Outcome index this strategy produces for a setting tuple.
    pub fn outcome_index(&self, scenario: &Scenario, setting_index: usize) -> usize {
        self.outcomes
            .iter()
            .enumerate()
            .fold(0, |acc, (k, pair)| {
                acc * scenario.outcomes() + pair[scenario.setting_of(setting_index, k).index()]
            })
    }
}

/// The 0/1 behavior realized by a deterministic strategy.
pub fn behavior_from_strategy<T: Scalar>(
    strategy: &DeterministicStrategy,
    scenario: Scenario,
) -> Result<Behavior<T>> {
    strategy.check(&scenario)?;
    let mut table = vec![T::zero(); scenario.table_len()];
    for s in 0..scenario.setting_tuples() {
        let o = strategy.outcome_index(&scenario, s);
        table[scenario.entry_index(s, o)] = T::one();
    }
    Ok(Behavior::from_table_unchecked(scenario, table))
}

/// `(d²)^N`, or `None` on overflow.
pub fn strategy_count(scenario: &Scenario) -> Option<u128> {
    (scenario.outcomes() as u128)
        .checked_pow(SETTINGS as u32)
        .and_then(|per_party| per_party.checked_pow(scenario.parties() as u32))
}

/// The `index`-th strategy in lexicographic order (party 0, setting 1 most
/// significant).
pub fn strategy_from_index(scenario: &Scenario, mut index: u128) -> DeterministicStrategy {
    let d = scenario.outcomes() as u128;
    let mut outcomes = vec![[0; SETTINGS]; scenario.parties()];
    for pair in outcomes.iter_mut().rev() {
        for slot in pair.iter_mut().rev() {
            *slot = (index % d) as usize;
            index /= d;
        }
    }
    DeterministicStrategy { outcomes }
}

/// Iterator over all deterministic strategies in lexicographic order.
#[derive(Clone, Debug)]
pub struct Strategies {
    scenario: Scenario,
    next: u128,
    count: u128,
}

impl Iterator for Strategies {
    type Item = DeterministicStrategy;

    fn next(&mut self) -> Option<Self::Item> {
        (self.next < self.count).then(|| {
            let s = strategy_from_index(&self.scenario, self.next);
            self.next += 1;
            s
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = usize::try_from(self.count - self.next).unwrap_or(usize::MAX);
        (rest, Some(rest))
    }
}

/// Enumerates every deterministic strategy, refusing when the count
/// exceeds `cap`.
pub fn enumerate_strategies(scenario: Scenario, cap: u128) -> Result<Strategies> {
    let count = checked_strategy_count(&scenario, cap)?;
    Ok(Strategies {
        scenario,
        next: 0,
        count,
    })
}

pub(crate) fn checked_strategy_count(scenario: &Scenario, cap: u128) -> Result<u128> {
    match strategy_count(scenario) {
        Some(count) if count <= cap => Ok(count),
        Some(count) => Err(Error::CountTooLarge { count, cap }),
        None => Err(Error::CountTooLarge { count: u128::MAX, cap }),
    }
}

/// Behaviors keyed by setting label, for debugging and display.
pub fn contexts_by_label(behavior: &Behavior<f64>) -> BTreeMap<String, Vec<f64>> {
    let sc = behavior.scenario();
    (0..sc.setting_tuples())
        .map(|s| (sc.settings_label(s), behavior.context(s).to_vec()))
        .collect()
}
