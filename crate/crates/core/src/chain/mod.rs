//! Symbolic verification of triangle-inequality chains.
//!
//! A step `(x, y, z)` contributes `+d(x,y) + d(y,z) − d(x,z)`. Summing the
//! steps and cancelling equal terms must leave exactly the target. Terms are
//! compared structurally, so a bridge term cancels only when both steps name
//! the same composite event, which is where no-signaling enters.
//!
//! Separation points are XORs of binary atoms; `d(x,y)` is the separation
//! over the symmetric difference of their atom sets, so repeated atoms drop
//! out. Quasi points are modular sums of d-valued atoms; `d(x→y) = P(x<y)`.

mod dsl;
mod fixtures;

pub use dsl::{parse_proofs, proof_to_dsl};
pub use fixtures::{all_builtin_sound, bridge_mutations, builtin_proofs};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::bell::{Term, TermSum};
use crate::error::{Error, Result, ValidationError};
use crate::separation::{parse_measurements, sum_label, Direction, Measurement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKind {
    Separation,
    Quasi,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetricPoint {
    kind: PointKind,
    atoms: Vec<Measurement>,
}

impl MetricPoint {
    /// Composite binary event; atoms are stored in party order.
    pub fn separation(mut atoms: Vec<Measurement>) -> Result<Self> {
        atoms.sort();
        check_atoms(&atoms)?;
        Ok(MetricPoint {
            kind: PointKind::Separation,
            atoms,
        })
    }

    /// Modular sum of atoms, in the given order.
    pub fn quasi(atoms: Vec<Measurement>) -> Result<Self> {
        let mut sorted = atoms.clone();
        sorted.sort();
        check_atoms(&sorted)?;
        Ok(MetricPoint {
            kind: PointKind::Quasi,
            atoms,
        })
    }

    /// `A1B2` for separation points; `[A1+B2]` or `C2` for quasi points.
    pub fn parse(kind: PointKind, text: &str) -> Result<Self> {
        let text = text.trim();
        match kind {
            PointKind::Separation => MetricPoint::separation(parse_measurements(text)?),
            PointKind::Quasi => {
                let inner = match text.strip_prefix('[') {
                    Some(rest) => rest
                        .strip_suffix(']')
                        .ok_or_else(|| Error::Input(format!("unbalanced bracket in `{text}`")))?,
                    None => text,
                };
                let atoms = inner
                    .split('+')
                    .map(|a| {
                        let ms = parse_measurements(a.trim())?;
                        match ms.as_slice() {
                            [m] => Ok(*m),
                            _ => Err(Error::Input(format!("`{a}` is not a single measurement"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                MetricPoint::quasi(atoms)
            }
        }
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn atoms(&self) -> &[Measurement] {
        &self.atoms
    }

    /// Copy with the setting of atom `index` flipped.
    pub fn with_flipped(&self, index: usize) -> Self {
        let mut atoms = self.atoms.clone();
        atoms[index].setting = atoms[index].setting.flipped();
        MetricPoint { kind: self.kind, atoms }
    }
}

fn check_atoms(sorted: &[Measurement]) -> Result<()> {
    if sorted.is_empty() {
        return Err(Error::Input("empty metric point".into()));
    }
    if sorted.windows(2).any(|w| w[0].party == w[1].party) {
        return Err(Error::Input("a metric point uses each party at most once".into()));
    }
    Ok(())
}

impl fmt::Display for MetricPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.atoms.as_slice()) {
            (PointKind::Quasi, [single]) => write!(f, "{single}"),
            (PointKind::Quasi, atoms) => f.write_str(&sum_label(atoms)),
            (PointKind::Separation, atoms) => atoms.iter().try_for_each(|m| write!(f, "{m}")),
        }
    }
}

/// A distance between two points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceTerm {
    /// Separation over a sorted atom set.
    Separation(Vec<Measurement>),
    /// `P(smaller < larger)`.
    Directed(MetricPoint, MetricPoint),
}

impl DistanceTerm {
    /// `None` for the zero distance of a point to itself.
    pub fn between(x: &MetricPoint, y: &MetricPoint) -> Option<Self> {
        if x == y {
            return None;
        }
        match x.kind {
            PointKind::Separation => {
                let a: BTreeSet<_> = x.atoms.iter().copied().collect();
                let b: BTreeSet<_> = y.atoms.iter().copied().collect();
                Some(DistanceTerm::Separation(a.symmetric_difference(&b).copied().collect()))
            }
            PointKind::Quasi => Some(DistanceTerm::Directed(x.clone(), y.clone())),
        }
    }

    fn from_term(term: &Term) -> Result<Self> {
        Ok(match term {
            Term::Separation(t) => DistanceTerm::Separation(t.events().to_vec()),
            Term::Quasi(q) => {
                let sum = MetricPoint::quasi(q.lhs().to_vec())?;
                let single = MetricPoint::quasi(vec![q.rhs()])?;
                match q.direction() {
                    Direction::LhsLessThanRhs => DistanceTerm::Directed(sum, single),
                    Direction::RhsLessThanLhs => DistanceTerm::Directed(single, sum),
                }
            }
        })
    }

    pub fn atoms(&self) -> Vec<Measurement> {
        match self {
            DistanceTerm::Separation(a) => a.clone(),
            DistanceTerm::Directed(x, y) => x.atoms.iter().chain(&y.atoms).copied().collect(),
        }
    }
}

impl fmt::Display for DistanceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceTerm::Separation(atoms) => atoms.iter().try_for_each(|m| write!(f, "{m}")),
            DistanceTerm::Directed(x, y) => write!(f, "P({x}<{y})"),
        }
    }
}

/// Integer combination of distance terms; zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignedMultiset {
    terms: BTreeMap<DistanceTerm, i64>,
}

impl SignedMultiset {
    pub fn new() -> Self {
        SignedMultiset::default()
    }

    pub fn add(&mut self, term: DistanceTerm, coefficient: i64) {
        let entry = self.terms.entry(term.clone()).or_insert(0);
        *entry += coefficient;
        if *entry == 0 {
            self.terms.remove(&term);
        }
    }

    /// Signed terms of a Bell or monogamy expression.
    pub fn from_expression<E: TermSum + ?Sized>(expression: &E) -> Result<Self> {
        let mut m = SignedMultiset::new();
        for st in expression.signed_terms() {
            m.add(DistanceTerm::from_term(&st.term)?, st.sign.value());
        }
        Ok(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DistanceTerm, i64)> {
        self.terms.iter().map(|(t, &c)| (t, c))
    }

    pub fn coefficient(&self, term: &DistanceTerm) -> i64 {
        self.terms.get(term).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// `self − other`.
    pub fn minus(&self, other: &SignedMultiset) -> SignedMultiset {
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.add(t.clone(), -c);
        }
        out
    }
}

impl fmt::Display for SignedMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, c) in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let sign = if c > 0 { '+' } else { '-' };
            if c.abs() == 1 {
                write!(f, "{sign}{t}")?;
            } else {
                write!(f, "{sign}{}{t}", c.abs())?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepMode {
    /// `d(x,y) + d(y,z) ≥ d(x,z)` for separation points.
    Symmetric,
    /// `d(x→y) + d(y→z) ≥ d(x→z)` for quasi points.
    Directed,
}

impl StepMode {
    fn kind(self) -> PointKind {
        match self {
            StepMode::Symmetric => PointKind::Separation,
            StepMode::Directed => PointKind::Quasi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleStep {
    pub mode: StepMode,
    pub points: [MetricPoint; 3],
}

impl TriangleStep {
    pub fn new(mode: StepMode, points: [MetricPoint; 3]) -> Result<Self> {
        let step = TriangleStep { mode, points };
        step.check()?;
        Ok(step)
    }

    fn check(&self) -> Result<()> {
        match self.points.iter().find(|p| p.kind != self.mode.kind()) {
            Some(p) => Err(Error::Structural(format!(
                "{:?} step contains {:?} point {p}",
                self.mode, p.kind
            ))),
            None => Ok(()),
        }
    }

    /// `[(x,y), (y,z), (x,z)]` with coefficients `+1, +1, −1`.
    pub fn terms(&self) -> [(Option<DistanceTerm>, i64); 3] {
        let [x, y, z] = &self.points;
        [
            (DistanceTerm::between(x, y), 1),
            (DistanceTerm::between(y, z), 1),
            (DistanceTerm::between(x, z), -1),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainProof {
    pub name: String,
    pub steps: Vec<TriangleStep>,
    pub target: SignedMultiset,
}

impl ChainProof {
    /// Atoms named anywhere in the proof, sorted.
    pub fn atoms(&self) -> Vec<Measurement> {
        let set: BTreeSet<Measurement> = self
            .steps
            .iter()
            .flat_map(|s| s.points.iter().flat_map(|p| p.atoms.iter().copied()))
            .chain(self.target.iter().flat_map(|(t, _)| t.atoms()))
            .collect();
        set.into_iter().collect()
    }

    /// Terms of the steps that are not target terms.
    pub fn bridge_terms(&self) -> BTreeSet<DistanceTerm> {
        self.steps
            .iter()
            .flat_map(|s| s.terms())
            .filter_map(|(t, _)| t)
            .filter(|t| self.target.coefficient(t) == 0)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub valid: bool,
    /// Sum of all steps after cancellation.
    pub residual: SignedMultiset,
    /// `residual − target`; empty exactly when valid.
    pub mismatch: SignedMultiset,
}

/// Sums the steps and compares the result with the target.
pub fn verify_chain(proof: &ChainProof) -> Result<Verification> {
    let mut residual = SignedMultiset::new();
    for step in &proof.steps {
        step.check()?;
        for (term, c) in step.terms() {
            if let Some(t) = term {
                residual.add(t, c);
            }
        }
    }
    let mismatch = residual.minus(&proof.target);
    Ok(Verification {
        valid: mismatch.is_empty(),
        residual,
        mismatch,
    })
}

/// Joint distribution of the atoms of a proof, each taking `outcomes`
/// values; index is mixed radix over `atoms` with the first most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomDistribution {
    atoms: Vec<Measurement>,
    outcomes: usize,
    probs: Vec<f64>,
}

impl AtomDistribution {
    pub fn new(atoms: Vec<Measurement>, outcomes: usize, probs: Vec<f64>) -> Result<Self> {
        let expected = outcomes
            .checked_pow(atoms.len() as u32)
            .ok_or_else(|| Error::Input("too many atoms".into()))?;
        if probs.len() != expected {
            return Err(ValidationError::DistributionSize {
                n: atoms.len(),
                expected,
                actual: probs.len(),
            }
            .into());
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(ValidationError::Unnormalized { sum }.into());
        }
        Ok(AtomDistribution {
            atoms,
            outcomes,
            probs,
        })
    }

    fn value_of(&self, atom: Measurement, index: usize) -> Result<usize> {
        let pos = self
            .atoms
            .iter()
            .position(|&a| a == atom)
            .ok_or_else(|| Error::Input(format!("atom {atom} missing from the distribution")))?;
        let shift = self.atoms.len() - 1 - pos;
        Ok(index / self.outcomes.pow(shift as u32) % self.outcomes)
    }

    fn point_value(&self, p: &MetricPoint, index: usize) -> Result<usize> {
        let d = self.outcomes;
        p.atoms
            .iter()
            .try_fold(0, |acc, &a| Ok(match p.kind {
                PointKind::Separation => acc ^ (self.value_of(a, index)? & 1),
                PointKind::Quasi => (acc + self.value_of(a, index)?) % d,
            }))
    }

    /// Probability of a distance term.
    pub fn term_value(&self, term: &DistanceTerm) -> Result<f64> {
        let mut total = 0.0;
        for (index, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let holds = match term {
                DistanceTerm::Separation(atoms) => {
                    atoms
                        .iter()
                        .try_fold(0, |acc, &a| Ok::<_, Error>(acc ^ (self.value_of(a, index)? & 1)))?
                        == 1
                }
                DistanceTerm::Directed(x, y) => self.point_value(x, index)? < self.point_value(y, index)?,
            };
            if holds {
                total += p;
            }
        }
        Ok(total)
    }

    pub fn multiset_value(&self, m: &SignedMultiset) -> Result<f64> {
        m.iter()
            .try_fold(0.0, |acc, (t, c)| Ok(acc + c as f64 * self.term_value(t)?))
    }
}

/// Numerical check of one proof on one distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleCheck {
    /// `d(x,y) + d(y,z) − d(x,z)` per step.
    pub step_slacks: Vec<f64>,
    pub target_value: f64,
}

pub fn check_on_distribution(proof: &ChainProof, dist: &AtomDistribution) -> Result<SampleCheck> {
    let step_slacks = proof
        .steps
        .iter()
        .map(|s| {
            s.terms().iter().try_fold(0.0, |acc, (t, c)| {
                Ok(acc + match t {
                    Some(t) => *c as f64 * dist.term_value(t)?,
                    None => 0.0,
                })
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleCheck {
        step_slacks,
        target_value: dist.multiset_value(&proof.target)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sep(s: &str) -> MetricPoint {
        MetricPoint::parse(PointKind::Separation, s).unwrap()
    }

    fn quasi(s: &str) -> MetricPoint {
        MetricPoint::parse(PointKind::Quasi, s).unwrap()
    }

    #[test]
    fn bridge_label_is_symmetric_difference() {
        let t = DistanceTerm::between(&sep("A1B2"), &sep("B1A2")).unwrap();
        assert_eq!(t.to_string(), "A1A2B1B2");
        let t = DistanceTerm::between(&sep("A1B2"), &sep("A1C2")).unwrap();
        assert_eq!(t.to_string(), "B2C2");
        assert!(DistanceTerm::between(&sep("A1"), &sep("A1")).is_none());
    }

    #[test]
    fn quasi_labels_keep_order() {
        assert_eq!(quasi("[A1+B2]").to_string(), "[A1+B2]");
        assert_eq!(quasi("[B2+A1]").to_string(), "[B2+A1]");
        assert_eq!(quasi("C2").to_string(), "C2");
        assert_eq!(quasi("[C2]"), quasi("C2"));
        let t = DistanceTerm::between(&quasi("C2"), &quasi("[A2+B1]")).unwrap();
        assert_eq!(t.to_string(), "P(C2<[A2+B1])");
        assert!(MetricPoint::parse(PointKind::Quasi, "[A1+A2]").is_err());
        assert!(MetricPoint::parse(PointKind::Quasi, "[A1+B2").is_err());
    }

    #[test]
    fn mode_kind_mismatch_is_structural() {
        let bad = TriangleStep {
            mode: StepMode::Symmetric,
            points: [sep("A1"), quasi("B1"), sep("C1")],
        };
        assert!(matches!(
            TriangleStep::new(bad.mode, bad.points.clone()),
            Err(Error::Structural(_))
        ));
        let proof = ChainProof {
            name: "bad".into(),
            steps: vec![bad],
            target: SignedMultiset::new(),
        };
        assert!(matches!(verify_chain(&proof), Err(Error::Structural(_))));
    }

    #[test]
    fn single_step_residual() {
        let step = TriangleStep::new(StepMode::Symmetric, [sep("A1B2"), sep("C2"), sep("A2B1")]).unwrap();
        let proof = ChainProof {
            name: "one".into(),
            steps: vec![step],
            target: SignedMultiset::new(),
        };
        let v = verify_chain(&proof).unwrap();
        assert!(!v.valid);
        assert_eq!(v.residual.to_string(), "-A1A2B1B2 +A1B2C2 +A2B1C2");
    }

    #[test]
    fn multiset_arithmetic() {
        let mut m = SignedMultiset::new();
        let t = DistanceTerm::between(&sep("A1"), &sep("B1")).unwrap();
        m.add(t.clone(), 2);
        m.add(t.clone(), -2);
        assert!(m.is_empty());
        m.add(t.clone(), -3);
        assert_eq!(m.to_string(), "-3A1B1");
        assert_eq!(m.minus(&m), SignedMultiset::new());
    }

    #[test]
    fn distribution_values() {
        let atoms = vec![sep("A1").atoms()[0], sep("B1").atoms()[0]];
        // A1 = B1 always, uniform.
        let d = AtomDistribution::new(atoms, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let t = DistanceTerm::between(&sep("A1"), &sep("B1")).unwrap();
        assert_eq!(d.term_value(&t).unwrap(), 0.0);
        let lt = DistanceTerm::between(&quasi("A1"), &quasi("B1")).unwrap();
        assert_eq!(d.term_value(&lt).unwrap(), 0.0);
        assert!(AtomDistribution::new(vec![], 2, vec![0.5]).is_err());
    }
}
