//! GHZ-state behaviors under equatorial qubit measurements and qudit
//! Fourier-basis measurements.
//!
//! Every table can be produced two ways: a closed form, and a generic
//! state-vector contraction ([`statevector_behavior`]) used as an
//! independent oracle.
//!
//! Qubit convention: encoded outcome `1` (the event "occurs", physical `+1`)
//! is `(|0⟩ + e^{iθ}|1⟩)/√2`, outcome `0` is `(|0⟩ − e^{iθ}|1⟩)/√2`. For an
//! N-qubit GHZ state this gives `p(o|θ) = (1 + ε₁⋯ε_N cos Σθ)/2^N` with
//! `ε = +1` for outcome `1`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bell::{build_zg_svetlichny, BellExpression, Term};
use crate::error::{Error, Result};
use crate::prob::{Behavior, Scenario, SETTINGS};
use crate::separation::Direction;

/// Orthonormality tolerance for measurement bases.
pub const BASIS_TOL: f64 = 1e-10;
/// Norm tolerance for state vectors.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    parties: usize,
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Amplitudes indexed like outcome tuples (party 0 most significant).
    pub fn new(parties: usize, dim: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = dim
            .checked_pow(parties as u32)
            .ok_or_else(|| Error::Input("state too large".into()))?;
        if amplitudes.len() != expected {
            return Err(Error::Input(format!(
                "{} amplitudes for {parties} parties of dimension {dim}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Input(format!("state norm² is {norm}")));
        }
        Ok(StateVector {
            parties,
            dim,
            amplitudes,
        })
    }

    /// `(1/√d) Σ_n |n…n⟩`.
    pub fn ghz(parties: usize, dim: usize) -> Result<Self> {
        if parties < 2 || dim < 2 {
            return Err(Error::Input(format!("GHZ needs N >= 2 and d >= 2, got N = {parties}, d = {dim}")));
        }
        let len = dim.pow(parties as u32);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        let diagonal_step = (0..parties).fold(0, |acc, _| acc * dim + 1);
        let a = 1.0 / (dim as f64).sqrt();
        for n in 0..dim {
            amplitudes[n * diagonal_step] = Complex64::new(a, 0.0);
        }
        StateVector::new(parties, dim, amplitudes)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// Orthonormal measurement basis; `vectors[o]` is the state for outcome `o`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBasis {
    vectors: Vec<Vec<Complex64>>,
}

impl LocalBasis {
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = vectors.len();
        if d < 2 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Input("basis must be d vectors of length d >= 2".into()));
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let ip: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (ip - expected).norm() > BASIS_TOL {
                    return Err(Error::Input(format!(
                        "basis vectors {i} and {j} have inner product {ip}"
                    )));
                }
            }
        }
        Ok(LocalBasis { vectors })
    }

    pub fn computational(d: usize) -> Result<Self> {
        LocalBasis::new(
            (0..d)
                .map(|o| (0..d).map(|n| Complex64::new(f64::from(u8::from(n == o)), 0.0)).collect())
                .collect(),
        )
    }

    /// Equatorial qubit basis at azimuth `theta`.
    pub fn equatorial(theta: f64) -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let e = Complex64::from_polar(a, theta);
        LocalBasis {
            vectors: vec![vec![Complex64::new(a, 0.0), -e], vec![Complex64::new(a, 0.0), e]],
        }
    }

    /// `|o⟩ = (1/√d) Σ_n ω^{sign·n(o + shift)} |n⟩` with `ω = e^{2πi/d}`.
    pub fn fourier(d: usize, shift: f64, sign: f64) -> Self {
        let a = 1.0 / (d as f64).sqrt();
        let vectors = (0..d)
            .map(|o| {
                (0..d)
                    .map(|n| Complex64::from_polar(a, sign * 2.0 * PI * n as f64 * (o as f64 + shift) / d as f64))
                    .collect()
            })
            .collect();
        LocalBasis { vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }
}

/// `p(o|s) = |⟨o₁,s₁| ⊗ … ⊗ ⟨o_N,s_N| ψ⟩|²` with `bases[k][s]` the basis
/// of party `k` at setting `s`.
pub fn statevector_behavior(state: &StateVector, bases: &[[LocalBasis; SETTINGS]]) -> Result<Behavior<f64>> {
    let (n, d) = (state.parties(), state.dim());
    if bases.len() != n || bases.iter().flatten().any(|b| b.dim() != d) {
        return Err(Error::Input(format!(
            "need {SETTINGS} bases of dimension {d} for each of {n} parties"
        )));
    }
    for b in bases.iter().flatten() {
        LocalBasis::new(b.vectors.clone())?;
    }
    let sc = Scenario::new(n, d)?;
    let mut table = Vec::with_capacity(sc.table_len());
    for s in 0..sc.setting_tuples() {
        let mut amps = state.amplitudes().to_vec();
        for (k, pair) in bases.iter().enumerate() {
            let basis = &pair[sc.setting_of(s, k).index()];
            amps = apply_bra(&amps, basis, sc.outcome_stride(k), d);
        }
        table.extend(amps.iter().map(Complex64::norm_sqr));
    }
    Ok(Behavior::from_table(sc, table, crate::prob::NUMERIC_TOL)?)
}

/// Contracts one tensor axis (given by its stride) with `⟨o|`.
fn apply_bra(amps: &[Complex64], basis: &LocalBasis, stride: usize, d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let block = stride * d;
    for base in (0..amps.len()).step_by(block) {
        for inner in 0..stride {
            let idx = |n: usize| base + n * stride + inner;
            for (o, v) in basis.vectors().iter().enumerate() {
                out[idx(o)] = (0..d).map(|n| v[n].conj() * amps[idx(n)]).sum();
            }
        }
    }
    out
}

/// Equatorial angles `θ[party][setting]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitPlan {
    angles: Vec<[f64; SETTINGS]>,
}

impl QubitPlan {
    pub fn new(angles: Vec<[f64; SETTINGS]>) -> Result<Self> {
        if angles.len() < 2 {
            return Err(Error::Input("qubit plans need N >= 2 parties".into()));
        }
        if angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::Input("angles must be finite".into()));
        }
        Ok(QubitPlan { angles })
    }

    /// Setting 1 at `θ = 0`, setting 2 at `θ = π/(N−1)`. For even N party A
    /// is rotated by an extra `π`.
    pub fn standard(parties: usize) -> Result<Self> {
        if parties < 2 {
            return Err(Error::Input("qubit plans need N >= 2 parties".into()));
        }
        let step = PI / (parties - 1) as f64;
        let mut angles = vec![[0.0, step]; parties];
        if parties.is_multiple_of(2) {
            angles[0] = [PI, PI + step];
        }
        QubitPlan::new(angles)
    }

    pub fn parties(&self) -> usize {
        self.angles.len()
    }

    pub fn angle(&self, party: usize, setting: usize) -> f64 {
        self.angles[party][setting]
    }

    fn bases(&self) -> Vec<[LocalBasis; SETTINGS]> {
        self.angles
            .iter()
            .map(|&[a, b]| [LocalBasis::equatorial(a), LocalBasis::equatorial(b)])
            .collect()
    }
}

/// GHZ behavior under a qubit plan, computed by state-vector contraction.
pub fn ghz_qubit_behavior(plan: &QubitPlan) -> Result<Behavior<f64>> {
    let state = StateVector::ghz(plan.parties(), 2)?;
    statevector_behavior(&state, &plan.bases())
}

/// The same table from `(1 + ε₁⋯ε_N cos Σθ)/2^N`.
pub fn ghz_qubit_closed_form(plan: &QubitPlan) -> Result<Behavior<f64>> {
    let n = plan.parties();
    let sc = Scenario::binary(n)?;
    let scale = 0.5f64.powi(n as i32);
    let mut table = Vec::with_capacity(sc.table_len());
    for s in 0..sc.setting_tuples() {
        let total: f64 = (0..n).map(|k| plan.angle(k, sc.setting_of(s, k).index())).sum();
        let c = total.cos();
        for o in 0..sc.outcome_tuples() {
            let minus_ones = (0..n).filter(|&k| sc.outcome_of(o, k) == 0).count();
            let eps = if minus_ones % 2 == 0 { 1.0 } else { -1.0 };
            table.push(scale * (1.0 + eps * c));
        }
    }
    Ok(Behavior::from_table(sc, table, crate::prob::ANALYTIC_TOL)?)
}

/// Separation over all N parties when the measured angles add to `total`.
pub fn qubit_separation_closed_form(parties: usize, total: f64) -> f64 {
    let sign = if parties % 2 == 1 { 1.0 } else { -1.0 };
    (1.0 + sign * total.cos()) / 2.0
}

/// Per-context phases `φ[i][j][k]` in units of one outcome spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditPlan {
    phases: [[[f64; SETTINGS]; SETTINGS]; SETTINGS],
    party_phases: Option<[[f64; SETTINGS]; 3]>,
}

impl QuditPlan {
    /// `φ_ijk = α_i + β_j − γ_k`.
    pub fn from_party_phases(alpha: [f64; 2], beta: [f64; 2], gamma: [f64; 2]) -> Self {
        let mut phases = [[[0.0; 2]; 2]; 2];
        for (i, pi) in phases.iter_mut().enumerate() {
            for (j, pj) in pi.iter_mut().enumerate() {
                for (k, v) in pj.iter_mut().enumerate() {
                    *v = alpha[i] + beta[j] - gamma[k];
                }
            }
        }
        QuditPlan {
            phases,
            party_phases: Some([alpha, beta, gamma]),
        }
    }

    /// An arbitrary phase table. Such plans have no state-vector
    /// realization in general.
    pub fn from_table(phases: [[[f64; 2]; 2]; 2]) -> Self {
        QuditPlan {
            phases,
            party_phases: None,
        }
    }

    /// `α = (1, 1/3)`, `β = (0, 0)`, `γ = (0, 2/3)`.
    pub fn standard() -> Self {
        QuditPlan::from_party_phases([1.0, 1.0 / 3.0], [0.0, 0.0], [0.0, 2.0 / 3.0])
    }

    pub fn zero() -> Self {
        QuditPlan::from_party_phases([0.0; 2], [0.0; 2], [0.0; 2])
    }

    /// All phases negated.
    pub fn conjugate(&self) -> Self {
        let mut phases = self.phases;
        phases.iter_mut().flatten().flatten().for_each(|v| *v = -*v);
        QuditPlan {
            phases,
            party_phases: self
                .party_phases
                .map(|pp| pp.map(|pair| pair.map(|v| -v))),
        }
    }

    pub fn phase(&self, i: usize, j: usize, k: usize) -> f64 {
        self.phases[i][j][k]
    }

    pub fn party_phases(&self) -> Option<[[f64; 2]; 3]> {
        self.party_phases
    }

    /// Fourier bases realizing the plan on a GHZ state. Party C measures in
    /// the conjugate basis, which produces the `−c` in the exponent.
    pub fn bases(&self, d: usize) -> Result<Vec<[LocalBasis; SETTINGS]>> {
        let [alpha, beta, gamma] = self
            .party_phases
            .ok_or_else(|| Error::Unsupported("phase table without per-party phases".into()))?;
        Ok(vec![
            alpha.map(|a| LocalBasis::fourier(d, a, -1.0)),
            beta.map(|b| LocalBasis::fourier(d, b, -1.0)),
            gamma.map(|c| LocalBasis::fourier(d, c, 1.0)),
        ])
    }
}

/// `(1/d⁴)|Σ_n ω^{n x}|²`.
fn fourier_weight(d: usize, x: f64) -> f64 {
    let sum: Complex64 = (0..d)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * n as f64 * x / d as f64))
        .sum();
    sum.norm_sqr() / (d as f64).powi(4)
}

/// Tripartite GHZ behavior by direct summation:
/// `p(a,b,c|i,j,k) = (1/d⁴)|Σ_n ω^{n(a+b−c+φ_ijk)}|²`.
pub fn ghz_qudit_behavior(d: usize, plan: &QuditPlan) -> Result<Behavior<f64>> {
    let sc = Scenario::new(3, d)?;
    let mut table = Vec::with_capacity(sc.table_len());
    for s in 0..sc.setting_tuples() {
        let [i, j, k] = [0, 1, 2].map(|p| sc.setting_of(s, p).index());
        let phi = plan.phase(i, j, k);
        for o in 0..sc.outcome_tuples() {
            let [a, b, c] = [0, 1, 2].map(|p| sc.outcome_of(o, p) as f64);
            table.push(fourier_weight(d, a + b - c + phi));
        }
    }
    Ok(Behavior::from_table(sc, table, crate::prob::NUMERIC_TOL)?)
}

/// Value of a tripartite quasi-distance expression of the form
/// `Σ ±P([A_i+B_j] ≶ C_k)` on the GHZ behavior, in `O(d²)` per term.
///
/// Probabilities depend only on `m = (a+b−c) mod d`, and each pair
/// `(s, c)` with `s = (a+b) mod d` is hit by exactly `d` pairs `(a, b)`.
pub fn qudit_expression_value(expression: &BellExpression, d: usize, plan: &QuditPlan) -> Result<f64> {
    let mut total = 0.0;
    for st in expression.terms() {
        let Term::Quasi(q) = &st.term else {
            return Err(Error::Unsupported("separation term in a d-outcome expression".into()));
        };
        let lhs = q.lhs();
        if lhs.len() != 2 || lhs[0].party != 0 || lhs[1].party != 1 || q.rhs().party != 2 {
            return Err(Error::Unsupported(format!("term {q} is not of the form [A+B] vs C")));
        }
        let phi = plan.phase(lhs[0].setting.index(), lhs[1].setting.index(), q.rhs().setting.index());
        let weights: Vec<f64> = (0..d).map(|m| fourier_weight(d, m as f64 + phi)).collect();
        let mut value = 0.0;
        for s in 0..d {
            for c in 0..d {
                let holds = match q.direction() {
                    Direction::LhsLessThanRhs => s < c,
                    Direction::RhsLessThanLhs => c < s,
                };
                if holds {
                    value += weights[(s + d - c) % d];
                }
            }
        }
        total += st.sign.value() as f64 * d as f64 * value;
    }
    Ok(total)
}

/// One row of the dimension sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub value: f64,
}

pub const MAX_SWEEP_D: usize = 200;

/// Quantum value of the tripartite d-outcome inequality for every `d` in
/// `d_min..=d_max`, ordered by `d`.
pub fn figure3_sweep(d_min: usize, d_max: usize, plan: &QuditPlan) -> Result<Vec<SweepRow>> {
    if !(2 <= d_min && d_min <= d_max && d_max <= MAX_SWEEP_D) {
        return Err(Error::Input(format!(
            "need 2 <= dmin <= dmax <= {MAX_SWEEP_D}, got {d_min}..{d_max}"
        )));
    }
    (d_min..=d_max)
        .into_par_iter()
        .map(|d| {
            let e = build_zg_svetlichny(d, false)?;
            Ok(SweepRow {
                d,
                value: qudit_expression_value(&e, d, plan)?,
            })
        })
        .collect()
}

/// `%.{digits}g`-style formatting.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let p = digits as i32;
    if exp < -5 || exp >= p {
        let s = format!("{:.*e}", (p - 1) as usize, v);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{e}")
    } else {
        let decimals = (p - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV with header `d,value`, values at 15 significant digits.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("d,value\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.d, format_significant(r.value, 15));
    }
    out
}
