//! Local-realistic minima by enumeration of deterministic strategies and
//! no-signaling minima by linear programming.
//!
//! The no-signaling minimum of `w·p` is computed on the dual side of the
//! Collins–Gisin parametrization `p = g + G x`:
//!
//! ```text
//! min_x  w·g + (Gᵀw)·x   s.t.  g + G x ≥ 0
//!   =   w·g − min_y { g·y : Gᵀ y = Gᵀ w, y ≥ 0 }
//! ```
//!
//! The dual program is in standard form with one row per coordinate, and its
//! reduced costs at the optimum are exactly the minimizing behavior. Any
//! `y ≥ 0` with `Gᵀy = Gᵀw` proves `w·p ≥ w·g − g·y` for every no-signaling
//! `p`, so the returned `(y, p)` pair is checked as an optimality
//! certificate: both feasible, zero duality gap.

pub mod polytope;
pub mod simplex;

use std::fmt;

use rayon::prelude::*;

use crate::bell::{
    build_separation_bell, BellExpression, MonogamyExpression, TermSum,
};
use crate::error::{Error, Result};
use crate::prob::{
    behavior_from_strategy, checked_strategy_count, strategy_from_index, validate_no_signaling, Behavior,
    DeterministicStrategy, Scenario, Setting, DEFAULT_ENUMERATION_CAP, NUMERIC_TOL,
};
use crate::scalar::{Rational, Scalar};
use crate::separation::context_index;
use polytope::{clamp_tiny, CollinsGisin};
use simplex::StandardForm;

pub use polytope::LinearProgramInstance;

/// Largest table (variable count) accepted by [`ns_minimum`].
pub const NS_VARIABLE_CAP: usize = 10_000;
/// Largest binary-outcome party count accepted by [`lr_minimum`].
pub const MAX_BINARY_LR_PARTIES: usize = 8;
/// Tolerance of floating-point optimality certificates.
pub const CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    BruteForce,
    Lp,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::BruteForce => "brute_force",
            Method::Lp => "lp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct BoundResult<T> {
    pub value: T,
    pub optimizer: Behavior<T>,
    pub method: Method,
    /// Worst certificate residual (`0` for enumeration and exact solves).
    pub tolerance: f64,
    /// The minimizing strategy, for enumeration results.
    pub strategy: Option<DeterministicStrategy>,
}

/// Coefficients `w` with `evaluate(expression, p) = w·p` over the
/// expression's own scenario.
pub fn expression_coefficients<E: TermSum + ?Sized>(expression: &E) -> Result<Vec<i64>> {
    let sc = *expression.scenario();
    let d = sc.outcomes();
    let mut w = vec![0; sc.table_len()];
    for st in expression.signed_terms() {
        let ms = st.term.measurements();
        let s = context_index(&sc, ms, Setting::FIRST);
        for o in 0..sc.outcome_tuples() {
            if st.term.holds(|m| sc.outcome_of(o, m.party), d) {
                w[sc.entry_index(s, o)] += st.sign.value();
            }
        }
    }
    Ok(w)
}

/// Minimum over deterministic strategies with the default cap.
pub fn lr_minimum<E, T>(expression: &E) -> Result<BoundResult<T>>
where
    E: TermSum + ?Sized + Sync,
    T: Scalar,
{
    lr_minimum_with_cap(expression, DEFAULT_ENUMERATION_CAP)
}

/// Minimum over all `(d²)^N` deterministic strategies. Values are integer;
/// the first minimizer in lexicographic order wins.
pub fn lr_minimum_with_cap<E, T>(expression: &E, cap: u128) -> Result<BoundResult<T>>
where
    E: TermSum + ?Sized + Sync,
    T: Scalar,
{
    let sc = *expression.scenario();
    if sc.outcomes() == 2 && sc.parties() > MAX_BINARY_LR_PARTIES {
        return Err(Error::CountTooLarge {
            count: 1u128 << (2 * sc.parties()),
            cap: 1u128 << (2 * MAX_BINARY_LR_PARTIES),
        });
    }
    let count = checked_strategy_count(&sc, cap)?;
    let d = sc.outcomes();
    let terms: Vec<_> = expression.signed_terms().into_iter().cloned().collect();
    let value_of = |index: u64| -> i64 {
        let strategy = strategy_from_index(&sc, u128::from(index));
        terms
            .iter()
            .filter(|st| st.term.holds(|m| strategy.outcome(m.party, m.setting), d))
            .map(|st| st.sign.value())
            .sum()
    };
    let (value, index) = (0..count as u64)
        .into_par_iter()
        .map(|i| (value_of(i), i))
        .min()
        .ok_or_else(|| Error::Input("empty strategy set".into()))?;
    let strategy = strategy_from_index(&sc, u128::from(index));
    Ok(BoundResult {
        value: T::from_int(value),
        optimizer: behavior_from_strategy(&strategy, sc)?,
        method: Method::BruteForce,
        tolerance: 0.0,
        strategy: Some(strategy),
    })
}

struct DualProgram<T> {
    lp: StandardForm<T>,
    /// `w·g`.
    constant: i64,
}

fn dual_program<T: Scalar>(cg: &CollinsGisin, w: &[i64]) -> DualProgram<T> {
    let m = cg.dimension();
    let n = cg.rows().len();
    let mut a = vec![vec![T::zero(); n]; m];
    for (j, row) in cg.rows().iter().enumerate() {
        for &(i, v) in row {
            a[i][j] = T::from_int(v);
        }
    }
    let constant = w.iter().zip(cg.offset()).map(|(a, b)| a * b).sum();
    DualProgram {
        lp: StandardForm {
            a,
            b: cg.pull_back(w).into_iter().map(T::from_int).collect(),
            c: cg.offset().iter().map(|&v| T::from_int(v)).collect(),
        },
        constant,
    }
}

fn solve_dual<T: Scalar>(cg: &CollinsGisin, w: &[i64]) -> Result<(DualProgram<T>, simplex::Solution<T>)> {
    let program = dual_program::<T>(cg, w);
    if T::EXACT {
        // Warm start: re-solve the floating-point optimal basis exactly and
        // keep it when it is primal and dual feasible.
        let float = dual_program::<f64>(cg, w);
        if let Ok(fs) = simplex::solve(&float.lp) {
            if let Ok(exact) = simplex::solution_from_basis(&program.lp, &fs.basis) {
                let optimal = exact.x.iter().all(|v| !v.is_negative())
                    && exact.reduced_costs.iter().all(|v| !v.is_negative());
                if optimal {
                    return Ok((program, exact));
                }
            }
        }
    }
    let sol = simplex::solve(&program.lp)?;
    Ok((program, sol))
}

/// Global minimum over the no-signaling polytope, with a checked optimality
/// certificate. Use `T = Rational` for an exact bound.
pub fn ns_minimum<E, T>(expression: &E) -> Result<BoundResult<T>>
where
    E: TermSum + ?Sized,
    T: Scalar,
{
    let sc = *expression.scenario();
    if sc.table_len() > NS_VARIABLE_CAP {
        return Err(Error::SizeCap {
            variables: sc.table_len(),
            cap: NS_VARIABLE_CAP,
        });
    }
    let w = expression_coefficients(expression)?;
    let cg = CollinsGisin::new(sc);
    let (program, sol) = solve_dual::<T>(&cg, &w)?;
    let table: Vec<T> = sol.reduced_costs.iter().cloned().map(clamp_tiny).collect();
    let tolerance = certify(&program, &sol, &w, &table)?;
    let optimizer = Behavior::from_table(sc, table, NUMERIC_TOL)?;
    let report = validate_no_signaling(&optimizer, NUMERIC_TOL)?;
    if !report.pass {
        return Err(Error::Certificate(format!(
            "optimizer signals by {:.3e}",
            report.max_violation
        )));
    }
    let value = T::from_int(program.constant) - sol.objective;
    Ok(BoundResult {
        value,
        optimizer,
        method: Method::Lp,
        tolerance,
        strategy: None,
    })
}

/// Checks `y ≥ 0`, `Gᵀy = Gᵀw`, `p ≥ 0` and a vanishing duality gap.
/// Returns the worst residual.
fn certify<T: Scalar>(program: &DualProgram<T>, sol: &simplex::Solution<T>, w: &[i64], p: &[T]) -> Result<f64> {
    let tol = if T::EXACT { 0.0 } else { CERTIFICATE_TOL };
    let mut worst = 0.0_f64;
    let mut check = |what: &str, v: f64| -> Result<()> {
        worst = worst.max(v);
        if v > tol {
            Err(Error::Certificate(format!("{what} residual {v:.3e}")))
        } else {
            Ok(())
        }
    };
    let neg = |xs: &[T]| xs.iter().map(|v| (-v.to_f64()).max(0.0)).fold(0.0, f64::max);
    check("dual feasibility", neg(&sol.x))?;
    check("primal feasibility", neg(p))?;
    let eq = program
        .lp
        .a
        .iter()
        .zip(&program.lp.b)
        .map(|(row, b)| {
            let lhs = row
                .iter()
                .zip(&sol.x)
                .filter(|(a, _)| !a.is_zero())
                .fold(T::zero(), |acc, (a, y)| acc + a.clone() * y.clone());
            (lhs - b.clone()).abs().to_f64()
        })
        .fold(0.0, f64::max);
    check("dual equality", eq)?;
    let primal = w
        .iter()
        .zip(p)
        .fold(T::zero(), |acc, (&wi, pi)| acc + T::from_int(wi) * pi.clone());
    let dual = T::from_int(program.constant) - sol.objective.clone();
    check("duality gap", (primal - dual).abs().to_f64())?;
    Ok(worst)
}

/// Convenience wrapper returning an exact no-signaling minimum.
pub fn ns_minimum_exact<E: TermSum + ?Sized>(expression: &E) -> Result<BoundResult<Rational>> {
    ns_minimum(expression)
}

/// No-signaling minimum of one pair of summands.
#[derive(Clone, Debug)]
pub struct PairCertificate<T> {
    pub first: usize,
    pub second: usize,
    pub label: String,
    pub result: BoundResult<T>,
}

/// [`ns_minimum`] of every pairwise sum of summands, in `(i, j)` order.
pub fn pairwise_monogamy_certificates<T: Scalar>(
    monogamy: &MonogamyExpression,
) -> Result<Vec<PairCertificate<T>>> {
    let k = monogamy.summands().len();
    if k < 2 {
        return Err(Error::Input(format!(
            "pairwise certificates need at least 2 summands, got {k}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    pairs
        .into_par_iter()
        .map(|(i, j)| {
            let pair = monogamy.pair(i, j)?;
            Ok(PairCertificate {
                first: i,
                second: j,
                label: TermSum::label(&pair).to_string(),
                result: ns_minimum(&pair)?,
            })
        })
        .collect()
}

/// One choice of minus positions and its no-signaling minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct SignPlacement {
    pub minus_positions: Vec<usize>,
    pub ns_minimum: f64,
    pub valid: bool,
}

/// Tries every combination of minus positions for separation inequalities
/// on the given party lists and reports which sums stay nonnegative on the
/// no-signaling polytope.
pub fn search_monogamy_signs(summand_parties: &[Vec<usize>], tol: f64) -> Result<Vec<SignPlacement>> {
    if summand_parties.len() < 2 {
        return Err(Error::Input("sign search needs at least 2 summands".into()));
    }
    let pool = summand_parties
        .iter()
        .flatten()
        .max()
        .map(|&p| p + 1)
        .unwrap_or(0);
    let sc = Scenario::binary(pool)?;
    let choices: Vec<usize> = summand_parties
        .iter()
        .map(|ps| build_separation_bell(ps, None).map(|e| e.terms().len()))
        .collect::<Result<_>>()?;
    let total: usize = choices.iter().product();
    (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut positions = vec![0; choices.len()];
            for (slot, &c) in positions.iter_mut().zip(&choices).rev() {
                *slot = code % c;
                code /= c;
            }
            let summands = summand_parties
                .iter()
                .zip(&positions)
                .map(|(ps, &pos)| build_separation_bell(ps, Some(pos))?.with_scenario(sc))
                .collect::<Result<Vec<BellExpression>>>()?;
            let m = MonogamyExpression::new("search", summands)?;
            let value = ns_minimum::<_, f64>(&m)?.value;
            Ok(SignPlacement {
                minus_positions: positions,
                ns_minimum: value,
                valid: value >= -tol,
            })
        })
        .collect()
}
