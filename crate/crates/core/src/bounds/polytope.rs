//! Two descriptions of the no-signaling polytope.
//!
//! [`LinearProgramInstance`] uses one variable per table entry with
//! normalization and no-signaling equality rows. [`CollinsGisin`] is the
//! minimal affine parametrization: every no-signaling behavior is
//! `p = g + G x` where `x` collects the marginals `p_S(o_S | s_S)` for
//! nonempty party subsets `S` and outcomes `o_k < d − 1`, and
//! nonnegativity of `p` is the only remaining constraint.

use super::simplex::{self, StandardForm};
use crate::error::{Error, Result};
use crate::prob::{Behavior, Scenario, SETTINGS};
use crate::scalar::Scalar;

/// Sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, i64)>;

/// `min w·p` over table entries `p ≥ 0` with normalization and
/// no-signaling equalities.
#[derive(Clone, Debug)]
pub struct LinearProgramInstance {
    scenario: Scenario,
    objective: Vec<i64>,
    rows: Vec<SparseRow>,
    rhs: Vec<i64>,
}

impl LinearProgramInstance {
    /// No-signaling rows compare each party's setting `2` against the
    /// reference setting `1`, for every choice of the others' settings and
    /// outcomes.
    pub fn new(scenario: Scenario, objective: Vec<i64>) -> Result<Self> {
        if objective.len() != scenario.table_len() {
            return Err(Error::Input(format!(
                "objective has {} coefficients, scenario has {} entries",
                objective.len(),
                scenario.table_len()
            )));
        }
        let d = scenario.outcomes();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for s in 0..scenario.setting_tuples() {
            rows.push((0..scenario.outcome_tuples()).map(|o| (scenario.entry_index(s, o), 1)).collect());
            rhs.push(1);
        }
        for k in 0..scenario.parties() {
            let s_stride = scenario.setting_stride(k);
            let o_stride = scenario.outcome_stride(k);
            for s0 in (0..scenario.setting_tuples()).filter(|&s| scenario.setting_of(s, k).index() == 0) {
                for x in 1..SETTINGS {
                    for o0 in (0..scenario.outcome_tuples()).filter(|&o| scenario.outcome_of(o, k) == 0) {
                        let mut row = SparseRow::with_capacity(2 * d);
                        for j in 0..d {
                            let o = o0 + j * o_stride;
                            row.push((scenario.entry_index(s0, o), 1));
                            row.push((scenario.entry_index(s0 + x * s_stride, o), -1));
                        }
                        rows.push(row);
                        rhs.push(0);
                    }
                }
            }
        }
        Ok(LinearProgramInstance {
            scenario,
            objective,
            rows,
            rhs,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[i64] {
        &self.objective
    }

    /// Largest absolute equality residual of a table.
    pub fn residual<T: Scalar>(&self, table: &[T]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &r)| {
                let lhs = row
                    .iter()
                    .fold(T::zero(), |acc, &(j, a)| acc + T::from_int(a) * table[j].clone());
                (lhs - T::from_int(r)).abs().to_f64()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_feasible<T: Scalar>(&self, behavior: &Behavior<T>, tol: f64) -> bool {
        *behavior.scenario() == self.scenario
            && behavior.table().iter().all(|p| p.to_f64() >= -tol)
            && self.residual(behavior.table()) <= tol
    }

    /// Solves the instance as written. Meant for small scenarios; the
    /// constraint matrix is dense and highly redundant.
    pub fn solve_direct<T: Scalar>(&self) -> Result<(T, Behavior<T>)> {
        let n = self.variable_count();
        let a = self
            .rows
            .iter()
            .map(|row| {
                let mut dense = vec![T::zero(); n];
                for &(j, v) in row {
                    dense[j] = dense[j].clone() + T::from_int(v);
                }
                dense
            })
            .collect();
        let lp = StandardForm {
            a,
            b: self.rhs.iter().map(|&v| T::from_int(v)).collect(),
            c: self.objective.iter().map(|&v| T::from_int(v)).collect(),
        };
        let sol = simplex::solve(&lp)?;
        let table = sol.x.into_iter().map(|v| clamp_tiny(v)).collect();
        Ok((sol.objective, Behavior::from_table_unchecked(self.scenario, table)))
    }
}

/// Zeroes floating-point values within solver tolerance below zero.
pub(crate) fn clamp_tiny<T: Scalar>(v: T) -> T {
    if !T::EXACT && v.is_negative() && v.to_f64() > -1e-9 {
        T::zero()
    } else {
        v
    }
}

/// The affine map `x ↦ g + G x` onto the no-signaling polytope.
#[derive(Clone, Debug)]
pub struct CollinsGisin {
    scenario: Scenario,
    /// First coordinate index of every party subset (bitmask).
    offsets: Vec<usize>,
    count: usize,
    /// `G` row by row: one sparse row per table entry.
    g_rows: Vec<SparseRow>,
    /// `g`, which is `1` exactly where every outcome is `d − 1`.
    g0: Vec<i64>,
}

impl CollinsGisin {
    pub fn new(scenario: Scenario) -> Self {
        let n = scenario.parties();
        let d = scenario.outcomes();
        let block = |size: u32| (SETTINGS * (d - 1)).pow(size);
        let mut offsets = vec![0; 1 << n];
        let mut count = 0;
        for (mask, off) in offsets.iter_mut().enumerate().skip(1) {
            *off = count;
            count += block(mask.count_ones());
        }
        let mut cg = CollinsGisin {
            scenario,
            offsets,
            count,
            g_rows: Vec::with_capacity(scenario.table_len()),
            g0: vec![0; scenario.table_len()],
        };
        let mut outcomes = vec![0; n];
        let mut settings = vec![0; n];
        for s in 0..scenario.setting_tuples() {
            for (k, v) in settings.iter_mut().enumerate() {
                *v = scenario.setting_of(s, k).index();
            }
            for o in 0..scenario.outcome_tuples() {
                for (k, v) in outcomes.iter_mut().enumerate() {
                    *v = scenario.outcome_of(o, k);
                }
                let entry = scenario.entry_index(s, o);
                let (row, g) = cg.expand(&settings, &outcomes);
                cg.g_rows.push(row);
                cg.g0[entry] = g;
            }
        }
        cg
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Number of coordinates, `(2d − 1)^N − 1`.
    pub fn dimension(&self) -> usize {
        self.count
    }

    pub fn offset(&self) -> &[i64] {
        &self.g0
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.g_rows
    }

    /// Coordinate index of the marginal `p_S(o_S | s_S)`, parties in
    /// increasing order, all outcomes below `d − 1`.
    pub fn coordinate(&self, mask: usize, settings: &[usize], outcomes: &[usize]) -> usize {
        let d1 = self.scenario.outcomes() - 1;
        let mut s_code = 0;
        let mut o_code = 0;
        for (s, o) in settings.iter().zip(outcomes) {
            s_code = s_code * SETTINGS + s;
            o_code = o_code * d1 + o;
        }
        let width = d1.pow(mask.count_ones());
        self.offsets[mask] + s_code * width + o_code
    }

    /// Inclusion–exclusion over the parties reporting `d − 1`.
    fn expand(&self, settings: &[usize], outcomes: &[usize]) -> (SparseRow, i64) {
        let n = settings.len();
        let last = self.scenario.outcomes() - 1;
        let low_mask: usize = (0..n).filter(|&k| outcomes[k] < last).map(|k| 1 << k).sum();
        let top_mask = ((1 << n) - 1) & !low_mask;
        let mut row = SparseRow::new();
        let mut g = 0;
        // Iterate over subsets R of the top parties.
        let mut r = top_mask;
        loop {
            let mask = low_mask | r;
            let sign = if r.count_ones().is_multiple_of(2) { 1 } else { -1 };
            if mask == 0 {
                g += sign;
            } else {
                let members: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
                let free: Vec<usize> = members.iter().map(|&k| usize::from(r >> k & 1 == 1)).collect();
                let s_sub: Vec<usize> = members.iter().map(|&k| settings[k]).collect();
                let mut o_sub: Vec<usize> = members.iter().map(|&k| if r >> k & 1 == 1 { 0 } else { outcomes[k] }).collect();
                // Enumerate outcomes 0..d−2 on the members in R.
                loop {
                    row.push((self.coordinate(mask, &s_sub, &o_sub), sign));
                    let mut pos = members.len();
                    let mut advanced = false;
                    while pos > 0 {
                        pos -= 1;
                        if free[pos] == 1 {
                            if o_sub[pos] + 1 < last {
                                o_sub[pos] += 1;
                                advanced = true;
                                break;
                            }
                            o_sub[pos] = 0;
                        }
                    }
                    if !advanced {
                        break;
                    }
                }
            }
            if r == 0 {
                break;
            }
            r = (r - 1) & top_mask;
        }
        (row, g)
    }

    /// Coordinates `x` of a no-signaling behavior (its marginals).
    pub fn coordinates_of<T: Scalar>(&self, behavior: &Behavior<T>) -> Vec<T> {
        let sc = &self.scenario;
        let n = sc.parties();
        let mut x = vec![T::zero(); self.count];
        for mask in 1usize..1 << n {
            let members: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
            for s in (0..sc.setting_tuples()).filter(|&s| {
                // Absent parties at setting 1.
                (0..n).all(|k| mask >> k & 1 == 1 || sc.setting_of(s, k).index() == 0)
            }) {
                let s_sub: Vec<usize> = members.iter().map(|&k| sc.setting_of(s, k).index()).collect();
                for o in 0..sc.outcome_tuples() {
                    let o_sub: Vec<usize> = members.iter().map(|&k| sc.outcome_of(o, k)).collect();
                    if o_sub.iter().any(|&v| v + 1 == sc.outcomes()) {
                        continue;
                    }
                    let idx = self.coordinate(mask, &s_sub, &o_sub);
                    x[idx] = x[idx].clone() + behavior.prob(s, o).clone();
                }
            }
        }
        x
    }

    /// `g + G x` as a table.
    pub fn table<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.g_rows
            .iter()
            .zip(&self.g0)
            .map(|(row, &g)| {
                row.iter()
                    .fold(T::from_int(g), |acc, &(j, a)| acc + T::from_int(a) * x[j].clone())
            })
            .collect()
    }

    /// `Gᵀ w`.
    pub fn pull_back(&self, w: &[i64]) -> Vec<i64> {
        let mut c = vec![0; self.count];
        for (row, &wj) in self.g_rows.iter().zip(w) {
            if wj != 0 {
                for &(j, a) in row {
                    c[j] += a * wj;
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{behavior_from_strategy, strategy_from_index};
    use crate::scalar::Rational;

    #[test]
    fn dimensions() {
        for (n, d, dim) in [(3, 2, 26), (4, 2, 80), (6, 2, 728), (4, 3, 624), (3, 4, 342)] {
            let cg = CollinsGisin::new(Scenario::new(n, d).unwrap());
            assert_eq!(cg.dimension(), dim);
        }
    }

    #[test]
    fn parametrization_reproduces_behaviors() {
        for (n, d) in [(3, 2), (2, 3), (3, 3)] {
            let sc = Scenario::new(n, d).unwrap();
            let cg = CollinsGisin::new(sc);
            for idx in [0u128, 5, 17, 40] {
                let b: Behavior<Rational> = behavior_from_strategy(&strategy_from_index(&sc, idx), sc).unwrap();
                let x = cg.coordinates_of(&b);
                assert_eq!(cg.table(&x), b.table());
            }
            let u = Behavior::<Rational>::uniform(sc);
            assert_eq!(cg.table(&cg.coordinates_of(&u)), u.table());
        }
    }

    #[test]
    fn uniform_is_feasible_for_spec_form() {
        for (n, d) in [(3, 2), (4, 2), (3, 3)] {
            let sc = Scenario::new(n, d).unwrap();
            let lp = LinearProgramInstance::new(sc, vec![0; sc.table_len()]).unwrap();
            assert!(lp.is_feasible(&Behavior::<Rational>::uniform(sc), 0.0));
            assert_eq!(lp.variable_count(), sc.table_len());
            assert_eq!(
                lp.constraint_count(),
                sc.setting_tuples() + n * sc.setting_tuples() / 2 * sc.outcome_tuples() / d
            );
        }
    }

    #[test]
    fn signaling_table_is_infeasible() {
        let sc = Scenario::binary(2).unwrap();
        let mut t = vec![Rational::from_int(0); 16];
        // A copies B's setting.
        for s in 0..4 {
            let b_set = sc.setting_of(s, 1).index();
            t[sc.entry_index(s, sc.outcome_index(&[b_set, 0]))] = Rational::from_int(1);
        }
        let b = Behavior::from_table(sc, t, 0.0).unwrap();
        let lp = LinearProgramInstance::new(sc, vec![0; 16]).unwrap();
        assert!(!lp.is_feasible(&b, 1e-9));
    }
}
