//! Dense two-phase tableau simplex for `min c·x  s.t.  A x = b, x ≥ 0`.
//!
//! Artificial columns are implicit (the starting basis is the identity) and
//! never re-enter once they leave. Pricing is Dantzig's rule, switching to
//! Bland's rule during long runs of degenerate pivots. The final basis is
//! re-solved from the original data by LU so that primal values, duals and
//! reduced costs do not carry accumulated tableau error.

use crate::error::LpError;
use crate::scalar::Scalar;

/// `min c·x  s.t.  A x = b, x ≥ 0` with a dense row-major `A`.
#[derive(Clone, Debug)]
pub struct StandardForm<T> {
    pub a: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Scalar> StandardForm<T> {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub x: Vec<T>,
    /// Multipliers `π` of the equality rows (`0` on dropped redundant rows).
    pub duals: Vec<T>,
    /// `c − Aᵀπ`.
    pub reduced_costs: Vec<T>,
    pub objective: T,
    /// Basic column of every kept row; `None` for redundant rows.
    pub basis: Vec<Option<usize>>,
    pub iterations: usize,
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

/// Magnitude below which a floating reduced cost without a pivot row is
/// treated as zero.
const NOISE: f64 = 1e-6;

struct Tableau<'a, T> {
    lp: &'a StandardForm<T>,
    /// Rows whose sign was flipped to make the right-hand side nonnegative.
    flipped: Vec<bool>,
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    active: Vec<bool>,
    n: usize,
    phase1: Vec<T>,
    phase2: Vec<T>,
    iterations: usize,
    limit: usize,
}

fn clean<T: Scalar>(v: &mut T) {
    if !T::EXACT && v.to_f64().abs() < 1e-11 {
        *v = T::zero();
    }
}

fn eliminate<T: Scalar>(target: &mut [T], pivot_row: &[T], nonzero: &[usize], factor: &T) {
    for &k in nonzero {
        let mut v = target[k].clone() - factor.clone() * pivot_row[k].clone();
        clean(&mut v);
        target[k] = v;
    }
}

impl<'a, T: Scalar> Tableau<'a, T> {
    fn new(lp: &'a StandardForm<T>) -> Self {
        let (m, n) = (lp.rows(), lp.cols());
        let mut rows = Vec::with_capacity(m);
        let flipped: Vec<bool> = lp.b.iter().map(|v| v.is_negative()).collect();
        let mut phase1 = vec![T::zero(); n + 1];
        for (row, rhs) in lp.a.iter().zip(&lp.b) {
            let mut r: Vec<T> = row.iter().cloned().chain(std::iter::once(rhs.clone())).collect();
            if rhs.is_negative() {
                r.iter_mut().for_each(|v| *v = -v.clone());
            }
            for (acc, v) in phase1.iter_mut().zip(&r) {
                *acc = acc.clone() - v.clone();
            }
            rows.push(r);
        }
        let phase2 = lp.c.iter().cloned().chain(std::iter::once(T::zero())).collect();
        Tableau {
            lp,
            flipped,
            rows,
            basis: (n..n + m).collect(),
            active: vec![true; m],
            n,
            phase1,
            phase2,
            iterations: 0,
            limit: 50 * (m + n) + 1000,
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let mut pivot_row = std::mem::take(&mut self.rows[r]);
        let inv = T::one() / pivot_row[j].clone();
        for v in pivot_row.iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
                clean(v);
            }
        }
        pivot_row[j] = T::one();
        let nonzero: Vec<usize> = (0..=self.n).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || !self.active[i] || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            eliminate(row, &pivot_row, &nonzero, &factor);
            row[j] = T::zero();
        }
        for cost in [&mut self.phase1, &mut self.phase2] {
            if !cost[j].is_zero() {
                let factor = cost[j].clone();
                eliminate(cost, &pivot_row, &nonzero, &factor);
                cost[j] = T::zero();
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = j;
        self.iterations += 1;
    }

    /// Rebuilds every row and both cost rows from the original data for the
    /// current basis, discarding accumulated rounding. Returns `false` if
    /// the basis matrix is numerically singular.
    fn refactor(&mut self) -> bool {
        let (lp, n) = (self.lp, self.n);
        let active: Vec<usize> = (0..self.rows.len()).filter(|&i| self.active[i]).collect();
        let signed = |i: usize, v: &T| if self.flipped[i] { -v.clone() } else { v.clone() };
        let column = |j: usize| -> Vec<T> {
            active
                .iter()
                .map(|&i| match j {
                    j if j < n => signed(i, &lp.a[i][j]),
                    j if j == n => signed(i, &lp.b[i]),
                    _ => T::zero(),
                })
                .collect()
        };
        let basis_matrix: Vec<Vec<T>> = (0..active.len())
            .map(|k| {
                active
                    .iter()
                    .map(|&r| {
                        let j = self.basis[r];
                        if j < n {
                            signed(active[k], &lp.a[active[k]][j])
                        } else if j - n == active[k] {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let Some(lu) = Lu::factor(basis_matrix) else {
            return false;
        };
        let solved: Vec<Vec<T>> = (0..=n).map(|j| lu.solve(column(j))).collect();
        for (k, &r) in active.iter().enumerate() {
            self.rows[r] = solved
                .iter()
                .map(|col| {
                    let mut v = col[k].clone();
                    clean(&mut v);
                    v
                })
                .collect();
        }
        let phase1_cost = |j: usize| if j >= n { T::one() } else { T::zero() };
        let phase2_cost = |j: usize| if j < n { lp.c[j].clone() } else { T::zero() };
        for (cost, target) in [
            (&phase1_cost as &dyn Fn(usize) -> T, &mut self.phase1),
            (&phase2_cost as &dyn Fn(usize) -> T, &mut self.phase2),
        ] {
            let mut d: Vec<T> = (0..n).map(cost).chain(std::iter::once(T::zero())).collect();
            for &r in &active {
                let cb = cost(self.basis[r]);
                if cb.is_zero() {
                    continue;
                }
                for (dk, v) in d.iter_mut().zip(&self.rows[r]) {
                    *dk = dk.clone() - cb.clone() * v.clone();
                }
            }
            for v in d.iter_mut() {
                clean(v);
            }
            for &r in &active {
                if self.basis[r] < n {
                    d[self.basis[r]] = T::zero();
                }
            }
            *target = d;
        }
        true
    }

    fn entering(&self, cost: &[T], bland: bool) -> Option<usize> {
        let neg_eps = -T::epsilon();
        if bland {
            return cost[..self.n].iter().position(|d| *d < neg_eps);
        }
        let mut best: Option<usize> = None;
        for (j, d) in cost[..self.n].iter().enumerate() {
            if *d < neg_eps && best.is_none_or(|b| *d < cost[b]) {
                best = Some(j);
            }
        }
        best
    }

    /// Two-pass (Harris) ratio test: find the smallest ratio bound with the
    /// right-hand sides relaxed by epsilon, then among rows within it prefer
    /// artificial basics, then the largest pivot, then the smallest basic
    /// index. In exact arithmetic this is the plain minimum ratio.
    fn leaving(&self, j: usize) -> Option<usize> {
        let eps = T::epsilon();
        let pivot_tol = eps.clone() * T::from_int(100);
        let candidates: Vec<usize> = (0..self.rows.len())
            .filter(|&i| self.active[i] && self.rows[i][j] > pivot_tol)
            .collect();
        let rhs = |i: usize| T::max_of(self.rows[i][self.n].clone(), T::zero());
        let bound = candidates
            .iter()
            .map(|&i| (rhs(i) + eps.clone()) / self.rows[i][j].clone())
            .reduce(|a, b| if b < a { b } else { a })?;
        let key = |i: usize| (self.basis[i] >= self.n, self.rows[i][j].clone(), std::cmp::Reverse(self.basis[i]));
        candidates
            .into_iter()
            .filter(|&i| rhs(i) / self.rows[i][j].clone() <= bound)
            .reduce(|a, b| {
                let (ka, kb) = (key(a), key(b));
                let b_wins = match kb.0.cmp(&ka.0) {
                    std::cmp::Ordering::Equal => match kb.1.partial_cmp(&ka.1) {
                        Some(std::cmp::Ordering::Greater) => true,
                        Some(std::cmp::Ordering::Less) => false,
                        _ => kb.2 > ka.2,
                    },
                    o => o == std::cmp::Ordering::Greater,
                };
                if b_wins {
                    b
                } else {
                    a
                }
            })
    }

    fn optimize(&mut self, phase_one: bool) -> Result<(), LpError> {
        let mut streak = 0;
        let mut refactored_at = None;
        loop {
            if self.iterations >= self.limit {
                return Err(LpError::IterationLimit(self.limit));
            }
            let bland = streak >= DEGENERATE_STREAK;
            let cost = if phase_one { &self.phase1 } else { &self.phase2 };
            let Some(j) = self.entering(cost, bland) else {
                return Ok(());
            };
            let Some(r) = self.leaving(j) else {
                if !T::EXACT && refactored_at != Some(self.iterations) {
                    refactored_at = Some(self.iterations);
                    if self.refactor() {
                        continue;
                    }
                }
                // A float column with no usable pivot and a barely negative
                // reduced cost is rounding noise, not a ray.
                let cost = if phase_one { &mut self.phase1 } else { &mut self.phase2 };
                if !T::EXACT && cost[j].to_f64() > -NOISE {
                    cost[j] = T::zero();
                    continue;
                }
                return Err(LpError::Unbounded);
            };
            if self.rows[r][self.n].is_negligible() {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, j);
        }
    }

    /// Pivots zero-level artificials out of the basis, dropping rows that are
    /// linear combinations of others.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if !self.active[r] || self.basis[r] < self.n {
                continue;
            }
            let candidate = (0..self.n)
                .filter(|&j| !self.rows[r][j].is_negligible())
                .max_by(|&a, &b| {
                    self.rows[r][a]
                        .abs()
                        .partial_cmp(&self.rows[r][b].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            match candidate {
                Some(j) => self.pivot(r, j),
                None => self.active[r] = false,
            }
        }
    }
}

/// Solves the program to optimality.
pub fn solve<T: Scalar>(lp: &StandardForm<T>) -> Result<Solution<T>, LpError> {
    let m = lp.rows();
    let mut t = Tableau::new(lp);
    t.optimize(true)?;
    let infeasibility = -t.phase1[t.n].clone();
    if infeasibility > T::epsilon() * T::from_int(m.max(1) as i64) {
        return Err(LpError::Infeasible);
    }
    t.drive_out_artificials();
    t.optimize(false)?;
    let basis: Vec<Option<usize>> = t
        .basis
        .iter()
        .zip(&t.active)
        .map(|(&j, &a)| a.then_some(j))
        .collect();
    let mut sol = solution_from_basis(lp, &basis)?;
    sol.iterations = t.iterations;
    Ok(sol)
}

/// Primal values, duals and reduced costs of a given basis, computed from
/// the original data.
pub fn solution_from_basis<T: Scalar>(lp: &StandardForm<T>, basis: &[Option<usize>]) -> Result<Solution<T>, LpError> {
    let rows: Vec<usize> = (0..lp.rows()).filter(|&i| basis[i].is_some()).collect();
    let cols: Vec<usize> = rows.iter().map(|&i| basis[i].unwrap()).collect();
    let matrix: Vec<Vec<T>> = rows
        .iter()
        .map(|&i| cols.iter().map(|&j| lp.a[i][j].clone()).collect())
        .collect();
    let lu = Lu::factor(matrix).ok_or(LpError::SingularBasis)?;
    let x_b = lu.solve(rows.iter().map(|&i| lp.b[i].clone()).collect());
    let pi_b = lu.solve_transpose(cols.iter().map(|&j| lp.c[j].clone()).collect());

    let mut x = vec![T::zero(); lp.cols()];
    for (&j, v) in cols.iter().zip(x_b) {
        x[j] = v;
    }
    let mut duals = vec![T::zero(); lp.rows()];
    for (&i, v) in rows.iter().zip(pi_b) {
        duals[i] = v;
    }
    let mut reduced_costs = lp.c.clone();
    for (row, pi) in lp.a.iter().zip(&duals) {
        if pi.is_zero() {
            continue;
        }
        for (r, a) in reduced_costs.iter_mut().zip(row) {
            if !a.is_zero() {
                *r = r.clone() - pi.clone() * a.clone();
            }
        }
    }
    let objective = lp
        .c
        .iter()
        .zip(&x)
        .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    Ok(Solution {
        x,
        duals,
        reduced_costs,
        objective,
        basis: basis.to_vec(),
        iterations: 0,
    })
}

/// LU factorization with partial pivoting, `P M = L U`.
struct Lu<T> {
    lu: Vec<Vec<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(mut a: Vec<Vec<T>>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| {
                a[x][k]
                    .abs()
                    .partial_cmp(&a[y][k].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[p][k].is_zero() || (!T::EXACT && a[p][k].to_f64().abs() < 1e-12) {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            let (upper, lower) = a.split_at_mut(k + 1);
            let pivot_row = &upper[k];
            for row in lower.iter_mut() {
                if row[k].is_zero() {
                    continue;
                }
                let f = row[k].clone() / pivot_row[k].clone();
                for c in k + 1..n {
                    if !pivot_row[c].is_zero() {
                        row[c] = row[c].clone() - f.clone() * pivot_row[c].clone();
                    }
                }
                row[k] = f;
            }
        }
        Some(Lu { lu: a, perm })
    }

    fn solve(&self, b: Vec<T>) -> Vec<T> {
        let n = self.lu.len();
        let mut y: Vec<T> = self.perm.iter().map(|&i| b[i].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                if !self.lu[i][k].is_zero() {
                    y[i] = y[i].clone() - self.lu[i][k].clone() * y[k].clone();
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                if !self.lu[i][k].is_zero() {
                    y[i] = y[i].clone() - self.lu[i][k].clone() * y[k].clone();
                }
            }
            y[i] = y[i].clone() / self.lu[i][i].clone();
        }
        y
    }

    /// Solves `Mᵀ z = c`.
    fn solve_transpose(&self, c: Vec<T>) -> Vec<T> {
        let n = self.lu.len();
        // Uᵀ w = c, then Lᵀ v = w, then z = Pᵀ v.
        let mut w = c;
        for i in 0..n {
            for k in 0..i {
                if !self.lu[k][i].is_zero() {
                    w[i] = w[i].clone() - self.lu[k][i].clone() * w[k].clone();
                }
            }
            w[i] = w[i].clone() / self.lu[i][i].clone();
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                if !self.lu[k][i].is_zero() {
                    w[i] = w[i].clone() - self.lu[k][i].clone() * w[k].clone();
                }
            }
        }
        let mut z = vec![T::zero(); n];
        for (pos, &orig) in self.perm.iter().enumerate() {
            z[orig] = w[pos].clone();
        }
        z
    }
}
