#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sepbell::bell::{Term, TermSum};
use sepbell::prob::{behavior_from_strategy, strategy_count, strategy_from_index};
use sepbell::separation::Direction;
use sepbell::{Behavior, Scenario};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform point of the probability simplex of dimension `n`.
pub fn random_simplex(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random mixture of `k` deterministic strategies.
pub fn random_local(rng: &mut StdRng, sc: Scenario, k: usize) -> Behavior {
    let count = strategy_count(&sc).unwrap();
    let weights = random_simplex(rng, k);
    let parts: Vec<Behavior> = (0..k)
        .map(|_| {
            let idx = rng.random_range(0..count);
            behavior_from_strategy(&strategy_from_index(&sc, idx), sc).unwrap()
        })
        .collect();
    let refs: Vec<(f64, &Behavior)> = weights.into_iter().zip(&parts).collect();
    Behavior::mixture(&refs).unwrap()
}

/// Expression value computed directly from the flat table.
///
/// Absent parties sit at setting index 0. Entry index is
/// `s·d^N + o` with party 0 the most significant digit of both.
pub fn oracle_value<E: TermSum + ?Sized>(expr: &E, b: &Behavior) -> f64 {
    let sc = b.scenario();
    let (n, d) = (sc.parties(), sc.outcomes());
    let dn = d.pow(n as u32);
    let digit = |x: usize, base: usize, k: usize| (x / base.pow((n - 1 - k) as u32)) % base;
    let mut total = 0.0;
    for st in expr.signed_terms() {
        let ms = st.term.measurements();
        let s = ms
            .iter()
            .fold(0, |acc, m| acc + m.setting.index() * 2usize.pow((n - 1 - m.party) as u32));
        let mut v = 0.0;
        for o in 0..dn {
            let out = |p: usize| digit(o, d, p);
            let holds = match &st.term {
                Term::Separation(t) => t.events().iter().filter(|m| out(m.party) == 1).count() % 2 == 1,
                Term::Quasi(q) => {
                    let lhs = q.lhs().iter().map(|m| out(m.party)).sum::<usize>() % d;
                    let rhs = out(q.rhs().party);
                    match q.direction() {
                        Direction::LhsLessThanRhs => lhs < rhs,
                        Direction::RhsLessThanLhs => rhs < lhs,
                    }
                }
            };
            if holds {
                v += b.table()[s * dn + o];
            }
        }
        total += st.sign.value() as f64 * v;
    }
    total
}
