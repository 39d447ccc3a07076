use super::{verify_chain, ChainProof, MetricPoint, PointKind, SignedMultiset, StepMode, TriangleStep};
use crate::bell::{build_separation_bell, build_zg_svetlichny, compose_monogamy, Preset};
use crate::error::Result;

fn step(mode: StepMode, [x, y, z]: [&str; 3]) -> Result<TriangleStep> {
    let kind = match mode {
        StepMode::Symmetric => PointKind::Separation,
        StepMode::Directed => PointKind::Quasi,
    };
    TriangleStep::new(
        mode,
        [
            MetricPoint::parse(kind, x)?,
            MetricPoint::parse(kind, y)?,
            MetricPoint::parse(kind, z)?,
        ],
    )
}

fn proof(name: &str, mode: StepMode, steps: &[[&str; 3]], target: SignedMultiset) -> Result<ChainProof> {
    Ok(ChainProof {
        name: name.to_string(),
        steps: steps.iter().map(|s| step(mode, *s)).collect::<Result<_>>()?,
        target,
    })
}

/// The six shipped derivations, targets built from the expression builders.
pub fn builtin_proofs() -> Result<Vec<ChainProof>> {
    use StepMode::{Directed, Symmetric};
    let quad = [0, 1, 2, 3];
    Ok(vec![
        proof(
            "three_party",
            Symmetric,
            &[["A1B2", "C2", "A2B1"], ["A1B1", "A2B2", "C1"]],
            SignedMultiset::from_expression(&build_separation_bell(&[0, 1, 2], None)?)?,
        )?,
        proof(
            "abc_abd",
            Symmetric,
            &[
                ["C2", "A1B2", "D2"],
                ["D2", "C2", "A2B1"],
                ["C1", "A2B2", "D1"],
                ["C1", "D1", "A1B1"],
            ],
            SignedMultiset::from_expression(&compose_monogamy(Preset::PrimaryAbcAbd, &quad, 2)?)?,
        )?,
        proof(
            "abc_acd",
            Symmetric,
            &[
                ["B2", "A1C2", "D2"],
                ["D2", "B2", "A2C1"],
                ["B1", "A2C2", "D1"],
                ["B1", "D1", "A1C1"],
            ],
            SignedMultiset::from_expression(&compose_monogamy(Preset::Strong3FourParty, &quad, 2)?.pair(0, 2)?)?,
        )?,
        proof(
            "abc_bcd",
            Symmetric,
            &[
                ["A1", "B2C2", "D1"],
                ["A1", "D1", "B1C1"],
                ["A2", "B2C1", "D2"],
                ["D2", "A2", "B1C2"],
            ],
            SignedMultiset::from_expression(&compose_monogamy(Preset::Full4FourParty, &quad, 2)?.pair(0, 3)?)?,
        )?,
        proof(
            "zg_three_party",
            Directed,
            &[
                ["[A1+B2]", "C2", "[A2+B1]"],
                ["[A1+B2]", "[A2+B1]", "C1"],
                ["[A1+B1]", "C2", "[A2+B2]"],
                ["[A1+B1]", "[A2+B2]", "C1"],
            ],
            SignedMultiset::from_expression(&build_zg_svetlichny(2, false)?)?,
        )?,
        proof(
            "zg_monogamy",
            Directed,
            &[
                ["D2", "[A1+B2]", "C2"],
                ["D2", "C2", "[A2+B1]"],
                ["D1", "[A2+B1]", "C1"],
                ["[A1+B2]", "D1", "C1"],
                ["D2", "[A1+B1]", "C2"],
                ["D2", "C2", "[A2+B2]"],
                ["D1", "[A2+B2]", "C1"],
                ["[A1+B1]", "D1", "C1"],
            ],
            SignedMultiset::from_expression(&compose_monogamy(Preset::PrimaryQuasi, &quad, 2)?)?,
        )?,
    ])
}

/// Every proof obtained by flipping the setting of one atom in a point that
/// spans a bridge term of its step.
pub fn bridge_mutations(proof: &ChainProof) -> Vec<ChainProof> {
    let bridges = proof.bridge_terms();
    let mut out = Vec::new();
    for (si, step) in proof.steps.iter().enumerate() {
        let [xy, yz, xz] = step.terms();
        let mut positions = Vec::new();
        for (term, pair) in [(xy.0, [0, 1]), (yz.0, [1, 2]), (xz.0, [0, 2])] {
            if term.is_some_and(|t| bridges.contains(&t)) {
                positions.extend(pair);
            }
        }
        positions.sort_unstable();
        positions.dedup();
        for pos in positions {
            for atom in 0..step.points[pos].atoms().len() {
                let mut mutated = proof.clone();
                mutated.name = format!("{}:step{si}:point{pos}:atom{atom}", proof.name);
                mutated.steps[si].points[pos] = step.points[pos].with_flipped(atom);
                out.push(mutated);
            }
        }
    }
    out
}

/// True when every proof checks and every bridge mutation fails.
pub fn all_builtin_sound() -> Result<bool> {
    for p in builtin_proofs()? {
        if !verify_chain(&p)?.valid {
            return Ok(false);
        }
        for m in bridge_mutations(&p) {
            if verify_chain(&m)?.valid {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_proofs_verify() {
        for p in builtin_proofs().unwrap() {
            let v = verify_chain(&p).unwrap();
            assert!(v.valid, "{}: mismatch {}", p.name, v.mismatch);
        }
    }

    #[test]
    fn mutations_are_rejected() {
        for p in builtin_proofs().unwrap() {
            let muts = bridge_mutations(&p);
            assert!(!muts.is_empty(), "{}", p.name);
            for m in muts {
                assert!(!verify_chain(&m).unwrap().valid, "{}", m.name);
            }
        }
        assert!(all_builtin_sound().unwrap());
    }

    #[test]
    fn bridge_terms_of_three_party_proof() {
        let p = &builtin_proofs().unwrap()[0];
        let labels: Vec<String> = p.bridge_terms().iter().map(|t| t.to_string()).collect();
        assert_eq!(labels, ["A1A2B1B2"]);
    }
}
