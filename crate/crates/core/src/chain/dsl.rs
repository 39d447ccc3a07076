//! Line-oriented text format for chain proofs.
//!
//! ```text
//! # comment
//! PROOF three_party
//! SEP A1B2 ; C2 ; A2B1
//! QUASI [A1+B2] -> C2 -> [A2+B1]
//! TARGET +A1B2C2 -A1B1C1 +P([A1+B2]<C2)
//! ```
//!
//! A file without a `PROOF` line holds one proof named `proof`. `TARGET`
//! lines accumulate; a term may carry a multiplicity, as in `-2A1B1`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{ChainProof, DistanceTerm, MetricPoint, PointKind, SignedMultiset, StepMode, TriangleStep};
use crate::error::{Error, Result};
use crate::separation::parse_measurements;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_step(mode: StepMode, rest: &str, line: usize) -> Result<TriangleStep> {
    let (sep, kind) = match mode {
        StepMode::Symmetric => (";", PointKind::Separation),
        StepMode::Directed => ("->", PointKind::Quasi),
    };
    let parts: Vec<&str> = rest.split(sep).map(str::trim).collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(parse_error(line, format!("expected three points separated by `{sep}`")));
    };
    let point = |s: &str| MetricPoint::parse(kind, s).map_err(|e| parse_error(line, e.to_string()));
    TriangleStep::new(mode, [point(x)?, point(y)?, point(z)?])
}

fn parse_term(text: &str, line: usize) -> Result<DistanceTerm> {
    let err = |m: String| parse_error(line, m);
    if let Some(inner) = text.strip_prefix("P(").and_then(|s| s.strip_suffix(')')) {
        let (x, y) = inner
            .split_once('<')
            .ok_or_else(|| err(format!("directed term `{text}` lacks `<`")))?;
        let x = MetricPoint::parse(PointKind::Quasi, x).map_err(|e| err(e.to_string()))?;
        let y = MetricPoint::parse(PointKind::Quasi, y).map_err(|e| err(e.to_string()))?;
        return Ok(DistanceTerm::Directed(x, y));
    }
    let atoms = parse_measurements(text).map_err(|e| err(e.to_string()))?;
    let set: BTreeSet<_> = atoms.iter().copied().collect();
    if set.len() != atoms.len() {
        return Err(err(format!("repeated atom in `{text}`")));
    }
    Ok(DistanceTerm::Separation(set.into_iter().collect()))
}

fn parse_target(rest: &str, line: usize, target: &mut SignedMultiset) -> Result<()> {
    for token in rest.split_whitespace() {
        let (sign, body) = match token.as_bytes().first() {
            Some(b'+') => (1, &token[1..]),
            Some(b'-') => (-1, &token[1..]),
            _ => return Err(parse_error(line, format!("target term `{token}` needs a sign"))),
        };
        let digits = body.bytes().take_while(u8::is_ascii_digit).count();
        let count: i64 = if digits == 0 {
            1
        } else {
            body[..digits]
                .parse()
                .map_err(|_| parse_error(line, format!("bad multiplicity in `{token}`")))?
        };
        target.add(parse_term(&body[digits..], line)?, sign * count);
    }
    Ok(())
}

/// Parses one or more proofs.
pub fn parse_proofs(text: &str) -> Result<Vec<ChainProof>> {
    let mut proofs: Vec<ChainProof> = Vec::new();
    let mut current: Option<ChainProof> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        if keyword == "PROOF" {
            let name = rest.trim();
            if name.is_empty() {
                return Err(parse_error(line, "PROOF needs a name"));
            }
            proofs.extend(current.take());
            current = Some(ChainProof {
                name: name.to_string(),
                steps: Vec::new(),
                target: SignedMultiset::new(),
            });
            continue;
        }
        let proof = current.get_or_insert_with(|| ChainProof {
            name: "proof".into(),
            steps: Vec::new(),
            target: SignedMultiset::new(),
        });
        match keyword {
            "SEP" => proof.steps.push(parse_step(StepMode::Symmetric, rest, line)?),
            "QUASI" => proof.steps.push(parse_step(StepMode::Directed, rest, line)?),
            "TARGET" => parse_target(rest, line, &mut proof.target)?,
            other => return Err(parse_error(line, format!("unknown keyword `{other}`"))),
        }
    }
    proofs.extend(current);
    if proofs.is_empty() {
        return Err(parse_error(0, "no proof found"));
    }
    Ok(proofs)
}

pub fn proof_to_dsl(proof: &ChainProof) -> String {
    let mut out = format!("PROOF {}\n", proof.name);
    for step in &proof.steps {
        let [x, y, z] = &step.points;
        let _ = match step.mode {
            StepMode::Symmetric => writeln!(out, "SEP {x} ; {y} ; {z}"),
            StepMode::Directed => writeln!(out, "QUASI {x} -> {y} -> {z}"),
        };
    }
    let _ = writeln!(out, "TARGET {}", proof.target);
    out
}
