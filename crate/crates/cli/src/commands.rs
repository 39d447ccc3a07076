use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sepbell::bell::{build_separation_bell, build_zg_svetlichny_on, compose_monogamy, evaluate};
use sepbell::bounds::{self, lr_minimum_with_cap, ns_minimum, pairwise_monogamy_certificates};
use sepbell::chain::{bridge_mutations, builtin_proofs, parse_proofs, verify_chain, ChainProof};
use sepbell::prob::{parse_party, DEFAULT_ENUMERATION_CAP};
use sepbell::quantum::{
    figure3_sweep, ghz_qubit_behavior, ghz_qubit_closed_form, qudit_expression_value, sweep_csv, QubitPlan, QuditPlan,
};
use sepbell::{BellExpression, MonogamyExpression, Preset, Rational, Scalar, TermSum};

use crate::{BoundArgs, BoundCommand, BuildCommand, Cli, Command, Failure, IneqCommand, MonogamyCommand};
use crate::{QuantumCommand, VerifyCommand};

/// Overrides the brute-force strategy cap.
pub const ENUM_CAP_VAR: &str = "SEPBELL_ENUM_CAP";

type CmdResult = Result<(), Failure>;

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Ineq(IneqCommand::Build(b)) => build(b),
        Command::Bound(BoundCommand::Lr(args)) => bound(args, true),
        Command::Bound(BoundCommand::Ns(args)) => bound(args, false),
        Command::Monogamy(MonogamyCommand::Check { preset, d, exact }) => monogamy_check(preset, *d, *exact, cli.tol),
        Command::Quantum(QuantumCommand::Eval { n, d }) => quantum_eval(*n, *d),
        Command::Figure3 { dmin, dmax, out } => figure3(*dmin, *dmax, out.as_deref(), cli.tol),
        Command::Verify(VerifyCommand::Chains { file }) => verify_chains(file.as_deref()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|_| v.to_string())
}

fn parse_parties(list: &str) -> Result<Vec<usize>, Failure> {
    list.split(',')
        .map(|p| parse_party(p.trim()).map_err(Failure::from))
        .collect()
}

fn build(cmd: &BuildCommand) -> CmdResult {
    let (value, out) = match cmd {
        BuildCommand::Sep { parties, minus, out } => {
            (build_separation_bell(&parse_parties(parties)?, *minus)?.to_json(), out)
        }
        BuildCommand::Zg { d, parties, swapped, out } => {
            let parties: [usize; 3] = parse_parties(parties)?
                .try_into()
                .map_err(|_| Failure::Input("the d-outcome inequality needs exactly three parties".into()))?;
            (build_zg_svetlichny_on(parties, *d, *swapped)?.to_json(), out)
        }
        BuildCommand::Monogamy { preset, d, out } => {
            let preset: Preset = preset.parse()?;
            (compose_monogamy(preset, &preset.default_pool(), *d)?.to_json(), out)
        }
    };
    emit(out.as_deref(), &pretty(&value))
}

enum Loaded {
    Bell(BellExpression),
    Monogamy(MonogamyExpression),
}

fn load_expression(path: &Path) -> Result<Loaded, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(sepbell::Error::from)?;
    Ok(if value.get("summands").is_some() {
        Loaded::Monogamy(MonogamyExpression::from_json(&value)?)
    } else {
        Loaded::Bell(BellExpression::from_json(&value)?)
    })
}

fn enumeration_cap() -> Result<u128, Failure> {
    match std::env::var(ENUM_CAP_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{ENUM_CAP_VAR}=`{s}` is not a positive integer"))),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

fn default_optimizer_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("ineq");
    input.with_file_name(format!("{stem}.optimizer.json"))
}

fn bound_result<E, T>(e: &E, lr: bool) -> Result<bounds::BoundResult<T>, Failure>
where
    E: TermSum + ?Sized + Sync,
    T: Scalar,
{
    Ok(if lr {
        lr_minimum_with_cap(e, enumeration_cap()?)?
    } else {
        ns_minimum(e)?
    })
}

fn bound_json<E: TermSum + ?Sized + Sync>(e: &E, lr: bool, exact: bool, optimizer_path: &Path) -> Result<Value, Failure> {
    let (value, exact_value, optimizer, method, tolerance) = if exact {
        let r = bound_result::<E, Rational>(e, lr)?;
        (r.value.to_f64(), Some(r.value.to_string()), r.optimizer.to_f64(), r.method, r.tolerance)
    } else {
        let r = bound_result::<E, f64>(e, lr)?;
        (r.value, None, r.optimizer, r.method, r.tolerance)
    };
    let behavior = optimizer.to_json()?;
    fs::write(optimizer_path, pretty(&behavior))
        .map_err(|err| Failure::Input(format!("{}: {err}", optimizer_path.display())))?;
    let mut out = json!({
        "label": e.label(),
        "value": value,
        "method": method.as_str(),
        "tolerance": tolerance,
        "optimizer_path": optimizer_path.display().to_string(),
    });
    if let Some(x) = exact_value {
        out["exact_value"] = json!(x);
    }
    Ok(out)
}

fn bound(args: &BoundArgs, lr: bool) -> CmdResult {
    let path = args
        .optimizer_out
        .clone()
        .unwrap_or_else(|| default_optimizer_path(&args.ineq));
    let out = match load_expression(&args.ineq)? {
        Loaded::Bell(e) => bound_json(&e, lr, args.exact, &path)?,
        Loaded::Monogamy(m) => bound_json(&m, lr, args.exact, &path)?,
    };
    emit(None, &pretty(&out))
}

fn monogamy_check(preset: &str, d: usize, exact: bool, tol: f64) -> CmdResult {
    let preset: Preset = preset.parse()?;
    let m = compose_monogamy(preset, &preset.default_pool(), d)?;
    let (total, exact_total) = if exact {
        let v = ns_minimum::<_, Rational>(&m)?.value;
        (v.to_f64(), Some(v.to_string()))
    } else {
        (ns_minimum::<_, f64>(&m)?.value, None)
    };
    // Pairwise minima of the 6-party division preset are not needed for its
    // claim and cost several minutes, so only the total is certified there.
    let check_pairs = m.summands().len() > 2 && preset != Preset::DivisionN5Ab;
    let pairs: Vec<(usize, usize, String, f64)> = if !check_pairs {
        Vec::new()
    } else if exact {
        pairwise_monogamy_certificates::<Rational>(&m)?
            .into_iter()
            .map(|c| (c.first, c.second, c.label, c.result.value.to_f64()))
            .collect()
    } else {
        pairwise_monogamy_certificates::<f64>(&m)?
            .into_iter()
            .map(|c| (c.first, c.second, c.label, c.result.value))
            .collect()
    };
    let holds = total >= -tol && pairs.iter().all(|p| p.3 >= -tol);
    let verdict = match (holds, preset == Preset::DivisionN5Ab) {
        (false, _) => "violated",
        (true, true) => "sum of summands nonnegative",
        (true, false) => "at most one summand violable",
    };
    let mut out = json!({
        "preset": preset.name(),
        "outcomes": d,
        "summands": m.summands().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "ns_minimum": total,
        "pairs": pairs.iter().map(|(i, j, label, v)| json!({"summands": [i, j], "label": label, "ns_minimum": v})).collect::<Vec<_>>(),
        "tolerance": tol,
        "verdict": verdict,
    });
    if let Some(x) = exact_total {
        out["exact_ns_minimum"] = json!(x);
    }
    emit(None, &pretty(&out))?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Violated(format!("{preset}: no-signaling minimum below -{tol}")))
    }
}

fn quantum_eval(n: Option<usize>, d: Option<usize>) -> CmdResult {
    let out = match (n, d) {
        (Some(n), None) => {
            if !(2..=10).contains(&n) {
                return Err(Failure::Input(format!("--n must be in 2..=10, got {n}")));
            }
            let plan = QubitPlan::standard(n)?;
            let e = build_separation_bell(&(0..n).collect::<Vec<_>>(), None)?;
            let value = evaluate(&e, &ghz_qubit_behavior(&plan)?)?;
            let closed = evaluate(&e, &ghz_qubit_closed_form(&plan)?)?;
            json!({ "parties": n, "value": value, "closed_form_value": closed })
        }
        (None, Some(d)) => {
            let e = sepbell::bell::build_zg_svetlichny(d, false)?;
            json!({ "d": d, "value": qudit_expression_value(&e, d, &QuditPlan::standard())? })
        }
        _ => return Err(Failure::Input("give exactly one of --n and --d".into())),
    };
    emit(None, &pretty(&out))
}

fn figure3(dmin: usize, dmax: usize, out: Option<&Path>, tol: f64) -> CmdResult {
    let rows = figure3_sweep(dmin, dmax, &QuditPlan::standard())?;
    emit(out, sweep_csv(&rows).trim_end())?;
    match rows.iter().find(|r| r.value >= -tol) {
        Some(r) => Err(Failure::Violated(format!("no violation at d = {}: {}", r.d, r.value))),
        None => Ok(()),
    }
}

fn verify_chains(file: Option<&Path>) -> CmdResult {
    let (proofs, builtin): (Vec<ChainProof>, bool) = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            (parse_proofs(&text)?, false)
        }
        None => (builtin_proofs()?, true),
    };
    let mut all_valid = true;
    let mut entries = Vec::new();
    for p in &proofs {
        let v = verify_chain(p)?;
        let mut entry = json!({
            "name": p.name,
            "steps": p.steps.len(),
            "valid": v.valid,
            "residual": v.residual.to_string(),
            "mismatch": v.mismatch.to_string(),
        });
        all_valid &= v.valid;
        if builtin {
            let mutations = bridge_mutations(p);
            let rejected = mutations
                .iter()
                .map(verify_chain)
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .filter(|r| !r.valid)
                .count();
            all_valid &= rejected == mutations.len();
            entry["mutations"] = json!(mutations.len());
            entry["mutations_rejected"] = json!(rejected);
        }
        entries.push(entry);
    }
    emit(None, &pretty(&json!({ "proofs": entries, "all_valid": all_valid })))?;
    if all_valid {
        Ok(())
    } else {
        Err(Failure::Violated("some chain proofs do not verify".into()))
    }
}
