//! JSON form of expressions. A quasi term lists its summed parties first and
//! its single right-hand party last.

use serde_json::{json, Value};

use super::{BellExpression, MonogamyExpression, Sign, SignedTerm, Term};
use crate::error::{Error, Result};
use crate::prob::{parse_party, party_name, scenario_from_json, scenario_json, Setting};
use crate::separation::{Direction, Measurement, QuasiTerm, SeparationTerm};

fn measurement_json(m: Measurement) -> Value {
    json!([party_name(m.party), m.setting.label()])
}

fn measurement_from_json(v: &Value) -> Result<Measurement> {
    let bad = || Error::Input(format!("party entry must be [\"A\", 1|2], got {v}"));
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
    let party = parse_party(pair[0].as_str().ok_or_else(bad)?)?;
    let label = pair[1].as_u64().filter(|&l| l <= 2).ok_or_else(bad)?;
    Ok(Measurement::new(party, Setting::from_label(label as u8)?))
}

fn term_json(st: &SignedTerm) -> Value {
    match &st.term {
        Term::Separation(t) => json!({
            "sign": st.sign.value(),
            "kind": "separation",
            "parties": t.events().iter().map(|&m| measurement_json(m)).collect::<Vec<_>>(),
        }),
        Term::Quasi(q) => json!({
            "sign": st.sign.value(),
            "kind": "quasi",
            "parties": q.measurements().map(measurement_json).collect::<Vec<_>>(),
            "direction": q.direction().as_str(),
        }),
    }
}

fn term_from_json(v: &Value) -> Result<SignedTerm> {
    let sign = Sign::from_value(
        v.get("sign")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Input("term lacks integer `sign`".into()))?,
    )?;
    let mut parties = v
        .get("parties")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("term lacks `parties` array".into()))?
        .iter()
        .map(measurement_from_json)
        .collect::<Result<Vec<_>>>()?;
    let term = match v.get("kind").and_then(Value::as_str) {
        Some("separation") => Term::Separation(SeparationTerm::new(parties)?),
        Some("quasi") => {
            let direction = Direction::parse(
                v.get("direction")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Input("quasi term lacks `direction`".into()))?,
            )?;
            let rhs = parties
                .pop()
                .ok_or_else(|| Error::Input("quasi term has no parties".into()))?;
            Term::Quasi(QuasiTerm::new(parties, rhs, direction)?)
        }
        other => return Err(Error::Input(format!("unknown term kind {other:?}"))),
    };
    Ok(SignedTerm { sign, term })
}

impl BellExpression {
    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "scenario": scenario_json(&self.scenario),
            "terms": self.terms.iter().map(term_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let label = v
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Input("expression lacks `label`".into()))?;
        let scenario = scenario_from_json(
            v.get("scenario")
                .ok_or_else(|| Error::Input("expression lacks `scenario`".into()))?,
        )?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Input("expression lacks `terms` array".into()))?
            .iter()
            .map(term_from_json)
            .collect::<Result<Vec<_>>>()?;
        BellExpression::new(label, scenario, terms)
    }
}

impl MonogamyExpression {
    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "summands": self.summands.iter().map(BellExpression::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let label = v
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Input("monogamy lacks `label`".into()))?;
        let summands = v
            .get("summands")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Input("monogamy lacks `summands` array".into()))?
            .iter()
            .map(BellExpression::from_json)
            .collect::<Result<Vec<_>>>()?;
        MonogamyExpression::new(label, summands)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{build_separation_bell, build_zg_svetlichny, compose_monogamy, Preset};

    #[test]
    fn separation_round_trip() {
        let e = build_separation_bell(&[0, 1, 2, 3], Some(2)).unwrap();
        let v = e.to_json();
        assert_eq!(v["terms"][0]["parties"], json!([["A", 1], ["B", 2], ["C", 2], ["D", 2]]));
        assert_eq!(v["terms"][2]["sign"], json!(-1));
        assert_eq!(BellExpression::from_json(&v).unwrap(), e);
    }

    #[test]
    fn quasi_round_trip() {
        let e = build_zg_svetlichny(5, true).unwrap();
        let v = e.to_json();
        assert_eq!(v["terms"][1]["direction"], json!("lhs<rhs"));
        assert_eq!(v["terms"][1]["parties"], json!([["A", 2], ["B", 1], ["C", 2]]));
        let text = serde_json::to_string(&v).unwrap();
        let back = BellExpression::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn monogamy_round_trip() {
        let m = compose_monogamy(Preset::PrimaryQuasi, &[0, 1, 2, 3], 3).unwrap();
        assert_eq!(MonogamyExpression::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn malformed_inputs() {
        let bad = [
            json!({}),
            json!({"label": "x", "scenario": {"parties": 3, "settings": 2, "outcomes": 2}, "terms": []}),
            json!({"label": "x", "scenario": {"parties": 3, "settings": 2, "outcomes": 2},
                   "terms": [{"sign": 2, "kind": "separation", "parties": [["A", 1], ["B", 1]]}]}),
            json!({"label": "x", "scenario": {"parties": 3, "settings": 2, "outcomes": 2},
                   "terms": [{"sign": 1, "kind": "separation", "parties": [["A", 3], ["B", 1]]}]}),
            json!({"label": "x", "scenario": {"parties": 3, "settings": 2, "outcomes": 2},
                   "terms": [{"sign": 1, "kind": "quasi", "parties": [["A", 1], ["B", 1]]}]}),
            json!({"label": "x", "scenario": {"parties": 3, "settings": 3, "outcomes": 2}, "terms": []}),
        ];
        for v in bad {
            assert!(BellExpression::from_json(&v).is_err(), "{v}");
        }
    }
}
