use nwa_core::decide::Evidence;
use nwa_core::{Alphabet, Threshold, ValueResult};
use serde_json::{json, Value};

/// Exit status of a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Yes = 0,
    No = 1,
    Usage = 2,
    Limit = 3,
}

impl Status {
    pub fn of(answer: bool) -> Self {
        if answer {
            Status::Yes
        } else {
            Status::No
        }
    }
}

/// The JSON envelope printed on stdout.
pub struct Report {
    pub query: Value,
    pub answer: Value,
    pub value: Option<ValueResult>,
    pub witness: Option<String>,
    pub extra: Vec<(&'static str, Value)>,
}

impl Report {
    pub fn new(query: Value) -> Self {
        Report { query, answer: Value::Null, value: None, witness: None, extra: Vec::new() }
    }

    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "query": self.query,
            "answer": self.answer,
            "value": self.value.as_ref().map_or(Value::Null, value_json),
            "witness": self.witness,
        });
        for (key, v) in &self.extra {
            out[*key] = v.clone();
        }
        out
    }
}

fn integer(n: &num_bigint::BigInt) -> Value {
    match i64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

pub fn value_json(v: &ValueResult) -> Value {
    match v {
        ValueResult::Finite(r) => json!({"tag": "finite", "p": integer(r.numer()), "q": integer(r.denom())}),
        ValueResult::NegInfinity => json!({"tag": "-inf", "p": null, "q": null}),
        ValueResult::PlusInfinity => json!({"tag": "+inf", "p": null, "q": null}),
        ValueResult::Bottom => json!({"tag": "bottom", "p": null, "q": null}),
    }
}

pub fn threshold_json(t: &Threshold) -> Value {
    json!({"op": if t.strict { "lt" } else { "le" }, "value": t.value.to_string()})
}

pub fn evidence_json(alphabet: &Alphabet, e: &Evidence) -> Value {
    match e {
        Evidence::Star(s) => json!({
            "kind": "star",
            "j": s.witness.j,
            "sum": s.witness.j_sum,
            "access": alphabet.render_word(&s.access),
            "cycle": alphabet.render_word(&s.cycle),
            "closing": s.closing.as_ref().map(|c| alphabet.render_word(c)),
        }),
        Evidence::UnboundedFragment(detail) => json!({"kind": "unbounded-fragment", "detail": detail}),
        Evidence::Lasso(w) => json!({"kind": "lasso", "lasso": w.render(alphabet)}),
        Evidence::LimitOnly(w) => json!({"kind": "limit", "cycle": w.render(alphabet)}),
    }
}
