use std::fs;
use std::path::Path;

use nwa_core::decide::{self, Evidence, StarEvidence};
use nwa_core::mca::{evaluate_lasso_mca, mca_to_nwa, nwa_to_mca, Mca};
use nwa_core::oracle::evaluate_lasso;
use nwa_core::reduce::reduce_width1_with;
use nwa_core::starcond::check_star_condition_with;
use nwa_core::text::{parse_lasso, parse_mca, parse_nwa, render_mca, render_nwa};
use nwa_core::value::parse_rational;
use nwa_core::{has_width, minimal_width, Error, Exec, LassoWord, Nwa, Threshold, ValueResult};
use serde_json::{json, Value};

use crate::args::{Target, ThresholdArg};
use crate::report::{evidence_json, threshold_json, value_json, Report, Status};

/// A failed query: message for stderr and exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { status: Status::Usage, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::CapExceeded { .. } | Error::Overflow | Error::WidthExceeded { .. } => Status::Limit,
            _ => Status::Usage,
        };
        Failure { status, message: e.to_string() }
    }
}

pub type Outcome = Result<(Report, Status), Failure>;

/// Largest width tried when `eval` has no `--cap`.
const DEFAULT_EVAL_CAP: usize = 16;
/// Largest pumping exponent tried when turning a star witness into a replayable lasso.
const MAX_PUMP: usize = 1 << 12;

pub enum Input {
    Nwa(Nwa),
    Mca(Mca),
}

impl Input {
    pub fn load(path: &Path) -> Result<Input, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let header = text
            .lines()
            .map(|l| l.split(';').next().unwrap_or("").trim())
            .find(|l| !l.is_empty())
            .unwrap_or("");
        let context = |e: Error| Failure { message: format!("{}: {e}", path.display()), ..Failure::from(e) };
        if header == "mca" {
            Ok(Input::Mca(parse_mca(&text).map_err(context)?))
        } else {
            Ok(Input::Nwa(parse_nwa(&text).map_err(context)?))
        }
    }

    /// The input as a nested automaton; monitor-counter automata are translated.
    fn into_nwa(self) -> Result<Nwa, Failure> {
        match self {
            Input::Nwa(n) => Ok(n),
            Input::Mca(m) => Ok(mca_to_nwa(&m)?),
        }
    }
}

fn query(command: &str, file: &Path, fields: Value) -> Value {
    let mut q = json!({"command": command, "file": file.display().to_string()});
    if let Value::Object(map) = fields {
        for (k, v) in map {
            q[k] = v;
        }
    }
    q
}

pub fn parse_threshold(arg: &ThresholdArg) -> Result<Threshold, Failure> {
    let (text, strict) = match (&arg.le, &arg.lt) {
        (Some(t), None) => (t, false),
        (None, Some(t)) => (t, true),
        _ => return Err(Failure::usage("exactly one of --le and --lt is required")),
    };
    let value = parse_rational(text).ok_or_else(|| Failure::usage(format!("invalid threshold `{text}`")))?;
    Ok(Threshold { value, strict })
}

pub fn check(file: &Path) -> Outcome {
    let mut r = Report::new(query("check", file, json!({})));
    let diagnostics: Vec<String> = match Input::load(file)? {
        Input::Nwa(n) => {
            r.extra.push(("kind", json!("nwa")));
            r.extra.push(("deterministic", json!(n.is_deterministic())));
            n.validate().iter().map(ToString::to_string).collect()
        }
        Input::Mca(m) => {
            r.extra.push(("kind", json!("mca")));
            r.extra.push(("deterministic", json!(m.is_deterministic())));
            m.validate().into_iter().map(|d| d.message).collect()
        }
    };
    let valid = diagnostics.is_empty();
    r.answer = json!(valid);
    r.extra.push(("diagnostics", json!(diagnostics)));
    Ok((r, if valid { Status::Yes } else { Status::Usage }))
}

pub fn width(file: &Path, k: usize, max: Option<usize>) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    nwa.ensure_valid()?;
    let mut r = Report::new(query("width", file, json!({"k": k, "max": max})));
    let check = has_width(&nwa, k)?;
    r.answer = json!(check.holds);
    r.witness = check.witness.map(|w| nwa.alphabet.render_word(&w));
    if let Some(max) = max {
        let least = minimal_width(&nwa, max)?;
        r.value = Some(least.map_or(ValueResult::PlusInfinity, |w| ValueResult::integer(w as i64)));
    }
    Ok((r, Status::of(check.holds)))
}

fn evaluate(input: &Input, word: &str, cap: Option<usize>) -> Result<(LassoWord, ValueResult, usize), Failure> {
    match input {
        Input::Nwa(n) => {
            n.ensure_valid()?;
            n.ensure_deterministic()?;
            let w = parse_lasso(&n.alphabet, word)?;
            let cap = match cap {
                Some(c) => c,
                None => minimal_width(n, DEFAULT_EVAL_CAP)?.unwrap_or(DEFAULT_EVAL_CAP),
            };
            Ok((w.clone(), evaluate_lasso(n, &w, cap)?, cap))
        }
        Input::Mca(m) => {
            let w = parse_lasso(&m.alphabet, word)?;
            Ok((w.clone(), evaluate_lasso_mca(m, &w)?, 0))
        }
    }
}

pub fn eval(file: &Path, word: Option<&str>, cap: Option<usize>, certificate: Option<&Path>) -> Outcome {
    let input = Input::load(file)?;
    let Some(cert) = certificate else {
        let word = word.ok_or_else(|| Failure::usage("--word is required"))?;
        let (w, v, _) = evaluate(&input, word, cap)?;
        let mut r = Report::new(query("eval", file, json!({"word": word, "cap": cap})));
        r.value = Some(v);
        r.witness = Some(match &input {
            Input::Nwa(n) => w.render(&n.alphabet),
            Input::Mca(m) => w.render(&m.alphabet),
        });
        r.answer = json!(true);
        return Ok((r, Status::Yes));
    };
    let text = fs::read_to_string(cert).map_err(|e| Failure::usage(format!("{}: {e}", cert.display())))?;
    let c: Value = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", cert.display())))?;
    let witness = c["witness"].as_str().ok_or_else(|| Failure::usage("certificate has no witness"))?;
    let value = c["threshold"]["value"].as_str().and_then(parse_rational);
    let strict = match c["threshold"]["op"].as_str() {
        Some("lt") => true,
        Some("le") => false,
        _ => return Err(Failure::usage("certificate has no threshold")),
    };
    let t = Threshold { value: value.ok_or_else(|| Failure::usage("certificate has no threshold"))?, strict };
    let k = c["k"].as_u64().map(|k| k as usize).or(cap);
    let (_, v, _) = evaluate(&input, witness, k)?;
    let meets = t.admits(&v);
    let mut r = Report::new(query("eval", file, json!({"certificate": cert.display().to_string()})));
    r.answer = json!(meets);
    r.value = Some(v);
    r.witness = Some(witness.to_string());
    r.extra.push(("threshold", threshold_json(&t)));
    Ok((r, Status::of(meets)))
}

/// A pumped star lasso whose value meets `t`, trying exponents 1, 2, 4, ….
fn pumped_witness(nwa: &Nwa, k: usize, s: &StarEvidence, t: &Threshold) -> Option<LassoWord> {
    if !nwa.is_deterministic() {
        return None;
    }
    let mut m = 1;
    while m <= MAX_PUMP {
        let w = s.pumped(m)?;
        if evaluate_lasso(nwa, &w, k).is_ok_and(|v| t.admits(&v)) {
            return Some(w);
        }
        m *= 2;
    }
    None
}

pub fn empty(file: &Path, k: usize, t: &Threshold, certificate: Option<&Path>, exec: Exec) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    let e = decide::emptiness_with(&nwa, k, t, exec)?;
    let mut r = Report::new(query("empty", file, json!({"k": k, "threshold": threshold_json(t)})));
    r.answer = json!(e.nonempty);
    r.value = e.infimum.clone();
    let witness = match &e.evidence {
        Some(Evidence::Lasso(w)) => Some(w.clone()),
        Some(Evidence::Star(s)) => pumped_witness(&nwa, k, s, t),
        _ => None,
    };
    if let Some(w) = &witness {
        r.witness = Some(w.render(&nwa.alphabet));
        if nwa.is_deterministic() {
            r.value = Some(evaluate_lasso(&nwa, w, k)?);
        }
    }
    if let Some(ev) = &e.evidence {
        r.extra.push(("evidence", evidence_json(&nwa.alphabet, ev)));
    }
    if let Some(path) = certificate {
        let cert = json!({
            "file": file.display().to_string(),
            "k": k,
            "threshold": threshold_json(t),
            "nonempty": e.nonempty,
            "witness": r.witness,
            "value": r.value.as_ref().map_or(Value::Null, value_json),
            "evidence": e.evidence.as_ref().map(|ev| evidence_json(&nwa.alphabet, ev)),
        });
        write(path, &format!("{}\n", serde_json::to_string_pretty(&cert).expect("serializable")))?;
    }
    Ok((r, Status::of(e.nonempty)))
}

pub fn infimum(file: &Path, k: usize, exec: Exec) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    let inf = decide::infimum_with(&nwa, k, exec)?;
    let mut r = Report::new(query("infimum", file, json!({"k": k})));
    r.value = Some(inf.value.clone());
    r.answer = json!(inf.value.to_string());
    if let Some(Evidence::Lasso(w)) = &inf.evidence {
        r.witness = Some(w.render(&nwa.alphabet));
    }
    if let Some(ev) = &inf.evidence {
        r.extra.push(("evidence", evidence_json(&nwa.alphabet, ev)));
    }
    Ok((r, Status::Yes))
}

pub fn universal(file: &Path, k: usize, t: &Threshold, exec: Exec) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    let u = decide::universality_deterministic_with(&nwa, k, t, exec)?;
    let mut r = Report::new(query("universal", file, json!({"k": k, "threshold": threshold_json(t)})));
    r.answer = json!(u.universal);
    let witness = match &u.counterexample {
        Some(Evidence::Lasso(w)) => Some(w.clone()),
        // The star witness concerns the mirrored automaton.
        Some(Evidence::Star(s)) => pumped_witness(&nwa.mirrored()?, k, s, &t.mirrored()),
        _ => None,
    };
    if let Some(w) = &witness {
        r.witness = Some(w.render(&nwa.alphabet));
        r.value = Some(evaluate_lasso(&nwa, w, k)?);
    }
    if let Some(ev) = &u.counterexample {
        r.extra.push(("evidence", evidence_json(&nwa.alphabet, ev)));
    }
    Ok((r, Status::of(u.universal)))
}

pub fn star(file: &Path, k: usize, exec: Exec) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    let found = check_star_condition_with(&nwa, k, exec)?;
    let mut r = Report::new(query("star", file, json!({"k": k})));
    r.answer = json!(found.is_some());
    if let Some(s) = &found {
        let evidence = StarEvidence {
            access: s.access.clone(),
            cycle: s.cycle_letters(),
            closing: s.closing.clone(),
            witness: s.clone(),
        };
        r.witness = evidence.pumped(1).map(|w| w.render(&nwa.alphabet));
        r.extra.push(("evidence", evidence_json(&nwa.alphabet, &Evidence::Star(evidence))));
    }
    Ok((r, Status::of(found.is_some())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { status: Status::Usage, message: format!("{}: {e}", path.display()) })
}

pub fn translate(file: &Path, to: Target, k: Option<usize>, out: &Path) -> Outcome {
    let text = match (Input::load(file)?, to) {
        (Input::Nwa(n), Target::Mca) => {
            let k = k.ok_or_else(|| Failure::usage("--k is required to translate a nested automaton"))?;
            render_mca(&nwa_to_mca(&n, k)?)
        }
        (Input::Nwa(n), Target::Nwa) => {
            n.ensure_valid()?;
            render_nwa(&n)
        }
        (Input::Mca(m), Target::Nwa) => render_nwa(&mca_to_nwa(&m)?),
        (Input::Mca(m), Target::Mca) => {
            m.ensure_valid()?;
            render_mca(&m)
        }
    };
    write(out, &text)?;
    let target = match to {
        Target::Mca => "mca",
        Target::Nwa => "nwa",
    };
    let mut r = Report::new(query("translate", file, json!({"to": target, "k": k})));
    r.answer = json!(true);
    r.extra.push(("output", json!(out.display().to_string())));
    Ok((r, Status::Yes))
}

pub fn reduce(file: &Path, k: usize, out: &Path, exec: Exec) -> Outcome {
    let nwa = Input::load(file)?.into_nwa()?;
    let reduced = reduce_width1_with(&nwa, k, exec)?;
    write(out, &render_nwa(&reduced))?;
    let mut r = Report::new(query("reduce", file, json!({"k": k})));
    r.answer = json!(true);
    r.extra.push(("output", json!(out.display().to_string())));
    r.extra.push(("states", json!(reduced.master.n_states())));
    r.extra.push(("slaves", json!(reduced.slaves.len())));
    Ok((r, Status::Yes))
}
