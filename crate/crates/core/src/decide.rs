//! Emptiness, infimum and deterministic universality for nested automata of bounded width.
//!
//! Nondeterministic inputs are first made deterministic over choice labels. If the oldest slaves
//! can accumulate unboundedly negative weight the infimum is minus infinity. Otherwise the input
//! is reduced to width 1 and the infimum is the least cycle ratio of its fragment graph.
//! Certificates are words over the input alphabet and can be replayed by the oracle.

use crate::determinize::{materialize_deterministic, Materialized, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::meanpayoff::{self, RatioLasso};
use crate::model::{LassoWord, Letter, Nwa};
use crate::par::Exec;
use crate::reduce::{fragment_automaton_with, reduce_width1_with, FragmentAutomaton};
use crate::starcond::{check_star_condition_with, StarWitness};
use crate::value::{Threshold, ValueResult};
use crate::width::has_width;

/// Longest explicit period emitted for a pumped certificate.
pub const CERTIFICATE_LIMIT: usize = 100_000;

/// A star witness with its words translated to the input alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarEvidence {
    pub witness: StarWitness,
    pub access: Vec<Letter>,
    pub cycle: Vec<Letter>,
    pub closing: Option<Vec<Letter>>,
}

impl StarEvidence {
    /// `access · (cycle^m · closing)^ω`, whose value decreases without bound in `m`.
    pub fn pumped(&self, m: usize) -> Option<LassoWord> {
        let closing = self.closing.as_ref()?;
        let mut period = Vec::with_capacity(self.cycle.len() * m + closing.len());
        for _ in 0..m {
            period.extend(&self.cycle);
        }
        period.extend(closing);
        Some(LassoWord { prefix: self.access.clone(), period })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// Unboundedly negative values.
    Star(StarEvidence),
    /// A fragment with no least value lies on an accepting cycle of the fragment graph.
    UnboundedFragment(String),
    /// An accepted lasso whose value meets the threshold.
    Lasso(LassoWord),
    /// The lasso's cycle meets the threshold but no accepted lasso does (or none short enough to
    /// print): words staying ever longer on the cycle between accepting visits reach it.
    LimitOnly(LassoWord),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Emptiness {
    /// Some word has value meeting the threshold.
    pub nonempty: bool,
    pub evidence: Option<Evidence>,
    /// Computed when `nonempty` is false.
    pub infimum: Option<ValueResult>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infimum {
    pub value: ValueResult,
    pub evidence: Option<Evidence>,
}

/// The deterministic automaton the pipeline works on, with the map back to input letters.
struct Prepared {
    det: Nwa,
    labels: Option<Materialized>,
}

impl Prepared {
    fn new(nwa: &Nwa, k: usize) -> Result<Self> {
        nwa.ensure_valid()?;
        if let Some(w) = has_width(nwa, k)?.witness {
            return Err(Error::Precondition(format!(
                "automaton does not have width {k}: {}",
                nwa.alphabet.render_word(&w)
            )));
        }
        if nwa.is_deterministic() {
            return Ok(Prepared { det: nwa.clone(), labels: None });
        }
        let m = materialize_deterministic(nwa, k, DEFAULT_CAP)?;
        Ok(Prepared { det: m.nwa.clone(), labels: Some(m) })
    }

    fn word(&self, w: &[Letter]) -> Vec<Letter> {
        match &self.labels {
            Some(m) => w.iter().map(|&l| m.labels[l].letter).collect(),
            None => w.to_vec(),
        }
    }

    fn lasso(&self, w: &LassoWord) -> LassoWord {
        match &self.labels {
            Some(m) => m.project(w),
            None => w.clone(),
        }
    }

    fn star(&self, k: usize, exec: Exec) -> Result<Option<StarEvidence>> {
        Ok(check_star_condition_with(&self.det, k, exec)?.map(|w| StarEvidence {
            access: self.word(&w.access),
            cycle: self.word(&w.cycle_letters()),
            closing: w.closing.as_ref().map(|c| self.word(c)),
            witness: w,
        }))
    }

    /// The fragment graph of the width-1 reduction, or the evidence that the infimum is minus infinity.
    fn fragments(&self, k: usize, exec: Exec) -> Result<std::result::Result<FragmentAutomaton, Evidence>> {
        let reduced = reduce_width1_with(&self.det, k, exec)?;
        match fragment_automaton_with(&reduced, exec) {
            Ok(f) => Ok(Ok(f)),
            Err(e @ Error::NegInfinityFragment { .. }) => Ok(Err(Evidence::UnboundedFragment(e.to_string()))),
            Err(e) => Err(e),
        }
    }

    fn graph_lasso(&self, f: &FragmentAutomaton, l: &RatioLasso) -> LassoWord {
        self.lasso(&f.lasso(l))
    }
}

/// Whether some word has value `≤ t` (or `< t`), for an automaton of width `k`.
pub fn emptiness(nwa: &Nwa, k: usize, t: &Threshold) -> Result<Emptiness> {
    emptiness_with(nwa, k, t, Exec::default())
}

pub fn emptiness_with(nwa: &Nwa, k: usize, t: &Threshold, exec: Exec) -> Result<Emptiness> {
    let p = Prepared::new(nwa, k)?;
    if let Some(star) = p.star(k, exec)? {
        return Ok(Emptiness { nonempty: true, evidence: Some(Evidence::Star(star)), infimum: None });
    }
    let f = match p.fragments(k, exec)? {
        Ok(f) => f,
        Err(ev) => return Ok(Emptiness { nonempty: true, evidence: Some(ev), infimum: None }),
    };
    let answer = meanpayoff::threshold_emptiness_with(&f.graph, t, exec)?;
    if !answer.holds {
        let infimum = meanpayoff::infimum_ratio(&f.graph)?;
        return Ok(Emptiness { nonempty: false, evidence: None, infimum: Some(infimum) });
    }
    let evidence = evidence_for(&p, &f, answer);
    Ok(Emptiness { nonempty: true, evidence: Some(evidence), infimum: None })
}

fn evidence_for(p: &Prepared, f: &FragmentAutomaton, answer: meanpayoff::ThresholdAnswer) -> Evidence {
    let witness = answer.witness.expect("a satisfied threshold has a witness");
    match answer.certificate {
        Some(meanpayoff::Certificate::Accepting(pumped)) => match pumped.expand(CERTIFICATE_LIMIT) {
            Some(l) => Evidence::Lasso(p.graph_lasso(f, &l)),
            None => Evidence::LimitOnly(p.graph_lasso(f, &witness)),
        },
        _ => Evidence::LimitOnly(p.graph_lasso(f, &witness)),
    }
}

/// The infimum of the values of all words, with a word attaining it when one exists.
pub fn infimum(nwa: &Nwa, k: usize) -> Result<Infimum> {
    infimum_with(nwa, k, Exec::default())
}

pub fn infimum_with(nwa: &Nwa, k: usize, exec: Exec) -> Result<Infimum> {
    let p = Prepared::new(nwa, k)?;
    if let Some(star) = p.star(k, exec)? {
        return Ok(Infimum { value: ValueResult::NegInfinity, evidence: Some(Evidence::Star(star)) });
    }
    let f = match p.fragments(k, exec)? {
        Ok(f) => f,
        Err(ev) => return Ok(Infimum { value: ValueResult::NegInfinity, evidence: Some(ev) }),
    };
    let Some((ratio, _)) = meanpayoff::minimum_cycle_with(&f.graph, exec)? else {
        return Ok(Infimum { value: ValueResult::PlusInfinity, evidence: None });
    };
    let answer = meanpayoff::threshold_emptiness_with(&f.graph, &Threshold::le(ratio.clone()), exec)?;
    let evidence = evidence_for(&p, &f, answer);
    Ok(Infimum { value: ValueResult::Finite(ratio), evidence: Some(evidence) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universality {
    /// No accepted word has value above the threshold.
    pub universal: bool,
    /// A word whose value exceeds the threshold.
    pub counterexample: Option<Evidence>,
}

/// Whether every accepted word has value `≤ t` (or `< t`), for a deterministic automaton.
///
/// Decided as emptiness of the automaton with negated weights at the mirrored threshold. The
/// mirrored value of a word is minus the limit superior of its averages, so the check is exact on
/// ultimately periodic words and concerns the limit superior in general.
pub fn universality_deterministic(nwa: &Nwa, k: usize, t: &Threshold) -> Result<Universality> {
    universality_deterministic_with(nwa, k, t, Exec::default())
}

pub fn universality_deterministic_with(nwa: &Nwa, k: usize, t: &Threshold, exec: Exec) -> Result<Universality> {
    nwa.ensure_valid()?;
    nwa.ensure_deterministic()?;
    let mirrored = nwa.mirrored()?;
    let e = emptiness_with(&mirrored, k, &t.mirrored(), exec)?;
    Ok(Universality { universal: !e.nonempty, counterexample: e.evidence })
}
