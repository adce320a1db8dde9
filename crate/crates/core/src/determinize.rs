//! Deterministic counterpart of a nondeterministic nested automaton over choice labels.
//!
//! Each slave comes in `k` copies and a newly invoked slave takes the lowest free copy of its
//! index, so at every position the active slaves are pairwise distinct. A choice label fixes a
//! letter, a master transition, and one transition for every active copy; reading labels instead
//! of letters makes every run deterministic while preserving the set of run values.

use std::collections::HashMap;

use crate::config::invocation_options;
use crate::error::{add, Error, Result};
use crate::model::{Alphabet, Automaton, Letter, LassoWord, Nwa, State, Transition, WeightedAutomaton};
use crate::oracle::{Events, Machine};
use crate::value::ValueFn;

/// Default bound on explored configurations.
pub const DEFAULT_CAP: usize = 10_000;

/// Active slave copy: `(slave, copy, state)`.
pub type CopySlot = (usize, usize, State);

/// A letter of the deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChoiceLabel {
    pub letter: Letter,
    pub master: usize,
    /// Copy and initial transition of the slave invoked on this step.
    pub new: Option<(usize, usize)>,
    /// Transition taken by each active copy, sorted by copy.
    pub moves: Vec<(CopySlot, usize)>,
}

impl ChoiceLabel {
    fn move_for(&self, slot: &CopySlot) -> Option<usize> {
        self.moves.binary_search_by(|(s, _)| s.cmp(slot)).ok().map(|i| self.moves[i].1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CopyConfig {
    master: State,
    slots: Vec<CopySlot>,
}

/// Labels occurring on runs of width at most `k`, in breadth-first discovery order.
pub fn choice_labels(nwa: &Nwa, k: usize, cap: usize) -> Result<Vec<ChoiceLabel>> {
    let mut index: HashMap<CopyConfig, ()> = HashMap::new();
    let mut labels: HashMap<ChoiceLabel, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for &q in nwa.master.initial() {
        let c = CopyConfig { master: q, slots: Vec::new() };
        if index.insert(c.clone(), ()).is_none() {
            queue.push_back(c);
        }
    }
    while let Some(c) = queue.pop_front() {
        for letter in nwa.alphabet.ids() {
            for (label, to) in copy_successors(nwa, &c, letter, k) {
                if !labels.contains_key(&label) {
                    labels.insert(label.clone(), order.len());
                    order.push(label);
                }
                if !index.contains_key(&to) {
                    if index.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    index.insert(to.clone(), ());
                    queue.push_back(to);
                }
            }
        }
    }
    Ok(order)
}

fn copy_successors(nwa: &Nwa, c: &CopyConfig, letter: Letter, k: usize) -> Vec<(ChoiceLabel, CopyConfig)> {
    let survivors: Vec<CopySlot> =
        c.slots.iter().copied().filter(|&(i, _, s)| !nwa.slave(i).automaton.is_accepting(s)).collect();
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &(i, _, s) in &survivors {
        let opts = nwa.slave(i).automaton.out(s, letter);
        combos = combos
            .into_iter()
            .flat_map(|p| {
                opts.iter().map(move |&t| {
                    let mut p = p.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for &mt in nwa.master.out(c.master, letter) {
        let m = nwa.master.transition(mt);
        for new in invocation_options(nwa, m.label, letter) {
            if new.is_some() && survivors.len() >= k {
                continue;
            }
            let copy = (0..k).find(|&cp| !survivors.iter().any(|&(i, c2, _)| i == m.label && c2 == cp)).unwrap_or(0);
            for combo in &combos {
                let mut moves: Vec<(CopySlot, usize)> = survivors.iter().copied().zip(combo.iter().copied()).collect();
                moves.sort_unstable();
                let mut slots: Vec<CopySlot> = survivors
                    .iter()
                    .zip(combo)
                    .map(|(&(i, cp, _), &t)| (i, cp, nwa.slave(i).automaton.transition(t).to))
                    .collect();
                if let Some(t) = new {
                    slots.push((m.label, copy, nwa.slave(m.label).automaton.transition(t).to));
                }
                let label = ChoiceLabel { letter, master: mt, new: new.map(|t| (copy, t)), moves };
                out.push((label, CopyConfig { master: m.to, slots }));
            }
        }
    }
    out
}

/// An explicit deterministic automaton and the labels its letters stand for.
#[derive(Clone, Debug)]
pub struct Materialized {
    pub nwa: Nwa,
    pub labels: Vec<ChoiceLabel>,
}

impl Materialized {
    /// The original letters underlying a word over choice labels.
    pub fn project(&self, w: &LassoWord) -> LassoWord {
        project(&self.labels, w)
    }
}

fn project(labels: &[ChoiceLabel], w: &LassoWord) -> LassoWord {
    let map = |v: &[Letter]| v.iter().map(|&l| labels[l].letter).collect();
    LassoWord { prefix: map(&w.prefix), period: map(&w.period) }
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// Explicit deterministic automaton of width at most `k` over the choice labels of `nwa`.
///
/// Slaves are normalized first. Only slave copies that some label invokes are emitted; the
/// dummy slave comes last. Fails with `CapExceeded` if more than `cap` configurations are reachable.
pub fn materialize_deterministic(nwa: &Nwa, k: usize, cap: usize) -> Result<Materialized> {
    nwa.ensure_valid()?;
    let norm = nwa.normalize_slaves();
    let labels = choice_labels(&norm, k, cap)?;
    let names: Vec<String> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{}_{}", norm.alphabet.name(l.letter), i))
        .collect();
    let alphabet = if labels.is_empty() {
        Alphabet::new([fresh_name(norm.alphabet.names(), "none")])?
    } else {
        Alphabet::new(names)?
    };
    let n = alphabet.len();

    let mut copies: Vec<(usize, usize)> = labels
        .iter()
        .filter_map(|l| l.new.map(|(c, _)| (norm.master.transition(l.master).label, c)))
        .collect();
    copies.sort_unstable();
    copies.dedup();
    let copy_index: HashMap<(usize, usize), usize> = copies.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let dummy = copies.len();

    let mut slaves = Vec::with_capacity(copies.len() + 1);
    for &(i, c) in &copies {
        let b = &norm.slave(i).automaton;
        let init = fresh_name(b.state_names(), "init");
        let mut states = vec![init];
        states.extend(b.state_names().iter().cloned());
        let mut ts = Vec::new();
        for (l, label) in labels.iter().enumerate() {
            if let Some((cp, t)) = label.new {
                if cp == c && norm.master.transition(label.master).label == i {
                    let tr = b.transition(t);
                    ts.push(Transition { from: 0, letter: l, to: tr.to + 1, label: tr.label });
                }
            }
            for &((si, sc, s), t) in &label.moves {
                if si == i && sc == c {
                    let tr = b.transition(t);
                    ts.push(Transition { from: s + 1, letter: l, to: tr.to + 1, label: tr.label });
                }
            }
        }
        let accepting = b.accepting_states().into_iter().map(|s| s + 1).collect();
        let aut = Automaton::new(n, states, vec![0], accepting, ts)?;
        slaves.push(WeightedAutomaton::new(aut, norm.slave(i).value_fn)?);
    }
    let dummy_aut = Automaton::new(n, vec!["d".into()], vec![0], vec![0], Vec::new())?;
    slaves.push(WeightedAutomaton::new(dummy_aut, ValueFn::Sum)?);

    let m = &norm.master;
    let mut states = m.state_names().to_vec();
    let many_initials = m.initial().len() > 1;
    let start = if many_initials {
        states.push(fresh_name(m.state_names(), "start"));
        states.len() - 1
    } else {
        m.initial()[0]
    };
    let mut ts = Vec::new();
    for (l, label) in labels.iter().enumerate() {
        let t = m.transition(label.master);
        let slave = match label.new {
            Some((c, _)) => copy_index[&(t.label, c)],
            None => dummy,
        };
        ts.push(Transition { from: t.from, letter: l, to: t.to, label: slave });
        if many_initials && m.initial().contains(&t.from) {
            ts.push(Transition { from: start, letter: l, to: t.to, label: slave });
        }
    }
    let master = Automaton::new(n, states, vec![start], m.accepting_states(), ts)?;
    Ok(Materialized { nwa: Nwa::new(alphabet, master, slaves), labels })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct LabelSlot {
    slot: CopySlot,
    origin: usize,
    acc: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct LabelState {
    master: Option<State>,
    slots: Vec<LabelSlot>,
}

/// Direct simulation of the (normalized) input automaton driven by choice labels.
pub(crate) struct LabelMachine {
    nwa: Nwa,
    labels: Vec<ChoiceLabel>,
    cap: usize,
}

impl LabelMachine {
    pub(crate) fn new(nwa: &Nwa, cap: usize) -> Result<Self> {
        let nwa = nwa.normalize_slaves();
        let labels = choice_labels(&nwa, cap, DEFAULT_CAP)?;
        Ok(LabelMachine { nwa, labels, cap })
    }

    pub(crate) fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub(crate) fn project(&self, w: &LassoWord) -> LassoWord {
        project(&self.labels, w)
    }
}

impl Machine for LabelMachine {
    type State = LabelState;
    type Key = (Option<State>, Vec<CopySlot>);

    fn start(&self) -> LabelState {
        LabelState { master: None, slots: Vec::new() }
    }

    fn key(&self, s: &LabelState) -> Self::Key {
        (s.master, s.slots.iter().map(|a| a.slot).collect())
    }

    fn step(&self, s: &LabelState, letter: Letter, pos: usize, events: &mut Events) -> Result<Option<LabelState>> {
        let label = &self.labels[letter];
        let t = self.nwa.master.transition(label.master);
        let from_ok = match s.master {
            Some(q) => q == t.from,
            None => self.nwa.master.initial().contains(&t.from),
        };
        if !from_ok {
            return Ok(None);
        }
        let mut slots = Vec::with_capacity(s.slots.len() + 1);
        for a in &s.slots {
            let (i, c, st) = a.slot;
            let b = self.nwa.slave(i);
            if b.automaton.is_accepting(st) {
                events.returned.push((a.origin, a.acc));
                continue;
            }
            let Some(tr) = label.move_for(&a.slot) else {
                return Ok(None);
            };
            slots.push(LabelSlot {
                slot: (i, c, b.automaton.transition(tr).to),
                origin: a.origin,
                acc: add(a.acc, b.effective_weight(tr))?,
            });
        }
        if let Some((c, tr)) = label.new {
            let b = self.nwa.slave(t.label);
            events.invoked = true;
            slots.push(LabelSlot {
                slot: (t.label, c, b.automaton.transition(tr).to),
                origin: pos,
                acc: b.effective_weight(tr),
            });
        }
        if slots.len() > self.cap {
            return Err(Error::WidthExceeded { position: pos, cap: self.cap });
        }
        Ok(Some(LabelState { master: Some(t.to), slots }))
    }

    fn accepting(&self, s: &LabelState) -> bool {
        s.master.is_some_and(|q| self.nwa.master.is_accepting(q))
    }

    fn oldest_pending(&self, s: &LabelState) -> Option<usize> {
        s.slots.iter().map(|a| a.origin).min()
    }

    fn horizon(&self) -> usize {
        self.cap
    }
}
