//! Automata with monitor counters and translations to and from nested automata.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::config::invocation_options;
use crate::error::{add, Error, Result};
use crate::model::{Alphabet, Automaton, LassoWord, Letter, Nwa, State, Transition, WeightedAutomaton};
use crate::oracle::{evaluate_machine, Events, Machine};
use crate::value::{ValueFn, ValueResult};

/// Counter instruction; `Idle` leaves an inactive counter untouched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Start,
    Terminate,
    Add(i64),
    Idle,
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Start => write!(f, "s"),
            Instr::Terminate => write!(f, "t"),
            Instr::Add(n) => write!(f, "{n}"),
            Instr::Idle => write!(f, "."),
        }
    }
}

/// Automaton with `n_counters` monitor counters; transition labels are instruction vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Mca {
    pub alphabet: Alphabet,
    pub automaton: Automaton<Vec<Instr>>,
    pub n_counters: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum McaDiagnosticKind {
    NoInitialState,
    AlphabetMismatch,
    VectorLength,
    SeveralStarts,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McaDiagnostic {
    pub kind: McaDiagnosticKind,
    pub message: String,
}

impl Mca {
    pub fn validate(&self) -> Vec<McaDiagnostic> {
        let mut out = Vec::new();
        let a = &self.automaton;
        if a.initial().is_empty() {
            out.push(McaDiagnostic { kind: McaDiagnosticKind::NoInitialState, message: "no initial state".into() });
        }
        if a.n_letters() != self.alphabet.len() {
            out.push(McaDiagnostic {
                kind: McaDiagnosticKind::AlphabetMismatch,
                message: "transition table does not match the alphabet".into(),
            });
        }
        for t in a.transitions() {
            let site = format!("{} {} {}", a.state_name(t.from), self.alphabet.name(t.letter), a.state_name(t.to));
            if t.label.len() != self.n_counters {
                out.push(McaDiagnostic {
                    kind: McaDiagnosticKind::VectorLength,
                    message: format!("transition {site} has {} instructions, expected {}", t.label.len(), self.n_counters),
                });
            }
            if t.label.iter().filter(|&&i| i == Instr::Start).count() > 1 {
                out.push(McaDiagnostic {
                    kind: McaDiagnosticKind::SeveralStarts,
                    message: format!("transition {site} starts more than one counter"),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            Some(d) => Err(Error::Malformed(d.message)),
            None => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.automaton.is_deterministic()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct McaState {
    q: State,
    /// `(start position, value)` of each active counter.
    counters: Vec<Option<(usize, i64)>>,
}

struct McaMachine<'a> {
    mca: &'a Mca,
}

impl Machine for McaMachine<'_> {
    type State = McaState;
    type Key = (State, Vec<bool>);

    fn start(&self) -> McaState {
        McaState { q: self.mca.automaton.initial()[0], counters: vec![None; self.mca.n_counters] }
    }

    fn key(&self, s: &McaState) -> Self::Key {
        (s.q, s.counters.iter().map(Option::is_some).collect())
    }

    fn step(&self, s: &McaState, letter: Letter, pos: usize, events: &mut Events) -> Result<Option<McaState>> {
        let a = &self.mca.automaton;
        let Some(&t) = a.out(s.q, letter).first() else {
            return Ok(None);
        };
        let t = a.transition(t);
        let mut counters = s.counters.clone();
        for (c, instr) in counters.iter_mut().zip(&t.label) {
            match (*instr, *c) {
                (Instr::Start, None) => {
                    *c = Some((pos, 0));
                    events.invoked = true;
                }
                (Instr::Terminate, Some((origin, v))) => {
                    events.returned.push((origin, v));
                    *c = None;
                }
                (Instr::Add(n), Some((origin, v))) => *c = Some((origin, add(v, n)?)),
                (Instr::Idle, None) => {}
                _ => return Ok(None),
            }
        }
        Ok(Some(McaState { q: t.to, counters }))
    }

    fn accepting(&self, s: &McaState) -> bool {
        self.mca.automaton.is_accepting(s.q)
    }

    fn oldest_pending(&self, s: &McaState) -> Option<usize> {
        s.counters.iter().flatten().map(|&(origin, _)| origin).min()
    }

    fn horizon(&self) -> usize {
        1
    }
}

/// Value of the unique run of a deterministic monitor-counter automaton on `w`.
pub fn evaluate_lasso_mca(mca: &Mca, w: &LassoWord) -> Result<ValueResult> {
    mca.ensure_valid()?;
    if !mca.is_deterministic() {
        return Err(Error::Nondeterministic(format!("{:?}", mca.automaton.nondeterminism_site())));
    }
    if w.period.is_empty() || w.prefix.iter().chain(&w.period).any(|&a| a >= mca.alphabet.len()) {
        return Err(Error::Precondition("lasso outside the alphabet or with empty period".into()));
    }
    evaluate_machine(&McaMachine { mca }, w)
}

/// Nested automaton with the same lasso values as a deterministic monitor-counter automaton.
///
/// The master tracks the set of active counters and drops transitions that misuse a counter.
/// There is one slave per counter and start state, following the run from that state until the
/// counter terminates, plus a trailing dummy.
pub fn mca_to_nwa(mca: &Mca) -> Result<Nwa> {
    mca.ensure_valid()?;
    if !mca.is_deterministic() {
        return Err(Error::Nondeterministic(format!("{:?}", mca.automaton.nondeterminism_site())));
    }
    let a = &mca.automaton;
    let n = mca.alphabet.len();

    let mut starts: Vec<(usize, State)> = Vec::new();
    for t in a.transitions() {
        if let Some(i) = t.label.iter().position(|&x| x == Instr::Start) {
            starts.push((i, t.from));
        }
    }
    starts.sort_unstable();
    starts.dedup();
    let slave_of: HashMap<(usize, State), usize> = starts.iter().enumerate().map(|(j, &p)| (p, j)).collect();

    let mut slaves = Vec::with_capacity(starts.len() + 1);
    for &(i, q) in &starts {
        let m = a.n_states();
        let mut names: Vec<String> = vec!["init".into()];
        names.extend(a.state_names().iter().map(|s| format!("at_{s}")));
        names.push("done".into());
        let done = m + 1;
        let mut ts = Vec::new();
        for t in a.transitions() {
            if t.from == q && t.label[i] == Instr::Start {
                ts.push(Transition { from: 0, letter: t.letter, to: t.to + 1, label: 0 });
            }
            match t.label[i] {
                Instr::Add(w) => ts.push(Transition { from: t.from + 1, letter: t.letter, to: t.to + 1, label: w }),
                Instr::Terminate => ts.push(Transition { from: t.from + 1, letter: t.letter, to: done, label: 0 }),
                _ => {}
            }
        }
        let aut = Automaton::new(n, names, vec![0], vec![done], ts)?;
        slaves.push(WeightedAutomaton::new(aut, ValueFn::Sum)?);
    }
    let dummy = slaves.len();
    slaves.push(WeightedAutomaton::new(Automaton::new(n, vec!["d".into()], vec![0], vec![0], Vec::new())?, ValueFn::Sum)?);

    let mut index: HashMap<(State, Vec<bool>), usize> = HashMap::new();
    let mut nodes: Vec<(State, Vec<bool>)> = Vec::new();
    let mut queue = VecDeque::new();
    let init = (a.initial()[0], vec![false; mca.n_counters]);
    index.insert(init.clone(), 0);
    nodes.push(init.clone());
    queue.push_back(0);
    let mut ts = Vec::new();
    while let Some(x) = queue.pop_front() {
        let (q, mask) = nodes[x].clone();
        for letter in mca.alphabet.ids() {
            for &ti in a.out(q, letter) {
                let t = a.transition(ti);
                let mut next = mask.clone();
                let mut ok = true;
                let mut invoke = dummy;
                for (c, instr) in t.label.iter().enumerate() {
                    match (*instr, mask[c]) {
                        (Instr::Start, false) => {
                            next[c] = true;
                            invoke = slave_of[&(c, q)];
                        }
                        (Instr::Terminate, true) => next[c] = false,
                        (Instr::Add(_), true) | (Instr::Idle, false) => {}
                        _ => ok = false,
                    }
                }
                if !ok {
                    continue;
                }
                let key = (t.to, next);
                let to = *index.entry(key.clone()).or_insert_with(|| {
                    nodes.push(key);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                });
                ts.push(Transition { from: x, letter, to, label: invoke });
            }
        }
    }
    let names: Vec<String> = nodes
        .iter()
        .map(|(q, mask)| {
            let bits: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
            if bits.is_empty() {
                a.state_name(*q).to_string()
            } else {
                format!("{}_{}", a.state_name(*q), bits)
            }
        })
        .collect();
    let accepting = (0..nodes.len()).filter(|&x| a.is_accepting(nodes[x].0)).collect();
    let master = Automaton::new(n, names, vec![0], accepting, ts)?;
    Ok(Nwa::new(mca.alphabet.clone(), master, slaves))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Tracked {
    slave: usize,
    state: State,
    /// Weight not yet added to the counter.
    carry: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct ProductState {
    master: State,
    counters: Vec<Option<Tracked>>,
}

/// Monitor-counter automaton with the same lasso values as a nested automaton of width `k`.
///
/// Every active slave is tracked in a counter, the lowest free one at invocation. A counter
/// cannot add and terminate on the same step, so a slave's last weight is added one step after
/// it is read and the counter terminates one step later still; a slave whose first step already
/// reaches acceptance keeps its counter for up to two steps after returning. The number of
/// counters is therefore the most ever simultaneously in use, which can exceed `k`.
pub fn nwa_to_mca(nwa: &Nwa, k: usize) -> Result<Mca> {
    nwa.ensure_valid()?;
    let n = nwa.alphabet.len();
    let mut index: HashMap<ProductState, usize> = HashMap::new();
    let mut nodes: Vec<ProductState> = Vec::new();
    let mut queue = VecDeque::new();
    for &q in nwa.master.initial() {
        let s = ProductState { master: q, counters: Vec::new() };
        if !index.contains_key(&s) {
            index.insert(s.clone(), nodes.len());
            nodes.push(s);
            queue.push_back(nodes.len() - 1);
        }
    }
    let n_initial = nodes.len();
    let mut ts: Vec<Transition<Vec<Instr>>> = Vec::new();
    while let Some(x) = queue.pop_front() {
        let cur = nodes[x].clone();
        for letter in nwa.alphabet.ids() {
            for (to, instrs) in product_successors(nwa, &cur, letter, k)? {
                let id = *index.entry(to.clone()).or_insert_with(|| {
                    nodes.push(to);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                });
                ts.push(Transition { from: x, letter, to: id, label: instrs });
            }
        }
    }
    let n_counters = ts.iter().map(|t| t.label.len()).chain(nodes.iter().map(|s| s.counters.len())).max().unwrap_or(0);
    for t in &mut ts {
        t.label.resize(n_counters, Instr::Idle);
    }
    let names = (0..nodes.len()).map(|x| format!("{}_{}", nwa.master.state_name(nodes[x].master), x)).collect();
    let initial = (0..n_initial).collect();
    let accepting = (0..nodes.len()).filter(|&x| nwa.master.is_accepting(nodes[x].master)).collect();
    let automaton = Automaton::new(n, names, initial, accepting, ts)?;
    Ok(Mca { alphabet: nwa.alphabet.clone(), automaton, n_counters })
}

fn product_successors(nwa: &Nwa, cur: &ProductState, letter: Letter, k: usize) -> Result<Vec<(ProductState, Vec<Instr>)>> {
    // Per counter: the possible (instruction, next tracked value) pairs.
    let mut per_counter: Vec<Vec<(Instr, Option<Tracked>)>> = Vec::with_capacity(cur.counters.len());
    let mut live = 0;
    for c in &cur.counters {
        let opts = match c {
            None => vec![(Instr::Idle, None)],
            Some(tr) => {
                let b = nwa.slave(tr.slave);
                if b.automaton.is_accepting(tr.state) {
                    if tr.carry == 0 {
                        vec![(Instr::Terminate, None)]
                    } else {
                        vec![(Instr::Add(tr.carry), Some(Tracked { carry: 0, ..tr.clone() }))]
                    }
                } else {
                    live += 1;
                    let mut v = Vec::new();
                    for &t in b.automaton.out(tr.state, letter) {
                        let w = add(tr.carry, b.effective_weight(t))?;
                        let to = b.automaton.transition(t).to;
                        if b.automaton.is_accepting(to) && w == 0 {
                            v.push((Instr::Terminate, None));
                        } else {
                            v.push((Instr::Add(w), Some(Tracked { slave: tr.slave, state: to, carry: 0 })));
                        }
                    }
                    v
                }
            }
        };
        if opts.is_empty() {
            return Ok(Vec::new());
        }
        per_counter.push(opts);
    }
    let mut combos: Vec<(Vec<Instr>, Vec<Option<Tracked>>)> = vec![(Vec::new(), Vec::new())];
    for opts in &per_counter {
        combos = combos
            .into_iter()
            .flat_map(|(is, cs)| {
                opts.iter().map(move |(i, c)| {
                    let (mut is, mut cs) = (is.clone(), cs.clone());
                    is.push(*i);
                    cs.push(c.clone());
                    (is, cs)
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for &mt in nwa.master.out(cur.master, letter) {
        let m = nwa.master.transition(mt);
        for new in invocation_options(nwa, m.label, letter) {
            if new.is_some() && live + 1 > k {
                return Err(Error::WidthExceeded { position: 0, cap: k });
            }
            for (instrs, counters) in &combos {
                let mut instrs = instrs.clone();
                let mut counters = counters.clone();
                if let Some(t) = new {
                    let b = nwa.slave(m.label);
                    let tracked = Tracked { slave: m.label, state: b.automaton.transition(t).to, carry: b.effective_weight(t) };
                    match cur.counters.iter().position(Option::is_none) {
                        Some(free) => {
                            instrs[free] = Instr::Start;
                            counters[free] = Some(tracked);
                        }
                        None => {
                            instrs.push(Instr::Start);
                            counters.push(Some(tracked));
                        }
                    }
                }
                while counters.last().is_some_and(Option::is_none) {
                    counters.pop();
                }
                out.push((ProductState { master: m.to, counters }, instrs));
            }
        }
    }
    Ok(out)
}
