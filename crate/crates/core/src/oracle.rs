//! Exact evaluation of deterministic automata on lasso words, and bounded lasso enumeration.
//!
//! The evaluator is generic over [`Machine`], a deterministic step function that reports slave
//! invocations and returned values. Nested automata, monitor-counter automata and the letter-level
//! simulation used for nondeterministic inputs all plug into it.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::config::{Configuration, Slot};
use crate::determinize::LabelMachine;
use crate::error::{add, Error, Result};
use crate::model::{LassoWord, Letter, Nwa, State};
use crate::par::Exec;
use crate::value::{mean, ValueResult};

/// What happened during one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Events {
    /// A value-producing run was started at this position.
    pub invoked: bool,
    /// `(invocation position, value)` for every run that returned before this letter.
    pub returned: Vec<(usize, i64)>,
}

/// A deterministic run generator whose values are assigned to invocation positions.
pub trait Machine {
    type State: Clone;
    type Key: Hash + Eq;

    fn start(&self) -> Self::State;

    /// The part of the state that determines the future, without positions or accumulators.
    fn key(&self, s: &Self::State) -> Self::Key;

    /// Consumes `letter` at position `pos`. `Ok(None)` means the run dies.
    fn step(&self, s: &Self::State, letter: Letter, pos: usize, events: &mut Events) -> Result<Option<Self::State>>;

    fn accepting(&self, s: &Self::State) -> bool;

    /// Invocation position of the oldest run still active in `s`.
    fn oldest_pending(&self, s: &Self::State) -> Option<usize>;

    /// Number of key-cycles after which a run that is still active can never return.
    fn horizon(&self) -> usize;
}

/// Evaluates `prefix · period^ω`.
pub fn evaluate_machine<M: Machine>(m: &M, w: &LassoWord) -> Result<ValueResult> {
    let mut events = Events::default();
    let mut state = m.start();
    for (pos, &a) in w.prefix.iter().enumerate() {
        events.returned.clear();
        match m.step(&state, a, pos, &mut events)? {
            Some(s) => state = s,
            None => return Ok(ValueResult::PlusInfinity),
        }
    }
    evaluate_from(m, state, w.prefix.len(), &w.period)
}

/// Evaluates `period^ω` read from `state`, which is reached at position `pos`.
pub(crate) fn evaluate_from<M: Machine>(m: &M, mut state: M::State, mut pos: usize, period: &[Letter]) -> Result<ValueResult> {
    let mut events = Events::default();
    let mut seen: HashMap<M::Key, usize> = HashMap::new();
    let mut boundaries = Vec::new();
    let mut accepting = Vec::new();
    let mut invocations = Vec::new();
    let mut returns: HashMap<usize, i64> = HashMap::new();
    let first = loop {
        let key = m.key(&state);
        if let Some(&i) = seen.get(&key) {
            break i;
        }
        seen.insert(key, boundaries.len());
        boundaries.push(pos);
        let mut acc = false;
        for &a in period {
            events.invoked = false;
            events.returned.clear();
            match m.step(&state, a, pos, &mut events)? {
                Some(s) => state = s,
                None => return Ok(ValueResult::PlusInfinity),
            }
            if events.invoked {
                invocations.push(pos);
            }
            returns.extend(events.returned.iter().copied());
            acc |= m.accepting(&state);
            pos += 1;
        }
        accepting.push(acc);
    };
    let cycle = boundaries.len() - first;
    let (start, end) = (boundaries[first], pos);
    let window: Vec<usize> = invocations.iter().copied().filter(|&p| p >= start).collect();
    if window.is_empty() || !accepting[first..].iter().any(|&a| a) {
        return Ok(ValueResult::PlusInfinity);
    }
    for _ in 0..(m.horizon() + 1) * cycle {
        for &a in period {
            events.returned.clear();
            match m.step(&state, a, pos, &mut events)? {
                Some(s) => state = s,
                None => return Ok(ValueResult::PlusInfinity),
            }
            returns.extend(events.returned.iter().copied());
            pos += 1;
        }
    }
    if m.oldest_pending(&state).is_some_and(|p| p < end) {
        return Ok(ValueResult::PlusInfinity);
    }
    let mut values = Vec::with_capacity(window.len());
    for p in window {
        match returns.get(&p) {
            Some(&v) => values.push(v),
            None => return Ok(ValueResult::PlusInfinity),
        }
    }
    Ok(mean(&values))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct ActiveSlot {
    slave: usize,
    state: State,
    origin: usize,
    acc: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct NwaState {
    master: State,
    slots: Vec<ActiveSlot>,
}

/// The unique run of a deterministic nested automaton, with at most `cap` active slaves.
pub(crate) struct NwaMachine<'a> {
    nwa: &'a Nwa,
    cap: usize,
}

impl<'a> NwaMachine<'a> {
    pub(crate) fn new(nwa: &'a Nwa, cap: usize) -> Result<Self> {
        nwa.ensure_valid()?;
        nwa.ensure_deterministic()?;
        if cap == 0 {
            return Err(Error::Precondition("width cap must be positive".into()));
        }
        Ok(NwaMachine { nwa, cap })
    }
}

impl Machine for NwaMachine<'_> {
    type State = NwaState;
    type Key = Configuration;

    fn start(&self) -> NwaState {
        NwaState { master: self.nwa.master.initial()[0], slots: Vec::new() }
    }

    fn key(&self, s: &NwaState) -> Configuration {
        Configuration {
            master: s.master,
            slots: s.slots.iter().map(|a| Slot { slave: a.slave, state: a.state }).collect(),
        }
    }

    fn step(&self, s: &NwaState, letter: Letter, pos: usize, events: &mut Events) -> Result<Option<NwaState>> {
        let nwa = self.nwa;
        let Some(&mt) = nwa.master.out(s.master, letter).first() else {
            return Ok(None);
        };
        let m = nwa.master.transition(mt);
        let mut slots = Vec::with_capacity(s.slots.len() + 1);
        for slot in &s.slots {
            let b = nwa.slave(slot.slave);
            if b.automaton.is_accepting(slot.state) {
                events.returned.push((slot.origin, slot.acc));
                continue;
            }
            let Some(&t) = b.automaton.out(slot.state, letter).first() else {
                return Ok(None);
            };
            slots.push(ActiveSlot {
                slave: slot.slave,
                state: b.automaton.transition(t).to,
                origin: slot.origin,
                acc: add(slot.acc, b.effective_weight(t))?,
            });
        }
        let b = nwa.slave(m.label);
        let init = b.automaton.initial()[0];
        if !b.automaton.is_accepting(init) {
            let Some(&t) = b.automaton.out(init, letter).first() else {
                return Ok(None);
            };
            events.invoked = true;
            slots.push(ActiveSlot { slave: m.label, state: b.automaton.transition(t).to, origin: pos, acc: b.effective_weight(t) });
        }
        if slots.len() > self.cap {
            return Err(Error::WidthExceeded { position: pos, cap: self.cap });
        }
        Ok(Some(NwaState { master: m.to, slots }))
    }

    fn accepting(&self, s: &NwaState) -> bool {
        self.nwa.master.is_accepting(s.master)
    }

    fn oldest_pending(&self, s: &NwaState) -> Option<usize> {
        s.slots.first().map(|a| a.origin)
    }

    fn horizon(&self) -> usize {
        self.cap
    }
}

/// Value of the unique run of a deterministic automaton on `w`.
pub fn evaluate_lasso(nwa: &Nwa, w: &LassoWord, width_cap: usize) -> Result<ValueResult> {
    check_letters(nwa, w)?;
    evaluate_machine(&NwaMachine::new(nwa, width_cap)?, w)
}

fn check_letters(nwa: &Nwa, w: &LassoWord) -> Result<()> {
    if w.period.is_empty() {
        return Err(Error::Precondition("lasso period must be nonempty".into()));
    }
    if w.prefix.iter().chain(&w.period).any(|&a| a >= nwa.alphabet.len()) {
        return Err(Error::Precondition("lasso letter outside the alphabet".into()));
    }
    Ok(())
}

/// One position of a finite run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub before: Configuration,
    pub invoked: Option<usize>,
    pub returned: Vec<(usize, i64)>,
}

/// Finite run of a deterministic nested automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    /// Position of the letter on which the run died, if it did.
    pub died_at: Option<usize>,
}

impl RunTrace {
    /// Returned values ordered by invocation position.
    pub fn values(&self) -> Vec<(usize, i64)> {
        let mut v: Vec<(usize, i64)> = self.steps.iter().flat_map(|s| s.returned.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

/// Runs a deterministic automaton on a finite word; fails with `WidthExceeded` at the first
/// position needing more than `width_cap` active slaves.
pub fn run_prefix(nwa: &Nwa, word: &[Letter], width_cap: usize) -> Result<RunTrace> {
    let m = NwaMachine::new(nwa, width_cap)?;
    let mut state = m.start();
    let mut steps = Vec::new();
    let mut events = Events::default();
    for (pos, &a) in word.iter().enumerate() {
        events.invoked = false;
        events.returned.clear();
        let before = m.key(&state);
        let next = m.step(&state, a, pos, &mut events)?;
        let invoked = next.as_ref().filter(|_| events.invoked).map(|_| nwa.master.transition(nwa.master.out(state.master, a)[0]).label);
        steps.push(TraceStep { before, invoked, returned: events.returned.clone() });
        match next {
            Some(s) => state = s,
            None => return Ok(RunTrace { steps, died_at: Some(pos) }),
        }
    }
    Ok(RunTrace { steps, died_at: None })
}

/// Folds over every lasso with `|prefix| ≤ max_prefix` and `1 ≤ |period| ≤ max_period` whose
/// first period pass is alive and within the width cap. Lassos that die earlier are `+∞` and skipped.
///
/// Work is split into (prefix, first period letter) units; unit results are merged in order.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fold_lassos<M, A, F, G>(
    m: &M,
    n_letters: usize,
    max_prefix: usize,
    max_period: usize,
    exec: Exec,
    init: A,
    visit: F,
    merge: G,
) -> A
where
    M: Machine + Sync,
    M::State: Send + Sync,
    A: Clone + Send + Sync,
    F: Fn(&mut A, &LassoWord, Result<ValueResult>) + Sync + Send,
    G: Fn(A, A) -> A,
{
    let mut prefixes: Vec<(Vec<Letter>, M::State)> = Vec::new();
    let mut stack = vec![(Vec::new(), m.start())];
    while let Some((p, s)) = stack.pop() {
        if p.len() < max_prefix {
            for a in (0..n_letters).rev() {
                let mut ev = Events::default();
                if let Ok(Some(next)) = m.step(&s, a, p.len(), &mut ev) {
                    let mut q = p.clone();
                    q.push(a);
                    stack.push((q, next));
                }
            }
        }
        prefixes.push((p, s));
    }
    let units: Vec<(usize, Letter)> =
        (0..prefixes.len()).flat_map(|i| (0..n_letters).map(move |a| (i, a))).collect();
    if max_period == 0 {
        return init;
    }
    let results = exec.map(&units, |&(i, a)| {
        let (prefix, state) = &prefixes[i];
        let mut acc = init.clone();
        let mut period = vec![a];
        let mut ev = Events::default();
        if let Ok(Some(next)) = m.step(state, a, prefix.len(), &mut ev) {
            walk(m, n_letters, max_period, prefix, state, &mut period, next, &mut acc, &visit);
        }
        acc
    });
    results.into_iter().fold(init, merge)
}

#[allow(clippy::too_many_arguments)]
fn walk<M, A, F>(
    m: &M,
    n_letters: usize,
    max_period: usize,
    prefix: &[Letter],
    origin: &M::State,
    period: &mut Vec<Letter>,
    partial: M::State,
    acc: &mut A,
    visit: &F,
) where
    M: Machine,
    F: Fn(&mut A, &LassoWord, Result<ValueResult>),
{
    let value = evaluate_from(m, origin.clone(), prefix.len(), period);
    let w = LassoWord { prefix: prefix.to_vec(), period: period.clone() };
    visit(acc, &w, value);
    if period.len() == max_period {
        return;
    }
    for a in 0..n_letters {
        let mut ev = Events::default();
        if let Ok(Some(next)) = m.step(&partial, a, prefix.len() + period.len(), &mut ev) {
            period.push(a);
            walk(m, n_letters, max_period, prefix, origin, period, next, acc, visit);
            period.pop();
        }
    }
}

type Best = Result<Option<(ValueResult, LassoWord)>>;

fn better(a: &(ValueResult, LassoWord), b: &(ValueResult, LassoWord)) -> bool {
    (&a.0, a.1.witness_key()) < (&b.0, b.1.witness_key())
}

fn merge_best(a: Best, b: Best) -> Best {
    match (a, b) {
        (Err(e), _) | (Ok(_), Err(e)) => Err(e),
        (Ok(None), Ok(x)) | (Ok(x), Ok(None)) => Ok(x),
        (Ok(Some(x)), Ok(Some(y))) => Ok(Some(if better(&y, &x) { y } else { x })),
    }
}

fn visit_best(acc: &mut Best, w: &LassoWord, value: Result<ValueResult>) {
    let Ok(current) = acc else { return };
    match value {
        Err(Error::WidthExceeded { .. }) | Ok(ValueResult::PlusInfinity) => {}
        Err(e) => *acc = Err(e),
        Ok(v) => {
            let cand = (v, w.clone());
            if current.as_ref().is_none_or(|c| better(&cand, c)) {
                *current = Some(cand);
            }
        }
    }
}

/// Minimum lasso value within the bounds and a witness.
///
/// Ties go to the shorter period, then the lexicographically smaller period, then the shorter and
/// smaller prefix. Lassos exceeding `width_cap` are skipped. Nondeterministic inputs are
/// enumerated over their explicit choice labels (see [`crate::determinize`]), so the result is an
/// upper bound on the infimum; the witness then lists the underlying letters.
pub fn enumerate_lasso_infimum(
    nwa: &Nwa,
    max_prefix: usize,
    max_period: usize,
    width_cap: usize,
) -> Result<(ValueResult, Option<LassoWord>)> {
    enumerate_lasso_infimum_with(nwa, max_prefix, max_period, width_cap, Exec::default())
}

pub fn enumerate_lasso_infimum_with(
    nwa: &Nwa,
    max_prefix: usize,
    max_period: usize,
    width_cap: usize,
    exec: Exec,
) -> Result<(ValueResult, Option<LassoWord>)> {
    nwa.ensure_valid()?;
    let best = if nwa.is_deterministic() {
        let m = NwaMachine::new(nwa, width_cap)?;
        fold_lassos(&m, nwa.alphabet.len(), max_prefix, max_period, exec, Ok(None), visit_best, merge_best)?
    } else {
        let m = LabelMachine::new(nwa, width_cap)?;
        let best = fold_lassos(&m, m.n_labels(), max_prefix, max_period, exec, Ok(None), visit_best, merge_best)?;
        best.map(|(v, w)| (v, m.project(&w)))
    };
    Ok(match best {
        Some((v, w)) => (v, Some(w)),
        None => (ValueResult::PlusInfinity, None),
    })
}

/// Every finite value attained by a lasso within the bounds, with its least witness.
pub fn lasso_values(
    nwa: &Nwa,
    max_prefix: usize,
    max_period: usize,
    width_cap: usize,
) -> Result<BTreeMap<ValueResult, LassoWord>> {
    type Acc = Result<BTreeMap<ValueResult, LassoWord>>;
    let m = NwaMachine::new(nwa, width_cap)?;
    let visit = |acc: &mut Acc, w: &LassoWord, v: Result<ValueResult>| {
        let Ok(map) = acc else { return };
        match v {
            Ok(v @ ValueResult::Finite(_)) => {
                let slot = map.entry(v).or_insert_with(|| w.clone());
                if w.witness_key() < slot.witness_key() {
                    *slot = w.clone();
                }
            }
            Ok(_) | Err(Error::WidthExceeded { .. }) => {}
            Err(e) => *acc = Err(e),
        }
    };
    let merge = |a: Acc, b: Acc| -> Acc {
        let (mut a, b) = (a?, b?);
        for (v, w) in b {
            let slot = a.entry(v).or_insert_with(|| w.clone());
            if w.witness_key() < slot.witness_key() {
                *slot = w;
            }
        }
        Ok(a)
    };
    fold_lassos(&m, nwa.alphabet.len(), max_prefix, max_period, Exec::default(), Ok(BTreeMap::new()), visit, merge)
}

/// First lasso, in enumeration order, on which two automata over the same alphabet disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// Lassos on which at least one automaton survives the first period pass.
    pub checked: usize,
    pub mismatch: Option<(LassoWord, Result<ValueResult>, Result<ValueResult>)>,
}

/// Compares the values of two deterministic automata on every lasso within the bounds.
///
/// Enumeration continues as long as either run is alive, so a lasso accepted by only one side is
/// reported. A width overflow counts as a value of its own and must occur on both sides.
pub fn compare_lassos(
    a: (&Nwa, usize),
    b: (&Nwa, usize),
    max_prefix: usize,
    max_period: usize,
    exec: Exec,
) -> Result<Comparison> {
    if a.0.alphabet.names() != b.0.alphabet.names() {
        return Err(Error::Precondition("automata have different alphabets".into()));
    }
    let ma = NwaMachine::new(a.0, a.1)?;
    let mb = NwaMachine::new(b.0, b.1)?;
    Ok(compare_machines(&ma, &mb, a.0.alphabet.len(), max_prefix, max_period, exec))
}

type Side<S> = Option<S>;

fn advance<M: Machine>(m: &M, s: &Side<M::State>, a: Letter, pos: usize) -> Side<M::State> {
    let mut ev = Events::default();
    s.as_ref().and_then(|s| m.step(s, a, pos, &mut ev).ok().flatten())
}

pub(crate) fn compare_machines<MA, MB>(
    ma: &MA,
    mb: &MB,
    n_letters: usize,
    max_prefix: usize,
    max_period: usize,
    exec: Exec,
) -> Comparison
where
    MA: Machine + Sync,
    MB: Machine + Sync,
    MA::State: Send + Sync,
    MB::State: Send + Sync,
{
    type Prefix<A, B> = (Vec<Letter>, (Side<A>, Side<B>));
    let mut prefixes: Vec<Prefix<MA::State, MB::State>> = Vec::new();
    let mut stack = vec![(Vec::new(), (Some(ma.start()), Some(mb.start())))];
    while let Some((p, (sa, sb))) = stack.pop() {
        if p.len() < max_prefix {
            for a in (0..n_letters).rev() {
                let next = (advance(ma, &sa, a, p.len()), advance(mb, &sb, a, p.len()));
                if next.0.is_some() || next.1.is_some() {
                    let mut q = p.clone();
                    q.push(a);
                    stack.push((q, next));
                }
            }
        }
        prefixes.push((p, (sa, sb)));
    }
    let units: Vec<(usize, Letter)> = (0..prefixes.len()).flat_map(|i| (0..n_letters).map(move |a| (i, a))).collect();
    let results = exec.map(&units, |&(i, a)| {
        let (prefix, origin) = &prefixes[i];
        let mut out = Comparison { checked: 0, mismatch: None };
        let next = (advance(ma, &origin.0, a, prefix.len()), advance(mb, &origin.1, a, prefix.len()));
        if next.0.is_some() || next.1.is_some() {
            let mut period = vec![a];
            let ctx = PairWalk { ma, mb, n_letters, max_period, prefix, origin };
            ctx.walk(&mut period, next, &mut out);
        }
        out
    });
    let mut total = Comparison { checked: 0, mismatch: None };
    for r in results {
        total.checked += r.checked;
        if total.mismatch.is_none() {
            total.mismatch = r.mismatch;
        }
    }
    total
}

struct PairWalk<'a, MA: Machine, MB: Machine> {
    ma: &'a MA,
    mb: &'a MB,
    n_letters: usize,
    max_period: usize,
    prefix: &'a [Letter],
    origin: &'a (Side<MA::State>, Side<MB::State>),
}

impl<MA: Machine, MB: Machine> PairWalk<'_, MA, MB> {
    fn value<M: Machine>(m: &M, origin: &Side<M::State>, pos: usize, period: &[Letter]) -> Result<ValueResult> {
        match origin {
            Some(s) => evaluate_from(m, s.clone(), pos, period),
            None => Ok(ValueResult::PlusInfinity),
        }
    }

    fn walk(&self, period: &mut Vec<Letter>, partial: (Side<MA::State>, Side<MB::State>), out: &mut Comparison) {
        if out.mismatch.is_some() {
            return;
        }
        let pos = self.prefix.len();
        let va = Self::value(self.ma, &self.origin.0, pos, period);
        let vb = Self::value(self.mb, &self.origin.1, pos, period);
        out.checked += 1;
        if va != vb {
            let w = LassoWord { prefix: self.prefix.to_vec(), period: period.clone() };
            out.mismatch = Some((w, va, vb));
            return;
        }
        if period.len() == self.max_period {
            return;
        }
        for a in 0..self.n_letters {
            let p = pos + period.len();
            let next = (advance(self.ma, &partial.0, a, p), advance(self.mb, &partial.1, a, p));
            if next.0.is_some() || next.1.is_some() {
                period.push(a);
                self.walk(period, next, out);
                period.pop();
            }
        }
    }
}
