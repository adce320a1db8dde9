//! Alphabets, labeled and weighted automata, and nested weighted automata.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::value::ValueFn;

pub type State = usize;
pub type Letter = usize;

/// Ordered, duplicate-free list of letter names.
#[derive(Clone, Debug)]
pub struct Alphabet {
    letters: Vec<String>,
    index: HashMap<String, Letter>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(Error::Malformed("alphabet is empty".into()));
        }
        let mut index = HashMap::new();
        for (i, l) in letters.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Malformed(format!("letter `{l}` listed twice")));
            }
        }
        Ok(Alphabet { letters, index })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.letters[letter]
    }

    pub fn id(&self, name: &str) -> Option<Letter> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn ids(&self) -> std::ops::Range<Letter> {
        0..self.letters.len()
    }

    pub fn render_word(&self, word: &[Letter]) -> String {
        word.iter().map(|&l| self.name(l)).collect::<Vec<_>>().join(" ")
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Alphabet {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition<L> {
    pub from: State,
    pub letter: Letter,
    pub to: State,
    pub label: L,
}

/// Automaton over a dense state space whose transitions carry labels of type `L`.
#[derive(Clone, Debug)]
pub struct Automaton<L> {
    state_names: Vec<String>,
    initial: Vec<State>,
    accepting: Vec<bool>,
    transitions: Vec<Transition<L>>,
    out: Vec<Vec<Vec<usize>>>,
}

impl<L> Automaton<L> {
    pub fn new(
        n_letters: usize,
        state_names: Vec<String>,
        initial: Vec<State>,
        accepting: Vec<State>,
        transitions: Vec<Transition<L>>,
    ) -> Result<Self> {
        let n = state_names.len();
        let check = |s: State, what: &str| {
            if s < n {
                Ok(())
            } else {
                Err(Error::Malformed(format!("{what} state {s} out of range")))
            }
        };
        let mut seen = HashMap::new();
        for (i, name) in state_names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(Error::Malformed(format!("state `{name}` declared twice")));
            }
        }
        let mut init = Vec::new();
        for s in initial {
            check(s, "initial")?;
            if !init.contains(&s) {
                init.push(s);
            }
        }
        init.sort_unstable();
        let mut acc = vec![false; n];
        for s in accepting {
            check(s, "accepting")?;
            acc[s] = true;
        }
        let mut out = vec![vec![Vec::new(); n_letters]; n];
        for (i, t) in transitions.iter().enumerate() {
            check(t.from, "source")?;
            check(t.to, "target")?;
            if t.letter >= n_letters {
                return Err(Error::Malformed(format!("letter {} out of range", t.letter)));
            }
            out[t.from][t.letter].push(i);
        }
        Ok(Automaton { state_names, initial: init, accepting: acc, transitions, out })
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn n_letters(&self) -> usize {
        self.out.first().map_or(0, Vec::len)
    }

    pub fn state_name(&self, s: State) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_id(&self, name: &str) -> Option<State> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> &[State] {
        &self.initial
    }

    pub fn is_accepting(&self, s: State) -> bool {
        self.accepting[s]
    }

    pub fn accepting_states(&self) -> Vec<State> {
        (0..self.n_states()).filter(|&s| self.accepting[s]).collect()
    }

    pub fn transitions(&self) -> &[Transition<L>] {
        &self.transitions
    }

    pub fn transition(&self, i: usize) -> &Transition<L> {
        &self.transitions[i]
    }

    /// Indices of transitions leaving `s` on `letter`.
    pub fn out(&self, s: State, letter: Letter) -> &[usize] {
        &self.out[s][letter]
    }

    pub fn has_outgoing(&self, s: State) -> bool {
        self.out[s].iter().any(|v| !v.is_empty())
    }

    /// Singleton initial set and at most one transition per (state, letter).
    pub fn is_deterministic(&self) -> bool {
        self.nondeterminism_site().is_none()
    }

    /// First reason the automaton is not deterministic.
    pub fn nondeterminism_site(&self) -> Option<Nondeterminism> {
        if self.initial.len() != 1 {
            return Some(Nondeterminism::InitialStates(self.initial.len()));
        }
        for (s, row) in self.out.iter().enumerate() {
            for (letter, ts) in row.iter().enumerate() {
                if ts.len() > 1 {
                    return Some(Nondeterminism::Branching { state: s, letter });
                }
            }
        }
        None
    }

    /// States reachable from the initial states.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n_states()];
        let mut stack: Vec<State> = self.initial.clone();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(s) = stack.pop() {
            for t in self.out[s].iter().flatten() {
                let to = self.transitions[*t].to;
                if !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen
    }

    /// States from which an accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.n_states();
        let mut preds = vec![Vec::new(); n];
        for t in &self.transitions {
            preds[t.to].push(t.from);
        }
        let mut seen = self.accepting.clone();
        let mut stack: Vec<State> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }
}

impl<L: PartialEq> PartialEq for Automaton<L> {
    fn eq(&self, other: &Self) -> bool {
        self.state_names == other.state_names
            && self.initial == other.initial
            && self.accepting == other.accepting
            && self.transitions == other.transitions
    }
}

/// Why an automaton fails to be deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nondeterminism {
    InitialStates(usize),
    Branching { state: State, letter: Letter },
}

/// Integer-weighted automaton with a value function.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedAutomaton {
    pub automaton: Automaton<i64>,
    pub value_fn: ValueFn,
    effective: Vec<i64>,
}

impl WeightedAutomaton {
    pub fn new(automaton: Automaton<i64>, value_fn: ValueFn) -> Result<Self> {
        let effective = automaton
            .transitions()
            .iter()
            .map(|t| match value_fn {
                ValueFn::SumPlus => t.label.checked_abs().ok_or(Error::Overflow),
                _ => Ok(t.label),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedAutomaton { automaton, value_fn, effective })
    }

    /// Weight of transition `t` as seen by the value function (absolute value under `Sum⁺`).
    pub fn effective_weight(&self, t: usize) -> i64 {
        self.effective[t]
    }

    /// Single accepting initial state and no transitions.
    pub fn is_dummy(&self) -> bool {
        let a = &self.automaton;
        a.initial().len() == 1 && a.is_accepting(a.initial()[0]) && a.transitions().is_empty()
    }

    pub fn min_effective_weight(&self) -> Option<i64> {
        self.effective.iter().copied().min()
    }
}

/// Component of a nested weighted automaton, used in diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Master,
    Slave(usize),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Master => write!(f, "master"),
            Component::Slave(i) => write!(f, "slave {}", i + 1),
        }
    }
}

/// Nested weighted automaton: master automaton labeled with slave indexes (0-based) and finite-word slaves.
#[derive(Clone, Debug, PartialEq)]
pub struct Nwa {
    pub alphabet: Alphabet,
    pub master: Automaton<usize>,
    pub slaves: Vec<WeightedAutomaton>,
    pub master_value_fn: ValueFn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    NoInitialState,
    AlphabetMismatch,
    BadSlaveIndex,
    BadSlaveValueFn,
    BadMasterValueFn,
    NoSlaves,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub component: Component,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component, self.message)
    }
}

/// Result of the determinism test, with the first counterexample site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeterminismSite {
    Master(Nondeterminism),
    Slave(usize, Nondeterminism),
    NotPrefixFree { slave: usize, state: State },
}

impl Nwa {
    pub fn new(alphabet: Alphabet, master: Automaton<usize>, slaves: Vec<WeightedAutomaton>) -> Self {
        Nwa { alphabet, master, slaves, master_value_fn: ValueFn::LimAvg }
    }

    pub fn slave(&self, i: usize) -> &WeightedAutomaton {
        &self.slaves[i]
    }

    pub fn is_dummy(&self, i: usize) -> bool {
        self.slaves[i].is_dummy()
    }

    /// Whether invoking slave `i` can only be silent: every initial state accepts the empty word.
    pub fn invocation_is_silent(&self, i: usize) -> bool {
        let a = &self.slaves[i].automaton;
        a.initial().iter().all(|&s| a.is_accepting(s))
    }

    /// Checks the structural invariants; empty iff well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut push = |kind, component, message: String| out.push(Diagnostic { kind, component, message });
        if self.master_value_fn != ValueFn::LimAvg {
            push(DiagnosticKind::BadMasterValueFn, Component::Master, "master value function must be LimAvg".into());
        }
        if self.slaves.is_empty() {
            push(DiagnosticKind::NoSlaves, Component::Master, "no slave automata".into());
        }
        if self.master.initial().is_empty() {
            push(DiagnosticKind::NoInitialState, Component::Master, "no initial state".into());
        }
        if self.master.n_letters() != self.alphabet.len() {
            push(DiagnosticKind::AlphabetMismatch, Component::Master, "transition table does not match the alphabet".into());
        }
        for t in self.master.transitions() {
            if t.label >= self.slaves.len() {
                push(
                    DiagnosticKind::BadSlaveIndex,
                    Component::Master,
                    format!(
                        "transition {} {} {} invokes slave {} but only {} slaves exist",
                        self.master.state_name(t.from),
                        self.alphabet.name(t.letter),
                        self.master.state_name(t.to),
                        t.label + 1,
                        self.slaves.len()
                    ),
                );
            }
        }
        for (i, s) in self.slaves.iter().enumerate() {
            if !s.value_fn.is_finite_word() {
                push(DiagnosticKind::BadSlaveValueFn, Component::Slave(i), "slave value function must be sum or sum+".into());
            }
            if s.automaton.initial().is_empty() {
                push(DiagnosticKind::NoInitialState, Component::Slave(i), "no initial state".into());
            }
            if s.automaton.n_letters() != self.alphabet.len() {
                push(DiagnosticKind::AlphabetMismatch, Component::Slave(i), "transition table does not match the alphabet".into());
            }
        }
        out
    }

    /// Errors with the first diagnostic if the automaton is malformed.
    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            Some(d) => Err(Error::Malformed(d.to_string())),
            None => Ok(()),
        }
    }

    /// `None` iff master and slaves are deterministic and every slave language is prefix-free.
    pub fn determinism_site(&self) -> Option<DeterminismSite> {
        if let Some(site) = self.master.nondeterminism_site() {
            return Some(DeterminismSite::Master(site));
        }
        for (i, s) in self.slaves.iter().enumerate() {
            if let Some(site) = s.automaton.nondeterminism_site() {
                return Some(DeterminismSite::Slave(i, site));
            }
        }
        for (i, s) in self.slaves.iter().enumerate() {
            if let Some(state) = prefix_free_violation(&s.automaton) {
                return Some(DeterminismSite::NotPrefixFree { slave: i, state });
            }
        }
        None
    }

    pub fn is_deterministic(&self) -> bool {
        self.determinism_site().is_none()
    }

    pub fn ensure_deterministic(&self) -> Result<()> {
        match self.determinism_site() {
            None => Ok(()),
            Some(site) => Err(Error::Nondeterministic(format!("{site:?}"))),
        }
    }

    /// Minimal effective slave weight over all slave transitions.
    pub fn min_slave_weight(&self) -> Option<i64> {
        self.slaves.iter().filter_map(WeightedAutomaton::min_effective_weight).min()
    }

    /// Equivalent automaton whose accepting slave states have no outgoing transitions.
    pub fn normalize_slaves(&self) -> Nwa {
        let slaves = self.slaves.iter().map(normalize_slave).collect();
        Nwa { alphabet: self.alphabet.clone(), master: self.master.clone(), slaves, master_value_fn: self.master_value_fn }
    }

    /// The same automaton with every slave weight negated (effective weights, so `Sum⁺` slaves become `Sum`).
    pub fn mirrored(&self) -> Result<Nwa> {
        let slaves = self
            .slaves
            .iter()
            .map(|s| {
                let a = &s.automaton;
                let transitions = a
                    .transitions()
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let w = s.effective_weight(i).checked_neg().ok_or(Error::Overflow)?;
                        Ok(Transition { from: t.from, letter: t.letter, to: t.to, label: w })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let aut = Automaton::new(
                    self.alphabet.len(),
                    a.state_names().to_vec(),
                    a.initial().to_vec(),
                    a.accepting_states(),
                    transitions,
                )?;
                WeightedAutomaton::new(aut, ValueFn::Sum)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Nwa { alphabet: self.alphabet.clone(), master: self.master.clone(), slaves, master_value_fn: self.master_value_fn })
    }
}

/// An accepting state of the trimmed automaton with a transition back into the trimmed part.
fn prefix_free_violation<L>(a: &Automaton<L>) -> Option<State> {
    let reach = a.reachable();
    let coreach = a.coreachable();
    for s in 0..a.n_states() {
        if !(reach[s] && coreach[s] && a.is_accepting(s)) {
            continue;
        }
        for t in a.transitions().iter().filter(|t| t.from == s) {
            if coreach[t.to] {
                return Some(s);
            }
        }
    }
    None
}

fn normalize_slave(slave: &WeightedAutomaton) -> WeightedAutomaton {
    let a = &slave.automaton;
    let needs_split: Vec<bool> = (0..a.n_states()).map(|s| a.is_accepting(s) && a.has_outgoing(s)).collect();
    if !needs_split.iter().any(|&b| b) {
        return slave.clone();
    }
    let mut names = a.state_names().to_vec();
    let mut copy = vec![None; a.n_states()];
    for s in 0..a.n_states() {
        if needs_split[s] {
            let mut name = format!("{}_run", a.state_name(s));
            while names.contains(&name) {
                name.push('_');
            }
            copy[s] = Some(names.len());
            names.push(name);
        }
    }
    let mut initial = Vec::new();
    for &s in a.initial() {
        initial.push(s);
        if let Some(c) = copy[s] {
            initial.push(c);
        }
    }
    let mut transitions = Vec::new();
    for t in a.transitions() {
        let source = if needs_split[t.from] { copy[t.from].unwrap() } else { t.from };
        transitions.push(Transition { from: source, letter: t.letter, to: t.to, label: t.label });
        if let Some(c) = copy[t.to] {
            transitions.push(Transition { from: source, letter: t.letter, to: c, label: t.label });
        }
    }
    let aut = Automaton::new(a.n_letters(), names, initial, a.accepting_states(), transitions)
        .expect("normalization preserves well-formedness");
    WeightedAutomaton::new(aut, slave.value_fn).expect("weights were already valid")
}

/// Ultimately periodic word `prefix · period^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoWord {
    pub prefix: Vec<Letter>,
    pub period: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, period: Vec<Letter>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Precondition("lasso period must be nonempty".into()));
        }
        Ok(LassoWord { prefix, period })
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter_at(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// Witness order: shorter period, then period letters, then shorter prefix, then prefix letters.
    pub fn witness_key(&self) -> (usize, &[Letter], usize, &[Letter]) {
        (self.period.len(), &self.period, self.prefix.len(), &self.prefix)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let pre = alphabet.render_word(&self.prefix);
        let per = alphabet.render_word(&self.period);
        if pre.is_empty() {
            format!("| {per}")
        } else {
            format!("{pre} | {per}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slave(n: usize, init: State, acc: &[State], ts: &[(State, Letter, State, i64)]) -> WeightedAutomaton {
        let names = (0..n).map(|i| format!("s{i}")).collect();
        let ts = ts.iter().map(|&(from, letter, to, label)| Transition { from, letter, to, label }).collect();
        WeightedAutomaton::new(Automaton::new(2, names, vec![init], acc.to_vec(), ts).unwrap(), ValueFn::Sum).unwrap()
    }

    fn wrap(slaves: Vec<WeightedAutomaton>) -> Nwa {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let ts = vec![Transition { from: 0, letter: 0, to: 0, label: 0 }];
        let master = Automaton::new(2, vec!["q".into()], vec![0], vec![0], ts).unwrap();
        Nwa::new(alphabet, master, slaves)
    }

    #[test]
    fn alphabet_rejects_duplicates() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn bad_slave_index_is_diagnosed() {
        let alphabet = Alphabet::new(["a"]).unwrap();
        let ts = vec![Transition { from: 0, letter: 0, to: 0, label: 2 }];
        let master = Automaton::new(1, vec!["q".into()], vec![0], vec![0], ts).unwrap();
        let dummy = WeightedAutomaton::new(Automaton::new(1, vec!["d".into()], vec![0], vec![0], vec![]).unwrap(), ValueFn::Sum)
            .unwrap();
        let nwa = Nwa::new(alphabet, master, vec![dummy.clone(), dummy]);
        let diags = nwa.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::BadSlaveIndex);
    }

    #[test]
    fn limavg_slave_is_diagnosed() {
        let mut s = slave(1, 0, &[0], &[]);
        s.value_fn = ValueFn::LimAvg;
        let diags = wrap(vec![s]).validate();
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::BadSlaveValueFn));
    }

    #[test]
    fn accepting_state_leading_to_acceptance_is_not_prefix_free() {
        let s = slave(2, 0, &[1], &[(0, 0, 1, 1), (1, 1, 1, 0)]);
        let nwa = wrap(vec![s]);
        assert_eq!(nwa.determinism_site(), Some(DeterminismSite::NotPrefixFree { slave: 0, state: 1 }));
    }

    #[test]
    fn dead_transitions_from_accepting_states_are_allowed() {
        let s = slave(3, 0, &[1], &[(0, 0, 1, 1), (1, 1, 2, 0)]);
        assert!(wrap(vec![s]).is_deterministic());
    }

    #[test]
    fn normalization_splits_accepting_self_loop() {
        let s = slave(1, 0, &[0], &[(0, 0, 0, 2)]);
        let n = wrap(vec![s]).normalize_slaves();
        let a = &n.slaves[0].automaton;
        assert_eq!(a.n_states(), 2);
        assert_eq!(a.initial(), &[0, 1]);
        assert!(a.is_accepting(0) && !a.is_accepting(1));
        assert!(!a.has_outgoing(0));
    }

    #[test]
    fn normalization_is_identity_on_normalized_slaves() {
        let s = slave(2, 0, &[1], &[(0, 0, 0, 1), (0, 1, 1, 0)]);
        let nwa = wrap(vec![s]);
        assert_eq!(nwa.normalize_slaves(), nwa);
    }

    #[test]
    fn lasso_letters() {
        let w = LassoWord::new(vec![1], vec![0, 1]).unwrap();
        assert_eq!((0..5).map(|i| w.letter_at(i)).collect::<Vec<_>>(), vec![1, 0, 1, 0, 1]);
        assert!(LassoWord::new(vec![], vec![]).is_err());
    }
}
