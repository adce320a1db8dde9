//! Width reduction and the fragment graph used for exact infima.
//!
//! [`reduce_width1`] turns a deterministic automaton of width `k` into one of width 1 whose single
//! compound slave carries the summed weight of all slaves active in the input. [`fragment_automaton`]
//! turns a width-1 automaton into a [`RatioGraph`] whose edges are whole slave runs, each costed at
//! the least value the slave can return between the two master states.

use std::collections::{HashMap, VecDeque};

use crate::config::{ConfigEdge, ConfigGraph};
use crate::error::{add, Error, Result};
use crate::graph::{bfs_path, tree_path};
use crate::meanpayoff::{RatioGraph, RatioLasso};
use crate::model::{Automaton, LassoWord, Letter, Nwa, State, Transition, WeightedAutomaton};
use crate::par::Exec;
use crate::value::{ValueFn, ValueResult};
use crate::width::has_width;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Mode {
    /// Started on the step of the invocation it accounts for.
    Immediate,
    /// Started one step after the invocation, which ended the previous compound.
    Pending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct ReducedState {
    node: usize,
    /// Slots of the generation being waited for that are still active.
    old: usize,
    active: bool,
    pending: bool,
    /// 0 while waiting for an accepting master state, 1 while waiting for a generation to end.
    phase: u8,
    accepting: bool,
}

/// Width-1 automaton with the same lasso values as `nwa`, which must be deterministic and of width `k`.
///
/// Each input invocation starts one compound slave that follows the whole configuration and sums
/// the weights of every active slot. A compound ends when the input invokes again, the new compound
/// starting on the next letter, or when no slot remains active. Acceptance requires an accepting
/// master state and the release of every slot of some earlier configuration, alternately.
pub fn reduce_width1(nwa: &Nwa, k: usize) -> Result<Nwa> {
    reduce_width1_with(nwa, k, Exec::default())
}

pub fn reduce_width1_with(nwa: &Nwa, k: usize, exec: Exec) -> Result<Nwa> {
    nwa.ensure_valid()?;
    nwa.ensure_deterministic()?;
    if k == 0 {
        return Err(Error::Precondition("width must be positive".into()));
    }
    let g = ConfigGraph::explore(nwa, k, None, exec)?;
    if g.edges.iter().flatten().any(|e| e.edge.overflow) {
        return Err(Error::Precondition(format!("automaton does not have width {k}")));
    }
    let n_letters = nwa.alphabet.len();
    let done_after = |e: &ConfigEdge| e.to.slots.iter().all(|s| nwa.slave(s.slave).automaton.is_accepting(s.state));

    let dummy = WeightedAutomaton::new(Automaton::new(n_letters, vec!["d".into()], vec![0], vec![0], Vec::new())?, ValueFn::Sum)?;
    let mut slaves = vec![dummy];
    let mut compound: HashMap<(usize, Mode), usize> = HashMap::new();
    let mut compound_for = |node: usize, mode: Mode, slaves: &mut Vec<WeightedAutomaton>| -> Result<usize> {
        if let Some(&i) = compound.get(&(node, mode)) {
            return Ok(i);
        }
        slaves.push(compound_slave(&g, node, mode, n_letters, &done_after)?);
        compound.insert((node, mode), slaves.len() - 1);
        Ok(slaves.len() - 1)
    };

    let start = ReducedState { node: g.initials[0], old: 0, active: false, pending: false, phase: 0, accepting: false };
    let mut index: HashMap<ReducedState, usize> = HashMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut queue = VecDeque::from([0]);
    let mut transitions = Vec::new();
    while let Some(x) = queue.pop_front() {
        let s = states[x];
        for e in &g.edges[s.node] {
            let Some(to) = e.target else { continue };
            let edge = &e.edge;
            let invoked = edge.invoked.is_some();
            let ends = done_after(edge);
            let (label, active, pending) = if s.pending {
                (compound_for(s.node, Mode::Pending, &mut slaves)?, !(ends || invoked), invoked)
            } else if !s.active && invoked {
                (compound_for(s.node, Mode::Immediate, &mut slaves)?, !ends, false)
            } else if s.active {
                (0, !(ends || invoked), invoked)
            } else {
                (0, false, false)
            };
            let mut old = s.old - edge.released.iter().filter(|&&p| p < s.old).count();
            let generation_ended = old == 0;
            if generation_ended {
                old = g.nodes[to].slots.len();
            }
            let (phase, accepting) = match (s.phase, edge.master_accepting, generation_ended) {
                (0, true, true) | (1, _, true) => (0, true),
                (0, true, false) | (1, _, false) => (1, false),
                _ => (0, false),
            };
            let next = ReducedState { node: to, old, active, pending, phase, accepting };
            let id = *index.entry(next).or_insert_with(|| {
                states.push(next);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            transitions.push(Transition { from: x, letter: edge.letter, to: id, label });
        }
    }
    let names = states
        .iter()
        .map(|s| {
            let flags: String = [(s.active, 'a'), (s.pending, 'p'), (s.phase == 1, 'w'), (s.accepting, 'f')]
                .iter()
                .map(|&(b, c)| if b { c } else { 'x' })
                .collect();
            format!("c{}_o{}_{}", s.node, s.old, flags)
        })
        .collect();
    let accepting = (0..states.len()).filter(|&i| states[i].accepting).collect();
    let master = Automaton::new(n_letters, names, vec![0], accepting, transitions)?;
    Ok(Nwa::new(nwa.alphabet.clone(), master, slaves))
}

/// Compound slave starting at configuration `node`: states are `start`, one `run` per
/// configuration, and `done`.
fn compound_slave(
    g: &ConfigGraph,
    node: usize,
    mode: Mode,
    n_letters: usize,
    done_after: &impl Fn(&ConfigEdge) -> bool,
) -> Result<WeightedAutomaton> {
    // State 0 is `done`, state 1 the initial state.
    let mut index: HashMap<(bool, usize), usize> = HashMap::new();
    let mut keys = vec![(false, usize::MAX), (mode == Mode::Immediate, node)];
    index.insert(keys[1], 1);
    let mut queue = VecDeque::from([1]);
    let mut transitions = Vec::new();
    while let Some(x) = queue.pop_front() {
        let (first, at) = keys[x];
        for e in &g.edges[at] {
            let Some(to) = e.target else { continue };
            let weight = e.edge.slot_weights.iter().try_fold(0i64, |acc, &w| add(acc, w))?;
            let ends = done_after(&e.edge) || (!first && e.edge.invoked.is_some());
            let target = if ends {
                0
            } else {
                *index.entry((false, to)).or_insert_with(|| {
                    keys.push((false, to));
                    queue.push_back(keys.len() - 1);
                    keys.len() - 1
                })
            };
            transitions.push(Transition { from: x, letter: e.edge.letter, to: target, label: weight });
        }
    }
    let names = keys
        .iter()
        .enumerate()
        .map(|(i, &(first, at))| match (i, first) {
            (0, _) => "done".to_string(),
            (_, true) => format!("start_c{at}"),
            _ => format!("run_c{at}"),
        })
        .collect();
    let aut = Automaton::new(n_letters, names, vec![1], vec![0], transitions)?;
    WeightedAutomaton::new(aut, ValueFn::Sum)
}

/// A letter of the fragment alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FragmentLetter {
    /// One master step with no slave active.
    Silent { from: State, letter: Letter, to: State },
    /// A complete run of `slave`, invoked from `from` on `letter`, ending with the master in `to`.
    Valued { from: State, letter: Letter, to: State, slave: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FragmentWeight {
    Silent,
    Finite(i64),
    NegInfinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentEdge {
    pub letter: FragmentLetter,
    pub weight: FragmentWeight,
    /// Whether the realizing word is required to pass an accepting master state.
    pub through_accepting: bool,
    /// Input letters realizing the fragment at its weight.
    pub word: Vec<Letter>,
}

/// Ratio graph over master states, split by whether the last fragment passed an accepting state.
/// Node `2q + f` is master state `q` with flag `f`; edges correspond one to one with `edges`.
#[derive(Clone, Debug)]
pub struct FragmentAutomaton {
    pub graph: RatioGraph,
    pub edges: Vec<FragmentEdge>,
}

impl FragmentAutomaton {
    pub fn node(q: State, flag: bool) -> usize {
        2 * q + usize::from(flag)
    }

    pub fn word(&self, path: &[usize]) -> Vec<Letter> {
        path.iter().flat_map(|&e| self.edges[e].word.iter().copied()).collect()
    }

    /// Input lasso realizing a graph lasso.
    pub fn lasso(&self, l: &RatioLasso) -> LassoWord {
        LassoWord { prefix: self.word(&l.access), period: self.word(&l.cycle) }
    }
}

/// Cheapest runs of one slave invocation, indexed by `(end master state, passed accepting)`.
struct FragmentSearch {
    ends: HashMap<(State, bool), (FragmentWeight, Vec<Letter>)>,
}

/// Least value slave `slave` can return on a word `v` that starts with `letter`, on whose first
/// letter master state `q1` invokes it, and that moves the master to `q2` with only silent
/// invocations after the first letter. `None` if no such word exists.
pub fn min_slave_value(nwa: &Nwa, q1: State, letter: Letter, q2: State, slave: usize) -> Result<Option<ValueResult>> {
    nwa.ensure_valid()?;
    nwa.ensure_deterministic()?;
    let Some(search) = search_fragments(nwa, q1, letter)? else { return Ok(None) };
    let invoked = nwa.master.transition(nwa.master.out(q1, letter)[0]).label;
    if invoked != slave {
        return Ok(None);
    }
    let best = [false, true].iter().filter_map(|&f| search.ends.get(&(q2, f))).map(|(w, _)| *w).min_by_key(|w| match w {
        FragmentWeight::NegInfinity => (0, 0),
        FragmentWeight::Finite(v) => (1, *v),
        FragmentWeight::Silent => (2, 0),
    });
    Ok(best.map(|w| match w {
        FragmentWeight::Finite(v) => ValueResult::integer(v),
        _ => ValueResult::NegInfinity,
    }))
}

/// Bellman-Ford over master × slave × accepting-seen from the joint successor of `(q1, initial)`.
fn search_fragments(nwa: &Nwa, q1: State, letter: Letter) -> Result<Option<FragmentSearch>> {
    let master = &nwa.master;
    let Some(&mt) = master.out(q1, letter).first() else { return Ok(None) };
    let first = master.transition(mt);
    if nwa.invocation_is_silent(first.label) {
        return Ok(None);
    }
    let b = nwa.slave(first.label);
    let sa = &b.automaton;
    let Some(&st) = sa.out(sa.initial()[0], letter).first() else { return Ok(None) };
    let ns = sa.n_states();
    let id = |q: State, s: State, f: bool| (q * ns + s) * 2 + usize::from(f);
    let n = master.n_states() * ns * 2;
    let mut edges: Vec<(usize, usize, i128)> = Vec::new();
    let mut letters = Vec::new();
    for mtr in master.transitions() {
        if !nwa.invocation_is_silent(mtr.label) {
            continue;
        }
        let acc = master.is_accepting(mtr.to);
        for s in 0..ns {
            if sa.is_accepting(s) {
                continue;
            }
            let Some(&t) = sa.out(s, mtr.letter).first() else { continue };
            let to = sa.transition(t).to;
            for f in [false, true] {
                edges.push((id(mtr.from, s, f), id(mtr.to, to, f || acc), i128::from(b.effective_weight(t))));
                letters.push(mtr.letter);
            }
        }
    }
    let source = id(first.to, sa.transition(st).to, master.is_accepting(first.to));
    let w0 = i128::from(b.effective_weight(st));

    let mut dist: Vec<Option<i128>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    dist[source] = Some(w0);
    let mut unstable = Vec::new();
    for round in 0..=n {
        let mut changed = Vec::new();
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            let Some(du) = dist[u] else { continue };
            let cand = du.checked_add(w).ok_or(Error::Overflow)?;
            if dist[v].is_none_or(|dv| cand < dv) {
                dist[v] = Some(cand);
                pred[v] = Some(i);
                changed.push(v);
            }
        }
        if changed.is_empty() {
            break;
        }
        if round == n {
            unstable = changed;
        }
    }
    // Everything reachable from a node still improving after n rounds has no least value.
    let mut unbounded = vec![false; n];
    let mut stack = unstable;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v, _) in &edges {
        out[u].push(v);
    }
    while let Some(u) = stack.pop() {
        if !std::mem::replace(&mut unbounded[u], true) {
            stack.extend(out[u].iter().copied().filter(|&v| !unbounded[v]));
        }
    }

    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut ends = HashMap::new();
    for q2 in 0..master.n_states() {
        for s in (0..ns).filter(|&s| sa.is_accepting(s)) {
            for f in [false, true] {
                let target = id(q2, s, f);
                let Some(d) = dist[target] else { continue };
                let (weight, path) = if unbounded[target] {
                    (FragmentWeight::NegInfinity, bfs_path(n, &pairs, &[source], target).unwrap_or_default())
                } else {
                    let v = i64::try_from(d).map_err(|_| Error::Overflow)?;
                    (FragmentWeight::Finite(v), tree_path(&edges, &pred, target))
                };
                let mut word = vec![letter];
                word.extend(path.into_iter().map(|i| letters[i]));
                let better = match (ends.get(&(q2, f)), weight) {
                    (None, _) => true,
                    (Some((FragmentWeight::Finite(a), _)), FragmentWeight::Finite(b)) => b < *a,
                    (Some((FragmentWeight::Finite(_), _)), FragmentWeight::NegInfinity) => true,
                    _ => false,
                };
                if better {
                    ends.insert((q2, f), (weight, word));
                }
            }
        }
    }
    Ok(Some(FragmentSearch { ends }))
}

/// Ratio graph whose infimum over accepting lassos equals the infimum of the width-1 input.
///
/// Fails with [`Error::NegInfinityFragment`] when a fragment without least value lies on a cycle
/// through an accepting node, in which case the input's infimum is minus infinity.
pub fn fragment_automaton(nwa: &Nwa) -> Result<FragmentAutomaton> {
    fragment_automaton_with(nwa, Exec::default())
}

pub fn fragment_automaton_with(nwa: &Nwa, exec: Exec) -> Result<FragmentAutomaton> {
    nwa.ensure_valid()?;
    nwa.ensure_deterministic()?;
    if !has_width(nwa, 1)?.holds {
        return Err(Error::Precondition("automaton does not have width 1".into()));
    }
    let master = &nwa.master;
    let starts: Vec<(State, Letter)> = master
        .transitions()
        .iter()
        .filter(|t| !nwa.invocation_is_silent(t.label))
        .map(|t| (t.from, t.letter))
        .collect();
    let searches = exec.map(&starts, |&(q, a)| search_fragments(nwa, q, a));

    let mut graph = RatioGraph::new(2 * master.n_states());
    let mut edges = Vec::new();
    let mut push = |graph: &mut RatioGraph, from: State, to: usize, cost: i64, ticks: u8, e: FragmentEdge| {
        for f in [false, true] {
            graph.add_edge(FragmentAutomaton::node(from, f), to, cost, ticks);
            edges.push(e.clone());
        }
    };
    for t in master.transitions() {
        if nwa.invocation_is_silent(t.label) {
            let letter = FragmentLetter::Silent { from: t.from, letter: t.letter, to: t.to };
            let e = FragmentEdge { letter, weight: FragmentWeight::Silent, through_accepting: false, word: vec![t.letter] };
            push(&mut graph, t.from, FragmentAutomaton::node(t.to, master.is_accepting(t.to)), 0, 0, e);
        }
    }
    for (&(q1, a), search) in starts.iter().zip(searches) {
        let Some(search) = search? else { continue };
        let slave = master.transition(master.out(q1, a)[0]).label;
        let mut ends: Vec<_> = search.ends.into_iter().collect();
        ends.sort_by_key(|((q2, f), _)| (*q2, *f));
        for ((q2, f), (weight, word)) in ends {
            let cost = match weight {
                FragmentWeight::Finite(v) => v,
                _ => 0,
            };
            let letter = FragmentLetter::Valued { from: q1, letter: a, to: q2, slave };
            let e = FragmentEdge { letter, weight, through_accepting: f, word };
            push(&mut graph, q1, FragmentAutomaton::node(q2, f || master.is_accepting(q2)), cost, 1, e);
        }
    }
    for &q in master.initial() {
        graph.initial.push(FragmentAutomaton::node(q, master.is_accepting(q)));
    }
    for q in 0..master.n_states() {
        graph.accepting[FragmentAutomaton::node(q, true)] = true;
    }
    for comp in graph.qualifying_components() {
        for &i in &comp.edges {
            if let (FragmentWeight::NegInfinity, FragmentLetter::Valued { from, letter, to, slave }) = (edges[i].weight, edges[i].letter) {
                return Err(Error::NegInfinityFragment {
                    from: master.state_name(from).to_string(),
                    letter: nwa.alphabet.name(letter).to_string(),
                    to: master.state_name(to).to_string(),
                    slave: slave + 1,
                });
            }
        }
    }
    Ok(FragmentAutomaton { graph, edges })
}
