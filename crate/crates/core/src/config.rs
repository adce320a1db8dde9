//! Configurations of a nested weighted automaton and the one-step explorer over them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Letter, Nwa, State};
use crate::par::Exec;

/// An active slave run: which slave, and its current state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub slave: usize,
    pub state: State,
}

/// Master state plus the active slave runs, least recently invoked first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub master: State,
    pub slots: Vec<Slot>,
}

impl Configuration {
    pub fn render(&self, nwa: &Nwa) -> String {
        let mut out = format!("({}", nwa.master.state_name(self.master));
        for s in &self.slots {
            out.push_str(&format!("; {}:{}", s.slave + 1, nwa.slave(s.slave).automaton.state_name(s.state)));
        }
        out.push(')');
        out
    }
}

/// Which transitions realize a [`ConfigEdge`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeChoice {
    pub master: usize,
    /// Transition taken by each surviving slot, in slot order.
    pub slots: Vec<usize>,
    /// Transition taken from an initial state by the newly invoked slave.
    pub new: Option<usize>,
}

/// One joint step of master and active slaves on a letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEdge {
    pub letter: Letter,
    pub to: Configuration,
    /// Slave invoked non-silently on this step.
    pub invoked: Option<usize>,
    /// Positions (in the source configuration) of slots released before the letter.
    pub released: Vec<usize>,
    /// Effective weights of the surviving slots, then of the new slot.
    pub slot_weights: Vec<i64>,
    /// The step would need more than `k` slots; `to` then holds `k + 1` slots.
    pub overflow: bool,
    pub master_accepting: bool,
    /// No slot of the source configuration survives the step.
    pub all_terminated: bool,
    pub choice: EdgeChoice,
}

/// One configuration per master initial state, all slots empty.
pub fn config_initials(nwa: &Nwa) -> Vec<Configuration> {
    nwa.master.initial().iter().map(|&q| Configuration { master: q, slots: Vec::new() }).collect()
}

/// Every joint choice of master and slave transitions from `c` on `letter`.
///
/// Slots in accepting states are released first. Edges are ordered by master transition, then
/// slot transitions lexicographically, then the new slot's option.
pub fn config_successors(nwa: &Nwa, c: &Configuration, letter: Letter, k: usize) -> Vec<ConfigEdge> {
    let mut released = Vec::new();
    let mut survivors = Vec::new();
    for (i, slot) in c.slots.iter().enumerate() {
        if nwa.slave(slot.slave).automaton.is_accepting(slot.state) {
            released.push(i);
        } else {
            survivors.push(*slot);
        }
    }
    let options: Vec<&[usize]> =
        survivors.iter().map(|s| nwa.slave(s.slave).automaton.out(s.state, letter)).collect();
    if options.iter().any(|o| o.is_empty()) {
        return Vec::new();
    }
    let mut slot_choices: Vec<Vec<usize>> = vec![Vec::new()];
    for opts in &options {
        slot_choices = slot_choices
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&t| {
                    let mut p = prefix.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    let mut edges = Vec::new();
    for &mt in nwa.master.out(c.master, letter) {
        let m = nwa.master.transition(mt);
        let slave = m.label;
        let new_options = invocation_options(nwa, slave, letter);
        for choice in &slot_choices {
            for &new in &new_options {
                let mut slots = Vec::with_capacity(survivors.len() + 1);
                let mut weights = Vec::with_capacity(survivors.len() + 1);
                for (s, &t) in survivors.iter().zip(choice) {
                    let b = nwa.slave(s.slave);
                    slots.push(Slot { slave: s.slave, state: b.automaton.transition(t).to });
                    weights.push(b.effective_weight(t));
                }
                if let Some(t) = new {
                    let b = nwa.slave(slave);
                    slots.push(Slot { slave, state: b.automaton.transition(t).to });
                    weights.push(b.effective_weight(t));
                }
                edges.push(ConfigEdge {
                    letter,
                    overflow: slots.len() > k,
                    to: Configuration { master: m.to, slots },
                    invoked: new.map(|_| slave),
                    released: released.clone(),
                    slot_weights: weights,
                    master_accepting: nwa.master.is_accepting(m.to),
                    all_terminated: survivors.is_empty(),
                    choice: EdgeChoice { master: mt, slots: choice.clone(), new },
                });
            }
        }
    }
    edges
}

/// Ways a freshly invoked slave can handle the current letter: `None` for silent acceptance of the
/// empty word, or a transition from a non-accepting initial state.
pub(crate) fn invocation_options(nwa: &Nwa, slave: usize, letter: Letter) -> Vec<Option<usize>> {
    let b = &nwa.slave(slave).automaton;
    let mut out = Vec::new();
    if b.initial().iter().any(|&s| b.is_accepting(s)) {
        out.push(None);
    }
    for &s in b.initial() {
        if !b.is_accepting(s) {
            out.extend(b.out(s, letter).iter().map(|&t| Some(t)));
        }
    }
    out
}

/// An explored edge; `target` is `None` for overflow edges.
#[derive(Clone, Debug)]
pub struct GraphEdge {
    pub edge: ConfigEdge,
    pub target: Option<usize>,
}

/// Configurations reachable from the initial ones, with all non-overflow edges explored.
#[derive(Clone, Debug)]
pub struct ConfigGraph {
    pub k: usize,
    pub nodes: Vec<Configuration>,
    pub edges: Vec<Vec<GraphEdge>>,
    pub initials: Vec<usize>,
    /// BFS tree: predecessor node and edge index for every non-initial node.
    pub parent: Vec<Option<(usize, usize)>>,
    index: HashMap<Configuration, usize>,
}

impl ConfigGraph {
    /// Breadth-first exploration in letter order. Fails once more than `cap` configurations are found.
    pub fn explore(nwa: &Nwa, k: usize, cap: Option<usize>, exec: Exec) -> Result<Self> {
        let mut g = ConfigGraph {
            k,
            nodes: Vec::new(),
            edges: Vec::new(),
            initials: Vec::new(),
            parent: Vec::new(),
            index: HashMap::new(),
        };
        for c in config_initials(nwa) {
            let (id, fresh) = g.intern(c, None, cap)?;
            if fresh {
                g.initials.push(id);
            }
        }
        let mut layer: Vec<usize> = g.initials.clone();
        while !layer.is_empty() {
            let configs: Vec<Configuration> = layer.iter().map(|&n| g.nodes[n].clone()).collect();
            let succs = exec.map(&configs, |c| {
                nwa.alphabet.ids().flat_map(|a| config_successors(nwa, c, a, k)).collect::<Vec<_>>()
            });
            let mut next = Vec::new();
            for (&node, out) in layer.iter().zip(succs) {
                let mut list = Vec::with_capacity(out.len());
                for edge in out {
                    let target = if edge.overflow {
                        None
                    } else {
                        let (id, fresh) = g.intern(edge.to.clone(), Some((node, list.len())), cap)?;
                        if fresh {
                            next.push(id);
                        }
                        Some(id)
                    };
                    list.push(GraphEdge { edge, target });
                }
                g.edges[node] = list;
            }
            layer = next;
        }
        Ok(g)
    }

    fn intern(&mut self, c: Configuration, parent: Option<(usize, usize)>, cap: Option<usize>) -> Result<(usize, bool)> {
        if let Some(&id) = self.index.get(&c) {
            return Ok((id, false));
        }
        if let Some(cap) = cap {
            if self.nodes.len() >= cap {
                return Err(Error::CapExceeded { cap });
            }
        }
        let id = self.nodes.len();
        self.index.insert(c.clone(), id);
        self.nodes.push(c);
        self.edges.push(Vec::new());
        self.parent.push(parent);
        Ok((id, true))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Letters along the BFS tree path from an initial configuration to `node`.
    pub fn access_word(&self, node: usize) -> Vec<Letter> {
        self.access_path(node).into_iter().map(|(n, e)| self.edges[n][e].edge.letter).collect()
    }

    /// `(node, edge index)` pairs along the BFS tree path to `node`.
    pub fn access_path(&self, mut node: usize) -> Vec<(usize, usize)> {
        let mut path = Vec::new();
        while let Some((p, e)) = self.parent[node] {
            path.push((p, e));
            node = p;
        }
        path.reverse();
        path
    }
}

/// Reachable configurations under width `k`, and the syntactic bound `|Q_m| · (|Q_s| + 1)^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigurationCount {
    pub reachable: usize,
    pub bound: u128,
}

pub fn count_configurations(nwa: &Nwa, k: usize) -> Result<ConfigurationCount> {
    let g = ConfigGraph::explore(nwa, k, None, Exec::default())?;
    let slave_states: u128 = nwa.slaves.iter().map(|s| s.automaton.n_states() as u128).sum();
    let bound = (slave_states + 1)
        .checked_pow(k as u32)
        .and_then(|p| p.checked_mul(nwa.master.n_states() as u128))
        .ok_or(Error::Overflow)?;
    Ok(ConfigurationCount { reachable: g.len(), bound })
}
