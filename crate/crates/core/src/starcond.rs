//! Detection of unboundedly negative values via negative cycles of the oldest active slaves.
//!
//! The infimum is minus infinity iff, in a strongly connected part of the reachable configuration
//! graph that contains an accepting master state, some cycle keeps the `j` least recently invoked
//! slaves alive and makes them accumulate a negative total weight.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::config::{ConfigEdge, ConfigGraph, Configuration};
use crate::error::{add, Error, Result};
use crate::graph::{bfs_path, negative_cycle};
use crate::model::{LassoWord, Letter, Nwa};
use crate::par::Exec;

/// A reachable cycle on which the `j` oldest slaves accumulate `j_sum < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarWitness {
    pub j: usize,
    /// Edges of the cycle, starting and ending at `anchor`.
    pub cycle: Vec<ConfigEdge>,
    /// Source configuration of each cycle edge.
    pub cycle_configs: Vec<Configuration>,
    pub anchor: Configuration,
    pub j_sum: i64,
    /// Letters leading from an initial configuration to `anchor`.
    pub access: Vec<Letter>,
    /// Letters leading from `anchor` back to itself through an accepting master state, releasing
    /// every slave active at `anchor`; `None` if no such path exists.
    pub closing: Option<Vec<Letter>>,
}

impl StarWitness {
    pub fn cycle_letters(&self) -> Vec<Letter> {
        self.cycle.iter().map(|e| e.letter).collect()
    }

    /// `access · (cycle^m · closing)^ω`.
    pub fn pumped(&self, m: usize) -> Option<LassoWord> {
        let closing = self.closing.as_ref()?;
        let mut period = Vec::new();
        for _ in 0..m {
            period.extend(self.cycle_letters());
        }
        period.extend(closing);
        Some(LassoWord { prefix: self.access.clone(), period })
    }

    /// Sum over the cycle of the weights of the first `j` slots.
    pub fn recompute_sum(&self, j: usize) -> Result<i64> {
        self.cycle.iter().try_fold(0i64, |acc, e| add(acc, oldest_weight(e, j)?))
    }
}

fn oldest_weight(e: &ConfigEdge, j: usize) -> Result<i64> {
    e.slot_weights.iter().take(j).try_fold(0i64, |acc, &w| add(acc, w))
}

/// Strongly connected components with an internal edge and an accepting master state, ordered by
/// their least node.
pub(crate) fn accepting_components(g: &ConfigGraph, accepting: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let mut dg: DiGraph<(), ()> = DiGraph::with_capacity(g.len(), 0);
    for _ in 0..g.len() {
        dg.add_node(());
    }
    for (u, out) in g.edges.iter().enumerate() {
        for e in out {
            if let Some(v) = e.target {
                dg.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&dg)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort_unstable();
    let mut comp_of = vec![usize::MAX; g.len()];
    for (i, c) in comps.iter().enumerate() {
        for &n in c {
            comp_of[n] = i;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .filter(|(i, c)| {
            c.iter().any(|&n| accepting(n))
                && c.iter().any(|&n| g.edges[n].iter().any(|e| e.target.is_some_and(|t| comp_of[t] == *i)))
        })
        .map(|(_, c)| c)
        .collect()
}

/// First witness in order of increasing `j`, then component order; `None` when the minimal
/// slave weight is nonnegative or no component has a negative cycle.
pub fn check_star_condition(nwa: &Nwa, k: usize) -> Result<Option<StarWitness>> {
    check_star_condition_with(nwa, k, Exec::default())
}

pub fn check_star_condition_with(nwa: &Nwa, k: usize, exec: Exec) -> Result<Option<StarWitness>> {
    nwa.ensure_valid()?;
    nwa.ensure_deterministic()?;
    if nwa.min_slave_weight().is_none_or(|c| c >= 0) {
        return Ok(None);
    }
    let g = ConfigGraph::explore(nwa, k, None, exec)?;
    if g.edges.iter().flatten().any(|e| e.edge.overflow) {
        return Err(Error::Precondition(format!("automaton does not have width {k}")));
    }
    let comps = accepting_components(&g, |n| nwa.master.is_accepting(g.nodes[n].master));
    let jobs: Vec<(usize, usize)> = (1..=k).flat_map(|j| (0..comps.len()).map(move |c| (j, c))).collect();
    let found = exec.map(&jobs, |&(j, c)| component_cycle(&g, &comps[c], j));
    for r in found {
        if let Some((j, cycle)) = r? {
            return Ok(Some(build_witness(&g, j, cycle)?));
        }
    }
    Ok(None)
}

type Step = (usize, usize);

/// A negative cycle (as `(node, edge index)` pairs) inside one component for the `j` oldest slots.
fn component_cycle(g: &ConfigGraph, comp: &[usize], j: usize) -> Result<Option<(usize, Vec<Step>)>> {
    let local = |n: usize| comp.binary_search(&n).ok();
    let mut edges = Vec::new();
    let mut origin = Vec::new();
    for (li, &u) in comp.iter().enumerate() {
        for (ei, e) in g.edges[u].iter().enumerate() {
            let Some(lv) = e.target.and_then(local) else { continue };
            if e.edge.released.iter().any(|&p| p < j) {
                continue;
            }
            edges.push((li, lv, i128::from(oldest_weight(&e.edge, j)?)));
            origin.push((u, ei));
        }
    }
    Ok(negative_cycle(comp.len(), &edges).map(|c| (j, c.into_iter().map(|e| origin[e]).collect())))
}

fn build_witness(g: &ConfigGraph, j: usize, mut cycle: Vec<(usize, usize)>) -> Result<StarWitness> {
    let rot = (0..cycle.len()).min_by_key(|&i| cycle[i].0).unwrap_or(0);
    cycle.rotate_left(rot);
    let anchor_id = cycle[0].0;
    let edges: Vec<ConfigEdge> = cycle.iter().map(|&(u, e)| g.edges[u][e].edge.clone()).collect();
    let configs = cycle.iter().map(|&(u, _)| g.nodes[u].clone()).collect();
    let j_sum = edges.iter().try_fold(0i64, |acc, e| add(acc, oldest_weight(e, j)?))?;
    Ok(StarWitness {
        j,
        cycle: edges,
        cycle_configs: configs,
        anchor: g.nodes[anchor_id].clone(),
        j_sum,
        access: g.access_word(anchor_id),
        closing: closing_path(g, anchor_id),
    })
}

/// Shortest path from `anchor` back to itself that visits an accepting master configuration and
/// outlives every slot active at `anchor`.
fn closing_path(g: &ConfigGraph, anchor: usize) -> Option<Vec<Letter>> {
    // Product nodes: (configuration, number of anchor slots still active, accepting seen).
    let width = g.k + 1;
    let id = |n: usize, old: usize, acc: bool| (n * width + old) * 2 + usize::from(acc);
    let total = g.len() * width * 2;
    let mut edges = Vec::new();
    let mut letters = Vec::new();
    for (u, out) in g.edges.iter().enumerate() {
        for e in out {
            let Some(v) = e.target else { continue };
            let acc_v = e.edge.master_accepting;
            for old in 0..width.min(g.nodes[u].slots.len() + 1) {
                let left = old - e.edge.released.iter().filter(|&&p| p < old).count();
                for acc in [false, true] {
                    edges.push((id(u, old, acc), id(v, left, acc || acc_v)));
                    letters.push(e.edge.letter);
                }
            }
        }
    }
    // Start with one step taken so the path is nonempty.
    let start_old = g.nodes[anchor].slots.len();
    let mut best: Option<Vec<Letter>> = None;
    for e in &g.edges[anchor] {
        let Some(v) = e.target else { continue };
        let left = start_old - e.edge.released.iter().filter(|&&p| p < start_old).count();
        let src = id(v, left, e.edge.master_accepting);
        if let Some(path) = bfs_path(total, &edges, &[src], id(anchor, 0, true)) {
            if best.as_ref().is_none_or(|b| path.len() + 1 < b.len()) {
                let mut word = vec![e.edge.letter];
                word.extend(path.into_iter().map(|i| letters[i]));
                best = Some(word);
            }
        }
    }
    best
}
