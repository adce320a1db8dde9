//! Mean-payoff analysis of graphs whose edges carry a cost and a tick count of 0 or 1.
//!
//! The ratio of a cycle is its total cost over its total ticks. Only cycles with at least one tick
//! count, and only inside strongly connected parts that are reachable and contain an accepting node.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{Error, Result};
use crate::graph::{bfs_path, negative_cycle, shortest_paths, tree_path, WEdge};
use crate::par::Exec;
use crate::value::{Threshold, ValueResult};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioEdge {
    pub from: usize,
    pub to: usize,
    pub cost: i64,
    pub ticks: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RatioGraph {
    pub n: usize,
    pub edges: Vec<RatioEdge>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
}

impl RatioGraph {
    pub fn new(n: usize) -> Self {
        RatioGraph { n, edges: Vec::new(), initial: Vec::new(), accepting: vec![false; n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cost: i64, ticks: u8) -> usize {
        self.edges.push(RatioEdge { from, to, cost, ticks });
        self.edges.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.accepting.len() != self.n {
            return Err(Error::Malformed("accepting flags do not match node count".into()));
        }
        if let Some(&s) = self.initial.iter().find(|&&s| s >= self.n) {
            return Err(Error::Malformed(format!("initial node {s} out of range")));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.n || e.to >= self.n {
                return Err(Error::Malformed(format!("edge {i} has an endpoint out of range")));
            }
            if e.ticks > 1 || (e.ticks == 0 && e.cost != 0) {
                return Err(Error::Malformed(format!("edge {i} is silent but carries cost {}", e.cost)));
            }
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.from, e.to)).collect()
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            out[e.from].push(e.to);
        }
        let mut stack: Vec<usize> = self.initial.clone();
        while let Some(u) = stack.pop() {
            if !std::mem::replace(&mut seen[u], true) {
                stack.extend(out[u].iter().copied().filter(|&v| !seen[v]));
            }
        }
        seen
    }

    /// Reachable strongly connected parts containing an accepting node, ordered by least node,
    /// each with its internal edges.
    pub(crate) fn qualifying_components(&self) -> Vec<Component> {
        let reach = self.reachable();
        let mut dg: DiGraph<(), ()> = DiGraph::with_capacity(self.n, self.edges.len());
        for _ in 0..self.n {
            dg.add_node(());
        }
        for e in &self.edges {
            if reach[e.from] {
                dg.add_edge(NodeIndex::new(e.from), NodeIndex::new(e.to), ());
            }
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&dg)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                v.sort_unstable();
                v
            })
            .filter(|c| reach[c[0]] && c.iter().any(|&n| self.accepting[n]))
            .collect();
        comps.sort_unstable();
        comps
            .into_iter()
            .filter_map(|nodes| {
                let local = |x: usize| nodes.binary_search(&x).ok();
                let edges: Vec<usize> = (0..self.edges.len())
                    .filter(|&i| local(self.edges[i].from).is_some() && local(self.edges[i].to).is_some())
                    .collect();
                (!edges.is_empty()).then_some(Component { nodes, edges })
            })
            .collect()
    }

    fn sum(&self, path: &[usize]) -> (BigInt, u64) {
        path.iter().fold((BigInt::zero(), 0), |(c, t), &e| {
            (c + self.edges[e].cost, t + u64::from(self.edges[e].ticks))
        })
    }

    /// Whether `path` is a walk in the graph, starting at `from` when given.
    fn connected(&self, from: Option<usize>, path: &[usize]) -> bool {
        let mut at = from;
        for &e in path {
            let Some(edge) = self.edges.get(e) else { return false };
            if at.is_some_and(|a| a != edge.from) {
                return false;
            }
            at = Some(edge.to);
        }
        true
    }

    /// Ratio of a closed walk of edge indices, `None` if it is not closed or has no tick.
    pub fn cycle_ratio(&self, cycle: &[usize]) -> Option<BigRational> {
        let first = self.edges.get(*cycle.first()?)?.from;
        if !self.connected(Some(first), cycle) || self.edges[*cycle.last()?].to != first {
            return None;
        }
        let (cost, ticks) = self.sum(cycle);
        (ticks > 0).then(|| BigRational::new(cost, ticks.into()))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Component {
    pub(crate) nodes: Vec<usize>,
    pub(crate) edges: Vec<usize>,
}

/// Access path from an initial node followed by a cycle, both as edge indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioLasso {
    pub access: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl RatioLasso {
    /// Ratio of the cycle after checking the lasso is a walk from an initial node.
    pub fn replay(&self, g: &RatioGraph) -> Option<BigRational> {
        let start = match self.access.first() {
            Some(&e) => g.edges.get(e)?.from,
            None => g.edges.get(*self.cycle.first()?)?.from,
        };
        if !g.initial.contains(&start) || !g.connected(Some(start), &self.access) {
            return None;
        }
        let end = self.access.last().map_or(start, |&e| g.edges[e].to);
        if g.edges.get(*self.cycle.first()?)?.from != end {
            return None;
        }
        g.cycle_ratio(&self.cycle)
    }
}

/// `access · (lead · cycle^repeat · back)^ω`: a lasso whose period visits an accepting node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PumpedLasso {
    pub access: Vec<usize>,
    pub lead: Vec<usize>,
    pub cycle: Vec<usize>,
    pub repeat: u64,
    pub back: Vec<usize>,
}

impl PumpedLasso {
    pub fn period_len(&self) -> u128 {
        (self.lead.len() + self.back.len()) as u128 + self.cycle.len() as u128 * u128::from(self.repeat)
    }

    /// The explicit lasso, or `None` if its period would exceed `limit` edges.
    pub fn expand(&self, limit: usize) -> Option<RatioLasso> {
        if self.period_len() > limit as u128 {
            return None;
        }
        let mut cycle = self.lead.clone();
        for _ in 0..self.repeat {
            cycle.extend(&self.cycle);
        }
        cycle.extend(&self.back);
        Some(RatioLasso { access: self.access.clone(), cycle })
    }
}

/// Evidence for a satisfied threshold beyond the witness cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// A single lasso through an accepting node meeting the threshold.
    Accepting(PumpedLasso),
    /// The threshold is met only in the limit, by ever longer stays on the witness cycle between
    /// visits to an accepting node.
    LimitOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdAnswer {
    pub holds: bool,
    pub witness: Option<RatioLasso>,
    pub certificate: Option<Certificate>,
}

/// Shifted integer weights of a component's edges. Strict probes use `q·cost − p·ticks`;
/// non-strict probes scale by `n + 1` and subtract ticks so that zero-sum tick cycles turn negative.
fn shifted(g: &RatioGraph, comp: &Component, t: &BigRational, strict: bool) -> Vec<WEdge<BigInt>> {
    let local = |x: usize| comp.nodes.binary_search(&x).unwrap_or(usize::MAX);
    let scale = BigInt::from(comp.nodes.len() + 1);
    comp.edges
        .iter()
        .map(|&i| {
            let e = &g.edges[i];
            let ticks = BigInt::from(e.ticks);
            let mut w = t.denom() * e.cost - t.numer() * &ticks;
            if !strict {
                w = w * &scale - ticks;
            }
            (local(e.from), local(e.to), w)
        })
        .collect()
}

/// Negative cycle on shifted weights, computed in `i128` when the weights are small enough.
fn probe(g: &RatioGraph, comp: &Component, t: &BigRational, strict: bool) -> Option<Vec<usize>> {
    let big = shifted(g, comp, t, strict);
    let n = comp.nodes.len();
    let bound = i128::MAX / (2 * (n as i128 + 2) * (n as i128 + 2));
    let narrow: Option<Vec<WEdge<i128>>> = big
        .iter()
        .map(|(u, v, w)| w.to_i128().filter(|x| x.abs() <= bound).map(|x| (*u, *v, x)))
        .collect();
    let found = match narrow {
        Some(edges) => negative_cycle(n, &edges),
        None => negative_cycle(n, &big),
    };
    found.map(|c| c.into_iter().map(|i| comp.edges[i]).collect())
}

fn access_to(g: &RatioGraph, node: usize) -> Vec<usize> {
    bfs_path(g.n, &g.pairs(), &g.initial, node).unwrap_or_default()
}

/// Whether some qualifying cycle has ratio `≤ t` (or `< t` when strict), with a witness lasso
/// and an accepting certificate.
pub fn threshold_emptiness(g: &RatioGraph, t: &Threshold) -> Result<ThresholdAnswer> {
    threshold_emptiness_with(g, t, Exec::default())
}

pub fn threshold_emptiness_with(g: &RatioGraph, t: &Threshold, exec: Exec) -> Result<ThresholdAnswer> {
    g.validate()?;
    let comps = g.qualifying_components();
    let found = exec.map(&comps, |c| probe(g, c, &t.value, t.strict).map(|cycle| (c.clone(), cycle)));
    let Some((comp, cycle)) = found.into_iter().flatten().next() else {
        return Ok(ThresholdAnswer { holds: false, witness: None, certificate: None });
    };
    let witness = RatioLasso { access: access_to(g, g.edges[cycle[0]].from), cycle };
    let certificate = accepting_certificate(g, &comp, t, &witness.cycle);
    Ok(ThresholdAnswer { holds: true, witness: Some(witness), certificate: Some(certificate) })
}

fn sub_pairs<'a>(g: &RatioGraph, comp: &'a Component) -> (Vec<(usize, usize)>, impl Fn(usize) -> usize + 'a) {
    let local = |x: usize| comp.nodes.binary_search(&x).unwrap_or(usize::MAX);
    let pairs = comp.edges.iter().map(|&i| (local(g.edges[i].from), local(g.edges[i].to))).collect();
    (pairs, local)
}

fn accepting_certificate(g: &RatioGraph, comp: &Component, t: &Threshold, witness: &[usize]) -> Certificate {
    let strict_cycle =
        if t.strict { Some(witness.to_vec()) } else { probe(g, comp, &t.value, true) };
    let acc = comp.nodes.iter().copied().filter(|&n| g.accepting[n]).collect::<Vec<_>>();
    let (pairs, local) = sub_pairs(g, comp);
    let lift = |p: Vec<usize>| p.into_iter().map(|i| comp.edges[i]).collect::<Vec<_>>();
    let weight = |path: &[usize]| -> BigInt {
        let (c, ticks) = g.sum(path);
        t.value.denom() * c - t.value.numer() * BigInt::from(ticks)
    };
    if let Some(cycle) = strict_cycle {
        let f = acc[0];
        let start = g.edges[cycle[0]].from;
        let lead = lift(bfs_path(comp.nodes.len(), &pairs, &[local(f)], local(start)).unwrap_or_default());
        let back = lift(bfs_path(comp.nodes.len(), &pairs, &[local(start)], local(f)).unwrap_or_default());
        let detour = weight(&lead) + weight(&back);
        let per = -weight(&cycle);
        let repeat = if detour.is_negative() { BigInt::from(1) } else { detour.div_floor(&per) + 1 };
        if let Some(repeat) = repeat.to_u64() {
            return Certificate::Accepting(PumpedLasso { access: access_to(g, f), lead, cycle, repeat, back });
        }
        return Certificate::LimitOnly;
    }
    // No strictly better cycle: a closed walk through an accepting node must have ratio exactly t.
    let local_edges: Vec<WEdge<BigInt>> = comp
        .edges
        .iter()
        .zip(&pairs)
        .map(|(&i, &(u, v))| (u, v, weight(&[i])))
        .collect();
    let reversed: Vec<WEdge<BigInt>> = local_edges.iter().map(|(u, v, w)| (*v, *u, w.clone())).collect();
    for &f in &acc {
        let (dist_from, pred_from) = shortest_paths(comp.nodes.len(), &local_edges, local(f));
        let (dist_to, pred_to) = shortest_paths(comp.nodes.len(), &reversed, local(f));
        for (li, &i) in comp.edges.iter().enumerate() {
            if g.edges[i].ticks == 0 {
                continue;
            }
            let (u, v, w) = &local_edges[li];
            let (Some(a), Some(b)) = (&dist_from[*u], &dist_to[*v]) else { continue };
            if (a + w + b).is_positive() {
                continue;
            }
            let lead = lift(tree_path(&local_edges, &pred_from, *u));
            let mut back = tree_path(&reversed, &pred_to, *v);
            back.reverse();
            return Certificate::Accepting(PumpedLasso {
                access: access_to(g, f),
                lead,
                cycle: vec![i],
                repeat: 1,
                back: lift(back),
            });
        }
    }
    Certificate::LimitOnly
}

/// A qualifying cycle of least ratio, with its access path; `None` when there is none.
pub fn minimum_cycle(g: &RatioGraph) -> Result<Option<(BigRational, RatioLasso)>> {
    minimum_cycle_with(g, Exec::default())
}

pub fn minimum_cycle_with(g: &RatioGraph, exec: Exec) -> Result<Option<(BigRational, RatioLasso)>> {
    g.validate()?;
    let comps = g.qualifying_components();
    let best = exec.map(&comps, |c| component_minimum(g, c));
    let mut out: Option<(BigRational, Vec<usize>)> = None;
    for (r, cycle) in best.into_iter().flatten() {
        if out.as_ref().is_none_or(|(b, _)| &r < b) {
            out = Some((r, cycle));
        }
    }
    Ok(out.map(|(r, cycle)| (r, RatioLasso { access: access_to(g, g.edges[cycle[0]].from), cycle })))
}

/// Least ratio among qualifying cycles as a value: `PlusInfinity` when there is none.
pub fn infimum_ratio(g: &RatioGraph) -> Result<ValueResult> {
    Ok(match minimum_cycle(g)? {
        Some((r, _)) => ValueResult::Finite(r),
        None => ValueResult::PlusInfinity,
    })
}

/// Starts from any tick cycle and replaces it by a strictly better one until none exists.
/// Each step lowers the ratio among finitely many simple-cycle ratios, so the loop terminates.
fn component_minimum(g: &RatioGraph, comp: &Component) -> Option<(BigRational, Vec<usize>)> {
    let (pairs, local) = sub_pairs(g, comp);
    let (li, &tick) = comp.edges.iter().enumerate().find(|(_, &i)| g.edges[i].ticks == 1)?;
    let closing = bfs_path(comp.nodes.len(), &pairs, &[pairs[li].1], local(g.edges[tick].from))?;
    let mut cycle = vec![tick];
    cycle.extend(closing.into_iter().map(|i| comp.edges[i]));
    let mut ratio = g.cycle_ratio(&cycle)?;
    while let Some(better) = probe(g, comp, &ratio, true) {
        ratio = g.cycle_ratio(&better)?;
        cycle = better;
    }
    Some((ratio, cycle))
}
