//! Seeded random instances for property tests and benchmarks.

use rand::Rng;

use crate::error::Result;
use crate::meanpayoff::RatioGraph;
use crate::model::{Alphabet, Automaton, Nwa, Transition, WeightedAutomaton};
use crate::value::ValueFn;

/// A graph with `1..=max_nodes` nodes and `0..=max_edges` edges. Roughly one edge in five is
/// silent; the others cost a value in `-cost_bound..=cost_bound`. Node 0 is initial.
pub fn ratio_graph<R: Rng>(rng: &mut R, max_nodes: usize, max_edges: usize, cost_bound: i64) -> RatioGraph {
    let n = rng.gen_range(1..=max_nodes);
    let mut g = RatioGraph::new(n);
    for _ in 0..rng.gen_range(0..=max_edges) {
        let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if rng.gen_bool(0.2) {
            g.add_edge(from, to, 0, 0);
        } else {
            g.add_edge(from, to, rng.gen_range(-cost_bound..=cost_bound), 1);
        }
    }
    g.initial.push(0);
    for a in g.accepting.iter_mut() {
        *a = rng.gen_bool(0.3);
    }
    g
}

/// Size limits for [`small_nwa`].
#[derive(Clone, Copy, Debug)]
pub struct NwaShape {
    pub letters: usize,
    pub master_states: usize,
    pub slaves: usize,
    pub slave_states: usize,
    /// Most transitions per state and letter.
    pub branching: usize,
    pub weight_bound: i64,
}

impl Default for NwaShape {
    fn default() -> Self {
        NwaShape { letters: 2, master_states: 3, slaves: 2, slave_states: 3, branching: 2, weight_bound: 3 }
    }
}

/// A random automaton within `shape`, with a dummy slave in last position.
pub fn small_nwa<R: Rng>(rng: &mut R, shape: NwaShape) -> Result<Nwa> {
    let letters = shape.letters;
    let alphabet = Alphabet::new((0..letters).map(|i| format!("l{i}")))?;
    let n_slaves = rng.gen_range(1..=shape.slaves);
    let mut slaves = Vec::with_capacity(n_slaves + 1);
    for _ in 0..n_slaves {
        let n = rng.gen_range(2..=shape.slave_states);
        let mut ts = Vec::new();
        for from in 0..n - 1 {
            for letter in 0..letters {
                for _ in 0..rng.gen_range(0..=shape.branching) {
                    let label = rng.gen_range(-shape.weight_bound..=shape.weight_bound);
                    ts.push(Transition { from, letter, to: rng.gen_range(0..n), label });
                }
            }
        }
        let names = (0..n).map(|i| format!("s{i}")).collect();
        let value_fn = if rng.gen_bool(0.5) { ValueFn::Sum } else { ValueFn::SumPlus };
        slaves.push(WeightedAutomaton::new(Automaton::new(letters, names, vec![0], vec![n - 1], ts)?, value_fn)?);
    }
    slaves.push(WeightedAutomaton::new(Automaton::new(letters, vec!["d".into()], vec![0], vec![0], Vec::new())?, ValueFn::Sum)?);

    let n = rng.gen_range(1..=shape.master_states);
    let mut ts = Vec::new();
    for from in 0..n {
        for letter in 0..letters {
            for _ in 0..rng.gen_range(0..=shape.branching) {
                ts.push(Transition { from, letter, to: rng.gen_range(0..n), label: rng.gen_range(0..=n_slaves) });
            }
        }
    }
    let mut initial = vec![0];
    if shape.branching > 1 && n > 1 && rng.gen_bool(0.3) {
        initial.push(1);
    }
    let mut accepting: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    if accepting.is_empty() {
        accepting.push(rng.gen_range(0..n));
    }
    let names = (0..n).map(|i| format!("q{i}")).collect();
    let master = Automaton::new(letters, names, initial, accepting, ts)?;
    Ok(Nwa::new(alphabet, master, slaves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            ratio_graph(&mut rng, 8, 16, 8).validate().unwrap();
            small_nwa(&mut rng, NwaShape::default()).unwrap().ensure_valid().unwrap();
        }
    }
}
