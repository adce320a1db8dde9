use std::collections::HashMap;

use nwa_core::corpus;
use nwa_core::oracle::{enumerate_lasso_infimum, evaluate_lasso, run_prefix};
use nwa_core::starcond::check_star_condition;
use nwa_core::{config_initials, config_successors, ConfigEdge, Configuration, Nwa, ValueResult};

struct Graph {
    nodes: Vec<Configuration>,
    edges: Vec<(usize, usize, ConfigEdge)>,
}

fn explore(nwa: &Nwa, k: usize) -> Graph {
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut nodes = config_initials(nwa);
    for (i, c) in nodes.iter().enumerate() {
        index.insert(c.clone(), i);
    }
    let mut edges = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        for a in nwa.alphabet.ids() {
            for e in config_successors(nwa, &nodes[i].clone(), a, k) {
                let to = *index.entry(e.to.clone()).or_insert_with(|| {
                    nodes.push(e.to.clone());
                    nodes.len() - 1
                });
                edges.push((i, to, e));
            }
        }
        i += 1;
    }
    Graph { nodes, edges }
}

/// Whether some simple cycle, mutually reachable with an accepting master configuration, keeps
/// the `j` oldest slots and gives them a negative total for some `j ≤ k`.
#[allow(clippy::needless_range_loop)]
fn brute_star(nwa: &Nwa, k: usize) -> bool {
    let g = explore(nwa, k);
    let n = g.nodes.len();
    let mut reach = vec![vec![false; n]; n];
    for (u, row) in reach.iter_mut().enumerate() {
        row[u] = true;
    }
    for &(u, v, _) in &g.edges {
        reach[u][v] = true;
    }
    for m in 0..n {
        for u in 0..n {
            for v in 0..n {
                if reach[u][m] && reach[m][v] {
                    reach[u][v] = true;
                }
            }
        }
    }
    let accepting: Vec<usize> = (0..n).filter(|&c| nwa.master.is_accepting(g.nodes[c].master)).collect();
    let mut found = false;
    for j in 1..=k {
        let sum = |e: &ConfigEdge| e.slot_weights.iter().take(j).sum::<i64>();
        let usable: Vec<&(usize, usize, ConfigEdge)> =
            g.edges.iter().filter(|(_, _, e)| !e.released.iter().any(|&p| p < j)).collect();
        for start in 0..n {
            if !accepting.iter().any(|&f| reach[start][f] && reach[f][start]) {
                continue;
            }
            // Simple cycles through `start` whose other nodes are larger.
            let mut stack = vec![(start, 0i64, vec![start])];
            while let Some((u, total, path)) = stack.pop() {
                for (_, v, e) in usable.iter().filter(|(x, _, _)| *x == u) {
                    let t = total + sum(e);
                    if *v == start {
                        found |= t < 0;
                    } else if *v > start && !path.contains(v) {
                        let mut p = path.clone();
                        p.push(*v);
                        stack.push((*v, t, p));
                    }
                }
            }
        }
    }
    found
}

#[test]
fn known_verdicts() {
    let cond2 = check_star_condition(&corpus::cond2(), 2).unwrap().expect("condition holds");
    assert_eq!(cond2.j, 1);
    assert!(check_star_condition(&corpus::cond1(), 2).unwrap().is_none());
    let ae = check_star_condition(&corpus::ae(), 1).unwrap().expect("condition holds");
    assert_eq!(ae.j, 1);
    let g = corpus::ae().alphabet.id("g").unwrap();
    assert_eq!(ae.cycle_letters(), vec![g]);
    for (name, nwa, width) in corpus::nwa_corpus() {
        if name.starts_with("art") {
            if let Some(k) = width {
                assert!(check_star_condition(&nwa, k).unwrap().is_none(), "{name}");
            }
        }
    }
}

#[test]
fn verdicts_match_brute_force() {
    for (name, nwa, width) in corpus::nwa_corpus() {
        let Some(k) = width else { continue };
        let star = check_star_condition(&nwa, k).unwrap();
        assert_eq!(star.is_some(), brute_star(&nwa, k), "{name}");
    }
}

#[test]
fn witness_is_self_consistent() {
    for (nwa, k) in [(corpus::cond2(), 2), (corpus::ae(), 1)] {
        let w = check_star_condition(&nwa, k).unwrap().unwrap();
        assert!(w.j_sum < 0);
        assert_eq!(w.recompute_sum(w.j).unwrap(), w.j_sum);
        assert_eq!(w.cycle_configs[0], w.anchor);
        // The access word leads to the anchor and the cycle returns to it.
        let trace = run_prefix(&nwa, &w.access, k).unwrap();
        let mut at = match trace.steps.last() {
            Some(_) => {
                let edges = config_successors(&nwa, &trace.steps.last().unwrap().before, *w.access.last().unwrap(), k);
                edges[0].to.clone()
            }
            None => config_initials(&nwa)[0].clone(),
        };
        assert_eq!(at, w.anchor);
        for (i, e) in w.cycle.iter().enumerate() {
            assert_eq!(at, w.cycle_configs[i]);
            let next = config_successors(&nwa, &at, e.letter, k);
            assert_eq!(&next[0], e);
            at = next[0].to.clone();
        }
        assert_eq!(at, w.anchor);
    }
}

#[test]
fn pumping_the_average_excess_witness_decreases() {
    let nwa = corpus::ae();
    let w = check_star_condition(&nwa, 1).unwrap().unwrap();
    let values: Vec<ValueResult> =
        [1, 2, 4, 8].iter().map(|&m| evaluate_lasso(&nwa, &w.pumped(m).unwrap(), 1).unwrap()).collect();
    for pair in values.windows(2) {
        assert!(pair[1] < pair[0], "{values:?}");
    }
    // One slave sees every pumped g, so the value is linear in m and never far below the corpus scale.
    let expected: Vec<ValueResult> = [0, -1, -3, -7].into_iter().map(ValueResult::integer).collect();
    assert_eq!(values, expected);
}

#[test]
fn pumped_lassos_of_cond2_stay_at_zero() {
    // Both slaves of every block see the same letters, so each period averages to 0; values below
    // any bound need ever longer blocks and are not ultimately periodic.
    let nwa = corpus::cond2();
    let w = check_star_condition(&nwa, 2).unwrap().unwrap();
    for m in [1, 2, 4, 8] {
        assert_eq!(evaluate_lasso(&nwa, &w.pumped(m).unwrap(), 2).unwrap(), ValueResult::integer(0));
    }
}

#[test]
fn no_witness_means_bounded_lassos() {
    let nwa = corpus::cond1();
    assert!(check_star_condition(&nwa, 2).unwrap().is_none());
    let c = nwa.min_slave_weight().unwrap();
    let (v, _) = enumerate_lasso_infimum(&nwa, 3, 8, 2).unwrap();
    assert!(v >= ValueResult::integer(2 * c * 8));
}
