use num_rational::BigRational;
use nwa_core::meanpayoff::{infimum_ratio, minimum_cycle, threshold_emptiness, Certificate, RatioGraph, RatioLasso};
use nwa_core::random::ratio_graph;
use nwa_core::{Threshold, ValueResult};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn closure(g: &RatioGraph) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; g.n]; g.n];
    for (u, row) in r.iter_mut().enumerate() {
        row[u] = true;
    }
    for e in &g.edges {
        r[e.from][e.to] = true;
    }
    for m in 0..g.n {
        for u in 0..g.n {
            for v in 0..g.n {
                if r[u][m] && r[m][v] {
                    r[u][v] = true;
                }
            }
        }
    }
    r
}

/// Least cost/ticks over simple cycles with ticks that lie, with an accepting node, in one
/// strongly connected part reachable from an initial node.
fn brute_minimum(g: &RatioGraph) -> ValueResult {
    let r = closure(g);
    let good = |u: usize| {
        g.initial.iter().any(|&i| r[i][u]) && (0..g.n).any(|f| g.accepting[f] && r[u][f] && r[f][u])
    };
    let mut best: Option<BigRational> = None;
    for start in 0..g.n {
        if !good(start) {
            continue;
        }
        let mut stack = vec![(start, 0i64, 0i64, vec![start])];
        while let Some((u, cost, ticks, path)) = stack.pop() {
            for e in g.edges.iter().filter(|e| e.from == u) {
                let (c, t) = (cost + e.cost, ticks + i64::from(e.ticks));
                if e.to == start {
                    if t > 0 {
                        let v = ratio(c, t);
                        if best.as_ref().is_none_or(|b| &v < b) {
                            best = Some(v);
                        }
                    }
                } else if e.to > start && !path.contains(&e.to) {
                    let mut p = path.clone();
                    p.push(e.to);
                    stack.push((e.to, c, t, p));
                }
            }
        }
    }
    best.map_or(ValueResult::PlusInfinity, ValueResult::Finite)
}

/// Checks that a lasso is a walk from an initial node whose cycle visits an accepting node.
fn accepting_lasso(g: &RatioGraph, l: &RatioLasso) -> Option<BigRational> {
    let v = l.replay(g)?;
    l.cycle.iter().any(|&e| g.accepting[g.edges[e].to]).then_some(v)
}

fn check_threshold(g: &RatioGraph, min: &ValueResult, t: Threshold) {
    let ans = threshold_emptiness(g, &t).unwrap();
    let expected = match min {
        ValueResult::Finite(m) => m < &t.value || (!t.strict && m == &t.value),
        _ => false,
    };
    assert_eq!(ans.holds, expected, "{t:?} min {min:?}");
    if !ans.holds {
        return;
    }
    let witness = ans.witness.unwrap();
    let v = witness.replay(g).expect("witness replays");
    assert!(if t.strict { v < t.value } else { v <= t.value });
    match ans.certificate.unwrap() {
        Certificate::Accepting(pumped) => {
            let lasso = pumped.expand(1 << 20).expect("small pumped lasso");
            let v = accepting_lasso(g, &lasso).expect("certificate visits an accepting node");
            assert!(if t.strict { v < t.value } else { v <= t.value }, "{v} vs {t:?}");
        }
        Certificate::LimitOnly => {
            // Only a non-strict threshold at exactly the minimum can be met in the limit alone.
            assert!(!t.strict && min == &ValueResult::Finite(t.value.clone()));
        }
    }
}

#[test]
fn random_graphs_match_cycle_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut finite = 0;
    for _ in 0..1000 {
        let g = ratio_graph(&mut rng, 8, 16, 8);
        let min = brute_minimum(&g);
        assert_eq!(infimum_ratio(&g).unwrap(), min, "{g:?}");
        if let ValueResult::Finite(m) = &min {
            finite += 1;
            let (v, lasso) = minimum_cycle(&g).unwrap().unwrap();
            assert_eq!(&v, m);
            assert_eq!(lasso.replay(&g), Some(v));
            let (half, one) = (ratio(1, 2), ratio(1, 1));
            for value in [m - &one, m - &half, m.clone(), m + &half, m + &one] {
                check_threshold(&g, &min, Threshold::le(value.clone()));
                check_threshold(&g, &min, Threshold::lt(value));
            }
        } else {
            assert!(minimum_cycle(&g).unwrap().is_none());
            check_threshold(&g, &min, Threshold::le_int(100));
        }
    }
    assert!(finite > 200, "{finite} graphs with a qualifying cycle");
}

#[test]
fn accepting_node_off_the_cheap_cycle() {
    // 0 -> 1 (accepting) -> 0 costs 10 per tick; the loop on 0 costs -1 per tick.
    let mut g = RatioGraph::new(2);
    g.initial = vec![0];
    g.accepting = vec![false, true];
    g.add_edge(0, 0, -1, 1);
    g.add_edge(0, 1, 10, 1);
    g.add_edge(1, 0, 10, 1);
    assert_eq!(infimum_ratio(&g).unwrap(), ValueResult::integer(-1));
    let strict = threshold_emptiness(&g, &Threshold::lt_int(0)).unwrap();
    assert!(strict.holds);
    let Some(Certificate::Accepting(p)) = strict.certificate else { panic!("expected a pumped lasso") };
    assert!(p.repeat >= 21, "the detour costs 20 over 2 ticks");
    assert_eq!(threshold_emptiness(&g, &Threshold::le_int(-1)).unwrap().certificate, Some(Certificate::LimitOnly));
    assert!(!threshold_emptiness(&g, &Threshold::lt_int(-1)).unwrap().holds);
}

fn graph_strategy() -> impl Strategy<Value = RatioGraph> {
    any::<u64>().prop_map(|seed| ratio_graph(&mut ChaCha8Rng::seed_from_u64(seed), 6, 12, 5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thresholds_are_monotone(g in graph_strategy(), a in -10i64..10, b in -10i64..10) {
        let (lo, hi) = (a.min(b), a.max(b));
        let at = |n: i64, strict: bool| {
            let t = if strict { Threshold::lt_int(n) } else { Threshold::le_int(n) };
            threshold_emptiness(&g, &t).unwrap().holds
        };
        prop_assert!(!at(lo, false) || at(hi, false));
        prop_assert!(!at(lo, true) || at(lo, false));
        prop_assert!(!at(lo, false) || lo == hi || at(hi, true));
    }

    #[test]
    fn shifting_costs_shifts_the_infimum(g in graph_strategy(), c in -3i64..3) {
        // Adding c to every tick edge cost moves every cycle ratio by c.
        let mut h = g.clone();
        for e in &mut h.edges {
            if e.ticks > 0 {
                e.cost += c * i64::from(e.ticks);
            }
        }
        let expected = match infimum_ratio(&g).unwrap() {
            ValueResult::Finite(v) => ValueResult::Finite(v + BigRational::from_integer(c.into())),
            other => other,
        };
        prop_assert_eq!(infimum_ratio(&h).unwrap(), expected);
    }
}
