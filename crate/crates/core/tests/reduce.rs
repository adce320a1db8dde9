use std::collections::BTreeMap;

use nwa_core::oracle::compare_lassos;
use nwa_core::reduce::{fragment_automaton, min_slave_value, reduce_width1, FragmentLetter, FragmentWeight};
use nwa_core::starcond::check_star_condition;
use nwa_core::text::{parse_nwa, render_nwa};
use nwa_core::{corpus, has_width, Error, Exec, Nwa, State, ValueResult};

fn assert_equivalent(name: &str, nwa: &Nwa, k: usize) {
    let red = reduce_width1(nwa, k).unwrap();
    assert!(red.validate().is_empty(), "{name}");
    assert!(red.is_deterministic(), "{name}");
    assert!(has_width(&red, 1).unwrap().holds, "{name}");
    let cmp = compare_lassos((nwa, k), (&red, 1), 2, 6, Exec::default()).unwrap();
    if let Some((w, a, b)) = &cmp.mismatch {
        panic!("{name}: {} gives {a:?} before and {b:?} after", w.render(&nwa.alphabet));
    }
    assert!(cmp.checked > 0, "{name}");
    let text = render_nwa(&red);
    let back = parse_nwa(&text).unwrap_or_else(|e| panic!("{name}: reduced automaton does not parse: {e}"));
    assert_eq!(render_nwa(&back), text, "{name}");
}

#[test]
fn reductions_preserve_lasso_values() {
    for (name, nwa, k) in [
        ("cond1", corpus::cond1(), 2),
        ("art1", corpus::art1(), 1),
        ("art_k2", corpus::art_k(2), 2),
        ("art_k3", corpus::art_k(3), 3),
        ("art1_k2", corpus::art1_k(2), 2),
    ] {
        assert!(check_star_condition(&nwa, k).unwrap().is_none(), "{name}");
        assert_equivalent(name, &nwa, k);
    }
}

#[test]
fn reduction_rejects_bad_inputs() {
    assert!(matches!(reduce_width1(&corpus::art(), 3), Err(Error::Precondition(_))));
    assert!(matches!(reduce_width1(&corpus::art_k(3), 2), Err(Error::Precondition(_))));
}

/// Least slave value over words of length at most `len` realizing the fragment, by layered
/// simulation keeping the cheapest weight per master and slave state.
fn brute_fragment(nwa: &Nwa, q1: State, letter: usize, len: usize) -> BTreeMap<State, i64> {
    let mut best = BTreeMap::new();
    let m = &nwa.master;
    let Some(&mt) = m.out(q1, letter).first() else { return best };
    let t = m.transition(mt);
    if nwa.invocation_is_silent(t.label) {
        return best;
    }
    let b = nwa.slave(t.label);
    let init = b.automaton.initial()[0];
    let Some(&st) = b.automaton.out(init, letter).first() else { return best };
    let mut layer = BTreeMap::from([((t.to, b.automaton.transition(st).to), b.effective_weight(st))]);
    for _ in 0..len {
        let mut next: BTreeMap<(State, State), i64> = BTreeMap::new();
        for (&(q, s), &w) in &layer {
            if b.automaton.is_accepting(s) {
                best.entry(q).and_modify(|v: &mut i64| *v = (*v).min(w)).or_insert(w);
                continue;
            }
            for a in nwa.alphabet.ids() {
                let (Some(&mt), Some(&st)) = (m.out(q, a).first(), b.automaton.out(s, a).first()) else { continue };
                let t = m.transition(mt);
                if !nwa.invocation_is_silent(t.label) {
                    continue;
                }
                let key = (t.to, b.automaton.transition(st).to);
                let w = w + b.effective_weight(st);
                next.entry(key).and_modify(|v| *v = (*v).min(w)).or_insert(w);
            }
        }
        layer = next;
    }
    best
}

#[test]
fn slave_minima_match_simulation() {
    for (name, nwa, _) in corpus::nwa_corpus() {
        for q1 in 0..nwa.master.n_states() {
            for letter in nwa.alphabet.ids() {
                let short = brute_fragment(&nwa, q1, letter, 40);
                let long = brute_fragment(&nwa, q1, letter, 80);
                let invoked = nwa.master.out(q1, letter).first().map(|&t| nwa.master.transition(t).label);
                for q2 in 0..nwa.master.n_states() {
                    for slave in 0..nwa.slaves.len() {
                        let got = min_slave_value(&nwa, q1, letter, q2, slave).unwrap();
                        let site = format!("{name}: from {q1} on {letter} to {q2}, slave {slave}");
                        if invoked != Some(slave) {
                            assert_eq!(got, None, "{site}");
                            continue;
                        }
                        match got {
                            None => assert_eq!(long.get(&q2), None, "{site}"),
                            Some(ValueResult::NegInfinity) => assert!(long[&q2] < short[&q2], "{site}"),
                            Some(v) => {
                                assert_eq!(v, ValueResult::integer(short[&q2]), "{site}");
                                assert_eq!(long[&q2], short[&q2], "{site}");
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn response_time_fragments() {
    let nwa = corpus::art1();
    let q = |s: &str| nwa.master.state_id(s).unwrap();
    let r = nwa.alphabet.id("r").unwrap();
    assert_eq!(min_slave_value(&nwa, q("idle"), r, q("granted"), 0).unwrap(), Some(ValueResult::integer(1)));
    assert_eq!(min_slave_value(&nwa, q("idle"), r, q("pending"), 0).unwrap(), None);
    assert_eq!(min_slave_value(&nwa, q("idle"), r, q("granted"), 1).unwrap(), None);

    let f = fragment_automaton(&nwa).unwrap();
    f.graph.validate().unwrap();
    assert_eq!(f.graph.edges.len(), f.edges.len());
    let valued: Vec<_> = f.edges.iter().filter(|e| matches!(e.letter, FragmentLetter::Valued { .. })).collect();
    assert!(!valued.is_empty());
    for e in &valued {
        let FragmentWeight::Finite(v) = e.weight else { panic!("{e:?}") };
        assert_eq!(v, 1);
        assert_eq!(nwa.alphabet.render_word(&e.word), "r g");
    }
}
