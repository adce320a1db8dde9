//! Golden automata shipped with the crate.

use crate::mca::Mca;
use crate::model::Nwa;
use crate::text::{parse_mca, parse_nwa};

pub const ART: &str = include_str!("../corpus/art.nwa");
pub const ART1: &str = include_str!("../corpus/art1.nwa");
pub const ART_K2: &str = include_str!("../corpus/art_k2.nwa");
pub const ART_K3: &str = include_str!("../corpus/art_k3.nwa");
pub const ART1_K2: &str = include_str!("../corpus/art1_k2.nwa");
pub const ART1_K3: &str = include_str!("../corpus/art1_k3.nwa");
pub const AE: &str = include_str!("../corpus/ae.nwa");
pub const COND1: &str = include_str!("../corpus/cond1.nwa");
pub const COND2: &str = include_str!("../corpus/cond2.nwa");
pub const COUNTER1: &str = include_str!("../corpus/counter1.mca");

/// Nested automata by file stem, with their width (`None` when unbounded).
pub const NWA_FILES: [(&str, &str, Option<usize>); 9] = [
    ("art", ART, None),
    ("art1", ART1, Some(1)),
    ("art_k2", ART_K2, Some(2)),
    ("art_k3", ART_K3, Some(3)),
    ("art1_k2", ART1_K2, Some(2)),
    ("art1_k3", ART1_K3, Some(3)),
    ("ae", AE, Some(1)),
    ("cond1", COND1, Some(2)),
    ("cond2", COND2, Some(2)),
];

fn nwa(text: &str) -> Nwa {
    parse_nwa(text).expect("corpus files parse")
}

/// Response time with unbounded width.
pub fn art() -> Nwa {
    nwa(ART)
}

/// Response time where requests never overlap; width 1.
pub fn art1() -> Nwa {
    nwa(ART1)
}

/// Response time with up to `k ∈ {2, 3}` pending requests.
pub fn art_k(k: usize) -> Nwa {
    match k {
        2 => nwa(ART_K2),
        3 => nwa(ART_K3),
        _ => panic!("no corpus automaton for k = {k}"),
    }
}

/// `k ∈ {2, 3}` request types, one slave each.
pub fn art1_k(k: usize) -> Nwa {
    match k {
        2 => nwa(ART1_K2),
        3 => nwa(ART1_K3),
        _ => panic!("no corpus automaton for k = {k}"),
    }
}

/// Average excess of requests over grants per block.
pub fn ae() -> Nwa {
    nwa(AE)
}

/// Increment slave invoked before decrement slave; infimum 0.
pub fn cond1() -> Nwa {
    nwa(COND1)
}

/// Decrement slave invoked before increment slave; infimum minus infinity.
pub fn cond2() -> Nwa {
    nwa(COND2)
}

pub fn counter1() -> Mca {
    parse_mca(COUNTER1).expect("corpus files parse")
}

/// Every nested automaton with its stem and width.
pub fn nwa_corpus() -> Vec<(&'static str, Nwa, Option<usize>)> {
    NWA_FILES.iter().map(|&(name, text, k)| (name, nwa(text), k)).collect()
}
