//! Width checking over the configuration graph.

use crate::config::ConfigGraph;
use crate::error::Result;
use crate::model::{Letter, Nwa};
use crate::par::Exec;

/// Outcome of [`has_width`]; `witness` is set iff the width bound fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthCheck {
    pub holds: bool,
    /// Shortest, then lexicographically least, word after which more than `k` slaves are active.
    pub witness: Option<Vec<Letter>>,
}

/// Whether no run (accepting or not) ever has more than `k` active slaves.
pub fn has_width(nwa: &Nwa, k: usize) -> Result<WidthCheck> {
    nwa.ensure_valid()?;
    let g = ConfigGraph::explore(nwa, k, None, Exec::default())?;
    for node in 0..g.len() {
        if let Some(e) = g.edges[node].iter().find(|e| e.edge.overflow) {
            let mut word = g.access_word(node);
            word.push(e.edge.letter);
            return Ok(WidthCheck { holds: false, witness: Some(word) });
        }
    }
    Ok(WidthCheck { holds: true, witness: None })
}

/// Least `k ≤ k_max` for which [`has_width`] holds.
pub fn minimal_width(nwa: &Nwa, k_max: usize) -> Result<Option<usize>> {
    for k in 1..=k_max {
        if has_width(nwa, k)?.holds {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
