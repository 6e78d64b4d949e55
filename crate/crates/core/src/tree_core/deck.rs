use std::collections::BTreeMap;

use super::canon::{CanonicalCode, Labels};
use super::iso::forest_code;
use super::tree::{ColoredTree, TreeError, VertexId};

/// Colour-blind code of the card `t - v`.
pub fn card_code(t: &ColoredTree, v: VertexId) -> Result<CanonicalCode, TreeError> {
    Ok(forest_code(&t.remove_vertex(v)?, Labels::Blind))
}

/// A bijection `phi` with `a - v ≅ b - phi(v)` for every vertex `v`, found by matching the
/// two decks card by card. Colours are ignored.
pub fn deck_compare(a: &ColoredTree, b: &ColoredTree) -> Result<Option<BTreeMap<VertexId, VertexId>>, TreeError> {
    if a.len() != b.len() {
        return Err(TreeError::SizeMismatch(a.len(), b.len()));
    }
    let deck = |t: &ColoredTree| -> Result<Vec<(CanonicalCode, VertexId)>, TreeError> {
        let mut d = t.sorted_ids().into_iter().map(|v| Ok((card_code(t, v)?, v))).collect::<Result<Vec<_>, TreeError>>()?;
        d.sort();
        Ok(d)
    };
    let (da, db) = (deck(a)?, deck(b)?);
    if da.iter().zip(&db).any(|(x, y)| x.0 != y.0) {
        return Ok(None);
    }
    Ok(Some(da.into_iter().zip(db).map(|(x, y)| (x.1, y.1)).collect()))
}
