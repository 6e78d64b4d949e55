//! Enumerations `t_0, t_1, ...` and `s_0, s_1, ...` of the vertices of the final trees.
//!
//! Indices 0..=10 are the vertices of the base trees. Level `l >= 1` owns the indices
//! `2^(l+1) * odd` above `max(10, l)`; the `q`-th of them names the `q`-th vertex that first
//! appears at level `l`, in breadth-first order of the level-`l` tree. At state `n > 10` index `n`,
//! when nobody owns it yet, is given to the first new unmarked vertex of that level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ConstructionError, ConstructionState, Side};
use crate::presentation::compiled::Compiled;
use crate::presentation::Address;
use crate::tree_core::tree::VertexId;

/// Upper bound on vertices scanned while looking up one channel vertex.
pub const SCAN_LIMIT: usize = 2_000_000;

const BASE_LEN: u64 = 11;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    pub t: BTreeMap<u64, Address>,
    pub s: BTreeMap<u64, Address>,
    /// Levels whose channels are open.
    pub channels: Vec<u32>,
}

pub fn channel_of(index: u64) -> Option<u32> {
    if index == 0 {
        return None;
    }
    let tz = index.trailing_zeros();
    if tz < 2 {
        return None;
    }
    let l = tz - 1;
    (index > channel_floor(l)).then_some(l)
}

fn channel_floor(l: u32) -> u64 {
    u64::from(l).max(BASE_LEN - 1)
}

fn first_odd(l: u32) -> u64 {
    let m = 1u64 << (l + 1);
    let o = channel_floor(l) / m + 1;
    if o % 2 == 1 {
        o
    } else {
        o + 1
    }
}

/// Position of `index` inside its channel.
pub fn channel_position(index: u64) -> Option<(u32, usize)> {
    let l = channel_of(index)?;
    let o = index >> (l + 1);
    Some((l, ((o - first_odd(l)) / 2) as usize))
}

pub fn channel_index(l: u32, q: usize) -> u64 {
    (first_odd(l) + 2 * q as u64) << (l + 1)
}

impl Enumeration {
    pub fn base() -> Self {
        Enumeration {
            t: (0..BASE_LEN).map(|j| (j, Address::root_piece(VertexId(j)))).collect(),
            s: (0..BASE_LEN).map(|j| (j, Address::root_piece(VertexId(BASE_LEN + j)))).collect(),
            channels: Vec::new(),
        }
    }

    fn explicit(&self, side: Side) -> &BTreeMap<u64, Address> {
        match side {
            Side::T => &self.t,
            Side::S => &self.s,
        }
    }

    /// The vertex of index `index` on `side`, if it is determined at state `st`.
    pub fn lookup(&self, st: &ConstructionState, side: Side, index: u64) -> Result<Option<Address>, ConstructionError> {
        if let Some(a) = self.explicit(side).get(&index) {
            return Ok(Some(a.clone()));
        }
        match channel_position(index) {
            Some((l, q)) if self.channels.contains(&l) => channel_vertex(st, side, l, q, self.explicit(side).get(&u64::from(l))),
            _ => Ok(None),
        }
    }

    /// Records the new state: opens its channel and fills index `n` when it is still free.
    pub fn extend(&mut self, st: &ConstructionState) -> Result<(), ConstructionError> {
        let n = st.n;
        if !self.channels.contains(&n) {
            self.channels.push(n);
        }
        if u64::from(n) < BASE_LEN {
            return Ok(());
        }
        for side in [Side::T, Side::S] {
            if self.lookup(st, side, u64::from(n))?.is_some() {
                continue;
            }
            let a = first_new_unmarked(st, side, n)?;
            match side {
                Side::T => self.t.insert(u64::from(n), a),
                Side::S => self.s.insert(u64::from(n), a),
            };
        }
        Ok(())
    }
}

/// Vertices of `side` that first appear at level `l`, in breadth-first order, skipping `skip`.
fn new_vertices<F>(st: &ConstructionState, side: Side, l: u32, mut visit: F) -> Result<(), ConstructionError>
where
    F: FnMut(&Address, bool) -> bool,
{
    if l == 0 {
        return Err(ConstructionError::Enumeration("level 0 has no channel".into()));
    }
    let cur = st.restricted(side, l)?;
    let old = st.restricted(side, l - 1)?;
    let cc = Compiled::new(&cur)?;
    let co = Compiled::new(&old)?;
    let mut nav_cur = cc.navigator();
    let mut nav_old = co.navigator();
    let markers = [side.colour(l)];
    for (i, a) in cc.vertex_iter().enumerate() {
        if i >= SCAN_LIMIT {
            return Err(ConstructionError::Enumeration(format!("scan limit reached at level {l}")));
        }
        if nav_old.locate(&a).is_ok() {
            continue;
        }
        let loc = nav_cur.locate(&a)?;
        let marked = nav_cur.colour(loc).is_some_and(|c| markers.contains(&c));
        if !visit(&a, marked) {
            return Ok(());
        }
    }
    Ok(())
}

fn channel_vertex(st: &ConstructionState, side: Side, l: u32, q: usize, skip: Option<&Address>) -> Result<Option<Address>, ConstructionError> {
    let mut count = 0;
    let mut found = None;
    new_vertices(st, side, l, |a, _| {
        if Some(a) == skip {
            return true;
        }
        if count == q {
            found = Some(a.clone());
            return false;
        }
        count += 1;
        true
    })?;
    Ok(found)
}

fn first_new_unmarked(st: &ConstructionState, side: Side, l: u32) -> Result<Address, ConstructionError> {
    let mut found = None;
    new_vertices(st, side, l, |a, marked| {
        if marked {
            return true;
        }
        found = Some(a.clone());
        false
    })?;
    found.ok_or_else(|| ConstructionError::Enumeration(format!("level {l} has no new vertex")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channels_partition_large_indices() {
        for i in 0..4096u64 {
            if let Some((l, q)) = channel_position(i) {
                assert_eq!(channel_index(l, q), i);
            }
        }
        for l in 1..8 {
            let mut prev = 0;
            for q in 0..50 {
                let i = channel_index(l, q);
                assert!(i > channel_floor(l) && i > prev);
                assert_eq!(channel_position(i), Some((l, q)));
                prev = i;
            }
        }
        assert_eq!(channel_of(3), None);
        assert_eq!(channel_of(8), None);
        assert_eq!(channel_of(12), Some(1));
    }
}
