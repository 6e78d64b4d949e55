use std::collections::BTreeSet;

use crate::construction::enumeration::channel_of;
use crate::construction::{ConstructionState, Side};
use crate::presentation::compiled::Compiled;
use crate::presentation::Address;

use super::{CheckEntry, Ctx, VerifyError};

/// Denoted colour of an address, `Err` when it does not resolve.
fn marker_at(c: &Compiled<'_>, st: &ConstructionState, a: &Address) -> Result<bool, ()> {
    let mut nav = c.navigator();
    let l = nav.locate(a).map_err(|_| ())?;
    Ok(nav.colour(l).is_some_and(|col| col == st.red() || col == st.blue()))
}

pub fn check_enumeration(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger11", "enumerations extend and leave infinitely many indices free");
    let st = ctx.st;
    let en = &st.enumeration;
    for side in [Side::T, Side::S] {
        let c = Compiled::new(st.pres(side))?;
        let explicit = match side {
            Side::T => &en.t,
            Side::S => &en.s,
        };
        let distinct: BTreeSet<&Address> = explicit.values().collect();
        if distinct.len() != explicit.len() {
            return Ok(e.failed("two indices name one vertex", side.name()));
        }
        for i in 0..=u64::from(st.n) {
            let Some(a) = en.lookup(st, side, i)? else {
                return Ok(e.failed(format!("index {i} is unassigned on {}", side.name()), i.to_string()));
            };
            if c.navigator().locate(&a).is_err() {
                return Ok(e.failed(format!("{}_{i} does not resolve", side.name()), a.to_string()));
            }
        }
        if let Some(prev) = ctx.prev {
            let old = match side {
                Side::T => &prev.enumeration.t,
                Side::S => &prev.enumeration.s,
            };
            if let Some((i, _)) = old.iter().find(|(i, a)| explicit.get(i) != Some(a)) {
                return Ok(e.failed(format!("index {i} changed on {}", side.name()), i.to_string()));
            }
        }
    }
    if let Some(prev) = ctx.prev {
        if !en.channels.starts_with(&prev.enumeration.channels) {
            return Ok(e.failed("open channels changed", format!("{:?}", en.channels)));
        }
    }
    let last = en.t.keys().chain(en.s.keys()).max().copied().unwrap_or(0);
    let free = (last + 1..last + 64).filter(|i| i % 2 == 1 && channel_of(*i).is_none()).count();
    if free == 0 {
        return Ok(e.failed("no free odd index", last.to_string()));
    }
    Ok(e.proved(format!(
        "indices 0..={} assigned on both sides; explicit indices end at {last}, channels use multiples of 4, so every larger odd index stays free",
        st.n
    )))
}

pub fn check_unmarked_indices(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger12", "enumerated vertices up to n are not markers");
    let st = ctx.st;
    for side in [Side::T, Side::S] {
        let c = Compiled::new(st.pres(side))?;
        for i in 0..=u64::from(st.n) {
            let Some(a) = st.enumeration.lookup(st, side, i)? else {
                return Ok(e.failed(format!("index {i} is unassigned"), i.to_string()));
            };
            match marker_at(&c, st, &a) {
                Ok(false) => {}
                Ok(true) => return Ok(e.failed(format!("{}_{i} is a marker", side.name()), a.to_string())),
                Err(()) => return Ok(e.failed(format!("{}_{i} does not resolve", side.name()), a.to_string())),
            }
        }
    }
    Ok(e.proved(format!("t_j and s_j for j <= {}", st.n)))
}

pub fn check_handled(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger13", "handled sets grow by one pair per step and avoid markers");
    let st = ctx.st;
    let n = st.n as usize;
    if st.pairs.len() != n {
        return Ok(e.failed(format!("{} handled pairs at state {n}", st.pairs.len()), st.pairs.len().to_string()));
    }
    let xs: BTreeSet<&Address> = st.pairs.iter().map(|p| &p.0).collect();
    let ys: BTreeSet<&Address> = st.pairs.iter().map(|p| &p.1).collect();
    if xs.len() != n || ys.len() != n {
        return Ok(e.failed("handled vertices repeat", format!("{} and {}", xs.len(), ys.len())));
    }
    if let Some(prev) = ctx.prev {
        if !st.pairs.starts_with(&prev.pairs) {
            return Ok(e.failed("earlier pairs changed", format!("{:?}", prev.pairs)));
        }
    }
    for (side, sel) in [(Side::T, 0usize), (Side::S, 1)] {
        let c = Compiled::new(st.pres(side))?;
        for p in &st.pairs {
            let a = if sel == 0 { &p.0 } else { &p.1 };
            match marker_at(&c, st, a) {
                Ok(false) => {}
                Ok(true) => return Ok(e.failed("a handled vertex is a marker", a.to_string())),
                Err(()) => return Ok(e.failed("a handled vertex does not resolve", a.to_string())),
            }
        }
    }
    // t_j (j <= m) are handled by step 2m+1, s_j (j <= m) by step 2m+2.
    for m in 0..n {
        for (side, steps) in [(Side::T, 2 * m + 1), (Side::S, 2 * m + 2)] {
            if steps > n {
                continue;
            }
            let handled: BTreeSet<&Address> =
                st.pairs[..steps].iter().map(|p| if side == Side::T { &p.0 } else { &p.1 }).collect();
            for j in 0..=m as u64 {
                let Some(a) = st.enumeration.lookup(st, side, j)? else {
                    return Ok(e.failed(format!("index {j} unassigned"), j.to_string()));
                };
                if !handled.contains(&a) {
                    return Ok(e.failed(format!("{}_{j} is not handled after {steps} steps", side.name()), a.to_string()));
                }
            }
        }
    }
    Ok(e.proved(format!("|X| = |Y| = {n}, nested, disjoint from markers, enumeration coverage holds")))
}
