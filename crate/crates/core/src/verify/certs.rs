use std::collections::{BTreeSet, HashSet};

use crate::construction::cert::{edge_certificate, edge_map, CertKind, Certificate, Checker};
use crate::construction::ConstructionState;
use crate::presentation::compiled::{Compiled, Loc, Navigator};
use crate::presentation::symbolic::{core_ball_code, explicit_core_code, Removal, Truncation};
use crate::tree_core::canon::{CanonicalCode, Interner, Labels};
use crate::tree_core::tree::VertexId;

use super::{CheckEntry, Ctx, VerifyError};

/// How the depth-limited codes of `T - x` and `S - phi(x)` are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeOracle {
    /// Memoized classes of the presentation states.
    Symbolic,
    /// An explicit ball, coded from scratch.
    Explicit,
}

fn side_code(
    c: &Compiled<'_>,
    core: &[&crate::presentation::Address],
    removed_vertex: &crate::presentation::Address,
    edge: bool,
    depth: usize,
    oracle: CodeOracle,
) -> Result<CanonicalCode, VerifyError> {
    let mut nav = c.navigator();
    let mut locs: Vec<Loc> = Vec::with_capacity(core.len() + 1);
    for a in core {
        locs.push(nav.locate(a)?);
    }
    let x = nav.locate(removed_vertex)?;
    if !locs.contains(&x) {
        locs.push(x);
    }
    let removal = if edge {
        match nav.parent(x) {
            Some(p) => Removal::Edge(x, p),
            None => return Err(VerifyError::Construction(crate::construction::ConstructionError::TargetIsRoot(removed_vertex.clone()))),
        }
    } else {
        Removal::Vertex(x)
    };
    Ok(match oracle {
        CodeOracle::Symbolic => {
            let mut trunc = Truncation::new(c, Labels::Full);
            let mut int = Interner::new();
            core_ball_code(&mut nav, &mut trunc, &mut int, &locs, removal, depth)
        }
        CodeOracle::Explicit => explicit_code(&mut nav, &locs, removal, depth)?,
    })
}

fn explicit_code(nav: &mut Navigator<'_, '_>, core: &[Loc], removal: Removal, depth: usize) -> Result<CanonicalCode, VerifyError> {
    let blocked = match removal {
        Removal::Vertex(x) => Some(x),
        _ => None,
    };
    let mut e = nav.ball(core, depth, blocked);
    let id = |l: Loc, e: &crate::presentation::Expansion| e.locs.iter().position(|&m| m == l).map(|i| VertexId(i as u64));
    if let Removal::Edge(a, b) = removal {
        let (ia, ib) = (id(a, &e).expect("core vertex"), id(b, &e).expect("core vertex"));
        e.tree.remove_edge_between(ia, ib)?;
    }
    let wanted: HashSet<Loc> = core.iter().copied().filter(|&l| Some(l) != blocked).collect();
    let ids: BTreeSet<VertexId> =
        e.locs.iter().enumerate().filter(|(_, l)| wanted.contains(l)).map(|(i, _)| VertexId(i as u64)).collect();
    Ok(explicit_core_code(&e.tree, &ids, Labels::Full))
}

/// Codes of the radius-`depth` balls around the two cores after removing `x` and its image
/// (or the edges above them).
pub fn certificate_codes(
    st: &ConstructionState,
    cert: &Certificate,
    depth: usize,
    oracle: CodeOracle,
) -> Result<(CanonicalCode, CanonicalCode), VerifyError> {
    let edge = cert.kind == CertKind::HypoEdge;
    let ct = Compiled::new(&st.t)?;
    let cs = Compiled::new(&st.s)?;
    let dom: Vec<_> = cert.core_map.iter().map(|p| &p.0).collect();
    let img: Vec<_> = cert.core_map.iter().map(|p| &p.1).collect();
    let a = side_code(&ct, &dom, &cert.x, edge, depth, oracle)?;
    let b = side_code(&cs, &img, &cert.image, edge, depth, oracle)?;
    Ok((a, b))
}

fn code_depths(ctx: &Ctx<'_>) -> Vec<usize> {
    let mut d: BTreeSet<usize> = BTreeSet::new();
    if let Some(kt) = ctx.st.last_ktilde() {
        d.extend([kt, 2 * kt, 3 * kt]);
    }
    d.insert(ctx.depth);
    d.into_iter().collect()
}

fn check_family(ctx: &Ctx<'_>, certs: &[Certificate], id: &str, title: &str) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new(id, title);
    let st = ctx.st;
    if certs.len() != st.pairs.len() {
        return Ok(e.failed(format!("{} certificates for {} pairs", certs.len(), st.pairs.len()), certs.len().to_string()));
    }
    let checker = Checker::new(&st.t, &st.s)?;
    let depths = code_depths(ctx);
    for (c, (x, y)) in certs.iter().zip(&st.pairs) {
        if &c.x != x || &c.image != y {
            return Ok(e.failed("certificate does not belong to its pair", format!("{} -> {}", c.x, c.image)));
        }
        if let Err(f) = checker.validate(c) {
            return Ok(e.failed(format!("certificate for {x} does not validate: {}", f.reason), f.to_string()));
        }
        for &d in &depths {
            let (a, b) = certificate_codes(st, c, d, CodeOracle::Symbolic)?;
            if a != b {
                return Ok(e.failed(format!("codes differ for {x} at depth {d}"), format!("{x} depth {d}")));
            }
        }
    }
    let sizes: Vec<String> = certs.iter().map(|c| c.core_map.len().to_string()).collect();
    Ok(e.proved(format!(
        "{} certificates validate exactly (core sizes {}); codes agree at depths {:?}",
        certs.len(),
        if sizes.is_empty() { "none".to_string() } else { sizes.join(", ") },
        depths
    )))
}

pub fn check_hypomorphism(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    check_family(ctx, &ctx.st.certs, "hypomorphism", "T - x and S - phi(x) are isomorphic for every handled x")
}

pub fn check_edge_hypomorphism(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("edge_hypomorphism", "T - e(x) and S - e(phi(x)) are isomorphic for every handled x");
    let em = edge_map(ctx.st)?;
    let ts: BTreeSet<_> = em.pairs.iter().map(|p| &p.0).collect();
    let ss: BTreeSet<_> = em.pairs.iter().map(|p| &p.1).collect();
    if ts.len() != em.pairs.len() || ss.len() != em.pairs.len() {
        return Ok(e.failed("the edge map is not injective", format!("{:?}", em.pairs)));
    }
    for ((tx, _), (sx, _)) in &em.pairs {
        if !ctx.st.pairs.iter().any(|(x, y)| x == tx && y == sx) {
            return Ok(e.failed("edge map disagrees with phi", format!("{tx} -> {sx}")));
        }
    }
    let certs: Vec<Certificate> = ctx.st.certs.iter().map(edge_certificate).collect();
    if certs != em.certs {
        return Ok(e.failed("edge certificates are not the vertex certificates plus their pair", "edge_map"));
    }
    let inner = check_family(ctx, &certs, "edge_hypomorphism", "")?;
    Ok(CheckEntry { title: e.title, ..inner })
}

/// Certificates extend their predecessors and keep colour classes.
pub fn check_restriction(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger14", "certificates extend earlier ones and preserve marker classes");
    let st = ctx.st;
    if let Some(prev) = ctx.prev {
        if prev.certs.len() + 1 != st.certs.len() {
            return Ok(e.failed("certificate count did not grow by one", st.certs.len().to_string()));
        }
        for (old, new) in prev.certs.iter().zip(&st.certs) {
            if old.x != new.x || old.image != new.image {
                return Ok(e.failed("certificate pair changed", old.x.to_string()));
            }
            let have: HashSet<&(crate::presentation::Address, crate::presentation::Address)> = new.core_map.iter().collect();
            if let Some(p) = old.core_map.iter().find(|p| !have.contains(p)) {
                return Ok(e.failed(format!("restriction of the certificate for {} differs", old.x), format!("{} -> {}", p.0, p.1)));
            }
        }
    }
    let checker = Checker::new(&st.t, &st.s)?;
    for c in &st.certs {
        if let Err(f) = checker.validate(c) {
            return Ok(e.failed(format!("certificate for {} breaks colour classes: {}", c.x, f.reason), f.to_string()));
        }
    }
    Ok(e.proved(format!("{} certificates; restrictions equal the previous maps as data", st.certs.len())))
}
