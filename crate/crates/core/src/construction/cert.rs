//! Certificates: finite core maps that induce isomorphisms of the infinite trees.
//!
//! A vertex certificate for `(x, y)` maps a finite, upward closed set of addresses of `T`
//! (containing `x`) minus `x` onto such a set of `S` minus `y`. It is valid when the map is a
//! bijection preserving adjacency and piece colours, and the subtrees hanging below the two cores
//! match class by class. Those subtrees are compared by partition refinement over both
//! presentations, so a valid certificate yields an isomorphism `T - x -> S - y`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{ConstructionError, ConstructionState, Side};
use crate::presentation::analysis::StateGraph;
use crate::presentation::compiled::{Compiled, Loc, Navigator};
use crate::presentation::equiv::ClassSystem;
use crate::presentation::{Address, Presentation, PresentationError};
use crate::tree_core::canon::Labels;
use crate::tree_core::tree::{Colour, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    HypoVertex,
    HypoEdge,
    NonEmbed,
}

/// Bounds and effort of an embedding search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub depth: usize,
    pub ext_len: usize,
    pub budget: u64,
    pub nodes: u64,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertKind,
    pub x: Address,
    pub image: Address,
    /// Sorted by domain. Edge certificates include `(x, image)`.
    pub core_map: Vec<(Address, Address)>,
    pub colour_classes_matched: Vec<Colour>,
    pub search_record: Option<SearchRecord>,
}

pub type CertificateDoc = Certificate;

impl Certificate {
    pub fn to_doc(&self) -> CertificateDoc {
        self.clone()
    }

    pub fn from_doc(doc: &CertificateDoc) -> Result<Self, ConstructionError> {
        Ok(doc.clone())
    }

    pub fn lookup(&self) -> BTreeMap<&Address, &Address> {
        self.core_map.iter().map(|(a, b)| (a, b)).collect()
    }
}

/// The vertex certificate of a freshly built pair, from an id map between the two root pieces.
pub fn from_root_piece_map(x: Address, image: Address, h: &BTreeMap<VertexId, VertexId>) -> Certificate {
    let core_map = h.iter().map(|(a, b)| (Address::root_piece(*a), Address::root_piece(*b))).collect();
    Certificate { kind: CertKind::HypoVertex, x, image, core_map, colour_classes_matched: Vec::new(), search_record: None }
}

/// Address, one step later, of vertex `w` of the rule instance hanging at `a`. The instance at
/// the old root is spelled out inside the new root piece.
fn instance_vertex(a: &Address, w: VertexId, old_root: VertexId) -> Address {
    if a.0 == [old_root] {
        Address::root_piece(w)
    } else {
        a.child(w)
    }
}

/// Extends a certificate of state `prev` to `next` by matching the instances now hanging at the
/// old markers of the core.
pub fn extend(c: &Certificate, prev: &ConstructionState, next: &ConstructionState) -> Result<Certificate, ConstructionError> {
    let ct = Compiled::new(&prev.t)?;
    let mut nav = ct.navigator();
    let markers = [prev.red(), prev.blue()];
    let (rt, rs) = (prev.root(Side::T), prev.root(Side::S));
    let mut out = c.core_map.clone();
    for (a, b) in &c.core_map {
        let l = nav.locate(a)?;
        let Some(col) = nav.colour(l).filter(|c| markers.contains(c)) else { continue };
        let rule = next.t.rule_piece(col).ok_or_else(|| ConstructionError::BadState(format!("no rule for {col}")))?;
        let root = rule.tree.root().expect("rooted rule");
        for w in rule.tree.sorted_ids() {
            if w != root {
                out.push((instance_vertex(a, w, rt), instance_vertex(b, w, rs)));
            }
        }
    }
    out.sort();
    Ok(Certificate { core_map: out, colour_classes_matched: Vec::new(), ..c.clone() })
}

/// The edge certificate of a vertex certificate: the same map plus `x -> image`.
pub fn edge_certificate(c: &Certificate) -> Certificate {
    let mut core_map = c.core_map.clone();
    core_map.push((c.x.clone(), c.image.clone()));
    core_map.sort();
    Certificate { kind: CertKind::HypoEdge, core_map, ..c.clone() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertFailure {
    pub reason: String,
    /// Address (in `T`) where the mismatch was found.
    pub witness: Option<Address>,
}

impl std::fmt::Display for CertFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.witness {
            Some(w) => write!(f, "{} at {w}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

fn fail(reason: impl Into<String>, witness: Option<Address>) -> CertFailure {
    CertFailure { reason: reason.into(), witness }
}

/// Shared data for validating many certificates against one pair of presentations.
pub struct Checker<'a> {
    pub ct: Compiled<'a>,
    pub cs: Compiled<'a>,
    index_t: HashMap<(usize, usize), usize>,
    index_s: HashMap<(usize, usize), usize>,
    class_t: Vec<u32>,
    class_s: Vec<u32>,
}

impl<'a> Checker<'a> {
    pub fn new(t: &'a Presentation, s: &'a Presentation) -> Result<Self, PresentationError> {
        let ct = Compiled::new(t)?;
        let cs = Compiled::new(s)?;
        let gt = StateGraph::new(&ct);
        let gs = StateGraph::new(&cs);
        let (_, mut cls) = ClassSystem::build(&[(&ct, &gt), (&cs, &gs)], Labels::Full);
        let class_s = cls.pop().expect("two graphs");
        let class_t = cls.pop().expect("two graphs");
        let index_t = gt.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let index_s = gs.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Checker { ct, cs, index_t, index_s, class_t, class_s })
    }

    fn class(&self, side: Side, nav: &Navigator<'_, '_>, l: Loc) -> u32 {
        let key = (nav.piece_of(l), l.v as usize);
        match side {
            Side::T => self.class_t[self.index_t[&key]],
            Side::S => self.class_s[self.index_s[&key]],
        }
    }

    /// Validates a vertex or edge certificate. Colours are compared in the denoted trees, where
    /// expanded leaves are uncoloured. Returns the piece colours met in the core.
    pub fn validate(&self, c: &Certificate) -> Result<Vec<Colour>, CertFailure> {
        let edge = match c.kind {
            CertKind::HypoVertex => false,
            CertKind::HypoEdge => true,
            CertKind::NonEmbed => return Err(fail("not an isomorphism certificate", None)),
        };
        let mut nt = self.ct.navigator();
        let mut ns = self.cs.navigator();
        let bad = |a: &Address| fail("address does not resolve", Some(a.clone()));
        let x = nt.locate(&c.x).map_err(|_| bad(&c.x))?;
        let y = ns.locate(&c.image).map_err(|_| bad(&c.image))?;
        let mut map: HashMap<Loc, Loc> = HashMap::with_capacity(c.core_map.len());
        let mut range: HashSet<Loc> = HashSet::with_capacity(c.core_map.len());
        let mut names: HashMap<Loc, &Address> = HashMap::new();
        for (a, b) in &c.core_map {
            let la = nt.locate(a).map_err(|_| bad(a))?;
            let lb = ns.locate(b).map_err(|_| fail("image does not resolve", Some(a.clone())))?;
            if map.insert(la, lb).is_some() {
                return Err(fail("domain address repeated", Some(a.clone())));
            }
            if !range.insert(lb) {
                return Err(fail("image repeated", Some(a.clone())));
            }
            names.insert(la, a);
        }
        match (edge, map.get(&x)) {
            (false, Some(_)) => return Err(fail("the removed vertex is mapped", Some(c.x.clone()))),
            (true, Some(&m)) if m != y => return Err(fail("x is not mapped to its partner", Some(c.x.clone()))),
            (true, None) => return Err(fail("x is not mapped", Some(c.x.clone()))),
            _ => {}
        }
        if !edge && range.contains(&y) {
            return Err(fail("the removed partner is an image", Some(c.image.clone())));
        }
        let (cut_t, cut_s) = if edge {
            let px = nt.parent(x).ok_or_else(|| fail("the root has no edge above it", Some(c.x.clone())))?;
            let py = ns.parent(y).ok_or_else(|| fail("the partner is a root", Some(c.image.clone())))?;
            (Some((x, px)), Some((y, py)))
        } else {
            (None, None)
        };
        let in_t = |l: Loc| map.contains_key(&l) || (!edge && l == x);
        let in_s = |l: Loc| range.contains(&l) || (!edge && l == y);
        let kept = |l: Loc, w: Loc, removed: Loc, cut: Option<(Loc, Loc)>| -> bool {
            if !edge {
                return w != removed;
            }
            let (a, b) = cut.expect("edge mode");
            !((l == a && w == b) || (l == b && w == a))
        };
        let mut colours = BTreeSet::new();
        let mut entries: Vec<(Loc, Loc)> = map.iter().map(|(a, b)| (*a, *b)).collect();
        if !edge {
            entries.push((x, y));
        }
        entries.sort();
        for (la, lb) in entries {
            let here = || names.get(&la).map(|a| (*a).clone()).or_else(|| Some(c.x.clone()));
            if let Some(p) = nt.parent(la) {
                if !in_t(p) {
                    return Err(fail("core is not closed towards the root", here()));
                }
            }
            if let Some(p) = ns.parent(lb) {
                if !in_s(p) {
                    return Err(fail("image core is not closed towards the root", here()));
                }
            }
            let removed_pair = la == x && !edge;
            let (ca, cb) = (nt.colour(la), ns.colour(lb));
            if !removed_pair && ca != cb {
                return Err(fail(format!("colours differ: {ca:?} vs {cb:?}"), here()));
            }
            colours.extend(nt.piece_colour(la));
            let na: Vec<Loc> = nt.neighbours(la).into_iter().filter(|&w| kept(la, w, x, cut_t)).collect();
            let nb: Vec<Loc> = ns.neighbours(lb).into_iter().filter(|&w| kept(lb, w, y, cut_s)).collect();
            let mut out_a: Vec<u32> = Vec::new();
            let mut out_b: Vec<u32> = Vec::new();
            let mut core_a: BTreeSet<Loc> = BTreeSet::new();
            let mut core_b: BTreeSet<Loc> = BTreeSet::new();
            for w in na {
                if removed_pair {
                    if !in_t(w) {
                        out_a.push(self.class(Side::T, &nt, w));
                    }
                } else if let Some(&m) = map.get(&w) {
                    core_a.insert(m);
                } else if !in_t(w) {
                    out_a.push(self.class(Side::T, &nt, w));
                }
            }
            for w in nb {
                if range.contains(&w) {
                    if !removed_pair {
                        core_b.insert(w);
                    }
                } else if !in_s(w) {
                    out_b.push(self.class(Side::S, &ns, w));
                }
            }
            if core_a != core_b {
                return Err(fail("adjacency is not preserved", here()));
            }
            out_a.sort_unstable();
            out_b.sort_unstable();
            if out_a != out_b {
                return Err(fail("hanging subtrees differ", here()));
            }
        }
        Ok(colours.into_iter().collect())
    }
}

/// The edge above a vertex, as (vertex, parent) addresses.
pub fn edge_above(nav: &mut Navigator<'_, '_>, a: &Address) -> Result<Option<(Address, Address)>, PresentationError> {
    let l = nav.locate(a)?;
    Ok(nav.parent(l).map(|p| (a.clone(), nav.address(p))))
}

/// The edge map: `e(x) -> e(phi(x))` for every handled pair, with the edge certificates.
pub struct EdgeMap {
    pub pairs: Vec<((Address, Address), (Address, Address))>,
    pub certs: Vec<Certificate>,
}

pub fn edge_map(st: &ConstructionState) -> Result<EdgeMap, ConstructionError> {
    let ct = Compiled::new(&st.t)?;
    let cs = Compiled::new(&st.s)?;
    let (mut nt, mut ns) = (ct.navigator(), cs.navigator());
    let mut pairs = Vec::new();
    for (x, y) in &st.pairs {
        let et = edge_above(&mut nt, x)?.ok_or_else(|| ConstructionError::TargetIsRoot(x.clone()))?;
        let es = edge_above(&mut ns, y)?.ok_or_else(|| ConstructionError::TargetIsRoot(y.clone()))?;
        pairs.push((et, es));
    }
    let certs = st.certs.iter().map(edge_certificate).collect();
    Ok(EdgeMap { pairs, certs })
}
