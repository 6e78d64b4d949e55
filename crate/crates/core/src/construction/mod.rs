//! The back-and-forth construction of the two trees, one state per step.
//!
//! State `n` holds presentations of `T_n` and `S_n`. Every rule is global: colour `R{m}` always
//! expands to the part of the extended `T_m` beyond its old root, `B{m}` to the part of the
//! extended `S_m` beyond its old root, and the two markers of the current level are `R{n}`,
//! `B{n}`. The root piece of `T_{n+1}` is the extended `T_n` itself, so vertex ids and addresses
//! of earlier states stay valid.

pub mod cert;
pub mod enumeration;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::{max_bare_path_symbolic, Address, Piece, Presentation, PresentationDoc, PresentationError, SymbolicBound};
use crate::promise::{closure, PromiseError, PromiseStructure};
use crate::tree_core::binary::binary_tree;
use crate::tree_core::iso::component_of;
use crate::tree_core::tree::{ColoredTree, Colour, DirectedEdge, TreeError, VertexId};

pub use cert::{CertKind, Certificate, CertificateDoc, SearchRecord};
pub use enumeration::Enumeration;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Promise(#[from] PromiseError),
    #[error("target {0} is the root")]
    TargetIsRoot(Address),
    #[error("target {0} lies outside the root piece")]
    TargetOutsideRootPiece(Address),
    #[error("no unhandled vertex among the first {0} indices")]
    NoTarget(u32),
    #[error("bare paths of {0} are unbounded")]
    InfiniteBarePath(String),
    #[error("vertex {0} has degree {1}")]
    DegreeTooLarge(VertexId, usize),
    #[error("{0} is not a handled vertex")]
    NotHandled(Address),
    #[error("enumeration: {0}")]
    Enumeration(String),
    #[error("step {step}: {source}")]
    AtStep { step: u32, source: Box<ConstructionError> },
    #[error("malformed state: {0}")]
    BadState(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    T,
    S,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::T => Side::S,
            Side::S => Side::T,
        }
    }

    /// Marker colour of this side's root at a level.
    pub fn colour(self, level: u32) -> Colour {
        match self {
            Side::T => Colour::red(level),
            Side::S => Colour::blue(level),
        }
    }

    /// The side whose vertex is handled at step `n`.
    pub fn primary(n: u32) -> Side {
        if n % 2 == 0 {
            Side::T
        } else {
            Side::S
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::T => "T",
            Side::S => "S",
        }
    }
}

/// What one step built, kept for checks and exports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: u32,
    pub side: Side,
    pub target: Address,
    pub partner: Address,
    pub ktilde: usize,
    pub p: usize,
    /// The path through the old root of the handled side, from that root to the copied root.
    pub u_path: Vec<VertexId>,
    /// The path on the other side, from the copied root to the old root.
    pub v_path: Vec<VertexId>,
    pub new_root_t: VertexId,
    pub new_root_s: VertexId,
    /// Leaf at position `2k+5` of the u-path.
    pub g: VertexId,
    /// Leaf at position `2k+2` of the v-path.
    pub y: VertexId,
    pub d_root: VertexId,
    pub d_hat_root: VertexId,
    pub promise_edges: Vec<DirectedEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionState {
    pub n: u32,
    pub t: Presentation,
    pub s: Presentation,
    pub k: usize,
    pub b: usize,
    pub history: Vec<StepRecord>,
    /// The pairs of the partial hypomorphism, in the order they were added.
    pub pairs: Vec<(Address, Address)>,
    /// Vertex certificate of each pair.
    pub certs: Vec<Certificate>,
    pub enumeration: Enumeration,
    pub next_id: u64,
}

/// `T_n` cut at the edge above the handled vertex.
#[derive(Clone, Debug)]
pub struct Split {
    pub edge: DirectedEdge,
    /// Component holding the root, rooted there.
    pub root_side: ColoredTree,
    /// Component holding the target, rooted at it.
    pub target_side: ColoredTree,
}

/// The two extended trees, the promises on them and the map behind the new certificate.
#[derive(Clone, Debug)]
pub struct Gadgets {
    pub t_tilde: ColoredTree,
    pub s_tilde: ColoredTree,
    pub names_t: BTreeMap<VertexId, String>,
    pub names_s: BTreeMap<VertexId, String>,
    pub promises: PromiseStructure,
    /// Isomorphism from the handled side minus the target onto the other side minus the partner.
    pub h: BTreeMap<VertexId, VertexId>,
    pub record: StepRecord,
    pub next_id: u64,
}

pub const BASE_K: usize = 2;
pub const BASE_B: usize = 3;

/// Edges of the base trees on figure labels 1..=11; the root is 11.
const T0_EDGES: [(u64, u64); 10] = [(1, 5), (2, 5), (3, 6), (4, 6), (5, 7), (6, 7), (7, 8), (8, 9), (8, 10), (10, 11)];
const S0_EDGES: [(u64, u64); 10] = [(1, 5), (2, 5), (3, 6), (4, 6), (5, 7), (6, 7), (7, 8), (8, 10), (10, 9), (10, 11)];

fn base_tree(edges: &[(u64, u64)], offset: u64, root_colour: Colour) -> ColoredTree {
    let mut t = ColoredTree::with_capacity(11);
    for i in 0..11 {
        t.add_vertex(VertexId(offset + i)).expect("fresh");
    }
    for &(a, b) in edges {
        t.add_edge(VertexId(offset + a - 1), VertexId(offset + b - 1)).expect("base edge");
    }
    let root = VertexId(offset + 10);
    t.set_root(Some(root)).expect("root");
    t.set_colour(root, Some(root_colour)).expect("root");
    t
}

fn base_names(offset: u64) -> BTreeMap<VertexId, String> {
    (0..11).map(|i| (VertexId(offset + i), format!("fig{}", i + 1))).collect()
}

pub fn base_case() -> ConstructionState {
    let t0 = base_tree(&T0_EDGES, 0, Colour::red(0));
    let s0 = base_tree(&S0_EDGES, 11, Colour::blue(0));
    let mut t = Presentation::finite(t0, "T0", 0);
    t.pieces.get_mut("T0").expect("root piece").names = base_names(0);
    let mut s = Presentation::finite(s0, "S0", 0);
    s.pieces.get_mut("S0").expect("root piece").names = base_names(11);
    ConstructionState {
        n: 0,
        t,
        s,
        k: BASE_K,
        b: BASE_B,
        history: Vec::new(),
        pairs: Vec::new(),
        certs: Vec::new(),
        enumeration: Enumeration::base(),
        next_id: 22,
    }
}

impl ConstructionState {
    pub fn pres(&self, side: Side) -> &Presentation {
        match side {
            Side::T => &self.t,
            Side::S => &self.s,
        }
    }

    pub fn root(&self, side: Side) -> VertexId {
        self.pres(side).root_vertex()
    }

    pub fn red(&self) -> Colour {
        Colour::red(self.n)
    }

    pub fn blue(&self) -> Colour {
        Colour::blue(self.n)
    }

    pub fn x(&self) -> Vec<Address> {
        self.pairs.iter().map(|p| p.0.clone()).collect()
    }

    pub fn y(&self) -> Vec<Address> {
        self.pairs.iter().map(|p| p.1.clone()).collect()
    }

    pub fn phi(&self, x: &Address) -> Option<&Address> {
        self.pairs.iter().find(|p| &p.0 == x).map(|p| &p.1)
    }

    /// Handled vertices of one side.
    pub fn handled(&self, side: Side) -> Vec<Address> {
        match side {
            Side::T => self.x(),
            Side::S => self.y(),
        }
    }

    pub fn k_at(&self, m: u32) -> usize {
        if m == 0 {
            BASE_K
        } else {
            2 * self.history[m as usize - 1].ktilde + 3
        }
    }

    pub fn b_at(&self, m: u32) -> usize {
        BASE_B + 3 * m as usize
    }

    /// The last `ktilde`, if any step was taken.
    pub fn last_ktilde(&self) -> Option<usize> {
        self.history.last().map(|r| r.ktilde)
    }

    /// The presentation of one side as it was at an earlier state `level`.
    pub fn restricted(&self, side: Side, level: u32) -> Result<Presentation, ConstructionError> {
        if level > self.n {
            return Err(ConstructionError::BadState(format!("no level {level} at state {}", self.n)));
        }
        let mut pres = self.pres(side).clone();
        let mut tree = pres.root_piece().tree.clone();
        let mut names = pres.root_piece().names.clone();
        for m in (level..self.n).rev() {
            let c = side.colour(m);
            let rule = pres.rule_piece(c).ok_or_else(|| ConstructionError::BadState(format!("no rule for {c}")))?;
            let old_root = rule.tree.root().expect("rooted rule");
            let drop: BTreeSet<VertexId> = rule.tree.ids().iter().copied().filter(|&v| v != old_root).collect();
            let keep: Vec<bool> = tree.ids().iter().map(|v| !drop.contains(v)).collect();
            let parts = tree.induced_components(&keep);
            tree = parts
                .into_iter()
                .find(|p| p.contains(old_root))
                .ok_or_else(|| ConstructionError::BadState(format!("old root {old_root} missing")))?;
            tree.set_root(Some(old_root))?;
            tree.set_colour(old_root, Some(c))?;
            names.retain(|v, _| tree.contains(*v));
        }
        pres.rules.retain(|c, _| c.level() < level);
        let keep_pieces: BTreeSet<String> = pres.rules.values().cloned().collect();
        pres.pieces.retain(|n, _| keep_pieces.contains(n));
        let name = format!("{}{level}", side.name());
        let mut piece = Piece::new(tree, name.clone());
        piece.names = names;
        pres.pieces.insert(name.clone(), piece);
        pres.root = name;
        pres.level = level;
        pres.validate()?;
        Ok(pres)
    }
}

/// The handled side and vertex for the next step: the least enumeration index whose vertex is
/// not yet handled.
pub fn select_target(st: &ConstructionState) -> Result<(Side, Address), ConstructionError> {
    let side = Side::primary(st.n);
    let handled: BTreeSet<Address> = st.handled(side).into_iter().collect();
    for i in 0..=u64::from(st.n) {
        if let Some(a) = st.enumeration.lookup(st, side, i)? {
            if !handled.contains(&a) {
                return Ok((side, a));
            }
        }
    }
    Err(ConstructionError::NoTarget(st.n + 1))
}

/// The neighbour of `v` towards the root of a rooted tree.
pub fn parent_in(t: &ColoredTree, v: VertexId) -> Option<VertexId> {
    let r = t.root_idx()?;
    let (_, parent) = t.bfs(r, None);
    let i = t.idx(v)?;
    (parent[i] != usize::MAX).then(|| t.id(parent[i]))
}

pub fn split_at(st: &ConstructionState, side: Side, v: &Address) -> Result<Split, ConstructionError> {
    if v.hops() != 1 {
        return Err(ConstructionError::TargetOutsideRootPiece(v.clone()));
    }
    let t = &st.pres(side).root_piece().tree;
    let id = v.last();
    if !t.contains(id) {
        return Err(ConstructionError::TargetOutsideRootPiece(v.clone()));
    }
    let par = parent_in(t, id).ok_or_else(|| ConstructionError::TargetIsRoot(v.clone()))?;
    let edge = DirectedEdge::new(id, par);
    let root_side = component_of(t, edge)?.rerooted(st.root(side))?;
    let target_side = component_of(t, edge.reversed())?;
    Ok(Split { edge, root_side, target_side })
}

fn with_root_piece(p: &Presentation, tree: ColoredTree, name: &str) -> Presentation {
    let mut q = p.clone();
    q.pieces.insert(name.to_string(), Piece::new(tree, name));
    q.root = name.to_string();
    q
}

/// Twice the longest bare path among both trees and the two parts of the split.
pub fn compute_ktilde(st: &ConstructionState, side: Side, split: &Split) -> Result<usize, ConstructionError> {
    let p = st.pres(side);
    let candidates = [
        ("T", st.t.clone()),
        ("S", st.s.clone()),
        ("root side", with_root_piece(p, split.root_side.clone(), "root side")),
        ("target side", with_root_piece(p, split.target_side.clone(), "target side")),
    ];
    let mut best = 0;
    for (name, pres) in candidates {
        match max_bare_path_symbolic(&pres)? {
            SymbolicBound::Finite(k) => best = best.max(k),
            SymbolicBound::Infinite => return Err(ConstructionError::InfiniteBarePath(name.to_string())),
        }
    }
    Ok(2 * best)
}

struct Ids(u64);

impl Ids {
    fn fresh(&mut self) -> VertexId {
        self.0 += 1;
        VertexId(self.0 - 1)
    }
}

/// Copies `src` into `dst` under fresh ids, in increasing id order. Returns the id map.
fn copy_into(dst: &mut ColoredTree, src: &ColoredTree, ids: &mut Ids) -> Result<BTreeMap<VertexId, VertexId>, TreeError> {
    let map: BTreeMap<VertexId, VertexId> = src.sorted_ids().into_iter().map(|v| (v, ids.fresh())).collect();
    for (&v, &w) in &map {
        dst.add_vertex(w)?;
        dst.set_colour(w, src.colour(v))?;
    }
    for (a, b) in src.edges() {
        dst.add_edge(map[&a], map[&b])?;
    }
    Ok(map)
}

fn leaf(t: &mut ColoredTree, at: VertexId, colour: Option<Colour>, ids: &mut Ids) -> Result<VertexId, TreeError> {
    let v = ids.fresh();
    t.add_vertex(v)?;
    t.add_edge(at, v)?;
    t.set_colour(v, colour)?;
    Ok(v)
}

/// Joins `from` to `to` by a path of `len` edges; returns all its vertices.
fn path(t: &mut ColoredTree, from: VertexId, to: VertexId, len: usize, ids: &mut Ids) -> Result<Vec<VertexId>, TreeError> {
    let mut out = vec![from];
    for _ in 1..len {
        let v = ids.fresh();
        t.add_vertex(v)?;
        out.push(v);
    }
    out.push(to);
    for w in out.windows(2) {
        t.add_edge(w[0], w[1])?;
    }
    Ok(out)
}

fn hang_binary(t: &mut ColoredTree, at: VertexId, height: u32, ids: &mut Ids) -> Result<VertexId, TreeError> {
    let first = ids.0;
    let d = binary_tree(height, first);
    ids.0 += d.len() as u64;
    for &v in d.ids() {
        t.add_vertex(v)?;
    }
    for (a, b) in d.edges() {
        t.add_edge(a, b)?;
    }
    t.add_edge(at, VertexId(first))?;
    Ok(VertexId(first))
}

fn check_degrees(t: &ColoredTree) -> Result<(), ConstructionError> {
    for &v in t.ids() {
        if t.degree(v) > 3 {
            return Err(ConstructionError::DegreeTooLarge(v, t.degree(v)));
        }
    }
    Ok(())
}

/// Builds both extended trees. The handled side gets the long path ending in a copy of the
/// other tree; the other side gets the twisted path holding copies of the two parts of the split.
pub fn build_gadgets(st: &ConstructionState, side: Side, split: &Split, ktilde: usize) -> Result<Gadgets, ConstructionError> {
    let n = st.n;
    let k = ktilde;
    let p = 4 * (k + 1) + 3;
    let (pp, qp) = (st.pres(side), st.pres(side.other()));
    let (rp, rq) = (pp.root_vertex(), qp.root_vertex());
    let pcol = side.colour(n + 1);
    let qcol = side.other().colour(n + 1);
    let height = (st.b + 3) as u32;
    let v = split.edge.tail;
    let mut ids = Ids(st.next_id);
    let (pn, qn) = (side.name(), side.other().name());

    // The handled side.
    let mut a = pp.root_piece().tree.clone();
    let mut names_a = pp.root_piece().names.clone();
    a.set_colour(rp, None)?;
    let qmap = copy_into(&mut a, &qp.root_piece().tree, &mut ids)?;
    a.set_colour(qmap[&rq], None)?;
    let u = path(&mut a, rp, qmap[&rq], p, &mut ids)?;
    let extra_a0 = leaf(&mut a, u[0], None, &mut ids)?;
    let extra_ap = leaf(&mut a, u[p], None, &mut ids)?;
    let new_root_a = leaf(&mut a, u[2 * k + 2], Some(pcol), &mut ids)?;
    let g = leaf(&mut a, u[2 * k + 5], Some(qcol), &mut ids)?;
    let d_root = hang_binary(&mut a, u[2 * k + 3], height, &mut ids)?;
    a.set_root(Some(new_root_a))?;
    for (i, &w) in u.iter().enumerate() {
        names_a.insert(w, format!("u{i}"));
    }
    names_a.insert(qmap[&rq], format!("u{p} = root of copy of {qn}{n}"));
    names_a.insert(new_root_a, format!("root of {pn}{}", n + 1));
    names_a.insert(g, "g".into());
    names_a.insert(d_root, format!("root of D{n}"));
    names_a.insert(extra_a0, "extra leaf at u0".into());
    names_a.insert(extra_ap, format!("extra leaf at u{p}"));

    // The other side.
    let mut b = qp.root_piece().tree.clone();
    let mut names_b = qp.root_piece().names.clone();
    b.set_colour(rq, None)?;
    let rmap = copy_into(&mut b, &split.root_side, &mut ids)?;
    b.set_colour(rmap[&rp], None)?;
    let vmap = copy_into(&mut b, &split.target_side, &mut ids)?;
    let vpath_rev = path(&mut b, rq, rmap[&rp], p, &mut ids)?;
    let vp: Vec<VertexId> = vpath_rev.into_iter().rev().collect();
    let extra_b0 = leaf(&mut b, vp[0], None, &mut ids)?;
    let extra_bp = leaf(&mut b, vp[p], None, &mut ids)?;
    let v_hat = vmap[&v];
    b.add_edge(v_hat, vp[k + 1])?;
    let y = leaf(&mut b, vp[2 * k + 2], Some(pcol), &mut ids)?;
    let new_root_b = leaf(&mut b, vp[2 * k + 5], Some(qcol), &mut ids)?;
    let d_hat_root = hang_binary(&mut b, vp[2 * k + 3], height, &mut ids)?;
    b.set_root(Some(new_root_b))?;
    for (i, &w) in vp.iter().enumerate() {
        names_b.insert(w, format!("v{i}"));
    }
    names_b.insert(vp[0], format!("v0 = root of copy of {pn}{n}(r)"));
    names_b.insert(v_hat, "copy of the handled vertex".into());
    names_b.insert(new_root_b, format!("root of {qn}{}", n + 1));
    names_b.insert(y, "y".into());
    names_b.insert(d_hat_root, format!("root of copy of D{n}"));
    names_b.insert(extra_b0, "extra leaf at v0".into());
    names_b.insert(extra_bp, format!("extra leaf at v{p}"));

    check_degrees(&a)?;
    check_degrees(&b)?;

    let mut h: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for &w in split.root_side.ids() {
        h.insert(w, rmap[&w]);
    }
    for &w in split.target_side.ids() {
        if w != v {
            h.insert(w, vmap[&w]);
        }
    }
    for &w in qp.root_piece().tree.ids() {
        h.insert(qmap[&w], w);
    }
    for i in 1..p {
        h.insert(u[i], vp[i]);
    }
    h.insert(extra_a0, extra_b0);
    h.insert(extra_ap, extra_bp);
    h.insert(new_root_a, y);
    h.insert(g, new_root_b);
    let dsize = (1u64 << height) - 1;
    for i in 0..dsize {
        h.insert(VertexId(d_root.0 + i), VertexId(d_hat_root.0 + i));
    }

    let (t_tilde, s_tilde, names_t, names_s) = match side {
        Side::T => (a, b, names_a, names_b),
        Side::S => (b, a, names_b, names_a),
    };
    let (rt, rs) = (st.root(Side::T), st.root(Side::S));
    let p1 = root_edge(&st.t.root_piece().tree, rt, &t_tilde)?;
    let p2 = root_edge(&st.s.root_piece().tree, rs, &s_tilde)?;
    let new_root_t = t_tilde.root().expect("rooted");
    let new_root_s = s_tilde.root().expect("rooted");
    let p3 = DirectedEdge::new(t_tilde.neighbours(new_root_t)[0], new_root_t);
    let p4 = DirectedEdge::new(s_tilde.neighbours(new_root_s)[0], new_root_s);

    let mut ps = PromiseStructure::bare(vec![t_tilde.clone(), s_tilde.clone()], n);
    ps.names = vec![format!("T{}", n + 1), format!("S{}", n + 1)];
    let coloured = |c: Colour| -> BTreeSet<VertexId> { t_tilde.coloured(c).into_iter().chain(s_tilde.coloured(c)).collect() };
    ps.add_promise(p1, coloured(Colour::red(n)), Colour::red(n), &format!("beyond the root of T{n}"));
    ps.add_promise(p2, coloured(Colour::blue(n)), Colour::blue(n), &format!("beyond the root of S{n}"));
    ps.add_promise(p3, coloured(Colour::red(n + 1)), Colour::red(n + 1), &format!("root of T{}", n + 1));
    ps.add_promise(p4, coloured(Colour::blue(n + 1)), Colour::blue(n + 1), &format!("root of S{}", n + 1));
    for (c, name) in &st.t.rules {
        ps.inherited_rules.insert(*c, name.clone());
        ps.inherited.insert(name.clone(), st.t.pieces[name].clone());
    }

    let target = Address::root_piece(v);
    let partner = Address::root_piece(v_hat);
    let record = StepRecord {
        n,
        side,
        target,
        partner,
        ktilde,
        p,
        u_path: u,
        v_path: vp,
        new_root_t,
        new_root_s,
        g,
        y,
        d_root,
        d_hat_root,
        promise_edges: vec![p1, p2, p3, p4],
    };
    Ok(Gadgets { t_tilde, s_tilde, names_t, names_s, promises: ps, h, record, next_id: ids.0 })
}

/// The edge of the old tree pointing at its root leaf `r`, which must survive in `new`.
fn root_edge(old: &ColoredTree, r: VertexId, new: &ColoredTree) -> Result<DirectedEdge, ConstructionError> {
    let e = match old.neighbours(r).as_slice() {
        [w] => DirectedEdge::new(*w, r),
        _ => return Err(ConstructionError::BadState(format!("root {r} is not a leaf"))),
    };
    if !new.has_edge(e.tail, e.head) {
        return Err(ConstructionError::BadState(format!("edge {}-{} lost", e.tail, e.head)));
    }
    Ok(e)
}

/// One step of the construction.
pub fn step(st: &ConstructionState) -> Result<ConstructionState, ConstructionError> {
    step_inner(st).map_err(|e| ConstructionError::AtStep { step: st.n, source: Box::new(e) })
}

/// The handled side, `ktilde` and gadgets of the step taken from `st`.
pub fn gadgets_for(st: &ConstructionState) -> Result<(Side, usize, Gadgets), ConstructionError> {
    let (side, v) = select_target(st)?;
    let split = split_at(st, side, &v)?;
    let ktilde = compute_ktilde(st, side, &split)?;
    let gadgets = build_gadgets(st, side, &split, ktilde)?;
    Ok((side, ktilde, gadgets))
}

fn step_inner(st: &ConstructionState) -> Result<ConstructionState, ConstructionError> {
    let (side, ktilde, gadgets) = gadgets_for(st)?;
    let cr = closure(&gadgets.promises)?;
    let mut comps = cr.components.into_iter();
    let mut t = comps.next().expect("two components");
    let mut s = comps.next().expect("two components");
    attach_names(&mut t, &gadgets.names_t, &gadgets.names_s);
    attach_names(&mut s, &gadgets.names_t, &gadgets.names_s);
    let n = st.n + 1;
    let mut next = ConstructionState {
        n,
        t,
        s,
        k: 2 * ktilde + 3,
        b: st.b + 3,
        history: st.history.clone(),
        pairs: st.pairs.clone(),
        certs: Vec::new(),
        enumeration: st.enumeration.clone(),
        next_id: gadgets.next_id,
    };
    next.history.push(gadgets.record.clone());
    let rec = &gadgets.record;
    let new_pair = match side {
        Side::T => (rec.target.clone(), rec.partner.clone()),
        Side::S => (rec.partner.clone(), rec.target.clone()),
    };
    next.pairs.push(new_pair.clone());
    for c in &st.certs {
        next.certs.push(cert::extend(c, st, &next)?);
    }
    let h: BTreeMap<VertexId, VertexId> = match side {
        Side::T => gadgets.h.clone(),
        Side::S => gadgets.h.iter().map(|(a, b)| (*b, *a)).collect(),
    };
    next.certs.push(cert::from_root_piece_map(new_pair.0, new_pair.1, &h));
    let mut e = next.enumeration.clone();
    e.extend(&next)?;
    next.enumeration = e;
    Ok(next)
}

/// Copies vertex names of the extended trees into every piece that holds those vertices.
fn attach_names(p: &mut Presentation, a: &BTreeMap<VertexId, String>, b: &BTreeMap<VertexId, String>) {
    let level = p.level;
    for (name, piece) in p.pieces.iter_mut() {
        let fresh = name == &p.root || (piece.names.is_empty() && rule_level(name) == Some(level - 1));
        if !fresh {
            continue;
        }
        for (v, s) in a.iter().chain(b) {
            if piece.tree.contains(*v) {
                piece.names.insert(*v, s.clone());
            }
        }
    }
}

fn rule_level(piece_name: &str) -> Option<u32> {
    let c: Colour = piece_name.strip_prefix("rule ")?.parse().ok()?;
    Some(c.level())
}

/// Runs `steps` steps from the base case, returning every state.
pub fn build(steps: u32) -> Result<Vec<ConstructionState>, ConstructionError> {
    let mut out = vec![base_case()];
    for _ in 0..steps {
        let next = step(out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDoc {
    pub n: u32,
    pub k: usize,
    pub b: usize,
    pub red: Colour,
    pub blue: Colour,
    pub roots: [Address; 2],
    pub t: PresentationDoc,
    pub s: PresentationDoc,
    pub history: Vec<StepRecord>,
    pub x: Vec<Address>,
    pub y: Vec<Address>,
    pub certs: Vec<CertificateDoc>,
    pub enumeration: Enumeration,
    pub next_id: u64,
}

impl ConstructionState {
    pub fn to_doc(&self) -> StateDoc {
        StateDoc {
            n: self.n,
            k: self.k,
            b: self.b,
            red: self.red(),
            blue: self.blue(),
            roots: [Address::root_piece(self.root(Side::T)), Address::root_piece(self.root(Side::S))],
            t: self.t.to_doc(),
            s: self.s.to_doc(),
            history: self.history.clone(),
            x: self.x(),
            y: self.y(),
            certs: self.certs.iter().map(Certificate::to_doc).collect(),
            enumeration: self.enumeration.clone(),
            next_id: self.next_id,
        }
    }

    pub fn from_doc(doc: &StateDoc) -> Result<Self, ConstructionError> {
        if doc.x.len() != doc.y.len() || doc.certs.len() != doc.x.len() {
            return Err(ConstructionError::BadState("pair and certificate counts differ".into()));
        }
        let st = ConstructionState {
            n: doc.n,
            t: Presentation::from_doc(&doc.t)?,
            s: Presentation::from_doc(&doc.s)?,
            k: doc.k,
            b: doc.b,
            history: doc.history.clone(),
            pairs: doc.x.iter().cloned().zip(doc.y.iter().cloned()).collect(),
            certs: doc.certs.iter().map(Certificate::from_doc).collect::<Result<_, _>>()?,
            enumeration: doc.enumeration.clone(),
            next_id: doc.next_id,
        };
        if st.history.len() != st.n as usize {
            return Err(ConstructionError::BadState("history length differs from the step index".into()));
        }
        Ok(st)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, ConstructionError> {
        let doc: StateDoc = serde_json::from_str(s).map_err(|e| ConstructionError::BadState(e.to_string()))?;
        Self::from_doc(&doc)
    }
}
