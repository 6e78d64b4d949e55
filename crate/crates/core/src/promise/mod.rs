//! Promise structures on finite forests and their closures.
//!
//! A promise `i` is a directed edge `p_i` together with a set `L_i` of leaves carrying colour
//! `c_i`. The closure glues a copy of the far side of `p_i` at every leaf of `L_i`, forever.
//! It is returned as one presentation per component: colour `c_i` gets the far side of `p_i` as
//! its rule, unless that far side is a single promise leaf, in which case `c_i` stays a marker.
//! The forest may also carry leaves of colours that already have rules (`inherited_rules`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::compiled::Compiled;
use crate::presentation::equiv::presentations_equivalent_with;
use crate::presentation::symbolic::Truncation;
use crate::presentation::{Piece, Presentation, PresentationError};
use crate::tree_core::canon::{canonical_code, Interner, Labels};
use crate::tree_core::iso::component_of;
use crate::tree_core::tree::{ColoredTree, Colour, DirectedEdge, TreeDoc, TreeError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromiseError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("promise {0}: {1} is not a leaf of the forest")]
    NotALeaf(usize, VertexId),
    #[error("vertex {0} is a promise leaf of two promises")]
    Overlap(VertexId),
    #[error("promise {0}: {1}->{2} is not an edge of the forest")]
    BadEdge(usize, VertexId, VertexId),
    #[error("promise {0} is unproductive: its far side is a single vertex outside its leaf set")]
    Unproductive(usize),
    #[error("vertex {0}: colour does not match its promise leaf set")]
    ColourMismatch(VertexId),
    #[error("vertex {0} occurs in two components")]
    DuplicateVertex(VertexId),
    #[error("promise {0} does not exist")]
    NoSuchPromise(usize),
    #[error("the smaller forest is not a subgraph: {0}")]
    NotSubgraph(String),
    #[error("exact and expansion checks disagree on promise {0} at leaf {1}")]
    SelfCheck(usize, VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromiseStructure {
    /// Rooted components. Vertex ids are unique across the forest.
    pub forest: Vec<ColoredTree>,
    pub names: Vec<String>,
    pub promise_edges: Vec<DirectedEdge>,
    pub leaf_sets: Vec<BTreeSet<VertexId>>,
    /// Colour carried by the leaves of each promise.
    pub colours: Vec<Colour>,
    /// Provenance of each promise's far side.
    pub labels: Vec<String>,
    pub inherited: BTreeMap<String, Piece>,
    pub inherited_rules: BTreeMap<Colour, String>,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    /// One presentation per forest component, in forest order.
    pub components: Vec<Presentation>,
    /// The placeholder promises; their leaf sets list the members found in the root pieces.
    pub closure_promises: PromiseStructure,
}

impl PromiseStructure {
    /// A structure without promises or inherited rules.
    pub fn bare(forest: Vec<ColoredTree>, level: u32) -> Self {
        let names = (0..forest.len()).map(|i| format!("G{i}")).collect();
        PromiseStructure {
            forest,
            names,
            promise_edges: Vec::new(),
            leaf_sets: Vec::new(),
            colours: Vec::new(),
            labels: Vec::new(),
            inherited: BTreeMap::new(),
            inherited_rules: BTreeMap::new(),
            level,
        }
    }

    pub fn add_promise(&mut self, edge: DirectedEdge, leaves: BTreeSet<VertexId>, colour: Colour, label: &str) -> usize {
        self.promise_edges.push(edge);
        self.leaf_sets.push(leaves);
        self.colours.push(colour);
        self.labels.push(label.to_string());
        self.promise_edges.len() - 1
    }

    pub fn len(&self) -> usize {
        self.promise_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.promise_edges.is_empty()
    }

    /// Index of the component containing `v`.
    pub fn component(&self, v: VertexId) -> Option<usize> {
        self.forest.iter().position(|t| t.contains(v))
    }

    /// The far side of promise `i`, rooted at the head of its edge.
    pub fn far_side(&self, i: usize) -> Result<ColoredTree, PromiseError> {
        let e = *self.promise_edges.get(i).ok_or(PromiseError::NoSuchPromise(i))?;
        let c = self.component(e.head).ok_or(PromiseError::BadEdge(i, e.tail, e.head))?;
        if !self.forest[c].has_edge(e.tail, e.head) {
            return Err(PromiseError::BadEdge(i, e.tail, e.head));
        }
        Ok(component_of(&self.forest[c], e)?)
    }

    pub fn validate(&self) -> Result<(), PromiseError> {
        let mut seen = BTreeSet::new();
        for t in &self.forest {
            t.validate()?;
            for &v in t.ids() {
                if !seen.insert(v) {
                    return Err(PromiseError::DuplicateVertex(v));
                }
            }
        }
        let mut owner: HashMap<VertexId, usize> = HashMap::new();
        for (i, set) in self.leaf_sets.iter().enumerate() {
            self.far_side(i)?;
            for &l in set {
                let c = self.component(l).ok_or(PromiseError::NotALeaf(i, l))?;
                if self.forest[c].degree(l) != 1 {
                    return Err(PromiseError::NotALeaf(i, l));
                }
                if owner.insert(l, i).is_some() {
                    return Err(PromiseError::Overlap(l));
                }
            }
        }
        let colour_owner: HashMap<Colour, usize> = self.colours.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        for t in &self.forest {
            for (v, c) in t.colours() {
                match colour_owner.get(&c) {
                    Some(&i) if owner.get(&v) != Some(&i) => return Err(PromiseError::ColourMismatch(v)),
                    None if owner.contains_key(&v) => return Err(PromiseError::ColourMismatch(v)),
                    _ => {}
                }
            }
        }
        for (&l, &i) in &owner {
            let c = self.component(l).expect("checked");
            if self.forest[c].colour(l) != Some(self.colours[i]) {
                return Err(PromiseError::ColourMismatch(l));
            }
        }
        Ok(())
    }

    /// The far side of `p_i` is a single vertex that is itself a leaf of `L_i`.
    pub fn is_placeholder(&self, i: usize) -> Result<bool, PromiseError> {
        let side = self.far_side(i)?;
        Ok(side.len() == 1 && self.leaf_sets[i].contains(&side.id(0)))
    }

    pub fn rule_piece_name(c: Colour) -> String {
        format!("rule {c}")
    }

    pub fn to_doc(&self) -> PromiseDoc {
        PromiseDoc {
            forest: self.forest.iter().map(ColoredTree::to_doc).collect(),
            names: self.names.clone(),
            promises: (0..self.len())
                .map(|i| PromiseEntryDoc {
                    edge: self.promise_edges[i],
                    leaves: self.leaf_sets[i].iter().copied().collect(),
                    colour: self.colours[i],
                    label: self.labels[i].clone(),
                })
                .collect(),
            level: self.level,
        }
    }

    /// Rebuilds a structure; inherited rules come from `context`.
    pub fn from_doc(doc: &PromiseDoc, context: &Presentation) -> Result<Self, PromiseError> {
        let forest = doc.forest.iter().map(ColoredTree::from_doc).collect::<Result<Vec<_>, _>>()?;
        let mut ps = PromiseStructure::bare(forest, doc.level);
        ps.names = doc.names.clone();
        for e in &doc.promises {
            ps.add_promise(e.edge, e.leaves.iter().copied().collect(), e.colour, &e.label);
        }
        for (c, name) in &context.rules {
            if !ps.colours.contains(c) {
                ps.inherited_rules.insert(*c, name.clone());
                ps.inherited.insert(name.clone(), context.pieces[name].clone());
            }
        }
        ps.validate()?;
        Ok(ps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseEntryDoc {
    pub edge: DirectedEdge,
    pub leaves: Vec<VertexId>,
    pub colour: Colour,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseDoc {
    pub forest: Vec<TreeDoc>,
    pub names: Vec<String>,
    pub promises: Vec<PromiseEntryDoc>,
    pub level: u32,
}

pub fn closure(ps: &PromiseStructure) -> Result<ClosureResult, PromiseError> {
    ps.validate()?;
    let mut pieces = ps.inherited.clone();
    let mut rules = ps.inherited_rules.clone();
    let mut placeholders = Vec::new();
    for i in 0..ps.len() {
        if ps.is_placeholder(i)? {
            placeholders.push(i);
            continue;
        }
        let side = ps.far_side(i)?;
        if side.len() < 2 {
            return Err(PromiseError::Unproductive(i));
        }
        let name = PromiseStructure::rule_piece_name(ps.colours[i]);
        pieces.insert(name.clone(), Piece::new(side, ps.labels[i].clone()));
        rules.insert(ps.colours[i], name);
    }
    let mut components = Vec::with_capacity(ps.forest.len());
    for (t, name) in ps.forest.iter().zip(&ps.names) {
        let mut pieces = pieces.clone();
        pieces.insert(name.clone(), Piece::new(t.clone(), name.clone()));
        let p = Presentation { pieces, rules: rules.clone(), root: name.clone(), level: ps.level + 1 };
        p.validate()?;
        components.push(p);
    }
    let mut cp = PromiseStructure::bare(ps.forest.clone(), ps.level + 1);
    cp.names = ps.names.clone();
    for &i in &placeholders {
        let members: BTreeSet<VertexId> =
            ps.forest.iter().flat_map(|t| t.coloured(ps.colours[i])).collect();
        cp.add_promise(ps.promise_edges[i], members, ps.colours[i], &ps.labels[i]);
    }
    for (c, name) in &rules {
        cp.inherited_rules.insert(*c, name.clone());
        cp.inherited.insert(name.clone(), pieces[name].clone());
    }
    Ok(ClosureResult { components, closure_promises: cp })
}

/// Whether `h` is an `L`-extension of `g`: each component of `h` holds exactly one component of
/// `g`, and new vertices attach to `g` only at vertices of `L`.
pub fn leaf_extension_check(g: &[ColoredTree], h: &[ColoredTree], l: &BTreeSet<VertexId>) -> Result<bool, PromiseError> {
    let find = |v: VertexId| h.iter().position(|t| t.contains(v));
    let mut hosts = Vec::with_capacity(g.len());
    for t in g {
        let mut host = None;
        for &v in t.ids() {
            let c = find(v).ok_or_else(|| PromiseError::NotSubgraph(format!("vertex {v} missing")))?;
            if *host.get_or_insert(c) != c {
                return Err(PromiseError::NotSubgraph(format!("component of {v} is split")));
            }
        }
        for (a, b) in t.edges() {
            if !h[host.expect("nonempty")].has_edge(a, b) {
                return Err(PromiseError::NotSubgraph(format!("edge {a}-{b} missing")));
            }
        }
        hosts.push(host);
    }
    let mut count = vec![0usize; h.len()];
    for c in hosts.into_iter().flatten() {
        count[c] += 1;
    }
    if count.iter().any(|&k| k != 1) {
        return Ok(false);
    }
    let in_g = |v: VertexId| g.iter().any(|t| t.contains(v));
    for t in h {
        for (a, b) in t.edges() {
            for (x, y) in [(a, b), (b, a)] {
                if in_g(x) && !in_g(y) && !l.contains(&x) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The component presentation holding `v` and the index of that component.
fn holder<'r>(cr: &'r ClosureResult, v: VertexId) -> Option<(usize, &'r Presentation)> {
    cr.components.iter().enumerate().find(|(_, p)| p.root_piece().tree.contains(v))
}

/// Subtree beyond `p_i` and beyond the leaf `l`, as presentations.
fn promise_pair(cr: &ClosureResult, ps: &PromiseStructure, i: usize, l: VertexId) -> Result<(Presentation, Presentation), PromiseError> {
    let e = *ps.promise_edges.get(i).ok_or(PromiseError::NoSuchPromise(i))?;
    let (_, pa) = holder(cr, e.head).ok_or(PromiseError::BadEdge(i, e.tail, e.head))?;
    let (_, pb) = holder(cr, l).ok_or(PromiseError::NotALeaf(i, l))?;
    let t = &pb.root_piece().tree;
    if t.degree(l) != 1 {
        return Err(PromiseError::NotALeaf(i, l));
    }
    let nb = t.neighbours(l)[0];
    Ok((pa.subtree(e)?, pb.subtree(DirectedEdge::new(nb, l))?))
}

fn cl_check(cr: &ClosureResult, ps: &PromiseStructure, i: usize, l: VertexId, d: usize, labels: Labels) -> Result<bool, PromiseError> {
    if !ps.leaf_sets.get(i).ok_or(PromiseError::NoSuchPromise(i))?.contains(&l) {
        return Err(PromiseError::NotALeaf(i, l));
    }
    let (a, b) = promise_pair(cr, ps, i, l)?;
    let exact = presentations_equivalent_with(&a, &b, labels)?;
    let (ca, cb) = (Compiled::new(&a)?, Compiled::new(&b)?);
    let mut int = Interner::new();
    let mut ta = Truncation::new(&ca, labels);
    let mut tb = Truncation::new(&cb, labels);
    let ka = ta.root_class(&mut int, d);
    let kb = tb.root_class(&mut int, d);
    if exact && ka != kb {
        return Err(PromiseError::SelfCheck(i, l));
    }
    Ok(exact)
}

/// The subtrees beyond `p_i` and beyond `l` are isomorphic as rooted trees.
pub fn check_cl2(cr: &ClosureResult, ps: &PromiseStructure, i: usize, l: VertexId, d: usize) -> Result<bool, PromiseError> {
    cl_check(cr, ps, i, l, d, Labels::Blind)
}

/// As [`check_cl2`], with marker colours matched class by class.
pub fn check_cl3(cr: &ClosureResult, ps: &PromiseStructure, i: usize, l: VertexId, d: usize) -> Result<bool, PromiseError> {
    cl_check(cr, ps, i, l, d, Labels::Full)
}

/// The forest after `rounds` rounds of gluing, built directly: each round glues a fresh copy of
/// the far side of `p_i` at every leaf of `L_i` added in the previous round. Leaves of inherited
/// colours stay coloured leaves. Copies get ids above every id of the forest.
pub fn iterate_gluing(ps: &PromiseStructure, rounds: usize) -> Result<Vec<ColoredTree>, PromiseError> {
    ps.validate()?;
    let mut sides: HashMap<Colour, ColoredTree> = HashMap::new();
    for i in 0..ps.len() {
        if !ps.is_placeholder(i)? {
            sides.insert(ps.colours[i], ps.far_side(i)?);
        }
    }
    let mut next = ps.forest.iter().filter_map(|t| t.max_id()).max().map_or(0, |m| m.0 + 1);
    let mut out = Vec::with_capacity(ps.forest.len());
    for t in &ps.forest {
        let mut h = t.clone();
        let mut frontier: Vec<VertexId> =
            t.colours().into_iter().filter(|(_, c)| sides.contains_key(c)).map(|(v, _)| v).collect();
        for _ in 0..rounds {
            let mut fresh_leaves = Vec::new();
            for &l in &frontier {
                let c = h.colour(l).expect("promise leaf");
                let side = &sides[&c];
                let root = side.root().expect("rooted side");
                let mut map: HashMap<VertexId, VertexId> = HashMap::new();
                map.insert(root, l);
                for &v in side.ids() {
                    if v != root {
                        let id = VertexId(next);
                        next += 1;
                        h.add_vertex(id)?;
                        h.set_colour(id, side.colour(v))?;
                        if side.colour(v).is_some_and(|c| sides.contains_key(&c)) {
                            fresh_leaves.push(id);
                        }
                        map.insert(v, id);
                    }
                }
                for (a, b) in side.edges() {
                    h.add_edge(map[&a], map[&b])?;
                }
                h.set_colour(l, None)?;
            }
            frontier = fresh_leaves;
        }
        out.push(h);
    }
    Ok(out)
}

/// Compares the directly glued forest with the closure, both unfolded `rounds` times and cut
/// to radius `depth` around each component root, by canonical code.
pub fn gluing_oracle_agrees(ps: &PromiseStructure, cr: &ClosureResult, rounds: usize, depth: usize) -> Result<bool, PromiseError> {
    let direct = iterate_gluing(ps, rounds)?;
    let fresh: BTreeSet<Colour> = (0..ps.len())
        .filter(|&i| !ps.is_placeholder(i).unwrap_or(true))
        .map(|i| ps.colours[i])
        .collect();
    for (h, p) in direct.iter().zip(&cr.components) {
        let c = Compiled::new(p)?;
        let unfolded = c.unfold_limited(&fresh, rounds);
        let a = h.ball(h.root().expect("rooted component"), depth)?;
        let b = unfolded.ball(unfolded.root().expect("rooted"), depth)?;
        if canonical_code(&a)? != canonical_code(&b)? {
            return Ok(false);
        }
    }
    Ok(true)
}
