//! Finitely presented infinite trees: a root piece plus one substitution rule per expanding colour.
//!
//! An expanding leaf is the same vertex as the root of its rule piece; the rule piece's other
//! vertices hang below it. Marker colours have no rule and stay leaves.

pub mod analysis;
pub mod compiled;
pub mod equiv;
pub mod symbolic;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree_core::iso::component_of;
use crate::tree_core::tree::{ColoredTree, Colour, DirectedEdge, TreeDoc, TreeError, VertexId};

pub use analysis::{max_bare_path_symbolic, max_binary_height_symbolic, max_degree_symbolic, SymbolicBound};
pub use compiled::{Compiled, Expansion};
pub use equiv::presentations_equivalent;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("unknown piece {0:?}")]
    UnknownPiece(String),
    #[error("piece {0:?} has no root")]
    Unrooted(String),
    #[error("piece {0:?}: expanding colour on non-leaf vertex {1}")]
    ExpandingInterior(String, VertexId),
    #[error("piece {0:?}: the root carries expanding colour {1}")]
    ExpandingRoot(String, Colour),
    #[error("rule {0} is unproductive (its piece has a single vertex)")]
    Unproductive(Colour),
    #[error("rule piece {0:?} has a coloured root")]
    ColouredRuleRoot(String),
    #[error("address {0} does not resolve")]
    BadAddress(Address),
    #[error("directed edge {0}->{1} is not usable here")]
    BadEdge(VertexId, VertexId),
}

/// A finite rooted tree used as the root piece or as the body of a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub tree: ColoredTree,
    /// Which gadget this piece was cut from.
    pub provenance: String,
    /// Optional names of individual vertices, such as path positions.
    pub names: BTreeMap<VertexId, String>,
}

impl Piece {
    pub fn new(tree: ColoredTree, provenance: impl Into<String>) -> Self {
        Piece { tree, provenance: provenance.into(), names: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub pieces: BTreeMap<String, Piece>,
    pub rules: BTreeMap<Colour, String>,
    pub root: String,
    pub level: u32,
}

/// A vertex of the denoted tree: a vertex of the root piece followed by one hop per rule instance.
/// Every hop after the first lies in the rule piece of the previous hop's colour and is never
/// that piece's root (the root is the previous hop itself).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Address(pub Vec<VertexId>);

impl Address {
    pub fn root_piece(v: VertexId) -> Self {
        Address(vec![v])
    }

    pub fn hops(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> VertexId {
        *self.0.last().expect("addresses are never empty")
    }

    pub fn child(&self, v: VertexId) -> Address {
        let mut a = self.0.clone();
        a.push(v);
        Address(a)
    }

    pub fn parent_instance(&self) -> Option<Address> {
        (self.0.len() > 1).then(|| Address(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn starts_with(&self, prefix: &Address) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// `self` with the hops of `prefix` replaced by `to`.
    pub fn rebased(&self, prefix: &Address, to: &Address) -> Option<Address> {
        self.starts_with(prefix).then(|| {
            let mut a = to.0.clone();
            a.extend_from_slice(&self.0[prefix.0.len()..]);
            Address(a)
        })
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.0.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{self}")
    }
}

impl FromStr for Address {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hops = s.split('/').map(str::parse).collect::<Result<Vec<VertexId>, _>>()?;
        if hops.is_empty() {
            return Err(TreeError::Parse("empty address".into()));
        }
        Ok(Address(hops))
    }
}

impl From<Address> for String {
    fn from(a: Address) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Address {
    type Error = TreeError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl Presentation {
    /// A presentation without rules: the tree itself.
    pub fn finite(tree: ColoredTree, name: &str, level: u32) -> Self {
        let mut pieces = BTreeMap::new();
        pieces.insert(name.to_string(), Piece::new(tree, name));
        Presentation { pieces, rules: BTreeMap::new(), root: name.to_string(), level }
    }

    pub fn piece(&self, name: &str) -> Result<&Piece, PresentationError> {
        self.pieces.get(name).ok_or_else(|| PresentationError::UnknownPiece(name.to_string()))
    }

    pub fn root_piece(&self) -> &Piece {
        &self.pieces[&self.root]
    }

    pub fn root_vertex(&self) -> VertexId {
        self.root_piece().tree.root().expect("validated root piece is rooted")
    }

    pub fn is_expanding(&self, c: Colour) -> bool {
        self.rules.contains_key(&c)
    }

    pub fn rule_piece(&self, c: Colour) -> Option<&Piece> {
        self.rules.get(&c).and_then(|n| self.pieces.get(n))
    }

    /// Pieces reachable from the root piece through rules, in a fixed order.
    pub fn reachable_pieces(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut order = vec![self.root.clone()];
        seen.insert(self.root.clone());
        let mut k = 0;
        while k < order.len() {
            let name = order[k].clone();
            k += 1;
            if let Some(p) = self.pieces.get(&name) {
                for c in p.tree.colours().values().collect::<BTreeSet<_>>() {
                    if let Some(r) = self.rules.get(c) {
                        if seen.insert(r.clone()) {
                            order.push(r.clone());
                        }
                    }
                }
            }
        }
        order
    }

    /// Colours present in reachable pieces without a rule.
    pub fn marker_colours(&self) -> BTreeSet<Colour> {
        self.reachable_pieces()
            .iter()
            .flat_map(|n| self.pieces[n].tree.colours().into_values())
            .filter(|c| !self.is_expanding(*c))
            .collect()
    }

    pub fn validate(&self) -> Result<(), PresentationError> {
        self.piece(&self.root)?;
        for name in self.rules.values() {
            self.piece(name)?;
        }
        for (c, name) in &self.rules {
            let t = &self.pieces[name].tree;
            if t.len() < 2 {
                return Err(PresentationError::Unproductive(*c));
            }
            let r = t.root().ok_or_else(|| PresentationError::Unrooted(name.clone()))?;
            if t.colour(r).is_some() {
                return Err(PresentationError::ColouredRuleRoot(name.clone()));
            }
        }
        for name in self.reachable_pieces() {
            let t = &self.pieces[&name].tree;
            t.validate()?;
            let r = t.root().ok_or_else(|| PresentationError::Unrooted(name.clone()))?;
            for (v, c) in t.colours() {
                if !self.is_expanding(c) {
                    continue;
                }
                if v == r {
                    return Err(PresentationError::ExpandingRoot(name.clone(), c));
                }
                if t.degree(v) != 1 {
                    return Err(PresentationError::ExpandingInterior(name.clone(), v));
                }
            }
        }
        Ok(())
    }

    /// The subtree beyond a directed edge of the root piece, rooted at its head.
    /// When the head is an expanding leaf the result is rooted at a copy of the rule piece.
    pub fn subtree(&self, e: DirectedEdge) -> Result<Presentation, PresentationError> {
        let rp = &self.root_piece().tree;
        if !rp.has_edge(e.tail, e.head) {
            return Err(PresentationError::BadEdge(e.tail, e.head));
        }
        let mut out = self.clone();
        let name = format!("{}[{}->{}]", self.root, e.tail, e.head);
        let piece = match rp.colour(e.head).and_then(|c| self.rule_piece(c)) {
            Some(rule) => Piece::new(rule.tree.clone(), format!("{} below {}", rule.provenance, e.head)),
            None => Piece::new(component_of(rp, e)?, format!("{} beyond {}->{}", self.root_piece().provenance, e.tail, e.head)),
        };
        out.pieces.insert(name.clone(), piece);
        out.root = name;
        Ok(out)
    }

    /// The same tree with the root moved to another root-piece vertex that is not an expanding leaf.
    pub fn rerooted(&self, v: VertexId) -> Result<Presentation, PresentationError> {
        let rp = &self.root_piece().tree;
        if !rp.contains(v) || rp.colour(v).is_some_and(|c| self.is_expanding(c)) {
            return Err(PresentationError::BadAddress(Address::root_piece(v)));
        }
        let mut out = self.clone();
        let name = format!("{}@{}", self.root, v);
        let mut piece = self.root_piece().clone();
        piece.tree.set_root(Some(v))?;
        out.pieces.insert(name.clone(), piece);
        out.root = name;
        Ok(out)
    }

    pub fn to_doc(&self) -> PresentationDoc {
        PresentationDoc {
            pieces: self
                .pieces
                .iter()
                .map(|(n, p)| {
                    let doc = PieceDoc {
                        tree: p.tree.to_doc(),
                        provenance: p.provenance.clone(),
                        names: p.names.iter().map(|(v, s)| (v.0, s.clone())).collect(),
                    };
                    (n.clone(), doc)
                })
                .collect(),
            rules: self.rules.iter().map(|(c, n)| (c.to_string(), n.clone())).collect(),
            root: self.root.clone(),
            level: self.level,
        }
    }

    pub fn from_doc(doc: &PresentationDoc) -> Result<Presentation, PresentationError> {
        let mut pieces = BTreeMap::new();
        for (n, p) in &doc.pieces {
            let piece = Piece {
                tree: ColoredTree::from_doc(&p.tree)?,
                provenance: p.provenance.clone(),
                names: p.names.iter().map(|(v, s)| (VertexId(*v), s.clone())).collect(),
            };
            pieces.insert(n.clone(), piece);
        }
        let mut rules = BTreeMap::new();
        for (c, n) in &doc.rules {
            rules.insert(c.parse::<Colour>()?, n.clone());
        }
        let p = Presentation { pieces, rules, root: doc.root.clone(), level: doc.level };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDoc {
    pub tree: TreeDoc,
    pub provenance: String,
    pub names: BTreeMap<u64, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub pieces: BTreeMap<String, PieceDoc>,
    pub rules: BTreeMap<String, String>,
    pub root: String,
    pub level: u32,
}

#[cfg(test)]
pub(crate) mod samples {
    use super::*;

    /// Root piece: root 0 with one red child 1. Rule red: 10 - 11 with 11 red.
    pub fn ray() -> Presentation {
        let mut root = ColoredTree::from_edges(2, &[(0, 1)], Some(0)).unwrap();
        root.set_colour(VertexId(1), Some(Colour::red(0))).unwrap();
        let mut rule = ColoredTree::from_edges(0, &[], None).unwrap();
        rule.add_vertex(VertexId(10)).unwrap();
        rule.add_vertex(VertexId(11)).unwrap();
        rule.add_edge(VertexId(10), VertexId(11)).unwrap();
        rule.set_root(Some(VertexId(10))).unwrap();
        rule.set_colour(VertexId(11), Some(Colour::red(0))).unwrap();
        let mut p = Presentation::finite(root, "root", 1);
        p.pieces.insert("red".into(), Piece::new(rule, "ray step"));
        p.rules.insert(Colour::red(0), "red".into());
        p.validate().unwrap();
        p
    }

    /// A leaf that expands into a cherry whose two leaves expand again.
    pub fn full_binary() -> Presentation {
        let mut root = ColoredTree::from_edges(2, &[(0, 1)], Some(0)).unwrap();
        root.set_colour(VertexId(1), Some(Colour::red(0))).unwrap();
        let mut rule = ColoredTree::from_edges(3, &[(0, 1), (0, 2)], Some(0)).unwrap();
        rule.set_colour(VertexId(1), Some(Colour::red(0))).unwrap();
        rule.set_colour(VertexId(2), Some(Colour::red(0))).unwrap();
        let mut p = Presentation::finite(root, "root", 1);
        p.pieces.insert("cherry".into(), Piece::new(rule, "cherry"));
        p.rules.insert(Colour::red(0), "cherry".into());
        p
    }

    /// A spine of claws: each expanding leaf continues by one edge to a degree-3 vertex
    /// carrying a marker leaf and the next expanding leaf.
    pub fn claw() -> Presentation {
        let mut root = ColoredTree::from_edges(2, &[(0, 1)], Some(0)).unwrap();
        root.set_colour(VertexId(1), Some(Colour::blue(0))).unwrap();
        let mut rule = ColoredTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)], Some(0)).unwrap();
        rule.set_colour(VertexId(2), Some(Colour::blue(0))).unwrap();
        rule.set_colour(VertexId(3), Some(Colour::red(1))).unwrap();
        let mut p = Presentation::finite(root, "root", 1);
        p.pieces.insert("claw".into(), Piece::new(rule, "claw"));
        p.rules.insert(Colour::blue(0), "claw".into());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::samples::*;
    use super::*;

    #[test]
    fn address_text_round_trip() {
        let a = Address(vec![VertexId(12), VertexId(305), VertexId(77)]);
        assert_eq!(a.to_string(), "12/305/77");
        assert_eq!("12/305/77".parse::<Address>().unwrap(), a);
        assert!("".parse::<Address>().is_err());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "\"12/305/77\"");
    }

    #[test]
    fn doc_round_trip() {
        let p = ray();
        let json = serde_json::to_string(&p.to_doc()).unwrap();
        let back: PresentationDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(Presentation::from_doc(&back).unwrap(), p);
    }

    #[test]
    fn unproductive_rules_are_rejected() {
        let mut p = ray();
        p.pieces.insert("dot".into(), Piece::new(ColoredTree::from_edges(1, &[], Some(0)).unwrap(), "dot"));
        p.rules.insert(Colour::red(0), "dot".into());
        assert_eq!(p.validate(), Err(PresentationError::Unproductive(Colour::red(0))));
    }

    #[test]
    fn markers_are_colours_without_rules() {
        assert_eq!(claw().marker_colours(), BTreeSet::from([Colour::red(1)]));
        assert!(ray().marker_colours().is_empty());
    }
}
