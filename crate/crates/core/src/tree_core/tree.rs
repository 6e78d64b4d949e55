use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable vertex identifier. Ordering is numeric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct VertexId(pub u64);

impl FromStr for VertexId {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(VertexId).map_err(|_| TreeError::Parse(format!("bad vertex id {s:?}")))
    }
}

impl From<VertexId> for String {
    fn from(v: VertexId) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for VertexId {
    type Error = TreeError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Leaf colour. Colours come in red/blue pairs per level: `2n` is red, `2n + 1` is blue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Colour(pub u32);

impl From<Colour> for String {
    fn from(c: Colour) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Colour {
    type Error = TreeError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl Colour {
    pub fn red(level: u32) -> Colour {
        Colour(2 * level)
    }

    pub fn blue(level: u32) -> Colour {
        Colour(2 * level + 1)
    }

    pub fn level(self) -> u32 {
        self.0 / 2
    }

    pub fn is_red(self) -> bool {
        self.0 % 2 == 0
    }

    /// The colour of the same level on the other side.
    pub fn swapped(self) -> Colour {
        Colour(self.0 ^ 1)
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = if self.is_red() { 'R' } else { 'B' };
        write!(f, "{}{}", side, self.level())
    }
}

impl FromStr for Colour {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TreeError::Parse(format!("bad colour {s:?}"));
        let mut chars = s.chars();
        let side = chars.next().ok_or_else(bad)?;
        let level: u32 = chars.as_str().parse().map_err(|_| bad())?;
        match side {
            'R' => Ok(Colour::red(level)),
            'B' => Ok(Colour::blue(level)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub tail: VertexId,
    pub head: VertexId,
}

impl DirectedEdge {
    pub fn new(tail: VertexId, head: VertexId) -> Self {
        DirectedEdge { tail, head }
    }

    pub fn reversed(self) -> Self {
        DirectedEdge { tail: self.head, head: self.tail }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("vertex {0} already present")]
    DuplicateVertex(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self loop at {0}")]
    SelfLoop(VertexId),
    #[error("edge {0}-{1} already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("{0} is not an edge")]
    NotAnEdge(String),
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("coloured vertex {0} is neither a leaf nor a cut mark")]
    ColouredInterior(VertexId),
    #[error("tree has no root")]
    MissingRoot,
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A finite tree with stable vertex ids, an optional root, leaf colours and cut marks.
///
/// Cut marks flag vertices on a truncation boundary whose true neighbourhood is larger.
#[derive(Clone, Debug, Default)]
pub struct ColoredTree {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    adj: Vec<Vec<usize>>,
    root: Option<usize>,
    colour: Vec<Option<Colour>>,
    cut: Vec<bool>,
}

impl PartialEq for ColoredTree {
    fn eq(&self, other: &Self) -> bool {
        self.to_doc() == other.to_doc()
    }
}

impl Eq for ColoredTree {}

impl ColoredTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        ColoredTree {
            ids: Vec::with_capacity(n),
            index: HashMap::with_capacity(n),
            adj: Vec::with_capacity(n),
            root: None,
            colour: Vec::with_capacity(n),
            cut: Vec::with_capacity(n),
        }
    }

    /// Builds a tree from an edge list over `0..n`, rooted at `root`.
    pub fn from_edges(n: usize, edges: &[(u64, u64)], root: Option<u64>) -> Result<Self, TreeError> {
        let mut t = ColoredTree::with_capacity(n);
        for i in 0..n as u64 {
            t.add_vertex(VertexId(i))?;
        }
        for &(a, b) in edges {
            t.add_edge(VertexId(a), VertexId(b))?;
        }
        if let Some(r) = root {
            t.set_root(Some(VertexId(r)))?;
        }
        Ok(t)
    }

    pub fn add_vertex(&mut self, id: VertexId) -> Result<usize, TreeError> {
        if self.index.contains_key(&id) {
            return Err(TreeError::DuplicateVertex(id));
        }
        let i = self.ids.len();
        self.ids.push(id);
        self.index.insert(id, i);
        self.adj.push(Vec::new());
        self.colour.push(None);
        self.cut.push(false);
        Ok(i)
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId) -> Result<(), TreeError> {
        if a == b {
            return Err(TreeError::SelfLoop(a));
        }
        let ia = self.idx(a).ok_or(TreeError::UnknownVertex(a))?;
        let ib = self.idx(b).ok_or(TreeError::UnknownVertex(b))?;
        if self.adj[ia].contains(&ib) {
            return Err(TreeError::DuplicateEdge(a, b));
        }
        self.adj[ia].push(ib);
        self.adj[ib].push(ia);
        Ok(())
    }

    pub fn remove_edge_between(&mut self, a: VertexId, b: VertexId) -> Result<(), TreeError> {
        let ia = self.idx(a).ok_or(TreeError::UnknownVertex(a))?;
        let ib = self.idx(b).ok_or(TreeError::UnknownVertex(b))?;
        if !self.adj[ia].contains(&ib) {
            return Err(TreeError::NotAnEdge(format!("{a}-{b}")));
        }
        self.adj[ia].retain(|&x| x != ib);
        self.adj[ib].retain(|&x| x != ia);
        Ok(())
    }

    pub fn set_root(&mut self, root: Option<VertexId>) -> Result<(), TreeError> {
        self.root = match root {
            Some(r) => Some(self.idx(r).ok_or(TreeError::UnknownVertex(r))?),
            None => None,
        };
        Ok(())
    }

    pub fn set_colour(&mut self, id: VertexId, c: Option<Colour>) -> Result<(), TreeError> {
        let i = self.idx(id).ok_or(TreeError::UnknownVertex(id))?;
        self.colour[i] = c;
        Ok(())
    }

    pub fn set_cut(&mut self, id: VertexId, cut: bool) -> Result<(), TreeError> {
        let i = self.idx(id).ok_or(TreeError::UnknownVertex(id))?;
        self.cut[i] = cut;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn idx(&self, id: VertexId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    /// Vertex ids in insertion order.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn sorted_ids(&self) -> Vec<VertexId> {
        let mut v = self.ids.clone();
        v.sort_unstable();
        v
    }

    pub fn max_id(&self) -> Option<VertexId> {
        self.ids.iter().copied().max()
    }

    pub fn adj(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.idx(id).map_or(0, |i| self.adj[i].len())
    }

    pub fn neighbours(&self, id: VertexId) -> Vec<VertexId> {
        match self.idx(id) {
            Some(i) => self.adj[i].iter().map(|&j| self.ids[j]).collect(),
            None => Vec::new(),
        }
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        match (self.idx(a), self.idx(b)) {
            (Some(ia), Some(ib)) => self.adj[ia].contains(&ib),
            _ => false,
        }
    }

    /// Edges as `(min, max)` pairs, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.len().saturating_sub(1));
        for (i, ns) in self.adj.iter().enumerate() {
            for &j in ns {
                let (a, b) = (self.ids[i], self.ids[j]);
                if a < b {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn root(&self) -> Option<VertexId> {
        self.root.map(|i| self.ids[i])
    }

    pub fn root_idx(&self) -> Option<usize> {
        self.root
    }

    pub fn colour(&self, id: VertexId) -> Option<Colour> {
        self.idx(id).and_then(|i| self.colour[i])
    }

    pub fn colour_at(&self, i: usize) -> Option<Colour> {
        self.colour[i]
    }

    pub fn is_cut(&self, id: VertexId) -> bool {
        self.idx(id).is_some_and(|i| self.cut[i])
    }

    pub fn cut_at(&self, i: usize) -> bool {
        self.cut[i]
    }

    pub fn colours(&self) -> BTreeMap<VertexId, Colour> {
        self.ids
            .iter()
            .zip(&self.colour)
            .filter_map(|(&id, c)| c.map(|c| (id, c)))
            .collect()
    }

    /// Vertices carrying colour `c`, sorted.
    pub fn coloured(&self, c: Colour) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self
            .ids
            .iter()
            .zip(&self.colour)
            .filter(|(_, x)| **x == Some(c))
            .map(|(&id, _)| id)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn cuts(&self) -> BTreeSet<VertexId> {
        self.ids.iter().zip(&self.cut).filter(|(_, &c)| c).map(|(&id, _)| id).collect()
    }

    pub fn has_cuts(&self) -> bool {
        self.cut.iter().any(|&c| c)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> =
            (0..self.len()).filter(|&i| self.adj[i].len() <= 1).map(|i| self.ids[i]).collect();
        v.sort_unstable();
        v
    }

    /// Checks connectivity, acyclicity and that colours sit on leaves or cut marks.
    pub fn validate(&self) -> Result<(), TreeError> {
        let n = self.len();
        if n == 0 {
            return Ok(());
        }
        if self.edge_count() != n - 1 {
            return Err(TreeError::NotATree(format!("{} vertices, {} edges", n, self.edge_count())));
        }
        let (order, _) = self.bfs(0, None);
        if order.len() != n {
            return Err(TreeError::NotATree("disconnected".into()));
        }
        for i in 0..n {
            if self.colour[i].is_some() && self.adj[i].len() > 1 && !self.cut[i] {
                return Err(TreeError::ColouredInterior(self.ids[i]));
            }
        }
        Ok(())
    }

    /// Breadth-first order from `start` (not crossing into `blocked`), with parent indices.
    pub fn bfs(&self, start: usize, blocked: Option<usize>) -> (Vec<usize>, Vec<usize>) {
        let n = self.len();
        let mut parent = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut seen = vec![false; n];
        seen[start] = true;
        if let Some(b) = blocked {
            seen[b] = true;
        }
        let mut q = VecDeque::new();
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    q.push_back(w);
                }
            }
        }
        (order, parent)
    }

    /// Distances from `start` in edges; `usize::MAX` when unreachable.
    pub fn distances(&self, start: usize) -> Vec<usize> {
        let (order, parent) = self.bfs(start, None);
        let mut dist = vec![usize::MAX; self.len()];
        dist[start] = 0;
        for &v in order.iter().skip(1) {
            dist[v] = dist[parent[v]] + 1;
        }
        dist
    }

    /// Builds the sub-forest induced on vertices with `keep[i]`, one tree per component.
    /// Components are ordered by their smallest vertex id; a kept root stays the root.
    pub fn induced_components(&self, keep: &[bool]) -> Vec<ColoredTree> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for s in 0..n {
            if !keep[s] || comp[s] != usize::MAX {
                continue;
            }
            let g = groups.len();
            let mut members = vec![s];
            comp[s] = g;
            let mut k = 0;
            while k < members.len() {
                let v = members[k];
                k += 1;
                for &w in &self.adj[v] {
                    if keep[w] && comp[w] == usize::MAX {
                        comp[w] = g;
                        members.push(w);
                    }
                }
            }
            groups.push(members);
        }
        let mut out: Vec<ColoredTree> = groups
            .iter()
            .map(|members| {
                let mut t = ColoredTree::with_capacity(members.len());
                for &v in members {
                    let i = t.add_vertex(self.ids[v]).expect("fresh id");
                    t.colour[i] = self.colour[v];
                    t.cut[i] = self.cut[v];
                }
                for &v in members {
                    for &w in &self.adj[v] {
                        if keep[w] && self.ids[v] < self.ids[w] {
                            t.add_edge(self.ids[v], self.ids[w]).expect("induced edge");
                        }
                    }
                }
                if let Some(r) = self.root {
                    if keep[r] && t.contains(self.ids[r]) {
                        t.root = t.idx(self.ids[r]);
                    }
                }
                t
            })
            .collect();
        out.sort_by_key(|t| t.ids.iter().copied().min());
        out
    }

    /// The ball of radius `r` around `center`, rooted there. Vertices at distance `r` that have
    /// neighbours outside the ball get cut marks; existing cut marks are kept.
    pub fn ball(&self, center: VertexId, r: usize) -> Result<ColoredTree, TreeError> {
        let c = self.idx(center).ok_or(TreeError::UnknownVertex(center))?;
        let dist = self.distances(c);
        let keep: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        let mut t = self.induced_components(&keep).into_iter().next().expect("center kept");
        for (i, &d) in dist.iter().enumerate() {
            if d == r && self.adj[i].iter().any(|&w| !keep[w]) {
                t.set_cut(self.ids[i], true)?;
            }
        }
        t.set_root(Some(center))?;
        Ok(t)
    }

    /// The forest left after deleting vertex `id`.
    pub fn remove_vertex(&self, id: VertexId) -> Result<Vec<ColoredTree>, TreeError> {
        let i = self.idx(id).ok_or(TreeError::UnknownVertex(id))?;
        let mut keep = vec![true; self.len()];
        keep[i] = false;
        Ok(self.induced_components(&keep))
    }

    /// The forest left after deleting edge `a`-`b`.
    pub fn remove_edge(&self, a: VertexId, b: VertexId) -> Result<Vec<ColoredTree>, TreeError> {
        if !self.has_edge(a, b) {
            return Err(TreeError::NotAnEdge(format!("{a}-{b}")));
        }
        let mut t = self.clone();
        t.remove_edge_between(a, b)?;
        Ok(t.induced_components(&vec![true; t.len()]))
    }

    /// Copy with ids rewritten by `f` (which must be injective).
    pub fn relabel(&self, f: impl Fn(VertexId) -> VertexId) -> Result<ColoredTree, TreeError> {
        let mut t = ColoredTree::with_capacity(self.len());
        for (i, &id) in self.ids.iter().enumerate() {
            let j = t.add_vertex(f(id))?;
            t.colour[j] = self.colour[i];
            t.cut[j] = self.cut[i];
        }
        for (a, b) in self.edges() {
            t.add_edge(f(a), f(b))?;
        }
        if let Some(r) = self.root() {
            t.set_root(Some(f(r)))?;
        }
        Ok(t)
    }

    /// Copy with the root moved to `id`.
    pub fn rerooted(&self, id: VertexId) -> Result<ColoredTree, TreeError> {
        let mut t = self.clone();
        t.set_root(Some(id))?;
        Ok(t)
    }

    /// Copy with all colours and cut marks dropped.
    pub fn uncoloured(&self) -> ColoredTree {
        let mut t = self.clone();
        t.colour.iter_mut().for_each(|c| *c = None);
        t.cut.iter_mut().for_each(|c| *c = false);
        t
    }

    pub fn to_doc(&self) -> TreeDoc {
        TreeDoc {
            vertices: self.sorted_ids().iter().map(|v| v.0.to_string()).collect(),
            edges: self.edges().iter().map(|(a, b)| [a.0.to_string(), b.0.to_string()]).collect(),
            root: self.root().map(|r| r.0.to_string()),
            colours: self.colours().into_iter().map(|(v, c)| (v.0, c.to_string())).collect(),
            cuts: self.cuts().iter().map(|v| v.0.to_string()).collect(),
        }
    }

    pub fn from_doc(doc: &TreeDoc) -> Result<ColoredTree, TreeError> {
        let parse = |s: &str| -> Result<VertexId, TreeError> {
            s.parse::<u64>().map(VertexId).map_err(|_| TreeError::Parse(format!("bad id {s:?}")))
        };
        let mut t = ColoredTree::with_capacity(doc.vertices.len());
        for v in &doc.vertices {
            t.add_vertex(parse(v)?)?;
        }
        for [a, b] in &doc.edges {
            t.add_edge(parse(a)?, parse(b)?)?;
        }
        if let Some(r) = &doc.root {
            t.set_root(Some(parse(r)?))?;
        }
        for (&v, c) in &doc.colours {
            t.set_colour(VertexId(v), Some(c.parse()?))?;
        }
        for v in &doc.cuts {
            t.set_cut(parse(v)?, true)?;
        }
        Ok(t)
    }
}

/// JSON shape of a [`ColoredTree`]: ids as decimal strings, arrays sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub root: Option<String>,
    pub colours: BTreeMap<u64, String>,
    pub cuts: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_round_trip() {
        let mut t = ColoredTree::from_edges(4, &[(0, 1), (1, 2), (1, 3)], Some(0)).unwrap();
        t.set_colour(VertexId(2), Some(Colour::blue(3))).unwrap();
        t.set_cut(VertexId(3), true).unwrap();
        let json = serde_json::to_string(&t.to_doc()).unwrap();
        let back: TreeDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(ColoredTree::from_doc(&back).unwrap(), t);
        assert!(json.contains("\"B3\""));
    }

    #[test]
    fn validate_rejects_cycles_and_coloured_interiors() {
        let mut t = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], None).unwrap();
        assert!(t.validate().is_ok());
        t.set_colour(VertexId(1), Some(Colour::red(0))).unwrap();
        assert_eq!(t.validate(), Err(TreeError::ColouredInterior(VertexId(1))));
        let mut c = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], None).unwrap();
        c.add_edge(VertexId(2), VertexId(0)).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn colour_names() {
        assert_eq!(Colour::red(4).to_string(), "R4");
        assert_eq!("B2".parse::<Colour>().unwrap(), Colour::blue(2));
        assert_eq!(Colour::red(2).swapped(), Colour::blue(2));
    }
}
