use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Address, Presentation, PresentationError};
use crate::tree_core::tree::{ColoredTree, Colour, VertexId};

pub const NONE: u32 = u32::MAX;

/// Index form of a presentation: pieces numbered (root piece first), each oriented from its root.
pub struct Compiled<'a> {
    pub pres: &'a Presentation,
    pub names: Vec<String>,
    pub trees: Vec<&'a ColoredTree>,
    /// Root vertex index of every piece.
    pub root: Vec<usize>,
    /// Rule piece entered at each vertex, or `NONE`.
    pub rule: Vec<Vec<u32>>,
    pub parent: Vec<Vec<usize>>,
    /// Piece-local children (neighbours other than the parent).
    pub children: Vec<Vec<Vec<usize>>>,
    /// BFS order of each piece from its root.
    pub order: Vec<Vec<usize>>,
}

impl<'a> Compiled<'a> {
    pub fn new(pres: &'a Presentation) -> Result<Self, PresentationError> {
        pres.validate()?;
        let names = pres.reachable_pieces();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut c = Compiled {
            pres,
            trees: Vec::new(),
            root: Vec::new(),
            rule: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            order: Vec::new(),
            names: names.clone(),
        };
        for n in &names {
            let t = &pres.pieces[n].tree;
            let r = t.root_idx().ok_or_else(|| PresentationError::Unrooted(n.clone()))?;
            let (order, parent) = t.bfs(r, None);
            let children = (0..t.len())
                .map(|v| t.adj(v).iter().copied().filter(|&w| w != parent[v]).collect())
                .collect();
            let rule = (0..t.len())
                .map(|v| {
                    t.colour_at(v)
                        .and_then(|col| pres.rules.get(&col))
                        .map_or(NONE, |rn| index[rn.as_str()] as u32)
                })
                .collect();
            c.trees.push(t);
            c.root.push(r);
            c.rule.push(rule);
            c.parent.push(parent);
            c.children.push(children);
            c.order.push(order);
        }
        Ok(c)
    }

    pub fn piece_count(&self) -> usize {
        self.trees.len()
    }

    pub fn total_vertices(&self) -> usize {
        self.trees.iter().map(|t| t.len()).sum()
    }

    /// Degree in the denoted tree of a vertex of piece `p` (an expanding leaf gains its rule root's
    /// neighbours; a rule root itself is never a vertex of its own).
    pub fn degree(&self, p: usize, v: usize) -> usize {
        let d = self.trees[p].adj(v).len();
        match self.rule[p][v] {
            NONE => d,
            q => d + self.children[q as usize][self.root[q as usize]].len(),
        }
    }

    /// Colour in the denoted tree: expanding leaves are interior vertices there.
    pub fn colour(&self, p: usize, v: usize) -> Option<Colour> {
        if self.rule[p][v] == NONE {
            self.trees[p].colour_at(v)
        } else {
            None
        }
    }

    /// Children of a vertex in the orientation away from its piece root, as (piece, vertex).
    pub fn down_children(&self, p: usize, v: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.children[p][v].iter().map(|&w| (p, w)).collect();
        if self.rule[p][v] != NONE {
            let q = self.rule[p][v] as usize;
            out.extend(self.children[q][self.root[q]].iter().map(|&w| (q, w)));
        }
        out
    }

    pub fn navigator(&self) -> Navigator<'_, 'a> {
        Navigator { c: self, frames: vec![Frame { parent: NONE, leaf: NONE, piece: 0 }], index: HashMap::new() }
    }

    /// The ball of radius `r` around the root.
    pub fn expand(&self, r: usize) -> Expansion {
        let mut nav = self.navigator();
        let root = Loc { frame: 0, v: self.root[0] as u32 };
        nav.ball(&[root], r, None)
    }

    /// The ball of radius `r` around an address.
    pub fn ball(&self, a: &Address, r: usize) -> Result<Expansion, PresentationError> {
        let mut nav = self.navigator();
        let l = nav.locate(a)?;
        Ok(nav.ball(&[l], r, None))
    }

    /// Breadth-first stream of addresses from the root.
    pub fn vertex_iter(&self) -> VertexIter<'_, 'a> {
        let nav = self.navigator();
        let root = Loc { frame: 0, v: self.root[0] as u32 };
        VertexIter { nav, queue: VecDeque::from([(root, None)]) }
    }

    /// The finite tree obtained by substituting rules only for colours in `colours`, at most
    /// `rounds` nested times; every other coloured leaf stays a coloured leaf. Ids are sequential.
    pub fn unfold_limited(&self, colours: &BTreeSet<Colour>, rounds: usize) -> ColoredTree {
        let mut t = ColoredTree::new();
        let mut next = 0u64;
        let mut fresh = |t: &mut ColoredTree| {
            let id = VertexId(next);
            next += 1;
            t.add_vertex(id).expect("fresh id");
            id
        };
        // (piece, vertex, nesting depth, id of the parent vertex in the output)
        let root = fresh(&mut t);
        t.set_root(Some(root)).expect("root");
        let mut stack: Vec<(usize, usize, usize, VertexId)> = Vec::new();
        let place = |t: &mut ColoredTree, p: usize, v: usize, depth: usize, id: VertexId, stack: &mut Vec<_>| {
            let tree = self.trees[p];
            let col = tree.colour_at(v);
            let expand = col.is_some_and(|c| colours.contains(&c)) && self.rule[p][v] != NONE && depth < rounds;
            if expand {
                let q = self.rule[p][v] as usize;
                for &w in &self.children[q][self.root[q]] {
                    stack.push((q, w, depth + 1, id));
                }
            } else {
                t.set_colour(id, col).expect("vertex");
            }
            for &w in &self.children[p][v] {
                stack.push((p, w, depth, id));
            }
        };
        place(&mut t, 0, self.root[0], 0, root, &mut stack);
        while let Some((p, v, depth, parent)) = stack.pop() {
            let id = fresh(&mut t);
            t.add_edge(parent, id).expect("tree edge");
            place(&mut t, p, v, depth, id, &mut stack);
        }
        t
    }
}

/// One rule instance: the expanding leaf it hangs from and its piece.
#[derive(Clone, Copy, Debug)]
struct Frame {
    parent: u32,
    leaf: u32,
    piece: u32,
}

/// A vertex of the denoted tree: a vertex of the piece of `frame`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loc {
    pub frame: u32,
    pub v: u32,
}

/// Walks the denoted tree, creating rule instances on demand.
pub struct Navigator<'c, 'a> {
    c: &'c Compiled<'a>,
    frames: Vec<Frame>,
    index: HashMap<(u32, u32), u32>,
}

impl<'c, 'a> Navigator<'c, 'a> {
    pub fn compiled(&self) -> &'c Compiled<'a> {
        self.c
    }

    pub fn piece_of(&self, l: Loc) -> usize {
        self.frames[l.frame as usize].piece as usize
    }

    pub fn root(&self) -> Loc {
        Loc { frame: 0, v: self.c.root[0] as u32 }
    }

    /// The frame of the rule instance hanging at `l` (which must be an expanding leaf).
    pub fn instance(&mut self, l: Loc) -> u32 {
        if let Some(&f) = self.index.get(&(l.frame, l.v)) {
            return f;
        }
        let q = self.c.rule[self.piece_of(l)][l.v as usize];
        debug_assert_ne!(q, NONE);
        let f = self.frames.len() as u32;
        self.frames.push(Frame { parent: l.frame, leaf: l.v, piece: q });
        self.index.insert((l.frame, l.v), f);
        f
    }

    pub fn is_expanding(&self, l: Loc) -> bool {
        self.c.rule[self.piece_of(l)][l.v as usize] != NONE
    }

    pub fn degree(&self, l: Loc) -> usize {
        self.c.degree(self.piece_of(l), l.v as usize)
    }

    pub fn colour(&self, l: Loc) -> Option<Colour> {
        self.c.colour(self.piece_of(l), l.v as usize)
    }

    /// Colour written in the piece, including expanding colours.
    pub fn piece_colour(&self, l: Loc) -> Option<Colour> {
        self.c.trees[self.piece_of(l)].colour_at(l.v as usize)
    }

    pub fn vertex_id(&self, l: Loc) -> VertexId {
        self.c.trees[self.piece_of(l)].id(l.v as usize)
    }

    pub fn neighbours(&mut self, l: Loc) -> Vec<Loc> {
        let p = self.piece_of(l);
        let fr = self.frames[l.frame as usize];
        let mut out = Vec::with_capacity(3);
        for &w in self.c.trees[p].adj(l.v as usize) {
            if fr.parent != NONE && w == self.c.root[p] {
                out.push(Loc { frame: fr.parent, v: fr.leaf });
            } else {
                out.push(Loc { frame: l.frame, v: w as u32 });
            }
        }
        if self.c.rule[p][l.v as usize] != NONE {
            let f = self.instance(l);
            let q = self.frames[f as usize].piece as usize;
            for &w in &self.c.children[q][self.c.root[q]] {
                out.push(Loc { frame: f, v: w as u32 });
            }
        }
        out
    }

    /// The neighbour of `l` on its path to the root.
    pub fn parent(&self, l: Loc) -> Option<Loc> {
        let p = self.piece_of(l);
        let par = self.c.parent[p][l.v as usize];
        if par == usize::MAX {
            return None;
        }
        let fr = self.frames[l.frame as usize];
        if fr.parent != NONE && par == self.c.root[p] {
            Some(Loc { frame: fr.parent, v: fr.leaf })
        } else {
            Some(Loc { frame: l.frame, v: par as u32 })
        }
    }

    pub fn address(&self, l: Loc) -> Address {
        let mut hops = vec![self.vertex_id(l)];
        let mut f = l.frame;
        while f != 0 {
            let fr = self.frames[f as usize];
            let pl = Loc { frame: fr.parent, v: fr.leaf };
            hops.push(self.vertex_id(pl));
            f = fr.parent;
        }
        hops.reverse();
        Address(hops)
    }

    pub fn locate(&mut self, a: &Address) -> Result<Loc, PresentationError> {
        let bad = || PresentationError::BadAddress(a.clone());
        let mut frame = 0u32;
        let mut cur: Option<Loc> = None;
        for (i, &hop) in a.0.iter().enumerate() {
            if let Some(prev) = cur {
                if !self.is_expanding(prev) {
                    return Err(bad());
                }
                frame = self.instance(prev);
            }
            let p = self.frames[frame as usize].piece as usize;
            let v = self.c.trees[p].idx(hop).ok_or_else(bad)?;
            if i > 0 && v == self.c.root[p] {
                return Err(bad());
            }
            cur = Some(Loc { frame, v: v as u32 });
        }
        cur.ok_or_else(bad)
    }

    /// Multi-source ball of radius `r` around `centres`, never entering `blocked`.
    /// Vertices at distance `r` with further neighbours carry cut marks. Expanded leaves lose
    /// their colour; markers keep theirs. Ids are assigned in BFS order.
    pub fn ball(&mut self, centres: &[Loc], r: usize, blocked: Option<Loc>) -> Expansion {
        let mut seen: HashMap<Loc, u64> = HashMap::new();
        let mut locs: Vec<Loc> = Vec::new();
        let mut dist: Vec<usize> = Vec::new();
        let mut tree = ColoredTree::new();
        let mut queue = VecDeque::new();
        for &c in centres {
            if Some(c) == blocked || seen.contains_key(&c) {
                continue;
            }
            let id = locs.len() as u64;
            seen.insert(c, id);
            locs.push(c);
            dist.push(0);
            tree.add_vertex(VertexId(id)).expect("fresh id");
            queue.push_back(id as usize);
        }
        while let Some(i) = queue.pop_front() {
            let l = locs[i];
            let nbrs = self.neighbours(l);
            let mut further = false;
            for w in nbrs {
                if Some(w) == blocked {
                    continue;
                }
                if let Some(&j) = seen.get(&w) {
                    if !tree.has_edge(VertexId(i as u64), VertexId(j)) {
                        tree.add_edge(VertexId(i as u64), VertexId(j)).expect("tree edge");
                    }
                    continue;
                }
                if dist[i] == r {
                    further = true;
                    continue;
                }
                let id = locs.len() as u64;
                seen.insert(w, id);
                locs.push(w);
                dist.push(dist[i] + 1);
                tree.add_vertex(VertexId(id)).expect("fresh id");
                tree.add_edge(VertexId(i as u64), VertexId(id)).expect("tree edge");
                queue.push_back(id as usize);
            }
            let vid = VertexId(i as u64);
            tree.set_colour(vid, self.colour(l)).expect("vertex");
            if further {
                tree.set_cut(vid, true).expect("vertex");
            }
        }
        if let Some(&c) = centres.first() {
            if let Some(&id) = seen.get(&c) {
                tree.set_root(Some(VertexId(id))).expect("root");
            }
        }
        let addresses = locs.iter().map(|&l| self.address(l)).collect();
        Expansion { tree, addresses, locs, dist }
    }
}

/// A finite piece of the denoted tree. Vertex `i` of `tree` has id `i` and address `addresses[i]`.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub tree: ColoredTree,
    pub addresses: Vec<Address>,
    pub locs: Vec<Loc>,
    /// Distance of each vertex from the centre set.
    pub dist: Vec<usize>,
}

impl Expansion {
    pub fn id_of(&self, a: &Address) -> Option<VertexId> {
        self.addresses.iter().position(|x| x == a).map(|i| VertexId(i as u64))
    }
}

pub struct VertexIter<'c, 'a> {
    nav: Navigator<'c, 'a>,
    queue: VecDeque<(Loc, Option<Loc>)>,
}

impl Iterator for VertexIter<'_, '_> {
    type Item = Address;

    fn next(&mut self) -> Option<Address> {
        let (l, from) = self.queue.pop_front()?;
        for w in self.nav.neighbours(l) {
            if Some(w) != from {
                self.queue.push_back((w, Some(l)));
            }
        }
        Some(self.nav.address(l))
    }
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::*;
    use crate::tree_core::bare::max_bare_path;

    #[test]
    fn depth_zero_is_the_root() {
        let p = ray();
        let c = Compiled::new(&p).unwrap();
        let e = c.expand(0);
        assert_eq!(e.tree.len(), 1);
        assert!(e.tree.is_cut(VertexId(0)));
    }

    #[test]
    fn ray_unrolls_into_a_path() {
        let p = ray();
        let c = Compiled::new(&p).unwrap();
        let e = c.expand(3);
        assert_eq!(e.tree.len(), 4);
        assert_eq!(e.tree.edge_count(), 3);
        assert_eq!(e.tree.cuts().len(), 1);
        assert_eq!(e.tree.colours().len(), 0);
        assert_eq!(e.addresses[3].to_string(), "1/11/11");
    }

    #[test]
    fn ball_around_deep_vertex_of_ray() {
        let p = ray();
        let c = Compiled::new(&p).unwrap();
        let a: Address = "1/11/11/11/11".parse().unwrap();
        let b = c.ball(&a, 2).unwrap();
        assert_eq!(b.tree.len(), 5);
        assert_eq!(max_bare_path(&b.tree), 0);
        assert_eq!(b.tree.cuts().len(), 2);
    }

    #[test]
    fn bad_addresses_are_rejected() {
        let p = ray();
        let c = Compiled::new(&p).unwrap();
        assert!(c.ball(&"0/10".parse().unwrap(), 1).is_err());
        assert!(c.ball(&"1/10".parse().unwrap(), 1).is_err());
        assert!(c.ball(&"7".parse().unwrap(), 1).is_err());
    }

    #[test]
    fn vertex_iter_on_ray() {
        let p = ray();
        let c = Compiled::new(&p).unwrap();
        let got: Vec<String> = c.vertex_iter().take(4).map(|a| a.to_string()).collect();
        assert_eq!(got, vec!["0", "1", "1/11", "1/11/11"]);
    }

    #[test]
    fn vertex_iter_finite() {
        let t = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], Some(1)).unwrap();
        let p = Presentation::finite(t, "p", 0);
        let c = Compiled::new(&p).unwrap();
        assert_eq!(c.vertex_iter().count(), 3);
    }

    #[test]
    fn limited_unfolding_counts() {
        let p = full_binary();
        let c = Compiled::new(&p).unwrap();
        let all = BTreeSet::from([Colour::red(0)]);
        assert_eq!(c.unfold_limited(&all, 0).len(), 2);
        assert_eq!(c.unfold_limited(&all, 1).len(), 4);
        assert_eq!(c.unfold_limited(&all, 2).len(), 8);
        assert_eq!(c.unfold_limited(&BTreeSet::new(), 5).len(), 2);
    }
}
