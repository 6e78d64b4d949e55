use std::collections::{BTreeSet, HashMap};

use super::analysis::StateGraph;
use super::compiled::{Compiled, Loc, Navigator};
use crate::tree_core::canon::{rooted_classes, tag, CanonicalCode, Interner, Labels};
use crate::tree_core::tree::{ColoredTree, VertexId};

/// Classes of depth-limited subtrees below states, shared through one interner.
/// A class computed with `remaining = r` is the subtree cut off at depth `r`, with cut marks on
/// the frontier vertices that have children, exactly as an explicit expansion would show it.
pub struct Truncation<'c, 'a> {
    c: &'c Compiled<'a>,
    pub graph: StateGraph,
    index: HashMap<(usize, usize), usize>,
    memo: HashMap<(usize, usize), u32>,
    pub labels: Labels,
}

impl<'c, 'a> Truncation<'c, 'a> {
    pub fn new(c: &'c Compiled<'a>, labels: Labels) -> Self {
        let graph = StateGraph::new(c);
        let index = graph.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Truncation { c, graph, index, memo: HashMap::new(), labels }
    }

    pub fn state(&self, piece: usize, v: usize) -> usize {
        self.index[&(piece, v)]
    }

    pub fn down_class(&mut self, int: &mut Interner, s: usize, remaining: usize) -> u32 {
        if let Some(&k) = self.memo.get(&(s, remaining)) {
            return k;
        }
        let (p, v) = self.graph.states[s];
        let colour = self.c.colour(p, v);
        let k = if remaining == 0 {
            int.intern(tag(self.labels, colour, !self.graph.down[s].is_empty()), Vec::new())
        } else {
            let kids = self.graph.down[s].clone();
            let ch = kids.into_iter().map(|w| self.down_class(int, w, remaining - 1)).collect();
            int.intern(tag(self.labels, colour, false), ch)
        };
        self.memo.insert((s, remaining), k);
        k
    }

    /// Class of the ball of radius `d` around the root.
    pub fn root_class(&mut self, int: &mut Interner, d: usize) -> u32 {
        self.down_class(int, 0, d)
    }
}

fn join_codes(mut codes: Vec<CanonicalCode>) -> CanonicalCode {
    codes.sort();
    let mut out = Vec::new();
    out.extend_from_slice(&(codes.len() as u32).to_le_bytes());
    for c in codes {
        out.extend_from_slice(&(c.0.len() as u32).to_le_bytes());
        out.extend_from_slice(&c.0);
    }
    CanonicalCode(out)
}

/// What is deleted from the denoted tree before coding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Removal {
    Nothing,
    Vertex(Loc),
    Edge(Loc, Loc),
}

impl Removal {
    fn drops_vertex(self, l: Loc) -> bool {
        self == Removal::Vertex(l)
    }

    fn drops_edge(self, a: Loc, b: Loc) -> bool {
        matches!(self, Removal::Edge(x, y) if (x, y) == (a, b) || (x, y) == (b, a))
    }
}

/// Code of the radius-`d` ball around `core` in the denoted tree minus `removed`.
///
/// `core` must be a connected set of vertices containing the root, so that every neighbour
/// outside it lies farther from the root. Each component is coded from the core vertex whose
/// rooted class comes first canonically; component codes are sorted.
pub fn core_ball_code(
    nav: &mut Navigator<'_, '_>,
    trunc: &mut Truncation<'_, '_>,
    int: &mut Interner,
    core: &[Loc],
    removed: Removal,
    d: usize,
) -> CanonicalCode {
    let labels = trunc.labels;
    let members: Vec<Loc> = core.iter().copied().filter(|&l| !removed.drops_vertex(l)).collect();
    let pos: HashMap<Loc, usize> = members.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let n = members.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ext: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut tags = vec![0u64; n];
    for (i, &l) in members.iter().enumerate() {
        let mut cut = false;
        for w in nav.neighbours(l) {
            if removed.drops_vertex(w) || removed.drops_edge(l, w) {
                continue;
            }
            if let Some(&j) = pos.get(&w) {
                adj[i].push(j);
            } else if d == 0 {
                cut = true;
            } else {
                let s = trunc.state(nav.piece_of(w), w.v as usize);
                ext[i].push(trunc.down_class(int, s, d - 1));
            }
        }
        tags[i] = tag(labels, nav.colour(l), cut);
    }
    let mut comp = vec![usize::MAX; n];
    let mut codes = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut order = vec![s];
        let mut parent = vec![usize::MAX; n];
        comp[s] = s;
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = s;
                    parent[w] = v;
                    order.push(w);
                }
            }
        }
        let mut below: HashMap<usize, u32> = HashMap::with_capacity(order.len());
        for &v in order.iter().rev() {
            let mut ch = ext[v].clone();
            ch.extend(adj[v].iter().filter(|&&w| w != parent[v]).map(|w| below[w]));
            below.insert(v, int.intern(tags[v], ch));
        }
        let mut up: HashMap<usize, u32> = HashMap::new();
        let mut whole = Vec::with_capacity(order.len());
        for &v in &order {
            let kids: Vec<usize> = adj[v].iter().copied().filter(|&w| w != parent[v]).collect();
            let mut all = ext[v].clone();
            all.extend(kids.iter().map(|w| below[w]));
            all.extend(up.get(&v).copied());
            whole.push(int.intern(tags[v], all));
            for &w in &kids {
                let mut rest = ext[v].clone();
                rest.extend(kids.iter().filter(|&&x| x != w).map(|x| below[x]));
                rest.extend(up.get(&v).copied());
                up.insert(w, int.intern(tags[v], rest));
            }
        }
        let best = int.canonical_min(&whole).expect("nonempty component");
        codes.push(int.code(best));
    }
    join_codes(codes)
}

/// The same code computed on an explicit forest, rooting each component at the vertex of
/// `core` inside it that comes first canonically.
pub fn explicit_core_code(forest: &ColoredTree, core: &BTreeSet<VertexId>, labels: Labels) -> CanonicalCode {
    let mut int = Interner::new();
    let mut best: HashMap<usize, Vec<u32>> = HashMap::new();
    let mut comp = vec![usize::MAX; forest.len()];
    for s in 0..forest.len() {
        if comp[s] == usize::MAX {
            let (order, _) = forest.bfs(s, None);
            for v in order {
                comp[v] = s;
            }
        }
    }
    for &c in core {
        let Some(i) = forest.idx(c) else { continue };
        let cls = rooted_classes(forest, i, None, labels, &mut int);
        best.entry(comp[i]).or_default().push(cls[i]);
    }
    let codes = best.values().map(|cands| int.code(int.canonical_min(cands).expect("candidate"))).collect();
    join_codes(codes)
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::*;
    use crate::tree_core::canon::canonical_code;

    #[test]
    fn truncated_root_classes_match_expansions() {
        for p in [ray(), full_binary(), claw()] {
            let c = Compiled::new(&p).unwrap();
            let mut t = Truncation::new(&c, Labels::Full);
            let mut int = Interner::new();
            for d in 0..7 {
                let k = t.root_class(&mut int, d);
                assert_eq!(int.code(k), canonical_code(&c.expand(d).tree).unwrap(), "depth {d}");
            }
        }
    }

    #[test]
    fn core_ball_codes_match_explicit_balls() {
        let p = claw();
        let c = Compiled::new(&p).unwrap();
        let mut nav = c.navigator();
        // Core: the root piece plus the first rule instance.
        let root = nav.root();
        let leaf = nav.neighbours(root)[0];
        let mut core = vec![root, leaf];
        core.extend(nav.neighbours(leaf).into_iter().filter(|&w| w != root));
        let mut trunc = Truncation::new(&c, Labels::Full);
        let mut int = Interner::new();
        for d in 0..5 {
            for removed in [None, Some(leaf), Some(core[2])] {
                let how = removed.map_or(Removal::Nothing, Removal::Vertex);
                let sym = core_ball_code(&mut nav, &mut trunc, &mut int, &core, how, d);
                let e = nav.ball(&core, d, removed);
                let core_ids: BTreeSet<VertexId> = e
                    .locs
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| core.contains(l))
                    .map(|(i, _)| VertexId(i as u64))
                    .collect();
                assert_eq!(sym, explicit_core_code(&e.tree, &core_ids, Labels::Full), "d {d} removed {removed:?}");
            }
            let sym = core_ball_code(&mut nav, &mut trunc, &mut int, &core, Removal::Edge(root, leaf), d);
            let mut e = nav.ball(&core, d, None);
            let id = |l: Loc| VertexId(e.locs.iter().position(|&x| x == l).unwrap() as u64);
            let (a, b) = (id(root), id(leaf));
            e.tree.remove_edge_between(a, b).unwrap();
            let core_ids: BTreeSet<VertexId> = core.iter().map(|&l| id(l)).collect();
            assert_eq!(sym, explicit_core_code(&e.tree, &core_ids, Labels::Full), "edge, d {d}");
        }
    }
}
