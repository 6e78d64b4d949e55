use std::collections::{BTreeMap, VecDeque};

use super::canon::{rooted_classes, CanonicalCode, Interner, Labels};
use super::tree::{ColoredTree, DirectedEdge, TreeError, VertexId};

/// Root-preserving, colour-preserving isomorphism, if one exists.
pub fn rooted_iso(a: &ColoredTree, b: &ColoredTree) -> Option<BTreeMap<VertexId, VertexId>> {
    let (ra, rb) = (a.root_idx()?, b.root_idx()?);
    rooted_iso_at(a, ra, b, rb, Labels::Full)
}

/// Isomorphism of `a` rooted at index `ra` onto `b` rooted at `rb`.
pub fn rooted_iso_at(
    a: &ColoredTree,
    ra: usize,
    b: &ColoredTree,
    rb: usize,
    labels: Labels,
) -> Option<BTreeMap<VertexId, VertexId>> {
    if a.len() != b.len() {
        return None;
    }
    let mut int = Interner::new();
    let ca = rooted_classes(a, ra, None, labels, &mut int);
    let cb = rooted_classes(b, rb, None, labels, &mut int);
    if ca[ra] != cb[rb] {
        return None;
    }
    let (_, pa) = a.bfs(ra, None);
    let (_, pb) = b.bfs(rb, None);
    let mut map = BTreeMap::new();
    let mut queue = VecDeque::from([(ra, rb)]);
    while let Some((x, y)) = queue.pop_front() {
        map.insert(a.id(x), b.id(y));
        let mut xs: Vec<(u32, usize)> =
            a.adj(x).iter().filter(|&&w| w != pa[x]).map(|&w| (ca[w], w)).collect();
        let mut ys: Vec<(u32, usize)> =
            b.adj(y).iter().filter(|&&w| w != pb[y]).map(|&w| (cb[w], w)).collect();
        xs.sort_unstable();
        ys.sort_unstable();
        for ((cx, wx), (cy, wy)) in xs.into_iter().zip(ys) {
            debug_assert_eq!(cx, cy);
            queue.push_back((wx, wy));
        }
    }
    Some(map)
}

/// Indices of the one or two centre vertices of a tree.
pub fn centres(t: &ColoredTree) -> Vec<usize> {
    let n = t.len();
    if n == 0 {
        return Vec::new();
    }
    let mut deg: Vec<usize> = (0..n).map(|i| t.adj(i).len()).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&i| deg[i] <= 1).collect();
    let mut remaining = n;
    let mut removed = vec![false; n];
    while remaining > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            remaining -= 1;
            for &w in t.adj(v) {
                if !removed[w] {
                    deg[w] -= 1;
                    if deg[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    let mut c: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    c.sort_by_key(|&i| t.id(i));
    c
}

/// Colour-preserving isomorphism between unrooted trees, via their centres.
pub fn unrooted_iso(a: &ColoredTree, b: &ColoredTree) -> Option<BTreeMap<VertexId, VertexId>> {
    unrooted_iso_with(a, b, Labels::Full)
}

pub fn unrooted_iso_with(
    a: &ColoredTree,
    b: &ColoredTree,
    labels: Labels,
) -> Option<BTreeMap<VertexId, VertexId>> {
    if a.len() != b.len() {
        return None;
    }
    if a.is_empty() {
        return Some(BTreeMap::new());
    }
    let ca = centres(a);
    let cb = centres(b);
    if ca.len() != cb.len() {
        return None;
    }
    cb.iter().find_map(|&y| rooted_iso_at(a, ca[0], b, y, labels))
}

/// Canonical code of an unrooted tree: the smallest rooted code over its centres.
pub fn unrooted_code(t: &ColoredTree, labels: Labels) -> CanonicalCode {
    let mut best: Option<CanonicalCode> = None;
    for c in centres(t) {
        let mut int = Interner::new();
        let class = rooted_classes(t, c, None, labels, &mut int);
        let code = int.code(class[c]);
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    let mut out = vec![0xC0u8];
    if let Some(b) = best {
        out.extend(b.0);
    }
    CanonicalCode(out)
}

/// Canonical code of a finite forest: the sorted multiset of its component codes.
pub fn forest_code(forest: &[ColoredTree], labels: Labels) -> CanonicalCode {
    let mut codes: Vec<CanonicalCode> = forest.iter().map(|t| unrooted_code(t, labels)).collect();
    codes.sort();
    let mut out = Vec::new();
    out.extend_from_slice(&(codes.len() as u32).to_le_bytes());
    for c in codes {
        out.extend_from_slice(&(c.0.len() as u32).to_le_bytes());
        out.extend(c.0);
    }
    CanonicalCode(out)
}

/// The component of `t - e` containing `e.head`, rooted at `e.head`.
pub fn component_of(t: &ColoredTree, e: DirectedEdge) -> Result<ColoredTree, TreeError> {
    if !t.has_edge(e.tail, e.head) {
        return Err(TreeError::NotAnEdge(format!("{}->{}", e.tail, e.head)));
    }
    let head = t.idx(e.head).expect("edge endpoint");
    let tail = t.idx(e.tail).expect("edge endpoint");
    let (order, _) = t.bfs(head, Some(tail));
    let mut keep = vec![false; t.len()];
    for &v in &order {
        keep[v] = true;
    }
    let mut comps = t.induced_components(&keep);
    let mut c = comps.pop().expect("one component");
    c.set_root(Some(e.head))?;
    Ok(c)
}

/// Checks that `map` is a bijection `a -> b` preserving adjacency, colours and cut marks.
pub fn is_isomorphism(a: &ColoredTree, b: &ColoredTree, map: &BTreeMap<VertexId, VertexId>) -> bool {
    if map.len() != a.len() || a.len() != b.len() {
        return false;
    }
    let mut image: Vec<VertexId> = map.values().copied().collect();
    image.sort_unstable();
    image.dedup();
    if image.len() != b.len() || !image.iter().all(|&v| b.contains(v)) {
        return false;
    }
    for (&x, &y) in map {
        if !a.contains(x) || a.colour(x) != b.colour(y) || a.is_cut(x) != b.is_cut(y) {
            return false;
        }
    }
    a.edges().iter().all(|&(x, y)| b.has_edge(map[&x], map[&y])) && a.edge_count() == b.edge_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::canon::canonical_code;
    use crate::tree_core::tree::Colour;

    fn path(n: usize) -> ColoredTree {
        let edges: Vec<(u64, u64)> = (1..n as u64).map(|i| (i - 1, i)).collect();
        ColoredTree::from_edges(n, &edges, Some(0)).unwrap()
    }

    #[test]
    fn self_iso_is_found() {
        let t = path(5);
        let m = rooted_iso(&t, &t).unwrap();
        assert!(is_isomorphism(&t, &t, &m));
    }

    #[test]
    fn end_rooted_vs_centre_rooted_path() {
        let a = path(3);
        let b = a.rerooted(VertexId(1)).unwrap();
        assert!(rooted_iso(&a, &b).is_none());
        assert!(unrooted_iso(&a, &b).is_some());
    }

    #[test]
    fn extra_leaf_breaks_iso() {
        let a = path(4);
        let mut b = path(4);
        b.add_vertex(VertexId(9)).unwrap();
        b.add_edge(VertexId(1), VertexId(9)).unwrap();
        assert!(unrooted_iso(&a, &b).is_none());
    }

    #[test]
    fn colours_are_respected() {
        let mut a = path(3);
        a.set_colour(VertexId(2), Some(Colour::red(1))).unwrap();
        let mut b = path(3);
        b.set_colour(VertexId(2), Some(Colour::blue(1))).unwrap();
        assert!(unrooted_iso(&a, &b).is_none());
        assert!(unrooted_iso_with(&a, &b, Labels::Blind).is_some());
    }

    #[test]
    fn component_of_path_end() {
        let t = path(3);
        let c = component_of(&t, DirectedEdge::new(VertexId(1), VertexId(2))).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.root(), Some(VertexId(2)));
        assert!(component_of(&t, DirectedEdge::new(VertexId(0), VertexId(2))).is_err());
    }

    #[test]
    fn star_leaf_component() {
        let t = ColoredTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)], None).unwrap();
        let c = component_of(&t, DirectedEdge::new(VertexId(0), VertexId(3))).unwrap();
        assert_eq!(c.sorted_ids(), vec![VertexId(3)]);
        assert_eq!(canonical_code(&c).unwrap(), crate::tree_core::canon::atom_code());
    }

    #[test]
    fn two_centre_trees() {
        let t = path(4);
        assert_eq!(centres(&t).len(), 2);
        let shuffled = t.relabel(|v| VertexId(10 - v.0)).unwrap();
        assert!(unrooted_iso(&t, &shuffled).is_some());
        assert_eq!(unrooted_code(&t, Labels::Full), unrooted_code(&shuffled, Labels::Full));
    }
}
