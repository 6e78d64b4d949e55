use std::collections::HashMap;

use super::analysis::StateGraph;
use super::compiled::Compiled;
use super::{Presentation, PresentationError};
use crate::tree_core::canon::{tag, Labels};
use crate::tree_core::tree::VertexId;

/// Isomorphism classes of the subtrees below states of one or more presentations, found by
/// partition refinement. New trees built from known classes can be classified afterwards.
pub struct ClassSystem {
    pub labels: Labels,
    sig: HashMap<(u64, Box<[u32]>), u32>,
    next: u32,
}

impl ClassSystem {
    /// Classifies every state of every graph. Returns the class of each state, per graph.
    pub fn build(graphs: &[(&Compiled<'_>, &StateGraph)], labels: Labels) -> (ClassSystem, Vec<Vec<u32>>) {
        let mut offset = Vec::with_capacity(graphs.len());
        let mut total = 0;
        for (_, g) in graphs {
            offset.push(total);
            total += g.len();
        }
        let mut tags = Vec::with_capacity(total);
        let mut kids: Vec<Vec<usize>> = Vec::with_capacity(total);
        for (gi, (c, g)) in graphs.iter().enumerate() {
            for (s, &(p, v)) in g.states.iter().enumerate() {
                tags.push(tag(labels, c.colour(p, v), false));
                kids.push(g.down[s].iter().map(|&w| w + offset[gi]).collect());
            }
        }
        let mut class: Vec<u32> = {
            let mut m: HashMap<u64, u32> = HashMap::new();
            tags.iter()
                .map(|t| {
                    let n = m.len() as u32;
                    *m.entry(*t).or_insert(n)
                })
                .collect()
        };
        let mut count = class.iter().copied().max().map_or(0, |m| m + 1);
        let sig = loop {
            let mut m: HashMap<(u64, Box<[u32]>), u32> = HashMap::new();
            let next: Vec<u32> = (0..total)
                .map(|s| {
                    let mut ch: Vec<u32> = kids[s].iter().map(|&w| class[w]).collect();
                    ch.sort_unstable();
                    let n = m.len() as u32;
                    *m.entry((tags[s], ch.into_boxed_slice())).or_insert(n)
                })
                .collect();
            let new_count = m.len() as u32;
            if new_count == count {
                // Stable: each signature in terms of the current classes names one class.
                let mut sig = HashMap::with_capacity(m.len());
                for s in 0..total {
                    let mut ch: Vec<u32> = kids[s].iter().map(|&w| class[w]).collect();
                    ch.sort_unstable();
                    sig.insert((tags[s], ch.into_boxed_slice()), class[s]);
                }
                break sig;
            }
            count = new_count;
            class = next;
        };
        let per_graph = graphs
            .iter()
            .enumerate()
            .map(|(gi, (_, g))| class[offset[gi]..offset[gi] + g.len()].to_vec())
            .collect();
        (ClassSystem { labels, sig, next: count }, per_graph)
    }

    /// The class of a tree whose root has tag `tag` and whose children have the given classes.
    pub fn classify(&mut self, tag: u64, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        let key = (tag, children.into_boxed_slice());
        if let Some(&c) = self.sig.get(&key) {
            return c;
        }
        let c = self.next;
        self.next += 1;
        self.sig.insert(key, c);
        c
    }
}

/// Whether the two denoted rooted trees are isomorphic, colours included.
pub fn presentations_equivalent(a: &Presentation, b: &Presentation) -> Result<bool, PresentationError> {
    presentations_equivalent_with(a, b, Labels::Full)
}

pub fn presentations_equivalent_with(a: &Presentation, b: &Presentation, labels: Labels) -> Result<bool, PresentationError> {
    let ca = Compiled::new(a)?;
    let cb = Compiled::new(b)?;
    let ga = StateGraph::new(&ca);
    let gb = StateGraph::new(&cb);
    let (_, cls) = ClassSystem::build(&[(&ca, &ga), (&cb, &gb)], labels);
    Ok(cls[0][0] == cls[1][0])
}

/// Class of the denoted tree rerooted at each root-piece vertex, in `sys`.
pub fn rerooted_classes(
    c: &Compiled<'_>,
    g: &StateGraph,
    state_class: &[u32],
    sys: &mut ClassSystem,
) -> Vec<(VertexId, u32)> {
    let index: HashMap<(usize, usize), usize> = g.states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let t = c.trees[0];
    let labels = sys.labels;
    let down_classes = |v: usize| -> Vec<((usize, usize), u32)> {
        c.down_children(0, v).into_iter().map(|s| (s, state_class[index[&s]])).collect()
    };
    // up[v]: class of the part beyond the edge from v to its parent, rooted at the parent.
    let mut up: Vec<Option<u32>> = vec![None; t.len()];
    let mut out = Vec::with_capacity(t.len());
    for &v in &c.order[0] {
        let dc = down_classes(v);
        let mut all: Vec<u32> = dc.iter().map(|x| x.1).collect();
        all.extend(up[v]);
        let tv = tag(labels, c.colour(0, v), false);
        out.push((t.id(v), sys.classify(tv, all)));
        for &w in &c.children[0][v] {
            let mut rest: Vec<u32> = Vec::with_capacity(dc.len());
            let mut skipped = false;
            for &(x, cl) in &dc {
                if x == (0, w) && !skipped {
                    skipped = true;
                } else {
                    rest.push(cl);
                }
            }
            rest.extend(up[v]);
            up[w] = Some(sys.classify(tv, rest));
        }
    }
    out.sort();
    out
}

/// Root-piece vertices of `b` at which `b`, rerooted, is isomorphic to `a` rooted at its root.
pub fn root_images(a: &Presentation, b: &Presentation, labels: Labels) -> Result<Vec<VertexId>, PresentationError> {
    let ca = Compiled::new(a)?;
    let cb = Compiled::new(b)?;
    let ga = StateGraph::new(&ca);
    let gb = StateGraph::new(&cb);
    let (mut sys, cls) = ClassSystem::build(&[(&ca, &ga), (&cb, &gb)], labels);
    let target = cls[0][0];
    Ok(rerooted_classes(&cb, &gb, &cls[1], &mut sys)
        .into_iter()
        .filter(|&(_, c)| c == target)
        .map(|(v, _)| v)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::super::Piece;
    use super::*;
    use crate::tree_core::canon::canonical_code;
    use crate::tree_core::tree::{ColoredTree, Colour};

    /// The root piece with every expanding leaf replaced by one copy of its rule piece.
    fn unfolded_once(p: &Presentation) -> Presentation {
        let rp = &p.root_piece().tree;
        let mut t = rp.clone();
        let mut next = rp.max_id().unwrap().0 + 1000;
        for (leaf, col) in rp.colours() {
            let Some(rule) = p.rule_piece(col) else { continue };
            t.set_colour(leaf, None).unwrap();
            let rt = &rule.tree;
            let base = next;
            next += rt.max_id().unwrap().0 + 1;
            let map = |v: VertexId| if Some(v) == rt.root() { leaf } else { VertexId(base + v.0) };
            for v in rt.ids() {
                if Some(*v) != rt.root() {
                    t.add_vertex(map(*v)).unwrap();
                    t.set_colour(map(*v), rt.colour(*v)).unwrap();
                }
            }
            for (a, b) in rt.edges() {
                t.add_edge(map(a), map(b)).unwrap();
            }
        }
        let mut q = p.clone();
        q.pieces.insert("unfolded".into(), Piece::new(t, "unfolded"));
        q.root = "unfolded".into();
        q
    }

    #[test]
    fn reflexive_and_unfolding() {
        for p in [ray(), full_binary(), claw()] {
            assert!(presentations_equivalent(&p, &p).unwrap());
            let q = unfolded_once(&p);
            assert!(presentations_equivalent(&p, &q).unwrap());
            let (a, b) = (Compiled::new(&p).unwrap(), Compiled::new(&q).unwrap());
            for d in 0..8 {
                assert_eq!(canonical_code(&a.expand(d).tree).unwrap(), canonical_code(&b.expand(d).tree).unwrap());
            }
        }
    }

    #[test]
    fn different_trees_differ() {
        assert!(!presentations_equivalent(&ray(), &claw()).unwrap());
        assert!(!presentations_equivalent(&ray(), &full_binary()).unwrap());
        // The claw spine without its markers is still not the ray.
        assert!(!presentations_equivalent_with(&ray(), &claw(), Labels::Blind).unwrap());
    }

    #[test]
    fn marker_colour_matters_only_with_full_labels() {
        let a = claw();
        let mut b = claw();
        b.pieces.get_mut("claw").unwrap().tree.set_colour(VertexId(3), Some(Colour::red(2))).unwrap();
        assert!(!presentations_equivalent(&a, &b).unwrap());
        assert!(presentations_equivalent_with(&a, &b, Labels::Blind).unwrap());
    }

    #[test]
    fn finite_root_images() {
        // Path 0-1-2: rooted at 0 it matches rerooting at either end.
        let t = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], Some(0)).unwrap();
        let p = Presentation::finite(t.clone(), "p", 0);
        let imgs = root_images(&p, &p, Labels::Blind).unwrap();
        assert_eq!(imgs, vec![VertexId(0), VertexId(2)]);
    }

    #[test]
    fn ray_reroots_only_at_its_end() {
        let p = ray();
        let imgs = root_images(&p, &p, Labels::Blind).unwrap();
        assert_eq!(imgs, vec![VertexId(0)]);
    }
}
