use std::collections::BTreeSet;

use hypotree::tree_core::bare::{bare_path_bound_after_deletion, max_bare_path};
use hypotree::tree_core::binary::{binary_tree, max_binary_height};
use hypotree::tree_core::canon::{canonical_code, canonical_code_with, Labels};
use hypotree::tree_core::deck::deck_compare;
use hypotree::tree_core::iso::{component_of, rooted_iso, unrooted_iso};
use hypotree::tree_core::tree::{ColoredTree, Colour, DirectedEdge, VertexId};
use proptest::prelude::*;

fn tree_from_parents(parents: &[usize], root: Option<u64>) -> ColoredTree {
    let edges: Vec<(u64, u64)> = parents.iter().enumerate().map(|(i, &p)| ((p % (i + 1)) as u64, i as u64 + 1)).collect();
    ColoredTree::from_edges(parents.len() + 1, &edges, root).unwrap()
}

fn permuted(t: &ColoredTree, perm: &[u64]) -> ColoredTree {
    t.relabel(|v| VertexId(perm[v.0 as usize])).unwrap()
}

/// Whether some bijection of the vertex lists maps edges onto edges (graphs on equal vertex counts).
fn brute_iso(a: &ColoredTree, b: &ColoredTree) -> bool {
    if a.len() != b.len() || a.edge_count() != b.edge_count() {
        return false;
    }
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if a.edges().iter().all(|&(x, y)| b.has_edge(b.id(perm[a.idx(x).unwrap()]), b.id(perm[a.idx(y).unwrap()]))) {
            return true;
        }
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else { return false };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// The graph `t - v` as one (possibly disconnected) vertex set.
fn card(t: &ColoredTree, v: VertexId) -> ColoredTree {
    let mut c = ColoredTree::new();
    for &w in t.ids() {
        if w != v {
            c.add_vertex(w).unwrap();
        }
    }
    for (a, b) in t.edges() {
        if a != v && b != v {
            c.add_edge(a, b).unwrap();
        }
    }
    c
}

fn shuffle(seed: &[u64], n: usize) -> Vec<u64> {
    let mut p: Vec<u64> = (0..n as u64).map(|i| i + 100).collect();
    for (i, s) in seed.iter().enumerate().take(n) {
        let j = (*s as usize) % (n - i) + i;
        p.swap(i, j);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn codes_survive_relabelling(parents in prop::collection::vec(0usize..40, 0..25), seed in prop::collection::vec(any::<u64>(), 26)) {
        let t = tree_from_parents(&parents, Some(0));
        let u = permuted(&t, &shuffle(&seed, t.len()));
        prop_assert_eq!(canonical_code(&t).unwrap(), canonical_code(&u).unwrap());
        prop_assert!(rooted_iso(&t, &u).is_some());
    }

    #[test]
    fn code_equality_matches_rooted_isomorphism(a in prop::collection::vec(0usize..3, 0..7), b in prop::collection::vec(0usize..3, 0..7)) {
        let (ta, tb) = (tree_from_parents(&a, Some(0)), tree_from_parents(&b, Some(0)));
        let same = canonical_code(&ta).unwrap() == canonical_code(&tb).unwrap();
        prop_assert_eq!(same, rooted_iso(&ta, &tb).is_some());
    }

    #[test]
    fn flipping_one_colour_changes_the_code(parents in prop::collection::vec(0usize..40, 0..20), pick in any::<prop::sample::Index>()) {
        let t = tree_from_parents(&parents, Some(0));
        let mut u = t.clone();
        let v = t.id(pick.index(t.len()));
        let leafish = t.degree(v) <= 1;
        prop_assume!(leafish);
        u.set_colour(v, Some(Colour::red(7))).unwrap();
        prop_assert_ne!(canonical_code(&t).unwrap(), canonical_code(&u).unwrap());
        prop_assert_eq!(canonical_code_with(&t, Labels::Blind).unwrap(), canonical_code_with(&u, Labels::Blind).unwrap());
    }

    #[test]
    fn deleting_an_edge_at_most_doubles_bare_paths(parents in prop::collection::vec(0usize..40, 1..40)) {
        let t = tree_from_parents(&parents, None);
        let k = max_bare_path(&t);
        for (a, b) in t.edges() {
            prop_assert!(bare_path_bound_after_deletion(&t, a, b).unwrap() <= 2 * k);
        }
    }

    #[test]
    fn components_of_an_edge_partition_the_tree(parents in prop::collection::vec(0usize..40, 1..30), pick in any::<prop::sample::Index>()) {
        let t = tree_from_parents(&parents, None);
        let edges = t.edges();
        let (x, y) = edges[pick.index(edges.len())];
        let a: BTreeSet<VertexId> = component_of(&t, DirectedEdge::new(x, y)).unwrap().ids().iter().copied().collect();
        let b: BTreeSet<VertexId> = component_of(&t, DirectedEdge::new(y, x)).unwrap().ids().iter().copied().collect();
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(a.len() + b.len(), t.len());
    }

    #[test]
    fn decks_agree_with_brute_force(a in prop::collection::vec(0usize..8, 2..8), b in prop::collection::vec(0usize..8, 8)) {
        let (ta, tb) = (tree_from_parents(&a, None), tree_from_parents(&b[..a.len()], None));
        let iso = brute_iso(&ta, &tb);
        prop_assert_eq!(iso, unrooted_iso(&ta, &tb).is_some());
        let deck = deck_compare(&ta, &tb).unwrap();
        // Trees on at least three vertices are determined by their decks.
        prop_assert_eq!(deck.is_some(), iso);
        if let Some(phi) = deck {
            for (v, w) in phi {
                prop_assert!(brute_iso(&card(&ta, v), &card(&tb, w)));
            }
        }
    }
}

#[test]
fn binary_trees_follow_the_size_law() {
    for k in 1..=12u32 {
        let t = binary_tree(k, 5);
        assert_eq!(t.len(), (1usize << k) - 1, "height {k}");
        assert_eq!(t.leaves().len(), if k == 1 { 1 } else { 1 << (k - 1) });
        let root = t.root().unwrap();
        if k > 1 {
            assert_eq!(t.degree(root), 2);
        }
        for &v in t.ids() {
            if v != root && t.degree(v) != 1 {
                assert_eq!(t.degree(v), 3);
            }
        }
        assert_eq!(max_binary_height(&t), k as usize);
    }
}

#[test]
fn lemma_suite_is_clean_for_several_seeds() {
    for seed in [0, 1, 2] {
        let r = hypotree::cli::lemma_suite(seed, 500, 40);
        assert!(r.passed(), "{}", r.summary());
        assert!(r.edges > 5000);
    }
}
