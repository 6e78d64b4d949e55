use std::collections::{BTreeMap, BTreeSet};

use hypotree::tree_core::embed::{embed_search, embedding_images, image_summary, is_embedding, EmbedOptions, EmbedOutcome, RootMode};
use hypotree::tree_core::tree::{ColoredTree, VertexId};
use proptest::prelude::*;

fn tree_from_parents(parents: &[usize]) -> ColoredTree {
    let edges: Vec<(u64, u64)> = parents.iter().enumerate().map(|(i, &p)| ((p % (i + 1)) as u64, i as u64 + 1)).collect();
    ColoredTree::from_edges(parents.len() + 1, &edges, Some(0)).unwrap()
}

/// All embeddings, by trying every injective assignment in pattern BFS order.
fn brute_force(p: &ColoredTree, h: &ColoredTree, preserve: bool) -> Vec<BTreeMap<VertexId, VertexId>> {
    let (order, parent) = p.bfs(p.root_idx().unwrap(), None);
    let mut out = Vec::new();
    let mut img = vec![usize::MAX; p.len()];
    fn go(
        i: usize,
        order: &[usize],
        parent: &[usize],
        p: &ColoredTree,
        h: &ColoredTree,
        preserve: bool,
        img: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<VertexId, VertexId>>,
    ) {
        if i == order.len() {
            out.push((0..p.len()).map(|v| (p.id(v), h.id(img[v]))).collect());
            return;
        }
        let v = order[i];
        let cands: Vec<usize> = if i == 0 {
            if preserve {
                vec![h.root_idx().unwrap()]
            } else {
                (0..h.len()).collect()
            }
        } else {
            h.adj(img[parent[v]]).to_vec()
        };
        for c in cands {
            if img.contains(&c) {
                continue;
            }
            img[v] = c;
            go(i + 1, order, parent, p, h, preserve, img, out);
            img[v] = usize::MAX;
        }
    }
    go(0, &order, &parent, p, h, preserve, &mut img, &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn search_agrees_with_brute_force(
        pp in prop::collection::vec(0usize..16, 0..7),
        hp in prop::collection::vec(0usize..16, 0..11),
        preserve in any::<bool>(),
    ) {
        let p = tree_from_parents(&pp);
        let h = tree_from_parents(&hp);
        let mode = if preserve { RootMode::Preserve } else { RootMode::Free };
        let all = brute_force(&p, &h, preserve);
        let r = embed_search(&p, &h, EmbedOptions { root_mode: mode, budget: 1_000_000 });
        match r.outcome {
            EmbedOutcome::Found(m) => {
                prop_assert!(is_embedding(&p, &h, &m));
                if preserve {
                    prop_assert_eq!(m[&p.root().unwrap()], h.root().unwrap());
                }
            }
            EmbedOutcome::NoEmbedding => prop_assert!(all.is_empty()),
            EmbedOutcome::Exhausted => prop_assert!(false, "tiny search ran out of budget"),
        }
        let (images, _) = embedding_images(&p, &h, EmbedOptions { root_mode: mode, budget: 1_000_000 });
        let images = images.unwrap();
        let mut want: BTreeMap<VertexId, BTreeSet<VertexId>> = p.ids().iter().map(|&v| (v, BTreeSet::new())).collect();
        for m in &all {
            for (a, b) in m {
                want.get_mut(a).unwrap().insert(*b);
            }
        }
        let (summary, _) = image_summary(&p, &h, EmbedOptions { root_mode: mode, budget: 1_000_000 });
        let summary = summary.unwrap();
        let root_want = want.get(&p.root().unwrap()).cloned().unwrap_or_default();
        prop_assert_eq!(&summary.root, &root_want);
        let used: BTreeSet<VertexId> = want.values().flatten().copied().collect();
        prop_assert_eq!(summary.hit.keys().copied().collect::<BTreeSet<_>>(), used);
        for (hv, pv) in &summary.hit {
            prop_assert!(want[pv].contains(hv));
        }
        prop_assert_eq!(images, want);
    }
}
