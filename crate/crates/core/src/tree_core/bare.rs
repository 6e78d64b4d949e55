use std::collections::BTreeSet;

use super::tree::{ColoredTree, TreeError, VertexId};

/// A maximal bare path. `censored` paths end at a cut mark, so their true length may be larger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarePath {
    pub vertices: Vec<VertexId>,
    pub censored: bool,
}

impl BarePath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BarePathReport {
    /// Longest maximal bare path with no cut-marked endpoint.
    pub max: usize,
    /// Longest observed path ending at a cut mark (a lower bound on its true length).
    pub censored_max: Option<usize>,
}

fn is_stop(t: &ColoredTree, i: usize) -> bool {
    t.adj(i).len() != 2 || t.cut_at(i)
}

/// All maximal bare paths, each listed once from its smaller endpoint.
pub fn maximal_bare_paths(t: &ColoredTree) -> Vec<BarePath> {
    let mut out = Vec::new();
    for s in 0..t.len() {
        if !is_stop(t, s) {
            continue;
        }
        for &first in t.adj(s) {
            let mut verts = vec![s, first];
            let mut prev = s;
            let mut cur = first;
            while !is_stop(t, cur) {
                let next = t.adj(cur).iter().copied().find(|&w| w != prev).expect("degree 2");
                prev = cur;
                cur = next;
                verts.push(cur);
            }
            let (a, b) = (t.id(s), t.id(cur));
            if a < b {
                out.push(BarePath {
                    censored: t.cut_at(s) || t.cut_at(cur),
                    vertices: verts.into_iter().map(|i| t.id(i)).collect(),
                });
            }
        }
    }
    out.sort_by(|x, y| x.vertices.cmp(&y.vertices));
    out
}

pub fn bare_path_report(t: &ColoredTree) -> BarePathReport {
    let mut max = 0;
    let mut censored_max: Option<usize> = None;
    for p in maximal_bare_paths(t) {
        if p.censored {
            censored_max = Some(censored_max.map_or(p.len(), |c| c.max(p.len())));
        } else {
            max = max.max(p.len());
        }
    }
    BarePathReport { max, censored_max }
}

/// Length of the longest maximal bare path lying fully inside `t`.
pub fn max_bare_path(t: &ColoredTree) -> usize {
    bare_path_report(t).max
}

/// Longest maximal bare path of the forest `t - e`.
pub fn bare_path_bound_after_deletion(t: &ColoredTree, a: VertexId, b: VertexId) -> Result<usize, TreeError> {
    Ok(t.remove_edge(a, b)?.iter().map(max_bare_path).max().unwrap_or(0))
}

/// Attaches at every vertex of `at` a fresh path of `len` edges and one fresh leaf.
/// Fresh ids start above the largest id of `t`; the attachment vertices lose their colours.
pub fn bare_extension(t: &ColoredTree, at: &BTreeSet<VertexId>, len: usize) -> Result<ColoredTree, TreeError> {
    let mut out = t.clone();
    let mut next = t.max_id().map_or(0, |m| m.0 + 1);
    let mut fresh = || {
        next += 1;
        VertexId(next - 1)
    };
    for &l in at {
        if !out.contains(l) {
            return Err(TreeError::UnknownVertex(l));
        }
        out.set_colour(l, None)?;
        let leaf = fresh();
        out.add_vertex(leaf)?;
        out.add_edge(l, leaf)?;
        let mut prev = l;
        for _ in 0..len {
            let v = fresh();
            out.add_vertex(v)?;
            out.add_edge(prev, v)?;
            prev = v;
        }
    }
    Ok(out)
}

/// A component left by [`bare_decompose`].
#[derive(Clone, Debug)]
pub struct DecomposedComponent {
    pub tree: ColoredTree,
    pub touches_cut: bool,
}

/// Deletes the interior vertices of every maximal bare path longer than `k` and returns
/// what is left. Censored paths are deleted when their observed length already exceeds `k`.
pub fn bare_decompose(t: &ColoredTree, k: usize) -> Vec<DecomposedComponent> {
    let mut keep = vec![true; t.len()];
    for p in maximal_bare_paths(t) {
        if p.len() > k {
            for v in &p.vertices[1..p.vertices.len() - 1] {
                keep[t.idx(*v).expect("path vertex")] = false;
            }
        }
    }
    t.induced_components(&keep)
        .into_iter()
        .map(|c| DecomposedComponent { touches_cut: c.has_cuts(), tree: c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n_edges: usize) -> ColoredTree {
        let edges: Vec<(u64, u64)> = (1..=n_edges as u64).map(|i| (i - 1, i)).collect();
        ColoredTree::from_edges(n_edges + 1, &edges, Some(0)).unwrap()
    }

    #[test]
    fn path_lengths() {
        for n in 0..8 {
            assert_eq!(max_bare_path(&path(n)), n);
        }
    }

    #[test]
    fn star_has_unit_paths() {
        let t = ColoredTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)], None).unwrap();
        assert_eq!(max_bare_path(&t), 1);
        assert_eq!(maximal_bare_paths(&t).len(), 3);
    }

    #[test]
    fn deleting_middle_edge_of_six_path() {
        let t = path(6);
        let after = bare_path_bound_after_deletion(&t, VertexId(3), VertexId(4)).unwrap();
        assert_eq!(after, 3);
        assert!(after <= 2 * max_bare_path(&t));
    }

    #[test]
    fn censored_paths_are_reported_apart() {
        let mut t = path(5);
        t.set_cut(VertexId(5), true).unwrap();
        let r = bare_path_report(&t);
        assert_eq!(r.max, 0);
        assert_eq!(r.censored_max, Some(5));
    }

    #[test]
    fn decompose_long_path() {
        let comps = bare_decompose(&path(10), 3);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.tree.len() == 1));
    }

    #[test]
    fn decompose_two_stars() {
        // Stars centred at 0 and 7, joined by the 7-edge path 0..7.
        let mut edges: Vec<(u64, u64)> = (1..=7).map(|i| (i - 1, i)).collect();
        edges.extend([(0, 8), (0, 9), (7, 10), (7, 11)]);
        let t = ColoredTree::from_edges(12, &edges, None).unwrap();
        let comps = bare_decompose(&t, 6);
        let mut sizes: Vec<usize> = comps.iter().map(|c| c.tree.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![3, 3]);
    }

    #[test]
    fn extension_shape() {
        let t = path(2);
        let e = bare_extension(&t, &BTreeSet::from([VertexId(0)]), 3).unwrap();
        assert_eq!(e.len(), 3 + 1 + 3);
        assert_eq!(e.degree(VertexId(0)), 3);
        assert_eq!(max_bare_path(&e), 3);
        let e0 = bare_extension(&t, &BTreeSet::from([VertexId(0)]), 0).unwrap();
        assert_eq!(e0.len(), 4);
    }
}
