use super::tree::{ColoredTree, VertexId};

/// The binary tree of height `k >= 1` on ids `first .. first + 2^k - 1`, rooted at `first`,
/// laid out heap-style (children of `first + i` are `first + 2i + 1` and `first + 2i + 2`).
pub fn binary_tree(k: u32, first: u64) -> ColoredTree {
    assert!(k >= 1, "binary tree height starts at 1");
    let n = (1u64 << k) - 1;
    let mut t = ColoredTree::with_capacity(n as usize);
    for i in 0..n {
        t.add_vertex(VertexId(first + i)).expect("fresh id");
    }
    for i in 1..n {
        t.add_edge(VertexId(first + (i - 1) / 2), VertexId(first + i)).expect("tree edge");
    }
    t.set_root(Some(VertexId(first))).expect("root present");
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryHeightReport {
    /// Largest height found (a lower bound when `censored`).
    pub height: usize,
    /// Every binary tree of that height touches a cut mark.
    pub censored: bool,
}

fn top_two(vals: impl Iterator<Item = usize>) -> (usize, usize, usize) {
    let (mut a, mut b, mut n) = (0, 0, 0);
    for v in vals {
        n += 1;
        if v > a {
            b = a;
            a = v;
        } else if v > b {
            b = v;
        }
    }
    (a, b, n)
}

fn head(second: usize, count: usize) -> usize {
    if count >= 2 {
        1 + second
    } else {
        1
    }
}

/// Height of the largest binary tree that is a subgraph of the forest induced by `keep`.
fn best_height(t: &ColoredTree, keep: &[bool]) -> usize {
    let n = t.len();
    let mut best = 0;
    let mut seen = vec![false; n];
    let mut down = vec![0usize; n];
    let mut up = vec![0usize; n];
    let mut par = vec![usize::MAX; n];
    for s in 0..n {
        if !keep[s] || seen[s] {
            continue;
        }
        let mut order = vec![s];
        seen[s] = true;
        par[s] = usize::MAX;
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &w in t.adj(v) {
                if keep[w] && !seen[w] {
                    seen[w] = true;
                    par[w] = v;
                    order.push(w);
                }
            }
        }
        let p = |v: usize| (par[v] != usize::MAX).then_some(par[v]);
        for &v in order.iter().rev() {
            let (_, b, c) = top_two(
                t.adj(v).iter().filter(|&&w| keep[w] && Some(w) != p(v)).map(|&w| down[w]),
            );
            down[v] = head(b, c);
        }
        for &v in &order {
            // Values of every neighbour as seen from v.
            let mut vals: Vec<(usize, usize)> = t
                .adj(v)
                .iter()
                .filter(|&&w| keep[w] && Some(w) != p(v))
                .map(|&w| (w, down[w]))
                .collect();
            if let Some(pv) = p(v) {
                vals.push((pv, up[v]));
            }
            let (_, b, c) = top_two(vals.iter().map(|x| x.1));
            best = best.max(head(b, c));
            for &(w, _) in vals.iter().filter(|(w, _)| Some(*w) != p(v)) {
                let (_, b2, c2) = top_two(vals.iter().filter(|x| x.0 != w).map(|x| x.1));
                up[w] = head(b2, c2);
            }
        }
    }
    best
}

pub fn binary_height_report(t: &ColoredTree) -> BinaryHeightReport {
    let all = best_height(t, &vec![true; t.len()]);
    let free: Vec<bool> = (0..t.len()).map(|i| !t.cut_at(i)).collect();
    let inner = best_height(t, &free);
    BinaryHeightReport { height: all, censored: inner < all }
}

/// The largest `k` such that the binary tree of height `k` is a subgraph of `t`.
pub fn max_binary_height(t: &ColoredTree) -> usize {
    binary_height_report(t).height
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_of_generated_trees() {
        for k in 1..=8 {
            let t = binary_tree(k, 100);
            assert_eq!(t.len(), (1 << k) - 1);
            assert_eq!(max_binary_height(&t), k as usize);
        }
    }

    #[test]
    fn paths_have_height_two() {
        let one = ColoredTree::from_edges(1, &[], None).unwrap();
        assert_eq!(max_binary_height(&one), 1);
        let edge = ColoredTree::from_edges(2, &[(0, 1)], None).unwrap();
        assert_eq!(max_binary_height(&edge), 1);
        for n in 3..9u64 {
            let edges: Vec<(u64, u64)> = (1..n).map(|i| (i - 1, i)).collect();
            let p = ColoredTree::from_edges(n as usize, &edges, None).unwrap();
            assert_eq!(max_binary_height(&p), 2);
        }
    }

    #[test]
    fn extra_edge_above_root_does_not_add_height() {
        let mut t = binary_tree(3, 0);
        t.add_vertex(VertexId(50)).unwrap();
        t.add_edge(VertexId(0), VertexId(50)).unwrap();
        assert_eq!(max_binary_height(&t), 3);
    }

    #[test]
    fn cut_marks_censor() {
        let mut t = binary_tree(3, 0);
        t.set_cut(VertexId(6), true).unwrap();
        let r = binary_height_report(&t);
        assert_eq!(r, BinaryHeightReport { height: 3, censored: true });
    }
}
