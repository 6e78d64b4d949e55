use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::compiled::Compiled;
use super::{Presentation, PresentationError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolicBound {
    Finite(usize),
    Infinite,
}

impl SymbolicBound {
    pub fn finite(self) -> Option<usize> {
        match self {
            SymbolicBound::Finite(n) => Some(n),
            SymbolicBound::Infinite => None,
        }
    }
}

impl fmt::Display for SymbolicBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicBound::Finite(n) => write!(f, "{n}"),
            SymbolicBound::Infinite => write!(f, "infinite"),
        }
    }
}

/// The reachable (piece, vertex) states of the denoted tree, oriented away from its root.
/// State 0 is the root.
pub struct StateGraph {
    pub states: Vec<(usize, usize)>,
    pub down: Vec<Vec<usize>>,
    pub degree: Vec<usize>,
}

impl StateGraph {
    pub fn new(c: &Compiled<'_>) -> Self {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(0, c.root[0])];
        index.insert(states[0], 0);
        let mut down = Vec::new();
        let mut k = 0;
        while k < states.len() {
            let (p, v) = states[k];
            k += 1;
            let mut ch = Vec::new();
            for s in c.down_children(p, v) {
                let id = *index.entry(s).or_insert_with(|| {
                    states.push(s);
                    states.len() - 1
                });
                ch.push(id);
            }
            down.push(ch);
        }
        let degree = states.iter().map(|&(p, v)| c.degree(p, v)).collect();
        StateGraph { states, down, degree }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn parents(&self) -> Vec<Vec<usize>> {
        let mut up = vec![Vec::new(); self.len()];
        for (s, ch) in self.down.iter().enumerate() {
            for &c in ch {
                up[c].push(s);
            }
        }
        up
    }
}

pub fn max_degree_symbolic(p: &Presentation) -> Result<usize, PresentationError> {
    let c = Compiled::new(p)?;
    let g = StateGraph::new(&c);
    Ok(g.degree.iter().copied().max().unwrap_or(0))
}

/// Length of the downward bare run starting at each state: 0 unless the state has degree 2.
fn bare_runs(g: &StateGraph) -> Vec<SymbolicBound> {
    const UNKNOWN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let mut mark = vec![UNKNOWN; g.len()];
    let mut run = vec![SymbolicBound::Finite(0); g.len()];
    for start in 0..g.len() {
        let mut chain = Vec::new();
        let mut s = start;
        let end = loop {
            if mark[s] == DONE {
                break run[s];
            }
            if mark[s] == ACTIVE {
                break SymbolicBound::Infinite;
            }
            // Only non-root states continue: a degree-2 non-root has exactly one child.
            if g.degree[s] != 2 || s == 0 {
                mark[s] = DONE;
                run[s] = SymbolicBound::Finite(0);
                break run[s];
            }
            mark[s] = ACTIVE;
            chain.push(s);
            s = g.down[s][0];
        };
        let mut acc = end;
        for &s in chain.iter().rev() {
            acc = match acc {
                SymbolicBound::Finite(n) => SymbolicBound::Finite(n + 1),
                SymbolicBound::Infinite => SymbolicBound::Infinite,
            };
            run[s] = acc;
            mark[s] = DONE;
        }
    }
    if g.degree[0] == 2 {
        run[0] = SymbolicBound::Finite(0);
    }
    run
}

/// Longest bare path of the denoted tree, or `Infinite` when bare paths are unbounded.
pub fn max_bare_path_symbolic(p: &Presentation) -> Result<SymbolicBound, PresentationError> {
    let c = Compiled::new(p)?;
    Ok(bare_path_states(&StateGraph::new(&c)))
}

pub fn bare_path_states(g: &StateGraph) -> SymbolicBound {
    let run = bare_runs(g);
    let step = |c: usize| match run[c] {
        SymbolicBound::Finite(n) if g.degree[c] == 2 => SymbolicBound::Finite(n + 1),
        SymbolicBound::Finite(_) => SymbolicBound::Finite(1),
        SymbolicBound::Infinite => SymbolicBound::Infinite,
    };
    let mut best = SymbolicBound::Finite(0);
    for s in 0..g.len() {
        if g.degree[s] == 2 && s == 0 {
            let a = step(g.down[0][0]);
            let b = step(g.down[0][1]);
            let sum = match (a, b) {
                (SymbolicBound::Finite(x), SymbolicBound::Finite(y)) => SymbolicBound::Finite(x + y),
                _ => SymbolicBound::Infinite,
            };
            best = best.max(sum);
        } else if g.degree[s] != 2 {
            for &c in &g.down[s] {
                best = best.max(step(c));
            }
        }
    }
    best
}

fn top_two(vals: impl Iterator<Item = usize>) -> (usize, usize) {
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
    (b, n)
}

fn head((second, count): (usize, usize)) -> usize {
    if count >= 2 {
        1 + second
    } else {
        1
    }
}

/// Height of the largest binary tree that is a subgraph of the denoted tree.
pub fn max_binary_height_symbolic(p: &Presentation) -> Result<SymbolicBound, PresentationError> {
    let c = Compiled::new(p)?;
    Ok(binary_height_states(&StateGraph::new(&c)))
}

pub fn binary_height_states(g: &StateGraph) -> SymbolicBound {
    let n = g.len();
    // alive[s] after round k: the best binary tree hanging below s has height >= k.
    let mut down = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut level = 1;
    loop {
        let next: Vec<bool> =
            (0..n).map(|s| alive[s] && g.down[s].iter().filter(|&&c| alive[c]).count() >= 2).collect();
        if next == alive {
            if alive.iter().any(|&a| a) {
                return SymbolicBound::Infinite;
            }
            break;
        }
        if next.iter().all(|&a| !a) {
            break;
        }
        level += 1;
        for s in 0..n {
            if next[s] {
                down[s] = level;
            }
        }
        alive = next;
    }
    // Best value beyond the edge towards the parent, over all occurrences of a state.
    let parents = g.parents();
    let mut up: Vec<Option<usize>> = vec![None; n];
    let mut changed = true;
    while changed {
        changed = false;
        for c in 1..n {
            let mut best = up[c];
            for &s in &parents[c] {
                let mut vals: Vec<usize> = Vec::with_capacity(3);
                let mut skipped = false;
                for &w in &g.down[s] {
                    if w == c && !skipped {
                        skipped = true;
                    } else {
                        vals.push(down[w]);
                    }
                }
                if let Some(u) = up[s] {
                    vals.push(u);
                }
                let v = head(top_two(vals.into_iter()));
                best = Some(best.map_or(v, |b| b.max(v)));
            }
            if best != up[c] {
                up[c] = best;
                changed = true;
            }
        }
    }
    let best = (0..n)
        .map(|s| head(top_two(g.down[s].iter().map(|&w| down[w]).chain(up[s]))))
        .max()
        .unwrap_or(0);
    SymbolicBound::Finite(best)
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::*;
    use crate::tree_core::bare::bare_path_report;
    use crate::tree_core::binary::binary_height_report;
    use crate::tree_core::tree::{ColoredTree, Colour, VertexId};

    #[test]
    fn ray_is_unbounded_bare_but_binary_two() {
        assert_eq!(max_bare_path_symbolic(&ray()).unwrap(), SymbolicBound::Infinite);
        assert_eq!(max_binary_height_symbolic(&ray()).unwrap(), SymbolicBound::Finite(2));
        assert_eq!(max_degree_symbolic(&ray()).unwrap(), 2);
    }

    #[test]
    fn cherry_pumping_diverges() {
        assert_eq!(max_binary_height_symbolic(&full_binary()).unwrap(), SymbolicBound::Infinite);
    }

    #[test]
    fn claw_spine_is_finite() {
        let p = claw();
        assert_eq!(max_bare_path_symbolic(&p).unwrap(), SymbolicBound::Finite(2));
        assert_eq!(max_degree_symbolic(&p).unwrap(), 3);
        let c = Compiled::new(&p).unwrap();
        let e = c.expand(30);
        assert_eq!(bare_path_report(&e.tree).max, 2);
        let sym = max_binary_height_symbolic(&p).unwrap();
        assert_eq!(sym, SymbolicBound::Finite(binary_height_report(&e.tree).height));
        assert_eq!(sym, SymbolicBound::Finite(3));
    }

    #[test]
    fn finite_presentations_match_direct_analysis() {
        let t = ColoredTree::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)], Some(0)).unwrap();
        let p = Presentation::finite(t.clone(), "t", 0);
        assert_eq!(max_bare_path_symbolic(&p).unwrap(), SymbolicBound::Finite(2));
        let p1 = Presentation::finite(t.rerooted(VertexId(1)).unwrap(), "t", 0);
        assert_eq!(max_bare_path_symbolic(&p1).unwrap(), SymbolicBound::Finite(2));
        let p3 = Presentation::finite(t.rerooted(VertexId(3)).unwrap(), "t", 0);
        assert_eq!(max_bare_path_symbolic(&p3).unwrap(), SymbolicBound::Finite(2));
        assert_eq!(max_binary_height_symbolic(&p3).unwrap(), SymbolicBound::Finite(2));
    }

    #[test]
    fn degree_three_roots_give_stitched_length_two() {
        // Every piece has bare paths of length 1; pieces meet at degree-3 expanding leaves.
        let mut root = ColoredTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)], Some(0)).unwrap();
        for v in 1..=3 {
            root.set_colour(VertexId(v), Some(Colour::red(0))).unwrap();
        }
        let mut rule = ColoredTree::from_edges(3, &[(0, 1), (0, 2)], Some(0)).unwrap();
        for v in 1..=2 {
            rule.set_colour(VertexId(v), Some(Colour::red(0))).unwrap();
        }
        let mut p = Presentation::finite(root, "root", 0);
        p.pieces.insert("fork".into(), super::super::Piece::new(rule, "fork"));
        p.rules.insert(Colour::red(0), "fork".into());
        assert_eq!(max_bare_path_symbolic(&p).unwrap(), SymbolicBound::Finite(1));
        // Subdividing the root edges lengthens the stitched paths to 2.
        let mut root2 = ColoredTree::from_edges(7, &[(0, 1), (1, 4), (0, 2), (2, 5), (0, 3), (3, 6)], Some(0)).unwrap();
        for v in 4..=6 {
            root2.set_colour(VertexId(v), Some(Colour::red(0))).unwrap();
        }
        p.pieces.get_mut("root").unwrap().tree = root2;
        assert_eq!(max_bare_path_symbolic(&p).unwrap(), SymbolicBound::Finite(2));
        let e = Compiled::new(&p).unwrap().expand(8);
        assert_eq!(bare_path_report(&e.tree).max, 2);
    }
}
