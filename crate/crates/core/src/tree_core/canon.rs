use std::collections::{HashMap, HashSet};
use std::fmt;

use super::tree::{ColoredTree, Colour, TreeError};

/// Byte string identifying a rooted coloured tree up to isomorphism.
///
/// Layout: the distinct subtree classes of the tree listed bottom-up, each as
/// `tag (u64) | child count (u32) | child ranks (u32...)`, preceded by the class count.
/// Ranks are assigned by sorting classes height by height, so the string does not
/// depend on vertex ids or on traversal order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(pub Vec<u8>);

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({} bytes, ", self.0.len())?;
        for b in self.0.iter().take(24) {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Which vertex labels take part in a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Labels {
    /// Colours and cut marks.
    Full,
    /// Cut marks only.
    CutsOnly,
    /// Shape only.
    Blind,
}

pub fn tag(labels: Labels, colour: Option<Colour>, cut: bool) -> u64 {
    match labels {
        Labels::Full => (colour.map_or(0, |c| c.0 as u64 + 1) << 1) | cut as u64,
        Labels::CutsOnly => cut as u64,
        Labels::Blind => 0,
    }
}

/// Hash-consing table of rooted tree classes: a class is a tag plus a multiset of child classes.
#[derive(Default)]
pub struct Interner {
    map: HashMap<(u64, Box<[u32]>), u32>,
    nodes: Vec<(u64, Box<[u32]>)>,
    height: Vec<u32>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intern(&mut self, tag: u64, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        let key = (tag, children.into_boxed_slice());
        if let Some(&id) = self.map.get(&key) {
            return id;
        }
        let h = key.1.iter().map(|&c| self.height[c as usize] + 1).max().unwrap_or(0);
        let id = self.nodes.len() as u32;
        self.nodes.push(key.clone());
        self.height.push(h);
        self.map.insert(key, id);
        id
    }

    pub fn tag_of(&self, id: u32) -> u64 {
        self.nodes[id as usize].0
    }

    pub fn children(&self, id: u32) -> &[u32] {
        &self.nodes[id as usize].1
    }

    pub fn height(&self, id: u32) -> u32 {
        self.height[id as usize]
    }

    /// The candidate that comes first in the canonical order of classes. The order compares
    /// height, then tag, then the sorted ranks of the children, so it depends on shapes only.
    pub fn canonical_min(&self, candidates: &[u32]) -> Option<u32> {
        let mut reach: Vec<u32> = candidates.to_vec();
        let mut seen: HashSet<u32> = reach.iter().copied().collect();
        let mut k = 0;
        while k < reach.len() {
            let v = reach[k];
            k += 1;
            for &c in self.children(v) {
                if seen.insert(c) {
                    reach.push(c);
                }
            }
        }
        let max_h = reach.iter().map(|&v| self.height(v) as usize).max()?;
        let mut layers: Vec<Vec<u32>> = vec![Vec::new(); max_h + 1];
        for &v in &reach {
            layers[self.height(v) as usize].push(v);
        }
        let mut rank: HashMap<u32, u32> = HashMap::with_capacity(reach.len());
        let mut next = 0u32;
        for layer in layers {
            let mut keyed: Vec<(u64, Vec<u32>, u32)> = layer
                .into_iter()
                .map(|v| {
                    let mut ch: Vec<u32> = self.children(v).iter().map(|c| rank[c]).collect();
                    ch.sort_unstable();
                    (self.tag_of(v), ch, v)
                })
                .collect();
            keyed.sort_unstable();
            for (_, _, v) in keyed {
                rank.insert(v, next);
                next += 1;
            }
        }
        candidates.iter().copied().min_by_key(|c| rank[c])
    }

    /// Canonical code of the class `root`.
    pub fn code(&self, root: u32) -> CanonicalCode {
        let mut reach = vec![root];
        let mut seen: HashSet<u32> = HashSet::new();
        seen.insert(root);
        let mut k = 0;
        while k < reach.len() {
            let v = reach[k];
            k += 1;
            for &c in self.children(v) {
                if seen.insert(c) {
                    reach.push(c);
                }
            }
        }
        let max_h = self.height(root) as usize;
        let mut layers: Vec<Vec<u32>> = vec![Vec::new(); max_h + 1];
        for &v in &reach {
            layers[self.height(v) as usize].push(v);
        }
        let mut rank: HashMap<u32, u32> = HashMap::with_capacity(reach.len());
        let mut out = Vec::new();
        out.extend_from_slice(&(reach.len() as u32).to_le_bytes());
        let mut next = 0u32;
        for layer in layers {
            let mut keyed: Vec<(u64, Vec<u32>, u32)> = layer
                .into_iter()
                .map(|v| {
                    let mut ch: Vec<u32> = self.children(v).iter().map(|c| rank[c]).collect();
                    ch.sort_unstable();
                    (self.tag_of(v), ch, v)
                })
                .collect();
            keyed.sort_unstable();
            for (t, ch, v) in keyed {
                rank.insert(v, next);
                next += 1;
                out.extend_from_slice(&t.to_le_bytes());
                out.extend_from_slice(&(ch.len() as u32).to_le_bytes());
                for c in ch {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        CanonicalCode(out)
    }
}

/// Class id of every vertex of `t` when rooted at `root` (vertices on the far side of
/// `blocked` are skipped and keep `u32::MAX`).
pub fn rooted_classes(
    t: &ColoredTree,
    root: usize,
    blocked: Option<usize>,
    labels: Labels,
    interner: &mut Interner,
) -> Vec<u32> {
    let (order, parent) = t.bfs(root, blocked);
    let mut class = vec![u32::MAX; t.len()];
    for &v in order.iter().rev() {
        let children: Vec<u32> = t
            .adj(v)
            .iter()
            .filter(|&&w| w != parent[v] && Some(w) != blocked)
            .map(|&w| class[w])
            .collect();
        class[v] = interner.intern(tag(labels, t.colour_at(v), t.cut_at(v)), children);
    }
    class
}

/// Colour- and cut-sensitive canonical code of a rooted tree.
pub fn canonical_code(t: &ColoredTree) -> Result<CanonicalCode, TreeError> {
    canonical_code_with(t, Labels::Full)
}

pub fn canonical_code_with(t: &ColoredTree, labels: Labels) -> Result<CanonicalCode, TreeError> {
    let r = t.root_idx().ok_or(TreeError::MissingRoot)?;
    Ok(code_rooted_at(t, r, labels))
}

pub fn code_rooted_at(t: &ColoredTree, root: usize, labels: Labels) -> CanonicalCode {
    let mut int = Interner::new();
    let class = rooted_classes(t, root, None, labels, &mut int);
    int.code(class[root])
}

/// The code of a single uncoloured vertex.
pub fn atom_code() -> CanonicalCode {
    let mut int = Interner::new();
    let a = int.intern(0, Vec::new());
    int.code(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::tree::VertexId;

    #[test]
    fn single_vertex_is_the_atom() {
        let t = ColoredTree::from_edges(1, &[], Some(0)).unwrap();
        assert_eq!(canonical_code(&t).unwrap(), atom_code());
        assert_eq!(atom_code().0.len(), 4 + 8 + 4);
    }

    #[test]
    fn missing_root_is_an_error() {
        let t = ColoredTree::from_edges(2, &[(0, 1)], None).unwrap();
        assert_eq!(canonical_code(&t), Err(TreeError::MissingRoot));
    }

    #[test]
    fn colour_and_cut_sensitivity() {
        let base = ColoredTree::from_edges(3, &[(0, 1), (0, 2)], Some(0)).unwrap();
        let mut red = base.clone();
        red.set_colour(VertexId(1), Some(Colour::red(0))).unwrap();
        let mut cut = base.clone();
        cut.set_cut(VertexId(1), true).unwrap();
        let a = canonical_code(&base).unwrap();
        assert_ne!(a, canonical_code(&red).unwrap());
        assert_ne!(a, canonical_code(&cut).unwrap());
        assert_eq!(a, canonical_code_with(&red, Labels::Blind).unwrap());
        assert_eq!(canonical_code_with(&red, Labels::CutsOnly).unwrap(), a);
    }

    #[test]
    fn root_position_matters() {
        let end = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], Some(0)).unwrap();
        let mid = end.rerooted(VertexId(1)).unwrap();
        assert_ne!(canonical_code(&end).unwrap(), canonical_code(&mid).unwrap());
    }
}
