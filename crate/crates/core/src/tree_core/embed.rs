use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::iso::centres;
use super::tree::{ColoredTree, VertexId};

/// Where the pattern root may go.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootMode {
    Free,
    /// Pattern root onto host root.
    Preserve,
}

#[derive(Clone, Copy, Debug)]
pub struct EmbedOptions {
    pub root_mode: RootMode,
    /// Maximum number of distinct search states evaluated.
    pub budget: u64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions { root_mode: RootMode::Free, budget: 10_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbedOutcome {
    Found(BTreeMap<VertexId, VertexId>),
    /// The whole search space was explored.
    NoEmbedding,
    /// The budget ran out first.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbedResult {
    pub outcome: EmbedOutcome,
    pub nodes: u64,
}

/// Values of `f` on every directed edge of a tree: `out[v][k]` belongs to the component
/// beyond `adj(v)[k]` seen from `v`, rooted at `adj(v)[k]`. `whole[v]` is the tree rooted at `v`.
struct Directed {
    out: Vec<Vec<u32>>,
    whole: Vec<u32>,
}

fn directed_values(t: &ColoredTree, f: &dyn Fn(&[u32]) -> u32) -> Directed {
    let n = t.len();
    let mut out: Vec<Vec<u32>> = (0..n).map(|v| vec![0; t.adj(v).len()]).collect();
    let mut whole = vec![0; n];
    let mut seen = vec![false; n];
    let mut par = vec![usize::MAX; n];
    // down[v]: value of the subtree of v hanging from its parent.
    let mut down = vec![0u32; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut order = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &w in t.adj(v) {
                if !seen[w] {
                    seen[w] = true;
                    par[w] = v;
                    order.push(w);
                }
            }
        }
        for &v in order.iter().rev() {
            let vals: Vec<u32> = t.adj(v).iter().filter(|&&w| w != par[v]).map(|&w| down[w]).collect();
            down[v] = f(&vals);
        }
        for &v in &order {
            let adj = t.adj(v);
            let mut vals = Vec::with_capacity(adj.len());
            for (k, &w) in adj.iter().enumerate() {
                let val = if w == par[v] {
                    out[v][k]
                } else {
                    down[w]
                };
                out[v][k] = val;
                vals.push(val);
            }
            whole[v] = f(&vals);
            // Value of v's side as seen from each child.
            for (k, &w) in adj.iter().enumerate() {
                if w == par[v] {
                    continue;
                }
                let rest: Vec<u32> =
                    vals.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &x)| x).collect();
                let back = t.adj(w).iter().position(|&x| x == v).expect("symmetric");
                out[w][back] = f(&rest);
            }
        }
    }
    Directed { out, whole }
}

fn height_fn(vals: &[u32]) -> u32 {
    1 + vals.iter().copied().max().unwrap_or(0)
}

fn size_fn(vals: &[u32]) -> u32 {
    1 + vals.iter().sum::<u32>()
}

fn binary_fn(vals: &[u32]) -> u32 {
    let (mut a, mut b) = (0, 0);
    for &v in vals {
        if v > a {
            b = a;
            a = v;
        } else if v > b {
            b = v;
        }
    }
    if vals.len() >= 2 {
        1 + b
    } else {
        1
    }
}

/// Interns sorted child-class lists: equal ids mean isomorphic rooted (uncoloured) subtrees.
#[derive(Default)]
struct ShapeClasses(std::cell::RefCell<HashMap<Vec<u32>, u32>>);

impl ShapeClasses {
    fn class(&self, vals: &[u32]) -> u32 {
        let mut key = vals.to_vec();
        key.sort_unstable();
        let mut m = self.0.borrow_mut();
        let next = m.len() as u32;
        *m.entry(key).or_insert(next)
    }
}

struct HostData {
    shape: Directed,
    height: Directed,
    size: Directed,
    binary: Directed,
}

struct PatternData {
    children: Vec<Vec<usize>>,
    shape: Vec<u32>,
    height: Vec<u32>,
    size: Vec<u32>,
    binary: Vec<u32>,
}

fn pattern_data(p: &ColoredTree, root: usize, classes: &ShapeClasses) -> PatternData {
    let (order, parent) = p.bfs(root, None);
    let n = p.len();
    let mut children = vec![Vec::new(); n];
    let mut shape = vec![0; n];
    let (mut height, mut size, mut binary) = (vec![0; n], vec![0; n], vec![0; n]);
    for &v in order.iter().rev() {
        let ch: Vec<usize> = p.adj(v).iter().copied().filter(|&w| w != parent[v]).collect();
        let hs: Vec<u32> = ch.iter().map(|&c| height[c]).collect();
        let ss: Vec<u32> = ch.iter().map(|&c| size[c]).collect();
        let bs: Vec<u32> = ch.iter().map(|&c| binary[c]).collect();
        height[v] = height_fn(&hs);
        size[v] = size_fn(&ss);
        binary[v] = binary_fn(&bs);
        let cs: Vec<u32> = ch.iter().map(|&c| shape[c]).collect();
        shape[v] = classes.class(&cs);
        children[v] = ch;
    }
    PatternData { children, shape, height, size, binary }
}

const NO_PARENT: usize = usize::MAX;

struct Search<'a> {
    p: &'a ColoredTree,
    h: &'a ColoredTree,
    pd: PatternData,
    hd: HostData,
    /// Keyed by (pattern subtree class, host directed subtree class): the answer only depends on
    /// the two shapes.
    memo: HashMap<(u32, u32), bool>,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
}

impl<'a> Search<'a> {
    fn new(p: &'a ColoredTree, h: &'a ColoredTree, proot: usize, budget: u64) -> Self {
        let classes = ShapeClasses::default();
        let pd = pattern_data(p, proot, &classes);
        let hd = HostData {
            shape: directed_values(h, &|v| classes.class(v)),
            height: directed_values(h, &height_fn),
            size: directed_values(h, &size_fn),
            binary: directed_values(h, &binary_fn),
        };
        Search {
            p,
            h,
            pd,
            hd,
            memo: HashMap::new(),
            nodes: 0,
            budget,
            out_of_budget: false,
        }
    }

    /// Cheap necessary conditions for mapping `pv` onto `hv` when the pattern parent goes to `hp`.
    fn plausible(&self, pv: usize, hv: usize, hp: usize) -> bool {
        let free_deg = self.h.adj(hv).len() - usize::from(hp != NO_PARENT);
        if free_deg < self.pd.children[pv].len() {
            return false;
        }
        let (hh, hs, hb) = if hp == NO_PARENT {
            (self.hd.height.whole[hv], self.hd.size.whole[hv], self.hd.binary.whole[hv])
        } else {
            let k = self.h.adj(hp).iter().position(|&x| x == hv).expect("adjacent");
            (self.hd.height.out[hp][k], self.hd.size.out[hp][k], self.hd.binary.out[hp][k])
        };
        hh >= self.pd.height[pv] && hs >= self.pd.size[pv] && hb >= self.pd.binary[pv]
    }

    fn key(&self, pv: usize, hv: usize, hp: usize) -> (u32, u32) {
        let hc = if hp == NO_PARENT {
            self.hd.shape.whole[hv]
        } else {
            let k = self.h.adj(hp).iter().position(|&x| x == hv).expect("adjacent");
            self.hd.shape.out[hp][k]
        };
        (self.pd.shape[pv], hc)
    }

    fn candidates(&self, hv: usize, hp: usize) -> Vec<usize> {
        self.h.adj(hv).iter().copied().filter(|&w| w != hp).collect()
    }

    /// Can the pattern subtree of `pv` be embedded with `pv -> hv`, its parent going to `hp`?
    fn can(&mut self, pv: usize, hv: usize, hp: usize) -> bool {
        if self.out_of_budget {
            return false;
        }
        let key = self.key(pv, hv, hp);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.out_of_budget = true;
            return false;
        }
        let r = self.plausible(pv, hv, hp) && {
            let ok = self.feasibility(pv, hv, hp);
            !self.out_of_budget && match_children(&ok, None).is_some()
        };
        if !self.out_of_budget {
            self.memo.insert(key, r);
        }
        r
    }

    fn feasibility(&mut self, pv: usize, hv: usize, hp: usize) -> Vec<Vec<bool>> {
        let ch = self.pd.children[pv].clone();
        let cand = self.candidates(hv, hp);
        let mut ok = vec![vec![false; cand.len()]; ch.len()];
        for (i, &c) in ch.iter().enumerate() {
            for (j, &w) in cand.iter().enumerate() {
                ok[i][j] = self.can(c, w, hv);
                if self.out_of_budget {
                    return ok;
                }
            }
        }
        ok
    }

    fn root_candidates(&self, mode: RootMode) -> Vec<usize> {
        match mode {
            RootMode::Preserve => self.h.root_idx().into_iter().collect(),
            RootMode::Free => {
                let mut c: Vec<usize> = (0..self.h.len()).collect();
                c.sort_by_key(|&i| self.h.id(i));
                c
            }
        }
    }

    fn reconstruct(&mut self, pr: usize, hr: usize) -> BTreeMap<VertexId, VertexId> {
        let mut map = BTreeMap::new();
        let mut stack = vec![(pr, hr, NO_PARENT)];
        while let Some((pv, hv, hp)) = stack.pop() {
            map.insert(self.p.id(pv), self.h.id(hv));
            let ok = self.feasibility(pv, hv, hp);
            let m = match_children(&ok, None).expect("feasible state");
            let cand = self.candidates(hv, hp);
            for (i, &c) in self.pd.children[pv].iter().enumerate() {
                stack.push((c, cand[m[i]], hv));
            }
        }
        map
    }
}

/// Kuhn matching of every row into a distinct column; `forced` pins one row to one column.
fn match_children(ok: &[Vec<bool>], forced: Option<(usize, usize)>) -> Option<Vec<usize>> {
    let rows = ok.len();
    let cols = ok.first().map_or(0, |r| r.len());
    if rows > cols {
        return None;
    }
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    let allowed = |i: usize, j: usize| -> bool {
        match forced {
            Some((fi, fj)) if i == fi => j == fj && ok[i][j],
            Some((_, fj)) if j == fj => false,
            _ => ok[i][j],
        }
    };
    fn augment(
        i: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        cols: usize,
        owner: &mut Vec<Option<usize>>,
        seen: &mut Vec<bool>,
    ) -> bool {
        for j in 0..cols {
            if allowed(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|o| augment(o, allowed, cols, owner, seen)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..rows {
        let mut seen = vec![false; cols];
        if !augment(i, &allowed, cols, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut assign = vec![0; rows];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            assign[*i] = j;
        }
    }
    Some(assign)
}

fn pattern_root(pattern: &ColoredTree, mode: RootMode) -> Option<usize> {
    match mode {
        RootMode::Preserve => pattern.root_idx(),
        RootMode::Free => centres(pattern).first().copied(),
    }
}

fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn search thread")
            .join()
            .expect("search thread")
    })
}

/// Searches for an injective adjacency-preserving map from `pattern` into `host`.
/// Colours and cut marks are ignored; callers decide what a truncated host means.
pub fn embed_search(pattern: &ColoredTree, host: &ColoredTree, opts: EmbedOptions) -> EmbedResult {
    if pattern.is_empty() {
        return EmbedResult { outcome: EmbedOutcome::Found(BTreeMap::new()), nodes: 0 };
    }
    let Some(pr) = pattern_root(pattern, opts.root_mode) else {
        return EmbedResult { outcome: EmbedOutcome::NoEmbedding, nodes: 0 };
    };
    if pattern.len() > host.len() {
        return EmbedResult { outcome: EmbedOutcome::NoEmbedding, nodes: 0 };
    }
    with_big_stack(|| {
        let mut s = Search::new(pattern, host, pr, opts.budget);
        for hr in s.root_candidates(opts.root_mode) {
            if s.can(pr, hr, NO_PARENT) {
                let map = s.reconstruct(pr, hr);
                return EmbedResult { outcome: EmbedOutcome::Found(map), nodes: s.nodes };
            }
            if s.out_of_budget {
                return EmbedResult { outcome: EmbedOutcome::Exhausted, nodes: s.nodes };
            }
        }
        EmbedResult { outcome: EmbedOutcome::NoEmbedding, nodes: s.nodes }
    })
}

/// Every image each pattern vertex takes under some embedding, or `None` when the budget ran out.
/// The pattern is rooted at its root (or a centre when unrooted).
pub fn embedding_images(
    pattern: &ColoredTree,
    host: &ColoredTree,
    opts: EmbedOptions,
) -> (Option<BTreeMap<VertexId, BTreeSet<VertexId>>>, u64) {
    let Some(pr) = pattern.root_idx().or_else(|| centres(pattern).first().copied()) else {
        return (Some(BTreeMap::new()), 0);
    };
    with_big_stack(|| {
        let mut s = Search::new(pattern, host, pr, opts.budget);
        let mut usable: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
        let mut stack = Vec::new();
        for hr in s.root_candidates(opts.root_mode) {
            if s.can(pr, hr, NO_PARENT) && usable.insert((pr, hr, NO_PARENT)) {
                stack.push((pr, hr, NO_PARENT));
            }
            if s.out_of_budget {
                return (None, s.nodes);
            }
        }
        while let Some((pv, hv, hp)) = stack.pop() {
            let ok = s.feasibility(pv, hv, hp);
            if s.out_of_budget {
                return (None, s.nodes);
            }
            let cand = s.candidates(hv, hp);
            let ch = s.pd.children[pv].clone();
            for (i, &c) in ch.iter().enumerate() {
                for (j, &w) in cand.iter().enumerate() {
                    if ok[i][j] && match_children(&ok, Some((i, j))).is_some() && usable.insert((c, w, hv)) {
                        stack.push((c, w, hv));
                    }
                }
            }
        }
        let mut images: BTreeMap<VertexId, BTreeSet<VertexId>> =
            pattern.ids().iter().map(|&v| (v, BTreeSet::new())).collect();
        for (pv, hv, _) in usable {
            images.get_mut(&pattern.id(pv)).expect("pattern vertex").insert(host.id(hv));
        }
        (Some(images), s.nodes)
    })
}

/// What [`image_summary`] reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageSummary {
    /// Every image of the pattern root.
    pub root: BTreeSet<VertexId>,
    /// Every host vertex some embedding uses, with one pattern vertex that can go there.
    pub hit: BTreeMap<VertexId, VertexId>,
}

/// The root images and the used host vertices of all embeddings, without listing the images of
/// each pattern vertex. Pattern vertices with isomorphic subtrees are explored once per host
/// position. `None` when the budget ran out.
pub fn image_summary(pattern: &ColoredTree, host: &ColoredTree, opts: EmbedOptions) -> (Option<ImageSummary>, u64) {
    let Some(pr) = pattern.root_idx().or_else(|| centres(pattern).first().copied()) else {
        return (Some(ImageSummary { root: BTreeSet::new(), hit: BTreeMap::new() }), 0);
    };
    with_big_stack(|| {
        let mut s = Search::new(pattern, host, pr, opts.budget);
        let mut seen: HashSet<(u32, usize, usize)> = HashSet::new();
        let mut hit: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut root = BTreeSet::new();
        let mut stack = Vec::new();
        for hr in s.root_candidates(opts.root_mode) {
            if s.can(pr, hr, NO_PARENT) {
                root.insert(host.id(hr));
                seen.insert((s.pd.shape[pr], hr, NO_PARENT));
                stack.push((pr, hr, NO_PARENT));
            }
            if s.out_of_budget {
                return (None, s.nodes);
            }
        }
        while let Some((pv, hv, hp)) = stack.pop() {
            hit.entry(host.id(hv)).or_insert(pattern.id(pv));
            let ok = s.feasibility(pv, hv, hp);
            if s.out_of_budget {
                return (None, s.nodes);
            }
            let cand = s.candidates(hv, hp);
            let ch = s.pd.children[pv].clone();
            for (i, &c) in ch.iter().enumerate() {
                for (j, &w) in cand.iter().enumerate() {
                    if ok[i][j] && !seen.contains(&(s.pd.shape[c], w, hv)) && match_children(&ok, Some((i, j))).is_some() {
                        seen.insert((s.pd.shape[c], w, hv));
                        stack.push((c, w, hv));
                    }
                }
            }
        }
        (Some(ImageSummary { root, hit }), s.nodes)
    })
}

/// Checks that `map` is an injective map of all pattern vertices sending edges to edges.
pub fn is_embedding(pattern: &ColoredTree, host: &ColoredTree, map: &BTreeMap<VertexId, VertexId>) -> bool {
    if map.len() != pattern.len() || !pattern.ids().iter().all(|v| map.contains_key(v)) {
        return false;
    }
    let image: BTreeSet<VertexId> = map.values().copied().collect();
    if image.len() != map.len() || !image.iter().all(|&v| host.contains(v)) {
        return false;
    }
    pattern.edges().iter().all(|&(a, b)| host.has_edge(map[&a], map[&b]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::binary::binary_tree;

    #[test]
    fn binary_three_into_five() {
        let p = binary_tree(3, 0);
        let h = binary_tree(5, 100);
        let r = embed_search(&p, &h, EmbedOptions::default());
        match r.outcome {
            EmbedOutcome::Found(m) => assert!(is_embedding(&p, &h, &m)),
            other => panic!("expected an embedding, got {other:?}"),
        }
        let back = embed_search(&h, &p, EmbedOptions::default());
        assert_eq!(back.outcome, EmbedOutcome::NoEmbedding);
    }

    #[test]
    fn tree_into_itself() {
        let t = binary_tree(4, 7);
        let r = embed_search(&t, &t, EmbedOptions { root_mode: RootMode::Preserve, budget: 1000 });
        assert!(matches!(r.outcome, EmbedOutcome::Found(_)));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let p = binary_tree(6, 0);
        let h = binary_tree(7, 1000);
        let r = embed_search(&p, &h, EmbedOptions { root_mode: RootMode::Free, budget: 3 });
        assert_eq!(r.outcome, EmbedOutcome::Exhausted);
    }

    #[test]
    fn images_of_a_path_in_a_path() {
        let p = ColoredTree::from_edges(2, &[(0, 1)], Some(0)).unwrap();
        let h = ColoredTree::from_edges(3, &[(0, 1), (1, 2)], Some(0)).unwrap();
        let (img, _) = embedding_images(&p, &h, EmbedOptions::default());
        let img = img.unwrap();
        assert_eq!(img[&VertexId(0)].len(), 3);
        let (fixed, _) = embedding_images(&p, &h, EmbedOptions { root_mode: RootMode::Preserve, budget: 100 });
        let fixed = fixed.unwrap();
        assert_eq!(fixed[&VertexId(0)], BTreeSet::from([VertexId(0)]));
        assert_eq!(fixed[&VertexId(1)], BTreeSet::from([VertexId(1)]));
    }
}
