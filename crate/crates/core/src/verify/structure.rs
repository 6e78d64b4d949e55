use crate::construction::{compute_ktilde, select_target, split_at, Side, BASE_B, BASE_K};
use crate::presentation::compiled::Compiled;
use crate::presentation::{max_bare_path_symbolic, max_binary_height_symbolic, max_degree_symbolic, Expansion, Presentation, SymbolicBound};
use crate::tree_core::tree::{DirectedEdge, VertexId};

use super::{CheckEntry, Ctx, VerifyError};

const SIDES: [Side; 2] = [Side::T, Side::S];

/// The root piece and the rules of the predecessor survive unchanged.
pub fn check_nested(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger1", "earlier trees are labelled induced subtrees");
    let Some(prev) = ctx.prev else {
        return Ok(e.proved("nothing precedes the base case"));
    };
    for side in SIDES {
        let (old, new) = (prev.pres(side), ctx.st.pres(side));
        if let Err(w) = nested_in(old, new) {
            return Ok(e.failed(format!("{} of state {} is not kept in state {}", side.name(), prev.n, ctx.st.n), w));
        }
    }
    Ok(e.proved("root pieces contain their predecessors with ids, names, edges and colours; earlier rules unchanged"))
}

fn nested_in(old: &Presentation, new: &Presentation) -> Result<(), String> {
    let (op, np) = (old.root_piece(), new.root_piece());
    let (ot, nt) = (&op.tree, &np.tree);
    let old_root = old.root_vertex();
    for &v in ot.ids() {
        if !nt.contains(v) {
            return Err(format!("vertex {v} missing"));
        }
        if v != old_root && ot.colour(v) != nt.colour(v) {
            return Err(format!("vertex {v} changed colour"));
        }
        if v != old_root && op.names.contains_key(&v) && op.names.get(&v) != np.names.get(&v) {
            return Err(format!("vertex {v} changed name"));
        }
        for w in nt.neighbours(v) {
            if ot.contains(w) && !ot.has_edge(v, w) {
                return Err(format!("new edge {v}-{w} inside the old tree"));
            }
        }
    }
    for (a, b) in ot.edges() {
        if !nt.has_edge(a, b) {
            return Err(format!("edge {a}-{b} missing"));
        }
    }
    for (c, name) in &old.rules {
        if new.rules.get(c) != Some(name) || new.pieces.get(name) != old.pieces.get(name) {
            return Err(format!("rule for {c} changed"));
        }
    }
    Ok(())
}

pub fn check_degree(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger2", "maximum degree at most 3");
    for side in SIDES {
        let d = max_degree_symbolic(ctx.st.pres(side))?;
        if d > 3 {
            return Ok(e.failed(format!("{} has a vertex of degree {d}", side.name()), witness_degree(ctx.st.pres(side))?));
        }
    }
    Ok(e.proved("over all reachable vertex states of both presentations"))
}

fn witness_degree(p: &Presentation) -> Result<String, VerifyError> {
    let c = Compiled::new(p)?;
    for a in c.vertex_iter().take(1_000_000) {
        let mut nav = c.navigator();
        let l = nav.locate(&a)?;
        if nav.neighbours(l).len() > 3 {
            return Ok(a.to_string());
        }
    }
    Ok("not located within 10^6 vertices".into())
}

pub fn check_roots(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger3", "roots carry the current marker colours");
    for side in SIDES {
        let p = ctx.st.pres(side);
        let r = p.root_vertex();
        let want = side.colour(ctx.st.n);
        let got = p.root_piece().tree.colour(r);
        if got != Some(want) || p.is_expanding(want) {
            return Ok(e.failed(format!("root of {} has colour {got:?}, expected marker {want}", side.name()), r.to_string()));
        }
    }
    Ok(e.proved(format!("{} and {}", Side::T.colour(ctx.st.n), Side::S.colour(ctx.st.n))))
}

pub fn check_binary_height(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger4", "binary subtrees have height at most b");
    let mut seen = Vec::new();
    for side in SIDES {
        let h = max_binary_height_symbolic(ctx.st.pres(side))?;
        match h {
            SymbolicBound::Finite(h) if h <= ctx.st.b => seen.push(h),
            other => return Ok(e.failed(format!("{} has binary height {other} > b = {}", side.name(), ctx.st.b), side.name())),
        }
    }
    Ok(e.proved(format!("heights {} and {}, b = {}", seen[0], seen[1], ctx.st.b)))
}

pub fn check_bare_paths(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger5", "bare paths are finite and at most k");
    let mut seen = Vec::new();
    for side in SIDES {
        match max_bare_path_symbolic(ctx.st.pres(side))? {
            SymbolicBound::Finite(l) if l <= ctx.st.k => seen.push(l),
            other => return Ok(e.failed(format!("{} has a bare path of length {other} > k = {}", side.name(), ctx.st.k), side.name())),
        }
    }
    Ok(e.proved(format!("longest {} and {}, k = {}", seen[0], seen[1], ctx.st.k)))
}

/// `Ok` when the expansion around its root is one extra leaf plus a bare path of `radius` edges
/// without coloured vertices; otherwise the address of the first offending vertex.
pub fn bare_shape(e: &Expansion, radius: usize) -> Result<(), String> {
    let t = &e.tree;
    let root = t.root().expect("rooted expansion");
    let at = |v: VertexId| e.addresses[v.0 as usize].to_string();
    if let Some((v, _)) = t.colours().into_iter().find(|(v, _)| *v != root) {
        return Err(format!("coloured vertex at {}", at(v)));
    }
    let nb = t.neighbours(root);
    if nb.len() != 2 {
        return Err(format!("attachment vertex {} has {} new neighbours", at(root), nb.len()));
    }
    let is_leaf = |v: VertexId| t.degree(v) == 1 && !t.is_cut(v);
    let start = if is_leaf(nb[0]) {
        nb[1]
    } else if is_leaf(nb[1]) {
        nb[0]
    } else {
        return Err(format!("no extra leaf at {}", at(root)));
    };
    let (mut prev, mut cur) = (root, start);
    for i in 1..=radius {
        let rest: Vec<VertexId> = t.neighbours(cur).into_iter().filter(|&w| w != prev).collect();
        if i == radius {
            if !rest.is_empty() {
                return Err(format!("ball continues past {}", at(cur)));
            }
            break;
        }
        if rest.len() != 1 {
            return Err(format!("path vertex {} at distance {i} has degree {}", at(cur), rest.len() + 1));
        }
        prev = cur;
        cur = rest[0];
    }
    if t.len() != radius + 2 {
        return Err(format!("ball has {} vertices, expected {}", t.len(), radius + 2));
    }
    Ok(())
}

/// The radius-`k_{n-1}+1` ball of the previous tree is a bare extension at its markers and meets
/// no current marker. Markers of one colour share a rule, so one instance per colour and the part
/// beyond the old root cover every marker.
pub fn check_balls(ctx: &Ctx<'_>, side: Side) -> Result<CheckEntry, VerifyError> {
    let (id, title) = match side {
        Side::T => ("dagger6", "ball around the previous T is a bare extension"),
        Side::S => ("dagger7", "ball around the previous S is a bare extension"),
    };
    let e = CheckEntry::new(id, title);
    let Some(prev) = ctx.prev else {
        return Ok(e.proved("nothing precedes the base case"));
    };
    let radius = prev.k + 1;
    let old = prev.pres(side);
    let cur = ctx.st.pres(side);
    let r = old.root_vertex();
    let ot = &old.root_piece().tree;
    let q = match ot.neighbours(r).as_slice() {
        [q] => *q,
        _ => return Ok(e.failed("the previous root is not a leaf", r.to_string())),
    };
    let mut checked = vec![format!("beyond old root {r}")];
    let beyond = cur.subtree(DirectedEdge::new(q, r))?;
    if let Err(w) = bare_shape(&Compiled::new(&beyond)?.expand(radius), radius) {
        return Ok(e.failed(format!("beyond the old root of {}", side.name()), w));
    }
    let markers = old.marker_colours();
    for c in [Side::T.colour(prev.n), Side::S.colour(prev.n)] {
        if !markers.contains(&c) {
            continue;
        }
        let Some(name) = cur.rules.get(&c) else {
            return Ok(e.failed(format!("marker {c} has no rule"), c.to_string()));
        };
        let mut p = cur.clone();
        p.root = name.clone();
        if let Err(w) = bare_shape(&Compiled::new(&p)?.expand(radius), radius) {
            return Ok(e.failed(format!("instance of {c} in {}", side.name()), w));
        }
        checked.push(format!("instances of {c}"));
    }
    Ok(e.proved(format!("radius {radius}: {}", checked.join(", "))))
}

/// `k` and `b` follow the growth law, and the recorded `ktilde` is recomputed exactly.
pub fn check_growth(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("growth_law", "k and b follow the growth law");
    let st = ctx.st;
    let Some(prev) = ctx.prev else {
        if st.k == BASE_K && st.b == BASE_B {
            return Ok(e.proved(format!("k = {BASE_K}, b = {BASE_B}")));
        }
        return Ok(e.failed("base values", format!("k = {}, b = {}", st.k, st.b)));
    };
    let Some(rec) = st.history.last() else {
        return Ok(e.failed("no step record", format!("state {}", st.n)));
    };
    let (side, v) = select_target(prev)?;
    let split = split_at(prev, side, &v)?;
    let kt = compute_ktilde(prev, side, &split)?;
    if kt != rec.ktilde {
        return Ok(e.failed("recorded ktilde differs from the recomputed one", format!("{} vs {kt}", rec.ktilde)));
    }
    if st.k != 2 * kt + 3 || st.k <= prev.k {
        return Ok(e.failed("k is not 2 ktilde + 3", format!("k = {}, ktilde = {kt}", st.k)));
    }
    if st.b != prev.b + 3 {
        return Ok(e.failed("b is not the previous b + 3", format!("b = {}, previous {}", st.b, prev.b)));
    }
    Ok(e.proved(format!("ktilde = {kt}, k = {}, b = {}", st.k, st.b)))
}
