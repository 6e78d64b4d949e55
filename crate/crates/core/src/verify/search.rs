use std::collections::BTreeSet;

use crate::construction::{step, ConstructionState, Side};
use crate::presentation::compiled::Compiled;
use crate::presentation::equiv::{presentations_equivalent_with, root_images};
use crate::presentation::{Address, Presentation};
use crate::tree_core::bare::{bare_decompose, bare_extension};
use crate::tree_core::canon::{canonical_code_with, Labels};
use crate::tree_core::embed::{embed_search, image_summary, EmbedOptions, EmbedOutcome, RootMode};
use crate::tree_core::iso::unrooted_iso_with;
use crate::tree_core::tree::{ColoredTree, VertexId};

use super::{Bounds, CheckEntry, Ctx, Verdict, VerifyError};

/// A ball of a denoted tree with its markers. Vertex `i` has id `i` and address `addresses[i]`.
pub struct Truncated {
    pub tree: ColoredTree,
    pub addresses: Vec<Address>,
    /// No vertex was cut off: the ball is the whole tree.
    pub complete: bool,
    pub markers: BTreeSet<VertexId>,
}

pub fn truncate(p: &Presentation, st: &ConstructionState, centre: Option<&Address>, radius: usize) -> Result<Truncated, VerifyError> {
    let c = Compiled::new(p)?;
    let e = match centre {
        None => c.expand(radius),
        Some(a) => c.ball(a, radius)?,
    };
    let markers = e
        .tree
        .colours()
        .into_iter()
        .filter(|(_, col)| *col == st.red() || *col == st.blue())
        .map(|(v, _)| v)
        .collect();
    Ok(Truncated { complete: !e.tree.has_cuts(), tree: e.tree, addresses: e.addresses, markers })
}

pub fn diameter(t: &ColoredTree) -> usize {
    if t.is_empty() {
        return 0;
    }
    let d0 = t.distances(0);
    let far = (0..t.len()).max_by_key(|&i| d0[i]).unwrap_or(0);
    t.distances(far).into_iter().max().unwrap_or(0)
}

/// An embedding into an extension longer than `diameter(pattern)` slides into the one of that
/// length, so searching lengths up to the diameter covers all of them.
fn lengths_cover(pattern: &ColoredTree, ext_len: usize) -> bool {
    ext_len >= diameter(pattern)
}

fn host_name(h: &Truncated, v: VertexId) -> String {
    h.addresses.get(v.0 as usize).map_or_else(|| format!("extension vertex {v}"), |a| a.to_string())
}

struct Tally {
    verdict: Verdict,
    nodes: u64,
    notes: Vec<String>,
    witness: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { verdict: Verdict::Proved, nodes: 0, notes: Vec::new(), witness: None }
    }

    fn worsen(&mut self, v: Verdict, note: String) {
        if v > self.verdict {
            self.verdict = v;
        }
        if v == Verdict::Failed && self.witness.is_none() {
            self.witness = Some(note.clone());
        }
        self.notes.push(note);
    }

    fn bound(&mut self, note: String) {
        if !self.notes.contains(&note) {
            self.worsen(Verdict::VerifiedToBound, note);
        }
    }

    fn finish(self, e: CheckEntry, bounds: Bounds, summary: String) -> CheckEntry {
        let mut detail = summary;
        if !self.notes.is_empty() {
            detail.push_str("; ");
            detail.push_str(&self.notes.join("; "));
        }
        let b = Bounds { nodes: self.nodes, ..bounds };
        match self.verdict {
            Verdict::Failed => e.failed(detail, self.witness.unwrap_or_default()),
            Verdict::Proved => e.proved(detail),
            v => CheckEntry { verdict: v, detail, bounds: Some(b), ..e },
        }
    }
}

/// Neither tree embeds into a bare extension of the other at its markers.
pub fn check_non_embed(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("dagger8", "no embedding into bare extensions of the other tree");
    let st = ctx.st;
    let mut tally = Tally::new();
    let opts = EmbedOptions { root_mode: RootMode::Free, budget: ctx.budget };
    let mut summary = Vec::new();
    for (ps, hs) in [(Side::T, Side::S), (Side::S, Side::T)] {
        let pat = truncate(st.pres(ps), st, None, ctx.depth)?;
        let host = truncate(st.pres(hs), st, None, ctx.depth + ctx.ext_len + 1)?;
        let top = ctx.ext_len;
        let definitive = pat.complete && host.complete;
        for len in 0..=top {
            let h = bare_extension(&host.tree, &host.markers, len)?;
            let r = embed_search(&pat.tree, &h, opts);
            tally.nodes += r.nodes;
            match r.outcome {
                EmbedOutcome::NoEmbedding if definitive => {}
                EmbedOutcome::NoEmbedding => tally.bound(format!("{} into {}: none between truncations", ps.name(), hs.name())),
                EmbedOutcome::Exhausted => tally.worsen(Verdict::Inconclusive, format!("{} into {} length {len}: budget exhausted", ps.name(), hs.name())),
                EmbedOutcome::Found(m) if pat.complete => {
                    let root = pat.tree.root().expect("rooted");
                    tally.worsen(
                        Verdict::Failed,
                        format!("{} embeds into {} extended by {len}; root goes to {}", ps.name(), hs.name(), host_name(&host, m[&root])),
                    );
                }
                EmbedOutcome::Found(_) => tally.worsen(Verdict::Inconclusive, format!("{} into {} length {len}: a truncation embeds", ps.name(), hs.name())),
            }
        }
        if definitive && !lengths_cover(&pat.tree, top) {
            tally.bound(format!("{} into {}: exhaustive for lengths 0..={top} only", ps.name(), hs.name()));
        }
        summary.push(format!(
            "{} ({} vertices{}) into {}, lengths 0..={top}",
            ps.name(),
            pat.tree.len(),
            if pat.complete { "" } else { ", truncated" },
            hs.name()
        ));
    }
    let s = summary.join("; ");
    Ok(tally.finish(e, ctx.bounds(0), s))
}

/// Every embedding of a tree into a bare extension of itself maps into the tree and sends the root
/// to the root or to a vertex where the rerooted tree is isomorphic to the original.
pub fn check_root_fixing(ctx: &Ctx<'_>, side: Side) -> Result<CheckEntry, VerifyError> {
    let (id, title) = match side {
        Side::T => ("dagger9", "self-embeddings of T fix the root"),
        Side::S => ("dagger10", "self-embeddings of S fix the root"),
    };
    let e = CheckEntry::new(id, title);
    let st = ctx.st;
    let opts = EmbedOptions { root_mode: RootMode::Free, budget: ctx.budget };
    let pat = truncate(st.pres(side), st, None, ctx.depth)?;
    let top = ctx.ext_len;
    let host = truncate(st.pres(side), st, None, ctx.depth + top + 1)?;
    let definitive = pat.complete && host.complete;
    let mut tally = Tally::new();
    let host_root = host.tree.root().expect("rooted");
    let original = host.tree.len() as u64;
    // Root-piece vertices where the rerooted tree is isomorphic to the tree at its root.
    let twins: BTreeSet<VertexId> = root_images(st.pres(side), st.pres(side), Labels::Blind)?.into_iter().collect();
    let mut twin_notes = BTreeSet::new();
    for len in 0..=top {
        let h = bare_extension(&host.tree, &host.markers, len)?;
        let (summary, nodes) = image_summary(&pat.tree, &h, opts);
        tally.nodes += nodes;
        let Some(summary) = summary else {
            tally.worsen(Verdict::Inconclusive, format!("length {len}: budget exhausted"));
            continue;
        };
        if !summary.root.contains(&host_root) {
            tally.worsen(Verdict::Failed, format!("length {len}: the identity is not found"));
            continue;
        }
        let moved = summary.root.iter().find(|&&v| {
            v != host_root && !host.addresses.get(v.0 as usize).is_some_and(|a| a.0.len() == 1 && twins.contains(&a.last()))
        });
        for v in summary.root.iter().filter(|&&v| v != host_root && v.0 < original) {
            if twin_notes.insert(*v) {
                tally.notes.push(format!("root also goes to {} by an automorphism", host_name(&host, *v)));
            }
        }
        let outside = summary.hit.iter().find(|(v, _)| v.0 >= original).map(|(v, p)| (*p, *v));
        let bad = match (moved, outside) {
            (Some(v), _) => Some(format!("length {len}: root can go to {}", host_name(&host, *v))),
            (None, Some((p, v))) => Some(format!("length {len}: vertex {} can go to {}", pat.addresses[p.0 as usize], host_name(&host, v))),
            (None, None) => None,
        };
        match bad {
            Some(w) if pat.complete => tally.worsen(Verdict::Failed, w),
            Some(w) => tally.worsen(Verdict::Inconclusive, format!("{w} (truncated pattern)")),
            None if definitive => {}
            None => tally.bound("holds between truncations".into()),
        }
    }
    if definitive && !lengths_cover(&pat.tree, top) {
        tally.bound(format!("exhaustive for lengths 0..={top} only"));
    }
    let s = format!("{} with {} vertices{}; lengths 0..={top}", side.name(), pat.tree.len(), if pat.complete { "" } else { " (truncated)" });
    Ok(tally.finish(e, ctx.bounds(0), s))
}

/// `T` and `S` are not isomorphic: exactly as rooted trees (and over every root-piece root), and
/// through the bare-path decomposition around `t_0` inside the next tree.
pub fn check_nonisomorphic(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("nonisomorphic", "T and S are not isomorphic");
    let st = ctx.st;
    let mut tally = Tally::new();
    let mut summary = Vec::new();
    let whole_t = truncate(&st.t, st, None, ctx.depth)?;
    let whole_s = truncate(&st.s, st, None, ctx.depth)?;
    if whole_t.complete && whole_s.complete {
        if unrooted_iso_with(&whole_t.tree, &whole_s.tree, Labels::Blind).is_some() {
            tally.worsen(Verdict::Failed, "the finite trees are isomorphic".into());
        }
        summary.push("finite trees are not isomorphic".to_string());
    } else {
        if presentations_equivalent_with(&st.t, &st.s, Labels::Blind)? {
            tally.worsen(Verdict::Failed, "rooted trees are isomorphic".into());
        }
        let imgs = root_images(&st.t, &st.s, Labels::Blind)?;
        if let Some(v) = imgs.first() {
            tally.worsen(Verdict::Failed, format!("S rerooted at {v} is isomorphic to T"));
        }
        summary.push("no root-piece vertex of S is a root image of T".to_string());
    }
    let finite = whole_t.complete && whole_s.complete;
    let mut second = Tally::new();
    decomposition_argument(ctx, &mut second, &mut summary)?;
    tally.nodes += second.nodes;
    // For finite trees the exact comparison decides; the second argument can only add failures.
    if !finite || second.verdict == Verdict::Failed {
        tally.verdict = tally.verdict.and(second.verdict);
        tally.witness = tally.witness.or(second.witness);
    }
    tally.notes.extend(second.notes);
    Ok(tally.finish(e, ctx.bounds(0), summary.join("; ")))
}

/// The decomposition argument alone: around `t_0` inside the next tree, deleting long bare
/// paths leaves a length-0 bare extension of `T_n`, which does not embed near `S_n`.
pub fn check_decomposition(ctx: &Ctx<'_>) -> Result<CheckEntry, VerifyError> {
    let e = CheckEntry::new("nonisomorphic_decomposition", "the component of t_0 does not embed near S");
    let mut tally = Tally::new();
    let mut summary = Vec::new();
    decomposition_argument(ctx, &mut tally, &mut summary)?;
    Ok(tally.finish(e, ctx.bounds(0), summary.join("; ")))
}

fn decomposition_argument(ctx: &Ctx<'_>, tally: &mut Tally, summary: &mut Vec<String>) -> Result<(), VerifyError> {
    let st = ctx.st;
    let (d, k) = (ctx.depth, st.k);
    let next = step(st)?;
    let centre = Address::root_piece(st.t.root_vertex());
    let ambient = truncate(&next.t, &next, Some(&centre), d + k + 1)?;
    let parts = bare_decompose(&ambient.tree, k);
    let c0 = VertexId(0);
    let Some(comp) = parts.into_iter().find(|p| p.tree.contains(c0)) else {
        tally.worsen(Verdict::Failed, "the root of T_n was deleted".into());
        return Ok(());
    };
    let Some(t0) = st.enumeration.lookup(st, Side::T, 0)? else {
        tally.worsen(Verdict::Failed, "t_0 is unassigned".into());
        return Ok(());
    };
    match ambient.addresses.iter().position(|a| *a == t0) {
        Some(i) if comp.tree.contains(VertexId(i as u64)) => {}
        Some(_) => tally.worsen(Verdict::Failed, format!("t_0 = {t0} is not in the component of the root")),
        None => tally.worsen(Verdict::Inconclusive, format!("t_0 = {t0} lies beyond depth {d}")),
    }
    let mut found = comp.tree.ball(c0, d)?.uncoloured();
    found.set_root(Some(c0))?;
    let core = truncate(&st.t, st, None, d + 1)?;
    let near: BTreeSet<VertexId> = {
        let dist = core.tree.distances(core.tree.root_idx().expect("rooted"));
        core.markers.iter().copied().filter(|v| dist[core.tree.idx(*v).expect("marker")] <= d).collect()
    };
    let ext = bare_extension(&core.tree, &near, 0)?;
    let root = core.tree.root().expect("rooted");
    let expected = ext.ball(root, d)?.uncoloured();
    if canonical_code_with(&found, Labels::Blind)? != canonical_code_with(&expected, Labels::Blind)? {
        tally.worsen(Verdict::Failed, format!("the component of t_0 is not the length-0 bare extension of T_{} within depth {d}", st.n));
        return Ok(());
    }
    let pattern_complete = core.complete && found.len() == expected.len() && !comp.touches_cut;
    summary.push(format!("component of t_0 matches the length-0 bare extension of T_{} ({} vertices)", st.n, found.len()));
    let host_ball = truncate(&st.s, st, None, d + k + 1)?;
    let host = bare_extension(&host_ball.tree, &host_ball.markers, k + 1)?;
    let r = embed_search(&found, &host, EmbedOptions { root_mode: RootMode::Free, budget: ctx.budget });
    tally.nodes += r.nodes;
    match r.outcome {
        EmbedOutcome::NoEmbedding => {
            let note = format!("it does not embed into S_{} extended by {}", st.n, k + 1);
            if !(pattern_complete && host_ball.complete) {
                tally.worsen(Verdict::VerifiedToBound, format!("{note} (truncations)"));
            } else {
                summary.push(note);
                // Non-embedding for one extension length only.
                tally.worsen(Verdict::VerifiedToBound, format!("embedding excluded at length {}", k + 1));
            }
        }
        EmbedOutcome::Exhausted => tally.worsen(Verdict::Inconclusive, "embedding search ran out of budget".into()),
        EmbedOutcome::Found(m) => {
            let w = format!("component embeds; centre goes to {}", host_name(&host_ball, m[&c0]));
            if pattern_complete {
                tally.worsen(Verdict::Failed, w);
            } else {
                tally.worsen(Verdict::Inconclusive, format!("{w} (truncated)"));
            }
        }
    }
    Ok(())
}
