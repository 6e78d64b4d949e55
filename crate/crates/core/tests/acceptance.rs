//! Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use hypotree::cli::{cmd_build, cmd_verify, lemma_suite, BuildArgs, VerifyArgs};
use hypotree::construction::cert::edge_map;
use hypotree::construction::{build, ConstructionState, Side};
use hypotree::presentation::compiled::Compiled;
use hypotree::presentation::{
    max_bare_path_symbolic, max_binary_height_symbolic, presentations_equivalent, Address, SymbolicBound,
};
use hypotree::tree_core::binary::binary_tree;
use hypotree::tree_core::iso::unrooted_iso;
use hypotree::tree_core::tree::{ColoredTree, VertexId};
use hypotree::verify::{
    certificate_codes, check_decomposition, check_selected, CheckEntry, CodeOracle, Ctx, Params, Verdict,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_one(st: &ConstructionState, prev: Option<&ConstructionState>, id: &str) -> CheckEntry {
    if id == "nonisomorphic_decomposition" {
        let ctx = Ctx::new(st, prev, &Params::default()).unwrap();
        return check_decomposition(&ctx).unwrap_or_else(|e| CheckEntry::new(id, "error").failed("error", e.to_string()));
    }
    let r = check_selected(st, prev, &Params::default(), |c| c == id).unwrap();
    r.checks.into_iter().next().unwrap()
}

fn require(st: &ConstructionState, prev: Option<&ConstructionState>, id: &str, want: &[Verdict]) -> Result<(), String> {
    let c = run_one(st, prev, id);
    ensure(want.contains(&c.verdict), || format!("state {} {id}: {} ({})", st.n, c.verdict.label(), c.detail))
}

fn within(t0: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let el = t0.elapsed();
    ensure(el < limit, || format!("{what} took {el:?}, limit {limit:?}"))
}

fn finite(b: SymbolicBound) -> Option<usize> {
    match b {
        SymbolicBound::Finite(x) => Some(x),
        _ => None,
    }
}

fn base_suite(states: &[ConstructionState]) -> Outcome {
    let t0 = Instant::now();
    let st = &states[0];
    ensure(st.k == 2 && st.b == 3, || format!("k = {}, b = {}", st.k, st.b))?;
    let r = check_selected(st, None, &Params::default(), |_| true).map_err(|e| e.to_string())?;
    for id in ["dagger2", "dagger8", "nonisomorphic"] {
        let c = r.get(id).ok_or(format!("{id} missing"))?;
        ensure(c.verdict == Verdict::Proved, || format!("{id}: {}", c.verdict.label()))?;
    }
    ensure(r.passed(), || format!("failed: {:?}", r.failed_ids()))?;
    let t = Compiled::new(&st.t).unwrap().expand(64).tree;
    let s = Compiled::new(&st.s).unwrap().expand(64).tree;
    ensure(!t.has_cuts() && !s.has_cuts(), || "base trees are not finite".into())?;
    ensure(t.max_degree() == 3 && s.max_degree() <= 3, || "degree".into())?;
    ensure(unrooted_iso(&t.uncoloured(), &s.uncoloured()).is_none(), || "T_0 and S_0 are isomorphic".into())?;
    within(t0, Duration::from_secs(60), "base suite")?;
    Ok(format!("k = 2, b = 3, degree 3, non-embedding proved for lengths 0..=6 ({:.1?})", t0.elapsed()))
}

fn closure_suite(states: &[ConstructionState]) -> Outcome {
    let mut notes = Vec::new();
    for n in 1..=2 {
        let t0 = Instant::now();
        require(&states[n], Some(&states[n - 1]), "closure", &[Verdict::Proved])?;
        within(t0, Duration::from_secs(300), &format!("closure of state {n}"))?;
        notes.push(format!("state {n} in {:.1?}", t0.elapsed()));
    }
    Ok(notes.join(", "))
}

fn hypomorphism_suite(states: &[ConstructionState]) -> Outcome {
    let mut count = 0;
    for n in 1..=3 {
        let (st, prev) = (&states[n], &states[n - 1]);
        for id in ["hypomorphism", "edge_hypomorphism", "dagger14"] {
            require(st, Some(prev), id, &[Verdict::Proved])?;
        }
        let kt = st.last_ktilde().ok_or("no step record")?;
        let edge_certs = edge_map(st).map_err(|e| e.to_string())?.certs;
        for c in st.certs.iter().chain(&edge_certs) {
            for d in [kt, 2 * kt, 3 * kt] {
                let (a, b) = certificate_codes(st, c, d, CodeOracle::Symbolic).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("state {n}: codes differ for {} at depth {d}", c.x))?;
                if n <= 2 {
                    let (x, y) = certificate_codes(st, c, d, CodeOracle::Explicit).map_err(|e| e.to_string())?;
                    ensure(x == a && y == b, || format!("state {n}: explicit codes differ for {} at depth {d}", c.x))?;
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} code comparisons byte-equal for n = 1, 2, 3"))
}

fn nonisomorphism_suite(states: &[ConstructionState]) -> Outcome {
    for n in 1..=3 {
        let (st, prev) = (&states[n], &states[n - 1]);
        ensure(!presentations_equivalent(&st.t, &st.s).map_err(|e| e.to_string())?, || format!("T_{n} and S_{n} are equivalent"))?;
        require(st, Some(prev), "nonisomorphic", &[Verdict::Proved, Verdict::VerifiedToBound])?;
        require(st, Some(prev), "nonisomorphic_decomposition", &[Verdict::Proved, Verdict::VerifiedToBound])?;
    }
    Ok("n = 1, 2, 3 at depth 3 k_n".into())
}

fn growth_suite(states: &[ConstructionState]) -> Outcome {
    let mut rows = Vec::new();
    for n in 1..states.len() {
        let (st, prev) = (&states[n], &states[n - 1]);
        let kt = st.last_ktilde().ok_or("no step record")?;
        ensure(st.k == 2 * kt + 3 && st.b == prev.b + 3, || format!("state {n}: k = {}, ktilde = {kt}, b = {}", st.k, st.b))?;
        require(st, Some(prev), "growth_law", &[Verdict::Proved])?;
        rows.push(format!("k_{n} = {}", st.k));
    }
    for st in states {
        for side in [Side::T, Side::S] {
            let p = st.pres(side);
            let bare = finite(max_bare_path_symbolic(p).map_err(|e| e.to_string())?);
            let height = finite(max_binary_height_symbolic(p).map_err(|e| e.to_string())?);
            ensure(bare.is_some_and(|x| x <= st.k), || format!("state {}: bare {bare:?} > {}", st.n, st.k))?;
            ensure(height.is_some_and(|x| x <= st.b), || format!("state {}: height {height:?} > {}", st.n, st.b))?;
        }
    }
    Ok(rows.join(", "))
}

fn lemma_criterion() -> Outcome {
    let r = lemma_suite(0, 500, 40);
    ensure(r.passed(), || r.summary())?;
    for k in 1..=12u32 {
        let t = binary_tree(k, 0);
        ensure(t.len() == (1 << k) - 1, || format!("height {k}: {} vertices", t.len()))?;
    }
    Ok(r.summary())
}

fn tree_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let e = e.unwrap().path();
            if e.is_dir() {
                stack.push(e);
            } else if e.file_name().is_some_and(|f| f != "timings.json") {
                out.insert(e.strip_prefix(dir).unwrap().display().to_string(), fs::read(&e).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let d = tempfile::TempDir::new().map_err(|e| e.to_string())?;
        cmd_build(&BuildArgs { steps: 2, out: d.path().into() }).map_err(|e| e.to_string())?;
        let v = cmd_verify(&VerifyArgs { steps: None, depth: None, ext_len: 6, budget: 10_000_000, out: d.path().into() })
            .map_err(|e| e.to_string())?;
        ensure(v.passed, || v.summary.clone())?;
        runs.push(tree_files(d.path()));
    }
    ensure(runs[0] == runs[1], || "outputs differ".into())?;
    Ok(format!("{} files identical across two runs", runs[0].len()))
}

// Mutations

fn root_tree(st: &mut ConstructionState, side: Side) -> &mut ColoredTree {
    let p = match side {
        Side::T => &mut st.t,
        Side::S => &mut st.s,
    };
    let r = p.root.clone();
    &mut p.pieces.get_mut(&r).unwrap().tree
}

fn add_leaf(st: &mut ConstructionState, side: Side, at: VertexId) {
    let id = VertexId(st.next_id);
    st.next_id += 1;
    let t = root_tree(st, side);
    t.add_vertex(id).unwrap();
    t.add_edge(at, id).unwrap();
}

/// The vertex two steps beyond the previous root, on the path leading away from the old tree.
fn beyond_old_root(st: &ConstructionState, prev: &ConstructionState, side: Side) -> VertexId {
    let old = prev.pres(side);
    let r = old.root_vertex();
    let t = &st.pres(side).root_piece().tree;
    let ot = &old.root_piece().tree;
    let w = t.neighbours(r).into_iter().find(|w| !ot.contains(*w)).unwrap();
    t.neighbours(w).into_iter().find(|&x| x != r).unwrap()
}

fn s_like_t(st: &mut ConstructionState) {
    let mut s = st.t.clone();
    let r = s.root.clone();
    let v = s.root_vertex();
    s.pieces.get_mut(&r).unwrap().tree.set_colour(v, Some(Side::S.colour(st.n))).unwrap();
    st.s = s;
}

struct Mutation {
    check: &'static str,
    what: &'static str,
    state: usize,
    apply: fn(&mut ConstructionState, &[ConstructionState]),
}

const MUTATIONS: &[Mutation] = &[
    Mutation { check: "dagger1", what: "recolour an old leaf", state: 1, apply: |st, all| {
        let ot = &all[0].t.root_piece().tree;
        let r = all[0].t.root_vertex();
        let v = ot.sorted_ids().into_iter().find(|&v| v != r && ot.degree(v) == 1 && ot.colour(v).is_none()).unwrap();
        let c = st.red();
        root_tree(st, Side::T).set_colour(v, Some(c)).unwrap();
    } },
    Mutation { check: "dagger2", what: "leaf on a degree-3 vertex", state: 1, apply: |st, _| {
        let t = &st.t.root_piece().tree;
        let v = t.sorted_ids().into_iter().find(|&v| t.degree(v) == 3).unwrap();
        add_leaf(st, Side::T, v);
    } },
    Mutation { check: "dagger3", what: "root takes the other marker", state: 1, apply: |st, _| {
        let r = st.t.root_vertex();
        let c = st.blue();
        root_tree(st, Side::T).set_colour(r, Some(c)).unwrap();
    } },
    Mutation { check: "dagger4", what: "b below the measured binary height", state: 1, apply: |st, _| {
        let h = finite(max_binary_height_symbolic(&st.t).unwrap()).unwrap();
        st.b = h - 1;
    } },
    Mutation { check: "dagger5", what: "k below the measured bare path", state: 1, apply: |st, _| {
        let l = finite(max_bare_path_symbolic(&st.t).unwrap()).unwrap();
        st.k = l - 1;
    } },
    Mutation { check: "dagger6", what: "leaf on the path beyond the old T root", state: 1, apply: |st, all| {
        let v = beyond_old_root(st, &all[0], Side::T);
        add_leaf(st, Side::T, v);
    } },
    Mutation { check: "dagger7", what: "leaf on the path beyond the old S root", state: 2, apply: |st, all| {
        let v = beyond_old_root(st, &all[1], Side::S);
        add_leaf(st, Side::S, v);
    } },
    Mutation { check: "dagger8", what: "S replaced by T", state: 0, apply: |st, _| s_like_t(st) },
    Mutation { check: "dagger9", what: "T replaced by a path", state: 0, apply: |st, _| {
        let r = st.t.root_vertex();
        let mut t = ColoredTree::new();
        for i in 0..4 {
            t.add_vertex(VertexId(r.0 + i)).unwrap();
        }
        for i in 0..3 {
            t.add_edge(VertexId(r.0 + i), VertexId(r.0 + i + 1)).unwrap();
        }
        t.set_root(Some(r)).unwrap();
        t.set_colour(r, Some(Side::T.colour(0))).unwrap();
        let name = st.t.root.clone();
        let piece = st.t.pieces.get_mut(&name).unwrap();
        piece.tree = t;
        piece.names.clear();
    } },
    Mutation { check: "dagger11", what: "index 0 removed", state: 1, apply: |st, _| {
        st.enumeration.t.remove(&0);
    } },
    Mutation { check: "dagger12", what: "t_0 points at the root marker", state: 1, apply: |st, _| {
        st.enumeration.t.insert(0, Address::root_piece(st.t.root_vertex()));
    } },
    Mutation { check: "dagger13", what: "handled pair dropped", state: 2, apply: |st, _| {
        st.pairs.pop();
    } },
    Mutation { check: "dagger14", what: "two core pairs swap images", state: 2, apply: |st, _| {
        let m = &mut st.certs[0].core_map;
        let (a, b) = (m[0].1.clone(), m[1].1.clone());
        m[0].1 = b;
        m[1].1 = a;
    } },
    Mutation { check: "hypomorphism", what: "phi(x) moved to a neighbour", state: 1, apply: |st, _| {
        let c = Compiled::new(&st.s).unwrap();
        let mut nav = c.navigator();
        let y = st.pairs[0].1.clone();
        let l = nav.locate(&y).unwrap();
        let p = nav.parent(l).unwrap();
        let z = nav.address(p);
        st.pairs[0].1 = z.clone();
        st.certs[0].image = z;
    } },
    Mutation { check: "edge_hypomorphism", what: "two certificates swap places", state: 2, apply: |st, _| {
        st.certs.swap(0, 1);
    } },
    Mutation { check: "growth_law", what: "k one larger", state: 1, apply: |st, _| st.k += 1 },
    Mutation { check: "closure", what: "extra leaf in S", state: 1, apply: |st, _| {
        let t = &st.s.root_piece().tree;
        let v = t.sorted_ids().into_iter().rev().find(|&v| t.degree(v) == 2 && t.colour(v).is_none()).unwrap();
        add_leaf(st, Side::S, v);
    } },
    Mutation { check: "nonisomorphic", what: "S replaced by T", state: 1, apply: |st, _| s_like_t(st) },
    Mutation { check: "nonisomorphic_decomposition", what: "S replaced by T", state: 2, apply: |st, _| s_like_t(st) },
];

fn mutation_suite(states: &[ConstructionState]) -> Outcome {
    let mut caught = 0;
    let mut missed = Vec::new();
    for m in MUTATIONS {
        let prev = m.state.checked_sub(1).map(|i| &states[i]);
        let clean = run_one(&states[m.state], prev, m.check);
        if !clean.passed() {
            missed.push(format!("{} already fails on the clean state", m.check));
            continue;
        }
        let mut st = states[m.state].clone();
        (m.apply)(&mut st, states);
        let c = run_one(&st, prev, m.check);
        println!("    {:<28} {:<44} {}", m.check, m.what, c.verdict.label());
        if c.verdict == Verdict::Failed {
            caught += 1;
        } else {
            missed.push(format!("{} ({}): {}", m.check, m.what, c.verdict.label()));
        }
    }
    ensure(missed.is_empty() && caught >= 10, || missed.join("; "))?;
    Ok(format!("{caught} of {} mutations caught", MUTATIONS.len()))
}

fn main() {
    let t0 = Instant::now();
    let states = build(3).expect("build");
    let criteria: [(&str, Box<dyn Fn() -> Outcome + '_>); 8] = [
        ("1 base case", Box::new(|| base_suite(&states))),
        ("2 closure", Box::new(|| closure_suite(&states))),
        ("3 hypomorphism", Box::new(|| hypomorphism_suite(&states))),
        ("4 non-isomorphism", Box::new(|| nonisomorphism_suite(&states))),
        ("5 growth law", Box::new(|| growth_suite(&states))),
        ("6 lemmas", Box::new(lemma_criterion)),
        ("7 determinism", Box::new(determinism)),
        ("8 mutations", Box::new(|| mutation_suite(&states))),
    ];
    let mut failed = 0;
    for (name, f) in criteria.iter() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("PASS  criterion {name}: {msg} [{:.1?}]", t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("FAIL  criterion {name}: {msg} [{:.1?}]", t.elapsed());
            }
        }
    }
    println!("{} of 8 criteria passed in {:.1?}", 8 - failed, t0.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
