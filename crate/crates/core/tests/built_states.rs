use std::collections::BTreeSet;
use std::sync::OnceLock;

use hypotree::construction::{build, ConstructionState};
use hypotree::presentation::compiled::Compiled;
use hypotree::presentation::{
    max_bare_path_symbolic, max_binary_height_symbolic, presentations_equivalent, Presentation, SymbolicBound,
};
use hypotree::tree_core::bare::bare_path_report;
use hypotree::tree_core::binary::binary_height_report;
use hypotree::tree_core::canon::canonical_code;
use hypotree::verify::{certificate_codes, CodeOracle};
use proptest::prelude::*;

fn states() -> &'static [ConstructionState] {
    static S: OnceLock<Vec<ConstructionState>> = OnceLock::new();
    S.get_or_init(|| build(2).unwrap())
}

fn presentations() -> Vec<(String, Presentation)> {
    let mut out = Vec::new();
    for st in states() {
        out.push((format!("T{}", st.n), st.t.clone()));
        out.push((format!("S{}", st.n), st.s.clone()));
        for (c, name) in &st.t.rules {
            let mut p = st.t.clone();
            p.root = name.clone();
            out.push((format!("rule {c} of T{}", st.n), p));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn expansions_are_prefix_stable(n in 0usize..3, frac in 0.0f64..1.0) {
        let st = &states()[n];
        let d = ((3 * st.k) as f64 * frac) as usize;
        for p in [&st.t, &st.s] {
            let c = Compiled::new(p).unwrap();
            let small = c.expand(d);
            let big = c.expand(d + 1);
            let root = big.tree.root().unwrap();
            let cut = big.tree.ball(root, d).unwrap();
            prop_assert_eq!(canonical_code(&small.tree).unwrap(), canonical_code(&cut).unwrap());
            prop_assert_eq!(&small.addresses[..], &big.addresses[..small.addresses.len()]);
        }
    }
}

#[test]
fn expansions_have_degree_at_most_three() {
    for st in states() {
        for p in [&st.t, &st.s] {
            let c = Compiled::new(p).unwrap();
            for d in [4, st.k, 3 * st.k] {
                assert!(c.expand(d).tree.max_degree() <= 3, "state {} depth {d}", st.n);
            }
            if st.n > 0 {
                assert_eq!(c.expand(3 * st.k).tree.max_degree(), 3);
            }
        }
    }
}

#[test]
fn symbolic_analyses_agree_with_expansions() {
    for st in states() {
        for p in [&st.t, &st.s] {
            let SymbolicBound::Finite(bare) = max_bare_path_symbolic(p).unwrap() else { panic!("unbounded bare paths") };
            let SymbolicBound::Finite(height) = max_binary_height_symbolic(p).unwrap() else { panic!("unbounded height") };
            let c = Compiled::new(p).unwrap();
            for d in [st.k, 2 * st.k, 3 * st.k] {
                let e = c.expand(d);
                let bp = bare_path_report(&e.tree);
                assert!(bp.max <= bare, "state {} depth {d}: {} > {bare}", st.n, bp.max);
                let bh = binary_height_report(&e.tree);
                assert!(bh.height <= height || bh.censored);
            }
            let e = c.expand(3 * st.k);
            assert_eq!(bare_path_report(&e.tree).max, bare, "state {}", st.n);
            assert_eq!(binary_height_report(&e.tree).height, height, "state {}", st.n);
        }
    }
}

#[test]
fn equivalence_is_an_equivalence_and_implies_equal_codes() {
    let ps = presentations();
    let n = ps.len();
    let mut eq = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            eq[i][j] = presentations_equivalent(&ps[i].1, &ps[j].1).unwrap();
        }
    }
    for i in 0..n {
        assert!(eq[i][i], "{} is not equivalent to itself", ps[i].0);
        for j in 0..n {
            assert_eq!(eq[i][j], eq[j][i]);
            for k in 0..n {
                if eq[i][j] && eq[j][k] {
                    assert!(eq[i][k]);
                }
            }
            if eq[i][j] && i < j {
                for d in [3, 12, 30] {
                    let a = Compiled::new(&ps[i].1).unwrap().expand(d).tree;
                    let b = Compiled::new(&ps[j].1).unwrap().expand(d).tree;
                    assert_eq!(canonical_code(&a).unwrap(), canonical_code(&b).unwrap());
                }
            }
        }
    }
    for st in states() {
        assert!(!presentations_equivalent(&st.t, &st.s).unwrap());
    }
}

#[test]
fn addresses_resolve_injectively() {
    for st in states() {
        for p in [&st.t, &st.s] {
            let c = Compiled::new(p).unwrap();
            let addrs: Vec<_> = c.vertex_iter().take(5000).collect();
            let mut seen = BTreeSet::new();
            for a in &addrs {
                let mut nav = c.navigator();
                let l = nav.locate(a).unwrap();
                assert_eq!(&nav.address(l), a);
                assert!(seen.insert(a.clone()));
            }
        }
    }
}

#[test]
fn symbolic_and_explicit_certificate_codes_agree() {
    for st in states().iter().skip(1) {
        let kt = st.last_ktilde().unwrap();
        for cert in &st.certs {
            for d in [1, kt, 2 * kt] {
                let (a, b) = certificate_codes(st, cert, d, CodeOracle::Symbolic).unwrap();
                let (x, y) = certificate_codes(st, cert, d, CodeOracle::Explicit).unwrap();
                assert_eq!(a, x, "state {} depth {d} T side", st.n);
                assert_eq!(b, y, "state {} depth {d} S side", st.n);
                assert_eq!(a, b);
            }
        }
    }
}
