use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use sunflower_core::ksets::{find_sunflower_copies, random_sets, Ground, Presentation, SunflowerCert};
use sunflower_core::ramsey::{gen_witness_hypergraph, GenOptions, PartitionedHypergraph};
use sunflower_core::structures::{ClassSpec, Embedding, RelationKind, RelationSymbol, Signature, Structure};
use sunflower_core::witness::{
    build_witness_chain, extract_sunflower, paste, position_colouring, verify_certificate, verify_trace,
    ExtractionStep, WitnessChain,
};
use sunflower_core::Error;

fn k2() -> Structure {
    Structure::graph(2, &[(0, 1)]).unwrap()
}

fn graph_chain() -> &'static WitnessChain {
    static CHAIN: OnceLock<WitnessChain> = OnceLock::new();
    CHAIN.get_or_init(|| build_witness_chain(&ClassSpec::graphs(), &k2(), 2, 11, &GenOptions::default()).unwrap())
}

fn presentation(chain: &WitnessChain, sets: Vec<Vec<Ground>>) -> Presentation {
    let k = sets[0].len();
    Presentation::new(Arc::new(chain.level(k).structure.clone()), k, sets).unwrap()
}

#[test]
fn graph_chain_shape() {
    let chain = graph_chain();
    assert_eq!(chain.depth(), 2);
    let top = chain.level(2);
    assert_eq!(top.colourings, Some(4));
    assert_eq!(top.parts.len(), 2);
    assert_eq!(top.parts[0].len() + top.parts[1].len(), top.structure.size());
    assert!(ClassSpec::graphs().contains(&top.structure));
}

#[test]
fn chain_is_deterministic_in_seed() {
    let again = build_witness_chain(&ClassSpec::graphs(), &k2(), 2, 11, &GenOptions::default()).unwrap();
    assert_eq!(again.top(), graph_chain().top());
}

#[test]
fn one_level_pure_chain_gives_empty_centre() {
    let b = Structure::pure(2);
    let chain = build_witness_chain(&ClassSpec::pure(), &b, 1, 0, &GenOptions::default()).unwrap();
    let p = presentation(&chain, vec![vec![5], vec![2]]);
    let out = extract_sunflower(&chain, &p, 1).unwrap();
    assert!(out.cert.centre.is_empty());
    assert!(verify_certificate(&out.cert, &b, &p));
    verify_trace(&chain, &p, &out.trace, &out.cert).unwrap();
}

#[test]
fn shared_element_lands_in_the_centre() {
    let chain = graph_chain();
    let n = chain.top().size();
    let sets = (0..n).map(|v| vec![7, 8 + v as Ground]).collect();
    let p = presentation(chain, sets);
    match extract_sunflower(chain, &p, 2) {
        Ok(out) => {
            assert!(out.cert.centre.contains(&7));
            assert!(matches!(out.trace.steps[0], ExtractionStep::Mono { lambda: 7, .. }));
            verify_trace(chain, &p, &out.trace, &out.cert).unwrap();
        }
        Err(Error::ExtractionFailed { presentation, .. }) => {
            assert!(find_sunflower_copies(&presentation, &k2(), Some(1)).unwrap().is_empty());
        }
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn disjoint_sets_take_the_transversal_case() {
    let chain = graph_chain();
    let n = chain.top().size() as Ground;
    let sets = (0..n).map(|v| vec![2 * v, 2 * v + 1]).collect();
    let p = presentation(chain, sets);
    let out = extract_sunflower(chain, &p, 2).unwrap();
    assert!(out.cert.centre.is_empty());
    assert!(matches!(out.trace.steps[0], ExtractionStep::Disjoint { level: 2, .. }));
    verify_trace(chain, &p, &out.trace, &out.cert).unwrap();
}

#[test]
fn certificate_checks_reject_tampering() {
    let chain = graph_chain();
    let n = chain.top().size();
    let p = presentation(chain, random_sets(n, 2, 3, 0));
    let out = extract_sunflower(chain, &p, 2).unwrap();
    let b = k2();
    assert!(verify_certificate(&out.cert, &b, &p));

    let mut wider = out.cert.clone();
    let extra = (0..).find(|x| !wider.centre.contains(x)).unwrap();
    wider.centre.push(extra);
    wider.centre.sort_unstable();
    assert!(!verify_certificate(&wider, &b, &p));
    assert!(verify_trace(chain, &p, &out.trace, &wider).is_err());

    // a non-adjacent pair is not a copy of K_2
    let top = chain.top();
    let (u, v) = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .find(|&(u, v)| !top.adjacent(u, v) && sets_disjoint(p.set(u), p.set(v)))
        .unwrap();
    let wrong = SunflowerCert {
        iso: Embedding::new(vec![u, v]),
        petals: vec![u, v],
        centre: vec![],
    };
    assert!(!verify_certificate(&wrong, &b, &p));
}

fn sets_disjoint(a: &[Ground], b: &[Ground]) -> bool {
    a.iter().all(|x| !b.contains(x))
}

#[test]
fn tampered_traces_are_caught() {
    let chain = graph_chain();
    let n = chain.top().size();
    for trial in 0..20 {
        let p = presentation(chain, random_sets(n, 2, 5, trial));
        let Ok(out) = extract_sunflower(chain, &p, 2) else {
            continue;
        };
        verify_trace(chain, &p, &out.trace, &out.cert).unwrap();
        let mut bad = out.trace.clone();
        match &mut bad.steps[0] {
            ExtractionStep::Mono { lambda, .. } => *lambda += 1,
            ExtractionStep::Disjoint { target_copy, .. } => target_copy.reverse(),
            ExtractionStep::Base { .. } => unreachable!(),
        }
        assert!(verify_trace(chain, &p, &bad, &out.cert).is_err());
    }
}

#[test]
fn pasting_keeps_triangles_inside_copies() {
    let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
    let k = ClassSpec::kn_free(3).unwrap();
    let opts = GenOptions {
        c_override: Some(4),
        ..GenOptions::default()
    };
    let h = gen_witness_hypergraph(3, 1, 4, 9, &opts).unwrap();
    let out = paste(&h, &p3, &k).unwrap();
    let s = &out.structure;
    let copies: Vec<BTreeSet<usize>> = out.copies.iter().map(|c| c.iter().copied().collect()).collect();
    for t in s.tuples(0) {
        assert!(copies.iter().any(|c| t.iter().all(|x| c.contains(x))));
    }
    // P_3 copies contribute no Gaifman triangles; any triangle would need three copies
    for a in 0..s.size() {
        for &b in s.neighbours(a).iter().filter(|&&b| b > a) {
            for &c in s.neighbours(b).iter().filter(|&&c| c > b) {
                assert!(!s.adjacent(a, c), "triangle {a} {b} {c}");
            }
        }
    }
}

#[test]
fn pasting_needs_one_vertex_type() {
    let sig = Signature::new(vec![
        RelationSymbol::new("P", 1, RelationKind::Plain),
        RelationSymbol::new("E", 2, RelationKind::Symmetric),
    ])
    .unwrap();
    let k = ClassSpec::all(sig.clone());
    let marked = Structure::new(sig.clone(), 2, vec![vec![vec![0]], vec![vec![0, 1], vec![1, 0]]]).unwrap();
    let plain = Structure::new(sig, 2, vec![vec![], vec![vec![0, 1], vec![1, 0]]]).unwrap();
    let h = PartitionedHypergraph::new(2, vec![vec![0], vec![1]], vec![vec![0, 1]]).unwrap();
    assert!(matches!(paste(&h, &marked, &k), Err(Error::InvalidParameter(_))));
    assert_eq!(paste(&h, &plain, &k).unwrap().structure, plain);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extracted_certificates_verify(seed in any::<u64>(), trial in 0u64..1000) {
        let chain = graph_chain();
        let n = chain.top().size();
        let p = presentation(chain, random_sets(n, 2, seed, trial));
        match extract_sunflower(chain, &p, 2) {
            Ok(out) => {
                prop_assert!(verify_certificate(&out.cert, &k2(), &p));
                prop_assert!(out.cert.centre.len() < 2);
                prop_assert_eq!(verify_trace(chain, &p, &out.trace, &out.cert), Ok(()));
            }
            Err(Error::ExtractionFailed { presentation, .. }) => {
                prop_assert!(find_sunflower_copies(&presentation, &k2(), Some(1)).unwrap().is_empty());
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn disjoint_iff_heterochromatic_under_every_position_colouring(
        sets in proptest::collection::vec(proptest::collection::btree_set(0u32..12, 2), 3),
    ) {
        let sets: Vec<Vec<Ground>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let part_of = [0, 1, 2];
        let vertices = [0, 1, 2];
        let mut hetero_all = true;
        for code in 0..8usize {
            let f: Vec<usize> = (0..3).map(|i| (code >> i) & 1).collect();
            let chi = position_colouring(&sets, &part_of, &f);
            hetero_all &= chi.is_heterochromatic(&vertices);
        }
        let pairwise_disjoint = (0..3).all(|a| (a + 1..3).all(|b| sets_disjoint(&sets[a], &sets[b])));
        prop_assert_eq!(hetero_all, pairwise_disjoint);
    }
}

#[test]
fn pure_triples_extract_or_fail_with_a_genuine_counterexample() {
    let b = Structure::pure(3);
    let chain = build_witness_chain(&ClassSpec::pure(), &b, 2, 1, &GenOptions::default()).unwrap();
    let top = Arc::new(chain.top().clone());
    let n = top.size();
    for trial in 0..1000 {
        let p = Presentation::new(top.clone(), 2, random_sets(n, 2, 21, trial)).unwrap();
        match extract_sunflower(&chain, &p, 2) {
            Ok(out) => assert!(verify_certificate(&out.cert, &b, &p)),
            Err(Error::ExtractionFailed { presentation, .. }) => {
                assert!(find_sunflower_copies(&presentation, &b, Some(1)).unwrap().is_empty());
            }
            Err(e) => panic!("{e}"),
        }
    }
}
