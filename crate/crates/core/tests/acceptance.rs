//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sunflower_core::generators::{cube_side, cube_vertex, gen_named, GeneratorId};
use sunflower_core::ksets::{
    encode_colouring, enumerate_presentations, find_sunflower_copies, random_sets, verify_witness, EnumerationBudget,
    Ground, Presentation, VerifyMode,
};
use sunflower_core::partitionlab::{colour_copy_search, colour_copy_sets, named_partition, Colouring};
use sunflower_core::ramsey::{
    count_suitable, dichotomy_holds, epsilon_condition, equal_parts, eval_poly, gen_witness_hypergraph,
    random_colouring, ratio, suitable_params, suitable_polynomial, vcvrp_adversary, AdversaryBudget, AdversaryMode,
    GenOptions,
};
use sunflower_core::structures::{check_3dap_over_empty, satisfies_class, ClassSpec, Structure};
use sunflower_core::witness::{build_witness_chain, extract_sunflower, paste, verify_certificate};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(limit: Duration, started: Instant) -> Result<Duration, String> {
    let took = started.elapsed();
    if took > limit {
        Err(format!("took {took:.1?}, limit {limit:?}"))
    } else {
        Ok(took)
    }
}

/// Connected components (vertices, edges) of the graph whose edges are the 2-sets.
fn components(sets: &[Vec<Ground>]) -> Vec<(usize, usize)> {
    let mut comps: Vec<(BTreeSet<Ground>, usize)> = Vec::new();
    for s in sets {
        let hits: Vec<usize> = (0..comps.len())
            .filter(|&i| s.iter().any(|x| comps[i].0.contains(x)))
            .collect();
        let mut merged: (BTreeSet<Ground>, usize) = (s.iter().copied().collect(), 1);
        for &i in hits.iter().rev() {
            let (vs, es) = comps.remove(i);
            merged.0.extend(vs);
            merged.1 += es;
        }
        comps.push(merged);
    }
    let mut out: Vec<(usize, usize)> = comps.into_iter().map(|(v, e)| (v.len(), e)).collect();
    out.sort_unstable();
    out
}

fn has_sunflower(p: &Presentation, b: &Structure) -> bool {
    !find_sunflower_copies(p, b, Some(1)).unwrap().is_empty()
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let b = Structure::pure(3);
    let budget = EnumerationBudget::default();
    let seven =
        verify_witness(&Structure::pure(7), &b, 2, VerifyMode::Exhaustive, budget).map_err(|e| e.to_string())?;
    let six = verify_witness(&Structure::pure(6), &b, 2, VerifyMode::Exhaustive, budget).map_err(|e| e.to_string())?;
    if !seven.pass {
        return Err("7 vertices reported as not a witness".into());
    }
    let Some(cx) = six.counterexample.filter(|_| !six.pass) else {
        return Err("6 vertices reported as a witness".into());
    };
    if components(cx.sets()) != [(3, 3), (3, 3)] {
        return Err(format!("counterexample is not two disjoint triangles: {:?}", cx.sets()));
    }
    // oracle: every canonical presentation, checked one by one
    let all7 = enumerate_presentations(&Structure::pure(7), 2, budget).map_err(|e| e.to_string())?;
    if let Some(p) = all7.par_iter().find_any(|p| !has_sunflower(p, &b)) {
        return Err(format!(
            "oracle found a presentation of 7 without a sunflower: {:?}",
            p.sets()
        ));
    }
    let all6 = enumerate_presentations(&Structure::pure(6), 2, budget).map_err(|e| e.to_string())?;
    let bad6: Vec<&Presentation> = all6.par_iter().filter(|p| !has_sunflower(p, &b)).collect();
    if bad6.is_empty() || !bad6.iter().all(|p| components(p.sets()) == [(3, 3), (3, 3)]) {
        return Err("oracle's failures at 6 are not all two triangles".into());
    }
    if !bad6.iter().any(|p| p.normalised().sets() == cx.normalised().sets()) {
        return Err("verifier's counterexample is unknown to the oracle".into());
    }
    let took = within(Duration::from_secs(60), started)?;
    Ok(format!(
        "7 passes, 6 fails with two triangles; oracle checked {} + {} presentations ({} failing at 6) in {took:.1?}",
        all7.len(),
        all6.len(),
        bad6.len()
    ))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let b = Structure::graph(2, &[(0, 1)]).unwrap();
    let k = ClassSpec::graphs();
    let (seed, chain) = (0..100u64)
        .find_map(|seed| {
            build_witness_chain(&k, &b, 2, seed, &GenOptions::default())
                .ok()
                .map(|c| (seed, c))
        })
        .ok_or("no seed built a chain")?;
    let top = Arc::new(chain.top().clone());
    let n = top.size();
    let invalid: Vec<String> = (0..10_000u64)
        .into_par_iter()
        .filter_map(|trial| {
            let p = Presentation::new(top.clone(), 2, random_sets(n, 2, 0xACCE, trial)).unwrap();
            match extract_sunflower(&chain, &p, 2) {
                Ok(out) if verify_certificate(&out.cert, &b, &p) => None,
                Ok(_) => Some(format!("trial {trial}: certificate rejected")),
                Err(e) => Some(format!("trial {trial}: {e}")),
            }
        })
        .collect();
    if let Some(first) = invalid.first() {
        return Err(format!(
            "{} of 10000 presentations failed; first: {first}",
            invalid.len()
        ));
    }
    let took = within(Duration::from_secs(300), started)?;
    Ok(format!(
        "seed {seed}, {n}-vertex witness, 10000/10000 certificates verified in {took:.1?}"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut copies = 0;
    for pair in 0..200u64 {
        let size = rng.random_range(5..=8);
        let m = gen_named(GeneratorId::RandomGraph, size, pair).map_err(|e| e.to_string())?;
        let mut verts: Vec<usize> = (0..size).collect();
        verts.shuffle(&mut rng);
        verts.truncate(rng.random_range(2..=3));
        verts.sort_unstable();
        let b = m.induced(&verts);
        let chi = random_colouring(size, &mut rng);
        let p = encode_colouring(&m, &chi).map_err(|e| e.to_string())?;
        let certs = find_sunflower_copies(&p, &b, None).map_err(|e| e.to_string())?;
        let with_centre: BTreeSet<Vec<usize>> = certs
            .iter()
            .filter(|c| !c.centre.is_empty())
            .map(|c| c.petals.clone())
            .collect();
        let without: BTreeSet<Vec<usize>> = certs
            .iter()
            .filter(|c| c.centre.is_empty())
            .map(|c| c.petals.clone())
            .collect();
        let (mono, hetero) = colour_copy_sets(&m, &chi, &b).map_err(|e| e.to_string())?;
        let report = colour_copy_search(&m, &chi, &b).map_err(|e| e.to_string())?;
        let mono: BTreeSet<Vec<usize>> = mono.into_iter().collect();
        let hetero: BTreeSet<Vec<usize>> = hetero.into_iter().collect();
        if with_centre != mono
            || without != hetero
            || report.mono_count != mono.len()
            || report.hetero_count != hetero.len()
        {
            mismatches += 1;
        }
        copies += certs.len();
    }
    if mismatches > 0 {
        return Err(format!("{mismatches} of 200 pairs mismatched"));
    }
    Ok(format!("200 pairs, {copies} sunflower copies, zero mismatches"))
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    for (n, a1) in [(2usize, ratio(1, 2)), (3, ratio(1, 6))] {
        let params = suitable_params(n, &a1).map_err(|e| e.to_string())?;
        if !epsilon_condition(n, &params.epsilon, &params.a1) {
            return Err(format!("n={n}: ε condition fails"));
        }
        let poly = suitable_polynomial(n, &params.epsilon, &params.a0);
        let c_min = params.c_min;
        if !(c_min..c_min + 200).all(|c| eval_poly(&poly, c).is_positive())
            || (c_min > 1 && eval_poly(&poly, c_min - 1).is_positive())
        {
            return Err(format!("n={n}: c_min = {c_min} is not the threshold"));
        }
        let sizes = [c_min, c_min + 1, c_min + 7, 2 * c_min, 3 * c_min];
        let mut violations = 0;
        for (i, &c) in sizes.iter().enumerate() {
            let parts = equal_parts(n, c as usize);
            let mut rng = ChaCha8Rng::seed_from_u64(40 + i as u64);
            let colourings: Vec<Colouring> = (0..1000).map(|_| random_colouring(n * c as usize, &mut rng)).collect();
            violations += colourings
                .par_iter()
                .filter(|chi| {
                    let counts = count_suitable(&parts, std::slice::from_ref(*chi)).unwrap();
                    !dichotomy_holds(&params, c, &counts, 0)
                })
                .count();
        }
        if violations > 0 {
            return Err(format!("n={n}: {violations} dichotomy violations"));
        }
        lines.push(format!(
            "n={n}: ε={}, a0={}, c_min={c_min}, 5000 colourings ok",
            params.epsilon, params.a0
        ));
    }
    Ok(lines.join("; "))
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    let mut lines = Vec::new();
    for (n, c) in [(2usize, 5usize), (3, 3)] {
        for s in [1usize, 2] {
            let opts = GenOptions {
                c_override: Some(c),
                ..GenOptions::default()
            };
            let mut witnesses = 0;
            let mut small = 0;
            for seed in 0..50u64 {
                let h = match gen_witness_hypergraph(n, s, 4, seed, &opts) {
                    Ok(h) => h,
                    Err(e) => {
                        problems.push(format!("(n={n}, s={s}, seed {seed}): {e}"));
                        continue;
                    }
                };
                if h.girth().is_some_and(|g| g < 4) {
                    problems.push(format!("(n={n}, s={s}, seed {seed}): girth below 4"));
                }
                if h.parts.len() != n || h.parts.iter().any(|p| p.len() != c) {
                    problems.push(format!("(n={n}, s={s}, seed {seed}): unequal parts"));
                }
                if h.vertex_count() <= 10 {
                    small += 1;
                    let report = vcvrp_adversary(&h, s, AdversaryMode::Exhaustive, &AdversaryBudget::default())
                        .map_err(|e| e.to_string())?;
                    if report.counterexample.is_none() {
                        witnesses += 1;
                    }
                }
            }
            lines.push(format!("(n={n}, s={s}): {witnesses}/{small} witnesses"));
            if small > 0 && witnesses == 0 {
                problems.push(format!("(n={n}, s={s}): adversary defeats all {small} small instances"));
            }
        }
    }
    if problems.is_empty() {
        Ok(lines.join(", "))
    } else {
        Err(format!("{}; {}", lines.join(", "), problems.join("; ")))
    }
}

fn criterion_6() -> Outcome {
    let p3 = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
    let k = ClassSpec::kn_free(3).map_err(|e| e.to_string())?;
    let opts = GenOptions {
        c_override: Some(4),
        ..GenOptions::default()
    };
    let mut triangles_checked = 0;
    let mut edges = 0;
    for seed in 0..20u64 {
        let h = gen_witness_hypergraph(3, 1, 4, seed, &opts).map_err(|e| e.to_string())?;
        let out = paste(&h, &p3, &k).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = &out.structure;
        if !satisfies_class(s, &k).map_err(|e| e.to_string())? {
            return Err(format!("seed {seed}: output contains a triangle"));
        }
        let copies: Vec<BTreeSet<usize>> = out.copies.iter().map(|c| c.iter().copied().collect()).collect();
        for a in 0..s.size() {
            for &b in s.neighbours(a).iter().filter(|&&b| b > a) {
                for &c in s.neighbours(b).iter().filter(|&&c| c > b && s.adjacent(a, c)) {
                    triangles_checked += 1;
                    if !copies
                        .iter()
                        .any(|cp| cp.contains(&a) && cp.contains(&b) && cp.contains(&c))
                    {
                        return Err(format!("seed {seed}: triangle {a} {b} {c} spans several copies"));
                    }
                }
            }
        }
        edges += h.edges.len();
    }
    Ok(format!(
        "20 pastings ({edges} edge copies) triangle-free; {triangles_checked} Gaifman triangles, all inside one copy"
    ))
}

fn criterion_7() -> Outcome {
    let limit = Duration::from_secs(60);

    let started = Instant::now();
    let s = gen_named(GeneratorId::KnFree(3), 200, 7).map_err(|e| e.to_string())?;
    let anchor = 0;
    let p = named_partition(&s, "neighbourhood", Some(anchor)).map_err(|e| e.to_string())?;
    let (c_block, d_block) = (&p.blocks[0], &p.blocks[1]);
    if d_block.iter().any(|&u| d_block.iter().any(|&v| s.adjacent(u, v))) {
        return Err("(a) D contains an edge".into());
    }
    if c_block.iter().any(|&u| s.adjacent(anchor, u)) {
        return Err("(a) C contains a neighbour of the anchor".into());
    }
    within(limit, started).map_err(|e| format!("(a) {e}"))?;

    let started = Instant::now();
    let s = gen_named(GeneratorId::RbBichrome, 300, 7).map_err(|e| e.to_string())?;
    let p = named_partition(&s, "rb-CDE", None).map_err(|e| e.to_string())?;
    let e_block = s.induced(&p.blocks[2]);
    if e_block.tuple_count() != 0 {
        return Err(format!("(b) block E carries {} tuples", e_block.tuple_count()));
    }
    within(limit, started).map_err(|e| format!("(b) {e}"))?;

    let started = Instant::now();
    let side = 6;
    let s = gen_named(GeneratorId::DoubleEquivalence, side * side * side, 7).map_err(|e| e.to_string())?;
    if cube_side(s.size()) != side {
        return Err("(c) unexpected cube side".into());
    }
    let chi = Colouring::new((0..s.size()).map(|v| v / (side * side)).collect());
    let verts = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]].map(|u| cube_vertex(side, u));
    let b = s.induced(&verts);
    let r = colour_copy_search(&s, &chi, &b).map_err(|e| e.to_string())?;
    if (r.mono_count, r.hetero_count) != (0, 0) {
        return Err(format!(
            "(c) {} mono and {} hetero copies",
            r.mono_count, r.hetero_count
        ));
    }
    within(limit, started).map_err(|e| format!("(c) {e}"))?;

    let started = Instant::now();
    let s = gen_named(GeneratorId::LocalOrder, 100, 7).map_err(|e| e.to_string())?;
    let t = s.relation("T").map_err(|e| e.to_string())?;
    for v in 0..s.size() {
        let out: Vec<usize> = (0..s.size()).filter(|&w| s.holds(t, &[v, w])).collect();
        for &x in &out {
            for &y in &out {
                for &z in &out {
                    if s.holds(t, &[x, y]) && s.holds(t, &[y, z]) && s.holds(t, &[z, x]) {
                        return Err(format!("(d) out-neighbourhood of {v} has the 3-cycle {x} {y} {z}"));
                    }
                }
            }
        }
    }
    within(limit, started).map_err(|e| format!("(d) {e}"))?;

    Ok("(a) D edge-free, C avoids the anchor's neighbours; (b) E carries no tuples; (c) 0 mono, 0 hetero; (d) out-neighbourhoods acyclic".into())
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let tri_free =
        check_3dap_over_empty(&ClassSpec::kn_free(3).map_err(|e| e.to_string())?, 1).map_err(|e| e.to_string())?;
    if tri_free.passed {
        return Err("triangle-free graphs pass at bound 1".into());
    }
    let fam = tri_free.counterexample.ok_or("no counterexample family reported")?;
    // the forced-triangle family: three single points, each pair joined by an edge
    if !(fam.sides.iter().all(|s| s.size() == 1) && fam.pairs.iter().all(|p| p.tuple_count() == 2)) {
        return Err("reported family is not the forced-triangle family".into());
    }
    let k4 = ClassSpec::complete_free(3, 4).map_err(|e| e.to_string())?;
    let hyper = check_3dap_over_empty(&k4, 1).map_err(|e| e.to_string())?;
    if !hyper.passed {
        return Err("K_4^(3)-free 3-hypergraphs fail at bound 1".into());
    }
    let took = within(Duration::from_secs(120), started)?;
    Ok(format!(
        "triangle-free fails via the forced triangle; K_4^(3)-free passes ({} families) in {took:.1?}",
        hyper.families_checked
    ))
}

fn criterion_9() -> Outcome {
    let budget = EnumerationBudget::default();
    let two = enumerate_presentations(&Structure::pure(2), 2, budget).map_err(|e| e.to_string())?;
    if two.len() != 2 {
        return Err(format!("{} canonical presentations of 2 points on 2-sets", two.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bases = Vec::new();
    for n in 1..=4usize {
        bases.push(Structure::pure(n));
        bases.push(gen_named(GeneratorId::RandomGraph, n, n as u64).map_err(|e| e.to_string())?);
    }
    let mut classes = 0;
    let mut relabelled = 0;
    for base in &bases {
        let base_arc = Arc::new(base.clone());
        for k in 1..=2usize {
            let all = enumerate_presentations(base, k, budget).map_err(|e| e.to_string())?;
            let forms: Vec<Vec<Vec<Ground>>> = all.iter().map(|p| p.normalised().sets().to_vec()).collect();
            let distinct: HashSet<&Vec<Vec<Ground>>> = forms.iter().collect();
            if distinct.len() != forms.len() {
                return Err(format!("duplicate canonical forms for |C|={}, k={k}", base.size()));
            }
            classes += forms.len();
            for trial in 0..50 {
                let sets = random_sets(base.size(), k, 99, trial);
                let top = sets.iter().flatten().copied().max().unwrap_or(0) as usize + 1;
                let mut perm: Vec<Ground> = (0..(top + 3) as Ground).collect();
                perm.shuffle(&mut rng);
                let moved: Vec<Vec<Ground>> = sets
                    .iter()
                    .map(|s| s.iter().map(|&x| perm[x as usize]).collect())
                    .collect();
                let a = Presentation::new(base_arc.clone(), k, sets)
                    .map_err(|e| e.to_string())?
                    .normalised();
                let b = Presentation::new(base_arc.clone(), k, moved)
                    .map_err(|e| e.to_string())?
                    .normalised();
                if a.sets() != b.sets() {
                    return Err(format!(
                        "relabelling changed the canonical form for |C|={}, k={k}",
                        base.size()
                    ));
                }
                let hits = forms.iter().filter(|f| f.as_slice() == a.sets()).count();
                if hits != 1 {
                    return Err(format!("canonical form matches {hits} enumerated classes"));
                }
                relabelled += 1;
            }
        }
    }
    Ok(format!(
        "2 presentations for |C|=k=2; {classes} classes, {relabelled} relabellings, zero duplicates"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("classical sunflower number", criterion_1),
        ("end-to-end extraction", criterion_2),
        ("encoding equivalence", criterion_3),
        ("suitable k-sets dichotomy", criterion_4),
        ("hypergraph witness properties", criterion_5),
        ("pasting", criterion_6),
        ("partition counterexamples", criterion_7),
        ("3-DAP checks", criterion_8),
        ("canonical form self-consistency", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
