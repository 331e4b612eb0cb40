//! Pasting structures into hypergraph edges, the recursive witness chain and
//! sunflower extraction.
//!
//! Level 1 of a chain is the target `B`. Level `j` pastes level `j-1` into
//! the edges of a partitioned girth-4 hypergraph built for `j^|C_{j-1}|`
//! colourings; its parts are indexed by the vertices of level `j-1`.
//!
//! Extraction from a presentation on j-sets looks at the colourings
//! `χ_f(v) = v_{f(i)}` (the `f(i)`-th smallest element of `v`'s set, for `v`
//! in part `i`). Either some part holds a copy of level `j-1` on which one
//! such colouring is constant with value `λ`, and we strip `λ` and recurse;
//! or some transversal copy of level `j-1` has pairwise disjoint sets, and
//! any copy of `B` inside it is a sunflower with empty centre.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ksets::{Ground, Presentation, SunflowerCert};
use crate::partitionlab::Colouring;
use crate::ramsey::{
    gen_witness_hypergraph, girth_at_least, hypergraph_girth, GenOptions, GenerationMeta, PartitionedHypergraph,
};
use crate::structures::{are_isomorphic, qf_type, ClassSpec, Embedding, Matcher, Structure};

/// Result of pasting: the structure, its parts and the vertex list of each edge copy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pasted {
    pub structure: Structure,
    pub parts: Vec<Vec<usize>>,
    pub copies: Vec<Vec<usize>>,
}

/// Replaces every edge of `h` by a copy of `b`: the edge's vertices in
/// increasing order carry `b`'s vertices in index order.
pub fn paste(h: &PartitionedHypergraph, b: &Structure, k: &ClassSpec) -> Result<Pasted> {
    b.signature().ensure_same(k.signature())?;
    if h.n != b.size() {
        return Err(Error::InvalidParameter(format!(
            "{}-uniform hypergraph cannot carry a {}-vertex structure",
            h.n,
            b.size()
        )));
    }
    if !k.is_free_amalgamation_class() {
        return Err(Error::InvalidClass("pasting needs a free amalgamation class".into()));
    }
    let size = h.vertex_count();
    if !girth_at_least(size, &h.edges, 4) {
        return Err(Error::GirthTooSmall {
            found: hypergraph_girth(size, &h.edges).unwrap_or(0),
            required: 4,
        });
    }
    let first = qf_type(b, 0, &[])?;
    for v in 1..b.size() {
        if qf_type(b, v, &[])? != first {
            return Err(Error::InvalidParameter(
                "vertices of the pasted structure differ in type".into(),
            ));
        }
    }
    let sig = b.signature().clone();
    let mut rels: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); sig.len()];
    for e in &h.edges {
        for (r, rel) in rels.iter_mut().enumerate() {
            rel.extend(b.tuples(r).iter().map(|t| t.iter().map(|&i| e[i]).collect::<Vec<_>>()));
        }
    }
    let structure = Structure::new(sig, size, rels.into_iter().map(|r| r.into_iter().collect()).collect())?;
    if !k.contains(&structure) {
        return Err(Error::Internal("pasted structure left the class".into()));
    }
    Ok(Pasted {
        structure,
        parts: h.parts.clone(),
        copies: h.edges.clone(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainLevel {
    pub structure: Structure,
    /// Parts indexed by the vertices of the previous level; empty at level 1.
    pub parts: Vec<Vec<usize>>,
    /// `j^|C_{j-1}|` colourings the level was built for.
    pub colourings: Option<u64>,
    pub seed: Option<u64>,
    pub hypergraph: Option<GenerationMeta>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessChain {
    pub target: Structure,
    pub class: ClassSpec,
    pub levels: Vec<ChainLevel>,
}

impl WitnessChain {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Structure at level `j` (1-based).
    pub fn level(&self, j: usize) -> &ChainLevel {
        &self.levels[j - 1]
    }

    pub fn top(&self) -> &Structure {
        &self.levels.last().unwrap().structure
    }
}

/// Seed of the hypergraph at level `j`.
pub fn level_seed(seed: u64, j: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng.next_u64()
}

pub fn build_witness_chain(
    k: &ClassSpec,
    b: &Structure,
    depth: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<WitnessChain> {
    if depth == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    k.ensure_transitive_free()?;
    b.signature().ensure_same(k.signature())?;
    if !k.contains(b) {
        return Err(Error::NotInClass);
    }
    if b.size() < 2 && depth > 1 {
        return Err(Error::InvalidParameter(
            "targets with fewer than two vertices need no witness".into(),
        ));
    }
    let mut levels = vec![ChainLevel {
        structure: b.clone(),
        parts: Vec::new(),
        colourings: None,
        seed: None,
        hypergraph: None,
    }];
    for j in 2..=depth {
        let prev = &levels[j - 2].structure;
        let n = prev.size();
        let s = u32::try_from(n)
            .ok()
            .and_then(|e| (j as u64).checked_pow(e))
            .filter(|&s| s <= usize::MAX as u64)
            .ok_or_else(|| Error::BudgetExceeded(format!("{j}^{n} colourings")))?;
        let seed_j = level_seed(seed, j);
        let h = gen_witness_hypergraph(n, s as usize, 4, seed_j, opts)?;
        let pasted = paste(&h, prev, k)?;
        levels.push(ChainLevel {
            structure: pasted.structure,
            parts: pasted.parts,
            colourings: Some(s),
            seed: Some(seed_j),
            hypergraph: h.generation,
        });
    }
    Ok(WitnessChain {
        target: b.clone(),
        class: k.clone(),
        levels,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ExtractionStep {
    /// `χ_f` is constant (`λ`) on a copy of the previous level inside `part`.
    Mono {
        level: usize,
        part: usize,
        f: Vec<usize>,
        lambda: Ground,
        /// Presentation vertices of the copy, in the previous level's vertex order.
        copy: Vec<usize>,
    },
    /// A transversal copy with pairwise disjoint sets, and a copy of the target inside it.
    Disjoint {
        level: usize,
        copy: Vec<usize>,
        target_copy: Vec<usize>,
    },
    /// Level 1: distinct 1-sets are pairwise disjoint.
    Base { copy: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionTrace {
    /// Isomorphism from the top level onto the presentation's base.
    pub base_iso: Vec<usize>,
    pub steps: Vec<ExtractionStep>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extraction {
    pub cert: SunflowerCert,
    pub trace: ExtractionTrace,
}

/// `χ_f(v) = v_{f(i)}` for `v` in part `i`; colour values are ground elements.
pub fn position_colouring(sets: &[Vec<Ground>], part_of: &[usize], f: &[usize]) -> Colouring {
    Colouring::new(sets.iter().zip(part_of).map(|(s, &i)| s[f[i]] as usize).collect())
}

fn disjoint(a: &[Ground], b: &[Ground]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Working state at one level: the level's vertices mapped into the
/// presentation and their sets with the collected centre removed.
struct LevelState {
    to_p: Vec<usize>,
    sets: Vec<Vec<Ground>>,
}

fn part_index(parts: &[Vec<usize>], size: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; size];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            out[v] = i;
        }
    }
    out
}

/// First copy of `d` inside `part` on which position `t` is constant: groups
/// by `λ` ascending, embeddings lexicographic within a group.
fn mono_copy(
    d: &Structure,
    c: &Structure,
    part: &[usize],
    sets: &[Vec<Ground>],
    t: usize,
) -> Option<(Ground, Vec<usize>)> {
    let mut groups: BTreeMap<Ground, Vec<usize>> = BTreeMap::new();
    for &v in part {
        groups.entry(sets[v][t]).or_default().push(v);
    }
    for (lambda, members) in groups {
        if members.len() < d.size() {
            continue;
        }
        let mut m = Matcher::new(d, c).ok()?;
        for q in 0..d.size() {
            m = m.allow(q, members.clone());
        }
        if let Some(e) = m.first() {
            return Some((lambda, e.map));
        }
    }
    None
}

/// First transversal copy of `d` with pairwise disjoint sets (lexicographic).
fn disjoint_copy(d: &Structure, c: &Structure, part_of: &[usize], sets: &[Vec<Ground>]) -> Option<Vec<usize>> {
    let m = Matcher::new(d, c).ok()?.filter(move |map, _, t| {
        map.iter()
            .filter(|&&x| x != usize::MAX)
            .all(|&x| part_of[x] != part_of[t] && disjoint(&sets[x], &sets[t]))
    });
    m.first().map(|e| e.map)
}

/// Finds a sunflower copy of the chain's target in a presentation of level `k`
/// (sets of size `k`), following the level-by-level case analysis.
pub fn extract_sunflower(chain: &WitnessChain, p: &Presentation, k: usize) -> Result<Extraction> {
    if k == 0 || k > chain.depth() {
        return Err(Error::InvalidParameter(format!(
            "level {k} is not in a chain of depth {}",
            chain.depth()
        )));
    }
    if p.k() != k {
        return Err(Error::InvalidParameter(format!(
            "presentation on {}-sets used at level {k}",
            p.k()
        )));
    }
    let top = &chain.level(k).structure;
    let base_iso = if p.base() == top {
        (0..top.size()).collect()
    } else {
        are_isomorphic(top, p.base())?
            .ok_or_else(|| Error::InvalidParameter("presentation base is not isomorphic to the chain level".into()))?
            .map
    };
    let mut state = LevelState {
        sets: base_iso.iter().map(|&v| p.set(v).to_vec()).collect(),
        to_p: base_iso.clone(),
    };
    let mut removed: Vec<Ground> = Vec::new();
    let mut steps = Vec::new();
    let b = &chain.target;
    for j in (1..=k).rev() {
        let c = &chain.level(j).structure;
        if j == 1 {
            steps.push(ExtractionStep::Base {
                copy: state.to_p.clone(),
            });
            let iso = Embedding::new(state.to_p.clone());
            return finish(b, p, iso, removed, base_iso, steps);
        }
        let d = &chain.level(j - 1).structure;
        let parts = &chain.level(j).parts;
        let part_of = part_index(parts, c.size());
        let searches: Vec<(usize, usize)> = (0..parts.len()).flat_map(|i| (0..j).map(move |t| (i, t))).collect();
        let mono = searches
            .par_iter()
            .find_map_first(|&(i, t)| mono_copy(d, c, &parts[i], &state.sets, t).map(|(l, m)| (i, t, l, m)));
        if let Some((i, t, lambda, map)) = mono {
            let mut f = vec![0; parts.len()];
            f[i] = t;
            let copy: Vec<usize> = map.iter().map(|&v| state.to_p[v]).collect();
            steps.push(ExtractionStep::Mono {
                level: j,
                part: i,
                f,
                lambda,
                copy: copy.clone(),
            });
            removed.push(lambda);
            state = LevelState {
                sets: map
                    .iter()
                    .map(|&v| state.sets[v].iter().copied().filter(|&x| x != lambda).collect())
                    .collect(),
                to_p: copy,
            };
            continue;
        }
        if let Some(map) = disjoint_copy(d, c, &part_of, &state.sets) {
            let copy: Vec<usize> = map.iter().map(|&v| state.to_p[v]).collect();
            let inner = Matcher::new(b, d)?
                .first()
                .ok_or_else(|| Error::Internal("target does not embed in the previous level".into()))?;
            let target_copy: Vec<usize> = inner.map.iter().map(|&u| copy[u]).collect();
            steps.push(ExtractionStep::Disjoint {
                level: j,
                copy,
                target_copy: target_copy.clone(),
            });
            return finish(b, p, Embedding::new(target_copy), removed, base_iso, steps);
        }
        return Err(Error::ExtractionFailed {
            level: j,
            presentation: Box::new(p.clone()),
        });
    }
    unreachable!("level 1 always returns")
}

fn finish(
    b: &Structure,
    p: &Presentation,
    iso: Embedding,
    mut centre: Vec<Ground>,
    base_iso: Vec<usize>,
    steps: Vec<ExtractionStep>,
) -> Result<Extraction> {
    centre.sort_unstable();
    let cert = SunflowerCert {
        petals: iso.image(),
        iso,
        centre,
    };
    if !cert.verify(b, p) {
        return Err(Error::Internal("extracted certificate does not verify".into()));
    }
    Ok(Extraction {
        cert,
        trace: ExtractionTrace { base_iso, steps },
    })
}

pub fn verify_certificate(cert: &SunflowerCert, b: &Structure, p: &Presentation) -> bool {
    cert.verify(b, p)
}

/// Re-checks every recorded step against the chain and presentation and
/// confirms that the trace ends in `cert`. Returns the first problem found.
pub fn verify_trace(
    chain: &WitnessChain,
    p: &Presentation,
    trace: &ExtractionTrace,
    cert: &SunflowerCert,
) -> Result<(), String> {
    let k = p.k();
    if k == 0 || k > chain.depth() {
        return Err(format!("level {k} is not in the chain"));
    }
    let top = &chain.level(k).structure;
    if !Embedding::new(trace.base_iso.clone()).is_induced_embedding(top, p.base()) || top.size() != p.base().size() {
        return Err("base isomorphism is not an isomorphism".into());
    }
    let mut to_p = trace.base_iso.clone();
    let mut removed: Vec<Ground> = Vec::new();
    let current = |v: usize, removed: &[Ground]| -> Vec<Ground> {
        p.set(v).iter().copied().filter(|x| !removed.contains(x)).collect()
    };
    let b = &chain.target;
    let mut level = k;
    for step in &trace.steps {
        match step {
            ExtractionStep::Mono {
                level: j,
                part,
                f,
                lambda,
                copy,
            } => {
                if *j != level || *j < 2 {
                    return Err(format!("mono step recorded at level {j}, expected {level}"));
                }
                let d = &chain.level(j - 1).structure;
                let parts = &chain.level(*j).parts;
                if *part >= parts.len() || f.len() != parts.len() {
                    return Err("mono step names a missing part".into());
                }
                if !Embedding::new(copy.clone()).is_induced_embedding(d, p.base()) {
                    return Err(format!("level {j}: copy is not an induced copy of level {}", j - 1));
                }
                let inside: BTreeSet<usize> = parts[*part].iter().map(|&v| to_p[v]).collect();
                if !copy.iter().all(|v| inside.contains(v)) {
                    return Err(format!("level {j}: copy leaves part {part}"));
                }
                let t = f[*part];
                if !copy.iter().all(|&v| current(v, &removed).get(t) == Some(lambda)) {
                    return Err(format!("level {j}: χ_f is not constant {lambda} on the copy"));
                }
                // the copy must sit inside the current level's image
                let image: BTreeSet<usize> = to_p.iter().copied().collect();
                if !copy.iter().all(|v| image.contains(v)) {
                    return Err(format!("level {j}: copy is outside the current level"));
                }
                removed.push(*lambda);
                to_p = copy.clone();
                level -= 1;
            }
            ExtractionStep::Disjoint {
                level: j,
                copy,
                target_copy,
            } => {
                if *j != level || *j < 2 {
                    return Err(format!("disjoint step recorded at level {j}, expected {level}"));
                }
                let d = &chain.level(j - 1).structure;
                if !Embedding::new(copy.clone()).is_induced_embedding(d, p.base()) {
                    return Err(format!("level {j}: copy is not an induced copy of level {}", j - 1));
                }
                let parts = &chain.level(*j).parts;
                let mut part_hit = vec![false; parts.len()];
                for (i, part) in parts.iter().enumerate() {
                    for &v in part {
                        if copy.contains(&to_p[v]) {
                            if part_hit[i] {
                                return Err(format!("level {j}: copy is not transversal"));
                            }
                            part_hit[i] = true;
                        }
                    }
                }
                if part_hit.iter().any(|h| !h) {
                    return Err(format!("level {j}: copy misses a part"));
                }
                for (a, &u) in copy.iter().enumerate() {
                    for &v in &copy[a + 1..] {
                        if !disjoint(&current(u, &removed), &current(v, &removed)) {
                            return Err(format!("level {j}: sets of {u} and {v} meet"));
                        }
                    }
                }
                if !target_copy.iter().all(|v| copy.contains(v)) {
                    return Err("target copy leaves the disjoint copy".into());
                }
                return check_end(b, p, cert, target_copy, removed);
            }
            ExtractionStep::Base { copy } => {
                if level != 1 {
                    return Err(format!("base step at level {level}"));
                }
                if *copy != to_p {
                    return Err("base copy differs from the current level".into());
                }
                return check_end(b, p, cert, copy, removed);
            }
        }
    }
    Err("trace ends without a conclusion".into())
}

fn check_end(
    b: &Structure,
    p: &Presentation,
    cert: &SunflowerCert,
    iso: &[usize],
    mut removed: Vec<Ground>,
) -> Result<(), String> {
    removed.sort_unstable();
    if cert.iso.map != iso || cert.centre != removed {
        return Err("certificate differs from the trace's conclusion".into());
    }
    if !cert.verify(b, p) {
        return Err("certificate does not verify".into());
    }
    Ok(())
}

/// Presentation of a chain level with a shared base pointer.
pub fn level_presentation(chain: &WitnessChain, k: usize, sets: Vec<Vec<Ground>>) -> Result<Presentation> {
    Presentation::new(Arc::new(chain.level(k).structure.clone()), k, sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{Signature, Structure};

    fn one_edge_hypergraph(n: usize) -> PartitionedHypergraph {
        let parts = (0..n).map(|i| vec![i]).collect();
        PartitionedHypergraph::new(n, parts, vec![(0..n).collect()]).unwrap()
    }

    #[test]
    fn pasting_one_edge_gives_the_structure() {
        let path = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let out = paste(&one_edge_hypergraph(3), &path, &ClassSpec::graphs()).unwrap();
        assert_eq!(out.structure, path);
    }

    #[test]
    fn pasting_an_edge_into_a_graph_rereads_it() {
        let h = PartitionedHypergraph::new(
            2,
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 2], vec![1, 3]],
        )
        .unwrap();
        let k2 = Structure::graph(2, &[(0, 1)]).unwrap();
        let out = paste(&h, &k2, &ClassSpec::graphs()).unwrap();
        assert_eq!(out.structure, Structure::graph(4, &[(0, 2), (1, 2), (1, 3)]).unwrap());
    }

    #[test]
    fn pasting_rejects_short_girth() {
        let h = PartitionedHypergraph::new(
            2,
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0, 2], vec![1, 2], vec![0, 1]],
        )
        .unwrap();
        let k2 = Structure::graph(2, &[(0, 1)]).unwrap();
        assert!(matches!(
            paste(&h, &k2, &ClassSpec::graphs()),
            Err(Error::GirthTooSmall { found: 3, required: 4 })
        ));
    }

    #[test]
    fn chain_of_depth_one_is_the_target() {
        let k2 = Structure::graph(2, &[(0, 1)]).unwrap();
        let chain = build_witness_chain(&ClassSpec::graphs(), &k2, 1, 0, &GenOptions::default()).unwrap();
        assert_eq!(chain.depth(), 1);
        assert_eq!(chain.top(), &k2);
    }

    #[test]
    fn non_transitive_class_is_rejected() {
        use crate::structures::{RelationKind, RelationSymbol};
        let sig = Signature::new(vec![RelationSymbol::new("P", 1, RelationKind::Plain)]).unwrap();
        let k = ClassSpec::all(sig.clone());
        let b = Structure::new(sig, 1, vec![vec![]]).unwrap();
        let err = build_witness_chain(&k, &b, 2, 0, &GenOptions::default()).unwrap_err();
        assert!(err.to_string().contains("requires transitive class"));
    }
}
