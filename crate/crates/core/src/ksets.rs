//! Structures on k-sets: presentations, sunflower detection and exhaustive
//! witness verification.
//!
//! A presentation assigns a distinct k-subset of the naturals (the "ground")
//! to every vertex of a base structure. Whether a set of vertices forms a
//! sunflower depends only on how their sets intersect, so presentations are
//! enumerated up to renaming of ground elements.
//!
//! Canonical form: give every ground element its membership vector (one bit
//! per vertex, vertex 0 most significant) and number the elements by
//! decreasing membership vector. Two presentations differ by a ground
//! renaming iff their canonical forms agree. A prefix of vertices is in
//! canonical form iff the restricted membership vectors are non-increasing in
//! label order, which is what the enumerator prunes on.

use std::collections::{BTreeSet, HashSet};
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitionlab::Colouring;
use crate::structures::{Embedding, Matcher, Structure};

pub type Ground = u32;

/// Set assignment in its file form, aligned with the base structure's vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetAssignment {
    pub k: usize,
    pub sets: Vec<Vec<Ground>>,
}

/// A base structure with a distinct k-set per vertex. Sets are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    base: Arc<Structure>,
    k: usize,
    sets: Vec<Vec<Ground>>,
}

impl Serialize for Presentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetAssignment {
            k: self.k,
            sets: self.sets.clone(),
        }
        .serialize(s)
    }
}

impl Presentation {
    pub fn new(base: Arc<Structure>, k: usize, sets: Vec<Vec<Ground>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if sets.len() != base.size() {
            return Err(Error::InvalidParameter(format!(
                "{} sets for a structure with {} vertices",
                sets.len(),
                base.size()
            )));
        }
        let mut sorted = Vec::with_capacity(sets.len());
        for (v, mut s) in sets.into_iter().enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.len() != k {
                return Err(Error::InvalidParameter(format!(
                    "set of vertex {v} does not have {k} elements"
                )));
            }
            sorted.push(s);
        }
        let distinct: HashSet<&Vec<Ground>> = sorted.iter().collect();
        if distinct.len() != sorted.len() {
            return Err(Error::InvalidParameter("sets are not pairwise distinct".into()));
        }
        Ok(Self { base, k, sets: sorted })
    }

    pub fn from_assignment(base: Arc<Structure>, a: SetAssignment) -> Result<Self> {
        Self::new(base, a.k, a.sets)
    }

    pub fn assignment(&self) -> SetAssignment {
        SetAssignment {
            k: self.k,
            sets: self.sets.clone(),
        }
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<Structure> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sets(&self) -> &[Vec<Ground>] {
        &self.sets
    }

    pub fn set(&self, v: usize) -> &[Ground] {
        &self.sets[v]
    }

    /// The same base with sets renamed into canonical ground labels.
    pub fn normalised(&self) -> Presentation {
        Presentation {
            base: self.base.clone(),
            k: self.k,
            sets: canonical_sets(&self.sets),
        }
    }
}

/// Renames ground elements into canonical labels (see the module docs).
pub fn canonical_sets(sets: &[Vec<Ground>]) -> Vec<Vec<Ground>> {
    let n = sets.len();
    let mut elements: Vec<Ground> = sets.iter().flatten().copied().collect();
    elements.sort_unstable();
    elements.dedup();
    let key = |g: Ground| -> Vec<bool> { sets.iter().map(|s| s.binary_search(&g).is_ok()).collect() };
    let mut keyed: Vec<(Vec<bool>, Ground)> = elements.iter().map(|&g| (key(g), g)).collect();
    // descending by membership vector, vertex 0 first
    keyed.sort_by(|a, b| b.0.cmp(&a.0));
    let mut label = std::collections::HashMap::new();
    for (i, (_, g)) in keyed.iter().enumerate() {
        label.insert(*g, i as Ground);
    }
    let mut out: Vec<Vec<Ground>> = sets.iter().map(|s| s.iter().map(|g| label[g]).collect()).collect();
    for s in &mut out {
        s.sort_unstable();
    }
    debug_assert_eq!(out.len(), n);
    out
}

/// The common pairwise intersection of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Centre {
    pub elements: Vec<Ground>,
    /// Fewer than two sets: the pairwise condition is vacuous. A single set is
    /// its own centre and the empty family has an empty centre by convention.
    pub degenerate: bool,
}

fn intersect(a: &[Ground], b: &[Ground]) -> Vec<Ground> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// The centre of a family of pairwise distinct finite sets, if it is a sunflower.
pub fn sunflower_centre(sets: &[Vec<Ground>]) -> Result<Option<Centre>> {
    let sorted: Vec<Vec<Ground>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let distinct: BTreeSet<&Vec<Ground>> = sorted.iter().collect();
    if distinct.len() != sorted.len() {
        return Err(Error::InvalidParameter("duplicate sets in family".into()));
    }
    match sorted.len() {
        0 => Ok(Some(Centre {
            elements: Vec::new(),
            degenerate: true,
        })),
        1 => Ok(Some(Centre {
            elements: sorted[0].clone(),
            degenerate: true,
        })),
        _ => {
            let c = intersect(&sorted[0], &sorted[1]);
            for i in 0..sorted.len() {
                for j in i + 1..sorted.len() {
                    if intersect(&sorted[i], &sorted[j]) != c {
                        return Ok(None);
                    }
                }
            }
            Ok(Some(Centre {
                elements: c,
                degenerate: false,
            }))
        }
    }
}

/// A copy of a target structure whose vertices' sets form a sunflower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SunflowerCert {
    /// Induced isomorphism from the target onto the petal substructure.
    pub iso: Embedding,
    /// Petal vertices, ascending.
    pub petals: Vec<usize>,
    pub centre: Vec<Ground>,
}

impl SunflowerCert {
    pub fn from_iso(p: &Presentation, iso: Embedding) -> Option<Self> {
        let sets: Vec<Vec<Ground>> = iso.map.iter().map(|&v| p.sets[v].clone()).collect();
        let centre = sunflower_centre(&sets).ok()??;
        Some(Self {
            petals: iso.image(),
            iso,
            centre: centre.elements,
        })
    }

    /// Petal sets pairwise intersect exactly in the centre (for a single
    /// petal: the centre is contained in it) and `iso` is an induced
    /// isomorphism from `b` onto the petal substructure.
    pub fn verify(&self, b: &Structure, p: &Presentation) -> bool {
        if self.iso.len() != b.size() || self.iso.image() != self.petals {
            return false;
        }
        if self.petals.iter().any(|&v| v >= p.base.size()) {
            return false;
        }
        if !self.iso.is_induced_embedding(b, &p.base) {
            return false;
        }
        let mut centre = self.centre.clone();
        centre.sort_unstable();
        centre.dedup();
        if centre.len() != self.centre.len() {
            return false;
        }
        match self.petals.len() {
            0 => centre.is_empty(),
            1 => intersect(&p.sets[self.petals[0]], &centre) == centre,
            _ => {
                for (i, &u) in self.petals.iter().enumerate() {
                    for &v in &self.petals[i + 1..] {
                        if intersect(&p.sets[u], &p.sets[v]) != centre {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

/// Pruning predicate: a candidate keeps the partially assigned vertices a sunflower.
pub(crate) fn sunflower_filter<'a>(sets: &'a [Vec<Ground>]) -> impl Fn(&[usize], usize, usize) -> bool + 'a {
    move |map, _, t| {
        let mut assigned = map.iter().copied().filter(|&x| x != usize::MAX);
        let Some(first) = assigned.next() else {
            return true;
        };
        let centre = match assigned.next() {
            Some(second) => intersect(&sets[first], &sets[second]),
            None => return true,
        };
        if intersect(&sets[first], &sets[t]) != centre {
            return false;
        }
        map.iter()
            .copied()
            .filter(|&x| x != usize::MAX)
            .all(|x| intersect(&sets[x], &sets[t]) == centre)
    }
}

/// Induced copies of `b` whose sets form a sunflower, one per image set, in
/// lexicographic order of the first embedding found for each image.
pub fn find_sunflower_copies(p: &Presentation, b: &Structure, limit: Option<usize>) -> Result<Vec<SunflowerCert>> {
    let m = Matcher::new(b, &p.base)?.filter(sunflower_filter(&p.sets));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if limit == Some(0) {
        return Ok(out);
    }
    m.run(|map| {
        let iso = Embedding::new(map.to_vec());
        if seen.insert(iso.image()) {
            if let Some(cert) = SunflowerCert::from_iso(p, iso) {
                out.push(cert);
            }
        }
        if limit.is_some_and(|l| out.len() >= l) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(out)
}

/// Limits for exhaustive enumeration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnumerationBudget {
    /// Largest `k * |C|` accepted.
    pub max_ground: usize,
    /// Largest number of search nodes (partial presentations) visited.
    pub max_nodes: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_ground: 64,
            max_nodes: 200_000_000,
        }
    }
}

#[derive(Clone)]
struct Prefix {
    sets: Vec<Vec<Ground>>,
    keys: Vec<u64>,
}

/// What to do after a vertex has been assigned.
enum Step {
    Descend,
    Skip,
    Stop,
}

struct Enumerator {
    n: usize,
    k: usize,
    nodes: AtomicU64,
    max_nodes: u64,
}

impl Enumerator {
    fn new(n: usize, k: usize, budget: EnumerationBudget) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if n > 64 || k * n > budget.max_ground {
            return Err(Error::BudgetExceeded(format!(
                "ground size k·|C| = {} exceeds the enumeration budget of {}",
                k * n,
                budget.max_ground.min(64 * k)
            )));
        }
        Ok(Self {
            n,
            k,
            nodes: AtomicU64::new(0),
            max_nodes: budget.max_nodes,
        })
    }

    fn bit(&self, v: usize) -> u64 {
        1u64 << (self.n - 1 - v)
    }

    /// Canonical extensions of `prefix` by one set, in lexicographic order.
    fn children(&self, prefix: &Prefix) -> Vec<Prefix> {
        let mut out = Vec::new();
        let mut choose = Vec::with_capacity(self.k);
        self.children_rec(prefix, prefix.sets.len(), prefix.keys.len(), 0, &mut choose, &mut out);
        out
    }

    fn children_rec(
        &self,
        prefix: &Prefix,
        v: usize,
        used: usize,
        from: usize,
        choose: &mut Vec<Ground>,
        out: &mut Vec<Prefix>,
    ) {
        if choose.len() == self.k {
            if prefix.sets.iter().any(|s| s == choose) {
                return;
            }
            let fresh = choose.iter().filter(|&&g| g as usize >= used).count();
            let mut keys = prefix.keys.clone();
            keys.extend(std::iter::repeat_n(0, fresh));
            for &g in choose.iter() {
                keys[g as usize] |= self.bit(v);
            }
            if keys.windows(2).all(|w| w[0] >= w[1]) {
                let mut sets = prefix.sets.clone();
                sets.push(choose.clone());
                out.push(Prefix { sets, keys });
            }
            return;
        }
        // old labels may be chosen freely; new labels must be used consecutively
        let limit = used + self.k;
        for g in from..limit {
            if g >= used {
                let next_new = used + choose.iter().filter(|&&x| x as usize >= used).count();
                if g != next_new {
                    break;
                }
            }
            choose.push(g as Ground);
            self.children_rec(prefix, v, used, g + 1, choose, out);
            choose.pop();
        }
    }

    fn tick(&self) -> Result<()> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.max_nodes {
            return Err(Error::BudgetExceeded(format!(
                "more than {} enumeration nodes",
                self.max_nodes
            )));
        }
        Ok(())
    }

    /// Depth-first walk; `visit` sees every canonical prefix after its last
    /// vertex is assigned. Returns true if the visitor stopped the walk.
    fn walk(&self, prefix: Prefix, visit: &mut dyn FnMut(&Prefix) -> Step) -> Result<bool> {
        for child in self.children(&prefix) {
            self.tick()?;
            match visit(&child) {
                Step::Stop => return Ok(true),
                Step::Skip => continue,
                Step::Descend => {
                    if child.sets.len() < self.n && self.walk(child, visit)? {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    fn root(&self) -> Prefix {
        Prefix {
            sets: Vec::new(),
            keys: Vec::new(),
        }
    }

    /// Canonical prefixes of length `depth` (or complete ones if shorter), in DFS order.
    fn frontier(&self, depth: usize, keep: &dyn Fn(&Prefix) -> bool) -> Result<Vec<Prefix>> {
        let mut out = Vec::new();
        let mut visit = |p: &Prefix| {
            if !keep(p) {
                return Step::Skip;
            }
            if p.sets.len() >= depth.min(self.n) {
                out.push(p.clone());
                Step::Skip
            } else {
                Step::Descend
            }
        };
        if self.n == 0 {
            return Ok(vec![self.root()]);
        }
        self.walk(self.root(), &mut visit)?;
        Ok(out)
    }
}

/// All presentations of `c` on k-sets up to renaming of ground elements, in
/// canonical form and lexicographic order.
pub fn enumerate_presentations(c: &Structure, k: usize, budget: EnumerationBudget) -> Result<Vec<Presentation>> {
    let base = Arc::new(c.clone());
    let e = Enumerator::new(c.size(), k, budget)?;
    if c.size() == 0 {
        return Ok(vec![Presentation::new(base, k, Vec::new())?]);
    }
    let n = c.size();
    let mut out = Vec::new();
    let mut visit = |p: &Prefix| {
        if p.sets.len() == n {
            out.push(p.sets.clone());
        }
        Step::Descend
    };
    e.walk(e.root(), &mut visit)?;
    out.into_iter()
        .map(|sets| Presentation::new(base.clone(), k, sets))
        .collect()
}

/// Number of presentations, without materialising them.
pub fn count_presentations(n: usize, k: usize, budget: EnumerationBudget) -> Result<u64> {
    let e = Enumerator::new(n, k, budget)?;
    if n == 0 {
        return Ok(1);
    }
    let mut count = 0u64;
    let mut visit = |p: &Prefix| {
        if p.sets.len() == n {
            count += 1;
        }
        Step::Descend
    };
    e.walk(e.root(), &mut visit)?;
    Ok(count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum VerifyMode {
    Exhaustive,
    Random { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessVerdict {
    pub pass: bool,
    /// Canonical-order first presentation without a sunflower copy.
    pub counterexample: Option<Presentation>,
    /// Search nodes (exhaustive) or trials (random) examined.
    pub examined: u64,
}

/// Whether the first `upto` vertices (with `upto - 1` among the petals) hold
/// a sunflower copy of `b`.
fn has_copy_through(c: &Structure, b: &Structure, sets: &[Vec<Ground>], last: usize) -> bool {
    let allowed: Vec<usize> = (0..=last).collect();
    if b.size() == 0 {
        return true;
    }
    (0..b.size()).any(|p| {
        let mut m = Matcher::new(b, c).unwrap().pin(p, last).filter(sunflower_filter(sets));
        for q in 0..b.size() {
            m = m.allow(q, allowed.clone());
        }
        m.connected_order().exists()
    })
}

/// Does every presentation of `c` on k-sets (exhaustive) or every sampled
/// presentation (random) contain a sunflower copy of `b`?
pub fn verify_witness(
    c: &Structure,
    b: &Structure,
    k: usize,
    mode: VerifyMode,
    budget: EnumerationBudget,
) -> Result<WitnessVerdict> {
    b.signature().ensure_same(c.signature())?;
    let base = Arc::new(c.clone());
    let n = c.size();
    if b.size() == 0 {
        return Ok(WitnessVerdict {
            pass: true,
            counterexample: None,
            examined: 0,
        });
    }
    match mode {
        VerifyMode::Exhaustive => {
            let e = Enumerator::new(n, k, budget)?;
            // prefixes that already contain a copy pass for every completion
            let open = |p: &Prefix| !has_copy_through(c, b, &p.sets, p.sets.len() - 1);
            let frontier = e.frontier(3, &open)?;
            let found = frontier
                .par_iter()
                .map(|start| -> Result<Option<Vec<Vec<Ground>>>> {
                    if start.sets.len() == n {
                        return Ok(Some(start.sets.clone()));
                    }
                    let mut hit = None;
                    let mut visit = |p: &Prefix| {
                        if has_copy_through(c, b, &p.sets, p.sets.len() - 1) {
                            Step::Skip
                        } else if p.sets.len() == n {
                            hit = Some(p.sets.clone());
                            Step::Stop
                        } else {
                            Step::Descend
                        }
                    };
                    e.walk(start.clone(), &mut visit)?;
                    Ok(hit)
                })
                .find_map_first(|r| match r {
                    Ok(None) => None,
                    other => Some(other),
                });
            let examined = e.nodes.load(Ordering::Relaxed);
            match found {
                Some(Err(err)) => Err(err),
                Some(Ok(Some(sets))) => Ok(WitnessVerdict {
                    pass: false,
                    counterexample: Some(Presentation::new(base, k, sets)?),
                    examined,
                }),
                _ => Ok(WitnessVerdict {
                    pass: true,
                    counterexample: None,
                    examined,
                }),
            }
        }
        VerifyMode::Random { trials, seed } => {
            if k * n > budget.max_ground.max(k) * 64 {
                return Err(Error::BudgetExceeded("ground too large for sampling".into()));
            }
            let found = (0..trials).into_par_iter().find_map_first(|trial| {
                let sets = random_sets(n, k, seed, trial);
                let p = Presentation::new(base.clone(), k, sets).ok()?;
                if find_sunflower_copies(&p, b, Some(1)).ok()?.is_empty() {
                    Some(p)
                } else {
                    None
                }
            });
            Ok(WitnessVerdict {
                pass: found.is_none(),
                counterexample: found,
                examined: trials,
            })
        }
    }
}

/// Smallest ground size with at least `n` distinct k-subsets.
pub fn minimal_ground(n: usize, k: usize) -> usize {
    let mut g = k;
    loop {
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (g - i) as u128 / (i + 1) as u128;
        }
        if c >= n as u128 {
            return g;
        }
        g += 1;
    }
}

/// Random distinct k-sets over a ground of random size between the minimum
/// and `k * n`, for trial number `trial` of a seeded run.
pub fn random_sets(n: usize, k: usize, seed: u64, trial: u64) -> Vec<Vec<Ground>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let lo = minimal_ground(n, k);
    let hi = (k * n).max(lo);
    let g = rng.random_range(lo..=hi);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut s: Vec<Ground> = Vec::with_capacity(k);
        while s.len() < k {
            let x = rng.random_range(0..g) as Ground;
            if !s.contains(&x) {
                s.push(x);
            }
        }
        s.sort_unstable();
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

/// Vertex `v` gets `{v, n + χ(v)}`: vertex codes and colour codes are disjoint.
pub fn encode_colouring(m: &Structure, chi: &Colouring) -> Result<Presentation> {
    chi.validate(m.size())?;
    let n = m.size() as Ground;
    let sets = chi
        .values
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            let code = n
                .checked_add(Ground::try_from(c).map_err(|_| Error::InvalidParameter("colour too large".into()))?)
                .ok_or_else(|| Error::InvalidParameter("colour too large".into()))?;
            Ok(vec![v as Ground, code])
        })
        .collect::<Result<Vec<_>>>()?;
    Presentation::new(Arc::new(m.clone()), 2, sets)
}

/// Colour code used by [`encode_colouring`] for colour `c` on `n` vertices.
pub fn colour_code(n: usize, c: usize) -> Ground {
    (n + c) as Ground
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Signature;

    fn pres(base: Structure, k: usize, sets: Vec<Vec<Ground>>) -> Presentation {
        Presentation::new(Arc::new(base), k, sets).unwrap()
    }

    #[test]
    fn centres() {
        let c = sunflower_centre(&[vec![1, 2], vec![1, 3], vec![1, 4]])
            .unwrap()
            .unwrap();
        assert_eq!(c.elements, vec![1]);
        assert!(!c.degenerate);
        assert_eq!(
            sunflower_centre(&[vec![1, 2], vec![3, 4]]).unwrap().unwrap().elements,
            Vec::<Ground>::new()
        );
        assert!(sunflower_centre(&[vec![1, 2], vec![2, 3], vec![1, 3]])
            .unwrap()
            .is_none());
        assert!(sunflower_centre(&[vec![1, 2], vec![2, 1]]).is_err());
        let single = sunflower_centre(&[vec![5, 6]]).unwrap().unwrap();
        assert!(single.degenerate);
        assert_eq!(single.elements, vec![5, 6]);
    }

    #[test]
    fn sunflower_copies() {
        let p = pres(Structure::pure(3), 2, vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
        let certs = find_sunflower_copies(&p, &Structure::pure(3), None).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].centre, vec![1]);
        assert!(certs[0].verify(&Structure::pure(3), &p));

        let tri = pres(Structure::pure(3), 2, vec![vec![1, 2], vec![2, 3], vec![1, 3]]);
        assert!(find_sunflower_copies(&tri, &Structure::pure(3), None)
            .unwrap()
            .is_empty());
        assert_eq!(find_sunflower_copies(&tri, &Structure::pure(2), None).unwrap().len(), 3);

        let e = Structure::graph(2, &[(0, 1)]).unwrap();
        let p = pres(e.clone(), 2, vec![vec![0, 1], vec![2, 3]]);
        let certs = find_sunflower_copies(&p, &e, None).unwrap();
        assert_eq!(certs.len(), 1);
        assert!(certs[0].centre.is_empty());
    }

    #[test]
    fn small_enumerations() {
        let b = EnumerationBudget::default();
        let two = enumerate_presentations(&Structure::pure(2), 1, b).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].sets(), &[vec![0], vec![1]]);
        let two = enumerate_presentations(&Structure::pure(2), 2, b).unwrap();
        let sets: Vec<_> = two.iter().map(|p| p.sets().to_vec()).collect();
        assert_eq!(sets, vec![vec![vec![0, 1], vec![0, 2]], vec![vec![0, 1], vec![2, 3]]]);
        assert_eq!(enumerate_presentations(&Structure::pure(3), 1, b).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_output_is_canonical_and_collision_free() {
        let b = EnumerationBudget::default();
        for n in 1..=4 {
            for k in 1..=2 {
                let all = enumerate_presentations(&Structure::pure(n), k, b).unwrap();
                let mut forms = BTreeSet::new();
                for p in &all {
                    assert_eq!(canonical_sets(p.sets()), p.sets());
                    assert!(forms.insert(p.sets().to_vec()));
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let b = EnumerationBudget {
            max_ground: 10,
            max_nodes: 1000,
        };
        assert!(matches!(
            enumerate_presentations(&Structure::pure(6), 2, b),
            Err(Error::BudgetExceeded(_))
        ));
        let b = EnumerationBudget {
            max_ground: 64,
            max_nodes: 10,
        };
        assert!(matches!(
            enumerate_presentations(&Structure::pure(5), 2, b),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn k_one_is_always_a_sunflower() {
        let c = Structure::graph(3, &[(0, 1), (1, 2)]).unwrap();
        let v = verify_witness(&c, &c, 1, VerifyMode::Exhaustive, EnumerationBudget::default()).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn encoding_shares_colour_code() {
        let e = Structure::graph(2, &[(0, 1)]).unwrap();
        let p = encode_colouring(&e, &Colouring::new(vec![0, 0])).unwrap();
        let certs = find_sunflower_copies(&p, &e, None).unwrap();
        assert_eq!(certs[0].centre, vec![colour_code(2, 0)]);
        let p = encode_colouring(&e, &Colouring::new(vec![0, 1])).unwrap();
        assert!(find_sunflower_copies(&p, &e, None).unwrap()[0].centre.is_empty());
        let one = Structure::new(Signature::graph(), 1, vec![vec![]]).unwrap();
        let p = encode_colouring(&one, &Colouring::new(vec![3])).unwrap();
        assert_eq!(find_sunflower_copies(&p, &one, None).unwrap().len(), 1);
    }

    #[test]
    fn random_sets_are_deterministic_and_distinct() {
        let a = random_sets(7, 2, 9, 3);
        assert_eq!(a, random_sets(7, 2, 9, 3));
        let set: BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), 7);
    }
}
