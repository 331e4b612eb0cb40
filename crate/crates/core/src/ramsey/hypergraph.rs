//! Partitioned uniform hypergraphs, Berge girth and random high-girth generation.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::{binomial, failure_bound, potential_cycle_count, pow_half, ratio, suitable_params};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub epsilon: String,
    pub c: usize,
    /// "override", "bound" (the failure bound is below the threshold at `c`)
    /// or "cycle-count" (the bound asks for more than the configured maximum;
    /// see [`cycle_count_part_size`]).
    pub c_source: String,
    /// Least power of two at which the failure bound drops below the threshold.
    pub c_bound: Option<u64>,
    pub p: f64,
    pub ln_failure_bound: f64,
    pub s: usize,
    pub g: usize,
    pub seed: u64,
    pub attempts: usize,
    pub removed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HypergraphRepr")]
pub struct PartitionedHypergraph {
    pub n: usize,
    pub parts: Vec<Vec<usize>>,
    pub edges: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationMeta>,
}

#[derive(Deserialize)]
struct HypergraphRepr {
    n: usize,
    parts: Vec<Vec<usize>>,
    edges: Vec<Vec<usize>>,
    #[serde(default)]
    generation: Option<GenerationMeta>,
}

impl TryFrom<HypergraphRepr> for PartitionedHypergraph {
    type Error = Error;

    fn try_from(r: HypergraphRepr) -> Result<Self> {
        let mut h = PartitionedHypergraph::new(r.n, r.parts, r.edges)?;
        h.generation = r.generation;
        Ok(h)
    }
}

impl PartitionedHypergraph {
    /// Parts must partition `0..N` into `n` sets of equal size; edges are
    /// distinct n-sets (stored sorted, in sorted order).
    pub fn new(n: usize, parts: Vec<Vec<usize>>, edges: Vec<Vec<usize>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("uniformity must be at least 2".into()));
        }
        if parts.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} parts for uniformity {n}",
                parts.len()
            )));
        }
        let c = parts[0].len();
        if parts.iter().any(|p| p.len() != c) {
            return Err(Error::InvalidParameter("parts differ in size".into()));
        }
        let size = n * c;
        let mut seen = vec![false; size];
        let mut parts = parts;
        for p in &mut parts {
            p.sort_unstable();
            for &v in p.iter() {
                if v >= size || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidParameter("parts must partition 0..N".into()));
                }
            }
        }
        let edges = normalise_edges(n, size, edges)?;
        Ok(Self {
            n,
            parts,
            edges,
            generation: None,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn part_size(&self) -> usize {
        self.parts[0].len()
    }

    /// Part index of every vertex.
    pub fn part_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.vertex_count()];
        for (i, p) in self.parts.iter().enumerate() {
            for &v in p {
                out[v] = i;
            }
        }
        out
    }

    /// The part containing the whole edge, if any.
    pub fn inside_part(&self, edge: &[usize], part_of: &[usize]) -> Option<usize> {
        let i = part_of[edge[0]];
        edge.iter().all(|&v| part_of[v] == i).then_some(i)
    }

    pub fn is_transversal(&self, edge: &[usize], part_of: &[usize]) -> bool {
        let mut hit = vec![false; self.n];
        edge.iter().all(|&v| !std::mem::replace(&mut hit[part_of[v]], true))
    }

    pub fn girth(&self) -> Option<usize> {
        hypergraph_girth(self.vertex_count(), &self.edges)
    }
}

fn normalise_edges(n: usize, size: usize, edges: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let mut set = BTreeSet::new();
    for mut e in edges {
        e.sort_unstable();
        e.dedup();
        if e.len() != n || e.iter().any(|&v| v >= size) {
            return Err(Error::InvalidParameter(format!(
                "edge {e:?} is not an {n}-set of vertices"
            )));
        }
        if !set.insert(e) {
            return Err(Error::InvalidParameter("repeated edge".into()));
        }
    }
    Ok(set.into_iter().collect())
}

/// A shortest Berge cycle: distinct vertices `v_i` and distinct edges `e_i`
/// with `{v_i, v_{i+1}} ⊆ e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BergeCycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Incidence graph: vertices `0..N`, edge nodes `N..N+E`.
fn incidence(vertex_count: usize, edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); vertex_count + edges.len()];
    for (j, e) in edges.iter().enumerate() {
        for &v in e {
            adj[v].push(vertex_count + j);
            adj[vertex_count + j].push(v);
        }
    }
    adj
}

/// Shortest cycle through BFS from `root`, as (length, closing pair, parents).
/// Buffers are sparse since searches with a cap stay local.
fn cycle_from(adj: &[Vec<usize>], root: usize, cap: usize) -> Option<(usize, usize, usize, HashMap<usize, usize>)> {
    let mut dist: HashMap<usize, usize> = HashMap::from([(root, 0)]);
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([root]);
    let mut best: Option<(usize, usize, usize)> = None;
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if 2 * du + 1 >= best.map_or(cap, |b| b.0) {
            break;
        }
        for &w in &adj[u] {
            match dist.get(&w) {
                None => {
                    dist.insert(w, du + 1);
                    parent.insert(w, u);
                    queue.push_back(w);
                }
                Some(&dw) if parent.get(&u) != Some(&w) => {
                    let len = du + dw + 1;
                    if best.is_none_or(|b| len < b.0) {
                        best = Some((len, u, w));
                    }
                }
                Some(_) => {}
            }
        }
    }
    best.filter(|b| b.0 < cap).map(|(len, u, w)| (len, u, w, parent))
}

/// Berge girth (the least m ≥ 2 with a Berge m-cycle), `None` if acyclic.
pub fn hypergraph_girth(vertex_count: usize, edges: &[Vec<usize>]) -> Option<usize> {
    shortest_cycle(vertex_count, edges, None).map(|c| c.edges.len())
}

/// A shortest Berge cycle, optionally only if shorter than `below`.
pub fn shortest_cycle(vertex_count: usize, edges: &[Vec<usize>], below: Option<usize>) -> Option<BergeCycle> {
    let adj = incidence(vertex_count, edges);
    let cap = below.map_or(usize::MAX, |g| 2 * g);
    let best = (0..vertex_count)
        .into_par_iter()
        .filter_map(|r| cycle_from(&adj, r, cap).map(|(len, u, w, parent)| (len, r, u, w, parent)))
        .min_by_key(|x| (x.0, x.1))?;
    let (len, root, u, w, parent) = best;
    let path = |mut x: usize| {
        let mut p = vec![x];
        while x != root {
            x = parent[&x];
            p.push(x);
        }
        p.reverse();
        p
    };
    let mut walk = path(u);
    let mut back = path(w);
    back.reverse();
    back.pop();
    walk.extend(back);
    debug_assert_eq!(walk.len(), len);
    let vertices = walk.iter().copied().filter(|&x| x < vertex_count).collect();
    let edges = walk
        .iter()
        .filter(|&&x| x >= vertex_count)
        .map(|&x| x - vertex_count)
        .collect();
    Some(BergeCycle { vertices, edges })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenOptions {
    pub c_override: Option<usize>,
    /// The failure bound must fall below this for `c` to count as certified.
    pub threshold: f64,
    /// Smallest and largest part size generated when no override is given.
    pub min_c: usize,
    pub max_c: usize,
    pub max_attempts: usize,
    /// Fewest edges an accepted sample may keep.
    pub min_edges: usize,
    /// Largest number of sampled edges.
    pub max_edges: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            c_override: None,
            threshold: 0.5,
            min_c: 32,
            max_c: 1 << 14,
            max_attempts: 1000,
            min_edges: 1,
            max_edges: 5_000_000,
        }
    }
}

/// Largest `1/2^t` strictly below `1/g`.
pub fn default_epsilon(g: usize) -> (u32, f64) {
    let mut t = 1;
    while (1u64 << t) <= g as u64 {
        t += 1;
    }
    (t, 1.0 / (1u64 << t) as f64)
}

/// `c^(1-n+ε)`
pub fn edge_probability(n: usize, c: usize, epsilon: f64) -> f64 {
    (c as f64).powf(1.0 - n as f64 + epsilon)
}

/// Least power of two `c ≥ c_min` at which the failure bound (with
/// `a = min(a0, 1/2)` for `a1 = 1/(2s)`) drops below `threshold`.
pub fn certified_part_size(n: usize, s: usize, epsilon: f64, threshold: f64) -> Result<Option<u64>> {
    let a = bound_coefficient(n, s)?;
    let c_min = suitable_params(n, &ratio(1, 2 * s as i64))?.c_min;
    let target = threshold.ln();
    for t in 1..63 {
        let c = 1u64 << t;
        if c < c_min {
            continue;
        }
        if failure_bound(n, s, epsilon, c as f64, a).ln_bound < target {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn bound_coefficient(n: usize, s: usize) -> Result<f64> {
    let s = i64::try_from(s).map_err(|_| Error::BudgetExceeded("too many colourings".into()))?;
    Ok(suitable_params(n, &ratio(1, 2 * s))?
        .a0
        .to_f64()
        .unwrap_or(0.0)
        .min(0.5))
}

/// Expected number of cycles of length `2..g` at part size `c`, counting each
/// potential m-cycle sequence once per rotation and reflection (`2m` times).
pub fn expected_short_cycles(n: usize, c: usize, g: usize, epsilon: f64) -> f64 {
    let p = edge_probability(n, c, epsilon);
    (2..g)
        .map(|m| {
            let count = potential_cycle_count(n * c, n, m).to_f64().unwrap_or(f64::INFINITY);
            count * p.powi(m as i32) / (2 * m) as f64
        })
        .sum()
}

/// Least power of two `c ≥ min_c` with edge probability below 1/2 and fewer
/// than `c/2` expected short cycles, so that the removal pass usually stays
/// below `c` deletions.
pub fn cycle_count_part_size(n: usize, g: usize, epsilon: f64, min_c: usize, max_c: usize) -> Option<usize> {
    (1..usize::BITS)
        .map(|t| 1usize << t)
        .take_while(|&c| c <= max_c)
        .filter(|&c| c >= min_c)
        .find(|&c| edge_probability(n, c, epsilon) < 0.5 && expected_short_cycles(n, c, g, epsilon) < c as f64 / 2.0)
}

/// Reusable search marks, reset by bumping the round number.
struct Marks {
    round: Vec<u32>,
    source: Vec<u32>,
    dist: Vec<u32>,
    current: u32,
}

impl Marks {
    fn new(n: usize) -> Self {
        Self {
            round: vec![0; n],
            source: vec![0; n],
            dist: vec![0; n],
            current: 0,
        }
    }

    fn get(&self, v: usize) -> Option<(u32, u32)> {
        (self.round[v] == self.current).then(|| (self.source[v], self.dist[v]))
    }

    fn set(&mut self, v: usize, source: u32, dist: u32) {
        self.round[v] = self.current;
        self.source[v] = source;
        self.dist[v] = dist;
    }
}

/// Does `e` lie on a Berge cycle of length below `g`? Searches outward from
/// every vertex of `e` at once, avoiding `e`; two searches meeting within
/// `g - 2` edges close such a cycle.
fn on_short_cycle(
    e: usize,
    edges: &[Vec<usize>],
    alive: &[bool],
    incident: &[Vec<usize>],
    g: usize,
    marks: &mut Marks,
) -> bool {
    let limit = g.saturating_sub(2) as u32;
    if limit == 0 {
        return false;
    }
    marks.current += 1;
    let mut frontier = Vec::new();
    for (a, &v) in edges[e].iter().enumerate() {
        marks.set(v, a as u32, 0);
        frontier.push(v);
    }
    for _ in 0..limit.div_ceil(2) {
        let mut next = Vec::new();
        for &x in &frontier {
            let (a, dx) = marks.get(x).unwrap();
            for &f in &incident[x] {
                if f == e || !alive[f] {
                    continue;
                }
                for &w in &edges[f] {
                    match marks.get(w) {
                        None => {
                            marks.set(w, a, dx + 1);
                            next.push(w);
                        }
                        Some((b, dw)) if b != a && dx + 1 + dw <= limit => return true,
                        Some(_) => {}
                    }
                }
            }
        }
        frontier = next;
    }
    false
}

/// Deletes edges lying on cycles shorter than `g`, visiting edges in `order`.
/// Deleting edges creates no cycles, so one pass leaves girth at least `g`;
/// every deletion destroys a short cycle of the original sample.
pub fn remove_short_cycles(vertex_count: usize, edges: &mut Vec<Vec<usize>>, g: usize, order: &[usize]) -> usize {
    let mut incident = vec![Vec::new(); vertex_count];
    for (j, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v].push(j);
        }
    }
    let mut alive = vec![true; edges.len()];
    let mut marks = Marks::new(vertex_count);
    let mut removed = 0;
    for &e in order {
        if on_short_cycle(e, edges, &alive, &incident, g, &mut marks) {
            alive[e] = false;
            removed += 1;
        }
    }
    let mut j = 0;
    edges.retain(|_| {
        j += 1;
        alive[j - 1]
    });
    removed
}

/// Girth at least `g`: no edge lies on a shorter cycle.
pub fn girth_at_least(vertex_count: usize, edges: &[Vec<usize>], g: usize) -> bool {
    let mut incident = vec![Vec::new(); vertex_count];
    for (j, e) in edges.iter().enumerate() {
        for &v in e {
            incident[v].push(j);
        }
    }
    let alive = vec![true; edges.len()];
    let mut marks = Marks::new(vertex_count);
    (0..edges.len()).all(|e| !on_short_cycle(e, edges, &alive, &incident, g, &mut marks))
}

/// `n` parts of size `c`, edges i.i.d. with probability `c^(1-n+ε)`, then
/// edges on cycles shorter than `g` deleted in a seeded random order. Retries
/// with a fresh stream when too many edges are removed (at least `c`) or too
/// few remain.
pub fn gen_witness_hypergraph(
    n: usize,
    s: usize,
    g: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<PartitionedHypergraph> {
    if n < 2 || s < 1 || g < 2 {
        return Err(Error::InvalidParameter("need n ≥ 2, s ≥ 1, g ≥ 2".into()));
    }
    let (t, epsilon) = default_epsilon(g);
    let (c, c_source, c_bound) = match opts.c_override {
        Some(c) => (c, "override", None),
        None => {
            let bound = certified_part_size(n, s, epsilon, opts.threshold)?;
            match bound {
                Some(b) if b <= opts.max_c as u64 => (b as usize, "bound", bound),
                _ => {
                    let c = cycle_count_part_size(n, g, epsilon, opts.min_c, opts.max_c).ok_or_else(|| {
                        Error::BudgetExceeded(format!(
                            "no part size up to {} keeps short cycles below c/2",
                            opts.max_c
                        ))
                    })?;
                    (c, "cycle-count", bound)
                }
            }
        }
    };
    if c == 0 {
        return Err(Error::InvalidParameter("part size must be positive".into()));
    }
    let p = edge_probability(n, c, epsilon);
    if p >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p:.4} is not below 1/2 for part size {c}"
        )));
    }
    let size = n * c;
    let candidates = binomial(size, n)
        .to_u64()
        .ok_or_else(|| Error::BudgetExceeded(format!("C({size}, {n}) candidate edges")))?;
    if (candidates as f64) * p > opts.max_edges as f64 {
        return Err(Error::BudgetExceeded(format!(
            "about {} expected edges",
            (candidates as f64 * p) as u64
        )));
    }
    let binom = Binomial::new(candidates, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let parts: Vec<Vec<usize>> = (0..n).map(|i| (i * c..(i + 1) * c).collect()).collect();
    let mut last_reason = String::new();
    for attempt in 0..opts.max_attempts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let count = binom.sample(&mut rng);
        let mut chosen = BTreeSet::new();
        while (chosen.len() as u64) < count {
            let mut e: Vec<usize> = sample(&mut rng, size, n).into_vec();
            e.sort_unstable();
            chosen.insert(e);
        }
        let mut edges: Vec<Vec<usize>> = chosen.into_iter().collect();
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.shuffle(&mut rng);
        let removed = remove_short_cycles(size, &mut edges, g, &order);
        if removed >= c {
            last_reason = format!("removed {removed} edges, not fewer than c = {c}");
            continue;
        }
        if edges.len() < opts.min_edges {
            last_reason = format!("{} edges left, floor is {}", edges.len(), opts.min_edges);
            continue;
        }
        if !girth_at_least(size, &edges, g) {
            return Err(Error::Internal("a short cycle survived removal".into()));
        }
        let mut h = PartitionedHypergraph::new(n, parts, edges)?;
        h.generation = Some(GenerationMeta {
            epsilon: pow_half(t).to_string(),
            c,
            c_source: c_source.into(),
            c_bound,
            p,
            ln_failure_bound: failure_bound(n, s, epsilon, c as f64, bound_coefficient(n, s)?).ln_bound,
            s,
            g,
            seed,
            attempts: attempt + 1,
            removed,
        });
        return Ok(h);
    }
    Err(Error::GenerationFailed(format!(
        "{} attempts failed; last: {last_reason}",
        opts.max_attempts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn girth_examples() {
        assert_eq!(hypergraph_girth(4, &[vec![0, 1, 2], vec![0, 1, 3]]), Some(2));
        let fano = vec![
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![0, 5, 6],
            vec![1, 3, 5],
            vec![1, 4, 6],
            vec![2, 3, 6],
            vec![2, 4, 5],
        ];
        assert_eq!(hypergraph_girth(7, &fano), Some(3));
        let tree = vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6], vec![1, 7, 8]];
        assert_eq!(hypergraph_girth(9, &tree), None);
        // square in a graph
        assert_eq!(
            hypergraph_girth(4, &[vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]),
            Some(4)
        );
    }

    #[test]
    fn cycles_are_genuine() {
        let edges = vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4], vec![4, 0], vec![2, 5]];
        let c = shortest_cycle(6, &edges, None).unwrap();
        assert_eq!(c.edges.len(), 5);
        let m = c.vertices.len();
        for i in 0..m {
            let e = &edges[c.edges[i]];
            assert!(e.contains(&c.vertices[i]) && e.contains(&c.vertices[(i + 1) % m]));
        }
        assert!(shortest_cycle(6, &edges, Some(5)).is_none());
    }

    #[test]
    fn epsilon_below_inverse_girth() {
        assert_eq!(default_epsilon(4).1, 0.125);
        assert_eq!(default_epsilon(2).1, 0.25);
        assert_eq!(default_epsilon(3).1, 0.25);
    }

    #[test]
    fn generated_hypergraphs_have_girth() {
        let opts = GenOptions {
            c_override: Some(12),
            ..GenOptions::default()
        };
        for seed in 0..5 {
            let h = gen_witness_hypergraph(2, 1, 4, seed, &opts).unwrap();
            assert!(h.girth().is_none_or(|g| g >= 4));
            let meta = h.generation.as_ref().unwrap();
            assert!(meta.removed < 12);
            assert_eq!(h, gen_witness_hypergraph(2, 1, 4, seed, &opts).unwrap());
        }
        let h = gen_witness_hypergraph(2, 1, 2, 3, &opts).unwrap();
        assert_eq!(h.generation.unwrap().removed, 0);
    }
}
