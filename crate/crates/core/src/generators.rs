//! Seeded finite approximations of generic structures.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::structures::types::{qf_type_unchecked, tuple_groups, AdmissibleCache};
use crate::structures::{combinations, ClassSpec, QfType, RelationKind, RelationSymbol, Signature, Structure};

/// Named generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorId {
    RandomGraph,
    /// Generic `K_n`-free graph, `n >= 3`.
    KnFree(usize),
    RandomTournament,
    RandomOriented,
    GenericPoset,
    GenericOrderedGraph,
    EquivalenceOmega,
    DoubleEquivalence,
    LocalOrder,
    RbBichrome,
    FFree3Hyper,
    PureSet,
}

impl GeneratorId {
    pub const NAMES: [&'static str; 12] = [
        "random-graph",
        "knfree(n)",
        "random-tournament",
        "random-oriented",
        "generic-poset",
        "generic-ordered-graph",
        "equivalence-omega",
        "double-equivalence",
        "local-order",
        "rb-bichrome",
        "f-free-3hyper",
        "pure-set",
    ];

    /// The class every output of this generator belongs to.
    pub fn class(&self) -> Result<ClassSpec> {
        Ok(match self {
            GeneratorId::RandomGraph => ClassSpec::graphs(),
            GeneratorId::KnFree(n) => ClassSpec::kn_free(*n)?,
            GeneratorId::RandomTournament | GeneratorId::LocalOrder => ClassSpec::all(tournament_signature()),
            GeneratorId::RandomOriented => ClassSpec::all(single("A", RelationKind::Oriented)),
            GeneratorId::GenericPoset => ClassSpec::all(single("<", RelationKind::PartialOrder)),
            GeneratorId::GenericOrderedGraph => ClassSpec::all(ordered_graph_signature()),
            GeneratorId::EquivalenceOmega => ClassSpec::all(single("E", RelationKind::Equivalence)),
            GeneratorId::DoubleEquivalence => ClassSpec::all(double_equivalence_signature()),
            GeneratorId::RbBichrome => ClassSpec::rb(),
            GeneratorId::FFree3Hyper => ClassSpec::f_free_3hyper(),
            GeneratorId::PureSet => ClassSpec::pure(),
        })
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorId::RandomGraph => write!(f, "random-graph"),
            GeneratorId::KnFree(n) => write!(f, "knfree({n})"),
            GeneratorId::RandomTournament => write!(f, "random-tournament"),
            GeneratorId::RandomOriented => write!(f, "random-oriented"),
            GeneratorId::GenericPoset => write!(f, "generic-poset"),
            GeneratorId::GenericOrderedGraph => write!(f, "generic-ordered-graph"),
            GeneratorId::EquivalenceOmega => write!(f, "equivalence-omega"),
            GeneratorId::DoubleEquivalence => write!(f, "double-equivalence"),
            GeneratorId::LocalOrder => write!(f, "local-order"),
            GeneratorId::RbBichrome => write!(f, "rb-bichrome"),
            GeneratorId::FFree3Hyper => write!(f, "f-free-3hyper"),
            GeneratorId::PureSet => write!(f, "pure-set"),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s {
            "random-graph" => GeneratorId::RandomGraph,
            "random-tournament" => GeneratorId::RandomTournament,
            "random-oriented" => GeneratorId::RandomOriented,
            "generic-poset" => GeneratorId::GenericPoset,
            "generic-ordered-graph" => GeneratorId::GenericOrderedGraph,
            "equivalence-omega" => GeneratorId::EquivalenceOmega,
            "double-equivalence" => GeneratorId::DoubleEquivalence,
            "local-order" => GeneratorId::LocalOrder,
            "rb-bichrome" => GeneratorId::RbBichrome,
            "f-free-3hyper" => GeneratorId::FFree3Hyper,
            "pure-set" => GeneratorId::PureSet,
            other => {
                let n = other
                    .strip_prefix("knfree(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown generator {other:?}; expected one of {}",
                            GeneratorId::NAMES.join(", ")
                        ))
                    })?;
                if n < 3 {
                    return Err(Error::InvalidParameter(format!("knfree needs n >= 3, got {n}")));
                }
                GeneratorId::KnFree(n)
            }
        };
        Ok(id)
    }
}

fn single(name: &str, kind: RelationKind) -> Signature {
    Signature::new(vec![RelationSymbol::new(name, 2, kind)]).unwrap()
}

pub fn tournament_signature() -> Signature {
    single("T", RelationKind::Tournament)
}

pub fn ordered_graph_signature() -> Signature {
    Signature::new(vec![
        RelationSymbol::new("<", 2, RelationKind::LinearOrder),
        RelationSymbol::new("E", 2, RelationKind::Symmetric),
    ])
    .unwrap()
}

pub fn double_equivalence_signature() -> Signature {
    Signature::new(vec![
        RelationSymbol::new("E0", 2, RelationKind::Equivalence),
        RelationSymbol::new("E1", 2, RelationKind::Equivalence),
    ])
    .unwrap()
}

/// Side length used by the double-equivalence generator for a requested size.
pub fn cube_side(size: usize) -> usize {
    ((size as f64).cbrt().round() as usize).max(1)
}

/// Vertex index of the triple `(u0, u1, u2)` in a double-equivalence chunk.
pub fn cube_vertex(side: usize, u: [usize; 3]) -> usize {
    u[0] * side * side + u[1] * side + u[2]
}

/// Smallest odd denominator `>= size` used for local-order angles.
pub fn local_order_denominator(size: usize) -> usize {
    if size % 2 == 1 {
        size
    } else {
        size + 1
    }
}

/// Generates a structure for a named generator, deterministically in `(id, size, seed)`.
pub fn gen_named(id: GeneratorId, size: usize, seed: u64) -> Result<Structure> {
    if size == 0 {
        return Err(Error::InvalidParameter("size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut meta = json!({"id": id.to_string(), "size": size, "seed": seed});
    let s = match id {
        GeneratorId::RandomGraph => {
            let mut edges = Vec::new();
            for u in 0..size {
                for v in u + 1..size {
                    if rng.random_bool(0.5) {
                        edges.push((u, v));
                    }
                }
            }
            Structure::graph(size, &edges)?
        }
        GeneratorId::KnFree(_) | GeneratorId::RbBichrome | GeneratorId::FFree3Hyper => {
            return Ok(gen_generic(&id.class()?, size, seed)?.with_meta(meta));
        }
        GeneratorId::RandomTournament => {
            let mut arcs = Vec::new();
            for u in 0..size {
                for v in u + 1..size {
                    arcs.push(if rng.random_bool(0.5) { vec![u, v] } else { vec![v, u] });
                }
            }
            Structure::new(tournament_signature(), size, vec![arcs])?
        }
        GeneratorId::RandomOriented => {
            let mut arcs = Vec::new();
            for u in 0..size {
                for v in u + 1..size {
                    match rng.random_range(0..3) {
                        0 => arcs.push(vec![u, v]),
                        1 => arcs.push(vec![v, u]),
                        _ => {}
                    }
                }
            }
            Structure::new(single("A", RelationKind::Oriented), size, vec![arcs])?
        }
        GeneratorId::GenericPoset => generic_poset(size, &mut rng)?,
        GeneratorId::GenericOrderedGraph => {
            let mut rank: Vec<usize> = (0..size).collect();
            rank.shuffle(&mut rng);
            let mut less = Vec::new();
            let mut edges = Vec::new();
            for u in 0..size {
                for v in 0..size {
                    if rank[u] < rank[v] {
                        less.push(vec![u, v]);
                    }
                }
            }
            for u in 0..size {
                for v in u + 1..size {
                    if rng.random_bool(0.5) {
                        edges.push(vec![u, v]);
                        edges.push(vec![v, u]);
                    }
                }
            }
            meta["rank"] = json!(rank);
            Structure::new(ordered_graph_signature(), size, vec![less, edges])?
        }
        GeneratorId::EquivalenceOmega => {
            let classes = (size as f64).sqrt().ceil() as usize;
            let mut labels: Vec<usize> = (0..size).map(|i| i % classes).collect();
            labels.shuffle(&mut rng);
            let mut pairs = Vec::new();
            for u in 0..size {
                for v in 0..size {
                    if u != v && labels[u] == labels[v] {
                        pairs.push(vec![u, v]);
                    }
                }
            }
            meta["classes"] = json!(classes);
            meta["class_of"] = json!(labels);
            meta["note"] = json!("balanced classes of near-equal size");
            Structure::new(single("E", RelationKind::Equivalence), size, vec![pairs])?
        }
        GeneratorId::DoubleEquivalence => {
            let side = cube_side(size);
            let n = side * side * side;
            let coords: Vec<[usize; 3]> = (0..n).map(|v| [v / (side * side), v / side % side, v % side]).collect();
            let mut e0 = Vec::new();
            let mut e1 = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    if coords[u][0] == coords[v][0] {
                        e0.push(vec![u, v]);
                    }
                    if coords[u][1] == coords[v][1] {
                        e1.push(vec![u, v]);
                    }
                }
            }
            meta["side"] = json!(side);
            meta["coordinates"] = json!(coords);
            Structure::new(double_equivalence_signature(), n, vec![e0, e1])?
        }
        GeneratorId::LocalOrder => {
            let m = local_order_denominator(size);
            let mut numerators: Vec<usize> = (0..m).collect();
            numerators.shuffle(&mut rng);
            numerators.truncate(size);
            let mut arcs = Vec::new();
            for u in 0..size {
                for v in 0..size {
                    if u != v && 2 * ((numerators[v] + m - numerators[u]) % m) < m {
                        arcs.push(vec![u, v]);
                    }
                }
            }
            meta["angle_numerators"] = json!(numerators);
            meta["angle_denominator"] = json!(m);
            Structure::new(tournament_signature(), size, vec![arcs])?
        }
        GeneratorId::PureSet => Structure::pure(size),
    };
    Ok(s.with_meta(meta))
}

/// One-point extensions of a finite poset, choosing for each old point
/// (in random order) uniformly among the placements (below / incomparable /
/// above the new point) that are still consistent. Below-sets are kept
/// downward closed and above-sets upward closed, so the result is a valid
/// triple and the new point's order relations are transitive.
fn generic_poset(size: usize, rng: &mut ChaCha8Rng) -> Result<Structure> {
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Place {
        Unset,
        Below,
        Incomparable,
        Above,
    }
    let mut less: Vec<Vec<bool>> = Vec::new();
    for x in 0..size {
        for row in less.iter_mut() {
            row.push(false);
        }
        less.push(vec![false; x + 1]);
        let mut place = vec![Place::Unset; x];
        let mut order: Vec<usize> = (0..x).collect();
        order.shuffle(rng);
        for &y in &order {
            if place[y] != Place::Unset {
                continue;
            }
            let mut options = vec![Place::Incomparable];
            // y below x forces everything below y below x, and needs y below every point above x
            let down: Vec<usize> = (0..x).filter(|&z| z == y || less[z][y]).collect();
            if down
                .iter()
                .all(|&z| place[z] == Place::Unset || place[z] == Place::Below)
                && (0..x)
                    .filter(|&e| place[e] == Place::Above)
                    .all(|e| down.iter().all(|&z| less[z][e]))
            {
                options.push(Place::Below);
            }
            let up: Vec<usize> = (0..x).filter(|&z| z == y || less[y][z]).collect();
            if up.iter().all(|&z| place[z] == Place::Unset || place[z] == Place::Above)
                && (0..x)
                    .filter(|&c| place[c] == Place::Below)
                    .all(|c| up.iter().all(|&z| less[c][z]))
            {
                options.push(Place::Above);
            }
            let choice = options[rng.random_range(0..options.len())];
            match choice {
                Place::Below => down.iter().for_each(|&z| place[z] = Place::Below),
                Place::Above => up.iter().for_each(|&z| place[z] = Place::Above),
                _ => place[y] = choice,
            }
        }
        for y in 0..x {
            match place[y] {
                Place::Below => less[y][x] = true,
                Place::Above => less[x][y] = true,
                _ => {}
            }
        }
    }
    let mut pairs = Vec::new();
    for (u, row) in less.iter().enumerate() {
        for (v, &b) in row.iter().enumerate() {
            if b {
                pairs.push(vec![u, v]);
            }
        }
    }
    Structure::new(single("<", RelationKind::PartialOrder), size, vec![pairs])
}

/// Builds a structure in `k` by adding `size` points one at a time. For each
/// new point the groups of atoms linking it to the existing points are
/// visited in random order, and each group is switched on with probability
/// 1/2 whenever doing so keeps the structure in the class.
///
/// Only plain and symmetric relations are supported; for those, leaving a
/// group off is always admissible, so the construction never gets stuck.
pub fn gen_generic(k: &ClassSpec, size: usize, seed: u64) -> Result<Structure> {
    if !k.is_free_amalgamation_class() {
        return Err(Error::NoAdmissibleExtension(
            "random extension is implemented for plain and symmetric relations only".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Structure::empty_of(k.signature().clone());
    for _ in 0..size {
        let x = s.push_vertex();
        let mut groups = tuple_groups(k.signature(), x + 1, Some(x));
        groups.shuffle(&mut rng);
        for g in groups {
            if !rng.random_bool(0.5) {
                continue;
            }
            let pushed: Vec<_> = g.tuples.iter().map(|t| s.push_tuple(g.rel, t.clone())).collect();
            if k.forbidden_through(&s, x) {
                for p in pushed.into_iter().rev() {
                    s.undo(p);
                }
            }
        }
    }
    let s = s.finish()?;
    Ok(s.with_meta(json!({"id": "generic", "size": size, "seed": seed})))
}

/// A one-point type over a base that the class admits but the structure does not realise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingType {
    pub base: Vec<usize>,
    #[serde(rename = "type")]
    pub qf_type: QfType,
}

/// Every `(A, p)` with `A` an increasing vertex sequence of length at most
/// `base_bound` and `p` an admissible one-point type over `A` realised by no
/// vertex of `s`. Ordered by base size, then base, then type enumeration order.
pub fn extension_defects(s: &Structure, k: &ClassSpec, base_bound: usize) -> Result<Vec<MissingType>> {
    s.signature().ensure_same(k.signature())?;
    if !k.contains(s) {
        return Err(Error::NotInClass);
    }
    let n = s.size();
    // Vertices outside the Gaifman neighbourhood of a base have a type fixed by
    // their tuples on themselves alone; group vertices by that profile.
    let mut profile_ids: HashMap<QfType, usize> = HashMap::new();
    let mut profile_of = Vec::with_capacity(n);
    let mut profiles: Vec<QfType> = Vec::new();
    for v in 0..n {
        let t = qf_type_unchecked(s, v, &[]);
        let next = profiles.len();
        let id = *profile_ids.entry(t.clone()).or_insert(next);
        if id == next {
            profiles.push(t);
        }
        profile_of.push(id);
    }
    let mut cache = AdmissibleCache::default();
    let mut out = Vec::new();
    let mut mark = vec![0u8; n];
    for m in 0..=base_bound.min(n) {
        for base in combinations(n, m) {
            let admissible = cache.get(s, &base, k)?;
            let mut realised: BTreeSet<usize> = BTreeSet::new();
            let mut explicit: Vec<QfType> = Vec::new();
            for &a in &base {
                mark[a] = 2;
            }
            for &a in &base {
                for &v in s.neighbours(a) {
                    if mark[v] == 0 {
                        mark[v] = 1;
                        explicit.push(qf_type_unchecked(s, v, &base));
                    }
                }
            }
            for v in 0..n {
                if mark[v] == 0 {
                    realised.insert(profile_of[v]);
                }
            }
            for &a in &base {
                mark[a] = 0;
                for &v in s.neighbours(a) {
                    mark[v] = 0;
                }
            }
            for t in admissible {
                let lifted = |p: &QfType| p.atoms == t.atoms;
                let hit = explicit.iter().any(lifted) || realised.iter().any(|&id| lifted(&profiles[id]));
                if !hit {
                    out.push(MissingType {
                        base: base.clone(),
                        qf_type: t,
                    });
                }
            }
        }
    }
    Ok(out)
}
