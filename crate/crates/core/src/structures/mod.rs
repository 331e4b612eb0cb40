//! Finite relational structures over an explicit signature.
//!
//! Vertices are always `0..size`. Every relation is stored as an explicit,
//! sorted list of tuples; nothing is closed under symmetry implicitly, so an
//! undirected graph stores both orientations of every edge. Relation kinds
//! ([`RelationKind`]) describe the axioms a relation must satisfy and are
//! validated on construction.

mod class;
mod dap;
mod search;
pub(crate) mod types;

pub use class::{free_amalgam, gaifman, is_irreducible, satisfies_class, Amalgam, ClassSpec};
pub use dap::{check_3dap_over_empty, DapFamily, DapReport};
pub use search::{are_isomorphic, embeds_pinned, find_embeddings, Matcher};
pub use types::{admissible_types, enumerate_structures, extension_groups, qf_type, QfType, Slot};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axioms attached to a relation symbol.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    /// No constraint.
    #[default]
    Plain,
    /// Entries pairwise distinct, closed under permuting positions (graphs, uniform hypergraphs).
    Symmetric,
    /// Binary, irreflexive, antisymmetric.
    Oriented,
    /// Oriented and total on distinct pairs.
    Tournament,
    /// Binary relation on distinct pairs that is symmetric and transitive.
    Equivalence,
    /// Strict partial order.
    PartialOrder,
    /// Strict linear order.
    LinearOrder,
}

impl RelationKind {
    pub fn is_plain(&self) -> bool {
        matches!(self, RelationKind::Plain)
    }

    /// Kinds whose tuples never repeat an entry.
    pub fn is_irreflexive(&self) -> bool {
        !self.is_plain()
    }

    /// Kinds preserved by free amalgamation (no tuple is ever forced).
    pub fn is_free(&self) -> bool {
        matches!(self, RelationKind::Plain | RelationKind::Symmetric)
    }

    fn requires_binary(&self) -> bool {
        !matches!(self, RelationKind::Plain | RelationKind::Symmetric)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
    #[serde(default, skip_serializing_if = "RelationKind::is_plain")]
    pub kind: RelationKind,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize, kind: RelationKind) -> Self {
        Self {
            name: name.into(),
            arity,
            kind,
        }
    }
}

/// An ordered list of relation symbols. The empty signature describes pure sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<RelationSymbol>", into = "Vec<RelationSymbol>")]
pub struct Signature {
    relations: Vec<RelationSymbol>,
}

impl TryFrom<Vec<RelationSymbol>> for Signature {
    type Error = Error;

    fn try_from(relations: Vec<RelationSymbol>) -> Result<Self> {
        Signature::new(relations)
    }
}

impl From<Signature> for Vec<RelationSymbol> {
    fn from(sig: Signature) -> Self {
        sig.relations
    }
}

impl Signature {
    pub fn new(relations: Vec<RelationSymbol>) -> Result<Self> {
        let mut seen = HashSet::new();
        for rel in &relations {
            if rel.name.is_empty() {
                return Err(Error::InvalidSignature("empty relation name".into()));
            }
            if !seen.insert(rel.name.as_str()) {
                return Err(Error::InvalidSignature(format!("duplicate relation name {}", rel.name)));
            }
            if rel.arity == 0 {
                return Err(Error::InvalidSignature(format!("relation {} has arity 0", rel.name)));
            }
            if rel.kind.requires_binary() && rel.arity != 2 {
                return Err(Error::InvalidSignature(format!(
                    "relation {} of kind {:?} must be binary",
                    rel.name, rel.kind
                )));
            }
        }
        Ok(Self { relations })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Single symmetric binary relation `E`.
    pub fn graph() -> Self {
        Self::new(vec![RelationSymbol::new("E", 2, RelationKind::Symmetric)]).unwrap()
    }

    /// Single symmetric `r`-ary relation `R` (for `r = 2`, the graph signature).
    pub fn hypergraph(r: usize) -> Self {
        if r == 2 {
            return Self::graph();
        }
        Self::new(vec![RelationSymbol::new("R", r, RelationKind::Symmetric)]).unwrap()
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.relations.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", r.name, r.arity)?;
            if !r.kind.is_plain() {
                write!(f, ":{:?}", r.kind)?;
            }
        }
        write!(f, "}}")
    }
}

/// A finite relational structure on vertices `0..size`.
///
/// Immutable after construction; lookup indexes are built once.
#[derive(Clone)]
pub struct Structure {
    signature: Signature,
    size: usize,
    tuples: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashSet<Vec<usize>>>,
    /// `(relation, tuple index)` for every tuple the vertex occurs in.
    incidence: Vec<Vec<(usize, usize)>>,
    adjacency: Vec<Vec<usize>>,
    meta: Option<serde_json::Value>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.size == other.size && self.tuples == other.tuples
    }
}

impl Eq for Structure {}

impl std::hash::Hash for Structure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.signature.hash(state);
        self.size.hash(state);
        self.tuples.hash(state);
    }
}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Structure");
        d.field("size", &self.size);
        for (sym, ts) in self.signature.relations.iter().zip(&self.tuples) {
            d.field(&sym.name, ts);
        }
        d.finish()
    }
}

impl Structure {
    /// Builds a structure from per-relation tuple lists (indexed like the signature).
    pub fn new(signature: Signature, size: usize, relations: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if relations.len() != signature.len() {
            return Err(Error::InvalidStructure(format!(
                "{} relation lists for a signature with {} symbols",
                relations.len(),
                signature.len()
            )));
        }
        let mut tuples = Vec::with_capacity(relations.len());
        for (sym, rel) in signature.relations.iter().zip(relations) {
            let mut set = BTreeSet::new();
            for t in rel {
                if t.len() != sym.arity {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {t:?} has length {} but {} has arity {}",
                        t.len(),
                        sym.name,
                        sym.arity
                    )));
                }
                if let Some(&bad) = t.iter().find(|&&x| x >= size) {
                    return Err(Error::InvalidStructure(format!(
                        "tuple {t:?} of {} mentions vertex {bad} outside 0..{size}",
                        sym.name
                    )));
                }
                set.insert(t);
            }
            tuples.push(set.into_iter().collect::<Vec<_>>());
        }
        let s = Self::from_sorted(signature, size, tuples);
        s.validate_kinds()?;
        Ok(s)
    }

    /// Builds from a map relation name -> tuples; missing names mean empty relations.
    pub fn from_named(
        signature: Signature,
        size: usize,
        relations: &BTreeMap<String, Vec<Vec<usize>>>,
    ) -> Result<Self> {
        for name in relations.keys() {
            if signature.index_of(name).is_none() {
                return Err(Error::InvalidStructure(format!("unknown relation {name}")));
            }
        }
        let lists = signature
            .relations
            .iter()
            .map(|r| relations.get(&r.name).cloned().unwrap_or_default())
            .collect();
        Self::new(signature, size, lists)
    }

    fn from_sorted(signature: Signature, size: usize, tuples: Vec<Vec<Vec<usize>>>) -> Self {
        let mut incidence = vec![Vec::new(); size];
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); size];
        let mut lookup = Vec::with_capacity(tuples.len());
        for (r, ts) in tuples.iter().enumerate() {
            let mut set = HashSet::with_capacity(ts.len());
            for (i, t) in ts.iter().enumerate() {
                let mut seen: Vec<usize> = Vec::with_capacity(t.len());
                for &v in t {
                    if !seen.contains(&v) {
                        incidence[v].push((r, i));
                        seen.push(v);
                    }
                }
                for &u in &seen {
                    for &w in &seen {
                        if u != w {
                            adj[u].insert(w);
                        }
                    }
                }
                set.insert(t.clone());
            }
            lookup.push(set);
        }
        Self {
            signature,
            size,
            tuples,
            lookup,
            incidence,
            adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            meta: None,
        }
    }

    fn validate_kinds(&self) -> Result<()> {
        for (r, sym) in self.signature.relations.iter().enumerate() {
            let ts = &self.tuples[r];
            let bad = |msg: String| Err(Error::InvalidStructure(format!("relation {}: {msg}", sym.name)));
            if sym.kind.is_irreflexive() {
                for t in ts {
                    let mut sorted = t.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    if sorted.len() != t.len() {
                        return bad(format!("tuple {t:?} repeats an entry"));
                    }
                }
            }
            match sym.kind {
                RelationKind::Plain => {}
                RelationKind::Symmetric => {
                    for t in ts {
                        let mut sorted = t.clone();
                        sorted.sort_unstable();
                        for p in permutations(&sorted) {
                            if !self.lookup[r].contains(&p) {
                                return bad(format!("tuple {t:?} present but permutation {p:?} missing"));
                            }
                        }
                    }
                }
                RelationKind::Oriented | RelationKind::Tournament => {
                    for t in ts {
                        if self.holds(r, &[t[1], t[0]]) {
                            return bad(format!("both orientations of {t:?}"));
                        }
                    }
                    if sym.kind == RelationKind::Tournament {
                        for u in 0..self.size {
                            for v in u + 1..self.size {
                                if !self.holds(r, &[u, v]) && !self.holds(r, &[v, u]) {
                                    return bad(format!("pair ({u}, {v}) has no orientation"));
                                }
                            }
                        }
                    }
                }
                RelationKind::Equivalence => {
                    for t in ts {
                        if !self.holds(r, &[t[1], t[0]]) {
                            return bad(format!("{t:?} is not symmetric"));
                        }
                    }
                    self.check_transitive(r, true).or_else(bad)?;
                }
                RelationKind::PartialOrder | RelationKind::LinearOrder => {
                    self.check_transitive(r, false).or_else(bad)?;
                    if sym.kind == RelationKind::LinearOrder {
                        for u in 0..self.size {
                            for v in u + 1..self.size {
                                if !self.holds(r, &[u, v]) && !self.holds(r, &[v, u]) {
                                    return bad(format!("pair ({u}, {v}) is incomparable"));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_transitive(&self, r: usize, skip_diagonal: bool) -> std::result::Result<(), String> {
        for t in &self.tuples[r] {
            let (a, b) = (t[0], t[1]);
            for &(r2, i) in &self.incidence[b] {
                if r2 != r {
                    continue;
                }
                let u = &self.tuples[r][i];
                if u[0] != b {
                    continue;
                }
                let c = u[1];
                if skip_diagonal && c == a {
                    continue;
                }
                if !self.holds(r, &[a, c]) {
                    return Err(format!("({a}, {b}) and ({b}, {c}) but not ({a}, {c})"));
                }
            }
        }
        Ok(())
    }

    pub fn pure(size: usize) -> Self {
        Self::from_sorted(Signature::empty(), size, Vec::new())
    }

    /// Undirected graph with the signature of [`Signature::graph`]; each edge is given once.
    pub fn graph(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut ts = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            ts.push(vec![u, v]);
            ts.push(vec![v, u]);
        }
        Self::new(Signature::graph(), size, vec![ts])
    }

    /// Uniform hypergraph; each edge is given once as a set and stored in every order.
    pub fn hypergraph(r: usize, size: usize, edges: &[Vec<usize>]) -> Result<Self> {
        let mut ts = Vec::new();
        for e in edges {
            if e.len() != r {
                return Err(Error::InvalidStructure(format!("edge {e:?} is not an {r}-set")));
            }
            let mut sorted = e.clone();
            sorted.sort_unstable();
            ts.extend(permutations(&sorted));
        }
        Self::new(Signature::hypergraph(r), size, vec![ts])
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tuples(&self, rel: usize) -> &[Vec<usize>] {
        &self.tuples[rel]
    }

    pub fn tuple_count(&self) -> usize {
        self.tuples.iter().map(Vec::len).sum()
    }

    pub fn holds(&self, rel: usize, tuple: &[usize]) -> bool {
        self.lookup[rel].contains(tuple)
    }

    pub(crate) fn incidence(&self, v: usize) -> &[(usize, usize)] {
        &self.incidence[v]
    }

    /// Gaifman neighbours of `v`, ascending.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    /// Relation index for a name, or a signature error.
    pub fn relation(&self, name: &str) -> Result<usize> {
        self.signature
            .index_of(name)
            .ok_or_else(|| Error::SignatureMismatch(format!("no relation named {name}")))
    }

    /// Induced substructure on `vertices`, renumbered in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Structure {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let mut rels = vec![Vec::new(); self.signature.len()];
        let mut seen = HashSet::new();
        for &v in vertices {
            for &(r, i) in &self.incidence[v] {
                let t = &self.tuples[r][i];
                if t.iter().all(|&x| pos[x] != usize::MAX) && seen.insert((r, i)) {
                    rels[r].push(t.iter().map(|&x| pos[x]).collect::<Vec<_>>());
                }
            }
        }
        for r in &mut rels {
            r.sort();
        }
        Self::from_sorted(self.signature.clone(), vertices.len(), rels)
    }

    /// The structure transported along a bijection `perm` (old vertex `v` becomes `perm[v]`).
    pub fn relabel(&self, perm: &[usize]) -> Result<Structure> {
        let mut check = perm.to_vec();
        check.sort_unstable();
        if perm.len() != self.size || check.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::InvalidParameter("relabelling is not a permutation".into()));
        }
        let rels = self
            .tuples
            .iter()
            .map(|ts| ts.iter().map(|t| t.iter().map(|&x| perm[x]).collect()).collect())
            .collect();
        Structure::new(self.signature.clone(), self.size, rels)
    }

    /// Tuples with the structure's signature, as a name-keyed map.
    pub fn named_relations(&self) -> BTreeMap<String, Vec<Vec<usize>>> {
        self.signature
            .relations
            .iter()
            .zip(&self.tuples)
            .map(|(s, ts)| (s.name.clone(), ts.clone()))
            .collect()
    }
}

/// Undo information for [`Structure::push_tuple`].
pub(crate) struct PushedTuple {
    rel: usize,
    new_pairs: Vec<(usize, usize)>,
    vertices: Vec<usize>,
}

/// Incremental growth used by random generators. Between pushes the tuple
/// lists are not sorted; [`Structure::finish`] restores the canonical form.
impl Structure {
    pub(crate) fn empty_of(signature: Signature) -> Self {
        let n = signature.len();
        Self::from_sorted(signature, 0, vec![Vec::new(); n])
    }

    pub(crate) fn push_vertex(&mut self) -> usize {
        self.size += 1;
        self.incidence.push(Vec::new());
        self.adjacency.push(Vec::new());
        self.size - 1
    }

    /// Adds a tuple (which must be absent). Undo in reverse push order.
    pub(crate) fn push_tuple(&mut self, rel: usize, tuple: Vec<usize>) -> PushedTuple {
        let idx = self.tuples[rel].len();
        let mut vertices: Vec<usize> = Vec::with_capacity(tuple.len());
        for &v in &tuple {
            if !vertices.contains(&v) {
                vertices.push(v);
                self.incidence[v].push((rel, idx));
            }
        }
        let mut new_pairs = Vec::new();
        for &u in &vertices {
            for &w in &vertices {
                if u != w {
                    if let Err(pos) = self.adjacency[u].binary_search(&w) {
                        self.adjacency[u].insert(pos, w);
                        new_pairs.push((u, w));
                    }
                }
            }
        }
        self.lookup[rel].insert(tuple.clone());
        self.tuples[rel].push(tuple);
        PushedTuple {
            rel,
            new_pairs,
            vertices,
        }
    }

    pub(crate) fn undo(&mut self, pushed: PushedTuple) {
        let t = self.tuples[pushed.rel].pop().expect("undo of a pushed tuple");
        self.lookup[pushed.rel].remove(&t);
        for v in pushed.vertices {
            self.incidence[v].pop();
        }
        for (u, w) in pushed.new_pairs {
            if let Ok(pos) = self.adjacency[u].binary_search(&w) {
                self.adjacency[u].remove(pos);
            }
        }
    }

    /// Re-sorts tuples and validates relation kinds.
    pub(crate) fn finish(self) -> Result<Self> {
        let meta = self.meta;
        let s = Structure::new(self.signature, self.size, self.tuples)?;
        Ok(match meta {
            Some(m) => s.with_meta(m),
            None => s,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StructureRepr {
    signature: Signature,
    size: usize,
    #[serde(default)]
    relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StructureRepr {
            signature: self.signature.clone(),
            size: self.size,
            relations: self.named_relations(),
            meta: self.meta.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StructureRepr::deserialize(deserializer)?;
        let s = Structure::from_named(repr.signature, repr.size, &repr.relations).map_err(serde::de::Error::custom)?;
        Ok(match repr.meta {
            Some(m) => s.with_meta(m),
            None => s,
        })
    }
}

/// An injective vertex map `map[source vertex] = target vertex`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn new(map: Vec<usize>) -> Self {
        Self { map }
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self) -> Vec<usize> {
        let mut im = self.map.clone();
        im.sort_unstable();
        im
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Embedding) -> Embedding {
        Embedding::new(self.map.iter().map(|&v| other.map[v]).collect())
    }

    /// True iff this is an injective induced embedding `source -> target`.
    pub fn is_induced_embedding(&self, source: &Structure, target: &Structure) -> bool {
        if source.signature != target.signature || self.map.len() != source.size {
            return false;
        }
        let mut inv = vec![usize::MAX; target.size];
        for (s, &t) in self.map.iter().enumerate() {
            if t >= target.size || inv[t] != usize::MAX {
                return false;
            }
            inv[t] = s;
        }
        for (r, ts) in source.tuples.iter().enumerate() {
            for t in ts {
                let img: Vec<usize> = t.iter().map(|&x| self.map[x]).collect();
                if !target.holds(r, &img) {
                    return false;
                }
            }
        }
        for &t in &self.map {
            for &(r, i) in &target.incidence[t] {
                let tup = &target.tuples[r][i];
                if tup.iter().all(|&x| inv[x] != usize::MAX) {
                    let pre: Vec<usize> = tup.iter().map(|&x| inv[x]).collect();
                    if !source.holds(r, &pre) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// All permutations of a slice, in lexicographic order of positions.
pub(crate) fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut items.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// Sorted `r`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if cur[i] == i + n - r {
            return out;
        }
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}
