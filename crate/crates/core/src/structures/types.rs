//! Quantifier-free one-point types and enumeration of small structures.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::class::ClassSpec;
use super::search::are_isomorphic;
use super::{combinations, permutations, RelationKind, Signature, Structure};
use crate::error::{Error, Result};

/// Largest number of independent atom groups whose subsets are enumerated.
const MAX_GROUPS: usize = 22;

/// A position in an atom: the new point or the `i`-th parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    X,
    P(usize),
}

impl Serialize for Slot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Slot::X => s.serialize_str("x"),
            Slot::P(i) => s.serialize_u64(*i as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Index(usize),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Index(i) => Ok(Slot::P(i)),
            Repr::Name(n) if n == "x" => Ok(Slot::X),
            Repr::Name(n) => Err(serde::de::Error::custom(format!("unknown slot {n:?}"))),
        }
    }
}

/// The complete atomic diagram of a new point over a parameter sequence.
///
/// `atoms` lists, per relation name, the position patterns that hold; every
/// pattern mentions the new point at least once and all unlisted patterns are
/// false. Equality between types compares atoms only, so a type transported
/// along an embedding compares equal to the original.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QfType {
    pub params: Vec<usize>,
    pub atoms: BTreeMap<String, BTreeSet<Vec<Slot>>>,
}

impl PartialEq for QfType {
    fn eq(&self, other: &Self) -> bool {
        self.params.len() == other.params.len() && self.atoms == other.atoms
    }
}

impl Eq for QfType {}

impl std::hash::Hash for QfType {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.params.len().hash(state);
        self.atoms.hash(state);
    }
}

impl PartialOrd for QfType {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QfType {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.params.len(), &self.atoms).cmp(&(other.params.len(), &other.atoms))
    }
}

impl fmt::Display for QfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "tp(x/{:?}): ", self.params)?;
        for (name, pats) in &self.atoms {
            for p in pats {
                if !first {
                    write!(f, " & ")?;
                }
                first = false;
                let args: Vec<String> = p
                    .iter()
                    .map(|s| match s {
                        Slot::X => "x".to_string(),
                        Slot::P(i) => format!("a{i}"),
                    })
                    .collect();
                write!(f, "{name}({})", args.join(","))?;
            }
        }
        if first {
            write!(f, "no atoms")?;
        }
        Ok(())
    }
}

impl QfType {
    /// The type with no positive atoms.
    pub fn empty(params: Vec<usize>) -> Self {
        Self {
            params,
            atoms: BTreeMap::new(),
        }
    }

    /// The type realised by a point adjacent (in the binary relation `rel`)
    /// to every listed parameter index in both orientations.
    pub fn symmetric_binary(rel: &str, params: Vec<usize>, adjacent: &[usize]) -> Self {
        let mut pats = BTreeSet::new();
        for &i in adjacent {
            pats.insert(vec![Slot::X, Slot::P(i)]);
            pats.insert(vec![Slot::P(i), Slot::X]);
        }
        let mut atoms = BTreeMap::new();
        if !pats.is_empty() {
            atoms.insert(rel.to_string(), pats);
        }
        Self { params, atoms }
    }

    /// The same atoms over a new parameter sequence (`f · p` for an embedding `f`).
    pub fn transport(&self, params: Vec<usize>) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::InvalidParameter(
                "parameter count changes under transport".into(),
            ));
        }
        Ok(Self {
            params,
            atoms: self.atoms.clone(),
        })
    }

    pub fn holds(&self, rel: &str, pattern: &[Slot]) -> bool {
        self.atoms.get(rel).is_some_and(|p| p.contains(pattern))
    }

    /// Checks the type against a signature: known relation names, correct
    /// arities, parameter indices in range, every pattern mentions `x`.
    pub fn validate(&self, sig: &Signature) -> Result<()> {
        for (name, pats) in &self.atoms {
            let r = sig
                .index_of(name)
                .ok_or_else(|| Error::InvalidParameter(format!("type mentions unknown relation {name}")))?;
            for p in pats {
                if p.len() != sig.relations()[r].arity {
                    return Err(Error::InvalidParameter(format!(
                        "pattern {p:?} has the wrong arity for {name}"
                    )));
                }
                if !p.contains(&Slot::X) {
                    return Err(Error::InvalidParameter(format!("pattern {p:?} does not mention x")));
                }
                if p.iter().any(|s| matches!(s, Slot::P(i) if *i >= self.params.len())) {
                    return Err(Error::InvalidParameter(format!(
                        "pattern {p:?} has a parameter index out of range"
                    )));
                }
            }
        }
        let mut sorted = self.params.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.params.len() {
            return Err(Error::InvalidParameter("repeated parameter".into()));
        }
        Ok(())
    }

    /// The structure `A + x` with `A` the induced substructure of `s` on the
    /// parameters (renumbered `0..m`) and `x = m`.
    pub fn realise_over(&self, s: &Structure) -> Result<Structure> {
        self.validate(s.signature())?;
        let base = s.induced(&self.params);
        let m = self.params.len();
        let mut rels: Vec<Vec<Vec<usize>>> = (0..s.signature().len()).map(|r| base.tuples(r).to_vec()).collect();
        for (name, pats) in &self.atoms {
            let r = s.signature().index_of(name).unwrap();
            for p in pats {
                rels[r].push(
                    p.iter()
                        .map(|sl| match sl {
                            Slot::X => m,
                            Slot::P(i) => *i,
                        })
                        .collect(),
                );
            }
        }
        Structure::new(s.signature().clone(), m + 1, rels)
    }
}

/// The quantifier-free type of `v` over the sequence `a` in `s`.
pub fn qf_type(s: &Structure, v: usize, a: &[usize]) -> Result<QfType> {
    if v >= s.size() || a.iter().any(|&x| x >= s.size()) {
        return Err(Error::InvalidParameter("vertex out of range".into()));
    }
    if a.contains(&v) {
        return Err(Error::InvalidParameter(format!("vertex {v} is one of the parameters")));
    }
    Ok(qf_type_unchecked(s, v, a))
}

pub(crate) fn qf_type_unchecked(s: &Structure, v: usize, a: &[usize]) -> QfType {
    let mut atoms: BTreeMap<String, BTreeSet<Vec<Slot>>> = BTreeMap::new();
    'tuples: for &(r, i) in s.incidence(v) {
        let t = &s.tuples(r)[i];
        let mut pat = Vec::with_capacity(t.len());
        for &x in t {
            if x == v {
                pat.push(Slot::X);
            } else if let Some(j) = a.iter().position(|&y| y == x) {
                pat.push(Slot::P(j));
            } else {
                continue 'tuples;
            }
        }
        atoms
            .entry(s.signature().relations()[r].name.clone())
            .or_default()
            .insert(pat);
    }
    QfType {
        params: a.to_vec(),
        atoms,
    }
}

/// A set of tuples (of one relation) that kind axioms force to be present or
/// absent together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleGroup {
    pub rel: usize,
    pub tuples: Vec<Vec<usize>>,
}

/// Tuple groups over vertices `0..n`; with `focus`, only tuples mentioning it.
///
/// Symmetric relations contribute one group per set; irreflexive kinds skip
/// tuples with repeated entries; everything else is one tuple per group.
pub(crate) fn tuple_groups(sig: &Signature, n: usize, focus: Option<usize>) -> Vec<TupleGroup> {
    let mut out = Vec::new();
    for (r, sym) in sig.relations().iter().enumerate() {
        let a = sym.arity;
        match sym.kind {
            RelationKind::Symmetric => {
                let sets: Vec<Vec<usize>> = match focus {
                    Some(f) => {
                        let others: Vec<usize> = (0..n).filter(|&x| x != f).collect();
                        if a == 0 || a - 1 > others.len() {
                            Vec::new()
                        } else {
                            combinations(others.len(), a - 1)
                                .into_iter()
                                .map(|c| {
                                    let mut s: Vec<usize> = c.into_iter().map(|i| others[i]).collect();
                                    s.push(f);
                                    s.sort_unstable();
                                    s
                                })
                                .collect()
                        }
                    }
                    None => combinations(n, a),
                };
                let mut sets = sets;
                sets.sort();
                for s in sets {
                    out.push(TupleGroup {
                        rel: r,
                        tuples: permutations(&s),
                    });
                }
            }
            kind => {
                let total = n.pow(a as u32);
                for code in 0..total {
                    let mut t = vec![0; a];
                    let mut c = code;
                    for slot in t.iter_mut().rev() {
                        *slot = c % n;
                        c /= n;
                    }
                    let distinct = {
                        let mut s = t.clone();
                        s.sort_unstable();
                        s.windows(2).all(|w| w[0] != w[1])
                    };
                    if (distinct || !kind.is_irreflexive()) && focus.is_none_or(|f| t.contains(&f)) {
                        out.push(TupleGroup {
                            rel: r,
                            tuples: vec![t],
                        });
                    }
                }
            }
        }
    }
    out
}

/// The atom groups of a one-point extension over `m` parameters, as position patterns.
pub fn extension_groups(sig: &Signature, m: usize) -> Vec<(usize, Vec<Vec<Slot>>)> {
    tuple_groups(sig, m + 1, Some(m))
        .into_iter()
        .map(|g| {
            let pats = g
                .tuples
                .iter()
                .map(|t| t.iter().map(|&x| if x == m { Slot::X } else { Slot::P(x) }).collect())
                .collect();
            (g.rel, pats)
        })
        .collect()
}

/// Admissible one-point types over `base` (a structure on `0..m`, the
/// parameters in order) in the class, in a fixed enumeration order.
pub(crate) fn admissible_over(base: &Structure, k: &ClassSpec) -> Result<Vec<QfType>> {
    let m = base.size();
    let sig = base.signature();
    let groups = tuple_groups(sig, m + 1, Some(m));
    if groups.len() > MAX_GROUPS {
        return Err(Error::BudgetExceeded(format!(
            "{} independent atom groups over {m} parameters",
            groups.len()
        )));
    }
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << groups.len()) {
        let mut rels: Vec<Vec<Vec<usize>>> = (0..sig.len()).map(|r| base.tuples(r).to_vec()).collect();
        for (gi, g) in groups.iter().enumerate() {
            if mask >> gi & 1 == 1 {
                rels[g.rel].extend(g.tuples.iter().cloned());
            }
        }
        let Ok(ext) = Structure::new(sig.clone(), m + 1, rels) else {
            continue;
        };
        if k.forbidden_through(&ext, m) {
            continue;
        }
        let mut t = qf_type_unchecked(&ext, m, &(0..m).collect::<Vec<_>>());
        t.params = (0..m).collect();
        out.push(t);
    }
    Ok(out)
}

/// One-point types over `a` (a vertex sequence of `s`) whose realisation keeps
/// `A + x` in the class.
pub fn admissible_types(s: &Structure, a: &[usize], k: &ClassSpec) -> Result<Vec<QfType>> {
    s.signature().ensure_same(k.signature())?;
    let base = s.induced(a);
    let types = admissible_over(&base, k)?;
    types.into_iter().map(|t| t.transport(a.to_vec())).collect()
}

/// Memoises admissible types by the isomorphism type of the labelled base.
#[derive(Default)]
pub(crate) struct AdmissibleCache {
    map: HashMap<Structure, Vec<QfType>>,
}

impl AdmissibleCache {
    pub(crate) fn get(&mut self, s: &Structure, a: &[usize], k: &ClassSpec) -> Result<Vec<QfType>> {
        let base = s.induced(a);
        if !self.map.contains_key(&base) {
            let types = admissible_over(&base, k)?;
            self.map.insert(base.clone(), types);
        }
        self.map[&base].iter().map(|t| t.transport(a.to_vec())).collect()
    }
}

/// All structures on `n` vertices (optionally restricted to a class), one per
/// isomorphism type, in enumeration order of their first representative.
pub fn enumerate_structures(sig: &Signature, n: usize, k: Option<&ClassSpec>) -> Result<Vec<Structure>> {
    let groups = tuple_groups(sig, n, None);
    if groups.len() > MAX_GROUPS {
        return Err(Error::BudgetExceeded(format!(
            "{} tuple groups on {n} vertices",
            groups.len()
        )));
    }
    let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut out: Vec<Structure> = Vec::new();
    for mask in 0u64..(1u64 << groups.len()) {
        let mut rels = vec![Vec::new(); sig.len()];
        for (gi, g) in groups.iter().enumerate() {
            if mask >> gi & 1 == 1 {
                rels[g.rel].extend(g.tuples.iter().cloned());
            }
        }
        let Ok(s) = Structure::new(sig.clone(), n, rels) else {
            continue;
        };
        if k.is_some_and(|k| !k.contains(&s)) {
            continue;
        }
        let mut key: Vec<usize> = (0..sig.len()).map(|r| s.tuples(r).len()).collect();
        let mut degrees: Vec<usize> = (0..n).map(|v| s.neighbours(v).len()).collect();
        degrees.sort_unstable();
        key.extend(degrees);
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|&i| are_isomorphic(&out[i], &s).unwrap().is_some()) {
            continue;
        }
        bucket.push(out.len());
        out.push(s);
    }
    Ok(out)
}
