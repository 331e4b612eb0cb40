//! Gaifman graphs, free amalgams and classes given by forbidden irreducible structures.

use serde::{Deserialize, Serialize};

use super::search::{are_isomorphic, Matcher};
use super::{Embedding, RelationKind, RelationSymbol, Signature, Structure};
use crate::error::{Error, Result};

/// The Gaifman graph of `s`, as a structure with the graph signature.
pub fn gaifman(s: &Structure) -> Structure {
    let mut edges = Vec::new();
    for u in 0..s.size() {
        for &v in s.neighbours(u) {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    Structure::graph(s.size(), &edges).expect("gaifman edges are valid")
}

/// True iff every two distinct vertices occur together in some tuple.
pub fn is_irreducible(s: &Structure) -> bool {
    (0..s.size()).all(|v| s.neighbours(v).len() + 1 == s.size())
}

/// Result of a free amalgamation: the amalgam and the embeddings of both sides.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Amalgam {
    pub structure: Structure,
    pub g0: Embedding,
    pub g1: Embedding,
}

/// Free amalgam of `b0` and `b1` over `a`, along `f0: a -> b0` and `f1: a -> b1`.
///
/// The amalgam keeps `b0`'s vertex numbering and appends the vertices of `b1`
/// outside the image of `f1` in ascending order.
pub fn free_amalgam(a: &Structure, b0: &Structure, f0: &Embedding, b1: &Structure, f1: &Embedding) -> Result<Amalgam> {
    a.signature().ensure_same(b0.signature())?;
    a.signature().ensure_same(b1.signature())?;
    if !f0.is_induced_embedding(a, b0) {
        return Err(Error::InvalidEmbedding("f0 is not an induced embedding into b0".into()));
    }
    if !f1.is_induced_embedding(a, b1) {
        return Err(Error::InvalidEmbedding("f1 is not an induced embedding into b1".into()));
    }
    let mut g1 = vec![usize::MAX; b1.size()];
    for (x, &y) in f1.map.iter().enumerate() {
        g1[y] = f0.map[x];
    }
    let mut next = b0.size();
    for slot in g1.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let mut rels: Vec<Vec<Vec<usize>>> = (0..a.signature().len()).map(|r| b0.tuples(r).to_vec()).collect();
    for (r, rel) in rels.iter_mut().enumerate() {
        rel.extend(b1.tuples(r).iter().map(|t| t.iter().map(|&x| g1[x]).collect()));
    }
    let structure = Structure::new(a.signature().clone(), next, rels)?;
    Ok(Amalgam {
        structure,
        g0: Embedding::identity(b0.size()),
        g1: Embedding::new(g1),
    })
}

/// A class of finite structures defined by forbidding induced copies of
/// finitely many irreducible structures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSpec {
    signature: Signature,
    forbidden: Vec<Structure>,
}

#[derive(Deserialize)]
struct ClassSpecRepr {
    signature: Signature,
    #[serde(default)]
    forbidden: Vec<Structure>,
}

impl<'de> Deserialize<'de> for ClassSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ClassSpecRepr::deserialize(deserializer)?;
        ClassSpec::new(repr.signature, repr.forbidden).map_err(serde::de::Error::custom)
    }
}

impl ClassSpec {
    pub fn new(signature: Signature, forbidden: Vec<Structure>) -> Result<Self> {
        for (i, f) in forbidden.iter().enumerate() {
            if f.signature() != &signature {
                return Err(Error::InvalidClass(format!(
                    "forbidden structure {i} has a different signature"
                )));
            }
            if !is_irreducible(f) {
                return Err(Error::InvalidClass(format!(
                    "forbidden structure {i} is not irreducible"
                )));
            }
        }
        Ok(Self { signature, forbidden })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn forbidden(&self) -> &[Structure] {
        &self.forbidden
    }

    /// All structures of the signature.
    pub fn all(signature: Signature) -> Self {
        Self {
            signature,
            forbidden: Vec::new(),
        }
    }

    pub fn pure() -> Self {
        Self::all(Signature::empty())
    }

    pub fn graphs() -> Self {
        Self::all(Signature::graph())
    }

    /// Graphs omitting the complete graph `K_n`.
    pub fn kn_free(n: usize) -> Result<Self> {
        Self::complete_free(2, n)
    }

    /// `r`-uniform hypergraphs omitting the complete `r`-uniform hypergraph on `n` vertices.
    pub fn complete_free(r: usize, n: usize) -> Result<Self> {
        if r < 2 || n < r {
            return Err(Error::InvalidParameter(format!(
                "need 2 <= r <= n, got r = {r}, n = {n}"
            )));
        }
        let edges = super::combinations(n, r);
        let k = Structure::hypergraph(r, n, &edges)?;
        Self::new(Signature::hypergraph(r), vec![k])
    }

    /// Two symmetric binary relations `R` and `B`, each triangle-free, never on the same pair.
    pub fn rb() -> Self {
        let sig = Signature::new(vec![
            RelationSymbol::new("R", 2, RelationKind::Symmetric),
            RelationSymbol::new("B", 2, RelationKind::Symmetric),
        ])
        .unwrap();
        let both = |pairs: &[(usize, usize)]| -> Vec<Vec<usize>> {
            pairs.iter().flat_map(|&(u, v)| [vec![u, v], vec![v, u]]).collect()
        };
        let tri = both(&[(0, 1), (1, 2), (0, 2)]);
        let forbidden = vec![
            Structure::new(sig.clone(), 3, vec![tri.clone(), vec![]]).unwrap(),
            Structure::new(sig.clone(), 3, vec![vec![], tri]).unwrap(),
            Structure::new(sig.clone(), 2, vec![both(&[(0, 1)]), both(&[(0, 1)])]).unwrap(),
        ];
        Self::new(sig, forbidden).unwrap()
    }

    /// 3-hypergraphs omitting, as a not necessarily induced subgraph, the
    /// 5-vertex hypergraph consisting of a complete 3-hypergraph on `{0,1,2,3}`
    /// together with the edges `{0,1,4}` and `{2,3,4}`.
    ///
    /// Induced-forbidding every supergraph on the same five vertices gives the
    /// same class; the list is reduced up to isomorphism.
    pub fn f_free_3hyper() -> Self {
        let f = Self::f_hypergraph();
        let base = f
            .tuples(0)
            .iter()
            .filter(|t| t.windows(2).all(|w| w[0] < w[1]))
            .cloned()
            .collect::<Vec<_>>();
        let extra: Vec<Vec<usize>> = super::combinations(5, 3)
            .into_iter()
            .filter(|t| !base.contains(t))
            .collect();
        let mut forbidden: Vec<Structure> = Vec::new();
        for mask in 0u32..(1 << extra.len()) {
            let mut edges = base.clone();
            edges.extend(
                extra
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, e)| e.clone()),
            );
            let s = Structure::hypergraph(3, 5, &edges).unwrap();
            if !forbidden.iter().any(|g| are_isomorphic(g, &s).unwrap().is_some()) {
                forbidden.push(s);
            }
        }
        Self::new(Signature::hypergraph(3), forbidden).unwrap()
    }

    /// The 5-vertex 3-hypergraph omitted by [`ClassSpec::f_free_3hyper`].
    pub fn f_hypergraph() -> Structure {
        let mut edges = super::combinations(4, 3);
        edges.push(vec![0, 1, 4]);
        edges.push(vec![2, 3, 4]);
        Structure::hypergraph(3, 5, &edges).unwrap()
    }

    /// Whether all relation kinds are preserved by free amalgamation.
    pub fn is_free_amalgamation_class(&self) -> bool {
        self.signature.relations().iter().all(|r| r.kind.is_free())
    }

    /// The one-point structures of the class.
    pub fn one_point_structures(&self) -> Vec<Structure> {
        let rels = self.signature.relations();
        let mut out = Vec::new();
        for mask in 0u64..(1 << rels.len()) {
            let tuples: Vec<Vec<Vec<usize>>> = rels
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    if mask >> i & 1 == 1 {
                        vec![vec![0; r.arity]]
                    } else {
                        vec![]
                    }
                })
                .collect();
            if let Ok(s) = Structure::new(self.signature.clone(), 1, tuples) {
                if self.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Checks that the class is a free amalgamation class with a single
    /// one-point structure up to isomorphism.
    pub fn ensure_transitive_free(&self) -> Result<()> {
        if !self.is_free_amalgamation_class() {
            return Err(Error::NonTransitiveClass(
                "relation kinds other than plain/symmetric are not closed under free amalgamation".into(),
            ));
        }
        let points = self.one_point_structures();
        if points.len() != 1 {
            return Err(Error::NonTransitiveClass(format!(
                "requires transitive class: found {} one-point structures",
                points.len()
            )));
        }
        Ok(())
    }

    /// Membership test (signatures assumed equal).
    pub fn contains(&self, s: &Structure) -> bool {
        self.forbidden
            .iter()
            .all(|f| !Matcher::new(f, s).map(|m| m.connected_order().exists()).unwrap_or(true))
    }

    /// Whether some forbidden structure has a copy in `s` through vertex `v`.
    pub fn forbidden_through(&self, s: &Structure, v: usize) -> bool {
        self.forbidden.iter().any(|f| {
            (0..f.size()).any(|p| {
                Matcher::new(f, s)
                    .map(|m| m.pin(p, v).connected_order().exists())
                    .unwrap_or(false)
            })
        })
    }
}

/// True iff no forbidden member of `k` embeds into `s`.
pub fn satisfies_class(s: &Structure, k: &ClassSpec) -> Result<bool> {
    s.signature().ensure_same(&k.signature)?;
    Ok(k.contains(s))
}
