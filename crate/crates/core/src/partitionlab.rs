//! Vertex partitions, colourings and copy searches on finite structures.
//!
//! Everything here works on finite chunks. A block "contains a copy" only in
//! the sense of the probe embeddings and extension-defect scans reported.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{extension_defects, MissingType};
use crate::structures::types::qf_type_unchecked;
use crate::structures::{ClassSpec, Embedding, Matcher, QfType, RelationKind, Slot, Structure};

/// Disjoint blocks covering `0..size`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn validate(&self, size: usize) -> Result<()> {
        let mut seen = vec![false; size];
        for b in &self.blocks {
            for &v in b {
                if v >= size {
                    return Err(Error::InvalidParameter(format!("block vertex {v} out of range")));
                }
                if seen[v] {
                    return Err(Error::InvalidParameter(format!("vertex {v} lies in two blocks")));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidParameter(format!("vertex {v} lies in no block")));
        }
        Ok(())
    }

    /// Block index per vertex.
    pub fn block_of(&self, size: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; size];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        out
    }

    fn from_labels(labels: &[usize], blocks: usize) -> Self {
        let mut out = vec![Vec::new(); blocks];
        for (v, &l) in labels.iter().enumerate() {
            out[l].push(v);
        }
        Self { blocks: out }
    }
}

/// A colour per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colouring {
    pub values: Vec<usize>,
}

impl Colouring {
    pub fn new(values: Vec<usize>) -> Self {
        Self { values }
    }

    pub fn validate(&self, size: usize) -> Result<()> {
        if self.values.len() != size {
            return Err(Error::InvalidParameter(format!(
                "colouring has {} values for {size} vertices",
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn is_monochromatic(&self, vertices: &[usize]) -> bool {
        vertices.windows(2).all(|w| self.values[w[0]] == self.values[w[1]])
    }

    pub fn is_heterochromatic(&self, vertices: &[usize]) -> bool {
        let set: BTreeSet<usize> = vertices.iter().map(|&v| self.values[v]).collect();
        set.len() == vertices.len()
    }
}

pub const SCHEMES: [&str; 7] = [
    "rationals-cut",
    "neighbourhood",
    "red-neighbourhood",
    "class-minus-point",
    "out-neighbourhood",
    "rb-CDE",
    "vertex-type",
];

fn need_anchor(s: &Structure, scheme: &str, anchor: Option<usize>) -> Result<usize> {
    let v = anchor.ok_or_else(|| Error::InvalidParameter(format!("scheme {scheme} needs an anchor vertex")))?;
    if v >= s.size() {
        return Err(Error::InvalidParameter(format!("anchor {v} out of range")));
    }
    Ok(v)
}

fn binary_relation(s: &Structure, kinds: &[RelationKind], what: &str) -> Result<usize> {
    s.signature()
        .relations()
        .iter()
        .position(|r| r.arity == 2 && kinds.contains(&r.kind))
        .ok_or_else(|| Error::SignatureMismatch(format!("no {what} relation in {}", s.signature())))
}

/// Named partitions of a finite structure.
///
/// * `rationals-cut`: vertices carry rational labels (`meta.rationals`, strings
///   like `"-3/4"`); `C` is the negative labels together with the label `1`, `D` the rest.
/// * `neighbourhood` (anchor `v`): `[C, D]` with `D` the neighbours of `v` in the
///   first symmetric binary relation and `C` the rest.
/// * `red-neighbourhood` (anchor `v`): as `neighbourhood`, for the relation `R`.
/// * `class-minus-point` (anchor `v`): with `A_0` the equivalence class of `v`,
///   `C = {v} ∪ (other classes)` and `D = A_0 \ {v}`.
/// * `out-neighbourhood` (anchor `v`): `[out(v), rest]` for the first oriented relation.
/// * `rb-CDE`: blocks `[C, D, E]` on a structure with symmetric relations `R`
///   and `B`. Vertices are taken in index order; a vertex with an earlier
///   neighbour goes to `C` or `D` according to the colour of its edge to the
///   least-index earlier neighbour, and to `E` if it has no earlier neighbour.
/// * `vertex-type`: one block per one-point type over the empty set.
pub fn named_partition(s: &Structure, scheme: &str, anchor: Option<usize>) -> Result<Partition> {
    let n = s.size();
    let p = match scheme {
        "rationals-cut" => {
            let labels = s
                .meta()
                .and_then(|m| m.get("rationals"))
                .and_then(|r| r.as_array())
                .ok_or_else(|| Error::InvalidParameter("rationals-cut needs meta.rationals".into()))?;
            if labels.len() != n {
                return Err(Error::InvalidParameter("one rational label per vertex required".into()));
            }
            let mut side = Vec::with_capacity(n);
            for l in labels {
                let q: BigRational = l
                    .as_str()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad rational label {l}")))?;
                side.push(if q < BigRational::zero() || q == BigRational::one() {
                    0
                } else {
                    1
                });
            }
            Partition::from_labels(&side, 2)
        }
        "neighbourhood" | "red-neighbourhood" => {
            let v = need_anchor(s, scheme, anchor)?;
            let r = if scheme == "red-neighbourhood" {
                s.relation("R")?
            } else {
                binary_relation(s, &[RelationKind::Symmetric, RelationKind::Plain], "binary")?
            };
            let side: Vec<usize> = (0..n).map(|w| usize::from(s.holds(r, &[v, w]))).collect();
            Partition::from_labels(&side, 2)
        }
        "class-minus-point" => {
            let v = need_anchor(s, scheme, anchor)?;
            let r = binary_relation(s, &[RelationKind::Equivalence], "equivalence")?;
            let side: Vec<usize> = (0..n).map(|w| usize::from(s.holds(r, &[v, w]))).collect();
            Partition::from_labels(&side, 2)
        }
        "out-neighbourhood" => {
            let v = need_anchor(s, scheme, anchor)?;
            let r = binary_relation(
                s,
                &[RelationKind::Tournament, RelationKind::Oriented, RelationKind::Plain],
                "oriented",
            )?;
            let side: Vec<usize> = (0..n).map(|w| usize::from(!s.holds(r, &[v, w]))).collect();
            Partition::from_labels(&side, 2)
        }
        "rb-CDE" => {
            let red = s.relation("R")?;
            let blue = s.relation("B")?;
            let side: Vec<usize> = (0..n)
                .map(|w| {
                    let first = s.neighbours(w).first().copied().filter(|&u| u < w);
                    match first {
                        Some(u) if s.holds(red, &[u, w]) => 0,
                        Some(u) if s.holds(blue, &[u, w]) => 1,
                        _ => 2,
                    }
                })
                .collect();
            Partition::from_labels(&side, 3)
        }
        "vertex-type" => {
            let mut ids: BTreeMap<QfType, usize> = BTreeMap::new();
            let mut order: Vec<QfType> = Vec::new();
            let side: Vec<usize> = (0..n)
                .map(|v| {
                    let t = qf_type_unchecked(s, v, &[]);
                    *ids.entry(t.clone()).or_insert_with(|| {
                        order.push(t);
                        order.len() - 1
                    })
                })
                .collect();
            Partition::from_labels(&side, order.len())
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown scheme {other:?}; expected one of {}",
                SCHEMES.join(", ")
            )))
        }
    };
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeVerdict {
    pub probe: usize,
    pub embeds: bool,
    /// An embedding into the whole structure with image inside the block.
    pub witness: Option<Embedding>,
}

/// A defect `(A, p)` of a block together with all realisations of `p` over
/// `A` in the whole structure; by construction these avoid the block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenSetWitness {
    pub base: Vec<usize>,
    #[serde(rename = "type")]
    pub qf_type: QfType,
    pub realisations: Vec<usize>,
    pub outside_block: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockReport {
    pub index: usize,
    pub size: usize,
    pub probes: Vec<ProbeVerdict>,
    pub defect_count: usize,
    /// The first defects, in vertex ids of the whole structure.
    pub defects: Vec<MissingType>,
    pub open_set_witness: Option<OpenSetWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub base_bound: usize,
    pub blocks: Vec<BlockReport>,
    pub reverify: Vec<String>,
}

/// How many defects are listed per block.
pub const LISTED_DEFECTS: usize = 16;

pub fn partition_report(
    s: &Structure,
    p: &Partition,
    k: &ClassSpec,
    probes: &[Structure],
    base_bound: usize,
) -> Result<PartitionReport> {
    p.validate(s.size())?;
    s.signature().ensure_same(k.signature())?;
    for probe in probes {
        probe.signature().ensure_same(s.signature())?;
    }
    let blocks = p
        .blocks
        .par_iter()
        .enumerate()
        .map(|(index, block)| block_report(s, index, block, k, probes, base_bound))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionReport {
        base_bound,
        blocks,
        reverify: vec![
            "probe witnesses: find_embeddings(probe, structure) restricted to the block".into(),
            "defects: extension_defects(induced block, class, base_bound)".into(),
            "open-set witnesses: basic_open_set(structure, base, type)".into(),
        ],
    })
}

fn block_report(
    s: &Structure,
    index: usize,
    block: &[usize],
    k: &ClassSpec,
    probes: &[Structure],
    base_bound: usize,
) -> Result<BlockReport> {
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    let sub = s.induced(&sorted);
    let probes = probes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let witness = Matcher::new(b, &sub)?
                .first()
                .map(|e| Embedding::new(e.map.iter().map(|&x| sorted[x]).collect()));
            Ok(ProbeVerdict {
                probe: i,
                embeds: witness.is_some(),
                witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lift = |m: MissingType| -> MissingType {
        let base: Vec<usize> = m.base.iter().map(|&x| sorted[x]).collect();
        MissingType {
            qf_type: m.qf_type.transport(base.clone()).unwrap(),
            base,
        }
    };
    let defects: Vec<MissingType> = extension_defects(&sub, k, base_bound)?.into_iter().map(lift).collect();
    let mut open_set_witness = None;
    for d in &defects {
        let realisations = basic_open_set(s, &d.base, &d.qf_type)?;
        if !realisations.is_empty() {
            let outside_block = realisations.iter().all(|v| sorted.binary_search(v).is_err());
            open_set_witness = Some(OpenSetWitness {
                base: d.base.clone(),
                qf_type: d.qf_type.clone(),
                realisations,
                outside_block,
            });
            break;
        }
    }
    Ok(BlockReport {
        index,
        size: block.len(),
        probes,
        defect_count: defects.len(),
        defects: defects.into_iter().take(LISTED_DEFECTS).collect(),
        open_set_witness,
    })
}

/// `{ v ∉ A : qf_type(S, v, A) = p }`, ascending.
pub fn basic_open_set(s: &Structure, a: &[usize], p: &QfType) -> Result<Vec<usize>> {
    p.validate(s.signature())?;
    if p.params.len() != a.len() {
        return Err(Error::InvalidParameter(format!(
            "type has {} parameters but the base has {}",
            p.params.len(),
            a.len()
        )));
    }
    if let Some(&bad) = a.iter().find(|&&x| x >= s.size()) {
        return Err(Error::InvalidParameter(format!("base vertex {bad} out of range")));
    }
    Ok((0..s.size())
        .filter(|v| !a.contains(v))
        .filter(|&v| qf_type_unchecked(s, v, a).atoms == p.atoms)
        .collect())
}

/// The type over the sequence `c ++ d ++ e` of a point above every element
/// of `c`, below every element of `e` and incomparable to `d`, in the strict
/// order relation `rel`.
pub fn valid_triple_type(rel: &str, c: &[usize], d: &[usize], e: &[usize]) -> QfType {
    let mut params = c.to_vec();
    params.extend_from_slice(d);
    params.extend_from_slice(e);
    let mut pats = BTreeSet::new();
    for i in 0..c.len() {
        pats.insert(vec![Slot::P(i), Slot::X]);
    }
    for j in 0..e.len() {
        pats.insert(vec![Slot::X, Slot::P(c.len() + d.len() + j)]);
    }
    let mut atoms = BTreeMap::new();
    if !pats.is_empty() {
        atoms.insert(rel.to_string(), pats);
    }
    QfType { params, atoms }
}

/// Colouring `χ(v) = min { i : v realises f_i · p over f_i(A) }` with `f_0, f_1, ...`
/// the embeddings of `A` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinEmbeddingColouring {
    pub colouring: Colouring,
    pub embeddings: usize,
    /// Colour given to vertices realising `p` over no copy of `A`: the number of embeddings.
    pub sentinel: usize,
    pub uncovered: Vec<usize>,
}

pub fn min_embedding_colouring(s: &Structure, a: &Structure, p: &QfType) -> Result<MinEmbeddingColouring> {
    p.validate(a.signature())?;
    if p.params.len() != a.size() {
        return Err(Error::InvalidParameter(format!(
            "type has {} parameters but A has {} vertices",
            p.params.len(),
            a.size()
        )));
    }
    let embeddings = Matcher::new(a, s)?.collect(None);
    if embeddings.is_empty() {
        return Err(Error::InvalidParameter("A does not embed into S".into()));
    }
    let sentinel = embeddings.len();
    let mut values = vec![sentinel; s.size()];
    let mut open: Vec<usize> = (0..s.size()).collect();
    for (i, f) in embeddings.iter().enumerate() {
        open.retain(|&v| {
            if f.map.contains(&v) {
                return true;
            }
            if qf_type_unchecked(s, v, &f.map).atoms == p.atoms {
                values[v] = i;
                false
            } else {
                true
            }
        });
        if open.is_empty() {
            break;
        }
    }
    Ok(MinEmbeddingColouring {
        colouring: Colouring::new(values),
        embeddings: sentinel,
        sentinel,
        uncovered: open,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourCopyReport {
    pub mono_count: usize,
    pub hetero_count: usize,
    pub first_mono: Option<Embedding>,
    pub first_hetero: Option<Embedding>,
}

/// Image sets (sorted) of induced copies of `b` in `s`, filtered by colour pattern.
fn coloured_copies(
    s: &Structure,
    chi: &Colouring,
    b: &Structure,
    mono: bool,
) -> Result<(Vec<Vec<usize>>, Option<Embedding>)> {
    chi.validate(s.size())?;
    let values = &chi.values;
    let m = Matcher::new(b, s)?.filter(move |map, _, t| {
        let c = values[t];
        if mono {
            map.iter().filter(|&&x| x != usize::MAX).all(|&x| values[x] == c)
        } else {
            map.iter().filter(|&&x| x != usize::MAX).all(|&x| values[x] != c)
        }
    });
    let mut seen = BTreeSet::new();
    let mut first = None;
    m.run(|map| {
        let mut img = map.to_vec();
        img.sort_unstable();
        if seen.insert(img) && first.is_none() {
            first = Some(Embedding::new(map.to_vec()));
        }
        ControlFlow::Continue(())
    });
    Ok((seen.into_iter().collect(), first))
}

/// Monochromatic and heterochromatic induced copies of `b` under `chi`.
/// Copies are counted as distinct image sets; mono copies of a one-point `b`
/// are also hetero.
pub fn colour_copy_search(s: &Structure, chi: &Colouring, b: &Structure) -> Result<ColourCopyReport> {
    let (mono, first_mono) = coloured_copies(s, chi, b, true)?;
    let (hetero, first_hetero) = coloured_copies(s, chi, b, false)?;
    Ok(ColourCopyReport {
        mono_count: mono.len(),
        hetero_count: hetero.len(),
        first_mono,
        first_hetero,
    })
}

/// Image sets of copies, each sorted.
pub type CopySets = Vec<Vec<usize>>;

/// All mono and hetero copy image sets, for cross-checking other searches.
pub fn colour_copy_sets(s: &Structure, chi: &Colouring, b: &Structure) -> Result<(CopySets, CopySets)> {
    Ok((
        coloured_copies(s, chi, b, true)?.0,
        coloured_copies(s, chi, b, false)?.0,
    ))
}
