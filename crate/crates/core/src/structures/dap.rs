//! Bounded search for failures of three-way disjoint amalgamation over the empty structure.

use serde::{Deserialize, Serialize};

use super::class::ClassSpec;
use super::types::{enumerate_structures, tuple_groups, TupleGroup};
use super::Structure;
use crate::error::{Error, Result};

const MAX_FREE_GROUPS: usize = 22;

/// Three disjoint pieces `A_0, A_1, A_2` and, for each pair `{i, j}` with
/// `i < j` (in the order `{0,1}, {0,2}, {1,2}`), a structure on `A_i ⊔ A_j`
/// whose first `|A_i|` vertices carry `A_i` and the rest `A_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DapFamily {
    pub sides: Vec<Structure>,
    pub pairs: Vec<Structure>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DapReport {
    pub passed: bool,
    pub size_bound: usize,
    pub families_checked: usize,
    pub counterexample: Option<DapFamily>,
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Checks every family with pieces of size `1..=size_bound` (up to
/// isomorphism) for a common completion in the class. Tuples meeting only
/// one or two pieces are fixed by the family; tuples meeting all three are
/// chosen freely. Reports the first family without a completion.
pub fn check_3dap_over_empty(k: &ClassSpec, size_bound: usize) -> Result<DapReport> {
    if size_bound == 0 {
        return Err(Error::InvalidParameter("size bound must be at least 1".into()));
    }
    let sig = k.signature();
    let mut pieces = Vec::new();
    for n in 1..=size_bound {
        pieces.extend(enumerate_structures(sig, n, Some(k))?);
    }
    let mut checked = 0;
    for i0 in 0..pieces.len() {
        for i1 in i0..pieces.len() {
            for i2 in i1..pieces.len() {
                let sides = [&pieces[i0], &pieces[i1], &pieces[i2]];
                let options: Vec<Vec<Structure>> = PAIRS
                    .iter()
                    .map(|&(a, b)| pair_options(sides[a], sides[b], k))
                    .collect::<Result<_>>()?;
                for p0 in &options[0] {
                    for p1 in &options[1] {
                        for p2 in &options[2] {
                            checked += 1;
                            let pairs = [p0, p1, p2];
                            if !has_completion(&sides, &pairs, k)? {
                                return Ok(DapReport {
                                    passed: false,
                                    size_bound,
                                    families_checked: checked,
                                    counterexample: Some(DapFamily {
                                        sides: sides.iter().map(|s| (*s).clone()).collect(),
                                        pairs: pairs.iter().map(|s| (*s).clone()).collect(),
                                    }),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(DapReport {
        passed: true,
        size_bound,
        families_checked: checked,
        counterexample: None,
    })
}

fn side_of(v: usize, offsets: &[usize]) -> usize {
    offsets.iter().rposition(|&o| v >= o).unwrap()
}

fn groups_meeting(groups: Vec<TupleGroup>, offsets: &[usize], all: usize) -> Vec<TupleGroup> {
    groups
        .into_iter()
        .filter(|g| {
            let mut touched = vec![false; offsets.len()];
            for &v in &g.tuples[0] {
                touched[side_of(v, offsets)] = true;
            }
            touched.iter().filter(|&&t| t).count() == all
        })
        .collect()
}

/// All structures on `a ⊔ b` inducing `a` and `b` that lie in the class.
fn pair_options(a: &Structure, b: &Structure, k: &ClassSpec) -> Result<Vec<Structure>> {
    let n = a.size() + b.size();
    let offsets = [0, a.size()];
    let cross = groups_meeting(tuple_groups(k.signature(), n, None), &offsets, 2);
    if cross.len() > MAX_FREE_GROUPS {
        return Err(Error::BudgetExceeded(format!("{} cross tuple groups", cross.len())));
    }
    let base = disjoint_union(&[a, b]);
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << cross.len()) {
        if let Some(s) = with_groups(k.signature(), n, &base, &cross, mask) {
            if k.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn has_completion(sides: &[&Structure; 3], pairs: &[&Structure; 3], k: &ClassSpec) -> Result<bool> {
    let offsets = [0, sides[0].size(), sides[0].size() + sides[1].size()];
    let n = offsets[2] + sides[2].size();
    let sig = k.signature();
    let mut fixed: Vec<Vec<Vec<usize>>> = vec![Vec::new(); sig.len()];
    for (&(a, b), pair) in PAIRS.iter().zip(pairs) {
        let split = sides[a].size();
        let place = |v: usize| {
            if v < split {
                offsets[a] + v
            } else {
                offsets[b] + v - split
            }
        };
        for (r, rel) in fixed.iter_mut().enumerate() {
            rel.extend(
                pair.tuples(r)
                    .iter()
                    .map(|t| t.iter().map(|&v| place(v)).collect::<Vec<_>>()),
            );
        }
    }
    let free = groups_meeting(tuple_groups(sig, n, None), &offsets, 3);
    if free.len() > MAX_FREE_GROUPS {
        return Err(Error::BudgetExceeded(format!(
            "{} free tuple groups in the completion",
            free.len()
        )));
    }
    // Relation axioms (e.g. transitivity) are only checked on the completed
    // structure, since the fixed part alone may be an invalid structure.
    for mask in 0u64..(1u64 << free.len()) {
        if let Some(s) = with_groups(sig, n, &fixed, &free, mask) {
            if k.contains(&s) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn disjoint_union(parts: &[&Structure]) -> Vec<Vec<Vec<usize>>> {
    let mut rels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); parts[0].signature().len()];
    let mut offset = 0;
    for p in parts {
        for (r, rel) in rels.iter_mut().enumerate() {
            rel.extend(
                p.tuples(r)
                    .iter()
                    .map(|t| t.iter().map(|&v| v + offset).collect::<Vec<_>>()),
            );
        }
        offset += p.size();
    }
    rels
}

fn with_groups(
    sig: &super::Signature,
    n: usize,
    base: &[Vec<Vec<usize>>],
    groups: &[TupleGroup],
    mask: u64,
) -> Option<Structure> {
    let mut rels = base.to_vec();
    for (gi, g) in groups.iter().enumerate() {
        if mask >> gi & 1 == 1 {
            rels[g.rel].extend(g.tuples.iter().cloned());
        }
    }
    Structure::new(sig.clone(), n, rels).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{RelationKind, RelationSymbol, Signature};

    #[test]
    fn all_graphs_pass_at_bound_two() {
        let r = check_3dap_over_empty(&ClassSpec::graphs(), 2).unwrap();
        assert!(r.passed);
        assert!(r.families_checked > 0);
    }

    #[test]
    fn triangle_free_fails_at_bound_one() {
        let r = check_3dap_over_empty(&ClassSpec::kn_free(3).unwrap(), 1).unwrap();
        assert!(!r.passed);
        let fam = r.counterexample.unwrap();
        assert!(fam.sides.iter().all(|s| s.size() == 1));
        assert!(fam.pairs.iter().all(|p| p.tuple_count() == 2));
    }

    #[test]
    fn linear_orders_fail() {
        let sig = Signature::new(vec![RelationSymbol::new("<", 2, RelationKind::LinearOrder)]).unwrap();
        let r = check_3dap_over_empty(&ClassSpec::all(sig), 1).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn zero_bound_is_rejected() {
        assert!(check_3dap_over_empty(&ClassSpec::graphs(), 0).is_err());
    }
}
