//! Searching for colourings that defeat a partitioned hypergraph.
//!
//! A tuple of colourings is a counterexample when no edge inside a part is
//! monochromatic under any colouring and every transversal edge is
//! non-heterochromatic under at least one colouring. Only the kernels
//! (partitions into colour classes) matter.

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hypergraph::PartitionedHypergraph;
use crate::error::{Error, Result};
use crate::partitionlab::Colouring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum AdversaryMode {
    Exhaustive,
    Random { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryBudget {
    /// Exhaustive mode is refused when `Bell(|V|)^s` exceeds this.
    pub max_partition_tuples: f64,
    pub max_nodes: u64,
}

impl Default for AdversaryBudget {
    fn default() -> Self {
        Self {
            max_partition_tuples: 1e12,
            max_nodes: 1_000_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversaryReport {
    pub counterexample: Option<Vec<Colouring>>,
    /// Search nodes (exhaustive) or trials (random).
    pub examined: u64,
}

pub fn bell(n: usize) -> BigUint {
    // Bell triangle
    let mut row = vec![BigUint::one()];
    for _ in 1..=n {
        let mut next = vec![row.last().unwrap().clone()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0].clone()
}

/// Direct check of the counterexample condition.
pub fn is_counterexample(h: &PartitionedHypergraph, colourings: &[Colouring]) -> bool {
    let part_of = h.part_of();
    h.edges.iter().all(|e| {
        if h.inside_part(e, &part_of).is_some() {
            colourings.iter().all(|chi| !chi.is_monochromatic(e))
        } else if h.is_transversal(e, &part_of) {
            colourings.iter().any(|chi| !chi.is_heterochromatic(e))
        } else {
            true
        }
    })
}

/// Union-find with undo (union by size, no path compression).
struct Classes {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<usize>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            log: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.log.push(b);
        true
    }

    fn undo(&mut self) {
        let b = self.log.pop().unwrap();
        let a = self.parent[b];
        self.size[a] -= self.size[b];
        self.parent[b] = b;
    }

    fn colouring(&self) -> Colouring {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let values = (0..n)
            .map(|v| {
                let r = self.find(v);
                if label[r] == usize::MAX {
                    label[r] = next;
                    next += 1;
                }
                label[r]
            })
            .collect();
        Colouring::new(values)
    }
}

struct Search<'a> {
    inside: Vec<&'a [usize]>,
    transversal: Vec<&'a [usize]>,
    classes: Vec<Classes>,
    nodes: u64,
    max_nodes: u64,
}

impl Search<'_> {
    fn some_inside_mono(&self) -> bool {
        self.inside.iter().any(|e| {
            self.classes.iter().any(|c| {
                let r = c.find(e[0]);
                e.iter().all(|&v| c.find(v) == r)
            })
        })
    }

    fn already_broken(&self, e: &[usize]) -> bool {
        self.classes.iter().any(|c| {
            let roots: Vec<usize> = e.iter().map(|&v| c.find(v)).collect();
            (0..roots.len()).any(|i| roots[i + 1..].contains(&roots[i]))
        })
    }

    /// Each transversal edge must get an equal pair in some colouring; the
    /// finest partitions realising a choice of pairs are the best candidates,
    /// since merging more can only create monochromatic edges inside parts.
    fn run(&mut self, i: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::BudgetExceeded(format!(
                "more than {} adversary nodes",
                self.max_nodes
            )));
        }
        if i == self.transversal.len() {
            return Ok(true);
        }
        let e = self.transversal[i];
        if self.already_broken(e) {
            return self.run(i + 1);
        }
        for r in 0..self.classes.len() {
            for a in 0..e.len() {
                for b in a + 1..e.len() {
                    self.classes[r].union(e[a], e[b]);
                    if !self.some_inside_mono() && self.run(i + 1)? {
                        return Ok(true);
                    }
                    self.classes[r].undo();
                }
            }
        }
        Ok(false)
    }
}

/// Searches s-tuples of colourings for a counterexample; the first found is returned.
pub fn vcvrp_adversary(
    h: &PartitionedHypergraph,
    s: usize,
    mode: AdversaryMode,
    budget: &AdversaryBudget,
) -> Result<AdversaryReport> {
    if s == 0 {
        return Err(Error::InvalidParameter("need at least one colouring".into()));
    }
    let size = h.vertex_count();
    let part_of = h.part_of();
    match mode {
        AdversaryMode::Exhaustive => {
            let tuples = num_traits::pow(bell(size), s);
            let tuples_f: f64 = num_traits::ToPrimitive::to_f64(&tuples).unwrap_or(f64::INFINITY);
            if tuples_f > budget.max_partition_tuples {
                return Err(Error::BudgetExceeded(format!(
                    "Bell({size})^{s} = {tuples} partition tuples exceeds the exhaustive budget"
                )));
            }
            let mut search = Search {
                inside: h
                    .edges
                    .iter()
                    .filter(|e| h.inside_part(e, &part_of).is_some())
                    .map(Vec::as_slice)
                    .collect(),
                transversal: h
                    .edges
                    .iter()
                    .filter(|e| h.is_transversal(e, &part_of))
                    .map(Vec::as_slice)
                    .collect(),
                classes: (0..s).map(|_| Classes::new(size)).collect(),
                nodes: 0,
                max_nodes: budget.max_nodes,
            };
            let counterexample = if search.some_inside_mono() {
                // only possible for edges inside a part of size 1, which cannot happen for n ≥ 2
                None
            } else if search.run(0)? {
                Some(search.classes.iter().map(Classes::colouring).collect())
            } else {
                None
            };
            Ok(AdversaryReport {
                counterexample,
                examined: search.nodes,
            })
        }
        AdversaryMode::Random { trials, seed } => {
            let found = (0..trials).into_par_iter().find_map_first(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let colourings: Vec<Colouring> = (0..s)
                    .map(|_| {
                        let q = rng.random_range(1..=size.max(1));
                        Colouring::new((0..size).map(|_| rng.random_range(0..q)).collect())
                    })
                    .collect();
                is_counterexample(h, &colourings).then_some(colourings)
            });
            Ok(AdversaryReport {
                counterexample: found,
                examined: trials,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let b: Vec<u64> = (0..8)
            .map(|n| num_traits::ToPrimitive::to_u64(&bell(n)).unwrap())
            .collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn lone_transversal_edge_is_defeated_by_merging() {
        let h = PartitionedHypergraph::new(2, vec![vec![0], vec![1]], vec![vec![0, 1]]).unwrap();
        let r = vcvrp_adversary(&h, 1, AdversaryMode::Exhaustive, &AdversaryBudget::default()).unwrap();
        let cx = r.counterexample.unwrap();
        assert_eq!(cx[0].values[0], cx[0].values[1]);
        assert!(is_counterexample(&h, &cx));
    }

    #[test]
    fn merged_colouring_fails_with_edge_inside_part() {
        let h = PartitionedHypergraph::new(2, vec![vec![0, 1], vec![2, 3]], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(!is_counterexample(&h, &[Colouring::new(vec![0; 4])]));
    }

    #[test]
    fn pentagon_defeats_one_colouring() {
        // 0,1 inside part 0; path 0-3-2-4-1 of transversal edges
        let h = PartitionedHypergraph::new(
            2,
            vec![vec![0, 1, 2], vec![3, 4, 5]],
            vec![vec![0, 1], vec![0, 3], vec![2, 3], vec![2, 4], vec![1, 4]],
        )
        .unwrap();
        let r = vcvrp_adversary(&h, 1, AdversaryMode::Exhaustive, &AdversaryBudget::default()).unwrap();
        assert!(r.counterexample.is_none());
        let r = vcvrp_adversary(&h, 2, AdversaryMode::Exhaustive, &AdversaryBudget::default()).unwrap();
        assert!(is_counterexample(&h, &r.counterexample.unwrap()));
    }

    #[test]
    fn budget_refuses_large_exhaustive_runs() {
        let h = PartitionedHypergraph::new(2, vec![(0..10).collect(), (10..20).collect()], vec![]).unwrap();
        assert!(matches!(
            vcvrp_adversary(&h, 2, AdversaryMode::Exhaustive, &AdversaryBudget::default()),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
