//! Counting suitable n-sets: monochromatic inside a part, heterochromatic transversals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::SuitableParams;
use crate::error::{Error, Result};
use crate::partitionlab::Colouring;
use crate::structures::combinations;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuitableCounts {
    /// `mono[r][i]`: n-subsets of part `i` monochromatic under colouring `r`.
    pub mono: Vec<Vec<u64>>,
    /// `hetero[r]`: transversals heterochromatic under colouring `r`.
    pub hetero: Vec<u64>,
    /// n-subsets of part `i` monochromatic under every colouring.
    pub joint_mono: Vec<u64>,
    /// Transversals heterochromatic under every colouring.
    pub joint_hetero: u64,
    /// `sum(joint_mono) + joint_hetero`
    pub jointly_suitable: u64,
}

fn check_parts(parts: &[Vec<usize>], colourings: &[Colouring]) -> Result<usize> {
    let n = parts.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two parts".into()));
    }
    let size: usize = parts.iter().map(Vec::len).sum();
    let mut seen = vec![false; size];
    for p in parts {
        for &v in p {
            if v >= size || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidParameter("parts must partition 0..N".into()));
            }
        }
    }
    for chi in colourings {
        chi.validate(size)?;
    }
    Ok(n)
}

/// Counts by listing every n-subset of each part and every transversal.
pub fn count_suitable_enumerated(parts: &[Vec<usize>], colourings: &[Colouring]) -> Result<SuitableCounts> {
    let n = check_parts(parts, colourings)?;
    let s = colourings.len();
    let mut mono = vec![vec![0u64; n]; s];
    let mut joint_mono = vec![0u64; n];
    for (i, part) in parts.iter().enumerate() {
        for idx in combinations(part.len(), n) {
            let set: Vec<usize> = idx.iter().map(|&j| part[j]).collect();
            let mut all = true;
            for (r, chi) in colourings.iter().enumerate() {
                if chi.is_monochromatic(&set) {
                    mono[r][i] += 1;
                } else {
                    all = false;
                }
            }
            if all {
                joint_mono[i] += 1;
            }
        }
    }
    let mut hetero = vec![0u64; s];
    let mut joint_hetero = 0u64;
    let mut pick = vec![0usize; n];
    let mut tuple = vec![0usize; n];
    'outer: loop {
        for i in 0..n {
            tuple[i] = parts[i][pick[i]];
        }
        let mut all = true;
        for (r, chi) in colourings.iter().enumerate() {
            if chi.is_heterochromatic(&tuple) {
                hetero[r] += 1;
            } else {
                all = false;
            }
        }
        if all {
            joint_hetero += 1;
        }
        for i in (0..n).rev() {
            pick[i] += 1;
            if pick[i] < parts[i].len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        break;
    }
    Ok(SuitableCounts {
        jointly_suitable: joint_mono.iter().sum::<u64>() + joint_hetero,
        mono,
        hetero,
        joint_mono,
        joint_hetero,
    })
}

fn binom_u64(m: u64, n: usize) -> u64 {
    let n = n as u64;
    if n > m {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..n {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Set partitions of `0..n` as block lists.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    rec(0, n, &mut blocks, &mut out);
    out
}

/// Counts from per-part colour tallies: binomials of class sizes for
/// monochromatic sets, Möbius inversion over set partitions of the parts for
/// heterochromatic transversals, and products of joint-class multiplicities
/// for the joint counts.
pub fn count_suitable(parts: &[Vec<usize>], colourings: &[Colouring]) -> Result<SuitableCounts> {
    let n = check_parts(parts, colourings)?;
    let s = colourings.len();
    let mut mono = vec![vec![0u64; n]; s];
    let mut hetero = vec![0u64; s];
    let partitions = set_partitions(n);
    for (r, chi) in colourings.iter().enumerate() {
        let tallies: Vec<HashMap<usize, u64>> = parts
            .iter()
            .map(|p| {
                let mut t = HashMap::new();
                for &v in p {
                    *t.entry(chi.values[v]).or_insert(0) += 1;
                }
                t
            })
            .collect();
        for i in 0..n {
            mono[r][i] = tallies[i].values().map(|&m| binom_u64(m, n)).sum();
        }
        let colours: std::collections::BTreeSet<usize> = tallies.iter().flat_map(|t| t.keys().copied()).collect();
        let mut total: i128 = 0;
        for pi in &partitions {
            let mut term: i128 = 1;
            for block in pi {
                let l = block.len() as i128;
                let mobius = if l % 2 == 1 { 1 } else { -1 } * (1..l).product::<i128>();
                let agree: i128 = colours
                    .iter()
                    .map(|q| {
                        block
                            .iter()
                            .map(|&i| *tallies[i].get(q).unwrap_or(&0) as i128)
                            .product::<i128>()
                    })
                    .sum();
                term *= mobius * agree;
            }
            total += term;
        }
        hetero[r] = total as u64;
    }

    // joint classes: vertices with the same colour in every colouring
    let joint: Vec<Vec<(Vec<usize>, u64)>> = parts
        .iter()
        .map(|p| {
            let mut t: HashMap<Vec<usize>, u64> = HashMap::new();
            for &v in p {
                let key: Vec<usize> = colourings.iter().map(|c| c.values[v]).collect();
                *t.entry(key).or_insert(0) += 1;
            }
            let mut t: Vec<_> = t.into_iter().collect();
            t.sort();
            t
        })
        .collect();
    let joint_mono: Vec<u64> = joint
        .iter()
        .map(|t| t.iter().map(|(_, m)| binom_u64(*m, n)).sum())
        .collect();
    fn transversals(joint: &[Vec<(Vec<usize>, u64)>], chosen: &mut Vec<usize>, i: usize) -> u64 {
        if i == joint.len() {
            return 1;
        }
        let mut total = 0;
        for (idx, (key, m)) in joint[i].iter().enumerate() {
            let clash = chosen
                .iter()
                .enumerate()
                .any(|(j, &c)| joint[j][c].0.iter().zip(key).any(|(a, b)| a == b));
            if clash {
                continue;
            }
            chosen.push(idx);
            total += m * transversals(joint, chosen, i + 1);
            chosen.pop();
        }
        total
    }
    let joint_hetero = if s == 0 {
        parts.iter().map(|p| p.len() as u64).product()
    } else if s == 1 {
        hetero[0]
    } else {
        transversals(&joint, &mut Vec::new(), 0)
    };
    Ok(SuitableCounts {
        jointly_suitable: joint_mono.iter().sum::<u64>() + joint_hetero,
        mono,
        hetero,
        joint_mono,
        joint_hetero,
    })
}

/// Parts `{0..c}, {c..2c}, …`.
pub fn equal_parts(n: usize, c: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| (i * c..(i + 1) * c).collect()).collect()
}

/// For one colouring: some part holds more than `a0·c^n` monochromatic
/// n-sets, or there are more than `(1 - a1)·c^n` heterochromatic transversals.
pub fn dichotomy_holds(params: &SuitableParams, c: u64, counts: &SuitableCounts, r: usize) -> bool {
    let cn = BigRational::from_integer(num_traits::pow(BigInt::from(c), params.n));
    let mono_bar = &params.a0 * &cn;
    let hetero_bar = (BigRational::from_integer(1.into()) - &params.a1) * &cn;
    counts.mono[r]
        .iter()
        .any(|&m| BigRational::from_integer(m.into()) > mono_bar)
        || BigRational::from_integer(counts.hetero[r].into()) > hetero_bar
}

/// A colouring of `size` vertices with a random number of colours, uniform or
/// skewed towards colour 0.
pub fn random_colouring<R: Rng>(size: usize, rng: &mut R) -> Colouring {
    let q = rng.random_range(1..=size.max(1));
    let skew: f64 = rng.random_range(0.0..1.0);
    let values = (0..size)
        .map(|_| {
            if rng.random_bool(skew * 0.9) {
                0
            } else {
                rng.random_range(0..q)
            }
        })
        .collect();
    Colouring::new(values)
}
