//! Exact parameter arithmetic for the counting dichotomy and the failure bound.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scan limit when searching for the threshold size.
const MAX_SCAN: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuitableParams {
    pub n: usize,
    #[serde(with = "ratio_string")]
    pub a1: BigRational,
    #[serde(with = "ratio_string")]
    pub epsilon: BigRational,
    #[serde(with = "ratio_string")]
    pub a0: BigRational,
    pub c_min: u64,
}

pub(crate) mod ratio_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn pow_half(t: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << t)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Coefficients (constant term first) of `binom(c·ε, n) - a0·c^n` as a polynomial in `c`.
pub fn suitable_polynomial(n: usize, epsilon: &BigRational, a0: &BigRational) -> Vec<BigRational> {
    let mut poly = vec![BigRational::one()];
    for j in 0..n {
        // multiply by (ε·c - j)
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (i, a) in poly.iter().enumerate() {
            next[i + 1] += a * epsilon;
            next[i] -= a * BigRational::from_integer(BigInt::from(j));
        }
        poly = next;
    }
    let nf = BigRational::from_integer(factorial(n));
    for a in &mut poly {
        *a /= &nf;
    }
    poly[n] -= a0;
    poly
}

pub fn eval_poly(poly: &[BigRational], c: u64) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(c));
    poly.iter().rev().fold(BigRational::zero(), |acc, a| acc * &x + a)
}

/// `(1 - n·ε)^n > 1 - a1`
pub fn epsilon_condition(n: usize, epsilon: &BigRational, a1: &BigRational) -> bool {
    let base = BigRational::one() - BigRational::from_integer(BigInt::from(n)) * epsilon;
    if base.is_negative() {
        return false;
    }
    num_traits::pow(base, n) > BigRational::one() - a1
}

/// Largest ε = 1/2^t with `(1 - nε)^n > 1 - a1`, `a0 = ε^n / (2·n!)` (half the
/// leading coefficient of `binom(cε, n)`), and the least `c_min ≥ 1` with
/// `binom(cε, n) - a0·c^n > 0` for every `c ≥ c_min`.
pub fn suitable_params(n: usize, a1: &BigRational) -> Result<SuitableParams> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    if !a1.is_positive() || *a1 >= BigRational::one() {
        return Err(Error::InvalidParameter(format!("a1 = {a1} is not in (0, 1)")));
    }
    let mut t = 1;
    let epsilon = loop {
        let e = pow_half(t);
        if epsilon_condition(n, &e, a1) {
            break e;
        }
        t += 1;
        if t > 4096 {
            return Err(Error::InvalidParameter(format!("no admissible ε for a1 = {a1}")));
        }
    };
    let a0 = num_traits::pow(epsilon.clone(), n) / BigRational::from_integer(factorial(n) * 2);
    let poly = suitable_polynomial(n, &epsilon, &a0);
    let c_min = threshold_size(&poly)?;
    Ok(SuitableParams {
        n,
        a1: a1.clone(),
        epsilon,
        a0,
        c_min,
    })
}

/// Least `C ≥ 1` such that the polynomial (positive leading coefficient) is
/// positive at every integer `c ≥ C`. Every real root lies below the Cauchy
/// bound, so the scan runs downward from there.
fn threshold_size(poly: &[BigRational]) -> Result<u64> {
    let lead = poly.last().unwrap();
    debug_assert!(lead.is_positive());
    let mut bound = BigRational::zero();
    for a in &poly[..poly.len() - 1] {
        let r = (a / lead).abs();
        if r > bound {
            bound = r;
        }
    }
    let top = (bound + BigRational::one()).ceil().to_integer();
    let top = top
        .to_u64()
        .filter(|&t| t <= MAX_SCAN)
        .ok_or_else(|| Error::BudgetExceeded(format!("threshold search up to {top}")))?;
    // integer coefficients for fast evaluation
    let den = poly.iter().fold(BigInt::one(), |l, a| l.lcm(a.denom()));
    let ints: Vec<BigInt> = poly
        .iter()
        .map(|a| (a * BigRational::from_integer(den.clone())).to_integer())
        .collect();
    let mut c = top;
    while c > 0 {
        let x = BigInt::from(c);
        let v = ints.iter().rev().fold(BigInt::zero(), |acc, a| acc * &x + a);
        if !v.is_positive() {
            return Ok(c + 1);
        }
        c -= 1;
    }
    Ok(1)
}

impl SuitableParams {
    /// Re-checks both defining inequalities; the second on `c_min..=c_min + extra`.
    pub fn verify(&self, extra: u64) -> bool {
        if !epsilon_condition(self.n, &self.epsilon, &self.a1) {
            return false;
        }
        if !self.a0.is_positive() || self.a0 >= BigRational::one() {
            return false;
        }
        let poly = suitable_polynomial(self.n, &self.epsilon, &self.a0);
        if !poly[self.n].is_positive() {
            return false;
        }
        (self.c_min..=self.c_min + extra).all(|c| eval_poly(&poly, c).is_positive())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureBound {
    /// Natural log of the bound.
    pub ln_bound: f64,
    /// `exp(ln_bound)`; may under- or overflow.
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
}

/// `exp(-a·c^(1+ε) + (cns + cn + 1)·ln c + cns·ln n)`, the bound on the
/// probability that some s-tuple of colourings has fewer than `c` suitable edges.
pub fn failure_bound(n: usize, s: usize, epsilon: f64, c: f64, a: f64) -> FailureBound {
    let (nf, sf) = (n as f64, s as f64);
    let ln_bound = -a * c.powf(1.0 + epsilon) + (c * nf * sf + c * nf + 1.0) * c.ln() + c * nf * sf * nf.ln();
    FailureBound {
        ln_bound,
        bound: ln_bound.exp(),
        vacuous: ln_bound >= 0.0,
    }
}

/// Number of sequences `v_0 e_0 … v_{m-1} e_{m-1}` of distinct vertices and
/// n-sets `e_i ⊇ {v_i, v_{i+1}}` over `N` vertices (edges need not be distinct
/// or present).
pub fn potential_cycle_count(vertices: usize, n: usize, m: usize) -> BigUint {
    if m > vertices || n < 2 || vertices < n {
        return BigUint::zero();
    }
    let falling = (0..m).fold(BigUint::one(), |acc, i| acc * BigUint::from(vertices - i));
    let choose = binomial(vertices - 2, n - 2);
    falling * num_traits::pow(choose, m)
}

/// `(cn)^(m(n-1))`
pub fn potential_cycle_bound(vertices: usize, n: usize, m: usize) -> BigUint {
    num_traits::pow(BigUint::from(vertices), m * (n - 1))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}
