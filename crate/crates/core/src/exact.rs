//! Exact arithmetic for threshold comparisons.
//!
//! Real-valued parameters (τ, r, ε, θ) arrive as `f64`. Every finite `f64`
//! is a dyadic rational, so converting it exactly and comparing with big
//! integers settles boundary cases like `3 ≤ 2·(1/2)·3` without rounding.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not a finite number")))
}

pub fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
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

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Successive powers `base^0, …, base^max`.
pub fn powers(base: &BigRational, max: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = BigRational::one();
    for _ in 0..=max {
        out.push(acc.clone());
        acc *= base;
    }
    out
}

/// Powers of a nonnegative rational kept as separate numerator and
/// denominator powers, for repeated `a ≥ base^s · b` tests on integers.
#[derive(Clone, Debug)]
pub struct PowerTable {
    num: Vec<BigUint>,
    den: Vec<BigUint>,
}

impl PowerTable {
    pub fn new(base: &BigRational, max: usize) -> Self {
        let num = base.numer().magnitude().clone();
        let den = base.denom().magnitude().clone();
        let mut table = Self {
            num: Vec::with_capacity(max + 1),
            den: Vec::with_capacity(max + 1),
        };
        let (mut a, mut b) = (BigUint::one(), BigUint::one());
        for _ in 0..=max {
            table.num.push(a.clone());
            table.den.push(b.clone());
            a *= &num;
            b *= &den;
        }
        table
    }

    pub fn max_exponent(&self) -> usize {
        self.num.len() - 1
    }

    /// `a ≥ base^s · b`.
    pub fn ge_scaled(&self, a: &BigUint, s: usize, b: &BigUint) -> bool {
        a * &self.den[s] >= &self.num[s] * b
    }

    /// `a ≤ base^s · b`.
    pub fn le_scaled(&self, a: &BigUint, s: usize, b: &BigUint) -> bool {
        a * &self.den[s] <= &self.num[s] * b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_conversion_is_exact() {
        assert_eq!(exact(1.5).unwrap(), BigRational::new(3.into(), 2.into()));
        // 0.1 is not dyadic; the conversion keeps the binary value, not 1/10.
        assert_ne!(exact(0.1).unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(exact(4.0).unwrap(), int(4));
        assert!(exact(f64::NAN).is_err());
        assert!(exact(f64::INFINITY).is_err());
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial(12, 3), BigUint::from(220u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        assert_eq!(factorial(10), BigUint::from(3_628_800u32));
        assert_eq!(pow(&exact(0.5).unwrap(), 3), BigRational::new(1.into(), 8.into()));
    }

    #[test]
    fn power_table_boundaries() {
        let t = PowerTable::new(&exact(1.5).unwrap(), 3);
        // 27 = 1.5^3 · 8
        assert!(t.ge_scaled(&BigUint::from(27u32), 3, &BigUint::from(8u32)));
        assert!(t.le_scaled(&BigUint::from(27u32), 3, &BigUint::from(8u32)));
        assert!(!t.ge_scaled(&BigUint::from(26u32), 3, &BigUint::from(8u32)));
        assert_eq!(t.max_exponent(), 3);
    }
}
