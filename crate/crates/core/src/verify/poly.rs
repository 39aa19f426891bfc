//! Sparse polynomials in six variables with big-integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Ring;

pub type Exponents = [u32; 6];

/// Σ c·a^e0·b^e1·…·f^e5, stored without zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntPolynomial6 {
    terms: BTreeMap<Exponents, BigInt>,
}

impl IntPolynomial6 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term([0; 6], c);
        p
    }

    /// The `i`-th variable (0 = a, …, 5 = f).
    pub fn var(i: usize) -> Self {
        let mut e = [0; 6];
        e[i] = 1;
        let mut p = Self::zero();
        p.add_term(e, BigInt::one());
        p
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn eval(&self, x: &[BigRational; 6]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }
}

impl Add for IntPolynomial6 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Neg for IntPolynomial6 {
    type Output = Self;
    fn neg(mut self) -> Self {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for IntPolynomial6 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for IntPolynomial6 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = std::array::from_fn(|i| ea[i] + eb[i]);
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Ring for IntPolynomial6 {
    fn int(v: i64) -> Self {
        Self::constant(BigInt::from(v))
    }
}

impl fmt::Display for IntPolynomial6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        const NAMES: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*{}", NAMES[i])?,
                    _ => write!(f, "*{}^{k}", NAMES[i])?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_ops_are_canonical() {
        let a = IntPolynomial6::var(0);
        let b = IntPolynomial6::var(1);
        let lhs = (a.clone() + b.clone()).square();
        let rhs = a.square() + IntPolynomial6::int(2) * a.clone() * b.clone() + b.square();
        assert!((lhs.clone() - rhs).is_zero());
        assert_eq!(lhs.degree(), Some(2));
        assert_eq!(lhs.num_terms(), 3);
        assert!((a.clone() - a).is_zero());
        assert_eq!(IntPolynomial6::zero().degree(), None);
    }

    #[test]
    fn eval_matches_structure() {
        let a = IntPolynomial6::var(0);
        let f = IntPolynomial6::var(5);
        let p = a.clone() * a - IntPolynomial6::int(3) * f;
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let x = [q(1, 2), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 3)];
        assert_eq!(p.eval(&x), q(-3, 4));
        assert_eq!(p.to_string(), "1*a^2 + -3*f");
    }
}
