//! Polynomials over GF(2) of degree at most 32, stored as bit masks.
//!
//! A full polynomial is a `u64` whose bit `j` is the coefficient of `x^j`.
//! Products of two residues (degree < 32) fit in 63 bits, so reduction never
//! needs more than one word.

use std::fmt;

use crate::error::{Error, Result};

pub const MIN_ORDER: u32 = 2;
pub const MAX_ORDER: u32 = 32;

/// Characteristic polynomial `x^m + a_{m-1} x^{m-1} + ... + a_1 x + a_0`.
///
/// `taps` holds `a_0 .. a_{m-1}` in bits `0 .. m-1`; the leading `x^m`
/// coefficient is implicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2Poly {
    degree: u32,
    taps: u32,
}

impl Gf2Poly {
    pub fn new(degree: u32, taps: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&degree) {
            return Err(Error::UnsupportedOrder(degree));
        }
        if degree < 32 && taps >> degree != 0 {
            return Err(Error::Config(format!(
                "tap mask {taps:#x} has bits at or above degree {degree}"
            )));
        }
        if taps & 1 == 0 {
            return Err(Error::Config(
                "constant coefficient a0 must be 1 (x divides the polynomial)".into(),
            ));
        }
        Ok(Self { degree, taps })
    }

    /// Builds a polynomial from the exponents of its nonzero terms, e.g.
    /// `[3, 1, 0]` for `x^3 + x + 1`. The largest exponent is the degree.
    pub fn from_exponents(exponents: &[u32]) -> Result<Self> {
        let degree = exponents.iter().copied().max().unwrap_or(0);
        if !(MIN_ORDER..=MAX_ORDER).contains(&degree) {
            return Err(Error::UnsupportedOrder(degree));
        }
        let taps = exponents
            .iter()
            .filter(|&&e| e < degree)
            .fold(0u32, |acc, &e| acc ^ (1 << e));
        Self::new(degree, taps)
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Coefficient mask `a_0 .. a_{m-1}`.
    #[inline]
    pub fn taps(&self) -> u32 {
        self.taps
    }

    /// Coefficient `a_j` for `j < m`.
    #[inline]
    pub fn coeff(&self, j: u32) -> bool {
        j < self.degree && (self.taps >> j) & 1 == 1
    }

    /// Full polynomial including the leading term.
    #[inline]
    pub fn full(&self) -> u64 {
        (1u64 << self.degree) | self.taps as u64
    }

    /// `2^m - 1`, the maximal LFSR period for this order.
    #[inline]
    pub fn max_period(&self) -> u64 {
        (1u64 << self.degree) - 1
    }

    /// True iff the polynomial is primitive over GF(2).
    pub fn is_primitive(&self) -> bool {
        if !self.is_irreducible() {
            return false;
        }
        let order = self.max_period();
        let p = self.full();
        if pow_x_mod(order, p) != 1 {
            return false;
        }
        prime_factors(order)
            .into_iter()
            .all(|q| pow_x_mod(order / q, p) != 1)
    }

    /// Ben-Or test: `gcd(p, x^(2^i) - x) = 1` for every `1 <= i <= m/2`.
    pub fn is_irreducible(&self) -> bool {
        let p = self.full();
        let mut x_pow = 0b10u64; // x^(2^i) mod p, starting at i = 0
        for _ in 1..=self.degree / 2 {
            x_pow = mul_mod(x_pow, x_pow, p);
            if poly_gcd(p, x_pow ^ 0b10) != 1 {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{}", self.degree)?;
        for j in (0..self.degree).rev() {
            if self.coeff(j) {
                match j {
                    0 => write!(f, " + 1")?,
                    1 => write!(f, " + x")?,
                    _ => write!(f, " + x^{j}")?,
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`Gf2Poly::is_primitive`].
pub fn is_primitive(poly: &Gf2Poly) -> bool {
    poly.is_primitive()
}

#[inline]
fn deg(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `p` (`p != 0`).
fn rem(mut a: u64, p: u64) -> u64 {
    let dp = deg(p);
    while a != 0 && deg(a) >= dp {
        a ^= p << (deg(a) - dp);
    }
    a
}

/// Product of two residues modulo `p` (deg p <= 32).
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    rem(acc, p)
}

/// `x^e mod p`.
fn pow_x_mod(mut e: u64, p: u64) -> u64 {
    let mut base = rem(0b10, p);
    let mut acc = rem(1, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Distinct prime factors by trial division; fine for `n < 2^33`.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiplicative order of x modulo p by direct stepping.
    fn brute_order(p: &Gf2Poly) -> u64 {
        let full = p.full();
        let mut acc = rem(0b10, full);
        let mut k = 1;
        while acc != 1 {
            acc = mul_mod(acc, 0b10, full);
            k += 1;
            if k > p.max_period() + 1 {
                return 0;
            }
        }
        k
    }

    #[test]
    fn small_examples() {
        let p = Gf2Poly::from_exponents(&[3, 1, 0]).unwrap();
        assert_eq!(p.taps(), 0b011);
        assert!(p.is_primitive());
        assert_eq!(brute_order(&p), 7);

        let p = Gf2Poly::from_exponents(&[2, 0]).unwrap();
        assert!(!p.is_irreducible());
        assert!(!p.is_primitive());

        // irreducible, but x has order 5
        let p = Gf2Poly::from_exponents(&[4, 3, 2, 1, 0]).unwrap();
        assert!(p.is_irreducible());
        assert!(!p.is_primitive());
        assert_eq!(brute_order(&p), 5);
    }

    #[test]
    fn primitivity_matches_brute_force_order() {
        for m in 2..=10u32 {
            for taps in (1u32..(1 << m)).step_by(2) {
                let p = Gf2Poly::new(m, taps).unwrap();
                let brute = brute_order(&p) == p.max_period()
                    && {
                        // order 2^m-1 only certifies primitivity when p is irreducible
                        p.is_irreducible()
                    };
                assert_eq!(p.is_primitive(), brute, "{p}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Gf2Poly::new(1, 1), Err(Error::UnsupportedOrder(1)));
        assert_eq!(Gf2Poly::new(33, 1), Err(Error::UnsupportedOrder(33)));
        assert!(matches!(Gf2Poly::new(4, 0b0110), Err(Error::Config(_))));
        assert!(matches!(Gf2Poly::new(3, 0b1001), Err(Error::Config(_))));
    }

    #[test]
    fn factorizations() {
        assert_eq!(prime_factors(15), vec![3, 5]);
        assert_eq!(prime_factors(8191), vec![8191]);
        assert_eq!(prime_factors(16383), vec![3, 43, 127]);
        assert_eq!(prime_factors((1 << 32) - 1), vec![3, 5, 17, 257, 65537]);
    }

    #[test]
    fn display() {
        let p = Gf2Poly::from_exponents(&[4, 1, 0]).unwrap();
        assert_eq!(p.to_string(), "x^4 + x + 1");
    }
}
