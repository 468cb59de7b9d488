//! Tausworthe (Fibonacci LFSR) bit streams and the full-period driving
//! sequences built from them.

use std::sync::Arc;

use super::gf2::{gcd, Gf2Poly};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A fully specified LFSR generator: recursion, decimation offset and the
/// initial `m` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LfsrConfig {
    poly: Gf2Poly,
    offset: u64,
    /// Bit `j` holds `b_j` for `j < m`.
    seed: u32,
}

impl LfsrConfig {
    pub fn new(poly: Gf2Poly, offset: u64, seed: u32) -> Result<Self> {
        let m = poly.degree();
        let n = poly.max_period();
        if m < 32 && seed >> m != 0 {
            return Err(Error::Config(format!("seed {seed:#x} wider than {m} bits")));
        }
        if seed == 0 {
            return Err(Error::Config("all-zero seed is an absorbing state".into()));
        }
        if offset == 0 {
            return Err(Error::Config("offset must be positive".into()));
        }
        if gcd(offset, n) != 1 {
            return Err(Error::Config(format!(
                "offset {offset} is not coprime with 2^{m}-1 = {n}"
            )));
        }
        Ok(Self { poly, offset, seed })
    }

    /// Seed from explicit initial bits `b_0 .. b_{m-1}`.
    pub fn with_seed_bits(poly: Gf2Poly, offset: u64, bits: &[bool]) -> Result<Self> {
        if bits.len() != poly.degree() as usize {
            return Err(Error::DimensionMismatch {
                expected: poly.degree() as usize,
                got: bits.len(),
            });
        }
        let seed = bits
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &b)| acc | ((b as u32) << j));
        Self::new(poly, offset, seed)
    }

    /// Default seed `(1, 0, ..., 0)`.
    pub fn with_default_seed(poly: Gf2Poly, offset: u64) -> Result<Self> {
        Self::new(poly, offset, 1)
    }

    #[inline]
    pub fn poly(&self) -> Gf2Poly {
        self.poly
    }
    #[inline]
    pub fn offset(&self) -> u64 {
        self.offset
    }
    #[inline]
    pub fn seed(&self) -> u32 {
        self.seed
    }
    #[inline]
    pub fn order(&self) -> u32 {
        self.poly.degree()
    }
    #[inline]
    pub fn period(&self) -> u64 {
        self.poly.max_period()
    }
}

/// Bits `b_0 .. b_{count-1}` of the recursion
/// `b_i = sum_j a_j b_{i-m+j} (mod 2)`.
pub fn lfsr_bitstream(config: &LfsrConfig, count: usize) -> Vec<u8> {
    let m = config.order() as usize;
    let poly = config.poly();
    let mut bits = Vec::with_capacity(count.max(m));
    bits.extend((0..m).map(|j| ((config.seed() >> j) & 1) as u8));
    for i in m..count {
        let mut b = 0u8;
        for j in 0..m {
            if poly.coeff(j as u32) {
                b ^= bits[i - m + j];
            }
        }
        bits.push(b);
    }
    bits.truncate(count);
    bits
}

/// Sliding `m`-bit windows `W(p) = (b_p, ..., b_{p+m-1})` for one period,
/// with `b_p` in the most significant position.
fn windows(config: &LfsrConfig) -> Vec<u32> {
    let m = config.order();
    let n = config.period() as usize;
    let poly = config.poly();
    let mask: u64 = (1u64 << m) - 1;
    // window bit (m-1-j) holds b_{p+j}; the feedback picks a_j from there
    let fb = (0..m)
        .filter(|&j| poly.coeff(j))
        .fold(0u64, |acc, j| acc | (1 << (m - 1 - j)));
    let mut w = (0..m).fold(0u64, |acc, j| {
        acc | ((((config.seed() >> j) & 1) as u64) << (m - 1 - j))
    });
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(w as u32);
        let next = ((w & fb).count_ones() & 1) as u64;
        w = ((w << 1) & mask) | next;
    }
    out
}

/// One full period of `v_i = sum_j b_{s i + j} 2^{-j-1}`, stored as the
/// integer numerators `k_i = v_i 2^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CudSequence {
    numerators: Arc<[u32]>,
    config: LfsrConfig,
}

impl CudSequence {
    #[inline]
    pub fn len(&self) -> usize {
        self.numerators.len()
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }
    #[inline]
    pub fn order(&self) -> u32 {
        self.config.order()
    }
    #[inline]
    pub fn config(&self) -> &LfsrConfig {
        &self.config
    }
    /// `v_i 2^m`, an integer in `1 ..= 2^m - 1`.
    #[inline]
    pub fn numerator(&self, i: usize) -> u32 {
        self.numerators[i]
    }
    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }
    /// `v_i` in `(0, 1)`.
    #[inline]
    pub fn value<T: Real>(&self, i: usize) -> T {
        T::lit(self.numerators[i] as f64 / (1u64 << self.order()) as f64)
    }
    pub fn values<T: Real>(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// Generates the full-period sequence for a primitive-polynomial config.
pub fn generate_cud(config: &LfsrConfig) -> Result<CudSequence> {
    let poly = config.poly();
    if !poly.is_primitive() {
        return Err(Error::Config(format!("{poly} is not primitive")));
    }
    let n = config.period();
    if gcd(config.offset(), n) != 1 {
        return Err(Error::Config(format!(
            "offset {} is not coprime with {n}",
            config.offset()
        )));
    }
    if config.order() > 28 {
        return Err(Error::Size(format!(
            "a full period for m = {} does not fit in memory",
            config.order()
        )));
    }
    let w = windows(config);
    let s = config.offset() % n;
    let mut pos = 0u64;
    let numerators = (0..n)
        .map(|_| {
            let k = w[pos as usize];
            pos = (pos + s) % n;
            k
        })
        .collect::<Vec<_>>();
    Ok(CudSequence {
        numerators: numerators.into(),
        config: *config,
    })
}

/// Equidistribution profile of the generator: entry `l-1` is the largest
/// `k <= floor(m/l)` such that the leading `l` bits of `k` successive
/// outputs take every value in `{0,1}^{kl}` equally often over a period
/// (counting the all-zero state). A generator is maximally equidistributed
/// when every entry equals `floor(m/l)`.
pub fn equidistribution_profile(config: &LfsrConfig) -> Vec<u32> {
    let m = config.order() as usize;
    let poly = config.poly();
    let n = config.period() as usize;
    let s = (config.offset() % config.period()) as usize;
    let needed = (s * (m - 1) + m).min(n);
    // b_i as a linear form in the seed bits
    let mut forms: Vec<u32> = (0..m).map(|j| 1u32 << j).collect();
    for i in m..needed {
        let f = (0..m)
            .filter(|&j| poly.coeff(j as u32))
            .fold(0u32, |acc, j| acc ^ forms[i - m + j]);
        forms.push(f);
    }
    let form = |i: usize| forms[i % n];
    (1..=m)
        .map(|l| {
            let kmax = m / l;
            let mut best = 0;
            for k in 1..=kmax {
                let rows: Vec<u32> = (0..k)
                    .flat_map(|i| (0..l).map(move |j| (i, j)))
                    .map(|(i, j)| form(s * i + j))
                    .collect();
                if gf2_rank(rows) == k * l {
                    best = k as u32;
                } else {
                    break;
                }
            }
            best
        })
        .collect()
}

/// Sum over resolutions of the shortfall from maximal equidistribution.
pub fn equidistribution_defect(config: &LfsrConfig) -> u32 {
    let m = config.order();
    equidistribution_profile(config)
        .iter()
        .enumerate()
        .map(|(l, &k)| m / (l as u32 + 1) - k)
        .sum()
}

fn gf2_rank(mut rows: Vec<u32>) -> usize {
    let mut rank = 0;
    for bit in 0..32 {
        let pivot = 1u32 << bit;
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r] & pivot != 0) {
            rows.swap(rank, p);
            let pr = rows[rank];
            for r in rows.iter_mut().skip(rank + 1) {
                if *r & pivot != 0 {
                    *r ^= pr;
                }
            }
            rank += 1;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(exps: &[u32], s: u64, seed: u32) -> LfsrConfig {
        LfsrConfig::new(Gf2Poly::from_exponents(exps).unwrap(), s, seed).unwrap()
    }

    /// Smallest p > 0 with bits[i + p] == bits[i] for all i in range.
    fn brute_period(bits: &[u8], max: usize) -> usize {
        (1..=max)
            .find(|&p| (0..bits.len() - p).all(|i| bits[i] == bits[i + p]))
            .unwrap()
    }

    #[test]
    fn order3_stream() {
        let c = cfg(&[3, 1, 0], 1, 0b001);
        let bits = lfsr_bitstream(&c, 21);
        // b_i = b_{i-3} + b_{i-2}, from (1,0,0)
        assert_eq!(
            &bits[..7],
            &[1, 0, 0, 1, 0, 1, 1],
            "hand-derived first period"
        );
        assert_eq!(brute_period(&bits, 10), 7);
    }

    #[test]
    fn order4_windows_enumerate_nonzero_states() {
        let c = cfg(&[4, 1, 0], 1, 0b0001);
        let bits = lfsr_bitstream(&c, 15 + 4);
        assert_eq!(brute_period(&bits, 15), 15);
        let mut seen = std::collections::HashSet::new();
        for p in 0..15 {
            let w: Vec<u8> = bits[p..p + 4].to_vec();
            assert!(w.iter().any(|&b| b == 1));
            assert!(seen.insert(w));
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn all_ones_seed_never_hits_zero_state() {
        let c = cfg(&[5, 2, 0], 1, 0b11111);
        let bits = lfsr_bitstream(&c, 200);
        assert!(bits.windows(5).all(|w| w.iter().any(|&b| b == 1)));
    }

    #[test]
    fn order3_values() {
        let c = cfg(&[3, 1, 0], 1, 0b001);
        let seq = generate_cud(&c).unwrap();
        // windows of 1,0,0,1,0,1,1,1,0,0,...
        assert_eq!(seq.numerators(), &[4, 1, 2, 5, 3, 7, 6]);
        let v: Vec<f64> = seq.values();
        assert_eq!(v[0], 0.5);
        let mut sorted = seq.numerators().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=7).collect::<Vec<_>>());
    }

    #[test]
    fn numerators_match_bitstream_definition() {
        let c = cfg(&[6, 1, 0], 5, 0b100101);
        let seq = generate_cud(&c).unwrap();
        let n = 63;
        let bits = lfsr_bitstream(&c, 5 * n + 6);
        for i in 0..n {
            let k = (0..6).fold(0u32, |acc, j| (acc << 1) | bits[5 * i + j] as u32);
            assert_eq!(seq.numerator(i), k, "i = {i}");
        }
    }

    #[test]
    fn config_validation() {
        let p = Gf2Poly::from_exponents(&[4, 1, 0]).unwrap();
        assert!(matches!(LfsrConfig::new(p, 1, 0), Err(Error::Config(_))));
        assert!(matches!(LfsrConfig::new(p, 3, 1), Err(Error::Config(_))));
        assert!(matches!(LfsrConfig::new(p, 5, 1), Err(Error::Config(_))));
        assert!(LfsrConfig::new(p, 7, 1).is_ok());
        let q = Gf2Poly::from_exponents(&[4, 3, 2, 1, 0]).unwrap();
        let c = LfsrConfig::new(q, 1, 1).unwrap();
        assert!(matches!(generate_cud(&c), Err(Error::Config(_))));
    }

    #[test]
    fn rank_profile_of_unit_offset() {
        // s = 1: successive outputs share m-1 bits, so pairs cannot be
        // equidistributed at resolution 1 beyond k = m.
        let c = cfg(&[8, 4, 3, 2, 0], 1, 1);
        let prof = equidistribution_profile(&c);
        assert_eq!(prof[0], 8);
        // l = 4, k = 2 needs 8 independent bits but only 5 are distinct
        assert_eq!(prof[3], 1);
    }
}
