//! Built-in generator table: one primitive polynomial and decimation offset
//! per order `m` in `3..=32`.
//!
//! Each entry was selected by `examples/table_search.rs`: among low-weight
//! primitive polynomials and offsets `s >= m` coprime with `2^m - 1`, the
//! first (smallest `s`) whose outputs are maximally equidistributed at every
//! bit resolution.

use super::gf2::Gf2Poly;
use super::lfsr::LfsrConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub order: u32,
    /// Coefficients `a_0 .. a_{m-1}` of the characteristic polynomial.
    pub taps: u32,
    pub offset: u64,
}

impl TableEntry {
    pub fn poly(&self) -> Gf2Poly {
        Gf2Poly::new(self.order, self.taps).expect("table entries are well formed")
    }
}

#[rustfmt::skip]
pub const BUILTIN_TABLE: &[TableEntry] = &[
    TableEntry { order: 3, taps: 0x3, offset: 3 },
    TableEntry { order: 4, taps: 0x3, offset: 7 },
    TableEntry { order: 5, taps: 0x5, offset: 5 },
    TableEntry { order: 6, taps: 0x3, offset: 8 },
    TableEntry { order: 7, taps: 0xf, offset: 7 },
    TableEntry { order: 8, taps: 0x63, offset: 11 },
    TableEntry { order: 9, taps: 0x33, offset: 9 },
    TableEntry { order: 10, taps: 0x123, offset: 10 },
    TableEntry { order: 11, taps: 0x47, offset: 11 },
    TableEntry { order: 12, taps: 0x107, offset: 23 },
    TableEntry { order: 13, taps: 0x65, offset: 13 },
    TableEntry { order: 14, taps: 0x40b, offset: 14 },
    TableEntry { order: 15, taps: 0xa5, offset: 15 },
    TableEntry { order: 16, taps: 0x225, offset: 19 },
    TableEntry { order: 17, taps: 0x443, offset: 17 },
    TableEntry { order: 18, taps: 0x4a1, offset: 34 },
    TableEntry { order: 19, taps: 0x283, offset: 19 },
    TableEntry { order: 20, taps: 0x891, offset: 43 },
    TableEntry { order: 21, taps: 0xc21, offset: 22 },
    TableEntry { order: 22, taps: 0x903, offset: 26 },
    TableEntry { order: 23, taps: 0xa03, offset: 23 },
    TableEntry { order: 24, taps: 0xc05, offset: 29 },
    TableEntry { order: 25, taps: 0x889, offset: 28 },
    TableEntry { order: 26, taps: 0x909, offset: 28 },
    TableEntry { order: 27, taps: 0x289, offset: 31 },
    TableEntry { order: 28, taps: 0x40b, offset: 79 },
    TableEntry { order: 29, taps: 0xa05, offset: 32 },
    TableEntry { order: 30, taps: 0x489, offset: 152 },
    TableEntry { order: 31, taps: 0x223, offset: 37 },
    TableEntry { order: 32, taps: 0x229, offset: 52 },
];

pub fn builtin(order: u32) -> Result<TableEntry> {
    BUILTIN_TABLE
        .iter()
        .copied()
        .find(|e| e.order == order)
        .ok_or(Error::UnsupportedOrder(order))
}

/// Table generator for order `m` with the default seed, optionally with a
/// different offset.
pub fn builtin_config(order: u32, offset: Option<u64>) -> Result<LfsrConfig> {
    let e = builtin(order)?;
    LfsrConfig::with_default_seed(e.poly(), offset.unwrap_or(e.offset))
}

/// Plain-text listing, one `m, taps, s` line per order.
pub fn table_listing() -> String {
    let mut out = String::from("# m, coefficient mask a_0..a_{m-1} (hex), offset s\n");
    for e in BUILTIN_TABLE {
        out.push_str(&format!("{}, {:#x}, {}\n", e.order, e.taps, e.offset));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cud::{equidistribution_defect, gcd};

    #[test]
    fn entries_are_valid() {
        let orders: Vec<u32> = BUILTIN_TABLE.iter().map(|e| e.order).collect();
        assert_eq!(orders, (3..=32).collect::<Vec<_>>());
        for e in BUILTIN_TABLE {
            let p = e.poly();
            assert!(p.is_primitive(), "{p}");
            assert_eq!(gcd(e.offset, p.max_period()), 1);
            assert!(e.offset >= e.order as u64);
        }
    }

    #[test]
    fn entries_are_maximally_equidistributed() {
        for e in BUILTIN_TABLE.iter().filter(|e| e.order <= 20) {
            let c = builtin_config(e.order, None).unwrap();
            assert_eq!(equidistribution_defect(&c), 0, "m = {}", e.order);
        }
    }

    #[test]
    fn out_of_range() {
        assert_eq!(builtin(2), Err(Error::UnsupportedOrder(2)));
        assert_eq!(builtin(33), Err(Error::UnsupportedOrder(33)));
    }

    #[test]
    fn listing_format() {
        let l = table_listing();
        assert_eq!(l.lines().count(), 31);
        assert!(l.contains("\n10, 0x123, 10\n"));
    }
}
