//! Searches for (polynomial, offset) pairs with the smallest equidistribution
//! defect, the procedure used to build the built-in LFSR table.
//!
//! Usage: `cargo run --release --example table_search -- <m_lo> <m_hi> [span]`

use lqmc::cud::{equidistribution_defect, gcd, Gf2Poly, LfsrConfig};

/// Primitive trinomials, then low-tap pentanomials, up to `limit` candidates.
fn candidates(m: u32, limit: usize) -> Vec<Gf2Poly> {
    let mut out = Vec::new();
    for q in 1..m {
        let p = Gf2Poly::new(m, 1 | (1 << q)).unwrap();
        if p.is_primitive() {
            out.push(p);
        }
    }
    let top = m.min(12);
    for a in 1..top {
        for b in a + 1..top {
            for c in b + 1..top {
                if out.len() > limit {
                    return out;
                }
                let p = Gf2Poly::new(m, 1 | (1 << a) | (1 << b) | (1 << c)).unwrap();
                if p.is_primitive() {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    if args.len() < 2 {
        eprintln!("usage: table_search <m_lo> <m_hi> [span]");
        std::process::exit(2);
    }
    let span = args.get(2).copied().unwrap_or(600);
    for m in args[0] as u32..=args[1] as u32 {
        let n = (1u64 << m) - 1;
        let mut best: Option<(u32, u64, Gf2Poly)> = None;
        for p in candidates(m, 40) {
            for s in (m as u64..m as u64 + span).filter(|&s| gcd(s, n) == 1) {
                let d = equidistribution_defect(&LfsrConfig::with_default_seed(p, s).unwrap());
                if best.is_none_or(|(bd, bs, _)| (d, s) < (bd, bs)) {
                    best = Some((d, s, p));
                }
            }
        }
        let (d, s, p) = best.expect("at least one primitive candidate");
        println!("m={m} taps={:#x} s={s} defect={d} poly={p}", p.taps());
    }
}
