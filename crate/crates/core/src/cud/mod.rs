//! Full-period LFSR driving sequences and uniformity measures.

mod discrepancy;
mod gf2;
mod lfsr;
mod table;

pub use discrepancy::{
    overlapping_pairs, star_discrepancy, star_discrepancy_1d, star_discrepancy_2d, PointSet,
    MAX_POINTS_2D,
};
pub use gf2::{gcd, is_primitive, prime_factors, Gf2Poly, MAX_ORDER, MIN_ORDER};
pub use lfsr::{
    equidistribution_defect, equidistribution_profile, generate_cud, lfsr_bitstream,
    CudSequence, LfsrConfig,
};
pub use table::{builtin, builtin_config, table_listing, TableEntry, BUILTIN_TABLE};
