//! Exact cokernel statistics for random matrices over truncated p-adic rings.
//!
//! The crate provides, at desk scale and in exact arithmetic:
//!
//! * the finite chain rings `Z/p^(N+1)` and `R = (Z/p^(N+1))[t]/(P(t))` for a
//!   monic `P` irreducible mod `p` ([`ring`], [`params`]);
//! * Smith normal form over both rings and cokernel types as partitions
//!   ([`snf`], [`partition`]);
//! * automorphism-group orders of finite modules, both a closed product
//!   formula and an enumeration oracle ([`autgroup`]);
//! * closed-form lift-count and probability values in exact rationals
//!   ([`formulas`]);
//! * budget-guarded exhaustive enumeration of matrix fibers and full matrix
//!   spaces ([`counting`]);
//! * named verification experiments that compare enumerated counts against
//!   the closed forms ([`experiments`]).

pub mod autgroup;
pub mod counting;
pub mod error;
pub mod experiments;
pub mod formulas;
pub mod fp_poly;
pub mod matrix;
pub mod params;
pub mod partition;
pub mod report;
pub mod ring;
pub mod snf;

pub use error::{Error, Result};
pub use matrix::{mat_mul, Matrix, ParsedMatrix};
pub use params::RingParams;
pub use partition::ModuleType;
pub use ring::{invert_unit, ring_add, ring_mul, valuation, ExtRing, RElem, Ring, ZmodRing};
pub use snf::{abelianize, cokernel_type, companion_cokernel, smith_normal_form, SnfResult};
