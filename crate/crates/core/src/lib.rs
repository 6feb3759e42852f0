//! Anti-integrable (AI) limit machinery for the 3D quadratic diffeomorphism
//!
//! ```text
//! L(x, y, z) = (δz + α + τx − σy + ax² + bxy + cy², x, y)
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. It covers
//!
//! - the map, its inverse and its difference-equation forms ([`map`]),
//! - the AI-limit correspondence, symbol sequences and AI states ([`ai_limit`], [`symbols`]),
//! - contraction regions in the `(r, c)` plane, numerical and analytical ([`regions`]),
//! - pseudo-arclength continuation of periodic AI states ([`continuation`]),
//! - attractor classification scans, Lyapunov exponents and close returns ([`scan`]).
//!
//! Grid sweeps here are sequential; the `ailimit` companion crate runs them in
//! parallel and owns all file formats.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ai_limit;
pub mod continuation;
pub mod cubic;
mod error;
pub mod linalg;
pub mod map;
mod math;
pub mod regions;
pub mod scan;
pub mod symbols;

pub use error::{Error, Result};

pub use ai_limit::{AIState, Direction, IntervalB};
pub use continuation::{Branch, BranchPoint, ContinuationConfig, PeriodicState, Termination};
pub use map::{ConicClass, MapParams, RescaledParams, State3};
pub use regions::{ParamGrid, RegionMask};
pub use scan::{ScanCell, ScanClass, ScanConfig};
pub use symbols::{Symbol, SymbolSequence};
