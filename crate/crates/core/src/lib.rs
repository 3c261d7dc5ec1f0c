//! Topology of generalized Sierpinski carpets, Baranski carpets and
//! Baranski sponges, decided from their digit sets.
//!
//! The entry point is [`classify`]: it decides connectedness, fragility,
//! cut points and local cut points, and whether the carpet is homeomorphic
//! to the standard Sierpinski carpet.

pub mod adjacency;
pub mod census;
pub mod classify;
pub mod error;
pub mod geometry;
pub mod intersections;
pub mod io;
pub mod metrics;
pub mod model;

pub use adjacency::{build_hata, compute_esets, intersects, Adjacency, EdgeLabel, ESets, HataGraph};
pub use classify::{classify, ClassificationReport, CutVerdict, Options, Pipeline, Verdict};
pub use error::{Error, Result};
pub use geometry::DEFAULT_CELL_CAP;
pub use intersections::Intersections;
pub use model::{Digit, DigitSet, ExactPoint, GridSpec, PointAddress, Rational, Word};
