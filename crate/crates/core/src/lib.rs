//! Monte Carlo sampling of ideal rings (closed equilateral random polygons)
//! and open chains, closed-form shape averages to check them against, and
//! determinant-based knot analysis including knot length from closure
//! spectra.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod knot;
pub mod polygon_io;
pub mod sampler;
pub mod shape_stats;

pub use error::{Error, Result};
pub use geometry::{OpenChain, Ring, Subsegment, Vec3};
pub use sampler::{MixPolicy, RngStream};
pub use shape_stats::{ShapeProfile, StreamingMoments};
