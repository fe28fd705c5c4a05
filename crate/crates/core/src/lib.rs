//! Continuous, discrete and interpolated hardcore models on regular trees
//! and graphs.

pub mod acceptance;
pub mod error;
pub mod graph;
pub mod grid;
pub mod hamiltonian;
pub mod measure;
pub mod recursion;
pub mod rewire;
pub mod shooting;
pub mod volume;

pub use error::{Error, Result};
pub use grid::{Grid, GridDistribution, Quadrature};
pub use measure::{MeasureKind, SpinMeasure};
