//! Direct and inverse spectral problems for Sturm–Liouville operators whose
//! potential is the distributional derivative of a function `σ ∈ L₂(0,1)`.
//!
//! The inverse solver follows the Gelfand–Levitan–Marchenko route: spectral
//! data are turned into the transmutation kernel `F`, the integral equation
//! for the triangular kernel `K` is solved row by row, and `σ` is read off
//! the diagonal.
//!
//! ```
//! use sturm_glm::{direct, glm, BoundaryKind, GridFunction};
//!
//! let sigma = GridFunction::from_fn(64, |x| 2.0 * x)?;
//! let data = direct::direct_spectral_data(&sigma, 16, BoundaryKind::DD.into())?;
//! let result = glm::reconstruct(&data, 64)?;
//! assert!(result.positivity_margin > 0.0);
//! # Ok::<(), sturm_glm::Error>(())
//! ```

pub mod analysis;
pub mod direct;
pub mod error;
pub mod glm;
pub mod grid;
pub mod io;
mod linalg;
pub mod spectra;

pub use analysis::{RieszBasis, RoundTripReport, StabilityRow};
pub use direct::{CharParams, ShootResult, Solver};
pub use error::{Category, Error, Result};
pub use glm::{reconstruct, KernelF, PhiTable, ReconstructionResult, TriangularKernel};
pub use grid::GridFunction;
pub use spectra::{
    remainders, shift_spectrum, synthesize_data, validate_spectral_data, BoundaryKind,
    SpectralData, ValidationReport, Violation,
};
