//! Diffusion operators with unitary coefficients and their spectra.
//!
//! For a reversible walk `ν` with base measure `w` and a representation `π`,
//! `(Dξ)_x = Σ_y ν(x→y) π(x,y) ξ_y` is self-adjoint for
//! `⟨ξ, η⟩ = Σ_x w(x)⟨ξ_x, η_x⟩`. Spectra are computed on the conjugate
//! `S = W^{1/2} D W^{-1/2}`, which is Hermitian in the standard inner product,
//! one connected component of the walk's support at a time.

mod eigen;
mod field;
mod operator;
mod report;
mod representation;

use thiserror::Error;

pub use eigen::{ComponentEigen, Eigen, Solver};
pub use field::Field;
pub use operator::{diffusion, energy, energy_n, gradient_energy, DiffusionOperator};
pub use report::{
    c2_criterion, dirichlet_report, poincare_report, spectrum, spectrum_with, C2Report, DirichletReport, PoincareEntry,
    PoincareReport, RepFamily, RepOutcome, SpectrumReport,
};
pub use representation::{
    cycle_residual, gauge_representation, random_gauge_representation, random_unitary, raw_representation,
    regular_representation, trivial_representation, Blocks, CMatrix, Representation, UNITARY_TOL,
};

use crate::walks::WalkError;

/// Default clustering tolerance around eigenvalue 1.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Components up to this many coordinates are solved densely.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("block at {at} is not unitary (residual {residual:e})")]
    NotUnitary { at: String, residual: f64 },
    #[error("representation has no block for ({x}, {y})")]
    MissingEdgeBlock { x: usize, y: usize },
    #[error("edge ({x}, {y}) is not a valid graphing edge")]
    InvalidEdge { x: usize, y: usize },
    #[error("blocks on ({x}, {y}) and ({y}, {x}) are not adjoint (residual {residual:e})")]
    AdjointMismatch { x: usize, y: usize, residual: f64 },
    #[error("cycle through ({x}, {y}) has holonomy residual {residual:e}")]
    CycleInconsistency { residual: f64, x: usize, y: usize },
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("eigensolver did not converge ({0})")]
    EigenFailure(String),
    #[error("spectrum is degenerate: no eigenvalue away from 1")]
    DegenerateSpectrum,
    #[error("no spectral gap: κ = {kappa}")]
    NoGap { kappa: f64 },
    #[error("Poincaré index must be at least 2, got {0}")]
    BadIndex(usize),
}

/// Solver knobs shared by every spectral routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Eigenvalues within `tol` of 1 count as fixed.
    pub tol: f64,
    /// Largest component (in coordinates) solved densely.
    pub dense_limit: usize,
    /// Residual tolerance of the iterative solver.
    pub iter_tol: f64,
    /// Seed for the iterative solver's start vectors.
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            dense_limit: DENSE_LIMIT,
            iter_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SpectralOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}
