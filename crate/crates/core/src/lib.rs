//! Random walks on finite measured equivalence relations: diffusion
//! operators with unitary coefficients, spectral gaps, Poincaré and
//! Dirichlet constants, Følner sets, and the weighted Garland/Żuk
//! criterion on 2-dimensional simplicial complexes.
//!
//! Every object here is a finite model. Spectral gaps and criterion
//! verdicts computed on them are evidence about the corresponding infinite
//! objects, never proofs.

pub mod ergodic;
pub mod garland;
pub mod models;
pub mod relation;
pub mod spectral;
pub mod walks;

pub use relation::{build_relation, validate_graphing, FiniteRelation, Graphing, GraphingReport, RelationError};
pub use spectral::{
    diffusion, spectrum, DiffusionOperator, Field, Representation, SpectralError, SpectralOptions, SpectrumReport,
};
pub use ergodic::{
    almost_fixed_from_set, boundary, concentration_report, folner_search, sweep_folner, ConcentrationReport, FolnerReport,
};
pub use garland::{build_complex, link, link_lambda1, step2_domination, triangle_walks, zuk_report, Complex2, Verdict, ZukReport};
pub use walks::{convolve, custom_walk, regular_walk, BaseMeasure, RandomWalk, WalkError};
