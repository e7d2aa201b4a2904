//! Spectral simulation and verification of linear SPDEs
//! `dY = AY dt + B dL` driven by cylindrical Lévy noise.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod convolution;
pub mod diagnostics;
pub mod error;
pub mod fubini;
pub mod grid;
pub mod noise;
pub mod numerics;
pub mod rng;
pub mod scalar;
pub mod semigroup;

pub use convolution::{flow_apply, simulate, Admission, SolutionPath, StepForcing, Simulator};
pub use error::{Error, Result};
pub use fubini::{Regularity, TwoParameterIntegrand};
pub use grid::TimeGrid;
pub use noise::{sample_increments, ComponentLaw, CylindricalNoiseSpec, IncrementTable, NoiseKind};
pub use scalar::Real;
pub use semigroup::{CheckVerdict, Decision, SequenceRule, SpectralOperatorPair};

pub type Grid = TimeGrid<f64>;
pub type NoiseSpec = CylindricalNoiseSpec<f64>;
pub type Increments = IncrementTable<f64>;
pub type OperatorPair = SpectralOperatorPair<f64>;
pub type Path = SolutionPath<f64>;
pub type Integrand = TwoParameterIntegrand<f64>;
