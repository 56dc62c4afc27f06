//! Numerics for nonlocal convolution operators `T u = A(xi) u + K_xi * u`.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] closed-form kernels and their analytic symbols,
//! * [`symbol`] characteristic functions, argument-principle root counting,
//! * [`flow`] spectral flow along operator paths and the Fredholm index,
//! * [`oracle`] brute-force grid discretisations and Weyl sequences,
//! * [`wavetrain`] small-amplitude periodic wave trains,
//! * [`manifold`] a numerical centre manifold for the same problem,
//! * [`ode`] and [`quadrature`] small numerical building blocks.

/// Version of this crate.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod error;
pub mod flow;
pub mod kernel;
pub mod linalg;
pub mod manifold;
pub mod nonlinearity;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod symbol;
pub mod wavetrain;

pub use error::{Error, Result};
pub use flow::{CrossingLedger, FlowOptions, OperatorPath};
pub use kernel::{BaseKernel, KernelModel, SampledField};
pub use linalg::{CMatrix, RMatrix};
pub use manifold::{BorderedSolve, CutoffNonlinearity, KernelBasisE0, VForm, WeightedGrid};
pub use nalgebra;
pub use nonlinearity::Nonlinearity;
pub use num_complex::Complex64;
pub use oracle::{GridOperator, IndexReport, InhomogeneousOperator, WeylTable};
pub use symbol::{CharacteristicFunction, Form, Rectangle, RootRecord};
pub use wavetrain::{ReducedData, WaveBranch, WaveProblem};
