use thiserror::Error;

/// Failure modes of the numerical routines.
///
/// Every variant carries enough context to tell which precondition or
/// convergence check was violated.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol evaluated outside its strip of analyticity: |Re nu| = {re_abs} >= {half_width}")]
    StripViolation { re_abs: f64, half_width: f64 },

    #[error("contour passes too close to a root (min |d| on contour = {min_abs:.3e})")]
    ContourTooCloseToRoot { min_abs: f64 },

    #[error("winding number is not an integer: computed {value}")]
    NonIntegerWinding { value: f64 },

    #[error("symbol tail is not dominated for |l| >= {ell_max}")]
    TailNotDominated { ell_max: f64 },

    #[error("path endpoint at rho = {rho} is not hyperbolic (min |d(il)| = {min_abs:.3e})")]
    EndpointNotHyperbolic { rho: f64, min_abs: f64 },

    #[error("crossings are not isolated near rho = {rho}: {reason}")]
    CrossingsNotIsolated { rho: f64, reason: String },

    #[error("root continuation collided with another root at rho = {rho}")]
    RootCollision { rho: f64 },

    #[error("continued root left the strip at rho = {rho} (Re nu = {re})")]
    LeftStrip { rho: f64, re: f64 },

    #[error("grid spacing {spacing} does not resolve the kernel (need < {limit})")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("no clean spectral gap in the singular values near the threshold {threshold:.3e}")]
    NoSpectralGap { threshold: f64 },

    #[error("principal part is invertible everywhere (min singular value {min_sigma:.3e})")]
    PrincipalPartInvertible { min_sigma: f64 },

    #[error("both limiting operators are hyperbolic")]
    LimitsHyperbolic,

    #[error("no root of the characteristic function on the imaginary axis in the search interval")]
    NoRoot,

    #[error("resonance: d(i j omega*) vanishes for j = {mode}")]
    ResonanceDetected { mode: usize },

    #[error("more than one imaginary-axis root with positive imaginary part: {count}")]
    MultipleAxisRoots { count: usize },

    #[error("imaginary-axis root is not simple (|d'| = {derivative:.3e})")]
    NonSimpleRoot { derivative: f64 },

    #[error("kernel dimension of the linearization is numerically ambiguous (singular values {smallest:.3e}, {next:.3e})")]
    NumericalRankAmbiguous { smallest: f64, next: f64 },

    #[error("frequency derivative alpha vanishes ({alpha:.3e})")]
    AlphaVanishes { alpha: f64 },

    #[error("Newton iteration diverged: {reason}")]
    NewtonDiverged { reason: String },

    #[error("fixed-point iteration is not contracting (ratio {ratio:.3})")]
    NotContracting { ratio: f64 },

    #[error("bordered linear system is singular or inaccurate (residual {residual:.3e})")]
    BorderedSingular { residual: f64 },

    #[error("pointwise coordinate inversion failed at grid point {index}")]
    InversionFailed { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// The variant name, used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::StripViolation { .. } => "StripViolation",
            Error::ContourTooCloseToRoot { .. } => "ContourTooCloseToRoot",
            Error::NonIntegerWinding { .. } => "NonIntegerWinding",
            Error::TailNotDominated { .. } => "TailNotDominated",
            Error::EndpointNotHyperbolic { .. } => "EndpointNotHyperbolic",
            Error::CrossingsNotIsolated { .. } => "CrossingsNotIsolated",
            Error::RootCollision { .. } => "RootCollision",
            Error::LeftStrip { .. } => "LeftStrip",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NoSpectralGap { .. } => "NoSpectralGap",
            Error::PrincipalPartInvertible { .. } => "PrincipalPartInvertible",
            Error::LimitsHyperbolic => "LimitsHyperbolic",
            Error::NoRoot => "NoRoot",
            Error::ResonanceDetected { .. } => "ResonanceDetected",
            Error::MultipleAxisRoots { .. } => "MultipleAxisRoots",
            Error::NonSimpleRoot { .. } => "NonSimpleRoot",
            Error::NumericalRankAmbiguous { .. } => "NumericalRankAmbiguous",
            Error::AlphaVanishes { .. } => "AlphaVanishes",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::NotContracting { .. } => "NotContracting",
            Error::BorderedSingular { .. } => "BorderedSingular",
            Error::InversionFailed { .. } => "InversionFailed",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
