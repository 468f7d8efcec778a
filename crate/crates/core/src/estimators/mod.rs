//! Joint position / clock / phase estimation.
//!
//! Pipeline: [`ils_initializer`] (IFFT delay peaks + Gauss-Newton
//! multilateration) → NCP simplex refinement → (CP only) local grid around
//! the NCP solution and a final simplex refinement of the coherent cost.

mod cost;
mod ils;
mod refine;
pub mod simplex;

pub use cost::{
    amplitude_hat, ml_cost_cp, ml_cost_ncp, phase_offset_hat, whiten, whitened_signature, CostContext, CostEvaluator, PhaseEstimate,
    WhitenedData,
};
pub use ils::{ils_initializer, ils_solve, IlsEstimate, DEFAULT_NFFT};
pub use refine::{estimate, estimate_cp_from, refine, CostKind, EstimateBundle, RefineOptions};

use crate::scalar::Cplx;

/// Processing mode: coherent across stripes (CP) or per-stripe phases (NCP).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Cp,
    Ncp,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Cp => "cp",
            Mode::Ncp => "ncp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initializer {
    Ils,
    UserSupplied,
}

/// Per-stripe gains: real amplitudes (CP) or complex gains (NCP).
#[derive(Debug, Clone, PartialEq)]
pub enum StripeGains<T> {
    Real(Vec<T>),
    Complex(Vec<Cplx<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult<T> {
    pub mode: Mode,
    pub position_2d: [T; 2],
    /// Seconds.
    pub clock_offset: T,
    /// Radians, principal value modulo π; CP only.
    pub phase_offset: Option<T>,
    pub gains: StripeGains<T>,
    pub final_cost: T,
    pub iterations: usize,
    pub initializer: Initializer,
    /// False when the simplex hit its iteration cap.
    pub converged: bool,
}
