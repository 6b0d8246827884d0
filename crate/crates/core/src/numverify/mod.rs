//! Numerical verification at concrete ε: continuation of points on `C_ε`,
//! the explicit differentials `ω_f`, `ω_E`, `ω̃_E`, `ω′_Γ`, their cycle
//! integrals, and comparison with the tropical asymptotics.

pub mod crossing;
pub mod cycles;
pub mod eval;
pub mod forms;
pub mod lift;
pub mod quad;
pub mod report;
pub mod solve;
pub mod track;

use thiserror::Error;

use crate::periods::PeriodsError;
use crate::plpoly::PlError;
use crate::puiseux::PuiseuxError;
use crate::tropcurve::TropError;

pub use cycles::{alpha_cycle, beta_path, cylinder_path, integrate_path, CurveContext};
pub use eval::{Pt, SPoly};
pub use forms::{DifferentialSpec, FormKind};
pub use lift::{lift_point, truncation_root, LiftResult};
pub use report::{
    cylinder_table, period_matrix_numeric, residue_table, theorem_report, CylinderRecord, IntegralRecord,
    IntegralReport, ResidueRecord, TheoremRecord, TheoremReport,
};
pub use solve::{shadow_offset, y_roots, SHADOW_BAND};
pub use track::{Piece, TrackedPath};

#[derive(Debug, Error)]
pub enum NumError {
    #[error("invalid context: {0}")]
    Context(String),
    #[error("tracking failed near tropical point ({:.4}, {:.4}): {msg}", at.0, at.1)]
    Tracking { at: (f64, f64), msg: String },
    #[error("quadrature failed on segment {segment}: {msg}")]
    Quadrature { segment: usize, msg: String },
    #[error("leading coefficient a_0 vanishes at x = {0}; perturb x")]
    LeadingVanishes(String),
    #[error("differential: {0}")]
    Form(String),
    #[error("sphere crossing at vertex {vertex}: {msg}")]
    Crossing { vertex: usize, msg: String },
    #[error("seed: {0}")]
    Seed(String),
    #[error("alpha matrix is singular")]
    Singular,
    #[error("good tropicalization fails: {0}")]
    Gate(String),
    #[error("lift: {0}")]
    Lift(String),
    #[error(transparent)]
    Periods(#[from] PeriodsError),
    #[error(transparent)]
    Trop(#[from] TropError),
    #[error(transparent)]
    Pl(#[from] PlError),
    #[error(transparent)]
    Puiseux(#[from] PuiseuxError),
}

/// Continuation step control in units of the driver `ζ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub initial: f64,
    pub max: f64,
    pub shrink: f64,
    pub min: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial: 0.05, max: 0.25, shrink: 0.5, min: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonContext {
    pub eps: f64,
    /// `ẽ = e^(−1/ε)`
    pub et: f64,
    pub quad_tol: f64,
    pub step: StepControl,
}

impl EpsilonContext {
    pub fn new(eps: f64) -> Result<Self, NumError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(NumError::Context(format!("ε = {eps} is not in (0, 1)")));
        }
        Ok(Self { eps, et: (-1.0 / eps).exp(), quad_tol: 1e-8, step: StepControl::default() })
    }
}

/// Default ε grid.
pub const DEFAULT_EPS: [f64; 3] = [0.2, 0.1, 0.05];
