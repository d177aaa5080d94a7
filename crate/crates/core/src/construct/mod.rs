//! Local relaxation patches and their assembly into a competitor `v`.

mod assemble;
mod cellina;
mod cover;
mod dump;
mod packing;
mod params;
mod patch;
mod template;

use thiserror::Error;

use crate::envelope::{EnvelopeError, Vector};
use crate::mesh::{EnergyError, MeshError};

pub use assemble::{assemble_v, AssembledV, Assembly, Ledger};
pub use cellina::{cellina_fill, CellinaFill, Homothet};
pub use cover::{vitali_cover, CoverReport, Laminate, PatchRecord, RegionRecord};
pub use dump::write_cover_csv;
pub use params::{delta_modulus, select_params, ConstructionParams};
pub use patch::{admissible_scale, build_patch_cone, build_patch_tube, Frame, PatchKind, PatchSpec};
pub use template::{Template, TemplatePiece, PieceTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Parameters from the closed-form bounds.
    Certified,
    /// `γ = 1/2` and the shortest tube that fits the cap budgets.
    #[default]
    Practical,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certified" => Ok(Mode::Certified),
            "practical" => Ok(Mode::Practical),
            _ => Err(format!("unknown mode `{s}` (expected `certified` or `practical`)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Certified => "certified",
            Mode::Practical => "practical",
        })
    }
}

/// Knobs for [`vitali_cover`] and [`assemble_v`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructOptions {
    pub epsilon: f64,
    pub mode: Mode,
    /// Stop packing a region once hulls cover this fraction of it.
    pub theta_cover: f64,
    /// Target residual fraction for the cap fill.
    pub rho: f64,
    pub max_rounds: usize,
    pub cellina_rounds: usize,
    /// Bound on lattice candidates examined per region.
    pub candidate_cap: usize,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            mode: Mode::Practical,
            theta_cover: 0.99,
            rho: 0.25,
            max_rounds: 12,
            cellina_rounds: 14,
            candidate_cap: 4_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("budget ε must be positive and finite, got {0}")]
    BadBudget(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("anchor ({}, {}) is not interior to its cell", .0[0], .0[1])]
    AnchorOnBoundary(Vector),
    #[error("no patch scale fits: {0}")]
    NoRoom(String),
    #[error("degenerate frame: {0}")]
    FrameDegenerate(String),
    #[error("cap slope {0} must be below 1")]
    SlopeTooLarge(f64),
    #[error("cap fill stopped with residual fraction {residual} above target {target}")]
    ResidualUnreachable { residual: f64, target: f64 },
    #[error("packing of region {region} stalled at coverage {covered} (target {target})")]
    CoverageStalled { region: usize, covered: f64, target: f64 },
    #[error("f = +∞ at gradient ({}, {}) on an uncovered set of measure {measure}", .gradient[0], .gradient[1])]
    ResidualUnchargeable { gradient: Vector, measure: f64 },
    #[error("F(v) = {f_v} exceeds F**(u) + ε = {bound}")]
    BudgetExceeded { f_v: f64, bound: f64, assembly: Box<Assembly> },
}

impl ConstructError {
    /// Envelope errors that signal a missing witness.
    pub fn is_witness_failure(&self) -> bool {
        matches!(
            self,
            ConstructError::Envelope(EnvelopeError::NoWitness { .. } | EnvelopeError::NoSimplex { .. })
        )
    }
}
