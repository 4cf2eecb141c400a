//! Protocol pipelines: construction, execution, correction synthesis and
//! checks against the bundled transcriptions of printed states and tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cavity::CavityError;
use crate::notation::NotationError;
use crate::qreg::{PauliOp, QregError, SubsystemKind};

mod correction;
mod equations;
mod exec;
mod spec;
mod tables;

pub use correction::{
    correction_fidelity, synthesize_correction, synthesize_universal_correction,
    universal_fidelity, CORRECTION_FLOOR, CORRECTION_TOL,
};
pub use equations::{
    bundled_equations, check_equation, EquationCheckpoint, EquationReport, StateEquation,
    EQUATION_TOL,
};
pub use exec::{run, run_with, BranchRecord, Checkpoint, Execution, RunOptions, RunResult};
pub use spec::{
    build, build_cpt_entangled, build_ct_entangled, build_ct_entangled_extended,
    build_ct_superposition, control_labels, Payload, PayloadForm, PhaseSource, Preparation,
    ProtocolSpec, Stage,
};
pub use tables::{
    bundled_errata, bundled_table, bundled_table_ids, verify_table, ColumnRole, Errata,
    ErrataEntry, ResultTable, RowReport, TableRow, TableVerificationReport, UncoveredBranch,
};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("control count must be at least 1, got {0}")]
    TooFewControls(usize),
    #[error("{family} takes 1 or 2 controls unless built in extended mode, got {got}")]
    UnsupportedControls { family: Family, got: usize },
    #[error("payload is not normalized: |alpha|^2 + |beta|^2 = {0}")]
    PayloadNotNormalized(f64),
    #[error("stage {stage} references unknown subsystem `{label}`")]
    UnknownLabel { stage: usize, label: String },
    #[error("stage {stage}: `{label}` is {actual:?}, expected {expected:?}")]
    KindMismatch {
        stage: usize,
        label: String,
        expected: SubsystemKind,
        actual: SubsystemKind,
    },
    #[error(
        "wave plate on `{photon}` is {found} but the photon crossed {controls} control(s), which calls for {expected}"
    )]
    ParityViolation {
        photon: String,
        controls: usize,
        found: crate::optics::WavePlateKind,
        expected: crate::optics::WavePlateKind,
    },
    #[error("the pipeline must end in exactly one Measure stage")]
    MeasureStage,
    #[error("invalid subsystem layout: {0}")]
    Layout(String),
    #[error("no Pauli correction reaches the fidelity floor (best {best} with fidelity {best_fidelity})")]
    NoPauliCorrection { best: PauliOp, best_fidelity: f64 },
    #[error("checkpoint {0} is never reached")]
    CheckpointNotReached(String),
    #[error("malformed data `{name}`: {message}")]
    Data { name: String, message: String },
    #[error(transparent)]
    Qreg(#[from] QregError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Notation(#[from] NotationError),
}

/// The three protocol families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Controlled teleportation of a single-atom superposition.
    CtSuperposition,
    /// Controlled partial teleportation of one partner of an entangled pair.
    CptEntangled,
    /// Controlled teleportation of an entangled pair over two photon paths.
    CtEntangled,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::CtSuperposition,
        Family::CptEntangled,
        Family::CtEntangled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::CtSuperposition => "ct-superposition",
            Family::CptEntangled => "cpt-entangled",
            Family::CtEntangled => "ct-entangled",
        }
    }

    /// Number of independent photon paths (fibers, sources, detectors).
    pub fn photon_paths(self) -> u32 {
        match self {
            Family::CtEntangled => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                format!("unknown protocol `{s}` (expected ct-superposition, cpt-entangled or ct-entangled)")
            })
    }
}
