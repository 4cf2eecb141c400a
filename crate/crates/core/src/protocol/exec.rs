use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::correction::{correction_fidelity, synthesize_universal_correction, universal_fidelity};
use super::spec::{Payload, ProtocolSpec, Stage};
use super::{Family, ProtocolError};
use crate::cavity::PhasePolicy;
use crate::notation::{render_linear, LinearParts};
use crate::optics::{hadamard_atom, qwp_matrix};
use crate::qreg::{Outcome, PauliOp, QuantumRegister};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Reject wave plates that break the parity rule.
    pub enforce_parity: bool,
    pub phase_policy: PhasePolicy,
    /// Fail when some branch has no Pauli correction. When off, such
    /// branches are reported with `correction: None`.
    pub require_correction: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            enforce_parity: true,
            phase_policy: PhasePolicy::Strict,
            require_correction: true,
        }
    }
}

/// Where to stop executing a pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Checkpoint {
    /// Right after the photon has been reflected by the atom's cavity.
    AfterInteraction { photon: String, atom: String },
    /// Everything except the terminal measurement.
    PreMeasure,
}

impl fmt::Display for Checkpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Checkpoint::AfterInteraction { photon, atom } => write!(f, "after {photon} at {atom}"),
            Checkpoint::PreMeasure => f.write_str("pre-measure"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub state: QuantumRegister,
    /// Product of the per-interaction success weights (one for lossless
    /// phase pairs).
    pub success_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchRecord {
    pub outcome: Outcome,
    pub probability: f64,
    /// Normalized state of the teleport targets for the run's payload.
    pub residual: QuantumRegister,
    /// The residual as a linear form in `(alpha, beta)`, scaled so its first
    /// nonzero coefficient is one.
    #[serde(skip)]
    pub residual_parts: LinearParts,
    pub residual_symbolic: String,
    pub correction: Option<PauliOp>,
    pub corrected_payload_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub protocol: String,
    pub family: Family,
    pub n_controls: usize,
    pub payload: Payload,
    pub measured: Vec<String>,
    pub teleport_targets: Vec<String>,
    pub success_weight: f64,
    #[serde(skip)]
    pub final_state: QuantumRegister,
    pub branches: Vec<BranchRecord>,
}

impl ProtocolSpec {
    /// Runs the stages up to `until` for the given payload.
    pub fn execute(
        &self,
        payload: &Payload,
        until: &Checkpoint,
        opts: &RunOptions,
    ) -> Result<Execution, ProtocolError> {
        self.validate(opts.enforce_parity)?;
        let mut state = self.initial_state(payload)?;
        let mut weight = 1.0;
        for stage in &self.stages {
            match stage {
                Stage::CavityInteraction {
                    photon,
                    atom,
                    phases,
                } => {
                    let pair = phases.resolve()?;
                    weight *= state.apply_controlled_phase_pair_with(
                        photon,
                        atom,
                        &pair,
                        opts.phase_policy,
                    )?;
                    if matches!(until, Checkpoint::AfterInteraction { photon: p, atom: a }
                        if p == photon && a == atom)
                    {
                        return Ok(Execution {
                            state,
                            success_weight: weight,
                        });
                    }
                }
                Stage::WavePlate { photon, kind } => {
                    state.apply_single(photon, &qwp_matrix(*kind))?
                }
                Stage::HadamardAtom { atom } => state.apply_single(atom, &hadamard_atom())?,
                Stage::Measure { .. } => {
                    if *until == Checkpoint::PreMeasure {
                        return Ok(Execution {
                            state,
                            success_weight: weight,
                        });
                    }
                }
            }
        }
        Err(ProtocolError::CheckpointNotReached(until.to_string()))
    }
}

/// Scales a linear form so its first coefficient above `1e-12` (in
/// constant, alpha, beta order) is exactly one.
fn canonical_parts(mut parts: LinearParts) -> LinearParts {
    if let Some(first) = parts.flat().into_iter().find(|c| c.norm() > 1e-12) {
        parts.scale(Complex64::new(1.0, 0.0) / first);
    }
    parts
}

pub fn run(spec: &ProtocolSpec) -> Result<RunResult, ProtocolError> {
    run_with(spec, &RunOptions::default())
}

/// Executes the full pipeline, enumerates every branch of the terminal
/// measurement and synthesizes each branch's correction.
///
/// Corrections are derived from the residual as a function of the payload
/// (the pipeline is linear in `(alpha, beta)`), so they never depend on the
/// particular payload of the run.
pub fn run_with(spec: &ProtocolSpec, opts: &RunOptions) -> Result<RunResult, ProtocolError> {
    let exec = spec.execute(&spec.payload, &Checkpoint::PreMeasure, opts)?;
    let zero = spec.execute(&Payload::basis_zero(), &Checkpoint::PreMeasure, opts)?;
    let one = spec.execute(&Payload::basis_one(), &Checkpoint::PreMeasure, opts)?;
    let measured: Vec<&str> = spec.measured()?.iter().map(String::as_str).collect();
    let intended = spec.intended_state(&spec.payload)?;
    let intended_parts = spec.payload_form.linear_parts();
    let arity = spec.teleport_targets.len();

    let mut branches = Vec::new();
    for m in exec.state.measure_enumerate(&measured)? {
        let residual = m.residual.ok_or_else(|| {
            ProtocolError::Layout("every subsystem is measured; nothing is teleported".into())
        })?;
        let (rest, alpha) = zero.state.project_outcome(&m.outcome)?;
        let (_, beta) = one.state.project_outcome(&m.outcome)?;
        let layout_ok = rest
            .iter()
            .map(|l| l.name.as_str())
            .eq(spec.teleport_targets.iter().map(String::as_str));
        if !layout_ok {
            return Err(ProtocolError::Layout(
                "unmeasured subsystems differ from the teleport targets".into(),
            ));
        }
        let parts = canonical_parts(LinearParts {
            constant: vec![Complex64::new(0.0, 0.0); alpha.len()],
            alpha,
            beta,
        });
        let correction = match synthesize_universal_correction(&parts, &intended_parts, arity) {
            Ok(op) => Some(op),
            Err(e @ ProtocolError::NoPauliCorrection { .. }) if opts.require_correction => {
                return Err(e)
            }
            Err(ProtocolError::NoPauliCorrection { .. }) => None,
            Err(e) => return Err(e),
        };
        let fidelity = match &correction {
            Some(op) => correction_fidelity(op, &residual, &intended)?,
            None => PauliOp::enumerate(arity)
                .map(|op| correction_fidelity(&op, &residual, &intended))
                .collect::<Result<Vec<f64>, _>>()?
                .into_iter()
                .fold(0.0, f64::max),
        };
        debug_assert!(correction.as_ref().is_none_or(|op| universal_fidelity(
            op,
            &parts,
            &intended_parts
        ) > 0.99));
        branches.push(BranchRecord {
            outcome: m.outcome,
            probability: m.probability,
            residual_symbolic: render_linear(&rest, &parts),
            residual,
            residual_parts: parts,
            correction,
            corrected_payload_fidelity: fidelity,
        });
    }

    Ok(RunResult {
        protocol: spec.name.clone(),
        family: spec.family,
        n_controls: spec.n_controls,
        payload: spec.payload,
        measured: measured.iter().map(|s| s.to_string()).collect(),
        teleport_targets: spec.teleport_targets.clone(),
        success_weight: exec.success_weight,
        final_state: exec.state,
        branches,
    })
}
