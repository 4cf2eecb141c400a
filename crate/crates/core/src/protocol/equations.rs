use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::exec::{Checkpoint, RunOptions};
use super::spec::{build, Payload, ProtocolSpec};
use super::{Family, ProtocolError};
use crate::cavity::FaradayPhases;
use crate::notation::{parse, LabelContext};
use crate::qreg::{max_diff_up_to_global_phase, normalized, SubsystemLabel};

/// Per-amplitude tolerance for state comparisons.
pub const EQUATION_TOL: f64 = 1e-10;

const STATES_JSON: &str = include_str!("../../data/equations/states.json");

/// Where in the pipeline a printed state is claimed to hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EquationCheckpoint {
    Named(NamedCheckpoint),
    AfterInteraction { after_interaction: [String; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedCheckpoint {
    PreMeasure,
}

impl EquationCheckpoint {
    pub fn to_checkpoint(&self) -> Checkpoint {
        match self {
            EquationCheckpoint::Named(NamedCheckpoint::PreMeasure) => Checkpoint::PreMeasure,
            EquationCheckpoint::AfterInteraction {
                after_interaction: [photon, atom],
            } => Checkpoint::AfterInteraction {
                photon: photon.clone(),
                atom: atom.clone(),
            },
        }
    }
}

/// A printed intermediate state, transcribed verbatim.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEquation {
    pub id: String,
    pub protocol: Family,
    pub controls: usize,
    pub checkpoint: EquationCheckpoint,
    pub description: String,
    /// Label of a bare `|L⟩` or `|R⟩`; `None` when every photon ket is
    /// labelled explicitly.
    pub default_photon: Option<String>,
    pub latex: String,
    /// Labels for kets with no subscript at all, in ket order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implicit_labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatesFile {
    equations: Vec<StateEquation>,
}

pub fn bundled_equations() -> Vec<StateEquation> {
    let file: StatesFile =
        serde_json::from_str(STATES_JSON).expect("bundled equation data is valid JSON");
    file.equations
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationReport {
    pub id: String,
    pub matches: bool,
    /// Largest amplitude difference over all payloads after normalizing both
    /// sides and aligning their global phase.
    pub max_amplitude_error: f64,
    /// Squared norm of the printed expression (prefactor included) at the
    /// first payload. Reported, not judged: a wrong prefactor alone does not
    /// change the state.
    pub stated_norm_sqr: f64,
    pub payloads_checked: usize,
    pub error: Option<String>,
}

impl StateEquation {
    fn context(&self, phases: &FaradayPhases) -> LabelContext {
        LabelContext {
            default_photon: self.default_photon.clone(),
            implicit_labels: self.implicit_labels.clone(),
            phases: Some((phases.phi, phases.phi0)),
        }
    }

    /// The pipeline this state belongs to, tuned with `phases`.
    pub fn pipeline(&self, phases: FaradayPhases) -> Result<ProtocolSpec, ProtocolError> {
        build(
            self.protocol,
            self.controls,
            Payload::basis_zero(),
            phases,
            false,
        )
    }
}

/// Compares a printed state against the pipeline at its checkpoint for each
/// payload. Subsystems the expression never mentions are taken in their
/// prepared state.
pub fn check_equation(
    eq: &StateEquation,
    phases: FaradayPhases,
    payloads: &[Payload],
) -> EquationReport {
    let mut report = EquationReport {
        id: eq.id.clone(),
        matches: false,
        max_amplitude_error: f64::INFINITY,
        stated_norm_sqr: f64::NAN,
        payloads_checked: 0,
        error: None,
    };
    match compare(eq, phases, payloads, &mut report) {
        Ok(err) => {
            report.max_amplitude_error = err;
            report.matches = err <= EQUATION_TOL && report.payloads_checked > 0;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

fn compare(
    eq: &StateEquation,
    phases: FaradayPhases,
    payloads: &[Payload],
    report: &mut EquationReport,
) -> Result<f64, ProtocolError> {
    let spec = eq.pipeline(phases)?;
    let expr = parse(&eq.latex, &eq.context(&phases))?;
    let mentioned = expr.labels()?;
    let layout = spec.layout();
    let printed_layout: Vec<SubsystemLabel> = layout
        .iter()
        .filter(|l| mentioned.contains(&l.name))
        .cloned()
        .collect();
    let spectators: Vec<&str> = layout
        .iter()
        .filter(|l| !mentioned.contains(&l.name))
        .map(|l| l.name.as_str())
        .collect();
    let parts = expr.linear_parts(&printed_layout)?;
    let order: Vec<&str> = layout.iter().map(|l| l.name.as_str()).collect();
    let checkpoint = eq.checkpoint.to_checkpoint();
    let opts = RunOptions::default();

    let mut worst = 0.0f64;
    for (i, payload) in payloads.iter().enumerate() {
        let amps = parts.instantiate(payload.alpha, payload.beta);
        if i == 0 {
            report.stated_norm_sqr = amps.iter().map(Complex64::norm_sqr).sum();
        }
        let Some(amps) = normalized(&amps) else {
            return Err(ProtocolError::Data {
                name: eq.id.clone(),
                message: "printed state vanishes for this payload".into(),
            });
        };
        let printed = crate::qreg::QuantumRegister::from_amplitudes(printed_layout.clone(), amps)?;
        let expected = if spectators.is_empty() {
            printed
        } else {
            printed
                .tensor(&spec.prepared_state(&spectators, payload)?)?
                .reorder(&order)?
        };
        let actual = spec.execute(payload, &checkpoint, &opts)?.state;
        worst = worst.max(max_diff_up_to_global_phase(
            actual.amplitudes(),
            expected.amplitudes(),
        ));
        report.payloads_checked += 1;
    }
    Ok(worst)
}
