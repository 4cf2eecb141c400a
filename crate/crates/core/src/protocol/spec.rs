use std::collections::HashSet;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Family, ProtocolError};
use crate::cavity::{faraday_phases, CavityParams, FaradayPhases};
use crate::notation::LinearParts;
use crate::optics::WavePlateKind;
use crate::qreg::{QuantumRegister, SingleState, SubsystemKind, SubsystemLabel, INPUT_NORM_TOL};

/// Where an interaction takes its phase pair from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSource {
    Explicit(FaradayPhases),
    Cavity(CavityParams),
}

impl PhaseSource {
    pub fn resolve(&self) -> Result<FaradayPhases, ProtocolError> {
        match self {
            PhaseSource::Explicit(p) => Ok(*p),
            PhaseSource::Cavity(params) => Ok(faraday_phases(params)?),
        }
    }
}

impl From<FaradayPhases> for PhaseSource {
    fn from(p: FaradayPhases) -> Self {
        PhaseSource::Explicit(p)
    }
}

impl From<CavityParams> for PhaseSource {
    fn from(p: CavityParams) -> Self {
        PhaseSource::Cavity(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum Stage {
    /// The photon is reflected by the cavity holding `atom`.
    CavityInteraction {
        photon: String,
        atom: String,
        phases: PhaseSource,
    },
    WavePlate {
        photon: String,
        kind: WavePlateKind,
    },
    HadamardAtom {
        atom: String,
    },
    Measure {
        targets: Vec<String>,
    },
}

/// Payload amplitudes `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payload {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Payload {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, ProtocolError> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > INPUT_NORM_TOL {
            return Err(ProtocolError::PayloadNotNormalized(norm_sqr));
        }
        Ok(Self { alpha, beta })
    }

    pub fn basis_zero() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn basis_one() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    /// Unitarily invariant random payload: `|alpha|^2` uniform on `[0, 1]`,
    /// independent uniform phases.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u: f64 = rng.gen();
        let (p1, p2): (f64, f64) = (rng.gen(), rng.gen());
        let tau = std::f64::consts::TAU;
        Self {
            alpha: Complex64::from_polar(u.sqrt(), tau * p1),
            beta: Complex64::from_polar((1.0 - u).sqrt(), tau * p2),
        }
    }
}

/// Shape of the payload state on its slots and on the teleport targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadForm {
    /// `alpha|0> + beta|1>` on one atom.
    Single,
    /// `alpha|01> + beta|10>` on two atoms.
    AntiCorrelated,
}

impl PayloadForm {
    pub fn arity(self) -> usize {
        match self {
            PayloadForm::Single => 1,
            PayloadForm::AntiCorrelated => 2,
        }
    }

    /// Amplitudes of the payload state on `arity()` atoms.
    pub fn amplitudes(self, payload: &Payload) -> Vec<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        match self {
            PayloadForm::Single => vec![payload.alpha, payload.beta],
            PayloadForm::AntiCorrelated => vec![z, payload.alpha, payload.beta, z],
        }
    }

    /// The payload state as a linear form in `(alpha, beta)`.
    pub fn linear_parts(self) -> LinearParts {
        let one = Complex64::new(1.0, 0.0);
        let mut parts = LinearParts::zeros(1 << self.arity());
        match self {
            PayloadForm::Single => {
                parts.alpha[0] = one;
                parts.beta[1] = one;
            }
            PayloadForm::AntiCorrelated => {
                parts.alpha[0b01] = one;
                parts.beta[0b10] = one;
            }
        }
        parts
    }
}

/// Initial state of one subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preparation {
    State(SingleState),
    /// Holds the payload (jointly with the other payload slots).
    PayloadSlot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub family: Family,
    pub n_controls: usize,
    /// Register layout (first entry is the most significant bit) and the
    /// preparation of each subsystem.
    pub subsystems: Vec<(SubsystemLabel, Preparation)>,
    pub stages: Vec<Stage>,
    pub teleport_targets: Vec<String>,
    pub control_labels: Vec<String>,
    pub payload: Payload,
    pub payload_form: PayloadForm,
}

/// `B`, `B1`, `B2`, ...
pub fn control_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| {
            if k == 0 {
                "B".to_string()
            } else {
                format!("B{k}")
            }
        })
        .collect()
}

fn plus() -> Preparation {
    Preparation::State(SingleState::Plus)
}

fn interaction(photon: &str, atom: &str, phases: PhaseSource) -> Stage {
    Stage::CavityInteraction {
        photon: photon.into(),
        atom: atom.into(),
        phases,
    }
}

/// Single-photon schemes share everything but the payload: the photon
/// crosses `A`, the controls and `C`, then a wave plate, a Hadamard on `C`
/// and the joint measurement.
fn single_photon(
    family: Family,
    n: usize,
    payload: Payload,
    phases: PhaseSource,
    form: PayloadForm,
) -> Result<ProtocolSpec, ProtocolError> {
    if n < 1 {
        return Err(ProtocolError::TooFewControls(n));
    }
    let payload = Payload::new(payload.alpha, payload.beta)?;
    let controls = control_labels(n);
    let mut subsystems = vec![(SubsystemLabel::atom("A"), plus())];
    subsystems.extend(
        controls
            .iter()
            .map(|c| (SubsystemLabel::atom(c.as_str()), plus())),
    );
    subsystems.push((SubsystemLabel::atom("C"), Preparation::PayloadSlot));
    let teleport_targets = match form {
        PayloadForm::Single => vec!["A".to_string()],
        PayloadForm::AntiCorrelated => {
            subsystems.push((SubsystemLabel::atom("D"), Preparation::PayloadSlot));
            vec!["A".to_string(), "D".to_string()]
        }
    };
    subsystems.push((
        SubsystemLabel::photon("F"),
        Preparation::State(SingleState::Linear),
    ));

    let mut stages = vec![interaction("F", "A", phases)];
    stages.extend(controls.iter().map(|c| interaction("F", c, phases)));
    stages.push(interaction("F", "C", phases));
    stages.push(Stage::WavePlate {
        photon: "F".into(),
        kind: WavePlateKind::for_control_count(n),
    });
    stages.push(Stage::HadamardAtom { atom: "C".into() });
    let mut targets = vec!["F".to_string(), "C".to_string()];
    targets.extend(controls.iter().cloned());
    stages.push(Stage::Measure { targets });

    Ok(ProtocolSpec {
        name: format!("{family}-{n}"),
        family,
        n_controls: n,
        subsystems,
        stages,
        teleport_targets,
        control_labels: controls,
        payload,
        payload_form: form,
    })
}

/// Controlled teleportation of `alpha|0> + beta|1>` from atom `C` to atom
/// `A` with `n` controls.
pub fn build_ct_superposition(
    n_controls: usize,
    payload: Payload,
    phases: impl Into<PhaseSource>,
) -> Result<ProtocolSpec, ProtocolError> {
    single_photon(
        Family::CtSuperposition,
        n_controls,
        payload,
        phases.into(),
        PayloadForm::Single,
    )
}

/// Controlled partial teleportation: `C` of the pair `alpha|01> + beta|10>`
/// on `(C, D)` is replaced by `A`. `D` never interacts.
pub fn build_cpt_entangled(
    n_controls: usize,
    payload: Payload,
    phases: impl Into<PhaseSource>,
) -> Result<ProtocolSpec, ProtocolError> {
    single_photon(
        Family::CptEntangled,
        n_controls,
        payload,
        phases.into(),
        PayloadForm::AntiCorrelated,
    )
}

/// Controlled teleportation of `alpha|01> + beta|10>` on `(C, E)` to
/// `(A, D)` with two photons: `F2` crosses `A`, the controls and `C`; `F1`
/// crosses `D` and `E`. Restricted to one or two controls; see
/// [`build_ct_entangled_extended`].
pub fn build_ct_entangled(
    n_controls: usize,
    payload: Payload,
    phases: impl Into<PhaseSource>,
) -> Result<ProtocolSpec, ProtocolError> {
    if n_controls > 2 {
        return Err(ProtocolError::UnsupportedControls {
            family: Family::CtEntangled,
            got: n_controls,
        });
    }
    build_ct_entangled_extended(n_controls, payload, phases)
}

/// [`build_ct_entangled`] for any `n_controls >= 1`, with the lower-path
/// wave plate chosen by the parity rule.
pub fn build_ct_entangled_extended(
    n_controls: usize,
    payload: Payload,
    phases: impl Into<PhaseSource>,
) -> Result<ProtocolSpec, ProtocolError> {
    let n = n_controls;
    if n < 1 {
        return Err(ProtocolError::TooFewControls(n));
    }
    let phases = phases.into();
    let payload = Payload::new(payload.alpha, payload.beta)?;
    let controls = control_labels(n);
    let mut subsystems = vec![(SubsystemLabel::atom("A"), plus())];
    subsystems.extend(
        controls
            .iter()
            .map(|c| (SubsystemLabel::atom(c.as_str()), plus())),
    );
    subsystems.extend([
        (SubsystemLabel::atom("C"), Preparation::PayloadSlot),
        (SubsystemLabel::atom("D"), plus()),
        (SubsystemLabel::atom("E"), Preparation::PayloadSlot),
        (
            SubsystemLabel::photon("F1"),
            Preparation::State(SingleState::Linear),
        ),
        (
            SubsystemLabel::photon("F2"),
            Preparation::State(SingleState::Linear),
        ),
    ]);

    let mut stages = vec![interaction("F2", "A", phases)];
    stages.extend(controls.iter().map(|c| interaction("F2", c, phases)));
    stages.push(interaction("F2", "C", phases));
    stages.push(interaction("F1", "D", phases));
    stages.push(interaction("F1", "E", phases));
    stages.push(Stage::WavePlate {
        photon: "F2".into(),
        kind: WavePlateKind::for_control_count(n),
    });
    stages.push(Stage::WavePlate {
        photon: "F1".into(),
        kind: WavePlateKind::for_control_count(0),
    });
    stages.push(Stage::HadamardAtom { atom: "C".into() });
    stages.push(Stage::HadamardAtom { atom: "E".into() });
    let mut targets: Vec<String> = ["F2", "C", "F1", "E"].map(String::from).to_vec();
    targets.extend(controls.iter().cloned());
    stages.push(Stage::Measure { targets });

    Ok(ProtocolSpec {
        name: format!("{}-{n}", Family::CtEntangled),
        family: Family::CtEntangled,
        n_controls: n,
        subsystems,
        stages,
        teleport_targets: vec!["A".into(), "D".into()],
        control_labels: controls,
        payload,
        payload_form: PayloadForm::AntiCorrelated,
    })
}

/// Builds any family. `extended` lifts the two-control limit of
/// [`build_ct_entangled`].
pub fn build(
    family: Family,
    n_controls: usize,
    payload: Payload,
    phases: impl Into<PhaseSource>,
    extended: bool,
) -> Result<ProtocolSpec, ProtocolError> {
    match family {
        Family::CtSuperposition => build_ct_superposition(n_controls, payload, phases),
        Family::CptEntangled => build_cpt_entangled(n_controls, payload, phases),
        Family::CtEntangled if extended => build_ct_entangled_extended(n_controls, payload, phases),
        Family::CtEntangled => build_ct_entangled(n_controls, payload, phases),
    }
}

impl ProtocolSpec {
    pub fn layout(&self) -> Vec<SubsystemLabel> {
        self.subsystems.iter().map(|(l, _)| l.clone()).collect()
    }

    fn find(&self, name: &str) -> Option<&SubsystemLabel> {
        self.subsystems
            .iter()
            .map(|(l, _)| l)
            .find(|l| l.name == name)
    }

    pub fn payload_slots(&self) -> Vec<String> {
        self.subsystems
            .iter()
            .filter(|(_, p)| *p == Preparation::PayloadSlot)
            .map(|(l, _)| l.name.clone())
            .collect()
    }

    /// Targets of the terminal Measure stage.
    pub fn measured(&self) -> Result<&[String], ProtocolError> {
        match self.stages.last() {
            Some(Stage::Measure { targets }) => Ok(targets),
            _ => Err(ProtocolError::MeasureStage),
        }
    }

    /// Same spec with the wave plate on `photon` replaced by the other kind.
    pub fn with_swapped_plate(&self, photon: &str) -> Self {
        let mut out = self.clone();
        for stage in &mut out.stages {
            if let Stage::WavePlate { photon: p, kind } = stage {
                if p == photon {
                    *kind = kind.other();
                }
            }
        }
        out
    }

    /// Same spec with a different payload.
    pub fn with_payload(&self, payload: Payload) -> Result<Self, ProtocolError> {
        let mut out = self.clone();
        out.payload = Payload::new(payload.alpha, payload.beta)?;
        Ok(out)
    }

    /// Structural checks. `enforce_parity` applies the wave-plate parity
    /// rule to every photon.
    pub fn validate(&self, enforce_parity: bool) -> Result<(), ProtocolError> {
        let mut seen = HashSet::new();
        for (l, _) in &self.subsystems {
            if !seen.insert(l.name.as_str()) {
                return Err(ProtocolError::Layout(format!(
                    "duplicate subsystem `{}`",
                    l.name
                )));
            }
        }
        if self.n_controls < 1 || self.control_labels.len() != self.n_controls {
            return Err(ProtocolError::TooFewControls(self.control_labels.len()));
        }
        let slots = self.payload_slots();
        if slots.len() != self.payload_form.arity() {
            return Err(ProtocolError::Layout(format!(
                "{} payload slot(s) for a payload on {} atom(s)",
                slots.len(),
                self.payload_form.arity()
            )));
        }
        let measures = self
            .stages
            .iter()
            .filter(|s| matches!(s, Stage::Measure { .. }))
            .count();
        if measures != 1 || !matches!(self.stages.last(), Some(Stage::Measure { .. })) {
            return Err(ProtocolError::MeasureStage);
        }
        let check = |stage: usize, label: &str, kind: SubsystemKind| {
            let l = self
                .find(label)
                .ok_or_else(|| ProtocolError::UnknownLabel {
                    stage,
                    label: label.to_string(),
                })?;
            if l.kind != kind {
                return Err(ProtocolError::KindMismatch {
                    stage,
                    label: label.to_string(),
                    expected: kind,
                    actual: l.kind,
                });
            }
            Ok(())
        };
        for (k, stage) in self.stages.iter().enumerate() {
            match stage {
                Stage::CavityInteraction { photon, atom, .. } => {
                    check(k, photon, SubsystemKind::PhotonPolarization)?;
                    check(k, atom, SubsystemKind::Atom)?;
                }
                Stage::WavePlate { photon, kind } => {
                    check(k, photon, SubsystemKind::PhotonPolarization)?;
                    let crossed = self.stages[..k]
                        .iter()
                        .filter(|s| {
                            matches!(s, Stage::CavityInteraction { photon: p, atom, .. }
                            if p == photon && self.control_labels.contains(atom))
                        })
                        .count();
                    let expected = WavePlateKind::for_control_count(crossed);
                    if enforce_parity && *kind != expected {
                        return Err(ProtocolError::ParityViolation {
                            photon: photon.clone(),
                            controls: crossed,
                            found: *kind,
                            expected,
                        });
                    }
                }
                Stage::HadamardAtom { atom } => check(k, atom, SubsystemKind::Atom)?,
                Stage::Measure { targets } => {
                    for t in targets {
                        if self.find(t).is_none() {
                            return Err(ProtocolError::UnknownLabel {
                                stage: k,
                                label: t.clone(),
                            });
                        }
                    }
                }
            }
        }
        for c in &self.control_labels {
            check(usize::MAX, c, SubsystemKind::Atom)?;
        }
        // The teleport targets must be exactly the unmeasured subsystems,
        // in layout order.
        let measured = self.measured()?;
        let rest: Vec<&str> = self
            .subsystems
            .iter()
            .map(|(l, _)| l.name.as_str())
            .filter(|n| !measured.iter().any(|m| m == n))
            .collect();
        let targets: Vec<&str> = self.teleport_targets.iter().map(String::as_str).collect();
        if rest != targets || targets.len() != self.payload_form.arity() {
            return Err(ProtocolError::Layout(format!(
                "teleport targets {targets:?} must be the unmeasured subsystems {rest:?}"
            )));
        }
        Ok(())
    }

    /// Prepared state of the subsystems named in `labels` (layout order).
    /// Payload slots must be included all together or not at all.
    pub fn prepared_state(
        &self,
        labels: &[&str],
        payload: &Payload,
    ) -> Result<QuantumRegister, ProtocolError> {
        let chosen: Vec<&(SubsystemLabel, Preparation)> = self
            .subsystems
            .iter()
            .filter(|(l, _)| labels.contains(&l.name.as_str()))
            .collect();
        if chosen.len() != labels.len() {
            let missing = labels
                .iter()
                .find(|n| self.find(n).is_none())
                .map(|s| s.to_string())
                .unwrap_or_default();
            return Err(ProtocolError::UnknownLabel {
                stage: usize::MAX,
                label: missing,
            });
        }
        let singles: Vec<(SubsystemLabel, SingleState)> = chosen
            .iter()
            .filter_map(|(l, p)| match p {
                Preparation::State(s) => Some((l.clone(), *s)),
                Preparation::PayloadSlot => None,
            })
            .collect();
        let slots: Vec<SubsystemLabel> = chosen
            .iter()
            .filter(|(_, p)| *p == Preparation::PayloadSlot)
            .map(|(l, _)| l.clone())
            .collect();
        let payload_reg = match slots.len() {
            0 => None,
            k if k == self.payload_form.arity() => Some(QuantumRegister::from_amplitudes(
                slots,
                self.payload_form.amplitudes(payload),
            )?),
            _ => {
                return Err(ProtocolError::Layout(
                    "payload slots cannot be separated from each other".into(),
                ))
            }
        };
        let reg = match (singles.is_empty(), payload_reg) {
            (false, Some(p)) => QuantumRegister::new(&singles)?.tensor(&p)?,
            (false, None) => QuantumRegister::new(&singles)?,
            (true, Some(p)) => p,
            (true, None) => return Err(ProtocolError::Layout("no subsystems selected".into())),
        };
        let order: Vec<&str> = chosen.iter().map(|(l, _)| l.name.as_str()).collect();
        Ok(reg.reorder(&order)?)
    }

    pub fn initial_state(&self, payload: &Payload) -> Result<QuantumRegister, ProtocolError> {
        let all: Vec<&str> = self
            .subsystems
            .iter()
            .map(|(l, _)| l.name.as_str())
            .collect();
        self.prepared_state(&all, payload)
    }

    /// The intended payload state on the teleport targets.
    pub fn intended_state(&self, payload: &Payload) -> Result<QuantumRegister, ProtocolError> {
        let labels = self
            .teleport_targets
            .iter()
            .map(|t| {
                self.find(t)
                    .cloned()
                    .ok_or_else(|| ProtocolError::UnknownLabel {
                        stage: usize::MAX,
                        label: t.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuantumRegister::from_amplitudes(
            labels,
            self.payload_form.amplitudes(payload),
        )?)
    }
}
