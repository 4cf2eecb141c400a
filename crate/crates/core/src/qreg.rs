//! Dense state vectors over labelled two-level subsystems.
//!
//! Basis convention: atoms use `|0>` = bit 0 and `|1>` = bit 1, photons use
//! `|L>` = bit 0 and `|R>` = bit 1. The first subsystem of a register is the
//! most significant bit of the amplitude index. Callers address subsystems by
//! label only.
//!
//! Operations mutate the register in place (`&mut self`); a register has a
//! single owner and is `Send + Sync`. Clone it to branch a computation.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cavity::{CavityError, FaradayPhases, PhasePolicy};

/// Allowed deviation of `sum |a|^2` from one after any operation.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation of a caller-supplied single-subsystem state from unit norm.
pub const INPUT_NORM_TOL: f64 = 1e-9;
/// Unitarity tolerance for caller-supplied gate matrices.
pub const UNITARY_TOL: f64 = 1e-10;
/// Branches below this probability are dropped from enumeration.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum QregError {
    #[error("a register needs at least one subsystem")]
    Empty,
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("empty subsystem label")]
    EmptyLabel,
    #[error("state for `{label}` is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { label: String, norm_sqr: f64 },
    #[error("amplitude vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gate matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("`{label}` is a {actual:?} but a {expected:?} is required")]
    KindMismatch {
        label: String,
        expected: SubsystemKind,
        actual: SubsystemKind,
    },
    #[error("measurement needs at least one target")]
    NoTargets,
    #[error("label `{0}` listed more than once")]
    RepeatedTarget(String),
    #[error("registers are defined over different subsystems")]
    SubsystemMismatch,
    #[error("Pauli operator has {factors} factors but {targets} targets were given")]
    ArityMismatch { factors: usize, targets: usize },
    #[error("cannot parse Pauli operator `{0}`")]
    BadPauli(String),
    #[error(transparent)]
    Cavity(#[from] CavityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsystemKind {
    Atom,
    PhotonPolarization,
}

impl SubsystemKind {
    /// Symbol used for a basis bit of this kind: `0/1` for atoms, `L/R` for photons.
    pub fn bit_symbol(self, bit: u8) -> char {
        match (self, bit) {
            (SubsystemKind::Atom, 0) => '0',
            (SubsystemKind::Atom, _) => '1',
            (SubsystemKind::PhotonPolarization, 0) => 'L',
            (SubsystemKind::PhotonPolarization, _) => 'R',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemLabel {
    pub kind: SubsystemKind,
    pub name: String,
}

impl SubsystemLabel {
    pub fn atom(name: impl Into<String>) -> Self {
        Self {
            kind: SubsystemKind::Atom,
            name: name.into(),
        }
    }

    pub fn photon(name: impl Into<String>) -> Self {
        Self {
            kind: SubsystemKind::PhotonPolarization,
            name: name.into(),
        }
    }
}

/// Preparation of one subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleState {
    Zero,
    One,
    /// `(|0> + |1>)/sqrt(2)`
    Plus,
    L,
    R,
    /// `(|L> + |R>)/sqrt(2)`
    Linear,
    /// `alpha |0> + beta |1>` (or `alpha |L> + beta |R>` for a photon).
    Amplitudes(Complex64, Complex64),
}

impl SingleState {
    fn vector(&self, label: &SubsystemLabel) -> Result<[Complex64; 2], QregError> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let needs = |kind: SubsystemKind| {
            if label.kind == kind {
                Ok(())
            } else {
                Err(QregError::KindMismatch {
                    label: label.name.clone(),
                    expected: kind,
                    actual: label.kind,
                })
            }
        };
        match *self {
            SingleState::Zero => needs(SubsystemKind::Atom).map(|_| [one, zero]),
            SingleState::One => needs(SubsystemKind::Atom).map(|_| [zero, one]),
            SingleState::Plus => needs(SubsystemKind::Atom).map(|_| [h, h]),
            SingleState::L => needs(SubsystemKind::PhotonPolarization).map(|_| [one, zero]),
            SingleState::R => needs(SubsystemKind::PhotonPolarization).map(|_| [zero, one]),
            SingleState::Linear => needs(SubsystemKind::PhotonPolarization).map(|_| [h, h]),
            SingleState::Amplitudes(a, b) => {
                let norm_sqr = a.norm_sqr() + b.norm_sqr();
                if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > INPUT_NORM_TOL {
                    return Err(QregError::NotNormalized {
                        label: label.name.clone(),
                        norm_sqr,
                    });
                }
                let n = norm_sqr.sqrt();
                Ok([a / n, b / n])
            }
        }
    }
}

/// 2x2 complex matrix acting on one subsystem, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entry-wise deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let id = Mat2::identity();
        p.max_abs_diff(&id)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }
}

/// One factor of a Pauli correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Z,
    /// `X` followed by `Z`, i.e. the operator product `Z X`.
    ZX,
}

impl Pauli {
    /// Canonical search order.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::ZX];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => Mat2::real(0.0, 1.0, 1.0, 0.0),
            Pauli::Z => Mat2::real(1.0, 0.0, 0.0, -1.0),
            Pauli::ZX => Mat2::real(0.0, 1.0, -1.0, 0.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Z => "Z",
            Pauli::ZX => "ZX",
        }
    }
}

impl FromStr for Pauli {
    type Err = QregError;

    /// Accepts `I`, `X`, `Z`, `ZX` and `XZ`. `XZ` differs from `ZX` only by a
    /// global sign and is read as `ZX`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "I" | "1" => Ok(Pauli::I),
            "X" => Ok(Pauli::X),
            "Z" => Ok(Pauli::Z),
            "ZX" | "XZ" => Ok(Pauli::ZX),
            other => Err(QregError::BadPauli(other.to_string())),
        }
    }
}

/// Tensor product of single-subsystem Pauli factors, one per target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOp {
    pub factors: Vec<Pauli>,
}

impl PauliOp {
    pub fn new(factors: Vec<Pauli>) -> Self {
        Self { factors }
    }

    pub fn identity(arity: usize) -> Self {
        Self::new(vec![Pauli::I; arity])
    }

    /// All `4^arity` operators in canonical order (`I < X < Z < ZX`,
    /// lexicographic with the first target most significant).
    pub fn enumerate(arity: usize) -> impl Iterator<Item = PauliOp> {
        let total = 4usize.pow(arity as u32);
        (0..total).map(move |mut code| {
            let mut factors = vec![Pauli::I; arity];
            for slot in factors.iter_mut().rev() {
                *slot = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliOp::new(factors)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|p| *p == Pauli::I)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.factors.iter().map(|p| p.symbol()).collect();
        f.write_str(&parts.join("⊗"))
    }
}

impl FromStr for PauliOp {
    type Err = QregError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let factors = s
            .split(['⊗', ','])
            .map(str::parse)
            .collect::<Result<Vec<Pauli>, _>>()
            .map_err(|_| QregError::BadPauli(s.to_string()))?;
        Ok(PauliOp::new(factors))
    }
}

impl Serialize for PauliOp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One measured subsystem and its result.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeEntry {
    pub label: String,
    pub kind: SubsystemKind,
    pub bit: u8,
}

/// Joint result of a projective measurement, in target order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Outcome(pub Vec<OutcomeEntry>);

impl Outcome {
    pub fn bit(&self, label: &str) -> Option<u8> {
        self.0.iter().find(|e| e.label == label).map(|e| e.bit)
    }

    pub fn entries(&self) -> &[OutcomeEntry] {
        &self.0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|e| format!("{}={}", e.label, e.kind.bit_symbol(e.bit)))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for e in &self.0 {
            map.serialize_entry(&e.label, &e.kind.bit_symbol(e.bit).to_string())?;
        }
        map.end()
    }
}

/// Result of projecting onto one joint outcome.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: Outcome,
    pub probability: f64,
    /// Normalized state of the unmeasured subsystems, `None` if every
    /// subsystem was measured.
    pub residual: Option<QuantumRegister>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    subsystems: Vec<SubsystemLabel>,
    amplitudes: Vec<Complex64>,
}

impl QuantumRegister {
    /// Product state of the given single-subsystem preparations.
    pub fn new(states: &[(SubsystemLabel, SingleState)]) -> Result<Self, QregError> {
        let subsystems: Vec<SubsystemLabel> = states.iter().map(|(l, _)| l.clone()).collect();
        check_labels(&subsystems)?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for (label, state) in states {
            let v = state.vector(label)?;
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| [a * v[0], a * v[1]])
                .collect();
        }
        Ok(Self {
            subsystems,
            amplitudes,
        })
    }

    /// Wraps an explicit amplitude vector, renormalizing it. The vector must
    /// already be normalized to within `INPUT_NORM_TOL`.
    pub fn from_amplitudes(
        subsystems: Vec<SubsystemLabel>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, QregError> {
        check_labels(&subsystems)?;
        let expected = 1usize << subsystems.len();
        if amplitudes.len() != expected {
            return Err(QregError::LengthMismatch {
                expected,
                got: amplitudes.len(),
            });
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > INPUT_NORM_TOL {
            return Err(QregError::NotNormalized {
                label: "<register>".into(),
                norm_sqr,
            });
        }
        let mut reg = Self {
            subsystems,
            amplitudes,
        };
        reg.renormalize();
        Ok(reg)
    }

    /// Like [`from_amplitudes`](Self::from_amplitudes) but scales any nonzero
    /// vector to unit norm.
    pub fn from_unnormalized(
        subsystems: Vec<SubsystemLabel>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, QregError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QregError::NotNormalized {
                label: "<register>".into(),
                norm_sqr: norm * norm,
            });
        }
        Self::from_amplitudes(
            subsystems,
            amplitudes.into_iter().map(|a| a / norm).collect(),
        )
    }

    pub fn subsystems(&self) -> &[SubsystemLabel] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.name.as_str())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, label: &str) -> Result<usize, QregError> {
        self.subsystems
            .iter()
            .position(|s| s.name == label)
            .ok_or_else(|| QregError::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, name: &str) -> Result<&SubsystemLabel, QregError> {
        Ok(&self.subsystems[self.position(name)?])
    }

    /// Bit mask of `label` within an amplitude index.
    fn mask(&self, label: &str) -> Result<usize, QregError> {
        let pos = self.position(label)?;
        Ok(1usize << (self.subsystems.len() - 1 - pos))
    }

    fn require_kind(&self, label: &str, kind: SubsystemKind) -> Result<usize, QregError> {
        let l = self.label(label)?;
        if l.kind != kind {
            return Err(QregError::KindMismatch {
                label: label.to_string(),
                expected: kind,
                actual: l.kind,
            });
        }
        self.mask(label)
    }

    fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    /// Applies `u` to `target`, identity elsewhere.
    pub fn apply_single(&mut self, target: &str, u: &Mat2) -> Result<(), QregError> {
        let deviation = u.unitarity_deviation();
        if deviation > UNITARY_TOL {
            return Err(QregError::NotUnitary { deviation });
        }
        let mask = self.mask(target)?;
        let m = &u.0;
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
            self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
            self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
        }
        Ok(())
    }

    /// Diagonal photon-atom interaction: `|L0>` and `|R1>` pick up `phi`,
    /// `|L1>` and `|R0>` pick up `phi0`. Strict about lossy phase pairs.
    pub fn apply_controlled_phase_pair(
        &mut self,
        photon: &str,
        atom: &str,
        phases: &FaradayPhases,
    ) -> Result<(), QregError> {
        self.apply_controlled_phase_pair_with(photon, atom, phases, PhasePolicy::Strict)
            .map(|_| ())
    }

    /// As [`apply_controlled_phase_pair`](Self::apply_controlled_phase_pair)
    /// with an explicit policy for lossy pairs. Returns the success weight of
    /// the interaction (see [`FaradayPhases::admit`]).
    pub fn apply_controlled_phase_pair_with(
        &mut self,
        photon: &str,
        atom: &str,
        phases: &FaradayPhases,
        policy: PhasePolicy,
    ) -> Result<f64, QregError> {
        let pm = self.require_kind(photon, SubsystemKind::PhotonPolarization)?;
        let am = self.require_kind(atom, SubsystemKind::Atom)?;
        let weight = phases.admit(policy)?;
        let coupled = Complex64::from_polar(1.0, phases.phi);
        let empty = Complex64::from_polar(1.0, phases.phi0);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let same = (i & pm != 0) == (i & am != 0);
            *a *= if same { coupled } else { empty };
        }
        Ok(weight)
    }

    /// Applies `op.factors[k]` to `targets[k]`.
    pub fn apply_pauli(&mut self, op: &PauliOp, targets: &[&str]) -> Result<(), QregError> {
        if op.factors.len() != targets.len() {
            return Err(QregError::ArityMismatch {
                factors: op.factors.len(),
                targets: targets.len(),
            });
        }
        for (p, t) in op.factors.iter().zip(targets) {
            if *p != Pauli::I {
                self.apply_single(t, &p.matrix())?;
            }
        }
        Ok(())
    }

    fn target_masks(&self, targets: &[&str]) -> Result<Vec<usize>, QregError> {
        if targets.is_empty() {
            return Err(QregError::NoTargets);
        }
        let mut seen = HashSet::new();
        targets
            .iter()
            .map(|t| {
                if !seen.insert(*t) {
                    return Err(QregError::RepeatedTarget(t.to_string()));
                }
                self.mask(t)
            })
            .collect()
    }

    fn outcome_for(&self, targets: &[&str], code: usize) -> Outcome {
        let k = targets.len();
        Outcome(
            targets
                .iter()
                .enumerate()
                .map(|(pos, t)| {
                    let label = self.label(t).expect("validated target");
                    OutcomeEntry {
                        label: label.name.clone(),
                        kind: label.kind,
                        bit: ((code >> (k - 1 - pos)) & 1) as u8,
                    }
                })
                .collect(),
        )
    }

    /// Unnormalized projection onto outcome `code`, as amplitudes over the
    /// unmeasured subsystems (in register order).
    fn project(&self, masks: &[usize], code: usize) -> Vec<Complex64> {
        let k = masks.len();
        let all: usize = masks.iter().fold(0, |acc, m| acc | m);
        let wanted: usize = masks
            .iter()
            .enumerate()
            .filter(|(pos, _)| (code >> (k - 1 - pos)) & 1 == 1)
            .fold(0, |acc, (_, m)| acc | m);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & all == wanted)
            .map(|(_, a)| *a)
            .collect()
    }

    fn measurement_for(&self, targets: &[&str], masks: &[usize], code: usize) -> Measurement {
        let projected = self.project(masks, code);
        let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        let rest: Vec<SubsystemLabel> = self
            .subsystems
            .iter()
            .filter(|s| !targets.contains(&s.name.as_str()))
            .cloned()
            .collect();
        let residual = if rest.is_empty() || probability <= 0.0 {
            None
        } else {
            let n = probability.sqrt();
            Some(QuantumRegister {
                subsystems: rest,
                amplitudes: projected.into_iter().map(|a| a / n).collect(),
            })
        };
        Measurement {
            outcome: self.outcome_for(targets, code),
            probability,
            residual,
        }
    }

    /// Unnormalized projection onto a known outcome: the labels of the
    /// unmeasured subsystems (register order) and their amplitudes.
    pub fn project_outcome(
        &self,
        outcome: &Outcome,
    ) -> Result<(Vec<SubsystemLabel>, Vec<Complex64>), QregError> {
        let targets: Vec<&str> = outcome.0.iter().map(|e| e.label.as_str()).collect();
        let masks = self.target_masks(&targets)?;
        let k = targets.len();
        let code = outcome.0.iter().enumerate().fold(0usize, |acc, (pos, e)| {
            acc | ((e.bit as usize & 1) << (k - 1 - pos))
        });
        let rest = self
            .subsystems
            .iter()
            .filter(|s| !targets.contains(&s.name.as_str()))
            .cloned()
            .collect();
        Ok((rest, self.project(&masks, code)))
    }

    /// Every joint outcome of measuring `targets` in the computational (or
    /// L/R) basis with probability at least `MIN_BRANCH_PROBABILITY`, ordered
    /// lexicographically over the target bits (first target most significant).
    pub fn measure_enumerate(&self, targets: &[&str]) -> Result<Vec<Measurement>, QregError> {
        let masks = self.target_masks(targets)?;
        Ok((0..1usize << masks.len())
            .map(|code| self.measurement_for(targets, &masks, code))
            .filter(|m| m.probability >= MIN_BRANCH_PROBABILITY)
            .collect())
    }

    /// Draws one outcome with its Born probability, seeded deterministically.
    pub fn measure_sample(&self, targets: &[&str], seed: u64) -> Result<Measurement, QregError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.measure_sample_with(targets, &mut rng)
    }

    pub fn measure_sample_with<R: Rng + ?Sized>(
        &self,
        targets: &[&str],
        rng: &mut R,
    ) -> Result<Measurement, QregError> {
        let branches = self.measure_enumerate(targets)?;
        Ok(sample_branch(&branches, rng).clone())
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumRegister) -> Result<QuantumRegister, QregError> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_labels(&subsystems)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(QuantumRegister {
            subsystems,
            amplitudes,
        })
    }

    /// Same state with subsystems permuted into `order`, which must name
    /// every subsystem exactly once.
    pub fn reorder(&self, order: &[&str]) -> Result<QuantumRegister, QregError> {
        if order.len() != self.subsystems.len() {
            return Err(QregError::SubsystemMismatch);
        }
        let mut seen = HashSet::new();
        let positions = order
            .iter()
            .map(|l| {
                if !seen.insert(*l) {
                    return Err(QregError::RepeatedTarget(l.to_string()));
                }
                self.position(l)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let n = order.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (new_idx, slot) in amplitudes.iter_mut().enumerate() {
            let mut old_idx = 0usize;
            for (new_pos, old_pos) in positions.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - new_pos)) & 1;
                old_idx |= bit << (n - 1 - old_pos);
            }
            *slot = self.amplitudes[old_idx];
        }
        Ok(QuantumRegister {
            subsystems: positions
                .iter()
                .map(|&p| self.subsystems[p].clone())
                .collect(),
            amplitudes,
        })
    }

    fn same_layout(&self, other: &QuantumRegister) -> Result<(), QregError> {
        if self.subsystems != other.subsystems {
            return Err(QregError::SubsystemMismatch);
        }
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &QuantumRegister) -> Result<Complex64, QregError> {
        self.same_layout(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &QuantumRegister) -> Result<f64, QregError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Amplitudes rescaled by a global phase so the first amplitude with
    /// magnitude above `1e-12` is real and positive.
    pub fn canonical_amplitudes(&self) -> Vec<Complex64> {
        let phase = self
            .amplitudes
            .iter()
            .find(|a| a.norm() > 1e-12)
            .map(|a| a.conj() / a.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        self.amplitudes.iter().map(|a| a * phase).collect()
    }

    /// Whether the two states agree up to a global phase, amplitude by
    /// amplitude within `tol`. Layouts must match.
    pub fn approx_eq_up_to_phase(&self, other: &QuantumRegister, tol: f64) -> bool {
        self.same_layout(other).is_ok()
            && equal_up_to_global_phase(&self.amplitudes, &other.amplitudes, tol)
    }

    /// Ket-notation rendering of the nonzero amplitudes.
    pub fn to_ket_string(&self) -> String {
        let labels: Vec<&str> = self.labels().collect();
        let n = labels.len();
        let mut terms = Vec::new();
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm() < 1e-12 {
                continue;
            }
            let symbols: String = self
                .subsystems
                .iter()
                .enumerate()
                .map(|(pos, s)| s.kind.bit_symbol(((i >> (n - 1 - pos)) & 1) as u8))
                .collect();
            terms.push(format!("({:.6}{:+.6}i)|{}⟩", a.re, a.im, symbols));
        }
        format!("{} over ({})", terms.join(" + "), labels.join(","))
    }
}

impl Serialize for QuantumRegister {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        let labels: Vec<&str> = self.labels().collect();
        map.serialize_entry("subsystems", &labels)?;
        let amps: Vec<[f64; 2]> = self.amplitudes.iter().map(|a| [a.re, a.im]).collect();
        map.serialize_entry("amplitudes", &amps)?;
        map.end()
    }
}

fn check_labels(subsystems: &[SubsystemLabel]) -> Result<(), QregError> {
    if subsystems.is_empty() {
        return Err(QregError::Empty);
    }
    let mut seen = HashSet::new();
    for s in subsystems {
        if s.name.is_empty() {
            return Err(QregError::EmptyLabel);
        }
        if !seen.insert(s.name.as_str()) {
            return Err(QregError::DuplicateLabel(s.name.clone()));
        }
    }
    Ok(())
}

/// Picks a branch by inverse-CDF sampling over the branch probabilities.
pub fn sample_branch<'a, R: Rng + ?Sized>(
    branches: &'a [Measurement],
    rng: &mut R,
) -> &'a Measurement {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let mut u = rng.gen::<f64>() * total;
    for b in branches {
        if u < b.probability {
            return b;
        }
        u -= b.probability;
    }
    branches
        .last()
        .expect("at least one branch has nonzero probability")
}

/// Phase-insensitive comparison of two amplitude vectors. The phase is
/// aligned on the largest-magnitude entry of `a`.
pub fn equal_up_to_global_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some((k, ak)) = a
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
    else {
        return true;
    };
    let bk = b[k];
    if ak.norm() < tol {
        return b.iter().all(|x| x.norm() <= tol);
    }
    if bk.norm() < 1e-300 {
        return false;
    }
    let phase = (ak / ak.norm()) / (bk / bk.norm());
    a.iter().zip(b).all(|(x, y)| (x - y * phase).norm() <= tol)
}

/// Largest per-amplitude deviation between `a` and `b` after removing the
/// relative global phase (taken from `<b|a>`). Returns infinity on length
/// mismatch or when exactly one of the vectors vanishes.
pub fn max_diff_up_to_global_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let overlap: Complex64 = b.iter().zip(a).map(|(y, x)| y.conj() * x).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else if a.iter().chain(b).all(|x| x.norm() == 0.0) {
        Complex64::new(1.0, 0.0)
    } else {
        return a.iter().chain(b).map(|x| x.norm()).fold(0.0, f64::max);
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

/// `v / |v|`, or `None` for the zero vector.
pub fn normalized(v: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}
