use num_complex::Complex64;

use super::ProtocolError;
use crate::notation::LinearParts;
use crate::qreg::{PauliOp, QuantumRegister};

/// A candidate is accepted once its fidelity reaches `1 - CORRECTION_TOL`.
pub const CORRECTION_TOL: f64 = 1e-10;
/// Below `1 - CORRECTION_FLOOR` no candidate is returned at all.
pub const CORRECTION_FLOOR: f64 = 1e-8;

/// Fidelity of `op · residual` with `intended`. Both registers must hold the
/// same labels; `op` acts on them in `intended`'s order.
pub fn correction_fidelity(
    op: &PauliOp,
    residual: &QuantumRegister,
    intended: &QuantumRegister,
) -> Result<f64, ProtocolError> {
    let labels: Vec<&str> = intended.labels().collect();
    let mut corrected = residual.reorder(&labels)?;
    corrected.apply_pauli(op, &labels)?;
    Ok(corrected.fidelity(intended)?)
}

/// Searches `{I, X, Z, ZX}` on every target in canonical order (`I < X < Z
/// < ZX`, first target most significant) and returns the first candidate
/// that maps `residual` onto `intended` up to a global phase.
pub fn synthesize_correction(
    residual: &QuantumRegister,
    intended: &QuantumRegister,
) -> Result<PauliOp, ProtocolError> {
    search(intended.num_subsystems(), |op| {
        correction_fidelity(op, residual, intended)
    })
}

/// Applies `op` to an amplitude vector over `n` qubits, first factor on the
/// most significant bit.
fn apply_pauli_vec(op: &PauliOp, v: &[Complex64]) -> Vec<Complex64> {
    let n = op.factors.len();
    let mut out = v.to_vec();
    for (pos, p) in op.factors.iter().enumerate() {
        let m = p.matrix().0;
        let bit = 1usize << (n - 1 - pos);
        for i in 0..out.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (out[i], out[j]);
                out[i] = m[0][0] * a + m[0][1] * b;
                out[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
    out
}

/// How well `op` corrects a residual for every payload at once: the squared
/// overlap between `op` applied to the stacked `(alpha, beta, const)`
/// components of `residual` and those of `intended`, after normalizing both.
/// Equals one exactly when a single global phase relates the corrected
/// residual and the intended state for all payloads.
pub fn universal_fidelity(op: &PauliOp, residual: &LinearParts, intended: &LinearParts) -> f64 {
    let corrected = LinearParts {
        constant: apply_pauli_vec(op, &residual.constant),
        alpha: apply_pauli_vec(op, &residual.alpha),
        beta: apply_pauli_vec(op, &residual.beta),
    }
    .flat();
    let target = intended.flat();
    let overlap: Complex64 = target
        .iter()
        .zip(&corrected)
        .map(|(t, c)| t.conj() * c)
        .sum();
    let nc: f64 = corrected.iter().map(|c| c.norm_sqr()).sum();
    let nt: f64 = target.iter().map(|c| c.norm_sqr()).sum();
    if nc == 0.0 || nt == 0.0 {
        return 0.0;
    }
    overlap.norm_sqr() / (nc * nt)
}

/// Payload-independent variant of [`synthesize_correction`]: the residual
/// is given symbolically as a linear form in `(alpha, beta)`.
pub fn synthesize_universal_correction(
    residual: &LinearParts,
    intended: &LinearParts,
    arity: usize,
) -> Result<PauliOp, ProtocolError> {
    search(arity, |op| Ok(universal_fidelity(op, residual, intended)))
}

fn search(
    arity: usize,
    mut fidelity: impl FnMut(&PauliOp) -> Result<f64, ProtocolError>,
) -> Result<PauliOp, ProtocolError> {
    let mut best: Option<(PauliOp, f64)> = None;
    for op in PauliOp::enumerate(arity) {
        let f = fidelity(&op)?;
        if f >= 1.0 - CORRECTION_TOL {
            return Ok(op);
        }
        if best.as_ref().is_none_or(|(_, b)| f > *b) {
            best = Some((op, f));
        }
    }
    let (op, f) = best.expect("at least one candidate");
    if f >= 1.0 - CORRECTION_FLOOR {
        Ok(op)
    } else {
        Err(ProtocolError::NoPauliCorrection {
            best: op,
            best_fidelity: f,
        })
    }
}
