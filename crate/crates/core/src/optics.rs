//! Fixed single-subsystem operations: the two quarter-wave plates acting on
//! the photon's `{L, R}` basis and the Hadamard on an atom.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qreg::Mat2;

/// The two wave plates. Each is fixed by the pair of polarization states it
/// sends to `|L>` and `|R>`:
///
/// * `Qwp1`: `(|L> + i|R>)/sqrt(2) -> |L>`, `(|L> - i|R>)/sqrt(2) -> |R>`
/// * `Qwp2`: `(|L> + |R>)/sqrt(2) -> |L>`, `(|L> - |R>)/sqrt(2) -> |R>`
///
/// The global phase of each matrix is chosen so the first column is real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WavePlateKind {
    #[serde(rename = "QWP1")]
    Qwp1,
    #[serde(rename = "QWP2")]
    Qwp2,
}

impl WavePlateKind {
    /// Plate that closes a photon path touching `controls` control atoms:
    /// `Qwp1` for an odd count, `Qwp2` for an even one.
    pub fn for_control_count(controls: usize) -> Self {
        if controls % 2 == 1 {
            WavePlateKind::Qwp1
        } else {
            WavePlateKind::Qwp2
        }
    }

    pub fn other(self) -> Self {
        match self {
            WavePlateKind::Qwp1 => WavePlateKind::Qwp2,
            WavePlateKind::Qwp2 => WavePlateKind::Qwp1,
        }
    }
}

impl fmt::Display for WavePlateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WavePlateKind::Qwp1 => "QWP1",
            WavePlateKind::Qwp2 => "QWP2",
        })
    }
}

impl FromStr for WavePlateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "QWP1" => Ok(WavePlateKind::Qwp1),
            "QWP2" => Ok(WavePlateKind::Qwp2),
            other => Err(format!("unknown wave plate `{other}`")),
        }
    }
}

pub fn qwp_matrix(kind: WavePlateKind) -> Mat2 {
    let h = FRAC_1_SQRT_2;
    match kind {
        WavePlateKind::Qwp1 => Mat2::new(
            Complex64::new(h, 0.0),
            Complex64::new(0.0, -h),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
        ),
        WavePlateKind::Qwp2 => Mat2::real(h, h, h, -h),
    }
}

/// Hadamard in the atomic `{|0>, |1>}` basis.
pub fn hadamard_atom() -> Mat2 {
    let h = FRAC_1_SQRT_2;
    Mat2::real(h, h, h, -h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(v: [Complex64; 2], e: [Complex64; 2]) -> bool {
        (v[0] - e[0]).norm() < 1e-12 && (v[1] - e[1]).norm() < 1e-12
    }

    const H: f64 = FRAC_1_SQRT_2;

    #[test]
    fn qwp1_defining_map() {
        let m = qwp_matrix(WavePlateKind::Qwp1);
        assert!(close(
            m.apply([c(H, 0.0), c(0.0, H)]),
            [c(1.0, 0.0), c(0.0, 0.0)]
        ));
        assert!(close(
            m.apply([c(H, 0.0), c(0.0, -H)]),
            [c(0.0, 0.0), c(1.0, 0.0)]
        ));
    }

    #[test]
    fn qwp2_defining_map() {
        let m = qwp_matrix(WavePlateKind::Qwp2);
        assert!(close(
            m.apply([c(H, 0.0), c(H, 0.0)]),
            [c(1.0, 0.0), c(0.0, 0.0)]
        ));
        assert!(close(
            m.apply([c(H, 0.0), c(-H, 0.0)]),
            [c(0.0, 0.0), c(1.0, 0.0)]
        ));
    }

    #[test]
    fn plates_are_unitary() {
        for k in [WavePlateKind::Qwp1, WavePlateKind::Qwp2] {
            assert!(qwp_matrix(k).is_unitary(1e-12), "{k}");
        }
        assert!(hadamard_atom().is_unitary(1e-12));
    }

    #[test]
    fn qwp2_is_an_involution() {
        let m = qwp_matrix(WavePlateKind::Qwp2);
        assert!(m.mul(&m).max_abs_diff(&Mat2::identity()) < 1e-12);
    }

    #[test]
    fn qwp1_is_qwp2_after_phase_gate() {
        // QWP1 = QWP2 · diag(1, -i). The diag(1, +i) composition differs
        // by more than a global phase.
        let s_dag = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        let composed = qwp_matrix(WavePlateKind::Qwp2).mul(&s_dag);
        assert!(composed.max_abs_diff(&qwp_matrix(WavePlateKind::Qwp1)) < 1e-12);

        let s = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
        let wrong = qwp_matrix(WavePlateKind::Qwp2).mul(&s);
        let q1 = qwp_matrix(WavePlateKind::Qwp1).0;
        let phase = q1[0][0] / wrong.0[0][0];
        assert!(
            wrong
                .scale(phase)
                .max_abs_diff(&qwp_matrix(WavePlateKind::Qwp1))
                > 1.0
        );
    }

    #[test]
    fn first_columns_are_real() {
        for k in [WavePlateKind::Qwp1, WavePlateKind::Qwp2] {
            let m = qwp_matrix(k).0;
            assert_eq!(m[0][0].im, 0.0);
            assert_eq!(m[1][0].im, 0.0);
        }
    }

    #[test]
    fn hadamard_on_basis_states() {
        let h = hadamard_atom();
        assert!(close(
            h.apply([c(1.0, 0.0), c(0.0, 0.0)]),
            [c(H, 0.0), c(H, 0.0)]
        ));
        assert!(close(
            h.apply([c(0.0, 0.0), c(1.0, 0.0)]),
            [c(H, 0.0), c(-H, 0.0)]
        ));
    }

    #[test]
    fn parity_rule() {
        assert_eq!(WavePlateKind::for_control_count(1), WavePlateKind::Qwp1);
        assert_eq!(WavePlateKind::for_control_count(2), WavePlateKind::Qwp2);
        assert_eq!(WavePlateKind::for_control_count(0), WavePlateKind::Qwp2);
        assert_eq!(WavePlateKind::Qwp1.other(), WavePlateKind::Qwp2);
        assert_eq!(
            "qwp1".parse::<WavePlateKind>().unwrap(),
            WavePlateKind::Qwp1
        );
    }
}
