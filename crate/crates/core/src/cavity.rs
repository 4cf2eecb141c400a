//! Reflection coefficients of a low-Q cavity, with and without a trapped
//! three-level atom, and the Faraday phase pair they imprint on a reflected
//! single photon.
//!
//! All frequencies and rates share one arbitrary unit; only ratios matter.
//! The presets express everything relative to `kappa = 1`.
//!
//! The coupling constant is called `lambda` throughout. Some texts write the
//! same quantity as `g` when quoting the standard tuning `g = kappa / 2`;
//! the two names refer to one parameter here.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Denominator magnitudes below this are treated as a singular parameter set.
pub const SINGULARITY_EPS: f64 = 1e-15;

/// Tolerance used to decide whether a reflection coefficient is a pure phase.
pub const UNIT_MAGNITUDE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CavityError {
    #[error("invalid cavity parameters: {0}")]
    InvalidParams(String),
    #[error("reflection coefficient is singular (|denominator| = {denominator:e})")]
    Singular { denominator: f64 },
    #[error("|r| = {magnitude} is not a pure phase; strict mode refuses lossy interactions")]
    NonUnitMagnitude { magnitude: f64 },
    #[error("unknown cavity preset `{0}`")]
    UnknownPreset(String),
    #[error("failed to read cavity config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed cavity config: {0}")]
    Json(#[from] serde_json::Error),
}

const STANDARD_TUNING_JSON: &str = include_str!("../data/presets/standard-tuning.json");

/// Frequencies and rates feeding the input-output reflection relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Cavity mode frequency.
    pub omega_c: f64,
    /// Atomic transition frequency.
    pub omega_0: f64,
    /// Frequency of the injected photon.
    pub omega_p: f64,
    /// Cavity field damping rate.
    pub kappa: f64,
    /// Atomic damping rate.
    pub gamma: f64,
    /// Atom-field coupling constant.
    pub lambda: f64,
}

impl CavityParams {
    /// Photon red-detuned by `kappa / 2` from a resonant atom-cavity pair
    /// with `lambda = kappa / 2` and no atomic loss. Produces the phase pair
    /// `(pi, pi/2)`.
    pub fn standard_tuning() -> Self {
        Self {
            omega_c: 0.0,
            omega_0: 0.0,
            omega_p: -0.5,
            kappa: 1.0,
            gamma: 0.0,
            lambda: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        let fields = [
            ("omega_c", self.omega_c),
            ("omega_0", self.omega_0),
            ("omega_p", self.omega_p),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(CavityError::InvalidParams(format!("{name} is not finite")));
        }
        if self.kappa <= 0.0 {
            return Err(CavityError::InvalidParams(format!(
                "kappa must be > 0, got {}",
                self.kappa
            )));
        }
        if self.gamma < 0.0 {
            return Err(CavityError::InvalidParams(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if self.lambda < 0.0 {
            return Err(CavityError::InvalidParams(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Built-in named presets.
    pub fn preset(name: &str) -> Result<Self, CavityError> {
        match name {
            "standard-tuning" => Self::from_json_str(STANDARD_TUNING_JSON),
            other => Err(CavityError::UnknownPreset(other.to_string())),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, CavityError> {
        let params: Self = serde_json::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, CavityError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Reflection coefficient of the coupled atom-cavity system at the photon
/// frequency.
pub fn reflection(params: &CavityParams) -> Result<Complex64, CavityError> {
    params.validate()?;
    let i = Complex64::i();
    let cavity_detuning = params.omega_c - params.omega_p;
    let atom_term = i * (params.omega_0 - params.omega_p) + params.gamma / 2.0;
    let coupling = params.lambda * params.lambda;

    let num = (i * cavity_detuning - params.kappa / 2.0) * atom_term + coupling;
    let den = (i * cavity_detuning + params.kappa / 2.0) * atom_term + coupling;
    if den.norm() < SINGULARITY_EPS {
        return Err(CavityError::Singular {
            denominator: den.norm(),
        });
    }
    Ok(num / den)
}

/// Reflection coefficient of the empty cavity. Always a pure phase.
pub fn reflection_empty(params: &CavityParams) -> Result<Complex64, CavityError> {
    params.validate()?;
    let i = Complex64::i();
    let cavity_detuning = params.omega_c - params.omega_p;
    let num = i * cavity_detuning - params.kappa / 2.0;
    let den = i * cavity_detuning + params.kappa / 2.0;
    Ok(num / den)
}

/// Principal argument mapped onto `(-pi, pi]`.
///
/// `atan2` returns `-pi` for a negative real axis approached from below
/// (including a signed zero imaginary part); that point is folded onto `+pi`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI + f64::EPSILON {
        a + 2.0 * PI
    } else {
        a
    }
}

/// How a cavity interaction with `|r| != 1` is treated by the gate layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePolicy {
    /// Reject any interaction whose reflection magnitudes differ from one.
    #[default]
    Strict,
    /// Apply only the phases and report `|r|` as a success weight.
    Renormalize,
}

/// Phases (and magnitudes) picked up by a reflected photon: `phi` when the
/// photon couples to the atom, `phi0` when it only sees the empty cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaradayPhases {
    pub phi: f64,
    pub phi0: f64,
    pub mag: f64,
    pub mag0: f64,
}

impl FaradayPhases {
    /// Lossless phase pair.
    pub fn ideal(phi: f64, phi0: f64) -> Self {
        Self {
            phi,
            phi0,
            mag: 1.0,
            mag0: 1.0,
        }
    }

    /// `(pi, pi/2)`, the pair obtained at standard tuning.
    pub fn standard() -> Self {
        Self::ideal(PI, FRAC_PI_2)
    }

    /// Rotation of the polarization direction when the atom is in `|0>`.
    pub fn theta_minus(&self) -> f64 {
        (self.phi0 - self.phi) / 2.0
    }

    /// Rotation of the polarization direction when the atom is in `|1>`.
    pub fn theta_plus(&self) -> f64 {
        (self.phi - self.phi0) / 2.0
    }

    pub fn is_lossless(&self) -> bool {
        (self.mag - 1.0).abs() <= UNIT_MAGNITUDE_TOL
            && (self.mag0 - 1.0).abs() <= UNIT_MAGNITUDE_TOL
    }

    /// Checks the pair against `policy` and returns the success weight of one
    /// interaction: `1` for lossless phases, `min(|r|, |r0|)` when
    /// renormalizing a lossy pair.
    pub fn admit(&self, policy: PhasePolicy) -> Result<f64, CavityError> {
        if self.is_lossless() {
            return Ok(1.0);
        }
        match policy {
            PhasePolicy::Strict => Err(CavityError::NonUnitMagnitude {
                magnitude: if (self.mag - 1.0).abs() > UNIT_MAGNITUDE_TOL {
                    self.mag
                } else {
                    self.mag0
                },
            }),
            PhasePolicy::Renormalize => Ok(self.mag.min(self.mag0)),
        }
    }
}

/// Phases of the atom-cavity and empty-cavity reflection coefficients.
pub fn faraday_phases(params: &CavityParams) -> Result<FaradayPhases, CavityError> {
    let r = reflection(params)?;
    let r0 = reflection_empty(params)?;
    Ok(FaradayPhases {
        phi: principal_arg(r),
        phi0: principal_arg(r0),
        mag: r.norm(),
        mag0: r0.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(omega_c: f64, omega_0: f64, omega_p: f64, gamma: f64, lambda: f64) -> CavityParams {
        CavityParams {
            omega_c,
            omega_0,
            omega_p,
            kappa: 1.0,
            gamma,
            lambda,
        }
    }

    #[test]
    fn standard_tuning_reflects_with_minus_one() {
        let r = reflection(&CavityParams::standard_tuning()).unwrap();
        assert!((r - Complex64::new(-1.0, 0.0)).norm() < 1e-15, "{r}");
    }

    #[test]
    fn standard_tuning_phases() {
        let p = faraday_phases(&CavityParams::standard_tuning()).unwrap();
        assert!((p.phi - PI).abs() < 1e-12, "phi = {}", p.phi);
        assert!((p.phi0 - FRAC_PI_2).abs() < 1e-12, "phi0 = {}", p.phi0);
        assert!((p.theta_minus() + PI / 4.0).abs() < 1e-12);
        assert!((p.theta_plus() - PI / 4.0).abs() < 1e-12);
        assert!(p.is_lossless());
    }

    #[test]
    fn empty_cavity_at_standard_detuning_is_i() {
        let r0 = reflection_empty(&CavityParams::standard_tuning()).unwrap();
        assert!((r0 - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn empty_cavity_on_resonance_is_minus_one() {
        let r0 = reflection_empty(&params(0.0, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((r0 + 1.0).norm() < 1e-15);
    }

    #[test]
    fn empty_cavity_far_detuned_phase_vanishes() {
        for detuning in [1e6, -1e6] {
            let r0 = reflection_empty(&params(0.0, 0.0, detuning, 0.0, 0.0)).unwrap();
            // 40-digit evaluation: arg = -/+ 9.999999999999166e-7
            let expected = -detuning.signum() * 9.999_999_999_999_166e-7;
            assert!((principal_arg(r0) - expected).abs() < 1e-15);
            assert!(principal_arg(r0).abs() < 1e-5);
        }
    }

    #[test]
    fn resonant_strong_coupling_regression() {
        // omega_p = omega_c = omega_0, lambda = kappa: numerator and
        // denominator both reduce to lambda^2, so r = 1 exactly.
        let r = reflection(&params(0.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lossy_atom_regression() {
        // Frozen from a 40-digit evaluation of the reflection relation.
        let mut p = CavityParams::standard_tuning();
        p.gamma = 0.01;
        let r = reflection(&p).unwrap();
        assert!((r.re - (-0.980_199_960_792_001_6)).abs() < 1e-14);
        assert!((r.im - 1.960_399_921_584_003e-4).abs() < 1e-14);
        let ph = faraday_phases(&p).unwrap();
        assert!((ph.mag - 0.980_199_980_396_000_6).abs() < 1e-14);
        assert!((ph.phi - PI - (-1.999_999_973_333_334e-4)).abs() < 1e-14);
        assert!((ph.phi0 - FRAC_PI_2).abs() < 1e-12);
        assert!(!ph.is_lossless());
    }

    #[test]
    fn generic_regression() {
        let p = CavityParams {
            omega_c: 0.3,
            omega_0: -0.2,
            omega_p: 0.1,
            kappa: 1.0,
            gamma: 0.05,
            lambda: 0.7,
        };
        let r = reflection(&p).unwrap();
        assert!((r.re - 0.829_409_694_567_411_9).abs() < 1e-14);
        assert!((r.im - 0.489_358_943_488_488_4).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_equal_phases() {
        let p = params(0.1, 0.4, -0.3, 0.0, 0.0);
        let ph = faraday_phases(&p).unwrap();
        assert!((ph.phi - ph.phi0).abs() < 1e-12);
        assert!(ph.theta_minus().abs() < 1e-12);
    }

    #[test]
    fn singular_parameters_are_reported() {
        // gamma = 0, omega_0 = omega_p and lambda = 0 makes both numerator
        // and denominator vanish.
        let p = params(0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(reflection(&p), Err(CavityError::Singular { .. })));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = CavityParams::standard_tuning();
        p.kappa = 0.0;
        assert!(matches!(reflection(&p), Err(CavityError::InvalidParams(_))));
        p.kappa = 1.0;
        p.gamma = -0.1;
        assert!(reflection(&p).is_err());
        p.gamma = 0.0;
        p.lambda = f64::NAN;
        assert!(reflection(&p).is_err());
    }

    #[test]
    fn strict_policy_rejects_lossy_pair() {
        let mut p = CavityParams::standard_tuning();
        p.gamma = 0.01;
        let ph = faraday_phases(&p).unwrap();
        assert!(matches!(
            ph.admit(PhasePolicy::Strict),
            Err(CavityError::NonUnitMagnitude { .. })
        ));
        let w = ph.admit(PhasePolicy::Renormalize).unwrap();
        assert!((w - ph.mag).abs() < 1e-15);
        assert_eq!(
            FaradayPhases::standard()
                .admit(PhasePolicy::Strict)
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn principal_arg_folds_negative_real_axis() {
        assert_eq!(principal_arg(Complex64::new(-1.0, -0.0)), PI);
        assert_eq!(principal_arg(Complex64::new(-1.0, 0.0)), PI);
        assert!((principal_arg(Complex64::new(0.0, -1.0)) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let p = CavityParams::from_json_str(
            r#"{"omega_c":0,"omega_0":0,"omega_p":-0.5,"kappa":1,"gamma":0,"lambda":0.5}"#,
        )
        .unwrap();
        assert_eq!(p, CavityParams::standard_tuning());
        assert!(CavityParams::from_json_str(r#"{"omega_c":0}"#).is_err());
        assert!(CavityParams::from_json_str(
            r#"{"omega_c":0,"omega_0":0,"omega_p":-0.5,"kappa":1,"gamma":0,"lambda":0.5,"g":1}"#
        )
        .is_err());
        assert!(matches!(
            CavityParams::preset("nope"),
            Err(CavityError::UnknownPreset(_))
        ));
    }

    fn arb_params() -> impl Strategy<Value = CavityParams> {
        (
            -5.0..5.0f64,
            -5.0..5.0f64,
            -5.0..5.0f64,
            0.05..5.0f64,
            0.0..2.0f64,
            0.0..3.0f64,
        )
            .prop_map(
                |(omega_c, omega_0, omega_p, kappa, gamma, lambda)| CavityParams {
                    omega_c,
                    omega_0,
                    omega_p,
                    kappa,
                    gamma,
                    lambda,
                },
            )
    }

    proptest! {
        #[test]
        fn empty_cavity_is_pure_phase(p in arb_params()) {
            let r0 = reflection_empty(&p).unwrap();
            prop_assert!((r0.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lossless_atom_cavity_is_pure_phase(mut p in arb_params()) {
            p.gamma = 0.0;
            if let Ok(r) = reflection(&p) {
                prop_assert!((r.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn lossy_atom_cavity_never_amplifies(p in arb_params()) {
            if let Ok(r) = reflection(&p) {
                prop_assert!(r.norm() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn zero_coupling_matches_empty_cavity(mut p in arb_params()) {
            p.lambda = 0.0;
            if let Ok(r) = reflection(&p) {
                let r0 = reflection_empty(&p).unwrap();
                prop_assert!((r - r0).norm() < 1e-12);
            }
        }

        #[test]
        fn phases_lie_in_principal_range(p in arb_params()) {
            if let Ok(ph) = faraday_phases(&p) {
                prop_assert!(ph.phi > -PI && ph.phi <= PI);
                prop_assert!(ph.phi0 > -PI && ph.phi0 <= PI);
            }
        }
    }
}
