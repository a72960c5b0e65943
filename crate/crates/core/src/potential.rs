//! Interaction potentials between dressed (or bare) Rydberg atoms.
//!
//! Units throughout the crate: lengths in μm, times in μs, frequencies and
//! rates as angular frequencies in rad/μs (ħ = 1). `C6` carries rad/μs·μm⁶.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dressing fraction above which the perturbative spin model is suspect.
pub const DRESSING_WARN_THRESHOLD: f64 = 0.3;

/// Optical dressing parameters and the van der Waals coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressingParams {
    /// Dressing Rabi frequency Ω₂ (rad/μs).
    pub rabi: f64,
    /// Signed dressing detuning Δ₂ (rad/μs).
    pub detuning: f64,
    /// Signed van der Waals coefficient (rad/μs·μm⁶).
    pub c6: f64,
}

impl DressingParams {
    pub fn new(rabi: f64, detuning: f64, c6: f64) -> Self {
        Self { rabi, detuning, c6 }
    }

    /// Rydberg admixture ε = Ω₂ / (2Δ₂).
    pub fn epsilon(&self) -> f64 {
        self.rabi / (2.0 * self.detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// Dressed soft-core potential ε⁴C₆ / (r_c⁶ + r⁶).
    SoftCore,
    /// Bare van der Waals potential C₆ / r⁶ (ε = 1, r_c = 0).
    BareVdW,
}

/// A pair potential V(r) together with its derived scales.
///
/// For the soft core, `v0` is the core height V(0) = ε⁴C₆/r_c⁶, whose
/// magnitude is ε⁴·2|Δ₂| and whose sign follows C₆. The bare potential has
/// no finite core and reports `None` from [`InteractionPotential::core_height`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionPotential {
    kind: PotentialKind,
    epsilon: f64,
    r_c: f64,
    v0: f64,
    c6: f64,
}

impl InteractionPotential {
    /// Soft-core potential from its core height and radius directly.
    ///
    /// The tail coefficient is fixed by V(0)·r_c⁶, so `c6` is stored as the
    /// bare coefficient for ε = `epsilon`.
    pub fn soft_core(v0: f64, r_c: f64, epsilon: f64) -> Result<Self> {
        if !(r_c > 0.0) || !r_c.is_finite() {
            return Err(Error::Parameter(format!("soft-core radius must be positive, got {r_c}")));
        }
        if !v0.is_finite() {
            return Err(Error::Parameter("core height must be finite".into()));
        }
        if epsilon == 0.0 {
            return Err(Error::Parameter("soft_core needs a nonzero dressing fraction".into()));
        }
        let c6 = v0 * r_c.powi(6) / epsilon.powi(4);
        Ok(Self { kind: PotentialKind::SoftCore, epsilon, r_c, v0, c6 })
    }

    /// Bare van der Waals potential C₆/r⁶.
    pub fn bare(c6: f64) -> Result<Self> {
        if c6 == 0.0 || !c6.is_finite() {
            return Err(Error::Parameter(format!("bare potential needs a finite nonzero C6, got {c6}")));
        }
        Ok(Self { kind: PotentialKind::BareVdW, epsilon: 1.0, r_c: 0.0, v0: f64::NAN, c6 })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Soft-core radius (μm); zero for the bare potential.
    pub fn r_c(&self) -> f64 {
        self.r_c
    }

    /// Bare van der Waals coefficient C₆.
    pub fn c6(&self) -> f64 {
        self.c6
    }

    /// Core height V(0), if the potential has a finite core.
    pub fn core_height(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::SoftCore => Some(self.v0),
            PotentialKind::BareVdW => None,
        }
    }

    /// Coefficient of the 1/r⁶ tail, ε⁴C₆.
    pub fn tail_coefficient(&self) -> f64 {
        self.epsilon.powi(4) * self.c6
    }

    /// V(r) in rad/μs.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("distance must be non-negative, got {r}")));
        }
        if self.kind == PotentialKind::BareVdW && r == 0.0 {
            return Err(Error::Singularity(r));
        }
        Ok(self.at(r))
    }

    /// Unchecked evaluation for hot loops; `r` must be valid.
    #[inline]
    pub(crate) fn at(&self, r: f64) -> f64 {
        let r6 = r.powi(6);
        match self.kind {
            // v0 / (1 + (r/r_c)^6) keeps V(0) = v0 exactly
            PotentialKind::SoftCore => self.v0 / (1.0 + r6 / self.r_c.powi(6)),
            PotentialKind::BareVdW => self.c6 / r6,
        }
    }

    /// Same as [`Self::at`] but from a squared distance.
    #[inline]
    pub(crate) fn at_squared(&self, r2: f64) -> f64 {
        let r6 = r2 * r2 * r2;
        match self.kind {
            PotentialKind::SoftCore => self.v0 / (1.0 + r6 / self.r_c.powi(6)),
            PotentialKind::BareVdW => self.c6 / r6,
        }
    }

    /// Mean number of atoms inside r_c, N_R = 4πρr_c³/3.
    pub fn blockade_number(&self, density: f64) -> f64 {
        blockade_number(density, self)
    }
}

/// Builds the potential implied by a set of dressing parameters.
pub fn derive_potential(p: &DressingParams, kind: PotentialKind) -> Result<InteractionPotential> {
    if !p.c6.is_finite() || !p.rabi.is_finite() || !p.detuning.is_finite() {
        return Err(Error::Parameter("dressing parameters must be finite".into()));
    }
    match kind {
        PotentialKind::BareVdW => InteractionPotential::bare(p.c6),
        PotentialKind::SoftCore => {
            if p.detuning == 0.0 {
                return Err(Error::Parameter("soft core requires a nonzero detuning".into()));
            }
            if p.c6 == 0.0 {
                return Err(Error::Parameter("soft core requires a nonzero C6".into()));
            }
            if p.detuning / p.c6 >= 0.0 {
                return Err(Error::UnsupportedRegime(format!(
                    "soft core needs Δ2/C6 < 0 (got Δ2 = {}, C6 = {})",
                    p.detuning, p.c6
                )));
            }
            let epsilon = p.epsilon();
            if epsilon.abs() > DRESSING_WARN_THRESHOLD {
                log::warn!("dressing fraction |ε| = {:.3} is not small; spin model may be inaccurate", epsilon.abs());
            }
            let r_c = (p.c6 / (2.0 * p.detuning)).abs().powf(1.0 / 6.0);
            let v0 = epsilon.powi(4) * 2.0 * p.detuning.abs() * p.c6.signum();
            Ok(InteractionPotential { kind, epsilon, r_c, v0, c6: p.c6 })
        }
    }
}

/// N_R = 4πρr_c³/3; zero for the bare potential.
pub fn blockade_number(density: f64, pot: &InteractionPotential) -> f64 {
    4.0 * PI * density * pot.r_c.powi(3) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn soft() -> InteractionPotential {
        // ε = 0.1, 2|Δ2| = 1e4 → |V0| = 1
        derive_potential(&DressingParams::new(-1000.0, -5000.0, 3.0e4), PotentialKind::SoftCore).unwrap()
    }

    #[test]
    fn no_dressing_gives_zero_height() {
        let p = derive_potential(&DressingParams::new(0.0, -50.0, 100.0), PotentialKind::SoftCore).unwrap();
        assert_eq!(p.epsilon(), 0.0);
        assert_eq!(p.core_height(), Some(0.0));
    }

    #[test]
    fn core_height_arithmetic() {
        let p = soft();
        assert_relative_eq!(p.epsilon(), 0.1);
        assert_relative_eq!(p.core_height().unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.r_c(), 3.0f64.powf(1.0 / 6.0), max_relative = 1e-14);
    }

    #[test]
    fn core_height_sign_follows_c6() {
        let p = derive_potential(&DressingParams::new(1000.0, 5000.0, -3.0e4), PotentialKind::SoftCore).unwrap();
        assert!(p.core_height().unwrap() < 0.0);
        assert!(p.evaluate(0.3).unwrap() < 0.0);
    }

    #[test]
    fn soft_core_special_points() {
        let p = soft();
        let v0 = p.core_height().unwrap();
        assert_eq!(p.evaluate(0.0).unwrap(), v0);
        assert_relative_eq!(p.evaluate(p.r_c()).unwrap(), v0 / 2.0, max_relative = 1e-15);
        let far = p.evaluate(10.0 * p.r_c()).unwrap();
        assert_relative_eq!(far, v0 / (1.0 + 1.0e6), max_relative = 1e-12);
    }

    #[test]
    fn tail_approaches_dressed_c6() {
        let p = soft();
        for k in [10.0, 20.0, 100.0] {
            let r = k * p.r_c();
            let ratio = p.evaluate(r).unwrap() * r.powi(6) / p.tail_coefficient();
            assert!((ratio - 1.0).abs() < 1e-3, "ratio {ratio} at {k} r_c");
        }
    }

    #[test]
    fn bare_potential() {
        let p = InteractionPotential::bare(-250.0).unwrap();
        assert_eq!(p.r_c(), 0.0);
        assert_eq!(p.epsilon(), 1.0);
        assert_relative_eq!(p.evaluate(2.0).unwrap(), -250.0 / 64.0);
        assert!(matches!(p.evaluate(0.0), Err(Error::Singularity(_))));
        assert_eq!(p.blockade_number(3.0), 0.0);
    }

    #[test]
    fn derive_rejects_bad_regimes() {
        assert!(matches!(
            derive_potential(&DressingParams::new(1.0, 0.0, 1.0), PotentialKind::SoftCore),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            derive_potential(&DressingParams::new(1.0, 10.0, 1.0), PotentialKind::SoftCore),
            Err(Error::UnsupportedRegime(_))
        ));
        assert!(derive_potential(&DressingParams::new(1.0, 10.0, 0.0), PotentialKind::BareVdW).is_err());
        assert!(matches!(soft().evaluate(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn blockade_number_values() {
        let p = InteractionPotential::soft_core(1.0, 1.0, 0.1).unwrap();
        assert_eq!(p.blockade_number(0.0), 0.0);
        assert_relative_eq!(p.blockade_number(3.0 / (4.0 * PI)), 1.0, max_relative = 1e-15);
        let q = soft();
        // 1e12 cm^-3 = 1 μm^-3, hand evaluation of 4πρr_c³/3 with r_c³ = √3
        assert_relative_eq!(q.blockade_number(1.0), 4.0 * PI * 3.0f64.sqrt() / 3.0, max_relative = 1e-14);
        assert_eq!(q.blockade_number(2.0), 2.0 * q.blockade_number(1.0));
    }

    #[test]
    fn soft_core_constructor_round_trip() {
        let p = soft();
        let q = InteractionPotential::soft_core(p.core_height().unwrap(), p.r_c(), p.epsilon()).unwrap();
        assert_relative_eq!(q.c6(), p.c6(), max_relative = 1e-12);
    }
}
