//! Disorder-averaged Ramsey dynamics of a uniform frozen gas.
//!
//! Averaging the per-configuration product over independent uniform
//! positions gives, per spin and in the thermodynamic limit,
//!
//! ```text
//! ⟨σ⁺(t)⟩ = sin θ · D(γ,t) · e^{−γ_d t} · exp(−I(t)),
//! I(t) = ρ ∫ 4πr² [1 − f(V(r)t)] dr.
//! ```
//!
//! The sin θ factor is included so that ρ → 0 recovers the single-spin
//! value; drop it to compare with conventions that normalise C(0) to 1.

mod asymptotic;
mod integral;
mod monte_carlo;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{decay_prefactor, EchoModel, RamseyProtocol};
use crate::potential::{derive_potential, DressingParams, InteractionPotential, PotentialKind};

pub use asymptotic::{
    asymptotic_contrast, fit_high_density_b, low_density_coefficient, Asymptotic, Regime, DEFAULT_HIGH_DENSITY_B,
};
pub use integral::{bare_exponent, soft_core_exponent};
pub use monte_carlo::{
    monte_carlo_gas, monte_carlo_gas_times, recommended_atoms, sample_configuration, McEstimate, McOptions,
};

/// A uniform gas: density, pair potential and Ramsey protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasSpec {
    density: f64,
    potential: InteractionPotential,
    protocol: RamseyProtocol,
    blockade_number: f64,
}

impl GasSpec {
    /// `density` in μm⁻³, strictly positive.
    pub fn new(density: f64, potential: InteractionPotential, protocol: RamseyProtocol) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::Parameter(format!("density must be positive, got {density}")));
        }
        Ok(Self { density, potential, protocol, blockade_number: potential.blockade_number(density) })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn potential(&self) -> &InteractionPotential {
        &self.potential
    }

    pub fn protocol(&self) -> &RamseyProtocol {
        &self.protocol
    }

    /// N_R = 4πρr_c³/3 (zero for the bare potential).
    pub fn blockade_number(&self) -> f64 {
        self.blockade_number
    }

    pub fn with_protocol(&self, protocol: RamseyProtocol) -> Self {
        Self { protocol, ..*self }
    }

    pub fn with_density(&self, density: f64) -> Result<Self> {
        Self::new(density, self.potential, self.protocol)
    }
}

fn check_gas_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("gas observables need a finite t ≥ 0, got {t}")));
    }
    Ok(())
}

/// I(t), the exponent of the disorder average.
pub fn exponent_integral(spec: &GasSpec, t: f64) -> Result<Complex64> {
    check_gas_time(t)?;
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kernel = spec.protocol.kernel(t);
    let pot = &spec.potential;
    match pot.core_height() {
        Some(v0) => Ok(spec.blockade_number * soft_core_exponent(v0 * t, &kernel)?),
        None => {
            let scale = 4.0 * PI / 3.0 * spec.density * (pot.c6().abs() * t).sqrt();
            Ok(scale * bare_exponent(pot.c6().signum(), &kernel)?)
        }
    }
}

/// Per-spin ⟨σ⁺(t)⟩ of the infinite gas.
pub fn contrast_gas(spec: &GasSpec, t: f64) -> Result<Complex64> {
    let i = exponent_integral(spec, t)?;
    Ok(spec.protocol.single_spin_prefactor(t) * (-i).exp())
}

/// Per-spin ⟨σ⁺(t)⟩ for `n` atoms in the volume n/ρ:
/// sin θ·D·e^{−γ_d t}·[1 − I/n]^{n−1}.
pub fn contrast_gas_finite_n(spec: &GasSpec, t: f64, n: usize) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Parameter(format!("finite-N average needs at least two atoms, got {n}")));
    }
    let i = exponent_integral(spec, t)?;
    let z = i / n as f64;
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "|I/N| = {:.3} ≥ 1: outside the range where the finite-N average is valid",
            z.norm()
        )));
    }
    let factor = ((n - 1) as f64 * (1.0 - z).ln()).exp();
    Ok(spec.protocol.single_spin_prefactor(t) * factor)
}

/// The soft-core gas in dimensionless form.
///
/// For a soft-core potential the gas average depends on the physical inputs
/// only through these numbers. `v0t` and the rate ratios carry the sign of
/// V₀, so γt = (γ/V₀)·(V₀t) is always non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint {
    pub blockade_number: f64,
    pub v0t: f64,
    pub theta: f64,
    pub echo: bool,
    pub gamma_over_v0: f64,
    pub dephasing_over_v0: f64,
    #[serde(default)]
    pub echo_model: EchoModel,
}

impl DimensionlessPoint {
    /// Dissipation-free point.
    pub fn new(blockade_number: f64, v0t: f64, theta: f64, echo: bool) -> Self {
        Self {
            blockade_number,
            v0t,
            theta,
            echo,
            gamma_over_v0: 0.0,
            dephasing_over_v0: 0.0,
            echo_model: EchoModel::Effective,
        }
    }

    pub fn beta(&self) -> f64 {
        if self.echo {
            0.0
        } else {
            1.0
        }
    }

    pub fn from_physical(spec: &GasSpec, t: f64) -> Result<Self> {
        let v0 = spec.potential.core_height().ok_or_else(|| {
            Error::Unsupported("the bare potential has no core height; use physical units".into())
        })?;
        if v0 == 0.0 {
            return Err(Error::Domain("zero core height has no dimensionless time".into()));
        }
        let p = &spec.protocol;
        Ok(Self {
            blockade_number: spec.blockade_number,
            v0t: v0 * t,
            theta: p.theta(),
            echo: p.echo(),
            gamma_over_v0: p.gamma() / v0,
            dephasing_over_v0: p.gamma_dephasing() / v0,
            echo_model: p.echo_model(),
        })
    }

    /// The gas and time reproducing this point for the given dressing
    /// parameters, which fix r_c and V₀.
    pub fn to_physical(&self, dressing: &DressingParams) -> Result<(GasSpec, f64)> {
        let pot = derive_potential(dressing, PotentialKind::SoftCore)?;
        let v0 = pot.core_height().expect("soft core");
        if v0 == 0.0 {
            return Err(Error::Domain("zero core height has no dimensionless time".into()));
        }
        let t = self.v0t / v0;
        if t < 0.0 {
            return Err(Error::Domain(format!("V0t = {} has the wrong sign for V0 = {v0}", self.v0t)));
        }
        let density = 3.0 * self.blockade_number / (4.0 * PI * pot.r_c().powi(3));
        let protocol = RamseyProtocol::new(self.theta, self.echo)?
            .with_emission(self.gamma_over_v0 * v0)?
            .with_dephasing(self.dephasing_over_v0 * v0)?
            .with_echo_model(self.echo_model);
        Ok((GasSpec::new(density, pot, protocol)?, t))
    }

    /// Same value as [`contrast_gas`] at the physical point, computed from
    /// the dimensionless numbers alone.
    pub fn contrast(&self) -> Result<Complex64> {
        let g = self.gamma_over_v0 * self.v0t;
        let dephasing = self.dephasing_over_v0 * self.v0t;
        if g < 0.0 || dephasing < 0.0 {
            return Err(Error::Domain("rate ratios must share the sign of V0t".into()));
        }
        let protocol = RamseyProtocol::new(self.theta, self.echo)?.with_echo_model(self.echo_model);
        let kernel = crate::ising::Kernel::with_model(g, self.theta, self.beta(), protocol.echo_model());
        let i = self.blockade_number * soft_core_exponent(self.v0t, &kernel)?;
        // D(γ,t) depends on γt only
        let pref = self.theta.sin() * decay_prefactor(g, 1.0) * (-dephasing).exp();
        Ok(pref * (-i).exp())
    }
}

/// Smallest t at which |value(t)| first drops to half of |value(0)|.
///
/// Steps geometrically (×√2) from `t_start` until the threshold is
/// crossed, then bisects to relative accuracy 1e-8.
pub fn half_time(value: impl Fn(f64) -> Result<f64>, t_start: f64, t_max: f64) -> Result<f64> {
    if !(t_start > 0.0) || !(t_max > t_start) {
        return Err(Error::Parameter(format!("invalid search window [{t_start}, {t_max}]")));
    }
    let half = 0.5 * value(0.0)?;
    if half == 0.0 {
        return Err(Error::Domain("contrast vanishes at t = 0".into()));
    }
    let mut lo = 0.0;
    let mut hi = t_start;
    loop {
        if value(hi)? <= half {
            break;
        }
        lo = hi;
        if hi >= t_max {
            return Err(Error::NotFound(format!("contrast stays above half its initial value up to t = {t_max:e} μs")));
        }
        hi = (hi * std::f64::consts::SQRT_2).min(t_max);
    }
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if value(mid)? <= half {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// τ₁/₂ of the gas contrast, searched up to |V₀|t = 10⁹ (soft core) or
/// t = 10⁶ μs (bare).
pub fn tau_half(spec: &GasSpec) -> Result<f64> {
    let (start, max) = match spec.potential.core_height() {
        Some(v0) if v0 != 0.0 => (1e-4 / v0.abs(), 1e9 / v0.abs()),
        _ => (1e-9, 1e6),
    };
    tau_half_within(spec, start, max)
}

pub fn tau_half_within(spec: &GasSpec, t_start: f64, t_max: f64) -> Result<f64> {
    half_time(|t| Ok(contrast_gas(spec, t)?.norm()), t_start, t_max)
}
