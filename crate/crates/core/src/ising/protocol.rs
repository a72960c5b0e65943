use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::{decay_prefactor, Kernel};
use crate::error::{Error, Result};

/// How emission interacts with the echo π pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EchoModel {
    /// Evolution under H_echo for the whole dark time with σ⁻ emission
    /// throughout. This is the β = 0 closed form.
    #[default]
    Effective,
    /// Literal [θ, t/2, π, t/2] sequence: in the toggling frame the second
    /// half emits ↓→↑. Identical to `Effective` when γ = 0.
    Pulsed,
}

/// Ramsey sequence parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyProtocol {
    theta: f64,
    echo: bool,
    gamma: f64,
    gamma_dephasing: f64,
    #[serde(default)]
    echo_model: EchoModel,
}

impl RamseyProtocol {
    /// Dissipation-free protocol with tipping angle `theta` (0 ≤ θ ≤ π).
    pub fn new(theta: f64, echo: bool) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Parameter(format!("tipping angle must lie in [0, π], got {theta}")));
        }
        Ok(Self { theta, echo, gamma: 0.0, gamma_dephasing: 0.0, echo_model: EchoModel::Effective })
    }

    /// Spontaneous emission rate γ (rad/μs) of the upper state.
    pub fn with_emission(mut self, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("emission rate must be non-negative, got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    /// Pure dephasing rate γ_d (rad/μs) of the coherence.
    pub fn with_dephasing(mut self, gamma_dephasing: f64) -> Result<Self> {
        if !(gamma_dephasing >= 0.0) || !gamma_dephasing.is_finite() {
            return Err(Error::Parameter(format!("dephasing rate must be non-negative, got {gamma_dephasing}")));
        }
        self.gamma_dephasing = gamma_dephasing;
        Ok(self)
    }

    pub fn with_echo_model(mut self, model: EchoModel) -> Self {
        self.echo_model = model;
        self
    }

    pub fn with_echo(mut self, echo: bool) -> Self {
        self.echo = echo;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn echo(&self) -> bool {
        self.echo
    }

    /// β = 0 with echo, 1 without.
    pub fn beta(&self) -> f64 {
        if self.echo {
            0.0
        } else {
            1.0
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_dephasing(&self) -> f64 {
        self.gamma_dephasing
    }

    pub fn echo_model(&self) -> EchoModel {
        self.echo_model
    }

    pub fn is_dissipative(&self) -> bool {
        self.gamma > 0.0 || self.gamma_dephasing > 0.0
    }

    /// Neighbour factor at dark time `t`.
    pub fn kernel(&self, t: f64) -> Kernel {
        Kernel::with_model(self.gamma * t, self.theta, self.beta(), self.echo_model)
    }

    /// sin θ · D(γ,t) · e^{−γ_d t}: the single-spin value of ⟨σ⁺⟩.
    pub fn single_spin_prefactor(&self, t: f64) -> f64 {
        self.theta.sin() * decay_prefactor(self.gamma, t) * (-self.gamma_dephasing * t).exp()
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("time must be finite, got {t}")));
        }
        if t < 0.0 && self.is_dissipative() {
            return Err(Error::Domain("negative times are only defined for unitary evolution".into()));
        }
        Ok(())
    }
}
