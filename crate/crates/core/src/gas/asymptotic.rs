//! Low- and high-density limits of the quarter-turn, dissipation-free gas.
//!
//! N_R ≪ 1 probes the van der Waals tail: C = exp(−A·N_R·√(V₀t)) with
//! A = √π / 2^{1+β/2}. N_R ≫ 1 probes the flat core; replacing V by a hard
//! core of height V₀ gives C = exp(−B·N_R·(1 − cos^{β+1}(V₀t/2))) with B = 1,
//! and B is left free to absorb the soft edge.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::DimensionlessPoint;
use crate::error::{Error, Result};

/// Hard-core value of B.
pub const DEFAULT_HIGH_DENSITY_B: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Low,
    High,
}

/// An asymptotic contrast with a note on whether N_R lies in the regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotic {
    pub value: f64,
    pub regime: Regime,
    /// N_R < 1 for `Low`, N_R > 1 for `High`.
    pub in_regime: bool,
}

/// A = √π / 2^{1+β/2}.
pub fn low_density_coefficient(beta: f64) -> f64 {
    PI.sqrt() / 2f64.powf(1.0 + beta / 2.0)
}

fn high_density_shape(v0t: f64, beta: f64) -> f64 {
    1.0 - (0.5 * v0t).cos().powi(beta as i32 + 1)
}

pub fn asymptotic_contrast(point: &DimensionlessPoint, regime: Regime, b: f64) -> Result<Asymptotic> {
    if (point.theta - PI / 2.0).abs() > 1e-12 || point.gamma_over_v0 != 0.0 || point.dephasing_over_v0 != 0.0 {
        return Err(Error::Domain("the asymptotic laws hold for θ = π/2 without dissipation".into()));
    }
    let n_r = point.blockade_number;
    let beta = point.beta();
    let (value, in_regime) = match regime {
        Regime::Low => ((-low_density_coefficient(beta) * n_r * point.v0t.abs().sqrt()).exp(), n_r < 1.0),
        Regime::High => ((-b * n_r * high_density_shape(point.v0t, beta)).exp(), n_r > 1.0),
    };
    Ok(Asymptotic { value, regime, in_regime })
}

/// Least-squares B from contrast samples (V₀t, C) in log space:
/// −ln C = B·N_R·(1 − cos^{β+1}(V₀t/2)).
pub fn fit_high_density_b(samples: &[(f64, f64)], blockade_number: f64, beta: f64) -> Result<f64> {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(v0t, c) in samples {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("contrast must be positive for a log fit, got {c}")));
        }
        let x = blockade_number * high_density_shape(v0t, beta);
        sxx += x * x;
        sxy += x * -c.ln();
    }
    if sxx == 0.0 {
        return Err(Error::Domain("samples carry no information about B".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert!((low_density_coefficient(0.0) - 0.886_226_925_452_758).abs() < 1e-15);
        assert!((low_density_coefficient(1.0) - 0.626_657_068_657_750_1).abs() < 1e-15);
    }

    #[test]
    fn high_density_half_revolution() {
        let p = DimensionlessPoint::new(3.0, 2.0 * PI, PI / 2.0, true);
        let a = asymptotic_contrast(&p, Regime::High, 1.0).unwrap();
        assert!((a.value - (-6.0f64).exp()).abs() < 1e-15);
        assert!(a.in_regime);
        let low = asymptotic_contrast(&p, Regime::Low, 1.0).unwrap();
        assert!(!low.in_regime);
    }

    #[test]
    fn rejects_other_angles() {
        let p = DimensionlessPoint::new(3.0, 1.0, 0.3, true);
        assert!(asymptotic_contrast(&p, Regime::Low, 1.0).is_err());
    }

    #[test]
    fn fit_recovers_b() {
        let samples: Vec<(f64, f64)> =
            [0.1, 0.4, 1.0, 2.0].iter().map(|&x| (x, (-4.0 * 50.0 * (1.0 - (x / 2.0f64).cos().powi(2))).exp())).collect();
        assert!((fit_high_density_b(&samples, 50.0, 1.0).unwrap() - 4.0).abs() < 1e-12);
    }
}
