//! Zero-dissipation two-point functions.
//!
//! For a z-diagonal Hamiltonian the coherences ⟨σ⁺_iσ^±_j⟩ pick up a phase
//! linear in the z-configuration of every third atom k, so they factorise:
//!
//! ```text
//! ⟨σ⁺_i σ⁺_j⟩ = sin²θ · e^{iβX_ij} · Π_{k≠i,j} f₀(X_ik + X_jk)
//! ⟨σ⁺_i σ⁻_j⟩ = sin²θ ·              Π_{k≠i,j} f₀(X_ik − X_jk)
//! ```
//!
//! with f₀ the γ = 0 kernel and X = V·t.

use num_complex::Complex64;

use super::configuration::CouplingMatrix;
use super::kernel::Kernel;
use super::observables::{sigma_plus_site, ScaledProduct};
use super::protocol::RamseyProtocol;
use crate::error::{Error, Result};

/// ⟨σ⁺_iσ⁺_j⟩ and ⟨σ⁺_iσ⁻_j⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPoint {
    pub plus_plus: Complex64,
    pub plus_minus: Complex64,
}

fn check_pair(couplings: &CouplingMatrix, proto: &RamseyProtocol, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Domain("connected correlator needs two distinct sites".into()));
    }
    let n = couplings.len();
    if i >= n || j >= n {
        return Err(Error::Domain(format!("sites ({i}, {j}) out of range for {n} atoms")));
    }
    if proto.is_dissipative() {
        return Err(Error::Unsupported(
            "closed-form correlators need γ = γ_d = 0; use the master-equation oracle for small systems".into(),
        ));
    }
    Ok(())
}

pub fn two_point(couplings: &CouplingMatrix, proto: &RamseyProtocol, i: usize, j: usize, t: f64) -> Result<TwoPoint> {
    check_pair(couplings, proto, i, j)?;
    proto.check_time(t)?;
    let kernel = Kernel::new(0.0, proto.theta(), proto.beta());
    let (row_i, row_j) = (couplings.row(i), couplings.row(j));
    let mut sum = ScaledProduct::default();
    let mut diff = ScaledProduct::default();
    for k in 0..couplings.len() {
        if k == i || k == j {
            continue;
        }
        let (a, b) = (row_i[k] * t, row_j[k] * t);
        sum.mul(kernel.eval(a + b));
        diff.mul(kernel.eval(a - b));
    }
    let s2 = proto.theta().sin().powi(2);
    let direct = Complex64::new(0.0, proto.beta() * couplings.get(i, j) * t).exp();
    Ok(TwoPoint { plus_plus: s2 * direct * sum.value(), plus_minus: s2 * diff.value() })
}

/// ⟨σˣ_iσˣ_j⟩ = ½ Re(⟨σ⁺_iσ⁺_j⟩ + ⟨σ⁺_iσ⁻_j⟩).
pub fn sx_sx(couplings: &CouplingMatrix, proto: &RamseyProtocol, i: usize, j: usize, t: f64) -> Result<f64> {
    let tp = two_point(couplings, proto, i, j, t)?;
    Ok(0.5 * (tp.plus_plus + tp.plus_minus).re)
}

/// 𝒢(i,j) = ⟨Sˣ_iSˣ_j⟩ − ⟨Sˣ_i⟩⟨Sˣ_j⟩ with S = σ/2.
pub fn connected_sxsx(couplings: &CouplingMatrix, proto: &RamseyProtocol, i: usize, j: usize, t: f64) -> Result<f64> {
    let xx = sx_sx(couplings, proto, i, j, t)?;
    let xi = sigma_plus_site(couplings, i, proto, t)?.re;
    let xj = sigma_plus_site(couplings, j, proto, t)?.re;
    Ok(0.25 * (xx - xi * xj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn vanishes_at_zero_time() {
        let c = CouplingMatrix::from_fn(4, |i, j| 0.3 * (i + j) as f64 + 0.1);
        let p = RamseyProtocol::new(1.0, false).unwrap();
        for j in 1..4 {
            assert!(connected_sxsx(&c, &p, 0, j, 0.0).unwrap().abs() < 1e-16);
        }
    }

    #[test]
    fn vanishes_without_interactions() {
        let c = CouplingMatrix::from_fn(4, |_, _| 0.0);
        let p = RamseyProtocol::new(PI / 2.0, true).unwrap();
        for &t in &[0.5, 7.0] {
            assert!(connected_sxsx(&c, &p, 1, 2, t).unwrap().abs() < 1e-16);
        }
    }

    #[test]
    fn symmetric_in_sites() {
        let c = CouplingMatrix::from_fn(5, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.2 + 0.05);
        for echo in [true, false] {
            let p = RamseyProtocol::new(0.9, echo).unwrap();
            let a = connected_sxsx(&c, &p, 1, 3, 2.2).unwrap();
            let b = connected_sxsx(&c, &p, 3, 1, 2.2).unwrap();
            assert!((a - b).abs() < 1e-15);
            assert!(a.abs() <= 0.25);
        }
    }

    #[test]
    fn errors() {
        let c = CouplingMatrix::from_fn(3, |_, _| 1.0);
        let p = RamseyProtocol::new(1.0, true).unwrap();
        assert!(matches!(connected_sxsx(&c, &p, 1, 1, 1.0), Err(Error::Domain(_))));
        let d = p.with_emission(0.1).unwrap();
        assert!(matches!(connected_sxsx(&c, &d, 0, 1, 1.0), Err(Error::Unsupported(_))));
    }
}
