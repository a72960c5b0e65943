use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::configuration::CouplingMatrix;
use super::kernel::Kernel;
use super::protocol::RamseyProtocol;
use crate::error::{Error, Result};

/// Whether ⟨σ⁺⟩ is the collective sum over spins or its per-spin mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    PerSpin,
    Total,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-spin" => Ok(Self::PerSpin),
            "total" => Ok(Self::Total),
            other => Err(Error::Config(format!("unknown normalization '{other}'"))),
        }
    }
}

/// A complex product kept as mantissa × 2^exponent so long products of
/// small factors do not underflow before they are combined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProduct {
    mantissa: Complex64,
    exponent: i32,
}

const RESCALE_BITS: i32 = 256;

impl Default for ScaledProduct {
    fn default() -> Self {
        Self { mantissa: Complex64::new(1.0, 0.0), exponent: 0 }
    }
}

impl ScaledProduct {
    #[inline]
    pub fn mul(&mut self, z: Complex64) {
        self.mantissa *= z;
        let m = self.mantissa.re.abs().max(self.mantissa.im.abs());
        if m == 0.0 {
            return;
        }
        if m < 2f64.powi(-RESCALE_BITS) {
            self.mantissa *= 2f64.powi(RESCALE_BITS);
            self.exponent -= RESCALE_BITS;
        } else if m > 2f64.powi(RESCALE_BITS) {
            self.mantissa *= 2f64.powi(-RESCALE_BITS);
            self.exponent += RESCALE_BITS;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    /// ln |product|; −∞ for an exact zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    pub fn value(&self) -> Complex64 {
        if self.is_zero() {
            return self.mantissa;
        }
        // split the scale so an intermediate power does not overflow
        let half = self.exponent / 2;
        self.mantissa * 2f64.powi(half) * 2f64.powi(self.exponent - half)
    }
}

#[inline]
pub(crate) fn neighbour_product(row: &[f64], skip: usize, kernel: &Kernel, t: f64) -> ScaledProduct {
    let mut prod = ScaledProduct::default();
    for (j, &v) in row.iter().enumerate() {
        if j == skip {
            continue;
        }
        prod.mul(kernel.eval(v * t));
        if prod.is_zero() {
            break;
        }
    }
    prod
}

/// ⟨σ⁺_k(t)⟩ for one spin.
pub fn sigma_plus_site(couplings: &CouplingMatrix, k: usize, proto: &RamseyProtocol, t: f64) -> Result<Complex64> {
    proto.check_time(t)?;
    if k >= couplings.len() {
        return Err(Error::Domain(format!("site {k} out of range for {} atoms", couplings.len())));
    }
    let kernel = proto.kernel(t);
    Ok(proto.single_spin_prefactor(t) * neighbour_product(couplings.row(k), k, &kernel, t).value())
}

/// ⟨σ⁺(t)⟩ = sin θ · D(γ,t) · e^{−γ_d t} · Σ_k Π_{j≠k} f(V_jk t), per spin
/// or summed over spins.
pub fn sigma_plus_config(
    couplings: &CouplingMatrix,
    proto: &RamseyProtocol,
    t: f64,
    normalization: Normalization,
) -> Result<Complex64> {
    proto.check_time(t)?;
    let n = couplings.len();
    if n == 0 {
        return Err(Error::Domain("configuration has no atoms".into()));
    }
    let kernel = proto.kernel(t);
    let sum: Complex64 = (0..n).map(|k| neighbour_product(couplings.row(k), k, &kernel, t).value()).sum();
    let total = proto.single_spin_prefactor(t) * sum;
    Ok(match normalization {
        Normalization::PerSpin => total / n as f64,
        Normalization::Total => total,
    })
}

/// Contrast and phase of one ⟨σ⁺⟩ value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastPhase {
    pub contrast: f64,
    /// atan2(Im, Re) in (−π, π]; `None` when the contrast vanishes.
    pub phase: Option<f64>,
}

pub fn contrast_phase(sigma_plus: Complex64) -> ContrastPhase {
    let contrast = sigma_plus.norm();
    let phase = if contrast == 0.0 {
        None
    } else {
        let p = sigma_plus.im.atan2(sigma_plus.re);
        Some(if p <= -PI { PI } else { p })
    };
    ContrastPhase { contrast, phase }
}

/// ⟨σ⁺⟩ on a time grid with derived contrast and phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastTrace {
    pub times: Vec<f64>,
    pub sigma_plus: Vec<Complex64>,
    pub contrast: Vec<f64>,
    pub phase: Vec<Option<f64>>,
    pub normalization: Normalization,
}

impl ContrastTrace {
    pub fn from_values(times: Vec<f64>, sigma_plus: Vec<Complex64>, normalization: Normalization) -> Self {
        let (contrast, phase) = sigma_plus
            .iter()
            .map(|&z| {
                let cp = contrast_phase(z);
                (cp.contrast, cp.phase)
            })
            .unzip();
        Self { times, sigma_plus, contrast, phase, normalization }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Phase made continuous along the grid by adding multiples of 2π.
    /// Undefined points stay undefined and do not reset the branch.
    pub fn unwrapped_phase(&self) -> Vec<Option<f64>> {
        let mut out = Vec::with_capacity(self.phase.len());
        let mut last: Option<f64> = None;
        for p in &self.phase {
            let next = p.map(|p| match last {
                None => p,
                Some(prev) => p + 2.0 * PI * ((prev - p) / (2.0 * PI)).round(),
            });
            if next.is_some() {
                last = next;
            }
            out.push(next);
        }
        out
    }

    /// Unwrapped phase minus its value at the first defined grid point.
    pub fn phase_shift(&self) -> Vec<Option<f64>> {
        let unwrapped = self.unwrapped_phase();
        let reference = unwrapped.iter().flatten().next().copied();
        unwrapped.into_iter().map(|p| p.zip(reference).map(|(p, r)| p - r)).collect()
    }
}

/// Evaluates [`sigma_plus_config`] on every time of `times`.
pub fn trace(
    couplings: &CouplingMatrix,
    proto: &RamseyProtocol,
    times: &[f64],
    normalization: Normalization,
) -> Result<ContrastTrace> {
    let values = times
        .par_iter()
        .map(|&t| sigma_plus_config(couplings, proto, t, normalization))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContrastTrace::from_values(times.to_vec(), values, normalization))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{f_kernel, AtomConfiguration};
    use crate::potential::InteractionPotential;
    use proptest::prelude::*;

    fn random_couplings(n: usize, seed: u64) -> CouplingMatrix {
        let mut s = seed;
        CouplingMatrix::from_fn(n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 0.5
        })
    }

    #[test]
    fn initial_value_is_sin_theta() {
        let c = random_couplings(5, 3);
        let p = RamseyProtocol::new(0.7, false).unwrap().with_emission(0.4).unwrap();
        let s = sigma_plus_config(&c, &p, 0.0, Normalization::PerSpin).unwrap();
        assert!((s - Complex64::new(0.7f64.sin(), 0.0)).norm() < 1e-15);
        let total = sigma_plus_config(&c, &p, 0.0, Normalization::Total).unwrap();
        assert!((total - 5.0 * s).norm() < 1e-14);
    }

    #[test]
    fn pair_with_echo_is_cosine() {
        let pot = InteractionPotential::soft_core(1.0, 1.0, 0.1).unwrap();
        let cfg = AtomConfiguration::new(vec![[0.0; 3], [0.8, 0.0, 0.0]]).unwrap();
        let c = cfg.couplings(&pot);
        let p = RamseyProtocol::new(PI / 2.0, true).unwrap();
        let v = pot.evaluate(0.8).unwrap();
        for &t in &[0.0, 0.5, 3.0, 11.0] {
            let s = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            assert!((s - Complex64::new((v * t / 2.0).cos(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn non_interacting_stays_at_sin_theta() {
        let c = CouplingMatrix::from_fn(4, |_, _| 0.0);
        let p = RamseyProtocol::new(1.2, false).unwrap();
        for &t in &[0.0, 10.0, 1e4] {
            let s = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            assert!((s - Complex64::new(1.2f64.sin(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_configuration_is_an_error() {
        let c = CouplingMatrix::from_fn(0, |_, _| 0.0);
        let p = RamseyProtocol::new(1.0, true).unwrap();
        assert!(matches!(sigma_plus_config(&c, &p, 1.0, Normalization::PerSpin), Err(Error::Domain(_))));
    }

    #[test]
    fn contrast_phase_values() {
        assert_eq!(contrast_phase(Complex64::new(1.0, 0.0)), ContrastPhase { contrast: 1.0, phase: Some(0.0) });
        let cp = contrast_phase(Complex64::new(0.0, 0.5));
        assert_eq!(cp.contrast, 0.5);
        assert!((cp.phase.unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(contrast_phase(Complex64::new(-1.0, -0.0)).phase, Some(PI));
        assert_eq!(contrast_phase(Complex64::new(0.0, 0.0)).phase, None);
    }

    #[test]
    fn echo_quarter_turn_is_real() {
        let c = random_couplings(6, 11);
        let p = RamseyProtocol::new(PI / 2.0, true).unwrap();
        for &t in &[0.3, 2.0, 9.0] {
            let s = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            assert_eq!(s.im, 0.0);
            let ph = contrast_phase(s).phase.unwrap();
            assert!(ph == 0.0 || ph == PI);
        }
    }

    #[test]
    fn underflow_is_deferred() {
        let mut p = ScaledProduct::default();
        for _ in 0..2000 {
            p.mul(Complex64::new(0.5, 0.0));
        }
        assert!((p.ln_abs() + 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(p.value(), Complex64::new(0.0, 0.0));
        let mut q = ScaledProduct::default();
        for _ in 0..1200 {
            q.mul(Complex64::new(0.5, 0.0));
        }
        for _ in 0..1200 {
            q.mul(Complex64::new(2.0, 0.0));
        }
        assert!((q.value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_zero_short_circuits() {
        // θ = π/2, echo: f(π) = 0
        let c = CouplingMatrix::from_fn(3, |i, j| if i + j == 1 { 1.0 } else { 0.0 });
        let p = RamseyProtocol::new(PI / 2.0, true).unwrap();
        let kernel = p.kernel(PI);
        assert!(kernel.eval(PI).norm() < 1e-16);
        assert!(sigma_plus_site(&c, 0, &p, PI).unwrap().norm() < 1e-15);
        let s = sigma_plus_site(&c, 2, &p, PI).unwrap();
        assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_unwrap_and_shift() {
        let values: Vec<_> = (0..40).map(|k| Complex64::from_polar(1.0, 0.3 + 0.4 * k as f64)).collect();
        let times: Vec<_> = (0..40).map(|k| k as f64).collect();
        let tr = ContrastTrace::from_values(times, values, Normalization::PerSpin);
        let shift = tr.phase_shift();
        for (k, s) in shift.iter().enumerate() {
            assert!((s.unwrap() - 0.4 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_matches_pointwise() {
        let c = random_couplings(4, 5);
        let p = RamseyProtocol::new(0.9, false).unwrap();
        let times = [0.0, 0.5, 1.5];
        let tr = trace(&c, &p, &times, Normalization::Total).unwrap();
        for (k, &t) in times.iter().enumerate() {
            assert_eq!(tr.sigma_plus[k], sigma_plus_config(&c, &p, t, Normalization::Total).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn permutation_invariance(seed in 0u64..1000, n in 2usize..8, t in 0.0f64..6.0, echo: bool) {
            let c = random_couplings(n, seed);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.rotate_left((seed as usize) % n);
            perm.swap(0, n - 1);
            let p = RamseyProtocol::new(0.8, echo).unwrap().with_emission(0.1).unwrap();
            let a = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            let b = sigma_plus_config(&c.permuted(&perm), &p, t, Normalization::PerSpin).unwrap();
            prop_assert!((a - b).norm() <= 1e-12);
        }

        #[test]
        fn contrast_bounded_without_dissipation(seed in 0u64..1000, n in 1usize..7, t in 0.0f64..20.0,
                                                 theta in 0.0f64..PI, echo: bool) {
            let c = random_couplings(n, seed);
            let p = RamseyProtocol::new(theta, echo).unwrap();
            let s = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            prop_assert!(s.norm() <= theta.sin() + 1e-14);
        }

        #[test]
        fn echo_factor_is_pure_phase_at_quarter_turn(x in -50.0f64..50.0) {
            let a = f_kernel(x, 0.0, PI / 2.0, 0.0);
            let b = f_kernel(x, 0.0, PI / 2.0, 1.0);
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-14);
            prop_assert!((b - a * Complex64::new(0.0, x / 2.0).exp()).norm() <= 1e-14);
        }

        #[test]
        fn echo_time_reversal(seed in 0u64..1000, n in 2usize..7, t in 0.0f64..10.0, theta in 0.0f64..PI) {
            let c = random_couplings(n, seed);
            let p = RamseyProtocol::new(theta, true).unwrap();
            let fwd = sigma_plus_config(&c, &p, t, Normalization::PerSpin).unwrap();
            let back = sigma_plus_config(&c, &p, -t, Normalization::PerSpin).unwrap();
            prop_assert!((back - fwd.conj()).norm() <= 1e-13);
        }
    }
}
