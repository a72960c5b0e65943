//! Direct disorder averaging over sampled gas configurations.
//!
//! Each sample draws `n_atoms` uniform positions in a periodic cube of
//! volume n_atoms/ρ and averages the exact per-spin product over a subset
//! of probe atoms, each interacting with every other atom through its
//! minimum image. Sample `k` uses the ChaCha stream `k` of the seed, so the
//! result does not depend on thread scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GasSpec;
use crate::error::{Error, Result};
use crate::ising::{AtomConfiguration, ScaledProduct};

/// Minimum box side in units of the interaction length.
const BOX_RANGE_FACTOR: f64 = 20.0;
const MIN_ATOMS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n_samples: usize,
    pub n_atoms: usize,
    /// Atoms per sample whose ⟨σ⁺⟩ is averaged; all atoms if ≥ n_atoms.
    pub n_probes: usize,
    pub seed: u64,
}

/// Sample mean of the per-spin ⟨σ⁺⟩ with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub t: f64,
    pub mean: Complex64,
    /// √(Σ|zₖ − mean|² / (n(n−1))), the standard error of the complex mean.
    pub standard_error: f64,
    pub se_re: f64,
    pub se_im: f64,
    pub n_samples: usize,
    pub n_atoms: usize,
    /// The box is shorter than 20 interaction lengths.
    pub bias_warning: bool,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: Complex64, k: f64) -> bool {
        (self.mean - value).norm() <= k * self.standard_error
    }
}

// r_c for the soft core; (|C₆|t)^{1/6}, where |V|t = 1, for the bare one.
fn interaction_length(spec: &GasSpec, t: f64) -> f64 {
    let pot = spec.potential();
    match pot.core_height() {
        Some(_) => pot.r_c(),
        None => (pot.c6().abs() * t).powf(1.0 / 6.0),
    }
}

/// Atom count whose box spans 20 interaction lengths, and at least 2000.
pub fn recommended_atoms(spec: &GasSpec, t_max: f64) -> usize {
    let side = BOX_RANGE_FACTOR * interaction_length(spec, t_max);
    let n = (side.powi(3) * spec.density()).ceil();
    if n.is_finite() {
        (n as usize).max(MIN_ATOMS)
    } else {
        MIN_ATOMS
    }
}

fn box_side(spec: &GasSpec, n_atoms: usize) -> f64 {
    (n_atoms as f64 / spec.density()).cbrt()
}

fn sample_positions(spec: &GasSpec, n_atoms: usize, seed: u64, index: u64) -> (Vec<[f64; 3]>, f64) {
    let side = box_side(spec, n_atoms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let positions =
        (0..n_atoms).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side, rng.random::<f64>() * side]).collect();
    (positions, side)
}

/// The periodic configuration used as sample `index` for `seed`.
pub fn sample_configuration(spec: &GasSpec, n_atoms: usize, seed: u64, index: u64) -> AtomConfiguration {
    let (positions, side) = sample_positions(spec, n_atoms, seed, index);
    AtomConfiguration::periodic_unchecked(positions, side)
}

// Per-spin ⟨σ⁺⟩ of one sample, averaged over probes, at every time.
fn sample_values(spec: &GasSpec, times: &[f64], opts: &McOptions, index: u64) -> Vec<Complex64> {
    let cfg = sample_configuration(spec, opts.n_atoms, opts.seed, index);
    let pot = spec.potential();
    let proto = spec.protocol();
    let kernels: Vec<_> = times.iter().map(|&t| proto.kernel(t)).collect();
    let probes = opts.n_probes.min(opts.n_atoms);
    let mut sums = vec![Complex64::new(0.0, 0.0); times.len()];
    let mut couplings = vec![0.0; opts.n_atoms];
    for k in 0..probes {
        for (j, v) in couplings.iter_mut().enumerate() {
            *v = if j == k { 0.0 } else { pot.at_squared(cfg.distance_squared(k, j)) };
        }
        for ((sum, kernel), &t) in sums.iter_mut().zip(&kernels).zip(times) {
            let mut prod = ScaledProduct::default();
            for (j, &v) in couplings.iter().enumerate() {
                if j != k {
                    prod.mul(kernel.eval(v * t));
                }
            }
            *sum += prod.value();
        }
    }
    sums.iter()
        .zip(times)
        .map(|(s, &t)| proto.single_spin_prefactor(t) * s / probes as f64)
        .collect()
}

/// Monte Carlo estimates of the per-spin ⟨σ⁺⟩ at every time of `times`,
/// all from the same sampled configurations.
pub fn monte_carlo_gas_times(spec: &GasSpec, times: &[f64], opts: &McOptions) -> Result<Vec<McEstimate>> {
    if opts.n_samples < 2 {
        return Err(Error::Parameter("Monte Carlo needs at least two samples for an error bar".into()));
    }
    if opts.n_atoms < 2 || opts.n_probes == 0 {
        return Err(Error::Parameter("Monte Carlo needs at least two atoms and one probe".into()));
    }
    for &t in times {
        super::check_gas_time(t)?;
    }
    let values: Vec<Vec<Complex64>> =
        (0..opts.n_samples as u64).into_par_iter().map(|k| sample_values(spec, times, opts, k)).collect();

    let side = box_side(spec, opts.n_atoms);
    let n = opts.n_samples as f64;
    Ok(times
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let range = interaction_length(spec, t);
            let bias_warning = side < BOX_RANGE_FACTOR * range;
            if bias_warning {
                log::warn!(
                    "Monte Carlo box side {side:.3} μm is below {BOX_RANGE_FACTOR} interaction lengths ({range:.3} μm) at t = {t}"
                );
            }
            let mean: Complex64 = values.iter().map(|v| v[ti]).sum::<Complex64>() / n;
            let (mut vr, mut vi) = (0.0, 0.0);
            for v in &values {
                let d = v[ti] - mean;
                vr += d.re * d.re;
                vi += d.im * d.im;
            }
            let (se_re, se_im) = ((vr / (n * (n - 1.0))).sqrt(), (vi / (n * (n - 1.0))).sqrt());
            McEstimate {
                t,
                mean,
                standard_error: se_re.hypot(se_im),
                se_re,
                se_im,
                n_samples: opts.n_samples,
                n_atoms: opts.n_atoms,
                bias_warning,
            }
        })
        .collect())
}

/// Monte Carlo estimate at one time, all atoms used as probes.
pub fn monte_carlo_gas(spec: &GasSpec, t: f64, n_samples: usize, n_atoms: usize, seed: u64) -> Result<McEstimate> {
    let opts = McOptions { n_samples, n_atoms, n_probes: n_atoms, seed };
    Ok(monte_carlo_gas_times(spec, &[t], &opts)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::RamseyProtocol;
    use crate::potential::InteractionPotential;
    use std::f64::consts::PI;

    fn spec(density: f64) -> GasSpec {
        let pot = InteractionPotential::soft_core(1.0, 1.0, 0.1).unwrap();
        GasSpec::new(density, pot, RamseyProtocol::new(PI / 2.0, true).unwrap()).unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let s = spec(0.05);
        let opts = McOptions { n_samples: 4, n_atoms: 300, n_probes: 20, seed: 9 };
        let a = monte_carlo_gas_times(&s, &[1.0, 4.0], &opts).unwrap();
        let b = monte_carlo_gas_times(&s, &[1.0, 4.0], &opts).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_gas_times(&s, &[1.0, 4.0], &McOptions { seed: 10, ..opts }).unwrap();
        assert_ne!(a[1].mean, c[1].mean);
    }

    #[test]
    fn dilute_gas_is_free() {
        let s = spec(1e-9);
        let e = monte_carlo_gas(&s, 5.0, 3, 50, 1).unwrap();
        assert!((e.mean - 1.0).norm() < 1e-9);
    }

    #[test]
    fn small_box_warns() {
        let s = spec(1.0);
        let opts = McOptions { n_samples: 2, n_atoms: 100, n_probes: 2, seed: 0 };
        assert!(monte_carlo_gas_times(&s, &[1.0], &opts).unwrap()[0].bias_warning);
        assert!(recommended_atoms(&s, 1.0) >= 8000);
    }

    #[test]
    fn samples_fill_the_box() {
        let s = spec(0.5);
        let cfg = sample_configuration(&s, 1000, 3, 0);
        let side = cfg.box_length().unwrap();
        assert!((side - (2000.0f64).cbrt()).abs() < 1e-12);
        assert!(cfg.positions().iter().flatten().all(|&x| (0.0..side).contains(&x)));
    }
}
