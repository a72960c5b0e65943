use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::{Cell, Csv, RunOutput};
use crate::error::Result;
use crate::gas::{contrast_gas, monte_carlo_gas_times, recommended_atoms, GasSpec, McEstimate, McOptions};
use crate::ising::{connected_sxsx, sigma_plus_config, AtomConfiguration, CouplingMatrix, Normalization, RamseyProtocol};
use crate::oracle::{
    echo_equivalence_check, evolve_master, expectation, oracle_sigma_plus, DensityMatrix, Observable, Pauli,
    PulseSequence,
};
use crate::potential::InteractionPotential;

const MC_FIXTURE_SEED: u64 = 20_240_601;

/// Outcome of one family of comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl Check {
    fn from_deviations(name: &str, deviations: &[f64], tolerance: f64) -> Self {
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        let finite = deviations.iter().all(|d| d.is_finite());
        Self {
            name: name.into(),
            passed: finite && max_deviation <= tolerance,
            cases: deviations.len(),
            max_deviation,
            tolerance,
        }
    }
}

fn unit_potential() -> InteractionPotential {
    InteractionPotential::soft_core(1.0, 1.0, 0.1).expect("valid soft core")
}

fn random_couplings(rng: &mut ChaCha8Rng, n: usize) -> Result<CouplingMatrix> {
    let positions = (0..n).map(|_| [rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0]);
    Ok(AtomConfiguration::new(positions.collect())?.couplings(&unit_potential()))
}

fn closed_vs_oracle(c: &CouplingMatrix, p: &RamseyProtocol, t: f64) -> Result<f64> {
    let closed = sigma_plus_config(c, p, t, Normalization::PerSpin)?;
    Ok((closed - oracle_sigma_plus(c, p, t)?).norm())
}

const THETAS: [f64; 3] = [PI / 20.0, PI / 4.0, PI / 2.0];

fn zero_couplings() -> Result<Check> {
    let c = CouplingMatrix::from_fn(4, |_, _| 0.0);
    let mut dev = Vec::new();
    for theta in THETAS {
        for echo in [false, true] {
            for gamma in [0.0, 0.2] {
                let p = RamseyProtocol::new(theta, echo)?.with_emission(gamma)?;
                for t in [0.0, 1.0, 5.0] {
                    let closed = sigma_plus_config(&c, &p, t, Normalization::PerSpin)?;
                    dev.push((closed - p.single_spin_prefactor(t)).norm());
                    dev.push(closed_vs_oracle(&c, &p, t)?);
                }
            }
        }
    }
    Ok(Check::from_deviations("zero_couplings", &dev, 1e-12))
}

fn random_instances(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut dev = Vec::new();
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let c = random_couplings(rng, n)?;
        let theta = THETAS[rng.random_range(0..3)];
        let gamma = if rng.random::<bool>() { 0.2 } else { 0.0 };
        let p = RamseyProtocol::new(theta, rng.random::<bool>())?.with_emission(gamma)?;
        for k in 0..5 {
            dev.push(closed_vs_oracle(&c, &p, 4.0 * PI * k as f64 / 4.0)?);
        }
    }
    Ok(Check::from_deviations("closed_form_vs_oracle", &dev, 1e-6))
}

fn six_spins_dissipative() -> Result<Check> {
    let positions = vec![
        [0.0, 0.0, 0.0],
        [0.7, 0.0, 0.0],
        [0.0, 0.9, 0.0],
        [0.5, 0.5, 0.6],
        [1.3, 0.4, 0.2],
        [0.2, 1.4, 0.9],
    ];
    let c = AtomConfiguration::new(positions)?.couplings(&unit_potential());
    let mut dev = Vec::new();
    for echo in [false, true] {
        let p = RamseyProtocol::new(PI / 4.0, echo)?.with_emission(0.2)?.with_dephasing(0.05)?;
        for t in [0.5, 2.0, 6.0] {
            dev.push(closed_vs_oracle(&c, &p, t)?);
        }
    }
    Ok(Check::from_deviations("six_spins_dissipative", &dev, 1e-6))
}

fn echo_equivalence(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut dev = Vec::new();
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let c = random_couplings(rng, n)?;
        let theta = THETAS[rng.random_range(0..3)];
        let r = echo_equivalence_check(&c, theta, 1.0 + 4.0 * rng.random::<f64>())?;
        dev.push(r.max_observable_deviation.max(r.fidelity_gap.abs()));
    }
    Ok(Check::from_deviations("echo_equivalence", &dev, 1e-10))
}

fn correlators(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut dev = Vec::new();
    for n in 3..=6 {
        let c = random_couplings(rng, n)?;
        let p = RamseyProtocol::new(THETAS[n % 3], n % 2 == 0)?;
        let t = 1.0 + n as f64;
        let rho = evolve_master(&DensityMatrix::ground(n)?, &c, &p, &PulseSequence::for_protocol(&p, t))?;
        let x = |site| Ok(expectation(&rho, &Observable::Site { site, op: Pauli::X })?.re);
        for j in 1..n {
            let xx = expectation(&rho, &Observable::Pair { i: 0, a: Pauli::X, j, b: Pauli::X })?.re;
            let oracle = 0.25 * (xx - x(0)? * x(j)?);
            dev.push((connected_sxsx(&c, &p, 0, j, t)? - oracle).abs());
        }
    }
    Ok(Check::from_deviations("correlators_vs_oracle", &dev, 1e-8))
}

fn mc_options(spec: &GasSpec, t_max: f64, seed: u64) -> McOptions {
    McOptions { n_samples: 24, n_atoms: recommended_atoms(spec, t_max), n_probes: 32, seed }
}

/// Quadrature vs Monte Carlo, as multiples of the standard error.
fn quadrature_vs_mc(seed: u64) -> Result<Check> {
    let mut dev = Vec::new();
    let times = [0.5, 2.0];
    for n_r in [0.1, 1.0] {
        for echo in [false, true] {
            let density = 3.0 * n_r / (4.0 * PI);
            let spec = GasSpec::new(density, unit_potential(), RamseyProtocol::new(PI / 2.0, echo)?)?;
            for est in monte_carlo_gas_times(&spec, &times, &mc_options(&spec, 2.0, seed))? {
                dev.push((est.mean - contrast_gas(&spec, est.t)?).norm() / est.standard_error);
            }
        }
    }
    Ok(Check::from_deviations("quadrature_vs_monte_carlo", &dev, 3.0))
}

fn mc_digest() -> Result<String> {
    let spec = GasSpec::new(0.5, unit_potential(), RamseyProtocol::new(PI / 2.0, false)?)?;
    let estimates: Vec<McEstimate> =
        monte_carlo_gas_times(&spec, &[0.0, 1.0, 3.0], &mc_options(&spec, 3.0, MC_FIXTURE_SEED))?;
    let mut hasher = Sha256::new();
    for e in &estimates {
        for x in [e.t, e.mean.re, e.mean.im, e.standard_error] {
            hasher.update(x.to_le_bytes());
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Runs every check; the output is marked failed if any check fails.
pub fn run_validate(seed: u64) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = vec![
        zero_couplings()?,
        random_instances(&mut rng)?,
        six_spins_dissipative()?,
        echo_equivalence(&mut rng)?,
        correlators(&mut rng)?,
        quadrature_vs_mc(seed)?,
    ];
    let (first, second) = (mc_digest()?, mc_digest()?);
    checks.push(Check {
        name: "monte_carlo_digest_reproducible".into(),
        passed: first == second,
        cases: 2,
        max_deviation: if first == second { 0.0 } else { 1.0 },
        tolerance: 0.0,
    });
    let passed = checks.iter().all(|c| c.passed);
    for c in checks.iter().filter(|c| !c.passed) {
        log::error!("validation check {} failed: {:e} > {:e}", c.name, c.max_deviation, c.tolerance);
    }
    let mut csv = Csv::new(&["check", "passed", "cases", "max_deviation", "tolerance"]);
    for c in &checks {
        csv.row(&[
            Cell::S(c.name.clone()),
            Cell::S(c.passed.to_string()),
            Cell::S(c.cases.to_string()),
            Cell::F(c.max_deviation),
            Cell::F(c.tolerance),
        ]);
    }
    let summary = json!({ "checks": checks, "monte_carlo_digest": first });
    Ok(RunOutput { files: vec![csv.finish("validate_checks.csv")], summary, passed })
}
