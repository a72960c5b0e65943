use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{check_size, DensityMatrix, Observable, Pauli};
use crate::error::{Error, Result};
use crate::ising::{CouplingMatrix, EchoModel, RamseyProtocol};

/// Which Ising Hamiltonian acts during a dark period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// H = ½ Σ_{j≠k} [(V/4)σᶻ_jσᶻ_k + (V/2)σᶻ_k] = Σ_{j<k} V n_j n_k + const.
    Full,
    /// H_echo = ½ Σ_{j≠k} (V/4)σᶻ_jσᶻ_k.
    Echo,
}

/// Diagonal of a z-diagonal Hamiltonian over the 2ᴺ basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    pub energies: Vec<f64>,
}

pub fn build_hamiltonian(couplings: &CouplingMatrix, kind: HamiltonianKind) -> Result<DiagonalHamiltonian> {
    let n = couplings.len();
    check_size(n)?;
    let z = |a: usize, k: usize| if a >> k & 1 == 1 { 1.0 } else { -1.0 };
    let energies = (0..1usize << n)
        .map(|a| {
            let mut e = 0.0;
            for j in 0..n {
                for k in (j + 1)..n {
                    let v = couplings.get(j, k);
                    e += 0.25 * v * z(a, j) * z(a, k);
                    if kind == HamiltonianKind::Full {
                        e += 0.25 * v * (z(a, j) + z(a, k));
                    }
                }
            }
            e
        })
        .collect();
    Ok(DiagonalHamiltonian { energies })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Global rotation exp(−i(α/2)σ_axis) on every spin. About y this takes
    /// |↓⟩ to cos(α/2)|↓⟩ + sin(α/2)|↑⟩.
    Pulse { axis: Axis, angle: f64 },
    /// Free evolution for `duration` μs.
    Dark { duration: f64, hamiltonian: HamiltonianKind },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub steps: Vec<Step>,
}

impl PulseSequence {
    /// θ pulse, then dark time t under H.
    pub fn ramsey(theta: f64, t: f64) -> Self {
        Self {
            steps: vec![
                Step::Pulse { axis: Axis::Y, angle: theta },
                Step::Dark { duration: t, hamiltonian: HamiltonianKind::Full },
            ],
        }
    }

    /// [θ, t/2, π, t/2] under H.
    pub fn echo(theta: f64, t: f64) -> Self {
        let half = Step::Dark { duration: 0.5 * t, hamiltonian: HamiltonianKind::Full };
        Self {
            steps: vec![
                Step::Pulse { axis: Axis::Y, angle: theta },
                half,
                Step::Pulse { axis: Axis::Y, angle: PI },
                half,
            ],
        }
    }

    /// θ pulse, then dark time t under H_echo.
    pub fn effective_echo(theta: f64, t: f64) -> Self {
        Self {
            steps: vec![
                Step::Pulse { axis: Axis::Y, angle: theta },
                Step::Dark { duration: t, hamiltonian: HamiltonianKind::Echo },
            ],
        }
    }

    /// The sequence whose final ⟨σ⁺⟩ the closed form for `proto` describes.
    /// The pulsed echo is read out after undoing the π pulse.
    pub fn for_protocol(proto: &RamseyProtocol, t: f64) -> Self {
        match (proto.echo(), proto.echo_model()) {
            (false, _) => Self::ramsey(proto.theta(), t),
            (true, EchoModel::Effective) => Self::effective_echo(proto.theta(), t),
            (true, EchoModel::Pulsed) => {
                let mut s = Self::echo(proto.theta(), t);
                s.steps.push(Step::Pulse { axis: Axis::Y, angle: -PI });
                s
            }
        }
    }

    pub fn total_dark_time(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Dark { duration, .. } => *duration,
                Step::Pulse { .. } => 0.0,
            })
            .sum()
    }
}

fn rotation(axis: Axis, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (0.5 * angle).sin_cos();
    let c = Complex64::new(c, 0.0);
    // exp(−iασ/2) = cos(α/2) − i sin(α/2) σ, indexed [out][in] with 0 = ↓
    let p = match axis {
        Axis::X => Pauli::X,
        Axis::Y => Pauli::Y,
    };
    let i_s = Complex64::new(0.0, -s);
    let mut u = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (out, row) in u.iter_mut().enumerate() {
        for (input, entry) in row.iter_mut().enumerate() {
            *entry = i_s * p.element(out, input) + if out == input { c } else { Complex64::new(0.0, 0.0) };
        }
    }
    u
}

/// Dissipative rates of the dark-time Lindbladian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    /// σ⁻ emission rate γ.
    pub emission: f64,
    /// Coherence dephasing rate γ_d (a σᶻ channel at γ_d/2).
    pub dephasing: f64,
}

const TAYLOR_FLOOR: f64 = 1e-17;
const TAYLOR_MAX_TERMS: usize = 80;

// dρ/dt = −i[H,ρ] + γ Σ_k (σ⁻ρσ⁺ − ½{n_k, ρ}) + (γ_d/2) Σ_k (σᶻρσᶻ − ρ),
// with σ^± the unit ladder operators here.
struct Lindbladian {
    n: usize,
    diag: DMatrix<Complex64>,
    emission: f64,
    norm_bound: f64,
}

impl Lindbladian {
    fn new(n: usize, h: &DiagonalHamiltonian, rates: Rates) -> Self {
        let dim = 1usize << n;
        let ones = |a: usize| (a.count_ones()) as f64;
        let diag = DMatrix::from_fn(dim, dim, |a, b| {
            let differing = ((a ^ b).count_ones()) as f64;
            Complex64::new(
                -0.5 * rates.emission * (ones(a) + ones(b)) - rates.dephasing * differing,
                -(h.energies[a] - h.energies[b]),
            )
        });
        let max_diag = diag.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        Self { n, diag, emission: rates.emission, norm_bound: max_diag + rates.emission * n as f64 }
    }

    fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = rho.nrows();
        let mut out = self.diag.component_mul(rho);
        if self.emission > 0.0 {
            for a in 0..dim {
                for b in 0..dim {
                    let free = !(a | b);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..self.n {
                        if free >> k & 1 == 1 {
                            acc += rho[(a | 1 << k, b | 1 << k)];
                        }
                    }
                    out[(a, b)] += self.emission * acc;
                }
            }
        }
        out
    }
}

fn dark_evolve(rho: &mut DensityMatrix, h: &DiagonalHamiltonian, rates: Rates, duration: f64) -> Result<()> {
    if duration < 0.0 || !duration.is_finite() {
        return Err(Error::Domain(format!("dark time must be finite and non-negative, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(());
    }
    let dim = rho.dim();
    if rates.emission == 0.0 && rates.dephasing == 0.0 {
        // exact phases e^{−i(E_a − E_b)t}
        let m = rho.matrix_mut();
        for a in 0..dim {
            for b in 0..dim {
                let phase = -(h.energies[a] - h.energies[b]) * duration;
                m[(a, b)] *= Complex64::new(0.0, phase).exp();
            }
        }
        return Ok(());
    }
    let l = Lindbladian::new(rho.n_spins(), h, rates);
    let steps = (duration * l.norm_bound).ceil().max(1.0) as usize;
    let h_step = duration / steps as f64;
    for _ in 0..steps {
        let start = rho.matrix().clone();
        let scale = start.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let mut term = start.clone();
        let mut acc = start;
        let mut converged = false;
        for order in 1..=TAYLOR_MAX_TERMS {
            term = l.apply(&term) * Complex64::new(h_step / order as f64, 0.0);
            acc += &term;
            let size = term.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            if size <= TAYLOR_FLOOR * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical("Taylor propagator did not converge within its term budget".into()));
        }
        *rho.matrix_mut() = acc;
    }
    Ok(())
}

/// Runs `sequence` on `rho0` with the couplings and dissipation of `proto`.
pub fn evolve_master(
    rho0: &DensityMatrix,
    couplings: &CouplingMatrix,
    proto: &RamseyProtocol,
    sequence: &PulseSequence,
) -> Result<DensityMatrix> {
    if couplings.len() != rho0.n_spins() {
        return Err(Error::Domain(format!(
            "{} couplings rows for a state of {} spins",
            couplings.len(),
            rho0.n_spins()
        )));
    }
    let rates = Rates { emission: proto.gamma(), dephasing: proto.gamma_dephasing() };
    let full = build_hamiltonian(couplings, HamiltonianKind::Full)?;
    let echo = build_hamiltonian(couplings, HamiltonianKind::Echo)?;
    let mut rho = rho0.clone();
    for step in &sequence.steps {
        match *step {
            Step::Pulse { axis, angle } => rho.rotate_all(rotation(axis, angle)),
            Step::Dark { duration, hamiltonian } => {
                let h = match hamiltonian {
                    HamiltonianKind::Full => &full,
                    HamiltonianKind::Echo => &echo,
                };
                dark_evolve(&mut rho, h, rates, duration)?;
            }
        }
    }
    Ok(rho)
}

/// Per-spin ⟨σ⁺⟩ after the sequence matching `proto` from the ground state.
pub fn oracle_sigma_plus(couplings: &CouplingMatrix, proto: &RamseyProtocol, t: f64) -> Result<Complex64> {
    let rho0 = DensityMatrix::ground(couplings.len())?;
    let rho = evolve_master(&rho0, couplings, proto, &PulseSequence::for_protocol(proto, t))?;
    super::expectation(&rho, &Observable::MeanSigmaPlus)
}

/// Result of comparing the pulsed echo with the H_echo evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoCheck {
    /// Largest |Δ⟨σ^α_k⟩| over α ∈ {x, y, z} and all spins.
    pub max_observable_deviation: f64,
    /// 1 − Tr(ρ_pulsed ρ_effective).
    pub fidelity_gap: f64,
}

/// Compares [θ, e^{−iHt/2}, π, e^{−iHt/2}] with [θ, π, e^{−iH_echo t}].
pub fn echo_equivalence_check(couplings: &CouplingMatrix, theta: f64, t: f64) -> Result<EchoCheck> {
    let proto = RamseyProtocol::new(theta, true)?;
    let rho0 = DensityMatrix::ground(couplings.len())?;
    let pulsed = evolve_master(&rho0, couplings, &proto, &PulseSequence::echo(theta, t))?;
    let reference = PulseSequence {
        steps: vec![
            Step::Pulse { axis: Axis::Y, angle: theta },
            Step::Pulse { axis: Axis::Y, angle: PI },
            Step::Dark { duration: t, hamiltonian: HamiltonianKind::Echo },
        ],
    };
    let effective = evolve_master(&rho0, couplings, &proto, &reference)?;
    let mut max_dev = 0.0f64;
    for site in 0..couplings.len() {
        for op in [Pauli::X, Pauli::Y, Pauli::Z] {
            let o = Observable::Site { site, op };
            let d = (super::expectation(&pulsed, &o)? - super::expectation(&effective, &o)?).norm();
            max_dev = max_dev.max(d);
        }
    }
    Ok(EchoCheck { max_observable_deviation: max_dev, fidelity_gap: 1.0 - pulsed.overlap(&effective)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spin_spectrum_by_hand() {
        let v = 1.7;
        let c = CouplingMatrix::from_fn(2, |_, _| v);
        let h = build_hamiltonian(&c, HamiltonianKind::Full).unwrap();
        // ↓↓: V/4 − V/2; ↑↓ and ↓↑: −V/4; ↑↑: V/4 + V/2
        assert_eq!(h.energies, vec![-0.25 * v, -0.25 * v, -0.25 * v, 0.75 * v]);
        let e = build_hamiltonian(&c, HamiltonianKind::Echo).unwrap();
        assert_eq!(e.energies, vec![0.25 * v, -0.25 * v, -0.25 * v, 0.25 * v]);
    }

    #[test]
    fn trivial_hamiltonians() {
        let one = CouplingMatrix::from_fn(1, |_, _| 1.0);
        assert_eq!(build_hamiltonian(&one, HamiltonianKind::Full).unwrap().energies, vec![0.0, 0.0]);
        let free = CouplingMatrix::from_fn(3, |_, _| 0.0);
        assert!(build_hamiltonian(&free, HamiltonianKind::Full).unwrap().energies.iter().all(|&e| e == 0.0));
        assert!(build_hamiltonian(&CouplingMatrix::from_fn(9, |_, _| 0.0), HamiltonianKind::Full).is_err());
    }

    #[test]
    fn pulse_convention() {
        let theta = 1.1;
        let c = CouplingMatrix::from_fn(1, |_, _| 0.0);
        let p = RamseyProtocol::new(theta, false).unwrap();
        let s = oracle_sigma_plus(&c, &p, 0.0).unwrap();
        assert!((s - Complex64::new(theta.sin(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sequences_keep_total_dark_time() {
        assert_eq!(PulseSequence::echo(0.3, 2.5).total_dark_time(), 2.5);
        assert_eq!(PulseSequence::ramsey(0.3, 2.5).total_dark_time(), 2.5);
        let p = RamseyProtocol::new(0.3, true).unwrap().with_echo_model(EchoModel::Pulsed);
        assert_eq!(PulseSequence::for_protocol(&p, 4.0).total_dark_time(), 4.0);
    }

    #[test]
    fn single_spin_coherence_decays_at_half_gamma() {
        let gamma = 0.8;
        let c = CouplingMatrix::from_fn(1, |_, _| 0.0);
        let p = RamseyProtocol::new(PI / 2.0, false).unwrap().with_emission(gamma).unwrap();
        let (t1, t2) = (0.5, 2.5);
        let a = oracle_sigma_plus(&c, &p, t1).unwrap().norm();
        let b = oracle_sigma_plus(&c, &p, t2).unwrap().norm();
        let rate = (a / b).ln() / (t2 - t1);
        assert!((rate / gamma - crate::ising::SELF_DECAY_COEFFICIENT).abs() < 1e-12, "rate {rate}");
    }

    #[test]
    fn dephasing_multiplies_coherence() {
        let c = CouplingMatrix::from_fn(2, |_, _| 0.9);
        let base = RamseyProtocol::new(0.7, false).unwrap();
        let deph = base.with_dephasing(0.3).unwrap();
        let t = 1.7;
        let a = oracle_sigma_plus(&c, &base, t).unwrap();
        let b = oracle_sigma_plus(&c, &deph, t).unwrap();
        assert!((b - a * (-0.3 * t).exp()).norm() < 1e-13);
    }
}
