//! Python bindings for `rydberg_ramsey`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rydberg_ramsey::gas::{self, DimensionlessPoint, GasSpec, Regime};
use rydberg_ramsey::ising::{self, AtomConfiguration, CouplingMatrix, EchoModel, Normalization, RamseyProtocol};
use rydberg_ramsey::lattice::{self, LatticeSpec};
use rydberg_ramsey::oracle;
use rydberg_ramsey::potential::{derive_potential, DressingParams, InteractionPotential, PotentialKind};
use rydberg_ramsey::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) | Error::NotFound(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for Result<T, Error> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Pair potential: soft core or bare van der Waals.
#[pyclass(name = "Potential", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyPotential(InteractionPotential);

#[pymethods]
impl PyPotential {
    /// V(r) = V0 / (1 + (r / r_c)^6).
    #[staticmethod]
    fn soft_core(v0: f64, r_c: f64, epsilon: f64) -> PyResult<Self> {
        InteractionPotential::soft_core(v0, r_c, epsilon).py().map(Self)
    }

    /// V(r) = C6 / r^6.
    #[staticmethod]
    fn bare(c6: f64) -> PyResult<Self> {
        InteractionPotential::bare(c6).py().map(Self)
    }

    /// Soft core implied by the dressing Rabi frequency, detuning and C6.
    #[staticmethod]
    fn from_dressing(rabi: f64, detuning: f64, c6: f64) -> PyResult<Self> {
        derive_potential(&DressingParams::new(rabi, detuning, c6), PotentialKind::SoftCore).py().map(Self)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.kind() {
            PotentialKind::SoftCore => "soft-core",
            PotentialKind::BareVdW => "bare",
        }
    }

    #[getter]
    fn r_c(&self) -> f64 {
        self.0.r_c()
    }

    #[getter]
    fn core_height(&self) -> Option<f64> {
        self.0.core_height()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    #[getter]
    fn c6(&self) -> f64 {
        self.0.c6()
    }

    fn __call__(&self, r: f64) -> PyResult<f64> {
        self.0.evaluate(r).py()
    }

    fn blockade_number(&self, density: f64) -> f64 {
        self.0.blockade_number(density)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Ramsey sequence: tipping angle, echo and dissipation rates.
#[pyclass(name = "Protocol", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyProtocol(RamseyProtocol);

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (theta, echo, gamma = 0.0, dephasing = 0.0, echo_model = "effective"))]
    fn new(theta: f64, echo: bool, gamma: f64, dephasing: f64, echo_model: &str) -> PyResult<Self> {
        let model = match echo_model {
            "effective" => EchoModel::Effective,
            "pulsed" => EchoModel::Pulsed,
            other => return Err(PyValueError::new_err(format!("unknown echo model '{other}'"))),
        };
        let p = RamseyProtocol::new(theta, echo).py()?.with_emission(gamma).py()?.with_dephasing(dephasing).py()?;
        Ok(Self(p.with_echo_model(model)))
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn echo(&self) -> bool {
        self.0.echo()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn dephasing(&self) -> f64 {
        self.0.gamma_dephasing()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

fn couplings(positions: Vec<[f64; 3]>, potential: &PyPotential) -> PyResult<CouplingMatrix> {
    Ok(AtomConfiguration::new(positions).py()?.couplings(&potential.0))
}

fn normalization(name: &str) -> PyResult<Normalization> {
    name.parse().py()
}

/// Neighbour factor f(X, g; θ, β).
#[pyfunction]
fn f_kernel(x: f64, g: f64, theta: f64, beta: f64) -> Complex64 {
    ising::f_kernel(x, g, theta, beta)
}

/// ⟨σ⁺(t)⟩ of atoms at `positions` (μm).
#[pyfunction]
#[pyo3(signature = (positions, potential, protocol, t, normalization = "per-spin"))]
fn sigma_plus(
    positions: Vec<[f64; 3]>,
    potential: &PyPotential,
    protocol: &PyProtocol,
    t: f64,
    normalization: &str,
) -> PyResult<Complex64> {
    let c = couplings(positions, potential)?;
    ising::sigma_plus_config(&c, &protocol.0, t, self::normalization(normalization)?).py()
}

/// ⟨σ⁺(t)⟩ from the master-equation oracle (at most 8 atoms).
#[pyfunction]
fn oracle_sigma_plus(positions: Vec<[f64; 3]>, potential: &PyPotential, protocol: &PyProtocol, t: f64) -> PyResult<Complex64> {
    oracle::oracle_sigma_plus(&couplings(positions, potential)?, &protocol.0, t).py()
}

/// (max observable deviation, fidelity gap) between the pulsed echo and
/// evolution under the echo Hamiltonian.
#[pyfunction]
fn echo_equivalence(positions: Vec<[f64; 3]>, potential: &PyPotential, theta: f64, t: f64) -> PyResult<(f64, f64)> {
    let r = oracle::echo_equivalence_check(&couplings(positions, potential)?, theta, t).py()?;
    Ok((r.max_observable_deviation, r.fidelity_gap))
}

/// Connected ⟨Sˣ_i Sˣ_j⟩ for a dissipation-free protocol.
#[pyfunction]
fn connected_sxsx(
    positions: Vec<[f64; 3]>,
    potential: &PyPotential,
    protocol: &PyProtocol,
    i: usize,
    j: usize,
    t: f64,
) -> PyResult<f64> {
    ising::connected_sxsx(&couplings(positions, potential)?, &protocol.0, i, j, t).py()
}

fn gas_spec(density: f64, potential: &PyPotential, protocol: &PyProtocol) -> PyResult<GasSpec> {
    GasSpec::new(density, potential.0, protocol.0).py()
}

/// Per-spin ⟨σ⁺(t)⟩ of a uniform gas (density in μm⁻³).
#[pyfunction]
fn contrast_gas(density: f64, potential: &PyPotential, protocol: &PyProtocol, t: f64) -> PyResult<Complex64> {
    gas::contrast_gas(&gas_spec(density, potential, protocol)?, t).py()
}

/// The exponent I(t) of the gas average.
#[pyfunction]
fn exponent_integral(density: f64, potential: &PyPotential, protocol: &PyProtocol, t: f64) -> PyResult<Complex64> {
    gas::exponent_integral(&gas_spec(density, potential, protocol)?, t).py()
}

/// Time at which the gas contrast first halves (μs).
#[pyfunction]
fn tau_half(density: f64, potential: &PyPotential, protocol: &PyProtocol) -> PyResult<f64> {
    gas::tau_half(&gas_spec(density, potential, protocol)?).py()
}

/// Low- or high-density form of the quarter-turn contrast.
#[pyfunction]
#[pyo3(signature = (blockade_number, v0t, echo, regime, b = gas::DEFAULT_HIGH_DENSITY_B))]
fn asymptotic_contrast(blockade_number: f64, v0t: f64, echo: bool, regime: &str, b: f64) -> PyResult<f64> {
    let regime = match regime {
        "low" => Regime::Low,
        "high" => Regime::High,
        other => return Err(PyValueError::new_err(format!("regime must be 'low' or 'high', got '{other}'"))),
    };
    let point = DimensionlessPoint::new(blockade_number, v0t, std::f64::consts::FRAC_PI_2, echo);
    Ok(gas::asymptotic_contrast(&point, regime, b).py()?.value)
}

/// (mean, standard error) of the per-spin ⟨σ⁺⟩ over random configurations.
#[pyfunction]
#[pyo3(signature = (density, potential, protocol, t, n_samples, n_atoms, seed = 0))]
fn monte_carlo_gas(
    density: f64,
    potential: &PyPotential,
    protocol: &PyProtocol,
    t: f64,
    n_samples: usize,
    n_atoms: usize,
    seed: u64,
) -> PyResult<(Complex64, f64)> {
    let est = gas::monte_carlo_gas(&gas_spec(density, potential, protocol)?, t, n_samples, n_atoms, seed).py()?;
    Ok((est.mean, est.standard_error))
}

fn lattice_spec(side: usize, spacing: f64, potential: &PyPotential, protocol: &PyProtocol) -> PyResult<LatticeSpec> {
    LatticeSpec::new(side, spacing, potential.0, protocol.0).py()
}

/// Per-spin ⟨σ⁺(t)⟩ on a side × side lattice.
#[pyfunction]
fn lattice_contrast(side: usize, spacing: f64, potential: &PyPotential, protocol: &PyProtocol, t: f64) -> PyResult<Complex64> {
    lattice::lattice_contrast(&lattice_spec(side, spacing, potential, protocol)?, t).py()
}

/// Connected correlations with the central site as grid[y][x]; None at the
/// reference site.
#[pyfunction]
fn correlation_map(
    side: usize,
    spacing: f64,
    potential: &PyPotential,
    protocol: &PyProtocol,
    t: f64,
) -> PyResult<Vec<Vec<Option<f64>>>> {
    Ok(lattice::correlation_map(&lattice_spec(side, spacing, potential, protocol)?, t, None).py()?.grid)
}

#[pymodule]
fn rydberg_ramsey_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(f_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_plus, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_sigma_plus, m)?)?;
    m.add_function(wrap_pyfunction!(echo_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(connected_sxsx, m)?)?;
    m.add_function(wrap_pyfunction!(contrast_gas, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_integral, m)?)?;
    m.add_function(wrap_pyfunction!(tau_half, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_contrast, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_gas, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_contrast, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_map, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_python_kinds() {
        Python::initialize();
        Python::attach(|py| {
            assert!(to_py(Error::Config("x".into())).is_instance_of::<PyValueError>(py));
            assert!(to_py(Error::Numerical("x".into())).is_instance_of::<PyRuntimeError>(py));
        });
    }

    #[test]
    fn kernel_matches_core() {
        let z = f_kernel(1.3, 0.2, 0.7, 1.0);
        assert_eq!(z, ising::f_kernel(1.3, 0.2, 0.7, 1.0));
    }
}
