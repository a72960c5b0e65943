use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest system the oracle handles (256 × 256 density matrices).
pub const MAX_SPINS: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Single-spin operators in the basis (↑, ↓); basis index bit k set means
/// spin k is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// σ⁺ = σˣ + iσʸ = 2|↑⟩⟨↓|.
    Plus,
    /// σ⁻ = σˣ − iσʸ = 2|↓⟩⟨↑|.
    Minus,
}

impl Pauli {
    /// Matrix element ⟨out|op|in⟩ with 1 = ↑, 0 = ↓.
    pub(crate) fn element(self, out: usize, input: usize) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match (self, out, input) {
            (Pauli::X, 1, 0) | (Pauli::X, 0, 1) => one,
            (Pauli::Y, 1, 0) => i,
            (Pauli::Y, 0, 1) => -i,
            (Pauli::Z, 1, 1) => one,
            (Pauli::Z, 0, 0) => -one,
            (Pauli::Plus, 1, 0) => 2.0 * one,
            (Pauli::Minus, 0, 1) => 2.0 * one,
            _ => ZERO,
        }
    }

    pub(crate) fn matrix(self) -> [[Complex64; 2]; 2] {
        [[self.element(0, 0), self.element(0, 1)], [self.element(1, 0), self.element(1, 1)]]
    }
}

/// Observables for [`expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Site { site: usize, op: Pauli },
    Pair { i: usize, a: Pauli, j: usize, b: Pauli },
    /// (1/N) Σ_k σ⁺_k.
    MeanSigmaPlus,
}

/// A 2ᴺ × 2ᴺ density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<Complex64>,
}

/// Deviations of a state from a physical density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub purity: f64,
}

impl Physicality {
    /// Hermitian to 1e-12, unit trace to 1e-10, eigenvalues ≥ −1e-8.
    pub fn is_physical(&self) -> bool {
        self.trace_error <= 1e-10 && self.hermiticity_error <= 1e-12 && self.min_eigenvalue >= -1e-8
    }
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n > MAX_SPINS {
        return Err(Error::Capacity(format!("oracle supports at most {MAX_SPINS} spins, got {n}")));
    }
    Ok(())
}

impl DensityMatrix {
    /// All spins down.
    pub fn ground(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1 << n;
        let mut rho = DMatrix::zeros(dim, dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        Ok(Self { n, rho })
    }

    /// |ψ⟩⟨ψ| for a state vector of length 2ᴺ.
    pub fn from_pure(n: usize, psi: &[Complex64]) -> Result<Self> {
        check_size(n)?;
        if psi.len() != 1 << n {
            return Err(Error::Domain(format!("state of {} amplitudes does not match {n} spins", psi.len())));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok(Self { n, rho: &v * v.adjoint() })
    }

    pub fn from_matrix(n: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        check_size(n)?;
        if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
            return Err(Error::Domain(format!("{}×{} matrix does not match {n} spins", rho.nrows(), rho.ncols())));
        }
        Ok(Self { n, rho })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tr(ρσ) for another state of the same size.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::Domain("states have different sizes".into()));
        }
        // Tr(ρσ) = Σ ρ_ab σ_ba = Σ ρ_ab conj(σ_ab) for Hermitian σ
        Ok(self.rho.iter().zip(other.rho.iter()).map(|(a, b)| (a * b.conj()).re).sum())
    }

    pub fn physicality(&self) -> Physicality {
        let herm = (&self.rho - self.rho.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let hermitian_part = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(hermitian_part);
        let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        Physicality {
            trace_error: (self.trace() - 1.0).norm(),
            hermiticity_error: herm,
            min_eigenvalue,
            purity: self.purity(),
        }
    }

    /// ρ ← U_k ρ U_k† for the same 2 × 2 unitary on every spin k.
    pub(crate) fn rotate_all(&mut self, u: [[Complex64; 2]; 2]) {
        let ud = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
        for k in 0..self.n {
            self.rho = apply_left(&self.rho, k, &u);
            self.rho = apply_right(&self.rho, k, &ud);
        }
    }

    /// The same state with spin labels permuted: new spin `i` is old spin
    /// `p[i]`.
    pub fn permuted(&self, p: &[usize]) -> DensityMatrix {
        let dim = self.dim();
        let map = |a: usize| -> usize {
            let mut out = 0;
            for (i, &pi) in p.iter().enumerate() {
                if a >> pi & 1 == 1 {
                    out |= 1 << i;
                }
            }
            out
        };
        let idx: Vec<usize> = (0..dim).map(map).collect();
        let mut rho = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                rho[(idx[a], idx[b])] = self.rho[(a, b)];
            }
        }
        DensityMatrix { n: self.n, rho }
    }
}

// Basis value of spin k in index a, as 0 (↓) or 1 (↑).
#[inline]
fn bit(a: usize, k: usize) -> usize {
    (a >> k) & 1
}

/// (M_k ρ) for a single-spin matrix M indexed [out][in].
pub(crate) fn apply_left(rho: &DMatrix<Complex64>, k: usize, m: &[[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    let dim = rho.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let ba = bit(a, k);
        let flipped = a ^ (1 << k);
        let (same, other) = (m[ba][ba], m[ba][1 - ba]);
        for c in 0..dim {
            out[(a, c)] = same * rho[(a, c)] + other * rho[(flipped, c)];
        }
    }
    out
}

/// (ρ M_k) for a single-spin matrix M indexed [out][in].
pub(crate) fn apply_right(rho: &DMatrix<Complex64>, k: usize, m: &[[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    let dim = rho.nrows();
    let mut out = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let bc = bit(c, k);
        let flipped = c ^ (1 << k);
        let (same, other) = (m[bc][bc], m[1 - bc][bc]);
        for a in 0..dim {
            out[(a, c)] = rho[(a, c)] * same + rho[(a, flipped)] * other;
        }
    }
    out
}

/// Tr(ρ·O).
pub fn expectation(rho: &DensityMatrix, observable: &Observable) -> Result<Complex64> {
    let n = rho.n;
    let check = |s: usize| {
        if s >= n {
            Err(Error::Domain(format!("site {s} out of range for {n} spins")))
        } else {
            Ok(())
        }
    };
    match *observable {
        Observable::Site { site, op } => {
            check(site)?;
            Ok(apply_left(&rho.rho, site, &op.matrix()).trace())
        }
        Observable::Pair { i, a, j, b } => {
            check(i)?;
            check(j)?;
            let inner = apply_left(&rho.rho, j, &b.matrix());
            Ok(apply_left(&inner, i, &a.matrix()).trace())
        }
        Observable::MeanSigmaPlus => {
            if n == 0 {
                return Err(Error::Domain("no spins".into()));
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for k in 0..n {
                sum += expectation(rho, &Observable::Site { site: k, op: Pauli::Plus })?;
            }
            Ok(sum / n as f64)
        }
    }
}
