use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::InteractionPotential;

/// Frozen atom positions (μm), optionally in a periodic cubic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomConfiguration {
    positions: Vec<[f64; 3]>,
    box_length: Option<f64>,
}

impl AtomConfiguration {
    /// Open-boundary configuration. Fails if two atoms coincide.
    pub fn new(positions: Vec<[f64; 3]>) -> Result<Self> {
        let cfg = Self { positions, box_length: None };
        cfg.check_distinct()?;
        Ok(cfg)
    }

    /// Periodic cubic box of side `box_length` with minimum-image distances.
    pub fn periodic(positions: Vec<[f64; 3]>, box_length: f64) -> Result<Self> {
        if !(box_length > 0.0) {
            return Err(Error::Parameter(format!("box length must be positive, got {box_length}")));
        }
        let cfg = Self { positions, box_length: Some(box_length) };
        cfg.check_distinct()?;
        Ok(cfg)
    }

    // Sampled gases: coincident points have probability zero.
    pub(crate) fn periodic_unchecked(positions: Vec<[f64; 3]>, box_length: f64) -> Self {
        Self { positions, box_length: Some(box_length) }
    }

    fn check_distinct(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in 0..i {
                if self.distance_squared(i, j) == 0.0 {
                    return Err(Error::Domain(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn box_length(&self) -> Option<f64> {
        self.box_length
    }

    #[inline]
    pub fn distance_squared(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        let mut d2 = 0.0;
        for axis in 0..3 {
            let mut d = a[axis] - b[axis];
            if let Some(l) = self.box_length {
                d -= l * (d / l).round();
            }
            d2 += d * d;
        }
        d2
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_squared(i, j).sqrt()
    }

    /// V(r_jk) for every pair.
    pub fn couplings(&self, pot: &InteractionPotential) -> CouplingMatrix {
        CouplingMatrix::from_fn(self.len(), |i, j| pot.at_squared(self.distance_squared(i, j)))
    }

    /// Couplings of atom `k` to every atom (zero on itself).
    pub fn coupling_row(&self, pot: &InteractionPotential, k: usize) -> Vec<f64> {
        (0..self.len())
            .map(|j| if j == k { 0.0 } else { pot.at_squared(self.distance_squared(k, j)) })
            .collect()
    }
}

/// Symmetric pair couplings V_jk (rad/μs) with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    /// Builds the matrix from `value(i, j)` for i < j.
    pub fn from_fn(n: usize, mut value: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = value(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values }
    }

    /// Validates a dense row-major matrix.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Parameter(format!("expected {} entries, got {}", n * n, values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Parameter(format!("diagonal entry {i} is nonzero")));
            }
            for j in 0..i {
                if values[i * n + j] != values[j * n + i] {
                    return Err(Error::Parameter(format!("couplings ({i},{j}) are not symmetric")));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("couplings must be finite".into()));
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Largest |V_jk|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Relabels atoms: entry (i, j) of the result is entry (p[i], p[j]).
    pub fn permuted(&self, p: &[usize]) -> Self {
        Self::from_fn(self.n, |i, j| self.get(p[i], p[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coincident_atoms() {
        assert!(AtomConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0; 3]]).is_err());
        assert!(AtomConfiguration::periodic(vec![[0.0; 3], [2.0, 0.0, 0.0]], 2.0).is_err());
    }

    #[test]
    fn minimum_image() {
        let cfg = AtomConfiguration::periodic(vec![[0.1, 0.0, 0.0], [9.9, 0.0, 0.0]], 10.0).unwrap();
        assert!((cfg.distance(0, 1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn couplings_symmetric_zero_diagonal() {
        let pot = InteractionPotential::soft_core(2.0, 1.0, 0.1).unwrap();
        let cfg = AtomConfiguration::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 0.5, 0.3]]).unwrap();
        let c = cfg.couplings(&pot);
        for i in 0..3 {
            assert_eq!(c.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(c.get(i, j), c.get(j, i));
            }
        }
        assert!((c.get(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(cfg.coupling_row(&pot, 1), c.row(1).to_vec());
    }

    #[test]
    fn dense_validation() {
        assert!(CouplingMatrix::from_dense(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
        assert!(CouplingMatrix::from_dense(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(CouplingMatrix::from_dense(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(CouplingMatrix::from_dense(2, vec![0.0, 1.0, 1.0]).is_err());
    }
}
