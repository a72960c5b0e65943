//! Unit-filled square lattices with open boundaries.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{
    connected_sxsx, sigma_plus_config, trace, AtomConfiguration, ContrastTrace, CouplingMatrix, Normalization,
    RamseyProtocol,
};
use crate::potential::InteractionPotential;

/// An L × L lattice with spacing `spacing` (μm), one atom per site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    side: usize,
    spacing: f64,
    potential: InteractionPotential,
    protocol: RamseyProtocol,
}

impl LatticeSpec {
    pub fn new(side: usize, spacing: f64, potential: InteractionPotential, protocol: RamseyProtocol) -> Result<Self> {
        if side == 0 {
            return Err(Error::Parameter("lattice needs at least one site per side".into()));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Parameter(format!("lattice spacing must be positive, got {spacing}")));
        }
        Ok(Self { side, spacing, potential, protocol })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn potential(&self) -> &InteractionPotential {
        &self.potential
    }

    pub fn protocol(&self) -> &RamseyProtocol {
        &self.protocol
    }

    pub fn with_protocol(&self, protocol: RamseyProtocol) -> Self {
        Self { protocol, ..*self }
    }

    pub fn n_atoms(&self) -> usize {
        self.side * self.side
    }

    /// Site (x, y) has index y·L + x and position (x·a, y·a, 0).
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.side + x
    }

    pub fn coordinates(&self, index: usize) -> (usize, usize) {
        (index % self.side, index / self.side)
    }

    /// The central site, (⌊L/2⌋, ⌊L/2⌋).
    pub fn center(&self) -> (usize, usize) {
        (self.side / 2, self.side / 2)
    }

    pub fn configuration(&self) -> AtomConfiguration {
        let positions = (0..self.n_atoms())
            .map(|k| {
                let (x, y) = self.coordinates(k);
                [x as f64 * self.spacing, y as f64 * self.spacing, 0.0]
            })
            .collect();
        AtomConfiguration::new(positions).expect("lattice sites are distinct")
    }

    pub fn couplings(&self) -> CouplingMatrix {
        self.configuration().couplings(&self.potential)
    }
}

/// Per-spin ⟨σ⁺(t)⟩ on the lattice.
pub fn lattice_contrast(spec: &LatticeSpec, t: f64) -> Result<Complex64> {
    sigma_plus_config(&spec.couplings(), &spec.protocol, t, Normalization::PerSpin)
}

pub fn lattice_trace(spec: &LatticeSpec, times: &[f64], normalization: Normalization) -> Result<ContrastTrace> {
    trace(&spec.couplings(), &spec.protocol, times, normalization)
}

/// 𝒢(reference, j) = ⟨Sˣ_ref Sˣ_j⟩ − ⟨Sˣ_ref⟩⟨Sˣ_j⟩ for every site j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub side: usize,
    pub spacing: f64,
    pub reference: (usize, usize),
    pub time: f64,
    /// Row-major L × L grid indexed [y][x]; `None` at the reference site.
    pub grid: Vec<Vec<Option<f64>>>,
}

impl CorrelationMap {
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.grid[y][x]
    }

    /// `(x, y, distance in μm, G)` for every site other than the reference.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        let (rx, ry) = self.reference;
        self.grid.iter().enumerate().flat_map(move |(y, row)| {
            row.iter().enumerate().filter_map(move |(x, g)| {
                g.map(|g| {
                    let dx = x as f64 - rx as f64;
                    let dy = y as f64 - ry as f64;
                    (x, y, self.spacing * dx.hypot(dy), g)
                })
            })
        })
    }

    /// CSV with header `site_x,site_y,G`, one line per non-reference site.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site_x,site_y,G\n");
        for (x, y, _, g) in self.entries() {
            out.push_str(&format!("{x},{y},{g:.17e}\n"));
        }
        out
    }

    /// Largest |G(x, y) − G(s(x, y))| over the eight symmetries s of the
    /// square about the reference site. Sites mapped off the lattice are
    /// skipped.
    pub fn d4_asymmetry(&self) -> f64 {
        let (rx, ry) = (self.reference.0 as i64, self.reference.1 as i64);
        let l = self.side as i64;
        let ops: [fn(i64, i64) -> (i64, i64); 8] = [
            |x, y| (x, y),
            |x, y| (-y, x),
            |x, y| (-x, -y),
            |x, y| (y, -x),
            |x, y| (-x, y),
            |x, y| (x, -y),
            |x, y| (y, x),
            |x, y| (-y, -x),
        ];
        let mut worst = 0.0f64;
        for (x, y, _, g) in self.entries() {
            let (dx, dy) = (x as i64 - rx, y as i64 - ry);
            for op in &ops {
                let (sx, sy) = op(dx, dy);
                let (tx, ty) = (rx + sx, ry + sy);
                if (0..l).contains(&tx) && (0..l).contains(&ty) {
                    if let Some(h) = self.grid[ty as usize][tx as usize] {
                        worst = worst.max((g - h).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Connected correlations between `center` (default: the central site) and
/// every other site. Needs γ = γ_d = 0.
pub fn correlation_map(spec: &LatticeSpec, t: f64, center: Option<(usize, usize)>) -> Result<CorrelationMap> {
    if spec.protocol.is_dissipative() {
        return Err(Error::Unsupported(
            "correlation maps need γ = γ_d = 0; the master-equation oracle covers dissipative lattices of up to 8 sites"
                .into(),
        ));
    }
    let reference = center.unwrap_or_else(|| spec.center());
    if reference.0 >= spec.side || reference.1 >= spec.side {
        return Err(Error::Domain(format!("reference site {reference:?} is outside the {0}×{0} lattice", spec.side)));
    }
    let couplings = spec.couplings();
    let i = spec.index(reference.0, reference.1);
    let values = (0..spec.n_atoms())
        .into_par_iter()
        .map(|j| if j == i { Ok(None) } else { connected_sxsx(&couplings, &spec.protocol, i, j, t).map(Some) })
        .collect::<Result<Vec<_>>>()?;
    let grid = values.chunks(spec.side).map(|row| row.to_vec()).collect();
    Ok(CorrelationMap { side: spec.side, spacing: spec.spacing, reference, time: t, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(side: usize, spacing: f64) -> LatticeSpec {
        let pot = InteractionPotential::soft_core(1.0, 1.0, 0.1).unwrap();
        LatticeSpec::new(side, spacing, pot, RamseyProtocol::new(PI / 2.0, true).unwrap()).unwrap()
    }

    #[test]
    fn single_site_is_free() {
        let s = spec(1, 0.5).with_protocol(RamseyProtocol::new(0.7, false).unwrap().with_emission(0.2).unwrap());
        let t = 3.0;
        let expected = s.protocol().single_spin_prefactor(t);
        assert!((lattice_contrast(&s, t).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn sparse_lattice_is_free() {
        let s = spec(5, 100.0);
        assert!((lattice_contrast(&s, 7.0).unwrap() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn map_layout_and_zero_time() {
        let s = spec(5, 0.5);
        let m = correlation_map(&s, 0.0, None).unwrap();
        assert_eq!(m.reference, (2, 2));
        assert_eq!(m.get(2, 2), None);
        assert!(m.entries().all(|(_, _, _, g)| g.abs() < 1e-12));
        assert_eq!(m.to_csv().lines().count(), 25);
    }

    #[test]
    fn map_is_symmetric_about_center() {
        let m = correlation_map(&spec(7, 0.5), 2.0, None).unwrap();
        assert!(m.d4_asymmetry() < 1e-12);
        assert!(m.entries().all(|(_, _, _, g)| g.abs() <= 0.25));
    }

    #[test]
    fn rejects_dissipation_and_bad_center() {
        let s = spec(3, 0.5);
        assert!(correlation_map(&s, 1.0, Some((3, 0))).is_err());
        let d = s.with_protocol(RamseyProtocol::new(1.0, true).unwrap().with_emission(0.1).unwrap());
        assert!(matches!(correlation_map(&d, 1.0, None), Err(Error::Unsupported(_))));
    }
}
