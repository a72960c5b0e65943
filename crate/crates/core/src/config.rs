//! TOML run configuration.
//!
//! Every physical quantity is a string with a unit suffix, e.g.
//! `density = "1e12 cm^-3"`. Plain numbers are accepted only for
//! dimensionless inputs (ε, N_R bounds, fractions, counts).

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{EchoModel, RamseyProtocol};
use crate::potential::{derive_potential, DressingParams, InteractionPotential, PotentialKind};
use crate::units::{parse_quantity, Dimension, GridSpec};

/// A physical quantity as written in the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RawQuantity {
    Text(String),
    Number(f64),
}

impl RawQuantity {
    fn resolve(&self, key: &str, dim: Dimension) -> Result<f64> {
        match self {
            RawQuantity::Text(s) => parse_quantity(s, dim).map_err(|e| Error::Config(format!("{key}: {e}"))),
            RawQuantity::Number(x) => {
                Err(Error::Config(format!("{key} = {x} has no unit; write it as a string such as \"{x} <unit>\" ({dim})")))
            }
        }
    }
}

fn opt(q: &Option<RawQuantity>, key: &str, dim: Dimension) -> Result<Option<f64>> {
    q.as_ref().map(|q| q.resolve(key, dim)).transpose()
}

fn required(q: &Option<RawQuantity>, key: &str, dim: Dimension) -> Result<f64> {
    opt(q, key, dim)?.ok_or_else(|| Error::Config(format!("missing {key} ({dim})")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawPotentialKind {
    #[default]
    SoftCore,
    Bare,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPotential {
    #[serde(default)]
    pub kind: RawPotentialKind,
    pub c6: Option<RawQuantity>,
    pub detuning: Option<RawQuantity>,
    pub rabi: Option<RawQuantity>,
    /// Dressing fraction Ω₂/2Δ₂, an alternative to `rabi`.
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGas {
    pub density: Option<RawQuantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProtocol {
    pub theta: Option<RawQuantity>,
    pub echo: Option<bool>,
    pub gamma: Option<RawQuantity>,
    pub dephasing: Option<RawQuantity>,
    pub echo_model: Option<EchoModel>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub spec: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFig2 {
    pub thetas: Option<Vec<RawQuantity>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFig3 {
    pub low: Option<[f64; 2]>,
    pub high: Option<[f64; 2]>,
    pub points: Option<usize>,
    pub representative: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLattice {
    pub side: Option<usize>,
    pub spacing: Option<RawQuantity>,
    /// Snapshot times as V₀t.
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawUltrafast {
    pub fractions: Option<Vec<f64>>,
    pub density_high: Option<RawQuantity>,
    pub density_low: Option<RawQuantity>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMonteCarlo {
    pub samples: Option<usize>,
    pub atoms: Option<usize>,
    pub probes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    #[default]
    Gas,
    Lattice,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    pub system: Option<System>,
}

/// The file as written.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub potential: Option<RawPotential>,
    pub gas: Option<RawGas>,
    #[serde(default)]
    pub protocol: RawProtocol,
    pub grid: Option<RawGrid>,
    #[serde(default)]
    pub fig2: RawFig2,
    #[serde(default)]
    pub fig3: RawFig3,
    pub lattice: Option<RawLattice>,
    pub ultrafast: Option<RawUltrafast>,
    pub monte_carlo: Option<RawMonteCarlo>,
    #[serde(default)]
    pub scan: RawScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub theta: f64,
    pub echo: bool,
    pub gamma: f64,
    pub dephasing: f64,
    pub echo_model: EchoModel,
}

impl ProtocolParams {
    pub fn build(&self) -> Result<RamseyProtocol> {
        Ok(RamseyProtocol::new(self.theta, self.echo)?
            .with_emission(self.gamma)?
            .with_dephasing(self.dephasing)?
            .with_echo_model(self.echo_model))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Params {
    pub low: [f64; 2],
    pub high: [f64; 2],
    pub points: usize,
    pub representative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeParams {
    pub side: usize,
    pub spacing: f64,
    pub snapshots: Vec<f64>,
}

/// Bare-Rydberg density comparison at fixed Rydberg fractions p, with
/// θ = 2·arcsin √p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UltrafastSpec {
    pub fractions: Vec<f64>,
    pub density_high: f64,
    pub density_low: f64,
}

impl UltrafastSpec {
    pub fn new(fractions: Vec<f64>, density_high: f64, density_low: f64) -> Result<Self> {
        if fractions.is_empty() || fractions.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Config(format!("Rydberg fractions must lie in (0, 1), got {fractions:?}")));
        }
        if !(density_high > 0.0) || !(density_low > 0.0) {
            return Err(Error::Config("ultrafast densities must be positive".into()));
        }
        Ok(Self { fractions, density_high, density_low })
    }

    pub fn theta(fraction: f64) -> f64 {
        2.0 * fraction.sqrt().asin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McParams {
    pub samples: usize,
    /// `None` picks [`crate::gas::recommended_atoms`].
    pub atoms: Option<usize>,
    pub probes: usize,
}

/// Configuration in internal units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub potential: Option<InteractionPotential>,
    pub dressing: Option<DressingParams>,
    pub density: Option<f64>,
    pub protocol: ProtocolParams,
    pub grid: Option<GridSpec>,
    pub fig2_thetas: Vec<f64>,
    pub fig3: Fig3Params,
    pub lattice: Option<LatticeParams>,
    pub ultrafast: Option<UltrafastSpec>,
    pub monte_carlo: Option<McParams>,
    pub system: System,
}

impl ResolvedConfig {
    pub fn potential(&self) -> Result<InteractionPotential> {
        self.potential.ok_or_else(|| Error::Config("missing [potential] section with c6".into()))
    }

    pub fn density(&self) -> Result<f64> {
        self.density.ok_or_else(|| Error::Config("missing [gas] density".into()))
    }

    pub fn core_height(&self) -> Option<f64> {
        self.potential.and_then(|p| p.core_height()).filter(|v| *v != 0.0)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        self.grid.ok_or_else(|| Error::Config("no time grid; pass --grid or set [grid] spec".into()))
    }
}

fn resolve_potential(raw: &RawPotential) -> Result<(InteractionPotential, Option<DressingParams>)> {
    let c6 = required(&raw.c6, "potential.c6", Dimension::C6)?;
    match raw.kind {
        RawPotentialKind::Bare => {
            if raw.detuning.is_some() || raw.rabi.is_some() || raw.epsilon.is_some() {
                return Err(Error::Config("the bare potential takes only c6".into()));
            }
            let pot = InteractionPotential::bare(c6).map_err(|e| Error::Config(e.to_string()))?;
            Ok((pot, None))
        }
        RawPotentialKind::SoftCore => {
            let detuning = required(&raw.detuning, "potential.detuning", Dimension::AngularFrequency)?;
            let rabi = match (opt(&raw.rabi, "potential.rabi", Dimension::AngularFrequency)?, raw.epsilon) {
                (Some(r), None) => r,
                (None, Some(eps)) => 2.0 * detuning * eps,
                _ => return Err(Error::Config("give exactly one of potential.rabi and potential.epsilon".into())),
            };
            let dressing = DressingParams::new(rabi, detuning, c6);
            let pot = derive_potential(&dressing, PotentialKind::SoftCore).map_err(|e| Error::Config(e.to_string()))?;
            Ok((pot, Some(dressing)))
        }
    }
}

fn positive_range(name: &str, r: [f64; 2]) -> Result<[f64; 2]> {
    if !(r[0] > 0.0 && r[1] > r[0]) {
        return Err(Error::Config(format!("{name} must satisfy 0 < lo < hi, got {r:?}")));
    }
    Ok(r)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let (potential, dressing) = match &self.potential {
            Some(p) => {
                let (pot, d) = resolve_potential(p)?;
                (Some(pot), d)
            }
            None => (None, None),
        };
        let density = match &self.gas {
            Some(g) => Some(required(&g.density, "gas.density", Dimension::Density)?),
            None => None,
        };
        let p = &self.protocol;
        let protocol = ProtocolParams {
            theta: opt(&p.theta, "protocol.theta", Dimension::Angle)?.unwrap_or(PI / 2.0),
            echo: p.echo.unwrap_or(true),
            gamma: opt(&p.gamma, "protocol.gamma", Dimension::AngularFrequency)?.unwrap_or(0.0),
            dephasing: opt(&p.dephasing, "protocol.dephasing", Dimension::AngularFrequency)?.unwrap_or(0.0),
            echo_model: p.echo_model.unwrap_or_default(),
        };
        protocol.build().map_err(|e| Error::Config(e.to_string()))?;
        let grid = self.grid.as_ref().and_then(|g| g.spec.as_deref()).map(str::parse).transpose()?;
        let fig2_thetas = match &self.fig2.thetas {
            Some(list) => list.iter().map(|q| q.resolve("fig2.thetas", Dimension::Angle)).collect::<Result<_>>()?,
            None => vec![PI / 2.0, PI / 20.0],
        };
        let f3 = &self.fig3;
        let fig3 = Fig3Params {
            low: positive_range("fig3.low", f3.low.unwrap_or([1e-3, 1e-2]))?,
            high: positive_range("fig3.high", f3.high.unwrap_or([1e2, 1e3]))?,
            points: f3.points.unwrap_or(5),
            representative: f3.representative.clone().unwrap_or_else(|| vec![1e-2, 1e2]),
        };
        if fig3.points < 2 {
            return Err(Error::Config("fig3.points must be at least 2".into()));
        }
        let lattice = match &self.lattice {
            Some(l) => {
                let side = l.side.ok_or_else(|| Error::Config("missing lattice.side".into()))?;
                let spacing = required(&l.spacing, "lattice.spacing", Dimension::Length)?;
                if side == 0 || !(spacing > 0.0) {
                    return Err(Error::Config("lattice needs side ≥ 1 and a positive spacing".into()));
                }
                Some(LatticeParams { side, spacing, snapshots: l.snapshots.clone().unwrap_or_else(|| vec![PI]) })
            }
            None => None,
        };
        let ultrafast = match &self.ultrafast {
            Some(u) => Some(UltrafastSpec::new(
                u.fractions.clone().unwrap_or_else(|| vec![0.031, 0.012]),
                required(&u.density_high, "ultrafast.density_high", Dimension::Density)?,
                required(&u.density_low, "ultrafast.density_low", Dimension::Density)?,
            )?),
            None => None,
        };
        let monte_carlo = self.monte_carlo.as_ref().map(|m| McParams {
            samples: m.samples.unwrap_or(64),
            atoms: m.atoms,
            probes: m.probes.unwrap_or(64),
        });
        if monte_carlo.is_some_and(|m| m.samples < 2 || m.probes == 0) {
            return Err(Error::Config("monte_carlo needs samples ≥ 2 and probes ≥ 1".into()));
        }
        Ok(ResolvedConfig {
            potential,
            dressing,
            density,
            protocol,
            grid,
            fig2_thetas,
            fig3,
            lattice,
            ultrafast,
            monte_carlo,
            system: self.scan.system.unwrap_or_default(),
        })
    }
}

pub fn load(path: &Path) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RawConfig::parse(&text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SR: &str = r#"
        [potential]
        c6 = "1000 MHz*um^6"
        detuning = "-500 MHz"
        rabi = "100 MHz"

        [gas]
        density = "1e12 cm^-3"

        [protocol]
        theta = "0.5 pi"
        gamma = "0.047619 1/us"
    "#;

    #[test]
    fn resolves_dressed_gas() {
        let c = RawConfig::parse(SR).unwrap().resolve().unwrap();
        let pot = c.potential.unwrap();
        assert!((pot.r_c() - 1.0).abs() < 1e-12);
        assert!((pot.epsilon().abs() - 0.1).abs() < 1e-12);
        assert!((c.density.unwrap() - 1.0).abs() < 1e-12);
        assert!((pot.blockade_number(1.0) - 4.0 * PI / 3.0).abs() < 1e-10);
        assert!((c.protocol.theta - PI / 2.0).abs() < 1e-15);
        assert!(c.protocol.echo);
    }

    #[test]
    fn epsilon_alternative_matches_rabi() {
        let alt = SR.replace("rabi = \"100 MHz\"", "epsilon = -0.1");
        let a = RawConfig::parse(SR).unwrap().resolve().unwrap();
        let b = RawConfig::parse(&alt).unwrap().resolve().unwrap();
        let (pa, pb) = (a.potential.unwrap(), b.potential.unwrap());
        assert!((pa.core_height().unwrap() - pb.core_height().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unitless_quantities() {
        let bad = SR.replace("\"1e12 cm^-3\"", "1.0");
        match RawConfig::parse(&bad).unwrap().resolve() {
            Err(Error::Config(msg)) => assert!(msg.contains("no unit"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let bad = SR.replace("\"0.5 pi\"", "1.57");
        assert!(matches!(RawConfig::parse(&bad).unwrap().resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn missing_c6_is_a_config_error() {
        let bad = SR.replace("c6 = \"1000 MHz*um^6\"", "");
        assert!(matches!(RawConfig::parse(&bad).unwrap().resolve(), Err(Error::Config(_))));
        let c = RawConfig::parse("").unwrap().resolve().unwrap();
        assert!(matches!(c.potential(), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_regimes() {
        assert!(RawConfig::parse("[gas]\ndensty = \"1 um^-3\"").is_err());
        let same_sign = SR.replace("-500 MHz", "500 MHz");
        assert!(matches!(RawConfig::parse(&same_sign).unwrap().resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn ultrafast_fraction_mapping() {
        let text = r#"
            [potential]
            kind = "bare"
            c6 = "-10 GHz*um^6"
            [ultrafast]
            density_high = "1.3e12 cm^-3"
            density_low = "4e10 cm^-3"
        "#;
        let c = RawConfig::parse(text).unwrap().resolve().unwrap();
        let u = c.ultrafast.unwrap();
        assert_eq!(u.fractions, vec![0.031, 0.012]);
        let theta = UltrafastSpec::theta(0.031);
        assert!(((theta / 2.0).sin().powi(2) - 0.031).abs() < 1e-15);
        assert!(UltrafastSpec::new(vec![1.0], 1.0, 1.0).is_err());
    }
}
