use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{Artifact, Cell, Csv, RunOutput};
use crate::config::{ProtocolParams, ResolvedConfig, System, UltrafastSpec};
use crate::error::{Error, Result};
use crate::gas::{
    asymptotic_contrast, contrast_gas, exponent_integral, fit_high_density_b, half_time, monte_carlo_gas_times,
    recommended_atoms, tau_half, DimensionlessPoint, GasSpec, McOptions, Regime, DEFAULT_HIGH_DENSITY_B,
};
use crate::ising::{ContrastTrace, Normalization, RamseyProtocol};
use crate::lattice::{correlation_map, lattice_contrast, lattice_trace, CorrelationMap, LatticeSpec};
use crate::potential::PotentialKind;
use crate::units::{to_unit, Dimension};

// search window for half-times in units of 1/|V₀|
const TAU_WINDOW: (f64, f64) = (1e-4, 1e9);

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Least-squares slope of ln y against ln x.
pub(crate) fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn is_quarter_turn(theta: f64) -> bool {
    (theta - PI / 2.0).abs() < 1e-12
}

/// Echo and non-echo gas contrast at θ = π/2 and π/20 (by default) plus the
/// single-spin curve, on the configured grid.
pub fn run_fig2(cfg: &ResolvedConfig) -> Result<RunOutput> {
    let pot = cfg.potential()?;
    let density = cfg.density()?;
    let v0 = cfg.core_height();
    let times = cfg.grid()?.times(v0)?;
    let base = cfg.protocol;
    let mut files = Vec::new();
    let mut curves = Vec::new();
    for (k, &theta) in cfg.fig2_thetas.iter().enumerate() {
        let echo = GasSpec::new(density, pot, ProtocolParams { theta, echo: true, ..base }.build()?)?;
        let noecho = echo.with_protocol(ProtocolParams { theta, echo: false, ..base }.build()?);
        let rows = times
            .par_iter()
            .map(|&t| {
                Ok((
                    contrast_gas(&echo, t)?.norm(),
                    contrast_gas(&noecho, t)?.norm(),
                    echo.protocol().single_spin_prefactor(t),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut csv = Csv::new(&["t_us", "V0t", "C_echo", "C_noecho", "C_noninteracting"]);
        for (&t, &(ce, cn, free)) in times.iter().zip(&rows) {
            csv.row(&[Cell::F(t), Cell::Opt(v0.map(|v| v * t)), Cell::F(ce), Cell::F(cn), Cell::F(free)]);
        }
        let name = format!("fig2_theta{k}.csv");
        files.push(csv.finish(name.clone()));
        let tau_e = tau_half(&echo)?;
        let tau_n = tau_half(&noecho)?;
        curves.push(json!({
            "file": name,
            "theta": theta,
            "tau_half_echo_us": tau_e,
            "tau_half_noecho_us": tau_n,
            "v0_tau_half_echo": v0.map(|v| v.abs() * tau_e),
            "v0_tau_half_noecho": v0.map(|v| v.abs() * tau_n),
            "echo_faster": tau_e < tau_n,
        }));
    }

    // the same gas without dissipation at a quarter turn
    let clean = |echo| ProtocolParams { theta: PI / 2.0, echo, gamma: 0.0, dephasing: 0.0, ..base }.build();
    let clean_e = GasSpec::new(density, pot, clean(true)?)?;
    let clean_n = clean_e.with_protocol(clean(false)?);
    let (tau_e, tau_n) = (tau_half(&clean_e)?, tau_half(&clean_n)?);
    let early: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0 && t <= tau_e.min(tau_n)).collect();
    let noecho_not_slower = early
        .iter()
        .map(|&t| Ok(contrast_gas(&clean_n, t)?.norm() <= contrast_gas(&clean_e, t)?.norm() + 1e-12))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);

    let summary = json!({
        "blockade_number": clean_e.blockade_number(),
        "v0": v0,
        "r_c_um": pot.r_c(),
        "gamma_over_v0": v0.map(|v| base.gamma / v),
        "curves": curves,
        "dissipation_free_quarter_turn": {
            "tau_half_echo_us": tau_e,
            "tau_half_noecho_us": tau_n,
            "noecho_faster": tau_n < tau_e,
            "noecho_not_slower_before_first_half_time": noecho_not_slower,
        },
    });
    Ok(RunOutput::new(files, summary))
}

fn dimensionless(n_r: f64, sign: f64, x: f64, theta: f64, echo: bool, ratios: (f64, f64)) -> DimensionlessPoint {
    DimensionlessPoint {
        gamma_over_v0: ratios.0,
        dephasing_over_v0: ratios.1,
        ..DimensionlessPoint::new(n_r, sign * x, theta, echo)
    }
}

/// |V₀|·τ₁/₂ of the soft-core gas from the dimensionless numbers alone.
fn v0_tau_half(n_r: f64, sign: f64, theta: f64, echo: bool, ratios: (f64, f64)) -> Result<f64> {
    half_time(
        |x| Ok(dimensionless(n_r, sign, x, theta, echo, ratios).contrast()?.norm()),
        TAU_WINDOW.0,
        TAU_WINDOW.1,
    )
}

struct TauRow {
    n_r: f64,
    regime: &'static str,
    echo: f64,
    noecho: f64,
}

fn tau_sweep(cfg: &ResolvedConfig, sign: f64, ratios: (f64, f64)) -> Result<Vec<TauRow>> {
    let f3 = &cfg.fig3;
    let theta = cfg.protocol.theta;
    let mut points: Vec<(f64, &'static str)> =
        log_space(f3.low[0], f3.low[1], f3.points).into_iter().map(|n| (n, "low")).collect();
    points.extend(log_space(f3.high[0], f3.high[1], f3.points).into_iter().map(|n| (n, "high")));
    points
        .par_iter()
        .map(|&(n_r, regime)| {
            Ok(TauRow {
                n_r,
                regime,
                echo: v0_tau_half(n_r, sign, theta, true, ratios)?,
                noecho: v0_tau_half(n_r, sign, theta, false, ratios)?,
            })
        })
        .collect()
}

fn tau_csv(rows: &[TauRow], v0: f64, name: &str) -> Artifact {
    let mut csv = Csv::new(&["N_R", "regime", "V0tau_echo", "V0tau_noecho", "tau_echo_us", "tau_noecho_us"]);
    for r in rows {
        csv.row(&[
            Cell::F(r.n_r),
            Cell::S(r.regime.into()),
            Cell::F(r.echo),
            Cell::F(r.noecho),
            Cell::F(r.echo / v0.abs()),
            Cell::F(r.noecho / v0.abs()),
        ]);
    }
    csv.finish(name)
}

fn slopes(rows: &[TauRow]) -> Value {
    let fit = |regime: &str, echo: bool| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.regime == regime)
            .map(|r| (r.n_r, if echo { r.echo } else { r.noecho }))
            .collect();
        log_slope(&pts)
    };
    json!({
        "low_echo": fit("low", true),
        "low_noecho": fit("low", false),
        "high_echo": fit("high", true),
        "high_noecho": fit("high", false),
    })
}

/// Contrast curves at representative N_R with their asymptotic forms, and
/// τ₁/₂ against N_R in both density limits, with and without dissipation.
pub fn run_fig3(cfg: &ResolvedConfig) -> Result<RunOutput> {
    cfg.potential()?;
    let v0 = cfg.core_height().ok_or_else(|| Error::Config("fig3 needs a soft-core potential".into()))?;
    let sign = v0.signum();
    let theta = cfg.protocol.theta;
    let times = cfg.grid()?.times(Some(v0))?;
    let xs: Vec<f64> = times.iter().map(|t| v0.abs() * t).collect();
    let quarter = is_quarter_turn(theta);

    let mut csv = Csv::new(&[
        "N_R",
        "t_us",
        "V0t",
        "C_echo",
        "C_noecho",
        "low_density_echo",
        "low_density_noecho",
        "high_density_echo",
        "high_density_noecho",
    ]);
    let mut fits = Vec::new();
    for &n_r in &cfg.fig3.representative {
        let values = xs
            .par_iter()
            .map(|&x| {
                let e = dimensionless(n_r, sign, x, theta, true, (0.0, 0.0)).contrast()?.norm();
                let n = dimensionless(n_r, sign, x, theta, false, (0.0, 0.0)).contrast()?.norm();
                Ok((e, n))
            })
            .collect::<Result<Vec<_>>>()?;
        let fit_b = |echo: bool| -> Option<f64> {
            if !(quarter && n_r > 1.0) {
                return None;
            }
            let samples: Vec<(f64, f64)> = xs
                .iter()
                .zip(&values)
                .map(|(&x, &(e, n))| (x, if echo { e } else { n }))
                .filter(|&(x, c)| x > 0.0 && x <= PI && c > 1e-8)
                .collect();
            fit_high_density_b(&samples, n_r, if echo { 0.0 } else { 1.0 }).ok()
        };
        let (b_echo, b_noecho) = (fit_b(true), fit_b(false));
        for ((&t, &x), &(e, n)) in times.iter().zip(&xs).zip(&values) {
            let asym = |echo: bool, regime: Regime, b: Option<f64>| -> Result<Option<f64>> {
                if !quarter {
                    return Ok(None);
                }
                let pt = dimensionless(n_r, sign, x, theta, echo, (0.0, 0.0));
                Ok(Some(asymptotic_contrast(&pt, regime, b.unwrap_or(DEFAULT_HIGH_DENSITY_B))?.value))
            };
            csv.row(&[
                Cell::F(n_r),
                Cell::F(t),
                Cell::F(x),
                Cell::F(e),
                Cell::F(n),
                Cell::Opt(asym(true, Regime::Low, None)?),
                Cell::Opt(asym(false, Regime::Low, None)?),
                Cell::Opt(asym(true, Regime::High, b_echo)?),
                Cell::Opt(asym(false, Regime::High, b_noecho)?),
            ]);
        }
        fits.push(json!({ "blockade_number": n_r, "b_echo": b_echo, "b_noecho": b_noecho }));
    }

    let clean = tau_sweep(cfg, sign, (0.0, 0.0))?;
    let ratios = (cfg.protocol.gamma / v0, cfg.protocol.dephasing / v0);
    let dissipative = tau_sweep(cfg, sign, ratios)?;
    let low_echo_faster = clean.iter().filter(|r| r.regime == "low").all(|r| r.echo < r.noecho);
    let files = vec![
        csv.finish("fig3_curves.csv"),
        tau_csv(&clean, v0, "fig3_tau.csv"),
        tau_csv(&dissipative, v0, "fig3_tau_dissipative.csv"),
    ];
    let summary = json!({
        "theta": theta,
        "v0": v0,
        "high_density_fits": fits,
        "slopes": slopes(&clean),
        "slopes_dissipative": slopes(&dissipative),
        "gamma_over_v0": ratios.0,
        "dephasing_over_v0": ratios.1,
        "low_density_echo_faster": low_echo_faster,
    });
    Ok(RunOutput::new(files, summary))
}

/// Summary statistics of a correlation map against the soft-core radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStats {
    pub d4_asymmetry: f64,
    pub mass_within: f64,
    pub mass_beyond: f64,
    pub mean_within: f64,
    pub mean_beyond: f64,
    pub max_abs: f64,
}

/// Σ|G| and mean |G| over sites within `r_c` and beyond 2.5 `r_c`.
pub fn map_stats(map: &CorrelationMap, r_c: f64) -> MapStats {
    let (mut within, mut beyond) = ((0.0, 0usize), (0.0, 0usize));
    let mut max_abs = 0.0f64;
    for (_, _, d, g) in map.entries() {
        max_abs = max_abs.max(g.abs());
        if d <= r_c * (1.0 + 1e-9) {
            within = (within.0 + g.abs(), within.1 + 1);
        } else if d > 2.5 * r_c {
            beyond = (beyond.0 + g.abs(), beyond.1 + 1);
        }
    }
    let mean = |(s, n): (f64, usize)| if n == 0 { 0.0 } else { s / n as f64 };
    MapStats {
        d4_asymmetry: map.d4_asymmetry(),
        mass_within: within.0,
        mass_beyond: beyond.0,
        mean_within: mean(within),
        mean_beyond: mean(beyond),
        max_abs,
    }
}

/// Lattice contrast trace and correlation maps about the central site.
pub fn run_fig4(cfg: &ResolvedConfig, normalization: Normalization) -> Result<RunOutput> {
    let pot = cfg.potential()?;
    let lat = cfg.lattice.as_ref().ok_or_else(|| Error::Config("fig4 needs a [lattice] section".into()))?;
    let spec = LatticeSpec::new(lat.side, lat.spacing, pot, cfg.protocol.build()?)?;
    let v0 = cfg.core_height();
    let times = cfg.grid()?.times(v0)?;
    let trace = lattice_trace(&spec, &times, normalization)?;
    let mut files = vec![trace_csv(&trace, v0, None, "fig4_contrast.csv")];

    // correlation maps need the unitary closed form
    let unitary = ProtocolParams { gamma: 0.0, dephasing: 0.0, ..cfg.protocol }.build()?;
    let map_spec = spec.with_protocol(unitary);
    let r_c = pot.r_c();
    let mut maps = Vec::new();
    let mut stats = Vec::new();
    for (k, &x) in lat.snapshots.iter().enumerate() {
        let v0 = v0.ok_or_else(|| Error::Config("snapshot times are V0t values and need a soft core".into()))?;
        if x < 0.0 {
            return Err(Error::Config(format!("snapshot V0t = {x} is negative")));
        }
        let map = correlation_map(&map_spec, x / v0.abs(), None)?;
        let s = map_stats(&map, r_c);
        let name = format!("fig4_map{k}.csv");
        files.push(Artifact { name: name.clone(), contents: map.to_csv() });
        stats.push(json!({
            "file": name,
            "v0t": x,
            "t_us": map.time,
            "d4_asymmetry": s.d4_asymmetry,
            "mass_within_r_c": s.mass_within,
            "mass_beyond_2.5_r_c": s.mass_beyond,
            "mean_within_r_c": s.mean_within,
            "mean_beyond_2.5_r_c": s.mean_beyond,
            "max_abs": s.max_abs,
        }));
        maps.push(json!({ "v0t": x, "map": map }));
    }
    let dense = serde_json::to_string_pretty(&json!({ "maps": maps })).map_err(|e| Error::Numerical(e.to_string()))?;
    files.push(Artifact { name: "fig4_maps.json".into(), contents: dense + "\n" });

    let summary = json!({
        "r_c_um": r_c,
        "spacing_um": lat.spacing,
        "r_c_over_spacing": r_c / lat.spacing,
        "n_atoms": spec.n_atoms(),
        "maps": stats,
        "hard_core_comparison": hard_core_comparison(&map_spec, v0),
    });
    Ok(RunOutput::new(files, summary))
}

/// Central-site neighbours inside r_c as the effective N_R of the
/// high-density form with B = 1, against the lattice half-time.
fn hard_core_comparison(spec: &LatticeSpec, v0: Option<f64>) -> Value {
    let Some(v0) = v0 else { return Value::Null };
    let p = spec.protocol();
    if !is_quarter_turn(p.theta()) {
        return Value::Null;
    }
    let (cx, cy) = spec.center();
    let r_c = spec.potential().r_c();
    let neighbours = (0..spec.n_atoms())
        .map(|j| spec.coordinates(j))
        .filter(|&(x, y)| (x, y) != (cx, cy))
        .filter(|&(x, y)| {
            let d = spec.spacing() * (x as f64 - cx as f64).hypot(y as f64 - cy as f64);
            d <= r_c * (1.0 + 1e-9)
        })
        .count() as f64;
    let q = std::f64::consts::LN_2 / neighbours;
    // 1 − cos^{β+1}(x/2) = ln2 / N_eff
    let predicted = if p.echo() { 2.0 * (1.0 - q).acos() } else { 2.0 * q.sqrt().asin() };
    let lattice = half_time(|t| Ok(lattice_contrast(spec, t)?.norm()), TAU_WINDOW.0 / v0.abs(), 1e3 / v0.abs())
        .ok()
        .map(|t| t * v0.abs());
    json!({
        "neighbours_within_r_c": neighbours,
        "predicted_v0_tau_half": if q <= 1.0 { Some(predicted) } else { None },
        "lattice_v0_tau_half": lattice,
    })
}

fn trace_csv(trace: &ContrastTrace, v0: Option<f64>, extra: Option<(&[&str], Vec<Vec<Cell>>)>, name: &str) -> Artifact {
    let mut header = vec!["t_us", "V0t", "re", "im", "contrast", "phase_shift"];
    let mut extra_rows = None;
    if let Some((cols, rows)) = extra {
        header.extend_from_slice(cols);
        extra_rows = Some(rows);
    }
    let mut csv = Csv::new(&header);
    let shift = trace.phase_shift();
    for k in 0..trace.len() {
        let t = trace.times[k];
        let z = trace.sigma_plus[k];
        let mut cells = vec![
            Cell::F(t),
            Cell::Opt(v0.map(|v| v * t)),
            Cell::F(z.re),
            Cell::F(z.im),
            Cell::F(trace.contrast[k]),
            Cell::Opt(shift[k]),
        ];
        if let Some(rows) = extra_rows.as_mut() {
            cells.append(&mut rows[k]);
        }
        csv.row(&cells);
    }
    csv.finish(name)
}

/// Density ratio C(ρ_high)/C(ρ_low) = exp(−(I_high − I_low)) and the Ramsey
/// phase shift at ρ_high for each Rydberg fraction of a bare-Rydberg gas.
pub fn run_fig5(cfg: &ResolvedConfig) -> Result<RunOutput> {
    let pot = cfg.potential()?;
    if pot.kind() != PotentialKind::BareVdW {
        return Err(Error::Config("fig5 needs potential.kind = \"bare\"".into()));
    }
    let uf: &UltrafastSpec =
        cfg.ultrafast.as_ref().ok_or_else(|| Error::Config("fig5 needs an [ultrafast] section".into()))?;
    let times = cfg.grid()?.times(None)?;
    let mut header = vec!["t_ps".to_string(), "t_us".to_string()];
    let mut columns = Vec::new();
    let mut curves = Vec::new();
    for &p in &uf.fractions {
        let theta = UltrafastSpec::theta(p);
        let proto = RamseyProtocol::new(theta, cfg.protocol.echo)?;
        let high = GasSpec::new(uf.density_high, pot, proto)?;
        let low = high.with_density(uf.density_low)?;
        let values = times
            .par_iter()
            .map(|&t| {
                let ih = exponent_integral(&high, t)?;
                let il = exponent_integral(&low, t)?;
                Ok(((il - ih).exp(), -ih.im))
            })
            .collect::<Result<Vec<(Complex64, f64)>>>()?;
        // I = ρ·A'·√(|C₆|t) with A' fixed by θ
        let a_prime = exponent_integral(&high, 1.0)? / (uf.density_high * pot.c6().abs().sqrt());
        header.push(format!("ratio_p{p}"));
        header.push(format!("phase_shift_p{p}"));
        let ratio: Vec<f64> = values.iter().map(|(r, _)| r.norm()).collect();
        let phase: Vec<f64> = values.iter().map(|(_, ph)| *ph).collect();
        curves.push(json!({
            "fraction": p,
            "theta": theta,
            "a_prime_re": a_prime.re,
            "a_prime_im": a_prime.im,
            "starts_at_one": times[0] != 0.0 || ratio[0] == 1.0,
            "monotone_decay": ratio.windows(2).all(|w| w[1] <= w[0]),
        }));
        columns.push((ratio, phase));
    }
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&refs);
    for (k, &t) in times.iter().enumerate() {
        let mut cells = vec![Cell::F(to_unit(t, Dimension::Time, "ps")?), Cell::F(t)];
        for (ratio, phase) in &columns {
            cells.push(Cell::F(ratio[k]));
            cells.push(Cell::F(phase[k]));
        }
        csv.row(&cells);
    }
    // larger fractions decay faster and shift further
    let ordered = (0..uf.fractions.len()).all(|a| {
        (0..uf.fractions.len()).all(|b| {
            uf.fractions[a] <= uf.fractions[b]
                || times.iter().enumerate().filter(|(_, &t)| t > 0.0).all(|(k, _)| {
                    columns[a].0[k] < columns[b].0[k] && columns[a].1[k].abs() > columns[b].1[k].abs()
                })
        })
    });
    let summary = json!({
        "density_high": uf.density_high,
        "density_low": uf.density_low,
        "echo": cfg.protocol.echo,
        "curves": curves,
        "fraction_ordering": ordered,
    });
    Ok(RunOutput::new(vec![csv.finish("fig5.csv")], summary))
}

/// A single time trace of the gas or lattice, optionally with a Monte Carlo
/// check of the gas average.
pub fn run_scan(cfg: &ResolvedConfig, normalization: Normalization, seed: u64) -> Result<RunOutput> {
    let pot = cfg.potential()?;
    let proto = cfg.protocol.build()?;
    let v0 = cfg.core_height();
    let times = cfg.grid()?.times(v0)?;
    match cfg.system {
        System::Lattice => {
            let lat = cfg.lattice.as_ref().ok_or_else(|| Error::Config("scan of a lattice needs [lattice]".into()))?;
            let spec = LatticeSpec::new(lat.side, lat.spacing, pot, proto)?;
            let trace = lattice_trace(&spec, &times, normalization)?;
            let summary = json!({ "system": "lattice", "n_atoms": spec.n_atoms() });
            Ok(RunOutput::new(vec![trace_csv(&trace, v0, None, "scan.csv")], summary))
        }
        System::Gas => {
            if normalization == Normalization::Total {
                return Err(Error::Config("the gas average is per spin; --normalization total needs a lattice".into()));
            }
            let spec = GasSpec::new(cfg.density()?, pot, proto)?;
            let values = times.par_iter().map(|&t| contrast_gas(&spec, t)).collect::<Result<Vec<_>>>()?;
            let trace = ContrastTrace::from_values(times.clone(), values, normalization);
            let mut summary = json!({ "system": "gas", "blockade_number": spec.blockade_number() });
            let extra = match cfg.monte_carlo {
                Some(mc) => {
                    let t_max = times.last().copied().unwrap_or(0.0);
                    let opts = McOptions {
                        n_samples: mc.samples,
                        n_atoms: mc.atoms.unwrap_or_else(|| recommended_atoms(&spec, t_max)),
                        n_probes: mc.probes,
                        seed,
                    };
                    let est = monte_carlo_gas_times(&spec, &times, &opts)?;
                    let agree = est.iter().zip(&trace.sigma_plus).filter(|(e, z)| e.agrees_with(**z, 3.0)).count();
                    summary["monte_carlo"] = json!({
                        "options": opts,
                        "within_3_standard_errors": agree,
                        "points": est.len(),
                        "bias_warning": est.iter().any(|e| e.bias_warning),
                    });
                    let rows = est
                        .iter()
                        .map(|e| vec![Cell::F(e.mean.re), Cell::F(e.mean.im), Cell::F(e.standard_error)])
                        .collect();
                    Some((&["mc_re", "mc_im", "mc_standard_error"][..], rows))
                }
                None => None,
            };
            Ok(RunOutput::new(vec![trace_csv(&trace, v0, extra, "scan.csv")], summary))
        }
    }
}
