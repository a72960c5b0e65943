//! The disorder-average exponent I(t) = ρ ∫ 4πr² [1 − f(V(r)t)] dr.
//!
//! Soft core, with u = (r/r_c)³:
//!     I = N_R · ∫₀^∞ [1 − f(V₀t / (1 + u²))] du
//! Bare van der Waals, with x = |C₆|t / r⁶:
//!     I = (4π/3) ρ √(|C₆|t) · ½ ∫₀^∞ [1 − f(±x)] x^{−3/2} dx
//!
//! Both integrands oscillate without bound in the phase X, so beyond a
//! fixed phase the oscillating parts of f are integrated along rays in the
//! complex plane where they decay exponentially. The rest is integrated on
//! the real axis with one panel per half-period.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::ising::{Kernel, KernelMode};
use crate::quadrature::{integrate, QuadSettings};

// |V₀t| up to which the whole soft-core profile stays on the real axis.
const DIRECT_LIMIT: f64 = 200.0;
// Phase at which the soft-core real-axis region hands over to the rays.
const CORE_EDGE: f64 = 50.0;
// Phase below which the soft-core tail is mapped to v = 1/u.
const TAIL_PHASE: f64 = 1.0;
// Bare potential: x ∈ [0, 40π] on the real axis.
const BARE_SPLIT: f64 = 40.0 * PI;
// e^{-46} ≈ 1e-20: ray length in units of 1/|ω|.
const RAY_DECAY: f64 = 46.0;

fn settings(panels: usize) -> QuadSettings {
    QuadSettings { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 20_000 + 4 * panels }
}

fn quad(f: impl Fn(f64) -> Complex64, points: &[f64]) -> Result<Complex64> {
    Ok(integrate(f, points, &settings(points.len()))?.value)
}

/// Sorted breakpoints: the ends plus every u in (lo, hi) where
/// a/(1 + u²) = kπ.
fn phase_breakpoints(a: f64, lo: f64, hi: f64) -> Vec<f64> {
    let x_hi = a / (1.0 + lo * lo);
    let x_lo = a / (1.0 + hi * hi);
    let mut pts = vec![lo];
    let k_min = (x_lo / PI).floor() as u64 + 1;
    let k_max = (x_hi / PI).ceil() as u64;
    let mut inner: Vec<f64> = (k_min..k_max)
        .map(|k| (a / (k as f64 * PI) - 1.0).sqrt())
        .filter(|&u| u > lo && u < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(hi);
    pts.dedup();
    pts
}

fn ray_points(omega: f64) -> Vec<f64> {
    let scale = 1.0 / omega.abs();
    [0.0, 0.5, 2.0, 6.0, 16.0, RAY_DECAY].iter().map(|k| k * scale).collect()
}

fn oscillating(kernel: &Kernel, sign: f64, probe: f64) -> Vec<KernelMode> {
    kernel
        .modes(Complex64::new(sign * probe, 0.0))
        .into_iter()
        .filter(|m| m.frequency != 0.0)
        .collect()
}

// Σ of the non-oscillating amplitudes at argument `x`.
fn steady_amplitude(kernel: &Kernel, x: Complex64) -> Complex64 {
    kernel.modes(x).iter().filter(|m| m.frequency == 0.0).map(|m| m.amplitude).sum()
}

fn mode_amplitude(kernel: &Kernel, x: Complex64, index: usize) -> Complex64 {
    let modes = kernel.modes(x);
    modes.iter().filter(|m| m.frequency != 0.0).nth(index).map(|m| m.amplitude).unwrap_or_default()
}

/// ∫₀^∞ [1 − f(V₀t / (1 + u²))] du, the soft-core exponent per unit N_R.
pub fn soft_core_exponent(v0t: f64, kernel: &Kernel) -> Result<Complex64> {
    let a = v0t.abs();
    if a == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s = v0t.signum();
    let one_minus = |xa: f64| kernel.one_minus(s * xa);

    let u_tail = if a > 2.0 * TAIL_PHASE { (a / TAIL_PHASE - 1.0).sqrt() } else { 1.0 };
    let u_core = if a > DIRECT_LIMIT { (a / CORE_EDGE - 1.0).sqrt() } else { 0.0 };

    // real axis between the core and the tail
    let pts = phase_breakpoints(a, u_core, u_tail);
    let mut total = quad(|u| one_minus(a / (1.0 + u * u)), &pts)?;

    // v = 1/u beyond the tail radius
    let v_max = 1.0 / u_tail;
    total += quad(
        |v| {
            let v2 = v * v;
            one_minus(a * v2 / (1.0 + v2)) / v2
        },
        &[0.0, 0.5 * v_max, v_max],
    )?;

    if u_core > 0.0 {
        total += soft_core_rays(a, s, u_core, kernel)?;
    }
    Ok(total)
}

// Core u ∈ [0, u_core], where |X| ∈ [CORE_EDGE, a]. The non-oscillating part
// 1 − a₀ stays on the u axis. Each oscillating mode is rewritten in X with
// du = −a/(2X²u) dX and its X-interval closed by two rays to +iσ∞.
fn soft_core_rays(a: f64, s: f64, u_core: f64, kernel: &Kernel) -> Result<Complex64> {
    let pieces: Vec<f64> = (0..=16).map(|k| u_core * k as f64 / 16.0).collect();
    let mut total = quad(
        |u| {
            let x = Complex64::new(s * a / (1.0 + u * u), 0.0);
            1.0 - steady_amplitude(kernel, x)
        },
        &pieces,
    )?;

    let x_edge = a / (1.0 + u_core * u_core);
    let modes = oscillating(kernel, s, a);
    for (index, mode) in modes.iter().enumerate() {
        let omega = mode.frequency * s;
        let sigma = omega.signum();
        let i = Complex64::i();
        // a_m(sX)·e^{iωsX}·a/(2X²u(X)) on X = e + iστ
        let integrand = |x: Complex64, u: Complex64| {
            let amp = mode_amplitude(kernel, s * x, index);
            amp * (i * omega * x).exp() * a / (2.0 * x * x * u)
        };
        let from_edge = quad(
            |tau| {
                let x = Complex64::new(x_edge, sigma * tau);
                let u = ((a - x) / x).sqrt();
                integrand(x, u) * i * sigma
            },
            &ray_points(omega),
        )?;
        // τ = w² removes the 1/√τ endpoint singularity at X = a
        let w_points: Vec<f64> = ray_points(omega).iter().map(|t| t.sqrt()).collect();
        let from_top = quad(
            |w| {
                let tau = w * w;
                let x = Complex64::new(a, sigma * tau);
                let u = (Complex64::new(0.0, -sigma * tau) / x).sqrt();
                integrand(x, u) * i * sigma * 2.0 * w
            },
            &w_points,
        )?;
        total -= from_edge - from_top;
    }
    Ok(total)
}

/// ½ ∫₀^∞ [1 − f(sign·x)] x^{−3/2} dx, the bare exponent per unit
/// (4π/3)ρ√(|C₆|t).
pub fn bare_exponent(sign: f64, kernel: &Kernel) -> Result<Complex64> {
    let s = sign.signum();
    // x = w² on [0, 40π]; panels at x = kπ
    let pts: Vec<f64> = (0..=40).map(|k| (k as f64 * PI).sqrt()).collect();
    let mut total = quad(
        |w| {
            let x = w * w;
            kernel.one_minus(s * x) / x
        },
        &pts,
    )?;

    let l = BARE_SPLIT;
    // non-oscillating tail with x = L/v²
    total += quad(|v| 1.0 - steady_amplitude(kernel, Complex64::new(s * l / (v * v), 0.0)), &[0.0, 0.25, 1.0])?
        / l.sqrt();

    let i = Complex64::i();
    for (index, mode) in oscillating(kernel, s, l).iter().enumerate() {
        let omega = mode.frequency * s;
        let sigma = omega.signum();
        let ray = quad(
            |tau| {
                let x = Complex64::new(l, sigma * tau);
                let amp = mode_amplitude(kernel, s * x, index);
                amp * (i * omega * x).exp() * x.powf(-1.5) * i * sigma
            },
            &ray_points(omega),
        )?;
        total -= 0.5 * ray;
    }
    Ok(total)
}
