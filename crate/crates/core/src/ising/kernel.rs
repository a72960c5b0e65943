//! The per-neighbour factor of the exact one-point function.
//!
//! Under the Ising Hamiltonian with σ⁻ emission at rate γ, each neighbour
//! `j` of spin `k` multiplies ⟨σ⁺_k⟩ by a factor depending only on the
//! accumulated phase X = V_jk·t, the dimensionless emission g = γt, the
//! tipping angle θ and the echo switch β (0 with echo, 1 without):
//!
//! ```text
//! f(X) = e^{(iβX − g)/2} [cos y + ((g − iX cos θ)/2) sinc y],   y = (X + ig)/2
//! ```
//!
//! The sign of the imaginary part of `y` is the one produced by the master
//! equation with ⟨σ⁺⟩ = ⟨σˣ⟩ + i⟨σʸ⟩; the oracle tests pin it.

use num_complex::Complex64;

use super::protocol::EchoModel;

/// Coefficient of γt in the global coherence decay D(γ,t) = exp(−c·γt).
///
/// A spin emitting at rate γ loses transverse coherence at γ/2. The
/// master-equation oracle tests pin this value.
pub const SELF_DECAY_COEFFICIENT: f64 = 0.5;

/// Global coherence decay factor D(γ, t).
#[inline]
pub fn decay_prefactor(gamma: f64, t: f64) -> f64 {
    (-SELF_DECAY_COEFFICIENT * gamma * t).exp()
}

const SINC_SERIES_RADIUS: f64 = 1e-4;
// below this |y| the exponential split loses digits to cancellation
const SPLIT_RADIUS: f64 = 0.25;

/// Unnormalised complex sinc, sin(z)/z, with sinc(0) = 1.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_RADIUS {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// (eᶻ − 1)/z, accurate near zero.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        // Horner on Σ zⁿ/(n+1)!, truncation below 1e-16 for |z| < 0.1
        let mut acc = Complex64::new(1.0 / 362_880.0, 0.0);
        for d in [40_320.0, 5040.0, 720.0, 120.0, 24.0, 6.0, 2.0, 1.0] {
            acc = acc * z + 1.0 / d;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// One oscillating component a(X)·e^{iωX} of the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMode {
    pub frequency: f64,
    pub amplitude: Complex64,
}

/// The neighbour factor at fixed (g, θ, β), evaluated for many phases X.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    g: f64,
    beta: f64,
    model: EchoModel,
    cos_theta: f64,
    up: f64,
    down: f64,
    emission_decay: f64,
    half_decay: f64,
}

impl Kernel {
    /// Kernel of the effective (H_echo) model for any β.
    pub fn new(g: f64, theta: f64, beta: f64) -> Self {
        Self::with_model(g, theta, beta, EchoModel::Effective)
    }

    /// Kernel for the given echo model. `Pulsed` only differs from
    /// `Effective` when β = 0 and g > 0.
    pub fn with_model(g: f64, theta: f64, beta: f64, model: EchoModel) -> Self {
        let half = 0.5 * theta;
        Self {
            g,
            beta,
            model,
            // exact zero at θ = π/2 keeps echo factors real
            cos_theta: (std::f64::consts::FRAC_PI_2 - theta).sin(),
            up: half.sin().powi(2),
            down: half.cos().powi(2),
            emission_decay: (-g).exp(),
            half_decay: (-0.5 * g).exp(),
        }
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn is_pulsed(&self) -> bool {
        self.model == EchoModel::Pulsed && self.beta == 0.0 && self.g > 0.0
    }

    /// f(X) for real X.
    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        if self.is_pulsed() {
            return self.eval_pulsed(x);
        }
        let g = self.g;
        if g == 0.0 {
            // y = X/2 is real: f = e^{iβX/2}[cos(X/2) − i cos θ sin(X/2)]
            let (s, c) = (0.5 * x).sin_cos();
            let body = Complex64::new(c, -self.cos_theta * s);
            if self.beta == 0.0 {
                return body;
            }
            let (s, c) = (0.5 * self.beta * x).sin_cos();
            return Complex64::new(c, s) * body;
        }
        let y = Complex64::new(0.5 * x, 0.5 * g);
        if y.norm() < SPLIT_RADIUS {
            let p = Complex64::new(0.5 * g, -0.5 * x * self.cos_theta);
            let pref = Complex64::new(-0.5 * g, 0.5 * self.beta * x).exp();
            pref * (y.cos() + p * sinc(y))
        } else {
            let q = self.split_ratio(Complex64::new(x, 0.0));
            let (s, c) = (0.5 * x).sin_cos();
            let forward = Complex64::new(c, s);
            let backward = forward.conj();
            let body = forward * self.emission_decay * (0.5 + q) + backward * (0.5 - q);
            if self.beta == 0.0 {
                body
            } else {
                let (s, c) = (0.5 * self.beta * x).sin_cos();
                Complex64::new(c, s) * body
            }
        }
    }

    /// 1 − f(X) without cancellation at small X.
    ///
    /// With w = iX − g the β = 1 kernel is c² + s²[eʷ + g(eʷ − 1)/w], so
    /// 1 − f = −i s² X φ₁(w) where φ₁(z) = (eᶻ − 1)/z.
    pub fn one_minus(&self, x: f64) -> Complex64 {
        let i = Complex64::i();
        if self.is_pulsed() {
            let g = self.g;
            let a = 0.5 * Complex64::new(-g, x);
            let b = 0.5 * Complex64::new(-g, -x);
            let pa = phi1(a);
            let d1 = self.down + self.up * 0.5 * g * pa;
            return -0.5 * i * x * (self.up * pa - d1 * phi1(b));
        }
        let w = Complex64::new(-self.g, x);
        let d = -i * self.up * x * phi1(w);
        if self.beta == 1.0 {
            return d;
        }
        // e^{iβX/2}·f₁ with general β: 1 − e^{z}(1 − d), z = i(β − 1)X/2
        let z = 0.5 * (self.beta - 1.0) * x * i;
        -z * phi1(z) + z.exp() * d
    }

    // Q = (g − iX cos θ) / (2i(X + ig))
    #[inline]
    fn split_ratio(&self, x: Complex64) -> Complex64 {
        if self.g == 0.0 {
            return Complex64::new(-0.5 * self.cos_theta, 0.0);
        }
        let i = Complex64::i();
        let num = self.g - i * x * self.cos_theta;
        let den = 2.0 * i * x - 2.0 * self.g;
        num / den
    }

    // Two-stage telegraph factor: emission ↑→↓ during the first half,
    // ↓→↑ in the toggling frame during the second half.
    fn eval_pulsed(&self, x: f64) -> Complex64 {
        let g = self.g;
        let a = Complex64::new(-g, x);
        let b = Complex64::new(-g, -x);
        let first = (0.5 * a).exp();
        let second = (0.5 * b).exp();
        let up1 = self.up * first;
        let down1 = self.down + self.up * 0.5 * g * phi1(0.5 * a);
        up1 + down1 * (second + 0.5 * g * phi1(0.5 * b))
    }

    /// Decomposition f(X) = Σ aₘ(X)·e^{iωₘX}, valid for complex X away
    /// from the origin, where the amplitudes are rational in X.
    pub fn modes(&self, x: Complex64) -> Vec<KernelMode> {
        if self.is_pulsed() {
            let g = self.g;
            let i = Complex64::i();
            let k = g / (i * x - g);
            let m = g / (-i * x - g);
            let lower = self.down - self.up * k;
            return vec![
                KernelMode { frequency: 0.5, amplitude: self.up * (1.0 - k * m) * self.half_decay },
                KernelMode { frequency: -0.5, amplitude: lower * (1.0 + m) * self.half_decay },
                KernelMode {
                    frequency: 0.0,
                    amplitude: -lower * m + self.up * k * (1.0 + m) * self.emission_decay,
                },
            ];
        }
        let q = self.split_ratio(x);
        vec![
            KernelMode { frequency: 0.5 * (self.beta + 1.0), amplitude: self.emission_decay * (0.5 + q) },
            KernelMode { frequency: 0.5 * (self.beta - 1.0), amplitude: 0.5 - q },
        ]
    }
}

/// f(X) for the effective model.
pub fn f_kernel(x: f64, g: f64, theta: f64, beta: f64) -> Complex64 {
    Kernel::new(g, theta, beta).eval(x)
}
