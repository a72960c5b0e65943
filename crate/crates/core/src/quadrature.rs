//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature of complex
//! integrands on finite intervals with user breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_938_724_586,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod rule with the QUADPACK error estimate.
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    let mut values = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for (k, v) in values.iter_mut().enumerate() {
        let dx = half * XGK[k];
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        kronrod += (f1 + f2) * WGK[k];
        abs_sum += (f1.norm() + f2.norm()) * WGK[k];
        if k % 2 == 1 {
            gauss += (f1 + f2) * WG[k / 2];
        }
        *v = (f1, f2);
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for (k, (f1, f2)) in values.iter().enumerate() {
        asc += WGK[k] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let scale = half.abs();
    let mut error = ((kronrod - gauss) * scale).norm();
    let resasc = asc * scale;
    let resabs = abs_sum * scale;
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel { a, b, value: kronrod * scale, error }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from one panel
/// per consecutive pair of `points` and bisecting the worst panel until the
/// summed error estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, points: &[f64], settings: &QuadSettings) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::Numerical("quadrature needs at least two breakpoints".into()));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numerical("quadrature breakpoints must be finite and increasing".into()));
    }
    let mut heap: BinaryHeap<Panel> = points.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    let mut evaluations = 21 * heap.len();
    loop {
        let total: Complex64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Numerical("integrand produced a non-finite value".into()));
        }
        let target = settings.abs_tol.max(settings.rel_tol * total.norm());
        if error <= target {
            return Ok(QuadResult { value: total, error, intervals: heap.len(), evaluations });
        }
        if heap.len() >= settings.max_intervals {
            return Err(Error::Numerical(format!(
                "quadrature did not converge on [{}, {}]: estimated error {error:.3e} > target {target:.3e} after {} panels",
                points[0],
                points[points.len() - 1],
                heap.len()
            )));
        }
        // Refine a batch of the worst panels before re-summing.
        let batch = (heap.len() / 8).max(1);
        for _ in 0..batch {
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * worst.a.abs().max(worst.b.abs()) {
                return Err(Error::Numerical(format!(
                    "quadrature panel [{}, {}] cannot be subdivided further (error {:.3e})",
                    worst.a, worst.b, worst.error
                )));
            }
            heap.push(gk21(&f, worst.a, mid));
            heap.push(gk21(&f, mid, worst.b));
            evaluations += 42;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn weights_integrate_constants() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exact_for_high_degree() {
        let p = gk21(&real(|x| x.powi(30)), -1.0, 1.0);
        assert!((p.value.re - 2.0 / 31.0).abs() < 1e-15);
        let p = gk21(&real(|x| x.powi(18)), 0.0, 1.0);
        assert!((p.value.re - 1.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_complex() {
        let r = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), &[0.0, PI], &QuadSettings::default()).unwrap();
        // ∫₀^π e^{40ix} dx = (e^{40iπ} − 1)/(40i) = 0
        assert!(r.value.norm() < 1e-11);
        let r = integrate(|x| Complex64::new(0.0, 3.0 * x).exp(), &[0.0, 1.0], &QuadSettings::default()).unwrap();
        let exact = (Complex64::new(0.0, 3.0).exp() - 1.0) / Complex64::new(0.0, 3.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(real(|x: f64| 1.0 / x.sqrt()), &[0.0, 1.0], &QuadSettings::default()).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-8 * 2.0);
    }

    #[test]
    fn breakpoints_split_kinks() {
        let r = integrate(real(|x: f64| (x - 0.3).abs()), &[0.0, 0.3, 1.0], &QuadSettings::default()).unwrap();
        assert!((r.value.re - (0.045 + 0.245)).abs() < 1e-15);
        assert_eq!(r.intervals, 2);
    }

    #[test]
    fn reports_failure() {
        let tight = QuadSettings { max_intervals: 4, ..QuadSettings::default() };
        let err = integrate(real(|x: f64| (200.0 * x).sin() / x.sqrt()), &[0.0, 10.0], &tight).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert!(integrate(real(|x| x), &[1.0, 0.0], &tight).is_err());
    }
}
