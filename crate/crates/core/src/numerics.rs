//! One-dimensional quadrature and divergence detection.
//!
//! Every integrand in this crate is a radial reduction whose only possible
//! singularity sits at the left endpoint (the ball center), so the adaptive
//! integrator starts from a mesh graded toward `a` and then bisects the
//! panel with the largest error estimate until the tolerance is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Exponent `g` of the initial mesh `x_j = a + (b - a) (j / n)^g`.
    pub grading_exponent: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 10_000,
            grading_exponent: 3.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "quadrature tolerances must be positive (abs_tol = {}, rel_tol = {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::InvalidParams(
                "quadrature max_subdivisions must be at least 1".into(),
            ));
        }
        if !(self.grading_exponent >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "quadrature grading_exponent must be >= 1, got {}",
                self.grading_exponent
            )));
        }
        Ok(())
    }

    fn tolerance(&self, estimate: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * estimate.abs())
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
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
    0.123_491_976_262_065_851_077_208_580_613_771,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed abscissae XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
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

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::NonFiniteIntegrand { at: center });
    }
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut values = [(0.0, 0.0); 10];

    for (j, x) in XGK.iter().take(10).enumerate() {
        let dx = half * x;
        let (lo, hi) = (center - dx, center + dx);
        let (f1, f2) = (f(lo), f(hi));
        if !f1.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: lo });
        }
        if !f2.is_finite() {
            return Err(Error::NonFiniteIntegrand { at: hi });
        }
        values[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let width = half.abs();
    let value = kronrod * half;
    res_abs *= width;
    res_asc *= width;

    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[a, b]` to `|I - exact| <= max(abs_tol, rel_tol |I|)`.
///
/// The integrand is only sampled at interior Gauss-Kronrod nodes, so an
/// integrable power singularity at `a` is allowed.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    if !(a <= b) {
        return Err(Error::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(0.0);
    }

    let initial = 8usize.min(cfg.max_subdivisions);
    let mut heap = BinaryHeap::with_capacity(2 * initial);
    let mut frozen: Vec<Panel> = Vec::new();
    let mut left = a;
    for j in 1..=initial {
        let right = if j == initial {
            b
        } else {
            a + (b - a) * (j as f64 / initial as f64).powf(cfg.grading_exponent)
        };
        if right > left {
            heap.push(gauss_kronrod(&f, left, right)?);
            left = right;
        }
    }

    let mut total: f64 = heap.iter().map(|p| p.value).sum();
    let mut total_err: f64 = heap.iter().map(|p| p.error).sum();

    while total_err > cfg.tolerance(total) {
        if heap.len() + frozen.len() >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
                subdivisions: heap.len() + frozen.len(),
            });
        }
        let Some(worst) = heap.pop() else {
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
                subdivisions: frozen.len(),
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Floating-point resolution reached; this panel cannot improve.
            frozen.push(worst);
            continue;
        }
        let lo = gauss_kronrod(&f, worst.a, mid)?;
        let hi = gauss_kronrod(&f, mid, worst.b)?;
        total += lo.value + hi.value - worst.value;
        total_err += lo.error + hi.error - worst.error;
        heap.push(lo);
        heap.push(hi);
    }

    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(panels.iter().map(|p| p.value).sum())
}

/// Integrates over `[a, b]` after splitting at the given interior points.
///
/// Breakpoints outside `(a, b)` are ignored. Each piece gets the full
/// tolerance budget of `cfg`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::InvalidInterval { a, b });
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut sum = 0.0;
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        sum += adaptive_integrate(&f, lo, c, cfg)?;
        lo = c;
    }
    Ok(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeConfig {
    /// Number of dyadic levels `K`: the probe integrates down to `b 2^-K`.
    pub levels: usize,
    /// How many of the innermost increments enter the slope fit.
    pub fit_levels: usize,
    /// Half-width of the borderline band around the logarithmic slope.
    pub borderline_band: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            levels: 40,
            fit_levels: 10,
            borderline_band: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Finiteness {
    /// Limit of the nested integrals.
    Finite(f64),
    /// Estimated exponent `sigma` of the integrand `~ x^sigma` at `0+`.
    Divergent(f64),
}

impl Finiteness {
    pub fn is_finite(&self) -> bool {
        matches!(self, Finiteness::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceVerdict {
    pub status: Finiteness,
    /// `I_k = int_{b 2^-k}^b f` for `k = 1..=K`.
    pub probe_sequence: Vec<f64>,
    /// Fitted exponent of the integrand at the origin.
    pub fitted_exponent: f64,
}

/// Decides whether `int_0^b f` converges for a nonnegative `f ~ c x^sigma`.
pub fn divergence_probe<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<DivergenceVerdict> {
    divergence_probe_with(f, b, cfg, &ProbeConfig::default())
}

pub fn divergence_probe_with<F: Fn(f64) -> f64>(
    f: F,
    b: f64,
    cfg: &QuadratureConfig,
    probe: &ProbeConfig,
) -> Result<DivergenceVerdict> {
    if !(b > 0.0) {
        return Err(Error::InvalidInterval { a: 0.0, b });
    }
    if probe.levels < 2 || probe.fit_levels < 2 || probe.fit_levels > probe.levels {
        return Err(Error::InvalidParams(format!(
            "probe needs 2 <= fit_levels <= levels, got fit_levels = {}, levels = {}",
            probe.fit_levels, probe.levels
        )));
    }

    // Increments can be many orders of magnitude below the outer integral,
    // so each dyadic shell is integrated to relative accuracy only.
    let shell_cfg = QuadratureConfig {
        abs_tol: f64::MIN_POSITIVE,
        ..*cfg
    };

    let mut increments = Vec::with_capacity(probe.levels);
    let mut probe_sequence = Vec::with_capacity(probe.levels);
    let mut running = 0.0;
    let mut hi = b;
    for _ in 0..probe.levels {
        let lo = 0.5 * hi;
        let d = adaptive_integrate(&f, lo, hi, &shell_cfg)?.max(0.0);
        running += d;
        increments.push(d);
        probe_sequence.push(running);
        hi = lo;
    }

    let start = probe.levels - probe.fit_levels;
    let window = &increments[start..];
    let slope = if window.iter().all(|&d| d > 0.0) {
        let xs: Vec<f64> = (start..probe.levels)
            .map(|k| (b * 0.5f64.powi(k as i32)).ln())
            .collect();
        let ys: Vec<f64> = window.iter().map(|d| d.ln()).collect();
        least_squares_slope(&xs, &ys)
    } else {
        // The integrand vanishes near the origin.
        f64::INFINITY
    };

    let fitted_exponent = slope - 1.0;
    if slope > probe.borderline_band {
        let last = *increments.last().expect("levels >= 2");
        let ratio = 0.5f64.powf(slope);
        let tail = if slope.is_finite() {
            last * ratio / (1.0 - ratio)
        } else {
            0.0
        };
        Ok(DivergenceVerdict {
            status: Finiteness::Finite(running + tail),
            probe_sequence,
            fitted_exponent,
        })
    } else if slope < -probe.borderline_band {
        Ok(DivergenceVerdict {
            status: Finiteness::Divergent(fitted_exponent),
            probe_sequence,
            fitted_exponent,
        })
    } else {
        Err(Error::InconclusiveProbe {
            exponent: fitted_exponent,
            probe_sequence,
        })
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive (`lo > 0`).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    uniform_grid(a, b, n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => x.exp(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn kronrod_weights_sum_to_interval_length() {
        let wk: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let wg: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!(close(wk, 2.0, 1e-14));
        assert!(close(wg, 2.0, 1e-14));
    }

    #[test]
    fn single_panel_is_exact_for_high_degree_polynomials() {
        // Kronrod part is exact through degree 31, Gauss part through 19.
        for deg in [0, 5, 19, 30] {
            let p = gauss_kronrod(&|x: f64| x.powi(deg), 0.0, 1.0).unwrap();
            assert!(close(p.value, 1.0 / (deg as f64 + 1.0), 1e-14), "degree {deg}");
        }
    }

    #[test]
    fn integrates_the_reference_examples() {
        let cfg = QuadratureConfig::default();
        let lin = adaptive_integrate(|x| x, 0.0, 1.0, &cfg).unwrap();
        assert!(close(lin, 0.5, 1e-14));
        let sing = adaptive_integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &cfg).unwrap();
        assert!(close(sing, 2.0, 1e-10 + 2e-8));
        let sine = adaptive_integrate(f64::sin, 0.0, std::f64::consts::PI, &cfg).unwrap();
        assert!(close(sine, 2.0, 1e-12));
    }

    #[test]
    fn pure_powers_match_closed_form() {
        let cfg = QuadratureConfig::default();
        for sigma in [-0.9, -0.5, 0.0, 1.0, 2.0] {
            let got = adaptive_integrate(|x: f64| x.powf(sigma), 0.0, 1.0, &cfg).unwrap();
            let exact = 1.0 / (sigma + 1.0);
            assert!(
                (got - exact).abs() <= cfg.rel_tol * exact,
                "sigma = {sigma}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn rejects_reversed_interval() {
        let err = adaptive_integrate(|x| x, 1.0, 0.0, &QuadratureConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInterval { .. }));
    }

    #[test]
    fn reports_non_convergence_when_budget_is_exhausted() {
        let cfg = QuadratureConfig {
            max_subdivisions: 10,
            ..Default::default()
        };
        let err = adaptive_integrate(|x: f64| x.powf(-0.99), 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn split_integral_is_additive() {
        let cfg = QuadratureConfig::default();
        let f = |x: f64| x.powf(-0.7) + x.cos();
        let whole = adaptive_integrate(f, 0.0, 2.0, &cfg).unwrap();
        let split = integrate_with_breaks(f, 0.0, 2.0, &[0.3, 1.1], &cfg).unwrap();
        assert!((whole - split).abs() <= 2e-10 + 2e-8 * whole);
    }

    #[test]
    fn probe_finite_for_integrable_power() {
        let v = divergence_probe(|x: f64| x.powf(-0.5), 1.0, &QuadratureConfig::default()).unwrap();
        match v.status {
            Finiteness::Finite(val) => assert!(close(val, 2.0, 1e-6), "{val}"),
            other => panic!("expected finite, got {other:?}"),
        }
    }

    #[test]
    fn probe_divergent_estimates_exponent() {
        let v = divergence_probe(|x: f64| x.powf(-1.5), 1.0, &QuadratureConfig::default()).unwrap();
        match v.status {
            Finiteness::Divergent(s) => assert!(close(s, -1.5, 0.02), "{s}"),
            other => panic!("expected divergent, got {other:?}"),
        }
    }

    #[test]
    fn probe_logarithmic_case_is_not_reported_finite() {
        let res = divergence_probe(|x: f64| 1.0 / x, 1.0, &QuadratureConfig::default());
        match res {
            Err(Error::InconclusiveProbe { exponent, .. }) => assert!(close(exponent, -1.0, 0.02)),
            Ok(v) => assert!(!v.status.is_finite()),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn probe_sequence_is_nondecreasing() {
        let v = divergence_probe(|x: f64| x.powf(-0.3) * (1.0 + x), 2.0, &QuadratureConfig::default())
            .unwrap();
        assert!(v.probe_sequence.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn grids_hit_their_endpoints() {
        let g = uniform_grid(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let l = log_grid(1e-3, 10.0, 5);
        assert_eq!(l[0], 1e-3);
        assert_eq!(l[4], 10.0);
        assert!(close(l[2], 0.1, 1e-15));
    }
}
