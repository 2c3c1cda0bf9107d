//! Numerical checks of the explicit solutions: strong and weak form of the
//! equation, p-independence of the flux, and the two limit procedures
//! (`eps -> 0` at fixed `p`, and `p -> 1`).

use serde::Serialize;

use crate::error::{Error, RadiusInterval, Result};
use crate::numerics::{integrate_with_breaks, least_squares_slope, uniform_grid};
use crate::profile::{BallDomain, RadialDatum};
use crate::rearrangement::Rearrangement;
use crate::solver::{h_alpha_excess, RadialSolution, SolverParams};

/// Weighted sum of smooth bumps `exp(-1/(1 - tau^2))` on intervals `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    bumps: Vec<(f64, f64, f64)>,
}

impl TestFunction {
    pub fn zero() -> Self {
        Self { bumps: Vec::new() }
    }

    pub fn bump(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || a < 0.0 {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self {
            bumps: vec![(a, b, 1.0)],
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            bumps: self.bumps.iter().map(|&(a, b, w)| (a, b, c * w)).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut bumps = self.bumps.clone();
        bumps.extend_from_slice(&other.bumps);
        Self { bumps }
    }

    /// Smallest interval containing every bump.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self.bumps.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
        let hi = self.bumps.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
        (lo < hi).then_some((lo, hi))
    }

    fn knots(&self) -> Vec<f64> {
        self.bumps.iter().flat_map(|&(a, b, _)| [a, b, 0.5 * (a + b)]).collect()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|&(a, b, w)| {
                let tau = (2.0 * r - (a + b)) / (b - a);
                if tau.abs() < 1.0 {
                    w * (-1.0 / (1.0 - tau * tau)).exp()
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.bumps
            .iter()
            .map(|&(a, b, w)| {
                let tau = (2.0 * r - (a + b)) / (b - a);
                if tau.abs() >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - tau * tau;
                let phi = (-1.0 / s).exp();
                if phi == 0.0 {
                    return 0.0;
                }
                // d/dtau = -2 tau / s^2 * phi, and dtau/dr = 2 / (b - a).
                w * phi * (-2.0 * tau / (s * s)) * 2.0 / (b - a)
            })
            .sum()
    }
}

/// One grid point of the strong-form check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSample {
    pub r: f64,
    pub divergence: f64,
    pub datum: f64,
    pub residual: f64,
}

fn require_exact(sol: &RadialSolution) -> Result<()> {
    if sol.params().is_exact() {
        Ok(())
    } else {
        Err(Error::InvalidParams(
            "the strong-form residual is defined for eps = 0".into(),
        ))
    }
}

/// Step used by [`pde_residual`]: the smallest gap of the grid.
fn grid_step(sol: &RadialSolution, r_grid: &[f64]) -> f64 {
    let mut sorted = r_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(1e-3 * sol.domain().radius())
        .max(1e-8 * sol.domain().radius())
}

/// `r^(1-N) d/dr (r^(N-1) m(r)) - f0(r)` on the grid, with finite-difference step `h`.
///
/// Central differences are used unless the stencil straddles a break of the
/// datum or leaves `(0, inf)`; then a one-sided second-order stencil is taken
/// on the side where `f0` is continuous.
pub fn pde_residual_profile_with_step(
    sol: &RadialSolution,
    r_grid: &[f64],
    h: f64,
) -> Result<Vec<ResidualSample>> {
    require_exact(sol)?;
    let dom = sol.domain();
    let big_r = dom.radius();
    let n = dom.dim() as i32;
    let breaks = sol.datum().breakpoints();
    let q = |r: f64| -> Result<f64> { Ok(r.powi(n - 1) * sol.flux_unchecked(r)?) };
    let clean = |lo: f64, hi: f64| !breaks.iter().any(|&b| lo < b && b < hi);

    r_grid
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r <= big_r) {
                return Err(Error::OutOfDomain { rho: r, radius: big_r });
            }
            let on_break = breaks.iter().any(|&b| b == r);
            let dq = if r - h > 0.0 && !on_break && clean(r - h, r + h) {
                (q(r + h)? - q(r - h)?) / (2.0 * h)
            } else if clean(r, r + 2.0 * h) {
                (-3.0 * q(r)? + 4.0 * q(r + h)? - q(r + 2.0 * h)?) / (2.0 * h)
            } else {
                (3.0 * q(r)? - 4.0 * q(r - h)? + q(r - 2.0 * h)?) / (2.0 * h)
            };
            let divergence = dq / r.powi(n - 1);
            let datum = sol.datum().profile(r);
            Ok(ResidualSample {
                r,
                divergence,
                datum,
                residual: (divergence - datum).abs(),
            })
        })
        .collect()
}

pub fn pde_residual_profile(sol: &RadialSolution, r_grid: &[f64]) -> Result<Vec<ResidualSample>> {
    pde_residual_profile_with_step(sol, r_grid, grid_step(sol, r_grid))
}

/// `max_r |r^(1-N) (r^(N-1) m)' - f0|` over the grid.
pub fn pde_residual(sol: &RadialSolution, r_grid: &[f64]) -> Result<f64> {
    Ok(pde_residual_profile(sol, r_grid)?
        .iter()
        .map(|s| s.residual)
        .fold(0.0, f64::max))
}

pub fn pde_residual_with_step(sol: &RadialSolution, r_grid: &[f64], h: f64) -> Result<f64> {
    Ok(pde_residual_profile_with_step(sol, r_grid, h)?
        .iter()
        .map(|s| s.residual)
        .fold(0.0, f64::max))
}

/// `int <H_{p-1}(grad u), grad phi> - int f phi` for a radial test function.
pub fn weak_residual(sol: &RadialSolution, phi: &TestFunction) -> Result<f64> {
    let Some((a, b)) = phi.support() else {
        return Ok(0.0);
    };
    let big_r = sol.domain().radius();
    if a <= 0.0 || b >= big_r {
        return Err(Error::InvalidParams(format!(
            "test function support ({a}, {b}) must lie inside (0, {big_r})"
        )));
    }
    let dom = sol.domain();
    let k = dom.surface_factor();
    let n = dom.dim() as i32;
    let p = sol.params().p;
    let mut breaks = sol.datum().breakpoints();
    breaks.extend(phi.knots());
    // The flux is H_{p-1} of the gradient magnitude, evaluated through the excess.
    let flux = |r: f64| -> f64 {
        let g = sol.flux_unchecked(r).map(|m| {
            if sol.params().is_exact() {
                h_alpha_excess(m.powf(1.0 / (p - 1.0)), p - 1.0)
            } else {
                m
            }
        });
        g.unwrap_or(f64::NAN)
    };
    integrate_with_breaks(
        |r| {
            k * r.powi(n - 1)
                * (-flux(r) * phi.derivative(r) - sol.datum().profile(r) * phi.value(r))
        },
        a,
        b,
        &breaks,
        &sol.params().quad,
    )
}

/// Largest relative deviation between `|H_{p-1}(grad u_p)|` profiles over pairs of `p`.
pub fn flux_p_invariance(
    datum: &RadialDatum,
    domain: &BallDomain,
    p_list: &[f64],
    r_grid: &[f64],
) -> Result<f64> {
    let re = Rearrangement::with_quadrature(datum, domain, Default::default())?;
    let mut profiles = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let sol = RadialSolution::from_rearrangement(re.clone(), SolverParams::exact(p)?)?;
        let row = r_grid
            .iter()
            .map(|&r| Ok(h_alpha_excess(sol.grad_excess(r)?, p - 1.0)))
            .collect::<Result<Vec<_>>>()?;
        profiles.push(row);
    }
    let mut worst: f64 = 0.0;
    for (i, a) in profiles.iter().enumerate() {
        for b in &profiles[i + 1..] {
            for (x, y) in a.iter().zip(b) {
                let scale = x.abs().max(y.abs());
                if scale > 0.0 {
                    worst = worst.max((x - y).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `"eps"` or `"p"`.
    pub parameter: String,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln value` (against
    /// `ln(p - 1)` for the `p` study), when at least two errors are positive.
    pub fitted_rate: Option<f64>,
    pub bound_ratios: Vec<f64>,
}

fn fitted_rate(xs: &[f64], errors: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(errors)
        .filter(|(x, e)| **x > 0.0 && **e > 0.0)
        .map(|(x, e)| (x.ln(), e.ln()))
        .unzip();
    (lx.len() >= 2).then(|| least_squares_slope(&lx, &ly))
}

/// `E(eps) = int_{B_R} |H_{p/2}(grad u^eps) - H_{p/2}(grad u)|^2` for each `eps`.
pub fn eps_convergence_study(
    datum: &RadialDatum,
    domain: &BallDomain,
    p: f64,
    eps_list: &[f64],
) -> Result<ConvergenceReport> {
    let exact = RadialSolution::new(datum, domain, SolverParams::exact(p)?)?;
    let mut errors = Vec::with_capacity(eps_list.len());
    let mut ratios = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let e = if eps == 0.0 {
            0.0
        } else {
            let approx = exact.with_params(SolverParams::new(p, eps)?)?;
            exact.integrate_radial(|r| {
                let a = h_alpha_excess(approx.grad_excess(r)?, p / 2.0);
                let b = h_alpha_excess(exact.grad_excess(r)?, p / 2.0);
                Ok((a - b) * (a - b))
            })?
        };
        let scale = eps + eps.powf(p - 1.0);
        ratios.push(if scale > 0.0 { e / scale } else { 0.0 });
        errors.push(e);
    }
    Ok(ConvergenceReport {
        parameter: "eps".into(),
        values: eps_list.to_vec(),
        fitted_rate: fitted_rate(eps_list, &errors),
        errors,
        bound_ratios: ratios,
    })
}

/// `||z||_inf <= 1` against `||f||_{L^{N,inf}} <= N C_N^(1/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxHypothesis {
    /// `sup m` over the sampled radii.
    pub z_sup: f64,
    /// `None` when the datum is not in `L^{N,inf}`.
    pub lorentz_norm: Option<f64>,
    pub holds: bool,
    /// Whether `z_sup <= 1 + tol` agrees with `holds`.
    pub consistent: bool,
}

pub fn flux_hypothesis(sol: &RadialSolution, radii: &[f64], tol: f64) -> Result<FluxHypothesis> {
    let dom = sol.domain();
    let mut z_sup: f64 = 0.0;
    for &r in radii.iter().chain(std::iter::once(&dom.radius())) {
        z_sup = z_sup.max(sol.flux_unchecked(r)?);
    }
    let lorentz_norm = sol.rearrangement().lorentz_quasinorm(dom.dim_f64())?.value();
    let holds = lorentz_norm.is_some_and(|v| v <= dom.lorentz_scale() * (1.0 + 1e-12));
    Ok(FluxHypothesis {
        z_sup,
        lorentz_norm,
        holds,
        consistent: (z_sup <= 1.0 + tol) == holds,
    })
}

/// Knobs for [`p_limit_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PLimitConfig {
    /// `|m - 1| <= level_tol` counts as `m = 1`.
    pub level_tol: f64,
    /// Half-width of the band around isolated crossings `m = 1` left out of sup norms.
    pub collar: f64,
    /// Resolution of the scan locating `{m > 1}` and `{m = 1}`.
    pub scan_points: usize,
}

impl Default for PLimitConfig {
    fn default() -> Self {
        Self {
            level_tol: 1e-9,
            collar: 0.02,
            scan_points: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PLimitReport {
    /// Sup-grid distance of `u_p` to the pointwise limit, per `p`.
    pub report: ConvergenceReport,
    /// Sup-grid distance between consecutive `u_p`.
    pub consecutive_differences: Vec<f64>,
    /// `sup_r m(r)`, which equals `||z||_inf`.
    pub z_sup: f64,
    /// Whether `||f||_{L^{N,inf}} <= N C_N^(1/N)`.
    pub lorentz_hypothesis: bool,
    /// Whether `z_sup <= 1` agrees with the hypothesis.
    pub hypothesis_consistent: bool,
    /// Intervals where `m = 1` up to `level_tol`.
    pub level_set: Vec<RadiusInterval>,
    /// Isolated radii where `m` crosses `1`.
    pub crossings: Vec<f64>,
}

/// Maximal runs of the scan where `pred` holds, with ends refined by bisection.
fn runs<P: Fn(f64) -> Result<bool>>(scan: &[f64], pred: P) -> Result<Vec<RadiusInterval>> {
    let refine = |mut inside: f64, mut outside: f64| -> Result<f64> {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if pred(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let flags = scan.iter().map(|&r| pred(r)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let mut i = 0;
    while i < scan.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < scan.len() && flags[i + 1] {
            i += 1;
        }
        let lo = if start == 0 { scan[0] } else { refine(scan[start], scan[start - 1])? };
        let hi = if i + 1 == scan.len() { scan[i] } else { refine(scan[i], scan[i + 1])? };
        out.push((lo, hi));
        i += 1;
    }
    Ok(out)
}

/// Behaviour of `u_p` as `p` decreases to `1`.
///
/// Fails with [`Error::LimitDiverges`] when `m > 1` on an interval, where
/// `m^(1/(p-1))` blows up.
pub fn p_limit_study(
    datum: &RadialDatum,
    domain: &BallDomain,
    p_list: &[f64],
    r_grid: &[f64],
    cfg: &PLimitConfig,
) -> Result<PLimitReport> {
    let big_r = domain.radius();
    let base = RadialSolution::new(datum, domain, SolverParams::exact(2.0)?)?;
    let m = |r: f64| base.flux_unchecked(r);
    let tol = cfg.level_tol;

    let mut scan = uniform_grid(0.0, big_r, cfg.scan_points.max(2) + 1);
    scan[0] = big_r * 1e-9;

    let above = runs(&scan, |r| Ok(m(r)? > 1.0 + tol))?;
    let above: Vec<RadiusInterval> = above.into_iter().filter(|(a, b)| b > a).collect();
    if !above.is_empty() {
        return Err(Error::LimitDiverges { intervals: above });
    }
    let level_set: Vec<RadiusInterval> = runs(&scan, |r| Ok((m(r)? - 1.0).abs() <= tol))?
        .into_iter()
        .filter(|(a, b)| b > a)
        .collect();
    let mut crossings = Vec::new();
    for w in scan.windows(2) {
        let (a, b) = (m(w[0])? - 1.0, m(w[1])? - 1.0);
        let in_level = |r: f64| level_set.iter().any(|&(lo, hi)| lo <= r && r <= hi);
        if (a.abs() <= tol || b.abs() <= tol || a * b < 0.0) && !(in_level(w[0]) && in_level(w[1])) {
            crossings.push(if b.abs() <= a.abs() { w[1] } else { w[0] });
        }
    }
    crossings.dedup();

    let level_length = |r: f64| -> f64 {
        level_set
            .iter()
            .map(|&(lo, hi)| (hi.min(big_r) - lo.max(r)).max(0.0))
            .sum()
    };
    let kept: Vec<usize> = (0..r_grid.len())
        .filter(|&i| crossings.iter().all(|c| (r_grid[i] - c).abs() > cfg.collar))
        .collect();
    let limit: Vec<f64> = r_grid.iter().map(|&r| (big_r - r) + level_length(r)).collect();

    let mut profiles = Vec::with_capacity(p_list.len());
    let mut errors = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let sol = base.with_params(SolverParams::exact(p)?)?;
        let u = sol.values_on_grid(r_grid)?;
        errors.push(kept.iter().map(|&i| (u[i] - limit[i]).abs()).fold(0.0, f64::max));
        profiles.push(u);
    }
    let consecutive_differences = profiles
        .windows(2)
        .map(|w| kept.iter().map(|&i| (w[0][i] - w[1][i]).abs()).fold(0.0, f64::max))
        .collect();

    let mut radii = scan.clone();
    radii.extend(r_grid.iter().filter(|r| **r > 0.0));
    let hyp = flux_hypothesis(&base, &radii, tol)?;

    let shifted: Vec<f64> = p_list.iter().map(|p| p - 1.0).collect();
    Ok(PLimitReport {
        report: ConvergenceReport {
            parameter: "p".into(),
            values: p_list.to_vec(),
            fitted_rate: fitted_rate(&shifted, &errors),
            errors,
            bound_ratios: Vec::new(),
        },
        consecutive_differences,
        z_sup: hyp.z_sup,
        lorentz_hypothesis: hyp.holds,
        hypothesis_consistent: hyp.consistent,
        level_set,
        crossings,
    })
}
