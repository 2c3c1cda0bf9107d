//! The ball `B_R` in `R^N` and the radially decreasing right-hand side.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lebesgue measure `C_N = pi^(N/2) / Gamma(N/2 + 1)` of the unit ball.
pub fn unit_ball_volume(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    // C_N = (2 pi / N) C_{N-2}, starting from C_0 = 1 and C_1 = 2.
    let mut c = if dim % 2 == 0 { 1.0 } else { 2.0 };
    let mut n = 2 + dim % 2;
    while n <= dim {
        c *= 2.0 * PI / n as f64;
        n += 2;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallDomain {
    dim: usize,
    radius: f64,
    unit_volume: f64,
}

impl BallDomain {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        let unit_volume = unit_ball_volume(dim)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Self {
            dim,
            radius,
            unit_volume,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_f64(&self) -> f64 {
        self.dim as f64
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `C_N`.
    pub fn unit_volume(&self) -> f64 {
        self.unit_volume
    }

    /// `|B_R| = C_N R^N`.
    pub fn measure(&self) -> f64 {
        self.ball_measure(self.radius)
    }

    /// `|B_r| = C_N r^N`.
    pub fn ball_measure(&self, r: f64) -> f64 {
        self.unit_volume * r.powi(self.dim as i32)
    }

    /// Radius of the centered ball of measure `s`.
    pub fn radius_of_measure(&self, s: f64) -> f64 {
        (s / self.unit_volume).powf(1.0 / self.dim_f64())
    }

    /// Surface factor `N C_N`, so that `int_{B_R} F(|x|) dx = N C_N int_0^R F(r) r^(N-1) dr`.
    pub fn surface_factor(&self) -> f64 {
        self.dim_f64() * self.unit_volume
    }

    /// `N C_N^(1/N)`, the normalisation appearing in the Lorentz hypotheses.
    pub fn lorentz_scale(&self) -> f64 {
        self.dim_f64() * self.unit_volume.powf(1.0 / self.dim_f64())
    }
}

/// Radial profile `rho -> f0(rho)` of the datum `f(x) = f0(|x|)`.
///
/// Piecewise kinds are left-closed: on `[r_{i-1}, r_i)` a step takes the
/// value of level `i`, which makes the rearrangement right-continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialDatum {
    Constant {
        value: f64,
    },
    /// `amplitude * rho^-exponent`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
    },
    /// `amplitude * rho^-exponent` for `rho < cutoff`, zero beyond.
    TruncatedPower {
        amplitude: f64,
        exponent: f64,
        cutoff: f64,
    },
    /// `(outer radius, value)` pairs with increasing radii; zero past the last radius.
    Step {
        levels: Vec<(f64, f64)>,
    },
    /// `(rho_i, f_i)` nodes, linearly interpolated and held constant outside the grid.
    Sampled {
        grid: Vec<(f64, f64)>,
    },
}

impl RadialDatum {
    pub fn constant(value: f64) -> Self {
        RadialDatum::Constant { value }
    }

    pub fn power_law(amplitude: f64, exponent: f64) -> Self {
        RadialDatum::PowerLaw {
            amplitude,
            exponent,
        }
    }

    pub fn truncated_power(amplitude: f64, exponent: f64, cutoff: f64) -> Self {
        RadialDatum::TruncatedPower {
            amplitude,
            exponent,
            cutoff,
        }
    }

    pub fn step(levels: Vec<(f64, f64)>) -> Self {
        RadialDatum::Step { levels }
    }

    pub fn sampled(grid: Vec<(f64, f64)>) -> Self {
        RadialDatum::Sampled { grid }
    }

    /// `f0(rho)` without domain checks; `rho = 0` may return `+inf`.
    pub fn profile(&self, rho: f64) -> f64 {
        match self {
            RadialDatum::Constant { value } => *value,
            RadialDatum::PowerLaw {
                amplitude,
                exponent,
            } => amplitude * rho.powf(-exponent),
            RadialDatum::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => {
                if rho < *cutoff {
                    amplitude * rho.powf(-exponent)
                } else {
                    0.0
                }
            }
            RadialDatum::Step { levels } => {
                let last = levels.len().saturating_sub(1);
                levels
                    .iter()
                    .enumerate()
                    .find(|(i, (r, _))| rho < *r || (*i == last && rho == *r))
                    .map_or(0.0, |(_, (_, v))| *v)
            }
            RadialDatum::Sampled { grid } => interpolate_clamped(grid, rho),
        }
    }

    /// `f0(rho)` for `0 < rho <= R`.
    pub fn eval(&self, domain: &BallDomain, rho: f64) -> Result<f64> {
        if !(rho > 0.0 && rho <= domain.radius()) {
            return Err(Error::OutOfDomain {
                rho,
                radius: domain.radius(),
            });
        }
        Ok(self.profile(rho))
    }

    /// Radii where `f0` jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialDatum::Constant { .. } | RadialDatum::PowerLaw { .. } => Vec::new(),
            RadialDatum::TruncatedPower { cutoff, .. } => vec![*cutoff],
            RadialDatum::Step { levels } => levels.iter().map(|(r, _)| *r).collect(),
            RadialDatum::Sampled { grid } => grid.iter().map(|(r, _)| *r).collect(),
        }
    }

    /// Exponent `b` with `f0(rho) ~ c rho^-b`, `c > 0`, as `rho -> 0+`.
    ///
    /// `None` for the zero datum and for sampled data, whose behaviour at the
    /// center is only known numerically.
    pub fn singular_order(&self) -> Option<f64> {
        match self {
            RadialDatum::Constant { value } => (*value > 0.0).then_some(0.0),
            RadialDatum::PowerLaw {
                amplitude,
                exponent,
            }
            | RadialDatum::TruncatedPower {
                amplitude,
                exponent,
                ..
            } => (*amplitude > 0.0).then_some(*exponent),
            RadialDatum::Step { levels } => levels
                .first()
                .and_then(|(_, v)| (*v > 0.0).then_some(0.0)),
            RadialDatum::Sampled { .. } => None,
        }
    }

    /// Largest Lorentz index `r <= N` with `f` in `L^(r, inf)`.
    ///
    /// Power-type data `|x|^-beta` sit exactly in `L^(N/beta, inf)`; bounded
    /// data are assigned the top index `N`.
    pub fn lorentz_index(&self, dim: usize) -> f64 {
        let n = dim as f64;
        match self {
            RadialDatum::PowerLaw { exponent, .. } | RadialDatum::TruncatedPower { exponent, .. }
                if *exponent > 0.0 =>
            {
                (n / exponent).min(n)
            }
            _ => n,
        }
    }

    /// The datum multiplied by `lambda >= 0`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            RadialDatum::Constant { value } => RadialDatum::Constant {
                value: lambda * value,
            },
            RadialDatum::PowerLaw {
                amplitude,
                exponent,
            } => RadialDatum::PowerLaw {
                amplitude: lambda * amplitude,
                exponent: *exponent,
            },
            RadialDatum::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => RadialDatum::TruncatedPower {
                amplitude: lambda * amplitude,
                exponent: *exponent,
                cutoff: *cutoff,
            },
            RadialDatum::Step { levels } => RadialDatum::Step {
                levels: levels.iter().map(|(r, v)| (*r, lambda * v)).collect(),
            },
            RadialDatum::Sampled { grid } => RadialDatum::Sampled {
                grid: grid.iter().map(|(r, v)| (*r, lambda * v)).collect(),
            },
        }
    }

    pub fn validate(&self, domain: &BallDomain) -> ValidationReport {
        let mut v = Vec::new();
        let n = domain.dim_f64();
        let big_r = domain.radius();
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        match self {
            RadialDatum::Constant { value } => {
                if !finite_nonneg(*value) {
                    v.push(format!("constant value {value} must be finite and >= 0"));
                }
            }
            RadialDatum::PowerLaw {
                amplitude,
                exponent,
            } => check_power(&mut v, *amplitude, *exponent, n),
            RadialDatum::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => {
                check_power(&mut v, *amplitude, *exponent, n);
                if !(*cutoff > 0.0 && *cutoff < big_r) {
                    v.push(format!("cutoff {cutoff} must lie in (0, R = {big_r})"));
                }
            }
            RadialDatum::Step { levels } => {
                if levels.is_empty() {
                    v.push("step datum has no levels".into());
                }
                check_nodes(&mut v, levels, big_r, "step");
            }
            RadialDatum::Sampled { grid } => {
                if grid.is_empty() {
                    v.push("sampled datum has no nodes".into());
                }
                check_nodes(&mut v, grid, big_r, "sampled");
            }
        }
        ValidationReport { violations: v }
    }
}

fn check_power(v: &mut Vec<String>, amplitude: f64, exponent: f64, n: f64) {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        v.push(format!("amplitude {amplitude} must be > 0"));
    }
    if !(exponent > 0.0) {
        v.push(format!("exponent {exponent} must be > 0"));
    }
    if !(exponent < n) {
        v.push(format!(
            "exponent {exponent} >= dimension {n}: datum is not integrable"
        ));
    }
}

fn check_nodes(v: &mut Vec<String>, nodes: &[(f64, f64)], big_r: f64, what: &str) {
    for (i, &(r, f)) in nodes.iter().enumerate() {
        if !(r > 0.0 && r <= big_r) {
            v.push(format!("{what} radius {r} at index {i} outside (0, R = {big_r}]"));
        }
        if !(f.is_finite() && f >= 0.0) {
            v.push(format!("{what} value {f} at index {i} must be finite and >= 0"));
        }
    }
    for (i, w) in nodes.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            v.push(format!(
                "{what} radii not strictly increasing at index {}: {} then {}",
                i + 1,
                w[0].0,
                w[1].0
            ));
        }
        if w[1].1 > w[0].1 {
            v.push(format!(
                "{what} values not nonincreasing at index {}: {} then {}",
                i + 1,
                w[0].1,
                w[1].1
            ));
        }
    }
}

fn interpolate_clamped(grid: &[(f64, f64)], rho: f64) -> f64 {
    let Some(&(r0, f0)) = grid.first() else {
        return 0.0;
    };
    if rho <= r0 {
        return f0;
    }
    let &(rn, fnode) = grid.last().expect("nonempty");
    if rho >= rn {
        return fnode;
    }
    let i = grid.partition_point(|(r, _)| *r <= rho);
    let (ra, fa) = grid[i - 1];
    let (rb, fb) = grid[i];
    fa + (fb - fa) * (rho - ra) / (rb - ra)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidDatum(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes_in_low_dimensions() {
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4).unwrap() - PI * PI / 2.0).abs() < 1e-14);
        assert_eq!(unit_ball_volume(1), Err(Error::InvalidDimension(1)));
    }

    #[test]
    fn unit_ball_volume_matches_gamma_formula() {
        use statrs::function::gamma::gamma;
        for n in 2..=12 {
            let half = n as f64 / 2.0;
            let oracle = PI.powf(half) / gamma(half + 1.0);
            let c = unit_ball_volume(n).unwrap();
            assert!((c - oracle).abs() < 1e-12 * oracle, "N = {n}");
        }
    }

    #[test]
    fn evaluates_catalog_kinds() {
        let dom = BallDomain::new(2, 1.0).unwrap();
        assert_eq!(RadialDatum::constant(2.0).eval(&dom, 0.3).unwrap(), 2.0);
        assert_eq!(RadialDatum::power_law(1.0, 1.0).eval(&dom, 0.5).unwrap(), 2.0);
        let step = RadialDatum::step(vec![(0.5, 3.0), (1.0, 1.0)]);
        assert_eq!(step.eval(&dom, 0.7).unwrap(), 1.0);
        assert_eq!(step.eval(&dom, 0.5).unwrap(), 1.0);
        assert_eq!(step.eval(&dom, 0.49).unwrap(), 3.0);
        assert_eq!(step.eval(&dom, 1.0).unwrap(), 1.0);
        let tp = RadialDatum::truncated_power(1.0, 1.0, 0.5);
        assert_eq!(tp.eval(&dom, 0.25).unwrap(), 4.0);
        assert_eq!(tp.eval(&dom, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn eval_rejects_points_outside_the_ball() {
        let dom = BallDomain::new(2, 1.0).unwrap();
        let d = RadialDatum::constant(1.0);
        assert!(matches!(d.eval(&dom, 0.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(d.eval(&dom, 1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn sampled_interpolation_is_clamped() {
        let d = RadialDatum::sampled(vec![(0.2, 4.0), (0.6, 2.0), (0.8, 1.0)]);
        assert_eq!(d.profile(0.1), 4.0);
        assert!((d.profile(0.4) - 3.0).abs() < 1e-15);
        assert_eq!(d.profile(0.9), 1.0);
    }

    #[test]
    fn validation_flags_the_documented_violations() {
        let d2 = BallDomain::new(2, 1.0).unwrap();
        let r = RadialDatum::power_law(1.0, 2.5).validate(&d2);
        assert!(!r.is_valid());
        assert!(r.violations[0].contains("not integrable"));
        // beta = 1.5 < N = 2 is integrable in the plane
        assert!(RadialDatum::power_law(1.0, 1.5).validate(&d2).is_valid());

        let r = RadialDatum::sampled(vec![(0.1, 1.0), (0.2, 2.0)]).validate(&d2);
        assert!(r.violations.iter().any(|v| v.contains("nonincreasing")));

        assert!(RadialDatum::constant(2.0).validate(&d2).is_valid());
        assert!(!RadialDatum::constant(-1.0).validate(&d2).is_valid());
        assert!(!RadialDatum::truncated_power(1.0, 1.0, 1.0).validate(&d2).is_valid());
        assert!(!RadialDatum::step(vec![(0.5, 1.0), (0.4, 0.5)]).validate(&d2).is_valid());
    }

    #[test]
    fn datum_round_trips_through_json() {
        let d = RadialDatum::step(vec![(0.5, 3.0), (1.0, 1.0)]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"step","levels":[[0.5,3.0],[1.0,1.0]]}"#);
        let back: RadialDatum = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let pl: RadialDatum =
            serde_json::from_str(r#"{"kind":"power_law","amplitude":1,"exponent":1.2}"#).unwrap();
        assert_eq!(pl, RadialDatum::power_law(1.0, 1.2));
    }
}
