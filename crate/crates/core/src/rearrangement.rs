//! Decreasing rearrangement `f*`, its running average `f**`, and weak-type
//! Lorentz quasi-norms.
//!
//! The datum is extended by zero outside `B_R`, so `f*(s) = 0` for
//! `s >= |B_R|` and `f**(t)` is defined for every `t > 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_integrate, log_grid, QuadratureConfig};
use crate::profile::{BallDomain, RadialDatum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LorentzNorm {
    Finite(f64),
    Divergent,
}

impl LorentzNorm {
    pub fn value(&self) -> Option<f64> {
        match self {
            LorentzNorm::Finite(v) => Some(*v),
            LorentzNorm::Divergent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    domain: BallDomain,
    datum: RadialDatum,
    quad: QuadratureConfig,
    /// Sampled data only: knot radii in `(0, R]` and the mass `int_{B_knot} f`.
    knots: Vec<(f64, f64)>,
}

/// Builds `f*` (and with it `f**`) for a validated radially decreasing datum.
pub fn decreasing_rearrangement(datum: &RadialDatum, domain: &BallDomain) -> Result<Rearrangement> {
    Rearrangement::with_quadrature(datum, domain, QuadratureConfig::default())
}

impl Rearrangement {
    pub fn with_quadrature(
        datum: &RadialDatum,
        domain: &BallDomain,
        quad: QuadratureConfig,
    ) -> Result<Self> {
        datum.validate(domain).into_result()?;
        quad.validate()?;
        let mut re = Self {
            domain: *domain,
            datum: datum.clone(),
            quad,
            knots: Vec::new(),
        };
        if let RadialDatum::Sampled { grid } = datum {
            let big_r = domain.radius();
            let mut radii: Vec<f64> = grid.iter().map(|(r, _)| *r).filter(|&r| r < big_r).collect();
            radii.push(big_r);
            let mut mass = 0.0;
            let mut lo = 0.0;
            for r in radii {
                mass += re.shell_mass(lo, r)?;
                re.knots.push((r, mass));
                lo = r;
            }
        }
        Ok(re)
    }

    pub fn domain(&self) -> &BallDomain {
        &self.domain
    }

    pub fn datum(&self) -> &RadialDatum {
        &self.datum
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// `|B_R|`, the length of the support of `f*`.
    pub fn measure(&self) -> f64 {
        self.domain.measure()
    }

    /// `f*(s)`; `+inf` at `s = 0` for unbounded data.
    pub fn fstar(&self, s: f64) -> f64 {
        if s >= self.measure() {
            return 0.0;
        }
        self.datum.profile(self.domain.radius_of_measure(s.max(0.0)))
    }

    /// `int_0^t f*(s) ds`.
    pub fn mass(&self, t: f64) -> Result<f64> {
        let t = t.clamp(0.0, self.measure());
        let c = self.domain.unit_volume();
        let n = self.domain.dim_f64();
        let power_mass = |amplitude: f64, exponent: f64, t: f64| {
            let theta = exponent / n;
            amplitude * c.powf(theta) * t.powf(1.0 - theta) / (1.0 - theta)
        };
        Ok(match &self.datum {
            RadialDatum::Constant { value } => value * t,
            RadialDatum::PowerLaw {
                amplitude,
                exponent,
            } => power_mass(*amplitude, *exponent, t),
            RadialDatum::TruncatedPower {
                amplitude,
                exponent,
                cutoff,
            } => power_mass(*amplitude, *exponent, t.min(self.domain.ball_measure(*cutoff))),
            RadialDatum::Step { levels } => {
                let mut inner = 0.0;
                let mut sum = 0.0;
                for (r, v) in levels {
                    let outer = self.domain.ball_measure(*r).min(t);
                    if outer > inner {
                        sum += v * (outer - inner);
                        inner = outer;
                    }
                }
                sum
            }
            RadialDatum::Sampled { .. } => {
                let rho = self.domain.radius_of_measure(t);
                let i = self.knots.partition_point(|(r, _)| *r <= rho);
                let (r0, m0) = if i == 0 { (0.0, 0.0) } else { self.knots[i - 1] };
                m0 + self.shell_mass(r0, rho)?
            }
        })
    }

    /// `f**(t) = (1/t) int_0^t f*`, for `t > 0`.
    pub fn fstarstar(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!(
                "maximal function needs t > 0, got {t}"
            )));
        }
        Ok(self.mass(t)? / t)
    }

    /// `int_{r0 < |x| < r1} f`, integrated in the radial variable.
    fn shell_mass(&self, r0: f64, r1: f64) -> Result<f64> {
        if r1 <= r0 {
            return Ok(0.0);
        }
        let k = self.domain.surface_factor();
        let n = self.domain.dim() as i32;
        adaptive_integrate(
            |rho| k * self.datum.profile(rho) * rho.powi(n - 1),
            r0,
            r1,
            &self.quad,
        )
    }

    /// `sup_{t>0} t^(1/r) f**(t)`.
    pub fn lorentz_quasinorm(&self, r: f64) -> Result<LorentzNorm> {
        if !(r > 1.0) {
            return Err(Error::InvalidIndex(r));
        }
        let n = self.domain.dim_f64();
        let inv = 1.0 / r;
        let weighted = |t: f64| -> Result<f64> { Ok(t.powf(inv - 1.0) * self.mass(t)?) };
        let power_case = |exponent: f64, top: f64| -> Result<LorentzNorm> {
            // t^(1/r) f**(t) = K t^(1/r - beta/N) on (0, top], decreasing after.
            let gap = inv - exponent / n;
            if gap < -1e-14 {
                Ok(LorentzNorm::Divergent)
            } else {
                Ok(LorentzNorm::Finite(weighted(top)?))
            }
        };
        match &self.datum {
            RadialDatum::Constant { .. } => Ok(LorentzNorm::Finite(weighted(self.measure())?)),
            RadialDatum::PowerLaw { exponent, .. } => power_case(*exponent, self.measure()),
            RadialDatum::TruncatedPower {
                exponent, cutoff, ..
            } => power_case(*exponent, self.domain.ball_measure(*cutoff)),
            RadialDatum::Step { levels } => {
                // On each constant piece the map decreases and then increases,
                // so the supremum sits at a breakpoint.
                let mut best: f64 = 0.0;
                for (rad, _) in levels {
                    let t = self.domain.ball_measure(*rad).min(self.measure());
                    best = best.max(weighted(t)?);
                }
                Ok(LorentzNorm::Finite(best))
            }
            RadialDatum::Sampled { .. } => self.scan_lorentz(inv).map(LorentzNorm::Finite),
        }
    }

    fn scan_lorentz(&self, inv: f64) -> Result<f64> {
        let top = self.measure();
        let phi = |t: f64| -> Result<f64> { Ok(t.powf(inv - 1.0) * self.mass(t)?) };
        let mut ts = log_grid(top * 1e-12, top, 10_000);
        ts.extend(self.knots.iter().map(|(r, _)| self.domain.ball_measure(*r).min(top)));
        ts.sort_by(f64::total_cmp);
        ts.dedup();

        let values = ts.iter().map(|&t| phi(t)).collect::<Result<Vec<_>>>()?;
        let (imax, &vmax) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty scan");
        let lo = ts[imax.saturating_sub(1)];
        let hi = ts[(imax + 1).min(ts.len() - 1)];
        Ok(vmax.max(golden_section_max(&phi, lo, hi)?))
    }
}

fn golden_section_max<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if b - a <= 1e-15 * b {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(f1.max(f2))
}

/// Brute-force rearrangement built only from point evaluations of `f0`.
///
/// The ball is cut into `cells` concentric shells of equal width, each
/// carrying the value of `f0` at its mid-radius. Shells are sorted by value
/// and their measures accumulated, so `f*(s)` is the value of the first shell
/// whose cumulative measure exceeds `s`. No monotonicity of the profile is
/// assumed.
#[derive(Debug, Clone)]
pub struct RearrangementOracle {
    /// `(value, cumulative measure)`, values nonincreasing.
    table: Vec<(f64, f64)>,
}

pub fn rearrangement_oracle(datum: &RadialDatum, domain: &BallDomain, cells: usize) -> RearrangementOracle {
    let cells = cells.max(1);
    let h = domain.radius() / cells as f64;
    let mut shells: Vec<(f64, f64)> = (0..cells)
        .map(|j| {
            let (r0, r1) = (j as f64 * h, (j + 1) as f64 * h);
            let value = datum.profile((j as f64 + 0.5) * h).abs();
            (value, domain.ball_measure(r1) - domain.ball_measure(r0))
        })
        .collect();
    shells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    let table = shells
        .into_iter()
        .map(|(v, w)| {
            acc += w;
            (v, acc)
        })
        .collect();
    RearrangementOracle { table }
}

impl RearrangementOracle {
    /// `mu_f(tau) = |{f > tau}|` at the shell resolution.
    pub fn distribution(&self, tau: f64) -> f64 {
        let k = self.table.partition_point(|&(v, _)| v > tau);
        if k == 0 {
            0.0
        } else {
            self.table[k - 1].1
        }
    }

    pub fn fstar(&self, s: f64) -> f64 {
        let k = self.table.partition_point(|&(_, c)| c <= s);
        self.table.get(k).map_or(0.0, |&(v, _)| v)
    }

    pub fn tabulate(&self, s: &[f64]) -> Vec<(f64, f64)> {
        s.iter().map(|&x| (x, self.fstar(x))).collect()
    }
}
