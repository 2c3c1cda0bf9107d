//! Integrability of `grad u`, `D^2 u` and `D H_{p/2}(grad u)` near the origin,
//! decided numerically and, for catalog data, by the small-radius exponent.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{divergence_probe_with, Finiteness, ProbeConfig};
use crate::profile::{BallDomain, RadialDatum};
use crate::solver::{b_tilde, RadialSolution, SolverParams};

/// Integrand exponents within this distance of `-1` count as logarithmic.
const LOG_EXPONENT_TOL: f64 = 1e-12;

fn check_index(n: f64, r: f64) -> Result<()> {
    if r > 1.0 && r <= n {
        Ok(())
    } else {
        Err(Error::InvalidIndex(r))
    }
}

/// `N r (p-1) / (N - r)`, infinite at `r = N`.
pub fn critical_q_gradient(n: usize, r: f64, p: f64) -> Result<f64> {
    let nf = n as f64;
    check_index(nf, r)?;
    if r == nf {
        return Ok(f64::INFINITY);
    }
    Ok(nf * r * (p - 1.0) / (nf - r))
}

/// `N r (p-1) / (N + r (p-2))`; equals `N` at `r = N`.
pub fn critical_q_hessian(n: usize, r: f64, p: f64) -> Result<f64> {
    let nf = n as f64;
    check_index(nf, r)?;
    let den = nf + r * (p - 2.0);
    if !(den > 0.0) {
        return Err(Error::InvalidParams(format!(
            "N + r (p - 2) must be positive, got {den}"
        )));
    }
    if r == nf {
        return Ok(nf);
    }
    Ok(nf * r * (p - 1.0) / den)
}

/// Lorentz index above which `H_{p/2}(grad u)` is in `W^{1,2}`: `N p / (N (p-1) + 2 - p)`.
pub fn critical_r_hp2(n: usize, p: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::UnsupportedP(p));
    }
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let nf = n as f64;
    Ok(nf * p / (nf * (p - 1.0) + 2.0 - p))
}

/// `beta_hat = N - 1 - (N-2)/p`.
pub fn beta_hat(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf - 1.0 - (nf - 2.0) / p
}

/// `alpha = (beta - 1)/(p - 1) - 1`.
pub fn alpha_of_beta(beta: f64, p: f64) -> f64 {
    (beta - 1.0) / (p - 1.0) - 1.0
}

/// `alpha_hat = (N-2)/p - 1`.
pub fn alpha_hat(n: usize, p: f64) -> f64 {
    (n as f64 - 2.0) / p - 1.0
}

/// `q_hat(beta) = N (p-1) / (beta + p - 2)`.
pub fn q_hat(n: usize, p: f64, beta: f64) -> f64 {
    n as f64 * (p - 1.0) / (beta + p - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "q", rename_all = "snake_case")]
pub enum Quantity {
    GradLq(f64),
    HessLq(f64),
    /// `int (|grad u| - 1)_+^(p-2) |D^2 u|^2`.
    Hp2Energy,
    /// `int |D H_{p/2}(grad u)|^2`.
    Hp2EnergyExact,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::GradLq(_) => "grad_lq",
            Quantity::HessLq(_) => "hessian_lq",
            Quantity::Hp2Energy => "energy",
            Quantity::Hp2EnergyExact => "energy_exact",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Quantity::GradLq(q) | Quantity::HessLq(q) => Some(*q),
            _ => None,
        }
    }
}

/// Raw outcome of the dyadic probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProbeOutcome {
    Finite(f64),
    Divergent(f64),
    Borderline(f64),
}

impl ProbeOutcome {
    fn finite(&self) -> Option<bool> {
        match self {
            ProbeOutcome::Finite(_) => Some(true),
            ProbeOutcome::Divergent(_) => Some(false),
            ProbeOutcome::Borderline(_) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProbeOutcome::Finite(_) => "Finite",
            ProbeOutcome::Divergent(_) => "Divergent",
            ProbeOutcome::Borderline(_) => "inconclusive(borderline)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub quantity: Quantity,
    pub probe: ProbeOutcome,
    pub probe_sequence: Vec<f64>,
    /// Exponent `E` of the radial integrand `~ r^E` at `0+`, when known in closed form.
    pub analytic_exponent: Option<f64>,
    /// Final decision: the analytic exponent when available, the probe otherwise.
    pub finite: bool,
    /// `||.||_q` for the `L^q` quantities, the integral itself for the energies.
    pub value: Option<f64>,
    /// Critical `q` for `L^q` quantities, critical Lorentz index for the energies.
    pub predicted_threshold: f64,
    pub datum_lorentz_r: f64,
    /// What the threshold predicts for this datum.
    pub predicted_finite: bool,
    /// Probe and analytic exponent tell the same story (vacuous without an exponent).
    pub probe_consistent: bool,
    /// The final decision matches the threshold prediction.
    pub agree: bool,
}

/// Small-radius exponents of `g'` and `g / r` for data `f0 ~ c r^-b`.
fn hessian_exponents(b: f64, p: f64) -> (Option<f64>, f64) {
    // On m ~ const (b = 1) the radial eigenvalue vanishes identically.
    let radial = (b != 1.0).then(|| (2.0 - p - b) / (p - 1.0));
    let tangential = if b <= 1.0 { -1.0 } else { (1.0 - b) / (p - 1.0) - 1.0 };
    (radial, tangential)
}

fn analytic_exponent(sol: &RadialSolution, quantity: Quantity) -> Option<f64> {
    let b = sol.datum().singular_order()?;
    let p = sol.params().p;
    let n = sol.domain().dim_f64();
    let (rad, tan) = hessian_exponents(b, p);
    let worst = rad.map_or(tan, |e| e.min(tan));
    let e = match quantity {
        Quantity::GradLq(q) => {
            let eg = if b <= 1.0 { 0.0 } else { (1.0 - b) / (p - 1.0) };
            q * eg
        }
        Quantity::HessLq(q) => q * worst,
        Quantity::Hp2Energy => (1.0 - b) * (p - 2.0) / (p - 1.0) + 2.0 * worst,
        Quantity::Hp2EnergyExact => (2.0 - p - b * p) / (p - 1.0),
    };
    Some(e + n - 1.0)
}

fn require_exact(sol: &RadialSolution) -> Result<()> {
    if sol.params().is_exact() {
        Ok(())
    } else {
        Err(Error::InvalidParams(
            "regularity analysis is defined for eps = 0".into(),
        ))
    }
}

fn run_probe<F: Fn(f64) -> Result<f64>>(
    sol: &RadialSolution,
    integrand: F,
    b: f64,
    probe: &ProbeConfig,
) -> Result<(ProbeOutcome, Vec<f64>)> {
    let dom = sol.domain();
    let k = dom.surface_factor();
    let n = dom.dim() as i32;
    let f = |r: f64| integrand(r).map(|v| k * v * r.powi(n - 1)).unwrap_or(f64::NAN);
    match divergence_probe_with(f, b, &sol.params().quad, probe) {
        Ok(v) => {
            let outcome = match v.status {
                Finiteness::Finite(x) => ProbeOutcome::Finite(x),
                Finiteness::Divergent(s) => ProbeOutcome::Divergent(s),
            };
            Ok((outcome, v.probe_sequence))
        }
        Err(Error::InconclusiveProbe {
            exponent,
            probe_sequence,
        }) => Ok((ProbeOutcome::Borderline(exponent), probe_sequence)),
        Err(e) => Err(e),
    }
}

fn assemble(
    sol: &RadialSolution,
    quantity: Quantity,
    probe: ProbeOutcome,
    probe_sequence: Vec<f64>,
    predicted_threshold: f64,
    predicted_finite: bool,
) -> Result<RegularityVerdict> {
    let exponent = analytic_exponent(sol, quantity);
    let analytic_finite = exponent.map(|e| e > -1.0 + LOG_EXPONENT_TOL);
    let finite = match (analytic_finite, probe.finite(), &probe) {
        (Some(a), _, _) => a,
        (None, Some(f), _) => f,
        (None, None, ProbeOutcome::Borderline(e)) => {
            return Err(Error::InconclusiveProbe {
                exponent: *e,
                probe_sequence,
            })
        }
        _ => unreachable!("probe outcomes are exhaustive"),
    };
    let probe_consistent = match (analytic_finite, probe.finite()) {
        (Some(a), Some(f)) => a == f,
        // A borderline probe is only consistent with a logarithmic exponent.
        (Some(_), None) => exponent.is_some_and(|e| (e + 1.0).abs() < 0.05),
        (None, _) => true,
    };
    let value = match (&probe, finite) {
        (ProbeOutcome::Finite(v), true) => Some(match quantity {
            Quantity::GradLq(q) | Quantity::HessLq(q) => v.powf(1.0 / q),
            _ => *v,
        }),
        _ => None,
    };
    Ok(RegularityVerdict {
        quantity,
        probe,
        probe_sequence,
        analytic_exponent: exponent,
        finite,
        value,
        predicted_threshold,
        datum_lorentz_r: sol.datum().lorentz_index(sol.domain().dim()),
        predicted_finite,
        probe_consistent,
        agree: finite == predicted_finite,
    })
}

pub fn lq_norm(sol: &RadialSolution, quantity: Quantity) -> Result<RegularityVerdict> {
    lq_norm_with(sol, quantity, &ProbeConfig::default())
}

/// `L^q` norm of `grad u` on `B_R`, or of `D^2 u` on `B_{R/2}`.
pub fn lq_norm_with(
    sol: &RadialSolution,
    quantity: Quantity,
    probe: &ProbeConfig,
) -> Result<RegularityVerdict> {
    require_exact(sol)?;
    let n = sol.domain().dim();
    let p = sol.params().p;
    let lorentz_r = sol.datum().lorentz_index(n);
    let big_r = sol.domain().radius();
    let (outcome, seq, threshold) = match quantity {
        Quantity::GradLq(q) if q >= 1.0 => {
            let (o, s) = run_probe(sol, |r| Ok(sol.grad_unchecked(r)?.powf(q)), big_r, probe)?;
            (o, s, critical_q_gradient(n, lorentz_r, p)?)
        }
        Quantity::HessLq(q) if q >= 1.0 => {
            let (o, s) = run_probe(sol, |r| Ok(sol.hessian(r)?.frobenius.powf(q)), 0.5 * big_r, probe)?;
            (o, s, critical_q_hessian(n, lorentz_r, p)?)
        }
        Quantity::GradLq(q) | Quantity::HessLq(q) => {
            return Err(Error::InvalidParams(format!("need q >= 1, got {q}")))
        }
        _ => {
            return Err(Error::InvalidParams(
                "lq_norm takes GradLq or HessLq".into(),
            ))
        }
    };
    let q = quantity.exponent().expect("L^q quantity");
    assemble(sol, quantity, outcome, seq, threshold, q < threshold)
}

fn energy(sol: &RadialSolution, exact: bool, probe: &ProbeConfig) -> Result<RegularityVerdict> {
    require_exact(sol)?;
    let p = sol.params().p;
    let n = sol.domain().dim();
    let threshold = critical_r_hp2(n, p)?;
    let lorentz_r = sol.datum().lorentz_index(n);
    let nm1 = n as f64 - 1.0;
    let integrand = |r: f64| -> Result<f64> {
        let m = sol.flux_profile(r)?;
        let h = sol.hessian(r)?;
        let weight = m.powf((p - 2.0) / (p - 1.0));
        let gp2 = h.grad_derivative * h.grad_derivative;
        Ok(if exact {
            0.25 * p * p * weight * gp2 + nm1 * m.powf(p / (p - 1.0)) / (r * r)
        } else {
            let g = b_tilde(p, m);
            weight * (gp2 + nm1 * g * g / (r * r))
        })
    };
    let (outcome, seq) = run_probe(sol, integrand, 0.5 * sol.domain().radius(), probe)?;
    let quantity = if exact {
        Quantity::Hp2EnergyExact
    } else {
        Quantity::Hp2Energy
    };
    // The weighted energy is judged by the hypothesis on the Lorentz index,
    // capped at N. The exact energy is judged by the sharp power-law
    // condition beta < beta_hat, which reads N/beta > threshold uncapped.
    let index = if exact {
        match sol.datum().singular_order() {
            Some(b) if b > 0.0 => n as f64 / b,
            Some(_) => f64::INFINITY,
            None => lorentz_r,
        }
    } else {
        lorentz_r
    };
    assemble(sol, quantity, outcome, seq, threshold, index > threshold)
}

/// `int_{B_{R/2}} (|grad u| - 1)_+^(p-2) |D^2 u|^2`, the weighted energy that
/// controls `D H_{p/2}(grad u)` from above.
pub fn hp2_sobolev_energy(sol: &RadialSolution) -> Result<RegularityVerdict> {
    energy(sol, false, &ProbeConfig::default())
}

/// `int_{B_{R/2}} |D H_{p/2}(grad u)|^2` from the closed form of `H_{p/2}(grad u) = m^(p/(2(p-1)))`.
pub fn hp2_sobolev_energy_exact(sol: &RadialSolution) -> Result<RegularityVerdict> {
    energy(sol, true, &ProbeConfig::default())
}

/// Exponents `q` on a geometric grid with ratio `1.1` from `q_min` to `q_max`,
/// skipping the 5% collar around `threshold`.
pub fn q_scan_grid(q_min: f64, q_max: f64, threshold: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut q = q_min.max(1.0);
    while q <= q_max * (1.0 + 1e-12) {
        let near = threshold.is_finite() && (q / threshold - 1.0).abs() < 0.05;
        if !near {
            out.push(q);
        }
        q *= 1.1;
    }
    out
}

/// One row of the power-law sharpness table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub beta: f64,
    pub lorentz_r: f64,
    pub beta_hat: f64,
    pub alpha: f64,
    pub alpha_hat: f64,
    pub q_hat: f64,
    /// `None` for `p < 2`.
    pub energy: Option<RegularityVerdict>,
    pub energy_exact: Option<RegularityVerdict>,
    /// Hessian `L^q` at `0.95` and `1.05` times the critical exponent.
    pub hessian_below: RegularityVerdict,
    pub hessian_above: RegularityVerdict,
    /// The exact energy is finite iff `beta < beta_hat`, and the Hessian
    /// verdicts straddle the critical exponent.
    pub agree: bool,
}

/// `f = |x|^-beta` on the unit ball for each `beta`.
pub fn sharpness_scan(n: usize, p: f64, betas: &[f64]) -> Result<Vec<SharpnessRow>> {
    let dom = BallDomain::new(n, 1.0)?;
    let nf = n as f64;
    betas
        .iter()
        .map(|&beta| {
            if !(beta > 0.0 && beta < nf) {
                return Err(Error::InvalidParams(format!(
                    "beta must lie in (0, {n}), got {beta}"
                )));
            }
            let datum = RadialDatum::power_law(1.0, beta);
            let sol = RadialSolution::new(&datum, &dom, SolverParams::exact(p)?)?;
            let lorentz_r = datum.lorentz_index(n);
            let (energy, energy_exact) = if p >= 2.0 {
                (Some(hp2_sobolev_energy(&sol)?), Some(hp2_sobolev_energy_exact(&sol)?))
            } else {
                (None, None)
            };
            let qc = critical_q_hessian(n, lorentz_r, p)?;
            let hessian_below = lq_norm(&sol, Quantity::HessLq((0.95 * qc).max(1.0)))?;
            let hessian_above = lq_norm(&sol, Quantity::HessLq(1.05 * qc))?;
            let bh = beta_hat(n, p);
            let energy_ok = energy_exact.as_ref().map_or(true, |v| v.finite == (beta < bh));
            let agree = energy_ok && hessian_below.finite && !hessian_above.finite;
            Ok(SharpnessRow {
                beta,
                lorentz_r,
                beta_hat: bh,
                alpha: alpha_of_beta(beta, p),
                alpha_hat: alpha_hat(n, p),
                q_hat: q_hat(n, p, beta),
                energy,
                energy_exact,
                hessian_below,
                hessian_above,
                agree,
            })
        })
        .collect()
}
