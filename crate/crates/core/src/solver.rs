//! Explicit radial solutions of the widely degenerate problem and of its
//! uniformly elliptic regularisation.
//!
//! Everything is driven by the flux profile
//! `m(r) = (r / N) f**(C_N r^N)`. For `eps > 0` the gradient magnitude is
//! `B^-1_{eps,p}(m(r))`; for `eps = 0` it is `1 + m(r)^(1/(p-1))`, the
//! representative that is also used inside the degeneracy set. All
//! gradients point along `-x/|x|`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadratureConfig};
use crate::profile::{BallDomain, RadialDatum};
use crate::rearrangement::{LorentzNorm, Rearrangement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub p: f64,
    /// Regularisation parameter; `0` selects the degenerate problem itself.
    pub eps: f64,
    #[serde(default)]
    pub quad: QuadratureConfig,
}

impl SolverParams {
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        let params = Self {
            p,
            eps,
            quad: QuadratureConfig::default(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn exact(p: f64) -> Result<Self> {
        Self::new(p, 0.0)
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be > 1, got {}", self.p)));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidParams(format!(
                "eps must lie in [0, 1], got {}",
                self.eps
            )));
        }
        self.quad.validate()
    }

    pub fn is_exact(&self) -> bool {
        self.eps == 0.0
    }
}

/// `H_alpha(xi) = (|xi| - 1)_+^alpha xi / |xi|`, with `H_alpha(0) = 0`.
pub fn h_alpha(xi: &[f64], alpha: f64) -> Vec<f64> {
    let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; xi.len()];
    }
    let scale = (norm - 1.0).max(0.0).powf(alpha) / norm;
    xi.iter().map(|x| scale * x).collect()
}

/// Radial form of `H_alpha` on a signed magnitude `t`.
pub fn h_alpha_radial(t: f64, alpha: f64) -> f64 {
    (t.abs() - 1.0).max(0.0).powf(alpha) * t.signum()
}

/// Magnitude of `H_alpha` at a vector of length `1 + excess`.
///
/// Passing the excess over the unit sphere avoids the cancellation in
/// `(1 + e) - 1` when `e` is small.
pub fn h_alpha_excess(excess: f64, alpha: f64) -> f64 {
    excess.max(0.0).powf(alpha)
}

/// `B_{eps,p}(r) = ((r - 1)_+ + eps r)^(p-1)`.
pub fn b_fun(eps: f64, p: f64, r: f64) -> f64 {
    ((r - 1.0).max(0.0) + eps * r).powf(p - 1.0)
}

/// Inverse of [`b_fun`] on `[0, inf)`.
pub fn b_inv(eps: f64, p: f64, s: f64) -> f64 {
    let root = s.powf(1.0 / (p - 1.0));
    if s <= eps.powf(p - 1.0) {
        root / eps
    } else {
        (1.0 + root) / (1.0 + eps)
    }
}

/// Pointwise limit `lim_{eps -> 0} B^-1_{eps,p}(s) = 1 + s^(1/(p-1))`.
pub fn b_tilde(p: f64, s: f64) -> f64 {
    1.0 + s.powf(1.0 / (p - 1.0))
}

/// Eigen-decomposition of `D^2 u` at a point of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hessian {
    /// `g'(r)`.
    pub grad_derivative: f64,
    /// Eigenvalue along `x/|x|`: `-g'(r)`.
    pub radial: f64,
    /// Eigenvalue of multiplicity `N - 1` on the tangent space: `-g(r)/r`.
    pub tangential: f64,
    pub frobenius: f64,
}

#[derive(Debug, Clone)]
pub struct RadialSolution {
    re: Rearrangement,
    params: SolverParams,
}

impl RadialSolution {
    pub fn new(datum: &RadialDatum, domain: &BallDomain, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let re = Rearrangement::with_quadrature(datum, domain, params.quad)?;
        Ok(Self { re, params })
    }

    pub fn from_rearrangement(re: Rearrangement, params: SolverParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { re, params })
    }

    /// Same datum and domain, different `(p, eps)`.
    pub fn with_params(&self, params: SolverParams) -> Result<Self> {
        Self::from_rearrangement(self.re.clone(), params)
    }

    pub fn domain(&self) -> &BallDomain {
        self.re.domain()
    }

    pub fn datum(&self) -> &RadialDatum {
        self.re.datum()
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn rearrangement(&self) -> &Rearrangement {
        &self.re
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let big_r = self.domain().radius();
        if r > 0.0 && r <= big_r {
            Ok(())
        } else {
            Err(Error::OutOfDomain { rho: r, radius: big_r })
        }
    }

    fn require_exact(&self, what: &str) -> Result<()> {
        if self.params.is_exact() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "{what} is only available for eps = 0, got eps = {}",
                self.params.eps
            )))
        }
    }

    /// `m(r)` for any `r > 0`; the datum is zero outside the ball.
    pub(crate) fn flux_unchecked(&self, r: f64) -> Result<f64> {
        let dom = self.domain();
        let mass = self.re.mass(dom.ball_measure(r))?;
        Ok(mass / (dom.surface_factor() * r.powi(dom.dim() as i32 - 1)))
    }

    /// `m(r) = (r/N) f**(C_N r^N)` on `(0, R]`.
    pub fn flux_profile(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        self.flux_unchecked(r)
    }

    /// Flux magnitude `|z|(r)`; the field itself is `-|z|(r) x/|x|`.
    pub fn z_field(&self, r: f64) -> Result<f64> {
        self.flux_profile(r)
    }

    fn excess_of_flux(&self, m: f64) -> f64 {
        let SolverParams { p, eps, .. } = self.params;
        if eps == 0.0 {
            m.powf(1.0 / (p - 1.0))
        } else {
            (b_inv(eps, p, m) - 1.0).max(0.0)
        }
    }

    fn magnitude_of_flux(&self, m: f64) -> f64 {
        let SolverParams { p, eps, .. } = self.params;
        if eps == 0.0 {
            b_tilde(p, m)
        } else {
            b_inv(eps, p, m)
        }
    }

    /// `(|grad u|(r) - 1)_+`, computed without forming `|grad u|` first.
    pub fn grad_excess(&self, r: f64) -> Result<f64> {
        Ok(self.excess_of_flux(self.flux_profile(r)?))
    }

    /// `g(r) = |grad u|(r)`.
    pub fn grad_magnitude(&self, r: f64) -> Result<f64> {
        Ok(self.magnitude_of_flux(self.flux_profile(r)?))
    }

    pub(crate) fn grad_unchecked(&self, r: f64) -> Result<f64> {
        Ok(self.magnitude_of_flux(self.flux_unchecked(r)?))
    }

    /// `grad u(x) = -g(|x|) x/|x|` for `x != 0` inside the ball.
    pub fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let g = self.grad_magnitude(r)?;
        Ok(x.iter().map(|c| -g * c / r).collect())
    }

    /// `g ~ r^((1-b)/(p-1))` near the origin, so `u(0)` is infinite once `b >= p`.
    fn center_value_diverges(&self) -> bool {
        self.datum()
            .singular_order()
            .is_some_and(|b| (1.0 - b) / (self.params.p - 1.0) <= -1.0 + 1e-12)
    }

    /// `u(r) = int_r^R g(rho) drho`, with `u(R) = 0`; `u(0)` may be `+inf`.
    pub fn value(&self, r: f64) -> Result<f64> {
        let big_r = self.domain().radius();
        if !(0.0..=big_r).contains(&r) {
            return Err(Error::OutOfDomain { rho: r, radius: big_r });
        }
        if r == 0.0 && self.center_value_diverges() {
            return Ok(f64::INFINITY);
        }
        integrate_with_breaks(
            |rho| self.grad_unchecked(rho).unwrap_or(f64::NAN),
            r,
            big_r,
            &self.datum().breakpoints(),
            &self.params.quad,
        )
    }

    /// `u` on a whole grid, integrating only between neighbouring radii.
    pub fn values_on_grid(&self, radii: &[f64]) -> Result<Vec<f64>> {
        let big_r = self.domain().radius();
        if let Some(&bad) = radii.iter().find(|r| !(0.0..=big_r).contains(*r)) {
            return Err(Error::OutOfDomain { rho: bad, radius: big_r });
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&i, &j| radii[j].total_cmp(&radii[i]));
        let breaks = self.datum().breakpoints();
        let mut out = vec![0.0; radii.len()];
        let mut upper = big_r;
        let mut acc = 0.0;
        for i in order {
            if radii[i] == 0.0 && self.center_value_diverges() {
                out[i] = f64::INFINITY;
                continue;
            }
            acc += integrate_with_breaks(
                |rho| self.grad_unchecked(rho).unwrap_or(f64::NAN),
                radii[i],
                upper,
                &breaks,
                &self.params.quad,
            )?;
            upper = radii[i];
            out[i] = acc;
        }
        Ok(out)
    }

    /// `m'(r) = f*(C_N r^N) - ((N-1)/N) f**(C_N r^N)`.
    ///
    /// Sampled data fall back to a central difference of `m` with step `1e-5 R`.
    pub fn flux_derivative(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let dom = self.domain();
        if let RadialDatum::Sampled { .. } = self.datum() {
            let h = 1e-5 * dom.radius();
            return if r > h {
                Ok((self.flux_unchecked(r + h)? - self.flux_unchecked(r - h)?) / (2.0 * h))
            } else {
                Ok((self.flux_unchecked(r + h)? - self.flux_unchecked(r)?) / h)
            };
        }
        let n = dom.dim_f64();
        let t = dom.ball_measure(r);
        Ok(self.datum().profile(r) - (n - 1.0) / n * self.re.fstarstar(t)?)
    }

    /// Second derivatives of the degenerate solution at `0 < r <= R`.
    pub fn hessian(&self, r: f64) -> Result<Hessian> {
        self.require_exact("the Hessian")?;
        let p = self.params.p;
        let m = self.flux_profile(r)?;
        if m == 0.0 && p > 2.0 {
            return Err(Error::DegenerateDerivative { r, p });
        }
        let dm = self.flux_derivative(r)?;
        let gp = m.powf((2.0 - p) / (p - 1.0)) * dm / (p - 1.0);
        let g = b_tilde(p, m);
        let tangential = -g / r;
        let n = self.domain().dim_f64();
        Ok(Hessian {
            grad_derivative: gp,
            radial: -gp,
            tangential,
            frobenius: (gp * gp + (n - 1.0) * tangential * tangential).sqrt(),
        })
    }

    /// `1 + (||f||_{L^{N,inf}} / (N C_N^(1/N)))^(1/(p-1))`.
    pub fn linf_gradient_bound(&self) -> Result<f64> {
        let dom = self.domain();
        match self.re.lorentz_quasinorm(dom.dim_f64())? {
            LorentzNorm::Finite(norm) => Ok(b_tilde(self.params.p, norm / dom.lorentz_scale())),
            LorentzNorm::Divergent => Err(Error::DivergentNorm {
                index: dom.dim_f64(),
            }),
        }
    }

    /// `int_{B_R} F(|x|) dx` for a radial integrand given as a function of `r`.
    pub fn integrate_radial<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let dom = self.domain();
        let k = dom.surface_factor();
        let n = dom.dim() as i32;
        integrate_with_breaks(
            |r| f(r).map(|v| k * v * r.powi(n - 1)).unwrap_or(f64::NAN),
            0.0,
            dom.radius(),
            &self.datum().breakpoints(),
            &self.params.quad,
        )
    }

    /// `int_{B_R} |grad u|^p dx`.
    pub fn gradient_energy(&self) -> Result<f64> {
        let p = self.params.p;
        self.integrate_radial(|r| Ok(self.grad_unchecked(r)?.powf(p)))
    }

    /// The eps-uniform bound `2^p C_N R^N [1 + (||f||_{L^{N,inf}} / (N C_N^(1/N)))^(p/(p-1))]`.
    pub fn apriori_energy_bound(&self) -> Result<f64> {
        let dom = self.domain();
        let p = self.params.p;
        match self.re.lorentz_quasinorm(dom.dim_f64())? {
            LorentzNorm::Finite(norm) => Ok(2f64.powf(p)
                * dom.measure()
                * (1.0 + (norm / dom.lorentz_scale()).powf(p / (p - 1.0)))),
            LorentzNorm::Divergent => Err(Error::DivergentNorm {
                index: dom.dim_f64(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> BallDomain {
        BallDomain::new(2, 1.0).unwrap()
    }

    fn solve(datum: RadialDatum, p: f64, eps: f64) -> RadialSolution {
        RadialSolution::new(&datum, &plane(), SolverParams::new(p, eps).unwrap()).unwrap()
    }

    #[test]
    fn h_alpha_examples() {
        assert_eq!(h_alpha(&[0.0, 0.0], 1.3), vec![0.0, 0.0]);
        let inside = h_alpha(&[0.7 * 0.6, 0.7 * 0.8], 1.0);
        assert!(inside.iter().all(|&c| c == 0.0));
        let v = h_alpha(&[3.0, 0.0], 2.0);
        assert!((v[0] - 4.0).abs() < 1e-15 && v[1] == 0.0);
        assert_eq!(h_alpha_radial(-3.0, 2.0), -4.0);
        assert_eq!(h_alpha_radial(0.0, 0.5), 0.0);
    }

    #[test]
    fn b_examples() {
        assert!((b_fun(0.3, 2.5, 1.0) - 0.3f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(b_fun(0.5, 2.0, 2.0), 2.0);
        assert_eq!(b_fun(0.5, 3.0, 0.0), 0.0);
        assert_eq!(b_inv(0.5, 2.0, 0.0), 0.0);
        assert!((b_inv(0.5, 2.0, 0.25) - 0.5).abs() < 1e-15);
        assert!((b_inv(0.1, 3.0, 0.04) - 1.2 / 1.1).abs() < 1e-14);
    }

    #[test]
    fn b_inverse_is_continuous_at_the_branch_point() {
        for eps in [0.01f64, 0.1, 0.5, 1.0] {
            for p in [1.5, 2.0, 3.0] {
                let s = eps.powf(p - 1.0);
                let lower = s.powf(1.0 / (p - 1.0)) / eps;
                let upper = (1.0 + s.powf(1.0 / (p - 1.0))) / (1.0 + eps);
                assert!((lower - 1.0).abs() < 1e-12 && (upper - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flux_profile_examples() {
        let c = solve(RadialDatum::constant(2.0), 2.0, 0.0);
        for r in [0.1, 0.5, 1.0] {
            assert!((c.flux_profile(r).unwrap() - r).abs() < 1e-15);
        }
        assert!(c.flux_profile(1e-9).unwrap() < 1e-8);
        let pl = solve(RadialDatum::power_law(1.0, 1.0), 3.0, 0.0);
        for r in [0.01, 0.5, 1.0] {
            assert!((pl.flux_profile(r).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(c.flux_profile(0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn gradient_examples() {
        let c = solve(RadialDatum::constant(2.0), 2.0, 0.0);
        assert!((c.grad_magnitude(0.4).unwrap() - 1.4).abs() < 1e-14);
        for p in [1.5, 2.0, 4.0] {
            let pl = solve(RadialDatum::power_law(1.0, 1.0), p, 0.0);
            assert!((pl.grad_magnitude(0.3).unwrap() - 2.0).abs() < 1e-14);
        }
        let reg = solve(RadialDatum::constant(2.0), 2.0, 0.5);
        assert!((reg.grad_magnitude(0.25).unwrap() - 0.5).abs() < 1e-15);
        let grad = c.gradient_at(&[0.3, 0.4]).unwrap();
        assert!((grad[0] + 1.5 * 0.6).abs() < 1e-14 && (grad[1] + 1.5 * 0.8).abs() < 1e-14);
    }

    #[test]
    fn solution_value_examples() {
        let c = solve(RadialDatum::constant(2.0), 2.0, 0.0);
        assert_eq!(c.value(1.0).unwrap(), 0.0);
        assert!((c.value(0.0).unwrap() - 1.5).abs() < 1e-10);
        for p in [1.3, 2.0, 3.0] {
            let pl = solve(RadialDatum::power_law(1.0, 1.0), p, 0.0);
            for r in [0.0, 0.25, 0.8] {
                assert!((pl.value(r).unwrap() - 2.0 * (1.0 - r)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn flux_equals_h_of_gradient() {
        for p in [1.5, 2.0, 3.0] {
            let c = solve(RadialDatum::constant(2.0), p, 0.0);
            for r in [0.05, 0.3, 0.9] {
                let grad = c.gradient_at(&[r, 0.0]).unwrap();
                let h = h_alpha(&grad, p - 1.0);
                let mag = h.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((mag - c.z_field(r).unwrap()).abs() < 1e-12, "p = {p}, r = {r}");
            }
        }
    }

    #[test]
    fn hessian_examples() {
        let c = solve(RadialDatum::constant(2.0), 2.0, 0.0);
        for r in [0.2, 0.5, 0.9] {
            let h = c.hessian(r).unwrap();
            assert!((h.radial + 1.0).abs() < 1e-14);
        }
        let h = c.hessian(0.5).unwrap();
        assert!((h.tangential + 3.0).abs() < 1e-14);
        assert!((h.frobenius - 10f64.sqrt()).abs() < 1e-13);

        let pl = solve(RadialDatum::power_law(1.0, 1.0), 2.0, 0.0);
        let h = pl.hessian(0.25).unwrap();
        assert!(h.radial.abs() < 1e-13);
        assert!((h.tangential + 8.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_rejects_degenerate_and_regularised_cases() {
        let zero = solve(RadialDatum::constant(0.0), 3.0, 0.0);
        assert!(matches!(zero.hessian(0.5), Err(Error::DegenerateDerivative { .. })));
        let reg = solve(RadialDatum::constant(1.0), 2.0, 0.1);
        assert!(matches!(reg.hessian(0.5), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn sampled_hessian_uses_finite_differences() {
        // Linear-in-rho data on a fine grid against the analytic constant case.
        let grid: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64 / 100.0, 2.0)).collect();
        let s = solve(RadialDatum::sampled(grid), 2.0, 0.0);
        let h = s.hessian(0.5).unwrap();
        assert!((h.radial + 1.0).abs() < 1e-6);
    }

    #[test]
    fn linf_bound_examples() {
        let c = solve(RadialDatum::constant(2.0), 2.0, 0.0);
        assert!((c.linf_gradient_bound().unwrap() - 2.0).abs() < 1e-14);
        let pl = solve(RadialDatum::power_law(1.0, 1.0), 3.0, 0.0);
        assert!((pl.linf_gradient_bound().unwrap() - 2.0).abs() < 1e-13);
        let rough = solve(RadialDatum::power_law(1.0, 1.2), 2.0, 0.0);
        assert!(matches!(rough.linf_gradient_bound(), Err(Error::DivergentNorm { .. })));
    }

    #[test]
    fn strong_singularity_makes_the_center_value_infinite() {
        let s = solve(RadialDatum::power_law(0.1, 1.7), 1.3, 0.0);
        assert_eq!(s.value(0.0).unwrap(), f64::INFINITY);
        let u = s.values_on_grid(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(u[0], f64::INFINITY);
        assert!(u[1].is_finite() && u[1] > 0.0);
        let mild = solve(RadialDatum::power_law(1.0, 1.2), 2.0, 0.0);
        assert!(mild.value(0.0).unwrap().is_finite());
    }

    #[test]
    fn params_are_validated() {
        assert!(SolverParams::new(1.0, 0.0).is_err());
        assert!(SolverParams::new(2.0, 1.5).is_err());
        assert!(SolverParams::new(2.0, -0.1).is_err());
        assert!(SolverParams::new(2.0, 1.0).is_ok());
    }
}
