//! Closed forms and brute-force computations checked against the library.

use std::f64::consts::PI;

use degenrad::profile::{BallDomain, RadialDatum};
use degenrad::rearrangement::{decreasing_rearrangement, rearrangement_oracle, LorentzNorm};
use degenrad::regularity::{
    alpha_hat, alpha_of_beta, beta_hat, critical_q_gradient, critical_q_hessian, critical_r_hp2,
    q_hat,
};
use degenrad::solver::{RadialSolution, SolverParams};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn solve(datum: &RadialDatum, dim: usize, radius: f64, p: f64, eps: f64) -> RadialSolution {
    let dom = BallDomain::new(dim, radius).unwrap();
    RadialSolution::new(datum, &dom, SolverParams::new(p, eps).unwrap()).unwrap()
}

/// Plain midpoint rule, deliberately unrelated to the adaptive quadrature.
fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Root of a monotone function by bisection.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn constant_datum_solution_in_closed_form() {
    // m = c r / N, g = 1 + c r / N, u = (R - r) + c (R^2 - r^2) / (2N).
    let (c, n, radius) = (3.0, 3usize, 2.0);
    let sol = solve(&RadialDatum::constant(c), n, radius, 2.0, 0.0);
    let nf = n as f64;
    for k in 0..=20 {
        let r = radius * k as f64 / 20.0;
        let u = (radius - r) + c * (radius * radius - r * r) / (2.0 * nf);
        assert!(close(sol.value(r).unwrap(), u, 1e-12), "u({r})");
        if r > 0.0 {
            assert!(close(sol.flux_profile(r).unwrap(), c * r / nf, 1e-13));
            assert!(close(sol.grad_magnitude(r).unwrap(), 1.0 + c * r / nf, 1e-13));
        }
    }
}

#[test]
fn power_law_flux_and_gradient_in_closed_form() {
    // mass(C r^N) = A N C r^(N - b) / (N - b), so m = A r^(1 - b) / (N - b).
    let (a, b, n, p) = (1.5, 0.7, 3usize, 3.0);
    let sol = solve(&RadialDatum::power_law(a, b), n, 1.0, p, 0.0);
    for k in 1..=25 {
        let r = k as f64 / 25.0;
        let m = a * r.powf(1.0 - b) / (n as f64 - b);
        assert!(close(sol.flux_profile(r).unwrap(), m, 1e-10), "m({r})");
        assert!(close(sol.grad_magnitude(r).unwrap(), 1.0 + m.sqrt(), 1e-10));
    }
    // u(r) against a fine midpoint rule on the closed-form gradient.
    let g = |r: f64| 1.0 + (a * r.powf(1.0 - b) / (n as f64 - b)).sqrt();
    for r in [0.1, 0.4, 0.8] {
        let u = midpoint(g, r, 1.0, 200_000);
        assert!(close(sol.value(r).unwrap(), u, 1e-9), "u({r})");
    }
}

#[test]
fn hessian_matches_finite_differences_of_the_gradient() {
    let cases = [
        (RadialDatum::power_law(1.0, 0.5), 2usize, 2.0),
        (RadialDatum::truncated_power(2.0, 1.2, 0.6), 3, 3.0),
        (RadialDatum::step(vec![(0.3, 4.0), (0.7, 1.0)]), 3, 1.5),
    ];
    for (datum, n, p) in cases {
        let sol = solve(&datum, n, 1.0, p, 0.0);
        for r in [0.15, 0.45, 0.85] {
            let h = 1e-5;
            let fd = (sol.grad_magnitude(r + h).unwrap() - sol.grad_magnitude(r - h).unwrap()) / (2.0 * h);
            let hs = sol.hessian(r).unwrap();
            assert!(close(hs.radial, -fd, 1e-6), "{datum:?} r={r}: {} vs {fd}", hs.radial);
            let tan = sol.grad_magnitude(r).unwrap() / r;
            assert!(close(hs.tangential.abs(), tan, 1e-12));
        }
    }
}

#[test]
fn lorentz_norm_of_a_power_law() {
    // f*(s) = A (s/C)^(-b/N) and f**(t) = f*(t) / (1 - b/N); at r = N/b the
    // weighted maximal function is the constant A C^(b/N) N / (N - b).
    let (a, b, n) = (2.0, 1.2, 3usize);
    let dom = BallDomain::new(n, 1.0).unwrap();
    let re = decreasing_rearrangement(&RadialDatum::power_law(a, b), &dom).unwrap();
    let nf = n as f64;
    let c = dom.unit_volume();
    let expected = a * c.powf(b / nf) * nf / (nf - b);
    match re.lorentz_quasinorm(nf / b).unwrap() {
        LorentzNorm::Finite(v) => assert!(close(v, expected, 1e-9), "{v} vs {expected}"),
        LorentzNorm::Divergent => panic!("critical index reported divergent"),
    }
    assert_eq!(re.lorentz_quasinorm(1.1 * nf / b).unwrap(), LorentzNorm::Divergent);
}

#[test]
fn lorentz_norm_by_brute_force_scan() {
    let dom = BallDomain::new(2, 1.0).unwrap();
    let data = [
        RadialDatum::step(vec![(0.2, 5.0), (0.5, 2.0), (1.0, 0.5)]),
        RadialDatum::truncated_power(1.0, 0.8, 0.3),
        RadialDatum::constant(2.0),
    ];
    for datum in data {
        let re = decreasing_rearrangement(&datum, &dom).unwrap();
        for r in [1.2, 1.5, 2.0] {
            // f**(t) from the closed-form profile by midpoint quadrature in radius.
            let fss = |t: f64| {
                let rho = dom.radius_of_measure(t);
                midpoint(|s| datum.profile(s) * 2.0 * PI * s, 0.0, rho, 20_000) / t
            };
            // The sup of a step profile sits at a jump, so the jump measures join the grid.
            let jumps = datum.breakpoints().into_iter().map(|b| dom.ball_measure(b));
            let scan = (0..=400)
                .map(|k| dom.measure() * 10f64.powf(-4.0 * k as f64 / 400.0))
                .chain(jumps)
                .map(|t| t.powf(1.0 / r) * fss(t))
                .fold(0.0, f64::max);
            let v = re.lorentz_quasinorm(r).unwrap().value().unwrap();
            assert!(v >= scan * (1.0 - 1e-6), "{datum:?} r={r}: {v} < {scan}");
            assert!(close(v, scan, 1e-3), "{datum:?} r={r}: {v} vs {scan}");
        }
    }
}

#[test]
fn mass_matches_the_shell_oracle() {
    let dom = BallDomain::new(3, 1.0).unwrap();
    let datum = RadialDatum::step(vec![(0.4, 3.0), (0.9, 1.0)]);
    let re = decreasing_rearrangement(&datum, &dom).unwrap();
    let oracle = rearrangement_oracle(&datum, &dom, 100_000);
    for frac in [0.01, 0.05, 0.2, 0.5, 0.9, 1.0] {
        let t = frac * dom.measure();
        let brute = midpoint(|s| oracle.fstar(s), 0.0, t, 100_000);
        assert!(close(re.mass(t).unwrap(), brute, 1e-3), "mass({t})");
    }
}

#[test]
fn regularized_energy_for_constant_datum() {
    // N = 2, f = 2, p = 2: m = r and g = r/eps for r <= eps, (1 + r)/(1 + eps) beyond.
    for eps in [0.05, 0.2, 0.5] {
        let sol = solve(&RadialDatum::constant(2.0), 2, 1.0, 2.0, eps);
        let outer = (0.5 + 2.0 / 3.0 + 0.25)
            - (eps * eps / 2.0 + 2.0 * eps.powi(3) / 3.0 + eps.powi(4) / 4.0);
        let energy = 2.0 * PI * (eps * eps / 4.0 + outer / (1.0 + eps).powi(2));
        let got = sol.gradient_energy().unwrap();
        // The kink at r = eps is not a quadrature break, so only the relative tolerance applies.
        assert!(close(got, energy, 1e-8), "eps={eps}: {got} vs {energy}");
    }
}

#[test]
fn critical_exponents_from_the_small_radius_behaviour() {
    // For f0 ~ r^-b the gradient behaves like r^((1-b)/(p-1)) and its radial
    // derivative one power lower; L^q integrability in N dimensions needs
    // q * exponent + N > 0.
    for (n, p, b) in [(2usize, 2.0, 1.8), (3, 3.0, 1.5), (4, 1.5, 2.5), (5, 2.5, 3.0)] {
        let nf = n as f64;
        let e_grad = (1.0 - b) / (p - 1.0);
        let e_hess = e_grad - 1.0;
        let r = nf / b;

        let q_grad = bisect(|q| q * e_grad + nf, 1.0, 1e6);
        assert!(close(critical_q_gradient(n, r, p).unwrap(), q_grad, 1e-9));

        let q_hess = bisect(|q| q * e_hess + nf, 1e-3, 1e6);
        assert!(close(critical_q_hessian(n, r, p).unwrap(), q_hess, 1e-9));
        assert!(close(q_hat(n, p, b), q_hess, 1e-9));
    }
}

#[test]
fn energy_threshold_from_the_small_radius_behaviour() {
    // |D H_{p/2}(grad u)|^2 ~ r^(p e - 2) with e = (1-b)/(p-1).
    for (n, p) in [(2usize, 2.0), (3, 2.0), (3, 3.0), (5, 4.0)] {
        let nf = n as f64;
        let b = bisect(|b| p * (1.0 - b) / (p - 1.0) - 2.0 + nf, 1e-6, nf - 1e-6);
        assert!(close(beta_hat(n, p), b, 1e-9), "N={n} p={p}");
        assert!(close(critical_r_hp2(n, p).unwrap(), nf / b, 1e-9));
        // The gradient exponent at the threshold equals alpha_hat + 1.
        let e = (1.0 - b) / (p - 1.0);
        assert!(close(alpha_hat(n, p), -e - 1.0, 1e-9));
        assert!(close(alpha_of_beta(b, p), alpha_hat(n, p), 1e-9));
    }
}
