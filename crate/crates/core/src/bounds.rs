//! Sharp operator-norm bounds under the double constraint `‖F‖_∞ ≤ A`, `‖F‖_p ≤ B`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constraints::{alpha, g_gabor, g_wavelet, kappa, sigma, ConstraintSet, Kernel, Transform};
use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, adaptive_pieces, factorial};
use crate::rearrange::DistributionFunction;
use crate::weights::{ProfileKind, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `p = 1`: indicator of a ball.
    Ball,
    /// `(B/A)^p` at or below the threshold: a Gaussian that never reaches `A`.
    Gaussian,
    /// Above the threshold: a Gaussian capped at `A`.
    Truncated,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Ball => "ball",
            Regime::Gaussian => "gaussian",
            Regime::Truncated => "truncated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub regime: Regime,
    pub bound: f64,
    pub lambda: Option<f64>,
    /// `(B/A)^p`.
    pub critical_ratio: f64,
    /// The value `critical_ratio` is compared against.
    pub threshold: f64,
    pub inputs: ConstraintSet,
}

/// `G(s)` for the Gaussian window in dimension `d`.
pub fn g(s: f64, d: u32) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(domain(format!("G(s) needs s >= 0, got {s}")));
    }
    if d == 0 {
        return Err(domain("dimension d must be >= 1"));
    }
    Ok(g_gabor(s, d))
}

/// `G_β(s) = 1 − (1 + s/4π)^{−2β}`.
pub fn g_beta(s: f64, beta: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(domain(format!("G_beta(s) needs s >= 0, got {s}")));
    }
    if !(beta > 0.0) {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    Ok(g_wavelet(s, beta))
}

pub fn classify(c: &ConstraintSet) -> Regime {
    if c.p == 1.0 {
        Regime::Ball
    } else if c.critical_ratio() <= c.threshold() {
        Regime::Gaussian
    } else {
        Regime::Truncated
    }
}

pub fn bound(c: &ConstraintSet) -> Result<BoundReport> {
    match c.transform {
        Transform::Gabor { .. } => gabor_bound(c),
        Transform::Wavelet { .. } => wavelet_bound(c),
    }
}

pub fn gabor_bound(c: &ConstraintSet) -> Result<BoundReport> {
    let Transform::Gabor { d } = c.transform else {
        return Err(Error::ContractViolation("gabor_bound needs a Gabor constraint set".into()));
    };
    let (p, a, b) = (c.p, c.a, c.b);
    let regime = classify(c);
    let (bound, lambda) = match regime {
        Regime::Ball => (a * g_gabor(b / a, d), None),
        Regime::Gaussian => (
            gabor_gaussian_bound(p, b, d),
            Some(b * kappa(p).powf(-(d as f64) / p)),
        ),
        Regime::Truncated if d == 1 => {
            let (bound, lambda) = gabor_truncated_closed_form(p, a, b);
            (bound, Some(lambda))
        }
        Regime::Truncated => {
            let lambda = lambda_root(c)?;
            (gabor_truncated_bound(p, a, d, lambda), Some(lambda))
        }
    };
    Ok(BoundReport {
        regime,
        bound,
        lambda,
        critical_ratio: c.critical_ratio(),
        threshold: c.threshold(),
        inputs: *c,
    })
}

/// `κ_p^{dκ_p} B`, the bound when the sup constraint is inactive.
pub fn gabor_gaussian_bound(p: f64, b: f64, d: u32) -> f64 {
    let k = kappa(p);
    k.powf(d as f64 * k) * b
}

/// The `d = 1` supercritical bound and its `λ`, both explicit.
pub fn gabor_truncated_closed_form(p: f64, a: f64, b: f64) -> (f64, f64) {
    let r = (b / a).powf(p);
    let lambda = a * (r / (p - 1.0) - 1.0 / p).exp();
    let bound = a * (1.0 - (kappa(p) - r).exp() / p);
    (bound, lambda)
}

/// `u_λ(t) = (−log (t/λ)^{p−1})^d / d!`, zero for `t ≥ λ`.
pub fn gabor_u(t: f64, lambda: f64, p: f64, d: u32) -> f64 {
    if t >= lambda {
        return 0.0;
    }
    if t <= 0.0 {
        return f64::INFINITY;
    }
    ((p - 1.0) * (lambda / t).ln()).powi(d as i32) / factorial(d as usize)
}

/// `∫_0^A G(u_λ(t)) dt` by adaptive quadrature.
pub fn gabor_truncated_bound(p: f64, a: f64, d: u32, lambda: f64) -> f64 {
    adaptive(|t| g_gabor(gabor_u(t, lambda, p, d), d), 0.0, a, 1e-13 * a)
}

/// `h(λ) = p ∫_0^A t^{p−1} u_λ(t) dt`, in closed form.
///
/// For `λ ≥ A`, `t = Aτ` and `s = −ln τ` give
/// `h = A^p (p−1)^d/d! · Σ_j C(d, j) c^{d−j} j!/p^j` with `c = ln(λ/A)`;
/// for `λ < A` it is `λ^p κ^d`.
pub fn gabor_constraint_moment(p: f64, a: f64, d: u32, lambda: f64) -> f64 {
    if lambda <= a {
        return lambda.powf(p) * kappa(p).powi(d as i32);
    }
    let c = (lambda / a).ln();
    let mut sum = 0.0;
    // C(d, j) j! = d!/(d−j)!
    let mut falling = 1.0;
    for j in 0..=d {
        if j > 0 {
            falling *= (d - j + 1) as f64;
        }
        sum += falling * c.powi((d - j) as i32) / p.powi(j as i32);
    }
    a.powf(p) * (p - 1.0).powi(d as i32) / factorial(d as usize) * sum
}

/// Wavelet analogue of [`gabor_u`]: `4π max((t/λ)^{−α} − 1, 0)`.
pub fn wavelet_u(t: f64, lambda: f64, p: f64, beta: f64) -> f64 {
    if t >= lambda {
        return 0.0;
    }
    if t <= 0.0 {
        return f64::INFINITY;
    }
    4.0 * PI * ((t / lambda).powf(-alpha(p, beta)) - 1.0)
}

/// `h(λ) = 4π p ∫_0^{min(A,λ)} t^{p−1} ((t/λ)^{−α} − 1) dt`, in closed form.
pub fn wavelet_constraint_moment(p: f64, a: f64, beta: f64, lambda: f64) -> f64 {
    let al = alpha(p, beta);
    let m = a.min(lambda);
    4.0 * PI * (p * lambda.powf(al) * m.powf(p - al) / (p - al) - m.powf(p))
}

/// Solves `h(λ) = B^p` for `λ ≥ A` by bisection.
///
/// Defined on and above the regime threshold; the threshold itself returns `λ = A`.
pub fn lambda_root(c: &ConstraintSet) -> Result<f64> {
    if c.p == 1.0 || c.a.is_infinite() {
        return Err(Error::ContractViolation(
            "lambda_root needs p > 1 and a finite A".into(),
        ));
    }
    let ratio = c.critical_ratio();
    let threshold = c.threshold();
    if ratio < threshold * (1.0 - 1e-14) {
        return Err(Error::ContractViolation(format!(
            "lambda_root called outside the truncated regime: (B/A)^p = {ratio} < {threshold}"
        )));
    }
    let (p, a) = (c.p, c.a);
    let target = c.b.powf(p);
    let h = |lambda: f64| match c.transform {
        Transform::Gabor { d } => gabor_constraint_moment(p, a, d, lambda),
        Transform::Wavelet { beta } => wavelet_constraint_moment(p, a, beta, lambda),
    };
    if ratio <= threshold {
        return Ok(a);
    }
    // h grows like a power of ln λ, so bracket and bisect in ln λ
    let mut lo = a.ln();
    let mut step = 1.0;
    let mut hi = lo + step;
    while h(hi.exp()) < target {
        lo = hi;
        step *= 2.0;
        hi += step;
        if !hi.exp().is_finite() {
            return Err(Error::NoConvergence(format!("lambda exceeds the f64 range for {c}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = (0.5 * (lo + hi)).exp();
    let residual = (h(lambda) - target).abs() / target;
    if residual < 1e-12 {
        Ok(lambda)
    } else {
        Err(Error::NoConvergence(format!(
            "lambda bisection stalled with relative residual {residual:.3e}"
        )))
    }
}

pub fn wavelet_bound(c: &ConstraintSet) -> Result<BoundReport> {
    let Transform::Wavelet { beta } = c.transform else {
        return Err(Error::ContractViolation("wavelet_bound needs a wavelet constraint set".into()));
    };
    let (p, a, b) = (c.p, c.a, c.b);
    let regime = classify(c);
    let (bound, lambda) = match regime {
        Regime::Ball => (a * g_wavelet(b / a, beta), None),
        Regime::Gaussian => (
            wavelet_gaussian_bound(p, b, beta),
            Some(b * (4.0 * PI * sigma(p, beta)).powf(-1.0 / p)),
        ),
        Regime::Truncated => {
            let (bound, lambda) = wavelet_truncated_closed_form(p, a, b, beta);
            (bound, Some(lambda))
        }
    };
    Ok(BoundReport {
        regime,
        bound,
        lambda,
        critical_ratio: c.critical_ratio(),
        threshold: c.threshold(),
        inputs: *c,
    })
}

/// `2β (4π)^{−1/p} σ^{κ_p} B`.
pub fn wavelet_gaussian_bound(p: f64, b: f64, beta: f64) -> f64 {
    2.0 * beta * (4.0 * PI).powf(-1.0 / p) * sigma(p, beta).powf(kappa(p)) * b
}

/// Supercritical wavelet bound and `λ`, both explicit.
pub fn wavelet_truncated_closed_form(p: f64, a: f64, b: f64, beta: f64) -> (f64, f64) {
    let s = sigma(p, beta);
    let al = alpha(p, beta);
    let r = (b / a).powf(p);
    let bound = a
        * (1.0
            - p.powf(2.0 * beta)
                * (s / al).powf(2.0 * beta + 1.0)
                * (1.0 + r / (4.0 * PI)).powf(-2.0 * beta));
    let ap = a.powf(p);
    let lambda = a * (4.0 * PI * ap * p * s / (al * (b.powf(p) + 4.0 * PI * ap))).powf(-1.0 / al);
    (bound, lambda)
}

/// `∫_0^∞ G(μ(t)) dt` for a step distribution function.
pub fn distribution_bound(mu: &DistributionFunction, kernel: Kernel) -> f64 {
    mu.integrate(|s| kernel.g(s))
}

/// `∫_0^∞ G(μ(t)) dt` for a radial profile, with `μ` in closed form.
pub fn profile_distribution_bound(profile: &RadialProfile, kernel: Kernel) -> Result<f64> {
    if let ProfileKind::Constant { .. } = profile.kind {
        return Err(Error::Divergent("constant profile has infinite level sets".into()));
    }
    let sup = profile.sup_norm();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let mut points: Vec<f64> = vec![0.0];
    match &profile.kind {
        ProfileKind::TruncatedGaussian { cap, .. } => points.push(*cap),
        ProfileKind::Sampled { values, .. } => points.extend(values.iter().copied()),
        _ => {}
    }
    points.push(sup);
    points.retain(|t| *t <= sup);
    points.sort_by(|x, y| x.total_cmp(y));
    points.dedup();
    Ok(adaptive_pieces(|t| kernel.g(profile.level_mass(t)), &points, 1e-13 * sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_moments_match_quadrature() {
        for (p, a, lambda) in [(2.0f64, 1.0f64, 3.0f64), (3.5, 0.7, 0.5), (1.3, 2.0, 40.0)] {
            let upper = a.min(lambda);
            for d in 1..=4 {
                let quad = adaptive(|t| p * t.powf(p - 1.0) * gabor_u(t, lambda, p, d), 0.0, upper, 1e-14);
                assert_abs_diff_eq!(gabor_constraint_moment(p, a, d, lambda), quad, epsilon = 1e-11 * quad.max(1.0));
            }
            for beta in [0.5, 2.0] {
                let quad = adaptive(|t| p * t.powf(p - 1.0) * wavelet_u(t, lambda, p, beta), 0.0, upper, 1e-14);
                assert_abs_diff_eq!(wavelet_constraint_moment(p, a, beta, lambda), quad, epsilon = 1e-9 * quad.max(1.0));
            }
        }
    }

    fn gabor(p: f64, a: f64, b: f64, d: u32) -> BoundReport {
        gabor_bound(&ConstraintSet::gabor(p, a, b, d).unwrap()).unwrap()
    }

    #[test]
    fn g_values() {
        assert_eq!(g(0.0, 3).unwrap(), 0.0);
        assert_abs_diff_eq!(g(1.0, 1).unwrap(), 1.0 - (-1f64).exp(), epsilon = 1e-15);
        let quad = adaptive(|t| (-(2.0 * t).sqrt()).exp(), 0.0, 2.0, 1e-15);
        assert_abs_diff_eq!(g(2.0, 2).unwrap(), quad, epsilon = 1e-12);
        assert!(g(-1.0, 1).is_err());
        assert_abs_diff_eq!(g_beta(1.0, 1.0).unwrap(), 0.14199, epsilon = 5e-6);
        assert!(g_beta(1.0, -1.0).is_err());
    }

    #[test]
    fn three_gabor_regimes_d1() {
        let r = gabor(1.0, 1.0, 1.0, 1);
        assert_eq!(r.regime, Regime::Ball);
        assert_abs_diff_eq!(r.bound, 0.632_120_558_828_557_7, epsilon = 1e-15);

        let r = gabor(2.0, f64::INFINITY, 1.0, 1);
        assert_eq!(r.regime, Regime::Gaussian);
        assert_abs_diff_eq!(r.bound, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.lambda.unwrap(), 2f64.sqrt(), epsilon = 1e-15);

        let r = gabor(2.0, 1.0, 1.0, 1);
        assert_eq!(r.regime, Regime::Truncated);
        assert_abs_diff_eq!(r.lambda.unwrap(), 0.5f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 1.0 - (-0.5f64).exp() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn d1_closed_form_matches_general_path() {
        for &(p, a, b) in &[(2.0, 1.0, 1.0), (1.5, 0.7, 2.0), (4.0, 2.0, 3.0)] {
            let c = ConstraintSet::gabor(p, a, b, 1).unwrap();
            let (bound, lambda) = gabor_truncated_closed_form(p, a, b);
            let root = lambda_root(&c).unwrap();
            assert_abs_diff_eq!(root, lambda, epsilon = 1e-12 * lambda);
            assert_abs_diff_eq!(gabor_truncated_bound(p, a, 1, root), bound, epsilon = 1e-10);
        }
    }

    #[test]
    fn d2_root_matches_hand_solution() {
        let c = ConstraintSet::gabor(2.0, 1.0, 1.0, 2).unwrap();
        let lambda = lambda_root(&c).unwrap();
        let l = (7f64.sqrt() - 1.0) / 2.0;
        assert_abs_diff_eq!(lambda, l.exp(), epsilon = 1e-10);
        let r = gabor_bound(&c).unwrap();
        assert_abs_diff_eq!(r.bound, 1.0 - (0.75 + l / 2.0) / l.exp(), epsilon = 1e-11);
    }

    #[test]
    fn lambda_root_at_the_threshold_is_a() {
        let p: f64 = 3.0;
        let b = kappa(p).powf(1.0 / p);
        let c = ConstraintSet::gabor(p, 1.0, b, 1).unwrap();
        assert_abs_diff_eq!(lambda_root(&c).unwrap(), 1.0, epsilon = 1e-12);
        let sub = ConstraintSet::gabor(2.0, f64::INFINITY, 1.0, 1).unwrap();
        assert!(matches!(lambda_root(&sub), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn wavelet_regimes() {
        let c = ConstraintSet::wavelet(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = wavelet_bound(&c).unwrap();
        assert_eq!(r.regime, Regime::Ball);
        assert_abs_diff_eq!(r.bound, 0.14199, epsilon = 5e-6);

        let c = ConstraintSet::wavelet(2.0, f64::INFINITY, 1.0, 1.0).unwrap();
        let r = wavelet_bound(&c).unwrap();
        assert_eq!(r.regime, Regime::Gaussian);
        assert_abs_diff_eq!(r.bound, 2.0 / (4.0 * PI).sqrt() * 0.2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 0.2523, epsilon = 5e-5);
    }

    #[test]
    fn wavelet_lambda_matches_bisection() {
        let c = ConstraintSet::wavelet(2.0, 1.0, 2.0, 1.0).unwrap();
        let r = wavelet_bound(&c).unwrap();
        assert_eq!(r.regime, Regime::Truncated);
        let root = lambda_root(&c).unwrap();
        assert_abs_diff_eq!(root, r.lambda.unwrap(), epsilon = 1e-10 * root);
    }

    #[test]
    fn profile_distribution_bound_is_saturated_by_extremals() {
        let gauss = RadialProfile::gaussian(2f64.sqrt(), 1.0).unwrap();
        let v = profile_distribution_bound(&gauss, Kernel::Gabor { d: 1 }).unwrap();
        assert_abs_diff_eq!(v, 0.5f64.sqrt(), epsilon = 1e-10);
        let trunc = RadialProfile::truncated_gaussian(0.5f64.exp(), 1.0, 1.0).unwrap();
        let v = profile_distribution_bound(&trunc, Kernel::Gabor { d: 1 }).unwrap();
        assert_abs_diff_eq!(v, 1.0 - (-0.5f64).exp() / 2.0, epsilon = 1e-10);
    }
}
