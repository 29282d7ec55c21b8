//! Extremal weights and the signals that saturate them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bounds::{self, gabor_truncated_closed_form, Regime};
use crate::constraints::{kappa, ConstraintSet, Transform};
use crate::error::{domain, invalid, Error, Result};
use crate::gabor::{window, Signal};
use crate::wavelet::{cauchy_hat, frequency_rule, DiscKind, DiscProfile, HardySignal};
use crate::weights::{ProfileKind, RadialProfile};

/// The extremal Gabor weight centered at `z0 = (x0, ω0)`, phase `θ = 0`.
///
/// Only `d = 1` has a planar profile; higher dimensions return a domain error.
pub fn extremal_weight_gabor(c: &ConstraintSet, z0: (f64, f64)) -> Result<RadialProfile> {
    let Transform::Gabor { d } = c.transform else {
        return Err(Error::ContractViolation("extremal_weight_gabor needs a Gabor constraint set".into()));
    };
    if d != 1 {
        return Err(domain(format!("extremal weights are materialized on the plane only (d = 1), got d = {d}")));
    }
    let (p, a, b) = (c.p, c.a, c.b);
    let kind = match bounds::classify(c) {
        Regime::Ball => ProfileKind::BallIndicator { amplitude: a, area: b / a },
        Regime::Gaussian => ProfileKind::Gaussian {
            amplitude: b * kappa(p).powf(-1.0 / p),
            decay: 1.0 / (p - 1.0),
        },
        Regime::Truncated => {
            let (_, lambda) = gabor_truncated_closed_form(p, a, b);
            ProfileKind::TruncatedGaussian { amplitude: lambda, decay: 1.0 / (p - 1.0), cap: a }
        }
    };
    RadialProfile::centered_at(kind, z0)
}

/// Radius where a truncated Gaussian extremal stops being capped: `λ e^{−π r₀²/(p−1)} = A`.
pub fn truncation_radius(profile: &RadialProfile) -> Option<f64> {
    match profile.kind {
        ProfileKind::TruncatedGaussian { amplitude, decay, cap } if amplitude > cap => {
            Some(((amplitude / cap).ln() / (decay * PI)).sqrt())
        }
        _ => None,
    }
}

/// The extremal wavelet weight centered at `z0 = x0 + i y0`, as a profile in the disc variable.
pub fn extremal_weight_wavelet(c: &ConstraintSet, z0: (f64, f64)) -> Result<DiscProfile> {
    let Transform::Wavelet { .. } = c.transform else {
        return Err(Error::ContractViolation("extremal_weight_wavelet needs a wavelet constraint set".into()));
    };
    let (a, b) = (c.a, c.b);
    let report = bounds::wavelet_bound(c)?;
    let kind = match report.regime {
        Regime::Ball => DiscKind::Indicator { amplitude: a, measure: b / a },
        regime => {
            let alpha = c.alpha().expect("wavelet");
            let lambda = report.lambda.expect("lambda for p > 1");
            let exponent = 1.0 / alpha;
            if regime == Regime::Gaussian {
                DiscKind::Power { lambda, exponent }
            } else {
                DiscKind::TruncatedPower { lambda, exponent, cap: a }
            }
        }
    };
    DiscProfile::centered_at(kind, z0)
}

/// `e^{iθ} e^{2πitω₀} φ(t − x₀)`, sampled on a grid fine enough for `ω₀`.
pub fn extremal_signal(x0: f64, omega0: f64, theta: f64) -> Result<Signal> {
    if !x0.is_finite() || !omega0.is_finite() || !theta.is_finite() {
        return Err(invalid("signal center and phase must be finite"));
    }
    let half_width = x0.abs() + 7.0;
    // φ̂ is below 1e-30 past |ω − ω₀| = 4.7; keep the Nyquist frequency well above that
    let nyquist = omega0.abs() + 8.0;
    let n = (4.0 * half_width * nyquist).ceil() as usize + 1;
    let c = Complex64::from_polar(1.0, theta);
    Signal::from_fn(half_width, n, |t| c * Complex64::from_polar(window(t - x0), 2.0 * PI * t * omega0))
}

/// `c ψ_β` translated to `x₀` and dilated by `y₀`, with `|c|² = 2π/β` so that `‖f‖ = 1`.
///
/// The spectrum lives on the frequency rule rescaled by `1/y₀`, so the norm is
/// exact to quadrature precision for every dilation.
pub fn extremal_signal_wavelet(x0: f64, y0: f64, theta: f64, beta: f64) -> Result<HardySignal> {
    if !(y0 > 0.0) || !y0.is_finite() {
        return Err(domain(format!("y0 must be positive, got {y0}")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    if !x0.is_finite() || !theta.is_finite() {
        return Err(invalid("signal center and phase must be finite"));
    }
    let c = Complex64::from_polar((2.0 * PI / beta).sqrt(), theta);
    let (nodes, weights) = frequency_rule();
    let nodes: Vec<f64> = nodes.into_iter().map(|w| w / y0).collect();
    let weights: Vec<f64> = weights.into_iter().map(|w| w / y0).collect();
    let values = nodes
        .iter()
        .map(|&w| c * y0.sqrt() * cauchy_hat(beta, y0 * w) * Complex64::from_polar(1.0, -w * x0))
        .collect();
    Ok(HardySignal::Spectrum { nodes, weights, values })
}
