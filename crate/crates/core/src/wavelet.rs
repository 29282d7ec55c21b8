//! Cauchy-wavelet transform on the upper half-plane and wavelet localization operators.
//!
//! Frequencies use the unitary transform `f̂(ω) = (2π)^{−1/2} ∫ e^{−iωt} f(t) dt`,
//! so that `W f(x, y) = √y ∫_0^∞ f̂(ω) conj(ψ̂(yω)) e^{ixω} dω` with
//! `ψ̂_β(ω) = ω^β e^{−ω} / c_β`.
//!
//! Operators are expanded in the orthonormal Laguerre basis of `H²`,
//! `ℓ_k(ω) = N_k ω^β e^{−ω} L_k^{(2β)}(2ω)`, whose transforms are monomials in
//! the disc variable `w = (z − i)/(z + i)`:
//! `W ℓ_k(z) = a_k y^{β+1/2} (1 − iz)^{−2β−1} w^k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::g_wavelet;
use crate::error::{domain, invalid, Error, Result};
use crate::gabor::{touches_boundary, OperatorSpectrum};
use crate::quad::{beta_p, gamma, ln_beta, ln_factorial, ln_gamma, GaussLegendre};
use crate::rearrange::{geometric_thresholds, steps_to_knots, DistributionFunction, Weight};
use crate::weights::{Grid, Measure, WeightField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `c_β² = 2π 2^{−2β} Γ(2β)`.
pub fn c_beta(beta: f64) -> f64 {
    (2.0 * PI * 2f64.powf(-2.0 * beta) * gamma(2.0 * beta)).sqrt()
}

/// `ψ̂_β(ω)`, zero for `ω ≤ 0`.
pub fn cauchy_hat(beta: f64, omega: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    (beta * omega.ln() - omega).exp() / c_beta(beta)
}

/// Cayley map `w = (z − i)/(z + i)` from the half-plane to the unit disc.
pub fn cayley(z: Complex64) -> Complex64 {
    (z - I) / (z + I)
}

pub fn inverse_cayley(w: Complex64) -> Complex64 {
    I * (1.0 + w) / (1.0 - w)
}

/// `|(z − z₀)/(z − conj z₀)|²`, the squared pseudo-hyperbolic distance.
pub fn pseudo_distance_sq(z: Complex64, z0: Complex64) -> f64 {
    ((z - z0) / (z - z0.conj())).norm_sqr()
}

/// The affine map `z ↦ x₀ + y₀ z` composed with the inverse Cayley map: sends `w = 0` to `z₀`.
pub fn disc_to_half_plane(w: Complex64, z0: Complex64) -> Complex64 {
    z0.re + z0.im * inverse_cayley(w)
}

/// `x = 1 − (1 + s/4π)^{−1}`: disc-model radius² of a hyperbolic disc of `ν`-measure `s`.
pub fn disc_radius_sq(s: f64) -> f64 {
    s / (4.0 * PI + s)
}

/// `ν` of `{x < x_s}`.
pub fn disc_measure(x_s: f64) -> f64 {
    if x_s >= 1.0 {
        f64::INFINITY
    } else {
        4.0 * PI * x_s / (1.0 - x_s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicDisc {
    pub center: (f64, f64),
    pub nu_measure: f64,
}

impl HyperbolicDisc {
    pub fn new(center: (f64, f64), nu_measure: f64) -> Result<Self> {
        if !(center.1 > 0.0) || !center.0.is_finite() || !center.1.is_finite() {
            return Err(domain("a hyperbolic disc needs a center with y > 0"));
        }
        if !(nu_measure >= 0.0) || !nu_measure.is_finite() {
            return Err(invalid("disc measure must be finite and nonnegative"));
        }
        Ok(Self { center, nu_measure })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let z0 = Complex64::new(self.center.0, self.center.1);
        pseudo_distance_sq(Complex64::new(x, y), z0) < disc_radius_sq(self.nu_measure)
    }
}

/// Indicator of the disc on the cell centers of a half-plane grid, with hyperbolic cell masses.
pub fn hyperbolic_disc_mask(disc: &HyperbolicDisc, grid: &Grid) -> Result<WeightField> {
    WeightField::from_real_fn(grid.clone(), Measure::Hyperbolic, |x, y| {
        if disc.contains(x, y) {
            1.0
        } else {
            0.0
        }
    })
}

/// Profiles in the disc variable `x = |(z − z₀)/(z − conj z₀)|² ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscKind {
    /// `amplitude · χ(x < x_s)` with `ν`-measure `measure`.
    Indicator { amplitude: f64, measure: f64 },
    /// `λ (1 − x)^{exponent}`.
    Power { lambda: f64, exponent: f64 },
    /// `min(λ (1 − x)^{exponent}, cap)`.
    TruncatedPower { lambda: f64, exponent: f64, cap: f64 },
    /// Left-continuous step: `values[i]` on `(xs[i−1], xs[i]]`, zero past the last knot.
    Sampled { xs: Vec<f64>, values: Vec<f64> },
    Constant { amplitude: f64 },
}

/// A `ν`-radial symbol on the half-plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscProfile {
    pub kind: DiscKind,
    pub center: (f64, f64),
}

impl DiscProfile {
    pub fn new(kind: DiscKind) -> Result<Self> {
        Self::centered_at(kind, (0.0, 1.0))
    }

    pub fn centered_at(kind: DiscKind, center: (f64, f64)) -> Result<Self> {
        if !(center.1 > 0.0) || !center.0.is_finite() || !center.1.is_finite() {
            return Err(domain("profile center must lie in the upper half-plane"));
        }
        let ok = match &kind {
            DiscKind::Indicator { amplitude, measure } => *amplitude >= 0.0 && *measure >= 0.0 && measure.is_finite(),
            DiscKind::Power { lambda, exponent } => *lambda >= 0.0 && *exponent > 0.0,
            DiscKind::TruncatedPower { lambda, exponent, cap } => *lambda >= 0.0 && *exponent > 0.0 && *cap > 0.0,
            DiscKind::Sampled { xs, values } => {
                xs.len() == values.len()
                    && !xs.is_empty()
                    && xs.windows(2).all(|w| w[1] > w[0])
                    && xs[0] > 0.0
                    && *xs.last().expect("nonempty") <= 1.0
                    && values.iter().all(|v| *v >= 0.0 && v.is_finite())
                    && values.windows(2).all(|w| w[1] <= w[0])
            }
            DiscKind::Constant { amplitude } => *amplitude >= 0.0 && amplitude.is_finite(),
        };
        if !ok {
            let what = match &kind {
                DiscKind::Sampled { xs, .. } => format!(
                    "sampled profile with {} knots (knots must increase within (0, 1], values be finite, nonnegative, nonincreasing)",
                    xs.len()
                ),
                other => format!("{other:?}"),
            };
            return Err(invalid(format!("invalid disc profile parameters: {what}")));
        }
        Ok(Self { kind, center })
    }

    pub fn indicator(amplitude: f64, measure: f64) -> Result<Self> {
        Self::new(DiscKind::Indicator { amplitude, measure })
    }

    pub fn power(lambda: f64, exponent: f64) -> Result<Self> {
        Self::new(DiscKind::Power { lambda, exponent })
    }

    pub fn truncated_power(lambda: f64, exponent: f64, cap: f64) -> Result<Self> {
        Self::new(DiscKind::TruncatedPower { lambda, exponent, cap })
    }

    pub fn with_center(mut self, center: (f64, f64)) -> Result<Self> {
        Self::centered_at(std::mem::replace(&mut self.kind, DiscKind::Constant { amplitude: 0.0 }), center)
    }

    /// Value at disc radius² `x`.
    pub fn value(&self, x: f64) -> f64 {
        if !(0.0..1.0).contains(&x) {
            return 0.0;
        }
        match &self.kind {
            DiscKind::Indicator { amplitude, measure } => {
                if x < disc_radius_sq(*measure) {
                    *amplitude
                } else {
                    0.0
                }
            }
            DiscKind::Power { lambda, exponent } => lambda * (1.0 - x).powf(*exponent),
            DiscKind::TruncatedPower { lambda, exponent, cap } => (lambda * (1.0 - x).powf(*exponent)).min(*cap),
            DiscKind::Sampled { xs, values } => {
                let idx = xs.partition_point(|&k| k < x);
                values.get(idx).copied().unwrap_or(0.0)
            }
            DiscKind::Constant { amplitude } => *amplitude,
        }
    }

    /// Value at a point of the half-plane.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let z0 = Complex64::new(self.center.0, self.center.1);
        self.value(pseudo_distance_sq(Complex64::new(x, y), z0))
    }

    /// Points in `x` where the profile jumps or has a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            DiscKind::Indicator { measure, .. } => vec![disc_radius_sq(*measure)],
            DiscKind::TruncatedPower { .. } => vec![self.truncation_x()],
            DiscKind::Sampled { xs, .. } => xs.clone(),
            _ => Vec::new(),
        }
    }

    /// For a truncated power, `x₀ = 1 − (cap/λ)^{1/exponent}` where the cap stops binding.
    fn truncation_x(&self) -> f64 {
        match &self.kind {
            DiscKind::TruncatedPower { lambda, exponent, cap } if lambda > cap => {
                1.0 - (cap / lambda).powf(1.0 / exponent)
            }
            _ => 0.0,
        }
    }

    /// `ν{ρ > t}`.
    pub fn level_mass(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            DiscKind::Indicator { amplitude, measure } => {
                if t < *amplitude {
                    *measure
                } else {
                    0.0
                }
            }
            DiscKind::Power { lambda, exponent } => power_level_mass(t, *lambda, *exponent),
            DiscKind::TruncatedPower { lambda, exponent, cap } => {
                if t >= *cap {
                    0.0
                } else {
                    power_level_mass(t, *lambda, *exponent)
                }
            }
            DiscKind::Sampled { xs, values } => {
                // the set {ρ > t} is {x < xs[j]} for the last j with values[j] > t
                let n = values.partition_point(|&v| v > t);
                if n == 0 {
                    0.0
                } else {
                    disc_measure(xs[n - 1])
                }
            }
            DiscKind::Constant { amplitude } => {
                if t < *amplitude {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            DiscKind::Indicator { amplitude, measure } => {
                if *measure > 0.0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            DiscKind::Power { lambda, .. } => *lambda,
            DiscKind::TruncatedPower { lambda, cap, .. } => lambda.min(*cap),
            DiscKind::Sampled { values, .. } => values[0],
            DiscKind::Constant { amplitude } => *amplitude,
        }
    }

    /// `‖ρ‖_{L^p(dν)}`, in closed form.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(domain("p must be a finite real >= 1"));
        }
        let pp = match &self.kind {
            DiscKind::Indicator { amplitude, measure } => amplitude.powf(p) * measure,
            DiscKind::Power { lambda, exponent } => {
                let e = p * exponent - 1.0;
                if e <= 0.0 {
                    return Err(Error::Divergent(format!("(1-x)^{exponent} is not in L^{p}(dν)")));
                }
                4.0 * PI * lambda.powf(p) / e
            }
            DiscKind::TruncatedPower { lambda, exponent, cap } => {
                let e = p * exponent - 1.0;
                if e <= 0.0 {
                    return Err(Error::Divergent(format!("(1-x)^{exponent} is not in L^{p}(dν)")));
                }
                let x0 = self.truncation_x();
                if x0 <= 0.0 {
                    4.0 * PI * lambda.powf(p) / e
                } else {
                    4.0 * PI * cap.powf(p) * x0 / (1.0 - x0) + 4.0 * PI * lambda.powf(p) * (1.0 - x0).powf(e) / e
                }
            }
            DiscKind::Sampled { xs, values } => {
                let mut prev = 0.0;
                let mut sum = 0.0;
                for (x, v) in xs.iter().zip(values) {
                    let m = disc_measure(*x);
                    // a zero step may reach x = 1, where the measure is infinite
                    if *v > 0.0 {
                        sum += v.powf(p) * (m - prev);
                    }
                    prev = m;
                }
                sum
            }
            DiscKind::Constant { amplitude } => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    return Err(Error::Divergent("a nonzero constant is not in L^p(dν)".into()));
                }
            }
        };
        Ok(pp.powf(1.0 / p))
    }
}

fn power_level_mass(t: f64, lambda: f64, exponent: f64) -> f64 {
    if t >= lambda {
        return 0.0;
    }
    if t <= 0.0 {
        return f64::INFINITY;
    }
    // λ(1 − x)^e > t  ⟺  x < 1 − (t/λ)^{1/e}
    4.0 * PI * ((t / lambda).powf(-1.0 / exponent) - 1.0)
}

impl Weight for DiscProfile {
    fn sup_norm(&self) -> f64 {
        DiscProfile::sup_norm(self)
    }

    fn lp_norm(&self, p: f64, measure: Measure) -> Result<f64> {
        if measure != Measure::Hyperbolic {
            return Err(domain("disc profiles are measured with the hyperbolic measure"));
        }
        DiscProfile::lp_norm(self, p)
    }

    fn distribution_function(&self, n_levels: usize) -> Result<DistributionFunction> {
        if n_levels < 2 {
            return Err(invalid("n_levels must be at least 2"));
        }
        let sup = self.sup_norm();
        if sup == 0.0 {
            return Ok(DistributionFunction::zero());
        }
        if matches!(self.kind, DiscKind::Constant { .. }) {
            return Err(Error::Divergent("constant weight has infinite level sets".into()));
        }
        let thresholds = geometric_thresholds(sup, n_levels);
        let masses = thresholds.iter().map(|&t| self.level_mass(t)).collect();
        DistributionFunction::new(thresholds, masses, sup)
    }
}

/// Hyperbolic rearrangement: the `ν`-radial nonincreasing symbol about `i`
/// with the same distribution function as `|w|`.
pub fn hyperbolic_symmetrize(w: &WeightField) -> Result<DiscProfile> {
    if w.measure() != Measure::Hyperbolic {
        return Err(domain("hyperbolic symmetrization needs a half-plane field"));
    }
    let steps = w.distribution_steps();
    if steps.is_zero() {
        return DiscProfile::new(DiscKind::Constant { amplitude: 0.0 });
    }
    let (xs, values) = steps_to_knots(&steps, disc_radius_sq);
    DiscProfile::new(DiscKind::Sampled { xs, values })
}

/// `λ_k = ∫_0^1 ρ(x) x^k (1 − x)^{2β−1} dx / B(k + 1, 2β)`, in basis order.
///
/// Every call first checks the normalization against the disc identity
/// `λ_0(χ_{x < x_s}) = G_β(s)`.
pub fn bergman_diagonal(profile: &DiscProfile, beta: f64, basis: usize) -> Result<Vec<f64>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    normalization_self_check(beta)?;
    if let DiscKind::Indicator { measure, .. } = profile.kind {
        // also pin the caller's own disc
        check_disc_identity(beta, measure)?;
    }
    let b2 = 2.0 * beta;
    let eig = |k: usize| -> f64 {
        let a = k as f64 + 1.0;
        match &profile.kind {
            DiscKind::Indicator { amplitude, measure } => amplitude * beta_p(a, b2, disc_radius_sq(*measure)),
            DiscKind::Power { lambda, exponent } => lambda * (ln_beta(a, b2 + exponent) - ln_beta(a, b2)).exp(),
            DiscKind::TruncatedPower { lambda, exponent, cap } => {
                let x0 = profile.truncation_x();
                let ratio = (ln_beta(a, b2 + exponent) - ln_beta(a, b2)).exp();
                if x0 <= 0.0 {
                    lambda * ratio
                } else {
                    cap * beta_p(a, b2, x0) + lambda * ratio * (1.0 - beta_p(a, b2 + exponent, x0))
                }
            }
            DiscKind::Sampled { xs, values } => {
                let mut prev = 0.0;
                let mut total = 0.0;
                for (x, v) in xs.iter().zip(values) {
                    let cur = beta_p(a, b2, *x);
                    total += v * (cur - prev);
                    prev = cur;
                }
                total
            }
            DiscKind::Constant { amplitude } => *amplitude,
        }
    };
    Ok((0..basis).map(eig).collect())
}

fn check_disc_identity(beta: f64, s: f64) -> Result<()> {
    let got = beta_p(1.0, 2.0 * beta, disc_radius_sq(s));
    let expected = g_wavelet(s, beta);
    if (got - expected).abs() > 1e-12 {
        return Err(Error::Normalization { got, expected });
    }
    Ok(())
}

fn normalization_self_check(beta: f64) -> Result<()> {
    check_disc_identity(beta, 1.0)
}

pub fn bergman_radial_eigenvalues(profile: &DiscProfile, beta: f64, basis: usize) -> Result<OperatorSpectrum> {
    let diag = bergman_diagonal(profile, beta, basis)?;
    let nonincreasing = diag.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let tail_bound = if nonincreasing { 0.0 } else { profile.sup_norm() };
    Ok(OperatorSpectrum::new(diag, basis, tail_bound))
}

/// A Hardy-space signal, by its spectrum on `(0, ∞)` or by Laguerre coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum HardySignal {
    /// `f̂` at the nodes of a positive-axis quadrature rule.
    Spectrum { nodes: Vec<f64>, weights: Vec<f64>, values: Vec<Complex64> },
    /// `f = Σ coeffs[k] ℓ_k`.
    Laguerre { beta: f64, coeffs: Vec<Complex64> },
}

/// Composite Gauss–Legendre rule on geometric panels over `[1e−10, 400]`.
pub fn frequency_rule() -> (Vec<f64>, Vec<f64>) {
    let n_panels = 64;
    let (lo, hi) = (1e-10f64.ln(), 400f64.ln());
    let mut edges = vec![0.0];
    edges.extend((0..=n_panels).map(|i| (lo + (hi - lo) * i as f64 / n_panels as f64).exp()));
    let rule = GaussLegendre::new(12);
    rule.composite(&edges).into_iter().unzip()
}

impl HardySignal {
    pub fn from_spectrum(f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let (nodes, weights) = frequency_rule();
        let values: Vec<Complex64> = nodes.iter().map(|&w| f(w)).collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("spectrum values must be finite"));
        }
        Ok(HardySignal::Spectrum { nodes, weights, values })
    }

    pub fn laguerre(beta: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(domain("beta must be positive"));
        }
        if coeffs.is_empty() {
            return Err(invalid("need at least one coefficient"));
        }
        Ok(HardySignal::Laguerre { beta, coeffs })
    }

    pub fn norm(&self) -> f64 {
        match self {
            HardySignal::Spectrum { weights, values, .. } => weights
                .iter()
                .zip(values)
                .map(|(w, v)| w * v.norm_sqr())
                .sum::<f64>()
                .sqrt(),
            HardySignal::Laguerre { coeffs, .. } => coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// `f̂(ω)`.
    pub fn spectrum_at(&self, omega: f64) -> Complex64 {
        match self {
            HardySignal::Laguerre { beta, coeffs } => laguerre_functions(*beta, coeffs.len(), omega)
                .into_iter()
                .zip(coeffs)
                .map(|(l, c)| c * l)
                .sum(),
            HardySignal::Spectrum { nodes, values, .. } => {
                // linear interpolation between nodes; the signal lives on the rule
                let idx = nodes.partition_point(|&w| w < omega);
                if idx == 0 || idx >= nodes.len() {
                    return Complex64::new(0.0, 0.0);
                }
                let (w0, w1) = (nodes[idx - 1], nodes[idx]);
                let t = (omega - w0) / (w1 - w0);
                values[idx - 1] * (1.0 - t) + values[idx] * t
            }
        }
    }

    /// Coefficients `⟨f, ℓ_k⟩`.
    pub fn laguerre_coefficients(&self, beta: f64, k_max: usize) -> Vec<Complex64> {
        match self {
            HardySignal::Laguerre { beta: b, coeffs } if *b == beta => {
                let mut c = coeffs.clone();
                c.resize(k_max, Complex64::new(0.0, 0.0));
                c
            }
            _ => {
                let (nodes, weights, values) = self.sampled();
                let mut acc = vec![Complex64::new(0.0, 0.0); k_max];
                for ((w, q), v) in nodes.iter().zip(&weights).zip(&values) {
                    for (a, l) in acc.iter_mut().zip(laguerre_functions(beta, k_max, *w)) {
                        *a += v * l * q;
                    }
                }
                acc
            }
        }
    }

    fn sampled(&self) -> (Vec<f64>, Vec<f64>, Vec<Complex64>) {
        match self {
            HardySignal::Spectrum { nodes, weights, values } => (nodes.clone(), weights.clone(), values.clone()),
            HardySignal::Laguerre { .. } => {
                let (nodes, weights) = frequency_rule();
                let values = nodes.iter().map(|&w| self.spectrum_at(w)).collect();
                (nodes, weights, values)
            }
        }
    }

    /// `W_{ψ_β} f(x, y)`.
    ///
    /// Sampled spectra resolve `e^{ixω}` only for moderate `|x|/y`; the Laguerre form is exact everywhere.
    pub fn transform_at(&self, beta: f64, x: f64, y: f64) -> Complex64 {
        match self {
            HardySignal::Laguerre { beta: b, coeffs } if *b == beta => {
                let v = laguerre_transforms(beta, coeffs.len(), x, y);
                coeffs.iter().zip(v).map(|(c, v)| c * v).sum()
            }
            _ => {
                let (nodes, weights, values) = self.sampled();
                let mut acc = Complex64::new(0.0, 0.0);
                for ((w, q), v) in nodes.iter().zip(&weights).zip(&values) {
                    let psi = cauchy_hat(beta, y * w);
                    if psi == 0.0 {
                        continue;
                    }
                    acc += v * Complex64::from_polar(psi * q, x * w);
                }
                acc * y.sqrt()
            }
        }
    }
}

/// `ψ̂_β` sampled on the frequency rule; `‖ψ_β‖² = β/2π`.
pub fn cauchy_wavelet(beta: f64) -> Result<HardySignal> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    HardySignal::from_spectrum(|w| Complex64::new(cauchy_hat(beta, w), 0.0))
}

/// `ℓ_0(ω), …, ℓ_{n−1}(ω)`.
pub fn laguerre_functions(beta: f64, n: usize, omega: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    if omega <= 0.0 {
        out.resize(n, 0.0);
        return out;
    }
    let a = 2.0 * beta;
    let t = 2.0 * omega;
    let envelope = beta * omega.ln() - omega;
    let (mut l_prev, mut l_cur) = (0.0, 1.0);
    for k in 0..n {
        if k == 1 {
            l_prev = 1.0;
            l_cur = 1.0 + a - t;
        } else if k > 1 {
            let kf = (k - 1) as f64;
            let next = ((2.0 * kf + 1.0 + a - t) * l_cur - (kf + a) * l_prev) / (kf + 1.0);
            l_prev = l_cur;
            l_cur = next;
        }
        // N_k² = 2^{2β+1} k! / Γ(k + 2β + 1)
        let ln_n = 0.5 * ((a + 1.0) * 2f64.ln() + ln_factorial(k) - ln_gamma(k as f64 + a + 1.0));
        out.push((ln_n + envelope).exp() * l_cur);
    }
    out
}

/// `W ℓ_k(x + iy)` for `k < n`.
pub fn laguerre_transforms(beta: f64, n: usize, x: f64, y: f64) -> Vec<Complex64> {
    let z = Complex64::new(x, y);
    let common = (-(2.0 * beta + 1.0) * (1.0 - I * z).ln()).exp() * y.powf(beta + 0.5);
    let w = cayley(z);
    let mut out = Vec::with_capacity(n);
    let mut a = ln_a0(beta).exp();
    let mut wk = Complex64::new(1.0, 0.0);
    for k in 0..n {
        out.push(common * wk * a);
        a *= ((k as f64 + 2.0 * beta + 1.0) / (k as f64 + 1.0)).sqrt();
        wk *= w;
    }
    out
}

/// `ln a_0` with `a_k² = 2^{2β+1} Γ(k + 2β + 1) / (k! c_β²)`.
fn ln_a0(beta: f64) -> f64 {
    0.5 * ((2.0 * beta + 1.0) * 2f64.ln() + ln_gamma(2.0 * beta + 1.0) - 2.0 * c_beta(beta).ln())
}

/// Phase-free basis values: `|W ℓ_0(z)| · (a_k/a_0) w^k`; the common phase cancels in matrix entries.
fn wavelet_basis(beta: f64, n: usize, x: f64, y: f64) -> Vec<Complex64> {
    let z = Complex64::new(x, y);
    let w = cayley(z);
    let xd = w.norm_sqr();
    // |W ℓ_0|² = (1 − x)^{2β+1} / (4π B(1, 2β)) = 2β (1 − x)^{2β+1} / 4π
    let mut v = Complex64::new((2.0 * beta * (1.0 - xd).powf(2.0 * beta + 1.0) / (4.0 * PI)).sqrt(), 0.0);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(v);
        v *= w * ((k as f64 + 2.0 * beta + 1.0) / (k as f64 + 1.0)).sqrt();
    }
    out
}

/// `W f` on the cell centers of a half-plane grid.
pub fn wavelet_transform(f: &HardySignal, beta: f64, grid: &Grid) -> Result<WeightField> {
    if !(beta > 0.0) {
        return Err(domain("beta must be positive"));
    }
    if grid.y_edges()[0] <= 0.0 {
        return Err(domain("the wavelet transform lives strictly inside y > 0"));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let cells: Vec<Complex64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| f.transform_at(beta, grid.x_center(idx / ny), grid.y_center(idx % ny)))
        .collect();
    WeightField::new(grid.clone(), Array2::from_shape_vec((nx, ny), cells).expect("shape"), Measure::Hyperbolic)
}

/// `∫ f dν` over the whole half-plane, in disc coordinates about `z₀`.
pub fn hyperbolic_integral(center: (f64, f64), f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let z0 = Complex64::new(center.0, center.1);
    // x = |w|² on geometric panels toward the boundary; dν = 2 dx dθ / (1 − x)².
    let mut edges = vec![0.0];
    let n_panels = 40;
    for i in 1..=n_panels {
        edges.push(1.0 - 10f64.powf(-10.0 * i as f64 / n_panels as f64));
    }
    let rule = GaussLegendre::new(16);
    let radial = rule.composite(&edges);
    let n_theta = 192;
    radial
        .par_iter()
        .map(|&(xd, wx)| {
            let r = xd.sqrt();
            let ring: f64 = (0..n_theta)
                .map(|t| {
                    let th = 2.0 * PI * t as f64 / n_theta as f64;
                    let z = disc_to_half_plane(Complex64::from_polar(r, th), z0);
                    f(z.re, z.im)
                })
                .sum();
            ring * 2.0 * PI / n_theta as f64 * 2.0 * wx / ((1.0 - xd) * (1.0 - xd))
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletAssemblyOptions {
    pub beta: f64,
    pub basis: usize,
    pub nodes_per_cell: usize,
    /// Largest basis mass allowed outside the grid when the symbol reaches the grid boundary.
    pub leak_tol: f64,
}

impl WaveletAssemblyOptions {
    pub fn new(beta: f64, basis: usize) -> Self {
        Self { beta, basis, nodes_per_cell: 3, leak_tol: 1e-6 }
    }
}

/// `M_jk = ∫ F Wℓ_j conj(Wℓ_k) dν` with `F` constant on each cell.
pub fn assemble_wavelet_operator(field: &WeightField, opts: &WaveletAssemblyOptions) -> Result<DMatrix<Complex64>> {
    if field.measure() != Measure::Hyperbolic {
        return Err(invalid("wavelet assembly needs a hyperbolic field"));
    }
    let values = field.values();
    let real = field.is_real();
    let touches = touches_boundary(values);
    assemble_half_plane(field.grid(), opts, real, touches, |i, j, _, _| values[[i, j]])
}

/// Assembly of a pointwise symbol, sampled at every quadrature node.
pub fn assemble_wavelet_symbol(
    symbol: impl Fn(f64, f64) -> f64 + Sync,
    grid: &Grid,
    opts: &WaveletAssemblyOptions,
) -> Result<DMatrix<Complex64>> {
    // the box only truncates the symbol if it is nonzero somewhere in the outer ring of cells
    let (nx, ny) = (grid.nx(), grid.ny());
    let ring = (0..nx)
        .flat_map(|i| [(i, 0), (i, ny - 1)])
        .chain((0..ny).flat_map(|j| [(0, j), (nx - 1, j)]));
    let touches = ring.into_iter().any(|(i, j)| symbol(grid.x_center(i), grid.y_center(j)) != 0.0);
    assemble_half_plane(grid, opts, true, touches, |_, _, x, y| Complex64::new(symbol(x, y), 0.0))
}

fn assemble_half_plane(
    grid: &Grid,
    opts: &WaveletAssemblyOptions,
    real: bool,
    check_leak: bool,
    value: impl Fn(usize, usize, f64, f64) -> Complex64 + Sync,
) -> Result<DMatrix<Complex64>> {
    let (beta, k) = (opts.beta, opts.basis);
    if !(beta > 0.0) {
        return Err(domain("beta must be positive"));
    }
    if k == 0 {
        return Err(invalid("basis size must be positive"));
    }
    if grid.y_edges()[0] <= 0.0 {
        return Err(domain("half-plane grid must stay strictly inside y > 0"));
    }
    let rule = GaussLegendre::new(opts.nodes_per_cell.max(1));
    let (xe, ye) = (grid.x_edges(), grid.y_edges());
    let zero = Complex64::new(0.0, 0.0);
    // (matrix accumulator, captured mass of the last basis function)
    let (acc, captured) = (0..grid.nx())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![zero; k * k];
            let mut captured = 0.0;
            let xs: Vec<(f64, f64)> = rule.mapped(xe[i], xe[i + 1]).collect();
            for j in 0..grid.ny() {
                // integrate in u = ln y: dν = y^{−1} dx du
                for (u, wu) in rule.mapped(ye[j].ln(), ye[j + 1].ln()) {
                    let y = u.exp();
                    for &(x, wx) in &xs {
                        let f = value(i, j, x, y);
                        let mass = wx * wu / y;
                        let need_leak = check_leak;
                        if f == zero && !need_leak {
                            continue;
                        }
                        let v = wavelet_basis(beta, k, x, y);
                        if need_leak {
                            captured += v[k - 1].norm_sqr() * mass;
                        }
                        if f != zero {
                            accumulate(&mut acc, &v, f * mass, real);
                        }
                    }
                }
            }
            (acc, captured)
        })
        .reduce(
            || (vec![zero; k * k], 0.0),
            |(mut a, ca), (b, cb)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, ca + cb)
            },
        );
    if check_leak {
        let leak = (1.0 - captured).max(0.0);
        if leak > opts.leak_tol {
            return Err(Error::TailLeak {
                basis: k,
                leak,
                suggested_half_width: suggested_x_half_width(beta, k, opts.leak_tol),
            });
        }
    }
    let mut m = DMatrix::from_row_slice(k, k, &acc);
    if real {
        for a in 0..k {
            m[(a, a)].im = 0.0;
            for b in a + 1..k {
                m[(b, a)] = m[(a, b)].conj();
            }
        }
    }
    Ok(m)
}

/// `x`-half-width of the smallest disc about `i` holding all but `tol` of `|Wℓ_{K−1}|²`.
fn suggested_x_half_width(beta: f64, k: usize, tol: f64) -> f64 {
    let mut xs = 0.5;
    while 1.0 - beta_p(k as f64, 2.0 * beta, xs) > tol && xs < 1.0 - 1e-15 {
        xs = 1.0 - 0.5 * (1.0 - xs);
    }
    let r = xs.sqrt();
    2.0 * r / (1.0 - r * r)
}

fn accumulate(acc: &mut [Complex64], v: &[Complex64], w: Complex64, upper_only: bool) {
    let k = v.len();
    for a in 0..k {
        let va = v[a] * w;
        let start = if upper_only { a } else { 0 };
        for b in start..k {
            acc[a * k + b] += va * v[b].conj();
        }
    }
}

/// `⟨L_{F,β} f, f⟩ = ∫ F |W f|² dν` for a `ν`-radial symbol.
///
/// The symbol is moved to `i` by the affine map `z ↦ (z − x₀)/y₀`, which preserves `ν` and
/// carries `f` to `ĝ(η) = y₀^{−1/2} f̂(η/y₀) e^{ix₀η/y₀}`. There `L` is diagonal in the
/// Laguerre basis, so the form is `Σ λ_k |⟨g, ℓ_k⟩|²`. Energy beyond `max_basis` terms is
/// charged at the last eigenvalue.
pub fn wavelet_quadratic_form(profile: &DiscProfile, f: &HardySignal, beta: f64) -> Result<f64> {
    const MAX_BASIS: usize = 64;
    let (x0, y0) = profile.center;
    let coeffs = match f {
        HardySignal::Laguerre { beta: b, coeffs } if *b == beta && profile.center == (0.0, 1.0) => coeffs.clone(),
        _ => {
            let (nodes, weights, values) = f.sampled();
            let mut acc = vec![Complex64::new(0.0, 0.0); MAX_BASIS];
            for ((w, q), v) in nodes.iter().zip(&weights).zip(&values) {
                let g = v * Complex64::from_polar(q * y0.sqrt(), x0 * w);
                for (a, l) in acc.iter_mut().zip(laguerre_functions(beta, MAX_BASIS, y0 * w)) {
                    *a += g * l;
                }
            }
            acc
        }
    };
    let lambda = bergman_diagonal(profile, beta, coeffs.len())?;
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail = (f.norm().powi(2) - captured).max(0.0);
    let form: f64 = coeffs.iter().zip(&lambda).map(|(c, l)| l * c.norm_sqr()).sum();
    Ok(form + tail * lambda.last().copied().unwrap_or(0.0))
}
