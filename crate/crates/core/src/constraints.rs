use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::factorial;

/// Which transform (and hence which concentration function `G`) the constraints refer to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "lowercase")]
pub enum Transform {
    /// Gaussian-window STFT on `R^d`.
    Gabor { d: u32 },
    /// Cauchy wavelet of order `beta`.
    Wavelet { beta: f64 },
}

impl Transform {
    pub fn kernel(self) -> Kernel {
        match self {
            Transform::Gabor { d } => Kernel::Gabor { d },
            Transform::Wavelet { beta } => Kernel::Wavelet { beta },
        }
    }
}

/// The double constraint `‖F‖_∞ ≤ A`, `‖F‖_p ≤ B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub p: f64,
    /// `f64::INFINITY` drops the sup constraint.
    pub a: f64,
    pub b: f64,
    pub transform: Transform,
}

impl ConstraintSet {
    pub fn new(p: f64, a: f64, b: f64, transform: Transform) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(domain(format!("p must be a finite real >= 1, got {p}")));
        }
        if !(a > 0.0) || a.is_nan() {
            return Err(domain(format!("A must be positive (or inf), got {a}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(domain(format!("B must be positive and finite, got {b}")));
        }
        match transform {
            Transform::Gabor { d } if d == 0 => return Err(domain("dimension d must be >= 1")),
            Transform::Gabor { d } if d > 170 => return Err(domain("dimension d is too large for d! in f64")),
            Transform::Wavelet { beta } if !(beta > 0.0) || !beta.is_finite() => {
                return Err(domain(format!("beta must be positive, got {beta}")))
            }
            _ => {}
        }
        if p == 1.0 && a.is_infinite() {
            return Err(Error::NoExtremal { unattained: b });
        }
        Ok(Self { p, a, b, transform })
    }

    pub fn gabor(p: f64, a: f64, b: f64, d: u32) -> Result<Self> {
        Self::new(p, a, b, Transform::Gabor { d })
    }

    pub fn wavelet(p: f64, a: f64, b: f64, beta: f64) -> Result<Self> {
        Self::new(p, a, b, Transform::Wavelet { beta })
    }

    pub fn kernel(&self) -> Kernel {
        self.transform.kernel()
    }

    /// `κ_p = (p − 1)/p`.
    pub fn kappa(&self) -> f64 {
        kappa(self.p)
    }

    /// `(B/A)^p`, zero when `A = inf`.
    pub fn critical_ratio(&self) -> f64 {
        if self.a.is_infinite() {
            0.0
        } else {
            (self.b / self.a).powf(self.p)
        }
    }

    /// Regime threshold for the critical ratio: `κ_p^d` or `4πσ`.
    pub fn threshold(&self) -> f64 {
        match self.transform {
            Transform::Gabor { d } => self.kappa().powi(d as i32),
            Transform::Wavelet { beta } => 4.0 * PI * sigma(self.p, beta),
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.transform {
            Transform::Wavelet { beta } => Some(sigma(self.p, beta)),
            Transform::Gabor { .. } => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.transform {
            Transform::Wavelet { beta } => Some(alpha(self.p, beta)),
            Transform::Gabor { .. } => None,
        }
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} A={} B={} ", self.p, self.a, self.b)?;
        match self.transform {
            Transform::Gabor { d } => write!(f, "gabor d={d}"),
            Transform::Wavelet { beta } => write!(f, "wavelet beta={beta}"),
        }
    }
}

pub fn kappa(p: f64) -> f64 {
    (p - 1.0) / p
}

/// `σ = (p − 1)/(2βp + 1)`.
pub fn sigma(p: f64, beta: f64) -> f64 {
    (p - 1.0) / (2.0 * beta * p + 1.0)
}

/// `α = (p − 1)/(2β + 1)`.
pub fn alpha(p: f64, beta: f64) -> f64 {
    (p - 1.0) / (2.0 * beta + 1.0)
}

/// Concentration function of a transform: the sharp bound on the energy a
/// unit-norm signal can put in a set of measure `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum Kernel {
    Gabor { d: u32 },
    Wavelet { beta: f64 },
}

impl Kernel {
    pub fn g(&self, s: f64) -> f64 {
        match *self {
            Kernel::Gabor { d } => g_gabor(s, d),
            Kernel::Wavelet { beta } => g_wavelet(s, beta),
        }
    }

    pub fn g_prime(&self, s: f64) -> f64 {
        match *self {
            Kernel::Gabor { d } => (-(factorial(d as usize) * s).powf(1.0 / d as f64)).exp(),
            Kernel::Wavelet { beta } => {
                2.0 * beta / (4.0 * PI) * (1.0 + s / (4.0 * PI)).powf(-2.0 * beta - 1.0)
            }
        }
    }

    /// Inverse of the strictly decreasing `G'`, clamped to `0` for `y >= G'(0)`.
    pub fn g_prime_inverse(&self, y: f64) -> f64 {
        if y >= self.g_prime(0.0) {
            return 0.0;
        }
        if y <= 0.0 {
            return f64::INFINITY;
        }
        match *self {
            Kernel::Gabor { d } => (-y.ln()).powi(d as i32) / factorial(d as usize),
            Kernel::Wavelet { beta } => {
                let ratio = 4.0 * PI * y / (2.0 * beta);
                4.0 * PI * (ratio.powf(-1.0 / (2.0 * beta + 1.0)) - 1.0)
            }
        }
    }
}

/// `G(s) = ∫_0^s exp(−(d! τ)^{1/d}) dτ = P(d, (d! s)^{1/d})`.
pub(crate) fn g_gabor(s: f64, d: u32) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s.is_infinite() {
        return 1.0;
    }
    if d == 1 {
        return -(-s).exp_m1();
    }
    let x = (factorial(d as usize) * s).powf(1.0 / d as f64);
    lower_gamma_regularized_int(d, x)
}

pub(crate) fn g_wavelet(s: f64, beta: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s.is_infinite() {
        return 1.0;
    }
    -(-2.0 * beta * (s / (4.0 * PI)).ln_1p()).exp_m1()
}

/// `P(n, x)` for integer `n`, accurate for small `x` where `1 − Q` would cancel.
fn lower_gamma_regularized_int(n: u32, x: f64) -> f64 {
    if x < n as f64 + 1.0 {
        // e^{-x} Σ_{m >= n} x^m / m!
        let mut term = (n as f64 * x.ln() - x - crate::quad::ln_factorial(n as usize)).exp();
        let mut sum = term;
        let mut m = n as f64;
        loop {
            m += 1.0;
            term *= x / m;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum
    } else {
        let mut term = 1.0;
        let mut partial = 1.0;
        for m in 1..n {
            term *= x / m as f64;
            partial += term;
        }
        1.0 - (-x).exp() * partial
    }
}
