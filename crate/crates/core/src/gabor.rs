//! Gaussian-window STFT on the line, the Hermite phase-space basis and
//! localization operators `L_F` in that basis.
//!
//! With `φ(t) = 2^{1/4} e^{−πt²}` and `Vf(x, ω) = ∫ e^{−2πiyω} f(y) φ(x − y) dy`,
//! the Hermite functions have
//! `Vh_k(z) = e^{−πixω} (π^k/k!)^{1/2} (x − iω)^k e^{−π|z|²/2}`.
//! The phase `e^{−πixω}` is common to every `k` and cancels in matrix entries,
//! so assembly works with the phase-free factor.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::quad::{gamma_p, gamma_q, GaussLegendre};
use crate::weights::{Grid, Measure, ProfileKind, RadialProfile, WeightField};

/// Default number of Hermite functions.
pub const DEFAULT_BASIS: usize = 48;

/// A signal on the line, either sampled or expanded in Hermite functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    /// `values[j] = f(−T + j·dt)` with `dt = 2T/(n − 1)`.
    Samples { half_width: f64, values: Vec<Complex64> },
    /// `f = Σ coeffs[k] h_k`.
    Hermite(Vec<Complex64>),
}

impl Signal {
    pub fn samples(half_width: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid("time half width must be positive"));
        }
        if values.len() < 2 {
            return Err(invalid("a sampled signal needs at least two samples"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("signal samples must be finite"));
        }
        Ok(Signal::Samples { half_width, values })
    }

    pub fn from_fn(half_width: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let dt = 2.0 * half_width / (n.max(2) - 1) as f64;
        Self::samples(half_width, (0..n).map(|j| f(-half_width + j as f64 * dt)).collect())
    }

    pub fn hermite(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("Hermite expansion needs at least one coefficient"));
        }
        if coeffs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("Hermite coefficients must be finite"));
        }
        Ok(Signal::Hermite(coeffs))
    }

    /// The window `φ = h_0`.
    pub fn window() -> Self {
        Signal::Hermite(vec![Complex64::new(1.0, 0.0)])
    }

    fn sample_step(half_width: f64, n: usize) -> f64 {
        2.0 * half_width / (n - 1) as f64
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Signal::Hermite(c) => {
                let h = hermite_functions(c.len(), t);
                c.iter().zip(h).map(|(c, h)| c * h).sum()
            }
            Signal::Samples { half_width, values } => {
                let dt = Self::sample_step(*half_width, values.len());
                let pos = (t + half_width) / dt;
                if pos < 0.0 || pos > (values.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let j = (pos.floor() as usize).min(values.len() - 2);
                let frac = pos - j as f64;
                values[j] * (1.0 - frac) + values[j + 1] * frac
            }
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Signal::Hermite(c) => c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt(),
            Signal::Samples { half_width, values } => {
                let dt = Self::sample_step(*half_width, values.len());
                (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt).sqrt()
            }
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(invalid("cannot normalize the zero signal"));
        }
        Ok(match self {
            Signal::Hermite(c) => Signal::Hermite(c.iter().map(|v| v / n).collect()),
            Signal::Samples { half_width, values } => Signal::Samples {
                half_width: *half_width,
                values: values.iter().map(|v| v / n).collect(),
            },
        })
    }

    /// Largest frequency resolved by the time sampling, if sampled.
    pub fn nyquist(&self) -> Option<f64> {
        match self {
            Signal::Hermite(_) => None,
            Signal::Samples { half_width, values } => {
                Some(0.5 / Self::sample_step(*half_width, values.len()))
            }
        }
    }

    /// Coefficients `⟨f, h_k⟩` for `k < k_max`.
    pub fn hermite_coefficients(&self, k_max: usize) -> Vec<Complex64> {
        match self {
            Signal::Hermite(c) => {
                let mut out = c.clone();
                out.resize(k_max, Complex64::new(0.0, 0.0));
                out
            }
            Signal::Samples { half_width, values } => {
                let dt = Self::sample_step(*half_width, values.len());
                let mut acc = vec![Complex64::new(0.0, 0.0); k_max];
                for (j, v) in values.iter().enumerate() {
                    let t = -half_width + j as f64 * dt;
                    for (a, h) in acc.iter_mut().zip(hermite_functions(k_max, t)) {
                        *a += v * h * dt;
                    }
                }
                acc
            }
        }
    }

    /// `Vf(x, ω)`.
    pub fn stft_at(&self, x: f64, omega: f64) -> Complex64 {
        match self {
            Signal::Hermite(c) => {
                let phase = Complex64::from_polar(1.0, -PI * x * omega);
                let v = phase_free_basis(c.len(), x, omega);
                phase * c.iter().zip(v).map(|(c, v)| c * v).sum::<Complex64>()
            }
            Signal::Samples { half_width, values } => {
                let dt = Self::sample_step(*half_width, values.len());
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let y = -half_width + j as f64 * dt;
                    let w = window(x - y);
                    if w < 1e-300 {
                        continue;
                    }
                    acc += v * Complex64::from_polar(w, -2.0 * PI * y * omega);
                }
                acc * dt
            }
        }
    }
}

/// `φ(t) = 2^{1/4} e^{−πt²}`.
pub fn window(t: f64) -> f64 {
    2f64.powf(0.25) * (-PI * t * t).exp()
}

/// `h_0(t), …, h_{k−1}(t)`, L²-normalized.
pub fn hermite_functions(k: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return out;
    }
    // ψ_k(x) with x = √(2π) t, scaled by (2π)^{1/4}.
    let x = (2.0 * PI).sqrt() * t;
    let mut prev = 0.0;
    let mut cur = window(t);
    out.push(cur);
    for j in 0..k - 1 {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `Vh_k(z)` including its phase.
pub fn hermite_phase_basis(k: usize, x: f64, omega: f64) -> Complex64 {
    let v = phase_free_basis(k + 1, x, omega)[k];
    v * Complex64::from_polar(1.0, -PI * x * omega)
}

/// `(π^k/k!)^{1/2} (x − iω)^k e^{−π|z|²/2}` for `k < n`.
pub(crate) fn phase_free_basis(n: usize, x: f64, omega: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let zbar = Complex64::new(x, -omega);
    let mut v = Complex64::new((-0.5 * PI * (x * x + omega * omega)).exp(), 0.0);
    out.push(v);
    for k in 0..n - 1 {
        v *= zbar * (PI / (k as f64 + 1.0)).sqrt();
        out.push(v);
    }
    out
}

/// `Vf` on the cell centers of `grid`.
///
/// A sampled signal must resolve every frequency on the grid.
pub fn stft(f: &Signal, grid: &Grid) -> Result<WeightField> {
    if grid.is_log_y() {
        return Err(invalid("the STFT lives on a uniform time-frequency grid"));
    }
    if let Some(nyquist) = f.nyquist() {
        let max_frequency = grid.y_edges().iter().fold(0.0f64, |m, y| m.max(y.abs()));
        if max_frequency > nyquist {
            return Err(Error::Aliasing { max_frequency, nyquist });
        }
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let cells: Vec<Complex64> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| f.stft_at(grid.x_center(idx / ny), grid.y_center(idx % ny)))
        .collect();
    let values = Array2::from_shape_vec((nx, ny), cells).expect("shape matches");
    WeightField::new(grid.clone(), values, Measure::Lebesgue)
}

/// Sorted spectrum of a localization operator truncated to `basis_size` Hermite functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpectrum {
    /// Nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub basis_size: usize,
    /// Bound on how much the true norm can exceed the truncated one.
    pub tail_bound: f64,
}

impl OperatorSpectrum {
    pub fn new(mut eigenvalues: Vec<f64>, basis_size: usize, tail_bound: f64) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues, basis_size, tail_bound }
    }

    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub basis: usize,
    /// Gauss–Legendre nodes per axis in each grid cell.
    pub nodes_per_cell: usize,
    /// Largest phase-space mass of `h_{K−1}` allowed outside the grid box.
    pub leak_tol: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { basis: DEFAULT_BASIS, nodes_per_cell: 3, leak_tol: 1e-10 }
    }
}

impl AssemblyOptions {
    pub fn with_basis(basis: usize) -> Self {
        Self { basis, ..Self::default() }
    }
}

/// Mass of `|Vh_{K−1}|²` outside the disc of radius `r`.
fn basis_leak(k: usize, r: f64) -> f64 {
    gamma_q(k as f64, PI * r * r)
}

fn check_leak(k: usize, half_width: f64, tol: f64) -> Result<()> {
    let leak = basis_leak(k, half_width);
    if leak <= tol {
        return Ok(());
    }
    let mut r = half_width.max(0.1);
    while basis_leak(k, r) > tol {
        r *= 1.1;
    }
    Err(Error::TailLeak { basis: k, leak, suggested_half_width: r })
}

/// `M_jk = ∫ F v_j conj(v_k) dz` over the grid box, `F` constant on each cell.
pub fn assemble_operator(field: &WeightField, opts: &AssemblyOptions) -> Result<DMatrix<Complex64>> {
    let k = opts.basis;
    if k == 0 {
        return Err(invalid("basis size must be positive"));
    }
    if field.measure() != Measure::Lebesgue || field.grid().is_log_y() {
        return Err(invalid("time-frequency assembly needs a Lebesgue field on a uniform grid"));
    }
    let grid = field.grid();
    // radius of the largest origin-centered disc inside the box
    let (xe, ye) = (grid.x_edges(), grid.y_edges());
    let half_width = [xe[0], xe[xe.len() - 1], ye[0], ye[ye.len() - 1]]
        .iter()
        .fold(f64::INFINITY, |m, e| m.min(e.abs()));
    // F vanishes off the box, so the box only truncates something when F reaches its edge
    if touches_boundary(field.values()) {
        check_leak(k, half_width, opts.leak_tol)?;
    }

    let real = field.is_real();
    let rule = GaussLegendre::new(opts.nodes_per_cell.max(1));
    let values = field.values();
    let acc = (0..grid.nx())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); k * k];
            let xs: Vec<(f64, f64)> = rule.mapped(xe[i], xe[i + 1]).collect();
            for j in 0..grid.ny() {
                let f = values[[i, j]];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (y, wy) in rule.mapped(ye[j], ye[j + 1]) {
                    for &(x, wx) in &xs {
                        let v = phase_free_basis(k, x, y);
                        accumulate(&mut acc, &v, f * (wx * wy), real);
                    }
                }
            }
            acc
        })
        .reduce(
            || vec![Complex64::new(0.0, 0.0); k * k],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(finish(acc, k, real))
}

pub(crate) fn touches_boundary(values: &ndarray::Array2<Complex64>) -> bool {
    let (nx, ny) = values.dim();
    let zero = Complex64::new(0.0, 0.0);
    (0..nx).any(|i| values[[i, 0]] != zero || values[[i, ny - 1]] != zero)
        || (0..ny).any(|j| values[[0, j]] != zero || values[[nx - 1, j]] != zero)
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

fn finish(acc: Vec<Complex64>, k: usize, mirror: bool) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_row_slice(k, k, &acc);
    if mirror {
        for a in 0..k {
            m[(a, a)].im = 0.0;
            for b in a + 1..k {
                m[(b, a)] = m[(a, b)].conj();
            }
        }
    }
    m
}

/// Assembly of a radial profile by polar quadrature about its own center.
pub fn assemble_radial(profile: &RadialProfile, basis: usize) -> Result<DMatrix<Complex64>> {
    if basis == 0 {
        return Err(invalid("basis size must be positive"));
    }
    if let ProfileKind::Constant { .. } = profile.kind {
        return Err(Error::Divergent("a constant weight has no finite polar quadrature; L_F = F·Id".into()));
    }
    let (cx, cw) = profile.center;
    // Phase-space mass of the basis sits within |z| ≲ √(K/π) + a margin.
    let basis_radius = (basis as f64 / PI).sqrt() + 6.0 + (cx * cx + cw * cw).sqrt();
    let r_max = profile
        .effective_radius(1e-17)
        .unwrap_or(basis_radius)
        .min(basis_radius);
    let mut edges: Vec<f64> = vec![0.0];
    edges.extend(profile.breakpoints().into_iter().filter(|&r| r > 0.0 && r < r_max));
    edges.push(r_max);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut panels = vec![0.0];
    for w in edges.windows(2) {
        let n = ((w[1] - w[0]) / 0.25).ceil().max(1.0) as usize;
        for i in 1..=n {
            panels.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    let rule = GaussLegendre::new(24);
    let radial = rule.composite(&panels);
    let n_theta = 4 * basis + 64;
    let dtheta = 2.0 * PI / n_theta as f64;
    let acc = radial
        .par_iter()
        .map(|&(r, wr)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); basis * basis];
            // left-continuous steps: evaluate inside the panel, never on a knot
            let rho = profile.value(r);
            if rho == 0.0 {
                return acc;
            }
            for t in 0..n_theta {
                let th = t as f64 * dtheta;
                let v = phase_free_basis(basis, cx + r * th.cos(), cw + r * th.sin());
                accumulate(&mut acc, &v, Complex64::new(rho * r * wr * dtheta, 0.0), true);
            }
            acc
        })
        .reduce(
            || vec![Complex64::new(0.0, 0.0); basis * basis],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(finish(acc, basis, true))
}

/// Diagonal of `L_ρ` in the Hermite basis, `λ_k = (1/k!) ∫ ρ(√(s/π)) s^k e^{−s} ds`, in basis order.
pub fn hermite_diagonal(profile: &RadialProfile, basis: usize) -> Result<Vec<f64>> {
    if !profile.is_centered() {
        return Err(Error::ContractViolation(
            "radial eigenvalues need a profile centered at the origin".into(),
        ));
    }
    let eig = |k: usize| -> f64 {
        let n = k as f64 + 1.0;
        match &profile.kind {
            ProfileKind::BallIndicator { amplitude, area } => amplitude * gamma_p(n, *area),
            ProfileKind::Gaussian { amplitude, decay } => amplitude * (1.0 + decay).powf(-n),
            ProfileKind::TruncatedGaussian { amplitude, decay, cap } => {
                if amplitude <= cap {
                    return amplitude * (1.0 + decay).powf(-n);
                }
                let s0 = (amplitude / cap).ln() / decay;
                cap * gamma_p(n, s0) + amplitude * (1.0 + decay).powf(-n) * gamma_q(n, (1.0 + decay) * s0)
            }
            ProfileKind::Sampled { radii, values } => {
                // layer sum over the annuli of a step profile
                let mut prev = 0.0;
                let mut total = 0.0;
                for (r, v) in radii.iter().zip(values) {
                    let cur = gamma_p(n, PI * r * r);
                    total += v * (cur - prev);
                    prev = cur;
                }
                total
            }
            ProfileKind::Constant { amplitude } => *amplitude,
        }
    };
    Ok((0..basis).map(eig).collect())
}

/// Spectrum of a centered radial symbol from the closed-form diagonal.
pub fn radial_eigenvalues(profile: &RadialProfile, basis: usize) -> Result<OperatorSpectrum> {
    let diag = hermite_diagonal(profile, basis)?;
    let nonincreasing = diag.windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let tail_bound = if nonincreasing {
        0.0
    } else {
        match profile.effective_radius(1e-16) {
            Some(r) => profile.sup_norm() * gamma_p(basis as f64 + 1.0, PI * r * r),
            None => profile.sup_norm(),
        }
    };
    Ok(OperatorSpectrum::new(diag, basis, tail_bound))
}

/// Eigenvalues of a Hermitian matrix.
pub fn spectrum(m: &DMatrix<Complex64>, tail_bound: f64) -> Result<OperatorSpectrum> {
    check_hermitian(m)?;
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    Ok(OperatorSpectrum::new(eig.eigenvalues.iter().copied().collect(), m.nrows(), tail_bound))
}

/// Largest `|eigenvalue|` of a Hermitian matrix.
pub fn operator_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(spectrum(m, 0.0)?.norm())
}

fn check_hermitian(m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(invalid("matrix must be square"));
    }
    let mut asymmetry = 0.0f64;
    for a in 0..m.nrows() {
        for b in a..m.ncols() {
            asymmetry = asymmetry.max((m[(a, b)] - m[(b, a)].conj()).norm());
        }
    }
    if asymmetry > 1e-10 {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// Spectral radius of a Hermitian matrix by power iteration on `M²`.
pub fn power_iteration(m: &DMatrix<Complex64>, rel_tol: f64, max_iter: usize) -> Result<f64> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    // A deterministic start with every component nonzero.
    let mut v = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.01 * i as f64, 0.1));
    v /= Complex64::new(v.norm(), 0.0);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let w2 = m * &w;
        let norm2 = w2.norm();
        if norm2 == 0.0 {
            return Ok(0.0);
        }
        let next = norm2.sqrt();
        v = w2 / Complex64::new(norm2, 0.0);
        if (next - estimate).abs() <= rel_tol * next {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence(format!("power iteration stalled at {estimate}")))
}

/// Norm of an assembled field operator with its truncation bound.
///
/// For `R` the support radius and `ε = P(K + 1, πR²)`, the compressed norm
/// differs from the true one by at most `‖F‖_∞ (2√ε + ε)`.
pub fn field_spectrum(field: &WeightField, opts: &AssemblyOptions) -> Result<OperatorSpectrum> {
    let m = assemble_operator(field, opts)?;
    let r = field.support_radius();
    let eps = gamma_p(opts.basis as f64 + 1.0, PI * r * r);
    spectrum(&m, field.sup_norm() * (2.0 * eps.sqrt() + eps))
}

/// `⟨L_F f, f⟩` from an assembled matrix and Hermite coefficients of `f`.
pub fn quadratic_form(m: &DMatrix<Complex64>, coeffs: &[Complex64]) -> Complex64 {
    let k = m.nrows().min(coeffs.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            acc += coeffs[a] * m[(a, b)] * coeffs[b].conj();
        }
    }
    acc
}

/// A measurable set in the time-frequency plane.
#[derive(Clone, Debug)]
pub enum Region {
    Empty,
    Ball { center: (f64, f64), area: f64 },
    Rect { x: (f64, f64), omega: (f64, f64) },
    /// Cells of the field with nonzero value.
    Mask(WeightField),
}

impl Region {
    pub fn measure(&self) -> f64 {
        match self {
            Region::Empty => 0.0,
            Region::Ball { area, .. } => *area,
            Region::Rect { x, omega } => (x.1 - x.0) * (omega.1 - omega.0),
            Region::Mask(w) => w
                .moduli()
                .filter(|&(m, _)| m > 0.0)
                .map(|(_, mass)| mass)
                .sum(),
        }
    }
}

/// `∫_Ω |Vf|²`.
pub fn concentration(f: &Signal, region: &Region) -> Result<f64> {
    let density = |x: f64, w: f64| f.stft_at(x, w).norm_sqr();
    let rule = GaussLegendre::new(16);
    let value = match region {
        Region::Empty => 0.0,
        Region::Ball { center, area } => {
            if *area < 0.0 {
                return Err(invalid("ball area must be nonnegative"));
            }
            let r = (area / PI).sqrt();
            let panels: Vec<f64> = (0..=8).map(|i| r * i as f64 / 8.0).collect();
            let n_theta = 128;
            rule.composite(&panels)
                .par_iter()
                .map(|&(rr, wr)| {
                    (0..n_theta)
                        .map(|t| {
                            let th = 2.0 * PI * t as f64 / n_theta as f64;
                            density(center.0 + rr * th.cos(), center.1 + rr * th.sin())
                        })
                        .sum::<f64>()
                        * rr
                        * wr
                        * 2.0
                        * PI
                        / n_theta as f64
                })
                .sum()
        }
        Region::Rect { x, omega } => {
            let xs = rule.composite(&linspace(x.0, x.1, 8));
            let ws = rule.composite(&linspace(omega.0, omega.1, 8));
            xs.par_iter()
                .map(|&(xx, wx)| ws.iter().map(|&(ww, www)| density(xx, ww) * www).sum::<f64>() * wx)
                .sum()
        }
        Region::Mask(w) => {
            if w.measure() != Measure::Lebesgue {
                return Err(invalid("concentration masks live on the time-frequency plane"));
            }
            let g = w.grid();
            let small = GaussLegendre::new(3);
            (0..g.nx())
                .into_par_iter()
                .map(|i| {
                    let mut s = 0.0;
                    for j in 0..g.ny() {
                        if w.values()[[i, j]].norm() == 0.0 {
                            continue;
                        }
                        for (xx, wx) in small.mapped(g.x_edges()[i], g.x_edges()[i + 1]) {
                            for (yy, wy) in small.mapped(g.y_edges()[j], g.y_edges()[j + 1]) {
                                s += density(xx, yy) * wx * wy;
                            }
                        }
                    }
                    s
                })
                .sum()
        }
    };
    Ok(value / f.norm().powi(2))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `‖Vf‖_{L^p}` for unit `f`; bounded by `(2/p)^{1/p}`.
pub fn lieb_quotient(f: &Signal, p: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(domain(format!("the Lieb inequality needs 2 <= p < inf, got {p}")));
    }
    let rule = GaussLegendre::new(12);
    let nodes = rule.composite(&linspace(-8.0, 8.0, 32));
    let sum: f64 = nodes
        .par_iter()
        .map(|&(x, wx)| {
            nodes
                .iter()
                .map(|&(w, ww)| f.stft_at(x, w).norm().powf(p) * ww)
                .sum::<f64>()
                * wx
        })
        .sum();
    Ok(sum.powf(1.0 / p) / f.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_functions_are_orthonormal() {
        let rule = GaussLegendre::new(40);
        let nodes = rule.composite(&linspace(-7.0, 7.0, 20));
        let k = 10;
        let mut gram = vec![0.0; k * k];
        for &(t, w) in &nodes {
            let h = hermite_functions(k, t);
            for a in 0..k {
                for b in 0..k {
                    gram[a * k + b] += h[a] * h[b] * w;
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                assert_abs_diff_eq!(gram[a * k + b], if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_basis_matches_quadrature_stft() {
        let sig = |k: usize| Signal::from_fn(8.0, 4001, move |t| Complex64::new(hermite_functions(k + 1, t)[k], 0.0)).unwrap();
        for k in 0..=8 {
            let s = sig(k);
            for &(x, w) in &[(0.3, -0.4), (1.1, 0.7), (-0.8, 1.5)] {
                let exact = hermite_phase_basis(k, x, w);
                assert_abs_diff_eq!((s.stft_at(x, w) - exact).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn diagonal_matrix_norm() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.7, 0.0),
            Complex64::new(0.3, 0.0),
        ]));
        assert_abs_diff_eq!(operator_norm(&m).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(power_iteration(&m, 1e-13, 1000).unwrap(), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        assert!(matches!(operator_norm(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn radial_eigenvalue_closed_forms() {
        let ball = RadialProfile::ball(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(radial_eigenvalues(&ball, 8).unwrap().norm(), 1.0 - (-1f64).exp(), epsilon = 1e-14);
        let g = RadialProfile::gaussian(2f64.sqrt(), 1.0).unwrap();
        let d = hermite_diagonal(&g, 2).unwrap();
        assert_abs_diff_eq!(d[0], 2f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 2f64.sqrt() / 4.0, epsilon = 1e-15);
        let t = RadialProfile::truncated_gaussian(0.5f64.exp(), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(hermite_diagonal(&t, 1).unwrap()[0], 1.0 - (-0.5f64).exp() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn off_center_profile_is_a_contract_violation() {
        let p = RadialProfile::centered_at(ProfileKind::BallIndicator { amplitude: 1.0, area: 1.0 }, (1.0, 0.0)).unwrap();
        assert!(matches!(radial_eigenvalues(&p, 4), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn too_large_basis_leaks() {
        let field = WeightField::from_real_fn(Grid::square(2.0, 16).unwrap(), Measure::Lebesgue, |_, _| 1.0).unwrap();
        match assemble_operator(&field, &AssemblyOptions::with_basis(40)) {
            Err(Error::TailLeak { suggested_half_width, .. }) => assert!(suggested_half_width > 2.0),
            other => panic!("expected a tail leak, got {other:?}"),
        }
    }

    #[test]
    fn lieb_rejects_small_p() {
        assert!(lieb_quotient(&Signal::window(), 1.5).is_err());
    }
}
