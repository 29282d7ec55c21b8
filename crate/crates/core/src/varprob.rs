//! The one-dimensional problem `sup I(u) = ∫_0^A G(u(t)) dt` over nonincreasing
//! `u ≥ 0` with `p ∫_0^A t^{p−1} u(t) dt ≤ B^p`.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, gabor_u, wavelet_u, Regime};
use crate::constraints::{ConstraintSet, Kernel};
use crate::error::{Error, Result};
use crate::quad::adaptive_pieces;
use crate::rearrange::StepFunction;

/// A nonnegative function on `(0, A)` that can be fed to the objective.
pub trait Candidate {
    fn eval(&self, t: f64) -> f64;

    /// `u` vanishes on `[support_end, ∞)`.
    fn support_end(&self) -> f64;

    /// Points where `u` may jump or have a kink, inside `(0, support_end)`.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn objective(&self, a: f64, kernel: Kernel) -> f64 {
        let end = a.min(self.support_end());
        if end <= 0.0 {
            return 0.0;
        }
        adaptive_pieces(|t| kernel.g(self.eval(t)), &pieces(self, end), 1e-14 * end)
    }

    fn moment(&self, p: f64, a: f64) -> f64 {
        let end = a.min(self.support_end());
        if end <= 0.0 {
            return 0.0;
        }
        // Scaling by end^p keeps the tolerance relative.
        let scaled = |tau: f64| {
            if tau <= 0.0 {
                return 0.0;
            }
            tau.powf(p - 1.0) * self.eval(tau * end)
        };
        let pts: Vec<f64> = pieces(self, end).iter().map(|t| t / end).collect();
        let integral = adaptive_pieces(scaled, &pts, 1e-15 * self.eval(0.5 * end).max(1.0));
        p * end.powf(p) * integral
    }
}

fn pieces<U: Candidate + ?Sized>(u: &U, end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(u.breakpoints().into_iter().filter(|&t| t > 0.0 && t < end));
    pts.push(end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

impl Candidate for StepFunction {
    fn eval(&self, t: f64) -> f64 {
        StepFunction::eval(self, t)
    }

    fn support_end(&self) -> f64 {
        self.end()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.edges().to_vec()
    }

    fn objective(&self, a: f64, kernel: Kernel) -> f64 {
        if a >= self.end() {
            self.integrate(|v| kernel.g(v))
        } else {
            truncate(self, a).integrate(|v| kernel.g(v))
        }
    }

    fn moment(&self, p: f64, a: f64) -> f64 {
        if a >= self.end() {
            StepFunction::moment(self, p)
        } else {
            StepFunction::moment(&truncate(self, a), p)
        }
    }
}

fn truncate(u: &StepFunction, a: f64) -> StepFunction {
    let mut edges: Vec<f64> = u.edges().iter().copied().take_while(|&e| e < a).collect();
    let values = u.values()[..edges.len()].to_vec();
    edges.push(a);
    StepFunction::new(edges, values).expect("truncation of a valid step function")
}

/// Maximizers in closed form, plus the multiplier form used by the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Maximizer {
    /// `u ≡ value` on `(0, a)`.
    Constant { value: f64, a: f64 },
    /// `(−log (t/λ)^{p−1})^d/d!` on `(0, min(λ, a))`.
    Gabor { lambda: f64, p: f64, d: u32, a: f64 },
    /// `4π max((t/λ)^{−α} − 1, 0)` on `(0, a)`.
    Wavelet { lambda: f64, p: f64, beta: f64, a: f64 },
    /// `(G')^{−1}(c t^{p−1})` clamped at zero, on `(0, a)`.
    Multiplier { c: f64, p: f64, kernel: Kernel, a: f64 },
}

impl Candidate for Maximizer {
    fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.support_end() {
            return 0.0;
        }
        match *self {
            Maximizer::Constant { value, .. } => value,
            Maximizer::Gabor { lambda, p, d, .. } => gabor_u(t, lambda, p, d),
            Maximizer::Wavelet { lambda, p, beta, .. } => wavelet_u(t, lambda, p, beta),
            Maximizer::Multiplier { c, p, kernel, .. } => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    kernel.g_prime_inverse(c * t.powf(p - 1.0))
                }
            }
        }
    }

    fn support_end(&self) -> f64 {
        match *self {
            Maximizer::Constant { a, .. } => a,
            Maximizer::Gabor { lambda, a, .. } | Maximizer::Wavelet { lambda, a, .. } => lambda.min(a),
            Maximizer::Multiplier { c, p, kernel, a } => multiplier_support(c, p, kernel).min(a),
        }
    }
}

/// `M` with `c M^{p−1} = G'(0)`: where the multiplier form reaches zero.
fn multiplier_support(c: f64, p: f64, kernel: Kernel) -> f64 {
    (kernel.g_prime(0.0) / c).powf(1.0 / (p - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub u: Maximizer,
    pub lambda: Option<f64>,
    /// Lagrange multiplier `c` in `G'(u(t)) = c t^{p−1}`, when computed.
    pub multiplier: Option<f64>,
    pub objective_value: f64,
    pub constraint_value: f64,
    pub regime: Regime,
    /// `(t, u(t))` on the solver grid; empty for closed forms.
    pub samples: Vec<(f64, f64)>,
}

impl VariationalSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.u.eval(t)
    }
}

pub fn objective<U: Candidate + ?Sized>(u: &U, a: f64, kernel: Kernel) -> f64 {
    u.objective(a, kernel)
}

pub fn constraint_moment<U: Candidate + ?Sized>(u: &U, p: f64, a: f64) -> f64 {
    u.moment(p, a)
}

/// The unique maximizer of the problem, from the closed forms.
pub fn solve_closed_form(c: &ConstraintSet) -> Result<VariationalSolution> {
    let report = bounds::bound(c)?;
    let kernel = c.kernel();
    let u = match (report.regime, kernel) {
        (Regime::Ball, _) => Maximizer::Constant { value: c.b / c.a, a: c.a },
        (_, Kernel::Gabor { d }) => Maximizer::Gabor {
            lambda: report.lambda.expect("lambda for p > 1"),
            p: c.p,
            d,
            a: c.a,
        },
        (_, Kernel::Wavelet { beta }) => Maximizer::Wavelet {
            lambda: report.lambda.expect("lambda for p > 1"),
            p: c.p,
            beta,
            a: c.a,
        },
    };
    Ok(VariationalSolution {
        objective_value: u.objective(c.a, kernel),
        constraint_value: u.moment(c.p, c.a),
        lambda: report.lambda,
        multiplier: None,
        regime: report.regime,
        samples: Vec::new(),
        u,
    })
}

/// Independent solver from the Euler–Lagrange relation `G'(u(t)) = c t^{p−1}`:
/// bisects the multiplier `c` until the constraint is saturated, then samples
/// `u` on `n_grid` points (geometric near `0`, uniform beyond).
pub fn solve_kkt_oracle(c: &ConstraintSet, n_grid: usize) -> Result<VariationalSolution> {
    if c.p == 1.0 {
        return Err(Error::Domain(
            "the multiplier oracle needs p > 1; for p = 1 the maximizer is the constant B/A".into(),
        ));
    }
    if n_grid < 2 {
        return Err(Error::InvalidInput("n_grid must be at least 2".into()));
    }
    let (p, a) = (c.p, c.a);
    let kernel = c.kernel();
    let target = c.b.powf(p);
    let moment = |ln_c: f64| Maximizer::Multiplier { c: ln_c.exp(), p, kernel, a }.moment(p, a);

    // m(c) is decreasing; start where the support just fills (0, A), or at the B scale.
    let scale = if a.is_finite() { a } else { c.b };
    let start = (kernel.g_prime(0.0) * scale.powf(1.0 - p)).ln();
    let (mut lo, mut hi) = (start - 1.0, start + 1.0);
    let mut guard = 0;
    while moment(lo) < target {
        lo -= 2.0 * (hi - lo);
        guard += 1;
        if guard > 200 {
            return Err(Error::NoConvergence("could not bracket the multiplier from below".into()));
        }
    }
    while moment(hi) > target {
        hi += 2.0 * (hi - lo);
        guard += 1;
        if guard > 400 {
            return Err(Error::NoConvergence("could not bracket the multiplier from above".into()));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if moment(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_c = 0.5 * (lo + hi);
    let u = Maximizer::Multiplier { c: ln_c.exp(), p, kernel, a };
    let constraint_value = u.moment(p, a);
    let residual = (constraint_value - target).abs() / target;
    if residual > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "multiplier bisection left a relative constraint residual of {residual:.3e}"
        )));
    }
    let m = multiplier_support(ln_c.exp(), p, kernel);
    let end = u.support_end();
    let samples = oracle_grid(end, n_grid)
        .into_iter()
        .map(|t| (t, u.eval(t)))
        .collect();
    Ok(VariationalSolution {
        objective_value: u.objective(a, kernel),
        constraint_value,
        // λ^{p−1} = G'(0)/c in both kernels.
        lambda: Some(m),
        multiplier: Some(ln_c.exp()),
        regime: if m > a { Regime::Truncated } else { Regime::Gaussian },
        samples,
        u,
    })
}

/// `n` points in `(0, end)`: the first half geometric over `[1e−8, 1e−2]·end`, the rest uniform.
pub fn oracle_grid(end: f64, n: usize) -> Vec<f64> {
    let n_geo = n / 2;
    let n_uni = n - n_geo;
    let mut grid = Vec::with_capacity(n);
    for i in 0..n_geo {
        let s = i as f64 / n_geo.max(1) as f64;
        grid.push(end * 10f64.powf(-8.0 + 6.0 * s));
    }
    for i in 0..n_uni {
        grid.push(end * (1e-2 + (1.0 - 1e-2) * (i as f64 + 0.5) / n_uni as f64));
    }
    grid
}

/// Rescales a nonnegative step function so that its moment equals `B^p` exactly.
pub fn saturate(u: &StepFunction, p: f64, b: f64) -> Result<StepFunction> {
    let m = StepFunction::moment(u, p);
    if !(m > 0.0) {
        return Err(Error::InvalidInput("cannot saturate the zero function".into()));
    }
    Ok(u.scaled(b.powf(p) / m))
}
