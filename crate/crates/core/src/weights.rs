//! Phase-space grids, gridded weights and radial profiles.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rearrange::DistributionFunction;

/// Default half width of the phase-space truncation box.
pub const DEFAULT_HALF_WIDTH: f64 = 6.0;

/// Measure used to weigh grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `dx dω` on the time-frequency plane.
    Lebesgue,
    /// `y^{-2} dx dy` on the upper half-plane.
    Hyperbolic,
}

/// Rectangular tensor grid described by its cell edges.
///
/// For the time-frequency plane `y` is the frequency `ω`; for the upper
/// half-plane it is the (positive) scale variable.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
    log_y: bool,
}

impl Grid {
    /// Square `[-half_width, half_width]^2` with `n` uniform cells per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid("half_width must be positive and finite"));
        }
        if n < 2 {
            return Err(invalid("a grid needs at least 2 samples per axis"));
        }
        let edges = uniform_edges(-half_width, half_width, n);
        Ok(Self {
            x_edges: edges.clone(),
            y_edges: edges,
            log_y: false,
        })
    }

    /// Half-plane box: uniform in `x`, logarithmic in `y`.
    pub fn half_plane(x_range: (f64, f64), nx: usize, y_range: (f64, f64), ny: usize) -> Result<Self> {
        let (x0, x1) = x_range;
        let (y0, y1) = y_range;
        if nx < 2 || ny < 2 {
            return Err(invalid("a grid needs at least 2 samples per axis"));
        }
        if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
            return Err(invalid("x range must be a finite nonempty interval"));
        }
        if !(y0 > 0.0) {
            return Err(Error::Domain("half-plane grid must stay strictly inside y > 0".into()));
        }
        if !(y1 > y0) || !y1.is_finite() {
            return Err(invalid("y range must be a finite nonempty interval"));
        }
        let log_edges = uniform_edges(y0.ln(), y1.ln(), ny);
        Ok(Self {
            x_edges: uniform_edges(x0, x1, nx),
            y_edges: log_edges.into_iter().map(f64::exp).collect(),
            log_y: true,
        })
    }

    pub fn from_edges(x_edges: Vec<f64>, y_edges: Vec<f64>, log_y: bool) -> Result<Self> {
        for edges in [&x_edges, &y_edges] {
            if edges.len() < 3 {
                return Err(invalid("a grid needs at least 2 cells per axis"));
            }
            if edges.windows(2).any(|w| !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite()) {
                return Err(invalid("grid edges must be finite and strictly increasing"));
            }
        }
        if log_y && y_edges[0] <= 0.0 {
            return Err(Error::Domain("half-plane grid must stay strictly inside y > 0".into()));
        }
        Ok(Self {
            x_edges,
            y_edges,
            log_y,
        })
    }

    pub fn nx(&self) -> usize {
        self.x_edges.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.y_edges.len() - 1
    }

    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }

    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }

    pub fn is_log_y(&self) -> bool {
        self.log_y
    }

    pub fn x_center(&self, i: usize) -> f64 {
        0.5 * (self.x_edges[i] + self.x_edges[i + 1])
    }

    pub fn y_center(&self, j: usize) -> f64 {
        if self.log_y {
            (self.y_edges[j] * self.y_edges[j + 1]).sqrt()
        } else {
            0.5 * (self.y_edges[j] + self.y_edges[j + 1])
        }
    }

    /// Half width of a square grid centered at the origin.
    pub fn half_width(&self) -> f64 {
        self.x_edges
            .iter()
            .chain(&self.y_edges)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn cell_mass(&self, i: usize, j: usize, measure: Measure) -> f64 {
        let dx = self.x_edges[i + 1] - self.x_edges[i];
        let (y0, y1) = (self.y_edges[j], self.y_edges[j + 1]);
        match measure {
            Measure::Lebesgue => dx * (y1 - y0),
            Measure::Hyperbolic => dx * (1.0 / y0 - 1.0 / y1),
        }
    }
}

fn uniform_edges(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// Complex weight, piecewise constant on the cells of a [`Grid`].
#[derive(Clone, Debug)]
pub struct WeightField {
    grid: Grid,
    values: Array2<Complex64>,
    measure: Measure,
}

impl WeightField {
    pub fn new(grid: Grid, values: Array2<Complex64>, measure: Measure) -> Result<Self> {
        if values.dim() != (grid.nx(), grid.ny()) {
            return Err(invalid(format!(
                "values have shape {:?}, grid has {}x{} cells",
                values.dim(),
                grid.nx(),
                grid.ny()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("weight values must be finite"));
        }
        if measure == Measure::Hyperbolic && grid.y_edges[0] <= 0.0 {
            return Err(Error::Domain("hyperbolic weights need y > 0".into()));
        }
        Ok(Self {
            grid,
            values,
            measure,
        })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Grid, measure: Measure, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let values = Array2::from_shape_fn((grid.nx(), grid.ny()), |(i, j)| {
            f(grid.x_center(i), grid.y_center(j))
        });
        Self::new(grid, values, measure)
    }

    pub fn from_real_fn(grid: Grid, measure: Measure, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, measure, |x, y| Complex64::new(f(x, y), 0.0))
    }

    /// Samples a radial profile at the cell centers of a Lebesgue grid.
    pub fn from_profile(grid: Grid, profile: &RadialProfile) -> Result<Self> {
        Self::from_real_fn(grid, Measure::Lebesgue, |x, w| profile.value_at(x, w))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn half_width(&self) -> f64 {
        self.grid.half_width()
    }

    pub fn n(&self) -> usize {
        self.grid.nx()
    }

    pub fn cell_mass(&self, i: usize, j: usize) -> f64 {
        self.grid.cell_mass(i, j, self.measure)
    }

    /// `(|F|, cell mass)` for every cell.
    pub fn moduli(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .indexed_iter()
            .map(move |((i, j), v)| (v.norm(), self.cell_mass(i, j)))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.norm()))
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// Drops the phase; the operator norm bounds depend on `|F|` only.
    pub fn modulus(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| Complex64::new(v.norm(), 0.0)),
            measure: self.measure,
        }
    }

    /// Largest distance from the origin of a cell corner carrying nonzero weight.
    pub fn support_radius(&self) -> f64 {
        let g = &self.grid;
        let mut r2: f64 = 0.0;
        for ((i, j), v) in self.values.indexed_iter() {
            if v.norm() == 0.0 {
                continue;
            }
            let x = g.x_edges[i].abs().max(g.x_edges[i + 1].abs());
            let y = g.y_edges[j].abs().max(g.y_edges[j + 1].abs());
            r2 = r2.max(x * x + y * y);
        }
        r2.sqrt()
    }

    /// Exact distribution function of the piecewise-constant field.
    ///
    /// Breakpoints are `0` followed by every distinct nonzero level except the top one.
    pub fn distribution_steps(&self) -> DistributionFunction {
        let mut cells: Vec<(f64, f64)> = self.moduli().filter(|&(v, _)| v > 0.0).collect();
        DistributionFunction::from_levels(&mut cells)
    }
}

/// Closed-form or sampled radial weight `ρ(|z − z₀|)` on the time-frequency plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `amplitude · χ(π r² < area)`.
    BallIndicator { amplitude: f64, area: f64 },
    /// `amplitude · exp(−decay · π r²)`.
    Gaussian { amplitude: f64, decay: f64 },
    /// `min(amplitude · exp(−decay · π r²), cap)`.
    TruncatedGaussian { amplitude: f64, decay: f64, cap: f64 },
    /// Left-continuous step: `values[i]` on `(radii[i-1], radii[i]]`, zero past the last knot.
    Sampled { radii: Vec<f64>, values: Vec<f64> },
    Constant { amplitude: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub center: (f64, f64),
}

impl RadialProfile {
    pub fn new(kind: ProfileKind) -> Result<Self> {
        Self::centered_at(kind, (0.0, 0.0))
    }

    pub fn centered_at(kind: ProfileKind, center: (f64, f64)) -> Result<Self> {
        validate_kind(&kind)?;
        if !center.0.is_finite() || !center.1.is_finite() {
            return Err(invalid("profile center must be finite"));
        }
        Ok(Self { kind, center })
    }

    pub fn ball(amplitude: f64, area: f64) -> Result<Self> {
        Self::new(ProfileKind::BallIndicator { amplitude, area })
    }

    pub fn gaussian(amplitude: f64, decay: f64) -> Result<Self> {
        Self::new(ProfileKind::Gaussian { amplitude, decay })
    }

    pub fn truncated_gaussian(amplitude: f64, decay: f64, cap: f64) -> Result<Self> {
        Self::new(ProfileKind::TruncatedGaussian {
            amplitude,
            decay,
            cap,
        })
    }

    pub fn sampled(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(ProfileKind::Sampled { radii, values })
    }

    pub fn is_centered(&self) -> bool {
        self.center == (0.0, 0.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        let s = PI * r * r;
        match &self.kind {
            ProfileKind::BallIndicator { amplitude, area } => {
                if s < *area {
                    *amplitude
                } else {
                    0.0
                }
            }
            ProfileKind::Gaussian { amplitude, decay } => amplitude * (-decay * s).exp(),
            ProfileKind::TruncatedGaussian {
                amplitude,
                decay,
                cap,
            } => (amplitude * (-decay * s).exp()).min(*cap),
            ProfileKind::Sampled { radii, values } => {
                let idx = radii.partition_point(|&k| k < r);
                values.get(idx).copied().unwrap_or(0.0)
            }
            ProfileKind::Constant { amplitude } => *amplitude,
        }
    }

    pub fn value_at(&self, x: f64, omega: f64) -> f64 {
        self.value((x - self.center.0).hypot(omega - self.center.1))
    }

    /// Essential supremum.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            ProfileKind::BallIndicator { amplitude, .. }
            | ProfileKind::Gaussian { amplitude, .. }
            | ProfileKind::Constant { amplitude } => *amplitude,
            ProfileKind::TruncatedGaussian { amplitude, cap, .. } => amplitude.min(*cap),
            ProfileKind::Sampled { values, .. } => values.first().copied().unwrap_or(0.0),
        }
    }

    /// Radii where the profile is not smooth (jumps or kinks), in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            ProfileKind::BallIndicator { area, .. } => vec![(area / PI).sqrt()],
            ProfileKind::TruncatedGaussian {
                amplitude,
                decay,
                cap,
            } if amplitude > cap => vec![((amplitude / cap).ln() / (decay * PI)).sqrt()],
            ProfileKind::Sampled { radii, .. } => radii.clone(),
            _ => Vec::new(),
        }
    }

    /// Radius past which the profile is below `rel · sup`; `None` for constants.
    pub fn effective_radius(&self, rel: f64) -> Option<f64> {
        match &self.kind {
            ProfileKind::BallIndicator { area, .. } => Some((area / PI).sqrt()),
            ProfileKind::Gaussian { decay, .. } => Some((-rel.ln() / (decay * PI)).sqrt()),
            ProfileKind::TruncatedGaussian {
                amplitude,
                decay,
                cap,
            } => {
                let level = rel * amplitude.min(*cap);
                Some(((amplitude / level).ln().max(0.0) / (decay * PI)).sqrt())
            }
            ProfileKind::Sampled { radii, .. } => radii.last().copied(),
            ProfileKind::Constant { .. } => None,
        }
    }

    /// `μ(t) = |{ρ > t}|` in closed form.
    pub fn level_mass(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            ProfileKind::BallIndicator { amplitude, area } => {
                if t < *amplitude {
                    *area
                } else {
                    0.0
                }
            }
            ProfileKind::Gaussian { amplitude, decay } => {
                if t < *amplitude {
                    (amplitude / t).ln() / decay
                } else {
                    0.0
                }
            }
            ProfileKind::TruncatedGaussian {
                amplitude,
                decay,
                cap,
            } => {
                if t < amplitude.min(*cap) {
                    (amplitude / t).ln() / decay
                } else {
                    0.0
                }
            }
            ProfileKind::Sampled { radii, values } => {
                // values are nonincreasing, so {ρ > t} is the ball out to the last knot above t
                let count = values.partition_point(|&v| v > t);
                if count == 0 {
                    0.0
                } else {
                    PI * radii[count - 1] * radii[count - 1]
                }
            }
            ProfileKind::Constant { amplitude } => {
                if t < *amplitude {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// `‖ρ‖_{L^p(R²)}` in closed form.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(crate::error::domain("p must be a finite real >= 1"));
        }
        let pth = match &self.kind {
            ProfileKind::BallIndicator { amplitude, area } => amplitude.powf(p) * area,
            ProfileKind::Gaussian { amplitude, decay } => amplitude.powf(p) / (p * decay),
            ProfileKind::TruncatedGaussian {
                amplitude,
                decay,
                cap,
            } => {
                if amplitude <= cap {
                    amplitude.powf(p) / (p * decay)
                } else {
                    let s0 = (amplitude / cap).ln() / decay;
                    cap.powf(p) * (s0 + 1.0 / (p * decay))
                }
            }
            ProfileKind::Sampled { radii, values } => {
                let mut prev = 0.0;
                let mut acc = 0.0;
                for (&r, &v) in radii.iter().zip(values) {
                    acc += v.powf(p) * PI * (r * r - prev * prev);
                    prev = r;
                }
                acc
            }
            ProfileKind::Constant { amplitude } => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    return Err(Error::Divergent(
                        "a nonzero constant weight is not integrable on the plane".into(),
                    ));
                }
            }
        };
        Ok(pth.powf(1.0 / p))
    }
}

fn validate_kind(kind: &ProfileKind) -> Result<()> {
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("{what} must be positive and finite")))
        }
    };
    match kind {
        ProfileKind::BallIndicator { amplitude, area } => {
            positive(*amplitude, "amplitude")?;
            positive(*area, "area")
        }
        ProfileKind::Gaussian { amplitude, decay } => {
            positive(*amplitude, "amplitude")?;
            positive(*decay, "decay")
        }
        ProfileKind::TruncatedGaussian {
            amplitude,
            decay,
            cap,
        } => {
            positive(*amplitude, "amplitude")?;
            positive(*decay, "decay")?;
            positive(*cap, "cap")
        }
        ProfileKind::Sampled { radii, values } => {
            if radii.is_empty() || radii.len() != values.len() {
                return Err(invalid("sampled profile needs matching, nonempty knots and values"));
            }
            if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("profile radii must be positive and strictly increasing"));
            }
            if radii.iter().chain(values).any(|v| !v.is_finite()) {
                return Err(invalid("profile knots and values must be finite"));
            }
            if values.iter().any(|&v| v < 0.0) {
                return Err(invalid("profile values must be nonnegative"));
            }
            if values.windows(2).any(|w| w[1] > w[0]) {
                return Err(invalid("profile values must be nonincreasing in r"));
            }
            Ok(())
        }
        ProfileKind::Constant { amplitude } => {
            if *amplitude >= 0.0 && amplitude.is_finite() {
                Ok(())
            } else {
                Err(invalid("constant amplitude must be finite and nonnegative"))
            }
        }
    }
}
