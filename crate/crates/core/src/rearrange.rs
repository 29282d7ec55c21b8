//! Distribution functions, decreasing rearrangement and Schwarz symmetrization.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::weights::{Measure, ProfileKind, RadialProfile, WeightField};

/// Lower end of the threshold sweep, relative to the essential supremum.
pub const THRESHOLD_FLOOR: f64 = 1e-6;

/// Right-continuous, nonincreasing `μ(t)`.
///
/// `μ(t) = masses[i]` on `[breakpoints[i], breakpoints[i+1])`, the last piece
/// ending at `essential_sup`; `μ(t) = 0` for `t >= essential_sup` and
/// `μ(t) = masses[0]` below the first breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFunction {
    breakpoints: Vec<f64>,
    masses: Vec<f64>,
    essential_sup: f64,
}

impl DistributionFunction {
    pub fn new(breakpoints: Vec<f64>, masses: Vec<f64>, essential_sup: f64) -> Result<Self> {
        if breakpoints.len() != masses.len() {
            return Err(invalid("breakpoints and masses must have equal length"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if breakpoints.iter().any(|&t| t < 0.0 || !t.is_finite()) {
            return Err(invalid("breakpoints must be finite and nonnegative"));
        }
        if masses.iter().any(|&m| !(m >= 0.0)) {
            return Err(invalid("masses must be nonnegative"));
        }
        if masses.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("masses must be nonincreasing"));
        }
        if !(essential_sup >= 0.0) || breakpoints.last().is_some_and(|&t| t >= essential_sup) {
            return Err(invalid("essential_sup must exceed every breakpoint"));
        }
        Ok(Self {
            breakpoints,
            masses,
            essential_sup,
        })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            masses: Vec::new(),
            essential_sup: 0.0,
        }
    }

    /// Exact step distribution of finitely many `(level, mass)` atoms.
    pub(crate) fn from_levels(cells: &mut [(f64, f64)]) -> Self {
        cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        if cells.is_empty() {
            return Self::zero();
        }
        // Walk levels downward, accumulating the mass strictly above each one.
        let mut levels_desc: Vec<(f64, f64)> = Vec::new();
        let mut above = 0.0;
        let mut k = 0;
        while k < cells.len() {
            let level = cells[k].0;
            levels_desc.push((level, above));
            while k < cells.len() && cells[k].0 == level {
                above += cells[k].1;
                k += 1;
            }
        }
        let essential_sup = levels_desc[0].0;
        let mut breakpoints = vec![0.0];
        let mut masses = vec![above];
        for &(level, mass_above) in levels_desc.iter().skip(1).rev() {
            breakpoints.push(level);
            masses.push(mass_above);
        }
        Self {
            breakpoints,
            masses,
            essential_sup,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn essential_sup(&self) -> f64 {
        self.essential_sup
    }

    pub fn is_zero(&self) -> bool {
        self.masses.iter().all(|&m| m == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= self.essential_sup || self.masses.is_empty() {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.masses[idx.saturating_sub(1)]
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let first = self
            .breakpoints
            .first()
            .filter(|&&t| t > 0.0)
            .map(|&t| (0.0, t, self.masses[0]));
        let rest = self.breakpoints.iter().enumerate().map(move |(i, &t)| {
            let end = self
                .breakpoints
                .get(i + 1)
                .copied()
                .unwrap_or(self.essential_sup);
            (t, end, self.masses[i])
        });
        first.into_iter().chain(rest)
    }

    /// `∫_0^∞ g(μ(t)) dt` for the step representation, with `g(0) = 0` assumed.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.pieces().map(|(a, b, m)| g(m) * (b - a)).sum()
    }

    /// `p ∫ t^{p−1} μ(t) dt`, which equals `‖F‖_p^p`.
    pub fn moment(&self, p: f64) -> f64 {
        self.pieces()
            .map(|(a, b, m)| if m == 0.0 { 0.0 } else { m * (b.powf(p) - a.powf(p)) })
            .sum()
    }
}

/// Geometric thresholds from `sup · THRESHOLD_FLOOR` up to (excluding) `sup`.
pub fn geometric_thresholds(sup: f64, n_levels: usize) -> Vec<f64> {
    let lo = (sup * THRESHOLD_FLOOR).ln();
    let hi = sup.ln();
    (0..n_levels)
        .map(|i| (lo + (hi - lo) * i as f64 / n_levels as f64).exp())
        .collect()
}

/// Anything with a modulus that can be measured level by level.
pub trait Weight {
    fn sup_norm(&self) -> f64;
    fn lp_norm(&self, p: f64, measure: Measure) -> Result<f64>;
    fn distribution_function(&self, n_levels: usize) -> Result<DistributionFunction>;
}

pub fn distribution_function<W: Weight + ?Sized>(w: &W, n_levels: usize) -> Result<DistributionFunction> {
    w.distribution_function(n_levels)
}

pub fn lp_norm<W: Weight + ?Sized>(w: &W, p: f64, measure: Measure) -> Result<f64> {
    w.lp_norm(p, measure)
}

fn check_levels(n_levels: usize) -> Result<()> {
    if n_levels < 2 {
        return Err(invalid("n_levels must be at least 2"));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(domain("p must be a finite real >= 1"));
    }
    Ok(())
}

impl Weight for WeightField {
    fn sup_norm(&self) -> f64 {
        WeightField::sup_norm(self)
    }

    fn lp_norm(&self, p: f64, measure: Measure) -> Result<f64> {
        check_p(p)?;
        if measure == Measure::Hyperbolic && self.grid().y_edges()[0] <= 0.0 {
            return Err(domain("hyperbolic norm needs a grid inside y > 0"));
        }
        let g = self.grid();
        let sum: f64 = self
            .values()
            .indexed_iter()
            .map(|((i, j), v)| v.norm().powf(p) * g.cell_mass(i, j, measure))
            .sum();
        Ok(sum.powf(1.0 / p))
    }

    fn distribution_function(&self, n_levels: usize) -> Result<DistributionFunction> {
        check_levels(n_levels)?;
        let sup = self.sup_norm();
        if sup == 0.0 {
            return Ok(DistributionFunction::zero());
        }
        let thresholds = geometric_thresholds(sup, n_levels);
        let g = self.grid();
        let uniform = self.measure() == Measure::Lebesgue && is_uniform(g.x_edges()) && is_uniform(g.y_edges());
        let masses = thresholds
            .iter()
            .map(|&t| {
                if uniform {
                    let count = self.values().iter().filter(|v| v.norm() > t).count();
                    count as f64 * self.cell_mass(0, 0)
                } else {
                    self.moduli().filter(|&(v, _)| v > t).map(|(_, m)| m).sum()
                }
            })
            .collect();
        DistributionFunction::new(thresholds, masses, sup)
    }
}

fn is_uniform(edges: &[f64]) -> bool {
    let h = edges[1] - edges[0];
    edges.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs())
}

impl Weight for RadialProfile {
    fn sup_norm(&self) -> f64 {
        RadialProfile::sup_norm(self)
    }

    fn lp_norm(&self, p: f64, measure: Measure) -> Result<f64> {
        if measure != Measure::Lebesgue {
            return Err(domain("radial profiles live on the time-frequency plane (Lebesgue measure)"));
        }
        RadialProfile::lp_norm(self, p)
    }

    fn distribution_function(&self, n_levels: usize) -> Result<DistributionFunction> {
        check_levels(n_levels)?;
        let sup = self.sup_norm();
        if sup == 0.0 {
            return Ok(DistributionFunction::zero());
        }
        if matches!(self.kind, ProfileKind::Constant { .. }) {
            return Err(Error::Divergent("constant weight has infinite level sets".into()));
        }
        let thresholds = geometric_thresholds(sup, n_levels);
        let masses = thresholds.iter().map(|&t| self.level_mass(t)).collect();
        DistributionFunction::new(thresholds, masses, sup)
    }
}

/// Nonnegative step function on `(0, A)`: `values[i]` on `[edges[i], edges[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(invalid("a step function needs one more edge than values"));
        }
        if edges[0] != 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) || !edges.iter().all(|e| e.is_finite()) {
            return Err(invalid("edges must start at 0, be finite and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("step values must be finite"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(invalid("step values must be nonnegative"));
        }
        Ok(Self { edges, values })
    }

    /// Uniform cells over `(0, a)`.
    pub fn from_samples(a: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(invalid("no samples"));
        }
        let edges = (0..=n).map(|i| a * i as f64 / n as f64).collect();
        Self::new(edges, values)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().expect("nonempty")
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.end() {
            return 0.0;
        }
        let idx = self.edges.partition_point(|&e| e <= t);
        self.values[idx - 1]
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.edges
            .windows(2)
            .zip(&self.values)
            .map(|(e, &v)| (e[0], e[1], v))
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// `p ∫ t^{p−1} u(t) dt`.
    pub fn moment(&self, p: f64) -> f64 {
        self.cells().map(|(a, b, v)| v * (b.powf(p) - a.powf(p))).sum()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.cells()
            .map(|(a, b, v)| v.powf(p) * (b - a))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `∫ g(u(t)) dt`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.cells().map(|(a, b, v)| g(v) * (b - a)).sum()
    }

    /// Measure of `{u > s}`.
    pub fn level_measure(&self, s: f64) -> f64 {
        self.cells().filter(|c| c.2 > s).map(|(a, b, _)| b - a).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            edges: self.edges.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// The nonincreasing, right-continuous function on `(0, A)` equimeasurable with `u`.
pub fn decreasing_rearrangement(u: &StepFunction) -> StepFunction {
    let mut cells: Vec<(f64, f64)> = u.cells().map(|(a, b, v)| (v, b - a)).collect();
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let mut edges = vec![0.0];
    let mut values: Vec<f64> = Vec::with_capacity(cells.len());
    let mut t = 0.0;
    for (v, len) in cells {
        t += len;
        if values.last() == Some(&v) {
            *edges.last_mut().expect("nonempty") = t;
        } else {
            values.push(v);
            edges.push(t);
        }
    }
    // Pin the right end exactly; the running sum can drift by an ulp.
    *edges.last_mut().expect("nonempty") = u.end();
    StepFunction { edges, values }
}

/// Sampled-value convenience wrapper: errors on negative samples.
pub fn decreasing_rearrangement_samples(a: f64, samples: &[f64]) -> Result<StepFunction> {
    let u = StepFunction::from_samples(a, samples.to_vec())?;
    Ok(decreasing_rearrangement(&u))
}

/// Radial nonincreasing profile with the same distribution function as `|w|`, centered at the origin.
pub fn schwarz_symmetrize(w: &WeightField) -> Result<RadialProfile> {
    if w.measure() != Measure::Lebesgue {
        return Err(domain(
            "Schwarz symmetrization acts on the time-frequency plane; use the hyperbolic variant for half-plane fields",
        ));
    }
    let steps = w.distribution_steps();
    if steps.is_zero() {
        return RadialProfile::new(ProfileKind::Constant { amplitude: 0.0 });
    }
    let (radii, values) = steps_to_knots(&steps, |mass| (mass / PI).sqrt());
    if values.len() == 1 {
        return RadialProfile::ball(values[0], PI * radii[0] * radii[0]);
    }
    RadialProfile::sampled(radii, values)
}

/// Knots of the radial step profile whose level sets have the masses of `steps`.
///
/// Level `a_j` is carried out to the radius enclosing the mass of `{|F| >= a_j}`.
pub(crate) fn steps_to_knots(
    steps: &DistributionFunction,
    radius_of_mass: impl Fn(f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let bps = steps.breakpoints();
    let masses = steps.masses();
    let mut radii = Vec::with_capacity(bps.len());
    let mut values = Vec::with_capacity(bps.len());
    // Level strictly above breakpoint i is the next breakpoint (or the sup).
    for i in (0..bps.len()).rev() {
        let level = bps.get(i + 1).copied().unwrap_or(steps.essential_sup());
        radii.push(radius_of_mass(masses[i]));
        values.push(level);
    }
    (radii, values)
}
