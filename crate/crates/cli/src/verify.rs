//! Invariant suites behind `phasebound verify`. Everything random is drawn
//! from a ChaCha stream seeded by `--seed`, so reports are reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use phasebound_core::bounds::{
    distribution_bound, g, g_beta, gabor_gaussian_bound, gabor_truncated_bound, gabor_truncated_closed_form,
    wavelet_gaussian_bound, wavelet_truncated_closed_form,
};
use phasebound_core::constraints::{kappa, sigma};
use phasebound_core::extremals::{extremal_signal, extremal_weight_gabor, extremal_weight_wavelet};
use phasebound_core::gabor::{
    assemble_radial, concentration, field_spectrum, lieb_quotient, quadratic_form, radial_eigenvalues, AssemblyOptions,
    Region,
};
use phasebound_core::varprob::{objective, saturate};
use phasebound_core::wavelet::{bergman_diagonal, DiscProfile};
use phasebound_core::{
    bound, decreasing_rearrangement, lambda_root, schwarz_symmetrize, solve_closed_form, solve_kkt_oracle, wavelet_bound,
    Candidate, ConstraintSet, Grid, Kernel, Measure, RadialProfile, Signal, StepFunction, Weight, WeightField,
};

use crate::Suite;

#[derive(Debug, Serialize)]
pub struct Detail {
    pub suite: &'static str,
    pub check: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub suite: &'static str,
    pub seed: u64,
    pub basis: usize,
    pub passed: usize,
    pub failed: usize,
    pub details: Vec<Detail>,
}

type Check = Result<String, String>;

struct Runner {
    suite: &'static str,
    details: Vec<Detail>,
}

impl Runner {
    fn run(&mut self, check: &str, f: impl FnOnce() -> Check) {
        let (passed, message) = match f() {
            Ok(m) => (true, m),
            Err(m) => (false, m),
        };
        self.details.push(Detail { suite: self.suite, check: check.to_owned(), passed, message });
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Result<f64, String> {
    let d = (got - want).abs();
    ensure(d <= tol, || format!("{what}: got {got:.15}, want {want:.15}, |diff| {d:.3e} > {tol:.0e}"))?;
    Ok(d)
}

pub fn run(suite: Suite, seed: u64, basis: usize) -> Report {
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Bounds, Suite::Gabor, Suite::Wavelet, Suite::Varprob, Suite::Rearrange],
        _ => std::slice::from_ref(&suite),
    };
    let mut details = Vec::new();
    for &s in suites {
        let mut r = Runner { suite: name(s), details: Vec::new() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match s {
            Suite::Bounds => bounds(&mut r, &mut rng),
            Suite::Gabor => gabor(&mut r, &mut rng, basis),
            Suite::Wavelet => wavelet(&mut r, basis),
            Suite::Varprob => varprob(&mut r, &mut rng),
            Suite::Rearrange => rearrange(&mut r, &mut rng, basis),
            Suite::All => unreachable!(),
        }
        details.extend(r.details);
    }
    let passed = details.iter().filter(|d| d.passed).count();
    Report { suite: name(suite), seed, basis, passed, failed: details.len() - passed, details }
}

fn name(s: Suite) -> &'static str {
    match s {
        Suite::Bounds => "bounds",
        Suite::Gabor => "gabor",
        Suite::Wavelet => "wavelet",
        Suite::Varprob => "varprob",
        Suite::Rearrange => "rearrange",
        Suite::All => "all",
    }
}

fn bounds(r: &mut Runner, rng: &mut ChaCha8Rng) {
    r.run("examples", || {
        let ball = bound(&ConstraintSet::gabor(1.0, 1.0, 1.0, 1).map_err(err)?).map_err(err)?;
        within("ball", ball.bound, 1.0 - (-1f64).exp(), 1e-15)?;
        let t = bound(&ConstraintSet::gabor(2.0, 1.0, 1.0, 1).map_err(err)?).map_err(err)?;
        within("truncated", t.bound, 1.0 - (-0.5f64).exp() / 2.0, 1e-15)?;
        within("truncated λ", t.lambda.unwrap_or(f64::NAN), 0.5f64.exp(), 1e-15)?;
        let w = bound(&ConstraintSet::wavelet(2.0, f64::INFINITY, 1.0, 1.0).map_err(err)?).map_err(err)?;
        within("wavelet gaussian", w.bound, 2.0 / (4.0 * PI).sqrt() * 0.2f64.sqrt(), 1e-15)?;
        Ok(format!("ball {:.7}, truncated {:.7}, wavelet {:.4}", ball.bound, t.bound, w.bound))
    });
    r.run("regime continuity", || {
        let mut worst: f64 = 0.0;
        for p in [1.25, 1.5, 2.0, 3.0, 5.0] {
            for a in [0.5, 1.0, 3.0] {
                for d in [1u32, 2, 3] {
                    let b = a * kappa(p).powf(d as f64 / p);
                    let gauss = gabor_gaussian_bound(p, b, d);
                    let trunc =
                        if d == 1 { gabor_truncated_closed_form(p, a, b).0 } else { gabor_truncated_bound(p, a, d, a) };
                    worst = worst.max(within(&format!("gabor p={p} A={a} d={d}"), trunc, gauss, 1e-12)?);
                }
                for beta in [0.5, 1.0, 2.5] {
                    let b = a * (4.0 * PI * sigma(p, beta)).powf(1.0 / p);
                    let trunc = wavelet_truncated_closed_form(p, a, b, beta).0;
                    worst = worst.max(within(&format!("wavelet p={p} A={a} β={beta}"), trunc, wavelet_gaussian_bound(p, b, beta), 1e-12)?);
                }
            }
        }
        Ok(format!("max gap {worst:.1e}"))
    });
    r.run("root finder vs closed form", || {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let p = rng.random_range(1.1..6.0);
            let a = rng.random_range(0.1..3.0);
            let b = a * kappa(p).powf(1.0 / p) * rng.random_range(1.01..3.0);
            let c = ConstraintSet::gabor(p, a, b, 1).map_err(err)?;
            let closed = gabor_truncated_closed_form(p, a, b).1;
            let root = lambda_root(&c).map_err(err)?;
            worst = worst.max(within(&format!("{c}"), root, closed, 1e-9 * closed)? / closed);
        }
        Ok(format!("20 draws, max rel err {worst:.1e}"))
    });
    r.run("monotone and dominated", || {
        for _ in 0..50 {
            let p = rng.random_range(1.0..5.0);
            let a = rng.random_range(0.2..4.0);
            let b = rng.random_range(0.05..4.0);
            let d = rng.random_range(1..4);
            let lo = bound(&ConstraintSet::gabor(p, a, b, d).map_err(err)?).map_err(err)?.bound;
            let hi = bound(&ConstraintSet::gabor(p, a, 1.5 * b, d).map_err(err)?).map_err(err)?.bound;
            ensure(hi >= lo - 1e-12, || format!("p={p} A={a} B={b} d={d}: not monotone in B"))?;
            ensure(lo <= a * (1.0 + 1e-12), || format!("p={p} A={a} B={b} d={d}: bound {lo} exceeds A"))?;
        }
        Ok("50 draws".into())
    });
    r.run("concentration functions", || {
        for s in (0..60).map(|i| 10f64.powf(-3.0 + 0.08 * i as f64)) {
            for d in 1..=4 {
                let v = g(s, d).map_err(err)?;
                ensure(v <= s * (1.0 + 1e-12) && v < 1.0 + 1e-15, || format!("G({s}, {d}) = {v}"))?;
            }
            for beta in [0.5, 1.0, 3.0] {
                let v = g_beta(s, beta).map_err(err)?;
                ensure(v <= s * (1.0 + 1e-12) && v < 1.0, || format!("G_β({s}, {beta}) = {v}"))?;
            }
        }
        Ok("G(s) ≤ min(s, 1) on 60 points".into())
    });
}

fn gabor(r: &mut Runner, rng: &mut ChaCha8Rng, basis: usize) {
    r.run("ball eigenvalue", || {
        let mut worst: f64 = 0.0;
        for s in [0.25, 1.0, 4.0] {
            let norm = radial_eigenvalues(&RadialProfile::ball(1.0, s).map_err(err)?, basis).map_err(err)?.norm();
            worst = worst.max(within(&format!("area {s}"), norm, 1.0 - (-s as f64).exp(), 1e-12)?);
        }
        Ok(format!("max err {worst:.1e}"))
    });
    r.run("extremal saturation", || {
        let mut worst: f64 = 0.0;
        for (p, a, b) in [(1.0, 1.0, 1.0), (2.0, f64::INFINITY, 1.0), (2.0, 1.0, 1.0), (3.0, 0.8, 1.5)] {
            let c = ConstraintSet::gabor(p, a, b, 1).map_err(err)?;
            let bd = bound(&c).map_err(err)?.bound;
            let w = extremal_weight_gabor(&c, (0.0, 0.0)).map_err(err)?;
            let spec = radial_eigenvalues(&w, basis).map_err(err)?;
            worst = worst.max(within(&format!("{c}: ‖L_F‖"), spec.norm(), bd, 1e-8)?);
            let m = assemble_radial(&w, basis).map_err(err)?;
            let f = extremal_signal(0.0, 0.0, 0.0).map_err(err)?;
            let form = quadratic_form(&m, &f.hermite_coefficients(basis)).re;
            worst = worst.max(within(&format!("{c}: ⟨L_F φ, φ⟩"), form, bd, 1e-5)?);
        }
        Ok(format!("K = {basis}, max err {worst:.1e}"))
    });
    r.run("isometry", || {
        let whole = Region::Rect { x: (-9.0, 9.0), omega: (-9.0, 9.0) };
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let coeffs = (0..6).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let f = Signal::hermite(coeffs).and_then(|s| s.normalized()).map_err(err)?;
            worst = worst.max(within("‖Vf‖²", concentration(&f, &whole).map_err(err)?, 1.0, 1e-8)?);
        }
        Ok(format!("5 random signals, max err {worst:.1e}"))
    });
    r.run("lieb", || {
        let phi = Signal::window();
        for p in [2.0, 4.0, 8.0] {
            within(&format!("p = {p}"), lieb_quotient(&phi, p).map_err(err)?, (2.0 / p as f64).powf(1.0 / p), 1e-8)?;
        }
        Ok("window attains (2/p)^(1/p)".into())
    });
}

fn wavelet(r: &mut Runner, basis: usize) {
    r.run("disc identity", || {
        let mut worst: f64 = 0.0;
        for beta in [0.5, 1.0, 2.0] {
            for s in [0.1, 1.0, 10.0] {
                let l0 = bergman_diagonal(&DiscProfile::indicator(1.0, s).map_err(err)?, beta, 1).map_err(err)?[0];
                worst = worst.max(within(&format!("β={beta} s={s}"), l0, g_beta(s, beta).map_err(err)?, 1e-12)?);
            }
        }
        Ok(format!("max err {worst:.1e}"))
    });
    r.run("extremal saturation", || {
        let mut worst: f64 = 0.0;
        for (p, a, b, beta) in [(2.0, f64::INFINITY, 1.0, 1.0), (2.0, 1.0, 2.0, 1.0), (3.0, 0.5, 1.0, 0.5), (1.0, 1.0, 1.0, 2.0)] {
            let c = ConstraintSet::wavelet(p, a, b, beta).map_err(err)?;
            let bd = wavelet_bound(&c).map_err(err)?.bound;
            let w = extremal_weight_wavelet(&c, (0.0, 1.0)).map_err(err)?;
            let diag = bergman_diagonal(&w, beta, basis).map_err(err)?;
            worst = worst.max(within(&format!("{c}"), diag[0], bd, 1e-10)?);
            within(&format!("{c}: ‖F‖_p"), w.lp_norm(p).map_err(err)?, b, 1e-8)?;
        }
        Ok(format!("max err {worst:.1e}"))
    });
}

fn constraint_sample(rng: &mut ChaCha8Rng) -> Result<ConstraintSet, String> {
    let p = rng.random_range(1.2..5.0);
    let a = if rng.random_bool(0.25) { f64::INFINITY } else { rng.random_range(0.2..3.0) };
    let b = rng.random_range(0.1..3.0);
    if rng.random_bool(0.5) {
        ConstraintSet::gabor(p, a, b, rng.random_range(1..4)).map_err(err)
    } else {
        ConstraintSet::wavelet(p, a, b, rng.random_range(0.3..3.0)).map_err(err)
    }
}

fn varprob(r: &mut Runner, rng: &mut ChaCha8Rng) {
    let sets: Vec<ConstraintSet> = (0..12).filter_map(|_| constraint_sample(rng).ok()).collect();
    r.run("oracle matches closed form", || {
        let mut worst: f64 = 0.0;
        for c in &sets {
            let exact = solve_closed_form(c).map_err(err)?;
            let oracle = solve_kkt_oracle(c, 400).map_err(err)?;
            for &(t, v) in &oracle.samples {
                let e = exact.eval(t);
                let d = (v - e).abs() / e.abs().max(1.0);
                ensure(d <= 1e-8, || format!("{c}: u({t:.3e}) = {v} vs {e}"))?;
                worst = worst.max(d);
            }
            within(&format!("{c}: objective"), oracle.objective_value, exact.objective_value, 1e-10)?;
        }
        Ok(format!("{} sets, max pointwise rel err {worst:.1e}", sets.len()))
    });
    r.run("competitors lose", || {
        let mut min_gap = f64::INFINITY;
        for c in &sets {
            let exact = solve_closed_form(c).map_err(err)?;
            let end = if c.a.is_finite() { c.a } else { exact.u.support_end() };
            for _ in 0..20 {
                let raw: Vec<f64> = (0..rng.random_range(2..30)).map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
                let u = decreasing_rearrangement(&StepFunction::from_samples(end * rng.random_range(0.3..1.5), raw).map_err(err)?);
                let u = saturate(&u, c.p, c.b).map_err(err)?;
                let gap = exact.objective_value - objective(&u, c.a, c.kernel());
                ensure(gap > 0.0, || format!("{c}: a competitor reached the maximum (gap {gap:.3e})"))?;
                min_gap = min_gap.min(gap);
            }
        }
        Ok(format!("{} competitors, smallest gap {min_gap:.1e}", 20 * sets.len()))
    });
}

fn rearrange(r: &mut Runner, rng: &mut ChaCha8Rng, basis: usize) {
    r.run("decreasing rearrangement", || {
        for _ in 0..30 {
            let values: Vec<f64> = (0..rng.random_range(1..40)).map(|_| rng.random_range(0.0..10.0)).collect();
            let u = StepFunction::from_samples(rng.random_range(0.1..5.0), values).map_err(err)?;
            let star = decreasing_rearrangement(&u);
            ensure(star.is_nonincreasing(), || "rearrangement is not nonincreasing".into())?;
            for q in [1.0, 2.0, 3.5] {
                within(&format!("L^{q} norm"), star.lp_norm(q), u.lp_norm(q), 1e-10 * u.lp_norm(q).max(1.0))?;
            }
        }
        Ok("30 step functions".into())
    });
    r.run("symmetrization raises the norm", || {
        let grid = Grid::square(3.0, 64).map_err(err)?;
        let opts = AssemblyOptions::with_basis(basis);
        let mut min_slack = f64::INFINITY;
        for case in 0..4 {
            let cells: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(0.0..1.0)).collect();
            let field = WeightField::from_real_fn(grid.clone(), Measure::Lebesgue, |x, y| {
                let i = (((x + 3.0) / 6.0 * 64.0) as usize).min(63);
                let j = (((y + 3.0) / 6.0 * 64.0) as usize).min(63);
                if x.hypot(y) < 2.0 { cells[i * 64 + j] } else { 0.0 }
            })
            .map_err(err)?;
            let norm = field_spectrum(&field, &opts).map_err(err)?.norm();
            let star = schwarz_symmetrize(&field).map_err(err)?;
            for q in [1.0, 2.0] {
                let (a, b) = (Weight::lp_norm(&star, q, Measure::Lebesgue).map_err(err)?, field.lp_norm(q, Measure::Lebesgue).map_err(err)?);
                within(&format!("case {case}: L^{q} norm of F*"), a, b, 1e-8 * b.max(1.0))?;
            }
            let star_norm = radial_eigenvalues(&star, basis).map_err(err)?.norm();
            ensure(norm <= star_norm + 1e-6, || format!("case {case}: ‖L_F‖ = {norm} > ‖L_F*‖ = {star_norm}"))?;
            let bd = distribution_bound(&field.distribution_steps(), Kernel::Gabor { d: 1 });
            within(&format!("case {case}: ‖L_F*‖ vs distribution bound"), star_norm, bd, 1e-4)?;
            min_slack = min_slack.min(star_norm - norm);
        }
        Ok(format!("4 fields, min slack {min_slack:.2e}"))
    });
}
