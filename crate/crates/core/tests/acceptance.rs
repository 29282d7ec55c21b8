//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasebound_core::bounds::{
    distribution_bound, gabor_gaussian_bound, gabor_truncated_bound, gabor_truncated_closed_form,
    profile_distribution_bound, wavelet_gaussian_bound, wavelet_truncated_closed_form,
};
use phasebound_core::constraints::{kappa, sigma};
use phasebound_core::extremals::{extremal_weight_gabor, extremal_weight_wavelet};
use phasebound_core::gabor::{assemble_radial, field_spectrum, lieb_quotient, radial_eigenvalues, spectrum, AssemblyOptions};
use phasebound_core::varprob::{objective, saturate};
use phasebound_core::wavelet::{
    assemble_wavelet_symbol, bergman_diagonal, disc_radius_sq, DiscProfile, HyperbolicDisc, WaveletAssemblyOptions,
};
use phasebound_core::{
    bound, decreasing_rearrangement, gabor_bound, lambda_root, schwarz_symmetrize, solve_closed_form,
    solve_kkt_oracle, wavelet_bound, ConstraintSet, Grid, Kernel, Measure, RadialProfile, Signal, StepFunction,
    WeightField,
};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within(what: &str, got: f64, want: f64, tol: f64) -> Result<f64, String> {
    let d = (got - want).abs();
    check(d <= tol, || format!("{what}: got {got:.15}, want {want:.15} (|diff| {d:.3e} > {tol:.0e})"))?;
    Ok(d)
}

fn ball_sharpness() -> Outcome {
    let start = Instant::now();
    let ball = RadialProfile::ball(1.0, 1.0).map_err(err)?;
    let diag = radial_eigenvalues(&ball, 32).map_err(err)?.norm();
    let full = spectrum(&assemble_radial(&ball, 32).map_err(err)?, 0.0).map_err(err)?.norm();
    let want = 1.0 - (-1f64).exp();
    let d1 = within("diagonal", diag, want, 1e-6)?;
    let d2 = within("diagonalized assembly", full, want, 1e-6)?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("‖L‖ = {full:.9} (diag err {d1:.1e}, assembly err {d2:.1e}, {elapsed:.2?})"))
}

fn gaussian_sharpness() -> Outcome {
    let c = ConstraintSet::gabor(2.0, f64::INFINITY, 1.0, 1).map_err(err)?;
    let w = extremal_weight_gabor(&c, (0.0, 0.0)).map_err(err)?;
    let lam0 = radial_eigenvalues(&w, 8).map_err(err)?.norm();
    within("λ0 of √2 e^{-πr²}", lam0, 0.5f64.sqrt(), 1e-8)?;
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let b = 1.3;
        let c = ConstraintSet::gabor(p, f64::INFINITY, b, 1).map_err(err)?;
        let w = extremal_weight_gabor(&c, (0.0, 0.0)).map_err(err)?;
        let lam0 = radial_eigenvalues(&w, 8).map_err(err)?.norm();
        let k = kappa(p);
        worst = worst.max(within(&format!("p = {p}"), lam0, k.powf(k) * b, 1e-8)?);
        within("gabor_bound", gabor_bound(&c).map_err(err)?.bound, k.powf(k) * b, 1e-14)?;
    }
    Ok(format!("λ0 = {lam0:.10}; κ^κ B matched for p ∈ {{1.5, 2, 3}} (max err {worst:.1e})"))
}

fn truncated_sharpness() -> Outcome {
    let c = ConstraintSet::gabor(2.0, 1.0, 1.0, 1).map_err(err)?;
    let w = extremal_weight_gabor(&c, (0.0, 0.0)).map_err(err)?;
    let lam0 = radial_eigenvalues(&w, 8).map_err(err)?.norm();
    let want = 1.0 - (-0.5f64).exp() / 2.0;
    within("λ0 of min(e^{1/2} e^{-πr²}, 1)", lam0, want, 1e-8)?;
    within("bound", gabor_bound(&c).map_err(err)?.bound, want, 1e-12)?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p: f64 = rng.random_range(1.2..4.0);
        let a: f64 = rng.random_range(0.5..2.0);
        // (B/A)^p strictly above κ_p
        let ratio = kappa(p) * rng.random_range(1.05..4.0);
        let b = a * ratio.powf(1.0 / p);
        let c = ConstraintSet::gabor(p, a, b, 1).map_err(err)?;
        let w = extremal_weight_gabor(&c, (0.0, 0.0)).map_err(err)?;
        let norm = spectrum(&assemble_radial(&w, 12).map_err(err)?, 0.0).map_err(err)?.norm();
        let bd = gabor_bound(&c).map_err(err)?.bound;
        worst = worst.max(within(&format!("(p, A, B) = ({p:.3}, {a:.3}, {b:.3})"), norm, bd, 1e-6)?);
    }
    Ok(format!("λ0 = {lam0:.10}; 10 random supercritical triples, max quadrature err {worst:.1e}"))
}

fn regime_continuity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in [1.25, 1.5, 2.0, 3.0, 5.0] {
        for a in [0.5, 1.0, 3.0] {
            let k = kappa(p);
            for d in [1u32, 2, 3] {
                let b = a * k.powf(d as f64 / p);
                let gauss = gabor_gaussian_bound(p, b, d);
                let trunc = if d == 1 {
                    gabor_truncated_closed_form(p, a, b).0
                } else {
                    gabor_truncated_bound(p, a, d, a)
                };
                worst = worst.max(within(&format!("gabor p={p} A={a} d={d}"), trunc, gauss, 1e-12)?);
                cases += 1;
            }
            for beta in [0.5, 1.0, 2.5] {
                let b = a * (4.0 * PI * sigma(p, beta)).powf(1.0 / p);
                let gauss = wavelet_gaussian_bound(p, b, beta);
                let (trunc, lambda) = wavelet_truncated_closed_form(p, a, b, beta);
                worst = worst.max(within(&format!("wavelet p={p} A={a} β={beta}"), trunc, gauss, 1e-12)?);
                within("λ at the threshold", lambda, a, 1e-12 * a)?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} threshold cases, max gap {worst:.1e} ({:.2?})", start.elapsed()))
}

fn constraint_sets() -> Vec<ConstraintSet> {
    let inf = f64::INFINITY;
    let g = |p, a, b, d| ConstraintSet::gabor(p, a, b, d).expect("valid");
    let w = |p, a, b, beta| ConstraintSet::wavelet(p, a, b, beta).expect("valid");
    vec![
        g(2.0, inf, 1.0, 1),
        g(2.0, 1.0, 1.0, 1),
        g(1.5, 2.0, 0.5, 1),
        g(3.0, 1.0, 2.0, 1),
        g(4.0, 0.7, 0.6, 1),
        g(1.2, 1.0, 3.0, 1),
        g(2.0, 1.0, 1.0, 2),
        g(2.0, inf, 1.0, 2),
        g(3.0, 1.5, 2.0, 2),
        g(2.5, 1.0, 1.0, 3),
        w(2.0, inf, 1.0, 1.0),
        w(2.0, 1.0, 2.0, 1.0),
        w(3.0, 0.5, 4.0, 0.5),
        w(3.0, inf, 1.0, 0.5),
        w(1.5, 1.0, 0.5, 2.0),
        w(1.5, 0.2, 3.0, 2.0),
        w(2.0, 1.0, 5.0, 0.75),
        w(4.0, 2.0, 1.0, 1.5),
        w(1.2, 1.0, 10.0, 1.0),
        w(2.5, 0.3, 1.0, 3.0),
    ]
}

fn variational_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_u: f64 = 0.0;
    let mut worst_obj: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for c in constraint_sets() {
        let exact = solve_closed_form(&c).map_err(err)?;
        let oracle = solve_kkt_oracle(&c, 400).map_err(err)?;
        for &(t, v) in &oracle.samples {
            let e = exact.eval(t);
            let d = (v - e).abs() / e.abs().max(1.0);
            check(d <= 1e-8, || format!("{c}: u({t:.3e}) = {v} vs closed form {e} (rel {d:.2e})"))?;
            worst_u = worst_u.max(d);
        }
        worst_obj = worst_obj.max(within(&format!("{c}: objective"), oracle.objective_value, exact.objective_value, 1e-10)?);

        let kernel = c.kernel();
        let end = if c.a.is_finite() { c.a } else { exact.u_support_end() };
        for _ in 0..50 {
            let n = rng.random_range(2..40);
            let span = end * rng.random_range(0.3..1.5);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).powi(3)).collect();
            let u = decreasing_rearrangement(&StepFunction::from_samples(span, raw).map_err(err)?);
            let u = saturate(&u, c.p, c.b).map_err(err)?;
            let value = objective(&u, c.a, kernel);
            let gap = exact.objective_value - value;
            check(gap > 0.0, || format!("{c}: competitor scored {value} >= {}", exact.objective_value))?;
            min_gap = min_gap.min(gap);
        }
    }
    Ok(format!(
        "20 sets: max pointwise rel err {worst_u:.1e}, objective err {worst_obj:.1e}; 1000 competitors, smallest gap {min_gap:.1e}"
    ))
}

trait SupportEnd {
    fn u_support_end(&self) -> f64;
}

impl SupportEnd for phasebound_core::VariationalSolution {
    fn u_support_end(&self) -> f64 {
        use phasebound_core::Candidate;
        self.u.support_end()
    }
}

/// Nonnegative field supported in the disc of radius 2.5.
fn random_field(rng: &mut ChaCha8Rng, grid: &Grid, kind: usize) -> WeightField {
    let r_max: f64 = 2.5;
    let amp: f64 = rng.random_range(0.3..3.0);
    let values: Vec<f64> = match kind % 3 {
        0 => {
            let bumps: Vec<(f64, f64, f64, f64, f64)> = (0..rng.random_range(1..4))
                .map(|_| {
                    (
                        rng.random_range(-1.2..1.2),
                        rng.random_range(-1.2..1.2),
                        rng.random_range(0.3..2.0),
                        rng.random_range(0.3..2.0),
                        rng.random_range(0.2..1.0),
                    )
                })
                .collect();
            (0..grid.nx() * grid.ny())
                .map(|idx| {
                    let (x, y) = (grid.x_center(idx / grid.ny()), grid.y_center(idx % grid.ny()));
                    bumps.iter().map(|&(cx, cy, sx, sy, h)| h * (-(((x - cx) / sx).powi(2) + ((y - cy) / sy).powi(2))).exp()).sum()
                })
                .collect()
        }
        1 => (0..grid.nx() * grid.ny()).map(|_| rng.random_range(0.0..1.0)).collect(),
        _ => {
            let rects: Vec<[f64; 4]> = (0..rng.random_range(1..5))
                .map(|_| {
                    let (x0, y0) = (rng.random_range(-2.0..1.5), rng.random_range(-2.0..1.5));
                    [x0, x0 + rng.random_range(0.2..1.5), y0, y0 + rng.random_range(0.2..1.5)]
                })
                .collect();
            (0..grid.nx() * grid.ny())
                .map(|idx| {
                    let (x, y) = (grid.x_center(idx / grid.ny()), grid.y_center(idx % grid.ny()));
                    rects.iter().filter(|r| x > r[0] && x < r[1] && y > r[2] && y < r[3]).count() as f64
                })
                .collect()
        }
    };
    let values = ndarray::Array2::from_shape_fn((grid.nx(), grid.ny()), |(i, j)| {
        let inside = grid.x_center(i).hypot(grid.y_center(j)) < r_max;
        Complex64::new(if inside { amp * values[i * grid.ny() + j] } else { 0.0 }, 0.0)
    });
    WeightField::new(grid.clone(), values, Measure::Lebesgue).expect("finite field")
}

fn distribution_and_symmetrization() -> Outcome {
    let start = Instant::now();
    let grid = Grid::square(3.0, 128).map_err(err)?;
    let opts = AssemblyOptions::with_basis(48);
    let kernel = Kernel::Gabor { d: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_slack = f64::INFINITY;
    let mut min_sym_slack = f64::INFINITY;
    let mut worst_eq: f64 = 0.0;
    for case in 0..25 {
        let field = random_field(&mut rng, &grid, case);
        let spec = field_spectrum(&field, &opts).map_err(err)?;
        let norm = spec.norm();
        let mu = field.distribution_steps();
        let bd = distribution_bound(&mu, kernel);
        check(norm <= bd + 1e-6, || format!("case {case}: ‖L_F‖ = {norm} exceeds ∫G(μ) = {bd}"))?;
        min_slack = min_slack.min(bd - norm);

        let star = schwarz_symmetrize(&field).map_err(err)?;
        let star_norm = radial_eigenvalues(&star, 48).map_err(err)?.norm();
        check(norm <= star_norm + 1e-6, || format!("case {case}: ‖L_F‖ = {norm} exceeds ‖L_F*‖ = {star_norm}"))?;
        min_sym_slack = min_sym_slack.min(star_norm - norm);
        // F* is radial nonincreasing with the same μ: equality
        worst_eq = worst_eq.max(within(&format!("case {case}: ‖L_F*‖ vs ∫G(μ)"), star_norm, bd, 1e-4)?);
    }
    for profile in [
        RadialProfile::gaussian(1.7, 0.8).map_err(err)?,
        RadialProfile::truncated_gaussian(3.0, 0.5, 1.2).map_err(err)?,
        RadialProfile::ball(2.0, 3.0).map_err(err)?,
        RadialProfile::sampled(vec![0.3, 0.8, 1.1, 2.0], vec![3.0, 2.0, 2.0, 0.5]).map_err(err)?,
    ] {
        let lam0 = radial_eigenvalues(&profile, 48).map_err(err)?.norm();
        let bd = profile_distribution_bound(&profile, kernel).map_err(err)?;
        worst_eq = worst_eq.max(within("radial profile equality", lam0, bd, 1e-4)?);
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "25 fields: min slack {min_slack:.2e}, min symmetrization slack {min_sym_slack:.2e}, radial equality err {worst_eq:.1e} ({elapsed:.1?})"
    ))
}

fn lieb_recovery() -> Outcome {
    let h1 = Signal::hermite(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).map_err(err)?;
    let mut worst: f64 = 0.0;
    for p in [2.0f64, 4.0, 8.0] {
        let want = (2.0 / p).powf(1.0 / p);
        let got = lieb_quotient(&Signal::window(), p).map_err(err)?;
        worst = worst.max(within(&format!("window, p = {p}"), got, want, 1e-4)?);
        let other = lieb_quotient(&h1, p).map_err(err)?;
        // p = 2 is an identity (Moyal), so strictness applies only for p > 2
        if p > 2.0 {
            check(other < want - 1e-4, || format!("h1 at p = {p}: {other} not below {want}"))?;
        } else {
            within("h1, p = 2", other, 1.0, 1e-4)?;
        }
    }
    Ok(format!("window attains (2/p)^(1/p) for p ∈ {{2, 4, 8}} (max err {worst:.1e}); h1 strictly below for p > 2"))
}

fn wavelet_sharpness() -> Outcome {
    let mut worst_beta: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0, 4.0] {
        for s in [0.1, 1.0, 5.0, 50.0] {
            let d = bergman_diagonal(&DiscProfile::indicator(1.0, s).map_err(err)?, beta, 1).map_err(err)?;
            let want = phasebound_core::bounds::g_beta(s, beta).map_err(err)?;
            worst_beta = worst_beta.max(within(&format!("β={beta}, s={s}"), d[0], want, 1e-12)?);
        }
    }

    let mut worst_asm: f64 = 0.0;
    for (beta, s) in [(1.0, 1.0), (2.0, 5.0)] {
        let disc = HyperbolicDisc::new((0.0, 1.0), s).map_err(err)?;
        let r = disc_radius_sq(s).sqrt();
        let (y0, y1) = ((1.0 - r) / (1.0 + r), (1.0 + r) / (1.0 - r));
        let xw = 2.0 * r / (1.0 - r * r);
        let grid = Grid::half_plane((-1.1 * xw, 1.1 * xw), 256, (0.9 * y0, 1.1 * y1), 256).map_err(err)?;
        let opts = WaveletAssemblyOptions::new(beta, 8);
        let m = assemble_wavelet_symbol(|x, y| if disc.contains(x, y) { 1.0 } else { 0.0 }, &grid, &opts).map_err(err)?;
        let lam0 = spectrum(&m, 0.0).map_err(err)?.norm();
        let want = phasebound_core::bounds::g_beta(s, beta).map_err(err)?;
        worst_asm = worst_asm.max(within(&format!("assembly β={beta}, s={s}"), lam0, want, 1e-3)?);
    }

    let mut worst_ext: f64 = 0.0;
    let inf = f64::INFINITY;
    for (p, beta) in [(2.0, 1.0), (3.0, 0.5), (1.0, 2.0)] {
        let abs: &[(f64, f64)] = if p == 1.0 { &[(1.0, 1.0), (2.0, 0.5)] } else { &[(inf, 1.0), (1.0, 1.0), (0.3, 2.0)] };
        for &(a, b) in abs {
            let c = ConstraintSet::wavelet(p, a, b, beta).map_err(err)?;
            let w = extremal_weight_wavelet(&c, (0.0, 1.0)).map_err(err)?;
            let lam0 = bergman_diagonal(&w, beta, 1).map_err(err)?[0];
            let bd = wavelet_bound(&c).map_err(err)?.bound;
            worst_ext = worst_ext.max(within(&format!("extremal {c}"), lam0, bd, 1e-10)?);
        }
    }
    Ok(format!(
        "Beta identity err {worst_beta:.1e}; 256² assembly err {worst_asm:.1e}; extremal saturation err {worst_ext:.1e}"
    ))
}

fn general_d() -> Outcome {
    let c = ConstraintSet::gabor(2.0, 1.0, 1.0, 2).map_err(err)?;
    let lambda = lambda_root(&c).map_err(err)?;
    let want = ((7f64.sqrt() - 1.0) / 2.0).exp();
    let d = within("λ", lambda, want, 1e-10)?;
    let report = bound(&c).map_err(err)?;
    // pinned by independent 30-digit quadrature: 0.489934898430102405798509920477
    within("bound", report.bound, 0.489_934_898_430_102_4, 1e-10)?;
    check(report.regime.as_str() == "truncated", || format!("regime {}", report.regime.as_str()))?;
    Ok(format!("λ = {lambda:.12} (err {d:.1e}), bound = {:.10}", report.bound))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("ball sharpness", ball_sharpness),
        ("gaussian sharpness", gaussian_sharpness),
        ("truncated-gaussian sharpness", truncated_sharpness),
        ("regime continuity", regime_continuity),
        ("variational optimality", variational_optimality),
        ("distribution bound and symmetrization", distribution_and_symmetrization),
        ("Lieb recovery", lieb_recovery),
        ("wavelet sharpness", wavelet_sharpness),
        ("general-d bound path", general_d),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} — {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} — {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
