use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma_lr;

use phasebound_core::gabor::{
    assemble_operator, assemble_radial, concentration, hermite_diagonal, hermite_functions, hermite_phase_basis,
    lieb_quotient, operator_norm, power_iteration, radial_eigenvalues, spectrum, stft, AssemblyOptions, Region,
};
use phasebound_core::{Error, Grid, Measure, RadialProfile, Signal, WeightField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_hermite(rng: &mut ChaCha8Rng, k: usize) -> Signal {
    Signal::hermite((0..k).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .unwrap()
        .normalized()
        .unwrap()
}

#[test]
fn window_transform_is_a_gaussian() {
    let phi = Signal::window();
    for (x, w) in [(0.0, 0.0), (0.3, -1.2), (2.0, 1.0), (-1.5, 0.4)] {
        assert_abs_diff_eq!(phi.stft_at(x, w).norm_sqr(), (-PI * (x * x + w * w)).exp(), epsilon = 1e-14);
    }
    // the sampled window agrees with the Hermite form
    let sampled = Signal::from_fn(8.0, 2049, |t| c(2f64.powf(0.25) * (-PI * t * t).exp(), 0.0)).unwrap();
    for (x, w) in [(0.0, 0.0), (0.7, 0.9), (-1.0, 2.0)] {
        assert_abs_diff_eq!(sampled.stft_at(x, w).norm(), phi.stft_at(x, w).norm(), epsilon = 1e-10);
    }
}

#[test]
fn hermite_transforms_are_poisson_weights() {
    for k in 0..=8 {
        for (x, w) in [(0.2, 0.1), (1.0, -0.5), (-1.3, 1.7)] {
            let s = PI * (x * x + w * w);
            let expected = s.powi(k as i32) / (1..=k).product::<usize>() as f64 * (-s).exp();
            assert_abs_diff_eq!(hermite_phase_basis(k, x, w).norm_sqr(), expected, epsilon = 1e-13);
            let mut coeffs = vec![c(0.0, 0.0); k + 1];
            coeffs[k] = c(1.0, 0.0);
            let h = Signal::hermite(coeffs).unwrap();
            assert_abs_diff_eq!((h.stft_at(x, w) - hermite_phase_basis(k, x, w)).norm(), 0.0, epsilon = 1e-13);
        }
    }
}

#[test]
fn hermite_recurrence_matches_explicit_low_orders() {
    // h_1(t) = 2^{1/4} √(4π) t e^{−πt²}
    for t in [-1.0, 0.0, 0.4, 1.3] {
        let h = hermite_functions(3, t);
        let g = 2f64.powf(0.25) * (-PI * t * t).exp();
        assert_abs_diff_eq!(h[0], g, epsilon = 1e-15);
        assert_abs_diff_eq!(h[1], g * (4.0 * PI).sqrt() * t, epsilon = 1e-14);
        assert_abs_diff_eq!(h[2], g * (4.0 * PI * t * t - 1.0) / 2f64.sqrt(), epsilon = 1e-14);
    }
}

#[test]
fn transform_is_an_isometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let whole_plane = Region::Rect { x: (-9.0, 9.0), omega: (-9.0, 9.0) };
    for _ in 0..20 {
        let f = random_hermite(&mut rng, 6);
        assert_abs_diff_eq!(concentration(&f, &whole_plane).unwrap(), 1.0, epsilon = 1e-8);
    }
}

#[test]
fn transform_is_covariant() {
    let (x0, w0) = (0.8, -1.1);
    let base = |t: f64| c((1.0 + t) * (-PI * t * t).exp(), 0.3 * t * (-PI * t * t).exp());
    let f = Signal::from_fn(9.0, 4097, base).unwrap();
    let g = Signal::from_fn(9.0, 4097, |t| base(t - x0) * Complex64::from_polar(1.0, 2.0 * PI * w0 * t)).unwrap();
    for (x, w) in [(0.0, 0.0), (1.0, -1.0), (0.5, 0.3), (-0.7, -2.0)] {
        assert_abs_diff_eq!(g.stft_at(x, w).norm(), f.stft_at(x - x0, w - w0).norm(), epsilon = 1e-8);
    }
}

#[test]
fn stft_refuses_aliased_grids() {
    let f = Signal::from_fn(2.0, 41, |_| c(1.0, 0.0)).unwrap();
    let grid = Grid::square(20.0, 8).unwrap();
    assert!(matches!(stft(&f, &grid), Err(Error::Aliasing { .. })));
    let field = stft(&Signal::window(), &Grid::square(3.0, 16).unwrap()).unwrap();
    assert_eq!(field.measure(), Measure::Lebesgue);
}

#[test]
fn constant_weight_gives_the_identity() {
    let grid = Grid::square(6.5, 104).unwrap();
    let field = WeightField::from_real_fn(grid, Measure::Lebesgue, |_, _| 1.0).unwrap();
    let m = assemble_operator(&field, &AssemblyOptions::with_basis(16)).unwrap();
    for a in 0..16 {
        for b in 0..16 {
            let expected = if a == b { 1.0 } else { 0.0 };
            assert_abs_diff_eq!((m[(a, b)] - c(expected, 0.0)).norm(), 0.0, epsilon = 1e-8);
        }
    }
    // too small a box leaks
    let small = WeightField::from_real_fn(Grid::square(2.0, 32).unwrap(), Measure::Lebesgue, |_, _| 1.0).unwrap();
    assert!(matches!(assemble_operator(&small, &AssemblyOptions::with_basis(16)), Err(Error::TailLeak { .. })));
}

#[test]
fn assembled_matrices_are_hermitian_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let grid = Grid::square(3.0, 48).unwrap();
    let vals: Vec<f64> = (0..48 * 48).map(|_| rng.random_range(0.0..1.0)).collect();
    let field = WeightField::from_real_fn(grid.clone(), Measure::Lebesgue, |x, y| {
        let i = ((x + 3.0) / 6.0 * 48.0) as usize;
        let j = ((y + 3.0) / 6.0 * 48.0) as usize;
        if x * x + y * y < 4.0 { vals[i.min(47) * 48 + j.min(47)] } else { 0.0 }
    })
    .unwrap();
    let m = assemble_operator(&field, &AssemblyOptions::with_basis(24)).unwrap();
    for a in 0..24 {
        for b in 0..24 {
            assert_abs_diff_eq!((m[(a, b)] - m[(b, a)].conj()).norm(), 0.0, epsilon = 1e-12);
        }
    }
    let s = spectrum(&m, 0.0).unwrap();
    assert!(s.eigenvalues.iter().all(|&e| e >= -1e-10 && e <= field.sup_norm() + 1e-10));
    let norm = operator_norm(&m).unwrap();
    assert_abs_diff_eq!(power_iteration(&m, 1e-13, 100_000).unwrap(), norm, epsilon = 1e-8);
}

#[test]
fn grid_ball_is_nearly_diagonal() {
    let area = 3.0;
    let profile = RadialProfile::ball(1.0, area).unwrap();
    let field = WeightField::from_profile(Grid::square(3.0, 256).unwrap(), &profile).unwrap();
    let m = assemble_operator(&field, &AssemblyOptions::with_basis(8)).unwrap();
    for k in 0..8 {
        assert_abs_diff_eq!(m[(k, k)].re, gamma_lr(k as f64 + 1.0, area), epsilon = 1e-2);
    }
    // a pixelated disc keeps only the square's symmetry
    for a in 0..8 {
        for b in 0..8 {
            if a != b && (a as i64 - b as i64) % 4 != 0 {
                assert!(m[(a, b)].norm() < 1e-10, "({a}, {b}) = {}", m[(a, b)]);
            }
        }
    }
}

#[test]
fn operator_norm_examples() {
    for s in [0.5, 1.0, 4.0] {
        let spec = radial_eigenvalues(&RadialProfile::ball(1.0, s).unwrap(), 32).unwrap();
        assert_abs_diff_eq!(spec.norm(), 1.0 - (-s as f64).exp(), epsilon = 1e-14);
        assert_eq!(spec.tail_bound, 0.0);
    }
    let spec = radial_eigenvalues(&RadialProfile::gaussian(1.0, 1.0).unwrap(), 16).unwrap();
    assert_abs_diff_eq!(spec.norm(), 0.5, epsilon = 1e-15);
}

#[test]
fn concentration_examples() {
    let phi = Signal::window();
    assert_abs_diff_eq!(
        concentration(&phi, &Region::Ball { center: (0.0, 0.0), area: 1.0 }).unwrap(),
        1.0 - (-1f64).exp(),
        epsilon = 1e-10
    );
    assert_eq!(concentration(&phi, &Region::Empty).unwrap(), 0.0);
    let mut h3 = vec![c(0.0, 0.0); 4];
    h3[3] = c(0.0, 1.0);
    let h3 = Signal::hermite(h3).unwrap();
    assert_abs_diff_eq!(
        concentration(&h3, &Region::Ball { center: (0.0, 0.0), area: 2.5 }).unwrap(),
        gamma_lr(4.0, 2.5),
        epsilon = 1e-10
    );
    // a grid mask and the matching rectangle agree
    let grid = Grid::square(2.0, 16).unwrap();
    let mask = WeightField::from_real_fn(grid, Measure::Lebesgue, |x, y| if x > 0.0 && y.abs() < 1.0 { 1.0 } else { 0.0 })
        .unwrap();
    let region = Region::Mask(mask);
    assert_abs_diff_eq!(region.measure(), 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(
        concentration(&phi, &region).unwrap(),
        concentration(&phi, &Region::Rect { x: (0.0, 2.0), omega: (-1.0, 1.0) }).unwrap(),
        epsilon = 1e-6
    );
}

#[test]
fn lieb_examples() {
    let phi = Signal::window();
    for p in [2.0, 3.0, 4.0, 8.0] {
        assert_abs_diff_eq!(lieb_quotient(&phi, p).unwrap(), (2.0 / p as f64).powf(1.0 / p), epsilon = 1e-8);
    }
    let h1 = Signal::hermite(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    for p in [3.0, 4.0] {
        assert!(lieb_quotient(&h1, p).unwrap() < (2.0 / p as f64).powf(1.0 / p) - 1e-3);
    }
    assert!(matches!(lieb_quotient(&phi, 1.5), Err(Error::Domain(_))));
}

#[test]
fn radial_assembly_matches_diagonal() {
    for profile in [
        RadialProfile::ball(1.3, 2.0).unwrap(),
        RadialProfile::gaussian(1.0, 0.7).unwrap(),
        RadialProfile::truncated_gaussian(2.0, 1.0, 1.2).unwrap(),
        RadialProfile::sampled(vec![0.4, 0.9, 1.6], vec![1.0, 0.6, 0.2]).unwrap(),
    ] {
        let k = 20;
        let m = assemble_radial(&profile, k).unwrap();
        let diag = hermite_diagonal(&profile, k).unwrap();
        for a in 0..k {
            for b in 0..k {
                let expected = if a == b { diag[a] } else { 0.0 };
                assert_abs_diff_eq!((m[(a, b)] - c(expected, 0.0)).norm(), 0.0, epsilon = 1e-8);
            }
            assert!(diag[a] >= 0.0 && diag[a] <= profile.sup_norm() + 1e-15);
        }
        let small = radial_eigenvalues(&profile, k).unwrap();
        let big = radial_eigenvalues(&profile, 2 * k).unwrap();
        assert!(big.norm() - small.norm() <= small.tail_bound + 1e-15);
    }
}
