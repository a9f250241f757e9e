//! Cross-checks of the continuum formulas against independent routes:
//! the finite-difference lattice, direct Fresnel quadrature, Legendre
//! transforms and finite differences.

mod common;

use std::f64::consts::FRAC_PI_2;

use harmonic_paths::functional::{
    amplitude_p, amplitude_x, classical_action_p, classical_action_x, partition_functional,
};
use harmonic_paths::greens::classical_path_p;
use harmonic_paths::lattice::lattice_det_ratio;
use harmonic_paths::quadrature::simpson;
use harmonic_paths::{
    lattice_green, solve_fundamental, Channel, CurrentPair, FrequencyProfile, GreensEvaluator,
    LatticeOperator, PhysicalParams, Representation,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use common::{draws, smooth_profile};

#[test]
fn lattice_green_converges_quadratically() {
    let times = [0.25, 0.5, 0.75];
    for profile in draws(smooth_profile(), 10) {
        let pair = solve_fundamental(&profile, 4000).unwrap();
        let e = GreensEvaluator::new(&pair, Representation::DirichletX).unwrap();
        let error = |cells: usize| {
            let op = LatticeOperator::new(&profile, cells - 1).unwrap();
            let mut worst = 0.0f64;
            for &t in &times {
                for &t2 in &times {
                    let (i, j) = (op.nearest_node(t), op.nearest_node(t2));
                    let lat = lattice_green(&op, i, j).unwrap();
                    worst = worst.max((lat - e.green(Channel::Jj, t, t2).unwrap()).abs());
                }
            }
            worst
        };
        let (e1, e2, e3) = (error(500), error(1000), error(2000));
        assert!(e2 < 5e-4, "{profile:?}: {e2}");
        for ratio in [e1 / e2, e2 / e3] {
            assert!((ratio - 4.0).abs() < 0.3, "{profile:?}: ratio {ratio}");
        }
    }
}

#[test]
fn lattice_equivalence_at_unit_frequency() {
    let profile = FrequencyProfile::constant(1.0, 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 2000).unwrap();
    let e = GreensEvaluator::new(&pair, Representation::DirichletX).unwrap();
    let deviation = |cells: usize| {
        let op = LatticeOperator::new(&profile, cells - 1).unwrap();
        let stride = cells / 20;
        let mut worst = 0.0f64;
        for i in (stride..cells).step_by(stride) {
            for j in (stride..cells).step_by(stride) {
                let g = e.green(Channel::Jj, op.node(i), op.node(j)).unwrap();
                worst = worst.max((lattice_green(&op, i, j).unwrap() - g).abs());
            }
        }
        worst
    };
    let (coarse, fine) = (deviation(2000), deviation(4000));
    assert!(coarse < 5e-4);
    assert!((coarse / fine - 4.0).abs() < 0.3);
}

#[test]
fn determinant_ratio_law() {
    for (k, profile) in draws(smooth_profile(), 5).into_iter().enumerate() {
        let (g1, g2) = (0.3 + 0.2 * k as f64, 1.8 - 0.1 * k as f64);
        let continuum = {
            let d = |g: f64| {
                solve_fundamental(&profile.scaled(g).unwrap(), 2000)
                    .unwrap()
                    .da_end()
            };
            d(g2) / d(g1)
        };
        let lattice = |n: usize| {
            let a = LatticeOperator::new(&profile.scaled(g2).unwrap(), n).unwrap();
            let b = LatticeOperator::new(&profile.scaled(g1).unwrap(), n).unwrap();
            lattice_det_ratio(&a, &b).unwrap()
        };
        let (coarse, fine) = (lattice(1000), lattice(2000));
        let rel = |v: f64| (v - continuum).abs() / continuum.abs();
        assert!(rel(fine) < 1e-2, "{profile:?}");
        assert!(rel(fine) < rel(coarse));
    }
}

#[test]
fn lattice_recurrence_tends_to_da() {
    for profile in draws(smooth_profile(), 10) {
        let da = solve_fundamental(&profile, 2000).unwrap().da_end();
        let op = LatticeOperator::new(&profile, 3999).unwrap();
        assert!((op.gelfand_yaglom_limit() - da).abs() / da.abs() < 1e-2);
    }
}

/// Richardson extrapolation to `ε → 0` from values at `ε, 2ε, 4ε, 8ε`.
fn richardson(values: &[Complex64; 4]) -> Complex64 {
    let mut table = values.to_vec();
    for level in 1..4 {
        let factor = 2f64.powi(level);
        for k in 0..table.len() - 1 {
            table[k] = (factor * table[k] - table[k + 1]) / (factor - 1.0);
        }
        table.pop();
    }
    table[0]
}

const REGULATORS: [f64; 4] = [0.0125, 0.025, 0.05, 0.1];

#[test]
fn momentum_amplitude_is_fourier_transform() {
    let pair = solve_fundamental(
        &FrequencyProfile::constant(1.0, 0.0, FRAC_PI_2).unwrap(),
        64,
    )
    .unwrap();
    let params = PhysicalParams::unit();
    let currents = CurrentPair::zero(&pair);
    let (p_a, p_b) = (0.4, -0.3);

    let (half_width, dx) = (49.0, 0.12);
    let nodes: Vec<f64> = (0..)
        .map(|i| -half_width + i as f64 * dx)
        .take_while(|&x| x <= half_width)
        .collect();
    let mut sums = [Complex64::new(0.0, 0.0); 4];
    for &x_a in &nodes {
        for &x_b in &nodes {
            let amp = amplitude_x(&pair, x_a, x_b, &currents, &params)
                .unwrap()
                .value;
            let kernel = Complex64::from_polar(1.0, -(p_b * x_b - p_a * x_a) / params.hbar);
            let r2 = x_a * x_a + x_b * x_b;
            for (sum, eps) in sums.iter_mut().zip(REGULATORS) {
                *sum += amp * kernel * (-eps * r2).exp();
            }
        }
    }
    sums.iter_mut().for_each(|s| *s *= dx * dx);
    let transformed = richardson(&sums);
    let direct = amplitude_p(&pair, p_a, p_b, &currents, &params)
        .unwrap()
        .value;
    assert!(
        (transformed - direct).norm() < 1e-3,
        "{transformed} vs {direct}"
    );
}

#[test]
fn momentum_action_is_legendre_transform() {
    let profile = FrequencyProfile::polynomial(vec![1.0, 0.4], 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 1000).unwrap();
    let params = PhysicalParams::new(1.7, 1.0).unwrap();
    let zero = CurrentPair::zero(&pair);
    let (p_a, p_b) = (0.6, -0.35);
    let path = classical_path_p(&pair, p_a, p_b, &params).unwrap();
    let (x_a, x_b) = (path.x(0.0), path.x(1.0));
    let action = |x_a: f64, x_b: f64| classical_action_x(&pair, x_a, x_b, &zero, &params).unwrap();
    let h = 1e-4;
    let d_xb = (action(x_a, x_b + h) - action(x_a, x_b - h)) / (2.0 * h);
    let d_xa = (action(x_a + h, x_b) - action(x_a - h, x_b)) / (2.0 * h);
    assert!((d_xb - p_b).abs() < 1e-6);
    assert!((-d_xa - p_a).abs() < 1e-6);
    let legendre = action(x_a, x_b) - p_b * x_b + p_a * x_a;
    let direct = classical_action_p(&pair, p_a, p_b, &zero, &params).unwrap();
    assert!((legendre - direct).abs() < 1e-6);
}

#[test]
fn partition_function_is_trace_of_amplitude() {
    let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0).unwrap(), 256).unwrap();
    let params = PhysicalParams::unit();
    let zero = CurrentPair::zero(&pair);
    let (half_width, dx) = (50.0, 0.02);
    let mut sums = [Complex64::new(0.0, 0.0); 4];
    let mut x = -half_width;
    while x <= half_width {
        let amp = amplitude_x(&pair, x, x, &zero, &params).unwrap().value;
        for (sum, eps) in sums.iter_mut().zip(REGULATORS) {
            *sum += amp * (-eps * x * x).exp() * dx;
        }
        x += dx;
    }
    let trace = richardson(&sums);
    let z = partition_functional(&pair, &zero, &params).unwrap().value;
    assert!((trace - z).norm() < 1e-3, "{trace} vs {z}");
}

/// Second-order central differences of grid samples.
fn derivative(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    (0..n)
        .map(|i| match i {
            0 => (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * h),
            _ if i == n - 1 => {
                (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * h)
            }
            _ => (samples[i + 1] - samples[i - 1]) / (2.0 * h),
        })
        .collect()
}

#[test]
fn momentum_current_becomes_effective_position_current() {
    let profile = FrequencyProfile::polynomial(vec![0.9, 0.3, -0.2], 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 2000).unwrap();
    let params = PhysicalParams::new(1.4, 0.8).unwrap();
    let (x_a, x_b) = (0.3, -0.5);
    let currents = CurrentPair::from_fns(&pair, |t| 1.0 - t * t, |t| 0.5 * (2.0 * t).cos());
    let direct = amplitude_x(&pair, x_a, x_b, &currents, &params).unwrap();

    let h = pair.step();
    let k = &currents.smooth_k;
    let k_dot = derivative(k, h);
    let mut effective = CurrentPair::zero(&pair);
    effective.smooth_j = currents
        .smooth_j
        .iter()
        .zip(&k_dot)
        .map(|(j, kd)| j - params.mass * kd)
        .collect();
    let reduced = amplitude_x(&pair, x_a, x_b, &effective, &params).unwrap();
    let k_sq: Vec<f64> = k.iter().map(|v| v * v).collect();
    let phase =
        params.mass / params.hbar * (x_b * k[k.len() - 1] - x_a * k[0] + 0.5 * simpson(&k_sq, h));
    let rebuilt = reduced.value * Complex64::from_polar(1.0, phase);
    assert!((direct.value - rebuilt).norm() < 1e-6);
}

#[test]
fn action_is_quadratic_in_all_inputs() {
    let profile = FrequencyProfile::polynomial(vec![1.1, -0.2], 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 500).unwrap();
    let params = PhysicalParams::new(0.9, 1.3).unwrap();
    let currents = CurrentPair::from_fns(&pair, |t| t.sin(), |t| 1.0 - t)
        .with_j_impulse(0.4, 0.7)
        .with_k_impulse(0.6, -0.3);
    let scales = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];
    for rep in ["x", "p"] {
        let action = |s: f64| {
            let c = currents.scaled(s);
            if rep == "x" {
                classical_action_x(&pair, 0.4 * s, -0.2 * s, &c, &params).unwrap()
            } else {
                classical_action_p(&pair, 0.3 * s, 0.8 * s, &c, &params).unwrap()
            }
        };
        let values = DVector::from_iterator(scales.len(), scales.iter().map(|&s| action(s)));
        let design = DMatrix::from_fn(scales.len(), 4, |r, c| scales[r].powi(c as i32));
        let fit = design
            .clone()
            .svd(true, true)
            .solve(&values, 1e-14)
            .unwrap();
        let scale = values.amax();
        let residual = (&design * &fit - &values).amax();
        assert!(residual < 1e-10 * scale, "{rep}: residual {residual}");
        assert!(fit[0].abs() < 1e-10 * scale);
        assert!(fit[1].abs() < 1e-10 * scale);
        assert!(fit[3].abs() < 1e-10 * scale);
    }
}

fn second_difference(f: impl Fn(f64, f64) -> Complex64, delta: f64) -> Complex64 {
    (f(delta, delta) - f(delta, -delta) - f(-delta, delta) + f(-delta, -delta))
        / (4.0 * delta * delta)
}

#[test]
fn correlation_functions_are_functional_derivatives() {
    let profile = FrequencyProfile::polynomial(vec![0.8, 0.5], 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 1000).unwrap();
    let params = PhysicalParams::new(1.5, 0.7).unwrap();
    let base = CurrentPair::from_fns(&pair, |t| 0.2 * t, |_| 0.1);
    let (t1, t2) = (0.35, 0.8);
    let hbar = params.hbar;
    for rep in [Representation::DirichletX, Representation::MomentumP] {
        let e = GreensEvaluator::new(&pair, rep).unwrap();
        for (momentum, ch, scale) in [
            ((false, false), Channel::Jj, hbar / params.mass),
            ((false, true), Channel::Jk, hbar),
            ((true, false), Channel::Kj, hbar),
            ((true, true), Channel::Kk, hbar * params.mass),
        ] {
            let ln_amp = |w1: f64, w2: f64| {
                let add = |c: CurrentPair, is_k: bool, t: f64, w: f64| {
                    if is_k {
                        c.with_k_impulse(t, w)
                    } else {
                        c.with_j_impulse(t, w)
                    }
                };
                let c = add(add(base.clone(), momentum.0, t1, w1), momentum.1, t2, w2);
                let amp = match rep {
                    Representation::DirichletX => amplitude_x(&pair, 0.2, -0.1, &c, &params),
                    _ => amplitude_p(&pair, 0.3, 0.5, &c, &params),
                };
                amp.unwrap().ln_value()
            };
            let lhs = -hbar * hbar * second_difference(ln_amp, 1e-2);
            let rhs = Complex64::new(0.0, scale * e.green(ch, t1, t2).unwrap());
            assert!((lhs - rhs).norm() < 1e-5, "{rep:?} {ch:?}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn mixed_channels_are_time_derivatives_of_jj() {
    let profile = FrequencyProfile::polynomial(vec![1.0, 0.3, 0.2], 0.0, 1.0).unwrap();
    let pair = solve_fundamental(&profile, 2000).unwrap();
    let h = 1e-4;
    for rep in [
        Representation::DirichletX,
        Representation::MomentumP,
        Representation::Periodic,
    ] {
        let e = GreensEvaluator::new(&pair, rep).unwrap();
        for (t, t2) in [(0.3, 0.7), (0.8, 0.2), (0.55, 0.45)] {
            let g = |a: f64, b: f64| e.green(Channel::Jj, a, b).unwrap();
            let d_second = (g(t, t2 + h) - g(t, t2 - h)) / (2.0 * h);
            let d_first = (g(t + h, t2) - g(t - h, t2)) / (2.0 * h);
            assert!((d_second - e.green(Channel::Jk, t, t2).unwrap()).abs() < 1e-6);
            assert!((d_first - e.green(Channel::Kj, t, t2).unwrap()).abs() < 1e-6);
        }
    }
}
