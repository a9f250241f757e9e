//! Cross-check battery: each row compares two independent routes to the
//! same quantity and records the deviation against its tolerance.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::frequency::{FrequencyProfile, PhysicalParams};
use crate::functional::{
    amplitude_x, endpoint_shift_residual, momentum_shift_residual, CurrentPair,
};
use crate::fundamental::{
    endpoint_symmetry_residual, gflow_residual, solve_fundamental, wronskian_residual,
};
use crate::greens::{periodicity_residual, Channel, GreensEvaluator, Representation};
use crate::lattice::{lattice_green, lattice_log_det_ratio, LatticeOperator};
use crate::smearing::{build_distribution, SmearingMode};
use crate::wick::{
    connected_census, derivative_rule, expand_by_enumeration, generalized_wick_reduce,
    generating_expansion, mixed_two_point, x4_printed_discrepancy, DerivativeRule, Letter,
    OperatorWord,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckRow {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
            note: String::new(),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn failed(name: &str, tolerance: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            value: f64::NAN,
            tolerance,
            passed: false,
            note: err.to_string(),
        }
    }
}

fn row(name: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> CheckRow {
    match f() {
        Ok(v) => CheckRow::new(name, v, tolerance),
        Err(e) => CheckRow::failed(name, tolerance, e),
    }
}

fn exact(name: &str, ok: bool) -> CheckRow {
    CheckRow::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
}

/// Runs every check and returns one row per check.
pub fn run_battery() -> Vec<CheckRow> {
    vec![
        row("greens_jj_closed_form", 1e-8, greens_closed_form),
        row("wronskian_constancy", 1e-10, || {
            let p = FrequencyProfile::polynomial(vec![1.0, 0.5, -0.3], 0.0, 1.5)?;
            Ok(wronskian_residual(&solve_fundamental(&p, 2000)?))
        }),
        row("endpoint_symmetry", 1e-8, || {
            let p = FrequencyProfile::polynomial(vec![0.8, 1.0], 0.0, 1.2)?;
            Ok(endpoint_symmetry_residual(&solve_fundamental(&p, 2000)?))
        }),
        row("gflow_residual", 1e-5, || {
            gflow_residual(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1.0, 2000)
        }),
        row("lattice_green_midpoint", 5e-4, || {
            let profile = FrequencyProfile::constant(1.0, 0.0, 1.0)?;
            let op = LatticeOperator::new(&profile, 1999)?;
            let pair = solve_fundamental(&profile, 2000)?;
            let e = GreensEvaluator::new(&pair, Representation::DirichletX)?;
            Ok((lattice_green(&op, 1000, 1000)? - e.green(Channel::Jj, 0.5, 0.5)?).abs())
        }),
        row("lattice_log_det_ratio", 2e-3, || {
            let osc = LatticeOperator::new(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 3999)?;
            let free = LatticeOperator::new(&FrequencyProfile::free(0.0, 1.0)?, 3999)?;
            Ok((lattice_log_det_ratio(&osc, &free)? - 1.0f64.sin().ln()).abs())
        }),
        row("lattice_gelfand_yaglom_limit", 1e-2, || {
            let op = LatticeOperator::new(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 3999)?;
            Ok((op.gelfand_yaglom_limit() - 1.0f64.sin()).abs() / 1.0f64.sin())
        }),
        census_x4(),
        census_x2p2(),
        wick_closed_form(),
        derivative_rules(),
        x4_coefficient(),
        row("endpoint_shift_identity", 1e-8, || {
            let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1000)?;
            let c = CurrentPair::from_fns(&pair, |t| t.sin(), |t| 0.5 - t);
            endpoint_shift_residual(&pair, 0.3, -0.7, &c, &PhysicalParams::unit())
        }),
        row("momentum_shift_identity", 1e-8, || {
            let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1000)?;
            let c = CurrentPair::from_fns(&pair, |t| t.sin(), |t| 0.5 - t);
            momentum_shift_residual(&pair, 0.4, 0.9, &c, &PhysicalParams::unit())
        }),
        row("smearing_vs_wick", 1e-10, smearing_vs_wick),
        row("smearing_determinant_routes", 1e-10, || {
            let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, FRAC_PI_2)?, 1000)?;
            let e = GreensEvaluator::new(&pair, Representation::DirichletX)?;
            let d = build_distribution(
                &[0.3, 1.1],
                &[FRAC_PI_4],
                &e,
                None,
                &PhysicalParams::unit(),
                1.0,
                SmearingMode::Fresnel,
            )?;
            Ok(d.det_cross_check().unwrap_or(f64::NAN))
        }),
        row("periodic_periodicity", 1e-9, || {
            let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1000)?;
            let e = GreensEvaluator::new(&pair, Representation::Periodic)?;
            periodicity_residual(&e, 0.5)
        }),
        row(
            "functional_derivative_duality",
            1e-5,
            functional_derivative_duality,
        ),
    ]
}

/// Renders the battery as an aligned text table.
pub fn format_table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "{status}  {:<width$}  {:>12.4e}  (tol {:.1e})",
            r.name, r.value, r.tolerance
        ));
        if !r.note.is_empty() {
            out.push_str(&format!("  {}", r.note));
        }
        out.push('\n');
    }
    out
}

fn greens_closed_form() -> Result<f64> {
    let (w, t_b) = (1.0, FRAC_PI_2);
    let pair = solve_fundamental(&FrequencyProfile::constant(w, 0.0, t_b)?, 2000)?;
    let e = GreensEvaluator::new(&pair, Representation::DirichletX)?;
    let mut worst = 0.0f64;
    for i in 1..10 {
        for k in 1..10 {
            let (t, t2) = (t_b * i as f64 / 10.0, t_b * k as f64 / 10.0);
            let (hi, lo) = (t.max(t2), t.min(t2));
            let exact = (w * (t_b - hi)).sin() * (w * lo).sin() / (w * (w * t_b).sin());
            let got = e.green(Channel::Jj, t, t2)?;
            worst = worst.max((got - exact).abs() / exact.abs());
        }
    }
    Ok(worst)
}

fn census_x4() -> CheckRow {
    let name = "census_x4";
    match OperatorWord::parse_monomial("x^4", 1).and_then(|w| connected_census(&w, 2)) {
        Ok(c) => exact(
            name,
            c.multiplicities() == [24, 72] && c.connected + c.disconnected == 105,
        )
        .with_note(format!("multiplicities {:?}", c.multiplicities())),
        Err(e) => CheckRow::failed(name, 0.0, e),
    }
}

fn census_x2p2() -> CheckRow {
    let name = "census_x2p2";
    match OperatorWord::parse_monomial("x^2 p^2", 1).and_then(|w| connected_census(&w, 2)) {
        Ok(c) => exact(
            name,
            c.multiplicities() == [2, 2, 4, 4, 4, 16, 16, 16, 16, 16] && c.connected == 96,
        )
        .with_note(format!("multiplicities {:?}", c.multiplicities())),
        Err(e) => CheckRow::failed(name, 0.0, e),
    }
}

fn wick_closed_form() -> CheckRow {
    let kinds = [Letter::X, Letter::P];
    let mut mismatches = 0;
    let mut cases = 0;
    for &a in &kinds {
        for &b in &kinds {
            for n in 0..=8u32 {
                for m in 0..=8 - n {
                    let word = OperatorWord::power(a, n as usize, 1)
                        .concat(&OperatorWord::power(b, m as usize, 2));
                    cases += 1;
                    if mixed_two_point(n, m, (a, b)) != expand_by_enumeration(&word) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    CheckRow::new("wick_closed_form_vs_enumeration", mismatches as f64, 0.0)
        .with_note(format!("{cases} cases"))
}

fn derivative_rules() -> CheckRow {
    let mut mismatches = 0;
    for rule in DerivativeRule::ALL {
        let (a, b) = rule.letters();
        for n in 0..=6 {
            let expected = derivative_rule(1, n, rule);
            if generalized_wick_reduce(a, 1, &OperatorWord::power(b, n as usize, 2)) != expected {
                mismatches += 1;
            }
            if n <= 5 && generating_expansion(1, n, rule) != expected {
                mismatches += 1;
            }
        }
    }
    CheckRow::new("derivative_rule_consistency", mismatches as f64, 0.0)
}

fn x4_coefficient() -> CheckRow {
    let (printed, counted) = x4_printed_discrepancy();
    exact(
        "x4_self_contraction_coefficient",
        counted == num_rational::BigRational::from_integer(3.into()),
    )
    .with_note(format!(
        "printed coefficient {printed}, pairing count {counted}; enumeration is normative"
    ))
}

fn smearing_vs_wick() -> Result<f64> {
    let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1000)?;
    let e = GreensEvaluator::new(&pair, Representation::DirichletX)?;
    let params = PhysicalParams::new(1.3, 0.8)?;
    let (t1, t2) = (0.3, 0.7);
    let d = build_distribution(&[t1], &[t2], &e, None, &params, 1.0, SmearingMode::Fresnel)?;
    let times = BTreeMap::from([(1, t1), (2, t2)]);
    let none = BTreeMap::new();
    let mut worst = 0.0f64;
    for (n, m) in [(2, 2), (4, 2), (1, 3), (3, 3)] {
        let smeared = d.moments(&[n, m])?;
        let wick = mixed_two_point(n as u32, m as u32, (Letter::X, Letter::P))
            .evaluate(&e, &times, &params, &none)?;
        worst = worst.max((smeared - wick).norm() / wick.norm().max(1.0));
    }
    Ok(worst)
}

fn functional_derivative_duality() -> Result<f64> {
    let pair = solve_fundamental(&FrequencyProfile::constant(1.0, 0.0, 1.0)?, 1000)?;
    let e = GreensEvaluator::new(&pair, Representation::DirichletX)?;
    let params = PhysicalParams::new(1.5, 0.7)?;
    let (t1, t2, delta) = (0.3, 0.6, 1e-2);
    let base = CurrentPair::zero(&pair);
    let ln_amp = |w1: f64, w2: f64, kind: (bool, bool)| -> Result<Complex64> {
        let add = |c: CurrentPair, momentum: bool, t: f64, w: f64| {
            if momentum {
                c.with_k_impulse(t, w)
            } else {
                c.with_j_impulse(t, w)
            }
        };
        let c = add(add(base.clone(), kind.0, t1, w1), kind.1, t2, w2);
        Ok(amplitude_x(&pair, 0.2, -0.1, &c, &params)?.ln_value())
    };
    let hbar = params.hbar;
    let mut worst = 0.0f64;
    for (kind, ch, scale) in [
        ((false, false), Channel::Jj, hbar / params.mass),
        ((false, true), Channel::Jk, hbar),
        ((true, true), Channel::Kk, hbar * params.mass),
    ] {
        let d2 = (ln_amp(delta, delta, kind)?
            - ln_amp(delta, -delta, kind)?
            - ln_amp(-delta, delta, kind)?
            + ln_amp(-delta, -delta, kind)?)
            / (4.0 * delta * delta);
        let lhs = -hbar * hbar * d2;
        let rhs = Complex64::new(0.0, scale * e.green(ch, t1, t2)?);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}
