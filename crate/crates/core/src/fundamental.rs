//! The two fundamental solutions D_a, D_b of the oscillator equation
//! `(−∂²_t − Ω²(t)) D = 0`, their Wronskian, the Gelfand-Yaglom fluctuation
//! amplitude and the coupling-flow check of the determinant.
//!
//! D_a starts at t_a with `D_a = 0, Ḋ_a = 1`; D_b starts at t_b with
//! `D_b = 0, Ḋ_b = −1`. Both are integrated with fixed-step classical RK4 on
//! a uniform grid and evaluated between nodes by cubic Hermite
//! interpolation, using `D̈ = −Ω² D` as the node slope of `Ḋ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frequency::{FrequencyProfile, PhysicalParams};
use crate::greens::{Channel, GreensEvaluator, Representation};
use crate::quadrature::{hermite, simpson};

/// Minimum number of RK4 steps.
pub const MIN_STEPS: usize = 8;

/// Step of the central difference in g used by [`gflow_residual`].
pub const GFLOW_DELTA: f64 = 1e-4;

/// Sampled fundamental solutions on a uniform grid of `n_steps + 1` nodes.
#[derive(Debug, Clone)]
pub struct FundamentalPair {
    t_a: f64,
    t_b: f64,
    h: f64,
    da: Vec<f64>,
    da_dot: Vec<f64>,
    db: Vec<f64>,
    db_dot: Vec<f64>,
    omega_sq: Vec<f64>,
    wronskian: f64,
}

/// Which fundamental solution (or its time derivative) to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    A,
    B,
}

pub fn solve_fundamental(profile: &FrequencyProfile, n_steps: usize) -> Result<FundamentalPair> {
    if n_steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "n_steps must be at least {MIN_STEPS}, got {n_steps}"
        )));
    }
    let (t_a, t_b) = (profile.t_a(), profile.t_b());
    let h = (t_b - t_a) / n_steps as f64;
    let node = |i: usize| {
        if i == n_steps {
            t_b
        } else {
            t_a + i as f64 * h
        }
    };

    // Each step sees Ω² from inside its own cell, so jumps placed on nodes
    // do not leak into the neighbouring step.
    let sample = |t: f64, from_left: bool| -> Result<f64> {
        let t = t.clamp(t_a, t_b);
        let value = if from_left {
            profile.omega_squared_left(t)
        } else {
            profile.omega_squared_unchecked(t)
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Integration { t, value })
        }
    };
    let omega_sq_at = |t: f64| sample(t, false);

    let omega_sq: Vec<f64> = (0..=n_steps)
        .map(|i| omega_sq_at(node(i)))
        .collect::<Result<_>>()?;

    // Forward sweep for D_a.
    let mut da = vec![0.0; n_steps + 1];
    let mut da_dot = vec![0.0; n_steps + 1];
    da_dot[0] = 1.0;
    for i in 0..n_steps {
        let mid = omega_sq_at(node(i) + 0.5 * h)?;
        let end = sample(node(i + 1), true)?;
        let (x, v) = rk4_step(da[i], da_dot[i], omega_sq[i], mid, end, h);
        da[i + 1] = x;
        da_dot[i + 1] = v;
    }

    // Backward sweep for D_b.
    let mut db = vec![0.0; n_steps + 1];
    let mut db_dot = vec![0.0; n_steps + 1];
    db_dot[n_steps] = -1.0;
    for i in (1..=n_steps).rev() {
        let mid = omega_sq_at(node(i) - 0.5 * h)?;
        let start = sample(node(i), true)?;
        let (x, v) = rk4_step(db[i], db_dot[i], start, mid, omega_sq[i - 1], -h);
        db[i - 1] = x;
        db_dot[i - 1] = v;
    }

    let wronskian = da[0] * db_dot[0] - da_dot[0] * db[0];
    Ok(FundamentalPair {
        t_a,
        t_b,
        h,
        da,
        da_dot,
        db,
        db_dot,
        omega_sq,
        wronskian,
    })
}

/// One RK4 step of `ẍ = −Ω² x` with Ω² given at the start, midpoint and end.
fn rk4_step(x: f64, v: f64, w0: f64, wm: f64, w1: f64, h: f64) -> (f64, f64) {
    let k1x = v;
    let k1v = -w0 * x;
    let k2x = v + 0.5 * h * k1v;
    let k2v = -wm * (x + 0.5 * h * k1x);
    let k3x = v + 0.5 * h * k2v;
    let k3v = -wm * (x + 0.5 * h * k2x);
    let k4x = v + h * k3v;
    let k4v = -w1 * (x + h * k3x);
    (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

impl FundamentalPair {
    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn n_steps(&self) -> usize {
        self.da.len() - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_steps() {
            self.t_b
        } else {
            self.t_a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps()).map(|i| self.node(i))
    }

    /// W(t_a) = D_a Ḋ_b − Ḋ_a D_b at the initial node.
    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    pub fn wronskian_at_node(&self, i: usize) -> f64 {
        self.da[i] * self.db_dot[i] - self.da_dot[i] * self.db[i]
    }

    /// D_a(t_b); by the Wronskian identity this also equals D_b(t_a).
    pub fn da_end(&self) -> f64 {
        self.da[self.n_steps()]
    }

    /// Ḋ_a(t_b).
    pub fn da_dot_end(&self) -> f64 {
        self.da_dot[self.n_steps()]
    }

    /// Ḋ_b(t_a).
    pub fn db_dot_start(&self) -> f64 {
        self.db_dot[0]
    }

    /// D_b(t_a).
    pub fn db_start(&self) -> f64 {
        self.db[0]
    }

    pub fn caustic_tol(&self) -> f64 {
        1e-10 * (self.t_b - self.t_a)
    }

    /// Fails when |D_a(t_b)| is within the caustic tolerance.
    pub fn check_caustic(&self) -> Result<f64> {
        let d = self.da_end();
        let tol = self.caustic_tol();
        if d.abs() <= tol || !d.is_finite() {
            return Err(Error::Caustic {
                quantity: "D_a(t_b)",
                value: d,
                tol,
            });
        }
        Ok(d)
    }

    pub(crate) fn check_domain(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < self.t_a || t > self.t_b {
            return Err(Error::Domain {
                t,
                t_a: self.t_a,
                t_b: self.t_b,
            });
        }
        Ok(())
    }

    /// Node samples of D or Ḋ.
    pub fn samples(&self, which: Solution, derivative: bool) -> &[f64] {
        match (which, derivative) {
            (Solution::A, false) => &self.da,
            (Solution::A, true) => &self.da_dot,
            (Solution::B, false) => &self.db,
            (Solution::B, true) => &self.db_dot,
        }
    }

    /// Ω² at the grid nodes, as used by the integrator.
    pub fn omega_squared_samples(&self) -> &[f64] {
        &self.omega_sq
    }

    /// D or Ḋ at an arbitrary time in `[t_a, t_b]` (clamped).
    pub fn eval(&self, which: Solution, derivative: bool, t: f64) -> f64 {
        let n = self.n_steps();
        let x = ((t - self.t_a) / self.h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let s = x - i as f64;
        if s == 0.0 {
            return self.samples(which, derivative)[i];
        }
        if s == 1.0 {
            return self.samples(which, derivative)[i + 1];
        }
        let (val, slope) = (self.samples(which, false), self.samples(which, true));
        if derivative {
            let acc0 = -self.omega_sq[i] * val[i];
            let acc1 = -self.omega_sq[i + 1] * val[i + 1];
            hermite(slope[i], acc0, slope[i + 1], acc1, self.h, s)
        } else {
            hermite(val[i], slope[i], val[i + 1], slope[i + 1], self.h, s)
        }
    }

    pub fn da(&self, t: f64) -> f64 {
        self.eval(Solution::A, false, t)
    }

    pub fn da_dot(&self, t: f64) -> f64 {
        self.eval(Solution::A, true, t)
    }

    pub fn db(&self, t: f64) -> f64 {
        self.eval(Solution::B, false, t)
    }

    pub fn db_dot(&self, t: f64) -> f64 {
        self.eval(Solution::B, true, t)
    }

    /// CSV table `t,Da,Da_dot,Db,Db_dot` at the grid nodes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,Da,Da_dot,Db,Db_dot\n");
        for i in 0..=self.n_steps() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.node(i),
                self.da[i],
                self.da_dot[i],
                self.db[i],
                self.db_dot[i]
            ));
        }
        out
    }
}

/// Max over nodes of |W(t) − W(t_a)|.
pub fn wronskian_residual(pair: &FundamentalPair) -> f64 {
    (0..=pair.n_steps())
        .map(|i| (pair.wronskian_at_node(i) - pair.wronskian).abs())
        .fold(0.0, f64::max)
}

/// |D_a(t_b) − D_b(t_a)|.
pub fn endpoint_symmetry_residual(pair: &FundamentalPair) -> f64 {
    (pair.da_end() - pair.db_start()).abs()
}

/// |Ḋ_b(t_a) + Ḋ_a(t_b) + 2∫ΩΩ̇ D_a D_b dt|, the integral by composite Simpson.
///
/// Jumps of Ω² at interior breakpoints contribute `½ [Ω²] D_a D_b` there,
/// which is the Stieltjes form of the same integral.
pub fn derivative_sum_identity_residual(
    pair: &FundamentalPair,
    profile: &FrequencyProfile,
) -> Result<f64> {
    let integrand: Vec<f64> = (0..=pair.n_steps())
        .map(|i| {
            let t = pair.node(i);
            Ok(profile.omega_omega_dot(t)? * pair.da[i] * pair.db[i])
        })
        .collect::<Result<_>>()?;
    let mut integral = simpson(&integrand, pair.h);
    for (t, jump) in profile.omega_squared_jumps() {
        integral += 0.5 * jump * pair.da(t) * pair.db(t);
    }
    Ok((pair.db_dot_start() + pair.da_dot_end() + 2.0 * integral).abs())
}

/// sqrt(M / (2π i ħ D_a(t_b))), principal branch.
pub fn gelfand_yaglom_amplitude(
    pair: &FundamentalPair,
    params: &PhysicalParams,
) -> Result<Complex64> {
    let d = pair.check_caustic()?;
    let arg = Complex64::new(params.mass / (2.0 * PI * params.hbar * d), 0.0) / Complex64::i();
    Ok(arg.sqrt())
}

/// A member of the one-parameter family `−∂² − g Ω²(t)`.
#[derive(Debug, Clone)]
pub struct GFlowFamily {
    pub g: f64,
    pub pair: FundamentalPair,
}

impl GFlowFamily {
    pub fn new(profile: &FrequencyProfile, g: f64, n_steps: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::InvalidParameter(format!(
                "g must lie in [0, 1], got {g}"
            )));
        }
        let pair = solve_fundamental(&profile.scaled(g)?, n_steps)?;
        Ok(Self { g, pair })
    }
}

/// |d/dg ln D_a^g(t_b) + ∫ Ω² G^{x,g}_jj(t,t) dt| at coupling `g`.
///
/// The g-derivative is a central difference with step [`GFLOW_DELTA`]; the
/// integral uses Simpson on the diagonal of the g-family Dirichlet Green
/// function.
pub fn gflow_residual(profile: &FrequencyProfile, g: f64, n_steps: usize) -> Result<f64> {
    let delta = GFLOW_DELTA;
    if !(g > 0.0 && g <= 1.0) || g - delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "g must lie in [{delta}, 1] for the central difference, got {g}"
        )));
    }
    let lower = solve_fundamental(&profile.scaled(g - delta)?, n_steps)?;
    let upper = solve_fundamental(&profile.scaled(g + delta)?, n_steps)?;
    let centre = GFlowFamily::new(profile, g, n_steps)?;
    let d_lo = lower.check_caustic()?;
    let d_hi = upper.check_caustic()?;
    centre.pair.check_caustic()?;
    if d_lo.signum() != d_hi.signum() {
        return Err(Error::Caustic {
            quantity: "D_a^g(t_b) changes sign across the difference stencil",
            value: d_lo,
            tol: centre.pair.caustic_tol(),
        });
    }
    let dlog = ((d_hi / d_lo).ln()) / (2.0 * delta);

    let evaluator = GreensEvaluator::new(&centre.pair, Representation::DirichletX)?;
    let base = centre.pair.omega_squared_samples();
    let integrand: Vec<f64> = (0..=centre.pair.n_steps())
        .map(|i| {
            let t = centre.pair.node(i);
            // Ω² of the unscaled profile is the scaled one divided by g.
            let omega_sq = base[i] / g;
            Ok(omega_sq * evaluator.green(Channel::Jj, t, t)?)
        })
        .collect::<Result<_>>()?;
    Ok((dlog + simpson(&integrand, centre.pair.step())).abs())
}
