//! Classical actions and generating functionals with external currents.
//!
//! A current is a smooth part sampled on the grid of the fundamental pair
//! plus a list of weighted delta impulses. Impulses are evaluated exactly at
//! their time; an impulse placed on `t_a` or `t_b` is read as the limit from
//! inside the interval, which the Green-function branch selection gives
//! automatically.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{interpolate, PhysicalParams};
use crate::fundamental::FundamentalPair;
use crate::greens::{
    classical_path_p, classical_path_x, Channel, ClassicalPath, GreensEvaluator, KernelIntegral,
    Representation,
};
use crate::quadrature::simpson;

/// `weight · δ(t − time)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Impulse {
    pub time: f64,
    pub weight: f64,
}

impl Impulse {
    pub fn new(time: f64, weight: f64) -> Self {
        Self { time, weight }
    }
}

/// Piecewise-linear function through `(times[i], values[i])`, constant
/// beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointTable {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl BreakpointTable {
    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() || self.times.len() != self.values.len() {
            return Err(Error::InvalidParameter(
                "breakpoint table needs equally many (≥ 1) times and values".into(),
            ));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "breakpoint times must be strictly increasing".into(),
            ));
        }
        if self
            .times
            .iter()
            .chain(&self.values)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "breakpoint table holds non-finite data".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        interpolate(&self.times, &self.values, t)
    }
}

/// The position current `j` and the momentum current `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentPair {
    pub smooth_j: Vec<f64>,
    pub smooth_k: Vec<f64>,
    pub impulses_j: Vec<Impulse>,
    pub impulses_k: Vec<Impulse>,
}

impl CurrentPair {
    pub fn zero(pair: &FundamentalPair) -> Self {
        let n = pair.n_steps() + 1;
        Self {
            smooth_j: vec![0.0; n],
            smooth_k: vec![0.0; n],
            impulses_j: Vec::new(),
            impulses_k: Vec::new(),
        }
    }

    /// Smooth currents sampled from closures on the pair grid.
    pub fn from_fns(
        pair: &FundamentalPair,
        j: impl Fn(f64) -> f64,
        k: impl Fn(f64) -> f64,
    ) -> Self {
        Self {
            smooth_j: pair.nodes().map(&j).collect(),
            smooth_k: pair.nodes().map(&k).collect(),
            impulses_j: Vec::new(),
            impulses_k: Vec::new(),
        }
    }

    pub fn with_j_impulse(mut self, time: f64, weight: f64) -> Self {
        self.impulses_j.push(Impulse::new(time, weight));
        self
    }

    pub fn with_k_impulse(mut self, time: f64, weight: f64) -> Self {
        self.impulses_k.push(Impulse::new(time, weight));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.smooth_j
            .iter()
            .chain(&self.smooth_k)
            .all(|&v| v == 0.0)
            && self
                .impulses_j
                .iter()
                .chain(&self.impulses_k)
                .all(|i| i.weight == 0.0)
    }

    /// Every current multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let imp = |v: &[Impulse]| {
            v.iter()
                .map(|i| Impulse::new(i.time, s * i.weight))
                .collect()
        };
        Self {
            smooth_j: self.smooth_j.iter().map(|v| s * v).collect(),
            smooth_k: self.smooth_k.iter().map(|v| s * v).collect(),
            impulses_j: imp(&self.impulses_j),
            impulses_k: imp(&self.impulses_k),
        }
    }

    pub fn validate(&self, pair: &FundamentalPair) -> Result<()> {
        let n = pair.n_steps() + 1;
        if self.smooth_j.len() != n || self.smooth_k.len() != n {
            return Err(Error::Size(format!(
                "smooth currents must have {n} samples, got {} and {}",
                self.smooth_j.len(),
                self.smooth_k.len()
            )));
        }
        for imp in self.impulses_j.iter().chain(&self.impulses_k) {
            pair.check_domain(imp.time)?;
            if !imp.weight.is_finite() {
                return Err(Error::InvalidParameter(
                    "impulse weight is not finite".into(),
                ));
            }
        }
        if self
            .smooth_j
            .iter()
            .chain(&self.smooth_k)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "smooth current is not finite".into(),
            ));
        }
        Ok(())
    }

    fn smooth(&self, which: Current) -> &[f64] {
        match which {
            Current::J => &self.smooth_j,
            Current::K => &self.smooth_k,
        }
    }

    fn impulses(&self, which: Current) -> &[Impulse] {
        match which {
            Current::J => &self.impulses_j,
            Current::K => &self.impulses_k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Current {
    J,
    K,
}

/// `prefactor · exp(i·action/ħ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeValue {
    pub action: Complex64,
    pub prefactor: Complex64,
    pub value: Complex64,
    hbar: f64,
}

impl AmplitudeValue {
    fn new(action: f64, prefactor: Complex64, hbar: f64) -> Self {
        let action = Complex64::new(action, 0.0);
        let value = prefactor * (Complex64::i() * action / hbar).exp();
        Self {
            action,
            prefactor,
            value,
            hbar,
        }
    }

    /// ln(prefactor) + i·action/ħ, without wrapping the phase of the exponent.
    pub fn ln_value(&self) -> Complex64 {
        self.prefactor.ln() + Complex64::i() * self.action / self.hbar
    }
}

/// `∫∫ G_ch(t,t') a(t) b(t') dt dt'` with `a` and `b` the indicated currents.
fn bilinear(
    e: &GreensEvaluator,
    ch: Channel,
    currents: &CurrentPair,
    first: Current,
    second: Current,
) -> Result<f64> {
    let pair = e.pair();
    let (sa, sb) = (currents.smooth(first), currents.smooth(second));
    let (ia, ib) = (currents.impulses(first), currents.impulses(second));
    let a_zero = sa.iter().all(|&v| v == 0.0);
    let b_zero = sb.iter().all(|&v| v == 0.0);
    let mut total = 0.0;

    if !b_zero {
        let inner = KernelIntegral::new(e, ch, sb)?;
        if !a_zero {
            let nodes = inner.at_nodes();
            let integrand: Vec<f64> = sa.iter().zip(&nodes).map(|(x, y)| x * y).collect();
            total += simpson(&integrand, pair.step());
        }
        total += ia.iter().map(|i| i.weight * inner.at(i.time)).sum::<f64>();
    }
    if !a_zero && !ib.is_empty() {
        let inner = KernelIntegral::new(e, ch.transpose(), sa)?;
        total += ib.iter().map(|i| i.weight * inner.at(i.time)).sum::<f64>();
    }
    if !ia.is_empty() && !ib.is_empty() {
        let kernel = e.kernel(ch);
        for x in ia {
            for y in ib {
                total += x.weight * y.weight * kernel.eval(pair, x.time, y.time);
            }
        }
    }
    Ok(total)
}

/// `−½ ∫∫ [G_jj j j / M + G_jk j k + G_kj k j + M G_kk k k]`.
fn quadratic_part(e: &GreensEvaluator, currents: &CurrentPair, mass: f64) -> Result<f64> {
    let jj = bilinear(e, Channel::Jj, currents, Current::J, Current::J)?;
    let jk = bilinear(e, Channel::Jk, currents, Current::J, Current::K)?;
    let kj = bilinear(e, Channel::Kj, currents, Current::K, Current::J)?;
    let kk = bilinear(e, Channel::Kk, currents, Current::K, Current::K)?;
    Ok(-0.5 * (jj / mass + jk + kj + mass * kk))
}

/// `∫ [x_cl j + p_cl k] dt`.
fn linear_part(path: &ClassicalPath, currents: &CurrentPair, h: f64) -> f64 {
    let x = path.x_samples();
    let p = path.p_samples();
    let integrand: Vec<f64> = (0..x.len())
        .map(|i| x[i] * currents.smooth_j[i] + p[i] * currents.smooth_k[i])
        .collect();
    simpson(&integrand, h)
        + currents
            .impulses_j
            .iter()
            .map(|i| i.weight * path.x(i.time))
            .sum::<f64>()
        + currents
            .impulses_k
            .iter()
            .map(|i| i.weight * path.p(i.time))
            .sum::<f64>()
}

/// Classical action in the configuration representation, with fixed end
/// positions `x_a`, `x_b`.
pub fn classical_action_x(
    pair: &FundamentalPair,
    x_a: f64,
    x_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<f64> {
    currents.validate(pair)?;
    let e = GreensEvaluator::new(pair, Representation::DirichletX)?;
    let m = params.mass;
    let boundary = m
        * (e.da_dot_end() * x_b * x_b - e.db_dot_start() * x_a * x_a - 2.0 * x_a * x_b)
        / (2.0 * e.da_end());
    let path = classical_path_x(pair, x_a, x_b, params)?;
    Ok(boundary + linear_part(&path, currents, pair.step()) + quadratic_part(&e, currents, m)?)
}

/// `sqrt((i/2πħ)·∂²A/∂x_b∂x_a) · exp(iA/ħ)` with `∂²A/∂x_b∂x_a = −M/D_a(t_b)`.
pub fn amplitude_x(
    pair: &FundamentalPair,
    x_a: f64,
    x_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<AmplitudeValue> {
    let action = classical_action_x(pair, x_a, x_b, currents, params)?;
    let mixed = -params.mass / pair.da_end();
    let prefactor = (Complex64::i() / (2.0 * PI * params.hbar) * mixed).sqrt();
    Ok(AmplitudeValue::new(action, prefactor, params.hbar))
}

/// Classical action in the momentum representation, with fixed end
/// momenta `p_a`, `p_b`.
pub fn classical_action_p(
    pair: &FundamentalPair,
    p_a: f64,
    p_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<f64> {
    currents.validate(pair)?;
    let e = GreensEvaluator::new(pair, Representation::MomentumP)?;
    let m = params.mass;
    let boundary = e.da_end()
        * (e.da_dot_end() * p_a * p_a - e.db_dot_start() * p_b * p_b - 2.0 * p_a * p_b)
        / (2.0 * m * e.momentum_denominator());
    let path = classical_path_p(pair, p_a, p_b, params)?;
    Ok(boundary + linear_part(&path, currents, pair.step()) + quadratic_part(&e, currents, m)?)
}

/// `sqrt(2πiħ·∂²A/∂p_b∂p_a) · exp(iA/ħ)` with
/// `∂²A/∂p_b∂p_a = −D_a(t_b) / (M[1 + Ḋ_a(t_b)Ḋ_b(t_a)])`.
pub fn amplitude_p(
    pair: &FundamentalPair,
    p_a: f64,
    p_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<AmplitudeValue> {
    let action = classical_action_p(pair, p_a, p_b, currents, params)?;
    let m_denom = 1.0 + pair.da_dot_end() * pair.db_dot_start();
    let mixed = -pair.da_end() / (params.mass * m_denom);
    let prefactor = (Complex64::i() * 2.0 * PI * params.hbar * mixed).sqrt();
    Ok(AmplitudeValue::new(action, prefactor, params.hbar))
}

/// `|A_x(x_a, x_b)[k, j] − A_x(0, 0)[k + x_b δ(t_b − t) − x_a δ(t − t_a), j]|`.
pub fn endpoint_shift_residual(
    pair: &FundamentalPair,
    x_a: f64,
    x_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<f64> {
    let direct = amplitude_x(pair, x_a, x_b, currents, params)?;
    let shifted = currents
        .clone()
        .with_k_impulse(pair.t_b(), x_b)
        .with_k_impulse(pair.t_a(), -x_a);
    let reduced = amplitude_x(pair, 0.0, 0.0, &shifted, params)?;
    Ok((direct.value - reduced.value).norm())
}

/// `|A_p(p_a, p_b)[k, j] − A_p(0, 0)[k, j + p_a δ(t − t_a) − p_b δ(t_b − t)]|`.
pub fn momentum_shift_residual(
    pair: &FundamentalPair,
    p_a: f64,
    p_b: f64,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<f64> {
    let direct = amplitude_p(pair, p_a, p_b, currents, params)?;
    let shifted = currents
        .clone()
        .with_j_impulse(pair.t_a(), p_a)
        .with_j_impulse(pair.t_b(), -p_b);
    let reduced = amplitude_p(pair, 0.0, 0.0, &shifted, params)?;
    Ok((direct.value - reduced.value).norm())
}

/// Generating functional of closed paths,
/// `Z[j,k] = exp(−(i/2ħ)∫∫[…G̃…]) / sqrt(Ḋ_a(t_b) − Ḋ_b(t_a) − 2)`,
/// principal branch of the root.
pub fn partition_functional(
    pair: &FundamentalPair,
    currents: &CurrentPair,
    params: &PhysicalParams,
) -> Result<AmplitudeValue> {
    currents.validate(pair)?;
    let e = GreensEvaluator::new(pair, Representation::Periodic)?;
    let action = quadratic_part(&e, currents, params.mass)?;
    let prefactor = Complex64::new(e.periodic_denominator(), 0.0).sqrt().inv();
    Ok(AmplitudeValue::new(action, prefactor, params.hbar))
}
