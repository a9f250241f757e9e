//! Frequency profiles Ω(t) and the global physical parameters.
//!
//! Profiles store the amplitude Ω(t) and square it on demand. The one
//! exception is [`ProfileKind::OmegaSquaredTable`], which stores Ω²(t)
//! directly so that inverted regimes (Ω² < 0) can be represented.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub omega: f64,
}

/// Right-continuous step function: `values[k]` holds on
/// `[breakpoints[k-1], breakpoints[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConstantParams {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

/// Ω(t) = Σ coefficients[i] · tⁱ in absolute time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialParams {
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedParams {
    pub times: Vec<f64>,
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSquaredTableParams {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// The configuration-level description of a profile (`profile.kind`,
/// `profile.params`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProfileKind {
    Constant(ConstantParams),
    PiecewiseConstant(PiecewiseConstantParams),
    Polynomial(PolynomialParams),
    Tabulated(TabulatedParams),
    OmegaSquaredTable(OmegaSquaredTableParams),
}

/// A validated frequency profile on `[t_a, t_b]`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyProfile {
    kind: ProfileKind,
    t_a: f64,
    t_b: f64,
}

impl FrequencyProfile {
    pub fn new(kind: ProfileKind, t_a: f64, t_b: f64) -> Result<Self> {
        if !(t_a.is_finite() && t_b.is_finite()) || t_a >= t_b {
            return Err(Error::InvalidProfile(format!(
                "time domain requires finite t_a < t_b, got [{t_a}, {t_b}]"
            )));
        }
        validate_kind(&kind, t_a, t_b)?;
        Ok(Self { kind, t_a, t_b })
    }

    pub fn constant(omega: f64, t_a: f64, t_b: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant(ConstantParams { omega }), t_a, t_b)
    }

    pub fn free(t_a: f64, t_b: f64) -> Result<Self> {
        Self::constant(0.0, t_a, t_b)
    }

    pub fn polynomial(coefficients: Vec<f64>, t_a: f64, t_b: f64) -> Result<Self> {
        Self::new(
            ProfileKind::Polynomial(PolynomialParams { coefficients }),
            t_a,
            t_b,
        )
    }

    pub fn piecewise_constant(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        t_a: f64,
        t_b: f64,
    ) -> Result<Self> {
        Self::new(
            ProfileKind::PiecewiseConstant(PiecewiseConstantParams {
                breakpoints,
                values,
            }),
            t_a,
            t_b,
        )
    }

    pub fn tabulated(times: Vec<f64>, omegas: Vec<f64>, t_a: f64, t_b: f64) -> Result<Self> {
        Self::new(
            ProfileKind::Tabulated(TabulatedParams { times, omegas }),
            t_a,
            t_b,
        )
    }

    pub fn omega_squared_table(
        times: Vec<f64>,
        values: Vec<f64>,
        t_a: f64,
        t_b: f64,
    ) -> Result<Self> {
        Self::new(
            ProfileKind::OmegaSquaredTable(OmegaSquaredTableParams { times, values }),
            t_a,
            t_b,
        )
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < self.t_a || t > self.t_b {
            return Err(Error::Domain {
                t,
                t_a: self.t_a,
                t_b: self.t_b,
            });
        }
        Ok(())
    }

    /// The amplitude Ω(t). Fails for profiles that only store Ω².
    pub fn omega(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        match &self.kind {
            ProfileKind::Constant(p) => Ok(p.omega),
            ProfileKind::PiecewiseConstant(p) => Ok(step_value(&p.breakpoints, &p.values, t)),
            ProfileKind::Polynomial(p) => Ok(horner(&p.coefficients, t)),
            ProfileKind::Tabulated(p) => Ok(interpolate(&p.times, &p.omegas, t)),
            ProfileKind::OmegaSquaredTable(_) => Err(Error::InvalidProfile(
                "omega_squared_table stores Ω² only; the amplitude is not defined".into(),
            )),
        }
    }

    /// Ω²(t), the quantity entering the fluctuation operator. May be negative
    /// for `omega_squared_table` profiles.
    pub fn omega_squared(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.omega_squared_unchecked(t))
    }

    pub(crate) fn omega_squared_unchecked(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::OmegaSquaredTable(p) => interpolate(&p.times, &p.values, t),
            ProfileKind::Constant(p) => p.omega * p.omega,
            ProfileKind::PiecewiseConstant(p) => {
                let w = step_value(&p.breakpoints, &p.values, t);
                w * w
            }
            ProfileKind::Polynomial(p) => {
                let w = horner(&p.coefficients, t);
                w * w
            }
            ProfileKind::Tabulated(p) => {
                let w = interpolate(&p.times, &p.omegas, t);
                w * w
            }
        }
    }

    /// Ω²(t−), the left limit. Differs from Ω²(t) only at piecewise breakpoints.
    pub(crate) fn omega_squared_left(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::PiecewiseConstant(p) => {
                let w = p.values[p.breakpoints.partition_point(|&b| b < t)];
                w * w
            }
            _ => self.omega_squared_unchecked(t),
        }
    }

    /// dΩ/dt. Piecewise-constant profiles return 0; at a tabulation node the
    /// slope of the segment to the right is returned, and outside the
    /// tabulated range (clamped) the slope is 0.
    pub fn omega_derivative(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        match &self.kind {
            ProfileKind::Constant(_) | ProfileKind::PiecewiseConstant(_) => Ok(0.0),
            ProfileKind::Polynomial(p) => Ok(horner_derivative(&p.coefficients, t)),
            ProfileKind::Tabulated(p) => Ok(segment_slope(&p.times, &p.omegas, t)),
            ProfileKind::OmegaSquaredTable(_) => Err(Error::InvalidProfile(
                "omega_squared_table stores Ω² only; dΩ/dt is not defined".into(),
            )),
        }
    }

    /// Ω(t)·Ω̇(t) = ½ d(Ω²)/dt, away from jump points.
    pub fn omega_omega_dot(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(match &self.kind {
            ProfileKind::OmegaSquaredTable(p) => 0.5 * segment_slope(&p.times, &p.values, t),
            _ => self.omega(t)? * self.omega_derivative(t)?,
        })
    }

    /// Discontinuities of Ω²: `(time, Ω²(t+) − Ω²(t−))` for interior jump points.
    pub fn omega_squared_jumps(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            ProfileKind::PiecewiseConstant(p) => p
                .breakpoints
                .iter()
                .enumerate()
                .map(|(k, &t)| (t, p.values[k + 1].powi(2) - p.values[k].powi(2)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// The profile with Ω² replaced by g·Ω², g ≥ 0.
    pub fn scaled(&self, g: f64) -> Result<Self> {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling g must be finite and non-negative, got {g}"
            )));
        }
        let root = g.sqrt();
        let kind = match &self.kind {
            ProfileKind::Constant(p) => ProfileKind::Constant(ConstantParams {
                omega: root * p.omega,
            }),
            ProfileKind::PiecewiseConstant(p) => {
                ProfileKind::PiecewiseConstant(PiecewiseConstantParams {
                    breakpoints: p.breakpoints.clone(),
                    values: p.values.iter().map(|v| root * v).collect(),
                })
            }
            ProfileKind::Polynomial(p) => ProfileKind::Polynomial(PolynomialParams {
                coefficients: p.coefficients.iter().map(|c| root * c).collect(),
            }),
            ProfileKind::Tabulated(p) => ProfileKind::Tabulated(TabulatedParams {
                times: p.times.clone(),
                omegas: p.omegas.iter().map(|v| root * v).collect(),
            }),
            ProfileKind::OmegaSquaredTable(p) => {
                ProfileKind::OmegaSquaredTable(OmegaSquaredTableParams {
                    times: p.times.clone(),
                    values: p.values.iter().map(|v| g * v).collect(),
                })
            }
        };
        Self::new(kind, self.t_a, self.t_b)
    }
}

fn validate_kind(kind: &ProfileKind, t_a: f64, t_b: f64) -> Result<()> {
    let all_finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
    match kind {
        ProfileKind::Constant(p) => {
            if !p.omega.is_finite() {
                return Err(Error::InvalidProfile("omega must be finite".into()));
            }
        }
        ProfileKind::PiecewiseConstant(p) => {
            if p.values.len() != p.breakpoints.len() + 1 {
                return Err(Error::InvalidProfile(format!(
                    "piecewise_constant needs breakpoints.len() + 1 values, got {} breakpoints and {} values",
                    p.breakpoints.len(),
                    p.values.len()
                )));
            }
            if !all_finite(&p.values) || !all_finite(&p.breakpoints) {
                return Err(Error::InvalidProfile(
                    "non-finite piecewise parameter".into(),
                ));
            }
            if p.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidProfile(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
            if p.breakpoints.iter().any(|&b| b <= t_a || b >= t_b) {
                return Err(Error::InvalidProfile(
                    "breakpoints must lie strictly inside (t_a, t_b)".into(),
                ));
            }
        }
        ProfileKind::Polynomial(p) => {
            if p.coefficients.is_empty() || !all_finite(&p.coefficients) {
                return Err(Error::InvalidProfile(
                    "polynomial needs at least one finite coefficient".into(),
                ));
            }
        }
        ProfileKind::Tabulated(TabulatedParams {
            times,
            omegas: values,
        })
        | ProfileKind::OmegaSquaredTable(OmegaSquaredTableParams { times, values }) => {
            if times.len() < 2 || times.len() != values.len() {
                return Err(Error::InvalidProfile(format!(
                    "tables need at least two samples of equal length, got {} times and {} values",
                    times.len(),
                    values.len()
                )));
            }
            if !all_finite(times) || !all_finite(values) {
                return Err(Error::InvalidProfile("non-finite table entry".into()));
            }
            if times.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidProfile(
                    "table times must be strictly increasing".into(),
                ));
            }
        }
    }
    Ok(())
}

fn horner(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn horner_derivative(coefficients: &[f64], t: f64) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * t + i as f64 * c)
}

fn step_value(breakpoints: &[f64], values: &[f64], t: f64) -> f64 {
    values[breakpoints.partition_point(|&b| b <= t)]
}

/// Linear interpolation with clamped ends.
pub(crate) fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let last = times.len() - 1;
    if t <= times[0] {
        return values[0];
    }
    if t >= times[last] {
        return values[last];
    }
    let k = times.partition_point(|&s| s <= t) - 1;
    let s = (t - times[k]) / (times[k + 1] - times[k]);
    values[k] + s * (values[k + 1] - values[k])
}

fn segment_slope(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&s| s <= t);
    if k == 0 || k == times.len() {
        return 0.0;
    }
    (values[k] - values[k - 1]) / (times[k] - times[k - 1])
}

/// Mass and Planck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self { mass, hbar })
    }

    pub fn unit() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}
