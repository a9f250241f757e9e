//! Multi-time expectation values as a Gaussian convolution.
//!
//! Positions at `N` times and momenta at `M` times are mapped to the
//! dimensionless vector
//! `w = (√(MΩ/ħ)(x − x_cl), …, −(p − p_cl)/√(ħMΩ), …)`, whose quadratic
//! form is the block matrix `G = [[A, B], [Bᵀ, C]]` with
//! `A = Ω·G_jj`, `B = −G_jk`, `C = G_kk / Ω`. In the oscillatory (Fresnel)
//! mode the covariance of `w` is `iG`; in the euclidean mode it is `G`
//! itself, which must then be positive definite.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::{interpolate, PhysicalParams};
use crate::greens::{Channel, ClassicalPath, GreensEvaluator, Representation};

pub const QUADRATURE_ORDER: usize = 40;
pub const MAX_QUADRATURE_DIM: usize = 3;
pub const MAX_MOMENT_ORDER: usize = 8;
pub const MAX_POLYNOMIAL_DEGREE: usize = 16;

/// Eigenvalue threshold, relative to the largest entry of the dimensionless
/// `G` (floored at one), below which a block counts as singular.
const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmearingMode {
    Fresnel,
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Argument {
    Position,
    Momentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionKind {
    /// Σ coefficients[i] · yⁱ.
    Polynomial { coefficients: Vec<f64> },
    /// exp(−a y² + b y).
    Gaussian { a: f64, b: f64 },
    /// Linear interpolation through the table, constant beyond its ends.
    Tabulated { points: Vec<f64>, values: Vec<f64> },
}

/// A function of the position or momentum at one insertion time.
// Unknown keys fall through the flatten and are rejected by `FunctionKind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFunction {
    pub argument: Argument,
    #[serde(flatten)]
    pub kind: FunctionKind,
}

impl LocalFunction {
    pub fn polynomial(argument: Argument, coefficients: Vec<f64>) -> Self {
        Self {
            argument,
            kind: FunctionKind::Polynomial { coefficients },
        }
    }

    pub fn gaussian(argument: Argument, a: f64, b: f64) -> Self {
        Self {
            argument,
            kind: FunctionKind::Gaussian { a, b },
        }
    }

    pub fn one(argument: Argument) -> Self {
        Self::polynomial(argument, vec![1.0])
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, FunctionKind::Polynomial { .. })
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            FunctionKind::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * y + c)
            }
            FunctionKind::Gaussian { a, b } => (-a * y * y + b * y).exp(),
            FunctionKind::Tabulated { points, values } => interpolate(points, values, y),
        }
    }

    fn validate(&self, mode: SmearingMode) -> Result<()> {
        match &self.kind {
            FunctionKind::Polynomial { coefficients } => {
                if coefficients.len() > MAX_POLYNOMIAL_DEGREE + 1 {
                    return Err(Error::Size(format!(
                        "polynomial degree {} exceeds {MAX_POLYNOMIAL_DEGREE}",
                        coefficients.len() - 1
                    )));
                }
            }
            FunctionKind::Gaussian { a, .. } => {
                if mode == SmearingMode::Euclidean && (a.is_nan() || *a <= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "gaussian function needs a > 0, got {a}"
                    )));
                }
            }
            FunctionKind::Tabulated { points, values } => {
                if points.len() < 2
                    || points.len() != values.len()
                    || points.windows(2).any(|w| w[0] >= w[1])
                {
                    return Err(Error::InvalidParameter(
                        "tabulated function needs ≥ 2 strictly increasing points".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// The Gaussian distribution of the fluctuations at the insertion times.
#[derive(Debug, Clone)]
pub struct SmearingDistribution {
    n_x: usize,
    n_p: usize,
    times: Vec<f64>,
    mode: SmearingMode,
    omega_ref: f64,
    mean: Vec<f64>,
    scale: Vec<f64>,
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    det_g: f64,
    det_via_c: Option<f64>,
    det_via_a: Option<f64>,
}

fn is_singular(m: &DMatrix<f64>, scale: f64) -> bool {
    if m.nrows() == 0 {
        return false;
    }
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let min = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    min <= SINGULAR_TOL * scale
}

fn invert(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().lu().try_inverse().expect("regular block")
}

/// `G⁻¹` and `det G` through the Schur complement of `C` (when `C` is regular),
/// and `det G` through the complement of `A` (when `A` is regular).
struct BlockFactors {
    inverse: DMatrix<f64>,
    det_via_c: Option<f64>,
    det_via_a: Option<f64>,
}

fn block_factors(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<BlockFactors> {
    let (n, m) = (a.nrows(), c.nrows());
    let scale = a.amax().max(b.amax()).max(c.amax()).max(1.0);
    let c_regular = !is_singular(c, scale);
    let a_regular = !is_singular(a, scale);

    let mut inverse = None;
    let mut det_via_c = None;
    let mut det_via_a = None;

    if c_regular {
        let c_inv = invert(c);
        let x = a - b * &c_inv * b.transpose();
        det_via_c = Some(c.determinant() * x.determinant());
        if n == 0 || !is_singular(&x, scale) {
            let x_inv = invert(&x);
            let upper_right = -&x_inv * b * &c_inv;
            let lower_right = &c_inv + &c_inv * b.transpose() * &x_inv * b * &c_inv;
            inverse = Some(assemble(&x_inv, &upper_right, &lower_right));
        }
    }
    if a_regular {
        let a_inv = invert(a);
        let xp = c - b.transpose() * &a_inv * b;
        det_via_a = Some(a.determinant() * xp.determinant());
        if inverse.is_none() && (m == 0 || !is_singular(&xp, scale)) {
            let xp_inv = invert(&xp);
            let upper_left = &a_inv + &a_inv * b * &xp_inv * b.transpose() * &a_inv;
            let upper_right = -&a_inv * b * &xp_inv;
            inverse = Some(assemble(&upper_left, &upper_right, &xp_inv));
        }
    }
    if !a_regular && !c_regular {
        return Err(Error::NotImplemented(
            "both diagonal blocks A and C are singular".into(),
        ));
    }
    let inverse = inverse.ok_or_else(|| {
        Error::NotPositiveDefinite("the Green-function matrix G is singular".into())
    })?;
    Ok(BlockFactors {
        inverse,
        det_via_c,
        det_via_a,
    })
}

fn assemble(ul: &DMatrix<f64>, ur: &DMatrix<f64>, lr: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (ul.nrows(), lr.nrows());
    let mut g = DMatrix::zeros(n + m, n + m);
    g.view_mut((0, 0), (n, n)).copy_from(ul);
    g.view_mut((0, n), (n, m)).copy_from(ur);
    g.view_mut((n, 0), (m, n)).copy_from(&ur.transpose());
    g.view_mut((n, n), (m, m)).copy_from(lr);
    g
}

/// Builds the distribution for positions at `times_x` and momenta at
/// `times_p`. `path` supplies the classical mean; `None` means zero mean.
pub fn build_distribution(
    times_x: &[f64],
    times_p: &[f64],
    evaluator: &GreensEvaluator,
    path: Option<&ClassicalPath>,
    params: &PhysicalParams,
    omega_ref: f64,
    mode: SmearingMode,
) -> Result<SmearingDistribution> {
    if evaluator.representation() == Representation::MomentumP {
        return Err(Error::Mode(
            "smearing needs a dirichlet_x or periodic Green-function evaluator".into(),
        ));
    }
    if !(omega_ref > 0.0 && omega_ref.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "omega_ref must be positive, got {omega_ref}"
        )));
    }
    let (n, m) = (times_x.len(), times_p.len());
    if n + m == 0 {
        return Err(Error::Size("no insertion times".into()));
    }
    let green = |ch, t1, t2| evaluator.green(ch, t1, t2);
    let a = DMatrix::from_fn(n, n, |i, j| {
        omega_ref * green(Channel::Jj, times_x[i], times_x[j]).unwrap_or(f64::NAN)
    });
    let c = DMatrix::from_fn(m, m, |i, j| {
        green(Channel::Kk, times_p[i], times_p[j]).unwrap_or(f64::NAN) / omega_ref
    });
    let b = DMatrix::from_fn(n, m, |i, j| {
        -green(Channel::Jk, times_x[i], times_p[j]).unwrap_or(f64::NAN)
    });
    // Surface domain errors with their proper variant.
    for &t in times_x.iter().chain(times_p) {
        evaluator.green(Channel::Jj, t, t)?;
    }

    let factors = block_factors(&a, &b, &c)?;
    let det_g = factors
        .det_via_c
        .or(factors.det_via_a)
        .expect("one route is regular");
    let g = assemble(&a, &b, &c);

    if mode == SmearingMode::Euclidean && g.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(
            "euclidean mode needs a positive definite Green-function matrix".into(),
        ));
    }

    let (hbar, mass) = (params.hbar, params.mass);
    let mut times = times_x.to_vec();
    times.extend_from_slice(times_p);
    let mean = times_x
        .iter()
        .map(|&t| path.map_or(0.0, |p| p.x(t)))
        .chain(times_p.iter().map(|&t| path.map_or(0.0, |p| p.p(t))))
        .collect();
    let scale = std::iter::repeat_n((hbar / (mass * omega_ref)).sqrt(), n)
        .chain(std::iter::repeat_n(-(hbar * mass * omega_ref).sqrt(), m))
        .collect();

    Ok(SmearingDistribution {
        n_x: n,
        n_p: m,
        times,
        mode,
        omega_ref,
        mean,
        scale,
        g,
        g_inv: factors.inverse,
        det_g,
        det_via_c: factors.det_via_c,
        det_via_a: factors.det_via_a,
    })
}

impl SmearingDistribution {
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn dim(&self) -> usize {
        self.n_x + self.n_p
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn mode(&self) -> SmearingMode {
        self.mode
    }

    pub fn omega_ref(&self) -> f64 {
        self.omega_ref
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn g_inv(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    pub fn a(&self) -> DMatrix<f64> {
        self.g.view((0, 0), (self.n_x, self.n_x)).into_owned()
    }

    pub fn b(&self) -> DMatrix<f64> {
        self.g
            .view((0, self.n_x), (self.n_x, self.n_p))
            .into_owned()
    }

    pub fn c(&self) -> DMatrix<f64> {
        self.g
            .view((self.n_x, self.n_x), (self.n_p, self.n_p))
            .into_owned()
    }

    pub fn det_g(&self) -> f64 {
        self.det_g
    }

    /// `det C · det(A − B C⁻¹ Bᵀ)`, when `C` is regular.
    pub fn det_via_c(&self) -> Option<f64> {
        self.det_via_c
    }

    /// `det A · det(C − Bᵀ A⁻¹ B)`, when `A` is regular.
    pub fn det_via_a(&self) -> Option<f64> {
        self.det_via_a
    }

    /// Relative difference of the two determinant routes, when both exist.
    pub fn det_cross_check(&self) -> Option<f64> {
        match (self.det_via_c, self.det_via_a) {
            (Some(x), Some(y)) => Some((x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)),
            _ => None,
        }
    }

    /// Max entry of `|G·G⁻¹ − 1|`.
    pub fn inverse_residual(&self) -> f64 {
        let d = self.dim();
        (&self.g * &self.g_inv - DMatrix::identity(d, d))
            .abs()
            .max()
    }

    /// The dimensionless vector `w` of a physical point `(x_1…x_N, p_1…p_M)`.
    pub fn w_of(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dim() {
            return Err(Error::Size(format!(
                "point has {} entries, expected {}",
                point.len(),
                self.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|a| (point[a] - self.mean[a]) / self.scale[a])
            .collect())
    }

    /// Covariance of the physical fluctuations: `iħ/M·G_jj`, `iħ·G_jk`,
    /// `iħM·G_kk` in the Fresnel mode, without the `i` in the euclidean mode.
    pub fn covariance(&self) -> DMatrix<Complex64> {
        let unit = match self.mode {
            SmearingMode::Fresnel => Complex64::i(),
            SmearingMode::Euclidean => Complex64::new(1.0, 0.0),
        };
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| {
            unit * self.scale[a] * self.scale[b] * self.g[(a, b)]
        })
    }

    /// `E[Π y_a^{k_a}]` of the physical variables, `|k| ≤ 8`.
    pub fn moments(&self, multi_index: &[usize]) -> Result<Complex64> {
        if multi_index.len() != self.dim() {
            return Err(Error::Size(format!(
                "multi-index has {} entries, expected {}",
                multi_index.len(),
                self.dim()
            )));
        }
        if multi_index.iter().sum::<usize>() > MAX_MOMENT_ORDER {
            return Err(Error::Size(format!(
                "moment order exceeds {MAX_MOMENT_ORDER}"
            )));
        }
        let polys: Vec<Vec<f64>> = multi_index
            .iter()
            .map(|&k| {
                let mut c = vec![0.0; k + 1];
                c[k] = 1.0;
                c
            })
            .collect();
        Ok(self.polynomial_expectation(&polys))
    }

    /// `E[Π_a F_a(y_a)]`, one function per insertion in the order
    /// positions then momenta.
    pub fn expectation(&self, functions: &[LocalFunction]) -> Result<Complex64> {
        if functions.len() != self.dim() {
            return Err(Error::Size(format!(
                "{} functions for {} insertions",
                functions.len(),
                self.dim()
            )));
        }
        for (a, f) in functions.iter().enumerate() {
            let expected = if a < self.n_x {
                Argument::Position
            } else {
                Argument::Momentum
            };
            if f.argument != expected {
                return Err(Error::InvalidParameter(format!(
                    "function {a} takes a {:?} argument, slot is {:?}",
                    f.argument, expected
                )));
            }
            f.validate(self.mode)?;
        }
        if functions.iter().all(LocalFunction::is_polynomial) {
            let polys: Vec<Vec<f64>> = functions
                .iter()
                .map(|f| match &f.kind {
                    FunctionKind::Polynomial { coefficients } => coefficients.clone(),
                    _ => unreachable!(),
                })
                .collect();
            return Ok(self.polynomial_expectation(&polys));
        }
        if self.mode == SmearingMode::Fresnel {
            return Err(Error::Mode(
                "non-polynomial functions need the euclidean mode".into(),
            ));
        }
        if self.dim() > MAX_QUADRATURE_DIM {
            return Err(Error::Size(format!(
                "quadrature over {} axes exceeds the cap of {MAX_QUADRATURE_DIM}",
                self.dim()
            )));
        }
        Ok(Complex64::new(self.quadrature(functions), 0.0))
    }

    fn polynomial_expectation(&self, polys: &[Vec<f64>]) -> Complex64 {
        let central: Vec<Vec<f64>> = polys
            .iter()
            .zip(&self.mean)
            .map(|(c, &mu)| taylor_shift(c, mu))
            .collect();
        let mut moments = CentralMoments::new(self.covariance());
        let mut total = Complex64::new(0.0, 0.0);
        let mut index = vec![0usize; central.len()];
        loop {
            let coeff: f64 = index.iter().zip(&central).map(|(&k, c)| c[k]).product();
            if coeff != 0.0 {
                total += coeff * moments.get(&index);
            }
            // Odometer over all multi-indices.
            let mut axis = 0;
            loop {
                if axis == index.len() {
                    return total;
                }
                index[axis] += 1;
                if index[axis] < central[axis].len() {
                    break;
                }
                index[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Tensor-product Gauss–Hermite against the euclidean density.
    fn quadrature(&self, functions: &[LocalFunction]) -> f64 {
        let d = self.dim();
        let cov = DMatrix::from_fn(d, d, |a, b| self.scale[a] * self.scale[b] * self.g[(a, b)]);
        let l = cov.cholesky().expect("checked at construction").l();
        let rule = GaussHermite::new(NonZeroUsize::new(QUADRATURE_ORDER).expect("nonzero"));
        let nodes: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x, w / PI.sqrt()))
            .collect();
        let q = nodes.len();
        let points = q.pow(d as u32);
        (0..points)
            .into_par_iter()
            .map(|flat| {
                let mut u = DVector::zeros(d);
                let mut weight = 1.0;
                let mut rest = flat;
                for a in 0..d {
                    let (x, w) = nodes[rest % q];
                    rest /= q;
                    u[a] = std::f64::consts::SQRT_2 * x;
                    weight *= w;
                }
                let z = &l * u;
                let value: f64 = functions
                    .iter()
                    .enumerate()
                    .map(|(a, f)| f.eval(self.mean[a] + z[a]))
                    .product();
                weight * value
            })
            .sum()
    }
}

/// Coefficients of `p(μ + z)` in powers of `z`.
fn taylor_shift(c: &[f64], mu: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    let n = out.len();
    // Repeated synthetic division.
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += mu * out[j + 1];
        }
    }
    out
}

/// Central Gaussian moments `E[z^k]` by the Isserlis recursion
/// `E[z^k] = Σ_j Σ_ij (k − e_i)_j E[z^{k − e_i − e_j}]`, memoized.
struct CentralMoments {
    cov: DMatrix<Complex64>,
    memo: HashMap<Vec<usize>, Complex64>,
}

impl CentralMoments {
    fn new(cov: DMatrix<Complex64>) -> Self {
        Self {
            cov,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, k: &[usize]) -> Complex64 {
        let total: usize = k.iter().sum();
        if total == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if total % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        if let Some(&v) = self.memo.get(k) {
            return v;
        }
        let i = k.iter().position(|&v| v > 0).expect("nonzero order");
        let mut reduced = k.to_vec();
        reduced[i] -= 1;
        let mut value = Complex64::new(0.0, 0.0);
        for j in 0..k.len() {
            if reduced[j] == 0 {
                continue;
            }
            let count = reduced[j] as f64;
            let mut next = reduced.clone();
            next[j] -= 1;
            value += self.cov[(i, j)] * count * self.get(&next);
        }
        self.memo.insert(k.to_vec(), value);
        value
    }
}
