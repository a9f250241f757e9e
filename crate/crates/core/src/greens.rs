//! Green functions of the oscillator in the Dirichlet (x), momentum (p) and
//! periodic representations, and the classical paths built from the same
//! fundamental solutions.
//!
//! Every channel is a short list of separable terms
//! `coeff · L(t) R(t')`, each active on the lower triangle `t > t'`, the
//! upper triangle `t < t'`, or everywhere. `L` and `R` are linear
//! combinations of D_a and D_b or of their derivatives. On the diagonal the
//! two triangles are averaged (Θ(0) = ½).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::PhysicalParams;
use crate::fundamental::{FundamentalPair, Solution};
use crate::quadrature::CumulativeIntegral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    DirichletX,
    MomentumP,
    Periodic,
}

/// Which currents a Green function couples: `j` is the position current,
/// `k` the momentum current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Jj,
    Jk,
    Kj,
    Kk,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Jj, Channel::Jk, Channel::Kj, Channel::Kk];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Jj => "jj",
            Channel::Jk => "jk",
            Channel::Kj => "kj",
            Channel::Kk => "kk",
        }
    }

    /// The channel with its two indices swapped.
    pub fn transpose(self) -> Channel {
        match self {
            Channel::Jk => Channel::Kj,
            Channel::Kj => Channel::Jk,
            other => other,
        }
    }

    fn left_is_k(self) -> bool {
        matches!(self, Channel::Kj | Channel::Kk)
    }

    fn right_is_k(self) -> bool {
        matches!(self, Channel::Jk | Channel::Kk)
    }
}

/// `ca·D_a + cb·D_b`, or its time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub ca: f64,
    pub cb: f64,
    pub derivative: bool,
}

impl Mode {
    pub const DA: Mode = Mode::new(1.0, 0.0);
    pub const DB: Mode = Mode::new(0.0, 1.0);

    pub const fn new(ca: f64, cb: f64) -> Self {
        Self {
            ca,
            cb,
            derivative: false,
        }
    }

    /// The time derivative of an undifferentiated mode.
    pub fn dot(self) -> Self {
        assert!(!self.derivative, "second derivatives are not represented");
        Self {
            derivative: true,
            ..self
        }
    }

    pub fn eval(&self, pair: &FundamentalPair, t: f64) -> f64 {
        let mut v = 0.0;
        if self.ca != 0.0 {
            v += self.ca * pair.eval(Solution::A, self.derivative, t);
        }
        if self.cb != 0.0 {
            v += self.cb * pair.eval(Solution::B, self.derivative, t);
        }
        v
    }

    pub fn samples(&self, pair: &FundamentalPair) -> Vec<f64> {
        let a = pair.samples(Solution::A, self.derivative);
        let b = pair.samples(Solution::B, self.derivative);
        a.iter()
            .zip(b)
            .map(|(x, y)| self.ca * x + self.cb * y)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Active for `t > t'`.
    Lower,
    /// Active for `t < t'`.
    Upper,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    pub branch: Branch,
    pub coeff: f64,
    pub left: Mode,
    pub right: Mode,
}

impl KernelTerm {
    fn weight(&self, t: f64, t2: f64) -> f64 {
        match self.branch {
            Branch::Both => 1.0,
            Branch::Lower if t > t2 => 1.0,
            Branch::Upper if t < t2 => 1.0,
            _ if t == t2 => 0.5,
            _ => 0.0,
        }
    }
}

/// A Green-function channel as a sum of separable terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub terms: Vec<KernelTerm>,
}

impl Kernel {
    pub fn eval(&self, pair: &FundamentalPair, t: f64, t2: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let w = term.weight(t, t2);
                if w == 0.0 {
                    0.0
                } else {
                    w * term.coeff * term.left.eval(pair, t) * term.right.eval(pair, t2)
                }
            })
            .sum()
    }
}

/// Green functions of one representation over a fixed fundamental pair.
#[derive(Debug, Clone)]
pub struct GreensEvaluator<'a> {
    pair: &'a FundamentalPair,
    representation: Representation,
    d: f64,
    da_dot_end: f64,
    db_dot_start: f64,
    a: f64,
    m_denom: f64,
}

impl<'a> GreensEvaluator<'a> {
    pub fn new(pair: &'a FundamentalPair, representation: Representation) -> Result<Self> {
        let d = pair.check_caustic()?;
        let da_dot_end = pair.da_dot_end();
        let db_dot_start = pair.db_dot_start();
        let a = da_dot_end - db_dot_start - 2.0;
        let m_denom = 1.0 + da_dot_end * db_dot_start;
        let tol = pair.caustic_tol();
        match representation {
            Representation::DirichletX => {}
            Representation::MomentumP => check_denominator("1 + Ḋ_a(t_b)Ḋ_b(t_a)", m_denom, tol)?,
            Representation::Periodic => check_denominator("Ḋ_a(t_b) − Ḋ_b(t_a) − 2", a, tol)?,
        }
        Ok(Self {
            pair,
            representation,
            d,
            da_dot_end,
            db_dot_start,
            a,
            m_denom,
        })
    }

    pub fn pair(&self) -> &'a FundamentalPair {
        self.pair
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// D_a(t_b).
    pub fn da_end(&self) -> f64 {
        self.d
    }

    pub fn da_dot_end(&self) -> f64 {
        self.da_dot_end
    }

    pub fn db_dot_start(&self) -> f64 {
        self.db_dot_start
    }

    /// Ḋ_a(t_b) − Ḋ_b(t_a) − 2.
    pub fn periodic_denominator(&self) -> f64 {
        self.a
    }

    /// 1 + Ḋ_a(t_b)Ḋ_b(t_a).
    pub fn momentum_denominator(&self) -> f64 {
        self.m_denom
    }

    pub fn kernel(&self, ch: Channel) -> Kernel {
        let (p, q, coeff) = match self.representation {
            Representation::DirichletX | Representation::Periodic => {
                (Mode::DB, Mode::DA, 1.0 / self.d)
            }
            Representation::MomentumP => (
                Mode::new(1.0, self.da_dot_end),
                Mode::new(self.db_dot_start, -1.0),
                1.0 / (self.d * self.m_denom),
            ),
        };
        let l = |m: Mode| if ch.left_is_k() { m.dot() } else { m };
        let r = |m: Mode| if ch.right_is_k() { m.dot() } else { m };
        let mut terms = vec![
            KernelTerm {
                branch: Branch::Lower,
                coeff,
                left: l(p),
                right: r(q),
            },
            KernelTerm {
                branch: Branch::Upper,
                coeff,
                left: l(q),
                right: r(p),
            },
        ];
        if self.representation == Representation::Periodic {
            let g = Mode::new(1.0, 1.0);
            terms.push(KernelTerm {
                branch: Branch::Both,
                coeff: 1.0 / (self.a * self.d),
                left: l(g),
                right: r(g),
            });
        }
        Kernel { terms }
    }

    pub fn green(&self, ch: Channel, t: f64, t2: f64) -> Result<f64> {
        self.pair.check_domain(t)?;
        self.pair.check_domain(t2)?;
        // Canonical argument order makes the symmetries hold bit for bit.
        let (ch, t, t2) = match ch {
            Channel::Jj | Channel::Kk if t < t2 => (ch, t2, t),
            Channel::Kj => (Channel::Jk, t2, t),
            _ => (ch, t, t2),
        };
        Ok(self.kernel(ch).eval(self.pair, t, t2))
    }

    /// CSV `t,t2,value` over the tensor grid of `n + 1` equispaced points.
    pub fn grid_csv(&self, ch: Channel, n: usize) -> Result<String> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one interval".into(),
            ));
        }
        let (t_a, t_b) = (self.pair.t_a(), self.pair.t_b());
        let node = |i: usize| {
            if i == n {
                t_b
            } else {
                t_a + (t_b - t_a) * i as f64 / n as f64
            }
        };
        let kernel = self.kernel(ch);
        let mut out = String::from("t,t2,value\n");
        for i in 0..=n {
            for k in 0..=n {
                let (t, t2) = (node(i), node(k));
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    t,
                    t2,
                    kernel.eval(self.pair, t, t2)
                ));
            }
        }
        Ok(out)
    }
}

fn check_denominator(quantity: &'static str, value: f64, tol: f64) -> Result<()> {
    if value.abs() <= tol || !value.is_finite() {
        return Err(Error::Caustic {
            quantity,
            value,
            tol,
        });
    }
    Ok(())
}

/// `|[∂_t G_jj(t2+, t2) − ∂_t G_jj(t2−, t2)] + 1|` from the one-sided
/// analytic derivatives of the channel's separable terms.
pub fn jump_residual(e: &GreensEvaluator, t2: f64) -> Result<f64> {
    e.pair.check_domain(t2)?;
    let mut jump = 0.0;
    for term in e.kernel(Channel::Jj).terms {
        let v = term.coeff * term.left.dot().eval(e.pair, t2) * term.right.eval(e.pair, t2);
        match term.branch {
            Branch::Lower => jump += v,
            Branch::Upper => jump -= v,
            Branch::Both => {}
        }
    }
    Ok((jump + 1.0).abs())
}

/// `∫ G_ch(t, t') f(t') dt'` for node samples `f` on the pair grid.
///
/// Each separable term reduces to a running integral of `R·f`, so the
/// result keeps fourth order despite the kink of G on the diagonal.
#[derive(Debug, Clone)]
pub struct KernelIntegral<'a> {
    pair: &'a FundamentalPair,
    parts: Vec<(KernelTerm, Vec<f64>)>,
}

impl<'a> KernelIntegral<'a> {
    pub fn new(e: &GreensEvaluator<'a>, ch: Channel, f: &[f64]) -> Result<Self> {
        let pair = e.pair;
        if f.len() != pair.n_steps() + 1 {
            return Err(Error::Size(format!(
                "samples have length {}, grid has {} nodes",
                f.len(),
                pair.n_steps() + 1
            )));
        }
        let parts = e
            .kernel(ch)
            .terms
            .into_iter()
            .map(|term| {
                let product = term
                    .right
                    .samples(pair)
                    .iter()
                    .zip(f)
                    .map(|(r, x)| r * x)
                    .collect();
                (term, product)
            })
            .collect();
        Ok(Self { pair, parts })
    }

    pub fn at(&self, t: f64) -> f64 {
        let (t_a, h) = (self.pair.t_a(), self.pair.step());
        self.parts
            .iter()
            .map(|(term, product)| {
                let cum = CumulativeIntegral::new(product, t_a, h);
                let inner = match term.branch {
                    Branch::Lower => cum.at(t),
                    Branch::Upper => cum.from(t),
                    Branch::Both => cum.total(),
                };
                term.coeff * term.left.eval(self.pair, t) * inner
            })
            .sum()
    }

    /// Values at every grid node, sharing the running integrals.
    pub fn at_nodes(&self) -> Vec<f64> {
        let n = self.pair.n_steps();
        let (t_a, h) = (self.pair.t_a(), self.pair.step());
        let mut out = vec![0.0; n + 1];
        for (term, product) in &self.parts {
            let cum = CumulativeIntegral::new(product, t_a, h);
            let left = term.left.samples(self.pair);
            for (i, o) in out.iter_mut().enumerate() {
                let inner = match term.branch {
                    Branch::Lower => cum.at_node(i),
                    Branch::Upper => cum.total() - cum.at_node(i),
                    Branch::Both => cum.total(),
                };
                *o += term.coeff * left[i] * inner;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathEnds {
    Position { x_a: f64, x_b: f64 },
    Momentum { p_a: f64, p_b: f64 },
}

/// A homogeneous classical solution `x(t) = ca·D_a(t) + cb·D_b(t)`.
#[derive(Debug, Clone)]
pub struct ClassicalPath<'a> {
    pair: &'a FundamentalPair,
    ends: PathEnds,
    mode: Mode,
    mass: f64,
}

impl<'a> ClassicalPath<'a> {
    pub fn ends(&self) -> PathEnds {
        self.ends
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn x(&self, t: f64) -> f64 {
        self.mode.eval(self.pair, t)
    }

    pub fn p(&self, t: f64) -> f64 {
        self.mass * self.mode.dot().eval(self.pair, t)
    }

    pub fn x_samples(&self) -> Vec<f64> {
        self.mode.samples(self.pair)
    }

    pub fn p_samples(&self) -> Vec<f64> {
        self.mode
            .dot()
            .samples(self.pair)
            .into_iter()
            .map(|v| self.mass * v)
            .collect()
    }
}

/// `x_cl(t) = [D_b(t) x_a + D_a(t) x_b] / D_a(t_b)`.
pub fn classical_path_x<'a>(
    pair: &'a FundamentalPair,
    x_a: f64,
    x_b: f64,
    params: &PhysicalParams,
) -> Result<ClassicalPath<'a>> {
    let d = pair.check_caustic()?;
    Ok(ClassicalPath {
        pair,
        ends: PathEnds::Position { x_a, x_b },
        mode: Mode::new(x_b / d, x_a / d),
        mass: params.mass,
    })
}

/// The solution with `M ẋ(t_a) = p_a` and `M ẋ(t_b) = p_b`.
pub fn classical_path_p<'a>(
    pair: &'a FundamentalPair,
    p_a: f64,
    p_b: f64,
    params: &PhysicalParams,
) -> Result<ClassicalPath<'a>> {
    let (da_dot, db_dot) = (pair.da_dot_end(), pair.db_dot_start());
    let m = 1.0 + da_dot * db_dot;
    check_denominator("1 + Ḋ_a(t_b)Ḋ_b(t_a)", m, pair.caustic_tol())?;
    let scale = params.mass * m;
    Ok(ClassicalPath {
        pair,
        ends: PathEnds::Momentum { p_a, p_b },
        mode: Mode::new((p_a + p_b * db_dot) / scale, (p_a * da_dot - p_b) / scale),
        mass: params.mass,
    })
}

/// `Δx_cl(t) = −(1/M) ∫ G_jj(t,t') j(t') dt'` for `j` sampled on the grid.
pub fn inhomogeneous_shift(
    e: &GreensEvaluator,
    j: &[f64],
    t: f64,
    params: &PhysicalParams,
) -> Result<f64> {
    e.pair.check_domain(t)?;
    Ok(-KernelIntegral::new(e, Channel::Jj, j)?.at(t) / params.mass)
}

/// `max_ch |G_ch(t_a, t2) − G_ch(t_b, t2)|`, zero for a periodic kernel.
pub fn periodicity_residual(e: &GreensEvaluator, t2: f64) -> Result<f64> {
    let (t_a, t_b) = (e.pair().t_a(), e.pair().t_b());
    let mut worst = 0.0f64;
    for ch in Channel::ALL {
        worst = worst.max((e.green(ch, t_a, t2)? - e.green(ch, t_b, t2)?).abs());
    }
    Ok(worst)
}
