use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::frequency::PhysicalParams;
use crate::greens::{Channel, GreensEvaluator};

/// A contraction `[a b]` of two letters, tagged by channel and time labels.
///
/// Canonical form: `kj(a, b)` is stored as `jk(b, a)`, and the symmetric
/// channels keep their labels sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Propagator {
    pub channel: Channel,
    pub a: u32,
    pub b: u32,
}

impl Propagator {
    pub fn new(channel: Channel, a: u32, b: u32) -> Self {
        match channel {
            Channel::Kj => Self {
                channel: Channel::Jk,
                a: b,
                b: a,
            },
            Channel::Jk => Self { channel, a, b },
            Channel::Jj | Channel::Kk => Self {
                channel,
                a: a.min(b),
                b: a.max(b),
            },
        }
    }
}

impl fmt::Display for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G_{}({},{})", self.channel.name(), self.a, self.b)
    }
}

/// Sorted propagator factors and the derivative order of F at each label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    pub propagators: Vec<Propagator>,
    pub f_derivatives: BTreeMap<u32, u32>,
}

impl Monomial {
    pub fn new(mut propagators: Vec<Propagator>, f_derivatives: BTreeMap<u32, u32>) -> Self {
        propagators.sort();
        Self {
            propagators,
            f_derivatives,
        }
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut props = self.propagators.clone();
        props.extend_from_slice(&other.propagators);
        let mut derivs = self.f_derivatives.clone();
        for (&label, &order) in &other.f_derivatives {
            *derivs.entry(label).or_insert(0) += order;
        }
        Monomial::new(props, derivs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: BigRational,
    pub monomial: Monomial,
}

/// A finite sum of terms with exact rational coefficients, kept in
/// canonical order with like terms merged, so that `==` is syntactic
/// equality of the normal form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WickExpression {
    terms: BTreeMap<Monomial, BigRational>,
}

impl WickExpression {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut e = Self::zero();
        e.add_term(BigRational::one(), Monomial::default());
        e
    }

    pub fn from_monomial(coeff: BigRational, monomial: Monomial) -> Self {
        let mut e = Self::zero();
        e.add_term(coeff, monomial);
        e
    }

    pub fn add_term(&mut self, coeff: BigRational, monomial: Monomial) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(monomial).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&mut self, other: &WickExpression) {
        for (m, c) in &other.terms {
            self.add_term(c.clone(), m.clone());
        }
    }

    pub fn scale(&self, s: &BigRational) -> WickExpression {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(c * s, m.clone());
        }
        out
    }

    pub fn mul(&self, other: &WickExpression) -> WickExpression {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(c1 * c2, m1.times(m2));
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|(m, c)| Term {
            coeff: c.clone(),
            monomial: m.clone(),
        })
    }

    pub fn coefficient(&self, monomial: &Monomial) -> BigRational {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Sum of all coefficients, the number of pairings for a pure expansion.
    pub fn coefficient_sum(&self) -> BigRational {
        self.terms
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c)
    }

    /// Numerical value with `jj → iħ/M·G_jj`, `jk → iħ·G_jk`,
    /// `kk → iħM·G_kk`, and F derivatives read from `f_table` by order.
    pub fn evaluate(
        &self,
        evaluator: &GreensEvaluator,
        label_times: &BTreeMap<u32, f64>,
        params: &PhysicalParams,
        f_table: &BTreeMap<u32, Complex64>,
    ) -> Result<Complex64> {
        evaluate_with(self, label_times, f_table, |p, t1, t2| {
            let g = evaluator.green(p.channel, t1, t2)?;
            let scale = match p.channel {
                Channel::Jj => params.hbar / params.mass,
                Channel::Jk | Channel::Kj => params.hbar,
                Channel::Kk => params.hbar * params.mass,
            };
            Ok(Complex64::new(0.0, scale * g))
        })
    }
}

/// Evaluates an expression given the value of each propagator factor.
pub fn evaluate_with(
    expr: &WickExpression,
    label_times: &BTreeMap<u32, f64>,
    f_table: &BTreeMap<u32, Complex64>,
    mut factor: impl FnMut(&Propagator, f64, f64) -> Result<Complex64>,
) -> Result<Complex64> {
    let time = |label: u32| {
        label_times
            .get(&label)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("label {label} has no time")))
    };
    let mut total = Complex64::new(0.0, 0.0);
    for (monomial, coeff) in &expr.terms {
        let mut value = Complex64::new(rational_to_f64(coeff), 0.0);
        for p in &monomial.propagators {
            value *= factor(p, time(p.a)?, time(p.b)?)?;
        }
        for &order in monomial.f_derivatives.values() {
            value *= *f_table
                .get(&order)
                .ok_or(Error::MissingDerivative(order as usize))?;
        }
        total += value;
    }
    Ok(total)
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl fmt::Display for WickExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            let mut props = m.propagators.iter().peekable();
            while let Some(p) = props.next() {
                let mut power = 1;
                while props.peek() == Some(&p) {
                    props.next();
                    power += 1;
                }
                if power == 1 {
                    write!(f, "·{p}")?;
                } else {
                    write!(f, "·{p}^{power}")?;
                }
            }
            for (label, order) in &m.f_derivatives {
                write!(f, "·F{label}^({order})")?;
            }
        }
        Ok(())
    }
}
