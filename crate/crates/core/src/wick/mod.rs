//! Exact Wick combinatorics for Gaussian expectation values.
//!
//! Coefficients are exact rationals. Propagator factors carry a channel and
//! a pair of time labels; a caller maps labels to times when evaluating.

mod census;
mod expr;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frequency::PhysicalParams;
use crate::greens::{Channel, GreensEvaluator};

pub use census::{connected_census, Census, DiagramSignature};
pub use expr::{evaluate_with, Monomial, Propagator, Term, WickExpression};

use expr::int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X,
    P,
}

impl Letter {
    fn symbol(self) -> char {
        match self {
            Letter::X => 'x',
            Letter::P => 'p',
        }
    }
}

/// The channel of the contraction `⟨a b⟩` with `a` to the left.
pub fn contraction_channel(a: Letter, b: Letter) -> Channel {
    match (a, b) {
        (Letter::X, Letter::X) => Channel::Jj,
        (Letter::X, Letter::P) => Channel::Jk,
        (Letter::P, Letter::X) => Channel::Kj,
        (Letter::P, Letter::P) => Channel::Kk,
    }
}

/// An ordered product of fluctuation operators `x̃(t_label)`, `p̃(t_label)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OperatorWord {
    pub letters: Vec<(Letter, u32)>,
}

impl OperatorWord {
    pub fn new(letters: Vec<(Letter, u32)>) -> Self {
        Self { letters }
    }

    /// `a^n(label) b^m(label')`-style words.
    pub fn power(letter: Letter, n: usize, label: u32) -> Self {
        Self::new(vec![(letter, label); n])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &OperatorWord) -> OperatorWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        OperatorWord::new(letters)
    }

    /// The same letters with every label replaced by `label`.
    pub fn relabel(&self, label: u32) -> OperatorWord {
        OperatorWord::new(self.letters.iter().map(|&(l, _)| (l, label)).collect())
    }

    /// Parses a monomial such as `x^4`, `x^2 p^2`, `x p x` or `p^3*x`.
    pub fn parse_monomial(s: &str, label: u32) -> Result<Self> {
        let mut letters = Vec::new();
        for token in s
            .split(|c: char| c.is_whitespace() || c == '*')
            .filter(|t| !t.is_empty())
        {
            let (base, exp) = match token.split_once('^') {
                Some((b, e)) => {
                    let e: usize = e.trim().parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad exponent in `{token}`"))
                    })?;
                    (b.trim(), e)
                }
                None => (token, 1),
            };
            let letter = match base {
                "x" => Letter::X,
                "p" => Letter::P,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown operator `{base}` in `{s}`; expected x or p"
                    )))
                }
            };
            letters.extend(std::iter::repeat_n((letter, label), exp));
        }
        if letters.is_empty() {
            return Err(Error::InvalidParameter(format!("empty monomial `{s}`")));
        }
        Ok(Self::new(letters))
    }

    pub fn to_monomial_string(&self) -> String {
        let mut out: Vec<String> = Vec::new();
        let mut iter = self.letters.iter().peekable();
        while let Some(&(l, _)) = iter.next() {
            let mut n = 1;
            while iter.peek().map(|&&(m, _)| m) == Some(l) {
                iter.next();
                n += 1;
            }
            out.push(if n == 1 {
                l.symbol().to_string()
            } else {
                format!("{}^{}", l.symbol(), n)
            });
        }
        out.join(" ")
    }
}

/// A perfect matching as index pairs `(i, j)`, `i < j`.
pub type Pairing = Vec<(usize, usize)>;

/// All `(len − 1)!!` perfect matchings, in lexicographic order. Odd lengths
/// give no matchings.
pub fn enumerate_pairings(word: &OperatorWord) -> Vec<Pairing> {
    let n = word.len();
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n / 2);
    pairings_rec(&mut used, &mut current, &mut out);
    out
}

fn pairings_rec(used: &mut [bool], current: &mut Pairing, out: &mut Vec<Pairing>) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(current.clone());
        return;
    };
    used[first] = true;
    for second in first + 1..used.len() {
        if used[second] {
            continue;
        }
        used[second] = true;
        current.push((first, second));
        pairings_rec(used, current, out);
        current.pop();
        used[second] = false;
    }
    used[first] = false;
}

/// The propagator monomial of one pairing.
pub fn pairing_monomial(word: &OperatorWord, pairing: &Pairing) -> Monomial {
    let props = pairing
        .iter()
        .map(|&(i, j)| {
            let (a, la) = word.letters[i];
            let (b, lb) = word.letters[j];
            Propagator::new(contraction_channel(a, b), la, lb)
        })
        .collect();
    Monomial::new(props, BTreeMap::new())
}

/// `⟨word⟩` as the brute-force sum over all pairings.
pub fn expand_by_enumeration(word: &OperatorWord) -> WickExpression {
    let mut e = WickExpression::zero();
    for p in enumerate_pairings(word) {
        e.add_term(BigRational::one(), pairing_monomial(word, &p));
    }
    e
}

/// `k!!` with `(−1)!! = 0!! = 1`.
pub fn double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Number of pairings of `a^n(1) b^m(2)` with exactly `l` cross contractions:
/// `(n−l−1)!! (m−l−1)!! n! m! / (l! (n−l)! (m−l)!)`.
pub fn multiplicity_c(n: u32, m: u32, l: u32) -> Result<BigRational> {
    if l > n.min(m) || !(n - l).is_multiple_of(2) || !(m - l).is_multiple_of(2) {
        return Err(Error::Parity(format!(
            "c_l needs l ≤ min(n, m) and l ≡ n ≡ m (mod 2); got n={n}, m={m}, l={l}"
        )));
    }
    let (n, m, l) = (n as u64, m as u64, l as u64);
    let num = double_factorial(n as i64 - l as i64 - 1)
        * double_factorial(m as i64 - l as i64 - 1)
        * factorial(n)
        * factorial(m);
    let den = factorial(l) * factorial(n - l) * factorial(m - l);
    Ok(BigRational::new(num, den))
}

fn power(p: Propagator, k: u64) -> Monomial {
    Monomial::new(vec![p; k as usize], BTreeMap::new())
}

/// `⟨a^n(1) b^m(2)⟩` from the closed-form sum over `l` with the `c_l`
/// multiplicities.
pub fn mixed_two_point(n: u32, m: u32, kinds: (Letter, Letter)) -> WickExpression {
    let mut out = WickExpression::zero();
    if (n + m) % 2 == 1 {
        return out;
    }
    let (a, b) = kinds;
    let self1 = Propagator::new(contraction_channel(a, a), 1, 1);
    let self2 = Propagator::new(contraction_channel(b, b), 2, 2);
    let cross = Propagator::new(contraction_channel(a, b), 1, 2);
    for l in (n % 2..=n.min(m)).step_by(2) {
        let c = multiplicity_c(n, m, l).expect("parity checked");
        let mono = power(self1, ((n - l) / 2) as u64)
            .times(&power(self2, ((m - l) / 2) as u64))
            .times(&power(cross, l as u64));
        out.add_term(c, mono);
    }
    out
}

/// The four derivative rules `⟨F(a(1)) b^n(2)⟩`, named by `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeRule {
    Xx,
    Xp,
    Pp,
    Px,
}

impl DerivativeRule {
    pub const ALL: [DerivativeRule; 4] = [
        DerivativeRule::Xx,
        DerivativeRule::Xp,
        DerivativeRule::Pp,
        DerivativeRule::Px,
    ];

    /// `(argument of F, power letter)`.
    pub fn letters(self) -> (Letter, Letter) {
        match self {
            DerivativeRule::Xx => (Letter::X, Letter::X),
            DerivativeRule::Xp => (Letter::X, Letter::P),
            DerivativeRule::Pp => (Letter::P, Letter::P),
            DerivativeRule::Px => (Letter::P, Letter::X),
        }
    }

    fn self_and_cross(self, f_label: u32, label: u32) -> (Propagator, Propagator) {
        let (a, b) = self.letters();
        (
            Propagator::new(contraction_channel(b, b), label, label),
            Propagator::new(contraction_channel(a, b), f_label, label),
        )
    }
}

fn f_derivative(label: u32, order: u32) -> Monomial {
    Monomial::new(Vec::new(), BTreeMap::from([(label, order)]))
}

/// `Σ_l n!/((n−l)!! l!) [bb]^{(n−l)/2} [ab]^l ⟨F^{(l)}⟩` for F at label
/// `f_label` and the power at label `f_label + 1`.
pub fn derivative_rule(f_label: u32, n: u32, rule: DerivativeRule) -> WickExpression {
    let label = f_label + 1;
    let (selfp, cross) = rule.self_and_cross(f_label, label);
    let mut out = WickExpression::zero();
    for l in (n % 2..=n).step_by(2) {
        let coeff = BigRational::new(
            factorial(n as u64),
            double_factorial((n - l) as i64) * factorial(l as u64),
        );
        let mono = power(selfp, ((n - l) / 2) as u64)
            .times(&power(cross, l as u64))
            .times(&f_derivative(f_label, l));
        out.add_term(coeff, mono);
    }
    out
}

/// Reduces `⟨F(f_letter(f_label)) · rest⟩` by the recursion
/// `⟨F y R⟩ = Σ_z [y z] ⟨F R∖z⟩ + [F y] ⟨F′ R⟩`.
pub fn generalized_wick_reduce(
    f_letter: Letter,
    f_label: u32,
    rest: &OperatorWord,
) -> WickExpression {
    reduce_rec(f_letter, f_label, &rest.letters, 0)
}

fn reduce_rec(
    f_letter: Letter,
    f_label: u32,
    rest: &[(Letter, u32)],
    order: u32,
) -> WickExpression {
    let Some((&(y, ly), tail)) = rest.split_first() else {
        return WickExpression::from_monomial(BigRational::one(), f_derivative(f_label, order));
    };
    let mut out = WickExpression::zero();
    for (idx, &(z, lz)) in tail.iter().enumerate() {
        let mut remaining = tail.to_vec();
        remaining.remove(idx);
        let contraction = Propagator::new(contraction_channel(y, z), ly, lz);
        let inner = reduce_rec(f_letter, f_label, &remaining, order);
        out.add(&inner.mul(&WickExpression::from_monomial(
            BigRational::one(),
            power(contraction, 1),
        )));
    }
    let cf = Propagator::new(contraction_channel(f_letter, y), f_label, ly);
    let inner = reduce_rec(f_letter, f_label, tail, order + 1);
    out.add(&inner.mul(&WickExpression::from_monomial(
        BigRational::one(),
        power(cf, 1),
    )));
    out
}

/// `n!·[jⁿ] exp([bb] j²/2) Σ_l ([ab] j)^l ⟨F^{(l)}⟩ / l!`, expanded as a
/// power series whose coefficients live in the propagator algebra.
pub fn generating_expansion(f_label: u32, n: u32, rule: DerivativeRule) -> WickExpression {
    let label = f_label + 1;
    let (selfp, cross) = rule.self_and_cross(f_label, label);
    let n = n as usize;
    // exp([bb] j²/2): coefficient of j^{2a} is [bb]^a / (2^a a!).
    let mut gauss = vec![WickExpression::zero(); n + 1];
    for a in 0..=n / 2 {
        let c = BigRational::new(
            BigInt::one(),
            BigInt::from(2u32).pow(a as u32) * factorial(a as u64),
        );
        gauss[2 * a] = WickExpression::from_monomial(c, power(selfp, a as u64));
    }
    let mut source = vec![WickExpression::zero(); n + 1];
    for (l, slot) in source.iter_mut().enumerate() {
        let c = BigRational::new(BigInt::one(), factorial(l as u64));
        *slot = WickExpression::from_monomial(
            c,
            power(cross, l as u64).times(&f_derivative(f_label, l as u32)),
        );
    }
    let mut coeff = WickExpression::zero();
    for k in 0..=n {
        coeff.add(&gauss[k].mul(&source[n - k]));
    }
    coeff.scale(&BigRational::from_integer(factorial(n as u64)))
}

/// The `c_l` table printed with a spurious coefficient `1` for the `l = 0`
/// term of `⟨F x̃⁴⟩`; the pairing count is `3`.
pub fn x4_printed_discrepancy() -> (BigRational, BigRational) {
    let rule = derivative_rule(1, 4, DerivativeRule::Xx);
    let selfp = Propagator::new(Channel::Jj, 2, 2);
    let mono = power(selfp, 2).times(&f_derivative(1, 0));
    (int(1), rule.coefficient(&mono))
}

/// Numerical value of `expr` through the contraction dictionary
/// `jj → iħ/M·G_jj`, `jk → iħ·G_jk`, `kk → iħM·G_kk`.
pub fn evaluate_expression(
    expr: &WickExpression,
    evaluator: &GreensEvaluator,
    label_times: &BTreeMap<u32, f64>,
    params: &PhysicalParams,
    f_table: &BTreeMap<u32, Complex64>,
) -> Result<Complex64> {
    expr.evaluate(evaluator, label_times, params, f_table)
}

/// `⟨a(1) … ⟩ = 0` unless the total letter count is even.
pub fn vanishes_by_parity(word: &OperatorWord) -> bool {
    word.len() % 2 == 1
}
