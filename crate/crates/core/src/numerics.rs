//! Exact rational scalars and the bit-size measure used for facet complexity.
//!
//! [`Rational`] keeps values that fit in a pair of `i64` on an inline fast
//! path (all intermediate products are formed in `i128`, so the fast path is
//! exact) and promotes to a heap `BigRational` only when a result leaves that
//! range. Every constructor normalizes eagerly, so structural equality is
//! value equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone)]
enum Repr {
    /// numerator, denominator > 0, coprime.
    Small(i64, i64),
    /// Only used when the value does not fit `Small`.
    Big(BigRational),
}

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone)]
pub struct Rational(Repr);

pub type RationalVector = Vec<Rational>;

fn fit_i128(num: i128, den: i128) -> Rational {
    debug_assert!(den != 0);
    let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
    if n == 0 {
        return Rational(Repr::Small(0, 1));
    }
    let g = n.gcd(&d);
    if g > 1 {
        n /= g;
        d /= g;
    }
    match (i64::try_from(n), i64::try_from(d)) {
        (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
        _ => Rational(Repr::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
    }
}

fn fit_big(value: BigRational) -> Rational {
    // BigRational arithmetic already reduces; only the representation is chosen here.
    match (value.numer().to_i64(), value.denom().to_i64()) {
        (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
        _ => Rational(Repr::Big(value)),
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        fit_big(BigRational::from_integer(n.into()))
    }

    /// Builds `numer / denom`, reducing to lowest terms.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, Error> {
        let d = denom.into();
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(fit_big(BigRational::new(numer.into(), d)))
    }

    pub fn from_big(value: BigRational) -> Self {
        fit_big(value)
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => match b.numer().sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            Repr::Small(n, d) => fit_i128(*d as i128, *n as i128),
            Repr::Big(b) => fit_big(b.recip()),
        })
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(n.div_floor(d)),
            Repr::Big(b) => b.floor().to_integer(),
        }
    }

    /// Integer value if the denominator is 1 and the value is nonnegative.
    pub fn to_biguint(&self) -> Option<BigUint> {
        if !self.is_integer() || self.is_negative() {
            return None;
        }
        self.numer().to_biguint()
    }

    /// `self -= a * b` without materializing the product when all three are small.
    pub fn sub_mul_assign(&mut self, a: &Rational, b: &Rational) {
        if let (Repr::Small(sn, sd), Repr::Small(an, ad), Repr::Small(bn, bd)) =
            (&self.0, &a.0, &b.0)
        {
            if a.is_zero() || b.is_zero() {
                return;
            }
            let pn = *an as i128 * *bn as i128;
            let pd = *ad as i128 * *bd as i128;
            let g = pn.gcd(&pd);
            let (pn, pd) = (pn / g, pd / g);
            if let (Ok(pn), Ok(pd)) = (i64::try_from(pn), i64::try_from(pd)) {
                let num = *sn as i128 * pd as i128 - pn as i128 * *sd as i128;
                let den = *sd as i128 * pd as i128;
                *self = fit_i128(num, den);
                return;
            }
        }
        let prod = a * b;
        *self -= &prod;
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            // canonical representation: a Small never equals a Big
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational(Repr::Small(n, 1))
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational(Repr::Small(n as i64, 1))
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<&BigUint> for Rational {
    fn from(n: &BigUint) -> Self {
        Rational::from_integer(BigInt::from(n.clone()))
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `-p`, `p/q` and `-p/q`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let digits = num.strip_prefix('-').unwrap_or(num);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = num.parse().map_err(|_| bad())?;
        let d: BigInt = match den {
            Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => {
                d.parse().map_err(|_| bad())?
            }
            Some(_) => return Err(bad()),
            None => BigInt::one(),
        };
        Rational::new(n, d)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Text {
            Int(i64),
            Str(String),
        }
        match Text::deserialize(d)? {
            Text::Int(n) => Ok(Rational::from(n)),
            Text::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn add_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small(an, ad), Repr::Small(bn, bd)) => {
            if *ad == 1 && *bd == 1 {
                return fit_i128(*an as i128 + *bn as i128, 1);
            }
            fit_i128(
                *an as i128 * *bd as i128 + *bn as i128 * *ad as i128,
                *ad as i128 * *bd as i128,
            )
        }
        _ => fit_big(a.to_big() + b.to_big()),
    }
}

fn sub_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small(an, ad), Repr::Small(bn, bd)) => fit_i128(
            *an as i128 * *bd as i128 - *bn as i128 * *ad as i128,
            *ad as i128 * *bd as i128,
        ),
        _ => fit_big(a.to_big() - b.to_big()),
    }
}

fn mul_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small(an, ad), Repr::Small(bn, bd)) => {
            fit_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128)
        }
        _ => fit_big(a.to_big() * b.to_big()),
    }
}

fn div_impl(a: &Rational, b: &Rational) -> Rational {
    assert!(!b.is_zero(), "division by zero rational");
    match (&a.0, &b.0) {
        (Repr::Small(an, ad), Repr::Small(bn, bd)) => {
            fit_i128(*an as i128 * *bd as i128, *ad as i128 * *bn as i128)
        }
        _ => fit_big(a.to_big() / b.to_big()),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(self, rhs)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(&self, &rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $imp(&self, rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $imp(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);
binop!(Div, div, div_impl);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_impl(self, rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add_impl(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_impl(self, rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_impl(self, rhs);
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => fit_i128(-(*n as i128), *d as i128),
            Repr::Big(b) => fit_big(-b.clone()),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Encoding length in bits, as used by facet-complexity bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct SizeReport {
    pub bits: u64,
}

/// `ceil(log2(1 + x))` for a nonnegative integer, i.e. its bit length.
fn log_term(x: &BigInt) -> u64 {
    x.abs().bits()
}

/// `1 + ceil(log2(1+|p|)) + ceil(log2(1+q))` for `x = p/q` in lowest terms.
pub fn size_of_rational(x: &Rational) -> SizeReport {
    SizeReport {
        bits: 1 + log_term(&x.numer()) + log_term(&x.denom()),
    }
}

pub fn size_of_integer(n: &BigUint) -> SizeReport {
    SizeReport {
        bits: 1 + n.bits() + 1,
    }
}

/// `n + sum of element sizes`.
pub fn size_of_vector(c: &[Rational]) -> SizeReport {
    SizeReport {
        bits: c.len() as u64 + c.iter().map(|x| size_of_rational(x).bits).sum::<u64>(),
    }
}

/// `mn + sum of entry sizes` for an `m x n` matrix given as rows.
pub fn size_of_matrix(a: &[Vec<Rational>]) -> SizeReport {
    let m = a.len() as u64;
    let n = a.first().map_or(0, |r| r.len()) as u64;
    let entries: u64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| size_of_rational(x).bits)
        .sum();
    SizeReport { bits: m * n + entries }
}

/// Size of the single inequality `a x <= alpha`.
pub fn size_of_inequality(a: &[Rational], alpha: &Rational) -> SizeReport {
    SizeReport {
        bits: 1 + size_of_vector(a).bits + size_of_rational(alpha).bits,
    }
}

/// Size of the system `A x <= b`.
pub fn size_of_system(a: &[Vec<Rational>], b: &[Rational]) -> Result<SizeReport, Error> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "system has {} rows but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    if let Some(first) = a.first() {
        if a.iter().any(|r| r.len() != first.len()) {
            return Err(Error::Validation("ragged matrix".into()));
        }
    }
    Ok(SizeReport {
        bits: 1 + size_of_matrix(a).bits + size_of_vector(b).bits,
    })
}

/// Least common multiple of the denominators.
pub fn lcm_of_denominators(values: &[Rational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()))
}
