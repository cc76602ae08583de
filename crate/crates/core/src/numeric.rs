//! Scalar abstraction shared by the exact (arbitrary-precision rational) and
//! floating-point pipelines.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub type Rational = BigRational;

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(format!("unknown mode `{other}` (expected exact|float)")),
        }
    }
}

/// Number type the potential-theoretic operations are generic over.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    const MODE: Mode;

    fn from_rational(r: &Rational) -> Self;

    /// Like [`Scalar::from_rational`] but may use a precomputed float.
    fn from_cached(exact: &Rational, _approx: f64) -> Self {
        Self::from_rational(exact)
    }

    fn to_f64(&self) -> f64;

    fn abs_val(&self) -> Self;

    /// Exact `p/q` text in exact mode, shortest round-trip decimal otherwise.
    fn render(&self) -> String;

    /// JSON form: a `p/q` string in exact mode, a number otherwise.
    fn to_json(&self) -> serde_json::Value;

    /// Square root as a float. Exact mode converts the (exact) radicand first.
    fn sqrt_f64(&self) -> f64 {
        self.to_f64().max(0.0).sqrt()
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }

    fn from_usize(n: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    /// The value itself when it is exact.
    fn as_rational(&self) -> Option<&Rational> {
        None
    }

    /// `sum w (a - b) (c - d)` over terms `[w, a, b, c, d]`.
    fn bilinear_sum<'a>(terms: impl IntoIterator<Item = [&'a Self; 5]>) -> Self
    where
        Self: 'a,
    {
        terms.into_iter().fold(Self::zero(), |acc, [w, a, b, c, d]| {
            acc + w.clone() * (a.clone() - b.clone()) * (c.clone() - d.clone())
        })
    }
}

/// `sum w (a - b)` over terms `(w, a, b)`.
pub fn weighted_diff_sum<'a, S: Scalar + 'a>(terms: impl IntoIterator<Item = (&'a S, &'a S, &'a S)>) -> S {
    let (one, zero) = (S::one(), S::zero());
    let terms: Vec<_> = terms.into_iter().collect();
    S::bilinear_sum(terms.into_iter().map(|(w, a, b)| [w, a, b, &one, &zero]))
}

/// `sum w (a - b)^2` over terms `(w, a, b)`.
pub fn weighted_square_sum<'a, S: Scalar + 'a>(terms: impl IntoIterator<Item = (&'a S, &'a S, &'a S)>) -> S {
    S::bilinear_sum(terms.into_iter().map(|(w, a, b)| [w, a, b, a, b]))
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }

    fn from_cached(_exact: &Rational, approx: f64) -> Self {
        approx
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(*self)
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn render(&self) -> String {
        format_rational(self)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rational(self))
    }

    fn as_rational(&self) -> Option<&Rational> {
        Some(self)
    }

    fn bilinear_sum<'a>(terms: impl IntoIterator<Item = [&'a Self; 5]>) -> Self {
        let mut sum = FractionSum::default();
        for [w, a, b, c, d] in terms {
            let left = Fraction::difference(a, b);
            let right =
                if std::ptr::eq(a, c) && std::ptr::eq(b, d) { left.clone() } else { Fraction::difference(c, d) };
            sum.add(Fraction::of(w).times(&left).times(&right));
        }
        sum.finish()
    }
}

/// A fraction that is not kept in lowest terms. Sums of many products with a
/// shared denominator reduce once instead of once per operation.
#[derive(Debug, Clone)]
struct Fraction {
    num: BigInt,
    /// Always positive.
    den: BigInt,
}

impl Fraction {
    fn of(r: &Rational) -> Self {
        Fraction { num: r.numer().clone(), den: r.denom().clone() }
    }

    fn difference(a: &Rational, b: &Rational) -> Self {
        let (da, db) = (a.denom(), b.denom());
        if da == db {
            Fraction { num: a.numer() - b.numer(), den: da.clone() }
        } else if (da % db).is_zero() {
            Fraction { num: a.numer() - b.numer() * (da / db), den: da.clone() }
        } else if (db % da).is_zero() {
            Fraction { num: a.numer() * (db / da) - b.numer(), den: db.clone() }
        } else {
            Fraction::of(&(a - b))
        }
    }

    fn times(self, other: &Fraction) -> Self {
        Fraction { num: self.num * &other.num, den: self.den * &other.den }
    }
}

#[derive(Debug)]
struct FractionSum {
    num: BigInt,
    den: BigInt,
}

impl Default for FractionSum {
    fn default() -> Self {
        FractionSum { num: BigInt::zero(), den: BigInt::one() }
    }
}

impl FractionSum {
    fn add(&mut self, f: Fraction) {
        if f.num.is_zero() {
            return;
        }
        if self.num.is_zero() {
            *self = FractionSum { num: f.num, den: f.den };
        } else if f.den == self.den {
            self.num += f.num;
        } else if (&self.den % &f.den).is_zero() {
            self.num += f.num * (&self.den / &f.den);
        } else {
            let g = self.den.gcd(&f.den);
            let scale = &f.den / &g;
            self.num = &self.num * &scale + f.num * (&self.den / &g);
            self.den *= scale;
        }
    }

    fn finish(self) -> Rational {
        Rational::new(self.num, self.den)
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float into a rational.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `p/q` for non-integers, `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("empty number literal")]
    Empty,
    #[error("malformed number literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `p/q`, integers and decimals (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational, NumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(NumberError::Empty);
    }
    let malformed = || NumberError::Malformed(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| malformed())?;
        let q: BigInt = q.trim().parse().map_err(|_| malformed())?;
        if q.is_zero() {
            return Err(NumberError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(p, q));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| malformed())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(malformed());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let all_digits = format!("{whole}{frac}");
    let numer: BigInt =
        if all_digits.is_empty() { BigInt::zero() } else { all_digits.parse().map_err(|_| malformed())? };
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Rational bounds `lo <= sqrt(r) <= hi`, verified by exact squaring.
/// Negative input is treated as zero.
pub fn sqrt_enclosure(r: &Rational) -> (Rational, Rational) {
    if !r.is_positive() {
        return (Rational::zero(), Rational::zero());
    }
    let (p, q) = (r.numer().sqrt(), r.denom().sqrt());
    if &p * &p == *r.numer() && &q * &q == *r.denom() {
        let exact = Rational::new(p, q);
        return (exact.clone(), exact);
    }
    let s = rational_to_f64(r).sqrt();
    let fallback_hi = if r > &Rational::one() { r.clone() } else { Rational::one() };
    if !(s.is_finite() && s > 0.0) {
        return (Rational::zero(), fallback_hi);
    }
    let nudge = 1.0 / (1u64 << 40) as f64;
    let lo = f64_to_rational(s * (1.0 - nudge)).filter(|lo| &(lo * lo) <= r).unwrap_or_else(Rational::zero);
    let hi = f64_to_rational(s * (1.0 + nudge)).filter(|hi| &(hi * hi) >= r).unwrap_or(fallback_hi);
    (lo, hi)
}

/// Relative closeness used by the float pipeline.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_enclosure_brackets() {
        for r in [ratio(1, 4), ratio(524, 1936), int(2), ratio(16, 11), ratio(1, 1_000_000_007)] {
            let (lo, hi) = sqrt_enclosure(&r);
            assert!(&lo * &lo <= r && r <= &hi * &hi);
            assert!(rational_to_f64(&(&hi - &lo)) < 1e-9);
        }
        assert_eq!(sqrt_enclosure(&int(0)), (int(0), int(0)));
        assert_eq!(sqrt_enclosure(&ratio(9, 16)), (ratio(3, 4), ratio(3, 4)));
    }

    #[test]
    fn bilinear_sum_matches_plain_arithmetic() {
        let values = [ratio(31, 44), ratio(13, 44), ratio(3, 11), int(1), ratio(-7, 12), int(0), ratio(5, 88)];
        let weights = [ratio(1, 1000), int(3), ratio(7, 4)];
        let mut terms = Vec::new();
        let mut expected = int(0);
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                let w = &weights[(i + j) % 3];
                let (c, d) = (&values[(i * 3) % 7], &values[(j + 5) % 7]);
                expected += w * (a - b) * (c - d);
                terms.push([w, a, b, c, d]);
            }
        }
        assert_eq!(Rational::bilinear_sum(terms.clone()), expected);
        let float = f64::bilinear_sum(
            terms
                .iter()
                .map(|t| t.map(rational_to_f64))
                .collect::<Vec<_>>()
                .iter()
                .map(|t| [&t[0], &t[1], &t[2], &t[3], &t[4]]),
        );
        assert!((float - rational_to_f64(&expected)).abs() < 1e-12);
        let squares = weighted_square_sum(values.iter().zip(&values[1..]).map(|(a, b)| (&weights[0], a, b)));
        let plain: Rational = values.iter().zip(&values[1..]).map(|(a, b)| &weights[0] * (a - b) * (a - b)).sum();
        assert_eq!(squares, plain);
        assert_eq!(weighted_diff_sum([(&int(2), &ratio(1, 3), &ratio(1, 6))]), ratio(1, 3));
        assert_eq!(Rational::bilinear_sum(Vec::<[&Rational; 5]>::new()), int(0));
    }

    #[test]
    fn parses_rationals_and_decimals_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), ratio(-3, 4));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("2.50").unwrap(), ratio(5, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("1.5E2").unwrap(), int(150));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("+7").unwrap(), int(7));
    }

    #[test]
    fn rejects_bad_literals() {
        assert!(matches!(parse_rational("1/0"), Err(NumberError::ZeroDenominator(_))));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(matches!(parse_rational("  "), Err(NumberError::Empty)));
    }

    #[test]
    fn renders_exact_values() {
        assert_eq!(ratio(31, 44).render(), "31/44");
        assert_eq!(int(2).render(), "2");
        assert_eq!(0.5f64.render(), "0.5");
    }
}
