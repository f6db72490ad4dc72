//! Arithmetic backends.
//!
//! Every gap functional, LP and revenue computation is generic over
//! [`Scalar`]. Two backends exist: `f64` (default, tolerance-driven where a
//! comparison needs one) and [`Rational`] (arbitrary precision, every
//! comparison exact). Conversions from `f64` to `Rational` are exact since
//! every finite double is a dyadic rational.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact rational number with arbitrary precision numerator and denominator.
pub type Rational = BigRational;

/// Which arithmetic a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Float,
    Rational,
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" | "f64" => Ok(Backend::Float),
            "rational" | "exact" => Ok(Backend::Rational),
            other => Err(Error::invalid(
                "backend",
                format!("unknown backend `{other}`"),
            )),
        }
    }
}

impl Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Float => f.write_str("float"),
            Backend::Rational => f.write_str("rational"),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when comparisons are exact and no tolerance applies.
    const EXACT: bool;
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn ratio(num: i64, den: i64) -> Self;
    /// Exact for the rational backend; rejects non-finite input.
    fn from_f64(x: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;
    fn to_rational(&self) -> Rational;
    fn from_rational(r: &Rational) -> Self;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn div_ref(&self, other: &Self) -> Self;
    /// `self -= factor * x`, the simplex inner loop.
    fn sub_mul_assign(&mut self, factor: &Self, x: &Self);

    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn is_finite(&self) -> bool;

    /// `|self - other| <= tol * max(1, |self|, |other|)`; plain equality when exact.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Canonical text form: shortest round-trip decimal for `f64`, `num/den` for rationals.
    fn to_text(&self) -> String;
    fn parse_text(s: &str) -> Result<Self>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

/// Cast between backends by way of an exact rational.
pub fn cast<T: Scalar, U: Scalar>(x: &T) -> U {
    U::from_rational(&x.to_rational())
}

pub fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn min_of<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add_ref(&x.mul_ref(y));
    }
    acc
}

/// `(a - b) . x`, evaluated coordinate-wise as a difference first.
pub fn diff_dot<T: Scalar>(a: &[T], b: &[T], x: &[T]) -> T {
    let mut acc = T::zero();
    for ((p, q), w) in a.iter().zip(b).zip(x) {
        acc = acc.add_ref(&p.sub_ref(q).mul_ref(w));
    }
    acc
}

pub fn l1_norm<T: Scalar>(x: &[T]) -> T {
    let mut acc = T::zero();
    for v in x {
        acc = acc.add_ref(&v.abs());
    }
    acc
}

pub fn linf_norm<T: Scalar>(x: &[T]) -> T {
    let mut best = T::zero();
    for v in x {
        let a = v.abs();
        if a > best {
            best = a;
        }
    }
    best
}

pub fn scale<T: Scalar>(c: &T, x: &[T]) -> Vec<T> {
    x.iter().map(|v| c.mul_ref(v)).collect()
}

/// `x` and `y` point in the same direction: `x = c * y` for some `c >= 0`.
/// The zero vector is parallel to everything in this sense when it is `x`.
pub fn is_parallel<T: Scalar>(x: &[T], y: &[T], rel_tol: f64) -> bool {
    if x.iter().all(Scalar::is_zero) {
        return true;
    }
    if y.iter().all(Scalar::is_zero) {
        return false;
    }
    if dot(x, y).is_negative() {
        return false;
    }
    let scale_f = if T::EXACT {
        0.0
    } else {
        let nx = dot(x, x).to_f64().sqrt();
        let ny = dot(y, y).to_f64().sqrt();
        rel_tol * nx * ny
    };
    for a in 0..x.len() {
        for b in (a + 1)..x.len() {
            let cross = x[a].mul_ref(&y[b]).sub_ref(&x[b].mul_ref(&y[a]));
            if T::EXACT {
                if !cross.is_zero() {
                    return false;
                }
            } else if cross.to_f64().abs() > scale_f {
                return false;
            }
        }
    }
    true
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::invalid("number", format!("non-finite value {x}")))
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Rational {
        BigRational::from_float(*self).expect("finite f64")
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul_assign(&mut self, factor: &Self, x: &Self) {
        *self -= factor * x;
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1.0_f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
    fn to_text(&self) -> String {
        format!("{self}")
    }
    fn parse_text(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Self::from_f64(v);
        }
        Rational::parse_text(s).map(|r| rational_to_f64(&r))
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::invalid("number", format!("`{n}` is not representable")))
                .and_then(Self::from_f64),
            Value::String(s) => Self::parse_text(s),
            other => Err(Error::invalid(
                "number",
                format!("expected a number, found {other}"),
            )),
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: Backend = Backend::Rational;

    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .ok_or_else(|| Error::invalid("number", format!("non-finite value {x}")))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn sub_mul_assign(&mut self, factor: &Self, x: &Self) {
        *self -= factor * x;
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        num_traits::Signed::abs(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn to_text(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn parse_text(s: &str) -> Result<Self> {
        parse_rational(s.trim())
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_text())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            // With arbitrary precision enabled the literal text survives, so
            // `0.1` becomes exactly 1/10 rather than the nearest double.
            Value::Number(n) => parse_rational(&n.to_string()),
            Value::String(s) => parse_rational(s.trim()),
            other => Err(Error::invalid(
                "number",
                format!("expected a number, found {other}"),
            )),
        }
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = num_traits::ToPrimitive::to_f64(r) {
        return v;
    }
    // Huge operands: fall back to scaled division.
    let n = num_traits::ToPrimitive::to_f64(r.numer()).unwrap_or(f64::NAN);
    let d = num_traits::ToPrimitive::to_f64(r.denom()).unwrap_or(f64::NAN);
    n / d
}

/// Parses `a/b`, integers and plain or exponent decimals exactly.
fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::invalid("number", format!("cannot parse `{s}` as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if num_traits::Zero::is_zero(&d) {
            return Err(Error::invalid(
                "number",
                format!("zero denominator in `{s}`"),
            ));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0")
        .parse()
        .map_err(|_| bad())?;
    let all = all / BigInt::from(10);
    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if shift >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, shift as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-shift) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// A value of the form `sqrt(2) * coeff`.
///
/// The Lagrangian bounds on the aligned gap are exactly of this shape, so
/// carrying the coefficient keeps comparisons exact on the rational backend.
#[derive(Clone, Debug, PartialEq)]
pub struct Sqrt2Scaled<T> {
    pub coeff: T,
}

impl<T: Scalar> Sqrt2Scaled<T> {
    pub fn new(coeff: T) -> Self {
        Self { coeff }
    }

    pub fn to_f64(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.coeff.to_f64()
    }

    /// Exact test of `v <= sqrt(2) * coeff` on the rational backend.
    pub fn bounds(&self, v: &T, tol: f64) -> bool {
        if T::EXACT {
            if !v.is_positive() {
                return !self.coeff.is_negative() || {
                    // both sides non-positive: compare squares reversed
                    let lhs = v.mul_ref(v);
                    let rhs = self.coeff.mul_ref(&self.coeff).mul_ref(&T::from_i64(2));
                    lhs >= rhs
                };
            }
            if self.coeff.is_negative() {
                return false;
            }
            let lhs = v.mul_ref(v);
            let rhs = self.coeff.mul_ref(&self.coeff).mul_ref(&T::from_i64(2));
            lhs <= rhs
        } else {
            let b = self.to_f64();
            v.to_f64() <= b + tol * b.abs().max(1.0)
        }
    }
}
