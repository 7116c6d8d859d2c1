//! Truncated-Taylor time functions.
//!
//! A [`TimePoly`] stores `coeffs[n] = a⁽ⁿ⁾`, the n-th derivative at `t = 0`, so
//! that `a(t) = Σ a⁽ⁿ⁾ tⁿ/n!`. In this basis differentiation is a left shift of
//! the coefficient vector and products follow the Leibniz rule.
//!
//! Every polynomial carries a degree budget. Constructors reject polynomials
//! above the budget; products return a polynomial whose budget is the sum of
//! the factors' budgets, so no term is ever dropped.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational coefficient.
pub type Scalar = BigRational;

/// Default degree budget.
pub const DEFAULT_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeAlgError {
    #[error("degree {degree} exceeds budget {budget}")]
    DegreeOverflow { degree: usize, budget: usize },
    #[error("cannot parse scalar {0:?}")]
    BadScalar(String),
}

/// Coefficient field shared by the exact and floating paths.
pub trait Coeff: Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    fn from_scalar(s: &Scalar) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for Scalar {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coeff for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_scalar(s: &Scalar) -> Self {
        ToPrimitive::to_f64(s).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// `n/d` as an exact scalar.
pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Scalar {
    rat(n, 1)
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-0.375"`.
pub fn parse_scalar(s: &str) -> Result<Scalar, TimeAlgError> {
    let s = s.trim();
    let bad = || TimeAlgError::BadScalar(s.to_string());
    if s.contains('/') {
        return BigRational::from_str(s).map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

/// `"p/q"` (or `"p"` for integers).
pub fn format_scalar(s: &Scalar) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Serde adapter writing scalars as `"p/q"` strings.
pub mod scalar_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_scalar(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let raw = ScalarRepr::deserialize(d)?;
        raw.into_scalar().map_err(serde::de::Error::custom)
    }

    /// Accepts either a string or a bare JSON number.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum ScalarRepr {
        Text(String),
        Int(i64),
        Float(f64),
    }

    impl ScalarRepr {
        pub(crate) fn into_scalar(self) -> Result<Scalar, TimeAlgError> {
            match self {
                ScalarRepr::Text(t) => parse_scalar(&t),
                ScalarRepr::Int(i) => Ok(int(i)),
                // shortest round-trip text keeps 0.3 as 3/10
                ScalarRepr::Float(f) => parse_scalar(&format!("{f}")),
            }
        }
    }
}

/// Serde adapter for `Vec<Scalar>`.
pub mod scalar_vec_serde {
    use super::scalar_serde::ScalarRepr;
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = v.iter().map(format_scalar).collect();
        texts.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let raw = Vec::<ScalarRepr>::deserialize(d)?;
        raw.into_iter().map(|r| r.into_scalar().map_err(serde::de::Error::custom)).collect()
    }
}

fn factorial<T: Coeff>(n: usize) -> T {
    let mut acc = T::one();
    for k in 2..=n {
        acc = acc * T::from_i64(k as i64);
    }
    acc
}

fn binomial(n: usize, k: usize) -> i64 {
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// Polynomial time function in the Taylor convention.
#[derive(Clone)]
pub struct TimePoly<T: Coeff = Scalar> {
    coeffs: Vec<T>,
    max_degree: usize,
}

impl<T: Coeff> TimePoly<T> {
    pub fn new(mut coeffs: Vec<T>, max_degree: usize) -> Result<Self, TimeAlgError> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() > max_degree + 1 {
            return Err(TimeAlgError::DegreeOverflow { degree: coeffs.len() - 1, budget: max_degree });
        }
        Ok(TimePoly { coeffs, max_degree })
    }

    fn raw(mut coeffs: Vec<T>, max_degree: usize) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        debug_assert!(coeffs.len() <= max_degree + 1);
        TimePoly { coeffs, max_degree }
    }

    pub fn zero(max_degree: usize) -> Self {
        TimePoly { coeffs: Vec::new(), max_degree }
    }

    pub fn constant(c: T, max_degree: usize) -> Self {
        Self::raw(vec![c], max_degree)
    }

    /// `c · tⁿ` (ordinary power, not `tⁿ/n!`).
    pub fn power(n: usize, c: T, max_degree: usize) -> Result<Self, TimeAlgError> {
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = c * factorial::<T>(n);
        Self::new(coeffs, max_degree)
    }

    /// Builds from ordinary power-basis coefficients `Σ pₙ tⁿ`.
    pub fn from_powers(powers: Vec<T>, max_degree: usize) -> Result<Self, TimeAlgError> {
        let coeffs = powers.into_iter().enumerate().map(|(n, p)| p * factorial::<T>(n)).collect();
        Self::new(coeffs, max_degree)
    }

    /// Ordinary power-basis coefficients.
    pub fn powers(&self) -> Vec<T> {
        self.coeffs.iter().enumerate().map(|(n, c)| c.clone() / factorial::<T>(n)).collect()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Taylor coefficient `a⁽ⁿ⁾`.
    pub fn coeff(&self, n: usize) -> T {
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn with_budget(&self, max_degree: usize) -> Result<Self, TimeAlgError> {
        Self::new(self.coeffs.clone(), max_degree)
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::raw(self.coeffs.iter().map(|c| c.clone() * k.clone()).collect(), self.max_degree)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|n| f(self.coeff(n), other.coeff(n))).collect();
        Self::raw(coeffs, self.max_degree.max(other.max_degree))
    }

    /// Leibniz product: `(fg)⁽ⁿ⁾ = Σₖ C(n,k) f⁽ᵏ⁾ g⁽ⁿ⁻ᵏ⁾`.
    pub fn mul_poly(&self, other: &Self) -> Self {
        let budget = self.max_degree + other.max_degree;
        if self.is_zero() || other.is_zero() {
            return Self::zero(budget);
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![T::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let w = T::from_i64(binomial(i + j, i));
                out[i + j] = out[i + j].clone() + w * a.clone() * b.clone();
            }
        }
        Self::raw(out, budget)
    }

    /// `Λ_b p`, i.e. `t ↦ p(t + b)`.
    pub fn shift(&self, b: &T) -> Self {
        if b.is_zero() {
            return self.clone();
        }
        let d = self.coeffs.len();
        let mut pw = Vec::with_capacity(d);
        let mut acc = T::one();
        for j in 0..d {
            if j > 0 {
                acc = acc * b.clone() / T::from_i64(j as i64);
            }
            pw.push(acc.clone());
        }
        let coeffs =
            (0..d).map(|n| (n..d).fold(T::zero(), |s, k| s + self.coeffs[k].clone() * pw[k - n].clone())).collect();
        Self::raw(coeffs, self.max_degree)
    }

    pub fn derivative(&self) -> Self {
        Self::raw(self.coeffs.iter().skip(1).cloned().collect(), self.max_degree)
    }

    /// n-th derivative.
    pub fn derivative_n(&self, n: usize) -> Self {
        Self::raw(self.coeffs.iter().skip(n).cloned().collect(), self.max_degree)
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn antiderivative(&self) -> Result<Self, TimeAlgError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let mut coeffs = vec![T::zero()];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs, self.max_degree)
    }

    /// Horner evaluation honoring the `1/n!` convention.
    pub fn evaluate(&self, t: &T) -> T {
        let mut acc = T::zero();
        for (n, c) in self.coeffs.iter().enumerate().rev() {
            acc = c.clone() + acc * t.clone() / T::from_i64(n as i64 + 1);
        }
        acc
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> TimePoly<U> {
        TimePoly::raw(self.coeffs.iter().map(f).collect(), self.max_degree)
    }

    pub fn to_f64(&self) -> TimePoly<f64> {
        self.map(|c| c.to_f64())
    }
}

impl TimePoly<Scalar> {
    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (n, c) in self.coeffs.iter().enumerate().rev() {
            acc = Coeff::to_f64(c) + acc * t / (n as f64 + 1.0);
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> Scalar {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(Scalar::zero)
    }
}

impl<T: Coeff> PartialEq for TimePoly<T> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for TimePoly<Scalar> {}

impl<T: Coeff> fmt::Debug for TimePoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TimePoly{:?}", self.coeffs)
    }
}

impl fmt::Display for TimePoly<Scalar> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, p) in self.powers().iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let neg = p.is_negative();
            let mag = p.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let c = format_scalar(&mag);
            match n {
                0 => write!(f, "{c}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{c}·")?;
                    }
                    if n == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{n}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for TimePoly<Scalar> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let texts: Vec<String> = self.coeffs.iter().map(format_scalar).collect();
        texts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TimePoly<Scalar> {
    /// Reads a coefficient list with the default budget (or its own length, if longer).
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let coeffs = scalar_vec_serde::deserialize(d)?;
        let budget = DEFAULT_DEGREE.max(coeffs.len().saturating_sub(1));
        TimePoly::new(coeffs, budget).map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<T: Coeff> $tr<&TimePoly<T>> for &TimePoly<T> {
            type Output = TimePoly<T>;
            fn $m(self, rhs: &TimePoly<T>) -> TimePoly<T> {
                let f: fn(&TimePoly<T>, &TimePoly<T>) -> TimePoly<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Coeff> $tr<TimePoly<T>> for TimePoly<T> {
            type Output = TimePoly<T>;
            fn $m(self, rhs: TimePoly<T>) -> TimePoly<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Coeff> $tr<&TimePoly<T>> for TimePoly<T> {
            type Output = TimePoly<T>;
            fn $m(self, rhs: &TimePoly<T>) -> TimePoly<T> {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.mul_poly(b));

impl<T: Coeff> Neg for &TimePoly<T> {
    type Output = TimePoly<T>;
    fn neg(self) -> TimePoly<T> {
        TimePoly::raw(self.coeffs.iter().map(|c| -c.clone()).collect(), self.max_degree)
    }
}

impl<T: Coeff> Neg for TimePoly<T> {
    type Output = TimePoly<T>;
    fn neg(self) -> TimePoly<T> {
        -&self
    }
}

/// Three-component time function (translations, labels, `B(a)`, `C(a)`).
#[derive(Clone, PartialEq)]
pub struct Vec3Poly<T: Coeff = Scalar> {
    pub x: TimePoly<T>,
    pub y: TimePoly<T>,
    pub z: TimePoly<T>,
}

impl<T: Coeff> Vec3Poly<T> {
    pub fn new(x: TimePoly<T>, y: TimePoly<T>, z: TimePoly<T>) -> Self {
        Vec3Poly { x, y, z }
    }

    pub fn zero(max_degree: usize) -> Self {
        let z = TimePoly::zero(max_degree);
        Vec3Poly { x: z.clone(), y: z.clone(), z }
    }

    /// Only the x component set.
    pub fn along_x(p: TimePoly<T>) -> Self {
        let z = TimePoly::zero(p.max_degree());
        Vec3Poly { x: p, y: z.clone(), z }
    }

    pub fn from_fn(mut f: impl FnMut(usize) -> TimePoly<T>) -> Self {
        Vec3Poly { x: f(0), y: f(1), z: f(2) }
    }

    pub fn components(&self) -> [&TimePoly<T>; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn component(&self, i: usize) -> &TimePoly<T> {
        self.components()[i]
    }

    pub fn map(&self, f: impl Fn(&TimePoly<T>) -> TimePoly<T>) -> Self {
        Vec3Poly { x: f(&self.x), y: f(&self.y), z: f(&self.z) }
    }

    pub fn try_map<E>(&self, f: impl Fn(&TimePoly<T>) -> Result<TimePoly<T>, E>) -> Result<Self, E> {
        Ok(Vec3Poly { x: f(&self.x)?, y: f(&self.y)?, z: f(&self.z)? })
    }

    fn zip(&self, o: &Self, f: impl Fn(&TimePoly<T>, &TimePoly<T>) -> TimePoly<T>) -> Self {
        Vec3Poly { x: f(&self.x, &o.x), y: f(&self.y, &o.y), z: f(&self.z, &o.z) }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a)
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|a| a.scale(k))
    }

    pub fn shift(&self, b: &T) -> Self {
        self.map(|a| a.shift(b))
    }

    pub fn derivative(&self) -> Self {
        self.map(|a| a.derivative())
    }

    pub fn derivative_n(&self, n: usize) -> Self {
        self.map(|a| a.derivative_n(n))
    }

    pub fn dot(&self, o: &Self) -> TimePoly<T> {
        &(&self.x * &o.x + &self.y * &o.y) + &(&self.z * &o.z)
    }

    pub fn evaluate(&self, t: &T) -> [T; 3] {
        [self.x.evaluate(t), self.y.evaluate(t), self.z.evaluate(t)]
    }

    pub fn max_degree(&self) -> usize {
        self.x.max_degree().max(self.y.max_degree()).max(self.z.max_degree())
    }

    pub fn degree(&self) -> Option<usize> {
        self.components().iter().filter_map(|c| c.degree()).max()
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    pub fn with_budget(&self, max_degree: usize) -> Result<Self, TimeAlgError> {
        self.try_map(|c| c.with_budget(max_degree))
    }

    pub fn to_f64(&self) -> Vec3Poly<f64> {
        Vec3Poly { x: self.x.to_f64(), y: self.y.to_f64(), z: self.z.to_f64() }
    }
}

impl<T: Coeff> fmt::Debug for Vec3Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?}, {:?})", self.x, self.y, self.z)
    }
}

impl fmt::Display for Vec3Poly<Scalar> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Shorthand for `Λ_b`.
pub fn shift<T: Coeff>(p: &TimePoly<T>, b: &T) -> TimePoly<T> {
    p.shift(b)
}

pub fn derivative<T: Coeff>(p: &TimePoly<T>) -> TimePoly<T> {
    p.derivative()
}

pub fn evaluate<T: Coeff>(p: &TimePoly<T>, t: &T) -> T {
    p.evaluate(t)
}
