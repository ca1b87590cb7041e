//! Coefficient arithmetic: exact Gaussian rationals or complex floats.
//!
//! Every coefficient in the crate (potential coefficients, Hessian entries,
//! coupling tensors, frequencies, B-algebra weights) is a [`Scalar`]. Exact
//! arithmetic is closed: combining two exact values never produces a float.
//! Mixing an exact and a float value yields a float.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default comparison tolerance for float mode.
pub const DEFAULT_TOL: f64 = 1e-10;

pub type Rational = BigRational;
pub type GaussRational = Complex<BigRational>;

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRational),
    Float(Complex64),
}

/// Arithmetic mode selected for a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

/// Mode plus the tolerance used by every float comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arith {
    pub mode: Mode,
    pub tol: f64,
}

impl Default for Arith {
    fn default() -> Self {
        Arith::exact()
    }
}

impl Arith {
    pub fn exact() -> Self {
        Arith { mode: Mode::Exact, tol: DEFAULT_TOL }
    }

    pub fn float(tol: f64) -> Self {
        Arith { mode: Mode::Float, tol }
    }

    /// Brings a value into this mode (exact values are converted in float mode).
    pub fn lift(&self, s: Scalar) -> Scalar {
        match self.mode {
            Mode::Exact => s,
            Mode::Float => s.to_float(),
        }
    }

    pub fn is_zero(&self, s: &Scalar) -> bool {
        s.is_negligible(self.tol)
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Complex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar::from_i64(1)
    }

    pub fn i() -> Self {
        Scalar::Exact(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_i64(v: i64) -> Self {
        Scalar::Exact(Complex::new(BigRational::from_integer(v.into()), BigRational::zero()))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(Complex::new(rat(n, d), BigRational::zero()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(Complex::new(r, BigRational::zero()))
    }

    pub fn gauss(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(Complex::new(re, im))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(Complex64::new(v, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Structural zero: exact zero, or a float that is exactly `0.0`.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(z) => z.re.is_zero() && z.im.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    /// Exact zero test for exact values, `|z| <= tol` for floats.
    pub fn is_negligible(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(_) => self.is_zero(),
            Scalar::Float(z) => z.norm() <= tol,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(z) => z.re.is_one() && z.im.is_zero(),
            Scalar::Float(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(z) => Complex64::new(rat_to_f64(&z.re), rat_to_f64(&z.im)),
            Scalar::Float(z) => *z,
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_c64())
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// The value as a real rational, if it is exact with zero imaginary part.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(z) if z.im.is_zero() => Some(&z.re),
            _ => None,
        }
    }

    pub fn as_gauss(&self) -> Option<&GaussRational> {
        match self {
            Scalar::Exact(z) => Some(z),
            Scalar::Float(_) => None,
        }
    }

    /// Integer value, if exact, real and integral.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(z) => Scalar::Exact(z.conj()),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Exact(z) => {
                let n = &z.re * &z.re + &z.im * &z.im;
                Scalar::Exact(Complex::new(&z.re / &n, -(&z.im / &n)))
            }
            Scalar::Float(z) => Scalar::Float(z.inv()),
        })
    }

    pub fn powi(&self, e: i32) -> Scalar {
        if e < 0 {
            return self.inv().expect("negative power of zero").powi(-e);
        }
        let mut acc = match self {
            Scalar::Exact(_) => Scalar::one(),
            Scalar::Float(_) => Scalar::float(1.0),
        };
        let mut base = self.clone();
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Exact square root in the Gaussian rationals, if one exists.
    ///
    /// The returned root is the principal one (non-negative real part, and
    /// non-negative imaginary part when the real part vanishes).
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        let z = self.as_gauss()?;
        if z.im.is_zero() {
            let x = &z.re;
            if x.is_negative() {
                let r = rational_sqrt(&-x)?;
                return Some(Scalar::gauss(BigRational::zero(), r));
            }
            return rational_sqrt(x).map(Scalar::from_rational);
        }
        // (a + bi)^2 = x + yi  =>  a^2 = (x + |z|) / 2, b = y / 2a
        let norm2 = &z.re * &z.re + &z.im * &z.im;
        let m = rational_sqrt(&norm2)?;
        let two = BigRational::from_integer(2.into());
        let a2 = (&z.re + &m) / &two;
        let a = rational_sqrt(&a2)?;
        if a.is_zero() {
            return None;
        }
        let b = &z.im / (&two * &a);
        Some(Scalar::gauss(a, b))
    }

    /// Principal square root, exact when possible.
    pub fn sqrt(&self) -> Scalar {
        self.sqrt_exact().unwrap_or_else(|| Scalar::Float(self.to_c64().sqrt()))
    }

    /// Exact real `m`-th root of a real rational (odd `m` allows negatives).
    pub fn nth_root_exact(&self, m: u32) -> Option<Scalar> {
        if m == 0 {
            return None;
        }
        if m == 1 {
            return Some(self.clone());
        }
        if m == 2 {
            return self.sqrt_exact();
        }
        let r = self.as_rational()?;
        let neg = r.is_negative();
        if neg && m % 2 == 0 {
            return None;
        }
        let num = int_nth_root(&r.numer().abs(), m)?;
        let den = int_nth_root(r.denom(), m)?;
        let root = BigRational::new(if neg { -num } else { num }, den);
        Some(Scalar::from_rational(root))
    }

    /// Total order used for map keys: exact values before floats, then
    /// lexicographic on (re, im).
    pub fn total_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im)),
            (Scalar::Exact(_), Scalar::Float(_)) => Ordering::Less,
            (Scalar::Float(_), Scalar::Exact(_)) => Ordering::Greater,
            (Scalar::Float(a), Scalar::Float(b)) => {
                a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
            }
        }
    }

    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_c64() - other.to_c64()).norm() <= tol,
        }
    }

    /// Recovers a Gaussian rational with denominators at most `max_den` that
    /// approximates `z` to within `tol` in each part.
    pub fn rationalize(z: Complex64, max_den: i64, tol: f64) -> Option<Scalar> {
        let re = rationalize_f64(z.re, max_den, tol)?;
        let im = rationalize_f64(z.im, max_den, tol)?;
        Some(Scalar::gauss(re, im))
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: scale down before converting
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn int_nth_root(n: &BigInt, m: u32) -> Option<BigInt> {
    if n.sign() == Sign::Minus {
        return None;
    }
    let r = n.nth_root(m);
    if num_traits::pow(r.clone(), m as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact square root of a non-negative rational.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = int_nth_root(r.numer(), 2)?;
    let d = int_nth_root(r.denom(), 2)?;
    Some(BigRational::new(n, d))
}

fn rationalize_f64(x: f64, max_den: i64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x.abs() <= tol {
        return Some(BigRational::zero());
    }
    // continued fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol * x.abs().max(1.0) {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = v - a as f64;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_c64() $op rhs.to_c64()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        match rhs.inv() {
            Some(inv) => self * &inv,
            None => Scalar::Float(self.to_c64() / rhs.to_c64()),
        }
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl<'a> Div<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(z) => Scalar::Exact(-z),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl<'a> Neg for &'a Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.clone().neg()
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_i64(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(z) => {
                if z.im.is_zero() {
                    write!(f, "{}", fmt_rational(&z.re))
                } else if z.re.is_zero() {
                    write!(f, "{}i", fmt_rational(&z.im))
                } else if z.im.is_negative() {
                    write!(f, "{} - {}i", fmt_rational(&z.re), fmt_rational(&-z.im.clone()))
                } else {
                    write!(f, "{} + {}i", fmt_rational(&z.re), fmt_rational(&z.im))
                }
            }
            Scalar::Float(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else {
                    write!(f, "{}{:+}i", z.re, z.im)
                }
            }
        }
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(BigInt::from_str(s).ok()?)),
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `a`, `a/b`, `bi`, `i`, `a+bi`, `a-b/ci` with rational parts.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid exact number `{s}`"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        if let Some(body) = t.strip_suffix('i') {
            // split at the last sign that is not the leading one
            let split = body
                .char_indices()
                .skip(1)
                .filter(|(_, c)| *c == '+' || *c == '-')
                .map(|(i, _)| i)
                .last();
            let (re, im) = match split {
                Some(i) => (&body[..i], &body[i..]),
                None => ("", body),
            };
            let im = match im {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                other => parse_rational(other.strip_prefix('+').unwrap_or(other)).ok_or_else(bad)?,
            };
            let re = if re.is_empty() { BigRational::zero() } else { parse_rational(re).ok_or_else(bad)? };
            return Ok(Scalar::gauss(re, im));
        }
        parse_rational(&t).map(Scalar::from_rational).ok_or_else(bad)
    }
}

struct RationalPair<'a>(&'a BigRational);

impl Serialize for RationalPair<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.numer().to_string())?;
        seq.serialize_element(&self.0.denom().to_string())?;
        seq.end()
    }
}

/// Exact reals serialize as `["num","den"]`, exact complex values as
/// `{"re":[..],"im":[..]}`; floats as a JSON number or `{"re":x,"im":y}`.
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(z) if z.im.is_zero() => RationalPair(&z.re).serialize(s),
            Scalar::Exact(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("im", &RationalPair(&z.im))?;
                m.serialize_entry("re", &RationalPair(&z.re))?;
                m.end()
            }
            Scalar::Float(z) if z.im == 0.0 => s.serialize_f64(z.re),
            Scalar::Float(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("im", &z.im)?;
                m.serialize_entry("re", &z.re)?;
                m.end()
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Pair(String, String),
    Text(String),
    Int(i64),
    Num(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Real(RealRepr),
    Complex { re: RealRepr, im: RealRepr },
}

enum RealValue {
    Exact(BigRational),
    Float(f64),
}

fn real_value(r: RealRepr) -> std::result::Result<RealValue, String> {
    Ok(match r {
        RealRepr::Pair(n, d) => {
            let n = BigInt::from_str(&n).map_err(|e| format!("numerator `{n}`: {e}"))?;
            let d = BigInt::from_str(&d).map_err(|e| format!("denominator `{d}`: {e}"))?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            RealValue::Exact(BigRational::new(n, d))
        }
        RealRepr::Text(t) => match Scalar::from_str(&t).map_err(|e| e.to_string())? {
            Scalar::Exact(z) if z.im.is_zero() => RealValue::Exact(z.re),
            _ => return Err(format!("`{t}` is not a real number")),
        },
        RealRepr::Int(i) => RealValue::Exact(BigRational::from_integer(i.into())),
        RealRepr::Num(x) => RealValue::Float(x),
    })
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ScalarRepr::deserialize(d)?;
        match repr {
            ScalarRepr::Real(RealRepr::Text(t)) => Scalar::from_str(&t).map_err(de::Error::custom),
            ScalarRepr::Real(r) => Ok(match real_value(r).map_err(de::Error::custom)? {
                RealValue::Exact(q) => Scalar::from_rational(q),
                RealValue::Float(x) => Scalar::float(x),
            }),
            ScalarRepr::Complex { re, im } => {
                let re = real_value(re).map_err(de::Error::custom)?;
                let im = real_value(im).map_err(de::Error::custom)?;
                Ok(match (re, im) {
                    (RealValue::Exact(a), RealValue::Exact(b)) => Scalar::gauss(a, b),
                    (a, b) => {
                        let f = |v: RealValue| match v {
                            RealValue::Exact(q) => rat_to_f64(&q),
                            RealValue::Float(x) => x,
                        };
                        Scalar::complex(f(a), f(b))
                    }
                })
            }
        }
    }
}
