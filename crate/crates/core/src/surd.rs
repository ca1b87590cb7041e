//! Exact sums of square roots, `Σ q_s √s` with signed squarefree radicands.
//!
//! Square roots of distinct squarefree integers are linearly independent over
//! the rationals, so the canonical map form gives an exact zero test and an
//! exact integrality test. A negative radicand `-m` stands for `i√m`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

const TRIAL_LIMIT: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default, Hash)]
pub struct SurdSum {
    terms: BTreeMap<i64, BigRational>,
}

/// Splits `m > 0` as `s² · f` with `f` squarefree. `None` when the cofactor
/// left after trial division cannot be certified squarefree or overflows.
fn square_split(m: &BigInt) -> Option<(BigInt, i64)> {
    let mut rest = m.clone();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            square *= num_traits::pow(bp.clone(), (e / 2) as usize);
            if e % 2 == 1 {
                free *= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigInt::one() {
        let bp = BigInt::from(p);
        if &bp * &bp > rest {
            free *= &rest;
        } else {
            let r = rest.sqrt();
            if &r * &r == rest {
                square *= r;
            } else {
                return None;
            }
        }
    }
    Some((square, free.to_i64()?))
}

impl SurdSum {
    pub fn zero() -> Self {
        SurdSum::default()
    }

    pub fn rational(q: BigRational) -> Self {
        SurdSum::term(1, q)
    }

    pub fn integer(v: i64) -> Self {
        SurdSum::rational(BigRational::from_integer(v.into()))
    }

    fn term(radicand: i64, q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(radicand, q);
        }
        SurdSum { terms }
    }

    /// Principal square root of a rational, `None` if the radicand cannot be
    /// factored within the trial-division budget.
    pub fn sqrt_of(r: &BigRational) -> Option<Self> {
        if r.is_zero() {
            return Some(SurdSum::zero());
        }
        let prod = r.numer().abs() * r.denom();
        let (s, f) = square_split(&prod)?;
        let coef = BigRational::new(s, r.denom().clone());
        let key = if r.is_negative() { -f } else { f };
        Some(SurdSum::term(key, coef))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|q| q.is_integer()).map(|q| q.to_integer())
    }

    pub fn scale(&self, c: &BigRational) -> SurdSum {
        if c.is_zero() {
            return SurdSum::zero();
        }
        SurdSum { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn scale_int(&self, c: i64) -> SurdSum {
        self.scale(&BigRational::from_integer(c.into()))
    }

    pub fn add(&self, other: &SurdSum) -> SurdSum {
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            let e = terms.entry(*k).or_insert_with(BigRational::zero);
            *e += v;
            if e.is_zero() {
                terms.remove(k);
            }
        }
        SurdSum { terms }
    }

    pub fn neg(&self) -> SurdSum {
        SurdSum { terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect() }
    }

    pub fn sub(&self, other: &SurdSum) -> SurdSum {
        self.add(&other.neg())
    }

    pub fn to_c64(&self) -> Complex64 {
        self.terms.iter().fold(Complex64::new(0.0, 0.0), |acc, (k, v)| {
            let q = v.to_f64().unwrap_or(f64::NAN);
            let r = (k.unsigned_abs() as f64).sqrt() * q;
            if *k < 0 {
                acc + Complex64::new(0.0, r)
            } else {
                acc + Complex64::new(r, 0.0)
            }
        })
    }
}

impl fmt::Display for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, v)) in self.terms.iter().enumerate() {
            let neg = v.is_negative();
            let a = v.abs();
            if idx > 0 {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            } else if neg {
                write!(f, "-")?;
            }
            let unit = match *k {
                1 => String::new(),
                -1 => "i".to_string(),
                k if k < 0 => format!("i*sqrt({})", -k),
                k => format!("sqrt({k})"),
            };
            let coef = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
            match (unit.is_empty(), a.is_one()) {
                (true, _) => write!(f, "{coef}")?,
                (false, true) => write!(f, "{unit}")?,
                (false, false) => write!(f, "{coef}*{unit}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for SurdSum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn square_roots() {
        assert_eq!(SurdSum::sqrt_of(&q(4, 9)).unwrap(), SurdSum::rational(q(2, 3)));
        let s = SurdSum::sqrt_of(&q(8, 1)).unwrap();
        assert_eq!(s.to_string(), "2*sqrt(2)");
        let s = SurdSum::sqrt_of(&q(1, 2)).unwrap();
        assert_eq!(s.to_string(), "1/2*sqrt(2)");
        let s = SurdSum::sqrt_of(&q(-3, 1)).unwrap();
        assert_eq!(s.to_string(), "i*sqrt(3)");
        assert!((s.to_c64() - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn exact_cancellation() {
        let a = SurdSum::sqrt_of(&q(2, 1)).unwrap();
        let b = SurdSum::sqrt_of(&q(8, 1)).unwrap();
        assert!(a.scale_int(2).sub(&b).is_zero());
        let c = a.add(&SurdSum::integer(1));
        assert_eq!(c.as_rational(), None);
        assert_eq!(c.sub(&a).as_integer(), Some(BigInt::from(1)));
    }

    #[test]
    fn large_prime_radicand() {
        let p = 1_000_003i64;
        let s = SurdSum::sqrt_of(&q(p, 1)).unwrap();
        assert_eq!(s.terms().next().unwrap().0, p);
    }
}
