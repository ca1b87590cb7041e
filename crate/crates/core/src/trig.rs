//! Integrals of `e^{iωt}/sinⁿt` and their relatives: reduction recurrence,
//! meromorphy classification and additive monodromy jumps.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::darboux::Frequency;
use crate::error::{Error, Result};
use crate::poly::factorial;
use crate::scalar::Scalar;
use crate::surd::SurdSum;

/// `e^{iωt} Σ c_{a,b} sinᵃt cosᵇt` with `b ∈ {0, 1}` (cos² is rewritten as `1 − sin²`).
#[derive(Clone, Debug, PartialEq)]
pub struct TrigExpr {
    pub omega: Scalar,
    terms: BTreeMap<(i32, u8), Scalar>,
}

impl TrigExpr {
    pub fn zero(omega: Scalar) -> Self {
        TrigExpr { omega, terms: BTreeMap::new() }
    }

    /// `e^{iωt} sinᵃt`.
    pub fn sin_power(omega: Scalar, a: i32) -> Self {
        let mut e = TrigExpr::zero(omega);
        e.add_term(a, 0, Scalar::one());
        e
    }

    pub fn add_term(&mut self, sin_exp: i32, cos_exp: u8, c: Scalar) {
        match cos_exp {
            0 | 1 => {}
            _ => {
                // cos^b = cos^{b-2}(1 - sin²)
                self.add_term(sin_exp, cos_exp - 2, c.clone());
                self.add_term(sin_exp + 2, cos_exp - 2, -c);
                return;
            }
        }
        if c.is_zero() {
            return;
        }
        let key = (sin_exp, cos_exp);
        let v = self.terms.entry(key).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, u8, &Scalar)> {
        self.terms.iter().map(|((a, b), c)| (*a, *b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    pub fn add(&self, other: &TrigExpr) -> TrigExpr {
        let mut e = self.clone();
        for ((a, b), c) in &other.terms {
            e.add_term(*a, *b, c.clone());
        }
        e
    }

    pub fn scale(&self, s: &Scalar) -> TrigExpr {
        let mut e = TrigExpr::zero(self.omega.clone());
        for ((a, b), c) in &self.terms {
            e.add_term(*a, *b, c * s);
        }
        e
    }

    /// d/dt, using `(sinᵃ)' = a sinᵃ⁻¹ cos` and `cos' = −sin`.
    pub fn derivative(&self) -> TrigExpr {
        let iw = Scalar::i() * &self.omega;
        let mut e = TrigExpr::zero(self.omega.clone());
        for ((a, b), c) in &self.terms {
            e.add_term(*a, *b, &iw * c);
            e.add_term(a - 1, b + 1, c * &Scalar::from_i64(*a as i64));
            if *b == 1 {
                e.add_term(a + 1, 0, -c);
            }
        }
        e
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        let w = self.omega.to_c64();
        let pre = (Complex64::i() * w * t).exp();
        let (s, co) = (t.sin(), t.cos());
        pre * self.terms.iter().fold(Complex64::zero(), |acc, ((a, b), c)| acc + c.to_c64() * s.powi(*a) * co.powi(*b as i32))
    }
}

impl fmt::Display for TrigExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                let cos = if *b == 1 { "*cos(t)" } else { "" };
                format!("({c})*sin(t)^{a}{cos}")
            })
            .collect();
        write!(f, "exp(i*({})*t)*[{}]", self.omega, parts.join(" + "))
    }
}

impl Serialize for TrigExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            sin: i32,
            cos: u8,
            coefficient: &'a Scalar,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            omega: &'a Scalar,
            terms: Vec<Term<'a>>,
        }
        let terms = self.terms.iter().map(|((a, b), c)| Term { sin: *a, cos: *b, coefficient: c }).collect();
        Repr { omega: &self.omega, terms }.serialize(s)
    }
}

/// One step `T_n = g_{n−2} + c_{n−2} T_{n−2}`.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceStep {
    pub n: u32,
    pub c: Scalar,
    pub boundary: TrigExpr,
}

/// `c_m = (m² − ω²)/((m+1)m)` from `ω²`.
pub fn recurrence_coefficient(m: u32, omega_sq: &Scalar) -> Scalar {
    let m = m as i64;
    (Scalar::from_i64(m * m) - omega_sq) / Scalar::from_i64((m + 1) * m)
}

pub fn recurrence_step(n: u32, omega: &Scalar) -> Result<RecurrenceStep> {
    if n <= 2 {
        return Err(Error::InvalidOrder(n as i64));
    }
    let m = (n - 2) as i64;
    let denom = Scalar::from_i64((n as i64 - 1) * m);
    let mut g = TrigExpr::zero(omega.clone());
    let lead = -(Scalar::i() * omega) / &denom;
    g.add_term(2 - n as i32, 0, lead);
    g.add_term(1 - n as i32, 1, -(Scalar::from_i64(m) / &denom));
    Ok(RecurrenceStep { n, c: recurrence_coefficient(n - 2, &(omega * omega)), boundary: g })
}

/// `T_n = f_n + p T_tail`, tail order 1 or 2.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub n: u32,
    pub meromorphic_part: TrigExpr,
    pub tail_order: u32,
    pub p: Scalar,
}

/// Product of the `c` coefficients down to the tail; depends on `ω²` only.
pub fn p_product(n: u32, omega_sq: &Scalar) -> Scalar {
    let mut p = Scalar::one();
    let mut m = n as i64 - 2;
    while m >= 1 {
        p = p * recurrence_coefficient(m as u32, omega_sq);
        m -= 2;
    }
    p
}

pub fn tail_order(n: u32) -> u32 {
    if n % 2 == 0 {
        2
    } else {
        1
    }
}

pub fn reduce(n: u32, omega: &Scalar) -> Result<Reduction> {
    if n == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let mut part = TrigExpr::zero(omega.clone());
    let mut weight = Scalar::one();
    let mut m = n;
    while m > 2 {
        let step = recurrence_step(m, omega)?;
        part = part.add(&step.boundary.scale(&weight));
        weight = weight * &step.c;
        m -= 2;
    }
    Ok(Reduction { n, meromorphic_part: part, tail_order: m, p: weight })
}

/// `a_n ∏_k (k² − ω²)` over the same parity as `n`, with the `T_2` factor
/// `−ω²` folded in for even `n`.
pub fn obstruction_polynomial(n: u32, omega_sq: &Scalar) -> Scalar {
    let p = p_product(n, omega_sq);
    if n % 2 == 0 {
        p * (-omega_sq)
    } else {
        p
    }
}

/// Checks `D(f_n) + p·sin^{−tail} = sin^{−n}` (all times `e^{iωt}`).
pub fn reduction_identity_residual(red: &Reduction) -> TrigExpr {
    let omega = red.meromorphic_part.omega.clone();
    red.meromorphic_part
        .derivative()
        .add(&TrigExpr::sin_power(omega.clone(), -(red.tail_order as i32)).scale(&red.p))
        .add(&TrigExpr::sin_power(omega, -(red.n as i32)).scale(&Scalar::from_i64(-1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeromorphyReason {
    ClassifierEven,
    ClassifierOdd,
    NonzeroJump,
    PnZero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeromorphyVerdict {
    pub meromorphic: bool,
    pub reason: MeromorphyReason,
    /// The `ω` root when meromorphic, the jump `2πi·Res₀` otherwise.
    pub witness: Scalar,
    /// False when `ω` was only known approximately.
    pub certified: bool,
}

/// `ω²` exactly when `ω` is a single surd, otherwise in floating point.
pub fn omega_squared(omega: &Frequency) -> Scalar {
    if let Some(s) = omega.as_surd() {
        let terms: Vec<(i64, &BigRational)> = s.terms().collect();
        match terms.as_slice() {
            [] => return Scalar::zero(),
            [(r, q)] => return Scalar::from_rational(*q * *q * BigRational::from_integer(BigInt::from(*r))),
            _ => {}
        }
    }
    let z = omega.to_c64();
    Scalar::Float(z * z)
}

/// `ω` as a Scalar: exact when rational.
pub fn omega_scalar(omega: &Frequency) -> Scalar {
    match omega.as_rational() {
        Some(q) => Scalar::from_rational(q),
        None => Scalar::Float(omega.to_c64()),
    }
}

fn integer_value(omega: &Frequency) -> (Option<i64>, bool) {
    match omega {
        Frequency::Surd(s) => (s.as_integer().and_then(|v| v.to_i64()), true),
        Frequency::NonRational(_) => (None, true),
        Frequency::Approx(z) => {
            let r = z.re.round();
            if (z - Complex64::new(r, 0.0)).norm() < 1e-8 {
                (Some(r as i64), false)
            } else {
                (None, false)
            }
        }
    }
}

/// Zero set of the reduction for `n ≥ 2`: integers of the parity of `n`
/// with `|ω| ≤ n − 2`.
pub fn in_classifier_set(n: u32, w: i64) -> bool {
    if n < 2 {
        return false;
    }
    let bound = n as i64 - 2;
    w.abs() <= bound && (w - n as i64).rem_euclid(2) == 0
}

/// The odd-case set as printed, `{±(1+2k) : 0 ≤ k ≤ (n−1)/2}`.
pub fn literal_odd_set(n: u32) -> Vec<i64> {
    let mut v: Vec<i64> = (0..=(n as i64 - 1) / 2).flat_map(|k| [-(1 + 2 * k), 1 + 2 * k]).collect();
    v.sort_unstable();
    v
}

/// `(n, ω)` pairs with odd `3 ≤ n ≤ n_max` where the printed odd set and the
/// reduction disagree.
pub fn literal_set_discrepancies(n_max: u32) -> Vec<(u32, i64)> {
    let mut out = Vec::new();
    for n in (3..=n_max).filter(|n| n % 2 == 1) {
        let lit = literal_odd_set(n);
        for w in -(n as i64 + 2)..=(n as i64 + 2) {
            let p_zero = p_product(n, &Scalar::from_i64(w * w)).is_zero();
            if lit.contains(&w) != p_zero {
                out.push((n, w));
            }
        }
    }
    out
}

pub fn classify_meromorphy(n: u32, omega: &Frequency) -> MeromorphyVerdict {
    let parity_reason = if n % 2 == 0 { MeromorphyReason::ClassifierEven } else { MeromorphyReason::ClassifierOdd };
    let (w, certified) = integer_value(omega);
    if n == 0 {
        return MeromorphyVerdict { meromorphic: true, reason: parity_reason, witness: omega_scalar(omega), certified };
    }
    let meromorphic = n >= 2 && w.is_some_and(|w| in_classifier_set(n, w));
    if meromorphic {
        let w = w.unwrap_or(0);
        let reason = if n >= 3 && p_product(n, &Scalar::from_i64(w * w)).is_zero() {
            MeromorphyReason::PnZero
        } else {
            parity_reason
        };
        return MeromorphyVerdict { meromorphic, reason, witness: Scalar::from_i64(w), certified };
    }
    let reason = if n == 1 { MeromorphyReason::NonzeroJump } else { parity_reason };
    let res = match (omega.as_rational(), certified) {
        (Some(q), true) => laurent_residue(n, &Scalar::from_rational(q)),
        _ => laurent_residue(n, &Scalar::Float(omega.to_c64())),
    };
    let jump = Scalar::complex(0.0, 2.0 * PI) * res.to_float();
    MeromorphyVerdict { meromorphic, reason, witness: jump, certified }
}

/// Residue at `t = 0` of `e^{iωt}/sinⁿt`: the `t^{n−1}` coefficient of
/// `e^{iωt}(t/sin t)ⁿ`. Exact for Gaussian-rational `ω`.
pub fn laurent_residue(n: u32, omega: &Scalar) -> Scalar {
    if n == 0 {
        return Scalar::zero();
    }
    let len = n as usize;
    let inv_fact = |k: u32| Scalar::from_rational(BigRational::new(1.into(), factorial(k)));
    // sin t / t
    let sinc: Vec<Scalar> = (0..len)
        .map(|j| if j % 2 == 1 { Scalar::zero() } else { inv_fact(j as u32 + 1) * Scalar::from_i64(if j % 4 == 0 { 1 } else { -1 }) })
        .collect();
    let mut inv = vec![Scalar::zero(); len];
    inv[0] = Scalar::one();
    for j in 1..len {
        let mut acc = Scalar::zero();
        for i in 1..=j {
            acc = acc + &sinc[i] * &inv[j - i];
        }
        inv[j] = -acc;
    }
    let mul = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
        (0..len).map(|j| (0..=j).fold(Scalar::zero(), |acc, i| acc + &a[i] * &b[j - i])).collect()
    };
    let mut pw = vec![Scalar::zero(); len];
    pw[0] = Scalar::one();
    for _ in 0..n {
        pw = mul(&pw, &inv);
    }
    let iw = Scalar::i() * omega;
    let ex: Vec<Scalar> = (0..len).map(|j| iw.powi(j as i32) * inv_fact(j as u32)).collect();
    mul(&pw, &ex)[len - 1].clone()
}

/// Additive monodromy of `∫ f/sin` around `t = nπ`: `2πi (−1)ⁿ f(nπ)`, the
/// sign being the residue of `1/sin` there.
pub fn monodromy_jump<F: Fn(Complex64) -> Complex64>(f: F, n: i64) -> Complex64 {
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, 2.0 * PI * sign) * f(Complex64::new(n as f64 * PI, 0.0))
}

/// The three integral families over `sin t`, plus `T_n` with higher powers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum TrigIntegralSpec {
    T { n: u32, omega: Frequency },
    P { d: u32 },
    M { d: u32, omega: Frequency },
}

impl TrigIntegralSpec {
    /// Folds the coincidences `T_0 = P_0 = M_{0,0}`, `M_{0,ω} = T_ω`, `M_{d,0} = P_d`.
    pub fn canonical(&self) -> TrigIntegralSpec {
        match self {
            TrigIntegralSpec::P { d: 0 } => TrigIntegralSpec::T { n: 1, omega: Frequency::integer(0) },
            TrigIntegralSpec::M { d: 0, omega } => TrigIntegralSpec::T { n: 1, omega: omega.clone() },
            TrigIntegralSpec::M { d, omega } if omega.as_surd().is_some_and(SurdSum::is_zero) => {
                TrigIntegralSpec::P { d: *d }.canonical()
            }
            other => other.clone(),
        }
    }

    /// The entire numerator `f` of an integrand `f/sin t`.
    pub fn numerator(&self, t: Complex64) -> Complex64 {
        match self {
            TrigIntegralSpec::T { omega, .. } => (Complex64::i() * omega.to_c64() * t).exp(),
            TrigIntegralSpec::P { d } => t.powi(*d as i32),
            TrigIntegralSpec::M { d, omega } => t.powi(*d as i32) * (Complex64::i() * omega.to_c64() * t).exp(),
        }
    }

    pub fn classify(&self) -> MeromorphyVerdict {
        match self.canonical() {
            TrigIntegralSpec::T { n, omega } => classify_meromorphy(n, &omega),
            spec => {
                let d = match spec {
                    TrigIntegralSpec::P { d } | TrigIntegralSpec::M { d, .. } => d,
                    TrigIntegralSpec::T { .. } => unreachable!(),
                };
                // t^d kills the jump at 0 for d > 0; use t = π instead
                let at = if d == 0 { 0 } else { 1 };
                let j = monodromy_jump(|t| spec.numerator(t), at);
                MeromorphyVerdict { meromorphic: false, reason: MeromorphyReason::NonzeroJump, witness: Scalar::Float(j), certified: true }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_ratio(n, d)
    }

    #[test]
    fn recurrence_examples() {
        assert_eq!(recurrence_step(3, &Scalar::zero()).unwrap().c, q(1, 2));
        assert!(recurrence_step(4, &Scalar::from_i64(2)).unwrap().c.is_zero());
        assert!(matches!(recurrence_step(2, &Scalar::zero()), Err(Error::InvalidOrder(2))));
    }

    #[test]
    fn reduction_products() {
        let r = reduce(2, &Scalar::from_i64(5)).unwrap();
        assert!(r.p.is_one() && r.meromorphic_part.is_zero() && r.tail_order == 2);
        for w in [0, 2, -2] {
            assert!(obstruction_polynomial(4, &Scalar::from_i64(w * w)).is_zero());
        }
        assert!(!obstruction_polynomial(4, &Scalar::from_i64(1)).is_zero());
        assert_eq!(reduce(4, &Scalar::from_i64(1)).unwrap().p, q(3, 6));
        assert!(reduce(6, &Scalar::from_i64(4)).unwrap().p.is_zero());
    }

    #[test]
    fn classifier_examples() {
        assert!(classify_meromorphy(2, &Frequency::integer(0)).meromorphic);
        assert!(!classify_meromorphy(2, &Frequency::integer(2)).meromorphic);
        for w in [0, 1, 5] {
            let v = classify_meromorphy(1, &Frequency::integer(w));
            assert!(!v.meromorphic);
            assert_eq!(v.reason, MeromorphyReason::NonzeroJump);
        }
        let v = classify_meromorphy(6, &Frequency::integer(4));
        assert!(v.meromorphic);
        assert_eq!(v.reason, MeromorphyReason::PnZero);
        assert!(classify_meromorphy(3, &Frequency::integer(1)).meromorphic);
        let sqrt2 = Frequency::from_lambda(&Scalar::from_i64(2));
        assert!(!classify_meromorphy(4, &sqrt2).meromorphic);
    }

    #[test]
    fn printed_odd_set_disagrees_at_plus_minus_n() {
        assert_eq!(literal_odd_set(3), vec![-3, -1, 1, 3]);
        assert!(!classify_meromorphy(3, &Frequency::integer(3)).meromorphic);
        assert!(!laurent_residue(3, &Scalar::from_i64(3)).is_zero());
        let disc = literal_set_discrepancies(9);
        assert!(disc.contains(&(3, 3)) && disc.contains(&(3, -3)));
        assert!(disc.iter().all(|(n, w)| w.abs() == *n as i64));
    }

    #[test]
    fn residue_matches_closed_forms() {
        // e^{iωt}/sin²t = 1/t² + iω/t + ...
        let w = q(3, 7);
        assert_eq!(laurent_residue(2, &w), Scalar::i() * &w);
        assert_eq!(laurent_residue(1, &w), Scalar::one());
        assert_eq!(laurent_residue(3, &Scalar::from_i64(3)), Scalar::from_i64(-4));
    }

    #[test]
    fn residue_oracle_agrees_with_classifier() {
        for n in 1..=6u32 {
            for w in -8..=8i64 {
                let v = classify_meromorphy(n, &Frequency::integer(w));
                assert_eq!(v.meromorphic, laurent_residue(n, &Scalar::from_i64(w)).is_zero(), "n={n} w={w}");
            }
        }
    }

    #[test]
    fn jumps() {
        let j = monodromy_jump(|_| Complex64::new(1.0, 0.0), 0);
        assert!((j - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-15);
        assert!(monodromy_jump(|t| t.sin(), 0).norm() < 1e-15);
        let t0 = TrigIntegralSpec::T { n: 1, omega: Frequency::integer(0) };
        assert_eq!(TrigIntegralSpec::P { d: 0 }.canonical(), t0);
        assert_eq!(TrigIntegralSpec::M { d: 0, omega: Frequency::integer(0) }.canonical(), t0);
        for spec in [TrigIntegralSpec::P { d: 2 }, TrigIntegralSpec::M { d: 1, omega: Frequency::integer(3) }] {
            let v = spec.classify();
            assert!(!v.meromorphic && v.witness.abs() > 1.0);
        }
    }

    proptest! {
        #[test]
        fn recurrence_differentiation_identity(n in 3u32..=8, a in -20i64..20, b in 1i64..6) {
            let w = q(a, b);
            let step = recurrence_step(n, &w).unwrap();
            let lhs = step
                .boundary
                .derivative()
                .add(&TrigExpr::sin_power(w.clone(), 2 - n as i32).scale(&step.c))
                .add(&TrigExpr::sin_power(w.clone(), -(n as i32)).scale(&Scalar::from_i64(-1)));
            prop_assert!(lhs.is_zero());
        }

        #[test]
        fn full_reduction_identity(n in 1u32..=12, a in -20i64..20, b in 1i64..6) {
            let red = reduce(n, &q(a, b)).unwrap();
            prop_assert!(reduction_identity_residual(&red).is_zero());
        }

        #[test]
        fn classifier_matches_reduction(n in 1u32..=12, w in -14i64..=14) {
            let v = classify_meromorphy(n, &Frequency::integer(w));
            let w2 = Scalar::from_i64(w * w);
            let expect = if n == 1 { false } else { p_product(n, &w2).is_zero() || (tail_order(n) == 2 && w == 0) };
            prop_assert_eq!(v.meromorphic, expect);
        }
    }
}
