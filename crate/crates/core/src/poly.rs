//! Sparse multivariate polynomials, rational functions with a single base
//! denominator, homogeneous potentials and truncated Taylor series.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Arith, Scalar};

/// Exponent vector `α`. Ordered graded-lexicographically: by `|α|`, then
/// lexicographically with larger leading exponents first, so that
/// `q₁² < q₁q₂ < q₂²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
            .then_with(|| self.0.len().cmp(&other.0.len()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit index `ε_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    /// Counts occurrences of each coordinate in an index list.
    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut v = vec![0; n];
        for &i in idx {
            v[i] += 1;
        }
        MultiIndex(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, &a| acc * factorial(a))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(MultiIndex)
    }

    /// Sorted coordinate list with repetition, e.g. `(2,1) → [0,0,1]`.
    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().enumerate().flat_map(|(i, &a)| std::iter::repeat(i).take(a as usize)).collect()
    }

    /// All indices of order `s` in `n` variables, graded-lex ascending.
    pub fn all_of_order(n: usize, s: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, s: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == n - 1 {
                prefix.push(s);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=s).rev() {
                prefix.push(a);
                rec(n, s - a, prefix, out);
                prefix.pop();
            }
        }
        if n == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        rec(n, s, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All indices with `|α| <= s`.
    pub fn all_up_to(n: usize, s: u32) -> Vec<MultiIndex> {
        (0..=s).flat_map(|k| MultiIndex::all_of_order(n, k)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn factorial(a: u32) -> BigInt {
    (1..=a).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn factorial_scalar(alpha: &MultiIndex) -> Scalar {
    Scalar::from_rational(num_rational::BigRational::from_integer(alpha.factorial()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        Polynomial::constant(n, Scalar::one())
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(MultiIndex::unit(n, i), Scalar::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Scalar)>>(n: usize, terms: I) -> Result<Self> {
        let mut p = Polynomial::zero(n);
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: e.len() });
            }
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Scalar {
        self.terms.get(alpha).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(&MultiIndex::zero(self.n)).is_one()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    /// The common degree of all terms, `None` for mixed degrees or zero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::order);
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn lift(&self, arith: &Arith) -> Polynomial {
        Polynomial { n: self.n, terms: self.terms.iter().map(|(a, c)| (a.clone(), arith.lift(c.clone()))).collect() }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (a, c) in &other.terms {
            p.add_term(a.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { n: self.n, terms: self.terms.iter().map(|(a, c)| (a.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, c) in &self.terms {
            p.add_term(a.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, c) in &self.terms {
            for (b, d) in &other.terms {
                p.add_term(a.add(b), c * d);
            }
        }
        p
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        (0..e).fold(Polynomial::one(self.n), |acc, _| acc.mul(self))
    }

    pub fn diff(&self, i: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.n);
        for (a, c) in &self.terms {
            let ai = a.0[i];
            if ai == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[i] -= 1;
            p.add_term(b, c * &Scalar::from_i64(ai as i64));
        }
        p
    }

    pub fn partial(&self, alpha: &MultiIndex) -> Polynomial {
        alpha.indices().iter().fold(self.clone(), |acc, &i| acc.diff(i))
    }

    pub fn eval(&self, q: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for (a, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in q.iter().zip(&a.0) {
                if e > 0 {
                    t = &t * &x.powi(e as i32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Substitutes `q = d + P h` and truncates at total degree `order` in `h`.
    pub fn substitute_affine(&self, d: &[Scalar], frame: &Matrix, order: u32) -> Series {
        let n = frame.cols();
        let forms: Vec<Series> = (0..self.n)
            .map(|i| {
                let row: Vec<Scalar> = (0..n).map(|j| frame.get(i, j).clone()).collect();
                Series::linear(n, order, d[i].clone(), &row)
            })
            .collect();
        let mut cache: Vec<Vec<Series>> = forms.iter().map(|f| vec![Series::one(n, order), f.clone()]).collect();
        let mut out = Series::zero(n, order);
        for (a, c) in &self.terms {
            let mut t = Series::constant(n, order, c.clone());
            for (i, &e) in a.0.iter().enumerate() {
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap().mul(&forms[i]);
                    cache[i].push(next);
                }
                if e > 0 {
                    t = t.mul(&cache[i][e as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| {
                let mono: Vec<String> = a
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("q{}", i + 1) } else { format!("q{}^{}", i + 1, e) })
                    .collect();
                if mono.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `num / base^power`. All derivatives of such a function keep the same base,
/// which avoids the denominator blowup of the plain quotient rule.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: Polynomial,
    pub base: Polynomial,
    pub power: u32,
}

impl RationalFunction {
    pub fn polynomial(p: Polynomial) -> Self {
        let n = p.n;
        RationalFunction { num: p, base: Polynomial::one(n), power: 0 }
    }

    pub fn new(num: Polynomial, den: Polynomial) -> Self {
        if den.is_one() {
            return RationalFunction::polynomial(num);
        }
        // constant denominators fold into the numerator
        if den.degree() == Some(0) {
            let inv = den.coeff(&MultiIndex::zero(den.n)).inv().expect("zero constant denominator");
            return RationalFunction::polynomial(num.scale(&inv));
        }
        RationalFunction { num, base: den, power: 1 }
    }

    pub fn n(&self) -> usize {
        self.num.n
    }

    pub fn denominator(&self) -> Polynomial {
        self.base.pow(self.power)
    }

    pub fn diff(&self, i: usize) -> RationalFunction {
        if self.power == 0 {
            return RationalFunction { num: self.num.diff(i), base: self.base.clone(), power: 0 };
        }
        let p = Scalar::from_i64(self.power as i64);
        let num = self.num.diff(i).mul(&self.base).sub(&self.num.mul(&self.base.diff(i)).scale(&p));
        RationalFunction { num, base: self.base.clone(), power: self.power + 1 }
    }

    pub fn partial(&self, alpha: &MultiIndex) -> RationalFunction {
        alpha.indices().iter().fold(self.clone(), |acc, &i| acc.diff(i))
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction { num: self.num.neg(), base: self.base.clone(), power: self.power }
    }

    pub fn scale(&self, s: &Scalar) -> RationalFunction {
        RationalFunction { num: self.num.scale(s), base: self.base.clone(), power: self.power }
    }

    pub fn lift(&self, arith: &Arith) -> RationalFunction {
        RationalFunction { num: self.num.lift(arith), base: self.base.lift(arith), power: self.power }
    }

    pub fn eval_with(&self, q: &[Scalar], tol: f64) -> Result<Scalar> {
        let b = self.base.eval(q);
        if self.power > 0 && b.is_negligible(tol) {
            return Err(Error::PoleAtPoint);
        }
        Ok(&self.num.eval(q) / &b.powi(self.power as i32))
    }

    pub fn eval(&self, q: &[Scalar]) -> Result<Scalar> {
        self.eval_with(q, crate::scalar::DEFAULT_TOL)
    }

    /// Equality by cross multiplication.
    pub fn equals(&self, other: &RationalFunction) -> bool {
        self.num.mul(&other.denominator()) == other.num.mul(&self.denominator())
    }

    /// Taylor series of `f(d + P h)` in `h` up to total degree `order`.
    pub fn taylor(&self, d: &[Scalar], frame: &Matrix, order: u32) -> Result<Series> {
        let num = self.num.substitute_affine(d, frame, order);
        if self.power == 0 {
            return Ok(num);
        }
        let inv = self.base.substitute_affine(d, frame, order).inverse()?;
        Ok(num.mul(&inv.pow(self.power)))
    }
}

/// `V = numerator / denominator`, both homogeneous, of total degree `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPotential {
    n: usize,
    k: i32,
    numerator: Polynomial,
    denominator: Polynomial,
}

impl HomogeneousPotential {
    pub fn new(k: i32, numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        let n = numerator.n;
        if n == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if denominator.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: denominator.n });
        }
        if k == 0 {
            return Err(Error::DegreeMismatch("homogeneity degree must be nonzero".into()));
        }
        let dn = numerator
            .homogeneous_degree()
            .ok_or_else(|| Error::DegreeMismatch("numerator is not homogeneous".into()))?;
        let dd = denominator
            .homogeneous_degree()
            .ok_or_else(|| Error::DegreeMismatch("denominator is not homogeneous".into()))?;
        if dn as i64 - dd as i64 != k as i64 {
            return Err(Error::DegreeMismatch(format!("deg num − deg den = {} but k = {k}", dn as i64 - dd as i64)));
        }
        Ok(HomogeneousPotential { n, k, numerator, denominator })
    }

    pub fn polynomial(k: i32, numerator: Polynomial) -> Result<Self> {
        let n = numerator.n;
        Self::new(k, numerator, Polynomial::one(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> i32 {
        self.k
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn is_exact(&self) -> bool {
        self.numerator.is_exact() && self.denominator.is_exact()
    }

    pub fn function(&self) -> RationalFunction {
        RationalFunction::new(self.numerator.clone(), self.denominator.clone())
    }

    pub fn scale(&self, s: &Scalar) -> HomogeneousPotential {
        HomogeneousPotential { numerator: self.numerator.scale(s), ..self.clone() }
    }

    pub fn lift(&self, arith: &Arith) -> HomogeneousPotential {
        HomogeneousPotential {
            numerator: self.numerator.lift(arith),
            denominator: self.denominator.lift(arith),
            ..self.clone()
        }
    }

    pub fn gradient(&self) -> Vec<RationalFunction> {
        let f = self.function();
        (0..self.n).map(|i| f.diff(i)).collect()
    }

    pub fn force_field(&self) -> ForceField {
        ForceField { k: self.k, components: self.gradient().iter().map(RationalFunction::neg).collect() }
    }

    pub fn value(&self, q: &[Scalar], tol: f64) -> Result<Scalar> {
        self.function().eval_with(q, tol)
    }

    pub fn gradient_at(&self, q: &[Scalar], tol: f64) -> Result<Vec<Scalar>> {
        self.gradient().iter().map(|g| g.eval_with(q, tol)).collect()
    }

    pub fn hessian_at(&self, q: &[Scalar], tol: f64) -> Result<Matrix> {
        let f = self.function();
        let series = f.taylor(q, &Matrix::identity(self.n), 2)?;
        let _ = tol;
        let mut h = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let alpha = MultiIndex::unit(self.n, i).add(&MultiIndex::unit(self.n, j));
                h.set(i, j, &series.coeff(&alpha) * &factorial_scalar(&alpha));
            }
        }
        Ok(h)
    }
}

/// `F = −∇V`, each component homogeneous of degree `k − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceField {
    pub k: i32,
    pub components: Vec<RationalFunction>,
}

impl ForceField {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, q: &[Scalar], tol: f64) -> Result<Vec<Scalar>> {
        self.components.iter().map(|f| f.eval_with(q, tol)).collect()
    }
}

/// Symmetric tensor `D^s F(d)` stored per component as `α ↦ ∂^α F_i(d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTensor {
    pub order: u32,
    pub entries: Vec<BTreeMap<MultiIndex, Scalar>>,
}

impl DerivativeTensor {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// Entry `∂_{j1} ⋯ ∂_{js} F_i(d)` for an index tuple in any order.
    pub fn get(&self, i: usize, idx: &[usize]) -> Scalar {
        let alpha = MultiIndex::from_indices(self.n(), idx);
        self.entries[i].get(&alpha).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries.iter().all(|m| m.values().all(|v| v.is_negligible(tol)))
    }
}

/// `D^s F(d)` from the truncated Taylor expansion of each component.
pub fn derivative_tensor(f: &ForceField, d: &[Scalar], s: u32) -> Result<DerivativeTensor> {
    if s == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let n = f.n();
    let id = Matrix::identity(n);
    let indices = MultiIndex::all_of_order(n, s);
    let entries = f
        .components
        .iter()
        .map(|c| {
            let series = c.taylor(d, &id, s)?;
            Ok(indices.iter().map(|a| (a.clone(), &series.coeff(a) * &factorial_scalar(a))).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivativeTensor { order: s, entries })
}

/// Same tensor through symbolic differentiation; used as a cross-check.
pub fn derivative_tensor_symbolic(f: &ForceField, d: &[Scalar], s: u32) -> Result<DerivativeTensor> {
    let n = f.n();
    let indices = MultiIndex::all_of_order(n, s);
    let entries = f
        .components
        .iter()
        .map(|c| indices.iter().map(|a| Ok((a.clone(), c.partial(a).eval(d)?))).collect::<Result<BTreeMap<_, _>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivativeTensor { order: s, entries })
}

/// Checks `q·∇V(q) = k V(q)` at each sample.
pub fn euler_check(v: &HomogeneousPotential, samples: &[Vec<Scalar>], arith: &Arith) -> Result<bool> {
    let v = v.lift(arith);
    let k = Scalar::from_i64(v.k as i64);
    for q in samples {
        let q: Vec<Scalar> = q.iter().map(|x| arith.lift(x.clone())).collect();
        let g = v.gradient_at(&q, arith.tol)?;
        let val = v.value(&q, arith.tol)?;
        let lhs = q.iter().zip(&g).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b));
        let r = &lhs - &(&k * &val);
        let scale = val.abs().max(1.0);
        if !r.is_negligible(arith.tol * scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Multivariate power series truncated at total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    n: usize,
    order: u32,
    coeffs: BTreeMap<MultiIndex, Scalar>,
}

impl Series {
    pub fn zero(n: usize, order: u32) -> Self {
        Series { n, order, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, order: u32, c: Scalar) -> Self {
        let mut s = Series::zero(n, order);
        s.add_coeff(MultiIndex::zero(n), c);
        s
    }

    pub fn one(n: usize, order: u32) -> Self {
        Series::constant(n, order, Scalar::one())
    }

    /// `c0 + Σ c_j h_j`.
    pub fn linear(n: usize, order: u32, c0: Scalar, c: &[Scalar]) -> Self {
        let mut s = Series::constant(n, order, c0);
        if order >= 1 {
            for (j, v) in c.iter().enumerate() {
                s.add_coeff(MultiIndex::unit(n, j), v.clone());
            }
        }
        s
    }

    fn add_coeff(&mut self, a: MultiIndex, c: Scalar) {
        if c.is_zero() || a.order() > self.order {
            return;
        }
        match self.coeffs.get_mut(&a) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.coeffs.remove(&a);
                }
            }
            None => {
                self.coeffs.insert(a, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, a: &MultiIndex) -> Scalar {
        self.coeffs.get(a).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.coeffs.iter()
    }

    /// `∂^α f(0) = α! · c_α`.
    pub fn derivative_at_origin(&self, a: &MultiIndex) -> Scalar {
        &self.coeff(a) * &factorial_scalar(a)
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut s = self.clone();
        s.order = self.order.min(other.order);
        s.coeffs.retain(|a, _| a.order() <= s.order);
        for (a, c) in &other.coeffs {
            s.add_coeff(a.clone(), c.clone());
        }
        s
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        let mut s = Series::zero(self.n, self.order);
        for (a, v) in &self.coeffs {
            s.add_coeff(a.clone(), v * c);
        }
        s
    }

    pub fn mul(&self, other: &Series) -> Series {
        let order = self.order.min(other.order);
        let mut s = Series::zero(self.n, order);
        for (a, c) in &self.coeffs {
            let da = a.order();
            if da > order {
                continue;
            }
            for (b, d) in &other.coeffs {
                if da + b.order() > order {
                    // coefficients are graded, later entries only grow
                    break;
                }
                s.add_coeff(a.add(b), c * d);
            }
        }
        s
    }

    pub fn pow(&self, e: u32) -> Series {
        (0..e).fold(Series::one(self.n, self.order), |acc, _| acc.mul(self))
    }

    /// `1/f` for `f(0) ≠ 0` via the geometric series.
    pub fn inverse(&self) -> Result<Series> {
        let c0 = self.coeff(&MultiIndex::zero(self.n));
        let inv0 = c0.inv().ok_or(Error::PoleAtPoint)?;
        if c0.abs() < 1e-300 {
            return Err(Error::PoleAtPoint);
        }
        // f = c0 (1 + u), 1/f = (1/c0) Σ (−u)^k
        let mut u = self.scale(&inv0);
        u.coeffs.remove(&MultiIndex::zero(self.n));
        let neg_u = u.scale(&Scalar::from_i64(-1));
        let mut acc = Series::one(self.n, self.order);
        let mut term = Series::one(self.n, self.order);
        for _ in 0..self.order {
            term = term.mul(&neg_u);
            acc = acc.add(&term);
        }
        Ok(acc.scale(&inv0))
    }

    pub fn diff(&self, i: usize) -> Series {
        let mut s = Series::zero(self.n, self.order.saturating_sub(1));
        for (a, c) in &self.coeffs {
            let ai = a.0[i];
            if ai == 0 {
                continue;
            }
            let mut b = a.clone();
            b.0[i] -= 1;
            s.add_coeff(b, c * &Scalar::from_i64(ai as i64));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn p(n: usize, terms: &[(&[u32], i64)]) -> Polynomial {
        Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), Scalar::from_i64(*c)))).unwrap()
    }

    fn pt(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::from_i64(x)).collect()
    }

    #[test]
    fn graded_lex_order() {
        let idx = MultiIndex::all_of_order(2, 2);
        let e: Vec<_> = idx.iter().map(|a| a.exponents().to_vec()).collect();
        assert_eq!(e, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(MultiIndex::new(vec![0, 1]) < MultiIndex::new(vec![2, 0]));
        assert_eq!(MultiIndex::all_of_order(3, 3).len(), 10);
    }

    #[test]
    fn power_rule_partial() {
        let f = RationalFunction::polynomial(p(2, &[(&[2, 1], 1)]));
        let g = f.partial(&MultiIndex::new(vec![1, 1]));
        assert!(g.equals(&RationalFunction::polynomial(p(2, &[(&[1, 0], 2)]))));
    }

    #[test]
    fn quotient_rule_partial() {
        let f = RationalFunction::new(p(2, &[(&[3, 0], 1)]), p(2, &[(&[0, 1], 1)]));
        let g = f.partial(&MultiIndex::new(vec![0, 1]));
        let expect = RationalFunction::new(p(2, &[(&[3, 0], -1)]), p(2, &[(&[0, 2], 1)]));
        assert!(g.equals(&expect));
    }

    #[test]
    fn evaluate_cases() {
        let f = RationalFunction::polynomial(p(2, &[(&[2, 0], 1), (&[0, 2], 1)]));
        assert_eq!(f.eval(&pt(&[3, 4])).unwrap(), Scalar::from_i64(25));
        let g = RationalFunction::new(p(2, &[(&[3, 0], 1)]), p(2, &[(&[0, 1], 1)]));
        assert_eq!(g.eval(&pt(&[1, 0])), Err(Error::PoleAtPoint));
        let h = RationalFunction::new(p(2, &[(&[4, 0], 1), (&[0, 4], 1)]), p(2, &[(&[2, 0], 1), (&[0, 2], 1)]));
        assert_eq!(h.eval(&pt(&[1, 1])).unwrap(), Scalar::one());
    }

    #[test]
    fn cubic_test_potential_tensor() {
        // V = ½(2q₁² + q₂²) + c q₁³/q₂ written over the common denominator q₂
        let c = Scalar::from_ratio(3, 2);
        let num = Polynomial::from_terms(
            2,
            vec![
                (vec![2, 1], Scalar::one()),
                (vec![0, 3], Scalar::from_ratio(1, 2)),
                (vec![3, 0], c.clone()),
            ],
        )
        .unwrap();
        let v = HomogeneousPotential::new(2, num, p(2, &[(&[0, 1], 1)])).unwrap();
        let f = v.force_field();
        let d = pt(&[0, 1]);
        let t = derivative_tensor(&f, &d, 2).unwrap();
        assert_eq!(t.get(0, &[0, 0]), &Scalar::from_i64(-6) * &c);
        assert!(t.get(1, &[0, 0]).is_zero());
        assert!(t.get(0, &[0, 1]).is_zero());
        let sym = derivative_tensor_symbolic(&f, &d, 2).unwrap();
        assert_eq!(t, sym);
        let h = v.hessian_at(&d, 0.0).unwrap();
        assert_eq!(h, Matrix::from_rows(vec![pt(&[2, 0]), pt(&[0, 1])]));
    }

    #[test]
    fn euler_identity_declared_degree() {
        let v = HomogeneousPotential::new(2, p(2, &[(&[3, 0], 1)]), p(2, &[(&[0, 1], 1)])).unwrap();
        assert!(euler_check(&v, &[pt(&[1, 2]), pt(&[3, -1])], &Arith::exact()).unwrap());
        assert!(HomogeneousPotential::new(3, p(2, &[(&[3, 0], 1)]), p(2, &[(&[0, 1], 1)])).is_err());
    }

    #[test]
    fn series_inverse() {
        // 1/(1 + h) up to h³
        let s = Series::linear(1, 3, Scalar::one(), &[Scalar::one()]);
        let inv = s.inverse().unwrap();
        for (k, c) in [(0, 1), (1, -1), (2, 1), (3, -1)] {
            assert_eq!(inv.coeff(&MultiIndex::new(vec![k])), Scalar::from_i64(c));
        }
        assert!(Series::zero(1, 2).inverse().is_err());
    }

    #[test]
    fn substitute_affine_matches_eval() {
        let f = p(2, &[(&[2, 1], 3), (&[0, 3], -1), (&[1, 2], 2)]);
        let d = vec![Scalar::from_str("1/2").unwrap(), Scalar::from_i64(2)];
        let frame = Matrix::from_rows(vec![pt(&[1, 1]), pt(&[0, 2])]);
        let s = f.substitute_affine(&d, &frame, 3);
        let h = pt(&[1, -1]);
        let q: Vec<Scalar> = (0..2).map(|i| &d[i] + &frame.mul_vec(&h)[i]).collect();
        let direct = f.eval(&q);
        let via = s.coeffs().fold(Scalar::zero(), |acc, (a, c)| &acc + &(c * &Polynomial::from_terms(2, vec![(a.exponents().to_vec(), Scalar::one())]).unwrap().eval(&h)));
        assert_eq!(direct, via);
    }
}
