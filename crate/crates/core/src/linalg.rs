//! Small dense matrices over [`Scalar`], exact spectra and Jordan chains.
//!
//! Eigenvalues are found exactly whenever they are Gaussian rationals: the
//! characteristic polynomial is computed exactly, split by Yun's squarefree
//! factorization, and numeric roots are snapped to candidates whose
//! denominators are bounded by the rational root theorem, then verified
//! exactly. Roots that survive are reported as inexact approximations of
//! algebraic numbers outside `Q(i)`.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Arith, Mode, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_columns(cols: &[Vec<Scalar>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Scalar::is_exact)
    }

    pub fn lift(&self, arith: &Arith) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| arith.lift(v.clone())).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Scalar::zero();
                for l in 0..self.cols {
                    let a = self.get(i, l);
                    if a.is_zero() {
                        continue;
                    }
                    acc += &(a * other.get(l, j));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for (j, x) in v.iter().enumerate() {
                    acc += &(self.get(i, j) * x);
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn shift(&self, lambda: &Scalar) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = m.get(i, i) - lambda;
            m.set(i, i, v);
        }
        m
    }

    pub fn trace(&self) -> Scalar {
        (0..self.rows.min(self.cols)).fold(Scalar::zero(), |acc, i| &acc + self.get(i, i))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data.iter().all(|v| v.is_negligible(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::abs).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).is_negligible(tol)))
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }

    /// Reduced row echelon form and pivot columns. Float entries below `tol`
    /// are treated as zero; exact entries pivot on the first nonzero.
    pub fn rref(&self, tol: f64) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let pick = if m.data[r * m.cols..].iter().all(Scalar::is_exact) {
                (r..self.rows).find(|&i| !m.get(i, c).is_zero())
            } else {
                (r..self.rows)
                    .filter(|&i| !m.get(i, c).is_negligible(tol))
                    .max_by(|&a, &b| m.get(a, c).abs().total_cmp(&m.get(b, c).abs()))
            };
            let Some(p) = pick else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in 0..self.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, f);
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self, tol: f64) -> Option<Matrix> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Scalar::one());
        }
        let (r, pivots) = aug.rref(tol);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> UPoly {
        let n = self.rows;
        let mut c = vec![Scalar::zero(); n + 1];
        c[n] = Scalar::one();
        let mut m = Matrix::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Matrix::identity(n).scale(&c[n - k + 1]));
            let tr = self.mul(&m).trace();
            c[n - k] = -(tr / Scalar::from_i64(k as i64));
        }
        UPoly::new(c)
    }

    /// Evaluates the polynomial `p` at this (square) matrix.
    pub fn eval_poly(&self, p: &UPoly) -> Matrix {
        let n = self.rows;
        let mut acc = Matrix::zeros(n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&Matrix::identity(n).scale(c));
        }
        acc
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Dense univariate polynomial, coefficients from low to high degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly {
    c: Vec<Scalar>,
}

impl UPoly {
    pub fn new(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(Scalar::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.c.iter().rev().fold(Scalar::zero(), |acc, a| &(&acc * x) + a)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.c.iter().enumerate().skip(1).map(|(i, a)| a * &Scalar::from_i64(i as i64)).collect())
    }

    pub fn monic(&self) -> UPoly {
        match self.c.last().and_then(Scalar::inv) {
            Some(inv) => UPoly::new(self.c.iter().map(|a| a * &inv).collect()),
            None => self.clone(),
        }
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::new(vec![]);
        }
        let mut c = vec![Scalar::zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += &(a * b);
            }
        }
        UPoly::new(c)
    }

    /// Euclidean division; exact coefficients are required for a clean remainder.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.c[dd].inv().expect("nonzero leading coefficient");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::new(vec![]), self.clone());
        }
        let mut q = vec![Scalar::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] * &lead_inv;
            for (j, b) in d.c.iter().enumerate() {
                r[k + j] = &r[k + j] - &(&f * b);
            }
            r[k + dd] = Scalar::zero();
            q[k] = f;
        }
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's squarefree factorization: `self = lc · ∏ a_i^i` with `(a_i, i)`.
    pub fn squarefree_factors(&self) -> Vec<(UPoly, usize)> {
        let f = self.monic();
        let mut out = Vec::new();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.divrem(&a0).0;
        let mut c = fp.divrem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            b = b.divrem(&a).0;
            c = d.divrem(&a).0;
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, i));
            }
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn squarefree_part(&self) -> UPoly {
        self.squarefree_factors().into_iter().fold(UPoly::new(vec![Scalar::one()]), |acc, (a, _)| acc.mul(&a))
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.c.len().max(other.c.len());
        let z = Scalar::zero();
        UPoly::new((0..n).map(|i| self.c.get(i).unwrap_or(&z) - other.c.get(i).unwrap_or(&z)).collect())
    }

    /// Numeric roots via the companion matrix.
    pub fn numeric_roots(&self) -> Vec<Complex64> {
        let Some(deg) = self.degree() else {
            return vec![];
        };
        if deg == 0 {
            return vec![];
        }
        let m = self.monic();
        let comp = DMatrix::from_fn(deg, deg, |i, j| {
            if j == deg - 1 {
                -m.c[i].to_c64()
            } else if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        complex_eigenvalues(comp)
    }
}

fn complex_eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    match m.clone().schur().eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => (0..n).map(|i| m[(i, i)]).collect(),
    }
}

/// An eigenvalue: exact (Gaussian rational) or a float approximation of an
/// algebraic number certified not to lie in `Q(i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub value: Scalar,
    pub exact: bool,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanChain {
    pub eigenvalue: usize,
    /// `v_1, .., v_m` with `A v_1 = λ v_1`, `A v_i = λ v_i + v_{i−1}`.
    pub vectors: Vec<Vec<Scalar>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub diagonalizable: bool,
    /// Set when every eigenvalue was recovered exactly.
    pub exact: bool,
}

fn lcm_denominators(p: &UPoly) -> Option<BigInt> {
    let mut l = BigInt::one();
    for c in p.coeffs() {
        let z = c.as_gauss()?;
        l = l.lcm(z.re.denom()).lcm(z.im.denom());
    }
    Some(l)
}

fn round_gauss(z: Complex64, l: &BigInt) -> Option<Scalar> {
    let lf = num_traits::ToPrimitive::to_f64(l)?;
    let re = (z.re * lf).round();
    let im = (z.im * lf).round();
    if !re.is_finite() || !im.is_finite() || re.abs() > 9e15 || im.abs() > 9e15 {
        return None;
    }
    let mk = |x: f64| BigRational::new(BigInt::from(x as i64), l.clone());
    Some(Scalar::gauss(mk(re), mk(im)))
}

/// Exact roots of a squarefree polynomial with Gaussian-rational coefficients,
/// plus numeric approximations of the rest.
fn split_roots(p: &UPoly, tol: f64) -> (Vec<Scalar>, Vec<Complex64>) {
    let mut exact = Vec::new();
    let mut rest = p.monic();
    loop {
        match rest.degree() {
            None | Some(0) => return (exact, vec![]),
            Some(1) => {
                exact.push(-rest.c[0].clone());
                return (exact, vec![]);
            }
            Some(2) => {
                let (c0, c1) = (&rest.c[0], &rest.c[1]);
                let disc = &(c1 * c1) - &(c0 * &Scalar::from_i64(4));
                if let Some(s) = disc.sqrt_exact() {
                    let half = Scalar::from_ratio(1, 2);
                    exact.push(&(&(-c1) + &s) * &half);
                    exact.push(&(&(-c1) - &s) * &half);
                    return (exact, vec![]);
                }
                return (exact, rest.numeric_roots());
            }
            Some(_) => {}
        }
        let Some(l) = lcm_denominators(&rest) else {
            return (exact, rest.numeric_roots());
        };
        let found = rest
            .numeric_roots()
            .into_iter()
            .filter_map(|z| round_gauss(z, &l).filter(|c| (c.to_c64() - z).norm() < tol.max(1e-6)))
            .find(|c| rest.eval(c).is_zero());
        match found {
            Some(r) => {
                let lin = UPoly::new(vec![-r.clone(), Scalar::one()]);
                rest = rest.divrem(&lin).0;
                exact.push(r);
            }
            None => return (exact, rest.numeric_roots()),
        }
    }
}

/// Spectrum of a square matrix. Exact matrices get exact eigenvalues where
/// possible and an exact diagonalizability test (squarefree part of the
/// characteristic polynomial annihilates the matrix).
pub fn spectrum(a: &Matrix, arith: &Arith) -> Spectrum {
    if a.is_exact() && arith.mode == Mode::Exact {
        let cp = a.charpoly();
        let factors = cp.squarefree_factors();
        let mut eigenvalues = Vec::new();
        let mut all_exact = true;
        for (f, mult) in &factors {
            let (ex, approx) = split_roots(f, arith.tol);
            for r in ex {
                eigenvalues.push(Eigenvalue { value: r, exact: true, multiplicity: *mult });
            }
            for z in approx {
                all_exact = false;
                eigenvalues.push(Eigenvalue { value: Scalar::Float(z), exact: false, multiplicity: *mult });
            }
        }
        eigenvalues.sort_by(|x, y| x.value.total_cmp(&y.value));
        let sf = factors.iter().fold(UPoly::new(vec![Scalar::one()]), |acc, (f, _)| acc.mul(f));
        let diagonalizable = a.eval_poly(&sf).is_zero(0.0);
        return Spectrum { eigenvalues, diagonalizable, exact: all_exact };
    }
    let tol = arith.tol.max(1e-12);
    let mut vals = complex_eigenvalues(a.to_c64());
    vals.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let scale = a.max_abs().max(1.0);
    let cluster_tol = tol.sqrt() * scale;
    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
    for z in vals {
        match eigenvalues.iter_mut().find(|e| (e.value.to_c64() - z).norm() < cluster_tol) {
            Some(e) => e.multiplicity += 1,
            None => eigenvalues.push(Eigenvalue { value: Scalar::Float(z), exact: false, multiplicity: 1 }),
        }
    }
    let diagonalizable = eigenvalues
        .iter()
        .all(|e| a.lift(&Arith::float(tol)).shift(&e.value).nullspace(cluster_tol).len() == e.multiplicity);
    Spectrum { eigenvalues, diagonalizable, exact: false }
}

/// Jordan chains for every eigenvalue, exact when the spectrum is exact.
pub fn jordan_chains(a: &Matrix, spec: &Spectrum, tol: f64) -> Result<Vec<JordanChain>> {
    let n = a.rows();
    let mut out = Vec::new();
    for (idx, ev) in spec.eigenvalues.iter().enumerate() {
        let nmat = a.shift(&ev.value);
        let tol_e = if ev.exact { 0.0 } else { tol.sqrt() };
        // kernels of N^j for j = 0..=m
        let mut powers = vec![Matrix::identity(n)];
        for j in 1..=ev.multiplicity {
            powers.push(powers[j - 1].mul(&nmat));
        }
        let kernels: Vec<Vec<Vec<Scalar>>> = powers.iter().map(|p| p.nullspace(tol_e)).collect();
        if kernels[ev.multiplicity].len() != ev.multiplicity {
            return Err(Error::Unsupported("generalized eigenspace dimension mismatch".into()));
        }
        let mut chains: Vec<Vec<Vec<Scalar>>> = Vec::new();
        for j in (1..=ev.multiplicity).rev() {
            // level j is covered by K_{j-1} and the level-j vectors of longer chains
            let mut covered: Vec<Vec<Scalar>> = kernels[j - 1].clone();
            covered.extend(chains.iter().filter(|c| c.len() > j).map(|c| c[j - 1].clone()));
            for v in &kernels[j] {
                let mut trial = covered.clone();
                trial.push(v.clone());
                if Matrix::from_columns(&trial).rank(tol_e) > Matrix::from_columns(&covered).rank(tol_e) {
                    let mut chain = vec![v.clone()];
                    for _ in 1..j {
                        let next = nmat.mul_vec(chain.last().unwrap());
                        chain.push(next);
                    }
                    chain.reverse();
                    covered.push(v.clone());
                    chains.push(chain);
                }
            }
        }
        chains.sort_by_key(|c| std::cmp::Reverse(c.len()));
        for vectors in chains {
            out.push(JordanChain { eigenvalue: idx, vectors });
        }
    }
    Ok(out)
}

/// Gaussian-rational entries of a float vector, when every entry snaps.
pub fn rationalize_vec(v: &[Complex64], max_den: i64, tol: f64) -> Option<Vec<Scalar>> {
    v.iter().map(|z| Scalar::rationalize(*z, max_den, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Scalar::from_i64(x)).collect()).collect())
    }

    #[test]
    fn charpoly_small() {
        let a = m(&[&[2, 1], &[1, 2]]);
        // x² − 4x + 3
        let cp = a.charpoly();
        assert_eq!(cp.coeffs(), &[Scalar::from_i64(3), Scalar::from_i64(-4), Scalar::one()]);
    }

    #[test]
    fn exact_rational_spectrum() {
        let a = m(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, 5]]);
        let s = spectrum(&a, &Arith::exact());
        assert!(s.exact && s.diagonalizable);
        let vals: Vec<_> = s.eigenvalues.iter().map(|e| e.value.clone()).collect();
        assert_eq!(vals, vec![Scalar::from_i64(1), Scalar::from_i64(3), Scalar::from_i64(5)]);
    }

    #[test]
    fn irrational_eigenvalues_flagged() {
        let a = m(&[&[1, 1], &[1, 2]]);
        let s = spectrum(&a, &Arith::exact());
        assert!(!s.exact);
        assert!(s.eigenvalues.iter().all(|e| !e.exact));
    }

    #[test]
    fn jordan_block_detected() {
        let a = m(&[&[3, 1], &[0, 3]]);
        let s = spectrum(&a, &Arith::exact());
        assert!(!s.diagonalizable);
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].multiplicity, 2);
        let ch = jordan_chains(&a, &s, 1e-10).unwrap();
        assert_eq!(ch.len(), 1);
        let v = &ch[0].vectors;
        let lam = Scalar::from_i64(3);
        let av1 = a.mul_vec(&v[0]);
        assert!(av1.iter().zip(&v[0]).all(|(x, y)| *x == &lam * y));
        let av2 = a.mul_vec(&v[1]);
        assert!(av2.iter().zip(v[1].iter().zip(&v[0])).all(|(x, (y, z))| *x == &(&lam * y) + z));
    }

    #[test]
    fn complex_symmetric_jordan() {
        // [[-6, -3i], [-3i, 0]] has a double eigenvalue -3 and one eigenvector
        let i = Scalar::i();
        let a = Matrix::from_rows(vec![
            vec![Scalar::from_i64(-6), &Scalar::from_i64(-3) * &i],
            vec![&Scalar::from_i64(-3) * &i, Scalar::zero()],
        ]);
        let s = spectrum(&a, &Arith::exact());
        assert!(!s.diagonalizable);
        assert_eq!(s.eigenvalues[0].value, Scalar::from_i64(-3));
    }

    #[test]
    fn yun_factorization() {
        // (x−1)²(x+2)
        let p = UPoly::new(vec![Scalar::from_i64(2), Scalar::from_i64(-3), Scalar::zero(), Scalar::one()]);
        let f = p.squarefree_factors();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].1, 1);
        assert_eq!(f[1].1, 2);
    }

    #[test]
    fn inverse_and_nullspace() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let inv = a.inverse(0.0).unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        let b = m(&[&[1, 2], &[2, 4]]);
        assert!(b.inverse(0.0).is_none());
        let ns = b.nullspace(0.0);
        assert_eq!(ns.len(), 1);
        assert!(b.mul_vec(&ns[0]).iter().all(Scalar::is_zero));
    }
}
