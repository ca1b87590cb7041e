//! Darboux points: verification, normalization, spectra and resonance.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{jordan_chains, spectrum, Eigenvalue, Matrix, Spectrum};
use crate::poly::HomogeneousPotential;
use crate::scalar::{rational_sqrt, Arith, Mode, Scalar};
use crate::surd::SurdSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FrequencyTag {
    Zero,
    NonzeroRational,
    Irrational,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Independence {
    True,
    False,
    Asserted,
    Undetermined,
}

/// `ω = √λ` on the principal branch.
#[derive(Clone, Debug, PartialEq)]
pub enum Frequency {
    /// Exact sum of square roots; zero and rationality are decidable.
    Surd(SurdSum),
    /// Certified not rational (e.g. `λ` outside `Q`); value approximate.
    NonRational(Complex64),
    /// Float data with no certificate either way.
    Approx(Complex64),
}

impl Frequency {
    pub fn from_eigenvalue(ev: &Eigenvalue, mode: Mode) -> Frequency {
        if mode == Mode::Float || !ev.value.is_exact() {
            let z = ev.value.to_c64().sqrt();
            return if ev.exact || mode == Mode::Float { Frequency::Approx(z) } else { Frequency::NonRational(z) };
        }
        Frequency::from_lambda(&ev.value)
    }

    /// Frequency of an exact `λ`.
    pub fn from_lambda(lambda: &Scalar) -> Frequency {
        match lambda.as_rational() {
            Some(r) => match SurdSum::sqrt_of(r) {
                Some(s) => Frequency::Surd(s),
                None => match rational_sqrt(r) {
                    Some(q) => Frequency::Surd(SurdSum::rational(q)),
                    None => Frequency::NonRational(lambda.to_c64().sqrt()),
                },
            },
            None if lambda.is_exact() => Frequency::NonRational(lambda.to_c64().sqrt()),
            None => Frequency::Approx(lambda.to_c64().sqrt()),
        }
    }

    pub fn rational(q: BigRational) -> Frequency {
        Frequency::Surd(SurdSum::rational(q))
    }

    pub fn integer(v: i64) -> Frequency {
        Frequency::Surd(SurdSum::integer(v))
    }

    pub fn tag(&self) -> FrequencyTag {
        match self {
            Frequency::Surd(s) if s.is_zero() => FrequencyTag::Zero,
            Frequency::Surd(s) if s.as_rational().is_some() => FrequencyTag::NonzeroRational,
            Frequency::Surd(_) | Frequency::NonRational(_) => FrequencyTag::Irrational,
            Frequency::Approx(_) => FrequencyTag::Undetermined,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Frequency::Surd(s) => s.to_c64(),
            Frequency::NonRational(z) | Frequency::Approx(z) => *z,
        }
    }

    pub fn as_surd(&self) -> Option<&SurdSum> {
        match self {
            Frequency::Surd(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_surd().and_then(SurdSum::as_rational)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::Surd(s) => write!(f, "{s}"),
            Frequency::NonRational(z) | Frequency::Approx(z) => {
                if z.im == 0.0 {
                    write!(f, "~{}", z.re)
                } else {
                    write!(f, "~{}{:+}i", z.re, z.im)
                }
            }
        }
    }
}

impl Serialize for Frequency {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("tag", &self.tag())?;
        m.serialize_entry("value", &self.to_string())?;
        m.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceClass {
    pub tags: Vec<FrequencyTag>,
    pub z_linear_independent: Independence,
    /// Integer relation `Σ m_i ω_i = 0` when dependence is proven.
    pub witness: Option<Vec<BigInt>>,
}

impl ResonanceClass {
    /// Records a caller assertion of independence. Proven dependence is kept.
    pub fn with_assertion(mut self, asserted: bool) -> Self {
        if asserted && self.z_linear_independent == Independence::Undetermined {
            self.z_linear_independent = Independence::Asserted;
        }
        self
    }

    pub fn independence_established(&self) -> bool {
        matches!(self.z_linear_independent, Independence::True | Independence::Asserted)
    }
}

/// Tags every frequency and decides Z-linear dependence where possible.
///
/// Dependence among exact frequencies is found by an exact rational nullspace
/// over the radicand coordinates. Independence is only reported as proven for
/// a single nonzero frequency; anything else stays undetermined unless the
/// caller asserts it.
pub fn classify_resonance(omegas: &[Frequency]) -> ResonanceClass {
    let n = omegas.len();
    let tags: Vec<FrequencyTag> = omegas.iter().map(Frequency::tag).collect();
    if let Some(i) = tags.iter().position(|t| *t == FrequencyTag::Zero) {
        let mut w = vec![BigInt::zero(); n];
        w[i] = BigInt::one();
        return ResonanceClass { tags, z_linear_independent: Independence::False, witness: Some(w) };
    }
    let exact: Vec<(usize, &SurdSum)> = omegas.iter().enumerate().filter_map(|(i, w)| w.as_surd().map(|s| (i, s))).collect();
    let mut radicands: Vec<i64> = exact.iter().flat_map(|(_, s)| s.terms().map(|(k, _)| k)).collect();
    radicands.sort_unstable();
    radicands.dedup();
    if exact.len() >= 2 {
        let rows: Vec<Vec<Scalar>> = radicands
            .iter()
            .map(|r| {
                exact
                    .iter()
                    .map(|(_, s)| {
                        s.terms().find(|(k, _)| k == r).map(|(_, q)| Scalar::from_rational(q.clone())).unwrap_or_else(Scalar::zero)
                    })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(rows);
        if let Some(v) = m.nullspace(0.0).into_iter().next() {
            let lcm = v.iter().filter_map(|x| x.as_rational()).fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            let mut w = vec![BigInt::zero(); n];
            for ((i, _), x) in exact.iter().zip(&v) {
                let q = x.as_rational().expect("rational nullspace");
                w[*i] = (q * BigRational::from_integer(lcm.clone())).to_integer();
            }
            if w.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                w.iter_mut().for_each(|x| *x = -x.clone());
            }
            return ResonanceClass { tags, z_linear_independent: Independence::False, witness: Some(w) };
        }
    }
    let independence = if n == 1 && exact.len() == 1 { Independence::True } else { Independence::Undetermined };
    ResonanceClass { tags, z_linear_independent: independence, witness: None }
}

/// How a Darboux point was brought to `γ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Rescaling {
    None,
    PotentialScaled { factor: Scalar },
    PointScaled { alpha: Scalar },
}

/// A proper Darboux point with its Hessian spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DarbouxData {
    pub d: Vec<Scalar>,
    pub k: i32,
    pub gamma: Scalar,
    pub normalized: bool,
    pub rescaling: Rescaling,
    pub hessian: Matrix,
    pub spectrum: Spectrum,
    pub diagonalizable: bool,
    #[serde(skip)]
    pub arith: Arith,
}

/// Coordinates adapted to the Hessian: `q = d + P y`, `P⁻¹ H P = J` with
/// `J` diagonal or upper Jordan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    pub p: Matrix,
    pub p_inv: Matrix,
    /// `(PᵀP)⁻¹`, mapping `∇_y Ṽ` to the force in frame coordinates.
    pub metric_inv: Matrix,
    pub lambdas: Vec<Scalar>,
    /// `J_{i,i+1}`, zero for a diagonal frame.
    pub superdiag: Vec<Scalar>,
    pub frequencies: Vec<Frequency>,
    pub darboux_index: Option<usize>,
    pub exact: bool,
}

impl Frame {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.superdiag.iter().all(Scalar::is_zero)
    }
}

fn norm(v: &[Scalar]) -> f64 {
    v.iter().map(|x| x.abs().powi(2)).sum::<f64>().sqrt()
}

/// Checks `V′(d) = γ d` and computes the Hessian spectrum at `d`.
pub fn verify_darboux(v: &HomogeneousPotential, d: &[Scalar], arith: &Arith) -> Result<DarbouxData> {
    if d.len() != v.n() {
        return Err(Error::DimensionMismatch { expected: v.n(), got: d.len() });
    }
    let v = v.lift(arith);
    let d: Vec<Scalar> = d.iter().map(|x| arith.lift(x.clone())).collect();
    let dn = norm(&d);
    if d.iter().all(|x| x.is_negligible(arith.tol)) {
        return Err(Error::NotADarbouxPoint { residual: f64::INFINITY });
    }
    let g = v.gradient_at(&d, arith.tol)?;
    let pivot = (0..d.len()).max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs())).unwrap();
    let gamma = &g[pivot] / &d[pivot];
    let resid: Vec<Scalar> = g.iter().zip(&d).map(|(a, b)| a - &(&gamma * b)).collect();
    let rn = norm(&resid);
    let ok = match arith.mode {
        Mode::Exact if v.is_exact() && d.iter().all(Scalar::is_exact) => resid.iter().all(Scalar::is_zero),
        _ => rn <= arith.tol * dn * gamma.abs().max(1.0),
    };
    if !ok {
        return Err(Error::NotADarbouxPoint { residual: rn });
    }
    if gamma.is_negligible(arith.tol) {
        return Err(Error::ZeroMultiplier);
    }
    let hessian = v.hessian_at(&d, arith.tol)?;
    let spec = spectrum(&hessian, arith);
    Ok(DarbouxData {
        normalized: gamma.approx_eq(&Scalar::one(), arith.tol),
        diagonalizable: spec.diagonalizable,
        d,
        k: v.k(),
        gamma,
        rescaling: Rescaling::None,
        hessian,
        spectrum: spec,
        arith: *arith,
    })
}

/// Rescales to `γ = 1`: `V → V/γ` for `k = 2`, `d → αd` with `α^{k−2}γ = 1`
/// otherwise. When no exact `α` exists in exact mode the potential is
/// rescaled instead.
pub fn normalize_darboux(v: &HomogeneousPotential, data: &DarbouxData) -> Result<(HomogeneousPotential, DarbouxData)> {
    let arith = data.arith;
    if data.gamma.approx_eq(&Scalar::one(), arith.tol) {
        let mut out = data.clone();
        out.normalized = true;
        return Ok((v.lift(&arith), out));
    }
    let scale_potential = |v: &HomogeneousPotential| -> Result<(HomogeneousPotential, DarbouxData)> {
        let inv = data.gamma.inv().ok_or(Error::ZeroMultiplier)?;
        let w = v.scale(&inv).lift(&arith);
        let mut out = verify_darboux(&w, &data.d, &arith)?;
        out.normalized = true;
        out.rescaling = Rescaling::PotentialScaled { factor: inv };
        Ok((w, out))
    };
    if v.k() == 2 {
        return scale_potential(v);
    }
    let m = v.k() - 2;
    let base = if m > 0 { data.gamma.inv().ok_or(Error::ZeroMultiplier)? } else { data.gamma.clone() };
    let root = m.unsigned_abs();
    let alpha = match arith.mode {
        Mode::Exact => base.nth_root_exact(root),
        Mode::Float => Some(Scalar::Float(base.to_c64().powf(1.0 / root as f64))),
    };
    let Some(alpha) = alpha else {
        return scale_potential(v);
    };
    let d: Vec<Scalar> = data.d.iter().map(|x| x * &alpha).collect();
    let mut out = verify_darboux(v, &d, &arith)?;
    out.normalized = true;
    out.rescaling = Rescaling::PointScaled { alpha };
    Ok((v.lift(&arith), out))
}

fn span_rank(vs: &[Vec<Scalar>], tol: f64) -> usize {
    if vs.is_empty() {
        0
    } else {
        Matrix::from_columns(vs).rank(tol)
    }
}

impl DarbouxData {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Eigenvalues repeated by multiplicity, in spectrum order.
    pub fn eigenvalues(&self) -> Vec<Scalar> {
        self.spectrum.eigenvalues.iter().flat_map(|e| std::iter::repeat(e.value.clone()).take(e.multiplicity)).collect()
    }

    pub fn frequencies(&self) -> Vec<Frequency> {
        self.spectrum
            .eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat(Frequency::from_eigenvalue(e, self.arith.mode)).take(e.multiplicity))
            .collect()
    }

    /// `H d = (k−1) γ d`.
    pub fn euler_consistent(&self) -> bool {
        let hd = self.hessian.mul_vec(&self.d);
        let c = &Scalar::from_i64((self.k - 1) as i64) * &self.gamma;
        hd.iter().zip(&self.d).all(|(a, b)| (a - &(&c * b)).is_negligible(self.arith.tol * (1.0 + norm(&self.d))))
    }

    /// Eigenframe with `d` as the last column (diagonalizable case), or a
    /// Jordan frame when `allow_jordan` is set.
    pub fn frame(&self, allow_jordan: bool) -> Result<Frame> {
        let n = self.n();
        let tol = self.arith.tol;
        let mut columns: Vec<Vec<Scalar>> = Vec::new();
        let mut lambdas = Vec::new();
        let mut superdiag = Vec::new();
        let mut freqs = Vec::new();
        let mut darboux_index = None;
        let mut exact = self.spectrum.exact && self.arith.mode == Mode::Exact;
        if self.diagonalizable {
            let dir_lambda = &Scalar::from_i64((self.k - 1) as i64) * &self.gamma;
            let mut tail: Option<(Vec<Vec<Scalar>>, &Eigenvalue)> = None;
            for ev in &self.spectrum.eigenvalues {
                let ev_tol = if ev.exact && exact { 0.0 } else { tol.sqrt() * self.hessian.max_abs().max(1.0) };
                let mut basis = self.hessian.shift(&ev.value).nullspace(ev_tol);
                if basis.len() != ev.multiplicity {
                    return Err(Error::NotDiagonalizable);
                }
                if !ev.exact {
                    exact = false;
                }
                if ev.value.approx_eq(&dir_lambda, tol) && tail.is_none() {
                    // complete d to a basis of its eigenspace, d last
                    let mut b = vec![self.d.clone()];
                    for v in basis.drain(..) {
                        let mut trial = b.clone();
                        trial.push(v.clone());
                        if span_rank(&trial, ev_tol) > span_rank(&b, ev_tol) {
                            b.push(v);
                        }
                    }
                    b.rotate_left(1);
                    b.truncate(ev.multiplicity);
                    if b.last() != Some(&self.d) {
                        return Err(Error::NotADarbouxPoint { residual: f64::NAN });
                    }
                    tail = Some((b, ev));
                    continue;
                }
                for v in basis {
                    columns.push(v);
                    lambdas.push(ev.value.clone());
                    freqs.push(Frequency::from_eigenvalue(ev, self.arith.mode));
                }
            }
            if let Some((b, ev)) = tail {
                for v in b {
                    columns.push(v);
                    lambdas.push(ev.value.clone());
                    freqs.push(Frequency::from_eigenvalue(ev, self.arith.mode));
                }
                darboux_index = Some(n - 1);
            }
            superdiag = vec![Scalar::zero(); n.saturating_sub(1)];
        } else {
            if !allow_jordan {
                return Err(Error::NotDiagonalizable);
            }
            let chains = jordan_chains(&self.hessian, &self.spectrum, tol)?;
            for ch in &chains {
                let ev = &self.spectrum.eigenvalues[ch.eigenvalue];
                if !ev.exact {
                    exact = false;
                }
                for (i, v) in ch.vectors.iter().enumerate() {
                    if !columns.is_empty() {
                        superdiag.push(if i == 0 { Scalar::zero() } else { Scalar::one() });
                    }
                    columns.push(v.clone());
                    lambdas.push(ev.value.clone());
                    freqs.push(Frequency::from_eigenvalue(ev, self.arith.mode));
                }
            }
            let d_rank = span_rank(&[self.d.clone()], tol);
            darboux_index = columns.iter().position(|c| {
                span_rank(&[c.clone(), self.d.clone()], if exact { 0.0 } else { tol }) == d_rank
            });
        }
        if columns.len() != n {
            return Err(Error::NotDiagonalizable);
        }
        let mut p = Matrix::from_columns(&columns);
        if !exact {
            p = p.lift(&Arith::float(tol));
        }
        let inv_tol = if exact { 0.0 } else { tol };
        let p_inv = p.inverse(inv_tol).ok_or(Error::NotDiagonalizable)?;
        let metric_inv = p.transpose().mul(&p).inverse(inv_tol).ok_or(Error::NotDiagonalizable)?;
        Ok(Frame { p, p_inv, metric_inv, lambdas, superdiag, frequencies: freqs, darboux_index, exact })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn pt(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::from_i64(x)).collect()
    }

    fn poly(n: usize, terms: &[(&[u32], Scalar)]) -> Polynomial {
        Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), c.clone()))).unwrap()
    }

    fn half() -> Scalar {
        Scalar::from_ratio(1, 2)
    }

    #[test]
    fn diagonal_quadratic() {
        let v = HomogeneousPotential::polynomial(2, poly(2, &[(&[2, 0], half()), (&[0, 2], Scalar::from_i64(2))])).unwrap();
        let data = verify_darboux(&v, &pt(&[1, 0]), &Arith::exact()).unwrap();
        assert_eq!(data.gamma, Scalar::one());
        assert_eq!(data.eigenvalues(), pt(&[1, 4]));
        let w: Vec<String> = data.frequencies().iter().map(|f| f.to_string()).collect();
        assert_eq!(w, vec!["1", "2"]);
        assert!(data.euler_consistent());
        let fr = data.frame(false).unwrap();
        assert_eq!(fr.darboux_index, Some(1));
        assert_eq!(fr.lambdas, pt(&[4, 1]));
    }

    #[test]
    fn isotropic_any_direction() {
        let v = HomogeneousPotential::polynomial(2, poly(2, &[(&[2, 0], half()), (&[0, 2], half())])).unwrap();
        let data = verify_darboux(&v, &pt(&[1, 1]), &Arith::exact()).unwrap();
        assert_eq!(data.gamma, Scalar::one());
        let fr = data.frame(false).unwrap();
        assert_eq!(fr.p.column(1), pt(&[1, 1]));
    }

    #[test]
    fn rejects_non_darboux_and_improper() {
        let v = HomogeneousPotential::polynomial(2, poly(2, &[(&[2, 0], half()), (&[0, 2], Scalar::from_i64(2))])).unwrap();
        assert!(matches!(verify_darboux(&v, &pt(&[1, 1]), &Arith::exact()), Err(Error::NotADarbouxPoint { .. })));
        let w = HomogeneousPotential::polynomial(2, poly(2, &[(&[0, 2], half())])).unwrap();
        assert_eq!(verify_darboux(&w, &pt(&[1, 0]), &Arith::exact()), Err(Error::ZeroMultiplier));
    }

    #[test]
    fn normalization_k2_and_k3() {
        let v = HomogeneousPotential::polynomial(2, poly(1, &[(&[2], Scalar::from_ratio(3, 2))])).unwrap();
        let data = verify_darboux(&v, &pt(&[1]), &Arith::exact()).unwrap();
        assert_eq!(data.gamma, Scalar::from_i64(3));
        let (w, n1) = normalize_darboux(&v, &data).unwrap();
        assert_eq!(n1.gamma, Scalar::one());
        assert_eq!(n1.d, pt(&[1]));
        let (_, n2) = normalize_darboux(&w, &n1).unwrap();
        assert_eq!(n1, n2);

        // V = (8/3) q³, V'(1) = 8, alpha = 1/8
        let v3 = HomogeneousPotential::polynomial(3, poly(1, &[(&[3], Scalar::from_ratio(8, 3))])).unwrap();
        let d3 = verify_darboux(&v3, &pt(&[1]), &Arith::exact()).unwrap();
        let (_, n3) = normalize_darboux(&v3, &d3).unwrap();
        assert_eq!(n3.d, vec![Scalar::from_ratio(1, 8)]);
        assert_eq!(n3.gamma, Scalar::one());
    }

    #[test]
    fn resonance_examples() {
        let r = classify_resonance(&[Frequency::integer(1), Frequency::integer(2)]);
        assert_eq!(r.z_linear_independent, Independence::False);
        assert_eq!(r.witness, Some(vec![BigInt::from(2), BigInt::from(-1)]));

        let sqrt2 = Frequency::from_lambda(&Scalar::from_i64(2));
        let r = classify_resonance(&[sqrt2.clone(), Frequency::integer(1)]);
        assert_eq!(r.tags, vec![FrequencyTag::Irrational, FrequencyTag::NonzeroRational]);
        assert_eq!(r.z_linear_independent, Independence::Undetermined);
        assert_eq!(r.clone().with_assertion(true).z_linear_independent, Independence::Asserted);

        let r = classify_resonance(&[Frequency::integer(0), Frequency::integer(3)]);
        assert_eq!(r.tags[0], FrequencyTag::Zero);
        assert_eq!(r.z_linear_independent, Independence::False);
        assert_eq!(r.with_assertion(true).z_linear_independent, Independence::False);

        let sqrt8 = Frequency::from_lambda(&Scalar::from_i64(8));
        let r = classify_resonance(&[sqrt2, sqrt8]);
        assert_eq!(r.witness, Some(vec![BigInt::from(2), BigInt::from(-1)]));
    }
}
