//! Integrability verdicts for `k = 2` along `φ = sin t`.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::darboux::{DarbouxData, Frequency, FrequencyTag, ResonanceClass};
use crate::error::{Error, Result};
use crate::poly::{factorial, HomogeneousPotential, MultiIndex};
use crate::scalar::{Arith, Scalar};
use crate::surd::SurdSum;
use crate::trig::TrigIntegralSpec;
use crate::vebuild::ForceJet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Status {
    VirtuallyAbelian,
    NotVirtuallyAbelian,
    Inconclusive,
}

impl Status {
    /// NotVirtuallyAbelian > Inconclusive > VirtuallyAbelian.
    fn rank(self) -> u8 {
        match self {
            Status::VirtuallyAbelian => 0,
            Status::Inconclusive => 1,
            Status::NotVirtuallyAbelian => 2,
        }
    }
}

/// Subsystem indices, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Subsystem {
    Ve2Alpha { alpha: usize, gamma: usize },
    Ex2 { alpha: usize, beta: usize, gamma: usize },
    Xi { j: usize, alpha: MultiIndex },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub subsystem: Option<Subsystem>,
    pub coefficient: Scalar,
    pub frequencies: Vec<Frequency>,
    pub tags: Vec<FrequencyTag>,
    /// Row of the case table (zero pattern of the frequencies).
    pub case: Option<u8>,
    pub integral: Option<TrigIntegralSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub order_reached: u32,
}

impl Verdict {
    fn abelian(order: u32) -> Self {
        Verdict { status: Status::VirtuallyAbelian, witness: None, order_reached: order }
    }
}

fn tags_of(omegas: &[&Frequency]) -> Vec<FrequencyTag> {
    omegas.iter().map(|w| w.tag()).collect()
}

fn is_zero_tag(t: FrequencyTag) -> Option<bool> {
    match t {
        FrequencyTag::Zero => Some(true),
        FrequencyTag::Undetermined => None,
        _ => Some(false),
    }
}

fn ve2_case(tags: &[FrequencyTag]) -> Option<u8> {
    match (is_zero_tag(tags[0])?, is_zero_tag(tags[1])?) {
        (true, true) => Some(1),
        (true, false) => Some(2),
        (false, true) => Some(3),
        (false, false) => Some(4),
    }
}

fn ex2_case(tags: &[FrequencyTag]) -> Option<u8> {
    let za = is_zero_tag(tags[0])?;
    let zb = is_zero_tag(tags[1])?;
    let zg = is_zero_tag(tags[2])?;
    Some(match (za as u8 + zb as u8, zg) {
        (2, true) => 1,
        (2, false) => 2,
        (1, true) => 3,
        (1, false) => 4,
        (0, true) => 5,
        _ => 6,
    })
}

/// Shared decision from tags: obstruction iff `θ ≠ 0` and some frequency is
/// certified zero or irrational.
fn decide_from_tags(theta: &Scalar, omegas: &[&Frequency], case: Option<u8>, arith: &Arith) -> Verdict {
    if arith.is_zero(theta) {
        return Verdict::abelian(2);
    }
    let tags = tags_of(omegas);
    let witness = |integral| Witness {
        subsystem: None,
        coefficient: theta.clone(),
        frequencies: omegas.iter().map(|w| (*w).clone()).collect(),
        tags: tags.clone(),
        case,
        integral,
    };
    if tags.iter().any(|t| matches!(t, FrequencyTag::Zero | FrequencyTag::Irrational)) {
        let integral = integrand_route(omegas, omegas.len() == 2).obstruction;
        return Verdict { status: Status::NotVirtuallyAbelian, witness: Some(witness(integral)), order_reached: 2 };
    }
    if tags.iter().any(|t| *t == FrequencyTag::Undetermined) {
        return Verdict { status: Status::Inconclusive, witness: Some(witness(None)), order_reached: 2 };
    }
    Verdict::abelian(2)
}

/// `ẍ_α = −ω_α² x_α`, `z̈_γ = −ω_γ² z_γ + θ x_α²/sin t`.
pub fn check_ve2_alpha(theta: &Scalar, omega_alpha: &Frequency, omega_gamma: &Frequency, arith: &Arith) -> Verdict {
    let om = [omega_alpha, omega_gamma];
    decide_from_tags(theta, &om, ve2_case(&tags_of(&om)), arith)
}

/// `z̈_γ = −ω_γ² z_γ + 2θ x_α x_β/sin t`.
pub fn check_ex2(theta: &Scalar, omega_alpha: &Frequency, omega_beta: &Frequency, omega_gamma: &Frequency, arith: &Arith) -> Verdict {
    let om = [omega_alpha, omega_beta, omega_gamma];
    decide_from_tags(theta, &om, ex2_case(&tags_of(&om)), arith)
}

/// Rationality of `μ = Σ c_i ω_i`.
#[derive(Clone, Debug, PartialEq)]
enum MuClass {
    Rational(SurdSum),
    Irrational(Frequency),
    Unknown,
}

fn classify_mu(coeffs: &[i64], omegas: &[&Frequency]) -> MuClass {
    let mut exact = SurdSum::zero();
    let mut loose: Vec<(i64, Complex64)> = Vec::new();
    let mut approx = false;
    for (c, w) in coeffs.iter().zip(omegas) {
        if *c == 0 {
            continue;
        }
        match w {
            Frequency::Surd(s) => exact = exact.add(&s.scale_int(*c)),
            Frequency::NonRational(z) => loose.push((*c, *z)),
            Frequency::Approx(_) => approx = true,
        }
    }
    let value = coeffs.iter().zip(omegas).fold(Complex64::new(0.0, 0.0), |acc, (c, w)| acc + w.to_c64() * *c as f64);
    match (loose.len(), approx) {
        (_, true) => MuClass::Unknown,
        (0, false) => match exact.as_rational() {
            Some(_) => MuClass::Rational(exact),
            None => MuClass::Irrational(Frequency::Surd(exact)),
        },
        (1, false) if exact.as_rational().is_some() => MuClass::Irrational(Frequency::NonRational(value)),
        _ => MuClass::Unknown,
    }
}

/// Outcome of enumerating the second level integrands `t^d e^{iμt}/sin t`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandRoute {
    pub integrands: usize,
    pub obstruction: Option<TrigIntegralSpec>,
    pub undecided: bool,
}

/// Enumerates integrands from the solutions of the homogeneous parts
/// (`{1, t}` for a zero frequency, `e^{±iωt}` otherwise) and flags an
/// obstruction when one is non-meromorphic while `t` is in the first level
/// field or its exponent is irrational. `square` selects `x_α²` (two
/// frequencies) over `x_α x_β` (three).
pub fn integrand_route(omegas: &[&Frequency], square: bool) -> IntegrandRoute {
    let m = omegas.len();
    let zero: Vec<Option<bool>> = omegas.iter().map(|w| is_zero_tag(w.tag())).collect();
    // (t-degree, coefficient vector)
    let sols = |i: usize| -> Vec<(u32, Vec<i64>)> {
        let unit = |s: i64| {
            let mut c = vec![0; m];
            c[i] = s;
            c
        };
        match zero[i] {
            Some(true) => vec![(0, vec![0; m]), (1, vec![0; m])],
            _ => vec![(0, unit(1)), (0, unit(-1))],
        }
    };
    let mul = |a: &(u32, Vec<i64>), b: &(u32, Vec<i64>)| (a.0 + b.0, a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect::<Vec<_>>());
    let first = sols(0);
    let second = if square { sols(0) } else { sols(1) };
    let gamma = m - 1;
    // variation of constants multiplies by the inverse solutions of the γ equation
    let voc: Vec<(u32, Vec<i64>)> = sols(gamma).into_iter().map(|(d, c)| (d, c.into_iter().map(|x| -x).collect())).collect();
    let t_in_l1 = zero.iter().any(|z| *z == Some(true));
    let mut out = IntegrandRoute { integrands: 0, obstruction: None, undecided: zero.iter().any(Option::is_none) };
    for a in &first {
        for b in &second {
            for g in &voc {
                let (d, c) = mul(&mul(a, b), g);
                out.integrands += 1;
                let mu = classify_mu(&c, omegas);
                let spec_omega = match &mu {
                    MuClass::Rational(s) => Some(Frequency::Surd(s.clone())),
                    MuClass::Irrational(f) => Some(f.clone()),
                    MuClass::Unknown => None,
                };
                let Some(w) = spec_omega else {
                    out.undecided = true;
                    continue;
                };
                let spec = if d == 0 { TrigIntegralSpec::T { n: 1, omega: w } } else { TrigIntegralSpec::M { d, omega: w } }.canonical();
                let non_mero = !spec.classify().meromorphic;
                let transcendental = t_in_l1 || matches!(mu, MuClass::Irrational(_));
                if non_mero && transcendental && out.obstruction.is_none() {
                    out.obstruction = Some(spec);
                }
            }
        }
    }
    out
}

/// Verdict from the integrand route alone (cross-check of the case tables).
pub fn route_status(theta: &Scalar, omegas: &[&Frequency], square: bool, arith: &Arith) -> Status {
    if arith.is_zero(theta) {
        return Status::VirtuallyAbelian;
    }
    let r = integrand_route(omegas, square);
    if r.obstruction.is_some() {
        Status::NotVirtuallyAbelian
    } else if r.undecided {
        Status::Inconclusive
    } else {
        Status::VirtuallyAbelian
    }
}

fn require_k2(v: &HomogeneousPotential, data: &DarbouxData) -> Result<()> {
    if v.k() != 2 || data.k != 2 {
        return Err(Error::Unsupported(format!("k = {} (expected 2)", v.k())));
    }
    if !data.gamma.is_one() && !data.gamma.approx_eq(&Scalar::one(), data.arith.tol) {
        return Err(Error::Unsupported("Darboux point is not normalized (γ ≠ 1)".into()));
    }
    Ok(())
}

/// Aggregates the `VE₂,α^γ` and `EX₂,(α,β)^γ` subsystem verdicts over
/// `(γ, α, β)` in lexicographic order.
pub fn verdict_ve2(v: &HomogeneousPotential, data: &DarbouxData) -> Result<Verdict> {
    require_k2(v, data)?;
    let frame = data.frame(false)?;
    let jet = ForceJet::new(v, &data.d, &frame, 2)?;
    let n = frame.n();
    let arith = if frame.exact { data.arith } else { Arith::float(data.arith.tol) };
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|g| (0..n).flat_map(move |a| (a..n).map(move |b| (g, a, b)))).collect();
    let results: Vec<Verdict> = triples
        .par_iter()
        .map(|&(g, a, b)| {
            let w = &frame.frequencies;
            let theta = jet.derivative(g, &[a, b]);
            let (mut verdict, sub) = if a == b {
                (check_ve2_alpha(&theta, &w[a], &w[g], &arith), Subsystem::Ve2Alpha { alpha: a + 1, gamma: g + 1 })
            } else {
                (check_ex2(&theta, &w[a], &w[b], &w[g], &arith), Subsystem::Ex2 { alpha: a + 1, beta: b + 1, gamma: g + 1 })
            };
            if let Some(wit) = verdict.witness.as_mut() {
                wit.subsystem = Some(sub);
            }
            verdict
        })
        .collect();
    Ok(aggregate(results, 2))
}

/// First verdict of the highest status rank.
pub fn aggregate(results: Vec<Verdict>, order: u32) -> Verdict {
    let mut best = Verdict::abelian(order);
    for r in results {
        if r.status.rank() > best.status.rank() {
            best = Verdict { order_reached: order, ..r };
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiEntry {
    pub j: usize,
    pub alpha: MultiIndex,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiTable {
    pub order: u32,
    pub size: usize,
    pub nonzero: Vec<XiEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub p_max: u32,
    pub xi_tables: Vec<XiTable>,
    /// `∂^m_n V(d)` for `m = 1 ..= p_max + 1` along the Darboux direction.
    pub euler_chain: Vec<Scalar>,
    pub euler_chain_consistent: bool,
    /// All Taylor coefficients of `V(d + P y)` of orders `3 ..= p_max + 1` vanish.
    pub taylor_vanishing: bool,
}

impl Certificate {
    pub fn all_xi_zero(&self) -> bool {
        self.xi_tables.iter().all(|t| t.nonzero.is_empty())
    }
}

/// Order-by-order `ξ` vanishing test under Z-independence of the
/// frequencies with `ω_n = 1`.
pub fn inductive_analysis(
    v: &HomogeneousPotential,
    data: &DarbouxData,
    p_max: u32,
    resonance: &ResonanceClass,
) -> Result<(Verdict, Certificate)> {
    require_k2(v, data)?;
    if !resonance.independence_established() {
        return Err(Error::NonResonanceNotEstablished);
    }
    if p_max < 2 {
        return Err(Error::InvalidOrder(p_max as i64));
    }
    let frame = data.frame(false)?;
    let n = frame.n();
    let last = n - 1;
    if frame.darboux_index != Some(last) {
        return Err(Error::Unsupported("Darboux direction is not an eigenvector column".into()));
    }
    let arith = if frame.exact { data.arith } else { Arith::float(data.arith.tol) };
    let jet = ForceJet::new(v, &data.d, &frame, p_max)?;
    let taylor = v.function().taylor(&data.d, &frame.p, p_max + 1)?;

    let euler_chain: Vec<Scalar> = (1..=p_max + 1)
        .map(|m| {
            let a = MultiIndex::new((0..n).map(|i| if i == last { m } else { 0 }).collect());
            taylor.coeff(&a) * Scalar::from_rational(factorial(m).into())
        })
        .collect();
    let euler_chain_consistent = (1..=p_max as usize).all(|p| {
        let lhs = &euler_chain[p];
        let rhs = &Scalar::from_i64(2 - p as i64) * &euler_chain[p - 1];
        (lhs - &rhs).is_negligible(if arith.mode == crate::scalar::Mode::Exact { 0.0 } else { arith.tol })
    });

    let mut cert = Certificate { p_max, xi_tables: Vec::new(), euler_chain, euler_chain_consistent, taylor_vanishing: false };
    for p in 2..=p_max {
        let table = jet.xi_table(p);
        let size = table.len();
        let nonzero: Vec<XiEntry> = table
            .into_iter()
            .filter(|(_, _, x)| !arith.is_zero(x))
            .map(|(j, alpha, value)| XiEntry { j: j + 1, alpha, value })
            .collect();
        let pure = |e: &XiEntry| e.j == n && e.alpha.exponents()[last] == p;
        let offending = nonzero.iter().find(|e| !pure(e)).cloned();
        let euler_entry = nonzero.iter().find(|e| pure(e)).cloned();
        cert.xi_tables.push(XiTable { order: p, size, nonzero });
        if let Some(e) = offending {
            let mut coeffs: Vec<i64> = e.alpha.exponents().iter().map(|&a| a as i64).collect();
            coeffs[e.j - 1] += 1;
            let om: Vec<&Frequency> = frame.frequencies.iter().collect();
            let integral = match classify_mu(&coeffs, &om) {
                MuClass::Rational(s) => Some(TrigIntegralSpec::T { n: p - 1, omega: Frequency::Surd(s) }),
                MuClass::Irrational(f) => Some(TrigIntegralSpec::T { n: p - 1, omega: f }),
                MuClass::Unknown => None,
            };
            let witness = Witness {
                subsystem: Some(Subsystem::Xi { j: e.j, alpha: e.alpha.clone() }),
                coefficient: e.value.clone(),
                frequencies: frame.frequencies.clone(),
                tags: frame.frequencies.iter().map(Frequency::tag).collect(),
                case: None,
                integral,
            };
            return Ok((Verdict { status: Status::NotVirtuallyAbelian, witness: Some(witness), order_reached: p }, cert));
        }
        if euler_entry.is_some() {
            // contradicts the Euler chain for degree-2 potentials
            return Err(Error::DegreeMismatch(format!("ξ^n_(0..0,{p}) ≠ 0")));
        }
    }
    cert.taylor_vanishing = taylor.coeffs().all(|(a, c)| a.order() < 3 || arith.is_zero(c));
    Ok((Verdict::abelian(p_max), cert))
}

/// Index of `(α·ω + ω_j)` as a float, for reports.
pub fn forcing_exponent(alpha: &MultiIndex, j: usize, omegas: &[Frequency]) -> Complex64 {
    alpha.exponents().iter().zip(omegas).fold(omegas[j].to_c64(), |acc, (a, w)| acc + w.to_c64() * a.to_f64().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{classify_resonance, normalize_darboux, verify_darboux};
    use crate::poly::Polynomial;
    use crate::scalar::Arith;

    fn sqrt2() -> Frequency {
        Frequency::from_lambda(&Scalar::from_i64(2))
    }

    fn cubic(l1: i64, c: i64) -> HomogeneousPotential {
        let num = Polynomial::from_terms(
            2,
            vec![
                (vec![2, 1], Scalar::from_ratio(l1, 2)),
                (vec![0, 3], Scalar::from_ratio(1, 2)),
                (vec![3, 0], Scalar::from_i64(c)),
            ],
        )
        .unwrap();
        HomogeneousPotential::new(2, num, Polynomial::var(2, 1)).unwrap()
    }

    fn oscillator() -> HomogeneousPotential {
        let num = Polynomial::from_terms(
            3,
            vec![
                (vec![2, 0, 0], Scalar::from_ratio(1, 2)),
                (vec![0, 2, 0], Scalar::from_i64(1)),
                (vec![0, 0, 2], Scalar::from_ratio(3, 2)),
            ],
        )
        .unwrap();
        HomogeneousPotential::polynomial(2, num).unwrap()
    }

    fn prepared(v: &HomogeneousPotential, d: Vec<Scalar>) -> (HomogeneousPotential, DarbouxData) {
        let data = verify_darboux(v, &d, &Arith::exact()).unwrap();
        normalize_darboux(v, &data).unwrap()
    }

    #[test]
    fn subsystem_examples() {
        let a = Arith::exact();
        let one = Scalar::one();
        assert_eq!(check_ve2_alpha(&Scalar::zero(), &sqrt2(), &Frequency::integer(0), &a).status, Status::VirtuallyAbelian);
        let v = check_ve2_alpha(&Scalar::from_i64(-6), &sqrt2(), &sqrt2(), &a);
        assert_eq!(v.status, Status::NotVirtuallyAbelian);
        assert_eq!(v.witness.unwrap().case, Some(4));
        let v = check_ve2_alpha(&one, &Frequency::integer(0), &Frequency::integer(0), &a);
        assert_eq!((v.status, v.witness.unwrap().case), (Status::NotVirtuallyAbelian, Some(1)));
        let f = |x| Frequency::integer(x);
        assert_eq!(check_ex2(&Scalar::zero(), &f(0), &f(0), &f(0), &a).status, Status::VirtuallyAbelian);
        assert_eq!(check_ex2(&one, &f(1), &f(2), &f(3), &a).status, Status::VirtuallyAbelian);
        assert_eq!(check_ex2(&one, &f(1), &f(0), &f(1), &a).status, Status::NotVirtuallyAbelian);
        let approx = Frequency::Approx(Complex64::new(1.0, 0.0));
        assert_eq!(check_ex2(&one, &f(1), &approx, &f(1), &a).status, Status::Inconclusive);
    }

    #[test]
    fn case_tables_match_integrand_route() {
        let a = Arith::exact();
        let tags = [Frequency::integer(0), Frequency::integer(1), Frequency::integer(2), sqrt2()];
        for theta in [Scalar::zero(), Scalar::one()] {
            for wa in &tags {
                for wg in &tags {
                    let table = check_ve2_alpha(&theta, wa, wg, &a).status;
                    assert_eq!(table, route_status(&theta, &[wa, wg], true, &a));
                    for wb in &tags {
                        let table = check_ex2(&theta, wa, wb, wg, &a).status;
                        assert_eq!(table, route_status(&theta, &[wa, wb, wg], false, &a));
                    }
                }
            }
        }
    }

    #[test]
    fn cubic_potential_is_obstructed() {
        let (v, data) = prepared(&cubic(2, 1), vec![Scalar::zero(), Scalar::one()]);
        let verdict = verdict_ve2(&v, &data).unwrap();
        assert_eq!(verdict.status, Status::NotVirtuallyAbelian);
        let w = verdict.witness.unwrap();
        assert_eq!(w.subsystem, Some(Subsystem::Ve2Alpha { alpha: 1, gamma: 1 }));
        assert_eq!(w.coefficient, Scalar::from_i64(-6));
        assert_eq!(w.tags[0], FrequencyTag::Irrational);

        let (v, data) = prepared(&cubic(4, 1), vec![Scalar::zero(), Scalar::one()]);
        assert_eq!(verdict_ve2(&v, &data).unwrap().status, Status::VirtuallyAbelian);
    }

    #[test]
    fn oscillator_certificate() {
        let (v, data) = prepared(&oscillator(), vec![Scalar::one(), Scalar::zero(), Scalar::zero()]);
        assert_eq!(verdict_ve2(&v, &data).unwrap().status, Status::VirtuallyAbelian);
        let res = classify_resonance(&data.frame(false).unwrap().frequencies).with_assertion(true);
        let (verdict, cert) = inductive_analysis(&v, &data, 5, &res).unwrap();
        assert_eq!(verdict.status, Status::VirtuallyAbelian);
        assert!(cert.all_xi_zero() && cert.euler_chain_consistent && cert.taylor_vanishing);
        assert_eq!(cert.xi_tables.len(), 4);
        let unasserted = classify_resonance(&data.frame(false).unwrap().frequencies);
        assert!(matches!(inductive_analysis(&v, &data, 5, &unasserted), Err(Error::NonResonanceNotEstablished)));
    }

    #[test]
    fn cubic_taylor_term_fails_first_step() {
        let (v, data) = prepared(&cubic(2, 1), vec![Scalar::zero(), Scalar::one()]);
        let res = classify_resonance(&data.frame(false).unwrap().frequencies).with_assertion(true);
        let (verdict, cert) = inductive_analysis(&v, &data, 4, &res).unwrap();
        assert_eq!((verdict.status, verdict.order_reached), (Status::NotVirtuallyAbelian, 2));
        assert!(cert.euler_chain_consistent);
    }
}
