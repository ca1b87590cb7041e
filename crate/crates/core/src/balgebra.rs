//! The algebra `𝓑 = span{Iᵐ E_ω}` carrying every solution of the variational
//! chain for `k = −2`.
//!
//! Solutions are written `x = φ B` with `B ∈ 𝓑`. With `D = φ² d/dt` one has
//! `D I = 2`, `D E_ω = 2ω E_ω`, and `ẍ = −λ x/φ⁴ + b/φ³` becomes
//! `D²B + (λ − 1) B = b`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::darboux::DarbouxData;
use crate::error::{Error, Result};
use crate::numeric::Jet2;
use crate::poly::HomogeneousPotential;
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::vebuild::{build_ve_chain_in, VESystem};

type C = Complex64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Regime {
    ZeroEnergy,
    NonzeroEnergy(Scalar),
}

impl Regime {
    pub fn from_energy(e: Scalar) -> Regime {
        if e.is_zero() {
            Regime::ZeroEnergy
        } else {
            Regime::NonzeroEnergy(e)
        }
    }

    pub fn energy(&self) -> C {
        match self {
            Regime::ZeroEnergy => C::new(0.0, 0.0),
            Regime::NonzeroEnergy(e) => e.to_c64(),
        }
    }

    fn check_branch(&self, t: C) -> Result<()> {
        let bad = match self {
            Regime::ZeroEnergy => t.norm() < 1e-12,
            Regime::NonzeroEnergy(e) => {
                let e = e.to_c64();
                (e * t - 1.0).norm() < 1e-12 || (e * t + 1.0).norm() < 1e-12
            }
        };
        if bad {
            Err(Error::BranchPoint(format!("t = {t}")))
        } else {
            Ok(())
        }
    }

    /// `φ`: `√(2t)` or `√(e t² − 1/e)`.
    pub fn phi(&self, t: Jet2) -> Jet2 {
        match self {
            Regime::ZeroEnergy => t.scale(C::new(2.0, 0.0)).sqrt(),
            Regime::NonzeroEnergy(e) => {
                let e = e.to_c64();
                (t * t.scale(e) - Jet2::constant(e.inv())).sqrt()
            }
        }
    }

    /// The argument `g` with `I = log g`, `E_ω = g^ω`.
    pub fn log_argument(&self, t: Jet2) -> Jet2 {
        match self {
            Regime::ZeroEnergy => t,
            Regime::NonzeroEnergy(e) => {
                let et = t.scale(e.to_c64());
                let one = Jet2::constant(C::new(1.0, 0.0));
                (et - one) / (et + one)
            }
        }
    }

    /// Real sample points where every log and power argument is positive.
    pub fn sample_points(&self, count: usize) -> Vec<C> {
        let start = match self {
            Regime::ZeroEnergy => 0.5,
            Regime::NonzeroEnergy(e) => 1.0 / e.to_c64().re.abs() + 0.5,
        };
        (0..count).map(|i| C::new(start + 2.0 * i as f64 / count.max(2) as f64, 0.0)).collect()
    }
}

/// `ω` key ordered by [`Scalar::total_cmp`].
#[derive(Clone, Debug)]
struct OmegaKey(Scalar);

impl PartialEq for OmegaKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OmegaKey {}

impl PartialOrd for OmegaKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OmegaKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `Σ c_{m,ω} Iᵐ E_ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct BElement {
    regime: Regime,
    terms: BTreeMap<(u32, OmegaKey), Scalar>,
}

impl BElement {
    pub fn zero(regime: &Regime) -> Self {
        BElement { regime: regime.clone(), terms: BTreeMap::new() }
    }

    pub fn one(regime: &Regime) -> Self {
        BElement::monomial(regime, 0, Scalar::zero(), Scalar::one())
    }

    /// `c Iᵐ E_ω`.
    pub fn monomial(regime: &Regime, m: u32, omega: Scalar, c: Scalar) -> Self {
        let mut b = BElement::zero(regime);
        b.add_term(m, omega, c);
        b
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    pub fn add_term(&mut self, m: u32, omega: Scalar, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let mut key = (m, OmegaKey(omega));
        if !key.1 .0.is_exact() {
            // float ω within tolerance of an existing key joins it
            if let Some(k) = self.terms.keys().find(|(mm, w)| *mm == m && !w.0.is_exact() && w.0.approx_eq(&key.1 .0, DEFAULT_TOL)) {
                if k.1 != key.1 {
                    log::warn!("merging E_ω keys {} and {}", k.1 .0, key.1 .0);
                }
                key = k.clone();
            }
        }
        let v = self.terms.entry(key.clone()).or_insert_with(Scalar::zero);
        *v += &c;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Scalar, &Scalar)> {
        self.terms.iter().map(|((m, w), c)| (*m, &w.0, c))
    }

    pub fn coeff(&self, m: u32, omega: &Scalar) -> Scalar {
        self.terms.get(&(m, OmegaKey(omega.clone()))).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `I`.
    pub fn log_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(m, _)| *m).max()
    }

    fn same_regime(&self, other: &BElement) -> Result<()> {
        if self.regime != other.regime {
            return Err(Error::RegimeMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &BElement) -> Result<BElement> {
        self.same_regime(other)?;
        let mut b = self.clone();
        for ((m, w), c) in &other.terms {
            b.add_term(*m, w.0.clone(), c.clone());
        }
        Ok(b)
    }

    pub fn sub(&self, other: &BElement) -> Result<BElement> {
        self.add(&other.scale(&Scalar::from_i64(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> BElement {
        let mut b = BElement::zero(&self.regime);
        for ((m, w), c) in &self.terms {
            b.add_term(*m, w.0.clone(), c * s);
        }
        b
    }

    pub fn mul(&self, other: &BElement) -> Result<BElement> {
        b_mul(self, other)
    }

    pub fn pow(&self, e: u32) -> BElement {
        (0..e).fold(BElement::one(&self.regime), |acc, _| b_mul(&acc, self).expect("same regime"))
    }

    /// `D = φ² d/dt`: `D(Iᵐ E_ω) = 2(m Iᵐ⁻¹ + ω Iᵐ) E_ω`.
    pub fn derivative(&self) -> BElement {
        let mut b = BElement::zero(&self.regime);
        for ((m, w), c) in &self.terms {
            if *m > 0 {
                b.add_term(m - 1, w.0.clone(), c * &Scalar::from_i64(2 * *m as i64));
            }
            b.add_term(*m, w.0.clone(), c * &(&w.0 * &Scalar::from_i64(2)));
        }
        b
    }

    /// Value and `t`-derivatives through the closed forms of `I` and `E_ω`.
    pub fn eval_jet(&self, t: C) -> Result<Jet2> {
        self.regime.check_branch(t)?;
        let g = self.regime.log_argument(Jet2::variable(t));
        let i = g.ln();
        let mut acc = Jet2::constant(C::new(0.0, 0.0));
        for ((m, w), c) in &self.terms {
            let term = i.powi(*m as i32) * g.powc(w.0.to_c64());
            acc = acc + term.scale(c.to_c64());
        }
        Ok(acc)
    }
}

pub fn b_mul(a: &BElement, b: &BElement) -> Result<BElement> {
    a.same_regime(b)?;
    let mut out = BElement::zero(&a.regime);
    for ((m1, w1), c1) in &a.terms {
        for ((m2, w2), c2) in &b.terms {
            out.add_term(m1 + m2, &w1.0 + &w2.0, c1 * c2);
        }
    }
    Ok(out)
}

impl fmt::Display for BElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((m, w), c)| {
                let mut s = format!("({c})");
                if *m > 0 {
                    s.push_str(&format!("*I^{m}"));
                }
                if !w.0.is_zero() {
                    s.push_str(&format!("*E[{}]", w.0));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for BElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            coefficient: &'a Scalar,
            m: u32,
            omega: &'a Scalar,
        }
        let terms: Vec<Term> = self.terms.iter().map(|((m, w), c)| Term { coefficient: c, m: *m, omega: &w.0 }).collect();
        let mut st = s.serialize_struct("BElement", 2)?;
        st.serialize_field("regime", &self.regime)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// `Φ` with `D Φ = b`, i.e. `Φ = ∫ b/φ² dt`.
pub fn integrate_over_phi2(b: &BElement) -> BElement {
    let mut out = BElement::zero(&b.regime);
    for ((m, w), c) in &b.terms {
        out = out.add(&integrate_monomial(&b.regime, *m, &w.0).scale(c)).expect("same regime");
    }
    out
}

fn integrate_monomial(regime: &Regime, m: u32, omega: &Scalar) -> BElement {
    if omega.is_zero() {
        return BElement::monomial(regime, m + 1, Scalar::zero(), Scalar::from_ratio(1, 2 * (m as i64 + 1)));
    }
    // 2ω Φ⁽ᵐ⁾ = Iᵐ E_ω − 2m Φ⁽ᵐ⁻¹⁾
    let inv = (omega * &Scalar::from_i64(2)).inv().expect("nonzero ω");
    let mut phi = BElement::monomial(regime, 0, omega.clone(), inv.clone());
    for k in 1..=m {
        let next = BElement::monomial(regime, k, omega.clone(), Scalar::one())
            .sub(&phi.scale(&Scalar::from_i64(2 * k as i64)))
            .expect("same regime");
        phi = next.scale(&inv);
    }
    phi
}

/// `ω` with `λ = 1 − 4ω²`, principal root.
pub fn omega_of_lambda(lambda: &Scalar) -> Scalar {
    ((Scalar::one() - lambda) / Scalar::from_i64(4)).sqrt()
}

/// Basis of `D²B + (λ−1)B = 0`: `{1, I}` for `ω = 0`, else `{E_ω, E_{−ω}}`.
pub fn solve_homogeneous(lambda: &Scalar, regime: &Regime) -> [BElement; 2] {
    let w = omega_of_lambda(lambda);
    if w.is_zero() {
        [BElement::one(regime), BElement::monomial(regime, 1, Scalar::zero(), Scalar::one())]
    } else {
        [BElement::monomial(regime, 0, w.clone(), Scalar::one()), BElement::monomial(regime, 0, -w, Scalar::one())]
    }
}

/// Particular solution of `D²B + (λ−1)B = b` by variation of constants.
pub fn solve_forced(lambda: &Scalar, b: &BElement) -> BElement {
    if b.is_zero() {
        return b.clone();
    }
    let regime = &b.regime;
    let w = omega_of_lambda(lambda);
    if w.is_zero() {
        // B = (I Φ[b] − Φ[b I]) / 2
        let i = BElement::monomial(regime, 1, Scalar::zero(), Scalar::one());
        let first = b_mul(&i, &integrate_over_phi2(b)).expect("same regime");
        let second = integrate_over_phi2(&b_mul(b, &i).expect("same regime"));
        return first.sub(&second).expect("same regime").scale(&Scalar::from_ratio(1, 2));
    }
    // B = (E_ω Φ[b E_{−ω}] − E_{−ω} Φ[b E_ω]) / (4ω)
    let ep = BElement::monomial(regime, 0, w.clone(), Scalar::one());
    let em = BElement::monomial(regime, 0, -w.clone(), Scalar::one());
    let a = b_mul(&ep, &integrate_over_phi2(&b_mul(b, &em).expect("same regime"))).expect("same regime");
    let c = b_mul(&em, &integrate_over_phi2(&b_mul(b, &ep).expect("same regime"))).expect("same regime");
    let inv = (&w * &Scalar::from_i64(4)).inv().expect("nonzero ω");
    a.sub(&c).expect("same regime").scale(&inv)
}

/// `D²B + (λ−1)B − b`.
pub fn residual(lambda: &Scalar, sol: &BElement, b: &BElement) -> Result<BElement> {
    let lhs = sol.derivative().derivative().add(&sol.scale(&(lambda - &Scalar::one())))?;
    lhs.sub(b)
}

/// Chains `ẍ₀ = −λ x₀/φ⁴`, `ẍ_{i} = −λ x_i/φ⁴ + x_{i−1}/φ⁴`, one per
/// homogeneous seed; entry `i` is the cofactor of `x_i`.
pub fn solve_jordan_chain(lambda: &Scalar, chain_length: usize, regime: &Regime) -> Vec<Vec<BElement>> {
    solve_homogeneous(lambda, regime)
        .into_iter()
        .map(|seed| {
            let mut chain = vec![seed];
            while chain.len() < chain_length {
                let prev = chain.last().expect("nonempty");
                chain.push(solve_forced(lambda, prev));
            }
            chain
        })
        .collect()
}

/// One order of the assembled solution `x_p = φ B_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderSolution {
    pub order: u32,
    pub components: Vec<BElement>,
    pub forcing: Vec<BElement>,
    pub symbolic_residual_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainSolution {
    pub regime: Regime,
    pub p_max: u32,
    pub lambdas: Vec<Scalar>,
    pub superdiag: Vec<Scalar>,
    pub omegas: Vec<Scalar>,
    /// Order-one constants `(a_i, b_i)` multiplying the homogeneous basis.
    pub constants: Vec<[Scalar; 2]>,
    pub orders: Vec<OrderSolution>,
    #[serde(skip)]
    pub systems: Vec<VESystem>,
}

/// Fixed generic order-one constants.
pub fn generic_constants(n: usize) -> Vec<[Scalar; 2]> {
    (0..n).map(|i| [Scalar::from_i64(i as i64 + 2), Scalar::from_ratio(1, i as i64 + 3)]).collect()
}

fn forcing_for(system: &VESystem, solved: &[Vec<BElement>], regime: &Regime) -> Result<Vec<BElement>> {
    let n = system.n();
    let mut b = vec![BElement::zero(regime); n];
    for t in &system.forcing {
        let mut term = BElement::monomial(regime, 0, Scalar::zero(), t.coefficient.clone());
        for (v, e) in &t.monomial {
            let src = &solved[(v.order - 1) as usize][v.component];
            term = b_mul(&term, &src.pow(*e))?;
        }
        b[t.target] = b[t.target].add(&term)?;
    }
    Ok(b)
}

/// Solves `VE_1 … VE_{p_max}` for `k = −2` inside `φ 𝓑ⁿ`.
pub fn solve_ve_chain_km2(v: &HomogeneousPotential, data: &DarbouxData, p_max: u32, regime: &Regime) -> Result<ChainSolution> {
    if v.k() != -2 {
        return Err(Error::Unsupported(format!("k = {} (expected -2)", v.k())));
    }
    let chain = build_ve_chain_in(v, data, p_max, true)?;
    let n = chain.n();
    let frame = &chain.frame;
    let omegas: Vec<Scalar> = frame.lambdas.iter().map(omega_of_lambda).collect();
    let constants = generic_constants(n);
    let tol = data.arith.tol;
    let mut solved: Vec<Vec<BElement>> = Vec::new();
    let mut orders = Vec::new();
    for system in &chain.systems {
        let b = forcing_for(system, &solved, regime)?;
        let mut comps = vec![BElement::zero(regime); n];
        for i in (0..n).rev() {
            let coupling = if i + 1 < n { frame.superdiag[i].clone() } else { Scalar::zero() };
            let rhs = if coupling.is_zero() { b[i].clone() } else { b[i].sub(&comps[i + 1].scale(&coupling))? };
            let mut sol = solve_forced(&frame.lambdas[i], &rhs);
            if system.order == 1 {
                let [h0, h1] = solve_homogeneous(&frame.lambdas[i], regime);
                sol = sol.add(&h0.scale(&constants[i][0]))?.add(&h1.scale(&constants[i][1]))?;
            }
            comps[i] = sol;
        }
        let mut ok = true;
        for i in 0..n {
            let mut r = residual(&frame.lambdas[i], &comps[i], &b[i])?;
            if i + 1 < n && !frame.superdiag[i].is_zero() {
                r = r.add(&comps[i + 1].scale(&frame.superdiag[i]))?;
            }
            ok &= if r.terms().all(|(_, _, c)| c.is_exact()) { r.is_zero() } else { r.is_negligible(tol) };
        }
        orders.push(OrderSolution { order: system.order, components: comps.clone(), forcing: b, symbolic_residual_zero: ok });
        solved.push(comps);
    }
    Ok(ChainSolution {
        regime: regime.clone(),
        p_max,
        lambdas: frame.lambdas.clone(),
        superdiag: frame.superdiag.clone(),
        omegas,
        constants,
        orders,
        systems: chain.systems,
    })
}

impl ChainSolution {
    pub fn all_symbolic_residuals_zero(&self) -> bool {
        self.orders.iter().all(|o| o.symbolic_residual_zero)
    }

    /// Max over samples, orders and components of
    /// `|ẍ_i + φ⁻⁴(λ_i x_i + s_i x_{i+1}) − forcing_i|` with `x = φ B`
    /// differentiated through the closed forms of `φ`, `I`, `E_ω`.
    pub fn numeric_residual(&self, samples: &[C]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in samples {
            let phi = self.regime.phi(Jet2::variable(t));
            let mut x: Vec<Vec<Jet2>> = Vec::new();
            for o in &self.orders {
                x.push(o.components.iter().map(|b| b.eval_jet(t).map(|j| phi * j)).collect::<Result<_>>()?);
            }
            let ph = phi.v;
            for (oi, o) in self.orders.iter().enumerate() {
                let sys = &self.systems[oi];
                let n = o.components.len();
                let mut f = vec![C::new(0.0, 0.0); n];
                for term in &sys.forcing {
                    let mut val = term.coefficient.to_c64() * ph.powi(term.phi_power);
                    for (v, e) in &term.monomial {
                        val *= x[(v.order - 1) as usize][v.component].v.powi(*e as i32);
                    }
                    f[term.target] += val;
                }
                for i in 0..n {
                    let xi = x[oi][i];
                    let mut lin = self.lambdas[i].to_c64() * xi.v;
                    if i + 1 < n {
                        lin += self.superdiag[i].to_c64() * x[oi][i + 1].v;
                    }
                    let r = xi.d2 + lin / ph.powi(4) - f[i];
                    worst = worst.max(r.norm() / (1.0 + xi.d2.norm()));
                }
            }
        }
        Ok(worst)
    }
}

/// Value of `b` at `t` on the principal branch.
pub fn eval_belement(b: &BElement, t: C) -> Result<Scalar> {
    Ok(Scalar::Float(b.eval_jet(t)?.v))
}
