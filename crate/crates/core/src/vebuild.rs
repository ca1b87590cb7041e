//! The chain of variational equations along `q₀ = φ(t) d`.
//!
//! With `q = q₀ + Σ ε^m q_m / m!`, the order-`p` equation in frame
//! coordinates reads
//!
//! ```text
//! ẍ_p = −φ^{k−2} J x_p + Σ_{m₁+⋯+m_s = p, s ≥ 2} c(m) φ^{k−1−s} D^s F̃(d̃)(x_{m₁}, …, x_{m_s})
//! ```
//!
//! where `c(m) = p! / (∏ m_i! ∏ mult!)` over the multiset of orders.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::darboux::{DarbouxData, Frame};
use crate::error::{Error, Result};
use crate::poly::{factorial, DerivativeTensor, ForceField, HomogeneousPotential, MultiIndex, Series};
use crate::scalar::{Arith, Scalar};

/// Component `component` of the order-`order` solution `x_order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceVar {
    pub order: u32,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForcingTerm {
    pub target: usize,
    pub coefficient: Scalar,
    pub phi_power: i32,
    pub monomial: BTreeMap<SourceVar, u32>,
}

impl ForcingTerm {
    pub fn degree(&self) -> u32 {
        self.monomial.values().sum()
    }

    fn key(&self) -> (usize, i32, Vec<(SourceVar, u32)>) {
        (self.target, self.phi_power, self.monomial.iter().map(|(a, b)| (*a, *b)).collect())
    }
}

/// Serialized with 1-based components; the monomial as `[order, component, exponent]` rows.
impl Serialize for ForcingTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mono: Vec<[u64; 3]> =
            self.monomial.iter().map(|(v, e)| [v.order as u64, v.component as u64 + 1, *e as u64]).collect();
        let mut m = s.serialize_map(Some(4))?;
        m.serialize_entry("coefficient", &self.coefficient)?;
        m.serialize_entry("monomial", &mono)?;
        m.serialize_entry("phi_power", &self.phi_power)?;
        m.serialize_entry("target", &(self.target + 1))?;
        m.end()
    }
}

impl fmt::Display for ForcingTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mono: Vec<String> = self
            .monomial
            .iter()
            .map(|(v, e)| {
                let base = format!("x{}[{}]", v.order, v.component + 1);
                if *e == 1 {
                    base
                } else {
                    format!("{base}^{e}")
                }
            })
            .collect();
        write!(f, "eq {}: ({}) phi^{} {}", self.target + 1, self.coefficient, self.phi_power, mono.join(" "))
    }
}

/// One order of the chain in frame coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VESystem {
    pub order: u32,
    pub k: i32,
    pub lambdas: Vec<Scalar>,
    /// `J_{i,i+1}` of the linear part; zero for a diagonal frame.
    pub superdiag: Vec<Scalar>,
    /// Components of `x_order` this system governs.
    pub targets: Vec<usize>,
    pub forcing: Vec<ForcingTerm>,
}

impl VESystem {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// True when every forcing term is built from order-1 sources only.
    pub fn is_simple_form(&self) -> bool {
        self.forcing.iter().all(|t| t.monomial.keys().all(|v| v.order == 1) && t.degree() == self.order)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.forcing.is_empty()
    }

    pub fn same_linear_part(&self, other: &VESystem) -> bool {
        self.order == other.order
            && self.k == other.k
            && self.lambdas == other.lambdas
            && self.superdiag == other.superdiag
            && self.targets == other.targets
    }

    /// Drops every term that involves a source of the given order.
    pub fn without_order(&self, order: u32) -> VESystem {
        let mut s = self.clone();
        s.forcing.retain(|t| t.monomial.keys().all(|v| v.order != order));
        s
    }

    fn restrict(&self, targets: Vec<usize>, keep: impl Fn(&ForcingTerm) -> bool) -> VESystem {
        let forcing = self.forcing.iter().filter(|t| targets.contains(&t.target) && keep(t)).cloned().collect();
        VESystem { targets, forcing, ..self.clone() }
    }
}

/// Merges like terms and sorts; zero coefficients are dropped.
pub fn canonicalize(terms: Vec<ForcingTerm>, arith: &Arith) -> Vec<ForcingTerm> {
    let mut map: BTreeMap<(usize, i32, Vec<(SourceVar, u32)>), ForcingTerm> = BTreeMap::new();
    for t in terms {
        match map.get_mut(&t.key()) {
            Some(e) => e.coefficient += &t.coefficient,
            None => {
                map.insert(t.key(), t);
            }
        }
    }
    map.into_values().filter(|t| !arith.is_zero(&t.coefficient)).collect()
}

/// Taylor coefficients of the frame force `F̃(y) = P⁻¹ F(d + P y)` at `y = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceJet {
    pub k: i32,
    pub order: u32,
    pub components: Vec<Series>,
}

impl ForceJet {
    /// Builds the jet through the potential: `F̃ = −(PᵀP)⁻¹ ∇_y V(d + P y)`.
    pub fn new(v: &HomogeneousPotential, d: &[Scalar], frame: &Frame, order: u32) -> Result<ForceJet> {
        let vt = v.function().taylor(d, &frame.p, order + 1)?;
        let n = v.n();
        let grads: Vec<Series> = (0..n).map(|j| vt.diff(j)).collect();
        let components = (0..n)
            .map(|j| {
                let mut acc = Series::zero(n, order);
                for (l, g) in grads.iter().enumerate() {
                    let c = frame.metric_inv.get(j, l);
                    if !c.is_zero() {
                        acc = acc.add(&g.scale(&-c));
                    }
                }
                acc
            })
            .collect();
        Ok(ForceJet { k: v.k(), order, components })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// `ξ^j_α = ∂^α F̃_j / α!`.
    pub fn xi(&self, j: usize, alpha: &MultiIndex) -> Scalar {
        self.components[j].coeff(alpha)
    }

    /// `∂_{i₁} ⋯ ∂_{i_s} F̃_j(d̃)`.
    pub fn derivative(&self, j: usize, idx: &[usize]) -> Scalar {
        let alpha = MultiIndex::from_indices(self.n(), idx);
        self.components[j].derivative_at_origin(&alpha)
    }

    pub fn tensor(&self, s: u32) -> DerivativeTensor {
        let idx = MultiIndex::all_of_order(self.n(), s);
        DerivativeTensor {
            order: s,
            entries: self
                .components
                .iter()
                .map(|c| idx.iter().map(|a| (a.clone(), c.derivative_at_origin(a))).collect())
                .collect(),
        }
    }

    /// `ξ` table of order `p`: `(j, α) ↦ ξ^j_α` for `|α| = p`.
    pub fn xi_table(&self, p: u32) -> Vec<(usize, MultiIndex, Scalar)> {
        let idx = MultiIndex::all_of_order(self.n(), p);
        (0..self.n()).flat_map(|j| idx.iter().map(move |a| (j, a.clone(), self.xi(j, a)))).collect()
    }
}

/// Symmetric coupling tensor `T^i_{a b …}` keyed by `(i, α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    pub order: u32,
    pub n: usize,
    pub entries: BTreeMap<(usize, MultiIndex), Scalar>,
}

impl CouplingTensor {
    fn from_derivatives(t: &DerivativeTensor) -> Self {
        let n = t.n();
        let entries = t
            .entries
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |(a, v)| ((i, a.clone()), v.clone())))
            .collect();
        CouplingTensor { order: t.order, n, entries }
    }

    /// Entry for an index tuple in any order.
    pub fn get(&self, i: usize, idx: &[usize]) -> Scalar {
        self.entries.get(&(i, MultiIndex::from_indices(self.n, idx))).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.entries.values().all(|v| v.is_negligible(tol))
    }

    /// Nonzero entries as `(i, α, value)`, graded-lex within each component.
    pub fn nonzero(&self, tol: f64) -> Vec<(usize, MultiIndex, Scalar)> {
        self.entries
            .iter()
            .filter(|(_, v)| !v.is_negligible(tol))
            .map(|((i, a), v)| (*i, a.clone(), v.clone()))
            .collect()
    }
}

pub type ThetaTensor = CouplingTensor;
pub type XiTensor = CouplingTensor;

/// `θ^i_{α,β} = D_{α,β} F_i(d)` in the coordinates of `f`.
pub fn coupling_theta(f: &ForceField, d: &[Scalar]) -> Result<ThetaTensor> {
    Ok(CouplingTensor::from_derivatives(&crate::poly::derivative_tensor(f, d, 2)?))
}

/// `ξ^i_{α,β,γ} = D_{α,β,γ} F_i(d)` in the coordinates of `f`.
pub fn coupling_xi(f: &ForceField, d: &[Scalar]) -> Result<XiTensor> {
    Ok(CouplingTensor::from_derivatives(&crate::poly::derivative_tensor(f, d, 3)?))
}

impl ForceJet {
    pub fn theta(&self) -> ThetaTensor {
        CouplingTensor::from_derivatives(&self.tensor(2))
    }

    pub fn xi_tensor(&self) -> XiTensor {
        CouplingTensor::from_derivatives(&self.tensor(3))
    }
}

/// The assembled chain `VE_1 … VE_{p_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VEChain {
    pub frame: Frame,
    pub jet: ForceJet,
    pub systems: Vec<VESystem>,
}

impl VEChain {
    pub fn system(&self, p: u32) -> Option<&VESystem> {
        self.systems.get((p as usize).checked_sub(1)?)
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }
}

/// Integer partitions of `p` into at least two parts, parts non-increasing.
pub fn partitions(p: u32) -> Vec<Vec<u32>> {
    fn rec(rest: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for m in (1..=rest.min(max)).rev() {
            cur.push(m);
            rec(rest - m, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, p, &mut Vec::new(), &mut out);
    out
}

/// `p! / (∏ m_i! ∏ mult!)` for a partition.
pub fn partition_coefficient(p: u32, parts: &[u32]) -> BigRational {
    let mut den = num_bigint::BigInt::from(1);
    for &m in parts {
        den *= factorial(m);
    }
    let mut i = 0;
    while i < parts.len() {
        let j = parts[i..].iter().take_while(|&&x| x == parts[i]).count();
        den *= factorial(j as u32);
        i += j;
    }
    BigRational::new(factorial(p), den)
}

fn order_p_forcing(jet: &ForceJet, p: u32, arith: &Arith) -> Vec<ForcingTerm> {
    let n = jet.n();
    let mut terms = Vec::new();
    for parts in partitions(p) {
        let s = parts.len();
        let c = Scalar::from_rational(partition_coefficient(p, &parts));
        let phi_power = jet.k - 1 - s as i32;
        let mut idx = vec![0usize; s];
        'tuples: loop {
            let alpha = MultiIndex::from_indices(n, &idx);
            for j in 0..n {
                let t = jet.components[j].derivative_at_origin(&alpha);
                if arith.is_zero(&t) {
                    continue;
                }
                let mut monomial = BTreeMap::new();
                for (r, &i) in idx.iter().enumerate() {
                    *monomial.entry(SourceVar { order: parts[r], component: i }).or_insert(0) += 1;
                }
                terms.push(ForcingTerm { target: j, coefficient: &c * &t, phi_power, monomial });
            }
            let mut r = s;
            loop {
                if r == 0 {
                    break 'tuples;
                }
                r -= 1;
                idx[r] += 1;
                if idx[r] < n {
                    break;
                }
                idx[r] = 0;
            }
        }
    }
    canonicalize(terms, arith)
}

/// Builds `VE_1 … VE_{p_max}` in the Hessian frame (`d` last when diagonal).
pub fn build_ve_chain(v: &HomogeneousPotential, data: &DarbouxData, p_max: u32) -> Result<VEChain> {
    build_ve_chain_in(v, data, p_max, false)
}

/// As [`build_ve_chain`], accepting a Jordan frame when `allow_jordan` is set.
pub fn build_ve_chain_in(v: &HomogeneousPotential, data: &DarbouxData, p_max: u32, allow_jordan: bool) -> Result<VEChain> {
    if p_max == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let frame = data.frame(allow_jordan)?;
    let arith = if frame.exact { data.arith } else { Arith::float(data.arith.tol) };
    let v = v.lift(&arith);
    let jet = ForceJet::new(&v, &data.d, &frame, p_max)?;
    let n = frame.n();
    let systems = (1..=p_max)
        .map(|p| VESystem {
            order: p,
            k: v.k(),
            lambdas: frame.lambdas.clone(),
            superdiag: frame.superdiag.clone(),
            targets: (0..n).collect(),
            forcing: if p == 1 { Vec::new() } else { order_p_forcing(&jet, p, &arith) },
        })
        .collect();
    Ok(VEChain { frame, jet, systems })
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i >= n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

fn order_one_support(t: &ForcingTerm, allowed: &[usize]) -> bool {
    t.monomial.keys().all(|v| v.order == 1 && allowed.contains(&v.component))
}

fn ve2(chain: &VEChain) -> Result<&VESystem> {
    chain.system(2).ok_or(Error::InvalidOrder(2))
}

/// `ẍ = −λ_α φ^{k−2} x`, `z̈ = −λ_γ φ^{k−2} z + φ^{k−3} θ^γ_{αα} x²`.
pub fn extract_ve2_alpha(chain: &VEChain, alpha: usize, gamma: usize) -> Result<VESystem> {
    let n = chain.n();
    check_index(alpha, n)?;
    check_index(gamma, n)?;
    Ok(ve2(chain)?.restrict(vec![gamma], |t| order_one_support(t, &[alpha])))
}

/// The pure cross part: forcing `2 φ^{k−3} θ^γ_{αβ} x_α x_β` only.
pub fn extract_ex2(chain: &VEChain, alpha: usize, beta: usize, gamma: usize) -> Result<VESystem> {
    let n = chain.n();
    check_index(alpha, n)?;
    check_index(beta, n)?;
    check_index(gamma, n)?;
    if alpha == beta {
        return Err(Error::AlphaEqualsBeta);
    }
    Ok(ve2(chain)?.restrict(vec![gamma], |t| {
        order_one_support(t, &[alpha, beta]) && t.monomial.len() == 2
    }))
}

/// `VE₂,(α,β)^γ`: every order-2 term in target `γ` built from `x_α, x_β`.
pub fn extract_ve2_pair(chain: &VEChain, alpha: usize, beta: usize, gamma: usize) -> Result<VESystem> {
    let n = chain.n();
    check_index(alpha, n)?;
    check_index(beta, n)?;
    check_index(gamma, n)?;
    if alpha == beta {
        return Err(Error::AlphaEqualsBeta);
    }
    Ok(ve2(chain)?.restrict(vec![gamma], |t| order_one_support(t, &[alpha, beta])))
}

/// Sum of systems sharing one linear part: forcings add.
pub fn sum_systems(systems: &[&VESystem], arith: &Arith) -> Result<VESystem> {
    let first = systems.first().ok_or(Error::LinearPartMismatch)?;
    if systems.iter().any(|s| !s.same_linear_part(first)) {
        return Err(Error::LinearPartMismatch);
    }
    let forcing = systems.iter().flat_map(|s| s.forcing.iter().cloned()).collect();
    Ok(VESystem { forcing: canonicalize(forcing, arith), ..(*first).clone() })
}

/// Superposition: the sum of particular solutions solves the summed system.
pub fn superpose<S>(parts: &[(&VESystem, S)], arith: &Arith) -> Result<(VESystem, S)>
where
    S: Clone + std::ops::Add<Output = S>,
{
    let (_, first) = parts.first().ok_or(Error::LinearPartMismatch)?;
    let systems: Vec<&VESystem> = parts.iter().map(|(s, _)| *s).collect();
    let sum = sum_systems(&systems, arith)?;
    let total = parts.iter().skip(1).fold(first.clone(), |acc, (_, x)| acc + x.clone());
    Ok((sum, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{normalize_darboux, verify_darboux};
    use crate::poly::Polynomial;

    fn cubic(c: Scalar) -> HomogeneousPotential {
        let num = Polynomial::from_terms(
            2,
            vec![(vec![2, 1], Scalar::one()), (vec![0, 3], Scalar::from_ratio(1, 2)), (vec![3, 0], c)],
        )
        .unwrap();
        let den = Polynomial::from_terms(2, vec![(vec![0, 1], Scalar::one())]).unwrap();
        HomogeneousPotential::new(2, num, den).unwrap()
    }

    fn chain_for(v: &HomogeneousPotential, d: &[i64], p: u32) -> VEChain {
        let d: Vec<Scalar> = d.iter().map(|&x| Scalar::from_i64(x)).collect();
        let data = verify_darboux(v, &d, &Arith::exact()).unwrap();
        let (w, data) = normalize_darboux(v, &data).unwrap();
        build_ve_chain(&w, &data, p).unwrap()
    }

    #[test]
    fn partitions_and_coefficients() {
        assert_eq!(partitions(3), vec![vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(partitions(4).len(), 4);
        assert_eq!(partition_coefficient(2, &[1, 1]), BigRational::from_integer(1.into()));
        assert_eq!(partition_coefficient(3, &[2, 1]), BigRational::from_integer(3.into()));
        assert_eq!(partition_coefficient(3, &[1, 1, 1]), BigRational::from_integer(1.into()));
        assert_eq!(partition_coefficient(4, &[2, 2]), BigRational::from_integer(3.into()));
    }

    #[test]
    fn quadratic_chain_is_decoupled() {
        let v = HomogeneousPotential::polynomial(
            2,
            Polynomial::from_terms(2, vec![(vec![2, 0], Scalar::from_ratio(1, 2)), (vec![0, 2], Scalar::from_i64(2))]).unwrap(),
        )
        .unwrap();
        let ch = chain_for(&v, &[1, 0], 5);
        assert!(ch.systems.iter().all(VESystem::is_homogeneous));
    }

    #[test]
    fn cubic_ve2_term() {
        let c = Scalar::from_i64(1);
        let ch = chain_for(&cubic(c), &[0, 1], 3);
        let ve2 = ch.system(2).unwrap();
        let t = ve2
            .forcing
            .iter()
            .find(|t| t.target == 0 && t.monomial.get(&SourceVar { order: 1, component: 0 }) == Some(&2))
            .unwrap();
        assert_eq!(t.coefficient, Scalar::from_i64(-6));
        assert_eq!(t.phi_power, -1);
        assert_eq!(ch.jet.theta().get(0, &[0, 0]), Scalar::from_i64(-6));
        let sub = extract_ve2_alpha(&ch, 0, 0).unwrap();
        assert_eq!(sub.forcing.len(), 1);
        assert_eq!(sub.forcing[0].coefficient, Scalar::from_i64(-6));
        assert!(ch.system(2).unwrap().is_simple_form());
        // VE_3 carries the bilinear 3θ(x1, x2) part
        let ve3 = ch.system(3).unwrap();
        assert!(!ve3.is_simple_form());
        let bil = ve3
            .forcing
            .iter()
            .find(|t| {
                t.target == 0
                    && t.monomial.get(&SourceVar { order: 1, component: 0 }) == Some(&1)
                    && t.monomial.get(&SourceVar { order: 2, component: 0 }) == Some(&1)
            })
            .unwrap();
        assert_eq!(bil.coefficient, Scalar::from_i64(-18));
    }

    #[test]
    fn extraction_errors_and_composition() {
        let ch = chain_for(&cubic(Scalar::from_i64(2)), &[0, 1], 2);
        assert_eq!(extract_ex2(&ch, 0, 0, 0), Err(Error::AlphaEqualsBeta));
        assert_eq!(extract_ve2_alpha(&ch, 2, 0), Err(Error::IndexOutOfRange { index: 2, n: 2 }));
        let arith = Arith::exact();
        for g in 0..2 {
            let pair = extract_ve2_pair(&ch, 0, 1, g).unwrap();
            let a = extract_ve2_alpha(&ch, 0, g).unwrap();
            let b = extract_ve2_alpha(&ch, 1, g).unwrap();
            let x = extract_ex2(&ch, 0, 1, g).unwrap();
            assert_eq!(sum_systems(&[&a, &b, &x], &arith).unwrap(), pair);
        }
    }

    #[test]
    fn xi_matches_symbolic_partials() {
        let v = cubic(Scalar::from_ratio(1, 3));
        let f = v.force_field();
        let d = vec![Scalar::zero(), Scalar::one()];
        let xi = coupling_xi(&f, &d).unwrap();
        let sym = crate::poly::derivative_tensor_symbolic(&f, &d, 3).unwrap();
        for (j, m) in sym.entries.iter().enumerate() {
            for (a, val) in m {
                assert_eq!(&xi.get(j, &a.indices()), val);
            }
        }
    }
}
