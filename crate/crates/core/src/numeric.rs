//! Floating-point checks: fixed-step RK4 along complex contours, monodromy
//! matrices, commutators and residuals.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::vebuild::VESystem;

pub const DEFAULT_STEPS: usize = 4096;
pub const DEFAULT_RADIUS: f64 = 0.5;
/// Smallest admissible distance between a contour and a singularity.
pub const DEFAULT_CLEARANCE: f64 = 0.1;

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Value with first and second derivatives in one real or complex variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: C,
    pub d1: C,
    pub d2: C,
}

impl Jet2 {
    pub fn constant(v: C) -> Self {
        Jet2 { v, d1: C::new(0.0, 0.0), d2: C::new(0.0, 0.0) }
    }

    pub fn variable(t: C) -> Self {
        Jet2 { v: t, d1: c(1.0), d2: c(0.0) }
    }

    /// `f ∘ self` for `f` with derivatives `f0, f1, f2` at `self.v`.
    pub fn compose(&self, f0: C, f1: C, f2: C) -> Self {
        Jet2 { v: f0, d1: f1 * self.d1, d2: f2 * self.d1 * self.d1 + f1 * self.d2 }
    }

    pub fn ln(&self) -> Self {
        self.compose(self.v.ln(), self.v.inv(), -(self.v * self.v).inv())
    }

    pub fn powc(&self, w: C) -> Self {
        let v = self.v;
        let p = v.powc(w);
        self.compose(p, w * p / v, w * (w - 1.0) * p / (v * v))
    }

    pub fn powi(&self, e: i32) -> Self {
        if e == 0 {
            return Jet2::constant(c(1.0));
        }
        let v = self.v;
        let ef = e as f64;
        self.compose(v.powi(e), ef * v.powi(e - 1), ef * (ef - 1.0) * v.powi(e - 2))
    }

    pub fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn sin(&self) -> Self {
        self.compose(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn scale(&self, s: C) -> Self {
        Jet2 { v: self.v * s, d1: self.d1 * s, d2: self.d2 * s }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(c(-1.0))
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1, d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2 }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.compose(o.v.inv(), -(o.v * o.v).inv(), 2.0 * (o.v * o.v * o.v).inv())
    }
}

/// A path in complex time, parameterized over `s ∈ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Path {
    /// Counterclockwise circle, starting at `center + radius`.
    Circle { center: [f64; 2], radius: f64, turns: u32 },
    /// Straight segments through the points; closed when last equals first.
    Polyline { points: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contour {
    pub path: Path,
    pub steps: usize,
}

fn to_c(p: [f64; 2]) -> C {
    C::new(p[0], p[1])
}

impl Contour {
    pub fn circle(center: C, radius: f64, steps: usize) -> Self {
        Contour { path: Path::Circle { center: [center.re, center.im], radius, turns: 1 }, steps }
    }

    pub fn segment(a: C, b: C, steps: usize) -> Self {
        Contour { path: Path::Polyline { points: vec![[a.re, a.im], [b.re, b.im]] }, steps }
    }

    /// Closed polygon through `points`; the base point is repeated at the end.
    pub fn polygon(points: &[C], steps: usize) -> Self {
        let mut pts: Vec<[f64; 2]> = points.iter().map(|z| [z.re, z.im]).collect();
        if let Some(first) = pts.first().copied() {
            pts.push(first);
        }
        Contour { path: Path::Polyline { points: pts }, steps }
    }

    pub fn with_turns(mut self, k: u32) -> Self {
        if let Path::Circle { turns, .. } = &mut self.path {
            *turns = k;
        }
        self
    }

    pub fn base(&self) -> C {
        self.point(0.0)
    }

    pub fn is_closed(&self) -> bool {
        match &self.path {
            Path::Circle { .. } => true,
            Path::Polyline { points } => points.len() > 2 && points.first() == points.last(),
        }
    }

    /// Point and tangent `dz/ds`.
    pub fn eval(&self, s: f64) -> (C, C) {
        match &self.path {
            Path::Circle { center, radius, turns } => {
                let w = 2.0 * PI * *turns as f64;
                let e = C::new(0.0, w * s).exp();
                if s >= 1.0 {
                    // closure is exact, not subject to rounding in exp
                    return (to_c(*center) + *radius, C::new(0.0, w) * *radius);
                }
                (to_c(*center) + e * *radius, C::new(0.0, w) * e * *radius)
            }
            Path::Polyline { points } => {
                let m = points.len() - 1;
                if s >= 1.0 {
                    let (a, b) = (to_c(points[m - 1]), to_c(points[m]));
                    return (b, (b - a) * m as f64);
                }
                let x = (s * m as f64).clamp(0.0, m as f64);
                let i = (x.floor() as usize).min(m - 1);
                let (a, b) = (to_c(points[i]), to_c(points[i + 1]));
                (a + (b - a) * (x - i as f64), (b - a) * m as f64)
            }
        }
    }

    pub fn point(&self, s: f64) -> C {
        self.eval(s).0
    }

    /// Distance from the path to `z`.
    pub fn distance_to(&self, z: C) -> f64 {
        match &self.path {
            Path::Circle { center, radius, .. } => ((z - to_c(*center)).norm() - radius).abs(),
            Path::Polyline { points } => points
                .windows(2)
                .map(|w| {
                    let (a, b) = (to_c(w[0]), to_c(w[1]));
                    let ab = b - a;
                    let t = if ab.norm_sqr() == 0.0 { 0.0 } else { ((z - a) * ab.conj()).re / ab.norm_sqr() };
                    (z - (a + ab * t.clamp(0.0, 1.0))).norm()
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// `Y' = A(t) Y` with known singular points.
#[derive(Clone)]
pub struct LinearOde {
    pub dim: usize,
    pub label: String,
    pub singularities: Vec<C>,
    a: Arc<dyn Fn(C) -> DMatrix<C> + Send + Sync>,
}

impl std::fmt::Debug for LinearOde {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinearOde({}, dim {})", self.label, self.dim)
    }
}

impl LinearOde {
    pub fn new<F>(dim: usize, label: impl Into<String>, singularities: Vec<C>, a: F) -> Self
    where
        F: Fn(C) -> DMatrix<C> + Send + Sync + 'static,
    {
        LinearOde { dim, label: label.into(), singularities, a: Arc::new(a) }
    }

    pub fn matrix(&self, t: C) -> DMatrix<C> {
        (self.a)(t)
    }

    /// `y' = A y + f` as a homogeneous system on `(y, 1)`.
    pub fn with_forcing<F>(&self, f: F) -> LinearOde
    where
        F: Fn(C) -> Vec<C> + Send + Sync + 'static,
    {
        let inner = self.a.clone();
        let n = self.dim;
        LinearOde::new(n + 1, format!("{} + forcing", self.label), self.singularities.clone(), move |t| {
            let mut m = DMatrix::zeros(n + 1, n + 1);
            m.view_mut((0, 0), (n, n)).copy_from(&inner(t));
            for (i, v) in f(t).into_iter().enumerate() {
                m[(i, n)] = v;
            }
            m
        })
    }
}

/// Transported matrix together with where it was transported.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalMatrix {
    pub matrix: DMatrix<C>,
    pub base: C,
    pub label: String,
    pub steps: usize,
}

impl FundamentalMatrix {
    pub fn to_matrix(&self) -> Matrix {
        let m = &self.matrix;
        Matrix::from_rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Scalar::Float(m[(i, j)])).collect()).collect())
    }

    pub fn determinant(&self) -> C {
        self.matrix.clone().determinant()
    }
}

impl Serialize for FundamentalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.matrix.nrows()).map(|i| (0..self.matrix.ncols()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect()).collect();
        let mut st = s.serialize_struct("FundamentalMatrix", 4)?;
        st.serialize_field("base", &[self.base.re, self.base.im])?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("matrix", &rows)?;
        st.serialize_field("steps", &self.steps)?;
        st.end()
    }
}

fn check_clearance(ode: &LinearOde, contour: &Contour, clearance: f64) -> Result<()> {
    for z in &ode.singularities {
        let d = contour.distance_to(*z);
        if d < clearance {
            return Err(Error::SingularityTooClose { distance: d, clearance });
        }
    }
    Ok(())
}

fn rk4(ode: &LinearOde, contour: &Contour, init: &DMatrix<C>, steps: usize) -> DMatrix<C> {
    let h = 1.0 / steps as f64;
    let f = |s: f64, y: &DMatrix<C>| {
        let (z, dz) = contour.eval(s);
        ode.matrix(z) * y * dz
    };
    let mut y = init.clone();
    for i in 0..steps {
        let s = i as f64 * h;
        let k1 = f(s, &y);
        let k2 = f(s + h / 2.0, &(&y + &k1 * c(h / 2.0)));
        let k3 = f(s + h / 2.0, &(&y + &k2 * c(h / 2.0)));
        let k4 = f(s + h, &(&y + &k3 * c(h)));
        y += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    y
}

/// Fixed-step RK4 transport of `init` along the contour.
pub fn integrate_system(ode: &LinearOde, contour: &Contour, init: &DMatrix<C>, clearance: f64) -> Result<FundamentalMatrix> {
    if init.nrows() != ode.dim {
        return Err(Error::DimensionMismatch { expected: ode.dim, got: init.nrows() });
    }
    check_clearance(ode, contour, clearance)?;
    let m = rk4(ode, contour, init, contour.steps);
    Ok(FundamentalMatrix { matrix: m, base: contour.base(), label: ode.label.clone(), steps: contour.steps })
}

/// Richardson estimate `‖Y_N − Y_{N/2}‖/15` of the RK4 error at `N` steps.
pub fn richardson_estimate(ode: &LinearOde, contour: &Contour, init: &DMatrix<C>) -> f64 {
    let full = rk4(ode, contour, init, contour.steps);
    let half = rk4(ode, contour, init, (contour.steps / 2).max(1));
    (full - half).norm() / 15.0
}

/// As [`integrate_system`], failing when the Richardson estimate exceeds `tol`.
pub fn integrate_checked(ode: &LinearOde, contour: &Contour, init: &DMatrix<C>, clearance: f64, tol: f64) -> Result<FundamentalMatrix> {
    let out = integrate_system(ode, contour, init, clearance)?;
    let est = richardson_estimate(ode, contour, init);
    if est > tol {
        return Err(Error::StepCountTooSmall { estimate: est, tol });
    }
    Ok(out)
}

/// Monodromy around `singularity`, normalized to the identity at the base
/// point `singularity + radius`.
pub fn monodromy_matrix(ode: &LinearOde, singularity: C, radius: f64, steps: usize) -> Result<FundamentalMatrix> {
    monodromy_loops(ode, singularity, radius, steps, 1)
}

pub fn monodromy_loops(ode: &LinearOde, singularity: C, radius: f64, steps: usize, turns: u32) -> Result<FundamentalMatrix> {
    for z in &ode.singularities {
        if *z != singularity && (z - singularity).norm() < radius + DEFAULT_CLEARANCE {
            return Err(Error::SingularityTooClose { distance: (z - singularity).norm() - radius, clearance: DEFAULT_CLEARANCE });
        }
    }
    let contour = Contour::circle(singularity, radius, steps * turns as usize).with_turns(turns);
    integrate_system(ode, &contour, &DMatrix::identity(ode.dim, ode.dim), DEFAULT_CLEARANCE.min(radius / 2.0))
}

/// Monodromies around several singularities, in parallel.
pub fn monodromy_set(ode: &LinearOde, singularities: &[C], radius: f64, steps: usize) -> Result<Vec<FundamentalMatrix>> {
    singularities.par_iter().map(|z| monodromy_matrix(ode, *z, radius, steps)).collect()
}

/// Monodromy around `z₁` expressed at the base point of `z₀` by transport
/// along the real segment between the two base points.
pub fn transported_monodromy(ode: &LinearOde, from: C, to: C, radius: f64, steps: usize) -> Result<FundamentalMatrix> {
    let m_to = monodromy_matrix(ode, to, radius, steps)?;
    let (a, b) = (from + radius, to + radius);
    // go below the real axis to stay clear of singularities on it
    let mid = (a + b) / 2.0 - C::new(0.0, 1.0);
    let path = Contour { path: Path::Polyline { points: vec![[a.re, a.im], [mid.re, mid.im], [b.re, b.im]] }, steps };
    let id = DMatrix::identity(ode.dim, ode.dim);
    let t = integrate_system(ode, &path, &id, DEFAULT_CLEARANCE)?.matrix;
    let t_inv = t.clone().try_inverse().ok_or(Error::NotDiagonalizable)?;
    Ok(FundamentalMatrix { matrix: &t_inv * &m_to.matrix * &t, base: a, label: m_to.label, steps })
}

/// Additive jump of `∫ f(t)/sin t` around `t = nπ`, computed numerically.
pub fn integral_jump<F>(f: F, n: i64, radius: f64, steps: usize) -> Result<C>
where
    F: Fn(C) -> C + Send + Sync + 'static,
{
    let center = c(n as f64 * PI);
    let sing = (-3..=3).map(|k| c((n + k) as f64 * PI)).collect();
    let ode = LinearOde::new(2, "integral", sing, move |t| {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f(t) / t.sin();
        m
    });
    Ok(monodromy_matrix(&ode, center, radius, steps)?.matrix[(0, 1)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub max_norm: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub non_commuting: bool,
    pub note: &'static str,
}

pub const DIAGNOSTIC_NOTE: &str = "heuristic diagnostic, not a verdict";

/// Largest pairwise `‖M_i M_j − M_j M_i‖`.
pub fn commutator_diagnostic(matrices: &[DMatrix<C>], tol: f64) -> CommutatorReport {
    let mut best = (0.0, None);
    for i in 0..matrices.len() {
        for j in i + 1..matrices.len() {
            let n = (&matrices[i] * &matrices[j] - &matrices[j] * &matrices[i]).norm();
            if n > best.0 {
                best = (n, Some((i, j)));
            }
        }
    }
    CommutatorReport { max_norm: best.0, worst_pair: best.1, non_commuting: best.0 > tol, note: DIAGNOSTIC_NOTE }
}

/// Maximum of `‖residual(t)‖` over the samples.
pub fn residual_check<F: Fn(C) -> C>(residual: F, samples: &[C]) -> f64 {
    samples.iter().map(|t| residual(*t).norm()).fold(0.0, f64::max)
}

/// `φ^{k−2}` and friends along `φ = sin t` (the `k = 2` curve at `e = 1/2`).
pub fn sin_phi(t: C) -> C {
    t.sin()
}

/// `ẋ = y`, `ẏ = −φ^{k−2} J x` for the order-one block.
pub fn ve1_ode(system: &VESystem, phi: Arc<dyn Fn(C) -> C + Send + Sync>, singularities: Vec<C>) -> LinearOde {
    let n = system.n();
    let lambdas: Vec<C> = system.lambdas.iter().map(Scalar::to_c64).collect();
    let sup: Vec<C> = system.superdiag.iter().map(Scalar::to_c64).collect();
    let k = system.k;
    LinearOde::new(2 * n, "VE1", singularities, move |t| {
        let w = phi(t).powi(k - 2);
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(2 * i, 2 * i + 1)] = c(1.0);
            m[(2 * i + 1, 2 * i)] = -w * lambdas[i];
            if i + 1 < n {
                m[(2 * i + 1, 2 * i + 2)] = -w * sup[i];
            }
        }
        m
    })
}

/// An order-two subsystem made linear by taking the quadratic monomials of
/// the source phase variables `(x_s, ẋ_s)` as state, followed by `(z, ż)`
/// per target.
pub fn linearize_ve2(system: &VESystem, sources: &[usize], phi: Arc<dyn Fn(C) -> C + Send + Sync>, singularities: Vec<C>) -> Result<LinearOde> {
    if system.order != 2 || !system.is_simple_form() {
        return Err(Error::Unsupported("linearization needs an order-2 system with order-1 sources".into()));
    }
    let r = sources.len();
    let w = 2 * r;
    let pairs: Vec<(usize, usize)> = (0..w).flat_map(|a| (a..w).map(move |b| (a, b))).collect();
    let pair_index = move |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // position of (a, b) in the upper-triangular enumeration
        a * w - a * (a.saturating_sub(1)) / 2 - if a > 0 { a } else { 0 } + b
    };
    debug_assert!(pairs.iter().enumerate().all(|(i, (a, b))| pair_index(*a, *b) == i));
    let q = pairs.len();
    let targets = system.targets.clone();
    let dim = q + 2 * targets.len();
    let lambdas: Vec<C> = system.lambdas.iter().map(Scalar::to_c64).collect();
    if sources.iter().any(|&s| system.superdiag.get(s).is_some_and(|x| !x.is_zero())) {
        return Err(Error::Unsupported("linearization needs diagonal sources".into()));
    }
    let src_lambda: Vec<C> = sources.iter().map(|&s| lambdas[s]).collect();
    let mut terms: Vec<(usize, C, i32, usize)> = Vec::new();
    for t in &system.forcing {
        let slot = targets.iter().position(|&g| g == t.target).ok_or(Error::IndexOutOfRange { index: t.target, n: targets.len() })?;
        let vars: Vec<usize> = t
            .monomial
            .iter()
            .flat_map(|(v, e)| std::iter::repeat(v.component).take(*e as usize))
            .map(|comp| sources.iter().position(|&s| s == comp).map(|i| 2 * i).ok_or(Error::IndexOutOfRange { index: comp, n: r }))
            .collect::<Result<_>>()?;
        terms.push((slot, t.coefficient.to_c64(), t.phi_power, pair_index(vars[0], vars[1])));
    }
    let tl: Vec<C> = targets.iter().map(|&g| lambdas[g]).collect();
    let k = system.k;
    Ok(LinearOde::new(dim, "VE2 linearized", singularities, move |t| {
        let ph = phi(t);
        let wk = ph.powi(k - 2);
        // source phase matrix L
        let mut l = DMatrix::<C>::zeros(w, w);
        for (i, lam) in src_lambda.iter().enumerate() {
            l[(2 * i, 2 * i + 1)] = c(1.0);
            l[(2 * i + 1, 2 * i)] = -wk * lam;
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (row, &(a, b)) in pairs.iter().enumerate() {
            for cc in 0..w {
                if l[(a, cc)] != c(0.0) {
                    m[(row, pair_index(cc, b))] += l[(a, cc)];
                }
                if l[(b, cc)] != c(0.0) {
                    m[(row, pair_index(a, cc))] += l[(b, cc)];
                }
            }
        }
        for (slot, lam) in tl.iter().enumerate() {
            let z = q + 2 * slot;
            m[(z, z + 1)] = c(1.0);
            m[(z + 1, z)] = -wk * lam;
        }
        for &(slot, coef, pp, mono) in &terms {
            m[(q + 2 * slot + 1, mono)] += coef * ph.powi(pp);
        }
        m
    }))
}

/// Errors of RK4 transport of `ẍ = −x` along `[0, T]` against the exact
/// propagator, for `steps`, `2·steps`, `4·steps`.
pub fn rk4_order_errors(t_end: f64, steps: usize) -> [f64; 3] {
    let ode = LinearOde::new(2, "oscillator", vec![], |_| {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        m[(1, 0)] = c(-1.0);
        m
    });
    let (ct, st) = (t_end.cos(), t_end.sin());
    let exact = DMatrix::from_row_slice(2, 2, &[c(ct), c(st), c(-st), c(ct)]);
    let id = DMatrix::identity(2, 2);
    let mut out = [0.0; 3];
    for (i, n) in [steps, 2 * steps, 4 * steps].into_iter().enumerate() {
        let seg = Contour::segment(c(0.0), c(t_end), n);
        out[i] = (rk4(&ode, &seg, &id, n) - &exact).norm();
    }
    out
}

/// Solution of a forced scalar equation `z̈ = −a(t) z + f(t)` with zero
/// initial data, sampled along a real segment.
pub fn forced_solution<A, F>(a: A, f: F, t0: f64, t1: f64, steps: usize) -> Vec<(f64, C, C)>
where
    A: Fn(C) -> C + Send + Sync + 'static,
    F: Fn(C) -> C + Send + Sync + 'static,
{
    let h = (t1 - t0) / steps as f64;
    let rhs = |t: f64, y: [C; 2]| [y[1], -a(c(t)) * y[0] + f(c(t))];
    let mut y = [c(0.0), c(0.0)];
    let mut out = vec![(t0, y[0], y[1])];
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, y);
        let k2 = rhs(t + h / 2.0, [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
        let k3 = rhs(t + h / 2.0, [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
        let k4 = rhs(t + h, [y[0] + k3[0] * h, y[1] + k3[1] * h]);
        for j in 0..2 {
            y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        out.push((t + h, y[0], y[1]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oscillator() -> LinearOde {
        LinearOde::new(2, "oscillator", vec![], |_| {
            let mut m = DMatrix::zeros(2, 2);
            m[(0, 1)] = c(1.0);
            m[(1, 0)] = c(-1.0);
            m
        })
    }

    #[test]
    fn closed_loop_identity() {
        let m = monodromy_matrix(&oscillator(), c(1.0), 1.0, DEFAULT_STEPS).unwrap();
        assert!((m.matrix - DMatrix::identity(2, 2)).norm() < 1e-8);
    }

    #[test]
    fn cauchy_multiplier() {
        let ode = LinearOde::new(1, "z/t", vec![c(0.0)], |t| DMatrix::from_element(1, 1, t.inv()));
        let m = monodromy_matrix(&ode, c(0.0), 1.0, DEFAULT_STEPS).unwrap();
        assert!((m.matrix[(0, 0)] - 1.0).norm() < 1e-6);
        // log-derivative: z' = (1/(2t)) z gives -1
        let ode = LinearOde::new(1, "z/2t", vec![c(0.0)], |t| DMatrix::from_element(1, 1, 0.5 * t.inv()));
        let m = monodromy_matrix(&ode, c(0.0), 1.0, DEFAULT_STEPS).unwrap();
        assert!((m.matrix[(0, 0)] + 1.0).norm() < 1e-6);
    }

    #[test]
    fn jumps_match_formula() {
        for w in [0.0, 1.0, -1.0, 2.0, -2.0, 2f64.sqrt()] {
            for n in [0i64, 1] {
                let j = integral_jump(move |t| (C::new(0.0, w) * t).exp(), n, DEFAULT_RADIUS, DEFAULT_STEPS).unwrap();
                let expect = crate::trig::monodromy_jump(|t| (C::new(0.0, w) * t).exp(), n);
                assert!((j - expect).norm() < 1e-6, "w={w} n={n}");
            }
        }
    }

    #[test]
    fn double_loop_is_square() {
        let ode = LinearOde::new(2, "sin", vec![c(0.0)], |t| {
            let mut m = DMatrix::zeros(2, 2);
            m[(0, 1)] = c(1.0);
            m[(1, 0)] = -t.sin().inv().powi(2) * 0.25;
            m
        });
        let one = monodromy_loops(&ode, c(0.0), 0.5, DEFAULT_STEPS, 1).unwrap().matrix;
        let two = monodromy_loops(&ode, c(0.0), 0.5, DEFAULT_STEPS, 2).unwrap().matrix;
        assert!((&one * &one - two).norm() < 1e-6);
    }

    #[test]
    fn clearance_and_step_errors() {
        let ode = LinearOde::new(1, "z/t", vec![c(0.0)], |t| DMatrix::from_element(1, 1, t.inv()));
        let seg = Contour::segment(c(-1.0), c(1.0), 100);
        assert!(matches!(integrate_system(&ode, &seg, &DMatrix::identity(1, 1), 0.1), Err(Error::SingularityTooClose { .. })));
        let loop_ = Contour::circle(c(0.0), 1.0, 4);
        assert!(matches!(
            integrate_checked(&ode, &loop_, &DMatrix::identity(1, 1), 0.1, 1e-10),
            Err(Error::StepCountTooSmall { .. })
        ));
    }

    #[test]
    fn rk4_order_ratio() {
        let e = rk4_order_errors(10.0, 200);
        for r in [e[0] / e[1], e[1] / e[2]] {
            assert!((12.0..=20.0).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn commutators() {
        let d1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(2.0)]));
        let d2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(-1.0)]));
        assert_eq!(commutator_diagnostic(&[d1.clone(), d2], 1e-9).max_norm, 0.0);
        let id = DMatrix::identity(2, 2);
        assert_eq!(commutator_diagnostic(&[id.clone(), id], 1e-9).max_norm, 0.0);
        let u = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(commutator_diagnostic(&[d1, u], 1e-9).non_commuting);
    }

    #[test]
    fn variation_of_constants_matches_direct() {
        // z'' = -2 z + θ cos²(t)/sin t on [0.5, 2.5], zero data at 0.5
        let (w, theta) = (2f64.sqrt(), -6.0);
        let f = move |t: C| theta * t.cos().powi(2) / t.sin();
        let direct = forced_solution(move |_| c(w * w), f, 0.5, 2.5, 4000);
        let (t_end, z_end, _) = *direct.last().unwrap();
        // z(t) = ∫ sin(w(t-s))/w f(s) ds, composite Simpson
        let n = 4000;
        let h = (t_end - 0.5) / n as f64;
        let g = |s: f64| (w * (t_end - s)).sin() / w * f(c(s));
        let mut acc = g(0.5) + g(t_end);
        for i in 1..n {
            acc += g(0.5 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let voc = acc * (h / 3.0);
        assert!((voc - z_end).norm() < 1e-7);
    }

    #[test]
    fn jets_match_closed_derivatives() {
        let t = Jet2::variable(c(1.3));
        let f = t.ln() * t.powc(c(0.5)) / t.sin();
        let h = 1e-4;
        let g = |x: f64| c(x).ln() * c(x).powc(c(0.5)) / c(x).sin();
        let fd1 = (g(1.3 + h) - g(1.3 - h)) / (2.0 * h);
        let fd2 = (g(1.3 + h) - 2.0 * g(1.3) + g(1.3 - h)) / (h * h);
        assert!((f.d1 - fd1).norm() < 1e-7 && (f.d2 - fd2).norm() < 1e-5);
    }

    proptest! {
        #[test]
        fn polyline_closure(pts in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 2..6)) {
            let pts: Vec<C> = pts.into_iter().map(|(a, b)| C::new(a, b)).collect();
            let poly = Contour::polygon(&pts, 64);
            prop_assert_eq!(poly.point(0.0), poly.point(1.0));
        }
    }
}
