//! Fixture potentials shared by the benchmarks.

use vega_core::darboux::{normalize_darboux, verify_darboux, DarbouxData};
use vega_core::{Arith, HomogeneousPotential, Polynomial, Scalar};

fn poly(n: usize, terms: &[(&[u32], Scalar)]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), c.clone()))).expect("valid terms")
}

/// `½(q₁² + 2q₂² + 3q₃²)`.
pub fn oscillator() -> HomogeneousPotential {
    let h = Scalar::from_ratio(1, 2);
    let num = poly(3, &[(&[2, 0, 0], h.clone()), (&[0, 2, 0], Scalar::one()), (&[0, 0, 2], Scalar::from_ratio(3, 2))]);
    HomogeneousPotential::polynomial(2, num).expect("degree 2")
}

/// `½(2q₁² + q₂²) + c q₁³/q₂`.
pub fn cubic(c: i64) -> HomogeneousPotential {
    let num = poly(2, &[(&[2, 1], Scalar::one()), (&[0, 3], Scalar::from_ratio(1, 2)), (&[3, 0], Scalar::from_i64(c))]);
    let den = poly(2, &[(&[0, 1], Scalar::one())]);
    HomogeneousPotential::new(2, num, den).expect("degree 2")
}

/// `−1/(2(q₁² + q₂²))`.
pub fn radial_km2() -> HomogeneousPotential {
    let den = poly(2, &[(&[2, 0], Scalar::from_i64(-2)), (&[0, 2], Scalar::from_i64(-2))]);
    HomogeneousPotential::new(-2, Polynomial::one(2), den).expect("degree -2")
}

/// Normalized Darboux data at `d`.
pub fn prepared(v: &HomogeneousPotential, d: &[i64]) -> (HomogeneousPotential, DarbouxData) {
    let d: Vec<Scalar> = d.iter().map(|&x| Scalar::from_i64(x)).collect();
    let data = verify_darboux(v, &d, &Arith::exact()).expect("Darboux point");
    normalize_darboux(v, &data).expect("normalizable")
}
