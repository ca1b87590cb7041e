pub mod balgebra;
pub mod darboux;
pub mod error;
pub mod galois;
pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod scalar;
pub mod surd;
pub mod trig;
pub mod vebuild;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use poly::{HomogeneousPotential, MultiIndex, Polynomial, RationalFunction};
pub use scalar::{Arith, Mode, Scalar};
pub use surd::SurdSum;
