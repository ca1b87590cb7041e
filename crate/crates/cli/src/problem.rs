//! Problem files: a homogeneous potential, candidate Darboux points and run
//! options, as JSON.

use serde::{Deserialize, Serialize};
use vega_core::{Arith, Error, HomogeneousPotential, Mode, Polynomial, Scalar};

/// One `coefficient · q^exponents` term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coefficient: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub numerator: Vec<Term>,
    #[serde(default)]
    pub denominator: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_p_max")]
    pub p_max: u32,
    /// Energy `e` of the particular solution; `0` selects the zero-energy regime.
    #[serde(default = "Scalar::zero")]
    pub energy: Scalar,
    #[serde(default)]
    pub assert_independence: bool,
}

fn default_tol() -> f64 {
    vega_core::scalar::DEFAULT_TOL
}

fn default_p_max() -> u32 {
    2
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            mode: Mode::Exact,
            tolerance: default_tol(),
            p_max: default_p_max(),
            energy: Scalar::zero(),
            assert_independence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub k: i32,
    pub potential: PotentialSpec,
    pub darboux_candidates: Vec<Vec<Scalar>>,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// Parse failure with the JSON path and, for syntax errors, the position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{} (line {l}, column {c}): {}", self.path, self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError { path: path.into(), line: None, column: None, message: message.into() }
    }
}

impl ProblemFile {
    /// Parses and validates; the potential is built (Euler check included).
    pub fn parse(text: &str) -> Result<(ProblemFile, HomogeneousPotential), ParseError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let problem: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ParseError { path, line: Some(inner.line()), column: Some(inner.column()), message: inner.to_string() }
        })?;
        let v = problem.potential()?;
        Ok((problem, v))
    }

    fn polynomial(&self, field: &str, terms: &[Term]) -> Result<Polynomial, ParseError> {
        for (i, t) in terms.iter().enumerate() {
            if t.exponents.len() != self.n {
                return Err(ParseError::at(
                    format!("potential.{field}[{i}].exponents"),
                    format!("exponent vector has length {}, expected n = {}", t.exponents.len(), self.n),
                ));
            }
        }
        Polynomial::from_terms(self.n, terms.iter().map(|t| (t.exponents.clone(), t.coefficient.clone())))
            .map_err(|e| ParseError::at(format!("potential.{field}"), e.to_string()))
    }

    pub fn potential(&self) -> Result<HomogeneousPotential, ParseError> {
        if self.n == 0 {
            return Err(ParseError::at("n", "at least one degree of freedom is required"));
        }
        let num = self.polynomial("numerator", &self.potential.numerator)?;
        let v = if self.potential.denominator.is_empty() {
            HomogeneousPotential::polynomial(self.k, num)
        } else {
            let den = self.polynomial("denominator", &self.potential.denominator)?;
            HomogeneousPotential::new(self.k, num, den)
        };
        let v = v.map_err(|e| ParseError::at("potential", e.to_string()))?;
        for (i, d) in self.darboux_candidates.iter().enumerate() {
            if d.len() != self.n {
                return Err(ParseError::at(
                    format!("darboux_candidates[{i}]"),
                    Error::DimensionMismatch { expected: self.n, got: d.len() }.to_string(),
                ));
            }
        }
        Ok(v)
    }
}

/// Options after command-line overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub mode: Mode,
    pub tolerance: f64,
    pub p_max: u32,
    pub energy: Scalar,
    pub assert_independence: bool,
    pub seed: u64,
}

impl RunOptions {
    pub fn from_problem(o: &ProblemOptions) -> Self {
        RunOptions {
            mode: o.mode,
            tolerance: o.tolerance,
            p_max: o.p_max,
            energy: o.energy.clone(),
            assert_independence: o.assert_independence,
            seed: 0,
        }
    }

    pub fn arith(&self) -> Arith {
        match self.mode {
            Mode::Exact => Arith { mode: Mode::Exact, tol: self.tolerance },
            Mode::Float => Arith::float(self.tolerance),
        }
    }
}
