//! Monomial feature vectors for the critic and actor approximators.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// An ordered list of multivariate monomials `x^e = prod_d x_d^{e_d}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSet {
    n: usize,
    terms: Vec<Vec<u32>>,
    max_exp: u32,
}

impl BasisSet {
    pub fn new(n: usize, terms: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidBasis(
                "input dimension must be positive".into(),
            ));
        }
        if terms.is_empty() {
            return Err(Error::InvalidBasis(
                "a basis needs at least one term".into(),
            ));
        }
        let mut seen = HashSet::new();
        for (j, t) in terms.iter().enumerate() {
            if t.len() != n {
                return Err(Error::InvalidBasis(format!(
                    "term {j} has {} exponents, expected {n}",
                    t.len()
                )));
            }
            if !seen.insert(t.clone()) {
                return Err(Error::InvalidBasis(format!(
                    "term {j} {t:?} is a duplicate"
                )));
            }
        }
        let max_exp = terms.iter().flatten().copied().max().unwrap_or(0);
        Ok(Self { n, terms, max_exp })
    }

    /// All monomials of total degree `degree` in `n` variables, in
    /// lexicographic order (`x1^2, x1 x2, ..., xn^2` for degree 2).
    pub fn homogeneous(n: usize, degree: u32) -> Result<Self> {
        fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if prefix.len() + 1 == n {
                prefix.push(left);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(n, left - e, prefix, out);
                prefix.pop();
            }
        }
        if n == 0 {
            return Err(Error::InvalidBasis(
                "input dimension must be positive".into(),
            ));
        }
        let mut terms = Vec::new();
        rec(n, degree, &mut Vec::with_capacity(n), &mut terms);
        Self::new(n, terms)
    }

    /// Concatenates two bases over the same variables.
    pub fn concat(&self, other: &BasisSet) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidBasis(
                "cannot join bases of different dimension".into(),
            ));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.n, terms)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Vec<u32>] {
        &self.terms
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval_slice(x.as_slice())
    }

    pub fn eval_slice(&self, x: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.terms.len());
        self.eval_into(x, out.as_mut_slice());
        out
    }

    /// Writes the feature vector at `x` into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n, "state dimension does not match basis");
        assert_eq!(out.len(), self.terms.len());
        // powers[d][p] = x_d^p
        let stride = self.max_exp as usize + 1;
        let mut powers = vec![1.0; self.n * stride];
        for d in 0..self.n {
            for p in 1..stride {
                powers[d * stride + p] = powers[d * stride + p - 1] * x[d];
            }
        }
        for (o, term) in out.iter_mut().zip(&self.terms) {
            *o = term
                .iter()
                .enumerate()
                .map(|(d, &e)| powers[d * stride + e as usize])
                .product();
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
            .map_err(|e: Error| Error::format(path, e.to_string()))
    }
}

/// Text listing: a `dim = n` line followed by one whitespace-separated
/// exponent row per term. `#` starts a comment.
impl FromStr for BasisSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut n = None;
        let mut terms = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::InvalidBasis(format!("line {}: {msg}", lineno + 1));
            if let Some(rest) = line.strip_prefix("dim") {
                let value = rest
                    .trim_start()
                    .strip_prefix('=')
                    .ok_or_else(|| bad("expected `dim = <n>`".into()))?;
                n = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| bad(e.to_string()))?,
                );
                continue;
            }
            let dim = n.ok_or_else(|| bad("`dim = <n>` must precede the terms".into()))?;
            let term = line
                .split_whitespace()
                .map(|tok| tok.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("bad exponent: {e}")))?;
            if term.len() != dim {
                return Err(bad(format!(
                    "expected {dim} exponents, found {}",
                    term.len()
                )));
            }
            terms.push(term);
        }
        let n = n.ok_or_else(|| Error::InvalidBasis("missing `dim = <n>` header".into()))?;
        BasisSet::new(n, terms)
    }
}

impl fmt::Display for BasisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim = {}", self.n)?;
        for t in &self.terms {
            let row: Vec<String> = t.iter().map(u32::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// The benchmark bases shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardCase {
    Case1,
    Rtac,
}

impl FromStr for StandardCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(StandardCase::Case1),
            "rtac" => Ok(StandardCase::Rtac),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }
}

/// Critic basis and the actor basis shared by every input channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPair {
    pub critic: BasisSet,
    pub actor: BasisSet,
}

/// Critic terms for the four-state actuator benchmark, in listing order.
/// The quadratic block is complete; the quartic block is a fixed
/// 32-term selection including one cubic term, `x2 x3 x4`.
const RTAC_CRITIC: [[u32; 4]; 42] = [
    [2, 0, 0, 0],
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 2, 0, 0],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 2, 0],
    [0, 0, 1, 1],
    [0, 0, 0, 2],
    [3, 1, 0, 0],
    [3, 0, 1, 0],
    [3, 0, 0, 1],
    [2, 2, 0, 0],
    [2, 1, 1, 0],
    [2, 1, 0, 1],
    [2, 0, 2, 0],
    [2, 0, 1, 1],
    [2, 0, 0, 2],
    [1, 3, 0, 0],
    [1, 2, 1, 0],
    [1, 2, 0, 1],
    [1, 1, 2, 0],
    [1, 1, 1, 1],
    // Lexicographic slot of x1 x2 x4^2; x1 x2^2 x4 is already listed above.
    [1, 1, 0, 2],
    [1, 0, 3, 0],
    [1, 0, 2, 1],
    [1, 0, 1, 2],
    [1, 0, 0, 3],
    [0, 4, 0, 0],
    [0, 3, 1, 0],
    [0, 2, 2, 0],
    [0, 1, 1, 1],
    [0, 2, 0, 2],
    [0, 1, 3, 0],
    [0, 1, 2, 1],
    [0, 1, 0, 3],
    [0, 0, 4, 0],
    [0, 0, 3, 1],
    [0, 0, 2, 2],
    [0, 0, 1, 3],
    [0, 0, 0, 4],
];

pub fn standard_basis(case: StandardCase) -> BasisPair {
    match case {
        StandardCase::Case1 => BasisPair {
            critic: BasisSet::homogeneous(2, 2).expect("static basis"),
            actor: BasisSet::homogeneous(2, 1)
                .and_then(|lin| lin.concat(&BasisSet::homogeneous(2, 2)?))
                .expect("static basis"),
        },
        StandardCase::Rtac => {
            let critic = BasisSet::new(4, RTAC_CRITIC.iter().map(|t| t.to_vec()).collect())
                .expect("static basis");
            let actor = BasisSet::homogeneous(4, 1)
                .and_then(|lin| lin.concat(&critic))
                .expect("static basis");
            BasisPair { critic, actor }
        }
    }
}

/// Quadratic critic and linear actor, the exact parametrization for
/// linear plants with quadratic cost.
pub fn quadratic_linear_basis(n: usize) -> Result<BasisPair> {
    Ok(BasisPair {
        critic: BasisSet::homogeneous(n, 2)?,
        actor: BasisSet::homogeneous(n, 1)?,
    })
}
