//! Model-based reference for linear plants: Lyapunov equations and the
//! Kleinman iteration for the continuous algebraic Riccati equation.
//!
//! Gains follow the convention `u = -K x`.

use nalgebra::{DMatrix, DVector};

use crate::basis::BasisSet;
use crate::error::{Error, Result};

/// Real parts at or above `-HURWITZ_MARGIN` count as unstable.
pub const HURWITZ_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPlantSpec {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl LinearPlantSpec {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        let m = b.ncols();
        if a.ncols() != n || b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
            return Err(Error::Config(format!(
                "inconsistent shapes: A {:?}, B {:?}, Q {:?}, R {:?}",
                a.shape(),
                b.shape(),
                q.shape(),
                r.shape()
            )));
        }
        for (name, mat) in [("Q", &q), ("R", &r)] {
            if (mat - mat.transpose()).amax() > 1e-12 * (1.0 + mat.amax())
                || mat.clone().cholesky().is_none()
            {
                return Err(Error::Config(format!(
                    "{name} must be symmetric positive definite"
                )));
            }
        }
        Ok(Self { a, b, q, r })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    fn r_inv(&self) -> DMatrix<f64> {
        self.r
            .clone()
            .try_inverse()
            .expect("R is positive definite")
    }

    /// `R^{-1} B' P`.
    pub fn gain(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        self.r_inv() * self.b.transpose() * p
    }
}

/// Largest real part among the eigenvalues of `f`.
pub fn spectral_abscissa(f: &DMatrix<f64>) -> f64 {
    f.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(f: &DMatrix<f64>) -> bool {
    spectral_abscissa(f) < -HURWITZ_MARGIN
}

/// Solves `F' P + P F + M = 0` for Hurwitz `F` through the Kronecker
/// form `(I (x) F' + F' (x) I) vec(P) = -vec(M)`.
pub fn lyapunov_solve(f: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = f.nrows();
    if f.ncols() != n || m.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            context: "Lyapunov operands",
            expected: n,
            got: m.nrows(),
        });
    }
    let max_real = spectral_abscissa(f);
    if !(max_real < -HURWITZ_MARGIN) {
        return Err(Error::NotHurwitz { max_real });
    }
    let eye = DMatrix::<f64>::identity(n, n);
    let ft = f.transpose();
    let op = eye.kronecker(&ft) + ft.kronecker(&eye);
    let rhs = -DVector::from_column_slice(m.as_slice());
    let vec_p = op.lu().solve(&rhs).ok_or(Error::NotHurwitz { max_real })?;
    let p = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    Ok(0.5 * (&p + p.transpose()))
}

/// `A'P + PA + Q - P B R^{-1} B' P`.
pub fn are_residual(spec: &LinearPlantSpec, p: &DMatrix<f64>) -> DMatrix<f64> {
    let pb = p * &spec.b;
    spec.a.transpose() * p + p * &spec.a + &spec.q - &pb * spec.r_inv() * pb.transpose()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KleinmanResult {
    pub p: DMatrix<f64>,
    pub k: DMatrix<f64>,
    /// `P_0, P_1, ...`, where `P_i` evaluates gain `K_i`.
    pub iterates: Vec<DMatrix<f64>>,
    /// `K_0, K_1, ...`.
    pub gains: Vec<DMatrix<f64>>,
}

/// Newton iteration on the Riccati equation starting from a stabilizing
/// `k0`. Stops once `|P_{i+1} - P_i|_F <= tol * max(1, |P_i|_F)`.
pub fn kleinman(
    spec: &LinearPlantSpec,
    k0: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<KleinmanResult> {
    let (n, m) = (spec.state_dim(), spec.input_dim());
    if k0.shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            context: "initial gain rows",
            expected: m,
            got: k0.nrows(),
        });
    }
    let mut k = k0.clone();
    let mut iterates: Vec<DMatrix<f64>> = Vec::new();
    let mut gains = vec![k.clone()];
    for i in 0..max_iter {
        let f = &spec.a - &spec.b * &k;
        let rhs = &spec.q + k.transpose() * &spec.r * &k;
        let p = lyapunov_solve(&f, &rhs).map_err(|e| match e {
            Error::NotHurwitz { max_real } => Error::NotStabilizing(format!(
                "closed loop of gain {i} has an eigenvalue with real part {max_real:e}"
            )),
            other => other,
        })?;
        let min_eig = p.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 * p.norm().max(1e-300) {
            return Err(Error::NotStabilizing(format!(
                "value matrix of gain {i} is indefinite (eigenvalue {min_eig:e})"
            )));
        }
        k = spec.gain(&p);
        let done = iterates
            .last()
            .is_some_and(|prev: &DMatrix<f64>| (&p - prev).norm() <= tol * prev.norm().max(1.0));
        iterates.push(p.clone());
        if done {
            return Ok(KleinmanResult {
                p,
                k,
                iterates,
                gains,
            });
        }
        gains.push(k.clone());
    }
    Err(Error::MaxIter(max_iter))
}

/// Symmetric `P` with `x'Px = theta' phi(x)` for a quadratic monomial basis.
pub fn critic_to_matrix(critic: &BasisSet, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = critic.dim();
    if theta.len() != critic.len() {
        return Err(Error::DimensionMismatch {
            context: "critic weight length",
            expected: critic.len(),
            got: theta.len(),
        });
    }
    let mut p = DMatrix::zeros(n, n);
    for (term, w) in critic.terms().iter().zip(theta.iter()) {
        let idx: Vec<usize> = term
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
            .collect();
        match idx.as_slice() {
            [i, j] if i == j => p[(*i, *i)] += w,
            [i, j] => {
                p[(*i, *j)] += 0.5 * w;
                p[(*j, *i)] += 0.5 * w;
            }
            _ => return Err(Error::InvalidBasis("critic term is not quadratic".into())),
        }
    }
    Ok(p)
}

/// Gain `K` with `u = -K x` from per-channel weights on a linear monomial basis.
pub fn actor_to_gain(actor: &BasisSet, weights: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let n = actor.dim();
    let mut k = DMatrix::zeros(weights.len(), n);
    for (l, w) in weights.iter().enumerate() {
        if w.len() != actor.len() {
            return Err(Error::DimensionMismatch {
                context: "actor weight length",
                expected: actor.len(),
                got: w.len(),
            });
        }
        for (term, v) in actor.terms().iter().zip(w.iter()) {
            let i = match term.iter().position(|e| *e == 1) {
                Some(i) if term.iter().sum::<u32>() == 1 => i,
                _ => return Err(Error::InvalidBasis("actor term is not linear".into())),
            };
            k[(l, i)] -= v;
        }
    }
    Ok(k)
}

/// Inverse of [`actor_to_gain`].
pub fn gain_to_actor(actor: &BasisSet, k: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(k.nrows());
    for l in 0..k.nrows() {
        let mut w = DVector::zeros(actor.len());
        for (j, term) in actor.terms().iter().enumerate() {
            let i = match term.iter().position(|e| *e == 1) {
                Some(i) if term.iter().sum::<u32>() == 1 => i,
                _ => return Err(Error::InvalidBasis("actor term is not linear".into())),
            };
            w[j] = -k[(l, i)];
        }
        out.push(w);
    }
    Ok(out)
}
