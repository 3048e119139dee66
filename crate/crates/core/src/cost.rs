//! Running cost `Q(x) + W(u)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::saturation::SaturationSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `W(u) = u' R u`.
    Unconstrained,
    /// `|u_l| < beta`, with the tanh penalty.
    Constrained { beta: f64 },
}

impl Mode {
    pub fn is_constrained(&self) -> bool {
        matches!(self, Mode::Constrained { .. })
    }
}

/// Quadratic state penalty `Q(x) = x' S x` and a diagonal control weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    state_weight: DMatrix<f64>,
    r_diag: Vec<f64>,
    mode: Mode,
    saturation: Option<SaturationSpec>,
}

impl CostSpec {
    pub fn new(state_weight: DMatrix<f64>, r_diag: Vec<f64>, mode: Mode) -> Result<Self> {
        let n = state_weight.nrows();
        if n == 0 || state_weight.ncols() != n {
            return Err(Error::Config(
                "state weight must be a non-empty square matrix".into(),
            ));
        }
        if (&state_weight - state_weight.transpose()).amax() > 1e-12 * (1.0 + state_weight.amax()) {
            return Err(Error::Config("state weight must be symmetric".into()));
        }
        if state_weight.clone().cholesky().is_none() {
            return Err(Error::Config(
                "state weight must be positive definite".into(),
            ));
        }
        if r_diag.is_empty() || r_diag.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Config("R diagonal entries must be positive".into()));
        }
        let saturation = match mode {
            Mode::Unconstrained => None,
            Mode::Constrained { beta } => Some(SaturationSpec::new(beta, r_diag.clone())?),
        };
        Ok(Self {
            state_weight,
            r_diag,
            mode,
            saturation,
        })
    }

    pub fn diagonal(q_diag: &[f64], r_diag: Vec<f64>, mode: Mode) -> Result<Self> {
        Self::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(q_diag)),
            r_diag,
            mode,
        )
    }

    pub fn state_dim(&self) -> usize {
        self.state_weight.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.r_diag.len()
    }

    pub fn state_weight(&self) -> &DMatrix<f64> {
        &self.state_weight
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn saturation(&self) -> Option<&SaturationSpec> {
        self.saturation.as_ref()
    }

    pub fn state_cost(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.state_weight * x))
    }

    pub fn state_cost_slice(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += x[i] * self.state_weight[(i, j)] * x[j];
            }
        }
        acc
    }

    /// `W(u)` for an externally supplied input.
    pub fn control_cost(&self, u: &DVector<f64>) -> Result<f64> {
        match &self.saturation {
            None => Ok(u.iter().zip(&self.r_diag).map(|(v, r)| r * v * v).sum()),
            Some(sat) => sat.w_cost(u),
        }
    }
}
