//! Offline approximate policy iteration over a collected [`SampleSet`].
//!
//! Each iteration fuses policy evaluation and improvement into one linear
//! regression `Z theta = eta`, where row `k` of `Z` and entry `k` of `eta`
//! come from sample interval `k` and the previous actor weights.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::collect::{trapezoid_weights, RecordCache, SampleRecord, SampleSet};
use crate::error::{Error, Result};
use crate::evaluate::write_file;
use crate::saturation::SaturationSpec;

pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Critic weights and one actor block per input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    pub critic: DVector<f64>,
    pub actor: Vec<DVector<f64>>,
}

impl ThetaVector {
    pub fn new(critic: DVector<f64>, actor: Vec<DVector<f64>>) -> Self {
        Self { critic, actor }
    }

    pub fn len(&self) -> usize {
        self.critic.len() + self.actor.iter().map(|a| a.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `[theta_V; theta_u1; ...; theta_um]`.
    pub fn flat(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.critic.iter());
        for a in &self.actor {
            out.extend(a.iter());
        }
        DVector::from_vec(out)
    }

    pub fn from_flat(
        v: &DVector<f64>,
        critic_len: usize,
        actor_len: usize,
        channels: usize,
    ) -> Result<Self> {
        let expected = critic_len + channels * actor_len;
        if v.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "flattened weight vector",
                expected,
                got: v.len(),
            });
        }
        let critic = v.rows(0, critic_len).into_owned();
        let actor = (0..channels)
            .map(|l| v.rows(critic_len + l * actor_len, actor_len).into_owned())
            .collect();
        Ok(Self { critic, actor })
    }

    pub fn critic_norm(&self) -> f64 {
        self.critic.norm()
    }

    pub fn actor_norm(&self) -> f64 {
        self.actor
            .iter()
            .map(|a| a.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

fn check_actor(samples: &SampleSet, actor: &[DVector<f64>]) -> Result<()> {
    if actor.len() != samples.channels() {
        return Err(Error::DimensionMismatch {
            context: "actor channels",
            expected: samples.channels(),
            got: actor.len(),
        });
    }
    let lu = samples.bases().actor.len();
    for a in actor {
        if a.len() != lu {
            return Err(Error::DimensionMismatch {
                context: "actor weight length",
                expected: lu,
                got: a.len(),
            });
        }
    }
    Ok(())
}

/// Builds one regression row into `row` and returns its target.
fn assemble_row(
    rec: &SampleRecord,
    actor: &[DVector<f64>],
    r_diag: &[f64],
    sat: Option<&SaturationSpec>,
    h: f64,
    row: &mut [f64],
) -> f64 {
    let lv = rec.rho_dphi.len();
    row[..lv].copy_from_slice(rec.rho_dphi.as_slice());
    let mut eta = rec.rho_q;
    match (&rec.cache, sat) {
        (RecordCache::Products(g), _) => {
            for (l, theta) in actor.iter().enumerate() {
                let r = r_diag[l];
                let g_theta = g * theta;
                let lu = theta.len();
                let block = &mut row[lv + l * lu..lv + (l + 1) * lu];
                for j in 0..lu {
                    block[j] = 2.0 * r * (g_theta[j] - rec.rho_upsi[l][j]);
                }
                eta += r * theta.dot(&g_theta);
            }
        }
        (RecordCache::Features(psi), Some(sat)) => {
            let w = trapezoid_weights(psi.nrows(), h);
            for (l, theta) in actor.iter().enumerate() {
                let r = r_diag[l];
                let nu = psi * theta;
                let lu = theta.len();
                let mut sat_psi = vec![0.0; lu];
                let mut penalty = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    let s = wj * sat.sat_scalar(nu[j]);
                    for (c, acc) in sat_psi.iter_mut().enumerate() {
                        *acc += s * psi[(j, c)];
                    }
                    penalty += wj * sat.inner_integral_of_pre(nu[j]);
                }
                let block = &mut row[lv + l * lu..lv + (l + 1) * lu];
                for j in 0..lu {
                    block[j] = 2.0 * r * (sat_psi[j] - rec.rho_upsi[l][j]);
                }
                eta += 2.0 * r * penalty;
            }
        }
        (RecordCache::Features(_), None) => {
            unreachable!("constrained cache without a saturation spec")
        }
    }
    eta
}

/// Regression matrix and target for the iterate with actor weights `actor`.
pub fn assemble(
    samples: &SampleSet,
    actor: &[DVector<f64>],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_actor(samples, actor)?;
    let cols = samples.unknowns();
    let rows = samples.len();
    let cost = samples.cost();
    let mut z = DMatrix::zeros(rows, cols);
    let mut eta = DVector::zeros(rows);
    let mut row = vec![0.0; cols];
    for (k, rec) in samples.records().iter().enumerate() {
        eta[k] = assemble_row(
            rec,
            actor,
            cost.r_diag(),
            cost.saturation(),
            samples.step(),
            &mut row,
        );
        for (c, v) in row.iter().enumerate() {
            z[(k, c)] = *v;
        }
    }
    Ok((z, eta))
}

/// Least-squares solution of `Z theta = eta` through the SVD.
///
/// Singular values below `rank_tol * sigma_max` count as zero; any such
/// value makes the system rank deficient.
pub fn ls_solve(z: &DMatrix<f64>, eta: &DVector<f64>, rank_tol: f64) -> Result<DVector<f64>> {
    if z.nrows() != eta.len() {
        return Err(Error::DimensionMismatch {
            context: "regression rows vs target",
            expected: z.nrows(),
            got: eta.len(),
        });
    }
    let cols = z.ncols();
    if z.nrows() < cols {
        return Err(Error::RankDeficient {
            rank: z.nrows(),
            cols,
        });
    }
    let svd = z.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = rank_tol * smax;
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > cutoff && **s > 0.0)
        .count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, cols });
    }
    svd.solve(eta, cutoff)
        .map_err(|e| Error::Config(e.to_string()))
}

/// Numerical rank of `z` under the relative cutoff.
pub fn numerical_rank(z: &DMatrix<f64>, rank_tol: f64) -> usize {
    let sv = z.singular_values();
    let cutoff = rank_tol * sv.max();
    sv.iter().filter(|s| **s > cutoff && **s > 0.0).count()
}

/// Per-sample residuals `Z theta - eta` of `theta` against the regression
/// built from `actor_prev`.
pub fn sample_residuals(
    samples: &SampleSet,
    actor_prev: &[DVector<f64>],
    theta: &ThetaVector,
) -> Result<DVector<f64>> {
    let (z, eta) = assemble(samples, actor_prev)?;
    let flat = theta.flat();
    if flat.len() != z.ncols() {
        return Err(Error::DimensionMismatch {
            context: "weight vector length",
            expected: z.ncols(),
            got: flat.len(),
        });
    }
    Ok(z * flat - eta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApiOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    pub rank_tol: f64,
}

impl Default for ApiOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStep {
    pub theta: ThetaVector,
    pub critic_norm: f64,
    pub actor_norm: f64,
    /// `|Z theta - eta|` of the solve that produced `theta`.
    pub residual: f64,
    /// Euclidean norm of the change in the full weight vector.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub initial: ThetaVector,
    pub steps: Vec<IterationStep>,
    pub converged: bool,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Last iterate, or the initial weights if no step ran.
    pub fn final_theta(&self) -> &ThetaVector {
        self.steps.last().map_or(&self.initial, |s| &s.theta)
    }

    /// One row per iteration: `i, delta, critic_norm, actor_norm, residual`,
    /// then `wV_1..` and `wu<l>_1..`. Row 0 holds the initial weights.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,delta,critic_norm,actor_norm,residual");
        for j in 1..=self.initial.critic.len() {
            let _ = write!(out, ",wV_{j}");
        }
        for (l, a) in self.initial.actor.iter().enumerate() {
            for j in 1..=a.len() {
                let _ = write!(out, ",wu{}_{j}", l + 1);
            }
        }
        out.push('\n');
        let mut push = |i: usize, delta: f64, residual: f64, t: &ThetaVector| {
            let _ = write!(
                out,
                "{i},{delta},{},{},{residual}",
                t.critic_norm(),
                t.actor_norm()
            );
            for v in t.flat().iter() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        };
        push(0, 0.0, 0.0, &self.initial);
        for (i, s) in self.steps.iter().enumerate() {
            push(i + 1, s.delta, s.residual, &s.theta);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_csv().as_bytes())
    }
}

/// Iterates from `theta_V = 0, theta_u = theta_u0` until the weight change
/// drops to `opts.tolerance` or `opts.max_iter` solves have run. Hitting the
/// limit is reported through `converged = false`, not as an error.
pub fn run_api(
    samples: &SampleSet,
    theta_u0: &[DVector<f64>],
    opts: &ApiOptions,
) -> Result<IterationTrace> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    check_actor(samples, theta_u0)?;
    let (lv, lu, m) = (
        samples.bases().critic.len(),
        samples.bases().actor.len(),
        samples.channels(),
    );
    let initial = ThetaVector::new(DVector::zeros(lv), theta_u0.to_vec());
    let mut prev = initial.clone();
    let mut steps = Vec::new();
    let mut converged = false;
    for i in 1..=opts.max_iter {
        let (z, eta) = assemble(samples, &prev.actor)?;
        let sol = ls_solve(&z, &eta, opts.rank_tol)?;
        let residual = (&z * &sol - &eta).norm();
        let delta = (&sol - prev.flat()).norm();
        if !sol.iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite weights at iteration {i}"
            )));
        }
        let theta = ThetaVector::from_flat(&sol, lv, lu, m)?;
        log::info!(
            "iteration {i}: delta {delta:.3e}, |theta_V| {:.6}, |theta_u| {:.6}, residual {residual:.3e}",
            theta.critic_norm(),
            theta.actor_norm()
        );
        steps.push(IterationStep {
            critic_norm: theta.critic_norm(),
            actor_norm: theta.actor_norm(),
            theta: theta.clone(),
            residual,
            delta,
        });
        prev = theta;
        if delta <= opts.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("no convergence after {} iterations", opts.max_iter);
    }
    Ok(IterationTrace {
        initial,
        steps,
        converged,
    })
}
