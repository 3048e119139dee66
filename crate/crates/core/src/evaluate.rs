//! Executable policies and closed-loop cost evaluation.

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use crate::basis::BasisSet;
use crate::collect::trapezoid_step;
use crate::cost::CostSpec;
use crate::dynamics::{simulate, Plant, Trajectory, DEFAULT_BLOW_UP};
use crate::error::{Error, Result};
use crate::saturation::SaturationSpec;

/// `nu_l(x) = psi(x)' theta_l`, optionally passed through the saturation.
#[derive(Debug, Clone)]
pub struct Policy {
    actor: BasisSet,
    weights: Vec<DVector<f64>>,
    saturation: Option<SaturationSpec>,
}

impl Policy {
    pub fn new(
        actor: BasisSet,
        weights: Vec<DVector<f64>>,
        saturation: Option<SaturationSpec>,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "policy channels",
                expected: 1,
                got: 0,
            });
        }
        for w in &weights {
            if w.len() != actor.len() {
                return Err(Error::DimensionMismatch {
                    context: "actor weight length",
                    expected: actor.len(),
                    got: w.len(),
                });
            }
        }
        if let Some(s) = &saturation {
            if s.channels() != weights.len() {
                return Err(Error::DimensionMismatch {
                    context: "saturated channels",
                    expected: weights.len(),
                    got: s.channels(),
                });
            }
        }
        Ok(Self {
            actor,
            weights,
            saturation,
        })
    }

    pub fn channels(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[DVector<f64>] {
        &self.weights
    }

    pub fn saturation(&self) -> Option<&SaturationSpec> {
        self.saturation.as_ref()
    }

    /// Output before saturation.
    pub fn pre_saturation(&self, x: &DVector<f64>) -> DVector<f64> {
        let psi = self.actor.eval(x);
        DVector::from_iterator(self.weights.len(), self.weights.iter().map(|w| psi.dot(w)))
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let nu = self.pre_saturation(x);
        match &self.saturation {
            Some(s) => s.sat(&nu),
            None => nu,
        }
    }
}

/// A noise-free closed-loop run with its accumulated cost.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub trajectory: Trajectory,
    /// `J(t)` at every node of the trajectory.
    pub cost: Vec<f64>,
}

impl Rollout {
    pub fn final_cost(&self) -> f64 {
        *self.cost.last().expect("rollout has at least one node")
    }

    pub fn max_abs_input(&self) -> f64 {
        self.trajectory
            .inputs
            .iter()
            .flat_map(|u| u.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Columns: `t, x1..xn, u1..um, J`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let traj = &self.trajectory;
        let n = traj.states.first().map_or(0, |x| x.len());
        let m = traj.inputs.first().map_or(0, |u| u.len());
        let mut out = String::new();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("u{i}")));
        header.push("J".into());
        out.push_str(&header.join(","));
        out.push('\n');
        for k in 0..traj.len() {
            let mut row = vec![traj.times[k].to_string()];
            row.extend(traj.states[k].iter().map(f64::to_string));
            row.extend(traj.inputs[k].iter().map(f64::to_string));
            row.push(self.cost[k].to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        write_file(path, out.as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Runs the policy from the plant's initial state over `[0, t_end]` and
/// accumulates `J(t) = integral (Q + W)` with the trapezoid rule on the
/// integration grid.
pub fn rollout_cost<P: Plant + ?Sized>(
    plant: &P,
    policy: &Policy,
    cost: &CostSpec,
    t_end: f64,
    h: f64,
) -> Result<Rollout> {
    if policy.channels() != plant.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "policy channels vs plant inputs",
            expected: plant.input_dim(),
            got: policy.channels(),
        });
    }
    if cost.state_dim() != plant.state_dim() || cost.input_dim() != plant.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "cost dimensions vs plant",
            expected: plant.state_dim(),
            got: cost.state_dim(),
        });
    }
    let law = |_: f64, x: &DVector<f64>| policy.eval(x);
    let trajectory = simulate(plant, &law, t_end, h, h, DEFAULT_BLOW_UP)?;
    let running: Vec<f64> = trajectory
        .states
        .iter()
        .zip(&trajectory.inputs)
        .map(|(x, u)| running_cost(policy, cost, x, u))
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    let mut j = Vec::with_capacity(running.len());
    j.push(0.0);
    for w in running.windows(2) {
        acc += trapezoid_step(w[0], w[1], h);
        j.push(acc);
    }
    Ok(Rollout {
        trajectory,
        cost: j,
    })
}

fn running_cost(
    policy: &Policy,
    cost: &CostSpec,
    x: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<f64> {
    let q = cost.state_cost(x);
    let w = match (cost.saturation(), policy.saturation()) {
        // Saturated inputs may round onto the bound, so go through the
        // pre-saturation value.
        (Some(sat), Some(_)) => sat.w_cost_of_pre(&policy.pre_saturation(x)),
        _ => cost.control_cost(u)?,
    };
    Ok(q + w)
}
