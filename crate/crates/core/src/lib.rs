//! Data-based approximate policy iteration for continuous-time optimal
//! control of input-affine plants `dx/dt = f(x) + g(x) u`.
//!
//! The model is only used to generate data: [`collect`] excites the plant
//! once and reduces the trajectory to interval integrals, [`api`] iterates
//! actor and critic weights offline by least squares, and [`evaluate`]
//! measures the learned policy on noise-free rollouts. [`lqr`] provides the
//! Riccati reference for linear plants.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod api;
pub mod basis;
pub mod collect;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod evaluate;
pub mod lqr;
pub mod pipeline;
pub mod saturation;

pub use api::{assemble, ls_solve, run_api, ApiOptions, IterationTrace, ThetaVector};
pub use basis::{standard_basis, BasisPair, BasisSet, StandardCase};
pub use collect::{collect, CollectSpec, NoiseSpec, SampleSet};
pub use cost::{CostSpec, Mode};
pub use dynamics::{Case1Plant, LinearPlant, Plant, RtacPlant};
pub use error::{Error, Result};
pub use evaluate::{rollout_cost, Policy, Rollout};
pub use lqr::{kleinman, lyapunov_solve, LinearPlantSpec};
pub use saturation::SaturationSpec;
