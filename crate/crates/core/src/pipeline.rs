//! Run configuration and the collect -> iterate -> evaluate pipeline.
//!
//! Configurations are TOML documents:
//!
//! ```toml
//! [plant]
//! id = "case1"            # case1 | rtac | linear
//!
//! [cost]
//! q_diag = [1.0, 1.0]     # or q = [[..], [..]]
//! r_diag = [1.0]
//! mode = "unconstrained"  # or "constrained" with beta = 0.2
//!
//! [basis]
//! kind = "case1"          # case1 | rtac | quadratic | custom (critic/actor files)
//!
//! [noise]
//! seed = 1
//!
//! [sampling]
//! samples = 41
//!
//! [iteration]
//! theta_u0 = [[-5.0, -5.0, -5.0, -5.0, -5.0]]
//!
//! [evaluate]
//! t_end = 20.0
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::api::{run_api, ApiOptions, IterationTrace, ThetaVector};
use crate::basis::{quadratic_linear_basis, standard_basis, BasisPair, BasisSet, StandardCase};
use crate::collect::{collect, CollectSpec, NoiseSpec, SampleSet};
use crate::cost::{CostSpec, Mode};
use crate::dynamics::{rows_to_matrix, Case1Plant, LinearPlant, Plant, Reinitialized, RtacPlant};
use crate::error::{Error, Result};
use crate::evaluate::{rollout_cost, write_file, Policy, Rollout};
use crate::lqr::{actor_to_gain, kleinman, LinearPlantSpec};

pub const TRACE_FILE: &str = "trace.csv";
pub const ROLLOUT_INITIAL_FILE: &str = "rollout_initial.csv";
pub const ROLLOUT_FINAL_FILE: &str = "rollout_final.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const THETA_FILE: &str = "theta.toml";
pub const ORACLE_FILE: &str = "oracle.csv";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Process exit status for a failed run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::MaxIter(_) => EXIT_NOT_CONVERGED,
        Error::RankDeficient { .. }
        | Error::Diverged { .. }
        | Error::NonFiniteState { .. }
        | Error::NotHurwitz { .. }
        | Error::NotStabilizing(_)
        | Error::OutOfRange { .. }
        | Error::Format { .. } => EXIT_DATA,
        Error::GridMismatch { .. }
        | Error::DimensionMismatch { .. }
        | Error::UnknownCase(_)
        | Error::InvalidBasis(_)
        | Error::Config(_) => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_diag: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    pub r_diag: Vec<f64>,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

fn default_mode() -> String {
    "unconstrained".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critic: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actor: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_freq_min")]
    pub freq_min: f64,
    #[serde(default = "default_freq_max")]
    pub freq_max: f64,
    pub seed: u64,
}

fn default_amplitude() -> f64 {
    0.05
}
fn default_k_max() -> usize {
    100
}
fn default_freq_min() -> f64 {
    -100.0
}
fn default_freq_max() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub samples: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_dt() -> f64 {
    0.1
}
fn default_h() -> f64 {
    crate::dynamics::DEFAULT_STEP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    /// One weight row per input channel; omitted means all zero.
    #[serde(default)]
    pub theta_u0: Vec<Vec<f64>>,
}

fn default_tolerance() -> f64 {
    crate::api::DEFAULT_TOLERANCE
}
fn default_max_iter() -> usize {
    crate::api::DEFAULT_MAX_ITER
}
fn default_rank_tol() -> f64 {
    crate::api::DEFAULT_RANK_TOL
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iter: default_max_iter(),
            rank_tol: default_rank_tol(),
            theta_u0: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
}

fn default_t_end() -> f64 {
    20.0
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub plant: PlantConfig,
    pub cost: CostConfig,
    pub basis: BasisConfig,
    pub noise: NoiseConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub iteration: IterationConfig,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    /// Directory against which relative file paths resolve.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "run".into()
}

/// The bundled benchmark settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Case1,
    RtacUnconstrained,
    RtacConstrained,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [
        CaseId::Case1,
        CaseId::RtacUnconstrained,
        CaseId::RtacConstrained,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::RtacUnconstrained => "rtac-unconstrained",
            CaseId::RtacConstrained => "rtac-constrained",
        }
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

fn rtac_theta_u0() -> Vec<Vec<f64>> {
    let mut w = vec![0.0; 46];
    w[..4].copy_from_slice(&[1.0, 1.0, -0.7, -2.0]);
    vec![w]
}

impl RunConfig {
    pub fn preset(case: CaseId, seed: u64) -> Self {
        let noise = NoiseConfig {
            amplitude: default_amplitude(),
            k_max: default_k_max(),
            freq_min: default_freq_min(),
            freq_max: default_freq_max(),
            seed,
        };
        let plant = |id: &str| PlantConfig {
            id: id.into(),
            zeta: None,
            file: None,
            a: None,
            b: None,
            x0: None,
        };
        let iteration = |theta_u0| IterationConfig {
            theta_u0,
            ..IterationConfig::default()
        };
        match case {
            CaseId::Case1 => RunConfig {
                name: case.name().into(),
                plant: plant("case1"),
                cost: CostConfig {
                    q_diag: Some(vec![1.0, 1.0]),
                    q: None,
                    r_diag: vec![1.0],
                    mode: default_mode(),
                    beta: None,
                },
                basis: BasisConfig {
                    kind: "case1".into(),
                    critic: None,
                    actor: None,
                },
                noise,
                sampling: SamplingConfig {
                    samples: 41,
                    dt: 0.1,
                    h: default_h(),
                },
                iteration: iteration(vec![vec![-5.0; 5]]),
                evaluate: EvaluateConfig { t_end: 20.0 },
                base_dir: PathBuf::new(),
            },
            CaseId::RtacUnconstrained | CaseId::RtacConstrained => {
                let constrained = case == CaseId::RtacConstrained;
                RunConfig {
                    name: case.name().into(),
                    plant: plant("rtac"),
                    cost: CostConfig {
                        q_diag: Some(vec![0.5, 0.05, 0.05, 0.05]),
                        q: None,
                        r_diag: vec![1.0],
                        mode: if constrained {
                            "constrained".into()
                        } else {
                            default_mode()
                        },
                        beta: constrained.then_some(0.2),
                    },
                    basis: BasisConfig {
                        kind: "rtac".into(),
                        critic: None,
                        actor: None,
                    },
                    noise,
                    sampling: SamplingConfig {
                        samples: 1001,
                        dt: 0.1,
                        h: default_h(),
                    },
                    iteration: iteration(rtac_theta_u0()),
                    evaluate: EvaluateConfig { t_end: 100.0 },
                    base_dir: PathBuf::new(),
                }
            }
        }
    }

    /// Parses a configuration; syntax and schema errors carry line numbers.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.prepare().map_err(|e| match e {
            Error::Config(msg) => Error::Config(locate(text, &msg)),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Validates every field and builds the runtime objects.
    pub fn prepare(&self) -> Result<Prepared> {
        let bad = |key: &str, msg: String| Error::Config(format!("[{key}] {msg}"));

        let (plant, linear): (Box<dyn Plant>, Option<LinearPlant>) = match self.plant.id.as_str() {
            "case1" => (Box::new(Case1Plant::new()), None),
            "rtac" => {
                let zeta = self.plant.zeta.unwrap_or(0.2);
                if !(zeta.is_finite() && zeta.abs() < 1.0) {
                    return Err(bad(
                        "plant.zeta",
                        format!("coupling must satisfy |zeta| < 1, got {zeta}"),
                    ));
                }
                (Box::new(RtacPlant::new(zeta)), None)
            }
            "linear" => {
                let lp = match (&self.plant.file, &self.plant.a, &self.plant.b) {
                    (Some(f), None, None) => LinearPlant::load(&self.resolve(f))?,
                    (None, Some(a), Some(b)) => {
                        let a = rows_to_matrix(a)
                            .ok_or_else(|| bad("plant.a", "ragged matrix".into()))?;
                        let b = rows_to_matrix(b)
                            .ok_or_else(|| bad("plant.b", "ragged matrix".into()))?;
                        let x0 = self.plant.x0.clone().ok_or_else(|| {
                            bad("plant.x0", "required for an inline linear plant".into())
                        })?;
                        LinearPlant::new(a, b, DVector::from_vec(x0))
                            .map_err(|e| bad("plant.a", e.to_string()))?
                    }
                    _ => return Err(bad("plant.file", "give either file or both a and b".into())),
                };
                (Box::new(lp.clone()), Some(lp))
            }
            other => return Err(bad("plant.id", format!("unknown plant '{other}'"))),
        };
        let plant: Box<dyn Plant> = match &self.plant.x0 {
            Some(x0) if self.plant.id != "linear" || self.plant.file.is_some() => Box::new(
                Reinitialized::new(plant, DVector::from_vec(x0.clone()))
                    .map_err(|e| bad("plant.x0", e.to_string()))?,
            ),
            _ => plant,
        };
        let (n, m) = (plant.state_dim(), plant.input_dim());

        let mode = match (self.cost.mode.as_str(), self.cost.beta) {
            ("unconstrained", None) => Mode::Unconstrained,
            ("unconstrained", Some(_)) => {
                return Err(bad("cost.beta", "only valid in constrained mode".into()))
            }
            ("constrained", Some(beta)) => Mode::Constrained { beta },
            ("constrained", None) => {
                return Err(bad("cost.beta", "constrained mode needs a bound".into()))
            }
            (other, _) => return Err(bad("cost.mode", format!("unknown mode '{other}'"))),
        };
        let q = match (&self.cost.q_diag, &self.cost.q) {
            (Some(d), None) => DMatrix::from_diagonal(&DVector::from_vec(d.clone())),
            (None, Some(rows)) => {
                rows_to_matrix(rows).ok_or_else(|| bad("cost.q", "ragged matrix".into()))?
            }
            _ => {
                return Err(bad(
                    "cost.q_diag",
                    "give exactly one of q_diag and q".into(),
                ))
            }
        };
        if q.nrows() != n {
            return Err(bad(
                "cost.q_diag",
                format!("expected {n} state weights, got {}", q.nrows()),
            ));
        }
        if self.cost.r_diag.len() != m {
            return Err(bad(
                "cost.r_diag",
                format!("expected {m} input weights, got {}", self.cost.r_diag.len()),
            ));
        }
        let cost = CostSpec::new(q, self.cost.r_diag.clone(), mode)
            .map_err(|e| bad("cost.r_diag", e.to_string()))?;

        let bases = match self.basis.kind.as_str() {
            "case1" => standard_basis(StandardCase::Case1),
            "rtac" => standard_basis(StandardCase::Rtac),
            "quadratic" => quadratic_linear_basis(n)?,
            "custom" => {
                let load = |key: &str, p: &Option<PathBuf>| -> Result<BasisSet> {
                    let p = p
                        .as_ref()
                        .ok_or_else(|| bad(key, "file required for a custom basis".into()))?;
                    BasisSet::load(&self.resolve(p))
                };
                BasisPair {
                    critic: load("basis.critic", &self.basis.critic)?,
                    actor: load("basis.actor", &self.basis.actor)?,
                }
            }
            other => return Err(bad("basis.kind", format!("unknown basis '{other}'"))),
        };
        if bases.critic.dim() != n || bases.actor.dim() != n {
            return Err(bad(
                "basis.kind",
                format!("basis dimension does not match the {n}-state plant"),
            ));
        }

        let nz = &self.noise;
        if !(nz.amplitude >= 0.0) || nz.k_max == 0 || !(nz.freq_min <= nz.freq_max) {
            return Err(bad(
                "noise.amplitude",
                "amplitude >= 0, k_max > 0 and freq_min <= freq_max required".into(),
            ));
        }
        let s = &self.sampling;
        if s.samples == 0 {
            return Err(bad("sampling.samples", "must be positive".into()));
        }
        if !(s.dt > 0.0) {
            return Err(bad("sampling.dt", "must be positive".into()));
        }
        if !(s.h > 0.0) {
            return Err(bad("sampling.h", "must be positive".into()));
        }
        crate::dynamics::steps_per_interval(s.dt, s.h)
            .map_err(|e| bad("sampling.h", e.to_string()))?;

        let it = &self.iteration;
        if !(it.tolerance > 0.0) || it.max_iter == 0 || !(it.rank_tol > 0.0) {
            return Err(bad(
                "iteration.tolerance",
                "tolerance, max_iter and rank_tol must be positive".into(),
            ));
        }
        let lu = bases.actor.len();
        let theta_u0: Vec<DVector<f64>> = if it.theta_u0.is_empty() {
            vec![DVector::zeros(lu); m]
        } else {
            if it.theta_u0.len() != m || it.theta_u0.iter().any(|w| w.len() != lu) {
                return Err(bad(
                    "iteration.theta_u0",
                    format!("expected {m} row(s) of {lu} actor weights"),
                ));
            }
            it.theta_u0
                .iter()
                .map(|w| DVector::from_vec(w.clone()))
                .collect()
        };
        if !(self.evaluate.t_end > 0.0) {
            return Err(bad("evaluate.t_end", "must be positive".into()));
        }

        let oracle = match (&linear, mode, self.basis.kind.as_str()) {
            (Some(lp), Mode::Unconstrained, "quadratic") => Some(LinearPlantSpec::new(
                lp.a().clone(),
                lp.b().clone(),
                cost.state_weight().clone(),
                DMatrix::from_diagonal(&DVector::from_vec(cost.r_diag().to_vec())),
            )?),
            _ => None,
        };

        Ok(Prepared {
            plant,
            bases,
            cost,
            collect: CollectSpec {
                samples: s.samples,
                dt: s.dt,
                h: s.h,
                noise: NoiseSpec {
                    amplitude: nz.amplitude,
                    k_max: nz.k_max,
                    freq_range: (nz.freq_min, nz.freq_max),
                    seed: nz.seed,
                },
            },
            theta_u0,
            options: ApiOptions {
                tolerance: it.tolerance,
                max_iter: it.max_iter,
                rank_tol: it.rank_tol,
            },
            t_end: self.evaluate.t_end,
            oracle,
        })
    }
}

/// Prefixes a `[section.key] ...` validation message with its line.
fn locate(text: &str, msg: &str) -> String {
    let Some(path) = msg
        .strip_prefix('[')
        .and_then(|r| r.split_once(']'))
        .map(|(p, _)| p)
    else {
        return msg.to_string();
    };
    let (section, key) = path.split_once('.').unwrap_or((path, ""));
    let mut in_section = false;
    let mut header_line = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_section = t.trim_matches(|c| c == '[' || c == ']').trim() == section;
            if in_section {
                header_line = Some(i + 1);
            }
            continue;
        }
        if in_section && !key.is_empty() {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return format!("line {}: {msg}", i + 1);
                }
            }
        }
    }
    match header_line {
        Some(l) => format!("line {l}: {msg}"),
        None => msg.to_string(),
    }
}

/// Validated runtime objects for one configuration.
pub struct Prepared {
    pub plant: Box<dyn Plant>,
    pub bases: BasisPair,
    pub cost: CostSpec,
    pub collect: CollectSpec,
    pub theta_u0: Vec<DVector<f64>>,
    pub options: ApiOptions,
    pub t_end: f64,
    /// Riccati reference, for linear plants with the quadratic basis.
    pub oracle: Option<LinearPlantSpec>,
}

impl Prepared {
    pub fn policy(&self, actor: &[DVector<f64>]) -> Result<Policy> {
        Policy::new(
            self.bases.actor.clone(),
            actor.to_vec(),
            self.cost.saturation().cloned(),
        )
    }

    pub fn rollout(&self, actor: &[DVector<f64>]) -> Result<Rollout> {
        rollout_cost(
            &self.plant,
            &self.policy(actor)?,
            &self.cost,
            self.t_end,
            self.collect.h,
        )
    }

    pub fn collect(&self) -> Result<SampleSet> {
        collect(
            &self.plant,
            &self.theta_u0,
            &self.bases,
            &self.cost,
            &self.collect,
        )
    }

    pub fn iterate(&self, samples: &SampleSet) -> Result<IterationTrace> {
        if samples.bases() != &self.bases || samples.cost() != &self.cost {
            return Err(Error::Config(
                "sample bundle was collected with a different basis or cost".into(),
            ));
        }
        run_api(samples, &self.theta_u0, &self.options)
    }

    /// Riccati solution started from the initial actor's gain.
    pub fn oracle_solution(&self) -> Result<Option<crate::lqr::KleinmanResult>> {
        let Some(spec) = &self.oracle else {
            return Ok(None);
        };
        let k0 = actor_to_gain(&self.bases.actor, &self.theta_u0)?;
        kleinman(spec, &k0, 1e-13, 200).map(Some)
    }
}

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub critic_norm: f64,
    pub actor_norm: f64,
    pub j_initial: f64,
    pub j_final: f64,
    pub max_abs_input: f64,
    /// Learned and reference gains for linear plants.
    pub gains: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl RunSummary {
    pub fn reduction_pct(&self) -> f64 {
        100.0 * (self.j_initial - self.j_final) / self.j_initial
    }

    /// Header row plus one value row.
    pub fn to_csv(&self) -> String {
        let mut head = String::from(
            "name,seed,converged,iterations,critic_norm,actor_norm,J_initial,J_final,reduction_pct,max_abs_u",
        );
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.name,
            self.seed,
            self.converged,
            self.iterations,
            self.critic_norm,
            self.actor_norm,
            self.j_initial,
            self.j_final,
            self.reduction_pct(),
            self.max_abs_input
        );
        if let Some((learned, oracle)) = &self.gains {
            for (tag, k) in [("K_learned", learned), ("K_oracle", oracle)] {
                for i in 0..k.nrows() {
                    for j in 0..k.ncols() {
                        let _ = write!(head, ",{tag}_{}_{}", i + 1, j + 1);
                        let _ = write!(row, ",{}", k[(i, j)]);
                    }
                }
            }
        }
        format!("{head}\n{row}\n")
    }
}

/// Everything a full run produces.
pub struct RunOutcome {
    pub trace: IterationTrace,
    pub initial: Rollout,
    pub last: Rollout,
    pub summary: RunSummary,
}

/// Learned and Riccati gains `(K, K_ric)` for linear plants.
pub fn linear_gains(
    prep: &Prepared,
    theta: &ThetaVector,
) -> Result<Option<(DMatrix<f64>, DMatrix<f64>)>> {
    let Some(sol) = prep.oracle_solution()? else {
        return Ok(None);
    };
    let k = actor_to_gain(&prep.bases.actor, &theta.actor)?;
    Ok(Some((k, sol.k)))
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

/// Evaluates the initial and learned policies and writes the artifacts.
fn finish(
    cfg: &RunConfig,
    prep: &Prepared,
    trace: IterationTrace,
    out: &Path,
) -> Result<RunOutcome> {
    let initial = prep.rollout(&prep.theta_u0)?;
    let theta = trace.final_theta().clone();
    let last = prep.rollout(&theta.actor)?;
    let gains = linear_gains(prep, &theta)?;
    let summary = RunSummary {
        name: cfg.name.clone(),
        seed: cfg.noise.seed,
        converged: trace.converged,
        iterations: trace.iterations(),
        critic_norm: theta.critic_norm(),
        actor_norm: theta.actor_norm(),
        j_initial: initial.final_cost(),
        j_final: last.final_cost(),
        max_abs_input: last.max_abs_input(),
        gains,
    };
    trace.write_csv(&out.join(TRACE_FILE))?;
    write_theta(&out.join(THETA_FILE), &theta)?;
    initial.write_csv(&out.join(ROLLOUT_INITIAL_FILE))?;
    last.write_csv(&out.join(ROLLOUT_FINAL_FILE))?;
    write_file(&out.join(SUMMARY_FILE), summary.to_csv().as_bytes())?;
    Ok(RunOutcome {
        trace,
        initial,
        last,
        summary,
    })
}

/// Full pipeline: collect, iterate, evaluate, write artifacts to `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let prep = cfg.prepare()?;
    ensure_dir(out)?;
    let samples = prep.collect()?;
    let trace = prep.iterate(&samples)?;
    finish(cfg, &prep, trace, out)
}

/// Collects and persists the sample bundle into `out`.
pub fn run_collect(cfg: &RunConfig, out: &Path) -> Result<SampleSet> {
    let prep = cfg.prepare()?;
    let samples = prep.collect()?;
    samples.save(out)?;
    Ok(samples)
}

/// Iterates on a persisted bundle, then evaluates as [`run`] does.
pub fn run_iterate(cfg: &RunConfig, samples_dir: &Path, out: &Path) -> Result<RunOutcome> {
    let prep = cfg.prepare()?;
    let samples = SampleSet::load(samples_dir)?;
    ensure_dir(out)?;
    let trace = prep.iterate(&samples)?;
    finish(cfg, &prep, trace, out)
}

/// Rolls out the policy stored in a weight file and writes `rollout_final.csv`.
pub fn run_evaluate(cfg: &RunConfig, theta_path: &Path, out: &Path) -> Result<Rollout> {
    let prep = cfg.prepare()?;
    let theta = read_theta(theta_path)?;
    ensure_dir(out)?;
    let r = prep.rollout(&theta.actor)?;
    r.write_csv(&out.join(ROLLOUT_FINAL_FILE))?;
    Ok(r)
}

/// Riccati reference for a linear configuration, written to `oracle.csv`
/// as `kind,i,j,value` rows.
pub fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<crate::lqr::KleinmanResult> {
    let prep = cfg.prepare()?;
    let sol = prep.oracle_solution()?.ok_or_else(|| {
        Error::Config(
            "the oracle needs a linear plant, quadratic basis and unconstrained cost".into(),
        )
    })?;
    ensure_dir(out)?;
    let mut text = String::from("kind,i,j,value\n");
    for (tag, mat) in [("P", &sol.p), ("K", &sol.k)] {
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                let _ = writeln!(text, "{tag},{},{},{}", i + 1, j + 1, mat[(i, j)]);
            }
        }
    }
    write_file(&out.join(ORACLE_FILE), text.as_bytes())?;
    Ok(sol)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThetaFile {
    critic: Vec<f64>,
    actor: Vec<Vec<f64>>,
}

pub fn write_theta(path: &Path, theta: &ThetaVector) -> Result<()> {
    let file = ThetaFile {
        critic: theta.critic.iter().copied().collect(),
        actor: theta
            .actor
            .iter()
            .map(|a| a.iter().copied().collect())
            .collect(),
    };
    let text = toml::to_string(&file).map_err(|e| Error::format(path, e.to_string()))?;
    write_file(path, text.as_bytes())
}

pub fn read_theta(path: &Path) -> Result<ThetaVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ThetaFile = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(ThetaVector::new(
        DVector::from_vec(file.critic),
        file.actor.into_iter().map(DVector::from_vec).collect(),
    ))
}
