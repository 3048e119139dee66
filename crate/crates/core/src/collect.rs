//! Online data collection.
//!
//! Runs the plant once under the initial policy plus an exploratory
//! sum-of-sines signal and turns each sample interval `[t_k, t_k + dt]`
//! into the integrals the offline iteration regresses on:
//!
//! * `rho_dphi = phi(x(t_k)) - phi(x(t_k + dt))`
//! * `rho_q    = integral Q(x)`
//! * `rho_upsi = integral u_l psi(x)` per channel
//!
//! plus whatever the offline step needs to rebuild the iterate-dependent
//! terms: `integral psi psi'` in unconstrained mode, or the actor features
//! at every fine node in constrained mode.

use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisPair, BasisSet};
use crate::cost::{CostSpec, Mode};
use crate::dynamics::{
    rows_to_matrix, simulate, steps_per_interval, Plant, Trajectory, DEFAULT_BLOW_UP,
};
use crate::error::{Error, Result};
use crate::evaluate::{write_file, Policy};

/// Bundle layout version written into the manifest.
pub const BUNDLE_VERSION: u32 = 1;
/// Below `SAMPLE_MARGIN * unknowns` samples a warning is logged.
pub const SAMPLE_MARGIN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub k_max: usize,
    pub freq_range: (f64, f64),
    pub seed: u64,
}

impl NoiseSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            amplitude: 0.05,
            k_max: 100,
            freq_range: (-100.0, 100.0),
            seed,
        }
    }

    pub fn silent() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::with_seed(0)
        }
    }
}

/// `e_l(t) = amplitude * sum_k sin(r_{l,k} t)` with frequencies fixed at
/// construction.
#[derive(Debug, Clone)]
pub struct ExplorationNoise {
    amplitude: f64,
    freqs: Vec<Vec<f64>>,
}

impl ExplorationNoise {
    pub fn channels(&self) -> usize {
        self.freqs.len()
    }

    pub fn frequencies(&self, channel: usize) -> &[f64] {
        &self.freqs[channel]
    }

    pub fn eval_channel(&self, channel: usize, t: f64) -> f64 {
        self.amplitude
            * self.freqs[channel]
                .iter()
                .map(|r| (r * t).sin())
                .sum::<f64>()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        DVector::from_fn(self.freqs.len(), |l, _| self.eval_channel(l, t))
    }
}

pub fn make_noise(spec: &NoiseSpec, channels: usize) -> Result<ExplorationNoise> {
    let (lo, hi) = spec.freq_range;
    if !(spec.amplitude >= 0.0)
        || spec.k_max == 0
        || !(lo <= hi)
        || !lo.is_finite()
        || !hi.is_finite()
    {
        return Err(Error::Config(format!("invalid exploration noise {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let freqs = (0..channels)
        .map(|_| (0..spec.k_max).map(|_| rng.gen_range(lo..=hi)).collect())
        .collect();
    Ok(ExplorationNoise {
        amplitude: spec.amplitude,
        freqs,
    })
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 2, "quadrature needs at least two nodes");
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * (values[0] + values[values.len() - 1]) + inner)
}

/// Trapezoid weights for `nodes` equally spaced points.
pub fn trapezoid_weights(nodes: usize, h: f64) -> Vec<f64> {
    assert!(nodes >= 2, "quadrature needs at least two nodes");
    let mut w = vec![h; nodes];
    w[0] = 0.5 * h;
    w[nodes - 1] = 0.5 * h;
    w
}

pub(crate) fn trapezoid_step(a: f64, b: f64, h: f64) -> f64 {
    0.5 * h * (a + b)
}

/// Iterate-independent data kept per record.
#[derive(Debug, Clone, PartialEq)]
pub enum RecordCache {
    /// `integral psi psi'` (unconstrained mode).
    Products(DMatrix<f64>),
    /// Actor features at each fine node, one row per node (constrained mode).
    Features(DMatrix<f64>),
}

impl RecordCache {
    fn build(nodes: &DMatrix<f64>, actor: &BasisSet, h: f64, mode: Mode) -> Self {
        let count = nodes.nrows();
        let lu = actor.len();
        let mut features = DMatrix::zeros(count, lu);
        let mut row = vec![0.0; lu];
        for j in 0..count {
            let x: Vec<f64> = nodes.row(j).iter().copied().collect();
            actor.eval_into(&x, &mut row);
            for (c, v) in row.iter().enumerate() {
                features[(j, c)] = *v;
            }
        }
        match mode {
            Mode::Constrained { .. } => RecordCache::Features(features),
            Mode::Unconstrained => {
                let w = trapezoid_weights(count, h);
                let mut g = DMatrix::zeros(lu, lu);
                for a in 0..lu {
                    for b in a..lu {
                        let mut acc = 0.0;
                        for (j, wj) in w.iter().enumerate() {
                            acc += wj * features[(j, a)] * features[(j, b)];
                        }
                        g[(a, b)] = acc;
                        g[(b, a)] = acc;
                    }
                }
                RecordCache::Products(g)
            }
        }
    }
}

/// The regressor integrals of one sample interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub t_start: f64,
    pub rho_dphi: DVector<f64>,
    pub rho_q: f64,
    pub rho_upsi: Vec<DVector<f64>>,
    /// Fine-grid states over the interval, one row per node.
    pub nodes: DMatrix<f64>,
    pub cache: RecordCache,
}

/// Integrates one interval of the fine grid, `range` being node indices
/// (inclusive start, exclusive end, at least two nodes).
pub fn integrate_interval(
    traj: &Trajectory,
    range: Range<usize>,
    bases: &BasisPair,
    cost: &CostSpec,
    h: f64,
) -> SampleRecord {
    let (first, last) = (range.start, range.end - 1);
    assert!(last > first, "an interval needs at least two nodes");
    let count = range.len();
    let n = traj.states[first].len();
    let nodes = DMatrix::from_fn(count, n, |j, d| traj.states[first + j][d]);
    let rho_dphi = bases.critic.eval(&traj.states[first]) - bases.critic.eval(&traj.states[last]);

    let w = trapezoid_weights(count, h);
    let q: Vec<f64> = range
        .clone()
        .map(|k| cost.state_cost(&traj.states[k]))
        .collect();
    let rho_q = trapezoid(&q, h);

    let m = traj.inputs[first].len();
    let mut rho_upsi = vec![DVector::zeros(bases.actor.len()); m];
    for (j, k) in range.enumerate() {
        let psi = bases.actor.eval(&traj.states[k]);
        for (l, acc) in rho_upsi.iter_mut().enumerate() {
            acc.axpy(w[j] * traj.inputs[k][l], &psi, 1.0);
        }
    }
    let cache = RecordCache::build(&nodes, &bases.actor, h, cost.mode());
    SampleRecord {
        t_start: traj.times[first],
        rho_dphi,
        rho_q,
        rho_upsi,
        nodes,
        cache,
    }
}

/// Everything the offline iteration needs; immutable once collected.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    records: Vec<SampleRecord>,
    dt: f64,
    h: f64,
    bases: BasisPair,
    cost: CostSpec,
}

impl SampleSet {
    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn bases(&self) -> &BasisPair {
        &self.bases
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn mode(&self) -> Mode {
        self.cost.mode()
    }

    pub fn channels(&self) -> usize {
        self.cost.input_dim()
    }

    /// Number of unknowns `L_V + m L_u`.
    pub fn unknowns(&self) -> usize {
        self.bases.critic.len() + self.channels() * self.bases.actor.len()
    }
}

/// Settings for one excited data-collection run.
#[derive(Debug, Clone)]
pub struct CollectSpec {
    pub samples: usize,
    pub dt: f64,
    pub h: f64,
    pub noise: NoiseSpec,
}

/// Closed-loop excitation and regressor integration.
pub fn collect<P: Plant + ?Sized>(
    plant: &P,
    theta_u0: &[DVector<f64>],
    bases: &BasisPair,
    cost: &CostSpec,
    spec: &CollectSpec,
) -> Result<SampleSet> {
    let (n, m) = (plant.state_dim(), plant.input_dim());
    for (ctx, expected, got) in [
        ("critic basis dimension", n, bases.critic.dim()),
        ("actor basis dimension", n, bases.actor.dim()),
        ("cost state dimension", n, cost.state_dim()),
        ("cost input dimension", m, cost.input_dim()),
        ("initial actor channels", m, theta_u0.len()),
    ] {
        if expected != got {
            return Err(Error::DimensionMismatch {
                context: ctx,
                expected,
                got,
            });
        }
    }
    if spec.samples == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    let per = steps_per_interval(spec.dt, spec.h)?;
    let unknowns = bases.critic.len() + m * bases.actor.len();
    if spec.samples < SAMPLE_MARGIN * unknowns {
        log::warn!(
            "{} samples for {} unknowns; the regression may be poorly determined",
            spec.samples,
            unknowns
        );
    }

    let initial = Policy::new(bases.actor.clone(), theta_u0.to_vec(), None)?;
    let noise = make_noise(&spec.noise, m)?;
    let saturation = cost.saturation();
    let law = |t: f64, x: &DVector<f64>| {
        let nu = initial.pre_saturation(x) + noise.eval(t);
        match saturation {
            Some(s) => s.sat(&nu),
            None => nu,
        }
    };
    let horizon = spec.samples as f64 * spec.dt;
    let traj = simulate(plant, &law, horizon, spec.h, spec.dt, DEFAULT_BLOW_UP)?;
    log::debug!("collected {} fine nodes over {horizon} s", traj.len());

    let records = (0..spec.samples)
        .map(|k| integrate_interval(&traj, k * per..(k + 1) * per + 1, bases, cost, spec.h))
        .collect();
    Ok(SampleSet {
        records,
        dt: spec.dt,
        h: spec.h,
        bases: bases.clone(),
        cost: cost.clone(),
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    version: u32,
    state_dim: usize,
    input_dim: usize,
    samples: usize,
    nodes_per_record: usize,
    dt: f64,
    h: f64,
    mode: String,
    beta: Option<f64>,
    r_diag: Vec<f64>,
    state_weight: Vec<Vec<f64>>,
    critic_basis: String,
    actor_basis: String,
}

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const RECORDS_FILE: &str = "records.csv";

fn fmt_exact(v: f64) -> String {
    format!("{v:e}")
}

impl SampleSet {
    /// Writes `manifest.toml` and `records.csv` into `dir`.
    ///
    /// Record columns: `k, t_start, rho_q, dphi_1.., upsi_<l>_<j>.., x_<node>_<d>..`.
    /// Floats are written in shortest round-trip form, so a reloaded set is
    /// bit-identical.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let first = self.records.first();
        let nodes_per_record = first.map_or(0, |r| r.nodes.nrows());
        let n = self.cost.state_dim();
        let manifest = Manifest {
            version: BUNDLE_VERSION,
            state_dim: n,
            input_dim: self.channels(),
            samples: self.records.len(),
            nodes_per_record,
            dt: self.dt,
            h: self.h,
            mode: match self.mode() {
                Mode::Unconstrained => "unconstrained".into(),
                Mode::Constrained { .. } => "constrained".into(),
            },
            beta: match self.mode() {
                Mode::Unconstrained => None,
                Mode::Constrained { beta } => Some(beta),
            },
            r_diag: self.cost.r_diag().to_vec(),
            state_weight: self
                .cost
                .state_weight()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            critic_basis: self.bases.critic.to_string(),
            actor_basis: self.bases.actor.to_string(),
        };
        let text = toml::to_string(&manifest)
            .map_err(|e| Error::format(dir.join(MANIFEST_FILE), e.to_string()))?;
        write_file(&dir.join(MANIFEST_FILE), text.as_bytes())?;

        let path = dir.join(RECORDS_FILE);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| Error::format(&path, e.to_string()))?;
        let mut header = vec!["k".to_string(), "t_start".into(), "rho_q".into()];
        header.extend((1..=self.bases.critic.len()).map(|j| format!("dphi_{j}")));
        for l in 1..=self.channels() {
            header.extend((1..=self.bases.actor.len()).map(|j| format!("upsi_{l}_{j}")));
        }
        for node in 0..nodes_per_record {
            header.extend((1..=n).map(|d| format!("x_{node}_{d}")));
        }
        w.write_record(&header)
            .map_err(|e| Error::format(&path, e.to_string()))?;
        for (k, r) in self.records.iter().enumerate() {
            let mut row = vec![k.to_string(), fmt_exact(r.t_start), fmt_exact(r.rho_q)];
            row.extend(r.rho_dphi.iter().map(|v| fmt_exact(*v)));
            for u in &r.rho_upsi {
                row.extend(u.iter().map(|v| fmt_exact(*v)));
            }
            for node in r.nodes.row_iter() {
                row.extend(node.iter().map(|v| fmt_exact(*v)));
            }
            w.write_record(&row)
                .map_err(|e| Error::format(&path, e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mpath = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let man: Manifest =
            toml::from_str(&text).map_err(|e| Error::format(&mpath, e.to_string()))?;
        if man.version != BUNDLE_VERSION {
            return Err(Error::format(
                &mpath,
                format!("unsupported bundle version {}", man.version),
            ));
        }
        let mode = match (man.mode.as_str(), man.beta) {
            ("unconstrained", None) => Mode::Unconstrained,
            ("constrained", Some(beta)) => Mode::Constrained { beta },
            (other, _) => return Err(Error::format(&mpath, format!("bad mode '{other}'"))),
        };
        let q = rows_to_matrix(&man.state_weight)
            .ok_or_else(|| Error::format(&mpath, "bad state_weight"))?;
        let cost = CostSpec::new(q, man.r_diag.clone(), mode)?;
        let critic: BasisSet = man.critic_basis.parse()?;
        let actor: BasisSet = man.actor_basis.parse()?;
        let bases = BasisPair { critic, actor };
        let (n, m, lv, lu, nodes) = (
            man.state_dim,
            man.input_dim,
            bases.critic.len(),
            bases.actor.len(),
            man.nodes_per_record,
        );
        if cost.state_dim() != n || cost.input_dim() != m || nodes < 2 {
            return Err(Error::format(&mpath, "inconsistent dimensions"));
        }

        let rpath = dir.join(RECORDS_FILE);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&rpath)
            .map_err(|e| Error::format(&rpath, e.to_string()))?;
        let width = 3 + lv + m * lu + nodes * n;
        let mut records = Vec::with_capacity(man.samples);
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::format(&rpath, e.to_string()))?;
            if row.len() != width {
                return Err(Error::format(
                    &rpath,
                    format!("row {} has {} fields, expected {width}", i + 1, row.len()),
                ));
            }
            let vals: Vec<f64> = row
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::format(&rpath, format!("row {}: {e}", i + 1)))?;
            let mut it = vals.into_iter();
            let t_start = it.next().unwrap_or_default();
            let rho_q = it.next().unwrap_or_default();
            let rho_dphi = DVector::from_iterator(lv, it.by_ref().take(lv));
            let rho_upsi = (0..m)
                .map(|_| DVector::from_iterator(lu, it.by_ref().take(lu)))
                .collect();
            let node_vals: Vec<f64> = it.collect();
            let node_mat = DMatrix::from_row_slice(nodes, n, &node_vals);
            let cache = RecordCache::build(&node_mat, &bases.actor, man.h, mode);
            records.push(SampleRecord {
                t_start,
                rho_dphi,
                rho_q,
                rho_upsi,
                nodes: node_mat,
                cache,
            });
        }
        if records.len() != man.samples {
            return Err(Error::format(
                &rpath,
                format!(
                    "found {} records, manifest says {}",
                    records.len(),
                    man.samples
                ),
            ));
        }
        Ok(SampleSet {
            records,
            dt: man.dt,
            h: man.h,
            bases,
            cost,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{standard_basis, StandardCase};
    use crate::dynamics::{Case1Plant, Reinitialized};

    fn case1_cost() -> CostSpec {
        CostSpec::diagonal(&[1.0, 1.0], vec![1.0], Mode::Unconstrained).unwrap()
    }

    fn case1_theta0() -> Vec<DVector<f64>> {
        vec![DVector::from_element(5, -5.0)]
    }

    fn spec(samples: usize, seed: u64) -> CollectSpec {
        CollectSpec {
            samples,
            dt: 0.1,
            h: 1e-3,
            noise: NoiseSpec::with_seed(seed),
        }
    }

    #[test]
    fn quadrature_rules() {
        assert!((trapezoid(&[1.0; 11], 0.01) - 0.1).abs() < 1e-15);
        let ramp: Vec<f64> = (0..5).map(|k| k as f64 * 0.25).collect();
        assert_eq!(trapezoid(&ramp, 0.25), 0.5);
        let h = std::f64::consts::PI / 1000.0;
        let sines: Vec<f64> = (0..=1000).map(|k| (k as f64 * h).sin()).collect();
        assert!((trapezoid(&sines, h) - 2.0).abs() < 1e-5);
        let w = trapezoid_weights(3, 0.5);
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn noise_properties() {
        let spec = NoiseSpec::with_seed(7);
        let a = make_noise(&spec, 1).unwrap();
        let b = make_noise(&spec, 1).unwrap();
        assert_eq!(a.eval_channel(0, 0.0), 0.0);
        for k in 0..1000 {
            let t = k as f64 * 0.0137;
            assert_eq!(
                a.eval_channel(0, t).to_bits(),
                b.eval_channel(0, t).to_bits()
            );
            assert!(a.eval_channel(0, t).abs() <= 5.0);
        }
        assert!(a
            .frequencies(0)
            .iter()
            .all(|r| (-100.0..=100.0).contains(r)));
        let c = make_noise(&NoiseSpec::with_seed(8), 1).unwrap();
        assert_ne!(a.frequencies(0), c.frequencies(0));
        assert!(make_noise(&NoiseSpec { k_max: 0, ..spec }, 1).is_err());
    }

    #[test]
    fn equilibrium_collection_is_all_zero() {
        let plant = Reinitialized::new(Case1Plant::new(), DVector::zeros(2)).unwrap();
        let bases = standard_basis(StandardCase::Case1);
        let s = CollectSpec {
            noise: NoiseSpec::silent(),
            ..spec(5, 0)
        };
        let set = collect(&plant, &[DVector::zeros(5)], &bases, &case1_cost(), &s).unwrap();
        for r in set.records() {
            assert!(r.rho_dphi.iter().all(|v| *v == 0.0));
            assert_eq!(r.rho_q, 0.0);
            assert!(r.rho_upsi[0].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn case1_collection_shape() {
        let bases = standard_basis(StandardCase::Case1);
        let set = collect(
            &Case1Plant::new(),
            &case1_theta0(),
            &bases,
            &case1_cost(),
            &spec(41, 1),
        )
        .unwrap();
        assert_eq!(set.len(), 41);
        assert_eq!(set.unknowns(), 8);
        let last = set.records().last().unwrap();
        assert!((last.t_start - 4.0).abs() < 1e-12);
        assert_eq!(last.nodes.nrows(), 101);
        for r in set.records() {
            assert!(r.rho_q > 0.0);
            match &r.cache {
                RecordCache::Products(g) => {
                    assert_eq!(g, &g.transpose());
                    assert!(g.clone().cholesky().is_some());
                }
                RecordCache::Features(_) => panic!("unconstrained set carries products"),
            }
        }
    }

    #[test]
    fn grid_mismatch_and_dimension_errors() {
        let bases = standard_basis(StandardCase::Case1);
        let bad = CollectSpec {
            h: 0.03,
            ..spec(4, 0)
        };
        assert!(matches!(
            collect(
                &Case1Plant::new(),
                &case1_theta0(),
                &bases,
                &case1_cost(),
                &bad
            ),
            Err(Error::GridMismatch { .. })
        ));
        assert!(matches!(
            collect(
                &Case1Plant::new(),
                &[DVector::zeros(4)],
                &bases,
                &case1_cost(),
                &spec(4, 0)
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inadmissible_initial_policy_diverges() {
        let bases = standard_basis(StandardCase::Case1);
        let plant =
            Reinitialized::new(Case1Plant::new(), DVector::from_vec(vec![2.0, 2.0])).unwrap();
        // u = +5 x1 x2 pushes x2 outward through g = [0, x1]
        let theta = vec![DVector::from_vec(vec![0.0, 0.0, 0.0, 5.0, 0.0])];
        let err = collect(&plant, &theta, &bases, &case1_cost(), &spec(100, 0)).unwrap_err();
        assert!(
            matches!(err, Error::Diverged { .. } | Error::NonFiniteState { .. }),
            "{err}"
        );
    }

    #[test]
    fn bundle_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let bases = standard_basis(StandardCase::Case1);
        let set = collect(
            &Case1Plant::new(),
            &case1_theta0(),
            &bases,
            &case1_cost(),
            &spec(12, 3),
        )
        .unwrap();
        set.save(dir.path()).unwrap();
        assert_eq!(SampleSet::load(dir.path()).unwrap(), set);

        let constrained =
            CostSpec::diagonal(&[1.0, 1.0], vec![1.0], Mode::Constrained { beta: 0.5 }).unwrap();
        let set = collect(
            &Case1Plant::new(),
            &case1_theta0(),
            &bases,
            &constrained,
            &spec(6, 3),
        )
        .unwrap();
        set.save(dir.path()).unwrap();
        assert_eq!(SampleSet::load(dir.path()).unwrap(), set);
    }

    #[test]
    fn load_rejects_truncated_records() {
        let dir = tempfile::tempdir().unwrap();
        let bases = standard_basis(StandardCase::Case1);
        let set = collect(
            &Case1Plant::new(),
            &case1_theta0(),
            &bases,
            &case1_cost(),
            &spec(3, 3),
        )
        .unwrap();
        set.save(dir.path()).unwrap();
        let path = dir.path().join(RECORDS_FILE);
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: Vec<&str> = text.lines().take(3).collect();
        std::fs::write(&path, cut.join("\n") + "\n").unwrap();
        assert!(matches!(
            SampleSet::load(dir.path()),
            Err(Error::Format { .. })
        ));
    }
}
