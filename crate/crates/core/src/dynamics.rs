//! Plants and fixed-step integration.
//!
//! A plant is only ever touched through [`step`] and [`simulate`]; the
//! learning code downstream sees sampled states and inputs and never calls
//! [`Plant::rhs`] directly.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Default fine integration step (seconds).
pub const DEFAULT_STEP: f64 = 1e-3;
/// Default divergence guard on the state norm.
pub const DEFAULT_BLOW_UP: f64 = 1e6;

/// Input-affine continuous-time plant `x' = f(x) + g(x) u`.
pub trait Plant: Send + Sync {
    fn name(&self) -> &str;
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn initial_state(&self) -> DVector<f64>;
    /// Right-hand side `f(x) + g(x) u`.
    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
}

/// An input law `u(t, x)`; state feedback plus any time signal.
pub type InputLaw<'a> = dyn Fn(f64, &DVector<f64>) -> DVector<f64> + 'a;

/// The polynomial test plant whose optimal value is `0.5 x1^2 + x2^2`.
#[derive(Debug, Clone)]
pub struct Case1Plant {
    x0: DVector<f64>,
}

impl Case1Plant {
    pub fn new() -> Self {
        Self {
            x0: DVector::from_vec(vec![0.1, 0.1]),
        }
    }
}

impl Default for Case1Plant {
    fn default() -> Self {
        Self::new()
    }
}

impl Plant for Case1Plant {
    fn name(&self) -> &str {
        "case1"
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> DVector<f64> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let (x1, x2) = (x[0], x[1]);
        DVector::from_vec(vec![
            -x1 + x2,
            -0.5 * (x1 + x2) + 0.5 * x1 * x1 * x2 + x1 * u[0],
        ])
    }
}

/// Rotational/translational actuator: a cart on a spring driven through an
/// eccentric rotating mass. States are cart position and velocity, then
/// rotor angle and angular velocity.
#[derive(Debug, Clone)]
pub struct RtacPlant {
    zeta: f64,
    x0: DVector<f64>,
}

impl RtacPlant {
    pub fn new(zeta: f64) -> Self {
        assert!(zeta.abs() < 1.0, "coupling must satisfy |zeta| < 1");
        Self {
            zeta,
            x0: DVector::from_vec(vec![0.4, 0.0, 0.4, 0.0]),
        }
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

impl Default for RtacPlant {
    fn default() -> Self {
        Self::new(0.2)
    }
}

impl Plant for RtacPlant {
    fn name(&self) -> &str {
        "rtac"
    }

    fn state_dim(&self) -> usize {
        4
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn initial_state(&self) -> DVector<f64> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let z = self.zeta;
        let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
        let (s, c) = x3.sin_cos();
        let den = 1.0 - z * z * c * c;
        debug_assert!(den > 0.0);
        let u = u[0];
        DVector::from_vec(vec![
            x2,
            (-x1 + z * x4 * x4 * s) / den - z * c / den * u,
            x4,
            z * c * (x1 - z * x4 * x4 * s) / den + u / den,
        ])
    }
}

/// `x' = A x + B u`.
#[derive(Debug, Clone)]
pub struct LinearPlant {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    x0: DVector<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearPlantFile {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    x0: Vec<f64>,
}

impl LinearPlant {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, x0: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "A columns",
                expected: n,
                got: a.ncols(),
            });
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "B rows",
                expected: n,
                got: b.nrows(),
            });
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                context: "x0 length",
                expected: n,
                got: x0.len(),
            });
        }
        Ok(Self { a, b, x0 })
    }

    /// Parses the TOML plant description: `a` and `b` as lists of rows,
    /// `x0` as a flat list.
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let raw: LinearPlantFile = toml::from_str(text).map_err(|e| e.to_string())?;
        let a =
            rows_to_matrix(&raw.a).ok_or("`a` must be a non-empty list of equal-length rows")?;
        let b =
            rows_to_matrix(&raw.b).ok_or("`b` must be a non-empty list of equal-length rows")?;
        Self::new(a, b, DVector::from_vec(raw.x0)).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|msg| Error::format(path, msg))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let ncols = rows.first()?.len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl Plant for LinearPlant {
    fn name(&self) -> &str {
        "linear"
    }

    fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    fn initial_state(&self) -> DVector<f64> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u
    }
}

/// Wraps any plant with a different initial state.
pub struct Reinitialized<P> {
    inner: P,
    x0: DVector<f64>,
}

impl<P: Plant> Reinitialized<P> {
    pub fn new(inner: P, x0: DVector<f64>) -> Result<Self> {
        if x0.len() != inner.state_dim() {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: inner.state_dim(),
                got: x0.len(),
            });
        }
        Ok(Self { inner, x0 })
    }
}

impl<P: Plant> Plant for Reinitialized<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    fn initial_state(&self) -> DVector<f64> {
        self.x0.clone()
    }

    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.inner.rhs(x, u)
    }
}

impl Plant for Box<dyn Plant> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn state_dim(&self) -> usize {
        (**self).state_dim()
    }

    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn initial_state(&self) -> DVector<f64> {
        (**self).initial_state()
    }

    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        (**self).rhs(x, u)
    }
}

/// Looks up a built-in plant: `case1`, `rtac`, or `linear:<file>`.
pub fn plant_by_name(id: &str) -> Result<Box<dyn Plant>> {
    match id {
        "case1" => Ok(Box::new(Case1Plant::new())),
        "rtac" => Ok(Box::new(RtacPlant::default())),
        other => match other.strip_prefix("linear:") {
            Some(path) => Ok(Box::new(LinearPlant::load(Path::new(path))?)),
            None => Err(Error::Config(format!(
                "unknown plant '{other}' (expected case1, rtac or linear:<file>)"
            ))),
        },
    }
}

/// Sampled closed-loop record on the fine integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Number of fine steps in one interval of length `dt`.
pub fn steps_per_interval(dt: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::GridMismatch { dt, h });
    }
    let ratio = dt / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::GridMismatch { dt, h });
    }
    Ok(n as usize)
}

fn check_finite(v: &DVector<f64>, t: f64) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// One classic RK4 step of length `h` from `(t, x)`. The input law is
/// evaluated at each stage's time and state.
pub fn step<P: Plant + ?Sized>(
    plant: &P,
    x: &DVector<f64>,
    input: &InputLaw<'_>,
    t: f64,
    h: f64,
) -> Result<DVector<f64>> {
    assert!(h > 0.0, "step size must be positive");
    check_finite(x, t)?;
    let eval = |tau: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let u = input(tau, y);
        let dy = plant.rhs(y, &u);
        check_finite(&dy, tau)?;
        Ok(dy)
    };
    let half = 0.5 * h;
    let k1 = eval(t, x)?;
    let k2 = eval(t + half, &(x + &k1 * half))?;
    let k3 = eval(t + half, &(x + &k2 * half))?;
    let k4 = eval(t + h, &(x + &k3 * h))?;
    let next = x + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    check_finite(&next, t + h)?;
    Ok(next)
}

/// Integrates from the plant's initial state over `[0, t_end]`, recording
/// the state and applied input at every fine node.
pub fn simulate<P: Plant + ?Sized>(
    plant: &P,
    input: &InputLaw<'_>,
    t_end: f64,
    h: f64,
    sample_dt: f64,
    blow_up: f64,
) -> Result<Trajectory> {
    steps_per_interval(sample_dt, h)?;
    if t_end < sample_dt {
        return Err(Error::Config(format!(
            "horizon {t_end} is shorter than the sample interval {sample_dt}"
        )));
    }
    let steps = steps_per_interval(t_end, h)?;
    let mut x = plant.initial_state();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        inputs: Vec::with_capacity(steps + 1),
    };
    for k in 0..=steps {
        let t = k as f64 * h;
        check_finite(&x, t)?;
        let norm = x.norm();
        if norm > blow_up {
            return Err(Error::Diverged {
                t,
                norm,
                bound: blow_up,
            });
        }
        let u = input(t, &x);
        check_finite(&u, t)?;
        let next = if k < steps {
            Some(step(plant, &x, input, t, h)?)
        } else {
            None
        };
        traj.times.push(t);
        traj.states.push(x);
        traj.inputs.push(u);
        match next {
            Some(n) => x = n,
            None => break,
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> LinearPlant {
        LinearPlant::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap()
    }

    fn zero(_: f64, _: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(1)
    }

    #[test]
    fn rk4_matches_exponential() {
        let x = step(&decay(), &DVector::from_element(1, 1.0), &zero, 0.0, 0.01).unwrap();
        assert!((x[0] - 0.990_049_83).abs() < 1e-8);
        assert!((x[0] - (-0.01f64).exp()).abs() <= 1e-10);
    }

    #[test]
    fn equilibrium_is_fixed() {
        for plant in [
            Box::new(Case1Plant::new()) as Box<dyn Plant>,
            Box::new(RtacPlant::default()),
            Box::new(decay()),
        ] {
            let n = plant.state_dim();
            let m = plant.input_dim();
            let dx = plant.rhs(&DVector::zeros(n), &DVector::zeros(m));
            assert_eq!(dx.len(), n);
            assert!(dx.iter().all(|v| *v == 0.0), "{}", plant.name());
            let law = move |_: f64, _: &DVector<f64>| DVector::zeros(m);
            let x = step(&plant, &DVector::zeros(n), &law, 0.0, 0.01).unwrap();
            assert!(x.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn case1_single_step_agrees_with_fine_reference() {
        // Reference: the same step resolved with 1000 sub-steps of 1e-6.
        let plant = Case1Plant::new();
        let x0 = DVector::from_vec(vec![0.1, 0.1]);
        let law = |_: f64, _: &DVector<f64>| DVector::zeros(1);
        let coarse = step(&plant, &x0, &law, 0.0, 1e-3).unwrap();
        let mut fine = x0.clone();
        for k in 0..1000 {
            fine = step(&plant, &fine, &law, k as f64 * 1e-6, 1e-6).unwrap();
        }
        assert!((coarse - fine).norm() < 1e-14);
    }

    #[test]
    fn simulate_stable_scalar() {
        let traj = simulate(&decay(), &zero, 1.0, 0.1, 0.1, DEFAULT_BLOW_UP).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.windows(2).all(|w| w[1].norm() < w[0].norm()));
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn simulate_unstable_diverges() {
        let plant = LinearPlant::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let err = simulate(&plant, &zero, 100.0, 0.01, 0.1, 1e6).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn simulate_rejects_misaligned_grid() {
        let err = simulate(&decay(), &zero, 1.0, 0.03, 0.1, 1e6).unwrap_err();
        assert!(matches!(err, Error::GridMismatch { .. }));
    }

    #[test]
    fn case1_optimal_policy_converges() {
        let law = |_: f64, x: &DVector<f64>| DVector::from_element(1, -x[0] * x[1]);
        let traj = simulate(&Case1Plant::new(), &law, 20.0, 1e-3, 0.1, 1e6).unwrap();
        let last = traj.states.last().unwrap();
        assert!(traj.states.iter().all(|x| x.norm() < 0.2));
        assert!(last.norm() < 1e-4);
    }

    #[test]
    fn non_finite_state_is_reported() {
        let law = |_: f64, _: &DVector<f64>| DVector::from_element(1, f64::NAN);
        let err = step(&decay(), &DVector::from_element(1, 1.0), &law, 0.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }

    #[test]
    fn linear_plant_file_parses() {
        let p = LinearPlant::from_toml_str(
            "a = [[0.0, 1.0], [-2.0, -3.0]]\nb = [[0.0], [1.0]]\nx0 = [1.0, 0.0]\n",
        )
        .unwrap();
        assert_eq!(p.state_dim(), 2);
        assert_eq!(p.input_dim(), 1);
        assert_eq!(p.a()[(1, 0)], -2.0);
        assert!(LinearPlant::from_toml_str("a = [[0.0, 1.0]]\nb = [[1.0]]\nx0 = [1.0]").is_err());
    }

    #[test]
    fn registry_rejects_unknown() {
        assert!(plant_by_name("case1").is_ok());
        assert!(plant_by_name("rtac").is_ok());
        assert!(matches!(plant_by_name("pendulum"), Err(Error::Config(_))));
    }
}
