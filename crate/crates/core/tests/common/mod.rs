//! Checks shared by the property suite and the acceptance runner.
#![allow(dead_code)]

use dapi::api::{assemble, numerical_rank, ApiOptions, ThetaVector, DEFAULT_RANK_TOL};
use dapi::basis::{standard_basis, StandardCase};
use dapi::collect::{
    collect, integrate_interval, make_noise, CollectSpec, NoiseSpec, RecordCache, SampleSet,
};
use dapi::cost::{CostSpec, Mode};
use dapi::dynamics::{simulate, step, Case1Plant, Plant, Reinitialized, DEFAULT_BLOW_UP};
use dapi::evaluate::{rollout_cost, Policy};
use dapi::run_api;
use dapi::saturation::SaturationSpec;
use nalgebra::DVector;

pub fn case1_cost() -> CostSpec {
    CostSpec::diagonal(&[1.0, 1.0], vec![1.0], Mode::Unconstrained).unwrap()
}

pub fn case1_theta0() -> Vec<DVector<f64>> {
    vec![DVector::from_element(5, -5.0)]
}

pub fn case1_optimum() -> ThetaVector {
    ThetaVector::new(
        DVector::from_vec(vec![0.5, 0.0, 1.0]),
        vec![DVector::from_vec(vec![0.0, 0.0, 0.0, -1.0, 0.0])],
    )
}

pub fn case1_samples(seed: u64) -> SampleSet {
    let spec = CollectSpec {
        samples: 41,
        dt: 0.1,
        h: 1e-3,
        noise: NoiseSpec::with_seed(seed),
    };
    collect(
        &Case1Plant::new(),
        &case1_theta0(),
        &standard_basis(StandardCase::Case1),
        &case1_cost(),
        &spec,
    )
    .unwrap()
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn level<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            level(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + level(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    level(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        tol,
        50,
    )
}

/// Largest deviation of `W(u)` from `2 r * integral atanh` by quadrature.
pub fn saturation_quadrature_gap(beta: f64, r: f64, frac: f64) -> f64 {
    let s = SaturationSpec::new(beta, vec![r]).unwrap();
    let a = frac * beta;
    let (lo, hi, sign) = if a < 0.0 {
        (a, 0.0, -1.0)
    } else {
        (0.0, a, 1.0)
    };
    let oracle = sign * simpson(&|x: f64| beta * (x / beta).atanh(), lo, hi, 1e-14);
    let w = s.w_cost(&DVector::from_element(1, a)).unwrap();
    (s.inner_integral(a).unwrap() - oracle)
        .abs()
        .max((w - 2.0 * r * oracle).abs())
}

fn rk4_endpoint(x0: &DVector<f64>, u: f64, h: f64, t_end: f64) -> DVector<f64> {
    let plant = Case1Plant::new();
    let input = move |_: f64, _: &DVector<f64>| DVector::from_element(1, u);
    let steps = (t_end / h).round() as usize;
    let mut x = x0.clone();
    for k in 0..steps {
        x = step(&plant, &x, &input, k as f64 * h, h).unwrap();
    }
    x
}

/// `e(h) / e(h/2)` for the case-1 plant over one second.
pub fn rk4_order_ratio(x0: [f64; 2], u: f64) -> f64 {
    let x0 = DVector::from_vec(x0.to_vec());
    let h = 0.1;
    let reference = rk4_endpoint(&x0, u, h / 64.0, 1.0);
    let coarse = (rk4_endpoint(&x0, u, h, 1.0) - &reference).norm();
    let fine = (rk4_endpoint(&x0, u, h / 2.0, 1.0) - &reference).norm();
    coarse / fine
}

/// Largest relative mismatch between the integrals over `[a, c]` and the
/// sum over `[a, b]` and `[b, c]`, with `b` at fine node `split`.
pub fn additivity_gap(seed: u64, split: usize) -> f64 {
    let bases = standard_basis(StandardCase::Case1);
    let cost = case1_cost();
    let h = 1e-3;
    let noise = make_noise(&NoiseSpec::with_seed(seed), 1).unwrap();
    let policy = Policy::new(bases.actor.clone(), case1_theta0(), None).unwrap();
    let law = |t: f64, x: &DVector<f64>| policy.eval(x) + noise.eval(t);
    let traj = simulate(&Case1Plant::new(), &law, 0.2, h, 0.1, DEFAULT_BLOW_UP).unwrap();
    let last = traj.len();
    let whole = integrate_interval(&traj, 0..last, &bases, &cost, h);
    let left = integrate_interval(&traj, 0..split + 1, &bases, &cost, h);
    let right = integrate_interval(&traj, split..last, &bases, &cost, h);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
    let mut gap = rel(whole.rho_q, left.rho_q + right.rho_q);
    for j in 0..whole.rho_dphi.len() {
        gap = gap.max(rel(whole.rho_dphi[j], left.rho_dphi[j] + right.rho_dphi[j]));
    }
    for j in 0..whole.rho_upsi[0].len() {
        gap = gap.max(rel(
            whole.rho_upsi[0][j],
            left.rho_upsi[0][j] + right.rho_upsi[0][j],
        ));
    }
    if let (RecordCache::Products(g), RecordCache::Products(gl), RecordCache::Products(gr)) =
        (&whole.cache, &left.cache, &right.cache)
    {
        for (i, v) in g.iter().enumerate() {
            gap = gap.max(rel(*v, gl[i] + gr[i]));
        }
    }
    gap
}

/// Numerical rank and column count of the first regression matrix.
pub fn case1_first_rank(seed: u64) -> (usize, usize) {
    let set = case1_samples(seed);
    let (z, _) = assemble(&set, &case1_theta0()).unwrap();
    (numerical_rank(&z, DEFAULT_RANK_TOL), z.ncols())
}

/// `|Z theta* - eta| / |eta|` with the regression built at the optimum.
pub fn optimum_relative_residual(seed: u64) -> f64 {
    let set = case1_samples(seed);
    let opt = case1_optimum();
    let (z, eta) = assemble(&set, &opt.actor).unwrap();
    (z * opt.flat() - &eta).norm() / eta.norm()
}

/// Converged case-1 weights for one noise seed.
pub fn case1_converged(seed: u64) -> ThetaVector {
    let trace = run_api(
        &case1_samples(seed),
        &case1_theta0(),
        &ApiOptions::default(),
    )
    .unwrap();
    assert!(trace.converged);
    trace.final_theta().clone()
}

/// `|theta_a - theta_b| / |theta_a|` for two noise seeds.
pub fn off_policy_spread(seed_a: u64, seed_b: u64) -> f64 {
    let a = case1_converged(seed_a).flat();
    let b = case1_converged(seed_b).flat();
    (&a - &b).norm() / a.norm()
}

/// Runs a perturbed near-optimal case-1 policy from `x0`; true if the
/// accumulated cost never decreases.
pub fn rollout_is_monotone(x0: [f64; 2], perturb: [f64; 5]) -> bool {
    let mut w = case1_optimum().actor[0].clone();
    for (v, p) in w.iter_mut().zip(perturb) {
        *v += p;
    }
    let policy = Policy::new(standard_basis(StandardCase::Case1).actor, vec![w], None).unwrap();
    let plant = Reinitialized::new(Case1Plant::new(), DVector::from_vec(x0.to_vec())).unwrap();
    let r = rollout_cost(&plant, &policy, &case1_cost(), 5.0, 1e-2).unwrap();
    assert_eq!(plant.state_dim(), 2);
    r.cost.windows(2).all(|w| w[1] >= w[0])
}
