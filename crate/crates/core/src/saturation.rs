//! Bounded actuation `sat(v) = beta * tanh(v / beta)` and the matching
//! nonquadratic control penalty
//! `W(u) = 2 sum_l r_l * integral_0^{u_l} sat^{-1}(s) ds`.

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationSpec {
    beta: f64,
    r_diag: Vec<f64>,
}

/// `ln cosh(z)` without overflow for large `|z|`.
fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl SaturationSpec {
    pub fn new(beta: f64, r_diag: Vec<f64>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!(
                "saturation bound must be positive, got {beta}"
            )));
        }
        if r_diag.is_empty() || r_diag.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("R diagonal entries must be positive".into()));
        }
        Ok(Self { beta, r_diag })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r_diag(&self) -> &[f64] {
        &self.r_diag
    }

    pub fn channels(&self) -> usize {
        self.r_diag.len()
    }

    pub fn sat_scalar(&self, v: f64) -> f64 {
        self.beta * (v / self.beta).tanh()
    }

    pub fn sat(&self, nu: &DVector<f64>) -> DVector<f64> {
        nu.map(|v| self.sat_scalar(v))
    }

    fn check(&self, channel: usize, a: f64) -> Result<f64> {
        let ratio = a / self.beta;
        if ratio.abs() < 1.0 {
            Ok(ratio)
        } else {
            Err(Error::OutOfRange {
                channel,
                value: a,
                beta: self.beta,
            })
        }
    }

    pub fn inverse_sat(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(u.len());
        for (l, (&ul, o)) in u.iter().zip(out.iter_mut()).enumerate() {
            *o = self.beta * self.check(l, ul)?.atanh();
        }
        Ok(out)
    }

    /// `integral_0^a sat^{-1}(s) ds` for `|a| < beta`.
    pub fn inner_integral(&self, a: f64) -> Result<f64> {
        let ratio = self.check(0, a)?;
        let b = self.beta;
        Ok(b * a * ratio.atanh() + 0.5 * b * b * (-ratio * ratio).ln_1p())
    }

    /// The same integral with upper limit `sat(v)`, written in terms of the
    /// pre-saturation value: `sat(v) * v - beta^2 ln cosh(v / beta)`. Stays
    /// finite where `sat(v)` has rounded to `beta`.
    pub fn inner_integral_of_pre(&self, v: f64) -> f64 {
        let b = self.beta;
        self.sat_scalar(v) * v - b * b * ln_cosh(v / b)
    }

    pub fn w_cost(&self, u: &DVector<f64>) -> Result<f64> {
        self.check_channels(u.len())?;
        let mut total = 0.0;
        for (l, (&ul, r)) in u.iter().zip(&self.r_diag).enumerate() {
            self.check(l, ul)?;
            total += 2.0 * r * self.inner_integral(ul)?;
        }
        Ok(total)
    }

    /// `W(sat(nu))` evaluated through the pre-saturation form.
    pub fn w_cost_of_pre(&self, nu: &DVector<f64>) -> f64 {
        nu.iter()
            .zip(&self.r_diag)
            .map(|(&v, r)| 2.0 * r * self.inner_integral_of_pre(v))
            .sum()
    }

    fn check_channels(&self, m: usize) -> Result<()> {
        if m == self.r_diag.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context: "saturated input channels",
                expected: self.r_diag.len(),
                got: m,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn spec() -> SaturationSpec {
        SaturationSpec::new(0.2, vec![1.0]).unwrap()
    }

    /// Adaptive Simpson quadrature, independent of the closed forms.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
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
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        level(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    fn atanh_integrand(beta: f64) -> impl Fn(f64) -> f64 {
        move |s: f64| beta * (s / beta).atanh()
    }

    #[test]
    fn sat_values() {
        let s = spec();
        assert_eq!(s.sat_scalar(0.0), 0.0);
        assert!((s.sat_scalar(0.2) - 0.152_318_831).abs() < 1e-8);
        assert!((s.sat_scalar(1e6) - 0.2).abs() < 1e-12);
        assert!((s.sat_scalar(-1e6) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn w_cost_basic() {
        let s = spec();
        assert_eq!(s.w_cost(&DVector::from_element(1, 0.0)).unwrap(), 0.0);
        let oracle = 2.0 * simpson(&atanh_integrand(0.2), 0.0, 0.1, 1e-14);
        let w = s.w_cost(&DVector::from_element(1, 0.1)).unwrap();
        assert!((w - oracle).abs() <= 1e-8, "{w} vs {oracle}");
        // closed form printed with the actuator example
        let u: f64 = 0.1;
        let direct = 2.0 * 0.2 * u * (u / 0.2).atanh() + 0.04 * (1.0 - u * u / 0.04).ln();
        assert!((w - direct).abs() < 1e-15);
    }

    #[test]
    fn inner_integral_matches_quadrature() {
        let s = spec();
        assert_eq!(s.inner_integral(0.0).unwrap(), 0.0);
        let oracle = simpson(&atanh_integrand(0.2), 0.0, 0.15, 1e-14);
        assert!((s.inner_integral(0.15).unwrap() - oracle).abs() <= 1e-8);
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        let s = spec();
        assert!(matches!(
            s.inner_integral(0.2),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            s.w_cost(&DVector::from_element(1, -0.25)),
            Err(Error::OutOfRange { .. })
        ));
        assert!(s.w_cost(&DVector::zeros(2)).is_err());
    }

    #[test]
    fn pre_form_survives_saturated_rounding() {
        let s = spec();
        // tanh(50) rounds to 1, so the direct form would need atanh(1)
        assert_eq!(s.sat_scalar(10.0), 0.2);
        let v = s.inner_integral_of_pre(10.0);
        assert!(v.is_finite());
        // for large v: beta*v - beta^2 (v/beta - ln 2) = beta^2 ln 2
        let expect = 0.2 * 10.0 - 0.04 * (10.0 / 0.2 - std::f64::consts::LN_2);
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(SaturationSpec::new(0.0, vec![1.0]).is_err());
        assert!(SaturationSpec::new(0.2, vec![0.0]).is_err());
        assert!(SaturationSpec::new(0.2, vec![]).is_err());
    }

    #[test]
    fn w_cost_is_convex_on_grid() {
        let s = spec();
        let h = 1e-3;
        let w = |u: f64| s.w_cost(&DVector::from_element(1, u)).unwrap();
        let lim = 0.95 * 0.2;
        let mut u = -lim + h;
        while u < lim - h {
            assert!(w(u + h) - 2.0 * w(u) + w(u - h) >= -1e-15, "at {u}");
            u += 0.0017;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn closed_forms_match_quadrature(beta in 0.05f64..2.0, frac in -0.98f64..0.98, r in 0.1f64..5.0) {
            let s = SaturationSpec::new(beta, vec![r]).unwrap();
            let a = frac * beta;
            let (lo, hi) = if a < 0.0 { (a, 0.0) } else { (0.0, a) };
            let sign = if a < 0.0 { -1.0 } else { 1.0 };
            let oracle = sign * simpson(&atanh_integrand(beta), lo, hi, 1e-14);
            prop_assert!((s.inner_integral(a).unwrap() - oracle).abs() <= 1e-8);
            let w = s.w_cost(&DVector::from_element(1, a)).unwrap();
            prop_assert!((w - 2.0 * r * oracle).abs() <= 1e-8);
            prop_assert!(w >= 0.0);
        }

        #[test]
        fn w_cost_is_even(frac in 0.0f64..0.99) {
            let s = spec();
            let u = frac * 0.2;
            let a = s.w_cost(&DVector::from_element(1, u)).unwrap();
            let b = s.w_cost(&DVector::from_element(1, -u)).unwrap();
            prop_assert!((a - b).abs() <= 1e-15 * (1.0 + a));
        }

        #[test]
        fn sat_inverts(frac in -0.999f64..0.999) {
            let s = spec();
            let u = DVector::from_element(1, frac * 0.2);
            let back = s.sat(&s.inverse_sat(&u).unwrap());
            prop_assert!((back[0] - u[0]).abs() <= 1e-10);
        }

        #[test]
        fn sat_stays_bounded(v in -1e8f64..1e8) {
            let s = spec();
            prop_assert!(s.sat_scalar(v).abs() <= 0.2);
        }

        #[test]
        fn derivative_of_inner_integral_is_inverse_sat(frac in -0.9f64..0.9) {
            let s = spec();
            let a = frac * 0.2;
            let d = 1e-6;
            let fd = (s.inner_integral(a + d).unwrap() - s.inner_integral(a - d).unwrap()) / (2.0 * d);
            let exact = 0.2 * (a / 0.2).atanh();
            prop_assert!((fd - exact).abs() <= 1e-7);
        }

        #[test]
        fn pre_form_agrees_with_direct(v in -1.0f64..1.0) {
            let s = spec();
            let direct = s.inner_integral(s.sat_scalar(v)).unwrap();
            prop_assert!((s.inner_integral_of_pre(v) - direct).abs() <= 1e-12);
        }
    }
}
