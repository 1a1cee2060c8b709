//! Closed-form ground truth: bifurcation values s(k), the bifurcation set
//! Sigma, dispersion coefficients beta_k(lambda), the transversality slope
//! d_lambda beta_m(0), and the exact radial base solution.
//!
//! Conventions. W abbreviates R^{2-N-2k} (so W > 1 for every admissible R and
//! k >= 1), and the bifurcation value is the quotient
//!
//!   s(k) = [k(N+k-1) - (N+k-2)(k-1) W] / [k(N+k-1) + k(k-1) W].
//!
//! For k = 1 both (k-1) factors vanish and s(1) = 1 identically. In the
//! planar case the dispersion coefficient of the linearized residual on
//! Fourier mode k, with the contrast split as sigma_c = s(m) + lambda, is
//!
//!   beta_k(lambda) = [(k+1)(s+lambda-1) k + (k + k s + k lambda)(k-1) R^{-2k}]
//!                    / [2 (k + k s + k lambda) R^{-2k} + 2 k (1 - s - lambda)],
//!
//! whose denominator is strictly positive for every sigma_c > 0 (it can only
//! vanish for contrasts below -1, guarded anyway). Two non-obvious facts that
//! the tests pin down:
//!
//! - s(k) < 1 strictly for every k >= 2: numerator and denominator differ by
//!   (k-1)(N+2k-2) W > 0, so only mode 1 ever reaches the forbidden contrast
//!   sigma_c = 1.
//! - beta identity: eliminating the core unknowns per mode gives the
//!   equivalent form beta_k = [k(1-rho_k) - (1+rho_k)] / (2(1+rho_k)) with
//!   rho_k = R^{2k}(1-sigma_c)/(1+sigma_c); the two routes agree to rounding
//!   and are cross-checked in the tests.

use serde::Serialize;

use crate::config::TwoPhaseConfig;
use crate::error::{Error, Result};

/// Exponent threshold beyond which R^{2-N-2k} is evaluated in divided form to
/// dodge overflow (tail tests go to k ~ 10^3).
const LOG_W_HUGE: f64 = 600.0;

fn check_radius(core_radius: f64) -> Result<()> {
    if !(core_radius > 0.0 && core_radius < 1.0) {
        return Err(Error::Domain(format!(
            "core radius R = {core_radius} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Bifurcation value s(k) for dimension N and core radius R.
pub fn bifurcation_value(n_dim: u32, core_radius: f64, mode: usize) -> Result<f64> {
    if n_dim < 2 {
        return Err(Error::Domain(format!("dimension N = {n_dim} must be >= 2")));
    }
    check_radius(core_radius)?;
    if mode < 1 {
        return Err(Error::Domain("mode index k must be >= 1".into()));
    }
    if mode == 1 {
        // Both (k-1) coefficients vanish; avoid forming W, which may overflow
        // in high dimension.
        return Ok(1.0);
    }
    let (n, k) = (n_dim as f64, mode as f64);
    let a = k * (n + k - 1.0);
    let b = (n + k - 2.0) * (k - 1.0);
    let c = k * (k - 1.0);
    let log_w = (2.0 - n - 2.0 * k) * core_radius.ln();
    if log_w <= LOG_W_HUGE {
        let w = log_w.exp();
        Ok((a - b * w) / (a + c * w))
    } else {
        // Divide through by W; the a-terms underflow harmlessly and the value
        // settles on the tail limit -b/c.
        let inv_w = (-log_w).exp();
        Ok((a * inv_w - b) / (a * inv_w + c))
    }
}

/// The bifurcation set up to k_max: every (k, s(k)) with s(k) > 0, plus the
/// smallest index from which the tail stays negative (None if s(k_max) >= 0).
#[derive(Clone, Debug, Serialize)]
pub struct SigmaSet {
    pub members: Vec<(usize, f64)>,
    pub cutoff: Option<usize>,
    pub k_max: usize,
}

pub fn sigma_set(n_dim: u32, core_radius: f64, k_max: usize) -> Result<SigmaSet> {
    if k_max < 1 {
        return Err(Error::Domain("k_max must be >= 1".into()));
    }
    let values: Vec<f64> = (1..=k_max)
        .map(|k| bifurcation_value(n_dim, core_radius, k))
        .collect::<Result<_>>()?;
    let members = values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(i, &s)| (i + 1, s))
        .collect();
    let mut cutoff = None;
    for (i, &s) in values.iter().enumerate().rev() {
        if s < 0.0 {
            cutoff = Some(i + 1);
        } else {
            break;
        }
    }
    Ok(SigmaSet { members, cutoff, k_max })
}

/// Numerator, denominator and their lambda-derivatives for beta_k, reduced by
/// W in the huge-exponent regime (the quotients are scale-invariant).
fn beta_parts(core_radius: f64, sigma: f64, k: usize) -> (f64, f64, f64, f64) {
    let kf = k as f64;
    let log_w = -2.0 * kf * core_radius.ln();
    if log_w <= LOG_W_HUGE {
        let w = log_w.exp();
        let p = (kf + 1.0) * (sigma - 1.0) * kf + kf * (1.0 + sigma) * (kf - 1.0) * w;
        let q = 2.0 * kf * (1.0 + sigma) * w + 2.0 * kf * (1.0 - sigma);
        let dp = kf * (kf + 1.0) + kf * (kf - 1.0) * w;
        let dq = 2.0 * kf * w - 2.0 * kf;
        (p, q, dp, dq)
    } else {
        let inv_w = (-log_w).exp();
        let p = (kf + 1.0) * (sigma - 1.0) * kf * inv_w + kf * (1.0 + sigma) * (kf - 1.0);
        let q = 2.0 * kf * (1.0 + sigma) + 2.0 * kf * (1.0 - sigma) * inv_w;
        let dp = kf * (kf + 1.0) * inv_w + kf * (kf - 1.0);
        let dq = 2.0 * kf - 2.0 * kf * inv_w;
        (p, q, dp, dq)
    }
}

fn check_planar_modes(core_radius: f64, m: usize, k: usize) -> Result<f64> {
    check_radius(core_radius)?;
    if m < 1 || k < 1 {
        return Err(Error::Domain("mode indices must be >= 1".into()));
    }
    bifurcation_value(2, core_radius, m)
}

/// Planar dispersion coefficient beta_k(lambda) with the contrast pinned to
/// sigma_c = s(m) + lambda.
pub fn dispersion_coefficient(core_radius: f64, m: usize, k: usize, lambda: f64) -> Result<f64> {
    let s = check_planar_modes(core_radius, m, k)?;
    let sigma = s + lambda;
    let (p, q, _, _) = beta_parts(core_radius, sigma, k);
    if q.abs() <= 1e-13 * p.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "dispersion denominator vanishes at lambda = {lambda} (sigma_c = {sigma})"
        )));
    }
    Ok(p / q)
}

/// d beta_k / d lambda at arbitrary lambda, by the quotient rule on the
/// closed form.
pub fn dispersion_slope(core_radius: f64, m: usize, k: usize, lambda: f64) -> Result<f64> {
    let s = check_planar_modes(core_radius, m, k)?;
    let sigma = s + lambda;
    let (p, q, dp, dq) = beta_parts(core_radius, sigma, k);
    if q.abs() <= 1e-13 * p.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "dispersion denominator vanishes at lambda = {lambda} (sigma_c = {sigma})"
        )));
    }
    Ok((dp * q - p * dq) / (q * q))
}

/// Transversality slope d_lambda beta_m(0) in the literal product/square
/// form; strictly positive whenever s(m) lies in (0, 1).
pub fn transversality_slope(core_radius: f64, m: usize) -> Result<f64> {
    let s = check_planar_modes(core_radius, m, m)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "transversality slope needs s(m) in (0, 1); got s({m}) = {s}"
        )));
    }
    let mf = m as f64;
    let w = (-2.0 * mf * core_radius.ln()).exp();
    let numerator = (mf * (mf + 1.0) + mf * (mf - 1.0) * w)
        * (2.0 * (mf + mf * s) * w + 2.0 * mf * (1.0 - s));
    let base = 2.0 * mf * (1.0 + s) * w + 2.0 * mf * (1.0 - s);
    Ok(numerator / (base * base))
}

/// Dispersion data of a single mode, with the contrast pinned to that mode's
/// own bifurcation value (so beta_at(0) = 0).
#[derive(Clone, Debug)]
pub struct DispersionCurve {
    pub mode: usize,
    pub s_value: f64,
    pub slope_at_zero: f64,
    core_radius: f64,
}

impl DispersionCurve {
    pub fn beta_at(&self, lambda: f64) -> Result<f64> {
        dispersion_coefficient(self.core_radius, self.mode, self.mode, lambda)
    }
}

pub fn dispersion_curve(core_radius: f64, mode: usize) -> Result<DispersionCurve> {
    let s_value = check_planar_modes(core_radius, mode, mode)?;
    let slope_at_zero = dispersion_slope(core_radius, mode, mode, 0.0)?;
    Ok(DispersionCurve { mode, s_value, slope_at_zero, core_radius })
}

/// Exact radial solution of the concentric two-phase problem on the unit
/// ball: u = (1 - r^2)/(2N) outside the core, continued inward with the
/// conductivity-scaled paraboloid.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub n_dim: u32,
    pub core_radius: f64,
    pub sigma_core: f64,
}

impl RadialProfile {
    pub fn value(&self, r: f64) -> f64 {
        let n = 2.0 * self.n_dim as f64;
        let rc = self.core_radius;
        if r >= rc {
            (1.0 - r * r) / n
        } else {
            (1.0 - rc * rc) / n + (rc * rc - r * r) / (n * self.sigma_core)
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let n = self.n_dim as f64;
        if r >= self.core_radius {
            -r / n
        } else {
            -r / (n * self.sigma_core)
        }
    }

    /// Constant Neumann datum of the unit ball, d_r u(1) = -1/N; coincides
    /// with c(B_1) = -|B_1|/|dB_1|.
    pub fn boundary_flux(&self) -> f64 {
        -1.0 / self.n_dim as f64
    }
}

pub fn radial_solution(cfg: &TwoPhaseConfig) -> RadialProfile {
    RadialProfile {
        n_dim: cfg.n_dim,
        core_radius: cfg.core_radius,
        sigma_core: cfg.sigma_core,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    // Frozen oracle values, computed by 30-digit evaluation of the closed
    // forms before this module was written.
    const S2_R09: f64 = 0.326_213_657_649_159_45;
    const S3_R09: f64 = 0.030_482_596_677_851_666;
    const S4_R09: f64 = -0.164_520_315_013_225_89;
    const BETA3_AT0_R09_M2: f64 = 0.362_204_724_409_448_82;
    const BETA1_AT0_R09_M2: f64 = -0.291_545_189_504_373_18;
    const BETA2_R09_M2_LAMBDA1E6: f64 = 8.393_159_556_903_75e-7;
    const SLOPE_R09_M2: f64 = 0.839_316_118_922_420_4;
    const SLOPE_R09_M3: f64 = 1.334_573_403_859_820_1;

    #[test]
    fn mode_one_is_exactly_unity() {
        for n in [2, 3, 4, 7, 40, 2000] {
            for r in [0.05, 0.3, 0.5, 0.9, 0.99] {
                assert_eq!(bifurcation_value(n, r, 1).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn frozen_planar_bifurcation_values() {
        assert_abs_diff_eq!(bifurcation_value(2, 0.9, 2).unwrap(), S2_R09, epsilon = 1e-15);
        assert_abs_diff_eq!(bifurcation_value(2, 0.9, 3).unwrap(), S3_R09, epsilon = 1e-15);
        assert_abs_diff_eq!(bifurcation_value(2, 0.9, 4).unwrap(), S4_R09, epsilon = 1e-15);
        // R = 0.5, k = 2: W = 16, (6 - 32)/(6 + 32) = -13/19.
        assert_abs_diff_eq!(
            bifurcation_value(2, 0.5, 2).unwrap(),
            -13.0 / 19.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn higher_modes_stay_strictly_below_unity() {
        for n in [2, 3, 4, 5] {
            for r in [0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
                for k in 2..=40 {
                    let s = bifurcation_value(n, r, k).unwrap();
                    assert!(s < 1.0, "s({k}; N={n}, R={r}) = {s} >= 1");
                }
            }
        }
    }

    #[test]
    fn tail_goes_negative_and_approaches_minus_one() {
        for n in [2, 3, 4] {
            for r in [0.5, 0.9] {
                let set = sigma_set(n, r, 1000).unwrap();
                let cutoff = set.cutoff.expect("tail must turn negative");
                assert!(cutoff <= 50, "cutoff {cutoff} unexpectedly large");
                let tail = bifurcation_value(n, r, 1000).unwrap();
                assert!(tail.is_finite());
                assert!((tail + 1.0).abs() < 0.02, "s(1000; N={n}, R={r}) = {tail}");
            }
        }
    }

    #[test]
    fn sigma_set_examples() {
        let set = sigma_set(2, 0.9, 10).unwrap();
        let modes: Vec<usize> = set.members.iter().map(|&(k, _)| k).collect();
        assert_eq!(modes, vec![1, 2, 3]);
        assert_eq!(set.members[0].1, 1.0);
        assert_abs_diff_eq!(set.members[1].1, S2_R09, epsilon = 1e-15);
        assert_abs_diff_eq!(set.members[2].1, S3_R09, epsilon = 1e-15);
        assert_eq!(set.cutoff, Some(4));

        let set = sigma_set(2, 0.5, 10).unwrap();
        assert_eq!(set.members, vec![(1, 1.0)]);
        assert_eq!(set.cutoff, Some(2));

        let set = sigma_set(3, 0.9, 1).unwrap();
        assert_eq!(set.members, vec![(1, 1.0)]);
        assert_eq!(set.cutoff, None);
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(bifurcation_value(1, 0.9, 2).is_err());
        assert!(bifurcation_value(2, 1.0, 2).is_err());
        assert!(bifurcation_value(2, 0.0, 2).is_err());
        assert!(bifurcation_value(2, 0.9, 0).is_err());
        assert!(sigma_set(2, 0.9, 0).is_err());
        assert!(dispersion_coefficient(2.0, 2, 2, 0.0).is_err());
    }

    #[test]
    fn dispersion_vanishes_exactly_at_its_own_mode() {
        for (r, m) in [(0.9, 2), (0.9, 3), (0.95, 2), (0.95, 4)] {
            let beta = dispersion_coefficient(r, m, m, 0.0).unwrap();
            assert_abs_diff_eq!(beta, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn frozen_dispersion_values() {
        assert_abs_diff_eq!(
            dispersion_coefficient(0.9, 2, 3, 0.0).unwrap(),
            BETA3_AT0_R09_M2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            dispersion_coefficient(0.9, 2, 1, 0.0).unwrap(),
            BETA1_AT0_R09_M2,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            dispersion_coefficient(0.9, 2, 2, 1e-6).unwrap(),
            BETA2_R09_M2_LAMBDA1E6,
            max_relative = 1e-10
        );
        for k in [1usize, 3, 4, 9] {
            let beta = dispersion_coefficient(0.9, 2, k, 0.0).unwrap();
            assert!(beta.abs() > 1e-3, "beta_{k}(0) = {beta} suspiciously small for k != m");
        }
    }

    #[test]
    fn beta_agrees_with_the_transmission_ratio_route() {
        // Independent derivation: first-order collocation of the Dirichlet
        // condition with the per-mode elimination rho_k gives
        // beta_k = [k(1-rho) - (1+rho)] / (2(1+rho)).
        for &(r, m) in &[(0.5, 2), (0.9, 2), (0.9, 3), (0.95, 5)] {
            let s = bifurcation_value(2, r, m).unwrap();
            for k in 1..=64 {
                for lambda in [-0.01, 0.0, 0.01, 0.3] {
                    let sigma = s + lambda;
                    if sigma <= 0.0 {
                        continue;
                    }
                    let rho = r.powi(2 * k as i32) * (1.0 - sigma) / (1.0 + sigma);
                    let alt = ((k as f64) * (1.0 - rho) - (1.0 + rho)) / (2.0 * (1.0 + rho));
                    let beta = dispersion_coefficient(r, m, k, lambda).unwrap();
                    assert_relative_eq!(beta, alt, max_relative = 1e-10, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn frozen_transversality_slopes() {
        assert_abs_diff_eq!(transversality_slope(0.9, 2).unwrap(), SLOPE_R09_M2, epsilon = 1e-14);
        assert_abs_diff_eq!(transversality_slope(0.9, 3).unwrap(), SLOPE_R09_M3, epsilon = 1e-14);
    }

    #[test]
    fn slope_positive_wherever_the_curve_crosses() {
        let mut checked = 0;
        for i in 0..10 {
            let r = 0.5 + 0.05 * i as f64;
            for m in 2..=10 {
                let s = bifurcation_value(2, r, m).unwrap();
                if s > 0.0 && s < 1.0 {
                    let slope = transversality_slope(r, m).unwrap();
                    assert!(slope > 0.0, "slope(R={r}, m={m}) = {slope}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 5, "parameter grid produced only {checked} valid (R, m) pairs");
    }

    #[test]
    fn slope_matches_central_difference_of_beta() {
        let h = 1e-5;
        for &(r, m) in &[(0.9, 2), (0.9, 3), (0.95, 4)] {
            let fd = (dispersion_coefficient(r, m, m, h).unwrap()
                - dispersion_coefficient(r, m, m, -h).unwrap())
                / (2.0 * h);
            let slope = transversality_slope(r, m).unwrap();
            assert_relative_eq!(fd, slope, max_relative = 1e-6);
            // The quotient-rule derivative must agree with the literal
            // product/square form of the transversality expression.
            assert_relative_eq!(
                dispersion_slope(r, m, m, 0.0).unwrap(),
                slope,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn slope_requires_a_unit_interval_bifurcation_value() {
        assert!(transversality_slope(0.5, 2).is_err());
        assert!(transversality_slope(0.9, 1).is_err());
    }

    #[test]
    fn dispersion_denominator_guard_reports_lambda() {
        // The denominator only vanishes for contrasts below -1: solve
        // (1+sigma) W = sigma - 1 for k = 1, R = 0.9 and aim lambda there.
        let w: f64 = 0.9f64.powi(-2);
        let sigma_star = -(w + 1.0) / (w - 1.0);
        let s2 = bifurcation_value(2, 0.9, 2).unwrap();
        let lambda = sigma_star - s2;
        let err = dispersion_coefficient(0.9, 2, 1, lambda).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "got {err:?}");
    }

    #[test]
    fn dispersion_curve_bundles_the_mode_data() {
        let curve = dispersion_curve(0.9, 2).unwrap();
        assert_abs_diff_eq!(curve.s_value, S2_R09, epsilon = 1e-15);
        assert_abs_diff_eq!(curve.slope_at_zero, SLOPE_R09_M2, epsilon = 1e-13);
        assert_abs_diff_eq!(curve.beta_at(0.0).unwrap(), 0.0, epsilon = 1e-14);
        assert!(curve.beta_at(0.01).unwrap() > 0.0);
        assert!(curve.beta_at(-0.01).unwrap() < 0.0);
    }

    #[test]
    fn radial_profile_satisfies_the_stated_identities() {
        for n in [2u32, 3, 4] {
            for sigma in [0.3, 2.0] {
                let profile = RadialProfile { n_dim: n, core_radius: 0.7, sigma_core: sigma };
                let rc = 0.7;
                assert_abs_diff_eq!(profile.value(1.0), 0.0, epsilon = 1e-16);
                // Continuity and flux transmission at the interface.
                let eps = 1e-9;
                let jump = profile.value(rc + eps) - profile.value(rc - eps);
                assert!(jump.abs() < 1e-8);
                let flux_jump = profile.derivative(rc) - sigma * profile.derivative(rc - 1e-16);
                assert_abs_diff_eq!(flux_jump, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(profile.boundary_flux(), -1.0 / n as f64, epsilon = 0.0);
                assert_abs_diff_eq!(profile.derivative(1.0), -1.0 / n as f64, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn unit_contrast_degenerates_to_one_phase() {
        let profile = RadialProfile { n_dim: 2, core_radius: 0.6, sigma_core: 1.0 };
        for r in [0.0, 0.3, 0.6, 0.8, 1.0] {
            assert_abs_diff_eq!(profile.value(r), (1.0 - r * r) / 4.0, epsilon = 1e-16);
        }
    }
}
