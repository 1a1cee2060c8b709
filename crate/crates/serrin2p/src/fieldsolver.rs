//! Spectral solver for the planar two-phase Dirichlet problem on a perturbed
//! disk, and the overdetermined-residual assembly built on top of it.
//!
//! The conductivity is sigma_c on the concentric core r < R and 1 on the
//! annulus between the core and the star-shaped boundary r = 1 + g(theta).
//! Writing the solution as a particular paraboloid plus harmonics and
//! eliminating the core unknowns through the transmission conditions leaves,
//! per Fourier mode k >= 1, a single annulus basis function
//!
//!   phi_k(r) = r^k + rho_k r^{-k},   rho_k = R^{2k} (1-sigma)/(1+sigma),
//!
//! plus a free constant (the mode-0 log term drops out of the flux balance).
//! The decaying part is always evaluated as (1-sigma)/(1+sigma) * (R^2/r)^k,
//! which stays bounded for every admissible radius, so no intermediate
//! quantity overflows even at high truncation order.
//!
//! Only the outer Dirichlet condition remains to be imposed; it is collocated
//! at uniform angles and solved in the least-squares sense through a
//! column-scaled SVD. The overdetermined residual is the weighted Neumann
//! defect
//!
//!   psi(theta) = (d_n v(theta) - c_g) J(theta),
//!
//! with c_g = -area/perimeter the only constant compatible with the
//! divergence theorem; the weight J makes the mean of psi vanish identically,
//! so mode 0 carries no spurious signal.

use nalgebra::{DMatrix, DVector};

use crate::analytic;
use crate::config::TwoPhaseConfig;
use crate::error::{Error, Result};
use crate::fourier::{self, FourierCoeffs};
use crate::geometry::{self, BoundaryTrace, FourierBoundary};

/// Condition-number ceiling for the scaled collocation matrix.
const CONDITION_LIMIT: f64 = 1e12;

/// Mode-k ratio between the decaying and growing annulus harmonics enforced
/// by the transmission conditions. Never fails: unit contrast gives 0 and the
/// core simply disappears.
pub fn transmission_ratio(cfg: &TwoPhaseConfig, k: usize) -> f64 {
    let ctilde = (1.0 - cfg.sigma_core) / (1.0 + cfg.sigma_core);
    cfg.core_radius.powi(2 * k as i32) * ctilde
}

/// Two-phase field on a perturbed disk, stored through its annulus
/// coefficients; the core coefficients are recovered on demand from the
/// transmission conditions.
#[derive(Clone, Debug)]
pub struct SpectralSolution {
    pub config: TwoPhaseConfig,
    pub boundary: FourierBoundary,
    /// Constant term of the annulus harmonic part.
    pub a0: f64,
    /// Coefficients of phi_k(r) cos(k theta), k = 1..K.
    pub cos_growing: Vec<f64>,
    /// Coefficients of phi_k(r) sin(k theta), k = 1..K.
    pub sin_growing: Vec<f64>,
    /// Transmission ratios rho_k, k = 1..K.
    pub rho: Vec<f64>,
    /// Max-norm of the Dirichlet defect on the collocation nodes.
    pub collocation_residual: f64,
    /// Condition number of the column-scaled collocation matrix.
    pub condition: f64,
}

impl SpectralSolution {
    fn ctilde(&self) -> f64 {
        (1.0 - self.config.sigma_core) / (1.0 + self.config.sigma_core)
    }

    /// Coefficient of the decaying harmonic r^{-k} cos(k theta).
    pub fn decaying_cos(&self, k: usize) -> f64 {
        self.rho[k - 1] * self.cos_growing[k - 1]
    }

    pub fn decaying_sin(&self, k: usize) -> f64 {
        self.rho[k - 1] * self.sin_growing[k - 1]
    }

    /// Constant term of the core expansion.
    pub fn core_constant(&self) -> f64 {
        let r2 = self.config.core_radius * self.config.core_radius;
        self.a0 + (r2 / 4.0) * (1.0 / self.config.sigma_core - 1.0)
    }

    /// Coefficient of r^k cos(k theta) in the core.
    pub fn core_cos(&self, k: usize) -> f64 {
        2.0 * self.cos_growing[k - 1] / (1.0 + self.config.sigma_core)
    }

    pub fn core_sin(&self, k: usize) -> f64 {
        2.0 * self.sin_growing[k - 1] / (1.0 + self.config.sigma_core)
    }

    fn annulus_value(&self, r: f64, theta: f64) -> f64 {
        let r2 = self.config.core_radius * self.config.core_radius;
        let ctilde = self.ctilde();
        let mut acc = -r * r / 4.0 + self.a0;
        let mut grow = 1.0;
        let mut decay = 1.0;
        for k in 1..=self.cos_growing.len() {
            grow *= r;
            decay *= r2 / r;
            let phi = grow + ctilde * decay;
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += phi * (self.cos_growing[k - 1] * c + self.sin_growing[k - 1] * s);
        }
        acc
    }

    fn core_value(&self, r: f64, theta: f64) -> f64 {
        let mut acc = -r * r / (4.0 * self.config.sigma_core) + self.core_constant();
        let mut pow = 1.0;
        for k in 1..=self.cos_growing.len() {
            pow *= r;
            let (s, c) = (k as f64 * theta).sin_cos();
            acc += pow * (self.core_cos(k) * c + self.core_sin(k) * s);
        }
        acc
    }

    fn annulus_gradient(&self, r: f64, theta: f64) -> (f64, f64) {
        let r2 = self.config.core_radius * self.config.core_radius;
        let ctilde = self.ctilde();
        let mut v_r = -r / 2.0;
        let mut vt_over_r = 0.0;
        let mut grow = 1.0;
        let mut decay = 1.0;
        for k in 1..=self.cos_growing.len() {
            grow *= r;
            decay *= r2 / r;
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let (a, b) = (self.cos_growing[k - 1], self.sin_growing[k - 1]);
            v_r += (kf / r) * (grow - ctilde * decay) * (a * c + b * s);
            vt_over_r += (kf / r) * (grow + ctilde * decay) * (b * c - a * s);
        }
        (v_r, vt_over_r)
    }

    fn core_gradient(&self, r: f64, theta: f64) -> (f64, f64) {
        let mut v_r = -r / (2.0 * self.config.sigma_core);
        let mut vt_over_r = 0.0;
        let mut pow = 1.0; // r^{k-1}
        for k in 1..=self.cos_growing.len() {
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let (a, b) = (self.core_cos(k), self.core_sin(k));
            v_r += kf * pow * (a * c + b * s);
            vt_over_r += kf * pow * (b * c - a * s);
            pow *= r;
        }
        (v_r, vt_over_r)
    }

    /// Field value at polar coordinates (r, theta); the representation
    /// switches at the interface r = R.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        if r >= self.config.core_radius {
            self.annulus_value(r, theta)
        } else {
            self.core_value(r, theta)
        }
    }

    /// (d_r v, d_theta v / r) at (r, theta).
    pub fn gradient_polar(&self, r: f64, theta: f64) -> (f64, f64) {
        if r >= self.config.core_radius {
            self.annulus_gradient(r, theta)
        } else {
            self.core_gradient(r, theta)
        }
    }

    /// Transmission defect at the interface: value jump v(R+) - v(R-) and
    /// flux jump d_r v(R+) - sigma_c d_r v(R-). Zero up to rounding by
    /// construction.
    pub fn interface_jump(&self, theta: f64) -> (f64, f64) {
        let rr = self.config.core_radius;
        let value = self.annulus_value(rr, theta) - self.core_value(rr, theta);
        let (outer_r, _) = self.annulus_gradient(rr, theta);
        let (inner_r, _) = self.core_gradient(rr, theta);
        (value, outer_r - self.config.sigma_core * inner_r)
    }
}

/// Solve the two-phase Dirichlet problem on the boundary r = 1 + g(theta) by
/// least-squares collocation of the outer condition.
pub fn solve(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> Result<SpectralSolution> {
    cfg.validate()?;
    if cfg.n_dim != 2 {
        return Err(Error::Domain(format!(
            "the spectral field solver is planar; got N = {}",
            cfg.n_dim
        )));
    }
    geometry::admissibility(cfg, g)?;

    let k_max = cfg.truncation;
    let m_col = cfg.collocation;
    // Mirror-symmetric boundaries produce mirror-symmetric fields, so the
    // sine columns are zero exactly; dropping them keeps the computed
    // solution even to the last bit instead of merely to rounding.
    let even = g.parity() == crate::geometry::Parity::Even;
    let n_cols = if even { k_max + 1 } else { 2 * k_max + 1 };
    let nodes = fourier::nodes(m_col);
    let r2 = cfg.core_radius * cfg.core_radius;
    let ctilde = (1.0 - cfg.sigma_core) / (1.0 + cfg.sigma_core);

    let mut a = DMatrix::<f64>::zeros(m_col, n_cols);
    let mut b = DVector::<f64>::zeros(m_col);
    for (j, &theta) in nodes.iter().enumerate() {
        let r = 1.0 + g.value(theta);
        a[(j, 0)] = 1.0;
        b[j] = r * r / 4.0;
        let mut grow = 1.0;
        let mut decay = 1.0;
        for k in 1..=k_max {
            grow *= r;
            decay *= r2 / r;
            let phi = grow + ctilde * decay;
            let (s, c) = (k as f64 * theta).sin_cos();
            a[(j, k)] = phi * c;
            if !even {
                a[(j, k_max + k)] = phi * s;
            }
        }
    }

    // Columns span widely different magnitudes (phi_k at r ~ 1.1 grows like
    // 1.1^k); normalize them to unit max before factorizing.
    let mut scale = vec![1.0; n_cols];
    let mut scaled = a.clone();
    for c in 0..n_cols {
        let m = a.column(c).amax();
        if m > 0.0 {
            scale[c] = m;
            scaled.column_mut(c).scale_mut(1.0 / m);
        }
    }

    let svd = nalgebra::linalg::SVD::try_new(scaled, true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Solver("SVD of the collocation matrix did not converge".into()))?;
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::Solver(format!(
            "collocation matrix is numerically singular (condition {condition:.3e}); \
             lower the truncation order or loosen the geometry"
        )));
    }
    let y = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Solver(format!("least-squares solve failed: {e}")))?;
    let unscale = |y: &DVector<f64>| {
        let mut x = DVector::<f64>::zeros(n_cols);
        for c in 0..n_cols {
            x[c] = y[c] / scale[c];
        }
        x
    };
    // The SVD iteration can stall with a backward error orders of magnitude
    // above rounding when the singular values are tightly clustered (they all
    // sit within a small factor here, the matrix being a perturbation of a
    // discrete Fourier frame). A refinement pass or two through the same
    // factorization pulls the defect back to the rounding floor.
    let mut x = unscale(&y);
    let mut defect = &b - &a * &x;
    let mut best = defect.amax();
    for _ in 0..2 {
        if best <= 16.0 * f64::EPSILON * b.amax() {
            break;
        }
        let Ok(dy) = svd.solve(&defect, 0.0) else { break };
        let x_try = &x + unscale(&dy);
        let defect_try = &b - &a * &x_try;
        if defect_try.amax() < best {
            x = x_try;
            defect = defect_try;
            best = defect.amax();
        } else {
            break;
        }
    }
    let collocation_residual = best;

    Ok(SpectralSolution {
        config: cfg.clone(),
        boundary: g.clone(),
        a0: x[0],
        cos_growing: (1..=k_max).map(|k| x[k]).collect(),
        sin_growing: if even {
            vec![0.0; k_max]
        } else {
            (1..=k_max).map(|k| x[k_max + k]).collect()
        },
        rho: (1..=k_max).map(|k| transmission_ratio(cfg, k)).collect(),
        collocation_residual,
        condition,
    })
}

/// Outward normal derivative of the field along the boundary, sampled at the
/// collocation angles.
pub fn boundary_flux(sol: &SpectralSolution) -> BoundaryTrace {
    let nodes = fourier::nodes(sol.config.collocation);
    let g = &sol.boundary;
    let values = nodes
        .iter()
        .map(|&theta| {
            let r = 1.0 + g.value(theta);
            let dr = g.derivative(theta);
            let jac = (r * r + dr * dr).sqrt();
            let (v_r, vt_over_r) = sol.gradient_polar(r, theta);
            (r * v_r - dr * vt_over_r) / jac
        })
        .collect();
    BoundaryTrace { nodes, values }
}

/// The overdetermined residual psi = (d_n v - c_g) J on the collocation
/// angles, together with its Fourier projection and the data that produced
/// it.
#[derive(Clone, Debug)]
pub struct ResidualTrace {
    /// psi at the collocation angles.
    pub nodal: BoundaryTrace,
    /// Raw normal derivative d_n v at the same angles.
    pub flux: BoundaryTrace,
    /// Fourier projection of psi up to the configured truncation.
    pub fourier: FourierCoeffs,
    /// Geometric Neumann constant -area/perimeter.
    pub c_g: f64,
    /// Core contrast actually used.
    pub sigma: f64,
    /// Offset from the bifurcation value, when the contrast was specified
    /// that way.
    pub lambda: Option<f64>,
    pub truncation: usize,
}

impl ResidualTrace {
    pub fn sup_norm(&self) -> f64 {
        self.nodal.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn residual_of(cfg: &TwoPhaseConfig, g: &FourierBoundary, lambda: Option<f64>) -> Result<ResidualTrace> {
    let sol = solve(cfg, g)?;
    let meas = geometry::measures(cfg, g)?;
    let nj = geometry::normal_and_jacobian(cfg, g)?;
    let flux = boundary_flux(&sol);
    let psi: Vec<f64> = flux
        .values
        .iter()
        .zip(&nj.jacobian)
        .map(|(&f, &j)| (f - meas.c) * j)
        .collect();
    let fourier = fourier::project(&psi, cfg.truncation);
    Ok(ResidualTrace {
        nodal: BoundaryTrace { nodes: flux.nodes.clone(), values: psi },
        flux,
        fourier,
        c_g: meas.c,
        sigma: cfg.sigma_core,
        lambda,
        truncation: cfg.truncation,
    })
}

/// Residual with the contrast split as sigma_c = s(mode) + lambda, the
/// parametrization used along bifurcation branches.
pub fn residual(
    cfg: &TwoPhaseConfig,
    g: &FourierBoundary,
    mode: usize,
    lambda: f64,
) -> Result<ResidualTrace> {
    let s = analytic::bifurcation_value(2, cfg.core_radius, mode)?;
    let sigma = s + lambda;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!(
            "contrast s({mode}) + lambda = {sigma} must be positive (lambda = {lambda})"
        )));
    }
    let shifted = cfg.clone().with_sigma(sigma)?;
    residual_of(&shifted, g, Some(lambda))
}

/// Residual at the contrast stored in the configuration itself.
pub fn residual_direct(cfg: &TwoPhaseConfig, g: &FourierBoundary) -> Result<ResidualTrace> {
    residual_of(cfg, g, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{dispersion_coefficient, radial_solution};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn wavy() -> FourierBoundary {
        FourierBoundary::general(
            vec![0.0, 0.02, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 0.01],
        )
        .unwrap()
    }

    #[test]
    fn concentric_disks_reproduce_the_radial_solution() {
        for sigma in [0.3, 0.5, 2.0, 5.0] {
            let cfg = TwoPhaseConfig::new(2, 0.7, sigma).unwrap();
            let g = FourierBoundary::zero(cfg.truncation);
            let sol = solve(&cfg, &g).unwrap();
            assert_abs_diff_eq!(sol.a0, 0.25, epsilon = 1e-13);
            for k in 1..=cfg.truncation {
                assert!(sol.cos_growing[k - 1].abs() <= 1e-12, "cos mode {k} leaked");
                assert!(sol.sin_growing[k - 1].abs() <= 1e-12, "sin mode {k} leaked");
            }
            assert!(sol.collocation_residual <= 1e-12);
            assert!(sol.condition < 1e4);

            let profile = radial_solution(&cfg);
            for r in [0.0, 0.3, 0.7, 0.85, 1.0] {
                assert_abs_diff_eq!(sol.eval(r, 1.3), profile.value(r), epsilon = 1e-12);
            }

            let flux = boundary_flux(&sol);
            for &f in &flux.values {
                assert_abs_diff_eq!(f, -0.5, epsilon = 1e-12);
            }

            let res = residual_direct(&cfg, &g).unwrap();
            assert!(res.sup_norm() <= 1e-10, "trivial residual {}", res.sup_norm());
            assert_abs_diff_eq!(res.c_g, -0.5, epsilon = 1e-13);
            assert_eq!(res.lambda, None);
        }
    }

    #[test]
    fn transmission_conditions_hold_on_perturbed_shapes() {
        let cfg = TwoPhaseConfig::new(2, 0.7, 0.5).unwrap();
        let sol = solve(&cfg, &wavy()).unwrap();
        for j in 0..64 {
            let theta = 2.0 * PI * j as f64 / 64.0;
            let (value, flux) = sol.interface_jump(theta);
            assert_abs_diff_eq!(value, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(flux, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn core_coefficients_follow_the_elimination_rules() {
        let cfg = TwoPhaseConfig::new(2, 0.7, 0.5).unwrap();
        let sol = solve(&cfg, &wavy()).unwrap();
        let sigma = cfg.sigma_core;
        for k in 1..=cfg.truncation {
            assert_abs_diff_eq!(
                sol.decaying_cos(k),
                transmission_ratio(&cfg, k) * sol.cos_growing[k - 1],
                epsilon = 1e-16
            );
            assert_abs_diff_eq!(
                sol.core_cos(k),
                2.0 * sol.cos_growing[k - 1] / (1.0 + sigma),
                epsilon = 1e-16
            );
        }
        // rho_1(R = 0.5, sigma = 2) = 0.25 * (1-2)/(1+2) = -1/12.
        let half = TwoPhaseConfig::new(2, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(transmission_ratio(&half, 1), -1.0 / 12.0, epsilon = 1e-16);
    }

    #[test]
    fn dirichlet_defect_decays_spectrally() {
        let base = TwoPhaseConfig::new(2, 0.5, 2.0).unwrap();
        let g = FourierBoundary::mode(2, 2, 0.1).unwrap();
        let mut defects = Vec::new();
        for k in [16usize, 32, 64] {
            let cfg = base.clone().with_truncation(k).unwrap();
            let sol = solve(&cfg, &g).unwrap();
            // Probe the Dirichlet condition off the collocation grid.
            let defect = (0..997)
                .map(|j| {
                    let theta = 2.0 * PI * j as f64 / 997.0;
                    sol.eval(1.0 + g.value(theta), theta).abs()
                })
                .fold(0.0, f64::max);
            defects.push(defect);
        }
        assert!(defects[0] < 1e-2);
        assert!(defects[1] <= defects[0] + 1e-15);
        assert!(defects[2] <= defects[1] + 1e-15);
        assert!(defects[2] <= 1e-10, "K = 64 defect {}", defects[2]);
    }

    #[test]
    fn residual_is_rotation_equivariant() {
        let cfg = TwoPhaseConfig::new(2, 0.7, 0.5).unwrap();
        let g = wavy();
        let base = residual_direct(&cfg, &g).unwrap();
        let phi = PI / 7.0;
        let rotated = residual_direct(&cfg, &g.rotated(phi)).unwrap();
        let expected = base.fourier.rotated(phi);
        assert_abs_diff_eq!(rotated.fourier.mean, expected.mean, epsilon = 1e-12);
        for k in 1..=cfg.truncation {
            assert_abs_diff_eq!(
                rotated.fourier.cos_coeff(k),
                expected.cos_coeff(k),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                rotated.fourier.sin_coeff(k),
                expected.sin_coeff(k),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn residual_mean_vanishes_by_the_divergence_theorem() {
        let cfg = TwoPhaseConfig::new(2, 0.7, 0.5).unwrap();
        let res = residual_direct(&cfg, &wavy()).unwrap();
        assert_abs_diff_eq!(res.fourier.mean, 0.0, epsilon = 1e-11);
    }

    #[test]
    fn linearized_residual_matches_the_dispersion_coefficients() {
        let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
        let delta = 1e-5;
        for k in [1usize, 2, 3, 5] {
            let g = FourierBoundary::mode(cfg.truncation, k, delta).unwrap();
            let res = residual(&cfg, &g, 2, 0.0).unwrap();
            let numeric = res.fourier.cos_coeff(k) / delta;
            let beta = dispersion_coefficient(0.9, 2, k, 0.0).unwrap();
            assert!(
                (numeric - beta).abs() <= 1e-3 * (1.0 + beta.abs()),
                "mode {k}: numeric {numeric} vs analytic {beta}"
            );
        }
    }

    #[test]
    fn residual_records_the_contrast_split() {
        let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
        let g = FourierBoundary::zero(cfg.truncation);
        let res = residual(&cfg, &g, 2, 0.01).unwrap();
        assert_eq!(res.lambda, Some(0.01));
        assert_abs_diff_eq!(
            res.sigma,
            crate::analytic::bifurcation_value(2, 0.9, 2).unwrap() + 0.01,
            epsilon = 1e-15
        );
    }

    #[test]
    fn degenerate_contrasts_are_rejected() {
        let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
        let g = FourierBoundary::zero(cfg.truncation);
        // s(1) = 1, so mode 1 at lambda = 0 asks for the forbidden unit
        // contrast.
        assert!(matches!(residual(&cfg, &g, 1, 0.0), Err(Error::Domain(_))));
        // Wildly negative lambda drives the contrast non-positive.
        assert!(matches!(residual(&cfg, &g, 2, -5.0), Err(Error::Domain(_))));
        // The solver itself is planar only.
        let mut spatial = cfg.clone();
        spatial.n_dim = 3;
        assert!(matches!(solve(&spatial, &g), Err(Error::Domain(_))));
    }
}
