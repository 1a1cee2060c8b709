//! End-to-end acceptance gate. One test per published criterion; each test
//! prints a single summary line with the measured figures (visible with
//! `cargo test -- --nocapture`) and enforces the stated tolerances and
//! runtime budgets.

use std::time::Instant;

use serrin2p::analytic::{
    bifurcation_value, dispersion_coefficient, sigma_set, transversality_slope,
};
use serrin2p::continuation::{corrector, geometric_schedule, trace_branch};
use serrin2p::fieldsolver::{boundary_flux, residual, residual_direct, solve};
use serrin2p::geometry::FourierBoundary;
use serrin2p::linearization::{directional_derivative, spectrum_at_trivial, DEFAULT_FD_STEP};
use serrin2p::TwoPhaseConfig;

#[test]
fn acceptance_1_bifurcation_value_identity() {
    let start = Instant::now();
    let mut tail_worst: f64 = f64::NEG_INFINITY;
    for n in [2u32, 3, 4] {
        for r in [0.5, 0.7, 0.9] {
            let s1 = bifurcation_value(n, r, 1).unwrap();
            assert!((s1 - 1.0).abs() <= 1e-14, "s(1; N={n}, R={r}) = {s1}");
            // Eventual negativity: a cutoff index exists below which every
            // larger mode has s(k) < 0, i.e. the bifurcation set is finite.
            let set = sigma_set(n, r, 200).unwrap();
            let cutoff = set.cutoff.unwrap_or_else(|| {
                panic!("no negative tail for N={n}, R={r} up to k=200")
            });
            let tail = bifurcation_value(n, r, 200).unwrap();
            assert!(tail < 0.0);
            tail_worst = tail_worst.max(tail);
            assert!(set.members.iter().all(|&(_, s)| s > 0.0));
            assert!(cutoff >= 2);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 1 took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 (bifurcation-value identity): PASS - s(1)=1 to 1e-14 on the (N,R) grid, \
         tails negative (max s(200) = {tail_worst:.3e}), {elapsed:?}"
    );
}

#[test]
fn acceptance_2_trivial_solution_exactness() {
    let start = Instant::now();
    let mut worst_coeff: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for r in [0.5, 0.7, 0.9] {
        for sigma in [0.3, 0.5, 2.0, 5.0] {
            let cfg = TwoPhaseConfig::new(2, r, sigma).unwrap();
            let g = FourierBoundary::zero(cfg.truncation);
            let sol = solve(&cfg, &g).unwrap();
            // The radial closed form has a0 = 1/4 and no angular content.
            worst_coeff = worst_coeff.max((sol.a0 - 0.25).abs());
            for k in 1..=cfg.truncation {
                worst_coeff = worst_coeff
                    .max(sol.cos_growing[k - 1].abs())
                    .max(sol.sin_growing[k - 1].abs());
            }
            let flux = boundary_flux(&sol);
            for &f in &flux.values {
                worst_coeff = worst_coeff.max((f - (-0.5)).abs());
            }
            let res = residual_direct(&cfg, &g).unwrap();
            worst_psi = worst_psi.max(res.sup_norm());
            // And the residual stays zero along the contrast parameter, not
            // just at one point: sigma_c = s(2) + lambda for a few lambdas.
            if r > 0.7 {
                for lambda in [-0.01, 0.0, 0.02] {
                    let res = residual(&cfg, &g, 2, lambda).unwrap();
                    worst_psi = worst_psi.max(res.sup_norm());
                }
            }
        }
    }
    assert!(worst_coeff <= 1e-12, "coefficient error {worst_coeff:.3e}");
    assert!(worst_psi <= 1e-10, "max |psi| {worst_psi:.3e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "criterion 2 took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 (trivial-solution exactness): PASS - coefficient error {worst_coeff:.3e} \
         <= 1e-12, max |psi| {worst_psi:.3e} <= 1e-10, {elapsed:?}"
    );
}

#[test]
fn acceptance_3_dispersion_match() {
    let start = Instant::now();
    let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap().with_truncation(64).unwrap();
    let mut worst_rel: f64 = 0.0;
    let mut worst_offdiag: f64 = 0.0;
    for lambda in [-0.01, 0.0, 0.01] {
        let spectrum = spectrum_at_trivial(&cfg, 2, lambda, 16).unwrap();
        for (i, &k) in spectrum.modes.iter().enumerate() {
            let analytic = dispersion_coefficient(0.9, 2, k, lambda).unwrap();
            let err = (spectrum.numeric_beta[i] - analytic).abs();
            // Relative tolerance with a 1e-8 absolute floor for the entry
            // beta_m(0), which vanishes identically.
            assert!(
                err <= 1e-4 * analytic.abs() + 1e-8,
                "mode {k}, lambda {lambda}: numeric {} vs analytic {analytic}",
                spectrum.numeric_beta[i]
            );
            if analytic.abs() > 1e-6 {
                worst_rel = worst_rel.max(err / analytic.abs());
            }
        }
        worst_offdiag = worst_offdiag.max(spectrum.offdiag_norm);
    }
    assert!(worst_offdiag <= 1e-8, "off-diagonal leakage {worst_offdiag:.3e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 3 took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 (dispersion match): PASS - worst relative error {worst_rel:.3e} <= 1e-4 \
         for k <= 16, off-diagonal {worst_offdiag:.3e} <= 1e-8, K=64, {elapsed:?}"
    );
}

#[test]
fn acceptance_4_transversality() {
    let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
    let trivial = FourierBoundary::zero(cfg.truncation);
    let direction = FourierBoundary::mode(cfg.truncation, 2, 1.0).unwrap();
    let h = 1e-3;
    let beta_at = |lambda: f64| {
        directional_derivative(&cfg, &trivial, 2, lambda, &direction, DEFAULT_FD_STEP)
            .unwrap()
            .fourier
            .cos_coeff(2)
    };
    let measured = (beta_at(h) - beta_at(-h)) / (2.0 * h);
    assert!(measured > 0.0, "slope {measured} not positive");
    let analytic = transversality_slope(0.9, 2).unwrap();
    let rel = (measured - analytic).abs() / analytic;
    assert!(rel <= 1e-3, "slope {measured} vs closed form {analytic} (rel {rel:.3e})");
    assert!(
        (measured - 0.83932).abs() / 0.83932 <= 1e-3,
        "slope {measured} vs quoted 0.83932"
    );
    println!(
        "ACCEPTANCE 4 (transversality): PASS - measured slope {measured:.6} > 0, matches \
         closed form {analytic:.6} to rel {rel:.3e} <= 1e-3"
    );
}

#[test]
fn acceptance_5_branch_existence_and_tangent() {
    let start = Instant::now();
    // Doubling schedule from 1e-4, extended so the range reaches 1e-2.
    let mut schedule = geometric_schedule(1e-4, 6.4e-3);
    schedule.push(1e-2);
    let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap().with_truncation(64).unwrap();
    let mut summary = Vec::new();
    for mode in [2usize, 3] {
        let branch = trace_branch(&cfg, mode, &schedule).unwrap();
        assert!(branch.truncated.is_none(), "mode {mode}: {:?}", branch.truncated);
        assert_eq!(branch.points.len(), 2 * schedule.len() + 1);
        for point in &branch.points {
            assert!(
                point.residual_norm <= 1e-9,
                "mode {mode}, eps {}: residual {}",
                point.epsilon,
                point.residual_norm
            );
        }
        for side in [1.0f64, -1.0] {
            // Normalized deviation from the tangent profile, smallest eps
            // first, over the doubling part of the schedule.
            let deviations: Vec<(f64, f64)> = schedule[..schedule.len() - 1]
                .iter()
                .map(|&amp| {
                    let eps = side * amp;
                    let point = branch
                        .points
                        .iter()
                        .find(|p| p.epsilon == eps)
                        .unwrap_or_else(|| panic!("missing eps {eps}"));
                    let tangent =
                        FourierBoundary::mode(point.boundary.order(), mode, eps).unwrap();
                    (eps, point.boundary.add_scaled(&tangent, -1.0).sup_norm() / eps.abs())
                })
                .collect();
            for pair in deviations.windows(2) {
                assert!(
                    pair[0].1 <= pair[1].1 + 1e-12,
                    "mode {mode}: deviation not monotone: {pair:?}"
                );
            }
            let (eps0, dev0) = deviations[0];
            assert!(dev0 <= 0.05, "mode {mode}, eps {eps0}: normalized deviation {dev0}");
            let lambda0 = branch
                .points
                .iter()
                .find(|p| p.epsilon == eps0)
                .unwrap()
                .lambda;
            assert!(lambda0.abs() <= 1e-2, "mode {mode}: lambda({eps0}) = {lambda0}");
            summary.push(format!(
                "m={mode} side {side:+.0}: dev/|eps| {dev0:.2e} at 1e-4, lambda {lambda0:.2e}"
            ));
        }
        // lambda(0) = 0 at the trivial midpoint.
        let mid = branch.points.iter().find(|p| p.epsilon == 0.0).unwrap();
        assert_eq!(mid.lambda, 0.0);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "criterion 5 took {elapsed:?}");
    println!(
        "ACCEPTANCE 5 (branch existence and tangent): PASS - {}; K=64, {elapsed:?}",
        summary.join("; ")
    );
}

#[test]
fn acceptance_6_independent_oracle_cross_check() {
    // The finite-difference oracle runs first: it shares no code with the
    // spectral solver (separate crate, polar finite volumes, conjugate
    // gradients) and was frozen before the solver was written.
    let oracle_cfg = fdoracle::OracleConfig::new(0.9, 0.5);
    let radius = |theta: f64| 1.0 + 0.01 * (3.0 * theta).cos();
    let oracle = fdoracle::solve(&oracle_cfg, &radius).expect("oracle converges");

    let cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
    let g = FourierBoundary::mode(cfg.truncation, 3, 0.01).unwrap();
    let sol = solve(&cfg, &g).unwrap();

    // Ten probes on exact oracle grid nodes, spanning core, interface ring,
    // and annulus.
    let probes: [(usize, usize); 10] = [
        (10, 0),
        (20, 30),
        (40, 60),
        (60, 90),
        (80, 120),
        (100, 150),
        (110, 180),
        (115, 200),
        (120, 210),
        (125, 60),
    ];
    let mut worst: f64 = 0.0;
    for &(i, j) in &probes {
        let r = oracle.node_radius(i);
        let theta = oracle.node_angle(j);
        let reference = oracle.node_value(i, j).expect("probe is an interior node");
        let diff = (sol.eval(r, theta) - reference).abs();
        worst = worst.max(diff);
    }
    assert!(worst <= 1e-4, "worst field disagreement {worst:.3e}");
    println!(
        "ACCEPTANCE 6 (independent-oracle cross-check): PASS - 10 probes agree to \
         {worst:.3e} <= 1e-4 (oracle grid 120x240)"
    );
}

#[test]
fn acceptance_7_equivariance_and_parity() {
    let cfg = TwoPhaseConfig::new(2, 0.7, 0.5).unwrap();
    // (a) Rotation equivariance of the residual trace.
    let g = FourierBoundary::general(
        vec![0.01, 0.02, 0.0, 0.004],
        vec![0.0, -0.01, 0.003, 0.0],
    )
    .unwrap();
    let base = residual_direct(&cfg, &g).unwrap();
    let mut worst_rot: f64 = 0.0;
    for phi in [0.9472, std::f64::consts::PI / 5.0] {
        let rotated = residual_direct(&cfg, &g.rotated(phi)).unwrap();
        let expected = base.fourier.rotated(phi);
        worst_rot = worst_rot.max((rotated.fourier.mean - expected.mean).abs());
        for k in 1..=cfg.truncation {
            worst_rot = worst_rot
                .max((rotated.fourier.cos_coeff(k) - expected.cos_coeff(k)).abs())
                .max((rotated.fourier.sin_coeff(k) - expected.sin_coeff(k)).abs());
        }
    }
    assert!(worst_rot <= 1e-10, "rotation equivariance defect {worst_rot:.3e}");

    // (b) Even boundaries produce even residuals.
    let even = FourierBoundary::even(vec![0.01, 0.02, 0.0, 0.004]);
    let res = residual_direct(&cfg, &even).unwrap();
    let mut worst_sine: f64 = 0.0;
    for k in 1..=cfg.truncation {
        worst_sine = worst_sine.max(res.fourier.sin_coeff(k).abs());
    }
    assert!(worst_sine <= 1e-10, "sine leakage {worst_sine:.3e}");

    // (c) Branch shapes are supported on multiples of m.
    let branch_cfg = TwoPhaseConfig::new(2, 0.9, 0.5).unwrap();
    let eps = 5e-3;
    let guess = (FourierBoundary::mode(branch_cfg.truncation, 3, eps).unwrap(), 0.0);
    let point = corrector(&branch_cfg, 3, eps, &guess).unwrap();
    let mut worst_support: f64 = 0.0;
    for k in 1..=branch_cfg.truncation {
        if k % 3 != 0 {
            worst_support = worst_support.max(point.boundary.cos_coeff(k).abs());
        }
        worst_support = worst_support.max(point.boundary.sin_coeff(k).abs());
    }
    assert!(worst_support <= 1e-8, "off-symmetry support {worst_support:.3e}");

    println!(
        "ACCEPTANCE 7 (equivariance and parity): PASS - rotation defect {worst_rot:.3e} <= \
         1e-10, sine leakage {worst_sine:.3e} <= 1e-10, off-symmetry branch support \
         {worst_support:.3e} <= 1e-8"
    );
}
