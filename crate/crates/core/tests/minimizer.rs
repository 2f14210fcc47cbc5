use memsplate::minimize::{CapPenalty, EnergyProblem};
use memsplate::{
    energy_gradient, minimize_total_energy, vi_residual, voltage_sweep, BcMode, DeflectionProfile, ElectrostaticModel,
    ForceRoute, MinimizeConfig, ObstacleMode, Outcome, PhysicalParams, Shape,
};

fn model(v: f64, n: usize) -> ElectrostaticModel {
    ElectrostaticModel::new(PhysicalParams::base().with_voltage(v), n, n / 2, n / 2).unwrap()
}

#[test]
fn gradient_at_the_flat_state_pairs_nonnegatively_with_upward_directions() {
    let m = model(1.0, 16);
    let u = DeflectionProfile::flat_for(&m.params, 16);
    for route in [ForceRoute::Consistent, ForceRoute::Trace] {
        let g = energy_gradient(&m, &u, route).unwrap();
        for sh in [Shape::Bump, Shape::Narrow, Shape::DoubleHump, Shape::Skewed] {
            let th = sh.profile(0.1, 1.0, 16, -10.0).coefficients();
            assert!(g.iter().zip(&th).map(|(a, b)| a * b).sum::<f64>() >= 0.0);
        }
    }
}

#[test]
fn routes_agree_on_smooth_directions() {
    let m = model(1.0, 64);
    let u = Shape::Skewed.profile(-0.1, 1.0, 64, m.params.gap_floor(1e-3));
    let a = energy_gradient(&m, &u, ForceRoute::Consistent).unwrap();
    let b = energy_gradient(&m, &u, ForceRoute::Trace).unwrap();
    let mech = energy_gradient(&model(0.0, 64), &u, ForceRoute::Consistent).unwrap();
    for sh in Shape::ALL {
        let th = sh.profile(0.1, 1.0, 64, -10.0).coefficients();
        let pair = |g: &[f64]| g.iter().zip(&mech).zip(&th).map(|((x, m), y)| (x - m) * y).sum::<f64>();
        let (pa, pb) = (pair(&a), pair(&b));
        let scale: f64 = a.iter().zip(&mech).zip(&th).map(|((x, m), y)| ((x - m) * y).abs()).sum();
        assert!((pa - pb).abs() < 1e-2 * scale, "{}: {pa} vs {pb}", sh.name());
    }
}

#[test]
fn converged_state_is_stationary_and_perturbations_are_detected() {
    let m = model(0.5, 16);
    let u0 = DeflectionProfile::flat_for(&m.params, 16);
    let r = minimize_total_energy(&m, &MinimizeConfig::default(), &u0).unwrap();
    assert_eq!(r.outcome, Outcome::Converged);
    assert!(r.state.vi_residual <= 1e-6);
    assert!(vi_residual(&m, &r.state.u, ForceRoute::Consistent).unwrap() <= 1e-6);
    let rate = |delta: f64| {
        let mut u = r.state.u.clone();
        u.u_values[8] += delta;
        vi_residual(&m, &u, ForceRoute::Consistent).unwrap() / delta
    };
    let (c1, c2) = (rate(1e-3), rate(1e-4));
    assert!(c1 > 1.0 && c2 > 0.5 * c1, "{c1} {c2}");
}

#[test]
fn iterates_keep_the_boundary_conditions_and_the_obstacle() {
    let m = model(3.0, 16);
    let u0 = DeflectionProfile::flat_for(&m.params, 16);
    let r = minimize_total_energy(&m, &MinimizeConfig::default(), &u0).unwrap();
    let u = &r.state.u;
    assert_eq!([u.u_values[0], u.du_values[0], u.u_values[16], u.du_values[16]], [0.0; 4]);
    assert!(r.history.iter().all(|h| h.min_u >= m.params.gap_floor(1e-3)));
    assert!(r.history.windows(2).all(|w| w[1].total <= w[0].total));
    assert!(r.obstacle_contact && !r.state.active_set.is_empty());
    assert!(r.state.energy.total <= r.initial_energy.total);
}

#[test]
fn penalty_mode_cross_validates_projection() {
    let m = model(3.0, 16);
    let u0 = DeflectionProfile::flat_for(&m.params, 16);
    let a = minimize_total_energy(&m, &MinimizeConfig::default(), &u0).unwrap();
    let cfg = MinimizeConfig { obstacle: ObstacleMode::Penalty { weight: 1e3, growth: 10.0, stages: 4 }, max_iter: 400, ..Default::default() };
    let b = minimize_total_energy(&m, &cfg, &u0).unwrap();
    assert_eq!(b.outcome, Outcome::Converged);
    let d = a.state.u.u_values.iter().zip(&b.state.u.u_values).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
    assert!(d < 1e-3, "{d}");
}

#[test]
fn sweep_deepens_with_voltage() {
    let m = model(0.0, 16);
    let u0 = DeflectionProfile::flat_for(&m.params, 16);
    let runs = voltage_sweep(&m, &MinimizeConfig::default(), &u0, &[0.0, 0.5, 1.0, 2.0, 3.0]).unwrap();
    let mins: Vec<f64> = runs.iter().map(|(_, r)| r.state.u.min_value()).collect();
    assert!(mins.windows(2).all(|w| w[1] <= w[0]), "{mins:?}");
    assert_eq!(runs[0].1.state.iteration, 0);
    assert!(runs.last().unwrap().1.obstacle_contact);
}

#[test]
fn pinned_mode_respects_the_end_slope_signs() {
    let m = model(0.5, 16);
    let mut u0 = DeflectionProfile::flat_for(&m.params, 16);
    u0.bc_mode = BcMode::Pinned;
    let r = minimize_total_energy(&m, &MinimizeConfig::default(), &u0).unwrap();
    assert_eq!(r.outcome, Outcome::Converged);
    let u = &r.state.u;
    // sigma_1 < sigma_2: u'(-L) <= 0 <= u'(L)
    assert!(u.du_values[0] <= 0.0 && u.du_values[16] >= 0.0);
    assert_eq!((u.u_values[0], u.u_values[16]), (0.0, 0.0));
}

#[test]
fn cap_penalty_is_inactive_below_the_cap() {
    let mut m = model(1.0, 16);
    m.params.sigma1 = 3.0;
    let cfg = MinimizeConfig { cap_penalty: CapPenalty { enabled: true, cap: 0.5, weight: 1e3 }, ..Default::default() };
    let u0 = DeflectionProfile::flat_for(&m.params, 16);
    let r = minimize_total_energy(&m, &cfg, &u0).unwrap();
    assert_eq!(r.outcome, Outcome::Converged);
    assert!(r.state.u.max_value() < 0.5);
    {
        let pb = EnergyProblem::new(&m, cfg, &u0).unwrap();
        assert_eq!(pb.penalty(&r.state.u.coefficients()), 0.0);
        assert_eq!(r.state.energy.penalty, 0.0);
    }
}
