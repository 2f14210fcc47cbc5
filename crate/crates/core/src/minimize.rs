//! Minimization of the total energy over clamped deflections above the obstacle.
//!
//! The iteration is a projected Newton-type descent (Bertsekas' two-metric
//! projection): free coefficients move along the mechanical stiffness-preconditioned
//! gradient, coefficients held at their bound move along the scaled gradient, and
//! every trial is projected back onto the box of admissible coefficients before the
//! Armijo test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::energy_force::{mechanical_energy, ElectrostaticModel, EnergyReport, ShapeSensitivity};
use crate::error::{Error, Result};
use crate::hermite::{shape, BcMode, DeflectionProfile, HermiteMatrices, GAUSS3};
use crate::transmission::{electrostatic_energy, PotentialField};

/// How the obstacle `u >= -H + eps` is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", deny_unknown_fields)]
pub enum ObstacleMode {
    /// Nodal projection after each step.
    Projection,
    /// `weight/2 sum_i max(0, floor - u_i)^2`, weight multiplied by `growth` per stage.
    Penalty { weight: f64, growth: f64, stages: usize },
}

/// `weight * int max(0, u - cap)^2 dx`, restoring coercivity when `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapPenalty {
    pub enabled: bool,
    pub cap: f64,
    pub weight: f64,
}

impl Default for CapPenalty {
    fn default() -> Self {
        Self { enabled: false, cap: 1.0, weight: 1e3 }
    }
}

/// Discrete realization of `int g(u) theta` used by the descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceRoute {
    /// Exact derivative of the discrete electrostatic energy.
    #[default]
    Consistent,
    /// Force density evaluated from the interface and top traces.
    Trace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    pub initial_step: f64,
    pub backtrack: f64,
    pub armijo: f64,
    pub min_step: f64,
    pub obstacle: ObstacleMode,
    pub cap_penalty: CapPenalty,
    pub vi_tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    /// Distance to a bound under which a coefficient counts as active.
    pub active_tol: f64,
    pub force_route: ForceRoute,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            min_step: 1e-10,
            obstacle: ObstacleMode::Projection,
            cap_penalty: CapPenalty::default(),
            vi_tol: 1e-6,
            step_tol: 1e-14,
            max_iter: 200,
            active_tol: 1e-9,
            force_route: ForceRoute::Consistent,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("initial_step", self.initial_step),
            ("armijo", self.armijo),
            ("min_step", self.min_step),
            ("vi_tol", self.vi_tol),
            ("step_tol", self.step_tol),
            ("active_tol", self.active_tol),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") });
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidParameter { name: "backtrack", reason: "must lie in (0, 1)".into() });
        }
        if self.cap_penalty.enabled && !(self.cap_penalty.weight > 0.0) {
            return Err(Error::InvalidParameter { name: "cap_penalty.weight", reason: "must be > 0".into() });
        }
        if let ObstacleMode::Penalty { weight, growth, stages } = self.obstacle {
            if !(weight > 0.0 && growth >= 1.0 && stages >= 1) {
                return Err(Error::InvalidParameter {
                    name: "obstacle",
                    reason: "penalty mode needs weight > 0, growth >= 1, stages >= 1".into(),
                });
            }
        }
        Ok(())
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mechanical: f64,
    pub electrostatic: f64,
    pub total: f64,
    pub vi_residual: f64,
    pub min_u: f64,
    pub step: f64,
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "iteration,E_m,E_e,E_total,vi_residual,min_u,step";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.iteration, self.mechanical, self.electrostatic, self.total, self.vi_residual, self.min_u, self.step
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    Stalled,
    IterationCap,
}

/// Snapshot of the descent.
#[derive(Debug, Clone, Serialize)]
pub struct MinimizationState {
    pub u: DeflectionProfile,
    pub energy: EnergyReport,
    pub direction_norm: f64,
    pub step: f64,
    /// Node indices whose value sits on the obstacle.
    pub active_set: Vec<usize>,
    pub vi_residual: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeResult {
    pub state: MinimizationState,
    pub outcome: Outcome,
    pub history: Vec<IterationRecord>,
    pub initial_energy: EnergyReport,
    /// Nonempty active set at the final iterate.
    pub obstacle_contact: bool,
}

/// Objective `E_m + E_e + penalties` on the Hermite coefficients of a fixed grid.
pub struct EnergyProblem<'a> {
    pub model: &'a ElectrostaticModel,
    pub cfg: MinimizeConfig,
    matrices: HermiteMatrices,
    template: DeflectionProfile,
    lower: Vec<f64>,
    upper: Vec<f64>,
    free: Vec<bool>,
    obstacle_weight: f64,
}

/// Energy, gradient and the potential they came from.
pub struct Evaluation {
    pub report: EnergyReport,
    pub gradient: Vec<f64>,
    pub phi: PotentialField,
}

impl<'a> EnergyProblem<'a> {
    pub fn new(model: &'a ElectrostaticModel, cfg: MinimizeConfig, template: &DeflectionProfile) -> Result<Self> {
        cfg.validate()?;
        let n = template.n_dofs();
        let matrices = HermiteMatrices::new(template.n_elem(), template.elem_len());
        let mut lower = vec![f64::NEG_INFINITY; n];
        let mut upper = vec![f64::INFINITY; n];
        let free = template.free_mask();
        if cfg.obstacle == ObstacleMode::Projection {
            for i in (0..n).step_by(2) {
                lower[i] = template.gap_floor;
            }
        }
        if template.bc_mode == BcMode::Pinned {
            // sign condition on the end slopes: +-[sigma] u'(+-L) <= 0
            let jump = model.params.sigma_jump();
            let last = n - 1;
            if jump < 0.0 {
                upper[1] = 0.0;
                lower[last] = 0.0;
            } else if jump > 0.0 {
                lower[1] = 0.0;
                upper[last] = 0.0;
            }
        }
        let obstacle_weight = match cfg.obstacle {
            ObstacleMode::Penalty { weight, .. } => weight,
            ObstacleMode::Projection => 0.0,
        };
        Ok(Self { model, cfg, matrices, template: template.clone(), lower, upper, free, obstacle_weight })
    }

    pub fn profile(&self, coeffs: &[f64]) -> DeflectionProfile {
        self.template.with_coefficients(coeffs)
    }

    fn cap_term(&self, u: &DeflectionProfile) -> (f64, Vec<f64>) {
        let cp = self.cfg.cap_penalty;
        let mut grad = vec![0.0; u.n_dofs()];
        if !cp.enabled {
            return (0.0, grad);
        }
        let h = u.elem_len();
        let mut val = 0.0;
        for e in 0..u.n_elem() {
            for &(s, w) in &GAUSS3 {
                let (uv, _, _) = u.eval_local(e, s);
                let excess = (uv - cp.cap).max(0.0);
                if excess > 0.0 {
                    val += cp.weight * w * h * excess * excess;
                    let (n, _, _) = shape(s, h);
                    for a in 0..4 {
                        grad[2 * e + a] += 2.0 * cp.weight * w * h * excess * n[a];
                    }
                }
            }
        }
        (val, grad)
    }

    fn obstacle_term(&self, coeffs: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; coeffs.len()];
        if self.obstacle_weight == 0.0 {
            return (0.0, grad);
        }
        let floor = self.template.gap_floor;
        let mut val = 0.0;
        for i in (0..coeffs.len()).step_by(2) {
            let v = (floor - coeffs[i]).max(0.0);
            val += 0.5 * self.obstacle_weight * v * v;
            grad[i] = -self.obstacle_weight * v;
        }
        (val, grad)
    }

    /// Penalty contributions (cap plus obstacle) at `coeffs`.
    pub fn penalty(&self, coeffs: &[f64]) -> f64 {
        let u = self.profile(coeffs);
        self.cap_term(&u).0 + self.obstacle_term(coeffs).0
    }

    /// Energy breakdown and gradient, one potential solve.
    pub fn evaluate(&self, coeffs: &[f64]) -> Result<Evaluation> {
        self.evaluate_with(coeffs, self.cfg.force_route)
    }

    pub fn evaluate_with(&self, coeffs: &[f64], route: ForceRoute) -> Result<Evaluation> {
        let u = self.profile_unchecked(coeffs);
        let phi = self.model.solve(&u)?;
        let ee = electrostatic_energy(&phi, &phi.coefficients);
        let em = mechanical_energy(&u, &self.model.params);
        let (cap, cap_grad) = self.cap_term(&u);
        let (obs, obs_grad) = self.obstacle_term(coeffs);
        let report = EnergyReport::new(em, ee, cap + obs);

        let mut gradient = self.mechanical_gradient(coeffs);
        let electro = match route {
            ForceRoute::Consistent => ShapeSensitivity::new(&self.model.params, &phi).load_vector(&u),
            ForceRoute::Trace => {
                let f = crate::energy_force::electrostatic_force(&self.model.traces(&phi), &self.model.params);
                f.load_vector(&u)
            }
        };
        for i in 0..gradient.len() {
            gradient[i] += electro[i] + cap_grad[i] + obs_grad[i];
            if !self.free[i] {
                gradient[i] = 0.0;
            }
        }
        Ok(Evaluation { report, gradient, phi })
    }

    /// Objective value only.
    pub fn energy(&self, coeffs: &[f64]) -> Result<EnergyReport> {
        let u = self.profile_unchecked(coeffs);
        let ee = self.model.energy(&u)?;
        let em = mechanical_energy(&u, &self.model.params);
        Ok(EnergyReport::new(em, ee, self.penalty(coeffs)))
    }

    fn profile_unchecked(&self, coeffs: &[f64]) -> DeflectionProfile {
        let mut u = self.profile(coeffs);
        // the penalty mode may cross the nodal floor; the geometry check still guards H + u > 0
        if self.cfg.obstacle != ObstacleMode::Projection {
            u.gap_floor = -self.model.params.gap;
        }
        u
    }

    /// `beta K_b c + (tau + a |u'|^2) K_t c`.
    pub fn mechanical_gradient(&self, coeffs: &[f64]) -> Vec<f64> {
        let p = &self.model.params;
        let c = DVector::from_column_slice(coeffs);
        let kt_c = &self.matrices.stretching * &c;
        let s = c.dot(&kt_c);
        let g = &self.matrices.bending * &c * p.bending + kt_c * (p.stretching + p.nonlinear_stretching * s);
        g.as_slice().to_vec()
    }

    /// Mechanical Hessian, used as the descent metric.
    fn metric(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let p = &self.model.params;
        let c = DVector::from_column_slice(coeffs);
        let kt_c = &self.matrices.stretching * &c;
        let s = c.dot(&kt_c);
        let mut m = &self.matrices.bending * p.bending + &self.matrices.stretching * (p.stretching + p.nonlinear_stretching * s);
        if p.nonlinear_stretching > 0.0 {
            m += &kt_c * kt_c.transpose() * (2.0 * p.nonlinear_stretching);
        }
        if self.obstacle_weight > 0.0 {
            let floor = self.template.gap_floor;
            for i in (0..coeffs.len()).step_by(2) {
                if coeffs[i] < floor {
                    m[(i, i)] += self.obstacle_weight;
                }
            }
        }
        m
    }

    fn project(&self, coeffs: &mut [f64]) {
        for i in 0..coeffs.len() {
            if self.free[i] {
                coeffs[i] = coeffs[i].clamp(self.lower[i], self.upper[i]);
            }
        }
    }

    fn at_lower(&self, coeffs: &[f64], i: usize) -> bool {
        coeffs[i] <= self.lower[i] + self.cfg.active_tol
    }

    fn at_upper(&self, coeffs: &[f64], i: usize) -> bool {
        coeffs[i] >= self.upper[i] - self.cfg.active_tol
    }

    /// Stationarity measure of the variational inequality at `coeffs`.
    ///
    /// Maximum over admissible unit directions `w - u` (the signed coordinate
    /// directions and the projected gradient direction) of
    /// `-G . (w - u) / |w - u|`, clipped at zero.
    pub fn vi_residual(&self, coeffs: &[f64], gradient: &[f64]) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..coeffs.len() {
            if !self.free[i] {
                continue;
            }
            let g = gradient[i];
            if !self.at_lower(coeffs, i) {
                r = r.max(g);
            }
            if !self.at_upper(coeffs, i) {
                r = r.max(-g);
            }
        }
        let mut target: Vec<f64> = coeffs.iter().zip(gradient).map(|(c, g)| c - g).collect();
        self.project(&mut target);
        let d: Vec<f64> = target.iter().zip(coeffs).map(|(t, c)| t - c).collect();
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dn > 0.0 {
            let slope: f64 = gradient.iter().zip(&d).map(|(g, v)| g * v).sum();
            r = r.max(-slope / dn);
        }
        r.max(0.0)
    }

    /// Node indices sitting on the obstacle.
    pub fn active_nodes(&self, coeffs: &[f64]) -> Vec<usize> {
        let floor = self.template.gap_floor;
        (0..coeffs.len() / 2)
            .filter(|&k| self.free[2 * k] && coeffs[2 * k] <= floor + self.cfg.active_tol)
            .collect()
    }

    fn direction(&self, coeffs: &[f64], gradient: &[f64]) -> Vec<f64> {
        let n = coeffs.len();
        let held: Vec<bool> = (0..n)
            .map(|i| {
                self.free[i]
                    && ((self.at_lower(coeffs, i) && gradient[i] > 0.0) || (self.at_upper(coeffs, i) && gradient[i] < 0.0))
            })
            .collect();
        let metric = self.metric(coeffs);
        let idx: Vec<usize> = (0..n).filter(|&i| self.free[i] && !held[i]).collect();
        let mut d = vec![0.0; n];
        if !idx.is_empty() {
            let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| metric[(idx[a], idx[b])]);
            let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| -gradient[i]));
            let sol = match sub.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => rhs.component_div(&sub.diagonal()),
            };
            for (a, &i) in idx.iter().enumerate() {
                d[i] = sol[a];
            }
        }
        for i in 0..n {
            if held[i] {
                d[i] = -gradient[i] / metric[(i, i)].max(f64::MIN_POSITIVE);
            }
        }
        d
    }
}

fn record(it: usize, report: &EnergyReport, vi: f64, coeffs: &[f64], step: f64) -> IterationRecord {
    let min_u = coeffs.iter().step_by(2).copied().fold(f64::INFINITY, f64::min);
    IterationRecord {
        iteration: it,
        mechanical: report.mechanical,
        electrostatic: report.electrostatic,
        total: report.total,
        vi_residual: vi,
        min_u,
        step,
    }
}

/// Minimizes the total energy starting from `u0`.
pub fn minimize_total_energy(model: &ElectrostaticModel, cfg: &MinimizeConfig, u0: &DeflectionProfile) -> Result<MinimizeResult> {
    cfg.validate()?;
    u0.validate()?;
    let p = &model.params;
    if p.nonlinear_stretching == 0.0 && p.sigma_jump() >= 0.0 && !cfg.cap_penalty.enabled {
        return Err(Error::InvalidParameter {
            name: "cap_penalty",
            reason: "with a = 0 and sigma1 >= sigma2 the coercivity penalty must be enabled".into(),
        });
    }
    match cfg.obstacle {
        ObstacleMode::Projection => run_descent(&EnergyProblem::new(model, *cfg, u0)?, u0, Vec::new()),
        ObstacleMode::Penalty { weight, growth, stages } => {
            let mut u = u0.clone();
            let mut history = Vec::new();
            let mut initial = None;
            let mut last = None;
            let mut w = weight;
            for _ in 0..stages {
                let mut stage_cfg = *cfg;
                stage_cfg.obstacle = ObstacleMode::Penalty { weight: w, growth, stages };
                let problem = EnergyProblem::new(model, stage_cfg, u0)?;
                let res = run_descent(&problem, &u, std::mem::take(&mut history))?;
                initial.get_or_insert(res.initial_energy);
                u = res.state.u.clone();
                history = res.history.clone();
                last = Some(res);
                w *= growth;
            }
            let mut res = last.expect("at least one stage");
            res.initial_energy = initial.expect("at least one stage");
            Ok(res)
        }
    }
}

fn run_descent(problem: &EnergyProblem<'_>, u0: &DeflectionProfile, mut history: Vec<IterationRecord>) -> Result<MinimizeResult> {
    let cfg = &problem.cfg;
    let offset = history.last().map_or(0, |r| r.iteration + 1);
    let mut coeffs = u0.coefficients();
    let mut eval = problem.evaluate(&coeffs)?;
    let initial_energy = eval.report;
    let mut step = 0.0;
    let mut dnorm = 0.0;
    let mut outcome = Outcome::IterationCap;
    let mut it = 0;
    loop {
        let vi = problem.vi_residual(&coeffs, &eval.gradient);
        history.push(record(offset + it, &eval.report, vi, &coeffs, step));
        if vi <= cfg.vi_tol {
            outcome = Outcome::Converged;
            break;
        }
        if it >= cfg.max_iter {
            break;
        }
        let d = problem.direction(&coeffs, &eval.gradient);
        dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut alpha = cfg.initial_step;
        let accepted = loop {
            if alpha < cfg.min_step {
                break None;
            }
            let mut trial: Vec<f64> = coeffs.iter().zip(&d).map(|(c, di)| c + alpha * di).collect();
            problem.project(&mut trial);
            let predicted: f64 = eval.gradient.iter().zip(trial.iter().zip(&coeffs)).map(|(g, (t, c))| g * (t - c)).sum();
            match problem.evaluate(&trial) {
                Ok(te) => {
                    let t = te.report.total;
                    let e = eval.report.total;
                    if t <= e + cfg.armijo * predicted && t <= e {
                        break Some((trial, te));
                    }
                }
                Err(Error::DegenerateGeometry { .. }) | Err(Error::InadmissibleDeflection(_)) => {}
                Err(e) => return Err(e),
            }
            alpha *= cfg.backtrack;
        };
        let Some((trial, te)) = accepted else {
            outcome = Outcome::Stalled;
            break;
        };
        step = trial.iter().zip(&coeffs).map(|(t, c)| (t - c).powi(2)).sum::<f64>().sqrt();
        coeffs = trial;
        eval = te;
        it += 1;
        if step < cfg.step_tol {
            let vi = problem.vi_residual(&coeffs, &eval.gradient);
            history.push(record(offset + it, &eval.report, vi, &coeffs, step));
            outcome = if vi <= cfg.vi_tol { Outcome::Converged } else { Outcome::Stalled };
            break;
        }
    }
    let vi = history.last().map_or(0.0, |r| r.vi_residual);
    let active_set = problem.active_nodes(&coeffs);
    let u = problem.profile(&coeffs);
    Ok(MinimizeResult {
        obstacle_contact: !active_set.is_empty(),
        state: MinimizationState {
            u,
            energy: eval.report,
            direction_norm: dnorm,
            step,
            active_set,
            vi_residual: vi,
            iteration: it,
        },
        outcome,
        history,
        initial_energy,
    })
}

/// Gradient of the total energy (without penalties) with respect to the Hermite
/// coefficients; constrained entries are zero.
pub fn energy_gradient(model: &ElectrostaticModel, u: &DeflectionProfile, route: ForceRoute) -> Result<Vec<f64>> {
    let cfg = MinimizeConfig { force_route: route, ..MinimizeConfig::default() };
    let problem = EnergyProblem::new(model, cfg, u)?;
    Ok(problem.evaluate(&u.coefficients())?.gradient)
}

/// Stationarity residual of `u` for the unpenalized problem.
pub fn vi_residual(model: &ElectrostaticModel, u: &DeflectionProfile, route: ForceRoute) -> Result<f64> {
    let cfg = MinimizeConfig { force_route: route, ..MinimizeConfig::default() };
    let problem = EnergyProblem::new(model, cfg, u)?;
    let c = u.coefficients();
    let g = problem.evaluate(&c)?.gradient;
    Ok(problem.vi_residual(&c, &g))
}

/// Minimizes along an increasing voltage list, warm-starting from the previous state.
pub fn voltage_sweep(
    model: &ElectrostaticModel,
    cfg: &MinimizeConfig,
    u0: &DeflectionProfile,
    voltages: &[f64],
) -> Result<Vec<(f64, MinimizeResult)>> {
    let mut out = Vec::with_capacity(voltages.len());
    let mut u = u0.clone();
    for &v in voltages {
        let mut m = model.clone();
        m.params.voltage = v;
        let res = minimize_total_energy(&m, cfg, &u)?;
        u = res.state.u.clone();
        out.push((v, res));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn model(v: f64, n: usize) -> ElectrostaticModel {
        ElectrostaticModel::new(PhysicalParams::base().with_voltage(v), n, n / 2, n / 2).unwrap()
    }

    #[test]
    fn unloaded_flat_state_is_stationary() {
        let m = model(0.0, 16);
        let u = DeflectionProfile::flat_for(&m.params, 16);
        let g = energy_gradient(&m, &u, ForceRoute::Consistent).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
        assert_eq!(vi_residual(&m, &u, ForceRoute::Trace).unwrap(), 0.0);
        let res = minimize_total_energy(&m, &MinimizeConfig::default(), &u).unwrap();
        assert_eq!(res.outcome, Outcome::Converged);
        assert_eq!(res.state.iteration, 0);
        assert_eq!(res.state.energy.total, 0.0);
    }

    #[test]
    fn bending_gradient_of_the_quartic() {
        // u'''' = 2.4, so int u'' phi'' = 2.4 int phi: h for value dofs, 0 for slopes
        let m = model(0.0, 16);
        let n = 16;
        let u = DeflectionProfile::from_fn(1.0, n, BcMode::Clamped, -0.999, |x| 0.1 * (1.0 - x * x).powi(2), |x| -0.4 * x * (1.0 - x * x));
        let g = energy_gradient(&m, &u, ForceRoute::Consistent).unwrap();
        let h = 2.0 / n as f64;
        for k in 1..n {
            assert!((g[2 * k] - 2.4 * h).abs() < 1e-10, "k={k} {}", g[2 * k]);
            assert!(g[2 * k + 1].abs() < 1e-10);
        }
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn coercivity_guard() {
        let mut m = model(1.0, 8);
        m.params.sigma1 = 3.0;
        let u = DeflectionProfile::flat_for(&m.params, 8);
        assert!(minimize_total_energy(&m, &MinimizeConfig::default(), &u).is_err());
        let cfg = MinimizeConfig { cap_penalty: CapPenalty { enabled: true, cap: 0.5, weight: 10.0 }, ..Default::default() };
        assert!(minimize_total_energy(&m, &cfg, &u).is_ok());
    }

    #[test]
    fn config_validation() {
        let c = MinimizeConfig { backtrack: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = MinimizeConfig { obstacle: ObstacleMode::Penalty { weight: 0.0, growth: 10.0, stages: 2 }, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn cap_penalty_vanishes_below_cap() {
        let m = model(0.5, 8);
        let u = DeflectionProfile::from_fn(1.0, 8, BcMode::Clamped, -0.999, |x| -0.1 * (1.0 - x * x).powi(2), |x| 0.4 * x * (1.0 - x * x));
        let cfg = MinimizeConfig { cap_penalty: CapPenalty { enabled: true, cap: 0.01, weight: 100.0 }, ..Default::default() };
        let pb = EnergyProblem::new(&m, cfg, &u).unwrap();
        assert_eq!(pb.penalty(&u.coefficients()), 0.0);
        let up = DeflectionProfile::from_fn(1.0, 8, BcMode::Clamped, -0.999, |x| 0.1 * (1.0 - x * x).powi(2), |x| -0.4 * x * (1.0 - x * x));
        assert!(pb.penalty(&up.coefficients()) > 0.0);
    }
}
