use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalogue::{add_profiles, Shape};
use crate::energy_force::{electrostatic_force, jump_residuals, ElectrostaticModel, JumpResiduals};
use crate::error::{Error, Result};
use crate::hermite::DeflectionProfile;
use crate::params::PhysicalParams;
use crate::transmission::{electrostatic_energy, h1_seminorm_distance, TraceRecovery};

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCase {
    pub id: String,
    pub lower_energy: f64,
    pub upper_energy: f64,
    pub passed: bool,
}

/// Deterministic ordered pairs `(id, u0, u1)` with `u0 <= u1`; the first two are the
/// reference pair `(-0.2 (1 - x^2)^2, 0)` and an identical pair.
pub fn monotone_pairs(params: &PhysicalParams, n_elem: usize, count: usize, seed: u64) -> Vec<(String, DeflectionProfile, DeflectionProfile)> {
    let floor = params.gap_floor(crate::DEFAULT_EPS_GAP);
    let l = params.half_width;
    let scale = 0.2 * params.gap;
    let mut out = Vec::with_capacity(count);
    let flat = DeflectionProfile::flat(l, n_elem, Default::default(), floor);
    out.push(("reference".to_string(), Shape::Bump.profile(-scale, l, n_elem, floor), flat.clone()));
    let same = Shape::Wiggle.profile(-0.5 * scale, l, n_elem, floor);
    out.push(("identical".to_string(), same.clone(), same));
    let nonneg = [Shape::Bump, Shape::Skewed, Shape::DoubleHump, Shape::Narrow];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let base = Shape::ALL[rng.random_range(0..Shape::ALL.len())];
        let gap = nonneg[rng.random_range(0..nonneg.len())];
        let a: f64 = rng.random_range(-1.0..1.0) * scale;
        let b: f64 = rng.random_range(0.01..1.0) * scale;
        let u1 = base.profile(a, l, n_elem, floor);
        let u0 = add_profiles(&u1, &gap.profile(b, l, n_elem, floor), -1.0);
        let id = format!("{}({a:+.4})-{}({b:.4})", base.name(), gap.name());
        out.push((id, u0, u1));
    }
    out
}

/// Checks `E_e(u0) <= E_e(u1) + tol` for every pair.
pub fn monotonicity_probe(
    model: &ElectrostaticModel,
    pairs: &[(String, DeflectionProfile, DeflectionProfile)],
    tol: f64,
) -> Result<Vec<MonotonicityCase>> {
    pairs
        .iter()
        .map(|(id, u0, u1)| {
            if u0.u_values.iter().zip(&u1.u_values).any(|(a, b)| a > b) {
                return Err(Error::InvalidParameter { name: "pairs", reason: format!("pair `{id}` is not ordered") });
            }
            let e0 = model.energy(u0)?;
            let e1 = model.energy(u1)?;
            Ok(MonotonicityCase { id: id.clone(), lower_energy: e0, upper_energy: e1, passed: e0 <= e1 + tol })
        })
        .collect()
}

/// Distances between the states `u_n` and the limit `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityRow {
    pub n: usize,
    /// `L_p` distances of the one-sided gradient traces, `p = 1, 2, 4`.
    pub trace: [f64; 3],
    /// `L_p` distances of the force density, `p = 1, 2, 4`.
    pub force: [f64; 3],
    pub energy_gap: f64,
    /// `H1` seminorm distance of the pulled-back potentials.
    pub h1_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    pub trace_slopes: [Option<f64>; 3],
    pub force_slopes: [Option<f64>; 3],
    pub energy_slope: Option<f64>,
    pub h1_slope: Option<f64>,
}

impl ContinuityTable {
    /// Largest fitted slope over all columns; `None` when some column is identically zero.
    pub fn worst_slope(&self) -> Option<f64> {
        let all: Vec<Option<f64>> =
            self.trace_slopes.iter().chain(&self.force_slopes).copied().chain([self.energy_slope, self.h1_slope]).collect();
        all.iter().copied().collect::<Option<Vec<f64>>>().map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Every column vanishes on every row.
    pub fn all_zero(&self) -> bool {
        self.rows.iter().all(|r| r.trace.iter().chain(&r.force).all(|&v| v == 0.0) && r.energy_gap == 0.0 && r.h1_distance == 0.0)
    }
}

/// Least-squares slope of `log y` against `log n`; `None` if any `y` is not positive.
pub fn fitted_slope(n: &[f64], y: &[f64]) -> Option<f64> {
    if n.len() < 2 || y.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Some(sxy / sxx)
}

fn lp(widths: &[f64], d: &[f64], p: f64) -> f64 {
    widths.iter().zip(d).map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Tabulates distances along `u_n = u + bump / n`.
pub fn continuity_probe(model: &ElectrostaticModel, u: &DeflectionProfile, bump: &DeflectionProfile, ns: &[usize]) -> Result<ContinuityTable> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::InvalidParameter { name: "ns", reason: "need positive sequence indices".into() });
    }
    let phi = model.solve(u)?;
    let e = electrostatic_energy(&phi, &phi.coefficients);
    let tr = model.traces(&phi);
    let g = electrostatic_force(&tr, &model.params);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let un = add_profiles(u, bump, 1.0 / n as f64);
        let phin = model.solve(&un)?;
        let en = electrostatic_energy(&phin, &phin.coefficients);
        let trn = model.traces(&phin);
        let gn = electrostatic_force(&trn, &model.params);
        let dt: Vec<f64> = (0..tr.len())
            .map(|k| {
                let sq = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
                (sq(tr.interface_upper[k], trn.interface_upper[k])
                    + sq(tr.interface_lower[k], trn.interface_lower[k])
                    + sq(tr.top[k], trn.top[k]))
                .sqrt()
            })
            .collect();
        let dg: Vec<f64> = g.g.iter().zip(&gn.g).map(|(a, b)| a - b).collect();
        rows.push(ContinuityRow {
            n,
            trace: [1.0, 2.0, 4.0].map(|p| lp(&tr.widths, &dt, p)),
            force: [1.0, 2.0, 4.0].map(|p| lp(&tr.widths, &dg, p)),
            energy_gap: (en - e).abs(),
            h1_distance: h1_seminorm_distance(&phin, &phi),
        });
    }
    let nf: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let col = |f: &dyn Fn(&ContinuityRow) -> f64| fitted_slope(&nf, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(ContinuityTable {
        trace_slopes: [0, 1, 2].map(|i| col(&|r| r.trace[i])),
        force_slopes: [0, 1, 2].map(|i| col(&|r| r.force[i])),
        energy_slope: col(&|r| r.energy_gap),
        h1_slope: col(&|r| r.h1_distance),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpLevel {
    pub n: usize,
    pub h: f64,
    pub residuals: JumpResiduals,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpStudy {
    pub recovery: TraceRecovery,
    pub levels: Vec<JumpLevel>,
    pub f_orders: Vec<f64>,
    pub sigma_g_orders: Vec<f64>,
    /// The two force forms agree within the jump bound on every level.
    pub forms_consistent: bool,
}

fn pair_orders(levels: &[JumpLevel], f: impl Fn(&JumpResiduals) -> f64) -> Vec<f64> {
    levels
        .windows(2)
        .map(|w| (f(&w[0].residuals) / f(&w[1].residuals)).ln() / (w[0].h / w[1].h).ln())
        .collect()
}

/// Interface jump residuals of `amplitude * shape` on `n x n` meshes.
pub fn jump_study(params: &PhysicalParams, shape: Shape, amplitude: f64, ladder: &[usize], recovery: TraceRecovery) -> Result<JumpStudy> {
    if ladder.len() < 2 || ladder.iter().any(|&n| n < 4 || n % 2 != 0) {
        return Err(Error::InvalidParameter { name: "ladder", reason: "need at least two even sizes >= 4".into() });
    }
    let mut levels = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let mut model = ElectrostaticModel::new(*params, n, n / 2, n / 2)?;
        model.recovery = recovery;
        let u = shape.profile(amplitude, params.half_width, n, params.gap_floor(crate::DEFAULT_EPS_GAP));
        let phi = model.solve(&u)?;
        let residuals = jump_residuals(&model.traces(&phi), params);
        levels.push(JumpLevel { n, h: 2.0 * params.half_width / n as f64, residuals });
    }
    Ok(JumpStudy {
        recovery,
        f_orders: pair_orders(&levels, |r| r.f_jump),
        sigma_g_orders: pair_orders(&levels, |r| r.sigma_g_jump),
        forms_consistent: levels.iter().all(|l| l.residuals.force_forms_consistent),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let n = [2.0, 4.0, 8.0, 16.0];
        let y: Vec<f64> = n.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((fitted_slope(&n, &y).unwrap() + 1.5).abs() < 1e-12);
        assert!(fitted_slope(&n, &[1.0, 0.0, 1.0, 1.0]).is_none());
    }

    #[test]
    fn pairs_are_ordered_and_reproducible() {
        let p = PhysicalParams::base();
        let a = monotone_pairs(&p, 8, 20, 7);
        let b = monotone_pairs(&p, 8, 20, 7);
        assert_eq!(a.len(), 20);
        for ((ia, u0, u1), (ib, v0, _)) in a.iter().zip(&b) {
            assert_eq!(ia, ib);
            assert_eq!(u0.u_values, v0.u_values);
            assert!(u0.u_values.iter().zip(&u1.u_values).all(|(x, y)| x <= y));
            assert!(u0.validate().is_ok() && u1.validate().is_ok());
        }
    }

    #[test]
    fn constant_sequence_has_zero_distances() {
        let p = PhysicalParams::base();
        let m = ElectrostaticModel::new(p, 8, 4, 4).unwrap();
        let u = Shape::Bump.profile(-0.1, 1.0, 8, p.gap_floor(1e-3));
        let zero = DeflectionProfile::flat(1.0, 8, Default::default(), -10.0);
        let t = continuity_probe(&m, &u, &zero, &[2, 4]).unwrap();
        assert!(t.all_zero());
        assert!(t.worst_slope().is_none());
    }

    #[test]
    fn unordered_pair_is_rejected() {
        let p = PhysicalParams::base();
        let m = ElectrostaticModel::new(p, 8, 4, 4).unwrap();
        let mut pairs = monotone_pairs(&p, 8, 3, 1);
        let (id, u0, u1) = pairs.remove(0);
        assert!(monotonicity_probe(&m, &[(id, u1, u0)], 1e-10).is_err());
    }
}
