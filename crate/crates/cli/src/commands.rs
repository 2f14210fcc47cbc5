use anyhow::Result;
use memsplate::io::{write_deflection, write_potential_grid};
use memsplate::minimize::IterationRecord;
use memsplate::verify::{
    continuity_probe, fd_directional_derivative, jump_study, mms_convergence, monotone_pairs, monotonicity_probe,
    CsvTable, ProbeReport,
};
use memsplate::{
    electrostatic_energy, electrostatic_force, mechanical_energy, minimize_total_energy, MinimizeResult, Outcome, Shape,
};
use serde_json::json;

use crate::config::{Probe, Resolved};
use crate::output::{f, Output};

/// Process outcome of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

fn mesh_json(r: &Resolved) -> serde_json::Value {
    let m = &r.config.mesh;
    json!({ "nx": m.nx, "nz1": m.nz1, "nz2": m.nz2, "nodes": (m.nx + 1) * (m.nz1 + m.nz2 + 1) })
}

pub fn solve(r: &Resolved, out: &mut Output) -> Result<Status> {
    let model = r.model()?;
    let u = r.deflection()?;
    let phi = model.solve(&u)?;
    let ee = electrostatic_energy(&phi, &phi.coefficients);
    out.write("potential.grid", &write_potential_grid(&phi, &out.provenance()))?;
    let tr = model.traces(&phi);
    let mut t = String::from("x,u,slope,upper_x,upper_z,lower_x,lower_z,top_x,top_z\n");
    for k in 0..tr.len() {
        let row = [tr.x[k], tr.u[k], tr.slope[k], tr.interface_upper[k][0], tr.interface_upper[k][1], tr.interface_lower[k][0], tr.interface_lower[k][1], tr.top[k][0], tr.top[k][1]];
        t += &row.map(f).join(",");
        t.push('\n');
    }
    out.csv("traces.csv", &t)?;
    out.json(
        "energy.json",
        json!({
            "command": "solve",
            "electrostatic_energy": ee,
            "mechanical_energy": mechanical_energy(&u, &model.params),
            "solver": { "iterations": phi.stats.iterations, "relative_residual": phi.stats.rel_residual },
            "mesh": mesh_json(r),
        }),
    )?;
    Ok(Status::Success)
}

pub fn force(r: &Resolved, out: &mut Output) -> Result<Status> {
    let model = r.model()?;
    let u = r.deflection()?;
    let phi = model.solve(&u)?;
    let g = electrostatic_force(&model.traces(&phi), &model.params);
    let mut t = String::from("x,g,interface_tangential,interface_normal,top\n");
    for k in 0..g.g.len() {
        t += &[g.x[k], g.g[k], g.interface_tangential[k], g.interface_normal[k], g.top[k]].map(f).join(",");
        t.push('\n');
    }
    out.csv("force.csv", &t)?;
    out.json(
        "force.json",
        json!({
            "command": "force",
            "min_g": g.min(),
            "max_g": g.g.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "integral_g": g.g.iter().zip(&g.widths).map(|(a, w)| a * w).sum::<f64>(),
            "mesh": mesh_json(r),
        }),
    )?;
    Ok(Status::Success)
}

pub fn energy(r: &Resolved, out: &mut Output) -> Result<Status> {
    let model = r.model()?;
    let u = r.deflection()?;
    let e = model.total_energy(&u)?;
    out.json("energy.json", json!({ "command": "energy", "energy": e, "mesh": mesh_json(r) }))?;
    Ok(Status::Success)
}

fn history_csv(history: &[IterationRecord]) -> String {
    let mut t = format!("{}\n", IterationRecord::CSV_HEADER);
    for h in history {
        t += &h.csv_row();
        t.push('\n');
    }
    t
}

fn summary(res: &MinimizeResult) -> serde_json::Value {
    let u = &res.state.u;
    json!({
        "outcome": res.outcome,
        "iterations": res.state.iteration,
        "vi_residual": res.state.vi_residual,
        "active_set": res.state.active_set,
        "obstacle_contact": res.obstacle_contact,
        "max_u": u.max_value(),
        "min_u": u.min_value(),
        "energy": res.state.energy,
        "initial_energy": res.initial_energy,
    })
}

pub fn minimize(r: &Resolved, out: &mut Output) -> Result<Status> {
    let model = r.model()?;
    let u0 = r.deflection()?;
    let res = minimize_total_energy(&model, &r.config.minimize, &u0)?;
    out.csv("iterations.csv", &history_csv(&res.history))?;
    out.write("deflection.txt", &write_deflection(&res.state.u, model.params.gap, &out.provenance()))?;
    let mut s = summary(&res);
    s["command"] = json!("minimize");
    out.json("summary.json", s)?;
    Ok(if res.outcome == Outcome::Converged { Status::Success } else { Status::Failure })
}

pub fn sweep(r: &Resolved, out: &mut Output) -> Result<Status> {
    let base = r.params();
    let mut u = r.deflection()?;
    let mut t = String::from("voltage,outcome,iterations,vi_residual,min_u,max_u,E_total,contact\n");
    let mut runs = Vec::new();
    let mut ok = true;
    for &v in &r.config.sweep.voltages {
        let model = r.model_with(base.with_voltage(v))?;
        let res = minimize_total_energy(&model, &r.config.minimize, &u)?;
        ok &= res.outcome == Outcome::Converged;
        t += &format!(
            "{},{:?},{},{},{},{},{},{}\n",
            f(v),
            res.outcome,
            res.state.iteration,
            f(res.state.vi_residual),
            f(res.state.u.min_value()),
            f(res.state.u.max_value()),
            f(res.state.energy.total),
            res.obstacle_contact
        );
        let mut s = summary(&res);
        s["voltage"] = json!(v);
        runs.push(s);
        u = res.state.u.clone();
    }
    let mins: Vec<f64> = runs.iter().filter_map(|s| s["min_u"].as_f64()).collect();
    let monotone = mins.windows(2).all(|w| w[1] <= w[0]);
    out.csv("sweep.csv", &t)?;
    out.json("sweep.json", json!({ "command": "sweep", "runs": runs, "monotone_deepening": monotone }))?;
    Ok(if ok { Status::Success } else { Status::Failure })
}

fn derivative_probe(r: &Resolved) -> Result<ProbeReport> {
    let model = r.model()?;
    let u = r.deflection()?;
    let v = &r.config.verify;
    let mut table = CsvTable::new(["direction", "analytic", "consistent", "extrapolated", "mismatch", "consistent_mismatch"]);
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for sh in Shape::ALL {
        let theta = sh.profile(-0.05 * model.params.gap, model.params.half_width, u.n_elem(), -10.0 * model.params.gap);
        let rep = fd_directional_derivative(&model, &u, &theta, sh.name(), &v.steps)?;
        worst = worst.max(rep.mismatch);
        if !rep.passed(v.derivative_tol) {
            failed.push(sh.name());
        }
        table.push([sh.name().to_string(), f(rep.analytic), f(rep.consistent), f(rep.extrapolated), f(rep.mismatch), f(rep.consistent_mismatch)]);
    }
    Ok(ProbeReport::new(
        "derivative",
        failed.is_empty(),
        json!({ "worst_mismatch": worst, "tolerance": v.derivative_tol, "failed": failed }),
        table,
    ))
}

fn mms_probe(r: &Resolved) -> Result<ProbeReport> {
    let s = mms_convergence(&r.params(), &r.config.verify.mms_ladder)?;
    let mut table = CsvTable::new(["n", "h", "l2", "h1", "flux_jump"]);
    for l in &s.levels {
        table.push([l.n.to_string(), f(l.h), f(l.l2), f(l.h1), f(l.flux_jump)]);
    }
    let passed = s.min_l2_order() >= 1.9 && s.min_h1_order() >= 0.9;
    Ok(ProbeReport::new("mms", passed, json!({ "l2_orders": s.l2_orders, "h1_orders": s.h1_orders, "flux_orders": s.flux_orders }), table))
}

fn jumps_probe(r: &Resolved) -> Result<ProbeReport> {
    let p = r.params();
    let rec = r.config.solver.recovery;
    let s = jump_study(&p, Shape::Skewed, -0.15 * p.gap, &r.config.verify.jump_ladder, memsplate::TraceRecovery::CellCenter)?;
    let s_rec = jump_study(&p, Shape::Skewed, -0.15 * p.gap, &r.config.verify.jump_ladder, rec)?;
    let mut table = CsvTable::new(["recovery", "n", "f_jump", "sigma_g_jump", "force_form_gap", "force_form_bound"]);
    for st in [&s, &s_rec] {
        for l in &st.levels {
            let j = &l.residuals;
            table.push([format!("{:?}", st.recovery), l.n.to_string(), f(j.f_jump), f(j.sigma_g_jump), f(j.force_form_gap), f(j.force_form_bound)]);
        }
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = min(&s.f_orders) >= 0.9 && min(&s.sigma_g_orders) >= 0.9 && s.forms_consistent && s_rec.forms_consistent;
    Ok(ProbeReport::new(
        "jumps",
        passed,
        json!({ "f_orders": s.f_orders, "sigma_g_orders": s.sigma_g_orders, "recovered_sigma_g_orders": s_rec.sigma_g_orders, "forms_consistent": s.forms_consistent && s_rec.forms_consistent }),
        table,
    ))
}

fn monotonicity(r: &Resolved) -> Result<ProbeReport> {
    let model = r.model()?;
    let v = &r.config.verify;
    let pairs = monotone_pairs(&model.params, r.config.mesh.nx, v.pairs, r.config.seed);
    let cases = monotonicity_probe(&model, &pairs, v.monotonicity_tol)?;
    let mut table = CsvTable::new(["pair", "E_lower", "E_upper", "passed"]);
    for c in &cases {
        table.push([c.id.clone(), f(c.lower_energy), f(c.upper_energy), c.passed.to_string()]);
    }
    let failed = cases.iter().filter(|c| !c.passed).count();
    Ok(ProbeReport::new("monotonicity", failed == 0, json!({ "pairs": cases.len(), "failed": failed }), table))
}

fn continuity(r: &Resolved) -> Result<ProbeReport> {
    let model = r.model()?;
    let u = r.deflection()?;
    let p = &model.params;
    let bump = Shape::Bump.profile(-0.1 * p.gap, p.half_width, u.n_elem(), -10.0 * p.gap);
    let t = continuity_probe(&model, &u, &bump, &r.config.verify.continuity_indices)?;
    let mut table = CsvTable::new(["n", "trace_l1", "trace_l2", "trace_l4", "force_l1", "force_l2", "force_l4", "energy_gap", "h1_distance"]);
    for row in &t.rows {
        let mut cells = vec![row.n.to_string()];
        cells.extend(row.trace.iter().chain(&row.force).map(|&v| f(v)));
        cells.push(f(row.energy_gap));
        cells.push(f(row.h1_distance));
        table.push(cells);
    }
    let worst = t.worst_slope();
    let passed = worst.is_some_and(|s| s <= r.config.verify.max_slope);
    Ok(ProbeReport::new(
        "continuity",
        passed,
        json!({ "worst_slope": worst, "max_slope": r.config.verify.max_slope, "trace_slopes": t.trace_slopes, "force_slopes": t.force_slopes, "energy_slope": t.energy_slope, "h1_slope": t.h1_slope }),
        table,
    ))
}

pub fn verify(r: &Resolved, out: &mut Output) -> Result<Status> {
    let probes = &r.config.verify.probes;
    if probes.is_empty() {
        eprintln!("warning: no probes selected");
    }
    let mut reports = Vec::new();
    for &p in probes {
        let rep = match p {
            Probe::Derivative => derivative_probe(r)?,
            Probe::Mms => mms_probe(r)?,
            Probe::Jumps => jumps_probe(r)?,
            Probe::Monotonicity => monotonicity(r)?,
            Probe::Continuity => continuity(r)?,
        };
        out.csv(&format!("{}.csv", p.name()), &rep.table.render())?;
        out.json(&format!("{}.json", p.name()), rep.json())?;
        eprintln!("{}: {}", p.name(), if rep.passed { "pass" } else { "FAIL" });
        reports.push(rep);
    }
    let all = reports.iter().all(|r| r.passed);
    out.json(
        "verify.json",
        json!({ "command": "verify", "passed": all, "probes": reports.iter().map(|r| json!({ "probe": r.name, "passed": r.passed })).collect::<Vec<_>>() }),
    )?;
    Ok(if all { Status::Success } else { Status::Failure })
}
