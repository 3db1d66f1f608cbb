use std::path::Path;

use quadopo::config::ParamsFile;
use quadopo::linearized::{
    assemble, locate_threshold, output_spectra, steady_state, threshold_scan, FrequencyGrid,
    ScanOptions, ScanStatus,
};
use quadopo::positive_p::{
    intensity, joint_variances, InitialState, SimConfig, Simulation, Snapshot,
};
use quadopo::quadrature::CovarianceState;
use quadopo::undepleted::{
    cluster_residuals, evolve_covariance, joint_operator_variances, JointOperatorSpec,
};
use quadopo::vlf::optimized_report;
use quadopo::{build_graph_matrices, critical_pump, Error, Result, SystemParams, UndepletedParams};
use serde_json::{json, Value};

use crate::args::{AllArgs, ClusterArgs, Common, PospArgs, ScanArgs, SpectraArgs, UndepletedArgs};
use crate::output::{csv_writer, flush, num, strings, write_json, write_row, write_table, Outputs};

/// Defaults, then the parameter file, then command-line overrides.
pub fn resolve_params(
    common: &Common,
    default_ratio: Option<f64>,
) -> Result<(ParamsFile, SystemParams<f64>)> {
    let mut file = match &common.params {
        Some(path) => ParamsFile::load(path)?,
        None => ParamsFile::default(),
    };
    file = file.merged(&common.overrides());
    let pump_set = file.eps.is_some()
        || file.eps_ratio.is_some()
        || file.eps1.is_some()
        || file.eps2.is_some();
    if !pump_set {
        file.eps_ratio = default_ratio;
    }
    let params = file.resolve()?;
    Ok((file, params))
}

pub fn threshold(params: &SystemParams<f64>, out: &mut Outputs) -> Result<Value> {
    let ec = critical_pump(params)?;
    let (chi, gamma, _) = params
        .symmetric_values()
        .ok_or_else(|| Error::Asymmetric("threshold".into()))?;
    let bisection = locate_threshold(chi, gamma, 1e-10);
    println!("eps_c = {ec:.4}");
    let summary = json!({ "eps_c": ec, "bisection": bisection, "chi": chi, "gamma": gamma });
    write_json(&out.path("threshold.json"), &summary)?;
    Ok(summary)
}

fn ratio_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) {
        return Err(Error::InvalidParams(
            "grid needs step > 0 and an increasing range".into(),
        ));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + step * k as f64).collect())
}

pub fn undepleted(args: &UndepletedArgs, out: &mut Outputs) -> Result<Value> {
    if !(args.xi2_ratio >= 0.0) || args.points < 2 || !(args.xi_t_max > 0.0) {
        return Err(Error::InvalidParams(
            "need xi2-ratio >= 0, xi-t-max > 0 and at least two points".into(),
        ));
    }
    let name = if args.xi2_ratio == 1.0 {
        "fig02.csv"
    } else {
        "fig03.csv"
    };
    let step = args.xi_t_max / (args.points - 1) as f64;
    let mut rows = Vec::with_capacity(args.points);
    for k in 0..args.points {
        let t = step * k as f64;
        let st = evolve_covariance(
            &CovarianceState::vacuum(),
            &UndepletedParams::new(1.0, args.xi2_ratio, t),
        );
        let r = match optimized_report(&st.cov) {
            Ok(r) => r,
            // the vacuum has no correlations to optimize over
            Err(Error::DegenerateCovariance { .. }) if k == 0 => continue,
            Err(e) => return Err(e),
        };
        let g = r.gains;
        rows.push(vec![
            num(t),
            num(r.i36),
            num(r.i45),
            num(r.i56),
            num(g.g3),
            num(g.g4),
            num(g.g5),
            num(g.g6),
            r.entangled.to_string(),
        ]);
    }
    write_table(
        &out.path(name),
        &[
            "xi_t",
            "I36",
            "I45",
            "I56",
            "g3",
            "g4",
            "g5",
            "g6",
            "entangled",
        ],
        rows,
    )?;
    Ok(json!({ "xi2_ratio": args.xi2_ratio, "xi_t_max": args.xi_t_max, "points": args.points }))
}

pub fn spectra(params: &SystemParams<f64>, args: &SpectraArgs, out: &mut Outputs) -> Result<Value> {
    if !(args.omega_max > 0.1) {
        return Err(Error::InvalidParams("omega-max must exceed 0.1".into()));
    }
    let ratio = params.pump_ratio()?;
    let stem = if ratio < 1.0 { "fig06" } else { "fig08" };
    let steady = steady_state(params)?;
    let model = assemble(params, &steady);
    write_json(&out.path(&format!("{stem}_audit.json")), &model.audit())?;
    let n_lin = ((args.omega_max - 0.1) / 0.01).round() as usize + 1;
    let grid = FrequencyGrid::log_linear(1e-4, 0.1, args.omega_max, 120, n_lin.max(2));
    let series = output_spectra(&model, &grid)?;
    let rows = series.i_out.iter().zip(&series.omega_grid).map(|(r, &w)| {
        let g = r.gains;
        vec![
            num(w),
            num(r.i36),
            num(r.i45),
            num(r.i56),
            num(g.g3),
            num(g.g4),
            num(g.g5),
            num(g.g6),
            series.stable.to_string(),
        ]
    });
    write_table(
        &out.path(&format!("{stem}.csv")),
        &[
            "omega", "I36", "I45", "I56", "g3", "g4", "g5", "g6", "stable",
        ],
        rows,
    )?;
    Ok(json!({ "eps_ratio": ratio, "omega_max": args.omega_max, "grid_points": grid.len() }))
}

pub fn scan(
    params: &SystemParams<f64>,
    args: &ScanArgs,
    injection: Option<f64>,
    out: &mut Outputs,
) -> Result<Value> {
    let ratios = ratio_grid(args.from, args.to, args.step)?;
    let options = ScanOptions {
        injection: injection.unwrap_or(args.scan_injection),
        ..ScanOptions::default()
    };
    let points = threshold_scan(params, &ratios, &options)?;
    let rows = points.iter().map(|p| {
        let status = match p.status {
            ScanStatus::Valid => "valid",
            ScanStatus::NearThreshold => "near_threshold",
            ScanStatus::Invalid => "invalid",
        };
        vec![
            num(p.eps_ratio),
            status.to_string(),
            num(p.min[0]),
            num(p.min[1]),
            num(p.min[2]),
            num(p.argmin_omega[0]),
            num(p.max[0]),
            p.reason.clone().unwrap_or_default(),
        ]
    });
    write_table(
        &out.path("fig09.csv"),
        &[
            "eps_ratio",
            "status",
            "min_I36",
            "min_I45",
            "min_I56",
            "argmin_omega",
            "max_I36",
            "reason",
        ],
        rows,
    )?;
    Ok(
        json!({ "from": args.from, "to": args.to, "step": args.step, "injection": options.injection, "exclusion": options.exclusion }),
    )
}

pub fn cluster(args: &ClusterArgs, out: &mut Outputs) -> Result<Value> {
    if args.points < 2 || !(args.r_max > 0.0) {
        return Err(Error::InvalidParams(
            "need r-max > 0 and at least two points".into(),
        ));
    }
    let graph = build_graph_matrices::<f64>();
    let step = args.r_max / (args.points - 1) as f64;
    let grid: Vec<f64> = (0..args.points).map(|k| step * k as f64).collect();
    let ops = joint_operator_variances(&UndepletedParams::symmetric(1.0, 0.0), &grid);
    let rows = ops.iter().map(|jv| {
        let st = evolve_covariance(
            &CovarianceState::vacuum(),
            &UndepletedParams::symmetric(1.0, jv.t),
        );
        let res = cluster_residuals(&st, &graph);
        let mut row = vec![num(jv.t)];
        row.extend(jv.values.iter().map(|v| num(*v)));
        row.extend(res.iter().map(|v| num(*v)));
        row
    });
    write_table(
        &out.path("cluster.csv"),
        &[
            "r",
            "O1",
            "O2",
            "O3",
            "O4",
            "nullifier1",
            "nullifier2",
            "nullifier3",
            "nullifier4",
        ],
        rows,
    )?;
    Ok(json!({ "r_max": args.r_max, "points": args.points }))
}

struct EnsembleRun {
    sim: Simulation<f64>,
    resumed: bool,
}

fn start_ensemble(
    params: &SystemParams<f64>,
    config: SimConfig<f64>,
    args: &PospArgs,
) -> Result<EnsembleRun> {
    if let (true, Some(path)) = (args.resume, &args.checkpoint) {
        if path.exists() {
            let sim = Simulation::load_checkpoint(*params, config, path)?;
            return Ok(EnsembleRun { sim, resumed: true });
        }
    }
    Ok(EnsembleRun {
        sim: Simulation::new(*params, config)?,
        resumed: false,
    })
}

/// Step through the output grid, handing each snapshot to `emit` and saving
/// a checkpoint after it. When resuming, the snapshot at the restart time
/// was already written and is skipped.
fn drive(
    run: &mut EnsembleRun,
    checkpoint: Option<&Path>,
    halt_after: Option<usize>,
    mut emit: impl FnMut(&Snapshot<f64>) -> Result<()>,
) -> Result<()> {
    let sim = &mut run.sim;
    let mut skip = run.resumed;
    let mut written = 0;
    loop {
        if sim.step_index().is_multiple_of(sim.steps_per_output()) {
            if !skip {
                let snap = sim.snapshot();
                if snap.points.len() < 2 {
                    return Err(Error::DivergedTrajectory {
                        index: 0,
                        time: snap.t,
                    });
                }
                emit(&snap)?;
                written += 1;
            }
            skip = false;
            if let Some(path) = checkpoint {
                sim.save_checkpoint(path)?;
            }
            if halt_after == Some(written) {
                return Ok(());
            }
        }
        if sim.is_finished() {
            return Ok(());
        }
        let next = (sim.step_index() / sim.steps_per_output() + 1) * sim.steps_per_output();
        sim.run_steps(next - sim.step_index());
    }
}

fn posp_config(params: &SystemParams<f64>, args: &PospArgs) -> Result<SimConfig<f64>> {
    let (n_desk, n_paper, dt, t_final, outputs) = if args.cavity {
        (20_000, 50_000, 0.005, 10.0, 40)
    } else {
        (20_000, 300_000, 1e-4, 0.45, 45)
    };
    let n_traj = args
        .trajectories
        .unwrap_or(if args.paper_scale { n_paper } else { n_desk });
    let initial = if args.cavity {
        InitialState::vacuum()
    } else {
        InitialState::coherent(args.alpha0, args.alpha0)
    };
    let config = SimConfig {
        cavity: args.cavity,
        n_traj,
        dt: args.dt.unwrap_or(dt),
        t_final: args.t_final.unwrap_or(t_final),
        n_outputs: args.outputs.unwrap_or(outputs),
        seed: args.seed,
        initial,
        pin_pumps: false,
        divergence_bound: 1e8,
    };
    config.step_counts()?;
    params.validate()?;
    Ok(config)
}

pub fn posp(params: &SystemParams<f64>, args: &PospArgs, out: &mut Outputs) -> Result<Value> {
    let config = posp_config(params, args)?;
    let mut run = start_ensemble(params, config, args)?;
    let append = run.resumed;
    let checkpoint = args.checkpoint.as_deref();
    let settings = json!({ "simulation": config, "resumed": append });
    if config.cavity {
        let path = out.path("fig11.csv");
        let mut w = csv_writer(&path, append)?;
        if !append {
            let mut header = vec!["t".to_string()];
            for k in 1..=4 {
                header.push(format!("O{k}"));
                header.push(format!("O{k}_stderr"));
            }
            header.push("discarded".into());
            write_row(&mut w, &header)?;
        }
        drive(&mut run, checkpoint, args.halt_after, |snap| {
            let v = joint_variances(&snap.points)?;
            let mut row = vec![num(snap.t)];
            for e in &v {
                row.push(num(e.re()));
                row.push(num(e.stderr));
            }
            row.push(snap.discarded.to_string());
            write_row(&mut w, &row)?;
            flush(&mut w)
        })?;
        return Ok(settings);
    }

    let (xi1, xi2) = (params.chi1 * args.alpha0, params.chi2 * args.alpha0);
    let mut w04 = csv_writer(&out.path("fig04.csv"), append)?;
    let mut w10 = csv_writer(&out.path("fig10.csv"), append)?;
    if !append {
        let mut h04 = strings(&["t", "zeta_t"]);
        for k in 1..=6 {
            h04.push(format!("N{k}"));
            h04.push(format!("N{k}_stderr"));
        }
        for k in 3..=6 {
            h04.push(format!("N{k}_undepleted"));
        }
        h04.push("discarded".into());
        write_row(&mut w04, &h04)?;
        let mut h10 = strings(&["xi_t"]);
        for k in 1..=4 {
            h10.push(format!("O{k}_undepleted"));
        }
        for k in 1..=4 {
            h10.push(format!("O{k}"));
            h10.push(format!("O{k}_stderr"));
        }
        write_row(&mut w10, &h10)?;
    }
    let spec = JointOperatorSpec::<f64>::default();
    drive(&mut run, checkpoint, args.halt_after, |snap| {
        let st = evolve_covariance(
            &CovarianceState::vacuum(),
            &UndepletedParams::new(xi1, xi2, snap.t),
        );
        let mut r04 = vec![num(snap.t), num(xi1 * snap.t)];
        for mode in 1..=6 {
            let n = intensity(&snap.points, mode)?;
            r04.push(num(n.re()));
            r04.push(num(n.stderr));
        }
        for mode in 3..=6 {
            let k = 2 * (mode - 3);
            r04.push(num((st.cov[(k, k)] + st.cov[(k + 1, k + 1)] - 2.0) / 4.0));
        }
        r04.push(snap.discarded.to_string());
        write_row(&mut w04, &r04)?;

        let mut r10 = vec![num(xi1 * snap.t)];
        r10.extend(spec.variances(&st).iter().map(|v| num(*v)));
        for e in &joint_variances(&snap.points)? {
            r10.push(num(e.re()));
            r10.push(num(e.stderr));
        }
        write_row(&mut w10, &r10)?;
        flush(&mut w04)?;
        flush(&mut w10)
    })?;
    Ok(settings)
}

pub fn all_figures(common: &Common, args: &AllArgs, out: &mut Outputs) -> Result<Value> {
    let (_, base) = resolve_params(common, None)?;
    let ec = critical_pump(&base)?;
    threshold(&base, out)?;
    for ratio in [1.0, 0.5] {
        undepleted(
            &UndepletedArgs {
                xi2_ratio: ratio,
                xi_t_max: 2.5,
                points: 251,
            },
            out,
        )?;
    }
    spectra(
        &base.with_pump(0.987 * ec),
        &SpectraArgs { omega_max: 5.0 },
        out,
    )?;
    spectra(
        &base.with_pump(1.49 * ec).with_injection(0.5),
        &SpectraArgs { omega_max: 5.0 },
        out,
    )?;
    scan(
        &base,
        &ScanArgs {
            from: 0.5,
            to: 1.6,
            step: 0.005,
            scan_injection: 0.5,
        },
        None,
        out,
    )?;
    cluster(
        &ClusterArgs {
            r_max: 8.0,
            points: 161,
        },
        out,
    )?;
    let posp_args = |cavity| PospArgs {
        cavity,
        trajectories: None,
        dt: None,
        t_final: None,
        outputs: None,
        seed: args.seed,
        alpha0: 1000.0,
        paper_scale: args.paper_scale,
        checkpoint: None,
        resume: false,
        halt_after: None,
    };
    let free = posp(&base.with_pump(0.0), &posp_args(false), out)?;
    let cavity = posp(&base.with_pump(0.6472 * ec), &posp_args(true), out)?;
    Ok(json!({
        "spectra_ratios": [0.987, 1.49],
        "fig08_injection": 0.5,
        "fig11_ratio": 0.6472,
        "free_evolution": free,
        "cavity": cavity,
    }))
}
