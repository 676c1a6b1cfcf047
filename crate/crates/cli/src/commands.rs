use std::path::Path;

use oqw::analysis::{
    delta, estimate_steps, gaussian_profile, iterate_master, loglog_slope, omega_for_success, steady_state,
    transition_matrix, ChainParams, Rounding,
};
use oqw::channels::{channel_report, ChannelKind};
use oqw::circuit::{build_walk, cost_estimate, qubits_for, simulate_trajectory, AncillaPolicy, CostModel, StepOrder};
use oqw::dilation::{build_generalized, build_u_loc, resource_report, step_via_dilation, DilationUnitary, ResourceMethod, ResourceReport};
use oqw::io::{chain_doc_from_json, csv_line, fmt_f64, spec_from_json};
use oqw::matrixkit::trace_distance;
use oqw::random::{random_chain, random_density, random_pure_density, SeededRng};
use oqw::walk::{step, validate, Violation};
use oqw::{ComplexMatrix, DiagonalState, LinearChainSpec, OqwError, OqwSpec, DEFAULT_TOL};
use serde_json::json;

use crate::{ChannelArg, CliError, Command, CostModelArg, Output};

type CliResult<T> = Result<T, CliError>;

/// Parameter problems are usage errors; everything else is a numeric failure.
fn classify(e: OqwError) -> CliError {
    match e {
        OqwError::InvalidParameter(_) | OqwError::Parse(_) => CliError::Usage(e.to_string()),
        other => CliError::Failure(other.to_string()),
    }
}

fn required<T: Copy>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this command")))
}

fn tolerance() -> CliResult<f64> {
    match std::env::var("OQW_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t > 0.0)
            .ok_or_else(|| CliError::Usage(format!("OQW_TOL must be a positive number, got '{s}'"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

pub fn run(cmd: &Command) -> CliResult<Output> {
    match cmd {
        Command::Steady { n, omega, steps } => steady(required(*n, "N")?, required(*omega, "omega")?, *steps),
        Command::Profile { n, omega, steps, grid } => {
            let grid = match steps {
                Some(s) => vec![*s],
                None => grid.clone(),
            };
            profile(required(*n, "N")?, required(*omega, "omega")?, &grid)
        }
        Command::Channel {
            channel,
            param,
            omega,
            steps,
            seed,
        } => channel_cmd(required(*channel, "channel")?, required(*param, "param")?, *omega, *steps, *seed),
        Command::Verify {
            spec,
            n,
            dh,
            omega,
            steps,
            seed,
        } => verify(spec.as_deref(), *n, *dh, *omega, *steps, *seed),
        Command::Resources {
            dh,
            graph_sizes,
            omega,
            steps,
            eta,
            cost_model,
            seed,
        } => resources(*dh, graph_sizes, *omega, *steps, *eta, *cost_model, *seed),
    }
}

fn steady(n: usize, omega: f64, steps: usize) -> CliResult<Output> {
    let p = ChainParams::new(n, omega).map_err(classify)?;
    let closed = steady_state(&p).map_err(classify)?;
    let t = transition_matrix(&p);
    let mut x = delta(n, 0);
    for _ in 0..steps {
        x = (0..n).map(|i| (0..n).map(|k| t[(i, k)].re * x[k]).sum()).collect();
    }
    let mut text = csv_line(["m", "simulated", "closed_form", "abs_diff"]);
    for m in 0..n {
        text.push_str(&csv_line([
            m.to_string(),
            fmt_f64(x[m]),
            fmt_f64(closed[m]),
            fmt_f64((x[m] - closed[m]).abs()),
        ]));
    }
    Ok(Output { text, ok: true })
}

fn profile(n: usize, omega: f64, grid: &[usize]) -> CliResult<Output> {
    let p = ChainParams::new(n, omega).map_err(classify)?;
    if grid.contains(&0) {
        return Err(CliError::Usage("step counts must be positive".into()));
    }
    let mut text = csv_line(["n", "m", "P_master", "P_gaussian"]);
    let mut dist = delta(n, 0);
    let mut done = 0;
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &steps in &sorted {
        dist = iterate_master(&dist, &p, steps - done).map_err(classify)?;
        done = steps;
        for (m, pm) in dist.iter().enumerate() {
            let g = gaussian_profile(m as f64, steps, &p).map_err(classify)?;
            text.push_str(&csv_line([steps.to_string(), m.to_string(), fmt_f64(*pm), fmt_f64(g)]));
        }
    }
    Ok(Output { text, ok: true })
}

fn channel_cmd(channel: ChannelArg, param: f64, omega: f64, steps: usize, seed: Option<u64>) -> CliResult<Output> {
    let tol = tolerance()?;
    let kind = match channel {
        ChannelArg::Dephasing => ChannelKind::Dephasing,
        ChannelArg::Depolarizing => ChannelKind::Depolarizing,
    };
    let rho = match seed {
        Some(s) => random_pure_density(&mut SeededRng::new(s), 2),
        None => ComplexMatrix::from_real_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]),
    };
    let report = channel_report(kind, param, omega, &rho, steps, tol).map_err(classify)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(Output { text, ok: true })
}

fn max_block_distance(a: &DiagonalState, b: &DiagonalState) -> CliResult<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.blocks().iter().zip(b.blocks()) {
        worst = worst.max(trace_distance(x, y).map_err(classify)?);
    }
    Ok(worst)
}

fn random_state(rng: &mut SeededRng, n: usize, d: usize) -> DiagonalState {
    let masses = rng.random_probabilities(n);
    DiagonalState::new(masses.iter().map(|&m| random_density(rng, d).scale_real(m)).collect())
        .expect("random blocks form a state")
}

fn invalid_report(violations: &[Violation], error: Option<String>) -> Output {
    let doc = json!({ "valid": false, "violations": violations, "error": error });
    Output {
        text: format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serializes")),
        ok: false,
    }
}

enum Loaded {
    Chain(LinearChainSpec),
    General(OqwSpec),
    Invalid(Output),
}

fn load_spec(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if value.get("omega").is_some() {
        let (n, omega, unitaries) = chain_doc_from_json(&text).map_err(classify)?;
        let spec = OqwSpec::from_chain_parts(n, omega, &unitaries).map_err(classify)?;
        let violations = validate(&spec);
        if !violations.is_empty() {
            return Ok(Loaded::Invalid(invalid_report(&violations, None)));
        }
        match LinearChainSpec::new(n, omega, unitaries) {
            Ok(chain) => Ok(Loaded::Chain(chain)),
            Err(e) => Ok(Loaded::Invalid(invalid_report(&[], Some(e.to_string())))),
        }
    } else {
        let spec = spec_from_json(&text).map_err(classify)?;
        let violations = validate(&spec);
        if violations.is_empty() {
            Ok(Loaded::General(spec))
        } else {
            Ok(Loaded::Invalid(invalid_report(&violations, None)))
        }
    }
}

fn verify(
    spec_path: Option<&Path>,
    n: Option<usize>,
    dh: usize,
    omega: Option<f64>,
    steps: usize,
    seed: u64,
) -> CliResult<Output> {
    let tol = tolerance()?;
    let mut rng = SeededRng::new(seed);
    let loaded = match spec_path {
        Some(path) => load_spec(path)?,
        None => {
            let (n, omega) = (required(n, "N")?, required(omega, "omega")?);
            if n < 2 || dh == 0 || !(0.0..=1.0).contains(&omega) {
                return Err(CliError::Usage("need N >= 2, dh >= 1 and omega in [0, 1]".into()));
            }
            Loaded::Chain(random_chain(&mut rng, n, dh, omega))
        }
    };
    let (spec, dilation, chain): (OqwSpec, DilationUnitary, Option<LinearChainSpec>) = match loaded {
        Loaded::Invalid(out) => return Ok(out),
        Loaded::Chain(chain) => (oqw::walk::chain_to_spec(&chain), build_u_loc(&chain), Some(chain)),
        Loaded::General(spec) => {
            let k = spec.outgoing(0).filter(|(_, b)| b.max_abs() > 0.0).count();
            let d = build_generalized(&spec, k).map_err(|e| CliError::Failure(e.to_string()))?;
            (spec, d, None)
        }
    };

    let init = random_state(&mut rng, spec.n_nodes(), spec.walker_dim());
    let mut direct = vec![init.clone()];
    for _ in 0..steps {
        let next = step(&spec, direct.last().expect("non-empty")).map_err(classify)?;
        direct.push(next);
    }

    let mut dil_state = init.clone();
    let mut dil_dist = Vec::with_capacity(steps);
    for expected in &direct[1..] {
        dil_state = step_via_dilation(&dilation, &dil_state).map_err(classify)?;
        dil_dist.push(max_block_distance(&dil_state, expected)?);
    }

    let circuit_dist = match &chain {
        Some(chain) => {
            let c = build_walk(chain, steps, AncillaPolicy::Reuse, StepOrder::RightFirst);
            let traj = simulate_trajectory(&c, &init).map_err(classify)?;
            let mut d = Vec::with_capacity(steps);
            for (k, s) in traj.iter().enumerate() {
                d.push(max_block_distance(s, &direct[k + 1])?);
            }
            Some(d)
        }
        None => None,
    };

    let mut pass = dil_dist.iter().all(|&d| d <= tol);
    if let Some(d) = &circuit_dist {
        pass &= d.iter().all(|&x| x <= tol);
    }
    let stabilization = if spec.n_nodes() == 2 && chain.is_some() {
        let one = step(&spec, &init).map_err(classify)?;
        let two = step(&spec, &one).map_err(classify)?;
        let d = max_block_distance(&one, &two)?;
        pass &= d <= tol;
        Some(json!({ "distance_step1_step2": d, "pass": d <= tol }))
    } else {
        None
    };

    let doc = json!({
        "valid": true,
        "N": spec.n_nodes(),
        "dH": spec.walker_dim(),
        "omega": chain.as_ref().map(|c| c.omega()),
        "steps": steps,
        "tolerance": tol,
        "dilation": dil_dist,
        "circuit": circuit_dist,
        "stabilization": stabilization,
        "pass": pass,
    });
    Ok(Output {
        text: format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serializes")),
        ok: pass,
    })
}

fn resources(
    dh: u64,
    sizes: &[u64],
    omega: f64,
    steps: Option<u64>,
    eta: Option<f64>,
    model: CostModelArg,
    seed: u64,
) -> CliResult<Output> {
    if dh == 0 || sizes.is_empty() || sizes.iter().any(|&g| g < 2) {
        return Err(CliError::Usage("need dh >= 1 and graph sizes >= 2".into()));
    }
    let omega = match eta {
        Some(eta) => omega_for_success(eta).map_err(classify)?,
        None => omega,
    };
    let (model, tag) = match model {
        CostModelArg::Linear => (CostModel::linear(), "linear"),
        CostModelArg::Quadratic => (CostModel::quadratic(), "quadratic"),
    };
    let mut rng = SeededRng::new(seed);
    let methods = [ResourceMethod::Stinespring, ResourceMethod::SzNagy, ResourceMethod::Local];
    let circuit_name = format!("local-circuit:{tag}");

    let mut text = csv_line([ResourceReport::CSV_HEADER]);
    // per-step (cnot, depth) for the slope fit, one list per method
    let mut per_step: Vec<Vec<(f64, f64)>> = vec![Vec::new(); methods.len() + 1];
    for &g in sizes {
        let params = ChainParams::new(g as usize, omega).map_err(classify)?;
        let n = match steps {
            Some(n) => n,
            None => estimate_steps(&params, Rounding::ResourceTables).map_err(classify)? as u64,
        };
        if n == 0 {
            return Err(CliError::Usage("step count must be positive".into()));
        }
        for (k, &m) in methods.iter().enumerate() {
            let r = resource_report(m, dh, g, n);
            per_step[k].push((r.cnot_estimate as f64 / n as f64, r.depth_estimate as f64 / n as f64));
            text.push_str(&format!("{}\n", r.csv_row()));
        }
        let chain = random_chain(&mut rng, g as usize, dh as usize, omega);
        let c = build_walk(&chain, n as usize, AncillaPolicy::Reuse, StepOrder::RightFirst);
        let cost = cost_estimate(&c, model);
        let live_dim = 4u64 << (qubits_for(dh as usize) + qubits_for(g as usize));
        per_step[methods.len()].push((cost.cnot as f64 / n as f64, cost.depth as f64 / n as f64));
        text.push_str(&format!(
            "{circuit_name},{dh},{g},{n},{},{},{}\n",
            n * live_dim,
            cost.cnot,
            cost.depth
        ));
    }
    if sizes.len() >= 2 {
        let xs: Vec<f64> = sizes.iter().map(|&g| g as f64).collect();
        let names = methods
            .iter()
            .map(|m| m.to_string())
            .chain(std::iter::once(circuit_name.clone()));
        for (name, costs) in names.zip(&per_step) {
            let cn: Vec<f64> = costs.iter().map(|c| c.0).collect();
            let dp: Vec<f64> = costs.iter().map(|c| c.1).collect();
            text.push_str(&format!(
                "slope:{name},{dh},,,,{},{}\n",
                fmt_f64(loglog_slope(&xs, &cn)),
                fmt_f64(loglog_slope(&xs, &dp))
            ));
        }
    }
    Ok(Output { text, ok: true })
}
