use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use refuel_core::io::{
    generate_instance, parse_instance, write_instance, write_solution, GeneratorConfig, ResultRow, CSV_HEADER,
};
use refuel_core::network::shortest_pair_time;
use refuel_core::{solve_cf, solve_pf, verify_solution, Instance, SolveResult, SolveStatus, SolverConfig};

use crate::{Formulation, GenerateArgs, GeneratorFlags, SolveArgs, SolverFlags};

pub fn solver_config(flags: &SolverFlags) -> Result<SolverConfig> {
    let time_limit = match flags.time_limit {
        Some(t) if t <= 0.0 || !t.is_finite() => bail!("--time-limit must be positive, got {t}"),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    if flags.node_limit == Some(0) {
        bail!("--node-limit must be positive");
    }
    Ok(SolverConfig {
        time_limit,
        node_limit: flags.node_limit,
        lci: !flags.no_lci,
        larac: !flags.no_larac,
        separation: flags.separation.into(),
        ..SolverConfig::default()
    })
}

pub fn generator_config(flags: &GeneratorFlags, lambda: f64, kappa: f64) -> GeneratorConfig {
    GeneratorConfig {
        seed: flags.seed,
        stations: flags.stations,
        terminals: flags.terminals,
        pairs: flags.pairs,
        r_max: flags.r_max,
        lambda,
        kappa,
        max_demand: flags.max_demand,
        ..GeneratorConfig::default()
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Time bounds `(1 + lambda)` times each pair's fastest time through the network.
pub fn with_lambda(instance: &Instance, lambda: f64) -> Result<Instance> {
    let conventional: Vec<f64> = instance
        .pairs
        .iter()
        .map(|p| shortest_pair_time(&instance.graph, p))
        .collect();
    let mut out = instance.clone();
    out.compute_time_bounds(lambda, &conventional)?;
    Ok(out)
}

pub fn run(formulation: Formulation, instance: &Instance, config: &SolverConfig) -> SolveResult {
    match formulation {
        Formulation::Cf => solve_cf(instance, config),
        Formulation::Pf => solve_pf(instance, config),
    }
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Limit => "limit",
    }
}

/// Uniform capacity if every station shares one, else NaN.
fn uniform_kappa(instance: &Instance) -> f64 {
    let mut caps = instance.stations().map(|v| instance.capacity[v]);
    match caps.next() {
        Some(k) if caps.all(|c| c == k) => k,
        Some(_) => f64::NAN,
        None => f64::INFINITY,
    }
}

pub fn solve(args: &SolveArgs) -> Result<()> {
    let config = solver_config(&args.solver)?;
    let mut instance = read_instance(&args.instance)?;
    if let Some(l) = args.lambda {
        instance = with_lambda(&instance, l)?;
    }
    if let Some(k) = args.kappa {
        ensure!(k >= 0.0, "--kappa must be nonnegative, got {k}");
        instance = instance.with_uniform_capacity(k);
    }
    let result = run(args.formulation, &instance, &config);
    if let Some(sol) = &result.solution {
        let verdict = verify_solution(&instance, sol);
        ensure!(
            verdict.passed(),
            "solver returned an invalid solution: {:?}",
            verdict.first()
        );
    }
    let row = ResultRow::from_result(args.formulation.name(), &instance, uniform_kappa(&instance), &result);
    println!(
        "status: {}  dijkstra calls: {}  best bound: {}",
        status_name(result.status),
        result.dijkstra_calls,
        result.best_bound
    );
    println!("{CSV_HEADER}\n{row}");
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("results.csv"), format!("{CSV_HEADER}\n{row}\n"))?;
        if let Some(sol) = &result.solution {
            fs::write(dir.join("solution.json"), write_solution(&instance, sol))?;
        }
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let cfg = generator_config(&args.generator, args.lambda, args.kappa);
    let instance = generate_instance(&cfg)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join(format!("instance_seed{}.json", cfg.seed));
    fs::write(&path, write_instance(&instance)).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{} ({} stations, {} pairs)",
        path.display(),
        instance.station_count(),
        instance.pairs.len()
    );
    Ok(())
}
