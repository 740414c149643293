//! Grid benchmarks. Cells run concurrently; each owns its solver state and
//! rows are written in plan order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use refuel_core::io::{generate_instance, ResultRow, CSV_HEADER, MISSING};
use refuel_core::{solve_cf_uncapacitated, Instance, SolveStatus, SolverConfig};

use crate::commands::{generator_config, read_instance, run, solver_config, with_lambda};
use crate::{BenchArgs, CompareArgs, Formulation, Separation};

pub const COMPARE_HEADER: &str = "lambda,seed,variant,status,time_s,obj,nodes,dijkstra_calls";

#[derive(Debug, Clone, Copy)]
struct BenchCell {
    formulation: Formulation,
    lambda: f64,
    kappa: f64,
}

fn failed_row(cell: &BenchCell) -> ResultRow {
    ResultRow {
        formulation: cell.formulation.name().to_string(),
        lambda: Some(cell.lambda),
        kappa: cell.kappa,
        time_s: 0.0,
        objective: None,
        nodes: 0,
        gap_pct: None,
        utilization_pct: None,
    }
}

fn validate_grid(name: &str, values: &[f64]) -> Result<()> {
    ensure!(!values.is_empty(), "--{name} grid is empty");
    for &v in values {
        ensure!(v >= 0.0, "--{name} values must be nonnegative, got {v}");
    }
    Ok(())
}

fn base_instance(args: &BenchArgs, file: Option<&Instance>, lambda: f64) -> Result<Instance> {
    match file {
        Some(inst) => with_lambda(inst, lambda),
        None => Ok(generate_instance(&generator_config(
            &args.generator,
            lambda,
            f64::INFINITY,
        ))?),
    }
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    validate_grid("lambda", &args.lambda)?;
    validate_grid("kappa", &args.kappa)?;
    ensure!(!args.formulation.is_empty(), "--formulation list is empty");
    let config = solver_config(&args.solver)?;
    let file = args.instance.as_deref().map(read_instance).transpose()?;

    let mut cells = Vec::new();
    for &lambda in &args.lambda {
        for &kappa in &args.kappa {
            for &formulation in &args.formulation {
                cells.push(BenchCell {
                    formulation,
                    lambda,
                    kappa,
                });
            }
        }
    }
    let rows: Vec<ResultRow> = cells
        .par_iter()
        .map(|cell| match base_instance(args, file.as_ref(), cell.lambda) {
            Ok(base) => {
                let inst = base.with_uniform_capacity(cell.kappa);
                let result = run(cell.formulation, &inst, &config);
                log::info!(
                    "{} lambda={} kappa={}: {:?} in {:?}",
                    cell.formulation.name(),
                    cell.lambda,
                    cell.kappa,
                    result.status,
                    result.wall_time
                );
                ResultRow::from_result(cell.formulation.name(), &inst, cell.kappa, &result)
            }
            Err(e) => {
                log::warn!("cell {cell:?} failed: {e:#}");
                failed_row(cell)
            }
        })
        .collect();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut csv = format!("{CSV_HEADER}\n");
    for row in &rows {
        writeln!(csv, "{row}")?;
    }
    fs::write(args.out.join("results.csv"), &csv)?;
    write_plot_data(&args.out, &args.formulation, &cells, &rows)?;
    print!("{csv}");
    Ok(())
}

fn cell_value(metric: &str, row: &ResultRow) -> Option<f64> {
    match metric {
        "objective" => row.objective,
        "time" => Some(row.time_s),
        "gap" => row.gap_pct,
        "utilization" => row.utilization_pct,
        _ => None,
    }
}

fn fmt_value(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite())
        .map_or(MISSING.to_string(), |x| format!("{x}"))
}

fn fmt_kappa(k: f64) -> String {
    if k.is_finite() {
        format!("{k}")
    } else {
        "inf".to_string()
    }
}

/// One tab-separated series file per metric: a row per (lambda, kappa) and
/// a column per formulation.
fn write_plot_data(dir: &Path, formulations: &[Formulation], cells: &[BenchCell], rows: &[ResultRow]) -> Result<()> {
    for metric in ["objective", "time", "gap", "utilization"] {
        let mut out = String::from("lambda\tkappa");
        for f in formulations {
            write!(out, "\t{}", f.name())?;
        }
        out.push('\n');
        for (chunk_cells, chunk_rows) in cells.chunks(formulations.len()).zip(rows.chunks(formulations.len())) {
            let head = chunk_cells[0];
            write!(out, "{}\t{}", head.lambda, fmt_kappa(head.kappa))?;
            for row in chunk_rows {
                write!(out, "\t{}", fmt_value(cell_value(metric, row)))?;
            }
            out.push('\n');
        }
        fs::write(dir.join(format!("{metric}.tsv")), out)?;
    }
    Ok(())
}

struct CompareRow {
    lambda: f64,
    seed: u64,
    variant: Separation,
    status: SolveStatus,
    time: Duration,
    objective: Option<f64>,
    nodes: usize,
    dijkstra_calls: u64,
}

pub fn compare_separation(args: &CompareArgs) -> Result<()> {
    validate_grid("lambda", &args.lambda)?;
    ensure!(args.count > 0, "--count must be positive");
    let time_limit = args
        .time_limit
        .map(|t| {
            ensure!(t > 0.0 && t.is_finite(), "--time-limit must be positive, got {t}");
            Ok(Duration::from_secs_f64(t))
        })
        .transpose()?;
    let cells: Vec<(f64, u64)> = args
        .lambda
        .iter()
        .flat_map(|&l| (0..args.count).map(move |i| (l, i)))
        .collect();
    let results: Vec<Result<[CompareRow; 2]>> = cells
        .par_iter()
        .map(|&(lambda, i)| {
            let mut gen = args.generator.clone();
            gen.seed = args.generator.seed + i;
            let inst = generate_instance(&generator_config(&gen, lambda, f64::INFINITY))?;
            let solve = |variant: Separation| {
                let config = SolverConfig {
                    time_limit,
                    separation: variant.into(),
                    fractional_separation: false,
                    layer_rows: false,
                    ..SolverConfig::default()
                };
                let r = solve_cf_uncapacitated(&inst, &config);
                CompareRow {
                    lambda,
                    seed: gen.seed,
                    variant,
                    status: r.status,
                    time: r.wall_time,
                    objective: r.objective(),
                    nodes: r.nodes,
                    dijkstra_calls: r.dijkstra_calls,
                }
            };
            Ok([solve(Separation::Ours), solve(Separation::Baseline)])
        })
        .collect();

    let mut csv = format!("{COMPARE_HEADER}\n");
    let (mut fewer, mut equal, mut total) = (0, 0, 0);
    for (cell, res) in cells.iter().zip(results) {
        let pair = match res {
            Ok(p) => p,
            Err(e) => {
                log::warn!("cell lambda={} #{} failed: {e:#}", cell.0, cell.1);
                continue;
            }
        };
        total += 1;
        fewer += usize::from(pair[0].dijkstra_calls < pair[1].dijkstra_calls);
        equal += usize::from(pair[0].objective == pair[1].objective);
        for r in &pair {
            writeln!(
                csv,
                "{},{},{},{},{:.3},{},{},{}",
                r.lambda,
                r.seed,
                match r.variant {
                    Separation::Ours => "ours",
                    Separation::Baseline => "baseline",
                },
                crate::commands::status_name(r.status),
                r.time.as_secs_f64(),
                fmt_value(r.objective),
                r.nodes,
                r.dijkstra_calls
            )?;
        }
    }
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join("separation.csv"), &csv)?;
    print!("{csv}");
    println!("fewer dijkstra calls: {fewer}/{total}; equal objectives: {equal}/{total}");
    Ok(())
}
