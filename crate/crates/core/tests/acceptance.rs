//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refuel_core::cut::lci::{balas_lift, prefix_sums};
use refuel_core::fixtures::example_network;
use refuel_core::graph::{csp_exact, csp_larac, integer_time_separator, CspQuery, DijkstraCounter};
use refuel_core::io::{generate_instance, GeneratorConfig};
use refuel_core::network::{build_od_subgraph, Arc, NetworkGraph, NodeRole, RangeParams};
use refuel_core::{
    brute_force_oracle, solve_cf, solve_cf_uncapacitated, solve_pf, verify_solution, Instance, NodeId, OdPair,
    SeparationVariant, SolveResult, SolveStatus, SolverConfig,
};

const KAPPAS: [f64; 3] = [1.0, 2.0, f64::INFINITY];
const SEEDS: u64 = 50;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            ok,
            detail: detail.into(),
        }
    }
}

/// Simple `origin -> dest` paths of the full network whose interior nodes
/// are stations and whose transit time fits the pair's bound.
fn all_feasible_paths(instance: &Instance, pair: &OdPair) -> Vec<Vec<NodeId>> {
    let g = &instance.graph;
    let mut out = Vec::new();
    let mut path = vec![pair.origin];
    let mut seen = vec![false; g.node_count()];
    seen[pair.origin] = true;
    fn rec(
        instance: &Instance,
        pair: &OdPair,
        time: f64,
        path: &mut Vec<NodeId>,
        seen: &mut [bool],
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let g = &instance.graph;
        let v = *path.last().expect("nonempty");
        for &a in g.out_arcs(v) {
            let arc = g.arc(a);
            let (w, t) = (arc.head, time + arc.tau);
            if seen[w] || t > pair.time_bound + instance.time_tol {
                continue;
            }
            if w == pair.dest {
                let mut p = path.clone();
                p.push(w);
                out.push(p);
            } else if g.is_station(w) {
                seen[w] = true;
                path.push(w);
                rec(instance, pair, t, path, seen, out);
                path.pop();
                seen[w] = false;
            }
        }
    }
    rec(instance, pair, 0.0, &mut path, &mut seen, &mut out);
    out
}

fn objective(r: &SolveResult) -> f64 {
    r.objective().unwrap_or(f64::INFINITY)
}

fn traced() -> SolverConfig {
    SolverConfig {
        record_trace: true,
        ..SolverConfig::default()
    }
}

fn oracle_instance(seed: u64) -> Instance {
    let cfg = GeneratorConfig {
        seed,
        stations: 8 + (seed as usize % 5),
        terminals: 8,
        pairs: 8,
        r_max: 60.0,
        lambda: 0.3,
        ..GeneratorConfig::default()
    };
    generate_instance(&cfg).expect("generator config is valid")
}

struct Cell {
    instance: Instance,
    kappa: f64,
    oracle: f64,
    cf: SolveResult,
    pf: SolveResult,
    cf_inf: SolveResult,
}

fn run_cells() -> (Vec<Cell>, Duration) {
    let start = Instant::now();
    let mut cells = Vec::new();
    for seed in 0..SEEDS {
        let base = oracle_instance(seed);
        for kappa in KAPPAS {
            let instance = base.with_uniform_capacity(kappa);
            let oracle = brute_force_oracle(&instance)
                .expect("at most 12 stations")
                .objective()
                .unwrap_or(f64::INFINITY);
            let cf = solve_cf(&instance, &traced());
            let pf = solve_pf(&instance, &traced());
            let cf_inf = solve_cf_uncapacitated(&instance, &traced());
            cells.push(Cell {
                instance,
                kappa,
                oracle,
                cf,
                pf,
                cf_inf,
            });
        }
    }
    (cells, start.elapsed())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let fx = example_network(5.0, &[1.0]);
    let sub = fx.instance.subgraph(0);
    let mut active = vec![false; sub.node_count()];
    for v in [fx.s, fx.a, fx.t] {
        if let Some(i) = sub.local(v) {
            active[i] = true;
        }
    }
    let sep = integer_time_separator(&sub, &active, &DijkstraCounter::default());
    let elapsed = start.elapsed();
    let got: Vec<NodeId> = sep.map(|s| s.stations).unwrap_or_default();
    let ok = got == vec![fx.b, fx.d] && !got.contains(&fx.c) && elapsed < Duration::from_secs(1);
    Outcome::new(ok, format!("separator {got:?} (b={}, d={}) in {elapsed:?}", fx.b, fx.d))
}

fn criterion_2(cells: &[Cell], elapsed: Duration) -> Outcome {
    let mut bad = Vec::new();
    let mut proven = 0;
    for (i, c) in cells.iter().enumerate() {
        let statuses_final = [c.cf.status, c.pf.status].iter().all(|s| *s != SolveStatus::Limit);
        if statuses_final {
            proven += 1;
        }
        if !statuses_final || objective(&c.cf) != c.oracle || objective(&c.pf) != c.oracle {
            bad.push(format!(
                "seed {} kappa {}: oracle {} cf {} pf {}",
                i / KAPPAS.len(),
                c.kappa,
                c.oracle,
                objective(&c.cf),
                objective(&c.pf)
            ));
        }
    }
    let feasible = cells.iter().filter(|c| c.oracle.is_finite()).count();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(600);
    Outcome::new(
        ok,
        format!(
            "{} cells ({feasible} feasible, {proven} proven), {} mismatches, {elapsed:.2?} {}",
            cells.len(),
            bad.len(),
            bad.first().cloned().unwrap_or_default()
        ),
    )
}

fn criterion_3(cells: &[Cell]) -> Outcome {
    let mut violations = Vec::new();
    for (i, c) in cells.iter().enumerate() {
        if objective(&c.cf_inf) > objective(&c.cf) + 1e-9 {
            violations.push(format!(
                "cell {i}: CF-inf {} > CF {}",
                objective(&c.cf_inf),
                objective(&c.cf)
            ));
        }
    }
    for (seed, group) in cells.chunks(KAPPAS.len()).enumerate() {
        for w in group.windows(2) {
            if objective(&w[1].cf) > objective(&w[0].cf) + 1e-9 {
                violations.push(format!(
                    "seed {seed}: objective rises from kappa {} to {}",
                    w[0].kappa, w[1].kappa
                ));
            }
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "{} violations {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )
}

/// Capacitated runs with mixed demands, where cover inequalities arise.
fn lci_runs() -> Vec<(Instance, SolveResult)> {
    let mut out = Vec::new();
    for seed in 0..SEEDS {
        let cfg = GeneratorConfig {
            seed: 400 + seed,
            stations: 8 + (seed as usize % 5),
            terminals: 8,
            pairs: 8,
            r_max: 60.0,
            lambda: 0.3,
            max_demand: 3,
            ..GeneratorConfig::default()
        };
        for kappa in [3.0, 4.0] {
            let inst = generate_instance(&cfg)
                .expect("generator config is valid")
                .with_uniform_capacity(kappa);
            let r = solve_cf(&inst, &traced());
            out.push((inst, r));
        }
    }
    out
}

fn criterion_4(cells: &[Cell]) -> Outcome {
    let (mut seps, mut lcis, mut violations) = (0, 0, Vec::new());
    let extra = lci_runs();
    let runs = cells
        .iter()
        .flat_map(|c| [(&c.instance, &c.cf), (&c.instance, &c.cf_inf), (&c.instance, &c.pf)])
        .chain(extra.iter().map(|(i, r)| (i, r)));
    for (i, (inst, r)) in runs.enumerate() {
        let paths: Vec<Vec<Vec<NodeId>>> = inst.pairs.iter().map(|p| all_feasible_paths(inst, p)).collect();
        {
            for sep in &r.trace.separators {
                seps += 1;
                let set: BTreeSet<NodeId> = sep.stations.iter().copied().collect();
                if let Some(p) = paths[sep.pair].iter().find(|p| !p.iter().any(|v| set.contains(v))) {
                    violations.push(format!(
                        "run {i}: separator {:?} of pair {} misses {p:?}",
                        sep.stations, sep.pair
                    ));
                }
            }
            for lci in &r.trace.lcis {
                lcis += 1;
                let v = lci.station;
                let users: Vec<usize> = (0..inst.pairs.len())
                    .filter(|&q| paths[q].iter().any(|p| p.contains(&v)))
                    .collect();
                for mask in 0u32..(1 << users.len()) {
                    let chosen = |q: usize| users.iter().position(|&u| u == q).is_some_and(|k| mask >> k & 1 == 1);
                    let load: f64 = users
                        .iter()
                        .filter(|&&q| chosen(q))
                        .map(|&q| inst.pairs[q].demand)
                        .sum();
                    if load > inst.capacity[v] + 1e-9 {
                        continue;
                    }
                    let lhs = lci.lhs(|q| if chosen(q) { 1.0 } else { 0.0 });
                    if lhs > lci.rhs() + 1e-9 {
                        violations.push(format!("run {i}: LCI at station {v} cut off assignment {mask:b}"));
                    }
                }
            }
        }
    }
    Outcome::new(
        violations.is_empty() && seps > 0 && lcis > 0,
        format!(
            "{seps} separators, {lcis} LCIs checked, {} violations {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    for _ in 0..1000 {
        let size = rng.gen_range(1..=6);
        let cover: Vec<f64> = (0..size).map(|_| rng.gen_range(1..=20) as f64).collect();
        let demand = rng.gen_range(1..=(cover.iter().sum::<f64>() as u32 + 5)) as f64;
        let alpha = balas_lift(&cover, demand) as usize;
        let sums = prefix_sums(&cover);
        let upper = sums.get(alpha + 1).copied().unwrap_or(f64::INFINITY);
        if !(sums[alpha] <= demand && demand < upper) {
            violations += 1;
        }
    }
    Outcome::new(violations == 0, format!("1000 cases, {violations} violations"))
}

fn random_csp_graph(rng: &mut ChaCha8Rng) -> (Instance, Vec<f64>, Vec<bool>) {
    let n = rng.gen_range(3..=10);
    let mut nodes = vec![(0, NodeRole::Terminal), (1, NodeRole::Terminal)];
    for i in 2..n {
        nodes.push((i as u64, NodeRole::Station));
    }
    let density = rng.gen_range(0.2..0.7);
    let mut arcs = Vec::new();
    for tail in 0..n {
        for head in 0..n {
            if tail == head || head == 0 || tail == 1 || !rng.gen_bool(density) {
                continue;
            }
            let tau = rng.gen_range(1..=9) as f64;
            arcs.push(Arc {
                tail,
                head,
                tau,
                ell: tau,
            });
        }
    }
    let graph = NetworkGraph::new(nodes, arcs).expect("random graph is simple");
    let pair = OdPair {
        origin: 0,
        dest: 1,
        demand: 1.0,
        time_bound: rng.gen_range(4..=20) as f64,
    };
    let cost: Vec<f64> = (0..n)
        .map(|v| if v < 2 { 0.0 } else { rng.gen_range(0..=10) as f64 / 2.0 })
        .collect();
    let barred: Vec<f64> = cost
        .iter()
        .enumerate()
        .map(|(v, &c)| if v >= 2 && rng.gen_bool(0.1) { f64::INFINITY } else { c })
        .collect();
    let forbidden_global: Vec<bool> = (0..graph.arc_count()).map(|_| rng.gen_bool(0.1)).collect();
    let instance = Instance::new(
        graph,
        RangeParams::half_capacity(1e6),
        vec![pair],
        cost,
        vec![f64::INFINITY; n],
    )
    .expect("random instance is valid");
    (instance, barred, forbidden_global)
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    let mut feasible = 0;
    for case in 0..200 {
        let (inst, node_cost, forbidden_global) = random_csp_graph(&mut rng);
        let pair = inst.pairs[0];
        let g = &inst.graph;
        let best = all_feasible_paths(&inst, &pair)
            .into_iter()
            .filter(|p| {
                p.windows(2)
                    .all(|w| !forbidden_global[g.find_arc(w[0], w[1]).expect("path arc")])
            })
            .map(|p| p.iter().map(|&v| node_cost[v]).sum::<f64>())
            .filter(|c| c.is_finite())
            .min_by(f64::total_cmp);
        let sub = build_od_subgraph(g, 0, &pair, inst.time_tol);
        let local_cost: Vec<f64> = sub.globals().iter().map(|&v| node_cost[v]).collect();
        let local_forbidden: Vec<bool> = sub.arcs().iter().map(|a| forbidden_global[a.arc]).collect();
        let query = CspQuery {
            node_cost: &local_cost,
            forbidden: &local_forbidden,
            bound: sub.time_bound,
        };
        let exact = csp_exact(&sub, &query);
        let larac = csp_larac(&sub, &query, &DijkstraCounter::default());
        match (best, &exact) {
            (None, None) => {}
            (Some(b), Some(e)) if (b - e.cost).abs() <= 1e-9 && sub.within_bound(e.time) => feasible += 1,
            _ => violations.push(format!(
                "case {case}: enumeration {best:?}, exact {:?}",
                exact.as_ref().map(|e| e.cost)
            )),
        }
        if let Some(l) = &larac {
            let time_ok = sub.path_time(&l.nodes).is_some_and(|t| sub.within_bound(t));
            let arcs_ok = l
                .nodes
                .windows(2)
                .all(|w| sub.find_arc(w[0], w[1]).is_some_and(|a| !local_forbidden[a]));
            let cost_ok = best.is_some_and(|b| l.cost >= b - 1e-9);
            if !(time_ok && arcs_ok && cost_ok) {
                violations.push(format!(
                    "case {case}: LARAC cost {} time {} vs optimum {best:?}",
                    l.cost, l.time
                ));
            }
        }
    }
    Outcome::new(
        violations.is_empty(),
        format!(
            "200 graphs ({feasible} feasible), {} violations {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut total = 0;
    let mut fewer = 0;
    let mut equal_obj = 0;
    let mut per_lambda = Vec::new();
    for lambda in [0.1, 0.2, 0.5] {
        let mut fewer_here = 0;
        for seed in 0..20 {
            let cfg = GeneratorConfig {
                seed: 700 + seed,
                stations: 60,
                terminals: 15,
                pairs: 30,
                r_max: 50.0,
                lambda,
                ..GeneratorConfig::default()
            };
            let inst = generate_instance(&cfg).expect("generator config is valid");
            let run = |separation| {
                solve_cf_uncapacitated(
                    &inst,
                    &SolverConfig {
                        separation,
                        fractional_separation: false,
                        layer_rows: false,
                        ..SolverConfig::default()
                    },
                )
            };
            let ours = run(SeparationVariant::Ours);
            let base = run(SeparationVariant::Baseline);
            total += 1;
            if ours.dijkstra_calls < base.dijkstra_calls {
                fewer += 1;
                fewer_here += 1;
            }
            if ours.status == SolveStatus::Optimal
                && base.status == SolveStatus::Optimal
                && objective(&ours) == objective(&base)
            {
                equal_obj += 1;
            }
        }
        per_lambda.push(format!("lambda {lambda}: {fewer_here}/20"));
    }
    let ok = fewer * 5 >= total * 4 && equal_obj == total;
    Outcome::new(
        ok,
        format!(
            "fewer Dijkstra calls on {fewer}/{total} ({}), equal objectives {equal_obj}/{total}",
            per_lambda.join(", ")
        ),
    )
}

fn criterion_8(cells: &[Cell]) -> Outcome {
    let (mut calls, mut solutions, mut guard, mut violations) = (0, 0, 0, Vec::new());
    for (i, c) in cells.iter().enumerate() {
        for (r, inst) in [(&c.cf, &c.instance), (&c.pf, &c.instance)] {
            for rec in &r.trace.heuristic {
                calls += 1;
                guard += rec.guard_hit as usize;
                if rec.evictions > 5 * inst.pairs.len() {
                    violations.push(format!("cell {i}: {} evictions", rec.evictions));
                }
                if let Some(sol) = &rec.solution {
                    solutions += 1;
                    let verdict = verify_solution(inst, sol);
                    if !verdict.passed() {
                        violations.push(format!("cell {i}: {:?}", verdict.first()));
                    }
                }
            }
        }
    }
    Outcome::new(
        violations.is_empty() && calls > 0,
        format!(
            "{calls} invocations terminated, {solutions} solutions verified, {guard} guard hits, {} violations {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )
}

fn criterion_9(cells: &[Cell]) -> Outcome {
    let (mut certs, mut converged, mut violations) = (0, 0, Vec::new());
    for (i, c) in cells.iter().enumerate() {
        let subs = c.instance.subgraphs();
        for cert in &c.pf.trace.pricing {
            certs += 1;
            if !cert.converged {
                continue;
            }
            converged += 1;
            if cert.lagrangian > cert.rmp_value + 1e-6 {
                violations.push(format!(
                    "cell {i} node {}: lagrangian {} > rmp {}",
                    cert.node, cert.lagrangian, cert.rmp_value
                ));
            }
            for (sub, pricing) in subs.iter().zip(&cert.pairs) {
                for path in refuel_core::oracle::enumerate_feasible_paths(sub) {
                    let allowed = path
                        .windows(2)
                        .all(|w| sub.find_arc(w[0], w[1]).is_some_and(|a| !pricing.forbidden[a]));
                    if !allowed {
                        continue;
                    }
                    let rc = pricing.reduced_cost(sub, &path);
                    if rc < -1e-6 {
                        violations.push(format!(
                            "cell {i} node {} pair {}: reduced cost {rc}",
                            cert.node, sub.pair
                        ));
                    }
                }
            }
        }
    }
    Outcome::new(
        violations.is_empty() && converged > 0,
        format!(
            "{certs} exact rounds, {converged} converged, {} violations {}",
            violations.len(),
            violations.first().cloned().unwrap_or_default()
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut instances = Vec::new();
    let mut fig = example_network(5.0, &[1.0, 2.0]).instance;
    fig.capacity.iter_mut().for_each(|k| *k = k.min(1.0));
    instances.push(("example".to_string(), fig));
    for seed in 0..40 {
        let mut inst = oracle_instance(1000 + seed).with_uniform_capacity(1.0);
        let Some(q) = (0..inst.pairs.len()).find(|&q| {
            let p = inst.pairs[q];
            all_feasible_paths(&inst, &p).iter().all(|path| path.len() > 2)
        }) else {
            continue;
        };
        inst.pairs[q].demand = 2.0;
        instances.push((format!("seed {}", 1000 + seed), inst));
        if instances.len() >= 21 {
            break;
        }
    }
    let mut bad = Vec::new();
    for (name, inst) in &instances {
        let oracle = brute_force_oracle(inst)
            .expect("at most 12 stations")
            .solution
            .is_none();
        let cf = solve_cf(inst, &SolverConfig::default()).status == SolveStatus::Infeasible;
        let pf = solve_pf(inst, &SolverConfig::default()).status == SolveStatus::Infeasible;
        if !(oracle && cf && pf) {
            bad.push(format!("{name}: oracle {oracle} cf {cf} pf {pf}"));
        }
    }
    Outcome::new(
        bad.is_empty() && instances.len() > 1,
        format!(
            "{} instances, {} misreported {}",
            instances.len(),
            bad.len(),
            bad.first().cloned().unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let (cells, elapsed) = run_cells();
    let results = [
        ("1 example separator", criterion_1()),
        ("2 oracle equivalence", criterion_2(&cells, elapsed)),
        ("3 relaxation ordering", criterion_3(&cells)),
        ("4 cut validity", criterion_4(&cells)),
        ("5 lifting coefficients", criterion_5()),
        ("6 constrained shortest path", criterion_6()),
        ("7 separation comparison", criterion_7()),
        ("8 heuristic soundness", criterion_8(&cells)),
        ("9 pricing soundness", criterion_9(&cells)),
        ("10 infeasibility", criterion_10()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        println!(
            "criterion {name}: {} ({})",
            if r.ok { "PASS" } else { "FAIL" },
            r.detail
        );
        failed += usize::from(!r.ok);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
