//! End-to-end acceptance checks, one PASS/FAIL line per criterion. Runs
//! without the test harness so the lines always reach the output.

mod common;

use std::time::Instant;

use pdpt_bench::{cheapest_insertion, generate_instance, run_benchmark, tiny_suite, BenchmarkSuite, GeneratorParams, TwClass};
use pdpt_core::model::instance_to_json;
use pdpt_core::{
    apply_insertion, check_insertion_feasible, enumerate_insertions, ranked_insertions, Instance,
    Solution,
};
use pdpt_lbbd::{branch_and_check, build_master, gap_metrics, BnCResult, CutKind};
use pdpt_lns::features::{FeatureVec, N_FEATURES};
use pdpt_lns::{covariance, run_search, Mahalanobis, Method, SearchConfig, SearchReport};
use pdpt_milp::{exact_oracle_solve, Backend, BuiltinBackend, Limits, Row, Sense, SolveStatus, VarId, VarKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TINY_SEED: u64 = 20_000;
const TOL: f64 = 1e-6;

type Verdict = Result<String, String>;

/// The 50 tiny instances with their oracle optima and solver results,
/// shared by the first three criteria and the cut replay.
struct Tiny {
    instances: Vec<Instance>,
    optimum: Vec<f64>,
    bnc: Vec<Result<BnCResult, String>>,
    bnc_time: f64,
    lns: Vec<Result<SearchReport, String>>,
    lns_time: f64,
}

fn prepare() -> Result<Tiny, String> {
    let instances = tiny_suite(50, TINY_SEED).map_err(|e| e.to_string())?;
    let optimum = instances
        .iter()
        .map(|inst| exact_oracle_solve(inst).map(|s| s.objective()).map_err(|e| format!("{}: {e}", inst.meta.name)))
        .collect::<Result<Vec<_>, _>>()?;
    let start = Instant::now();
    let bnc = instances
        .iter()
        .map(|inst| branch_and_check(inst, &BuiltinBackend::new(), None, &Limits::default()).map_err(|e| e.to_string()))
        .collect();
    let bnc_time = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let lns = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let cfg = SearchConfig { seed: i as u64, ..SearchConfig::for_method(Method::Rlns) };
            run_search(inst, &cfg).map_err(|e| e.to_string())
        })
        .collect();
    let lns_time = start.elapsed().as_secs_f64();
    Ok(Tiny { instances, optimum, bnc, bnc_time, lns, lns_time })
}

fn oracle_equivalence(t: &Tiny) -> Verdict {
    let mut bad = Vec::new();
    for (i, res) in t.bnc.iter().enumerate() {
        match res {
            Ok(r) if r.gap == 0.0 && (r.ub - t.optimum[i]).abs() <= TOL => {}
            Ok(r) => bad.push(format!("{}: ub {} gap {} optimum {}", t.instances[i].meta.name, r.ub, r.gap, t.optimum[i])),
            Err(e) => bad.push(format!("{}: {e}", t.instances[i].meta.name)),
        }
    }
    if !bad.is_empty() {
        return Err(summarize(&bad));
    }
    if t.bnc_time >= 600.0 {
        return Err(format!("runtime {:.1}s", t.bnc_time));
    }
    Ok(format!("50/50 exact, {:.1}s", t.bnc_time))
}

fn lns_quality(t: &Tiny) -> Verdict {
    let mut within = 0;
    let mut bad = Vec::new();
    for (i, res) in t.lns.iter().enumerate() {
        let report = res.as_ref().map_err(|e| format!("{}: {e}", t.instances[i].meta.name))?;
        if report.best_cost() <= t.optimum[i] * 1.02 + TOL {
            within += 1;
        }
        for run in &report.restarts {
            if run.best_cost() > run.initial_cost + TOL {
                bad.push(format!("{} restart {} worse than its start", t.instances[i].meta.name, run.restart));
            }
        }
    }
    if !bad.is_empty() {
        return Err(summarize(&bad));
    }
    if within * 10 < 9 * t.instances.len() || t.lns_time >= 300.0 {
        return Err(format!("{within}/50 within 2%, {:.1}s", t.lns_time));
    }
    Ok(format!("{within}/50 within 2% of the optimum, {:.1}s", t.lns_time))
}

fn warm_start_dominance(t: &Tiny) -> Verdict {
    let mut bad = Vec::new();
    for (i, inst) in t.instances.iter().enumerate() {
        let Ok(report) = &t.lns[i] else { return Err(format!("{}: no rLNS solution", inst.meta.name)) };
        let warm = &report.best().best;
        match branch_and_check(inst, &BuiltinBackend::new(), Some(warm), &Limits::default()) {
            Ok(r) if r.ub <= warm.objective() + 1e-9 => {}
            Ok(r) => bad.push(format!("{}: ub {} > {}", inst.meta.name, r.ub, warm.objective())),
            Err(e) => bad.push(format!("{}: {e}", inst.meta.name)),
        }
    }
    if bad.is_empty() {
        Ok("50/50 warm-started upper bounds at or below the rLNS cost".into())
    } else {
        Err(summarize(&bad))
    }
}

/// A random partial solution: requests inserted in random order at one of
/// their five cheapest places, then a random subset taken out again.
fn random_partial(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
    let mut sol = Solution::empty(inst);
    let mut order: Vec<usize> = (0..inst.requests.len()).collect();
    order.shuffle(rng);
    for r in order {
        let options: Vec<_> = ranked_insertions(inst, &sol, r, true).take(5).collect();
        if let Some(c) = options.choose(rng) {
            apply_insertion(inst, &mut sol, c).unwrap();
        }
    }
    let served = sol.served();
    let k = rng.gen_range(0..=served.len());
    let drop: Vec<usize> = served.choose_multiple(rng, k).copied().collect();
    sol.remove_requests(inst, &drop).unwrap();
    sol
}

fn feasibility_engine() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let per_instance = 500;
    let (mut total, mut feasible, mut mismatches) = (0, 0, Vec::new());
    for i in 0..20u64 {
        let params = GeneratorParams { transfers: Some(2), ..GeneratorParams::new(8, TwClass::ALL[i as usize % 3]) };
        let inst = generate_instance(&params, 500 + i).map_err(|e| e.to_string())?;
        let mut taken = 0;
        while taken < per_instance {
            let sol = random_partial(&inst, &mut rng);
            let mut cands: Vec<_> = sol.unserved().into_iter().flat_map(|r| enumerate_insertions(&inst, &sol, r)).collect();
            cands.shuffle(&mut rng);
            for c in cands.into_iter().take(per_instance - taken) {
                let fast = check_insertion_feasible(&inst, &sol, &c);
                if fast != common::oracle_feasible(&inst, &sol, &c) {
                    mismatches.push(format!("{}: {c:?}", inst.meta.name));
                }
                feasible += fast as usize;
                total += 1;
                taken += 1;
            }
        }
    }
    if mismatches.is_empty() {
        Ok(format!("{total}/{total} agree ({feasible} feasible)"))
    } else {
        Err(format!("{} of {total} disagree, first {}", mismatches.len(), mismatches[0]))
    }
}

/// Master with the logged binaries fixed and the logged cut added.
fn replay(inst: &Instance, values: &[f64], cut: &pdpt_lbbd::BendersCut) -> Result<pdpt_milp::SolveResult, String> {
    let master = build_master(inst);
    let mut model = master.model.clone();
    for (i, v) in master.model.vars().iter().enumerate() {
        if v.kind == VarKind::Binary {
            model.add_row(Row::new(format!("fix_{i}"), vec![(VarId(i), 1.0)], Sense::Eq, values[i].round()));
        }
    }
    model.add_row(cut.to_row(&master, "replayed"));
    BuiltinBackend::new().solve(&model, &Limits::default(), None, None).map_err(|e| e.to_string())
}

fn cut_validity(t: &Tiny) -> Verdict {
    let (mut optimality, mut feasibility) = (0, 0);
    let mut bad = Vec::new();
    for (i, res) in t.bnc.iter().enumerate() {
        let Ok(res) = res else { continue };
        let inst = &t.instances[i];
        for (n, rec) in res.log.iter().enumerate() {
            let out = replay(inst, &rec.master_values, &rec.cut)?;
            match rec.cut.kind {
                CutKind::Optimality => {
                    optimality += 1;
                    let bound = rec.cut.bound.unwrap();
                    let z = out.objective.unwrap_or(f64::NEG_INFINITY);
                    // the master sums the arc lengths in another order than the subproblem
                    if out.status != SolveStatus::Optimal || z < bound - 1e-9 * (1.0 + bound.abs()) {
                        bad.push(format!("{} iteration {}: z {z} below {bound}", inst.meta.name, n + 1));
                    }
                }
                CutKind::Feasibility => {
                    feasibility += 1;
                    if out.status != SolveStatus::Infeasible {
                        bad.push(format!("{} iteration {}: cut point survives", inst.meta.name, n + 1));
                    }
                    if res.log[n + 1..].iter().any(|later| later.edges == rec.edges) {
                        bad.push(format!("{} iteration {}: edge set reappears", inst.meta.name, n + 1));
                    }
                }
            }
        }
    }
    let logged = optimality + feasibility;
    if !bad.is_empty() {
        return Err(summarize(&bad));
    }
    if logged < 100 {
        return Err(format!("only {logged} logged iterations"));
    }
    Ok(format!("{logged} iterations replayed ({optimality} optimality, {feasibility} feasibility)"))
}

fn metric_formulas() -> Verdict {
    let table = gap_metrics(889.32, 1423.0, 1423.0).map_err(|e| e.to_string())?;
    if (table.gap - 37.50).abs() > 0.01 {
        return Err(format!("gap {:.4}", table.gap));
    }
    // (lb, heuristic ub, exact ub) -> (gap, heuristic gap, err), all in percent
    let triples = [
        ((90.0, 110.0, 100.0), (10.0, 200.0 / 11.0, 100.0 / 11.0)),
        ((50.0, 100.0, 100.0), (50.0, 50.0, 0.0)),
        ((80.0, 80.0, 80.0), (0.0, 0.0, 0.0)),
    ];
    for ((lb, heur, exact), (gap, heuristic_gap, err)) in triples {
        let m = gap_metrics(lb, heur, exact).map_err(|e| e.to_string())?;
        if (m.gap - gap).abs() > 1e-9 || (m.heuristic_gap - heuristic_gap).abs() > 1e-9 || (m.err - err).abs() > 1e-9 {
            return Err(format!("({lb}, {heur}, {exact}) gave {m:?}"));
        }
    }
    Ok(format!("LB 889.32, UB 1423 gives {:.2}%", table.gap))
}

fn scale_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for f in 0..20 {
        let n = rng.gen_range(12..30);
        let rows: Vec<FeatureVec> = (0..n).map(|_| FeatureVec::from_fn(|_, _| rng.gen_range(-5.0..5.0))).collect();
        let scale = FeatureVec::from_fn(|_, _| rng.gen_range(0.1..10.0));
        let scaled: Vec<FeatureVec> = rows.iter().map(|r| r.component_mul(&scale)).collect();
        let (m, ms) = (Mahalanobis::new(&covariance(&rows)), Mahalanobis::new(&covariance(&scaled)));
        if m.ridge != 0.0 || ms.ridge != 0.0 {
            return Err(format!("fixture {f} needed a ridge"));
        }
        for a in 0..n {
            for b in a + 1..n {
                worst = worst.max((m.distance(&rows[a], &rows[b]) - ms.distance(&scaled[a], &scaled[b])).abs());
            }
        }
    }
    debug_assert_eq!(N_FEATURES, 9);
    if worst <= 1e-9 {
        Ok(format!("largest change {worst:.1e} over 20 fixtures"))
    } else {
        Err(format!("largest change {worst:.3e}"))
    }
}

fn generator_contract() -> Verdict {
    let mut bad = Vec::new();
    let mut fleets = Vec::new();
    for seed in 0..100u64 {
        let params = GeneratorParams::new(25, TwClass::ALL[seed as usize % 3]);
        let inst = generate_instance(&params, seed).map_err(|e| e.to_string())?;
        let name = &inst.meta.name;
        if let Some(r) = (0..inst.requests.len()).find(|&r| !common::direct_route_oracle(&inst, r)) {
            bad.push(format!("{name}: request {r} has no direct route"));
        }
        let k = inst.vehicles.len();
        fleets.push(k);
        if cheapest_insertion(&inst).is_none() {
            bad.push(format!("{name}: fleet of {k} is not enough"));
        }
        if k > 1 && cheapest_insertion(&common::without_last_vehicle(&inst)).is_some() {
            bad.push(format!("{name}: {} vehicles would do", k - 1));
        }
        let again = generate_instance(&params, seed).map_err(|e| e.to_string())?;
        if instance_to_json(&inst) != instance_to_json(&again) {
            bad.push(format!("{name}: regeneration differs"));
        }
    }
    if bad.is_empty() {
        let (lo, hi) = (fleets.iter().min().unwrap(), fleets.iter().max().unwrap());
        Ok(format!("100 instances of 25 requests, fleets {lo} to {hi}"))
    } else {
        Err(summarize(&bad))
    }
}

/// The first few problems and a count of the rest.
fn summarize(problems: &[String]) -> String {
    let mut text = problems.iter().take(5).cloned().collect::<Vec<_>>().join("; ");
    if problems.len() > 5 {
        text.push_str(&format!("; {} more", problems.len() - 5));
    }
    text
}

/// The CSV without its wall-clock column.
fn without_times(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

fn baseline_harness() -> Verdict {
    let instances = tiny_suite(5, 900).map_err(|e| e.to_string())?;
    let optimum: Vec<f64> =
        instances.iter().map(|i| exact_oracle_solve(i).map(|s| s.objective())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let suite = BenchmarkSuite::new(instances, 10, 3);
    let first = run_benchmark(&suite).map_err(|e| e.to_string())?;
    let second = run_benchmark(&suite).map_err(|e| e.to_string())?;
    let csv = first.to_csv();
    if !csv.starts_with("instance,tw,variant,method,best_ub,avg_ub,avg_time_s\n") || csv.lines().count() != 16 {
        return Err("unexpected CSV shape".into());
    }
    if without_times(&csv) != without_times(&second.to_csv()) {
        return Err("re-run differs".into());
    }
    for row in &first.rows {
        match (row.best_ub, row.avg_ub) {
            (Some(b), Some(a)) if b <= a + 1e-9 => {}
            _ => return Err(format!("{} {}: best {:?} avg {:?}", row.instance, row.method, row.best_ub, row.avg_ub)),
        }
    }
    let mean = |m| first.mean_best(m).unwrap_or(f64::INFINITY);
    let (rlns, ls, multi) = (mean(Method::Rlns), mean(Method::Ls), mean(Method::Multiop));
    let oracle_mean = optimum.iter().sum::<f64>() / optimum.len() as f64;
    if rlns <= ls + 1e-9 && rlns <= multi + 1e-9 {
        Ok(format!("mean best rLNS {rlns:.2}, LS {ls:.2}, MULTI-OP {multi:.2}, oracle {oracle_mean:.2}"))
    } else {
        Err(format!("mean best rLNS {rlns:.2}, LS {ls:.2}, MULTI-OP {multi:.2}, oracle {oracle_mean:.2}"))
    }
}

fn main() {
    let start = Instant::now();
    let prepared = prepare();
    let tiny = &prepared;
    let shared = |f: fn(&Tiny) -> Verdict| move || tiny.as_ref().map_err(|e| e.clone()).and_then(f);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("oracle equivalence", Box::new(shared(oracle_equivalence))),
        ("LNS quality", Box::new(shared(lns_quality))),
        ("warm start dominance", Box::new(shared(warm_start_dominance))),
        ("feasibility engine equivalence", Box::new(feasibility_engine)),
        ("cut validity", Box::new(shared(cut_validity))),
        ("metric formulas", Box::new(metric_formulas)),
        ("Mahalanobis scale invariance", Box::new(scale_invariance)),
        ("generator contract", Box::new(generator_contract)),
        ("baseline harness", Box::new(baseline_harness)),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {name}: {tag} ({detail}) [{:.1}s]", n + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
