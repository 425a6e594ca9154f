use std::collections::HashMap;
use std::time::{Duration, Instant};

use pdpt_core::{validate_solution, Instance, LocId, Solution};
use pdpt_milp::{Backend, HookResponse, Limits, Row, SolveStatus};

use crate::cuts::{make_feasibility_cut, make_optimality_cut, BendersCut, CutKind};
use crate::master::{build_master, MasterModel};
use crate::metrics::gap_percent;
use crate::paths::{edge_set_hash, extract_paths};
use crate::subproblem::{solve_subproblem_enumeration, solve_subproblem_milp, SubproblemSolution};
use crate::warm::warm_start_from;
use crate::LbbdError;

const CUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemMethod {
    /// Exhaustive search over route segments.
    Enumerate,
    /// The subproblem MILP, solved by the same backend as the master.
    Milp,
}

/// One visited integer master point.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub master_values: Vec<f64>,
    pub master_objective: f64,
    pub edges: Vec<(LocId, LocId)>,
    pub edge_hash: u64,
    /// Hash of the edges together with the transfer triples.
    pub key: u64,
    /// The same edges and triples were seen at an earlier iteration.
    pub repeated: bool,
    pub cut: BendersCut,
}

#[derive(Debug, Clone)]
pub struct BnCResult {
    pub lb: f64,
    /// Infinite when no routing plan was found.
    pub ub: f64,
    /// Percent; infinite without an upper bound.
    pub gap: f64,
    pub time_s: f64,
    pub iterations: usize,
    pub optimality_cuts: usize,
    pub feasibility_cuts: usize,
    pub solution: Option<Solution>,
    pub log: Vec<IterationRecord>,
}

impl BnCResult {
    pub fn is_optimal(&self) -> bool {
        self.ub.is_finite() && self.gap <= 1e-9
    }

    pub fn to_json(&self) -> serde_json::Value {
        let num = |v: f64| if v.is_finite() { serde_json::json!(v) } else { serde_json::Value::Null };
        serde_json::json!({
            "lb": num(self.lb),
            "ub": num(self.ub),
            "gap": num(self.gap),
            "time_s": self.time_s,
            "iters": self.iterations,
            "cuts": { "opt": self.optimality_cuts, "feas": self.feasibility_cuts },
        })
    }

    /// One line per iteration: `iteration,kind,edges,edge_hash,key,bound,master_objective`.
    pub fn cut_log_csv(&self) -> String {
        let mut out = String::from("iteration,kind,edges,edge_hash,key,bound,master_objective\n");
        for (n, rec) in self.log.iter().enumerate() {
            let kind = match rec.cut.kind {
                CutKind::Optimality => "optimality",
                CutKind::Feasibility => "feasibility",
            };
            let bound = rec.cut.bound.map(|b| b.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{kind},{},{:016x},{:016x},{bound},{}\n",
                n + 1,
                rec.edges.len(),
                rec.edge_hash,
                rec.key,
                rec.master_objective
            ));
        }
        out
    }
}

/// Evaluates integer master points: paths, subproblem (cached by edges and
/// triples), cut, incumbent.
struct Checker<'a> {
    inst: &'a Instance,
    master: &'a MasterModel,
    method: SubproblemMethod,
    backend: &'a dyn Backend,
    deadline: Option<Instant>,
    cache: HashMap<u64, Option<(f64, Solution)>>,
    best: Option<Solution>,
    log: Vec<IterationRecord>,
    error: Option<LbbdError>,
}

impl Checker<'_> {
    fn ub(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |s| s.objective())
    }

    fn offer(&mut self, sol: Solution) {
        if sol.objective() < self.ub() {
            self.best = Some(sol);
        }
    }

    fn solve_sub(&mut self, asg: &crate::paths::MasterAssignment) -> Result<Option<SubproblemSolution>, LbbdError> {
        match self.method {
            SubproblemMethod::Enumerate => solve_subproblem_enumeration(self.inst, asg),
            SubproblemMethod::Milp => {
                let limits = Limits {
                    time: self.deadline.map(|d| d.saturating_duration_since(Instant::now())),
                    gap: 0.0,
                };
                solve_subproblem_milp(self.inst, asg, self.backend, &limits)
            }
        }
    }

    /// Cut row for the point and the plan cost when the subproblem is feasible.
    fn check(&mut self, values: &[f64], objective: f64) -> (Row, Option<f64>) {
        let name = format!("bcut_{}", self.log.len() + 1);
        let asg = match extract_paths(self.inst, self.master, values) {
            Ok(a) => a,
            Err(e) => {
                // cannot happen for points satisfying the master rows;
                // exclude the selected trips so the search moves on
                let trips: Vec<(LocId, LocId)> = (0..self.master.n_locations())
                    .flat_map(|i| (0..self.master.n_locations()).map(move |j| (i, j)))
                    .filter(|&(i, j)| values[self.master.trip[i][j].0] > 0.5)
                    .collect();
                self.error.get_or_insert(e);
                return (make_feasibility_cut(&trips).to_row(self.master, name), None);
            }
        };
        let key = asg.key();
        let repeated = self.cache.contains_key(&key);
        let outcome = match self.cache.get(&key) {
            Some(o) => o.clone(),
            None => {
                let solved = match self.solve_sub(&asg) {
                    Ok(s) => s,
                    Err(e) => {
                        self.error.get_or_insert(e);
                        None
                    }
                };
                let o = solved.map(|s| (s.value, s.plan));
                self.cache.insert(key, o.clone());
                o
            }
        };
        let (cut, ub) = match outcome {
            Some((value, plan)) => {
                let cost = plan.objective().min(value);
                self.offer(plan);
                (make_optimality_cut(&asg.edges, value), Some(cost))
            }
            None => (make_feasibility_cut(&asg.edges), None),
        };
        let row = cut.to_row(self.master, name);
        self.log.push(IterationRecord {
            master_values: values.to_vec(),
            master_objective: objective,
            edge_hash: edge_set_hash(&asg.edges),
            edges: asg.edges,
            key,
            repeated,
            cut,
        });
        (row, ub)
    }
}

/// Branch-and-check with the subproblem solver matched to the backend:
/// segment enumeration for the built-in backend, the subproblem MILP
/// otherwise.
pub fn branch_and_check(
    inst: &Instance,
    backend: &dyn Backend,
    warm_start: Option<&Solution>,
    limits: &Limits,
) -> Result<BnCResult, LbbdError> {
    let method = if backend.name() == "builtin" { SubproblemMethod::Enumerate } else { SubproblemMethod::Milp };
    branch_and_check_with(inst, backend, warm_start, limits, method)
}

/// Solves the master under `backend`, checking every integer point with
/// the subproblem and adding the resulting cut lazily. Backends without
/// callbacks get the iterative loop instead: solve the master to
/// optimality, cut, repeat.
pub fn branch_and_check_with(
    inst: &Instance,
    backend: &dyn Backend,
    warm_start: Option<&Solution>,
    limits: &Limits,
    method: SubproblemMethod,
) -> Result<BnCResult, LbbdError> {
    let start = Instant::now();
    let deadline = limits.time.map(|t| start + t);
    let master = build_master(inst);
    let mut checker = Checker {
        inst,
        master: &master,
        method,
        backend,
        deadline,
        cache: HashMap::new(),
        best: None,
        log: Vec::new(),
        error: None,
    };
    let mut warm_values = None;
    if let Some(sol) = warm_start {
        if let Some(v) = validate_solution(inst, sol).first() {
            return Err(LbbdError::InvalidWarmStart(v.to_string()));
        }
        if !sol.is_complete() {
            return Err(LbbdError::InvalidWarmStart("some requests are not served".into()));
        }
        checker.offer(sol.clone());
        // a plan the master cannot express still serves as incumbent
        warm_values = warm_start_from(inst, &master, sol).ok();
    }

    let caps = backend.capabilities();
    let lb = if caps.supports_callbacks {
        let warm = if caps.supports_warm_start { warm_values.as_deref() } else { None };
        let mut hook = |values: &[f64], objective: f64| {
            let (row, ub) = checker.check(values, objective);
            // a satisfied cut means the point's z already prices its routing
            let lazy_rows = if row.violation(values) > CUT_TOL { vec![row] } else { Vec::new() };
            HookResponse { lazy_rows, upper_bound: ub }
        };
        let res = backend.solve(&master.model, limits, warm, Some(&mut hook))?;
        match res.status {
            SolveStatus::Optimal | SolveStatus::Infeasible => f64::INFINITY,
            SolveStatus::Feasible | SolveStatus::Limit => res.bound,
        }
    } else {
        iterate(&master, &mut checker, deadline)?
    };
    if let Some(e) = checker.error.take() {
        return Err(e);
    }
    let ub = checker.ub();
    if !ub.is_finite() && lb.is_infinite() {
        return Err(LbbdError::NoFeasibleSolution);
    }
    let lb = lb.min(ub);
    let gap = if ub.is_finite() { gap_percent(lb, ub).unwrap_or(0.0).max(0.0) } else { f64::INFINITY };
    let optimality_cuts = checker.log.iter().filter(|r| r.cut.kind == CutKind::Optimality).count();
    Ok(BnCResult {
        lb,
        ub,
        gap,
        time_s: start.elapsed().as_secs_f64(),
        iterations: checker.log.len(),
        optimality_cuts,
        feasibility_cuts: checker.log.len() - optimality_cuts,
        solution: checker.best,
        log: checker.log,
    })
}

/// Returns the proven lower bound, infinite when the master ran out of
/// points below the incumbent.
fn iterate(
    master: &MasterModel,
    checker: &mut Checker,
    deadline: Option<Instant>,
) -> Result<f64, LbbdError> {
    let mut model = master.model.clone();
    let mut lb = f64::NEG_INFINITY;
    loop {
        let remaining = match deadline {
            Some(d) => {
                let left = d.saturating_duration_since(Instant::now());
                if left == Duration::ZERO {
                    return Ok(lb);
                }
                Some(left)
            }
            None => None,
        };
        let res = checker.backend.solve(&model, &Limits { time: remaining, gap: 0.0 }, None, None)?;
        match res.status {
            SolveStatus::Infeasible => return Ok(f64::INFINITY),
            SolveStatus::Optimal => {}
            SolveStatus::Feasible | SolveStatus::Limit => return Ok(lb.max(res.bound)),
        }
        let z = res.objective.unwrap_or(f64::NEG_INFINITY);
        lb = lb.max(z);
        let ub = checker.ub();
        if lb >= ub - 1e-9 * (1.0 + ub.abs()) {
            return Ok(f64::INFINITY);
        }
        let values = res.values.expect("optimal master has values");
        let (row, _) = checker.check(&values, z);
        if checker.error.is_some() {
            return Ok(lb);
        }
        if row.violation(&values) <= CUT_TOL {
            return Ok(f64::INFINITY);
        }
        model.add_lazy_row(row);
    }
}
