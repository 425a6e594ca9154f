use std::io::Write;
use std::time::Instant;

use pdpt_core::{Instance, ReqId, Solution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alns::{OperatorBank, SEGMENT_LEN};
use crate::config::{Method, SearchConfig};
use crate::features::Dissimilarity;
use crate::lahc::LateAcceptance;
use crate::ordering::{InsertionOrder, Orderings};
use crate::removal::{random_removal, related_removal, worst_removal};
use crate::repair::repair;
use crate::SearchError;

/// Random orders tried after the difficulty order fails to build a
/// starting solution.
pub const INITIAL_RETRIES: usize = 20;

const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Cost of the repaired candidate; none when the repair failed.
    pub cost: Option<f64>,
    pub accepted: bool,
    pub best: f64,
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub restart: usize,
    pub best: Solution,
    pub initial_cost: f64,
    pub iterations: usize,
    pub time_s: f64,
    /// Starts with the initial solution as iteration 0.
    pub trace: Vec<IterationRecord>,
}

impl RestartOutcome {
    pub fn best_cost(&self) -> f64 {
        self.best.objective()
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub method: Method,
    pub restarts: Vec<RestartOutcome>,
}

impl SearchReport {
    pub fn best(&self) -> &RestartOutcome {
        self.restarts
            .iter()
            .min_by(|a, b| a.best_cost().total_cmp(&b.best_cost()).then(a.restart.cmp(&b.restart)))
            .expect("at least one restart")
    }

    pub fn best_cost(&self) -> f64 {
        self.best().best_cost()
    }

    pub fn avg_cost(&self) -> f64 {
        self.restarts.iter().map(|r| r.best_cost()).sum::<f64>() / self.restarts.len() as f64
    }

    pub fn avg_time(&self) -> f64 {
        self.restarts.iter().map(|r| r.time_s).sum::<f64>() / self.restarts.len() as f64
    }

    /// `restart,iteration,cost,accepted,best`, one row per iteration.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<(), SearchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["restart", "iteration", "cost", "accepted", "best"])?;
        for run in &self.restarts {
            for rec in &run.trace {
                let cost = rec.cost.map(|c| c.to_string()).unwrap_or_default();
                w.write_record([
                    run.restart.to_string(),
                    rec.iteration.to_string(),
                    cost,
                    rec.accepted.to_string(),
                    rec.best.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Instance data shared by every restart.
pub struct SearchContext {
    pub dissimilarity: Dissimilarity,
    pub orderings: Orderings,
}

impl SearchContext {
    pub fn new(inst: &Instance, config: &SearchConfig) -> SearchContext {
        let dissimilarity = match config.method {
            Method::Ls => Dissimilarity::shaw(inst, config.shaw_weights()),
            Method::Rlns | Method::Multiop => Dissimilarity::mahalanobis(inst),
        };
        SearchContext { dissimilarity, orderings: Orderings::new(inst, config.shaw_weights()) }
    }
}

/// Generator of restart `restart`; streams of one seed never overlap.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Cheapest insertion without blinks in decreasing difficulty order, then
/// up to [`INITIAL_RETRIES`] random orders.
pub fn initial_solution(inst: &Instance, orderings: &Orderings, rng: &mut impl Rng) -> Result<Solution, SearchError> {
    let empty = Solution::empty(inst);
    let mut order: Vec<ReqId> = (0..inst.requests.len()).collect();
    orderings.order(InsertionOrder::Difficulty, &mut order, rng);
    if let Ok(sol) = repair(inst, &empty, &order, 0.0, rng) {
        return Ok(sol);
    }
    for _ in 0..INITIAL_RETRIES {
        order.shuffle(rng);
        if let Ok(sol) = repair(inst, &empty, &order, 0.0, rng) {
            return Ok(sol);
        }
    }
    Err(SearchError::NoInitialSolution)
}

const DESTROY_OPS: [Destroy; 3] = [Destroy::Random, Destroy::Worst, Destroy::Related];
const REPAIR_OPS: [InsertionOrder; 2] = [InsertionOrder::Random, InsertionOrder::Difficulty];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Destroy {
    Random,
    Worst,
    Related,
}

/// One restart: destroy, repair, late acceptance, until `patience`
/// iterations pass without a new best.
pub fn run_restart(
    inst: &Instance,
    config: &SearchConfig,
    ctx: &SearchContext,
    restart: usize,
) -> Result<RestartOutcome, SearchError> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = restart_rng(config.seed, restart);
    let init = initial_solution(inst, &ctx.orderings, &mut rng)?;
    let initial_cost = init.objective();
    let mut trace = vec![IterationRecord { iteration: 0, cost: Some(initial_cost), accepted: true, best: initial_cost }];
    let mut best = init.clone();
    let mut current = init;
    let mut current_cost = initial_cost;
    let mut lahc = LateAcceptance::new(config.lahc_len, initial_cost);
    let mut destroy_bank = OperatorBank::new(DESTROY_OPS.len(), config.learning_rate);
    let mut repair_bank = OperatorBank::new(REPAIR_OPS.len(), config.learning_rate);
    let mut idle = 0;
    let mut iteration = 0;

    while !inst.requests.is_empty() && idle < config.patience {
        if config.max_iterations.is_some_and(|m| iteration >= m)
            || config.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            break;
        }
        iteration += 1;
        let served = current.served().len();
        let lo = config.destroy_min.min(served);
        let hi = config.destroy_max.min(served);
        let n = rng.gen_range(lo..=hi);
        let (destroy, order_kind, ops) = match config.method {
            Method::Rlns => (Destroy::Related, InsertionOrder::Difficulty, None),
            Method::Ls => (Destroy::Related, InsertionOrder::Ease, None),
            Method::Multiop => {
                let d = destroy_bank.select(&mut rng);
                let r = repair_bank.select(&mut rng);
                (DESTROY_OPS[d], REPAIR_OPS[r], Some((d, r)))
            }
        };
        let mut removed = match destroy {
            Destroy::Random => random_removal(&current, n, &mut rng),
            Destroy::Worst => worst_removal(inst, &current, n, config.worst_noise, &mut rng),
            Destroy::Related => related_removal(&current, n, &ctx.dissimilarity, &mut rng),
        };
        let mut partial = current.clone();
        partial.remove_requests(inst, &removed).expect("removed requests are served");
        ctx.orderings.order(order_kind, &mut removed, &mut rng);

        let mut record = IterationRecord { iteration, cost: None, accepted: false, best: best.objective() };
        let mut reward = 0.0;
        match repair(inst, &partial, &removed, config.blink, &mut rng) {
            Ok(candidate) => {
                let cost = candidate.objective();
                record.cost = Some(cost);
                record.accepted = lahc.step(iteration, &mut current_cost, cost);
                if cost < best.objective() - IMPROVEMENT_TOL {
                    best = candidate.clone();
                    idle = 0;
                    reward = config.reward_best;
                } else {
                    idle += 1;
                    if record.accepted {
                        reward = config.reward_accept;
                    }
                }
                if record.accepted {
                    current = candidate;
                }
            }
            // the iteration is discarded
            Err(_) => idle += 1,
        }
        record.best = best.objective();
        trace.push(record);
        if let Some((d, r)) = ops {
            destroy_bank.reward(d, reward);
            repair_bank.reward(r, reward);
            if iteration % SEGMENT_LEN == 0 {
                destroy_bank.end_segment();
                repair_bank.end_segment();
            }
        }
    }
    Ok(RestartOutcome {
        restart,
        best,
        initial_cost,
        iterations: iteration,
        time_s: start.elapsed().as_secs_f64(),
        trace,
    })
}

/// All restarts of `config`, in parallel, reported in restart order.
/// Restarts that find no starting solution are left out.
pub fn run_search(inst: &Instance, config: &SearchConfig) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let ctx = SearchContext::new(inst, config);
    let outcomes: Vec<Result<RestartOutcome, SearchError>> =
        (0..config.restarts).into_par_iter().map(|k| run_restart(inst, config, &ctx, k)).collect();
    let mut restarts = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok(run) => restarts.push(run),
            // another restart's random orders may still construct a start
            Err(SearchError::NoInitialSolution) => {}
            Err(e) => return Err(e),
        }
    }
    if restarts.is_empty() {
        return Err(SearchError::NoInitialSolution);
    }
    Ok(SearchReport { method: config.method, restarts })
}
