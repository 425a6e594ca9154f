//! Depth-first branch-and-bound over the binaries, without LP relaxations.
//!
//! Bounds come from activity-based propagation. Where a row's binaries are
//! covered by set-partitioning rows (`sum x = 1`, given or implied by a
//! flow balance against one), each partition contributes its cheapest free
//! member instead of the sum of its negative coefficients. Once every
//! binary is fixed, the continuous part must be a system of difference
//! constraints and bounds; its least solution is computed with a
//! label-correcting pass, which is optimal for objectives with
//! non-negative continuous coefficients.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use crate::backend::{
    require, Backend, BackendError, Capabilities, HookResponse, IntegerHook, Limits, SolveResult,
    SolveStatus,
};
use crate::model::{MilpModel, Row, Sense, VarKind};

const FEAS_TOL: f64 = 1e-6;

fn prop_tol(rhs: f64) -> f64 {
    1e-9 * (1.0 + rhs.abs())
}

fn cutoff_eps(cutoff: f64) -> f64 {
    1e-9 * (1.0 + cutoff.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Open partitions with the fewest free members first, cheapest member
    /// set to 1 first; remaining binaries in declaration order, 0 first.
    #[default]
    Guided,
    /// Declaration order, 0 before 1.
    Declaration,
}

#[derive(Debug, Clone, Default)]
pub struct BuiltinBackend {
    pub branch_rule: BranchRule,
    pub node_limit: Option<u64>,
}

impl BuiltinBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_rule(branch_rule: BranchRule) -> Self {
        BuiltinBackend { branch_rule, node_limit: None }
    }
}

impl Backend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { supports_callbacks: true, supports_warm_start: true }
    }

    fn solve(
        &self,
        model: &MilpModel,
        limits: &Limits,
        warm_start: Option<&[f64]>,
        hook: Option<&mut dyn IntegerHook>,
    ) -> Result<SolveResult, BackendError> {
        require(self, warm_start.is_some(), hook.is_some())?;
        model.check()?;
        let mut search = Search::new(model, self.branch_rule)?;
        let result = search.run(limits, self.node_limit, warm_start, hook);
        match search.error.take() {
            Some(e) => Err(e),
            None => Ok(result),
        }
    }
}

/// Row in `sum(a * x) <= rhs` form.
#[derive(Debug, Clone)]
struct Ineq {
    terms: Vec<(usize, f64)>,
    rhs: f64,
    families: Vec<Family>,
}

/// Disjoint partitions covering part of a row's binaries.
#[derive(Debug, Clone)]
struct Family {
    parts: Vec<Vec<(usize, f64)>>,
    /// For each term of the row, the index of the part holding it.
    slot: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy)]
struct PartEval {
    fixed_one: bool,
    nfree: usize,
    min1: f64,
    arg1: usize,
    min2: f64,
    std_sum: f64,
}

impl PartEval {
    fn contribution(&self) -> f64 {
        if self.fixed_one {
            self.std_sum
        } else if self.nfree == 0 {
            f64::INFINITY
        } else {
            self.min1
        }
    }
}

fn std_contrib(a: f64, lb: f64, ub: f64) -> f64 {
    if a > 0.0 {
        a * lb
    } else {
        a * ub
    }
}

fn eval_part(members: &[(usize, f64)], lb: &[f64], ub: &[f64]) -> PartEval {
    let mut e = PartEval {
        fixed_one: false,
        nfree: 0,
        min1: f64::INFINITY,
        arg1: usize::MAX,
        min2: f64::INFINITY,
        std_sum: 0.0,
    };
    for &(v, a) in members {
        e.std_sum += std_contrib(a, lb[v], ub[v]);
        if lb[v] > 0.5 {
            e.fixed_one = true;
        } else if ub[v] > 0.5 {
            e.nfree += 1;
            if a < e.min1 {
                e.min2 = e.min1;
                e.min1 = a;
                e.arg1 = v;
            } else if a < e.min2 {
                e.min2 = a;
            }
        }
    }
    e
}

struct Node {
    lb: Vec<f64>,
    ub: Vec<f64>,
    bound: f64,
    /// Variable fixed by the branching decision that created the node.
    changed: Option<usize>,
    n_ineqs: usize,
    cutoff_epoch: u64,
}

struct Search {
    n: usize,
    is_bin: Vec<bool>,
    lb0: Vec<f64>,
    ub0: Vec<f64>,
    objective: Vec<(usize, f64)>,
    ineqs: Vec<Ineq>,
    var_ineqs: Vec<Vec<usize>>,
    rows: Vec<Row>,
    partitions: Vec<Vec<usize>>,
    part_of_var: Vec<Vec<usize>>,
    weight: Vec<f64>,
    rule: BranchRule,
    cutoff: f64,
    cutoff_epoch: u64,
    cutoff_row: usize,
    best_values: Option<Vec<f64>>,
    best_objective: Option<f64>,
    nodes: u64,
    error: Option<BackendError>,
}

enum Leaf {
    Infeasible,
    Point(Vec<f64>, f64),
}

impl Search {
    fn new(model: &MilpModel, rule: BranchRule) -> Result<Search, BackendError> {
        let n = model.n_vars();
        let is_bin: Vec<bool> = model.vars().iter().map(|v| v.kind == VarKind::Binary).collect();
        for v in model.vars() {
            if v.kind == VarKind::Continuous && !v.lower.is_finite() {
                return Err(BackendError::Unsupported(format!(
                    "continuous variable {} needs a finite lower bound",
                    v.name
                )));
            }
        }
        let objective: Vec<(usize, f64)> = model.objective().iter().map(|&(v, a)| (v.0, a)).collect();
        if let Some(&(v, _)) = objective.iter().find(|&&(v, a)| !is_bin[v] && a < 0.0) {
            return Err(BackendError::Unsupported(format!(
                "negative objective coefficient on continuous variable {}",
                model.var(crate::model::VarId(v)).name
            )));
        }
        let mut weight = vec![0.0; n];
        for &(v, a) in &objective {
            if is_bin[v] {
                weight[v] += a;
            }
        }
        for row in model.all_rows() {
            check_structure(row, &is_bin)?;
            for &(u, au) in &row.terms {
                let obj_u: f64 = objective.iter().filter(|t| t.0 == u.0).map(|t| t.1).sum();
                if is_bin[u.0] || obj_u <= 0.0 {
                    continue;
                }
                for &(v, av) in &row.terms {
                    if is_bin[v.0] {
                        weight[v.0] += av.abs() * obj_u / au.abs();
                    }
                }
            }
        }
        let mut s = Search {
            n,
            is_bin,
            lb0: model.vars().iter().map(|v| v.lower).collect(),
            ub0: model.vars().iter().map(|v| v.upper).collect(),
            objective: objective.clone(),
            ineqs: Vec::new(),
            var_ineqs: vec![Vec::new(); n],
            rows: model.rows().to_vec(),
            partitions: Vec::new(),
            part_of_var: vec![Vec::new(); n],
            weight,
            rule,
            cutoff: f64::INFINITY,
            cutoff_epoch: 0,
            cutoff_row: 0,
            best_values: None,
            best_objective: None,
            nodes: 0,
            error: None,
        };
        s.cutoff_row = s.ineqs.len();
        s.push_ineq(objective, f64::INFINITY);
        for row in model.all_rows() {
            s.add_row(row);
        }
        Ok(s)
    }

    fn push_ineq(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        let id = self.ineqs.len();
        for &(v, _) in &terms {
            self.var_ineqs[v].push(id);
        }
        self.ineqs.push(Ineq { terms, rhs, families: Vec::new() });
    }

    fn add_row(&mut self, row: &Row) {
        let terms: Vec<(usize, f64)> = row.terms.iter().map(|&(v, a)| (v.0, a)).collect();
        let neg: Vec<(usize, f64)> = terms.iter().map(|&(v, a)| (v, -a)).collect();
        let first = self.ineqs.len();
        match row.sense {
            Sense::Le => self.push_ineq(terms, row.rhs),
            Sense::Ge => self.push_ineq(neg, -row.rhs),
            Sense::Eq => {
                self.push_ineq(terms, row.rhs);
                self.push_ineq(neg, -row.rhs);
            }
        }
        if !self.partitions.is_empty() {
            for i in first..self.ineqs.len() {
                self.ineqs[i].families = self.families_for(i);
            }
        }
    }

    /// Set-partitioning rows among the given rows, plus the sides of flow
    /// balances whose other side is one. Variables fixed to 0 are ignored.
    fn detect_partitions(&mut self, rows: &[Row], ub: &[f64]) {
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let live = |v: usize| ub[v] > 0.5;
        for row in rows {
            let all_unit = row.terms.iter().all(|&(v, a)| self.is_bin[v.0] && a == 1.0);
            if row.sense == Sense::Eq && row.rhs == 1.0 && all_unit {
                let members: Vec<usize> = row.terms.iter().map(|t| t.0 .0).filter(|&v| live(v)).collect();
                if members.len() >= 2 && !index.contains_key(&members) {
                    index.insert(members.clone(), found.len());
                    found.push(members);
                }
            }
        }
        for row in rows {
            let balance = row.sense == Sense::Eq
                && row.rhs == 0.0
                && row.terms.iter().all(|&(v, a)| self.is_bin[v.0] && a.abs() == 1.0);
            if !balance {
                continue;
            }
            let side = |s: f64| -> Vec<usize> {
                row.terms.iter().filter(|t| t.1 == s && live(t.0 .0)).map(|t| t.0 .0).collect()
            };
            let (plus, minus) = (side(1.0), side(-1.0));
            for (known, implied) in [(&plus, &minus), (&minus, &plus)] {
                if index.contains_key(known) && implied.len() >= 2 && !index.contains_key(implied) {
                    index.insert(implied.clone(), found.len());
                    found.push(implied.clone());
                }
            }
        }
        for (p, members) in found.iter().enumerate() {
            for &v in members {
                self.part_of_var[v].push(p);
            }
        }
        self.partitions = found;
        for i in 0..self.ineqs.len() {
            self.ineqs[i].families = self.families_for(i);
        }
    }

    /// Up to two greedy families of disjoint partitions (declaration order
    /// and reverse order), each partition holding at least two of the
    /// row's binaries.
    fn families_for(&self, i: usize) -> Vec<Family> {
        let ineq = &self.ineqs[i];
        let coef: HashMap<usize, f64> = ineq.terms.iter().map(|&(v, a)| (v, a)).collect();
        let mut candidates: Vec<usize> = Vec::new();
        for &(v, _) in &ineq.terms {
            for &p in &self.part_of_var[v] {
                if !candidates.contains(&p) {
                    let hits = self.partitions[p].iter().filter(|m| coef.contains_key(m)).count();
                    if hits >= 2 {
                        candidates.push(p);
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Vec::new();
        }
        candidates.sort_unstable();
        let mut fams: Vec<Family> = Vec::new();
        let mut orders = vec![candidates.clone()];
        if candidates.len() > 1 {
            orders.push(candidates.iter().rev().copied().collect());
        }
        for order in orders {
            let mut taken: Vec<bool> = vec![false; self.n];
            let mut chosen = Vec::new();
            for p in order {
                if self.partitions[p].iter().all(|&m| !taken[m]) {
                    for &m in &self.partitions[p] {
                        taken[m] = true;
                    }
                    chosen.push(p);
                }
            }
            chosen.sort_unstable();
            if fams.iter().any(|f| f.parts.len() == chosen.len() && same_parts(f, &chosen, &self.partitions)) {
                continue;
            }
            let parts: Vec<Vec<(usize, f64)>> = chosen
                .iter()
                .map(|&p| self.partitions[p].iter().map(|&m| (m, *coef.get(&m).unwrap_or(&0.0))).collect())
                .collect();
            let slot = ineq
                .terms
                .iter()
                .map(|&(v, _)| parts.iter().position(|part| part.iter().any(|&(m, _)| m == v)))
                .collect();
            fams.push(Family { parts, slot });
        }
        fams
    }

    fn record(&mut self, value: f64) {
        self.set_cutoff(value);
        if self.best_objective.is_none_or(|b| value < b) {
            self.best_objective = Some(value);
        }
    }

    fn set_cutoff(&mut self, value: f64) {
        if value < self.cutoff {
            self.cutoff = value;
            self.cutoff_epoch += 1;
            self.ineqs[self.cutoff_row].rhs = value - cutoff_eps(value) - prop_tol(value);
        }
    }

    /// Propagates bounds from the queued rows. Returns false on proven
    /// infeasibility.
    fn propagate(&self, lb: &mut [f64], ub: &mut [f64], queue: &mut VecDeque<usize>, queued: &mut [bool]) -> bool {
        let mut budget = 40 * self.ineqs.len() + 1000;
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            if budget == 0 {
                queue.clear();
                break;
            }
            budget -= 1;
            let mut changed: Vec<usize> = Vec::new();
            if !self.propagate_ineq(i, lb, ub, &mut changed) {
                queue.clear();
                return false;
            }
            for v in changed {
                for &j in &self.var_ineqs[v] {
                    if j != i && !queued[j] {
                        queued[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        queued.iter_mut().for_each(|q| *q = false);
        true
    }

    fn propagate_ineq(&self, i: usize, lb: &mut [f64], ub: &mut [f64], changed: &mut Vec<usize>) -> bool {
        let ineq = &self.ineqs[i];
        if ineq.rhs == f64::INFINITY {
            return true;
        }
        let mut std_act = 0.0;
        let mut ninf = 0usize;
        let mut inf_term = usize::MAX;
        for (k, &(v, a)) in ineq.terms.iter().enumerate() {
            let c = std_contrib(a, lb[v], ub[v]);
            if c.is_finite() {
                std_act += c;
            } else {
                ninf += 1;
                inf_term = k;
            }
        }
        let evals: Vec<Vec<PartEval>> = ineq
            .families
            .iter()
            .map(|f| f.parts.iter().map(|p| eval_part(p, lb, ub)).collect())
            .collect();
        let fam_act: Vec<f64> = evals
            .iter()
            .map(|ev| std_act + ev.iter().map(|e| e.contribution() - e.std_sum).sum::<f64>())
            .collect();
        let min_act = fam_act.iter().copied().fold(std_act, f64::max);
        let tol = prop_tol(ineq.rhs);
        if ninf == 0 && min_act > ineq.rhs + tol {
            return false;
        }
        if ninf >= 2 {
            return true;
        }
        for (k, &(v, a)) in ineq.terms.iter().enumerate() {
            if lb[v] == ub[v] {
                continue;
            }
            if self.is_bin[v] {
                if ninf > 0 {
                    continue;
                }
                let own = std_contrib(a, lb[v], ub[v]);
                for val in [0.0, 1.0] {
                    let mut act = std_act - own + a * val;
                    for (f, fam) in ineq.families.iter().enumerate() {
                        let alt = match fam.slot[k] {
                            Some(p) if !evals[f][p].fixed_one => {
                                let e = &evals[f][p];
                                let with = if val == 1.0 {
                                    a
                                } else if e.arg1 == v {
                                    e.min2
                                } else {
                                    e.min1
                                };
                                fam_act[f] - e.contribution() + with
                            }
                            _ => fam_act[f] - own + a * val,
                        };
                        act = act.max(alt);
                    }
                    if act > ineq.rhs + tol {
                        // the other value is forced
                        if val == 1.0 {
                            ub[v] = 0.0;
                        } else {
                            lb[v] = 1.0;
                        }
                        changed.push(v);
                        break;
                    }
                }
            } else {
                let own = std_contrib(a, lb[v], ub[v]);
                let residual = if ninf == 0 {
                    min_act - own
                } else if inf_term == k {
                    min_act
                } else {
                    continue;
                };
                let limit = (ineq.rhs - residual) / a;
                if a > 0.0 {
                    if limit < ub[v] - 1e-9 * (1.0 + limit.abs()) {
                        ub[v] = limit;
                        changed.push(v);
                    }
                } else if limit > lb[v] + 1e-9 * (1.0 + limit.abs()) {
                    lb[v] = limit;
                    changed.push(v);
                }
                if lb[v] > ub[v] + 1e-7 * (1.0 + ub[v].abs()) {
                    return false;
                }
            }
            if lb[v] > ub[v] {
                if self.is_bin[v] {
                    return false;
                }
                // within tolerance: collapse
                ub[v] = lb[v];
            }
        }
        true
    }

    fn bound_of(&self, lb: &[f64], ub: &[f64]) -> f64 {
        let ineq = &self.ineqs[self.cutoff_row];
        let base: f64 = self.objective.iter().map(|&(v, a)| std_contrib(a, lb[v], ub[v])).sum();
        let mut act = base;
        for fam in &ineq.families {
            let mut f = base;
            for p in &fam.parts {
                let e = eval_part(p, lb, ub);
                f += e.contribution() - e.std_sum;
            }
            act = act.max(f);
        }
        act
    }

    /// Least solution of the continuous part once every binary is fixed.
    fn solve_leaf(&self, lb: &[f64], ub: &[f64]) -> Leaf {
        let mut x: Vec<f64> = (0..self.n).map(|v| if self.is_bin[v] { lb[v].round() } else { lb[v] }).collect();
        let mut hi: Vec<f64> = ub.to_vec();
        // edges u -> w with weight d: x[w] >= x[u] + d
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        for (i, ineq) in self.ineqs.iter().enumerate() {
            if i == self.cutoff_row || ineq.rhs == f64::INFINITY {
                continue;
            }
            let mut fixed = 0.0;
            let mut cont: Vec<(usize, f64)> = Vec::new();
            for &(v, a) in &ineq.terms {
                if self.is_bin[v] {
                    fixed += a * x[v];
                } else {
                    cont.push((v, a));
                }
            }
            let r = ineq.rhs - fixed;
            match cont.as_slice() {
                [] => {
                    if r < -FEAS_TOL {
                        return Leaf::Infeasible;
                    }
                }
                &[(v, a)] => {
                    if a > 0.0 {
                        hi[v] = hi[v].min(r / a);
                    } else {
                        x[v] = x[v].max(r / a);
                    }
                }
                &[(u, a), (w, _)] => {
                    // a * (x_u - x_w) <= r
                    if a > 0.0 {
                        out[u].push((w, -r / a));
                    } else {
                        out[w].push((u, r / a));
                    }
                }
                _ => unreachable!("structure checked on entry"),
            }
        }
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| !self.is_bin[v]).collect();
        let mut queued = vec![false; self.n];
        for &v in &queue {
            queued[v] = true;
        }
        let mut relax_count = vec![0usize; self.n];
        let n_cont = queue.len();
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            if x[u] > hi[u] + FEAS_TOL {
                return Leaf::Infeasible;
            }
            for &(w, d) in &out[u] {
                let t = x[u] + d;
                if t > x[w] + 1e-12 * (1.0 + t.abs()) {
                    x[w] = t;
                    relax_count[w] += 1;
                    if relax_count[w] > n_cont + 1 || x[w] > hi[w] + FEAS_TOL {
                        return Leaf::Infeasible;
                    }
                    if !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        if (0..self.n).any(|v| x[v] > hi[v] + FEAS_TOL) {
            return Leaf::Infeasible;
        }
        for (i, ineq) in self.ineqs.iter().enumerate() {
            if i == self.cutoff_row || ineq.rhs == f64::INFINITY {
                continue;
            }
            let act: f64 = ineq.terms.iter().map(|&(v, a)| a * x[v]).sum();
            if act > ineq.rhs + FEAS_TOL * (1.0 + ineq.rhs.abs()) {
                return Leaf::Infeasible;
            }
        }
        let obj = self.objective.iter().map(|&(v, a)| a * x[v]).sum();
        Leaf::Point(x, obj)
    }

    fn pick_branch(&self, lb: &[f64], ub: &[f64]) -> Option<(usize, f64)> {
        let free = |v: usize| self.is_bin[v] && lb[v] < 0.5 && ub[v] > 0.5;
        if self.rule == BranchRule::Guided {
            let mut best: Option<(usize, usize)> = None;
            for (p, members) in self.partitions.iter().enumerate() {
                if members.iter().any(|&m| lb[m] > 0.5) {
                    continue;
                }
                let nfree = members.iter().filter(|&&m| free(m)).count();
                if nfree >= 1 && best.is_none_or(|(_, c)| nfree < c) {
                    best = Some((p, nfree));
                }
            }
            if let Some((p, _)) = best {
                let v = self.partitions[p]
                    .iter()
                    .copied()
                    .filter(|&m| free(m))
                    .min_by(|&a, &b| self.weight[a].total_cmp(&self.weight[b]).then(a.cmp(&b)))
                    .expect("open partition has a free member");
                return Some((v, 1.0));
            }
        }
        (0..self.n).find(|&v| free(v)).map(|v| (v, 0.0))
    }

    fn evaluate_leaf(
        &mut self,
        lb: &[f64],
        ub: &[f64],
        hook: &mut Option<&mut dyn IntegerHook>,
    ) -> bool {
        let Leaf::Point(x, obj) = self.solve_leaf(lb, ub) else { return false };
        if obj >= self.cutoff - cutoff_eps(self.cutoff) {
            return false;
        }
        let response = match hook.as_mut() {
            Some(h) => h.on_integer(&x, obj),
            None => HookResponse::default(),
        };
        let reprocess = !response.lazy_rows.is_empty();
        for row in &response.lazy_rows {
            if let Err(e) = check_structure(row, &self.is_bin) {
                self.error.get_or_insert(e);
                return false;
            }
            self.add_row(row);
        }
        if let Some(ub) = response.upper_bound {
            self.record(ub);
        }
        if !reprocess {
            self.record(obj);
            self.best_values = Some(x);
        }
        reprocess
    }

    fn run(
        &mut self,
        limits: &Limits,
        node_limit: Option<u64>,
        warm_start: Option<&[f64]>,
        mut hook: Option<&mut dyn IntegerHook>,
    ) -> SolveResult {
        let start = Instant::now();
        let mut lb = self.lb0.clone();
        let mut ub = self.ub0.clone();
        let mut queued = vec![false; self.ineqs.len()];
        let mut queue: VecDeque<usize> = (0..self.ineqs.len()).collect();
        let root_ok = self.propagate(&mut lb, &mut ub, &mut queue, &mut queued);
        if !root_ok {
            return self.finish(SolveStatus::Infeasible, f64::INFINITY);
        }
        // Partition structure is read off the root-propagated model.
        self.detect_partitions_from_bounds(&ub);
        let mut queue: VecDeque<usize> = (0..self.ineqs.len()).collect();
        let mut queued = vec![false; self.ineqs.len()];
        if !self.propagate(&mut lb, &mut ub, &mut queue, &mut queued) {
            return self.finish(SolveStatus::Infeasible, f64::INFINITY);
        }

        if let Some(ws) = warm_start {
            self.try_warm_start(ws, &lb, &ub, &mut hook);
        }

        let root_bound = self.bound_of(&lb, &ub);
        let mut stack = vec![Node {
            lb,
            ub,
            bound: root_bound,
            changed: None,
            n_ineqs: self.ineqs.len(),
            cutoff_epoch: self.cutoff_epoch,
        }];
        let mut stopped = false;
        while let Some(mut node) = stack.pop() {
            if node.bound >= self.cutoff - cutoff_eps(self.cutoff) {
                continue;
            }
            self.nodes += 1;
            if self.error.is_some() {
                break;
            }
            let capped = node_limit.is_some_and(|n| self.nodes > n);
            if capped || self.nodes % 128 == 0 {
                let timed_out = limits.time.is_some_and(|t| start.elapsed() >= t);
                let gap_met = limits.gap > 0.0 && self.cutoff.is_finite() && {
                    let lbound = stack.iter().map(|n| n.bound).fold(node.bound, f64::min);
                    (self.cutoff - lbound) / self.cutoff.abs().max(1e-12) <= limits.gap
                };
                if timed_out || capped || gap_met {
                    stack.push(node);
                    stopped = !gap_met;
                    if gap_met {
                        let lbound = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
                        return self.finish(SolveStatus::Optimal, lbound.min(self.cutoff));
                    }
                    break;
                }
            }
            // re-propagate what changed since the node was created
            let mut queued = vec![false; self.ineqs.len()];
            let mut queue = VecDeque::new();
            if let Some(v) = node.changed {
                for &j in &self.var_ineqs[v] {
                    if !queued[j] {
                        queued[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            if node.cutoff_epoch != self.cutoff_epoch && !queued[self.cutoff_row] {
                queued[self.cutoff_row] = true;
                queue.push_back(self.cutoff_row);
            }
            for j in node.n_ineqs..self.ineqs.len() {
                if !queued[j] {
                    queued[j] = true;
                    queue.push_back(j);
                }
            }
            if !self.propagate(&mut node.lb, &mut node.ub, &mut queue, &mut queued) {
                continue;
            }
            let bound = self.bound_of(&node.lb, &node.ub);
            if bound >= self.cutoff - cutoff_eps(self.cutoff) {
                continue;
            }
            match self.pick_branch(&node.lb, &node.ub) {
                None => {
                    if self.evaluate_leaf(&node.lb, &node.ub, &mut hook) {
                        stack.push(Node {
                            bound,
                            changed: None,
                            n_ineqs: node.n_ineqs,
                            cutoff_epoch: node.cutoff_epoch,
                            ..node
                        });
                    }
                }
                Some((v, first)) => {
                    let epoch = self.cutoff_epoch;
                    let n_ineqs = self.ineqs.len();
                    let mut other = Node {
                        lb: node.lb.clone(),
                        ub: node.ub.clone(),
                        bound,
                        changed: Some(v),
                        n_ineqs,
                        cutoff_epoch: epoch,
                    };
                    let second = 1.0 - first;
                    other.lb[v] = second;
                    other.ub[v] = second;
                    stack.push(other);
                    node.lb[v] = first;
                    node.ub[v] = first;
                    stack.push(Node { bound, changed: Some(v), n_ineqs, cutoff_epoch: epoch, ..node });
                }
            }
        }
        if stopped {
            let lbound = stack.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min).min(self.cutoff);
            let status = if self.best_objective.is_some() { SolveStatus::Feasible } else { SolveStatus::Limit };
            return self.finish(status, lbound);
        }
        if self.best_objective.is_some() {
            let c = self.cutoff;
            self.finish(SolveStatus::Optimal, c)
        } else {
            self.finish(SolveStatus::Infeasible, f64::INFINITY)
        }
    }

    fn detect_partitions_from_bounds(&mut self, ub: &[f64]) {
        let rows = std::mem::take(&mut self.rows);
        self.detect_partitions(&rows, ub);
        self.rows = rows;
    }

    fn try_warm_start(&mut self, ws: &[f64], lb: &[f64], ub: &[f64], hook: &mut Option<&mut dyn IntegerHook>) {
        if ws.len() != self.n {
            return;
        }
        let mut wl = lb.to_vec();
        let mut wu = ub.to_vec();
        for v in 0..self.n {
            if self.is_bin[v] {
                let val = ws[v].round();
                if val < wl[v] || val > wu[v] {
                    return;
                }
                wl[v] = val;
                wu[v] = val;
            }
        }
        let mut queue: VecDeque<usize> = (0..self.ineqs.len()).collect();
        let mut queued = vec![true; self.ineqs.len()];
        if !self.propagate(&mut wl, &mut wu, &mut queue, &mut queued) {
            return;
        }
        // a rejected point gets one more try after its lazy rows
        for _ in 0..2 {
            if !self.evaluate_leaf(&wl, &wu, hook) {
                break;
            }
        }
    }

    fn finish(&mut self, status: SolveStatus, bound: f64) -> SolveResult {
        SolveResult {
            status,
            objective: self.best_objective,
            bound,
            values: self.best_values.clone(),
            nodes: self.nodes,
        }
    }
}

fn same_parts(f: &Family, chosen: &[usize], partitions: &[Vec<usize>]) -> bool {
    f.parts.iter().zip(chosen).all(|(part, &p)| part.iter().map(|m| m.0).eq(partitions[p].iter().copied()))
}

/// The continuous part of a row must be empty, a single variable, or a
/// difference `a * (u - w)`.
fn check_structure(row: &Row, is_bin: &[bool]) -> Result<(), BackendError> {
    let cont: Vec<f64> = row.terms.iter().filter(|t| !is_bin[t.0 .0]).map(|t| t.1).collect();
    let ok = match cont.as_slice() {
        [] | [_] => true,
        [a, b] => (a + b).abs() <= 1e-12 * a.abs().max(b.abs()),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(BackendError::Unsupported(format!(
            "row {} has a continuous part that is not a bound or a difference",
            row.name
        )))
    }
}
