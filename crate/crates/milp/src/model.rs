use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// A linear row `sum(coef * var) sense rhs`. Repeated variables are merged
/// and zero coefficients dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Row {
        Row { name: name.into(), terms: merge_terms(terms), sense, rhs }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

fn merge_terms(mut terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, a) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += a,
            _ => out.push((v, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate name {0:?}")]
    NameCollision(String),
    #[error("row {row:?} references unknown variable {var}")]
    UnknownVariable { row: String, var: usize },
    #[error("variable {0:?} has invalid bounds")]
    BadBounds(String),
}

/// Minimization model over binary and continuous variables. Rows added
/// through [`MilpModel::add_lazy_row`] are kept in a separate registry but
/// are constraints like any other.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    vars: Vec<Var>,
    rows: Vec<Row>,
    lazy: Vec<Row>,
    objective: Vec<(VarId, f64)>,
    by_name: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> MilpModel {
        MilpModel { name: name.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> VarId {
        let id = VarId(self.vars.len());
        let name = name.into();
        self.by_name.entry(name.clone()).or_insert(id);
        self.vars.push(Var { name, lower, upper, kind });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous)
    }

    pub fn add_row(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn add_lazy_row(&mut self, row: Row) {
        self.lazy.push(row);
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>) {
        self.objective = merge_terms(terms);
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Var {
        &self.vars[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn lazy_rows(&self) -> &[Row] {
        &self.lazy
    }

    /// Regular rows followed by lazy rows.
    pub fn all_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().chain(self.lazy.iter())
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len() + self.lazy.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Checks names, bounds and row references.
    pub fn check(&self) -> Result<(), ModelError> {
        let mut seen = HashMap::new();
        for v in &self.vars {
            if seen.insert(v.name.as_str(), ()).is_some() {
                return Err(ModelError::NameCollision(v.name.clone()));
            }
            let bad = v.lower.is_nan()
                || v.upper.is_nan()
                || v.lower > v.upper
                || (v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0));
            if bad {
                return Err(ModelError::BadBounds(v.name.clone()));
            }
        }
        let mut row_names = HashMap::new();
        for r in self.all_rows() {
            if row_names.insert(r.name.as_str(), ()).is_some() {
                return Err(ModelError::NameCollision(r.name.clone()));
            }
            if let Some(&(v, _)) = r.terms.iter().find(|t| t.0 .0 >= self.vars.len()) {
                return Err(ModelError::UnknownVariable { row: r.name.clone(), var: v.0 });
            }
        }
        Ok(())
    }

    /// Rows (regular and lazy) violated by more than `tol`, plus variables
    /// outside their bounds or off integrality.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, &x) in self.vars.iter().zip(values) {
            if x < v.lower - tol || x > v.upper + tol {
                out.push(format!("{} = {x} outside [{}, {}]", v.name, v.lower, v.upper));
            }
            if v.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                out.push(format!("{} = {x} is fractional", v.name));
            }
        }
        for r in self.all_rows() {
            let viol = r.violation(values);
            if viol > tol {
                out.push(format!("{} violated by {viol}", r.name));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_are_merged() {
        let r = Row::new("r", vec![(VarId(2), 1.0), (VarId(0), 3.0), (VarId(2), -1.0)], Sense::Le, 1.0);
        assert_eq!(r.terms, vec![(VarId(0), 3.0)]);
    }

    #[test]
    fn duplicate_names_are_caught() {
        let mut m = MilpModel::new("m");
        m.add_binary("x");
        m.add_binary("x");
        assert_eq!(m.check(), Err(ModelError::NameCollision("x".into())));
    }
}
