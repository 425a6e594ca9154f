use std::path::PathBuf;
use std::process::Command;

use crate::backend::{
    require, Backend, BackendError, Capabilities, IntegerHook, Limits, SolveResult, SolveStatus,
};
use crate::export::{export_model, ModelFormat};
use crate::model::MilpModel;

/// Hands the model to an outside solver through files: the model is
/// exported to `<workdir>/model.lp` (or `.mps`), `command` is run with
/// `{model}` and `{solution}` substituted in its arguments, and the
/// assignment file it leaves behind (`varname value` per line) is read
/// back. A missing assignment file means the solver found no solution.
#[derive(Debug, Clone)]
pub struct ExternalFileBackend {
    pub command: Vec<String>,
    pub workdir: PathBuf,
    pub format: ModelFormat,
}

impl ExternalFileBackend {
    pub fn new(command: Vec<String>, workdir: impl Into<PathBuf>) -> Self {
        ExternalFileBackend { command, workdir: workdir.into(), format: ModelFormat::Lp }
    }
}

/// Reads `varname value` lines. Unlisted variables take their lower bound
/// (0 for binaries); blank lines and `#` comments are skipped.
pub fn parse_assignment(model: &MilpModel, text: &str) -> Result<Vec<f64>, BackendError> {
    let mut values: Vec<f64> = model.vars().iter().map(|v| v.lower.max(0.0).min(v.upper)).collect();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(BackendError::External(format!("line {}: expected `name value`", n + 1)));
        };
        let id = model
            .var_by_name(name)
            .ok_or_else(|| BackendError::External(format!("line {}: unknown variable {name}", n + 1)))?;
        values[id.0] = value
            .parse()
            .map_err(|_| BackendError::External(format!("line {}: bad value {value:?}", n + 1)))?;
    }
    Ok(values)
}

impl Backend for ExternalFileBackend {
    fn name(&self) -> &str {
        "external-file"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { supports_callbacks: false, supports_warm_start: false }
    }

    fn solve(
        &self,
        model: &MilpModel,
        _limits: &Limits,
        warm_start: Option<&[f64]>,
        hook: Option<&mut dyn IntegerHook>,
    ) -> Result<SolveResult, BackendError> {
        require(self, warm_start.is_some(), hook.is_some())?;
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| BackendError::External("no solver command configured".into()))?;
        std::fs::create_dir_all(&self.workdir)?;
        let ext = match self.format {
            ModelFormat::Lp => "lp",
            ModelFormat::Mps => "mps",
        };
        let model_path = self.workdir.join(format!("model.{ext}"));
        let solution_path = self.workdir.join("solution.txt");
        if solution_path.exists() {
            std::fs::remove_file(&solution_path)?;
        }
        export_model(model, self.format, &model_path).map_err(|e| BackendError::External(e.to_string()))?;
        let substitute = |a: &String| {
            a.replace("{model}", &model_path.to_string_lossy())
                .replace("{solution}", &solution_path.to_string_lossy())
        };
        let status = Command::new(program).args(args.iter().map(substitute)).status()?;
        if !status.success() {
            return Err(BackendError::External(format!("{program} exited with {status}")));
        }
        if !solution_path.exists() {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                objective: None,
                bound: f64::INFINITY,
                values: None,
                nodes: 0,
            });
        }
        let values = parse_assignment(model, &std::fs::read_to_string(&solution_path)?)?;
        let broken = model.violations(&values, 1e-6);
        if let Some(first) = broken.first() {
            return Err(BackendError::External(format!("returned assignment is infeasible: {first}")));
        }
        let objective = model.objective_value(&values);
        Ok(SolveResult {
            status: SolveStatus::Optimal,
            objective: Some(objective),
            bound: objective,
            values: Some(values),
            nodes: 0,
        })
    }
}
