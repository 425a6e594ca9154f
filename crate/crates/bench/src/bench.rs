//! Multi-restart comparison of the search methods over a suite of
//! instances, reported per (instance, method) as best and average upper
//! bound and average time per restart.

use std::io::Write;
use std::path::{Path, PathBuf};

use pdpt_core::{load_instance, Instance};
use pdpt_lns::{run_search, Method, SearchConfig, SearchError};
use rayon::prelude::*;
use serde::Deserialize;

#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub name: String,
    pub tw: String,
    pub variant: usize,
    pub instance: Instance,
}

#[derive(Debug, Clone)]
pub struct BenchmarkSuite {
    pub instances: Vec<SuiteInstance>,
    pub methods: Vec<SearchConfig>,
    /// Restarts per (instance, method); overrides the method configs.
    pub restarts: usize,
    /// Instance `i` is searched with seed `seed + i` by every method.
    pub seed: u64,
}

/// Width class read from a `_S_`, `_M_` or `_L_` token of the name.
fn tw_from_name(name: &str) -> String {
    name.split('_').find(|t| matches!(*t, "S" | "M" | "L")).unwrap_or("-").to_string()
}

impl BenchmarkSuite {
    /// The three methods with their default settings. Width classes come
    /// from the instance names; variants count instances per request count
    /// and class in suite order.
    pub fn new(instances: Vec<Instance>, restarts: usize, seed: u64) -> BenchmarkSuite {
        let methods = [Method::Rlns, Method::Ls, Method::Multiop].into_iter().map(SearchConfig::for_method).collect();
        BenchmarkSuite { instances: label(instances.into_iter().map(|i| (i, None, None)).collect()), methods, restarts, seed }
    }

    /// Reads a TOML suite file. Instance paths are relative to the file.
    pub fn load(path: &Path) -> Result<BenchmarkSuite, SuiteError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            path: PathBuf,
            tw: Option<String>,
            variant: Option<usize>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            #[serde(default)]
            seed: u64,
            #[serde(default = "default_restarts")]
            restarts: usize,
            instance: Vec<Entry>,
            #[serde(default)]
            method: Vec<SearchConfig>,
        }
        fn default_restarts() -> usize {
            10
        }
        let text = std::fs::read_to_string(path)?;
        let file: File = toml::from_str(&text).map_err(|e| SuiteError::Parse(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries = Vec::new();
        for e in file.instance {
            let inst = load_instance(base.join(&e.path)).map_err(|err| SuiteError::Instance(e.path.clone(), err.to_string()))?;
            entries.push((inst, e.tw, e.variant));
        }
        let mut suite = BenchmarkSuite::new(Vec::new(), file.restarts, file.seed);
        suite.instances = label(entries);
        if !file.method.is_empty() {
            suite.methods = file.method;
        }
        Ok(suite)
    }
}

fn label(entries: Vec<(Instance, Option<String>, Option<usize>)>) -> Vec<SuiteInstance> {
    let mut seen: Vec<(usize, String)> = Vec::new();
    entries
        .into_iter()
        .map(|(instance, tw, variant)| {
            let name = instance.meta.name.clone();
            let tw = tw.unwrap_or_else(|| tw_from_name(&name));
            seen.push((instance.requests.len(), tw.clone()));
            let count = seen.iter().filter(|s| s.0 == instance.requests.len() && s.1 == tw).count();
            SuiteInstance { name, tw, variant: variant.unwrap_or(count), instance }
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot parse suite file: {0}")]
    Parse(String),
    #[error("cannot load instance {0:?}: {1}")]
    Instance(PathBuf, String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub instance: String,
    pub requests: usize,
    pub tw: String,
    pub variant: usize,
    pub method: Method,
    /// None when no restart constructed a solution.
    pub best_ub: Option<f64>,
    pub avg_ub: Option<f64>,
    pub avg_time_s: f64,
    pub restarts: usize,
    /// Restarts without a starting solution.
    pub failed_restarts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

pub const CSV_HEADER: [&str; 7] = ["instance", "tw", "variant", "method", "best_ub", "avg_ub", "avg_time_s"];

impl BenchmarkReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.instance.clone(),
                row.tw.clone(),
                row.variant.to_string(),
                row.method.to_string(),
                opt(row.best_ub),
                opt(row.avg_ub),
                format!("{:.4}", row.avg_time_s),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Mean best upper bound of `method` over the rows where it found one.
    pub fn mean_best(&self, method: Method) -> Option<f64> {
        let best: Vec<f64> = self.rows.iter().filter(|r| r.method == method).filter_map(|r| r.best_ub).collect();
        (!best.is_empty()).then(|| best.iter().sum::<f64>() / best.len() as f64)
    }
}

/// Every (instance, method) pair in parallel; rows come back in suite
/// order, instances outermost.
pub fn run_benchmark(suite: &BenchmarkSuite) -> Result<BenchmarkReport, SuiteError> {
    let pairs: Vec<(usize, &SearchConfig)> =
        (0..suite.instances.len()).flat_map(|i| suite.methods.iter().map(move |m| (i, m))).collect();
    let rows = pairs
        .into_par_iter()
        .map(|(i, method)| {
            let entry = &suite.instances[i];
            let config = SearchConfig { restarts: suite.restarts, seed: suite.seed.wrapping_add(i as u64), ..method.clone() };
            let mut row = BenchmarkRow {
                instance: entry.name.clone(),
                requests: entry.instance.requests.len(),
                tw: entry.tw.clone(),
                variant: entry.variant,
                method: config.method,
                best_ub: None,
                avg_ub: None,
                avg_time_s: 0.0,
                restarts: suite.restarts,
                failed_restarts: suite.restarts,
            };
            match run_search(&entry.instance, &config) {
                Ok(report) => {
                    row.best_ub = Some(report.best_cost());
                    row.avg_ub = Some(report.avg_cost());
                    row.avg_time_s = report.avg_time();
                    row.failed_restarts = suite.restarts - report.restarts.len();
                }
                Err(SearchError::NoInitialSolution) => {}
                Err(e) => return Err(SuiteError::Search(e)),
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchmarkReport { rows })
}
