//! Manifest-driven grid runs.
//!
//! ```json
//! {
//!   "instances": ["a.json", "b.json"],
//!   "algorithms": ["ff", {"algo": "off17", "epsilon": "1/4"}],
//!   "oracle": true
//! }
//! ```
//!
//! Instance paths are relative to the manifest. Rows come out instance-major
//! in manifest order.

use std::fs;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;
use serde::Deserialize;

use locpack::io::{read_instance, solve_cached, write_report, OracleCache, ReportRow};
use locpack::oracle::OracleConfig;
use locpack::{run_algorithm, validate_packing, Algorithm, Error, Instance, OracleResult, Rational, RunParams};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub instances: Vec<String>,
    pub algorithms: Vec<AlgoSpec>,
    #[serde(default = "enabled")]
    pub oracle: bool,
    #[serde(default)]
    pub oracle_limit: Option<usize>,
}

fn enabled() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AlgoSpec {
    Name(String),
    Full {
        algo: String,
        #[serde(default)]
        epsilon: Option<Rational>,
        #[serde(default)]
        beta: Option<Rational>,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        budget: Option<u64>,
    },
}

impl AlgoSpec {
    fn name(&self) -> &str {
        match self {
            AlgoSpec::Name(n) | AlgoSpec::Full { algo: n, .. } => n,
        }
    }

    fn describe(&self) -> String {
        match self {
            AlgoSpec::Name(_) => String::new(),
            AlgoSpec::Full { epsilon, beta, k, budget, .. } => {
                let mut parts = Vec::new();
                if let Some(e) = epsilon {
                    parts.push(format!("eps={e}"));
                }
                if let Some(b) = beta {
                    parts.push(format!("beta={b}"));
                }
                if let Some(k) = k {
                    parts.push(format!("k={k}"));
                }
                if let Some(b) = budget {
                    parts.push(format!("budget={b}"));
                }
                parts.join(" ")
            }
        }
    }

    fn params(&self) -> RunParams {
        let mut p = RunParams::default();
        if let AlgoSpec::Full { epsilon, beta, k, budget, .. } = self {
            p.epsilon = *epsilon;
            p.beta = *beta;
            p.k = k.unwrap_or(p.k);
            p.budget = *budget;
        }
        p
    }
}

fn run_cell(name: &str, instance: &Instance, oracle: Option<&OracleResult>, spec: &AlgoSpec) -> ReportRow {
    let fail = |e: &Error| ReportRow::failed(name, spec.name(), &spec.describe(), e);
    let algo: Algorithm = match spec.name().parse() {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let out = match run_algorithm(algo, instance, &spec.params()) {
        Ok(out) => out,
        Err(e) => return fail(&e),
    };
    let report = validate_packing(&out.packing, instance);
    if !report.is_valid() {
        return fail(&Error::InvalidParameter(format!("invalid packing: {report}")));
    }
    ReportRow::measured(name, &out.packing, instance, oracle).unwrap_or_else(|e| fail(&e))
}

pub fn run_manifest(manifest: &Manifest, base: &Path, cache: Option<&OracleCache>) -> anyhow::Result<Vec<ReportRow>> {
    let instances = manifest
        .instances
        .iter()
        .map(|name| {
            let path = base.join(name);
            read_instance(&path)
                .map(|(inst, _)| inst)
                .with_context(|| format!("reading {}", path.display()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut config = OracleConfig::default();
    if let Some(limit) = manifest.oracle_limit {
        config.limit_n = limit;
    }
    // Instances past the oracle limit fall back to the weight lower bound.
    let oracles: Vec<Option<OracleResult>> = instances
        .par_iter()
        .map(|inst| {
            if !manifest.oracle {
                return Ok(None);
            }
            match solve_cached(cache, inst, config, None) {
                Ok(o) => Ok(Some(o)),
                Err(Error::OracleLimit { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, Error>>()?;

    let cells: Vec<(usize, &AlgoSpec)> = (0..instances.len())
        .flat_map(|i| manifest.algorithms.iter().map(move |a| (i, a)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(i, spec)| run_cell(&manifest.instances[i], &instances[i], oracles[i].as_ref(), spec))
        .collect())
}

pub fn cmd_bench(manifest_path: &Path, output: Option<&Path>, threads: Option<usize>) -> anyhow::Result<()> {
    let text = fs::read_to_string(manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(Error::from)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let cache = OracleCache::from_env()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()?;
    let rows = pool.install(|| run_manifest(&manifest, base, cache.as_ref()))?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();

    let out = super::output_writer(output)?;
    write_report(out, &rows)?;
    eprintln!("{} rows, {failed} failed", rows.len());
    Ok(())
}
