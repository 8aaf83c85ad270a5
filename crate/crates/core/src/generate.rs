//! Batched generation: model, enumeration per seed, decoding, validation.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::decode::assignment_to_graph;
use crate::diagnostics::{find_iis, format_infeasibility, Iis};
use crate::error::DecodeError;
use crate::molecule::MoleculeGraph;
use crate::par::{self, Execution};
use crate::pb::{ActiveGroups, Engine, Enumeration, StopReason};
use crate::smarts::Pattern;
use crate::spec::{CompiledSpec, RequirementSpec, SpecError};
use crate::validator::{validate_pool_with, Validated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BatchOutcome {
    /// The requested number of assignments was found.
    Sat,
    /// The search space ran out first.
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub index: usize,
    pub seed: u64,
    pub requested: usize,
    pub found: usize,
    pub outcome: BatchOutcome,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub requested: usize,
    pub n_vars: usize,
    pub n_constraints: usize,
    pub batches: Vec<BatchReport>,
    pub raw: usize,
    pub duplicates: usize,
    pub rejected_by_check_later: usize,
    pub unique: usize,
    pub deferred_patterns: Vec<String>,
    pub check_later: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct Generation {
    pub molecules: Vec<Validated>,
    pub report: RunReport,
}

impl Generation {
    /// Canonical SMILES of every surviving molecule, in output order.
    pub fn smiles(&self) -> Vec<&str> {
        self.molecules.iter().map(|v| v.key.as_str()).collect()
    }

    pub fn graphs(&self) -> Vec<&MoleculeGraph> {
        self.molecules.iter().map(|v| &v.graph).collect()
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("number of solutions must be at least 1")]
    ZeroSolutions,
    #[error("{message}")]
    Infeasible { iis: Iis, message: String },
    #[error("internal error while decoding a solution: {0}")]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub execution: Execution,
}

fn batch_sizes(num: usize, batch_size: usize) -> Vec<usize> {
    (0..num.div_ceil(batch_size))
        .map(|b| batch_size.min(num - b * batch_size))
        .collect()
}

fn outcome(stop: StopReason) -> BatchOutcome {
    match stop {
        StopReason::PoolFull => BatchOutcome::Sat,
        StopReason::Exhausted => BatchOutcome::Unsat,
        StopReason::Timeout => BatchOutcome::Timeout,
    }
}

fn pattern_text(p: &Pattern) -> String {
    p.source.clone()
}

/// Runs every batch, each on its own engine with seed `base_seed + index`.
fn run_batches(
    c: &CompiledSpec,
    spec: &RequirementSpec,
    num: usize,
    exec: Execution,
) -> Vec<Enumeration> {
    let o = &spec.options;
    let sizes = batch_sizes(num, o.batch_size);
    let limit = Some(Duration::from_secs_f64(o.time_limit_per_batch));
    let model = &c.model.model;
    let active = ActiveGroups::all(model);
    if o.carry_blocking_clauses {
        let mut seen: Vec<Vec<bool>> = Vec::new();
        let mut out = Vec::with_capacity(sizes.len());
        for (b, &k) in sizes.iter().enumerate() {
            let mut engine = Engine::new(model, &active, o.base_seed.wrapping_add(b as u64));
            for s in &seen {
                engine.block(s);
            }
            let e = engine.enumerate(k, limit);
            seen.extend(e.solutions.iter().cloned());
            out.push(e);
        }
        return out;
    }
    let jobs: Vec<(usize, usize)> = sizes.into_iter().enumerate().collect();
    par::map(exec, &jobs, |&(b, k)| {
        Engine::new(model, &active, o.base_seed.wrapping_add(b as u64)).enumerate(k, limit)
    })
}

/// Generates up to `num` molecules, fewer after deduplication and deferred
/// screening. An infeasible model yields [`GenerateError::Infeasible`].
pub fn generate_with(
    spec: &RequirementSpec,
    num: usize,
    opts: RunOptions,
) -> Result<Generation, GenerateError> {
    if num == 0 {
        return Err(GenerateError::ZeroSolutions);
    }
    let started = Instant::now();
    let c = spec.compile()?;
    let runs = run_batches(&c, spec, num, opts.execution);
    let sizes = batch_sizes(num, spec.options.batch_size);

    let total: usize = runs.iter().map(|r| r.solutions.len()).sum();
    if total == 0
        && runs
            .first()
            .is_some_and(|r| r.stop == StopReason::Exhausted)
    {
        let iis = find_iis(&c.model.model).unwrap_or(Iis::Groups(Vec::new()));
        let message = format_infeasibility(&iis);
        return Err(GenerateError::Infeasible { iis, message });
    }

    let mut batches = Vec::with_capacity(runs.len());
    let mut graphs = Vec::with_capacity(total);
    for (b, r) in runs.iter().enumerate() {
        batches.push(BatchReport {
            index: b,
            seed: spec.options.base_seed.wrapping_add(b as u64),
            requested: sizes[b],
            found: r.solutions.len(),
            outcome: outcome(r.stop),
            seconds: r.elapsed.as_secs_f64(),
        });
        for s in &r.solutions {
            graphs.push(assignment_to_graph(&c.model, s)?);
        }
    }
    let pool = validate_pool_with(&graphs, &c.check_later, opts.execution);
    let report = RunReport {
        requested: num,
        n_vars: c.model.model.n_vars(),
        n_constraints: c.model.model.n_constraints(),
        batches,
        raw: graphs.len(),
        duplicates: pool.duplicates,
        rejected_by_check_later: pool.rejected,
        unique: pool.molecules.len(),
        deferred_patterns: c.deferred.iter().map(pattern_text).collect(),
        check_later: c.check_later.iter().map(pattern_text).collect(),
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok(Generation {
        molecules: pool.molecules,
        report,
    })
}

pub fn generate(spec: &RequirementSpec, num: usize) -> Result<Generation, GenerateError> {
    generate_with(spec, num, RunOptions::default())
}
