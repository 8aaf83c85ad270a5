//! Naming the requirements behind an infeasible model.

use std::time::Duration;

use thiserror::Error;

use crate::encoder::STRUCTURAL;
use crate::pb::{solve_one, ActiveGroups, PbModel, SolveOutcome};

pub const MAX_DIAGNOSABLE_CONSTRAINTS: usize = 100_000;
pub const INFEASIBLE: &str = "Infeasible model";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Iis {
    /// Jointly infeasible groups; dropping any one makes the rest feasible.
    Groups(Vec<String>),
    /// The model exceeds the diagnosable size.
    TooLarge,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagnoseError {
    #[error("model is feasible")]
    Feasible,
    #[error("diagnosis timed out")]
    Timeout,
}

#[derive(Debug, Clone, Copy)]
pub struct IisOptions {
    pub max_constraints: usize,
    pub seed: u64,
    /// Limit for each individual solve.
    pub time_limit: Option<Duration>,
}

impl Default for IisOptions {
    fn default() -> Self {
        Self {
            max_constraints: MAX_DIAGNOSABLE_CONSTRAINTS,
            seed: 0,
            time_limit: None,
        }
    }
}

/// Solves with the structural group plus `groups`. `None` on timeout.
fn feasible(model: &PbModel, groups: &[String], opts: &IisOptions) -> Option<bool> {
    let mut names: Vec<&str> = groups.iter().map(String::as_str).collect();
    if model.group_id(STRUCTURAL).is_some() {
        names.push(STRUCTURAL);
    }
    let active = ActiveGroups::only(model, &names).expect("groups come from the model");
    match solve_one(model, opts.seed, opts.time_limit, &active) {
        SolveOutcome::Sat(_) => Some(true),
        SolveOutcome::Unsat => Some(false),
        SolveOutcome::Timeout(_) => None,
    }
}

/// Deletion filter over requirement groups in creation order. Models above
/// the size limit are only confirmed infeasible.
pub fn find_iis_with(model: &PbModel, opts: &IisOptions) -> Result<Iis, DiagnoseError> {
    let mut kept: Vec<String> = model
        .groups()
        .iter()
        .filter(|g| g.as_str() != STRUCTURAL)
        .cloned()
        .collect();
    match feasible(model, &kept, opts) {
        Some(true) => return Err(DiagnoseError::Feasible),
        None => return Err(DiagnoseError::Timeout),
        Some(false) => {}
    }
    if model.n_constraints() > opts.max_constraints {
        return Ok(Iis::TooLarge);
    }
    let mut i = 0;
    while i < kept.len() {
        let mut trial = kept.clone();
        trial.remove(i);
        // a timeout keeps the group: its removal was not shown to be safe
        if feasible(model, &trial, opts) == Some(false) {
            kept = trial;
        } else {
            i += 1;
        }
    }
    Ok(Iis::Groups(kept))
}

pub fn find_iis(model: &PbModel) -> Result<Iis, DiagnoseError> {
    find_iis_with(model, &IisOptions::default())
}

/// User-facing message for an infeasible model.
pub fn format_infeasibility(iis: &Iis) -> String {
    match iis {
        Iis::Groups(groups) if !groups.is_empty() => {
            let mut out = format!("{INFEASIBLE}. Please check the following constraints:");
            for g in groups {
                out.push_str("\n    -- ");
                out.push_str(g);
            }
            out
        }
        _ => INFEASIBLE.to_string(),
    }
}
