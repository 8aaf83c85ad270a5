//! Pseudo-Boolean models and the enumeration engine.

mod engine;
mod model;

pub use engine::{
    enumerate, project, solve_one, Engine, Enumeration, SearchStats, SolveOutcome, StopReason,
};
pub use model::{
    ActiveGroups, GroupId, LexConstraint, LexRelation, LinearConstraint, PbModel, Relation, Var,
    VarRole,
};
