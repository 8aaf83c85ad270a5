//! JSON requirement files and their translation into a model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::{
    compile_exclusion, compile_inclusion, CompileBudget, CompileError, Compiled,
    DEFAULT_MAX_EXCLUSION_CONSTRAINTS,
};
use crate::encoder::{
    encode_bounds, encode_structural, encode_symmetry, BoundsError, MolecularModel,
};
use crate::error::{LayoutError, ModelError, SmartsError};
use crate::layout::{Bounds, CountRange, FeatureLayout};
use crate::smarts::{parse_pattern, Pattern};

/// A SMARTS string, optionally requiring unbonded pattern pairs to stay
/// unbonded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternSpec {
    Plain(String),
    Detailed {
        smarts: String,
        #[serde(default)]
        induced: bool,
    },
}

impl PatternSpec {
    pub fn smarts(&self) -> &str {
        match self {
            PatternSpec::Plain(s) => s,
            PatternSpec::Detailed { smarts, .. } => smarts,
        }
    }

    pub fn induced(&self) -> bool {
        matches!(self, PatternSpec::Detailed { induced: true, .. })
    }
}

impl From<&str> for PatternSpec {
    fn from(s: &str) -> Self {
        PatternSpec::Plain(s.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomBoundsSpec {
    #[serde(default)]
    pub lb: Option<Vec<Option<i64>>>,
    #[serde(default)]
    pub ub: Option<Vec<Option<i64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsSpec {
    #[serde(default)]
    pub atoms: AtomBoundsSpec,
    #[serde(default)]
    pub double_bonds: CountRange,
    #[serde(default)]
    pub triple_bonds: CountRange,
    #[serde(default)]
    pub rings: CountRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Options {
    pub symmetry_breaking: bool,
    pub exclusion_budget: u64,
    pub batch_size: usize,
    /// Seconds per batch.
    pub time_limit_per_batch: f64,
    pub base_seed: u64,
    /// Keep blocking clauses from earlier batches (forces sequential batches).
    pub carry_blocking_clauses: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            symmetry_breaking: false,
            exclusion_budget: DEFAULT_MAX_EXCLUSION_CONSTRAINTS,
            batch_size: 100,
            time_limit_per_batch: 600.0,
            base_seed: 0,
            carry_blocking_clauses: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequirementSpec {
    pub atoms: Vec<String>,
    pub n_atoms: usize,
    /// Covalence overrides by element.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covalences: BTreeMap<String, u32>,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub include: Vec<PatternSpec>,
    #[serde(default)]
    pub exclude: Vec<PatternSpec>,
    #[serde(default)]
    pub check_later: Vec<PatternSpec>,
    #[serde(default)]
    pub options: Options,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid spec JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("{list} pattern `{text}`: {source}")]
    Pattern {
        list: &'static str,
        text: String,
        source: SmartsError,
    },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid option: {0}")]
    Option(String),
}

impl From<BoundsError> for SpecError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Layout(e) => SpecError::Layout(e),
            BoundsError::Model(e) => SpecError::Model(e),
        }
    }
}

/// Model plus the patterns it was built from.
#[derive(Debug, Clone)]
pub struct CompiledSpec {
    pub model: MolecularModel,
    pub bounds: Bounds,
    pub included: Vec<Pattern>,
    pub excluded: Vec<Pattern>,
    /// Exclusions whose constraint count exceeded the budget.
    pub deferred: Vec<Pattern>,
    /// Deferred exclusions followed by user-supplied post-generation checks.
    pub check_later: Vec<Pattern>,
}

impl RequirementSpec {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn layout(&self) -> Result<FeatureLayout, SpecError> {
        Ok(FeatureLayout::new(
            &self.atoms,
            self.n_atoms,
            &self.covalences,
        )?)
    }

    pub fn to_bounds(&self, layout: &FeatureLayout) -> Result<Bounds, SpecError> {
        let mut b = Bounds {
            double_bonds: self.bounds.double_bonds,
            triple_bonds: self.bounds.triple_bonds,
            rings: self.bounds.rings,
            ..Bounds::none()
        };
        let a = &self.bounds.atoms;
        if a.lb.is_some() || a.ub.is_some() {
            b.set_atoms(a.lb.as_deref(), a.ub.as_deref(), layout.n_types())?;
        }
        Ok(b)
    }

    fn check_options(&self) -> Result<(), SpecError> {
        let o = &self.options;
        if o.batch_size == 0 {
            return Err(SpecError::Option("batch_size must be at least 1".into()));
        }
        if !(o.time_limit_per_batch >= 0.0 && o.time_limit_per_batch.is_finite()) {
            return Err(SpecError::Option(
                "time_limit_per_batch must be a finite non-negative number".into(),
            ));
        }
        if o.symmetry_breaking && !self.include.is_empty() {
            return Err(SpecError::Option(
                "symmetry_breaking cannot be combined with include patterns".into(),
            ));
        }
        Ok(())
    }

    /// Builds the model: structure, bounds, optional symmetry breaking,
    /// inclusions, then exclusions.
    pub fn compile(&self) -> Result<CompiledSpec, SpecError> {
        self.check_options()?;
        let layout = self.layout()?;
        let bounds = self.to_bounds(&layout)?;
        let parse_list = |list: &'static str, specs: &[PatternSpec]| {
            specs
                .iter()
                .map(|ps| {
                    parse_pattern(ps.smarts(), &layout)
                        .map(|p| p.with_induced(ps.induced()))
                        .map_err(|source| SpecError::Pattern {
                            list,
                            text: ps.smarts().to_string(),
                            source,
                        })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let included = parse_list("include", &self.include)?;
        let excluded = parse_list("exclude", &self.exclude)?;
        let extra = parse_list("check_later", &self.check_later)?;

        let mut model = encode_structural(&layout);
        encode_bounds(&mut model, &bounds)?;
        if self.options.symmetry_breaking {
            encode_symmetry(&mut model)?;
        }
        for p in &included {
            compile_inclusion(&mut model, p)?;
        }
        let budget = CompileBudget {
            max_exclusion_constraints: self.options.exclusion_budget,
        };
        let mut deferred = Vec::new();
        for p in &excluded {
            if let Compiled::Deferred { .. } = compile_exclusion(&mut model, p, budget)? {
                deferred.push(p.clone());
            }
        }
        let check_later = deferred.iter().chain(&extra).cloned().collect();
        Ok(CompiledSpec {
            model,
            bounds,
            included,
            excluded,
            deferred,
            check_later,
        })
    }
}
