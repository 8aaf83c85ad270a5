use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::ModelError;

/// A binary decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Name handle for a requirement group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupId(pub(crate) u32);

impl GroupId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexRelation {
    LessEq,
    GreaterEq,
}

/// Whether a variable takes part in solution distinctness.
///
/// Blocking clauses only range over primary variables; auxiliary ones
/// (indicators introduced by the pattern compiler) are projected away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Primary,
    Auxiliary,
}

#[derive(Debug, Clone, Copy)]
struct VarInfo {
    tier: u8,
    role: VarRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(i64, Var)>,
    pub relation: Relation,
    pub rhs: i64,
    pub group: GroupId,
}

impl LinearConstraint {
    pub fn lhs(&self, assignment: &[bool]) -> i64 {
        self.terms
            .iter()
            .map(|&(c, v)| if assignment[v.index()] { c } else { 0 })
            .sum()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        let lhs = self.lhs(assignment);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// Lexicographic comparison between two equally long rows of variables,
/// position 0 being the most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexConstraint {
    pub lhs: Vec<Var>,
    pub rhs: Vec<Var>,
    pub relation: LexRelation,
    pub group: GroupId,
}

impl LexConstraint {
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        let a = self.lhs.iter().map(|v| assignment[v.index()]);
        let b = self.rhs.iter().map(|v| assignment[v.index()]);
        let ord = a.cmp(b);
        match self.relation {
            LexRelation::LessEq => ord.is_le(),
            LexRelation::GreaterEq => ord.is_ge(),
        }
    }
}

/// Set of groups whose constraints are enforced during a solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveGroups(Vec<bool>);

impl ActiveGroups {
    pub fn all(model: &PbModel) -> Self {
        Self(vec![true; model.groups.len()])
    }

    pub fn none(model: &PbModel) -> Self {
        Self(vec![false; model.groups.len()])
    }

    pub fn only<S: AsRef<str>>(model: &PbModel, names: &[S]) -> Result<Self, ModelError> {
        let mut active = Self::none(model);
        for name in names {
            let id = model
                .group_id(name.as_ref())
                .ok_or_else(|| ModelError::UnknownGroup(name.as_ref().to_string()))?;
            active.0[id.index()] = true;
        }
        Ok(active)
    }

    pub fn from_ids(model: &PbModel, ids: impl IntoIterator<Item = GroupId>) -> Self {
        let mut active = Self::none(model);
        for id in ids {
            active.set(id, true);
        }
        active
    }

    pub fn set(&mut self, id: GroupId, on: bool) {
        if id.index() >= self.0.len() {
            self.0.resize(id.index() + 1, false);
        }
        self.0[id.index()] = on;
    }

    pub fn contains(&self, id: GroupId) -> bool {
        self.0.get(id.index()).copied().unwrap_or(false)
    }
}

/// Binary variables plus integer linear and lexicographic constraints, each
/// tagged with a requirement group.
#[derive(Debug, Clone, Default)]
pub struct PbModel {
    vars: Vec<VarInfo>,
    constraints: Vec<LinearConstraint>,
    lex: Vec<LexConstraint>,
    groups: Vec<String>,
    group_index: HashMap<String, GroupId>,
    fixed: Vec<(Var, bool, GroupId)>,
}

impl PbModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self, role: VarRole, tier: u8) -> Var {
        let v = Var(self.vars.len() as u32);
        self.vars.push(VarInfo { tier, role });
        v
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn role(&self, v: Var) -> VarRole {
        self.vars[v.index()].role
    }

    /// Branching tier; lower tiers are decided first.
    pub fn tier(&self, v: Var) -> u8 {
        self.vars[v.index()].tier
    }

    pub fn primary_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, info)| info.role == VarRole::Primary)
            .map(|(i, _)| Var(i as u32))
    }

    /// Returns the id for `name`, creating the group on first use.
    pub fn group(&mut self, name: &str) -> GroupId {
        if let Some(&id) = self.group_index.get(name) {
            return id;
        }
        let id = GroupId(self.groups.len() as u32);
        self.groups.push(name.to_string());
        self.group_index.insert(name.to_string(), id);
        id
    }

    pub fn group_id(&self, name: &str) -> Option<GroupId> {
        self.group_index.get(name).copied()
    }

    pub fn group_name(&self, id: GroupId) -> &str {
        &self.groups[id.index()]
    }

    /// Group names in creation order.
    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn lex_constraints(&self) -> &[LexConstraint] {
        &self.lex
    }

    pub fn fixed(&self) -> impl Iterator<Item = (Var, bool, GroupId)> + '_ {
        self.fixed.iter().copied()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len() + self.lex.len() + self.fixed.len()
    }

    fn check_var(&self, v: Var) -> Result<(), ModelError> {
        if v.index() < self.vars.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownVar(v.index()))
        }
    }

    /// Adds `Σ c·x  (rel)  rhs`. Repeated variables are merged and zero
    /// coefficients dropped.
    pub fn add_linear(
        &mut self,
        terms: impl IntoIterator<Item = (i64, Var)>,
        relation: Relation,
        rhs: i64,
        group: GroupId,
    ) -> Result<(), ModelError> {
        let mut merged: Vec<(i64, Var)> = Vec::new();
        for (c, v) in terms {
            self.check_var(v)?;
            match merged.iter_mut().find(|(_, w)| *w == v) {
                Some(slot) => slot.0 = slot.0.checked_add(c).ok_or_else(|| self.overflow(group))?,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|&(c, _)| c != 0);
        let mut total = rhs.checked_abs().ok_or_else(|| self.overflow(group))?;
        for &(c, _) in &merged {
            let a = c.checked_abs().ok_or_else(|| self.overflow(group))?;
            total = total.checked_add(a).ok_or_else(|| self.overflow(group))?;
        }
        // the engine doubles magnitudes when splitting equalities
        total.checked_mul(2).ok_or_else(|| self.overflow(group))?;
        self.constraints.push(LinearConstraint {
            terms: merged,
            relation,
            rhs,
            group,
        });
        Ok(())
    }

    fn overflow(&self, group: GroupId) -> ModelError {
        ModelError::Overflow(self.group_name(group).to_string())
    }

    pub fn add_lex(
        &mut self,
        lhs: Vec<Var>,
        rhs: Vec<Var>,
        relation: LexRelation,
        group: GroupId,
    ) -> Result<(), ModelError> {
        if lhs.len() != rhs.len() {
            return Err(ModelError::LexLength(lhs.len(), rhs.len()));
        }
        for &v in lhs.iter().chain(&rhs) {
            self.check_var(v)?;
        }
        self.lex.push(LexConstraint {
            lhs,
            rhs,
            relation,
            group,
        });
        Ok(())
    }

    pub fn fix(&mut self, v: Var, value: bool, group: GroupId) -> Result<(), ModelError> {
        self.check_var(v)?;
        self.fixed.push((v, value, group));
        Ok(())
    }

    /// Index of the first active constraint violated by a full assignment.
    pub fn first_violation(&self, assignment: &[bool], active: &ActiveGroups) -> Option<String> {
        if assignment.len() != self.vars.len() {
            return Some(format!(
                "assignment has {} values for {} variables",
                assignment.len(),
                self.vars.len()
            ));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if active.contains(c.group) && !c.is_satisfied_by(assignment) {
                return Some(format!("linear #{i} ({})", self.group_name(c.group)));
            }
        }
        for (i, c) in self.lex.iter().enumerate() {
            if active.contains(c.group) && !c.is_satisfied_by(assignment) {
                return Some(format!("lex #{i} ({})", self.group_name(c.group)));
            }
        }
        for &(v, value, g) in &self.fixed {
            if active.contains(g) && assignment[v.index()] != value {
                return Some(format!("fixed x{} ({})", v.index(), self.group_name(g)));
            }
        }
        None
    }

    pub fn is_satisfied_by(&self, assignment: &[bool], active: &ActiveGroups) -> bool {
        self.first_violation(assignment, active).is_none()
    }

    /// OPB-style text dump, one constraint per line, variables numbered
    /// from 1. `<=` constraints are negated into `>=`; lexicographic
    /// constraints have no linear form here and are emitted as comments.
    pub fn to_opb(&self) -> String {
        let mut out = String::new();
        let n_lin = self.constraints.len() + self.fixed.len();
        let _ = writeln!(
            out,
            "* #variable= {} #constraint= {}",
            self.vars.len(),
            n_lin
        );
        let term = |out: &mut String, c: i64, v: Var| {
            let _ = write!(out, "{c:+} x{} ", v.index() + 1);
        };
        for c in &self.constraints {
            let _ = writeln!(out, "* {}", self.group_name(c.group));
            let (sign, op, rhs) = match c.relation {
                Relation::Ge => (1, ">=", c.rhs),
                Relation::Le => (-1, ">=", -c.rhs),
                Relation::Eq => (1, "=", c.rhs),
            };
            for &(coef, v) in &c.terms {
                term(&mut out, sign * coef, v);
            }
            let _ = writeln!(out, "{op} {rhs} ;");
        }
        for &(v, value, g) in &self.fixed {
            let _ = writeln!(out, "* {}", self.group_name(g));
            term(&mut out, 1, v);
            let _ = writeln!(out, "= {} ;", i64::from(value));
        }
        for c in &self.lex {
            let row = |vars: &[Var]| {
                vars.iter()
                    .map(|v| format!("x{}", v.index() + 1))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let op = match c.relation {
                LexRelation::LessEq => "<=lex",
                LexRelation::GreaterEq => ">=lex",
            };
            let _ = writeln!(
                out,
                "* lex ({}) [{}] {op} [{}]",
                self.group_name(c.group),
                row(&c.lhs),
                row(&c.rhs)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_terms_merge() {
        let mut m = PbModel::new();
        let g = m.group("g");
        let x = m.new_var(VarRole::Primary, 0);
        let y = m.new_var(VarRole::Primary, 0);
        m.add_linear([(1, x), (2, y), (-1, x)], Relation::Le, 1, g)
            .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(2, y)]);
    }

    #[test]
    fn overflow_rejected_at_add_time() {
        let mut m = PbModel::new();
        let g = m.group("big");
        let x = m.new_var(VarRole::Primary, 0);
        let y = m.new_var(VarRole::Primary, 0);
        let err = m
            .add_linear([(i64::MAX / 2, x), (i64::MAX / 2, y)], Relation::Le, 1, g)
            .unwrap_err();
        assert_eq!(err, ModelError::Overflow("big".into()));
    }

    #[test]
    fn unknown_group_in_assumptions() {
        let mut m = PbModel::new();
        m.group("a");
        assert!(ActiveGroups::only(&m, &["a"]).is_ok());
        assert_eq!(
            ActiveGroups::only(&m, &["b"]),
            Err(ModelError::UnknownGroup("b".into()))
        );
    }

    #[test]
    fn opb_dump_negates_le() {
        let mut m = PbModel::new();
        let g = m.group("cap");
        let x = m.new_var(VarRole::Primary, 0);
        let y = m.new_var(VarRole::Primary, 0);
        m.add_linear([(1, x), (1, y)], Relation::Le, 1, g).unwrap();
        let opb = m.to_opb();
        assert!(opb.contains("-1 x1 -1 x2 >= -1 ;"), "{opb}");
    }

    #[test]
    fn lex_evaluation() {
        let mut m = PbModel::new();
        let g = m.group("lex");
        let a: Vec<Var> = (0..2).map(|_| m.new_var(VarRole::Primary, 0)).collect();
        let b: Vec<Var> = (0..2).map(|_| m.new_var(VarRole::Primary, 0)).collect();
        m.add_lex(a, b, LexRelation::LessEq, g).unwrap();
        let all = ActiveGroups::all(&m);
        assert!(m.is_satisfied_by(&[false, true, true, false], &all));
        assert!(m.is_satisfied_by(&[true, false, true, false], &all));
        assert!(!m.is_satisfied_by(&[true, true, true, false], &all));
    }
}
