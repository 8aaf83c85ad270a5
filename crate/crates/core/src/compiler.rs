//! Substructure requirements as linear constraints over atom tuples.

use thiserror::Error;

use crate::encoder::{tier, MolecularModel};
use crate::error::ModelError;
use crate::layout::FeatureLayout;
use crate::pb::{Relation, Var, VarRole};
use crate::smarts::{OrderSet, Pattern, TypeSet};

pub const DEFAULT_MAX_EXCLUSION_CONSTRAINTS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileBudget {
    pub max_exclusion_constraints: u64,
}

impl Default for CompileBudget {
    fn default() -> Self {
        Self {
            max_exclusion_constraints: DEFAULT_MAX_EXCLUSION_CONSTRAINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("pattern `{pattern}` has {n} atoms but molecules have {max}")]
    TooManyAtoms {
        pattern: String,
        n: usize,
        max: usize,
    },
    #[error("pattern `{pattern}` uses element {element} outside the atom alphabet")]
    UnknownElement { pattern: String, element: String },
    #[error("pattern `{pattern}` has a bond with no admissible order")]
    EmptyOrderSet { pattern: String },
    #[error("substructure inclusion cannot be combined with symmetry breaking")]
    SymmetryActive,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    Encoded {
        constraints: usize,
        aux_vars: usize,
    },
    /// Too many tuples; the pattern must be screened after generation.
    Deferred {
        tuples: u64,
    },
}

/// `Σ terms + constant`, one 0/1 component per pattern feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSum {
    pub terms: Vec<(i64, Var)>,
    pub constant: i64,
    pub m: i64,
}

impl ComponentSum {
    pub fn evaluate(&self, assignment: &[bool]) -> i64 {
        self.constant
            + self
                .terms
                .iter()
                .filter(|(_, v)| assignment[v.index()])
                .map(|(c, _)| c)
                .sum::<i64>()
    }
}

/// Number of ordered `n`-tuples of distinct indices out of `n_atoms`,
/// saturating at `u64::MAX`.
pub fn ordered_tuples(n_atoms: usize, n: usize) -> u64 {
    if n > n_atoms {
        return 0;
    }
    (0..n).fold(1u64, |acc, k| acc.saturating_mul((n_atoms - k) as u64))
}

fn check_pattern(p: &Pattern, layout: &FeatureLayout) -> Result<(), CompileError> {
    if p.n() > layout.n_atoms() {
        return Err(CompileError::TooManyAtoms {
            pattern: p.source.clone(),
            n: p.n(),
            max: layout.n_atoms(),
        });
    }
    for atom in &p.atoms {
        if let TypeSet::Elements(els) = &atom.types {
            if let Some(e) = els.iter().find(|e| layout.type_index(e).is_none()) {
                return Err(CompileError::UnknownElement {
                    pattern: p.source.clone(),
                    element: e.clone(),
                });
            }
        }
    }
    if p.bonds
        .iter()
        .any(|b| !(1..=3).any(|o| b.orders.contains(o)))
    {
        return Err(CompileError::EmptyOrderSet {
            pattern: p.source.clone(),
        });
    }
    Ok(())
}

/// Builds the component sum for pattern atom `k` placed on molecule atom
/// `tuple[k]`.
pub fn component_sum(m: &MolecularModel, p: &Pattern, tuple: &[usize]) -> ComponentSum {
    let layout = &m.layout;
    let vars = &m.vars;
    let mut s = ComponentSum {
        terms: Vec::new(),
        constant: 0,
        m: 0,
    };
    for (k, atom) in p.atoms.iter().enumerate() {
        let v = tuple[k];
        if let TypeSet::Elements(els) = &atom.types {
            s.m += 1;
            for e in els {
                let t = layout.type_index(e).expect("checked alphabet");
                s.terms.push((1, vars.x(v, t)));
            }
        }
        if let Some(d) = atom.neighbor_count {
            s.m += 1;
            // out-of-range counts can never hold: the component stays 0
            if let Some(f) = layout.neighbor_index(usize::from(d)) {
                s.terms.push((1, vars.x(v, f)));
            }
        }
        if let Some(h) = atom.h_count {
            s.m += 1;
            if let Some(f) = layout.hydrogen_index(usize::from(h)) {
                s.terms.push((1, vars.x(v, f)));
            }
        }
    }
    for b in &p.bonds {
        let (u, v) = (tuple[b.i], tuple[b.j]);
        s.m += 1;
        match b.orders {
            OrderSet::SINGLE => {
                s.terms.push((1, vars.a(u, v)));
                s.terms.push((-1, vars.db(u, v)));
                s.terms.push((-1, vars.tb(u, v)));
            }
            OrderSet::DOUBLE => s.terms.push((1, vars.db(u, v))),
            OrderSet::TRIPLE => s.terms.push((1, vars.tb(u, v))),
            OrderSet::ANY => s.terms.push((1, vars.a(u, v))),
            other => {
                // an order union is the sum of its disjoint member indicators
                if other.contains(1) {
                    s.terms.push((1, vars.a(u, v)));
                    s.terms.push((-1, vars.db(u, v)));
                    s.terms.push((-1, vars.tb(u, v)));
                }
                if other.contains(2) {
                    s.terms.push((1, vars.db(u, v)));
                }
                if other.contains(3) {
                    s.terms.push((1, vars.tb(u, v)));
                }
            }
        }
    }
    if p.induced {
        for i in 0..p.n() {
            for j in i + 1..p.n() {
                if p.bond_between(i, j).is_none() {
                    s.m += 1;
                    s.constant += 1;
                    s.terms.push((-1, vars.a(tuple[i], tuple[j])));
                }
            }
        }
    }
    s
}

fn for_each_tuple(
    n_atoms: usize,
    n: usize,
    f: &mut impl FnMut(&[usize]) -> Result<(), CompileError>,
) -> Result<(), CompileError> {
    fn rec(
        n_atoms: usize,
        n: usize,
        tuple: &mut Vec<usize>,
        used: &mut [bool],
        f: &mut impl FnMut(&[usize]) -> Result<(), CompileError>,
    ) -> Result<(), CompileError> {
        if tuple.len() == n {
            return f(tuple);
        }
        for v in 0..n_atoms {
            if !used[v] {
                used[v] = true;
                tuple.push(v);
                rec(n_atoms, n, tuple, used, f)?;
                tuple.pop();
                used[v] = false;
            }
        }
        Ok(())
    }
    rec(
        n_atoms,
        n,
        &mut Vec::with_capacity(n),
        &mut vec![false; n_atoms],
        f,
    )
}

pub fn exclusion_group(p: &Pattern) -> String {
    format!("exclude {}", p.source)
}

pub fn inclusion_group(p: &Pattern) -> String {
    format!("include {}", p.source)
}

/// Forbids every placement of `p`: `S(tuple) <= M - 1` for all ordered
/// tuples of distinct atoms, unless their number exceeds the budget.
pub fn compile_exclusion(
    m: &mut MolecularModel,
    p: &Pattern,
    budget: CompileBudget,
) -> Result<Compiled, CompileError> {
    check_pattern(p, &m.layout)?;
    let n_atoms = m.layout.n_atoms();
    let tuples = ordered_tuples(n_atoms, p.n());
    if tuples > budget.max_exclusion_constraints {
        return Ok(Compiled::Deferred { tuples });
    }
    let g = m.model.group(&exclusion_group(p));
    let mut count = 0;
    let mut rows = Vec::with_capacity(tuples as usize);
    for_each_tuple(n_atoms, p.n(), &mut |tuple| {
        rows.push(component_sum(m, p, tuple));
        Ok(())
    })?;
    for s in rows {
        m.model
            .add_linear(s.terms, Relation::Le, s.m - 1 - s.constant, g)?;
        count += 1;
    }
    Ok(Compiled::Encoded {
        constraints: count,
        aux_vars: 0,
    })
}

/// Requires `p` on at least one window of consecutive atom indices.
pub fn compile_inclusion(m: &mut MolecularModel, p: &Pattern) -> Result<Compiled, CompileError> {
    check_pattern(p, &m.layout)?;
    if m.has_symmetry {
        return Err(CompileError::SymmetryActive);
    }
    let n_atoms = m.layout.n_atoms();
    let n = p.n();
    let g = m.model.group(&inclusion_group(p));
    let mut sigmas = Vec::new();
    for i in 0..=n_atoms - n {
        let window: Vec<usize> = (i..i + n).collect();
        let s = component_sum(m, p, &window);
        let sigma = m.model.new_var(VarRole::Auxiliary, tier::INDICATOR);
        let mut terms = s.terms;
        terms.push((-s.m, sigma));
        m.model.add_linear(terms, Relation::Ge, -s.constant, g)?;
        sigmas.push(sigma);
    }
    m.model
        .add_linear(sigmas.iter().map(|&s| (1, s)), Relation::Ge, 1, g)?;
    m.has_inclusion = true;
    Ok(Compiled::Encoded {
        constraints: sigmas.len() + 1,
        aux_vars: sigmas.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode_structural;
    use crate::smarts::parse_pattern;

    fn setup(atoms: &[&str], n: usize) -> MolecularModel {
        encode_structural(&FeatureLayout::with_defaults(atoms, n).unwrap())
    }

    #[test]
    fn quaternary_carbon_exclusion_at_twenty_atoms() {
        let mut m = setup(&["C", "N", "O", "S"], 20);
        let p = parse_pattern("[CH0]", &m.layout).unwrap();
        let before = m.model.n_constraints();
        let out = compile_exclusion(&mut m, &p, CompileBudget::default()).unwrap();
        assert_eq!(
            out,
            Compiled::Encoded {
                constraints: 20,
                aux_vars: 0
            }
        );
        assert_eq!(m.model.n_constraints(), before + 20);
        let h0 = m.layout.hydrogen_index(0).unwrap();
        let row = m.model.constraints().last().unwrap();
        assert_eq!(row.relation, Relation::Le);
        assert_eq!(row.rhs, 1);
        assert_eq!(row.terms, vec![(1, m.vars.x(19, 0)), (1, m.vars.x(19, h0))]);
        assert_eq!(m.model.group_name(row.group), "exclude [CH0]");
    }

    #[test]
    fn heteroatom_bridge_tuple_count() {
        let mut m = setup(&["C", "N", "O", "S"], 20);
        let p = parse_pattern("[N,O,S]~C~[N,O,S]", &m.layout).unwrap();
        let out = compile_exclusion(&mut m, &p, CompileBudget::default()).unwrap();
        assert_eq!(
            out,
            Compiled::Encoded {
                constraints: 6840,
                aux_vars: 0
            }
        );
    }

    #[test]
    fn large_exclusion_is_deferred() {
        let mut m = setup(&["C", "N", "O", "S"], 30);
        let p = parse_pattern("[CH]1=[CH][CH]=[CH][CH]=C1", &m.layout).unwrap();
        let before = m.model.n_constraints();
        let out = compile_exclusion(&mut m, &p, CompileBudget::default()).unwrap();
        assert_eq!(
            out,
            Compiled::Deferred {
                tuples: 427_518_000
            }
        );
        assert_eq!(m.model.n_constraints(), before);
        assert!(m
            .model
            .group_id("exclude [CH]1=[CH][CH]=[CH][CH]=C1")
            .is_none());
    }

    #[test]
    fn carboxyl_inclusion_windows() {
        let mut m = setup(&["C", "O"], 13);
        let vars_before = m.model.n_vars();
        let before = m.model.n_constraints();
        let p = parse_pattern("O=C-[OH1]", &m.layout).unwrap();
        let out = compile_inclusion(&mut m, &p).unwrap();
        assert_eq!(
            out,
            Compiled::Encoded {
                constraints: 12,
                aux_vars: 11
            }
        );
        assert_eq!(m.model.n_constraints(), before + 12);
        assert_eq!(m.model.n_vars(), vars_before + 11);
        let s = component_sum(&m, &p, &[0, 1, 2]);
        assert_eq!(s.m, 6);
        assert_eq!(s.constant, 0);
    }

    #[test]
    fn full_width_window_pins_pattern() {
        let mut m = setup(&["C", "O"], 3);
        let p = parse_pattern("O=C-[OH1]", &m.layout).unwrap();
        let out = compile_inclusion(&mut m, &p).unwrap();
        assert_eq!(
            out,
            Compiled::Encoded {
                constraints: 2,
                aux_vars: 1
            }
        );
    }

    #[test]
    fn oversized_pattern_rejected() {
        let mut m = setup(&["C", "O"], 2);
        let p = parse_pattern("CCC", &m.layout).unwrap();
        assert!(matches!(
            compile_exclusion(&mut m, &p, CompileBudget::default()),
            Err(CompileError::TooManyAtoms { n: 3, max: 2, .. })
        ));
        assert!(matches!(
            compile_inclusion(&mut m, &p),
            Err(CompileError::TooManyAtoms { .. })
        ));
    }

    #[test]
    fn induced_flag_adds_no_bond_components() {
        let m = setup(&["C", "O"], 4);
        let p = parse_pattern("C~C~C", &m.layout)
            .unwrap()
            .with_induced(true);
        let s = component_sum(&m, &p, &[0, 1, 2]);
        // 3 types, 2 bonds, one absent pair
        assert_eq!(s.m, 6);
        assert_eq!(s.constant, 1);
        assert!(s.terms.contains(&(-1, m.vars.a(0, 2))));
    }

    #[test]
    fn tuple_count() {
        assert_eq!(ordered_tuples(20, 3), 6840);
        assert_eq!(ordered_tuples(13, 6), 1_235_520);
        assert_eq!(ordered_tuples(100, 4), 94_109_400);
        assert_eq!(ordered_tuples(3, 4), 0);
    }
}
