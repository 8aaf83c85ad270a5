//! Encoding of the molecular space as a 0-1 linear model.
//!
//! Variables: the feature matrix `x(v, f)` and, for each unordered pair
//! `u < v`, a bond flag `a`, a double-bond flag `db` and a triple-bond flag
//! `tb`. Diagonal entries (`a(v,v) = 1`, `db(v,v) = tb(v,v) = 0`) are
//! constants and never materialize as variables; the upper triangle stands
//! for both halves of each symmetric matrix.

use crate::error::{LayoutError, ModelError};
use crate::layout::{Bounds, CountRange, FeatureLayout};
use crate::pb::{GroupId, LexRelation, PbModel, Relation, Var, VarRole};

pub const STRUCTURAL: &str = "structural";
pub const SYMMETRY: &str = "symmetry breaking";

/// Branching tiers handed to the engine (lower is decided first).
pub(crate) mod tier {
    pub const INDICATOR: u8 = 0;
    pub const ATOM_TYPE: u8 = 1;
    pub const BOND: u8 = 2;
    pub const NEIGHBORS: u8 = 3;
    pub const BOND_ORDER: u8 = 4;
    pub const REST: u8 = 5;
}

#[derive(Debug, Clone)]
pub struct VariableMap {
    n_atoms: usize,
    n_features: usize,
    x: Vec<Var>,
    a: Vec<Var>,
    db: Vec<Var>,
    tb: Vec<Var>,
}

impl VariableMap {
    fn pair_index(&self, u: usize, v: usize) -> usize {
        debug_assert!(u != v && u < self.n_atoms && v < self.n_atoms);
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        // row-major upper triangle
        u * (2 * self.n_atoms - u - 1) / 2 + (v - u - 1)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn x(&self, v: usize, f: usize) -> Var {
        self.x[v * self.n_features + f]
    }

    /// Bond flag for `u != v` (either order).
    pub fn a(&self, u: usize, v: usize) -> Var {
        self.a[self.pair_index(u, v)]
    }

    pub fn db(&self, u: usize, v: usize) -> Var {
        self.db[self.pair_index(u, v)]
    }

    pub fn tb(&self, u: usize, v: usize) -> Var {
        self.tb[self.pair_index(u, v)]
    }

    pub fn n_free(&self) -> usize {
        self.x.len() + self.a.len() + self.db.len() + self.tb.len()
    }
}

/// A model under construction together with its variable map.
#[derive(Debug, Clone)]
pub struct MolecularModel {
    pub layout: FeatureLayout,
    pub vars: VariableMap,
    pub model: PbModel,
    pub(crate) has_inclusion: bool,
    pub(crate) has_symmetry: bool,
}

impl MolecularModel {
    pub fn structural_group(&self) -> GroupId {
        self.model
            .group_id(STRUCTURAL)
            .expect("structural group is created first")
    }
}

/// Builds the variables and all compulsory structural constraints.
pub fn encode_structural(layout: &FeatureLayout) -> MolecularModel {
    let n = layout.n_atoms();
    let nf = layout.n_features();
    let mut model = PbModel::new();
    let g = model.group(STRUCTURAL);

    let feature_tier = |f: usize| {
        if layout.type_block().contains(&f) {
            tier::ATOM_TYPE
        } else if layout.neighbor_block().contains(&f) {
            tier::NEIGHBORS
        } else {
            tier::REST
        }
    };
    let mut x = Vec::with_capacity(n * nf);
    for _ in 0..n {
        for f in 0..nf {
            x.push(model.new_var(VarRole::Primary, feature_tier(f)));
        }
    }
    let n_pairs = n * (n - 1) / 2;
    let a: Vec<Var> = (0..n_pairs)
        .map(|_| model.new_var(VarRole::Primary, tier::BOND))
        .collect();
    let db: Vec<Var> = (0..n_pairs)
        .map(|_| model.new_var(VarRole::Primary, tier::BOND_ORDER))
        .collect();
    let tb: Vec<Var> = (0..n_pairs)
        .map(|_| model.new_var(VarRole::Primary, tier::BOND_ORDER))
        .collect();
    let vars = VariableMap {
        n_atoms: n,
        n_features: nf,
        x,
        a,
        db,
        tb,
    };

    let mut add = |terms: Vec<(i64, Var)>, rel: Relation, rhs: i64| {
        model
            .add_linear(terms, rel, rhs, g)
            .expect("structural coefficients are small");
    };
    let others = |v: usize| (0..n).filter(move |&u| u != v);

    // connectivity: every atom but the first bonds to a lower index
    for v in 1..n {
        add((0..v).map(|u| (1, vars.a(u, v))).collect(), Relation::Ge, 1);
    }
    // a double or triple bond needs a bond
    for v in 0..n {
        for u in 0..v {
            add(
                vec![(1, vars.db(u, v)), (1, vars.tb(u, v)), (-1, vars.a(u, v))],
                Relation::Le,
                0,
            );
        }
    }
    // one-hot type, neighbor count and hydrogen count
    for v in 0..n {
        for block in [
            layout.type_block(),
            layout.neighbor_block(),
            layout.hydrogen_block(),
        ] {
            add(block.map(|f| (1, vars.x(v, f))).collect(), Relation::Eq, 1);
        }
    }
    // neighbor count matches the adjacency row
    for v in 0..n {
        let mut terms: Vec<(i64, Var)> = others(v).map(|u| (1, vars.a(u, v))).collect();
        terms.extend(
            layout
                .neighbor_block()
                .enumerate()
                .map(|(i, f)| (-(i as i64 + 1), vars.x(v, f))),
        );
        add(terms, Relation::Eq, 0);
    }
    // bond-order flags need both endpoint features and the bond
    let (fdb, ftb) = (layout.double_bond_index(), layout.triple_bond_index());
    for v in 0..n {
        for u in 0..v {
            for (flag, f) in [(vars.db(u, v), fdb), (vars.tb(u, v), ftb)] {
                add(
                    vec![
                        (3, flag),
                        (-1, vars.x(u, f)),
                        (-1, vars.x(v, f)),
                        (-1, vars.a(u, v)),
                    ],
                    Relation::Le,
                    0,
                );
            }
        }
    }
    // capacity for double / triple bonds per atom type
    for v in 0..n {
        for (divisor, flag_of) in [(2, 0), (3, 1)] {
            let mut terms: Vec<(i64, Var)> = others(v)
                .map(|u| {
                    let flag = if flag_of == 0 {
                        vars.db(u, v)
                    } else {
                        vars.tb(u, v)
                    };
                    (1, flag)
                })
                .collect();
            terms.extend(
                layout
                    .type_block()
                    .map(|i| (-(i64::from(layout.covalences()[i] / divisor)), vars.x(v, i))),
            );
            add(terms, Relation::Le, 0);
        }
    }
    // the feature flags require at least one such bond
    for v in 0..n {
        let mut t_db = vec![(1, vars.x(v, fdb))];
        t_db.extend(others(v).map(|u| (-1, vars.db(u, v))));
        add(t_db, Relation::Le, 0);
        let mut t_tb = vec![(1, vars.x(v, ftb))];
        t_tb.extend(others(v).map(|u| (-1, vars.tb(u, v))));
        add(t_tb, Relation::Le, 0);
    }
    // covalence equation
    for v in 0..n {
        let mut terms: Vec<(i64, Var)> = layout
            .type_block()
            .map(|i| (i64::from(layout.covalences()[i]), vars.x(v, i)))
            .collect();
        terms.extend(
            layout
                .neighbor_block()
                .enumerate()
                .map(|(i, f)| (-(i as i64 + 1), vars.x(v, f))),
        );
        terms.extend(
            layout
                .hydrogen_block()
                .enumerate()
                .skip(1)
                .map(|(h, f)| (-(h as i64), vars.x(v, f))),
        );
        for u in others(v) {
            terms.push((-1, vars.db(u, v)));
            terms.push((-2, vars.tb(u, v)));
        }
        add(terms, Relation::Eq, 0);
    }
    // implied by the two equations above with H >= 0; lets bond decisions
    // see the remaining capacity before neighbor counts are fixed
    for v in 0..n {
        let mut terms: Vec<(i64, Var)> = Vec::new();
        for u in others(v) {
            terms.push((1, vars.a(u, v)));
            terms.push((1, vars.db(u, v)));
            terms.push((2, vars.tb(u, v)));
        }
        terms.extend(
            layout
                .type_block()
                .map(|i| (-i64::from(layout.covalences()[i]), vars.x(v, i))),
        );
        add(terms, Relation::Le, 0);
    }

    MolecularModel {
        layout: layout.clone(),
        vars,
        model,
        has_inclusion: false,
        has_symmetry: false,
    }
}

fn add_range(
    m: &mut MolecularModel,
    what: &str,
    terms: &[(i64, Var)],
    offset: i64,
    range: CountRange,
) -> Result<(), ModelError> {
    // constraint reads  Σ terms + offset ∈ [lb, ub]
    if let Some(lb) = range.lb {
        let g = m.model.group(&format!("lower bound of {what}"));
        m.model
            .add_linear(terms.iter().copied(), Relation::Ge, lb - offset, g)?;
    }
    if let Some(ub) = range.ub {
        let g = m.model.group(&format!("upper bound of {what}"));
        m.model
            .add_linear(terms.iter().copied(), Relation::Le, ub - offset, g)?;
    }
    Ok(())
}

/// Adds one constraint per finite bound side, grouped as
/// `lower bound of <thing>` / `upper bound of <thing>`.
pub fn encode_bounds(m: &mut MolecularModel, bounds: &Bounds) -> Result<(), BoundsError> {
    bounds.check_alignment(&m.layout)?;
    let n = m.layout.n_atoms();
    for (i, range) in bounds.atoms.iter().enumerate() {
        let terms: Vec<(i64, Var)> = (0..n).map(|v| (1, m.vars.x(v, i))).collect();
        let what = format!("atom {}", m.layout.atoms()[i]);
        add_range(m, &what, &terms, 0, *range)?;
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
    let db: Vec<(i64, Var)> = pairs.iter().map(|&(u, v)| (1, m.vars.db(u, v))).collect();
    add_range(m, "double bonds", &db, 0, bounds.double_bonds)?;
    let tb: Vec<(i64, Var)> = pairs.iter().map(|&(u, v)| (1, m.vars.tb(u, v))).collect();
    add_range(m, "triple bonds", &tb, 0, bounds.triple_bonds)?;
    let a: Vec<(i64, Var)> = pairs.iter().map(|&(u, v)| (1, m.vars.a(u, v))).collect();
    add_range(m, "rings", &a, -(n as i64 - 1), bounds.rings)?;
    if let Some(ub) = bounds.rings.ub {
        // every later atom already spends one edge on an earlier neighbor,
        // so no atom can have more than 1 + ub of them
        let g = m.model.group("upper bound of rings");
        for v in 2..n {
            if (v as i64) > 1 + ub {
                let terms = (0..v).map(|u| (1, m.vars.a(u, v)));
                m.model.add_linear(terms, Relation::Le, 1 + ub, g)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lexicographic atom ordering: atom 0 carries the smallest feature row,
/// and consecutive atoms `v, v+1` (`v >= 1`) have non-increasing adjacency
/// rows, positions `v` and `v+1` excluded.
pub fn encode_symmetry(m: &mut MolecularModel) -> Result<(), ModelError> {
    if m.has_inclusion {
        return Err(ModelError::SymmetryWithInclusion);
    }
    let n = m.layout.n_atoms();
    let nf = m.layout.n_features();
    let g = m.model.group(SYMMETRY);
    let row0: Vec<Var> = (0..nf).map(|f| m.vars.x(0, f)).collect();
    for v in 1..n {
        let row: Vec<Var> = (0..nf).map(|f| m.vars.x(v, f)).collect();
        m.model.add_lex(row0.clone(), row, LexRelation::LessEq, g)?;
    }
    for v in 1..n.saturating_sub(1) {
        let positions: Vec<usize> = (0..n).filter(|&u| u != v && u != v + 1).collect();
        let lhs = positions.iter().map(|&u| m.vars.a(u, v)).collect();
        let rhs = positions.iter().map(|&u| m.vars.a(u, v + 1)).collect();
        m.model.add_lex(lhs, rhs, LexRelation::GreaterEq, g)?;
    }
    m.has_symmetry = true;
    Ok(())
}
