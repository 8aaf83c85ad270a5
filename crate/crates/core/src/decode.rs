//! Assignment to graph decoding.

use crate::encoder::MolecularModel;
use crate::error::DecodeError;
use crate::molecule::MoleculeGraph;

fn one_hot(
    m: &MolecularModel,
    assignment: &[bool],
    atom: usize,
    block: std::ops::Range<usize>,
    name: &'static str,
) -> Result<usize, DecodeError> {
    let hot: Vec<usize> = block
        .clone()
        .filter(|&f| assignment[m.vars.x(atom, f).index()])
        .collect();
    match hot.as_slice() {
        [f] => Ok(f - block.start),
        _ => Err(DecodeError::NotOneHot {
            atom,
            block: name,
            active: hot.len(),
        }),
    }
}

/// Reads element, hydrogen count and bonds off a satisfying assignment.
pub fn assignment_to_graph(
    m: &MolecularModel,
    assignment: &[bool],
) -> Result<MoleculeGraph, DecodeError> {
    if assignment.len() < m.model.n_vars() {
        return Err(DecodeError::Length {
            expected: m.model.n_vars(),
            got: assignment.len(),
        });
    }
    let layout = &m.layout;
    let n = layout.n_atoms();
    let mut g = MoleculeGraph::new();
    for v in 0..n {
        let t = one_hot(m, assignment, v, layout.type_block(), "atom type")?;
        let h = one_hot(m, assignment, v, layout.hydrogen_block(), "hydrogens")?;
        g.add_atom(&layout.atoms()[t], h as u8);
    }
    for v in 0..n {
        for u in 0..v {
            let bit = |var: crate::pb::Var| assignment[var.index()];
            let (a, db, tb) = (
                bit(m.vars.a(u, v)),
                bit(m.vars.db(u, v)),
                bit(m.vars.tb(u, v)),
            );
            let order = match (a, db, tb) {
                (false, false, false) => continue,
                (true, false, false) => 1,
                (true, true, false) => 2,
                (true, false, true) => 3,
                _ => return Err(DecodeError::BondFlags { u, v }),
            };
            g.add_bond(u, v, order);
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::encode_structural;
    use crate::layout::FeatureLayout;

    fn ethene_assignment(m: &MolecularModel) -> Vec<bool> {
        let l = &m.layout;
        let mut a = vec![false; m.model.n_vars()];
        for v in 0..2 {
            a[m.vars.x(v, 0).index()] = true;
            a[m.vars.x(v, l.neighbor_index(1).unwrap()).index()] = true;
            a[m.vars.x(v, l.hydrogen_index(2).unwrap()).index()] = true;
            a[m.vars.x(v, l.double_bond_index()).index()] = true;
        }
        a[m.vars.a(0, 1).index()] = true;
        a[m.vars.db(0, 1).index()] = true;
        a
    }

    #[test]
    fn decodes_ethene() {
        let layout = FeatureLayout::with_defaults(&["C", "O"], 2).unwrap();
        let m = encode_structural(&layout);
        let a = ethene_assignment(&m);
        assert!(m
            .model
            .is_satisfied_by(&a, &crate::pb::ActiveGroups::all(&m.model)));
        let g = assignment_to_graph(&m, &a).unwrap();
        assert_eq!(g.atoms.len(), 2);
        assert!(g
            .atoms
            .iter()
            .all(|at| at.element == "C" && at.hydrogens == 2));
        assert_eq!(g.bond_order(0, 1), Some(2));
    }

    #[test]
    fn rejects_two_hot_types() {
        let layout = FeatureLayout::with_defaults(&["C", "O"], 2).unwrap();
        let m = encode_structural(&layout);
        let mut a = ethene_assignment(&m);
        a[m.vars.x(1, 1).index()] = true;
        assert_eq!(
            assignment_to_graph(&m, &a),
            Err(DecodeError::NotOneHot {
                atom: 1,
                block: "atom type",
                active: 2
            })
        );
    }
}
