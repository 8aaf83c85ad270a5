//! Decoded molecular graphs and an independent validity checker.

use std::collections::BTreeSet;
use std::fmt;

use crate::layout::{Bounds, CountRange, FeatureLayout};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: String,
    pub hydrogens: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub u: usize,
    pub v: usize,
    pub order: u8,
}

/// Heavy-atom graph with implicit hydrogen counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MoleculeGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

impl MoleculeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, element: &str, hydrogens: u8) -> usize {
        self.atoms.push(Atom {
            element: element.to_string(),
            hydrogens,
        });
        self.atoms.len() - 1
    }

    /// Adds a bond, normalizing endpoint order so that `u < v`.
    pub fn add_bond(&mut self, a: usize, b: usize, order: u8) {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.bonds.push(Bond { u, v, order });
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Neighbor lists as `(neighbor, order)`, sorted by neighbor index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u8)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for b in &self.bonds {
            if b.u < adj.len() && b.v < adj.len() {
                adj[b.u].push((b.v, b.order));
                adj[b.v].push((b.u, b.order));
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn bond_order(&self, a: usize, b: usize) -> Option<u8> {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.bonds
            .iter()
            .find(|bd| bd.u == u && bd.v == v)
            .map(|bd| bd.order)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.bonds.iter().filter(|b| b.u == v || b.v == v).count()
    }

    pub fn count_bonds_of_order(&self, order: u8) -> usize {
        self.bonds.iter().filter(|b| b.order == order).count()
    }

    /// Cyclomatic number `edges - (atoms - 1)`; meaningful for connected graphs.
    pub fn ring_count(&self) -> i64 {
        self.bonds.len() as i64 - (self.atoms.len() as i64 - 1)
    }

    pub fn is_connected(&self) -> bool {
        if self.atoms.is_empty() {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Relabels atoms so that old atom `i` becomes new atom `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MoleculeGraph {
        assert_eq!(perm.len(), self.atoms.len());
        let mut atoms = self.atoms.clone();
        for (old, atom) in self.atoms.iter().enumerate() {
            atoms[perm[old]] = atom.clone();
        }
        let mut g = MoleculeGraph {
            atoms,
            bonds: Vec::with_capacity(self.bonds.len()),
        };
        for b in &self.bonds {
            g.add_bond(perm[b.u], perm[b.v], b.order);
        }
        g.bonds.sort_unstable();
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AtomCount {
        expected: usize,
        found: usize,
    },
    MalformedBond {
        u: usize,
        v: usize,
        order: u8,
    },
    DuplicateBond {
        u: usize,
        v: usize,
    },
    Disconnected,
    UnknownElement {
        atom: usize,
        element: String,
    },
    Degree {
        atom: usize,
        degree: usize,
    },
    Hydrogens {
        atom: usize,
        hydrogens: u8,
    },
    Covalence {
        atom: usize,
        expected: u32,
        found: u32,
    },
    Bound {
        what: String,
        value: i64,
        range: CountRange,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AtomCount { expected, found } => {
                write!(f, "expected {expected} atoms, found {found}")
            }
            Violation::MalformedBond { u, v, order } => {
                write!(f, "malformed bond {u}-{v} of order {order}")
            }
            Violation::DuplicateBond { u, v } => write!(f, "duplicate bond {u}-{v}"),
            Violation::Disconnected => write!(f, "graph is not connected"),
            Violation::UnknownElement { atom, element } => {
                write!(f, "atom {atom}: element {element} not in alphabet")
            }
            Violation::Degree { atom, degree } => {
                write!(f, "atom {atom}: degree {degree} out of range")
            }
            Violation::Hydrogens { atom, hydrogens } => {
                write!(f, "atom {atom}: {hydrogens} hydrogens out of range")
            }
            Violation::Covalence {
                atom,
                expected,
                found,
            } => write!(
                f,
                "atom {atom}: covalence {expected} but bonds+H use {found}"
            ),
            Violation::Bound { what, value, range } => {
                write!(
                    f,
                    "{what} = {value} outside [{:?}, {:?}]",
                    range.lb, range.ub
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a decoded graph against the structural rules and `bounds`,
/// working purely on the graph (no model variables involved).
pub fn check_molecule(
    g: &MoleculeGraph,
    layout: &FeatureLayout,
    bounds: &Bounds,
) -> ValidityReport {
    let mut violations = Vec::new();
    let n = g.atoms.len();
    if n != layout.n_atoms() {
        violations.push(Violation::AtomCount {
            expected: layout.n_atoms(),
            found: n,
        });
    }

    let mut seen = BTreeSet::new();
    for b in &g.bonds {
        if b.u >= b.v || b.v >= n || !(1..=3).contains(&b.order) {
            violations.push(Violation::MalformedBond {
                u: b.u,
                v: b.v,
                order: b.order,
            });
        } else if !seen.insert((b.u, b.v)) {
            violations.push(Violation::DuplicateBond { u: b.u, v: b.v });
        }
    }
    if !g.is_connected() {
        violations.push(Violation::Disconnected);
    }

    let mut degree = vec![0usize; n];
    let mut extra = vec![0u32; n];
    for b in g.bonds.iter().filter(|b| b.u < b.v && b.v < n) {
        for end in [b.u, b.v] {
            degree[end] += 1;
            extra[end] += u32::from(b.order.saturating_sub(1));
        }
    }
    let max_cov = layout.max_cov();
    for (i, atom) in g.atoms.iter().enumerate() {
        if !(1..=max_cov).contains(&degree[i]) {
            violations.push(Violation::Degree {
                atom: i,
                degree: degree[i],
            });
        }
        if usize::from(atom.hydrogens) > max_cov {
            violations.push(Violation::Hydrogens {
                atom: i,
                hydrogens: atom.hydrogens,
            });
        }
        match layout.covalence_of(&atom.element) {
            None => violations.push(Violation::UnknownElement {
                atom: i,
                element: atom.element.clone(),
            }),
            Some(cov) => {
                let used = degree[i] as u32 + u32::from(atom.hydrogens) + extra[i];
                if used != cov {
                    violations.push(Violation::Covalence {
                        atom: i,
                        expected: cov,
                        found: used,
                    });
                }
            }
        }
    }

    let mut check = |what: String, value: i64, range: CountRange| {
        if !range.contains(value) {
            violations.push(Violation::Bound { what, value, range });
        }
    };
    for (i, range) in bounds.atoms.iter().enumerate() {
        if let Some(sym) = layout.atoms().get(i) {
            let count = g.atoms.iter().filter(|a| &a.element == sym).count() as i64;
            check(format!("atom {sym}"), count, *range);
        }
    }
    check(
        "double bonds".into(),
        g.count_bonds_of_order(2) as i64,
        bounds.double_bonds,
    );
    check(
        "triple bonds".into(),
        g.count_bonds_of_order(3) as i64,
        bounds.triple_bonds,
    );
    check("rings".into(), g.ring_count(), bounds.rings);

    ValidityReport { violations }
}
