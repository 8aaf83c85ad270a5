//! Per-atom feature layout and composition bounds.
//!
//! Every heavy atom is described by a row of binary features split into five
//! blocks: atom type (one-hot over the alphabet), number of heavy-atom
//! neighbors (one-hot over `1..=max_cov`), number of implicit hydrogens
//! (one-hot over `0..=max_cov`), and two flags marking whether the atom
//! takes part in a double or a triple bond.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::LayoutError;

/// Covalences shipped by default. Anything else needs an explicit override.
pub const DEFAULT_COVALENCES: [(&str, u32); 4] = [("C", 4), ("N", 3), ("O", 2), ("S", 2)];

pub fn default_covalence(element: &str) -> Option<u32> {
    DEFAULT_COVALENCES
        .iter()
        .find(|(sym, _)| *sym == element)
        .map(|&(_, cov)| cov)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    atoms: Vec<String>,
    covalences: Vec<u32>,
    n_atoms: usize,
    max_cov: usize,
}

impl FeatureLayout {
    /// Builds a layout for `n_atoms` heavy atoms drawn from `atoms`.
    ///
    /// Covalences come from `overrides` first and the default table second.
    pub fn new(
        atoms: &[impl AsRef<str>],
        n_atoms: usize,
        overrides: &BTreeMap<String, u32>,
    ) -> Result<Self, LayoutError> {
        if atoms.is_empty() {
            return Err(LayoutError::EmptyAlphabet);
        }
        if n_atoms < 2 {
            return Err(LayoutError::TooFewAtoms(n_atoms));
        }
        let mut names: Vec<String> = Vec::with_capacity(atoms.len());
        let mut covalences = Vec::with_capacity(atoms.len());
        for sym in atoms {
            let sym = sym.as_ref();
            if names.iter().any(|n| n == sym) {
                return Err(LayoutError::DuplicateElement(sym.to_string()));
            }
            let cov = overrides
                .get(sym)
                .copied()
                .or_else(|| default_covalence(sym))
                .ok_or_else(|| LayoutError::UnknownCovalence(sym.to_string()))?;
            if cov == 0 {
                return Err(LayoutError::ZeroCovalence(sym.to_string()));
            }
            names.push(sym.to_string());
            covalences.push(cov);
        }
        let max_cov = *covalences.iter().max().expect("non-empty") as usize;
        Ok(Self {
            atoms: names,
            covalences,
            n_atoms,
            max_cov,
        })
    }

    /// Layout with default covalences only.
    pub fn with_defaults(atoms: &[impl AsRef<str>], n_atoms: usize) -> Result<Self, LayoutError> {
        Self::new(atoms, n_atoms, &BTreeMap::new())
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn covalences(&self) -> &[u32] {
        &self.covalences
    }

    pub fn covalence_of(&self, element: &str) -> Option<u32> {
        self.type_index(element).map(|i| self.covalences[i])
    }

    pub fn type_index(&self, element: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == element)
    }

    /// Number of heavy atoms, `N`.
    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_types(&self) -> usize {
        self.atoms.len()
    }

    pub fn max_cov(&self) -> usize {
        self.max_cov
    }

    pub fn n_neighbors(&self) -> usize {
        self.max_cov
    }

    pub fn n_hydrogens(&self) -> usize {
        self.max_cov + 1
    }

    pub fn n_features(&self) -> usize {
        self.n_types() + self.n_neighbors() + self.n_hydrogens() + 2
    }

    pub fn type_block(&self) -> Range<usize> {
        0..self.n_types()
    }

    pub fn neighbor_block(&self) -> Range<usize> {
        let start = self.n_types();
        start..start + self.n_neighbors()
    }

    pub fn hydrogen_block(&self) -> Range<usize> {
        let start = self.n_types() + self.n_neighbors();
        start..start + self.n_hydrogens()
    }

    pub fn double_bond_index(&self) -> usize {
        self.n_types() + self.n_neighbors() + self.n_hydrogens()
    }

    pub fn triple_bond_index(&self) -> usize {
        self.double_bond_index() + 1
    }

    /// Feature index encoding "has `degree` heavy neighbors", if representable.
    pub fn neighbor_index(&self, degree: usize) -> Option<usize> {
        (1..=self.max_cov)
            .contains(&degree)
            .then(|| self.n_types() + degree - 1)
    }

    /// Feature index encoding "carries `h` implicit hydrogens", if representable.
    pub fn hydrogen_index(&self, h: usize) -> Option<usize> {
        (h <= self.max_cov).then(|| self.n_types() + self.n_neighbors() + h)
    }
}

/// An optional closed interval; a missing side is unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub lb: Option<i64>,
    pub ub: Option<i64>,
}

impl CountRange {
    pub const UNBOUNDED: CountRange = CountRange { lb: None, ub: None };

    pub fn new(lb: Option<i64>, ub: Option<i64>) -> Self {
        Self { lb, ub }
    }

    pub fn exactly(value: i64) -> Self {
        Self::new(Some(value), Some(value))
    }

    pub fn contains(&self, value: i64) -> bool {
        self.lb.is_none_or(|lb| value >= lb) && self.ub.is_none_or(|ub| value <= ub)
    }

    pub fn is_unbounded(&self) -> bool {
        self.lb.is_none() && self.ub.is_none()
    }
}

/// Composition bounds on atom types, double/triple bonds and rings.
///
/// `atoms` is either empty (no per-type bounds) or aligned with the layout's
/// alphabet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bounds {
    pub atoms: Vec<CountRange>,
    pub double_bonds: CountRange,
    pub triple_bonds: CountRange,
    pub rings: CountRange,
}

impl Bounds {
    pub fn none() -> Self {
        Self::default()
    }

    /// Per-type bounds from two optional arrays, mirroring `bounds_atoms(lb, ub)`.
    pub fn set_atoms(
        &mut self,
        lb: Option<&[Option<i64>]>,
        ub: Option<&[Option<i64>]>,
        n_types: usize,
    ) -> Result<(), LayoutError> {
        for side in [lb, ub].into_iter().flatten() {
            if side.len() != n_types {
                return Err(LayoutError::MisalignedBounds {
                    expected: n_types,
                    got: side.len(),
                });
            }
        }
        self.atoms = (0..n_types)
            .map(|i| CountRange {
                lb: lb.and_then(|l| l[i]),
                ub: ub.and_then(|u| u[i]),
            })
            .collect();
        Ok(())
    }

    pub fn check_alignment(&self, layout: &FeatureLayout) -> Result<(), LayoutError> {
        if !self.atoms.is_empty() && self.atoms.len() != layout.n_types() {
            return Err(LayoutError::MisalignedBounds {
                expected: layout.n_types(),
                got: self.atoms.len(),
            });
        }
        Ok(())
    }

    /// Lower bound above upper bound on any side.
    pub fn first_inverted(&self, layout: &FeatureLayout) -> Option<String> {
        let named = self
            .atoms
            .iter()
            .zip(layout.atoms())
            .map(|(r, a)| (format!("atom {a}"), *r))
            .chain([
                ("double bonds".to_string(), self.double_bonds),
                ("triple bonds".to_string(), self.triple_bonds),
                ("rings".to_string(), self.rings),
            ]);
        for (name, r) in named {
            if let (Some(lb), Some(ub)) = (r.lb, r.ub) {
                if lb > ub {
                    return Some(name);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_element_layout_matches_reference_table() {
        let l = FeatureLayout::with_defaults(&["C", "N", "O", "S"], 10).unwrap();
        assert_eq!(l.n_features(), 15);
        assert_eq!(l.n_types(), 4);
        assert_eq!(l.n_neighbors(), 4);
        assert_eq!(l.n_hydrogens(), 5);
        assert_eq!(l.type_block(), 0..4);
        assert_eq!(l.neighbor_block(), 4..8);
        assert_eq!(l.hydrogen_block(), 8..13);
        assert_eq!(l.double_bond_index(), 13);
        assert_eq!(l.triple_bond_index(), 14);
        assert_eq!(l.covalences(), &[4, 3, 2, 2]);
    }

    #[test]
    fn carbon_oxygen_layout() {
        let l = FeatureLayout::with_defaults(&["C", "O"], 13).unwrap();
        assert_eq!(l.n_features(), 13);
        assert_eq!(l.n_types(), 2);
        assert_eq!(l.n_neighbors(), 4);
        assert_eq!(l.n_hydrogens(), 5);
        assert_eq!(l.neighbor_index(1), Some(2));
        assert_eq!(l.neighbor_index(0), None);
        assert_eq!(l.hydrogen_index(4), Some(10));
        assert_eq!(l.hydrogen_index(5), None);
    }

    #[test]
    fn single_atom_rejected() {
        assert_eq!(
            FeatureLayout::with_defaults(&["C"], 1),
            Err(LayoutError::TooFewAtoms(1))
        );
    }

    #[test]
    fn unknown_element_needs_override() {
        assert!(matches!(
            FeatureLayout::with_defaults(&["C", "Si"], 4),
            Err(LayoutError::UnknownCovalence(_))
        ));
        let mut ov = BTreeMap::new();
        ov.insert("Si".to_string(), 4);
        let l = FeatureLayout::new(&["C", "Si"], 4, &ov).unwrap();
        assert_eq!(l.covalence_of("Si"), Some(4));
    }

    #[test]
    fn duplicates_and_empty_rejected() {
        assert!(matches!(
            FeatureLayout::with_defaults(&["C", "C"], 4),
            Err(LayoutError::DuplicateElement(_))
        ));
        let empty: [&str; 0] = [];
        assert_eq!(
            FeatureLayout::with_defaults(&empty, 4),
            Err(LayoutError::EmptyAlphabet)
        );
    }

    #[test]
    fn misaligned_atom_bounds() {
        let mut b = Bounds::none();
        let err = b.set_atoms(Some(&[Some(1)]), None, 2).unwrap_err();
        assert!(matches!(
            err,
            LayoutError::MisalignedBounds {
                expected: 2,
                got: 1
            }
        ));
    }
}
