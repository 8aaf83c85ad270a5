//! Post-generation screening: substructure matching and pool deduplication.

use std::collections::HashSet;

use crate::canon::canonical_form;
use crate::molecule::MoleculeGraph;
use crate::par::{self, Execution};
use crate::smarts::{Pattern, TypeSet};

fn atom_ok(p: &Pattern, k: usize, g: &MoleculeGraph, adj: &[Vec<(usize, u8)>], v: usize) -> bool {
    let pa = &p.atoms[k];
    let atom = &g.atoms[v];
    if let TypeSet::Elements(els) = &pa.types {
        if !els.contains(&atom.element) {
            return false;
        }
    }
    if pa.h_count.is_some_and(|h| h != atom.hydrogens) {
        return false;
    }
    if pa
        .neighbor_count
        .is_some_and(|d| usize::from(d) != adj[v].len())
    {
        return false;
    }
    true
}

fn bond_order(adj: &[Vec<(usize, u8)>], u: usize, v: usize) -> Option<u8> {
    adj[u]
        .binary_search_by_key(&v, |&(w, _)| w)
        .ok()
        .map(|i| adj[u][i].1)
}

/// Pattern atoms in breadth-first order so each one after the first of its
/// component has an earlier neighbor.
fn match_order(p: &Pattern) -> Vec<(usize, Option<usize>)> {
    let n = p.n();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push((root, None));
        let mut head = order.len() - 1;
        while head < order.len() {
            let (k, _) = order[head];
            head += 1;
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && p.bond_between(k, j).is_some() {
                    *s = true;
                    order.push((j, Some(k)));
                }
            }
        }
    }
    order
}

struct Matcher<'a> {
    p: &'a Pattern,
    g: &'a MoleculeGraph,
    adj: Vec<Vec<(usize, u8)>>,
    order: Vec<(usize, Option<usize>)>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn consistent(&self, k: usize, v: usize) -> bool {
        if !atom_ok(self.p, k, self.g, &self.adj, v) {
            return false;
        }
        for (j, w) in self.map.iter().enumerate() {
            let Some(w) = *w else { continue };
            match self.p.bond_between(k, j) {
                Some(orders) => match bond_order(&self.adj, v, w) {
                    Some(o) if orders.contains(o) => {}
                    _ => return false,
                },
                None => {
                    if self.p.induced && bond_order(&self.adj, v, w).is_some() {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn search(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let (k, anchor) = self.order[depth];
        let candidates: Vec<usize> = match anchor.and_then(|a| self.map[a]) {
            Some(w) => self.adj[w].iter().map(|&(x, _)| x).collect(),
            None => (0..self.g.len()).collect(),
        };
        for v in candidates {
            if self.used[v] || !self.consistent(k, v) {
                continue;
            }
            self.map[k] = Some(v);
            self.used[v] = true;
            if self.search(depth + 1) {
                return true;
            }
            self.map[k] = None;
            self.used[v] = false;
        }
        false
    }
}

/// Whether some injective map of pattern atoms to molecule atoms satisfies
/// every atom and bond requirement of `p`.
pub fn matches(p: &Pattern, g: &MoleculeGraph) -> bool {
    if p.n() == 0 {
        return true;
    }
    if p.n() > g.len() {
        return false;
    }
    let mut m = Matcher {
        p,
        g,
        adj: g.adjacency(),
        order: match_order(p),
        map: vec![None; p.n()],
        used: vec![false; g.len()],
    };
    m.search(0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validated {
    pub graph: MoleculeGraph,
    pub key: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PoolReport {
    pub molecules: Vec<Validated>,
    pub duplicates: usize,
    /// Molecules dropped because a deferred pattern matched.
    pub rejected: usize,
}

/// Deduplicates by canonical form keeping first-seen order and drops
/// molecules matched by any `check_later` pattern.
pub fn validate_pool_with(
    mols: &[MoleculeGraph],
    check_later: &[Pattern],
    exec: Execution,
) -> PoolReport {
    let screened: Vec<(String, bool)> = par::map(exec, mols, |g| {
        (canonical_form(g), check_later.iter().any(|p| matches(p, g)))
    });
    let mut seen = HashSet::new();
    let mut report = PoolReport::default();
    for (g, (key, hit)) in mols.iter().zip(screened) {
        if !seen.insert(key.clone()) {
            report.duplicates += 1;
        } else if hit {
            report.rejected += 1;
        } else {
            report.molecules.push(Validated {
                graph: g.clone(),
                key,
            });
        }
    }
    report
}

pub fn validate_pool(mols: &[MoleculeGraph], check_later: &[Pattern]) -> Vec<MoleculeGraph> {
    validate_pool_with(mols, check_later, Execution::default())
        .molecules
        .into_iter()
        .map(|v| v.graph)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::FeatureLayout;
    use crate::smarts::parse_pattern;
    use crate::smiles::parse_smiles;

    fn layout() -> FeatureLayout {
        FeatureLayout::with_defaults(&["C", "N", "O", "S"], 20).unwrap()
    }

    fn mol(s: &str) -> MoleculeGraph {
        parse_smiles(s, &layout()).unwrap()
    }

    fn pat(s: &str) -> Pattern {
        parse_pattern(s, &layout()).unwrap()
    }

    #[test]
    fn reference_matches() {
        let aspirin = mol("CC(=O)OC1=CC=CC=C1C(=O)O");
        assert!(!matches(&pat("S"), &mol("CCO")));
        assert!(matches(&pat("C1=[CH][CH]=[CH][CH]=C1"), &aspirin));
        assert!(matches(&pat("O=C-[OH1]"), &aspirin));
        assert!(matches(&pat("[OH0X2]"), &aspirin));
        assert!(matches(&pat("[CH3]"), &aspirin));
        assert!(!matches(&pat("[CH]1=[CH][CH]=[CH][CH]=C1"), &aspirin));
        assert!(matches(&pat("[CH0]"), &mol("CC(C)(C)C")));
        assert!(!matches(&pat("[CH0]"), &mol("CC(C)C")));
    }

    #[test]
    fn bond_orders_respected() {
        let g = mol("CC=O");
        assert!(matches(&pat("C=O"), &g));
        assert!(!matches(&pat("C-O"), &g));
        assert!(matches(&pat("C~O"), &g));
        assert!(!matches(&pat("C#O"), &g));
    }

    #[test]
    fn injective_only() {
        // one oxygen cannot serve both ends
        assert!(!matches(&pat("O~C~O"), &mol("CCO")));
        assert!(matches(&pat("O~C~O"), &mol("OCO")));
    }

    #[test]
    fn induced_option() {
        let g = mol("C1CC1");
        assert!(matches(&pat("CCC"), &g));
        assert!(!matches(&pat("CCC").with_induced(true), &g));
    }

    #[test]
    fn permuted_duplicates_collapse() {
        let g = mol("CCOC=O");
        let p: Vec<usize> = (0..g.len()).rev().collect();
        let pool = vec![g.clone(), g.permuted(&p), mol("OCC=O")];
        let out = validate_pool(&pool, &[]);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0], g);
        assert_eq!(validate_pool(&out, &[]), out);
    }

    #[test]
    fn deferred_patterns_filter() {
        let pool = vec![mol("CCS"), mol("CCO"), mol("SCS")];
        let report = validate_pool_with(&pool, &[pat("S")], Execution::Sequential);
        assert_eq!(report.molecules.len(), 1);
        assert_eq!(report.rejected, 2);
        assert_eq!(report.molecules[0].graph, pool[1]);
    }
}
