//! Permutation-invariant molecule keys.
//!
//! Colors start from (element, hydrogens, degree, incident bond orders) and
//! are refined by neighbor color multisets. Remaining ties are broken by
//! individualizing each vertex of the first non-singleton cell in turn; the
//! lexicographically smallest relabeled graph wins and its SMILES is the key.
//! Automorphisms found between equal leaves prune sibling branches.

use std::cmp::Ordering;

use crate::molecule::MoleculeGraph;
use crate::smiles::graph_to_smiles;

type Adj = Vec<Vec<(usize, u8)>>;

/// Dense ranks of `keys` in sorted order.
fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn n_cells(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |&m| m + 1)
}

/// Splits cells until neighbor color multisets agree within every cell.
fn refine(adj: &Adj, mut colors: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = adj
            .iter()
            .enumerate()
            .map(|(v, list)| {
                let mut nb: Vec<(usize, u8)> = list.iter().map(|&(w, o)| (colors[w], o)).collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&keys);
        if n_cells(&next) == n_cells(&colors) {
            return next;
        }
        colors = next;
    }
}

fn initial_colors(g: &MoleculeGraph, adj: &Adj) -> Vec<usize> {
    let keys: Vec<(&str, u8, usize, Vec<u8>)> = g
        .atoms
        .iter()
        .enumerate()
        .map(|(v, a)| {
            let mut orders: Vec<u8> = adj[v].iter().map(|&(_, o)| o).collect();
            orders.sort_unstable();
            (a.element.as_str(), a.hydrogens, adj[v].len(), orders)
        })
        .collect();
    rank(&keys)
}

/// Comparable form of `g` relabeled so atom `v` gets position `labels[v]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Certificate {
    atoms: Vec<(String, u8)>,
    bonds: Vec<(usize, usize, u8)>,
}

fn certificate(g: &MoleculeGraph, labels: &[usize]) -> Certificate {
    let mut atoms = vec![(String::new(), 0); g.len()];
    for (v, a) in g.atoms.iter().enumerate() {
        atoms[labels[v]] = (a.element.clone(), a.hydrogens);
    }
    let mut bonds: Vec<(usize, usize, u8)> = g
        .bonds
        .iter()
        .map(|b| {
            let (x, y) = (labels[b.u], labels[b.v]);
            (x.min(y), x.max(y), b.order)
        })
        .collect();
    bonds.sort_unstable();
    Certificate { atoms, bonds }
}

struct Search<'a> {
    g: &'a MoleculeGraph,
    adj: Adj,
    best: Option<(Certificate, Vec<usize>)>,
    /// Automorphisms as vertex maps.
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn leaf(&mut self, labels: Vec<usize>) {
        let cert = certificate(self.g, &labels);
        match &self.best {
            None => self.best = Some((cert, labels)),
            Some((best, best_labels)) => match cert.cmp(best) {
                Ordering::Less => self.best = Some((cert, labels)),
                Ordering::Equal => {
                    // labels^-1 . best_labels maps this leaf onto the best one
                    let n = labels.len();
                    let mut inv = vec![0; n];
                    for (v, &l) in labels.iter().enumerate() {
                        inv[l] = v;
                    }
                    let gamma: Vec<usize> = (0..n).map(|v| inv[best_labels[v]]).collect();
                    if gamma.iter().enumerate().any(|(v, &w)| v != w) {
                        self.automorphisms.push(gamma);
                    }
                }
                Ordering::Greater => {}
            },
        }
    }

    /// Orbits of the subgroup generated by automorphisms fixing `fixed`.
    fn orbits(&self, fixed: &[usize]) -> Vec<usize> {
        let n = self.g.len();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut v: usize) -> usize {
            while root[v] != v {
                root[v] = root[root[v]];
                v = root[v];
            }
            v
        }
        for gamma in &self.automorphisms {
            if fixed.iter().all(|&v| gamma[v] == v) {
                for (v, &g) in gamma.iter().enumerate() {
                    let (a, b) = (find(&mut root, v), find(&mut root, g));
                    if a != b {
                        root[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        (0..n).map(|v| find(&mut root, v)).collect()
    }

    fn explore(&mut self, colors: Vec<usize>, fixed: &mut Vec<usize>) {
        let n = colors.len();
        let cells = n_cells(&colors);
        if cells == n {
            self.leaf(colors);
            return;
        }
        let mut size = vec![0usize; cells];
        for &c in &colors {
            size[c] += 1;
        }
        let target = (0..cells).find(|&c| size[c] > 1).expect("non-discrete");
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &members {
            if !tried.is_empty() {
                let orbit = self.orbits(fixed);
                if tried.iter().any(|&w| orbit[w] == orbit[v]) {
                    continue;
                }
            }
            tried.push(v);
            // v goes first within its cell
            let keys: Vec<(usize, bool)> = (0..n).map(|u| (colors[u], u != v)).collect();
            let split = refine(&self.adj, rank(&keys));
            fixed.push(v);
            self.explore(split, fixed);
            fixed.pop();
        }
    }
}

/// Canonical labeling: `labels[v]` is the new index of atom `v`.
pub fn canonical_labels(g: &MoleculeGraph) -> Vec<usize> {
    if g.is_empty() {
        return Vec::new();
    }
    let adj = g.adjacency();
    let start = refine(&adj, initial_colors(g, &adj));
    let mut search = Search {
        g,
        adj,
        best: None,
        automorphisms: Vec::new(),
    };
    search.explore(start, &mut Vec::new());
    search.best.expect("at least one leaf").1
}

/// Text key equal for two graphs iff they are isomorphic with matching
/// elements, hydrogen counts and bond orders.
pub fn canonical_form(g: &MoleculeGraph) -> String {
    let labels = canonical_labels(g);
    graph_to_smiles(&g.permuted(&labels))
}
