#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use molgen_core::layout::default_covalence;
use molgen_core::molecule::MoleculeGraph;
use molgen_core::pb::{LexRelation, PbModel, Relation, Var, VarRole};

/// A connected molecule on `n` atoms drawn from `elements`, every bond
/// within covalence and the remainder filled with hydrogens.
pub fn random_molecule(rng: &mut impl Rng, n: usize, elements: &[&str]) -> MoleculeGraph {
    'attempt: loop {
        let el: Vec<&str> = (0..n)
            .map(|_| *elements.choose(rng).expect("non-empty alphabet"))
            .collect();
        let cov: Vec<u32> = el.iter().map(|e| default_covalence(e).unwrap()).collect();
        let mut used = vec![0u32; n];
        let mut order = vec![vec![0u8; n]; n];
        for j in 1..n {
            let open: Vec<usize> = (0..j).filter(|&i| used[i] < cov[i]).collect();
            let Some(&i) = open.choose(rng) else {
                continue 'attempt;
            };
            let room = (cov[i] - used[i]).min(cov[j]).min(3);
            let o = rng.gen_range(1..=room);
            used[i] += o;
            used[j] += o;
            order[i][j] = o as u8;
        }
        for _ in 0..rng.gen_range(0..=n) {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i >= j || order[i][j] > 0 || used[i] >= cov[i] || used[j] >= cov[j] {
                continue;
            }
            let room = (cov[i] - used[i]).min(cov[j] - used[j]).min(3);
            let o = rng.gen_range(1..=room);
            used[i] += o;
            used[j] += o;
            order[i][j] = o as u8;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let mut g = MoleculeGraph::new();
        let mut placed = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            placed[old] = new;
        }
        for &old in &perm {
            g.add_atom(el[old], (cov[old] - used[old]) as u8);
        }
        for i in 0..n {
            for j in i + 1..n {
                if order[i][j] > 0 {
                    g.add_bond(placed[i], placed[j], order[i][j]);
                }
            }
        }
        g.bonds.sort();
        return g;
    }
}

pub type BruteKey = (Vec<(String, u8)>, Vec<u8>);

/// Smallest (atom labels, adjacency matrix) encoding over all permutations.
pub fn brute_key(g: &MoleculeGraph) -> BruteKey {
    let n = g.len();
    let mut adj = vec![0u8; n * n];
    for b in &g.bonds {
        adj[b.u * n + b.v] = b.order;
        adj[b.v * n + b.u] = b.order;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<BruteKey> = None;
    loop {
        let atoms: Vec<(String, u8)> = perm
            .iter()
            .map(|&i| (g.atoms[i].element.clone(), g.atoms[i].hydrogens))
            .collect();
        let better = best.as_ref().is_none_or(|b| atoms <= b.0);
        if better {
            let mut m = vec![0u8; n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = adj[perm[i] * n + perm[j]];
                }
            }
            let key = (atoms, m);
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.expect("at least one permutation")
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Debug, Clone)]
pub enum Constraint {
    Linear(Vec<(i64, usize)>, Relation, i64),
    Lex(Vec<usize>, Vec<usize>, LexRelation),
}

impl Constraint {
    pub fn holds(&self, a: &[bool]) -> bool {
        match self {
            Constraint::Linear(terms, rel, rhs) => {
                let lhs: i64 = terms.iter().filter(|t| a[t.1]).map(|t| t.0).sum();
                match rel {
                    Relation::Le => lhs <= *rhs,
                    Relation::Ge => lhs >= *rhs,
                    Relation::Eq => lhs == *rhs,
                }
            }
            Constraint::Lex(l, r, rel) => {
                let lv: Vec<bool> = l.iter().map(|&i| a[i]).collect();
                let rv: Vec<bool> = r.iter().map(|&i| a[i]).collect();
                match rel {
                    LexRelation::LessEq => lv <= rv,
                    LexRelation::GreaterEq => lv >= rv,
                }
            }
        }
    }
}

pub fn random_constraint(rng: &mut impl Rng, n: usize) -> Constraint {
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    if n >= 2 && rng.gen_bool(0.2) {
        let len = rng.gen_range(1..=n / 2);
        let rel = if rng.gen_bool(0.5) {
            LexRelation::LessEq
        } else {
            LexRelation::GreaterEq
        };
        return Constraint::Lex(vars[..len].to_vec(), vars[len..2 * len].to_vec(), rel);
    }
    let size = rng.gen_range(1..=n.min(6));
    let terms: Vec<(i64, usize)> = vars[..size]
        .iter()
        .map(|&v| {
            let sign = if rng.gen_bool(0.3) { -1 } else { 1 };
            (sign * rng.gen_range(1..=4), v)
        })
        .collect();
    let rel = match rng.gen_range(0..5) {
        0 => Relation::Eq,
        1 | 2 => Relation::Le,
        _ => Relation::Ge,
    };
    Constraint::Linear(terms, rel, rng.gen_range(-2..=size as i64 + 2))
}

/// Adds `c` to `m` under `group`.
pub fn add_to_model(m: &mut PbModel, vars: &[Var], c: &Constraint, group: &str) {
    let g = m.group(group);
    match c {
        Constraint::Linear(terms, rel, rhs) => m
            .add_linear(terms.iter().map(|&(k, v)| (k, vars[v])), *rel, *rhs, g)
            .unwrap(),
        Constraint::Lex(l, r, rel) => m
            .add_lex(
                l.iter().map(|&i| vars[i]).collect(),
                r.iter().map(|&i| vars[i]).collect(),
                *rel,
                g,
            )
            .unwrap(),
    }
}

pub fn primary_vars(m: &mut PbModel, n: usize) -> Vec<Var> {
    (0..n).map(|_| m.new_var(VarRole::Primary, 0)).collect()
}

pub fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}
