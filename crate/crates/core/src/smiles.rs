//! Kekulé SMILES output and a matching parser for the emitted subset.

use crate::layout::FeatureLayout;
use crate::molecule::MoleculeGraph;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected `{token}` at position {pos}")]
    Unexpected { token: String, pos: usize },
    #[error("unsupported `{token}` at position {pos}")]
    Unsupported { token: String, pos: usize },
    #[error("element {element} at position {pos} is not in the atom alphabet")]
    UnknownElement { element: String, pos: usize },
    #[error("ring label {label} is never closed")]
    UnclosedRing { label: usize },
    #[error("unbalanced parentheses at position {pos}")]
    Parenthesis { pos: usize },
    #[error("atoms {u} and {v} are bonded twice")]
    DuplicateBond { u: usize, v: usize },
    #[error("SMILES ends unexpectedly")]
    UnexpectedEnd,
}

const ORGANIC: &[&str] = &["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];

fn standard_valences(element: &str) -> &'static [u32] {
    match element {
        "B" => &[3],
        "C" => &[4],
        "N" => &[3, 5],
        "O" => &[2],
        "P" => &[3, 5],
        "S" => &[2, 4, 6],
        "F" | "Cl" | "Br" | "I" => &[1],
        _ => &[],
    }
}

/// Hydrogens a bare organic-subset atom carries given its bond-order sum.
pub fn implicit_hydrogens(element: &str, bond_sum: u32) -> u32 {
    standard_valences(element)
        .iter()
        .find(|&&v| v >= bond_sum)
        .map_or(0, |&v| v - bond_sum)
}

fn atom_text(element: &str, hydrogens: u8, bond_sum: u32) -> String {
    if ORGANIC.contains(&element) && implicit_hydrogens(element, bond_sum) == u32::from(hydrogens) {
        return element.to_string();
    }
    match hydrogens {
        0 => format!("[{element}]"),
        1 => format!("[{element}H]"),
        h => format!("[{element}H{h}]"),
    }
}

fn bond_text(order: u8) -> &'static str {
    match order {
        2 => "=",
        3 => "#",
        _ => "",
    }
}

fn label_text(label: usize) -> String {
    if label < 10 {
        label.to_string()
    } else {
        format!("%{label}")
    }
}

/// Depth-first emission starting at the lowest-index atom of each component,
/// visiting neighbors in ascending index order.
pub fn graph_to_smiles(g: &MoleculeGraph) -> String {
    let n = g.len();
    let adj = g.adjacency();
    let bond_sum: Vec<u32> = adj
        .iter()
        .map(|list| list.iter().map(|&(_, o)| u32::from(o)).sum())
        .collect();

    // first pass: DFS tree and visit order
    let mut visit = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if visit[root] != usize::MAX {
            continue;
        }
        roots.push(root);
        let mut stack = vec![(root, 0usize)];
        visit[root] = counter;
        counter += 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next].0;
                *next += 1;
                if visit[w] == usize::MAX {
                    visit[w] = counter;
                    counter += 1;
                    parent[w] = v;
                    children[v].push(w);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
            }
        }
    }
    // ring bonds per atom: (partner, order); opened at the earlier-visited end
    let mut rings: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    for b in &g.bonds {
        if parent[b.u] != b.v && parent[b.v] != b.u {
            rings[b.u].push((b.v, b.order));
            rings[b.v].push((b.u, b.order));
        }
    }
    for list in rings.iter_mut() {
        list.sort_by_key(|&(w, _)| visit[w]);
    }

    let mut out = String::new();
    let mut in_use: Vec<bool> = vec![false; 100];
    let mut open: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        // explicit stack of emission tasks
        enum Task {
            Atom(usize),
            Text(&'static str),
        }
        let mut tasks = vec![Task::Atom(root)];
        while let Some(task) = tasks.pop() {
            let v = match task {
                Task::Text(t) => {
                    out.push_str(t);
                    continue;
                }
                Task::Atom(v) => v,
            };
            let atom = &g.atoms[v];
            out.push_str(&atom_text(&atom.element, atom.hydrogens, bond_sum[v]));
            for &(w, order) in &rings[v] {
                if visit[w] < visit[v] {
                    let label = open.remove(&(w, v)).expect("ring opened earlier");
                    in_use[label] = false;
                    out.push_str(&label_text(label));
                } else {
                    let label = (1..100)
                        .find(|&l| !in_use[l])
                        .expect("ring labels exhausted");
                    in_use[label] = true;
                    open.insert((v, w), label);
                    out.push_str(bond_text(order));
                    out.push_str(&label_text(label));
                }
            }
            let kids = &children[v];
            // pushed in reverse so the first child is emitted first
            for (i, &c) in kids.iter().enumerate().rev() {
                let last = i + 1 == kids.len();
                if !last {
                    tasks.push(Task::Text(")"));
                }
                tasks.push(Task::Atom(c));
                let order = g.bond_order(v, c).unwrap_or(1);
                tasks.push(Task::Text(bond_text(order)));
                if !last {
                    tasks.push(Task::Text("("));
                }
            }
        }
    }
    out
}

/// Parses the SMILES subset produced by [`graph_to_smiles`]. Elements must
/// belong to the layout alphabet.
pub fn parse_smiles(s: &str, layout: &FeatureLayout) -> Result<MoleculeGraph, SmilesError> {
    let chars: Vec<char> = s.chars().collect();
    if chars.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut g = MoleculeGraph::new();
    // bracket atoms have fixed H; bare atoms get implicit H at the end
    let mut explicit_h: Vec<Option<u8>> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut branch_stack: Vec<usize> = Vec::new();
    let mut pending_bond: Option<u8> = None;
    let mut rings: std::collections::HashMap<usize, (usize, Option<u8>)> = Default::default();
    let mut pos = 0;

    let add_bond = |g: &mut MoleculeGraph, u: usize, v: usize, order: u8| {
        if u == v || g.bond_order(u, v).is_some() {
            return Err(SmilesError::DuplicateBond { u, v });
        }
        g.add_bond(u, v, order);
        Ok(())
    };

    while pos < chars.len() {
        let c = chars[pos];
        let start = pos;
        match c {
            '-' | '=' | '#' => {
                if pending_bond.is_some() {
                    return Err(SmilesError::Unexpected {
                        token: c.to_string(),
                        pos,
                    });
                }
                pending_bond = Some(match c {
                    '-' => 1,
                    '=' => 2,
                    _ => 3,
                });
                pos += 1;
            }
            '(' => {
                let p = prev.ok_or(SmilesError::Parenthesis { pos })?;
                branch_stack.push(p);
                pos += 1;
            }
            ')' => {
                prev = Some(branch_stack.pop().ok_or(SmilesError::Parenthesis { pos })?);
                pos += 1;
            }
            '.' => {
                prev = None;
                pos += 1;
            }
            '0'..='9' | '%' => {
                let label = if c == '%' {
                    let digits: String = chars.iter().skip(pos + 1).take(2).collect();
                    if digits.len() != 2 || !digits.chars().all(|d| d.is_ascii_digit()) {
                        return Err(SmilesError::Unexpected {
                            token: "%".into(),
                            pos,
                        });
                    }
                    pos += 3;
                    digits.parse().expect("two digits")
                } else {
                    pos += 1;
                    c.to_digit(10).expect("digit") as usize
                };
                let v = prev.ok_or(SmilesError::Unexpected {
                    token: c.to_string(),
                    pos: start,
                })?;
                match rings.remove(&label) {
                    Some((w, order)) => {
                        let order = match (order, pending_bond) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::Unexpected {
                                    token: c.to_string(),
                                    pos: start,
                                })
                            }
                            (a, b) => a.or(b).unwrap_or(1),
                        };
                        add_bond(&mut g, w, v, order)?;
                    }
                    None => {
                        rings.insert(label, (v, pending_bond));
                    }
                }
                pending_bond = None;
            }
            '[' => {
                let close = chars[pos..]
                    .iter()
                    .position(|&ch| ch == ']')
                    .map(|k| pos + k)
                    .ok_or(SmilesError::UnexpectedEnd)?;
                let inner: Vec<char> = chars[pos + 1..close].to_vec();
                let mut k = 0;
                let mut element = String::new();
                if let Some(&first) = inner.first() {
                    if first.is_ascii_uppercase() {
                        element.push(first);
                        k = 1;
                        if let Some(&second) = inner.get(1) {
                            if second.is_ascii_lowercase() {
                                element.push(second);
                                k = 2;
                            }
                        }
                    }
                }
                if element.is_empty() {
                    return Err(SmilesError::Unsupported {
                        token: inner.first().map(|ch| ch.to_string()).unwrap_or_default(),
                        pos: pos + 1,
                    });
                }
                let mut h = 0u8;
                if inner.get(k) == Some(&'H') {
                    k += 1;
                    let digits: String = inner[k..]
                        .iter()
                        .take_while(|ch| ch.is_ascii_digit())
                        .collect();
                    k += digits.len();
                    h = if digits.is_empty() {
                        1
                    } else {
                        digits.parse().map_err(|_| SmilesError::Unexpected {
                            token: digits.clone(),
                            pos: pos + 1 + k,
                        })?
                    };
                }
                if k != inner.len() {
                    return Err(SmilesError::Unsupported {
                        token: inner[k].to_string(),
                        pos: pos + 1 + k,
                    });
                }
                if layout.type_index(&element).is_none() {
                    return Err(SmilesError::UnknownElement {
                        element,
                        pos: pos + 1,
                    });
                }
                let v = g.add_atom(&element, h);
                explicit_h.push(Some(h));
                if let Some(p) = prev {
                    add_bond(&mut g, p, v, pending_bond.take().unwrap_or(1))?;
                }
                pending_bond = None;
                prev = Some(v);
                pos = close + 1;
            }
            c if c.is_ascii_uppercase() => {
                let mut element = c.to_string();
                if let Some(&next) = chars.get(pos + 1) {
                    let two: String = [c, next].iter().collect();
                    if next.is_ascii_lowercase() && (two == "Cl" || two == "Br") {
                        element = two;
                    }
                }
                if !ORGANIC.contains(&element.as_str()) {
                    return Err(SmilesError::Unsupported {
                        token: element,
                        pos,
                    });
                }
                if layout.type_index(&element).is_none() {
                    return Err(SmilesError::UnknownElement { element, pos });
                }
                pos += element.len();
                let v = g.add_atom(&element, 0);
                explicit_h.push(None);
                if let Some(p) = prev {
                    add_bond(&mut g, p, v, pending_bond.take().unwrap_or(1))?;
                }
                pending_bond = None;
                prev = Some(v);
            }
            _ => {
                return Err(SmilesError::Unsupported {
                    token: c.to_string(),
                    pos,
                })
            }
        }
    }
    if pending_bond.is_some() {
        return Err(SmilesError::UnexpectedEnd);
    }
    if !branch_stack.is_empty() {
        return Err(SmilesError::Parenthesis { pos: chars.len() });
    }
    if let Some(&label) = rings.keys().min() {
        return Err(SmilesError::UnclosedRing { label });
    }
    let adj = g.adjacency();
    for (v, h) in explicit_h.iter().enumerate() {
        if h.is_none() {
            let sum: u32 = adj[v].iter().map(|&(_, o)| u32::from(o)).sum();
            g.atoms[v].hydrogens = implicit_hydrogens(&g.atoms[v].element, sum) as u8;
        }
    }
    g.bonds.sort_unstable();
    Ok(g)
}
