//! A restricted SMARTS dialect for substructure requirements.
//!
//! Supported: organic symbols, `*`, bracket atoms holding a comma-separated
//! list of elements sharing optional `H<k>`, `X<k>` (total connections,
//! implicit hydrogens included) or `D<k>` (heavy-atom connections)
//! primitives, bonds `- = # ~`, branches, and ring closures `1`-`9`.
//! Everything else is rejected with the offending token.

use std::fmt;

use crate::error::SmartsError;
use crate::layout::FeatureLayout;

/// Allowed element types for a pattern atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeSet {
    /// `*`: any type from the layout alphabet.
    Any,
    /// Sorted by alphabet position, no duplicates.
    Elements(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAtom {
    pub types: TypeSet,
    pub h_count: Option<u8>,
    pub neighbor_count: Option<u8>,
}

/// Bit set over bond orders 1, 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderSet(u8);

impl OrderSet {
    pub const SINGLE: OrderSet = OrderSet(0b001);
    pub const DOUBLE: OrderSet = OrderSet(0b010);
    pub const TRIPLE: OrderSet = OrderSet(0b100);
    pub const ANY: OrderSet = OrderSet(0b111);

    pub fn contains(self, order: u8) -> bool {
        (1..=3).contains(&order) && self.0 & (1 << (order - 1)) != 0
    }

    fn symbol(self) -> Option<char> {
        match self {
            OrderSet::SINGLE => Some('-'),
            OrderSet::DOUBLE => Some('='),
            OrderSet::TRIPLE => Some('#'),
            OrderSet::ANY => Some('~'),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternBond {
    pub i: usize,
    pub j: usize,
    pub orders: OrderSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub atoms: Vec<PatternAtom>,
    pub bonds: Vec<PatternBond>,
    /// Require non-bonded atom pairs to stay non-bonded (off by default).
    pub induced: bool,
    pub source: String,
}

impl Pattern {
    pub fn n(&self) -> usize {
        self.atoms.len()
    }

    pub fn with_induced(mut self, induced: bool) -> Self {
        self.induced = induced;
        self
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<OrderSet> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.bonds
            .iter()
            .find(|bd| bd.i == i && bd.j == j)
            .map(|bd| bd.orders)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    layout: &'a FeatureLayout,
    atoms: Vec<PatternAtom>,
    bonds: Vec<PatternBond>,
    /// Ring label -> (opening atom, bond given at the opening).
    rings: [Option<(usize, Option<OrderSet>, usize)>; 10],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err_unsupported(&self, what: &'static str) -> SmartsError {
        SmartsError::Unsupported {
            token: self.peek().map(String::from).unwrap_or_default(),
            pos: self.pos,
            what,
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, orders: OrderSet) -> Result<(), SmartsError> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        if i == j || self.bonds.iter().any(|bd| bd.i == i && bd.j == j) {
            return Err(SmartsError::DuplicateBond { i, j });
        }
        self.bonds.push(PatternBond { i, j, orders });
        Ok(())
    }

    fn bond_symbol(&mut self) -> Result<Option<OrderSet>, SmartsError> {
        let set = match self.peek() {
            Some('-') => OrderSet::SINGLE,
            Some('=') => OrderSet::DOUBLE,
            Some('#') => OrderSet::TRIPLE,
            Some('~') => OrderSet::ANY,
            Some(':') => return Err(self.err_unsupported("aromatic bond")),
            Some('@') => return Err(self.err_unsupported("ring bond primitive")),
            Some('/') | Some('\\') => return Err(self.err_unsupported("directional bond")),
            Some('!') | Some(';') | Some('&') | Some(',') => {
                return Err(self.err_unsupported("bond logic"))
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(set))
    }

    fn element_at(&self, pos: usize, in_bracket: bool) -> Result<(String, usize), SmartsError> {
        let c = self.chars[pos];
        if c.is_ascii_lowercase() {
            return Err(SmartsError::Unsupported {
                token: c.to_string(),
                pos,
                what: "aromatic atom",
            });
        }
        if !c.is_ascii_uppercase() {
            return Err(SmartsError::Unexpected {
                token: c.to_string(),
                pos,
            });
        }
        // inside brackets an uppercase-lowercase pair is always one symbol
        if let Some(&next) = self.chars.get(pos + 1) {
            if next.is_ascii_lowercase() {
                let two: String = [c, next].iter().collect();
                if in_bracket
                    || two == "Cl"
                    || two == "Br"
                    || self.layout.type_index(&two).is_some()
                {
                    return Ok((two, 2));
                }
            }
        }
        let one = c.to_string();
        if in_bracket && c == 'H' && self.layout.type_index("H").is_none() {
            return Err(SmartsError::Unsupported {
                token: one,
                pos,
                what: "explicit hydrogen atom",
            });
        }
        Ok((one, 1))
    }

    fn check_element(&self, sym: &str, pos: usize) -> Result<(), SmartsError> {
        if self.layout.type_index(sym).is_none() {
            return Err(SmartsError::UnknownElement {
                element: sym.to_string(),
                pos,
            });
        }
        Ok(())
    }

    fn number(&mut self) -> Option<u8> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .parse()
            .ok()
    }

    fn organic_atom(&mut self) -> Result<PatternAtom, SmartsError> {
        let start = self.pos;
        if self.peek() == Some('*') {
            self.pos += 1;
            return Ok(PatternAtom {
                types: TypeSet::Any,
                h_count: None,
                neighbor_count: None,
            });
        }
        let (sym, len) = self.element_at(self.pos, false)?;
        self.check_element(&sym, start)?;
        self.pos += len;
        Ok(PatternAtom {
            types: TypeSet::Elements(vec![sym]),
            h_count: None,
            neighbor_count: None,
        })
    }

    fn bracket_atom(&mut self) -> Result<PatternAtom, SmartsError> {
        let open = self.pos;
        self.pos += 1;
        let mut types: Vec<String> = Vec::new();
        let mut any = false;
        let mut shared: Option<(Option<u8>, Option<u8>, Option<u8>)> = None;
        loop {
            // one alternative: symbol followed by primitives
            let alt_start = self.pos;
            match self.peek() {
                None => return Err(SmartsError::UnclosedBracket { pos: open }),
                Some('*') => {
                    self.pos += 1;
                    any = true;
                }
                Some('$') => return Err(self.err_unsupported("recursive SMARTS")),
                Some('#') => return Err(self.err_unsupported("atomic number primitive")),
                Some('!') => return Err(self.err_unsupported("negation")),
                Some(c) if c.is_ascii_digit() => return Err(self.err_unsupported("isotope")),
                Some(_) => {
                    let (sym, len) = self.element_at(self.pos, true)?;
                    self.check_element(&sym, alt_start)?;
                    self.pos += len;
                    if !types.contains(&sym) {
                        types.push(sym);
                    }
                }
            }
            let (mut h, mut x, mut d) = (None, None, None);
            loop {
                match self.peek() {
                    Some('H') => {
                        self.pos += 1;
                        h = Some(self.number().unwrap_or(1));
                    }
                    Some('X') => {
                        self.pos += 1;
                        x = Some(self.number().unwrap_or(1));
                    }
                    Some('D') => {
                        self.pos += 1;
                        d = Some(self.number().unwrap_or(1));
                    }
                    Some(',') | Some(']') => break,
                    None => return Err(SmartsError::UnclosedBracket { pos: open }),
                    Some('+') | Some('-') => return Err(self.err_unsupported("charge")),
                    Some(';') | Some('&') => return Err(self.err_unsupported("logic operator")),
                    Some('!') => return Err(self.err_unsupported("negation")),
                    Some('@') => return Err(self.err_unsupported("chirality")),
                    Some(':') => return Err(self.err_unsupported("atom map")),
                    Some('R') | Some('r') => {
                        return Err(self.err_unsupported("ring membership primitive"))
                    }
                    Some('v') | Some('x') | Some('h') => {
                        return Err(self.err_unsupported("unsupported atom primitive"))
                    }
                    Some(c) if c.is_ascii_lowercase() => {
                        return Err(self.err_unsupported("aromatic atom"))
                    }
                    Some(c) => {
                        return Err(SmartsError::Unexpected {
                            token: c.to_string(),
                            pos: self.pos,
                        })
                    }
                }
            }
            match &shared {
                None => shared = Some((h, x, d)),
                Some(prev) if *prev == (h, x, d) => {}
                Some(_) => {
                    return Err(SmartsError::NonUniformList { pos: alt_start });
                }
            }
            if self.peek() == Some(',') {
                self.pos += 1;
                continue;
            }
            self.pos += 1; // ']'
            break;
        }
        let (h, x, d) = shared.unwrap_or((None, None, None));
        let from_x = match (x, h) {
            (Some(x), Some(h)) => Some(
                x.checked_sub(h)
                    .ok_or(SmartsError::Connectivity { pos: open })?,
            ),
            (Some(_), None) => return Err(SmartsError::XWithoutH { pos: open }),
            (None, _) => None,
        };
        let neighbor_count = match (from_x, d) {
            (Some(a), Some(b)) if a != b => return Err(SmartsError::Connectivity { pos: open }),
            (a, b) => a.or(b),
        };
        let types = if any {
            TypeSet::Any
        } else {
            let mut sorted = types;
            sorted.sort_by_key(|s| self.layout.type_index(s));
            TypeSet::Elements(sorted)
        };
        Ok(PatternAtom {
            types,
            h_count: h,
            neighbor_count,
        })
    }

    fn atom(&mut self) -> Result<usize, SmartsError> {
        let atom = match self.peek() {
            Some('[') => self.bracket_atom()?,
            Some(_) => self.organic_atom()?,
            None => return Err(SmartsError::UnexpectedEnd),
        };
        self.atoms.push(atom);
        Ok(self.atoms.len() - 1)
    }

    /// Ring-closure digits following an atom.
    fn ring_closures(&mut self, current: usize) -> Result<(), SmartsError> {
        loop {
            let save = self.pos;
            let bond = self.bond_symbol()?;
            match self.peek() {
                Some('%') => return Err(self.err_unsupported("two-digit ring label")),
                Some('0') => return Err(self.err_unsupported("ring label 0")),
                Some(c) if c.is_ascii_digit() => {
                    let label = c.to_digit(10).expect("digit") as usize;
                    let pos = self.pos;
                    self.pos += 1;
                    match self.rings[label].take() {
                        Some((other, open_bond, _)) => {
                            let orders = match (open_bond, bond) {
                                (Some(a), Some(b)) if a != b => {
                                    return Err(SmartsError::RingBondMismatch { label, pos })
                                }
                                (a, b) => a.or(b).unwrap_or(OrderSet::SINGLE),
                            };
                            self.add_bond(other, current, orders)?;
                        }
                        None => self.rings[label] = Some((current, bond, pos)),
                    }
                }
                _ => {
                    self.pos = save;
                    return Ok(());
                }
            }
        }
    }

    /// Parses a chain starting with an atom; returns after a `)` or the end.
    fn chain(&mut self, mut prev: Option<(usize, Option<OrderSet>)>) -> Result<(), SmartsError> {
        let mut current = {
            let idx = self.atom()?;
            if let Some((p, bond)) = prev.take() {
                self.add_bond(p, idx, bond.unwrap_or(OrderSet::SINGLE))?;
            }
            idx
        };
        loop {
            self.ring_closures(current)?;
            match self.peek() {
                None => return Ok(()),
                Some(')') => return Ok(()),
                Some('(') => {
                    let open = self.pos;
                    self.pos += 1;
                    let bond = self.bond_symbol()?;
                    if self.peek() == Some(')') || self.peek().is_none() {
                        return Err(SmartsError::EmptyBranch { pos: open });
                    }
                    self.chain(Some((current, bond)))?;
                    if self.peek() != Some(')') {
                        return Err(SmartsError::UnclosedBranch { pos: open });
                    }
                    self.pos += 1;
                }
                Some('.') => return Err(self.err_unsupported("disconnected fragments")),
                Some(_) => {
                    let bond = self.bond_symbol()?;
                    if self.peek().is_none() {
                        return Err(SmartsError::UnexpectedEnd);
                    }
                    let idx = self.atom()?;
                    self.add_bond(current, idx, bond.unwrap_or(OrderSet::SINGLE))?;
                    current = idx;
                }
            }
        }
    }
}

/// Parses `text` against the alphabet of `layout`.
pub fn parse_pattern(text: &str, layout: &FeatureLayout) -> Result<Pattern, SmartsError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        layout,
        atoms: Vec::new(),
        bonds: Vec::new(),
        rings: Default::default(),
    };
    if p.chars.is_empty() {
        return Err(SmartsError::Empty);
    }
    p.chain(None)?;
    if p.pos < p.chars.len() {
        return Err(SmartsError::UnmatchedParen { pos: p.pos });
    }
    if let Some((label, pos)) = p
        .rings
        .iter()
        .enumerate()
        .find_map(|(label, r)| r.map(|(_, _, pos)| (label, pos)))
    {
        return Err(SmartsError::UnclosedRing { label, pos });
    }
    let mut bonds = p.bonds;
    bonds.sort_by_key(|b| (b.i, b.j));
    Ok(Pattern {
        atoms: p.atoms,
        bonds,
        induced: false,
        source: text.to_string(),
    })
}

fn render_atom(atom: &PatternAtom) -> String {
    let symbols: Vec<&str> = match &atom.types {
        TypeSet::Any => vec!["*"],
        TypeSet::Elements(els) => els.iter().map(String::as_str).collect(),
    };
    let mut suffix = String::new();
    if let Some(h) = atom.h_count {
        suffix.push_str(&format!("H{h}"));
        if let Some(d) = atom.neighbor_count {
            suffix.push_str(&format!("X{}", u32::from(d) + u32::from(h)));
        }
    } else if let Some(d) = atom.neighbor_count {
        suffix.push_str(&format!("D{d}"));
    }
    if symbols.len() == 1 && suffix.is_empty() {
        return symbols[0].to_string();
    }
    let alts: Vec<String> = symbols.iter().map(|s| format!("{s}{suffix}")).collect();
    format!("[{}]", alts.join(","))
}

/// Emits SMARTS text that parses back to a structurally equal pattern
/// (same atom order, bonds and constraints). Returns `None` when the pattern
/// cannot be written in the supported dialect.
pub fn render(p: &Pattern) -> Option<String> {
    let n = p.n();
    if n == 0 {
        return None;
    }
    let adj = |a: usize, b: usize| p.bond_between(a, b).is_some();
    // atom order must be a depth-first preorder: recover parents with a stack
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![0usize];
    for (j, pj) in parent.iter_mut().enumerate().skip(1) {
        while let Some(&top) = stack.last() {
            if adj(top, j) {
                break;
            }
            stack.pop();
        }
        *pj = *stack.last()?;
        stack.push(j);
    }
    let mut children = vec![Vec::new(); n];
    for j in 1..n {
        children[parent[j]].push(j);
    }
    let is_tree = |a: usize, b: usize| parent[a] == b || parent[b] == a;
    let mut ring_labels: Vec<Option<usize>> = vec![None; 10];
    let mut open: std::collections::HashMap<(usize, usize), usize> = Default::default();

    let mut out = String::new();
    fn emit(
        v: usize,
        p: &Pattern,
        children: &[Vec<usize>],
        is_tree: &dyn Fn(usize, usize) -> bool,
        ring_labels: &mut [Option<usize>],
        open: &mut std::collections::HashMap<(usize, usize), usize>,
        out: &mut String,
    ) -> Option<()> {
        out.push_str(&render_atom(&p.atoms[v]));
        let mut others: Vec<(usize, OrderSet)> = p
            .bonds
            .iter()
            .filter_map(|b| {
                if b.i == v && !is_tree(b.i, b.j) {
                    Some((b.j, b.orders))
                } else if b.j == v && !is_tree(b.i, b.j) {
                    Some((b.i, b.orders))
                } else {
                    None
                }
            })
            .collect();
        others.sort_by_key(|&(w, _)| w);
        // closings first so labels free up for reuse
        for &(w, _) in others.iter().filter(|(w, _)| *w < v) {
            let label = open.remove(&(w, v))?;
            ring_labels[label] = None;
            out.push_str(&label.to_string());
        }
        for &(w, orders) in others.iter().filter(|(w, _)| *w > v) {
            let label = (1..10).find(|&l| ring_labels[l].is_none())?;
            ring_labels[label] = Some(v);
            open.insert((v, w), label);
            out.push(orders.symbol()?);
            out.push_str(&label.to_string());
        }
        let kids = &children[v];
        for (k, &c) in kids.iter().enumerate() {
            let last = k + 1 == kids.len();
            if !last {
                out.push('(');
            }
            out.push(p.bond_between(v, c)?.symbol()?);
            emit(c, p, children, is_tree, ring_labels, open, out)?;
            if !last {
                out.push(')');
            }
        }
        Some(())
    }
    emit(
        0,
        p,
        &children,
        &is_tree,
        &mut ring_labels,
        &mut open,
        &mut out,
    )?;
    Some(out)
}
