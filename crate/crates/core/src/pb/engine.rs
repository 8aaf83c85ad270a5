//! Conflict-driven search over a [`PbModel`].
//!
//! Linear constraints are normalized to `Σ a·l >= d` over literals with
//! positive coefficients and propagated with a slack counter: `slack` is the
//! sum of coefficients of non-false literals minus `d`. A negative slack is a
//! conflict, and any unassigned literal whose coefficient exceeds the slack
//! is forced true. Clauses (blocking and learned) use two watched literals.
//!
//! Every propagation keeps its source so that a conflict can be explained
//! as a clause. Conflicts are analyzed to the first unique implication
//! point; the learned clause is kept and the search jumps back to the level
//! where it becomes unit.
//!
//! Branching takes the lowest tier first, then the highest activity.
//! Activities start from a seeded random score blended with the number of
//! constraints a variable occurs in, and variables met during conflict
//! analysis are bumped. Polarity is seeded per variable and never changes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{ActiveGroups, LexRelation, PbModel, Relation, Var, VarRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, value: bool) -> Self {
        Lit((var as u32) << 1 | u32::from(!value))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    /// The value this literal asserts for its variable.
    fn value(self) -> bool {
        self.0 & 1 == 0
    }

    fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug)]
struct Row {
    /// Sorted by decreasing coefficient.
    lits: Vec<(i64, Lit)>,
    max_coef: i64,
}

#[derive(Debug)]
struct Lex {
    lhs: Vec<usize>,
    rhs: Vec<usize>,
}

/// Why a variable holds its value, or which constraint failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reason {
    Decision,
    /// Fixed at level zero; never explained further.
    Root,
    Row(u32),
    /// Lex constraint and the position that fired.
    Lex(u32, u32),
    Clause(u32),
}

#[derive(Debug, Clone, Copy)]
struct Decision {
    trail_start: usize,
}

const ACTIVITY_DECAY: f64 = 0.95;
const ACTIVITY_LIMIT: f64 = 1e100;

/// Branching candidate; entries go stale when the activity moves on.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    tier: u8,
    activity: f64,
    var: u32,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .tier
            .cmp(&self.tier)
            .then(self.activity.total_cmp(&other.activity))
            .then(other.var.cmp(&self.var))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Vec<bool>),
    Unsat,
    Timeout(Duration),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Search space exhausted; every solution was found.
    Exhausted,
    /// The requested number of solutions was reached.
    PoolFull,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub solutions: Vec<Vec<bool>>,
    pub stop: StopReason,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub learned: u64,
}

/// `Err` carries the violated constraint.
type Step = Result<(), Reason>;

/// One search instance over an immutable model.
pub struct Engine<'m> {
    model: &'m PbModel,
    n_vars: usize,
    rows: Vec<Row>,
    slack: Vec<i64>,
    /// For each literal, the rows containing it (hit when it becomes false).
    row_occ: Vec<Vec<(u32, i64)>>,
    lex: Vec<Lex>,
    lex_occ: Vec<Vec<u32>>,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    active: ActiveGroups,
    values: Vec<Option<bool>>,
    level: Vec<u32>,
    trail_pos: Vec<u32>,
    reason: Vec<Reason>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    qhead: usize,
    decisions: Vec<Decision>,
    tier: Vec<u8>,
    activity: Vec<f64>,
    bump: f64,
    heap: BinaryHeap<Candidate>,
    polarity: Vec<bool>,
    root_unsat: bool,
    exhausted: bool,
    stats: SearchStats,
}

impl<'m> Engine<'m> {
    /// Prepares an engine enforcing only constraints of `active` groups.
    pub fn new(model: &'m PbModel, active: &ActiveGroups, seed: u64) -> Self {
        let n_vars = model.n_vars();
        let mut engine = Engine {
            model,
            n_vars,
            rows: Vec::new(),
            slack: Vec::new(),
            row_occ: vec![Vec::new(); 2 * n_vars],
            lex: Vec::new(),
            lex_occ: vec![Vec::new(); n_vars],
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n_vars],
            active: active.clone(),
            values: vec![None; n_vars],
            level: vec![0; n_vars],
            trail_pos: vec![0; n_vars],
            reason: vec![Reason::Root; n_vars],
            seen: vec![false; n_vars],
            trail: Vec::with_capacity(n_vars),
            qhead: 0,
            decisions: Vec::new(),
            tier: Vec::new(),
            activity: Vec::new(),
            bump: 1.0,
            heap: BinaryHeap::new(),
            polarity: Vec::new(),
            root_unsat: false,
            exhausted: false,
            stats: SearchStats::default(),
        };

        for c in model
            .constraints()
            .iter()
            .filter(|c| active.contains(c.group))
        {
            let terms: Vec<(i64, usize)> = c.terms.iter().map(|&(k, v)| (k, v.index())).collect();
            match c.relation {
                Relation::Ge => engine.push_ge(&terms, c.rhs),
                Relation::Le => engine.push_le(&terms, c.rhs),
                Relation::Eq => {
                    engine.push_ge(&terms, c.rhs);
                    engine.push_le(&terms, c.rhs);
                }
            }
        }
        for (v, value, g) in model.fixed() {
            if active.contains(g) {
                engine.push_ge(&[(1, v.index())], i64::from(value));
                engine.push_le(&[(1, v.index())], i64::from(value));
            }
        }
        for c in model
            .lex_constraints()
            .iter()
            .filter(|c| active.contains(c.group))
        {
            let (lhs, rhs) = match c.relation {
                LexRelation::LessEq => (&c.lhs, &c.rhs),
                LexRelation::GreaterEq => (&c.rhs, &c.lhs),
            };
            let id = engine.lex.len() as u32;
            let lex = Lex {
                lhs: lhs.iter().map(|v| v.index()).collect(),
                rhs: rhs.iter().map(|v| v.index()).collect(),
            };
            for &v in lex.lhs.iter().chain(&lex.rhs) {
                if engine.lex_occ[v].last() != Some(&id) {
                    engine.lex_occ[v].push(id);
                }
            }
            engine.lex.push(lex);
        }
        engine.build_order(seed);
        if engine.root_unsat || engine.root_propagate().is_err() {
            engine.root_unsat = true;
        }
        engine
    }

    fn push_le(&mut self, terms: &[(i64, usize)], rhs: i64) {
        let negated: Vec<(i64, usize)> = terms.iter().map(|&(c, v)| (-c, v)).collect();
        self.push_ge(&negated, -rhs);
    }

    /// Normalizes and stores `Σ c·x >= rhs`.
    fn push_ge(&mut self, terms: &[(i64, usize)], rhs: i64) {
        let mut degree = rhs;
        let mut lits: Vec<(i64, Lit)> = Vec::with_capacity(terms.len());
        for &(c, v) in terms {
            if c > 0 {
                lits.push((c, Lit::new(v, true)));
            } else if c < 0 {
                lits.push((-c, Lit::new(v, false)));
                degree -= c;
            }
        }
        if degree <= 0 {
            return;
        }
        lits.sort_by_key(|l| std::cmp::Reverse(l.0));
        let total: i64 = lits.iter().map(|l| l.0).sum();
        if total < degree {
            self.root_unsat = true;
        }
        let id = self.rows.len() as u32;
        for &(c, l) in &lits {
            self.row_occ[l.idx()].push((id, c));
        }
        let max_coef = lits.first().map_or(0, |l| l.0);
        self.slack.push(total - degree);
        self.rows.push(Row { lits, max_coef });
    }

    fn build_order(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut occ = vec![0usize; self.n_vars];
        for (l, list) in self.row_occ.iter().enumerate() {
            occ[l >> 1] += list.len();
        }
        for (v, list) in self.lex_occ.iter().enumerate() {
            occ[v] += list.len();
        }
        let max_occ = occ.iter().copied().max().unwrap_or(0).max(1) as f64;
        self.activity = (0..self.n_vars)
            .map(|v| {
                let noise: f64 = rng.gen();
                noise + 0.5 * occ[v] as f64 / max_occ
            })
            .collect();
        self.tier = (0..self.n_vars)
            .map(|v| self.model.tier(Var(v as u32)))
            .collect();
        self.polarity = (0..self.n_vars).map(|_| rng.gen_bool(0.5)).collect();
        self.rebuild_heap();
    }

    fn candidate(&self, v: usize) -> Candidate {
        Candidate {
            tier: self.tier[v],
            activity: self.activity[v],
            var: v as u32,
        }
    }

    fn rebuild_heap(&mut self) {
        let open: Vec<Candidate> = (0..self.n_vars)
            .filter(|&v| self.values[v].is_none())
            .map(|v| self.candidate(v))
            .collect();
        self.heap = BinaryHeap::from(open);
    }

    fn bump_activity(&mut self, v: usize) {
        self.activity[v] += self.bump;
        if self.activity[v] > ACTIVITY_LIMIT {
            for a in &mut self.activity {
                *a /= ACTIVITY_LIMIT;
            }
            self.bump /= ACTIVITY_LIMIT;
            self.rebuild_heap();
        } else if self.values[v].is_none() {
            self.heap.push(self.candidate(v));
        }
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.values[l.var()].map(|v| v == l.value())
    }

    fn decision_level(&self) -> u32 {
        self.decisions.len() as u32
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        let v = l.var();
        debug_assert!(self.values[v].is_none());
        self.values[v] = Some(l.value());
        self.level[v] = self.decision_level();
        self.trail_pos[v] = self.trail.len() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
        let falsified = l.negate().idx();
        for k in 0..self.row_occ[falsified].len() {
            let (row, c) = self.row_occ[falsified][k];
            self.slack[row as usize] -= c;
        }
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let l = self.trail.pop().expect("non-empty trail");
            self.values[l.var()] = None;
            self.heap.push(self.candidate(l.var()));
            let falsified = l.negate().idx();
            for k in 0..self.row_occ[falsified].len() {
                let (row, c) = self.row_occ[falsified][k];
                self.slack[row as usize] += c;
            }
        }
        self.qhead = self.qhead.min(len);
    }

    /// Undoes every level above `level`.
    fn backjump(&mut self, level: u32) {
        let level = level as usize;
        if level < self.decisions.len() {
            let start = self.decisions[level].trail_start;
            self.decisions.truncate(level);
            self.undo_to(start);
        }
    }

    fn check_row(&mut self, row: usize) -> Step {
        let slack = self.slack[row];
        if slack < 0 {
            return Err(Reason::Row(row as u32));
        }
        if slack >= self.rows[row].max_coef {
            return Ok(());
        }
        for k in 0..self.rows[row].lits.len() {
            let (c, l) = self.rows[row].lits[k];
            if c <= slack {
                break;
            }
            if self.values[l.var()].is_none() {
                self.stats.propagations += 1;
                self.assign(l, Reason::Row(row as u32));
            }
        }
        Ok(())
    }

    fn check_lex(&mut self, id: usize) -> Step {
        for k in 0..self.lex[id].lhs.len() {
            let (a, b) = (self.lex[id].lhs[k], self.lex[id].rhs[k]);
            if a == b {
                continue;
            }
            let reason = Reason::Lex(id as u32, k as u32);
            match (self.values[a], self.values[b]) {
                (Some(x), Some(y)) => {
                    if x == y {
                        continue;
                    }
                    return if !x & y { Ok(()) } else { Err(reason) };
                }
                (Some(true), None) => {
                    self.stats.propagations += 1;
                    self.assign(Lit::new(b, true), reason);
                }
                (None, Some(false)) => {
                    self.stats.propagations += 1;
                    self.assign(Lit::new(a, false), reason);
                }
                _ => return Ok(()),
            }
        }
        Ok(())
    }

    /// Visits clauses watching `falsified`.
    fn propagate_watches(&mut self, falsified: Lit) -> Step {
        let mut list = std::mem::take(&mut self.watches[falsified.idx()]);
        let mut keep = 0;
        let mut step = Ok(());
        let mut i = 0;
        while i < list.len() {
            let c = list[i] as usize;
            i += 1;
            let clause = &mut self.clauses[c];
            if clause[0] == falsified {
                clause.swap(0, 1);
            }
            let other = clause[0];
            if self.values[other.var()] == Some(other.value()) {
                list[keep] = c as u32;
                keep += 1;
                continue;
            }
            let mut moved = false;
            for k in 2..clause.len() {
                let l = clause[k];
                if self.values[l.var()] != Some(!l.value()) {
                    clause.swap(1, k);
                    self.watches[l.idx()].push(c as u32);
                    moved = true;
                    break;
                }
            }
            if moved {
                continue;
            }
            list[keep] = c as u32;
            keep += 1;
            match self.values[other.var()] {
                None => {
                    self.stats.propagations += 1;
                    self.assign(other, Reason::Clause(c as u32));
                }
                Some(_) => {
                    while i < list.len() {
                        list[keep] = list[i];
                        keep += 1;
                        i += 1;
                    }
                    step = Err(Reason::Clause(c as u32));
                }
            }
        }
        list.truncate(keep);
        debug_assert!(self.watches[falsified.idx()].is_empty());
        self.watches[falsified.idx()] = list;
        step
    }

    fn root_propagate(&mut self) -> Step {
        for row in 0..self.rows.len() {
            self.check_row(row)?;
        }
        for id in 0..self.lex.len() {
            self.check_lex(id)?;
        }
        self.propagate()
    }

    fn propagate(&mut self) -> Step {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            let falsified = l.negate();
            for k in 0..self.row_occ[falsified.idx()].len() {
                let row = self.row_occ[falsified.idx()][k].0 as usize;
                self.check_row(row)?;
            }
            for k in 0..self.lex_occ[l.var()].len() {
                let id = self.lex_occ[l.var()][k] as usize;
                self.check_lex(id)?;
            }
            self.propagate_watches(falsified)?;
        }
        Ok(())
    }

    /// Appends the false literals that, together with `implied`, make up the
    /// clause behind `reason`. Without `implied`, `reason` is a violated
    /// constraint and all of its false literals are appended.
    fn explain(&self, reason: Reason, implied: Option<Lit>, out: &mut Vec<Lit>) {
        let false_lit = |v: usize| Lit::new(v, !self.values[v].expect("assigned"));
        match reason {
            Reason::Row(r) => {
                let limit = implied.map_or(u32::MAX, |p| self.trail_pos[p.var()]);
                for &(_, l) in &self.rows[r as usize].lits {
                    if self.lit_value(l) == Some(false) && self.trail_pos[l.var()] < limit {
                        out.push(l);
                    }
                }
            }
            Reason::Lex(id, k) => {
                let lex = &self.lex[id as usize];
                let k = k as usize;
                for j in 0..k {
                    if lex.lhs[j] != lex.rhs[j] {
                        out.push(false_lit(lex.lhs[j]));
                        out.push(false_lit(lex.rhs[j]));
                    }
                }
                for v in [lex.lhs[k], lex.rhs[k]] {
                    if implied.is_none_or(|p| p.var() != v) {
                        out.push(false_lit(v));
                    }
                }
            }
            Reason::Clause(c) => {
                out.extend(
                    self.clauses[c as usize]
                        .iter()
                        .filter(|&&l| Some(l) != implied),
                );
            }
            Reason::Decision | Reason::Root => unreachable!("no antecedent"),
        }
    }

    /// Whether `l` (false) is implied by literals already in the learned clause.
    fn redundant(&self, l: Lit, scratch: &mut Vec<Lit>) -> bool {
        let v = l.var();
        if matches!(self.reason[v], Reason::Decision | Reason::Root) {
            return false;
        }
        scratch.clear();
        self.explain(self.reason[v], Some(l.negate()), scratch);
        scratch
            .iter()
            .all(|q| self.seen[q.var()] || self.level[q.var()] == 0)
    }

    fn add_clause(&mut self, lits: Vec<Lit>) -> u32 {
        debug_assert!(lits.len() >= 2);
        let id = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(id);
        self.watches[lits[1].idx()].push(id);
        self.clauses.push(lits);
        id
    }

    /// Learns from a set of false literals that cannot all stay false, jumps
    /// back and asserts the learned clause. False when the conflict holds at
    /// level zero.
    fn resolve(&mut self, mut conflict: Vec<Lit>) -> bool {
        self.stats.conflicts += 1;
        let top = conflict
            .iter()
            .map(|l| self.level[l.var()])
            .max()
            .unwrap_or(0);
        if top == 0 {
            return false;
        }
        self.backjump(top);

        let mut learnt = vec![Lit(0)];
        let mut touched = Vec::new();
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        loop {
            for &q in &conflict {
                let v = q.var();
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                touched.push(v);
                if self.level[v] == top {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            let p = loop {
                idx -= 1;
                let l = self.trail[idx];
                if self.seen[l.var()] {
                    break l;
                }
            };
            pending -= 1;
            if pending == 0 {
                learnt[0] = p.negate();
                break;
            }
            conflict.clear();
            self.explain(self.reason[p.var()], Some(p), &mut conflict);
        }

        let mut scratch = Vec::new();
        let mut k = 1;
        while k < learnt.len() {
            if self.redundant(learnt[k], &mut scratch) {
                learnt.swap_remove(k);
            } else {
                k += 1;
            }
        }
        for &v in &touched {
            self.seen[v] = false;
        }
        for v in touched {
            self.bump_activity(v);
        }
        self.bump /= ACTIVITY_DECAY;
        if self.heap.len() > 8 * self.n_vars + 64 {
            self.rebuild_heap();
        }

        self.stats.learned += 1;
        if learnt.len() == 1 {
            self.backjump(0);
            self.assign(learnt[0], Reason::Root);
            return true;
        }
        let second = (1..learnt.len())
            .max_by_key(|&i| self.level[learnt[i].var()])
            .expect("non-unit clause");
        learnt.swap(1, second);
        self.backjump(self.level[learnt[1].var()]);
        let asserting = learnt[0];
        let id = self.add_clause(learnt);
        self.assign(asserting, Reason::Clause(id));
        true
    }

    fn next_branch(&mut self) -> Option<Lit> {
        while let Some(c) = self.heap.pop() {
            let v = c.var as usize;
            if self.values[v].is_none() && c.activity == self.activity[v] {
                return Some(Lit::new(v, self.polarity[v]));
            }
        }
        None
    }

    fn current_assignment(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.unwrap_or(false)).collect()
    }

    /// Runs the search until the next solution, proof of exhaustion, or the deadline.
    fn search(&mut self, started: Instant, deadline: Option<Instant>) -> SolveOutcome {
        if self.root_unsat || self.exhausted {
            return SolveOutcome::Unsat;
        }
        let mut ticks: u32 = 0;
        let mut conflict = Vec::new();
        loop {
            if let Some(deadline) = deadline {
                if ticks.is_multiple_of(256) && Instant::now() >= deadline {
                    return SolveOutcome::Timeout(started.elapsed());
                }
            }
            ticks = ticks.wrapping_add(1);
            if let Err(reason) = self.propagate() {
                conflict.clear();
                self.explain(reason, None, &mut conflict);
                if !self.resolve(std::mem::take(&mut conflict)) {
                    self.exhausted = true;
                    return SolveOutcome::Unsat;
                }
                continue;
            }
            match self.next_branch() {
                None => return SolveOutcome::Sat(self.current_assignment()),
                Some(lit) => {
                    self.stats.decisions += 1;
                    self.decisions.push(Decision {
                        trail_start: self.trail.len(),
                    });
                    self.assign(lit, Reason::Decision);
                }
            }
        }
    }

    /// Finds one satisfying assignment.
    pub fn solve(&mut self, time_limit: Option<Duration>) -> SolveOutcome {
        let started = Instant::now();
        if time_limit == Some(Duration::ZERO) {
            return SolveOutcome::Timeout(Duration::ZERO);
        }
        let deadline = time_limit.map(|t| started + t);
        self.search(started, deadline)
    }

    /// Forbids `assignment` on primary variables.
    pub fn block(&mut self, assignment: &[bool]) {
        if self.root_unsat || self.exhausted {
            return;
        }
        let mut lits: Vec<Lit> = self
            .model
            .primary_vars()
            .map(|v| Lit::new(v.index(), !assignment[v.index()]))
            .collect();
        let all_false = lits.iter().all(|&l| self.lit_value(l) == Some(false));
        if all_false && !lits.is_empty() {
            // right after a solution: the assignment is a conflict to learn from
            lits.sort_by_key(|l| std::cmp::Reverse(self.level[l.var()]));
            let top = |i: usize| lits.get(i).map(|l| self.level[l.var()]);
            // with a single literal on the top level the learned clause
            // subsumes this one
            if lits.len() >= 2 && top(0) == top(1) {
                self.add_clause(lits.clone());
            }
            if !self.resolve(lits) {
                self.exhausted = true;
            }
            return;
        }
        self.backjump(0);
        if lits.iter().any(|&l| self.lit_value(l) == Some(true)) {
            return;
        }
        lits.retain(|&l| self.lit_value(l).is_none());
        match lits.len() {
            0 => self.exhausted = true,
            1 => self.assign(lits[0], Reason::Root),
            _ => {
                self.add_clause(lits);
            }
        }
    }

    /// Solves repeatedly, blocking each solution, until `k` solutions,
    /// exhaustion, or the time limit.
    pub fn enumerate(&mut self, k: usize, time_limit: Option<Duration>) -> Enumeration {
        let started = Instant::now();
        let deadline = time_limit.map(|t| started + t);
        let mut solutions = Vec::new();
        if time_limit == Some(Duration::ZERO) {
            return Enumeration {
                solutions,
                stop: StopReason::Timeout,
                elapsed: started.elapsed(),
            };
        }
        let stop = loop {
            if solutions.len() >= k {
                break StopReason::PoolFull;
            }
            match self.search(started, deadline) {
                SolveOutcome::Sat(a) => {
                    debug_assert_eq!(self.model.first_violation(&a, &self.active), None);
                    self.block(&a);
                    solutions.push(a);
                }
                SolveOutcome::Unsat => break StopReason::Exhausted,
                SolveOutcome::Timeout(_) => break StopReason::Timeout,
            }
        };
        Enumeration {
            solutions,
            stop,
            elapsed: started.elapsed(),
        }
    }

    #[cfg(test)]
    fn propagated_literals(&self) -> Vec<(usize, bool)> {
        self.trail
            .iter()
            .filter(|l| self.reason[l.var()] != Reason::Decision)
            .map(|l| (l.var(), l.value()))
            .collect()
    }
}

/// Primary-variable projection of `assignment`.
pub fn project(model: &PbModel, assignment: &[bool]) -> Vec<bool> {
    (0..model.n_vars())
        .filter(|&i| model.role(Var(i as u32)) == VarRole::Primary)
        .map(|i| assignment[i])
        .collect()
}

pub fn solve_one(
    model: &PbModel,
    seed: u64,
    time_limit: Option<Duration>,
    active: &ActiveGroups,
) -> SolveOutcome {
    Engine::new(model, active, seed).solve(time_limit)
}

pub fn enumerate(
    model: &PbModel,
    k: usize,
    seed: u64,
    time_limit: Option<Duration>,
    active: &ActiveGroups,
) -> Enumeration {
    Engine::new(model, active, seed).enumerate(k, time_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pb::model::GroupId;

    fn vars(m: &mut PbModel, n: usize) -> Vec<Var> {
        (0..n).map(|_| m.new_var(VarRole::Primary, 0)).collect()
    }

    fn truth_table(m: &PbModel, active: &ActiveGroups) -> Vec<Vec<bool>> {
        let n = m.n_vars();
        (0u64..1 << n)
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|a| m.is_satisfied_by(a, active))
            .collect()
    }

    fn sorted(mut v: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
        v.sort();
        v
    }

    #[test]
    fn cardinality_enumeration_matches_truth_table() {
        let mut m = PbModel::new();
        let g = m.group("card");
        let x = vars(&mut m, 5);
        m.add_linear(x.iter().map(|&v| (1, v)), Relation::Eq, 2, g)
            .unwrap();
        let all = ActiveGroups::all(&m);
        let got = enumerate(&m, usize::MAX, 3, None, &all);
        assert_eq!(got.stop, StopReason::Exhausted);
        assert_eq!(got.solutions.len(), 10);
        assert_eq!(sorted(got.solutions), sorted(truth_table(&m, &all)));
    }

    #[test]
    fn lex_enumeration_matches_truth_table() {
        let mut m = PbModel::new();
        let g = m.group("lex");
        let a = vars(&mut m, 3);
        let b = vars(&mut m, 3);
        m.add_lex(a, b, LexRelation::GreaterEq, g).unwrap();
        let all = ActiveGroups::all(&m);
        let got = enumerate(&m, usize::MAX, 11, None, &all);
        assert_eq!(got.solutions.len(), 36);
        assert_eq!(sorted(got.solutions), sorted(truth_table(&m, &all)));
    }

    #[test]
    fn infeasible_is_unsat_and_zero_limit_times_out() {
        let mut m = PbModel::new();
        let g = m.group("g");
        let x = vars(&mut m, 3);
        m.add_linear(x.iter().map(|&v| (2, v)), Relation::Eq, 3, g)
            .unwrap();
        let all = ActiveGroups::all(&m);
        assert_eq!(solve_one(&m, 0, None, &all), SolveOutcome::Unsat);
        assert!(matches!(
            solve_one(&m, 0, Some(Duration::ZERO), &all),
            SolveOutcome::Timeout(_)
        ));
    }

    #[test]
    fn inactive_groups_are_ignored() {
        let mut m = PbModel::new();
        let a = m.group("a");
        let b = m.group("b");
        let x = vars(&mut m, 1);
        m.add_linear([(1, x[0])], Relation::Ge, 1, a).unwrap();
        m.add_linear([(1, x[0])], Relation::Le, 0, b).unwrap();
        assert_eq!(
            solve_one(&m, 0, None, &ActiveGroups::all(&m)),
            SolveOutcome::Unsat
        );
        let only_a = ActiveGroups::from_ids(&m, [a]);
        assert_eq!(
            solve_one(&m, 0, None, &only_a),
            SolveOutcome::Sat(vec![true])
        );
    }

    #[test]
    fn auxiliary_variables_are_projected_out_of_blocking() {
        let mut m = PbModel::new();
        let g = m.group("g");
        let x = m.new_var(VarRole::Primary, 1);
        let s1 = m.new_var(VarRole::Auxiliary, 0);
        let s2 = m.new_var(VarRole::Auxiliary, 0);
        // x = 1 whenever any indicator is on, and at least one indicator on
        m.add_linear([(1, s1), (1, s2)], Relation::Ge, 1, g)
            .unwrap();
        m.add_linear([(1, x), (-1, s1)], Relation::Ge, 0, g)
            .unwrap();
        m.add_linear([(1, x), (-1, s2)], Relation::Ge, 0, g)
            .unwrap();
        let all = ActiveGroups::all(&m);
        let got = enumerate(&m, usize::MAX, 5, None, &all);
        assert_eq!(got.solutions.len(), 1);
        assert!(got.solutions[0][0]);
    }

    #[test]
    fn unit_blocking_clause() {
        let mut m = PbModel::new();
        let _g: GroupId = m.group("g");
        let _x = vars(&mut m, 1);
        let all = ActiveGroups::all(&m);
        let got = enumerate(&m, 10, 0, None, &all);
        assert_eq!(got.solutions.len(), 2);
        assert_eq!(got.stop, StopReason::Exhausted);
    }

    #[test]
    fn propagated_literals_have_reasons() {
        let mut m = PbModel::new();
        let g = m.group("g");
        let x = vars(&mut m, 6);
        m.add_linear(
            [(3, x[0]), (2, x[1]), (2, x[2]), (1, x[3])],
            Relation::Le,
            4,
            g,
        )
        .unwrap();
        m.add_linear([(1, x[3]), (1, x[4]), (1, x[5])], Relation::Ge, 2, g)
            .unwrap();
        let all = ActiveGroups::all(&m);
        for seed in 0..20 {
            let mut e = Engine::new(&m, &all, seed);
            let SolveOutcome::Sat(_) = e.solve(None) else {
                panic!("satisfiable")
            };
            // rebuild partial states level by level and mutate propagated literals
            let decisions: Vec<Decision> = e.decisions.clone();
            let mut probe = Engine::new(&m, &all, seed);
            for d in decisions {
                let lit = e.trail[d.trail_start];
                probe.decisions.push(Decision {
                    trail_start: probe.trail.len(),
                });
                probe.assign(lit, Reason::Decision);
                assert!(probe.propagate().is_ok());
                for (var, value) in probe.propagated_literals() {
                    let mut partial: Vec<Option<bool>> = probe.values.clone();
                    partial[var] = Some(!value);
                    let violated = m.constraints().iter().any(|c| {
                        let (mut lo, mut hi) = (0i64, 0i64);
                        for &(k, v) in &c.terms {
                            match partial[v.index()] {
                                Some(true) => {
                                    lo += k;
                                    hi += k;
                                }
                                Some(false) => {}
                                None => {
                                    lo += k.min(0);
                                    hi += k.max(0);
                                }
                            }
                        }
                        match c.relation {
                            Relation::Le => lo > c.rhs,
                            Relation::Ge => hi < c.rhs,
                            Relation::Eq => lo > c.rhs || hi < c.rhs,
                        }
                    });
                    assert!(violated, "literal x{var}={value} propagated without reason");
                }
            }
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut m = PbModel::new();
        let g = m.group("g");
        let x = vars(&mut m, 8);
        m.add_linear(x.iter().map(|&v| (1, v)), Relation::Le, 3, g)
            .unwrap();
        let all = ActiveGroups::all(&m);
        let a = enumerate(&m, 20, 42, None, &all);
        let b = enumerate(&m, 20, 42, None, &all);
        assert_eq!(a.solutions, b.solutions);
    }
}
