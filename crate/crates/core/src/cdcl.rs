//! A small CDCL solver used as a solver and as a learned-clause source.
//!
//! Two watched literals, first-UIP learning with minimization, VSIDS with phase saving, Luby
//! restarts and a simple learned-clause reduction. It has no preprocessing
//! and no LBD bookkeeping.

use std::collections::HashSet;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Clause, Formula, Lit, Var};
use crate::rng::seeded;

const NO_REASON: u32 = u32::MAX;
const LUBY_BASE: u64 = 64;
const VAR_DECAY: f64 = 0.95;
const KEEP_WIDTH: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

/// The finite subsequence lengths of the Luby sequence: 1 1 2 1 1 2 4 ...
pub fn luby(index: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < index + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = index;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    last_used: u64,
}

/// Indexed binary max-heap over variable activities.
#[derive(Clone, Debug, Default)]
struct VarHeap {
    heap: Vec<u32>,
    index: Vec<u32>,
}

impl VarHeap {
    const ABSENT: u32 = u32::MAX;

    fn new(num_vars: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(num_vars), index: vec![Self::ABSENT; num_vars] }
    }

    fn contains(&self, slot: usize) -> bool {
        self.index[slot] != Self::ABSENT
    }

    fn insert(&mut self, slot: usize, act: &[f64]) {
        if self.contains(slot) {
            return;
        }
        self.index[slot] = self.heap.len() as u32;
        self.heap.push(slot as u32);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, slot: usize, act: &[f64]) {
        if self.contains(slot) {
            self.sift_up(self.index[slot] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.index[top as usize] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top as usize)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let x = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p as usize] >= act[x as usize] {
                break;
            }
            self.heap[i] = p;
            self.index[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = x;
        self.index[x as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let x = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len()
                && act[self.heap[right] as usize] > act[self.heap[left] as usize]
            {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if act[c as usize] <= act[x as usize] {
                break;
            }
            self.heap[i] = c;
            self.index[c as usize] = i as u32;
            i = child;
        }
        self.heap[i] = x;
        self.index[x as usize] = i as u32;
    }
}

/// Result of a bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Sat,
    Unsat,
    Unknown,
}

/// Stopping conditions for [`Cdcl::solve`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchLimits {
    pub conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

/// Handle of a clause stored in the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClauseRef(u32);

/// Clause produced by conflict analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Learned {
    /// The asserting literal is first; the literal of `backjump_level` second.
    pub lits: Vec<Lit>,
    pub backjump_level: u32,
}

#[derive(Clone, Debug)]
pub struct Cdcl {
    num_vars: usize,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<u32>>,
    values: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    conflicts: u64,
    num_learnts: usize,
    max_learnts: f64,
}

impl Cdcl {
    /// Loads `formula`; tautologies are skipped. `seed` perturbs the initial
    /// variable order.
    pub fn new(formula: &Formula, seed: u64) -> Self {
        let n = formula.num_vars();
        let mut rng = seeded(seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 1e-5).collect();
        let mut heap = VarHeap::new(n);
        for slot in 0..n {
            heap.insert(slot, &activity);
        }
        let mut solver = Cdcl {
            num_vars: n,
            clauses: Vec::with_capacity(formula.num_clauses()),
            watches: vec![Vec::new(); 2 * (n + 1)],
            values: vec![Value::Unassigned; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            heap,
            phase: vec![false; n],
            seen: vec![false; n],
            ok: true,
            conflicts: 0,
            num_learnts: 0,
            max_learnts: (formula.num_clauses() as f64 / 3.0).max(2000.0),
        };
        for (id, c) in formula.clauses().iter().enumerate() {
            if !formula.is_tautology(id) {
                solver.add_clause(c);
            }
        }
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    /// False once the clause set is known to be unsatisfiable.
    pub fn is_ok(&self) -> bool {
        self.ok
    }

    /// Adds an original clause at decision level 0.
    pub fn add_clause(&mut self, clause: &Clause) {
        assert!(self.trail_lim.is_empty(), "clauses are added at level 0");
        if !self.ok || clause.is_tautology() {
            return;
        }
        let mut lits = Vec::with_capacity(clause.len());
        for &l in clause.lits() {
            match self.lit_value(l) {
                Value::True => return,
                Value::False => {}
                Value::Unassigned => lits.push(l),
            }
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(lits[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(lits, false);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(cref);
        self.watches[lits[1].code()].push(cref);
        self.clauses.push(ClauseData { lits, learnt, deleted: false, last_used: self.conflicts });
        if learnt {
            self.num_learnts += 1;
        }
        cref
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> Value {
        match self.values[l.var().slot()] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l.is_positive() => Value::True,
            Value::False if !l.is_positive() => Value::True,
            _ => Value::False,
        }
    }

    /// `Some(true)` if `lit` is assigned true on the trail.
    pub fn value(&self, lit: Lit) -> Option<bool> {
        match self.lit_value(lit) {
            Value::True => Some(true),
            Value::False => Some(false),
            Value::Unassigned => None,
        }
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn level_of(&self, var: Var) -> u32 {
        self.level[var.slot()]
    }

    #[inline]
    fn enqueue(&mut self, lit: Lit, reason: u32) {
        let slot = lit.var().slot();
        debug_assert_eq!(self.values[slot], Value::Unassigned);
        self.values[slot] = if lit.is_positive() { Value::True } else { Value::False };
        self.level[slot] = self.decision_level();
        self.reason[slot] = reason;
        self.trail.push(lit);
    }

    /// Opens a new decision level and assigns `lit`.
    pub fn decide(&mut self, lit: Lit) {
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, NO_REASON);
    }

    /// Propagates all pending assignments; returns a falsified clause on conflict.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                let c = &mut self.clauses[cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                if lit_is_true(self.values[first.var().slot()], first) {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.lits.len() {
                    let l = c.lits[k];
                    let v = self.values[l.var().slot()];
                    if v == Value::Unassigned || lit_is_true(v, l) {
                        c.lits.swap(1, k);
                        self.watches[c.lits[1].code()].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if self.values[first.var().slot()] == Value::Unassigned {
                    self.enqueue(first, cref);
                } else {
                    conflict = Some(ClauseRef(cref));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    pub fn clause_lits(&self, cref: ClauseRef) -> &[Lit] {
        &self.clauses[cref.0 as usize].lits
    }

    fn bump_var(&mut self, slot: usize) {
        self.activity[slot] += self.var_inc;
        if self.activity[slot] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(slot, &self.activity);
    }

    /// First-UIP conflict analysis with recursive clause minimization. Must
    /// be called above level 0.
    pub fn analyze(&mut self, conflict: ClauseRef) -> Learned {
        assert!(self.decision_level() > 0, "conflict at level 0 means unsat");
        let current = self.decision_level();
        let mut learnt = vec![Lit::from_code(0)];
        let mut pending = 0usize;
        let mut cref = conflict.0;
        let mut asserting: Option<Lit> = None;
        let mut idx = self.trail.len();

        loop {
            self.clauses[cref as usize].last_used = self.conflicts;
            let skip = usize::from(asserting.is_some());
            for k in skip..self.clauses[cref as usize].lits.len() {
                let q = self.clauses[cref as usize].lits[k];
                let slot = q.var().slot();
                if self.seen[slot] || self.level[slot] == 0 {
                    continue;
                }
                self.seen[slot] = true;
                self.bump_var(slot);
                if self.level[slot] == current {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().slot()] {
                    break;
                }
            }
            let p = self.trail[idx];
            let slot = p.var().slot();
            self.seen[slot] = false;
            pending -= 1;
            asserting = Some(p);
            if pending == 0 {
                break;
            }
            cref = self.reason[slot];
            debug_assert_ne!(cref, NO_REASON);
        }
        learnt[0] = !asserting.expect("at least one current-level literal");
        let mut to_clear = learnt[1..].to_vec();
        let levels = learnt[1..].iter().fold(0u64, |acc, l| acc | self.abstract_level(l.var().slot()));
        let mut kept = 1;
        for k in 1..learnt.len() {
            let l = learnt[k];
            if self.reason[l.var().slot()] == NO_REASON || !self.redundant(l, levels, &mut to_clear) {
                learnt[kept] = l;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in to_clear {
            self.seen[l.var().slot()] = false;
        }

        let mut backjump_level = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().slot()] > self.level[learnt[best].var().slot()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            backjump_level = self.level[learnt[1].var().slot()];
        }
        self.var_inc /= VAR_DECAY;
        Learned { lits: learnt, backjump_level }
    }

    fn abstract_level(&self, slot: usize) -> u64 {
        1 << (self.level[slot] & 63)
    }

    /// Whether `lit` of a learned clause is implied by the clause's other
    /// literals through reason clauses, so it can be dropped.
    fn redundant(&mut self, lit: Lit, levels: u64, to_clear: &mut Vec<Lit>) -> bool {
        let mark = to_clear.len();
        let mut stack = vec![lit];
        while let Some(q) = stack.pop() {
            let cref = self.reason[q.var().slot()] as usize;
            for k in 1..self.clauses[cref].lits.len() {
                let l = self.clauses[cref].lits[k];
                let slot = l.var().slot();
                if self.seen[slot] || self.level[slot] == 0 {
                    continue;
                }
                if self.reason[slot] != NO_REASON && self.abstract_level(slot) & levels != 0 {
                    self.seen[slot] = true;
                    stack.push(l);
                    to_clear.push(l);
                } else {
                    for c in to_clear.drain(mark..) {
                        self.seen[c.var().slot()] = false;
                    }
                    return false;
                }
            }
        }
        true
    }

    pub fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for k in (start..self.trail.len()).rev() {
            let l = self.trail[k];
            let slot = l.var().slot();
            self.phase[slot] = l.is_positive();
            self.values[slot] = Value::Unassigned;
            self.reason[slot] = NO_REASON;
            self.heap.insert(slot, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(slot) = self.heap.pop(&self.activity) {
            if self.values[slot] == Value::Unassigned {
                return Some(Lit::new(Var::from_slot(slot), self.phase[slot]));
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        let slot = first.var().slot();
        self.reason[slot] == cref && lit_is_true(self.values[slot], first)
    }

    /// Drops the least recently used half of the long learned clauses.
    fn reduce(&mut self) {
        let mut candidates: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&c| {
                let d = &self.clauses[c as usize];
                d.learnt && !d.deleted && d.lits.len() > KEEP_WIDTH && !self.locked(c)
            })
            .collect();
        candidates.sort_by_key(|&c| (self.clauses[c as usize].last_used, c));
        let drop = candidates.len() / 2;
        for &c in &candidates[..drop] {
            let d = &mut self.clauses[c as usize];
            d.deleted = true;
            d.lits = Vec::new();
            self.num_learnts -= 1;
        }
        for ws in &mut self.watches {
            ws.retain(|&c| !self.clauses[c as usize].deleted);
        }
    }

    /// Searches until a verdict, a limit, or `on_learn` asks to stop.
    ///
    /// `on_learn` sees every learned clause, asserting literal first.
    pub fn solve<F>(&mut self, limits: SearchLimits, mut on_learn: F) -> SolveStatus
    where
        F: FnMut(&[Lit]) -> ControlFlow<()>,
    {
        if !self.ok {
            return SolveStatus::Unsat;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return SolveStatus::Unsat;
        }
        let start_conflicts = self.conflicts;
        let mut restart_index = 0u64;
        let mut until_restart = luby(restart_index) * LUBY_BASE;
        let mut iterations = 0u64;

        loop {
            iterations += 1;
            if iterations.is_multiple_of(64) {
                if let Some(deadline) = limits.deadline {
                    if Instant::now() >= deadline {
                        self.backtrack(0);
                        return SolveStatus::Unknown;
                    }
                }
            }
            if let Some(conflict) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveStatus::Unsat;
                }
                let learned = self.analyze(conflict);
                self.backtrack(learned.backjump_level);
                let stop = on_learn(&learned.lits).is_break();
                if learned.lits.len() == 1 {
                    self.enqueue(learned.lits[0], NO_REASON);
                } else {
                    let first = learned.lits[0];
                    let cref = self.attach(learned.lits, true);
                    self.enqueue(first, cref);
                }
                if stop {
                    self.backtrack(0);
                    return SolveStatus::Unknown;
                }
                if let Some(max) = limits.conflicts {
                    if self.conflicts - start_conflicts >= max {
                        self.backtrack(0);
                        return SolveStatus::Unknown;
                    }
                }
                until_restart -= 1;
                if until_restart == 0 {
                    restart_index += 1;
                    until_restart = luby(restart_index) * LUBY_BASE;
                    self.backtrack(0);
                }
                if self.num_learnts as f64 >= self.max_learnts {
                    self.reduce();
                    self.max_learnts *= 1.1;
                }
            } else {
                match self.pick_branch() {
                    Some(lit) => self.decide(lit),
                    None => return SolveStatus::Sat,
                }
            }
        }
    }

    /// The current total assignment, once [`Cdcl::solve`] returned `Sat`.
    pub fn model(&self) -> Option<Assignment> {
        if self.values.contains(&Value::Unassigned) {
            return None;
        }
        Some(Assignment::new(self.values.iter().map(|&v| v == Value::True).collect()))
    }
}

#[inline]
fn lit_is_true(v: Value, l: Lit) -> bool {
    (v == Value::True) == l.is_positive() && v != Value::Unassigned
}

/// Decides `formula` with optional limits; returns the verified model on `Sat`.
pub fn solve(formula: &Formula, limits: SearchLimits, seed: u64) -> (SolveStatus, Option<Assignment>) {
    let mut solver = Cdcl::new(formula, seed);
    let status = solver.solve(limits, |_| ControlFlow::Continue(()));
    let model = match status {
        SolveStatus::Sat => {
            let m = solver.model().expect("sat leaves a total assignment");
            assert!(formula.is_satisfied_by(&m), "CDCL returned a non-model");
            Some(m)
        }
        _ => None,
    };
    (status, model)
}

/// A clause learned during mining.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedClauseRecord {
    pub clause: Clause,
    pub width: usize,
    /// Position among all learned clauses, starting at 0.
    pub learn_index: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningBudget {
    pub wall_seconds: f64,
    pub conflict_limit: Option<u64>,
    pub width_limit: usize,
    pub count_cap: Option<usize>,
}

impl MiningBudget {
    pub fn seconds(wall_seconds: f64, width_limit: usize) -> Self {
        MiningBudget { wall_seconds, conflict_limit: None, width_limit, count_cap: None }
    }

    pub fn conflicts(limit: u64, width_limit: usize) -> Self {
        MiningBudget {
            wall_seconds: f64::INFINITY,
            conflict_limit: Some(limit),
            width_limit,
            count_cap: None,
        }
    }

    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.count_cap = cap;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiningStatus {
    Sat,
    Unsat,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningOutcome {
    pub status: MiningStatus,
    pub model: Option<Assignment>,
    /// Width-qualifying, deduplicated clauses in learn order.
    pub learned: Vec<LearnedClauseRecord>,
    pub total_learned_seen: u64,
    /// Set when mining stopped because `count_cap` qualifying clauses existed.
    pub cap_reached: bool,
    pub conflicts: u64,
    pub seconds: f64,
}

impl MiningOutcome {
    pub fn clauses(&self) -> Vec<Clause> {
        self.learned.iter().map(|r| r.clause.clone()).collect()
    }
}

/// Runs CDCL on `formula` and collects learned clauses of width at most
/// `budget.width_limit` that are not already in the formula.
pub fn cdcl_solve_and_mine(formula: &Formula, budget: &MiningBudget, seed: u64) -> MiningOutcome {
    let start = Instant::now();
    let deadline = if budget.wall_seconds.is_finite() {
        Some(start + Duration::from_secs_f64(budget.wall_seconds.max(0.0)))
    } else {
        None
    };
    let original: HashSet<&Clause> = formula.clauses().iter().collect();
    let mut seen: HashSet<Clause> = HashSet::new();
    let mut learned = Vec::new();
    let mut total = 0u64;
    let mut cap_reached = false;

    let mut solver = Cdcl::new(formula, seed);
    let status = if budget.count_cap == Some(0) {
        cap_reached = true;
        SolveStatus::Unknown
    } else {
        solver.solve(SearchLimits { conflicts: budget.conflict_limit, deadline }, |lits| {
            let index = total;
            total += 1;
            if lits.len() > budget.width_limit {
                return ControlFlow::Continue(());
            }
            let clause = Clause::new(lits.to_vec());
            if original.contains(&clause) || !seen.insert(clause.clone()) {
                return ControlFlow::Continue(());
            }
            learned.push(LearnedClauseRecord { width: clause.len(), clause, learn_index: index });
            if budget.count_cap.is_some_and(|cap| learned.len() >= cap) {
                cap_reached = true;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })
    };

    let (status, model) = match status {
        SolveStatus::Sat => {
            let m = solver.model().expect("sat leaves a total assignment");
            assert!(formula.is_satisfied_by(&m), "CDCL returned a non-model");
            (MiningStatus::Sat, Some(m))
        }
        SolveStatus::Unsat => (MiningStatus::Unsat, None),
        SolveStatus::Unknown => (MiningStatus::BudgetExhausted, None),
    };
    MiningOutcome {
        status,
        model,
        learned,
        total_learned_seen: total,
        cap_reached,
        conflicts: solver.conflicts(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// First `cap` clauses in learn order.
    Chronological,
    /// Uniform random `cap`-subset, returned in learn order.
    Random,
}

/// Width filter first, then the cap.
pub fn filter_learned(
    records: &[LearnedClauseRecord],
    width_limit: usize,
    count_cap: Option<usize>,
    mode: FilterMode,
    seed: u64,
) -> Vec<Clause> {
    let qualifying: Vec<&LearnedClauseRecord> =
        records.iter().filter(|r| r.width <= width_limit).collect();
    let cap = count_cap.unwrap_or(usize::MAX).min(qualifying.len());
    match mode {
        FilterMode::Chronological => {
            qualifying.iter().take(cap).map(|r| r.clause.clone()).collect()
        }
        FilterMode::Random => {
            let mut picked = sample(&mut seeded(seed), qualifying.len(), cap).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| qualifying[i].clause.clone()).collect()
        }
    }
}
