//! Deterministic DPLL with unit propagation that logs a tree-like resolution
//! refutation when the formula is unsatisfiable.

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfFormula, Literal};

/// How a line of a resolution refutation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResolutionSource {
    /// Clause `i` of the input formula (zero-based).
    Axiom(usize),
    /// Resolvent of two earlier lines on `pivot`.
    Resolvent {
        left: usize,
        right: usize,
        pivot: u32,
    },
}

/// A clause line of a resolution refutation. Literals are sorted by variable;
/// the empty literal list is the empty clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionLine {
    pub literals: Vec<Literal>,
    pub source: ResolutionSource,
}

impl ResolutionLine {
    pub fn is_empty_clause(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn mentions(&self, var: u32) -> bool {
        self.literals.iter().any(|l| l.var == var)
    }
}

struct TrailEntry {
    var: u32,
    /// Formula clause that forced the value; `None` for decisions.
    reason: Option<usize>,
}

enum Outcome {
    Sat,
    /// Proof line of a clause falsified by the assignment on entry.
    Conflict(usize),
}

pub(crate) struct Dpll<'a> {
    formula: &'a CnfFormula,
    values: Vec<Option<bool>>,
    trail: Vec<TrailEntry>,
    lines: Vec<ResolutionLine>,
}

impl<'a> Dpll<'a> {
    pub(crate) fn new(formula: &'a CnfFormula) -> Self {
        let lines = formula
            .clauses()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut literals = c.literals().to_vec();
                literals.sort();
                ResolutionLine {
                    literals,
                    source: ResolutionSource::Axiom(i),
                }
            })
            .collect();
        Dpll {
            formula,
            values: vec![None; formula.num_vars() + 1],
            trail: Vec::new(),
            lines,
        }
    }

    /// Returns a model indexed by `var - 1`, or `None` when unsatisfiable.
    pub(crate) fn solve(mut self) -> Option<Vec<bool>> {
        match self.search() {
            Outcome::Sat => Some(self.model()),
            Outcome::Conflict(_) => None,
        }
    }

    /// Either a model or the refutation lines ending in the empty clause.
    pub(crate) fn refute(mut self) -> Result<Vec<ResolutionLine>, Vec<bool>> {
        match self.search() {
            Outcome::Sat => Err(self.model()),
            Outcome::Conflict(root) => {
                // Input clauses are non-empty, so the root is a fresh resolvent
                // and therefore the last line.
                debug_assert!(self.lines[root].is_empty_clause());
                debug_assert_eq!(root + 1, self.lines.len());
                Ok(self.lines)
            }
        }
    }

    fn model(&self) -> Vec<bool> {
        self.values[1..].iter().map(|v| v.unwrap_or(false)).collect()
    }

    fn assign(&mut self, var: u32, value: bool, reason: Option<usize>) {
        self.values[var as usize] = Some(value);
        self.trail.push(TrailEntry { var, reason });
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let e = self.trail.pop().unwrap();
            self.values[e.var as usize] = None;
        }
    }

    /// Propagates units in clause order until fixpoint; returns a falsified clause.
    fn propagate(&mut self) -> Option<usize> {
        loop {
            let mut progress = false;
            for (ci, c) in self.formula.clauses().iter().enumerate() {
                let mut unassigned = None;
                let mut open = 0;
                let mut satisfied = false;
                for &l in c.literals() {
                    match self.values[l.var as usize] {
                        Some(v) if l.satisfied_by(v) => {
                            satisfied = true;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            open += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open, unassigned) {
                    (0, _) => return Some(ci),
                    (1, Some(l)) => {
                        self.assign(l.var, !l.negated, Some(ci));
                        progress = true;
                    }
                    _ => {}
                }
            }
            if !progress {
                return None;
            }
        }
    }

    fn search(&mut self) -> Outcome {
        let mark = self.trail.len();
        if let Some(ci) = self.propagate() {
            let line = self.explain(ci, mark);
            self.undo(mark);
            return Outcome::Conflict(line);
        }
        let Some(var) = (1..self.values.len()).find(|&v| self.values[v].is_none()) else {
            return Outcome::Sat;
        };
        let var = var as u32;
        let branch_mark = self.trail.len();

        self.assign(var, false, None);
        let left = match self.search() {
            Outcome::Sat => return Outcome::Sat,
            Outcome::Conflict(l) => l,
        };
        self.undo(branch_mark);

        let learned = if !self.lines[left].mentions(var) {
            left
        } else {
            self.assign(var, true, None);
            let right = match self.search() {
                Outcome::Sat => return Outcome::Sat,
                Outcome::Conflict(r) => r,
            };
            self.undo(branch_mark);
            if self.lines[right].mentions(var) {
                self.resolve(left, right, var)
            } else {
                right
            }
        };
        let line = self.explain(learned, mark);
        self.undo(mark);
        Outcome::Conflict(line)
    }

    /// Resolves `line` against the reasons of the literals propagated since
    /// `mark`, newest first, so the result is falsified by the trail at `mark`.
    fn explain(&mut self, mut line: usize, mark: usize) -> usize {
        for i in (mark..self.trail.len()).rev() {
            let TrailEntry { var, reason } = self.trail[i];
            if let Some(reason) = reason {
                if self.lines[line].mentions(var) {
                    line = self.resolve(line, reason, var);
                }
            }
        }
        line
    }

    fn resolve(&mut self, left: usize, right: usize, pivot: u32) -> usize {
        let mut literals: Vec<Literal> = self.lines[left]
            .literals
            .iter()
            .chain(&self.lines[right].literals)
            .filter(|l| l.var != pivot)
            .copied()
            .collect();
        literals.sort();
        literals.dedup();
        self.lines.push(ResolutionLine {
            literals,
            source: ResolutionSource::Resolvent { left, right, pivot },
        });
        self.lines.len() - 1
    }
}
