//! Propositional CNF formulas, assignments, variable partitions and DIMACS I/O.
//!
//! Variables are numbered `1..=n` as in DIMACS. Clause indices are zero-based
//! positions in the formula; duplicate clauses are kept and identified by
//! position.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cp::LinearInequality;
use crate::error::{Error, Result};
use crate::solver::Dpll;

/// Default variable cap for the brute-force satisfiability oracle.
pub const DEFAULT_SAT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: u32) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: u32) -> Self {
        Literal { var, negated: true }
    }

    /// Builds a literal from a non-zero DIMACS integer.
    pub fn from_dimacs(lit: i64) -> Option<Self> {
        if lit == 0 || lit.unsigned_abs() > u32::MAX as u64 {
            return None;
        }
        Some(Literal {
            var: lit.unsigned_abs() as u32,
            negated: lit < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    pub fn negate(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Whether the literal is true when its variable takes `value`.
    #[inline]
    pub fn satisfied_by(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A non-empty disjunction of literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Result<Self> {
        if literals.is_empty() {
            return Err(Error::InvalidArgument("clause must have at least one literal".into()));
        }
        let mut vars: Vec<u32> = literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        if vars[0] == 0 {
            return Err(Error::InvalidArgument("variable index 0 is not allowed".into()));
        }
        if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "variable {} repeated in clause",
                w[0]
            )));
        }
        Ok(Clause { literals })
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Self> {
        let literals = lits
            .iter()
            .map(|&l| {
                Literal::from_dimacs(l)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad literal {l}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Clause::new(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> + '_ {
        self.literals.iter().map(|l| l.var)
    }

    pub fn max_var(&self) -> u32 {
        self.vars().max().unwrap_or(0)
    }

    /// Disjunction of two clauses over disjoint variable sets.
    pub fn disjoin(&self, other: &Clause) -> Result<Clause> {
        let mut lits = self.literals.clone();
        lits.extend_from_slice(&other.literals);
        Clause::new(lits)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            if l.negated {
                write!(f, "¬")?;
            }
            write!(f, "z{}", l.var)?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    n: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if c.max_var() as usize > n {
                return Err(Error::InvalidArgument(format!(
                    "clause {} uses variable {} but n = {n}",
                    i + 1,
                    c.max_var()
                )));
            }
        }
        Ok(CnfFormula { n, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    /// Maximum clause width `d`.
    pub fn width(&self) -> usize {
        self.clauses.iter().map(Clause::width).max().unwrap_or(0)
    }

    /// Clause density `m / n`.
    pub fn density(&self) -> Option<Ratio<u64>> {
        (self.n > 0).then(|| Ratio::new(self.clauses.len() as u64, self.n as u64))
    }

    /// The system `Az >= b` obtained by encoding every clause.
    pub fn to_inequalities(&self) -> Vec<LinearInequality> {
        self.clauses
            .iter()
            .map(|c| clause_to_inequality(c, self.n))
            .collect()
    }

    /// Evaluates the whole formula under a total assignment given as a bool slice
    /// indexed by `var - 1`.
    pub fn eval_total(&self, values: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.literals()
                .iter()
                .any(|l| l.satisfied_by(values[l.var as usize - 1]))
        })
    }
}

/// A partial assignment with an explicit scope.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    values: BTreeMap<u32, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, bool)>) -> Self {
        Assignment {
            values: pairs.into_iter().collect(),
        }
    }

    /// Assignment to `vars` whose `j`-th variable takes bit `j` of `bits`.
    pub fn from_packed(vars: &[u32], bits: u64) -> Self {
        Assignment {
            values: vars
                .iter()
                .enumerate()
                .map(|(j, &v)| (v, bits >> j & 1 == 1))
                .collect(),
        }
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values.get(&var).copied()
    }

    pub fn scope(&self) -> impl Iterator<Item = u32> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    /// Union of two assignments with disjoint scopes.
    pub fn union(&self, other: &Assignment) -> Result<Assignment> {
        let mut values = self.values.clone();
        for (v, b) in other.iter() {
            if values.insert(v, b).is_some() {
                return Err(Error::Scope(format!("variable {v} assigned twice")));
            }
        }
        Ok(Assignment { values })
    }

    /// Packs the assignment over exactly `vars` (bit `j` is `vars[j]`).
    pub fn pack(&self, vars: &[u32]) -> Result<u64> {
        if vars.len() > 64 {
            return Err(Error::cap("packed variable count", vars.len(), 64));
        }
        if self.values.len() != vars.len() {
            return Err(Error::Scope(format!(
                "expected {} variables, assignment has {}",
                vars.len(),
                self.values.len()
            )));
        }
        let mut bits = 0u64;
        for (j, &v) in vars.iter().enumerate() {
            match self.get(v) {
                Some(true) => bits |= 1 << j,
                Some(false) => {}
                None => return Err(Error::Scope(format!("variable {v} is not assigned"))),
            }
        }
        Ok(bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

/// Split of the variables `1..=n` into Alice's `X` and Bob's `Y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariablePartition {
    xvars: Vec<u32>,
    yvars: Vec<u32>,
    #[serde(skip)]
    lookup: Vec<Option<(Side, usize)>>,
}

impl VariablePartition {
    pub fn new(n: usize, mut xvars: Vec<u32>, mut yvars: Vec<u32>) -> Result<Self> {
        xvars.sort_unstable();
        yvars.sort_unstable();
        let mut lookup = vec![None; n + 1];
        for (side, vars) in [(Side::X, &xvars), (Side::Y, &yvars)] {
            for (pos, &v) in vars.iter().enumerate() {
                if v == 0 || v as usize > n {
                    return Err(Error::InvalidArgument(format!(
                        "partition variable {v} outside 1..={n}"
                    )));
                }
                if lookup[v as usize].is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "variable {v} appears twice in the partition"
                    )));
                }
                lookup[v as usize] = Some((side, pos));
            }
        }
        if let Some(v) = (1..=n).find(|&v| lookup[v].is_none()) {
            return Err(Error::InvalidArgument(format!(
                "variable {v} is on neither side of the partition"
            )));
        }
        Ok(VariablePartition {
            xvars,
            yvars,
            lookup,
        })
    }

    /// Odd variables to `X`, even variables to `Y`.
    pub fn alternating(n: usize) -> Self {
        let xvars = (1..=n as u32).filter(|v| v % 2 == 1).collect();
        let yvars = (1..=n as u32).filter(|v| v % 2 == 0).collect();
        Self::new(n, xvars, yvars).expect("alternating partition is valid")
    }

    pub fn num_vars(&self) -> usize {
        self.xvars.len() + self.yvars.len()
    }

    pub fn xvars(&self) -> &[u32] {
        &self.xvars
    }

    pub fn yvars(&self) -> &[u32] {
        &self.yvars
    }

    pub fn n1(&self) -> usize {
        self.xvars.len()
    }

    pub fn n2(&self) -> usize {
        self.yvars.len()
    }

    pub fn vars(&self, side: Side) -> &[u32] {
        match side {
            Side::X => &self.xvars,
            Side::Y => &self.yvars,
        }
    }

    /// Side and packed position of `var`.
    pub fn locate(&self, var: u32) -> Option<(Side, usize)> {
        self.lookup.get(var as usize).copied().flatten()
    }

    pub fn pack_x(&self, x: &Assignment) -> Result<u64> {
        x.pack(&self.xvars)
    }

    pub fn pack_y(&self, y: &Assignment) -> Result<u64> {
        y.pack(&self.yvars)
    }

    pub fn unpack_x(&self, bits: u64) -> Assignment {
        Assignment::from_packed(&self.xvars, bits)
    }

    pub fn unpack_y(&self, bits: u64) -> Assignment {
        Assignment::from_packed(&self.yvars, bits)
    }

    /// Index of the joint input `(x, y)` in a table over `2^(n1 + n2)` entries.
    #[inline]
    pub fn joint_index(&self, x: u64, y: u64) -> usize {
        (x | (y << self.xvars.len())) as usize
    }

    /// Per-side positive/negative literal masks of a clause over packed inputs.
    pub fn clause_masks(&self, c: &Clause) -> Result<ClauseMasks> {
        if self.n1() > 64 || self.n2() > 64 {
            return Err(Error::cap("side size for packed masks", self.n1().max(self.n2()), 64));
        }
        let mut m = ClauseMasks::default();
        for l in c.literals() {
            let (side, pos) = self
                .locate(l.var)
                .ok_or_else(|| Error::Scope(format!("variable {} not in partition", l.var)))?;
            let bit = 1u64 << pos;
            match (side, l.negated) {
                (Side::X, false) => m.x_pos |= bit,
                (Side::X, true) => m.x_neg |= bit,
                (Side::Y, false) => m.y_pos |= bit,
                (Side::Y, true) => m.y_neg |= bit,
            }
        }
        Ok(m)
    }
}

/// Literal masks of a clause over packed Alice/Bob inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClauseMasks {
    pub x_pos: u64,
    pub x_neg: u64,
    pub y_pos: u64,
    pub y_neg: u64,
}

impl ClauseMasks {
    /// True iff every X-side literal is false under `x`.
    #[inline]
    pub fn x_falsified(&self, x: u64) -> bool {
        x & self.x_pos == 0 && x & self.x_neg == self.x_neg
    }

    #[inline]
    pub fn y_falsified(&self, y: u64) -> bool {
        y & self.y_pos == 0 && y & self.y_neg == self.y_neg
    }

    #[inline]
    pub fn falsified(&self, x: u64, y: u64) -> bool {
        self.x_falsified(x) && self.y_falsified(y)
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut clause_start = 0;
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(Error::parse(lineno, "malformed header, expected `p cnf <n> <m>`"));
            }
            let n = fields[2]
                .parse()
                .map_err(|_| Error::parse(lineno, "malformed variable count in header"))?;
            let m = fields[3]
                .parse()
                .map_err(|_| Error::parse(lineno, "malformed clause count in header"))?;
            header = Some((n, m));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::parse(lineno, "clause data before `p cnf` header"));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid literal `{tok}`")))?;
            if current.is_empty() {
                clause_start = lineno;
            }
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(lineno, "empty clause"));
                }
                let clause = Clause::from_dimacs(&current)
                    .map_err(|_| Error::parse(clause_start, "repeated variable in clause"))?;
                clauses.push(clause);
                current.clear();
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(Error::parse(
                    lineno,
                    format!("literal {lit} out of range for n = {n}"),
                ));
            }
            current.push(lit);
        }
    }

    let Some((n, m)) = header else {
        return Err(Error::parse(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(Error::parse(last_line, "last clause is not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(Error::parse(
            last_line,
            format!("header declares {m} clauses but {} were found", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses).map_err(|e| Error::parse(last_line, e.to_string()))
}

/// Canonical DIMACS serialization: header, then one zero-terminated clause per line.
pub fn to_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        for l in c.literals() {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

pub fn eval_clause(c: &Clause, a: &Assignment) -> Result<bool> {
    let mut sat = false;
    for l in c.literals() {
        let v = a
            .get(l.var)
            .ok_or_else(|| Error::Scope(format!("variable {} outside assignment scope", l.var)))?;
        sat |= l.satisfied_by(v);
    }
    Ok(sat)
}

/// Encodes `C` as `sum_{C+} z_i + sum_{C-} (1 - z_i) >= 1`, with the negated
/// constants moved to the right-hand side.
pub fn clause_to_inequality(c: &Clause, n: usize) -> LinearInequality {
    let mut coeffs = vec![0i64; n];
    let mut negated = 0i64;
    for l in c.literals() {
        if l.negated {
            coeffs[l.var as usize - 1] = -1;
            negated += 1;
        } else {
            coeffs[l.var as usize - 1] = 1;
        }
    }
    LinearInequality::new(coeffs, 1 - negated)
}

pub fn brute_force_sat(f: &CnfFormula) -> Result<Option<Assignment>> {
    brute_force_sat_with_cap(f, DEFAULT_SAT_CAP)
}

/// Backtracking search with unit propagation, branching on the lowest
/// unassigned variable with 0 tried before 1.
pub fn brute_force_sat_with_cap(f: &CnfFormula, cap: usize) -> Result<Option<Assignment>> {
    if f.num_vars() > cap {
        return Err(Error::cap("variable count", f.num_vars(), cap));
    }
    Ok(Dpll::new(f).solve().map(|model| {
        Assignment::from_pairs(model.iter().enumerate().map(|(i, &b)| (i as u32 + 1, b)))
    }))
}

/// Smallest zero-based index of a clause falsified by the joint assignment `x ∪ y`.
pub fn search_violation(
    f: &CnfFormula,
    p: &VariablePartition,
    x: &Assignment,
    y: &Assignment,
) -> Result<usize> {
    check_scope(x, p.xvars(), "x")?;
    check_scope(y, p.yvars(), "y")?;
    let joint = x.union(y)?;
    for (i, c) in f.clauses().iter().enumerate() {
        if !eval_clause(c, &joint)? {
            return Ok(i);
        }
    }
    Err(Error::NoViolation)
}

pub(crate) fn check_scope(a: &Assignment, vars: &[u32], name: &str) -> Result<()> {
    if a.len() != vars.len() || vars.iter().any(|&v| a.get(v).is_none()) {
        return Err(Error::Scope(format!(
            "{name} must assign exactly the variables {vars:?}"
        )));
    }
    Ok(())
}
