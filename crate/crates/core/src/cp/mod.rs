//! Cutting Planes proofs: linear integral inequalities, rule-by-rule proof
//! checking, weight accounting, and resolution refutations used as CC_2
//! refutations.

mod format;
mod semantic;

pub use format::{parse_proof_lines, write_proof_lines};
pub use semantic::{check_semantic_step, SemanticLine, SEMANTIC_CAP};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfFormula, Side, VariablePartition, DEFAULT_SAT_CAP};
use crate::error::{Error, Result};
use crate::protocol::{inequality_protocol, ProtocolConfig, ProtocolTree};
use crate::solver::{Dpll, ResolutionLine, ResolutionSource};

/// `coeffs · z >= constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearInequality {
    coeffs: Vec<i64>,
    constant: i64,
}

impl LinearInequality {
    pub fn new(coeffs: Vec<i64>, constant: i64) -> Self {
        LinearInequality { coeffs, constant }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs.len()
    }

    /// `max(|a_i|, |b|)`.
    pub fn weight(&self) -> u64 {
        self.coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// All coefficients zero and constant at least one: no 0/1 (or real) point satisfies it.
    pub fn is_contradiction(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0) && self.constant >= 1
    }

    /// Evaluates on a 0/1 point indexed by `var - 1`.
    pub fn holds(&self, values: &[bool]) -> bool {
        let lhs: i64 = self
            .coeffs
            .iter()
            .zip(values)
            .filter(|(_, &v)| v)
            .map(|(c, _)| c)
            .sum();
        lhs >= self.constant
    }

    /// Evaluates on an arbitrary integer point.
    pub fn holds_at(&self, point: &[i64]) -> bool {
        let lhs: i64 = self.coeffs.iter().zip(point).map(|(c, v)| c * v).sum();
        lhs >= self.constant
    }

    pub fn checked_add(&self, other: &LinearInequality) -> Option<LinearInequality> {
        if self.coeffs.len() != other.coeffs.len() {
            return None;
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(LinearInequality::new(
            coeffs,
            self.constant.checked_add(other.constant)?,
        ))
    }

    /// Divides through by `d`, rounding the constant up. `None` unless `d > 0`
    /// divides every coefficient.
    pub fn divide(&self, d: i64) -> Option<LinearInequality> {
        if d <= 0 || self.coeffs.iter().any(|c| c % d != 0) {
            return None;
        }
        Some(LinearInequality::new(
            self.coeffs.iter().map(|c| c / d).collect(),
            ceil_div(self.constant, d),
        ))
    }

    /// Splits the left-hand side into Alice's and Bob's partial sums.
    pub fn split(&self, part: &VariablePartition) -> Result<SplitInequality> {
        if self.coeffs.len() != part.num_vars() {
            return Err(Error::Dimension(format!(
                "inequality over {} variables, partition over {}",
                self.coeffs.len(),
                part.num_vars()
            )));
        }
        if part.n1() > 64 || part.n2() > 64 {
            return Err(Error::cap("side size for packed inputs", part.n1().max(part.n2()), 64));
        }
        let mut x_terms = Vec::new();
        let mut y_terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (side, pos) = part.locate(i as u32 + 1).expect("partition covers 1..=n");
            match side {
                Side::X => x_terms.push((pos, c)),
                Side::Y => y_terms.push((pos, c)),
            }
        }
        Ok(SplitInequality {
            x_terms,
            y_terms,
            constant: self.constant,
        })
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coeffs {
            write!(f, "{c} ")?;
        }
        write!(f, ">= {}", self.constant)
    }
}

pub(crate) fn ceil_div(a: i64, d: i64) -> i64 {
    debug_assert!(d > 0);
    -((-a).div_euclid(d))
}

/// Inequality with terms grouped by owner, positions into packed inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInequality {
    pub x_terms: Vec<(usize, i64)>,
    pub y_terms: Vec<(usize, i64)>,
    pub constant: i64,
}

impl SplitInequality {
    #[inline]
    pub fn alice_sum(&self, x: u64) -> i64 {
        packed_sum(&self.x_terms, x)
    }

    #[inline]
    pub fn bob_sum(&self, y: u64) -> i64 {
        packed_sum(&self.y_terms, y)
    }

    #[inline]
    pub fn holds(&self, x: u64, y: u64) -> bool {
        self.alice_sum(x) + self.bob_sum(y) >= self.constant
    }
}

#[inline]
pub(crate) fn packed_sum(terms: &[(usize, i64)], bits: u64) -> i64 {
    terms
        .iter()
        .filter(|(pos, _)| bits >> pos & 1 == 1)
        .map(|(_, c)| c)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// `x_j >= 0`
    Lower,
    /// `-x_j >= -1`
    Upper,
}

/// Indices are zero-based; the text format is one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    Hypothesis(usize),
    BooleanAxiom { var: u32, kind: BoundKind },
    Add(usize, usize),
    Div { line: usize, divisor: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLine {
    pub inequality: LinearInequality,
    pub justification: Justification,
}

/// A proof over the system `Az >= b` in `n` variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpProof {
    pub n: usize,
    pub system: Vec<LinearInequality>,
    pub lines: Vec<ProofLine>,
}

impl CpProof {
    pub fn new(n: usize, system: Vec<LinearInequality>, lines: Vec<ProofLine>) -> Self {
        CpProof { n, system, lines }
    }

    /// Proof over the clause encoding of `f`.
    pub fn for_formula(f: &CnfFormula, lines: Vec<ProofLine>) -> Self {
        CpProof::new(f.num_vars(), f.to_inequalities(), lines)
    }

    /// Number of lines, Boolean axioms included.
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineVerdict {
    /// One-based line number.
    pub line: usize,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpReport {
    pub length: usize,
    pub all_valid: bool,
    /// Every line valid and some line is a contradiction `0 >= c`, `c >= 1`.
    pub refutation: bool,
    /// One-based index of the first contradiction line.
    pub refutation_line: Option<usize>,
    pub weight: u64,
    pub lines: Vec<LineVerdict>,
}

impl CpReport {
    pub fn invalid_lines(&self) -> impl Iterator<Item = &LineVerdict> {
        self.lines.iter().filter(|v| !v.valid)
    }
}

fn verify_line(p: &CpProof, i: usize) -> std::result::Result<(), String> {
    let line = &p.lines[i];
    let ineq = &line.inequality;
    if ineq.num_vars() != p.n {
        return Err(format!("has {} coefficients, expected {}", ineq.num_vars(), p.n));
    }
    let earlier = |j: usize| -> std::result::Result<&LinearInequality, String> {
        if j >= i {
            Err(format!("references line {} which is not earlier", j + 1))
        } else {
            Ok(&p.lines[j].inequality)
        }
    };
    let expected = match line.justification {
        Justification::Hypothesis(r) => p
            .system
            .get(r)
            .cloned()
            .ok_or_else(|| format!("hypothesis {} does not exist", r + 1))?,
        Justification::BooleanAxiom { var, kind } => {
            if var == 0 || var as usize > p.n {
                return Err(format!("boolean axiom on unknown variable {var}"));
            }
            let mut coeffs = vec![0; p.n];
            let (c, b) = match kind {
                BoundKind::Lower => (1, 0),
                BoundKind::Upper => (-1, -1),
            };
            coeffs[var as usize - 1] = c;
            LinearInequality::new(coeffs, b)
        }
        Justification::Add(j, k) => earlier(j)?
            .checked_add(earlier(k)?)
            .ok_or("addition overflows or mixes dimensions")?,
        Justification::Div { line: j, divisor } => {
            let premise = earlier(j)?;
            if divisor <= 0 {
                return Err(format!("divisor {divisor} is not positive"));
            }
            premise
                .divide(divisor)
                .ok_or_else(|| format!("{divisor} does not divide every coefficient of line {}", j + 1))?
        }
    };
    if &expected != ineq {
        return Err(format!("expected `{expected}`, found `{ineq}`"));
    }
    Ok(())
}

pub fn check_cp_proof(p: &CpProof) -> CpReport {
    let lines: Vec<LineVerdict> = (0..p.lines.len())
        .map(|i| {
            let res = verify_line(p, i);
            LineVerdict {
                line: i + 1,
                valid: res.is_ok(),
                reason: res.err(),
            }
        })
        .collect();
    let all_valid = lines.iter().all(|v| v.valid);
    let refutation_line = p
        .lines
        .iter()
        .position(|l| l.inequality.is_contradiction())
        .map(|i| i + 1);
    CpReport {
        length: p.len(),
        all_valid,
        refutation: all_valid && refutation_line.is_some(),
        refutation_line,
        weight: proof_weight(p),
        lines,
    }
}

/// Largest weight over all system rows and proof lines.
pub fn proof_weight(p: &CpProof) -> u64 {
    p.system
        .iter()
        .chain(p.lines.iter().map(|l| &l.inequality))
        .map(LinearInequality::weight)
        .max()
        .unwrap_or(0)
}

/// Default polynomial for "low weight": `n^3`.
pub fn default_weight_bound(n: usize) -> u64 {
    (n as u64).saturating_pow(3).max(1)
}

pub fn is_low_weight(p: &CpProof, bound: u64) -> bool {
    proof_weight(p) <= bound
}

/// A tree-like resolution refutation: the formula's clauses followed by resolvents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionRefutation {
    pub lines: Vec<ResolutionLine>,
}

impl ResolutionRefutation {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Checks axioms against `f`, every resolvent against its parents, and that
    /// the last line is the empty clause.
    pub fn check(&self, f: &CnfFormula) -> std::result::Result<(), String> {
        for (i, line) in self.lines.iter().enumerate() {
            match line.source {
                ResolutionSource::Axiom(ci) => {
                    let Some(c) = f.clauses().get(ci) else {
                        return Err(format!("line {}: no clause {}", i + 1, ci + 1));
                    };
                    let mut lits = c.literals().to_vec();
                    lits.sort();
                    if lits != line.literals {
                        return Err(format!("line {}: does not match clause {}", i + 1, ci + 1));
                    }
                }
                ResolutionSource::Resolvent { left, right, pivot } => {
                    if left >= i || right >= i {
                        return Err(format!("line {}: forward reference", i + 1));
                    }
                    let (a, b) = (&self.lines[left].literals, &self.lines[right].literals);
                    let clashes: Vec<u32> = a
                        .iter()
                        .filter(|l| b.contains(&l.negate()))
                        .map(|l| l.var)
                        .collect();
                    if clashes != [pivot] {
                        return Err(format!(
                            "line {}: parents clash on {clashes:?}, expected exactly [{pivot}]",
                            i + 1
                        ));
                    }
                    let mut expect: Vec<_> =
                        a.iter().chain(b).filter(|l| l.var != pivot).copied().collect();
                    expect.sort();
                    expect.dedup();
                    if expect != line.literals {
                        return Err(format!("line {}: wrong resolvent", i + 1));
                    }
                }
            }
        }
        match self.lines.last() {
            Some(l) if l.is_empty_clause() => Ok(()),
            _ => Err("last line is not the empty clause".into()),
        }
    }

    pub fn to_semantic_lines(&self, part: &VariablePartition) -> Result<Vec<SemanticLine>> {
        self.lines
            .iter()
            .map(|l| SemanticLine::from_literals(&l.literals, part))
            .collect()
    }
}

pub fn resolution_refutation_from_dpll(f: &CnfFormula) -> Result<ResolutionRefutation> {
    if f.num_vars() > DEFAULT_SAT_CAP {
        return Err(Error::cap("variable count", f.num_vars(), DEFAULT_SAT_CAP));
    }
    Dpll::new(f)
        .refute()
        .map(|lines| ResolutionRefutation { lines })
        .map_err(|model| {
            Error::Satisfiable(crate::cnf::Assignment::from_pairs(
                model.iter().enumerate().map(|(i, &b)| (i as u32 + 1, b)),
            ))
        })
}

/// One inequality protocol per proof line.
pub fn cp_lines_to_protocols(
    p: &CpProof,
    part: &VariablePartition,
    weight_bound: u64,
    cfg: &ProtocolConfig,
) -> Result<Vec<ProtocolTree>> {
    let w = proof_weight(p);
    if w > weight_bound {
        return Err(Error::cap("proof weight", w, weight_bound));
    }
    p.lines
        .iter()
        .map(|l| inequality_protocol(&l.inequality, part, cfg))
        .collect()
}
