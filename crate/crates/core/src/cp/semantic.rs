//! Boolean functions on the joint input space of a partition, stored as truth
//! tables indexed by `x | y << n1`.

use fixedbitset::FixedBitSet;

use crate::cnf::{Clause, Literal, VariablePartition};
use crate::cp::LinearInequality;
use crate::error::{Error, Result};

/// Largest `n1 + n2` for which truth tables are materialized.
pub const SEMANTIC_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemanticLine {
    n1: usize,
    n2: usize,
    table: FixedBitSet,
}

impl SemanticLine {
    pub fn from_fn(n1: usize, n2: usize, mut f: impl FnMut(u64, u64) -> bool) -> Result<Self> {
        if n1 + n2 > SEMANTIC_CAP {
            return Err(Error::cap("truth-table variable count", n1 + n2, SEMANTIC_CAP));
        }
        let mut table = FixedBitSet::with_capacity(1 << (n1 + n2));
        for y in 0..1u64 << n2 {
            for x in 0..1u64 << n1 {
                if f(x, y) {
                    table.insert((x | y << n1) as usize);
                }
            }
        }
        Ok(SemanticLine { n1, n2, table })
    }

    pub fn constant(part: &VariablePartition, value: bool) -> Result<Self> {
        Self::from_fn(part.n1(), part.n2(), |_, _| value)
    }

    pub fn from_clause(c: &Clause, part: &VariablePartition) -> Result<Self> {
        let masks = part.clause_masks(c)?;
        Self::from_fn(part.n1(), part.n2(), |x, y| !masks.falsified(x, y))
    }

    /// Clause given as a literal list; the empty list is the constant 0.
    pub fn from_literals(lits: &[Literal], part: &VariablePartition) -> Result<Self> {
        match Clause::new(lits.to_vec()) {
            Ok(c) => Self::from_clause(&c, part),
            Err(_) if lits.is_empty() => Self::constant(part, false),
            Err(e) => Err(e),
        }
    }

    pub fn from_inequality(ineq: &LinearInequality, part: &VariablePartition) -> Result<Self> {
        let split = ineq.split(part)?;
        Self::from_fn(part.n1(), part.n2(), |x, y| split.holds(x, y))
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn value(&self, x: u64, y: u64) -> bool {
        self.table.contains((x | y << self.n1) as usize)
    }

    pub fn table(&self) -> &FixedBitSet {
        &self.table
    }

    /// `Some(v)` if the function is constantly `v`.
    pub fn constant_value(&self) -> Option<bool> {
        match self.table.count_ones(..) {
            0 => Some(false),
            k if k == self.table.len() => Some(true),
            _ => None,
        }
    }

    pub fn same_shape(&self, other: &SemanticLine) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2
    }

    /// First joint input `(x, y)` where `premises` all hold and `self` fails.
    pub fn entailment_counterexample(&self, premises: &[&SemanticLine]) -> Option<(u64, u64)> {
        let mut both = FixedBitSet::with_capacity(self.table.len());
        both.insert_range(..);
        for p in premises {
            both.intersect_with(&p.table);
        }
        both.difference_with(&self.table);
        both.ones().next().map(|z| {
            let z = z as u64;
            (z & ((1 << self.n1) - 1), z >> self.n1)
        })
    }
}

/// True iff `f ∧ g ⊨ h` on every joint input.
pub fn check_semantic_step(f: &SemanticLine, g: &SemanticLine, h: &SemanticLine) -> Result<bool> {
    if !f.same_shape(g) || !f.same_shape(h) {
        return Err(Error::Dimension(format!(
            "tables over ({},{}), ({},{}), ({},{})",
            f.n1, f.n2, g.n1, g.n2, h.n1, h.n2
        )));
    }
    Ok(h.entailment_counterexample(&[f, g]).is_none())
}
