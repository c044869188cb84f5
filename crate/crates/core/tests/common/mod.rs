#![allow(dead_code)]

use cutwork_core::circuit::{compile_cc_refutation, lines_from_resolution, Compilation, Gate, MonotoneCircuit, RefutationLine};
use cutwork_core::cnf::{brute_force_sat, Clause, CnfFormula, VariablePartition};
use cutwork_core::cp::resolution_refutation_from_dpll;
use cutwork_core::protocol::ProtocolConfig;
use cutwork_core::random_lab::{sample_f, sub_seed, DistributionParams};

pub fn cnf(n: usize, clauses: &[&[i64]]) -> CnfFormula {
    CnfFormula::new(n, clauses.iter().map(|c| Clause::from_dimacs(c).unwrap()).collect()).unwrap()
}

/// All four clauses over `x1, y1` (variables 1 and 2), split `{1} | {2}`.
pub fn complete_two_cnf() -> (CnfFormula, VariablePartition) {
    (
        cnf(2, &[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]),
        VariablePartition::new(2, vec![1], vec![2]).unwrap(),
    )
}

/// The first `count` unsatisfiable draws of `F(m, n, d)` under sub-seeds of
/// `master`, with the alternating partition.
pub fn unsat_samples(m: usize, n: usize, d: usize, master: u64, count: usize) -> Vec<(u64, CnfFormula, VariablePartition)> {
    let mut out = Vec::with_capacity(count);
    for i in 0.. {
        if out.len() == count {
            break;
        }
        let seed = sub_seed(master, "unsat_samples", i);
        let f = sample_f(&DistributionParams::new(m, n, d, seed).unwrap()).unwrap();
        if brute_force_sat(&f).unwrap().is_none() {
            out.push((seed, f, VariablePartition::alternating(n)));
        }
        assert!(i < 100 * count as u64, "too few unsatisfiable draws");
    }
    out
}

pub fn resolution_lines(f: &CnfFormula, part: &VariablePartition) -> Vec<RefutationLine> {
    let r = resolution_refutation_from_dpll(f).unwrap();
    lines_from_resolution(&r, part).unwrap()
}

pub fn compile(f: &CnfFormula, part: &VariablePartition) -> (Vec<RefutationLine>, Compilation) {
    let lines = resolution_lines(f, part);
    let comp = compile_cc_refutation(&lines, f, part, &ProtocolConfig::default()).unwrap();
    (lines, comp)
}

/// Instances as one truth table per clause, indexed by the clause's X-side
/// variables in ascending order, first variable most significant.
pub type Blocks = Vec<Vec<bool>>;

pub fn x_vars_per_clause(f: &CnfFormula, part: &VariablePartition) -> Vec<Vec<u32>> {
    f.clauses()
        .iter()
        .map(|c| {
            let mut vs: Vec<u32> = c.vars().filter(|v| part.xvars().contains(v)).collect();
            vs.sort_unstable();
            vs
        })
        .collect()
}

fn bit_of(vars: &[u32], packed: u64, v: u32) -> bool {
    let pos = vars.binary_search(&v).unwrap();
    packed >> pos & 1 == 1
}

fn index_msb_first(bits: impl Iterator<Item = bool>) -> usize {
    bits.fold(0, |acc, b| acc << 1 | b as usize)
}

pub fn u_blocks(f: &CnfFormula, part: &VariablePartition, x: u64) -> Blocks {
    x_vars_per_clause(f, part)
        .iter()
        .map(|vs| {
            let mut block = vec![false; 1 << vs.len()];
            block[index_msb_first(vs.iter().map(|&v| bit_of(part.xvars(), x, v)))] = true;
            block
        })
        .collect()
}

pub fn v_blocks(f: &CnfFormula, part: &VariablePartition, y: u64) -> Blocks {
    let xs = x_vars_per_clause(f, part);
    f.clauses()
        .iter()
        .zip(&xs)
        .map(|(c, vs)| {
            let mut block = vec![true; 1 << vs.len()];
            let y_false = c
                .literals()
                .iter()
                .filter(|l| part.yvars().contains(&l.var))
                .all(|l| bit_of(part.yvars(), y, l.var) == l.negated);
            if y_false {
                let alpha = vs.iter().map(|&v| c.literals().iter().any(|l| l.var == v && l.negated));
                block[index_msb_first(alpha)] = false;
            }
            block
        })
        .collect()
}

/// Value of every gate.
pub fn eval_gates(c: &MonotoneCircuit, blocks: &Blocks) -> Vec<bool> {
    let mut vals = Vec::with_capacity(c.len());
    for g in c.gates() {
        let v = match g {
            Gate::Input { constraint, alpha } => blocks[*constraint][index_msb_first(alpha.iter().copied())],
            Gate::Const0 => false,
            Gate::Const1 => true,
            Gate::And(a, b) => vals[*a] && vals[*b],
            Gate::Or(a, b) => vals[*a] || vals[*b],
        };
        vals.push(v);
    }
    vals
}

/// Some X-side assignment picks a 1 in every block.
pub fn blocks_satisfiable(f: &CnfFormula, part: &VariablePartition, blocks: &Blocks) -> bool {
    let xs = x_vars_per_clause(f, part);
    (0..1u64 << part.n1()).any(|x| {
        xs.iter()
            .zip(blocks)
            .all(|(vs, b)| b[index_msb_first(vs.iter().map(|&v| bit_of(part.xvars(), x, v)))])
    })
}

/// Clause `c` under packed `(x, y)`.
pub fn clause_value(c: &Clause, part: &VariablePartition, x: u64, y: u64) -> bool {
    c.literals().iter().any(|l| {
        let v = if part.xvars().contains(&l.var) {
            bit_of(part.xvars(), x, l.var)
        } else {
            bit_of(part.yvars(), y, l.var)
        };
        v != l.negated
    })
}
