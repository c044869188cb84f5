//! Monotone CSP-SAT over the constraint graph of `Search(F)`.
//!
//! An instance is a bit vector holding one truth-table block per constraint,
//! in constraint order. Within block `i`, entry `α` (an assignment to `vars(i)`
//! in ascending variable order) sits at offset `Σ_j α_j |Σ|^(len-1-j)`, i.e.
//! lexicographic order with the first variable most significant.

use std::collections::HashSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{check_scope, Assignment, CnfFormula, Side, VariablePartition};
use crate::error::{Error, Result};

/// Default cap on X-side variables for satisfiability backtracking.
pub const DEFAULT_CSP_CAP: usize = 20;
/// Largest number of index sets enumerated by exact `ab_count`.
pub const AB_EXACT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintGraph {
    xvars: Vec<u32>,
    constraints: Vec<Vec<u32>>,
    alphabet: usize,
    degree_bound: usize,
    offsets: Vec<usize>,
}

impl ConstraintGraph {
    pub fn new(xvars: Vec<u32>, constraints: Vec<Vec<u32>>, alphabet: usize) -> Result<Self> {
        if alphabet < 1 {
            return Err(Error::InvalidArgument("alphabet must be non-empty".into()));
        }
        let known: HashSet<u32> = xvars.iter().copied().collect();
        let mut offsets = Vec::with_capacity(constraints.len() + 1);
        let mut total = 0usize;
        offsets.push(0);
        for (i, vars) in constraints.iter().enumerate() {
            if vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "vars of constraint {} must be strictly ascending",
                    i + 1
                )));
            }
            if let Some(v) = vars.iter().find(|v| !known.contains(v)) {
                return Err(Error::InvalidArgument(format!(
                    "constraint {} uses unknown variable {v}",
                    i + 1
                )));
            }
            let block = (alphabet as u64)
                .checked_pow(vars.len() as u32)
                .filter(|&b| b <= 1 << 32)
                .ok_or_else(|| Error::cap("truth-table block size", u64::MAX, 1u64 << 32))?;
            total += block as usize;
            offsets.push(total);
        }
        let degree_bound = constraints.iter().map(Vec::len).max().unwrap_or(0);
        Ok(ConstraintGraph {
            xvars,
            constraints,
            alphabet,
            degree_bound,
            offsets,
        })
    }

    pub fn xvars(&self) -> &[u32] {
        &self.xvars
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self, i: usize) -> &[u32] {
        &self.constraints[i]
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Total number of truth-table bits `N`.
    pub fn num_bits(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn block_size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        (0..self.num_constraints()).map(|i| self.block_size(i)).collect()
    }

    /// Position of `TT_i(α)` where `alpha` indexes `Σ^vars(i)` lexicographically.
    pub fn position(&self, i: usize, alpha: usize) -> usize {
        debug_assert!(alpha < self.block_size(i));
        self.offsets[i] + alpha
    }

    /// Inverse of [`position`](Self::position).
    pub fn locate(&self, pos: usize) -> (usize, usize) {
        let i = self.offsets.partition_point(|&o| o <= pos) - 1;
        (i, pos - self.offsets[i])
    }

    /// Lexicographic index of a binary restriction `α` given as bits in
    /// `vars(i)` order.
    pub fn alpha_index(values: impl IntoIterator<Item = bool>) -> usize {
        values.into_iter().fold(0, |acc, b| acc << 1 | b as usize)
    }

    /// Binary `α` for a block entry, in `vars(i)` order.
    pub fn alpha_bits(&self, i: usize, alpha: usize) -> Vec<bool> {
        let len = self.constraints[i].len();
        (0..len).map(|j| alpha >> (len - 1 - j) & 1 == 1).collect()
    }

    fn require_binary(&self) -> Result<()> {
        if self.alphabet != 2 {
            return Err(Error::InvalidArgument(format!(
                "operation needs the binary alphabet, graph has |Σ| = {}",
                self.alphabet
            )));
        }
        Ok(())
    }

    /// `U` is injective iff every X-side variable occurs in some constraint.
    pub fn u_injective(&self) -> bool {
        let used: HashSet<u32> = self.constraints.iter().flatten().copied().collect();
        self.xvars.iter().all(|v| used.contains(v))
    }
}

/// Constraint `i` gets the X-side variables of clause `i`, ascending.
pub fn build_constraint_graph(f: &CnfFormula, part: &VariablePartition) -> ConstraintGraph {
    let constraints = f
        .clauses()
        .iter()
        .map(|c| {
            let mut vars: Vec<u32> = c
                .vars()
                .filter(|&v| matches!(part.locate(v), Some((Side::X, _))))
                .collect();
            vars.sort_unstable();
            vars
        })
        .collect();
    ConstraintGraph::new(part.xvars().to_vec(), constraints, 2).expect("clause variables are valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CspSatInstance {
    bits: FixedBitSet,
}

impl CspSatInstance {
    pub fn from_bits(bits: FixedBitSet) -> Self {
        CspSatInstance { bits }
    }

    pub fn all_ones(g: &ConstraintGraph) -> Self {
        let mut bits = FixedBitSet::with_capacity(g.num_bits());
        bits.insert_range(..);
        CspSatInstance { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len() == 0
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        self.bits.contains(pos)
    }

    pub fn set(&mut self, pos: usize, value: bool) {
        self.bits.set(pos, value);
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &CspSatInstance) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn block(&self, g: &ConstraintGraph, i: usize) -> Vec<bool> {
        (0..g.block_size(i)).map(|a| self.get(g.position(i, a))).collect()
    }

    fn check_layout(&self, g: &ConstraintGraph) -> Result<()> {
        if self.len() != g.num_bits() {
            return Err(Error::Dimension(format!(
                "instance has {} bits, graph needs {}",
                self.len(),
                g.num_bits()
            )));
        }
        Ok(())
    }
}

/// `U(x)`: block `i` has a single 1 at `x` restricted to `vars(i)`.
pub fn accepting_instance(g: &ConstraintGraph, x: &Assignment) -> Result<CspSatInstance> {
    g.require_binary()?;
    check_scope(x, g.xvars(), "x")?;
    let mut bits = FixedBitSet::with_capacity(g.num_bits());
    for i in 0..g.num_constraints() {
        let alpha = ConstraintGraph::alpha_index(g.vars(i).iter().map(|&v| x.get(v).unwrap()));
        bits.insert(g.position(i, alpha));
    }
    Ok(CspSatInstance { bits })
}

/// `U(x)` for a packed Alice input.
pub(crate) fn accepting_packed(g: &ConstraintGraph, part: &VariablePartition, x: u64) -> CspSatInstance {
    let mut bits = FixedBitSet::with_capacity(g.num_bits());
    for i in 0..g.num_constraints() {
        let alpha = ConstraintGraph::alpha_index(g.vars(i).iter().map(|&v| {
            let (_, pos) = part.locate(v).unwrap();
            x >> pos & 1 == 1
        }));
        bits.insert(g.position(i, alpha));
    }
    CspSatInstance { bits }
}

/// `V(y)`: entry `(i, α)` is 0 iff clause `i` is falsified by `α` together with `y`.
pub fn rejecting_instance(
    g: &ConstraintGraph,
    f: &CnfFormula,
    part: &VariablePartition,
    y: &Assignment,
) -> Result<CspSatInstance> {
    check_scope(y, part.yvars(), "y")?;
    rejecting_packed(g, f, part, part.pack_y(y)?)
}

pub(crate) fn rejecting_packed(
    g: &ConstraintGraph,
    f: &CnfFormula,
    part: &VariablePartition,
    y: u64,
) -> Result<CspSatInstance> {
    g.require_binary()?;
    if g.num_constraints() != f.num_clauses() || g.xvars() != part.xvars() {
        return Err(Error::Dimension("constraint graph does not match formula/partition".into()));
    }
    let mut inst = CspSatInstance::all_ones(g);
    for (i, c) in f.clauses().iter().enumerate() {
        let y_falsified = c.literals().iter().all(|l| match part.locate(l.var) {
            Some((Side::Y, pos)) => (y >> pos & 1 == 1) == l.negated,
            _ => true,
        });
        if !y_falsified {
            continue;
        }
        // The unique α falsifying the X-part: each X literal set to false.
        let alpha = ConstraintGraph::alpha_index(g.vars(i).iter().map(|&v| {
            let l = c.literals().iter().find(|l| l.var == v).unwrap();
            l.negated
        }));
        inst.set(g.position(i, alpha), false);
    }
    Ok(inst)
}

pub fn csp_sat_eval(g: &ConstraintGraph, inst: &CspSatInstance) -> Result<bool> {
    Ok(csp_sat_witness(g, inst, DEFAULT_CSP_CAP)?.is_some())
}

/// A satisfying `Σ`-assignment to the X-side variables (in `xvars` order), if any.
pub fn csp_sat_witness(
    g: &ConstraintGraph,
    inst: &CspSatInstance,
    cap: usize,
) -> Result<Option<Vec<usize>>> {
    inst.check_layout(g)?;
    let nx = g.xvars().len();
    if nx > cap {
        return Err(Error::cap("X-side variable count", nx, cap));
    }
    let pos_of = |v: u32| g.xvars().iter().position(|&u| u == v).unwrap();
    // Constraints are checked once their last variable is assigned.
    let mut triggered: Vec<Vec<usize>> = vec![Vec::new(); nx];
    for i in 0..g.num_constraints() {
        match g.vars(i).iter().map(|&v| pos_of(v)).max() {
            Some(last) => triggered[last].push(i),
            None => {
                if !inst.get(g.position(i, 0)) {
                    return Ok(None);
                }
            }
        }
    }
    let var_pos: Vec<Vec<usize>> = (0..g.num_constraints())
        .map(|i| g.vars(i).iter().map(|&v| pos_of(v)).collect())
        .collect();
    let q = g.alphabet();
    let mut values = vec![0usize; nx];

    fn dfs(
        depth: usize,
        values: &mut [usize],
        q: usize,
        triggered: &[Vec<usize>],
        var_pos: &[Vec<usize>],
        g: &ConstraintGraph,
        inst: &CspSatInstance,
    ) -> bool {
        if depth == values.len() {
            return true;
        }
        for a in 0..q {
            values[depth] = a;
            let ok = triggered[depth].iter().all(|&i| {
                let alpha = var_pos[i].iter().fold(0, |acc, &p| acc * q + values[p]);
                inst.get(g.position(i, alpha))
            });
            if ok && dfs(depth + 1, values, q, triggered, var_pos, g, inst) {
                return true;
            }
        }
        false
    }

    Ok(dfs(0, &mut values, q, &triggered, &var_pos, g, inst).then_some(values))
}

/// `V` is injective iff all Bob inputs give distinct rejecting instances.
pub fn v_injective(g: &ConstraintGraph, f: &CnfFormula, part: &VariablePartition, cap: usize) -> Result<bool> {
    if part.n2() > cap {
        return Err(Error::cap("Y-side variable count", part.n2(), cap));
    }
    let mut seen = HashSet::new();
    for y in 0..1u64 << part.n2() {
        if !seen.insert(rejecting_packed(g, f, part, y)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbMode {
    Exact,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbQuery {
    pub r: usize,
    pub b: bool,
    pub value: usize,
    /// False for sampled values, which are lower bounds on the maximum.
    pub exact: bool,
    pub trials: u64,
}

/// `A_b(r, U) = max_{|I| = r} |{u ∈ U : u_i = b for all i ∈ I}|`.
pub fn ab_count(instances: &[CspSatInstance], r: usize, b: bool, mode: AbMode) -> Result<AbQuery> {
    let n = instances.first().map_or(0, CspSatInstance::len);
    if instances.iter().any(|u| u.len() != n) {
        return Err(Error::Dimension("instances differ in length".into()));
    }
    let mut query = AbQuery {
        r,
        b,
        value: 0,
        exact: matches!(mode, AbMode::Exact),
        trials: 0,
    };
    if r == 0 {
        query.value = instances.len();
        query.exact = true;
        return Ok(query);
    }
    if r > n {
        query.exact = true;
        return Ok(query);
    }
    // agree[p] = instances whose bit p equals b
    let agree: Vec<FixedBitSet> = (0..n)
        .map(|p| {
            let mut s = FixedBitSet::with_capacity(instances.len());
            for (k, u) in instances.iter().enumerate() {
                if u.get(p) == b {
                    s.insert(k);
                }
            }
            s
        })
        .collect();
    match mode {
        AbMode::Exact => {
            let combos = binomial(n as u64, r as u64);
            if combos > AB_EXACT_BUDGET {
                return Err(Error::cap("index sets for exact A_b", combos, AB_EXACT_BUDGET));
            }
            let mut all = FixedBitSet::with_capacity(instances.len());
            all.insert_range(..);
            query.value = best_subset(&agree, 0, r, &all, 0);
            query.trials = combos;
        }
        AbMode::Sampled { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let idx = sample(&mut rng, n, r);
                let mut acc = agree[idx.index(0)].clone();
                for p in idx.iter().skip(1) {
                    acc.intersect_with(&agree[p]);
                }
                query.value = query.value.max(acc.count_ones(..));
            }
            query.trials = trials;
        }
    }
    Ok(query)
}

fn best_subset(agree: &[FixedBitSet], start: usize, remaining: usize, acc: &FixedBitSet, best: usize) -> usize {
    if remaining == 0 {
        return best.max(acc.count_ones(..));
    }
    let mut best = best;
    for p in start..=agree.len() - remaining {
        let next = acc.intersection(&agree[p]).collect::<FixedBitSet>();
        // Intersections only shrink, so a branch at or below `best` cannot win.
        if next.count_ones(..) > best || best == 0 {
            best = best_subset(agree, p + 1, remaining - 1, &next, best);
        }
    }
    best
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Inputs to the symmetric-approximation size bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JuknaParams {
    pub u_size: u64,
    pub v_size: u64,
    pub a1_1: u64,
    pub a1_r: u64,
    pub a0_s: u64,
    pub r: u64,
    pub s: u64,
}

/// `min{ (|U| - 2s A_1(1,U)) / ((2s)^(r+1) A_1(r,U)), |V| / ((2r)^(s+1) A_0(s,V)) }`,
/// clamped below at 0.
pub fn jukna_bound(p: &JuknaParams) -> Result<BigRational> {
    if p.r == 0 || p.s == 0 {
        return Err(Error::InvalidArgument("r and s must be at least 1".into()));
    }
    if p.a1_r == 0 || p.a0_s == 0 {
        return Err(Error::InvalidArgument("A-counts in denominators must be nonzero".into()));
    }
    let big = |v: u64| BigInt::from(v);
    let two_s = big(2 * p.s);
    let two_r = big(2 * p.r);
    let first = BigRational::new(
        big(p.u_size) - &two_s * big(p.a1_1),
        num_traits::pow(two_s.clone(), (p.r + 1) as usize) * big(p.a1_r),
    );
    let second = BigRational::new(
        big(p.v_size),
        num_traits::pow(two_r, (p.s + 1) as usize) * big(p.a0_s),
    );
    let min = if first < second { first } else { second };
    Ok(if min.is_negative() { BigRational::zero() } else { min })
}

/// Text layout: `csp <m> <n_xside> <|Σ|>`, `blocks <sizes...>`, then one line of
/// 0/1 characters per block.
pub fn write_instance(g: &ConstraintGraph, inst: &CspSatInstance) -> String {
    let mut out = format!(
        "csp {} {} {}\nblocks",
        g.num_constraints(),
        g.xvars().len(),
        g.alphabet()
    );
    for s in g.block_sizes() {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    for i in 0..g.num_constraints() {
        for b in inst.block(g, i) {
            out.push(if b { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn parse_instance(g: &ConstraintGraph, text: &str) -> Result<CspSatInstance> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let expect = format!("csp {} {} {}", g.num_constraints(), g.xvars().len(), g.alphabet());
    if header.split_whitespace().collect::<Vec<_>>().join(" ") != expect {
        return Err(Error::parse(ln + 1, format!("header does not match graph, expected `{expect}`")));
    }
    let (ln, blocks) = lines.next().ok_or_else(|| Error::parse(ln + 2, "missing block sizes"))?;
    let sizes: Vec<usize> = blocks
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse().map_err(|_| Error::parse(ln + 1, "bad block size")))
        .collect::<Result<_>>()?;
    if !blocks.trim_start().starts_with("blocks") || sizes != g.block_sizes() {
        return Err(Error::parse(ln + 1, "block sizes do not match graph"));
    }
    let mut bits = FixedBitSet::with_capacity(g.num_bits());
    for i in 0..g.num_constraints() {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| Error::parse(ln + 2 + i, format!("missing block {}", i + 1)))?;
        let row = row.trim();
        if row.len() != g.block_size(i) {
            return Err(Error::parse(ln + 1, format!("block {} has wrong length", i + 1)));
        }
        for (a, ch) in row.chars().enumerate() {
            match ch {
                '1' => bits.insert(g.position(i, a)),
                '0' => {}
                _ => return Err(Error::parse(ln + 1, format!("bad character `{ch}`"))),
            }
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(ln + 1, "trailing data"));
    }
    Ok(CspSatInstance { bits })
}
