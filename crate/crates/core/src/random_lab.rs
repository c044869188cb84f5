//! Seeded random CNF distributions and empirical checks of their structure:
//! unsatisfiability rates, clause-set expansion, distinct falsification
//! profiles, heavy-clause partitions and heavy-clause satisfaction.
//!
//! All randomness derives from a master seed. The sub-seed for a purpose tag
//! and index is the first eight bytes (little-endian) of
//! `SHA-256(seed_le || tag_len_le || tag || index_le)`.

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cnf::{brute_force_sat, Clause, CnfFormula, Literal, Side, VariablePartition};
use crate::csp::binomial;
use crate::error::{Error, Result};

/// Cap on enumerated variables for exact profile and heavy-clause checks.
pub const EXACT_ENUM_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionParams {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl DistributionParams {
    pub fn new(m: usize, n: usize, d: usize, seed: u64) -> Result<Self> {
        let p = DistributionParams { m, n, d, seed };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > self.n {
            return Err(Error::InvalidArgument(format!(
                "width d={} must satisfy 1 <= d <= n={}",
                self.d, self.n
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("clause count m must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        DistributionParams { seed, ..self }
    }
}

pub fn sub_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn rng_for(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, tag, index))
}

/// `m` clauses over variables `offset+1 ..= offset+n`, each on `d` distinct
/// variables with independent fair signs.
fn sample_clauses(rng: &mut ChaCha8Rng, m: usize, n: usize, d: usize, offset: u32) -> Vec<Vec<Literal>> {
    let mut pool: Vec<u32> = (1..=n as u32).map(|v| v + offset).collect();
    (0..m)
        .map(|_| {
            let (chosen, _) = pool.partial_shuffle(rng, d);
            chosen
                .iter()
                .map(|&var| Literal {
                    var,
                    negated: rng.gen::<bool>(),
                })
                .collect()
        })
        .collect()
}

/// A draw from `F(m, n, d)`.
pub fn sample_f(p: &DistributionParams) -> Result<CnfFormula> {
    p.validate()?;
    let mut rng = rng_for(p.seed, "sample_f", 0);
    let clauses = sample_clauses(&mut rng, p.m, p.n, p.d, 0)
        .into_iter()
        .map(Clause::new)
        .collect::<Result<_>>()?;
    CnfFormula::new(p.n, clauses)
}

/// A draw from the tensor distribution: clause `i` is `C_i ∨ D_i` with `C_i`
/// over variables `1..=n` (the X side) and `D_i` over `n+1..=2n` (the Y side).
pub fn sample_tensor(p: &DistributionParams) -> Result<(CnfFormula, VariablePartition)> {
    p.validate()?;
    let left = sample_clauses(&mut rng_for(p.seed, "tensor-x", 0), p.m, p.n, p.d, 0);
    let right = sample_clauses(&mut rng_for(p.seed, "tensor-y", 0), p.m, p.n, p.d, p.n as u32);
    let clauses = left
        .into_iter()
        .zip(right)
        .map(|(mut a, b)| {
            a.extend(b);
            Clause::new(a)
        })
        .collect::<Result<_>>()?;
    let n = p.n as u32;
    let part = VariablePartition::new(2 * p.n, (1..=n).collect(), (n + 1..=2 * n).collect())?;
    Ok((CnfFormula::new(2 * p.n, clauses)?, part))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub unsat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsatReport {
    pub params: DistributionParams,
    pub tensor: bool,
    pub samples: usize,
    pub unsat_count: usize,
    pub rate: f64,
    pub per_seed: Vec<SeedOutcome>,
}

/// Fraction of `samples` draws that the exhaustive oracle finds unsatisfiable.
/// Draw `i` uses seed `sub_seed(p.seed, "unsat_rate", i)`.
pub fn unsat_rate(p: &DistributionParams, tensor: bool, samples: usize) -> Result<UnsatReport> {
    p.validate()?;
    let per_seed = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let seed = sub_seed(p.seed, "unsat_rate", i);
            let q = p.with_seed(seed);
            let f = if tensor { sample_tensor(&q)?.0 } else { sample_f(&q)? };
            Ok(SeedOutcome {
                seed,
                unsat: brute_force_sat(&f)?.is_none(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unsat_count = per_seed.iter().filter(|o| o.unsat).count();
    Ok(UnsatReport {
        params: *p,
        tensor,
        samples,
        unsat_count,
        rate: if samples == 0 { 0.0 } else { unsat_count as f64 / samples as f64 },
        per_seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exact,
    Sampled { trials: u64 },
    /// Exact when the enumeration fits `exact_budget`, sampled otherwise.
    Auto { exact_budget: u64, trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub s: usize,
    pub min_vars: usize,
    /// `(1 - ε) d s`.
    pub threshold: f64,
    pub exact: bool,
    pub subsets_checked: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub epsilon: String,
    pub d: usize,
    pub s_max: usize,
    /// `⌊n / (e d²)⌋`, the largest set size with guaranteed expansion.
    pub expansion_s_max: usize,
    pub seed: u64,
    pub rows: Vec<ExpansionRow>,
    pub pass: bool,
}

pub fn expansion_s_max(n: usize, d: usize) -> usize {
    (n as f64 / (std::f64::consts::E * (d * d) as f64)).floor() as usize
}

fn check_epsilon(eps: Ratio<u64>) -> Result<()> {
    if *eps.numer() == 0 || eps >= Ratio::from_integer(1) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// `count > (1 - ε) d`, compared exactly.
fn exceeds_fraction(count: usize, eps: Ratio<u64>, d: usize) -> bool {
    let (num, den) = (*eps.numer(), *eps.denom());
    count as u64 * den > (den - num) * d as u64
}

/// Minimum `|vars(S)|` over clause subsets `S` of each size `1..=s_max`,
/// against `(1 - ε) d s` with `d` the formula width.
pub fn expansion_report(
    f: &CnfFormula,
    epsilon: Ratio<u64>,
    s_max: usize,
    mode: CheckMode,
    seed: u64,
) -> Result<ExpansionReport> {
    check_epsilon(epsilon)?;
    let m = f.num_clauses();
    if s_max > m {
        return Err(Error::InvalidArgument(format!("s_max {s_max} exceeds the clause count {m}")));
    }
    let d = f.width();
    let (num, den) = (*epsilon.numer(), *epsilon.denom());
    let clause_vars: Vec<Vec<u32>> = f.clauses().iter().map(|c| c.vars().collect()).collect();
    let mut rows = Vec::with_capacity(s_max);
    for s in 1..=s_max {
        let combos = binomial(m as u64, s as u64);
        let (exact, trials) = match mode {
            CheckMode::Exact if combos > crate::csp::AB_EXACT_BUDGET => {
                return Err(Error::cap("clause subsets for exact expansion", combos, crate::csp::AB_EXACT_BUDGET));
            }
            CheckMode::Exact => (true, combos),
            CheckMode::Sampled { trials } => (false, trials),
            CheckMode::Auto { exact_budget, trials } => {
                if combos <= exact_budget {
                    (true, combos)
                } else {
                    (false, trials)
                }
            }
        };
        let min_vars = if exact {
            let mut counts = vec![0u32; f.num_vars() + 1];
            min_union_exact(&clause_vars, s, 0, 0, &mut counts, usize::MAX)
        } else {
            let mut rng = rng_for(seed, "expansion", s as u64);
            let mut counts = vec![0u32; f.num_vars() + 1];
            let mut best = usize::MAX;
            for _ in 0..trials {
                let idx = sample(&mut rng, m, s);
                let mut distinct = 0;
                for i in idx.iter() {
                    for &v in &clause_vars[i] {
                        if counts[v as usize] == 0 {
                            distinct += 1;
                        }
                        counts[v as usize] += 1;
                    }
                }
                best = best.min(distinct);
                for i in idx.iter() {
                    for &v in &clause_vars[i] {
                        counts[v as usize] -= 1;
                    }
                }
            }
            best
        };
        rows.push(ExpansionRow {
            s,
            min_vars,
            threshold: (den - num) as f64 * (d * s) as f64 / den as f64,
            exact,
            subsets_checked: trials,
            pass: min_vars as u64 * den >= (den - num) * (d * s) as u64,
        });
    }
    Ok(ExpansionReport {
        epsilon: epsilon.to_string(),
        d,
        s_max,
        expansion_s_max: expansion_s_max(f.num_vars(), d),
        seed,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

fn min_union_exact(
    clause_vars: &[Vec<u32>],
    remaining: usize,
    start: usize,
    distinct: usize,
    counts: &mut [u32],
    best: usize,
) -> usize {
    if remaining == 0 {
        return best.min(distinct);
    }
    let mut best = best;
    for i in start..=clause_vars.len() - remaining {
        let mut now = distinct;
        for &v in &clause_vars[i] {
            if counts[v as usize] == 0 {
                now += 1;
            }
            counts[v as usize] += 1;
        }
        // Unions only grow, so a partial union at or above `best` cannot win.
        if now < best {
            best = min_union_exact(clause_vars, remaining - 1, i + 1, now, counts, best);
        }
        for &v in &clause_vars[i] {
            counts[v as usize] -= 1;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub exact: bool,
    /// Number of variables the profiles range over.
    pub vars: usize,
    /// Exact mode: all rows distinct. Sampled mode: no colliding pair seen.
    pub distinct: bool,
    /// Exact mode: rows equal to an earlier row. Sampled mode: colliding pairs.
    pub collisions: u64,
    pub pairs_checked: u64,
    /// A pair of packed assignments with equal profiles.
    pub witness: Option<(u64, u64)>,
    pub seed: u64,
}

/// The profile of an assignment is the set of clauses it falsifies.
pub fn profile_distinctness(f: &CnfFormula, mode: CheckMode, seed: u64) -> Result<ProfileReport> {
    let vars: Vec<u32> = (1..=f.num_vars() as u32).collect();
    profile_distinctness_on(f, &vars, mode, seed)
}

/// Profiles of partial assignments to `vars` (bit `j` of the packed value is
/// `vars[j]`): clause `i` belongs to the profile iff no literal on `vars` is
/// satisfied.
pub fn profile_distinctness_on(f: &CnfFormula, vars: &[u32], mode: CheckMode, seed: u64) -> Result<ProfileReport> {
    let k = vars.len();
    let masks: Vec<(u64, u64)> = f
        .clauses()
        .iter()
        .map(|c| {
            let (mut pos, mut neg) = (0u64, 0u64);
            for l in c.literals() {
                if let Some(j) = vars.iter().position(|&v| v == l.var) {
                    if l.negated {
                        neg |= 1 << j;
                    } else {
                        pos |= 1 << j;
                    }
                }
            }
            (pos, neg)
        })
        .collect();
    let profile = |a: u64| -> FixedBitSet {
        let mut p = FixedBitSet::with_capacity(masks.len());
        for (i, &(pos, neg)) in masks.iter().enumerate() {
            if a & pos == 0 && !a & neg == 0 {
                p.insert(i);
            }
        }
        p
    };
    let exact = match mode {
        CheckMode::Exact => {
            if k > EXACT_ENUM_CAP {
                return Err(Error::cap("variables for exact profile enumeration", k, EXACT_ENUM_CAP));
            }
            true
        }
        CheckMode::Sampled { .. } => false,
        CheckMode::Auto { exact_budget, .. } => k <= EXACT_ENUM_CAP && 1u64 << k <= exact_budget,
    };
    let mut report = ProfileReport {
        exact,
        vars: k,
        distinct: true,
        collisions: 0,
        pairs_checked: 0,
        witness: None,
        seed,
    };
    if exact {
        let mut seen = std::collections::HashMap::with_capacity(1 << k);
        for a in 0..1u64 << k {
            if let Some(&earlier) = seen.get(&profile(a)) {
                report.collisions += 1;
                report.witness.get_or_insert((earlier, a));
            } else {
                seen.insert(profile(a), a);
            }
        }
        report.pairs_checked = (1u64 << k) * ((1u64 << k) - 1) / 2;
    } else {
        let trials = match mode {
            CheckMode::Sampled { trials } | CheckMode::Auto { trials, .. } => trials,
            CheckMode::Exact => unreachable!(),
        };
        if k == 0 || k > 64 {
            return Err(Error::InvalidArgument(format!("sampled profiles need 1..=64 variables, got {k}")));
        }
        let mut rng = rng_for(seed, "profiles", 0);
        let span = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        for _ in 0..trials {
            let a = rng.gen_range(0..=span);
            let b = rng.gen_range(0..=span);
            if a == b {
                continue;
            }
            report.pairs_checked += 1;
            if profile(a) == profile(b) {
                report.collisions += 1;
                report.witness.get_or_insert((a, b));
            }
        }
    }
    report.distinct = report.collisions == 0;
    Ok(report)
}

/// Binary entropy in bits.
pub fn binary_entropy(eps: f64) -> f64 {
    if eps <= 0.0 || eps >= 1.0 {
        return 0.0;
    }
    -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2()
}

/// `m · 2^(-(1 - H₂(ε)) d + 1)`.
pub fn m_prime(m: usize, d: usize, eps: f64) -> f64 {
    m as f64 * (-(1.0 - binary_entropy(eps)) * d as f64 + 1.0).exp2()
}

/// Default balance slack `2 √(n ln n)` for `|X| = n/2 ± slack`.
pub fn default_balance_slack(n: usize) -> f64 {
    let n = n as f64;
    2.0 * (n * n.ln().max(0.0)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavyCounts {
    pub z_x: usize,
    pub z_y: usize,
    /// Largest number of heavy clauses (either side) containing one variable.
    pub w_max: usize,
}

/// Clause `i` is X-heavy when more than `(1 - ε) d` of its variables are on
/// the X side (Y-heavy likewise), `d` being the formula width.
pub fn heavy_counts(f: &CnfFormula, part: &VariablePartition, epsilon: Ratio<u64>) -> HeavyCounts {
    let d = f.width();
    let mut counts = HeavyCounts { z_x: 0, z_y: 0, w_max: 0 };
    let mut incidence = vec![0usize; f.num_vars() + 1];
    for c in f.clauses() {
        let on_x = c.vars().filter(|&v| matches!(part.locate(v), Some((Side::X, _)))).count();
        let x_heavy = exceeds_fraction(on_x, epsilon, d);
        let y_heavy = exceeds_fraction(c.width() - on_x, epsilon, d);
        counts.z_x += x_heavy as usize;
        counts.z_y += y_heavy as usize;
        if x_heavy || y_heavy {
            for v in c.vars() {
                incidence[v as usize] += 1;
            }
        }
    }
    counts.w_max = incidence.into_iter().max().unwrap_or(0);
    counts
}

pub fn is_heavy(c: &Clause, part: &VariablePartition, side: Side, epsilon: Ratio<u64>, d: usize) -> bool {
    let on_side = c.vars().filter(|&v| matches!(part.locate(v), Some((s, _)) if s == side)).count();
    exceeds_fraction(on_side, epsilon, d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub epsilon: String,
    pub xvars: Vec<u32>,
    pub yvars: Vec<u32>,
    pub z_x: usize,
    pub z_y: usize,
    pub w_max: usize,
    pub m_prime: f64,
    /// `m' d / n`.
    pub w_bound: f64,
    pub balance_slack: f64,
    pub accepted: bool,
    pub trials_used: usize,
    pub seed: u64,
}

impl PartitionReport {
    pub fn partition(&self, n: usize) -> Result<VariablePartition> {
        VariablePartition::new(n, self.xvars.clone(), self.yvars.clone())
    }
}

/// Fair-coin partitions until one is balanced within `slack` and has few heavy
/// clauses on each side; otherwise reports the best (fewest heavy clauses).
/// Trial `t` uses seed `sub_seed(seed, "partition", t)`.
pub fn heavy_partition_search(
    f: &CnfFormula,
    epsilon: Ratio<u64>,
    max_trials: usize,
    seed: u64,
    slack: Option<f64>,
) -> Result<PartitionReport> {
    check_epsilon(epsilon)?;
    let n = f.num_vars();
    let d = f.width();
    let eps = *epsilon.numer() as f64 / *epsilon.denom() as f64;
    let mp = m_prime(f.num_clauses(), d, eps);
    let w_bound = mp * d as f64 / n as f64;
    let slack = slack.unwrap_or_else(|| default_balance_slack(n));
    let mut best: Option<(usize, PartitionReport)> = None;
    for t in 0..max_trials.max(1) {
        let mut rng = rng_for(seed, "partition", t as u64);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for v in 1..=n as u32 {
            if rng.gen::<bool>() {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
        let part = VariablePartition::new(n, xs, ys)?;
        let h = heavy_counts(f, &part, epsilon);
        let balanced = (part.n1() as f64 - n as f64 / 2.0).abs() <= slack;
        let accepted = balanced && h.z_x as f64 <= mp && h.z_y as f64 <= mp && h.w_max as f64 <= w_bound;
        let report = PartitionReport {
            epsilon: epsilon.to_string(),
            xvars: part.xvars().to_vec(),
            yvars: part.yvars().to_vec(),
            z_x: h.z_x,
            z_y: h.z_y,
            w_max: h.w_max,
            m_prime: mp,
            w_bound,
            balance_slack: slack,
            accepted,
            trials_used: t + 1,
            seed,
        };
        if accepted {
            return Ok(report);
        }
        let score = h.z_x.max(h.z_y);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, report));
        }
    }
    let mut report = best.unwrap().1;
    report.trials_used = max_trials.max(1);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavySatReport {
    pub side: Side,
    pub epsilon: String,
    pub heavy_clauses: usize,
    pub fraction: f64,
    pub exact: bool,
    pub samples: u64,
    /// `e^(-n / (50 d))` with `n` the side's variable count.
    pub lll_reference: f64,
    pub seed: u64,
}

/// Fraction of assignments to `side`'s variables satisfying every heavy
/// clause of that side through one of its `side` literals.
pub fn heavy_sat_fraction(
    f: &CnfFormula,
    part: &VariablePartition,
    side: Side,
    epsilon: Ratio<u64>,
    mode: CheckMode,
    seed: u64,
) -> Result<HeavySatReport> {
    check_epsilon(epsilon)?;
    let d = f.width();
    let vars = part.vars(side);
    let k = vars.len();
    let masks: Vec<(u64, u64)> = f
        .clauses()
        .iter()
        .filter(|c| is_heavy(c, part, side, epsilon, d))
        .map(|c| {
            let (mut pos, mut neg) = (0u64, 0u64);
            for l in c.literals() {
                if let Some((s, j)) = part.locate(l.var) {
                    if s == side {
                        if l.negated {
                            neg |= 1 << j;
                        } else {
                            pos |= 1 << j;
                        }
                    }
                }
            }
            (pos, neg)
        })
        .collect();
    let satisfies_all = |a: u64| masks.iter().all(|&(pos, neg)| a & pos != 0 || !a & neg != 0);
    let exact = match mode {
        CheckMode::Exact => {
            if k > EXACT_ENUM_CAP {
                return Err(Error::cap("side variables for exact enumeration", k, EXACT_ENUM_CAP));
            }
            true
        }
        CheckMode::Sampled { .. } => false,
        CheckMode::Auto { exact_budget, .. } => k <= EXACT_ENUM_CAP && 1u64 << k <= exact_budget,
    };
    let (hits, samples) = if exact {
        ((0..1u64 << k).filter(|&a| satisfies_all(a)).count() as u64, 1u64 << k)
    } else {
        let trials = match mode {
            CheckMode::Sampled { trials } | CheckMode::Auto { trials, .. } => trials,
            CheckMode::Exact => unreachable!(),
        };
        if k > 64 {
            return Err(Error::cap("side variables for sampling", k, 64));
        }
        let mut rng = rng_for(seed, "heavy_sat", 0);
        let span = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        ((0..trials).filter(|_| satisfies_all(rng.gen_range(0..=span))).count() as u64, trials)
    };
    Ok(HeavySatReport {
        side,
        epsilon: epsilon.to_string(),
        heavy_clauses: masks.len(),
        fraction: if samples == 0 { 1.0 } else { hits as f64 / samples as f64 },
        exact,
        samples,
        lll_reference: (-(k as f64) / (50.0 * d.max(1) as f64)).exp(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cnf(n: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::new(n, clauses.iter().map(|c| Clause::from_dimacs(c).unwrap()).collect()).unwrap()
    }

    #[test]
    fn sample_shapes_and_determinism() {
        let p = DistributionParams::new(3, 4, 2, 42).unwrap();
        let f = sample_f(&p).unwrap();
        assert_eq!(f.num_clauses(), 3);
        assert!(f.clauses().iter().all(|c| c.width() == 2));
        assert_eq!(f, sample_f(&p).unwrap());
        assert_ne!(f, sample_f(&p.with_seed(43)).unwrap());
        assert!(DistributionParams::new(3, 2, 3, 0).is_err());
        assert!(DistributionParams::new(0, 2, 1, 0).is_err());
    }

    #[test]
    fn tensor_shape() {
        let p = DistributionParams::new(2, 3, 2, 7).unwrap();
        let (f, part) = sample_tensor(&p).unwrap();
        assert_eq!(f.num_vars(), 6);
        assert_eq!(part.xvars(), &[1, 2, 3]);
        assert_eq!(part.yvars(), &[4, 5, 6]);
        for c in f.clauses() {
            assert_eq!(c.width(), 4);
            assert_eq!(c.vars().filter(|&v| v <= 3).count(), 2);
        }
        assert_eq!(sample_tensor(&p).unwrap().0, f);
    }

    #[test]
    fn signs_are_fair() {
        let positive = (0..1000u64)
            .filter(|&s| !sample_f(&DistributionParams::new(1, 1, 1, s).unwrap()).unwrap().clause(0).literals()[0].negated)
            .count();
        assert!((450..=550).contains(&positive), "{positive}");
    }

    #[test]
    fn sub_seeds_differ_by_tag_and_index() {
        assert_ne!(sub_seed(1, "a", 0), sub_seed(1, "a", 1));
        assert_ne!(sub_seed(1, "a", 0), sub_seed(1, "b", 0));
        assert_eq!(sub_seed(1, "a", 0), sub_seed(1, "a", 0));
    }

    #[test]
    fn unsat_rate_examples() {
        let p = DistributionParams::new(1, 4, 2, 5).unwrap();
        assert_eq!(unsat_rate(&p, false, 10).unwrap().rate, 0.0);
        let p = DistributionParams::new(64, 2, 1, 5).unwrap();
        assert!(unsat_rate(&p, true, 20).unwrap().rate >= 0.9);
    }

    #[test]
    fn expansion_examples() {
        let half = Ratio::new(1, 2);
        let r = expansion_report(&cnf(3, &[&[1, 2, 3]]), Ratio::new(1, 10), 1, CheckMode::Exact, 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows[0].min_vars, 3);
        let r = expansion_report(&cnf(3, &[&[1, 2, 3], &[1, -2, 3]]), half, 2, CheckMode::Exact, 0).unwrap();
        assert_eq!(r.rows[1].min_vars, 3);
        assert_eq!(r.rows[1].threshold, 3.0);
        assert!(r.pass);
        let r = expansion_report(&cnf(3, &[&[1, 2, 3], &[1, -2, 3]]), Ratio::new(1, 3), 2, CheckMode::Exact, 0).unwrap();
        assert!(!r.pass);
        assert!(expansion_report(&cnf(1, &[&[1]]), Ratio::new(1, 1), 1, CheckMode::Exact, 0).is_err());
    }

    #[test]
    fn sampled_expansion_matches_exact_on_pairs() {
        let f = sample_f(&DistributionParams::new(12, 10, 3, 9).unwrap()).unwrap();
        let exact = expansion_report(&f, Ratio::new(1, 2), 2, CheckMode::Exact, 1).unwrap();
        let sampled = expansion_report(&f, Ratio::new(1, 2), 2, CheckMode::Sampled { trials: 5000 }, 1).unwrap();
        assert_eq!(exact.rows[1].min_vars, sampled.rows[1].min_vars);
    }

    #[test]
    fn profile_examples() {
        let r = profile_distinctness(&cnf(1, &[&[1], &[-1]]), CheckMode::Exact, 0).unwrap();
        assert!(r.distinct);
        let r = profile_distinctness(&cnf(2, &[&[1, 2]]), CheckMode::Exact, 0).unwrap();
        assert!(!r.distinct);
        assert_eq!(r.collisions, 2);
        assert_eq!(r.witness, Some((1, 2)));
    }

    #[test]
    fn heavy_examples() {
        let f = cnf(4, &[&[1, 2, 3, 4]]);
        let q = Ratio::new(1, 4);
        let part = VariablePartition::new(4, vec![1, 2], vec![3, 4]).unwrap();
        assert_eq!(heavy_counts(&f, &part, q), HeavyCounts { z_x: 0, z_y: 0, w_max: 0 });
        let part = VariablePartition::new(4, vec![1, 2, 3, 4], vec![]).unwrap();
        assert_eq!(heavy_counts(&f, &part, q), HeavyCounts { z_x: 1, z_y: 0, w_max: 1 });

        let r = heavy_sat_fraction(&f, &part, Side::X, q, CheckMode::Exact, 0).unwrap();
        assert_eq!(r.fraction, 1.0 - 1.0 / 16.0);
        let g = cnf(6, &[&[1, 2, 3], &[4, -5, 6]]);
        let part = VariablePartition::new(6, (1..=6).collect(), vec![]).unwrap();
        let r = heavy_sat_fraction(&g, &part, Side::X, q, CheckMode::Exact, 0).unwrap();
        assert_eq!(r.fraction, (7.0f64 / 8.0).powi(2));
        let r = heavy_sat_fraction(&g, &part, Side::Y, q, CheckMode::Exact, 0).unwrap();
        assert_eq!((r.heavy_clauses, r.fraction), (0, 1.0));
    }

    #[test]
    fn entropy_and_m_prime() {
        assert!((binary_entropy(0.25) - 0.811_278).abs() < 1e-6);
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(m_prime(100, 4, 0.5), 200.0);
        assert!((default_balance_slack(128) - 2.0 * (128.0f64 * 128f64.ln()).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn m_prime_decreases_in_d(m in 1usize..10_000, d in 1usize..40, eps in 0.01f64..0.49) {
            prop_assert!(m_prime(m, d + 1, eps) < m_prime(m, d, eps));
        }

        #[test]
        fn samples_have_distinct_clause_variables(m in 1usize..20, n in 1usize..12, seed: u64) {
            let d = 1 + (seed as usize) % n;
            let f = sample_f(&DistributionParams::new(m, n, d, seed).unwrap()).unwrap();
            prop_assert!(f.clauses().iter().all(|c| c.width() == d && c.max_var() as usize <= n));
        }
    }
}
