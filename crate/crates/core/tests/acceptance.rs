#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::HashSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cutwork_core::circuit::{extract_cc2_refutation, verify_separation, Compilation, Derivation, Gate, RefutationLine};
use cutwork_core::cnf::{brute_force_sat, CnfFormula, VariablePartition};
use cutwork_core::cp::{check_cp_proof, BoundKind, CpProof, Justification, LinearInequality, ProofLine};
use cutwork_core::csp::{
    ab_count, accepting_instance, build_constraint_graph, csp_sat_eval, jukna_bound, rejecting_instance, AbMode,
    CspSatInstance, JuknaParams,
};
use cutwork_core::protocol::{inequality_protocol, materialize_rectangle, run_protocol, real_protocol_eval, ProtocolConfig};
use cutwork_core::random_lab::{
    expansion_report, heavy_partition_search, profile_distinctness, sample_f, sub_seed, unsat_rate, CheckMode,
    DistributionParams,
};
use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    blocks_satisfiable, clause_value, complete_two_cnf, compile, eval_gates, u_blocks, unsat_samples, v_blocks,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn run(id: usize, limit: Option<Duration>, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
        (o, _) => o,
    };
    let (pass, detail) = match &outcome {
        Ok(d) => (true, d.as_str()),
        Err(d) => (false, d.as_str()),
    };
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2}: {verdict} {detail} ({elapsed:.2?})");
    pass
}

fn ineq(coeffs: &[i64], b: i64) -> LinearInequality {
    LinearInequality::new(coeffs.to_vec(), b)
}

fn line(coeffs: &[i64], b: i64, j: Justification) -> ProofLine {
    ProofLine {
        inequality: ineq(coeffs, b),
        justification: j,
    }
}

fn cp_checker() -> Outcome {
    use Justification::*;
    let contradiction = CpProof::new(
        1,
        vec![ineq(&[1], 1), ineq(&[-1], 0)],
        vec![
            line(&[1], 1, Hypothesis(0)),
            line(&[-1], 0, Hypothesis(1)),
            line(&[0], 1, Add(0, 1)),
        ],
    );
    let division = CpProof::new(
        2,
        vec![ineq(&[2, 2], 3)],
        vec![
            line(&[2, 2], 3, Hypothesis(0)),
            line(&[1, 1], 2, Div { line: 0, divisor: 2 }),
        ],
    );
    let with_axioms = CpProof::new(
        1,
        vec![ineq(&[2], 1)],
        vec![
            line(&[2], 1, Hypothesis(0)),
            line(&[-1], -1, BooleanAxiom { var: 1, kind: BoundKind::Upper }),
            line(&[1], 0, BooleanAxiom { var: 1, kind: BoundKind::Lower }),
        ],
    );
    let r = check_cp_proof(&contradiction);
    ensure!(r.refutation && r.refutation_line == Some(3), "contradiction proof not accepted: {r:?}");
    let r = check_cp_proof(&division);
    ensure!(r.all_valid, "division example not accepted: {r:?}");
    ensure!(check_cp_proof(&with_axioms).all_valid, "Boolean axioms not accepted");

    let mut mutants: Vec<(&str, CpProof)> = Vec::new();
    let mut mutate = |name: &'static str, base: &CpProof, edit: &dyn Fn(&mut CpProof)| {
        let mut p = base.clone();
        edit(&mut p);
        assert_ne!(&p, base, "mutation {name} changed nothing");
        mutants.push((name, p));
    };
    let c = &contradiction;
    mutate("hyp coefficient", c, &|p| p.lines[0].inequality = ineq(&[2], 1));
    mutate("hyp constant", c, &|p| p.lines[0].inequality = ineq(&[1], 0));
    mutate("second hyp coefficient", c, &|p| p.lines[1].inequality = ineq(&[-2], 0));
    mutate("second hyp constant", c, &|p| p.lines[1].inequality = ineq(&[-1], 1));
    mutate("sum constant", c, &|p| p.lines[2].inequality = ineq(&[0], 2));
    mutate("sum constant low", c, &|p| p.lines[2].inequality = ineq(&[0], 0));
    mutate("sum coefficient", c, &|p| p.lines[2].inequality = ineq(&[1], 1));
    mutate("hyp reference", c, &|p| p.lines[0].justification = Hypothesis(1));
    mutate("second hyp reference", c, &|p| p.lines[1].justification = Hypothesis(0));
    mutate("missing hyp", c, &|p| p.lines[0].justification = Hypothesis(7));
    mutate("add reference repeated", c, &|p| p.lines[2].justification = Add(0, 0));
    mutate("add reference other", c, &|p| p.lines[2].justification = Add(1, 1));
    mutate("add self reference", c, &|p| p.lines[2].justification = Add(0, 2));
    mutate("add forward reference", c, &|p| p.lines[2].justification = Add(0, 5));
    mutate("hyp as axiom", c, &|p| {
        p.lines[0].justification = BooleanAxiom { var: 1, kind: BoundKind::Lower }
    });
    let d = &division;
    mutate("floor instead of ceiling", d, &|p| p.lines[1].inequality = ineq(&[1, 1], 1));
    mutate("constant too large", d, &|p| p.lines[1].inequality = ineq(&[1, 1], 3));
    mutate("divisor not dividing", d, &|p| p.lines[1].justification = Div { line: 0, divisor: 3 });
    mutate("divisor one", d, &|p| p.lines[1].justification = Div { line: 0, divisor: 1 });
    mutate("divisor zero", d, &|p| p.lines[1].justification = Div { line: 0, divisor: 0 });
    mutate("divisor negative", d, &|p| p.lines[1].justification = Div { line: 0, divisor: -2 });
    mutate("divided coefficient", d, &|p| p.lines[1].inequality = ineq(&[1, 2], 2));
    mutate("undivided coefficients", d, &|p| p.lines[1].inequality = ineq(&[2, 2], 2));
    mutate("division self reference", d, &|p| p.lines[1].justification = Div { line: 1, divisor: 2 });
    mutate("premise constant", d, &|p| p.lines[0].inequality = ineq(&[2, 2], 2));
    mutate("premise coefficient", d, &|p| p.lines[0].inequality = ineq(&[1, 2], 3));
    mutate("premise reference", d, &|p| p.lines[0].justification = Hypothesis(1));
    let a = &with_axioms;
    mutate("axiom kind", a, &|p| p.lines[1].justification = BooleanAxiom { var: 1, kind: BoundKind::Lower });
    mutate("axiom variable", a, &|p| p.lines[2].justification = BooleanAxiom { var: 2, kind: BoundKind::Lower });
    mutate("axiom constant", a, &|p| p.lines[1].inequality = ineq(&[-1], 0));

    let count = mutants.len();
    ensure!(count >= 20, "only {count} mutations");
    for (name, p) in &mutants {
        let r = check_cp_proof(p);
        ensure!(!r.all_valid && !r.refutation, "mutation `{name}` accepted");
    }
    Ok(format!("3 proofs accepted, {count}/{count} mutations rejected"))
}

struct Compiled {
    f: CnfFormula,
    part: VariablePartition,
    lines: Vec<RefutationLine>,
    comp: Compilation,
}

fn compile_end_to_end(runs: &mut Vec<Compiled>) -> Outcome {
    let mut instances = vec![complete_two_cnf()];
    instances.extend(unsat_samples(60, 8, 3, 2, 100).into_iter().map(|(_, f, p)| (f, p)));
    ensure!(instances[1..].iter().all(|(_, p)| p.n1() == 4 && p.n2() == 4), "partition is not 4/4");
    let mut separated = 0;
    for (idx, (f, part)) in instances.into_iter().enumerate() {
        let (lines, comp) = compile(&f, &part);
        let sep = verify_separation(&comp.circuit, &f, &part).unwrap();
        ensure!(sep.pass, "instance {idx}: not separating, {:?}", sep.witness);
        ensure!(
            sep.accepting_checked == 1 << part.n1() && sep.rejecting_checked == 1 << part.n2(),
            "instance {idx}: incomplete check"
        );
        let k = lines.iter().map(|l| l.tree.depth()).max().unwrap();
        ensure!(k <= 2, "instance {idx}: protocol depth {k}");
        let bound = lines.len() * (1 << (3 * 2));
        ensure!(
            comp.circuit.len() <= bound,
            "instance {idx}: {} gates > {bound}",
            comp.circuit.len()
        );
        // Independent check of the separation on every input.
        for x in 0..1u64 << part.n1() {
            ensure!(eval_gates(&comp.circuit, &u_blocks(&f, &part, x))[comp.circuit.output()], "U({x}) rejected");
        }
        for y in 0..1u64 << part.n2() {
            ensure!(!eval_gates(&comp.circuit, &v_blocks(&f, &part, y))[comp.circuit.output()], "V({y}) accepted");
        }
        separated += 1;
        runs.push(Compiled { f, part, lines, comp });
    }
    let max_gates = runs.iter().map(|r| r.comp.circuit.len()).max().unwrap();
    Ok(format!("{separated}/{} separate, max {max_gates} gates within l*2^6", runs.len()))
}

/// Every per-history subcircuit and every stacked-tree gate is 1 on `U(x)` and
/// 0 on `V(y)` over its rectangle.
fn subcircuit_correctness(run: &Compiled) -> std::result::Result<(usize, usize), String> {
    let Compiled { f, part, lines, comp } = run;
    let cfg = ProtocolConfig::default();
    let on_u: Vec<Vec<bool>> = (0..1u64 << part.n1())
        .map(|x| eval_gates(&comp.circuit, &u_blocks(f, part, x)))
        .collect();
    let on_v: Vec<Vec<bool>> = (0..1u64 << part.n2())
        .map(|y| eval_gates(&comp.circuit, &v_blocks(f, part, y)))
        .collect();
    let mut points = 0;
    for (j, l) in lines.iter().enumerate() {
        for h in l.tree.full_histories() {
            let rect = materialize_rectangle(&l.tree, h, part, &cfg).unwrap();
            let good = rect.points().all(|(x, y)| !l.line.value(x, y));
            let gate = comp.line_circuit(j, h);
            if !good {
                ensure!(gate.is_none(), "line {j} history {h:?} is not good but has a circuit");
                continue;
            }
            let Some(gate) = gate else {
                return Err(format!("line {j} good history {h:?} has no circuit"));
            };
            for (x, y) in rect.points() {
                points += 1;
                ensure!(
                    on_u[x as usize][gate] && !on_v[y as usize][gate],
                    "line {j} history {h:?} wrong at ({x}, {y})"
                );
            }
        }
    }
    for s in &comp.stacked {
        let Derivation::Derived(a, b) = lines[s.line].derivation else {
            return Err(format!("stacked node on axiom line {}", s.line));
        };
        let rect = materialize_rectangle(&lines[s.line].tree, s.history, part, &cfg)
            .unwrap()
            .intersect(&materialize_rectangle(&lines[a].tree, s.first, part, &cfg).unwrap())
            .intersect(&materialize_rectangle(&lines[b].tree, s.second, part, &cfg).unwrap());
        for (x, y) in rect.points() {
            points += 1;
            ensure!(
                on_u[x as usize][s.gate] && !on_v[y as usize][s.gate],
                "stacked node {s:?} wrong at ({x}, {y})"
            );
        }
    }
    Ok((comp.line_circuits.len() + comp.stacked.len(), points))
}

fn subcircuit_correctness_all(runs: &[Compiled]) -> Outcome {
    let (pairs, points) = subcircuit_correctness(&runs[0])?;
    ensure!(pairs > 0, "no line circuits");
    let mut total = (pairs, points);
    for (i, r) in runs.iter().enumerate().skip(1) {
        let (p, q) = subcircuit_correctness(r).map_err(|e| format!("sample {i}: {e}"))?;
        total = (total.0 + p, total.1 + q);
    }
    Ok(format!(
        "complete 2-CNF {pairs} gates on {points} points; all runs {} gates on {} points, 0 violations",
        total.0, total.1
    ))
}

fn extraction(runs: &[Compiled]) -> Outcome {
    for (idx, r) in runs.iter().enumerate() {
        let Compiled { f, part, comp, .. } = r;
        let c = &comp.circuit;
        let ex = extract_cc2_refutation(c, f, part).map_err(|e| format!("instance {idx}: {e}"))?;
        let rep = &ex.report;
        ensure!(rep.line_count == c.len() && ex.lines.len() == c.len(), "instance {idx}: line count");
        ensure!(
            rep.leaf_entailments_ok && rep.internal_entailments_ok && rep.protocols_match,
            "instance {idx}: {:?}",
            rep.failures
        );
        ensure!(rep.root_constant_zero && rep.is_refutation(), "instance {idx}: root not constant 0");
        ensure!(rep.max_protocol_bits <= 2, "instance {idx}: {} protocol bits", rep.max_protocol_bits);

        let on_u: Vec<Vec<bool>> = (0..1u64 << part.n1()).map(|x| eval_gates(c, &u_blocks(f, part, x))).collect();
        let on_v: Vec<Vec<bool>> = (0..1u64 << part.n2()).map(|y| eval_gates(c, &v_blocks(f, part, y))).collect();
        let value = |g: usize, x: usize, y: usize| !(on_u[x][g] && !on_v[y][g]);
        for (g, gate) in c.gates().iter().enumerate() {
            for x in 0..on_u.len() {
                for y in 0..on_v.len() {
                    ensure!(ex.lines[g].value(x as u64, y as u64) == value(g, x, y), "line {g} table");
                    let (sx, sy) = (x as u64, y as u64);
                    let premise = match gate {
                        Gate::Input { constraint, .. } => clause_value(f.clause(*constraint), part, sx, sy),
                        Gate::And(a, b) | Gate::Or(a, b) => value(*a, x, y) && value(*b, x, y),
                        Gate::Const0 | Gate::Const1 => true,
                    };
                    ensure!(!premise || value(g, x, y), "instance {idx}: gate {g} not entailed at ({x}, {y})");
                }
            }
        }
        let root = c.output();
        ensure!(
            (0..on_u.len()).all(|x| (0..on_v.len()).all(|y| !value(root, x, y))),
            "instance {idx}: root line not constant 0"
        );
    }
    Ok(format!("{}/{} extracted refutations verified", runs.len(), runs.len()))
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> VariablePartition {
    let (xs, ys): (Vec<u32>, Vec<u32>) = (1..=n as u32).partition(|_| rng.gen::<bool>());
    VariablePartition::new(n, xs, ys).unwrap()
}

fn to_instance(blocks: &[Vec<bool>]) -> CspSatInstance {
    let bits: Vec<bool> = blocks.iter().flatten().copied().collect();
    let mut set = FixedBitSet::with_capacity(bits.len());
    for (i, b) in bits.iter().enumerate() {
        set.set(i, *b);
    }
    CspSatInstance::from_bits(set)
}

fn csp_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut unsat, mut pairs, mut flips) = (0, 0, 0);
    for t in 0..1000u64 {
        let n = rng.gen_range(2..=12);
        let d = rng.gen_range(1..=3.min(n));
        let m = rng.gen_range(1..=8 * n);
        let f = sample_f(&DistributionParams::new(m, n, d, sub_seed(5, "csp", t)).unwrap()).unwrap();
        let part = random_partition(&mut rng, n);
        let g = build_constraint_graph(&f, &part);
        let x = rng.gen_range(0..1u64 << part.n1());
        let y = rng.gen_range(0..1u64 << part.n2());

        let u = accepting_instance(&g, &part.unpack_x(x)).unwrap();
        ensure!(u == to_instance(&u_blocks(&f, &part, x)), "tuple {t}: U(x) layout");
        ensure!(csp_sat_eval(&g, &u).unwrap(), "tuple {t}: U(x) evaluates to 0");
        let vb = v_blocks(&f, &part, y);
        let v = rejecting_instance(&g, &f, &part, &part.unpack_y(y)).unwrap();
        ensure!(v == to_instance(&vb), "tuple {t}: V(y) layout");
        let v_value = csp_sat_eval(&g, &v).unwrap();
        ensure!(v_value == blocks_satisfiable(&f, &part, &vb), "tuple {t}: V(y) value disagrees with oracle");
        if brute_force_sat(&f).unwrap().is_none() {
            unsat += 1;
            ensure!(!v_value, "tuple {t}: V(y) of an unsatisfiable formula evaluates to 1");
        }

        for _ in 0..10 {
            let p = rng.gen_range(0.05..0.95);
            let q = rng.gen_range(0.0..0.5);
            let mut lo = FixedBitSet::with_capacity(g.num_bits());
            let mut hi = FixedBitSet::with_capacity(g.num_bits());
            for i in 0..g.num_bits() {
                let a = rng.gen_bool(p);
                lo.set(i, a);
                hi.set(i, a || rng.gen_bool(q));
            }
            let (lo, hi) = (CspSatInstance::from_bits(lo), CspSatInstance::from_bits(hi));
            ensure!(lo.le(&hi), "pair not ordered");
            let (a, b) = (csp_sat_eval(&g, &lo).unwrap(), csp_sat_eval(&g, &hi).unwrap());
            ensure!(!a || b, "tuple {t}: monotonicity violated");
            pairs += 1;
            flips += (!a && b) as usize;
        }
    }
    Ok(format!(
        "1000 tuples ({unsat} unsatisfiable), {pairs} ordered pairs ({flips} 0->1), 0 violations"
    ))
}

fn real_protocols() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = ProtocolConfig::default();
    let mut checked = 0u64;
    for t in 0..500 {
        let n = rng.gen_range(1..=8);
        let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-8..=8)).collect();
        let b = rng.gen_range(-8..=8);
        let ineq = LinearInequality::new(coeffs.clone(), b);
        ensure!(ineq.weight() <= 8, "weight");
        let part = random_partition(&mut rng, n);
        let tree = inequality_protocol(&ineq, &part, &cfg).unwrap();
        for x in 0..1u64 << part.n1() {
            for y in 0..1u64 << part.n2() {
                let (ax, ay) = (part.unpack_x(x), part.unpack_y(y));
                let both = ax.union(&ay).unwrap();
                let lhs: i64 = (1..=n as u32).map(|v| coeffs[v as usize - 1] * both.get(v).unwrap() as i64).sum();
                let truth = lhs >= b;
                let (round, real) = real_protocol_eval(&ineq, &part, &ax, &ay).unwrap();
                let (_, proto) = run_protocol(&tree, &part, &ax, &ay).unwrap();
                ensure!(
                    real == truth && round.referee_bit == truth && proto == truth,
                    "inequality {t} {coeffs:?} >= {b}: mismatch at ({x}, {y})"
                );
                checked += 1;
            }
        }
    }
    Ok(format!("500 inequalities, {checked} inputs, 0 mismatches"))
}

fn tensor_unsat() -> Outcome {
    let r = unsat_rate(&DistributionParams::new(384, 8, 2, 7).unwrap(), true, 20).unwrap();
    ensure!(r.samples == 20 && r.per_seed.len() == 20, "sample count");
    let recount = r.per_seed.iter().filter(|s| s.unsat).count();
    ensure!(recount == r.unsat_count, "unsat count disagrees with per-seed outcomes");
    ensure!(r.rate >= 0.9, "unsat rate {} < 0.9", r.rate);
    Ok(format!("unsat rate {}/20 = {:.2}", r.unsat_count, r.rate))
}

fn distinct_profiles() -> Outcome {
    let mut distinct = 0;
    for i in 0..20 {
        let seed = sub_seed(8, "profiles", i);
        let f = sample_f(&DistributionParams::new(1152, 12, 3, seed).unwrap()).unwrap();
        let r = profile_distinctness(&f, CheckMode::Exact, seed).unwrap();
        ensure!(r.exact && r.vars == 12, "run {i} not exact over 12 variables");
        let mut seen = HashSet::new();
        let mut oracle = true;
        for y in 0..1u64 << 12 {
            let profile: Vec<usize> = (0..f.num_clauses())
                .filter(|&c| {
                    f.clause(c)
                        .literals()
                        .iter()
                        .all(|l| (y >> (l.var - 1) & 1 == 1) == l.negated)
                })
                .collect();
            oracle &= seen.insert(profile);
        }
        ensure!(oracle == r.distinct, "run {i}: report says {} but oracle says {oracle}", r.distinct);
        distinct += r.distinct as usize;
    }
    ensure!(distinct >= 19, "distinct in only {distinct}/20 runs");
    Ok(format!("distinct in {distinct}/20 runs"))
}

fn expansion() -> Outcome {
    let f = sample_f(&DistributionParams::new(4000, 1000, 6, 9).unwrap()).unwrap();
    let mode = CheckMode::Auto {
        exact_budget: 10_000_000,
        trials: 10_000,
    };
    let r = expansion_report(&f, Ratio::new(1, 2), 10, mode, 9).unwrap();
    ensure!(r.rows.len() == 10, "rows");
    for row in &r.rows {
        ensure!(row.threshold == 3.0 * row.s as f64, "threshold for s={}", row.s);
        ensure!(row.exact == (row.s <= 2), "exactness for s={}", row.s);
        if !row.exact {
            ensure!(row.subsets_checked == 10_000, "s={} checked {}", row.s, row.subsets_checked);
        }
        ensure!(row.pass && row.min_vars as f64 >= row.threshold, "violation at s={}", row.s);
    }
    ensure!(r.pass, "report failed");
    let vars: Vec<Vec<u32>> = f.clauses().iter().map(|c| c.vars().collect()).collect();
    let min1 = vars.iter().map(Vec::len).min().unwrap();
    let mut min2 = usize::MAX;
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let shared = vars[i].iter().filter(|v| vars[j].contains(v)).count();
            min2 = min2.min(vars[i].len() + vars[j].len() - shared);
        }
    }
    ensure!(min1 == r.rows[0].min_vars && min2 == r.rows[1].min_vars, "exact minima disagree with recount");
    let worst = r.rows.iter().map(|row| row.min_vars as f64 / row.threshold).fold(f64::MAX, f64::min);
    Ok(format!("s<=2 exact, s<=10 sampled 10^4 each, min ratio {worst:.2}, 0 violations"))
}

fn heavy_partition() -> Outcome {
    let f = sample_f(&DistributionParams::new(2048, 128, 16, 10).unwrap()).unwrap();
    let eps = Ratio::new(1u64, 4);
    let mut last = String::new();
    for seed in [10u64, 11] {
        let r = heavy_partition_search(&f, eps, 1000, seed, None).unwrap();
        let h2 = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        let mp = 2048.0 * (-(1.0 - h2) * 16.0 + 1.0).exp2();
        ensure!((r.m_prime - mp).abs() < 1e-9 * mp, "m' {} vs {mp}", r.m_prime);
        ensure!((r.w_bound - mp * 16.0 / 128.0).abs() < 1e-9 * mp, "w bound");
        let (mut zx, mut zy) = (0, 0);
        let mut incidence = vec![0usize; 129];
        for c in f.clauses() {
            let on_x = c.vars().filter(|v| r.xvars.contains(v)).count();
            // more than (1 - 1/4) * 16 = 12 variables on one side
            let (hx, hy) = (on_x > 12, c.width() - on_x > 12);
            zx += hx as usize;
            zy += hy as usize;
            if hx || hy {
                c.vars().for_each(|v| incidence[v as usize] += 1);
            }
        }
        let w = *incidence.iter().max().unwrap();
        ensure!((zx, zy, w) == (r.z_x, r.z_y, r.w_max), "recount ({zx}, {zy}, {w}) vs report");
        let balanced = (r.xvars.len() as f64 - 64.0).abs() <= 2.0 * (128.0 * 128f64.ln()).sqrt();
        let ok = r.accepted && r.trials_used <= 1000 && balanced && zx as f64 <= mp && zy as f64 <= mp
            && w as f64 <= mp * 16.0 / 128.0;
        last = format!(
            "seed {seed}: z_x={zx} z_y={zy} <= m'={mp:.1}, w_max={w} <= {:.1}, {} trials",
            mp * 16.0 / 128.0,
            r.trials_used
        );
        if ok {
            return Ok(last);
        }
    }
    Err(format!("not accepted after rerun; {last}"))
}

fn jukna_oracle(p: &JuknaParams) -> (BigInt, BigInt) {
    let pow = |b: u64, e: u64| (0..e).fold(BigInt::from(1), |acc, _| acc * b);
    let n1 = BigInt::from(p.u_size) - BigInt::from(2 * p.s) * p.a1_1;
    let d1 = pow(2 * p.s, p.r + 1) * p.a1_r;
    let n2 = BigInt::from(p.v_size);
    let d2 = pow(2 * p.r, p.s + 1) * p.a0_s;
    let (n, d) = if &n1 * &d2 < &n2 * &d1 { (n1, d1) } else { (n2, d2) };
    if n < BigInt::from(0) {
        (BigInt::from(0), BigInt::from(1))
    } else {
        (n, d)
    }
}

fn ab_oracle(sets: &[Vec<bool>], n: usize, r: usize, b: bool) -> usize {
    fn go(sets: &[Vec<bool>], n: usize, start: usize, chosen: &mut Vec<usize>, r: usize, b: bool) -> usize {
        if chosen.len() == r {
            return sets.iter().filter(|u| chosen.iter().all(|&i| u[i] == b)).count();
        }
        let mut best = 0;
        for i in start..n {
            chosen.push(i);
            best = best.max(go(sets, n, i + 1, chosen, r, b));
            chosen.pop();
        }
        best
    }
    if r > n {
        return 0;
    }
    go(sets, n, 0, &mut Vec::new(), r, b)
}

fn arithmetic_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in 0..100 {
        let p = JuknaParams {
            u_size: rng.gen_range(1..=1u64 << 40),
            v_size: rng.gen_range(1..=1u64 << 40),
            a1_1: rng.gen_range(0..=1u64 << 36),
            a1_r: rng.gen_range(1..=1u64 << 30),
            a0_s: rng.gen_range(1..=1u64 << 30),
            r: rng.gen_range(1..=8),
            s: rng.gen_range(1..=8),
        };
        let got = jukna_bound(&p).unwrap();
        let (n, d) = jukna_oracle(&p);
        ensure!(got.numer() * &d == &n * got.denom(), "tuple {t} {p:?}: {got} vs {n}/{d}");
    }
    let mut cases = 0;
    for t in 0..400 {
        let n = rng.gen_range(1..=24usize);
        let size = rng.gen_range(1..=16usize);
        let density = rng.gen_range(0.1..0.9);
        let sets: Vec<Vec<bool>> = (0..size).map(|_| (0..n).map(|_| rng.gen_bool(density)).collect()).collect();
        let instances: Vec<CspSatInstance> = sets.iter().map(|s| to_instance(std::slice::from_ref(s))).collect();
        let max_r = if n <= 14 { n } else { 4 };
        for r in 0..=max_r {
            for b in [false, true] {
                let got = ab_count(&instances, r, b, AbMode::Exact).unwrap();
                let want = ab_oracle(&sets, n, r, b);
                ensure!(got.exact && got.value == want, "set {t} (N={n}) r={r} b={b}: {} vs {want}", got.value);
                cases += 1;
            }
        }
    }
    Ok(format!("100 bound tuples, {cases} A_b queries, 0 mismatches"))
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    results.push(run(1, Some(secs(1)), cp_checker));
    let mut runs = Vec::new();
    results.push(run(2, Some(secs(120)), || compile_end_to_end(&mut runs)));
    let have_runs = runs.len() == 101;
    results.push(run(3, None, || {
        ensure!(have_runs, "criterion 2 did not produce its circuits");
        subcircuit_correctness_all(&runs)
    }));
    results.push(run(4, Some(secs(60)), || {
        ensure!(have_runs, "criterion 2 did not produce its circuits");
        extraction(&runs)
    }));
    results.push(run(5, None, csp_structure));
    results.push(run(6, None, real_protocols));
    results.push(run(7, Some(secs(60)), tensor_unsat));
    results.push(run(8, Some(secs(30)), distinct_profiles));
    results.push(run(9, Some(secs(60)), expansion));
    results.push(run(10, Some(secs(30)), heavy_partition));
    results.push(run(11, None, arithmetic_oracles));
    let failed: Vec<usize> = (1..=results.len()).filter(|i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
