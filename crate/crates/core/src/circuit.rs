//! Monotone circuits over CSP-SAT truth-table bits: compilation from
//! communication-protocol refutations, separation checks, and extraction of a
//! 2-bit protocol refutation back out of a circuit.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, CnfFormula, VariablePartition};
use crate::cp::{
    check_cp_proof, cp_lines_to_protocols, CpProof, Justification, ResolutionRefutation, SemanticLine,
};
use crate::csp::{accepting_packed, build_constraint_graph, rejecting_packed, ConstraintGraph, CspSatInstance};
use crate::error::{Error, Result};
use crate::protocol::{
    check_line_shape, clause_protocol, History, Owner, Predicate, ProtocolConfig,
    ProtocolNode, ProtocolTree, Rectangle,
};

/// Per-side cap on input enumeration in separation checks and extraction.
pub const SEPARATION_CAP: usize = 20;

/// A gate; `And`/`Or` operands are indices of earlier gates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    /// `TT_constraint(alpha)`, constraint zero-based, `alpha` in `vars(i)` order.
    Input { constraint: usize, alpha: Vec<bool> },
    Const0,
    Const1,
    And(usize, usize),
    Or(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneCircuit {
    gates: Vec<Gate>,
    output: usize,
}

impl MonotoneCircuit {
    pub fn new(gates: Vec<Gate>, output: usize) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            if let Gate::And(a, b) | Gate::Or(a, b) = *g {
                if a >= i || b >= i {
                    return Err(Error::InvalidArgument(format!(
                        "gate g{i} references a gate that is not earlier"
                    )));
                }
            }
        }
        if output >= gates.len() {
            return Err(Error::InvalidArgument(format!("output g{output} does not exist")));
        }
        Ok(MonotoneCircuit { gates, output })
    }

    /// The single-gate circuit `gate`.
    pub fn single(gate: Gate) -> Self {
        Self::new(vec![gate], 0).expect("a leaf gate has no operands")
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, i: usize) -> &Gate {
        &self.gates[i]
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The subcircuit computed at `gate`.
    pub fn with_output(&self, gate: usize) -> Result<MonotoneCircuit> {
        MonotoneCircuit::new(self.gates.clone(), gate)
    }

    /// Instance positions of the input gates, checked against the layout.
    fn input_positions(&self, g: &ConstraintGraph) -> Result<Vec<Option<usize>>> {
        self.gates
            .iter()
            .enumerate()
            .map(|(idx, gate)| match gate {
                Gate::Input { constraint, alpha } => {
                    if *constraint >= g.num_constraints() || alpha.len() != g.vars(*constraint).len() {
                        return Err(Error::Dimension(format!(
                            "input gate g{idx} does not fit the instance layout"
                        )));
                    }
                    let a = ConstraintGraph::alpha_index(alpha.iter().copied());
                    Ok(Some(g.position(*constraint, a)))
                }
                _ => Ok(None),
            })
            .collect()
    }

    /// Values of every gate on `inst`.
    fn eval_all(&self, positions: &[Option<usize>], inst: &CspSatInstance) -> Vec<bool> {
        let mut v = Vec::with_capacity(self.gates.len());
        for (i, gate) in self.gates.iter().enumerate() {
            let b = match *gate {
                Gate::Input { .. } => inst.get(positions[i].unwrap()),
                Gate::Const0 => false,
                Gate::Const1 => true,
                Gate::And(a, b) => v[a] && v[b],
                Gate::Or(a, b) => v[a] || v[b],
            };
            v.push(b);
        }
        v
    }
}

pub fn eval_circuit(c: &MonotoneCircuit, g: &ConstraintGraph, inst: &CspSatInstance) -> Result<bool> {
    if inst.len() != g.num_bits() {
        return Err(Error::Dimension(format!(
            "instance has {} bits, layout needs {}",
            inst.len(),
            g.num_bits()
        )));
    }
    let positions = c.input_positions(g)?;
    Ok(c.eval_all(&positions, inst)[c.output])
}

/// Hash-consing builder with constant folding and idempotence.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
    table: HashMap<Gate, usize>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, gate: Gate) -> usize {
        if let Some(&i) = self.table.get(&gate) {
            return i;
        }
        self.gates.push(gate.clone());
        self.table.insert(gate, self.gates.len() - 1);
        self.gates.len() - 1
    }

    pub fn const0(&mut self) -> usize {
        self.intern(Gate::Const0)
    }

    pub fn const1(&mut self) -> usize {
        self.intern(Gate::Const1)
    }

    pub fn input(&mut self, constraint: usize, alpha: Vec<bool>) -> usize {
        self.intern(Gate::Input { constraint, alpha })
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        match (&self.gates[a], &self.gates[b]) {
            _ if a == b => a,
            (Gate::Const0, _) | (_, Gate::Const1) => a,
            (_, Gate::Const0) | (Gate::Const1, _) => b,
            _ => self.intern(Gate::And(a.min(b), a.max(b))),
        }
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        match (&self.gates[a], &self.gates[b]) {
            _ if a == b => a,
            (Gate::Const1, _) | (_, Gate::Const0) => a,
            (_, Gate::Const1) | (Gate::Const0, _) => b,
            _ => self.intern(Gate::Or(a.min(b), a.max(b))),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn finish(self, output: usize) -> MonotoneCircuit {
        MonotoneCircuit::new(self.gates, output).expect("builder emits gates in topological order")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivation {
    /// Clause `i` of the formula (zero-based).
    Axiom(usize),
    /// Entailed by the two (zero-based) earlier lines.
    Derived(usize, usize),
}

/// A line of a protocol refutation: its truth table, a protocol computing it,
/// and how it was obtained.
#[derive(Debug, Clone)]
pub struct RefutationLine {
    pub line: SemanticLine,
    pub tree: ProtocolTree,
    pub derivation: Derivation,
}

/// Clause lines of a resolution refutation with their 2-bit clause protocols;
/// the empty clause gets the depth-0 constant tree.
pub fn lines_from_resolution(r: &ResolutionRefutation, part: &VariablePartition) -> Result<Vec<RefutationLine>> {
    let mut out = Vec::with_capacity(r.lines.len());
    for l in &r.lines {
        let line = SemanticLine::from_literals(&l.literals, part)?;
        let tree = if l.literals.is_empty() {
            ProtocolTree::constant(false)
        } else {
            clause_protocol(&Clause::new(l.literals.clone())?, part)
        };
        let derivation = match l.source {
            crate::solver::ResolutionSource::Axiom(i) => Derivation::Axiom(i),
            crate::solver::ResolutionSource::Resolvent { left, right, .. } => Derivation::Derived(left, right),
        };
        out.push(RefutationLine { line, tree, derivation });
    }
    Ok(out)
}

/// The formula's clause lines followed by the proof's lines, up to and
/// including the first contradiction. Hypotheses and divisions cite a single
/// premise twice; Boolean axioms cite line 0, since they are tautologies.
pub fn lines_from_cp_proof(
    p: &CpProof,
    f: &CnfFormula,
    part: &VariablePartition,
    weight_bound: u64,
    cfg: &ProtocolConfig,
) -> Result<Vec<RefutationLine>> {
    if p.system != f.to_inequalities() {
        return Err(Error::InvalidRefutation(
            "proof hypotheses are not the clause inequalities of the formula".into(),
        ));
    }
    let report = check_cp_proof(p);
    let Some(last) = report.refutation_line.filter(|_| report.refutation) else {
        let bad = report.invalid_lines().next().map(|v| v.line);
        return Err(Error::InvalidRefutation(match bad {
            Some(l) => format!("proof line {l} is invalid"),
            None => "proof derives no contradiction".into(),
        }));
    };
    let trees = cp_lines_to_protocols(p, part, weight_bound, cfg)?;
    let m = f.num_clauses();
    let mut out = clause_lines(f, part)?;
    for (i, l) in p.lines.iter().take(last).enumerate() {
        let derivation = match l.justification {
            Justification::Hypothesis(h) => Derivation::Derived(h, h),
            Justification::BooleanAxiom { .. } => Derivation::Derived(0, 0),
            Justification::Add(j, k) => Derivation::Derived(m + j, m + k),
            Justification::Div { line, .. } => Derivation::Derived(m + line, m + line),
        };
        out.push(RefutationLine {
            line: SemanticLine::from_inequality(&l.inequality, part)?,
            tree: trees[i].clone(),
            derivation,
        });
    }
    Ok(out)
}

fn clause_lines(f: &CnfFormula, part: &VariablePartition) -> Result<Vec<RefutationLine>> {
    f.clauses()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(RefutationLine {
                line: SemanticLine::from_clause(c, part)?,
                tree: clause_protocol(c, part),
                derivation: Derivation::Axiom(i),
            })
        })
        .collect()
}

/// Root gate of the circuit built for a (line, good history) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledLineCircuit {
    pub line: usize,
    pub history: History,
    pub gate: usize,
}

/// A node of the stacked tree built for `(line, history)`: `first` is the
/// transcript so far in the first premise's protocol, `second` in the second's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackedNode {
    pub line: usize,
    pub history: History,
    pub first: History,
    pub second: History,
    pub gate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeStats {
    pub gates: usize,
    pub lines: usize,
    pub max_depth: usize,
    /// `2^k · ℓ`.
    pub linear_estimate: u128,
    /// `ℓ · 2^(3k)`.
    pub conservative_bound: u128,
}

impl SizeStats {
    pub fn within_conservative_bound(&self) -> bool {
        (self.gates as u128) <= self.conservative_bound
    }
}

#[derive(Debug, Clone)]
pub struct Compilation {
    pub circuit: MonotoneCircuit,
    pub line_circuits: Vec<CompiledLineCircuit>,
    pub stacked: Vec<StackedNode>,
    pub stats: SizeStats,
}

impl Compilation {
    /// Gate for `(line, history)`, if that history is good for the line.
    pub fn line_circuit(&self, line: usize, history: History) -> Option<usize> {
        self.line_circuits
            .iter()
            .find(|c| c.line == line && c.history == history)
            .map(|c| c.gate)
    }
}

fn validate_lines(lines: &[RefutationLine], f: &CnfFormula, part: &VariablePartition, cfg: &ProtocolConfig) -> Result<()> {
    let m = f.num_clauses();
    if lines.len() < m + 1 {
        return Err(Error::InvalidRefutation(format!(
            "{} lines cannot start with {m} clauses and end in a contradiction",
            lines.len()
        )));
    }
    for (idx, l) in lines.iter().enumerate() {
        check_line_shape(&l.line, part)?;
        if l.tree.depth() > cfg.max_depth {
            return Err(Error::cap("protocol depth", l.tree.depth(), cfg.max_depth));
        }
        if let Some((x, y)) = l.tree.mismatch_with(&l.line) {
            return Err(Error::InvalidRefutation(format!(
                "protocol of line {} disagrees with its line at x={x:#b}, y={y:#b}",
                idx + 1
            )));
        }
        match l.derivation {
            Derivation::Axiom(i) => {
                if idx < m && i != idx {
                    return Err(Error::InvalidRefutation(format!(
                        "line {} must be clause {}",
                        idx + 1,
                        idx + 1
                    )));
                }
                if i >= m || l.line != SemanticLine::from_clause(f.clause(i), part)? {
                    return Err(Error::InvalidRefutation(format!(
                        "line {} is not the truth table of clause {}",
                        idx + 1,
                        i + 1
                    )));
                }
            }
            Derivation::Derived(j, k) => {
                if idx < m {
                    return Err(Error::InvalidRefutation(format!("line {} must be a clause", idx + 1)));
                }
                if j >= idx || k >= idx {
                    return Err(Error::InvalidRefutation(format!(
                        "line {} cites a later line",
                        idx + 1
                    )));
                }
                let stacked = lines[j].tree.depth() + lines[k].tree.depth();
                if stacked > cfg.max_depth {
                    return Err(Error::cap("stacked protocol depth", stacked, cfg.max_depth));
                }
                if let Some((x, y)) = l.line.entailment_counterexample(&[&lines[j].line, &lines[k].line]) {
                    return Err(Error::InvalidRefutation(format!(
                        "line {} is not entailed by lines {} and {} (x={x:#b}, y={y:#b})",
                        idx + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
    }
    if lines.last().unwrap().line.constant_value() != Some(false) {
        return Err(Error::InvalidRefutation("last line is not the constant 0".into()));
    }
    Ok(())
}

struct Stacker<'a> {
    builder: &'a mut CircuitBuilder,
    stacked: &'a mut Vec<StackedNode>,
    line: usize,
    history: History,
    trees: [&'a ProtocolTree; 2],
    rects: [&'a [Rectangle]; 2],
    circuits: [&'a [Option<usize>]; 2],
}

impl Stacker<'_> {
    /// Circuit for the stacked node at `(first, second)` whose triple
    /// intersection is `rect`; `None` when `rect` is empty, so that the parent
    /// gate passes its other child through.
    fn build(&mut self, first: History, second: History, rect: &Rectangle) -> Result<Option<usize>> {
        if rect.is_empty() {
            return Ok(None);
        }
        let (owner, children) = if first.len() < self.trees[0].depth() {
            let kids = [first.push(false), first.push(true)].map(|h| (h, second));
            (self.trees[0].node(first).owner, kids)
        } else if second.len() < self.trees[1].depth() {
            let kids = [second.push(false), second.push(true)].map(|h| (first, h));
            (self.trees[1].node(second).owner, kids)
        } else {
            let gate = self.label_leaf(first, second)?;
            self.record(first, second, gate);
            return Ok(Some(gate));
        };
        let mut sub = [None; 2];
        for (slot, (f, s)) in sub.iter_mut().zip(children) {
            let r = rect
                .intersect(&self.rects[0][f.node_index()])
                .intersect(&self.rects[1][s.node_index()]);
            *slot = self.build(f, s, &r)?;
        }
        let gate = combine(self.builder, owner, sub).expect("a nonempty rectangle has a nonempty child");
        self.record(first, second, gate);
        Ok(Some(gate))
    }

    /// Leaf with a nonempty triple intersection.
    fn label_leaf(&mut self, first: History, second: History) -> Result<usize> {
        if let Some(g) = self.circuits[0][first.bits() as usize] {
            return Ok(g);
        }
        if let Some(g) = self.circuits[1][second.bits() as usize] {
            return Ok(g);
        }
        Err(Error::InvalidRefutation(format!(
            "line {}, history {}: neither premise history {} nor {} is good on a nonempty rectangle",
            self.line + 1,
            self.history,
            first,
            second
        )))
    }

    fn record(&mut self, first: History, second: History, gate: usize) {
        self.stacked.push(StackedNode {
            line: self.line,
            history: self.history,
            first,
            second,
            gate,
        });
    }
}

/// Alice nodes become OR gates and Bob nodes AND gates; a vacuous child is skipped.
fn combine(b: &mut CircuitBuilder, owner: Owner, children: [Option<usize>; 2]) -> Option<usize> {
    match children {
        [Some(l), Some(r)] => Some(match owner {
            Owner::Alice => b.or(l, r),
            Owner::Bob => b.and(l, r),
        }),
        [one, None] | [None, one] => one,
    }
}

/// Builds a monotone circuit separating accepting from rejecting CSP-SAT
/// instances out of a protocol refutation.
pub fn compile_cc_refutation(
    lines: &[RefutationLine],
    f: &CnfFormula,
    part: &VariablePartition,
    cfg: &ProtocolConfig,
) -> Result<Compilation> {
    validate_lines(lines, f, part, cfg)?;
    let g = build_constraint_graph(f, part);
    let mut builder = CircuitBuilder::new();
    let mut stacked = Vec::new();
    let mut line_circuits = Vec::new();
    let mut rects: Vec<Vec<Rectangle>> = Vec::with_capacity(lines.len());
    let mut circuits: Vec<Vec<Option<usize>>> = Vec::with_capacity(lines.len());

    for (idx, l) in lines.iter().enumerate() {
        let line_rects = l.tree.prefix_rectangles(part, cfg)?;
        let mut line_circ = vec![None; 1 << l.tree.depth()];
        for h in l.tree.full_histories() {
            let rect = &line_rects[h.node_index()];
            if !rect.is_zero_monochromatic(&l.line) {
                continue;
            }
            let gate = if rect.is_empty() {
                builder.const0()
            } else {
                match l.derivation {
                    Derivation::Axiom(i) => {
                        // Every x in a nonempty 0-rectangle falsifies the X-part
                        // of clause i, so it restricts to the falsifying α.
                        let c = f.clause(i);
                        let alpha = g
                            .vars(i)
                            .iter()
                            .map(|&v| c.literals().iter().find(|l| l.var == v).unwrap().negated)
                            .collect();
                        builder.input(i, alpha)
                    }
                    Derivation::Derived(j, k) => Stacker {
                        builder: &mut builder,
                        stacked: &mut stacked,
                        line: idx,
                        history: h,
                        trees: [&lines[j].tree, &lines[k].tree],
                        rects: [&rects[j], &rects[k]],
                        circuits: [&circuits[j], &circuits[k]],
                    }
                    .build(History::EMPTY, History::EMPTY, rect)?
                    .expect("rectangle is nonempty"),
                }
            };
            line_circ[h.bits() as usize] = Some(gate);
            line_circuits.push(CompiledLineCircuit { line: idx, history: h, gate });
        }
        rects.push(line_rects);
        circuits.push(line_circ);
    }

    // The last line is constant 0, so every leaf of its tree is good; fold the
    // tree itself into the output.
    let root_tree = &lines.last().unwrap().tree;
    let output = fold_tree(&mut builder, root_tree, History::EMPTY, rects.last().unwrap(), circuits.last().unwrap())
        .expect("the full rectangle is nonempty");

    let max_depth = lines.iter().map(|l| l.tree.depth()).max().unwrap_or(0);
    let ell = lines.len() as u128;
    let stats = SizeStats {
        gates: builder.len(),
        lines: lines.len(),
        max_depth,
        linear_estimate: ell << max_depth,
        conservative_bound: ell << (3 * max_depth),
    };
    Ok(Compilation {
        circuit: builder.finish(output),
        line_circuits,
        stacked,
        stats,
    })
}

fn fold_tree(
    b: &mut CircuitBuilder,
    t: &ProtocolTree,
    h: History,
    rects: &[Rectangle],
    leaves: &[Option<usize>],
) -> Option<usize> {
    if rects[h.node_index()].is_empty() {
        return None;
    }
    if h.len() == t.depth() {
        return Some(leaves[h.bits() as usize].expect("every history of a constant-0 line is good"));
    }
    let left = fold_tree(b, t, h.push(false), rects, leaves);
    let right = fold_tree(b, t, h.push(true), rects, leaves);
    combine(b, t.node(h).owner, [left, right])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationWitness {
    /// An Alice input whose accepting instance evaluates to 0.
    Accepting { x: u64 },
    /// A Bob input whose rejecting instance evaluates to 1.
    Rejecting { y: u64 },
}

impl fmt::Display for SeparationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeparationWitness::Accepting { x } => write!(f, "circuit outputs 0 on U(x) for packed x={x:#b}"),
            SeparationWitness::Rejecting { y } => write!(f, "circuit outputs 1 on V(y) for packed y={y:#b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub pass: bool,
    pub accepting_checked: u64,
    pub rejecting_checked: u64,
    pub witness: Option<SeparationWitness>,
}

/// Evaluates `c` on every `U(x)` and every `V(y)`; the first failure is the
/// witness, accepting inputs being checked first.
pub fn verify_separation(c: &MonotoneCircuit, f: &CnfFormula, part: &VariablePartition) -> Result<SeparationReport> {
    let (n1, n2) = (part.n1(), part.n2());
    if n1.max(n2) > SEPARATION_CAP {
        return Err(Error::cap("side size for separation check", n1.max(n2), SEPARATION_CAP));
    }
    let g = build_constraint_graph(f, part);
    let positions = c.input_positions(&g)?;
    let mut report = SeparationReport {
        pass: true,
        accepting_checked: 0,
        rejecting_checked: 0,
        witness: None,
    };
    for x in 0..1u64 << n1 {
        report.accepting_checked += 1;
        if !c.eval_all(&positions, &accepting_packed(&g, part, x))[c.output] {
            report.pass = false;
            report.witness = Some(SeparationWitness::Accepting { x });
            return Ok(report);
        }
    }
    for y in 0..1u64 << n2 {
        report.rejecting_checked += 1;
        if c.eval_all(&positions, &rejecting_packed(&g, f, part, y)?)[c.output] {
            report.pass = false;
            report.witness = Some(SeparationWitness::Rejecting { y });
            return Ok(report);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafProvenance {
    pub gate: usize,
    pub constraint: usize,
    pub alpha: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub line_count: usize,
    pub gate_count: usize,
    pub leaf_entailments_ok: bool,
    pub internal_entailments_ok: bool,
    pub protocols_match: bool,
    pub max_protocol_bits: usize,
    pub root_constant_zero: bool,
    /// One message per failed check, naming the gate.
    pub failures: Vec<String>,
}

impl ExtractionReport {
    pub fn is_refutation(&self) -> bool {
        self.failures.is_empty() && self.root_constant_zero
    }
}

/// One line per gate, in gate order: line `g` is 0 at `(x, y)` iff gate `g`
/// outputs 1 on `U(x)` and 0 on `V(y)`.
#[derive(Debug, Clone)]
pub struct ExtractedRefutation {
    pub lines: Vec<SemanticLine>,
    pub protocols: Vec<ProtocolTree>,
    pub leaves: Vec<LeafProvenance>,
    pub report: ExtractionReport,
}

/// Extraction from a circuit that separates; errors with the witness otherwise.
pub fn extract_cc2_refutation(
    c: &MonotoneCircuit,
    f: &CnfFormula,
    part: &VariablePartition,
) -> Result<ExtractedRefutation> {
    let sep = verify_separation(c, f, part)?;
    if let Some(w) = sep.witness {
        return Err(Error::NotSeparating(w.to_string()));
    }
    extract_cc2_lines(c, f, part)
}

/// Extraction without the separation precondition; the report says whether
/// the result is a refutation.
pub fn extract_cc2_lines(c: &MonotoneCircuit, f: &CnfFormula, part: &VariablePartition) -> Result<ExtractedRefutation> {
    let (n1, n2) = (part.n1(), part.n2());
    if n1.max(n2) > SEPARATION_CAP {
        return Err(Error::cap("side size for extraction", n1.max(n2), SEPARATION_CAP));
    }
    let g = build_constraint_graph(f, part);
    let positions = c.input_positions(&g)?;
    let gates = c.len();
    // on_u[i] = {x : gate i is 1 on U(x)}, off_v[i] = {y : gate i is 0 on V(y)}
    let mut on_u = vec![FixedBitSet::with_capacity(1 << n1); gates];
    let mut off_v = vec![FixedBitSet::with_capacity(1 << n2); gates];
    for x in 0..1u64 << n1 {
        for (i, v) in c.eval_all(&positions, &accepting_packed(&g, part, x)).into_iter().enumerate() {
            on_u[i].set(x as usize, v);
        }
    }
    for y in 0..1u64 << n2 {
        for (i, v) in c.eval_all(&positions, &rejecting_packed(&g, f, part, y)?).into_iter().enumerate() {
            off_v[i].set(y as usize, !v);
        }
    }

    let mut lines = Vec::with_capacity(gates);
    let mut protocols = Vec::with_capacity(gates);
    for i in 0..gates {
        lines.push(SemanticLine::from_fn(n1, n2, |x, y| {
            !(on_u[i].contains(x as usize) && off_v[i].contains(y as usize))
        })?);
        let bob = ProtocolNode {
            owner: Owner::Bob,
            predicate: Predicate::Table(off_v[i].clone()),
        };
        protocols.push(ProtocolTree::new(
            2,
            vec![
                ProtocolNode {
                    owner: Owner::Alice,
                    predicate: Predicate::Table(on_u[i].clone()),
                },
                bob.clone(),
                bob,
            ],
            vec![true, true, true, false],
        )?);
    }

    let clause_tables: Vec<SemanticLine> = f
        .clauses()
        .iter()
        .map(|cl| SemanticLine::from_clause(cl, part))
        .collect::<Result<_>>()?;
    let mut leaves = Vec::new();
    let mut report = ExtractionReport {
        line_count: lines.len(),
        gate_count: gates,
        leaf_entailments_ok: true,
        internal_entailments_ok: true,
        protocols_match: true,
        max_protocol_bits: protocols.iter().map(ProtocolTree::depth).max().unwrap_or(0),
        root_constant_zero: lines[c.output].constant_value() == Some(false),
        failures: Vec::new(),
    };
    for (i, gate) in c.gates.iter().enumerate() {
        let premises: Vec<&SemanticLine> = match *gate {
            Gate::Input { constraint, ref alpha } => {
                leaves.push(LeafProvenance {
                    gate: i,
                    constraint,
                    alpha: alpha.clone(),
                });
                vec![&clause_tables[constraint]]
            }
            Gate::And(a, b) | Gate::Or(a, b) => vec![&lines[a], &lines[b]],
            Gate::Const0 | Gate::Const1 => Vec::new(),
        };
        if let Some((x, y)) = lines[i].entailment_counterexample(&premises) {
            let leaf = matches!(gate, Gate::Input { .. });
            if leaf {
                report.leaf_entailments_ok = false;
            } else {
                report.internal_entailments_ok = false;
            }
            report.failures.push(format!(
                "line of g{i} is not entailed by its {} at x={x:#b}, y={y:#b}",
                if leaf { "clause" } else { "premises" }
            ));
        }
        if protocols[i].mismatch_with(&lines[i]).is_some() {
            report.protocols_match = false;
            report.failures.push(format!("protocol of g{i} does not compute its line"));
        }
    }
    Ok(ExtractedRefutation {
        lines,
        protocols,
        leaves,
        report,
    })
}

/// Text form: `g<idx> = in <constraint> <alpha-bits> | and g<j> g<k> | or g<j> g<k>
/// | const0 | const1`, then `output g<idx>`. Constraints are one-based and an
/// empty `alpha` is written `-`.
pub fn write_circuit(c: &MonotoneCircuit) -> String {
    let mut out = String::new();
    for (i, gate) in c.gates.iter().enumerate() {
        let _ = match gate {
            Gate::Input { constraint, alpha } => {
                let bits: String = if alpha.is_empty() {
                    "-".into()
                } else {
                    alpha.iter().map(|&b| if b { '1' } else { '0' }).collect()
                };
                writeln!(out, "g{i} = in {} {bits}", constraint + 1)
            }
            Gate::Const0 => writeln!(out, "g{i} = const0"),
            Gate::Const1 => writeln!(out, "g{i} = const1"),
            Gate::And(a, b) => writeln!(out, "g{i} = and g{a} g{b}"),
            Gate::Or(a, b) => writeln!(out, "g{i} = or g{a} g{b}"),
        };
    }
    let _ = writeln!(out, "output g{}", c.output);
    out
}

pub fn parse_circuit(text: &str) -> Result<MonotoneCircuit> {
    fn gate_ref(t: &str, lineno: usize) -> Result<usize> {
        t.strip_prefix('g')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(lineno, format!("bad gate reference `{t}`")))
    }
    let mut gates = Vec::new();
    let mut output = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if output.is_some() {
            return Err(Error::parse(lineno, "content after the output line"));
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if let ["output", g] = toks.as_slice() {
            output = Some(gate_ref(g, lineno)?);
            continue;
        }
        let [name, "=", rest @ ..] = toks.as_slice() else {
            return Err(Error::parse(lineno, "expected `g<idx> = ...` or `output g<idx>`"));
        };
        if gate_ref(name, lineno)? != gates.len() {
            return Err(Error::parse(lineno, format!("expected gate g{}", gates.len())));
        }
        let earlier = |t: &str| -> Result<usize> {
            let r = gate_ref(t, lineno)?;
            if r >= gates.len() {
                return Err(Error::parse(lineno, format!("`{t}` is not an earlier gate")));
            }
            Ok(r)
        };
        let gate = match rest {
            ["const0"] => Gate::Const0,
            ["const1"] => Gate::Const1,
            ["and", a, b] => Gate::And(earlier(a)?, earlier(b)?),
            ["or", a, b] => Gate::Or(earlier(a)?, earlier(b)?),
            ["in", j, bits] => {
                let constraint = match j.parse::<usize>() {
                    Ok(j) if j >= 1 => j - 1,
                    _ => return Err(Error::parse(lineno, format!("bad constraint index `{j}`"))),
                };
                let alpha = if *bits == "-" {
                    Vec::new()
                } else {
                    bits.chars()
                        .map(|ch| match ch {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(Error::parse(lineno, format!("bad alpha bit `{ch}`"))),
                        })
                        .collect::<Result<_>>()?
                };
                Gate::Input { constraint, alpha }
            }
            _ => return Err(Error::parse(lineno, format!("unrecognized gate `{}`", rest.join(" ")))),
        };
        gates.push(gate);
    }
    let output = output.ok_or_else(|| Error::parse(text.lines().count() + 1, "missing output line"))?;
    MonotoneCircuit::new(gates, output).map_err(|e| Error::parse(text.lines().count(), e.to_string()))
}
