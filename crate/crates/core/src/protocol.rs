//! Deterministic two-party protocol trees, transcripts, the rectangles they
//! induce, and the one-round real (referee) protocol for a linear inequality.
//!
//! Trees are complete: every leaf sits at depth `k`. Node predicates read only
//! the owner's packed input (`x` for Alice, `y` for Bob, bit `j` being the
//! `j`-th variable of that side in the partition).

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::cnf::{check_scope, Assignment, Clause, Side, VariablePartition};
use crate::cp::{packed_sum, LinearInequality, SemanticLine};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub max_depth: usize,
    /// Per-side cap on `n1`, `n2` for rectangle enumeration.
    pub enum_cap: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            max_depth: 20,
            enum_cap: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Owner {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Const(bool),
    /// True iff some listed literal `(position, negated)` is satisfied.
    AnyLiteralTrue(Vec<(usize, bool)>),
    /// Bit `shift` of `sum - offset`.
    SumBit {
        terms: Vec<(usize, i64)>,
        offset: i64,
        shift: u32,
    },
    SumAtLeast { terms: Vec<(usize, i64)>, bound: i64 },
    /// Explicit truth table over the owner's packed inputs.
    Table(FixedBitSet),
}

impl Predicate {
    #[inline]
    pub fn eval(&self, input: u64) -> bool {
        match self {
            Predicate::Const(b) => *b,
            Predicate::AnyLiteralTrue(lits) => lits
                .iter()
                .any(|&(pos, neg)| (input >> pos & 1 == 1) != neg),
            Predicate::SumBit {
                terms,
                offset,
                shift,
            } => ((packed_sum(terms, input) - offset) >> shift) & 1 == 1,
            Predicate::SumAtLeast { terms, bound } => packed_sum(terms, input) >= *bound,
            Predicate::Table(t) => t.contains(input as usize),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolNode {
    pub owner: Owner,
    pub predicate: Predicate,
}

/// A transcript: `len` bits, first bit most significant in `bits`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History {
    len: usize,
    bits: u64,
}

impl History {
    pub const EMPTY: History = History { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u64) -> Self {
        assert!(len <= 63 && (len == 63 || bits < 1 << len));
        History { len, bits }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut h = History::EMPTY;
        for c in s.chars() {
            match c {
                '0' => h = h.push(false),
                '1' => h = h.push(true),
                _ => return Err(Error::InvalidArgument(format!("bad history `{s}`"))),
            }
        }
        Ok(h)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn push(self, bit: bool) -> Self {
        History {
            len: self.len + 1,
            bits: self.bits << 1 | bit as u64,
        }
    }

    /// The `i`-th bit sent.
    pub fn bit(&self, i: usize) -> bool {
        self.bits >> (self.len - 1 - i) & 1 == 1
    }

    pub fn prefix(&self, len: usize) -> History {
        History {
            len,
            bits: self.bits >> (self.len - len),
        }
    }

    pub fn is_prefix_of(&self, other: &History) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    /// Heap index of the tree position this history addresses.
    #[inline]
    pub fn node_index(&self) -> usize {
        (1usize << self.len) - 1 + self.bits as usize
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.bit(i) as u8)?;
        }
        Ok(())
    }
}

impl Serialize for History {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for History {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        History::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Complete binary protocol tree of depth `k`; internal nodes and leaves are
/// stored in heap order addressed by history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolTree {
    depth: usize,
    nodes: Vec<ProtocolNode>,
    leaves: Vec<bool>,
}

impl ProtocolTree {
    pub fn new(depth: usize, nodes: Vec<ProtocolNode>, leaves: Vec<bool>) -> Result<Self> {
        if depth > 30 {
            return Err(Error::cap("protocol depth", depth, 30));
        }
        if nodes.len() != (1 << depth) - 1 || leaves.len() != 1 << depth {
            return Err(Error::InvalidArgument(format!(
                "depth-{depth} tree needs {} nodes and {} leaves",
                (1 << depth) - 1,
                1 << depth
            )));
        }
        Ok(ProtocolTree {
            depth,
            nodes,
            leaves,
        })
    }

    pub fn constant(value: bool) -> Self {
        ProtocolTree {
            depth: 0,
            nodes: Vec::new(),
            leaves: vec![value],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Node reached after `h` (with `h.len() < depth`).
    pub fn node(&self, h: History) -> &ProtocolNode {
        &self.nodes[h.node_index()]
    }

    pub fn leaf_output(&self, h: History) -> bool {
        debug_assert_eq!(h.len(), self.depth);
        self.leaves[h.bits() as usize]
    }

    pub fn full_histories(&self) -> impl Iterator<Item = History> {
        let depth = self.depth;
        (0..1u64 << depth).map(move |b| History::new(depth, b))
    }

    /// Runs on packed inputs.
    pub fn run_packed(&self, x: u64, y: u64) -> (History, bool) {
        let mut h = History::EMPTY;
        while h.len() < self.depth {
            let node = self.node(h);
            let input = match node.owner {
                Owner::Alice => x,
                Owner::Bob => y,
            };
            h = h.push(node.predicate.eval(input));
        }
        (h, self.leaf_output(h))
    }

    /// Rectangles of every prefix, in heap order (`History::node_index`).
    pub fn prefix_rectangles(&self, part: &VariablePartition, cfg: &ProtocolConfig) -> Result<Vec<Rectangle>> {
        let mut out = vec![Rectangle::full(part, cfg)?; (2 << self.depth) - 1];
        for idx in 0..(1usize << self.depth) - 1 {
            let node = &self.nodes[idx];
            let parent = out[idx].clone();
            let (n, set) = match node.owner {
                Owner::Alice => (parent.n1, &parent.xset),
                Owner::Bob => (parent.n2, &parent.yset),
            };
            let mut ones = FixedBitSet::with_capacity(1 << n);
            for v in set.ones() {
                if node.predicate.eval(v as u64) {
                    ones.insert(v);
                }
            }
            let mut zeros = set.clone();
            zeros.difference_with(&ones);
            for (child, split) in [(2 * idx + 1, zeros), (2 * idx + 2, ones)] {
                let mut r = parent.clone();
                match node.owner {
                    Owner::Alice => r.xset = split,
                    Owner::Bob => r.yset = split,
                }
                out[child] = r;
            }
        }
        Ok(out)
    }

    /// First joint input where the tree's output differs from `line`.
    pub fn mismatch_with(&self, line: &SemanticLine) -> Option<(u64, u64)> {
        (0..1u64 << line.n2())
            .flat_map(|y| (0..1u64 << line.n1()).map(move |x| (x, y)))
            .find(|&(x, y)| self.run_packed(x, y).1 != line.value(x, y))
    }
}

/// A combinatorial rectangle `xset × yset` of packed inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rectangle {
    pub n1: usize,
    pub n2: usize,
    pub xset: FixedBitSet,
    pub yset: FixedBitSet,
}

impl Rectangle {
    pub fn full(part: &VariablePartition, cfg: &ProtocolConfig) -> Result<Self> {
        let (n1, n2) = (part.n1(), part.n2());
        if n1.max(n2) > cfg.enum_cap {
            return Err(Error::cap("side size for rectangle enumeration", n1.max(n2), cfg.enum_cap));
        }
        let mut xset = FixedBitSet::with_capacity(1 << n1);
        xset.insert_range(..);
        let mut yset = FixedBitSet::with_capacity(1 << n2);
        yset.insert_range(..);
        Ok(Rectangle { n1, n2, xset, yset })
    }

    pub fn contains(&self, x: u64, y: u64) -> bool {
        self.xset.contains(x as usize) && self.yset.contains(y as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.xset.is_clear() || self.yset.is_clear()
    }

    pub fn size(&self) -> usize {
        self.xset.count_ones(..) * self.yset.count_ones(..)
    }

    pub fn intersect(&self, other: &Rectangle) -> Rectangle {
        let mut r = self.clone();
        r.xset.intersect_with(&other.xset);
        r.yset.intersect_with(&other.yset);
        r
    }

    pub fn points(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.yset
            .ones()
            .flat_map(move |y| self.xset.ones().map(move |x| (x as u64, y as u64)))
    }

    /// Whether `line` is 0 on every point (vacuously true when empty).
    pub fn is_zero_monochromatic(&self, line: &SemanticLine) -> bool {
        self.points().all(|(x, y)| !line.value(x, y))
    }
}

fn side_literals(c: &Clause, part: &VariablePartition, side: Side) -> Vec<(usize, bool)> {
    c.literals()
        .iter()
        .filter_map(|l| match part.locate(l.var) {
            Some((s, pos)) if s == side => Some((pos, l.negated)),
            _ => None,
        })
        .collect()
}

/// Two-bit protocol: each player sends 0 iff all of their literals are false;
/// the output is 0 exactly at history `00`.
pub fn clause_protocol(c: &Clause, part: &VariablePartition) -> ProtocolTree {
    let alice = Predicate::AnyLiteralTrue(side_literals(c, part, Side::X));
    let bob = Predicate::AnyLiteralTrue(side_literals(c, part, Side::Y));
    let bob_node = ProtocolNode {
        owner: Owner::Bob,
        predicate: bob,
    };
    ProtocolTree {
        depth: 2,
        nodes: vec![
            ProtocolNode {
                owner: Owner::Alice,
                predicate: alice,
            },
            bob_node.clone(),
            bob_node,
        ],
        leaves: vec![false, true, true, true],
    }
}

/// Alice sends her partial sum (minus its minimum, most significant bit first)
/// in `w` bits; Bob answers with one bit, the truth of the inequality, which is
/// also the output. All-zero left-hand sides give a depth-0 constant tree.
pub fn inequality_protocol(
    ineq: &LinearInequality,
    part: &VariablePartition,
    cfg: &ProtocolConfig,
) -> Result<ProtocolTree> {
    if ineq.coeffs().iter().all(|&c| c == 0) {
        return Ok(ProtocolTree::constant(0 >= ineq.constant()));
    }
    let split = ineq.split(part)?;
    let min: i64 = split.x_terms.iter().map(|t| t.1.min(0)).sum();
    let max: i64 = split.x_terms.iter().map(|t| t.1.max(0)).sum();
    let range = (max - min) as u64;
    let width = (u64::BITS - range.leading_zeros()) as usize;
    let depth = width + 1;
    if depth > cfg.max_depth {
        return Err(Error::cap("inequality protocol depth", depth, cfg.max_depth));
    }
    let mut nodes = Vec::with_capacity((1 << depth) - 1);
    for level in 0..width {
        let node = ProtocolNode {
            owner: Owner::Alice,
            predicate: Predicate::SumBit {
                terms: split.x_terms.clone(),
                offset: min,
                shift: (width - 1 - level) as u32,
            },
        };
        nodes.extend(std::iter::repeat_n(node, 1 << level));
    }
    for sent in 0..1i64 << width {
        nodes.push(ProtocolNode {
            owner: Owner::Bob,
            predicate: Predicate::SumAtLeast {
                terms: split.y_terms.clone(),
                bound: split.constant - (min + sent),
            },
        });
    }
    let leaves = (0..1u64 << depth).map(|h| h & 1 == 1).collect();
    ProtocolTree::new(depth, nodes, leaves)
}

pub fn run_protocol(
    t: &ProtocolTree,
    part: &VariablePartition,
    x: &Assignment,
    y: &Assignment,
) -> Result<(History, bool)> {
    check_scope(x, part.xvars(), "x")?;
    check_scope(y, part.yvars(), "y")?;
    Ok(t.run_packed(part.pack_x(x)?, part.pack_y(y)?))
}

/// Inputs consistent with every bit of `h` sent so far.
pub fn materialize_rectangle(
    t: &ProtocolTree,
    h: History,
    part: &VariablePartition,
    cfg: &ProtocolConfig,
) -> Result<Rectangle> {
    if h.len() > t.depth() {
        return Err(Error::InvalidArgument(format!(
            "history of length {} on a depth-{} tree",
            h.len(),
            t.depth()
        )));
    }
    let mut r = Rectangle::full(part, cfg)?;
    for i in 0..h.len() {
        let node = t.node(h.prefix(i));
        let bit = h.bit(i);
        let set = match node.owner {
            Owner::Alice => &mut r.xset,
            Owner::Bob => &mut r.yset,
        };
        let keep: Vec<usize> = set
            .ones()
            .filter(|&v| node.predicate.eval(v as u64) == bit)
            .collect();
        set.clear();
        set.extend(keep);
    }
    Ok(r)
}

/// Full-length histories whose rectangle is 0-monochromatic for `line`
/// (empty rectangles included).
pub fn good_histories(
    t: &ProtocolTree,
    line: &SemanticLine,
    part: &VariablePartition,
    cfg: &ProtocolConfig,
) -> Result<Vec<History>> {
    check_line_shape(line, part)?;
    let rects = t.prefix_rectangles(part, cfg)?;
    Ok(t
        .full_histories()
        .filter(|h| rects[h.node_index()].is_zero_monochromatic(line))
        .collect())
}

pub(crate) fn check_line_shape(line: &SemanticLine, part: &VariablePartition) -> Result<()> {
    if line.n1() != part.n1() || line.n2() != part.n2() {
        return Err(Error::Dimension(format!(
            "line over ({}, {}) variables, partition over ({}, {})",
            line.n1(),
            line.n2(),
            part.n1(),
            part.n2()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealProtocolRound {
    pub alice_value: f64,
    pub bob_value: f64,
    pub referee_bit: bool,
}

/// Alice sends `α = a_X · x`, Bob sends `β = b - a_Y · y`; the referee's bit
/// `[α >= β]` is the output.
pub fn real_protocol_eval(
    ineq: &LinearInequality,
    part: &VariablePartition,
    x: &Assignment,
    y: &Assignment,
) -> Result<(RealProtocolRound, bool)> {
    check_scope(x, part.xvars(), "x")?;
    check_scope(y, part.yvars(), "y")?;
    let split = ineq.split(part)?;
    let alice_value = split.alice_sum(part.pack_x(x)?) as f64;
    let bob_value = (split.constant - split.bob_sum(part.pack_y(y)?)) as f64;
    let referee_bit = alice_value >= bob_value;
    Ok((
        RealProtocolRound {
            alice_value,
            bob_value,
            referee_bit,
        },
        referee_bit,
    ))
}
