//! CNF → reversible circuit.
//!
//! Register layout (1-based wires): variables `1..=n`, then the work ("dust")
//! qubits, then the result qubit `s_f = n + μ + 1`. Clause `k` owns the region
//! starting at `s_k`:
//!
//! - clause 1 holds only its OR-chain, `card + δ − 1` qubits, so its result
//!   sits at `s_2 − 1`;
//! - clause `k ≥ 2` holds its OR-chain plus one slot for the AND that folds it
//!   into the running conjunction, so its result sits at `s_{k+1} − 2` and the
//!   AND lands on `s_{k+1} − 1`.
//!
//! The AND-chain is therefore `AND(s_{k+1}−1, s_{k+2}−2, s_{k+2}−1)` for
//! `k ≤ m−2` and `AND(s_m−1, s_f−1, s_f)` for the last step.

use serde::Serialize;
use thiserror::Error;

use crate::cnf::{CnfInstance, Literal};
use crate::gates::{GateError, GateKind, GateOp, GateSequence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("instance has no clauses")]
    NoClauses,
    #[error("clause index {k} outside 1..={m}")]
    ClauseIndex { k: usize, m: usize },
    #[error("clause {k} wrote its result to wire {got}, layout expects {expected}")]
    RegionOverflow { k: usize, got: usize, expected: usize },
    #[error(transparent)]
    Gate(#[from] GateError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QubitLayout {
    pub n: usize,
    pub m: usize,
    /// Work qubit count μ.
    pub mu: usize,
    /// `n + μ + 1`.
    pub total: usize,
    /// Region starts `s_1 … s_m`.
    pub s: Vec<usize>,
    pub s_final: usize,
}

impl QubitLayout {
    /// Wire holding the OR of clause `k` (1-based).
    pub fn clause_result(&self, k: usize) -> usize {
        if k == self.m {
            self.s_final - 1
        } else if k == 1 {
            self.s[1] - 1
        } else {
            self.s[k] - 2
        }
    }

    fn region_start(&self, k: usize) -> usize {
        self.s[k - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompiledCircuit {
    pub layout: QubitLayout,
    pub sequence: GateSequence,
}

impl CompiledCircuit {
    /// The circuit without its leading Hadamard block: the classical part
    /// that writes `t(C)` into the result qubit for a basis input.
    pub fn classical_part(&self) -> GateSequence {
        GateSequence {
            width: self.sequence.width,
            ops: self
                .sequence
                .ops
                .iter()
                .filter(|op| op.kind != GateKind::HBlock)
                .cloned()
                .collect(),
        }
    }

    /// Basis index of `|a, 0^μ, 0⟩` for an assignment index `a`.
    pub fn input_index(&self, assignment: u64) -> usize {
        (assignment as usize) << (self.layout.total - self.layout.n)
    }
}

fn delta_one(card: usize) -> usize {
    usize::from(card == 1)
}

pub fn compute_layout(instance: &CnfInstance) -> Result<QubitLayout, CompileError> {
    let n = instance.num_vars();
    let cards: Vec<usize> = instance.clauses().iter().map(|c| c.len()).collect();
    let m = cards.len();
    if m == 0 {
        return Err(CompileError::NoClauses);
    }
    let width_of = |k: usize| cards[k - 1] + delta_one(cards[k - 1]);
    let mut s = Vec::with_capacity(m);
    s.push(n + 1);
    for i in 2..=m {
        let prev = s[i - 2] + width_of(i - 1);
        s.push(if i == 2 { prev - 1 } else { prev });
    }
    let s_end = s[m - 1] - 1 + width_of(m);
    let mu = s_end - 1 - n;
    Ok(QubitLayout {
        n,
        m,
        mu,
        total: n + mu + 1,
        s,
        s_final: s_end,
    })
}

/// OR-chain for clause `k`: `OR(l1, l2, w)`, `OR(l3, w, w+1)`, … with each
/// negated literal read through a negated control. A unit clause is COPYed
/// into its single work qubit.
pub fn compile_clause(
    instance: &CnfInstance,
    k: usize,
    layout: &QubitLayout,
) -> Result<GateSequence, CompileError> {
    let m = instance.num_clauses();
    if k == 0 || k > m {
        return Err(CompileError::ClauseIndex { k, m });
    }
    let clause = &instance.clauses()[k - 1];
    let lits = chain_order(clause.literals());
    let mut seq = GateSequence::new(layout.total);
    let base = layout.region_start(k);
    let result = match lits.as_slice() {
        [only] => {
            seq.push(GateOp::copy(only.variable(), base).with_negations(&[only.is_negated()]))?;
            base
        }
        [a, b] if a.variable() == b.variable() => {
            // x ∨ ¬x: the work qubit is constant 1.
            seq.push(GateOp::not(base))?;
            base
        }
        [a, b, rest @ ..] => {
            seq.push(
                GateOp::or(a.variable(), b.variable(), base)
                    .with_negations(&[a.is_negated(), b.is_negated()]),
            )?;
            let mut acc = base;
            for lit in rest {
                seq.push(
                    GateOp::or(lit.variable(), acc, acc + 1)
                        .with_negations(&[lit.is_negated(), false]),
                )?;
                acc += 1;
            }
            acc
        }
        [] => unreachable!("clauses are nonempty"),
    };
    let expected = layout.clause_result(k);
    if result != expected {
        return Err(CompileError::RegionOverflow {
            k,
            got: result,
            expected,
        });
    }
    Ok(seq)
}

/// Literal order for the OR-chain: the first two literals must sit on
/// distinct wires, so a tautological pair at the front is split when a third
/// literal exists.
fn chain_order(lits: &[Literal]) -> Vec<Literal> {
    let mut out = lits.to_vec();
    if out.len() >= 3 && out[0].variable() == out[1].variable() {
        let swap = (2..out.len())
            .find(|&i| out[i].variable() != out[0].variable())
            .expect("at most two literals share a variable");
        out.swap(1, swap);
    }
    out
}

/// Full circuit: Hadamard block on the variables, every clause's OR-chain in
/// order, then the AND-chain ending on `s_f` (a COPY when `m = 1`).
pub fn compile(instance: &CnfInstance) -> Result<CompiledCircuit, CompileError> {
    let layout = compute_layout(instance)?;
    let mut sequence = GateSequence::new(layout.total);
    sequence.push(GateOp::h_prefix(layout.n))?;
    for k in 1..=layout.m {
        sequence.ops.extend(compile_clause(instance, k, &layout)?.ops);
    }
    let (s, m, s_f) = (&layout.s, layout.m, layout.s_final);
    if m == 1 {
        sequence.push(GateOp::copy(s_f - 1, s_f))?;
    } else {
        for k in 1..=m - 2 {
            // s is 0-indexed: s[k] = s_{k+1}.
            sequence.push(GateOp::and(s[k] - 1, s[k + 1] - 2, s[k + 1] - 1))?;
        }
        sequence.push(GateOp::and(s[m - 1] - 1, s_f - 1, s_f))?;
    }
    Ok(CompiledCircuit { layout, sequence })
}
