//! Symbolic gate set: NOT, CN, CCN, the logical gates AND / OR / COPY, and a
//! Hadamard block. Gates carry only their kind and wire indices; the
//! simulator realizes the `I ⊗ … ⊗ U ⊗ … ⊗ I` embedding by index arithmetic.
//!
//! Wires are 1-based and wire 1 is the leftmost tensor factor. For every gate
//! except `H_BLOCK` the last listed wire is the target and the others are
//! controls. All classical gates act as `target ^= f(controls)`:
//!
//! | kind | f                      |
//! |------|------------------------|
//! | NOT  | 1                      |
//! | CN   | c1                     |
//! | COPY | c1                     |
//! | CCN  | c1 ∧ c2                |
//! | AND  | c1 ∧ c2                |
//! | OR   | c1 ∨ c2                |
//!
//! which is exactly the truth-table form `|ε, f(ε)⟩⟨ε, 0| + |ε, 1−f(ε)⟩⟨ε, 1|`.
//! A negated control reads the complement of its wire, which is the same as
//! conjugating the gate with NOT on that wire.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simulator::{SimError, StateVector};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GateError {
    #[error("{kind} expects {expected} wires, got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} expects {expected} negation flags, got {got}")]
    NegArity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("wire {wire} outside 1..={width}")]
    WireOutOfRange { wire: usize, width: usize },
    #[error("wire {0} listed twice")]
    DuplicateWire(usize),
    #[error("basis input has {got} bits, circuit width is {width}")]
    WidthMismatch { width: usize, got: usize },
    #[error("{0} does not map basis states to basis states")]
    NotClassical(GateKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "NOT")]
    Not,
    #[serde(rename = "CN")]
    Cn,
    #[serde(rename = "CCN")]
    Ccn,
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
    #[serde(rename = "COPY")]
    Copy,
    #[serde(rename = "H_BLOCK")]
    HBlock,
}

impl GateKind {
    /// Number of wires, `None` for the variable-width Hadamard block.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Not => Some(1),
            GateKind::Cn | GateKind::Copy => Some(2),
            GateKind::Ccn | GateKind::And | GateKind::Or => Some(3),
            GateKind::HBlock => None,
        }
    }

    pub fn num_controls(self) -> usize {
        match self {
            GateKind::HBlock => 0,
            k => k.arity().unwrap() - 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Not => "NOT",
            GateKind::Cn => "CN",
            GateKind::Ccn => "CCN",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Copy => "COPY",
            GateKind::HBlock => "H_BLOCK",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    /// One flag per control wire.
    #[serde(rename = "neg")]
    pub negate_controls: Vec<bool>,
}

impl GateOp {
    fn raw(kind: GateKind, wires: Vec<usize>) -> Self {
        let negate_controls = vec![false; kind.num_controls().min(wires.len())];
        GateOp {
            kind,
            wires,
            negate_controls,
        }
    }

    pub fn not(u: usize) -> Self {
        Self::raw(GateKind::Not, vec![u])
    }

    pub fn cn(control: usize, target: usize) -> Self {
        Self::raw(GateKind::Cn, vec![control, target])
    }

    pub fn ccn(c1: usize, c2: usize, target: usize) -> Self {
        Self::raw(GateKind::Ccn, vec![c1, c2, target])
    }

    pub fn and(u: usize, v: usize, w: usize) -> Self {
        Self::raw(GateKind::And, vec![u, v, w])
    }

    pub fn or(u: usize, v: usize, w: usize) -> Self {
        Self::raw(GateKind::Or, vec![u, v, w])
    }

    pub fn copy(u: usize, v: usize) -> Self {
        Self::raw(GateKind::Copy, vec![u, v])
    }

    /// Hadamard on each of `wires`.
    pub fn h_block(wires: Vec<usize>) -> Self {
        Self::raw(GateKind::HBlock, wires)
    }

    /// Hadamard on wires `1..=k`, i.e. `U_H^(N)(k)`.
    pub fn h_prefix(k: usize) -> Self {
        Self::h_block((1..=k).collect())
    }

    pub fn with_negations(mut self, neg: &[bool]) -> Self {
        self.negate_controls = neg.to_vec();
        self
    }

    pub fn controls(&self) -> &[usize] {
        match self.kind {
            GateKind::HBlock => &[],
            _ => &self.wires[..self.wires.len() - 1],
        }
    }

    /// Target wire; `None` for `H_BLOCK`.
    pub fn target(&self) -> Option<usize> {
        match self.kind {
            GateKind::HBlock => None,
            _ => self.wires.last().copied(),
        }
    }

    pub fn is_classical(&self) -> bool {
        self.kind != GateKind::HBlock
    }

    pub fn validate(&self, width: usize) -> Result<(), GateError> {
        if let Some(expected) = self.kind.arity() {
            if self.wires.len() != expected {
                return Err(GateError::Arity {
                    kind: self.kind,
                    expected,
                    got: self.wires.len(),
                });
            }
        }
        let expected = self.kind.num_controls();
        if self.negate_controls.len() != expected {
            return Err(GateError::NegArity {
                kind: self.kind,
                expected,
                got: self.negate_controls.len(),
            });
        }
        for (i, &w) in self.wires.iter().enumerate() {
            if w == 0 || w > width {
                return Err(GateError::WireOutOfRange { wire: w, width });
            }
            if self.wires[..i].contains(&w) {
                return Err(GateError::DuplicateWire(w));
            }
        }
        Ok(())
    }

    /// `f(controls)` evaluated on a basis index of a `width`-qubit register.
    #[inline]
    pub(crate) fn fires(&self, index: usize, width: usize) -> bool {
        let bit = |pos: usize| -> bool {
            let wire = self.wires[pos];
            ((index >> (width - wire)) & 1 == 1) != self.negate_controls[pos]
        };
        match self.kind {
            GateKind::Not => true,
            GateKind::Cn | GateKind::Copy => bit(0),
            GateKind::Ccn | GateKind::And => bit(0) && bit(1),
            GateKind::Or => bit(0) || bit(1),
            GateKind::HBlock => unreachable!("H_BLOCK has no classical action"),
        }
    }

    /// Image of a basis index under a classical gate.
    pub fn apply_to_index(&self, index: usize, width: usize) -> Result<usize, GateError> {
        if !self.is_classical() {
            return Err(GateError::NotClassical(self.kind));
        }
        let target = self.target().unwrap();
        if self.fires(index, width) {
            Ok(index ^ (1 << (width - target)))
        } else {
            Ok(index)
        }
    }

    /// Basis-state action on an explicit bit vector (`bits[0]` is wire 1).
    pub fn gate_semantics(&self, basis_in: &[bool]) -> Result<Vec<bool>, GateError> {
        let width = basis_in.len();
        for &w in &self.wires {
            if w == 0 || w > width {
                return Err(GateError::WidthMismatch { width, got: w });
            }
        }
        self.validate(width)?;
        let index = basis_in
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        let out = self.apply_to_index(index, width)?;
        Ok((0..width).map(|i| (out >> (width - 1 - i)) & 1 == 1).collect())
    }

    /// Checks unitarity on the wires the gate touches: for classical gates the
    /// induced map on `{0,1}^k` must be a bijection; for `H_BLOCK` the 2×2
    /// Hadamard matrix must satisfy `H H† = I`.
    pub fn unitary_check(&self) -> bool {
        let k = self.wires.len();
        if k == 0 {
            return false;
        }
        if !self.is_classical() {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let m = [[h, h], [h, -h]];
            return (0..2).all(|i| {
                (0..2).all(|j| {
                    let dot: f64 = (0..2).map(|l| m[i][l] * m[j][l]).sum();
                    (dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15
                })
            });
        }
        // Relabel the touched wires as 1..=k of a local register.
        let local = GateOp {
            kind: self.kind,
            wires: (1..=k).collect(),
            negate_controls: self.negate_controls.clone(),
        };
        if local.validate(k).is_err() {
            return false;
        }
        let mut seen = vec![false; 1 << k];
        for i in 0..1usize << k {
            let j = local.apply_to_index(i, k).unwrap();
            if std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        true
    }
}

/// An ordered list of gates on a register of `width` qubits, applied left to
/// right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSequence {
    pub width: usize,
    pub ops: Vec<GateOp>,
}

impl GateSequence {
    pub fn new(width: usize) -> Self {
        GateSequence {
            width,
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, op: GateOp) -> Result<(), GateError> {
        op.validate(self.width)?;
        self.ops.push(op);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), GateError> {
        self.ops.iter().try_for_each(|op| op.validate(self.width))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Classical action of the whole sequence on a basis index. Fails on
    /// `H_BLOCK`.
    pub fn apply_to_index(&self, index: usize) -> Result<usize, GateError> {
        self.ops
            .iter()
            .try_fold(index, |i, op| op.apply_to_index(i, self.width))
    }

    /// Rewrites the sequence over NOT / CN / CCN only:
    /// `OR(u,v,w) = CN(u,w) CN(v,w) CCN(u,v,w)`, `AND = CCN`, `COPY = CN`, and
    /// each negated control becomes a NOT pair around the gate.
    pub fn expand_elementary(&self) -> GateSequence {
        let mut out = GateSequence::new(self.width);
        for op in &self.ops {
            let negated: Vec<usize> = op
                .controls()
                .iter()
                .zip(&op.negate_controls)
                .filter(|(_, &n)| n)
                .map(|(&w, _)| w)
                .collect();
            out.ops.extend(negated.iter().map(|&w| GateOp::not(w)));
            let w = &op.wires;
            match op.kind {
                GateKind::Or => {
                    out.ops.push(GateOp::cn(w[0], w[2]));
                    out.ops.push(GateOp::cn(w[1], w[2]));
                    out.ops.push(GateOp::ccn(w[0], w[1], w[2]));
                }
                GateKind::And | GateKind::Ccn => out.ops.push(GateOp::ccn(w[0], w[1], w[2])),
                GateKind::Copy | GateKind::Cn => out.ops.push(GateOp::cn(w[0], w[1])),
                GateKind::Not | GateKind::HBlock => out.ops.push(GateOp {
                    negate_controls: vec![false; op.kind.num_controls()],
                    ..op.clone()
                }),
            }
            out.ops.extend(negated.iter().map(|&w| GateOp::not(w)));
        }
        out
    }

    /// Gate counts keyed by kind name, in a fixed kind order.
    pub fn counts(&self) -> Vec<(GateKind, usize)> {
        use GateKind::*;
        [HBlock, Not, Cn, Ccn, And, Or, Copy]
            .into_iter()
            .map(|k| (k, self.ops.iter().filter(|op| op.kind == k).count()))
            .filter(|&(_, c)| c > 0)
            .collect()
    }
}

/// `ξ(t) = W(t) H |0⟩ = 2^{-N/2} Σ_k exp(2πi t k / 2^N) |k⟩`, built by
/// running the Hadamard block and then the per-qubit phase factors of `W(t)`.
pub fn fourier_state(t: u64, width: usize) -> Result<StateVector, SimError> {
    fourier_state_with_cap(t, width, crate::simulator::DEFAULT_WIDTH_CAP)
}

pub fn fourier_state_with_cap(t: u64, width: usize, cap: usize) -> Result<StateVector, SimError> {
    let mut state = StateVector::zero_with_cap(width, cap)?;
    if width < 64 && t >= 1u64 << width {
        return Err(SimError::FourierIndex { t, width });
    }
    state.apply_op(&GateOp::h_prefix(width))?;
    let dim = 1u128 << width;
    for qubit in 1..=width {
        // Qubit q carries weight 2^{N-q} in the basis index.
        let weight = 1u128 << (width - qubit);
        let turns = ((u128::from(t) * weight) % dim) as f64 / dim as f64;
        state.apply_phase(qubit, Complex64::from_polar(1.0, 2.0 * PI * turns))?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn show(b: &[bool]) -> String {
        b.iter().map(|&x| if x { '1' } else { '0' }).collect()
    }

    #[test]
    fn semantics_examples() {
        let run = |op: GateOp, input: &str| show(&op.gate_semantics(&bits(input)).unwrap());
        assert_eq!(run(GateOp::and(1, 2, 3), "110"), "111");
        assert_eq!(run(GateOp::or(1, 2, 3), "000"), "000");
        assert_eq!(run(GateOp::not(2), "010"), "000");
        assert_eq!(run(GateOp::copy(1, 2), "10"), "11");
    }

    #[test]
    fn and_or_copy_match_truth_tables() {
        // (input, AND out, OR out) over wires (1,2,3), from the published
        // truth tables.
        let table = [
            ("000", "000", "000"),
            ("001", "001", "001"),
            ("100", "100", "101"),
            ("101", "101", "100"),
            ("010", "010", "011"),
            ("011", "011", "010"),
            ("110", "111", "111"),
            ("111", "110", "110"),
        ];
        for (input, and_out, or_out) in table {
            let a = GateOp::and(1, 2, 3).gate_semantics(&bits(input)).unwrap();
            let o = GateOp::or(1, 2, 3).gate_semantics(&bits(input)).unwrap();
            assert_eq!(show(&a), and_out, "AND {input}");
            assert_eq!(show(&o), or_out, "OR {input}");
        }
        for (input, out) in [("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")] {
            let c = GateOp::copy(1, 2).gate_semantics(&bits(input)).unwrap();
            assert_eq!(show(&c), out);
        }
    }

    #[test]
    fn negated_controls_match_not_conjugation() {
        let neg = GateOp::or(1, 2, 3).with_negations(&[true, false]);
        let seq = GateSequence {
            width: 3,
            ops: vec![GateOp::not(1), GateOp::or(1, 2, 3), GateOp::not(1)],
        };
        for i in 0..8 {
            assert_eq!(neg.apply_to_index(i, 3).unwrap(), seq.apply_to_index(i).unwrap());
        }
    }

    #[test]
    fn semantics_errors() {
        assert!(matches!(
            GateOp::and(1, 2, 3).gate_semantics(&bits("11")),
            Err(GateError::WidthMismatch { .. })
        ));
        assert_eq!(
            GateOp::h_prefix(1).gate_semantics(&bits("0")),
            Err(GateError::NotClassical(GateKind::HBlock))
        );
    }

    #[test]
    fn validation() {
        assert_eq!(
            GateOp::and(1, 1, 2).validate(3),
            Err(GateError::DuplicateWire(1))
        );
        assert_eq!(
            GateOp::cn(1, 4).validate(3),
            Err(GateError::WireOutOfRange { wire: 4, width: 3 })
        );
        let bad = GateOp {
            kind: GateKind::Or,
            wires: vec![1, 2],
            negate_controls: vec![false],
        };
        assert!(matches!(bad.validate(3), Err(GateError::Arity { .. })));
        assert!(matches!(
            GateOp::or(1, 2, 3).with_negations(&[true]).validate(3),
            Err(GateError::NegArity { .. })
        ));
    }

    #[test]
    fn every_gate_is_unitary() {
        for op in [
            GateOp::and(1, 2, 3),
            GateOp::or(1, 2, 3),
            GateOp::or(3, 1, 2).with_negations(&[true, true]),
            GateOp::cn(1, 2),
            GateOp::ccn(1, 2, 3),
            GateOp::copy(2, 1).with_negations(&[true]),
            GateOp::not(1),
            GateOp::h_prefix(3),
        ] {
            assert!(op.unitary_check(), "{op:?}");
        }
    }

    #[test]
    fn json_shape() {
        let seq = GateSequence {
            width: 3,
            ops: vec![GateOp::h_prefix(2), GateOp::or(1, 2, 3).with_negations(&[true, false])],
        };
        let text = serde_json::to_string(&seq).unwrap();
        assert_eq!(
            text,
            r#"{"width":3,"ops":[{"kind":"H_BLOCK","wires":[1,2],"neg":[]},{"kind":"OR","wires":[1,2,3],"neg":[true,false]}]}"#
        );
        assert_eq!(serde_json::from_str::<GateSequence>(&text).unwrap(), seq);
    }

    #[test]
    fn fourier_examples() {
        let s = fourier_state(0, 2).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let s = fourier_state(1, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(-h, 0.0)).norm() < 1e-15);
        assert!(matches!(fourier_state(4, 2), Err(SimError::FourierIndex { .. })));
    }

    /// Direct evaluation of `2^{-N/2} exp(2πi t k / 2^N)`.
    fn fourier_oracle(t: u64, width: usize) -> Vec<Complex64> {
        let dim = 1u64 << width;
        let scale = (dim as f64).sqrt().recip();
        (0..dim)
            .map(|k| {
                let turns = ((t * k) % dim) as f64 / dim as f64;
                Complex64::from_polar(scale, 2.0 * PI * turns)
            })
            .collect()
    }

    #[test]
    fn fourier_matches_direct_formula_and_is_orthonormal() {
        for width in 1..=5 {
            let dim = 1u64 << width;
            let states: Vec<_> = (0..dim).map(|t| fourier_state(t, width).unwrap()).collect();
            for (t, s) in states.iter().enumerate() {
                let oracle = fourier_oracle(t as u64, width);
                for (a, b) in s.amplitudes().iter().zip(&oracle) {
                    assert!((a - b).norm() < 1e-12);
                }
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
            for i in 0..states.len() {
                for j in 0..states.len() {
                    let ip = states[i].inner(&states[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - Complex64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    fn arb_classical(width: usize) -> impl Strategy<Value = GateOp> {
        let wires = Just((1..=width).collect::<Vec<_>>()).prop_shuffle();
        (0..6usize, wires, proptest::collection::vec(any::<bool>(), 2)).prop_map(
            |(kind, w, neg)| {
                let op = match kind {
                    0 => GateOp::not(w[0]),
                    1 => GateOp::cn(w[0], w[1]),
                    2 => GateOp::ccn(w[0], w[1], w[2]),
                    3 => GateOp::and(w[0], w[1], w[2]),
                    4 => GateOp::or(w[0], w[1], w[2]),
                    _ => GateOp::copy(w[0], w[1]),
                };
                let n = op.kind.num_controls();
                op.with_negations(&neg[..n])
            },
        )
    }

    proptest! {
        #[test]
        fn classical_gates_are_involutive_permutations(op in arb_classical(4)) {
            let mut seen = [false; 16];
            for i in 0..16 {
                let j = op.apply_to_index(i, 4).unwrap();
                prop_assert!(!seen[j]);
                seen[j] = true;
                prop_assert_eq!(op.apply_to_index(j, 4).unwrap(), i);
            }
        }

        #[test]
        fn elementary_expansion_preserves_action(
            ops in proptest::collection::vec(arb_classical(5), 1..8)
        ) {
            let seq = GateSequence { width: 5, ops };
            let expanded = seq.expand_elementary();
            prop_assert!(expanded.ops.iter().all(|op| matches!(
                op.kind, GateKind::Not | GateKind::Cn | GateKind::Ccn
            )));
            for i in 0..32 {
                prop_assert_eq!(seq.apply_to_index(i).unwrap(), expanded.apply_to_index(i).unwrap());
            }
        }
    }

    #[test]
    fn embedding_identities_hold_on_every_placement() {
        let width = 4;
        for u in 1..=width {
            for v in 1..=width {
                for w in 1..=width {
                    if u == v || v == w || u == w {
                        continue;
                    }
                    let or_id = GateSequence {
                        width,
                        ops: vec![GateOp::cn(u, w), GateOp::cn(v, w), GateOp::ccn(u, v, w)],
                    };
                    for i in 0..1 << width {
                        let or = GateOp::or(u, v, w).apply_to_index(i, width).unwrap();
                        assert_eq!(or, or_id.apply_to_index(i).unwrap());
                        assert_eq!(
                            GateOp::and(u, v, w).apply_to_index(i, width).unwrap(),
                            GateOp::ccn(u, v, w).apply_to_index(i, width).unwrap()
                        );
                        assert_eq!(
                            GateOp::copy(u, v).apply_to_index(i, width).unwrap(),
                            GateOp::cn(u, v).apply_to_index(i, width).unwrap()
                        );
                    }
                }
            }
        }
    }
}
