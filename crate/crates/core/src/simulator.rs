//! Dense state-vector engine.
//!
//! Amplitude index bit `N - q` holds qubit `q`, so qubit 1 is the most
//! significant bit and `|e_1⟩ = |0⟩⊗…⊗|0⟩⊗|1⟩` is index 1. Every gate touches
//! amplitude pairs `(i, i | mask)`; wide registers split those pairs across
//! rayon workers, and each amplitude is written by exactly one worker so the
//! result is bit-identical to the serial order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::compiler::QubitLayout;
use crate::gates::{GateError, GateKind, GateOp, GateSequence};

/// Widest register [`StateVector::zero`] will allocate (2^26 amplitudes, 1 GiB).
pub const DEFAULT_WIDTH_CAP: usize = 26;

/// Registers narrower than this run single-threaded.
const PARALLEL_WIDTH: usize = 14;
const MIN_PAR_LEN: usize = 1 << 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("register of {width} qubits exceeds the width cap {cap}")]
    WidthCap { width: usize, cap: usize },
    #[error("register must have at least one qubit")]
    EmptyRegister,
    #[error("circuit width {circuit} does not match state width {state}")]
    WidthMismatch { circuit: usize, state: usize },
    #[error("Fourier index {t} outside [0, 2^{width})")]
    FourierIndex { t: u64, width: usize },
    #[error("basis index {index} outside a {width}-qubit register")]
    BasisIndex { index: usize, width: usize },
    #[error("shot count must be positive")]
    NoShots,
    #[error(transparent)]
    Gate(#[from] GateError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `width` qubits, refusing widths above [`DEFAULT_WIDTH_CAP`].
    pub fn zero(width: usize) -> Result<Self, SimError> {
        Self::zero_with_cap(width, DEFAULT_WIDTH_CAP)
    }

    pub fn zero_with_cap(width: usize, cap: usize) -> Result<Self, SimError> {
        Self::basis_with_cap(width, 0, cap)
    }

    pub fn basis(width: usize, index: usize) -> Result<Self, SimError> {
        Self::basis_with_cap(width, index, DEFAULT_WIDTH_CAP)
    }

    pub fn basis_with_cap(width: usize, index: usize, cap: usize) -> Result<Self, SimError> {
        if width == 0 {
            return Err(SimError::EmptyRegister);
        }
        if width > cap || width >= usize::BITS as usize {
            return Err(SimError::WidthCap { width, cap });
        }
        if index >= 1 << width {
            return Err(SimError::BasisIndex { index, width });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << width];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { width, amps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Index of the single nonzero amplitude, if the state is a basis state.
    pub fn as_basis_index(&self) -> Option<usize> {
        let mut found = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.width - qubit)
    }

    pub fn apply_op(&mut self, op: &GateOp) -> Result<(), SimError> {
        op.validate(self.width)?;
        match op.kind {
            GateKind::HBlock => {
                for &q in &op.wires {
                    self.hadamard(q);
                }
            }
            _ => self.classical(op),
        }
        Ok(())
    }

    pub fn apply_sequence(&mut self, seq: &GateSequence) -> Result<(), SimError> {
        if seq.width != self.width {
            return Err(SimError::WidthMismatch {
                circuit: seq.width,
                state: self.width,
            });
        }
        seq.validate()?;
        for op in &seq.ops {
            self.apply_op(op)?;
        }
        Ok(())
    }

    /// Multiplies the `|1⟩` component of `qubit` by `phase`.
    pub fn apply_phase(&mut self, qubit: usize, phase: Complex64) -> Result<(), SimError> {
        if qubit == 0 || qubit > self.width {
            return Err(GateError::WireOutOfRange {
                wire: qubit,
                width: self.width,
            }
            .into());
        }
        let mask = self.mask(qubit);
        self.for_each_pair(mask, |_, _, hi| *hi *= phase);
        Ok(())
    }

    fn hadamard(&mut self, qubit: usize) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mask = self.mask(qubit);
        self.for_each_pair(mask, |_, lo, hi| {
            let (a, b) = (*lo, *hi);
            *lo = (a + b) * h;
            *hi = (a - b) * h;
        });
    }

    fn classical(&mut self, op: &GateOp) {
        let width = self.width;
        let mask = self.mask(op.target().expect("classical gate has a target"));
        self.for_each_pair(mask, |i, lo, hi| {
            if op.fires(i, width) {
                std::mem::swap(lo, hi);
            }
        });
    }

    /// Calls `f(i, amp[i], amp[i | mask])` for every index `i` with the mask
    /// bit clear.
    fn for_each_pair<F>(&mut self, mask: usize, f: F)
    where
        F: Fn(usize, &mut Complex64, &mut Complex64) + Sync + Send,
    {
        let block = mask << 1;
        let per_block = |(b, chunk): (usize, &mut [Complex64])| {
            let (lo, hi) = chunk.split_at_mut(mask);
            let base = b * block;
            for (j, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(base + j, l, h);
            }
        };
        if self.width < PARALLEL_WIDTH {
            self.amps.chunks_mut(block).enumerate().for_each(per_block);
        } else if mask >= MIN_PAR_LEN {
            // Few large blocks: split inside each block.
            for (b, chunk) in self.amps.chunks_mut(block).enumerate() {
                let (lo, hi) = chunk.split_at_mut(mask);
                let base = b * block;
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .enumerate()
                    .with_min_len(MIN_PAR_LEN)
                    .for_each(|(j, (l, h))| f(base + j, l, h));
            }
        } else {
            self.amps
                .par_chunks_mut(block)
                .enumerate()
                .with_min_len((MIN_PAR_LEN / block).max(1))
                .for_each(per_block);
        }
    }

    /// `‖P_last |ψ⟩‖²`: total weight on basis states whose last qubit is 1.
    pub fn last_qubit_probability(&self) -> f64 {
        self.amps.iter().skip(1).step_by(2).map(|a| a.norm_sqr()).sum()
    }
}

/// `|v0⟩ = |0^n, 0^μ, 0⟩` for a compiled layout.
pub fn init_state(layout: &QubitLayout) -> Result<StateVector, SimError> {
    init_state_with_cap(layout, DEFAULT_WIDTH_CAP)
}

pub fn init_state_with_cap(layout: &QubitLayout, cap: usize) -> Result<StateVector, SimError> {
    StateVector::zero_with_cap(layout.total, cap)
}

pub fn apply(mut state: StateVector, seq: &GateSequence) -> Result<StateVector, SimError> {
    state.apply_sequence(seq)?;
    Ok(state)
}

fn check_layout(state: &StateVector, layout: &QubitLayout) -> Result<(), SimError> {
    if state.width != layout.total {
        return Err(SimError::WidthMismatch {
            circuit: layout.total,
            state: state.width,
        });
    }
    Ok(())
}

/// Probability that the result qubit reads 1; equals `r / 2^n` on the
/// output of the compiled circuit.
pub fn success_probability(state: &StateVector, layout: &QubitLayout) -> Result<f64, SimError> {
    check_layout(state, layout)?;
    Ok(state.last_qubit_probability())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// `P ψ / ‖P ψ‖`, absent when the probability is zero.
    pub post_state: Option<StateVector>,
}

/// Projects onto "result qubit = 1" and renormalizes.
pub fn post_measure(state: &StateVector, layout: &QubitLayout) -> Result<MeasurementOutcome, SimError> {
    let probability = success_probability(state, layout)?;
    if probability == 0.0 {
        return Ok(MeasurementOutcome {
            probability,
            post_state: None,
        });
    }
    let scale = probability.sqrt().recip();
    let amps = state
        .amps
        .iter()
        .enumerate()
        .map(|(i, &a)| if i & 1 == 1 { a * scale } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok(MeasurementOutcome {
        probability,
        post_state: Some(StateVector {
            width: state.width,
            amps,
        }),
    })
}

/// Sampling estimate of `q`: `sqrt(successes / shots)` over `shots`
/// Bernoulli draws with the exact success probability, seeded.
pub fn estimate_q(state: &StateVector, layout: &QubitLayout, shots: u64, seed: u64) -> Result<f64, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    let p = success_probability(state, layout)?.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..shots).filter(|_| rng.random_bool(p)).count();
    Ok((hits as f64 / shots as f64).sqrt())
}
