//! End-to-end solve: parse, compile, simulate, read `q²`, decide.

use crate::amplifier::{self, AmplifierError, Decision, LogisticParams};
use crate::cnf::{CnfError, CnfInstance};
use crate::compiler::{compile, CompileError};
use crate::lindblad::{self, Classification, DissipativeParams, Discrimination, HamiltonianParams, LindbladError};
use crate::simulator::{self, SimError, DEFAULT_WIDTH_CAP};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use thiserror::Error;

pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Amplifier(#[from] AmplifierError),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Chaos,
    Lindblad,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub engine: Engine,
    pub a: f64,
    /// Defaults to `2n`.
    pub steps: Option<usize>,
    pub gamma: Complex64,
    pub energies: HamiltonianParams,
    /// Defaults to the larger of `10 / Re γ` and two Hamiltonian periods.
    pub t_final: Option<f64>,
    pub dt: f64,
    /// With `Some(shots)`, `q²` is estimated by seeded sampling instead of read
    /// exactly from the state vector.
    pub shots: Option<u64>,
    pub seed: u64,
    pub width_cap: usize,
    pub timings: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            engine: Engine::Chaos,
            a: amplifier::DEFAULT_A,
            steps: None,
            gamma: Complex64::new(1.0, 0.0),
            energies: HamiltonianParams::default(),
            t_final: None,
            dt: lindblad::DEFAULT_DT,
            shots: None,
            seed: 0,
            width_cap: DEFAULT_WIDTH_CAP,
            timings: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Sat,
    Unsat,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub m: usize,
    pub mu: usize,
    pub total_qubits: usize,
    pub gate_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub r: u64,
    pub assignments: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosVerdict {
    pub decision: Decision,
    pub first_crossing: Option<usize>,
    pub a: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LindbladVerdict {
    pub decision: Decision,
    pub discrimination: Discrimination,
    pub classification: Classification,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub status: Status,
    pub instance: InstanceSummary,
    pub oracle: OracleSummary,
    pub success_probability: f64,
    /// The `q²` handed to the engines.
    pub q_squared: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chaos: Option<ChaosVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<LindbladVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<&'static str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl PipelineReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Sat => EXIT_SAT,
            Status::Unsat => EXIT_UNSAT,
            Status::Failed => EXIT_DISAGREEMENT,
        }
    }
}

struct Stopwatch {
    on: bool,
    last: Instant,
    laps: BTreeMap<&'static str, f64>,
}

impl Stopwatch {
    fn lap(&mut self, stage: &'static str) {
        if self.on {
            let now = Instant::now();
            self.laps.insert(stage, (now - self.last).as_secs_f64());
            self.last = now;
        }
    }
}

pub fn solve(instance: &CnfInstance, opts: &SolveOptions) -> Result<PipelineReport, PipelineError> {
    let mut clock = Stopwatch {
        on: opts.timings,
        last: Instant::now(),
        laps: BTreeMap::new(),
    };
    let n = instance.num_vars();
    let r = instance.count_satisfying()?;
    clock.lap("oracle");

    let circuit = compile(instance)?;
    let layout = &circuit.layout;
    clock.lap("compile");

    let state = simulator::init_state_with_cap(layout, opts.width_cap)?;
    let state = simulator::apply(state, &circuit.sequence)?;
    let p = simulator::success_probability(&state, layout)?;
    let q_squared = match opts.shots {
        Some(shots) => simulator::estimate_q(&state, layout, shots, opts.seed)?.powi(2),
        None => p,
    };
    clock.lap("simulate");

    let truth = if r > 0 { Decision::Sat } else { Decision::Unsat };
    let mut disagreements = Vec::new();

    let chaos = if opts.engine != Engine::Lindblad {
        let steps = opts.steps.unwrap_or(2 * n);
        let params = LogisticParams::new(opts.a, steps, amplifier::DEFAULT_THRESHOLD)?;
        let (decision, traj) = amplifier::decide_sat(q_squared, &params)?;
        if decision != truth {
            disagreements.push(format!("chaos engine says {decision:?}, oracle r = {r}"));
        }
        clock.lap("chaos");
        Some(ChaosVerdict {
            decision,
            first_crossing: traj.first_crossing,
            a: opts.a,
            steps,
        })
    } else {
        None
    };

    let lindblad = if opts.engine != Engine::Chaos {
        let gamma = DissipativeParams::new(opts.gamma)?;
        let t_final = opts.t_final.unwrap_or_else(|| lindblad::default_t_final(&gamma, &opts.energies));
        let run = lindblad::discriminate(q_squared.sqrt(), &gamma, &opts.energies, t_final, opts.dt)?;
        let decision = match run.decision {
            Discrimination::QNonzero => Decision::Sat,
            Discrimination::QZero => Decision::Unsat,
        };
        if decision != truth {
            disagreements.push(format!("lindblad engine says {decision:?}, oracle r = {r}"));
        }
        clock.lap("lindblad");
        Some(LindbladVerdict {
            decision,
            discrimination: run.decision,
            classification: run.classification,
            t_final,
        })
    } else {
        None
    };

    let (status, diagnostic) = if disagreements.is_empty() {
        let status = if truth == Decision::Sat { Status::Sat } else { Status::Unsat };
        (status, None)
    } else {
        (
            Status::Failed,
            Some(format!("{}; q^2 = {q_squared:e}, exact p = {p:e}", disagreements.join("; "))),
        )
    };

    Ok(PipelineReport {
        status,
        instance: InstanceSummary {
            n,
            m: instance.num_clauses(),
            mu: layout.mu,
            total_qubits: layout.total,
            gate_count: circuit.sequence.ops.len(),
        },
        oracle: OracleSummary {
            r,
            assignments: 1u64 << n,
        },
        success_probability: p,
        q_squared,
        shots: opts.shots,
        chaos,
        lindblad,
        timings: opts.timings.then_some(clock.laps),
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, clauses: &[Vec<i64>]) -> CnfInstance {
        CnfInstance::from_signed(n, clauses).unwrap()
    }

    #[test]
    fn satisfiable_two_variable_instance() {
        let report = solve(&inst(2, &[vec![1, 2]]), &SolveOptions::default()).unwrap();
        assert_eq!(report.status, Status::Sat);
        assert_eq!(report.exit_code(), EXIT_SAT);
        assert!((report.success_probability - 0.75).abs() < 1e-12);
        assert_eq!(report.oracle.r, 3);
    }

    #[test]
    fn contradiction_is_unsat() {
        let report = solve(&inst(1, &[vec![1], vec![-1]]), &SolveOptions::default()).unwrap();
        assert_eq!(report.status, Status::Unsat);
        assert_eq!(report.exit_code(), EXIT_UNSAT);
        assert_eq!(report.success_probability, 0.0);
    }

    #[test]
    fn both_engines_agree_with_the_oracle() {
        let opts = SolveOptions {
            engine: Engine::Both,
            ..SolveOptions::default()
        };
        let sat = solve(&inst(3, &[vec![1, 2], vec![-1, 3], vec![-2, -3]]), &opts).unwrap();
        assert_eq!(sat.status, Status::Sat);
        assert_eq!(sat.lindblad.unwrap().classification, Classification::Damped);
        let unsat = solve(&inst(2, &[vec![1], vec![-1, 2], vec![-2]]), &opts).unwrap();
        assert_eq!(unsat.status, Status::Unsat);
        assert_eq!(unsat.lindblad.unwrap().classification, Classification::Oscillatory);
    }

    #[test]
    fn starved_amplifier_is_reported_as_failure() {
        let opts = SolveOptions {
            steps: Some(0),
            ..SolveOptions::default()
        };
        let report = solve(&inst(4, &[vec![1], vec![2], vec![3], vec![4]]), &opts).unwrap();
        assert_eq!(report.status, Status::Failed);
        assert_eq!(report.exit_code(), EXIT_DISAGREEMENT);
        assert!(report.diagnostic.unwrap().contains("oracle r = 1"));
    }

    #[test]
    fn width_cap_is_enforced() {
        let opts = SolveOptions {
            width_cap: 3,
            ..SolveOptions::default()
        };
        assert!(matches!(
            solve(&inst(2, &[vec![1, 2]]), &opts),
            Err(PipelineError::Sim(SimError::WidthCap { .. }))
        ));
    }

    #[test]
    fn sampled_weight_is_seeded() {
        let opts = SolveOptions {
            shots: Some(1000),
            seed: 7,
            ..SolveOptions::default()
        };
        let a = solve(&inst(2, &[vec![1, 2]]), &opts).unwrap();
        let b = solve(&inst(2, &[vec![1, 2]]), &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.timings.is_none());
    }
}
