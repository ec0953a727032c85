//! The transfer protocol end to end.
//!
//! 1. Every source prepares `F|0>` on its register `S'_i`.
//! 2. Nodes run the compiled coding steps in topological order: fresh
//!    ancillas, controlled adds with the local coefficients, transmission.
//! 3. Leftover edge registers are Fourier-measured; the outcomes define a
//!    linear phase `w^(b . a)` that the first target cancels with `Z(-b_k)`
//!    on its own leg of cat state `k`.
//! 4. Once the ordered targets and permutation are revealed, the unselected
//!    legs of each cat state are Fourier-measured and the source leg corrected,
//!    leaving one maximally entangled pair per source.
//! 5. Each input qudit is teleported over its pair.
//!
//! The receiving registers are relabelled as the output rather than
//! physically swapped into place.

mod demo;
mod exec;
mod program;
mod transcript;

pub use demo::{butterfly_walkthrough, LabeledSnapshot, Walkthrough, BUTTERFLY_STAGES};
pub use exec::{Execution, FunctionalTable, PhaseFunctional};
pub use program::{
    compile_program, edge_role, input_role, source_role, target_role, Block, Instruction,
    MeasureSchedule, QuantumProgram,
};
pub use transcript::{lines as transcript_lines, Entry, Message, Stage, Transcript};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{choose_field_size, FieldError};
use crate::netcode::{construct_linear_code, CodeError};
use crate::netgraph::{Feasibility, Network};
use crate::qsim::QsimError;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("multicast infeasible: target {target} has max-flow {flow} < {required}")]
    Infeasible {
        target: String,
        flow: u32,
        required: u32,
    },
    #[error("{sources} sources but only {targets} targets")]
    TooFewTargets { sources: usize, targets: usize },
    #[error("input state has {got} amplitudes, expected {expected}")]
    InputDimension { got: usize, expected: usize },
    #[error("invalid selection: {0}")]
    Selection(String),
    #[error("no register {0}")]
    MissingRegister(String),
    #[error("{0} called out of order")]
    OutOfOrder(&'static str),
    #[error("pair ({}, {}) is not maximally entangled (fidelity {fidelity})", .pair.0, .pair.1)]
    NotMaximallyEntangled {
        pair: (String, String),
        fidelity: f64,
    },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Ordered targets `T0` and a permutation: qudit `k` goes to `T0[perm[k]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSelection {
    pub targets: Vec<String>,
    /// 0-based permutation of `0..targets.len()`.
    pub perm: Vec<usize>,
}

impl TargetSelection {
    pub fn new(targets: Vec<String>, perm: Vec<usize>) -> Self {
        Self { targets, perm }
    }

    pub fn identity(targets: &[&str]) -> Self {
        Self {
            targets: targets.iter().map(|s| s.to_string()).collect(),
            perm: (0..targets.len()).collect(),
        }
    }

    /// Permutation given 1-based, as on the command line.
    pub fn one_based(targets: Vec<String>, perm: &[usize]) -> Result<Self, ProtocolError> {
        let perm = perm
            .iter()
            .map(|&x| {
                x.checked_sub(1)
                    .ok_or_else(|| ProtocolError::Selection("permutation is 1-based".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { targets, perm })
    }

    /// Every ordered `T0` of size `h` combined with every permutation of it.
    pub fn all(targets: &[String], h: usize) -> Vec<Self> {
        let ordered = arrangements(targets.len(), h);
        let perms = arrangements(h, h);
        let mut out = Vec::new();
        for t0 in &ordered {
            for perm in &perms {
                out.push(Self {
                    targets: t0.iter().map(|&i| targets[i].clone()).collect(),
                    perm: perm.clone(),
                });
            }
        }
        out
    }

    /// Receiving target name for each qudit, validated against `all_targets`.
    pub fn receivers(
        &self,
        all_targets: &[String],
        h: usize,
    ) -> Result<Vec<String>, ProtocolError> {
        if self.targets.len() != h {
            return Err(ProtocolError::Selection(format!(
                "need {h} targets, got {}",
                self.targets.len()
            )));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !all_targets.contains(t) {
                return Err(ProtocolError::Selection(format!("{t} is not a target")));
            }
            if self.targets[..i].contains(t) {
                return Err(ProtocolError::Selection(format!("{t} selected twice")));
            }
        }
        let mut seen = vec![false; h];
        if self.perm.len() != h
            || !self
                .perm
                .iter()
                .all(|&x| x < h && !std::mem::replace(&mut seen[x], true))
        {
            return Err(ProtocolError::Selection(format!(
                "{:?} is not a permutation of {h} elements",
                self.perm
            )));
        }
        Ok(self.perm.iter().map(|&x| self.targets[x].clone()).collect())
    }

    pub fn describe(&self) -> String {
        let perm: Vec<String> = self.perm.iter().map(|x| (x + 1).to_string()).collect();
        format!("T0=({}) pi=({})", self.targets.join(","), perm.join(","))
    }
}

/// All ordered selections of `k` distinct indices out of `n`.
fn arrangements(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for prefix in arrangements(n, k - 1) {
        for x in 0..n {
            if !prefix.contains(&x) {
                let mut next = prefix.clone();
                next.push(x);
                out.push(next);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Field size; defaults to the smallest prime at least the number of targets.
    pub field: Option<u64>,
    pub code_seed: u64,
    pub measurement_seed: u64,
    pub schedule: MeasureSchedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport<T: Real> {
    pub fidelity: T,
    pub transmissions: usize,
    pub field: u64,
    pub schedule: MeasureSchedule,
    pub peak_registers: usize,
    pub outputs: Vec<String>,
    pub phase: PhaseFunctional,
    pub transcript: Transcript,
}

/// Feasibility check, code construction, compilation, propagation, phase
/// fix, distillation and teleportation; reports the output fidelity.
pub fn run_full<T: Real>(
    net: &Network,
    input: &[Complex<T>],
    selection: &TargetSelection,
    options: &RunOptions,
) -> Result<RunReport<T>, ProtocolError> {
    if let Feasibility::Infeasible {
        target,
        flow,
        required,
        ..
    } = net.multicast_feasible()
    {
        return Err(ProtocolError::Infeasible {
            target,
            flow,
            required,
        });
    }
    let p = options.field.unwrap_or_else(|| choose_field_size(net));
    let code = construct_linear_code(&net.expand_capacities(), p, options.code_seed)?;
    let mut exec = Execution::new(code, input, options.schedule, options.measurement_seed)?;
    exec.run_propagation()?;
    exec.measure_and_fix()?;
    exec.distill_epr(selection)?;
    exec.teleport()?;
    let fidelity = exec.output_fidelity(input)?;
    Ok(RunReport {
        fidelity,
        transmissions: exec.transcript().count("transmit"),
        field: p,
        schedule: exec.program().schedule,
        peak_registers: exec.peak_registers(),
        outputs: exec.output_registers(),
        phase: exec.phase().clone(),
        transcript: exec.into_transcript(),
    })
}
