use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::program::{
    compile_program, input_role, source_role, target_role, Instruction, MeasureSchedule,
    QuantumProgram,
};
use super::transcript::{Message, Stage, Transcript};
use super::{ProtocolError, TargetSelection};
use crate::gf::PrimeField;
use crate::netcode::LinearCode;
use crate::qsim::{Basis, QsimError, RegisterLabel, Snapshot, StateVector};
use crate::scalar::Real;

/// Linear functional of each register's basis value in terms of the source
/// symbols `a`, keyed by register role.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalTable {
    entries: BTreeMap<String, Vec<u64>>,
}

impl FunctionalTable {
    pub fn get(&self, role: &str) -> Option<&[u64]> {
        self.entries.get(role).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[u64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    fn set(&mut self, role: &str, f: Vec<u64>) {
        self.entries.insert(role.to_string(), f);
    }

    fn add_scaled(&mut self, field: PrimeField, target: &str, gamma: u64, control: &str) {
        let f = self.entries[control].clone();
        field.axpy(
            self.entries.get_mut(target).expect("target registered"),
            gamma,
            &f,
        );
    }
}

/// Accumulated phase `w^(b . a)` and the outcomes that produced it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseFunctional {
    pub b: Vec<u64>,
    pub outcomes: Vec<(String, u64)>,
}

impl PhaseFunctional {
    fn new(h: usize) -> Self {
        Self {
            b: vec![0; h],
            outcomes: Vec::new(),
        }
    }

    /// Outcome `y` on a register with functional `f` contributes `w^(-y f . a)`.
    fn record(&mut self, field: PrimeField, role: &str, y: u64, f: &[u64]) {
        self.b
            .iter_mut()
            .zip(f)
            .for_each(|(b, &fk)| *b = field.sub(*b, field.mul(y, fk)));
        self.outcomes.push((role.to_string(), y));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Progress {
    Propagating,
    Propagated,
    Fixed,
    Distilled,
    Teleported,
}

/// One run of the protocol: owns the state, the functional table, the
/// transcript and the source of measurement outcomes.
///
/// Outcomes are sampled from a seeded ChaCha8 stream unless a forced value is
/// registered for the measured role.
#[derive(Debug, Clone)]
pub struct Execution<T: Real> {
    code: LinearCode,
    field: PrimeField,
    program: QuantumProgram,
    state: StateVector<T>,
    table: FunctionalTable,
    phase: PhaseFunctional,
    transcript: Transcript,
    rng: ChaCha8Rng,
    forced: HashMap<String, u64>,
    cursor: (usize, usize),
    progress: Progress,
    receivers: Vec<String>,
    peak: usize,
}

impl<T: Real> Execution<T> {
    /// `input` is the joint state of the `|S|` source qudits, source 1 most significant.
    pub fn new(
        code: LinearCode,
        input: &[Complex<T>],
        schedule: MeasureSchedule,
        measurement_seed: u64,
    ) -> Result<Self, ProtocolError> {
        let g = code.network().network();
        let h = code.rate();
        let p = code.modulus() as usize;
        if g.targets().len() < h {
            return Err(ProtocolError::TooFewTargets {
                sources: h,
                targets: g.targets().len(),
            });
        }
        let expected = p.pow(h as u32);
        if input.len() != expected {
            return Err(ProtocolError::InputDimension {
                got: input.len(),
                expected,
            });
        }
        let labels = g
            .sources()
            .iter()
            .enumerate()
            .map(|(i, &s)| RegisterLabel::new(g.name(s), input_role(i)))
            .collect();
        let state = StateVector::from_amplitudes(p, input.to_vec(), labels)?;
        let program = compile_program(&code, schedule);
        Ok(Self {
            field: code.field(),
            program,
            peak: state.num_registers(),
            state,
            table: FunctionalTable::default(),
            phase: PhaseFunctional::new(h),
            transcript: Transcript::default(),
            rng: ChaCha8Rng::seed_from_u64(measurement_seed),
            forced: HashMap::new(),
            cursor: (0, 0),
            progress: Progress::Propagating,
            receivers: Vec::new(),
            code,
        })
    }

    /// Fixes the outcome of every later measurement of the given roles.
    pub fn with_forced_outcomes(mut self, forced: HashMap<String, u64>) -> Self {
        self.forced = forced;
        self
    }

    /// Caps the live register count of the state.
    pub fn with_register_budget(mut self, max: usize) -> Result<Self, ProtocolError> {
        self.state = self.state.with_max_registers(max)?;
        Ok(self)
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn program(&self) -> &QuantumProgram {
        &self.program
    }

    pub fn state(&self) -> &StateVector<T> {
        &self.state
    }

    pub fn table(&self) -> &FunctionalTable {
        &self.table
    }

    pub fn phase(&self) -> &PhaseFunctional {
        &self.phase
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Most registers alive at once so far.
    pub fn peak_registers(&self) -> usize {
        self.peak
    }

    pub fn snapshot_of(&self, roles: &[&str]) -> Result<Snapshot, ProtocolError> {
        for role in roles {
            self.register(role)?;
        }
        Ok(self.state.snapshot_of(roles)?)
    }

    fn rate(&self) -> usize {
        self.code.rate()
    }

    fn register(&self, role: &str) -> Result<usize, ProtocolError> {
        self.state
            .find(role)
            .ok_or_else(|| ProtocolError::MissingRegister(role.to_string()))
    }

    fn expect(&self, progress: Progress, operation: &'static str) -> Result<(), ProtocolError> {
        if self.progress == progress {
            Ok(())
        } else {
            Err(ProtocolError::OutOfOrder(operation))
        }
    }

    fn add_register(&mut self, node: &str, role: &str) -> Result<usize, ProtocolError> {
        let r = self.state.add_register(node, role)?;
        self.peak = self.peak.max(self.state.num_registers());
        Ok(r)
    }

    /// Executes the next program instruction; returns `false` once the program is exhausted.
    pub fn step_instruction(&mut self) -> Result<bool, ProtocolError> {
        self.expect(Progress::Propagating, "step_instruction")?;
        let (b, i) = self.cursor;
        let Some(block) = self.program.blocks.get(b) else {
            self.progress = Progress::Propagated;
            return Ok(false);
        };
        let Some(ins) = block.instructions.get(i).cloned() else {
            self.cursor = (b + 1, 0);
            return self.step_instruction();
        };
        self.cursor = (b, i + 1);
        self.execute(&ins)?;
        Ok(true)
    }

    /// Executes the rest of the current block and returns its label.
    pub fn run_block(&mut self) -> Result<Option<String>, ProtocolError> {
        if self.progress == Progress::Propagated {
            return Ok(None);
        }
        self.expect(Progress::Propagating, "run_block")?;
        let (b, i) = self.cursor;
        let Some(block) = self.program.blocks.get(b) else {
            self.progress = Progress::Propagated;
            return Ok(None);
        };
        let label = block.label.clone();
        let rest: Vec<Instruction> = block.instructions[i..].to_vec();
        for ins in &rest {
            self.execute(ins)?;
        }
        self.cursor = (b + 1, 0);
        if self.cursor.0 == self.program.blocks.len() {
            self.progress = Progress::Propagated;
        }
        Ok(Some(label))
    }

    /// Steps 1 and 2: preparation and node-by-node propagation.
    pub fn run_propagation(&mut self) -> Result<(), ProtocolError> {
        while self.progress == Progress::Propagating {
            self.run_block()?;
        }
        Ok(())
    }

    fn execute(&mut self, ins: &Instruction) -> Result<(), ProtocolError> {
        match ins {
            Instruction::PreparePlus { node, register } => {
                let r = self.add_register(node, register)?;
                self.state.apply_fourier(r, false)?;
                let i = self
                    .program
                    .sources
                    .iter()
                    .position(|s| s == node)
                    .expect("prepare at a source");
                self.table
                    .set(register, self.field.unit_vector(self.rate(), i));
                self.transcript
                    .push(Stage::Prepare, node, "prepare-plus", vec![register.clone()]);
            }
            Instruction::Allocate { node, register } => {
                self.add_register(node, register)?;
                self.table.set(register, vec![0; self.rate()]);
                self.transcript
                    .push(Stage::Propagate, node, "allocate", vec![register.clone()]);
            }
            Instruction::ControlledAdd {
                node,
                control,
                target,
                gamma,
            } => {
                let (c, t) = (self.register(control)?, self.register(target)?);
                self.state.apply_controlled_add(c, t, *gamma)?;
                self.table.add_scaled(self.field, target, *gamma, control);
                self.transcript
                    .push(
                        Stage::Propagate,
                        node,
                        "controlled-add",
                        vec![control.clone(), target.clone()],
                    )
                    .value = Some(*gamma);
            }
            Instruction::Transmit { register, from, to } => {
                let r = self.register(register)?;
                self.state.set_owner(r, to.clone())?;
                self.transcript
                    .push(Stage::Propagate, from, "transmit", vec![register.clone()])
                    .message = Some(Message {
                    from: from.clone(),
                    to: to.clone(),
                    payload: format!("qudit {register}"),
                });
            }
            Instruction::FourierMeasure { node, register } => {
                self.measure_superfluous(node, register)?
            }
        }
        Ok(())
    }

    fn draw(&mut self, role: &str, basis: Basis) -> Result<u64, ProtocolError> {
        let r = self.register(role)?;
        let outcome = match self.forced.get(role) {
            Some(&value) => self.state.measure_forced(r, basis, value)?,
            None => self.state.measure(r, basis, &mut self.rng)?,
        };
        Ok(outcome.value)
    }

    fn discard(&mut self, stage: Stage, node: &str, role: &str) -> Result<(), ProtocolError> {
        let r = self.register(role)?;
        self.state.discard(r)?;
        self.transcript
            .push(stage, node, "discard", vec![role.to_string()]);
        Ok(())
    }

    /// Fourier-measures a leftover register, folds the outcome into the phase
    /// functional, reports it to the first target and discards the register.
    fn measure_superfluous(&mut self, node: &str, role: &str) -> Result<(), ProtocolError> {
        let y = self.draw(role, Basis::Fourier)?;
        let f = self
            .table
            .get(role)
            .expect("measured registers are tracked")
            .to_vec();
        self.phase.record(self.field, role, y, &f);
        let first_target = self.program.targets[0].clone();
        let entry = self.transcript.push(
            Stage::Measure,
            node,
            "fourier-measure",
            vec![role.to_string()],
        );
        entry.outcome = Some(y);
        entry.message = Some(Message {
            from: node.to_string(),
            to: first_target,
            payload: format!("{role}={y}"),
        });
        self.discard(Stage::Measure, node, role)
    }

    /// Edge registers still alive, in state order.
    pub fn pending_measurements(&self) -> Vec<String> {
        self.state
            .labels()
            .iter()
            .filter(|l| l.role.starts_with("R("))
            .map(|l| l.role.clone())
            .collect()
    }

    /// Measures the given leftover registers in the given order.
    pub fn measure_registers(&mut self, roles: &[String]) -> Result<(), ProtocolError> {
        if self.progress != Progress::Propagated {
            return Err(ProtocolError::OutOfOrder("measure_registers"));
        }
        for role in roles {
            let owner = self.state.label(self.register(role)?)?.owner.clone();
            self.measure_superfluous(&owner, role)?;
        }
        Ok(())
    }

    /// First target applies `Z(-b_k)` on its leg of cat state `k`.
    pub fn fix_phases(&mut self) -> Result<&PhaseFunctional, ProtocolError> {
        self.expect(Progress::Propagated, "fix_phases")?;
        if let Some(role) = self.pending_measurements().first() {
            return Err(ProtocolError::MissingRegister(format!(
                "{role} still unmeasured"
            )));
        }
        let t1 = self.program.targets[0].clone();
        for k in 0..self.rate() {
            let role = target_role(&t1, k);
            let exponent = self.field.neg(self.phase.b[k]);
            self.state.apply_phase(self.register(&role)?, exponent)?;
            self.transcript
                .push(Stage::Correct, &t1, "phase-correct", vec![role])
                .value = Some(exponent);
        }
        self.progress = Progress::Fixed;
        Ok(&self.phase)
    }

    /// Step 3: measure every leftover register and undo the phase.
    pub fn measure_and_fix(&mut self) -> Result<&PhaseFunctional, ProtocolError> {
        if self.progress == Progress::Propagating {
            return Err(ProtocolError::OutOfOrder("measure_and_fix"));
        }
        let pending = self.pending_measurements();
        self.measure_registers(&pending)?;
        self.fix_phases()
    }

    /// Roles of cat state `k`: the source leg, then one leg per target in target order.
    pub fn cat_registers(&self, k: usize) -> Vec<String> {
        std::iter::once(source_role(k))
            .chain(self.program.targets.iter().map(|t| target_role(t, k)))
            .collect()
    }

    /// Reduces cat state `k` to an EPR pair between `S'_k` and the target
    /// chosen for qudit `k` by the selection.
    pub fn distill_epr(&mut self, selection: &TargetSelection) -> Result<(), ProtocolError> {
        self.expect(Progress::Fixed, "distill_epr")?;
        let receivers = selection.receivers(&self.program.targets, self.rate())?;
        let entry = self
            .transcript
            .push(Stage::Select, "", "select", receivers.clone());
        entry.message = Some(Message {
            from: "environment".into(),
            to: "all".into(),
            payload: selection.describe(),
        });
        for (k, receiver) in receivers.iter().enumerate() {
            let source = self.program.sources[k].clone();
            let mut total = 0;
            for t in self.program.targets.clone() {
                if &t == receiver {
                    continue;
                }
                let role = target_role(&t, k);
                let y = self.draw(&role, Basis::Fourier)?;
                total = self.field.add(total, y);
                let entry =
                    self.transcript
                        .push(Stage::Distill, &t, "fourier-measure", vec![role.clone()]);
                entry.outcome = Some(y);
                entry.message = Some(Message {
                    from: t.clone(),
                    to: source.clone(),
                    payload: format!("{role}={y}"),
                });
                self.discard(Stage::Distill, &t, &role)?;
            }
            let role = source_role(k);
            self.state.apply_phase(self.register(&role)?, total)?;
            self.transcript
                .push(Stage::Distill, &source, "phase-correct", vec![role])
                .value = Some(total);
        }
        self.receivers = receivers;
        self.progress = Progress::Distilled;
        Ok(())
    }

    /// `(S'_k, receiving register)` for every qudit, once distilled.
    pub fn epr_pairs(&self) -> Vec<(String, String)> {
        self.receivers
            .iter()
            .enumerate()
            .map(|(k, t)| (source_role(k), target_role(t, k)))
            .collect()
    }

    /// Generalized teleportation of each input qudit over its EPR pair.
    ///
    /// The sender subtracts its qudit from its EPR half, reads that half in
    /// the computational basis (`m`) and its qudit in the Fourier basis (`y`);
    /// the receiver applies `X(-m)` then `Z(y)`.
    pub fn teleport(&mut self) -> Result<(), ProtocolError> {
        self.expect(Progress::Distilled, "teleport")?;
        let p = self.field.modulus() as usize;
        let epr: Vec<Complex<T>> = (0..p * p)
            .map(|i| {
                let v = if i / p == i % p {
                    T::one() / T::of(p as f64).sqrt()
                } else {
                    T::zero()
                };
                Complex::new(v, T::zero())
            })
            .collect();
        for (k, (half, out)) in self.epr_pairs().into_iter().enumerate() {
            let pair = [self.register(&half)?, self.register(&out)?];
            let fidelity = match self.state.fidelity(&epr, &pair) {
                Ok(f) => f,
                Err(QsimError::Entangled(_)) => T::zero(),
                Err(e) => return Err(e.into()),
            };
            if fidelity < T::one() - T::tolerance().sqrt() {
                return Err(ProtocolError::NotMaximallyEntangled {
                    pair: (half, out),
                    fidelity: fidelity.to_f64().unwrap_or(0.0),
                });
            }
            let source = self.program.sources[k].clone();
            let receiver = self.receivers[k].clone();
            let input = input_role(k);
            let minus_one = self.field.neg(1);
            self.state.apply_controlled_add(
                self.register(&input)?,
                self.register(&half)?,
                minus_one,
            )?;
            self.transcript
                .push(
                    Stage::Teleport,
                    &source,
                    "controlled-add",
                    vec![input.clone(), half.clone()],
                )
                .value = Some(minus_one);
            let m = self.draw(&half, Basis::Computational)?;
            self.transcript
                .push(Stage::Teleport, &source, "measure", vec![half.clone()])
                .outcome = Some(m);
            let y = self.draw(&input, Basis::Fourier)?;
            let entry = self.transcript.push(
                Stage::Teleport,
                &source,
                "fourier-measure",
                vec![input.clone()],
            );
            entry.outcome = Some(y);
            entry.message = Some(Message {
                from: source.clone(),
                to: receiver.clone(),
                payload: format!("m={m},y={y}"),
            });
            self.discard(Stage::Teleport, &source, &half)?;
            self.discard(Stage::Teleport, &source, &input)?;
            let shift = self.field.neg(m);
            self.state.apply_shift(self.register(&out)?, shift)?;
            self.transcript
                .push(Stage::Teleport, &receiver, "shift", vec![out.clone()])
                .value = Some(shift);
            self.state.apply_phase(self.register(&out)?, y)?;
            self.transcript
                .push(Stage::Teleport, &receiver, "phase-correct", vec![out])
                .value = Some(y);
        }
        self.transcript
            .push(Stage::Output, "", "relabel", self.output_registers());
        self.progress = Progress::Teleported;
        Ok(())
    }

    /// Registers holding the transferred state, ordered by source qudit.
    pub fn output_registers(&self) -> Vec<String> {
        self.epr_pairs().into_iter().map(|(_, out)| out).collect()
    }

    /// Fidelity of the output registers (ordered by qudit) against `reference`.
    pub fn output_fidelity(&self, reference: &[Complex<T>]) -> Result<T, ProtocolError> {
        self.expect(Progress::Teleported, "output_fidelity")?;
        let regs = self
            .output_registers()
            .iter()
            .map(|role| self.register(role))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.state.fidelity(reference, &regs)?)
    }

    /// Checks the functional table against the state: on every basis state in
    /// the support, each tracked register holds its functional evaluated at
    /// the symbols found in the `S'` registers.
    pub fn table_consistent(&self) -> bool {
        let p = self.state.dim();
        let n = self.state.num_registers();
        let h = self.rate();
        let labels = self.state.labels();
        let sources: Vec<Option<usize>> =
            (0..h).map(|i| self.state.find(&source_role(i))).collect();
        let tracked: Vec<(usize, &[u64])> = (0..n)
            .filter_map(|r| self.table.get(&labels[r].role).map(|f| (r, f)))
            .collect();
        let cutoff = T::tolerance();
        self.state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > cutoff)
            .all(|(idx, _)| {
                let digit = |r: usize| ((idx / p.pow((n - 1 - r) as u32)) % p) as u64;
                let a: Vec<Option<u64>> = sources.iter().map(|s| s.map(digit)).collect();
                tracked.iter().all(|&(r, f)| {
                    if f.iter().zip(&a).any(|(&fk, ak)| fk != 0 && ak.is_none()) {
                        return true;
                    }
                    let expected = f.iter().zip(&a).fold(0, |acc, (&fk, ak)| {
                        self.field.add(acc, self.field.mul(fk, ak.unwrap_or(0)))
                    });
                    digit(r) == expected
                })
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcode::construct_linear_code;
    use crate::oracle::fixtures;
    use crate::qsim::haar_random_seeded;

    #[test]
    fn teleport_refuses_a_broken_pair() {
        let net = fixtures::get("butterfly").unwrap().network();
        let code = construct_linear_code(&net.expand_capacities(), 2, 0).unwrap();
        let mut exec = Execution::<f64>::new(
            code,
            &haar_random_seeded(4, 0),
            MeasureSchedule::Deferred,
            0,
        )
        .unwrap();
        exec.run_propagation().unwrap();
        exec.measure_and_fix().unwrap();
        exec.distill_epr(&TargetSelection::identity(&["t1", "t2"]))
            .unwrap();
        let r = exec.register("T(t2,2)").unwrap();
        exec.state.apply_shift(r, 1).unwrap();
        match exec.teleport() {
            Err(ProtocolError::NotMaximallyEntangled { pair, fidelity }) => {
                assert_eq!(pair, ("S'2".to_string(), "T(t2,2)".to_string()));
                assert!(fidelity < 1e-9);
            }
            other => panic!("expected a refusal, got {other:?}"),
        }
    }
}
