//! Dense state-vector simulator for registers of prime dimension `p`.
//!
//! Register 0 is the most significant digit of the basis index, so
//! `|x_0 x_1 ... x_{n-1}>` sits at `sum_k x_k p^(n-1-k)`. Registers are
//! positional: discarding one shifts the indices of those after it, and callers
//! that need stable handles look registers up by role.
//!
//! Gates are the prime-dimensional Clifford generators: `X(c)|x> = |x+c>`,
//! `Z(b)|x> = w^(bx)|x>`, `F|x> = p^(-1/2) sum_y w^(xy)|y>` and
//! `CADD(g)|x>|y> = |x>|y+gx>` with `w = exp(2 pi i / p)`. For `p = 2` these
//! are X, Z, H and CNOT.
//!
//! A Fourier-basis measurement applies `F^dagger`, reads the register in the
//! computational basis and rotates the collapsed register back with `F`, so an
//! outcome `y` leaves the register in `F|y>` and multiplies the remaining
//! amplitudes of `sum_x a_x |x>` by `w^(-y x)`.

mod snapshot;

pub use snapshot::Snapshot;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::is_prime;
use crate::scalar::Real;

/// Default amplitude budget: 2^24 complex amplitudes.
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("register dimension {0} is not prime")]
    NotPrime(usize),
    #[error("state would need {needed} registers, budget is {max}")]
    BudgetExceeded { needed: usize, max: usize },
    #[error("register {0} does not exist")]
    InvalidRegister(usize),
    #[error("control and target are both register {0}")]
    SameRegister(usize),
    #[error("register list repeats register {0}")]
    DuplicateRegister(usize),
    #[error("amplitude vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("registers {0:?} are entangled with the rest of the state")]
    Entangled(Vec<usize>),
    #[error("outcome {value} on register {register} has probability {probability:e}")]
    ImpossibleOutcome {
        register: usize,
        value: u64,
        probability: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLabel {
    pub owner: String,
    pub role: String,
}

impl RegisterLabel {
    pub fn new(owner: impl Into<String>, role: impl Into<String>) -> Self {
        Self {
            owner: owner.into(),
            role: role.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub register: usize,
    pub basis: Basis,
    pub value: u64,
}

/// `exp(2 pi i k / p)` for `k in 0..p`, exact at quarter turns.
pub fn roots_of_unity<T: Real>(p: usize) -> Vec<Complex<T>> {
    (0..p)
        .map(|k| {
            if (4 * k) % p == 0 {
                match 4 * k / p {
                    0 => Complex::new(T::one(), T::zero()),
                    1 => Complex::new(T::zero(), T::one()),
                    2 => Complex::new(-T::one(), T::zero()),
                    _ => Complex::new(T::zero(), -T::one()),
                }
            } else {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / p as f64;
                Complex::new(T::of(theta.cos()), T::of(theta.sin()))
            }
        })
        .collect()
}

/// Haar-random pure state of dimension `dim` (normalized complex Gaussian vector).
pub fn haar_random<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex<T>> {
    loop {
        let v: Vec<(f64, f64)> = (0..dim)
            .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v
                .iter()
                .map(|&(a, b)| Complex::new(T::of(a / norm), T::of(b / norm)))
                .collect();
        }
    }
}

/// [`haar_random`] driven by a ChaCha8 stream seeded with `seed`.
pub fn haar_random_seeded<T: Real>(dim: usize, seed: u64) -> Vec<Complex<T>> {
    haar_random(dim, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
}

/// `(sub, rest)` amplitudes of a product split.
pub type Factors<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

#[derive(Debug, Clone)]
pub struct StateVector<T: Real> {
    p: usize,
    amps: Vec<Complex<T>>,
    labels: Vec<RegisterLabel>,
    max_registers: usize,
    roots: Vec<Complex<T>>,
}

/// Largest register count whose state fits in [`DEFAULT_MAX_AMPLITUDES`].
pub fn register_budget(p: usize) -> usize {
    let mut n = 0;
    let mut size = 1usize;
    while size.saturating_mul(p) <= DEFAULT_MAX_AMPLITUDES {
        size *= p;
        n += 1;
    }
    n
}

impl<T: Real> StateVector<T> {
    /// `n` registers in `|0...0>`, labelled `q0, q1, ...` with no owner.
    pub fn allocate(p: usize, n: usize) -> Result<Self, QsimError> {
        let mut state = Self::scalar(p)?;
        for k in 0..n {
            state.add_register("", format!("q{k}"))?;
        }
        Ok(state)
    }

    /// The zero-register state with amplitude 1.
    pub fn scalar(p: usize) -> Result<Self, QsimError> {
        if !is_prime(p as u64) {
            return Err(QsimError::NotPrime(p));
        }
        Ok(Self {
            p,
            amps: vec![Complex::new(T::one(), T::zero())],
            labels: Vec::new(),
            max_registers: register_budget(p),
            roots: roots_of_unity(p),
        })
    }

    /// Wraps an explicit amplitude vector; it must be normalized within tolerance.
    pub fn from_amplitudes(
        p: usize,
        amps: Vec<Complex<T>>,
        labels: Vec<RegisterLabel>,
    ) -> Result<Self, QsimError> {
        let mut state = Self::scalar(p)?;
        let n = labels.len();
        if n > state.max_registers {
            return Err(QsimError::BudgetExceeded {
                needed: n,
                max: state.max_registers,
            });
        }
        let expected = p.pow(n as u32);
        if amps.len() != expected {
            return Err(QsimError::DimensionMismatch {
                got: amps.len(),
                expected,
            });
        }
        let norm: T = amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        if (norm - T::one()).abs() > T::tolerance() {
            return Err(QsimError::NotNormalized(norm.to_f64().unwrap_or(f64::NAN)));
        }
        state.amps = amps;
        state.labels = labels;
        Ok(state)
    }

    /// Caps the register count. Fails if the state already exceeds it.
    pub fn with_max_registers(mut self, max: usize) -> Result<Self, QsimError> {
        if self.labels.len() > max {
            return Err(QsimError::BudgetExceeded {
                needed: self.labels.len(),
                max,
            });
        }
        self.max_registers = max;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn num_registers(&self) -> usize {
        self.labels.len()
    }

    pub fn max_registers(&self) -> usize {
        self.max_registers
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn labels(&self) -> &[RegisterLabel] {
        &self.labels
    }

    pub fn label(&self, r: usize) -> Result<&RegisterLabel, QsimError> {
        self.labels.get(r).ok_or(QsimError::InvalidRegister(r))
    }

    /// Index of the register with the given role.
    pub fn find(&self, role: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.role == role)
    }

    pub fn set_owner(&mut self, r: usize, owner: impl Into<String>) -> Result<(), QsimError> {
        self.check(r)?;
        self.labels[r].owner = owner.into();
        Ok(())
    }

    pub fn omega(&self, k: u64) -> Complex<T> {
        self.roots[(k % self.p as u64) as usize]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y)
    }

    fn check(&self, r: usize) -> Result<(), QsimError> {
        if r < self.labels.len() {
            Ok(())
        } else {
            Err(QsimError::InvalidRegister(r))
        }
    }

    fn stride(&self, r: usize) -> usize {
        self.p.pow((self.labels.len() - 1 - r) as u32)
    }

    #[inline]
    fn digit(&self, idx: usize, stride: usize) -> usize {
        (idx / stride) % self.p
    }

    /// Appends a register in `|0>` and returns its index.
    pub fn add_register(
        &mut self,
        owner: impl Into<String>,
        role: impl Into<String>,
    ) -> Result<usize, QsimError> {
        let needed = self.labels.len() + 1;
        if needed > self.max_registers {
            return Err(QsimError::BudgetExceeded {
                needed,
                max: self.max_registers,
            });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); self.amps.len() * self.p];
        for (i, &a) in self.amps.iter().enumerate() {
            amps[i * self.p] = a;
        }
        self.amps = amps;
        self.labels.push(RegisterLabel::new(owner, role));
        Ok(needed - 1)
    }

    /// Applies the `p x p` matrix `m` (row-major, `m[out][in]`) to register `r`.
    fn apply_local(&mut self, r: usize, m: &[Complex<T>]) -> Result<(), QsimError> {
        self.check(r)?;
        let p = self.p;
        let stride = self.stride(r);
        let block = stride * p;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); p];
        for start in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let base = start + inner;
                for (x, slot) in buf.iter_mut().enumerate() {
                    *slot = self.amps[base + x * stride];
                }
                for y in 0..p {
                    let row = &m[y * p..(y + 1) * p];
                    let acc = row
                        .iter()
                        .zip(&buf)
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                            acc + a * b
                        });
                    self.amps[base + y * stride] = acc;
                }
            }
        }
        Ok(())
    }

    /// `F` (or `F^dagger` when `inverse`) on register `r`.
    pub fn apply_fourier(&mut self, r: usize, inverse: bool) -> Result<(), QsimError> {
        let p = self.p;
        let scale = T::one() / T::of(p as f64).sqrt();
        let mut m = Vec::with_capacity(p * p);
        for y in 0..p {
            for x in 0..p {
                let k = (x * y) % p;
                let k = if inverse { (p - k) % p } else { k };
                m.push(self.roots[k] * scale);
            }
        }
        self.apply_local(r, &m)
    }

    /// `Z(b)`: multiplies `|x>` on register `r` by `w^(b x)`.
    pub fn apply_phase(&mut self, r: usize, b: u64) -> Result<(), QsimError> {
        self.check(r)?;
        let b = (b % self.p as u64) as usize;
        if b == 0 {
            return Ok(());
        }
        let stride = self.stride(r);
        for idx in 0..self.amps.len() {
            let x = self.digit(idx, stride);
            let w = self.roots[(b * x) % self.p];
            self.amps[idx] = self.amps[idx] * w;
        }
        Ok(())
    }

    /// `X(c)`: `|x> -> |x + c>` on register `r`.
    pub fn apply_shift(&mut self, r: usize, c: u64) -> Result<(), QsimError> {
        self.check(r)?;
        let c = (c % self.p as u64) as usize;
        if c == 0 {
            return Ok(());
        }
        let stride = self.stride(r);
        let p = self.p;
        self.permute(|idx| {
            let x = (idx / stride) % p;
            idx - x * stride + ((x + c) % p) * stride
        });
        Ok(())
    }

    /// `|x>_control |y>_target -> |x>|y + gamma x>`.
    pub fn apply_controlled_add(
        &mut self,
        control: usize,
        target: usize,
        gamma: u64,
    ) -> Result<(), QsimError> {
        self.check(control)?;
        self.check(target)?;
        if control == target {
            return Err(QsimError::SameRegister(control));
        }
        let gamma = (gamma % self.p as u64) as usize;
        if gamma == 0 {
            return Ok(());
        }
        let (cs, ts, p) = (self.stride(control), self.stride(target), self.p);
        self.permute(|idx| {
            let x = (idx / cs) % p;
            let y = (idx / ts) % p;
            idx - y * ts + ((y + gamma * x) % p) * ts
        });
        Ok(())
    }

    fn permute(&mut self, dest: impl Fn(usize) -> usize) {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            out[dest(idx)] = a;
        }
        self.amps = out;
    }

    /// Outcome distribution for measuring `r` in `basis`.
    pub fn probabilities(&self, r: usize, basis: Basis) -> Result<Vec<T>, QsimError> {
        self.check(r)?;
        let p = self.p;
        let stride = self.stride(r);
        let mut probs = vec![T::zero(); p];
        match basis {
            Basis::Computational => {
                for (idx, a) in self.amps.iter().enumerate() {
                    let x = self.digit(idx, stride);
                    probs[x] = probs[x] + a.norm_sqr();
                }
            }
            Basis::Fourier => {
                let kernel = self.fourier_kernel();
                self.for_each_group(stride, |base| {
                    for (y, prob) in probs.iter_mut().enumerate() {
                        let c = self.fourier_coefficient(&kernel, base, stride, y);
                        *prob = *prob + c.norm_sqr();
                    }
                });
            }
        }
        Ok(probs)
    }

    /// `F` matrix entries `w^(xy) / sqrt(p)`, row-major.
    fn fourier_kernel(&self) -> Vec<Complex<T>> {
        let p = self.p;
        let scale = T::one() / T::of(p as f64).sqrt();
        (0..p * p)
            .map(|k| self.roots[(k / p) * (k % p) % p] * scale)
            .collect()
    }

    /// `<F y | v>` for the `p` amplitudes `v_x = amps[base + x * stride]`.
    fn fourier_coefficient(
        &self,
        kernel: &[Complex<T>],
        base: usize,
        stride: usize,
        y: usize,
    ) -> Complex<T> {
        let p = self.p;
        (0..p).fold(Complex::new(T::zero(), T::zero()), |acc, x| {
            acc + kernel[y * p + x].conj() * self.amps[base + x * stride]
        })
    }

    /// Calls `f(base)` for the first index of every group of `p` amplitudes
    /// that differ only in the digit with the given stride.
    fn for_each_group(&self, stride: usize, mut f: impl FnMut(usize)) {
        let block = stride * self.p;
        for start in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                f(start + inner);
            }
        }
    }

    /// Samples an outcome from the Born distribution and collapses the state.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        r: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, QsimError> {
        let probs = self.probabilities(r, basis)?;
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut value = probs.iter().rposition(|&q| q > T::zero()).unwrap_or(0);
        for (x, q) in probs.iter().enumerate() {
            cumulative += q.to_f64().unwrap_or(0.0);
            if u < cumulative {
                value = x;
                break;
            }
        }
        self.collapse(r, basis, value as u64, probs[value])
    }

    /// Collapses onto a caller-chosen outcome; fails if it has (numerically) zero probability.
    pub fn measure_forced(
        &mut self,
        r: usize,
        basis: Basis,
        value: u64,
    ) -> Result<MeasurementOutcome, QsimError> {
        let probs = self.probabilities(r, basis)?;
        let q = probs.get(value as usize).copied().unwrap_or(T::zero());
        if q <= T::tolerance() {
            return Err(QsimError::ImpossibleOutcome {
                register: r,
                value,
                probability: q.to_f64().unwrap_or(0.0),
            });
        }
        self.collapse(r, basis, value, q)
    }

    fn collapse(
        &mut self,
        r: usize,
        basis: Basis,
        value: u64,
        prob: T,
    ) -> Result<MeasurementOutcome, QsimError> {
        let stride = self.stride(r);
        let scale = T::one() / prob.sqrt();
        let zero = Complex::new(T::zero(), T::zero());
        match basis {
            Basis::Computational => {
                for idx in 0..self.amps.len() {
                    self.amps[idx] = if self.digit(idx, stride) as u64 == value {
                        self.amps[idx] * scale
                    } else {
                        zero
                    };
                }
            }
            Basis::Fourier => {
                let p = self.p;
                let y = value as usize;
                let kernel = self.fourier_kernel();
                let mut bases = Vec::with_capacity(self.amps.len() / p);
                self.for_each_group(stride, |base| bases.push(base));
                for base in bases {
                    let c = self.fourier_coefficient(&kernel, base, stride, y) * scale;
                    for x in 0..p {
                        self.amps[base + x * stride] = kernel[y * p + x] * c;
                    }
                }
            }
        }
        Ok(MeasurementOutcome {
            register: r,
            basis,
            value,
        })
    }

    /// Splits the state as `sub (registers in the given order) (x) rest`.
    ///
    /// The global phase is assigned to `rest`: the first amplitude of `sub`
    /// whose magnitude exceeds `sqrt(tolerance)` is made real and positive.
    /// Fails when the registers are entangled with their complement.
    pub fn factor(&self, regs: &[usize]) -> Result<Factors<T>, QsimError> {
        let n = self.labels.len();
        let mut in_sub = vec![None; n];
        for (k, &r) in regs.iter().enumerate() {
            self.check(r)?;
            if in_sub[r].is_some() {
                return Err(QsimError::DuplicateRegister(r));
            }
            in_sub[r] = Some(k);
        }
        let p = self.p;
        let sub_dim = p.pow(regs.len() as u32);
        let rest_dim = self.amps.len() / sub_dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut cols = vec![zero; self.amps.len()]; // column-major: cols[col * sub_dim + row]
        let sub_weight: Vec<usize> = (0..regs.len())
            .map(|k| p.pow((regs.len() - 1 - k) as u32))
            .collect();
        let mut rest_weight = vec![0; n];
        let mut w = 1;
        for r in (0..n).rev() {
            if in_sub[r].is_none() {
                rest_weight[r] = w;
                w *= p;
            }
        }
        if let [r] = regs {
            let stride = self.stride(*r);
            for (idx, &a) in self.amps.iter().enumerate() {
                let col = (idx / (stride * p)) * stride + idx % stride;
                cols[col * sub_dim + self.digit(idx, stride)] = a;
            }
        } else {
            self.scatter_columns(&in_sub, &sub_weight, &rest_weight, sub_dim, &mut cols);
        }

        let column = |c: usize| &cols[c * sub_dim..(c + 1) * sub_dim];
        let col_norm = |c: usize| {
            column(c)
                .iter()
                .map(|a| a.norm_sqr())
                .fold(T::zero(), |x, y| x + y)
        };
        let best = (0..rest_dim)
            .max_by(|&a, &b| {
                col_norm(a)
                    .partial_cmp(&col_norm(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        let best_norm = col_norm(best).sqrt();
        if best_norm <= T::zero() {
            return Err(QsimError::NotNormalized(0.0));
        }
        let mut sub: Vec<Complex<T>> = column(best).iter().map(|&a| a / best_norm).collect();
        let mut rest = vec![zero; rest_dim];
        let mut residual = T::zero();
        for (c, slot) in rest.iter_mut().enumerate() {
            let col = column(c);
            let lambda = sub
                .iter()
                .zip(col)
                .fold(zero, |acc, (s, &x)| acc + s.conj() * x);
            residual = residual
                + sub
                    .iter()
                    .zip(col)
                    .map(|(&s, &x)| (x - s * lambda).norm_sqr())
                    .fold(T::zero(), |x, y| x + y);
            *slot = lambda;
        }
        if residual.sqrt() > T::tolerance() {
            return Err(QsimError::Entangled(regs.to_vec()));
        }
        let anchor_threshold = T::tolerance().sqrt();
        if let Some(anchor) = sub.iter().find(|a| a.norm() > anchor_threshold) {
            let phase = anchor / anchor.norm();
            for s in sub.iter_mut() {
                *s = *s * phase.conj();
            }
            for x in rest.iter_mut() {
                *x = *x * phase;
            }
        }
        Ok((sub, rest))
    }

    fn scatter_columns(
        &self,
        in_sub: &[Option<usize>],
        sub_weight: &[usize],
        rest_weight: &[usize],
        sub_dim: usize,
        cols: &mut [Complex<T>],
    ) {
        let n = self.labels.len();
        let p = self.p;
        let weight = |r: usize| match in_sub[r] {
            Some(k) => (sub_weight[k], 0),
            None => (0, rest_weight[r]),
        };
        let mut digits = vec![0usize; n];
        let (mut row, mut col) = (0usize, 0usize);
        for &a in self.amps.iter() {
            cols[col * sub_dim + row] = a;
            for r in (0..n).rev() {
                let (wr, wc) = weight(r);
                digits[r] += 1;
                if digits[r] < p {
                    row += wr;
                    col += wc;
                    break;
                }
                digits[r] = 0;
                row -= (p - 1) * wr;
                col -= (p - 1) * wc;
            }
        }
    }

    /// Pure state of `regs` (in that order); fails if they are entangled with the rest.
    pub fn reduced_state(&self, regs: &[usize]) -> Result<Vec<Complex<T>>, QsimError> {
        Ok(self.factor(regs)?.0)
    }

    /// Removes register `r`, which must be in a product state with the rest.
    pub fn discard(&mut self, r: usize) -> Result<(), QsimError> {
        let (_, rest) = self.factor(&[r])?;
        self.amps = rest;
        self.labels.remove(r);
        Ok(())
    }

    /// `|<reference|psi_regs>|^2` where `psi_regs` is the reduced pure state of `regs`.
    pub fn fidelity(&self, reference: &[Complex<T>], regs: &[usize]) -> Result<T, QsimError> {
        let expected = self.p.pow(regs.len() as u32);
        if reference.len() != expected {
            return Err(QsimError::DimensionMismatch {
                got: reference.len(),
                expected,
            });
        }
        let sub = self.reduced_state(regs)?;
        let ref_norm = reference
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |x, y| x + y);
        let overlap = reference
            .iter()
            .zip(&sub)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (r, &s)| {
                acc + r.conj() * s
            });
        Ok(overlap.norm_sqr() / ref_norm)
    }

    /// Full amplitude vector with registers reordered; `order` must list every register once.
    pub fn amplitudes_in_order(&self, order: &[usize]) -> Result<Vec<Complex<T>>, QsimError> {
        let n = self.labels.len();
        if order.len() != n {
            return Err(QsimError::DimensionMismatch {
                got: order.len(),
                expected: n,
            });
        }
        let mut weight = vec![0; n];
        let mut seen = vec![false; n];
        for (k, &r) in order.iter().enumerate() {
            self.check(r)?;
            if std::mem::replace(&mut seen[r], true) {
                return Err(QsimError::DuplicateRegister(r));
            }
            weight[r] = self.p.pow((n - 1 - k) as u32);
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            let dest = (0..n)
                .map(|r| self.digit(idx, self.stride(r)) * weight[r])
                .sum::<usize>();
            out[dest] = a;
        }
        Ok(out)
    }

    /// Snapshot of the whole state in register order.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot::new(
            self.labels.iter().map(|l| l.role.clone()).collect(),
            &self.amps,
        )
    }

    /// Snapshot of the reduced pure state of the registers with the given roles.
    pub fn snapshot_of(&self, roles: &[&str]) -> Result<Snapshot, QsimError> {
        let regs = roles
            .iter()
            .map(|role| {
                self.find(role)
                    .ok_or(QsimError::InvalidRegister(usize::MAX))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sub = self.reduced_state(&regs)?;
        Ok(Snapshot::new(
            roles.iter().map(|s| s.to_string()).collect(),
            &sub,
        ))
    }
}
