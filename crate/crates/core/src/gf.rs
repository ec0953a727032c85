//! Prime-field arithmetic.
//!
//! Elements are plain residues tied to a [`PrimeField`] context. [`FieldElem`]
//! carries its modulus and refuses to mix with elements of another field.

use std::fmt;

use thiserror::Error;

use crate::netgraph::Network;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime modulus")]
    NotPrime(u64),
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Trial-division primality test; moduli here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut candidate = n.max(2);
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// Smallest prime `p >= max(2, |T|)`. Random linear coding over such a field
/// succeeds for any feasible multicast instance with positive probability.
pub fn choose_field_size(network: &Network) -> u64 {
    smallest_prime_at_least(network.targets().len() as u64)
}

/// The prime field `F_p`. Operations take and return reduced residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        // Products are formed in u128, but residues must fit usize for indexing.
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    pub fn elem(&self, value: u64) -> FieldElem {
        FieldElem {
            value: value % self.p,
            p: self.p,
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        let a = a % self.p;
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(self.p as i128) as u64)
    }

    /// Dot product of two equal-length vectors.
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// `acc += coeff * v`, componentwise.
    pub fn axpy(&self, acc: &mut [u64], coeff: u64, v: &[u64]) {
        debug_assert_eq!(acc.len(), v.len());
        if coeff == 0 {
            return;
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = self.add(*a, self.mul(coeff, x));
        }
    }

    pub fn unit_vector(&self, len: usize, index: usize) -> Vec<u64> {
        let mut v = vec![0; len];
        v[index] = 1 % self.p;
        v
    }

    /// Rank of the matrix whose rows are `rows`.
    pub fn rank(&self, rows: &[Vec<u64>]) -> usize {
        let mut m: Vec<Vec<u64>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pivot);
            let inv = self.inv(m[rank][col]).expect("pivot is nonzero");
            for x in m[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot_row = m[rank].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let f = self.neg(row[col]);
                    self.axpy(row, f, &pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Finds coefficients `c` with `sum_k c[k] * rows[k] == target`, or `None`
    /// when `target` lies outside the row span. Free coefficients are zero.
    pub fn solve_combination(&self, rows: &[Vec<u64>], target: &[u64]) -> Option<Vec<u64>> {
        let m = rows.len();
        let n = target.len();
        // Augmented system A c = target where A = rows^T is n x m.
        let mut aug: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut row: Vec<u64> = rows.iter().map(|r| r[i]).collect();
                row.push(target[i] % self.p);
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..m {
            let Some(pivot) = (rank..n).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(rank, pivot);
            let inv = self.inv(aug[rank][col]).expect("pivot is nonzero");
            for x in aug[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot_row = aug[rank].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let f = self.neg(row[col]);
                    self.axpy(row, f, &pivot_row);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if aug[rank..].iter().any(|row| row[m] != 0) {
            return None;
        }
        let mut c = vec![0; m];
        for (r, &col) in pivots.iter().enumerate() {
            c[col] = aug[r][m];
        }
        Some(c)
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

/// A residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    p: u64,
}

impl FieldElem {
    pub fn new(value: u64, p: u64) -> Result<Self, FieldError> {
        Ok(PrimeField::new(p)?.elem(value))
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn arith(self, other: Self, kind: ArithKind) -> Result<Self, FieldError> {
        if self.p != other.p {
            return Err(FieldError::ModulusMismatch {
                left: self.p,
                right: other.p,
            });
        }
        let f = self.field();
        let value = match kind {
            ArithKind::Add => f.add(self.value, other.value),
            ArithKind::Sub => f.sub(self.value, other.value),
            ArithKind::Mul => f.mul(self.value, other.value),
        };
        Ok(Self { value, p: self.p })
    }

    pub fn checked_add(self, other: Self) -> Result<Self, FieldError> {
        self.arith(other, ArithKind::Add)
    }

    pub fn checked_sub(self, other: Self) -> Result<Self, FieldError> {
        self.arith(other, ArithKind::Sub)
    }

    pub fn checked_mul(self, other: Self) -> Result<Self, FieldError> {
        self.arith(other, ArithKind::Mul)
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        Ok(Self {
            value: self.field().inv(self.value)?,
            p: self.p,
        })
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.p)
    }
}

macro_rules! impl_op {
    ($trait:ident, $method:ident, $kind:expr) => {
        /// Panics on modulus mismatch; use the `checked_*` methods to get an error instead.
        impl std::ops::$trait for FieldElem {
            type Output = FieldElem;
            fn $method(self, rhs: FieldElem) -> FieldElem {
                match self.arith(rhs, $kind) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

impl_op!(Add, add, ArithKind::Add);
impl_op!(Sub, sub, ArithKind::Sub);
impl_op!(Mul, mul, ArithKind::Mul);

impl std::ops::Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            value: self.field().neg(self.value),
            p: self.p,
        }
    }
}
