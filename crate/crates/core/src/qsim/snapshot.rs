use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Amplitudes of magnitude above this are kept in a snapshot.
pub const SNAPSHOT_CUTOFF: f64 = 1e-12;

/// Sparse serialized state: `(basis index, re, im)` triples over the named registers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub registers: Vec<String>,
    pub amplitudes: Vec<(usize, f64, f64)>,
}

impl Snapshot {
    pub fn new<T: Real>(registers: Vec<String>, amps: &[Complex<T>]) -> Self {
        let amplitudes = amps
            .iter()
            .enumerate()
            .filter_map(|(i, a)| {
                let (re, im) = (a.re.to_f64()?, a.im.to_f64()?);
                (re.hypot(im) > SNAPSHOT_CUTOFF).then_some((i, re, im))
            })
            .collect();
        Self {
            registers,
            amplitudes,
        }
    }

    /// Largest per-amplitude distance to `other`; infinite if the register lists differ.
    pub fn max_deviation(&self, other: &Snapshot) -> f64 {
        if self.registers != other.registers {
            return f64::INFINITY;
        }
        let mut merged: BTreeMap<usize, (Complex<f64>, Complex<f64>)> = BTreeMap::new();
        for &(i, re, im) in &self.amplitudes {
            merged.entry(i).or_default().0 = Complex::new(re, im);
        }
        for &(i, re, im) in &other.amplitudes {
            merged.entry(i).or_default().1 = Complex::new(re, im);
        }
        merged
            .values()
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
