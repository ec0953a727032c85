use std::str::FromStr;

use anyhow::{bail, Context, Result};
use qnetcode::qsim::haar_random_seeded;
use qnetcode::Complex64;

/// How the joint input state of the sources is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Zero,
    Plus,
    Random(u64),
    Amplitudes(Vec<Complex64>),
}

impl FromStr for InputSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => return Ok(InputSpec::Zero),
            "plus" => return Ok(InputSpec::Plus),
            _ => {}
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return Ok(InputSpec::Random(
                seed.parse().with_context(|| format!("bad seed {seed:?}"))?,
            ));
        }
        if let Some(list) = s.strip_prefix("amps:") {
            let amps = list
                .split(',')
                .map(|a| {
                    Complex64::from_str(a.trim())
                        .map_err(|_| anyhow::anyhow!("bad amplitude {a:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(InputSpec::Amplitudes(amps));
        }
        bail!("input must be zero, plus, random:<seed> or amps:<a0>,<a1>,...")
    }
}

/// Amplitudes normalized within this are used as given.
const NORM_SLACK: f64 = 1e-6;

impl InputSpec {
    /// State vector of dimension `dim`, plus a warning if explicit amplitudes were renormalized.
    pub fn amplitudes(&self, dim: usize) -> Result<(Vec<Complex64>, Option<String>)> {
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self {
            InputSpec::Zero => {
                let mut v = vec![zero; dim];
                v[0] = Complex64::new(1.0, 0.0);
                (v, None)
            }
            InputSpec::Plus => (
                vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim],
                None,
            ),
            InputSpec::Random(seed) => (haar_random_seeded(dim, *seed), None),
            InputSpec::Amplitudes(amps) => {
                if amps.len() != dim {
                    bail!("{} amplitudes given, the sources need {dim}", amps.len());
                }
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if norm == 0.0 {
                    bail!("amplitudes are all zero");
                }
                if (norm - 1.0).abs() <= NORM_SLACK {
                    (amps.clone(), None)
                } else {
                    let scaled = amps.iter().map(|a| a / norm).collect();
                    (scaled, Some(format!("input norm was {norm}; renormalized")))
                }
            }
        })
    }
}
