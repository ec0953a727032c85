//! Brute-force checks built from first principles.
//!
//! Expected states are assembled directly from sums over basis vectors, with
//! their own roots of unity, and never go through the protocol compiler. Only
//! the operations under test (a Fourier measurement, a phase gate) use the
//! simulator.

pub mod fixtures;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gf::PrimeField;
use crate::netcode::{construct_linear_code, CodeError, LinearCode};
use crate::netgraph::{Feasibility, Network};
use crate::protocol::{run_full, MeasureSchedule, RunOptions, TargetSelection};
use crate::qsim::{Basis, QsimError, RegisterLabel, StateVector};

/// Amplitude and fidelity tolerance for every check.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub instance: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    /// Largest amplitude deviation seen, where applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    /// Smallest output fidelity seen, where applicable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
}

impl PropertyReport {
    fn new(property: &str, instance: impl Into<String>) -> Self {
        Self {
            property: property.into(),
            instance: instance.into(),
            cases: 0,
            failures: Vec::new(),
            max_deviation: None,
            min_fidelity: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, case: impl Into<String>, detail: impl Into<String>) {
        self.failures.push(Failure {
            case: case.into(),
            detail: detail.into(),
        });
    }

    fn deviation(&mut self, d: f64) {
        self.max_deviation = Some(self.max_deviation.map_or(d, |m| m.max(d)));
    }
}

fn omega(k: u64, p: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % p) as f64 / p as f64)
}

/// Base-`p` digits of `idx` over `n` positions, most significant first.
fn digits(mut idx: usize, p: usize, n: usize) -> Vec<u64> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = (idx % p) as u64;
        idx /= p;
    }
    out
}

fn index(digits: &[u64], p: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * p + d as usize)
}

fn apply_matrix(field: PrimeField, m: &[Vec<u64>], x: &[u64]) -> Vec<u64> {
    m.iter().map(|row| field.dot(row, x)).collect()
}

fn gaussian_vector<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn max_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn labels(n: usize) -> Vec<RegisterLabel> {
    (0..n)
        .map(|k| RegisterLabel::new("oracle", format!("q{k}")))
        .collect()
}

/// Outcome of one Fourier-measurement instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Case {
    pub outcomes: usize,
    pub max_deviation: f64,
    pub mismatches: Vec<String>,
}

/// Builds `sum_x alpha_x |f(x)>_A |g(x)>_B` over `x in F_p^n`, Fourier-measures
/// every register of `B` with each forced outcome vector `y` and compares the
/// remaining `A` state and the outcome probability against
/// `sum_x w^(-y . g(x)) alpha_x |f(x)>`.
pub fn lemma1_case(
    p: u64,
    f: &[Vec<u64>],
    g: &[Vec<u64>],
    alpha: &[Complex64],
) -> Result<Lemma1Case, QsimError> {
    let field = PrimeField::new(p).map_err(|_| QsimError::NotPrime(p as usize))?;
    let (na, nb) = (f.len(), g.len());
    let pu = p as usize;
    let n = alpha.len().ilog(pu) as usize;
    let mut joint = vec![Complex64::new(0.0, 0.0); pu.pow((na + nb) as u32)];
    for (x_idx, &a) in alpha.iter().enumerate() {
        let x = digits(x_idx, pu, n);
        let mut out = apply_matrix(field, f, &x);
        out.extend(apply_matrix(field, g, &x));
        joint[index(&out, pu)] += a;
    }
    let scale = norm(&joint);
    if scale < 1e-12 {
        return Err(QsimError::NotNormalized(0.0));
    }
    let joint: Vec<Complex64> = joint.iter().map(|a| a / scale).collect();
    let base = StateVector::from_amplitudes(pu, joint, labels(na + nb))?;

    let mut result = Lemma1Case {
        outcomes: 0,
        max_deviation: 0.0,
        mismatches: Vec::new(),
    };
    for y_idx in 0..pu.pow(nb as u32) {
        let y = digits(y_idx, pu, nb);
        let mut expected = vec![Complex64::new(0.0, 0.0); pu.pow(na as u32)];
        for (x_idx, &a) in alpha.iter().enumerate() {
            let x = digits(x_idx, pu, n);
            let gx = apply_matrix(field, g, &x);
            let phase = omega(field.neg(field.dot(&y, &gx)), p);
            expected[index(&apply_matrix(field, f, &x), pu)] += phase * a / scale;
        }
        let expected_prob = norm(&expected).powi(2) / (pu.pow(nb as u32) as f64);
        result.outcomes += 1;

        let mut state = base.clone();
        let mut prob = 1.0;
        let mut impossible = false;
        for (b, &yb) in y.iter().enumerate() {
            let r = na + b;
            prob *= state.probabilities(r, Basis::Fourier)?[yb as usize];
            match state.measure_forced(r, Basis::Fourier, yb) {
                Ok(_) => {}
                Err(QsimError::ImpossibleOutcome { .. }) => {
                    impossible = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if impossible {
            if expected_prob > 1e-8 {
                result.mismatches.push(format!(
                    "y={y:?}: simulator says impossible, expected p={expected_prob:e}"
                ));
            }
            continue;
        }
        let dp = (prob - expected_prob).abs();
        result.max_deviation = result.max_deviation.max(dp);
        if dp > TOLERANCE {
            result
                .mismatches
                .push(format!("y={y:?}: probability {prob} vs {expected_prob}"));
        }
        if expected_prob < 1e-8 {
            continue;
        }
        for r in (na..na + nb).rev() {
            state.discard(r)?;
        }
        let scale = norm(&expected);
        let expected: Vec<Complex64> = expected.iter().map(|a| a / scale).collect();
        let d = max_distance(state.amplitudes(), &expected);
        result.max_deviation = result.max_deviation.max(d);
        if d > TOLERANCE {
            result
                .mismatches
                .push(format!("y={y:?}: state deviates by {d:e}"));
        }
    }
    Ok(result)
}

fn random_matrix<R: Rng>(rows: usize, cols: usize, p: u64, rng: &mut R) -> Vec<Vec<u64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..p)).collect())
        .collect()
}

/// Random linear `f`, `g` and amplitudes on `n` registers, split at random
/// into nonempty `A` and `B`; every outcome vector is enumerated.
pub fn lemma1_check(n: usize, p: u64, trials: usize, seed: u64) -> PropertyReport {
    let mut report = PropertyReport::new("lemma1", format!("n={n} p={p} trials={trials}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pu = p as usize;
    for trial in 0..trials {
        let na = rng.random_range(1..n.max(2));
        let nb = n - na;
        let f = random_matrix(na, n, p, &mut rng);
        let g = random_matrix(nb, n, p, &mut rng);
        let alpha = gaussian_vector(pu.pow(n as u32), &mut rng);
        match lemma1_case(p, &f, &g, &alpha) {
            Ok(case) => {
                report.cases += case.outcomes;
                report.deviation(case.max_deviation);
                for m in case.mismatches {
                    report.fail(format!("trial {trial}"), m);
                }
            }
            Err(QsimError::NotNormalized(_)) => {}
            Err(e) => report.fail(format!("trial {trial}"), e.to_string()),
        }
    }
    report
}

/// Applies `Z(-b_i)` on each register of `sum_x w^(b . x) alpha_x |x>` and
/// returns the largest amplitude distance to `alpha`.
pub fn lemma2_case(p: u64, alpha: &[Complex64], b: &[u64]) -> Result<f64, QsimError> {
    let field = PrimeField::new(p).map_err(|_| QsimError::NotPrime(p as usize))?;
    let pu = p as usize;
    let n = b.len();
    let phased: Vec<Complex64> = alpha
        .iter()
        .enumerate()
        .map(|(idx, &a)| omega(field.dot(b, &digits(idx, pu, n)), p) * a)
        .collect();
    let mut state = StateVector::from_amplitudes(pu, phased, labels(n))?;
    for (r, &br) in b.iter().enumerate() {
        state.apply_phase(r, field.neg(br))?;
    }
    Ok(max_distance(state.amplitudes(), alpha))
}

pub fn lemma2_check(n: usize, p: u64, cases: usize, seed: u64) -> PropertyReport {
    let mut report = PropertyReport::new("lemma2", format!("n={n} p={p} cases={cases}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pu = p as usize;
    for case in 0..cases {
        let b: Vec<u64> = (0..n).map(|_| rng.random_range(0..p)).collect();
        let raw = gaussian_vector(pu.pow(n as u32), &mut rng);
        let scale = norm(&raw);
        let alpha: Vec<Complex64> = raw.iter().map(|a| a / scale).collect();
        report.cases += 1;
        match lemma2_case(p, &alpha, &b) {
            Ok(d) => {
                report.deviation(d);
                if d > TOLERANCE {
                    report.fail(format!("case {case} b={b:?}"), format!("deviation {d:e}"));
                }
            }
            Err(e) => report.fail(format!("case {case}"), e.to_string()),
        }
    }
    report
}

/// Inputs to decode: all of `F_p^h` when there are at most 1024, else 1024 samples.
fn classical_inputs(p: u64, h: usize, seed: u64) -> Vec<Vec<u64>> {
    let total = (p as u128).checked_pow(h as u32).unwrap_or(u128::MAX);
    if total <= 1024 {
        (0..total as usize)
            .map(|i| digits(i, p as usize, h))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..1024)
            .map(|_| (0..h).map(|_| rng.random_range(0..p)).collect())
            .collect()
    }
}

/// Every target decodes the inputs.
pub fn classical_check(name: &str, code: &LinearCode) -> PropertyReport {
    let mut report = PropertyReport::new(
        "classical-decoding",
        format!("{name} over F_{}", code.modulus()),
    );
    for input in classical_inputs(code.modulus(), code.rate(), 0) {
        report.cases += 1;
        match code.classical_simulate(&input) {
            Ok(outputs) => {
                for (target, got) in outputs {
                    if got != input {
                        report.fail(
                            format!("input {input:?}"),
                            format!("{target} decoded {got:?}"),
                        );
                    }
                }
            }
            Err(e) => report.fail(format!("input {input:?}"), e.to_string()),
        }
    }
    report
}

/// No seed yields an F_p code for the network.
pub fn field_insufficiency(
    name: &str,
    net: &Network,
    p: u64,
    seeds: std::ops::Range<u64>,
) -> PropertyReport {
    let mut report = PropertyReport::new("field-insufficient", format!("{name} over F_{p}"));
    let unit = net.expand_capacities();
    for seed in seeds {
        report.cases += 1;
        match construct_linear_code(&unit, p, seed) {
            Err(CodeError::RetryBudgetExhausted { .. }) => {}
            Ok(_) => report.fail(format!("seed {seed}"), "a full-rank code was found"),
            Err(e) => report.fail(format!("seed {seed}"), e.to_string()),
        }
    }
    report
}

/// The network is infeasible and the first violating target has the given flow.
pub fn infeasibility_check(name: &str, net: &Network, flow: u32) -> PropertyReport {
    let mut report = PropertyReport::new("infeasible", name);
    report.cases = 1;
    match net.multicast_feasible() {
        Feasibility::Infeasible {
            target, flow: got, ..
        } if got == flow => {
            report.instance = format!("{name}: {target} has max-flow {got}");
        }
        other => report.fail(name, format!("unexpected verdict {other:?}")),
    }
    report
}

#[derive(Debug, Clone)]
pub struct SweepCase {
    pub name: String,
    pub network: Network,
    pub field: Option<u64>,
    pub selections: Vec<TargetSelection>,
    pub measurement_seeds: Vec<u64>,
    pub input_seeds: Vec<u64>,
}

impl SweepCase {
    /// Every selection of the network's targets.
    pub fn all_selections(name: &str, network: Network, seeds: usize, inputs: usize) -> Self {
        let g = &network;
        let targets: Vec<String> = g.targets().iter().map(|&t| g.name(t).to_string()).collect();
        let selections = TargetSelection::all(&targets, g.sources().len());
        Self {
            name: name.into(),
            field: None,
            selections,
            measurement_seeds: (0..seeds as u64).collect(),
            input_seeds: (0..inputs as u64).map(|k| 1000 + k).collect(),
            network,
        }
    }
}

/// Runs the whole protocol on every combination in parallel; results are
/// aggregated in a fixed order.
pub fn end_to_end_sweep(cases: &[SweepCase]) -> PropertyReport {
    let names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
    let mut report = PropertyReport::new("end-to-end", names.join(", "));
    let jobs: Vec<(&SweepCase, &TargetSelection, u64, u64)> = cases
        .iter()
        .flat_map(|c| {
            c.selections.iter().flat_map(move |s| {
                c.measurement_seeds
                    .iter()
                    .flat_map(move |&m| c.input_seeds.iter().map(move |&i| (c, s, m, i)))
            })
        })
        .collect();
    let results: Vec<(String, Result<f64, String>)> = jobs
        .par_iter()
        .map(|&(case, sel, m, i)| {
            let label = format!("{} {} seed={m} input={i}", case.name, sel.describe());
            let p = case
                .field
                .unwrap_or_else(|| crate::gf::choose_field_size(&case.network))
                as usize;
            let h = case.network.sources().len();
            let input = crate::qsim::haar_random::<f64, _>(
                p.pow(h as u32),
                &mut ChaCha8Rng::seed_from_u64(i),
            );
            let options = RunOptions {
                field: case.field,
                code_seed: 0,
                measurement_seed: m,
                schedule: MeasureSchedule::Auto,
            };
            (
                label,
                run_full(&case.network, &input, sel, &options)
                    .map(|r| r.fidelity)
                    .map_err(|e| e.to_string()),
            )
        })
        .collect();
    for (label, result) in results {
        report.cases += 1;
        match result {
            Ok(f) => {
                report.min_fidelity = Some(report.min_fidelity.map_or(f, |m: f64| m.min(f)));
                if f < 1.0 - TOLERANCE {
                    report.fail(label, format!("fidelity {f}"));
                }
            }
            Err(e) => report.fail(label, e),
        }
    }
    report
}

/// Every check on the shipped fixtures.
pub fn standard_suite() -> Vec<PropertyReport> {
    let mut reports = Vec::new();
    for p in [2, 3] {
        for n in 2..=4 {
            reports.push(lemma1_check(n, p, 50, 100 * p + n as u64));
        }
    }
    for p in [2, 3] {
        for n in 1..=6 {
            reports.push(lemma2_check(n, p, 100, 200 * p + n as u64));
        }
    }
    for fx in fixtures::ALL.iter().filter(|f| f.feasible) {
        let net = fx.network();
        let p = fx
            .field
            .unwrap_or_else(|| crate::gf::choose_field_size(&net));
        match construct_linear_code(&net.expand_capacities(), p, 0) {
            Ok(code) => reports.push(classical_check(fx.name, &code)),
            Err(e) => {
                let mut r = PropertyReport::new("classical-decoding", fx.name);
                r.fail("construction", e.to_string());
                reports.push(r);
            }
        }
    }
    reports.push(infeasibility_check(
        "butterfly_cut",
        &fixtures::get("butterfly_cut").expect("shipped").network(),
        1,
    ));
    let combination = fixtures::get("combination_4_2").expect("shipped").network();
    reports.push(field_insufficiency(
        "combination_4_2",
        &combination,
        2,
        0..16,
    ));
    let sweep: Vec<SweepCase> = fixtures::ALL
        .iter()
        .filter(|f| f.simulable)
        .map(|f| {
            let (seeds, inputs) = if f.name == "ternary" { (2, 1) } else { (20, 5) };
            SweepCase::all_selections(f.name, f.network(), seeds, inputs)
        })
        .collect();
    reports.push(end_to_end_sweep(&sweep));
    reports
}
