//! Perfect quantum state transfer over networks of quantum channels.
//!
//! A classical linear multicast code is built over a prime field, translated
//! node by node into Clifford operations on qudits, and executed on an exact
//! state-vector simulator. Measuring the leftover network registers in the
//! Fourier basis leaves a phase that is a known linear function of the source
//! symbols; a local phase fix produces `|S|` cat states shared by the sources
//! and every target. Once the ordered target subset is chosen, the cat states
//! are reduced to EPR pairs and the source state is teleported.
//!
//! Modules, bottom up:
//!
//! - [`gf`]: prime-field arithmetic and small linear algebra.
//! - [`netgraph`]: network documents, capacity expansion, max-flow feasibility.
//! - [`netcode`]: random linear multicast codes and their classical evaluation.
//! - [`qsim`]: dense qudit state vectors with Clifford gates and measurement.
//! - [`protocol`]: compilation to a quantum program and the end-to-end run.
//! - [`oracle`]: brute-force checks and shipped fixtures.
//!
//! Simulation code is generic over the amplitude scalar ([`Real`]); the
//! aliases below fix it to `f64`, which every tolerance in this crate assumes.

pub mod gf;
pub mod netcode;
pub mod netgraph;
pub mod oracle;
pub mod protocol;
pub mod qsim;
mod scalar;

pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type StateVector64 = qsim::StateVector<f64>;
pub type StateVector32 = qsim::StateVector<f32>;
pub type Execution64 = protocol::Execution<f64>;
pub type RunReport64 = protocol::RunReport<f64>;
