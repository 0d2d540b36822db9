//! Classical simulation of fermionic Gaussian circuits extended with
//! non-Gaussian gates and noisy channels.
//!
//! Gaussian states are tracked by covariance matrix plus phase. Non-Gaussian
//! elements are expanded into superpositions of Gaussian operations with
//! extent-optimal coefficients, then sparsified and sampled.

pub mod decomp_channel;
pub mod decomp_unitary;
pub mod error;
pub mod exec;
pub mod gates;
pub mod gaussian;
pub mod linalg;
pub mod norm;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod sparsify;
pub mod verify;

pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use gates::Gate;
pub use gaussian::{GaussianCircuit, GaussianState, Generator, NamedGate};
pub use linalg::C64;
pub use sampler::{CircuitProgram, Element, Mode, SampleReport, SampleRun, SamplerConfig};
pub use sparsify::SparseSuperposition;
