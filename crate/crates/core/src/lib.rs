//! Dense state-vector simulation of entanglement swapping between two
//! singlet sources, with a station harness for Bell measurements, classical
//! broadcast, post-selection and CHSH tests.
//!
//! Qubits are labelled from 1 and qubit 1 is the most significant bit of a
//! basis index. The swapping register is `(1, 2, 3, 4)` with singlets on
//! `(1, 2)` and `(3, 4)`; station D measures `(2, 3)`, station C measures
//! `(1, 4)`.

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod measurement;
pub mod operator;
pub mod protocol;
pub mod records;
pub mod rng;
pub mod state;
pub mod subsystem;

pub use analysis::{
    chsh_estimate, chsh_exact, correlator_exact, fidelity_pure, ppt_check, ChshEstimate,
    ChshSample, ChshSettings, PptResult, SettingPair, TSIRELSON,
};
pub use error::{Error, Result};
pub use measurement::{
    born_probabilities, measure, measure_bell, measure_spin, relative_state, MeasurementResult,
};
pub use operator::{
    density_from_pure, kron, partial_trace, pauli, spin_operator, Axis, DensityMatrix, Direction,
    Operator,
};
pub use protocol::{
    conditional_mixture, nonsignaling_check, post_select, run_ensemble, run_trial,
    ClassicalMessage, DOutcome, ExperimentConfig, StationDAction, TrialRecord,
};
pub use rng::{rng_derive, RngStream};
pub use state::{
    bell_basis, bell_state, joint_state, permute_qubits, singlet, tensor, BellOutcome, StateVector,
};
pub use subsystem::Subsystem;
