//! Compartmental epidemic models with threshold analysis and optimal control.
//!
//! The crate covers the full pipeline for desk-scale epidemic studies of
//! vector-borne diseases (dengue in particular) and the classic SIS/SIR
//! family:
//!
//! * [`scenario`] — model catalog identifiers, parameter validation and the
//!   JSON scenario format shared by the CLI, the examples and the tests.
//! * [`integrators`] — fixed-step Euler/RK2/RK4 and adaptive RK45 (Dormand
//!   Prince) integration, forward or backward in time.
//! * [`models`] — right-hand sides, adjoint systems, Hamiltonians and
//!   pointwise control laws for every catalog model.
//! * [`analysis`] — basic reproduction numbers (closed form and next
//!   generation matrix), equilibria, local stability and critical control
//!   thresholds.
//! * [`ocp`] — the two optimal-control solution families: an indirect
//!   forward-backward sweep plus single shooting, and a direct
//!   transcription with an in-crate projected-gradient solver.
//! * [`strategies`] — constant/pulse spraying schedules, outbreak metrics
//!   and parameter sweeps.
//! * [`report`] — the `simulate`/`analyze`/`optimize`/`strategy` commands
//!   behind the thin `epioc` binary, emitting plot-ready CSV files.
//!
//! Ready-made scenario files for the bundled case studies (Cape Verde 2009
//! outbreak, influenza boarding-school data, trachoma, rubella, a seasonal
//! mosquito/goodwill model and two vaccination scenarios) live in
//! [`presets`] and under `presets/` in the repository.
//!
//! Every major capability has a runnable program under `examples/`.

pub mod analysis;
pub mod integrators;
mod linalg;
pub mod models;
pub mod ocp;
pub mod presets;
pub mod report;
pub mod scenario;
pub mod strategies;
