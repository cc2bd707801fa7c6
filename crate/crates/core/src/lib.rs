//! Ladder filters of piezoelectric resonators, and what they do to qubits.
//!
//! The crate models a single mechanical resonator as a Butterworth–van Dyke
//! (BVD) equivalent circuit, assembles ladder networks of such resonators
//! into two-port chain matrices, converts those to scattering parameters,
//! extracts the environmental impedance `Re Z_ext` seen by a readout
//! resonator, and predicts the Purcell-limited qubit lifetime with and
//! without the filter in place.
//!
//! Module map:
//! - [`bvd`] — single-resonator circuit model and spec conversions.
//! - [`network`] — chain-matrix algebra, ladder construction, S-parameters,
//!   insertion loss, bandwidth, and `Re Z_ext` extraction.
//! - [`purcell`] — Jaynes–Cummings decay rates, filter factor, filtered T1
//!   sweeps, and the perturbative two-port shift formulas.
//! - [`fitting`] — trust-region least squares extraction of resonator and
//!   ladder parameters from frequency responses.
//! - [`io`] — Touchstone v1 two-port files, sweep CSV tables, and device
//!   geometry metadata.
//! - [`sweep`] — the aligned result table shared by sweeps and writers.
//!
//! Conventions used throughout: SI units internally (rad/s, F, H, Ω) with
//! plain Hz at file and CLI boundaries, and the engineering `e^{+iωt}` sign
//! convention, so a capacitor contributes `+iωC` to an admittance.

pub mod bvd;
pub mod fitting;
pub mod io;
pub mod network;
pub mod purcell;
pub mod sweep;

pub use bvd::{k2_from_freqs, BvdError, BvdResonator, Quality, ResonatorSpec};
pub use fitting::{
    FitError, FitModel, FitProblem, FitReport, FitStatus, FittedParameter, ObservableKind,
};
pub use io::{
    parse_touchstone, write_sweep_csv, write_touchstone, DeviceRecord, IoError, TouchstoneFormat,
    TouchstoneRecord,
};
pub use network::{
    linear_grid, re_zext_from_s11, Abcd, BandwidthReport, LadderFilterSpec, NetworkError, SParams,
    TwoPortNetwork,
};
pub use purcell::{
    filter_factor, filtered_t1_spectrum, jc_purcell_rate, parallel_lc_impedance,
    perturbative_shifts, purcell_rate_lorentzian, symmetric_lc_two_port, with_coupling_caps,
    AdmittanceMatrix, PerturbativeInputs, PerturbativeShifts, PurcellError, ReadoutSystem,
};
pub use sweep::SweepResult;
