//! Aligned result table produced by sweeps.
//!
//! Every column is optional per point: a `None` cell marks a frequency where
//! that quantity could not be computed (flagged rather than aborting the
//! sweep, since measured data has bad points). Columns map one-to-one onto
//! the sweep CSV schema in [`crate::io`].

use num_complex::Complex64;

/// Frequency-aligned sweep columns: scattering parameters, extracted
/// environmental resistance, filter factor, and qubit lifetimes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    freq_hz: Vec<f64>,
    s11: Vec<Option<Complex64>>,
    s21: Vec<Option<Complex64>>,
    re_zext_ohm: Vec<Option<f64>>,
    filter_factor: Vec<Option<f64>>,
    t1_unfiltered_s: Vec<Option<f64>>,
    t1_filtered_s: Vec<Option<f64>>,
    warnings: Vec<String>,
}

impl SweepResult {
    /// Empty table over the given grid; all columns start unset.
    pub fn new(freq_hz: Vec<f64>) -> Self {
        let n = freq_hz.len();
        SweepResult {
            freq_hz,
            s11: vec![None; n],
            s21: vec![None; n],
            re_zext_ohm: vec![None; n],
            filter_factor: vec![None; n],
            t1_unfiltered_s: vec![None; n],
            t1_filtered_s: vec![None; n],
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_hz.is_empty()
    }

    pub fn freq_hz(&self) -> &[f64] {
        &self.freq_hz
    }

    pub fn s11(&self) -> &[Option<Complex64>] {
        &self.s11
    }

    pub fn s21(&self) -> &[Option<Complex64>] {
        &self.s21
    }

    pub fn re_zext_ohm(&self) -> &[Option<f64>] {
        &self.re_zext_ohm
    }

    pub fn filter_factor(&self) -> &[Option<f64>] {
        &self.filter_factor
    }

    pub fn t1_unfiltered_s(&self) -> &[Option<f64>] {
        &self.t1_unfiltered_s
    }

    pub fn t1_filtered_s(&self) -> &[Option<f64>] {
        &self.t1_filtered_s
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn set_s11(&mut self, i: usize, v: Complex64) {
        self.s11[i] = Some(v);
    }

    pub fn set_s21(&mut self, i: usize, v: Complex64) {
        self.s21[i] = Some(v);
    }

    pub fn set_re_zext(&mut self, i: usize, v: f64) {
        self.re_zext_ohm[i] = Some(v);
    }

    pub fn set_filter_factor(&mut self, i: usize, v: f64) {
        self.filter_factor[i] = Some(v);
    }

    pub fn set_t1_unfiltered(&mut self, i: usize, v: f64) {
        self.t1_unfiltered_s[i] = Some(v);
    }

    pub fn set_t1_filtered(&mut self, i: usize, v: f64) {
        self.t1_filtered_s[i] = Some(v);
    }

    pub fn push_warning(&mut self, msg: String) {
        self.warnings.push(msg);
    }
}
