//! Two-port network algebra: chain (ABCD) matrices, ladder construction,
//! scattering parameters, and environmental-impedance extraction.
//!
//! Chain matrices compose by multiplication under cascade, so a ladder of
//! alternating series and shunt resonators is a fold over its elements. All
//! networks built here are reciprocal (unit determinant) and, for lossless
//! elements, unitary in their scattering matrix.

use crate::bvd::{BvdResonator, ResonatorSpec};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const TAU: f64 = 2.0 * PI;

/// Tolerance on `|S11| ≤ 1` for measured reflection data; samples beyond it
/// are flagged as errors rather than silently clamped.
pub const S11_NOISE_TOL: f64 = 1e-6;

/// Magnitude cap for element impedances/admittances when an ideal lossless
/// element is evaluated exactly on a pole or zero of its admittance. The cap
/// keeps cascade arithmetic finite; it sits far above any value reachable by
/// off-pole floating-point evaluation.
const ELEMENT_CAP: f64 = 1e16;

/// Errors from network construction and conversions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    /// Frequency grids must be non-empty.
    #[error("frequency grid is empty")]
    EmptyGrid,
    /// Frequency grids must be strictly increasing and positive.
    #[error("frequency grid must be positive and strictly increasing (violated at index {index})")]
    InvalidGrid { index: usize },
    /// `|S11|` beyond the unit circle past measurement-noise tolerance.
    #[error("|S11| = {mag} exceeds 1 beyond the noise tolerance {S11_NOISE_TOL}")]
    ReflectionOutOfRange { mag: f64 },
    /// A ladder or network parameter violates the type invariants.
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
}

fn validate_grid(freqs_hz: &[f64]) -> Result<(), NetworkError> {
    if freqs_hz.is_empty() {
        return Err(NetworkError::EmptyGrid);
    }
    let mut prev = 0.0;
    for (index, &f) in freqs_hz.iter().enumerate() {
        if !(f > prev && f.is_finite()) {
            return Err(NetworkError::InvalidGrid { index });
        }
        prev = f;
    }
    Ok(())
}

/// Linear frequency grid from `start_hz` to `stop_hz` inclusive. A zero-span
/// request (`start == stop`) yields the single frequency regardless of
/// `points`.
pub fn linear_grid(start_hz: f64, stop_hz: f64, points: usize) -> Result<Vec<f64>, NetworkError> {
    if !(start_hz > 0.0 && stop_hz >= start_hz && stop_hz.is_finite()) {
        return Err(NetworkError::InvalidSpec(format!(
            "grid span must satisfy 0 < start <= stop, got {start_hz}..{stop_hz}"
        )));
    }
    if start_hz == stop_hz {
        return Ok(vec![start_hz]);
    }
    if points < 2 {
        return Err(NetworkError::InvalidSpec(format!(
            "a non-zero span needs at least 2 points, got {points}"
        )));
    }
    let n = points as f64 - 1.0;
    Ok((0..points)
        .map(|i| start_hz + (stop_hz - start_hz) * i as f64 / n)
        .collect())
}

/// 2×2 chain matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    /// Through connection, `[[1, 0], [0, 1]]`.
    pub fn identity() -> Self {
        Abcd {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Series impedance `z`: `[[1, z], [0, 1]]`.
    pub fn series(z: Complex64) -> Self {
        Abcd {
            a: Complex64::new(1.0, 0.0),
            b: z,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Shunt admittance `y`: `[[1, 0], [y, 1]]`.
    pub fn shunt(y: Complex64) -> Self {
        Abcd {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: y,
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// `self` followed by `rhs` (matrix product `self · rhs`).
    pub fn cascade(&self, rhs: &Abcd) -> Abcd {
        Abcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// `ad − bc`; 1 for every reciprocal network.
    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Standard conversion to scattering parameters with equal real port
    /// impedance `z0`. Returns `None` when the conversion denominator is
    /// singular or the entries are not representable (pathological ideal
    /// elements).
    pub fn to_s(&self, z0: f64) -> Option<SParams> {
        let b_over = self.b / z0;
        let c_z0 = self.c * z0;
        let den = self.a + b_over + c_z0 + self.d;
        if !den.is_finite() || den.norm_sqr() == 0.0 {
            return None;
        }
        let s11 = (self.a + b_over - c_z0 - self.d) / den;
        let s21 = Complex64::new(2.0, 0.0) / den;
        let s12 = 2.0 * self.determinant() / den;
        let s22 = (-self.a + b_over - c_z0 + self.d) / den;
        let s = SParams { s11, s12, s21, s22 };
        if s.s11.is_finite() && s.s12.is_finite() && s.s21.is_finite() && s.s22.is_finite() {
            Some(s)
        } else {
            None
        }
    }

    /// Input impedance at port 1 with port 2 terminated in `z_load`.
    pub fn input_impedance(&self, z_load: Complex64) -> Complex64 {
        (self.a * z_load + self.b) / (self.c * z_load + self.d)
    }
}

/// Scattering parameters at one frequency, single real reference impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl SParams {
    /// Insertion loss `−20·log10|S21|` in dB (`+∞` at a transmission zero).
    pub fn insertion_loss_db(&self) -> f64 {
        let mag = self.s21.norm();
        if mag == 0.0 {
            f64::INFINITY
        } else {
            -20.0 * mag.log10()
        }
    }
}

/// Ladder bandpass filter: `order` identical series resonators with
/// `order − 1` shunt nodes between them, each shunt node carrying
/// `shunt_multiplicity` identical parallel resonators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderFilterSpec {
    order: usize,
    series: ResonatorSpec,
    shunt: ResonatorSpec,
    shunt_multiplicity: usize,
    z0: f64,
}

impl LadderFilterSpec {
    /// Validates `order ≥ 1`, `shunt_multiplicity ≥ 1`, `z0 > 0`.
    pub fn new(
        order: usize,
        series: ResonatorSpec,
        shunt: ResonatorSpec,
        shunt_multiplicity: usize,
        z0: f64,
    ) -> Result<Self, NetworkError> {
        if order < 1 {
            return Err(NetworkError::InvalidSpec("order must be >= 1".into()));
        }
        if shunt_multiplicity < 1 {
            return Err(NetworkError::InvalidSpec(
                "shunt multiplicity must be >= 1".into(),
            ));
        }
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(NetworkError::InvalidSpec(format!(
                "reference impedance must be positive, got {z0}"
            )));
        }
        Ok(LadderFilterSpec {
            order,
            series,
            shunt,
            shunt_multiplicity,
            z0,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn series(&self) -> &ResonatorSpec {
        &self.series
    }

    pub fn shunt(&self) -> &ResonatorSpec {
        &self.shunt
    }

    pub fn shunt_multiplicity(&self) -> usize {
        self.shunt_multiplicity
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Design-rule check: the shunt antiresonance should sit within 1% of
    /// the series resonance to define a clean passband center. Returns a
    /// warning message when violated; never an error.
    pub fn design_rule_warning(&self) -> Option<String> {
        let f_series = self.series.f_hz();
        let (_, f_a_shunt) = self.shunt.to_bvd().resonance_antiresonance();
        let rel = (f_a_shunt - f_series).abs() / f_series;
        if rel > 0.01 {
            Some(format!(
                "shunt antiresonance {:.6e} Hz is {:.2}% away from the series resonance {:.6e} Hz (design rule: within 1%)",
                f_a_shunt,
                100.0 * rel,
                f_series
            ))
        } else {
            None
        }
    }

    /// Chain matrix of the ladder at angular frequency `omega`:
    /// `series · (shunt · series)^(order−1)`.
    pub fn abcd_at(&self, omega: f64) -> Abcd {
        let series = self.series.to_bvd();
        let shunt = self.shunt.to_bvd();
        ladder_abcd(&series, &shunt, self.order, self.shunt_multiplicity, omega)
    }

    /// Builds the frequency-sampled two-port over `freqs_hz`.
    pub fn build(&self, freqs_hz: &[f64]) -> Result<TwoPortNetwork, NetworkError> {
        validate_grid(freqs_hz)?;
        let series = self.series.to_bvd();
        let shunt = self.shunt.to_bvd();
        let abcd = freqs_hz
            .iter()
            .map(|&f| ladder_abcd(&series, &shunt, self.order, self.shunt_multiplicity, TAU * f))
            .collect();
        TwoPortNetwork::new(freqs_hz.to_vec(), abcd, self.z0)
    }

    /// Input impedance seen looking into the (symmetric) ladder with the far
    /// port terminated in `z0`: the environmental impedance `Z_ext(ω)` the
    /// readout resonator sees through the filter.
    pub fn zext_at(&self, omega: f64) -> Complex64 {
        self.abcd_at(omega)
            .input_impedance(Complex64::new(self.z0, 0.0))
    }
}

/// Rescales `v` onto magnitude `cap` when it exceeds the cap or is not
/// finite (exact lossless pole); identity otherwise.
fn clamp_magnitude(v: Complex64, cap: f64) -> Complex64 {
    let n = v.norm();
    if !n.is_finite() {
        Complex64::new(0.0, cap)
    } else if n > cap {
        v * (cap / n)
    } else {
        v
    }
}

/// Series-arm impedance of a resonator at `omega`, with exact lossless
/// poles/zeros of the admittance saturated to `ELEMENT_CAP`.
fn series_impedance(res: &BvdResonator, omega: f64) -> Complex64 {
    let y = res.admittance_raw(omega);
    if !y.is_finite() {
        return Complex64::new(0.0, 0.0); // admittance pole: perfect wire
    }
    if y.norm() <= 1.0 / ELEMENT_CAP {
        return Complex64::new(0.0, ELEMENT_CAP); // admittance zero: open
    }
    clamp_magnitude(y.finv(), ELEMENT_CAP)
}

/// Shunt-node admittance (`multiplicity` resonators in parallel) at `omega`.
fn shunt_admittance(res: &BvdResonator, multiplicity: usize, omega: f64) -> Complex64 {
    let y = res.admittance_raw(omega);
    clamp_magnitude(y * multiplicity as f64, ELEMENT_CAP)
}

fn ladder_abcd(
    series: &BvdResonator,
    shunt: &BvdResonator,
    order: usize,
    multiplicity: usize,
    omega: f64,
) -> Abcd {
    let z_s = Abcd::series(series_impedance(series, omega));
    let mut m = z_s;
    for _ in 1..order {
        let y_p = Abcd::shunt(shunt_admittance(shunt, multiplicity, omega));
        m = m.cascade(&y_p).cascade(&z_s);
    }
    m
}

/// Frequency-sampled two-port held as per-frequency chain matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPortNetwork {
    freqs_hz: Vec<f64>,
    abcd: Vec<Abcd>,
    z0: f64,
}

impl TwoPortNetwork {
    /// Validates the grid and the alignment of the matrix list.
    pub fn new(freqs_hz: Vec<f64>, abcd: Vec<Abcd>, z0: f64) -> Result<Self, NetworkError> {
        validate_grid(&freqs_hz)?;
        if freqs_hz.len() != abcd.len() {
            return Err(NetworkError::InvalidSpec(format!(
                "grid has {} points but {} matrices were supplied",
                freqs_hz.len(),
                abcd.len()
            )));
        }
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(NetworkError::InvalidSpec(format!(
                "reference impedance must be positive, got {z0}"
            )));
        }
        Ok(TwoPortNetwork { freqs_hz, abcd, z0 })
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn abcd(&self) -> &[Abcd] {
        &self.abcd
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// Per-frequency scattering parameters; `None` flags frequencies where
    /// the conversion is non-representable.
    pub fn s_params(&self) -> Vec<Option<SParams>> {
        self.abcd.iter().map(|m| m.to_s(self.z0)).collect()
    }

    /// Per-frequency insertion loss in dB.
    pub fn insertion_loss_db(&self) -> Vec<Option<f64>> {
        self.abcd
            .iter()
            .map(|m| m.to_s(self.z0).map(|s| s.insertion_loss_db()))
            .collect()
    }

    /// Per-frequency input impedance at port 1 with port 2 terminated in
    /// the reference impedance.
    pub fn input_impedance_terminated(&self) -> Vec<Complex64> {
        let z_load = Complex64::new(self.z0, 0.0);
        self.abcd.iter().map(|m| m.input_impedance(z_load)).collect()
    }

    /// Width of the contiguous region around the global `|S21|` maximum
    /// where the insertion loss stays within `level_db` of the peak. Band
    /// edges are refined by linear interpolation of `|S21|` between grid
    /// samples; `None` when the network has no usable passband.
    pub fn bandwidth(&self, level_db: f64) -> Option<BandwidthReport> {
        let mags: Vec<Option<f64>> = self
            .s_params()
            .iter()
            .map(|s| s.map(|p| p.s21.norm()))
            .collect();
        let (peak_idx, peak_mag) = mags
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|v| (i, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if peak_mag <= 0.0 {
            return None;
        }
        let threshold = peak_mag * 10f64.powf(-level_db / 20.0);
        let at_or_above = |i: usize| mags[i].is_some_and(|m| m >= threshold);

        let mut lo = peak_idx;
        while lo > 0 && at_or_above(lo - 1) {
            lo -= 1;
        }
        let mut hi = peak_idx;
        while hi + 1 < mags.len() && at_or_above(hi + 1) {
            hi += 1;
        }

        let cross = |inside: usize, outside: usize| -> f64 {
            match (mags[inside], mags[outside]) {
                (Some(mi), Some(mo)) if (mi - mo).abs() > 0.0 => {
                    let t = (mi - threshold) / (mi - mo);
                    self.freqs_hz[inside] + t * (self.freqs_hz[outside] - self.freqs_hz[inside])
                }
                _ => self.freqs_hz[inside],
            }
        };
        let lower_edge_hz = if lo > 0 { cross(lo, lo - 1) } else { self.freqs_hz[lo] };
        let upper_edge_hz = if hi + 1 < mags.len() {
            cross(hi, hi + 1)
        } else {
            self.freqs_hz[hi]
        };

        let grid_resolution_hz = self
            .freqs_hz
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);

        Some(BandwidthReport {
            peak_freq_hz: self.freqs_hz[peak_idx],
            peak_s21_mag: peak_mag,
            lower_edge_hz,
            upper_edge_hz,
            width_hz: upper_edge_hz - lower_edge_hz,
            grid_resolution_hz,
        })
    }
}

/// Passband summary from [`TwoPortNetwork::bandwidth`]. The grid resolution
/// is reported alongside the edges since dips narrower than a grid step
/// cannot be resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthReport {
    pub peak_freq_hz: f64,
    pub peak_s21_mag: f64,
    pub lower_edge_hz: f64,
    pub upper_edge_hz: f64,
    pub width_hz: f64,
    pub grid_resolution_hz: f64,
}

/// Environmental resistance from a reflection coefficient:
/// `Re Z_ext = Z0·(1 − |S11|²)/|1 − S11|²`.
///
/// `S11 = 1` (ideal open) reports `+∞`. Tiny negative results from rounding
/// (≥ `−1e-9·z0`) are clamped to zero; `|S11| > 1 + 1e-6` is an error so
/// noisy measured samples are flagged rather than silently clamped.
pub fn re_zext_from_s11(s11: Complex64, z0: f64) -> Result<f64, NetworkError> {
    let mag = s11.norm();
    if !mag.is_finite() || mag > 1.0 + S11_NOISE_TOL {
        return Err(NetworkError::ReflectionOutOfRange { mag });
    }
    let den = (Complex64::new(1.0, 0.0) - s11).norm_sqr();
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    let re = z0 * (1.0 - mag * mag) / den;
    if re < 0.0 && re >= -1e-9 * z0 {
        Ok(0.0)
    } else {
        Ok(re)
    }
}
