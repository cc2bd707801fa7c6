//! Butterworth–van Dyke model of a single piezoelectric resonator.
//!
//! The equivalent circuit is a static (electrostatic) capacitance `C_g` in
//! parallel with a motional series RLC branch. Three relations tie the
//! circuit values to the physical specification:
//!
//! - resonance `ω_m = 1/√(L C)`,
//! - piezoelectric coupling `k² = π² C / (8 C_g)`,
//! - quality factor `Q = π² / (8 ω_m C R)`.
//!
//! Note that this `Q` relation carries a `π²/8` factor relative to the
//! textbook series-RLC quality factor `1/(ω_m C R)`; the cited form is
//! implemented here, so `Q_textbook = (8/π²)·Q`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Largest representable coupling, `8/π²`. Couplings at or above this bound
/// are rejected when building a [`ResonatorSpec`].
pub const K2_MAX: f64 = 8.0 / (PI * PI);

/// Errors from resonator construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BvdError {
    /// Admittance is only defined for positive angular frequency.
    #[error("angular frequency must be positive and finite, got {omega}")]
    NonPositiveFrequency { omega: f64 },
    /// Coupling outside `(0, 8/π²)`.
    #[error("piezoelectric coupling k2 = {k2} outside the representable range (0, 8/pi^2)")]
    CouplingOutOfRange { k2: f64 },
    /// Antiresonance must lie strictly above the resonance.
    #[error("antiresonance must exceed resonance: got f_r = {f_r} Hz, f_a = {f_a} Hz")]
    FrequencyOrder { f_r: f64, f_a: f64 },
    /// A circuit value violates the type invariants.
    #[error("invalid resonator: {0}")]
    InvalidResonator(String),
    /// A spec value violates the type invariants.
    #[error("invalid resonator spec: {0}")]
    InvalidSpec(String),
}

/// Quality factor with the lossless limit as a first-class value rather than
/// a sentinel float, so lossless sweeps stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quality {
    /// Finite, strictly positive quality factor.
    Finite(f64),
    /// The lossless limit, `R = 0`.
    Unbounded,
}

impl Quality {
    /// Builds a finite quality factor; rejects non-positive or non-finite
    /// values (use [`Quality::Unbounded`] for the lossless limit).
    pub fn finite(q: f64) -> Result<Self, BvdError> {
        if q > 0.0 && q.is_finite() {
            Ok(Quality::Finite(q))
        } else {
            Err(BvdError::InvalidSpec(format!(
                "quality factor must be positive and finite, got {q}"
            )))
        }
    }

    /// Interface-boundary conversion: `f64::INFINITY` maps to `Unbounded`.
    pub fn from_f64(q: f64) -> Result<Self, BvdError> {
        if q == f64::INFINITY {
            Ok(Quality::Unbounded)
        } else {
            Quality::finite(q)
        }
    }

    /// The value as a float, `f64::INFINITY` when unbounded.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Quality::Finite(q) => q,
            Quality::Unbounded => f64::INFINITY,
        }
    }

    /// True for the lossless limit.
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Quality::Unbounded)
    }
}

/// One piezoelectric resonator as the four BVD circuit values.
///
/// All values are SI: farads, ohms, henries. `r = 0` encodes the lossless
/// limit. Values are immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvdResonator {
    c_g: f64,
    r: f64,
    l: f64,
    c: f64,
}

impl BvdResonator {
    /// Validates `c_g > 0`, `l > 0`, `c > 0`, `r ≥ 0` and a finite positive
    /// derived resonance.
    pub fn new(c_g: f64, r: f64, l: f64, c: f64) -> Result<Self, BvdError> {
        if !(c_g > 0.0 && c_g.is_finite()) {
            return Err(BvdError::InvalidResonator(format!(
                "static capacitance must be positive, got {c_g}"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(BvdError::InvalidResonator(format!(
                "motional inductance must be positive, got {l}"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(BvdError::InvalidResonator(format!(
                "motional capacitance must be positive, got {c}"
            )));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(BvdError::InvalidResonator(format!(
                "motional resistance must be non-negative, got {r}"
            )));
        }
        let res = BvdResonator { c_g, r, l, c };
        let omega_m = res.omega_m();
        if !(omega_m > 0.0 && omega_m.is_finite()) {
            return Err(BvdError::InvalidResonator(format!(
                "derived resonance 1/sqrt(LC) is not finite and positive (L = {l}, C = {c})"
            )));
        }
        Ok(res)
    }

    /// Static (electrostatic) capacitance, farads.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Motional resistance, ohms.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Motional inductance, henries.
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Motional capacitance, farads.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Series-branch resonance `1/√(LC)`, rad/s.
    pub fn omega_m(&self) -> f64 {
        1.0 / (self.l * self.c).sqrt()
    }

    /// Complex admittance at angular frequency `omega` (rad/s), using the
    /// `e^{+iωt}` convention: `Y = iωC_g + 1/(R + iωL + 1/(iωC))`.
    ///
    /// A lossless resonator evaluated exactly on its series resonance has an
    /// admittance pole; the returned value then has infinite magnitude.
    pub fn admittance(&self, omega: f64) -> Result<Complex64, BvdError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(BvdError::NonPositiveFrequency { omega });
        }
        Ok(self.admittance_raw(omega))
    }

    /// Formula evaluation without the domain check. Valid for any nonzero
    /// real `omega`; negative frequencies are the analytic continuation.
    pub(crate) fn admittance_raw(&self, omega: f64) -> Complex64 {
        let series = Complex64::new(self.r, omega * self.l - 1.0 / (omega * self.c));
        let static_y = Complex64::new(0.0, omega * self.c_g);
        if series.norm_sqr() == 0.0 {
            // exact lossless pole
            return Complex64::new(f64::INFINITY, f64::INFINITY);
        }
        static_y + series.finv()
    }

    /// Physical specification equivalent to these circuit values. Exact
    /// inverse of [`ResonatorSpec::to_bvd`]; `r = 0` reports unbounded `Q`.
    pub fn to_specs(&self) -> ResonatorSpec {
        let omega_m = self.omega_m();
        let k2 = PI * PI * self.c / (8.0 * self.c_g);
        let q = if self.r == 0.0 {
            Quality::Unbounded
        } else {
            Quality::Finite(PI * PI / (8.0 * omega_m * self.c * self.r))
        };
        ResonatorSpec {
            omega_m,
            k2,
            q,
            c_g: self.c_g,
        }
    }

    /// `(f_R, f_A)` in Hz: the motional resonance and the real positive zero
    /// of the lossless admittance, `f_A = f_R·√(1 + C/C_g)`.
    ///
    /// `f_A` is defined from the lossless circuit even for lossy resonators;
    /// the true lossy admittance zero is complex, while `f_A` is used as a
    /// design quantity.
    pub fn resonance_antiresonance(&self) -> (f64, f64) {
        let f_r = self.omega_m() / (2.0 * PI);
        let f_a = f_r * (1.0 + self.c / self.c_g).sqrt();
        (f_r, f_a)
    }
}

/// Physical specification of a resonator: resonance, coupling, quality
/// factor, and static capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorSpec {
    omega_m: f64,
    k2: f64,
    q: Quality,
    c_g: f64,
}

impl ResonatorSpec {
    /// Validates `omega_m > 0`, `0 < k2 < 8/π²`, `q > 0`, `c_g > 0`.
    pub fn new(omega_m: f64, k2: f64, q: Quality, c_g: f64) -> Result<Self, BvdError> {
        if !(omega_m > 0.0 && omega_m.is_finite()) {
            return Err(BvdError::InvalidSpec(format!(
                "resonance must be positive and finite, got {omega_m} rad/s"
            )));
        }
        if !(k2 > 0.0) || k2 >= K2_MAX {
            return Err(BvdError::CouplingOutOfRange { k2 });
        }
        if let Quality::Finite(qv) = q {
            if !(qv > 0.0 && qv.is_finite()) {
                return Err(BvdError::InvalidSpec(format!(
                    "quality factor must be positive and finite, got {qv}"
                )));
            }
        }
        if !(c_g > 0.0 && c_g.is_finite()) {
            return Err(BvdError::InvalidSpec(format!(
                "static capacitance must be positive, got {c_g}"
            )));
        }
        Ok(ResonatorSpec {
            omega_m,
            k2,
            q,
            c_g,
        })
    }

    /// Boundary constructor taking the resonance in Hz.
    pub fn from_hz(f_hz: f64, k2: f64, q: Quality, c_g: f64) -> Result<Self, BvdError> {
        ResonatorSpec::new(2.0 * PI * f_hz, k2, q, c_g)
    }

    /// Resonance, rad/s.
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    /// Resonance, Hz.
    pub fn f_hz(&self) -> f64 {
        self.omega_m / (2.0 * PI)
    }

    /// Piezoelectric coupling `k²`.
    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Quality factor.
    pub fn q(&self) -> Quality {
        self.q
    }

    /// Static capacitance, farads.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Circuit values realizing this specification:
    /// `C = 8 k² C_g / π²`, `L = 1/(ω_m² C)`, `R = π²/(8 ω_m C Q)`.
    ///
    /// Round-trips with [`BvdResonator::to_specs`] to better than 1e-12
    /// relative error; unbounded `Q` gives `R = 0` exactly.
    pub fn to_bvd(&self) -> BvdResonator {
        let c = 8.0 * self.k2 * self.c_g / (PI * PI);
        let l = 1.0 / (self.omega_m * self.omega_m * c);
        let r = match self.q {
            Quality::Unbounded => 0.0,
            Quality::Finite(q) => PI * PI / (8.0 * self.omega_m * c * q),
        };
        BvdResonator {
            c_g: self.c_g,
            r,
            l,
            c,
        }
    }
}

/// Coupling from the resonance/antiresonance spacing,
/// `k² = (π²/8)·(f_A² − f_R²)/f_A²`.
///
/// For a BVD resonator with `f_A = f_R·√(1 + C/C_g)` this equals the circuit
/// coupling `π²C/(8C_g)` divided by `(1 + C/C_g)`; the two definitions agree
/// to first order in the coupling.
pub fn k2_from_freqs(f_r: f64, f_a: f64) -> Result<f64, BvdError> {
    if !(f_r > 0.0 && f_a > f_r && f_a.is_finite()) {
        return Err(BvdError::FrequencyOrder { f_r, f_a });
    }
    Ok((PI * PI / 8.0) * (f_a * f_a - f_r * f_r) / (f_a * f_a))
}
