//! Circuit-QED decay physics: Purcell rates, the filter factor, filtered
//! lifetime sweeps, and the perturbative two-port shift formulas.
//!
//! The qubit-resonator pair is the Jaynes–Cummings model. Its one-excitation
//! block diagonalizes exactly, giving the "qubit-like" polariton a resonator
//! weight `sin²θ₁` with `tan 2θ₁ = 2g/Δ`; the Purcell decay rate is that
//! weight times the resonator linewidth `κ`, with no small-`g/Δ` assumption.
//! A filter reshapes the environment: the decay picks up the ratio of the
//! real environmental impedances seen at the qubit and resonator frequencies.

use crate::sweep::SweepResult;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const TAU: f64 = 2.0 * PI;

/// Errors from Purcell-rate and perturbative-shift evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PurcellError {
    /// A rate or frequency parameter violates the type invariants.
    #[error("invalid readout system: {0}")]
    InvalidSystem(String),
    /// The resonator must see dissipation for `κ` to be defined.
    #[error("Re Z_ext({omega} rad/s) = {value} is not positive; the sweep grid or model is inconsistent")]
    NonPositiveReZext { omega: f64, value: f64 },
    /// `|λ|` below tolerance: the two-port has no isolated resonance there.
    #[error("degenerate mode: |d det Y/dω| = {lambda_mag} at ω_r = {omega_r} is below tolerance")]
    DegenerateMode { lambda_mag: f64, omega_r: f64 },
    /// Central finite differences failed to converge.
    #[error("finite-difference derivative of {label} did not converge at ω = {omega} (last relative change {last_err})")]
    DerivativeNotConverged {
        label: &'static str,
        omega: f64,
        last_err: f64,
    },
    /// Root refinement failed near the supplied guess.
    #[error("root refinement of {label} failed near ω = {guess} (last iterate {last}, |f| = {residual})")]
    RootNotFound {
        label: &'static str,
        guess: f64,
        last: f64,
        residual: f64,
    },
}

/// Qubit/readout-resonator parameters for Purcell calculations. All
/// frequencies and rates in rad/s; the detuning `Δ = ω_q − ω_r` is always
/// derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSystem {
    omega_r: f64,
    omega_q: f64,
    g: f64,
    kappa: f64,
    z0: f64,
}

impl ReadoutSystem {
    /// Validates that all rates and frequencies are positive and finite.
    pub fn new(omega_r: f64, omega_q: f64, g: f64, kappa: f64, z0: f64) -> Result<Self, PurcellError> {
        for (name, v) in [
            ("omega_r", omega_r),
            ("omega_q", omega_q),
            ("g", g),
            ("kappa", kappa),
            ("z0", z0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PurcellError::InvalidSystem(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(ReadoutSystem {
            omega_r,
            omega_q,
            g,
            kappa,
            z0,
        })
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn omega_q(&self) -> f64 {
        self.omega_q
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Detuning `Δ = ω_q − ω_r`, rad/s.
    pub fn detuning(&self) -> f64 {
        self.omega_q - self.omega_r
    }

    /// Same system evaluated at a different qubit frequency (for sweeps).
    pub fn with_omega_q(&self, omega_q: f64) -> Result<Self, PurcellError> {
        ReadoutSystem::new(self.omega_r, omega_q, self.g, self.kappa, self.z0)
    }
}

/// Golden-rule Purcell decay rate `γ = g²κ/(Δ² + (κ/2)²)` (rad/s). Reduces
/// to `g²κ/Δ²` for `Δ ≫ κ, g`.
pub fn purcell_rate_lorentzian(sys: &ReadoutSystem) -> f64 {
    let d = sys.detuning();
    sys.g * sys.g * sys.kappa / (d * d + 0.25 * sys.kappa * sys.kappa)
}

/// Purcell decay rate from exact diagonalization of the one-excitation
/// Jaynes–Cummings block: `γ = κ·sin²θ₁` with `tan 2θ₁ = 2g/Δ`.
///
/// Evaluated in the cancellation-free form
/// `γ = 2κg² / (R(R + |Δ|))`, `R = √(Δ² + 4g²)`,
/// which is exact and handles `Δ = 0` (maximal mixing, `γ = κ/2`). The rate
/// is even in `Δ`, never exceeds `κ/2`, and approaches `g²κ/Δ²` with
/// relative error `3(g/Δ)² + O((g/Δ)⁴)`.
pub fn jc_purcell_rate(sys: &ReadoutSystem) -> f64 {
    let d = sys.detuning();
    let root = (d * d + 4.0 * sys.g * sys.g).sqrt();
    2.0 * sys.kappa * sys.g * sys.g / (root * (root + d.abs()))
}

/// Filter factor `Re Z_ext(ω_q) / Re Z_ext(ω_r)`: the lifetime-protection
/// ratio. `zext` maps angular frequency (rad/s) to complex impedance.
///
/// Errors when the resonator sees no dissipation (`Re Z_ext(ω_r) ≤ 0`),
/// which signals a grid or model problem rather than a filter property.
pub fn filter_factor<Z: Fn(f64) -> Complex64>(
    zext: Z,
    omega_q: f64,
    omega_r: f64,
) -> Result<f64, PurcellError> {
    let re_r = zext(omega_r).re;
    if !(re_r > 0.0) {
        return Err(PurcellError::NonPositiveReZext {
            omega: omega_r,
            value: re_r,
        });
    }
    Ok(zext(omega_q).re / re_r)
}

/// Filtered and unfiltered lifetime spectra over a qubit-frequency grid
/// (Hz). Per point: unfiltered `T1 = 1/γ_JC`, filtered `T1 = T1/factor`
/// with `g`, `κ` held constant.
///
/// The resonator-frequency denominator `Re Z_ext(ω_r) ≤ 0` aborts the sweep
/// (domain error); per-point problems (non-finite or negative
/// `Re Z_ext(ω_q)`) flag that point's cells instead. A zero point gives
/// infinite filtered lifetime, the ideal-stopband limit.
pub fn filtered_t1_spectrum<Z: Fn(f64) -> Complex64>(
    sys: &ReadoutSystem,
    zext: Z,
    qubit_freqs_hz: &[f64],
) -> Result<SweepResult, PurcellError> {
    let re_r = zext(sys.omega_r()).re;
    if !(re_r > 0.0) {
        return Err(PurcellError::NonPositiveReZext {
            omega: sys.omega_r(),
            value: re_r,
        });
    }
    let mut out = SweepResult::new(qubit_freqs_hz.to_vec());
    if let (Some(&first), Some(&last)) = (qubit_freqs_hz.first(), qubit_freqs_hz.last()) {
        let f_r = sys.omega_r() / TAU;
        if f_r < first || f_r > last {
            out.push_warning(format!(
                "resonator frequency {f_r:.6e} Hz lies outside the sweep span {first:.6e}..{last:.6e} Hz"
            ));
        }
    }
    for (i, &f) in qubit_freqs_hz.iter().enumerate() {
        let omega_q = TAU * f;
        let at_q = sys.with_omega_q(omega_q)?;
        let t1_unfiltered = 1.0 / jc_purcell_rate(&at_q);
        out.set_t1_unfiltered(i, t1_unfiltered);

        let re_q = zext(omega_q).re;
        if re_q.is_finite() {
            out.set_re_zext(i, re_q);
        }
        if re_q.is_finite() && re_q >= 0.0 {
            let factor = re_q / re_r;
            out.set_filter_factor(i, factor);
            let t1_filtered = if factor == 0.0 {
                f64::INFINITY
            } else {
                t1_unfiltered / factor
            };
            out.set_t1_filtered(i, t1_filtered);
        }
    }
    Ok(out)
}

/// 2×2 complex admittance matrix, indexed `[row][column]`.
pub type AdmittanceMatrix = [[Complex64; 2]; 2];

/// Inputs to the perturbative shift formulas: the reactive two-port `Ȳ` of
/// the readout structure (with the coupling-capacitor susceptances already
/// absorbed), the qubit branch impedance, the environmental impedance, and
/// the two small coupling capacitances (farads).
///
/// All three closures take angular frequency in rad/s and must be stateless;
/// smallness of `c1`, `c2` is validated post hoc by checking the computed
/// shifts against the mode spacing.
#[derive(Debug, Clone, Copy)]
pub struct PerturbativeInputs<Y, Q, E>
where
    Y: Fn(f64) -> AdmittanceMatrix,
    Q: Fn(f64) -> Complex64,
    E: Fn(f64) -> Complex64,
{
    pub ybar: Y,
    pub zq: Q,
    pub zext: E,
    pub c1: f64,
    pub c2: f64,
}

/// Output of [`perturbative_shifts`]: refined mode frequencies, complex
/// frequency shifts, extracted coupling and linewidths, and the determinant
/// slope `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeShifts {
    /// Refined zero of `det Ȳ(ω)` near the resonator guess, rad/s.
    pub omega_r: f64,
    /// Refined zero of `Y_q = 1/Z_q` near the qubit guess, rad/s.
    pub omega_q: f64,
    /// Complex resonator frequency shift.
    pub delta_omega_r: Complex64,
    /// Complex qubit frequency shift.
    pub delta_omega_q: Complex64,
    /// Extracted coupling `g²`, rad²/s².
    pub g2: f64,
    /// `λ = d(det Ȳ)/dω` at `ω_r`.
    pub lambda: Complex64,
    /// Resonator linewidth `κ = 2·Im δω_r`, rad/s.
    pub kappa: f64,
    /// Qubit linewidth `γ_q = 2·Im δω_q`, rad/s.
    pub gamma_q: f64,
    /// Post-hoc validation notes (large shifts, non-reactive inputs).
    pub warnings: Vec<String>,
}

fn det2(m: &AdmittanceMatrix) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Adaptive central difference with one Richardson refinement. Starts at
/// step `h0`, shrinks until halving the step changes the result by less
/// than 1e-6 relative.
fn central_derivative<F: Fn(f64) -> Complex64>(
    f: &F,
    x: f64,
    h0: f64,
    label: &'static str,
) -> Result<Complex64, PurcellError> {
    let mut h = h0;
    let mut last_err = f64::INFINITY;
    for _ in 0..10 {
        let d_h = (f(x + h) - f(x - h)) / (2.0 * h);
        let d_h2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
        let refined = (4.0 * d_h2 - d_h) / 3.0;
        let scale = refined.norm();
        if refined.is_finite() && scale > 0.0 {
            last_err = (refined - d_h2).norm() / scale;
            if last_err < 1e-6 {
                return Ok(refined);
            }
        }
        h *= 0.25;
        if h < x.abs() * 1e-13 {
            break;
        }
    }
    Err(PurcellError::DerivativeNotConverged {
        label,
        omega: x,
        last_err,
    })
}

/// Newton refinement of a real root of a complex-valued function of a real
/// frequency, with finite-difference slope.
fn refine_root<F: Fn(f64) -> Complex64>(
    f: &F,
    guess: f64,
    label: &'static str,
) -> Result<f64, PurcellError> {
    let mut x = guess;
    let mut residual = f64::INFINITY;
    for _ in 0..80 {
        let fx = f(x);
        residual = fx.norm();
        if !fx.is_finite() {
            break;
        }
        let h = 1e-7 * x.abs();
        let slope = (f(x + h) - f(x - h)) / (2.0 * h);
        if !slope.is_finite() || slope.norm_sqr() == 0.0 {
            break;
        }
        let step = (fx / slope).re;
        x -= step;
        if !(x > 0.0 && x.is_finite()) {
            break;
        }
        if step.abs() <= 1e-13 * x.abs() {
            return Ok(x);
        }
    }
    Err(PurcellError::RootNotFound {
        label,
        guess,
        last: x,
        residual,
    })
}

/// Lowest-order complex frequency shifts of the resonator and qubit modes
/// from the small coupling capacitances, evaluated exactly as displayed:
///
/// ```text
/// δω_r = + ω_r² C1² Ȳ22(ω_r) / (Y'_q(ω_q) Δ λ)  −  ω_r² C2² Z_ext(ω_r) Ȳ11(ω_r) / λ
/// δω_q = − ω_q² C1² Ȳ22(ω_q) / (Y'_q(ω_q) Δ λ)
///        + ω_q⁴ C1² C2² Z_ext(ω_q) Ȳ22(ω_q) Ȳ11(ω_q) / (Y'_q(ω_q) Δ² λ²)
/// ```
///
/// with `λ = d(det Ȳ)/dω` at `ω_r`, `Y_q = 1/Z_q`, `Δ = ω_q − ω_r`, and
/// `g² = −ω_q² C1² Ȳ22(ω_q) / (Y'_q(ω_q) λ)`. Linewidths are read off as
/// `κ, γ_q = 2·Im δω_{r,q}`. The mode frequencies are first refined from
/// the supplied guesses (zero of `det Ȳ` and of `Y_q` respectively);
/// derivatives use central differences with initial step `1e-6·ω` and one
/// Richardson refinement.
pub fn perturbative_shifts<Y, Q, E>(
    inp: &PerturbativeInputs<Y, Q, E>,
    omega_r_guess: f64,
    omega_q_guess: f64,
) -> Result<PerturbativeShifts, PurcellError>
where
    Y: Fn(f64) -> AdmittanceMatrix,
    Q: Fn(f64) -> Complex64,
    E: Fn(f64) -> Complex64,
{
    if !(inp.c1 > 0.0 && inp.c2 > 0.0) {
        return Err(PurcellError::InvalidSystem(format!(
            "coupling capacitances must be positive, got c1 = {}, c2 = {}",
            inp.c1, inp.c2
        )));
    }
    let det_ybar = |omega: f64| det2(&(inp.ybar)(omega));
    let y_q = |omega: f64| {
        let z = (inp.zq)(omega);
        if z.is_finite() {
            z.finv()
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let omega_r = refine_root(&det_ybar, omega_r_guess, "det Ybar (resonator mode)")?;
    let omega_q = refine_root(&y_q, omega_q_guess, "Y_q (qubit mode)")?;

    let lambda = central_derivative(&det_ybar, omega_r, 1e-6 * omega_r, "lambda = d det Ybar/dw")?;
    let yq_prime = central_derivative(&y_q, omega_q, 1e-6 * omega_q, "Y_q'")?;

    // Degeneracy test: compare |λ| with the determinant's own scale per
    // unit relative frequency.
    let det_scale = det_ybar(omega_r * (1.0 + 1e-3)).norm() / (1e-3 * omega_r);
    if lambda.norm() < 1e-9 * det_scale.max(f64::MIN_POSITIVE) {
        return Err(PurcellError::DegenerateMode {
            lambda_mag: lambda.norm(),
            omega_r,
        });
    }

    let mut warnings = Vec::new();
    let m_r = (inp.ybar)(omega_r);
    let m_q = (inp.ybar)(omega_q);
    for (name, omega, m) in [("ω_r", omega_r, &m_r), ("ω_q", omega_q, &m_q)] {
        let re_mag = m.iter().flatten().map(|v| v.re.abs()).fold(0.0, f64::max);
        let im_mag = m.iter().flatten().map(|v| v.im.abs()).fold(0.0, f64::max);
        if re_mag > 1e-9 * im_mag {
            warnings.push(format!(
                "Ybar({name} = {omega:.6e}) is not purely reactive (max |Re| = {re_mag:.3e})"
            ));
        }
    }

    let delta = omega_q - omega_r;
    let y22_r = m_r[1][1];
    let y11_r = m_r[0][0];
    let y22_q = m_q[1][1];
    let y11_q = m_q[0][0];
    let zext_r = (inp.zext)(omega_r);
    let zext_q = (inp.zext)(omega_q);
    let c1_sq = inp.c1 * inp.c1;
    let c2_sq = inp.c2 * inp.c2;

    let delta_omega_r = omega_r.powi(2) * c1_sq * y22_r / (yq_prime * delta * lambda)
        - omega_r.powi(2) * c2_sq * zext_r * y11_r / lambda;
    let delta_omega_q = -omega_q.powi(2) * c1_sq * y22_q / (yq_prime * delta * lambda)
        + omega_q.powi(4) * c1_sq * c2_sq * zext_q * y22_q * y11_q
            / (yq_prime * delta * delta * lambda * lambda);
    let g2 = (-omega_q.powi(2) * c1_sq * y22_q / (yq_prime * lambda)).re;

    let spacing = delta.abs();
    for (name, shift) in [("δω_r", delta_omega_r), ("δω_q", delta_omega_q)] {
        if shift.norm() > 0.01 * spacing {
            warnings.push(format!(
                "{name} = {:.3e} rad/s is not small against the mode spacing {spacing:.3e} rad/s; the capacitances are outside the perturbative regime",
                shift.norm()
            ));
        }
    }

    Ok(PerturbativeShifts {
        omega_r,
        omega_q,
        delta_omega_r,
        delta_omega_q,
        g2,
        lambda,
        kappa: 2.0 * delta_omega_r.im,
        gamma_q: 2.0 * delta_omega_q.im,
        warnings,
    })
}

/// Impedance of a parallel LC tank (the linearized transmon branch):
/// `Z_q(ω) = 1/(iωC + 1/(iωL))`, with a pole at `1/√(LC)`.
pub fn parallel_lc_impedance(l: f64, c: f64) -> impl Fn(f64) -> Complex64 + Copy {
    move |omega| {
        let y = Complex64::new(0.0, omega * c - 1.0 / (omega * l));
        if y.norm_sqr() == 0.0 {
            Complex64::new(f64::INFINITY, f64::INFINITY)
        } else {
            y.finv()
        }
    }
}

/// Symmetric lumped LC two-port for the readout resonator: shunt `C/2`,
/// series `L`, shunt `C/2` (π section). Its determinant vanishes at
/// `ω = 2/√(LC)`, which is the uncoupled resonator mode.
pub fn symmetric_lc_two_port(l: f64, c: f64) -> impl Fn(f64) -> AdmittanceMatrix + Copy {
    move |omega| {
        let y_half = Complex64::new(0.0, 0.5 * omega * c);
        let y_l = Complex64::new(0.0, -1.0 / (omega * l));
        [[y_half + y_l, -y_l], [-y_l, y_half + y_l]]
    }
}

/// Absorbs the coupling capacitors' susceptances into a core two-port:
/// `Ȳ = Y + diag(iωC1, iωC2)`, the matrix the shift formulas expect.
pub fn with_coupling_caps<Y: Fn(f64) -> AdmittanceMatrix>(
    core: Y,
    c1: f64,
    c2: f64,
) -> impl Fn(f64) -> AdmittanceMatrix {
    move |omega| {
        let mut m = core(omega);
        m[0][0] += Complex64::new(0.0, omega * c1);
        m[1][1] += Complex64::new(0.0, omega * c2);
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn sys(delta: f64, g: f64, kappa: f64) -> ReadoutSystem {
        let omega_r = TAU * 5e9;
        ReadoutSystem::new(omega_r, omega_r + delta, g, kappa, 50.0).unwrap()
    }

    #[test]
    fn lorentzian_on_resonance_limit() {
        let g = TAU * 10e6;
        let kappa = TAU * 2e6;
        // Δ exactly zero is not constructible from equal frequencies alone;
        // build it explicitly.
        let s = ReadoutSystem::new(TAU * 5e9, TAU * 5e9, g, kappa, 50.0).unwrap();
        assert_relative_eq!(purcell_rate_lorentzian(&s), 4.0 * g * g / kappa, max_relative = 1e-14);
    }

    #[test]
    fn lorentzian_500mhz_detuning_matches_direct_evaluation() {
        // g = κ = 2π×10 MHz, Δ = 2π×500 MHz
        let g = TAU * 10e6;
        let kappa = TAU * 10e6;
        let delta = TAU * 500e6;
        let s = sys(delta, g, kappa);
        let gamma = purcell_rate_lorentzian(&s);
        let expected = g * g * kappa / (delta * delta + 0.25 * kappa * kappa);
        assert_relative_eq!(gamma, expected, max_relative = 1e-14);
        // Within 0.01% of the large-Δ limit.
        let limit = g * g * kappa / (delta * delta);
        assert!((gamma / limit - 1.0).abs() < 1e-4);
        // Direct evaluation pins the lifetime near 40 μs.
        assert_relative_eq!(1.0 / gamma, 3.9792e-5, max_relative = 1e-3);
    }

    #[test]
    fn rates_are_even_in_detuning() {
        let g = TAU * 10e6;
        let kappa = TAU * 3e6;
        for d in [TAU * 40e6, TAU * 300e6, TAU * 2e9] {
            assert_eq!(
                purcell_rate_lorentzian(&sys(d, g, kappa)),
                purcell_rate_lorentzian(&sys(-d, g, kappa))
            );
            assert_eq!(jc_purcell_rate(&sys(d, g, kappa)), jc_purcell_rate(&sys(-d, g, kappa)));
        }
    }

    #[test]
    fn jc_rate_at_zero_detuning_is_half_kappa() {
        let g = TAU * 10e6;
        let kappa = TAU * 4e6;
        let s = ReadoutSystem::new(TAU * 5e9, TAU * 5e9, g, kappa, 50.0).unwrap();
        assert_relative_eq!(jc_purcell_rate(&s), kappa / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn jc_rate_never_exceeds_kappa() {
        let g = TAU * 50e6;
        let kappa = TAU * 1e6;
        for d in [0.1, 1.0, 10.0, 1e3, 1e6].map(|x| x * g) {
            let rate = jc_purcell_rate(&sys(d, g, kappa));
            assert!(rate <= kappa);
        }
    }

    #[test]
    fn jc_rate_decreases_monotonically_with_detuning() {
        let g = TAU * 10e6;
        let kappa = TAU * 10e6;
        let mut last = f64::INFINITY;
        for i in 1..200 {
            let d = TAU * 1e6 * 1.07f64.powi(i);
            let rate = jc_purcell_rate(&sys(d, g, kappa));
            assert!(rate < last);
            last = rate;
        }
    }

    #[test]
    fn jc_rate_large_detuning_error_scales_as_3x_squared() {
        let g = TAU * 10e6;
        let kappa = TAU * 10e6;
        for ratio in [10.0, 30.0, 100.0, 300.0] {
            let d = ratio * g;
            let jc = jc_purcell_rate(&sys(d, g, kappa));
            let limit = g * g * kappa / (d * d);
            let rel = (jc / limit - 1.0).abs();
            let predicted = 3.0 / (ratio * ratio);
            assert!((rel / predicted - 1.0).abs() < 0.05, "ratio {ratio}: rel {rel} vs {predicted}");
        }
    }

    #[test]
    fn flat_environment_gives_unit_filter_factor() {
        let flat = |_omega: f64| Complex64::new(50.0, 0.0);
        let f = filter_factor(flat, TAU * 4.0e9, TAU * 5.0e9).unwrap();
        assert_eq!(f, 1.0);
        let same = filter_factor(flat, TAU * 5.0e9, TAU * 5.0e9).unwrap();
        assert_eq!(same, 1.0);
    }

    #[test]
    fn filter_factor_rejects_dissipationless_resonator_point() {
        let zext = |omega: f64| Complex64::new(if omega > TAU * 4.5e9 { 0.0 } else { 50.0 }, 1.0);
        let err = filter_factor(zext, TAU * 4.0e9, TAU * 5.0e9).unwrap_err();
        assert!(matches!(err, PurcellError::NonPositiveReZext { .. }));
    }

    #[test]
    fn flat_environment_spectrum_is_unfiltered_pointwise() {
        let s = ReadoutSystem::new(TAU * 3.18e9, TAU * 3.18e9, TAU * 10e6, TAU * 10e6, 50.0).unwrap();
        let grid: Vec<f64> = (0..41).map(|i| 2.8e9 + i as f64 * 2e7).collect();
        let sweep = filtered_t1_spectrum(&s, |_| Complex64::new(50.0, 0.0), &grid).unwrap();
        for i in 0..sweep.len() {
            assert_eq!(sweep.t1_filtered_s()[i], sweep.t1_unfiltered_s()[i]);
            assert_eq!(sweep.filter_factor()[i], Some(1.0));
            assert_eq!(sweep.re_zext_ohm()[i], Some(50.0));
        }
        assert!(sweep.warnings().is_empty());
    }

    #[test]
    fn out_of_span_resonator_warns() {
        let s = ReadoutSystem::new(TAU * 5.0e9, TAU * 5.0e9, TAU * 10e6, TAU * 10e6, 50.0).unwrap();
        let grid = [2.8e9, 3.0e9, 3.2e9];
        let sweep = filtered_t1_spectrum(&s, |_| Complex64::new(50.0, 0.0), &grid).unwrap();
        assert_eq!(sweep.warnings().len(), 1);
    }

    #[test]
    fn negative_re_zext_points_are_flagged_not_fatal() {
        let s = ReadoutSystem::new(TAU * 3.0e9, TAU * 3.0e9, TAU * 10e6, TAU * 10e6, 50.0).unwrap();
        let zext = |omega: f64| {
            if omega < TAU * 2.9e9 {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(50.0, 0.0)
            }
        };
        let grid = [2.8e9, 3.0e9];
        let sweep = filtered_t1_spectrum(&s, zext, &grid).unwrap();
        assert_eq!(sweep.t1_filtered_s()[0], None);
        assert_eq!(sweep.filter_factor()[0], None);
        assert!(sweep.t1_unfiltered_s()[0].is_some());
        assert!(sweep.t1_filtered_s()[1].is_some());
    }

    #[test]
    fn decoupled_qubit_has_vanishing_shift_and_coupling() {
        // c1 -> 0 sends δω_q and g² to zero like c1².
        let omega_r0 = TAU * 5.0e9;
        let omega_q0 = TAU * 4.2e9;
        let l_r = 2e-9;
        let c_r = 4.0 / (omega_r0 * omega_r0 * l_r);
        let l_q = 3e-9;
        let c_q = 1.0 / (omega_q0 * omega_q0 * l_q);
        let shifts = |c1: f64| {
            let inp = PerturbativeInputs {
                ybar: with_coupling_caps(symmetric_lc_two_port(l_r, c_r), c1, 2e-16),
                zq: parallel_lc_impedance(l_q, c_q),
                zext: |_| Complex64::new(50.0, 0.0),
                c1,
                c2: 2e-16,
            };
            perturbative_shifts(&inp, omega_r0, omega_q0).unwrap()
        };
        let a = shifts(1e-16);
        let b = shifts(1e-17);
        assert!(b.g2 < a.g2 / 50.0);
        assert!(b.delta_omega_q.norm() < a.delta_omega_q.norm() / 50.0);
        assert_relative_eq!(b.g2, a.g2 / 100.0, max_relative = 1e-3);
    }

    #[test]
    fn dispersive_shift_pushes_low_qubit_down() {
        let omega_r0 = TAU * 5.0e9;
        let omega_q0 = TAU * 4.2e9;
        let l_r = 2e-9;
        let c_r = 4.0 / (omega_r0 * omega_r0 * l_r);
        let l_q = 3e-9;
        let c_q = 1.0 / (omega_q0 * omega_q0 * l_q);
        let inp = PerturbativeInputs {
            ybar: with_coupling_caps(symmetric_lc_two_port(l_r, c_r), 1e-16, 2e-16),
            zq: parallel_lc_impedance(l_q, c_q),
            zext: |_| Complex64::new(50.0, 0.0),
            c1: 1e-16,
            c2: 2e-16,
        };
        let shifts = perturbative_shifts(&inp, omega_r0, omega_q0).unwrap();
        assert!(shifts.g2 > 0.0, "g² = {}", shifts.g2);
        assert!(shifts.kappa > 0.0, "κ = {}", shifts.kappa);
        assert!(shifts.gamma_q > 0.0, "γ_q = {}", shifts.gamma_q);
        // Qubit below the resonator is repelled downward; the real shift is
        // the dispersive pull g²/Δ.
        assert!(shifts.delta_omega_q.re < 0.0);
        let delta = shifts.omega_q - shifts.omega_r;
        assert_relative_eq!(shifts.delta_omega_q.re, shifts.g2 / delta, max_relative = 1e-6);
        assert!(shifts.warnings.is_empty(), "{:?}", shifts.warnings);
    }

    #[test]
    fn degenerate_two_port_is_rejected() {
        // A two-port whose determinant is frequency-independent has λ = 0.
        let flat = |_omega: f64| {
            [
                [Complex64::new(0.0, 1e-3), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1e-3)],
            ]
        };
        let l_q = 3e-9;
        let omega_q0 = TAU * 4.2e9;
        let c_q = 1.0 / (omega_q0 * omega_q0 * l_q);
        let inp = PerturbativeInputs {
            ybar: flat,
            zq: parallel_lc_impedance(l_q, c_q),
            zext: |_| Complex64::new(50.0, 0.0),
            c1: 1e-16,
            c2: 1e-16,
        };
        // Root refinement cannot find a zero of a constant determinant.
        assert!(perturbative_shifts(&inp, TAU * 5.0e9, omega_q0).is_err());
    }

    #[test]
    fn zero_span_spectrum_has_one_row() {
        let s = ReadoutSystem::new(TAU * 3.0e9, TAU * 3.0e9, TAU * 10e6, TAU * 10e6, 50.0).unwrap();
        let sweep = filtered_t1_spectrum(&s, |_| Complex64::new(50.0, 0.0), &[3.0e9]).unwrap();
        assert_eq!(sweep.len(), 1);
    }
}
