//! Touchstone v1 two-port files, sweep CSV tables, and device metadata.
//!
//! The Touchstone reader accepts the v1 grammar for S-parameter two-ports:
//! an option line `# <unit> S <format> R <z0>` (tokens in any order,
//! case-insensitive, with the standard defaults GHz/S/MA/50) followed by
//! data rows of nine columns in the v1 order `f S11 S21 S12 S22`. RI, MA,
//! and DB formats are accepted; CRLF input is tolerated; full comment lines
//! (`!`) are preserved byte-for-byte, inline comment tails are dropped.
//! Touchstone v2 keyword lines are detected and rejected.
//!
//! The writer always emits RI with shortest exact-round-trip number
//! formatting, so parse ∘ write is the identity on values.
//!
//! Rejected inputs are exactly: a missing, duplicated, or malformed option
//! line; a v2 keyword; a parameter type other than S; a wrong column count;
//! an unparseable or non-finite field; a non-positive or non-monotone
//! frequency; a file with no data rows. Every error carries its 1-based
//! line number.

use crate::network::SParams;
use crate::sweep::SweepResult;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from file parsing, interpolation, and metadata validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("line {line}: malformed option line: {reason}")]
    MalformedOptionLine { line: usize, reason: String },
    #[error("line {line}: Touchstone v2 syntax ({token}) is not supported")]
    UnsupportedVersion { line: usize, token: String },
    #[error("line {line}: unsupported parameter type '{found}'; only two-port S data is supported")]
    UnsupportedParameter { line: usize, found: String },
    #[error("line {line}: expected 9 columns (freq + four S pairs), found {found}")]
    WrongColumnCount { line: usize, found: usize },
    #[error("line {line}: cannot parse '{token}' as a finite number")]
    InvalidNumber { line: usize, token: String },
    #[error("line {line}: frequency {f_hz} Hz does not strictly increase from the previous row")]
    NonMonotoneFrequency { line: usize, f_hz: f64 },
    #[error("line {line}: data row before the option line")]
    DataBeforeOptionLine { line: usize },
    #[error("no data rows found")]
    Empty,
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("frequency {f_hz} Hz is outside the record span {lo} Hz .. {hi} Hz")]
    OutOfSpan { f_hz: f64, lo: f64, hi: f64 },
    #[error("invalid device record: {0}")]
    InvalidDevice(String),
}

/// Number format of a Touchstone file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchstoneFormat {
    /// Real/imaginary pairs.
    Ri,
    /// Magnitude and angle in degrees.
    Ma,
    /// Magnitude in dB and angle in degrees.
    Db,
}

/// Frequency-sampled two-port scattering data with its source formatting
/// and preserved comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneRecord {
    freqs_hz: Vec<f64>,
    s: Vec<SParams>,
    z0: f64,
    format: TouchstoneFormat,
    comments: Vec<String>,
}

impl TouchstoneRecord {
    /// Validates strictly increasing positive frequencies, finite S values,
    /// and positive reference impedance.
    pub fn new(
        freqs_hz: Vec<f64>,
        s: Vec<SParams>,
        z0: f64,
        format: TouchstoneFormat,
        comments: Vec<String>,
    ) -> Result<Self, IoError> {
        if freqs_hz.is_empty() {
            return Err(IoError::Empty);
        }
        if freqs_hz.len() != s.len() {
            return Err(IoError::InvalidRecord(format!(
                "{} frequencies but {} S-matrices",
                freqs_hz.len(),
                s.len()
            )));
        }
        let mut prev = 0.0;
        for &f in &freqs_hz {
            if !(f > prev && f.is_finite()) {
                return Err(IoError::InvalidRecord(format!(
                    "frequencies must be positive and strictly increasing, got {f} after {prev}"
                )));
            }
            prev = f;
        }
        if s.iter().any(|p| {
            !(p.s11.is_finite() && p.s12.is_finite() && p.s21.is_finite() && p.s22.is_finite())
        }) {
            return Err(IoError::InvalidRecord("S entries must be finite".into()));
        }
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(IoError::InvalidRecord(format!(
                "reference impedance must be positive, got {z0}"
            )));
        }
        Ok(TouchstoneRecord {
            freqs_hz,
            s,
            z0,
            format,
            comments,
        })
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn s(&self) -> &[SParams] {
        &self.s
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn format(&self) -> TouchstoneFormat {
        self.format
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// `(lowest, highest)` frequency, Hz.
    pub fn span_hz(&self) -> (f64, f64) {
        (self.freqs_hz[0], *self.freqs_hz.last().unwrap())
    }

    /// S-parameters at `f_hz` by linear interpolation of the real and
    /// imaginary parts. No extrapolation: out-of-span frequencies error.
    pub fn interpolate_at(&self, f_hz: f64) -> Result<SParams, IoError> {
        let (lo, hi) = self.span_hz();
        if !(f_hz >= lo && f_hz <= hi) {
            return Err(IoError::OutOfSpan { f_hz, lo, hi });
        }
        let idx = match self
            .freqs_hz
            .binary_search_by(|probe| probe.total_cmp(&f_hz))
        {
            Ok(i) => return Ok(self.s[i]),
            Err(i) => i,
        };
        let (i0, i1) = (idx - 1, idx);
        let t = (f_hz - self.freqs_hz[i0]) / (self.freqs_hz[i1] - self.freqs_hz[i0]);
        let lerp = |a: Complex64, b: Complex64| a + (b - a) * t;
        Ok(SParams {
            s11: lerp(self.s[i0].s11, self.s[i1].s11),
            s12: lerp(self.s[i0].s12, self.s[i1].s12),
            s21: lerp(self.s[i0].s21, self.s[i1].s21),
            s22: lerp(self.s[i0].s22, self.s[i1].s22),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct OptionLine {
    unit_hz: f64,
    format: TouchstoneFormat,
    z0: f64,
}

fn parse_option_line(line_no: usize, rest: &str) -> Result<OptionLine, IoError> {
    let mut unit_hz = 1e9;
    let mut format = TouchstoneFormat::Ma;
    let mut z0 = 50.0;
    let mut tokens = rest.split_whitespace().peekable();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_lowercase().as_str() {
            "hz" => unit_hz = 1.0,
            "khz" => unit_hz = 1e3,
            "mhz" => unit_hz = 1e6,
            "ghz" => unit_hz = 1e9,
            "s" => {}
            "y" | "z" | "g" | "h" => {
                return Err(IoError::UnsupportedParameter {
                    line: line_no,
                    found: tok.to_uppercase(),
                })
            }
            "ri" => format = TouchstoneFormat::Ri,
            "ma" => format = TouchstoneFormat::Ma,
            "db" => format = TouchstoneFormat::Db,
            "r" => {
                let value = tokens.next().ok_or_else(|| IoError::MalformedOptionLine {
                    line: line_no,
                    reason: "'R' must be followed by a reference impedance".into(),
                })?;
                z0 = value.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0).ok_or_else(
                    || IoError::MalformedOptionLine {
                        line: line_no,
                        reason: format!("invalid reference impedance '{value}'"),
                    },
                )?;
            }
            other => {
                return Err(IoError::MalformedOptionLine {
                    line: line_no,
                    reason: format!("unknown token '{other}'"),
                })
            }
        }
    }
    Ok(OptionLine {
        unit_hz,
        format,
        z0,
    })
}

fn pair_to_complex(format: TouchstoneFormat, a: f64, b: f64) -> Complex64 {
    match format {
        TouchstoneFormat::Ri => Complex64::new(a, b),
        TouchstoneFormat::Ma => Complex64::from_polar(a, b.to_radians()),
        TouchstoneFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

fn complex_to_pair(format: TouchstoneFormat, v: Complex64) -> (f64, f64) {
    match format {
        TouchstoneFormat::Ri => (v.re, v.im),
        TouchstoneFormat::Ma => (v.norm(), v.arg().to_degrees()),
        TouchstoneFormat::Db => (20.0 * v.norm().log10(), v.arg().to_degrees()),
    }
}

/// Parses Touchstone v1 two-port text. See the module documentation for the
/// accepted grammar and the exact rejection list.
pub fn parse_touchstone(text: &str) -> Result<TouchstoneRecord, IoError> {
    let mut option: Option<OptionLine> = None;
    let mut comments = Vec::new();
    let mut freqs_hz = Vec::new();
    let mut s = Vec::new();
    let mut prev_f = 0.0f64;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('!') {
            comments.push(line.to_string());
            continue;
        }
        if trimmed.starts_with('[') {
            let token = trimmed.split_whitespace().next().unwrap_or("[").to_string();
            return Err(IoError::UnsupportedVersion {
                line: line_no,
                token,
            });
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if option.is_some() {
                return Err(IoError::MalformedOptionLine {
                    line: line_no,
                    reason: "duplicate option line".into(),
                });
            }
            option = Some(parse_option_line(line_no, rest)?);
            continue;
        }
        // Data row; tolerate an inline comment tail.
        let data_part = match line.find('!') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let opt = option.ok_or(IoError::DataBeforeOptionLine { line: line_no })?;
        let fields: Vec<&str> = data_part.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(IoError::WrongColumnCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let mut values = [0.0f64; 9];
        for (slot, tok) in values.iter_mut().zip(&fields) {
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IoError::InvalidNumber {
                    line: line_no,
                    token: tok.to_string(),
                })?;
        }
        let f_hz = values[0] * opt.unit_hz;
        if !(f_hz > prev_f && f_hz.is_finite()) {
            return Err(IoError::NonMonotoneFrequency { line: line_no, f_hz });
        }
        prev_f = f_hz;
        // v1 two-port column order: S11 S21 S12 S22.
        let s11 = pair_to_complex(opt.format, values[1], values[2]);
        let s21 = pair_to_complex(opt.format, values[3], values[4]);
        let s12 = pair_to_complex(opt.format, values[5], values[6]);
        let s22 = pair_to_complex(opt.format, values[7], values[8]);
        for v in [s11, s21, s12, s22] {
            if !v.is_finite() {
                return Err(IoError::InvalidNumber {
                    line: line_no,
                    token: "converted S value is not finite".into(),
                });
            }
        }
        freqs_hz.push(f_hz);
        s.push(SParams { s11, s12, s21, s22 });
    }

    let opt = option.ok_or(IoError::Empty)?;
    TouchstoneRecord::new(freqs_hz, s, opt.z0, opt.format, comments)
}

/// Writes a record as Touchstone v1: preserved comment lines first, then an
/// RI option line in Hz, then one data row per frequency. Numbers use the
/// shortest representation that parses back to the identical value; lines
/// end with LF.
pub fn write_touchstone(rec: &TouchstoneRecord) -> String {
    let mut out = String::new();
    for comment in rec.comments() {
        out.push_str(comment);
        out.push('\n');
    }
    let _ = writeln!(out, "# Hz S RI R {}", rec.z0());
    for (f, p) in rec.freqs_hz().iter().zip(rec.s()) {
        let _ = writeln!(
            out,
            "{:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            f, p.s11.re, p.s11.im, p.s21.re, p.s21.im, p.s12.re, p.s12.im, p.s22.re, p.s22.im
        );
    }
    out
}

/// Converts a record to a different source format in memory (the writer
/// itself always emits RI). Mostly useful for tests and format-equivalence
/// checks.
pub fn reencode(rec: &TouchstoneRecord, format: TouchstoneFormat) -> String {
    let mut out = String::new();
    for comment in rec.comments() {
        out.push_str(comment);
        out.push('\n');
    }
    let name = match format {
        TouchstoneFormat::Ri => "RI",
        TouchstoneFormat::Ma => "MA",
        TouchstoneFormat::Db => "DB",
    };
    let _ = writeln!(out, "# Hz S {} R {}", name, rec.z0());
    for (f, p) in rec.freqs_hz().iter().zip(rec.s()) {
        let pairs = [p.s11, p.s21, p.s12, p.s22].map(|v| complex_to_pair(format, v));
        let _ = writeln!(
            out,
            "{:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
            f,
            pairs[0].0,
            pairs[0].1,
            pairs[1].0,
            pairs[1].1,
            pairs[2].0,
            pairs[2].1,
            pairs[3].0,
            pairs[3].1
        );
    }
    out
}

/// Header row of the sweep CSV schema.
pub const SWEEP_CSV_HEADER: &str =
    "freq_hz,s11_re,s11_im,s21_re,s21_im,re_zext_ohm,filter_factor,t1_unfiltered_s,t1_filtered_s";

fn push_opt(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        let _ = write!(out, "{v:e}");
    }
}

/// Serializes a sweep as CSV per [`SWEEP_CSV_HEADER`]. Unset cells (per-point
/// error flags) are left empty; lines end with LF.
pub fn write_sweep_csv(sweep: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (sweep.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for i in 0..sweep.len() {
        let _ = write!(out, "{:e}", sweep.freq_hz()[i]);
        push_opt(&mut out, sweep.s11()[i].map(|v| v.re));
        push_opt(&mut out, sweep.s11()[i].map(|v| v.im));
        push_opt(&mut out, sweep.s21()[i].map(|v| v.re));
        push_opt(&mut out, sweep.s21()[i].map(|v| v.im));
        push_opt(&mut out, sweep.re_zext_ohm()[i]);
        push_opt(&mut out, sweep.filter_factor()[i]);
        push_opt(&mut out, sweep.t1_unfiltered_s()[i]);
        push_opt(&mut out, sweep.t1_filtered_s()[i]);
        out.push('\n');
    }
    out
}

/// Fabricated device geometry from the measured-device table: IDT pitch,
/// pair count, and width for the series and shunt populations, plus the
/// rotation against the crystal axis and the ladder order. Metadata only —
/// nothing here is converted into circuit values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceRecord {
    pub pitch_series_um: f64,
    pub idt_pairs_series: u32,
    pub width_series_um: f64,
    pub pitch_shunt_um: f64,
    pub idt_pairs_shunt: u32,
    pub width_shunt_um: f64,
    pub rotation_deg: f64,
    pub order: u32,
}

impl DeviceRecord {
    /// Geometric dimensions and counts must be positive; the rotation must
    /// be finite (zero is a valid, unrotated device).
    pub fn validate(&self) -> Result<(), IoError> {
        let dims = [
            ("pitch_series_um", self.pitch_series_um),
            ("width_series_um", self.width_series_um),
            ("pitch_shunt_um", self.pitch_shunt_um),
            ("width_shunt_um", self.width_shunt_um),
        ];
        for (name, v) in dims {
            if !(v > 0.0 && v.is_finite()) {
                return Err(IoError::InvalidDevice(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.idt_pairs_series == 0 || self.idt_pairs_shunt == 0 {
            return Err(IoError::InvalidDevice("IDT pair counts must be >= 1".into()));
        }
        if self.order == 0 {
            return Err(IoError::InvalidDevice("order must be >= 1".into()));
        }
        if !self.rotation_deg.is_finite() {
            return Err(IoError::InvalidDevice(format!(
                "rotation must be finite, got {}",
                self.rotation_deg
            )));
        }
        Ok(())
    }

    /// Comment lines summarizing the geometry, suitable for embedding in a
    /// Touchstone header.
    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!(
                "! device: series IDT pitch {} um, {} pairs, width {} um",
                self.pitch_series_um, self.idt_pairs_series, self.width_series_um
            ),
            format!(
                "! device: shunt IDT pitch {} um, {} pairs, width {} um",
                self.pitch_shunt_um, self.idt_pairs_shunt, self.width_shunt_um
            ),
            format!(
                "! device: rotation {} deg, ladder order {}",
                self.rotation_deg, self.order
            ),
        ]
    }
}
