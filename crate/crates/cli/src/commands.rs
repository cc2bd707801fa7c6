//! Subcommand implementations: simulate, t1, fit, convert.

use crate::config::{FitModelKind, FitObservable, JobConfig};
use crate::CliError;
use mpfilter::fitting::{FitModel, FitProblem, ObservableKind};
use mpfilter::io::{parse_touchstone, write_sweep_csv, write_touchstone, TouchstoneFormat, TouchstoneRecord};
use mpfilter::network::{re_zext_from_s11, LadderFilterSpec};
use mpfilter::purcell::{filtered_t1_spectrum, ReadoutSystem};
use mpfilter::sweep::SweepResult;
use num_complex::Complex64;
use std::io::Write as _;
use std::path::{Path, PathBuf};

const TAU: f64 = std::f64::consts::TAU;

/// Where data goes: a file, stdout, or both. Diagnostics always go to
/// stderr.
#[derive(Debug, Clone, Default)]
pub struct OutputSink {
    pub path: Option<PathBuf>,
    pub stdout: bool,
}

impl OutputSink {
    /// Resolves from the command line and the `[io]` section (`--out`
    /// wins over `io.output`).
    pub fn resolve(cli_out: Option<PathBuf>, cfg: &JobConfig, stdout: bool) -> Self {
        OutputSink {
            path: cli_out.or_else(|| cfg.io.output.clone()),
            stdout,
        }
    }

    fn require_destination(&self) -> Result<(), CliError> {
        if self.path.is_none() && !self.stdout {
            return Err(CliError::Config(
                "no output destination: set io.output in the config, or pass --out or --stdout".into(),
            ));
        }
        Ok(())
    }

    /// Writes one data artifact. `suffix` derives sibling file names for
    /// family sweeps (`out.csv` + `_q800` -> `out_q800.csv`).
    fn emit(&self, suffix: &str, content: &str) -> Result<(), CliError> {
        if let Some(base) = &self.path {
            let path = suffixed(base, suffix);
            std::fs::write(&path, content)
                .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
        if self.stdout {
            if !suffix.is_empty() {
                return Err(CliError::Config(
                    "family sweeps produce multiple outputs; --stdout needs a single one (use --out)".into(),
                ));
            }
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Compute(format!("cannot write to stdout: {e}")))?;
        }
        Ok(())
    }
}

fn suffixed(base: &Path, suffix: &str) -> PathBuf {
    if suffix.is_empty() {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(ext) => format!("{stem}{suffix}.{ext}"),
        None => format!("{stem}{suffix}"),
    };
    base.with_file_name(name)
}

fn require<'a, T>(opt: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    opt.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing required config section [{what}]")))
}

fn quality_label(q: f64) -> String {
    if q == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{q:e}")
    }
}

/// Applies one family member to the base filter: a common quality factor
/// for both populations and/or an additive series detuning.
fn family_variant(
    base: &JobConfig,
    q: Option<f64>,
    detuning_hz: Option<f64>,
) -> Result<(LadderFilterSpec, String), CliError> {
    let mut filter = require(&base.filter, "filter")?.clone();
    let mut suffix = String::new();
    if let Some(q) = q {
        filter.series.q = q;
        filter.shunt.q = q;
        suffix.push_str(&format!("_q{}", quality_label(q)));
    }
    if let Some(d) = detuning_hz {
        filter.series.f_hz += d;
        suffix.push_str(&format!("_det{d:e}"));
    }
    Ok((filter.to_spec()?, suffix))
}

fn sweep_from_network(spec: &LadderFilterSpec, grid: &[f64]) -> Result<SweepResult, CliError> {
    let net = spec
        .build(grid)
        .map_err(|e| CliError::Compute(format!("network build failed: {e}")))?;
    let mut sweep = SweepResult::new(grid.to_vec());
    for (i, s) in net.s_params().iter().enumerate() {
        if let Some(s) = s {
            sweep.set_s11(i, s.s11);
            sweep.set_s21(i, s.s21);
            if let Ok(re) = re_zext_from_s11(s.s11, spec.z0()) {
                sweep.set_re_zext(i, re);
            }
        }
    }
    Ok(sweep)
}

fn touchstone_from_network(
    spec: &LadderFilterSpec,
    grid: &[f64],
    cfg: &JobConfig,
) -> Result<String, CliError> {
    let net = spec
        .build(grid)
        .map_err(|e| CliError::Compute(format!("network build failed: {e}")))?;
    let mut freqs = Vec::with_capacity(grid.len());
    let mut s = Vec::with_capacity(grid.len());
    for (f, p) in grid.iter().zip(net.s_params()) {
        if let Some(p) = p {
            freqs.push(*f);
            s.push(p);
        }
    }
    let comments = cfg
        .device
        .as_ref()
        .map(|d| d.comment_lines())
        .unwrap_or_default();
    let rec = TouchstoneRecord::new(freqs, s, spec.z0(), TouchstoneFormat::Ri, comments)
        .map_err(|e| CliError::Compute(format!("touchstone assembly failed: {e}")))?;
    Ok(write_touchstone(&rec))
}

/// `simulate`: sweep the ladder's scattering response, optionally across a
/// quality-factor family and a series-detuning family, and write sweep CSV
/// (plus optional Touchstone).
pub fn cmd_simulate(cfg: &JobConfig, sink: &OutputSink) -> Result<(), CliError> {
    sink.require_destination()?;
    let grid = require(&cfg.sweep, "sweep")?.grid()?;
    let families = cfg.families.clone().unwrap_or_default();
    let q_family: Vec<Option<f64>> = match families.q {
        Some(list) if !list.is_empty() => list.into_iter().map(Some).collect(),
        _ => vec![None],
    };
    let det_family: Vec<Option<f64>> = match families.series_detuning_hz {
        Some(list) if !list.is_empty() => list.into_iter().map(Some).collect(),
        _ => vec![None],
    };
    for q in &q_family {
        for det in &det_family {
            let (spec, suffix) = family_variant(cfg, *q, *det)?;
            if let Some(w) = spec.design_rule_warning() {
                eprintln!("warning: {w}");
            }
            let sweep = sweep_from_network(&spec, &grid)?;
            sink.emit(&suffix, &write_sweep_csv(&sweep))?;
            if let Some(ts_path) = &cfg.io.touchstone {
                let text = touchstone_from_network(&spec, &grid, cfg)?;
                let path = suffixed(ts_path, &suffix);
                std::fs::write(&path, text).map_err(|e| {
                    CliError::Compute(format!("cannot write {}: {e}", path.display()))
                })?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

/// `t1`: Purcell-limited lifetime sweep over qubit frequency, with the
/// environment taken from a simulated filter, a measured Touchstone file,
/// or a flat line (`--no-filter`).
pub fn cmd_t1(
    cfg: &JobConfig,
    sink: &OutputSink,
    s2p: Option<&Path>,
    no_filter: bool,
) -> Result<(), CliError> {
    sink.require_destination()?;
    let qubit = require(&cfg.qubit, "qubit")?;
    let grid = require(&cfg.sweep, "sweep")?.grid()?;

    let z0_default = cfg.filter.as_ref().map(|f| f.z0).unwrap_or(50.0);
    let sys = ReadoutSystem::new(
        TAU * qubit.f_r_hz,
        TAU * qubit.f_r_hz, // placeholder; the sweep sets per-point values
        TAU * qubit.g_hz,
        TAU * qubit.kappa_hz,
        z0_default,
    )
    .map_err(|e| CliError::Config(format!("qubit: {e}")))?;

    let mut sweep = if no_filter {
        let z0 = sys.z0();
        run_t1(&sys, move |_| Complex64::new(z0, 0.0), &grid)?
    } else if let Some(path) = s2p.map(Path::to_path_buf).or_else(|| cfg.io.input.clone()) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Compute(format!("cannot read {}: {e}", path.display())))?;
        let rec = parse_touchstone(&text)
            .map_err(|e| CliError::Compute(format!("{}: {e}", path.display())))?;
        let (lo, hi) = rec.span_hz();
        if qubit.f_r_hz < lo || qubit.f_r_hz > hi {
            return Err(CliError::Compute(format!(
                "resonator frequency {:.6e} Hz is outside the measured span {lo:.6e}..{hi:.6e} Hz (no extrapolation)",
                qubit.f_r_hz
            )));
        }
        let z0 = rec.z0();
        let zext_rec = rec.clone();
        let zext = move |omega: f64| match zext_rec.interpolate_at(omega / TAU) {
            Ok(s) => match re_zext_from_s11(s.s11, z0) {
                Ok(re) => Complex64::new(re, 0.0),
                Err(_) => Complex64::new(f64::NAN, 0.0),
            },
            Err(_) => Complex64::new(f64::NAN, 0.0),
        };
        let mut sweep = run_t1(&sys, zext, &grid)?;
        for (i, &f) in grid.iter().enumerate() {
            if let Ok(s) = rec.interpolate_at(f) {
                sweep.set_s11(i, s.s11);
                sweep.set_s21(i, s.s21);
            }
        }
        sweep
    } else {
        let filter = require(&cfg.filter, "filter")?;
        let spec = filter.to_spec()?;
        if let Some(w) = spec.design_rule_warning() {
            eprintln!("warning: {w}");
        }
        let zext_spec = spec;
        let mut sweep = run_t1(&sys, move |omega| zext_spec.zext_at(omega), &grid)?;
        let net = spec
            .build(&grid)
            .map_err(|e| CliError::Compute(format!("network build failed: {e}")))?;
        for (i, s) in net.s_params().iter().enumerate() {
            if let Some(s) = s {
                sweep.set_s11(i, s.s11);
                sweep.set_s21(i, s.s21);
            }
        }
        sweep
    };

    for w in sweep.warnings() {
        eprintln!("warning: {w}");
    }
    let peak = sweep
        .t1_filtered_s()
        .iter()
        .zip(sweep.t1_unfiltered_s())
        .zip(sweep.freq_hz())
        .filter_map(|((f, u), &freq)| match (f, u) {
            (Some(f), Some(u)) if f.is_finite() && *u > 0.0 => Some((f / u, freq)),
            _ => None,
        })
        .max_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((factor, freq)) = peak {
        eprintln!("peak T1 enhancement: {factor:.3e}x at {freq:.6e} Hz");
    }
    let csv = write_sweep_csv(&sweep);
    sink.emit("", &csv)?;
    // Warnings flagged per point rather than aborting: report the count.
    let flagged = sweep.t1_filtered_s().iter().filter(|v| v.is_none()).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} of {} points flagged (empty cells)", sweep.len());
    }
    Ok(())
}

fn run_t1<Z: Fn(f64) -> Complex64>(
    sys: &ReadoutSystem,
    zext: Z,
    grid: &[f64],
) -> Result<SweepResult, CliError> {
    filtered_t1_spectrum(sys, zext, grid).map_err(|e| CliError::Compute(e.to_string()))
}

/// `fit`: extract resonator or ladder parameters from a measured Touchstone
/// file, writing the report as TOML.
pub fn cmd_fit(cfg: &JobConfig, sink: &OutputSink, seed: Option<u64>) -> Result<(), CliError> {
    sink.require_destination()?;
    let fit = require(&cfg.fit, "fit")?;
    let input = cfg
        .io
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("fit needs io.input (a Touchstone file)".into()))?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Compute(format!("cannot read {}: {e}", input.display())))?;
    let rec = parse_touchstone(&text)
        .map_err(|e| CliError::Compute(format!("{}: {e}", input.display())))?;

    let (observable, target): (ObservableKind, Vec<Complex64>) = match fit.observable {
        FitObservable::S11 => (ObservableKind::S11, rec.s().iter().map(|p| p.s11).collect()),
        FitObservable::S21 => (ObservableKind::S21, rec.s().iter().map(|p| p.s21).collect()),
        FitObservable::Admittance => {
            let one = Complex64::new(1.0, 0.0);
            let y0 = 1.0 / rec.z0();
            (
                ObservableKind::Admittance,
                rec.s()
                    .iter()
                    .map(|p| y0 * (one - p.s11) / (one + p.s11))
                    .collect(),
            )
        }
    };

    let model = match fit.model {
        FitModelKind::Bvd => {
            let init = fit
                .initial
                .as_ref()
                .ok_or_else(|| CliError::Config("fit.model = \"bvd\" needs [fit.initial]".into()))?
                .to_spec("fit.initial")?;
            if init.q().is_unbounded() {
                return Err(CliError::Config(
                    "fit.initial.q must be finite to seed a fit".into(),
                ));
            }
            FitModel::Bvd {
                initial: init,
                z0: rec.z0(),
            }
        }
        FitModelKind::Ladder => {
            let filter = require(&cfg.filter, "filter")?;
            let initial = filter.to_spec()?;
            if initial.series().q().is_unbounded() || initial.shunt().q().is_unbounded() {
                return Err(CliError::Config(
                    "ladder fit starts need finite quality factors in [filter]".into(),
                ));
            }
            FitModel::Ladder { initial }
        }
    };

    let mut problem = FitProblem::new(rec.freqs_hz().to_vec(), target, observable, model)
        .map_err(|e| CliError::Compute(e.to_string()))?
        .with_magnitude_only(fit.magnitude_only)
        .with_seed(seed.unwrap_or(0));
    if let Some(n) = fit.max_iterations {
        problem = problem.with_max_iterations(n);
    }
    let report = problem.solve().map_err(|e| CliError::Compute(e.to_string()))?;

    eprintln!(
        "fit {:?} after {} iterations, weighted RMS residual {:.6e} ({:.3e} relative)",
        report.status, report.iterations, report.residual_rms, report.relative_residual
    );
    if report.model_mismatch {
        eprintln!("warning: residual is large for this model class (possible wrong ladder order)");
    }
    let toml_text = toml::to_string_pretty(&report)
        .map_err(|e| CliError::Compute(format!("cannot serialize report: {e}")))?;
    sink.emit("", &toml_text)
}

/// `convert`: Touchstone to sweep-schema CSV. The reverse direction is not
/// representable (the sweep schema carries no S12/S22).
pub fn cmd_convert(input: &Path, sink: &OutputSink) -> Result<(), CliError> {
    sink.require_destination()?;
    if input.extension().and_then(|e| e.to_str()) == Some("csv") {
        return Err(CliError::Compute(
            "CSV to Touchstone is not supported: the sweep schema has no S12/S22 columns".into(),
        ));
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Compute(format!("cannot read {}: {e}", input.display())))?;
    let rec = parse_touchstone(&text)
        .map_err(|e| CliError::Compute(format!("{}: {e}", input.display())))?;
    let mut sweep = SweepResult::new(rec.freqs_hz().to_vec());
    for (i, p) in rec.s().iter().enumerate() {
        sweep.set_s11(i, p.s11);
        sweep.set_s21(i, p.s21);
        if let Ok(re) = re_zext_from_s11(p.s11, rec.z0()) {
            sweep.set_re_zext(i, re);
        }
    }
    sink.emit("", &write_sweep_csv(&sweep))
}

/// Runs `t1` semantics with a flat environment equal to the line impedance,
/// used by `--no-filter`; exposed for tests.
pub fn flat_environment(z0: f64) -> impl Fn(f64) -> Complex64 + Copy {
    move |_| Complex64::new(z0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_insertion_before_extension() {
        assert_eq!(
            suffixed(Path::new("runs/out.csv"), "_q800"),
            PathBuf::from("runs/out_q800.csv")
        );
        assert_eq!(suffixed(Path::new("out"), "_det5e7"), PathBuf::from("out_det5e7"));
        assert_eq!(suffixed(Path::new("out.csv"), ""), PathBuf::from("out.csv"));
    }

    #[test]
    fn quality_labels() {
        assert_eq!(quality_label(f64::INFINITY), "inf");
        assert_eq!(quality_label(800.0), "8e2");
    }
}
