//! Command implementations behind the CLI. Each command writes its outputs
//! into one directory and returns a serialisable summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{
    load_dispersive, load_experiment, load_gaussian_identity, load_oscillatory, DispersiveConfig, ExperimentConfig,
    GaussianIdentityConfig, OscillatoryConfig,
};
use crate::diagnostics::{decay_fit, GrowthMonitor, NormRecorder, NormReport, PowerFit};
use crate::error::{Error, Result};
use crate::evolution::{run_simulation, validity_horizon, Observer, ProfileState, RunConfig};
use crate::io::{emit_plot, write_snapshot, write_timeseries, PlotOptions, PlotSeries};
use crate::oscillatory::{
    dispersive_ratio, gaussian_pair_closed_form, gaussian_pair_integral, stationary_phase_residual, ClosedFormProfile,
    DispersiveRatio, OscillatoryProbe, PairVariant, StationaryPhase,
};
use crate::scattering::{extract_w_infinity, log_phase_slope, uncorrected_distances, PhaseSlopeCheck, ScatteringObserver, ScatteringResult};
use crate::spectral::SpectralGrid;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stable 64-bit FNV-1a digest, used for run ids.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn run_id(cfg: &RunConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("RunConfig serialises");
    format!("{:016x}", fnv1a(&json))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(format!("serialisation failed: {e}")))?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn write_lines(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut text = String::from(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub quantity: String,
    pub fit: PowerFit,
}

/// Self-contained record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub run_id: String,
    pub config: RunConfig,
    pub fit_window: (f64, f64),
    pub t_valid: f64,
    pub fits: Vec<NamedFit>,
    pub growth_ratio_max: f64,
    pub growth_flagged: bool,
    pub series: Vec<NormReport>,
    pub scattering: Option<ScatterSummary>,
    pub warnings: Vec<String>,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
}

impl ExperimentRecord {
    pub fn fit(&self, quantity: &str) -> Option<PowerFit> {
        self.fits.iter().find(|f| f.quantity == quantity).map(|f| f.fit)
    }
}

/// Scattering diagnostics without the full `w_inf` array (written as CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub p1_estimate: f64,
    pub p1_r2: f64,
    pub consecutive_distances: Vec<(f64, f64)>,
    pub uncorrected_distances: Vec<(f64, f64)>,
    pub residual_series: Vec<(f64, f64)>,
    pub phase_slope: Option<PhaseSlopeCheck>,
    pub phase_window: (f64, f64),
    /// Maximum of `z(t) / z(0)` over the outputs.
    pub z_max_ratio: f64,
}

fn horizon_warnings(cfg: &RunConfig, t_valid: f64) -> Vec<String> {
    if cfg.override_horizon && cfg.t_end > t_valid {
        vec![format!(
            "horizon guard disabled: T_end = {} exceeds T_valid = {t_valid:.3}; late-time data may include wrap-around",
            cfg.t_end
        )]
    } else {
        Vec::new()
    }
}

fn norm_fits(series: &[NormReport], window: (f64, f64)) -> Vec<NamedFit> {
    let columns: [(&str, fn(&NormReport) -> f64); 4] = [
        ("hN", |r| r.sobolev_hn),
        ("w", |r| r.w_norm),
        ("z", |r| r.z_norm),
        ("sup_u", |r| r.sup_u),
    ];
    columns
        .iter()
        .filter_map(|(name, get)| {
            let pts: Vec<(f64, f64)> = series.iter().map(|r| (r.t, get(r))).collect();
            decay_fit(&pts, window).ok().map(|fit| NamedFit {
                quantity: name.to_string(),
                fit,
            })
        })
        .collect()
}

fn plot_norms(series: &[NormReport], path: &Path, title: &str) -> Result<()> {
    let col = |name: &str, get: fn(&NormReport) -> f64| PlotSeries {
        label: name.into(),
        points: series.iter().map(|r| (r.t, get(r))).collect(),
    };
    emit_plot(
        &[
            col("hN", |r| r.sobolev_hn),
            col("w", |r| r.w_norm),
            col("z", |r| r.z_norm),
            col("sup_u", |r| r.sup_u),
        ],
        &PlotOptions {
            title: title.into(),
            x_label: "t".into(),
            y_label: "norm".into(),
            log_log: true,
        },
        path,
    )
}

fn initial_horizon(cfg: &RunConfig) -> Result<f64> {
    let grid = cfg.grid()?;
    Ok(validity_horizon(&cfg.initial.spectrum(&grid)?, &grid))
}

/// Run the solver and write `timeseries.csv` and `record.json` (plus `norms.svg`).
pub fn command_simulate(exp: &ExperimentConfig, out: &Path, plot: bool) -> Result<ExperimentRecord> {
    let started = Instant::now();
    let cfg = &exp.run;
    cfg.validate()?;
    let t_valid = initial_horizon(cfg)?;
    let mut recorder = NormRecorder::new(cfg.coefficients.c0, cfg.sobolev_order);
    let mut growth = GrowthMonitor::new(cfg.sobolev_order, exp.growth_limit);
    {
        let mut obs: [&mut dyn Observer; 2] = [&mut recorder, &mut growth];
        run_simulation(cfg, &mut obs)?;
    }
    write_timeseries(&recorder.reports, &out.join("timeseries.csv"))?;
    if plot {
        plot_norms(&recorder.reports, &out.join("norms.svg"), "norms")?;
    }
    let record = ExperimentRecord {
        run_id: run_id(cfg),
        config: cfg.clone(),
        fit_window: exp.fit_window(),
        t_valid,
        fits: norm_fits(&recorder.reports, exp.fit_window()),
        growth_ratio_max: growth.max_ratio(),
        growth_flagged: growth.flagged(),
        series: recorder.reports,
        scattering: None,
        warnings: horizon_warnings(cfg, t_valid),
        tool_version: TOOL_VERSION.into(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&record, &out.join("record.json"))?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterOutcome {
    pub record: ExperimentRecord,
    pub result: ScatteringResult,
    pub grid_probe_xi: f64,
}

/// Run with phase accumulation; writes the timeseries, one snapshot CSV per
/// snapshot time, `w_infinity.csv` and `record.json`.
pub fn command_scatter(exp: &ExperimentConfig, out: &Path, plot: bool) -> Result<ScatterOutcome> {
    let started = Instant::now();
    let cfg = &exp.run;
    cfg.validate()?;
    if cfg.snapshot_times.len() < 4 {
        return Err(Error::invalid("scatter needs at least 4 snapshot_times"));
    }
    let grid = cfg.grid()?;
    let t_valid = initial_horizon(cfg)?;
    let c0 = cfg.coefficients.c0;
    let mut recorder = NormRecorder::new(c0, cfg.sobolev_order);
    let mut growth = GrowthMonitor::new(cfg.sobolev_order, exp.growth_limit);
    let mut scatter = ScatteringObserver::new(c0, exp.probe_xi, &grid);
    {
        let mut obs: [&mut dyn Observer; 3] = [&mut recorder, &mut growth, &mut scatter];
        run_simulation(cfg, &mut obs)?;
    }
    let mut result = extract_w_infinity(&scatter.snapshots, &grid)?;
    let probe_xi = scatter.probe_xi(&grid);
    let window = exp.fit_window();
    let phase_window = exp.phase_window();
    let phase: Vec<(f64, f64)> = scatter
        .unwrapped_phase()
        .into_iter()
        .filter(|&(t, _)| t >= phase_window.0 && t <= phase_window.1)
        .collect();
    let w_mag = result.w_infinity[grid.nearest_node(probe_xi)].norm();
    let phase_slope = log_phase_slope(&phase, w_mag, c0, probe_xi).ok();
    result.phase_slope_checks = phase_slope.into_iter().collect();

    write_timeseries(&recorder.reports, &out.join("timeseries.csv"))?;
    for (state, acc) in &scatter.snapshots {
        write_snapshot(state, Some(acc), &grid, &out.join(format!("snapshot_t{}.csv", state.t)))?;
    }
    let (last_state, last_acc) = scatter.snapshots.last().expect("at least 4 snapshots");
    let w_state = ProfileState {
        t: last_state.t,
        f_hat: result.w_infinity.clone(),
    };
    write_snapshot(&w_state, Some(last_acc), &grid, &out.join("w_infinity.csv"))?;

    let z0 = recorder.reports.first().map_or(0.0, |r| r.z_norm);
    let z_max_ratio = recorder.reports.iter().map(|r| r.z_norm / z0).fold(0.0, f64::max);
    let summary = ScatterSummary {
        p1_estimate: result.p1_estimate,
        p1_r2: result.p1_r2,
        consecutive_distances: result.consecutive_distances.clone(),
        uncorrected_distances: uncorrected_distances(&scatter.snapshots, &grid)?,
        residual_series: result.residual_series.clone(),
        phase_slope,
        phase_window,
        z_max_ratio,
    };
    if plot {
        plot_norms(&recorder.reports, &out.join("norms.svg"), "norms")?;
        emit_plot(
            &[
                PlotSeries {
                    label: "corrected".into(),
                    points: summary.consecutive_distances.clone(),
                },
                PlotSeries {
                    label: "uncorrected".into(),
                    points: summary.uncorrected_distances.clone(),
                },
            ],
            &PlotOptions {
                title: "consecutive snapshot distances".into(),
                x_label: "t".into(),
                y_label: "distance".into(),
                log_log: true,
            },
            &out.join("distances.svg"),
        )?;
    }
    let record = ExperimentRecord {
        run_id: run_id(cfg),
        config: cfg.clone(),
        fit_window: window,
        t_valid,
        fits: norm_fits(&recorder.reports, window),
        growth_ratio_max: growth.max_ratio(),
        growth_flagged: growth.flagged(),
        series: recorder.reports,
        scattering: Some(summary),
        warnings: horizon_warnings(cfg, t_valid),
        tool_version: TOOL_VERSION.into(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&record, &out.join("record.json"))?;
    Ok(ScatterOutcome {
        record,
        result,
        grid_probe_xi: probe_xi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryReport {
    pub config: OscillatoryConfig,
    pub rows: Vec<StationaryPhase>,
    /// Relative residuals strictly decrease along `s_values`.
    pub decreasing: bool,
    pub wall_clock_seconds: f64,
}

/// Stationary-phase residuals; writes `oscillatory.csv` and `oscillatory.json`.
pub fn command_oscillatory(cfg: &OscillatoryConfig, out: &Path) -> Result<OscillatoryReport> {
    let started = Instant::now();
    let rows = cfg
        .s_values
        .iter()
        .map(|&s| {
            stationary_phase_residual(&OscillatoryProbe {
                profile: cfg.profile,
                xi: cfg.xi,
                s,
                quad_resolution: cfg.quad_resolution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].relative < w[0].relative);
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                num(r.s),
                num(r.integral.value.re),
                num(r.integral.value.im),
                num(r.leading.re),
                num(r.leading.im),
                num(r.relative),
                num(r.integral.error_estimate),
                r.integral.nodes_per_axis
            )
        })
        .collect();
    write_lines(
        &out.join("oscillatory.csv"),
        "s,re_integral,im_integral,re_leading,im_leading,relative_residual,error_estimate,nodes",
        &lines,
    )?;
    let report = OscillatoryReport {
        config: cfg.clone(),
        rows,
        decreasing,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&report, &out.join("oscillatory.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveProfileReport {
    pub profile: ClosedFormProfile,
    pub ratios: Vec<DispersiveRatio>,
    pub max_ratio: f64,
    /// `d ln(ratio) / d ln(1+t)` between the last two times.
    pub final_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveReport {
    pub config: DispersiveConfig,
    pub profiles: Vec<DispersiveProfileReport>,
    pub wall_clock_seconds: f64,
}

/// Trend allowance for the ratio: the decay gap between the two majorant terms.
pub const DISPERSIVE_TREND_ALLOWANCE: f64 = 0.125;

/// Dispersive ratios per profile and time; writes `dispersive.csv` and `dispersive.json`.
pub fn command_dispersive(cfg: &DispersiveConfig, out: &Path, plot: bool) -> Result<DispersiveReport> {
    let started = Instant::now();
    let grid = SpectralGrid::new(cfg.half_length, cfg.size)?;
    let profiles = cfg
        .profiles
        .iter()
        .map(|p| {
            let ratios = cfg
                .t_values
                .iter()
                .map(|&t| dispersive_ratio(p, t, &grid))
                .collect::<Result<Vec<_>>>()?;
            let max_ratio = ratios.iter().map(|r| r.ratio).fold(0.0, f64::max);
            let final_slope = match ratios.as_slice() {
                [.., a, b] => (b.ratio / a.ratio).ln() / ((1.0 + b.t) / (1.0 + a.t)).ln(),
                _ => 0.0,
            };
            Ok(DispersiveProfileReport {
                profile: *p,
                ratios,
                max_ratio,
                final_slope,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lines = Vec::new();
    for (k, p) in profiles.iter().enumerate() {
        for r in &p.ratios {
            lines.push(format!("{k},{},{},{},{}", num(r.t), num(r.lhs), num(r.rhs), num(r.ratio)));
        }
    }
    write_lines(&out.join("dispersive.csv"), "profile,t,lhs,rhs,ratio", &lines)?;
    if plot {
        let series: Vec<PlotSeries> = profiles
            .iter()
            .enumerate()
            .map(|(k, p)| PlotSeries {
                label: format!("profile {k}"),
                points: p.ratios.iter().map(|r| (r.t, r.ratio)).collect(),
            })
            .collect();
        emit_plot(
            &series,
            &PlotOptions {
                title: "dispersive ratio".into(),
                x_label: "t".into(),
                y_label: "lhs / rhs".into(),
                log_log: true,
            },
            &out.join("dispersive.svg"),
        )?;
    }
    let report = DispersiveReport {
        config: cfg.clone(),
        profiles,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&report, &out.join("dispersive.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub n: f64,
    pub variant: PairVariant,
    pub value: f64,
    pub closed_form: f64,
    /// `|value - 2 pi|`
    pub error_to_two_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianIdentityReport {
    pub rows: Vec<PairRow>,
    /// `max sqrt(N) |value - 2 pi|` over the cutoff rows, so that
    /// `|value - 2 pi| <= C N^{-1/2}` holds on the sampled `N`.
    pub cutoff_constant: Option<f64>,
}

/// Pair integrals over `n_values`; writes `gaussian_identity.csv` and `.json`.
pub fn command_gaussian_identity(cfg: &GaussianIdentityConfig, out: &Path) -> Result<GaussianIdentityReport> {
    let mut rows = Vec::new();
    for &variant in &cfg.variants {
        for &n in &cfg.n_values {
            let value = gaussian_pair_integral(n, variant, cfg.quad_resolution)?.re;
            rows.push(PairRow {
                n,
                variant,
                value,
                closed_form: gaussian_pair_closed_form(n),
                error_to_two_pi: (value - 2.0 * std::f64::consts::PI).abs(),
            });
        }
    }
    let cutoff_constant = rows
        .iter()
        .filter(|r| r.variant == PairVariant::Cutoff)
        .map(|r| r.error_to_two_pi * r.n.sqrt())
        .reduce(f64::max);
    let lines: Vec<String> = rows
        .iter()
        .map(|r| {
            let v = match r.variant {
                PairVariant::Gaussian => "gaussian",
                PairVariant::Cutoff => "cutoff",
            };
            format!("{},{v},{},{},{}", num(r.n), num(r.value), num(r.closed_form), num(r.error_to_two_pi))
        })
        .collect();
    write_lines(&out.join("gaussian_identity.csv"), "N,variant,value,closed_form,error_to_two_pi", &lines)?;
    let report = GaussianIdentityReport { rows, cutoff_constant };
    write_json(&report, &out.join("gaussian_identity.json"))?;
    Ok(report)
}

/// Command selector used by batch manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Simulate,
    Scatter,
    Oscillatory,
    Dispersive,
    GaussianIdentity,
}

impl CommandKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "simulate" => CommandKind::Simulate,
            "scatter" => CommandKind::Scatter,
            "oscillatory" => CommandKind::Oscillatory,
            "dispersive" => CommandKind::Dispersive,
            "gaussian-identity" => CommandKind::GaussianIdentity,
            _ => return None,
        })
    }
}

/// Load a config of the given kind and run it into `out`; returns a one-line summary.
pub fn run_command(kind: CommandKind, config: &Path, out: &Path, plot: bool, override_horizon: bool) -> Result<String> {
    let load_run = || -> Result<ExperimentConfig> {
        let mut exp = load_experiment(config)?;
        exp.run.override_horizon |= override_horizon;
        Ok(exp)
    };
    Ok(match kind {
        CommandKind::Simulate => {
            let r = command_simulate(&load_run()?, out, plot)?;
            format!("simulate: {} outputs, run id {}", r.series.len(), r.run_id)
        }
        CommandKind::Scatter => {
            let r = command_scatter(&load_run()?, out, plot)?;
            format!("scatter: p1 = {:.4} (r2 = {:.3})", r.result.p1_estimate, r.result.p1_r2)
        }
        CommandKind::Oscillatory => {
            let r = command_oscillatory(&load_oscillatory(config)?, out)?;
            let last = r.rows.last().map_or(f64::NAN, |x| x.relative);
            format!("oscillatory: final relative residual {last:.4}, decreasing = {}", r.decreasing)
        }
        CommandKind::Dispersive => {
            let r = command_dispersive(&load_dispersive(config)?, out, plot)?;
            let worst = r.profiles.iter().map(|p| p.max_ratio).fold(0.0, f64::max);
            format!("dispersive: max ratio {worst:.4}")
        }
        CommandKind::GaussianIdentity => {
            let r = command_gaussian_identity(&load_gaussian_identity(config)?, out)?;
            match r.cutoff_constant {
                Some(c) => format!("gaussian-identity: {} values, cutoff constant C = {c:.4}", r.rows.len()),
                None => format!("gaussian-identity: {} values", r.rows.len()),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub command: CommandKind,
    pub config: PathBuf,
    pub out: PathBuf,
    pub ok: bool,
    pub message: String,
    pub error_kind: Option<String>,
}

/// Parse a manifest of `command path` lines (`#` comments); paths are
/// relative to the manifest.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<(CommandKind, PathBuf)>> {
    let mut jobs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut parts = body.split_whitespace();
        let (Some(cmd), Some(path), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected `command config-path`, found `{body}`"),
            });
        };
        let kind = CommandKind::parse(cmd).ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: format!("unknown command `{cmd}`"),
        })?;
        let p = PathBuf::from(path);
        jobs.push((kind, if p.is_relative() { base.join(p) } else { p }));
    }
    Ok(jobs)
}

/// Run manifest jobs concurrently, each into `out/<config stem>`; failures are
/// recorded per job and do not stop the others.
pub fn run_batch(manifest: &Path, out: &Path, plot: bool, override_horizon: bool) -> Result<Vec<BatchEntry>> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let jobs = parse_manifest(&text, base)?;
    let mut stems: Vec<String> = jobs
        .iter()
        .map(|(_, p)| p.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()))
        .collect();
    stems.sort();
    if stems.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("batch configs must have distinct file stems"));
    }
    let entries: Vec<BatchEntry> = jobs
        .par_iter()
        .map(|(kind, config)| {
            let stem = config.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let dir = out.join(stem);
            let (ok, message, error_kind) = match run_command(*kind, config, &dir, plot, override_horizon) {
                Ok(m) => (true, m, None),
                Err(e) => (false, e.to_string(), Some(e.kind().to_string())),
            };
            BatchEntry {
                command: *kind,
                config: config.clone(),
                out: dir,
                ok,
                message,
                error_kind,
            }
        })
        .collect();
    write_json(&entries, &out.join("batch.json"))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_experiment;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn zero_coefficients_give_constant_columns() {
        let exp = parse_experiment(
            "L = 32\nM = 256\nc0 = 0\nwidth = 0.1\ndt = 0.5\nT_end = 8\noutput_stride = 2\nsobolev_order = 2",
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let rec = command_simulate(&exp, dir.path(), true).unwrap();
        assert_eq!(rec.series.len(), 9);
        let first = rec.series[0];
        for r in &rec.series {
            assert_eq!(r.sobolev_hn, first.sobolev_hn);
            assert_eq!(r.w_norm, first.w_norm);
            assert_eq!(r.z_norm, first.z_norm);
            assert_eq!(r.mass, first.mass);
        }
        assert!(dir.path().join("timeseries.csv").exists());
        assert!(dir.path().join("norms.svg").exists());
        assert!(dir.path().join("record.json").exists());
    }

    #[test]
    fn gaussian_identity_values() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GaussianIdentityConfig {
            n_values: vec![1.0, 2.0],
            variants: vec![PairVariant::Gaussian],
            quad_resolution: 8,
        };
        let rows = command_gaussian_identity(&cfg, dir.path()).unwrap().rows;
        assert!((rows[0].value - 2.80993).abs() < 5e-6);
        assert!((rows[1].value - 5.619852).abs() < 1e-6);
    }

    #[test]
    fn manifest_parsing() {
        let jobs = parse_manifest("# runs\nsimulate a.cfg\nscatter /abs/b.cfg\n", Path::new("/base")).unwrap();
        assert_eq!(jobs[0], (CommandKind::Simulate, PathBuf::from("/base/a.cfg")));
        assert_eq!(jobs[1], (CommandKind::Scatter, PathBuf::from("/abs/b.cfg")));
        assert!(parse_manifest("fly a.cfg", Path::new(".")).is_err());
        assert!(parse_manifest("simulate", Path::new(".")).is_err());
    }

    #[test]
    fn batch_isolates_failures() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("good.cfg"), "n_values = 1\nvariants = gaussian\n").unwrap();
        std::fs::write(dir.path().join("bad.cfg"), "M = 1000\n").unwrap();
        std::fs::write(
            dir.path().join("jobs.txt"),
            "gaussian-identity good.cfg\nsimulate bad.cfg\n",
        )
        .unwrap();
        let out = dir.path().join("out");
        let entries = run_batch(&dir.path().join("jobs.txt"), &out, false, false).unwrap();
        assert!(entries[0].ok);
        assert!(!entries[1].ok);
        assert_eq!(entries[1].error_kind.as_deref(), Some("parse"));
        assert!(out.join("good/gaussian_identity.csv").exists());
        assert!(out.join("batch.json").exists());
    }
}
