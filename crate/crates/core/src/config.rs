//! Plain-text `key = value` configuration files.
//!
//! `#` starts a comment. Each key may appear once, except `profile` in
//! dispersive configs. Errors carry the 1-based line number.
//!
//! Run keys and defaults:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `L` | 64 | half-length of the periodic box |
//! | `M` | 2048 | grid size, power of two |
//! | `c0` | 1 | real gauge coefficient |
//! | `c1_re`, `c1_im`, `c2_re`, `c2_im`, `c3_re`, `c3_im` | 0 | complex coefficients |
//! | `family` | `gaussian_packet` | or `double_packet`, `custom_table` |
//! | `table` | | CSV path for `custom_table`, relative to the config file |
//! | `eps0` | 0.05 | amplitude, at most 0.5 |
//! | `xi_center` | 1 | packet center |
//! | `width` | 0.25 | packet width |
//! | `phase` | 0 | constant phase |
//! | `dt` | 0.01 | time step |
//! | `T_end` | 100 | final time |
//! | `output_stride` | 100 | steps between outputs |
//! | `snapshot_times` | none | comma list, strictly increasing |
//! | `seed` | 0 | reserved for randomized profiles |
//! | `sobolev_order` | 8 | order of the `H^N` diagnostic |
//! | `override_horizon` | false | skip the wrap-around guard |
//! | `fit_window` | `T_end/100, T_end` | window for power-law fits |
//! | `probe_xi` | 1 | frequency of the log-phase probe |
//! | `phase_window` | `fit_window` | window for the log-phase slope |
//! | `growth_limit` | 10 | flag level of the energy-growth ratio |

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::RunConfig;
use crate::initial::{Family, MAX_AMPLITUDE};
use crate::oscillatory::{ClosedFormProfile, PairVariant};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, found `{body}`"),
        })?;
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty key".into(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn fail(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Rejects duplicates other than `repeatable` and keys outside `allowed`.
fn check_keys(entries: &[Entry], allowed: &[&str], repeatable: &[&str]) -> Result<()> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for e in entries {
        if !allowed.contains(&e.key.as_str()) {
            return Err(fail(e.line, format!("unknown key `{}`", e.key)));
        }
        if let Some(first) = seen.insert(&e.key, e.line) {
            if !repeatable.contains(&e.key.as_str()) {
                return Err(fail(e.line, format!("duplicate key `{}` (first on line {first})", e.key)));
            }
        }
    }
    Ok(())
}

fn real(e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(fail(e.line, format!("`{}`: unparsable number `{}`", e.key, e.value))),
    }
}

fn positive(e: &Entry) -> Result<f64> {
    let v = real(e)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(fail(e.line, format!("`{}` must be positive, got {v}", e.key)))
    }
}

fn integer<T: std::str::FromStr>(e: &Entry) -> Result<T> {
    e.value
        .parse::<T>()
        .map_err(|_| fail(e.line, format!("`{}`: expected a non-negative integer, got `{}`", e.key, e.value)))
}

fn real_list(e: &Entry) -> Result<Vec<f64>> {
    if e.value.is_empty() {
        return Ok(Vec::new());
    }
    e.value
        .split(',')
        .map(|s| match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(fail(e.line, format!("`{}`: unparsable number `{}`", e.key, s.trim()))),
        })
        .collect()
}

fn increasing_positive(e: &Entry) -> Result<Vec<f64>> {
    let v = real_list(e)?;
    let mut prev = 0.0;
    for &x in &v {
        if !(x > prev) {
            return Err(fail(e.line, format!("`{}` must be positive and strictly increasing", e.key)));
        }
        prev = x;
    }
    Ok(v)
}

fn window(e: &Entry) -> Result<(f64, f64)> {
    match increasing_positive(e)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(fail(e.line, format!("`{}` takes two times `lo, hi`", e.key))),
    }
}

fn boolean(e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(fail(e.line, format!("`{}`: expected true or false, got `{}`", e.key, e.value))),
    }
}

fn grid_size(e: &Entry) -> Result<usize> {
    let m: usize = integer(e)?;
    if m < 16 || !m.is_power_of_two() {
        return Err(fail(e.line, format!("M must be a power of two >= 16, got {m}")));
    }
    Ok(m)
}

/// A run plus the analysis settings used by `simulate` and `scatter`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub fit_window: Option<(f64, f64)>,
    pub phase_window: Option<(f64, f64)>,
    pub probe_xi: f64,
    pub growth_limit: f64,
}

impl ExperimentConfig {
    /// Explicit window, or `[T_end/100, T_end]`.
    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.run.t_end / 100.0, self.run.t_end))
    }

    /// Explicit window, or the fit window.
    pub fn phase_window(&self) -> (f64, f64) {
        self.phase_window.unwrap_or_else(|| self.fit_window())
    }
}

const RUN_KEYS: &[&str] = &[
    "L",
    "M",
    "c0",
    "c1_re",
    "c1_im",
    "c2_re",
    "c2_im",
    "c3_re",
    "c3_im",
    "family",
    "table",
    "eps0",
    "xi_center",
    "width",
    "phase",
    "dt",
    "T_end",
    "output_stride",
    "snapshot_times",
    "seed",
    "sobolev_order",
    "override_horizon",
    "fit_window",
    "probe_xi",
    "phase_window",
    "growth_limit",
];

/// Parse a run configuration; analysis keys are accepted and ignored.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_experiment(text).map(|e| e.run)
}

pub fn parse_experiment(text: &str) -> Result<ExperimentConfig> {
    let entries = entries(text)?;
    check_keys(&entries, RUN_KEYS, &[])?;
    let mut cfg = RunConfig::default();
    let mut exp = ExperimentConfig {
        run: RunConfig::default(),
        fit_window: None,
        phase_window: None,
        probe_xi: 1.0,
        growth_limit: 10.0,
    };
    let mut family_line = None;
    let mut table: Option<PathBuf> = None;
    let set_c = |slot: &mut Complex64, re: bool, e: &Entry| -> Result<()> {
        let v = real(e)?;
        if re {
            slot.re = v;
        } else {
            slot.im = v;
        }
        Ok(())
    };
    for e in &entries {
        match e.key.as_str() {
            "L" => cfg.half_length = positive(e)?,
            "M" => cfg.size = grid_size(e)?,
            "c0" => cfg.coefficients.c0 = real(e)?,
            "c1_re" => set_c(&mut cfg.coefficients.c1, true, e)?,
            "c1_im" => set_c(&mut cfg.coefficients.c1, false, e)?,
            "c2_re" => set_c(&mut cfg.coefficients.c2, true, e)?,
            "c2_im" => set_c(&mut cfg.coefficients.c2, false, e)?,
            "c3_re" => set_c(&mut cfg.coefficients.c3, true, e)?,
            "c3_im" => set_c(&mut cfg.coefficients.c3, false, e)?,
            "family" => {
                family_line = Some(e.line);
                cfg.initial.family = match e.value.as_str() {
                    "gaussian_packet" => Family::GaussianPacket,
                    "double_packet" => Family::DoublePacket,
                    "custom_table" => Family::CustomTable { path: PathBuf::new() },
                    other => {
                        return Err(fail(
                            e.line,
                            format!("unknown family `{other}`; expected gaussian_packet, double_packet or custom_table"),
                        ))
                    }
                }
            }
            "table" => table = Some(PathBuf::from(&e.value)),
            "eps0" => {
                let v = positive(e)?;
                if v > MAX_AMPLITUDE {
                    return Err(fail(
                        e.line,
                        format!("eps0 = {v} exceeds the small-data bound {MAX_AMPLITUDE}"),
                    ));
                }
                cfg.initial.amplitude = v;
            }
            "xi_center" => cfg.initial.center = real(e)?,
            "width" => cfg.initial.width = positive(e)?,
            "phase" => cfg.initial.phase = real(e)?,
            "dt" => cfg.dt = positive(e)?,
            "T_end" => cfg.t_end = positive(e)?,
            "output_stride" => {
                cfg.output_stride = integer(e)?;
                if cfg.output_stride == 0 {
                    return Err(fail(e.line, "output_stride must be >= 1"));
                }
            }
            "snapshot_times" => cfg.snapshot_times = increasing_positive(e)?,
            "seed" => cfg.seed = integer(e)?,
            "sobolev_order" => {
                cfg.sobolev_order = integer(e)?;
                if cfg.sobolev_order > 200 {
                    return Err(fail(e.line, "sobolev_order must be <= 200"));
                }
            }
            "override_horizon" => cfg.override_horizon = boolean(e)?,
            "fit_window" => exp.fit_window = Some(window(e)?),
            "phase_window" => exp.phase_window = Some(window(e)?),
            "probe_xi" => exp.probe_xi = real(e)?,
            "growth_limit" => exp.growth_limit = positive(e)?,
            _ => unreachable!("keys checked above"),
        }
    }
    match (&mut cfg.initial.family, table) {
        (Family::CustomTable { path }, Some(t)) => *path = t,
        (Family::CustomTable { .. }, None) => {
            return Err(fail(family_line.unwrap_or(0), "custom_table needs a `table` path"));
        }
        (_, Some(_)) => {
            let line = entries.iter().find(|e| e.key == "table").map_or(0, |e| e.line);
            return Err(fail(line, "`table` is only valid with family = custom_table"));
        }
        (_, None) => {}
    }
    if let Err(err) = cfg.validate() {
        let line = entries.last().map_or(0, |e| e.line);
        return Err(fail(line, err.to_string()));
    }
    exp.run = cfg;
    Ok(exp)
}

/// Read a run config from disk; a relative `table` path is taken relative to the file.
pub fn load_experiment(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut exp = parse_experiment(&text).map_err(|e| with_path(e, path))?;
    if let Family::CustomTable { path: table } = &mut exp.run.initial.family {
        if table.is_relative() {
            if let Some(dir) = path.parent() {
                *table = dir.join(&*table);
            }
        }
    }
    Ok(exp)
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Stationary-phase probe over a list of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryConfig {
    pub profile: ClosedFormProfile,
    pub xi: f64,
    pub s_values: Vec<f64>,
    pub quad_resolution: usize,
}

/// Largest `s` accepted unless `allow_large_s = true`; cost grows like `s^2`.
pub const STANDARD_MAX_S: f64 = 1024.0;

/// Keys: `center` (2), `width` (1), `amplitude` (1), `phase` (0), `xi` (2),
/// `s_values` (64,128,256,512), `quad_resolution` (8), `allow_large_s` (false).
pub fn parse_oscillatory(text: &str) -> Result<OscillatoryConfig> {
    let entries = entries(text)?;
    check_keys(
        &entries,
        &["center", "width", "amplitude", "phase", "xi", "s_values", "quad_resolution", "allow_large_s"],
        &[],
    )?;
    let (mut center, mut width, mut amplitude, mut phase) = (2.0, 1.0, 1.0, 0.0);
    let mut allow_large_s = false;
    let mut s_line = 0;
    let mut cfg = OscillatoryConfig {
        profile: ClosedFormProfile::Zero,
        xi: 2.0,
        s_values: vec![64.0, 128.0, 256.0, 512.0],
        quad_resolution: 8,
    };
    for e in &entries {
        match e.key.as_str() {
            "center" => center = real(e)?,
            "width" => width = positive(e)?,
            "amplitude" => amplitude = real(e)?,
            "phase" => phase = real(e)?,
            "xi" => cfg.xi = real(e)?,
            "allow_large_s" => allow_large_s = boolean(e)?,
            "s_values" => {
                s_line = e.line;
                cfg.s_values = real_list(e)?;
                if cfg.s_values.is_empty() || cfg.s_values.iter().any(|&s| s < 0.0) {
                    return Err(fail(e.line, "s_values must be a non-empty list of s >= 0"));
                }
            }
            "quad_resolution" => {
                cfg.quad_resolution = integer(e)?;
                if cfg.quad_resolution < 8 {
                    return Err(fail(e.line, "quad_resolution must be >= 8"));
                }
            }
            _ => unreachable!("keys checked above"),
        }
    }
    if !allow_large_s && cfg.s_values.iter().any(|&s| s > STANDARD_MAX_S) {
        return Err(fail(
            s_line,
            format!("s above {STANDARD_MAX_S} needs `allow_large_s = true`"),
        ));
    }
    cfg.profile = ClosedFormProfile::ShiftedGaussian {
        amplitude,
        center,
        width,
        phase,
    };
    Ok(cfg)
}

pub fn load_oscillatory(path: &Path) -> Result<OscillatoryConfig> {
    parse_oscillatory(&read_file(path)?).map_err(|e| with_path(e, path))
}

/// Free-flow dispersive check over several packets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveConfig {
    pub half_length: f64,
    pub size: usize,
    pub t_values: Vec<f64>,
    pub profiles: Vec<ClosedFormProfile>,
}

/// Keys: `L` (2048), `M` (16384), `t_values` (1,10,100,1000), and one
/// `profile = center, width[, phase]` line per packet (unit amplitude).
pub fn parse_dispersive(text: &str) -> Result<DispersiveConfig> {
    let entries = entries(text)?;
    check_keys(&entries, &["L", "M", "t_values", "profile"], &["profile"])?;
    let mut cfg = DispersiveConfig {
        half_length: 2048.0,
        size: 16384,
        t_values: vec![1.0, 10.0, 100.0, 1000.0],
        profiles: Vec::new(),
    };
    for e in &entries {
        match e.key.as_str() {
            "L" => cfg.half_length = positive(e)?,
            "M" => cfg.size = grid_size(e)?,
            "t_values" => {
                cfg.t_values = increasing_positive(e)?;
                if cfg.t_values.is_empty() {
                    return Err(fail(e.line, "t_values must not be empty"));
                }
            }
            "profile" => {
                let v = real_list(e)?;
                if !(v.len() == 2 || v.len() == 3) || v[1] <= 0.0 {
                    return Err(fail(e.line, "profile takes `center, width[, phase]` with width > 0"));
                }
                cfg.profiles.push(ClosedFormProfile::ShiftedGaussian {
                    amplitude: 1.0,
                    center: v[0],
                    width: v[1],
                    phase: v.get(2).copied().unwrap_or(0.0),
                });
            }
            _ => unreachable!("keys checked above"),
        }
    }
    if cfg.profiles.is_empty() {
        cfg.profiles.push(ClosedFormProfile::gaussian(1.0, 0.5));
    }
    Ok(cfg)
}

pub fn load_dispersive(path: &Path) -> Result<DispersiveConfig> {
    parse_dispersive(&read_file(path)?).map_err(|e| with_path(e, path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianIdentityConfig {
    pub n_values: Vec<f64>,
    pub variants: Vec<PairVariant>,
    pub quad_resolution: usize,
}

/// Keys: `n_values` (1,2,4,16,64), `variants` (gaussian,cutoff), `quad_resolution` (8).
pub fn parse_gaussian_identity(text: &str) -> Result<GaussianIdentityConfig> {
    let entries = entries(text)?;
    check_keys(&entries, &["n_values", "variants", "quad_resolution"], &[])?;
    let mut cfg = GaussianIdentityConfig {
        n_values: vec![1.0, 2.0, 4.0, 16.0, 64.0],
        variants: vec![PairVariant::Gaussian, PairVariant::Cutoff],
        quad_resolution: 8,
    };
    for e in &entries {
        match e.key.as_str() {
            "n_values" => {
                cfg.n_values = increasing_positive(e)?;
                if cfg.n_values.is_empty() {
                    return Err(fail(e.line, "n_values must not be empty"));
                }
            }
            "variants" => {
                cfg.variants = e
                    .value
                    .split(',')
                    .map(|v| match v.trim() {
                        "gaussian" => Ok(PairVariant::Gaussian),
                        "cutoff" => Ok(PairVariant::Cutoff),
                        other => Err(fail(e.line, format!("unknown variant `{other}`"))),
                    })
                    .collect::<Result<_>>()?;
            }
            "quad_resolution" => {
                cfg.quad_resolution = integer(e)?;
                if cfg.quad_resolution < 8 {
                    return Err(fail(e.line, "quad_resolution must be >= 8"));
                }
            }
            _ => unreachable!("keys checked above"),
        }
    }
    Ok(cfg)
}

pub fn load_gaussian_identity(path: &Path) -> Result<GaussianIdentityConfig> {
    parse_gaussian_identity(&read_file(path)?).map_err(|e| with_path(e, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Coefficients;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config("c0 = 1.0\nT_end = 100").unwrap();
        assert_eq!(cfg.coefficients, Coefficients::gauge(1.0));
        assert_eq!(cfg.half_length, 64.0);
        assert_eq!(cfg.size, 2048);
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.output_stride, 100);
        assert_eq!(cfg.t_end, 100.0);
    }

    #[test]
    fn grid_size_must_be_power_of_two() {
        let err = parse_config("c0 = 1\nM = 1000").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn amplitude_bound() {
        let err = parse_config("eps0 = 0.9").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(matches!(parse_config("# c\n\nfoo = 1").unwrap_err(), Error::Parse { line: 3, .. }));
        assert!(matches!(parse_config("dt = 0.1\ndt = 0.2").unwrap_err(), Error::Parse { line: 2, .. }));
        assert!(matches!(parse_config("dt = fast").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(parse_config("dt").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn full_config() {
        let text = "L = 128 # box\nM = 4096\nc0 = 0.5\nc1_re = 0.1\nc3_im = -0.2\nfamily = double_packet\n\
                    eps0 = 0.1\nxi_center = 1.5\nwidth = 0.3\nphase = 0.7\ndt = 0.05\nT_end = 64\n\
                    output_stride = 4\nsnapshot_times = 8, 16,32 , 64\nseed = 7\nsobolev_order = 4\n\
                    override_horizon = true\nfit_window = 2, 64\nprobe_xi = 1.5\nphase_window = 16, 64";
        let exp = parse_experiment(text).unwrap();
        let cfg = &exp.run;
        assert_eq!(cfg.half_length, 128.0);
        assert_eq!(cfg.coefficients.c1, Complex64::new(0.1, 0.0));
        assert_eq!(cfg.coefficients.c3, Complex64::new(0.0, -0.2));
        assert_eq!(cfg.initial.family, Family::DoublePacket);
        assert_eq!(cfg.snapshot_times, vec![8.0, 16.0, 32.0, 64.0]);
        assert_eq!(cfg.seed, 7);
        assert!(cfg.override_horizon);
        assert_eq!(exp.fit_window(), (2.0, 64.0));
        assert_eq!(exp.probe_xi, 1.5);
        assert_eq!(exp.phase_window(), (16.0, 64.0));
    }

    #[test]
    fn cross_field_invariants() {
        assert!(parse_config("T_end = 10\nsnapshot_times = 5, 20").is_err());
        assert!(parse_config("snapshot_times = 5, 3").is_err());
        assert!(parse_config("family = custom_table").is_err());
        assert!(parse_config("table = x.csv").is_err());
        let cfg = parse_config("family = custom_table\ntable = x.csv").unwrap();
        assert_eq!(cfg.initial.family, Family::CustomTable { path: "x.csv".into() });
    }

    #[test]
    fn auxiliary_configs() {
        let o = parse_oscillatory("xi = 2\ns_values = 64, 128").unwrap();
        assert_eq!(o.s_values, vec![64.0, 128.0]);
        assert!(parse_oscillatory("quad_resolution = 4").is_err());
        assert!(parse_oscillatory("s_values = 2048").is_err());
        assert!(parse_oscillatory("s_values = 2048\nallow_large_s = true").is_ok());
        let d = parse_dispersive("profile = 1, 0.5\nprofile = 2, 1.5, 0.3").unwrap();
        assert_eq!(d.profiles.len(), 2);
        assert!(parse_dispersive("t_values = 1\nt_values = 2").is_err());
        let g = parse_gaussian_identity("n_values = 1, 2\nvariants = gaussian").unwrap();
        assert_eq!(g.variants, vec![PairVariant::Gaussian]);
        assert!(parse_gaussian_identity("variants = other").is_err());
    }
}
