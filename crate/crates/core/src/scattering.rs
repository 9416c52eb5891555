//! Phase correction, corrected profile and modified-scattering measurements.
//!
//! The running phase is
//!
//! ```text
//! H(xi, t) = (2 c0 / pi) |xi|^{3/2} int_0^t |f^(xi, s)|^2 ds / (s + 1)
//! ```
//!
//! and the corrected profile `g = e^{iH} f^` converges as `t -> inf` while
//! `f^` itself keeps rotating logarithmically.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{linear_fit, log_log_fit, SPECTRAL_FLOOR};
use crate::error::{Error, Result};
use crate::evolution::{Observer, OutputEvent, ProfileState};
use crate::spectral::SpectralGrid;

/// Trapezoidal accumulator for `H(xi, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAccumulator {
    pub h: Vec<f64>,
    pub last_time: f64,
    pub last_abs2: Vec<f64>,
    /// `(2/pi) |xi|^{3/2}` per node; `c0` is supplied at each update.
    weight: Vec<f64>,
}

impl PhaseAccumulator {
    /// Start at the time stamp of `state` with `H = 0`.
    pub fn new(state: &ProfileState, grid: &SpectralGrid) -> Result<Self> {
        if state.f_hat.len() != grid.size() {
            return Err(Error::invalid("profile length does not match the grid"));
        }
        Ok(Self {
            h: vec![0.0; grid.size()],
            last_time: state.t,
            last_abs2: state.f_hat.iter().map(|v| v.norm_sqr()).collect(),
            weight: grid.xi_nodes().iter().map(|xi| 2.0 / PI * xi.abs().powf(1.5)).collect(),
        })
    }

    /// Advance to `next.t` with one trapezoid panel.
    pub fn accumulate(&mut self, next: &ProfileState, c0: f64) -> Result<()> {
        if !(next.t > self.last_time) {
            return Err(Error::invalid(format!(
                "phase accumulation needs increasing time, got {} after {}",
                next.t, self.last_time
            )));
        }
        if next.f_hat.len() != self.h.len() {
            return Err(Error::invalid("profile length does not match the accumulator"));
        }
        let dt = next.t - self.last_time;
        let wp = 1.0 / (self.last_time + 1.0);
        let wn = 1.0 / (next.t + 1.0);
        for (i, v) in next.f_hat.iter().enumerate() {
            let a2 = v.norm_sqr();
            self.h[i] += c0 * self.weight[i] * 0.5 * (self.last_abs2[i] * wp + a2 * wn) * dt;
            self.last_abs2[i] = a2;
        }
        self.last_time = next.t;
        Ok(())
    }
}

/// Functional form of [`PhaseAccumulator::accumulate`].
pub fn accumulate_phase(acc: &PhaseAccumulator, state_next: &ProfileState, c0: f64) -> Result<PhaseAccumulator> {
    let mut out = acc.clone();
    out.accumulate(state_next, c0)?;
    Ok(out)
}

/// `g = e^{iH} f^`.
pub fn corrected_profile(state: &ProfileState, acc: &PhaseAccumulator) -> Result<Vec<Complex64>> {
    if (state.t - acc.last_time).abs() > 1e-12 * state.t.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "accumulator is at t = {}, state is at t = {}",
            acc.last_time, state.t
        )));
    }
    if state.f_hat.len() != acc.h.len() {
        return Err(Error::invalid("profile length does not match the accumulator"));
    }
    Ok(state
        .f_hat
        .iter()
        .zip(&acc.h)
        .map(|(f, &h)| f * Complex64::cis(h))
        .collect())
}

/// `max (1+|xi|)^10 |g2 - g1|` over dealiased modes where either profile is above the floor.
pub fn scattering_distance(g1: &[Complex64], g2: &[Complex64], grid: &SpectralGrid) -> Result<f64> {
    if g1.len() != grid.size() || g2.len() != grid.size() {
        return Err(Error::invalid("profiles do not match the grid"));
    }
    let peak = g1.iter().chain(g2).map(|v| v.norm()).fold(0.0, f64::max);
    let floor = SPECTRAL_FLOOR * peak;
    Ok(g1
        .iter()
        .zip(g2)
        .zip(grid.xi_nodes())
        .zip(grid.dealias_mask())
        .filter(|(((a, b), _), &keep)| keep && (a.norm() >= floor || b.norm() >= floor))
        .map(|(((a, b), &xi), _)| (1.0 + xi.abs()).powi(10) * (b - a).norm())
        .fold(0.0, f64::max))
}

/// Phase-slope comparison at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSlopeCheck {
    pub xi0: f64,
    pub observed: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    /// Corrected profile at the latest snapshot.
    pub w_infinity: Vec<Complex64>,
    /// Decay rate of consecutive corrected distances; NaN when they all vanish.
    pub p1_estimate: f64,
    pub p1_r2: f64,
    /// `(t, d(g(t), w_inf))` for every snapshot before the latest.
    pub residual_series: Vec<(f64, f64)>,
    /// `(t_k, d(g(t_{k+1}), g(t_k)))` over consecutive snapshots.
    pub consecutive_distances: Vec<(f64, f64)>,
    pub phase_slope_checks: Vec<PhaseSlopeCheck>,
}

/// Summarise a run from its (roughly dyadic) snapshots and matching accumulators.
///
/// `p1` is fitted to the consecutive distances `d(g(t_{k+1}), g(t_k))`: for
/// `g = w + O(t^{-p})` these follow the power law directly, whereas distances
/// to the final snapshot flatten as `t` approaches it.
pub fn extract_w_infinity(
    snapshots: &[(ProfileState, PhaseAccumulator)],
    grid: &SpectralGrid,
) -> Result<ScatteringResult> {
    if snapshots.len() < 4 {
        return Err(Error::invalid(format!(
            "w_inf extraction needs at least 4 snapshots, got {}",
            snapshots.len()
        )));
    }
    if snapshots.windows(2).any(|w| !(w[1].0.t > w[0].0.t)) {
        return Err(Error::invalid("snapshot times must be strictly increasing"));
    }
    let gs: Vec<Vec<Complex64>> = snapshots
        .iter()
        .map(|(s, a)| corrected_profile(s, a))
        .collect::<Result<_>>()?;
    let w_inf = gs.last().unwrap().clone();

    let mut residual_series = Vec::with_capacity(gs.len() - 1);
    let mut consecutive = Vec::with_capacity(gs.len() - 1);
    for k in 0..gs.len() - 1 {
        let t = snapshots[k].0.t;
        residual_series.push((t, scattering_distance(&gs[k], &w_inf, grid)?));
        consecutive.push((t, scattering_distance(&gs[k], &gs[k + 1], grid)?));
    }

    let (p1_estimate, p1_r2) = if consecutive.iter().all(|&(_, d)| d > 0.0) {
        let fit = log_log_fit(&consecutive)?;
        (-fit.exponent, fit.r2)
    } else {
        (f64::NAN, 0.0)
    };

    Ok(ScatteringResult {
        w_infinity: w_inf,
        p1_estimate,
        p1_r2,
        residual_series,
        consecutive_distances: consecutive,
        phase_slope_checks: Vec::new(),
    })
}

/// Continue a phase series along the nearest branch.
pub fn unwrap_phase(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    for (i, &p) in raw.iter().enumerate() {
        if i > 0 {
            let prev = raw[i - 1];
            let d = p - prev;
            offset -= (d / (2.0 * PI)).round() * 2.0 * PI;
        }
        out.push(p + offset);
    }
    out
}

/// Slope of the unwrapped `arg f^(xi0, t)` against `ln(1+t)`, with the
/// prediction `-(2 c0 / pi) |xi0|^{3/2} |w|^2`.
pub fn log_phase_slope(series: &[(f64, f64)], w_mag: f64, c0: f64, xi0: f64) -> Result<PhaseSlopeCheck> {
    if series.len() < 5 {
        return Err(Error::invalid(format!(
            "phase slope needs at least 5 samples, got {}",
            series.len()
        )));
    }
    for w in series.windows(2) {
        if (w[1].1 - w[0].1).abs() > PI {
            return Err(Error::invalid(format!(
                "phase jumps by more than pi between t = {} and t = {}; sample more densely",
                w[0].0, w[1].0
            )));
        }
    }
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln_1p()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1).collect();
    let (observed, _) = linear_fit(&xs, &ys)?;
    Ok(PhaseSlopeCheck {
        xi0,
        observed,
        predicted: -2.0 * c0 / PI * xi0.abs().powf(1.5) * w_mag * w_mag,
    })
}

/// Observer that accumulates `H` on every step and keeps snapshot pairs,
/// the uncorrected profile at each snapshot, and the phase of `f^` at one node.
#[derive(Debug, Clone)]
pub struct ScatteringObserver {
    c0: f64,
    probe_node: usize,
    pub accumulator: Option<PhaseAccumulator>,
    pub snapshots: Vec<(ProfileState, PhaseAccumulator)>,
    /// Raw `(t, arg f^(xi0, t))` at every output event.
    pub phase_samples: Vec<(f64, f64)>,
}

impl ScatteringObserver {
    pub fn new(c0: f64, xi0: f64, grid: &SpectralGrid) -> Self {
        Self {
            c0,
            probe_node: grid.nearest_node(xi0),
            accumulator: None,
            snapshots: Vec::new(),
            phase_samples: Vec::new(),
        }
    }

    /// Node actually used for the phase probe.
    pub fn probe_xi(&self, grid: &SpectralGrid) -> f64 {
        grid.xi_nodes()[self.probe_node]
    }

    /// Unwrapped phase series.
    pub fn unwrapped_phase(&self) -> Vec<(f64, f64)> {
        let raw: Vec<f64> = self.phase_samples.iter().map(|p| p.1).collect();
        self.phase_samples
            .iter()
            .zip(unwrap_phase(&raw))
            .map(|(p, u)| (p.0, u))
            .collect()
    }
}

impl Observer for ScatteringObserver {
    fn on_step(&mut self, state: &ProfileState, _grid: &SpectralGrid) -> Result<()> {
        match self.accumulator.as_mut() {
            Some(acc) => acc.accumulate(state, self.c0),
            None => Err(Error::invalid("scattering observer saw a step before the initial output")),
        }
    }

    fn on_output(&mut self, state: &ProfileState, grid: &SpectralGrid, event: OutputEvent) -> Result<()> {
        if event.initial {
            self.accumulator = Some(PhaseAccumulator::new(state, grid)?);
        }
        self.phase_samples.push((state.t, state.f_hat[self.probe_node].arg()));
        if event.snapshot {
            let acc = self.accumulator.clone().expect("initialised at the first output");
            self.snapshots.push((state.clone(), acc));
        }
        Ok(())
    }
}

/// Uncorrected distances `d(f^(t_{k+1}), f^(t_k))` between consecutive snapshots.
pub fn uncorrected_distances(snapshots: &[(ProfileState, PhaseAccumulator)], grid: &SpectralGrid) -> Result<Vec<(f64, f64)>> {
    snapshots
        .windows(2)
        .map(|w| Ok((w[0].0.t, scattering_distance(&w[0].0.f_hat, &w[1].0.f_hat, grid)?)))
        .collect()
}
