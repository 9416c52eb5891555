//! Time integration of the profile equation.
//!
//! In profile variables the free flow is factored out exactly:
//!
//! ```text
//! d/dt f^(xi) = -i e^{i t Lambda(xi)} F[ N(u) ](xi),   u = F^{-1}[ e^{-i t Lambda} f^ ]
//! ```
//!
//! with `N(u) = c0 |u|^2 u + c1 u^3 + c2 u conj(u)^2 + c3 conj(u)^3`. Cubic products are
//! formed on a 2x padded grid and the result is cut back to the 2/3 mask, so the
//! right-hand side is the exact (alias-free) Galerkin truncation of the
//! convolution integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial::InitialDataSpec;
use crate::spectral::{lambda_symbol, SpectralGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients of the cubic nonlinearity. `c0` is real by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c0: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
}

impl Coefficients {
    pub const ZERO: Coefficients = Coefficients {
        c0: 0.0,
        c1: ZERO,
        c2: ZERO,
        c3: ZERO,
    };

    /// Gauge-invariant nonlinearity `c0 |u|^2 u`.
    pub fn gauge(c0: f64) -> Self {
        Self { c0, ..Self::ZERO }
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c1 == ZERO && self.c2 == ZERO && self.c3 == ZERO
    }

    pub fn is_gauge_invariant(&self) -> bool {
        self.c1 == ZERO && self.c2 == ZERO && self.c3 == ZERO
    }
}

/// Profile spectrum at time `t`, on the grid's physical frequency order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub t: f64,
    pub f_hat: Vec<Complex64>,
}

impl ProfileState {
    /// Build a state, projecting onto the dealias mask.
    pub fn new(t: f64, mut f_hat: Vec<Complex64>, grid: &SpectralGrid) -> Result<Self> {
        if f_hat.len() != grid.size() {
            return Err(Error::invalid(format!(
                "profile has {} modes, grid has M = {}",
                f_hat.len(),
                grid.size()
            )));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("time stamp must be finite and >= 0, got {t}")));
        }
        if f_hat.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("profile contains non-finite entries"));
        }
        grid.apply_dealias(&mut f_hat);
        Ok(Self { t, f_hat })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            t: 0.0,
            f_hat: vec![ZERO; grid.size()],
        }
    }

    /// Solution spectrum `u^ = e^{-i t Lambda} f^`.
    pub fn solution_spectrum(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        grid.half_wave_propagator(&self.f_hat, self.t)
    }

    /// Physical samples of `u(t)` on the grid nodes.
    pub fn solution(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        grid.inverse_transform(&self.solution_spectrum(grid)?)
    }

    fn is_finite(&self) -> bool {
        self.f_hat.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Pointwise cubic nonlinearity.
pub fn nonlinearity(u: &[Complex64], c: &Coefficients) -> Vec<Complex64> {
    u.iter()
        .map(|&v| {
            let vb = v.conj();
            v * v.norm_sqr() * c.c0 + c.c1 * v * v * v + c.c2 * v * vb * vb + c.c3 * vb * vb * vb
        })
        .collect()
}

/// Right-hand side of the profile equation at `(t, f_hat)`.
pub fn profile_rhs(state: &ProfileState, c: &Coefficients, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
    if state.f_hat.len() != grid.size() {
        return Err(Error::invalid(format!(
            "profile has {} modes, grid has M = {}",
            state.f_hat.len(),
            grid.size()
        )));
    }
    rhs_at(state.t, &state.f_hat, c, grid)
}

fn rhs_at(t: f64, f_hat: &[Complex64], c: &Coefficients, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
    if c.is_zero() {
        return Ok(vec![ZERO; grid.size()]);
    }
    let phases: Vec<Complex64> = grid
        .xi_nodes()
        .iter()
        .map(|&xi| Complex64::cis(t * lambda_symbol(xi)))
        .collect();
    let u_hat: Vec<Complex64> = f_hat.iter().zip(&phases).map(|(f, p)| f * p.conj()).collect();
    let u = grid.synthesize_padded(&u_hat)?;
    let n_hat = grid.analyze_padded(nonlinearity(&u, c))?;
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(n_hat
        .iter()
        .zip(&phases)
        .zip(grid.dealias_mask())
        .map(|((n, p), &keep)| if keep { minus_i * p * n } else { ZERO })
        .collect())
}

/// One classical RK4 step of size `dt` on the profile equation.
pub fn rk4_step(state: &ProfileState, c: &Coefficients, grid: &SpectralGrid, dt: f64) -> Result<ProfileState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if state.f_hat.len() != grid.size() {
        return Err(Error::invalid("profile length does not match the grid"));
    }
    let t = state.t;
    let f = &state.f_hat;
    if c.is_zero() {
        return Ok(ProfileState {
            t: t + dt,
            f_hat: f.clone(),
        });
    }
    let axpy = |k: &[Complex64], a: f64| -> Vec<Complex64> { f.iter().zip(k).map(|(x, y)| x + y * a).collect() };

    let k1 = rhs_at(t, f, c, grid)?;
    let k2 = rhs_at(t + 0.5 * dt, &axpy(&k1, 0.5 * dt), c, grid)?;
    let k3 = rhs_at(t + 0.5 * dt, &axpy(&k2, 0.5 * dt), c, grid)?;
    let k4 = rhs_at(t + dt, &axpy(&k3, dt), c, grid)?;

    let w = dt / 6.0;
    let f_hat = (0..f.len())
        .map(|i| f[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w)
        .collect();
    let next = ProfileState { t: t + dt, f_hat };
    if !next.is_finite() {
        return Err(Error::NumericalBlowup { t: next.t });
    }
    Ok(next)
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub half_length: f64,
    pub size: usize,
    pub coefficients: Coefficients,
    pub initial: InitialDataSpec,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
    /// Sobolev order used in the norm diagnostics.
    pub sobolev_order: u32,
    /// Disable the wrap-around horizon guard.
    pub override_horizon: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            half_length: 64.0,
            size: 2048,
            coefficients: Coefficients::gauge(1.0),
            initial: InitialDataSpec::default(),
            dt: 0.01,
            t_end: 100.0,
            output_stride: 100,
            snapshot_times: Vec::new(),
            seed: 0,
            sobolev_order: crate::diagnostics::DEFAULT_SOBOLEV_ORDER,
            override_horizon: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        SpectralGrid::new(self.half_length, self.size)?;
        self.initial.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::invalid(format!(
                "T_end must be >= dt, got T_end = {} and dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::invalid("output_stride must be >= 1"));
        }
        let mut prev = 0.0;
        for &s in &self.snapshot_times {
            if !(s > prev && s <= self.t_end) {
                return Err(Error::invalid(format!(
                    "snapshot times must be strictly increasing within (0, T_end], got {s}"
                )));
            }
            prev = s;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.half_length, self.size)
    }
}

/// Fraction of the Z norm below which a mode no longer counts as carrying data.
pub const HORIZON_THRESHOLD: f64 = 1e-8;

/// Time after which the fastest significant low-frequency component has
/// crossed the half-box: `2 L sqrt(xi_min)`, where `xi_min` is the smallest
/// `|xi|` with `(1+|xi|)^10 |f^| >= 1e-8 * Z`. Zero data never wraps.
pub fn validity_horizon(f_hat: &[Complex64], grid: &SpectralGrid) -> f64 {
    let z = crate::diagnostics::z_norm(f_hat, grid);
    if z == 0.0 {
        return f64::INFINITY;
    }
    let xi_min = f_hat
        .iter()
        .zip(grid.xi_nodes())
        .filter(|(v, &xi)| (1.0 + xi.abs()).powi(10) * v.norm() >= HORIZON_THRESHOLD * z)
        .map(|(_, &xi)| xi.abs())
        .fold(f64::INFINITY, f64::min);
    2.0 * grid.half_length() * xi_min.sqrt()
}

/// What caused an observer callback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutputEvent {
    pub initial: bool,
    pub stride: bool,
    pub snapshot: bool,
    pub last: bool,
}

/// Read-only hooks into a run.
pub trait Observer {
    /// Called after every accepted step.
    fn on_step(&mut self, _state: &ProfileState, _grid: &SpectralGrid) -> Result<()> {
        Ok(())
    }

    /// Called at t = 0, every `output_stride` steps, at snapshot times and at `T_end`,
    /// at most once per time stamp.
    fn on_output(&mut self, _state: &ProfileState, _grid: &SpectralGrid, _event: OutputEvent) -> Result<()> {
        Ok(())
    }
}

/// Integrate `cfg` from its initial data to `T_end`.
pub fn run_simulation(cfg: &RunConfig, observers: &mut [&mut dyn Observer]) -> Result<ProfileState> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let initial = ProfileState::new(0.0, cfg.initial.spectrum(&grid)?, &grid)?;
    if !cfg.override_horizon {
        let t_valid = validity_horizon(&initial.f_hat, &grid);
        if cfg.t_end > t_valid {
            return Err(Error::HorizonExceeded {
                t_end: cfg.t_end,
                t_valid,
            });
        }
    }
    integrate(&grid, &cfg.coefficients, initial, cfg, observers)
}

/// Fixed-step driver. Steps are shortened so that every snapshot time and
/// `T_end` are hit exactly; after such a step the step lattice restarts from it.
pub fn integrate(
    grid: &SpectralGrid,
    c: &Coefficients,
    initial: ProfileState,
    cfg: &RunConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<ProfileState> {
    let mut state = initial;
    let start = state.t;
    let initial_event = OutputEvent {
        initial: true,
        ..Default::default()
    };
    for obs in observers.iter_mut() {
        obs.on_output(&state, grid, initial_event)?;
    }

    let mut targets: Vec<(f64, bool)> = cfg
        .snapshot_times
        .iter()
        .filter(|&&s| s > start && s < cfg.t_end)
        .map(|&s| (s, true))
        .collect();
    let snapshot_at_end = cfg.snapshot_times.iter().any(|&s| s == cfg.t_end);
    targets.push((cfg.t_end, snapshot_at_end));

    let mut base = start;
    let mut since_base: u64 = 0;
    let mut steps: u64 = 0;
    let tol = 1e-9 * cfg.dt;
    for (target, is_snapshot) in targets {
        while state.t < target {
            let nominal = base + (since_base + 1) as f64 * cfg.dt;
            let hits = nominal >= target - tol;
            let t_next = if hits { target } else { nominal };
            let mut next = rk4_step(&state, c, grid, t_next - state.t)?;
            next.t = t_next;
            state = next;
            since_base += 1;
            steps += 1;
            if hits {
                base = target;
                since_base = 0;
            }
            for obs in observers.iter_mut() {
                obs.on_step(&state, grid)?;
            }
            let event = OutputEvent {
                initial: false,
                stride: steps % cfg.output_stride as u64 == 0,
                snapshot: hits && is_snapshot,
                last: hits && target == cfg.t_end,
            };
            if event.stride || event.snapshot || event.last {
                for obs in observers.iter_mut() {
                    obs.on_output(&state, grid, event)?;
                }
            }
        }
    }
    Ok(state)
}

/// Discrete mass `(2pi)^{-1} sum |f^|^2 dxi`.
pub fn mass(f_hat: &[Complex64], grid: &SpectralGrid) -> f64 {
    grid.dxi() / (2.0 * PI) * f_hat.iter().map(|v| v.norm_sqr()).sum::<f64>()
}
