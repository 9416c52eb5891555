//! Periodic truncation of the real line and continuum-scaled transforms.
//!
//! The box is `[-L, L)` with `M` equispaced nodes `x_n = -L + n h`, `h = 2L/M`.
//! Frequencies are `xi_j = pi j / L` for `j = -M/2 .. M/2 - 1`. Every public
//! array is indexed in physical (sorted-xi) order; the shift to the FFT
//! slot `j mod M` lives in [`SpectralGrid::fft_index`] and nowhere else.
//!
//! Scaling: forward is `h * sum_n e^{-i x_n xi} f(x_n)`, which approximates
//! `f^(xi) = int e^{-i x xi} f(x) dx`; inverse is `dxi/(2 pi) * sum_j e^{i x xi_j} f^_j`.
//! With this convention the transform of a cubic product carries the
//! `(2 pi)^{-2}` of the convolution formula automatically.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Half-wave dispersion symbol `Lambda(xi) = |xi|^{1/2}`.
#[inline]
pub fn lambda_symbol(xi: f64) -> f64 {
    xi.abs().sqrt()
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    forward_padded: Arc<dyn Fft<f64>>,
    inverse_padded: Arc<dyn Fft<f64>>,
    inverse_oversampled: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with its frequency lattice and dealias mask.
#[derive(Clone)]
pub struct SpectralGrid {
    half_length: f64,
    size: usize,
    x_nodes: Vec<f64>,
    xi_nodes: Vec<f64>,
    dealias_mask: Vec<bool>,
    plans: Arc<Plans>,
}

/// Oversampling factor used for sup-norm reconstruction.
pub const OVERSAMPLING: usize = 4;

/// Padding factor used when evaluating cubic products. With the 2/3 mask
/// retaining `|j| <= M/3`, products reach `|j| <= M`; a `2M` grid keeps
/// every alias off the retained band.
pub const PRODUCT_PADDING: usize = 2;

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("size", &self.size)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.half_length == other.half_length
    }
}

impl SpectralGrid {
    /// Build the grid for the box `[-L, L)` with `M` nodes.
    pub fn new(half_length: f64, size: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::invalid(format!(
                "half-length L must be positive and finite, got {half_length}"
            )));
        }
        if size < 16 || !size.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid size M must be a power of two >= 16, got {size}"
            )));
        }
        let h = 2.0 * half_length / size as f64;
        let dxi = PI / half_length;
        let half = (size / 2) as i64;
        let x_nodes = (0..size).map(|n| -half_length + n as f64 * h).collect();
        let xi_nodes: Vec<f64> = (0..size as i64).map(|i| (i - half) as f64 * dxi).collect();
        // |j| <= (2/3)(M/2), done in integers so the rule does not depend on rounding of xi
        let dealias_mask = (0..size as i64)
            .map(|i| 3 * (i - half).abs() <= size as i64)
            .collect();

        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            forward_padded: planner.plan_fft_forward(PRODUCT_PADDING * size),
            inverse_padded: planner.plan_fft_inverse(PRODUCT_PADDING * size),
            inverse_oversampled: planner.plan_fft_inverse(OVERSAMPLING * size),
        };

        Ok(Self {
            half_length,
            size,
            x_nodes,
            xi_nodes,
            dealias_mask,
            plans: Arc::new(plans),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Physical spacing `h = 2L/M`.
    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.size as f64
    }

    /// Frequency spacing `pi / L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    /// Largest stored frequency magnitude, `M pi / (2L)` (the unmatched mode).
    pub fn xi_max(&self) -> f64 {
        self.size as f64 * PI / (2.0 * self.half_length)
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn xi_nodes(&self) -> &[f64] {
        &self.xi_nodes
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Signed wavenumber index `j` of physical slot `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        i as i64 - (self.size / 2) as i64
    }

    /// Map from physical slot to FFT slot (`j mod M`). It is an involution.
    #[inline]
    pub fn fft_index(&self, i: usize) -> usize {
        (i + self.size / 2) % self.size
    }

    /// Physical slot whose frequency is closest to `xi`.
    pub fn nearest_node(&self, xi: f64) -> usize {
        let j = (xi / self.dxi()).round() as i64 + (self.size / 2) as i64;
        j.clamp(0, self.size as i64 - 1) as usize
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len != self.size {
            return Err(Error::invalid(format!(
                "{what} has length {len}, grid has M = {}",
                self.size
            )));
        }
        Ok(())
    }

    /// Continuum-scaled forward transform of physical samples.
    pub fn forward_transform(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(samples.len(), "sample array")?;
        Ok(self.analyze(samples.to_vec(), &*self.plans.forward, 1))
    }

    /// Continuum-scaled inverse transform back to physical samples.
    pub fn inverse_transform(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(spectrum.len(), "spectrum")?;
        Ok(self.synthesize(spectrum, &*self.plans.inverse, 1))
    }

    /// Band-limited reconstruction on the `PRODUCT_PADDING * M` grid over the same box.
    pub fn synthesize_padded(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(spectrum.len(), "spectrum")?;
        Ok(self.synthesize(spectrum, &*self.plans.inverse_padded, PRODUCT_PADDING))
    }

    /// Forward transform of samples on the padded grid, truncated to the `M` stored modes.
    pub fn analyze_padded(&self, samples: Vec<Complex64>) -> Result<Vec<Complex64>> {
        if samples.len() != PRODUCT_PADDING * self.size {
            return Err(Error::invalid(format!(
                "padded sample array has length {}, expected {}",
                samples.len(),
                PRODUCT_PADDING * self.size
            )));
        }
        Ok(self.analyze(samples, &*self.plans.forward_padded, PRODUCT_PADDING))
    }

    /// Band-limited reconstruction on the `OVERSAMPLING * M` grid.
    pub fn synthesize_oversampled(&self, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(spectrum.len(), "spectrum")?;
        Ok(self.synthesize(spectrum, &*self.plans.inverse_oversampled, OVERSAMPLING))
    }

    /// Sum over modes `e^{i x_n xi_j} s_j dxi/(2pi)` at the `factor*M` nodes
    /// `x_n = -L + n h / factor`.
    fn synthesize(&self, spectrum: &[Complex64], plan: &dyn Fft<f64>, factor: usize) -> Vec<Complex64> {
        let p = factor * self.size;
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        for (i, &s) in spectrum.iter().enumerate() {
            let j = self.wavenumber(i);
            // e^{-i L xi_j} = (-1)^j
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[j.rem_euclid(p as i64) as usize] = s * sign;
        }
        plan.process(&mut buf);
        let scale = self.dxi() / (2.0 * PI);
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }

    /// `(h / factor) * sum_n e^{-i x_n xi_j} f_n`, kept for the `M` stored modes.
    fn analyze(&self, mut samples: Vec<Complex64>, plan: &dyn Fft<f64>, factor: usize) -> Vec<Complex64> {
        let p = factor * self.size;
        plan.process(&mut samples);
        let scale = self.dx() / factor as f64;
        (0..self.size)
            .map(|i| {
                let j = self.wavenumber(i);
                let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                samples[j.rem_euclid(p as i64) as usize] * (sign * scale)
            })
            .collect()
    }

    /// Multiply mode `xi_j` by `e^{-i t Lambda(xi_j)}`: profile spectrum to solution spectrum.
    pub fn half_wave_propagator(&self, spectrum: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        self.check_len(spectrum.len(), "spectrum")?;
        Ok(spectrum
            .iter()
            .zip(&self.xi_nodes)
            .map(|(&s, &xi)| s * Complex64::cis(-t * lambda_symbol(xi)))
            .collect())
    }

    /// Zero every mode outside the dealias mask, in place.
    pub fn apply_dealias(&self, spectrum: &mut [Complex64]) {
        for (s, &keep) in spectrum.iter_mut().zip(&self.dealias_mask) {
            if !keep {
                *s = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Discrete `L^2` norm on the physical grid, `(h sum |f|^2)^{1/2}`.
    pub fn physical_l2(&self, samples: &[Complex64]) -> f64 {
        (self.dx() * samples.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Discrete `L^2` norm on the frequency side, `((2pi)^{-1} dxi sum |f^|^2)^{1/2}`.
    pub fn spectral_l2(&self, spectrum: &[Complex64]) -> f64 {
        (self.dxi() / (2.0 * PI) * spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}
