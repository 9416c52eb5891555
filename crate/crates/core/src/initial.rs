//! Initial-data families, specified directly on the Fourier side.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

/// Upper bound on the amplitude: the small-data regime.
pub const MAX_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `eps0 e^{-(xi - xc)^2 / w^2} e^{i phase}`
    GaussianPacket,
    /// Mirror pair of Gaussian packets at `+xc` and `-xc`.
    DoublePacket,
    /// Linear interpolation of a `xi,re_fhat,im_fhat[,...]` CSV table, scaled by `eps0`
    /// relative to its own sup norm.
    CustomTable { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub family: Family,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub phase: f64,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self {
            family: Family::GaussianPacket,
            amplitude: 0.05,
            center: 1.0,
            width: 0.25,
            phase: 0.0,
        }
    }
}

impl InitialDataSpec {
    pub fn gaussian(amplitude: f64, center: f64, width: f64, phase: f64) -> Self {
        Self {
            family: Family::GaussianPacket,
            amplitude,
            center,
            width,
            phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude <= MAX_AMPLITUDE) {
            return Err(Error::invalid(format!(
                "amplitude eps0 must lie in (0, {MAX_AMPLITUDE}], got {}",
                self.amplitude
            )));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid(format!("width must be positive, got {}", self.width)));
        }
        if !(self.center.is_finite() && self.phase.is_finite()) {
            return Err(Error::invalid("center and phase must be finite"));
        }
        Ok(())
    }

    /// Closed-form value of the Gaussian families at `xi` (tables need the grid path).
    pub fn value(&self, xi: f64) -> Option<Complex64> {
        let bump = |c: f64| {
            let d = (xi - c) / self.width;
            (-d * d).exp()
        };
        let rot = Complex64::from_polar(self.amplitude, self.phase);
        match self.family {
            Family::GaussianPacket => Some(rot * bump(self.center)),
            Family::DoublePacket => Some(rot * (bump(self.center) + bump(-self.center))),
            Family::CustomTable { .. } => None,
        }
    }

    /// Profile spectrum at `t = 0` on the grid nodes, dealiased.
    pub fn spectrum(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        self.validate()?;
        let mut out: Vec<Complex64> = match &self.family {
            Family::CustomTable { path } => {
                let table = crate::io::read_spectrum_table(path)?;
                let peak = table.iter().map(|r| r.1.norm()).fold(0.0, f64::max);
                if peak == 0.0 {
                    return Err(Error::invalid(format!("table {} is identically zero", path.display())));
                }
                let rot = Complex64::from_polar(self.amplitude / peak, self.phase);
                grid.xi_nodes()
                    .iter()
                    .map(|&xi| rot * interpolate(&table, xi))
                    .collect()
            }
            _ => grid.xi_nodes().iter().map(|&xi| self.value(xi).unwrap()).collect(),
        };
        grid.apply_dealias(&mut out);
        Ok(out)
    }
}

/// Piecewise-linear interpolation on a table sorted by xi; zero outside its range.
fn interpolate(table: &[(f64, Complex64)], xi: f64) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let Some(first) = table.first() else { return zero };
    let last = table[table.len() - 1];
    if xi < first.0 || xi > last.0 {
        return zero;
    }
    let idx = table.partition_point(|r| r.0 <= xi);
    if idx == 0 {
        return first.1;
    }
    if idx == table.len() {
        return last.1;
    }
    let (x0, y0) = table[idx - 1];
    let (x1, y1) = table[idx];
    let w = (xi - x0) / (x1 - x0);
    y0 * (1.0 - w) + y1 * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_packet_values() {
        let spec = InitialDataSpec::gaussian(0.1, 1.0, 0.5, 0.0);
        assert_eq!(spec.value(1.0).unwrap(), Complex64::new(0.1, 0.0));
        let v = spec.value(1.5).unwrap();
        assert!((v.re - 0.1 * (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn amplitude_bound_enforced() {
        assert!(InitialDataSpec::gaussian(0.9, 1.0, 0.5, 0.0).validate().is_err());
        assert!(InitialDataSpec::gaussian(0.5, 1.0, 0.5, 0.0).validate().is_ok());
        assert!(InitialDataSpec::gaussian(0.1, 1.0, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn double_packet_is_even() {
        let mut spec = InitialDataSpec::gaussian(0.1, 1.5, 0.4, 0.3);
        spec.family = Family::DoublePacket;
        for &xi in &[0.2, 1.0, 2.7] {
            assert_eq!(spec.value(xi), spec.value(-xi));
        }
    }

    #[test]
    fn interpolation_between_rows() {
        let t = vec![(0.0, Complex64::new(0.0, 0.0)), (1.0, Complex64::new(2.0, -2.0))];
        assert_eq!(interpolate(&t, 0.25), Complex64::new(0.5, -0.5));
        assert_eq!(interpolate(&t, 1.5), Complex64::new(0.0, 0.0));
        assert_eq!(interpolate(&t, 1.0), Complex64::new(2.0, -2.0));
    }
}
