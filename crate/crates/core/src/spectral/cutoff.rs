//! Smooth dyadic cutoffs and Littlewood-Paley projections.
//!
//! The base bump is even, equal to 1 on `[-5/4, 5/4]` and 0 outside `[-8/5, 8/5]`.
//! On the transition `5/4 < |x| < 8/5`, with `s = (|x| - 5/4) / (7/20)`,
//!
//! ```text
//! phi(x) = psi(1 - s) / (psi(1 - s) + psi(s)),    psi(r) = exp(-1/r) for r > 0, 0 otherwise
//! ```
//!
//! which is C-infinity across both junctions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

const PLATEAU: f64 = 1.25;
const SUPPORT: f64 = 1.6;

fn psi(r: f64) -> f64 {
    if r > 0.0 {
        (-1.0 / r).exp()
    } else {
        0.0
    }
}

/// Base bump `phi`.
pub fn bump(x: f64) -> f64 {
    let a = x.abs();
    if a <= PLATEAU {
        1.0
    } else if a >= SUPPORT {
        0.0
    } else {
        let s = (a - PLATEAU) / (SUPPORT - PLATEAU);
        let (p, q) = (psi(1.0 - s), psi(s));
        p / (p + q)
    }
}

fn scaled_bump(x: f64, k: i32) -> f64 {
    bump(x / 2f64.powi(k))
}

/// The cutoff family built from the bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `phi`
    Phi,
    /// `phi_k(x) = phi(x/2^k) - phi(x/2^{k-1})`
    PhiK { k: i32 },
    /// `phi_k^{(m)}`: equal to `phi_k` for `k >= m+1` and to `phi(x/2^m)` for `k = m`.
    PhiKLow { k: i32, m: i32 },
    /// Sum of `phi_k` over `k` in `[lo, hi]`, or of `phi_k^{(m)}` over `[lo, hi] ∩ [m, inf)`.
    PhiInterval { lo: i32, hi: i32, m: Option<i32> },
}

impl Cutoff {
    pub fn phi_k_low(k: i32, m: i32) -> Result<Self> {
        let c = Cutoff::PhiKLow { k, m };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::PhiKLow { k, m } if k < m => Err(Error::invalid(format!(
                "phi_k^(m) requires k >= m, got k = {k}, m = {m}"
            ))),
            _ => Ok(()),
        }
    }

    /// Value at `x`; always in `[0, 1]` up to rounding of the telescoping sums.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            Cutoff::Phi => bump(x),
            Cutoff::PhiK { k } => scaled_bump(x, k) - scaled_bump(x, k - 1),
            Cutoff::PhiKLow { k, m } => {
                if k == m {
                    scaled_bump(x, k)
                } else {
                    scaled_bump(x, k) - scaled_bump(x, k - 1)
                }
            }
            Cutoff::PhiInterval { lo, hi, m } => {
                let start = m.map_or(lo, |m| lo.max(m));
                let mut acc = 0.0;
                for k in start..=hi {
                    acc += match m {
                        Some(m) => Cutoff::PhiKLow { k, m }.eval(x)?,
                        None => Cutoff::PhiK { k }.eval(x)?,
                    };
                }
                acc
            }
        })
    }
}

/// Apply the Littlewood-Paley multiplier `xi -> phi_k(xi)` to a spectrum.
pub fn band_project(spectrum: &[Complex64], k: i32, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
    if spectrum.len() != grid.size() {
        return Err(Error::invalid(format!(
            "spectrum has length {}, grid has M = {}",
            spectrum.len(),
            grid.size()
        )));
    }
    let c = Cutoff::PhiK { k };
    spectrum
        .iter()
        .zip(grid.xi_nodes())
        .map(|(&s, &xi)| Ok(s * c.eval(xi)?))
        .collect()
}
