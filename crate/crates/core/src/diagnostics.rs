//! Norms, conserved quantities and power-law fits.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{mass, Observer, OutputEvent, ProfileState};
use crate::spectral::{lambda_symbol, SpectralGrid};

/// Default Sobolev order for `hN`. Orders near 100 are meaningless on a
/// truncated double-precision grid.
pub const DEFAULT_SOBOLEV_ORDER: u32 = 8;

/// Relative floor below which modes are ignored by the weighted sup norms.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

/// One time slice of every monitored norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub t: f64,
    pub sobolev_hn: f64,
    pub w_norm: f64,
    pub z_norm: f64,
    pub sup_u: f64,
    pub mass: f64,
    pub energy: f64,
}

/// `((2pi)^{-1} sum (1+xi^2)^N |f^|^2 dxi)^{1/2}`, weights formed in log space.
pub fn sobolev_norm(f_hat: &[Complex64], order: u32, grid: &SpectralGrid) -> f64 {
    let n = order as f64;
    let sum: f64 = f_hat
        .iter()
        .zip(grid.xi_nodes())
        .filter(|(v, _)| v.norm_sqr() > 0.0)
        .map(|(v, &xi)| (n * (xi * xi).ln_1p() + v.norm_sqr().ln()).exp())
        .sum();
    (sum * grid.dxi() / (2.0 * PI)).sqrt()
}

/// `||x d_x f||_{L^2}` computed on the Fourier side as `(2pi)^{-1/2} ||d_xi (xi f^)||`.
///
/// Second-order centered differences in xi, one-sided second-order stencils at
/// the two ends (the spectrum is not periodic in xi).
pub fn weighted_norm_w(f_hat: &[Complex64], grid: &SpectralGrid) -> f64 {
    let m = f_hat.len();
    let g: Vec<Complex64> = f_hat.iter().zip(grid.xi_nodes()).map(|(v, &xi)| v * xi).collect();
    let h = grid.dxi();
    let d = |i: usize| -> Complex64 {
        if i == 0 {
            (g[0] * -3.0 + g[1] * 4.0 - g[2]) / (2.0 * h)
        } else if i == m - 1 {
            (g[m - 1] * 3.0 - g[m - 2] * 4.0 + g[m - 3]) / (2.0 * h)
        } else {
            (g[i + 1] - g[i - 1]) / (2.0 * h)
        }
    };
    let sum: f64 = (0..m).map(|i| d(i).norm_sqr()).sum();
    (sum * h / (2.0 * PI)).sqrt()
}

/// Full `W` norm `||f||_{L^2} + ||x d_x f||_{L^2}`.
pub fn w_norm_full(f_hat: &[Complex64], grid: &SpectralGrid) -> f64 {
    grid.spectral_l2(f_hat) + weighted_norm_w(f_hat, grid)
}

fn floor_of(f_hat: &[Complex64]) -> f64 {
    SPECTRAL_FLOOR * f_hat.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `max (1+|xi|)^10 |f^(xi)|` over modes above the spectral floor.
pub fn z_norm(f_hat: &[Complex64], grid: &SpectralGrid) -> f64 {
    let floor = floor_of(f_hat);
    f_hat
        .iter()
        .zip(grid.xi_nodes())
        .filter(|(v, _)| v.norm() >= floor && v.norm() > 0.0)
        .map(|(v, &xi)| (1.0 + xi.abs()).powi(10) * v.norm())
        .fold(0.0, f64::max)
}

/// `||u(t)||_inf` from a 4x oversampled reconstruction of `e^{-it Lambda} f^`.
pub fn sup_norm_u(state: &ProfileState, grid: &SpectralGrid) -> Result<f64> {
    let u = grid.synthesize_oversampled(&state.solution_spectrum(grid)?)?;
    Ok(u.iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// `(2pi)^{-1} sum Lambda |f^|^2 dxi + (c0/2) int |u|^4`, the quartic term
/// evaluated on the padded grid where it is exact for band-limited `u`.
pub fn energy(state: &ProfileState, c0: f64, grid: &SpectralGrid) -> Result<f64> {
    let kinetic: f64 = state
        .f_hat
        .iter()
        .zip(grid.xi_nodes())
        .map(|(v, &xi)| lambda_symbol(xi) * v.norm_sqr())
        .sum::<f64>()
        * grid.dxi()
        / (2.0 * PI);
    if c0 == 0.0 {
        return Ok(kinetic);
    }
    let u = grid.synthesize_padded(&state.solution_spectrum(grid)?)?;
    let h = grid.dx() * grid.size() as f64 / u.len() as f64;
    let quartic: f64 = u.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum::<f64>() * h;
    Ok(kinetic + 0.5 * c0 * quartic)
}

pub fn norm_report(state: &ProfileState, c0: f64, order: u32, grid: &SpectralGrid) -> Result<NormReport> {
    Ok(NormReport {
        t: state.t,
        sobolev_hn: sobolev_norm(&state.f_hat, order, grid),
        w_norm: weighted_norm_w(&state.f_hat, grid),
        z_norm: z_norm(&state.f_hat, grid),
        sup_u: sup_norm_u(state, grid)?,
        mass: mass(&state.f_hat, grid),
        energy: energy(state, c0, grid)?,
    })
}

/// Least-squares power law `value ~ (1+t)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub r2: f64,
}

/// Slope and r^2 of `ln y` against `ln(1+t)`; needs at least two distinct abscissae.
pub(crate) fn log_log_fit(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.iter().any(|&(_, v)| !(v > 0.0)) {
        return Err(Error::invalid("power-law fit needs strictly positive values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln_1p()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys).map(|(slope, r2)| PowerFit { exponent: slope, r2 })
}

/// Ordinary least squares `y = a + b x`; returns `(b, r^2)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::invalid("a line fit needs at least two points"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("a line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok((slope, r2))
}

/// Fit `value ~ (1+t)^p` to the points with `t` in `[t_lo, t_hi]`.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < 5 {
        return Err(Error::invalid(format!(
            "decay fit needs at least 5 points in [{}, {}], found {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    log_log_fit(&pts)
}

/// Collects a [`NormReport`] at every output event.
#[derive(Debug, Clone)]
pub struct NormRecorder {
    pub c0: f64,
    pub order: u32,
    pub reports: Vec<NormReport>,
}

impl NormRecorder {
    pub fn new(c0: f64, order: u32) -> Self {
        Self {
            c0,
            order,
            reports: Vec::new(),
        }
    }
}

impl Observer for NormRecorder {
    fn on_output(&mut self, state: &ProfileState, grid: &SpectralGrid, _event: OutputEvent) -> Result<()> {
        self.reports.push(norm_report(state, self.c0, self.order, grid)?);
        Ok(())
    }
}

/// Monitors `||u(t)||_{H^N} - ||u(0)||_{H^N}` against `int_0^t ||u||_{H^N} ||u||_inf^2 ds`.
///
/// The integral is accumulated with the trapezoid rule over the output events.
/// The reported ratio should stay bounded; it is flagged above `limit`.
#[derive(Debug, Clone)]
pub struct GrowthMonitor {
    order: u32,
    limit: f64,
    first: Option<f64>,
    last: Option<(f64, f64)>,
    integral: f64,
    pub ratios: Vec<(f64, f64)>,
}

impl GrowthMonitor {
    pub fn new(order: u32, limit: f64) -> Self {
        Self {
            order,
            limit,
            first: None,
            last: None,
            integral: 0.0,
            ratios: Vec::new(),
        }
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> bool {
        self.max_ratio() > self.limit
    }

    fn record(&mut self, t: f64, hn: f64, sup: f64) {
        let integrand = hn * sup * sup;
        match (self.first, self.last) {
            (Some(h0), Some((t_prev, g_prev))) => {
                self.integral += 0.5 * (g_prev + integrand) * (t - t_prev);
                if self.integral > 0.0 {
                    self.ratios.push((t, (hn - h0) / self.integral));
                }
            }
            _ => self.first = Some(hn),
        }
        self.last = Some((t, integrand));
    }
}

impl Observer for GrowthMonitor {
    fn on_output(&mut self, state: &ProfileState, grid: &SpectralGrid, _event: OutputEvent) -> Result<()> {
        let hn = sobolev_norm(&state.f_hat, self.order, grid);
        let sup = sup_norm_u(state, grid)?;
        self.record(state.t, hn, sup);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(32.0, 1024).unwrap()
    }

    fn gaussian_spectrum(grid: &SpectralGrid) -> Vec<Complex64> {
        grid.xi_nodes().iter().map(|&xi| Complex64::new((-xi * xi).exp(), 0.0)).collect()
    }

    #[test]
    fn l2_norm_of_physical_gaussian() {
        // f(x) = e^{-x^2} has ||f||_2 = (pi/2)^{1/4}
        let g = grid();
        let samples: Vec<Complex64> = g.x_nodes().iter().map(|&x| Complex64::new((-x * x).exp(), 0.0)).collect();
        let f_hat = g.forward_transform(&samples).unwrap();
        assert_relative_eq!(sobolev_norm(&f_hat, 0, &g), (PI / 2.0).powf(0.25), epsilon = 1e-12);
        assert_relative_eq!(sobolev_norm(&f_hat, 0, &g), 1.11951, epsilon = 1e-5);
        assert_relative_eq!(sobolev_norm(&f_hat, 0, &g), g.physical_l2(&samples), epsilon = 1e-12);
        let mut prev = 0.0;
        for n in 0..12 {
            let v = sobolev_norm(&f_hat, n, &g);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn w_norm_of_gaussian_spectrum() {
        // int (1 - 2 xi^2)^2 e^{-2 xi^2} = (3/4) sqrt(pi/2)
        let exact = (0.75 * (PI / 2.0).sqrt()).sqrt() / (2.0 * PI).sqrt();
        let coarse = grid();
        let fine = SpectralGrid::new(128.0, 8192).unwrap();
        let a = weighted_norm_w(&gaussian_spectrum(&coarse), &coarse);
        let b = weighted_norm_w(&gaussian_spectrum(&fine), &fine);
        assert_relative_eq!(b, exact, max_relative = 1e-3);
        assert!(b > 0.0 && (a - exact).abs() > (b - exact).abs());
        assert_eq!(weighted_norm_w(&vec![Complex64::new(0.0, 0.0); 64], &SpectralGrid::new(4.0, 64).unwrap()), 0.0);
    }

    #[test]
    fn z_norm_single_node() {
        let g = SpectralGrid::new(PI, 32).unwrap();
        let mut f = vec![Complex64::new(0.0, 0.0); 32];
        assert_eq!(z_norm(&f, &g), 0.0);
        f[g.nearest_node(1.0)] = Complex64::new(0.0, 0.3);
        assert_relative_eq!(z_norm(&f, &g), 1024.0 * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn z_norm_of_gaussian_matches_scan() {
        let g = grid();
        let z = z_norm(&gaussian_spectrum(&g), &g);
        // fine scan of (1+xi)^10 e^{-xi^2}; maximum near xi = 1.79
        let scan = (0..200_000)
            .map(|i| {
                let xi = i as f64 * 5e-5;
                (1.0 + xi).powi(10) * (-xi * xi).exp()
            })
            .fold(0.0, f64::max);
        // grid spacing pi/32 limits agreement to the curvature at the peak
        assert_relative_eq!(z, scan, max_relative = 1e-2);
        assert!(z <= scan);
    }

    #[test]
    fn sup_norm_at_time_zero() {
        let g = grid();
        let samples: Vec<Complex64> = g.x_nodes().iter().map(|&x| Complex64::new((-x * x).exp(), 0.0)).collect();
        let state = ProfileState {
            t: 0.0,
            f_hat: g.forward_transform(&samples).unwrap(),
        };
        assert_relative_eq!(sup_norm_u(&state, &g).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(sup_norm_u(&ProfileState::zeros(&g), &g).unwrap(), 0.0);
    }

    #[test]
    fn fit_exact_power_law() {
        let series: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 * 5.0, (1.0 + i as f64 * 5.0).powf(-0.5))).collect();
        let fit = decay_fit(&series, (0.0, 1e9)).unwrap();
        assert_relative_eq!(fit.exponent, -0.5, epsilon = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = series.iter().map(|&(t, _)| (t, 3.0)).collect();
        assert_eq!(decay_fit(&flat, (0.0, 1e9)).unwrap().exponent, 0.0);
    }

    #[test]
    fn fit_with_log_periodic_wiggle() {
        let series: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = 10f64.powf(3.0 * i as f64 / 39.0);
                let l = t.ln_1p();
                (t, (1.0 + t).powf(-0.3) * (1.0 + 0.01 * l.sin()))
            })
            .collect();
        let fit = decay_fit(&series, (0.0, 1e4)).unwrap();
        assert!((fit.exponent + 0.3).abs() <= 0.01, "{}", fit.exponent);
    }

    #[test]
    fn fit_errors() {
        let few: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 1.0)).collect();
        assert!(decay_fit(&few, (0.0, 10.0)).is_err());
        let neg: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 1.0 - i as f64)).collect();
        assert!(decay_fit(&neg, (0.0, 10.0)).is_err());
    }

    #[test]
    fn growth_monitor_ratio() {
        let mut m = GrowthMonitor::new(2, 10.0);
        m.record(0.0, 1.0, 1.0);
        m.record(1.0, 1.5, 1.0);
        // integral = 0.5 * (1 + 1.5) * 1 = 1.25
        assert_relative_eq!(m.ratios[0].1, 0.5 / 1.25, epsilon = 1e-15);
        assert!(!m.flagged());
    }
}
