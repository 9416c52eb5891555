//! Direct quadrature checks of the resonant stationary-phase analysis.
//!
//! After the change of variables that puts the critical point at the origin,
//! the resonant interaction is
//!
//! ```text
//! I(xi, s) = ∬ e^{i s Phi(xi, eta, sigma)} f^(xi+eta) f^(xi+sigma) conj f^(xi+eta+sigma) d eta d sigma,
//! Phi(xi, eta, sigma) = Lambda(xi) - Lambda(xi+eta) - Lambda(xi+sigma) + Lambda(xi+eta+sigma),
//! ```
//!
//! whose large-`s` behaviour is `8 pi |xi|^{3/2} |f^(xi)|^2 f^(xi) / s`. Near the
//! origin `Phi ≈ -eta sigma / (4 |xi|^{3/2})`, and the pair integral
//! `∬ e^{-ixy} e^{-x^2/N^2} e^{-y^2/N^2} = 2 pi (1 + 4/N^4)^{-1/2}` supplies the `2 pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{sobolev_norm, weighted_norm_w};
use crate::error::{Error, Result};
use crate::spectral::{bump, lambda_symbol, SpectralGrid};

/// Profiles with a closed-form Fourier side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClosedFormProfile {
    Zero,
    /// `amplitude e^{-(zeta - center)^2 / width^2} e^{i phase}`
    ShiftedGaussian {
        amplitude: f64,
        center: f64,
        width: f64,
        phase: f64,
    },
}

/// Relative magnitude that bounds the effective support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

impl ClosedFormProfile {
    pub fn gaussian(center: f64, width: f64) -> Self {
        ClosedFormProfile::ShiftedGaussian {
            amplitude: 1.0,
            center,
            width,
            phase: 0.0,
        }
    }

    pub fn value(&self, zeta: f64) -> Complex64 {
        match *self {
            ClosedFormProfile::Zero => Complex64::new(0.0, 0.0),
            ClosedFormProfile::ShiftedGaussian {
                amplitude,
                center,
                width,
                phase,
            } => {
                let d = (zeta - center) / width;
                Complex64::from_polar(amplitude * (-d * d).exp(), phase)
            }
        }
    }

    /// Interval outside which `|f^| < 1e-12 max |f^|`; `None` for the zero profile.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            ClosedFormProfile::Zero => None,
            ClosedFormProfile::ShiftedGaussian { amplitude, center, width, .. } => {
                if amplitude == 0.0 {
                    return None;
                }
                let r = width * (1.0 / SUPPORT_THRESHOLD).ln().sqrt();
                Some((center - r, center + r))
            }
        }
    }

    /// Smallest length scale of the profile.
    fn scale(&self) -> f64 {
        match *self {
            ClosedFormProfile::Zero => 1.0,
            ClosedFormProfile::ShiftedGaussian { width, .. } => width,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    /// Values on the grid nodes (no dealiasing).
    pub fn sample(&self, grid: &SpectralGrid) -> Vec<Complex64> {
        grid.xi_nodes().iter().map(|&xi| self.value(xi)).collect()
    }
}

/// Phase of the resonant interaction.
pub fn phase_phi(xi: f64, eta: f64, sigma: f64) -> f64 {
    lambda_symbol(xi) - lambda_symbol(xi + eta) - lambda_symbol(xi + sigma) + lambda_symbol(xi + eta + sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVariant {
    Gaussian,
    Cutoff,
}

/// Closed form of the Gaussian pair integral.
pub fn gaussian_pair_closed_form(n: f64) -> f64 {
    2.0 * PI / (1.0 + 4.0 / n.powi(4)).sqrt()
}

/// Largest per-axis node count accepted for the cutoff variant.
pub const MAX_PAIR_NODES: usize = 200_000;

/// `∬ e^{-ixy} a(x/N) a(y/N) dx dy` for `a` a Gaussian (closed form) or the bump (quadrature).
pub fn gaussian_pair_integral(n: f64, variant: PairVariant, quad_resolution: usize) -> Result<Complex64> {
    if !(n >= 0.25 && n.is_finite()) {
        return Err(Error::invalid(format!("pair integral needs N >= 1/4, got {n}")));
    }
    match variant {
        PairVariant::Gaussian => Ok(Complex64::new(gaussian_pair_closed_form(n), 0.0)),
        PairVariant::Cutoff => cutoff_pair_integral(n, quad_resolution.max(8)),
    }
}

/// Trapezoid over `[-8N/5, 8N/5]^2`, resolving `e^{-ixy}` with `q` points per
/// period at the largest `|x|` and the bump transition with `q` points.
fn cutoff_pair_integral(n: f64, q: usize) -> Result<Complex64> {
    let extent = 1.6 * n;
    let h = (2.0 * PI / (q as f64 * extent)).min(0.35 * n / q as f64);
    let half = (extent / h).ceil() as usize;
    if half > MAX_PAIR_NODES {
        return Err(Error::Resource(format!(
            "cutoff pair integral at N = {n} needs {} nodes per axis; use the gaussian variant",
            2 * half + 1
        )));
    }
    // both factors are even, so fold onto the quadrant with multiplicity 2 off the axes
    let xs: Vec<f64> = (0..=half).map(|i| i as f64 * h).collect();
    let c: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| bump(x / n) * h * if i == 0 { 1.0 } else { 2.0 })
        .collect();
    let rows: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|i| {
            if c[i] == 0.0 {
                return 0.0;
            }
            let x = xs[i];
            let inner: f64 = xs.iter().zip(&c).map(|(&y, &cj)| cj * (x * y).cos()).sum();
            c[i] * inner
        })
        .collect();
    Ok(Complex64::new(rows.iter().sum(), 0.0))
}

/// Inputs to the trilinear quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryProbe {
    pub profile: ClosedFormProfile,
    pub xi: f64,
    pub s: f64,
    /// Target nodes per `2 pi` of phase change (at least 8).
    pub quad_resolution: usize,
}

impl OscillatoryProbe {
    /// `f^(zeta) = e^{-(zeta-2)^2}` at `xi = 2`.
    pub fn standard(s: f64) -> Self {
        Self {
            profile: ClosedFormProfile::gaussian(2.0, 1.0),
            xi: 2.0,
            s,
            quad_resolution: 8,
        }
    }
}

/// Quadrature value with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: Complex64,
    /// `|I_h - I_{2h}|`
    pub error_estimate: f64,
    pub nodes_per_axis: usize,
}

/// Largest per-axis node count accepted for the trilinear quadrature.
pub const MAX_TRILINEAR_NODES: usize = 100_000;

/// Bound on `|grad Phi|` over the box, with `Lambda'` capped at 1 (`|zeta| >= 1/4`)
/// so the cusp at the origin does not drive the step to zero.
fn phase_gradient_bound(xi: f64, lo: f64, hi: f64) -> f64 {
    let dl = |z: f64| z.signum() / (2.0 * z.abs().max(0.25).sqrt());
    let samples = 129;
    let mut g: f64 = 0.0;
    for i in 0..samples {
        let eta = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        for j in 0..samples {
            let sigma = lo + (hi - lo) * j as f64 / (samples - 1) as f64;
            let d3 = dl(xi + eta + sigma);
            let de = d3 - dl(xi + eta);
            let ds = d3 - dl(xi + sigma);
            g = g.max((de * de + ds * ds).sqrt());
        }
    }
    g
}

/// Tensor-product trapezoid for the resonant integral.
///
/// On a uniform lattice `eta_i = a + i h`, `sigma_j = a + j h` the integrand
/// factors as `A_i A_j C_{i+j} e^{i s Lambda(xi)}`, so each node costs one
/// complex multiply-add. The error estimate compares against the lattice with
/// every other node.
pub fn trilinear_integral(probe: &OscillatoryProbe) -> Result<Quadrature> {
    if probe.quad_resolution < 8 {
        return Err(Error::invalid(format!(
            "quad_resolution must be >= 8, got {}",
            probe.quad_resolution
        )));
    }
    if !(probe.s >= 0.0 && probe.s.is_finite() && probe.xi.is_finite()) {
        return Err(Error::invalid("probe needs finite xi and s >= 0"));
    }
    let Some((a, b)) = probe.profile.support() else {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            nodes_per_axis: 0,
        });
    };
    let (lo, hi) = (a - probe.xi, b - probe.xi);
    let q = probe.quad_resolution as f64;
    let grad = phase_gradient_bound(probe.xi, lo, hi);
    let h_phase = if probe.s * grad > 0.0 {
        2.0 * PI / (q * probe.s * grad)
    } else {
        f64::INFINITY
    };
    let h = h_phase.min(probe.profile.scale() / q);
    // even number of intervals so the half lattice shares the endpoints
    let mut intervals = ((hi - lo) / h).ceil() as usize;
    intervals += intervals % 2;
    if intervals + 1 > MAX_TRILINEAR_NODES {
        return Err(Error::Resource(format!(
            "trilinear quadrature needs {} nodes per axis at s = {}; lower s or quad_resolution",
            intervals + 1,
            probe.s
        )));
    }
    let h = (hi - lo) / intervals as f64;
    let n = intervals + 1;
    let s = probe.s;
    let xi = probe.xi;

    let axis: Vec<Complex64> = (0..n)
        .map(|i| {
            let z = xi + lo + i as f64 * h;
            probe.profile.value(z) * Complex64::cis(-s * lambda_symbol(z))
        })
        .collect();
    let diagonal: Vec<Complex64> = (0..2 * n - 1)
        .map(|k| {
            let z = xi + 2.0 * lo + k as f64 * h;
            probe.profile.value(z).conj() * Complex64::cis(s * lambda_symbol(z))
        })
        .collect();
    let edge = |i: usize, last: usize| if i == 0 || i == last { 0.5 } else { 1.0 };

    let lattice_sum = |stride: usize| -> Complex64 {
        let last = n - 1;
        let rows: Vec<Complex64> = (0..n)
            .into_par_iter()
            .step_by(stride)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut j = 0;
                while j < n {
                    acc += axis[j] * diagonal[i + j] * edge(j, last);
                    j += stride;
                }
                axis[i] * acc * edge(i, last)
            })
            .collect();
        let hs = h * stride as f64;
        rows.iter().sum::<Complex64>() * (hs * hs) * Complex64::cis(s * lambda_symbol(xi))
    };

    let value = lattice_sum(1);
    let coarse = lattice_sum(2);
    let error_estimate = (value - coarse).norm();
    if error_estimate > 0.05 * value.norm() && value.norm() > 0.0 {
        return Err(Error::Accuracy {
            estimate: error_estimate,
            magnitude: value.norm(),
            suggested: 2 * probe.quad_resolution,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate,
        nodes_per_axis: n,
    })
}

/// Denominator convention for the leading term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeadingForm {
    /// `/(s+1)`, the form used in the phase correction.
    SPlusOne,
    /// `/s`, the bare stationary-phase value.
    S,
}

/// Resonance constant of the cubic interaction.
pub const RESONANCE_CONSTANT: f64 = 8.0 * PI;

/// `8 pi |xi|^{3/2} |f^(xi)|^2 f^(xi) / (s+1)` (or `/s`).
pub fn leading_term(profile: &ClosedFormProfile, xi: f64, s: f64, form: LeadingForm) -> Complex64 {
    let f = profile.value(xi);
    let denom = match form {
        LeadingForm::SPlusOne => s + 1.0,
        LeadingForm::S => s,
    };
    f * (RESONANCE_CONSTANT * xi.abs().powf(1.5) * f.norm_sqr() / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhase {
    pub s: f64,
    pub integral: Quadrature,
    pub leading: Complex64,
    pub residual: f64,
    /// `residual / |leading|`
    pub relative: f64,
}

/// Compare the quadrature against the `/(s+1)` leading term.
pub fn stationary_phase_residual(probe: &OscillatoryProbe) -> Result<StationaryPhase> {
    let integral = trilinear_integral(probe)?;
    let leading = leading_term(&probe.profile, probe.xi, probe.s, LeadingForm::SPlusOne);
    let residual = (integral.value - leading).norm();
    Ok(StationaryPhase {
        s: probe.s,
        integral,
        leading,
        residual,
        relative: if leading.norm() > 0.0 { residual / leading.norm() } else { f64::INFINITY },
    })
}

/// Sup norm of the free evolution against the two-term dispersive majorant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveRatio {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `||e^{it Lambda} f||_inf` versus
/// `(1+|t|)^{-1/2} || |xi|^{3/4} f^ ||_inf + (1+|t|)^{-5/8} (||x f'||_2 + ||f||_{H^2})`.
pub fn dispersive_ratio(profile: &ClosedFormProfile, t: f64, grid: &SpectralGrid) -> Result<DispersiveRatio> {
    let f_hat = profile.sample(grid);
    let amp = f_hat
        .iter()
        .zip(grid.xi_nodes())
        .map(|(v, &xi)| xi.abs().powf(0.75) * v.norm())
        .fold(0.0, f64::max);
    let energy = weighted_norm_w(&f_hat, grid) + sobolev_norm(&f_hat, 2, grid);
    let rhs = (1.0 + t.abs()).powf(-0.5) * amp + (1.0 + t.abs()).powf(-0.625) * energy;
    if !(rhs > 0.0) {
        return Err(Error::invalid("dispersive majorant vanishes: zero profile"));
    }
    let evolved = grid.half_wave_propagator(&f_hat, -t)?;
    let lhs = grid
        .synthesize_oversampled(&evolved)?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(DispersiveRatio {
        t,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phase_basic_identities() {
        assert_eq!(phase_phi(1.7, 0.0, 0.0), 0.0);
        for &(x, e, s) in &[(1.0, 0.3, -0.2), (2.0, -1.1, 0.4), (-0.5, 2.0, 1.0)] {
            assert_eq!(phase_phi(x, e, s), phase_phi(x, s, e));
        }
    }

    #[test]
    fn quadratic_phase_approximation() {
        // |Phi(1, eta, sigma) + eta sigma / 4| <= C (|eta|+|sigma|)^3 on |eta|,|sigma| <= 1/32
        let mut c: f64 = 0.0;
        let n = 201;
        for i in 0..n {
            for j in 0..n {
                let e = -1.0 / 32.0 + i as f64 / (n - 1) as f64 / 16.0;
                let s = -1.0 / 32.0 + j as f64 / (n - 1) as f64 / 16.0;
                let r = e.abs() + s.abs();
                if r > 0.0 {
                    c = c.max((phase_phi(1.0, e, s) + e * s / 4.0).abs() / r.powi(3));
                }
            }
        }
        // third derivative of sqrt at 1 is 3/8; the cubic Taylor terms are bounded by that
        assert!(c < 0.4, "C = {c}");
        assert!(c > 0.01);
    }

    #[test]
    fn gaussian_pair_closed_form_values() {
        let one = gaussian_pair_integral(1.0, PairVariant::Gaussian, 8).unwrap();
        assert_relative_eq!(one.re, 2.0 * PI / 5f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(one.re, 2.80993, epsilon = 1e-5);
        let two = gaussian_pair_integral(2.0, PairVariant::Gaussian, 8).unwrap();
        assert_relative_eq!(two.re, 2.0 * PI / 1.25f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(two.re, 5.619852, epsilon = 1e-6);
        let big = gaussian_pair_integral(1e4, PairVariant::Gaussian, 8).unwrap();
        assert_relative_eq!(big.re, 2.0 * PI, epsilon = 1e-12);
        assert!(gaussian_pair_integral(0.1, PairVariant::Gaussian, 8).is_err());
    }

    #[test]
    fn gaussian_pair_quadrature_agrees() {
        // independent 2-D trapezoid of the Gaussian integrand at N = 1
        let h = 0.02;
        let m = 500;
        let mut acc = 0.0;
        for i in -m..=m {
            for j in -m..=m {
                let (x, y) = (i as f64 * h, j as f64 * h);
                acc += (x * y).cos() * (-x * x - y * y).exp();
            }
        }
        assert_relative_eq!(acc * h * h, gaussian_pair_closed_form(1.0), epsilon = 1e-10);
    }

    #[test]
    fn cutoff_pair_small_n() {
        let v = gaussian_pair_integral(4.0, PairVariant::Cutoff, 8).unwrap();
        assert!((v.re - 2.0 * PI).abs() < 4.0f64.powf(-0.5));
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn zero_profile_gives_zero() {
        let probe = OscillatoryProbe {
            profile: ClosedFormProfile::Zero,
            ..OscillatoryProbe::standard(64.0)
        };
        assert_eq!(trilinear_integral(&probe).unwrap().value, Complex64::new(0.0, 0.0));
        assert!(dispersive_ratio(&ClosedFormProfile::Zero, 1.0, &SpectralGrid::new(16.0, 64).unwrap()).is_err());
    }

    #[test]
    fn resolution_floor_enforced() {
        let probe = OscillatoryProbe {
            quad_resolution: 4,
            ..OscillatoryProbe::standard(1.0)
        };
        assert!(trilinear_integral(&probe).is_err());
    }

    #[test]
    fn triple_convolution_at_s_zero() {
        // f^ = e^{-(z-c)^2}: u = (2 sqrt(pi))^{-1} e^{icx} e^{-x^2/4}, so the triple
        // convolution is (pi / sqrt 3) e^{-(xi-c)^2/3}
        for &xi in &[2.0, 2.5, 0.7] {
            let probe = OscillatoryProbe {
                xi,
                ..OscillatoryProbe::standard(0.0)
            };
            let q = trilinear_integral(&probe).unwrap();
            let exact = PI / 3f64.sqrt() * (-(xi - 2.0) * (xi - 2.0) / 3.0).exp();
            assert!((q.value - exact).norm() < 1e-6 * exact, "xi = {xi}: {}", q.value);
        }
    }

    #[test]
    fn leading_term_phase_and_forms() {
        let p = ClosedFormProfile::gaussian(2.0, 1.0);
        let l = leading_term(&p, 2.0, 63.0, LeadingForm::SPlusOne);
        assert!(l.im == 0.0 && l.re > 0.0);
        assert_relative_eq!(l.re, 8.0 * PI * 2f64.powf(1.5) / 64.0, epsilon = 1e-14);
        let bare = leading_term(&p, 2.0, 64.0, LeadingForm::S);
        assert_relative_eq!(bare.re, l.re, epsilon = 1e-14);
    }
}
