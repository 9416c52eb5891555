#![allow(dead_code)]

use std::f64::consts::PI;

use fracnls::evolution::{Coefficients, ProfileState};
use fracnls::spectral::{lambda_symbol, SpectralGrid};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random complex spectrum on the retained modes, zero elsewhere.
pub fn random_dealiased(grid: &SpectralGrid, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    grid.dealias_mask()
        .iter()
        .map(|&keep| {
            if keep {
                Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Profile right-hand side by direct summation over wavenumber pairs.
///
/// With `u(x) = (dxi/2pi) sum_a u^_a e^{i x xi_a}` on the box, the transform of
/// a product of three modes is `2L` times a Kronecker delta, so each cubic term
/// is `(dxi/2pi)^2` times a sum over `(a, b)` with the third wavenumber fixed by
/// the output mode. No FFTs are involved.
pub fn direct_rhs(state: &ProfileState, c: &Coefficients, grid: &SpectralGrid) -> Vec<Complex64> {
    let m = grid.size();
    let t = state.t;
    let u_hat: Vec<Complex64> = state
        .f_hat
        .iter()
        .zip(grid.xi_nodes())
        .map(|(f, &xi)| f * Complex64::cis(-t * lambda_symbol(xi)))
        .collect();
    let half = (m / 2) as i64;
    let coef = |j: i64| -> Complex64 {
        // physical slot of wavenumber j
        let idx = j + half;
        if idx < 0 || idx >= m as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            u_hat[idx as usize]
        }
    };
    let scale = (grid.dxi() / (2.0 * PI)).powi(2);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        if !grid.dealias_mask()[i] {
            continue;
        }
        let n = i as i64 - half;
        let mut gauge = Complex64::new(0.0, 0.0);
        let mut cube = Complex64::new(0.0, 0.0);
        let mut mixed = Complex64::new(0.0, 0.0);
        let mut anti = Complex64::new(0.0, 0.0);
        for a in -half..half {
            let ua = coef(a);
            if ua == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in -half..half {
                let ub = coef(b);
                // u conj(u) u: a - b + c = n
                gauge += ua * ub.conj() * coef(n - a + b);
                // u^3: a + b + c = n
                cube += ua * ub * coef(n - a - b);
                // u conj(u)^2: a - b - c = n
                mixed += ua * ub.conj() * coef(a - b - n).conj();
                // conj(u)^3: -(a + b + c) = n
                anti += ua.conj() * ub.conj() * coef(-n - a - b).conj();
            }
        }
        let nonlinear = (gauge * c.c0 + cube * c.c1 + mixed * c.c2 + anti * c.c3) * scale;
        let xi = grid.xi_nodes()[i];
        out[i] = Complex64::new(0.0, -1.0) * Complex64::cis(t * lambda_symbol(xi)) * nonlinear;
    }
    out
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
