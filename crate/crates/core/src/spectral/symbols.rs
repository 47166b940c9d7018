//! Fourier symbols of the model operators, tabulated once per (grid, params).

use super::grid::Grid;
use crate::params::ModelParams;

/// Above this value of 2 sqrt(mu2)|xi| the exponential correction in sigma is
/// below double precision and sigma is replaced by its asymptote.
const SIGMA_SWITCH: f64 = 700.0;

/// sigma(xi) = sqrt(mu2)|xi| coth(sqrt(mu2)|xi|), evaluated as
/// s + 2s / (e^{2s} - 1) with s = sqrt(mu2)|xi| and sigma(0) = 1.
pub fn sigma(xi_abs: f64, mu2: f64) -> f64 {
    let s = mu2.sqrt() * xi_abs.abs();
    if s == 0.0 {
        return 1.0;
    }
    let two_s = 2.0 * s;
    if two_s > SIGMA_SWITCH {
        s
    } else {
        s + two_s / two_s.exp_m1()
    }
}

/// A(xi) = 1 - a mu |xi|^2 + (1/gamma) sqrt(mu/mu2) sigma + (1/gamma^2)(mu/mu2) sigma^2.
pub fn a_symbol(xi_sq: f64, p: &ModelParams) -> f64 {
    let s = sigma(xi_sq.sqrt(), p.mu2);
    let r = p.mu / p.mu2;
    1.0 - p.a * p.mu * xi_sq + r.sqrt() * s / p.gamma + r * s * s / (p.gamma * p.gamma)
}

/// Per-mode symbol values, indexed like the grid's flat storage.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub sigma: Vec<f64>,
    pub a: Vec<f64>,
    /// g = (1 + b mu |xi|^2) / (1 + d mu |xi|^2).
    pub g: Vec<f64>,
    pub omega1: Vec<f64>,
    pub omega2: Vec<f64>,
    /// Im lambda_+ = sqrt(omega1 omega2) |xi|.
    pub lambda_plus_im: Vec<f64>,
    /// 1 + b mu |xi|^2, symbol of (1 - b mu Lap).
    pub helmholtz_b: Vec<f64>,
    /// 1 + d mu |xi|^2.
    pub helmholtz_d: Vec<f64>,
    /// 1 - c mu |xi|^2, symbol of (1 + c mu Lap).
    pub one_minus_cmu: Vec<f64>,
    /// sqrt(omega1 / omega2).
    pub ratio_sqrt: Vec<f64>,
    /// Linear frequency on derivative wavenumbers: |xi_d| sqrt(omega1 omega2).
    /// Equal to `lambda_plus_im` except on Nyquist rows, where it vanishes.
    pub frequency: Vec<f64>,
}

impl SymbolTable {
    pub fn new(grid: &Grid, p: &ModelParams) -> Self {
        let n = grid.len();
        let mut t = SymbolTable {
            sigma: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            omega1: Vec::with_capacity(n),
            omega2: Vec::with_capacity(n),
            lambda_plus_im: Vec::with_capacity(n),
            helmholtz_b: Vec::with_capacity(n),
            helmholtz_d: Vec::with_capacity(n),
            one_minus_cmu: Vec::with_capacity(n),
            ratio_sqrt: Vec::with_capacity(n),
            frequency: Vec::with_capacity(n),
        };
        for (i, &k2) in grid.xi_sq().iter().enumerate() {
            let s = sigma(k2.sqrt(), p.mu2);
            let a = a_symbol(k2, p);
            let hb = 1.0 + p.b * p.mu * k2;
            let hd = 1.0 + p.d * p.mu * k2;
            let sc = 1.0 - p.c * p.mu * k2;
            let w1 = a / (p.gamma * hb);
            let w2 = (1.0 - p.gamma) * sc / hd;
            let speed = (w1 * w2).sqrt();
            t.sigma.push(s);
            t.a.push(a);
            t.g.push(hb / hd);
            t.omega1.push(w1);
            t.omega2.push(w2);
            t.lambda_plus_im.push(speed * k2.sqrt());
            t.helmholtz_b.push(hb);
            t.helmholtz_d.push(hd);
            t.one_minus_cmu.push(sc);
            t.ratio_sqrt.push((w1 / w2).sqrt());
            t.frequency.push(speed * grid.xi_deriv_norm(i));
        }
        t
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequency.iter().fold(0.0, |m: f64, &w| m.max(w))
    }
}
