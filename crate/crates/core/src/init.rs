//! Initial-data recipes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BfdError, Result};
use crate::spectral::SpectralField;
use crate::system::{FieldState, Model};

/// Shape of the initial surface elevation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// exp(-|x - x0|^2 / w^2) with the mean removed; x0 defaults to the
    /// domain centre and distances are periodic.
    Gaussian {
        width: f64,
        #[serde(default)]
        center: Option<[f64; 2]>,
    },
    /// cos(k . x) with integer mode numbers.
    Mode { k: [i64; 2] },
    /// Random coefficients on |k| <= n/8 per axis with amplitudes decaying
    /// like <xi>^-decay, scaled to unit maximum.
    RandomBandlimited { seed: u64, decay: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Velocity {
    /// Linear right-mover: Z- = 0 on xi_1 > 0, Z+ = 0 on xi_1 < 0 (xi_2
    /// breaks the tie on xi_1 = 0), W = 0. Real and curl-free; v = zeta / r
    /// per mode in 1D.
    #[default]
    RightMover,
    Rest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    #[serde(flatten)]
    pub profile: Profile,
    pub amplitude: f64,
    #[serde(default)]
    pub velocity: Velocity,
}

impl InitialData {
    pub fn build(&self, model: &Model) -> Result<FieldState> {
        initial_state(model, self)
    }
}

/// Builds (zeta, v) on the model grid; both are 2/3-truncated.
pub fn initial_state(model: &Model, data: &InitialData) -> Result<FieldState> {
    if !data.amplitude.is_finite() {
        return Err(BfdError::domain("amplitude", "must be finite"));
    }
    let grid = model.grid();
    let spec = grid.spec().clone();
    let dim = spec.dim;
    let shape = match &data.profile {
        Profile::Gaussian { width, center } => {
            if !(*width > 0.0) {
                return Err(BfdError::domain("width", format!("{width} not > 0")));
            }
            let c = center.unwrap_or([spec.length[0] / 2.0, spec.length[1] / 2.0]);
            let f = SpectralField::from_fn(grid, |x, y| {
                let mut r2 = periodic_gap(x - c[0], spec.length[0]).powi(2);
                if dim == 2 {
                    r2 += periodic_gap(y - c[1], spec.length[1]).powi(2);
                }
                (-r2 / (width * width)).exp()
            });
            let mut s = f.into_spectral();
            s[0] = Complex64::new(0.0, 0.0);
            s
        }
        Profile::Mode { k } => {
            let (k1, k2) = (k[0] as f64, if dim == 2 { k[1] as f64 } else { 0.0 });
            let (l1, l2) = (spec.length[0], spec.length[1]);
            SpectralField::from_fn(grid, |x, y| (2.0 * PI * (k1 * x / l1 + k2 * y / l2)).cos())
                .into_spectral()
        }
        Profile::RandomBandlimited { seed, decay } => random_bandlimited(model, *seed, *decay),
    };
    let mut zh: Vec<Complex64> = shape.iter().map(|z| z * data.amplitude).collect();
    model.dealias(&mut zh);
    let n = grid.len();
    let mut vh = vec![vec![Complex64::new(0.0, 0.0); n]; dim];
    if data.velocity == Velocity::RightMover {
        let sym = model.symbols();
        for i in 1..n {
            let kn = grid.xi_deriv_norm(i);
            if kn == 0.0 {
                continue;
            }
            let x1 = grid.xi_deriv(0)[i];
            let lead = if x1 != 0.0 { x1 } else { grid.xi_deriv(dim - 1)[i] };
            let d = lead.signum() * zh[i] / sym.ratio_sqrt[i];
            for (j, c) in vh.iter_mut().enumerate() {
                c[i] = grid.xi_deriv(j)[i] / kn * d;
            }
        }
    }
    FieldState::from_spectra(grid, 0.0, zh, vh)
}

fn periodic_gap(d: f64, l: f64) -> f64 {
    d - l * (d / l).round()
}

fn random_bandlimited(model: &Model, seed: u64, decay: f64) -> Vec<Complex64> {
    let grid = model.grid();
    let spec = grid.spec();
    let n = grid.len();
    let cut = [spec.n[0] / 8, spec.n[1] / 8];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = vec![Complex64::new(0.0, 0.0); n];
    for (i, z) in s.iter_mut().enumerate() {
        let inside = (0..spec.dim).all(|a| grid.modes(a)[i].unsigned_abs() as usize <= cut[a]);
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        if inside && i != 0 {
            let w = (1.0 + grid.xi_sq()[i]).powf(-decay / 2.0);
            *z = Complex64::new(re, im) * w;
        }
    }
    // Real part of the synthesised field keeps the band and the zero mean.
    let real = grid.inverse(&s);
    let peak = real.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    grid.forward(&real.iter().map(|x| x * scale).collect::<Vec<_>>())
}

/// A random band-limited state with independent zeta and v components,
/// each scaled to maximum `amplitude`. Used for property sampling.
pub fn random_state(model: &Model, seed: u64, decay: f64, amplitude: f64) -> Result<FieldState> {
    let grid = model.grid();
    let dim = grid.dim();
    let mut mixer = ChaCha8Rng::seed_from_u64(seed);
    let mut field = || {
        let mut s = random_bandlimited(model, mixer.gen(), decay);
        for z in s.iter_mut() {
            *z *= amplitude;
        }
        s
    };
    let zh = field();
    let vh = (0..dim).map(|_| field()).collect();
    FieldState::from_spectra(grid, 0.0, zh, vh)
}
