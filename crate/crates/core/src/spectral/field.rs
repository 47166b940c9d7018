use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{BfdError, Result};

/// Which representation of a [`SpectralField`] is current.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sync {
    Real,
    Spectral,
    Both,
}

/// A real scalar field on a periodic grid, held in real space, Fourier space
/// or both. Missing representations are computed on demand.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    real: Option<Vec<f64>>,
    spectral: Option<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            real: Some(vec![0.0; n]),
            spectral: Some(vec![Complex64::new(0.0, 0.0); n]),
        }
    }

    pub fn from_real(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid, values.len())?;
        Ok(Self {
            grid: grid.clone(),
            real: Some(values),
            spectral: None,
        })
    }

    /// Wraps Fourier coefficients (unnormalized forward-transform convention).
    /// The spectrum is assumed Hermitian; only the real part of the inverse
    /// transform is kept.
    pub fn from_spectral(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(grid, coeffs.len())?;
        Ok(Self {
            grid: grid.clone(),
            real: None,
            spectral: Some(coeffs),
        })
    }

    /// Samples `f(x, y)` at the grid points (`y = 0` in 1D).
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let spec = grid.spec();
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..spec.n[1] {
            let y = if spec.dim == 2 { spec.coord(1, iy) } else { 0.0 };
            for ix in 0..spec.n[0] {
                values.push(f(spec.coord(0, ix), y));
            }
        }
        Self {
            grid: grid.clone(),
            real: Some(values),
            spectral: None,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn sync(&self) -> Sync {
        match (&self.real, &self.spectral) {
            (Some(_), Some(_)) => Sync::Both,
            (Some(_), None) => Sync::Real,
            _ => Sync::Spectral,
        }
    }

    /// Real-space values, computing them if only the spectrum is current.
    pub fn real(&self) -> Cow<'_, [f64]> {
        match &self.real {
            Some(r) => Cow::Borrowed(r),
            None => Cow::Owned(self.grid.inverse(self.spectral.as_ref().unwrap())),
        }
    }

    /// Fourier coefficients, computing them if only real values are current.
    pub fn spectral(&self) -> Cow<'_, [Complex64]> {
        match &self.spectral {
            Some(s) => Cow::Borrowed(s),
            None => Cow::Owned(self.grid.forward(self.real.as_ref().unwrap())),
        }
    }

    /// Makes both representations current.
    pub fn synced(mut self) -> Self {
        self.ensure_both();
        self
    }

    pub fn ensure_both(&mut self) {
        if self.real.is_none() {
            self.real = Some(self.grid.inverse(self.spectral.as_ref().unwrap()));
        }
        if self.spectral.is_none() {
            self.spectral = Some(self.grid.forward(self.real.as_ref().unwrap()));
        }
    }

    pub fn into_spectral(self) -> Vec<Complex64> {
        match self.spectral {
            Some(s) => s,
            None => self.grid.forward(self.real.as_ref().unwrap()),
        }
    }

    pub fn into_real(self) -> Vec<f64> {
        match self.real {
            Some(r) => r,
            None => self.grid.inverse(self.spectral.as_ref().unwrap()),
        }
    }

    /// Multiplies both representations by a real scalar.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            real: self
                .real
                .as_ref()
                .map(|r| r.iter().map(|x| x * factor).collect()),
            spectral: self
                .spectral
                .as_ref()
                .map(|s| s.iter().map(|z| z * factor).collect()),
        }
    }

    /// Same data reinterpreted on another grid of identical shape.
    pub fn on_grid(&self, grid: &Arc<Grid>) -> Result<Self> {
        if grid.spec().n != self.grid.spec().n || grid.dim() != self.grid.dim() {
            return Err(BfdError::GridMismatch(format!(
                "cannot move {:?} points onto {:?}",
                self.grid.spec().n,
                grid.spec().n
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            real: self.real.clone(),
            spectral: self.spectral.clone(),
        })
    }

    /// Maximum absolute real-space value.
    pub fn max_abs(&self) -> f64 {
        self.real().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Continuous L^2 norm squared, trapezoid rule.
    pub fn l2_sq(&self) -> f64 {
        let r = self.real();
        self.grid.integrate(&r.iter().map(|x| x * x).collect::<Vec<_>>())
    }

    /// Continuous L^2 norm squared from the Fourier coefficients.
    pub fn l2_sq_spectral(&self) -> f64 {
        self.spectral().iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.parseval_factor()
    }

    pub fn all_finite(&self) -> bool {
        match (&self.real, &self.spectral) {
            (Some(r), _) => r.iter().all(|x| x.is_finite()),
            (None, Some(s)) => s.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            _ => true,
        }
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(BfdError::GridMismatch(format!(
            "{len} values for a grid of {} points",
            grid.len()
        )));
    }
    Ok(())
}
