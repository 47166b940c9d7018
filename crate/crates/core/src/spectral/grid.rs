use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{BfdError, Result};

/// Geometry of a periodic grid on [0, L1) x [0, L2).
///
/// Axis 0 is x. In 1D the second axis is inert (`n[1] == 1`). Flat storage
/// is x-fastest: `idx = iy * n[0] + ix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: [usize; 2],
    pub length: [f64; 2],
}

impl GridSpec {
    pub fn new_1d(n: usize, length: f64) -> Result<Self> {
        let g = Self {
            dim: 1,
            n: [n, 1],
            length: [length, 1.0],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn new_2d(n: [usize; 2], length: [f64; 2]) -> Result<Self> {
        let g = Self { dim: 2, n, length };
        g.validate()?;
        Ok(g)
    }

    /// Square 2D grid.
    pub fn square(n: usize, length: f64) -> Result<Self> {
        Self::new_2d([n, n], [length, length])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(BfdError::domain("dim", format!("{} not in {{1, 2}}", self.dim)));
        }
        for axis in 0..self.dim {
            if self.n[axis] < 8 {
                return Err(BfdError::domain(
                    "n",
                    format!("{} points on axis {axis}, need >= 8", self.n[axis]),
                ));
            }
            if !(self.length[axis] > 0.0) || !self.length[axis].is_finite() {
                return Err(BfdError::domain(
                    "length",
                    format!("{} on axis {axis}, need > 0", self.length[axis]),
                ));
            }
        }
        if self.dim == 1 && self.n[1] != 1 {
            return Err(BfdError::domain("n", "1D grid must have n[1] = 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.length[axis] / self.n[axis] as f64
    }

    /// Volume element of the trapezoid rule.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Smallest spacing over the active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Real-space coordinate of grid point `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }
}

/// Integer mode number for FFT index `i` on an axis of `n` points. The
/// Nyquist index maps to `-n/2`.
pub fn mode_number(i: usize, n: usize) -> i64 {
    if i < n.div_ceil(2) {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

struct Plans {
    fwd: [Arc<dyn Fft<f64>>; 2],
    inv: [Arc<dyn Fft<f64>>; 2],
}

/// A grid with its wavenumber tables and cached FFT plans.
///
/// Immutable once built; share it behind an `Arc`. Transforms allocate their
/// own scratch, so one `Grid` serves any number of threads.
pub struct Grid {
    spec: GridSpec,
    modes: [Vec<i64>; 2],
    xi: [Vec<f64>; 2],
    xi_deriv: [Vec<f64>; 2],
    xi_sq: Vec<f64>,
    plans: Plans,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let total = spec.len();
        let mut modes = [Vec::with_capacity(total), Vec::with_capacity(total)];
        let mut xi = [Vec::with_capacity(total), Vec::with_capacity(total)];
        let mut xi_deriv = [Vec::with_capacity(total), Vec::with_capacity(total)];
        let mut xi_sq = Vec::with_capacity(total);
        for iy in 0..spec.n[1] {
            for ix in 0..spec.n[0] {
                let mut sq = 0.0;
                for (axis, i) in [(0, ix), (1, iy)] {
                    let n = spec.n[axis];
                    let k = mode_number(i, n);
                    let w = 2.0 * PI * k as f64 / spec.length[axis];
                    let nyquist = n % 2 == 0 && i == n / 2;
                    modes[axis].push(k);
                    xi[axis].push(w);
                    xi_deriv[axis].push(if nyquist { 0.0 } else { w });
                    sq += w * w;
                }
                xi_sq.push(sq);
            }
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            fwd: [
                planner.plan_fft_forward(spec.n[0]),
                planner.plan_fft_forward(spec.n[1]),
            ],
            inv: [
                planner.plan_fft_inverse(spec.n[0]),
                planner.plan_fft_inverse(spec.n[1]),
            ],
        };
        Ok(Arc::new(Self {
            spec,
            modes,
            xi,
            xi_deriv,
            xi_sq,
            plans,
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    /// Integer mode numbers along `axis`, per flat index.
    pub fn modes(&self, axis: usize) -> &[i64] {
        &self.modes[axis]
    }

    /// Signed wavenumbers 2 pi k / L along `axis`, per flat index.
    pub fn xi(&self, axis: usize) -> &[f64] {
        &self.xi[axis]
    }

    /// Wavenumbers used in odd (derivative) symbols: identical to [`Grid::xi`]
    /// except that Nyquist entries are zero so real fields stay real.
    pub fn xi_deriv(&self, axis: usize) -> &[f64] {
        &self.xi_deriv[axis]
    }

    /// |xi|^2 per flat index.
    pub fn xi_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    /// Euclidean norm of the derivative wavenumber at flat index `i`.
    pub fn xi_deriv_norm(&self, i: usize) -> f64 {
        let x = self.xi_deriv[0][i];
        let y = self.xi_deriv[1][i];
        (x * x + y * y).sqrt()
    }

    /// Unnormalized forward transform of real data.
    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(real.len(), self.len());
        let mut buf: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.plans.fwd);
    }

    /// Inverse transform (normalized by 1/N) returning the real part.
    pub fn inverse(&self, spectral: &[Complex64]) -> Vec<f64> {
        let mut buf = spectral.to_vec();
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Normalized inverse transform, complex result.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.plans.inv);
        let scale = 1.0 / self.len() as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 2]) {
        assert_eq!(buf.len(), self.len(), "buffer does not match grid");
        let [nx, ny] = self.spec.n;
        let px = &plans[0];
        let mut scratch = vec![Complex64::new(0.0, 0.0); px.get_inplace_scratch_len()];
        px.process_with_scratch(buf, &mut scratch);
        if self.spec.dim == 2 {
            let py = &plans[1];
            let mut cols = vec![Complex64::new(0.0, 0.0); buf.len()];
            for iy in 0..ny {
                for ix in 0..nx {
                    cols[ix * ny + iy] = buf[iy * nx + ix];
                }
            }
            scratch.resize(py.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
            py.process_with_scratch(&mut cols, &mut scratch);
            for ix in 0..nx {
                for iy in 0..ny {
                    buf[iy * nx + ix] = cols[ix * ny + iy];
                }
            }
        }
    }

    /// Trapezoid-rule integral of a real field.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    /// Factor turning sum |u_hat|^2 into the continuous integral of |u|^2.
    pub fn parseval_factor(&self) -> f64 {
        self.spec.cell_volume() / self.len() as f64
    }

    /// Keep-mask of the 2/3 rule: true where every |k| <= floor(n/3).
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = [self.spec.n[0] / 3, self.spec.n[1] / 3];
        (0..self.len())
            .map(|i| {
                (0..self.spec.dim).all(|axis| self.modes[axis][i].unsigned_abs() as usize <= cut[axis])
            })
            .collect()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.spec == other.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(GridSpec::new_1d(4, 1.0).is_err());
        assert!(GridSpec::new_1d(16, 0.0).is_err());
        assert!(GridSpec::new_2d([16, 8], [1.0, -1.0]).is_err());
        assert!(GridSpec::new_2d([16, 8], [1.0, 2.0]).is_ok());
    }

    #[test]
    fn wavenumbers_match_fft_ordering() {
        let g = Grid::new(GridSpec::new_1d(8, 2.0 * PI).unwrap()).unwrap();
        assert_eq!(g.modes(0), &[0, 1, 2, 3, -4, -3, -2, -1]);
        let max = g.xi(0).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((max - PI * 8.0 / (2.0 * PI)).abs() < 1e-14);
        assert_eq!(g.xi_deriv(0)[4], 0.0);
        assert_eq!(g.xi(0)[4], -4.0);
    }

    #[test]
    fn transform_round_trip_2d() {
        let spec = GridSpec::new_2d([16, 8], [3.0, 5.0]).unwrap();
        let g = Grid::new(spec).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 113) as f64 / 17.0 - 3.0).collect();
        let back = g.inverse(&g.forward(&u));
        let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * umax);
        }
    }

    #[test]
    fn forward_of_single_mode_is_a_spike() {
        let spec = GridSpec::new_2d([8, 8], [2.0 * PI, 2.0 * PI]).unwrap();
        let g = Grid::new(spec.clone()).unwrap();
        // cos(x + 2y)
        let mut u = vec![0.0; g.len()];
        for iy in 0..8 {
            for ix in 0..8 {
                u[iy * 8 + ix] = (spec.coord(0, ix) + 2.0 * spec.coord(1, iy)).cos();
            }
        }
        let uh = g.forward(&u);
        for (i, z) in uh.iter().enumerate() {
            let k = (g.modes(0)[i], g.modes(1)[i]);
            let expect = if k == (1, 2) || k == (-1, -2) { 32.0 } else { 0.0 };
            assert!((z.re - expect).abs() < 1e-12 && z.im.abs() < 1e-12, "{k:?} {z}");
        }
    }

    #[test]
    fn dealias_mask_on_sixteen_points() {
        let g = Grid::new(GridSpec::new_1d(16, 1.0).unwrap()).unwrap();
        let mask = g.dealias_mask();
        for (i, keep) in mask.iter().enumerate() {
            assert_eq!(*keep, g.modes(0)[i].abs() <= 5, "index {i}");
        }
    }
}
