//! Multipliers, dealiased products and vector calculus on spectral fields.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{BfdError, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Pointwise product of the spectrum with a per-mode symbol.
pub fn apply_multiplier(field: &SpectralField, symbol: &[Complex64]) -> Result<SpectralField> {
    let spec = field.spectral();
    if symbol.len() != spec.len() {
        return Err(BfdError::GridMismatch(format!(
            "symbol of length {} for a field of {} modes",
            symbol.len(),
            spec.len()
        )));
    }
    let out = spec.iter().zip(symbol).map(|(u, m)| u * m).collect();
    SpectralField::from_spectral(field.grid(), out)
}

/// Real-symbol version of [`apply_multiplier`].
pub fn apply_real_multiplier(field: &SpectralField, symbol: &[f64]) -> Result<SpectralField> {
    let spec = field.spectral();
    if symbol.len() != spec.len() {
        return Err(BfdError::GridMismatch(format!(
            "symbol of length {} for a field of {} modes",
            symbol.len(),
            spec.len()
        )));
    }
    let out = spec.iter().zip(symbol).map(|(u, m)| u * m).collect();
    SpectralField::from_spectral(field.grid(), out)
}

/// Zeroes every mode with some |k| > floor(n/3).
pub fn dealias(field: &SpectralField) -> SpectralField {
    let mut s = field.spectral().into_owned();
    dealias_in_place(field.grid(), &mut s);
    SpectralField::from_spectral(field.grid(), s).expect("same grid")
}

pub fn dealias_in_place(grid: &Grid, spectrum: &mut [Complex64]) {
    for (z, keep) in spectrum.iter_mut().zip(grid.dealias_mask()) {
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Spectrum of the pointwise product of two real arrays, 2/3-rule truncated.
pub fn dealiased_product(grid: &Grid, u: &[f64], v: &[f64]) -> Vec<Complex64> {
    let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
    let mut s = grid.forward(&prod);
    dealias_in_place(grid, &mut s);
    s
}

/// Pointwise product of two fields followed by 2/3-rule truncation.
pub fn product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    check_same(u, v)?;
    let s = dealiased_product(u.grid(), &u.real(), &v.real());
    SpectralField::from_spectral(u.grid(), s)
}

fn check_same(u: &SpectralField, v: &SpectralField) -> Result<()> {
    if !u.grid().same_as(v.grid()) {
        return Err(BfdError::GridMismatch(
            "fields live on different grids".to_string(),
        ));
    }
    Ok(())
}

/// Spectral partial derivative along `axis`.
pub fn partial(field: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = field.grid();
    if axis >= grid.dim() {
        return Err(BfdError::UnsupportedDimension {
            dim: grid.dim(),
            what: "derivative along a missing axis",
        });
    }
    let xi = grid.xi_deriv(axis);
    let out = field
        .spectral()
        .iter()
        .zip(xi)
        .map(|(u, k)| I * k * u)
        .collect();
    SpectralField::from_spectral(grid, out)
}

pub fn gradient(field: &SpectralField) -> Vec<SpectralField> {
    (0..field.grid().dim())
        .map(|axis| partial(field, axis).expect("axis within dimension"))
        .collect()
}

pub fn divergence(v: &[SpectralField]) -> Result<SpectralField> {
    let grid = v
        .first()
        .ok_or_else(|| BfdError::GridMismatch("empty vector field".to_string()))?
        .grid()
        .clone();
    if v.len() != grid.dim() {
        return Err(BfdError::GridMismatch(format!(
            "{} components for a {}D grid",
            v.len(),
            grid.dim()
        )));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (axis, comp) in v.iter().enumerate() {
        check_same(&v[0], comp)?;
        let xi = grid.xi_deriv(axis);
        for ((a, u), k) in acc.iter_mut().zip(comp.spectral().iter()).zip(xi) {
            *a += I * k * u;
        }
    }
    SpectralField::from_spectral(&grid, acc)
}

/// Scalar curl d1 v2 - d2 v1 (2D only).
pub fn curl(v: &[SpectralField]) -> Result<SpectralField> {
    let grid = require_2d(v)?;
    let (kx, ky) = (grid.xi_deriv(0), grid.xi_deriv(1));
    let (v1, v2) = (v[0].spectral(), v[1].spectral());
    let out = (0..grid.len())
        .map(|i| I * kx[i] * v2[i] - I * ky[i] * v1[i])
        .collect();
    SpectralField::from_spectral(&grid, out)
}

/// Perpendicular gradient (-d2 f, d1 f) (2D only).
pub fn perp_gradient(field: &SpectralField) -> Result<Vec<SpectralField>> {
    let grid = field.grid();
    if grid.dim() != 2 {
        return Err(BfdError::UnsupportedDimension {
            dim: grid.dim(),
            what: "perpendicular gradient",
        });
    }
    let d2 = partial(field, 1)?;
    let d1 = partial(field, 0)?;
    Ok(vec![d2.scaled(-1.0), d1])
}

fn require_2d(v: &[SpectralField]) -> Result<Arc<Grid>> {
    let grid = v
        .first()
        .ok_or_else(|| BfdError::GridMismatch("empty vector field".to_string()))?
        .grid()
        .clone();
    if grid.dim() != 2 {
        return Err(BfdError::UnsupportedDimension {
            dim: grid.dim(),
            what: "curl",
        });
    }
    if v.len() != 2 {
        return Err(BfdError::GridMismatch(format!(
            "curl needs 2 components, got {}",
            v.len()
        )));
    }
    check_same(&v[0], &v[1])?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Arc<Grid> {
        Grid::new(GridSpec::square(n, 2.0 * PI).unwrap()).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn unit_symbol_is_identity() {
        let g = torus(16);
        let f = SpectralField::from_fn(&g, |x, y| (x + y).sin() + 0.5 * (2.0 * y).cos());
        let one = vec![Complex64::new(1.0, 0.0); g.len()];
        let h = apply_multiplier(&f, &one).unwrap();
        assert!(max_diff(&f.real(), &h.real()) < 1e-14);
    }

    #[test]
    fn derivative_symbol_on_cosine() {
        let g = torus(16);
        let f = SpectralField::from_fn(&g, |x, _| x.cos());
        let sym: Vec<Complex64> = g.xi(0).iter().map(|k| I * k).collect();
        let h = apply_multiplier(&f, &sym).unwrap();
        let expect = SpectralField::from_fn(&g, |x, _| -x.sin());
        assert!(max_diff(&h.real(), &expect.real()) < 1e-13);
    }

    #[test]
    fn helmholtz_round_trip() {
        let g = torus(32);
        let (b, mu) = (0.3, 0.05);
        let f = SpectralField::from_fn(&g, |x, y| (-(x - PI).powi(2) - (y - PI).powi(2)).exp());
        let fwd: Vec<f64> = g.xi_sq().iter().map(|k2| 1.0 + b * mu * k2).collect();
        let inv: Vec<f64> = fwd.iter().map(|h| 1.0 / h).collect();
        let h = apply_real_multiplier(&apply_real_multiplier(&f, &inv).unwrap(), &fwd).unwrap();
        let fs = f.spectral();
        let hs = h.spectral();
        let num: f64 = fs.iter().zip(hs.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = fs.iter().map(|a| a.norm_sqr()).sum();
        assert!((num / den).sqrt() < 1e-13);
    }

    #[test]
    fn multiplier_shape_mismatch() {
        let g = torus(16);
        let f = SpectralField::zeros(&g);
        assert!(matches!(
            apply_multiplier(&f, &[Complex64::new(1.0, 0.0); 3]),
            Err(BfdError::GridMismatch(_))
        ));
    }

    #[test]
    fn gradient_fields_are_curl_free() {
        let g = torus(32);
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        let c = curl(&gradient(&f)).unwrap();
        assert!(c.max_abs() < 1e-13);
    }

    #[test]
    fn perpendicular_gradients_are_divergence_free() {
        let g = torus(32);
        let f = SpectralField::from_fn(&g, |_, y| y.sin());
        let d = divergence(&perp_gradient(&f).unwrap()).unwrap();
        assert!(d.max_abs() < 1e-13);
    }

    #[test]
    fn laplacian_through_div_grad() {
        let g = torus(32);
        let f = SpectralField::from_fn(&g, |x, y| x.sin() + (2.0 * y).cos());
        let lap = divergence(&gradient(&f)).unwrap();
        let expect = SpectralField::from_fn(&g, |x, y| -x.sin() - 4.0 * (2.0 * y).cos());
        assert!(max_diff(&lap.real(), &expect.real()) < 1e-12);
    }

    #[test]
    fn curl_is_unsupported_in_one_dimension() {
        let g = Grid::new(GridSpec::new_1d(16, 1.0).unwrap()).unwrap();
        let f = SpectralField::zeros(&g);
        assert!(matches!(
            curl(&[f.clone()]),
            Err(BfdError::UnsupportedDimension { dim: 1, .. })
        ));
        assert!(perp_gradient(&f).is_err());
    }

    #[test]
    fn dealias_zeroes_upper_third_and_is_idempotent() {
        let g = Grid::new(GridSpec::new_1d(16, 2.0 * PI).unwrap()).unwrap();
        let f = SpectralField::from_fn(&g, |x, _| (0..=8).map(|k| (k as f64 * x).cos()).sum());
        let once = dealias(&f);
        let s = once.spectral();
        for (i, z) in s.iter().enumerate() {
            let k = g.modes(0)[i].abs();
            if k > 5 {
                assert_eq!(*z, Complex64::new(0.0, 0.0));
            } else {
                assert!(z.norm() > 1.0, "mode {k} lost");
            }
        }
        let twice = dealias(&once);
        assert_eq!(twice.spectral().as_ref(), once.spectral().as_ref());
    }

    #[test]
    fn dealiased_product_matches_fine_grid() {
        let coarse = Grid::new(GridSpec::new_1d(16, 2.0 * PI).unwrap()).unwrap();
        let fine = Grid::new(GridSpec::new_1d(32, 2.0 * PI).unwrap()).unwrap();
        let f = |x: f64, _| (5.0 * x).cos() + 0.5 * (5.0 * x).sin();
        let h = |x: f64, _| (5.0 * x).sin() - 0.25 * (5.0 * x).cos();
        let pc = product(&SpectralField::from_fn(&coarse, f), &SpectralField::from_fn(&coarse, h)).unwrap();
        // Product on the fine grid is alias free; truncate to |k| <= 5.
        let uf = SpectralField::from_fn(&fine, f).into_real();
        let vf = SpectralField::from_fn(&fine, h).into_real();
        let mut pf = fine.forward(&uf.iter().zip(&vf).map(|(a, b)| a * b).collect::<Vec<_>>());
        for (i, z) in pf.iter_mut().enumerate() {
            if fine.modes(0)[i].abs() > 5 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        let fine_trunc = fine.inverse(&pf);
        let coarse_vals = pc.real();
        for (i, v) in coarse_vals.iter().enumerate() {
            assert!((v - fine_trunc[2 * i]).abs() < 1e-13);
        }
    }
}
