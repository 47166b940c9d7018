//! The primitive-variable system
//!
//!   (1 - b mu Lap) zeta_t + (1/gamma) div((A(D) - eps zeta) v) = 0,
//!   (1 - d mu Lap) v_t + (1 - gamma)(1 + c mu Lap) grad zeta - (eps / 2 gamma) grad |v|^2 = 0,
//!
//! its pseudo-spectral right-hand side, and the frozen-coefficient symbol
//! matrices M(V, xi) and symmetrizers S_V(xi) used for structural checks.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{BfdError, Result};
use crate::params::{classify_case, CaseClass, ModelParams, Variant};
use crate::spectral::{a_symbol, ops, Grid, GridSpec, SpectralField, SymbolTable};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Parameters, case, grid and the cached symbol table of one configuration.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: ModelParams,
    pub case: CaseClass,
    grid: Arc<Grid>,
    symbols: SymbolTable,
    mask: Vec<bool>,
}

impl Model {
    /// Fails with an ill-posed-parameters error when the sign condition does
    /// not hold.
    pub fn new(params: ModelParams, grid: Arc<Grid>) -> Result<Arc<Self>> {
        let case = classify_case(&params)?;
        let symbols = SymbolTable::new(&grid, &params);
        let mask = grid.dealias_mask();
        Ok(Arc::new(Self {
            params,
            case,
            grid,
            symbols,
            mask,
        }))
    }

    pub fn from_spec(params: ModelParams, spec: GridSpec) -> Result<Arc<Self>> {
        Self::new(params, Grid::new(spec)?)
    }

    /// Same model with the 2/3 truncation of products switched off.
    pub fn without_dealiasing(&self) -> Arc<Self> {
        Arc::new(Self {
            params: self.params,
            case: self.case,
            grid: self.grid.clone(),
            symbols: self.symbols.clone(),
            mask: vec![true; self.grid.len()],
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub(crate) fn dealias(&self, s: &mut [Complex64]) {
        for (z, &keep) in s.iter_mut().zip(&self.mask) {
            if !keep {
                *z = ZERO;
            }
        }
    }

    /// Spectrum of the 2/3-truncated product of two real arrays.
    pub(crate) fn product(&self, u: &[f64], v: &[f64]) -> Vec<Complex64> {
        let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
        let mut s = self.grid.forward(&prod);
        self.dealias(&mut s);
        s
    }

    /// Spectrum of the 2/3-truncated |v|^2.
    pub(crate) fn speed_sq(&self, v: &[Vec<f64>]) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut acc = vec![0.0; n];
        for comp in v {
            for (a, x) in acc.iter_mut().zip(comp) {
                *a += x * x;
            }
        }
        let mut s = self.grid.forward(&acc);
        self.dealias(&mut s);
        s
    }
}

/// The unknowns (zeta, v) at one time instant.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub t: f64,
    pub zeta: SpectralField,
    /// One component in 1D, two in 2D.
    pub v: Vec<SpectralField>,
}

impl FieldState {
    pub fn new(t: f64, zeta: SpectralField, v: Vec<SpectralField>) -> Result<Self> {
        let dim = zeta.grid().dim();
        if v.len() != dim {
            return Err(BfdError::GridMismatch(format!(
                "{} velocity components on a {dim}D grid",
                v.len()
            )));
        }
        if v.iter().any(|c| !c.grid().same_as(zeta.grid())) {
            return Err(BfdError::GridMismatch(
                "zeta and v live on different grids".to_string(),
            ));
        }
        Ok(Self { t, zeta, v })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            t: 0.0,
            zeta: SpectralField::zeros(grid),
            v: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_spectra(
        grid: &Arc<Grid>,
        t: f64,
        zeta: Vec<Complex64>,
        v: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let zeta = SpectralField::from_spectral(grid, zeta)?;
        let v = v
            .into_iter()
            .map(|c| SpectralField::from_spectral(grid, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(t, zeta, v)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.zeta.grid()
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn spectra(&self) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        (
            self.zeta.spectral().into_owned(),
            self.v.iter().map(|c| c.spectral().into_owned()).collect(),
        )
    }

    /// Amplitudes times `amp`, lengths and time times `len`, same grid shape.
    pub(crate) fn rescaled(&self, amp: f64, len: f64) -> Result<FieldState> {
        let spec = self.grid().spec();
        let mut length = spec.length;
        for l in length.iter_mut().take(spec.dim) {
            *l *= len;
        }
        let grid = Grid::new(GridSpec {
            dim: spec.dim,
            n: spec.n,
            length,
        })?;
        let zeta = self.zeta.scaled(amp).on_grid(&grid)?;
        let v = self
            .v
            .iter()
            .map(|c| c.scaled(amp).on_grid(&grid))
            .collect::<Result<Vec<_>>>()?;
        FieldState::new(self.t * len, zeta, v)
    }

    /// L^2-type norm of the whole state, sqrt(|zeta|^2 + |v|^2) integrated.
    pub fn l2_norm(&self) -> f64 {
        (self.zeta.l2_sq_spectral() + self.v.iter().map(|c| c.l2_sq_spectral()).sum::<f64>())
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.zeta.all_finite() && self.v.iter().all(|c| c.all_finite())
    }
}

/// Time derivatives in spectral form.
pub(crate) struct Tendency {
    pub zeta: Vec<Complex64>,
    pub v: Vec<Vec<Complex64>>,
}

/// Right-hand side from spectra alone; real values are produced internally.
pub(crate) fn rhs_spectral(model: &Model, zh: &[Complex64], vh: &[Vec<Complex64>]) -> Tendency {
    let grid = model.grid();
    let p = &model.params;
    let sym = model.symbols();
    let dim = vh.len();
    let n = grid.len();
    let eps = p.epsilon;

    let (zeta_flux, speed_sq) = if eps != 0.0 {
        let zr = grid.inverse(zh);
        let vr: Vec<Vec<f64>> = vh.iter().map(|c| grid.inverse(c)).collect();
        let flux: Vec<Vec<Complex64>> = vr.iter().map(|c| model.product(&zr, c)).collect();
        (Some(flux), Some(model.speed_sq(&vr)))
    } else {
        (None, None)
    };

    let mut dz = vec![ZERO; n];
    for (j, comp) in vh.iter().enumerate() {
        let xi = grid.xi_deriv(j);
        for i in 0..n {
            let mut f = sym.a[i] * comp[i];
            if let Some(flux) = &zeta_flux {
                f -= eps * flux[j][i];
            }
            dz[i] += I * xi[i] * f;
        }
    }
    for i in 0..n {
        dz[i] *= -1.0 / (p.gamma * sym.helmholtz_b[i]);
    }

    let dv = (0..dim)
        .map(|j| {
            let xi = grid.xi_deriv(j);
            (0..n)
                .map(|i| {
                    let mut pot = (1.0 - p.gamma) * sym.one_minus_cmu[i] * zh[i];
                    if let Some(q) = &speed_sq {
                        pot -= eps / (2.0 * p.gamma) * q[i];
                    }
                    -(I * xi[i] * pot) / sym.helmholtz_d[i]
                })
                .collect()
        })
        .collect();
    Tendency { zeta: dz, v: dv }
}

/// Pseudo-spectral (d zeta/dt, dv/dt) of the primitive system.
pub fn rhs_primitive(model: &Model, state: &FieldState) -> Result<(SpectralField, Vec<SpectralField>)> {
    if !state.grid().same_as(model.grid()) {
        return Err(BfdError::GridMismatch(
            "state grid differs from model grid".to_string(),
        ));
    }
    let (zh, vh) = state.spectra();
    let t = rhs_spectral(model, &zh, &vh);
    let grid = model.grid();
    let dz = SpectralField::from_spectral(grid, t.zeta)?;
    let dv = t
        .v
        .into_iter()
        .map(|c| SpectralField::from_spectral(grid, c))
        .collect::<Result<Vec<_>>>()?;
    Ok((dz, dv))
}

/// M(V, xi) and S_V(xi) with zeta and v frozen to constants.
#[derive(Clone, Debug)]
pub struct FrozenSymbolMatrices {
    pub xi: Vec<f64>,
    pub m: DMatrix<Complex64>,
    pub s: DMatrix<Complex64>,
    pub variant: Variant,
}

/// Builds the frozen-coefficient matrices: derivatives become i xi_j,
/// multipliers their symbols and multiplications by zeta, v^j the scalars
/// `zeta_bar`, `v_bar[j]`.
pub fn frozen_symbol_matrices(
    xi: &[f64],
    zeta_bar: f64,
    v_bar: &[f64],
    params: &ModelParams,
    variant: Variant,
) -> Result<FrozenSymbolMatrices> {
    variant.check(params)?;
    let dim = xi.len();
    if !(dim == 1 || dim == 2) || v_bar.len() != dim {
        return Err(BfdError::GridMismatch(format!(
            "xi has {} and v_bar {} components",
            dim,
            v_bar.len()
        )));
    }
    let p = params;
    let eps = p.epsilon;
    let gam = p.gamma;
    let k2: f64 = xi.iter().map(|x| x * x).sum();
    let a = a_symbol(k2, p);
    let sc = 1.0 - p.c * p.mu * k2;
    let hd = 1.0 + p.d * p.mu * k2;
    let g = (1.0 + p.b * p.mu * k2) / hd;
    let ik: Vec<Complex64> = xi.iter().map(|&x| I * x).collect();
    let v_dot_ik: Complex64 = v_bar.iter().zip(&ik).map(|(v, k)| v * k).sum();
    let a_eff = a - eps * zeta_bar;

    let n = dim + 1;
    let mut m = DMatrix::from_element(n, n, ZERO);
    let mut s = DMatrix::from_element(n, n, ZERO);
    match variant {
        Variant::BEqualD | Variant::BNotEqualD => {
            let gm = if variant == Variant::BEqualD { 1.0 } else { g };
            m[(0, 0)] = -(eps / gam) * v_dot_ik;
            for j in 0..dim {
                m[(0, j + 1)] = a_eff / gam * ik[j];
                m[(j + 1, 0)] = (1.0 - gam) * gm * sc * ik[j];
                for k in 0..dim {
                    m[(j + 1, k + 1)] = -(eps / gam) * gm * v_bar[k] * ik[j];
                }
            }
        }
        Variant::BZero => {
            m[(0, 0)] = -(eps / gam) * hd * v_dot_ik;
            for j in 0..dim {
                m[(0, j + 1)] = hd * a_eff / gam * ik[j];
                m[(j + 1, 0)] = (1.0 - gam) * sc * ik[j];
                for k in 0..dim {
                    m[(j + 1, k + 1)] = -(eps / gam) * v_bar[k] * ik[j];
                }
            }
        }
    }
    let gg = gam * (1.0 - gam);
    match variant {
        Variant::BEqualD => {
            s[(0, 0)] = (gg * sc).into();
            for j in 0..dim {
                s[(0, j + 1)] = (-eps * v_bar[j]).into();
                s[(j + 1, 0)] = (-eps * v_bar[j]).into();
                s[(j + 1, j + 1)] = a_eff.into();
            }
        }
        Variant::BNotEqualD => {
            s[(0, 0)] = (gg * gg * sc * sc * g).into();
            for j in 0..dim {
                let off = gg * (-eps * g * v_bar[j] * sc);
                s[(0, j + 1)] = off.into();
                s[(j + 1, 0)] = off.into();
                s[(j + 1, j + 1)] = (gg * a_eff * sc).into();
                for k in 0..dim {
                    s[(j + 1, k + 1)] += eps * eps * v_bar[j] * v_bar[k] * (g - 1.0);
                }
            }
        }
        Variant::BZero => {
            s[(0, 0)] = (gg * gg * sc * sc).into();
            for j in 0..dim {
                let off = gg * (-eps * v_bar[j] * sc);
                s[(0, j + 1)] = off.into();
                s[(j + 1, 0)] = off.into();
                s[(j + 1, j + 1)] = (gg * sc * a_eff * hd).into();
                for k in 0..dim {
                    s[(j + 1, k + 1)] += p.d * eps * eps * p.mu * v_bar[j] * v_bar[k] * (-k2);
                }
            }
        }
    }
    Ok(FrozenSymbolMatrices {
        xi: xi.to_vec(),
        m,
        s,
        variant,
    })
}

/// Self-adjointness defect of iSM and positivity of S at one frozen point.
#[derive(Clone, Copy, Debug)]
pub struct HermitianReport {
    /// ||iSM - (iSM)^H||_F / (1 + ||iSM||_F).
    pub defect: f64,
    /// Smallest eigenvalue of (S + S^H)/2.
    pub positivity_margin: f64,
    /// `positivity_margin` divided by the scalar prefactor gamma(1-gamma)
    /// that the b != d and b = 0 symmetrizers carry (1 for b = d).
    pub normalized_margin: f64,
}

pub fn hermitian_defect(
    xi: &[f64],
    zeta_bar: f64,
    v_bar: &[f64],
    params: &ModelParams,
    variant: Variant,
) -> Result<HermitianReport> {
    let f = frozen_symbol_matrices(xi, zeta_bar, v_bar, params, variant)?;
    Ok(f.report(params))
}

impl FrozenSymbolMatrices {
    pub fn report(&self, params: &ModelParams) -> HermitianReport {
        let ism = (&self.s * &self.m) * I;
        let skew = &ism - ism.adjoint();
        let defect = skew.norm() / (1.0 + ism.norm());
        let sym = (&self.s + self.s.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym).eigenvalues;
        let margin = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let prefactor = match self.variant {
            Variant::BEqualD => 1.0,
            _ => params.gamma * (1.0 - params.gamma),
        };
        HermitianReport {
            defect,
            positivity_margin: margin,
            normalized_margin: margin / prefactor,
        }
    }
}

/// Non-cavitation diagnostics of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonCavitation {
    /// min over the grid of 1 - eps zeta.
    pub margin: f64,
    /// eps ||zeta||_{W^{1,inf}} + eps ||v||_{W^{1,inf}} from grid maxima of
    /// values and spectral first derivatives.
    pub w1inf: f64,
}

impl NonCavitation {
    pub fn cavitated(&self) -> bool {
        self.margin <= 0.0
    }
}

pub fn noncavitation_margin(params: &ModelParams, state: &FieldState) -> NonCavitation {
    let eps = params.epsilon;
    let zeta = state.zeta.real();
    let margin = zeta
        .iter()
        .map(|z| 1.0 - eps * z)
        .fold(f64::INFINITY, f64::min);
    let zeta_w = w1inf_norm(std::slice::from_ref(&state.zeta));
    let v_w = w1inf_norm(&state.v);
    NonCavitation {
        margin,
        w1inf: eps * (zeta_w + v_w),
    }
}

/// sup |f| + sup |grad f| (pointwise Euclidean / Frobenius norms).
fn w1inf_norm(f: &[SpectralField]) -> f64 {
    let n = f[0].grid().len();
    let mut val = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for comp in f {
        for (a, x) in val.iter_mut().zip(comp.real().iter()) {
            *a += x * x;
        }
        for d in ops::gradient(comp) {
            for (a, x) in grad.iter_mut().zip(d.real().iter()) {
                *a += x * x;
            }
        }
    }
    let sup = |w: &[f64]| w.iter().fold(0.0f64, |m, x| m.max(*x)).sqrt();
    sup(&val) + sup(&grad)
}
