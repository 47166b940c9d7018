//! Norms and energies: X^s_{mu^k} norms, symmetrizer energies E_s for the
//! four formulations, the Hamiltonian and its variational derivatives.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{BfdError, Result};
use crate::params::Variant;
use crate::spectral::SpectralField;
use crate::system::{noncavitation_margin, rhs_primitive, FieldState, Model};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative imaginary residue above which an energy pairing is rejected.
pub const PAIRING_IMAG_TOL: f64 = 1e-10;

/// ||u||^2_{X^s_{mu^k}} = sum <xi>^{2s} (1 + mu^k |xi|^{2k}) |u_hat|^2, with the
/// quadrature normalisation of the continuous integral. k = 0 is the plain
/// H^s norm.
pub fn x_norm_sq(field: &SpectralField, s: f64, k: i32, mu: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(BfdError::domain("s", format!("{s} not >= 0")));
    }
    if k < 0 {
        return Err(BfdError::domain("k", format!("{k} not >= 0")));
    }
    let grid = field.grid();
    let muk = mu.powi(k);
    let sum: f64 = field
        .spectral()
        .iter()
        .zip(grid.xi_sq())
        .map(|(u, &k2)| {
            let bessel = if s == 0.0 { 1.0 } else { (1.0 + k2).powf(s) };
            let extra = if k == 0 { 0.0 } else { muk * k2.powi(k) };
            bessel * (1.0 + extra) * u.norm_sqr()
        })
        .sum();
    Ok(sum * grid.parseval_factor())
}

pub fn x_norm(field: &SpectralField, s: f64, k: i32, mu: f64) -> Result<f64> {
    x_norm_sq(field, s, k, mu).map(f64::sqrt)
}

/// Vector version: sum of the component squares.
pub fn x_norm_sq_vec(fields: &[SpectralField], s: f64, k: i32, mu: f64) -> Result<f64> {
    fields.iter().map(|f| x_norm_sq(f, s, k, mu)).sum()
}

/// ||zeta||_{X^0_mu} + ||v||_{X^0_mu}.
pub fn x0_norm(state: &FieldState, mu: f64) -> f64 {
    let z = x_norm_sq(&state.zeta, 0.0, 1, mu).expect("valid indices");
    let v = x_norm_sq_vec(&state.v, 0.0, 1, mu).expect("valid indices");
    z.sqrt() + v.sqrt()
}

/// ||zeta||^2_{X^s_{mu^k}} + ||v||^2_{X^s_{mu^k'}} with (k, k') of the case.
pub fn cal_e(model: &Model, state: &FieldState, s: f64) -> Result<f64> {
    let mu = model.params.mu;
    let (k, kp) = (model.case.k as i32, model.case.k_prime as i32);
    Ok(x_norm_sq(&state.zeta, s, k, mu)? + x_norm_sq_vec(&state.v, s, kp, mu)?)
}

/// ||zeta||_{X^s_{mu^k}} + ||v||_{X^s_{mu^k'}}, the lifespan monitor.
pub fn case_norm(model: &Model, state: &FieldState, s: f64) -> Result<f64> {
    let mu = model.params.mu;
    let (k, kp) = (model.case.k as i32, model.case.k_prime as i32);
    Ok(x_norm_sq(&state.zeta, s, k, mu)?.sqrt() + x_norm_sq_vec(&state.v, s, kp, mu)?.sqrt())
}

/// Operator toolkit for evaluating symmetrizer chains on spectra.
struct Chain<'a> {
    model: &'a Model,
    zeta: Vec<f64>,
    v: Vec<Vec<f64>>,
}

impl Chain<'_> {
    fn sym(&self, symbol: &[f64], x: &[Complex64]) -> Vec<Complex64> {
        x.iter().zip(symbol).map(|(u, m)| u * m).collect()
    }

    fn sym_fn(&self, x: &[Complex64], f: impl Fn(usize) -> f64) -> Vec<Complex64> {
        x.iter().enumerate().map(|(i, u)| u * f(i)).collect()
    }

    /// Multiplication by a real function followed by 2/3 truncation.
    fn mul(&self, f: &[f64], x: &[Complex64]) -> Vec<Complex64> {
        let xr = self.model.grid().inverse(x);
        self.model.product(f, &xr)
    }

    fn axpy(acc: &mut [Complex64], alpha: f64, x: &[Complex64]) {
        for (a, b) in acc.iter_mut().zip(x) {
            *a += alpha * b;
        }
    }
}

/// E_s as a complex number; the imaginary part is pure roundoff for real fields.
pub fn energy_es_complex(
    model: &Model,
    state: &FieldState,
    s: f64,
    variant: Variant,
) -> Result<Complex64> {
    variant.check(&model.params)?;
    if !(s >= 0.0) {
        return Err(BfdError::domain("s", format!("{s} not >= 0")));
    }
    let grid = model.grid();
    let p = &model.params;
    let sym = model.symbols();
    let dim = state.dim();
    let eps = p.epsilon;
    let gg = p.gamma * (1.0 - p.gamma);

    let bessel: Vec<f64> = grid.xi_sq().iter().map(|k2| (1.0 + k2).powf(s / 2.0)).collect();
    let (zh, vh) = state.spectra();
    let chain = Chain {
        model,
        zeta: grid.inverse(&zh),
        v: vh.iter().map(|c| grid.inverse(c)).collect(),
    };
    let u0 = chain.sym(&bessel, &zh);
    let uv: Vec<Vec<Complex64>> = vh.iter().map(|c| chain.sym(&bessel, c)).collect();
    let c = |x: &[Complex64]| chain.sym(&sym.one_minus_cmu, x);

    let (su0, suv): (Vec<Complex64>, Vec<Vec<Complex64>>) = match variant {
        Variant::BEqualD => {
            let mut s0 = chain.sym_fn(&u0, |i| gg * sym.one_minus_cmu[i]);
            for j in 0..dim {
                Chain::axpy(&mut s0, -eps, &chain.mul(&chain.v[j], &uv[j]));
            }
            let sv = (0..dim)
                .map(|j| {
                    let mut out = chain.sym(&sym.a, &uv[j]);
                    Chain::axpy(&mut out, -eps, &chain.mul(&chain.v[j], &u0));
                    Chain::axpy(&mut out, -eps, &chain.mul(&chain.zeta, &uv[j]));
                    out
                })
                .collect();
            (s0, sv)
        }
        Variant::BNotEqualD => {
            let cu0 = c(&u0);
            let cuv: Vec<_> = uv.iter().map(|u| c(u)).collect();
            let mut s0 = chain.sym_fn(&c(&cu0), |i| gg * gg * sym.g[i]);
            for j in 0..dim {
                let w = chain.sym(&sym.g, &chain.mul(&chain.v[j], &cuv[j]));
                Chain::axpy(&mut s0, -eps * gg, &w);
            }
            let gm1: Vec<Vec<Complex64>> = uv
                .iter()
                .map(|u| chain.sym_fn(u, |i| sym.g[i] - 1.0))
                .collect();
            let sv = (0..dim)
                .map(|i| {
                    let mut out = chain.sym_fn(&cuv[i], |m| gg * sym.a[m]);
                    let w = chain.sym(&sym.g, &chain.mul(&chain.v[i], &cu0));
                    Chain::axpy(&mut out, -eps * gg, &w);
                    Chain::axpy(&mut out, -eps * gg, &chain.mul(&chain.zeta, &cuv[i]));
                    for j in 0..dim {
                        let w = chain.mul(&chain.v[i], &chain.mul(&chain.v[j], &gm1[j]));
                        Chain::axpy(&mut out, eps * eps, &w);
                    }
                    out
                })
                .collect();
            (s0, sv)
        }
        Variant::BZero => {
            let cu0 = c(&u0);
            let mut s0 = chain.sym_fn(&c(&cu0), |_| gg * gg);
            for j in 0..dim {
                let w = chain.mul(&chain.v[j], &c(&uv[j]));
                Chain::axpy(&mut s0, -eps * gg, &w);
            }
            let lap: Vec<Vec<Complex64>> = uv
                .iter()
                .map(|u| chain.sym_fn(u, |i| -grid.xi_sq()[i]))
                .collect();
            let sv = (0..dim)
                .map(|i| {
                    let hu = chain.sym(&sym.helmholtz_d, &uv[i]);
                    let mut inner = chain.sym(&sym.a, &hu);
                    Chain::axpy(&mut inner, -eps, &chain.mul(&chain.zeta, &hu));
                    let mut out = chain.sym_fn(&inner, |m| gg * sym.one_minus_cmu[m]);
                    Chain::axpy(&mut out, -eps * gg, &chain.mul(&chain.v[i], &cu0));
                    for j in 0..dim {
                        let w = chain.mul(&chain.v[i], &chain.mul(&chain.v[j], &lap[j]));
                        Chain::axpy(&mut out, p.d * eps * eps * p.mu, &w);
                    }
                    out
                })
                .collect();
            (s0, sv)
        }
    };

    let weight = match variant {
        Variant::BZero => &sym.helmholtz_d,
        _ => &sym.helmholtz_b,
    };
    let pair = |u: &[Complex64], su: &[Complex64]| -> Complex64 {
        u.iter()
            .zip(su)
            .zip(weight)
            .map(|((a, b), w)| (a * w).conj() * b)
            .sum()
    };
    let mut total = pair(&u0, &su0);
    for j in 0..dim {
        total += pair(&uv[j], &suv[j]);
    }
    Ok(total * grid.parseval_factor())
}

/// Symmetrizer energy of the case's natural formulation.
pub fn energy_es(model: &Model, state: &FieldState, s: f64) -> Result<f64> {
    energy_es_with(model, state, s, model.case.variant)
}

/// Symmetrizer energy for an explicit (possibly overridden) formulation.
pub fn energy_es_with(model: &Model, state: &FieldState, s: f64, variant: Variant) -> Result<f64> {
    let e = energy_es_complex(model, state, s, variant)?;
    if e.im.abs() > PAIRING_IMAG_TOL * e.re.abs().max(f64::MIN_POSITIVE) && e.im.abs() > 1e-300 {
        return Err(BfdError::Invariant(format!(
            "energy pairing has imaginary residue {} against {}",
            e.im, e.re
        )));
    }
    Ok(e.re)
}

/// E_s / calE_s with the case's (k, k'); `None` for the zero state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceRatio {
    pub ratio: f64,
    pub k: u32,
    pub k_prime: u32,
}

pub fn equivalence_ratio(
    model: &Model,
    state: &FieldState,
    s: f64,
    variant: Variant,
) -> Result<Option<EquivalenceRatio>> {
    let denom = cal_e(model, state, s)?;
    if denom == 0.0 {
        return Ok(None);
    }
    let e = energy_es_with(model, state, s, variant)?;
    Ok(Some(EquivalenceRatio {
        ratio: e / denom,
        k: model.case.k,
        k_prime: model.case.k_prime,
    }))
}

/// The Hamiltonian
/// 1/2 int (1-gamma) zeta^2 + (1/gamma)(1 - eps zeta)|v|^2 - (1-gamma) c mu |grad zeta|^2
///   - (a mu / gamma)|grad v|^2 + gamma^-2 sqrt(mu/mu2)|sigma^{1/2} v|^2
///   + gamma^-3 (mu/mu2)|sigma v|^2.
pub fn hamiltonian(model: &Model, state: &FieldState) -> f64 {
    let grid = model.grid();
    let p = &model.params;
    let sym = model.symbols();
    let g = p.gamma;
    let r = p.mu / p.mu2;
    let (zh, vh) = state.spectra();
    let mut quad = 0.0;
    for (i, &k2) in grid.xi_sq().iter().enumerate() {
        let z2 = zh[i].norm_sqr();
        quad += (1.0 - g) * z2 - (1.0 - g) * p.c * p.mu * k2 * z2;
        let v2: f64 = vh.iter().map(|c| c[i].norm_sqr()).sum();
        let s = sym.sigma[i];
        quad += v2
            * (1.0 / g - p.a * p.mu * k2 / g + r.sqrt() * s / (g * g) + r * s * s / (g * g * g));
    }
    quad *= grid.parseval_factor();
    let cubic = if p.epsilon != 0.0 {
        let zr = grid.inverse(&zh);
        let vr: Vec<Vec<f64>> = vh.iter().map(|c| grid.inverse(c)).collect();
        let q = grid.inverse(&model.speed_sq(&vr));
        grid.integrate(&zr.iter().zip(&q).map(|(a, b)| a * b).collect::<Vec<_>>())
    } else {
        0.0
    };
    0.5 * quad - p.epsilon / (2.0 * g) * cubic
}

/// (dH/dzeta, dH/dv) as spectra.
pub fn variational_derivatives(model: &Model, state: &FieldState) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let grid = model.grid();
    let p = &model.params;
    let sym = model.symbols();
    let g = p.gamma;
    let r = p.mu / p.mu2;
    let (zh, vh) = state.spectra();
    let n = grid.len();
    let (zr, vr): (Vec<f64>, Vec<Vec<f64>>) = (grid.inverse(&zh), vh.iter().map(|c| grid.inverse(c)).collect());
    let q = if p.epsilon != 0.0 {
        model.speed_sq(&vr)
    } else {
        vec![Complex64::new(0.0, 0.0); n]
    };
    let dz: Vec<Complex64> = (0..n)
        .map(|i| {
            (1.0 - g) * (1.0 - p.c * p.mu * grid.xi_sq()[i]) * zh[i] - p.epsilon / (2.0 * g) * q[i]
        })
        .collect();
    let dv = vh
        .iter()
        .zip(&vr)
        .map(|(c, cr)| {
            let zv = if p.epsilon != 0.0 {
                model.product(&zr, cr)
            } else {
                vec![Complex64::new(0.0, 0.0); n]
            };
            (0..n)
                .map(|i| {
                    let k2 = grid.xi_sq()[i];
                    let s = sym.sigma[i];
                    (c[i] - p.epsilon * zv[i]) / g - p.a * p.mu / g * k2 * c[i]
                        + r.sqrt() / (g * g) * s * c[i]
                        + r / (g * g * g) * s * s * c[i]
                })
                .collect()
        })
        .collect();
    (dz, dv)
}

/// Relative mismatch of (1 - b mu Lap) zeta_t = -div dH/dv and
/// (1 - d mu Lap) v_t = -grad dH/dzeta, the maximum over the two equations.
pub fn variational_check(model: &Model, state: &FieldState) -> Result<f64> {
    let grid = model.grid();
    let sym = model.symbols();
    let (dz_dt, dv_dt) = rhs_primitive(model, state)?;
    let (hz, hv) = variational_derivatives(model, state);
    let n = grid.len();

    let lhs1: Vec<Complex64> = dz_dt.spectral().iter().zip(&sym.helmholtz_b).map(|(u, h)| u * h).collect();
    let mut rhs1 = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in hv.iter().enumerate() {
        for i in 0..n {
            rhs1[i] -= I * grid.xi_deriv(j)[i] * c[i];
        }
    }
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    for (j, dv) in dv_dt.iter().enumerate() {
        let s = dv.spectral();
        for i in 0..n {
            let lhs = s[i] * sym.helmholtz_d[i];
            let rhs = -I * grid.xi_deriv(j)[i] * hz[i];
            num2 += (lhs - rhs).norm_sqr();
            den2 += rhs.norm_sqr();
        }
    }
    let num1: f64 = lhs1.iter().zip(&rhs1).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den1: f64 = rhs1.iter().map(|b| b.norm_sqr()).sum();
    let rel = |num: f64, den: f64| if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(rel(num1, den1).max(rel(num2, den2)))
}

/// The bracket ||zeta||^2 + mu||grad zeta||^2 + ||v||^2 + 2 mu (1 - eps||zeta||^2)||grad v||^2
/// that bounds the Hamiltonian from below at small data.
pub fn positivity_form(model: &Model, state: &FieldState) -> f64 {
    let p = &model.params;
    let mu = p.mu;
    let z0 = x_norm_sq(&state.zeta, 0.0, 0, mu).unwrap();
    let z1 = x_norm_sq(&state.zeta, 0.0, 1, mu).unwrap() - z0;
    let v0 = x_norm_sq_vec(&state.v, 0.0, 0, mu).unwrap();
    let v1 = x_norm_sq_vec(&state.v, 0.0, 1, mu).unwrap() - v0;
    z0 + z1 + v0 + 2.0 * (1.0 - p.epsilon * z0) * v1
}

/// eps ||zeta||^2_{L^2}.
pub fn smallness(model: &Model, state: &FieldState) -> f64 {
    model.params.epsilon * state.zeta.l2_sq_spectral()
}

/// Scalar diagnostics of one snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub hamiltonian: f64,
    #[serde(rename = "E_s")]
    pub e_s: f64,
    #[serde(rename = "calE_s")]
    pub cal_e_s: f64,
    pub ratio: f64,
    pub x0_norm: f64,
    pub noncav: f64,
    pub smallness: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "t",
        "hamiltonian",
        "E_s",
        "calE_s",
        "ratio",
        "x0_norm",
        "noncav",
        "smallness",
    ];

    pub fn compute(model: &Model, state: &FieldState, s: f64) -> Result<Self> {
        Self::compute_with(model, state, s, model.case.variant)
    }

    /// As [`EnergyReport::compute`] with an explicit energy formulation.
    pub fn compute_with(model: &Model, state: &FieldState, s: f64, variant: Variant) -> Result<Self> {
        let e_s = energy_es_with(model, state, s, variant)?;
        let cal = cal_e(model, state, s)?;
        Ok(Self {
            t: state.t,
            hamiltonian: hamiltonian(model, state),
            e_s,
            cal_e_s: cal,
            ratio: if cal > 0.0 { e_s / cal } else { f64::NAN },
            x0_norm: x0_norm(state, model.params.mu),
            noncav: noncavitation_margin(&model.params, state).margin,
            smallness: smallness(model, state),
        })
    }

    /// Values formatted with 17 significant digits.
    pub fn csv_record(&self) -> Vec<String> {
        [
            self.t,
            self.hamiltonian,
            self.e_s,
            self.cal_e_s,
            self.ratio,
            self.x0_norm,
            self.noncav,
            self.smallness,
        ]
        .iter()
        .map(|x| fmt17(*x))
        .collect()
    }
}

/// Full-precision decimal formatting (17 significant digits).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::spectral::{Grid, GridSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn torus_model(p: ModelParams, n: usize) -> Arc<Model> {
        Model::new(p, Grid::new(GridSpec::square(n, 2.0 * PI).unwrap()).unwrap()).unwrap()
    }

    fn hparams() -> ModelParams {
        ModelParams::new(0.5, 0.05, 0.04, 1.0, -0.1, 0.2, -1.0 / 6.0, 0.2).unwrap()
    }

    #[test]
    fn x_norm_examples() {
        let g = Grid::new(GridSpec::square(16, 2.0 * PI).unwrap()).unwrap();
        let zero = SpectralField::zeros(&g);
        assert_eq!(x_norm_sq(&zero, 0.0, 1, 0.1).unwrap(), 0.0);
        let u = SpectralField::from_fn(&g, |x, _| x.cos());
        let two_pi_sq = 2.0 * PI * PI;
        assert!((x_norm_sq(&u, 0.0, 0, 0.3).unwrap() - two_pi_sq).abs() < 1e-12);
        assert!((x_norm_sq(&u, 0.0, 1, 0.04).unwrap() - two_pi_sq * 1.04).abs() < 1e-12);
        assert!(matches!(x_norm_sq(&u, -1.0, 1, 0.1), Err(BfdError::ParameterDomain { name: "s", .. })));
        assert!(matches!(x_norm_sq(&u, 0.0, -1, 0.1), Err(BfdError::ParameterDomain { name: "k", .. })));
    }

    #[test]
    fn hamiltonian_single_mode_zeta() {
        let m = torus_model(hparams(), 16);
        let g = m.grid();
        let s = FieldState::new(0.0, SpectralField::from_fn(g, |x, _| x.cos()), vec![SpectralField::zeros(g), SpectralField::zeros(g)]).unwrap();
        let p = &m.params;
        let want = 0.5 * (1.0 - p.gamma) * (1.0 + p.c.abs() * p.mu) * 2.0 * PI * PI;
        assert!((hamiltonian(&m, &s) - want).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_single_mode_velocity() {
        let p = ModelParams::new(0.7, 0.05, 0.04, 1.7, -0.2, 0.1, -0.1, 0.1).unwrap();
        let m = torus_model(p, 16);
        let g = m.grid();
        let s = FieldState::new(0.0, SpectralField::zeros(g), vec![SpectralField::from_fn(g, |x, _| x.cos()), SpectralField::zeros(g)]).unwrap();
        let sig1 = p.mu2.sqrt() / p.mu2.sqrt().tanh();
        let gm = p.gamma;
        let r = p.mu / p.mu2;
        let want = 0.5 * 2.0 * PI * PI * (1.0 / gm + p.a.abs() * p.mu / gm + r.sqrt() * sig1 / (gm * gm) + r * sig1 * sig1 / (gm * gm * gm));
        assert!((hamiltonian(&m, &s) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn zero_state_energies_vanish() {
        let m = torus_model(hparams(), 16);
        let s = FieldState::zeros(m.grid());
        assert_eq!(hamiltonian(&m, &s), 0.0);
        assert_eq!(energy_es(&m, &s, 2.0).unwrap(), 0.0);
        assert_eq!(equivalence_ratio(&m, &s, 0.0, Variant::BEqualD).unwrap(), None);
        assert_eq!(variational_check(&m, &s).unwrap(), 0.0);
    }

    #[test]
    fn linear_b_eq_d_energy_is_diagonal_symbol_sum() {
        let p = hparams().with_epsilon(0.0).unwrap();
        let m = torus_model(p, 16);
        let g = m.grid();
        let s = FieldState::new(
            0.0,
            SpectralField::from_fn(g, |x, y| (x + 2.0 * y).cos() + 0.3 * (3.0 * y).sin()),
            vec![
                SpectralField::from_fn(g, |x, y| (2.0 * x).sin() * y.cos()),
                SpectralField::from_fn(g, |x, _| 0.5 * x.cos()),
            ],
        )
        .unwrap();
        let sv = 1.5;
        let e = energy_es(&m, &s, sv).unwrap();
        let sym = m.symbols();
        let mut want = 0.0;
        let (zh, vh) = s.spectra();
        for i in 0..g.len() {
            let lam = (1.0 + g.xi_sq()[i]).powf(sv);
            let hb = sym.helmholtz_b[i];
            want += lam * hb * p.gamma * (1.0 - p.gamma) * sym.one_minus_cmu[i] * zh[i].norm_sqr();
            want += lam * hb * sym.a[i] * vh.iter().map(|c| c[i].norm_sqr()).sum::<f64>();
        }
        want *= g.parseval_factor();
        assert!((e - want).abs() < 1e-12 * want);
    }
}
