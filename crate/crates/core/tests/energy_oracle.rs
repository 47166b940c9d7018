//! E_s against dense operator matrices built from a naive DFT on an 8x8 torus.

use std::f64::consts::PI;
use std::sync::Arc;

use bfd_core::energy::energy_es_with;
use bfd_core::{FieldState, Grid, GridSpec, Model, ModelParams, SpectralField, Variant};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M = DMatrix<Complex64>;
type V = DVector<Complex64>;

const N: usize = 8;
const L: f64 = 2.0 * PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn wavenumber(i: usize) -> f64 {
    let k = if i < N / 2 { i as i64 } else { i as i64 - N as i64 };
    2.0 * PI * k as f64 / L
}

struct Dense {
    fwd: M,
    inv: M,
    keep: M,
    xi2: Vec<f64>,
}

impl Dense {
    fn new() -> Self {
        let n = N * N;
        let h = L / N as f64;
        let mut fwd = M::zeros(n, n);
        let mut xi2 = vec![0.0; n];
        let mut keep = M::zeros(n, n);
        for k in 0..n {
            let (k1, k2) = (wavenumber(k % N), wavenumber(k / N));
            xi2[k] = k1 * k1 + k2 * k2;
            let kept = [k % N, k / N].iter().all(|&m| {
                let mode = if m < N / 2 { m as i64 } else { m as i64 - N as i64 };
                3 * mode.unsigned_abs() as usize <= N
            });
            keep[(k, k)] = c(if kept { 1.0 } else { 0.0 });
            for j in 0..n {
                let (x, y) = ((j % N) as f64 * h, (j / N) as f64 * h);
                fwd[(k, j)] = Complex64::from_polar(1.0, -(k1 * x + k2 * y));
            }
        }
        let inv = fwd.adjoint() / c(n as f64);
        Dense { fwd, inv, keep, xi2 }
    }

    fn diag(&self, f: impl Fn(f64) -> f64) -> M {
        M::from_diagonal(&V::from_iterator(self.xi2.len(), self.xi2.iter().map(|&k| c(f(k)))))
    }

    /// Spectral matrix of u -> dealias(F(f * F^-1 u)).
    fn mul(&self, f: &[f64]) -> M {
        let d = M::from_diagonal(&V::from_iterator(f.len(), f.iter().map(|&x| c(x))));
        &self.keep * &self.fwd * d * &self.inv
    }
}

fn sigma(k: f64, mu2: f64) -> f64 {
    let s = (mu2 * k).sqrt();
    if s == 0.0 {
        1.0
    } else {
        s / s.tanh()
    }
}

fn oracle(p: &ModelParams, zeta: &[f64], v: &[Vec<f64>], s: f64, variant: Variant) -> f64 {
    let dn = Dense::new();
    let n = N * N;
    let (g, eps, mu) = (p.gamma, p.epsilon, p.mu);
    let gg = g * (1.0 - g);
    let r = mu / p.mu2;
    let a = dn.diag(|k2| {
        let sg = sigma(k2, p.mu2);
        1.0 - p.a * mu * k2 + r.sqrt() * sg / g + r * sg * sg / (g * g)
    });
    let cc = dn.diag(|k2| 1.0 - p.c * mu * k2);
    let hb = dn.diag(|k2| 1.0 + p.b * mu * k2);
    let hd = dn.diag(|k2| 1.0 + p.d * mu * k2);
    let gsym = dn.diag(|k2| (1.0 + p.b * mu * k2) / (1.0 + p.d * mu * k2));
    let lap = dn.diag(|k2| -k2);
    let id = M::identity(n, n);
    let bessel = dn.diag(|k2| (1.0 + k2).powf(s / 2.0));
    let mz = dn.mul(zeta);
    let mv: Vec<M> = v.iter().map(|x| dn.mul(x)).collect();

    let spec = |x: &[f64]| &dn.fwd * V::from_iterator(n, x.iter().map(|&t| c(t)));
    let u0 = &bessel * spec(zeta);
    let uv: Vec<V> = v.iter().map(|x| &bessel * spec(x)).collect();

    let (s0, sv, w): (V, Vec<V>, &M) = match variant {
        Variant::BEqualD => {
            let mut s0 = (&cc * c(gg)) * &u0;
            for j in 0..2 {
                s0 -= &mv[j] * &uv[j] * c(eps);
            }
            let sv = (0..2)
                .map(|j| &a * &uv[j] - (&mv[j] * &u0 + &mz * &uv[j]) * c(eps))
                .collect();
            (s0, sv, &hb)
        }
        Variant::BNotEqualD => {
            let mut s0 = (&gsym * &cc * &cc * c(gg * gg)) * &u0;
            for j in 0..2 {
                s0 -= &gsym * &mv[j] * &cc * &uv[j] * c(eps * gg);
            }
            let sv = (0..2)
                .map(|i| {
                    let mut out = &a * &cc * &uv[i] * c(gg)
                        - (&gsym * &mv[i] * &cc * &u0 + &mz * &cc * &uv[i]) * c(eps * gg);
                    for j in 0..2 {
                        out += &mv[i] * &mv[j] * (&gsym - &id) * &uv[j] * c(eps * eps);
                    }
                    out
                })
                .collect();
            (s0, sv, &hb)
        }
        Variant::BZero => {
            let mut s0 = (&cc * &cc * c(gg * gg)) * &u0;
            for j in 0..2 {
                s0 -= &mv[j] * &cc * &uv[j] * c(eps * gg);
            }
            let sv = (0..2)
                .map(|i| {
                    let mut out = &cc * (&a - &mz * c(eps)) * &hd * &uv[i] * c(gg)
                        - &mv[i] * &cc * &u0 * c(eps * gg);
                    for j in 0..2 {
                        out += &mv[i] * &mv[j] * &lap * &uv[j] * c(p.d * eps * eps * mu);
                    }
                    out
                })
                .collect();
            (s0, sv, &hd)
        }
    };
    let mut total = (w * &u0).dotc(&s0);
    for j in 0..2 {
        total += (w * &uv[j]).dotc(&sv[j]);
    }
    let cell = (L / N as f64).powi(2);
    total.re * cell / n as f64
}

fn random_fields(seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = || (0..N * N).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>();
    let z = f();
    let v = vec![f(), f()];
    (z, v)
}

fn check(p: ModelParams, variant: Variant, s: f64) {
    let grid: Arc<Grid> = Grid::new(GridSpec::square(N, L).unwrap()).unwrap();
    let model = Model::new(p, grid.clone()).unwrap();
    for seed in 0..3 {
        let (z, v) = random_fields(seed);
        let state = FieldState::new(
            0.0,
            SpectralField::from_real(&grid, z.clone()).unwrap(),
            v.iter().map(|x| SpectralField::from_real(&grid, x.clone()).unwrap()).collect(),
        )
        .unwrap();
        let got = energy_es_with(&model, &state, s, variant).unwrap();
        let want = oracle(&p, &z, &v, s, variant);
        let rel = (got - want).abs() / want.abs();
        assert!(rel < 1e-11, "{variant:?} s={s} seed={seed}: {got} vs {want} (rel {rel:e})");
    }
}

#[test]
fn b_equal_d_matches_dense_operators() {
    let p = ModelParams::new(0.6, 0.3, 0.2, 1.0, -0.1, 0.2, -1.0 / 6.0, 0.2).unwrap();
    check(p, Variant::BEqualD, 0.0);
    check(p, Variant::BEqualD, 1.5);
}

#[test]
fn b_equal_d_zero_matches_dense_operators() {
    let p = ModelParams::new(0.6, 0.3, 0.2, 1.0, -0.1, 0.0, -0.1, 0.0).unwrap();
    check(p, Variant::BEqualD, 0.0);
    check(p, Variant::BEqualD, 2.0);
}

#[test]
fn b_not_equal_d_matches_dense_operators() {
    let p = ModelParams::new(0.4, 0.3, 0.2, 1.5, -0.1, 0.3, -0.1, 0.1).unwrap();
    check(p, Variant::BNotEqualD, 0.0);
    check(p, Variant::BNotEqualD, 1.0);
}

#[test]
fn b_zero_matches_dense_operators() {
    let p = ModelParams::new(0.6, 0.3, 0.2, 0.8, -0.2, 0.0, -0.05, 0.25).unwrap();
    check(p, Variant::BZero, 0.0);
    check(p, Variant::BZero, 1.0);
}
