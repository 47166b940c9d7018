//! Time stepping: integrating-factor RK4 on the diagonal variables
//! (W, Z+, Z-) of the b = d system, and classical RK4 on the primitive
//! system for every case.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::x0_norm;
use crate::error::{BfdError, Result};
use crate::system::{rhs_spectral, FieldState, Model};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// X^0_mu norm above which a run is declared blown up.
pub const BLOW_UP_NORM: f64 = 1e6;

/// Diagonal variables of the b = d system.
///
/// `w`, `zp`, `zm` are full spectra that vanish at xi = 0 and on passive
/// modes (nonzero modes whose derivative wavenumber is zero, i.e. Nyquist
/// rows). `zero_mode` holds the means of (zeta, v), `passive` the untouched
/// primitive coefficients of passive modes.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagState {
    pub t: f64,
    /// Empty in 1D.
    pub w: Vec<Complex64>,
    pub zp: Vec<Complex64>,
    pub zm: Vec<Complex64>,
    pub zero_mode: Vec<f64>,
    pub passive: Vec<(usize, Vec<Complex64>)>,
}

fn require_b_eq_d(model: &Model) -> Result<()> {
    if model.params.b != model.params.d {
        return Err(BfdError::UnsupportedCase(format!(
            "diagonal variables need b = d (b = {}, d = {})",
            model.params.b, model.params.d
        )));
    }
    Ok(())
}

pub fn diagonalize(model: &Model, state: &FieldState) -> Result<DiagState> {
    require_b_eq_d(model)?;
    let (zh, vh) = state.spectra();
    Ok(diagonalize_spectra(model, state.t, &zh, &vh))
}

fn diagonalize_spectra(model: &Model, t: f64, zh: &[Complex64], vh: &[Vec<Complex64>]) -> DiagState {
    let grid = model.grid();
    let sym = model.symbols();
    let n = grid.len();
    let dim = vh.len();
    let mut w = if dim == 2 { vec![ZERO; n] } else { Vec::new() };
    let mut zp = vec![ZERO; n];
    let mut zm = vec![ZERO; n];
    let mut passive = Vec::new();
    let inv_n = 1.0 / n as f64;
    let zero_mode = std::iter::once(zh[0].re * inv_n)
        .chain(vh.iter().map(|c| c[0].re * inv_n))
        .collect();
    for i in 1..n {
        let kn = grid.xi_deriv_norm(i);
        if kn == 0.0 {
            let vals = std::iter::once(zh[i]).chain(vh.iter().map(|c| c[i])).collect();
            passive.push((i, vals));
            continue;
        }
        let mut div = ZERO;
        for (j, c) in vh.iter().enumerate() {
            div += grid.xi_deriv(j)[i] * c[i];
        }
        let d = div / kn;
        let r = sym.ratio_sqrt[i];
        zp[i] = zh[i] + r * d;
        zm[i] = zh[i] - r * d;
        if dim == 2 {
            let (k1, k2) = (grid.xi_deriv(0)[i], grid.xi_deriv(1)[i]);
            w[i] = (I * k1 * vh[1][i] - I * k2 * vh[0][i]) / kn;
        }
    }
    DiagState {
        t,
        w,
        zp,
        zm,
        zero_mode,
        passive,
    }
}

/// Primitive spectra from diagonal variables.
fn undiagonalize_spectra(model: &Model, diag: &DiagState) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let grid = model.grid();
    let sym = model.symbols();
    let n = grid.len();
    let dim = grid.dim();
    let mut zh = vec![ZERO; n];
    let mut vh = vec![vec![ZERO; n]; dim];
    for i in 1..n {
        let kn = grid.xi_deriv_norm(i);
        if kn == 0.0 {
            continue;
        }
        zh[i] = 0.5 * (diag.zp[i] + diag.zm[i]);
        let d = (diag.zp[i] - diag.zm[i]) / (2.0 * sym.ratio_sqrt[i]);
        let (k1, k2) = (grid.xi_deriv(0)[i], grid.xi_deriv(1)[i]);
        vh[0][i] = k1 / kn * d;
        if dim == 2 {
            vh[1][i] = k2 / kn * d;
            // - i xi_perp / |xi| W with xi_perp = (-xi2, xi1)
            vh[0][i] += I * k2 / kn * diag.w[i];
            vh[1][i] -= I * k1 / kn * diag.w[i];
        }
    }
    let nf = n as f64;
    zh[0] = Complex64::new(diag.zero_mode[0] * nf, 0.0);
    for (j, c) in vh.iter_mut().enumerate() {
        c[0] = Complex64::new(diag.zero_mode[j + 1] * nf, 0.0);
    }
    for (i, vals) in &diag.passive {
        zh[*i] = vals[0];
        for (j, c) in vh.iter_mut().enumerate() {
            c[*i] = vals[j + 1];
        }
    }
    (zh, vh)
}

pub fn undiagonalize(model: &Model, diag: &DiagState) -> Result<FieldState> {
    let (zh, vh) = undiagonalize_spectra(model, diag);
    FieldState::from_spectra(model.grid(), diag.t, zh, vh)
}

/// Spectra of the nonlinear forcing (f+, f-) of the diagonal system.
pub fn nonlinear_f_pm(model: &Model, diag: &DiagState) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    require_b_eq_d(model)?;
    Ok(forcing(model, diag))
}

fn forcing(model: &Model, diag: &DiagState) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = model.grid();
    let n = grid.len();
    let p = &model.params;
    if p.epsilon == 0.0 {
        return (vec![ZERO; n], vec![ZERO; n]);
    }
    let sym = model.symbols();
    let (zh, vh) = undiagonalize_spectra(model, diag);
    let zr = grid.inverse(&zh);
    let vr: Vec<Vec<f64>> = vh.iter().map(|c| grid.inverse(c)).collect();
    let flux: Vec<Vec<Complex64>> = vr.iter().map(|c| model.product(&zr, c)).collect();
    let q = model.speed_sq(&vr);
    let mut fp = vec![ZERO; n];
    let mut fm = vec![ZERO; n];
    let eps = p.epsilon;
    let g = p.gamma;
    for i in 1..n {
        let kn = grid.xi_deriv_norm(i);
        if kn == 0.0 {
            continue;
        }
        let hb = sym.helmholtz_b[i];
        let mut div = ZERO;
        for (j, f) in flux.iter().enumerate() {
            div += I * grid.xi_deriv(j)[i] * f[i];
        }
        let a = eps / (g * hb) * div;
        let b = sym.ratio_sqrt[i] * I * eps * kn / (2.0 * g * hb) * q[i];
        fp[i] = a + b;
        fm[i] = a - b;
    }
    (fp, fm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Integrating-factor RK4 on the diagonal variables (b = d only).
    ExponentialRk4,
    /// RK4 on the Helmholtz-inverted primitive system.
    ClassicalRk4,
}

impl std::str::FromStr for Scheme {
    type Err = BfdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential_rk4" | "exponential" => Ok(Scheme::ExponentialRk4),
            "classical_rk4" | "classical" => Ok(Scheme::ClassicalRk4),
            other => Err(BfdError::Config(format!(
                "unknown scheme `{other}` (expected exponential_rk4 or classical_rk4)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub dealias: bool,
    pub max_t: f64,
    /// Monitors run every `cadence` steps.
    pub cadence: usize,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, dt: f64, max_t: f64) -> Result<Self> {
        let cfg = Self {
            scheme,
            dt,
            dealias: true,
            max_t,
            cadence: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_cadence(mut self, cadence: usize) -> Result<Self> {
        self.cadence = cadence;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(BfdError::domain("dt", format!("{} not > 0", self.dt)));
        }
        if !(self.max_t >= 0.0) || !self.max_t.is_finite() {
            return Err(BfdError::domain("max_t", format!("{} not >= 0", self.max_t)));
        }
        if self.cadence == 0 {
            return Err(BfdError::domain("cadence", "must be >= 1 step"));
        }
        Ok(())
    }

    fn check_case(&self, model: &Model) -> Result<()> {
        if self.scheme == Scheme::ExponentialRk4 {
            require_b_eq_d(model)?;
        }
        Ok(())
    }
}

/// 0.9 dx / (eps max|v| / gamma + 1), and for classical RK4 also at most
/// 2.8 / Omega_max.
pub fn default_dt(model: &Model, state: &FieldState, scheme: Scheme) -> f64 {
    let p = &model.params;
    let n = model.grid().len();
    let mut speed = vec![0.0; n];
    for c in &state.v {
        for (s, x) in speed.iter_mut().zip(c.real().iter()) {
            *s += x * x;
        }
    }
    let vmax = speed.iter().fold(0.0f64, |m, x| m.max(*x)).sqrt();
    let dx = model.grid().spec().min_spacing();
    let mut dt = 0.9 * dx / (p.epsilon * vmax / p.gamma + 1.0);
    if scheme == Scheme::ClassicalRk4 {
        let wmax = model.symbols().max_frequency();
        if wmax > 0.0 {
            dt = dt.min(2.8 / wmax);
        }
    }
    dt
}

/// One record of the event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub event: String,
    pub t: f64,
    pub norm: f64,
}

impl Event {
    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain record")
    }
}

/// What a monitor asks of the driver after an observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Observer invoked at step 0, every `cadence` steps and at the end.
pub trait Monitor {
    fn observe(&mut self, model: &Model, state: &FieldState, step: usize) -> Result<Control>;

    fn event(&mut self, _event: &Event) -> Result<()> {
        Ok(())
    }
}

impl<F> Monitor for F
where
    F: FnMut(&Model, &FieldState, usize) -> Result<Control>,
{
    fn observe(&mut self, model: &Model, state: &FieldState, step: usize) -> Result<Control> {
        self(model, state, step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxT,
    BlowUp,
    /// A monitor asked to stop.
    Monitor,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxT => "max_t",
            Termination::BlowUp => "blow-up",
            Termination::Monitor => "threshold",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: FieldState,
    pub steps: usize,
    pub events: Vec<Event>,
    pub termination: Termination,
}

/// Integrator state for one scheme.
enum Stepper {
    Exp {
        diag: DiagState,
        omega: Vec<f64>,
        half: (f64, Vec<Complex64>),
    },
    Classical {
        zh: Vec<Complex64>,
        vh: Vec<Vec<Complex64>>,
    },
}

fn half_factors(omega: &[f64], dt: f64) -> Vec<Complex64> {
    omega
        .iter()
        .map(|w| Complex64::from_polar(1.0, -w * dt / 2.0))
        .collect()
}

impl Stepper {
    fn new(model: &Model, state: &FieldState, scheme: Scheme) -> Self {
        let (zh, vh) = state.spectra();
        match scheme {
            Scheme::ExponentialRk4 => {
                let omega = model.symbols().frequency.clone();
                Stepper::Exp {
                    diag: diagonalize_spectra(model, state.t, &zh, &vh),
                    omega,
                    half: (f64::NAN, Vec::new()),
                }
            }
            Scheme::ClassicalRk4 => Stepper::Classical { zh, vh },
        }
    }

    fn step(&mut self, model: &Model, dt: f64) {
        match self {
            Stepper::Exp { diag, omega, half } => {
                if half.0 != dt {
                    *half = (dt, half_factors(omega, dt));
                }
                if_rk4_step(model, diag, &half.1, dt);
            }
            Stepper::Classical { zh, vh } => rk4_step(model, zh, vh, dt),
        }
    }

    fn spectra(&self, model: &Model) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
        match self {
            Stepper::Exp { diag, .. } => undiagonalize_spectra(model, diag),
            Stepper::Classical { zh, vh } => (zh.clone(), vh.clone()),
        }
    }

    fn finite(&self) -> bool {
        let ok = |s: &[Complex64]| s.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        match self {
            Stepper::Exp { diag, .. } => ok(&diag.zp) && ok(&diag.zm),
            Stepper::Classical { zh, vh } => ok(zh) && vh.iter().all(|c| ok(c)),
        }
    }

    fn set_time(&mut self, t: f64) {
        if let Stepper::Exp { diag, .. } = self {
            diag.t = t;
        }
    }
}

/// e^{L dt/2} for Z+ is `e`, for Z- its conjugate.
fn if_rk4_step(model: &Model, u: &mut DiagState, e: &[Complex64], dt: f64) {
    if model.params.epsilon == 0.0 {
        for i in 0..e.len() {
            let e2 = e[i] * e[i];
            u.zp[i] *= e2;
            u.zm[i] *= e2.conj();
        }
        return;
    }
    let n = e.len();
    let ep: Vec<Complex64> = e.to_vec();
    let em: Vec<Complex64> = e.iter().map(|z| z.conj()).collect();
    let with = |zp: Vec<Complex64>, zm: Vec<Complex64>| DiagState {
        t: u.t,
        w: u.w.clone(),
        zp,
        zm,
        zero_mode: u.zero_mode.clone(),
        passive: u.passive.clone(),
    };
    let stage = |f: &dyn Fn(usize, &[Complex64], &[Complex64], &[Complex64]) -> Complex64,
                 kp: &[Complex64],
                 km: &[Complex64]| {
        let zp: Vec<Complex64> = (0..n).map(|i| f(i, &u.zp, kp, &ep)).collect();
        let zm: Vec<Complex64> = (0..n).map(|i| f(i, &u.zm, km, &em)).collect();
        (zp, zm)
    };
    let (ap, am) = forcing(model, u);
    let h = dt / 2.0;
    let (zp, zm) = stage(&|i, z, k, e| e[i] * (z[i] + h * k[i]), &ap, &am);
    let (bp, bm) = forcing(model, &with(zp, zm));
    let (zp, zm) = stage(&|i, z, k, e| e[i] * z[i] + h * k[i], &bp, &bm);
    let (cp, cm) = forcing(model, &with(zp, zm));
    let (zp, zm) = stage(&|i, z, k, e| e[i] * e[i] * z[i] + dt * e[i] * k[i], &cp, &cm);
    let (dp, dm) = forcing(model, &with(zp, zm));
    let c6 = dt / 6.0;
    let fin = |z: &mut [Complex64], e: &[Complex64], a: &[Complex64], b: &[Complex64], c: &[Complex64], d: &[Complex64]| {
        for i in 0..n {
            let e2 = e[i] * e[i];
            z[i] = e2 * z[i] + c6 * (e2 * a[i] + 2.0 * e[i] * (b[i] + c[i]) + d[i]);
        }
    };
    fin(&mut u.zp, &ep, &ap, &bp, &cp, &dp);
    fin(&mut u.zm, &em, &am, &bm, &cm, &dm);
}

fn rk4_step(model: &Model, zh: &mut [Complex64], vh: &mut [Vec<Complex64>], dt: f64) {
    let comb = |base_z: &[Complex64], base_v: &[Vec<Complex64>], kz: &[Complex64], kv: &[Vec<Complex64>], h: f64| {
        let z: Vec<Complex64> = base_z.iter().zip(kz).map(|(a, b)| a + h * b).collect();
        let v: Vec<Vec<Complex64>> = base_v
            .iter()
            .zip(kv)
            .map(|(c, k)| c.iter().zip(k).map(|(a, b)| a + h * b).collect())
            .collect();
        (z, v)
    };
    let k1 = rhs_spectral(model, zh, vh);
    let (z, v) = comb(zh, vh, &k1.zeta, &k1.v, dt / 2.0);
    let k2 = rhs_spectral(model, &z, &v);
    let (z, v) = comb(zh, vh, &k2.zeta, &k2.v, dt / 2.0);
    let k3 = rhs_spectral(model, &z, &v);
    let (z, v) = comb(zh, vh, &k3.zeta, &k3.v, dt);
    let k4 = rhs_spectral(model, &z, &v);
    let c = dt / 6.0;
    for i in 0..zh.len() {
        zh[i] += c * (k1.zeta[i] + 2.0 * (k2.zeta[i] + k3.zeta[i]) + k4.zeta[i]);
    }
    for (j, comp) in vh.iter_mut().enumerate() {
        for i in 0..comp.len() {
            comp[i] += c * (k1.v[j][i] + 2.0 * (k2.v[j][i] + k3.v[j][i]) + k4.v[j][i]);
        }
    }
}

/// One step of size `cfg.dt` from `state`.
pub fn step(model: &Model, state: &FieldState, cfg: &SchemeConfig) -> Result<FieldState> {
    cfg.validate()?;
    cfg.check_case(model)?;
    let model = dealias_view(model, cfg);
    let mut s = Stepper::new(&model, state, cfg.scheme);
    s.step(&model, cfg.dt);
    let t = state.t + cfg.dt;
    s.set_time(t);
    let (zh, vh) = s.spectra(&model);
    let out = FieldState::from_spectra(model.grid(), t, zh, vh)?;
    if !s.finite() {
        return Err(BfdError::BlowUp { t, norm: f64::NAN });
    }
    Ok(out)
}

/// One integrating-factor RK4 step carried out on the diagonal variables.
/// W, the means and the passive modes are copied through unchanged.
pub fn step_diag(model: &Model, diag: &DiagState, cfg: &SchemeConfig) -> Result<DiagState> {
    cfg.validate()?;
    require_b_eq_d(model)?;
    let model = dealias_view(model, cfg);
    let e = half_factors(&model.symbols().frequency, cfg.dt);
    let mut out = diag.clone();
    if_rk4_step(&model, &mut out, &e, cfg.dt);
    out.t = diag.t + cfg.dt;
    Ok(out)
}

fn dealias_view(model: &Model, cfg: &SchemeConfig) -> Arc<Model> {
    if cfg.dealias {
        Arc::new(model.clone())
    } else {
        model.without_dealiasing()
    }
}

/// Advances `state` to `cfg.max_t` (the last step is shortened to land on
/// it) or until blow-up or a monitor stops the run. Blow-up is reported as
/// a termination with an event, not as an error.
pub fn evolve(
    model: &Model,
    state: &FieldState,
    cfg: &SchemeConfig,
    monitors: &mut [&mut dyn Monitor],
) -> Result<Trajectory> {
    cfg.validate()?;
    cfg.check_case(model)?;
    if !state.grid().same_as(model.grid()) {
        return Err(BfdError::GridMismatch("state grid differs from model grid".to_string()));
    }
    let model = dealias_view(model, cfg);
    let t0 = state.t;
    let t_end = t0 + cfg.max_t;
    let ratio = cfg.max_t / cfg.dt;
    let full = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    let total = if full as f64 * cfg.dt < cfg.max_t * (1.0 - 1e-12) { full + 1 } else { full };

    let mut stepper = Stepper::new(&model, state, cfg.scheme);
    let mut events = Vec::new();
    let mut current = state.clone();
    let mu = model.params.mu;

    let observe = |st: &FieldState, k: usize, mons: &mut [&mut dyn Monitor]| -> Result<bool> {
        let mut stop = false;
        for m in mons.iter_mut() {
            if m.observe(&model, st, k)? == Control::Stop {
                stop = true;
            }
        }
        Ok(stop)
    };

    if observe(&current, 0, monitors)? {
        return Ok(Trajectory {
            state: current,
            steps: 0,
            events,
            termination: Termination::Monitor,
        });
    }
    let mut termination = Termination::MaxT;
    let mut steps = 0;
    for k in 1..=total {
        let (h, t) = if k < total || total == full {
            (cfg.dt, if k == total { t_end } else { t0 + k as f64 * cfg.dt })
        } else {
            (t_end - (t0 + full as f64 * cfg.dt), t_end)
        };
        stepper.step(&model, h);
        stepper.set_time(t);
        steps = k;
        let (zh, vh) = stepper.spectra(&model);
        current = FieldState::from_spectra(model.grid(), t, zh, vh)?;
        let norm = if stepper.finite() { x0_norm(&current, mu) } else { f64::NAN };
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            let ev = Event {
                event: "blow-up".to_string(),
                t,
                norm,
            };
            for m in monitors.iter_mut() {
                m.event(&ev)?;
            }
            events.push(ev);
            termination = Termination::BlowUp;
            break;
        }
        if (k % cfg.cadence == 0 || k == total) && observe(&current, k, monitors)? {
            termination = Termination::Monitor;
            break;
        }
    }
    Ok(Trajectory {
        state: current,
        steps,
        events,
        termination,
    })
}
