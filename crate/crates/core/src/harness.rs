//! Desk-scale studies: lifespan scaling, Hamiltonian conservation, the
//! smallness invariant of the Hamiltonian case and energy equivalence.
//!
//! Sweep points run in parallel on the current rayon pool; results are
//! collected in parameter order so every CSV is reproducible bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{
    case_norm, equivalence_ratio, fmt17, hamiltonian, positivity_form, smallness, x0_norm,
};
use crate::error::{BfdError, Result};
use crate::evolution::{default_dt, evolve, Control, Scheme, SchemeConfig, Termination};
use crate::init::{random_state, InitialData};
use crate::params::{ModelParams, Variant};
use crate::spectral::GridSpec;
use crate::system::{noncavitation_margin, FieldState, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Lifespan,
    Conservation,
    Smallness,
    Equivalence,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Lifespan => "lifespan",
            StudyKind::Conservation => "conservation",
            StudyKind::Smallness => "smallness",
            StudyKind::Equivalence => "equivalence",
        }
    }
}

/// How mu is chosen for each epsilon of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuChoice {
    /// mu = epsilon.
    Tied,
    /// Every listed mu is paired with every epsilon.
    List(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub kind: StudyKind,
    /// Base parameters; sweeps overwrite epsilon and mu.
    pub params: ModelParams,
    pub grid: GridSpec,
    pub scheme: Scheme,
    /// `None` picks [`default_dt`] per run.
    pub dt: Option<f64>,
    pub max_t: f64,
    pub cadence: usize,
    pub initial: InitialData,
    pub epsilons: Vec<f64>,
    pub mus: MuChoice,
    /// Sobolev index; defaults to 3 in 1D and 4 in 2D for lifespans, 0 for
    /// equivalence ratios.
    pub s: Option<f64>,
    pub growth_factor: f64,
    /// Time steps of a conservation study.
    pub dts: Vec<f64>,
    /// Random states per (epsilon, mu) in an equivalence study.
    pub samples: usize,
    pub seed: u64,
    /// Energy formulation override for equivalence studies.
    pub variant: Option<Variant>,
    /// Rescale smallness-study data so that eps ||zeta0||^2 equals this.
    pub smallness_target: Option<f64>,
}

impl StudyConfig {
    /// A configuration with the documented defaults for `kind`.
    pub fn new(kind: StudyKind, params: ModelParams, grid: GridSpec, initial: InitialData) -> Self {
        Self {
            kind,
            params,
            grid,
            scheme: if params.b == params.d {
                Scheme::ExponentialRk4
            } else {
                Scheme::ClassicalRk4
            },
            dt: None,
            max_t: 10.0,
            cadence: 1,
            initial,
            epsilons: vec![params.epsilon],
            mus: MuChoice::Tied,
            s: None,
            growth_factor: 2.0,
            dts: Vec::new(),
            samples: 100,
            seed: 0,
            variant: None,
            smallness_target: None,
        }
    }

    fn sweep_points(&self) -> Result<Vec<(f64, f64)>> {
        if self.epsilons.is_empty() {
            return Err(BfdError::Config("empty epsilon list".to_string()));
        }
        Ok(match &self.mus {
            MuChoice::Tied => self.epsilons.iter().map(|&e| (e, e)).collect(),
            MuChoice::List(mus) => {
                if mus.is_empty() {
                    return Err(BfdError::Config("empty mu list".to_string()));
                }
                self.epsilons
                    .iter()
                    .flat_map(|&e| mus.iter().map(move |&m| (e, m)))
                    .collect()
            }
        })
    }

    fn model_at(&self, eps: f64, mu: f64) -> Result<std::sync::Arc<Model>> {
        let p = self.params.with_epsilon(eps)?.with_mu(mu)?;
        Model::from_spec(p, self.grid.clone())
    }

    fn scheme_for(&self, model: &Model, state: &FieldState, dt: Option<f64>) -> Result<SchemeConfig> {
        let dt = dt.or(self.dt).unwrap_or_else(|| default_dt(model, state, self.scheme));
        SchemeConfig::new(self.scheme, dt, self.max_t)?.with_cadence(self.cadence)
    }

    fn lifespan_s(&self) -> f64 {
        self.s.unwrap_or(if self.grid.dim == 1 { 3.0 } else { 4.0 })
    }
}

fn check_descending(eps: &[f64]) -> Result<()> {
    if eps.windows(2).any(|w| w[1] > w[0]) {
        return Err(BfdError::Config("epsilon list must be descending".to_string()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifespanRecord {
    pub epsilon: f64,
    pub mu: f64,
    #[serde(rename = "T_obs")]
    pub t_obs: f64,
    pub product: f64,
    pub terminated_by: String,
}

/// For each sweep point, the first monitor time at which the case norm
/// exceeds `growth_factor` times its initial value.
pub fn lifespan_study(cfg: &StudyConfig) -> Result<Vec<LifespanRecord>> {
    check_descending(&cfg.epsilons)?;
    if !(cfg.growth_factor > 1.0) {
        return Err(BfdError::domain("growth_factor", "must exceed 1"));
    }
    let s = cfg.lifespan_s();
    cfg.sweep_points()?
        .into_par_iter()
        .map(|(eps, mu)| {
            let model = cfg.model_at(eps, mu)?;
            let state = cfg.initial.build(&model)?;
            let sc = cfg.scheme_for(&model, &state, None)?;
            let n0 = case_norm(&model, &state, s)?;
            let mut hit: Option<f64> = None;
            let mut mon = |m: &Model, st: &FieldState, _: usize| -> Result<Control> {
                if n0 > 0.0 && case_norm(m, st, s)? > cfg.growth_factor * n0 {
                    hit = Some(st.t);
                    return Ok(Control::Stop);
                }
                Ok(Control::Continue)
            };
            let out = evolve(&model, &state, &sc, &mut [&mut mon])?;
            let (t_obs, by) = match (out.termination, hit) {
                (Termination::Monitor, Some(t)) => (t, "threshold"),
                (Termination::BlowUp, _) => (out.state.t, "blow-up"),
                _ => (cfg.max_t, "max_t"),
            };
            Ok(LifespanRecord {
                epsilon: eps,
                mu,
                t_obs,
                product: eps * t_obs,
                terminated_by: by.to_string(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRecord {
    pub dt: f64,
    pub drift: f64,
    /// Least-squares slope of log drift against log dt over the whole table.
    pub order_fit: f64,
}

/// Maximum relative Hamiltonian drift per time step, b = d only.
pub fn conservation_study(cfg: &StudyConfig) -> Result<Vec<DriftRecord>> {
    let model = Model::from_spec(cfg.params, cfg.grid.clone())?;
    if !model.case.hamiltonian {
        return Err(BfdError::UnsupportedCase(format!(
            "Hamiltonian conservation needs b = d (b = {}, d = {})",
            cfg.params.b, cfg.params.d
        )));
    }
    let state = cfg.initial.build(&model)?;
    let dts = if cfg.dts.is_empty() {
        vec![cfg.dt.unwrap_or_else(|| default_dt(&model, &state, cfg.scheme))]
    } else {
        cfg.dts.clone()
    };
    let drifts: Vec<f64> = dts
        .par_iter()
        .map(|&dt| {
            let sc = cfg.scheme_for(&model, &state, Some(dt))?;
            hamiltonian_drift(&model, &state, &sc)
        })
        .collect::<Result<_>>()?;
    let order = order_fit(&dts, &drifts);
    Ok(dts
        .iter()
        .zip(&drifts)
        .map(|(&dt, &drift)| DriftRecord {
            dt,
            drift,
            order_fit: order,
        })
        .collect())
}

/// max_t |H(t) - H(0)| / |H(0)| over the monitor times (absolute if H(0) = 0).
pub fn hamiltonian_drift(model: &Model, state: &FieldState, sc: &SchemeConfig) -> Result<f64> {
    let h0 = hamiltonian(model, state);
    let scale = if h0 != 0.0 { h0.abs() } else { 1.0 };
    let mut worst = 0.0f64;
    let mut mon = |m: &Model, st: &FieldState, _: usize| -> Result<Control> {
        worst = worst.max((hamiltonian(m, st) - h0).abs() / scale);
        Ok(Control::Continue)
    };
    let out = evolve(model, state, sc, &mut [&mut mon])?;
    if out.termination == Termination::BlowUp {
        return Ok(f64::INFINITY);
    }
    Ok(worst)
}

/// Slope of the least-squares line through (log x, log y); NaN with fewer
/// than two usable points.
pub fn order_fit(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessRow {
    pub t: f64,
    pub smallness: f64,
    pub noncav: f64,
    pub hamiltonian: f64,
    pub x0_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub epsilon: f64,
    pub rows: Vec<SmallnessRow>,
    /// eps ||zeta0||^2 < 1/2 at t = 0.
    pub precondition_holds: bool,
    /// Some monitored time had eps ||zeta||^2 >= 1/2.
    pub invariant_failed: bool,
    /// max_t x0_norm(t) / x0_norm(0).
    pub max_norm_ratio: f64,
    /// min_t H / (positivity bracket), an empirical stand-in for c3.
    pub positivity_min: f64,
    pub terminated_by: String,
}

/// Long run in the Hamiltonian case with mu = eps, monitoring the
/// smallness invariant, non-cavitation, H and the X^0_mu norm.
pub fn smallness_check(cfg: &StudyConfig) -> Result<SmallnessReport> {
    let p = cfg.params;
    if !(p.b == p.d && p.b > 0.0 && p.a <= 0.0 && p.c < 0.0) {
        return Err(BfdError::UnsupportedCase(format!(
            "smallness check needs b = d > 0, a <= 0, c < 0 (got a = {}, b = {}, c = {}, d = {})",
            p.a, p.b, p.c, p.d
        )));
    }
    let eps = p.epsilon;
    let model = cfg.model_at(eps, eps)?;
    let mut state = cfg.initial.build(&model)?;
    if let Some(target) = cfg.smallness_target {
        let cur = smallness(&model, &state);
        if cur > 0.0 {
            let f = (target / cur).sqrt();
            state = scale_state(&state, f)?;
        }
    }
    let sc = cfg.scheme_for(&model, &state, None)?;
    let mut rows = Vec::new();
    let mut positivity_min = f64::INFINITY;
    let mut mon = |m: &Model, st: &FieldState, _: usize| -> Result<Control> {
        let h = hamiltonian(m, st);
        let form = positivity_form(m, st);
        if form > 0.0 {
            positivity_min = positivity_min.min(h / form);
        }
        rows.push(SmallnessRow {
            t: st.t,
            smallness: smallness(m, st),
            noncav: noncavitation_margin(&m.params, st).margin,
            hamiltonian: h,
            x0_norm: x0_norm(st, m.params.mu),
        });
        Ok(Control::Continue)
    };
    let out = evolve(&model, &state, &sc, &mut [&mut mon])?;
    let first = rows.first().cloned().expect("initial observation");
    let max_norm_ratio = if first.x0_norm > 0.0 {
        rows.iter().map(|r| r.x0_norm).fold(0.0, f64::max) / first.x0_norm
    } else {
        1.0
    };
    Ok(SmallnessReport {
        epsilon: eps,
        precondition_holds: first.smallness < 0.5,
        invariant_failed: rows.iter().any(|r| !(r.smallness < 0.5)),
        max_norm_ratio,
        positivity_min,
        terminated_by: out.termination.as_str().to_string(),
        rows,
    })
}

fn scale_state(state: &FieldState, f: f64) -> Result<FieldState> {
    FieldState::new(
        state.t,
        state.zeta.scaled(f),
        state.v.iter().map(|c| c.scaled(f)).collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRecord {
    pub epsilon: f64,
    pub mu: f64,
    pub case: u8,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Min and max of E_s / calE_s over `samples` random band-limited states
/// per sweep point. Sample j uses the same seed at every sweep point.
pub fn equivalence_study(cfg: &StudyConfig) -> Result<Vec<EquivalenceRecord>> {
    check_descending(&cfg.epsilons)?;
    let s = cfg.s.unwrap_or(0.0);
    let amplitude = cfg.initial.amplitude;
    let mut seeder = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds: Vec<u64> = (0..cfg.samples).map(|_| seeder.gen()).collect();
    let decay = 2.0;
    cfg.sweep_points()?
        .into_par_iter()
        .map(|(eps, mu)| {
            let model = cfg.model_at(eps, mu)?;
            let variant = cfg.variant.unwrap_or(model.case.variant);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &seed in &seeds {
                let st = random_state(&model, seed, decay, amplitude)?;
                if let Some(r) = equivalence_ratio(&model, &st, s, variant)? {
                    lo = lo.min(r.ratio);
                    hi = hi.max(r.ratio);
                }
            }
            Ok(EquivalenceRecord {
                epsilon: eps,
                mu,
                case: model.case.case_id,
                ratio_min: lo,
                ratio_max: hi,
            })
        })
        .collect()
}

/// Writes rows as CSV with full-precision floats.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn lifespan_rows(recs: &[LifespanRecord]) -> Vec<Vec<String>> {
    recs.iter()
        .map(|r| {
            vec![
                fmt17(r.epsilon),
                fmt17(r.mu),
                fmt17(r.t_obs),
                fmt17(r.product),
                r.terminated_by.clone(),
            ]
        })
        .collect()
}

pub fn drift_rows(recs: &[DriftRecord]) -> Vec<Vec<String>> {
    recs.iter()
        .map(|r| vec![fmt17(r.dt), fmt17(r.drift), fmt17(r.order_fit)])
        .collect()
}

pub fn smallness_rows(rep: &SmallnessReport) -> Vec<Vec<String>> {
    rep.rows
        .iter()
        .map(|r| {
            vec![
                fmt17(r.t),
                fmt17(r.smallness),
                fmt17(r.noncav),
                fmt17(r.hamiltonian),
                fmt17(r.x0_norm),
            ]
        })
        .collect()
}

pub fn equivalence_rows(recs: &[EquivalenceRecord]) -> Vec<Vec<String>> {
    recs.iter()
        .map(|r| {
            vec![
                fmt17(r.epsilon),
                fmt17(r.mu),
                r.case.to_string(),
                fmt17(r.ratio_min),
                fmt17(r.ratio_max),
            ]
        })
        .collect()
}

pub const LIFESPAN_HEADER: [&str; 5] = ["epsilon", "mu", "T_obs", "product", "terminated_by"];
pub const CONSERVATION_HEADER: [&str; 3] = ["dt", "drift", "order_fit"];
pub const SMALLNESS_HEADER: [&str; 5] = ["t", "smallness", "noncav", "hamiltonian", "x0_norm"];
pub const EQUIVALENCE_HEADER: [&str; 5] = ["epsilon", "mu", "case", "ratio_min", "ratio_max"];

/// Runs the study selected by `cfg.kind`, writes `<kind>.csv` and
/// `manifest.json` into `dir`, and returns the CSV path.
pub fn run_study(cfg: &StudyConfig, dir: &Path, extra: serde_json::Value) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", cfg.kind.as_str()));
    let mut summary = serde_json::Value::Null;
    match cfg.kind {
        StudyKind::Lifespan => {
            let r = lifespan_study(cfg)?;
            write_csv(&csv_path, &LIFESPAN_HEADER, &lifespan_rows(&r))?;
        }
        StudyKind::Conservation => {
            let r = conservation_study(cfg)?;
            write_csv(&csv_path, &CONSERVATION_HEADER, &drift_rows(&r))?;
        }
        StudyKind::Smallness => {
            let r = smallness_check(cfg)?;
            write_csv(&csv_path, &SMALLNESS_HEADER, &smallness_rows(&r))?;
            summary = serde_json::json!({
                "precondition_holds": r.precondition_holds,
                "invariant_failed": r.invariant_failed,
                "max_norm_ratio": r.max_norm_ratio,
                "positivity_min": r.positivity_min,
                "terminated_by": r.terminated_by,
            });
        }
        StudyKind::Equivalence => {
            let r = equivalence_study(cfg)?;
            write_csv(&csv_path, &EQUIVALENCE_HEADER, &equivalence_rows(&r))?;
        }
    }
    let name = csv_path.file_name().unwrap().to_string_lossy().into_owned();
    write_manifest(dir, cfg, &[name], summary, extra)?;
    Ok(csv_path)
}

/// `manifest.json`: library version, full configuration and outputs.
pub fn write_manifest(
    dir: &Path,
    cfg: &impl Serialize,
    outputs: &[String],
    summary: serde_json::Value,
    extra: serde_json::Value,
) -> Result<()> {
    let m = serde_json::json!({
        "library": "bfd-core",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "outputs": outputs,
        "summary": summary,
        "input": extra,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}
