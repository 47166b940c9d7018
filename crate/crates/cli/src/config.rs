//! Run configuration: a TOML file with `[model]`, `[grid]`, `[scheme]`,
//! `[initial]`, `[output]` and `[study]` sections.

use std::path::{Path, PathBuf};

use bfd_core::evolution::Scheme;
use bfd_core::harness::{MuChoice, StudyConfig, StudyKind};
use bfd_core::init::{InitialData, Profile, Velocity};
use bfd_core::{classify_case, params_from_alphas, BfdError, CaseClass, GridSpec, ModelParams, Result, Variant};
use serde::{Deserialize, Serialize};

/// Every accepted key with a one-line description, in file order. `--help`
/// prints this table.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("model", "gamma", "density ratio in (0, 1)"),
    ("model", "epsilon", "amplitude parameter, >= 0"),
    ("model", "mu", "shallowness parameter in (0, 1)"),
    ("model", "mu2", "lower-layer dispersion parameter, > 0 (default 1)"),
    ("model", "a", "coefficient a <= 0 (with b, c, d)"),
    ("model", "b", "coefficient b >= 0"),
    ("model", "c", "coefficient c <= 0"),
    ("model", "d", "coefficient d >= 0"),
    ("model", "alpha1", "alpha1 >= 0 (with beta, alpha2; excludes a, b, c, d)"),
    ("model", "beta", "beta >= 0"),
    ("model", "alpha2", "alpha2 <= 1"),
    ("model", "case_override", "energy formulation: b_eq_d, b_neq_d or b_zero"),
    ("grid", "dim", "1 or 2"),
    ("grid", "n", "points per axis, even"),
    ("grid", "length", "period per axis, > 0"),
    ("scheme", "scheme", "exponential_rk4 (b = d only) or classical_rk4"),
    ("scheme", "dt", "time step (default: stability-based)"),
    ("scheme", "max_t", "final time (default 10)"),
    ("scheme", "cadence", "steps between diagnostics (default 1)"),
    ("scheme", "dealias", "2/3 truncation of products (default true)"),
    ("initial", "profile", "gaussian, mode, random_bandlimited or snapshot"),
    ("initial", "amplitude", "profile amplitude (default 1)"),
    ("initial", "velocity", "right_mover or rest (default right_mover)"),
    ("initial", "width", "gaussian width"),
    ("initial", "center", "gaussian centre [x, y] (default domain centre)"),
    ("initial", "k", "mode numbers [k1, k2]"),
    ("initial", "seed", "random_bandlimited seed (default 0)"),
    ("initial", "decay", "random_bandlimited spectral decay (default 2)"),
    ("initial", "path", "BFDv1 snapshot to start from"),
    ("output", "directory", "output directory (default bfd-out)"),
    ("output", "snapshots", "write BFDv1 snapshots at each diagnostic (default true)"),
    ("study", "epsilons", "epsilon sweep, descending for lifespan (default [epsilon])"),
    ("study", "mus", "\"tied\" (mu = epsilon) or a list of mu values (default tied)"),
    ("study", "s", "Sobolev index of energies and lifespan norms"),
    ("study", "growth_factor", "lifespan threshold on norm growth (default 2)"),
    ("study", "dts", "time steps of a conservation study"),
    ("study", "samples", "random states per equivalence point (default 100)"),
    ("study", "seed", "equivalence sampling seed (default 0)"),
    ("study", "smallness_target", "rescale data so that eps ||zeta0||^2 equals this"),
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    grid: RawGrid,
    #[serde(default)]
    scheme: RawScheme,
    #[serde(default)]
    initial: Option<RawInitial>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    study: RawStudy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    gamma: f64,
    epsilon: f64,
    mu: f64,
    mu2: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    alpha1: Option<f64>,
    beta: Option<f64>,
    alpha2: Option<f64>,
    case_override: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dim: usize,
    n: usize,
    length: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    scheme: Option<String>,
    dt: Option<f64>,
    max_t: Option<f64>,
    cadence: Option<usize>,
    dealias: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    profile: String,
    amplitude: Option<f64>,
    velocity: Option<Velocity>,
    width: Option<f64>,
    center: Option<[f64; 2]>,
    k: Option<[i64; 2]>,
    seed: Option<u64>,
    decay: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    snapshots: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawMus {
    Named(String),
    List(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    epsilons: Option<Vec<f64>>,
    mus: Option<RawMus>,
    s: Option<f64>,
    growth_factor: Option<f64>,
    dts: Option<Vec<f64>>,
    samples: Option<usize>,
    seed: Option<u64>,
    smallness_target: Option<f64>,
}

/// Where the initial state comes from.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Profile(InitialData),
    Snapshot(PathBuf),
}

/// A validated configuration with every default filled in.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    pub case: CaseClass,
    pub case_override: Option<Variant>,
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub dt: Option<f64>,
    pub max_t: f64,
    pub cadence: usize,
    pub dealias: bool,
    pub start: Start,
    pub directory: PathBuf,
    pub snapshots: bool,
    pub epsilons: Vec<f64>,
    pub mus: MuChoice,
    pub s: Option<f64>,
    pub growth_factor: f64,
    pub dts: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub smallness_target: Option<f64>,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| BfdError::Config(one_line(&e.to_string())))?;
    resolve(raw)
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let m = raw.model;
    let mu2 = m.mu2.unwrap_or(1.0);
    let abcd = [m.a, m.b, m.c, m.d];
    let alphas = [m.alpha1, m.beta, m.alpha2];
    let any_abcd = abcd.iter().any(Option::is_some);
    let any_alphas = alphas.iter().any(Option::is_some);
    let params = match (any_abcd, any_alphas) {
        (true, true) => {
            return Err(BfdError::Config(
                "model: a, b, c, d and alpha1, beta, alpha2 are mutually exclusive".to_string(),
            ))
        }
        (false, false) => {
            return Err(BfdError::Config(
                "model: give either a, b, c, d or alpha1, beta, alpha2".to_string(),
            ))
        }
        (true, false) => {
            let [a, b, c, d] = complete(abcd, ["a", "b", "c", "d"])?;
            ModelParams::new(m.gamma, m.epsilon, m.mu, mu2, a, b, c, d)?
        }
        (false, true) => {
            let [a1, beta, a2] = complete(alphas, ["alpha1", "beta", "alpha2"])?;
            params_from_alphas(a1, beta, a2, m.gamma, m.epsilon, m.mu, mu2)?
        }
    };
    let case = classify_case(&params)?;
    let case_override = match &m.case_override {
        Some(name) => {
            let v: Variant = name.parse()?;
            v.check(&params)?;
            Some(v)
        }
        None => None,
    };

    let g = raw.grid;
    let grid = match g.dim {
        1 => GridSpec::new_1d(g.n, g.length)?,
        2 => GridSpec::square(g.n, g.length)?,
        other => return Err(BfdError::Config(format!("grid.dim = {other}, expected 1 or 2"))),
    };

    let sc = raw.scheme;
    let scheme = match &sc.scheme {
        Some(name) => name.parse()?,
        None if params.b == params.d => Scheme::ExponentialRk4,
        None => Scheme::ClassicalRk4,
    };
    let start = match raw.initial {
        Some(init) => start_from(init)?,
        None => return Err(BfdError::Config("missing [initial] section".to_string())),
    };

    let st = raw.study;
    let mus = match st.mus {
        None => MuChoice::Tied,
        Some(RawMus::Named(s)) if s == "tied" => MuChoice::Tied,
        Some(RawMus::Named(s)) => {
            return Err(BfdError::Config(format!("study.mus = \"{s}\", expected \"tied\" or a list")))
        }
        Some(RawMus::List(v)) => MuChoice::List(v),
    };
    let cfg = RunConfig {
        params,
        case,
        case_override,
        grid,
        scheme,
        dt: sc.dt,
        max_t: sc.max_t.unwrap_or(10.0),
        cadence: sc.cadence.unwrap_or(1),
        dealias: sc.dealias.unwrap_or(true),
        start,
        directory: raw.output.directory.unwrap_or_else(|| PathBuf::from("bfd-out")),
        snapshots: raw.output.snapshots.unwrap_or(true),
        epsilons: st.epsilons.unwrap_or_else(|| vec![params.epsilon]),
        mus,
        s: st.s,
        growth_factor: st.growth_factor.unwrap_or(2.0),
        dts: st.dts.unwrap_or_default(),
        samples: st.samples.unwrap_or(100),
        seed: st.seed.unwrap_or(0),
        smallness_target: st.smallness_target,
    };
    cfg.check_ranges()?;
    Ok(cfg)
}

fn complete<const K: usize>(vals: [Option<f64>; K], names: [&str; K]) -> Result<[f64; K]> {
    let missing: Vec<&str> = names.iter().zip(&vals).filter(|(_, v)| v.is_none()).map(|(n, _)| *n).collect();
    if !missing.is_empty() {
        return Err(BfdError::Config(format!("model: missing {}", missing.join(", "))));
    }
    Ok(vals.map(|v| v.unwrap()))
}

fn start_from(init: RawInitial) -> Result<Start> {
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| BfdError::Config(format!("initial.{key} is required for profile `{}`", init.profile)))
    };
    let profile = match init.profile.as_str() {
        "snapshot" => {
            let path = init
                .path
                .clone()
                .ok_or_else(|| BfdError::Config("initial.path is required for profile `snapshot`".to_string()))?;
            return Ok(Start::Snapshot(path));
        }
        "gaussian" => Profile::Gaussian {
            width: need(init.width, "width")?,
            center: init.center,
        },
        "mode" => Profile::Mode {
            k: init
                .k
                .ok_or_else(|| BfdError::Config("initial.k is required for profile `mode`".to_string()))?,
        },
        "random_bandlimited" => Profile::RandomBandlimited {
            seed: init.seed.unwrap_or(0),
            decay: init.decay.unwrap_or(2.0),
        },
        other => {
            return Err(BfdError::Config(format!(
                "initial.profile = \"{other}\", expected gaussian, mode, random_bandlimited or snapshot"
            )))
        }
    };
    Ok(Start::Profile(InitialData {
        profile,
        amplitude: init.amplitude.unwrap_or(1.0),
        velocity: init.velocity.unwrap_or_default(),
    }))
}

impl RunConfig {
    fn check_ranges(&self) -> Result<()> {
        let bad = |key: &str, detail: String| Err(BfdError::Config(format!("{key} {detail}")));
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad("scheme.dt", format!("= {dt}, must be > 0"));
            }
        }
        if !(self.max_t >= 0.0) || !self.max_t.is_finite() {
            return bad("scheme.max_t", format!("= {}, must be >= 0", self.max_t));
        }
        if self.cadence == 0 {
            return bad("scheme.cadence", "= 0, must be >= 1".to_string());
        }
        if let Some(s) = self.s {
            if !(s >= 0.0) {
                return bad("study.s", format!("= {s}, must be >= 0"));
            }
        }
        if !(self.growth_factor > 1.0) {
            return bad("study.growth_factor", format!("= {}, must be > 1", self.growth_factor));
        }
        Ok(())
    }

    /// Initial data for study subcommands, which do not reload snapshots.
    pub fn initial_data(&self) -> Result<InitialData> {
        match &self.start {
            Start::Profile(d) => Ok(d.clone()),
            Start::Snapshot(_) => Err(BfdError::Config(
                "studies need a generated initial profile, not a snapshot".to_string(),
            )),
        }
    }

    pub fn study(&self, kind: StudyKind) -> Result<StudyConfig> {
        let mut sc = StudyConfig::new(kind, self.params, self.grid.clone(), self.initial_data()?);
        sc.scheme = self.scheme;
        sc.dt = self.dt;
        sc.max_t = self.max_t;
        sc.cadence = self.cadence;
        sc.epsilons = self.epsilons.clone();
        sc.mus = self.mus.clone();
        sc.s = self.s;
        sc.growth_factor = self.growth_factor;
        sc.dts = self.dts.clone();
        sc.samples = self.samples;
        sc.seed = self.seed;
        sc.variant = self.case_override;
        sc.smallness_target = self.smallness_target;
        Ok(sc)
    }
}

/// The key table as printed under `--help`.
pub fn keys_help() -> String {
    let mut out = String::from("Config keys (TOML):\n");
    let mut section = "";
    for (sec, key, doc) in KEYS {
        if *sec != section {
            out.push_str(&format!("  [{sec}]\n"));
            section = sec;
        }
        out.push_str(&format!("    {key:<17} {doc}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
gamma = 0.6
epsilon = 0.1
mu = 0.1
a = -0.1
b = 0.2
c = -0.1
d = 0.2

[grid]
dim = 1
n = 32
length = 20.0

[initial]
profile = "gaussian"
width = 2.0
"#;

    #[test]
    fn minimal_config_is_case_two() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.case.case_id, 2);
        assert_eq!(cfg.scheme, Scheme::ExponentialRk4);
        assert_eq!(cfg.params.mu2, 1.0);
        assert_eq!(cfg.max_t, 10.0);
    }

    #[test]
    fn positive_a_is_ill_posed() {
        let text = MINIMAL.replace("a = -0.1", "a = 0.1");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, BfdError::IllPosed(_)));
        assert!(err.to_string().contains("a <= 0"));
    }

    #[test]
    fn both_parameter_groups_are_rejected() {
        let text = MINIMAL.replace("d = 0.2", "d = 0.2\nbeta = 0.1");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("n = 32", "n = 32\nspacing = 0.1");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("spacing"), "{err}");
    }

    #[test]
    fn every_documented_key_is_accepted() {
        for (sec, key, _) in KEYS {
            let value = match *key {
                "center" | "k" => "[1, 0]",
                "epsilons" | "dts" => "[0.1]",
                "mus" => "\"tied\"",
                "dealias" | "snapshots" => "true",
                "profile" | "scheme" | "velocity" | "case_override" | "directory" | "path" => "\"x\"",
                "dim" | "n" | "cadence" | "seed" | "samples" => "1",
                _ => "0.5",
            };
            let header = format!("[{sec}]");
            let text = if MINIMAL.contains(&header) {
                MINIMAL.replacen(&header, &format!("{header}\n{key} = {value}"), 1)
            } else {
                format!("{MINIMAL}\n{header}\n{key} = {value}\n")
            };
            // Duplicate keys and bad values may fail; unknown-field errors may not.
            if let Err(e) = parse(&text) {
                assert!(!e.to_string().contains("unknown field"), "{sec}.{key}: {e}");
            }
        }
    }
}
