//! Dimensionless model constants, the (a, b, c, d) family and the
//! classification of admissible coefficient sets into norm-index cases.

use serde::{Deserialize, Serialize};

use crate::error::{BfdError, Result};
use crate::system::FieldState;

/// All dimensionless constants of the two-layer model.
///
/// `delta` and `epsilon2` are derived, read-only and never enter the
/// equations; they are kept for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub mu2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    delta: f64,
    epsilon2: f64,
}

impl ModelParams {
    /// Builds a parameter set from explicit coefficients.
    ///
    /// Only the ranges of gamma, epsilon, mu and mu2 are checked here; the
    /// sign condition on (a, b, c, d) is the job of [`classify_case`].
    /// `epsilon = 0` is accepted and selects the linear system.
    pub fn new(
        gamma: f64,
        epsilon: f64,
        mu: f64,
        mu2: f64,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(BfdError::domain("gamma", format!("{gamma} not in (0, 1)")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(BfdError::domain("epsilon", format!("{epsilon} not >= 0")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(BfdError::domain("mu", format!("{mu} not > 0")));
        }
        if !(mu2 > 0.0) || !mu2.is_finite() {
            return Err(BfdError::domain("mu2", format!("{mu2} not > 0")));
        }
        for (name, x) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !x.is_finite() {
                return Err(BfdError::domain(name, format!("{x} is not finite")));
            }
        }
        let delta = (mu / mu2).sqrt();
        Ok(Self {
            gamma,
            epsilon,
            mu,
            mu2,
            a,
            b,
            c,
            d,
            delta,
            epsilon2: epsilon * delta,
        })
    }

    /// Depth ratio d1/d2 = sqrt(mu / mu2).
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Amplitude parameter relative to the lower layer, epsilon * delta.
    pub fn epsilon2(&self) -> f64 {
        self.epsilon2
    }

    /// Same parameters with a different amplitude parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.gamma, epsilon, self.mu, self.mu2, self.a, self.b, self.c, self.d,
        )
    }

    /// Same parameters with a different shallowness parameter.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(
            self.gamma,
            self.epsilon,
            mu,
            self.mu2,
            self.a,
            self.b,
            self.c,
            self.d,
        )
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// Builds (a, b, c, d) from the modelling parameters (alpha1, beta, alpha2):
///
/// a = (1 - alpha1 - 3 beta) / 3, b = alpha1 / 3, c = beta alpha2, d = beta (1 - alpha2).
pub fn params_from_alphas(
    alpha1: f64,
    beta: f64,
    alpha2: f64,
    gamma: f64,
    epsilon: f64,
    mu: f64,
    mu2: f64,
) -> Result<ModelParams> {
    if !(alpha1 >= 0.0) || !alpha1.is_finite() {
        return Err(BfdError::domain("alpha1", format!("{alpha1} not >= 0")));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(BfdError::domain("beta", format!("{beta} not >= 0")));
    }
    if !(alpha2 <= 1.0) || !alpha2.is_finite() {
        return Err(BfdError::domain("alpha2", format!("{alpha2} not <= 1")));
    }
    let a = (1.0 - alpha1 - 3.0 * beta) / 3.0;
    let b = alpha1 / 3.0;
    let c = beta * alpha2;
    let d = beta * (1.0 - alpha2);
    ModelParams::new(gamma, epsilon, mu, mu2, a, b, c, d)
}

/// Which symmetrizer / condensed form a parameter set is analysed with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// b = d: g(D) = 1, the diagonal-A symmetrizer. With b = d = 0 the
    /// energy pairing carries no Helmholtz factor.
    BEqualD,
    /// b > 0, d >= 0 through g(D) = (1 - b mu Lap)(1 - d mu Lap)^-1.
    BNotEqualD,
    /// b = 0, d > 0: first equation multiplied by (1 - d mu Lap).
    BZero,
}

impl Variant {
    /// Checks that the variant's condensed form exists for these coefficients.
    pub fn check(self, p: &ModelParams) -> Result<()> {
        let ok = match self {
            Variant::BEqualD => p.b == p.d,
            Variant::BNotEqualD => p.b > 0.0 && p.d >= 0.0,
            Variant::BZero => p.b == 0.0 && p.d > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(BfdError::Config(format!(
                "variant {self:?} does not apply to b = {}, d = {}",
                p.b, p.d
            )))
        }
    }

    pub fn natural(p: &ModelParams) -> Variant {
        if p.b == p.d {
            Variant::BEqualD
        } else if p.b == 0.0 {
            Variant::BZero
        } else {
            Variant::BNotEqualD
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = BfdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b_eq_d" | "b_equal_d" => Ok(Variant::BEqualD),
            "b_neq_d" | "b_not_equal_d" => Ok(Variant::BNotEqualD),
            "b_zero" => Ok(Variant::BZero),
            other => Err(BfdError::Config(format!(
                "unknown case override `{other}` (expected b_eq_d, b_neq_d or b_zero)"
            ))),
        }
    }
}

/// One of the eight admissible coefficient classes with its norm indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CaseClass {
    pub case_id: u8,
    /// Norm index for zeta.
    pub k: u32,
    /// Norm index for v.
    pub k_prime: u32,
    pub hamiltonian: bool,
    pub diagonalizable: bool,
    pub variant: Variant,
}

/// Classifies (a, b, c, d) into its admissible case.
///
/// Membership is decided by exact comparisons (`b == d`, `c == 0`, ...): a
/// nearly equal pair b ~ d is still the general case 1.
pub fn classify_case(p: &ModelParams) -> Result<CaseClass> {
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let mut violated = Vec::new();
    if a > 0.0 {
        violated.push("a <= 0");
    }
    if c > 0.0 {
        violated.push("c <= 0");
    }
    if b < 0.0 {
        violated.push("b >= 0");
    }
    if d < 0.0 {
        violated.push("d >= 0");
    }
    if !violated.is_empty() {
        return Err(BfdError::IllPosed(format!(
            "(a, b, c, d) = ({a}, {b}, {c}, {d}) violates {}",
            violated.join(", ")
        )));
    }
    let c_neg = c < 0.0;
    let (case_id, k, k_prime) = match (b > 0.0, d > 0.0, c_neg) {
        (true, true, true) if b != d => (1, 3, 3),
        (true, true, true) => (2, 2, 2),
        (true, false, false) => (2, 2, 2),
        (true, false, true) => (3, 4, 3),
        (true, true, false) => (4, 1, 2),
        (false, true, true) => (5, 3, 4),
        (false, true, false) => (6, 1, 3),
        (false, false, true) => (7, 1, 1),
        (false, false, false) => (8, 0, 1),
    };
    let hamiltonian = b == d;
    Ok(CaseClass {
        case_id,
        k,
        k_prime,
        hamiltonian,
        diagonalizable: hamiltonian,
        variant: Variant::natural(p),
    })
}

/// Maps a state to the unit-amplitude, unit-shallowness variables
/// zeta~(t', X') = eps zeta(sqrt(mu) t', sqrt(mu) X'), same for v.
///
/// Values are multiplied by epsilon; grid lengths and the time coordinate
/// are divided by sqrt(mu). No resampling takes place.
pub fn rescale_to_unit(state: &FieldState, params: &ModelParams) -> Result<FieldState> {
    let (amp, len) = rescale_factors(params)?;
    state.rescaled(amp, 1.0 / len)
}

/// Inverse of [`rescale_to_unit`].
pub fn rescale_from_unit(state: &FieldState, params: &ModelParams) -> Result<FieldState> {
    let (amp, len) = rescale_factors(params)?;
    state.rescaled(1.0 / amp, len)
}

fn rescale_factors(params: &ModelParams) -> Result<(f64, f64)> {
    if !(params.epsilon > 0.0) {
        return Err(BfdError::domain(
            "epsilon",
            "rescaling needs epsilon > 0".to_string(),
        ));
    }
    if !(params.mu > 0.0) {
        return Err(BfdError::domain("mu", "rescaling needs mu > 0".to_string()));
    }
    Ok((params.epsilon, params.mu.sqrt()))
}
