//! Pseudo-spectral solver and diagnostics for Boussinesq-Full Dispersion
//! internal-wave systems on periodic domains.

pub mod energy;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod init;
pub mod params;
pub mod spectral;
pub mod system;

pub use error::{BfdError, Result};
pub use params::{classify_case, params_from_alphas, CaseClass, ModelParams, Variant};
pub use spectral::{Grid, GridSpec, Snapshot, SpectralField, SymbolTable};
pub use system::{FieldState, Model};
