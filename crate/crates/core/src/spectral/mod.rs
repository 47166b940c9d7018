//! Periodic-grid Fourier machinery: grids and cached transforms, fields with
//! lazily synchronised real/spectral representations, model symbols,
//! multipliers, dealiased products and snapshots.

mod field;
mod grid;
pub mod ops;
mod snapshot;
mod symbols;

pub use field::{SpectralField, Sync};
pub use grid::{mode_number, Grid, GridSpec};
pub use ops::{
    apply_multiplier, apply_real_multiplier, curl, dealias, divergence, gradient, partial,
    perp_gradient, product,
};
pub use snapshot::Snapshot;
pub use symbols::{a_symbol, sigma, SymbolTable};
