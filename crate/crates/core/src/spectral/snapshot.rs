//! `BFDv1` field snapshots: one ASCII header line
//! `BFDv1 dim n1 [n2] L1 [L2] t`, then little-endian f64 values of zeta,
//! v1 and (in 2D) v2, each in row-major (x-fastest) order.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::field::SpectralField;
use super::grid::{Grid, GridSpec};
use crate::error::{BfdError, Result};
use crate::system::FieldState;

const MAGIC: &str = "BFDv1";

/// Decoded snapshot, independent of any FFT context.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub t: f64,
    pub zeta: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_state(state: &FieldState) -> Self {
        Self {
            grid: state.grid().spec().clone(),
            t: state.t,
            zeta: state.zeta.real().into_owned(),
            v: state.v.iter().map(|c| c.real().into_owned()).collect(),
        }
    }

    pub fn into_state(self, grid: &Arc<Grid>) -> Result<FieldState> {
        if grid.spec() != &self.grid {
            return Err(BfdError::GridMismatch(format!(
                "snapshot grid {:?} differs from {:?}",
                self.grid,
                grid.spec()
            )));
        }
        let zeta = SpectralField::from_real(grid, self.zeta)?;
        let v = self
            .v
            .into_iter()
            .map(|c| SpectralField::from_real(grid, c))
            .collect::<Result<Vec<_>>>()?;
        FieldState::new(self.t, zeta, v)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        let header = if g.dim == 1 {
            format!("{MAGIC} 1 {} {} {}\n", g.n[0], g.length[0], self.t)
        } else {
            format!(
                "{MAGIC} 2 {} {} {} {} {}\n",
                g.n[0], g.n[1], g.length[0], g.length[1], self.t
            )
        };
        w.write_all(header.as_bytes())?;
        let mut buf = Vec::with_capacity(8 * g.len() * (1 + self.v.len()));
        for x in self.zeta.iter().chain(self.v.iter().flatten()) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let mut parts = line.trim_end_matches('\n').split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(BfdError::Format("missing BFDv1 magic".to_string()));
        }
        let dim: usize = parse(parts.next(), "dim")?;
        let grid = match dim {
            1 => {
                let n = parse(parts.next(), "n1")?;
                let l = parse(parts.next(), "L1")?;
                GridSpec::new_1d(n, l)?
            }
            2 => {
                let n1 = parse(parts.next(), "n1")?;
                let n2 = parse(parts.next(), "n2")?;
                let l1 = parse(parts.next(), "L1")?;
                let l2 = parse(parts.next(), "L2")?;
                GridSpec::new_2d([n1, n2], [l1, l2])?
            }
            other => return Err(BfdError::Format(format!("dim {other} not supported"))),
        };
        let t: f64 = parse(parts.next(), "t")?;
        if parts.next().is_some() {
            return Err(BfdError::Format("trailing header fields".to_string()));
        }
        let n = grid.len();
        let mut read_field = || -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; 8 * n];
            r.read_exact(&mut bytes)?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let zeta = read_field()?;
        let v = (0..dim).map(|_| read_field()).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, t, zeta, v })
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|s| s.parse().ok())
        .ok_or_else(|| BfdError::Format(format!("bad or missing header field {what}")))
}
