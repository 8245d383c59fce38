use std::io::{Read, Write};
use std::sync::Arc;

use thiserror::Error;

use super::function::RadialFunction;
use super::grid::{GridError, RadialGrid};
use crate::real::Real;

const MAGIC: &[u8; 8] = b"NNLSPRF1";

#[derive(Debug, Error)]
pub enum ProfileIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad profile header")]
    BadHeader,
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Writes columns `s,u` with shortest round-trip decimals.
pub fn write_csv<T: Real, W: Write>(u: &RadialFunction<T>, out: W) -> Result<(), ProfileIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "u"])?;
    for (s, v) in u.grid().nodes().iter().zip(u.values()) {
        w.write_record([s.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Binary layout: magic, R (f64 LE), M (u64 LE), N (u64 LE), M+1 values (f64 LE).
pub fn write_binary<T: Real, W: Write>(u: &RadialFunction<T>, mut out: W) -> Result<(), ProfileIoError> {
    let g = u.grid();
    out.write_all(MAGIC)?;
    out.write_all(&g.radius().as_f64().to_le_bytes())?;
    out.write_all(&(g.cells() as u64).to_le_bytes())?;
    out.write_all(&(g.dim() as u64).to_le_bytes())?;
    for v in u.values() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<T: Real, R: Read>(mut input: R) -> Result<RadialFunction<T>, ProfileIoError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(ProfileIoError::BadHeader);
    }
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    let radius = f64::from_le_bytes(b);
    input.read_exact(&mut b)?;
    let cells = usize::try_from(u64::from_le_bytes(b)).map_err(|_| ProfileIoError::BadHeader)?;
    input.read_exact(&mut b)?;
    let dim = usize::try_from(u64::from_le_bytes(b)).map_err(|_| ProfileIoError::BadHeader)?;
    let grid = Arc::new(RadialGrid::new(T::lit(radius), cells, dim)?);
    let mut values = Vec::with_capacity(cells + 1);
    for _ in 0..=cells {
        input.read_exact(&mut b)?;
        values.push(T::lit(f64::from_le_bytes(b)));
    }
    Ok(RadialFunction::new(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = Arc::new(RadialGrid::<f64>::new(7.5, 64, 4).unwrap());
        let u = RadialFunction::from_fn(g, |s| (-s).exp() / 3.0);
        let mut buf = Vec::new();
        write_binary(&u, &mut buf).unwrap();
        let back: RadialFunction<f64> = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let g = Arc::new(RadialGrid::<f64>::new(1.0, 16, 3).unwrap());
        let u = RadialFunction::from_fn(g, |s| 1.0 - s);
        let mut buf = Vec::new();
        write_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 18);
        assert!(text.starts_with("s,u\n0,1\n"));
    }
}
