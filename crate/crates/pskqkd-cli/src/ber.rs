//! Bit-error-rate contour data.

use std::path::Path;

use pskqkd::analytic::{ber_map, BerConfig, BerGrid};

use crate::error::{io_err, Result};
use crate::row::fmt_g;

/// Matrix-shaped CSV: the header row holds the q coordinates, each further
/// row starts with its p coordinate.
pub fn write_ber_grid<W: std::io::Write>(out: W, grid: &BerGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["p\\q".to_string()];
    header.extend(grid.coords.iter().map(|&q| fmt_g(q)));
    w.write_record(&header)?;
    for (p, row) in grid.coords.iter().zip(&grid.values) {
        let mut rec = vec![fmt_g(*p)];
        rec.extend(row.iter().map(|&v| fmt_g(v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// ⟨BER⟩ over [−3|α|, 3|α|]² with the (0, 1, 2, 1) weights.
pub fn emit_ber_grid(amplitude: f64, resolution: usize, path: &Path) -> Result<BerGrid> {
    let grid = ber_map(&BerConfig::new(amplitude, resolution))?;
    let f = std::fs::File::create(path).map_err(io_err(path))?;
    write_ber_grid(f, &grid)?;
    Ok(grid)
}
