//! Text and CSV formats.
//!
//! Marginal files are UTF-8 with `#` comments: repeated blocks of
//!
//! ```text
//! marginal <t>
//! atom <x> <w>
//! atom <x> <w>
//! ```
//!
//! with strictly increasing times across blocks. Serialization emits 17
//! significant digits so round trips are exact. Gridded surfaces are CSV
//! with the level lattice in the first row, the time lattice in the first
//! column and `NaN` for masked cells; path matrices are CSV with a
//! `path,<t_1>,...,<t_m>` header and one row per path.

use crate::error::{MartfitError, Result};
use crate::local_vol::LocalVolGrid;
use crate::marginal::{CallSurface, GriddedSurface, MarginalDistribution};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_number(token: &str, line: usize, what: &str) -> Result<f64> {
    token.parse().map_err(|_| MartfitError::Parse {
        line,
        msg: format!("bad {what}: {token}"),
    })
}

/// Parse a marginal file into a surface (structurally; CP membership is
/// checked separately by the caller).
pub fn parse_marginals(text: &str) -> Result<CallSurface> {
    let mut times: Vec<f64> = Vec::new();
    let mut blocks: Vec<Vec<(f64, f64)>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("marginal") => {
                let t = parse_number(
                    tokens.next().ok_or(MartfitError::Parse {
                        line: line_no,
                        msg: "marginal line needs a time".into(),
                    })?,
                    line_no,
                    "time",
                )?;
                times.push(t);
                blocks.push(Vec::new());
            }
            Some("atom") => {
                let block = blocks.last_mut().ok_or(MartfitError::Parse {
                    line: line_no,
                    msg: "atom before any marginal block".into(),
                })?;
                let x = tokens.next().ok_or(MartfitError::Parse {
                    line: line_no,
                    msg: "atom line needs a position and a weight".into(),
                })?;
                let w = tokens.next().ok_or(MartfitError::Parse {
                    line: line_no,
                    msg: "atom line needs a weight".into(),
                })?;
                block.push((
                    parse_number(x, line_no, "position")?,
                    parse_number(w, line_no, "weight")?,
                ));
            }
            Some(other) => {
                return Err(MartfitError::Parse {
                    line: line_no,
                    msg: format!("unknown keyword: {other}"),
                })
            }
            None => unreachable!(),
        }
        if tokens.next().is_some() {
            return Err(MartfitError::Parse {
                line: line_no,
                msg: "trailing tokens".into(),
            });
        }
    }
    if times.is_empty() {
        return Err(MartfitError::Parse {
            line: 0,
            msg: "no marginal blocks".into(),
        });
    }
    let marginals = blocks
        .iter()
        .zip(&times)
        .map(|(b, &t)| {
            MarginalDistribution::from_weighted(b).map_err(|e| {
                MartfitError::InvalidMarginal(format!("block at t = {t}: {e}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CallSurface::new(times, marginals)
}

pub fn serialize_marginals(surface: &CallSurface) -> String {
    let mut out = String::new();
    for (t, m) in surface.times().iter().zip(surface.marginals()) {
        out.push_str(&format!("marginal {}\n", fmt(*t)));
        for a in m.atoms() {
            out.push_str(&format!("atom {} {}\n", fmt(a.position), fmt(a.weight)));
        }
    }
    out
}

/// Path matrix CSV: `path,<t_1>,...,<t_m>` header, one row per path.
pub fn path_matrix_csv(matrix: &[Vec<f64>], query_times: &[f64]) -> String {
    let mut out = String::from("path");
    for t in query_times {
        out.push(',');
        out.push_str(&fmt(*t));
    }
    out.push('\n');
    for (i, row) in matrix.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push('\n');
    }
    out
}

fn grid_csv(times: &[f64], levels: &[f64], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for x in levels {
        out.push(',');
        out.push_str(&fmt(*x));
    }
    out.push('\n');
    for (t, cells) in times.iter().zip(rows) {
        out.push_str(&fmt(*t));
        for c in cells {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
    }
    out
}

pub fn gridded_surface_csv(surface: &GriddedSurface) -> String {
    grid_csv(
        &surface.times,
        &surface.levels,
        surface.values.iter().map(|r| r.iter().map(|v| fmt(*v)).collect()),
    )
}

/// Local-vol grid in the same layout, masked cells as `NaN`.
pub fn local_vol_csv(grid: &LocalVolGrid) -> String {
    grid_csv(
        &grid.times,
        &grid.levels,
        grid.sigma.iter().zip(&grid.mask).map(|(row, mrow)| {
            row.iter()
                .zip(mrow)
                .map(|(&s, &m)| if m { "NaN".into() } else { fmt(s) })
                .collect()
        }),
    )
}

pub fn parse_gridded_surface(text: &str) -> Result<GriddedSurface> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (i, header) = lines.next().ok_or(MartfitError::Parse {
        line: 0,
        msg: "empty grid file".into(),
    })?;
    let levels = header
        .split(',')
        .skip(1)
        .map(|c| parse_number(c.trim(), i + 1, "level"))
        .collect::<Result<Vec<f64>>>()?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let mut cells = line.split(',');
        let t = parse_number(
            cells.next().unwrap_or("").trim(),
            i + 1,
            "time",
        )?;
        let row = cells
            .map(|c| parse_number(c.trim(), i + 1, "call value"))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != levels.len() {
            return Err(MartfitError::Parse {
                line: i + 1,
                msg: format!("{} cells for {} levels", row.len(), levels.len()),
            });
        }
        times.push(t);
        values.push(row);
    }
    GriddedSurface::new(times, levels, values)
}
