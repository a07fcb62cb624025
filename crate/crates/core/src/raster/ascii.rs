//! ESRI ASCII grid reader/writer for binary layers.
//!
//! ```text
//! ncols 4
//! nrows 2
//! cellsize 10
//! NODATA_value -9999
//! 0 0 1 1
//! 0 1 1 0
//! ```
//!
//! Rows are listed top to bottom. `NODATA_value` cells read as 0. The
//! `xllcorner`/`yllcorner` (or `*center`) keys are accepted and ignored.

use std::fmt::Write as _;

use super::Layer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AsciiGrid {
    pub layer: Layer,
    pub cell_size: f64,
}

pub fn parse_grid(name: &str, text: &str) -> Result<AsciiGrid> {
    let mut ncols = None;
    let mut nrows = None;
    let mut cell_size = None;
    let mut nodata: Option<i64> = None;
    let mut values: Vec<u8> = Vec::new();
    let mut in_body = false;

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !in_body {
            let mut parts = trimmed.split_whitespace();
            let key = parts.next().unwrap_or_default();
            if key.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let value = parts.next().ok_or_else(|| Error::GridParse {
                    line: line_no,
                    reason: format!("header key `{key}` has no value"),
                })?;
                let bad = |what: &str| Error::GridParse {
                    line: line_no,
                    reason: format!("invalid {what} `{value}`"),
                };
                match key.to_ascii_lowercase().as_str() {
                    "ncols" => ncols = Some(value.parse::<usize>().map_err(|_| bad("ncols"))?),
                    "nrows" => nrows = Some(value.parse::<usize>().map_err(|_| bad("nrows"))?),
                    "cellsize" => cell_size = Some(value.parse::<f64>().map_err(|_| bad("cellsize"))?),
                    "nodata_value" => {
                        nodata = Some(value.parse::<f64>().map_err(|_| bad("NODATA_value"))? as i64)
                    }
                    "xllcorner" | "yllcorner" | "xllcenter" | "yllcenter" => {}
                    other => {
                        return Err(Error::GridParse {
                            line: line_no,
                            reason: format!("unknown header key `{other}`"),
                        })
                    }
                }
                continue;
            }
            in_body = true;
        }
        for tok in trimmed.split_whitespace() {
            let v: i64 = tok
                .parse::<i64>()
                .or_else(|_| tok.parse::<f64>().map(|f| f as i64))
                .map_err(|_| Error::GridParse {
                    line: line_no,
                    reason: format!("invalid cell value `{tok}`"),
                })?;
            let v = if Some(v) == nodata { 0 } else { v };
            if v != 0 && v != 1 {
                return Err(Error::NonBinaryLayer {
                    name: name.to_string(),
                    value: v,
                });
            }
            values.push(v as u8);
        }
    }
    let missing = |key: &str| Error::GridParse {
        line: 0,
        reason: format!("missing header key `{key}`"),
    };
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cell_size = cell_size.ok_or_else(|| missing("cellsize"))?;
    if !(cell_size > 0.0) {
        return Err(Error::GridParse {
            line: 0,
            reason: format!("cellsize must be positive, got {cell_size}"),
        });
    }
    if values.len() != ncols * nrows {
        return Err(Error::GridParse {
            line: 0,
            reason: format!("expected {} cell values, found {}", ncols * nrows, values.len()),
        });
    }
    Ok(AsciiGrid {
        layer: Layer::new(name, nrows, ncols, values)?,
        cell_size,
    })
}

pub fn write_grid(layer: &Layer, cell_size: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", layer.cols());
    let _ = writeln!(out, "nrows {}", layer.rows());
    let _ = writeln!(out, "cellsize {cell_size}");
    let _ = writeln!(out, "NODATA_value -9999");
    for row in layer.values().chunks(layer.cols()) {
        let line: Vec<&str> = row.iter().map(|&v| if v == 1 { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_body() {
        let g = parse_grid(
            "forest",
            "ncols 3\nNROWS 2\nxllcorner 0\ncellsize 10\nNODATA_value -9999\n0 1 -9999\n1 1 0\n",
        )
        .unwrap();
        assert_eq!(g.cell_size, 10.0);
        assert_eq!(g.layer.values(), &[0, 1, 0, 1, 1, 0]);
        assert!(g.layer.get(1, 0));
        assert!(!g.layer.get(2, 1));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            parse_grid("x", "ncols 2\nnrows 1\ncellsize 1\n0 3\n"),
            Err(Error::NonBinaryLayer { value: 3, .. })
        ));
        assert!(parse_grid("x", "ncols 2\nnrows 2\ncellsize 1\n0 1\n").is_err());
        assert!(parse_grid("x", "ncols 2\ncellsize 1\n0 1\n").is_err());
        assert!(parse_grid("x", "ncols 2\nnrows 1\ncellsize 1\n0 z\n").is_err());
    }

    #[test]
    fn write_then_parse() {
        let l = Layer::from_fn("l", 3, 4, |x, y| (x + y) % 3 == 0);
        let g = parse_grid("l", &write_grid(&l, 5.0)).unwrap();
        assert_eq!(g.layer, l);
        assert_eq!(g.cell_size, 5.0);
    }
}
