//! Plain-text field files.
//!
//! ```text
//! membrane-field 1
//! dim 2
//! extents -1.0000000000000000e0 1.0000000000000000e0 -1.0000000000000000e0 1.0000000000000000e0
//! resolution 256 256
//! n 3
//! tolerance 1.0000000000000000e-12
//! membrane 1
//! <one grid row per line, values separated by spaces>
//! membrane 2
//! ...
//! ```
//!
//! Values are written with 17 significant digits, so reading a file back
//! reproduces every value bit for bit.

use std::io::{BufRead, Write};

use super::field::{MembraneStack, ScalarField};
use super::grid::Grid;
use crate::{Error, Result};

const MAGIC: &str = "membrane-field 1";

/// Write a stack in the field-file format.
pub fn write_stack<W: Write>(mut w: W, stack: &MembraneStack) -> Result<()> {
    write_blocks(&mut w, stack.grid(), stack.n_membranes(), stack.feasibility_tol(), |node, i| {
        stack.get(node, i)
    })
}

/// Write a single field (`n 1`).
pub fn write_scalar<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    write_blocks(&mut w, field.grid(), 1, 0.0, |node, _| field.values()[node])
}

fn write_blocks<W: Write>(
    w: &mut W,
    grid: &Grid,
    n: usize,
    tol: f64,
    value: impl Fn(usize, usize) -> f64,
) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim {}", grid.dim())?;
    let ext: Vec<String> = grid
        .extents()
        .iter()
        .flat_map(|&(a, b)| [format!("{a:.16e}"), format!("{b:.16e}")])
        .collect();
    writeln!(w, "extents {}", ext.join(" "))?;
    let res: Vec<String> = grid.resolution().iter().map(|c| c.to_string()).collect();
    writeln!(w, "resolution {}", res.join(" "))?;
    writeln!(w, "n {n}")?;
    writeln!(w, "tolerance {tol:.16e}")?;
    let nx = grid.nx();
    let mut line = String::new();
    for i in 0..n {
        writeln!(w, "membrane {}", i + 1)?;
        for j in 0..grid.ny() {
            line.clear();
            for k in 0..nx {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{:.16e}", value(j * nx + k, i)));
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

struct Parsed {
    grid: Grid,
    n: usize,
    tol: f64,
    values: Vec<f64>,
}

fn parse<R: BufRead>(r: R) -> Result<Parsed> {
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))?
            .map_err(Error::from)
    };
    if next("header")?.trim() != MAGIC {
        return Err(Error::Parse("not a membrane field file".into()));
    }
    let dim: usize = keyed(&next("dim")?, "dim")?
        .first()
        .copied()
        .ok_or_else(|| Error::Parse("missing dim".into()))?;
    let ext: Vec<f64> = keyed(&next("extents")?, "extents")?;
    let res: Vec<usize> = keyed(&next("resolution")?, "resolution")?;
    if ext.len() != 2 * dim || res.len() != dim {
        return Err(Error::Parse("extents/resolution do not match dim".into()));
    }
    let extents: Vec<(f64, f64)> = ext.chunks(2).map(|c| (c[0], c[1])).collect();
    let grid = Grid::new(dim, &extents, &res)?;
    let n: usize = single(&next("n")?, "n")?;
    let tol: f64 = single(&next("tolerance")?, "tolerance")?;
    if n == 0 {
        return Err(Error::Parse("n must be positive".into()));
    }
    let nx = grid.nx();
    let mut values = vec![0.0; n * grid.node_count()];
    for i in 0..n {
        let header = next("membrane header")?;
        if single::<usize>(&header, "membrane")? != i + 1 {
            return Err(Error::Parse(format!("expected block for membrane {}", i + 1)));
        }
        for j in 0..grid.ny() {
            let row = next("grid row")?;
            let mut count = 0;
            for (k, tok) in row.split_whitespace().enumerate() {
                if k >= nx {
                    return Err(Error::Parse(format!("row {j} of membrane {} too long", i + 1)));
                }
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value '{tok}'")))?;
                values[(j * nx + k) * n + i] = v;
                count += 1;
            }
            if count != nx {
                return Err(Error::Parse(format!("row {j} of membrane {} too short", i + 1)));
            }
        }
    }
    Ok(Parsed {
        grid,
        n,
        tol,
        values,
    })
}

fn keyed<T: std::str::FromStr>(line: &str, key: &str) -> Result<Vec<T>> {
    let mut words = line.split_whitespace();
    if words.next() != Some(key) {
        return Err(Error::Parse(format!("expected '{key}' line, got '{line}'")));
    }
    words
        .map(|w| {
            w.parse()
                .map_err(|_| Error::Parse(format!("bad {key} value '{w}'")))
        })
        .collect()
}

fn single<T: std::str::FromStr + Copy>(line: &str, key: &str) -> Result<T> {
    let v = keyed::<T>(line, key)?;
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(Error::Parse(format!("'{key}' takes one value"))),
    }
}

/// Read a stack; ordering is validated with the tolerance stored in the file.
pub fn read_stack<R: BufRead>(r: R) -> Result<MembraneStack> {
    let p = parse(r)?;
    MembraneStack::new(p.grid, p.n, p.values, p.tol)
}

/// Read a single-field file.
pub fn read_scalar<R: BufRead>(r: R) -> Result<ScalarField> {
    let p = parse(r)?;
    if p.n != 1 {
        return Err(Error::Parse(format!("expected one field, file has {}", p.n)));
    }
    ScalarField::new(p.grid, p.values)
}

/// Stack to an in-memory string.
pub fn stack_to_string(stack: &MembraneStack) -> String {
    let mut buf = Vec::new();
    write_stack(&mut buf, stack).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn stack_from_str(s: &str) -> Result<MembraneStack> {
    read_stack(s.as_bytes())
}
