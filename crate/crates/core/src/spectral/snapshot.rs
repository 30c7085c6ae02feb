//! Plain-text field snapshots.
//!
//! ```text
//! adasplit-field d=<d> a=<a> n=<n> m=<m>
//! <re_0> <im_0> <re_1> <im_1> ... <re_{m-1}> <im_{m-1}>     (one line per node)
//! ```
//!
//! Nodes are listed in row-major order (last axis fastest), node `j` on an axis
//! being `x_j = -a + 2 a j / n`. Numbers use the shortest decimal form that
//! parses back to the identical `f64`, so a write/read cycle is bit-exact.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{Field, TorusGrid};
use crate::error::{Error, Result};

const MAGIC: &str = "adasplit-field";

pub fn write_snapshot<W: Write>(mut w: W, field: &Field) -> Result<()> {
    let g = field.grid();
    let f = field.to_nodal();
    writeln!(
        w,
        "{MAGIC} d={} a={:?} n={} m={}",
        g.dim(),
        g.half_width(),
        g.points_per_axis(),
        f.num_components()
    )?;
    let mut line = String::new();
    for i in 0..g.len() {
        line.clear();
        for (c, comp) in f.components().iter().enumerate() {
            if c > 0 {
                line.push(' ');
            }
            let z = comp[i];
            line.push_str(&format!("{:?} {:?}", z.re, z.im));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Field> {
    let perr = |message: String| Error::Parse {
        source_name: "field snapshot".into(),
        message,
    };
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| perr("empty input".into()))??;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(perr(format!("bad header `{header}`")));
    }
    let (mut d, mut a, mut n, mut m) = (None, None, None, None);
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| perr(format!("bad header entry `{kv}`")))?;
        let bad = |_| perr(format!("bad value in `{kv}`"));
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(bad)?),
            "a" => a = Some(v.parse::<f64>().map_err(|_| perr(format!("bad value in `{kv}`")))?),
            "n" => n = Some(v.parse::<usize>().map_err(bad)?),
            "m" => m = Some(v.parse::<usize>().map_err(bad)?),
            _ => return Err(perr(format!("unknown header key `{k}`"))),
        }
    }
    let (d, a, n, m) = match (d, a, n, m) {
        (Some(d), Some(a), Some(n), Some(m)) => (d, a, n, m),
        _ => return Err(perr("header must define d, a, n and m".into())),
    };
    let grid = TorusGrid::new(d, a, n)?;
    let mut comps = vec![Vec::with_capacity(grid.len()); m];
    for i in 0..grid.len() {
        let line = lines
            .next()
            .ok_or_else(|| perr(format!("expected {} node lines, got {i}", grid.len())))??;
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(format!("node {i}: {e}")))?;
        if nums.len() != 2 * m {
            return Err(perr(format!("node {i}: expected {} numbers, got {}", 2 * m, nums.len())));
        }
        for (c, comp) in comps.iter_mut().enumerate() {
            comp.push(Complex64::new(nums[2 * c], nums[2 * c + 1]));
        }
    }
    Field::nodal(grid, comps)
}
