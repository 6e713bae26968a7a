use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernels::catalog::parse_call;
use crate::spectral::{project_initial, Basis, GramSet};

/// Initial displacement or velocity.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// `(flat mode index, coefficient)` pairs.
    Modes(Vec<(usize, f64)>),
    /// Piecewise-linear beam profile through `(x, u)` points, zero outside.
    Table(Vec<(f64, f64)>),
}

/// Splits `s` at `sep` outside parentheses.
pub fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn number(spec: &str, x: &str) -> Result<f64> {
    x.trim()
        .parse()
        .map_err(|_| Error::input(format!("`{x}` in `{spec}` is not a number")))
}

fn index(spec: &str, x: &str, n: usize) -> Result<usize> {
    let j: usize = x
        .trim()
        .parse()
        .map_err(|_| Error::input(format!("`{x}` in `{spec}` is not a mode index")))?;
    if j == 0 || j > n {
        return Err(Error::input(format!("mode index {j} in `{spec}` outside 1..={n}")));
    }
    Ok(j - 1)
}

pub fn parse_initial(spec: &str, spatial_dim: usize, n: usize) -> Result<InitialData> {
    let spec = spec.trim();
    if spec == "none" || spec == "zero" {
        return Ok(InitialData::Zero);
    }
    let (name, args) = parse_call(spec)?;
    if name == "table" {
        if spatial_dim != 1 {
            return Err(Error::input("table(...) initial data is only available on the beam"));
        }
        let mut points = Vec::with_capacity(args.len());
        for pair in &args {
            let (x, u) = pair
                .split_once(':')
                .ok_or_else(|| Error::input(format!("table entry `{pair}` is not `x:u`")))?;
            points.push((number(spec, x)?, number(spec, u)?));
        }
        if points.len() < 2 || points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::input(format!(
                "`{spec}` needs at least two increasing abscissae"
            )));
        }
        return Ok(InitialData::Table(points));
    }
    let mut modes = Vec::new();
    for term in split_top_level(spec, '+') {
        let (name, args) = parse_call(term)?;
        if name != "mode" {
            return Err(Error::input(format!(
                "unknown initial-data term `{}` (expected mode(...), table(...) or none)",
                term.trim()
            )));
        }
        match (spatial_dim, args.len()) {
            (1, 2) => modes.push((index(spec, &args[0], n)?, number(spec, &args[1])?)),
            (2, 3) => {
                let (i, j) = (index(spec, &args[0], n)?, index(spec, &args[1], n)?);
                modes.push((i * n + j, number(spec, &args[2])?));
            }
            _ => {
                return Err(Error::input(format!(
                    "`{}` needs {} arguments in dimension {spatial_dim}",
                    term.trim(),
                    spatial_dim + 1
                )))
            }
        }
    }
    Ok(InitialData::Modes(modes))
}

impl InitialData {
    pub fn coefficients(&self, basis: &Basis, grams: &GramSet) -> DVector<f64> {
        let mut g = DVector::zeros(basis.dim());
        match self {
            InitialData::Zero => {}
            InitialData::Modes(modes) => {
                for &(j, c) in modes {
                    g[j] += c;
                }
            }
            InitialData::Table(points) => {
                let interp = |p: &[f64]| {
                    let x = p[0];
                    points
                        .windows(2)
                        .find(|w| x >= w[0].0 && x <= w[1].0)
                        .map(|w| w[0].1 + (w[1].1 - w[0].1) * (x - w[0].0) / (w[1].0 - w[0].0))
                        .unwrap_or(0.0)
                };
                g = project_initial(interp, basis, grams);
            }
        }
        g
    }
}
