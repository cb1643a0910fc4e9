//! Piecewise-constant planar fields on a uniform cell grid centred at the
//! origin, with exact log potentials of the square cells.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Row-major, x fastest.
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(nx: usize, ny: usize, h: f64, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || !(h > 0.0) {
            return Err(Error::InvalidArgument("sampled grid needs nx, ny > 0 and spacing > 0".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::InvalidArgument(format!("sampled grid expects {} values, found {}", nx * ny, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sampled field contains non-finite values".into()));
        }
        Ok(Self { nx, ny, h, values })
    }

    /// Header row `nx,ny,spacing`, then a header-free block of nx·ny values
    /// (any number per line).
    pub fn from_csv_reader(rdr: impl std::io::Read) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(rdr);
        let mut rows = r.records();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")));
        let head = rows.next().ok_or_else(|| Error::Parse("empty sampled-field file".into()))?.map_err(|e| Error::Parse(e.to_string()))?;
        let mut head_vals: Vec<&str> = head.iter().collect();
        // Optional literal header names before the numeric header.
        if head_vals.first().is_some_and(|s| s.eq_ignore_ascii_case("nx")) {
            let nums =
                rows.next().ok_or_else(|| Error::Parse("missing grid header values".into()))?.map_err(|e| Error::Parse(e.to_string()))?;
            let nums: Vec<String> = nums.iter().map(str::to_string).collect();
            return Self::finish(&nums, rows, parse);
        }
        head_vals.retain(|s| !s.is_empty());
        let nums: Vec<String> = head_vals.iter().map(|s| s.to_string()).collect();
        Self::finish(&nums, rows, parse)
    }

    fn finish<R: std::io::Read>(head: &[String], rows: csv::StringRecordsIter<'_, R>, parse: impl Fn(&str) -> Result<f64>) -> Result<Self> {
        if head.len() != 3 {
            return Err(Error::Parse("grid header must be nx, ny, spacing".into()));
        }
        let nx = head[0].parse::<usize>().map_err(|e| Error::Parse(format!("nx: {e}")))?;
        let ny = head[1].parse::<usize>().map_err(|e| Error::Parse(format!("ny: {e}")))?;
        let h = parse(&head[2])?;
        let mut values = Vec::with_capacity(nx * ny);
        for rec in rows {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            for f in rec.iter().filter(|s| !s.is_empty()) {
                values.push(parse(f)?);
            }
        }
        Self::new(nx, ny, h, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5 - 0.5 * self.nx as f64) * self.h, (j as f64 + 0.5 - 0.5 * self.ny as f64) * self.h]
    }

    pub fn half_extent(&self) -> [f64; 2] {
        [0.5 * self.nx as f64 * self.h, 0.5 * self.ny as f64 * self.h]
    }

    pub fn b(&self, x: [f64; 2]) -> f64 {
        let [hx, hy] = self.half_extent();
        if x[0] < -hx || x[0] >= hx || x[1] < -hy || x[1] >= hy {
            return 0.0;
        }
        let i = (((x[0] + hx) / self.h) as usize).min(self.nx - 1);
        let j = (((x[1] + hy) / self.h) as usize).min(self.ny - 1);
        self.values[j * self.nx + i]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h * self.h
    }

    fn cells(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        (0..self.ny).flat_map(move |j| {
            (0..self.nx).filter_map(move |i| {
                let v = self.values[j * self.nx + i];
                (v != 0.0).then(|| (self.cell_center(i, j), v))
            })
        })
    }

    /// φ(x) = (1/2π) ∫ B(y) ln|x - y| d²y, exact for the piecewise-constant field.
    pub fn phi(&self, x: [f64; 2]) -> f64 {
        let h = self.h;
        self.cells().map(|(c, v)| v * square_log_integral(x[0] - c[0], x[1] - c[1], h)).sum::<f64>() / (2.0 * PI)
    }

    /// (∂₁φ, ∂₂φ) at x.
    pub fn grad_phi(&self, x: [f64; 2]) -> [f64; 2] {
        let h = self.h;
        let mut g = [0.0, 0.0];
        for (c, v) in self.cells() {
            let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
            g[0] += v * square_log_gradient(dx, dy, h);
            g[1] += v * square_log_gradient(dy, dx, h);
        }
        [g[0] / (2.0 * PI), g[1] / (2.0 * PI)]
    }
}

fn f_log(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    if r2 == 0.0 {
        return 0.0;
    }
    let t1 = if u == 0.0 { 0.0 } else { u * u * (v / u).atan() };
    let t2 = if v == 0.0 { 0.0 } else { v * v * (u / v).atan() };
    0.5 * (u * v * r2.ln() - 3.0 * u * v + t1 + t2)
}

fn g_log(u: f64, v: f64) -> f64 {
    let r2 = u * u + v * v;
    if r2 == 0.0 {
        return 0.0;
    }
    let t = if u == 0.0 { 0.0 } else { u * (v / u).atan() };
    0.5 * v * r2.ln() + t
}

/// ∫∫ over the square of side h centred at the origin of ln|(dx, dy) - y| d²y.
pub fn square_log_integral(dx: f64, dy: f64, h: f64) -> f64 {
    let (u1, u2) = (dx - 0.5 * h, dx + 0.5 * h);
    let (v1, v2) = (dy - 0.5 * h, dy + 0.5 * h);
    f_log(u2, v2) - f_log(u1, v2) - f_log(u2, v1) + f_log(u1, v1)
}

/// ∂/∂dx of [`square_log_integral`].
pub fn square_log_gradient(dx: f64, dy: f64, h: f64) -> f64 {
    let (u1, u2) = (dx - 0.5 * h, dx + 0.5 * h);
    let (v1, v2) = (dy - 0.5 * h, dy + 0.5 * h);
    g_log(u2, v2) - g_log(u1, v2) - g_log(u2, v1) + g_log(u1, v1)
}
