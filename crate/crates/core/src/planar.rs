//! Two-dimensional Pauli operator (-i∇ - λA)² ± (λg/2)B on a Dirichlet box.
//!
//! Finite-volume five-point scheme on a tensor grid (uniform core, optional
//! geometric grading outside it) with link variables: the form is
//! Σ_edges w_e |U_e ψ_t - ψ_s|² + Σ_nodes m_i V_i |ψ_i|², where
//! U_{s→t} = exp(-iλ∫_s^t A·dl) and w_e is dual-edge length over edge length.
//! The spin term uses the dual-cell average of B, obtained exactly as the
//! circulation of A around the cell. The generalized problem (K, M) is solved
//! through the symmetric matrix M^{-1/2} K M^{-1/2}.

use crate::error::{Error, Result};
use crate::field::{gl_on, FieldProfile, Geometry};
use crate::numerics::eigen::{lowest_eigenpairs, EigenOptions, SparseHermitian};
use crate::spin::Spin;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::io::Write;

/// Tensor-product node grid; the outermost nodes carry the Dirichlet condition.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Core spacing.
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarGridParams {
    /// Spacing of the uniform core.
    pub h: f64,
    /// The box is [-half_width, half_width]².
    pub half_width: f64,
    /// Spacing ratio between consecutive nodes outside the core (1 = uniform).
    pub growth: f64,
    /// Half-width of the uniform core; None means the whole box.
    pub core: Option<f64>,
}

impl PlanarGridParams {
    pub fn uniform(h: f64, half_width: f64) -> Self {
        Self { h, half_width, growth: 1.0, core: None }
    }

    /// Uniform core slightly larger than the field's bounding box, graded
    /// outside it.
    pub fn graded_for(profile: &FieldProfile, h: f64, half_width: f64, growth: f64) -> Self {
        let bx = profile.bounding_box();
        let c = bx.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let core = if c.is_finite() { c + (0.1 * c).max(2.0 * h) } else { half_width };
        Self { h, half_width, growth, core: Some(core.min(half_width)) }
    }
}

fn axis(h: f64, core: f64, half: f64, growth: f64) -> Vec<f64> {
    let k = (core / h).ceil() as i64;
    let mut pos: Vec<f64> = (0..=k).map(|i| i as f64 * h).collect();
    let mut p = k as f64 * h;
    if p < half {
        if growth <= 1.0 {
            let m = ((half - p) / h).ceil() as usize;
            let step = (half - p) / m as f64;
            for i in 1..=m {
                pos.push(p + i as f64 * step);
            }
        } else {
            let mut step = h;
            while p < half {
                step *= growth;
                p += step;
                pos.push(p);
            }
        }
    }
    let mut out: Vec<f64> = pos.iter().skip(1).rev().map(|v| -v).collect();
    out.extend(pos);
    out
}

impl PlanarGrid {
    pub fn new(params: &PlanarGridParams) -> Result<Self> {
        let PlanarGridParams { h, half_width, growth, core } = *params;
        if !(h > 0.0) || !(half_width > h) || !(growth >= 1.0) {
            return Err(Error::InvalidArgument("planar grid needs 0 < h < half_width and growth ≥ 1".into()));
        }
        let core = core.unwrap_or(half_width).min(half_width);
        let a = axis(h, core, half_width, growth);
        Ok(Self { x: a.clone(), y: a, h })
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    /// Number of interior (unknown) nodes.
    pub fn dim(&self) -> usize {
        (self.nx() - 2) * (self.ny() - 2)
    }

    pub fn half_width(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Unknown index of interior node (i, j).
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (nx, ny) = (self.nx(), self.ny());
        (i >= 1 && j >= 1 && i + 1 < nx && j + 1 < ny).then(|| (j - 1) * (nx - 2) + (i - 1))
    }

    /// Interior node coordinates in unknown order.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let mut p = Vec::with_capacity(self.dim());
        for j in 1..self.ny() - 1 {
            for i in 1..self.nx() - 1 {
                p.push([self.x[i], self.y[j]]);
            }
        }
        p
    }

    fn dual_x(&self, i: usize) -> (f64, f64) {
        dual(&self.x, i)
    }

    fn dual_y(&self, j: usize) -> (f64, f64) {
        dual(&self.y, j)
    }

    /// Dual-cell areas of the unknowns.
    pub fn masses(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.dim());
        for j in 1..self.ny() - 1 {
            let (y0, y1) = self.dual_y(j);
            for i in 1..self.nx() - 1 {
                let (x0, x1) = self.dual_x(i);
                m.push((x1 - x0) * (y1 - y0));
            }
        }
        m
    }
}

fn dual(a: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { a[0] } else { 0.5 * (a[i - 1] + a[i]) };
    let hi = if i + 1 == a.len() { a[i] } else { 0.5 * (a[i] + a[i + 1]) };
    (lo, hi)
}

/// Assembled Pauli (or Schrödinger) operator.
#[derive(Debug, Clone)]
pub struct PlanarOperator {
    pub grid: PlanarGrid,
    /// U on edge (i, j) → (i+1, j), indexed j·(nx-1) + i.
    pub links_x: Vec<C64>,
    /// U on edge (i, j) → (i, j+1), indexed j·nx + i.
    pub links_y: Vec<C64>,
    /// Diagonal potential per unknown (the spin term ±(λg/2)B̄ for Pauli).
    pub spin_term: Vec<f64>,
    pub mass: Vec<f64>,
    /// M^{-1/2} K M^{-1/2}.
    pub matrix: SparseHermitian,
}

fn line_integral_x(profile: &FieldProfile, x0: f64, x1: f64, y: f64, order: usize) -> f64 {
    gl_on(x0, x1, order).into_iter().map(|(x, w)| w * profile.a_at([x, y])[0]).sum()
}

fn line_integral_y(profile: &FieldProfile, x: f64, y0: f64, y1: f64, order: usize) -> f64 {
    gl_on(y0, y1, order).into_iter().map(|(y, w)| w * profile.a_at([x, y])[1]).sum()
}

fn rule_order(profile: &FieldProfile) -> usize {
    match profile.geometry() {
        Geometry::Sampled(_) => 2,
        _ => 4,
    }
}

/// Flux of the field through [x0,x1]×[y0,y1] as the circulation of A.
fn cell_flux(profile: &FieldProfile, x0: f64, x1: f64, y0: f64, y1: f64, order: usize) -> f64 {
    line_integral_x(profile, x0, x1, y0, order) + line_integral_y(profile, x1, y0, y1, order)
        - line_integral_x(profile, x0, x1, y1, order)
        - line_integral_y(profile, x0, y0, y1, order)
}

fn check_extent(profile: &FieldProfile, grid: &PlanarGrid) -> Result<()> {
    let rs = profile.support_radius();
    if rs.is_finite() && 2.0 * grid.half_width() < 4.0 * rs {
        return Err(Error::Domain(format!("box extent {:.3} is below 4× the support radius {rs:.3}", 2.0 * grid.half_width())));
    }
    Ok(())
}

/// Link variables U = exp(-iλ∫A·dl) on the x- and y-edges of the grid.
pub fn link_phases(profile: &FieldProfile, grid: &PlanarGrid, lambda: f64) -> (Vec<C64>, Vec<C64>) {
    let order = rule_order(profile);
    let (nx, ny) = (grid.nx(), grid.ny());
    let phase = |theta: f64| C64::from_polar(1.0, -lambda * theta);
    let mut links_x = Vec::with_capacity((nx - 1) * ny);
    for j in 0..ny {
        for i in 0..nx - 1 {
            links_x.push(phase(line_integral_x(profile, grid.x[i], grid.x[i + 1], grid.y[j], order)));
        }
    }
    let mut links_y = Vec::with_capacity(nx * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx {
            links_y.push(phase(line_integral_y(profile, grid.x[i], grid.y[j], grid.y[j + 1], order)));
        }
    }
    (links_x, links_y)
}

/// Assembles H^(±) = (-i∇ - λA)² ± (λg/2)B.
pub fn assemble_pauli(profile: &FieldProfile, g: f64, lambda: f64, spin: Spin, params: &PlanarGridParams) -> Result<PlanarOperator> {
    let grid = PlanarGrid::new(params)?;
    check_extent(profile, &grid)?;
    let order = rule_order(profile);
    let (nx, ny) = (grid.nx(), grid.ny());
    let (links_x, links_y) = link_phases(profile, &grid, lambda);
    let mass = grid.masses();
    let mut spin_term = Vec::with_capacity(grid.dim());
    for j in 1..ny - 1 {
        let (y0, y1) = grid.dual_y(j);
        for i in 1..nx - 1 {
            let (x0, x1) = grid.dual_x(i);
            let b_avg = cell_flux(profile, x0, x1, y0, y1, order) / ((x1 - x0) * (y1 - y0));
            spin_term.push(spin.sign() * 0.5 * lambda * g * b_avg);
        }
    }
    let matrix = build_matrix(&grid, &links_x, &links_y, &spin_term, &mass)?;
    Ok(PlanarOperator { grid, links_x, links_y, spin_term, mass, matrix })
}

/// Assembles -Δ + V with V averaged over each dual cell (4×4 midpoint rule).
pub fn assemble_schrodinger(params: &PlanarGridParams, v: &dyn Fn([f64; 2]) -> f64) -> Result<PlanarOperator> {
    let grid = PlanarGrid::new(params)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let links_x = vec![C64::new(1.0, 0.0); (nx - 1) * ny];
    let links_y = vec![C64::new(1.0, 0.0); nx * (ny - 1)];
    let mass = grid.masses();
    let mut pot = Vec::with_capacity(grid.dim());
    for j in 1..ny - 1 {
        let (y0, y1) = grid.dual_y(j);
        for i in 1..nx - 1 {
            let (x0, x1) = grid.dual_x(i);
            let mut acc = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    acc += v([x0 + (a as f64 + 0.5) * (x1 - x0) / 4.0, y0 + (b as f64 + 0.5) * (y1 - y0) / 4.0]);
                }
            }
            pot.push(acc / 16.0);
        }
    }
    let matrix = build_matrix(&grid, &links_x, &links_y, &pot, &mass)?;
    Ok(PlanarOperator { grid, links_x, links_y, spin_term: pot, mass, matrix })
}

fn build_matrix(grid: &PlanarGrid, links_x: &[C64], links_y: &[C64], pot: &[f64], mass: &[f64]) -> Result<SparseHermitian> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut diag = vec![0.0; grid.dim()];
    let mut trips: Vec<(usize, usize, C64)> = Vec::with_capacity(5 * grid.dim());
    let mut edge = |s: Option<usize>, t: Option<usize>, w: f64, u: C64, diag: &mut Vec<f64>| {
        if let Some(s) = s {
            diag[s] += w;
        }
        if let Some(t) = t {
            diag[t] += w;
        }
        if let (Some(s), Some(t)) = (s, t) {
            let c = -w / (mass[s] * mass[t]).sqrt();
            trips.push((s, t, u * c));
            trips.push((t, s, u.conj() * c));
        }
    };
    for j in 1..ny - 1 {
        let (y0, y1) = grid.dual_y(j);
        for i in 0..nx - 1 {
            let w = (y1 - y0) / (grid.x[i + 1] - grid.x[i]);
            edge(grid.index(i, j), grid.index(i + 1, j), w, links_x[j * (nx - 1) + i], &mut diag);
        }
    }
    for j in 0..ny - 1 {
        for i in 1..nx - 1 {
            let (x0, x1) = grid.dual_x(i);
            let w = (x1 - x0) / (grid.y[j + 1] - grid.y[j]);
            edge(grid.index(i, j), grid.index(i, j + 1), w, links_y[j * nx + i], &mut diag);
        }
    }
    for (s, d) in diag.iter().enumerate() {
        trips.push((s, s, C64::new(d / mass[s] + pot[s], 0.0)));
    }
    SparseHermitian::from_triplets(grid.dim(), trips)
}

impl PlanarOperator {
    /// The same operator after ψ → e^{iχ}ψ, i.e. U_{s→t} → U e^{-i(χ_t - χ_s)}.
    pub fn gauge_transformed(&self, chi: &dyn Fn([f64; 2]) -> f64) -> Result<Self> {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let c = |i: usize, j: usize| chi([g.x[i], g.y[j]]);
        let mut lx = self.links_x.clone();
        for j in 0..ny {
            for i in 0..nx - 1 {
                lx[j * (nx - 1) + i] *= C64::from_polar(1.0, c(i, j) - c(i + 1, j));
            }
        }
        let mut ly = self.links_y.clone();
        for j in 0..ny - 1 {
            for i in 0..nx {
                ly[j * nx + i] *= C64::from_polar(1.0, c(i, j) - c(i, j + 1));
            }
        }
        let matrix = build_matrix(g, &lx, &ly, &self.spin_term, &self.mass)?;
        Ok(Self { links_x: lx, links_y: ly, matrix, ..self.clone() })
    }

    /// Product of link phases counterclockwise around primal cell (i, j).
    pub fn plaquette(&self, i: usize, j: usize) -> C64 {
        let nx = self.grid.nx();
        let bottom = self.links_x[j * (nx - 1) + i];
        let right = self.links_y[j * nx + i + 1];
        let top = self.links_x[(j + 1) * (nx - 1) + i];
        let left = self.links_y[j * nx + i];
        bottom * right * top.conj() * left.conj()
    }

    /// Grid function from a closed-form ψ, in unknown order.
    pub fn sample(&self, f: &dyn Fn([f64; 2]) -> C64) -> Vec<C64> {
        self.grid.points().into_iter().map(f).collect()
    }
}

/// Largest |plaquette - e^{-iλ·flux}| over primal cells with `inside(cell)`,
/// flux taken as λ h_x h_y B at the cell centre.
pub fn plaquette_defect(op: &PlanarOperator, profile: &FieldProfile, lambda: f64, inside: &dyn Fn([f64; 4]) -> bool) -> f64 {
    let g = &op.grid;
    let mut worst: f64 = 0.0;
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            let cell = [g.x[i], g.x[i + 1], g.y[j], g.y[j + 1]];
            if !inside(cell) {
                continue;
            }
            let area = (cell[1] - cell[0]) * (cell[3] - cell[2]);
            let b = profile.b_at([0.5 * (cell[0] + cell[1]), 0.5 * (cell[2] + cell[3])]);
            let expect = C64::from_polar(1.0, -lambda * area * b);
            worst = worst.max((op.plaquette(i, j) - expect).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanarSpectrum {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub negative_count: usize,
    /// Fraction of each eigenvector's mass in the outer 10% of the box.
    pub boundary_leak: Vec<f64>,
    /// ψ values at the unknowns (M-normalized).
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<C64>>,
}

/// The k lowest eigenpairs (k ≤ 20).
pub fn lowest_spectrum(op: &PlanarOperator, k: usize, opts: &EigenOptions) -> Result<PlanarSpectrum> {
    if k == 0 || k > 20 {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..=20")));
    }
    let pairs = lowest_eigenpairs(&op.matrix, k, opts)?;
    let half = op.grid.half_width();
    let outer: Vec<bool> = op.grid.points().iter().map(|p| p[0].abs() > 0.9 * half || p[1].abs() > 0.9 * half).collect();
    let mut out = PlanarSpectrum { eigenvalues: vec![], residuals: vec![], negative_count: 0, boundary_leak: vec![], eigenvectors: vec![] };
    for p in pairs {
        let psi: Vec<C64> = p.vector.iter().zip(&op.mass).map(|(v, m)| v / m.sqrt()).collect();
        let leak: f64 = p.vector.iter().zip(&outer).filter(|(_, o)| **o).map(|(v, _)| v.norm_sqr()).sum();
        if p.value < -(1e-10f64).max(10.0 * p.residual) {
            out.negative_count += 1;
        }
        out.eigenvalues.push(p.value);
        out.residuals.push(p.residual);
        out.boundary_leak.push(leak);
        out.eigenvectors.push(psi);
    }
    Ok(out)
}

fn check_len(op: &PlanarOperator, psi: &[C64]) -> Result<()> {
    if psi.len() != op.grid.dim() {
        return Err(Error::Contract(format!("grid function has {} entries, operator has {}", psi.len(), op.grid.dim())));
    }
    Ok(())
}

/// ⟨ψ, Hψ⟩ / ⟨ψ, ψ⟩ in the dual-cell inner product.
pub fn quadratic_form(op: &PlanarOperator, psi: &[C64]) -> Result<f64> {
    check_len(op, psi)?;
    let v: Vec<C64> = psi.iter().zip(&op.mass).map(|(p, m)| p * m.sqrt()).collect();
    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero grid function".into()));
    }
    Ok(op.matrix.quadratic_form(&v) / norm)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RealReduction {
    pub full: f64,
    pub reduced: f64,
    pub gap: f64,
}

/// Compares the gauge-coupled form with that of -Δ + λ²A² ± (λg/2)B on a
/// real ψ; the mixed terms cancel in the continuum.
pub fn real_reduction_check(profile: &FieldProfile, op: &PlanarOperator, lambda: f64, psi: &[C64]) -> Result<RealReduction> {
    check_len(op, psi)?;
    if psi.iter().any(|z| z.im != 0.0) {
        return Err(Error::Contract("real-reduction identity needs a real-valued ψ".into()));
    }
    let full = quadratic_form(op, psi)?;
    let g = &op.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let val = |i: usize, j: usize| g.index(i, j).map_or(0.0, |s| psi[s].re);
    let mut form = 0.0;
    for j in 1..ny - 1 {
        let (y0, y1) = g.dual_y(j);
        for i in 0..nx - 1 {
            let w = (y1 - y0) / (g.x[i + 1] - g.x[i]);
            form += w * (val(i + 1, j) - val(i, j)).powi(2);
        }
    }
    for j in 0..ny - 1 {
        for i in 1..nx - 1 {
            let (x0, x1) = g.dual_x(i);
            let w = (x1 - x0) / (g.y[j + 1] - g.y[j]);
            form += w * (val(i, j + 1) - val(i, j)).powi(2);
        }
    }
    let mut norm = 0.0;
    for (s, p) in g.points().iter().enumerate() {
        let a = profile.a_at(*p);
        let q = psi[s].re;
        form += op.mass[s] * (lambda * lambda * (a[0] * a[0] + a[1] * a[1]) + op.spin_term[s]) * q * q;
        norm += op.mass[s] * q * q;
    }
    let reduced = form / norm;
    Ok(RealReduction { full, reduced, gap: (full - reduced).abs() })
}

/// Writes |ψ|² on the uniform core as a CSV grid: header `nx,ny,h`, its
/// values, then ny rows of nx values (row-major, x fastest).
pub fn write_density_csv(op: &PlanarOperator, psi: &[C64], out: &mut dyn Write) -> Result<()> {
    check_len(op, psi)?;
    let g = &op.grid;
    let h = g.h;
    let uniform = |a: &[f64], i: usize| {
        i >= 1 && i + 1 < a.len() && ((a[i] - a[i - 1]) - h).abs() < 1e-9 * h && ((a[i + 1] - a[i]) - h).abs() < 1e-9 * h
    };
    let xs: Vec<usize> = (1..g.nx() - 1).filter(|&i| uniform(&g.x, i)).collect();
    let ys: Vec<usize> = (1..g.ny() - 1).filter(|&j| uniform(&g.y, j)).collect();
    writeln!(out, "nx,ny,h")?;
    writeln!(out, "{},{},{}", xs.len(), ys.len(), h)?;
    for &j in &ys {
        let row: Vec<String> = xs.iter().map(|&i| format!("{:.12e}", g.index(i, j).map_or(0.0, |s| psi[s].norm_sqr()))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{builtin, RadialShape};

    fn disk1() -> FieldProfile {
        FieldProfile::radial("disk", RadialShape::Piecewise { edges: vec![1.0], values: vec![1.0] })
    }

    #[test]
    fn graded_axis_is_symmetric_and_reaches_the_box() {
        let g = PlanarGrid::new(&PlanarGridParams { h: 0.1, half_width: 10.0, growth: 1.1, core: Some(1.0) }).unwrap();
        assert!(g.x[0] <= -10.0 && *g.x.last().unwrap() >= 10.0);
        for (a, b) in g.x.iter().zip(g.x.iter().rev()) {
            assert!((a + b).abs() < 1e-12);
        }
        assert!(g.x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hermitian_and_plaquettes() {
        let p = disk1();
        let op = assemble_pauli(&p, 2.0, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.1, 2.5)).unwrap();
        assert!(op.matrix.hermiticity_defect() < 1e-12);
        let inside = |c: [f64; 4]| c.iter().all(|v| v.abs() < 0.7);
        assert!(plaquette_defect(&op, &p, 1.0, &inside) < 1e-10);
    }

    #[test]
    fn extent_is_checked() {
        let p = builtin("uniform-disk").unwrap();
        assert!(matches!(assemble_pauli(&p, 2.0, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.2, 3.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn free_laplacian_ground_state() {
        let zero = builtin("zero").unwrap();
        let half = 3.0;
        let op = assemble_pauli(&zero, 2.0, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.1, half)).unwrap();
        let s = lowest_spectrum(&op, 1, &EigenOptions::default()).unwrap();
        let h = 0.1;
        let one = (2.0 - 2.0 * (std::f64::consts::PI * h / (2.0 * half)).cos()) / (h * h);
        assert!((s.eigenvalues[0] - 2.0 * one).abs() < 1e-9);
    }

    #[test]
    fn gauge_transformation_preserves_spectrum() {
        let p = disk1();
        let op = assemble_pauli(&p, 2.5, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.25, 4.0)).unwrap();
        let t = op.gauge_transformed(&|x| (1.3 * x[0] - 0.4 * x[1] * x[1]).sin() * 3.0).unwrap();
        let a = lowest_spectrum(&op, 4, &EigenOptions::default()).unwrap();
        let b = lowest_spectrum(&t, 4, &EigenOptions::default()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn real_reduction_rejects_complex_and_is_exact_without_field() {
        let zero = builtin("zero").unwrap();
        let op = assemble_pauli(&zero, 2.0, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.2, 3.0)).unwrap();
        let bump = op.sample(&|x| C64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0));
        assert!(real_reduction_check(&zero, &op, 1.0, &bump).unwrap().gap < 1e-12);
        let wave = op.sample(&|x| C64::from_polar((-(x[0] * x[0] + x[1] * x[1])).exp(), x[0]));
        assert!(matches!(real_reduction_check(&zero, &op, 1.0, &wave), Err(Error::Contract(_))));
    }

    #[test]
    fn density_dump_format() {
        let zero = builtin("zero").unwrap();
        let op = assemble_pauli(&zero, 2.0, 1.0, Spin::Minus, &PlanarGridParams::uniform(0.5, 2.0)).unwrap();
        let psi = vec![C64::new(1.0, 0.0); op.grid.dim()];
        let mut buf = Vec::new();
        write_density_csv(&op, &psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("nx,ny,h"));
        assert_eq!(lines.next(), Some("7,7,0.5"));
        assert_eq!(lines.count(), 7);
    }
}
