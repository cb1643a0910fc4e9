//! Partial-wave Pauli operators on L²(R⁺, r dr):
//! H = -ψ'' - ψ'/r + V_ℓ ψ with V_ℓ = (λA - ℓ/r)² ± (λg/2)B.
//!
//! Discretization is the conforming P1 scheme for the form
//! ∫ψ'² r dr + ∫Vψ² r dr, with elements linear in ln r (linear in r on the
//! first element) and lumped mass and potential over dual cells. The pencil
//! is symmetric tridiagonal; eigenvalues come from Sturm bisection. Masses are
//! kept as logarithms so that exponentially wide weakly bound states can be
//! resolved without overflow.

use crate::error::{Error, Result};
use crate::field::{a_squared_integral, flux, vector_potential_radial, FieldProfile, RadialShape};
use crate::numerics::eigen::{pencil_eigenvalues_in, pencil_eigenvector};
use crate::numerics::quadrature::gauss_legendre;
use crate::spin::Spin;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Uniform,
    LogStretched,
}

#[derive(Debug, Clone)]
pub struct RadialOperatorSpec {
    pub profile: FieldProfile,
    pub g: f64,
    pub lambda: f64,
    pub ell: i32,
    pub spin: Spin,
    pub r_max: f64,
    pub n: usize,
    pub grid_kind: GridKind,
    /// Re-solve on a doubled domain and report the largest relative change.
    pub check_doubling: bool,
}

impl RadialOperatorSpec {
    /// Defaults: r_max = max(4·support, 40) (400 for non-compact fields),
    /// widened for zero-flux s-waves to 10 e^{-2/u_pred}, 4000 nodes on a
    /// log-stretched grid.
    pub fn new(profile: &FieldProfile, g: f64, lambda: f64, ell: i32, spin: Spin) -> Self {
        let s = profile.support_radius();
        let mut r_max = if s.is_finite() { (4.0 * s).max(40.0) } else { 400.0 };
        if ell == 0 && g > 2.0 && lambda > 0.0 && s.is_finite() && flux(profile).is_ok_and(|f| f.f == 0.0) {
            if let Ok(a2) = a_squared_integral(profile) {
                let u = predicted_u(lambda, g, a2 / (2.0 * PI));
                r_max = r_max.max((10f64.ln() - 2.0 / u).min(600.0).exp());
            }
        }
        Self { profile: profile.clone(), g, lambda, ell, spin, r_max, n: 4000, grid_kind: GridKind::LogStretched, check_doubling: false }
    }

    fn validate(&self) -> Result<&RadialShape> {
        let shape = self.profile.radial_shape()?;
        if !(self.g > 0.0) || !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument("need g > 0 and finite λ ≥ 0".into()));
        }
        if self.n < 200 {
            return Err(Error::InvalidArgument(format!("need n ≥ 200 grid points, got {}", self.n)));
        }
        let s = self.profile.support_radius();
        if s.is_finite() && self.r_max < 4.0 * s {
            return Err(Error::InvalidArgument(format!("r_max = {} is below 4× the support radius {s}", self.r_max)));
        }
        Ok(shape)
    }

    fn grid(&self, shape: &RadialShape) -> Result<RadialGrid> {
        let breaks = shape.breakpoints();
        match self.grid_kind {
            GridKind::Uniform => RadialGrid::uniform(self.r_max, self.n, &breaks),
            GridKind::LogStretched => {
                let core = match shape.support() {
                    Some(s) => 1.5 * s,
                    None => 6.0 * shape.scale(),
                }
                .min(self.r_max);
                let n_core = (0.7 * self.n as f64) as usize;
                let h = core / n_core as f64;
                let n_tail = self.n - n_core;
                let delta = (self.r_max / core).ln() / n_tail.max(1) as f64;
                RadialGrid::graded(h, core, &breaks, delta, self.r_max.ln())
            }
        }
    }
}

/// Nodes 0 = r_0 < r_1 < … < r_{n-1} = r_max.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    /// ln r (−∞ at the origin).
    pub rho: Vec<f64>,
}

impl RadialGrid {
    fn from_nodes(r: Vec<f64>) -> Result<Self> {
        if r.len() < 3 || r[0] != 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("radial grid must start at 0 and increase".into()));
        }
        let rho = r.iter().map(|x| x.ln()).collect();
        Ok(Self { r, rho })
    }

    /// Close to uniform spacing r_max/(n-1), with every breakpoint a node.
    pub fn uniform(r_max: f64, n: usize, breaks: &[f64]) -> Result<Self> {
        let h = r_max / (n - 1) as f64;
        Self::from_nodes(segmented(0.0, r_max, h, breaks))
    }

    /// Spacing h on [0, core] (breakpoints as nodes), then geometric growth by
    /// e^delta per node until ln r reaches ln_r_max.
    pub fn graded(h: f64, core: f64, breaks: &[f64], delta: f64, ln_r_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(delta > 0.0) || !(core > 0.0) {
            return Err(Error::InvalidArgument("graded grid needs positive h, core and delta".into()));
        }
        let mut r = segmented(0.0, core, h, breaks);
        let rho0 = core.ln();
        if ln_r_max > rho0 {
            let m = ((ln_r_max - rho0) / delta).ceil().max(1.0) as usize;
            let step = (ln_r_max - rho0) / m as f64;
            let mut next_break = breaks.iter().copied().filter(|&b| b > core).peekable();
            for k in 1..=m {
                let x = (rho0 + k as f64 * step).exp();
                while let Some(&b) = next_break.peek() {
                    if b < x {
                        if b > *r.last().expect("nonempty") * (1.0 + 1e-9) {
                            r.push(b);
                        }
                        next_break.next();
                    } else {
                        break;
                    }
                }
                r.push(x);
            }
        }
        Self::from_nodes(r)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("nonempty grid")
    }

    /// Dual cell [a, b] of node i.
    fn dual(&self, i: usize) -> (f64, f64) {
        let a = if i == 0 { 0.0 } else { 0.5 * (self.r[i - 1] + self.r[i]) };
        let b = if i + 1 == self.r.len() { self.r[i] } else { 0.5 * (self.r[i] + self.r[i + 1]) };
        (a, b)
    }
}

fn segmented(a: f64, b: f64, h: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.push(b);
    let mut lo = a;
    for hi in inner {
        if hi - lo < 1e-12 * b {
            continue;
        }
        let m = ((hi - lo) / h).round().max(1.0) as usize;
        for k in 1..=m {
            pts.push(lo + (hi - lo) * k as f64 / m as f64);
        }
        lo = hi;
    }
    pts
}

/// Symmetric tridiagonal pencil (K + V, M) over the interior unknowns.
#[derive(Debug, Clone)]
pub struct RadialPencil {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// ln of the lumped mass ∫_cell r dr.
    pub ln_mass: Vec<f64>,
    /// Grid index of the first unknown (0 for ℓ = 0, 1 otherwise).
    pub first: usize,
    pub grid: RadialGrid,
}

impl RadialPencil {
    /// `cell_potential(a, b)` must return ∫_a^b V r dr, including ℓ²/r².
    pub fn assemble(grid: RadialGrid, ell: i32, cell_potential: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.len();
        let first = if ell == 0 { 0 } else { 1 };
        let coupling: Vec<f64> = (0..n - 1).map(|e| if grid.r[e] == 0.0 { 0.5 } else { 1.0 / (grid.rho[e + 1] - grid.rho[e]) }).collect();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n);
        let mut ln_mass = Vec::with_capacity(n);
        for i in first..n - 1 {
            let (a, b) = grid.dual(i);
            let mut d = coupling[i];
            if i > 0 {
                d += coupling[i - 1];
            }
            d += cell_potential(a, grid.r[i]) + cell_potential(grid.r[i], b);
            diag.push(d);
            if i + 1 < n - 1 {
                off.push(-coupling[i]);
            }
            ln_mass.push((b - a).ln() + (b + a).ln() - 2f64.ln());
        }
        Self { diag, off, ln_mass, first, grid }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues below -e^{2t}.
    pub fn count_below_neg_exp(&self, t: f64) -> usize {
        let mut count = 0;
        let mut q = 0.0;
        for i in 0..self.diag.len() {
            let em = (self.ln_mass[i] + 2.0 * t).min(700.0).exp();
            let prev = if i == 0 {
                0.0
            } else {
                let qq = if q == 0.0 { f64::MIN_POSITIVE } else { q };
                self.off[i - 1] * self.off[i - 1] / qq
            };
            q = self.diag[i] + em - prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn plain_mass(&self) -> Result<Vec<f64>> {
        let m: Vec<f64> = self.ln_mass.iter().map(|l| l.exp()).collect();
        if m.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::Range {
                msg: "lumped mass not representable; use the log-scaled search".into(),
                value: *self.ln_mass.last().unwrap_or(&0.0),
            });
        }
        Ok(m)
    }
}

/// Eigenpairs below zero of an assembled pencil.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub negative_count: usize,
    /// Fraction of each eigenvector's mass in r > 0.9 r_max.
    pub boundary_leak: Vec<f64>,
    /// Set when some reported negative eigenvector has boundary_leak ≥ 1e-4.
    pub truncation_warning: bool,
    /// Largest relative change of the negative eigenvalues under r_max → 2 r_max.
    pub doubling_change: Option<f64>,
    #[serde(skip)]
    pub r: Vec<f64>,
}

/// Negative eigenvalues of the pencil with eigenvectors and diagnostics.
pub fn negative_spectrum(p: &RadialPencil) -> Result<SpectralResult> {
    let m = p.plain_mass()?;
    let (d, o) = (&p.diag, &p.off);
    let n = d.len();
    let mut lo = 0.0f64;
    for i in 0..n {
        let mut rad = 0.0;
        if i > 0 {
            rad += o[i - 1].abs();
        }
        if i + 1 < n {
            rad += o[i].abs();
        }
        lo = lo.min((d[i] - rad) / m[i]);
    }
    let hi = -1e-10;
    if lo >= hi {
        return Ok(SpectralResult {
            eigenvalues: vec![],
            eigenvectors: vec![],
            residuals: vec![],
            negative_count: 0,
            boundary_leak: vec![],
            truncation_warning: false,
            doubling_change: None,
            r: p.grid.r[p.first..p.first + n].to_vec(),
        });
    }
    let values = pencil_eigenvalues_in(d, o, &m, lo * 1.01 - 1e-12, hi, 1e-14);
    let r = &p.grid.r[p.first..p.first + n];
    let r_max = p.grid.r_max();
    let mut out = SpectralResult {
        eigenvalues: vec![],
        eigenvectors: vec![],
        residuals: vec![],
        negative_count: 0,
        boundary_leak: vec![],
        truncation_warning: false,
        doubling_change: None,
        r: r.to_vec(),
    };
    for e in values {
        let x = pencil_eigenvector(d, o, &m, e);
        let mut res2 = 0.0;
        for i in 0..n {
            let mut y = (d[i] - e * m[i]) * x[i];
            if i > 0 {
                y += o[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += o[i] * x[i + 1];
            }
            res2 += y * y / m[i];
        }
        let res = res2.sqrt();
        let leak: f64 = (0..n).filter(|&i| r[i] > 0.9 * r_max).map(|i| m[i] * x[i] * x[i]).sum();
        if e < -(1e-10f64).max(10.0 * res) {
            out.negative_count += 1;
            if leak >= 1e-4 {
                out.truncation_warning = true;
            }
        }
        out.eigenvalues.push(e);
        out.eigenvectors.push(x);
        out.residuals.push(res);
        out.boundary_leak.push(leak);
    }
    Ok(out)
}

/// V_ℓ(r) = (λA(r) - ℓ/r)² ± (λg/2)B(r).
pub fn effective_potential(spec: &RadialOperatorSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let a = vector_potential_radial(&spec.profile, r)?;
    let b = spec.profile.b_radial(r)?;
    Ok((spec.lambda * a - spec.ell as f64 / r).powi(2) + spec.spin.sign() * 0.5 * spec.lambda * spec.g * b)
}

/// ∫_p^q V_ℓ r dr for a radial Pauli channel; the spin term is exact via Φ.
fn pauli_cell(shape: &RadialShape, g: f64, lambda: f64, ell: i32, spin: Spin) -> impl Fn(f64, f64) -> f64 + '_ {
    let (x, w) = gauss_legendre(6);
    let support = shape.support();
    let f_tot = shape.total_enclosed();
    let l = ell as f64;
    move |p: f64, q: f64| {
        if q <= p {
            return 0.0;
        }
        let spin_part = spin.sign() * 0.5 * lambda * g * (shape.enclosed(q) - shape.enclosed(p));
        let orbital = match support {
            Some(s) if p >= s => (lambda * f_tot - l).powi(2) * (q / p).ln(),
            _ => {
                let (c, hw) = (0.5 * (p + q), 0.5 * (q - p));
                x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| {
                        let r = c + hw * xi;
                        wi * hw * (lambda * shape.enclosed(r) - l).powi(2) / r
                    })
                    .sum()
            }
        };
        spin_part + orbital
    }
}

/// Pencil of a radial Pauli channel on an explicit grid.
pub fn assemble_channel(spec: &RadialOperatorSpec, grid: RadialGrid) -> Result<RadialPencil> {
    let shape = spec.profile.radial_shape()?;
    Ok(RadialPencil::assemble(grid, spec.ell, pauli_cell(shape, spec.g, spec.lambda, spec.ell, spec.spin)))
}

/// Negative spectrum of H_ℓ^(±)(λ) with Dirichlet condition at r_max.
pub fn radial_bound_states(spec: &RadialOperatorSpec) -> Result<SpectralResult> {
    let shape = spec.validate()?;
    let grid = spec.grid(shape)?;
    let mut res = negative_spectrum(&assemble_channel(spec, grid)?)?;
    if spec.check_doubling {
        let mut big = spec.clone();
        big.r_max *= 2.0;
        big.check_doubling = false;
        if big.grid_kind == GridKind::Uniform {
            big.n = 2 * big.n - 1;
        } else {
            big.n +=
                (0.3 * spec.n as f64 * 2f64.ln() / (spec.r_max / (1.5 * shape.support().unwrap_or(4.0))).ln().max(0.1)).ceil() as usize;
        }
        let other = radial_bound_states(&big)?;
        let k = res.negative_count.min(other.negative_count);
        let change = (0..k).map(|i| ((res.eigenvalues[i] - other.eigenvalues[i]) / res.eigenvalues[i]).abs()).fold(0.0, f64::max);
        res.doubling_change = Some(if res.negative_count != other.negative_count { f64::INFINITY } else { change });
    }
    Ok(res)
}

/// Negative spectrum of -Δ + V restricted to angular momentum ℓ, for a radial
/// potential with jumps only at `breaks`.
pub fn schrodinger_bound_states(v: &dyn Fn(f64) -> f64, breaks: &[f64], ell: i32, grid: RadialGrid) -> Result<SpectralResult> {
    let _ = breaks;
    let (x, w) = gauss_legendre(6);
    let l2 = (ell * ell) as f64;
    let cell = |p: f64, q: f64| -> f64 {
        if q <= p {
            return 0.0;
        }
        let (c, hw) = (0.5 * (p + q), 0.5 * (q - p));
        let pot: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let r = c + hw * xi;
                wi * hw * v(r) * r
            })
            .sum();
        let cent = if l2 == 0.0 { 0.0 } else { l2 * (q / p).ln() };
        pot + cent
    };
    negative_spectrum(&RadialPencil::assemble(grid, ell, cell))
}

/// Number of negative eigenvalues summed over the given channels.
pub fn total_negative_count(profile: &FieldProfile, g: f64, lambda: f64, spin: Spin, ells: &[i32]) -> Result<usize> {
    let mut total = 0;
    for &ell in ells {
        total += radial_bound_states(&RadialOperatorSpec::new(profile, g, lambda, ell, spin))?.negative_count;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct CentrifugalScan {
    pub ell: i32,
    pub rows: Vec<(f64, usize)>,
    /// Smallest scanned λ with a bound state such that all smaller scanned λ have none.
    pub lambda_star: Option<f64>,
}

pub fn centrifugal_protection_scan(profile: &FieldProfile, g: f64, ell: i32, spin: Spin, lambdas: &[f64]) -> Result<CentrifugalScan> {
    if ell == 0 {
        return Err(Error::InvalidArgument("centrifugal scan needs ℓ ≠ 0".into()));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len());
    for &lambda in &sorted {
        let count =
            if lambda == 0.0 { 0 } else { radial_bound_states(&RadialOperatorSpec::new(profile, g, lambda, ell, spin))?.negative_count };
        rows.push((lambda, count));
    }
    let lambda_star = rows.iter().find(|r| r.1 > 0).map(|r| r.0);
    Ok(CentrifugalScan { ell, rows, lambda_star })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakCouplingRow {
    pub lambda: f64,
    pub spin: Spin,
    /// ln(-ε); carried in log form because ε itself may underflow.
    pub ln_neg_energy: Option<f64>,
    pub u: Option<f64>,
    pub u_pred: f64,
    pub ratio: Option<f64>,
    /// ln r_max of the domain used.
    pub ln_r_max: Option<f64>,
}

impl WeakCouplingRow {
    /// ε as f64 (0 when it underflows).
    pub fn energy(&self) -> Option<f64> {
        self.ln_neg_energy.map(|l| -l.exp())
    }

    /// ε in scientific notation, exact even below the f64 range.
    pub fn energy_text(&self) -> String {
        match self.ln_neg_energy {
            None => String::new(),
            Some(l) => {
                let d = l / std::f64::consts::LN_10;
                let mut e = d.floor();
                let mut mant = 10f64.powf(d - e);
                if mant >= 9.9999999995 {
                    mant /= 10.0;
                    e += 1.0;
                }
                format!("-{mant:.9}e{}", e as i64)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakCouplingReport {
    pub g: f64,
    /// ∫A² r dr.
    pub a2_radial: f64,
    pub rows: Vec<WeakCouplingRow>,
}

/// Largest admissible |ln(-ε)|: κ = e^{t} must stay a normal double.
pub const MAX_LN_ENERGY: f64 = 1380.0;

/// u_pred(λ) = -λ²(g² - 4)/4 · ∫A² r dr.
pub fn predicted_u(lambda: f64, g: f64, a2_radial: f64) -> f64 {
    -lambda * lambda * (g * g - 4.0) / 4.0 * a2_radial
}

/// s-wave ground energies ε(λ) and u = 2/ln(-ε) against the prediction.
pub fn weak_coupling_sweep(profile: &FieldProfile, g: f64, spin: Spin, lambdas: &[f64]) -> Result<WeakCouplingReport> {
    let shape = profile.radial_shape()?;
    if flux(profile)?.f != 0.0 {
        return Err(Error::Regime("weak-coupling sweep needs a zero-flux profile".into()));
    }
    if !(g > 2.0) {
        return Err(Error::Regime(format!("weak-coupling sweep needs g > 2, got {g}")));
    }
    let a2 = a_squared_integral(profile)? / (2.0 * PI);
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let u_pred = predicted_u(lambda, g, a2);
        if lambda == 0.0 {
            rows.push(WeakCouplingRow { lambda, spin, ln_neg_energy: None, u: None, u_pred, ratio: None, ln_r_max: None });
            continue;
        }
        if 2.0 / u_pred.abs() > MAX_LN_ENERGY {
            return Err(Error::Range {
                msg: format!("predicted |ln(-ε)| exceeds {MAX_LN_ENERGY} at λ = {lambda}; increase g or λ"),
                value: 2.0 / u_pred.abs(),
            });
        }
        let (t, ln_r_max) = s_wave_ground_log(shape, g, lambda, spin, -1.6 / u_pred + 8.0)?;
        if 2.0 * t.abs() > MAX_LN_ENERGY {
            return Err(Error::Range {
                msg: format!("|ln(-ε)| exceeds {MAX_LN_ENERGY} at λ = {lambda}; increase g or λ"),
                value: 2.0 * t.abs(),
            });
        }
        let u = 1.0 / t;
        rows.push(WeakCouplingRow {
            lambda,
            spin,
            ln_neg_energy: Some(2.0 * t),
            u: Some(u),
            u_pred,
            ratio: Some(u / u_pred),
            ln_r_max: Some(ln_r_max),
        });
    }
    Ok(WeakCouplingReport { g, a2_radial: a2, rows })
}

/// ln κ of the s-wave ground state ε = -κ², growing the domain until the
/// state sits well inside it. Returns (ln κ, ln r_max).
fn s_wave_ground_log(shape: &RadialShape, g: f64, lambda: f64, spin: Spin, ln_r_max0: f64) -> Result<(f64, f64)> {
    let core = match shape.support() {
        Some(s) => (2.0 * s).max(4.0),
        None => return Err(Error::Regime("weak-coupling search needs a compactly supported field".into())),
    };
    let mut ln_r_max = ln_r_max0.max(core.ln() + 8.0);
    loop {
        if ln_r_max > 705.0 {
            return Err(Error::Range { msg: "bound state wider than any representable domain; increase g or λ".into(), value: ln_r_max });
        }
        let grid = RadialGrid::graded(0.01, core, &shape.breakpoints(), 0.02, ln_r_max)?;
        let p = RadialPencil::assemble(grid, 0, pauli_cell(shape, g, lambda, 0, spin));
        let t_lo = -ln_r_max + 4.0;
        if p.count_below_neg_exp(t_lo) == 0 {
            ln_r_max = 1.5 * ln_r_max + 8.0;
            continue;
        }
        let mut t_hi = 2.0;
        while p.count_below_neg_exp(t_hi) > 0 {
            t_hi += 4.0;
            if t_hi > 300.0 {
                return Err(Error::Convergence { what: "weak-coupling bracket".into(), residual: t_hi });
            }
        }
        let (mut a, mut b) = (t_lo, t_hi);
        while b - a > 1e-13 * a.abs().max(1.0) {
            let c = 0.5 * (a + b);
            if p.count_below_neg_exp(c) > 0 {
                a = c
            } else {
                b = c
            }
        }
        let t = 0.5 * (a + b);
        if t - t_lo < 4.0 {
            ln_r_max = 1.5 * ln_r_max + 8.0;
            continue;
        }
        return Ok((t, ln_r_max));
    }
}
