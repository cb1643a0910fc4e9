//! Birman–Schwinger kernel |V|^{1/2} R₀(κ) V^{1/2}, R₀ = (1/2π)K₀(κ|x-y|),
//! bound states by bisection in κ, and the small-coupling expansion
//! u(λ) = 1/ln κ = c1 λ + c2 λ² of V(λ) = λV₁ + λ²V₂:
//!
//!   c1 = (1/2π)∫V₁,
//!   c2 = (1/2π)∫V₂ + (1/4π²)[(γ - ln 2)(∫V₁)² + ∬V₁ ln|x-y| V₁],
//!
//! with a bound state -e^{2/u} iff u < 0.

use crate::error::{Error, Result};
use crate::field::{a_squared_integral, a_squared_integral_polar, decay_check, flux, log_pair_integral, FieldProfile};
use crate::numerics::eigen::largest_eigenvalue_real;
use crate::numerics::quadrature::{log_selfterm, Layout, QuadratureGrid};
use crate::numerics::special::{k0, k01, EULER_GAMMA};
use crate::spin::Spin;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Exponent of the regularity norms L^{1+δ} and L¹((1+|x|^δ)d²x).
pub const REGULARITY_DELTA: f64 = 0.1;

/// |∫V₁| below this fraction of ∫|V₁| selects the zero-mean regime.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// Largest node count for the dense inertia path of sign-changing potentials.
const DENSE_BS_LIMIT: usize = 1500;

/// Cells per half-width of the square grid for planar log-pair sums.
const LOG_PAIR_CELLS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityWitness {
    pub delta: f64,
    /// max over V₁, V₂ of ∫|V|^{1+δ}.
    pub l_one_plus_delta: f64,
    /// max over V₁, V₂ of ∫|V|(1+|x|^δ).
    pub weighted_l1: f64,
}

/// Where a family came from; Pauli families get their integrals from the
/// field model.
#[derive(Debug, Clone)]
pub struct PauliOrigin {
    pub profile: FieldProfile,
    pub g: f64,
    pub spin: Spin,
}

/// V(λ) = λV₁ + λ²V₂ (+ a remainder bounded by λ³V₃).
#[derive(Clone)]
pub struct PotentialFamily {
    pub name: String,
    pub v1: ScalarField,
    pub v2: ScalarField,
    pub v3: Option<ScalarField>,
    /// Rotationally symmetric about the origin (functions then depend on |x| only).
    pub radial: bool,
    /// Radii where V₁ or V₂ jump (radial families).
    pub breaks: Vec<f64>,
    /// V₁, V₂ are negligible beyond this radius.
    pub extent: f64,
    pub regularity: RegularityWitness,
    pub pauli: Option<PauliOrigin>,
}

impl std::fmt::Debug for PotentialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialFamily")
            .field("name", &self.name)
            .field("radial", &self.radial)
            .field("extent", &self.extent)
            .field("regularity", &self.regularity)
            .finish_non_exhaustive()
    }
}

/// Quadrature over the disk of radius `extent`: radial Gauss–Legendre for
/// radial families, a polar product rule otherwise.
fn family_grid(radial: bool, breaks: &[f64], extent: f64) -> Result<QuadratureGrid> {
    let mut br = vec![0.0];
    br.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < extent));
    br.push(extent);
    br.sort_by(f64::total_cmp);
    br.dedup();
    if radial {
        QuadratureGrid::radial(&br, 64, 8)
    } else {
        QuadratureGrid::polar(&br, 48, 8, 128)
    }
}

fn integrate_family(grid: &QuadratureGrid, radial: bool, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let s = grid.integrate(f);
    if radial {
        2.0 * PI * s
    } else {
        s
    }
}

fn witness(radial: bool, breaks: &[f64], extent: f64, fs: &[&ScalarField]) -> Result<RegularityWitness> {
    let d = REGULARITY_DELTA;
    let inner = family_grid(radial, breaks, extent)?;
    let shell = if radial {
        QuadratureGrid::radial(&[extent, 4.0 * extent], 64, 8)?
    } else {
        QuadratureGrid::polar(&[extent, 4.0 * extent], 32, 8, 128)?
    };
    let (mut lp, mut wl) = (0.0f64, 0.0f64);
    for f in fs {
        let weighted = |x: [f64; 2]| f(x).abs() * (1.0 + x[0].hypot(x[1]).powf(d));
        let a = integrate_family(&inner, radial, |x| f(x).abs().powf(1.0 + d));
        let b = integrate_family(&inner, radial, weighted);
        let tail = integrate_family(&shell, radial, weighted);
        if !(a.is_finite() && b.is_finite()) || tail > 1e-6 * b.max(1e-300) {
            return Err(Error::Regularity(format!(
                "potential not negligible beyond radius {extent}: weighted L¹ mass {tail:.3e} in [R, 4R] against {b:.3e} inside"
            )));
        }
        lp = lp.max(a);
        wl = wl.max(b);
    }
    Ok(RegularityWitness { delta: d, l_one_plus_delta: lp, weighted_l1: wl })
}

impl PotentialFamily {
    /// Radial family from V₁(r), V₂(r).
    pub fn radial(
        name: impl Into<String>,
        v1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        v2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breaks: &[f64],
        extent: f64,
    ) -> Result<Self> {
        let v1: ScalarField = Arc::new(move |x: [f64; 2]| v1(x[0].hypot(x[1])));
        let v2: ScalarField = Arc::new(move |x: [f64; 2]| v2(x[0].hypot(x[1])));
        Self::build(name.into(), v1, v2, true, breaks.to_vec(), extent, None)
    }

    /// Planar family from V₁(x), V₂(x).
    pub fn planar(
        name: impl Into<String>,
        v1: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        v2: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        extent: f64,
    ) -> Result<Self> {
        Self::build(name.into(), Arc::new(v1), Arc::new(v2), false, vec![], extent, None)
    }

    /// V₁ = ∓(g/2)B (spin ∓), V₂ = |A|²; needs zero flux, since A² ~ F²/r²
    /// otherwise and the regularity norms diverge.
    pub fn pauli(profile: &FieldProfile, g: f64, spin: Spin) -> Result<Self> {
        let f = flux(profile)?.f;
        if f != 0.0 {
            return Err(Error::Regularity(format!("A² ~ F²/r² with F = {f} is not integrable; the zero-mean expansion does not apply")));
        }
        let rs = profile.support_radius();
        if !rs.is_finite() {
            return Err(Error::Regularity(format!("profile {} is not compactly supported", profile.name)));
        }
        let (p1, p2) = (profile.clone(), profile.clone());
        let c = spin.sign() * 0.5 * g;
        let v1: ScalarField = Arc::new(move |x| c * p1.b_at(x));
        let v2: ScalarField = Arc::new(move |x| {
            let a = p2.a_at(x);
            a[0] * a[0] + a[1] * a[1]
        });
        let (radial, breaks) = match profile.geometry() {
            crate::field::Geometry::Radial(s) => (true, s.breakpoints()),
            _ => (false, vec![]),
        };
        // Non-radial zero-flux fields leave a dipole tail A ~ 1/r²; 8 support
        // radii keep the witness shell below tolerance.
        let extent = if radial { rs } else { 8.0 * rs };
        let origin = PauliOrigin { profile: profile.clone(), g, spin };
        Self::build(format!("pauli:{}", profile.name), v1, v2, radial, breaks, extent, Some(origin))
    }

    fn build(
        name: String,
        v1: ScalarField,
        v2: ScalarField,
        radial: bool,
        breaks: Vec<f64>,
        extent: f64,
        pauli: Option<PauliOrigin>,
    ) -> Result<Self> {
        if !(extent > 0.0) {
            return Err(Error::InvalidArgument(format!("extent must be positive, got {extent}")));
        }
        let regularity = witness(radial, &breaks, extent, &[&v1, &v2])?;
        Ok(Self { name, v1, v2, v3: None, radial, breaks, extent, regularity, pauli })
    }

    pub fn with_remainder(mut self, v3: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let v3: ScalarField = Arc::new(v3);
        witness(self.radial, &self.breaks, self.extent, &[&v3])?;
        self.v3 = Some(v3);
        Ok(self)
    }

    /// V(λ, x) = λV₁ + λ²V₂.
    pub fn at(&self, lambda: f64) -> impl Fn([f64; 2]) -> f64 + '_ {
        move |x| lambda * (self.v1)(x) + lambda * lambda * (self.v2)(x)
    }

    /// Square grid of cell size h covering the disk of radius `extent`.
    pub fn kernel_grid(&self, h: f64) -> Result<QuadratureGrid> {
        QuadratureGrid::centered_square(self.extent, h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Linear,
    ZeroMeanNonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BSExpansion {
    pub c1: f64,
    pub c2: f64,
    pub regime: Regime,
    pub gamma_euler: f64,
    /// ∫V₁, ∫|V₁|, ∫V₂ and ∬V₁ ln|x-y| V₁.
    pub int_v1: f64,
    pub int_abs_v1: f64,
    pub int_v2: f64,
    pub log_pair_v1: f64,
}

impl BSExpansion {
    pub fn u(&self, lambda: f64) -> f64 {
        self.c1 * lambda + self.c2 * lambda * lambda
    }
}

/// ∬ V(x) ln|x-y| V(y) on the family grid. Radial families use the angular
/// reduction ∫∫ ln|x-y| dθ dθ' = 4π² ln max(r, s); planar ones a product
/// square-cell rule with the exact self term on the diagonal.
fn log_pair_quadrature(family: &PotentialFamily, v: &ScalarField) -> Result<f64> {
    if family.radial {
        let grid = family_grid(true, &family.breaks, family.extent)?;
        let vals: Vec<f64> = grid.nodes.iter().map(|&x| v(x)).collect();
        let mut idx: Vec<usize> = (0..grid.len()).collect();
        idx.sort_by(|&a, &b| grid.nodes[a][0].total_cmp(&grid.nodes[b][0]));
        let m: Vec<f64> = idx.iter().map(|&i| grid.weights[i] * vals[i]).collect();
        let r: Vec<f64> = idx.iter().map(|&i| grid.nodes[i][0]).collect();
        let mut above: f64 = m.iter().zip(&r).map(|(a, b)| a * b.ln()).sum();
        let mut below = 0.0;
        let mut acc = 0.0;
        for k in 0..m.len() {
            below += m[k];
            above -= m[k] * r[k].ln();
            acc += m[k] * (r[k].ln() * below + above);
        }
        Ok(4.0 * PI * PI * acc)
    } else {
        // Square cells with the exact self term; the polar family grid is too
        // large for a pair sum.
        let grid = QuadratureGrid::centered_square(family.extent, family.extent / LOG_PAIR_CELLS)?;
        let vals: Vec<f64> = grid.nodes.iter().map(|&x| v(x)).collect();
        let n = grid.len();
        let mut acc = 0.0;
        for i in 0..n {
            let wi = grid.weights[i] * vals[i];
            if wi == 0.0 {
                continue;
            }
            let xi = grid.nodes[i];
            let mut row = grid.weights[i] * cell_log_mean(&grid, i)? * vals[i];
            for j in 0..n {
                if j != i && vals[j] != 0.0 {
                    let xj = grid.nodes[j];
                    row += grid.weights[j] * vals[j] * 0.5 * ((xi[0] - xj[0]).powi(2) + (xi[1] - xj[1]).powi(2)).ln();
                }
            }
            acc += wi * row;
        }
        Ok(acc)
    }
}

/// Taylor coefficients of u(λ). Pauli families take ∫A² and ∬B ln|x-y| B
/// from the field model; other families use quadrature.
pub fn u_expansion(family: &PotentialFamily) -> Result<BSExpansion> {
    let grid = family_grid(family.radial, &family.breaks, family.extent)?;
    let int_v1 = integrate_family(&grid, family.radial, |x| (family.v1)(x));
    let int_abs_v1 = integrate_family(&grid, family.radial, |x| (family.v1)(x).abs());
    let zero_mean = int_v1.abs() < ZERO_MEAN_TOL * int_abs_v1 || int_abs_v1 == 0.0;
    let (int_v1, int_v2, log_pair_v1) = match &family.pauli {
        Some(p) => {
            let a2 = a_squared_integral(&p.profile)?;
            let c = 0.5 * p.g;
            // log_pair_integral is -(1/2π)∬B ln|x-y| B
            (0.0, a2, -2.0 * PI * c * c * log_pair_integral(&p.profile)?)
        }
        None => {
            let int_v2 = integrate_family(&grid, family.radial, |x| (family.v2)(x));
            (if zero_mean { 0.0 } else { int_v1 }, int_v2, log_pair_quadrature(family, &family.v1)?)
        }
    };
    let c1 = int_v1 / (2.0 * PI);
    let c2 = int_v2 / (2.0 * PI) + ((EULER_GAMMA - LN_2) * int_v1 * int_v1 + log_pair_v1) / (4.0 * PI * PI);
    Ok(BSExpansion {
        c1,
        c2,
        regime: if zero_mean { Regime::ZeroMeanNonlinear } else { Regime::Linear },
        gamma_euler: EULER_GAMMA,
        int_v1,
        int_abs_v1,
        int_v2,
        log_pair_v1,
    })
}

/// -((g²-4)/8π)∫A² d²x, the zero-mean coefficient of a Pauli family.
pub fn pauli_c2(profile: &FieldProfile, g: f64) -> Result<f64> {
    Ok(-(g * g - 4.0) / (8.0 * PI) * a_squared_integral(profile)?)
}

/// ε(λ) = -e^{2/u(λ)} when u(λ) < 0, None when u(λ) ≥ 0.
pub fn predicted_energy(exp: &BSExpansion, lambda: f64) -> Result<Option<f64>> {
    let u = exp.u(lambda);
    if u >= 0.0 {
        return Ok(None);
    }
    if 2.0 / u < -700.0 {
        return Err(Error::Range { msg: "predicted energy e^{2/u} underflows; u".into(), value: u });
    }
    Ok(Some(-(2.0 / u).exp()))
}

/// The two closed exponents 2/u for a zero-flux Pauli family: the radial one
/// with ∫A² r dr, the planar one with ∫A² d²x by polar quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentForms {
    pub radial: f64,
    pub planar: f64,
    pub rel_gap: f64,
}

pub fn exponent_forms(profile: &FieldProfile, g: f64, lambda: f64) -> Result<ExponentForms> {
    let a2r = a_squared_integral(profile)? / (2.0 * PI);
    let a2p = a_squared_integral_polar(profile)?;
    let l2 = lambda * lambda * (g * g - 4.0);
    let radial = -1.0 / (l2 / 8.0 * a2r);
    let planar = -1.0 / (l2 / (16.0 * PI) * a2p);
    Ok(ExponentForms { radial, planar, rel_gap: (radial - planar).abs() / radial.abs().max(1e-300) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

/// ∫A² d²x against -(1/2π)∬B ln|x-y| B for a zero-flux field.
pub fn ab_identity_residual(profile: &FieldProfile) -> Result<IdentityResidual> {
    if flux(profile)?.f != 0.0 {
        return Err(Error::Flux(format!("identity needs zero flux; profile {} has F ≠ 0", profile.name)));
    }
    let rs = profile.support_radius();
    if rs.is_finite() && rs > 0.0 {
        let probes: Vec<f64> = (0..8).map(|k| 2.0 * rs * 2f64.powi(k)).collect();
        if !decay_check(profile, &probes).satisfied {
            return Err(Error::Regularity(format!("profile {} fails the decay conditions", profile.name)));
        }
    }
    let lhs = a_squared_integral(profile)?;
    let rhs = log_pair_integral(profile)?;
    Ok(IdentityResidual { lhs, rhs, rel_gap: (lhs - rhs).abs() / lhs.abs().max(1e-12) })
}

/// Mean of K₀(κ|y|) over a disk of the given area centred at 0:
/// 2(1 - ξK₁(ξ))/ξ², ξ = κρ₀, and -ln(κ/2) - γ - log_selfterm for small ξ.
fn cell_mean_k0(kappa: f64, area: f64) -> Result<f64> {
    let rho = (area / PI).sqrt();
    let xi = kappa * rho;
    if xi < 1e-3 {
        Ok(-(0.5 * kappa).ln() - EULER_GAMMA - log_selfterm(area)? + 0.125 * xi * xi * (1.25 - EULER_GAMMA - (0.5 * xi).ln()))
    } else {
        let (_, k1) = k01(xi);
        Ok(2.0 * (1.0 - xi * k1) / (xi * xi))
    }
}

/// Mean of ln|x_i - y| over the cell of node i: exact for square cells, the
/// equal-area disk otherwise.
fn cell_log_mean(quad: &QuadratureGrid, i: usize) -> Result<f64> {
    match quad.layout {
        Layout::Cartesian { h, .. } => Ok((0.5 * h).ln() + 0.5 * LN_2 - 1.5 + 0.25 * PI),
        _ => log_selfterm(quad.cell_sizes[i]),
    }
}

/// Mean of K₀(κ|x_i - y|) over the cell of node i; the disk average with its
/// log part swapped for the cell's own.
fn cell_k0(kappa: f64, quad: &QuadratureGrid, i: usize) -> Result<f64> {
    let area = quad.cell_sizes[i];
    Ok(cell_mean_k0(kappa, area)? + log_selfterm(area)? - cell_log_mean(quad, i)?)
}

fn require_planar(quad: &QuadratureGrid) -> Result<()> {
    if matches!(quad.layout, Layout::Radial) {
        return Err(Error::InvalidArgument("BS kernel needs a two-dimensional quadrature grid".into()));
    }
    Ok(())
}

/// Free resolvent on the nodes, R_ij = (1/2π)K₀(κ|x_i - x_j|) with the
/// cell-averaged diagonal.
fn resolvent(kappa: f64, quad: &QuadratureGrid) -> Result<DMatrix<f64>> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    require_planar(quad)?;
    let n = quad.len();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = cell_k0(kappa, quad, i)? / (2.0 * PI);
        for j in 0..i {
            let (a, b) = (quad.nodes[i], quad.nodes[j]);
            let v = k0(kappa * (a[0] - b[0]).hypot(a[1] - b[1])) / (2.0 * PI);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// K_ij = |V_i|^{1/2} R₀(κ; x_i, x_j) V_j^{1/2} √(w_i w_j), V^{1/2} = |V|^{1/2} sign V.
pub fn bs_kernel(v: &dyn Fn([f64; 2]) -> f64, kappa: f64, quad: &QuadratureGrid) -> Result<DMatrix<f64>> {
    let mut k = resolvent(kappa, quad)?;
    let vals: Vec<f64> = quad.nodes.iter().map(|&x| v(x)).collect();
    let left: Vec<f64> = vals.iter().zip(&quad.weights).map(|(v, w)| (v.abs() * w).sqrt()).collect();
    let right: Vec<f64> = left.iter().zip(&vals).map(|(l, v)| l * v.signum()).collect();
    for j in 0..k.ncols() {
        for i in 0..k.nrows() {
            k[(i, j)] *= left[i] * right[j];
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum BsOutcome {
    Bound {
        kappa_star: f64,
        energy: f64,
    },
    /// min eig(K_κ) does not cross -1 inside the bracket.
    NoBoundStateInBracket {
        kappa_lo: f64,
        kappa_hi: f64,
        min_eig_lo: f64,
        min_eig_hi: f64,
    },
}

enum Sign {
    Attractive,
    Repulsive,
    Mixed,
}

fn classify(vals: &[f64]) -> Sign {
    let neg = vals.iter().any(|&v| v < 0.0);
    let pos = vals.iter().any(|&v| v > 0.0);
    match (neg, pos) {
        (true, false) => Sign::Attractive,
        (false, _) => Sign::Repulsive,
        (true, true) => Sign::Mixed,
    }
}

/// Smallest eigenvalue of K_κ for V ≤ 0 (K = -|V|^{1/2}R₀|V|^{1/2} is symmetric).
fn min_eig_attractive(s: &[f64], kappa: f64, quad: &QuadratureGrid) -> Result<f64> {
    let r = resolvent(kappa, quad)?;
    let n = s.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        let sx: Vec<f64> = x.iter().zip(s).map(|(a, b)| a * b).collect();
        let t = &r * DVector::from_column_slice(&sx);
        for i in 0..n {
            y[i] = s[i] * t[i];
        }
    };
    let (top, _) = largest_eigenvalue_real(n, apply, 1e-9, 0x5eed)?;
    Ok(-top)
}

/// Number of eigenvalues of K_κ below -1 for sign-changing V, from the
/// inertia of M + M S M with M = |V|^{1/2}R₀|V|^{1/2}, S = sign V.
fn count_below_minus_one(s: &[f64], sign: &[f64], kappa: f64, quad: &QuadratureGrid) -> Result<usize> {
    let r = resolvent(kappa, quad)?;
    let n = s.len();
    let m = DMatrix::from_fn(n, n, |i, j| s[i] * r[(i, j)] * s[j]);
    let ms = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * sign[j]);
    let a = &m + &ms * &m;
    let a = (&a + a.transpose()) * 0.5;
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(a.symmetric_eigenvalues().iter().filter(|&&e| e < -1e-12 * scale).count())
}

/// Ground state of -Δ + V by bisection in ln κ on the Birman–Schwinger
/// eigenvalue condition, to relative κ tolerance 1e-8.
pub fn bs_bound_state(v: &dyn Fn([f64; 2]) -> f64, quad: &QuadratureGrid, kappa_bracket: (f64, f64)) -> Result<BsOutcome> {
    require_planar(quad)?;
    let (lo, hi) = kappa_bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("κ bracket must satisfy 0 < lo < hi, got ({lo}, {hi})")));
    }
    let all: Vec<f64> = quad.nodes.iter().map(|&x| v(x)).collect();
    let keep: Vec<usize> = (0..all.len()).filter(|&i| all[i] != 0.0).collect();
    let sub = QuadratureGrid {
        nodes: keep.iter().map(|&i| quad.nodes[i]).collect(),
        weights: keep.iter().map(|&i| quad.weights[i]).collect(),
        cell_sizes: keep.iter().map(|&i| quad.cell_sizes[i]).collect(),
        // Cell shapes survive the subset; only the cell size is read from it.
        layout: quad.layout.clone(),
    };
    let vals: Vec<f64> = keep.iter().map(|&i| all[i]).collect();
    let s: Vec<f64> = vals.iter().zip(&sub.weights).map(|(v, w)| (v.abs() * w).sqrt()).collect();
    let no_state = |a: f64, b: f64| BsOutcome::NoBoundStateInBracket { kappa_lo: lo, kappa_hi: hi, min_eig_lo: a, min_eig_hi: b };
    // bound(κ): is there an eigenvalue of H below -κ²?
    let bound: Box<dyn Fn(f64) -> Result<(bool, f64)>> = match classify(&vals) {
        Sign::Repulsive => return Ok(no_state(0.0, 0.0)),
        Sign::Attractive => Box::new(|k| {
            let e = min_eig_attractive(&s, k, &sub)?;
            Ok((e < -1.0, e))
        }),
        Sign::Mixed => {
            if s.len() > DENSE_BS_LIMIT {
                return Err(Error::Resolution(format!(
                    "sign-changing potential on {} nodes exceeds the dense limit {DENSE_BS_LIMIT}",
                    s.len()
                )));
            }
            let sign: Vec<f64> = vals.iter().map(|v| v.signum()).collect();
            Box::new(move |k| {
                let c = count_below_minus_one(&s, &sign, k, &sub)?;
                Ok((c > 0, if c > 0 { -1.0 - c as f64 } else { f64::NAN }))
            })
        }
    };
    let (b_lo, e_lo) = bound(lo)?;
    let (b_hi, e_hi) = bound(hi)?;
    if !b_lo || b_hi {
        return Ok(no_state(e_lo, e_hi));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    while b - a > 1e-8 {
        let m = 0.5 * (a + b);
        if bound(m.exp())?.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let kappa_star = (0.5 * (a + b)).exp();
    Ok(BsOutcome::Bound { kappa_star, energy: -kappa_star * kappa_star })
}

/// Solves the implicit equation u = (1/2π)⟨V^{1/2}, (I + M_κ)^{-1}|V|^{1/2}⟩,
/// κ = e^{1/u}, by fixed-point iteration starting from u = c1λ + c2λ², with
/// M_κ the kernel of R₀(κ) + (1/2π)ln κ. Returns None when u ≥ 0.
pub fn implicit_u(family: &PotentialFamily, lambda: f64, quad: &QuadratureGrid) -> Result<Option<f64>> {
    require_planar(quad)?;
    let v = family.at(lambda);
    let vals: Vec<f64> = quad.nodes.iter().map(|&x| v(x)).collect();
    let left: Vec<f64> = vals.iter().zip(&quad.weights).map(|(v, w)| (v.abs() * w).sqrt()).collect();
    let right: Vec<f64> = left.iter().zip(&vals).map(|(l, v)| l * v.signum()).collect();
    let n = quad.len();
    let mut u = u_expansion(family)?.u(lambda);
    for _ in 0..200 {
        if u >= 0.0 {
            return Ok(None);
        }
        let ln_k = 1.0 / u;
        let kappa = ln_k.exp();
        let mut m = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                let reg = if i == j {
                    if kappa > 0.0 {
                        cell_k0(kappa, quad, i)? + ln_k
                    } else {
                        LN_2 - EULER_GAMMA - cell_log_mean(quad, i)?
                    }
                } else {
                    let (a, b) = (quad.nodes[i], quad.nodes[j]);
                    let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                    if kappa * d > 1e-6 {
                        k0(kappa * d) + ln_k
                    } else {
                        LN_2 - EULER_GAMMA - d.ln()
                    }
                };
                m[(i, j)] += left[i] * reg / (2.0 * PI) * right[j];
            }
        }
        let x = m.lu().solve(&DVector::from_column_slice(&left)).ok_or_else(|| Error::Contract("I + M_κ is singular".into()))?;
        let next: f64 = right.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() / (2.0 * PI);
        if (next - u).abs() <= 1e-12 * u.abs() {
            return Ok(if next < 0.0 { Some(next) } else { None });
        }
        u = next;
    }
    Err(Error::Convergence { what: "implicit equation for u".into(), residual: f64::NAN })
}
