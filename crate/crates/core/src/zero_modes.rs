//! Aharonov–Casher functions χ_j = e^{-φ}(x₁+ix₂)^j, the Macdonald tail
//! f_{R,κ}(r) = min{1, K₀(κr)/K₀(κR)}, and the energy form of H^(∓) on the
//! span of ψ_j = (f_{R,κ} + εh)χ_j.
//!
//! All functions take the field at unit coupling; pass `profile.scaled(λ)`
//! for coupling λ. The spin − basis is {χ_j : j ≤ [F]} with the form
//! ‖Dψ‖² + μ∫B|ψ|², μ = -(g-2)/2. The spin + basis is the single function
//! χ̃₀ = e^{+φ} (F = 0 only) with ‖D*ψ‖² + μ∫B|ψ|², μ = +(g-2)/2.

use crate::error::{Error, Result};
use crate::field::{flux, FieldProfile, Geometry};
use crate::numerics::quadrature::{gauss_legendre, QuadratureGrid};
use crate::numerics::special::{k0, k01};
use crate::planar::{link_phases, PlanarGrid};
use crate::spin::Spin;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// κR values of the logarithmic ladder.
pub const KAPPA_LADDER: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// The ladder continues by decades down to this κR while the count is short;
/// the binding scale is e^{-c/(g-2)} and is far below 1e-6 for g near 2.
pub const KAPPA_R_FLOOR: f64 = 1e-30;

/// ε values tried (with both signs) when the ε = 0 certificate falls short.
const EPS_LADDER: [f64; 6] = [1e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0];

/// Relative threshold below which a generalized eigenvalue counts as negative.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// [F], the number of basis functions minus one on the spin − side.
pub fn integer_part_of_flux(profile: &FieldProfile) -> Result<usize> {
    let fd = flux(profile)?;
    Ok(if fd.f == 0.0 {
        0
    } else if fd.eps_frac == 1.0 {
        fd.n + 1
    } else {
        fd.n
    })
}

fn zero_flux_guard(profile: &FieldProfile) -> Result<()> {
    if flux(profile)?.f != 0.0 {
        return Err(Error::Flux(format!("χ̃₀ = e^(+φ) is bounded only for zero flux; profile {} has F ≠ 0", profile.name)));
    }
    Ok(())
}

/// χ_j(x) = e^{-φ(x)}(x₁+ix₂)^j.
pub fn ac_function(profile: &FieldProfile, j: u32, points: &[[f64; 2]]) -> Result<Vec<C64>> {
    points.iter().map(|&x| Ok(C64::new(x[0], x[1]).powu(j) * (-profile.phi_at(x)?).exp())).collect()
}

/// χ̃₀(x) = e^{+φ(x)}; requires F = 0.
pub fn conjugate_zero_mode(profile: &FieldProfile, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    zero_flux_guard(profile)?;
    points.iter().map(|&x| Ok(profile.phi_at(x)?.exp())).collect()
}

/// Slope of ln|χ_j| against ln|x| between 4 and 16 support radii (100 and
/// 1000 for non-compact fields), averaged over 8 directions.
pub fn ac_decay_exponent(profile: &FieldProfile, j: u32) -> Result<f64> {
    let rs = profile.support_radius();
    let (r1, r2) = if rs.is_finite() { (4.0 * rs.max(0.25), 16.0 * rs.max(0.25)) } else { (100.0, 1000.0) };
    let mut acc = 0.0;
    for k in 0..8 {
        let th = 2.0 * PI * k as f64 / 8.0 + 0.1;
        let pts = [[r1 * th.cos(), r1 * th.sin()], [r2 * th.cos(), r2 * th.sin()]];
        let v = ac_function(profile, j, &pts)?;
        acc += (v[1].norm().ln() - v[0].norm().ln()) / (r2 / r1).ln();
    }
    Ok(acc / 8.0)
}

fn tail_args(r_cut: f64, kappa: f64) -> Result<()> {
    if !(r_cut > 0.0) || !(kappa > 0.0) {
        return Err(Error::Domain(format!("tail needs R > 0 and κ > 0, got R = {r_cut}, κ = {kappa}")));
    }
    Ok(())
}

/// f_{R,κ}(r) = min{1, K₀(κr)/K₀(κR)}.
pub fn tail_function(r_cut: f64, kappa: f64, r: f64) -> Result<f64> {
    tail_args(r_cut, kappa)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    Ok(if r <= r_cut { 1.0 } else { k0(kappa * r) / k0(kappa * r_cut) })
}

/// ‖f'_{R,κ}‖² over the plane in closed form:
/// π[ξ²(K₀² - K₁²) + 2ξK₀K₁]/K₀² at ξ = κR.
pub fn tail_kinetic_norm(r_cut: f64, kappa: f64) -> Result<f64> {
    tail_args(r_cut, kappa)?;
    let xi = kappa * r_cut;
    if xi >= 1.0 {
        return Err(Error::Regime(format!("tail bound needs κR < 1, got {xi}")));
    }
    let (a, b) = k01(xi);
    // ξ²K₁'² - (ξ²+1)K₁² with K₁' = -(K₀ + K₁/ξ), expanded: the 1/ξ² parts cancel
    Ok(PI * (xi * xi * (a * a - b * b) + 2.0 * xi * a * b) / (a * a))
}

/// ‖D_h χ_j‖/‖χ_j‖ over the interior nodes of a grid, with D = (p₁-A₁)+i(p₂-A₂)
/// discretized by link-transported central differences.
pub fn supersymmetry_residual(profile: &FieldProfile, j: u32, grid: &PlanarGrid) -> Result<f64> {
    let vals = node_values(profile, grid, |x| Ok(C64::new(x[0], x[1]).powu(j) * (-profile.phi_at(x)?).exp()))?;
    Ok(covariant_residual(profile, grid, &vals, false))
}

/// ‖D*_h χ̃₀‖/‖χ̃₀‖ with D* = (p₁-A₁)-i(p₂-A₂); requires F = 0.
pub fn conjugate_supersymmetry_residual(profile: &FieldProfile, grid: &PlanarGrid) -> Result<f64> {
    zero_flux_guard(profile)?;
    let vals = node_values(profile, grid, |x| Ok(C64::new(profile.phi_at(x)?.exp(), 0.0)))?;
    Ok(covariant_residual(profile, grid, &vals, true))
}

fn node_values(profile: &FieldProfile, grid: &PlanarGrid, f: impl Fn([f64; 2]) -> Result<C64>) -> Result<Vec<C64>> {
    let rs = profile.support_radius();
    let half = grid.half_width().min(-grid.x[0]).min(grid.y[grid.ny() - 1]).min(-grid.y[0]);
    if !(rs.is_finite() && half > rs) {
        return Err(Error::Domain(format!("grid half-width {half:.3} does not contain the support radius {rs:.3}")));
    }
    let mut v = Vec::with_capacity(grid.nx() * grid.ny());
    for &y in &grid.y {
        for &x in &grid.x {
            v.push(f([x, y])?);
        }
    }
    Ok(v)
}

fn covariant_residual(profile: &FieldProfile, grid: &PlanarGrid, vals: &[C64], adjoint: bool) -> f64 {
    let (lx, ly) = link_phases(profile, grid, 1.0);
    let (nx, ny) = (grid.nx(), grid.ny());
    let at = |i: usize, j: usize| vals[j * nx + i];
    let (mut num, mut den) = (0.0, 0.0);
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let dx =
                (lx[j * (nx - 1) + i] * at(i + 1, j) - lx[j * (nx - 1) + i - 1].conj() * at(i - 1, j)) / (grid.x[i + 1] - grid.x[i - 1]);
            let dy = (ly[j * nx + i] * at(i, j + 1) - ly[(j - 1) * nx + i].conj() * at(i, j - 1)) / (grid.y[j + 1] - grid.y[j - 1]);
            let d = if adjoint { -C64::i() * dx - dy } else { -C64::i() * dx + dy };
            let m = 0.25 * (grid.x[i + 1] - grid.x[i - 1]) * (grid.y[j + 1] - grid.y[j - 1]);
            num += m * d.norm_sqr();
            den += m * at(i, j).norm_sqr();
        }
    }
    (num / den).sqrt()
}

/// The C² bump h(x) = cos⁴(π|x-c|/2ρ) on |x-c| < ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestBump {
    pub center: [f64; 2],
    pub radius: f64,
}

impl TestBump {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let t = (x[0] - self.center[0]).hypot(x[1] - self.center[1]) / self.radius;
        if !(t < 1.0) {
            0.0
        } else {
            (0.5 * PI * t).cos().powi(4)
        }
    }

    pub fn grad_norm_sq(&self, x: [f64; 2]) -> f64 {
        let t = (x[0] - self.center[0]).hypot(x[1] - self.center[1]) / self.radius;
        if !(t < 1.0) {
            return 0.0;
        }
        let a = 0.5 * PI * t;
        let d = 4.0 * a.cos().powi(3) * a.sin() * 0.5 * PI / self.radius;
        d * d
    }

    /// Bump centred near the B-weighted centroid of the positive part of B,
    /// among the points where B is within 0.1% of its maximum, with the
    /// largest radius on which B stays positive. Without positive field the
    /// bump is empty (radius 0, h ≡ 0).
    fn place(profile: &FieldProfile, r_cut: f64) -> Result<Self> {
        let probe = QuadratureGrid::polar(&[0.0, r_cut], 40, 4, 96)?;
        let bv: Vec<f64> = probe.nodes.iter().map(|&x| profile.b_at(x)).collect();
        let bmax = bv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(bmax > 0.0) {
            return Ok(Self { center: [0.0, 0.0], radius: 0.0 });
        }
        let (mut m, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for ((x, w), b) in probe.nodes.iter().zip(&probe.weights).zip(&bv) {
            if *b > 0.0 {
                m += w * b;
                cx += w * b * x[0];
                cy += w * b * x[1];
            }
        }
        let c0 = [cx / m, cy / m];
        let near_max = |b: f64| b >= (1.0 - 1e-3) * bmax;
        let center = if near_max(profile.b_at(c0)) {
            c0
        } else {
            let d2 = |x: &[f64; 2]| (x[0] - c0[0]).powi(2) + (x[1] - c0[1]).powi(2);
            *probe
                .nodes
                .iter()
                .zip(&bv)
                .filter(|(_, &b)| near_max(b))
                .map(|(x, _)| x)
                .min_by(|a, b| d2(a).total_cmp(&d2(b)))
                .expect("the maximum is attained on the probe grid")
        };
        let step = r_cut / 800.0;
        let mut radius = f64::INFINITY;
        for k in 0..64 {
            let th = 2.0 * PI * k as f64 / 64.0;
            let mut t = step;
            loop {
                let x = [center[0] + t * th.cos(), center[1] + t * th.sin()];
                if profile.b_at(x) <= 0.0 || x[0].hypot(x[1]) > r_cut {
                    break;
                }
                t += step;
            }
            radius = radius.min(t - step);
        }
        if !(radius > 0.0) {
            return Err(Error::Resolution("no disk of positive field found for the test bump".into()));
        }
        Ok(Self { center, radius })
    }
}

/// κ-independent pieces of the energy form.
#[derive(Debug)]
struct Moments {
    /// ∫_Σ B χ̄_j χ_k.
    s: DMatrix<C64>,
    /// ∫ |∇h|² χ̄_j χ_k.
    k: DMatrix<C64>,
    /// ∫ 2hB χ̄_j χ_k.
    c: DMatrix<C64>,
    /// ∫ h²B χ̄_j χ_k.
    e: DMatrix<C64>,
    /// ∫_{|x|<R} χ̄_j χ_k, ∫ 2h χ̄_j χ_k, ∫ h² χ̄_j χ_k.
    g0: DMatrix<C64>,
    g1: DMatrix<C64>,
    g2: DMatrix<C64>,
    /// Outer shell nodes: (r, ln-r weight, r² ∫ dθ χ̄_j χ_k).
    shells: Vec<(f64, f64, DMatrix<C64>)>,
}

/// Trial span {(f_{R,κ} + εh)χ_j}.
#[derive(Debug, Clone)]
pub struct TrialBasis {
    pub profile: FieldProfile,
    pub r_cut: f64,
    pub kappa: f64,
    pub eps_pert: f64,
    pub bump: TestBump,
    pub j_max: usize,
    pub spin: Spin,
    moments: Arc<Moments>,
}

impl TrialBasis {
    /// Spin − uses χ_0..χ_[F]; spin + uses χ̃₀ and needs F = 0.
    pub fn new(profile: &FieldProfile, r_cut: f64, kappa: f64, eps_pert: f64, spin: Spin) -> Result<Self> {
        let rs = profile.support_radius();
        if !rs.is_finite() {
            return Err(Error::Domain(format!("profile {} is not compactly supported", profile.name)));
        }
        if !(r_cut >= rs) {
            return Err(Error::InvalidArgument(format!("cutoff radius {r_cut} is below the support radius {rs}")));
        }
        if !(kappa * r_cut < 1.0) || !(kappa * r_cut >= KAPPA_R_FLOOR) {
            return Err(Error::Regime(format!("κR = {} outside [{KAPPA_R_FLOOR}, 1)", kappa * r_cut)));
        }
        let j_max = match spin {
            Spin::Minus => integer_part_of_flux(profile)?,
            Spin::Plus => {
                zero_flux_guard(profile)?;
                0
            }
        };
        let bump = TestBump::place(profile, r_cut)?;
        let moments = Arc::new(moments(profile, r_cut, j_max, spin, &bump)?);
        Ok(Self { profile: profile.clone(), r_cut, kappa, eps_pert, bump, j_max, spin, moments })
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        let xi = kappa * self.r_cut;
        if !(xi < 1.0) || !(xi >= KAPPA_R_FLOOR) {
            return Err(Error::Regime(format!("κR = {xi} outside [{KAPPA_R_FLOOR}, 1)")));
        }
        Ok(Self { kappa, ..self.clone() })
    }

    pub fn with_eps(&self, eps_pert: f64) -> Self {
        Self { eps_pert, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.j_max + 1
    }
}

fn basis_values(profile: &FieldProfile, x: [f64; 2], j_max: usize, spin: Spin) -> Result<Vec<C64>> {
    let phi = profile.phi_at(x)?;
    Ok(match spin {
        Spin::Minus => {
            let z = C64::new(x[0], x[1]);
            let e = (-phi).exp();
            (0..=j_max).map(|j| z.powu(j as u32) * e).collect()
        }
        Spin::Plus => vec![C64::new(phi.exp(), 0.0)],
    })
}

fn add_outer(m: &mut DMatrix<C64>, v: &[C64], w: f64) {
    let n = v.len();
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] += v[a].conj() * v[b] * w;
        }
    }
}

fn moments(profile: &FieldProfile, r_cut: f64, j_max: usize, spin: Spin, bump: &TestBump) -> Result<Moments> {
    let n = j_max + 1;
    let zero = || DMatrix::<C64>::zeros(n, n);
    let (mut s, mut k, mut c, mut e, mut g0, mut g1, mut g2) = (zero(), zero(), zero(), zero(), zero(), zero(), zero());
    let centred = bump.center == [0.0, 0.0];
    let inner = match profile.geometry() {
        Geometry::Radial(shape) if centred => {
            let mut br = vec![0.0];
            br.extend(shape.breakpoints().into_iter().filter(|&b| b < r_cut));
            br.push(bump.radius.min(r_cut));
            br.push(r_cut);
            br.sort_by(f64::total_cmp);
            br.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            QuadratureGrid::polar(&br, 6, 10, 8 * (j_max + 2))?
        }
        Geometry::Radial(shape) => {
            let mut br = vec![0.0];
            br.extend(shape.breakpoints().into_iter().filter(|&b| b < r_cut));
            br.push(r_cut);
            QuadratureGrid::polar(&br, 16, 8, 192)?
        }
        _ => QuadratureGrid::polar(&[0.0, r_cut], 40, 8, 192)?,
    };
    for (&x, &w) in inner.nodes.iter().zip(&inner.weights) {
        let v = basis_values(profile, x, j_max, spin)?;
        let b = profile.b_at(x);
        let h = bump.value(x);
        add_outer(&mut g0, &v, w);
        if b != 0.0 {
            add_outer(&mut s, &v, w * b);
        }
        if h != 0.0 {
            add_outer(&mut k, &v, w * bump.grad_norm_sq(x));
            add_outer(&mut c, &v, w * 2.0 * h * b);
            add_outer(&mut e, &v, w * h * h * b);
            add_outer(&mut g1, &v, w * 2.0 * h);
            add_outer(&mut g2, &v, w * h * h);
        }
    }
    // Outer shells in ln r from R out to where K₁(κr)² is below e^-80 for the
    // smallest κ.
    let span = (80.0 / KAPPA_R_FLOOR).ln();
    let panels = (3.0 * span).ceil() as usize;
    let (gx, gw) = gauss_legendre(8);
    let n_theta = if profile.is_radial() { 8 * (j_max + 2) } else { 64 };
    let dth = 2.0 * PI / n_theta as f64;
    let len = span / panels as f64;
    let mut shells = Vec::with_capacity(panels * gx.len());
    for p in 0..panels {
        for (xi, wi) in gx.iter().zip(&gw) {
            let t = r_cut.ln() + (p as f64 + 0.5 * (xi + 1.0)) * len;
            let r = t.exp();
            let mut m = zero();
            for q in 0..n_theta {
                let th = (q as f64 + 0.5) * dth;
                let v = basis_values(profile, [r * th.cos(), r * th.sin()], j_max, spin)?;
                add_outer(&mut m, &v, r * r * dth);
            }
            shells.push((r, 0.5 * len * wi, m));
        }
    }
    Ok(Moments { s, k, c, e, g0, g1, g2, shells })
}

/// The energy form Q and Gram matrix G on the trial span, with the tail
/// kinetic part T and field-moment part S kept for diagnostics.
#[derive(Debug, Clone)]
pub struct FormMatrices {
    pub q: DMatrix<C64>,
    pub g: DMatrix<C64>,
    pub t: DMatrix<C64>,
    pub s: DMatrix<C64>,
    pub mu: f64,
    pub kappa: f64,
    pub eps_pert: f64,
}

/// μ = -(g-2)/2 for spin −, +(g-2)/2 for spin +.
pub fn form_mu(g: f64, spin: Spin) -> f64 {
    spin.sign() * 0.5 * (g - 2.0)
}

/// Q = T + ε²K + μ[S + εC + ε²E] and G = ∫|ψ|² for the basis.
pub fn energy_form_matrices(basis: &TrialBasis, g: f64) -> Result<FormMatrices> {
    let m = &basis.moments;
    let (kappa, eps) = (basis.kappa, basis.eps_pert);
    let mu = form_mu(g, basis.spin);
    let n = basis.dim();
    let k0r = k0(kappa * basis.r_cut);
    let mut t = DMatrix::<C64>::zeros(n, n);
    let mut gout = DMatrix::<C64>::zeros(n, n);
    for (r, w, mm) in &m.shells {
        if kappa * r > 700.0 {
            break;
        }
        let (a, b) = k01(kappa * r);
        let fp = kappa * b / k0r;
        let f = a / k0r;
        t += mm * C64::new(w * fp * fp, 0.0);
        gout += mm * C64::new(w * f * f, 0.0);
    }
    let cs = |x: f64| C64::new(x, 0.0);
    let q = &t + &m.k * cs(eps * eps) + (&m.s + &m.c * cs(eps) + &m.e * cs(eps * eps)) * cs(mu);
    let gram = &m.g0 + &m.g1 * cs(eps) + &m.g2 * cs(eps * eps) + gout;
    if q.iter().chain(gram.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Integrability("energy form quadrature produced non-finite entries".into()));
    }
    Ok(FormMatrices { q, g: gram, t, s: m.s.clone(), mu, kappa, eps_pert: eps })
}

fn hermitian_eigenvalues(a: DMatrix<C64>) -> Vec<f64> {
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

impl FormMatrices {
    /// Generalized eigenvalues of (Q, G) in ascending order.
    pub fn generalized_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.g.nrows();
        let d: Vec<f64> = (0..n).map(|i| 1.0 / self.g[(i, i)].re.sqrt()).collect();
        let scale = |m: &DMatrix<C64>| DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
        let (qs, gs) = (scale(&self.q), scale(&self.g));
        let gs = (&gs + gs.adjoint()) * C64::new(0.5, 0.0);
        let l = gs.cholesky().ok_or_else(|| Error::Contract("trial Gram matrix is not positive definite".into()))?.l();
        let x = l.solve_lower_triangular(&qs).ok_or_else(|| Error::Contract("singular Gram factor".into()))?;
        let y = l.solve_lower_triangular(&x.adjoint()).ok_or_else(|| Error::Contract("singular Gram factor".into()))?;
        Ok(hermitian_eigenvalues(y))
    }

    /// Number of generalized eigenvalues below -NEGATIVE_TOL·max|λ|.
    pub fn negative_count(&self) -> Result<usize> {
        let ev = self.generalized_eigenvalues()?;
        Ok(count_negative(&ev))
    }

    /// max |Q - Q*|, |G - G*|, |S - S*|.
    pub fn hermiticity_defect(&self) -> f64 {
        [&self.q, &self.g, &self.s].iter().map(|m| (*m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)).fold(0.0, f64::max)
    }
}

fn count_negative(ev: &[f64]) -> usize {
    let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    ev.iter().filter(|&&v| v < -NEGATIVE_TOL * scale).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldMoment {
    pub min_eig_s: f64,
    pub positive: bool,
}

/// Smallest eigenvalue of S_{jk} = ∫_Σ B χ̄_j χ_k over j, k ≤ [F].
pub fn field_moment_positivity(profile: &FieldProfile) -> Result<FieldMoment> {
    let basis = TrialBasis::new(profile, profile.support_radius(), 1e-2 / profile.support_radius(), 0.0, Spin::Minus)?;
    let min_eig_s = hermitian_eigenvalues(basis.moments.s.clone())[0];
    Ok(FieldMoment { min_eig_s, positive: min_eig_s > 0.0 })
}

/// ∫_Σ B |χ̃₀|² = ∫ B e^{2φ}; requires F = 0.
pub fn conjugate_field_moment(profile: &FieldProfile) -> Result<f64> {
    let basis = TrialBasis::new(profile, profile.support_radius(), 1e-2 / profile.support_radius(), 0.0, Spin::Plus)?;
    Ok(basis.moments.s[(0, 0)].re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderPoint {
    pub kappa_r: f64,
    pub eps_pert: f64,
    /// Largest generalized eigenvalue of (Q, G).
    pub top_eigenvalue: f64,
    pub lowest_eigenvalue: f64,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct VariationalCertificate {
    pub count_lower_bound: usize,
    pub required: usize,
    pub kappa_star: f64,
    pub eps_star: f64,
    pub eigenvalues: Vec<f64>,
    pub ladder: Vec<LadderPoint>,
    pub certificate: FormMatrices,
}

impl VariationalCertificate {
    pub fn diagnostics(&self) -> String {
        let t: Vec<String> = (0..self.certificate.t.nrows()).map(|i| format!("{:.3e}", self.certificate.t[(i, i)].re)).collect();
        let s = hermitian_eigenvalues(self.certificate.s.clone());
        let ladder: Vec<String> = self
            .ladder
            .iter()
            .map(|p| format!("κR={:.1e} ε={:.1e}: top={:.3e} count={}", p.kappa_r, p.eps_pert, p.top_eigenvalue, p.count))
            .collect();
        format!("diag T = [{}]; eig S = {:?}; ladder: {}", t.join(", "), s, ladder.join("; "))
    }
}

fn evaluate(basis: &TrialBasis, g: f64) -> Result<(LadderPoint, FormMatrices, Vec<f64>)> {
    let fm = energy_form_matrices(basis, g)?;
    let ev = fm.generalized_eigenvalues()?;
    let p = LadderPoint {
        kappa_r: basis.kappa * basis.r_cut,
        eps_pert: basis.eps_pert,
        top_eigenvalue: ev[ev.len() - 1],
        lowest_eigenvalue: ev[0],
        count: count_negative(&ev),
    };
    Ok((p, fm, ev))
}

type Best = (LadderPoint, FormMatrices, Vec<f64>);

fn better(a: &LadderPoint, b: &LadderPoint) -> bool {
    (a.count, -a.top_eigenvalue) > (b.count, -b.top_eigenvalue)
}

/// Golden-section minimization of the top eigenvalue over t ∈ [lo, hi].
fn golden(lo: f64, hi: f64, mut f: impl FnMut(f64) -> Result<Best>, best: &mut Best, ladder: &mut Vec<LadderPoint>) -> Result<()> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..24 {
        if fc.0.top_eigenvalue < fd.0.top_eigenvalue {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        for cand in [&fc, &fd] {
            if better(&cand.0, &best.0) {
                *best = cand.clone();
            }
        }
    }
    ladder.push(best.0);
    Ok(())
}

/// Scans κ over the ladder (ε = 0), refines by golden section in ln κR, and
/// retries with ε ≠ 0 when the ε = 0 span falls short of 1+[F] negative
/// directions. Never fails on a shortfall; see `variational_bound_state_count`.
pub fn certificate_scan(profile: &FieldProfile, g: f64, spin: Spin) -> Result<VariationalCertificate> {
    let r_cut = profile.support_radius();
    let base = TrialBasis::new(profile, r_cut, KAPPA_LADDER[0] / r_cut, 0.0, spin)?;
    let required = base.dim();
    let at = |kr: f64, eps: f64| -> Result<Best> { evaluate(&base.with_kappa(kr / r_cut)?.with_eps(eps), g) };
    let mut ladder = Vec::new();
    let mut rungs = KAPPA_LADDER.to_vec();
    let mut best: Option<(usize, Best)> = None;
    let mut i = 0;
    while i < rungs.len() {
        let cand = at(rungs[i], 0.0)?;
        ladder.push(cand.0);
        if best.as_ref().map_or(true, |(_, b)| better(&cand.0, &b.0)) {
            best = Some((i, cand));
        }
        let short = best.as_ref().map_or(true, |(_, b)| b.0.count < required);
        if i + 1 == rungs.len() && short && rungs[i] * 0.1 >= KAPPA_R_FLOOR * 0.999 {
            rungs.push(rungs[i] * 0.1);
        }
        i += 1;
    }
    let (i, mut best) = best.expect("ladder is nonempty");
    let lo = rungs[(i + 1).min(rungs.len() - 1)].max(KAPPA_R_FLOOR).ln();
    let hi = rungs[i.saturating_sub(1)].ln();
    golden(lo, hi, |t| at(t.exp(), 0.0), &mut best, &mut ladder)?;
    if best.0.count < required {
        let kr = best.0.kappa_r;
        let mut eb = best.clone();
        for &e in &EPS_LADDER {
            for eps in [e, -e] {
                let cand = at(kr, eps)?;
                ladder.push(cand.0);
                if better(&cand.0, &eb.0) {
                    eb = cand;
                }
            }
        }
        if eb.0.eps_pert != 0.0 {
            let e = eb.0.eps_pert;
            golden(0.5 * e, 2.0 * e, |x| at(kr, x), &mut eb, &mut ladder)?;
        }
        if better(&eb.0, &best.0) {
            best = eb;
        }
    }
    let (p, fm, ev) = best;
    Ok(VariationalCertificate {
        count_lower_bound: p.count,
        required,
        kappa_star: p.kappa_r / r_cut,
        eps_star: p.eps_pert,
        eigenvalues: ev,
        ladder,
        certificate: fm,
    })
}

/// Lower bound on the number of negative eigenvalues of H^(∓) from the
/// minimax principle; fails with a certificate error when the span does
/// not reach 1+[F] (spin −) or 1 (spin +, F = 0).
pub fn variational_bound_state_count(profile: &FieldProfile, g: f64, spin: Spin) -> Result<VariationalCertificate> {
    let cert = certificate_scan(profile, g, spin)?;
    if cert.count_lower_bound < cert.required {
        return Err(Error::Certificate { reached: cert.count_lower_bound, required: cert.required, diagnostics: cert.diagnostics() });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin;
    use crate::planar::PlanarGridParams;
    use crate::radial::{radial_bound_states, RadialOperatorSpec};

    fn disk() -> FieldProfile {
        builtin("uniform-disk").unwrap()
    }

    fn annulus() -> FieldProfile {
        builtin("zero-flux-annulus").unwrap()
    }

    fn pts() -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [0.3, -1.2], [2.5, 0.5], [-3.0, 4.0], [10.0, -7.0]]
    }

    #[test]
    fn zero_field_modes_are_constant() {
        let z = builtin("zero").unwrap();
        for v in ac_function(&z, 0, &pts()).unwrap() {
            assert_eq!(v, C64::new(1.0, 0.0));
        }
        for v in conjugate_zero_mode(&z, &pts()).unwrap() {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn disk_decay_exponents() {
        for (j, want) in [(0, -2.5), (1, -1.5), (2, -0.5)] {
            let e = ac_decay_exponent(&disk(), j).unwrap();
            assert!((e - want).abs() < 0.05, "j = {j}: {e}");
        }
    }

    #[test]
    fn conjugate_mode_needs_zero_flux() {
        assert!(matches!(conjugate_zero_mode(&disk(), &pts()), Err(Error::Flux(_))));
        let outside = [[2.0, 0.0], [0.0, -2.5], [3.0, 4.0], [-20.0, 1.0]];
        for v in conjugate_zero_mode(&annulus(), &outside).unwrap() {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
        let inside = conjugate_zero_mode(&annulus(), &[[0.0, 0.0], [0.5, 0.5], [1.5, 0.0]]).unwrap();
        assert!(inside.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn tail_function_values() {
        assert_eq!(tail_function(1.0, 0.1, 0.5).unwrap(), 1.0);
        assert_eq!(tail_function(1.0, 0.1, 1.0).unwrap(), 1.0);
        // K0(0.2)/K0(0.1), mpmath; the cosh integral representation agrees to 1e-17
        let v = tail_function(1.0, 0.1, 2.0).unwrap();
        assert!((v - 0.722_148_335_168_726_4).abs() < 1e-14, "{v}");
        let mut prev = 1.0;
        for k in 1..200 {
            let f = tail_function(1.0, 0.1, 1.0 + 0.25 * k as f64).unwrap();
            assert!(f <= prev && f > 0.0);
            prev = f;
        }
        assert!(tail_function(0.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn tail_kinetic_norm_closed_form() {
        // 2π∫_{0.1}^∞ K1(t)² t dt / K0(0.1)², mpmath quadrature
        let v = tail_kinetic_norm(1.0, 0.1).unwrap();
        assert!((v - 2.064_533_066_345_470_6).abs() < 1e-8, "{v}");
        assert!(tail_kinetic_norm(1.0, 0.01).unwrap() < v);
        let bound: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&x| tail_kinetic_norm(1.0, x).unwrap() * x.ln().abs()).collect();
        assert!(bound.iter().all(|&b| b > 0.0 && b < 2.0 * PI + 1.0), "{bound:?}");
        assert!(matches!(tail_kinetic_norm(1.0, 1.5), Err(Error::Regime(_))));
    }

    fn uniform_grid(h: f64, half: f64) -> PlanarGrid {
        PlanarGrid::new(&PlanarGridParams::uniform(h, half)).unwrap()
    }

    #[test]
    fn supersymmetry_residual_converges() {
        let z = builtin("zero").unwrap();
        assert_eq!(supersymmetry_residual(&z, 0, &uniform_grid(0.25, 2.0)).unwrap(), 0.0);
        for j in 0..2 {
            let coarse = supersymmetry_residual(&disk(), j, &uniform_grid(0.1, 5.0)).unwrap();
            let fine = supersymmetry_residual(&disk(), j, &uniform_grid(0.05, 5.0)).unwrap();
            assert!(fine <= 0.5 * coarse, "j = {j}: {coarse} -> {fine}");
        }
        let coarse = conjugate_supersymmetry_residual(&annulus(), &uniform_grid(0.1, 3.0)).unwrap();
        let fine = conjugate_supersymmetry_residual(&annulus(), &uniform_grid(0.05, 3.0)).unwrap();
        assert!(fine <= 0.5 * coarse, "{coarse} -> {fine}");
        assert!(matches!(supersymmetry_residual(&disk(), 0, &uniform_grid(0.1, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_field_form_is_tail_only() {
        let z = builtin("zero").unwrap();
        let basis = TrialBasis::new(&z, 1.0, 0.05, 0.0, Spin::Minus).unwrap();
        let fm = energy_form_matrices(&basis, 3.0).unwrap();
        assert!((&fm.q - &fm.t).iter().all(|v| v.norm() == 0.0));
        assert!(fm.generalized_eigenvalues().unwrap().iter().all(|&e| e >= 0.0));
        let want = tail_kinetic_norm(1.0, 0.05).unwrap();
        assert!((fm.t[(0, 0)].re - want).abs() < 1e-8 * want, "{} vs {want}", fm.t[(0, 0)].re);
    }

    #[test]
    fn matrices_are_hermitian_and_gram_positive() {
        let basis = TrialBasis::new(&disk(), 5f64.sqrt(), 0.01, 0.1, Spin::Minus).unwrap();
        let fm = energy_form_matrices(&basis, 2.5).unwrap();
        assert!(fm.hermiticity_defect() < 1e-12);
        assert!(hermitian_eigenvalues(fm.g.clone())[0] > 0.0);
        assert_eq!(fm.q.nrows(), 3);
    }

    #[test]
    fn disk_g2_form_is_nonnegative() {
        let r = 5f64.sqrt();
        let basis = TrialBasis::new(&disk(), r, 0.1 / r, 0.0, Spin::Minus).unwrap();
        for &kr in &KAPPA_LADDER {
            let fm = energy_form_matrices(&basis.with_kappa(kr / r).unwrap(), 2.0).unwrap();
            let ev = fm.generalized_eigenvalues().unwrap();
            let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(ev[0] >= -10.0 * NEGATIVE_TOL * scale, "κR = {kr}: {ev:?}");
        }
    }

    #[test]
    fn smallest_eigenvalue_is_nonincreasing_in_g() {
        let r = 5f64.sqrt();
        let basis = TrialBasis::new(&disk(), r, 0.02 / r, 0.0, Spin::Minus).unwrap();
        let lows: Vec<f64> =
            [2.1, 2.5, 3.0].iter().map(|&g| energy_form_matrices(&basis, g).unwrap().generalized_eigenvalues().unwrap()[0]).collect();
        assert!(lows[0] >= lows[1] && lows[1] >= lows[2], "{lows:?}");
    }

    #[test]
    fn field_moments() {
        assert!(field_moment_positivity(&disk()).unwrap().positive);
        let s = field_moment_positivity(&annulus()).unwrap();
        assert!(s.positive && s.min_eig_s > 0.0);
        assert!(conjugate_field_moment(&annulus()).unwrap() < 0.0);
    }

    #[test]
    fn theorem_counts() {
        let c = variational_bound_state_count(&disk(), 2.5, Spin::Minus).unwrap();
        assert!(c.count_lower_bound >= 3);
        assert!(variational_bound_state_count(&annulus(), 2.5, Spin::Minus).unwrap().count_lower_bound >= 1);
        assert!(variational_bound_state_count(&annulus(), 2.5, Spin::Plus).unwrap().count_lower_bound >= 1);
    }

    #[test]
    fn certificate_sits_above_the_ground_state() {
        let c = certificate_scan(&disk(), 2.5, Spin::Minus).unwrap();
        let spec = RadialOperatorSpec::new(&disk(), 2.5, 1.0, 0, Spin::Minus);
        let e0 = radial_bound_states(&spec).unwrap().eigenvalues[0];
        assert!(c.eigenvalues[0] >= e0 - 0.05 * e0.abs(), "{} vs {e0}", c.eigenvalues[0]);
    }

    #[test]
    fn g2_never_certifies() {
        for p in crate::field::corpus().unwrap() {
            let c = certificate_scan(&p, 2.0, Spin::Minus).unwrap();
            assert_eq!(c.count_lower_bound, 0, "{}: {:?}", p.name, c.eigenvalues);
            assert!(matches!(variational_bound_state_count(&p, 2.0, Spin::Minus), Err(Error::Certificate { reached: 0, .. })));
        }
    }
}
