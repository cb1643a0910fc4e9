//! Magnetic field profiles and everything derived from them: flux, vector
//! potential A, log potential φ, decay envelopes and the A² / log-pair
//! integrals.

mod sampled;
mod shapes;
mod spec;

pub use sampled::{square_log_gradient, square_log_integral, SampledField};
pub use shapes::RadialShape;
pub use spec::{builtin, builtin_catalog, corpus, BumpSpec, CatalogEntry, ProfileSpec, ShapeSpec};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{
    gauss_legendre, integrate, integrate_pieces, integrate_to_infinity, log_selfterm, Layout, QuadratureGrid,
};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    RadialClosedForm,
    RadialPiecewiseConstant,
    PlanarSampled,
    PlanarClosedForm,
}

/// A radial shape translated to `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub shape: RadialShape,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Radial(RadialShape),
    Bumps(Vec<Bump>),
    Sampled(SampledField),
}

impl Geometry {
    fn negated(&self) -> Self {
        match self {
            Self::Radial(s) => Self::Radial(s.scaled(-1.0)),
            Self::Bumps(bs) => Self::Bumps(bs.iter().map(|b| Bump { center: b.center, shape: b.shape.scaled(-1.0) }).collect()),
            Self::Sampled(f) => Self::Sampled(SampledField { values: f.values.iter().map(|v| -v).collect(), ..f.clone() }),
        }
    }
}

/// A localized magnetic field, normalized so that its flux is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub name: String,
    geometry: Geometry,
    flipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FluxData {
    /// Flux in units of 2π.
    pub f: f64,
    /// Number of AC zero modes: F = N + eps_frac with eps_frac ∈ (0, 1].
    pub n: usize,
    pub eps_frac: f64,
    pub error: f64,
    pub flipped: bool,
}

const ZERO_FLUX_TOL: f64 = 1e-10;

impl FieldProfile {
    /// Builds the profile, flipping the sign of B if its flux is negative.
    pub fn new(name: impl Into<String>, geometry: Geometry) -> Self {
        let mut p = Self { name: name.into(), geometry, flipped: false };
        if let Ok(fd) = p.flux_raw() {
            if fd.value < -ZERO_FLUX_TOL * p.abs_scale().max(1.0) {
                p.geometry = p.geometry.negated();
                p.flipped = true;
            }
        }
        p
    }

    pub fn radial(name: impl Into<String>, shape: RadialShape) -> Self {
        Self::new(name, Geometry::Radial(shape))
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn kind(&self) -> ProfileKind {
        match &self.geometry {
            Geometry::Radial(RadialShape::Piecewise { .. }) | Geometry::Radial(RadialShape::Zero) => ProfileKind::RadialPiecewiseConstant,
            Geometry::Radial(_) => ProfileKind::RadialClosedForm,
            Geometry::Bumps(_) => ProfileKind::PlanarClosedForm,
            Geometry::Sampled(_) => ProfileKind::PlanarSampled,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.geometry, Geometry::Radial(_))
    }

    pub fn radial_shape(&self) -> Result<&RadialShape> {
        match &self.geometry {
            Geometry::Radial(s) => Ok(s),
            _ => Err(Error::KindMismatch(format!("profile {} is not radial", self.name))),
        }
    }

    /// Pointwise superposition. Sampled fields do not superpose.
    pub fn superpose(&self, other: &FieldProfile, name: impl Into<String>) -> Result<FieldProfile> {
        let g = match (&self.geometry, &other.geometry) {
            (Geometry::Radial(a), Geometry::Radial(b)) => Geometry::Radial(RadialShape::Sum(vec![a.clone(), b.clone()])),
            (Geometry::Sampled(_), _) | (_, Geometry::Sampled(_)) => {
                return Err(Error::KindMismatch("sampled profiles cannot be superposed".into()))
            }
            (a, b) => {
                let mut v = as_bumps(a);
                v.extend(as_bumps(b));
                Geometry::Bumps(v)
            }
        };
        Ok(FieldProfile::new(name, g))
    }

    /// The same field times c (no sign normalization).
    pub fn scaled(&self, c: f64) -> FieldProfile {
        let g = match &self.geometry {
            Geometry::Radial(s) => Geometry::Radial(s.scaled(c)),
            Geometry::Bumps(bs) => Geometry::Bumps(bs.iter().map(|b| Bump { center: b.center, shape: b.shape.scaled(c) }).collect()),
            Geometry::Sampled(f) => Geometry::Sampled(SampledField { values: f.values.iter().map(|v| c * v).collect(), ..f.clone() }),
        };
        FieldProfile { name: self.name.clone(), geometry: g, flipped: self.flipped }
    }

    pub fn b_at(&self, x: [f64; 2]) -> f64 {
        match &self.geometry {
            Geometry::Radial(s) => s.b(x[0].hypot(x[1])),
            Geometry::Bumps(bs) => bs.iter().map(|b| b.shape.b((x[0] - b.center[0]).hypot(x[1] - b.center[1]))).sum(),
            Geometry::Sampled(f) => f.b(x),
        }
    }

    /// B(r) of a radial profile.
    pub fn b_radial(&self, r: f64) -> Result<f64> {
        Ok(self.radial_shape()?.b(r))
    }

    /// A = (-∂₂φ, ∂₁φ) at x.
    pub fn a_at(&self, x: [f64; 2]) -> [f64; 2] {
        let rad = |s: &RadialShape, dx: f64, dy: f64| {
            let r2 = dx * dx + dy * dy;
            if r2 == 0.0 {
                return [0.0, 0.0];
            }
            let k = s.enclosed(r2.sqrt()) / r2;
            [-dy * k, dx * k]
        };
        match &self.geometry {
            Geometry::Radial(s) => rad(s, x[0], x[1]),
            Geometry::Bumps(bs) => bs.iter().fold([0.0, 0.0], |acc, b| {
                let a = rad(&b.shape, x[0] - b.center[0], x[1] - b.center[1]);
                [acc[0] + a[0], acc[1] + a[1]]
            }),
            Geometry::Sampled(f) => {
                let g = f.grad_phi(x);
                [-g[1], g[0]]
            }
        }
    }

    /// φ(x) = (1/2π) ∫ B(y) ln|x - y| d²y.
    pub fn phi_at(&self, x: [f64; 2]) -> Result<f64> {
        match &self.geometry {
            Geometry::Radial(s) => s.phi(x[0].hypot(x[1])),
            Geometry::Bumps(bs) => {
                let mut acc = 0.0;
                for b in bs {
                    acc += b.shape.phi((x[0] - b.center[0]).hypot(x[1] - b.center[1]))?;
                }
                Ok(acc)
            }
            Geometry::Sampled(f) => {
                let [hx, hy] = f.half_extent();
                if x[0].abs() > 1e6 * hx || x[1].abs() > 1e6 * hy {
                    return Err(Error::Extrapolation(format!("point {x:?} far outside the sampled grid")));
                }
                Ok(f.phi(x))
            }
        }
    }

    /// Radius of a disk about the origin containing supp B (∞ if not compact).
    pub fn support_radius(&self) -> f64 {
        match &self.geometry {
            Geometry::Radial(s) => s.support().unwrap_or(f64::INFINITY),
            Geometry::Bumps(bs) => {
                bs.iter().map(|b| b.center[0].hypot(b.center[1]) + b.shape.support().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
            }
            Geometry::Sampled(f) => {
                let [hx, hy] = f.half_extent();
                hx.hypot(hy)
            }
        }
    }

    pub fn is_compact(&self) -> bool {
        self.support_radius().is_finite()
    }

    pub fn decay_exponent(&self) -> Option<f64> {
        match &self.geometry {
            Geometry::Radial(s) => s.decay_exponent(),
            Geometry::Bumps(bs) => bs.iter().filter_map(|b| b.shape.decay_exponent()).reduce(f64::min),
            Geometry::Sampled(_) => None,
        }
    }

    /// True when the field has no rotational symmetry about the origin.
    pub fn is_nonsymmetric(&self) -> bool {
        match &self.geometry {
            Geometry::Radial(_) => false,
            Geometry::Bumps(bs) => bs.iter().any(|b| b.center != [0.0, 0.0]),
            Geometry::Sampled(_) => true,
        }
    }

    /// Axis-aligned box [x0, x1] × [y0, y1] containing supp B.
    pub fn bounding_box(&self) -> [f64; 4] {
        match &self.geometry {
            Geometry::Bumps(bs) => {
                let mut bx = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
                for b in bs {
                    let s = b.shape.support().unwrap_or(f64::INFINITY);
                    bx[0] = bx[0].min(b.center[0] - s);
                    bx[1] = bx[1].max(b.center[0] + s);
                    bx[2] = bx[2].min(b.center[1] - s);
                    bx[3] = bx[3].max(b.center[1] + s);
                }
                bx
            }
            Geometry::Sampled(f) => {
                let [hx, hy] = f.half_extent();
                [-hx, hx, -hy, hy]
            }
            Geometry::Radial(_) => {
                let s = self.support_radius();
                [-s, s, -s, s]
            }
        }
    }

    /// Rough size of the field for relative tolerances: ∫|B| / 2π.
    fn abs_scale(&self) -> f64 {
        match &self.geometry {
            Geometry::Radial(s) => radial_abs_moment(s).unwrap_or(1.0),
            Geometry::Bumps(bs) => bs.iter().map(|b| radial_abs_moment(&b.shape).unwrap_or(1.0)).sum(),
            Geometry::Sampled(f) => f.values.iter().map(|v| v.abs()).sum::<f64>() * f.h * f.h / (2.0 * PI),
        }
    }

    fn flux_raw(&self) -> Result<crate::numerics::quadrature::Integral> {
        match &self.geometry {
            Geometry::Radial(s) => radial_moment(s, |r| r),
            Geometry::Bumps(bs) => {
                let mut acc = crate::numerics::quadrature::Integral { value: 0.0, error: 0.0 };
                for b in bs {
                    let i = radial_moment(&b.shape, |r| r)?;
                    acc.value += i.value;
                    acc.error += i.error;
                }
                Ok(acc)
            }
            Geometry::Sampled(f) => {
                Ok(crate::numerics::quadrature::Integral { value: f.total() / (2.0 * PI), error: 1e-16 * f.total().abs() })
            }
        }
    }

    pub fn is_zero_flux(&self) -> Result<bool> {
        Ok(self.flux_raw()?.value.abs() <= ZERO_FLUX_TOL * self.abs_scale().max(1e-300))
    }
}

fn as_bumps(g: &Geometry) -> Vec<Bump> {
    match g {
        Geometry::Radial(s) => vec![Bump { center: [0.0, 0.0], shape: s.clone() }],
        Geometry::Bumps(bs) => bs.clone(),
        Geometry::Sampled(_) => vec![],
    }
}

fn radial_breaks(s: &RadialShape) -> (Vec<f64>, bool) {
    let mut pts = vec![0.0];
    pts.extend(s.breakpoints());
    match s.support() {
        Some(r) => {
            if *pts.last().expect("nonempty") < r {
                pts.push(r);
            }
            (pts, false)
        }
        None => {
            let sc = s.scale();
            for k in [1.0, 4.0, 16.0] {
                if k * sc > *pts.last().expect("nonempty") {
                    pts.push(k * sc);
                }
            }
            (pts, true)
        }
    }
}

/// ∫_0^∞ B(r) w(r) dr over the shape's natural panels.
fn radial_moment(s: &RadialShape, w: impl Fn(f64) -> f64) -> Result<crate::numerics::quadrature::Integral> {
    radial_integral(s, |r| s.b(r) * w(r), 1e-14, 1e-13)
}

fn radial_abs_moment(s: &RadialShape) -> Result<f64> {
    Ok(radial_integral(s, |r| s.b(r).abs() * r, 1e-12, 1e-10)?.value)
}

fn radial_integral(s: &RadialShape, f: impl Fn(f64) -> f64, abs_tol: f64, rel_tol: f64) -> Result<crate::numerics::quadrature::Integral> {
    let (pts, tail) = radial_breaks(s);
    let mut i = integrate_pieces(&f, &pts, abs_tol, rel_tol)?;
    if tail {
        let t = integrate_to_infinity(&f, *pts.last().expect("nonempty"), abs_tol, rel_tol)?;
        i.value += t.value;
        i.error += t.error;
    }
    if !i.value.is_finite() {
        return Err(Error::Integrability("integral is not finite".into()));
    }
    Ok(i)
}

/// F = (1/2π) ∫ B d²x by adaptive quadrature.
pub fn flux(profile: &FieldProfile) -> Result<FluxData> {
    let i = profile.flux_raw()?;
    let scale = profile.abs_scale().max(1e-300);
    let f = if i.value.abs() <= ZERO_FLUX_TOL * scale { 0.0 } else { i.value };
    if f < 0.0 {
        return Err(Error::Flux(format!("negative flux {f} after normalization")));
    }
    let (n, eps) = if f == 0.0 {
        (0, 0.0)
    } else {
        let near = f.round();
        if (f - near).abs() < 1e-12 * f.max(1.0) && near >= 1.0 {
            (near as usize - 1, 1.0)
        } else {
            (f.floor() as usize, f - f.floor())
        }
    };
    Ok(FluxData { f, n, eps_frac: eps, error: i.error, flipped: profile.flipped })
}

/// A(r) = r⁻¹ ∫_0^r B(s) s ds.
pub fn vector_potential_radial(profile: &FieldProfile, r: f64) -> Result<f64> {
    let s = profile.radial_shape()?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(s.enclosed(r) / r)
}

/// φ and A on a grid.
#[derive(Debug, Clone)]
pub struct GaugeData {
    pub phi: Vec<f64>,
    /// A(r) at the nodes of a radial grid.
    pub a_radial: Option<Vec<f64>>,
    /// (A₁, A₂) at the nodes of a planar grid.
    pub a_planar: Option<Vec<[f64; 2]>>,
    pub grid: QuadratureGrid,
}

/// φ and A on `grid`. Radial grids integrate the radial Poisson problem;
/// Cartesian grids use the log-kernel quadrature over the grid's own cells
/// with the equal-area-disk diagonal, and A from central differences of φ.
/// The planar result is rejected when its A deviates from the closed-form A
/// by more than `resolution_tol` relative to max |A|.
pub fn scalar_potential(profile: &FieldProfile, grid: &QuadratureGrid, resolution_tol: f64) -> Result<GaugeData> {
    match &grid.layout {
        Layout::Radial => {
            let s = profile.radial_shape()?;
            let mut phi = Vec::with_capacity(grid.len());
            let mut a = Vec::with_capacity(grid.len());
            for p in &grid.nodes {
                let r = p[0];
                phi.push(s.phi(r)?);
                a.push(if r > 0.0 { s.enclosed(r) / r } else { 0.0 });
            }
            Ok(GaugeData { phi, a_radial: Some(a), a_planar: None, grid: grid.clone() })
        }
        Layout::Cartesian { nx, ny, h, .. } => {
            let (nx, ny, h) = (*nx, *ny, *h);
            let bvals: Vec<f64> = grid.nodes.iter().map(|&p| profile.b_at(p)).collect();
            let captured: f64 = bvals.iter().sum::<f64>() * h * h / (2.0 * PI);
            let fd = flux(profile)?;
            let scale = profile.abs_scale().max(1e-12);
            if (captured - fd.f).abs() > resolution_tol * scale.max(fd.f) {
                return Err(Error::Resolution(format!("grid captures flux {captured:.6} of {:.6}; enlarge or refine it", fd.f)));
            }
            let table = log_table(nx, ny, h)?;
            let mut phi = vec![0.0; nx * ny];
            for j in 0..ny {
                for i in 0..nx {
                    let mut acc = 0.0;
                    for jj in 0..ny {
                        let dj = j.abs_diff(jj);
                        let row = &bvals[jj * nx..(jj + 1) * nx];
                        for (ii, &b) in row.iter().enumerate() {
                            if b != 0.0 {
                                acc += b * table[dj * nx + i.abs_diff(ii)];
                            }
                        }
                    }
                    phi[j * nx + i] = acc * h * h / (2.0 * PI);
                }
            }
            let mut a = vec![[0.0, 0.0]; nx * ny];
            let mut worst: f64 = 0.0;
            let mut amax: f64 = 0.0;
            for j in 0..ny {
                for i in 0..nx {
                    let dx = |ia: usize, ib: usize, span: f64| (phi[j * nx + ib] - phi[j * nx + ia]) / span;
                    let dy = |ja: usize, jb: usize, span: f64| (phi[jb * nx + i] - phi[ja * nx + i]) / span;
                    let d1 = if nx < 2 {
                        0.0
                    } else if i == 0 {
                        dx(0, 1, h)
                    } else if i == nx - 1 {
                        dx(nx - 2, nx - 1, h)
                    } else {
                        dx(i - 1, i + 1, 2.0 * h)
                    };
                    let d2 = if ny < 2 {
                        0.0
                    } else if j == 0 {
                        dy(0, 1, h)
                    } else if j == ny - 1 {
                        dy(ny - 2, ny - 1, h)
                    } else {
                        dy(j - 1, j + 1, 2.0 * h)
                    };
                    a[j * nx + i] = [-d2, d1];
                    if i > 0 && j > 0 && i + 1 < nx && j + 1 < ny {
                        let exact = profile.a_at(grid.nodes[j * nx + i]);
                        amax = amax.max(exact[0].hypot(exact[1]));
                        worst = worst.max((exact[0] + d2).hypot(exact[1] - d1));
                    }
                }
            }
            if amax > 0.0 && worst > resolution_tol * amax {
                return Err(Error::Resolution(format!("gradient of φ misses A by {:.3e} (relative); refine the grid", worst / amax)));
            }
            Ok(GaugeData { phi, a_radial: None, a_planar: Some(a), grid: grid.clone() })
        }
        Layout::Scattered => {
            let mut phi = Vec::with_capacity(grid.len());
            for &p in &grid.nodes {
                phi.push(profile.phi_at(p)?);
            }
            let a = grid.nodes.iter().map(|&p| profile.a_at(p)).collect();
            Ok(GaugeData { phi, a_radial: None, a_planar: Some(a), grid: grid.clone() })
        }
    }
}

/// ln|Δ| for all index offsets of an nx × ny cell grid; offset (0,0) holds the
/// equal-area-disk self term.
fn log_table(nx: usize, ny: usize, h: f64) -> Result<Vec<f64>> {
    let mut t = vec![0.0; nx * ny];
    for dj in 0..ny {
        for di in 0..nx {
            t[dj * nx + di] = (h * (di as f64).hypot(dj as f64)).ln();
        }
    }
    t[0] = log_selfterm(h * h)?;
    Ok(t)
}

/// Result of fitting the decay envelopes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
    /// min of the two fitted exponents.
    pub delta: f64,
    /// δ from |B(x)| ≤ C₁⟨x⟩^{-2-δ}.
    pub delta_field: f64,
    /// δ from |∫B(y)(x-y)/|x-y|² d²y| = 2π|A(x)| ≤ C₂⟨x⟩^{-1-δ}.
    pub delta_potential: f64,
    pub satisfied: bool,
}

/// Fits the two decay envelopes in log-log coordinates at the probe radii
/// (maximum over 16 directions for planar fields). The second envelope is
/// measured on the signed kernel, i.e. on 2π|A|, which is the bound the
/// argument uses; with |B(y)| inside the integral the envelope could never
/// beat ⟨x⟩^{-1} for a nonzero field.
pub fn decay_check(profile: &FieldProfile, probe_radii: &[f64]) -> DecayFit {
    let fail = DecayFit { c1: f64::NAN, c2: f64::NAN, delta: f64::NAN, delta_field: f64::NAN, delta_potential: f64::NAN, satisfied: false };
    let mut radii: Vec<f64> = probe_radii.iter().copied().filter(|r| *r > 0.0 && r.is_finite()).collect();
    radii.sort_by(f64::total_cmp);
    if radii.len() < 2 || radii[radii.len() - 1] < 10.0 * radii[0] {
        return fail;
    }
    let dirs: Vec<[f64; 2]> = if profile.is_radial() {
        vec![[1.0, 0.0]]
    } else {
        (0..16)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 16.0;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    let sample = |f: &dyn Fn([f64; 2]) -> f64| -> Vec<f64> {
        radii.iter().map(|&r| dirs.iter().map(|d| f([r * d[0], r * d[1]]).abs()).fold(0.0, f64::max)).collect()
    };
    let qb = sample(&|x| profile.b_at(x));
    let qa = sample(&|x| {
        let a = profile.a_at(x);
        2.0 * PI * a[0].hypot(a[1])
    });
    let fit = |q: &[f64], base: f64| -> (f64, f64) {
        if *q.last().expect("nonempty") <= 1e-300 {
            let c = q.iter().zip(&radii).map(|(v, r)| v * (1.0 + r * r).powf(0.5 * (base + 10.0))).fold(0.0, f64::max);
            return (f64::INFINITY, c);
        }
        let pts: Vec<(f64, f64)> =
            q.iter().zip(&radii).filter(|(v, _)| **v > 1e-300).map(|(v, r)| (0.5 * (1.0 + r * r).ln(), v.ln())).collect();
        if pts.len() < 2 {
            return (f64::NAN, f64::NAN);
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let delta = -slope - base;
        let c = q.iter().zip(&radii).map(|(v, r)| v * (1.0 + r * r).powf(0.5 * (base + delta))).fold(0.0, f64::max);
        (delta, c)
    };
    let (d1, c1) = fit(&qb, 2.0);
    let (d2, c2) = fit(&qa, 1.0);
    let delta = d1.min(d2);
    DecayFit { c1, c2, delta, delta_field: d1, delta_potential: d2, satisfied: d1 > 1e-3 && d2 > 1e-3 }
}

fn require_zero_flux(profile: &FieldProfile) -> Result<()> {
    let fd = flux(profile)?;
    if fd.f != 0.0 {
        return Err(Error::Divergence(format!("flux F = {:.6} ≠ 0: A decays like F/r and ∫A² diverges", fd.f)));
    }
    if let Some(d) = profile.decay_exponent() {
        if !(d > 0.0) {
            return Err(Error::Divergence("field decays too slowly for ∫A² to converge".into()));
        }
    }
    Ok(())
}

/// ∫ A(x)² d²x.
pub fn a_squared_integral(profile: &FieldProfile) -> Result<f64> {
    require_zero_flux(profile)?;
    match &profile.geometry {
        Geometry::Radial(RadialShape::Zero) => Ok(0.0),
        Geometry::Radial(s) => {
            let v = radial_integral(s, |r| if r > 0.0 { s.enclosed(r).powi(2) / r } else { 0.0 }, 1e-15, 1e-12)?;
            Ok(2.0 * PI * v.value)
        }
        _ => planar_a_squared(profile),
    }
}

/// ∫|A|² d²x by polar quadrature of the planar A, for any geometry; the
/// independent route to `a_squared_integral` for radial fields.
pub fn a_squared_integral_polar(profile: &FieldProfile) -> Result<f64> {
    require_zero_flux(profile)?;
    if matches!(profile.geometry, Geometry::Radial(RadialShape::Zero)) {
        return Ok(0.0);
    }
    planar_a_squared(profile)
}

fn planar_a_squared(profile: &FieldProfile) -> Result<f64> {
    let n_theta = match profile.geometry {
        Geometry::Sampled(_) => 96,
        _ => 512,
    };
    let ring = |r: f64| -> f64 {
        let mut acc = 0.0;
        for k in 0..n_theta {
            let t = 2.0 * PI * (k as f64 + 0.5) / n_theta as f64;
            let a = profile.a_at([r * t.cos(), r * t.sin()]);
            acc += a[0] * a[0] + a[1] * a[1];
        }
        acc * 2.0 * PI / n_theta as f64 * r
    };
    let rs = profile.support_radius();
    if !rs.is_finite() {
        return Err(Error::Integrability("planar ∫A² needs a compactly supported field".into()));
    }
    let mut breaks = vec![0.0];
    if let Geometry::Bumps(bs) = &profile.geometry {
        for b in bs {
            let c = b.center[0].hypot(b.center[1]);
            let s = b.shape.support().unwrap_or(rs);
            for x in [c - s, c, c + s] {
                if x > 0.0 && x < rs {
                    breaks.push(x);
                }
            }
        }
    }
    breaks.push(rs);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (tol_a, tol_r) = match profile.geometry {
        Geometry::Sampled(_) => (1e-8, 1e-6),
        _ => (1e-13, 1e-11),
    };
    let inner = integrate_pieces(ring, &breaks, tol_a, tol_r)?;
    let outer = integrate_to_infinity(ring, rs, tol_a, tol_r)?;
    Ok(inner.value + outer.value)
}

/// −(1/2π) ∬ B(x) ln|x − y| B(y) d²x d²y.
pub fn log_pair_integral(profile: &FieldProfile) -> Result<f64> {
    match &profile.geometry {
        Geometry::Radial(RadialShape::Zero) => Ok(0.0),
        Geometry::Radial(s) => {
            // Angular reduction: ∬ ln|x-y| dθ dθ' = 4π² ln max(r, r'), so the
            // pair integral is 8π² ∫ r B(r) Φ(r) ln r dr.
            let v = radial_integral(s, |r| if r > 0.0 { r * s.b(r) * s.enclosed(r) * r.ln() } else { 0.0 }, 1e-15, 1e-12)?;
            Ok(-4.0 * PI * v.value)
        }
        Geometry::Bumps(_) => {
            let [x0, x1, y0, y1] = profile.bounding_box();
            let span = (x1 - x0).max(y1 - y0);
            let h = span / 96.0;
            let coarse = planar_log_pair(|p| profile.b_at(p), [x0, x1, y0, y1], h)?;
            let fine = planar_log_pair(|p| profile.b_at(p), [x0, x1, y0, y1], 0.5 * h)?;
            Ok(-(4.0 * fine - coarse) / 3.0 / (2.0 * PI))
        }
        Geometry::Sampled(f) => {
            // Inner integral exact over each square cell, outer midpoint.
            let (nx, ny, h) = (f.nx, f.ny, f.h);
            let mut table = vec![0.0; nx * ny];
            for dj in 0..ny {
                for di in 0..nx {
                    table[dj * nx + di] = square_log_integral(di as f64 * h, dj as f64 * h, h);
                }
            }
            let acc = pair_sum(&f.values, nx, ny, &table);
            Ok(-acc * h * h / (2.0 * PI))
        }
    }
}

/// Σ_i Σ_j b_i b_j table[|Δj|·nx + |Δi|].
fn pair_sum(b: &[f64], nx: usize, ny: usize, table: &[f64]) -> f64 {
    let nz: Vec<(usize, usize, f64)> =
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| (i, j, b[j * nx + i])).filter(|t| t.2 != 0.0).collect();
    let mut acc = 0.0;
    for (a, &(i, j, bi)) in nz.iter().enumerate() {
        let mut row = 0.5 * bi * table[0];
        for &(ii, jj, bj) in &nz[a + 1..] {
            row += bj * table[j.abs_diff(jj) * nx + i.abs_diff(ii)];
        }
        acc += 2.0 * bi * row;
    }
    acc
}

/// Midpoint log-kernel quadrature of ∬ B ln|x−y| B over a box with cell h.
fn planar_log_pair(b: impl Fn([f64; 2]) -> f64, bx: [f64; 4], h: f64) -> Result<f64> {
    let nx = ((bx[1] - bx[0]) / h).ceil() as usize;
    let ny = ((bx[3] - bx[2]) / h).ceil() as usize;
    let grid = QuadratureGrid::cartesian(nx, ny, h, bx[0], bx[2])?;
    let vals: Vec<f64> = grid.nodes.iter().map(|&p| b(p)).collect();
    let table = log_table(nx, ny, h)?;
    Ok(pair_sum(&vals, nx, ny, &table) * h.powi(4))
}

/// Gauss–Legendre rule on [a, b] (nodes, weights).
pub(crate) fn gl_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(xi, wi)| (0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi)).collect()
}

/// ∮ A·dl around the axis-aligned rectangle [x0,x1]×[y0,y1] (counterclockwise),
/// i.e. the exact flux through it for a closed-form A.
pub fn rectangle_circulation(profile: &FieldProfile, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let n = 6;
    let mut c = 0.0;
    for (x, w) in gl_on(x0, x1, n) {
        c += w * (profile.a_at([x, y0])[0] - profile.a_at([x, y1])[0]);
    }
    for (y, w) in gl_on(y0, y1, n) {
        c += w * (profile.a_at([x1, y])[1] - profile.a_at([x0, y])[1]);
    }
    c
}

/// Closed-form radial integral ∫_a^b f dr, exposed for diagnostics.
pub fn radial_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    Ok(integrate(f, a, b, 1e-14, 1e-12)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(radius: f64) -> FieldProfile {
        FieldProfile::radial("disk", RadialShape::Piecewise { edges: vec![radius], values: vec![1.0] })
    }

    fn annulus() -> FieldProfile {
        builtin("zero-flux-annulus").unwrap()
    }

    #[test]
    fn flux_examples() {
        assert!((flux(&disk(1.0)).unwrap().f - 0.5).abs() < 1e-12);
        assert_eq!(flux(&annulus()).unwrap().f, 0.0);
        let f = flux(&disk(5f64.sqrt())).unwrap();
        assert!((f.f - 2.5).abs() < 1e-12);
        assert_eq!(f.n, 2);
        assert!((f.eps_frac - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sign_flip_is_recorded() {
        let p = FieldProfile::radial("down", RadialShape::Piecewise { edges: vec![1.0], values: vec![-2.0] });
        assert!(p.flipped());
        assert!(p.b_radial(0.5).unwrap() > 0.0);
        assert!(flux(&p).unwrap().flipped);
    }

    #[test]
    fn integer_flux_convention() {
        let p = disk(2f64.sqrt());
        let f = flux(&p).unwrap();
        assert_eq!(f.n, 0);
        assert_eq!(f.eps_frac, 1.0);
    }

    #[test]
    fn vector_potential_examples() {
        let d = disk(1.0);
        assert!((vector_potential_radial(&d, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((vector_potential_radial(&d, 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(vector_potential_radial(&annulus(), 2.5).unwrap(), 0.0);
        let two = builtin("two-bump-asym").unwrap();
        assert!(matches!(vector_potential_radial(&two, 1.0), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn non_integrable_field_is_reported() {
        let p = FieldProfile::radial("lorentz", RadialShape::Algebraic { amplitude: 1.0, scale: 1.0, power: 1.0 });
        assert!(flux(&p).is_err());
    }

    #[test]
    fn a_squared_annulus_closed_form() {
        let exact = 2.0 * PI * (1.0 / 16.0 + (16.0 * 2f64.ln() - 12.0 + 3.75) / 36.0);
        assert!((a_squared_integral(&annulus()).unwrap() - exact).abs() < 1e-11 * exact);
        assert!(matches!(a_squared_integral(&disk(1.0)), Err(Error::Divergence(_))));
        assert_eq!(a_squared_integral(&builtin("zero").unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn unit_disk_log_pair() {
        // ∬_{D×D} ln|x-y| = -π²/4, so the pair integral of B = 1 is π/8.
        let v = log_pair_integral(&disk(1.0)).unwrap();
        assert!((v - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn decay_envelopes() {
        let radii: Vec<f64> = (0..8).map(|k| 5.0 * 2f64.powi(k)).collect();
        let fit = decay_check(&annulus(), &radii);
        assert!(fit.satisfied && fit.delta.is_infinite());
        let lorentz = FieldProfile::radial("l", RadialShape::Algebraic { amplitude: 1.0, scale: 1.0, power: 1.0 });
        assert!(!decay_check(&lorentz, &radii).satisfied);
        let quartic = FieldProfile::radial("q", RadialShape::Algebraic { amplitude: 1.0, scale: 1.0, power: 2.0 });
        let fit = decay_check(&quartic, &radii);
        assert!((fit.delta_field - 2.0).abs() < 0.05);
        let zf = FieldProfile::radial("zf", RadialShape::ZeroFluxAlgebraic { amplitude: 1.0, scale: 1.0 });
        let fit = decay_check(&zf, &radii);
        assert!(fit.satisfied && (fit.delta - 2.0).abs() < 0.05, "{fit:?}");
        assert!(!decay_check(&annulus(), &[1.0, 2.0]).satisfied);
    }

    #[test]
    fn rectangle_circulation_is_enclosed_flux() {
        let d = disk(1.0);
        let c = rectangle_circulation(&d, 0.1, 0.2, -0.3, -0.2);
        assert!((c - 0.01).abs() < 1e-14);
    }
}
