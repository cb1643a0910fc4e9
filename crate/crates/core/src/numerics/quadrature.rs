use crate::error::{Error, Result};
use std::f64::consts::PI;

/// How the nodes of a [`QuadratureGrid`] are laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Radii on the half-line; weights carry the r dr measure.
    Radial,
    /// Cell centres of a uniform Cartesian grid, row-major with x fastest.
    Cartesian { nx: usize, ny: usize, h: f64, x0: f64, y0: f64 },
    /// Anything else (polar product rules, user supplied points).
    Scattered,
}

/// Nodes with positive weights. For radial grids the second coordinate is 0.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Area (2D) or length (1D) of the cell each node represents.
    pub cell_sizes: Vec<f64>,
    pub layout: Layout,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    /// Uniform cell-centre grid on [x0, x0 + nx h] × [y0, y0 + ny h].
    pub fn cartesian(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(h > 0.0) {
            return Err(Error::InvalidArgument("cartesian grid needs nx, ny > 0 and h > 0".into()));
        }
        let mut nodes = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                nodes.push([x0 + (i as f64 + 0.5) * h, y0 + (j as f64 + 0.5) * h]);
            }
        }
        let n = nodes.len();
        Ok(Self { nodes, weights: vec![h * h; n], cell_sizes: vec![h * h; n], layout: Layout::Cartesian { nx, ny, h, x0, y0 } })
    }

    /// Square grid of cell size h covering [-half, half]² (rounded out).
    pub fn centered_square(half: f64, h: f64) -> Result<Self> {
        let n = (2.0 * half / h).ceil().max(1.0) as usize;
        let start = -0.5 * n as f64 * h;
        Self::cartesian(n, n, h, start, start)
    }

    /// Composite Gauss–Legendre rule on the half-line segment [0, r_max] with
    /// breakpoints, weights including the r dr measure.
    pub fn radial(breaks: &[f64], panels_per_segment: usize, order: usize) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks[0] < 0.0 {
            return Err(Error::InvalidArgument("radial breakpoints must increase from >= 0".into()));
        }
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut cells = Vec::new();
        for seg in breaks.windows(2) {
            let len = (seg[1] - seg[0]) / panels_per_segment as f64;
            for p in 0..panels_per_segment {
                let a = seg[0] + p as f64 * len;
                for (xi, wi) in x.iter().zip(&w) {
                    let r = a + 0.5 * len * (xi + 1.0);
                    nodes.push([r, 0.0]);
                    weights.push(0.5 * len * wi * r);
                    cells.push(0.5 * len * wi);
                }
            }
        }
        Ok(Self { nodes, weights, cell_sizes: cells, layout: Layout::Radial })
    }

    /// Polar product rule: Gauss–Legendre panels in r times the trapezoid
    /// rule in θ. Cell sizes are the polar cell areas.
    pub fn polar(breaks: &[f64], panels_per_segment: usize, order: usize, n_theta: usize) -> Result<Self> {
        let radial = Self::radial(breaks, panels_per_segment, order)?;
        let dth = 2.0 * PI / n_theta as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (p, &w) in radial.nodes.iter().zip(&radial.weights) {
            for k in 0..n_theta {
                let th = (k as f64 + 0.5) * dth;
                nodes.push([p[0] * th.cos(), p[0] * th.sin()]);
                weights.push(w * dth);
            }
        }
        let cells = weights.clone();
        Ok(Self { nodes, weights, cell_sizes: cells, layout: Layout::Scattered })
    }
}

/// Mean of ln|x - y| over a disk of the given area centred at x.
pub fn log_selfterm(cell_area: f64) -> Result<f64> {
    if !(cell_area > 0.0) {
        return Err(Error::Domain(format!("cell area must be positive, got {cell_area}")));
    }
    Ok(0.5 * (cell_area / PI).ln() - 0.5)
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Value and error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * hl, ((rk - rg) * hl).abs())
}

/// Adaptive G7K15 on [a, b] to absolute or relative tolerance.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    segs.push((a, b, v, e));
    for _ in 0..4000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Integrability(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral { value: total, error: err });
        }
        let (idx, _) = segs.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = segs.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    let total: f64 = segs.iter().map(|s| s.2).sum();
    let err: f64 = segs.iter().map(|s| s.3).sum();
    if err <= 1e3 * abs_tol.max(rel_tol * total.abs()) {
        return Ok(Integral { value: total, error: err });
    }
    Err(Error::Integrability(format!("adaptive quadrature on [{a}, {b}] stalled at error {err:.3e}")))
}

/// Sum of adaptive integrals over consecutive breakpoint segments.
pub fn integrate_pieces(mut f: impl FnMut(f64) -> f64, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    let mut out = Integral { value: 0.0, error: 0.0 };
    let n = (breaks.len().max(2) - 1) as f64;
    for w in breaks.windows(2) {
        let r = integrate(&mut f, w[0], w[1], abs_tol / n, rel_tol)?;
        out.value += r.value;
        out.error += r.error;
    }
    Ok(out)
}

/// ∫_a^∞ f via r = a + t/(1-t), t ∈ [0, 1).
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}
