//! Eigen-solvers: dense Hermitian (nalgebra), shift-invert Lanczos on a
//! banded Cholesky factorization, Sturm bisection for tridiagonal pencils.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sparse Hermitian matrix in CSR form with sorted column indices.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseHermitian {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, C64)>) -> Result<Self> {
        if trips.iter().any(|t| t.0 >= n || t.1 >= n) {
            return Err(Error::InvalidArgument("triplet index out of range".into()));
        }
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trips {
            if last == Some((i, j)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, cols, vals })
    }

    pub fn from_dense(a: &DMatrix<C64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Contract("matrix is not square".into()));
        }
        let mut trips = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != C64::new(0.0, 0.0) {
                    trips.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), trips)
    }

    pub fn from_real_dense(a: &DMatrix<f64>) -> Result<Self> {
        Self::from_dense(&a.map(|x| C64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for i in 0..self.n {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    /// max |A_ij - conj(A_ji)| / max |A_ij|.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                scale = scale.max(v.norm());
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn gershgorin_lower(&self) -> f64 {
        let mut lo = f64::INFINITY;
        for i in 0..self.n {
            let mut d = 0.0;
            let mut off = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v.re
                } else {
                    off += v.norm()
                }
            }
            lo = lo.min(d - off);
        }
        lo
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                a[(i, j)] = v;
            }
        }
        a
    }

    /// ⟨x, A x⟩ (real part; exact for Hermitian A).
    pub fn quadratic_form(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Hermitian positive-definite banded Cholesky factor, lower band stored by row.
pub struct BandedCholesky {
    n: usize,
    b: usize,
    l: Vec<C64>,
}

impl BandedCholesky {
    /// Factors A - shift·I. Returns None when the shifted matrix is not
    /// positive definite.
    pub fn factor(a: &SparseHermitian, shift: f64) -> Option<Self> {
        let n = a.dim();
        let b = a.bandwidth();
        let w = b + 1;
        let mut l = vec![C64::new(0.0, 0.0); n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    l[i * w + (j + b - i)] = if i == j { v - shift } else { v };
                }
            }
        }
        for i in 0..n {
            let k0 = i.saturating_sub(b);
            for j in k0..=i {
                let mut s = l[i * w + (j + b - i)];
                let ri = i * w + b - i;
                let rj = j * w + b - j;
                for k in k0..j {
                    s -= l[ri + k] * l[rj + k].conj();
                }
                if i == j {
                    if !(s.re > 0.0) || !s.re.is_finite() {
                        return None;
                    }
                    l[ri + i] = C64::new(s.re.sqrt(), 0.0);
                } else {
                    l[ri + j] = s / l[rj + j].re;
                }
            }
        }
        Some(Self { n, b, l })
    }

    /// Solves (L L^H) x = rhs in place.
    pub fn solve(&self, x: &mut [C64]) {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        for i in 0..n {
            let ri = i * w + b - i;
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[ri + k] * x[k];
            }
            x[i] = s / self.l[ri + i].re;
        }
        for i in (0..n).rev() {
            let ri = i * w + b - i;
            let zi = x[i] / self.l[ri + i].re;
            x[i] = zi;
            for k in i.saturating_sub(b)..i {
                x[k] -= self.l[ri + k].conj() * zi;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Required residual ‖Hv − Ev‖ / ‖v‖.
    pub tol: f64,
    /// Dense solver is used up to this dimension.
    pub dense_limit: usize,
    pub seed: u64,
    /// Lanczos restarts before giving up.
    pub max_restarts: usize,
    /// Krylov subspace size per restart.
    pub krylov_dim: usize,
    /// Shift for shift-invert; must lie below the spectrum. Defaults to a
    /// Gershgorin bound.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-8, dense_limit: 400, seed: 0x5eed, max_restarts: 40, krylov_dim: 120, shift: None }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

/// The k algebraically smallest eigenpairs, ascending, vectors orthonormal.
pub fn lowest_eigenpairs(op: &SparseHermitian, k: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let defect = op.hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::Contract(format!("operator is not Hermitian (defect {defect:.3e})")));
    }
    let pairs = if n <= opts.dense_limit { dense_lowest(op, k) } else { shift_invert_lanczos(op, k, opts)? };
    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    if worst > opts.tol {
        return Err(Error::Convergence { what: "lowest_eigenpairs".into(), residual: worst });
    }
    Ok(pairs)
}

fn residual(op: &SparseHermitian, v: &[C64], e: f64) -> f64 {
    let mut y = vec![C64::new(0.0, 0.0); v.len()];
    op.apply(v, &mut y);
    let r: f64 = y.iter().zip(v).map(|(a, b)| (a - b * e).norm_sqr()).sum();
    r.sqrt() / norm(v)
}

fn dense_lowest(op: &SparseHermitian, k: usize) -> Vec<EigenPair> {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut idx: Vec<usize> = (0..op.dim()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    idx.into_iter()
        .take(k)
        .map(|i| {
            let v: Vec<C64> = eig.eigenvectors.column(i).iter().copied().collect();
            let e = eig.eigenvalues[i];
            EigenPair { value: e, residual: residual(op, &v, e), vector: v }
        })
        .collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Ritz values (descending) and vectors of the Lanczos tridiagonal.
fn tridiagonal_ritz(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(m, m);
    for (c, &i) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// A short Lanczos pass at the safe shift estimates the k lowest eigenvalues;
/// the shift is then moved just below them, as far as the Cholesky factor
/// still exists (which certifies that it lies below the spectrum).
fn pilot_shift(op: &SparseHermitian, k: usize, chol: BandedCholesky, sigma: f64, rng: &mut ChaCha8Rng) -> BandedCholesky {
    let n = op.dim();
    let m = (3 * k + 40).min(n);
    let mut basis = vec![random_unit(rng, n)];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    for j in 0..m {
        let mut w = basis[j].clone();
        chol.solve(&mut w);
        alpha.push(dot(&basis[j], &w).re);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        if j + 1 == m || b < 1e-14 {
            break;
        }
        w.iter_mut().for_each(|x| *x /= b);
        beta.push(b);
        basis.push(w);
    }
    let (vals, _) = tridiagonal_ritz(&alpha, &beta);
    if vals.len() < k || !(vals[0] > 0.0) {
        return chol;
    }
    let e1 = sigma + 1.0 / vals[0];
    let ek = sigma + 1.0 / vals[(k - 1).min(vals.len() - 1)];
    let mut step = (ek - e1).max(1e-3 * e1.abs()).max(1e-8);
    let mut s = e1 - 0.5 * step;
    while s > sigma {
        if let Some(c) = BandedCholesky::factor(op, s) {
            return c;
        }
        step *= 4.0;
        s = e1 - step;
    }
    chol
}

fn shift_invert_lanczos(op: &SparseHermitian, k: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    let mut sigma = opts.shift.unwrap_or_else(|| {
        let g = op.gershgorin_lower();
        g - 1e-3 * g.abs().max(1.0)
    });
    let chol = loop {
        if let Some(c) = BandedCholesky::factor(op, sigma) {
            break c;
        }
        // Shift was not below the spectrum; move it down.
        sigma -= sigma.abs().max(1.0);
        if !sigma.is_finite() {
            return Err(Error::Convergence { what: "shift selection".into(), residual: f64::INFINITY });
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let chol = if opts.shift.is_none() { pilot_shift(op, k, chol, sigma, &mut rng) } else { chol };
    // Locked pairs in the transformed spectrum θ = 1/(λ - σ), descending.
    let mut locked: Vec<(f64, Vec<C64>)> = Vec::new();
    let m_max = opts.krylov_dim.min(n);
    let mut quiet_restarts = 0;
    let mut best_res = f64::INFINITY;
    for _restart in 0..opts.max_restarts {
        let locked_vecs: Vec<Vec<C64>> = locked.iter().map(|l| l.1.clone()).collect();
        let mut v = random_unit(&mut rng, n);
        orthogonalize(&mut v, &locked_vecs);
        let s = norm(&v);
        if s < 1e-12 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<C64>> = vec![v];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let need = k.saturating_sub(locked.len()).max(1);
        let threshold = if locked.len() >= k { locked[k - 1].0 } else { 0.0 };
        let mut found: Vec<(f64, Vec<C64>)> = Vec::new();
        for j in 0..m_max {
            let mut w = basis[j].clone();
            chol.solve(&mut w);
            orthogonalize(&mut w, &locked_vecs);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            let last = j + 1 == m_max || b < 1e-14 * a.abs().max(1e-300);
            if (j + 1) % 5 == 0 || last {
                let (vals, vecs) = tridiagonal_ritz(&alpha, &beta);
                let res = |c: usize| (b * vecs[(j, c)]).abs();
                let conv = |c: usize| res(c) <= 1e-2 * opts.tol * vals[c] * vals[c];
                let verifying = locked.len() >= k;
                let top = if verifying { 1 } else { need.min(vals.len()) };
                if (0..top).all(conv) || last {
                    for c in 0..vals.len().min(need + 2) {
                        if verifying && vals[c] <= threshold {
                            break;
                        }
                        if !conv(c) {
                            best_res = best_res.min(res(c));
                            continue;
                        }
                        // x = T y / θ: the Ritz vector plus its residual
                        // direction, so that ‖Hx - Ex‖ ≈ res/θ².
                        let mut x = vec![C64::new(0.0, 0.0); n];
                        for (i, q) in basis.iter().enumerate() {
                            let s = vecs[(i, c)];
                            for (xe, qe) in x.iter_mut().zip(q) {
                                *xe += qe * s;
                            }
                        }
                        let s = vecs[(j, c)] / vals[c];
                        for (xe, we) in x.iter_mut().zip(&w) {
                            *xe += we * s;
                        }
                        found.push((vals[c], x));
                    }
                    break;
                }
            }
            if last {
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            beta.push(b);
            basis.push(w);
        }
        let before = locked.len();
        let kth = if locked.len() >= k { locked[k - 1].0 } else { f64::NEG_INFINITY };
        for (th, mut x) in found {
            if locked.len() >= k && th <= kth {
                continue;
            }
            let lv: Vec<Vec<C64>> = locked.iter().map(|l| l.1.clone()).collect();
            orthogonalize(&mut x, &lv);
            let nx = norm(&x);
            if nx < 0.5 {
                continue;
            }
            x.iter_mut().for_each(|e| *e /= nx);
            locked.push((th, x));
        }
        locked.sort_by(|a, b| b.0.total_cmp(&a.0));
        if locked.len() >= k {
            if locked.len() == before {
                quiet_restarts += 1;
            } else {
                quiet_restarts = 0;
            }
            if quiet_restarts >= 1 {
                break;
            }
        }
    }
    if locked.len() < k {
        return Err(Error::Convergence { what: "shift-invert Lanczos".into(), residual: best_res });
    }
    let mut pairs: Vec<EigenPair> = locked
        .into_iter()
        .take(k)
        .map(|(_, v)| {
            let e = op.quadratic_form(&v) / dot(&v, &v).re;
            EigenPair { value: e, residual: residual(op, &v, e), vector: v }
        })
        .collect();
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}

/// Number of eigenvalues of the pencil (K, diag(m)) below e, with K symmetric
/// tridiagonal (diag d, off-diagonal o) and m > 0.
pub fn pencil_count_below(d: &[f64], o: &[f64], m: &[f64], e: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - e * m[0];
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let qq = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = d[i] - e * m[i] - o[i - 1] * o[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the pencil with index < count, by bisection inside [lo, hi].
pub fn pencil_eigenvalues_in(d: &[f64], o: &[f64], m: &[f64], lo: f64, hi: f64, rel_tol: f64) -> Vec<f64> {
    let n_lo = pencil_count_below(d, o, m, lo);
    let n_hi = pencil_count_below(d, o, m, hi);
    (n_lo..n_hi)
        .map(|idx| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                if pencil_count_below(d, o, m, c) > idx {
                    b = c
                } else {
                    a = c
                }
                if (b - a) <= rel_tol * a.abs().max(b.abs()) + 1e-300 {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvector of the pencil near eigenvalue e, by inverse iteration,
/// normalized in the m-weighted norm.
pub fn pencil_eigenvector(d: &[f64], o: &[f64], m: &[f64], e: f64) -> Vec<f64> {
    let n = d.len();
    let shift = e * (1.0 + 1e-13 * e.signum()) - 1e-300;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64 / 101.0).collect();
    for _ in 0..4 {
        let rhs: Vec<f64> = x.iter().zip(m).map(|(a, b)| a * b).collect();
        x = tridiagonal_solve(d, o, m, shift, &rhs);
        let s = x.iter().zip(m).map(|(a, b)| a * a * b).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= s);
    }
    x
}

/// Solves (K - e M) x = rhs, Thomas algorithm with tiny-pivot guard.
fn tridiagonal_solve(d: &[f64], o: &[f64], m: &[f64], e: f64, rhs: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut piv = d[0] - e * m[0];
    if piv == 0.0 {
        piv = 1e-300;
    }
    y[0] = rhs[0] / piv;
    for i in 1..n {
        c[i - 1] = o[i - 1] / piv;
        piv = d[i] - e * m[i] - o[i - 1] * c[i - 1];
        if piv == 0.0 {
            piv = 1e-300;
        }
        y[i] = (rhs[i] - o[i - 1] * y[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// Largest eigenvalue of a real symmetric operator given as a matvec, by
/// Lanczos with full reorthogonalization and explicit restarts.
pub fn largest_eigenvalue_real(n: usize, mut apply: impl FnMut(&[f64], &mut [f64]), rel_tol: f64, seed: u64) -> Result<(f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let m_max = n.min(60);
    let mut best = (f64::NEG_INFINITY, v.clone(), f64::INFINITY);
    for _ in 0..30 {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        let mut basis = vec![v.clone()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut w = vec![0.0; n];
        for j in 0..m_max {
            apply(&basis[j], &mut w);
            let a: f64 = basis[j].iter().zip(&w).map(|(x, y)| x * y).sum();
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c: f64 = q.iter().zip(&w).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let last = j + 1 == m_max || b < 1e-13 * a.abs().max(1e-300);
            if (j + 1) % 4 == 0 || last {
                let (vals, vecs) = tridiagonal_ritz(&alpha, &beta);
                let res = (b * vecs[(j, 0)]).abs();
                if res <= rel_tol * vals[0].abs().max(1e-300) || last {
                    let mut x = vec![0.0; n];
                    for (i, q) in basis.iter().enumerate() {
                        x.iter_mut().zip(q).for_each(|(a, b)| *a += vecs[(i, 0)] * b);
                    }
                    if res <= rel_tol * vals[0].abs().max(1e-300) || b < 1e-13 * a.abs().max(1e-300) {
                        return Ok((vals[0], x));
                    }
                    if res < best.2 {
                        best = (vals[0], x.clone(), res);
                    }
                    v = x;
                    break;
                }
            }
            w.iter_mut().for_each(|x| *x /= b);
            beta.push(b);
            basis.push(w.clone());
        }
    }
    Err(Error::Convergence { what: "Lanczos (largest eigenvalue)".into(), residual: best.2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let op = SparseHermitian::from_real_dense(&a).unwrap();
        let p = lowest_eigenpairs(&op, 2, &EigenOptions::default()).unwrap();
        assert!((p[0].value + 1.0).abs() < 1e-14 && (p[1].value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity() {
        let op = SparseHermitian::from_real_dense(&DMatrix::identity(3, 3)).unwrap();
        let p = lowest_eigenpairs(&op, 1, &EigenOptions::default()).unwrap();
        assert!((p[0].value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        let op = SparseHermitian::from_real_dense(&a).unwrap();
        assert!(matches!(lowest_eigenpairs(&op, 1, &EigenOptions::default()), Err(Error::Contract(_))));
        assert!(lowest_eigenpairs(&op, 3, &EigenOptions::default()).is_err());
    }

    fn laplacian_1d(n: usize, h: f64) -> SparseHermitian {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, c(2.0 / (h * h))));
            if i + 1 < n {
                t.push((i, i + 1, c(-1.0 / (h * h))));
                t.push((i + 1, i, c(-1.0 / (h * h))));
            }
        }
        SparseHermitian::from_triplets(n, t).unwrap()
    }

    #[test]
    fn lanczos_matches_toeplitz_closed_form() {
        let n = 600;
        let h = 1.0 / (n as f64 + 1.0);
        let op = laplacian_1d(n, h);
        let opts = EigenOptions { dense_limit: 0, ..Default::default() };
        let p = lowest_eigenpairs(&op, 4, &opts).unwrap();
        for (k, pair) in p.iter().enumerate() {
            let th = (k as f64 + 1.0) * std::f64::consts::PI * h / 2.0;
            let exact = 4.0 / (h * h) * th.sin().powi(2);
            assert!((pair.value - exact).abs() < 1e-8 * exact, "{k}: {} vs {exact}", pair.value);
        }
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&p[i].vector, &p[j].vector).norm();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lanczos_finds_degenerate_pairs() {
        // Two decoupled identical chains: every eigenvalue is doubled.
        let n = 300;
        let h = 0.01;
        let mut t = Vec::new();
        for blk in 0..2 {
            let o = blk * n;
            for i in 0..n {
                t.push((o + i, o + i, c(2.0 / (h * h))));
                if i + 1 < n {
                    t.push((o + i, o + i + 1, c(-1.0 / (h * h))));
                    t.push((o + i + 1, o + i, c(-1.0 / (h * h))));
                }
            }
        }
        let op = SparseHermitian::from_triplets(2 * n, t).unwrap();
        let opts = EigenOptions { dense_limit: 0, ..Default::default() };
        let p = lowest_eigenpairs(&op, 4, &opts).unwrap();
        assert!((p[0].value - p[1].value).abs() < 1e-8 * p[0].value);
        assert!((p[2].value - p[3].value).abs() < 1e-8 * p[2].value);
        assert!(p[2].value > 3.0 * p[0].value);
    }

    #[test]
    fn pencil_bisection_and_vectors() {
        let n = 200;
        let h = 1.0 / (n as f64 + 1.0);
        let d = vec![2.0 / h; n];
        let o = vec![-1.0 / h; n - 1];
        let m = vec![h; n];
        let ev = pencil_eigenvalues_in(&d, &o, &m, 0.0, 50.0, 1e-14);
        assert_eq!(ev.len(), 2);
        let exact = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert!((ev[0] - exact).abs() < 1e-10 * exact);
        let v = pencil_eigenvector(&d, &o, &m, ev[0]);
        assert!(v.iter().all(|x| *x > 0.0) || v.iter().all(|x| *x < 0.0));
    }

    #[test]
    fn real_lanczos_largest() {
        let n = 50;
        let (val, _) = largest_eigenvalue_real(
            n,
            |x, y| {
                for i in 0..n {
                    y[i] = (i as f64 + 1.0) * x[i];
                }
            },
            1e-12,
            1,
        )
        .unwrap();
        assert!((val - 50.0).abs() < 1e-9);
    }
}
