//! Smallest eigenpairs of the symmetric-definite pencil `S u = λ W u`.
//!
//! The dense path reduces with a Cholesky factor of `W`. The iterative path
//! builds a block Krylov space of the shift-inverted operator `(S − σW)⁻¹W`
//! with `W`-orthogonalization and extracts Ritz pairs of the original pencil.

use std::io::Write;
use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::CMatrix;
use crate::operators::{Layout, ReducedOperator};
use crate::sparse::{CsrMatrix, EnvelopeCholesky};

pub const DENSE_CAP: usize = 4000;
pub const DEFAULT_SEED: u64 = 0x5eed_0f1a_7ce5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// `‖Su − λWu‖ / ‖Wu‖` for each pair.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub tolerance: f64,
    pub method: String,
    pub dim: usize,
    pub layout: Option<Layout>,
    pub seconds: f64,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,eigenvalue,residual")?;
        for (i, (l, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            writeln!(out, "{i},{l:.16e},{r:.16e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterativeOptions {
    pub tol: f64,
    pub shift: f64,
    pub block: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, shift: 0.0, block: 4, max_basis: 0, max_restarts: 60, seed: DEFAULT_SEED }
    }
}

fn residual_norm(s: &CsrMatrix, w: &[f64], u: &[f64], lambda: f64) -> f64 {
    let su = s.matvec(u);
    let num: f64 = su.iter().zip(u.iter().zip(w)).map(|(a, (x, wi))| (a - lambda * wi * x).powi(2)).sum();
    let den: f64 = u.iter().zip(w).map(|(x, wi)| (wi * x).powi(2)).sum();
    (num / den).sqrt()
}

/// `k` smallest eigenpairs of a dense symmetric-definite pencil.
pub fn eigs_dense(a: &DMatrix<f64>, w: &DMatrix<f64>, k: usize) -> Result<SpectrumResult> {
    let start = Instant::now();
    let n = a.nrows();
    if a.shape() != (n, n) || w.shape() != (n, n) {
        return Err(Error::Dimension { expected: n, actual: w.nrows() });
    }
    if n > DENSE_CAP {
        return Err(Error::Config(format!("dense solver limited to {DENSE_CAP} unknowns, got {n}")));
    }
    let chol = Cholesky::new(w.clone()).ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let k = k.min(n);
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let lambda = eig.eigenvalues[idx];
        let u = linv.transpose() * eig.eigenvectors.column(idx);
        let r = a * &u - w * &u * lambda;
        let wu = w * &u;
        residuals.push(r.norm() / wu.norm());
        eigenvalues.push(lambda);
        vectors.push(u.iter().copied().collect());
    }
    Ok(SpectrumResult {
        eigenvalues,
        residuals,
        vectors,
        tolerance: 1e-10,
        method: "dense".into(),
        dim: n,
        layout: None,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `‖W⁻¹S‖_∞`.
pub fn operator_inf_norm(s: &CsrMatrix, w: &[f64]) -> f64 {
    (0..s.dim()).map(|i| s.row(i).map(|(_, v)| v.abs()).sum::<f64>() / w[i]).fold(0.0, f64::max)
}

fn w_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a.iter().zip(b)).map(|(wi, (x, y))| wi * x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes `v` against `basis` in the `W` inner product (two passes)
/// and normalizes it; returns `false` if it collapses.
fn w_orthonormalize(w: &[f64], basis: &[Vec<f64>], v: &mut [f64]) -> bool {
    let before = w_dot(w, v, v).sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = w_dot(w, b, v);
            axpy(-c, b, v);
        }
    }
    let after = w_dot(w, v, v).sqrt();
    if !(after > 1e-10 * before) || after == 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= after);
    true
}

/// `k` smallest eigenpairs of `S u = λ W u` with `S` sparse symmetric and `W`
/// positive diagonal.
pub fn eigs_iterative(s: &CsrMatrix, w: &[f64], k: usize, opts: &IterativeOptions) -> Result<SpectrumResult> {
    let start = Instant::now();
    let n = s.dim();
    if w.len() != n {
        return Err(Error::Dimension { expected: n, actual: w.len() });
    }
    if k == 0 || k > n {
        return Err(Error::Config(format!("requested {k} eigenpairs of a dimension-{n} problem")));
    }
    if w.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::NotPositiveDefinite { pivot: w.iter().position(|x| !(*x > 0.0)).unwrap(), value: 0.0 });
    }
    let factor = EnvelopeCholesky::factor(&s.shifted(opts.shift, w))?;
    let op = |x: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(w).map(|(a, b)| a * b).collect();
        factor.solve_in_place(&mut y);
        y
    };
    let p = opts.block.max(1).min(n);
    let max_basis = if opts.max_basis == 0 { (4 * k + 4 * p).max(40) } else { opts.max_basis }.min(n);
    if max_basis < k + p {
        return Err(Error::Config(format!("basis size {max_basis} too small for {k} pairs with block {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // Residuals cannot drop below rounding in `W⁻¹S`.
    let floor = 64.0 * f64::EPSILON * operator_inf_norm(s, w);

    // `images[i] = OP basis[i]`, kept alongside the basis.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut block: Vec<Vec<f64>> =
        (0..p).map(|_| op(&(0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>())).collect();
    let mut best: Vec<f64> = vec![f64::INFINITY; k];
    let mut last = None;

    for _restart in 0..=opts.max_restarts {
        // Expand the block Krylov space.
        while basis.len() < max_basis {
            let mut added = 0;
            for mut v in block.drain(..) {
                if basis.len() >= max_basis {
                    break;
                }
                if w_orthonormalize(w, &basis, &mut v) {
                    images.push(op(&v));
                    basis.push(v);
                    added += 1;
                }
            }
            if added == 0 {
                // Invariant subspace or breakdown: refresh with random directions.
                if basis.len() >= n {
                    break;
                }
                block = (0..p).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
                continue;
            }
            block = images[images.len() - added..].to_vec();
        }

        // Rayleigh-Ritz for the shift-inverted operator, θ = 1/(λ − σ).
        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |i, j| w_dot(w, &basis[i], &images[j]));
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if order.len() < k {
            return Err(Error::NoConvergence { iterations: 0, residuals: best });
        }

        let combine = |idx: usize, src: &[Vec<f64>]| -> Vec<f64> {
            let mut u = vec![0.0; n];
            for (c, v) in eig.eigenvectors.column(idx).iter().zip(src) {
                axpy(*c, v, &mut u);
            }
            u
        };
        let keep = (k + p).min(order.len());
        let vecs: Vec<Vec<f64>> = order.iter().take(keep).map(|&i| combine(i, &basis)).collect();
        let imgs: Vec<Vec<f64>> = order.iter().take(keep).map(|&i| combine(i, &images)).collect();
        // One inverse-iteration step damps the stiff components left in the
        // Ritz vectors by rounding; the images are already available.
        let mut pure: Vec<Vec<f64>> = Vec::with_capacity(k);
        for img in imgs.iter().take(k) {
            let mut u = img.clone();
            if !w_orthonormalize(w, &pure, &mut u) {
                u = img.clone();
            }
            pure.push(u);
        }
        let vals: Vec<f64> = pure
            .iter()
            .map(|u| {
                let su = s.matvec(u);
                u.iter().zip(&su).map(|(a, b)| a * b).sum::<f64>() / w_dot(w, u, u)
            })
            .collect();
        let res: Vec<f64> = (0..k).map(|i| residual_norm(s, w, &pure[i], vals[i])).collect();
        for (b, r) in best.iter_mut().zip(&res) {
            *b = b.min(*r);
        }
        let converged = (0..k).all(|i| res[i] <= opts.tol * vals[i].abs().max(1.0) + floor);
        if converged || basis.len() >= n {
            let mut idx: Vec<usize> = (0..k).collect();
            idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            last = Some((
                idx.iter().map(|&i| vals[i]).collect::<Vec<_>>(),
                idx.iter().map(|&i| res[i]).collect::<Vec<_>>(),
                idx.iter().map(|&i| pure[i].clone()).collect::<Vec<_>>(),
            ));
            if converged {
                break;
            }
            last = None;
            break;
        }

        // Thick restart: keep the leading Ritz vectors and continue from the
        // shift-inverted images of the least converged wanted ones.
        let mut worst: Vec<usize> = (0..k).collect();
        worst.sort_by(|&a, &b| res[b].total_cmp(&res[a]));
        block = worst.iter().take(p).map(|&i| imgs[i].clone()).collect();
        basis = vecs;
        images = imgs;
    }

    match last {
        Some((eigenvalues, residuals, vectors)) => Ok(SpectrumResult {
            eigenvalues,
            residuals,
            vectors,
            tolerance: opts.tol,
            method: "shift-invert block Krylov".into(),
            dim: n,
            layout: None,
            seconds: start.elapsed().as_secs_f64(),
        }),
        None => Err(Error::NoConvergence { iterations: opts.max_restarts, residuals: best }),
    }
}

/// Solver choice for reduced operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dense,
    Iterative,
    Auto,
}

/// Smallest `k` eigenpairs of a reduced operator on its free degrees of
/// freedom; returned vectors have zeros at pinned entries.
pub fn solve(op: &ReducedOperator, k: usize, method: Method, opts: &IterativeOptions) -> Result<SpectrumResult> {
    let (s, w, free) = op.restricted();
    let use_dense = match method {
        Method::Dense => true,
        Method::Iterative => false,
        Method::Auto => free.len() <= 1500,
    };
    let mut res = if use_dense {
        let mut r = eigs_dense(&s.to_dense(), &DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w)), k)?;
        r.tolerance = opts.tol;
        r
    } else {
        eigs_iterative(&s, &w, k, opts)?
    };
    res.vectors = res
        .vectors
        .iter()
        .map(|v| {
            let mut full = vec![0.0; op.dim()];
            for (x, &i) in v.iter().zip(&free) {
                full[i] = *x;
            }
            full
        })
        .collect();
    res.dim = op.dim();
    res.layout = Some(op.layout.clone());
    Ok(res)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub spacings: Vec<f64>,
    /// `estimates[g][i]` is eigenvalue `i` on grid `g`.
    pub estimates: Vec<Vec<f64>>,
    /// Observed orders from each consecutive grid triple, per eigenvalue.
    pub orders: Vec<Vec<f64>>,
}

impl ConvergenceReport {
    /// Builds the report; spacings must be strictly decreasing.
    pub fn new(spacings: Vec<f64>, estimates: Vec<Vec<f64>>) -> Result<Self> {
        if spacings.len() < 3 || estimates.len() != spacings.len() {
            return Err(Error::Config("a convergence study needs at least three grids".into()));
        }
        if spacings.windows(2).any(|p| !(p[1] < p[0])) {
            return Err(Error::Config(format!("grid spacings must be strictly decreasing: {spacings:?}")));
        }
        let k = estimates.iter().map(Vec::len).min().unwrap_or(0);
        let orders = spacings
            .windows(3)
            .zip(estimates.windows(3))
            .map(|(h, e)| {
                (0..k)
                    .map(|i| {
                        let d1 = e[0][i] - e[1][i];
                        let d2 = e[1][i] - e[2][i];
                        // Geometric refinement with ratio h₀/h₁ (= 2 for halving).
                        let ratio = h[0] / h[1];
                        (d1 / d2).abs().ln() / ratio.ln()
                    })
                    .collect()
            })
            .collect();
        Ok(Self { spacings, estimates, orders })
    }
}

/// Solves on each grid produced by `assembler(level)` and reports observed orders.
pub fn convergence_study<F>(assembler: F, levels: &[usize], k: usize, opts: &IterativeOptions) -> Result<ConvergenceReport>
where
    F: Fn(usize) -> Result<(f64, ReducedOperator)>,
{
    let mut spacings = Vec::new();
    let mut estimates = Vec::new();
    for &level in levels {
        let (h, op) = assembler(level)?;
        spacings.push(h);
        estimates.push(solve(&op, k, Method::Auto, opts)?.eigenvalues);
    }
    ConvergenceReport::new(spacings, estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{assemble_planar_radial, RadialGrid};
    use crate::sparse::TripletBuilder;

    #[test]
    fn identity_pencil() {
        let r = eigs_dense(&DMatrix::identity(4, 4), &DMatrix::identity(4, 4), 3).unwrap();
        assert_eq!(r.eigenvalues.len(), 3);
        for l in r.eigenvalues {
            assert!((l - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn random_spd_pencils_have_small_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let n = 30;
            let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let a = &b * b.transpose();
            let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let w = &c * c.transpose() + DMatrix::identity(n, n) * n as f64;
            let r = eigs_dense(&a, &w, 6).unwrap();
            assert!(r.residuals.iter().all(|x| *x < 1e-10), "{:?}", r.residuals);
            assert!(r.eigenvalues.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn non_definite_weight_is_rejected() {
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(eigs_dense(&DMatrix::identity(2, 2), &w, 1), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn iterative_matches_dense_on_planar() {
        let op = assemble_planar_radial(0, &RadialGrid::new(1.0, 500).unwrap()).unwrap();
        let opts = IterativeOptions::default();
        let d = solve(&op, 6, Method::Dense, &opts).unwrap();
        let it = solve(&op, 6, Method::Iterative, &opts).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&it.eigenvalues) {
            assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} {b}");
        }
        for i in 0..6 {
            for j in 0..6 {
                let ip = op.inner(&it.vectors[i], &it.vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-10, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn iterative_resolves_degenerate_pairs() {
        // Two uncoupled copies of a path Laplacian.
        let m = 200;
        let mut b = TripletBuilder::new(2 * m);
        for c in 0..2 {
            for i in 0..m {
                let r = c * m + i;
                b.push(r, r, 2.0);
                if i + 1 < m {
                    b.push(r, r + 1, -1.0);
                    b.push(r + 1, r, -1.0);
                }
            }
        }
        let s = b.build();
        let r = eigs_iterative(&s, &vec![1.0; 2 * m], 4, &IterativeOptions::default()).unwrap();
        let exact = |j: usize| 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / (m + 1) as f64).cos();
        let expect = [exact(1), exact(1), exact(2), exact(2)];
        for (a, b) in r.eigenvalues.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn degenerate_study_rejected() {
        let err = ConvergenceReport::new(vec![0.1, 0.1, 0.05], vec![vec![1.0]; 3]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(ConvergenceReport::new(vec![0.1, 0.05], vec![vec![1.0]; 2]).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = eigs_dense(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2), 2).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,eigenvalue,residual\n0,1.0000000000000000e0,"));
    }
}
