//! Compact-group machinery for SO(3) and SO(2): Euler-angle rotations,
//! irreducible representations, Haar quadrature and the group-averaged
//! projectors and intertwiners acting on sampled functions.
//!
//! Generators follow the anti-Hermitian convention `Ĵₖ = ρ_*(eₖ)`, so that
//! `[Ĵ₁, Ĵ₂] = Ĵ₃` mirrors `[J₁, J₂] = J₃` for the real generators
//! `Jₖ v = eₖ × v`, and `Ĵ₃ = diag(iℓ, …, −iℓ)`. Basis index `a` carries
//! the weight `m = ℓ − a`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mat3;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Euler angles of `g = e^{αJ₃} e^{βJ₂} e^{γJ₃}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

impl EulerAngles {
    /// Builds angles and normalizes them into α, γ ∈ [0, 2π), β ∈ [0, π]
    /// without changing the rotation they describe.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        let mut b = beta.rem_euclid(2.0 * PI);
        let (mut a, mut c) = (alpha, gamma);
        if b > PI {
            b = 2.0 * PI - b;
            a += PI;
            c += PI;
        }
        Self { alpha: wrap_2pi(a), beta: b, gamma: wrap_2pi(c) }
    }

    pub fn identity() -> Self {
        Self { alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }

    /// Extract angles from a proper rotation. At β ∈ {0, π} the pair (α, γ)
    /// is degenerate and γ is set to 0.
    pub fn from_rotation(g: &Mat3) -> Self {
        let sb = (g[(0, 2)].powi(2) + g[(1, 2)].powi(2)).sqrt();
        let beta = sb.atan2(g[(2, 2)]);
        if sb > 1e-12 {
            let alpha = g[(1, 2)].atan2(g[(0, 2)]);
            let gamma = g[(2, 1)].atan2(-g[(2, 0)]);
            Self::new(alpha, beta, gamma)
        } else if g[(2, 2)] > 0.0 {
            Self::new(g[(1, 0)].atan2(g[(0, 0)]), 0.0, 0.0)
        } else {
            Self::new((-g[(1, 0)]).atan2(-g[(0, 0)]), PI, 0.0)
        }
    }
}

fn rot_z(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rot_y(t: f64) -> Mat3 {
    let (s, c) = t.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rotation_from_euler(a: &EulerAngles) -> Mat3 {
    rot_z(a.alpha) * rot_y(a.beta) * rot_z(a.gamma)
}

/// Real generator `Jₖ` with `Jₖ v = eₖ × v`.
pub fn so3_generator(k: usize) -> Mat3 {
    let mut m = Mat3::zeros();
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    m[(j, i)] = 1.0;
    m[(i, j)] = -1.0;
    m
}

/// Spin-ℓ irreducible representation of SO(3).
#[derive(Debug, Clone)]
pub struct Irrep {
    ell: usize,
    generators: [CMatrix; 3],
    // iĴ₂ = V diag(μ) V†, used for exp(βĴ₂).
    j2_vectors: CMatrix,
    j2_values: Vec<f64>,
    real_basis: CMatrix,
}

impl Irrep {
    pub fn new(ell: usize) -> Self {
        let d = 2 * ell + 1;
        let l = ell as f64;
        let mut lplus = CMatrix::zeros(d, d);
        let mut lz = CMatrix::zeros(d, d);
        for a in 0..d {
            let m = l - a as f64;
            lz[(a, a)] = Complex64::new(m, 0.0);
            if a > 0 {
                // L₊|m⟩ = √(ℓ(ℓ+1) − m(m+1)) |m+1⟩
                lplus[(a - 1, a)] = Complex64::new((l * (l + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
        }
        let lminus = lplus.adjoint();
        let lx = (&lplus + &lminus) * Complex64::new(0.5, 0.0);
        let ly = (&lplus - &lminus) * Complex64::new(0.0, -0.5);
        // Ĵₖ = i·conj(Lₖ) gives Ĵ₃ = diag(im) with the so(3) structure constants.
        let generators = [lx.map(|z| I * z.conj()), ly.map(|z| I * z.conj()), lz.map(|z| I * z.conj())];
        let h = generators[1].map(|z| I * z);
        let eig = SymmetricEigen::new(h);
        let j2_values = eig.eigenvalues.iter().copied().collect();
        let real_basis = real_basis(ell);
        Self { ell, generators, j2_vectors: eig.eigenvectors, j2_values, real_basis }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn dim(&self) -> usize {
        2 * self.ell + 1
    }

    /// Weight `m` carried by basis index `a`.
    pub fn weight(&self, a: usize) -> i64 {
        self.ell as i64 - a as i64
    }

    pub fn generator(&self, k: usize) -> &CMatrix {
        &self.generators[k]
    }

    pub fn generators(&self) -> &[CMatrix; 3] {
        &self.generators
    }

    /// `ρ_*(ξ) = Σ ξₖ Ĵₖ`.
    pub fn algebra_element(&self, xi: &[f64; 3]) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for k in 0..3 {
            m += &self.generators[k] * Complex64::new(xi[k], 0.0);
        }
        m
    }

    /// `exp(ρ_*(ξ))` through the spectral decomposition of the Hermitian `iρ_*(ξ)`.
    pub fn exp_algebra(&self, xi: &[f64; 3]) -> CMatrix {
        let h = self.algebra_element(xi).map(|z| I * z);
        let eig = SymmetricEigen::new(h);
        let diag = CVector::from_iterator(
            self.dim(),
            eig.eigenvalues.iter().map(|mu| Complex64::from_polar(1.0, -mu)),
        );
        &eig.eigenvectors * CMatrix::from_diagonal(&diag) * eig.eigenvectors.adjoint()
    }

    /// Unitary change of basis whose columns are real combinations of `|m⟩`
    /// and `|−m⟩`; in this basis every generator is a real antisymmetric matrix.
    /// Column 0 is the `m = 0` vector, followed by pairs `(a_m, b_m)`, m = 1…ℓ.
    pub fn real_basis(&self) -> &CMatrix {
        &self.real_basis
    }

    /// Generators expressed in the real basis.
    pub fn real_generators(&self) -> [DMatrix<f64>; 3] {
        let u = &self.real_basis;
        let conv = |g: &CMatrix| (u.adjoint() * g * u).map(|z| z.re);
        [conv(&self.generators[0]), conv(&self.generators[1]), conv(&self.generators[2])]
    }

    /// `ρ^ℓ(g) = exp(αĴ₃) exp(βĴ₂) exp(γĴ₃)`.
    pub fn wigner_d(&self, a: &EulerAngles) -> CMatrix {
        let d = self.dim();
        let phase = |t: f64| CVector::from_fn(d, |i, _| Complex64::from_polar(1.0, t * self.weight(i) as f64));
        let left = phase(a.alpha);
        let right = phase(a.gamma);
        let mid_diag =
            CVector::from_iterator(d, self.j2_values.iter().map(|mu| Complex64::from_polar(1.0, -a.beta * mu)));
        let mid = &self.j2_vectors * CMatrix::from_diagonal(&mid_diag) * self.j2_vectors.adjoint();
        CMatrix::from_fn(d, d, |i, j| left[i] * mid[(i, j)] * right[j])
    }

    pub fn wigner_d_of(&self, g: &Mat3) -> CMatrix {
        self.wigner_d(&EulerAngles::from_rotation(g))
    }
}

pub fn generators(ell: usize) -> Irrep {
    Irrep::new(ell)
}

pub fn wigner_d(ell: usize, a: &EulerAngles) -> CMatrix {
    Irrep::new(ell).wigner_d(a)
}

fn real_basis(ell: usize) -> CMatrix {
    let d = 2 * ell + 1;
    let mut u = CMatrix::zeros(d, d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    u[(ell, 0)] = Complex64::new(1.0, 0.0);
    for m in 1..=ell {
        let plus = ell - m; // index of |m⟩
        let minus = ell + m; // index of |−m⟩
        let eps = if m % 2 == 0 { 1.0 } else { -1.0 };
        let (ca, cb) = (2 * m - 1, 2 * m);
        u[(plus, ca)] = Complex64::new(s, 0.0);
        u[(minus, ca)] = Complex64::new(eps * s, 0.0);
        u[(plus, cb)] = Complex64::new(0.0, s);
        u[(minus, cb)] = Complex64::new(0.0, -eps * s);
    }
    u
}

/// One-dimensional irreducible representation `e^{inα}` of SO(2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct So2Irrep {
    pub n: i64,
}

impl So2Irrep {
    pub fn character(&self, alpha: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.n as f64 * alpha)
    }
}

pub fn so2_irrep(n: i64) -> So2Irrep {
    So2Irrep { n }
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on Pₙ.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm1) / (z * z - 1.0);
            let dz = p / dp;
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

/// Product Haar quadrature on SO(3): Gauss-Legendre in cos β, trapezoid in α and γ.
///
/// With band limit `L` it integrates every product `ρ^ℓ_{ij} ρ^{ℓ'}_{kl}`
/// with ℓ, ℓ' ≤ L exactly.
#[derive(Debug, Clone)]
pub struct HaarQuadrature {
    band_limit: usize,
    nodes: Vec<EulerAngles>,
    weights: Vec<f64>,
    raw_volume: f64,
}

impl HaarQuadrature {
    pub fn new(band_limit: usize) -> Self {
        let nb = band_limit + 1;
        let na = 2 * band_limit + 1;
        let (xs, ws) = gauss_legendre(nb);
        let da = 2.0 * PI / na as f64;
        let mut nodes = Vec::with_capacity(nb * na * na);
        let mut weights = Vec::with_capacity(nb * na * na);
        let mut raw_volume = 0.0;
        for (x, wb) in xs.iter().zip(&ws) {
            let beta = x.clamp(-1.0, 1.0).acos();
            for ia in 0..na {
                for ig in 0..na {
                    nodes.push(EulerAngles { alpha: ia as f64 * da, beta, gamma: ig as f64 * da });
                    // sin β dα dβ dγ with dcosβ absorbing sin β
                    let raw = wb * da * da;
                    raw_volume += raw;
                    weights.push(raw / (8.0 * PI * PI));
                }
            }
        }
        Self { band_limit, nodes, weights, raw_volume }
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn nodes(&self) -> &[EulerAngles] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of the unnormalized density `sin β dα dβ dγ`.
    pub fn raw_volume(&self) -> f64 {
        self.raw_volume
    }

    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(values).map(|(w, v)| v * *w).sum()
    }

    /// `ρ^ℓ(g)` at every node.
    pub fn representation_table(&self, irrep: &Irrep) -> Vec<CMatrix> {
        self.nodes.par_iter().map(|a| irrep.wigner_d(a)).collect()
    }

    pub fn sample<F: Fn(&EulerAngles) -> Complex64 + Sync + Send>(&self, band: usize, f: F) -> SampledGroupFunction {
        SampledGroupFunction { band, values: self.nodes.par_iter().map(f).collect() }
    }
}

pub fn haar_quadrature(band_limit: usize) -> HaarQuadrature {
    HaarQuadrature::new(band_limit)
}

/// Values of a scalar function at the nodes of a [`HaarQuadrature`], with the
/// band it is declared to be limited to.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGroupFunction {
    pub band: usize,
    pub values: Vec<Complex64>,
}

impl SampledGroupFunction {
    pub fn norm_squared(&self, quad: &HaarQuadrature) -> f64 {
        quad.weights.iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &SampledGroupFunction, quad: &HaarQuadrature) -> Complex64 {
        quad.weights.iter().zip(self.values.iter().zip(&other.values)).map(|(w, (a, b))| a.conj() * b * *w).sum()
    }

    pub fn max_abs_diff(&self, other: &SampledGroupFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &SampledGroupFunction) -> SampledGroupFunction {
        SampledGroupFunction {
            band: self.band.max(other.band),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Group-averaged operator `d^ℓ ∫ ρ^ℓ_{ij}(g) U(g) dμ(g)` with the left-regular
/// action `(U(g)f)(h) = f(g⁻¹h)`, evaluated at the nodes through the Haar
/// invariance `∫ F(g) f(g⁻¹h) dg = ∫ F(h g'⁻¹) f(g') dg'`.
fn group_average(
    quad: &HaarQuadrature,
    irrep: &Irrep,
    table: &[CMatrix],
    f: &SampledGroupFunction,
    i: usize,
    j: usize,
) -> Result<SampledGroupFunction> {
    let d = irrep.dim();
    if i >= d || j >= d {
        return Err(Error::Domain(format!("row/column ({i}, {j}) out of range for dimension {d}")));
    }
    if f.values.len() != quad.len() {
        return Err(Error::Dimension { expected: quad.len(), actual: f.values.len() });
    }
    let required = 2 * f.band.max(irrep.ell());
    if quad.band_limit() < required {
        return Err(Error::BandLimit { quadrature: quad.band_limit(), required });
    }
    // ρ_{ij}(h g⁻¹) = Σₖ ρ_{ik}(h) conj(ρ_{jk}(g)), so the average factors
    // through the coefficients cₖ = Σ_g w_g conj(ρ_{jk}(g)) f(g).
    let dl = d as f64;
    let coeffs: Vec<Complex64> = (0..d)
        .map(|k| {
            table.iter().zip(&f.values).zip(&quad.weights).map(|((dg, fv), w)| dg[(j, k)].conj() * fv * *w).sum()
        })
        .collect();
    let values = table
        .par_iter()
        .map(|dh| (0..d).map(|k| dh[(i, k)] * coeffs[k]).sum::<Complex64>() * dl)
        .collect();
    Ok(SampledGroupFunction { band: f.band, values })
}

/// Projector `P^ℓ_i`; `i` is a 0-based basis index (weight `m = ℓ − i`).
pub fn peter_weyl_project(
    quad: &HaarQuadrature,
    irrep: &Irrep,
    f: &SampledGroupFunction,
    i: usize,
) -> Result<SampledGroupFunction> {
    let table = quad.representation_table(irrep);
    group_average(quad, irrep, &table, f, i, i)
}

/// Intertwiner `V^ℓ_{ij}`; `V^ℓ_{ii} = P^ℓ_i` and `V_{ij} V_{kl} = δ_{jk} V_{il}`.
pub fn intertwiner_v(
    quad: &HaarQuadrature,
    irrep: &Irrep,
    f: &SampledGroupFunction,
    i: usize,
    j: usize,
) -> Result<SampledGroupFunction> {
    let table = quad.representation_table(irrep);
    group_average(quad, irrep, &table, f, i, j)
}

/// Reusable projector bank for one irrep on one quadrature.
pub struct Projector<'a> {
    quad: &'a HaarQuadrature,
    irrep: Irrep,
    table: Vec<CMatrix>,
}

impl<'a> Projector<'a> {
    pub fn new(quad: &'a HaarQuadrature, ell: usize) -> Self {
        let irrep = Irrep::new(ell);
        let table = quad.representation_table(&irrep);
        Self { quad, irrep, table }
    }

    pub fn irrep(&self) -> &Irrep {
        &self.irrep
    }

    /// `ρ^ℓ_{ij}` sampled at the nodes.
    pub fn matrix_element(&self, i: usize, j: usize) -> SampledGroupFunction {
        SampledGroupFunction { band: self.irrep.ell(), values: self.table.iter().map(|m| m[(i, j)]).collect() }
    }

    pub fn project(&self, f: &SampledGroupFunction, i: usize) -> Result<SampledGroupFunction> {
        group_average(self.quad, &self.irrep, &self.table, f, i, i)
    }

    pub fn intertwine(&self, f: &SampledGroupFunction, i: usize, j: usize) -> Result<SampledGroupFunction> {
        group_average(self.quad, &self.irrep, &self.table, f, i, j)
    }
}
