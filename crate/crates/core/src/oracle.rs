//! Independent reference computations: Bessel zeros, the unreduced disk
//! Laplacian, and a pointwise 6D stencil for the triatomic operator.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::harmonics::{rotation_from_euler, CMatrix, CVector, EulerAngles, Irrep};
use crate::shape::{dragt_to_vectors, equivariant_extend_with, vectors_to_dragt, FullCoordinates, ShapeCoordinates};
use crate::sparse::TripletBuilder;
use crate::spectral::{eigs_iterative, IterativeOptions};

/// Bessel function of the first kind `Jₙ(x)`, `x ≥ 0`.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 5.0 {
        bessel_series(n, x)
    } else {
        bessel_miller(n, x)
    }
}

fn bessel_series(n: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (1..=n).fold(1.0, |t, k| t * half / k as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_miller(n: usize, x: f64) -> f64 {
    let top = (x as usize).max(n) + 30 + (40.0 * x.max(n as f64)).sqrt() as usize;
    let top = top + top % 2;
    // Backward recurrence J_{k−1} = (2k/x) J_k − J_{k+1}, normalized by
    // J₀ + 2 Σ J_{2m} = 1.
    let (mut next, mut cur) = (0.0f64, 1e-30f64);
    let mut norm = 2.0 * cur;
    let mut out = if n == top { cur } else { 0.0 };
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx == n {
            out = cur;
        }
        if idx == 0 {
            norm += cur;
        } else if idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e200 {
            cur *= 1e-200;
            next *= 1e-200;
            norm *= 1e-200;
            out *= 1e-200;
        }
    }
    out / norm
}

/// `k`-th positive zero of `Jₙ` (k ≥ 1) by scanning and bisection.
pub fn bessel_zero(n: usize, k: usize) -> Result<f64> {
    if k == 0 || n > 10 || k > 20 {
        return Err(Error::Domain(format!("bessel zero j_({n},{k}) outside the supported table")));
    }
    let step = 0.05;
    let mut a = (n as f64).max(step);
    let mut fa = bessel_j(n, a);
    let mut found = 0;
    loop {
        let b = a + step;
        let fb = bessel_j(n, b);
        if fa.signum() != fb.signum() && fb != 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                while hi - lo > 1e-14 * hi {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_j(n, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
        }
        a = b;
        fa = fb;
    }
}

/// Angular sector of a disk eigenvector, merged over `±n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorLabel {
    Sector(usize),
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledEigenvalue {
    pub eigenvalue: f64,
    pub label: SectorLabel,
    /// Fraction of the weighted norm in the dominant `|n|`.
    pub purity: f64,
}

/// Polar grid on the disk: an axis node plus rings `rᵢ = i h`, `i = 1 … n_r − 1`,
/// with `n_theta` angles per ring and a Dirichlet wall at `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl DiskGrid {
    fn h(&self) -> f64 {
        self.radius / self.n_r as f64
    }

    fn index(&self, ring: usize, k: usize) -> usize {
        1 + (ring - 1) * self.n_theta + k
    }

    fn len(&self) -> usize {
        1 + (self.n_r - 1) * self.n_theta
    }
}

/// Lowest `k` eigenvalues of the full (unreduced) disk Laplacian, labelled by
/// the dominant angular Fourier sector of each eigenvector.
pub fn planar_full_spectrum(grid: &DiskGrid, k: usize, threshold: f64) -> Result<Vec<LabeledEigenvalue>> {
    if grid.n_r < 2 || grid.n_theta < 3 {
        return Err(Error::Assembly("disk grid too small".into()));
    }
    let h = grid.h();
    let dt = 2.0 * PI / grid.n_theta as f64;
    let n = grid.len();
    let mut b = TripletBuilder::new(n);
    let mut w = vec![0.0; n];
    w[0] = PI * h * h / 4.0;
    let link = |b: &mut TripletBuilder, p: usize, q: usize, c: f64| {
        b.push(p, p, c);
        b.push(q, q, c);
        b.push(p, q, -c);
        b.push(q, p, -c);
    };
    for ring in 1..grid.n_r {
        let r = ring as f64 * h;
        for t in 0..grid.n_theta {
            let p = grid.index(ring, t);
            w[p] = r * h * dt;
            let inner = if ring == 1 { 0 } else { grid.index(ring - 1, t) };
            link(&mut b, p, inner, (r - 0.5 * h) * dt / h);
            link(&mut b, p, grid.index(ring, (t + 1) % grid.n_theta), h / (r * dt));
            if ring + 1 == grid.n_r {
                b.push(p, p, (r + 0.5 * h) * dt / h);
            }
        }
    }
    let s = b.build();
    let opts = IterativeOptions { tol: 1e-9, ..Default::default() };
    let res = eigs_iterative(&s, &w, k, &opts)?;
    let max_sector = grid.n_theta / 2;
    Ok(res
        .eigenvalues
        .iter()
        .zip(&res.vectors)
        .map(|(lambda, v)| {
            let mut power = vec![0.0; max_sector + 1];
            power[0] += w[0] * v[0] * v[0];
            for ring in 1..grid.n_r {
                let slice = &v[grid.index(ring, 0)..grid.index(ring, 0) + grid.n_theta];
                let wr = w[grid.index(ring, 0)] / grid.n_theta as f64;
                for m in 0..grid.n_theta {
                    let c: Complex64 = slice
                        .iter()
                        .enumerate()
                        .map(|(t, x)| Complex64::from_polar(*x, -(m as f64) * t as f64 * dt))
                        .sum();
                    let sector = m.min(grid.n_theta - m);
                    power[sector] += wr * c.norm_sqr();
                }
            }
            let total: f64 = power.iter().sum();
            let (best, p) = power.iter().enumerate().fold((0, 0.0), |acc, (i, p)| if *p > acc.1 { (i, *p) } else { acc });
            let purity = p / total;
            let label = if purity >= threshold { SectorLabel::Sector(best) } else { SectorLabel::Mixed };
            LabeledEigenvalue { eigenvalue: *lambda, label, purity }
        })
        .collect())
}

/// A scalar factor with closed-form first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `x^p e^{−a x²}`
    Gaussian { power: i32, a: f64 },
    /// `exp(−1/(1 − s²))`, `s = (x − center)/width`, zero for `|s| ≥ 1`.
    Bump { center: f64, width: f64 },
    Cos { nu: f64 },
    Sin { nu: f64 },
    Constant,
}

impl Profile {
    /// `(f, f′, f″)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Profile::Gaussian { power, a } => {
                let p = power as f64;
                let e = (-a * x * x).exp();
                let xp = |q: f64| if q == 0.0 { 1.0 } else { x.powf(q) };
                let f = xp(p) * e;
                let d1 = (p * xp(p - 1.0) - 2.0 * a * xp(p + 1.0)) * e;
                let d2 = (p * (p - 1.0) * xp(p - 2.0) - 2.0 * a * (2.0 * p + 1.0) * xp(p) + 4.0 * a * a * xp(p + 2.0)) * e;
                (f, d1, d2)
            }
            Profile::Bump { center, width } => {
                let s = (x - center) / width;
                if s.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let u = 1.0 - s * s;
                let g = (-1.0 / u).exp();
                let g1 = -2.0 * s / (u * u);
                let g2 = -(2.0 + 6.0 * s * s) / (u * u * u);
                (g, g * g1 / width, g * (g1 * g1 + g2) / (width * width))
            }
            Profile::Cos { nu } => {
                let (s, c) = (nu * x).sin_cos();
                (c, -nu * s, -nu * nu * c)
            }
            Profile::Sin { nu } => {
                let (s, c) = (nu * x).sin_cos();
                (s, nu * c, -nu * nu * s)
            }
            Profile::Constant => (1.0, 0.0, 0.0),
        }
    }
}

/// `R(ρ) X(χ) F(φ) v` with `Ĵ₁ v = i k v`; `F` must pick up `(−1)^k` per turn.
#[derive(Debug, Clone)]
pub struct SeparableTerm {
    pub radial: Profile,
    pub polar: Profile,
    pub azimuthal: Profile,
    pub k: i64,
    pub vector: CVector,
}

/// Closed-form `ℂ^{2ℓ+1}`-valued test function on shape space.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub irrep: Irrep,
    pub terms: Vec<SeparableTerm>,
}

/// Unit eigenvectors of `Ĵ₁` paired with `k` where `Ĵ₁ v = i k v`.
pub fn j1_eigenvectors(irrep: &Irrep) -> Vec<(i64, CVector)> {
    let h = irrep.generator(0).map(|z| Complex64::new(0.0, 1.0) * z);
    let eig = nalgebra::SymmetricEigen::new(h);
    (0..irrep.dim())
        .map(|c| ((-eig.eigenvalues[c]).round() as i64, eig.eigenvectors.column(c).into_owned()))
        .collect()
}

impl TestFunction {
    pub fn value(&self, q: &ShapeCoordinates) -> CVector {
        let mut out = CVector::zeros(self.irrep.dim());
        for t in &self.terms {
            let f = t.radial.eval(q.rho).0 * t.polar.eval(q.chi).0 * t.azimuthal.eval(q.phi).0;
            out += &t.vector * Complex64::new(f, 0.0);
        }
        out
    }

    /// Flat 6D Laplacian of the equivariant extension, pulled back to the
    /// section, via the reduced formula.
    pub fn reduced_laplacian(&self, q: &ShapeCoordinates) -> CVector {
        let (rho, chi) = (q.rho, q.chi);
        let r2 = rho * rho;
        let (sh, ch) = (chi / 2.0).sin_cos();
        let gens = self.irrep.generators();
        let rot = (&gens[0] * &gens[0]) + (&gens[1] * &gens[1]) / Complex64::new(ch * ch, 0.0)
            + (&gens[2] * &gens[2]) / Complex64::new(sh * sh, 0.0);
        let mut out = CVector::zeros(self.irrep.dim());
        for t in &self.terms {
            let (r, r1, rr) = t.radial.eval(rho);
            let (x, x1, xx) = t.polar.eval(chi);
            let (f, f1, ff) = t.azimuthal.eval(q.phi);
            let k = t.k as f64;
            let s = chi.sin();
            let scalar = Complex64::new((rr + 5.0 / rho * r1) * x * f, 0.0)
                + Complex64::new(4.0 / r2 * r * (xx + 2.0 / (2.0 * chi).tan() * x1) * f, 0.0)
                + Complex64::new(4.0 / (r2 * chi.cos().powi(2)) * r * x, 0.0)
                    * Complex64::new(ff - 0.25 * k * k * s * s * f, k * s * f1);
            out += &t.vector * scalar;
            out += (&rot * &t.vector) * Complex64::new(r * x * f / r2, 0.0);
        }
        out
    }
}

/// Central-difference flat Laplacian over the six Cartesian components of
/// `(r₁, r₂)` of `x ↦ f(x)`.
pub fn ambient_stencil<F>(f: F, r1: &Vec3, r2: &Vec3, h: f64) -> Result<CVector>
where
    F: Fn(&Vec3, &Vec3) -> Result<CVector>,
{
    let centre = f(r1, r2)?;
    let mut acc = &centre * Complex64::new(-12.0, 0.0);
    for which in 0..2 {
        for axis in 0..3 {
            let mut e = Vec3::zeros();
            e[axis] = h;
            let (p, m) = if which == 0 { (f(&(r1 + e), r2)?, f(&(r1 - e), r2)?) } else { (f(r1, &(r2 + e))?, f(r1, &(r2 - e))?) };
            acc += p + m;
        }
    }
    Ok(acc / Complex64::new(h * h, 0.0))
}

/// Error of the reduced formula against the ambient stencil at one point,
/// expressed in the body frame: `‖ρ(g)⁻¹ ambient − reduced‖`.
pub fn ambient_error(tf: &TestFunction, point: &FullCoordinates, h: f64) -> Result<f64> {
    let (r1, r2) = dragt_to_vectors(point);
    let c = vectors_to_dragt(&r1, &r2)?;
    let ext = |a: &Vec3, b: &Vec3| equivariant_extend_with(&tf.irrep, a, b, |q| Ok(tf.value(q)));
    let amb = ambient_stencil(ext, &r1, &r2, h)?;
    let d: CMatrix = tf.irrep.wigner_d(&c.angles);
    let body = d.adjoint() * amb;
    Ok((body - tf.reduced_laplacian(&c.shape)).norm())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbientRow {
    pub point_id: usize,
    pub rho: f64,
    pub chi: f64,
    pub phi: f64,
    pub h: f64,
    pub err_h: f64,
    pub err_h2: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbientReport {
    pub rows: Vec<AmbientRow>,
}

impl AmbientReport {
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.ratio)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "point_id,rho,chi,phi,h,err_h,err_h2,ratio")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.point_id, r.rho, r.chi, r.phi, r.h, r.err_h, r.err_h2, r.ratio
            )?;
        }
        Ok(())
    }
}

/// Generic sample points with shape in the given box and random frames.
pub fn generic_points(n: usize, rho: (f64, f64), chi: (f64, f64), seed: u64) -> Vec<FullCoordinates> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| FullCoordinates {
            shape: ShapeCoordinates {
                rho: rng.random_range(rho.0..rho.1),
                chi: rng.random_range(chi.0..chi.1),
                phi: rng.random_range(0.0..2.0 * PI),
            },
            angles: EulerAngles::new(
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.2..PI - 0.2),
                rng.random_range(0.0..2.0 * PI),
            ),
        })
        .collect()
}

/// Pointwise comparison at steps `h` and `h/2` with the convergence ratio.
pub fn compare_reduced_vs_ambient(tf: &TestFunction, points: &[FullCoordinates], h: f64) -> Result<AmbientReport> {
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let e1 = ambient_error(tf, p, h)?;
            let e2 = ambient_error(tf, p, h / 2.0)?;
            Ok(AmbientRow {
                point_id: i,
                rho: p.shape.rho,
                chi: p.shape.chi,
                phi: p.shape.phi,
                h,
                err_h: e1,
                err_h2: e2,
                ratio: e1 / e2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AmbientReport { rows })
}

/// Two closed-form test functions per spin: a single separable term and a
/// superposition mixing every `Ĵ₁` eigenvector.
pub fn standard_test_functions(ell: usize) -> Vec<TestFunction> {
    let irrep = Irrep::new(ell);
    let bump = Profile::Bump { center: 0.78, width: 0.76 };
    let vecs = j1_eigenvectors(&irrep);
    let azimuth = |k: i64, extra: f64| Profile::Cos { nu: 0.5 * k.rem_euclid(2) as f64 + extra };
    let (k0, v0) = vecs.last().cloned().unwrap();
    let single = TestFunction {
        irrep: irrep.clone(),
        terms: vec![SeparableTerm {
            radial: Profile::Gaussian { power: 2, a: 0.5 },
            polar: bump,
            azimuthal: azimuth(k0, 1.0),
            k: k0,
            vector: v0,
        }],
    };
    let mixed = TestFunction {
        irrep: irrep.clone(),
        terms: vecs
            .iter()
            .enumerate()
            .map(|(i, (k, v))| SeparableTerm {
                radial: Profile::Gaussian { power: 1 + i as i32, a: 0.7 },
                polar: Profile::Bump { center: 0.75 + 0.03 * i as f64, width: 0.72 },
                azimuthal: if i % 2 == 0 {
                    azimuth(*k, i as f64)
                } else {
                    Profile::Sin { nu: 0.5 * k.rem_euclid(2) as f64 + i as f64 }
                },
                k: *k,
                vector: v * Complex64::new(1.0 + 0.3 * i as f64, 0.2 * i as f64),
            })
            .collect(),
    };
    vec![single, mixed]
}

/// Random rotation matrix from uniform Euler-angle draws.
pub fn random_rotation(rng: &mut impl Rng) -> crate::geometry::Mat3 {
    let u: f64 = rng.random_range(-1.0..1.0);
    rotation_from_euler(&EulerAngles::new(rng.random_range(0.0..2.0 * PI), u.acos(), rng.random_range(0.0..2.0 * PI)))
}
