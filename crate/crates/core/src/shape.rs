//! Dragt coordinates `(ρ, χ, φ)` of the triatomic shape space and the global
//! section `α = β = γ = 0`.
//!
//! Jacobi vectors are written in the body frame `uₖ = g eₖ` as
//!
//! ```text
//! r₁ = ρ (cos(χ/2) cos(φ/2) u₃ + sin(χ/2) sin(φ/2) u₂)
//! r₂ = ρ (cos(χ/2) sin(φ/2) u₃ − sin(χ/2) cos(φ/2) u₂)
//! ```
//!
//! Along the section, `σ(ρ, χ, φ + 2π) = e^{πJ₁} σ(ρ, χ, φ)`, so a reduced
//! wave function obeys the twisted periodicity `Ψ(φ + 2π) = e^{πĴ₁} Ψ(φ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{from_jacobi, AtomSystem, JacobiFrame, Mat3, Vec3};
use crate::harmonics::{rotation_from_euler, CMatrix, CVector, EulerAngles, Irrep};
use crate::operators::GridSpec;

/// Below this value of sin(χ/2) a configuration is treated as collinear.
const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeCoordinates {
    pub rho: f64,
    pub chi: f64,
    pub phi: f64,
}

impl ShapeCoordinates {
    pub fn new(rho: f64, chi: f64, phi: f64) -> Result<Self> {
        if !(rho >= 0.0) || !(0.0..=PI / 2.0).contains(&chi) || !phi.is_finite() {
            return Err(Error::Domain(format!("shape coordinates out of range: ({rho}, {chi}, {phi})")));
        }
        Ok(Self { rho, chi, phi: phi.rem_euclid(2.0 * PI) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeInvariants {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullCoordinates {
    pub shape: ShapeCoordinates,
    pub angles: EulerAngles,
}

fn frame_vectors(s: &ShapeCoordinates, u2: Vec3, u3: Vec3) -> (Vec3, Vec3) {
    let (sc, cc) = (s.chi / 2.0).sin_cos();
    let (sp, cp) = (s.phi / 2.0).sin_cos();
    let r1 = s.rho * (cc * cp * u3 + sc * sp * u2);
    let r2 = s.rho * (cc * sp * u3 - sc * cp * u2);
    (r1, r2)
}

pub fn dragt_to_vectors(c: &FullCoordinates) -> (Vec3, Vec3) {
    let g = rotation_from_euler(&c.angles);
    frame_vectors(&c.shape, g.column(1).into_owned(), g.column(2).into_owned())
}

/// Configuration on the section (identity Euler angles).
pub fn section(s: &ShapeCoordinates) -> (Vec3, Vec3) {
    frame_vectors(s, Vec3::y(), Vec3::z())
}

/// Atom positions for the section point with the given masses.
pub fn section_system(masses: &[f64; 3], s: &ShapeCoordinates) -> Result<AtomSystem> {
    let (r1, r2) = section(s);
    from_jacobi(masses, &JacobiFrame::new(vec![r1, r2]))
}

pub fn shape_invariants(r1: &Vec3, r2: &Vec3) -> ShapeInvariants {
    ShapeInvariants { q1: r1.norm_squared() - r2.norm_squared(), q2: 2.0 * r1.dot(r2), q3: 2.0 * r1.cross(r2).norm() }
}

/// Shape part of the inverse map.
pub fn shape_of(r1: &Vec3, r2: &Vec3) -> ShapeCoordinates {
    let q = shape_invariants(r1, r2);
    let rho = (r1.norm_squared() + r2.norm_squared()).sqrt();
    let chi = q.q3.atan2(q.q1.hypot(q.q2)).clamp(0.0, PI / 2.0);
    let phi = q.q2.atan2(q.q1).rem_euclid(2.0 * PI);
    ShapeCoordinates { rho, chi, phi: if phi >= 2.0 * PI { 0.0 } else { phi } }
}

/// Inverse of [`dragt_to_vectors`]. At collinear configurations the isotropy
/// angle γ is set to 0; at β ∈ {0, π} the pair (α, γ) collapses into α.
pub fn vectors_to_dragt(r1: &Vec3, r2: &Vec3) -> Result<FullCoordinates> {
    let shape = shape_of(r1, r2);
    if !(shape.rho > 0.0) {
        return Err(Error::Domain("collision configuration has no frame".into()));
    }
    let (sc, cc) = (shape.chi / 2.0).sin_cos();
    let (sp, cp) = (shape.phi / 2.0).sin_cos();
    let u3 = ((cp * r1 + sp * r2) / (shape.rho * cc)).normalize();
    let g = if sc > COLLINEAR_TOL {
        let u2 = (sp * r1 - cp * r2) / (shape.rho * sc);
        let u2 = (u2 - u2.dot(&u3) * u3).normalize();
        Mat3::from_columns(&[u2.cross(&u3), u2, u3])
    } else {
        let beta = u3.z.clamp(-1.0, 1.0).acos();
        let alpha = if u3.x.hypot(u3.y) > 1e-15 { u3.y.atan2(u3.x) } else { 0.0 };
        rotation_from_euler(&EulerAngles::new(alpha, beta, 0.0))
    };
    Ok(FullCoordinates { shape, angles: EulerAngles::from_rotation(&g) })
}

/// Diagonal of the shape-space metric in `(ρ, χ, φ)`.
pub fn reduced_metric(rho: f64, chi: f64) -> Vec3 {
    Vec3::new(1.0, rho * rho / 4.0, rho * rho * chi.cos().powi(2) / 4.0)
}

/// Density of the projected measure with respect to `dρ dχ dφ`.
pub fn volume_density(rho: f64, chi: f64) -> f64 {
    0.5 * PI * PI * rho.powi(5) * (2.0 * chi).sin()
}

/// Components `(Θ₁, Θ₂, Θ₃)` of `g⁻¹dg = Σ Θₖ Jₖ` for increments `(dα, dβ, dγ)`.
pub fn maurer_cartan(a: &EulerAngles, da: &[f64; 3]) -> Vec3 {
    let (sb, cb) = a.beta.sin_cos();
    let (sg, cg) = a.gamma.sin_cos();
    Vec3::new(sg * da[1] - sb * cg * da[0], cg * da[1] + sb * sg * da[0], da[2] + cb * da[0])
}

/// Inertia operator of the section point: `ρ² diag(1, cos²(χ/2), sin²(χ/2))`.
pub fn section_inertia(rho: f64, chi: f64) -> [f64; 3] {
    let (s, c) = (chi / 2.0).sin_cos();
    [rho * rho, rho * rho * c * c, rho * rho * s * s]
}

/// `e^{πĴ₁}`, the holonomy picked up by a reduced wave function around φ.
pub fn phi_twist(irrep: &Irrep) -> CMatrix {
    irrep.exp_algebra(&[PI, 0.0, 0.0])
}

/// `ψ(x) = ρ^ℓ(g) Ψ(q)` for `x = g·σ(q)`.
pub fn equivariant_extend_with<F>(irrep: &Irrep, r1: &Vec3, r2: &Vec3, psi: F) -> Result<CVector>
where
    F: Fn(&ShapeCoordinates) -> Result<CVector>,
{
    let c = vectors_to_dragt(r1, r2)?;
    let v = psi(&c.shape)?;
    if v.len() != irrep.dim() {
        return Err(Error::Dimension { expected: irrep.dim(), actual: v.len() });
    }
    Ok(irrep.wigner_d(&c.angles) * v)
}

/// Equivariant extension of a grid function, with tricubic interpolation.
pub fn equivariant_extend(psi: &GridFunction, r1: &Vec3, r2: &Vec3) -> Result<CVector> {
    equivariant_extend_with(&psi.irrep, r1, r2, |q| psi.interpolate(q))
}

/// A `ℂ^{2ℓ+1}`-valued function sampled on a triatomic grid (standard basis,
/// node-major storage).
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: GridSpec,
    irrep: Irrep,
    twist: CMatrix,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, ell: usize, values: Vec<Complex64>) -> Result<Self> {
        let irrep = Irrep::new(ell);
        let expected = grid.n_nodes() * irrep.dim();
        if values.len() != expected {
            return Err(Error::Dimension { expected, actual: values.len() });
        }
        let twist = phi_twist(&irrep);
        Ok(Self { grid, irrep, twist, values })
    }

    pub fn from_fn<F: Fn(&ShapeCoordinates) -> CVector>(grid: GridSpec, ell: usize, f: F) -> Result<Self> {
        let d = 2 * ell + 1;
        let mut values = Vec::with_capacity(grid.n_nodes() * d);
        for i in 0..grid.n_rho {
            for j in 0..grid.n_chi {
                for k in 0..grid.n_phi {
                    let v = f(&grid.node(i, j, k));
                    if v.len() != d {
                        return Err(Error::Dimension { expected: d, actual: v.len() });
                    }
                    values.extend(v.iter());
                }
            }
        }
        Self::new(grid, ell, values)
    }

    /// Rebuild from real-basis components as produced by the reduced operators.
    pub fn from_real(grid: GridSpec, ell: usize, real: &[f64]) -> Result<Self> {
        let irrep = Irrep::new(ell);
        let d = irrep.dim();
        if real.len() != grid.n_nodes() * d {
            return Err(Error::Dimension { expected: grid.n_nodes() * d, actual: real.len() });
        }
        let u = irrep.real_basis();
        let mut values = Vec::with_capacity(real.len());
        for block in real.chunks(d) {
            let v = u * CVector::from_iterator(d, block.iter().map(|x| Complex64::new(*x, 0.0)));
            values.extend(v.iter());
        }
        Self::new(grid, ell, values)
    }

    pub fn irrep(&self) -> &Irrep {
        &self.irrep
    }

    pub fn at_node(&self, i: usize, j: usize, k: usize) -> CVector {
        let d = self.irrep.dim();
        let start = self.grid.node_index(i, j, k) * d;
        CVector::from_column_slice(&self.values[start..start + d])
    }

    /// Node value at an arbitrary φ index, applying the twist across the wrap.
    fn at_wrapped(&self, i: usize, j: usize, k: i64) -> CVector {
        let n = self.grid.n_phi as i64;
        let turns = k.div_euclid(n);
        let v = self.at_node(i, j, k.rem_euclid(n) as usize);
        match turns.rem_euclid(2) {
            0 => v,
            _ if turns > 0 => &self.twist * v,
            _ => self.twist.adjoint() * v,
        }
    }

    /// Tricubic Lagrange interpolation; stencils are shifted inward at the ρ and
    /// χ ends and wrap with the twist in φ.
    pub fn interpolate(&self, q: &ShapeCoordinates) -> Result<CVector> {
        let g = &self.grid;
        if !(q.rho >= 0.0 && q.rho <= g.rho_max) || !(0.0..=PI / 2.0).contains(&q.chi) {
            return Err(Error::Domain(format!("point ({}, {}) outside the grid", q.rho, q.chi)));
        }
        let (ri, rw) = stencil((q.rho / g.h_rho()) - 0.5, g.n_rho, false);
        let (ci, cw) = stencil((q.chi / g.h_chi()) - 0.5, g.n_chi, false);
        let (pi, pw) = stencil(q.phi / g.h_phi(), g.n_phi, true);
        let mut out = CVector::zeros(self.irrep.dim());
        for (a, wa) in ri.iter().zip(&rw) {
            for (b, wb) in ci.iter().zip(&cw) {
                for (c, wc) in pi.iter().zip(&pw) {
                    out += self.at_wrapped(*a as usize, *b as usize, *c) * Complex64::new(wa * wb * wc, 0.0);
                }
            }
        }
        Ok(out)
    }
}

/// Lagrange stencil around fractional index `t` on nodes `0..n` (or all of ℤ).
fn stencil(t: f64, n: usize, periodic: bool) -> (Vec<i64>, Vec<f64>) {
    let m = if periodic { 4 } else { n.min(4) } as i64;
    let mut start = t.floor() as i64 - (m / 2 - 1);
    if !periodic {
        start = start.clamp(0, n as i64 - m);
    }
    let idx: Vec<i64> = (start..start + m).collect();
    let w = idx
        .iter()
        .map(|&a| {
            idx.iter().filter(|&&b| b != a).map(|&b| (t - b as f64) / (a - b) as f64).product()
        })
        .collect();
    (idx, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn full(rho: f64, chi: f64, phi: f64, a: f64, b: f64, c: f64) -> FullCoordinates {
        FullCoordinates { shape: ShapeCoordinates { rho, chi, phi }, angles: EulerAngles::new(a, b, c) }
    }

    #[test]
    fn collision_and_collinear_forms() {
        let (r1, r2) = dragt_to_vectors(&full(0.0, 0.4, 1.0, 0.3, 0.2, 0.1));
        assert_eq!((r1, r2), (Vec3::zeros(), Vec3::zeros()));
        let (r1, r2) = dragt_to_vectors(&full(1.3, 0.0, 0.8, 0.0, 0.0, 0.0));
        assert_relative_eq!(r1, 1.3 * (0.4f64).cos() * Vec3::z(), epsilon = 1e-15);
        assert_relative_eq!(r2, 1.3 * (0.4f64).sin() * Vec3::z(), epsilon = 1e-15);
    }

    #[test]
    fn pole_example() {
        let (r1, r2) = dragt_to_vectors(&full(1.0, PI / 2.0, 0.0, 0.0, 0.0, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(r1, h * Vec3::z(), epsilon = 1e-15);
        assert_relative_eq!(r2, -h * Vec3::y(), epsilon = 1e-15);
        let back = vectors_to_dragt(&r1, &r2).unwrap();
        assert_relative_eq!(back.shape.rho, 1.0, epsilon = 1e-14);
        assert_relative_eq!(back.shape.chi, PI / 2.0, epsilon = 1e-14);
        assert_relative_eq!(back.shape.phi, 0.0, epsilon = 1e-14);
        assert_relative_eq!(rotation_from_euler(&back.angles), Mat3::identity(), epsilon = 1e-14);
    }

    #[test]
    fn invariants_examples() {
        let q = shape_invariants(&Vec3::zeros(), &Vec3::zeros());
        assert_eq!((q.q1, q.q2, q.q3), (0.0, 0.0, 0.0));
        let q = shape_invariants(&Vec3::x(), &Vec3::y());
        assert_eq!((q.q1, q.q2, q.q3), (0.0, 0.0, 2.0));
        let c = vectors_to_dragt(&(2.0 * Vec3::z()), &Vec3::z()).unwrap();
        assert_relative_eq!(c.shape.rho, 5f64.sqrt(), epsilon = 1e-14);
        assert_eq!(c.shape.chi, 0.0);
        assert_relative_eq!(c.shape.phi, 4f64.atan2(3.0), epsilon = 1e-14);
        assert_eq!(c.angles.gamma, 0.0);
    }

    #[test]
    fn collision_has_no_frame() {
        assert!(vectors_to_dragt(&Vec3::zeros(), &Vec3::zeros()).is_err());
    }

    #[test]
    fn section_examples() {
        let (r1, r2) = section(&ShapeCoordinates { rho: 1.0, chi: 0.0, phi: 0.0 });
        assert_eq!(r1, Vec3::z());
        assert_eq!(r2, Vec3::zeros());
        let (r1, r2) = section(&ShapeCoordinates { rho: 0.0, chi: 0.3, phi: 2.0 });
        assert_eq!(r1.norm() + r2.norm(), 0.0);
    }

    #[test]
    fn section_is_twisted_periodic() {
        let s = ShapeCoordinates { rho: 1.1, chi: 0.6, phi: 0.9 };
        let (a1, a2) = section(&ShapeCoordinates { phi: s.phi + 2.0 * PI, ..s });
        let (b1, b2) = section(&s);
        let r = rotation_from_euler(&EulerAngles::new(PI / 2.0, PI, -PI / 2.0));
        // Rz(π/2) Ry(π) Rz(−π/2) is the half-turn about e₁.
        assert_relative_eq!(r, Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)), epsilon = 1e-14);
        assert_relative_eq!(a1, r * b1, epsilon = 1e-14);
        assert_relative_eq!(a2, r * b2, epsilon = 1e-14);
    }

    #[test]
    fn metric_and_density_examples() {
        assert_eq!(reduced_metric(1.0, 0.0), Vec3::new(1.0, 0.25, 0.25));
        let m = reduced_metric(2.0, PI / 2.0);
        assert_relative_eq!(m, Vec3::new(1.0, 1.0, 0.0), epsilon = 1e-15);
        assert_eq!(volume_density(1.0, 0.0), 0.0);
        assert_relative_eq!(volume_density(1.0, PI / 4.0), PI * PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn maurer_cartan_examples() {
        let a = EulerAngles::new(0.3, PI / 2.0, 0.0);
        assert_eq!(maurer_cartan(&a, &[0.0; 3]), Vec3::zeros());
        assert_relative_eq!(maurer_cartan(&a, &[1.0, 0.0, 0.0]), Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn section_inertia_matches_tensor() {
        let (r1, r2) = section(&ShapeCoordinates { rho: 1.7, chi: 0.9, phi: 2.3 });
        let t = crate::geometry::inertia_of_frame(&JacobiFrame::new(vec![r1, r2]));
        let d = section_inertia(1.7, 0.9);
        assert_relative_eq!(*t.matrix(), Mat3::from_diagonal(&Vec3::new(d[0], d[1], d[2])), epsilon = 1e-13);
    }

    #[test]
    fn stencil_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
        for &t in &[0.2, 3.7, 8.9, -0.4] {
            let (idx, w) = stencil(t, 10, false);
            let v: f64 = idx.iter().zip(&w).map(|(i, w)| w * f(*i as f64)).sum();
            assert_relative_eq!(v, f(t), epsilon = 1e-12);
        }
    }

    fn random_full(rng: &mut impl rand::Rng) -> FullCoordinates {
        full(
            rng.random_range(0.2..2.0),
            rng.random_range(0.05..1.5),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.0..2.0 * PI),
            rng.random_range(0.05..PI - 0.05),
            rng.random_range(0.0..2.0 * PI),
        )
    }

    proptest::proptest! {
        #[test]
        fn roundtrip_on_generic_configurations(
            rho in 0.1..3.0f64, chi in 0.02..1.55f64, phi in 0.0..TAU,
            a in 0.0..TAU, b in 0.02..(PI - 0.02), c in 0.0..TAU,
        ) {
            let x = full(rho, chi, phi, a, b, c);
            let (r1, r2) = dragt_to_vectors(&x);
            let back = vectors_to_dragt(&r1, &r2).unwrap();
            proptest::prop_assert!((back.shape.rho - rho).abs() < 1e-10 * rho.max(1.0));
            proptest::prop_assert!((back.shape.chi - chi).abs() < 1e-9);
            let dphi = (back.shape.phi - phi).rem_euclid(2.0 * PI);
            proptest::prop_assert!(dphi.min(2.0 * PI - dphi) < 1e-9);
            let g0 = rotation_from_euler(&x.angles);
            let g1 = rotation_from_euler(&back.angles);
            proptest::prop_assert!((g0 - g1).abs().max() < 1e-9);
        }

        #[test]
        fn invariants_are_rotation_invariant(
            x1 in -2.0..2.0f64, y1 in -2.0..2.0f64, z1 in -2.0..2.0f64,
            x2 in -2.0..2.0f64, y2 in -2.0..2.0f64, z2 in -2.0..2.0f64,
            a in 0.0..TAU, b in 0.0..PI, c in 0.0..TAU,
        ) {
            let (r1, r2) = (Vec3::new(x1, y1, z1), Vec3::new(x2, y2, z2));
            let g = rotation_from_euler(&EulerAngles::new(a, b, c));
            let q = shape_invariants(&r1, &r2);
            let p = shape_invariants(&(g * r1), &(g * r2));
            let rho2 = r1.norm_squared() + r2.norm_squared();
            proptest::prop_assert!((q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3 - rho2 * rho2).abs() < 1e-12 * rho2 * rho2.max(1.0));
            let scale = rho2.max(1.0);
            proptest::prop_assert!((q.q1 - p.q1).abs() < 1e-12 * scale);
            proptest::prop_assert!((q.q2 - p.q2).abs() < 1e-12 * scale);
            proptest::prop_assert!((q.q3 - p.q3).abs() < 1e-12 * scale);
        }
    }

    /// Horizontal part of a tangent vector to the pair of Jacobi vectors.
    fn horizontal(r: &[Vec3; 2], v: &[Vec3; 2]) -> [Vec3; 2] {
        let l = r[0].cross(&v[0]) + r[1].cross(&v[1]);
        let mut inertia = Mat3::zeros();
        for x in r {
            inertia += Mat3::identity() * x.norm_squared() - x * x.transpose();
        }
        let w = inertia.try_inverse().unwrap() * l;
        [v[0] - w.cross(&r[0]), v[1] - w.cross(&r[1])]
    }

    #[test]
    fn metric_is_the_pullback_of_the_horizontal_metric() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let eps = 1e-6;
        for _ in 0..50 {
            let x = random_full(&mut rng);
            let s = x.shape;
            let shifted = |k: usize, d: f64| {
                let mut q = s;
                match k {
                    0 => q.rho += d,
                    1 => q.chi += d,
                    _ => q.phi += d,
                }
                let (a, b) = dragt_to_vectors(&FullCoordinates { shape: q, angles: x.angles });
                [a, b]
            };
            let (r1, r2) = dragt_to_vectors(&x);
            let tangents: Vec<[Vec3; 2]> = (0..3)
                .map(|k| {
                    let (p, m) = (shifted(k, eps), shifted(k, -eps));
                    let v = [(p[0] - m[0]) / (2.0 * eps), (p[1] - m[1]) / (2.0 * eps)];
                    horizontal(&[r1, r2], &v)
                })
                .collect();
            let g = reduced_metric(s.rho, s.chi);
            for a in 0..3 {
                for b in 0..3 {
                    let dot = tangents[a][0].dot(&tangents[b][0]) + tangents[a][1].dot(&tangents[b][1]);
                    let expected = if a == b { g[a] } else { 0.0 };
                    assert!((dot - expected).abs() < 1e-7 * s.rho.powi(2).max(1.0), "({a},{b}) {dot} vs {expected}");
                }
            }
        }
    }

    #[test]
    fn maurer_cartan_matches_finite_differences() {
        use crate::harmonics::so3_generator;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let eps = 1e-6;
        for _ in 0..100 {
            let a = EulerAngles::new(rng.random_range(0.0..6.0), rng.random_range(0.1..3.0), rng.random_range(0.0..6.0));
            let da = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let at = |t: f64| {
                rotation_from_euler(&EulerAngles {
                    alpha: a.alpha + t * da[0],
                    beta: a.beta + t * da[1],
                    gamma: a.gamma + t * da[2],
                })
            };
            let g = at(0.0);
            let dg = (at(eps) - at(-eps)) / (2.0 * eps);
            let lhs = g.transpose() * dg;
            let theta = maurer_cartan(&a, &da);
            let rhs = so3_generator(0) * theta.x + so3_generator(1) * theta.y + so3_generator(2) * theta.z;
            assert!((lhs - rhs).abs().max() < 1e-8);
        }
    }

    #[test]
    fn monte_carlo_volume_of_a_shape_region() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 400_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r1 = Vec3::new(v[0], v[1], v[2]);
            let r2 = Vec3::new(v[3], v[4], v[5]);
            let s = shape_of(&r1, &r2);
            if s.rho < 1.0 && s.chi < PI / 4.0 && s.phi < PI {
                hits += 1;
            }
        }
        let estimate = 64.0 * hits as f64 / n as f64;
        // ∫₀¹ ∫₀^{π/4} ∫₀^π of the density
        let exact = 0.5 * PI * PI / 6.0 * 0.5 * PI;
        assert!((estimate - exact).abs() < 0.03 * exact, "{estimate} vs {exact}");
    }

    #[test]
    fn equivariant_extension_is_equivariant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let irrep = Irrep::new(2);
        let grid = GridSpec::new(2.0, 12, 10, 12).unwrap();
        let psi = GridFunction::from_fn(grid, 2, |q| {
            CVector::from_fn(5, |a, _| Complex64::new((q.rho * (a as f64 + 1.0)).sin(), q.chi * a as f64))
        })
        .unwrap();
        for _ in 0..30 {
            let x = random_full(&mut rng);
            let (r1, r2) = dragt_to_vectors(&x);
            let g = crate::oracle::random_rotation(&mut rng);
            let base = equivariant_extend(&psi, &r1, &r2).unwrap();
            let moved = equivariant_extend(&psi, &(g * r1), &(g * r2)).unwrap();
            let expected = irrep.wigner_d_of(&g) * base;
            assert!((moved - expected).norm() < 1e-10);
        }
    }
}
