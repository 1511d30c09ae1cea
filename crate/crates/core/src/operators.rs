//! Reduced Laplacians in conservative form.
//!
//! Every operator is stored as a symmetric stiffness matrix `S` together with a
//! diagonal weight `W`; the operator itself is `A = W⁻¹S`, which is self-adjoint
//! for `⟨u, v⟩_w = Σ wᵢ uᵢ vᵢ`. Pinned degrees of freedom have zero rows and
//! columns in `S` and are excluded by the eigensolvers.
//!
//! Vector-valued problems (`ℓ ≥ 1`) are written in the real basis of
//! [`Irrep::real_basis`], where the generators are real antisymmetric and the
//! operator is real symmetric. Component 0 of each block spans `ker Ĵ₃`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{InertiaTensor, DEFAULT_RANK_TOL};
use crate::harmonics::{CMatrix, Irrep};
use crate::shape::{phi_twist, volume_density, ShapeCoordinates};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Staggered `(ρ, χ, φ)` grid: `ρᵢ = (i + ½)h_ρ`, `χⱼ = (j + ½)h_χ`, `φₖ = k h_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_chi: usize,
    pub n_phi: usize,
}

impl GridSpec {
    pub fn new(rho_max: f64, n_rho: usize, n_chi: usize, n_phi: usize) -> Result<Self> {
        let g = Self { rho_max, n_rho, n_chi, n_phi };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_max > 0.0) || !self.rho_max.is_finite() {
            return Err(Error::Assembly(format!("rho_max must be positive, got {}", self.rho_max)));
        }
        if self.n_rho < 2 || self.n_chi < 2 || self.n_phi < 1 {
            return Err(Error::Assembly(format!(
                "grid too small: n_rho={}, n_chi={}, n_phi={}",
                self.n_rho, self.n_chi, self.n_phi
            )));
        }
        Ok(())
    }

    pub fn h_rho(&self) -> f64 {
        self.rho_max / self.n_rho as f64
    }

    pub fn h_chi(&self) -> f64 {
        PI / 2.0 / self.n_chi as f64
    }

    pub fn h_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h_rho()
    }

    pub fn chi(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h_chi()
    }

    pub fn phi(&self, k: usize) -> f64 {
        k as f64 * self.h_phi()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_rho * self.n_chi * self.n_phi
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_chi + j) * self.n_phi + k
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> ShapeCoordinates {
        ShapeCoordinates { rho: self.rho(i), chi: self.chi(j), phi: self.phi(k) }
    }

    /// Inverse of [`GridSpec::node_index`].
    pub fn node_of(&self, n: usize) -> (usize, usize, usize) {
        let k = n % self.n_phi;
        let j = (n / self.n_phi) % self.n_chi;
        let i = n / (self.n_phi * self.n_chi);
        (i, j, k)
    }
}

/// Vertex-centred radial grid `rᵢ = i h`, `i = 0 … n−1`, `h = R/n`, with the
/// Dirichlet wall at `r_n = R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Assembly(format!("radial grid needs at least 2 nodes, got {n}")));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::Assembly(format!("radius must be positive, got {r_max}")));
        }
        Ok(Self { r_max, n })
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Layout {
    Planar { sector: i64, grid: RadialGrid },
    Triatomic { ell: usize, grid: GridSpec },
}

/// Pinned degrees of freedom of a reduced operator.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    pub pinned: Vec<bool>,
}

impl BoundaryCondition {
    pub fn none(n: usize) -> Self {
        Self { pinned: vec![false; n] }
    }

    pub fn count(&self) -> usize {
        self.pinned.iter().filter(|p| **p).count()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.pinned.len()).filter(|&i| !self.pinned[i]).collect()
    }

    /// Triatomic conditions: at the first χ layer all components outside
    /// `ker Ĵ₃` vanish; for `ℓ ≥ 1` the whole first ρ layer vanishes.
    pub fn triatomic(ell: usize, grid: &GridSpec) -> Self {
        let d = 2 * ell + 1;
        let mut pinned = vec![false; grid.n_nodes() * d];
        if ell == 0 {
            return Self { pinned };
        }
        for i in 0..grid.n_rho {
            for j in 0..grid.n_chi {
                for k in 0..grid.n_phi {
                    let base = grid.node_index(i, j, k) * d;
                    for c in 0..d {
                        if i == 0 || (j == 0 && c != 0) {
                            pinned[base + c] = true;
                        }
                    }
                }
            }
        }
        Self { pinned }
    }
}

#[derive(Debug, Clone)]
pub struct ReducedOperator {
    pub stiffness: CsrMatrix,
    pub weights: Vec<f64>,
    pub boundary: BoundaryCondition,
    pub block: usize,
    pub layout: Layout,
}

impl ReducedOperator {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        self.boundary.free_indices()
    }

    /// `A = W⁻¹S` as a sparse matrix.
    pub fn matrix(&self) -> CsrMatrix {
        let inv: Vec<f64> = self.weights.iter().map(|w| 1.0 / w).collect();
        self.stiffness.scale_rows(&inv)
    }

    pub fn apply(&self, psi: &[f64]) -> Result<Vec<f64>> {
        if psi.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), actual: psi.len() });
        }
        let mut y = self.stiffness.matvec(psi);
        for (yi, w) in y.iter_mut().zip(&self.weights) {
            *yi /= w;
        }
        Ok(y)
    }

    /// `⟨u, v⟩_w`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights.iter().zip(u.iter().zip(v)).map(|(w, (a, b))| w * a * b).sum()
    }

    /// `⟨u, Au⟩_w / ⟨u, u⟩_w` restricted to free components.
    pub fn rayleigh_quotient(&self, u: &[f64]) -> f64 {
        let mut v = u.to_vec();
        for (x, p) in v.iter_mut().zip(&self.boundary.pinned) {
            if *p {
                *x = 0.0;
            }
        }
        let sv = self.stiffness.matvec(&v);
        v.iter().zip(&sv).map(|(a, b)| a * b).sum::<f64>() / self.inner(&v, &v)
    }

    /// `‖WA − AᵀW‖ / ‖WA‖` with `WA = S`.
    pub fn symmetry_defect(&self) -> f64 {
        let a = self.matrix();
        let wa = a.scale_rows(&self.weights);
        let atw = a.transpose().scale_cols(&self.weights);
        wa.diff_norm(&atw) / wa.norm()
    }

    /// Free block of the pencil `(S, W)`.
    pub fn restricted(&self) -> (CsrMatrix, Vec<f64>, Vec<usize>) {
        let free = self.free_indices();
        let s = self.stiffness.principal_submatrix(&free);
        let w = free.iter().map(|&i| self.weights[i]).collect();
        (s, w, free)
    }

    /// Writes `row,col,re,im` triplets of `A`.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        for (i, j, v) in self.matrix().triplets() {
            writeln!(out, "{i},{j},{v:.16e},{:.16e}", 0.0)?;
        }
        Ok(())
    }

    pub fn write_weights<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "index,weight,pinned")?;
        for (i, (w, p)) in self.weights.iter().zip(&self.boundary.pinned).enumerate() {
            writeln!(out, "{i},{w:.16e},{}", u8::from(*p))?;
        }
        Ok(())
    }
}

/// Zeroes pinned rows and columns of a stiffness matrix.
fn drop_pinned(s: CsrMatrix, pinned: &[bool]) -> CsrMatrix {
    let mut b = TripletBuilder::new(s.dim());
    for (i, j, v) in s.triplets() {
        if !pinned[i] && !pinned[j] {
            b.push(i, j, v);
        }
    }
    b.build()
}

/// Radial operator `−(1/r)(r f′)′ + n² f / r²` with weight `2πr dr`.
///
/// The axis node carries the disk of radius `h/2`; for `n ≠ 0` it is pinned.
pub fn assemble_planar_radial(n: i64, grid: &RadialGrid) -> Result<ReducedOperator> {
    let h = grid.h();
    let m = grid.n;
    let mut b = TripletBuilder::new(m);
    let mut weights = vec![0.0; m];
    weights[0] = PI * h * h / 4.0;
    for (i, w) in weights.iter_mut().enumerate().skip(1) {
        *w = 2.0 * PI * grid.r(i) * h;
    }
    let n2 = (n * n) as f64;
    for i in 0..m {
        let face = 2.0 * PI * (i as f64 + 0.5) * h / h;
        if i + 1 < m {
            b.push(i, i, face);
            b.push(i + 1, i + 1, face);
            b.push(i, i + 1, -face);
            b.push(i + 1, i, -face);
        } else {
            b.push(i, i, face);
        }
        if i > 0 {
            let r = grid.r(i);
            b.push(i, i, n2 / (r * r) * weights[i]);
        }
    }
    let mut boundary = BoundaryCondition::none(m);
    if n != 0 {
        boundary.pinned[0] = true;
    }
    Ok(ReducedOperator {
        stiffness: drop_pinned(b.build(), &boundary.pinned),
        weights,
        boundary,
        block: 1,
        layout: Layout::Planar { sector: n, grid: *grid },
    })
}

/// `Λ^ℓ = −Σ (Î⁺)_{αβ} Ĵ_α Ĵ_β` in the frame where `inertia` is given.
pub fn assemble_rigid_body(ell: usize, inertia: &InertiaTensor) -> Result<CMatrix> {
    let inv = inertia.pseudo_inverse(DEFAULT_RANK_TOL)?;
    if inertia.rank(DEFAULT_RANK_TOL) < 2 {
        return Err(Error::SingularInertia("rigid body inertia has rank below 2".into()));
    }
    let irrep = Irrep::new(ell);
    let d = irrep.dim();
    let mut lam = CMatrix::zeros(d, d);
    for a in 0..3 {
        for b in 0..3 {
            if inv[(a, b)] != 0.0 {
                lam -= irrep.generator(a) * irrep.generator(b) * Complex64::new(inv[(a, b)], 0.0);
            }
        }
    }
    Ok((&lam + lam.adjoint()) * Complex64::new(0.5, 0.0))
}

fn rotational_coefficients(rho: f64, chi: f64) -> Result<[f64; 3]> {
    if !(rho > 0.0) || !(chi > 0.0 && chi < PI / 2.0) {
        return Err(Error::Domain(format!("rotational block undefined at (rho, chi) = ({rho}, {chi})")));
    }
    let (s, c) = (chi / 2.0).sin_cos();
    let r2 = rho * rho;
    Ok([1.0 / r2, 1.0 / (r2 * c * c), 1.0 / (r2 * s * s)])
}

/// `−(1/ρ²)[Ĵ₁² + Ĵ₂²/cos²(χ/2) + Ĵ₃²/sin²(χ/2)]` in the standard basis.
pub fn rotational_energy_block(ell: usize, rho: f64, chi: f64) -> Result<CMatrix> {
    let coef = rotational_coefficients(rho, chi)?;
    let irrep = Irrep::new(ell);
    let mut m = CMatrix::zeros(irrep.dim(), irrep.dim());
    for (k, c) in coef.iter().enumerate() {
        let g = irrep.generator(k);
        m -= g * g * Complex64::new(*c, 0.0);
    }
    Ok(m)
}

fn rotational_energy_real(gens: &[DMatrix<f64>; 3], rho: f64, chi: f64) -> Result<DMatrix<f64>> {
    let coef = rotational_coefficients(rho, chi)?;
    let d = gens[0].nrows();
    let mut m = DMatrix::zeros(d, d);
    for (k, c) in coef.iter().enumerate() {
        m -= &gens[k] * &gens[k] * *c;
    }
    Ok(m)
}

/// Triatomic reduced Laplacian for the spin-ℓ sector.
pub fn assemble_triatomic(ell: usize, grid: &GridSpec) -> Result<ReducedOperator> {
    assemble_triatomic_with_potential(ell, grid, |_| 0.0)
}

/// As [`assemble_triatomic`] with an invariant potential added on the diagonal.
pub fn assemble_triatomic_with_potential<V>(ell: usize, grid: &GridSpec, potential: V) -> Result<ReducedOperator>
where
    V: Fn(&ShapeCoordinates) -> f64,
{
    grid.validate()?;
    let irrep = Irrep::new(ell);
    let d = irrep.dim();
    let gens = irrep.real_generators();
    let u = irrep.real_basis();
    let twist = (u.adjoint() * phi_twist(&irrep) * u).map(|z| z.re);
    let (hr, hc, hp) = (grid.h_rho(), grid.h_chi(), grid.h_phi());
    let n = grid.n_nodes() * d;
    let mut b = TripletBuilder::new(n);
    let mut weights = vec![0.0; n];
    let eye = DMatrix::<f64>::identity(d, d);

    let push_block = |b: &mut TripletBuilder, r: usize, c: usize, m: &DMatrix<f64>, s: f64| {
        for x in 0..d {
            for y in 0..d {
                b.push(r * d + x, c * d + y, s * m[(x, y)]);
            }
        }
    };

    for i in 0..grid.n_rho {
        let rho = grid.rho(i);
        for j in 0..grid.n_chi {
            let chi = grid.chi(j);
            let mu = volume_density(rho, chi);
            let w = mu * hr * hc * hp;
            let lam = rotational_energy_real(&gens, rho, chi)?;
            // Parallel transport over half a φ step.
            let a = &gens[0] * (0.5 * chi.sin());
            let half = (a * (0.5 * hp)).exp();
            let c_phi = 4.0 * mu / (rho * rho * chi.cos().powi(2)) * hr * hc / hp;
            for k in 0..grid.n_phi {
                let node = grid.node_index(i, j, k);
                let q = grid.node(i, j, k);
                for c in 0..d {
                    weights[node * d + c] = w;
                }
                push_block(&mut b, node, node, &lam, w);
                let v = potential(&q);
                if v != 0.0 {
                    push_block(&mut b, node, node, &eye, v * w);
                }

                // ρ faces
                let rf = rho + 0.5 * hr;
                let c_rho = volume_density(rf, chi) * hc * hp / hr;
                if i + 1 < grid.n_rho {
                    let other = grid.node_index(i + 1, j, k);
                    push_block(&mut b, node, node, &eye, c_rho);
                    push_block(&mut b, other, other, &eye, c_rho);
                    push_block(&mut b, node, other, &eye, -c_rho);
                    push_block(&mut b, other, node, &eye, -c_rho);
                } else {
                    // Wall at ρ_max half a cell away.
                    push_block(&mut b, node, node, &eye, 2.0 * c_rho);
                }

                // χ faces
                if j + 1 < grid.n_chi {
                    let cf = chi + 0.5 * hc;
                    let c_chi = 4.0 / (rho * rho) * volume_density(rho, cf) * hr * hp / hc;
                    let other = grid.node_index(i, j + 1, k);
                    push_block(&mut b, node, node, &eye, c_chi);
                    push_block(&mut b, other, other, &eye, c_chi);
                    push_block(&mut b, node, other, &eye, -c_chi);
                    push_block(&mut b, other, node, &eye, -c_chi);
                }

                // φ faces: δ = e^{A h/2} Ψ_{k+1} − e^{−A h/2} Ψ_k, twisted across the wrap.
                let (kn, wrapped) = if k + 1 < grid.n_phi { (k + 1, false) } else { (0, true) };
                let other = grid.node_index(i, j, kn);
                let m_next = if wrapped { &half * &twist } else { half.clone() };
                let m_here = half.transpose();
                push_block(&mut b, other, other, &(m_next.transpose() * &m_next), c_phi);
                push_block(&mut b, node, node, &(m_here.transpose() * &m_here), c_phi);
                push_block(&mut b, node, other, &(m_here.transpose() * &m_next), -c_phi);
                push_block(&mut b, other, node, &(m_next.transpose() * &m_here), -c_phi);
            }
        }
    }
    let boundary = BoundaryCondition::triatomic(ell, grid);
    let stiffness = drop_pinned(symmetrize(b.build()), &boundary.pinned);
    Ok(ReducedOperator { stiffness, weights, boundary, block: d, layout: Layout::Triatomic { ell, grid: *grid } })
}

/// `(S + Sᵀ)/2`, removing rounding asymmetry from the block products.
fn symmetrize(s: CsrMatrix) -> CsrMatrix {
    let t = s.transpose();
    let mut b = TripletBuilder::new(s.dim());
    for (i, j, v) in s.triplets().chain(t.triplets()) {
        b.push(i, j, 0.5 * v);
    }
    b.build()
}

/// Samples `Ψ` (standard basis) at the nodes and converts to real-basis components.
pub fn sample_real<F>(ell: usize, grid: &GridSpec, f: F) -> Vec<f64>
where
    F: Fn(&ShapeCoordinates) -> crate::harmonics::CVector,
{
    let irrep = Irrep::new(ell);
    let ut = irrep.real_basis().adjoint();
    let mut out = Vec::with_capacity(grid.n_nodes() * irrep.dim());
    for n in 0..grid.n_nodes() {
        let (i, j, k) = grid.node_of(n);
        let v = &ut * f(&grid.node(i, j, k));
        out.extend(v.iter().map(|z| z.re));
    }
    out
}

/// Converts real-basis components at one node back to the standard basis.
pub fn block_to_standard(irrep: &Irrep, block: &[f64]) -> crate::harmonics::CVector {
    let v = crate::harmonics::CVector::from_iterator(block.len(), block.iter().map(|x| Complex64::new(*x, 0.0)));
    irrep.real_basis() * v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_constants_in_kernel() {
        let op = assemble_planar_radial(0, &RadialGrid::new(1.0, 50).unwrap()).unwrap();
        let y = op.apply(&vec![1.0; 50]).unwrap();
        for v in &y[..49] {
            assert!(v.abs() < 1e-10, "{v}");
        }
        assert!(y[49] > 0.0);
    }

    #[test]
    fn planar_n1_linear_function() {
        let g = RadialGrid::new(1.0, 40).unwrap();
        let op = assemble_planar_radial(1, &g).unwrap();
        let f: Vec<f64> = (0..40).map(|i| g.r(i)).collect();
        let y = op.apply(&f).unwrap();
        for v in &y[2..39] {
            assert!(v.abs() < 1e-9, "{v}");
        }
        assert!(op.boundary.pinned[0]);
    }

    #[test]
    fn planar_is_weighted_symmetric() {
        for n in 0..4 {
            let op = assemble_planar_radial(n, &RadialGrid::new(2.0, 30).unwrap()).unwrap();
            assert!(op.symmetry_defect() < 1e-14);
        }
    }

    #[test]
    fn too_small_grids_rejected() {
        assert!(matches!(RadialGrid::new(1.0, 1), Err(Error::Assembly(_))));
        assert!(matches!(GridSpec::new(1.0, 1, 4, 4), Err(Error::Assembly(_))));
        assert!(matches!(GridSpec::new(1.0, 4, 4, 0), Err(Error::Assembly(_))));
    }

    #[test]
    fn rigid_body_examples() {
        let z = assemble_rigid_body(0, &InertiaTensor::from_principal([1.0, 2.0, 3.0])).unwrap();
        assert_eq!(z.shape(), (1, 1));
        assert_eq!(z[(0, 0)].norm(), 0.0);
        let s = assemble_rigid_body(1, &InertiaTensor::from_principal([1.0, 1.0, 1.0])).unwrap();
        let diff = &s - CMatrix::identity(3, 3) * Complex64::new(2.0, 0.0);
        assert!(diff.iter().all(|z| z.norm() < 1e-14));
        assert!(matches!(
            assemble_rigid_body(1, &InertiaTensor::from_principal([0.0, 0.0, 0.0])),
            Err(Error::SingularInertia(_))
        ));
    }

    #[test]
    fn rotational_block_is_symmetric_top_at_pole() {
        let block = rotational_energy_block(1, 1.0, PI / 2.0 - 1e-12);
        // χ = π/2 is rejected as a singular endpoint; approach it instead.
        let block = block.unwrap();
        let top = assemble_rigid_body(1, &InertiaTensor::from_principal([1.0, 0.5, 0.5])).unwrap();
        assert!((&block - &top).iter().all(|z| z.norm() < 1e-10));
        assert!(rotational_energy_block(1, 1.0, PI / 2.0).is_err());
    }

    #[test]
    fn triatomic_scalar_rho_squared() {
        let err = |n_rho: usize| {
            let g = GridSpec::new(1.0, n_rho, 6, 3).unwrap();
            let op = assemble_triatomic(0, &g).unwrap();
            let f: Vec<f64> = (0..g.n_nodes()).map(|n| g.rho(g.node_of(n).0).powi(2)).collect();
            let y = op.apply(&f).unwrap();
            (0..g.n_nodes())
                .filter(|&n| (0.3..0.8).contains(&g.rho(g.node_of(n).0)))
                .map(|n| (y[n] + 12.0).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(20), err(40));
        assert!(e1 < 0.5, "{e1}");
        assert!((3.5..4.5).contains(&(e1 / e2)), "{e1} {e2}");
    }

    #[test]
    fn triatomic_pins_match_kernel_of_j3() {
        let g = GridSpec::new(1.0, 3, 3, 4).unwrap();
        let bc = BoundaryCondition::triatomic(1, &g);
        let pinned_count = bc.count();
        // ρ layer: 3·4·3 components, χ layer at i ≥ 1: 2·4·2 components.
        assert_eq!(pinned_count, 36 + 16);
        assert_eq!(BoundaryCondition::triatomic(0, &g).count(), 0);
    }

    #[test]
    fn triatomic_is_weighted_symmetric() {
        for ell in 0..3 {
            let op = assemble_triatomic(ell, &GridSpec::new(1.0, 4, 4, 5).unwrap()).unwrap();
            assert!(op.symmetry_defect() < 1e-13, "ell={ell}");
        }
    }
}
