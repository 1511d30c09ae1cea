//! N-body configuration geometry: Jacobi vectors, the kinetic metric, the
//! angular momentum form, the inertia operator, the mechanical connection and
//! the orbit-type (stratum) classification.
//!
//! Positions are taken in the center-of-mass frame. All vectors are ordinary
//! `nalgebra::Vector3<f64>`; elements of so(3) are identified with ℝ³ through
//! `ξ ↦ (v ↦ ξ × v)`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Default relative threshold for rank decisions and pseudo-inverses.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const COM_TOL: f64 = 1e-12;

/// Masses and center-of-mass positions of N atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSystem {
    masses: Vec<f64>,
    positions: Vec<Vec3>,
}

impl AtomSystem {
    /// Validates positive masses and the center-of-mass condition `Σ mᵢ xᵢ = 0`.
    pub fn new(masses: Vec<f64>, positions: Vec<Vec3>) -> Result<Self> {
        if masses.len() != positions.len() {
            return Err(Error::Dimension { expected: masses.len(), actual: positions.len() });
        }
        if masses.is_empty() {
            return Err(Error::Domain("a system needs at least one atom".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::Domain(format!("mass {m} is not strictly positive")));
        }
        let residual = weighted_sum(&masses, &positions).norm();
        let scale: f64 = masses.iter().zip(&positions).map(|(m, x)| m * x.norm()).sum();
        if residual > COM_TOL * scale {
            return Err(Error::Domain(format!(
                "center-of-mass condition violated: |Σ mᵢxᵢ| = {residual:e} (scale {scale:e})"
            )));
        }
        Ok(Self { masses, positions })
    }

    /// Shift arbitrary positions into the center-of-mass frame and build the system.
    pub fn centered(masses: Vec<f64>, mut positions: Vec<Vec3>) -> Result<Self> {
        if masses.len() == positions.len() && !masses.is_empty() {
            let total: f64 = masses.iter().sum();
            let com = weighted_sum(&masses, &positions) / total;
            for x in &mut positions {
                *x -= com;
            }
        }
        Self::new(masses, positions)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// The rotated configuration `g·x`.
    pub fn rotated(&self, g: &Mat3) -> Self {
        Self { masses: self.masses.clone(), positions: self.positions.iter().map(|x| g * x).collect() }
    }
}

fn weighted_sum(masses: &[f64], vs: &[Vec3]) -> Vec3 {
    masses.iter().zip(vs).fold(Vec3::zeros(), |acc, (m, v)| acc + *m * v)
}

/// Mass-weighted Jacobi vectors `r₁ … r_{N−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiFrame {
    pub vectors: Vec<Vec3>,
}

impl JacobiFrame {
    pub fn new(vectors: Vec<Vec3>) -> Self {
        Self { vectors }
    }

    /// The 3×(N−1) configuration matrix whose columns are the Jacobi vectors.
    pub fn matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(3, self.vectors.len(), |i, j| self.vectors[j][i])
    }
}

/// Per-atom velocities with vanishing total momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    velocities: Vec<Vec3>,
}

impl TangentVector {
    pub fn new(sys: &AtomSystem, velocities: Vec<Vec3>) -> Result<Self> {
        if velocities.len() != sys.len() {
            return Err(Error::Dimension { expected: sys.len(), actual: velocities.len() });
        }
        let residual = weighted_sum(&sys.masses, &velocities).norm();
        let scale: f64 = sys.masses.iter().zip(&velocities).map(|(m, v)| m * v.norm()).sum();
        if residual > COM_TOL * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
            return Err(Error::Domain(format!("tangent vector carries net momentum {residual:e}")));
        }
        Ok(Self { velocities })
    }

    /// Remove the net momentum from arbitrary velocities.
    pub fn projected(sys: &AtomSystem, mut velocities: Vec<Vec3>) -> Result<Self> {
        if velocities.len() == sys.len() {
            let total: f64 = sys.masses.iter().sum();
            let p = weighted_sum(&sys.masses, &velocities) / total;
            for v in &mut velocities {
                *v -= p;
            }
        }
        Self::new(sys, velocities)
    }

    pub fn zero(sys: &AtomSystem) -> Self {
        Self { velocities: vec![Vec3::zeros(); sys.len()] }
    }

    pub fn velocities(&self) -> &[Vec3] {
        &self.velocities
    }

    pub fn rotated(&self, g: &Mat3) -> Self {
        Self { velocities: self.velocities.iter().map(|v| g * v).collect() }
    }
}

/// Jacobi map applied to any per-atom vector field (positions or velocities).
/// Returns `(r₀, [r₁ … r_{N−1}])`.
fn jacobi_transform(masses: &[f64], xs: &[Vec3]) -> (Vec3, Vec<Vec3>) {
    let mut cum_mass = masses[0];
    let mut partial_com = xs[0];
    let mut out = Vec::with_capacity(masses.len() - 1);
    for i in 1..masses.len() {
        let m = masses[i];
        let k = (1.0 / cum_mass + 1.0 / m).powf(-0.5);
        out.push(k * (xs[i] - partial_com));
        partial_com = (cum_mass * partial_com + m * xs[i]) / (cum_mass + m);
        cum_mass += m;
    }
    (cum_mass.sqrt() * partial_com, out)
}

pub fn to_jacobi(sys: &AtomSystem) -> JacobiFrame {
    let (_, vectors) = jacobi_transform(&sys.masses, &sys.positions);
    JacobiFrame { vectors }
}

/// Jacobi image `(ṙ₁ … ṙ_{N−1})` of a tangent vector.
pub fn jacobi_velocities(sys: &AtomSystem, v: &TangentVector) -> Vec<Vec3> {
    jacobi_transform(&sys.masses, &v.velocities).1
}

/// Inverse of [`to_jacobi`] on the center-of-mass subspace.
pub fn from_jacobi(masses: &[f64], frame: &JacobiFrame) -> Result<AtomSystem> {
    let n = masses.len();
    if n == 0 || frame.vectors.len() + 1 != n {
        return Err(Error::Dimension { expected: n.saturating_sub(1), actual: frame.vectors.len() });
    }
    let cum: Vec<f64> = masses
        .iter()
        .scan(0.0, |s, m| {
            *s += m;
            Some(*s)
        })
        .collect();
    // X_N = 0; walk back X_i = X_{i+1} − (m_{i+1}/M_{i+1}) (x_{i+1} − X_i).
    let mut positions = vec![Vec3::zeros(); n];
    let mut com = Vec3::zeros();
    for i in (1..n).rev() {
        let m = masses[i];
        let k = (1.0 / cum[i - 1] + 1.0 / m).powf(-0.5);
        let rel = frame.vectors[i - 1] / k;
        let prev_com = com - (m / cum[i]) * rel;
        positions[i] = prev_com + rel;
        com = prev_com;
    }
    positions[0] = com;
    AtomSystem::new(masses.to_vec(), positions)
}

/// `K(v, w) = Σ mᵢ (vᵢ, wᵢ)`.
pub fn kinetic_form(sys: &AtomSystem, v: &TangentVector, w: &TangentVector) -> f64 {
    sys.masses
        .iter()
        .zip(v.velocities.iter().zip(&w.velocities))
        .map(|(m, (a, b))| m * a.dot(b))
        .sum()
}

/// `L̂(v) = Σ mᵢ xᵢ × vᵢ`.
pub fn angular_momentum(sys: &AtomSystem, v: &TangentVector) -> Vec3 {
    sys.masses
        .iter()
        .zip(sys.positions.iter().zip(&v.velocities))
        .fold(Vec3::zeros(), |acc, (m, (x, u))| acc + *m * x.cross(u))
}

/// `θₓ(ξ) = (ξ × x₁, …, ξ × x_N)`.
pub fn infinitesimal_action(sys: &AtomSystem, xi: &Vec3) -> TangentVector {
    TangentVector { velocities: sys.positions.iter().map(|x| xi.cross(x)).collect() }
}

/// Symmetric positive semi-definite inertia operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor(pub Mat3);

impl InertiaTensor {
    pub fn from_principal(moments: [f64; 3]) -> Self {
        Self(Mat3::from_diagonal(&Vec3::new(moments[0], moments[1], moments[2])))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Eigenvalues ascending with matching unit eigenvectors as columns.
    pub fn principal_axes(&self) -> (Vec3, Mat3) {
        let eig = SymmetricEigen::new(self.0);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = Vec3::new(eig.eigenvalues[order[0]], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
        let axes = Mat3::from_columns(&[
            eig.eigenvectors.column(order[0]).into_owned(),
            eig.eigenvectors.column(order[1]).into_owned(),
            eig.eigenvectors.column(order[2]).into_owned(),
        ]);
        (vals, axes)
    }

    /// Number of eigenvalues above `tol · λ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let (vals, _) = self.principal_axes();
        let max = vals[2];
        if max <= 0.0 {
            return 0;
        }
        vals.iter().filter(|&&l| l > tol * max).count()
    }

    /// Pseudo-inverse restricted to eigenvalues above `tol · λ_max`; this is
    /// the inverse of the reduced inertia on 𝔤/𝔤ₓ.
    pub fn pseudo_inverse(&self, tol: f64) -> Result<Mat3> {
        let (vals, axes) = self.principal_axes();
        let max = vals[2];
        if !(max > 0.0) {
            return Err(Error::SingularInertia("inertia operator vanishes (collision configuration)".into()));
        }
        let mut inv = Mat3::zeros();
        for k in 0..3 {
            if vals[k] > tol * max {
                let e = axes.column(k);
                inv += (e * e.transpose()) / vals[k];
            }
        }
        Ok(inv)
    }
}

/// `Î = Σ (‖rᵢ‖² Id − rᵢ rᵢᵀ)` over Jacobi vectors.
pub fn inertia_operator(sys: &AtomSystem) -> InertiaTensor {
    inertia_of_frame(&to_jacobi(sys))
}

pub fn inertia_of_frame(frame: &JacobiFrame) -> InertiaTensor {
    let mut m = Mat3::zeros();
    for r in &frame.vectors {
        m += Mat3::identity() * r.norm_squared() - r * r.transpose();
    }
    InertiaTensor(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stratum {
    Generic,
    Planar,
    Collinear,
    Collision,
}

impl Stratum {
    pub fn from_rank(rank: usize) -> Self {
        match rank {
            0 => Stratum::Collision,
            1 => Stratum::Collinear,
            2 => Stratum::Planar,
            _ => Stratum::Generic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stratum::Generic => "Generic",
            Stratum::Planar => "Planar",
            Stratum::Collinear => "Collinear",
            Stratum::Collision => "Collision",
        }
    }

    /// Rank of the inertia operator on this stratum.
    pub fn inertia_rank(&self) -> usize {
        match self {
            Stratum::Generic | Stratum::Planar => 3,
            Stratum::Collinear => 2,
            Stratum::Collision => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumLabel {
    pub stratum: Stratum,
    /// Rank of the 3×(N−1) Jacobi matrix.
    pub rank: usize,
}

/// Singular values of the Jacobi matrix thresholded at `tol · σ_max`.
/// `tol = 0` counts every nonzero singular value.
pub fn classify_stratum(sys: &AtomSystem, tol: f64) -> StratumLabel {
    classify_frame(&to_jacobi(sys), tol)
}

pub fn classify_frame(frame: &JacobiFrame, tol: f64) -> StratumLabel {
    let rank = if frame.vectors.is_empty() {
        0
    } else {
        let sv = frame.matrix().singular_values();
        let max = sv.max();
        if max <= 0.0 {
            0
        } else {
            sv.iter().filter(|&&s| s > tol * max).count()
        }
    };
    StratumLabel { stratum: Stratum::from_rank(rank), rank }
}

/// Value of the connection form; at collinear points it is the representative
/// orthogonal to the molecular axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionValue {
    pub omega: Vec3,
    /// Molecular axis spanning the isotropy algebra 𝔤ₓ, present at collinear points.
    pub isotropy_axis: Option<Vec3>,
}

pub fn connection_apply(sys: &AtomSystem, v: &TangentVector) -> Result<ConnectionValue> {
    connection_apply_with_tol(sys, v, DEFAULT_RANK_TOL)
}

/// `ω = Ĩ⁻¹ L̂(v)` with the inverse taken on the image of `Î`.
pub fn connection_apply_with_tol(sys: &AtomSystem, v: &TangentVector, tol: f64) -> Result<ConnectionValue> {
    let inertia = inertia_operator(sys);
    let pinv = inertia.pseudo_inverse(tol)?;
    let omega = pinv * angular_momentum(sys, v);
    let isotropy_axis = if inertia.rank(tol) == 2 {
        let (_, axes) = inertia.principal_axes();
        Some(axes.column(0).into_owned())
    } else {
        None
    };
    Ok(ConnectionValue { omega, isotropy_axis })
}

#[cfg(test)]
mod tests {
    use proptest::strategy::Strategy;
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn two_body_jacobi_vector() {
        let sys = AtomSystem::new(vec![1.0, 1.0], vec![v(-0.5, 0.0, 0.0), v(0.5, 0.0, 0.0)]).unwrap();
        let f = to_jacobi(&sys);
        assert_relative_eq!(f.vectors[0], v(FRAC_1_SQRT_2, 0.0, 0.0), epsilon = 1e-15);
        let back = from_jacobi(&[1.0, 1.0], &JacobiFrame::new(vec![v(FRAC_1_SQRT_2, 0.0, 0.0)])).unwrap();
        assert_relative_eq!(back.positions()[0], v(-0.5, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(back.positions()[1], v(0.5, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn three_body_jacobi_vectors() {
        let sys = AtomSystem::new(vec![1.0; 3], vec![v(-1.0, 0.0, 0.0), v(1.0, 0.0, 0.0), Vec3::zeros()]).unwrap();
        let f = to_jacobi(&sys);
        assert_relative_eq!(f.vectors[0], v(2f64.sqrt(), 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(f.vectors[1], Vec3::zeros(), epsilon = 1e-15);
    }

    #[test]
    fn zero_configuration_maps_to_zero() {
        let sys = AtomSystem::new(vec![1.0, 2.0, 3.0], vec![Vec3::zeros(); 3]).unwrap();
        assert!(to_jacobi(&sys).vectors.iter().all(|r| r.norm() == 0.0));
        let back = from_jacobi(&[1.0, 2.0, 3.0], &JacobiFrame::new(vec![Vec3::zeros(); 2])).unwrap();
        assert!(back.positions().iter().all(|x| x.norm() == 0.0));
        assert_eq!(classify_stratum(&sys, DEFAULT_RANK_TOL).stratum, Stratum::Collision);
        assert_eq!(inertia_operator(&sys).0, Mat3::zeros());
    }

    #[test]
    fn center_of_mass_violation_is_an_error() {
        let err = AtomSystem::new(vec![1.0, 1.0], vec![v(1.0, 0.0, 0.0), v(0.5, 0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Domain(ref s) if s.contains("center-of-mass")));
        assert!(AtomSystem::new(vec![1.0, -1.0], vec![Vec3::zeros(); 2]).is_err());
        assert!(from_jacobi(&[1.0, 1.0, 1.0], &JacobiFrame::new(vec![Vec3::zeros()])).is_err());
    }

    #[test]
    fn kinetic_and_momentum_examples() {
        let sys = AtomSystem::new(vec![1.0, 1.0], vec![v(-0.5, 0.0, 0.0), v(0.5, 0.0, 0.0)]).unwrap();
        let t = TangentVector::new(&sys, vec![v(-1.0, 0.0, 0.0), v(1.0, 0.0, 0.0)]).unwrap();
        assert_relative_eq!(kinetic_form(&sys, &t, &t), 2.0);
        let zero = TangentVector::zero(&sys);
        assert_eq!(kinetic_form(&sys, &zero, &zero), 0.0);
        assert_eq!(angular_momentum(&sys, &zero), Vec3::zeros());
        let spin = TangentVector::new(&sys, vec![v(0.0, -1.0, 0.0), v(0.0, 1.0, 0.0)]).unwrap();
        assert_relative_eq!(angular_momentum(&sys, &spin), v(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn infinitesimal_action_example() {
        let sys = AtomSystem::new(vec![1.0, 1.0], vec![v(0.5, 0.0, 0.0), v(-0.5, 0.0, 0.0)]).unwrap();
        let t = infinitesimal_action(&sys, &Vec3::z());
        assert_relative_eq!(t.velocities()[0], v(0.0, 0.5, 0.0));
        assert_relative_eq!(t.velocities()[1], v(0.0, -0.5, 0.0));
        let zero = infinitesimal_action(&sys, &Vec3::zeros());
        assert!(zero.velocities().iter().all(|u| u.norm() == 0.0));
    }

    fn from_frame(vectors: Vec<Vec3>) -> AtomSystem {
        let masses = vec![1.0; vectors.len() + 1];
        from_jacobi(&masses, &JacobiFrame::new(vectors)).unwrap()
    }

    #[test]
    fn collinear_inertia_and_stratum() {
        let sys = from_frame(vec![v(0.0, 0.0, 1.5), v(0.0, 0.0, -0.5)]);
        let i = inertia_operator(&sys);
        assert_relative_eq!(i.0, Mat3::from_diagonal(&v(2.5, 2.5, 0.0)), epsilon = 1e-14);
        let sys = from_frame(vec![Vec3::z(), 2.0 * Vec3::z()]);
        let label = classify_stratum(&sys, DEFAULT_RANK_TOL);
        assert_eq!(label, StratumLabel { stratum: Stratum::Collinear, rank: 1 });
        assert_eq!(inertia_operator(&sys).rank(DEFAULT_RANK_TOL), 2);
        let planar = from_frame(vec![Vec3::x(), Vec3::y()]);
        assert_eq!(classify_stratum(&planar, DEFAULT_RANK_TOL).stratum, Stratum::Planar);
        assert_eq!(inertia_operator(&planar).rank(DEFAULT_RANK_TOL), 3);
    }

    #[test]
    fn collinear_connection_drops_axis_component() {
        let sys = from_frame(vec![Vec3::z(), Vec3::zeros()]);
        let w = connection_apply(&sys, &infinitesimal_action(&sys, &Vec3::x())).unwrap();
        assert_relative_eq!(w.omega, Vec3::x(), epsilon = 1e-14);
        let axis = w.isotropy_axis.unwrap();
        assert_relative_eq!(axis.dot(&Vec3::z()).abs(), 1.0, epsilon = 1e-14);
        let along = infinitesimal_action(&sys, &Vec3::z());
        assert!(along.velocities().iter().all(|u| u.norm() < 1e-15));
    }

    #[test]
    fn collision_connection_is_singular() {
        let sys = from_frame(vec![Vec3::zeros(); 2]);
        let err = connection_apply(&sys, &TangentVector::zero(&sys)).unwrap_err();
        assert!(matches!(err, Error::SingularInertia(_)));
    }

    fn arb_system(n: usize) -> impl proptest::strategy::Strategy<Value = (AtomSystem, TangentVector)> {
        use proptest::prelude::*;
        (
            proptest::collection::vec(0.1..20.0f64, n),
            proptest::collection::vec(-3.0..3.0f64, 3 * n),
            proptest::collection::vec(-2.0..2.0f64, 3 * n),
        )
            .prop_map(move |(m, x, v)| {
                let pos = (0..n).map(|i| Vec3::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])).collect();
                let vel = (0..n).map(|i| Vec3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2])).collect();
                let sys = AtomSystem::centered(m, pos).unwrap();
                let t = TangentVector::projected(&sys, vel).unwrap();
                (sys, t)
            })
    }

    proptest::proptest! {
        #[test]
        fn jacobi_roundtrip_and_additivity((sys, t) in (3usize..6).prop_flat_map(arb_system)) {
            let frame = to_jacobi(&sys);
            let back = from_jacobi(sys.masses(), &frame).unwrap();
            let scale = sys.positions().iter().map(|x| x.norm()).fold(1.0, f64::max);
            for (a, b) in back.positions().iter().zip(sys.positions()) {
                proptest::prop_assert!((a - b).norm() < 1e-12 * scale);
            }
            let jv = jacobi_velocities(&sys, &t);
            let k_atom = kinetic_form(&sys, &t, &t);
            let k_jac: f64 = jv.iter().map(|v| v.norm_squared()).sum();
            proptest::prop_assert!((k_atom - k_jac).abs() <= 1e-12 * k_atom.max(1e-300));
            let l_atom = angular_momentum(&sys, &t);
            let l_jac = frame.vectors.iter().zip(&jv).fold(Vec3::zeros(), |acc, (r, v)| acc + r.cross(v));
            let l_scale = sys.masses().iter().zip(sys.positions().iter().zip(t.velocities()))
                .map(|(m, (x, v))| m * x.norm() * v.norm()).sum::<f64>();
            proptest::prop_assert!((l_atom - l_jac).norm() <= 1e-12 * l_scale.max(1e-300));
        }

        #[test]
        fn connection_inverts_the_action((sys, _t) in (3usize..5).prop_flat_map(arb_system),
                                         xi in proptest::array::uniform3(-1.0..1.0f64)) {
            let xi = Vec3::from(xi);
            let w = connection_apply(&sys, &infinitesimal_action(&sys, &xi)).unwrap();
            proptest::prop_assert!((w.omega - xi).norm() < 1e-9 * (1.0 + xi.norm()));
        }

        #[test]
        fn inertia_is_equivariant((sys, _t) in (2usize..5).prop_flat_map(arb_system),
                                  angles in proptest::array::uniform3(0.0..6.0f64)) {
            let g = crate::harmonics::rotation_from_euler(&crate::harmonics::EulerAngles::new(angles[0], angles[1], angles[2]));
            let i0 = inertia_operator(&sys).0;
            let i1 = inertia_operator(&sys.rotated(&g)).0;
            let scale = i0.norm().max(1.0);
            proptest::prop_assert!((g * i0 * g.transpose() - i1).norm() < 1e-12 * scale);
        }
    }
}
