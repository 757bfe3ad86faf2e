//! Deterministic random sampling of kinematic states and rotations.
//!
//! Validators take the random stream from the caller so that every report is
//! reproducible from a seed. Deformation gradients are built constructively
//! from principal stretches, which pins the Jacobian into a requested range
//! instead of rejection-sampling for it.

use rand::Rng;

use crate::kinematics::{SymThirdTensor, Tensor32};

/// Uniform random rotation of R³ (uniform unit quaternion, mapped to its
/// rotation matrix).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 3]; 3] {
    // Shoemake's subgroup algorithm: three uniforms to a uniform quaternion.
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let u3: f64 = rng.random();
    let s1 = (1.0 - u1).sqrt();
    let s2 = u1.sqrt();
    let (x, y) = ((std::f64::consts::TAU * u2).sin_cos(), (std::f64::consts::TAU * u3).sin_cos());
    let q = [s1 * x.0, s1 * x.1, s2 * y.0, s2 * y.1];
    let (w, xq, yq, zq) = (q[3], q[0], q[1], q[2]);
    [
        [
            1.0 - 2.0 * (yq * yq + zq * zq),
            2.0 * (xq * yq - zq * w),
            2.0 * (xq * zq + yq * w),
        ],
        [
            2.0 * (xq * yq + zq * w),
            1.0 - 2.0 * (xq * xq + zq * zq),
            2.0 * (yq * zq - xq * w),
        ],
        [
            2.0 * (xq * zq - yq * w),
            2.0 * (yq * zq + xq * w),
            1.0 - 2.0 * (xq * xq + yq * yq),
        ],
    ]
}

/// Random 3x2 deformation gradient with J = sqrt(det FᵀF) drawn uniformly
/// from [j_min, j_max]: F = Q E R with principal stretches on the diagonal
/// of E, an in-plane rotation R and an ambient rotation Q.
pub fn random_deformation_gradient<R: Rng + ?Sized>(rng: &mut R, j_min: f64, j_max: f64) -> Tensor32 {
    let j = rng.random_range(j_min..=j_max);
    let ratio = rng.random_range(0.6..1.7);
    let s1 = (j * ratio).sqrt();
    let s2 = (j / ratio).sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    let (st, ct) = theta.sin_cos();
    // E R in one product: rows of the 3x2 matrix before the ambient rotation
    let er = [[s1 * ct, s1 * st], [-s2 * st, s2 * ct], [0.0, 0.0]];
    let q = random_rotation(rng);
    let mut f = Tensor32::ZERO;
    for i in 0..3 {
        for a in 0..2 {
            let mut s = 0.0;
            for k in 0..3 {
                s += q[i][k] * er[k][a];
            }
            f.0[i][a] = s;
        }
    }
    f
}

/// Random second gradient with independent components uniform in
/// [-scale, scale].
pub fn random_second_gradient<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SymThirdTensor {
    let mut g = SymThirdTensor::ZERO;
    for i in 0..3 {
        for c in 0..3 {
            g.0[i][c] = rng.random_range(-scale..scale);
        }
    }
    g
}

/// A (G, F) pair with controlled Jacobian range and G magnitude.
pub fn random_state<R: Rng + ?Sized>(
    rng: &mut R,
    j_min: f64,
    j_max: f64,
    g_scale: f64,
) -> (SymThirdTensor, Tensor32) {
    (
        random_second_gradient(rng, g_scale),
        random_deformation_gradient(rng, j_min, j_max),
    )
}
