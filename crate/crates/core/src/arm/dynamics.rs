//! Closed-form Lagrangian dynamics of the planar 3R chain with zero gravity.

use nalgebra::{Matrix3, Vector3};

use super::{geometric_jacobian, ArmParams, ArmState, Joints, Wrench2};

struct Coeffs {
    m0: Matrix3<f64>,
    k2: f64,
    k23: f64,
    k3: f64,
}

fn coeffs(p: &ArmParams) -> Coeffs {
    let [m1, m2, m3] = p.link_masses;
    let [a1, a2, _] = p.link_lengths;
    let [c1, c2, c3] = p.com_offsets;
    let [i1, i2, i3] = p.link_inertias;
    let m33 = i3 + m3 * c3 * c3;
    let m22 = i2 + m2 * c2 * c2 + m3 * (a2 * a2 + c3 * c3) + i3;
    let m11 = i1 + m1 * c1 * c1 + m2 * a1 * a1 + m3 * a1 * a1 + m22;
    let m0 = Matrix3::new(m11, m22, m33, m22, m22, m33, m33, m33, m33);
    Coeffs {
        m0,
        k2: m2 * a1 * c2 + m3 * a1 * a2,
        k23: m3 * a1 * c3,
        k3: m3 * a2 * c3,
    }
}

/// Joint-space inertia matrix M(q).
pub fn mass_matrix(params: &ArmParams, q: &Joints) -> Matrix3<f64> {
    let k = coeffs(params);
    let c2 = k.k2 * q[1].cos();
    let c23 = k.k23 * (q[1] + q[2]).cos();
    let c3 = k.k3 * q[2].cos();
    let mut m = k.m0;
    m[(0, 0)] += 2.0 * (c2 + c23 + c3);
    m[(0, 1)] += c2 + c23 + 2.0 * c3;
    m[(0, 2)] += c23 + c3;
    m[(1, 1)] += 2.0 * c3;
    m[(1, 2)] += c3;
    m[(1, 0)] = m[(0, 1)];
    m[(2, 0)] = m[(0, 2)];
    m[(2, 1)] = m[(1, 2)];
    m
}

/// Partial derivatives of M with respect to each joint angle.
fn mass_matrix_partials(params: &ArmParams, q: &Joints) -> [Matrix3<f64>; 3] {
    let k = coeffs(params);
    let s2 = k.k2 * q[1].sin();
    let s23 = k.k23 * (q[1] + q[2]).sin();
    let s3 = k.k3 * q[2].sin();
    let sym = |d00: f64, d01: f64, d02: f64, d11: f64, d12: f64| {
        Matrix3::new(d00, d01, d02, d01, d11, d12, d02, d12, 0.0)
    };
    [
        Matrix3::zeros(),
        sym(-2.0 * (s2 + s23), -(s2 + s23), -s23, 0.0, 0.0),
        sym(-2.0 * (s23 + s3), -(s23 + 2.0 * s3), -(s23 + s3), -2.0 * s3, -s3),
    ]
}

/// Time derivative of M along the joint velocity `dq`.
pub fn mass_matrix_derivative(params: &ArmParams, q: &Joints, dq: &Joints) -> Matrix3<f64> {
    let d = mass_matrix_partials(params, q);
    d[0] * dq[0] + d[1] * dq[1] + d[2] * dq[2]
}

/// Coriolis/centrifugal matrix from the Christoffel symbols of M.
pub fn coriolis_matrix(params: &ArmParams, q: &Joints, dq: &Joints) -> Matrix3<f64> {
    let d = mass_matrix_partials(params, q);
    let mut c = Matrix3::zeros();
    for k in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                s += 0.5 * (d[i][(k, j)] + d[j][(k, i)] - d[k][(i, j)]) * dq[i];
            }
            c[(k, j)] = s;
        }
    }
    c
}

pub fn kinetic_energy(params: &ArmParams, state: &ArmState) -> f64 {
    let v = Vector3::from(state.dq);
    0.5 * v.dot(&(mass_matrix(params, &state.q) * v))
}

/// Solves M q̈ = τ + Jᵀ W − C q̇ − D q̇ for q̈.
pub fn forward_acceleration(
    params: &ArmParams,
    q: &Joints,
    dq: &Joints,
    tau: &Joints,
    external: &Wrench2,
) -> Vector3<f64> {
    let m = mass_matrix(params, q);
    let c = coriolis_matrix(params, q, dq);
    let v = Vector3::from(*dq);
    let mut rhs = Vector3::from(*tau) - c * v;
    for i in 0..3 {
        rhs[i] -= params.joint_damping[i] * dq[i];
    }
    if *external != Wrench2::ZERO {
        rhs += geometric_jacobian(params, q).transpose() * Vector3::from(external.as_array());
    }
    m.cholesky()
        .expect("mass matrix is positive definite for valid parameters")
        .solve(&rhs)
}
