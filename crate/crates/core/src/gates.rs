//! Fixed gate matrices and single-qubit Euler angles.
//!
//! Two-qubit matrices use the big-endian convention: the first qubit of a
//! pair is the high bit of the basis index, so `kron(a, b)` puts `a` on it.

use crate::numerics::{c64, kron, pauli, CMatrix, C64};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

/// Eigenvalues of XX, YY and ZZ in the magic basis.
pub(crate) const MAGIC_XX: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
pub(crate) const MAGIC_YY: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];
pub(crate) const MAGIC_ZZ: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// The magic basis: local gates become real orthogonal matrices in it.
pub fn magic_basis() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    let o = c64(0.0, 0.0);
    let r = c64(s, 0.0);
    let i = c64(0.0, s);
    CMatrix::from_row_slice(
        4,
        4,
        &[r, o, o, i, o, i, r, o, o, i, -r, o, r, o, o, -i],
    )
}

/// `exp(-i (x XX + y YY + z ZZ))`, built from its magic-basis diagonal.
pub fn can(x: f64, y: f64, z: f64) -> CMatrix {
    let m = magic_basis();
    let mut d = CMatrix::zeros(4, 4);
    for k in 0..4 {
        let theta = -(x * MAGIC_XX[k] + y * MAGIC_YY[k] + z * MAGIC_ZZ[k]);
        d[(k, k)] = C64::from_polar(1.0, theta);
    }
    &m * d * m.adjoint()
}

/// Qiskit-style `U3(θ, φ, λ)`.
pub fn u3(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c64(c, 0.0),
            -C64::from_polar(s, lambda),
            C64::from_polar(s, phi),
            C64::from_polar(c, phi + lambda),
        ],
    )
}

/// Euler angles with `v = e^{i γ} U3(θ, φ, λ)`; returns `(θ, φ, λ, γ)`.
pub fn u3_params(v: &CMatrix) -> (f64, f64, f64, f64) {
    let (a, b, cc, d) = (v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);
    let theta = 2.0 * cc.norm().atan2(a.norm());
    if a.norm() >= cc.norm() {
        let gamma = a.arg();
        let phi = cc.arg() - gamma;
        let lambda = d.arg() - gamma - phi;
        (theta, phi, lambda, gamma)
    } else {
        let gp = cc.arg();
        let gl = (-b).arg();
        let gamma = gp + gl - d.arg();
        (theta, gp - gamma, gl - gamma, gamma)
    }
}

pub fn rx(theta: f64) -> CMatrix {
    u3(theta, -FRAC_PI_2, FRAC_PI_2)
}

pub fn ry(theta: f64) -> CMatrix {
    u3(theta, 0.0, 0.0)
}

pub fn rz(theta: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -theta / 2.0);
    m[(1, 1)] = C64::from_polar(1.0, theta / 2.0);
    m
}

pub fn hadamard() -> CMatrix {
    let s = c64(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

pub fn phase(theta: f64) -> CMatrix {
    let mut m = CMatrix::identity(2, 2);
    m[(1, 1)] = C64::from_polar(1.0, theta);
    m
}

pub fn s_gate() -> CMatrix {
    phase(FRAC_PI_2)
}

pub fn t_gate() -> CMatrix {
    phase(FRAC_PI_4)
}

fn perm4(cols: [usize; 4]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (j, &i) in cols.iter().enumerate() {
        m[(i, j)] = c64(1.0, 0.0);
    }
    m
}

/// CNOT with the first qubit as control.
pub fn cnot() -> CMatrix {
    perm4([0, 1, 3, 2])
}

pub fn cz() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(3, 3)] = c64(-1.0, 0.0);
    m
}

pub fn swap() -> CMatrix {
    perm4([0, 2, 1, 3])
}

pub fn iswap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c64(1.0, 0.0);
    m[(3, 3)] = c64(1.0, 0.0);
    m[(1, 2)] = c64(0.0, 1.0);
    m[(2, 1)] = c64(0.0, 1.0);
    m
}

/// Square root of iSWAP.
pub fn sqisw() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c64(1.0, 0.0);
    m[(3, 3)] = c64(1.0, 0.0);
    m[(1, 1)] = c64(s, 0.0);
    m[(2, 2)] = c64(s, 0.0);
    m[(1, 2)] = c64(0.0, s);
    m[(2, 1)] = c64(0.0, s);
    m
}

/// The B gate, `Can(π/4, π/8, 0)`.
pub fn b_gate() -> CMatrix {
    can(FRAC_PI_4, FRAC_PI_4 / 2.0, 0.0)
}

/// Toffoli with qubits 0 and 1 as controls.
pub fn ccx() -> CMatrix {
    let mut m = CMatrix::identity(8, 8);
    m[(6, 6)] = c64(0.0, 0.0);
    m[(7, 7)] = c64(0.0, 0.0);
    m[(6, 7)] = c64(1.0, 0.0);
    m[(7, 6)] = c64(1.0, 0.0);
    m
}

/// `σ_i ⊗ σ_j` shortcut for local conjugations.
pub fn local_pauli(i: usize, j: usize) -> CMatrix {
    kron(&pauli(i), &pauli(j))
}
