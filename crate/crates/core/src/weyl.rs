//! Canonical (KAK) decomposition of two-qubit gates and Weyl-chamber arithmetic.

use crate::gates::{self, MAGIC_XX, MAGIC_YY, MAGIC_ZZ};
use crate::numerics::{
    c64, check_unitary, det, kron, max_abs, pauli, sym_unitary_eig, CMatrix, NumericsError, C64,
    STRUCTURAL_TOL,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// Tolerance used for chamber membership and boundary decisions.
pub const CHAMBER_TOL: f64 = 1e-9;
/// Default tolerance of [`local_equivalent`].
pub const EQUIV_TOL: f64 = 1e-8;

/// Nonlocal class `(x, y, z)` of a two-qubit gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCoordinate {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WeylCoordinate {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const IDENTITY: Self = Self::new(0.0, 0.0, 0.0);
    pub const CNOT: Self = Self::new(FRAC_PI_4, 0.0, 0.0);
    pub const ISWAP: Self = Self::new(FRAC_PI_4, FRAC_PI_4, 0.0);
    pub const SQISW: Self = Self::new(FRAC_PI_4 / 2.0, FRAC_PI_4 / 2.0, 0.0);
    pub const B: Self = Self::new(FRAC_PI_4, FRAC_PI_4 / 2.0, 0.0);
    pub const SWAP: Self = Self::new(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4);

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn l1(&self) -> f64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }

    pub fn in_chamber(&self, tol: f64) -> bool {
        let (x, y, z) = (self.x, self.y, self.z);
        x <= FRAC_PI_4 + tol
            && x >= y - tol
            && y >= z.abs() - tol
            && (z >= -tol || (FRAC_PI_4 - x) > tol)
    }

    /// The equivalent point `(π/2 - x, y, -z)` of the extended chamber.
    pub fn reflected(&self) -> Self {
        Self::new(FRAC_PI_2 - self.x, self.y, -self.z)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    /// Max-norm distance between classes, aware of the `x = π/4` face identification.
    pub fn class_distance(&self, other: &Self) -> f64 {
        let direct = self.max_diff(other);
        direct.min(self.max_diff(&other.reflected()))
    }

    pub fn matrix(&self) -> CMatrix {
        gates::can(self.x, self.y, self.z)
    }
}

/// `U = phase · (v1 ⊗ v2) · Can(coordinate) · (v3 ⊗ v4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDecomposition {
    pub coordinate: WeylCoordinate,
    pub v1: CMatrix,
    pub v2: CMatrix,
    pub v3: CMatrix,
    pub v4: CMatrix,
    pub phase: C64,
}

impl LocalDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        kron(&self.v1, &self.v2) * self.coordinate.matrix() * kron(&self.v3, &self.v4) * self.phase
    }
}

/// Canonical point of `Can(x, y, z)` with the bookkeeping of the local gates
/// that relate the two: `Can(raw) = phase · left · Can(canonical) · right`.
struct Tracked {
    c: [f64; 3],
    left: CMatrix,
    right: CMatrix,
    phase: C64,
}

impl Tracked {
    fn new(c: [f64; 3]) -> Self {
        Self { c, left: CMatrix::identity(4, 4), right: CMatrix::identity(4, 4), phase: c64(1.0, 0.0) }
    }

    /// Replace coordinate `k` by `c[k] - n·π/2`, using `exp(-i π/2 P⊗P) = -i P⊗P`.
    fn shift(&mut self, k: usize, n: i64) {
        if n == 0 {
            return;
        }
        self.c[k] -= n as f64 * FRAC_PI_2;
        let p = kron(&pauli(k + 1), &pauli(k + 1));
        for _ in 0..n.rem_euclid(4) {
            self.right = &p * &self.right;
            self.phase *= c64(0.0, -1.0);
        }
    }

    /// Apply the local `v` with `v · Can(c) · v† = Can(c')`, where `c'` is `new_c`.
    fn conjugate(&mut self, v: &CMatrix, new_c: [f64; 3]) {
        self.left = &self.left * v.adjoint();
        self.right = v * &self.right;
        self.c = new_c;
    }

    fn swap_xy(&mut self) {
        let s = gates::s_gate();
        let [x, y, z] = self.c;
        self.conjugate(&kron(&s, &s), [y, x, z]);
    }

    fn swap_xz(&mut self) {
        let h = gates::hadamard();
        let [x, y, z] = self.c;
        self.conjugate(&kron(&h, &h), [z, y, x]);
    }

    fn swap_yz(&mut self) {
        let r = gates::rx(FRAC_PI_2);
        let [x, y, z] = self.c;
        self.conjugate(&kron(&r, &r), [x, z, y]);
    }

    fn swap(&mut self, i: usize, j: usize) {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.swap_xy(),
            (0, 2) => self.swap_xz(),
            (1, 2) => self.swap_yz(),
            _ => unreachable!(),
        }
    }

    /// Negate the two coordinates other than `keep` (conjugation by a Pauli on one qubit).
    fn flip_pair(&mut self, keep: usize) {
        let p = kron(&pauli(keep + 1), &pauli(0));
        let mut c = self.c;
        for k in 0..3 {
            if k != keep {
                c[k] = -c[k];
            }
        }
        self.conjugate(&p, c);
    }

    fn canonicalize(&mut self) {
        for k in 0..3 {
            let v = self.c[k];
            let mut n = ((v + FRAC_PI_4) / FRAC_PI_2).floor() as i64;
            if v - n as f64 * FRAC_PI_2 <= -FRAC_PI_4 + 1e-12 {
                n -= 1;
            }
            self.shift(k, n);
        }
        for i in 0..3 {
            for j in 0..2 - i {
                if self.c[j].abs() < self.c[j + 1].abs() {
                    self.swap(j, j + 1);
                }
            }
        }
        let [x, y, _] = self.c;
        if x < 0.0 && y < 0.0 {
            self.flip_pair(2);
        } else if x < 0.0 {
            self.flip_pair(1);
        } else if y < 0.0 {
            self.flip_pair(0);
        }
        if (self.c[0] - FRAC_PI_4).abs() < CHAMBER_TOL && self.c[2] < 0.0 {
            // (π/4, y, z) ~ (π/4, y, -z): flip x and z, then shift x back up
            self.flip_pair(1);
            self.shift(0, -1);
        }
    }
}

/// Reduces an arbitrary exponent triple to its Weyl-chamber representative.
pub fn canonicalize_coordinate(x: f64, y: f64, z: f64) -> WeylCoordinate {
    let mut t = Tracked::new([x, y, z]);
    t.canonicalize();
    WeylCoordinate::new(t.c[0], t.c[1], t.c[2])
}

/// Splits a 4×4 matrix known to be `A ⊗ B` (up to a scalar) into its factors.
pub fn split_tensor(k: &CMatrix) -> (CMatrix, CMatrix) {
    // pick the 2x2 block with the largest norm as the B factor
    let mut best = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = k.view((2 * i, 2 * j), (2, 2)).norm();
            if n > best.2 {
                best = (i, j, n);
            }
        }
    }
    let mut b: CMatrix = k.view((2 * best.0, 2 * best.1), (2, 2)).into_owned();
    let d = b.clone().determinant();
    b /= d.sqrt();
    let mut a = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let blk = k.view((2 * i, 2 * j), (2, 2));
            a[(i, j)] = (b.adjoint() * blk).trace() / c64(2.0, 0.0);
        }
    }
    let da = a.clone().determinant();
    if da.norm() > 1e-300 {
        a /= da.sqrt();
    }
    (a, b)
}

/// KAK decomposition through the magic basis.
pub fn canonical_decompose(u: &CMatrix) -> Result<LocalDecomposition, NumericsError> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(NumericsError::NotSquare(u.nrows(), u.ncols()));
    }
    check_unitary(u, STRUCTURAL_TOL)?;
    let m = gates::magic_basis();
    let md = m.adjoint();
    let u0 = u / det(u).powf(0.25);
    let up = &md * &u0 * &m;
    let m2 = up.transpose() * &up;
    // symmetrize away round-off before the structural check
    let m2 = (&m2 + m2.transpose()) * c64(0.5, 0.0);
    let (p, d) = sym_unitary_eig(&m2)?;
    let mut theta: Vec<f64> = d.iter().map(|z| z.arg() / 2.0).collect();
    let total: f64 = theta.iter().sum();
    theta[0] -= (total / std::f64::consts::PI).round() * std::f64::consts::PI;

    let pc = p.map(|v| c64(v, 0.0));
    let mut delta_inv = CMatrix::zeros(4, 4);
    for k in 0..4 {
        delta_inv[(k, k)] = C64::from_polar(1.0, -theta[k]);
    }
    let o1 = &up * &pc * delta_inv;
    let k1 = &m * o1 * &md;
    let k2 = &m * pc.transpose() * &md;

    let coord = |l: &[f64; 4]| -(0..4).map(|k| theta[k] * l[k]).sum::<f64>() / 4.0;
    let mut t = Tracked::new([coord(&MAGIC_XX), coord(&MAGIC_YY), coord(&MAGIC_ZZ)]);
    t.canonicalize();
    let left = k1 * &t.left;
    let right = &t.right * k2;
    let (v1, v2) = split_tensor(&left);
    let (v3, v4) = split_tensor(&right);
    let coordinate = WeylCoordinate::new(t.c[0], t.c[1], t.c[2]);
    let body = kron(&v1, &v2) * coordinate.matrix() * kron(&v3, &v4);
    // exact global phase from the overlap with the source
    let overlap = (body.adjoint() * u).trace() / c64(4.0, 0.0);
    let phase = overlap / overlap.norm();
    Ok(LocalDecomposition { coordinate, v1, v2, v3, v4, phase })
}

/// Like [`canonical_decompose`], but when `reference` is closer to the mirrored
/// representative `(π/2 - x, y, -z)` the factors are rewritten around that one.
pub fn canonical_decompose_towards(
    u: &CMatrix,
    reference: &WeylCoordinate,
) -> Result<LocalDecomposition, NumericsError> {
    let d = canonical_decompose(u)?;
    let c = d.coordinate;
    if c.max_diff(reference) <= c.reflected().max_diff(reference) {
        return Ok(d);
    }
    let mut t = Tracked::new(c.as_array());
    t.flip_pair(1);
    t.shift(0, -1);
    let left = kron(&d.v1, &d.v2) * &t.left;
    let right = &t.right * kron(&d.v3, &d.v4);
    let (v1, v2) = split_tensor(&left);
    let (v3, v4) = split_tensor(&right);
    let coordinate = WeylCoordinate::new(t.c[0], t.c[1], t.c[2]);
    let body = kron(&v1, &v2) * coordinate.matrix() * kron(&v3, &v4);
    let overlap = (body.adjoint() * u).trace() / c64(4.0, 0.0);
    Ok(LocalDecomposition { coordinate, v1, v2, v3, v4, phase: overlap / overlap.norm() })
}

pub fn weyl_coordinate(u: &CMatrix) -> Result<WeylCoordinate, NumericsError> {
    Ok(canonical_decompose(u)?.coordinate)
}

/// Class of `SWAP · Can(c)`. Since SWAP is `Can(π/4, π/4, π/4)` up to phase
/// and canonical gates commute, this is a shift of all three exponents.
pub fn mirror(c: &WeylCoordinate) -> WeylCoordinate {
    canonicalize_coordinate(c.x + FRAC_PI_4, c.y + FRAC_PI_4, c.z + FRAC_PI_4)
}

pub fn local_equivalent(u: &CMatrix, v: &CMatrix, tol: f64) -> Result<bool, NumericsError> {
    let a = weyl_coordinate(u)?;
    let b = weyl_coordinate(v)?;
    Ok(a.class_distance(&b) < tol)
}

pub fn is_near_identity(c: &WeylCoordinate, r: f64) -> bool {
    c.l1() < r
}

/// Haar-random element of U(n) via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Haar-random SU(4) element.
pub fn random_su4<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let u = random_unitary(4, rng);
    let d = det(&u);
    u / d.powf(0.25)
}

/// Random point of the Weyl chamber (uniform in the coordinate box, then reduced).
pub fn random_chamber_point<R: Rng + ?Sized>(rng: &mut R) -> WeylCoordinate {
    let x = rng.random_range(-1.6..1.6);
    let y = rng.random_range(-1.6..1.6);
    let z = rng.random_range(-1.6..1.6);
    canonicalize_coordinate(x, y, z)
}

/// Residual `max |reconstruct - U|` of a decomposition.
pub fn reconstruction_error(d: &LocalDecomposition, u: &CMatrix) -> f64 {
    max_abs(&(d.reconstruct() - u))
}
