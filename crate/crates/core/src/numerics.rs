//! Small dense complex linear algebra and a bounded 2-D root finder.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`; the matrices
//! involved are tiny (2x2 up to 128x128), so clarity wins over blocking.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Default tolerance for structural checks (unitarity, symmetry).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Hermiticity tolerance for generators fed to [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default residual target of [`solve_root_2d`].
pub const ROOT_TOL: f64 = 1e-10;
/// Joint off-diagonal norm at which the Jacobi sweep stops.
pub const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("Jacobi sweep did not converge (off-diagonal norm {0:.3e})")]
    NoConvergence(f64),
    #[error("no root found (best residual {best_residual:.3e} after {starts} starts)")]
    RootNotFound { best_residual: f64, starts: usize },
}

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(index: usize) -> CMatrix {
    let o = c64(0.0, 0.0);
    let l = c64(1.0, 0.0);
    let i = c64(0.0, 1.0);
    match index {
        0 => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        1 => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        2 => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        3 => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Two-qubit Pauli product `sigma_i ⊗ sigma_j` (first index is the high qubit).
pub fn pauli2(i: usize, j: usize) -> CMatrix {
    pauli(i).kronecker(&pauli(j))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `max |U†U - I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity(n)))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_deviation(u) < tol
}

pub fn hermiticity_deviation(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(h - h.adjoint()))
}

pub fn check_unitary(u: &CMatrix, tol: f64) -> Result<(), NumericsError> {
    if !u.is_square() {
        return Err(NumericsError::NotSquare(u.nrows(), u.ncols()));
    }
    let dev = unitarity_deviation(u);
    if dev < tol {
        Ok(())
    } else {
        Err(NumericsError::NotUnitary(dev))
    }
}

/// Complex determinant via LU.
pub fn det(u: &CMatrix) -> C64 {
    u.clone().determinant()
}

/// Evaluates `exp(-i H t)` through the eigendecomposition of the Hermitian `H`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix, NumericsError> {
    if !h.is_square() {
        return Err(NumericsError::NotSquare(h.nrows(), h.ncols()));
    }
    let scale = max_abs(h).max(1.0);
    let dev = hermiticity_deviation(h);
    if dev > HERMITIAN_TOL * scale {
        return Err(NumericsError::NotHermitian(dev));
    }
    // symmetrize away the sub-tolerance anti-Hermitian part
    let hs = (h + h.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::new(hs);
    let n = h.nrows();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for k in 0..n {
        let phase = C64::from_polar(1.0, -eig.eigenvalues[k] * t);
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Diagonalizes a complex symmetric unitary `S = O D Oᵀ` with real `O ∈ SO(n)`.
///
/// The real and imaginary parts of a symmetric unitary are commuting real
/// symmetric matrices, so a joint Jacobi sweep diagonalizes both at once.
/// Degenerate spectra (Clifford targets) are handled without special cases.
pub fn sym_unitary_eig(s: &CMatrix) -> Result<(RMatrix, Vec<C64>), NumericsError> {
    if !s.is_square() {
        return Err(NumericsError::NotSquare(s.nrows(), s.ncols()));
    }
    let asym = max_abs(&(s - s.transpose()));
    if asym > STRUCTURAL_TOL {
        return Err(NumericsError::NotSymmetric(asym));
    }
    check_unitary(s, 1e-8)?;
    let n = s.nrows();
    let mut a = RMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)].re + s[(j, i)].re));
    let mut b = RMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)].im + s[(j, i)].im));
    let o = joint_jacobi(&mut a, &mut b)?;
    let d = (0..n).map(|k| c64(a[(k, k)], b[(k, k)])).collect();
    Ok((o, d))
}

fn off_norm_sq(m: &RMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc
}

/// Jointly diagonalizes two commuting real symmetric matrices in place and
/// returns the accumulated rotation (columns are the common eigenvectors).
fn joint_jacobi(a: &mut RMatrix, b: &mut RMatrix) -> Result<RMatrix, NumericsError> {
    let n = a.nrows();
    let mut v = RMatrix::identity(n, n);
    for _sweep in 0..100 {
        let off = (off_norm_sq(a) + off_norm_sq(b)).sqrt();
        if off < JACOBI_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = [
                    [a[(p, p)] - a[(q, q)], 2.0 * a[(p, q)]],
                    [b[(p, p)] - b[(q, q)], 2.0 * b[(p, q)]],
                ];
                let g00 = h[0][0] * h[0][0] + h[1][0] * h[1][0];
                let g01 = h[0][0] * h[0][1] + h[1][0] * h[1][1];
                let g11 = h[0][1] * h[0][1] + h[1][1] * h[1][1];
                if g01.abs() < 1e-300 && (g11 <= g00) {
                    continue;
                }
                // principal eigenvector of the 2x2 Gram matrix
                let tr = g00 + g11;
                let disc = ((g00 - g11) * (g00 - g11) + 4.0 * g01 * g01).sqrt();
                let lam = 0.5 * (tr + disc);
                // of the two eigenvector formulas, use the one free of cancellation
                let (mut x, mut y) = if g00 >= g11 { (lam - g11, g01) } else { (g01, lam - g00) };
                let norm = (x * x + y * y).sqrt();
                if norm == 0.0 {
                    continue;
                }
                x /= norm;
                y /= norm;
                if x < 0.0 {
                    x = -x;
                    y = -y;
                }
                let c = ((1.0 + x) / 2.0).sqrt();
                let s = y / (2.0 * c);
                if s.abs() < 1e-300 {
                    continue;
                }
                rotate(a, p, q, c, s);
                rotate(b, p, q, c, s);
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = c * vp + s * vq;
                    v[(r, q)] = -s * vp + c * vq;
                }
            }
        }
    }
    let off = (off_norm_sq(a) + off_norm_sq(b)).sqrt();
    if off >= JACOBI_TOL * 10.0 {
        return Err(NumericsError::NoConvergence(off));
    }
    if v.determinant() < 0.0 {
        for r in 0..n {
            v[(r, 0)] = -v[(r, 0)];
        }
    }
    Ok(v)
}

/// `M ← Rᵀ M R` for the plane rotation with `e'_p = c e_p + s e_q`, `e'_q = -s e_p + c e_q`.
fn rotate(m: &mut RMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = c * mp + s * mq;
        m[(k, q)] = -s * mp + c * mq;
    }
    for k in 0..n {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = c * mp + s * mq;
        m[(q, k)] = -s * mp + c * mq;
    }
}

/// Half-plane `normal · p >= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Search domain for [`solve_root_2d`]: an axis-aligned box intersected with half-planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain2 {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub constraints: Vec<HalfPlane>,
}

impl Domain2 {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi, constraints: Vec::new() }
    }

    pub fn with_constraint(mut self, normal: [f64; 2], offset: f64) -> Self {
        self.constraints.push(HalfPlane { normal, offset });
        self
    }

    pub fn contains(&self, p: [f64; 2], slack: f64) -> bool {
        (0..2).all(|k| p[k] >= self.lo[k] - slack && p[k] <= self.hi[k] + slack)
            && self
                .constraints
                .iter()
                .all(|h| h.normal[0] * p[0] + h.normal[1] * p[1] >= h.offset - slack)
    }

    /// Alternating projections onto the box and the half-planes.
    pub fn project(&self, mut p: [f64; 2]) -> [f64; 2] {
        for _ in 0..16 {
            for k in 0..2 {
                p[k] = p[k].clamp(self.lo[k], self.hi[k]);
            }
            let mut moved = false;
            for h in &self.constraints {
                let v = h.normal[0] * p[0] + h.normal[1] * p[1] - h.offset;
                if v < 0.0 {
                    let nn = h.normal[0] * h.normal[0] + h.normal[1] * h.normal[1];
                    p[0] -= v * h.normal[0] / nn;
                    p[1] -= v * h.normal[1] / nn;
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
        for k in 0..2 {
            p[k] = p[k].clamp(self.lo[k], self.hi[k]);
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct RootOptions {
    pub tol: f64,
    /// Points per axis of the deterministic start grid.
    pub grid: usize,
    /// Quasi-random restarts tried only when the grid finds nothing.
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Caller-chosen starts tried before the grid.
    pub extra_starts: Vec<[f64; 2]>,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: ROOT_TOL,
            grid: 8,
            restarts: 64,
            max_iter: 60,
            seed: 0x5eed,
            extra_starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolution {
    pub point: [f64; 2],
    pub residual: f64,
    pub starts: usize,
}

fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// Damped Newton from `start`, staying inside `domain`. Returns the final point and residual.
fn newton_2d<F>(f: &F, domain: &Domain2, start: [f64; 2], opts: &RootOptions) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let mut p = domain.project(start);
    let mut fp = f(p);
    let mut r = norm2(fp);
    let mut lambda = 1e-6;
    for _ in 0..opts.max_iter {
        if !r.is_finite() {
            break;
        }
        if r < opts.tol * 1e-3 {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let span = (domain.hi[k] - domain.lo[k]).abs().max(1.0);
            let h = 1e-7 * span.min(1.0 + p[k].abs());
            let mut pp = p;
            let mut pm = p;
            pp[k] += h;
            pm[k] -= h;
            let (fpp, fpm) = (f(pp), f(pm));
            for i in 0..2 {
                jac[i][k] = (fpp[i] - fpm[i]) / (2.0 * h);
            }
        }
        // Levenberg-Marquardt step: (JᵀJ + λ diag) d = -Jᵀ f
        let jtj = [
            [
                jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0],
                jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1],
            ],
            [
                jac[0][1] * jac[0][0] + jac[1][1] * jac[1][0],
                jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1],
            ],
        ];
        let jtf = [
            jac[0][0] * fp[0] + jac[1][0] * fp[1],
            jac[0][1] * fp[0] + jac[1][1] * fp[1],
        ];
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda) + 1e-300;
            let m11 = jtj[1][1] * (1.0 + lambda) + 1e-300;
            let m01 = jtj[0][1];
            let d = m00 * m11 - m01 * m01;
            if d.abs() < 1e-300 || !d.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step = [
                -(m11 * jtf[0] - m01 * jtf[1]) / d,
                -(m00 * jtf[1] - m01 * jtf[0]) / d,
            ];
            let cand = domain.project([p[0] + step[0], p[1] + step[1]]);
            let fc = f(cand);
            let rc = norm2(fc);
            if rc.is_finite() && rc < r {
                p = cand;
                fp = fc;
                r = rc;
                lambda = (lambda * 0.2).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 8.0;
            if lambda > 1e12 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    (p, r)
}

/// Radical inverse in base `b` (Halton sequence component).
fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Finds a root of `f` inside `domain`.
///
/// Every start (caller-supplied, then an evenly spaced `grid × grid` lattice)
/// is polished with damped Newton. Among converged points the one with the
/// smallest `preference` wins; a non-finite preference marks a point as
/// inadmissible. Only if the lattice yields nothing are
/// `restarts` Halton points tried. Converged points always lie in `domain`.
pub fn solve_root_2d<F, P>(
    f: F,
    domain: &Domain2,
    opts: &RootOptions,
    preference: P,
) -> Result<RootSolution, NumericsError>
where
    F: Fn([f64; 2]) -> [f64; 2],
    P: Fn([f64; 2]) -> f64,
{
    let mut best: Option<(f64, RootSolution)> = None;
    let mut best_residual = f64::INFINITY;
    let mut starts = 0usize;

    let consider = |p: [f64; 2], r: f64, starts: usize, best: &mut Option<(f64, RootSolution)>| {
        if r < opts.tol && domain.contains(p, 1e-12) {
            let pref = preference(p);
            if !pref.is_finite() {
                return;
            }
            let better = match best {
                None => true,
                Some((bp, _)) => pref < *bp - 1e-12,
            };
            if better {
                *best = Some((pref, RootSolution { point: p, residual: r, starts }));
            }
        }
    };

    let mut lattice = opts.extra_starts.clone();
    let g = opts.grid.max(1);
    for i in 0..g {
        for j in 0..g {
            let u = (i as f64 + 0.5) / g as f64;
            let v = (j as f64 + 0.5) / g as f64;
            lattice.push([
                domain.lo[0] + u * (domain.hi[0] - domain.lo[0]),
                domain.lo[1] + v * (domain.hi[1] - domain.lo[1]),
            ]);
        }
    }
    for s in lattice {
        starts += 1;
        let (p, r) = newton_2d(&f, domain, s, opts);
        best_residual = best_residual.min(r);
        consider(p, r, starts, &mut best);
    }
    if best.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let offset: u64 = rng.random_range(1..1_000_000);
        for k in 0..opts.restarts {
            starts += 1;
            let idx = offset + k as u64;
            let s = [
                domain.lo[0] + halton(idx, 2) * (domain.hi[0] - domain.lo[0]),
                domain.lo[1] + halton(idx, 3) * (domain.hi[1] - domain.lo[1]),
            ];
            let (p, r) = newton_2d(&f, domain, s, opts);
            best_residual = best_residual.min(r);
            consider(p, r, starts, &mut best);
            if best.is_some() {
                break;
            }
        }
    }
    match best {
        Some((_, sol)) => Ok(RootSolution { starts, ..sol }),
        None => Err(NumericsError::RootNotFound { best_residual, starts }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let m = CMatrix::from_fn(n, n, |_, _| {
            c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        (&m + m.adjoint()) * c64(0.5, 0.0)
    }

    /// Truncated Taylor series of exp(-iHt); independent of the eigen route.
    fn taylor_expm(h: &CMatrix, t: f64, terms: usize) -> CMatrix {
        let n = h.nrows();
        let a = h * c64(0.0, -t);
        let mut term = identity(n);
        let mut acc = identity(n);
        for k in 1..terms {
            term = &term * &a * c64(1.0 / k as f64, 0.0);
            acc += &term;
        }
        acc
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        let z = CMatrix::zeros(4, 4);
        let u = expm_hermitian(&z, 3.7).unwrap();
        assert!(max_abs(&(u - identity(4))) < 1e-14);
    }

    #[test]
    fn expm_pauli_z_quarter_turn() {
        let u = expm_hermitian(&pauli(3), std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - c64(0.0, 1.0)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn expm_matches_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let h = random_hermitian(4, &mut rng);
            let u = expm_hermitian(&h, 0.3).unwrap();
            let oracle = taylor_expm(&h, 0.3, 30);
            assert!(max_abs(&(u.clone() - oracle)) < 1e-10);
            assert!(unitarity_deviation(&u) < 1e-10);
        }
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut m = pauli(1);
        m[(0, 1)] = c64(2.0, 0.0);
        assert!(matches!(expm_hermitian(&m, 1.0), Err(NumericsError::NotHermitian(_))));
    }

    #[test]
    fn expm_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_hermitian(4, &mut rng);
            let t1: f64 = rng.random_range(-2.0..2.0);
            let t2: f64 = rng.random_range(-2.0..2.0);
            let lhs = expm_hermitian(&h, t1).unwrap() * expm_hermitian(&h, t2).unwrap();
            let rhs = expm_hermitian(&h, t1 + t2).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-9);
        }
    }

    fn reconstruct(o: &RMatrix, d: &[C64]) -> CMatrix {
        let n = o.nrows();
        let oc = CMatrix::from_fn(n, n, |i, j| c64(o[(i, j)], 0.0));
        let dm = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.to_vec()));
        &oc * dm * oc.transpose()
    }

    #[test]
    fn sym_eig_identity_and_diagonal() {
        let (o, d) = sym_unitary_eig(&identity(4)).unwrap();
        assert!(d.iter().all(|z| (z - c64(1.0, 0.0)).norm() < 1e-14));
        assert!((o.determinant() - 1.0).abs() < 1e-12);

        let diag = [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0)];
        let s = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.to_vec()));
        let (o, d) = sym_unitary_eig(&s).unwrap();
        assert!(max_abs(&(o.map(|v| c64(v, 0.0)) - identity(4))) < 1e-14);
        for k in 0..4 {
            assert!((d[k] - diag[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let mut s = identity(4);
        s[(0, 1)] = c64(0.1, 0.0);
        assert!(matches!(sym_unitary_eig(&s), Err(NumericsError::NotSymmetric(_))));
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> RMatrix {
        let m = RMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        m.qr().q()
    }

    #[test]
    fn sym_eig_reconstructs_random_and_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..1000 {
            let o = random_orthogonal(4, &mut rng);
            let mut phases: Vec<C64> =
                (0..4).map(|_| C64::from_polar(1.0, rng.random_range(-3.1..3.1))).collect();
            // every third trial has a doubly degenerate spectrum
            if trial % 3 == 0 {
                phases[1] = phases[0];
            }
            let s = reconstruct(&o.transpose(), &phases);
            let (o2, d2) = sym_unitary_eig(&s).unwrap();
            assert!(max_abs(&(reconstruct(&o2, &d2) - &s)) < 1e-9);
            assert!((o2.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn root_identity_map() {
        let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]);
        let sol = solve_root_2d(|p| p, &d, &RootOptions::default(), |_| 0.0).unwrap();
        assert!(norm2(sol.point) < 1e-10);
    }

    #[test]
    fn root_affine_map() {
        let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]);
        let sol =
            solve_root_2d(|p| [p[0] - 0.25, p[1] - 0.5], &d, &RootOptions::default(), |_| 0.0)
                .unwrap();
        assert!((sol.point[0] - 0.25).abs() < 1e-10);
        assert!((sol.point[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn root_prefers_smallest_functional() {
        // roots at x = ±0.5; prefer the one closest to 0.4
        let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]);
        let sol = solve_root_2d(
            |p| [p[0] * p[0] - 0.25, p[1]],
            &d,
            &RootOptions::default(),
            |p| (p[0] - 0.4).abs(),
        )
        .unwrap();
        assert!((sol.point[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn root_reports_failure() {
        let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]);
        let opts = RootOptions { restarts: 4, ..Default::default() };
        let err = solve_root_2d(|p| [p[0] * p[0] + 1.0, p[1]], &d, &opts, |_| 0.0).unwrap_err();
        assert!(matches!(err, NumericsError::RootNotFound { .. }));
    }

    #[test]
    fn root_respects_half_plane() {
        // root at (-0.5, 0) is excluded by x >= 0; (0.5, 0) must be found
        let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]).with_constraint([1.0, 0.0], 0.0);
        let sol = solve_root_2d(|p| [p[0] * p[0] - 0.25, p[1]], &d, &RootOptions::default(), |p| {
            p[0]
        })
        .unwrap();
        assert!(d.contains(sol.point, 0.0));
        assert!((sol.point[0] - 0.5).abs() < 1e-9);
    }

    proptest::proptest! {
        #[test]
        fn root_points_stay_in_domain(cx in -2.0f64..2.0, cy in -2.0f64..2.0, off in -0.5f64..0.5) {
            let d = Domain2::new([-1.0, -1.0], [1.0, 1.0]).with_constraint([1.0, 1.0], off);
            let opts = RootOptions { restarts: 8, ..Default::default() };
            if let Ok(sol) = solve_root_2d(|p| [p[0] - cx, p[1] - cy], &d, &opts, |_| 0.0) {
                proptest::prop_assert!(d.contains(sol.point, 1e-12));
            }
        }
    }
}
