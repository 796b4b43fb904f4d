//! Allocation-free cost and gradient for three-qubit ansatz circuits.

use reqisc_core::numerics::{c64, C64};

type M2 = [[C64; 2]; 2];
type M4 = [[C64; 4]; 4];
pub(crate) type M8 = [[C64; 8]; 8];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const YY_SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
const ZZ_SIGN: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

pub(crate) fn u3(t: f64, p: f64, l: f64) -> M2 {
    let (s, c) = (t / 2.0).sin_cos();
    [
        [c64(c, 0.0), -C64::from_polar(s, l)],
        [C64::from_polar(s, p), C64::from_polar(c, p + l)],
    ]
}

fn u3_derivatives(t: f64, p: f64, l: f64) -> [M2; 3] {
    let (s, c) = (t / 2.0).sin_cos();
    let e = |a: f64, r: f64| C64::from_polar(r, a);
    let i = c64(0.0, 1.0);
    [
        [[c64(-s / 2.0, 0.0), -e(l, c / 2.0)], [e(p, c / 2.0), -e(p + l, s / 2.0)]],
        [[ZERO, ZERO], [i * e(p, s), i * e(p + l, c)]],
        [[ZERO, -i * e(l, s)], [ZERO, i * e(p + l, c)]],
    ]
}

/// `exp(-i(x XX + y YY + z ZZ))` acts on span{00,11} and span{01,10} separately.
pub(crate) fn can(x: f64, y: f64, z: f64) -> M4 {
    let (s1, c1) = (x - y).sin_cos();
    let (s2, c2) = (x + y).sin_cos();
    let a = C64::from_polar(1.0, -z);
    let b = C64::from_polar(1.0, z);
    let mi = c64(0.0, -1.0);
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = a * c1;
    m[3][3] = a * c1;
    m[0][3] = a * mi * s1;
    m[3][0] = a * mi * s1;
    m[1][1] = b * c2;
    m[2][2] = b * c2;
    m[1][2] = b * mi * s2;
    m[2][1] = b * mi * s2;
    m
}

fn mul4(a: &M4, b: &M4) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn kron2(a: &M2, b: &M2) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Where a one- or two-qubit gate sits inside the 8-dimensional space.
#[derive(Clone, Copy)]
struct Layout {
    dim: usize,
    offs: [usize; 4],
    bases: [usize; 4],
    n_bases: usize,
}

fn layout(qubits: &[usize]) -> Layout {
    let bits: Vec<usize> = qubits.iter().map(|&q| 2 - q).collect();
    let mut offs = [0usize; 4];
    let dim = 1 << qubits.len();
    for (l, o) in offs.iter_mut().enumerate().take(dim) {
        for (j, &b) in bits.iter().enumerate() {
            if l >> (qubits.len() - 1 - j) & 1 == 1 {
                *o |= 1 << b;
            }
        }
    }
    let mask: usize = bits.iter().map(|b| 1 << b).sum();
    let mut bases = [0usize; 4];
    let mut n_bases = 0;
    for i in 0..8 {
        if i & mask == 0 {
            bases[n_bases] = i;
            n_bases += 1;
        }
    }
    Layout { dim, offs, bases, n_bases }
}

fn apply(m: &mut M8, g: &M4, lay: &Layout, adjoint: bool) {
    let d = lay.dim;
    for col in 0..8 {
        for &base in &lay.bases[..lay.n_bases] {
            let mut v = [ZERO; 4];
            for l in 0..d {
                v[l] = m[base | lay.offs[l]][col];
            }
            for r in 0..d {
                let mut acc = ZERO;
                for l in 0..d {
                    let gij = if adjoint { g[l][r].conj() } else { g[r][l] };
                    acc += gij * v[l];
                }
                m[base | lay.offs[r]][col] = acc;
            }
        }
    }
}

/// `env[c][r] = Σ_k Σ_l P[(c,k)][l] conj(R[(r,k)][l])`.
fn env(p: &M8, r: &M8, lay: &Layout) -> M4 {
    let mut e = [[ZERO; 4]; 4];
    for &base in &lay.bases[..lay.n_bases] {
        for c in 0..lay.dim {
            let pr = &p[base | lay.offs[c]];
            for rr in 0..lay.dim {
                let rrow = &r[base | lay.offs[rr]];
                let mut acc = ZERO;
                for l in 0..8 {
                    acc += pr[l] * rrow[l].conj();
                }
                e[c][rr] += acc;
            }
        }
    }
    e
}

fn pad2(m: &M2) -> M4 {
    let mut out = [[ZERO; 4]; 4];
    out[0][0] = m[0][0];
    out[0][1] = m[0][1];
    out[1][0] = m[1][0];
    out[1][1] = m[1][1];
    out
}

fn trace_prod2(a: &M2, e: &M4) -> C64 {
    a[0][0] * e[0][0] + a[0][1] * e[1][0] + a[1][0] * e[0][1] + a[1][1] * e[1][1]
}

enum Op {
    One { lay: Layout, u: M2 },
    Two { lay: Layout, can: M4, ua: M2, ub: M2, m: M4 },
}

/// Ops of the three-qubit ansatz with parameter layout
/// `[U3 q0, U3 q1, U3 q2, (x, y, z, U3 a, U3 b) per placement]`.
fn build(placements: &[(usize, usize)], x: &[f64]) -> Vec<Op> {
    let mut ops = Vec::with_capacity(3 + placements.len());
    for q in 0..3 {
        ops.push(Op::One { lay: layout(&[q]), u: u3(x[3 * q], x[3 * q + 1], x[3 * q + 2]) });
    }
    for (b, &(p, q)) in placements.iter().enumerate() {
        let o = 9 + 9 * b;
        let can = can(x[o], x[o + 1], x[o + 2]);
        let ua = u3(x[o + 3], x[o + 4], x[o + 5]);
        let ub = u3(x[o + 6], x[o + 7], x[o + 8]);
        let m = mul4(&kron2(&ua, &ub), &can);
        ops.push(Op::Two { lay: layout(&[p, q]), can, ua, ub, m });
    }
    ops
}

fn identity8() -> M8 {
    let mut m = [[ZERO; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c64(1.0, 0.0);
    }
    m
}

pub(crate) fn to_m8(u: &reqisc_core::CMatrix) -> M8 {
    let mut m = [[ZERO; 8]; 8];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = u[(i, j)];
        }
    }
    m
}

fn overlap(target: &M8, v: &M8) -> C64 {
    // Tr(U† V)
    let mut t = ZERO;
    for i in 0..8 {
        for l in 0..8 {
            t += target[l][i].conj() * v[l][i];
        }
    }
    t
}

/// `1 - |Tr(U†V)|²/64` for the ansatz unitary `V`, filling in the gradient.
pub(crate) fn cost_grad(placements: &[(usize, usize)], target: &M8, x: &[f64], grad: &mut [f64]) -> f64 {
    let ops = build(placements, x);
    let mut prefixes: Vec<M8> = Vec::with_capacity(ops.len() + 1);
    let mut p = identity8();
    prefixes.push(p);
    for op in &ops {
        match op {
            Op::One { lay, u } => apply(&mut p, &pad2(u), lay, false),
            Op::Two { lay, m, .. } => apply(&mut p, m, lay, false),
        }
        prefixes.push(p);
    }
    let tr = overlap(target, &p);
    let scale = -2.0 / 64.0;
    let g = |dt: C64| scale * (tr.conj() * dt).re;
    let mut r = *target;
    for (j, op) in ops.iter().enumerate().rev() {
        match op {
            Op::One { lay, u } => {
                let e = env(&prefixes[j], &r, lay);
                let th = &x[3 * j..3 * j + 3];
                for (k, du) in u3_derivatives(th[0], th[1], th[2]).iter().enumerate() {
                    grad[3 * j + k] = g(trace_prod2(du, &e));
                }
                apply(&mut r, &pad2(u), lay, true);
            }
            Op::Two { lay, can, ua, ub, m } => {
                let o = 9 + 9 * (j - 3);
                let e = env(&prefixes[j], &r, lay);
                let y = mul4(can, &e);
                let w = mul4(&y, &kron2(ua, ub));
                let (mut txx, mut tyy, mut tzz) = (ZERO, ZERO, ZERO);
                for i in 0..4 {
                    txx += w[i ^ 3][i];
                    tyy += w[i ^ 3][i] * YY_SIGN[i];
                    tzz += w[i][i] * ZZ_SIGN[i];
                }
                let mi = c64(0.0, -1.0);
                grad[o] = g(mi * txx);
                grad[o + 1] = g(mi * tyy);
                grad[o + 2] = g(mi * tzz);
                let mut ya = [[ZERO; 2]; 2];
                let mut yb = [[ZERO; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            for d in 0..2 {
                                let v = y[2 * c + d][2 * a + b];
                                ya[c][a] += ub[b][d] * v;
                                yb[d][b] += ua[a][c] * v;
                            }
                        }
                    }
                }
                let mut ea = [[ZERO; 4]; 4];
                let mut eb = [[ZERO; 4]; 4];
                for i in 0..2 {
                    for k in 0..2 {
                        ea[i][k] = ya[i][k];
                        eb[i][k] = yb[i][k];
                    }
                }
                let da = u3_derivatives(x[o + 3], x[o + 4], x[o + 5]);
                let db = u3_derivatives(x[o + 6], x[o + 7], x[o + 8]);
                for k in 0..3 {
                    grad[o + 3 + k] = g(trace_prod2(&da[k], &ea));
                    grad[o + 6 + k] = g(trace_prod2(&db[k], &eb));
                }
                apply(&mut r, m, lay, true);
            }
        }
    }
    1.0 - tr.norm_sqr() / 64.0
}
