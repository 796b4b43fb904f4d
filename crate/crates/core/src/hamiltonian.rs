//! Two-qubit coupling Hamiltonians and their canonical normal form.

use crate::numerics::{c64, hermiticity_deviation, kron, max_abs, pauli, pauli2, CMatrix, C64};
use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("coupling matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("coupling matrix must be 4x4, got {0}x{1}")]
    BadShape(usize, usize),
    #[error("no entangling coupling: the two-body block vanishes")]
    NoEntanglingCoupling,
    #[error("unknown Pauli label {0:?}")]
    BadLabel(String),
    #[error("unknown preset {0:?} (expected xy or xx)")]
    UnknownPreset(String),
    #[error("coupling file must contain exactly one of \"pauli\" or \"matrix\"")]
    BadFile,
    #[error("reading coupling file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing coupling file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A Hermitian 4×4 coupling, in units of the coupling scale `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingHamiltonian {
    matrix: CMatrix,
}

/// `table[i][j]` is the coefficient of `σ_i ⊗ σ_j` with 0..4 = I, X, Y, Z.
pub type PauliTable = [[f64; 4]; 4];

const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl CouplingHamiltonian {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, HamiltonianError> {
        if matrix.nrows() != 4 || matrix.ncols() != 4 {
            return Err(HamiltonianError::BadShape(matrix.nrows(), matrix.ncols()));
        }
        let dev = hermiticity_deviation(&matrix);
        if dev > 1e-12 * max_abs(&matrix).max(1.0) {
            return Err(HamiltonianError::NotHermitian(dev));
        }
        Ok(Self { matrix })
    }

    pub fn from_pauli(table: &PauliTable) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m += pauli2(i, j) * c64(v, 0.0);
                }
            }
        }
        Self { matrix: m }
    }

    /// Builds from labels such as `"XX"` or `"ZI"`.
    pub fn from_labels<'a, I>(terms: I) -> Result<Self, HamiltonianError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut table = [[0.0; 4]; 4];
        for (label, v) in terms {
            let idx: Vec<usize> = label
                .trim()
                .to_ascii_uppercase()
                .chars()
                .map(|ch| LABELS.iter().position(|&l| l == ch))
                .collect::<Option<_>>()
                .ok_or_else(|| HamiltonianError::BadLabel(label.to_string()))?;
            if idx.len() != 2 {
                return Err(HamiltonianError::BadLabel(label.to_string()));
            }
            table[idx[0]][idx[1]] += v;
        }
        Ok(Self::from_pauli(&table))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { matrix: &self.matrix * c64(k, 0.0) }
    }

    /// Conjugation by a 4×4 unitary.
    pub fn conjugated(&self, u: &CMatrix) -> Self {
        Self { matrix: u * &self.matrix * u.adjoint() }
    }
}

/// Named couplings: `xy` is `(g/2)(XX + YY)`, `xx` is `g·XX`.
pub fn preset(name: &str, g: f64) -> Result<CouplingHamiltonian, HamiltonianError> {
    match name.to_ascii_lowercase().as_str() {
        "xy" => CouplingHamiltonian::from_labels([("XX", g / 2.0), ("YY", g / 2.0)]),
        "xx" => CouplingHamiltonian::from_labels([("XX", g)]),
        other => Err(HamiltonianError::UnknownPreset(other.to_string())),
    }
}

/// `c_ij = Tr(H σ_i⊗σ_j) / 4`.
pub fn pauli_decompose(h: &CouplingHamiltonian) -> PauliTable {
    let mut t = [[0.0; 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (pauli2(i, j) * &h.matrix).trace().re / 4.0;
        }
    }
    t
}

/// `H = (u1⊗u2)(a XX + b YY + c ZZ)(u1⊗u2)† + h1_res⊗I + I⊗h2_res` (identity part dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub u1: CMatrix,
    pub u2: CMatrix,
    pub h1_res: CMatrix,
    pub h2_res: CMatrix,
}

impl NormalForm {
    /// A coupling already in canonical form, with no frame or residuals.
    pub fn canonical(a: f64, b: f64, c: f64) -> Self {
        let z = CMatrix::zeros(2, 2);
        Self { a, b, c, u1: CMatrix::identity(2, 2), u2: CMatrix::identity(2, 2), h1_res: z.clone(), h2_res: z }
    }

    pub fn coefficients(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    /// Coupling strength `a + b + |c|`.
    pub fn strength(&self) -> f64 {
        self.a + self.b + self.c.abs()
    }

    pub fn canonical_matrix(&self) -> CMatrix {
        pauli2(1, 1) * c64(self.a, 0.0) + pauli2(2, 2) * c64(self.b, 0.0) + pauli2(3, 3) * c64(self.c, 0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let frame = kron(&self.u1, &self.u2);
        let id = CMatrix::identity(2, 2);
        &frame * self.canonical_matrix() * frame.adjoint()
            + kron(&self.h1_res, &id)
            + kron(&id, &self.h2_res)
    }
}

/// The SU(2) element whose adjoint action on Pauli vectors is the rotation `r`,
/// lifted with nonnegative trace.
pub fn su2_from_so3(r: &Matrix3<f64>) -> CMatrix {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r));
    let mut q = q.into_inner();
    if q.w < 0.0 {
        q = -q;
    }
    let mi = c64(0.0, -1.0);
    CMatrix::identity(2, 2) * c64(q.w, 0.0)
        + (pauli(1) * c64(q.i, 0.0) + pauli(2) * c64(q.j, 0.0) + pauli(3) * c64(q.k, 0.0)) * mi
}

pub fn normal_form(h: &CouplingHamiltonian) -> Result<NormalForm, HamiltonianError> {
    let t = pauli_decompose(h);
    let m = Matrix3::from_fn(|j, k| t[j + 1][k + 1]);
    let scale = t.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    if m.amax() <= 1e-12 * scale.max(1.0) {
        return Err(HamiltonianError::NoEntanglingCoupling);
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v");
    let v = vt.transpose();
    let sv = svd.singular_values;

    // sort descending; ties keep the original column order
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap().then(i.cmp(&j)));
    let mut r1 = Matrix3::from_fn(|i, k| u[(i, order[k])]);
    let mut r2 = Matrix3::from_fn(|i, k| v[(i, order[k])]);
    let mut d = [sv[order[0]], sv[order[1]], sv[order[2]]];
    if r1.determinant() < 0.0 {
        r1.column_mut(2).neg_mut();
        d[2] = -d[2];
    }
    if r2.determinant() < 0.0 {
        r2.column_mut(2).neg_mut();
        d[2] = -d[2];
    }
    let u1 = su2_from_so3(&r1);
    let u2 = su2_from_so3(&r2);
    let local = |coeffs: [f64; 3]| -> CMatrix {
        (1..4).fold(CMatrix::zeros(2, 2), |acc, k| acc + pauli(k) * c64(coeffs[k - 1], 0.0))
    };
    let h1 = local([t[1][0], t[2][0], t[3][0]]);
    let h2 = local([t[0][1], t[0][2], t[0][3]]);
    Ok(NormalForm { a: d[0], b: d[1], c: d[2], u1, u2, h1_res: h1, h2_res: h2 })
}

/// Coupling file: `{"g": 1.0, "pauli": {"XX": 0.5, ...}}` or
/// `{"g": 1.0, "matrix": [[[re, im], ...], ...]}`; entries are multiplied by `g`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingFile {
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn default_g() -> f64 {
    1.0
}

impl CouplingFile {
    pub fn to_hamiltonian(&self) -> Result<CouplingHamiltonian, HamiltonianError> {
        match (&self.pauli, &self.matrix) {
            (Some(p), None) => {
                CouplingHamiltonian::from_labels(p.iter().map(|(k, v)| (k.as_str(), v * self.g)))
            }
            (None, Some(rows)) => {
                if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                    return Err(HamiltonianError::BadShape(
                        rows.len(),
                        rows.first().map_or(0, |r| r.len()),
                    ));
                }
                let m = CMatrix::from_fn(4, 4, |i, j| C64::new(rows[i][j][0], rows[i][j][1]) * self.g);
                CouplingHamiltonian::from_matrix(m)
            }
            _ => Err(HamiltonianError::BadFile),
        }
    }
}

pub fn load_coupling_file(path: &Path) -> Result<CouplingHamiltonian, HamiltonianError> {
    let text = std::fs::read_to_string(path)?;
    let file: CouplingFile = serde_json::from_str(&text)?;
    file.to_hamiltonian()
}
