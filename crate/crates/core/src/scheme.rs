//! Time-optimal pulse synthesis for arbitrary two-qubit gates.
//!
//! Given a target gate and a coupling Hamiltonian, find the shortest
//! evolution `e^{-iτ(H + H1⊗I + I⊗H2)}` with constant local drives that is
//! locally equivalent to the target, then the single-qubit corrections that
//! make it exact.

use crate::hamiltonian::{normal_form, CouplingHamiltonian, HamiltonianError, NormalForm};
use crate::numerics::{
    c64, expm_hermitian, kron, pauli, solve_root_2d, CMatrix, Domain2, NumericsError, RootOptions,
    C64,
};
use crate::weyl::{canonical_decompose, canonical_decompose_towards, WeylCoordinate};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

/// Relative tolerance for deciding which gate-time branch is binding.
pub const BRANCH_TOL: f64 = 1e-12;
/// Allowed coordinate mismatch between the drive evolution and the target.
pub const CONSISTENCY_TOL: f64 = 1e-6;
/// Highest sinc branch examined before giving up.
pub const SINC_MAX_BRANCH: usize = 64;
/// Smallest `γ = 1/(1+β)` searched by the EA solver.
const GAMMA_MIN: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("EA root search exhausted (best residual {best_residual:.3e})")]
    RootSearchExhausted { best_residual: f64 },
    #[error("internal inconsistency: evolution reaches {got:?}, target {want:?}")]
    Inconsistent { got: WeylCoordinate, want: WeylCoordinate },
    #[error("drive amplitude {amplitude:.4} exceeds cap {cap:.4}")]
    AmplitudeExceeded { amplitude: f64, cap: f64, solution: Box<PulseSolution> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subscheme {
    #[serde(rename = "ND")]
    Nd,
    #[serde(rename = "EA_plus")]
    EaPlus,
    #[serde(rename = "EA_minus")]
    EaMinus,
}

impl Subscheme {
    pub fn name(&self) -> &'static str {
        match self {
            Subscheme::Nd => "ND",
            Subscheme::EaPlus => "EA_plus",
            Subscheme::EaMinus => "EA_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchTimes {
    pub tau0: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
}

impl BranchTimes {
    fn for_point(x: f64, y: f64, z: f64, a: f64, b: f64, c: f64) -> Self {
        Self {
            tau0: x / a,
            tau_plus: branch_ratio(x + y - z, a + b - c),
            tau_minus: branch_ratio(x + y + z, a + b + c),
        }
    }

    pub fn max(&self) -> f64 {
        self.tau0.max(self.tau_plus).max(self.tau_minus)
    }

    /// Binding branch, ties resolved in the order ND, EA+, EA-.
    pub fn binding(&self) -> Subscheme {
        let m = self.max();
        let tol = BRANCH_TOL * m.max(1.0);
        if self.tau0 >= m - tol {
            Subscheme::Nd
        } else if self.tau_plus >= m - tol {
            Subscheme::EaPlus
        } else {
            Subscheme::EaMinus
        }
    }
}

/// `num / den` where a vanishing denominator means the constraint never binds.
fn branch_ratio(num: f64, den: f64) -> f64 {
    if den > 1e-300 {
        num / den
    } else if num > 1e-15 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalTime {
    pub tau: f64,
    pub reflected: bool,
    pub branch_times: BranchTimes,
    /// The point actually targeted: `c`, or `(π/2 - x, y, -z)` when reflected.
    pub target: [f64; 3],
}

/// Minimal evolution time for the class `c` under canonical coefficients `(a, b, c)`.
pub fn optimal_time(c: &WeylCoordinate, coeffs: (f64, f64, f64)) -> OptimalTime {
    let (a, b, cc) = coeffs;
    let (x, y, z) = (c.x, c.y, c.z);
    let direct = BranchTimes::for_point(x, y, z, a, b, cc);
    let refl = BranchTimes::for_point(FRAC_PI_2 - x, y, -z, a, b, cc);
    let (t1, t2) = (direct.max(), refl.max());
    if t2 < t1 {
        OptimalTime { tau: t2, reflected: true, branch_times: refl, target: [FRAC_PI_2 - x, y, -z] }
    } else {
        OptimalTime { tau: t1, reflected: false, branch_times: direct, target: [x, y, z] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NdRecord {
    pub s1: f64,
    pub s2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EaRecord {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub t_scaled: f64,
    pub shifted_coord: [f64; 3],
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostics {
    Nd(NdRecord),
    Ea(EaRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drives {
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
}

impl Drives {
    pub const ZERO: Self = Self { omega1: 0.0, omega2: 0.0, delta: 0.0 };

    /// Physical amplitudes `(A1, A2) = (-2(Ω1 + Ω2), -2(Ω1 - Ω2))`.
    pub fn amplitudes(&self) -> (f64, f64) {
        (-2.0 * (self.omega1 + self.omega2), -2.0 * (self.omega1 - self.omega2))
    }

    /// Drive Hamiltonians `((Ω1+Ω2)X + δZ, (Ω1-Ω2)X + δZ)` in the canonical frame.
    pub fn local_hamiltonians(&self) -> (CMatrix, CMatrix) {
        let x = pauli(1);
        let z = pauli(3);
        let dz = &z * c64(self.delta, 0.0);
        (
            &x * c64(self.omega1 + self.omega2, 0.0) + &dz,
            &x * c64(self.omega1 - self.omega2, 0.0) + dz,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSolution {
    pub subscheme: Subscheme,
    pub tau: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub delta: f64,
    pub a1_amp: f64,
    pub a2_amp: f64,
    pub corr_a1: CMatrix,
    pub corr_a2: CMatrix,
    pub corr_b1: CMatrix,
    pub corr_b2: CMatrix,
    /// Lab-frame local Hamiltonians applied during the pulse.
    pub h1: CMatrix,
    pub h2: CMatrix,
    pub reflected: bool,
    pub diagnostics: Diagnostics,
}

impl PulseSolution {
    pub fn drives(&self) -> Drives {
        Drives { omega1: self.omega1, omega2: self.omega2, delta: self.delta }
    }

    pub fn max_amplitude(&self) -> f64 {
        self.a1_amp.abs().max(self.a2_amp.abs()).max(self.delta.abs())
    }

    /// `(A1⊗A2) e^{-iτ(H + H1⊗I + I⊗H2)} (B1⊗B2)`.
    pub fn realized_gate(&self, nf: &NormalForm) -> Result<CMatrix, NumericsError> {
        let id = CMatrix::identity(2, 2);
        let gen = nf.reconstruct() + kron(&self.h1, &id) + kron(&id, &self.h2);
        let ev = expm_hermitian(&gen, self.tau)?;
        Ok(kron(&self.corr_a1, &self.corr_a2) * ev * kron(&self.corr_b1, &self.corr_b2))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PulseOptions {
    pub amp_max: Option<f64>,
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Smallest `u >= u0` with `sin(u)/u = v`, scanning sinc branches upward.
pub fn sinc_inverse_smallest(v: f64, u0: f64) -> Option<f64> {
    let g = |u: f64| sinc(u) - v;
    let g0 = g(u0);
    if g0.abs() <= 1e-13 {
        return Some(u0);
    }
    let step = PI / 32.0;
    let limit = u0 + SINC_MAX_BRANCH as f64 * PI;
    let mut lo = u0;
    let mut glo = g0;
    while lo < limit {
        let hi = lo + step;
        let ghi = g(hi);
        if ghi == 0.0 {
            return Some(hi);
        }
        if (glo > 0.0) != (ghi > 0.0) {
            let (mut a, mut b, mut ga) = (lo, hi, glo);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if (gm > 0.0) == (ga > 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
                if b - a <= 1e-16 * b.max(1.0) {
                    break;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
        glo = ghi;
    }
    None
}

/// Drive amplitudes for the no-detuning subscheme.
pub fn solve_nd(
    target: [f64; 3],
    coeffs: (f64, f64, f64),
    tau: f64,
) -> Result<(Drives, NdRecord), SchemeError> {
    let (_, b, c) = coeffs;
    let [_, y, z] = target;
    let mut s = [0.0; 2];
    let mut om = [0.0; 2];
    for (k, (coef, angle)) in [(b - c, y - z), (b + c, y + z)].into_iter().enumerate() {
        if coef <= 1e-14 || tau <= 1e-15 {
            // degenerate coupling or identity target: the drive stays off
            s[k] = coef.max(0.0);
            continue;
        }
        let v = angle.sin() / (coef * tau);
        let u = sinc_inverse_smallest(v, coef * tau).ok_or_else(|| {
            SchemeError::Infeasible(format!("sinc target {v:.6} has no admissible branch"))
        })?;
        s[k] = u / tau;
        om[k] = 0.5 * (s[k] * s[k] - coef * coef).max(0.0).sqrt();
    }
    Ok((Drives { omega1: om[0], omega2: om[1], delta: 0.0 }, NdRecord { s1: s[0], s2: s[1] }))
}

/// Left side of the EA trace equation.
pub fn ea_lhs(alpha: f64, beta: f64, eta: f64, t: f64) -> C64 {
    let (al, be) = (alpha, beta);
    let w1 = ((1.0 - al) * (1.0 + al + be) - (1.0 - al + be) * eta)
        / ((1.0 - al + be) * (1.0 - eta + al + 2.0 * be));
    let w2 = (be * (1.0 + al + be) - (1.0 - al + be) * eta) / ((1.0 - al + be) * (2.0 * al + be - eta));
    let w3 = ((1.0 + al - eta) * eta - be * (1.0 - al - eta))
        / ((2.0 * al + be - eta) * (1.0 + al + 2.0 * be - eta));
    C64::from_polar(w1, -(2.0 + 2.0 * be - eta) * t)
        + C64::from_polar(w2, (eta - 2.0 * al) * t)
        + C64::from_polar(w3, (2.0 * al + 2.0 * be - eta) * t)
}

/// Right side of the EA trace equation.
pub fn ea_rhs(x: f64, y: f64, z: f64) -> C64 {
    C64::from_polar(1.0, x - y - z) - C64::from_polar(1.0, y - x - z) + C64::from_polar(1.0, z - x - y)
}

fn ea_amplitudes(alpha: f64, beta: f64, eta: f64, scale: f64) -> (f64, f64) {
    let om = scale * ((1.0 - alpha) * beta * (1.0 - eta + alpha + beta)).max(0.0).sqrt();
    let de = scale * (alpha * (1.0 + beta) * (alpha + beta - eta)).max(0.0).sqrt();
    (om, de)
}

/// Drive amplitudes for the equal-amplitude subschemes.
pub fn solve_ea(
    target: [f64; 3],
    coeffs: (f64, f64, f64),
    tau: f64,
    sign: Subscheme,
) -> Result<(Drives, EaRecord), SchemeError> {
    let (a, b, c) = coeffs;
    let [x, y, z] = target;
    let (shifted, scale) = match sign {
        Subscheme::EaPlus => ([x + c * tau, y + c * tau, c * tau - z], a + c),
        Subscheme::EaMinus => ([x - c * tau, y - c * tau, z - c * tau], a - c),
        Subscheme::Nd => return Err(SchemeError::Precondition("solve_ea called for ND".into())),
    };
    if scale <= 1e-12 {
        // the branch collapses to a single point reached without drives
        let rec = EaRecord { alpha: 0.0, beta: 0.0, eta: 0.0, t_scaled: 0.0, shifted_coord: shifted, residual: 0.0 };
        return Ok((Drives::ZERO, rec));
    }
    let eta = ((a - b) / scale).clamp(0.0, 1.0);
    let t = scale * tau;
    let rhs = ea_rhs(shifted[0], shifted[1], shifted[2]);
    let to_beta = |g: f64| 1.0 / g - 1.0;
    let f = |p: [f64; 2]| {
        let v = ea_lhs(p[0], to_beta(p[1]), eta, t) - rhs;
        if v.re.is_finite() && v.im.is_finite() {
            [v.re, v.im]
        } else {
            [1e3, 1e3]
        }
    };
    let pref = |p: [f64; 2]| {
        let beta = to_beta(p[1]);
        if p[0] + beta < eta - 1e-12 {
            return f64::INFINITY;
        }
        let (om, de) = ea_amplitudes(p[0], beta, eta, scale);
        om * om + de * de
    };
    let domain = Domain2::new([0.0, GAMMA_MIN], [1.0, 1.0]);
    let mut opts = RootOptions::default();
    // extra starts close to the large-β edge, where the lattice is sparse
    for &g in &[1e-4, 1e-3, 1e-2, 3e-2] {
        for &al in &[0.1, 0.5, 0.9] {
            opts.extra_starts.push([al, g]);
        }
    }
    let sol = solve_root_2d(f, &domain, &opts, pref).map_err(|e| match e {
        NumericsError::RootNotFound { best_residual, .. } => {
            SchemeError::RootSearchExhausted { best_residual }
        }
        other => SchemeError::Numerics(other),
    })?;
    let alpha = sol.point[0];
    let beta = to_beta(sol.point[1]);
    let (om, de) = ea_amplitudes(alpha, beta, eta, scale);
    let drives = match sign {
        Subscheme::EaPlus => Drives { omega1: 0.0, omega2: om, delta: -de },
        _ => Drives { omega1: om, omega2: 0.0, delta: de },
    };
    let rec = EaRecord { alpha, beta, eta, t_scaled: t, shifted_coord: shifted, residual: sol.residual };
    Ok((drives, rec))
}

/// Single-qubit corrections `(A1, A2, B1, B2)` and lab-frame drive Hamiltonians
/// `(H1, H2)` that turn the drive evolution into exactly `u`.
#[allow(clippy::type_complexity)]
pub fn local_corrections(
    u: &CMatrix,
    nf: &NormalForm,
    drives: &Drives,
    tau: f64,
) -> Result<([CMatrix; 4], CMatrix, CMatrix), SchemeError> {
    let target = canonical_decompose(u)?;
    let (h1pp, h2pp) = drives.local_hamiltonians();
    let id = CMatrix::identity(2, 2);
    let gen = nf.canonical_matrix() + kron(&h1pp, &id) + kron(&id, &h2pp);
    let ev = expm_hermitian(&gen, tau)?;
    // on the x = π/4 face both representatives are valid; use the one matching the target
    let reached = canonical_decompose_towards(&ev, &target.coordinate)?;
    if reached.coordinate.max_diff(&target.coordinate) > CONSISTENCY_TOL {
        return Err(SchemeError::Inconsistent { got: reached.coordinate, want: target.coordinate });
    }
    let h1 = &nf.u1 * h1pp * nf.u1.adjoint() - &nf.h1_res;
    let h2 = &nf.u2 * h2pp * nf.u2.adjoint() - &nf.h2_res;
    let a1 = &target.v1 * reached.v1.adjoint() * nf.u1.adjoint();
    let a2 = &target.v2 * reached.v2.adjoint() * nf.u2.adjoint();
    let b1 = &nf.u1 * reached.v3.adjoint() * &target.v3;
    let b2 = &nf.u2 * reached.v4.adjoint() * &target.v4;
    Ok(([a1, a2, b1, b2], h1, h2))
}

/// Solves for the full pulse realizing `u` under the coupling `nf`.
pub fn synthesize_pulse(
    u: &CMatrix,
    nf: &NormalForm,
    opts: &PulseOptions,
) -> Result<PulseSolution, SchemeError> {
    let dec = canonical_decompose(u)?;
    let coeffs = nf.coefficients();
    if !(coeffs.0 > 0.0) {
        return Err(SchemeError::Precondition("coupling has a = 0".into()));
    }
    let ot = optimal_time(&dec.coordinate, coeffs);
    let subscheme = ot.branch_times.binding();
    let (drives, diagnostics) = match subscheme {
        Subscheme::Nd => {
            let (d, r) = solve_nd(ot.target, coeffs, ot.tau)?;
            (d, Diagnostics::Nd(r))
        }
        s => {
            let (d, r) = solve_ea(ot.target, coeffs, ot.tau, s)?;
            (d, Diagnostics::Ea(r))
        }
    };
    let (corr, h1, h2) = local_corrections(u, nf, &drives, ot.tau)?;
    let [a1, a2, b1, b2] = corr;
    let (amp1, amp2) = drives.amplitudes();
    let sol = PulseSolution {
        subscheme,
        tau: ot.tau,
        omega1: drives.omega1,
        omega2: drives.omega2,
        delta: drives.delta,
        a1_amp: amp1,
        a2_amp: amp2,
        corr_a1: a1,
        corr_a2: a2,
        corr_b1: b1,
        corr_b2: b2,
        h1,
        h2,
        reflected: ot.reflected,
        diagnostics,
    };
    if let Some(cap) = opts.amp_max {
        let amplitude = sol.max_amplitude();
        if amplitude > cap {
            return Err(SchemeError::AmplitudeExceeded { amplitude, cap, solution: Box::new(sol) });
        }
    }
    Ok(sol)
}

/// Convenience wrapper taking the raw coupling.
pub fn synthesize_pulse_for(
    u: &CMatrix,
    h: &CouplingHamiltonian,
    opts: &PulseOptions,
) -> Result<PulseSolution, SchemeError> {
    synthesize_pulse(u, &normal_form(h)?, opts)
}

/// `1 - |Tr(U†V)| / N`.
pub fn infidelity(u: &CMatrix, v: &CMatrix) -> f64 {
    let n = u.nrows() as f64;
    let ov: C64 = (u.adjoint() * v).trace();
    (1.0 - ov.norm() / n).max(0.0)
}

/// Infidelity between `u` and the gate the solution realizes.
pub fn verify_solution(sol: &PulseSolution, u: &CMatrix, nf: &NormalForm) -> Result<f64, SchemeError> {
    Ok(infidelity(u, &sol.realized_gate(nf)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateFamily {
    Cnot,
    B,
    Swap,
    Iswap,
}

impl GateFamily {
    pub fn coordinate(&self, s: f64) -> WeylCoordinate {
        let q = s * FRAC_PI_4;
        match self {
            GateFamily::Cnot => WeylCoordinate::new(q, 0.0, 0.0),
            GateFamily::B => WeylCoordinate::new(q, q / 2.0, 0.0),
            GateFamily::Swap => WeylCoordinate::new(q, q, q),
            GateFamily::Iswap => WeylCoordinate::new(q, q, 0.0),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "cnot" | "cx" => Some(Self::Cnot),
            "b" => Some(Self::B),
            "swap" => Some(Self::Swap),
            "iswap" => Some(Self::Iswap),
            _ => None,
        }
    }
}

/// One row of a family sweep; amplitudes in units of `g`, duration in `1/g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub a1: f64,
    pub a2: f64,
    pub delta: f64,
    pub tau: f64,
}

pub fn family_sweep(family: GateFamily, s_grid: &[f64], nf: &NormalForm) -> Result<Vec<SweepRow>, SchemeError> {
    let g = nf.strength();
    s_grid
        .iter()
        .map(|&s| {
            let u = family.coordinate(s).matrix();
            let sol = synthesize_pulse(&u, nf, &PulseOptions::default())?;
            Ok(SweepRow { s, a1: sol.a1_amp / g, a2: sol.a2_amp / g, delta: sol.delta / g, tau: sol.tau * g })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::hamiltonian::preset;

    fn xy() -> NormalForm {
        normal_form(&preset("xy", 1.0).unwrap()).unwrap()
    }

    fn xx() -> NormalForm {
        normal_form(&preset("xx", 1.0).unwrap()).unwrap()
    }

    #[test]
    fn optimal_time_examples() {
        let t = optimal_time(&WeylCoordinate::CNOT, (0.5, 0.5, 0.0));
        assert!((t.tau - FRAC_PI_2).abs() < 1e-12);
        let t = optimal_time(&WeylCoordinate::IDENTITY, (0.7, 0.2, 0.1));
        assert_eq!(t.tau, 0.0);
        let t = optimal_time(&WeylCoordinate::B, (1.0, 0.0, 0.0));
        assert!((t.tau - 3.0 * PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn sinc_inverse_branches() {
        // sinc(π) = 0: smallest root above 1.0 is π
        let u = sinc_inverse_smallest(0.0, 1.0).unwrap();
        assert!((u - PI).abs() < 1e-12);
        assert_eq!(sinc_inverse_smallest(sinc(0.7), 0.7), Some(0.7));
        assert!(sinc_inverse_smallest(-0.5, 0.1).is_none());
    }

    #[test]
    fn nd_cnot_xy_is_one_sided() {
        let (d, r) = solve_nd([FRAC_PI_4, 0.0, 0.0], (0.5, 0.5, 0.0), FRAC_PI_2).unwrap();
        assert!((r.s1 - 2.0).abs() < 1e-10 && (r.s2 - 2.0).abs() < 1e-10);
        let want = 0.5 * (4.0f64 - 0.25).sqrt();
        assert!((d.omega1 - want).abs() < 1e-10 && (d.omega2 - want).abs() < 1e-10);
        assert!(d.amplitudes().1.abs() < 1e-10);
    }

    #[test]
    fn nd_iswap_xy_is_drive_free() {
        let sol = synthesize_pulse(&gates::iswap(), &xy(), &PulseOptions::default()).unwrap();
        assert_eq!(sol.subscheme, Subscheme::Nd);
        assert!(sol.omega1.abs() < 1e-6 && sol.omega2.abs() < 1e-6 && sol.delta == 0.0);
    }

    #[test]
    fn ea_swap_xy() {
        let nf = xy();
        let sol = synthesize_pulse(&gates::swap(), &nf, &PulseOptions::default()).unwrap();
        assert_eq!(sol.subscheme, Subscheme::EaMinus);
        assert!((sol.tau - 3.0 * FRAC_PI_4).abs() < 1e-12);
        assert!(sol.a1_amp.abs() > 0.1);
        assert!((sol.a1_amp - sol.a2_amp).abs() < 1e-9);
        assert!(verify_solution(&sol, &gates::swap(), &nf).unwrap() < 1e-8);
        if let Diagnostics::Ea(r) = sol.diagnostics {
            let lhs = ea_lhs(r.alpha, r.beta, r.eta, r.t_scaled);
            let rhs = ea_rhs(r.shifted_coord[0], r.shifted_coord[1], r.shifted_coord[2]);
            assert!((lhs - rhs).norm() < 1e-10);
        } else {
            panic!("expected EA diagnostics");
        }
    }

    #[test]
    fn ea_precondition_guard() {
        assert!(matches!(
            solve_ea([0.5, 0.1, 0.0], (0.5, 0.5, 0.0), 1.0, Subscheme::Nd),
            Err(SchemeError::Precondition(_))
        ));
    }

    #[test]
    fn table_singles() {
        let cases = [
            (gates::sqisw(), xy(), FRAC_PI_4),
            (gates::iswap(), xx(), FRAC_PI_2),
            (gates::cnot(), xx(), FRAC_PI_4),
        ];
        for (u, nf, want) in cases {
            let sol = synthesize_pulse(&u, &nf, &PulseOptions::default()).unwrap();
            assert!((sol.tau - want).abs() < 1e-9);
            assert!(verify_solution(&sol, &u, &nf).unwrap() < 1e-8);
        }
    }

    #[test]
    fn identity_target() {
        let nf = xy();
        let id = CMatrix::identity(4, 4);
        let sol = synthesize_pulse(&id, &nf, &PulseOptions::default()).unwrap();
        assert_eq!(sol.tau, 0.0);
        assert!(verify_solution(&sol, &id, &nf).unwrap() < 1e-12);
    }

    #[test]
    fn tau_perturbation_is_detected() {
        let nf = xy();
        let u = gates::cnot();
        let mut sol = synthesize_pulse(&u, &nf, &PulseOptions::default()).unwrap();
        assert!(verify_solution(&sol, &u, &nf).unwrap() < 1e-8);
        sol.tau += 1e-3;
        assert!(verify_solution(&sol, &u, &nf).unwrap() > 1e-7);
    }

    #[test]
    fn amplitude_cap_signal() {
        let nf = xy();
        let opts = PulseOptions { amp_max: Some(0.01) };
        match synthesize_pulse(&gates::swap(), &nf, &opts) {
            Err(SchemeError::AmplitudeExceeded { solution, .. }) => {
                assert!(solution.max_amplitude() > 0.01)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn family_sweep_signatures() {
        let nf = xy();
        let grid = [0.25, 0.5, 0.75, 1.0];
        for row in family_sweep(GateFamily::Iswap, &grid, &nf).unwrap() {
            assert!(row.a1.abs() < 1e-6 && row.a2.abs() < 1e-6 && row.delta.abs() < 1e-12);
        }
        let cnot = family_sweep(GateFamily::Cnot, &[1.0], &nf).unwrap();
        assert!(cnot[0].a2.abs() < 1e-9);
        let swap = family_sweep(GateFamily::Swap, &[1.0], &nf).unwrap();
        assert!(swap[0].a1.abs() > 0.1 && (swap[0].a1.abs() - swap[0].a2.abs()).abs() < 1e-9);
    }
}
