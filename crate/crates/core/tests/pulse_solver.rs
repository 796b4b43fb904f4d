use reqisc_core::hamiltonian::{normal_form, preset, CouplingHamiltonian, NormalForm};
use reqisc_core::numerics::{c64, CMatrix};
use reqisc_core::scheme::{
    optimal_time, synthesize_pulse, verify_solution, PulseOptions, Subscheme,
};
use reqisc_core::weyl::{random_chamber_point, random_su4, WeylCoordinate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

fn random_coupling(seed: u64) -> NormalForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CMatrix::from_fn(4, 4, |_, _| {
        c64(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let h = CouplingHamiltonian::from_matrix((&m + m.adjoint()) * c64(0.5, 0.0)).unwrap();
    normal_form(&h).unwrap()
}

fn check_sweep(nf: &NormalForm, seed: u64, n: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let u = random_su4(&mut rng);
        let sol = synthesize_pulse(&u, nf, &PulseOptions::default()).unwrap();
        let inf = verify_solution(&sol, &u, nf).unwrap();
        assert!(inf < 1e-8, "infidelity {inf:e} for {sol:?}");
        let zero = [sol.omega1, sol.omega2, sol.delta].iter().any(|v| v.abs() <= 1e-12);
        assert!(zero, "no vanishing drive parameter: {sol:?}");
    }
}

#[test]
fn haar_targets_under_xy() {
    check_sweep(&normal_form(&preset("xy", 1.0).unwrap()).unwrap(), 100, 1000);
}

#[test]
fn haar_targets_under_xx() {
    check_sweep(&normal_form(&preset("xx", 1.0).unwrap()).unwrap(), 101, 300);
}

#[test]
fn haar_targets_under_random_couplings() {
    for seed in [7, 8, 9] {
        check_sweep(&random_coupling(seed), 200 + seed, 200);
    }
}

fn chamber_grid(n: usize) -> Vec<WeylCoordinate> {
    let mut pts = Vec::new();
    let step = FRAC_PI_4 / (n - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = i as f64 * step;
                let y = j as f64 * step;
                let z = -FRAC_PI_4 + 2.0 * k as f64 * step;
                let c = WeylCoordinate::new(x, y, z);
                if c.in_chamber(0.0) {
                    pts.push(c);
                }
            }
        }
    }
    pts
}

#[test]
fn chamber_grid_verifies() {
    let grid = chamber_grid(20);
    for name in ["xy", "xx"] {
        let nf = normal_form(&preset(name, 1.0).unwrap()).unwrap();
        for c in &grid {
            let u = c.matrix();
            let sol = synthesize_pulse(&u, &nf, &PulseOptions::default())
                .unwrap_or_else(|e| panic!("{name} {c:?}: {e}"));
            let inf = verify_solution(&sol, &u, &nf).unwrap();
            assert!(inf < 1e-8, "{name} {c:?}: infidelity {inf:e}");
        }
    }
}

#[test]
fn reflected_pair_shares_optimal_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for coeffs in [(0.5, 0.5, 0.0), (1.0, 0.0, 0.0), (0.8, 0.5, -0.3)] {
        for _ in 0..500 {
            let c = random_chamber_point(&mut rng);
            let r = c.reflected();
            let a = optimal_time(&c, coeffs).tau;
            let b = optimal_time(&r, coeffs).tau;
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn coupling_scaling_rescales_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let c = random_chamber_point(&mut rng);
        let base = optimal_time(&c, (0.7, 0.4, 0.1)).tau;
        for k in [0.5, 2.0, 3.7] {
            let t = optimal_time(&c, (0.7 * k, 0.4 * k, 0.1 * k)).tau;
            assert!((t * k - base).abs() < 1e-12 * base.max(1.0));
        }
    }
}

/// The binding branch places the (possibly reflected) point on the matching
/// face of the reachable region at time τ.
#[test]
fn subscheme_matches_frontier_face() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = 1e-9;
    for (a, b, c) in [(0.5, 0.5, 0.0), (1.0, 0.0, 0.0), (0.8, 0.5, -0.3), (0.9, 0.6, 0.2)] {
        for _ in 0..1000 {
            let p = random_chamber_point(&mut rng);
            let ot = optimal_time(&p, (a, b, c));
            let [x, y, z] = ot.target;
            let t = ot.tau;
            match ot.branch_times.binding() {
                Subscheme::Nd => {
                    assert!((x - a * t).abs() < tol);
                    assert!(y - z <= (b - c) * t + tol && y + z <= (b + c) * t + tol);
                }
                Subscheme::EaPlus => {
                    assert!((x + y - z - (a + b - c) * t).abs() < tol);
                    assert!(a * t + tol >= x && z <= c * t + tol);
                }
                Subscheme::EaMinus => {
                    assert!((x + y + z - (a + b + c) * t).abs() < tol);
                    assert!(a * t + tol >= x && z >= c * t - tol);
                }
            }
        }
    }
}

#[test]
fn named_gate_durations() {
    let xy = normal_form(&preset("xy", 1.0).unwrap()).unwrap();
    let xx = normal_form(&preset("xx", 1.0).unwrap()).unwrap();
    let cases = [
        (WeylCoordinate::CNOT, &xy, FRAC_PI_2),
        (WeylCoordinate::ISWAP, &xy, FRAC_PI_2),
        (WeylCoordinate::SQISW, &xy, FRAC_PI_4),
        (WeylCoordinate::B, &xy, FRAC_PI_2),
        (WeylCoordinate::CNOT, &xx, FRAC_PI_4),
        (WeylCoordinate::ISWAP, &xx, FRAC_PI_2),
        (WeylCoordinate::SQISW, &xx, FRAC_PI_4),
        (WeylCoordinate::B, &xx, 3.0 * FRAC_PI_4 / 2.0),
    ];
    for (c, nf, want) in cases {
        let t = optimal_time(&c, nf.coefficients()).tau;
        assert!((t - want).abs() < 1e-12, "{c:?}: {t} vs {want}");
    }
}
