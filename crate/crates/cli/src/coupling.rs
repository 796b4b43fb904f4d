use anyhow::{bail, Context, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use reqisc_core::hamiltonian::{load_coupling_file, normal_form, preset, CouplingHamiltonian, NormalForm};
use reqisc_core::numerics::{c64, CMatrix};
use std::path::Path;

/// How couplings for random-coupling benchmarks are drawn. Every draw is
/// rescaled to unit strength `a + b + |c| = 1`, like the presets at g = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomDist {
    /// Hermitian 4×4 with iid complex Gaussian entries, reduced to normal form.
    Gaussian,
    /// `(a, b, c)` uniform on the region `a ≥ b ≥ |c|` of the unit-strength plane.
    Chamber,
}

impl RandomDist {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::Gaussian),
            "chamber" => Ok(Self::Chamber),
            _ => bail!("unknown coupling distribution `{name}` (expected gaussian or chamber)"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Chamber => "chamber",
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        match self {
            Self::Gaussian => {
                let nf = normal_form(&gaussian_hermitian(rng)).expect("Hermitian by construction");
                let s = nf.strength();
                (nf.a / s, nf.b / s, nf.c / s)
            }
            Self::Chamber => loop {
                let a: f64 = rng.random();
                let b: f64 = rng.random::<f64>() * a;
                let c: f64 = rng.random_range(-b..=b);
                let s = a + b + c.abs();
                if s > 1e-12 {
                    break (a / s, b / s, c / s);
                }
            },
        }
    }
}

/// A random Hermitian coupling with iid complex Gaussian entries.
pub fn gaussian_hermitian<R: Rng + ?Sized>(rng: &mut R) -> CouplingHamiltonian {
    let m = CMatrix::from_fn(4, 4, |_, _| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    CouplingHamiltonian::from_matrix((&m + m.adjoint()) * c64(0.5, 0.0)).expect("Hermitian by construction")
}

#[derive(Debug, Clone)]
pub enum CouplingChoice {
    Fixed { name: String, nf: NormalForm },
    Random(RandomDist),
}

impl CouplingChoice {
    pub fn name(&self) -> String {
        match self {
            Self::Fixed { name, .. } => name.clone(),
            Self::Random(d) => format!("random:{}", d.name()),
        }
    }

    pub fn fixed(&self) -> Result<&NormalForm> {
        match self {
            Self::Fixed { nf, .. } => Ok(nf),
            Self::Random(_) => bail!("a fixed coupling is needed here, not `random`"),
        }
    }
}

/// `xy`, `xx`, `file:PATH`, or `random` together with a distribution name.
pub fn parse_coupling(spec: &str, g: f64, dist: Option<&str>) -> Result<CouplingChoice> {
    if spec == "random" {
        let d = dist.context("`--coupling random` needs `--dist gaussian|chamber`")?;
        return Ok(CouplingChoice::Random(RandomDist::parse(d)?));
    }
    let h = match spec.strip_prefix("file:") {
        Some(path) => load_coupling_file(Path::new(path)).with_context(|| format!("loading coupling {path}"))?,
        None => preset(spec, g)?,
    };
    Ok(CouplingChoice::Fixed { name: spec.to_string(), nf: normal_form(&h)? })
}
