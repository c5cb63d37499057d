//! Demo and test profiles on periodic grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::GridFunction;
use crate::{Error, Result, C64};

/// `amp * exp(-(x - center)^2 / (2 width^2)) * exp(i kappa x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
    pub kappa: f64,
}

impl Bump {
    pub fn at(&self, x: f64) -> C64 {
        let r = (x - self.center) / self.width;
        C64::from_polar(self.amp * (-0.5 * r * r).exp(), self.kappa * x)
    }
}

/// Sum of Gaussian bumps sampled on `n` points of a box of length `length`.
pub fn bumps(n: usize, length: f64, parts: &[Bump]) -> Result<GridFunction> {
    GridFunction::from_fn(n, length, |x| parts.iter().map(|b| b.at(x)).sum())
}

pub fn gaussian(n: usize, length: f64, amp: f64, width: f64, kappa: f64) -> Result<GridFunction> {
    bumps(
        n,
        length,
        &[Bump {
            amp,
            center: 0.0,
            width,
            kappa,
        }],
    )
}

/// `exp(-x^2/2) e^{0.7 i x}` on `[-12, 12)`: the scattering test profile.
pub fn scattering_gaussian(n: usize) -> Result<GridFunction> {
    gaussian(n, 24.0, 1.0, 1.0, 0.7)
}

/// Two separated bumps with different carriers.
pub fn two_bump(n: usize, length: f64) -> Result<GridFunction> {
    bumps(
        n,
        length,
        &[
            Bump {
                amp: 0.9,
                center: -3.0,
                width: 0.8,
                kappa: 0.5,
            },
            Bump {
                amp: 0.6,
                center: 2.5,
                width: 1.0,
                kappa: -0.8,
            },
        ],
    )
}

/// Small-mass Gaussian used for the evolution benchmarks.
pub fn evolution_gaussian(n: usize) -> Result<GridFunction> {
    gaussian(n, 300.0, 0.5, 3.0, 0.25)
}

/// `amp * e^{i k x}` with `k = 2 pi mode / length`.
pub fn plane_wave(n: usize, length: f64, amp: f64, mode: i64) -> Result<GridFunction> {
    let k = 2.0 * std::f64::consts::PI * mode as f64 / length;
    GridFunction::from_fn(n, length, |x| C64::from_polar(amp, k * x))
}

/// A random sum of two to four bumps, decaying at the edges of the box.
pub fn random_bumps(n: usize, length: f64, seed: u64) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(2..=4);
    let span = length / 8.0;
    let parts: Vec<Bump> = (0..count)
        .map(|_| Bump {
            amp: rng.random_range(0.2..1.0),
            center: rng.random_range(-span..span),
            width: rng.random_range(0.6..1.5),
            kappa: rng.random_range(-1.5..1.5),
        })
        .collect();
    bumps(n, length, &parts)
}

/// Named profiles understood by the command line.
pub fn named(name: &str, n: usize, length: f64) -> Result<GridFunction> {
    match name {
        "gaussian" => gaussian(n, length, 1.0, 1.0, 0.7),
        "evolution-gaussian" => gaussian(n, length, 0.5, 3.0, 0.25),
        "two-bump" => two_bump(n, length),
        "plane-wave" => plane_wave(n, length, 1.0, 1),
        other => Err(Error::InvalidParameter(format!(
            "unknown profile '{other}' (gaussian, evolution-gaussian, two-bump, plane-wave)"
        ))),
    }
}
