//! Fourier discretization of `T_u(lambda) = i lambda (L_0 - lambda^2)^{-1} U`.
//!
//! On the periodic box of length `L` with `q_i = 2 pi i / L`,
//! `(L_0 - lambda^2)^{-1} = diag(g1, g2)` with `g1(q) = -1/(q + lambda^2)` and
//! `g2(q) = 1/(q - lambda^2)`, and `U` acts by convolution with the Fourier
//! coefficients `c_m` of `u` and `d_m = conj(c_{-m})` of `ubar`. Then
//! `T^2 = diag(C, C')` with `C = -lambda^2 G1 M_u G2 M_ubar`, and `C`, `C'`
//! have the same nonzero spectrum, so `det(I - T^2) = det(I - C)^2`.
//!
//! `C` is banded with half-bandwidth `2W` when `u` has spectral support
//! `|m| <= W`; its entries on a mode window are exact (inner sums run over
//! all of `Z`).

use nalgebra::DMatrix;

use crate::fft;
use crate::grid::GridFunction;
use crate::linalg::Banded;
use crate::scattering::SpectralParameter;
use crate::special::digamma;
use crate::{Error, Result, C64};

/// Relative size below which Fourier coefficients are treated as zero.
const SUPPORT_CUTOFF: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct OperatorDiscretization {
    modes: usize,
    lambda: SpectralParameter,
    domain_length: f64,
    width: usize,
    coeffs: Vec<C64>,
}

impl OperatorDiscretization {
    /// `T_u(lambda)` on the modes `-M..M-1` of each component.
    pub fn new(u: &GridFunction, lambda: &SpectralParameter, modes: usize) -> Result<Self> {
        let n = u.len();
        if modes == 0 || 2 * modes > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= M <= N/2, got M = {modes} with N = {n}"
            )));
        }
        Self::with_window(u, lambda, modes)
    }

    /// Like [`OperatorDiscretization::new`] but the window may extend past
    /// the grid's modes (where the coefficients of `u` vanish).
    pub fn with_window(u: &GridFunction, lambda: &SpectralParameter, modes: usize) -> Result<Self> {
        let n = u.len();
        if modes == 0 {
            return Err(Error::InvalidParameter("empty mode window".into()));
        }
        let raw = u.coefficients();
        let peak = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let half = (n / 2) as i64;
        let mut width = 0usize;
        for (k, z) in raw.iter().enumerate() {
            let m = fft::mode_index(k, n);
            if m > -half && z.norm() > SUPPORT_CUTOFF * peak {
                width = width.max(m.unsigned_abs() as usize);
            }
        }
        let w = width as i64;
        let coeffs = (-w..=w)
            .map(|m| raw[fft::slot(m, n).expect("mode in range")])
            .collect();
        Ok(OperatorDiscretization {
            modes,
            lambda: *lambda,
            domain_length: u.domain_length(),
            width,
            coeffs,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Spectral support `W` of `u`.
    pub fn support(&self) -> usize {
        self.width
    }

    pub fn lambda(&self) -> &SpectralParameter {
        &self.lambda
    }

    fn c(&self, m: i64) -> C64 {
        let w = self.width as i64;
        if m.abs() > w {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + w) as usize]
        }
    }

    fn d(&self, m: i64) -> C64 {
        self.c(-m).conj()
    }

    fn q(&self, i: i64) -> f64 {
        2.0 * std::f64::consts::PI * i as f64 / self.domain_length
    }

    fn g1(&self, i: i64) -> C64 {
        -(self.lambda.lambda_sq() + self.q(i)).inv()
    }

    fn g2(&self, i: i64) -> C64 {
        (self.q(i) - self.lambda.lambda_sq()).inv()
    }

    /// Entry of the `4M x 4M` matrix; rows and columns are ordered
    /// (component, mode) with modes `-M..M-1`.
    pub fn t_entry(&self, row: usize, col: usize) -> C64 {
        let m2 = 2 * self.modes;
        let (ra, rb) = (row / m2, (row % m2) as i64 - self.modes as i64);
        let (ca, cb) = (col / m2, (col % m2) as i64 - self.modes as i64);
        let il = C64::new(0.0, 1.0) * self.lambda.lambda();
        match (ra, ca) {
            (0, 1) => il * self.g1(rb) * self.c(rb - cb),
            (1, 0) => il * self.g2(rb) * self.d(rb - cb),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// The dense truncated matrix. Intended for small `M`.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = 4 * self.modes;
        DMatrix::from_fn(n, n, |i, j| self.t_entry(i, j))
    }

    /// Squared Hilbert-Schmidt norm of the truncated matrix.
    pub fn hs_norm_sq(&self) -> f64 {
        let m = self.modes as i64;
        let lam2 = self.lambda.lambda().norm_sqr();
        let mut total = 0.0;
        for i in -m..m {
            let (a, b) = (self.g1(i).norm_sqr(), self.g2(i).norm_sqr());
            for k in (i - self.width as i64).max(-m)..(i + self.width as i64 + 1).min(m) {
                total += lam2 * (a * self.c(i - k).norm_sqr() + b * self.d(i - k).norm_sqr());
            }
        }
        total
    }

    /// `C_ij` with the inner sum over all modes.
    pub fn c_entry(&self, i: i64, j: i64) -> C64 {
        let w = self.width as i64;
        let lo = (i - w).max(j - w);
        let hi = (i + w).min(j + w);
        let mut s = C64::new(0.0, 0.0);
        for k in lo..=hi {
            s += self.c(i - k) * self.g2(k) * self.d(k - j);
        }
        -self.lambda.lambda_sq() * self.g1(i) * s
    }

    /// `C` restricted to the modes `lo..hi` as a banded matrix.
    pub fn reduced_square_on(&self, lo: i64, hi: i64) -> Banded {
        let n = (hi - lo) as usize;
        let band = 2 * self.width;
        let mut b = Banded::zeros(n, band, band);
        for r in 0..n {
            let (c0, c1) = b.row_range(r);
            for col in c0..c1 {
                b.set(r, col, self.c_entry(lo + r as i64, lo + col as i64));
            }
        }
        b
    }

    /// `C` on the window `-M..M-1`.
    pub fn reduced_square(&self) -> Banded {
        let m = self.modes as i64;
        self.reduced_square_on(-m, m)
    }

    /// Sum of the diagonal of `C` over the modes outside the window, in
    /// closed form through the digamma function.
    pub fn trace_tail(&self) -> C64 {
        let lp = self.domain_length;
        let scale = lp / (2.0 * std::f64::consts::PI);
        let alpha = self.lambda.lambda_sq() * scale;
        let big_m = self.modes as f64;
        let w = self.width as i64;
        let mut total = C64::new(0.0, 0.0);
        for m in -w..=w {
            let weight = self.c(m).norm_sqr();
            if weight == 0.0 {
                continue;
            }
            let beta = -alpha - m as f64;
            let upper = (digamma(alpha + big_m) - digamma(beta + big_m)) / (alpha - beta);
            let lower =
                (digamma(-alpha + big_m + 1.0) - digamma(-beta + big_m + 1.0)) / (beta - alpha);
            total += (upper + lower) * weight;
        }
        self.lambda.lambda_sq() * scale * scale * total
    }

    /// `tr T^2 = 2 tr C`, from the window plus the closed-form tail.
    pub fn trace_t2_oracle(&self) -> C64 {
        (self.reduced_square().trace() + self.trace_tail()) * 2.0
    }

    /// `tr T^4 = 2 tr C^2`, summed on a window extended until
    /// `q >= 1000 |lambda^2|`.
    pub fn trace_t4_oracle(&self) -> C64 {
        let need = 1000.0 * self.lambda.lambda_sq().norm() * self.domain_length
            / (2.0 * std::f64::consts::PI);
        let ext = (need.ceil() as i64).max(self.modes as i64) + 2 * self.width as i64;
        let c = self.reduced_square_on(-ext, ext);
        c.trace_of_product(&c) * 2.0
    }

    /// `tr T^{2k} = 2 tr C^k` on the window.
    pub fn trace_power(&self, k: usize) -> C64 {
        if k == 0 {
            return C64::new((4 * self.modes) as f64, 0.0);
        }
        let c = self.reduced_square();
        let mut p = c.clone();
        for _ in 1..k {
            p = p.mul(&c);
        }
        p.trace() * 2.0
    }

    /// Spectral radius of `T^2` on the window by power iteration on `C`.
    pub fn spectral_radius(&self) -> f64 {
        spectral_radius_of(&self.reduced_square())
    }
}

pub(crate) fn spectral_radius_of(c: &Banded) -> f64 {
    let n = c.dim();
    // deterministic start vector with all modes present
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64 * 0.618).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let norm = |x: &[C64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut log_growth = Vec::new();
    for _ in 0..400 {
        let nv = norm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        v = c.matvec(&v);
        let g = norm(&v);
        if g == 0.0 {
            return 0.0;
        }
        log_growth.push(g.ln());
    }
    let tail = &log_growth[log_growth.len() - 100..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, l: f64) -> GridFunction {
        GridFunction::from_fn(n, l, |x| C64::from_polar((-x * x / 2.0).exp(), 0.7 * x)).unwrap()
    }

    #[test]
    fn banded_matches_dense_square() {
        let u = gaussian(64, 16.0);
        let lam = SpectralParameter::from_lambda_sq(C64::new(0.5, 2.0)).unwrap();
        let op = OperatorDiscretization::new(&u, &lam, 32).unwrap();
        let t = op.to_dense();
        let t2 = &t * &t;
        // dense truncation drops the inner modes outside the window, so
        // compare on interior rows only
        let c = op.reduced_square();
        for i in 24..40 {
            for j in 24..40 {
                assert!((t2[(i, j)] - c.get(i, j)).norm() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn tail_is_small_and_matches_explicit_sum() {
        let u = gaussian(64, 16.0);
        let lam = SpectralParameter::from_lambda_sq(C64::new(0.0, 3.0)).unwrap();
        let op = OperatorDiscretization::new(&u, &lam, 16).unwrap();
        let explicit: C64 = (16..1_000_000)
            .chain(-1_000_000..-16)
            .map(|i| op.c_entry(i, i))
            .sum();
        let tail = op.trace_tail();
        assert!((tail - explicit).norm() < 1e-3 * tail.norm(), "{tail} {explicit}");
    }
}
