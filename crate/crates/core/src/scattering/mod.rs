//! The transmission coefficient `a_u(lambda)` of the spectral problem
//! `i sigma_3 psi_x = (lambda^2 + i lambda U) psi`.
//!
//! Two independent routes are provided: Jost integration ([`jost_transmission`],
//! [`log_transmission`]) and the operator `T_u(lambda)` with
//! `a_u^2 = det(I - T_u^2)` and `ln a_u = -sum_k tr T_u^{2k} / (2k)`
//! ([`perturbation_determinant`], [`log_a_series`]).

mod jost;
mod operator;

use serde::{Deserialize, Serialize};

use crate::fft;
use crate::grid::GridFunction;
use crate::{Error, Result, C64};

pub use jost::{
    jost_transmission, jost_transmission_with, log_transmission, log_transmission_with,
    JostOptions,
};
pub use operator::OperatorDiscretization;

/// A point `lambda` with `Im lambda^2 >= 0`, stored together with `lambda^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter {
    lambda: C64,
    lambda_sq: C64,
}

impl SpectralParameter {
    /// `lambda` is the principal square root, so `arg lambda` lies in `[0, pi/2]`.
    pub fn from_lambda_sq(lambda_sq: C64) -> Result<Self> {
        if !(lambda_sq.re.is_finite() && lambda_sq.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda^2 = {lambda_sq}")));
        }
        if lambda_sq.im < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda^2 = {lambda_sq} is below the real axis"
            )));
        }
        if lambda_sq.norm() == 0.0 {
            return Err(Error::InvalidParameter("lambda^2 = 0".into()));
        }
        Ok(SpectralParameter {
            lambda: lambda_sq.sqrt(),
            lambda_sq,
        })
    }

    pub fn from_lambda(lambda: C64) -> Result<Self> {
        let lambda_sq = lambda * lambda;
        Self::from_lambda_sq(lambda_sq)?;
        Ok(SpectralParameter { lambda, lambda_sq })
    }

    /// `lambda = sqrt(rho) e^{i pi/4}`, `lambda^2 = i rho` exactly.
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
        }
        Ok(SpectralParameter {
            lambda: C64::from_polar(rho.sqrt(), std::f64::consts::FRAC_PI_4),
            lambda_sq: C64::new(0.0, rho),
        })
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn lambda_sq(&self) -> C64 {
        self.lambda_sq
    }

    /// Whether `delta < arg lambda^2 < pi - delta`.
    pub fn in_sector(&self, delta: f64) -> bool {
        let a = self.lambda_sq.arg();
        a > delta && a < std::f64::consts::PI - delta
    }

    /// `lambda * factor`, e.g. `1/sqrt(mu)` for the spatial scaling.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_lambda(self.lambda * factor)
    }
}

/// `2 lambda^2` shifted Fourier multipliers on a padded grid.
fn padded_coefficients(u: &GridFunction, factor: usize) -> (Vec<C64>, Vec<f64>) {
    let n = u.len();
    let m = n * factor;
    let c = u.coefficients();
    let mut out = vec![C64::new(0.0, 0.0); m];
    for (k, z) in c.iter().enumerate() {
        let mode = fft::mode_index(k, n);
        if mode == -((n / 2) as i64) {
            continue;
        }
        out[fft::slot(mode, m).expect("fits")] = *z;
    }
    (out, crate::grid::wavenumbers(m, u.domain_length()))
}

/// `tr T_u(lambda)^2 = 2 i lambda^2 int |u^(zeta)|^2 / (zeta + 2 lambda^2) dzeta`
/// as a sum over the grid frequencies.
pub fn trace_t2(u: &GridFunction, lambda: &SpectralParameter) -> C64 {
    let l2 = lambda.lambda_sq();
    let lp = u.domain_length();
    let c = u.coefficients();
    let q = u.wavenumbers();
    let n = u.len();
    let mut s = C64::new(0.0, 0.0);
    for k in 0..n {
        if k == n / 2 {
            continue;
        }
        s += c[k].norm_sqr() / (q[k] + 2.0 * l2);
    }
    C64::new(0.0, 2.0) * l2 * lp * s
}

/// `tr T_u(lambda)^4 = i (2 lambda^2)^2 int ubar A^2 B dx` with
/// `A = (D + 2 lambda^2)^{-1} u`, `B = (D - 2 lambda^2)^{-1} ubar`, `D = -i d/dx`.
pub fn trace_t4(u: &GridFunction, lambda: &SpectralParameter) -> C64 {
    let l2 = lambda.lambda_sq();
    let (c, q) = padded_coefficients(u, 2);
    let m = c.len();
    let (cb, _) = padded_coefficients(&u.conj(), 2);
    let mut ubar = cb.clone();
    let mut a: Vec<C64> = c.iter().zip(&q).map(|(z, &k)| z / (k + 2.0 * l2)).collect();
    let mut b: Vec<C64> = cb.iter().zip(&q).map(|(z, &k)| z / (k - 2.0 * l2)).collect();
    fft::inverse(&mut ubar);
    fft::inverse(&mut a);
    fft::inverse(&mut b);
    let mut s = C64::new(0.0, 0.0);
    for i in 0..m {
        s += ubar[i] * a[i] * a[i] * b[i];
    }
    let integral = s * (u.domain_length() / m as f64);
    C64::new(0.0, 1.0) * (l2 * 2.0).powu(2) * integral
}

/// The discretized operator on `M` modes per component.
pub fn build_t_matrix(
    u: &GridFunction,
    lambda: &SpectralParameter,
    modes: usize,
) -> Result<OperatorDiscretization> {
    OperatorDiscretization::new(u, lambda, modes)
}

/// `ln det(I - C)` for `T^2 = diag(C, C')`, regularized by the exact first
/// two traces: the window only has to resolve `det_3(I - C)`.
fn log_det_reduced(u: &GridFunction, lambda: &SpectralParameter, modes: usize) -> Result<C64> {
    let op = OperatorDiscretization::with_window(u, lambda, modes)?;
    let c = op.reduced_square();
    let log_det = c.identity_minus().log_det()?;
    let t1 = c.trace();
    let t2 = c.trace_of_product(&c);
    let exact1 = trace_t2(u, lambda) / 2.0;
    let exact2 = trace_t4(u, lambda) / 2.0;
    Ok(log_det + t1 + t2 / 2.0 - exact1 - exact2 / 2.0)
}

/// `det(I - T_u(lambda)^2)`, which equals `a_u(lambda)^2`, on `M = N/2` modes.
pub fn perturbation_determinant(u: &GridFunction, lambda: &SpectralParameter) -> Result<C64> {
    perturbation_determinant_with(u, lambda, u.len() / 2)
}

pub fn perturbation_determinant_with(
    u: &GridFunction,
    lambda: &SpectralParameter,
    modes: usize,
) -> Result<C64> {
    if u.is_zero() {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok((log_det_reduced(u, lambda, modes)? * 2.0).exp())
}

/// `-sum_{k=1}^K tr T^{2k} / (2k)`: `k = 1, 2` from [`trace_t2`] and
/// [`trace_t4`], `k >= 3` from powers of the discretized operator.
pub fn log_a_series(u: &GridFunction, lambda: &SpectralParameter, terms: usize) -> Result<C64> {
    Ok(log_a_partial_sums(u, lambda, terms)?
        .last()
        .copied()
        .unwrap_or(C64::new(0.0, 0.0)))
}

/// All partial sums `K = 1..=terms` of [`log_a_series`].
pub fn log_a_partial_sums(
    u: &GridFunction,
    lambda: &SpectralParameter,
    terms: usize,
) -> Result<Vec<C64>> {
    if u.is_zero() {
        return Ok(vec![C64::new(0.0, 0.0); terms]);
    }
    let op = OperatorDiscretization::new(u, lambda, u.len() / 2)?;
    let c = op.reduced_square();
    let radius = operator::spectral_radius_of(&c);
    if radius >= 1.0 {
        return Err(Error::Divergence { radius });
    }
    let mut sums = Vec::with_capacity(terms);
    let mut acc = C64::new(0.0, 0.0);
    let mut power = c.clone();
    let mut order = 1;
    for k in 1..=terms {
        let tr = match k {
            1 => trace_t2(u, lambda),
            2 => trace_t4(u, lambda),
            _ => {
                while order < k {
                    power = power.mul(&c);
                    order += 1;
                }
                power.trace() * 2.0
            }
        };
        acc -= tr / (2 * k) as f64;
        sums.push(acc);
    }
    Ok(sums)
}

/// Spectral radius of the discretized `T_u(lambda)^2` on `M = N/2` modes.
pub fn spectral_radius(u: &GridFunction, lambda: &SpectralParameter) -> Result<f64> {
    Ok(OperatorDiscretization::new(u, lambda, u.len() / 2)?.spectral_radius())
}

/// Smallest `rho` on the grid `rho_lo * 2^{k/4}` for which the spectral
/// radius of `T_u(sqrt(i rho))^2` drops below `1/4`.
pub fn estimate_r0(u: &GridFunction) -> Result<f64> {
    estimate_r0_from(u, 1.0)
}

pub fn estimate_r0_from(u: &GridFunction, rho_lo: f64) -> Result<f64> {
    if u.is_zero() {
        return Ok(rho_lo);
    }
    let step = 2f64.powf(0.25);
    let mut rho = rho_lo;
    while rho < 1e9 {
        if spectral_radius(u, &SpectralParameter::from_rho(rho)?)? < 0.25 {
            return Ok(rho);
        }
        rho *= step;
    }
    Err(Error::Divergence { radius: f64::INFINITY })
}

/// One row of a scattering report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TransmissionRow {
    pub lambda_sq_re: f64,
    pub lambda_sq_im: f64,
    pub a_re: f64,
    pub a_im: f64,
    pub method: String,
    pub residual: f64,
}

impl TransmissionRow {
    pub fn new(lambda: &SpectralParameter, a: C64, method: &str, residual: f64) -> Self {
        TransmissionRow {
            lambda_sq_re: lambda.lambda_sq().re,
            lambda_sq_im: lambda.lambda_sq().im,
            a_re: a.re,
            a_im: a.im,
            method: method.to_string(),
            residual,
        }
    }
}
