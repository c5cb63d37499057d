//! The functionals `phi_L(u, rho)`, their quadratic parts and the
//! comparison with homogeneous Sobolev seminorms.
//!
//! Fourier sums use `|u^(q_m)|^2 dq = L |c_m|^2` for the grid coefficients
//! `c_m` and `q_m = 2 pi m / L`.

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::hierarchy::{self, EnergyFunctional};
use crate::quad;
use crate::scattering::{self, SpectralParameter};
use crate::{Error, Result, C64};

/// `(q_m, L |c_m|^2)` over the grid modes, Nyquist excluded.
fn spectrum(u: &GridFunction) -> Vec<(f64, f64)> {
    let n = u.len();
    let lp = u.domain_length();
    let c = u.coefficients();
    let q = u.wavenumbers();
    (0..n)
        .filter(|&k| k != n / 2)
        .map(|k| (q[k], lp * c[k].norm_sqr()))
        .collect()
}

/// `sum |q|^{2s} |u^|^2 dq`, the squared `H^s` seminorm.
pub fn hs_seminorm_sq(u: &GridFunction, s: f64) -> f64 {
    spectrum(u)
        .into_iter()
        .map(|(q, w)| if q == 0.0 { if s == 0.0 { w } else { 0.0 } } else { q.abs().powf(2.0 * s) * w })
        .sum()
}

pub fn hs_seminorm(u: &GridFunction, s: f64) -> f64 {
    hs_seminorm_sq(u, s).sqrt()
}

/// `sum (1 + q^2)^s |u^|^2 dq`, the squared inhomogeneous `H^s` norm.
pub fn hs_norm_sq(u: &GridFunction, s: f64) -> f64 {
    spectrum(u)
        .into_iter()
        .map(|(q, w)| (1.0 + q * q).powf(s) * w)
        .sum()
}

/// `phi_{L,0}(u, rho) = (-1)^L / (2^{2L+1} rho^{2L}) sum q^{2L+2} |u^|^2 / (q^2 + 4 rho^2)`.
pub fn phi0(u: &GridFunction, rho: f64, l: u32) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    Ok(phi0_from(&spectrum(u), rho, l))
}

fn phi0_from(spec: &[(f64, f64)], rho: f64, l: u32) -> f64 {
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let sum: f64 = spec
        .iter()
        .map(|&(q, w)| q.powi(2 * l as i32 + 2) * w / (q * q + 4.0 * rho * rho))
        .sum();
    sign * sum / (2f64.powi(2 * l as i32 + 1) * rho.powi(2 * l as i32))
}

/// The remainder `-tr T_u^2 / 2 - sum_{j <= 2L+1} mu_{j,1}(u) / lambda^{2j}`
/// at `lambda = sqrt(i rho)`; its imaginary part is `phi_{L,0}`.
pub fn tau1(u: &GridFunction, rho: f64, l: u32) -> Result<C64> {
    let lambda = SpectralParameter::from_rho(rho)?;
    let mut r = -scattering::trace_t2(u, &lambda) / 2.0;
    let inv = lambda.lambda_sq().inv();
    let mut p = C64::new(1.0, 0.0);
    for j in 0..=(2 * l as usize + 1) {
        r -= hierarchy::mu_j1(j).evaluate(u)? * p;
        p *= inv;
    }
    Ok(r)
}

/// `phi_L(u, rho) = Im[ln a_u(sqrt(i rho)) - sum_{j <= 2L+1} E_j(u) / (i rho)^j]`
/// with the energies from the shared hierarchy. Meaningful for `rho >= R_0(u)`.
pub fn phi(u: &GridFunction, rho: f64, l: u32) -> Result<f64> {
    let j_max = 2 * l as usize + 1;
    let cap = hierarchy::shared().cap();
    if j_max > cap {
        return Err(Error::Index { j: j_max, cap });
    }
    let energies = hierarchy::energies(j_max)?;
    phi_with(u, rho, l, &energies)
}

/// [`phi`] with caller-supplied energies `E_0, E_1, ...`.
pub fn phi_with(u: &GridFunction, rho: f64, l: u32, energies: &[EnergyFunctional]) -> Result<f64> {
    let j_max = 2 * l as usize + 1;
    if energies.len() <= j_max {
        return Err(Error::Index {
            j: j_max,
            cap: energies.len().saturating_sub(1),
        });
    }
    if u.is_zero() {
        return Ok(0.0);
    }
    let lambda = SpectralParameter::from_rho(rho)?;
    let log_a = scattering::log_transmission(u, &lambda)?;
    let inv = C64::new(0.0, rho).inv();
    let mut p = C64::new(1.0, 0.0);
    let mut r = log_a;
    for e in &energies[..=j_max] {
        r -= e.evaluate(u)? * p;
        p *= inv;
    }
    Ok(r.im)
}

/// One row of a `phi` table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PhiSample {
    pub rho: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub phi: f64,
    pub phi0: f64,
    pub abs_diff: f64,
}

pub fn phi_sample(u: &GridFunction, rho: f64, l: u32) -> Result<PhiSample> {
    let phi = phi(u, rho, l)?;
    let phi0 = phi0(u, rho, l)?;
    Ok(PhiSample {
        rho,
        l,
        phi,
        phi0,
        abs_diff: (phi - phi0).abs(),
    })
}

/// `||f_nu||_{L^1}` for `f_nu(z) = |z|^{2 nu - 1} / (1 + z^2)`, by quadrature
/// in `z = e^t` with exponential tails integrated in closed form.
pub fn f_nu_l1_norm(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!("nu = {nu} must lie in (0, 1)")));
    }
    let slow = nu.min(1.0 - nu);
    let t = 40.0 / slow;
    let body = quad::integrate_real(
        |t| {
            if t > 0.0 {
                ((2.0 * nu - 2.0) * t).exp() / (1.0 + (-2.0 * t).exp())
            } else {
                (2.0 * nu * t).exp() / (1.0 + (2.0 * t).exp())
            }
        },
        -t,
        t,
        1e-15,
        1e-13,
    )?;
    // e^{2 nu t} below -t, e^{(2 nu - 2) t} above t
    let left = (-2.0 * nu * t).exp() / (2.0 * nu);
    let right = ((2.0 * nu - 2.0) * t).exp() / (2.0 - 2.0 * nu);
    Ok(2.0 * (body + left + right))
}

/// `int_R^infinity rho^{2s-1} |phi_{[s],0}(u, rho)| d rho` for non-integer `s > 0`.
pub fn comparison_integral(u: &GridFunction, s: f64, r: f64) -> Result<f64> {
    check_fractional(s)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("R = {r} must be nonnegative")));
    }
    let spec: Vec<(f64, f64)> = spectrum(u).into_iter().filter(|&(q, w)| q != 0.0 && w > 0.0).collect();
    if spec.is_empty() {
        return Ok(0.0);
    }
    let l = s.floor() as u32;
    let nu = s - l as f64;
    let two_l = 2.0 * l as f64;
    let q_min = spec.iter().map(|p| p.0.abs()).fold(f64::INFINITY, f64::min);
    let q_max = spec.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let rho_lo = 1e-7 * q_min;
    let rho_hi = 1e7 * q_max;
    let scale = 2f64.powi(2 * l as i32 + 1);
    // |phi0| -> B rho^{-2L} as rho -> 0 and -> A rho^{-2L-2} as rho -> infinity
    let b: f64 = spec.iter().map(|&(q, w)| q.powi(2 * l as i32) * w).sum::<f64>() / scale;
    let a: f64 = spec.iter().map(|&(q, w)| q.powi(2 * l as i32 + 2) * w).sum::<f64>() / (4.0 * scale);
    let mut total = 0.0;
    let start = r.max(rho_lo);
    if r < rho_lo {
        total += b * (rho_lo.powf(2.0 * nu) - r.powf(2.0 * nu)) / (2.0 * nu);
    }
    if start < rho_hi {
        let body = quad::integrate_real(
            |t| {
                let rho = t.exp();
                rho.powf(2.0 * s) * phi0_from(&spec, rho, l).abs()
            },
            start.ln(),
            rho_hi.ln(),
            0.0,
            1e-12,
        )?;
        total += body;
    }
    let tail_from = start.max(rho_hi);
    total += a * tail_from.powf(2.0 * s - two_l - 2.0) / (two_l + 2.0 - 2.0 * s);
    Ok(total)
}

fn check_fractional(s: f64) -> Result<()> {
    if !(s > 0.0) || s.fract() == 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "s = {s} must be positive and non-integer"
        )));
    }
    Ok(())
}

/// The comparison at `(s, R)` together with both inequalities, with the
/// constants `K_s = ||f_nu||_{L^1} / 4^{s+1}` and
/// `||u||_s^2 <= (value(R) + R^{2 nu} ||u||_{[s]}^2 / (nu 4^{[s]+1})) / K_s`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonReport {
    pub s: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub integral: f64,
    pub hs_sq: f64,
    pub ratio: f64,
    pub expected_ratio: f64,
    pub lower_bound_holds: bool,
    pub upper_bound: f64,
    pub upper_bound_holds: bool,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds
    }
}

pub fn compare(u: &GridFunction, s: f64, r: f64) -> Result<ComparisonReport> {
    let integral = comparison_integral(u, s, r)?;
    let hs_sq = hs_seminorm_sq(u, s);
    let l = s.floor();
    let nu = s - l;
    let k_s = f_nu_l1_norm(nu)? / 4f64.powf(s + 1.0);
    let low_sq = hs_seminorm_sq(u, l);
    let upper_bound = (integral + r.powf(2.0 * nu) * low_sq / (nu * 4f64.powf(l + 1.0))) / k_s;
    let slack = 1e-9 * hs_sq.max(f64::MIN_POSITIVE);
    Ok(ComparisonReport {
        s,
        r,
        integral,
        hs_sq,
        ratio: if hs_sq > 0.0 { integral / hs_sq } else { 0.0 },
        expected_ratio: k_s,
        lower_bound_holds: integral <= k_s * hs_sq + slack,
        upper_bound,
        upper_bound_holds: hs_sq <= upper_bound + slack,
    })
}
