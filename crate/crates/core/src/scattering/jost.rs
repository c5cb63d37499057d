//! Jost integration of the spectral problem `i sigma_3 psi_x = (lambda^2 + i lambda U) psi`.
//!
//! With `psi = e^{-i lambda^2 x} (phi, chi)` the left Jost solution solves
//! `phi' = lambda u chi`, `chi' = 2 i lambda^2 chi - lambda ubar phi`,
//! `(phi, chi) -> (1, 0)` on the left, and `phi -> a_u(lambda)` on the right.
//! The linear part `diag(0, 2 i lambda^2)` is integrated exactly by ETDRK4.

use std::collections::HashMap;

use crate::grid::{GridFunction, EDGE_TOLERANCE};
use crate::scattering::SpectralParameter;
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
pub struct JostOptions {
    /// Target accuracy of `a_u` (absolute, for `|a_u|` of order one).
    pub tol: f64,
    /// Finest allowed subdivision of a grid cell.
    pub max_refinement: usize,
    pub edge_tolerance: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        JostOptions {
            tol: 1e-10,
            max_refinement: 1 << 24,
            edge_tolerance: EDGE_TOLERANCE,
        }
    }
}

/// `phi_k(z) = sum_n z^n / (n+k)!` for `k = 0..=3`.
fn phi_functions(z: C64) -> [C64; 4] {
    if z.norm() < 1.0 {
        let mut out = [C64::new(0.0, 0.0); 4];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = C64::new(1.0, 0.0);
            for m in 1..=k {
                term /= m as f64;
            }
            let mut sum = term;
            for n in 1..24 {
                term *= z / (n + k) as f64;
                sum += term;
            }
            *o = sum;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [e, p1, p2, p3]
    }
}

/// Cox-Matthews coefficients for one diagonal entry `c = h L`.
#[derive(Clone, Copy)]
struct Etd {
    e: C64,
    e2: C64,
    q: C64,
    f1: C64,
    f2: C64,
    f3: C64,
}

impl Etd {
    fn new(l: C64, h: f64) -> Self {
        let c = l * h;
        let full = phi_functions(c);
        let half = phi_functions(c * 0.5);
        Etd {
            e: full[0],
            e2: half[0],
            q: half[1] * (0.5 * h),
            f1: (full[1] - full[2] * 3.0 + full[3] * 4.0) * h,
            f2: (full[2] - full[3] * 2.0) * h,
            f3: (full[3] * 4.0 - full[2]) * h,
        }
    }
}

/// Band-limited samples of `u` at `BASE` points per grid cell, with
/// 8-point Lagrange interpolation in between.
struct Sampler {
    base: Vec<C64>,
    /// `quiet_prefix[k]` counts the non-negligible base samples before `k`.
    quiet_prefix: Vec<usize>,
}

const BASE: usize = 64;
const STENCIL: usize = 8;

impl Sampler {
    fn new(u: &GridFunction) -> Result<Self> {
        let base = u.refined(BASE)?.into_values();
        let tiny = 1e-14 * u.max_abs();
        let mut quiet_prefix = Vec::with_capacity(base.len() + 1);
        let mut count = 0;
        quiet_prefix.push(0);
        for z in &base {
            if z.norm() > tiny {
                count += 1;
            }
            quiet_prefix.push(count);
        }
        Ok(Sampler { base, quiet_prefix })
    }

    /// `u` at `pos` units of `1 / per_base` base spacings.
    fn at(&self, pos: usize, per_base: usize) -> C64 {
        let n = self.base.len();
        let (k, rem) = (pos / per_base, pos % per_base);
        if rem == 0 {
            return self.base[k % n];
        }
        let t = rem as f64 / per_base as f64;
        let first = k as i64 - (STENCIL as i64 / 2 - 1);
        let mut s = C64::new(0.0, 0.0);
        for i in 0..STENCIL {
            let xi = i as f64 - (STENCIL / 2 - 1) as f64;
            let mut w = 1.0;
            for j in 0..STENCIL {
                if j != i {
                    let xj = j as f64 - (STENCIL / 2 - 1) as f64;
                    w *= (t - xj) / (xi - xj);
                }
            }
            s += self.base[(first + i as i64).rem_euclid(n as i64) as usize] * w;
        }
        s
    }

    /// Whether `u` is negligible on `[pos, pos + h]` (with a stencil margin).
    fn quiet(&self, pos: usize, h: usize, per_base: usize) -> bool {
        let n = self.base.len();
        let lo = (pos / per_base).saturating_sub(STENCIL);
        let hi = ((pos + h) / per_base + STENCIL + 1).min(n);
        lo >= hi || self.quiet_prefix[hi] == self.quiet_prefix[lo]
    }
}

struct Integrator<'a> {
    lambda: C64,
    sampler: &'a Sampler,
    per_base: usize,
    coeffs: HashMap<usize, [Etd; 2]>,
    unit: f64,
    l2: C64,
}

impl Integrator<'_> {
    fn rhs(&self, w: [C64; 2], pos: usize) -> [C64; 2] {
        let u = self.sampler.at(pos, self.per_base);
        [self.lambda * u * w[1], -self.lambda * u.conj() * w[0]]
    }

    fn coeffs(&mut self, h: usize) -> [Etd; 2] {
        let (unit, l2) = (self.unit, self.l2);
        *self.coeffs.entry(h).or_insert_with(|| {
            let step = h as f64 * unit;
            [Etd::new(C64::new(0.0, 0.0), step), Etd::new(C64::new(0.0, 2.0) * l2, step)]
        })
    }

    fn step(&mut self, w: [C64; 2], pos: usize, h: usize) -> [C64; 2] {
        let k = self.coeffs(h);
        let mid = pos + h / 2;
        let nu = self.rhs(w, pos);
        let a = [0, 1].map(|i| k[i].e2 * w[i] + k[i].q * nu[i]);
        let na = self.rhs(a, mid);
        let b = [0, 1].map(|i| k[i].e2 * w[i] + k[i].q * na[i]);
        let nb = self.rhs(b, mid);
        let c = [0, 1].map(|i| k[i].e2 * a[i] + k[i].q * (nb[i] * 2.0 - nu[i]));
        let nc = self.rhs(c, pos + h);
        [0, 1].map(|i| {
            k[i].e * w[i] + k[i].f1 * nu[i] + k[i].f2 * 2.0 * (na[i] + nb[i]) + k[i].f3 * nc[i]
        })
    }
}

enum Outcome {
    Done(C64),
    NeedFiner,
}

/// One sweep with `refinement` units per grid cell. Where `u` is not
/// negligible, steps keep `|2 lambda^2 h| <= 1`: for larger steps the
/// scheme loses its order on the coupled slow component.
fn integrate(
    u: &GridFunction,
    sampler: &Sampler,
    lambda: &SpectralParameter,
    refinement: usize,
    tol: f64,
) -> Result<Outcome> {
    let total = u.len() * refinement;
    let unit = u.dx() / refinement as f64;
    let per_base = refinement / BASE;
    let mut it = Integrator {
        lambda: lambda.lambda(),
        sampler,
        per_base,
        coeffs: HashMap::new(),
        unit,
        l2: lambda.lambda_sq(),
    };
    let min_h = 4;
    let max_h = 64 * refinement;
    let mut stiff_cap = max_h;
    while stiff_cap > min_h && stiff_cap as f64 * unit * 2.0 * lambda.lambda_sq().norm() > 1.0 {
        stiff_cap /= 2;
    }
    let mut h = stiff_cap.min(refinement);
    let mut pos = 0usize;
    let mut w = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    while pos < total {
        while h > total - pos && h > min_h {
            h /= 2;
        }
        if h > stiff_cap && !sampler.quiet(pos, h, per_base) {
            h = stiff_cap;
        }
        let full = it.step(w, pos, h);
        let half = it.step(w, pos, h / 2);
        let two = it.step(half, pos + h / 2, h / 2);
        let err = (two[0] - full[0]).norm().max((two[1] - full[1]).norm()) / 15.0;
        let scale = w[0].norm().max(1.0);
        let allowed = scale * (tol * h as f64 / total as f64).max(1e-16);
        if !err.is_finite() {
            return Err(Error::Stiffness {
                x: u.x(0) + pos as f64 * unit,
                step: h as f64 * unit,
            });
        }
        if err <= allowed {
            for i in 0..2 {
                w[i] = two[i] + (two[i] - full[i]) / 15.0;
            }
            pos += h;
            if err < allowed / 40.0 && h < max_h {
                h *= 2;
            }
        } else if h > min_h {
            h /= 2;
        } else {
            return Ok(Outcome::NeedFiner);
        }
    }
    Ok(Outcome::Done(w[0]))
}

/// `a_u(lambda)` from the left Jost solution.
pub fn jost_transmission_with(
    u: &GridFunction,
    lambda: &SpectralParameter,
    opts: &JostOptions,
) -> Result<C64> {
    if u.is_zero() {
        return Ok(C64::new(1.0, 0.0));
    }
    let ratio = u.edge_ratio();
    if ratio >= opts.edge_tolerance {
        return Err(Error::Decay { ratio });
    }
    let sampler = Sampler::new(u)?;
    // enough units per cell for at least 16 units per stiff step
    let need = 32.0 * lambda.lambda_sq().norm() * u.dx();
    let mut refinement = BASE.max((need.ceil() as usize).next_power_of_two());
    loop {
        match integrate(u, &sampler, lambda, refinement, opts.tol)? {
            Outcome::Done(a) => return Ok(a),
            Outcome::NeedFiner if refinement * 4 <= opts.max_refinement => refinement *= 4,
            Outcome::NeedFiner => {
                return Err(Error::Stiffness {
                    x: f64::NAN,
                    step: u.dx() / refinement as f64,
                })
            }
        }
    }
}

pub fn jost_transmission(u: &GridFunction, lambda: &SpectralParameter) -> Result<C64> {
    jost_transmission_with(u, lambda, &JostOptions::default())
}

/// `ln a_u(lambda)` on the branch fixed by `ln a_u -> -i ||u||^2 / 2` as
/// `|lambda| -> infinity`, continued along the ray through `lambda^2`.
pub fn log_transmission_with(
    u: &GridFunction,
    lambda: &SpectralParameter,
    opts: &JostOptions,
) -> Result<C64> {
    if u.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let limit = C64::new(0.0, -0.5 * u.l2_norm_sq());
    let at = |s: f64| -> Result<C64> {
        let p = SpectralParameter::from_lambda_sq(lambda.lambda_sq() * s)?;
        jost_transmission_with(u, &p, opts)
    };
    // climb until a_u is close to its limit
    let mut s_top = 1.0;
    let mut a_top = at(s_top)?;
    while (a_top * (-limit).exp() - 1.0).norm() >= 0.25 {
        s_top *= 4.0;
        if s_top * lambda.lambda_sq().norm() > 1e8 {
            return Err(Error::Branch(format!(
                "a_u does not approach its limit along the ray through {}",
                lambda.lambda_sq()
            )));
        }
        a_top = at(s_top)?;
    }
    let mut log_a = limit + (a_top * (-limit).exp()).ln();
    let (mut s, mut a) = (s_top, a_top);
    while s > 1.0 {
        let mut ratio = 2.0f64.min(s);
        let mut depth = 0;
        loop {
            let next = at(s / ratio)?;
            if next.norm() < 1e-8 {
                return Err(Error::Branch(format!(
                    "|a_u| = {:.2e} too close to zero at lambda^2 = {}",
                    next.norm(),
                    lambda.lambda_sq() * (s / ratio)
                )));
            }
            let d = (next / a).ln();
            if d.im.abs() < std::f64::consts::FRAC_PI_4 {
                log_a += d;
                a = next;
                s /= ratio;
                break;
            }
            depth += 1;
            if depth > 12 {
                return Err(Error::Branch(
                    "phase of a_u varies too fast along the ray".into(),
                ));
            }
            ratio = ratio.sqrt();
        }
    }
    Ok(log_a)
}

pub fn log_transmission(u: &GridFunction, lambda: &SpectralParameter) -> Result<C64> {
    log_transmission_with(u, lambda, &JostOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_functions_continuous_at_switch() {
        let z = C64::new(0.6, 0.8);
        let a = phi_functions(z * 0.999_999);
        let b = phi_functions(z * 1.000_001);
        for k in 0..4 {
            assert!((a[k] - b[k]).norm() < 1e-5);
        }
        let small = phi_functions(C64::new(0.0, 0.0));
        assert!((small[3] - 1.0 / 6.0).norm() < 1e-15);
    }
}
