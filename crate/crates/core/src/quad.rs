//! Adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use crate::{Error, Result, C64};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Integral of `f` over `[a, b]` to absolute accuracy `abs_tol` or relative
/// accuracy `rel_tol`, whichever is looser.
pub fn integrate(
    mut f: impl FnMut(f64) -> C64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<C64> {
    const MAX_INTERVALS: usize = 20_000;
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: C64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}]: error estimate {err:.3e}"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature(format!(
                "interval collapsed near {mid} with error {err:.3e}"
            )));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Integral over the whole real line via `s = t / (1 - t^2)`.
pub fn integrate_line(
    mut f: impl FnMut(f64) -> C64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<C64> {
    integrate(
        |t| {
            let d = 1.0 - t * t;
            let s = t / d;
            f(s) * ((1.0 + t * t) / (d * d))
        },
        -1.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Real integral over `[a, b]`.
pub fn integrate_real(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    integrate(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol).map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_real(|x| x.powi(6), 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - 128.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_on_line() {
        let v = integrate_line(|s| C64::new(1.0 / (1.0 + s * s), 0.0), 1e-13, 1e-13).unwrap();
        assert!((v.re - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // integrable x^{-1/2} singularity at 0
        let v = integrate_real(|x| x.powf(-0.5), 0.0, 1.0, 1e-11, 1e-11).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
}
