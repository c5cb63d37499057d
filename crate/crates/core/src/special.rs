//! Special functions needed by the operator tails.

use crate::C64;

/// Complex digamma function via upward recurrence and the asymptotic series.
pub fn digamma(z: C64) -> C64 {
    let mut z = z;
    let mut acc = C64::new(0.0, 0.0);
    while z.re < 12.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    // Bernoulli terms B_{2k} / (2k z^{2k})
    let series = w2
        * (1.0 / 12.0
            - w2 * (1.0 / 120.0
                - w2 * (1.0 / 252.0
                    - w2 * (1.0 / 240.0
                        - w2 * (1.0 / 132.0 - w2 * (691.0 / 32760.0 - w2 / 12.0))))));
    acc + z.ln() - w * 0.5 - series
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((digamma(C64::new(1.0, 0.0)).re + euler_gamma).abs() < 1e-14);
        let half = digamma(C64::new(0.5, 0.0));
        assert!((half.re + euler_gamma + 2.0 * 2f64.ln()).abs() < 1e-14);
        // Im psi(1 + i y) = -1/(2y) + (pi/2) coth(pi y)
        let y = 3.0f64;
        let v = digamma(C64::new(1.0, y));
        let expect = -0.5 / y + 0.5 * std::f64::consts::PI / (std::f64::consts::PI * y).tanh();
        assert!((v.im - expect).abs() < 1e-14);
    }

    #[test]
    fn recurrence_holds_far_left() {
        let z = C64::new(-250.3, 7.0);
        let lhs = digamma(z + 1.0) - digamma(z);
        assert!((lhs - z.inv()).norm() < 1e-12);
    }
}
