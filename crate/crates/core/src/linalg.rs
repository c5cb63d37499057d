//! Banded complex matrices: products, traces and LU log-determinants.

use crate::{Error, Result, C64};

/// Square matrix with `lower` subdiagonals and `upper` superdiagonals,
/// stored row by row (`width = lower + upper + 1` slots per row).
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<C64>,
}

impl Banded {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(n.saturating_sub(1));
        let upper = upper.min(n.saturating_sub(1));
        Banded {
            n,
            lower,
            upper,
            data: vec![C64::new(0.0, 0.0); n * (lower + upper + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    /// Column range `[lo, hi)` stored for row `i`.
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.lower), (i + self.upper + 1).min(self.n))
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.lower < i || j > i + self.upper {
            C64::new(0.0, 0.0)
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.lower >= i && j <= i + self.upper, "outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self.row_range(i);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &Banded) -> Banded {
        assert_eq!(self.n, other.n);
        let mut out = Banded::zeros(self.n, self.lower + other.lower, self.upper + other.upper);
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for k in lo..hi {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let (lo2, hi2) = other.row_range(k);
                for j in lo2..hi2 {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_of_product(&self, other: &Banded) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for k in lo..hi {
                t += self.get(i, k) * other.get(k, i);
            }
        }
        t
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `I - A`.
    pub fn identity_minus(&self) -> Banded {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = -*z);
        for i in 0..self.n {
            let v = out.get(i, i) + 1.0;
            out.set(i, i, v);
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `ln det` by LU with partial pivoting inside the band. The imaginary
    /// part is the sum of pivot arguments (plus `pi` per row swap), so it is
    /// only defined modulo `2 pi`.
    pub fn log_det(&self) -> Result<C64> {
        let n = self.n;
        let kl = self.lower;
        let ku = self.upper + kl; // room for fill-in from pivoting
        let w = kl + ku + 1;
        let mut a = vec![C64::new(0.0, 0.0); n * w];
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        for i in 0..n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                a[at(i, j)] = self.get(i, j);
            }
        }
        let mut log_det = C64::new(0.0, 0.0);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            let mut best = a[at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = a[at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "singular banded matrix at pivot {k}"
                )));
            }
            if p != k {
                for j in k..=last_col {
                    a.swap(at(k, j), at(p, j));
                }
                log_det += C64::new(0.0, std::f64::consts::PI);
            }
            let pivot = a[at(k, k)];
            log_det += pivot.ln();
            for i in k + 1..=last_row {
                let f = a[at(i, k)] / pivot;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let v = a[at(k, j)];
                    a[at(i, j)] -= f * v;
                }
            }
        }
        Ok(log_det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> Banded {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut b = Banded::zeros(n, kl, ku);
        for i in 0..n {
            let (lo, hi) = b.row_range(i);
            for j in lo..hi {
                b.set(i, j, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        b
    }

    #[test]
    fn log_det_matches_dense_lu() {
        let b = random_banded(40, 3, 5, 7);
        let dense = b.to_dense();
        let det = dense.lu().determinant();
        let ld = b.log_det().unwrap();
        assert!((ld.exp() - det).norm() < 1e-9 * det.norm());
    }

    #[test]
    fn product_and_traces() {
        let a = random_banded(30, 2, 1, 1);
        let b = random_banded(30, 1, 4, 2);
        let p = a.mul(&b);
        let dense = a.to_dense() * b.to_dense();
        for i in 0..30 {
            for j in 0..30 {
                assert!((p.get(i, j) - dense[(i, j)]).norm() < 1e-12);
            }
        }
        assert!((a.trace_of_product(&b) - dense.trace()).norm() < 1e-12);
        let x: Vec<C64> = (0..30).map(|k| C64::new(k as f64, 1.0)).collect();
        let y = a.matvec(&x);
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..30 {
            assert!((y[i] - yd[i]).norm() < 1e-12);
        }
    }
}
