//! Periodic grid functions and their spectral calculus.
//!
//! Samples sit at `x_n = -L/2 + n L/N`. Fourier coefficients are
//! `c_m = (1/N) sum_n u_n e^{-2 pi i m n / N}` in FFT slot order, so that
//! `u(x) = sum_m c_m e^{i q_m (x + L/2)}` with `q_m = 2 pi m / L`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::fft;
use crate::{Error, Result, C64};

const MAGIC: &[u8; 4] = b"DNLS";
const VERSION: u32 = 1;

/// Relative edge magnitude above which a profile no longer models a
/// rapidly decaying function.
pub const EDGE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<C64>,
    domain_length: f64,
}

impl GridFunction {
    pub fn new(values: Vec<C64>, domain_length: f64) -> Result<Self> {
        let n = values.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N = {n} must be a power of two and at least 8"
            )));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain length {domain_length} must be positive"
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(GridFunction {
            values,
            domain_length,
        })
    }

    pub fn from_fn(n: usize, domain_length: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let dx = domain_length / n as f64;
        let values = (0..n)
            .map(|k| f(-0.5 * domain_length + k as f64 * dx))
            .collect();
        Self::new(values, domain_length)
    }

    pub fn zeros(n: usize, domain_length: f64) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); n], domain_length)
    }

    /// Rebuilds a grid function from coefficients in FFT slot order.
    pub fn from_coefficients(coeffs: &[C64], domain_length: f64) -> Result<Self> {
        let mut v = coeffs.to_vec();
        fft::inverse(&mut v);
        Self::new(v, domain_length)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.len() as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -0.5 * self.domain_length + k as f64 * self.dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest edge sample relative to the largest sample (0 for u = 0).
    pub fn edge_ratio(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let n = self.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / m
    }

    /// Logs a warning when the profile is not negligible at the edges.
    pub fn check_edges(&self) -> bool {
        let r = self.edge_ratio();
        if r >= EDGE_TOLERANCE {
            log::warn!("grid function not negligible at the domain edge: edge/max = {r:.3e}");
            false
        } else {
            true
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v.conj()).collect(),
            domain_length: self.domain_length,
        }
    }

    pub fn scaled(&self, a: C64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * a).collect(),
            domain_length: self.domain_length,
        }
    }

    /// The spatial part of the scaling `u -> sqrt(mu) u(mu x)`. Samples are
    /// exact: the domain shrinks by `mu` and amplitudes grow by `sqrt(mu)`.
    pub fn rescaled(&self, mu: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * mu.sqrt()).collect(),
            domain_length: self.domain_length / mu,
        }
    }

    /// Fourier coefficients in FFT slot order.
    pub fn coefficients(&self) -> Vec<C64> {
        let mut c = self.values.clone();
        fft::forward(&mut c);
        let inv = 1.0 / self.len() as f64;
        c.iter_mut().for_each(|z| *z *= inv);
        c
    }

    /// Angular wavenumbers `q_m = 2 pi m / L` in FFT slot order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        wavenumbers(self.len(), self.domain_length)
    }

    /// `d^order u / dx^order` by spectral differentiation (Nyquist mode dropped).
    pub fn derivative(&self, order: u32) -> Vec<C64> {
        if order == 0 {
            return self.values.clone();
        }
        let n = self.len();
        let mut c = self.values.clone();
        fft::forward(&mut c);
        let q = self.wavenumbers();
        let inv = 1.0 / n as f64;
        for (k, z) in c.iter_mut().enumerate() {
            if k == n / 2 {
                *z = C64::new(0.0, 0.0);
            } else {
                *z *= C64::new(0.0, q[k]).powu(order) * inv;
            }
        }
        fft::inverse(&mut c);
        c
    }

    /// `dx * sum_n f_n`, the periodic trapezoidal integral of samples.
    pub fn integrate(&self, f: &[C64]) -> C64 {
        f.iter().sum::<C64>() * self.dx()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    /// Band-limited interpolant sampled on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<GridFunction> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "refinement factor {factor} must be a power of two"
            )));
        }
        let n = self.len();
        let m = n * factor;
        let c = self.coefficients();
        let mut padded = vec![C64::new(0.0, 0.0); m];
        for (k, z) in c.iter().enumerate() {
            let mode = fft::mode_index(k, n);
            if mode == -((n / 2) as i64) {
                // split the Nyquist coefficient symmetrically
                padded[n / 2] += z * 0.5;
                padded[m - n / 2] += z * 0.5;
            } else {
                padded[fft::slot(mode, m).expect("mode fits")] = *z;
            }
        }
        fft::inverse(&mut padded);
        GridFunction::new(padded, self.domain_length)
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.domain_length.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, expected DNLS".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n > (1 << 28) {
            return Err(Error::Format(format!("implausible length {n}")));
        }
        r.read_exact(&mut b8)?;
        let domain_length = f64::from_le_bytes(b8);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            values.push(C64::new(re, f64::from_le_bytes(b8)));
        }
        Self::new(values, domain_length)
    }

    /// Reads `re,im` rows (an optional header line is skipped).
    pub fn read_csv(path: &Path, domain_length: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Format(format!("line {}: expected re,im", line + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(re), Ok(im)) => values.push(C64::new(re, im)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Format(format!(
                        "line {}: cannot parse '{},{}'",
                        line + 1,
                        &rec[0],
                        &rec[1]
                    )))
                }
            }
        }
        Self::new(values, domain_length)
    }
}

pub fn wavenumbers(n: usize, domain_length: f64) -> Vec<f64> {
    let k0 = 2.0 * std::f64::consts::PI / domain_length;
    (0..n).map(|k| k0 * fft::mode_index(k, n) as f64).collect()
}
