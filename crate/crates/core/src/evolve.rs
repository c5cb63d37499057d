//! Pseudo-spectral evolution of `u_t = i u_xx - (|u|^2 u)_x` on the periodic
//! grid, with conservation monitors.
//!
//! In Fourier variables `u^_t = -i q^2 u^ - i q P N^(u)` where `P` zeroes the
//! modes above `dealias * N/2`. The linear part is integrated exactly and the
//! nonlinear part by the Lawson (integrating-factor) RK4 scheme.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diffpoly::{energy_density, mass_density, momentum_density};
use crate::fft;
use crate::grid::GridFunction;
use crate::hierarchy::{self, EnergyFunctional};
use crate::scattering::{self, SpectralParameter};
use crate::sobolev;
use crate::{Error, Result, C64};

/// Stability limit of classical RK4 on the imaginary axis, rounded down.
const RK4_IMAGINARY_REACH: f64 = 2.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub dealias: f64,
    pub monitor_stride: usize,
    /// Write a binary snapshot every this many steps.
    pub snapshot_stride: Option<usize>,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_final: 10.0,
            dealias: 2.0 / 3.0,
            monitor_stride: 100,
            snapshot_stride: None,
            snapshot_dir: None,
        }
    }
}

impl EvolutionConfig {
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        check_dealias(self.dealias)?;
        if self.monitor_stride == 0 {
            return Err(Error::InvalidParameter("monitor_stride must be positive".into()));
        }
        if self.snapshot_stride == Some(0) {
            return Err(Error::InvalidParameter("snapshot_stride must be positive".into()));
        }
        Ok(())
    }
}

fn check_dealias(dealias: f64) -> Result<()> {
    if !(dealias > 0.0 && dealias <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dealias = {dealias} must lie in (0, 1]"
        )));
    }
    Ok(())
}

/// Largest stable `|dt|` for the nonlinear stage, from the linearization
/// `|d/du (-i q |u|^2 u)| <= 3 max|u|^2 q_max` and the RK4 stability reach.
pub fn stability_bound(u: &GridFunction, dealias: f64) -> f64 {
    let amp = u.max_abs().powi(2);
    let q_max = std::f64::consts::PI * u.len() as f64 / u.domain_length() * dealias;
    if amp == 0.0 {
        return f64::INFINITY;
    }
    RK4_IMAGINARY_REACH / (3.0 * amp * q_max)
}

/// Precomputed multipliers for a fixed grid, step and dealiasing fraction.
#[derive(Clone, Debug)]
pub struct Stepper {
    n: usize,
    domain_length: f64,
    dt: f64,
    /// `exp(-i q^2 dt / 2)`
    half: Vec<C64>,
    /// `-i q` on retained modes, zero elsewhere
    deriv: Vec<C64>,
}

impl Stepper {
    pub fn new(n: usize, domain_length: f64, dt: f64, dealias: f64) -> Result<Self> {
        check_dealias(dealias)?;
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("dt = {dt}")));
        }
        let q = crate::grid::wavenumbers(n, domain_length);
        let cutoff = dealias * (n / 2) as f64;
        let half = q.iter().map(|&k| C64::from_polar(1.0, -k * k * dt / 2.0)).collect();
        let deriv = (0..n)
            .map(|i| {
                let m = fft::mode_index(i, n);
                if (m.unsigned_abs() as f64) > cutoff || m == -((n / 2) as i64) {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, -q[i])
                }
            })
            .collect();
        Ok(Stepper {
            n,
            domain_length,
            dt,
            half,
            deriv,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `-i q P F(|u|^2 u)` for the state given by its unnormalized transform.
    fn nonlinear(&self, hat: &[C64]) -> Vec<C64> {
        let mut v = hat.to_vec();
        fft::inverse(&mut v);
        let inv = 1.0 / self.n as f64;
        v.iter_mut().for_each(|z| {
            *z *= inv;
            *z *= z.norm_sqr();
        });
        fft::forward(&mut v);
        v.iter().zip(&self.deriv).map(|(a, b)| a * b).collect()
    }

    /// One Lawson RK4 step on the unnormalized transform.
    pub fn advance(&self, hat: &mut [C64]) {
        let h = self.dt;
        let e = &self.half;
        let n = self.n;
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        let k1 = self.nonlinear(hat);
        for i in 0..n {
            tmp[i] = e[i] * (hat[i] + k1[i] * (h / 2.0));
        }
        let k2 = self.nonlinear(&tmp);
        for i in 0..n {
            tmp[i] = e[i] * hat[i] + k2[i] * (h / 2.0);
        }
        let k3 = self.nonlinear(&tmp);
        for i in 0..n {
            tmp[i] = e[i] * e[i] * hat[i] + e[i] * k3[i] * h;
        }
        let k4 = self.nonlinear(&tmp);
        for i in 0..n {
            let e2 = e[i] * e[i];
            hat[i] = e2 * hat[i]
                + (e2 * k1[i] + e[i] * (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }

    fn check(&self, hat: &[C64], t: f64) -> Result<()> {
        if hat.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Stability(format!("non-finite state at t = {t:.6}")));
        }
        Ok(())
    }

    fn to_grid(&self, hat: &[C64]) -> Result<GridFunction> {
        let mut v = hat.to_vec();
        fft::inverse(&mut v);
        let inv = 1.0 / self.n as f64;
        v.iter_mut().for_each(|z| *z *= inv);
        GridFunction::new(v, self.domain_length)
    }
}

/// Pre-flight check: `|dt|` against [`stability_bound`].
pub fn preflight(u: &GridFunction, dt: f64, dealias: f64) -> Result<()> {
    let bound = stability_bound(u, dealias);
    if dt.abs() > bound {
        return Err(Error::Stability(format!(
            "dt = {dt:e} exceeds the stability bound {bound:.3e}"
        )));
    }
    Ok(())
}

/// One step of size `dt` (negative steps run backwards).
pub fn step(u: &GridFunction, dt: f64, dealias: f64) -> Result<GridFunction> {
    preflight(u, dt, dealias)?;
    let stepper = Stepper::new(u.len(), u.domain_length(), dt, dealias)?;
    let mut hat = u.values().to_vec();
    fft::forward(&mut hat);
    stepper.advance(&mut hat);
    stepper.check(&hat, dt)?;
    stepper.to_grid(&hat)
}

/// `steps` steps of size `dt`.
pub fn propagate(u: &GridFunction, dt: f64, steps: usize, dealias: f64) -> Result<GridFunction> {
    preflight(u, dt, dealias)?;
    let stepper = Stepper::new(u.len(), u.domain_length(), dt, dealias)?;
    let mut hat = u.values().to_vec();
    fft::forward(&mut hat);
    for s in 0..steps {
        stepper.advance(&mut hat);
        if s % 64 == 63 {
            stepper.check(&hat, (s + 1) as f64 * dt)?;
        }
    }
    stepper.check(&hat, steps as f64 * dt)?;
    stepper.to_grid(&hat)
}

/// Quantities recorded along a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Monitor {
    /// `int |u|^2`
    Mass,
    /// `int Im(ubar u_x) + |u|^4 / 2`
    Momentum,
    /// `int |u_x|^2 - (3/2) Im(|u|^2 u ubar_x) + |u|^6 / 2`
    Energy,
    /// `E_j(u)` from the hierarchy.
    Hierarchy(usize),
    /// `a_u(lambda)` for the given `lambda^2`.
    Transmission(C64),
    /// `phi_L(u, rho)`.
    Phi { rho: f64, l: u32 },
    /// Homogeneous seminorm `||u||_{H^s dot}`.
    Seminorm(f64),
    /// Inhomogeneous norm `||u||_{H^s}`.
    SobolevNorm(f64),
}

impl Monitor {
    pub fn name(&self) -> String {
        match self {
            Monitor::Mass => "M".into(),
            Monitor::Momentum => "P".into(),
            Monitor::Energy => "E".into(),
            Monitor::Hierarchy(j) => format!("E_{j}"),
            Monitor::Transmission(l) => format!("a({}{:+}i)", l.re, l.im),
            Monitor::Phi { rho, l } => format!("phi_{l}({rho})"),
            Monitor::Seminorm(s) => format!("Hdot_{s}"),
            Monitor::SobolevNorm(s) => format!("H_{s}"),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Monitor::Hierarchy(_) | Monitor::Transmission(_))
    }

    /// Parses `M`, `P`, `E`, `E_j`, `a_u` (one per `lambda_sq`), `phi_L`
    /// (one per `rho`), `hdot_s` and `h_s`.
    pub fn parse(spec: &str, lambda_sq: &[C64], rho: &[f64]) -> Result<Vec<Monitor>> {
        let bad = || Error::InvalidParameter(format!("unknown monitor '{spec}'"));
        let lower = spec.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "m" | "mass" => vec![Monitor::Mass],
            "p" | "momentum" => vec![Monitor::Momentum],
            "e" | "energy" => vec![Monitor::Energy],
            "a_u" | "a" => {
                if lambda_sq.is_empty() {
                    return Err(Error::InvalidParameter("monitor a_u needs --lambda-sq".into()));
                }
                lambda_sq.iter().map(|&l| Monitor::Transmission(l)).collect()
            }
            _ => {
                if let Some(j) = lower.strip_prefix("e_") {
                    vec![Monitor::Hierarchy(j.parse().map_err(|_| bad())?)]
                } else if let Some(l) = lower.strip_prefix("phi_") {
                    if rho.is_empty() {
                        return Err(Error::InvalidParameter("monitor phi_L needs --rho".into()));
                    }
                    let l: u32 = l.parse().map_err(|_| bad())?;
                    rho.iter().map(|&r| Monitor::Phi { rho: r, l }).collect()
                } else if let Some(s) = lower.strip_prefix("hdot_") {
                    vec![Monitor::Seminorm(s.parse().map_err(|_| bad())?)]
                } else if let Some(s) = lower.strip_prefix("h_") {
                    vec![Monitor::SobolevNorm(s.parse().map_err(|_| bad())?)]
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// Monitors with their resolved ingredients.
struct Resolved {
    monitors: Vec<Monitor>,
    energies: Vec<EnergyFunctional>,
    lambdas: Vec<Option<SpectralParameter>>,
}

impl Resolved {
    fn new(monitors: &[Monitor]) -> Result<Self> {
        let mut j_max = None::<usize>;
        let mut lambdas = Vec::new();
        for m in monitors {
            let need = match m {
                Monitor::Hierarchy(j) => Some(*j),
                Monitor::Phi { l, rho } => {
                    if !(*rho > 0.0) {
                        return Err(Error::InvalidParameter(format!("rho = {rho}")));
                    }
                    Some(2 * *l as usize + 1)
                }
                _ => None,
            };
            if let Some(j) = need {
                let cap = hierarchy::shared().cap();
                if j > cap {
                    return Err(Error::Index { j, cap });
                }
                j_max = Some(j_max.map_or(j, |m: usize| m.max(j)));
            }
            lambdas.push(match m {
                Monitor::Transmission(l) => Some(SpectralParameter::from_lambda_sq(*l)?),
                _ => None,
            });
        }
        let energies = match j_max {
            Some(j) => hierarchy::energies(j)?,
            None => Vec::new(),
        };
        Ok(Resolved {
            monitors: monitors.to_vec(),
            energies,
            lambdas,
        })
    }

    fn evaluate(&self, u: &GridFunction) -> Result<Vec<C64>> {
        self.monitors
            .iter()
            .zip(&self.lambdas)
            .map(|(m, lam)| {
                Ok(match m {
                    Monitor::Mass => C64::new(mass_density().evaluate(u)?.re, 0.0),
                    Monitor::Momentum => C64::new(momentum_density().evaluate(u)?.re, 0.0),
                    Monitor::Energy => C64::new(energy_density().evaluate(u)?.re, 0.0),
                    Monitor::Hierarchy(j) => self.energies[*j].evaluate(u)?,
                    Monitor::Transmission(_) => {
                        scattering::jost_transmission(u, lam.as_ref().expect("resolved"))?
                    }
                    Monitor::Phi { rho, l } => {
                        C64::new(sobolev::phi_with(u, *rho, *l, &self.energies)?, 0.0)
                    }
                    Monitor::Seminorm(s) => C64::new(sobolev::hs_seminorm(u, *s), 0.0),
                    Monitor::SobolevNorm(s) => C64::new(sobolev::hs_norm_sq(u, *s).sqrt(), 0.0),
                })
            })
            .collect()
    }
}

/// A recorded monitor: real monitors leave `im` empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorColumn {
    pub name: String,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl MonitorColumn {
    pub fn is_complex(&self) -> bool {
        !self.im.is_empty()
    }

    pub fn value(&self, i: usize) -> C64 {
        C64::new(self.re[i], self.im.get(i).copied().unwrap_or(0.0))
    }

    /// `max_t |v(t) - v(0)| / |v(0)|`.
    pub fn relative_drift(&self) -> f64 {
        let v0 = self.value(0);
        (0..self.re.len())
            .map(|i| (self.value(i) - v0).norm())
            .fold(0.0, f64::max)
            / v0.norm()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub times: Vec<f64>,
    pub monitors: Vec<MonitorColumn>,
    /// Monitor times at which `u` was not negligible at the box edges.
    #[serde(default)]
    pub edge_warnings: Vec<f64>,
}

impl MonitorSeries {
    fn with_monitors(monitors: &[Monitor]) -> Self {
        MonitorSeries {
            times: Vec::new(),
            monitors: monitors
                .iter()
                .map(|m| MonitorColumn {
                    name: m.name(),
                    re: Vec::new(),
                    im: Vec::new(),
                })
                .collect(),
            edge_warnings: Vec::new(),
        }
    }

    fn record(&mut self, t: f64, values: &[C64], complex: &[bool]) {
        self.times.push(t);
        for ((col, v), &c) in self.monitors.iter_mut().zip(values).zip(complex) {
            col.re.push(v.re);
            if c {
                col.im.push(v.im);
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&MonitorColumn> {
        self.monitors.iter().find(|c| c.name == name)
    }

    /// Column-wise map `name -> values`, with complex monitors split into
    /// `name_re` / `name_im`.
    pub fn columns(&self) -> BTreeMap<String, &[f64]> {
        let mut out = BTreeMap::new();
        for c in &self.monitors {
            if c.is_complex() {
                out.insert(format!("{}_re", c.name), c.re.as_slice());
                out.insert(format!("{}_im", c.name), c.im.as_slice());
            } else {
                out.insert(c.name.clone(), c.re.as_slice());
            }
        }
        out
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for c in &self.monitors {
            if c.is_complex() {
                header.push(format!("{}_re", c.name));
                header.push(format!("{}_im", c.name));
            } else {
                header.push(c.name.clone());
            }
        }
        wr.write_record(&header)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:e}")];
            for c in &self.monitors {
                row.push(format!("{:e}", c.re[i]));
                if c.is_complex() {
                    row.push(format!("{:e}", c.im[i]));
                }
            }
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Runs `u0` to `cfg.t_final`, recording `monitors` at `t = 0` and every
/// `cfg.monitor_stride` steps (and at the final time).
pub fn evolve(u0: &GridFunction, cfg: &EvolutionConfig, monitors: &[Monitor]) -> Result<MonitorSeries> {
    evolve_with(u0, cfg, monitors, |_, _| Ok(()))
}

/// [`evolve`] calling `observe(t, u)` at every monitor time.
pub fn evolve_with(
    u0: &GridFunction,
    cfg: &EvolutionConfig,
    monitors: &[Monitor],
    mut observe: impl FnMut(f64, &GridFunction) -> Result<()>,
) -> Result<MonitorSeries> {
    cfg.validate()?;
    preflight(u0, cfg.dt, cfg.dealias)?;
    let resolved = Resolved::new(monitors)?;
    let complex: Vec<bool> = monitors.iter().map(Monitor::is_complex).collect();
    let stepper = Stepper::new(u0.len(), u0.domain_length(), cfg.dt, cfg.dealias)?;
    let mut series = MonitorSeries::with_monitors(monitors);
    let steps = cfg.steps();
    let mut hat = u0.values().to_vec();
    fft::forward(&mut hat);

    let mut sample = |t: f64, u: &GridFunction, series: &mut MonitorSeries| -> Result<()> {
        if !u.check_edges() {
            series.edge_warnings.push(t);
        }
        let values = resolved.evaluate(u)?;
        series.record(t, &values, &complex);
        observe(t, u)
    };
    sample(0.0, u0, &mut series)?;
    write_snapshot(cfg, 0, u0)?;

    for s in 1..=steps {
        stepper.advance(&mut hat);
        let t = s as f64 * cfg.dt;
        let at_monitor = s % cfg.monitor_stride == 0 || s == steps;
        let at_snapshot = cfg.snapshot_stride.is_some_and(|k| s % k == 0);
        if at_monitor || at_snapshot || s % 64 == 0 {
            stepper.check(&hat, t)?;
        }
        if at_monitor || at_snapshot {
            let u = stepper.to_grid(&hat)?;
            if u.max_abs() > 0.0 && cfg.dt > stability_bound(&u, cfg.dealias) {
                return Err(Error::Stability(format!(
                    "amplitude growth at t = {t:.6} pushed dt past the stability bound"
                )));
            }
            if at_monitor {
                sample(t, &u, &mut series)?;
            }
            if at_snapshot {
                write_snapshot(cfg, s, &u)?;
            }
        }
    }
    Ok(series)
}

fn write_snapshot(cfg: &EvolutionConfig, step: usize, u: &GridFunction) -> Result<()> {
    if let (Some(k), Some(dir)) = (cfg.snapshot_stride, cfg.snapshot_dir.as_deref()) {
        if step % k == 0 {
            std::fs::create_dir_all(dir)?;
            u.write_binary(&snapshot_path(dir, step))?;
        }
    }
    Ok(())
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:08}.bin"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let u = GridFunction::zeros(64, 10.0).unwrap();
        let v = step(&u, 1e-2, 2.0 / 3.0).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn monitor_names_parse() {
        let l = [C64::new(0.0, 4.0)];
        let ms = Monitor::parse("a_u", &l, &[]).unwrap();
        assert_eq!(ms, vec![Monitor::Transmission(l[0])]);
        assert_eq!(Monitor::parse("E_3", &[], &[]).unwrap(), vec![Monitor::Hierarchy(3)]);
        assert!(Monitor::parse("phi_1", &[], &[]).is_err());
        assert!(Monitor::parse("bogus", &[], &[]).is_err());
    }
}
