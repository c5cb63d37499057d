//! The conserved functionals `E_j` as exact differential polynomials.
//!
//! `E_j = sum_{k=1}^{j+1} mu_{j,k}`. The quadratic term `mu_{j,1}` has the
//! closed form `i (-i)^j / (-2)^{j+1} ubar d^j u`; higher terms come from
//! the antidiagonal resolvent parts `R^a_{j,k-1}` and exact residues of
//! their `p`-polynomials.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{self, Coeff};
use crate::diffpoly::{DiffMonomial, DiffPolynomial, Factor};
use crate::grid::GridFunction;
use crate::resolvent::{Kind, PPoly, ResolventTable, DEFAULT_CAP};
use crate::{Error, Result, C64};

/// An exact complex multiple of `pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiMultiple(pub Coeff);

impl PiMultiple {
    pub fn to_c64(&self) -> C64 {
        coeff::to_c64(&self.0) * std::f64::consts::PI
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `int P(p) / (p^2 - 1)^{j+1} dp` along a line through the origin at angle
/// `-theta`, `theta in (0, pi)`, traversed in the direction `e^{-i theta}`.
///
/// The value does not depend on `theta`: the pole at `p = 1` lies to the
/// left of the line, so the integral is `2 pi i Res_{p=1}`.
pub fn p_integral(p: &PPoly, j: usize) -> Result<PiMultiple> {
    let deg = match p.degree() {
        None => return Ok(PiMultiple(Coeff::zero())),
        Some(d) => d,
    };
    if deg > 2 * j {
        return Err(Error::Degree {
            degree: deg,
            power: j + 1,
        });
    }
    // Res_{p=1} = [t^j] P(1+t) (2+t)^{-(j+1)}
    let a = p.coeffs();
    let shifted: Vec<Coeff> = (0..=deg)
        .map(|n| {
            (n..=deg).fold(Coeff::zero(), |acc, m| {
                acc + coeff::scale(&a[m], &BigRational::from_integer(binomial(m as u64, n as u64)))
            })
        })
        .collect();
    let mut res = Coeff::zero();
    for (n, sn) in shifted.iter().enumerate().take(j + 1) {
        let t = (j - n) as u64;
        // coefficient of t^t in (2+t)^{-(j+1)}
        let mut c = BigRational::from_integer(binomial(j as u64 + t, t));
        c /= BigRational::from_integer(BigInt::from(2).pow((j as u32) + 1 + t as u32));
        if t % 2 == 1 {
            c = -c;
        }
        res = res + coeff::scale(sn, &c);
    }
    Ok(PiMultiple(res * coeff::from_ints(0, 2)))
}

/// `mu_{j,k}` together with its indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MuCoefficient {
    pub j: usize,
    pub k: usize,
    pub density: DiffPolynomial,
}

impl MuCoefficient {
    pub fn evaluate(&self, u: &GridFunction) -> Result<C64> {
        self.density.evaluate(u)
    }
}

/// An `E_j` density with the `(j, k)` pairs that contributed to it.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyFunctional {
    pub j: usize,
    pub density: DiffPolynomial,
    pub provenance: Vec<(usize, usize)>,
}

impl EnergyFunctional {
    pub fn evaluate(&self, u: &GridFunction) -> Result<C64> {
        self.density.evaluate(u)
    }
}

/// Closed form `mu_{j,1} = i (-i)^j / (-2)^{j+1} int ubar d^j u`, i.e.
/// `i / (-2)^{j+1} int zeta^j |u^(zeta)|^2 d zeta`.
pub fn mu_j1(j: usize) -> MuCoefficient {
    let c = coeff::i_pow(1 + 3 * j as i64);
    let den = BigRational::from_integer(BigInt::from(-2).pow(j as u32 + 1));
    let c = coeff::scale(&c, &den.recip());
    MuCoefficient {
        j,
        k: 1,
        density: DiffPolynomial::monomial(c, vec![Factor::UBAR, Factor::u(j as u32)]),
    }
}

/// Generator of `mu_{j,k}` and `E_j`, backed by a shared resolvent table.
pub struct Hierarchy {
    table: Arc<ResolventTable>,
    energies: RwLock<BTreeMap<usize, EnergyFunctional>>,
}

impl Default for Hierarchy {
    fn default() -> Self {
        Self::new(DEFAULT_CAP)
    }
}

impl Hierarchy {
    pub fn new(cap: usize) -> Self {
        Self::with_table(Arc::new(ResolventTable::new(cap)))
    }

    pub fn with_table(table: Arc<ResolventTable>) -> Self {
        Hierarchy {
            table,
            energies: RwLock::new(BTreeMap::new()),
        }
    }

    pub fn table(&self) -> &ResolventTable {
        &self.table
    }

    pub fn cap(&self) -> usize {
        self.table.cap()
    }

    /// `-i/(4 m pi) int tr(U R^a_{j,m-1}) dp dx` for any `m >= 1`; for
    /// `m = 1` this is an independent route to [`mu_j1`].
    pub fn mu_from_resolvent(&self, j: usize, m: usize) -> Result<MuCoefficient> {
        if m == 0 || j + 1 < m {
            return Err(Error::InvalidParameter(format!(
                "mu_{{{j},{m}}} needs 1 <= m <= j+1"
            )));
        }
        let parts = self.table.homogeneous_parts(j, Kind::Antidiagonal)?;
        let mut density = DiffPolynomial::zero();
        let prefactor = coeff::Coeff::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(-1), BigInt::from(4 * m as i64)),
        );
        if let Some(part) = parts.iter().find(|p| p.r == m - 1) {
            // tr(U A) = u A_21 + ubar A_12
            for (entry, f) in [((1, 0), Factor::U), ((0, 1), Factor::UBAR)] {
                for (mono, poly) in part.symbol.entry(entry.0, entry.1).iter() {
                    let v = p_integral(poly, j)?;
                    density.add_term(mono.with(f), &v.0 * &prefactor);
                }
            }
        }
        Ok(MuCoefficient { j, k: m, density })
    }

    pub fn mu_jm(&self, j: usize, m: usize) -> Result<MuCoefficient> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "mu_jm needs m >= 2 (got {m}); use mu_j1"
            )));
        }
        self.mu_from_resolvent(j, m)
    }

    pub fn energy(&self, j: usize) -> Result<EnergyFunctional> {
        if j > self.cap() {
            return Err(Error::LevelCap { k: j, cap: self.cap() });
        }
        if let Some(e) = self.energies.read().expect("energy cache poisoned").get(&j) {
            return Ok(e.clone());
        }
        let mut density = mu_j1(j).density;
        let mut provenance = vec![(j, 1)];
        for m in 2..=j + 1 {
            density = density + self.mu_jm(j, m)?.density;
            provenance.push((j, m));
        }
        let e = EnergyFunctional {
            j,
            density,
            provenance,
        };
        self.energies
            .write()
            .expect("energy cache poisoned")
            .insert(j, e.clone());
        Ok(e)
    }

    pub fn energies(&self, j_max: usize) -> Result<Vec<EnergyFunctional>> {
        (0..=j_max).map(|j| self.energy(j)).collect()
    }
}

/// Process-wide hierarchy with the default cap.
pub fn shared() -> &'static Hierarchy {
    static H: OnceLock<Hierarchy> = OnceLock::new();
    H.get_or_init(Hierarchy::default)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MonomialRecord {
    pub coeff_re_num: i64,
    pub coeff_re_den: i64,
    pub coeff_im_num: i64,
    pub coeff_im_den: i64,
    pub factors: Vec<(bool, u32)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnergyRecord {
    pub j: usize,
    pub monomials: Vec<MonomialRecord>,
}

pub fn to_record(j: usize, density: &DiffPolynomial) -> Result<EnergyRecord> {
    let mut monomials = Vec::new();
    for m in density.monomials() {
        let (rn, rd) = coeff::rat_parts(&m.coeff.re)
            .ok_or_else(|| Error::Format("coefficient exceeds i64".into()))?;
        let (in_, id) = coeff::rat_parts(&m.coeff.im)
            .ok_or_else(|| Error::Format("coefficient exceeds i64".into()))?;
        monomials.push(MonomialRecord {
            coeff_re_num: rn,
            coeff_re_den: rd,
            coeff_im_num: in_,
            coeff_im_den: id,
            factors: m.factors.iter().map(|f| (f.conjugated, f.order)).collect(),
        });
    }
    Ok(EnergyRecord { j, monomials })
}

pub fn from_record(rec: &EnergyRecord) -> Result<DiffPolynomial> {
    let mut ms = Vec::new();
    for m in &rec.monomials {
        if m.coeff_re_den == 0 || m.coeff_im_den == 0 {
            return Err(Error::Format(format!("zero denominator in E_{}", rec.j)));
        }
        ms.push(DiffMonomial {
            coeff: Coeff::new(
                coeff::rat(m.coeff_re_num, m.coeff_re_den),
                coeff::rat(m.coeff_im_num, m.coeff_im_den),
            ),
            factors: m
                .factors
                .iter()
                .map(|&(conjugated, order)| Factor { conjugated, order })
                .collect(),
        });
    }
    Ok(DiffPolynomial::from_monomials(ms))
}

pub fn write_energies(path: &Path, energies: &[EnergyFunctional]) -> Result<()> {
    let recs = energies
        .iter()
        .map(|e| to_record(e.j, &e.density))
        .collect::<Result<Vec<_>>>()?;
    fs::write(path, serde_json::to_string_pretty(&recs)? + "\n")?;
    Ok(())
}

pub fn read_energies(path: &Path) -> Result<Vec<EnergyFunctional>> {
    let recs: Vec<EnergyRecord> = serde_json::from_str(&fs::read_to_string(path)?)?;
    recs.iter()
        .map(|r| {
            Ok(EnergyFunctional {
                j: r.j,
                density: from_record(r)?,
                provenance: (1..=r.j + 1).map(|k| (r.j, k)).collect(),
            })
        })
        .collect()
}

/// Directory named by `DNLS_CACHE_DIR`, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("DNLS_CACHE_DIR").map(PathBuf::from)
}

/// Energies `E_0..=E_{j_max}`, read from `dir/energies.json` when it covers
/// `j_max`, otherwise generated and written back.
pub fn load_or_generate(
    hierarchy: &Hierarchy,
    dir: Option<&Path>,
    j_max: usize,
) -> Result<Vec<EnergyFunctional>> {
    if let Some(dir) = dir {
        let path = dir.join("energies.json");
        if let Ok(cached) = read_energies(&path) {
            if cached.len() > j_max && cached.iter().enumerate().all(|(i, e)| e.j == i) {
                return Ok(cached.into_iter().take(j_max + 1).collect());
            }
        }
        let energies = hierarchy.energies(j_max)?;
        fs::create_dir_all(dir)?;
        write_energies(&path, &energies)?;
        return Ok(energies);
    }
    hierarchy.energies(j_max)
}

/// Densities `E_0..=E_{j_max}` from the process-wide hierarchy, consulting
/// the cache directory if one is configured.
pub fn energies(j_max: usize) -> Result<Vec<EnergyFunctional>> {
    load_or_generate(shared(), cache_dir().as_deref(), j_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::{energy_density, mass_density, momentum_density};

    #[test]
    fn odd_polynomial_integrates_to_zero() {
        for j in 1..5 {
            let v = p_integral(&PPoly::linear(0, 1), j).unwrap();
            assert!(v.0.is_zero());
        }
    }

    #[test]
    fn known_residues() {
        // int dp / (p^2 - 1)^2 = 2 pi i * (-1/4)
        let v = p_integral(&PPoly::linear(1, 0), 1).unwrap();
        assert_eq!(v.0, coeff::imag(coeff::rat(-1, 2)));
        // int dp / (p^2 - 1) = 2 pi i * (1/2)
        let v = p_integral(&PPoly::linear(1, 0), 0).unwrap();
        assert_eq!(v.0, coeff::imag(coeff::rat(1, 1)));
        assert!(matches!(
            p_integral(&PPoly::linear(0, 1), 0),
            Err(Error::Degree { .. })
        ));
    }

    #[test]
    fn low_order_golden() {
        let h = Hierarchy::default();
        let e0 = h.energy(0).unwrap();
        assert_eq!(
            e0.density,
            mass_density().scale(&coeff::imag(coeff::rat(-1, 2)))
        );
        let e1 = h.energy(1).unwrap();
        assert!(e1
            .density
            .functionals_equal(&momentum_density().scale(&coeff::imag(coeff::rat(1, 4)))));
        let e2 = h.energy(2).unwrap();
        assert!(e2
            .density
            .functionals_equal(&energy_density().scale(&coeff::imag(coeff::rat(-1, 8)))));
    }

    #[test]
    fn pipeline_reproduces_quadratic_term() {
        let h = Hierarchy::default();
        for j in 0..5 {
            let a = h.mu_from_resolvent(j, 1).unwrap();
            assert!(a.density.functionals_equal(&mu_j1(j).density), "j = {j}");
        }
    }

    #[test]
    fn record_roundtrip() {
        let h = Hierarchy::default();
        let e = h.energy(3).unwrap();
        let rec = to_record(3, &e.density).unwrap();
        assert_eq!(from_record(&rec).unwrap(), e.density);
    }
}
