//! Differential polynomials in `u`, `ubar` and their x-derivatives.
//!
//! Coefficients are exact complex rationals. Two densities define the same
//! functional when their Euler operators (variational derivatives) agree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{self, Coeff};
use crate::grid::GridFunction;
use crate::{Error, Result, C64};

/// `d^order u` (or its conjugate).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub conjugated: bool,
    pub order: u32,
}

impl Factor {
    pub const U: Factor = Factor {
        conjugated: false,
        order: 0,
    };
    pub const UBAR: Factor = Factor {
        conjugated: true,
        order: 0,
    };

    pub fn u(order: u32) -> Self {
        Factor {
            conjugated: false,
            order,
        }
    }

    pub fn ubar(order: u32) -> Self {
        Factor {
            conjugated: true,
            order,
        }
    }

    pub fn conj(self) -> Self {
        Factor {
            conjugated: !self.conjugated,
            ..self
        }
    }

    pub fn diff(self) -> Self {
        Factor {
            order: self.order + 1,
            ..self
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.conjugated { "ubar" } else { "u" };
        match self.order {
            0 => write!(f, "{base}"),
            1..=3 => write!(f, "{base}_{}", "x".repeat(self.order as usize)),
            n => write!(f, "{base}_{{{n}x}}"),
        }
    }
}

/// Which dependent variable a variational derivative is taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    U,
    Ubar,
}

/// A monomial without coefficient: a sorted multiset of factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<Factor>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Monomial(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Sum of derivative orders.
    pub fn order(&self) -> u32 {
        self.0.iter().map(|f| f.order).sum()
    }

    pub fn max_order(&self) -> u32 {
        self.0.iter().map(|f| f.order).max().unwrap_or(0)
    }

    /// Number of conjugated factors.
    pub fn conjugated_count(&self) -> usize {
        self.0.iter().filter(|f| f.conjugated).count()
    }

    /// Scaling weight `sum orders + degree/2 - 1`.
    pub fn weight(&self) -> BigRational {
        coeff::rat(2 * self.order() as i64 + self.degree() as i64 - 2, 2)
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Monomial::new(v)
    }

    pub fn with(&self, f: Factor) -> Monomial {
        let pos = self.0.partition_point(|g| *g <= f);
        let mut v = self.0.clone();
        v.insert(pos, f);
        Monomial(v)
    }

    pub fn conj(&self) -> Monomial {
        Monomial::new(self.0.iter().map(|f| f.conj()).collect())
    }

    fn multiplicity(&self, f: Factor) -> usize {
        self.0.iter().filter(|g| **g == f).count()
    }

    fn without(&self, f: Factor) -> Option<Monomial> {
        let pos = self.0.iter().position(|g| *g == f)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(Monomial(v))
    }

    /// Leibniz rule: `d/dx` of the monomial as (multiplicity, monomial) pairs.
    pub fn derivative(&self) -> Vec<(i64, Monomial)> {
        let mut out: Vec<(i64, Monomial)> = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let f = self.0[i];
            let mult = self.multiplicity(f);
            let mut v = self.0.clone();
            v[i] = f.diff();
            out.push((mult as i64, Monomial::new(v)));
            i += mult;
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let g = self.0[i];
            let mult = self.multiplicity(g);
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if mult > 1 {
                write!(f, "{g}^{mult}")?;
            } else {
                write!(f, "{g}")?;
            }
            i += mult;
        }
        Ok(())
    }
}

/// A coefficient together with its factors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffMonomial {
    pub coeff: Coeff,
    pub factors: Vec<Factor>,
}

/// Scaling weight of a nonzero polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    Homogeneous(BigRational),
    Inhomogeneous,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiffPolynomial {
    terms: BTreeMap<Monomial, Coeff>,
}

impl DiffPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Coeff) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: Coeff, m: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn monomial(c: Coeff, factors: Vec<Factor>) -> Self {
        Self::term(c, Monomial::new(factors))
    }

    pub fn u() -> Self {
        Self::monomial(coeff::one(), vec![Factor::U])
    }

    pub fn ubar() -> Self {
        Self::monomial(coeff::one(), vec![Factor::UBAR])
    }

    pub fn from_monomials(ms: impl IntoIterator<Item = DiffMonomial>) -> Self {
        let mut p = Self::zero();
        for m in ms {
            p.add_term(Monomial::new(m.factors), m.coeff);
        }
        p
    }

    /// Adds `c * m`, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&Coeff> {
        self.terms.get(m)
    }

    pub fn monomials(&self) -> Vec<DiffMonomial> {
        self.terms
            .iter()
            .map(|(m, c)| DiffMonomial {
                coeff: c.clone(),
                factors: m.factors().to_vec(),
            })
            .collect()
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut p = Self::zero();
        for (m, a) in &self.terms {
            p.add_term(m.clone(), a * c);
        }
        p
    }

    pub fn differentiate(&self) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            for (mult, dm) in m.derivative() {
                p.add_term(dm, coeff::scale(c, &coeff::rat(mult, 1)));
            }
        }
        p
    }

    pub fn differentiate_n(&self, n: u32) -> Self {
        (0..n).fold(self.clone(), |p, _| p.differentiate())
    }

    /// Complex conjugate of the density (swaps `u` and `ubar`).
    pub fn conj(&self) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            p.add_term(m.conj(), c.conj());
        }
        p
    }

    /// Degrees present, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|m| m.degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().map(|m| m.max_order()).max().unwrap_or(0)
    }

    /// Part of the polynomial of the given degree.
    pub fn homogeneous_part(&self, degree: usize) -> Self {
        DiffPolynomial {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scaling_weight(&self) -> Result<Weight> {
        let mut it = self.terms.keys().map(|m| m.weight());
        let w = it.next().ok_or(Error::ZeroPolynomial)?;
        if it.all(|v| v == w) {
            Ok(Weight::Homogeneous(w))
        } else {
            Ok(Weight::Inhomogeneous)
        }
    }

    /// Partial derivative with respect to the jet variable `f`.
    pub fn partial(&self, f: Factor) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            let mult = m.multiplicity(f);
            if mult > 0 {
                let rest = m.without(f).expect("factor present");
                p.add_term(rest, coeff::scale(c, &coeff::rat(mult as i64, 1)));
            }
        }
        p
    }

    /// Euler operator `sum_a (-d)^a dp/d(d^a w)`.
    pub fn variational_derivative(&self, wrt: Var) -> Self {
        let conjugated = wrt == Var::Ubar;
        let mut orders: Vec<u32> = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter())
            .filter(|f| f.conjugated == conjugated)
            .map(|f| f.order)
            .collect();
        orders.sort_unstable();
        orders.dedup();
        let mut out = Self::zero();
        for a in orders {
            let mut d = self
                .partial(Factor { conjugated, order: a })
                .differentiate_n(a);
            if a % 2 == 1 {
                d = -d;
            }
            out = out + d;
        }
        out
    }

    /// Equality of the integrated functionals (modulo total derivatives).
    pub fn functionals_equal(&self, other: &Self) -> bool {
        let d = self - other;
        d.homogeneous_part(0).is_zero()
            && d.variational_derivative(Var::U).is_zero()
            && d.variational_derivative(Var::Ubar).is_zero()
    }

    /// `int density dx` on the grid, with spectral derivatives.
    pub fn evaluate(&self, u: &GridFunction) -> Result<C64> {
        let f = self.evaluate_density(u)?;
        Ok(u.integrate(&f))
    }

    /// Pointwise samples of the density.
    pub fn evaluate_density(&self, u: &GridFunction) -> Result<Vec<C64>> {
        let n = u.len();
        let max_order = self.max_order();
        if max_order as usize >= n / 4 {
            return Err(Error::Resolution {
                order: max_order,
                n,
            });
        }
        let mut jets: HashMap<Factor, Vec<C64>> = HashMap::new();
        for m in self.terms.keys() {
            for f in m.factors() {
                if !jets.contains_key(f) {
                    let d = if f.conjugated {
                        jets.get(&f.conj())
                            .map(|v| v.iter().map(|z| z.conj()).collect())
                            .unwrap_or_else(|| {
                                u.derivative(f.order).iter().map(|z| z.conj()).collect()
                            })
                    } else {
                        u.derivative(f.order)
                    };
                    jets.insert(*f, d);
                }
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (m, c) in &self.terms {
            let c = coeff::to_c64(c);
            for (k, o) in out.iter_mut().enumerate() {
                let mut prod = c;
                for f in m.factors() {
                    prod *= jets[f][k];
                }
                *o += prod;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for DiffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{}", coeff::format(c))?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", coeff::format(c))?;
            }
        }
        Ok(())
    }
}

impl Add for DiffPolynomial {
    type Output = DiffPolynomial;
    fn add(mut self, rhs: DiffPolynomial) -> DiffPolynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Add<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn add(self, rhs: &DiffPolynomial) -> DiffPolynomial {
        self.clone() + rhs.clone()
    }
}

impl Neg for DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        DiffPolynomial {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Sub for DiffPolynomial {
    type Output = DiffPolynomial;
    fn sub(self, rhs: DiffPolynomial) -> DiffPolynomial {
        self + (-rhs)
    }
}

impl Sub<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn sub(self, rhs: &DiffPolynomial) -> DiffPolynomial {
        self.clone() - rhs.clone()
    }
}

impl Mul<&DiffPolynomial> for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn mul(self, rhs: &DiffPolynomial) -> DiffPolynomial {
        let mut p = DiffPolynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                p.add_term(a.times(b), ca * cb);
            }
        }
        p
    }
}

impl Mul for DiffPolynomial {
    type Output = DiffPolynomial;
    fn mul(self, rhs: DiffPolynomial) -> DiffPolynomial {
        &self * &rhs
    }
}

/// Mass density `u ubar`.
pub fn mass_density() -> DiffPolynomial {
    DiffPolynomial::monomial(coeff::one(), vec![Factor::U, Factor::UBAR])
}

/// Momentum density `Im(ubar u_x) + |u|^4 / 2`.
pub fn momentum_density() -> DiffPolynomial {
    let half_i = coeff::imag(coeff::rat(-1, 2));
    DiffPolynomial::monomial(half_i.clone(), vec![Factor::UBAR, Factor::u(1)])
        - DiffPolynomial::monomial(half_i, vec![Factor::U, Factor::ubar(1)])
        + DiffPolynomial::monomial(
            coeff::real(coeff::rat(1, 2)),
            vec![Factor::U, Factor::U, Factor::UBAR, Factor::UBAR],
        )
}

/// Energy density `|u_x|^2 - (3/2) Im(|u|^2 u ubar_x) + |u|^6 / 2`.
pub fn energy_density() -> DiffPolynomial {
    let three_quarter_i = coeff::imag(coeff::rat(3, 4));
    DiffPolynomial::monomial(coeff::one(), vec![Factor::u(1), Factor::ubar(1)])
        + DiffPolynomial::monomial(
            three_quarter_i.clone(),
            vec![Factor::U, Factor::U, Factor::UBAR, Factor::ubar(1)],
        )
        - DiffPolynomial::monomial(
            three_quarter_i,
            vec![Factor::U, Factor::UBAR, Factor::UBAR, Factor::u(1)],
        )
        + DiffPolynomial::monomial(
            coeff::real(coeff::rat(1, 2)),
            vec![
                Factor::U,
                Factor::U,
                Factor::U,
                Factor::UBAR,
                Factor::UBAR,
                Factor::UBAR,
            ],
        )
}
