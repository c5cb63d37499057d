//! Resolvent symbols `R_k^d`, `R_k^a` of the spectral operator, expanded in
//! inverse powers of `lambda^2`.
//!
//! Every symbol is stored as a numerator over the common denominator
//! `(p^2 - 1)^m`. Numerator entries map differential monomials to
//! polynomials in `p`, so matrix factors like `p sigma_3 - 1` are expanded
//! into the four entries as soon as they appear.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

use num_traits::Zero;
use serde::Serialize;

use crate::coeff::{self, Coeff};
use crate::diffpoly::{DiffPolynomial, Factor, Monomial};
use crate::{Error, Result};

/// Default cap on the recursion level.
pub const DEFAULT_CAP: usize = 8;

/// Polynomial in `p` with exact coefficients, `coeffs[n]` multiplying `p^n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PPoly {
    coeffs: Vec<Coeff>,
}

impl PPoly {
    pub fn new(mut coeffs: Vec<Coeff>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PPoly { coeffs }
    }

    pub fn zero() -> Self {
        PPoly::default()
    }

    pub fn constant(c: Coeff) -> Self {
        PPoly::new(vec![c])
    }

    /// `a + b p`.
    pub fn linear(a: i64, b: i64) -> Self {
        PPoly::new(vec![coeff::from_ints(a, 0), coeff::from_ints(b, 0)])
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &PPoly) -> PPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = Coeff::zero();
        PPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + other.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Coeff) -> PPoly {
        PPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &PPoly) -> PPoly {
        if self.is_zero() || other.is_zero() {
            return PPoly::zero();
        }
        let mut out = vec![Coeff::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        PPoly::new(out)
    }

    pub fn eval(&self, p: &Coeff) -> Coeff {
        self.coeffs
            .iter()
            .rev()
            .fold(Coeff::zero(), |acc, c| acc * p + c)
    }

    pub fn eval_c64(&self, p: crate::C64) -> crate::C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(crate::C64::new(0.0, 0.0), |acc, c| acc * p + coeff::to_c64(c))
    }
}

impl fmt::Display for PPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{}", coeff::format(c))?,
                1 => write!(f, "{}*p", coeff::format(c))?,
                _ => write!(f, "{}*p^{n}", coeff::format(c))?,
            }
        }
        Ok(())
    }
}

/// One matrix entry: a sum of `monomial * polynomial(p)` terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolEntry {
    terms: BTreeMap<Monomial, PPoly>,
}

impl SymbolEntry {
    pub fn zero() -> Self {
        SymbolEntry::default()
    }

    pub fn term(m: Monomial, p: PPoly) -> Self {
        let mut e = SymbolEntry::zero();
        e.add_term(m, p);
        e
    }

    pub fn add_term(&mut self, m: Monomial, p: PPoly) {
        if p.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(p);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().add(&p);
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

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &PPoly)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &SymbolEntry) -> SymbolEntry {
        let mut out = self.clone();
        for (m, p) in &other.terms {
            out.add_term(m.clone(), p.clone());
        }
        out
    }

    fn map_poly(&self, f: impl Fn(&PPoly) -> PPoly) -> SymbolEntry {
        let mut out = SymbolEntry::zero();
        for (m, p) in &self.terms {
            out.add_term(m.clone(), f(p));
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> SymbolEntry {
        self.map_poly(|p| p.scale(c))
    }

    pub fn mul_poly(&self, q: &PPoly) -> SymbolEntry {
        self.map_poly(|p| p.mul(q))
    }

    pub fn mul_factor(&self, f: Factor) -> SymbolEntry {
        let mut out = SymbolEntry::zero();
        for (m, p) in &self.terms {
            out.add_term(m.with(f), p.clone());
        }
        out
    }

    pub fn dx(&self) -> SymbolEntry {
        let mut out = SymbolEntry::zero();
        for (m, p) in &self.terms {
            for (mult, dm) in m.derivative() {
                out.add_term(dm, p.scale(&coeff::from_ints(mult, 0)));
            }
        }
        out
    }

    /// Sum of the entry's terms whose monomial has the given degree.
    pub fn degree_part(&self, degree: usize) -> SymbolEntry {
        SymbolEntry {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, p)| (m.clone(), p.clone()))
                .collect(),
        }
    }

    /// The entry evaluated at a fixed `p`, as a differential polynomial.
    pub fn at(&self, p: &Coeff) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (m, q) in &self.terms {
            out.add_term(m.clone(), q.eval(p));
        }
        out
    }
}

/// 2x2 symbol `numerator / (p^2 - 1)^denom_power`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSymbol {
    pub entries: [[SymbolEntry; 2]; 2],
    pub denom_power: usize,
}

impl MatrixSymbol {
    pub fn zero(denom_power: usize) -> Self {
        MatrixSymbol {
            entries: Default::default(),
            denom_power,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &SymbolEntry {
        &self.entries[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries[0][1].is_zero() && self.entries[1][0].is_zero()
    }

    pub fn is_antidiagonal(&self) -> bool {
        self.entries[0][0].is_zero() && self.entries[1][1].is_zero()
    }

    fn map(&self, f: impl Fn(usize, usize, &SymbolEntry) -> SymbolEntry) -> MatrixSymbol {
        let mut out = MatrixSymbol::zero(self.denom_power);
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = f(i, j, &self.entries[i][j]);
            }
        }
        out
    }

    /// Sum of numerators; both symbols must share the denominator.
    pub fn add(&self, other: &MatrixSymbol) -> MatrixSymbol {
        debug_assert_eq!(self.denom_power, other.denom_power);
        self.map(|i, j, e| e.add(&other.entries[i][j]))
    }

    pub fn sub(&self, other: &MatrixSymbol) -> MatrixSymbol {
        self.add(&other.scale(&coeff::from_ints(-1, 0)))
    }

    pub fn scale(&self, c: &Coeff) -> MatrixSymbol {
        self.map(|_, _, e| e.scale(c))
    }

    pub fn mul_poly(&self, q: &PPoly) -> MatrixSymbol {
        self.map(|_, _, e| e.mul_poly(q))
    }

    pub fn with_denom_power(mut self, m: usize) -> MatrixSymbol {
        self.denom_power = m;
        self
    }

    /// `d/dx` of the numerator.
    pub fn dx(&self) -> MatrixSymbol {
        self.map(|_, _, e| e.dx())
    }

    /// `U * S` with `U = [[0, u], [ubar, 0]]`.
    pub fn left_mul_u(&self) -> MatrixSymbol {
        self.map(|i, j, _| {
            if i == 0 {
                self.entries[1][j].mul_factor(Factor::U)
            } else {
                self.entries[0][j].mul_factor(Factor::UBAR)
            }
        })
    }

    /// `S * diag(a, b)`.
    pub fn right_mul_diag(&self, a: &PPoly, b: &PPoly) -> MatrixSymbol {
        self.map(|_, j, e| e.mul_poly(if j == 0 { a } else { b }))
    }

    /// `diag(a, b) * S`.
    pub fn left_mul_diag(&self, a: &PPoly, b: &PPoly) -> MatrixSymbol {
        self.map(|i, _, e| e.mul_poly(if i == 0 { a } else { b }))
    }

    /// Keeps only monomials of the given degree.
    pub fn degree_part(&self, degree: usize) -> MatrixSymbol {
        self.map(|_, _, e| e.degree_part(degree))
    }

    /// Degrees of all monomials occurring in any entry, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .entries
            .iter()
            .flatten()
            .flat_map(|e| e.iter().map(|(m, _)| m.degree()))
            .collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn term_count(&self) -> usize {
        self.entries.iter().flatten().map(|e| e.len()).sum()
    }

    pub fn to_json(&self) -> SymbolDump {
        let mut entries = BTreeMap::new();
        for i in 0..2 {
            for j in 0..2 {
                let terms = self.entries[i][j]
                    .iter()
                    .map(|(m, p)| TermDump {
                        monomial: m.to_string(),
                        p_coefficients: p
                            .coeffs()
                            .iter()
                            .map(|c| ExactDump {
                                re: rat_string(&c.re),
                                im: rat_string(&c.im),
                            })
                            .collect(),
                        denominator_power: self.denom_power,
                    })
                    .collect();
                entries.insert(format!("{}{}", i + 1, j + 1), terms);
            }
        }
        SymbolDump { entries }
    }
}

fn rat_string(r: &num_rational::BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactDump {
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermDump {
    pub monomial: String,
    pub p_coefficients: Vec<ExactDump>,
    pub denominator_power: usize,
}

/// JSON debug form: entry label ("11", "12", "21", "22") to its terms.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolDump {
    pub entries: BTreeMap<String, Vec<TermDump>>,
}

fn sigma3() -> (PPoly, PPoly) {
    (PPoly::linear(1, 0), PPoly::linear(-1, 0))
}

/// `p^2 - 1`.
pub fn denominator() -> PPoly {
    PPoly::new(vec![
        coeff::from_ints(-1, 0),
        coeff::from_ints(0, 0),
        coeff::from_ints(1, 0),
    ])
}

/// `R_0^d = -(p sigma_3 - 1)/(p^2 - 1)` and `R_0^a = -iU/(p^2 - 1)`.
pub fn base_symbols() -> (MatrixSymbol, MatrixSymbol) {
    let mut d = MatrixSymbol::zero(1);
    d.entries[0][0] = SymbolEntry::term(Monomial::one(), PPoly::linear(1, -1));
    d.entries[1][1] = SymbolEntry::term(Monomial::one(), PPoly::linear(1, 1));
    let mut a = MatrixSymbol::zero(1);
    let minus_i = PPoly::constant(coeff::from_ints(0, -1));
    a.entries[0][1] = SymbolEntry::term(Monomial::new(vec![Factor::U]), minus_i.clone());
    a.entries[1][0] = SymbolEntry::term(Monomial::new(vec![Factor::UBAR]), minus_i);
    (d, a)
}

/// One step of the recursion: `(R_{k-1}^d, R_{k-1}^a) -> (R_k^d, R_k^a)`.
///
/// `u_sign` multiplies the `-iU R_{k-1}^a` term of the diagonal update;
/// anything other than `+1` is a deliberately broken recursion.
fn step(prev_d: &MatrixSymbol, prev_a: &MatrixSymbol, u_sign: i64) -> (MatrixSymbol, MatrixSymbol) {
    let k = prev_d.denom_power;
    let (s_plus, s_minus) = sigma3();
    let i = coeff::from_ints(0, 1);
    let dd = prev_d.dx();
    let da = prev_a.dx();
    // -iU R^a + i (d R^d) sigma_3, then times (p sigma_3 - 1)
    let bracket = prev_a
        .left_mul_u()
        .scale(&coeff::from_ints(0, -u_sign))
        .add(&dd.right_mul_diag(&s_plus, &s_minus).scale(&i));
    let new_d = bracket
        .right_mul_diag(&PPoly::linear(-1, 1), &PPoly::linear(-1, -1))
        .with_denom_power(k + 1);
    // U^2 R^a - U (d R^d) sigma_3 + i (d R^a) sigma_3 (p sigma_3 + 1)
    let new_a = prev_a
        .left_mul_u()
        .left_mul_u()
        .sub(&dd.right_mul_diag(&s_plus, &s_minus).left_mul_u())
        .add(&da.right_mul_diag(&PPoly::linear(1, 1), &PPoly::linear(-1, 1)).scale(&i))
        .with_denom_power(k + 1);
    (new_d, new_a)
}

/// Memoized table of `(R_k^d, R_k^a)` for `k = 0..=cap`.
///
/// Safe to share between threads; levels are computed on demand and
/// appended under a write lock (results are deterministic).
pub struct ResolventTable {
    cap: usize,
    u_sign: i64,
    levels: RwLock<Vec<(MatrixSymbol, MatrixSymbol)>>,
}

impl Default for ResolventTable {
    fn default() -> Self {
        Self::new(DEFAULT_CAP)
    }
}

impl ResolventTable {
    pub fn new(cap: usize) -> Self {
        ResolventTable {
            cap,
            u_sign: 1,
            levels: RwLock::new(vec![base_symbols()]),
        }
    }

    /// A table whose diagonal update has the wrong sign on its `U R^a`
    /// term; used to exercise the telescoping check.
    pub fn with_sign_fault(cap: usize) -> Self {
        ResolventTable {
            u_sign: -1,
            ..Self::new(cap)
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `(R_k^d, R_k^a)` as numerators over `(p^2 - 1)^{k+1}`.
    pub fn level(&self, k: usize) -> Result<(MatrixSymbol, MatrixSymbol)> {
        if k > self.cap {
            return Err(Error::LevelCap { k, cap: self.cap });
        }
        if let Some(l) = self.levels.read().expect("resolvent cache poisoned").get(k) {
            return Ok(l.clone());
        }
        let mut levels = self.levels.write().expect("resolvent cache poisoned");
        while levels.len() <= k {
            let (d, a) = levels.last().expect("base level present");
            let next = step(d, a, self.u_sign);
            levels.push(next);
        }
        Ok(levels[k].clone())
    }

    pub fn recurse(&self, k: usize) -> Result<(MatrixSymbol, MatrixSymbol)> {
        if k == 0 {
            return Err(Error::InvalidParameter("recurse needs k >= 1".into()));
        }
        self.level(k)
    }

    pub fn homogeneous_parts(&self, k: usize, kind: Kind) -> Result<Vec<HomogeneousPart>> {
        let (d, a) = self.level(k)?;
        let sym = match kind {
            Kind::Diagonal => d,
            Kind::Antidiagonal => a,
        };
        split_homogeneous(k, kind, &sym)
    }

    /// Checks the telescoping identities for levels `1..=n` and returns the
    /// residual symbols `i sigma_3 (d R_n^d)` and `-R_n^a (p sigma_3 - 1)`.
    pub fn truncation_residual(&self, n: usize) -> Result<(MatrixSymbol, MatrixSymbol)> {
        if n == 0 {
            return Err(Error::InvalidParameter("truncation order must be >= 1".into()));
        }
        check_base()?;
        for k in 1..=n {
            let (pd, pa) = self.level(k - 1)?;
            let (d, a) = self.level(k)?;
            check_level(k, &pd, &pa, &d, &a)?;
        }
        let (d, a) = self.level(n)?;
        let (s_plus, s_minus) = sigma3();
        let i = coeff::from_ints(0, 1);
        let yd = d.dx().left_mul_diag(&s_plus, &s_minus).scale(&i);
        let ya = a
            .right_mul_diag(&PPoly::linear(-1, 1), &PPoly::linear(-1, -1))
            .scale(&coeff::from_ints(-1, 0));
        Ok((yd, ya))
    }
}

fn check_base() -> Result<()> {
    let (d, a) = base_symbols();
    let (p_plus, p_minus) = (PPoly::linear(1, 1), PPoly::linear(1, -1));
    // -(p sigma_3 + 1) R_0^d = I, numerators over (p^2 - 1)
    let lhs = d
        .left_mul_diag(&p_plus, &p_minus)
        .scale(&coeff::from_ints(-1, 0));
    let mut id = MatrixSymbol::zero(1);
    id.entries[0][0] = SymbolEntry::term(Monomial::one(), denominator());
    id.entries[1][1] = SymbolEntry::term(Monomial::one(), denominator());
    if !lhs.sub(&id).is_zero() {
        return Err(Error::TelescopeFailure {
            k: 0,
            detail: "diagonal base identity".into(),
        });
    }
    let rhs = a
        .left_mul_diag(&p_plus, &p_minus)
        .scale(&coeff::from_ints(-1, 0))
        .sub(&d.left_mul_u().scale(&coeff::from_ints(0, 1)));
    if !rhs.is_zero() {
        return Err(Error::TelescopeFailure {
            k: 0,
            detail: "antidiagonal base identity".into(),
        });
    }
    Ok(())
}

/// The two brackets of the expansion at level `k`, scaled by `(p^2-1)^{k+1}`.
pub fn telescoping_brackets(
    pd: &MatrixSymbol,
    pa: &MatrixSymbol,
    d: &MatrixSymbol,
    a: &MatrixSymbol,
) -> (MatrixSymbol, MatrixSymbol) {
    let den = denominator();
    let (s_plus, s_minus) = sigma3();
    let (p_plus, p_minus) = (PPoly::linear(1, 1), PPoly::linear(1, -1));
    let i = coeff::from_ints(0, 1);
    let minus_i = coeff::from_ints(0, -1);
    // i sigma_3 d R^d_{k-1} - (p sigma_3 + 1) R^d_k - i U R^a_{k-1}
    let diag = pd
        .dx()
        .left_mul_diag(&s_plus, &s_minus)
        .scale(&i)
        .add(&pa.left_mul_u().scale(&minus_i))
        .mul_poly(&den)
        .with_denom_power(d.denom_power)
        .sub(&d.left_mul_diag(&p_plus, &p_minus));
    // i sigma_3 d R^a_{k-1} - (p sigma_3 + 1) R^a_k - i U R^d_k
    let anti = pa
        .dx()
        .left_mul_diag(&s_plus, &s_minus)
        .scale(&i)
        .mul_poly(&den)
        .with_denom_power(a.denom_power)
        .sub(&a.left_mul_diag(&p_plus, &p_minus))
        .add(&d.left_mul_u().scale(&minus_i));
    (diag, anti)
}

fn check_level(
    k: usize,
    pd: &MatrixSymbol,
    pa: &MatrixSymbol,
    d: &MatrixSymbol,
    a: &MatrixSymbol,
) -> Result<()> {
    let (diag, anti) = telescoping_brackets(pd, pa, d, a);
    if !diag.is_zero() {
        return Err(Error::TelescopeFailure {
            k,
            detail: format!("diagonal bracket has {} nonzero terms", diag.term_count()),
        });
    }
    if !anti.is_zero() {
        return Err(Error::TelescopeFailure {
            k,
            detail: format!("antidiagonal bracket has {} nonzero terms", anti.term_count()),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Diagonal,
    Antidiagonal,
}

/// The degree-`2r` (diagonal) or degree-`2r+1` (antidiagonal) piece of
/// level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPart {
    pub k: usize,
    pub r: usize,
    pub kind: Kind,
    pub symbol: MatrixSymbol,
}

fn split_homogeneous(k: usize, kind: Kind, sym: &MatrixSymbol) -> Result<Vec<HomogeneousPart>> {
    let mut parts = Vec::new();
    for deg in sym.degrees() {
        let r = match kind {
            Kind::Diagonal if deg % 2 == 0 => deg / 2,
            Kind::Antidiagonal if deg % 2 == 1 => (deg - 1) / 2,
            _ => {
                return Err(Error::StructureViolation(format!(
                    "level {k} {kind:?} symbol has a term of degree {deg}"
                )))
            }
        };
        parts.push(HomogeneousPart {
            k,
            r,
            kind,
            symbol: sym.degree_part(deg),
        });
    }
    Ok(parts)
}

/// Outcome of [`verify_structure`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct StructureReport {
    pub k: usize,
    pub r: usize,
    pub terms: usize,
    pub violations: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the shape of a homogeneous part: denominator power `k+1`, degree
/// `2r` / `2r+1`, derivative budget `k-r`, the alternating `u`/`ubar`
/// pattern of products of `U`, polynomial degree at most `k-r` (plus one
/// for the diagonal `p sigma_3 - 1` factor, which must divide the entry).
pub fn verify_structure(part: &HomogeneousPart) -> StructureReport {
    let HomogeneousPart { k, r, kind, symbol } = part;
    let (k, r) = (*k, *r);
    let mut rep = StructureReport {
        k,
        r,
        terms: symbol.term_count(),
        violations: Vec::new(),
    };
    if symbol.denom_power != k + 1 {
        rep.violations.push(format!(
            "denominator power {} != {}",
            symbol.denom_power,
            k + 1
        ));
    }
    let budget = k.checked_sub(r);
    if budget.is_none() {
        rep.violations.push(format!("r = {r} exceeds k = {k}"));
    }
    let budget = budget.unwrap_or(0) as u32;
    let one = coeff::from_ints(1, 0);
    let minus_one = coeff::from_ints(-1, 0);
    for i in 0..2 {
        for j in 0..2 {
            let on_diag = i == j;
            let entry = &symbol.entries[i][j];
            if entry.is_zero() {
                continue;
            }
            if on_diag != (*kind == Kind::Diagonal) {
                rep.violations
                    .push(format!("entry ({},{}) must vanish for {kind:?}", i + 1, j + 1));
                continue;
            }
            for (m, p) in entry.iter() {
                let tag = format!("entry ({},{}) term {m}", i + 1, j + 1);
                let degree = if on_diag { 2 * r } else { 2 * r + 1 };
                if m.degree() != degree {
                    rep.violations
                        .push(format!("{tag}: degree {} != {degree}", m.degree()));
                }
                if m.order() != budget {
                    rep.violations
                        .push(format!("{tag}: derivative count {} != {budget}", m.order()));
                }
                let nbar = m.conjugated_count();
                let expect_bar = match (i, j) {
                    (0, 1) => r,
                    (1, 0) => r + 1,
                    _ => r,
                };
                if nbar != expect_bar {
                    rep.violations
                        .push(format!("{tag}: {nbar} conjugated factors, expected {expect_bar}"));
                }
                let bound = budget as usize + usize::from(on_diag);
                if p.degree().unwrap_or(0) > bound {
                    rep.violations.push(format!(
                        "{tag}: p-degree {} exceeds {bound}",
                        p.degree().unwrap_or(0)
                    ));
                }
                if on_diag {
                    let root = if i == 0 { &one } else { &minus_one };
                    if !p.eval(root).is_zero() {
                        rep.violations
                            .push(format!("{tag}: not divisible by the p sigma_3 - 1 factor"));
                    }
                }
            }
        }
    }
    rep
}

/// Sum of the parts' symbols (all share one denominator).
pub fn reassemble(parts: &[HomogeneousPart], denom_power: usize) -> MatrixSymbol {
    parts
        .iter()
        .fold(MatrixSymbol::zero(denom_power), |acc, p| acc.add(&p.symbol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_entries() {
        let (d, a) = base_symbols();
        assert_eq!(d.denom_power, 1);
        // R_0^d(2,2) = -(-p - 1) = p + 1 over p^2 - 1
        let e = d.entry(1, 1);
        assert_eq!(e.len(), 1);
        assert_eq!(e.iter().next().unwrap().1, &PPoly::linear(1, 1));
        assert_eq!(d.entry(0, 0).iter().next().unwrap().1, &PPoly::linear(1, -1));
        let (m, p) = a.entry(0, 1).iter().next().unwrap();
        assert_eq!(m, &Monomial::new(vec![Factor::U]));
        assert_eq!(p, &PPoly::constant(coeff::from_ints(0, -1)));
        assert!(a.entry(0, 0).is_zero() && a.entry(1, 1).is_zero());
    }

    #[test]
    fn first_level() {
        let t = ResolventTable::default();
        let (d, a) = t.recurse(1).unwrap();
        // R_1^d = -U^2 (p sigma_3 - 1) over (p^2-1)^2
        assert!(d.is_diagonal());
        assert_eq!(d.denom_power, 2);
        let uubar = Monomial::new(vec![Factor::U, Factor::UBAR]);
        assert_eq!(d.entry(0, 0).len(), 1);
        assert_eq!(
            d.entry(0, 0).iter().next().unwrap(),
            (&uubar, &PPoly::linear(1, -1))
        );
        assert_eq!(
            d.entry(1, 1).iter().next().unwrap(),
            (&uubar, &PPoly::linear(1, 1))
        );
        assert!(a.is_antidiagonal());
        assert_eq!(a.degrees(), vec![1, 3]);
        let parts = t.homogeneous_parts(1, Kind::Diagonal).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].r, 1);
        assert!(verify_structure(&parts[0]).passed());
    }

    #[test]
    fn part_ranges() {
        let t = ResolventTable::default();
        let p0 = t.homogeneous_parts(0, Kind::Antidiagonal).unwrap();
        assert_eq!(p0.iter().map(|p| p.r).collect::<Vec<_>>(), vec![0]);
        let p2 = t.homogeneous_parts(2, Kind::Diagonal).unwrap();
        assert_eq!(p2.iter().map(|p| p.r).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn corrupted_part_fails() {
        let t = ResolventTable::default();
        let mut part = t
            .homogeneous_parts(2, Kind::Antidiagonal)
            .unwrap()
            .into_iter()
            .find(|p| p.r == 1)
            .unwrap();
        // |gamma| = 1 here; a cubic p-polynomial breaks the bound
        let m = part.symbol.entries[0][1].iter().next().unwrap().0.clone();
        part.symbol.entries[0][1].add_term(
            m,
            PPoly::new(vec![
                coeff::from_ints(0, 0),
                coeff::from_ints(0, 0),
                coeff::from_ints(0, 0),
                coeff::from_ints(1, 0),
            ]),
        );
        assert!(!verify_structure(&part).passed());
    }

    #[test]
    fn telescoping_low_levels() {
        let t = ResolventTable::default();
        assert!(t.truncation_residual(1).is_ok());
        let (yd, ya) = t.truncation_residual(4).unwrap();
        assert!(yd.is_diagonal() && ya.is_antidiagonal());
        assert_eq!(yd.denom_power, 5);
    }

    #[test]
    fn sign_fault_detected_at_first_level() {
        let t = ResolventTable::with_sign_fault(4);
        match t.truncation_residual(3) {
            Err(Error::TelescopeFailure { k, .. }) => assert_eq!(k, 1),
            other => panic!("expected telescoping failure, got {other:?}"),
        }
    }

    #[test]
    fn cap_enforced() {
        let t = ResolventTable::new(2);
        assert!(matches!(t.level(3), Err(Error::LevelCap { .. })));
    }
}
