//! Monomials and sparse polynomials over `F_p`, with arithmetic in the
//! truncated algebra `S / (x_1^q, ..., x_r^q)`.
//!
//! Monomials are compared in graded reverse lexicographic order with the
//! variables ordered as they are laid out by [`VariableLayout`] (row-major
//! `x11, x12, ...`). Exponents are stored one byte each, so the truncation
//! level `q` is limited to 256.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{binomial, reduce_signed};
use crate::linalg::{LinalgError, PrimeFieldMatrix};

/// Largest truncation level representable with byte exponents.
pub const MAX_Q: u32 = 256;
/// Largest matrix size for which determinants are expanded over permutations.
pub const MAX_DET_SIZE: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("invalid matrix size: {0}")]
    InvalidSize(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("polynomials live in different rings ({0} vs {1} variables)")]
    RingMismatch(usize, usize),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Exponent vector with cached total degree.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    exponents: Box<[u8]>,
    degree: u32,
}

impl Monomial {
    pub fn new(exponents: impl Into<Box<[u8]>>) -> Self {
        let exponents = exponents.into();
        let degree = exponents.iter().map(|&e| e as u32).sum();
        Self { exponents, degree }
    }

    pub fn one(nvars: usize) -> Self {
        Self::new(vec![0u8; nvars])
    }

    /// The single variable `x_var`.
    pub fn variable(nvars: usize, var: usize) -> Self {
        let mut e = vec![0u8; nvars];
        e[var] = 1;
        Self::new(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    /// Product of monomials; panics if an exponent leaves the byte range.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.nvars(), other.nvars(), "monomials over different rings");
        let e: Vec<u8> = self
            .exponents
            .iter()
            .zip(other.exponents.iter())
            .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
            .collect();
        Monomial::new(e)
    }

    /// True when every exponent is at most `q - 1`.
    pub fn is_truncated(&self, q: u32) -> bool {
        self.exponents.iter().all(|&e| (e as u32) < q)
    }

    pub fn fmt_with(&self, labels: &[String]) -> String {
        let parts: Vec<String> = self
            .exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let name = labels.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1));
                if e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_owned()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    /// Graded reverse lexicographic order: higher degree is larger; on ties the
    /// monomial with the smaller exponent in the last differing variable is larger.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.exponents.iter().zip(other.exponents.iter()).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Hashes must agree with the borrowed `[u8]` form used for basis lookups.
impl Hash for Monomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.exponents.hash(state);
    }
}

impl Borrow<[u8]> for Monomial {
    fn borrow(&self) -> &[u8] {
        &self.exponents
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&[]))
    }
}

/// Sparse polynomial over `F_p` in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularPolynomial {
    p: u32,
    nvars: usize,
    terms: BTreeMap<Monomial, u32>,
}

impl ModularPolynomial {
    pub fn zero(p: u32, nvars: usize) -> Self {
        Self { p, nvars, terms: BTreeMap::new() }
    }

    pub fn from_monomial(p: u32, m: Monomial, coeff: u32) -> Self {
        let mut f = Self::zero(p, m.nvars());
        f.add_term(m, coeff);
        f
    }

    pub fn from_terms(p: u32, nvars: usize, terms: impl IntoIterator<Item = (Monomial, u32)>) -> Self {
        let mut f = Self::zero(p, nvars);
        for (m, c) in terms {
            f.add_term(m, c);
        }
        f
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
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

    /// Terms in decreasing monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().rev().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Common degree of all terms, `None` for the zero polynomial.
    pub fn homogeneous_degree(&self) -> Result<Option<u32>, PolyError> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let Some(first) = degrees.next() else {
            return Ok(None);
        };
        if degrees.all(|d| d == first) {
            Ok(Some(first))
        } else {
            Err(PolyError::NotHomogeneous)
        }
    }

    /// Adds `coeff * m`, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, coeff: u32) {
        assert_eq!(m.nvars(), self.nvars, "monomial over a different ring");
        let coeff = coeff % self.p;
        if coeff == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = (*o.get() + coeff) % p;
                if sum == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_ring(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars || self.p != other.p {
            return Err(PolyError::RingMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Self {
        let mut out = Self::zero(self.p, self.nvars);
        for (m, &a) in &self.terms {
            out.add_term(m.clone(), ((a as u64 * (c % self.p) as u64) % self.p as u64) as u32);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.scale(self.p - 1))
    }

    fn mul_filtered(&self, other: &Self, q: Option<u32>) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let p = self.p as u64;
        let mut out = Self::zero(self.p, self.nvars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let m = a.mul(b);
                if q.is_some_and(|q| !m.is_truncated(q)) {
                    continue;
                }
                out.add_term(m, ((ca as u64 * cb as u64) % p) as u32);
            }
        }
        Ok(out)
    }

    /// Ordinary product in `S`, no truncation.
    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_filtered(other, None)
    }

    /// Product in `S / m^[q]`: any monomial with an exponent `>= q` is dropped.
    pub fn mul_reduce(&self, other: &Self, q: u32) -> Result<Self, PolyError> {
        self.mul_filtered(other, Some(q))
    }

    /// `self^e` computed in `S / m^[q]`.
    pub fn pow_reduce(&self, e: u32, q: u32) -> Result<Self, PolyError> {
        let mut acc = Self::from_monomial(self.p, Monomial::one(self.nvars), 1).reduce(q);
        for _ in 0..e {
            acc = acc.mul_reduce(self, q)?;
        }
        Ok(acc)
    }

    /// Image in `S / m^[q]`.
    pub fn reduce(&self, q: u32) -> Self {
        Self {
            p: self.p,
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| m.is_truncated(q)).map(|(m, &c)| (m.clone(), c)).collect(),
        }
    }

    pub fn fmt_with(&self, labels: &[String]) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        self.terms()
            .map(|(m, c)| {
                if c == 1 {
                    m.fmt_with(labels)
                } else if m.degree() == 0 {
                    c.to_string()
                } else {
                    format!("{c}*{}", m.fmt_with(labels))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for ModularPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.fmt_with(&[]), self.p)
    }
}

/// `f * m` in `S / m^[q]`.
pub fn multiply_reduce(f: &ModularPolynomial, m: &Monomial, q: u32) -> ModularPolynomial {
    assert_eq!(f.nvars(), m.nvars(), "monomial over a different ring");
    let mut out = ModularPolynomial::zero(f.p(), f.nvars());
    for (t, c) in f.terms() {
        let prod = t.mul(m);
        if prod.is_truncated(q) {
            out.add_term(prod, c);
        }
    }
    out
}

/// Monomial basis of the degree-`d` component of `S / m^[q]`, in decreasing
/// graded reverse lexicographic order.
#[derive(Clone)]
pub struct SliceBasis {
    r: usize,
    q: u32,
    d: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl SliceBasis {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn position(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    /// Polynomial with the given coefficient vector in this basis.
    pub fn combination(&self, p: u32, coeffs: &[u32]) -> ModularPolynomial {
        assert_eq!(coeffs.len(), self.len());
        ModularPolynomial::from_terms(p, self.r, self.monomials.iter().cloned().zip(coeffs.iter().copied()))
    }

    /// Coordinates of a degree-`d` truncated polynomial in this basis.
    pub fn coordinates(&self, f: &ModularPolynomial) -> Option<Vec<u32>> {
        let mut v = vec![0u32; self.len()];
        for (m, c) in f.terms() {
            v[self.position(m.exponents())?] = c;
        }
        Some(v)
    }
}

fn validate_rq(r: usize, q: u32) -> Result<(), PolyError> {
    if r == 0 || q == 0 || q > MAX_Q {
        return Err(PolyError::InvalidParameters(format!("need r >= 1 and 1 <= q <= {MAX_Q}, got r = {r}, q = {q}")));
    }
    Ok(())
}

fn enumerate_exponents(r: usize, q: u32, d: u32) -> Vec<Vec<u8>> {
    fn rec(pos: usize, left: u32, bound: u32, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        let r = cur.len();
        if pos + 1 == r {
            if left <= bound {
                cur[pos] = left as u8;
                out.push(cur.clone());
            }
            return;
        }
        // The remaining variables can absorb at most bound * (r - pos - 1).
        let rest_cap = bound * (r - pos - 1) as u32;
        let lo = left.saturating_sub(rest_cap);
        for e in lo..=left.min(bound) {
            cur[pos] = e as u8;
            rec(pos + 1, left - e, bound, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if d as u64 <= (q as u64 - 1) * r as u64 {
        rec(0, d, q - 1, &mut vec![0u8; r], &mut out);
    }
    out
}

pub fn slice_basis(r: usize, q: u32, d: u32) -> Result<SliceBasis, PolyError> {
    validate_rq(r, q)?;
    let mut monomials: Vec<Monomial> = enumerate_exponents(r, q, d).into_iter().map(Monomial::new).collect();
    monomials.sort_unstable_by(|a, b| b.cmp(a));
    let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    Ok(SliceBasis { r, q, d, monomials, index })
}

/// Number of degree-`d` monomials in `r` variables with all exponents below `q`.
pub fn truncated_dimension(r: usize, q: u32, d: u32) -> u128 {
    if r == 0 {
        return u128::from(d == 0);
    }
    let (r64, q64, d64) = (r as u64, q as u64, d as u64);
    let mut total: i128 = 0;
    let mut i = 0u64;
    while i <= r64 && i * q64 <= d64 {
        let term = binomial(r64, i) as i128 * binomial(d64 - i * q64 + r64 - 1, r64 - 1) as i128;
        if i.is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
        i += 1;
    }
    total as u128
}

/// Coefficients of `((1 - t^q) / (1 - t))^r`, i.e. the Hilbert function of `S / m^[q]`.
pub fn truncated_hilbert_series(r: usize, q: u32) -> Vec<u128> {
    let q = q.max(1) as usize;
    let mut series = vec![1u128];
    for _ in 0..r {
        let mut next = vec![0u128; series.len() + q - 1];
        for (i, &c) in series.iter().enumerate() {
            for slot in &mut next[i..i + q] {
                *slot += c;
            }
        }
        series = next;
    }
    series
}

/// Which family of matrices the variables parametrize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixShape {
    Generic { rows: usize, cols: usize },
    Symmetric { n: usize },
    Skew { n: usize },
}

/// One matrix entry as a scaled variable, or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearEntry {
    pub var: usize,
    pub coeff: i64,
}

/// Assignment of polynomial variables to the entries of a structured matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    shape: MatrixShape,
    labels: Vec<String>,
}

fn entry_label(i: usize, j: usize) -> String {
    if i < 10 && j < 10 {
        format!("x{i}{j}")
    } else {
        format!("x{i}_{j}")
    }
}

impl VariableLayout {
    pub fn generic(rows: usize, cols: usize) -> Self {
        let labels = (1..=rows).flat_map(|i| (1..=cols).map(move |j| entry_label(i, j))).collect();
        Self { shape: MatrixShape::Generic { rows, cols }, labels }
    }

    pub fn symmetric(n: usize) -> Self {
        let labels = (1..=n).flat_map(|i| (i..=n).map(move |j| entry_label(i, j))).collect();
        Self { shape: MatrixShape::Symmetric { n }, labels }
    }

    pub fn skew(n: usize) -> Self {
        let labels = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| entry_label(i, j))).collect();
        Self { shape: MatrixShape::Skew { n }, labels }
    }

    pub fn shape(&self) -> MatrixShape {
        self.shape
    }

    pub fn nvars(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> (usize, usize) {
        match self.shape {
            MatrixShape::Generic { rows, cols } => (rows, cols),
            MatrixShape::Symmetric { n } | MatrixShape::Skew { n } => (n, n),
        }
    }

    /// Variable index of the entry `x_ij` (0-based `i`, `j`), with the sign
    /// imposed by the symmetry; `None` for structural zeros.
    pub fn entry(&self, i: usize, j: usize) -> Option<LinearEntry> {
        let upper = |a: usize, b: usize, n: usize, diag: bool| {
            // Row-major position of (a, b), a <= b, within the stored triangle.
            let off = usize::from(!diag);
            let before: usize = (0..a).map(|k| n - k - off).sum();
            before + (b - a - off)
        };
        match self.shape {
            MatrixShape::Generic { cols, .. } => Some(LinearEntry { var: i * cols + j, coeff: 1 }),
            MatrixShape::Symmetric { n } => {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                Some(LinearEntry { var: upper(a, b, n, true), coeff: 1 })
            }
            MatrixShape::Skew { n } => match i.cmp(&j) {
                Ordering::Equal => None,
                Ordering::Less => Some(LinearEntry { var: upper(i, j, n, false), coeff: 1 }),
                Ordering::Greater => Some(LinearEntry { var: upper(j, i, n, false), coeff: -1 }),
            },
        }
    }

    /// Full matrix of entries.
    pub fn entry_matrix(&self) -> EntryMatrix {
        let (rows, cols) = self.dims();
        let entries = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| self.entry(i, j)).collect();
        EntryMatrix { rows, cols, nvars: self.nvars(), entries }
    }
}

/// Matrix whose entries are scaled variables, used to expand determinants
/// and Pfaffians symbolically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Option<LinearEntry>>,
}

impl EntryMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<LinearEntry> {
        self.entries[i * self.cols + j]
    }

    /// Multiplies entry `(i, j)` by `factor(i, j)`; zero factors make structural zeros.
    pub fn scaled(&self, factor: impl Fn(usize, usize) -> i64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = &mut out.entries[i * self.cols + j];
                if let Some(entry) = e {
                    let c = entry.coeff * factor(i, j);
                    *e = (c != 0).then_some(LinearEntry { var: entry.var, coeff: c });
                }
            }
        }
        out
    }

    /// Square submatrix on the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let entries = rows.iter().flat_map(|&i| cols.iter().map(move |&j| self.get(i, j))).collect();
        Self { rows: rows.len(), cols: cols.len(), nvars: self.nvars, entries }
    }

    /// Determinant by full permutation expansion, coefficients reduced mod `p`.
    pub fn determinant(&self, p: u32) -> Result<ModularPolynomial, PolyError> {
        if self.rows != self.cols {
            return Err(PolyError::InvalidSize(format!(
                "determinant of a non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self.rows > MAX_DET_SIZE {
            return Err(PolyError::InvalidSize(format!(
                "determinant expansion is limited to n <= {MAX_DET_SIZE}, got {}",
                self.rows
            )));
        }
        let n = self.rows;
        let mut acc: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
        let mut exps = vec![0u8; self.nvars];
        let mut used = vec![false; n];
        self.expand_det(0, 1, &mut used, &mut exps, &mut acc);
        Ok(collect(p, self.nvars, acc))
    }

    fn expand_det(&self, row: usize, coeff: i64, used: &mut [bool], exps: &mut [u8], acc: &mut BTreeMap<Vec<u8>, i64>) {
        let n = self.rows;
        if row == n {
            *acc.entry(exps.to_vec()).or_insert(0) += coeff;
            return;
        }
        // Sign of the permutation accumulates as the parity of columns skipped.
        let mut skipped = 0;
        for col in 0..n {
            if used[col] {
                continue;
            }
            if let Some(e) = self.get(row, col) {
                let sign = if skipped % 2 == 0 { 1 } else { -1 };
                used[col] = true;
                exps[e.var] += 1;
                self.expand_det(row + 1, coeff * sign * e.coeff, used, exps, acc);
                exps[e.var] -= 1;
                used[col] = false;
            }
            skipped += 1;
        }
    }

    /// Pfaffian of a skew-symmetric matrix by expansion along the first row,
    /// normalized so that the Pfaffian of `[[0, a], [-a, 0]]` is `a`.
    pub fn pfaffian(&self, p: u32) -> Result<ModularPolynomial, PolyError> {
        if self.rows != self.cols || self.rows % 2 == 1 {
            return Err(PolyError::InvalidSize(format!(
                "Pfaffian needs an even square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        let mut acc: BTreeMap<Vec<u8>, i64> = BTreeMap::new();
        self.expand_pf(&idx, 1, &mut vec![0u8; self.nvars], &mut acc);
        Ok(collect(p, self.nvars, acc))
    }

    fn expand_pf(&self, idx: &[usize], coeff: i64, exps: &mut [u8], acc: &mut BTreeMap<Vec<u8>, i64>) {
        if idx.is_empty() {
            *acc.entry(exps.to_vec()).or_insert(0) += coeff;
            return;
        }
        let first = idx[0];
        for k in 1..idx.len() {
            let Some(e) = self.get(first, idx[k]) else {
                continue;
            };
            // Sign (-1)^(k+1) in 0-based position; the leading term has sign +.
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&c| c != idx[k]).collect();
            exps[e.var] += 1;
            self.expand_pf(&rest, coeff * sign * e.coeff, exps, acc);
            exps[e.var] -= 1;
        }
    }
}

fn collect(p: u32, nvars: usize, acc: BTreeMap<Vec<u8>, i64>) -> ModularPolynomial {
    ModularPolynomial::from_terms(p, nvars, acc.into_iter().map(|(e, c)| (Monomial::new(e), reduce_signed(c, p))))
}

/// Defining polynomial of a family: the determinant for generic (square) and
/// symmetric layouts, the Pfaffian for skew layouts.
pub fn build_family_polynomial(layout: &VariableLayout, p: u32) -> Result<ModularPolynomial, PolyError> {
    let m = layout.entry_matrix();
    match layout.shape() {
        MatrixShape::Generic { rows, cols } if rows != cols => {
            Err(PolyError::InvalidSize(format!("generic determinant needs a square matrix, got {rows}x{cols}")))
        }
        MatrixShape::Generic { .. } | MatrixShape::Symmetric { .. } => m.determinant(p),
        MatrixShape::Skew { n } if n % 2 == 1 => Err(PolyError::InvalidSize(format!("Pfaffian needs even n, got {n}"))),
        MatrixShape::Skew { .. } => m.pfaffian(p),
    }
}

/// Matrix of multiplication by a homogeneous `f` from degree `d_source` to
/// degree `d_source + deg f` in `S / m^[q]`, with columns indexed by the source
/// basis. The zero polynomial gives the zero map into degree `d_source`.
pub fn mult_map_matrix(f: &ModularPolynomial, q: u32, d_source: u32) -> Result<PrimeFieldMatrix, PolyError> {
    let k = f.homogeneous_degree()?.unwrap_or(0);
    let source = slice_basis(f.nvars(), q, d_source)?;
    let target = slice_basis(f.nvars(), q, d_source + k)?;
    mult_map_between(f, &source, &target)
}

/// Same as [`mult_map_matrix`] with precomputed bases.
pub fn mult_map_between(
    f: &ModularPolynomial,
    source: &SliceBasis,
    target: &SliceBasis,
) -> Result<PrimeFieldMatrix, PolyError> {
    let mut m = PrimeFieldMatrix::zeros(f.p() as u64, target.len(), source.len())?;
    let q = source.q();
    let terms: Vec<(&Monomial, u32)> = f.terms().collect();
    let mut buf = vec![0u8; f.nvars()];
    for (col, mono) in source.monomials().iter().enumerate() {
        'terms: for &(t, c) in &terms {
            for (slot, (&a, &b)) in buf.iter_mut().zip(t.exponents().iter().zip(mono.exponents())) {
                let e = a as u32 + b as u32;
                if e >= q {
                    continue 'terms;
                }
                *slot = e as u8;
            }
            if let Some(row) = target.position(&buf) {
                m.add_to(row, col, c);
            }
        }
    }
    Ok(m)
}
