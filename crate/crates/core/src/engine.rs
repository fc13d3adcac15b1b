//! Socle degrees `v_R(q)` of `R / m^[q]` for determinantal, symmetric
//! determinantal, Pfaffian and maximal-minor rings, with the matching
//! annihilator degrees, bounds and threshold tables.
//!
//! For a hypersurface `R = S / (f)` with `deg f = k`, the degree-`d` part of
//! `R / m^[q]` is the cokernel of `(S/m^[q])_{d-k} --f--> (S/m^[q])_d`, so
//! `v_R(q)` is the largest `d` where that map is not onto. The least degree
//! of an annihilator of `f` in `S/m^[q]` is found by a separate kernel scan,
//! and the two results are tied together by `v + indeg = (q-1) r`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{binomial, is_prime};
use crate::linalg::{self, estimate_footprint, LinalgError};
use crate::poly::{
    build_family_polynomial, multiply_reduce, slice_basis, truncated_dimension, EntryMatrix, ModularPolynomial,
    Monomial, PolyError, SliceBasis, VariableLayout, MAX_DET_SIZE, MAX_Q,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid family specification: {0}")]
    InvalidSpec(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("duality check failed: v = {v}, indeg = {indeg}, (q-1)r = {top}")]
    Duality { v: u32, indeg: u32, top: u32 },
    #[error("annihilator witness failed verification")]
    Witness,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl EngineError {
    /// Estimated footprint when the failure came from the memory guardrail.
    pub fn guardrail_estimate(&self) -> Option<u64> {
        match self {
            Self::Linalg(LinalgError::TooLarge { estimate, .. })
            | Self::Poly(PolyError::Linalg(LinalgError::TooLarge { estimate, .. })) => Some(*estimate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Generic,
    Symmetric,
    Pfaffian,
    MaximalMinors,
    PolynomialRing,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Generic, Family::Symmetric, Family::Pfaffian, Family::MaximalMinors, Family::PolynomialRing];

    pub fn name(self) -> &'static str {
        match self {
            Family::Generic => "generic",
            Family::Symmetric => "symmetric",
            Family::Pfaffian => "pfaffian",
            Family::MaximalMinors => "maximal_minors",
            Family::PolynomialRing => "polynomial_ring",
        }
    }

    pub fn is_hypersurface(self) -> bool {
        matches!(self, Family::Generic | Family::Symmetric | Family::Pfaffian)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "generic" | "det" | "determinant" => Ok(Family::Generic),
            "symmetric" | "sym" => Ok(Family::Symmetric),
            "pfaffian" | "skew" => Ok(Family::Pfaffian),
            "maximal_minors" | "minors" => Ok(Family::MaximalMinors),
            "polynomial_ring" | "poly" => Ok(Family::PolynomialRing),
            other => Err(EngineError::InvalidSpec(format!("unknown family '{other}'"))),
        }
    }
}

/// One ring of the catalogue together with the Frobenius level `q = p^s`.
///
/// `m x n` are the matrix dimensions; square families use `m = n`, and the
/// polynomial ring stores its variable count in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    pub p: u32,
    pub s: u32,
}

impl FamilySpec {
    pub fn new(family: Family, m: usize, n: usize, p: u32, s: u32) -> Result<Self, EngineError> {
        let spec = Self { family, m, n, p, s };
        spec.validate()?;
        Ok(spec)
    }

    /// Square family of size `n` (or polynomial ring in `n` variables).
    pub fn square(family: Family, n: usize, p: u32, s: u32) -> Result<Self, EngineError> {
        Self::new(family, n, n, p, s)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidSpec(msg));
        if !is_prime(self.p as u64) || self.p >= 1 << 16 {
            return bad(format!("p = {} is not a prime below 2^16", self.p));
        }
        if self.s == 0 {
            return bad("s must be at least 1".into());
        }
        let Some(q) = (self.p as u64).checked_pow(self.s) else {
            return bad(format!("q = {}^{} overflows", self.p, self.s));
        };
        if self.family != Family::PolynomialRing && q > MAX_Q as u64 {
            return bad(format!("q = {q} exceeds the supported maximum {MAX_Q}"));
        }
        let (m, n) = (self.m, self.n);
        match self.family {
            Family::MaximalMinors if !(m >= n && n >= 1) => {
                bad(format!("maximal minors need m >= n >= 1, got {m}x{n}"))
            }
            Family::MaximalMinors if n > MAX_DET_SIZE => bad(format!("minor size {n} exceeds {MAX_DET_SIZE}")),
            Family::MaximalMinors => Ok(()),
            _ if m != n => bad(format!("{} needs a square size, got {m}x{n}", self.family)),
            Family::PolynomialRing if n == 0 => bad("polynomial ring needs r >= 1".into()),
            Family::PolynomialRing => Ok(()),
            Family::Pfaffian if n == 0 || n % 2 == 1 => bad(format!("Pfaffian needs even n >= 2, got {n}")),
            Family::Generic | Family::Symmetric if n == 0 || n > MAX_DET_SIZE => {
                bad(format!("determinant size must be in 1..={MAX_DET_SIZE}, got {n}"))
            }
            _ => Ok(()),
        }
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.s)
    }

    /// Number of variables of the ambient polynomial ring.
    pub fn nvars(&self) -> usize {
        let n = self.n;
        match self.family {
            Family::Generic | Family::MaximalMinors => self.m * n,
            Family::Symmetric => n * (n + 1) / 2,
            Family::Pfaffian => n * (n - 1) / 2,
            Family::PolynomialRing => n,
        }
    }

    /// Degree of the defining equations (0 for the polynomial ring).
    pub fn equation_degree(&self) -> usize {
        match self.family {
            Family::Generic | Family::Symmetric | Family::MaximalMinors => self.n,
            Family::Pfaffian => self.n / 2,
            Family::PolynomialRing => 0,
        }
    }

    /// Proven value of the diagonal F-threshold `c(R)`.
    pub fn theorem_c(&self) -> Ratio<u64> {
        let (m, n) = (self.m as u64, self.n as u64);
        match self.family {
            Family::Generic => Ratio::from_integer(n * n - n),
            Family::Symmetric => Ratio::new(n * n - 1, 2),
            Family::Pfaffian => Ratio::new(n * n - 2 * n, 2),
            Family::MaximalMinors => Ratio::from_integer(m * (n - 1)),
            Family::PolynomialRing => Ratio::from_integer(n),
        }
    }

    /// `-a(R) = r - k` for hypersurfaces and `r` for the polynomial ring.
    pub fn lower_bound(&self) -> Option<u64> {
        match self.family {
            Family::MaximalMinors if self.m != self.n => None,
            _ => Some((self.nvars() - self.equation_degree()) as u64),
        }
    }

    /// Closed-form upper bound on `v_R(q)` at this `q`, when one is proven.
    pub fn upper_bound_vq(&self) -> u64 {
        let q = self.q();
        let (m, n) = (self.m as u64, self.n as u64);
        match self.family {
            Family::Generic | Family::MaximalMinors => (q - 1) * m * (n - 1),
            Family::Symmetric => symmetric_upper_bound(n, q),
            // Degeneration to S_1 (x) S_2/det(X) with X generic of size n/2.
            Family::Pfaffian => (q - 1) * (n * n - 2 * n) / 2,
            Family::PolynomialRing => (q - 1) * n,
        }
    }

    fn start_hint(&self) -> Option<u32> {
        let q = self.q();
        let n = self.n as u64;
        match self.family {
            Family::Generic | Family::MaximalMinors => Some(self.upper_bound_vq() as u32),
            Family::Symmetric => {
                let base = (q - 1) * n * (n - 1) / 2;
                Some((base + (q * (n - 1)).div_ceil(2)) as u32)
            }
            _ => None,
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::MaximalMinors => write!(f, "{} {}x{} p={} s={}", self.family, self.m, self.n, self.p, self.s),
            _ => write!(f, "{} n={} p={} s={}", self.family, self.n, self.p, self.s),
        }
    }
}

/// `floor(q (n^2 - 1) / 2 - C(n, 2))`.
pub fn symmetric_upper_bound(n: u64, q: u64) -> u64 {
    (q * (n * n - 1) - n * (n - 1)) / 2
}

/// `q (n^2 - 1) / 2 - C(n, 2)` for even `q`: the exact value in characteristic 2.
pub fn symmetric_char2_value(n: u64, q: u64) -> u64 {
    symmetric_upper_bound(n, q)
}

/// `(n^2 - 1)(q - 1) / 2` for odd `q`.
pub fn symmetric_odd_lower_bound(n: u64, q: u64) -> u64 {
    (n * n - 1) * (q - 1) / 2
}

/// Dimension data for one scanned degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub d: u32,
    /// `dim (S/m^[q])_d`.
    pub ambient: u64,
    /// Rank of the ideal's degree-`d` part inside it.
    pub rank: u64,
    /// `dim (R/m^[q])_d`.
    pub quotient: u64,
}

/// Least-degree annihilator of `f` in `S / m^[q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annihilator {
    pub degree: u32,
    pub witness: ModularPolynomial,
}

/// Result of a hypersurface scan.
#[derive(Debug, Clone)]
pub struct SocleScan {
    pub r: usize,
    pub q: u32,
    pub k: u32,
    pub v: u32,
    pub annihilator: Annihilator,
    pub slices: Vec<SliceRecord>,
}

impl SocleScan {
    pub fn indeg(&self) -> u32 {
        self.annihilator.degree
    }
}

fn level(p: u32, s: u32) -> Result<u32, EngineError> {
    if !is_prime(p as u64) {
        return Err(EngineError::InvalidSpec(format!("p = {p} is not prime")));
    }
    if s == 0 {
        return Err(EngineError::InvalidSpec("s must be at least 1".into()));
    }
    match (p as u64).checked_pow(s) {
        Some(q) if q <= MAX_Q as u64 => Ok(q as u32),
        _ => Err(EngineError::InvalidSpec(format!("q = {p}^{s} exceeds {MAX_Q}"))),
    }
}

fn hypersurface_degree(f: &ModularPolynomial, p: u32) -> Result<u32, EngineError> {
    if f.p() != p {
        return Err(EngineError::InvalidSpec(format!("polynomial is over F_{}, expected F_{p}", f.p())));
    }
    match f.homogeneous_degree()? {
        None => Err(EngineError::Degenerate("f is zero; use v_polynomial_ring".into())),
        Some(0) => Err(EngineError::Degenerate("f is a nonzero constant".into())),
        Some(k) => Ok(k),
    }
}

/// Downward scan for the largest degree with a nonzero quotient.
///
/// A start hint `h` is accepted only after confirming the quotient vanishes in
/// degree `h + 1`; vanishing then persists in every higher degree because the
/// quotient is generated in degree one.
fn scan_down<F>(top: u32, hint: Option<u32>, mut slice: F) -> Result<(u32, Vec<SliceRecord>), EngineError>
where
    F: FnMut(u32) -> Result<SliceRecord, EngineError>,
{
    let mut records = Vec::new();
    let mut start = top;
    if let Some(h) = hint.filter(|&h| h < top) {
        let probe = slice(h + 1)?;
        records.push(probe);
        if probe.quotient == 0 {
            start = h;
        }
    }
    for d in (0..=start).rev() {
        let rec = slice(d)?;
        records.push(rec);
        if rec.quotient > 0 {
            return Ok((d, records));
        }
    }
    unreachable!("degree 0 quotient is nonzero for a proper homogeneous ideal")
}

fn hypersurface_slice(f: &ModularPolynomial, q: u32, k: u32, d: u32) -> Result<SliceRecord, EngineError> {
    let r = f.nvars();
    let target = slice_basis(r, q, d)?;
    let rank = if d < k || target.is_empty() {
        0
    } else {
        let source = slice_basis(r, q, d - k)?;
        crate::poly::mult_map_between(f, &source, &target)?.rank() as u64
    };
    let ambient = target.len() as u64;
    Ok(SliceRecord { d, ambient, rank, quotient: ambient - rank })
}

/// `v_R(q)` for `R = S / (f)`, scanning down from `(q-1) r`.
pub fn v_hypersurface(f: &ModularPolynomial, p: u32, s: u32) -> Result<SocleScan, EngineError> {
    scan_hypersurface(f, p, s, None)
}

fn scan_hypersurface(f: &ModularPolynomial, p: u32, s: u32, hint: Option<u32>) -> Result<SocleScan, EngineError> {
    let q = level(p, s)?;
    let k = hypersurface_degree(f, p)?;
    let r = f.nvars();
    let top = (q - 1) * r as u32;
    let (v, slices) = scan_down(top, hint, |d| hypersurface_slice(f, q, k, d))?;
    let annihilator = annihilator_with_degree(f, p, s, k, top - v)?;
    Ok(SocleScan { r, q, k, v, annihilator, slices })
}

/// First kernel vector of `f * : (S/m^[q])_d -> (S/m^[q])_{d+k}`, if any.
fn annihilator_at(f: &ModularPolynomial, q: u32, k: u32, d: u32) -> Result<Option<ModularPolynomial>, EngineError> {
    let r = f.nvars();
    let source = slice_basis(r, q, d)?;
    if source.is_empty() {
        return Ok(None);
    }
    if d + k > (q - 1) * r as u32 {
        // The target slice is zero, so the whole source is killed.
        return Ok(Some(ModularPolynomial::from_monomial(f.p(), source.monomials()[0].clone(), 1)));
    }
    let target = slice_basis(r, q, d + k)?;
    let kernel = crate::poly::mult_map_between(f, &source, &target)?.kernel_basis();
    Ok(kernel.first().map(|v| source.combination(f.p(), v)))
}

fn verified(
    f: &ModularPolynomial,
    q: u32,
    degree: u32,
    witness: ModularPolynomial,
) -> Result<Annihilator, EngineError> {
    if witness.is_zero() || !f.mul_reduce(&witness, q)?.is_zero() {
        return Err(EngineError::Witness);
    }
    Ok(Annihilator { degree, witness })
}

/// Least degree `t` of a nonzero `g` in `S / m^[q]` with `f g = 0`, plus the
/// witness built from the first kernel vector of the degree-`t` multiplication map.
///
/// Annihilation is upward closed below the socle degree (if `g f = 0` then
/// `x g f = 0` and some `x g` is nonzero), so the least degree is found by bisection.
pub fn indeg_annihilator(f: &ModularPolynomial, p: u32, s: u32) -> Result<Annihilator, EngineError> {
    let q = level(p, s)?;
    let k = hypersurface_degree(f, p)?;
    let top = (q - 1) * f.nvars() as u32;
    let (mut lo, mut hi) = (0u32, top);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if annihilator_at(f, q, k, mid)?.is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let witness = annihilator_at(f, q, k, lo)?.expect("socle elements annihilate f");
    verified(f, q, lo, witness)
}

/// Confirms the least annihilator degree is exactly `t` by checking degrees `t - 1` and `t`.
fn annihilator_with_degree(f: &ModularPolynomial, p: u32, s: u32, k: u32, t: u32) -> Result<Annihilator, EngineError> {
    let q = level(p, s)?;
    let below = if t == 0 { None } else { annihilator_at(f, q, k, t - 1)? };
    match (below, annihilator_at(f, q, k, t)?) {
        (None, Some(witness)) => verified(f, q, t, witness),
        _ => Err(EngineError::Duality {
            v: (q - 1) * f.nvars() as u32 - t,
            indeg: indeg_annihilator(f, p, s)?.degree,
            top: (q - 1) * f.nvars() as u32,
        }),
    }
}

/// Generic `m x n` matrix of variables and its maximal minors.
pub fn maximal_minors(m: usize, n: usize, p: u32) -> Result<Vec<ModularPolynomial>, EngineError> {
    if !(m >= n && n >= 1) {
        return Err(EngineError::InvalidSpec(format!("maximal minors need m >= n >= 1, got {m}x{n}")));
    }
    let entries = VariableLayout::generic(m, n).entry_matrix();
    let cols: Vec<usize> = (0..n).collect();
    combinations(m, n).into_iter().map(|rows| Ok(entries.submatrix(&rows, &cols).determinant(p)?)).collect()
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn ideal_slice(
    gens: &[ModularPolynomial],
    r: usize,
    q: u32,
    k: u32,
    d: u32,
    p: u32,
) -> Result<SliceRecord, EngineError> {
    let target = slice_basis(r, q, d)?;
    let ambient = target.len() as u64;
    if d < k || target.is_empty() {
        return Ok(SliceRecord { d, ambient, rank: 0, quotient: ambient });
    }
    let source = slice_basis(r, q, d - k)?;
    let count = gens.len() * source.len();
    let columns = gens.iter().flat_map(|g| {
        let target = &target;
        source.monomials().iter().map(move |u| column(g, u, q, target))
    });
    let rank = linalg::rank_of_sparse_columns(p as u64, target.len(), count, columns)? as u64;
    Ok(SliceRecord { d, ambient, rank, quotient: ambient - rank })
}

fn column(g: &ModularPolynomial, u: &Monomial, q: u32, target: &SliceBasis) -> Vec<(usize, u32)> {
    multiply_reduce(g, u, q)
        .terms()
        .map(|(m, c)| (target.position(m.exponents()).expect("product lies in the target slice"), c))
        .collect()
}

/// Result of a determinantal scan.
#[derive(Debug, Clone)]
pub struct DeterminantalScan {
    pub r: usize,
    pub q: u32,
    pub v: u32,
    pub slices: Vec<SliceRecord>,
}

/// `v_R(q)` for `R = S / I_n`, the maximal minors of a generic `m x n` matrix,
/// from the degreewise span of `{minor * monomial}` in `S / m^[q]`.
pub fn v_determinantal(m: usize, n: usize, p: u32, s: u32) -> Result<DeterminantalScan, EngineError> {
    let q = level(p, s)?;
    if n > MAX_DET_SIZE {
        return Err(EngineError::InvalidSpec(format!("minor size {n} exceeds {MAX_DET_SIZE}")));
    }
    let gens = maximal_minors(m, n, p)?;
    let r = m * n;
    let top = (q - 1) * r as u32;
    let hint = (q - 1) * (m * (n - 1)) as u32;
    let (v, slices) = scan_down(top, Some(hint), |d| ideal_slice(&gens, r, q, n as u32, d, p))?;
    Ok(DeterminantalScan { r, q, v, slices })
}

/// Socle degree `(q-1) r` of `S / m^[q]` itself.
pub fn v_polynomial_ring(r: usize, p: u32, s: u32) -> Result<u64, EngineError> {
    if r == 0 {
        return Err(EngineError::InvalidSpec("polynomial ring needs r >= 1".into()));
    }
    if !is_prime(p as u64) {
        return Err(EngineError::InvalidSpec(format!("p = {p} is not prime")));
    }
    if s == 0 {
        return Err(EngineError::InvalidSpec("s must be at least 1".into()));
    }
    let q = (p as u64).checked_pow(s).ok_or_else(|| EngineError::InvalidSpec(format!("q = {p}^{s} overflows")))?;
    Ok((q - 1) * r as u64)
}

/// Skew matrix entries with the two diagonal `m x m` blocks scaled by `t`.
pub fn degenerate_entries(n: usize, t: u32) -> EntryMatrix {
    let half = n / 2;
    VariableLayout::skew(n).entry_matrix().scaled(|i, j| if (i < half) == (j < half) { t as i64 } else { 1 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerationRow {
    pub t: u32,
    pub v: u32,
    pub indeg: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerationReport {
    pub n: usize,
    pub p: u32,
    pub s: u32,
    pub q: u32,
    pub rows: Vec<DegenerationRow>,
    /// `v` of the polynomial ring on the diagonal-block variables.
    pub block_part: u32,
    /// `v` of the generic determinant on the off-diagonal block.
    pub determinant_part: u32,
    /// Every nonzero `t` gives the same `v`.
    pub constant_off_zero: bool,
    /// `v(1) <= v(0)`.
    pub semicontinuous: bool,
    /// Direct `v(0)` equals `block_part + determinant_part`.
    pub additive: bool,
}

impl DegenerationReport {
    pub fn v_at(&self, t: u32) -> Option<u32> {
        self.rows.iter().find(|r| r.t == t).map(|r| r.v)
    }

    pub fn composed_v0(&self) -> u32 {
        self.block_part + self.determinant_part
    }

    pub fn all_ok(&self) -> bool {
        self.constant_off_zero && self.semicontinuous && self.additive
    }
}

/// Socle degrees along the degeneration of the Pfaffian to `det(X)`, where `X`
/// is the off-diagonal `n/2 x n/2` block.
pub fn degenerate_pfaffian(n: usize, p: u32, s: u32, t_values: &[u32]) -> Result<DegenerationReport, EngineError> {
    if n == 0 || n % 2 == 1 {
        return Err(EngineError::InvalidSpec(format!("degeneration needs even n >= 2, got {n}")));
    }
    let q = level(p, s)?;
    let mut ts: Vec<u32> = t_values.to_vec();
    ts.sort_unstable();
    ts.dedup();
    if let Some(&bad) = ts.iter().find(|&&t| t >= p) {
        return Err(EngineError::InvalidSpec(format!("t = {bad} is not a residue mod {p}")));
    }
    if !ts.contains(&0) || !ts.contains(&1) {
        return Err(EngineError::InvalidSpec("t values must include 0 and 1".into()));
    }
    let rows = ts
        .iter()
        .map(|&t| {
            let f = degenerate_entries(n, t).pfaffian(p)?;
            let scan = v_hypersurface(&f, p, s)?;
            Ok(DegenerationRow { t, v: scan.v, indeg: scan.indeg() })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    let half = n / 2;
    let block_vars = half * (half - 1);
    let block_part = if block_vars == 0 { 0 } else { v_polynomial_ring(block_vars, p, s)? as u32 };
    let determinant_part = v_determinantal(half, half, p, s)?.v;
    let v_of = |t: u32| rows.iter().find(|r| r.t == t).map(|r| r.v).expect("t present");
    let (v0, v1) = (v_of(0), v_of(1));
    Ok(DegenerationReport {
        n,
        p,
        s,
        q,
        constant_off_zero: rows.iter().filter(|r| r.t != 0).all(|r| r.v == v1),
        semicontinuous: v1 <= v0,
        additive: v0 == block_part + determinant_part,
        rows,
        block_part,
        determinant_part,
    })
}

/// Named inequality or identity checked on a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub spec: FamilySpec,
    pub q: u64,
    pub v: Option<u64>,
    pub indeg_ann: Option<u64>,
    pub lower_bound: Option<u64>,
    pub theorem_c: Ratio<u64>,
    pub upper_bound_vq: u64,
    pub checks: Vec<BoundCheck>,
    pub slice_dims: Vec<SliceRecord>,
    /// Estimated bytes when the guardrail skipped this computation.
    pub skipped: Option<u64>,
    pub wall_ms: u64,
}

impl ThresholdReport {
    /// Exact `v / q`.
    pub fn ratio(&self) -> Option<Ratio<u64>> {
        self.v.map(|v| Ratio::new(v, self.q))
    }

    pub fn bounds_ok(&self) -> bool {
        self.skipped.is_none() && self.checks.iter().all(|c| c.holds)
    }

    pub fn is_skipped(&self) -> bool {
        self.skipped.is_some()
    }
}

fn checks_for(spec: &FamilySpec, v: u64, indeg: Option<u64>) -> Vec<BoundCheck> {
    let q = spec.q();
    let n = spec.n as u64;
    let mut checks = Vec::new();
    let mut push = |name: &str, holds: bool| checks.push(BoundCheck { name: name.to_owned(), holds });
    if let Some(t) = indeg {
        push("duality", v + t == (q - 1) * spec.nvars() as u64);
    }
    match spec.family {
        Family::Generic | Family::MaximalMinors => push("determinantal_upper", v <= spec.upper_bound_vq()),
        Family::Symmetric => {
            push("symmetric_upper", v <= symmetric_upper_bound(n, q));
            if spec.p == 2 {
                push("symmetric_char2_lower", v >= symmetric_char2_value(n, q));
            } else {
                push("symmetric_odd_lower", v >= symmetric_odd_lower_bound(n, q));
            }
        }
        Family::Pfaffian => push("pfaffian_degeneration_upper", v <= spec.upper_bound_vq()),
        Family::PolynomialRing => push("socle_degree", v == spec.upper_bound_vq()),
    }
    checks
}

/// Rough footprint of the largest matrix a computation for `spec` would build.
pub fn estimate_spec_footprint(spec: &FamilySpec) -> u64 {
    if spec.family == Family::PolynomialRing {
        return 0;
    }
    let r = spec.nvars();
    let q = spec.q() as u32;
    let k = spec.equation_degree() as u32;
    let gens = match spec.family {
        Family::MaximalMinors => binomial(spec.m as u64, spec.n as u64) as u64,
        _ => 1,
    };
    let top = (q - 1) * r as u32;
    let clamp = |x: u128| usize::try_from(x).unwrap_or(usize::MAX);
    (k..=top)
        .map(|d| {
            let target = clamp(truncated_dimension(r, q, d));
            let source = clamp(truncated_dimension(r, q, d - k));
            if spec.family == Family::MaximalMinors {
                estimate_footprint(spec.p, source.saturating_mul(gens as usize), target)
            } else {
                estimate_footprint(spec.p, target, source)
            }
        })
        .max()
        .unwrap_or(0)
}

/// Computes the report for one ring, honoring the memory cap.
pub fn compute_report(spec: &FamilySpec, cap: u64) -> Result<ThresholdReport, EngineError> {
    spec.validate()?;
    let started = Instant::now();
    let mut report = ThresholdReport {
        spec: *spec,
        q: spec.q(),
        v: None,
        indeg_ann: None,
        lower_bound: spec.lower_bound(),
        theorem_c: spec.theorem_c(),
        upper_bound_vq: spec.upper_bound_vq(),
        checks: Vec::new(),
        slice_dims: Vec::new(),
        skipped: None,
        wall_ms: 0,
    };
    let estimate = estimate_spec_footprint(spec);
    if estimate > cap {
        report.skipped = Some(estimate);
        return Ok(report);
    }
    let outcome = run_spec(spec);
    match outcome {
        Ok((v, indeg, slices)) => {
            report.v = Some(v);
            report.indeg_ann = indeg;
            report.slice_dims = slices;
            report.checks = checks_for(spec, v, indeg);
        }
        Err(e) => match e.guardrail_estimate() {
            Some(est) => report.skipped = Some(est),
            None => return Err(e),
        },
    }
    report.wall_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

type SpecOutcome = (u64, Option<u64>, Vec<SliceRecord>);

fn run_spec(spec: &FamilySpec) -> Result<SpecOutcome, EngineError> {
    let (p, s, n) = (spec.p, spec.s, spec.n);
    let hypersurface = |layout: VariableLayout| -> Result<SpecOutcome, EngineError> {
        let f = build_family_polynomial(&layout, p)?;
        let scan = scan_hypersurface(&f, p, s, spec.start_hint())?;
        Ok((scan.v as u64, Some(scan.indeg() as u64), scan.slices))
    };
    match spec.family {
        Family::Generic => hypersurface(VariableLayout::generic(n, n)),
        Family::Symmetric => hypersurface(VariableLayout::symmetric(n)),
        Family::Pfaffian => hypersurface(VariableLayout::skew(n)),
        Family::MaximalMinors => {
            let scan = v_determinantal(spec.m, n, p, s)?;
            Ok((scan.v as u64, None, scan.slices))
        }
        Family::PolynomialRing => Ok((v_polynomial_ring(n, p, s)?, None, Vec::new())),
    }
}

/// Family with the list of `(m, n)` sizes to tabulate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRange {
    pub family: Family,
    pub sizes: Vec<(usize, usize)>,
}

/// One report per (family, size, p, s) with `1 <= s <= s_max`, ordered by
/// family, `m`, `n`, `p`, `s`. Jobs run on the current rayon pool.
pub fn threshold_table(
    ranges: &[FamilyRange],
    primes: &[u32],
    s_max: u32,
    cap: u64,
) -> Result<Vec<ThresholdReport>, EngineError> {
    let mut specs = Vec::new();
    for range in ranges {
        for &(m, n) in &range.sizes {
            for &p in primes {
                for s in 1..=s_max {
                    specs.push(FamilySpec::new(range.family, m, n, p, s)?);
                }
            }
        }
    }
    specs.sort_unstable_by_key(|s| (s.family, s.m, s.n, s.p, s.s));
    specs.dedup();
    specs.par_iter().map(|spec| compute_report(spec, cap)).collect()
}
