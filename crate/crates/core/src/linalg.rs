//! Exact dense linear algebra over a prime field `F_p`.
//!
//! Matrices over `F_2` are stored bit-packed, one `u64` word per 64 columns,
//! and reduced with XOR row operations. Every other prime uses half-word
//! residues. Elimination always pivots on the leftmost nonzero column and the
//! topmost available row, so ranks, echelon forms and kernel bases are
//! bit-identical regardless of how many threads take part.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::{inv_mod, is_prime, FastMod};

/// Default ceiling on the estimated memory footprint of a single matrix.
pub const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

static MEMORY_CAP: AtomicU64 = AtomicU64::new(DEFAULT_MEMORY_CAP);

/// Rows times words below which elimination stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// Current process-wide memory cap in bytes.
pub fn memory_cap() -> u64 {
    MEMORY_CAP.load(Ordering::Relaxed)
}

/// Sets the process-wide memory cap used by [`PrimeFieldMatrix`] constructors.
pub fn set_memory_cap(bytes: u64) {
    MEMORY_CAP.store(bytes, Ordering::Relaxed);
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("modulus {0} is not a prime below 2^16")]
    InvalidModulus(u64),
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows}x{cols} matrix over F_{p} needs an estimated {estimate} bytes, above the cap of {cap} bytes")]
    TooLarge { rows: usize, cols: usize, p: u32, estimate: u64, cap: u64 },
}

/// Estimated bytes needed to hold and eliminate a `rows x cols` matrix over `F_p`
/// (storage plus one working copy).
pub fn estimate_footprint(p: u32, rows: usize, cols: usize) -> u64 {
    let storage = if p == 2 {
        (rows as u64).saturating_mul(cols.div_ceil(64) as u64).saturating_mul(8)
    } else {
        (rows as u64).saturating_mul(cols as u64).saturating_mul(2)
    };
    storage.saturating_mul(2)
}

fn check_modulus(p: u64) -> Result<u32, LinalgError> {
    if p < (1 << 16) && is_prime(p) {
        Ok(p as u32)
    } else {
        Err(LinalgError::InvalidModulus(p))
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Storage {
    Packed { words: usize, data: Vec<u64> },
    Dense(Vec<u16>),
}

/// Dense matrix over `F_p` with `2 <= p < 2^16`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrimeFieldMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    storage: Storage,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub matrix: PrimeFieldMatrix,
    pub pivots: Vec<usize>,
}

impl PrimeFieldMatrix {
    /// Zero matrix, subject to the process-wide memory cap.
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Result<Self, LinalgError> {
        Self::zeros_with_cap(p, rows, cols, memory_cap())
    }

    pub fn zeros_with_cap(p: u64, rows: usize, cols: usize, cap: u64) -> Result<Self, LinalgError> {
        let p = check_modulus(p)?;
        let estimate = estimate_footprint(p, rows, cols);
        if estimate > cap {
            return Err(LinalgError::TooLarge { rows, cols, p, estimate, cap });
        }
        Ok(Self::zeros_unchecked(p, rows, cols))
    }

    fn zeros_unchecked(p: u32, rows: usize, cols: usize) -> Self {
        let storage = if p == 2 {
            let words = cols.div_ceil(64);
            Storage::Packed { words, data: vec![0; rows * words] }
        } else {
            Storage::Dense(vec![0; rows * cols])
        };
        Self { p, rows, cols, storage }
    }

    pub fn identity(p: u64, n: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(p, n, n)?;
        for i in 0..n {
            m.set(i, i, 1);
        }
        Ok(m)
    }

    /// Builds a matrix from row vectors; entries are reduced mod `p`.
    pub fn from_rows<R: AsRef<[u32]>>(p: u64, rows: &[R]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(p, rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch { expected: cols, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_packed(&self) -> bool {
        matches!(self.storage, Storage::Packed { .. })
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        match &self.storage {
            Storage::Packed { words, data } => ((data[i * words + j / 64] >> (j % 64)) & 1) as u32,
            Storage::Dense(data) => data[i * self.cols + j] as u32,
        }
    }

    /// Stores `v mod p` at `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        let v = v % self.p;
        match &mut self.storage {
            Storage::Packed { words, data } => {
                let w = &mut data[i * *words + j / 64];
                let bit = 1u64 << (j % 64);
                if v == 1 {
                    *w |= bit;
                } else {
                    *w &= !bit;
                }
            }
            Storage::Dense(data) => data[i * self.cols + j] = v as u16,
        }
    }

    /// Adds `v` to the entry at `(i, j)` modulo `p`.
    pub fn add_to(&mut self, i: usize, j: usize, v: u32) {
        let cur = self.get(i, j);
        let sum = (cur as u64 + (v % self.p) as u64) % self.p as u64;
        self.set(i, j, sum as u32);
    }

    pub fn row(&self, i: usize) -> Vec<u32> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros_unchecked(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0 {
                    t.set(j, i, v);
                }
            }
        }
        t
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let p = self.p as u64;
        Ok((0..self.rows)
            .map(|i| {
                let acc =
                    (0..self.cols).fold(0u64, |acc, j| (acc + self.get(i, j) as u64 * (v[j] % self.p) as u64) % p);
                acc as u32
            })
            .collect())
    }

    /// Copy of this matrix with scalar half-word storage, even for `p = 2`.
    pub fn to_unpacked(&self) -> Self {
        let mut data = vec![0u16; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[i * self.cols + j] = self.get(i, j) as u16;
            }
        }
        Self { p: self.p, rows: self.rows, cols: self.cols, storage: Storage::Dense(data) }
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate(false).len()
    }

    /// Rank computed on the scalar path; for `p = 2` this bypasses the bit-packed kernel.
    pub fn rank_reference(&self) -> usize {
        let mut work = self.to_unpacked();
        work.eliminate(false).len()
    }

    /// Reduced row echelon form with the fixed pivoting order.
    pub fn echelon(&self) -> Echelon {
        let mut work = self.clone();
        let pivots = work.eliminate(true);
        Echelon { matrix: work, pivots }
    }

    /// Basis of the right null space `{ v : M v = 0 }`, one vector per free column
    /// in increasing column order.
    pub fn kernel_basis(&self) -> Vec<Vec<u32>> {
        let Echelon { matrix, pivots } = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let p = self.p;
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0u32; self.cols];
                v[free] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    let e = matrix.get(i, free);
                    if e != 0 {
                        v[pc] = p - e;
                    }
                }
                v
            })
            .collect()
    }

    /// Row reduction in place; returns pivot columns. With `full`, entries above
    /// each pivot are cleared too (reduced echelon form).
    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        let (p, rows, cols) = (self.p, self.rows, self.cols);
        match &mut self.storage {
            Storage::Packed { words, data } => eliminate_packed(data, rows, cols, *words, full),
            Storage::Dense(data) => eliminate_dense(data, rows, cols, p, full),
        }
    }
}

fn eliminate_packed(data: &mut [u64], rows: usize, cols: usize, words: usize, full: bool) -> Vec<usize> {
    let mut pivots = Vec::new();
    if words == 0 {
        return pivots;
    }
    let mut rank = 0;
    let mut pivot_row = vec![0u64; words];
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let w = c / 64;
        let bit = 1u64 << (c % 64);
        let Some(found) = (rank..rows).find(|&r| data[r * words + w] & bit != 0) else {
            continue;
        };
        if found != rank {
            for k in 0..words {
                data.swap(found * words + k, rank * words + k);
            }
        }
        pivot_row.copy_from_slice(&data[rank * words..(rank + 1) * words]);
        let pivot = &pivot_row[w..];
        let this = rank;
        let clear = |(r, row): (usize, &mut [u64])| {
            if r != this && (full || r > this) && row[w] & bit != 0 {
                for (dst, src) in row[w..].iter_mut().zip(pivot) {
                    *dst ^= src;
                }
            }
        };
        let start = if full { 0 } else { rank + 1 };
        let tail = &mut data[start * words..];
        if (rows - start) * (words - w) >= PARALLEL_THRESHOLD {
            tail.par_chunks_mut(words).enumerate().for_each(|(k, row)| clear((k + start, row)));
        } else {
            tail.chunks_mut(words).enumerate().for_each(|(k, row)| clear((k + start, row)));
        }
        pivots.push(c);
        rank += 1;
    }
    pivots
}

fn eliminate_dense(data: &mut [u16], rows: usize, cols: usize, p: u32, full: bool) -> Vec<usize> {
    let mut pivots = Vec::new();
    if cols == 0 {
        return pivots;
    }
    let fm = FastMod::new(p);
    let mut rank = 0;
    let mut pivot_row = vec![0u16; cols];
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(found) = (rank..rows).find(|&r| data[r * cols + c] != 0) else {
            continue;
        };
        if found != rank {
            for k in 0..cols {
                data.swap(found * cols + k, rank * cols + k);
            }
        }
        let inv = inv_mod(data[rank * cols + c] as u32, p);
        for v in &mut data[rank * cols + c..(rank + 1) * cols] {
            *v = fm.rem(*v as u32 * inv) as u16;
        }
        pivot_row.copy_from_slice(&data[rank * cols..(rank + 1) * cols]);
        let pivot = &pivot_row[c..];
        let this = rank;
        let clear = |(r, row): (usize, &mut [u16])| {
            if r == this || !(full || r > this) {
                return;
            }
            let factor = row[c] as u32;
            if factor == 0 {
                return;
            }
            let neg = p - factor;
            for (dst, &src) in row[c..].iter_mut().zip(pivot) {
                // Below 2^32 because p < 2^16.
                *dst = fm.rem(*dst as u32 + neg * src as u32) as u16;
            }
        };
        let start = if full { 0 } else { rank + 1 };
        let tail = &mut data[start * cols..];
        if (rows - start) * (cols - c) >= PARALLEL_THRESHOLD {
            tail.par_chunks_mut(cols).enumerate().for_each(|(k, row)| clear((k + start, row)));
        } else {
            tail.chunks_mut(cols).enumerate().for_each(|(k, row)| clear((k + start, row)));
        }
        pivots.push(c);
        rank += 1;
    }
    pivots
}

impl fmt::Debug for PrimeFieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PrimeFieldMatrix over F_{} ({}x{})", self.p, self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

pub fn rank(m: &PrimeFieldMatrix) -> usize {
    m.rank()
}

pub fn kernel_basis(m: &PrimeFieldMatrix) -> Vec<Vec<u32>> {
    m.kernel_basis()
}

/// Dimension of the `F_p`-span of equal-length vectors.
pub fn rank_of_column_stack<V: AsRef<[u32]>>(columns: &[V], p: u64) -> Result<usize, LinalgError> {
    check_modulus(p)?;
    let Some(first) = columns.first() else {
        return Ok(0);
    };
    let len = first.as_ref().len();
    if let Some(bad) = columns.iter().find(|c| c.as_ref().len() != len) {
        return Err(LinalgError::DimensionMismatch { expected: len, found: bad.as_ref().len() });
    }
    let sparse = columns
        .iter()
        .map(|c| c.as_ref().iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (i, v)).collect::<Vec<_>>());
    rank_of_sparse_columns(p, len, columns.len(), sparse)
}

/// Span dimension of `count` vectors of length `len` given by their nonzero
/// entries. Repeated indices within a vector are summed.
pub fn rank_of_sparse_columns<I>(p: u64, len: usize, count: usize, columns: I) -> Result<usize, LinalgError>
where
    I: IntoIterator<Item = Vec<(usize, u32)>>,
{
    // Stacking the vectors as rows gives the transpose, which has the same rank.
    let mut m = PrimeFieldMatrix::zeros(p, count, len)?;
    for (row, col) in columns.into_iter().enumerate() {
        for (i, v) in col {
            m.add_to(row, i, v);
        }
    }
    Ok(m.rank())
}
