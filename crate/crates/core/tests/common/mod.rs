//! Independent oracles: brute-force quotient dimensions of `S / (I + m^[q])`
//! with their own elimination, semistandard tableau counting and exhaustive
//! base-`p` layer search. Nothing here calls into the crate's elimination or
//! slice code.
#![allow(dead_code)]

use frobthresh_core::{ModularPolynomial, Weight};

/// Homogeneous generator as `(exponents, coefficient)` pairs.
pub type Terms = Vec<(Vec<u8>, u64)>;

pub fn terms_of(f: &ModularPolynomial) -> Terms {
    f.terms().map(|(m, c)| (m.exponents().to_vec(), c as u64)).collect()
}

/// Rank over `F_p` by plain row reduction.
pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_multiple_of(p)) else { continue };
        rows.swap(rank, piv);
        let inv = pow(rows[rank][c] % p, p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = *x % p * inv % p;
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && !row[c].is_multiple_of(p) {
                let factor = row[c] % p;
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x % p + p - factor * y % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Every exponent vector in `[0, q)^r`, grouped by total degree.
pub fn monomials_by_degree(r: usize, q: u32) -> Vec<Vec<Vec<u8>>> {
    let top = (q as usize - 1) * r;
    let mut out = vec![Vec::new(); top + 1];
    let total = (q as usize).pow(r as u32);
    for code in 0..total {
        let mut e = vec![0u8; r];
        let mut c = code;
        for slot in e.iter_mut() {
            *slot = (c % q as usize) as u8;
            c /= q as usize;
        }
        let d: usize = e.iter().map(|&x| x as usize).sum();
        out[d].push(e);
    }
    out
}

fn degree(t: &Terms) -> usize {
    t[0].0.iter().map(|&x| x as usize).sum()
}

/// Rank of the span of `{g * u}` in degree `d` of `S / m^[q]` over all
/// generators `g` and monomials `u`.
fn ideal_rank(gens: &[Terms], by_degree: &[Vec<Vec<u8>>], q: u32, p: u64, d: usize) -> usize {
    let target = &by_degree[d];
    let mut rows = Vec::new();
    for g in gens {
        let k = degree(g);
        if k > d {
            continue;
        }
        for u in &by_degree[d - k] {
            let mut row = vec![0u64; target.len()];
            for (e, c) in g {
                let prod: Vec<u32> = e.iter().zip(u).map(|(&a, &b)| a as u32 + b as u32).collect();
                if prod.iter().all(|&x| x < q) {
                    let prod: Vec<u8> = prod.iter().map(|&x| x as u8).collect();
                    let idx = target.iter().position(|m| *m == prod).expect("product in target degree");
                    row[idx] = (row[idx] + c) % p;
                }
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        0
    } else {
        rank_mod_p(rows, p)
    }
}

/// Quotient dimension in every degree `0..=(q-1) r`.
pub fn quotient_dims(gens: &[Terms], r: usize, q: u32, p: u64) -> Vec<u64> {
    let by_degree = monomials_by_degree(r, q);
    (0..by_degree.len()).map(|d| (by_degree[d].len() - ideal_rank(gens, &by_degree, q, p, d)) as u64).collect()
}

/// Largest degree with a nonzero quotient, scanning every degree.
pub fn exhaustive_v(gens: &[Terms], r: usize, q: u32, p: u64) -> usize {
    let dims = quotient_dims(gens, r, q, p);
    dims.iter().rposition(|&x| x > 0).expect("degree 0 survives")
}

/// Least degree with a nonzero element killed by `f`.
pub fn exhaustive_indeg(f: &Terms, r: usize, q: u32, p: u64) -> usize {
    let by_degree = monomials_by_degree(r, q);
    let k = degree(f);
    for d in 0..by_degree.len() {
        if d + k >= by_degree.len() {
            return d;
        }
        let target = &by_degree[d + k];
        let rows: Vec<Vec<u64>> = by_degree[d]
            .iter()
            .map(|u| {
                let mut row = vec![0u64; target.len()];
                for (e, c) in f {
                    let prod: Vec<u32> = e.iter().zip(u).map(|(&a, &b)| a as u32 + b as u32).collect();
                    if prod.iter().all(|&x| x < q) {
                        let prod: Vec<u8> = prod.iter().map(|&x| x as u8).collect();
                        let idx = target.iter().position(|m| *m == prod).unwrap();
                        row[idx] = (row[idx] + c) % p;
                    }
                }
                row
            })
            .collect();
        if rank_mod_p(rows, p) < by_degree[d].len() {
            return d;
        }
    }
    unreachable!()
}

/// Number of semistandard tableaux of shape `lambda` with entries in `1..=n`.
pub fn ssyt_count(lambda: &[i64], n: usize) -> u128 {
    let shape: Vec<usize> = lambda.iter().filter(|&&x| x > 0).map(|&x| x as usize).collect();
    if shape.len() > n {
        return 0;
    }
    let cells: Vec<(usize, usize)> =
        shape.iter().enumerate().flat_map(|(i, &len)| (0..len).map(move |j| (i, j))).collect();
    let mut grid: Vec<Vec<usize>> = shape.iter().map(|&len| vec![0; len]).collect();
    fn fill(k: usize, cells: &[(usize, usize)], grid: &mut Vec<Vec<usize>>, n: usize) -> u128 {
        if k == cells.len() {
            return 1;
        }
        let (i, j) = cells[k];
        let lo_row = if j > 0 { grid[i][j - 1] } else { 1 };
        let lo_col = if i > 0 { grid[i - 1][j] + 1 } else { 1 };
        let mut total = 0;
        for v in lo_row.max(lo_col)..=n {
            grid[i][j] = v;
            total += fill(k + 1, cells, grid, n);
        }
        grid[i][j] = 0;
        total
    }
    fill(0, &cells, &mut grid, n)
}

fn restricted_partitions(n: usize, p: i64, bound: &[i64]) -> Vec<Vec<i64>> {
    // Fundamental coordinates in [0, p)^n, kept when entrywise below `bound`.
    let mut out = Vec::new();
    let total = (p as usize).pow(n as u32);
    for code in 0..total {
        let mut a = vec![0i64; n];
        let mut c = code;
        for slot in a.iter_mut() {
            *slot = (c % p as usize) as i64;
            c /= p as usize;
        }
        let mut y = vec![0i64; n];
        let mut acc = 0;
        for i in (0..n).rev() {
            acc += a[i];
            y[i] = acc;
        }
        if y.iter().zip(bound).all(|(a, b)| a <= b) {
            out.push(y);
        }
    }
    out
}

fn is_partition(y: &[i64]) -> bool {
    y.windows(2).all(|w| w[0] >= w[1]) && y.last().is_none_or(|&x| x >= 0)
}

/// All expansions of `lambda` as `sum_i p^i lambda^i` with restricted
/// partition layers and a nonzero last layer (a single zero layer for zero).
pub fn all_layer_expansions(lambda: &[i64], p: i64) -> Vec<Vec<Vec<i64>>> {
    let n = lambda.len();
    if lambda.iter().all(|&x| x == 0) {
        return vec![vec![vec![0; n]]];
    }
    let mut out = Vec::new();
    for mu in restricted_partitions(n, p, lambda) {
        let diff: Vec<i64> = lambda.iter().zip(&mu).map(|(a, b)| a - b).collect();
        if diff.iter().any(|x| x % p != 0) {
            continue;
        }
        let rest: Vec<i64> = diff.iter().map(|x| x / p).collect();
        if !is_partition(&rest) {
            continue;
        }
        if rest.iter().all(|&x| x == 0) {
            out.push(vec![mu]);
        } else {
            for mut tail in all_layer_expansions(&rest, p) {
                tail.insert(0, mu.clone());
                out.push(tail);
            }
        }
    }
    out
}

pub fn weight(v: &[i64]) -> Weight {
    Weight::new(v.to_vec())
}
