//! Weight combinatorics for `GL_n`: fundamental-weight coordinates, base-`p`
//! (Steinberg) layers, Weyl dimensions and Euler characteristics of line
//! bundles on the complete flag variety.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, prime_power_decompose};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("weight {0} is not dominant")]
    NotDominant(Weight),
    #[error("weight {0} is not a partition")]
    NotPartition(Weight),
    #[error("weight {0} is not {1}-restricted")]
    NotRestricted(Weight, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("weight length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Integer weight `(y_1, ..., y_n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight(Vec<i64>);

impl Weight {
    pub fn new(entries: impl Into<Vec<i64>>) -> Self {
        Self(entries.into())
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Fundamental weight `omega_i = (1^i, 0^(n-i))`.
    pub fn fundamental(i: usize, n: usize) -> Self {
        Self((0..n).map(|k| i64::from(k < i)).collect())
    }

    /// The weight `(n-1, n-2, ..., 0)`.
    pub fn rho(n: usize) -> Self {
        Self((0..n).rev().map(|k| k as i64).collect())
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn is_partition(&self) -> bool {
        self.is_dominant() && self.0.last().is_none_or(|&y| y >= 0)
    }

    /// Dominant weight with all fundamental coordinates in `[0, p)`.
    pub fn is_restricted(&self, p: u64) -> bool {
        to_fundamental(self).is_ok_and(|a| a.iter().all(|&c| c >= 0 && (c as u64) < p))
    }

    pub fn scaled(&self, c: i64) -> Self {
        Self(self.0.iter().map(|&y| y * c).collect())
    }

    pub fn plus(&self, other: &Weight) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &Weight) -> Self {
        assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Coordinates `a_i = y_i - y_{i+1}` (and `a_n = y_n`) in the basis of fundamental weights.
pub fn to_fundamental(lambda: &Weight) -> Result<Vec<i64>, WeightError> {
    if !lambda.is_dominant() {
        return Err(WeightError::NotDominant(lambda.clone()));
    }
    let y = lambda.entries();
    let n = y.len();
    Ok((0..n).map(|i| if i + 1 < n { y[i] - y[i + 1] } else { y[i] }).collect())
}

/// Inverse of [`to_fundamental`]: `sum_i a_i * omega_i`.
pub fn from_fundamental(coords: &[i64]) -> Weight {
    let n = coords.len();
    let mut y = vec![0i64; n];
    let mut acc = 0;
    for i in (0..n).rev() {
        acc += coords[i];
        y[i] = acc;
    }
    Weight(y)
}

/// How the top layer of a base-`p` expansion was formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerMode {
    /// Every layer is `p`-restricted.
    Restricted,
    /// Layers below the last are `p`-restricted; the last absorbs the remainder.
    UnrestrictedTail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicDecomposition {
    pub p: u64,
    pub layers: Vec<Weight>,
    pub mode: LayerMode,
}

impl PAdicDecomposition {
    /// `sum_i p^i * layer_i`.
    pub fn reconstruct(&self) -> Weight {
        let n = self.layers.first().map_or(0, Weight::len);
        let mut acc = Weight::zero(n);
        let mut scale = 1i64;
        for layer in &self.layers {
            acc = acc.plus(&layer.scaled(scale));
            scale *= self.p as i64;
        }
        acc
    }
}

impl fmt::Display for PAdicDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| match i {
                0 => l.to_string(),
                1 => format!("{}*{}", self.p, l),
                _ => format!("{}^{}*{}", self.p, i, l),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn check_prime(p: u64) -> Result<(), WeightError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(WeightError::NotPrime(p))
    }
}

fn partition_coords(lambda: &Weight) -> Result<Vec<i64>, WeightError> {
    if !lambda.is_partition() {
        return Err(WeightError::NotPartition(lambda.clone()));
    }
    to_fundamental(lambda)
}

/// Unique expansion `lambda = lambda^0 + p lambda^1 + ... + p^s lambda^s` into
/// `p`-restricted layers, read off the base-`p` digits of the fundamental coordinates.
pub fn p_adic_decompose(lambda: &Weight, p: u64) -> Result<PAdicDecomposition, WeightError> {
    check_prime(p)?;
    let mut rest = partition_coords(lambda)?;
    let mut layers = Vec::new();
    loop {
        let digits: Vec<i64> = rest.iter().map(|&a| a % p as i64).collect();
        layers.push(from_fundamental(&digits));
        for a in &mut rest {
            *a /= p as i64;
        }
        if rest.iter().all(|&a| a == 0) {
            break;
        }
    }
    Ok(PAdicDecomposition { p, layers, mode: LayerMode::Restricted })
}

/// Expansion with exactly `s + 1` layers where layers `0..s` are `p`-restricted
/// and layer `s` is an arbitrary partition.
pub fn p_adic_decompose_with_tail(lambda: &Weight, p: u64, s: u32) -> Result<PAdicDecomposition, WeightError> {
    check_prime(p)?;
    let mut rest = partition_coords(lambda)?;
    let mut layers = Vec::with_capacity(s as usize + 1);
    for _ in 0..s {
        let digits: Vec<i64> = rest.iter().map(|&a| a % p as i64).collect();
        layers.push(from_fundamental(&digits));
        for a in &mut rest {
            *a /= p as i64;
        }
    }
    layers.push(from_fundamental(&rest));
    Ok(PAdicDecomposition { p, layers, mode: LayerMode::UnrestrictedTail })
}

/// True when `L_lambda` cannot occur in `L_{p^s mu} (x) L_nu` for any partition
/// `nu`, which is the case exactly when the `s`-th layer of `lambda` is smaller
/// than `mu`.
pub fn occurrence_excluded(lambda: &Weight, mu: &Weight, s: u32, p: u64) -> Result<bool, WeightError> {
    check_prime(p)?;
    if lambda.len() != mu.len() {
        return Err(WeightError::LengthMismatch { expected: lambda.len(), found: mu.len() });
    }
    if !mu.is_restricted(p) {
        return Err(WeightError::NotRestricted(mu.clone(), p));
    }
    let decomposition = p_adic_decompose_with_tail(lambda, p, s)?;
    let top = &decomposition.layers[s as usize];
    Ok(top.size() < mu.size())
}

/// Dimension of the Schur module of highest weight `lambda` on `k^n`,
/// `prod_{i<j} (l_i - l_j + j - i) / (j - i)`. Shorter weights are padded with zeros.
pub fn weyl_dimension(lambda: &Weight, n: usize) -> Result<u128, WeightError> {
    if lambda.len() > n {
        return Err(WeightError::LengthMismatch { expected: n, found: lambda.len() });
    }
    let mut y = lambda.entries().to_vec();
    y.resize(n, 0);
    let padded = Weight(y);
    if !padded.is_dominant() {
        return Err(WeightError::NotDominant(lambda.clone()));
    }
    let y = padded.entries();
    let (mut num, mut den) = (1u128, 1u128);
    for i in 0..n {
        for j in i + 1..n {
            num *= (y[i] - y[j] + (j - i) as i64) as u128;
            den *= (j - i) as u128;
            let g = num.gcd(&den);
            num /= g;
            den /= g;
        }
    }
    debug_assert_eq!(den, 1);
    Ok(num / den)
}

/// Euler characteristic of `O(y)` on the flag variety of `k^n`, in factored form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EulerCharacteristic {
    Zero,
    NonZero { sign: i8, weight: Weight, dim: u128 },
}

impl EulerCharacteristic {
    pub fn value(&self) -> i128 {
        match self {
            Self::Zero => 0,
            Self::NonZero { sign, dim, .. } => *sign as i128 * *dim as i128,
        }
    }
}

impl fmt::Display for EulerCharacteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "zero"),
            Self::NonZero { sign, weight, dim } => {
                write!(f, "sign {sign:+}, partition {weight}, dim {dim}")
            }
        }
    }
}

/// Sort `y + rho` into strictly decreasing order; a repeated entry gives zero,
/// otherwise the sign is the parity of the sorting permutation.
pub fn euler_characteristic(y: &Weight) -> EulerCharacteristic {
    let n = y.len();
    let shifted = y.plus(&Weight::rho(n));
    let v = shifted.entries();
    let mut inversions = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            match v[i].cmp(&v[j]) {
                std::cmp::Ordering::Equal => return EulerCharacteristic::Zero,
                std::cmp::Ordering::Less => inversions += 1,
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let weight = Weight(sorted).minus(&Weight::rho(n));
    let dim = weyl_dimension(&weight, n).expect("sorted weight is dominant");
    EulerCharacteristic::NonZero { sign: if inversions.is_multiple_of(2) { 1 } else { -1 }, weight, dim }
}

/// Hypothesis check for vanishing of `H^k(Fl_n, O(lambda_1, ..., lambda_{n-1}, e))`
/// for `k <= j`: `|lambda| <= (n-1-j) q - 1` and `e >= (1+j) q`.
pub fn vanishing_window(lambda: &Weight, e: i64, n: usize, q: u64, j: usize) -> Result<bool, WeightError> {
    if prime_power_decompose(q).is_none() {
        return Err(WeightError::NotPrimePower(q));
    }
    if lambda.len() + 1 != n {
        return Err(WeightError::LengthMismatch { expected: n.saturating_sub(1), found: lambda.len() });
    }
    if !lambda.is_partition() {
        return Err(WeightError::NotPartition(lambda.clone()));
    }
    let q = q as i64;
    let holds = lambda.size() < (n as i64 - 1 - j as i64) * q && e >= (1 + j as i64) * q;
    if holds && j + 2 == n {
        let mut y = lambda.entries().to_vec();
        y.push(e);
        if let EulerCharacteristic::NonZero { sign, .. } = euler_characteristic(&Weight(y)) {
            // Cohomology sits in degrees j+1 ..= dim Fl_n, so some such degree has this parity.
            let top = n * (n - 1) / 2;
            let parity_ok = (j + 1..=top).any(|k| (if k % 2 == 0 { 1 } else { -1 }) == sign);
            assert!(parity_ok, "Euler characteristic sign contradicts vanishing below degree {}", j + 1);
        }
    }
    Ok(holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i64]) -> Weight {
        Weight::new(v.to_vec())
    }

    #[test]
    fn fundamental_coordinates() {
        assert_eq!(to_fundamental(&w(&[5, 2])).unwrap(), vec![3, 2]);
        for i in 1..=4 {
            let mut e = vec![0; 4];
            e[i - 1] = 1;
            assert_eq!(to_fundamental(&Weight::fundamental(i, 4)).unwrap(), e);
        }
        assert_eq!(to_fundamental(&Weight::zero(3)).unwrap(), vec![0, 0, 0]);
        assert!(matches!(to_fundamental(&w(&[1, 2])), Err(WeightError::NotDominant(_))));
        assert_eq!(from_fundamental(&[3, 2]), w(&[5, 2]));
    }

    #[test]
    fn p_adic_examples() {
        let d = p_adic_decompose(&w(&[5, 2]), 2).unwrap();
        assert_eq!(d.layers, vec![w(&[1, 0]), w(&[2, 1])]);
        assert_eq!(d.to_string(), "(1,0) + 2*(2,1)");
        let restricted = w(&[2, 1, 0]);
        assert_eq!(p_adic_decompose(&restricted, 3).unwrap().layers, vec![restricted]);
        let d = p_adic_decompose(&w(&[3, 0, 0]), 3).unwrap();
        assert_eq!(d.layers, vec![w(&[0, 0, 0]), w(&[1, 0, 0])]);
        assert!(p_adic_decompose(&w(&[1, -1]), 2).is_err());
    }

    #[test]
    fn tail_mode_keeps_remainder_on_top() {
        let d = p_adic_decompose_with_tail(&w(&[9, 1]), 2, 1).unwrap();
        // a = (8, 1): digits (0, 1), tail (4, 0).
        assert_eq!(d.layers, vec![w(&[1, 1]), w(&[4, 0])]);
        assert_eq!(d.reconstruct(), w(&[9, 1]));
        assert_eq!(d.mode, LayerMode::UnrestrictedTail);
    }

    #[test]
    fn occurrence_examples() {
        assert!(occurrence_excluded(&w(&[1, 1]), &w(&[1, 0]), 1, 2).unwrap());
        assert!(!occurrence_excluded(&w(&[3, 1]), &w(&[1, 0]), 1, 2).unwrap());
        let mu = w(&[2, 1, 0]);
        assert!(!occurrence_excluded(&mu.scaled(9), &mu, 2, 3).unwrap());
        assert!(matches!(occurrence_excluded(&w(&[1, 1]), &w(&[2, 0]), 1, 2), Err(WeightError::NotRestricted(..))));
    }

    #[test]
    fn weyl_dimension_examples() {
        assert_eq!(weyl_dimension(&w(&[1, 0, 0, 0]), 4).unwrap(), 4);
        assert_eq!(weyl_dimension(&w(&[1]), 5).unwrap(), 5);
        assert_eq!(weyl_dimension(&w(&[1, 1, 1]), 3).unwrap(), 1);
        assert_eq!(weyl_dimension(&w(&[2, 1, 0]), 3).unwrap(), 8);
        assert!(weyl_dimension(&w(&[0, 1]), 2).is_err());
    }

    #[test]
    fn euler_examples() {
        let chi = euler_characteristic(&w(&[1, 0, 2]));
        assert_eq!(chi, EulerCharacteristic::NonZero { sign: -1, weight: w(&[1, 1, 1]), dim: 1 });
        let chi = euler_characteristic(&w(&[3, 1, 0]));
        assert_eq!(chi, EulerCharacteristic::NonZero { sign: 1, weight: w(&[3, 1, 0]), dim: 15 });
        assert_eq!(euler_characteristic(&w(&[1, 2, 0])), EulerCharacteristic::Zero);
    }

    #[test]
    fn window_examples() {
        // n = 4, j = 1, q = 3: lambda = (1, 1, 0), e = 6.
        assert!(vanishing_window(&w(&[1, 1, 0]), 6, 4, 3, 1).unwrap());
        // Boundary |lambda| = (n-1-j) q is excluded.
        assert!(!vanishing_window(&w(&[3, 3, 0]), 6, 4, 3, 1).unwrap());
        assert!(!vanishing_window(&w(&[1, 1, 0]), 5, 4, 3, 1).unwrap());
        assert!(matches!(vanishing_window(&w(&[1, 1, 0]), 6, 4, 6, 1), Err(WeightError::NotPrimePower(6))));
        assert!(vanishing_window(&w(&[0, 1, 0]), 6, 4, 3, 1).is_err());
    }

    #[test]
    fn window_monitor_runs_at_top_j() {
        for n in 2..=5usize {
            let j = n - 2;
            for q in [2u64, 3, 4] {
                for e in 0..=(2 + j as i64) * q as i64 {
                    let lambda = Weight::new(vec![0; n - 1]);
                    vanishing_window(&lambda, e, n, q, j).unwrap();
                }
            }
        }
    }
}
