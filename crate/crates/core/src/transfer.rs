//! Transfer-matrix counting of strings that avoid the forbidden triples.
//!
//! These counters never enumerate strings; they are the independent check on
//! the exhaustive enumerators in [`crate::charges`] and
//! [`crate::groundstates`]. Both alphabets ({-1,+1} sequences and {0,1}
//! configurations) forbid the same shape: an even-centred triple whose ends
//! agree and whose middle differs.

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Site};

/// Pair states are indexed `2 * first + second` with `true` = +1 (occupied).
pub type PairMatrix = [[u128; 4]; 4];

pub fn is_forbidden(left: bool, middle: bool, right: bool) -> bool {
    left == right && left != middle
}

fn pair(i: usize) -> (bool, bool) {
    (i & 2 != 0, i & 1 != 0)
}

/// Transition between pairs `(2i, 2i+1) -> (2i+2, 2i+3)`; the triple centred
/// at `2i+2` spans the second site of the first pair and the whole second pair.
pub fn even_pair_matrix() -> PairMatrix {
    let mut t = [[0; 4]; 4];
    for (p, row) in t.iter_mut().enumerate() {
        for (q, entry) in row.iter_mut().enumerate() {
            let ((_, b), (c, d)) = (pair(p), pair(q));
            *entry = u128::from(!is_forbidden(b, c, d));
        }
    }
    t
}

/// Transition between pairs `(2i-1, 2i) -> (2i+1, 2i+2)`; the triple centred
/// at `2i` spans the whole first pair and the first site of the second.
pub fn odd_pair_matrix() -> PairMatrix {
    let mut t = [[0; 4]; 4];
    for (p, row) in t.iter_mut().enumerate() {
        for (q, entry) in row.iter_mut().enumerate() {
            let ((a, b), (c, _)) = (pair(p), pair(q));
            *entry = u128::from(!is_forbidden(a, b, c));
        }
    }
    t
}

fn mat_mul(a: &PairMatrix, b: &PairMatrix) -> PairMatrix {
    let mut out = [[0u128; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_pow(m: &PairMatrix, mut e: u32) -> PairMatrix {
    let mut result = [[0u128; 4]; 4];
    for (i, row) in result.iter_mut().enumerate() {
        row[i] = 1;
    }
    let mut base = *m;
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    result
}

/// `|Xi_hat_{k,l}|` over the pair alphabet `(f(2i-1), f(2i))`, `i = k+1..=l`.
///
/// The left edge condition fixes `f(2k)` from the first pair; the right edge
/// condition restricts the last pair to constant pairs.
pub fn count_hat_xi(k: i64, l: i64) -> Result<u128> {
    if k >= l {
        return Err(Error::InvalidInterval { k, l });
    }
    let steps = (l - k - 1) as u32;
    let t = mat_pow(&odd_pair_matrix(), steps);
    let constant = |q: usize| {
        let (c, d) = pair(q);
        c == d
    };
    Ok((0..4)
        .flat_map(|p| (0..4).map(move |q| (p, q)))
        .filter(|&(_, q)| constant(q))
        .map(|(p, q)| t[p][q])
        .sum())
}

/// Number of strings avoiding the forbidden triples on a periodic chain of
/// `sites` sites (even), every even site being a centre.
pub fn count_ring(sites: usize) -> Result<u128> {
    if sites < 4 || sites % 2 != 0 {
        return Err(Error::InvalidLattice(alloc::format!("ring needs an even site count >= 4, got {sites}")));
    }
    let t = mat_pow(&even_pair_matrix(), (sites / 2) as u32);
    Ok((0..4).map(|i| t[i][i]).sum())
}

/// Site-by-site transfer on an open chain `[lo, hi]`, state = last two values.
pub fn count_open_chain(lo: i64, hi: i64) -> u128 {
    if hi < lo {
        return 0;
    }
    if hi == lo {
        return 2;
    }
    // counts[(prev, cur)] after the current site; the first two sites are free
    let mut counts = [1u128; 4];
    for x in lo + 2..=hi {
        let center = x - 1;
        let checks = center.rem_euclid(2) == 0;
        let mut next = [0u128; 4];
        for (state, &n) in counts.iter().enumerate() {
            let (a, b) = pair(state);
            for c in [false, true] {
                if checks && is_forbidden(a, b, c) {
                    continue;
                }
                next[(usize::from(b) << 1) | usize::from(c)] += n;
            }
        }
        counts = next;
    }
    counts.iter().sum()
}

/// Number of classical ground-state configurations on a one-dimensional lattice.
pub fn count_ground_configs(lattice: &Lattice) -> Result<u128> {
    let (lo, hi) = lattice
        .interval()
        .ok_or(Error::Unsupported("transfer-matrix counting is one-dimensional"))?;
    if lattice.is_periodic() {
        count_ring(lattice.len())
    } else {
        Ok(count_open_chain(lo, hi))
    }
}

/// Leading eigenvalue of the two-site transfer matrix, by power iteration.
pub fn leading_eigenvalue() -> f64 {
    let t = even_pair_matrix();
    let mut v = [1.0f64; 4];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut w = [0.0f64; 4];
        for i in 0..4 {
            w[i] = (0..4).map(|j| t[i][j] as f64 * v[j]).sum();
        }
        let norm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        let vnorm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        lambda = norm / vnorm;
        v = w.map(|x| x / norm);
    }
    lambda
}

/// Ground-state entropy per site, `ln(lambda) / 2`.
pub fn entropy_density() -> f64 {
    libm::log(leading_eigenvalue()) / 2.0
}

/// True when `site` is an even centre of a one-dimensional label.
pub fn is_even_center(site: Site) -> bool {
    matches!(site, Site::Line(x) if x.rem_euclid(2) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ring(n: usize) -> u128 {
        (0..1u32 << n)
            .filter(|&bits| {
                (0..n).step_by(2).all(|c| {
                    let at = |i: usize| bits >> (i % n) & 1 == 1;
                    !is_forbidden(at(c + n - 1), at(c), at(c + 1))
                })
            })
            .count() as u128
    }

    #[test]
    fn ring_counts_match_brute_force() {
        for n in (4..=16).step_by(2) {
            assert_eq!(count_ring(n).unwrap(), brute_ring(n), "n = {n}");
        }
        assert_eq!(count_ring(6).unwrap(), 26);
    }

    #[test]
    fn hat_xi_small_counts() {
        assert_eq!(count_hat_xi(0, 1).unwrap(), 2);
        assert_eq!(count_hat_xi(0, 2).unwrap(), 6);
        assert_eq!(count_hat_xi(0, 3).unwrap(), 18);
        assert_eq!(count_hat_xi(5, 8).unwrap(), 18);
        assert!(count_hat_xi(1, 1).is_err());
    }

    #[test]
    fn open_chain_brute_force() {
        for (lo, hi) in [(0, 2), (0, 6), (-3, 4), (1, 9)] {
            let n = (hi - lo + 1) as usize;
            let brute = (0..1u32 << n)
                .filter(|&bits| {
                    (lo + 1..hi).filter(|c: &i64| c.rem_euclid(2) == 0).all(|c| {
                        let at = |x: i64| bits >> (x - lo) & 1 == 1;
                        !is_forbidden(at(c - 1), at(c), at(c + 1))
                    })
                })
                .count() as u128;
            assert_eq!(count_open_chain(lo, hi), brute, "[{lo}, {hi}]");
        }
    }

    #[test]
    fn leading_eigenvalue_is_three() {
        assert!((leading_eigenvalue() - 3.0).abs() < 1e-12);
    }
}
