//! Binomial coefficients and the colexicographic bijection between
//! integers and k-subsets (combinatorial number system).
//!
//! Colex order compares subsets by their largest differing element, so the
//! rank of `{a_1 < a_2 < ... < a_k}` is `sum_i C(a_i, i)`.

use crate::error::{Error, Result};

/// Exact binomial coefficient, `None` if the value overflows 128 bits.
/// Total in `n` and `r`: `binom(n, r) = Some(0)` when `r > n`.
pub fn binom(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r {
        // acc * (n - r + i) is divisible by i at every step.
        acc = acc.checked_mul((n - r + i) as u128)? / i as u128;
    }
    Some(acc)
}

/// Natural log of the binomial coefficient; `-inf` when `r > n`.
pub fn log_binom(n: u64, r: u64) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    let r = r.min(n - r);
    if r == 0 {
        return 0.0;
    }
    if let Some(v) = binom(n, r) {
        if v < (1u128 << 100) {
            return (v as f64).ln();
        }
    }
    let mut acc = 0.0;
    for i in 1..=r {
        acc += ((n - r + i) as f64).ln() - (i as f64).ln();
    }
    acc
}

/// ln C(n, r) where `n` is itself a (possibly huge) count.
/// Used for C(C(n-2,k-2), r) with small r.
pub fn log_binom_big(n: u128, r: u64) -> f64 {
    if (r as u128) > n {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for i in 0..r {
        acc += ((n - i as u128) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// Precomputed table of C(a, j) for 0 <= a <= n, 0 <= j <= k.
/// Backs colex ranking/unranking; entries saturate at `u128::MAX` rather
/// than overflow (saturated entries are never reached by valid ranks).
pub struct BinomTable {
    n: u32,
    k: u32,
    /// Row-major: rows are j in 0..=k, columns a in 0..=n.
    rows: Vec<Vec<u128>>,
    /// u64 mirror when C(n,k) fits; the unranking hot path runs on it.
    rows64: Option<Vec<Vec<u64>>>,
}

impl BinomTable {
    pub fn new(n: u32, k: u32) -> Self {
        let mut rows = Vec::with_capacity(k as usize + 1);
        rows.push(vec![1u128; n as usize + 1]);
        for j in 1..=k {
            let prev = &rows[j as usize - 1];
            let mut row = vec![0u128; n as usize + 1];
            for a in 1..=n as usize {
                row[a] = row[a - 1].saturating_add(prev[a - 1]);
            }
            rows.push(row);
        }
        let rows64 = if rows[k as usize][n as usize] <= u64::MAX as u128 {
            Some(
                rows.iter()
                    .map(|r| r.iter().map(|&v| v as u64).collect())
                    .collect(),
            )
        } else {
            None
        };
        BinomTable { n, k, rows, rows64 }
    }

    #[inline]
    pub fn choose(&self, a: u32, j: u32) -> u128 {
        debug_assert!(a <= self.n && j <= self.k);
        self.rows[j as usize][a as usize]
    }

    pub fn total(&self) -> u128 {
        self.choose(self.n, self.k)
    }

    /// Largest `a` with C(a, j) <= target, searched in [lo, hi].
    /// Closed-form seeds for j <= 3 keep the hot unranking path away
    /// from table binary searches.
    fn search(&self, j: u32, target: u128, lo: u32, hi: u32) -> u32 {
        match j {
            1 => return hi.min(target.min(hi as u128) as u32).max(lo),
            2 => return fixup(approx_inv_c2(target), target, c2_exact, lo, hi),
            3 => return fixup(approx_inv_c3(target), target, c3_exact, lo, hi),
            _ => {}
        }
        let row = &self.rows[j as usize];
        let mut lo = lo;
        let mut hi = hi;
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if row[mid as usize] <= target {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// k-subset of [0, n) at colex rank `index`, returned strictly increasing.
    pub fn unrank(&self, index: u128) -> Result<Vec<u32>> {
        let total = self.total();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, bound: total });
        }
        let mut out = vec![0u32; self.k as usize];
        let mut rem = index;
        let mut hi = self.n - 1;
        for j in (1..=self.k).rev() {
            let a = self.search(j, rem, j - 1, hi);
            out[j as usize - 1] = a;
            rem -= self.choose(a, j);
            hi = a.saturating_sub(1);
        }
        Ok(out)
    }

    /// Colex rank of a strictly increasing k-subset.
    pub fn rank(&self, set: &[u32]) -> u128 {
        debug_assert_eq!(set.len(), self.k as usize);
        set.iter()
            .enumerate()
            .map(|(i, &a)| self.choose(a, i as u32 + 1))
            .sum()
    }

    /// Incremental unranking for an ascending stream of ranks: the top
    /// coordinate is nondecreasing, so it is advanced by a linear walk.
    pub fn unrank_sorted_into(&self, index: u128, top_hint: &mut u32, out: &mut [u32]) {
        debug_assert!(index < self.total());
        let k = self.k;
        if k == 0 {
            return;
        }
        if let Some(rows64) = &self.rows64 {
            return self.unrank_sorted_u64(rows64, index as u64, top_hint, out);
        }
        let top_row = &self.rows[k as usize];
        let mut a = *top_hint;
        while a + 1 <= self.n - 1 && top_row[a as usize + 1] <= index {
            a += 1;
        }
        *top_hint = a;
        out[k as usize - 1] = a;
        let mut rem = index - top_row[a as usize];
        let mut hi = a.saturating_sub(1);
        for j in (1..k).rev() {
            let b = self.search(j, rem, j - 1, hi);
            out[j as usize - 1] = b;
            rem -= self.choose(b, j);
            hi = b.saturating_sub(1);
        }
    }

    fn unrank_sorted_u64(&self, rows: &[Vec<u64>], index: u64, top_hint: &mut u32, out: &mut [u32]) {
        let k = self.k;
        let top_row = &rows[k as usize];
        let mut a = *top_hint;
        while a + 1 <= self.n - 1 && top_row[a as usize + 1] <= index {
            a += 1;
        }
        *top_hint = a;
        out[k as usize - 1] = a;
        let mut rem = index - top_row[a as usize];
        let mut hi = a.saturating_sub(1);
        for j in (1..k).rev() {
            let b = match j {
                1 => hi.min(rem.min(hi as u64) as u32),
                2 => fixup64(approx_inv_c2_u64(rem), rem, c2_u64, 1, hi),
                3 => fixup64(approx_inv_c3_u64(rem), rem, c3_u64, 2, hi),
                _ => {
                    let row = &rows[j as usize];
                    let mut lo = j - 1;
                    let mut hi = hi;
                    while lo < hi {
                        let mid = lo + (hi - lo + 1) / 2;
                        if row[mid as usize] <= rem {
                            lo = mid;
                        } else {
                            hi = mid - 1;
                        }
                    }
                    lo
                }
            };
            out[j as usize - 1] = b;
            rem -= rows[j as usize][b as usize];
            hi = b.saturating_sub(1);
        }
    }
}

#[inline]
fn c2_u64(b: u32) -> u64 {
    let b = b as u64;
    b * b.saturating_sub(1) / 2
}

#[inline]
fn c3_u64(b: u32) -> u64 {
    // Staged in u128: the raw product can overflow u64 near the top of
    // the u64-feasible range.
    let b = b as u128;
    let v = b * b.saturating_sub(1) * b.saturating_sub(2) / 6;
    v.min(u64::MAX as u128) as u64
}

#[inline]
fn approx_inv_c2_u64(target: u64) -> u32 {
    let b = 0.5 * (1.0 + (1.0 + 8.0 * target as f64).sqrt());
    if b >= u32::MAX as f64 { u32::MAX } else { b as u32 }
}

#[inline]
fn approx_inv_c3_u64(target: u64) -> u32 {
    let b = (6.0 * target as f64).cbrt() + 1.0;
    if b >= u32::MAX as f64 { u32::MAX } else { b as u32 }
}

#[inline]
fn fixup64(estimate: u32, target: u64, exact: impl Fn(u32) -> u64, lo: u32, hi: u32) -> u32 {
    let mut b = estimate.clamp(lo, hi);
    while b < hi && exact(b + 1) <= target {
        b += 1;
    }
    while b > lo && exact(b) > target {
        b -= 1;
    }
    b
}

fn c2_exact(b: u32) -> u128 {
    let b = b as u128;
    b * b.saturating_sub(1) / 2
}

fn c3_exact(b: u32) -> u128 {
    let b = b as u128;
    b * b.saturating_sub(1) * b.saturating_sub(2) / 6
}

fn approx_inv_c2(target: u128) -> u32 {
    let r = target as f64;
    let b = 0.5 * (1.0 + (1.0 + 8.0 * r).sqrt());
    if b >= u32::MAX as f64 { u32::MAX } else { b as u32 }
}

fn approx_inv_c3(target: u128) -> u32 {
    let b = (6.0 * target as f64).cbrt() + 1.0;
    if b >= u32::MAX as f64 { u32::MAX } else { b as u32 }
}

/// Refine a closed-form estimate to the largest b in [lo, hi] with
/// exact(b) <= target. The estimate is off by O(1) in the u64 range, so
/// the loops run a couple of steps.
fn fixup(estimate: u32, target: u128, exact: fn(u32) -> u128, lo: u32, hi: u32) -> u32 {
    let mut b = estimate.clamp(lo, hi);
    while b < hi && exact(b + 1) <= target {
        b += 1;
    }
    while b > lo && exact(b) > target {
        b -= 1;
    }
    b
}

/// One-shot colex unranking (see [`BinomTable::unrank`]).
pub fn unrank_kset(index: u128, n: u32, k: u32) -> Result<Vec<u32>> {
    BinomTable::new(n, k).unrank(index)
}

/// One-shot colex ranking.
pub fn rank_kset(set: &[u32], n: u32) -> u128 {
    BinomTable::new(n, set.len() as u32).rank(set)
}
