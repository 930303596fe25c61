//! Binomial coefficients, colex ranking of k-sets and small subset iteration.
//!
//! The colex rank of a sorted set `a_0 < a_1 < ... < a_{k-1}` is
//! `sum_i C(a_i, i + 1)`. Ranks enumerate the k-subsets of `0..n` in the order
//! `{0,1,..,k-1}, {0,1,..,k-2,k}, ...`, independently of `n`, which is what
//! makes skip sampling and edge indexing stable across graph sizes.

/// Exact binomial coefficient; saturates at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Table of `C(v, i)` for `v < n`, `i <= k`, used for ranking.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    k: usize,
    table: Vec<u128>,
}

impl BinomialTable {
    pub fn new(n: usize, k: usize) -> Self {
        let mut table = vec![0u128; (n + 1) * (k + 1)];
        for v in 0..=n {
            for i in 0..=k {
                table[v * (k + 1) + i] = binomial(v as u64, i as u64);
            }
        }
        BinomialTable { k, table }
    }

    #[inline]
    pub fn get(&self, v: usize, i: usize) -> u128 {
        self.table[v * (self.k + 1) + i]
    }

    /// Colex rank of a strictly increasing slice of length at most `k`.
    #[inline]
    pub fn rank(&self, sorted: &[usize]) -> u128 {
        let mut r = 0u128;
        for (i, &a) in sorted.iter().enumerate() {
            r += self.get(a, i + 1);
        }
        r
    }
}

/// Inverse of the colex rank: the `k`-set with the given rank.
pub fn unrank_colex(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        let (mut lo, mut hi) = (i as u64 - 1, i as u64 - 1);
        while binomial(hi, i as u64) <= rank {
            hi = hi * 2 + 1;
        }
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if binomial(mid, i as u64) <= rank {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out[i - 1] = lo as usize;
        rank -= binomial(lo, i as u64);
    }
    out
}

/// Advances the sorted set `a` to its colex successor among k-subsets of
/// `0..n`. Returns false after the last one.
pub fn next_colex(a: &mut [usize], n: usize) -> bool {
    let k = a.len();
    for i in 0..k {
        let limit = if i + 1 < k { a[i + 1] } else { n };
        if a[i] + 1 < limit {
            a[i] += 1;
            for (j, x) in a.iter_mut().enumerate().take(i) {
                *x = j;
            }
            return true;
        }
    }
    false
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
/// Returns false once the last combination has been passed.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` with every k-subset of `items` (in lexicographic order of positions).
pub fn for_each_subset<F: FnMut(&[usize])>(items: &[usize], k: usize, mut f: F) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        f(&buf);
        if !next_combination(&mut idx, n) {
            break;
        }
    }
}

/// Like [`for_each_subset`] but stops as soon as `f` returns false.
/// Returns whether every call returned true.
pub fn all_subsets<F: FnMut(&[usize]) -> bool>(items: &[usize], k: usize, mut f: F) -> bool {
    let n = items.len();
    if k > n {
        return true;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if !f(&buf) {
            return false;
        }
        if !next_combination(&mut idx, n) {
            return true;
        }
    }
}

/// Natural log of `n!`, summed exactly term by term.
pub fn ln_factorial(n: u64) -> f64 {
    ln_falling(n, n)
}

/// Natural log of the falling factorial `(n)_b = n (n-1) ... (n-b+1)`.
pub fn ln_falling(n: u64, b: u64) -> f64 {
    debug_assert!(b <= n);
    let mut acc = 0.0f64;
    for i in 0..b {
        acc += ((n - i) as f64).ln();
    }
    acc
}
