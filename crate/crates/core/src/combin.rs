//! Small integer combinatorics.

use num_bigint::BigUint;
use num_traits::One;

/// Binomial coefficient; zero when `k > n`. Panics on `u128` overflow.
pub fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i) is divisible by (i+1) after the multiplication.
        acc = acc.checked_mul((n - i) as u128).expect("binomial overflow") / (i as u128 + 1);
    }
    acc
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
pub fn ceil_log2_big(x: &BigUint) -> u64 {
    assert!(*x >= BigUint::one());
    (x - 1u32).bits()
}

/// `⌈e · log₂(base)⌉`, computed exactly as `⌈log₂(base^e)⌉`.
pub fn ceil_exp_log2(base: u64, e: u32) -> u64 {
    ceil_log2_big(&BigUint::from(base).pow(e))
}

/// `⌈n log₂(2n)⌉`, the length of the classical B(n,1) construction.
pub fn b1_length(n: usize) -> u64 {
    ceil_exp_log2(2 * n as u64, n as u32)
}

/// `⌈2n log₂(2n)⌉`, the length bound of the T(n,1) construction.
pub fn t1_length_bound(n: usize) -> u64 {
    ceil_exp_log2(2 * n as u64, 2 * n as u32)
}
