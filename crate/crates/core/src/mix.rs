//! Stateless seeded hashing. Every random decision in the crate is a pure
//! function of a seed and the ids involved, so map tasks stay pure and runs
//! are reproducible.

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of `words` under `(domain, seed)`.
#[inline]
pub(crate) fn hash_words(domain: u64, seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed ^ domain.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for &w in words {
        h = mix64(h.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ w);
    }
    h
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
pub(crate) fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[0, n)` by multiply-shift.
#[inline]
pub(crate) fn below(h: u64, n: u64) -> u64 {
    ((h as u128 * n as u128) >> 64) as u64
}

pub(crate) const DOMAIN_BUCKET: u64 = 1;
pub(crate) const DOMAIN_PAIR: u64 = 2;
pub(crate) const DOMAIN_COLOR: u64 = 3;
