//! Deterministic seed derivation for independent RNG streams.

/// splitmix64 finalizer; good avalanche, stable across platforms.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag path, so sibling
/// streams (per class / orientation / sample / repeat) are independent and
/// the result does not depend on generation order.
pub(crate) fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master);
    for &t in tags {
        state = mix(state ^ mix(t));
    }
    state
}
