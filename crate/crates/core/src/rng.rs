//! Seeded pseudo-random numbers.
//!
//! All randomness goes through SplitMix64, whose state update and output
//! function are
//!
//! ```text
//! state ← state + 0x9E3779B97F4A7C15
//! z ← state
//! z ← (z ⊕ (z >> 30)) · 0xBF58476D1CE4E5B9
//! z ← (z ⊕ (z >> 27)) · 0x94D049BB133111EB
//! output z ⊕ (z >> 31)
//! ```
//!
//! (all arithmetic mod 2⁶⁴). Independent streams for named purposes are
//! derived by seeding with `seed ⊕ hash(label)`.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

/// The generator for `seed`.
pub fn seeded(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// A generator for `seed` that is independent of other labels.
pub fn stream(seed: u64, label: &str) -> SplitMix64 {
    // FNV-1a, so streams are stable across platforms and releases.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    SplitMix64::seed_from_u64(seed ^ h)
}
