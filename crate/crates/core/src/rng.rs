//! Stateless, counter-based random numbers.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key.
//! Keys are built by folding identifiers (seed, coordinates, axis,
//! replication index, ...) through the splitmix64 finalizer, so the value
//! attached to an edge or a replication never depends on query order or on
//! how work is split between threads.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a sequence of words into one key.
#[inline]
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed);
    for &w in words {
        h = mix64(h ^ w);
    }
    h
}

/// FNV-1a, used to turn experiment names into key words.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Map 64 random bits to the open interval (0, 1).
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// A small sequential stream over the counter-based hash, for places that
/// need "a few more" numbers from one key (test instance generation,
/// bit strings for the encoder).
#[derive(Debug, Clone)]
pub struct KeyedStream {
    key: u64,
    counter: u64,
}

impl KeyedStream {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.key ^ mix64(self.counter))
    }

    /// Uniform on (0, 1).
    pub fn uniform(&mut self) -> f64 {
        unit_open(self.next_u64())
    }

    /// Uniform on [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in 0..n.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_open_never_hits_endpoints() {
        assert!(unit_open(0) > 0.0);
        assert!(unit_open(u64::MAX) < 1.0);
    }

    #[test]
    fn keys_are_order_sensitive() {
        assert_ne!(hash_words(1, &[2, 3]), hash_words(1, &[3, 2]));
        assert_eq!(hash_words(1, &[2, 3]), hash_words(1, &[2, 3]));
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = KeyedStream::new(7);
        for _ in 0..1000 {
            assert!(s.below(5) < 5);
        }
    }
}
