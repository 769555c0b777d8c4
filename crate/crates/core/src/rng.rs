/*!
Deterministic randomness.

Every stochastic operation in this crate draws from [`SplitMix64`], Steele,
Lea and Flood's 64-bit generator. It was chosen over an external RNG crate
because the whole algorithm is four lines with published reference constants,
which makes runs reproducible from their seeds alone, identical across
platforms and compiler versions, and trivially re-implementable when a test
wants an independent trace to compare against.

Subtask seeds (one per run, per fold, per tree, ...) are derived with
[`derive_seed`], which hashes the master seed together with string tags.
Derivation goes through FNV-1a and a SplitMix64 finalizer so that related
tags do not produce correlated streams, and so the result depends only on
the tag values, never on iteration order or pointer identity.
*/

/// SplitMix64 with the reference constants.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`, bias-free (rejection sampling).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is meaningless");
        // 2^64 mod n; everything >= this maps to a full-width residue class.
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    /// Standard normal deviate via Box-Muller (cosine branch).
    pub fn gaussian(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// `count` distinct indices drawn from `0..n`, in draw order.
    /// Partial Fisher-Yates over an index table.
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below((n - i) as u64) as usize;
            idx.swap(i, j);
        }
        idx.truncate(count);
        idx
    }
}

/// Derives a subtask seed from a master seed and an ordered list of tags.
///
/// FNV-1a over the master seed's little-endian bytes and each tag (with a
/// 0xFF separator, so tag boundaries matter), then a SplitMix64 finalizer
/// step to spread low-entropy inputs over the full 64-bit space.
pub fn derive_seed(master: u64, tags: &[&str]) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    for b in master.to_le_bytes() {
        h = (h ^ b as u64).wrapping_mul(FNV_PRIME);
    }
    for tag in tags {
        for b in tag.as_bytes() {
            h = (h ^ *b as u64).wrapping_mul(FNV_PRIME);
        }
        h = (h ^ 0xFF).wrapping_mul(FNV_PRIME);
    }
    SplitMix64::new(h).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent re-implementation of the reference algorithm, kept
    // deliberately separate from the production code path.
    fn reference_stream(seed: u64, n: usize) -> Vec<u64> {
        let mut x = seed;
        (0..n)
            .map(|_| {
                x = x.wrapping_add(0x9E3779B97F4A7C15);
                let mut z = x;
                z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
                z ^ (z >> 31)
            })
            .collect()
    }

    #[test]
    fn matches_reference_stream() {
        let mut rng = SplitMix64::new(0x1234_5678);
        let got: Vec<u64> = (0..64).map(|_| rng.next_u64()).collect();
        assert_eq!(got, reference_stream(0x1234_5678, 64));
    }

    #[test]
    fn shuffle_matches_reference_permutation() {
        // Fisher-Yates driven by the reference stream, re-derived by hand.
        let seed = 99u64;
        let mut expected: Vec<usize> = (0..10).collect();
        let stream_vals = reference_stream(seed, 64);
        let mut pos = 0;
        for i in (1..10usize).rev() {
            let n = i as u64 + 1;
            let threshold = n.wrapping_neg() % n;
            let j = loop {
                let r = stream_vals[pos];
                pos += 1;
                if r >= threshold {
                    break (r % n) as usize;
                }
            };
            expected.swap(i, j);
        }

        let mut got: Vec<usize> = (0..10).collect();
        SplitMix64::new(seed).shuffle(&mut got);
        assert_eq!(got, expected);
    }

    #[test]
    fn below_is_in_range_and_deterministic() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for n in 1..200u64 {
            let x = a.below(n);
            assert!(x < n);
            assert_eq!(x, b.below(n));
        }
    }

    #[test]
    fn derive_seed_separates_tags() {
        let a = derive_seed(1, &["run", "0", "iris"]);
        let b = derive_seed(1, &["run", "0i", "ris"]);
        let c = derive_seed(1, &["run", "0", "iris"]);
        assert_ne!(a, b, "tag boundaries must matter");
        assert_eq!(a, c);
        assert_ne!(derive_seed(1, &["x"]), derive_seed(2, &["x"]));
    }

    #[test]
    fn gaussian_is_roughly_standard() {
        let mut rng = SplitMix64::new(42);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let g = rng.gaussian();
            sum += g;
            sq += g * g;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn sample_indices_distinct() {
        let mut rng = SplitMix64::new(3);
        let s = rng.sample_indices(20, 8);
        assert_eq!(s.len(), 8);
        let mut t = s.clone();
        t.sort_unstable();
        t.dedup();
        assert_eq!(t.len(), 8);
        assert!(t.iter().all(|&i| i < 20));
    }
}
