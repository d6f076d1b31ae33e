use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ComplexMatrix;

/// Seeded ChaCha8 stream.
///
/// A stream is identified by `(seed, id)`. Equal pairs reproduce bit-identical
/// sequences; distinct ids select disjoint ChaCha streams under the same key.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Self { seed, id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// A fresh stream for `(tag, index)` under the same seed, independent of how
    /// much of `self` has been consumed.
    pub fn derive(&self, tag: u64, index: u64) -> RngStream {
        RngStream::new(
            self.seed,
            mix(mix(self.id ^ 0x9e37_79b9_7f4a_7c15, tag), index),
        )
    }
}

// splitmix64 finalizer over a running combination.
fn mix(state: u64, value: u64) -> u64 {
    let mut z = state
        .wrapping_add(value)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// I.i.d. `CN(0, 1)` entries: independent real and imaginary parts, each with
/// variance 1/2.
pub fn sample_complex_gaussian(rng: &mut RngStream, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..rows * cols)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_id_reproduce() {
        let a = sample_complex_gaussian(&mut RngStream::new(11, 3), 4, 5);
        let b = sample_complex_gaussian(&mut RngStream::new(11, 3), 4, 5);
        assert_eq!(a, b);
        let c = sample_complex_gaussian(&mut RngStream::new(11, 4), 4, 5);
        assert_ne!(a, c);
    }

    #[test]
    fn derive_ignores_consumption() {
        let base = RngStream::new(5, 0);
        let mut used = base.clone();
        used.next_u64();
        assert_eq!(
            base.derive(3, 7).clone().next_u64(),
            used.derive(3, 7).next_u64()
        );
        assert_ne!(base.derive(3, 7).next_u64(), base.derive(3, 8).next_u64());
    }

    #[test]
    fn second_moment_is_unit() {
        let g = sample_complex_gaussian(&mut RngStream::new(2024, 0), 1, 100_000);
        let n = g.as_slice().len() as f64;
        let m2 = g.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((m2 - 1.0).abs() < 0.01, "E|g|^2 = {m2}");
        // mean: each component has sd sqrt(1/2)/sqrt(n)
        let mean: Complex64 = g.as_slice().iter().sum::<Complex64>() / n;
        let bound = 3.0 * (0.5f64 / n).sqrt();
        assert!(
            mean.re.abs() < bound && mean.im.abs() < bound,
            "mean {mean}"
        );
        // real and imaginary parts each carry half the variance
        let re2 = g.as_slice().iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((re2 - 0.5).abs() < 0.01);
    }
}
