//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, stream id)`; ChaCha20's native stream
//! selector keeps different ids non-overlapping, so trials can be generated in
//! any order or on any worker and still reproduce bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Cx, Real};

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Derives a sub-stream; used to split one trial's stream into signal and
    /// noise parts without correlating them.
    pub fn substream(&self, tag: u64) -> Self {
        // splitmix64 finalizer keeps (stream, tag) pairs from colliding in practice
        let mut z = self.stream ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        Self { seed: self.seed, stream: z }
    }

    pub fn generator(&self) -> ComplexGaussian {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        ComplexGaussian { rng }
    }
}

/// Source of standard circular complex Gaussians `CN(0, 1)`.
pub struct ComplexGaussian {
    rng: ChaCha20Rng,
}

impl ComplexGaussian {
    /// Real and imaginary parts are independent `N(0, 1/2)`.
    pub fn sample<T: Real>(&mut self) -> Cx<T> {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Cx::new(
            T::lit(re * std::f64::consts::FRAC_1_SQRT_2),
            T::lit(im * std::f64::consts::FRAC_1_SQRT_2),
        )
    }

    pub fn fill<T: Real>(&mut self, out: &mut [Cx<T>]) {
        for z in out.iter_mut() {
            *z = self.sample();
        }
    }
}
