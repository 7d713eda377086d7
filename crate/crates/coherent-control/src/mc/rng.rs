//! Counter-split random streams and Gaussian sampling.
//!
//! ChaCha is a counter-mode stream cipher, so `(seed, stream)` pairs give
//! statistically independent streams; one stream per path index makes every
//! path's randomness a pure function of `(seed, path)` regardless of which
//! worker thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The substream for one path of one run.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-path draw source: uniforms, exponentials and Box–Muller Gaussians,
/// with an optional global sign flip for antithetic pairing.
pub struct DrawSource {
    rng: ChaCha8Rng,
    spare_gaussian: Option<f64>,
    negate: bool,
}

impl DrawSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { rng: path_rng(seed, stream), spare_gaussian: None, negate: false }
    }

    /// Antithetic pairing: paths `2m` and `2m+1` share stream `m`, the odd
    /// path negating every Gaussian draw.
    pub fn antithetic(seed: u64, path: u64) -> Self {
        Self {
            rng: path_rng(seed, path / 2),
            spare_gaussian: None,
            negate: path % 2 == 1,
        }
    }

    /// Uniform on (0, 1].
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen::<f64>() < p
    }

    /// Standard exponential via inversion.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open().ln()
    }

    /// Standard normal via Box–Muller (pair cached).
    pub fn gaussian(&mut self) -> f64 {
        let raw = match self.spare_gaussian.take() {
            Some(g) => g,
            None => {
                let r = (-2.0 * self.uniform_open().ln()).sqrt();
                let theta = 2.0 * std::f64::consts::PI * self.rng.gen::<f64>();
                let (s, c) = theta.sin_cos();
                self.spare_gaussian = Some(r * s);
                r * c
            }
        };
        if self.negate {
            -raw
        } else {
            raw
        }
    }
}
