//! Seeded random generation for the invariant suites. Deterministic per seed
//! so selftest reports are byte-identical across runs.

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{rat_i64, ArtinRing, RElement, Rational};

pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn usize_below(&mut self, n: usize) -> usize {
        (self.inner.random::<u64>() % n as u64) as usize
    }

    pub fn i64_range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.inner.random::<u64>() % ((hi - lo + 1) as u64)) as i64
    }

    pub fn bool(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    /// Small rational with numerator in [-bound, bound], denominator in 1..=2.
    pub fn rational(&mut self, bound: i64) -> Rational {
        let n = self.i64_range(-bound, bound);
        let d = self.i64_range(1, 2);
        rat_i64(n, d)
    }

    /// Random element of R with all coefficients small.
    pub fn relement(&mut self, ring: ArtinRing, bound: i64) -> RElement {
        let coeffs = (0..ring.order()).map(|_| self.rational(bound)).collect();
        ring.from_coeffs(coeffs).unwrap()
    }

    /// Random element of the maximal ideal m = (t).
    pub fn m_element(&mut self, ring: ArtinRing, bound: i64) -> RElement {
        let mut coeffs: Vec<Rational> = (0..ring.order()).map(|_| self.rational(bound)).collect();
        coeffs[0] = rat_i64(0, 1);
        ring.from_coeffs(coeffs).unwrap()
    }
}
