//! Seeded random draws of rational data for the sampled identity checks.
//!
//! Coefficients come from the fixed set `{n/d : |n| ≤ 5, d ∈ 1..=4}` so that
//! exact arithmetic stays cheap and every run is reproducible from its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::group::GroupElement;
use crate::timealg::{rat, Scalar, TimePoly, Vec3Poly};

pub struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn scalar(&mut self) -> Scalar {
        let n = self.rng.random_range(-5i64..=5);
        let d = self.rng.random_range(1i64..=4);
        rat(n, d)
    }

    pub fn nonzero_scalar(&mut self) -> Scalar {
        loop {
            let s = self.scalar();
            if s != rat(0, 1) {
                return s;
            }
        }
    }

    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    pub fn scalars(&mut self, len: usize) -> Vec<Scalar> {
        (0..len).map(|_| self.scalar()).collect()
    }

    /// Random polynomial of degree at most `deg` (capped by the budget).
    pub fn poly(&mut self, deg: usize, max_degree: usize) -> TimePoly {
        let d = deg.min(max_degree);
        TimePoly::new(self.scalars(d + 1), max_degree).expect("degree within budget")
    }

    pub fn vec3(&mut self, deg: usize, max_degree: usize) -> Vec3Poly {
        Vec3Poly::from_fn(|_| self.poly(deg, max_degree))
    }

    pub fn element(&mut self, deg: usize, max_degree: usize) -> GroupElement {
        let a = self.vec3(deg, max_degree);
        GroupElement::new(a, self.scalar())
    }

    /// Element with `b = 0`.
    pub fn translation(&mut self, deg: usize, max_degree: usize) -> GroupElement {
        GroupElement::translation(self.vec3(deg, max_degree))
    }

    /// `a(t) = a₀ + v t` with random `b`.
    pub fn galilei(&mut self, max_degree: usize) -> GroupElement {
        self.element(1, max_degree)
    }
}
