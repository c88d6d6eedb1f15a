//! Seeded point generation for randomized sweeps.
//!
//! The generator is SplitMix64, so a seed produces the same sequence on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::potentials::{GasParams, StateSV};

pub struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    /// States with `S ∈ [−2NkB, 2NkB]` and `V ∈ [0.5, 10]·Vref`.
    pub fn states(&mut self, params: &GasParams, count: usize) -> Vec<StateSV> {
        let nkb = params.nkb();
        (0..count)
            .map(|_| {
                let s = self.uniform(-2.0 * nkb, 2.0 * nkb);
                let v = self.uniform(0.5, 10.0) * params.vref;
                StateSV { s, v }
            })
            .collect()
    }

    /// Parameter sets with every component in `[0.1, 10]`.
    pub fn gas_params(&mut self) -> GasParams {
        GasParams {
            n: self.uniform(0.1, 10.0),
            kb: self.uniform(0.1, 10.0),
            u0: self.uniform(0.1, 10.0),
            vref: self.uniform(0.1, 10.0),
        }
    }
}
