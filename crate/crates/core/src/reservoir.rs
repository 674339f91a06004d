//! Size-one reservoir sample of the ranking stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::universe::{Ranking, Universe};

/// Generator position, enough to resume a stream exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

/// After `seen` offers, holds each offered ranking with probability `1/seen`.
#[derive(Debug, Clone)]
pub struct Reservoir {
    universe: Universe,
    sample: Option<Ranking>,
    seen: u64,
    rng: ChaCha8Rng,
}

impl Reservoir {
    pub fn new(universe: Universe, seed: u64) -> Self {
        Reservoir {
            universe,
            sample: None,
            seen: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub(crate) fn from_parts(
        universe: Universe,
        sample: Option<Ranking>,
        seen: u64,
        rng: ChaCha8Rng,
    ) -> Self {
        Reservoir {
            universe,
            sample,
            seen,
            rng,
        }
    }

    /// Offers `pi`; returns whether it replaced the sample.
    pub fn offer(&mut self, pi: &Ranking) -> Result<bool> {
        self.universe.check(&pi.universe())?;
        self.seen += 1;
        let p = self.rng.gen_range(1..=self.seen);
        let replace = p == self.seen;
        if replace {
            match &mut self.sample {
                Some(s) => s.clone_from(pi),
                None => self.sample = Some(pi.clone()),
            }
        }
        Ok(replace)
    }

    pub fn sample(&self) -> Option<&Ranking> {
        self.sample.as_ref()
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn rng_state(&self) -> RngState {
        RngState::capture(&self.rng)
    }
}
