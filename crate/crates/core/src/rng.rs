//! Counter-based random streams.
//!
//! Every primitive draw is addressed by `(seed, repetition, domain, episode,
//! index)`. Each address keys its own ChaCha8 generator, so the draws for an
//! episode never depend on what was drawn before, on which action was played,
//! or on which thread runs the repetition. Policies that share a
//! `(seed, repetition)` therefore see the same outcome noise at every episode.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent families of draws within one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Domain {
    /// Environment outcome noise (one cell per episode).
    Outcome = 1,
    /// Posterior samples (one cell per episode and action).
    Posterior = 2,
    /// Tie-breaking among equally preferred actions.
    TieBreak = 3,
    /// Monte-Carlo trials outside the bandit loop.
    Trial = 4,
}

/// Address space of one repetition: `(seed, repetition)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseStream {
    seed: u64,
    repetition: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, repetition: u64) -> Self {
        Self { seed, repetition }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn repetition(&self) -> u64 {
        self.repetition
    }

    /// Generator for one cell. `index` must fit in 56 bits.
    pub fn cell(&self, domain: Domain, episode: u64, index: u64) -> ChaCha8Rng {
        debug_assert!(index < 1 << 56);
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.repetition.to_le_bytes());
        key[16..24].copy_from_slice(&(((domain as u64) << 56) | index).to_le_bytes());
        key[24..32].copy_from_slice(&episode.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }

    /// `n` standard normal draws from one cell.
    pub fn normals(&self, domain: Domain, episode: u64, index: u64, out: &mut [f64]) {
        let mut rng = self.cell(domain, episode, index);
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
        }
    }

    /// `n` uniform draws in `[0, 1)` from one cell.
    pub fn uniforms(&self, domain: Domain, episode: u64, index: u64, out: &mut [f64]) {
        let mut rng = self.cell(domain, episode, index);
        for o in out.iter_mut() {
            *o = rng.random::<f64>();
        }
    }
}

/// Source of the randomness a sampling policy consumes in one decision.
pub trait DrawSource {
    /// Fills `out` with standard normals belonging to `action`.
    fn normals(&mut self, action: usize, out: &mut [f64]);

    /// Uniform index in `0..n` (`n >= 1`).
    fn tie_break(&mut self, n: usize) -> usize;
}

/// Draws for one episode of one repetition, addressed by the counter scheme.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeDraws {
    stream: NoiseStream,
    episode: u64,
}

impl EpisodeDraws {
    pub fn new(stream: NoiseStream, episode: u64) -> Self {
        Self { stream, episode }
    }
}

impl DrawSource for EpisodeDraws {
    fn normals(&mut self, action: usize, out: &mut [f64]) {
        self.stream.normals(Domain::Posterior, self.episode, action as u64, out);
    }

    fn tie_break(&mut self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        self.stream.cell(Domain::TieBreak, self.episode, 0).random_range(0..n)
    }
}

/// Adapter for any sequential generator.
#[derive(Debug)]
pub struct RngDraws<R>(pub R);

impl<R: Rng> DrawSource for RngDraws<R> {
    fn normals(&mut self, _action: usize, out: &mut [f64]) {
        for o in out.iter_mut() {
            *o = self.0.sample(StandardNormal);
        }
    }

    fn tie_break(&mut self, n: usize) -> usize {
        if n <= 1 {
            0
        } else {
            self.0.random_range(0..n)
        }
    }
}
