use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::world::{ScenarioConfig, Vec2};
use crate::{Error, Result};

/// Whole-configuration resampling budget before giving up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Seeded ChaCha8 stream. ChaCha output and rand's float conversion are
/// specified bit-for-bit, and disk sampling below avoids transcendental
/// functions, so a seed gives the same scenario on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "ChaCha8";

    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform point in the closed disk of radius `radius`, by rejection
    /// from the bounding square.
    pub fn in_disk(&mut self, radius: f64) -> Vec2 {
        loop {
            let x = 2.0 * self.uniform() - 1.0;
            let y = 2.0 * self.uniform() - 1.0;
            if x * x + y * y <= 1.0 {
                return Vec2::new(radius * x, radius * y);
            }
        }
    }
}

/// Draws start and goal centers uniformly in the disk of radius `R0 - r0`,
/// resampling the whole layout until no two starts and no two goals
/// overlap. Starts are not checked against goals.
pub fn sample_scenario(rng: &mut RngStream, template: &ScenarioConfig) -> Result<ScenarioConfig> {
    template.validate_params()?;
    let n = template.n_agents;
    let radius = template.wall_radius();
    let min_sq = 4.0 * template.r0 * template.r0;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let starts: Vec<Vec2> = (0..n).map(|_| rng.in_disk(radius)).collect();
        let goals: Vec<Vec2> = (0..n).map(|_| rng.in_disk(radius)).collect();
        if separated(&starts, min_sq) && separated(&goals, min_sq) {
            return Ok(ScenarioConfig { starts, goals, ..template.clone() });
        }
    }
    Err(Error::ScenarioGeneration { n_agents: n, attempts: MAX_PLACEMENT_ATTEMPTS })
}

fn separated(points: &[Vec2], min_sq: f64) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, p)| points[i + 1..].iter().all(|q| (*p - *q).norm_sq() >= min_sq))
}

/// FNV-1a over the bit patterns of the layout.
pub fn scenario_hash(s: &ScenarioConfig) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for p in s.starts.iter().chain(&s.goals) {
        for v in [p.x, p.y] {
            for byte in v.to_bits().to_le_bytes() {
                hash ^= u64::from(byte);
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    hash
}
