use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a random stream is used for. Each (client, purpose) pair gets its own
/// ChaCha stream under the run's master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Purpose {
    /// Generation of the synthetic problem (optima, rotations).
    Problem,
    /// Stochastic gradients consumed by optimizer steps.
    Step,
    /// Extra gradients drawn to estimate similarity ratios.
    Estimate,
    /// Probes used to estimate constants or validate inequalities.
    Probe,
    /// Free tag for tests and ad-hoc experiments.
    Custom(u16),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Problem => 1,
            Purpose::Step => 2,
            Purpose::Estimate => 3,
            Purpose::Probe => 4,
            Purpose::Custom(t) => 0x1_0000 + u64::from(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub client: u32,
    pub purpose: Purpose,
}

impl StreamId {
    pub fn new(client: usize, purpose: Purpose) -> Self {
        Self { client: u32::try_from(client).expect("client index fits in u32"), purpose }
    }

    fn word(self) -> u64 {
        (u64::from(self.client) << 20) | self.purpose.tag()
    }
}

/// Seeded random stream owned by a single task.
///
/// Identical `(seed, stream_id)` pairs replay identical sequences regardless of
/// how many other streams exist or in what order they are advanced.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    id: StreamId,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id.word());
        Self { seed, id, rng }
    }

    pub fn for_client(seed: u64, client: usize, purpose: Purpose) -> Self {
        Self::new(seed, StreamId::new(client, purpose))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn id(&self) -> StreamId {
        self.id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
