//! Reproducible random streams keyed by `(master_seed, stream_id)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer; a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha12 stream. The key is expanded from `master_seed`, and the
/// ChaCha stream selector is a mix of `stream_id`, so distinct stream ids
/// never share a keystream.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = mix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut inner = ChaCha12Rng::from_seed(key);
        inner.set_stream(mix64(stream_id ^ 0xD1B5_4A32_D192_ED03));
        SeededRng {
            master_seed,
            stream_id,
            inner,
        }
    }

    /// Stream for trial `trial` of grid point `grid_index`.
    pub fn for_trial(master_seed: u64, grid_index: u32, trial: u32) -> Self {
        Self::new(master_seed, ((grid_index as u64) << 32) | trial as u64)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
