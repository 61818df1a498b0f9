//! Seeded random streams.
//!
//! Every sample is generated in fixed-size chunks, each chunk drawing from its
//! own ChaCha8 stream keyed by `(seed, chunk index)`. The rows produced are
//! therefore a pure function of the seed and the sample size, whatever the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Rows per chunk. Changing this changes every generated sample.
pub const CHUNK_LEN: usize = 1 << 14;

/// The random stream backing chunk `chunk` of the sample with seed `seed`.
pub fn chunk_stream(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Splits `n` rows into `(chunk index, start row, length)` triples.
pub fn chunks(n: usize) -> impl Iterator<Item = (u64, usize, usize)> {
    (0..n.div_ceil(CHUNK_LEN)).map(move |c| {
        let start = c * CHUNK_LEN;
        (c as u64, start, CHUNK_LEN.min(n - start))
    })
}
