//! Per-path random streams.
//!
//! Every Monte Carlo path draws from its own ChaCha8 stream selected by
//! `(seed, path index)`. ChaCha is counter based, so a path's draws depend
//! only on its key and never on which thread simulated it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(seed: u64, path: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, path: u64) -> Vec<u64> {
        let mut rng = path_rng(seed, path);
        (0..4).map(|_| rng.random()).collect()
    }

    #[test]
    fn streams_are_keyed() {
        assert_eq!(draws(7, 3), draws(7, 3));
        assert_ne!(draws(7, 3), draws(7, 4));
        assert_ne!(draws(7, 3), draws(8, 3));
    }
}
