use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::seqlang::SeqToken;

/// Generate a random measured access sequence of `len` accesses, starting
/// from an invalidated cache.
///
/// The first access is always a fresh block; every later position is fresh
/// with probability `p_fresh` and otherwise drawn uniformly from the
/// distinct blocks used so far.
pub fn gen_random_sequence(len: usize, p_fresh: f64, rng: &mut ChaCha12Rng) -> Vec<SeqToken> {
    assert!(len >= 1, "sequences have at least one access");
    assert!((0.0..=1.0).contains(&p_fresh));
    let mut tokens = Vec::with_capacity(len + 1);
    tokens.push(SeqToken::Wbinvd);
    let mut used = 0usize;
    for i in 0..len {
        let fresh = i == 0 || rng.gen_bool(p_fresh);
        let id = if fresh {
            used += 1;
            used - 1
        } else {
            rng.gen_range(0..used)
        };
        tokens.push(SeqToken::measured(format!("E{id}")));
    }
    tokens
}
