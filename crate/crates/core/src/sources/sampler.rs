use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::law::Law;
use crate::exec::Execution;

const CHUNK: usize = 8192;

/// SplitMix64 finalizer, used to derive independent per-task seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of logical task `task` under the root seed.
pub fn task_seed(seed: u64, task: u64) -> u64 {
    mix64(seed ^ mix64(task))
}

/// Draws `count` values from `law`. Chunk `c` always uses the stream seeded by
/// `task_seed(seed, c)`, so the result does not depend on the thread count.
pub fn draw(law: &Law, count: usize, seed: u64, exec: Execution) -> Vec<f64> {
    let chunks = count.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let len = CHUNK.min(count - c * CHUNK);
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, c as u64));
        (0..len).map(|_| draw_one(law, &mut rng)).collect::<Vec<f64>>()
    });
    parts.concat()
}

fn draw_one<R: Rng>(law: &Law, rng: &mut R) -> f64 {
    match law {
        Law::Normals(cs) => {
            let c = pick(cs.iter().map(|c| c.weight), rng);
            let z: f64 = rng.sample(StandardNormal);
            cs[c].mean + cs[c].sd * z
        }
        Law::Atoms(atoms) => atoms[pick(atoms.iter().map(|a| a.weight), rng)].at,
    }
}

fn pick<R: Rng, I: Iterator<Item = f64> + Clone>(weights: I, rng: &mut R) -> usize {
    let len = weights.clone().count();
    if len == 1 {
        return 0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    len - 1
}
