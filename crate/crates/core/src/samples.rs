//! Seeded generators for randomized suites. Everything drawn here is
//! deterministic in the seed, so reports built on these samples are
//! byte-reproducible.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cube::Cube;
use crate::median::MedianParams;
use crate::points::PointSet;
use crate::rational::{rat, Rat};
use crate::step::StepFunction;

/// Random step function: dimension in {1,2}, resolution ≤ `max_resolution`,
/// values drawn from a small rational pool (repeats intended — consolidated
/// distributions stay small, which keeps exhaustive oracles cheap).
pub fn random_step_function(rng: &mut ChaCha8Rng, max_resolution: u32) -> StepFunction {
    let dim = if rng.gen_bool(0.5) { 1 } else { 2 };
    let resolution = rng.gen_range(0..=if dim == 1 { max_resolution } else { max_resolution.min(5) });
    let corner_choices = [rat(-1, 1), rat(0, 1), rat(1, 2), rat(-1, 3)];
    let side_choices = [rat(1, 1), rat(2, 1), rat(1, 2), rat(3, 2)];
    let corner = (0..dim)
        .map(|_| corner_choices[rng.gen_range(0..corner_choices.len())].clone())
        .collect();
    let side = side_choices[rng.gen_range(0..side_choices.len())].clone();
    let root = Cube::new(corner, side).expect("positive side");
    let pool_size = rng.gen_range(2..=8usize);
    let pool: Vec<Rat> = (0..pool_size)
        .map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=6)))
        .collect();
    let cells = 1usize << (resolution as usize * dim);
    let values = (0..cells)
        .map(|_| pool[rng.gen_range(0..pool.len())].clone())
        .collect();
    StepFunction::new(root, resolution, values).expect("consistent cell count")
}

/// Random parameters with 0 < s < t < 1 on a coarse rational grid.
pub fn random_params(rng: &mut ChaCha8Rng) -> MedianParams {
    loop {
        let d = rng.gen_range(5..=24i64);
        let s = rng.gen_range(1..d - 1);
        let t = rng.gen_range(s + 1..d);
        if let Ok(p) = MedianParams::new(rat(s, d), rat(t, d)) {
            return p;
        }
    }
}

/// Random subcube of the root with positive overlap, rational corners.
pub fn random_subcube(rng: &mut ChaCha8Rng, root: &Cube) -> Cube {
    let scale = [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4), rat(1, 1)];
    let side = root.side() * &scale[rng.gen_range(0..scale.len())];
    let corner = root
        .corner()
        .iter()
        .map(|c| {
            let slack = root.side() - &side;
            let num = rng.gen_range(0..=12i64);
            c + slack * rat(num, 12)
        })
        .collect();
    Cube::new(corner, side).expect("positive side")
}

/// Random nested pair `inner ⊆ outer ⊆ root` with a volume ratio at least
/// `min_ratio` (used for nested-median comparisons).
pub fn random_nested_pair(rng: &mut ChaCha8Rng, root: &Cube, min_ratio: &Rat) -> (Cube, Cube) {
    let outer = random_subcube(rng, root);
    let n = root.dim() as i32;
    // pick a side factor u with u^n ≥ min_ratio
    let mut u = rat(11, 12);
    for cand in [rat(1, 2), rat(2, 3), rat(3, 4), rat(5, 6), rat(11, 12)] {
        if cand.pow(n) >= *min_ratio {
            u = cand;
            break;
        }
    }
    let side = outer.side() * &u;
    let corner = outer
        .corner()
        .iter()
        .map(|c| {
            let slack = outer.side() - &side;
            c + slack * rat(rng.gen_range(0..=4i64), 4)
        })
        .collect();
    (Cube::new(corner, side).expect("positive side"), outer)
}

/// Random finite point set inside (a slight enlargement of) the cube.
pub fn random_finite_set(rng: &mut ChaCha8Rng, dim: usize, count: usize, within: &Cube) -> PointSet {
    let points = (0..count.max(1))
        .map(|_| {
            (0..dim)
                .map(|i| {
                    let num = rng.gen_range(-2..=18i64);
                    &within.corner()[i] + within.side() * rat(num, 16)
                })
                .collect::<Vec<Rat>>()
        })
        .collect();
    PointSet::finite(points).expect("nonempty")
}

/// Nonnegative variant of [`random_step_function`] on the unit cube.
pub fn random_nonnegative_step_function(
    rng: &mut ChaCha8Rng,
    max_resolution: u32,
) -> StepFunction {
    let f = random_step_function(rng, max_resolution);
    let shift = f
        .values()
        .iter()
        .min()
        .cloned()
        .unwrap_or_default();
    let shift = if shift < Rat::from_integer(BigInt::from(0)) { -shift } else { Rat::from_integer(BigInt::from(0)) };
    f.map_affine(&Rat::from_integer(BigInt::from(1)), &shift)
}
