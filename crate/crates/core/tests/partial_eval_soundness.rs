//! Partial evaluation agrees with direct evaluation on exemplar programs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use taskforge::dsl::{eval, free_vars, partial_eval, Env};
use taskforge::exemplars::catalog;
use taskforge::generator::{create_task, sample_vars};
use taskforge::grid::{Color, Grid};
use taskforge::sampler::RngStream;

fn random_grid(rng: &mut ChaCha20Rng) -> Grid {
    let (h, w) = (rng.gen_range(3..=12), rng.gen_range(3..=12));
    let cells = (0..h * w).map(|_| if rng.gen_bool(0.7) { Color::of(0) } else { Color::of(rng.gen_range(1..10)) }).collect();
    Grid::new(h, w, cells).unwrap()
}

#[test]
fn specialized_programs_agree_on_random_triples() {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut mismatches = Vec::new();
    for i in 0..200u64 {
        let def = &catalog()[i as usize % catalog().len()];
        let env = sample_vars(&mut RngStream::derive(i, "soundness"), &def.taskvars).unwrap();
        let program = (def.transform_builder)(&env);
        let witness = partial_eval(&program, &env).unwrap();
        assert!(free_vars(&witness).is_empty());
        // Alternate between on-distribution inputs and arbitrary grids.
        let input = if i % 2 == 0 {
            create_task(def, i).unwrap().episode.train[0].input.clone()
        } else {
            random_grid(&mut rng)
        };
        if eval(&witness, &input, &Env::new()) != eval(&program, &input, &env) {
            mismatches.push((def.id, i));
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
}
