//! Sequential missed-detection updates against the explicit joint likelihood.

use beings_core::{CellGrid, GridBelief};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Q_MAX: f64 = 1.0 - 1e-6;

fn random_sequence(rng: &mut ChaCha8Rng, m: usize) -> Vec<(usize, f64)> {
    let len = rng.random_range(1..40);
    (0..len).map(|_| (rng.random_range(0..m), rng.random_range(0.0..=Q_MAX))).collect()
}

fn joint_posterior(prior: &[f64], obs: &[(usize, f64)]) -> Vec<f64> {
    let mut post: Vec<f64> = prior
        .iter()
        .enumerate()
        .map(|(j, p)| obs.iter().filter(|(c, _)| *c == j).map(|(_, q)| 1.0 - q).product::<f64>() * p)
        .collect();
    let z: f64 = post.iter().sum();
    post.iter_mut().for_each(|p| *p /= z);
    post
}

#[test]
fn matches_joint_likelihood_on_small_grids() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let nx = rng.random_range(1..=5);
        let ny = rng.random_range(1..=2);
        let grid = CellGrid::new((0.0, 0.0), 1.0, nx, ny).unwrap();
        let prior: Vec<f64> = (0..nx * ny).map(|_| rng.random_range(0.05..1.0)).collect();
        let mut b = GridBelief::from_masses(grid, prior.clone()).unwrap();
        let prior: Vec<f64> = b.masses().to_vec();
        let obs = random_sequence(&mut rng, nx * ny);
        for &(c, q) in &obs {
            b.bayes_update(c, q).unwrap();
        }
        let oracle = joint_posterior(&prior, &obs);
        for (a, e) in b.masses().iter().zip(&oracle) {
            assert!((a - e).abs() < 1e-12, "{a} vs {e}");
        }
    }
}

#[test]
fn normalization_survives_long_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let grid = CellGrid::new((0.0, 0.0), 1.0, n, n).unwrap();
        let mut b = GridBelief::uniform(grid);
        for (c, q) in random_sequence(&mut rng, n * n) {
            b.bayes_update(c, q).unwrap();
        }
        assert!((b.total() - 1.0).abs() < 1e-9);
        assert!(b.masses().iter().all(|m| *m >= 0.0));
    }
}
