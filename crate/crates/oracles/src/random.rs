use confab::feedback::CueModel;
use rand::Rng;

fn distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let z: f64 = raw.iter().sum();
    raw.iter().map(|x| x / z).collect()
}

/// A random valid cue model with `n` states and `dims` features.
pub fn cue_model<R: Rng>(rng: &mut R, n: usize, dims: usize) -> CueModel {
    CueModel {
        initial: distribution(rng, n),
        transition: (0..n).map(|_| distribution(rng, n)).collect(),
        means: (0..n)
            .map(|_| (0..dims).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect(),
        variances: (0..n)
            .map(|_| (0..dims).map(|_| rng.random_range(0.3..3.0)).collect())
            .collect(),
    }
}

/// Random observations in the range the random models emit; roughly one
/// in ten entries of the last dimension is missing when `dims > 1`.
pub fn observations<R: Rng>(rng: &mut R, len: usize, dims: usize) -> Vec<Vec<Option<f64>>> {
    (0..len)
        .map(|_| {
            (0..dims)
                .map(|d| {
                    if dims > 1 && d == dims - 1 && rng.random_bool(0.1) {
                        None
                    } else {
                        Some(rng.random_range(-4.0..4.0))
                    }
                })
                .collect()
        })
        .collect()
}
