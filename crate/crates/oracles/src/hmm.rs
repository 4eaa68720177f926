use std::f64::consts::PI;

use confab::feedback::CueModel;

/// Emission densities in probability space. Missing dimensions are
/// dropped from the product.
pub fn emission_densities(model: &CueModel, obs: &[Option<f64>]) -> Vec<f64> {
    (0..model.initial.len())
        .map(|s| {
            obs.iter()
                .enumerate()
                .filter_map(|(d, x)| {
                    x.map(|x| {
                        let m = model.means[s][d];
                        let v = model.variances[s][d];
                        (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
                    })
                })
                .product()
        })
        .collect()
}

/// Textbook forward algorithm with per-step rescaling, returning the
/// filtered marginal P(state_t | obs_1..t) for every t.
pub fn batch_forward(model: &CueModel, observations: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
    let n = model.initial.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(observations.len());
    for (t, obs) in observations.iter().enumerate() {
        let e = emission_densities(model, obs);
        let mut alpha: Vec<f64> = if t == 0 {
            (0..n).map(|i| model.initial[i] * e[i]).collect()
        } else {
            let prev = &out[t - 1];
            (0..n)
                .map(|j| {
                    let pred: f64 = (0..n).map(|i| prev[i] * model.transition[i][j]).sum();
                    pred * e[j]
                })
                .collect()
        };
        let z: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|a| *a /= z);
        out.push(alpha);
    }
    out
}

/// Filtered marginals by summing the joint probability over every state
/// path. Exponential; only for tiny T.
pub fn path_sum_filtered(model: &CueModel, observations: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
    let n = model.initial.len();
    let emissions: Vec<Vec<f64>> = observations
        .iter()
        .map(|o| emission_densities(model, o))
        .collect();
    (1..=observations.len())
        .map(|len| {
            let mut mass = vec![0.0; n];
            for path in all_paths(n, len) {
                mass[path[len - 1]] += path_probability(model, &emissions, &path);
            }
            let z: f64 = mass.iter().sum();
            mass.iter().map(|m| m / z).collect()
        })
        .collect()
}

/// All state paths of length `len` in lexicographic order.
pub fn all_paths(n: usize, len: usize) -> Vec<Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut path = vec![0; len];
            for slot in path.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            path
        })
        .collect()
}

fn path_probability(model: &CueModel, emissions: &[Vec<f64>], path: &[usize]) -> f64 {
    let mut p = model.initial[path[0]] * emissions[0][path[0]];
    for t in 1..path.len() {
        p *= model.transition[path[t - 1]][path[t]] * emissions[t][path[t]];
    }
    p
}

/// Most probable path by enumeration; the first (lexicographically lowest)
/// path wins ties.
pub fn exhaustive_viterbi(model: &CueModel, observations: &[Vec<Option<f64>>]) -> Vec<usize> {
    let n = model.initial.len();
    let log_e: Vec<Vec<f64>> = observations
        .iter()
        .map(|o| emission_densities(model, o).iter().map(|p| p.ln()).collect())
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for path in all_paths(n, observations.len()) {
        let mut score = model.initial[path[0]].ln() + log_e[0][path[0]];
        for t in 1..path.len() {
            score += model.transition[path[t - 1]][path[t]].ln() + log_e[t][path[t]];
        }
        if best.as_ref().is_none_or(|(b, _)| score > *b) {
            best = Some((score, path));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}
