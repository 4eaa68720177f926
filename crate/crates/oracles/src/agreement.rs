/// Nominal alpha from its pairwise-disagreement definition: observed
/// disagreement among values sharing a unit over expected disagreement
/// among all pairable values.
pub fn pairwise_alpha(units: &[Vec<Option<u32>>]) -> Option<f64> {
    let pairable: Vec<Vec<u32>> = units
        .iter()
        .map(|u| u.iter().flatten().copied().collect::<Vec<_>>())
        .filter(|v| v.len() >= 2)
        .collect();
    let all: Vec<u32> = pairable.iter().flatten().copied().collect();
    let n = all.len() as f64;
    if n < 2.0 {
        return None;
    }
    let mut within = 0.0;
    for v in &pairable {
        let mut differing = 0.0;
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j && v[i] != v[j] {
                    differing += 1.0;
                }
            }
        }
        within += differing / (v.len() - 1) as f64;
    }
    let observed = within / n;
    let mut differing = 0.0;
    for i in 0..all.len() {
        for j in 0..all.len() {
            if i != j && all[i] != all[j] {
                differing += 1.0;
            }
        }
    }
    let expected = differing / (n * (n - 1.0));
    if observed == 0.0 {
        return Some(1.0);
    }
    Some(1.0 - observed / expected)
}

/// Label per bin by counting marks directly.
pub fn count_votes(rows: &[Vec<Option<bool>>], bins: usize, threshold: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(bins);
    for b in 0..bins {
        let mut votes = 0;
        for row in rows {
            if row[b] == Some(true) {
                votes += 1;
            }
        }
        out.push(if votes >= threshold { 1 } else { 0 });
    }
    out
}
