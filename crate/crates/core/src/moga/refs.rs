/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Das–Dennis simplex lattice: every vector with nonnegative components in
/// multiples of `1/divisions` summing to one. There are
/// `C(objectives + divisions - 1, divisions)` of them, in lexicographically
/// ascending order of their integer numerators.
pub fn reference_points(objectives: usize, divisions: usize) -> Vec<Vec<f64>> {
    assert!(objectives >= 1, "need at least one objective");
    let mut out = Vec::with_capacity(binomial(objectives + divisions - 1, divisions));
    let mut numerators = vec![0usize; objectives];
    fill(&mut out, &mut numerators, 0, divisions, divisions);
    out
}

fn fill(out: &mut Vec<Vec<f64>>, current: &mut [usize], axis: usize, left: usize, divisions: usize) {
    if axis == current.len() - 1 {
        current[axis] = left;
        out.push(current.iter().map(|&k| k as f64 / divisions as f64).collect());
        return;
    }
    for k in 0..=left {
        current[axis] = k;
        fill(out, current, axis + 1, left - k, divisions);
    }
}
