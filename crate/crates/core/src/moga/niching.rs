use rand::seq::IndexedRandom;
use rand::Rng;

use super::sort::non_dominated_sort;
use super::ObjectiveVector;

/// Picks `target` survivors out of `points`.
///
/// Whole fronts are taken while they fit. Members of the front that
/// overflows are normalized against the ideal point and the intercepts of
/// the extreme-point hyperplane, attached to their nearest reference line,
/// and then drawn from the least crowded lines first. Returned indices are
/// ascending. Random tie breaks come from `rng` only.
pub fn niching_select<R: Rng + ?Sized>(
    points: &[ObjectiveVector],
    target: usize,
    refs: &[Vec<f64>],
    rng: &mut R,
) -> Vec<usize> {
    if points.len() <= target {
        return (0..points.len()).collect();
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(target);
    let mut last_front = Vec::new();
    for front in non_dominated_sort(points) {
        if chosen.len() + front.len() <= target {
            chosen.extend(front);
            if chosen.len() == target {
                break;
            }
        } else {
            last_front = front;
            break;
        }
    }
    if chosen.len() == target {
        chosen.sort_unstable();
        return chosen;
    }

    let members: Vec<usize> = chosen.iter().chain(&last_front).copied().collect();
    let normalized = normalize(points, &members);
    let assoc: Vec<(usize, f64)> = normalized.iter().map(|p| nearest_reference(p, refs)).collect();

    let mut niche = vec![0usize; refs.len()];
    for (k, _) in chosen.iter().enumerate() {
        niche[assoc[k].0] += 1;
    }
    // Last-front members per reference line, as (point index, distance).
    let mut pool: Vec<Vec<(usize, f64)>> = vec![Vec::new(); refs.len()];
    for (k, &idx) in last_front.iter().enumerate() {
        let (r, d) = assoc[chosen.len() + k];
        pool[r].push((idx, d));
    }

    let mut open: Vec<bool> = vec![true; refs.len()];
    let mut remaining = target - chosen.len();
    while remaining > 0 {
        let min = (0..refs.len()).filter(|&j| open[j]).map(|j| niche[j]).min().expect("a line with members stays open");
        let lines: Vec<usize> = (0..refs.len()).filter(|&j| open[j] && niche[j] == min).collect();
        let j = *lines.choose(rng).expect("nonempty");
        if pool[j].is_empty() {
            open[j] = false;
            continue;
        }
        let pick = if niche[j] == 0 {
            pool[j]
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.1 .0.cmp(&b.1 .0)))
                .map(|(k, _)| k)
                .expect("nonempty")
        } else {
            rng.random_range(0..pool[j].len())
        };
        let (idx, _) = pool[j].swap_remove(pick);
        chosen.push(idx);
        niche[j] += 1;
        remaining -= 1;
    }
    chosen.sort_unstable();
    chosen
}

/// Translates by the ideal point and scales by hyperplane intercepts.
/// Falls back to the per-axis maximum when the hyperplane is degenerate.
fn normalize(points: &[ObjectiveVector], members: &[usize]) -> Vec<Vec<f64>> {
    let m = points[members[0]].len();
    let mut ideal = vec![f64::INFINITY; m];
    for &i in members {
        for (j, &v) in points[i].0.iter().enumerate() {
            ideal[j] = ideal[j].min(v);
        }
    }
    let translated: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| points[i].0.iter().zip(&ideal).map(|(v, z)| v - z).collect())
        .collect();

    let mut extremes = Vec::with_capacity(m);
    for axis in 0..m {
        let asf = |t: &[f64]| {
            t.iter()
                .enumerate()
                .map(|(j, &v)| if j == axis { v } else { v / 1e-6 })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let best = translated
            .iter()
            .min_by(|a, b| asf(a).total_cmp(&asf(b)))
            .expect("members nonempty");
        extremes.push(best.clone());
    }
    let maxima: Vec<f64> = (0..m)
        .map(|j| translated.iter().map(|t| t[j]).fold(0.0, f64::max))
        .collect();
    let intercepts = match solve(extremes, vec![1.0; m]) {
        Some(a) if a.iter().all(|&x| x > 1e-12 && x.is_finite()) => a
            .iter()
            .zip(&maxima)
            .map(|(&x, &mx)| {
                let c = 1.0 / x;
                if c > 1e-10 && c.is_finite() {
                    c
                } else {
                    mx
                }
            })
            .collect(),
        _ => maxima,
    };
    translated
        .into_iter()
        .map(|t| {
            t.iter()
                .zip(&intercepts)
                .map(|(&v, &c)| if c > 1e-10 { v / c } else { v })
                .collect()
        })
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Index of the closest reference line and the perpendicular distance.
fn nearest_reference(p: &[f64], refs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, w) in refs.iter().enumerate() {
        let ww: f64 = w.iter().map(|x| x * x).sum();
        let pw: f64 = p.iter().zip(w).map(|(a, b)| a * b).sum();
        let scale = if ww > 0.0 { pw / ww } else { 0.0 };
        let d2: f64 = p.iter().zip(w).map(|(a, b)| (a - scale * b).powi(2)).sum();
        let d = d2.sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}
