use super::ObjectiveVector;

/// Pareto dominance for minimization: `a` is no worse everywhere and
/// strictly better somewhere.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sorting. Returns fronts of input indices, each
/// sorted ascending, best front first.
pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i].0, &points[j].0) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if dominates(&points[j].0, &points[i].0) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[&[f64]]) -> Vec<ObjectiveVector> {
        xs.iter().map(|x| ObjectiveVector(x.to_vec())).collect()
    }

    #[test]
    fn chain_of_dominance() {
        // (1,2) dominates (2,2), so the three points sit in three fronts.
        assert_eq!(
            non_dominated_sort(&pts(&[&[1.0, 1.0], &[1.0, 2.0], &[2.0, 2.0]])),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn mutually_non_dominated() {
        assert_eq!(non_dominated_sort(&pts(&[&[0.0, 1.0], &[1.0, 0.0]])), vec![vec![0, 1]]);
    }

    #[test]
    fn equal_points_share_a_front() {
        assert_eq!(
            non_dominated_sort(&pts(&[&[0.5, 0.5], &[0.5, 0.5], &[1.0, 1.0]])),
            vec![vec![0, 1], vec![2]]
        );
    }

    #[test]
    fn empty_input() {
        assert!(non_dominated_sort(&[]).is_empty());
    }
}
