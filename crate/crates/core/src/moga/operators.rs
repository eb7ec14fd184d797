//! Variation operators for permutation and two-arm assignment chromosomes.

use std::collections::HashSet;
use std::hash::Hash;

use rand::Rng;

use crate::model::Arm;

/// Order crossover: the child keeps `a[cut1..cut2)` in place and fills the
/// remaining slots, left to right, with `b`'s genes in `b`'s order,
/// skipping genes already present.
pub fn order_crossover<T: Copy + Eq + Hash>(a: &[T], b: &[T], cut1: usize, cut2: usize) -> Vec<T> {
    assert_eq!(a.len(), b.len(), "parents differ in length");
    assert!(cut1 <= cut2 && cut2 <= a.len(), "invalid cut points {cut1}..{cut2}");
    let kept: HashSet<T> = a[cut1..cut2].iter().copied().collect();
    let mut filler = b.iter().copied().filter(|g| !kept.contains(g));
    let mut child = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        if (cut1..cut2).contains(&i) {
            child.push(a[i]);
        } else {
            child.push(filler.next().expect("parents are permutations of the same set"));
        }
    }
    child
}

/// Uniform crossover: each gene comes from either parent with equal odds.
pub fn uniform_crossover<T: Copy, R: Rng + ?Sized>(a: &[T], b: &[T], rng: &mut R) -> Vec<T> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| if rng.random_bool(0.5) { x } else { y })
        .collect()
}

pub fn swap_positions<T: Clone>(x: &[T], i: usize, j: usize) -> Vec<T> {
    let mut out = x.to_vec();
    out.swap(i, j);
    out
}

/// With probability `rate`, exchanges two distinct random positions.
pub fn swap_mutation<T: Clone, R: Rng + ?Sized>(x: &[T], rate: f64, rng: &mut R) -> Vec<T> {
    if x.len() < 2 || rate <= 0.0 || !rng.random_bool(rate.min(1.0)) {
        return x.to_vec();
    }
    let i = rng.random_range(0..x.len());
    let mut j = rng.random_range(0..x.len() - 1);
    if j >= i {
        j += 1;
    }
    swap_positions(x, i, j)
}

pub fn flip_position(x: &[Arm], i: usize) -> Vec<Arm> {
    let mut out = x.to_vec();
    out[i] = out[i].other();
    out
}

/// With probability `rate`, toggles the arm of one random task.
pub fn flip_mutation<R: Rng + ?Sized>(x: &[Arm], rate: f64, rng: &mut R) -> Vec<Arm> {
    if x.is_empty() || rate <= 0.0 || !rng.random_bool(rate.min(1.0)) {
        return x.to_vec();
    }
    let i = rng.random_range(0..x.len());
    flip_position(x, i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ox_worked_example() {
        assert_eq!(order_crossover(&[1, 2, 3, 4, 5], &[5, 4, 3, 2, 1], 1, 3), vec![5, 2, 3, 4, 1]);
    }

    #[test]
    fn ox_identical_parents() {
        let a = [3, 1, 4, 2, 5];
        for c1 in 0..5 {
            for c2 in c1..=5 {
                assert_eq!(order_crossover(&a, &a, c1, c2), a.to_vec());
            }
        }
    }

    #[test]
    fn swap_and_flip_examples() {
        assert_eq!(swap_positions(&[1, 2, 3], 0, 2), vec![3, 2, 1]);
        assert_eq!(
            flip_position(&[Arm::One, Arm::One, Arm::Two], 1),
            vec![Arm::One, Arm::Two, Arm::Two]
        );
    }

    #[test]
    fn zero_rate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = [1, 2, 3, 4, 5, 6];
        let a = [Arm::One, Arm::Two, Arm::One];
        for _ in 0..100 {
            assert_eq!(swap_mutation(&x, 0.0, &mut rng), x.to_vec());
            assert_eq!(flip_mutation(&a, 0.0, &mut rng), a.to_vec());
        }
    }

    #[test]
    fn full_rate_changes_something() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = [1, 2, 3, 4];
        for _ in 0..50 {
            assert_ne!(swap_mutation(&x, 1.0, &mut rng), x.to_vec());
        }
    }
}
