//! Exhaustive subset enumeration with an explicit evaluation budget.
//!
//! Subsets are visited in lexicographic order, in chunks that are evaluated in
//! parallel. Reductions are order-preserving, so results never depend on thread
//! scheduling.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CHUNK: usize = 4096;

/// Upper limit on the number of subsets (supports) an exhaustive routine may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_evaluations: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_evaluations: 1_000_000,
        }
    }
}

impl Budget {
    pub fn new(max_evaluations: u64) -> Self {
        Budget { max_evaluations }
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.max_evaluations as u128 {
            Err(Error::ExhaustiveLimitExceeded {
                required,
                budget: self.max_evaluations,
            })
        } else {
            Ok(())
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of subsets of `0..n` with sizes in `sizes`.
pub fn count_subsets(n: usize, sizes: impl IntoIterator<Item = usize>) -> u128 {
    sizes
        .into_iter()
        .fold(0u128, |acc, s| acc.saturating_add(binomial(n, s)))
}

fn chunks(n: usize, size: usize) -> impl Iterator<Item = Vec<Vec<usize>>> {
    let mut combos = (0..n).combinations(size);
    std::iter::from_fn(move || {
        let chunk: Vec<Vec<usize>> = combos.by_ref().take(CHUNK).collect();
        (!chunk.is_empty()).then_some(chunk)
    })
}

/// First `size`-subset of `0..n` in lexicographic order satisfying `pred`.
pub(crate) fn find_first<F>(n: usize, size: usize, pred: F) -> Option<Vec<usize>>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    for chunk in chunks(n, size) {
        if let Some(hit) = chunk.par_iter().find_first(|s| pred(s)) {
            return Some(hit.clone());
        }
    }
    None
}

/// Maps every `size`-subset and folds the results left to right.
/// `reduce` must be associative; it need not be commutative.
pub(crate) fn map_reduce<T, M, R>(n: usize, size: usize, map: M, reduce: R) -> Option<T>
where
    T: Send,
    M: Fn(&[usize]) -> T + Sync,
    R: Fn(T, T) -> T + Sync + Send,
{
    let mut acc: Option<T> = None;
    for chunk in chunks(n, size) {
        let part = chunk.par_iter().map(|s| map(s)).reduce_with(&reduce);
        acc = match (acc, part) {
            (Some(a), Some(p)) => Some(reduce(a, p)),
            (a, p) => a.or(p),
        };
    }
    acc
}

/// Same as [`map_reduce`] but the map may fail; the first error in subset
/// order wins.
pub(crate) fn try_map_reduce<T, M, R>(n: usize, size: usize, map: M, reduce: R) -> Result<Option<T>>
where
    T: Send,
    M: Fn(&[usize]) -> Result<T> + Sync,
    R: Fn(T, T) -> T + Sync + Send,
{
    map_reduce(n, size, map, |a, b| match (a, b) {
        (Ok(a), Ok(b)) => Ok(reduce(a, b)),
        (Err(e), _) | (_, Err(e)) => Err(e),
    })
    .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(49, 3), 18424);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(7, 0), 1);
        assert_eq!(binomial(300, 150), u128::MAX);
    }

    #[test]
    fn find_first_is_lexicographic() {
        // first pair summing to 7 among 0..10
        let hit = find_first(10, 2, |s| s[0] + s[1] == 7).unwrap();
        assert_eq!(hit, vec![0, 7]);
    }

    #[test]
    fn map_reduce_keeps_order_across_chunks() {
        let n = 20;
        let all = map_reduce(
            n,
            4,
            |s| vec![s.to_vec()],
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .unwrap();
        assert_eq!(all.len() as u128, binomial(n, 4));
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn budget_rejects_oversized_requests() {
        let b = Budget::new(10);
        assert!(b.check(10).is_ok());
        assert_eq!(
            b.check(11),
            Err(Error::ExhaustiveLimitExceeded {
                required: 11,
                budget: 10
            })
        );
    }
}
