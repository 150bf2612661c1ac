//! Sequential and data-parallel drivers for batch checks.
//!
//! With the `parallel` feature (on by default) batches spread over a rayon
//! pool; without it they run on one thread. Both modes report the
//! positionally first hit, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a batch runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        Execution::Parallel
    }

    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        Execution::Sequential
    }
}

/// Applies `work` to every item and returns the first hit in item order, or
/// `None`. `make_scratch` provides per-worker state.
pub(crate) fn first_hit<C, S, R, MS, W>(
    exec: Execution,
    items: &[C],
    make_scratch: MS,
    work: W,
) -> Option<R>
where
    C: Sync,
    R: Send,
    MS: Fn() -> S + Sync + Send,
    W: Fn(&mut S, &C) -> Option<R> + Sync + Send,
{
    match exec {
        Execution::Sequential => {
            let mut scratch = make_scratch();
            items.iter().find_map(|item| work(&mut scratch, item))
        }
        #[cfg(feature = "parallel")]
        Execution::Parallel => items
            .par_iter()
            .map_init(make_scratch, |scratch, item| work(scratch, item))
            .find_first(Option::is_some)
            .flatten(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes() -> Vec<Execution> {
        #[cfg(feature = "parallel")]
        return vec![Execution::Sequential, Execution::Parallel];
        #[cfg(not(feature = "parallel"))]
        return vec![Execution::Sequential];
    }

    #[test]
    fn reports_first_hit_in_item_order() {
        let items: Vec<usize> = (0..10_000).collect();
        for exec in modes() {
            let hit = first_hit(exec, &items, || (), |_, &i| (i % 977 == 5).then_some(i));
            assert_eq!(hit, Some(982));
        }
    }

    #[test]
    fn no_hit_yields_none() {
        let items: Vec<usize> = (0..100).collect();
        for exec in modes() {
            assert_eq!(first_hit(exec, &items, || (), |_, _| None::<usize>), None);
        }
    }
}
