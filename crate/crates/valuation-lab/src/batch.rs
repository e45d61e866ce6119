//! Batch mapping over independent inputs. The default build distributes the
//! work with rayon; disabling the `parallel` feature swaps in the sequential
//! loop with identical results, since every mapped function in this crate is
//! a pure function of its input.

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_batch<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_batch<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_batch_seq(items, f)
}

/// Sequential reference implementation, kept callable in every build so the
/// bench suite can compare the two directly.
pub fn map_batch_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..200).collect();
        let f = |x: &u64| x * x + 1;
        assert_eq!(map_batch(&items, f), map_batch_seq(&items, f));
    }

    #[test]
    fn preserves_input_order() {
        let items: Vec<i64> = (0..500).rev().collect();
        let out = map_batch(&items, |x| -x);
        let expect: Vec<i64> = (0..500).rev().map(|x| -x).collect();
        assert_eq!(out, expect);
    }
}
