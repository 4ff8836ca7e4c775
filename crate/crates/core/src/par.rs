//! Data-parallel helpers. With the `parallel` feature disabled every call
//! runs sequentially; results are always returned in input order.

/// How a batch of independent per-item computations is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually fans out in this build.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Maps then folds with an associative, commutative `merge`. The reduction
/// tree depends on scheduling, so `merge` must not be order-sensitive.
pub fn map_reduce<T, U, F, M>(exec: Execution, items: &[T], identity: impl Fn() -> U + Sync + Send, f: F, merge: M) -> U
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
    M: Fn(U, U) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).reduce(&identity, &merge)
        }
        _ => items.iter().map(f).fold(identity(), merge),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map(Execution::Sequential, &xs, |x| x * x);
        let par = map(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(seq, par);
        let total = map_reduce(Execution::Parallel, &xs, || 0u64, |x| *x, |a, b| a + b);
        assert_eq!(total, 499_500);
    }
}
