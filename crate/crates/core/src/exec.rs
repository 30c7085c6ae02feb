//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] dispatches to
//! rayon; without it every loop runs sequentially. Results never depend on the
//! policy: only independent work items are distributed and all reductions stay
//! sequential, so output is bitwise identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many elements pointwise maps are not worth splitting.
pub const POINTWISE_MIN_LEN: usize = 1 << 13;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this policy actually runs on the rayon pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map over independent work items.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fallible order-preserving map; the first error in index order wins.
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }

    /// Pointwise update of one array.
    pub fn for_each_mut<T, F>(self, xs: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && xs.len() >= POINTWISE_MIN_LEN {
            xs.par_iter_mut().with_min_len(POINTWISE_MIN_LEN / 4).for_each(f);
            return;
        }
        xs.iter_mut().for_each(f);
    }

    /// Fallible pointwise update of two arrays of equal length, element by element.
    pub fn try_zip_mut<T, E, F>(self, xs: &mut [T], ys: &mut [T], f: F) -> Result<(), E>
    where
        T: Send,
        E: Send,
        F: Fn(&mut T, &mut T) -> Result<(), E> + Sync + Send,
    {
        assert_eq!(xs.len(), ys.len());
        #[cfg(feature = "parallel")]
        if self.is_parallel() && xs.len() >= POINTWISE_MIN_LEN {
            return xs
                .par_iter_mut()
                .zip(ys.par_iter_mut())
                .with_min_len(POINTWISE_MIN_LEN / 4)
                .try_for_each(|(x, y)| f(x, y));
        }
        xs.iter_mut().zip(ys.iter_mut()).try_for_each(|(x, y)| f(x, y))
    }

    /// Evaluate two independent closures, concurrently when parallel.
    pub fn join<A, B, RA, RB>(self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return rayon::join(a, b);
        }
        (a(), b())
    }

    /// Run a closure inside a dedicated pool of `jobs` threads (no-op when sequential).
    pub fn install<R: Send>(self, jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            if let Some(jobs) = jobs {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
                    return pool.install(f);
                }
            }
        }
        let _ = jobs;
        f()
    }
}
