// SPDX-License-Identifier: Apache-2.0

//! Data-parallel helpers. With the `parallel` feature work items run on the
//! rayon pool; without it (or when `parallel` is false) they run in order.
//! Results never depend on the execution order.

/// Applies `f` to every item.
pub fn for_each_mut<T: Send>(items: &mut [T], parallel: bool, f: impl Fn(&mut T) + Sync + Send) {
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        items.par_iter_mut().for_each(f);
        return;
    }
    let _ = parallel;
    items.iter_mut().for_each(f);
}

/// Maps `f` over `items`, preserving order.
pub fn map<T: Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Whether this build can run work in parallel.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

/// Caps the number of worker threads. Only the first call has an effect;
/// returns whether the cap was applied.
pub fn set_jobs(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
