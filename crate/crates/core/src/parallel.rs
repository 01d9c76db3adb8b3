//! Per-point fan-out. `PARALEX_THREADS` caps the worker count; `0` runs serially.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "PARALEX_THREADS";

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Maps `f` over `points`, preserving order.
pub fn map_points<T, F>(points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    match thread_cap() {
        Some(0) => points.iter().map(|x| f(x)).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| points.par_iter().map(|x| f(x)).collect()),
            Err(_) => points.iter().map(|x| f(x)).collect(),
        },
        None => points.par_iter().map(|x| f(x)).collect(),
    }
}
