/// Parallelism cap from the `MVSK_THREADS` environment variable.
///
/// Returns `None` when the variable is unset or unparsable; rayon's default
/// pool size applies then.
pub fn effective_threads() -> Option<usize> {
    std::env::var("MVSK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs `f` inside a rayon pool sized by [`effective_threads`].
///
/// All parallel work in this crate is order-independent per item and reduced
/// in a fixed order, so results are identical for any thread count.
pub fn run_with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match effective_threads() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
