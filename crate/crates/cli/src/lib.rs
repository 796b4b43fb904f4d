//! Benchmarks, coupling selection and report types behind the `reqisc` binary.

pub mod bench;
pub mod coupling;
pub mod report;

/// Runs `f` on a rayon pool capped by `REQISC_THREADS` when it is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("REQISC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    match cap {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool: {e}");
                f()
            }
        },
        None => f(),
    }
}
