/// Number of episode workers: `NAVLOOP_THREADS` when set to a positive
/// integer, otherwise the machine's available parallelism, never more
/// than there are tasks.
pub fn worker_count(tasks: usize) -> usize {
    let from_env = std::env::var("NAVLOOP_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let n = from_env.unwrap_or_else(|| {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    });
    n.min(tasks.max(1))
}
