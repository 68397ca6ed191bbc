//! Multi-threaded drivers. Work is split into fixed chunks and the partial
//! results are merged with order-independent tie-breaks, so the output does
//! not depend on the number of workers.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nagatree_core::search::{
    exhaustive_from_parts, exhaustive_range, prufer_count, ExhaustivePartial, SearchResult,
};
use nagatree_core::tree::{distortion_rows, tree_metric, DistortionScan};
use nagatree_core::{DistortionReport, Error, MetricSpace, Result, WeightedTree};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "NAGATREE_THREADS";

const EXHAUSTIVE_CHUNK: u64 = 1 << 12;
const ROW_CHUNK: usize = 8;

/// `NAGATREE_THREADS` if set to a positive integer, else the available
/// parallelism.
pub fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t: &usize| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `job(k)` for `k in 0..chunks` on up to `threads` workers and returns
/// the results in chunk order.
fn run_chunks<T: Send>(chunks: usize, threads: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = threads.clamp(1, chunks.max(1));
    if workers == 1 {
        return (0..chunks).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..chunks).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= chunks {
                    break;
                }
                let out = job(k);
                slots.lock().expect("worker panicked")[k] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|s| s.expect("every chunk ran"))
        .collect()
}

/// Exhaustive minimum-distortion search split across `threads` workers.
pub fn exhaustive(x: &MetricSpace, symmetric: bool, threads: usize) -> Result<SearchResult> {
    let total = prufer_count(x.len());
    let chunks = total.div_ceil(EXHAUSTIVE_CHUNK).max(1);
    let chunks = usize::try_from(chunks).map_err(|_| Error::TooLarge {
        n: x.len(),
        max: nagatree_core::search::MAX_EXHAUSTIVE,
    })?;
    let parts: Vec<Result<ExhaustivePartial>> = run_chunks(chunks, threads, |k| {
        let lo = k as u64 * EXHAUSTIVE_CHUNK;
        exhaustive_range(x, lo..(lo + EXHAUSTIVE_CHUNK).min(total), symmetric)
    });
    exhaustive_from_parts(x, parts.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Exact distortion with the pair scan split by rows.
pub fn distortion(x: &MetricSpace, t: &WeightedTree, threads: usize) -> Result<DistortionReport> {
    if t.len() != x.len() {
        return Err(Error::NotASpanningTree("tree and space differ in size"));
    }
    let tm = tree_metric(t);
    let n = x.len();
    let chunks = n.div_ceil(ROW_CHUNK);
    let scans = run_chunks(chunks, threads, |k| {
        distortion_rows(x, &tm, k * ROW_CHUNK..((k + 1) * ROW_CHUNK).min(n))
    });
    Ok(scans
        .into_iter()
        .fold(DistortionScan::new(), DistortionScan::merge)
        .finish())
}
