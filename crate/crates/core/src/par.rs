//! Order-preserving fan-out over independent work items.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Splits `0..count` into consecutive chunks of `chunk` items, evaluates `f`
/// on each chunk with up to `workers` threads and returns the results in
/// chunk order. The result does not depend on `workers`.
pub(crate) fn map_chunks<T, F>(count: usize, chunk: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunk = chunk.max(1);
    let ranges: Vec<Range<usize>> = (0..count)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(count))
        .collect();
    let workers = workers.max(1).min(ranges.len());
    if workers <= 1 {
        return ranges.into_iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..ranges.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(r) = ranges.get(k) else { break };
                let out = f(r.clone());
                slots.lock().expect("worker panicked")[k] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|t| t.expect("every chunk evaluated"))
        .collect()
}
