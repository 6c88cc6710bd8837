//! Order-preserving fan-out over contiguous chunks.

/// Applies `f` to every item using up to `threads` scoped workers; results
/// keep input order regardless of the thread count.
pub fn par_map<A: Sync, R: Send>(items: &[A], threads: usize, f: impl Fn(&A) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let size = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(size)
            .map(|chunk| scope.spawn(move || chunk.iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}
