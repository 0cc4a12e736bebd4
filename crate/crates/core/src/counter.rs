use std::sync::atomic::{AtomicU64, Ordering};

/// Count of single-frequency spectral-radius evaluations.
///
/// Shared by reference between concurrent frequency evaluations, so the
/// count is atomic. It only ever grows.
#[derive(Debug, Default)]
pub struct EvalCounter {
    count: AtomicU64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&self, evals: u64) {
        self.count.fetch_add(evals, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}
