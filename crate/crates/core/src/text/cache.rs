use std::collections::HashMap;
use std::sync::RwLock;

use super::Embedder;
use crate::error::ProviderError;

/// Memoizes embeddings by text. Identical keys always carry identical values,
/// so concurrent writers racing on one key are harmless.
#[derive(Debug)]
pub struct CachedEmbedder<E> {
    inner: E,
    entries: RwLock<HashMap<String, Vec<f64>>>,
}

impl<E: Embedder> CachedEmbedder<E> {
    pub fn new(inner: E) -> Self {
        CachedEmbedder {
            inner,
            entries: RwLock::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Embedder> Embedder for CachedEmbedder<E> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        if let Some(v) = self.entries.read().unwrap().get(text) {
            return Ok(v.clone());
        }
        let v = self.inner.embed_raw(text)?;
        self.entries.write().unwrap().insert(text.to_string(), v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting(AtomicUsize);

    impl Embedder for Counting {
        fn name(&self) -> &str {
            "counting"
        }
        fn dimension(&self) -> usize {
            2
        }
        fn embed_raw(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(vec![text.len() as f64, 1.0])
        }
    }

    #[test]
    fn repeated_text_hits_cache() {
        let cache = CachedEmbedder::new(Counting(AtomicUsize::new(0)));
        let a = cache.embed_raw("abc").unwrap();
        let b = cache.embed_raw("abc").unwrap();
        cache.embed_raw("de").unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.inner().0.load(Ordering::SeqCst), 2);
        assert_eq!(cache.len(), 2);
    }
}
