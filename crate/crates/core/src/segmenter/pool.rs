use std::sync::Mutex;

use super::{FatalError, Segmenter, SegmenterAnswer, SegmenterError, SegmenterFactory, SegmenterQuery};

/// Lends segmenter instances to concurrent workers. Instances are created on
/// demand, so at most one exists per concurrently running worker; an instance
/// that hits a fatal error is dropped instead of being returned.
pub struct SegmenterPool<'a> {
    factory: &'a dyn SegmenterFactory,
    idle: Mutex<Vec<Box<dyn Segmenter>>>,
}

impl<'a> SegmenterPool<'a> {
    pub fn new(factory: &'a dyn SegmenterFactory) -> Self {
        Self {
            factory,
            idle: Mutex::new(Vec::new()),
        }
    }

    /// Runs `f` with an instance checked out of the pool.
    pub fn with<T, E>(&self, f: impl FnOnce(&mut dyn Segmenter) -> Result<T, E>) -> Result<T, E>
    where
        E: From<SegmenterError> + FatalError,
    {
        let taken = self.idle.lock().expect("pool lock").pop();
        let mut seg = match taken {
            Some(s) => s,
            None => self.factory.create()?,
        };
        let result = f(seg.as_mut());
        let fatal = matches!(&result, Err(e) if e.is_fatal());
        if !fatal {
            self.idle.lock().expect("pool lock").push(seg);
        }
        result
    }

    pub fn predict(&self, query: &SegmenterQuery) -> Result<SegmenterAnswer, SegmenterError> {
        self.with(|s| s.predict(query))
    }

    /// Number of idle instances.
    pub fn idle(&self) -> usize {
        self.idle.lock().expect("pool lock").len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmenter::{EmptySegmenter, SegmenterSpec};
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn reuses_instances() {
        let created = AtomicUsize::new(0);
        let factory = || -> Result<Box<dyn Segmenter>, SegmenterError> {
            created.fetch_add(1, Ordering::SeqCst);
            Ok(Box::new(EmptySegmenter))
        };
        let pool = SegmenterPool::new(&factory);
        for _ in 0..5 {
            pool.with(|s| Ok::<_, SegmenterError>(s.name().to_owned())).unwrap();
        }
        assert_eq!(created.load(Ordering::SeqCst), 1);
        assert_eq!(pool.idle(), 1);
    }

    #[test]
    fn drops_instances_after_fatal_errors() {
        let spec = SegmenterSpec::Empty;
        let pool = SegmenterPool::new(&spec);
        let r: Result<(), SegmenterError> = pool.with(|_| Err(SegmenterError::ChildExited("x".into())));
        assert!(r.is_err());
        assert_eq!(pool.idle(), 0);
        let r: Result<(), SegmenterError> = pool.with(|_| Err(SegmenterError::Malformed("x".into())));
        assert!(r.is_err());
        assert_eq!(pool.idle(), 1);
    }
}
