use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use lru::LruCache;
use serde::Serialize;
use tokio::sync::Mutex as AsyncMutex;
use umbra_core::detect::StrokeSet;
use umbra_core::imgcore::{RasterImage, ShadowMask};
use umbra_core::ParamVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionState {
    Empty,
    Detected,
    Removed,
}

/// Removal settings that identify a cached result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemovalKey {
    pub strokes_revision: u64,
    pub color_correct: bool,
    pub params: ParamVector,
}

/// Encoded artifacts by kind name.
pub type EncodedArtifacts = Vec<(&'static str, Arc<Vec<u8>>)>;

#[derive(Debug)]
pub struct StoredRemoval {
    pub key: RemovalKey,
    pub artifacts: EncodedArtifacts,
}

#[derive(Debug)]
pub struct Session {
    pub image: Arc<RasterImage<f64>>,
    pub original_png: Arc<Vec<u8>>,
    pub strokes: StrokeSet,
    /// Bumped whenever strokes are accepted.
    pub strokes_revision: u64,
    /// Bumped on every change to any artifact; part of the ETag.
    pub version: u64,
    pub mask: Option<ShadowMask>,
    pub mask_png: Option<Arc<Vec<u8>>>,
    pub removal: Option<StoredRemoval>,
    pub created: Instant,
    pub updated: Instant,
}

impl Session {
    pub fn new(image: RasterImage<f64>, original_png: Vec<u8>) -> Self {
        let now = Instant::now();
        Self {
            image: Arc::new(image),
            original_png: Arc::new(original_png),
            strokes: StrokeSet::default(),
            strokes_revision: 0,
            version: 0,
            mask: None,
            mask_png: None,
            removal: None,
            created: now,
            updated: now,
        }
    }

    pub fn state(&self) -> SessionState {
        match (&self.mask, &self.removal) {
            (None, _) => SessionState::Empty,
            (Some(_), Some(r)) if r.key.strokes_revision == self.strokes_revision => {
                SessionState::Removed
            }
            (Some(_), _) => SessionState::Detected,
        }
    }

    /// The stored removal if it was computed from the current strokes.
    pub fn current_removal(&self) -> Option<&StoredRemoval> {
        self.removal
            .as_ref()
            .filter(|r| r.key.strokes_revision == self.strokes_revision)
    }

    pub fn touch(&mut self) {
        self.version += 1;
        self.updated = Instant::now();
    }
}

pub type SharedSession = Arc<AsyncMutex<Session>>;

struct Entry {
    session: SharedSession,
    last_used: Instant,
}

/// In-memory sessions with least-recently-used eviction at capacity and
/// eviction after an idle period.
pub struct SessionStore {
    inner: Mutex<LruCache<String, Entry>>,
    idle: Duration,
}

impl SessionStore {
    pub fn new(capacity: usize, idle: Duration) -> Self {
        let cap = NonZeroUsize::new(capacity.max(1)).expect("capacity is at least one");
        Self {
            inner: Mutex::new(LruCache::new(cap)),
            idle,
        }
    }

    fn sweep(cache: &mut LruCache<String, Entry>, idle: Duration) {
        let now = Instant::now();
        let expired: Vec<String> = cache
            .iter()
            .filter(|(_, e)| now.duration_since(e.last_used) > idle)
            .map(|(k, _)| k.clone())
            .collect();
        for k in expired {
            cache.pop(&k);
        }
    }

    pub fn insert(&self, id: String, session: Session) -> SharedSession {
        let shared = Arc::new(AsyncMutex::new(session));
        let mut cache = self.inner.lock().expect("session store lock");
        Self::sweep(&mut cache, self.idle);
        cache.push(
            id,
            Entry {
                session: shared.clone(),
                last_used: Instant::now(),
            },
        );
        shared
    }

    pub fn get(&self, id: &str) -> Option<SharedSession> {
        let mut cache = self.inner.lock().expect("session store lock");
        Self::sweep(&mut cache, self.idle);
        cache.get_mut(id).map(|e| {
            e.last_used = Instant::now();
            e.session.clone()
        })
    }

    pub fn remove(&self, id: &str) -> bool {
        self.inner
            .lock()
            .expect("session store lock")
            .pop(id)
            .is_some()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("session store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops idle sessions; called periodically by the server.
    pub fn evict_idle(&self) {
        let mut cache = self.inner.lock().expect("session store lock");
        Self::sweep(&mut cache, self.idle);
    }
}
