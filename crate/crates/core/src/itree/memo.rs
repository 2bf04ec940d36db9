//! Per-invocation memo tables for the corecursive combinators.
//!
//! Each call to `bind`, `□`, `∥` or `\` owns one table that maps the
//! identities of its argument trees to the tree it produced for them. When a
//! combinator meets the same arguments again (because the input tree is
//! cyclic) it returns the earlier result, so the output is cyclic too.
//! Entries hold weak references only and are dropped once their trees die.

use std::any::Any;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, Weak};

use super::{Cell, ITree};

type AnyWeak = Weak<dyn Any + Send + Sync>;

/// Something whose identity can key a memo table.
pub(crate) trait MemoKey {
    fn memo_addr(&self) -> usize;
    fn memo_weak(&self) -> AnyWeak;
}

impl<R: Send + Sync + 'static> MemoKey for ITree<R> {
    fn memo_addr(&self) -> usize {
        self.addr()
    }

    fn memo_weak(&self) -> AnyWeak {
        let strong: Arc<dyn Any + Send + Sync> = self.cell().clone();
        Arc::downgrade(&strong)
    }
}

struct Entry<S> {
    inputs: Vec<AnyWeak>,
    output: Weak<Cell<S>>,
}

impl<S> Entry<S> {
    fn live(&self, key: &[usize]) -> bool {
        self.output.strong_count() > 0
            && self
                .inputs
                .iter()
                .zip(key)
                .all(|(w, &a)| w.upgrade().is_some_and(|s| Arc::as_ptr(&s) as *const () as usize == a))
    }
}

pub(crate) struct Memo<S> {
    table: Mutex<Table<S>>,
}

struct Table<S> {
    entries: HashMap<Vec<usize>, Entry<S>>,
    prune_at: usize,
}

const MIN_PRUNE: usize = 256;

impl<S: Send + Sync + 'static> Memo<S> {
    pub(crate) fn new() -> Self {
        Memo {
            table: Mutex::new(Table {
                entries: HashMap::new(),
                prune_at: MIN_PRUNE,
            }),
        }
    }

    fn key(keys: &[&dyn MemoKey]) -> Vec<usize> {
        keys.iter().map(|k| k.memo_addr()).collect()
    }

    pub(crate) fn lookup(&self, keys: &[&dyn MemoKey]) -> Option<ITree<S>> {
        let key = Self::key(keys);
        let table = self.table.lock().unwrap_or_else(|e| e.into_inner());
        let entry = table.entries.get(&key)?;
        if !entry.live(&key) {
            return None;
        }
        entry.output.upgrade().map(ITree::from_cell)
    }

    pub(crate) fn insert(&self, keys: &[&dyn MemoKey], out: &ITree<S>) {
        let key = Self::key(keys);
        let mut table = self.table.lock().unwrap_or_else(|e| e.into_inner());
        table.insert(key, keys, out);
    }

    /// Returns an existing result for `keys` other than `me`, or records `me`.
    pub(crate) fn lookup_or_insert(&self, keys: &[&dyn MemoKey], me: &ITree<S>) -> Option<ITree<S>> {
        let key = Self::key(keys);
        let mut table = self.table.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(entry) = table.entries.get(&key) {
            if entry.live(&key) {
                if let Some(out) = entry.output.upgrade() {
                    return (!Arc::ptr_eq(&out, me.cell())).then(|| ITree::from_cell(out));
                }
            }
        }
        table.insert(key, keys, me);
        None
    }
}

impl<S: Send + Sync + 'static> Table<S> {
    fn insert(&mut self, key: Vec<usize>, keys: &[&dyn MemoKey], out: &ITree<S>) {
        let entry = Entry {
            inputs: keys.iter().map(|k| k.memo_weak()).collect(),
            output: Arc::downgrade(out.cell()),
        };
        self.entries.insert(key, entry);
        if self.entries.len() >= self.prune_at {
            self.entries.retain(|k, e| e.live(k));
            self.prune_at = (self.entries.len() * 2).max(MIN_PRUNE);
        }
    }
}
