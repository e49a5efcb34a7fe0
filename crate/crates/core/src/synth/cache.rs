//! Item caches consulted by the pipeline before generating.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::SynthItem;

/// Append-only store of synthesized items.
pub trait Cache {
    /// Every stored item, in insertion order.
    fn items(&self) -> Vec<SynthItem>;
    /// Stores `item` unless an item with the same content is present.
    /// Returns whether it was added.
    fn append(&mut self, item: &SynthItem) -> Result<bool, String>;
}

#[derive(Debug, Clone, Default)]
pub struct MemoryCache {
    items: Vec<SynthItem>,
    keys: BTreeSet<String>,
}

impl MemoryCache {
    pub fn new() -> MemoryCache {
        MemoryCache::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl Cache for MemoryCache {
    fn items(&self) -> Vec<SynthItem> {
        self.items.clone()
    }

    fn append(&mut self, item: &SynthItem) -> Result<bool, String> {
        if !self.keys.insert(item.content_key()) {
            return Ok(false);
        }
        self.items.push(item.clone());
        Ok(true)
    }
}
