//! Append-only JSON-lines cache of synthesized items.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use geoproof_core::synth::{Cache, SynthItem, SynthRecord};

/// Items are keyed by content; lines that do not parse are skipped on load.
#[derive(Debug)]
pub struct FileCache {
    path: PathBuf,
    items: Vec<SynthItem>,
    keys: BTreeSet<String>,
    skipped: usize,
}

impl FileCache {
    pub fn open(path: &Path) -> std::io::Result<FileCache> {
        let mut cache = FileCache { path: path.to_path_buf(), items: Vec::new(), keys: BTreeSet::new(), skipped: 0 };
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e),
        };
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let item = serde_json::from_str::<SynthRecord>(&line).ok().and_then(|r| SynthItem::from_record(&r).ok());
            match item {
                Some(item) if cache.keys.insert(item.content_key()) => cache.items.push(item),
                Some(_) => {}
                None => cache.skipped += 1,
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Lines dropped while loading.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

impl Cache for FileCache {
    fn items(&self) -> Vec<SynthItem> {
        self.items.clone()
    }

    fn append(&mut self, item: &SynthItem) -> Result<bool, String> {
        if !self.keys.insert(item.content_key()) {
            return Ok(false);
        }
        let mut line = serde_json::to_string(&item.record()).map_err(|e| e.to_string())?;
        line.push('\n');
        // One write per record on an append-mode handle, so concurrent
        // writers never interleave inside a line.
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| format!("{}: {e}", self.path.display()))?;
        f.write_all(line.as_bytes()).map_err(|e| format!("{}: {e}", self.path.display()))?;
        self.items.push(item.clone());
        Ok(true)
    }
}

/// Reads a JSON-lines dataset, failing on the first bad line.
pub fn read_items(path: &Path) -> Result<Vec<SynthItem>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let r: SynthRecord = serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1))?;
            SynthItem::from_record(&r).map_err(|e| format!("line {}: {e}", i + 1))
        })
        .collect()
}

pub fn write_items(out: &mut dyn Write, items: &[SynthItem]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, &item.record())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
