//! Atomic file output and the small text formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use acg_core::MultiGraph;
use anyhow::{Context, Result};
use serde::Serialize;
use tempfile::NamedTempFile;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, json_string(value)?.as_bytes())
}

/// `id,j,k` per node.
pub fn nodes_csv(g: &MultiGraph) -> String {
    let mut s = String::with_capacity(12 * g.nodes.len() + 8);
    s.push_str("id,j,k\n");
    for (i, t) in g.nodes.iter().enumerate() {
        s.push_str(&format!("{i},{},{}\n", t.j, t.k));
    }
    s
}

/// `edge_id  src  dst  k  j  self_loop` per edge, in wiring order.
pub fn edges_tsv(g: &MultiGraph) -> String {
    let mut s = String::with_capacity(24 * g.edges.len() + 40);
    s.push_str("edge_id\tsrc\tdst\tk\tj\tself_loop\n");
    for (i, e) in g.edges.iter().enumerate() {
        s.push_str(&format!(
            "{i}\t{}\t{}\t{}\t{}\t{}\n",
            e.src,
            e.dst,
            e.k,
            e.j,
            u8::from(e.is_self_loop())
        ));
    }
    s
}
