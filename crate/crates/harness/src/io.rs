//! File emission helpers: CSV tables, JSON documents, binary state
//! snapshots, content hashing, and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;

/// FNV-1a 64-bit content hash, hex-encoded. Stable across platforms and
/// toolchains, which is all the manifest needs.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Writes via a temporary file and rename so readers never observe a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp_write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Minimal CSV table with shortest-round-trip float formatting.
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }

    /// Parses a table previously written by [`Self::to_bytes`] (no quoting:
    /// the schemas here never emit commas inside cells).
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines.next()?.split(',').map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            rows.push(line.split(',').map(|s| s.to_string()).collect());
        }
        Some(Self { header, rows })
    }
}

/// Shortest round-trip decimal for a float cell.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Binary snapshot of a classical state pair. Layout (little endian):
/// magic "SKGWSNP1", u32 dimension, u64 grid size N, f64 box half-length,
/// f64 time, then N (re, im) f64 pairs for u followed by N pairs for z.
pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SKGWSNP1";

pub fn write_snapshot(
    path: &Path,
    dimension: u32,
    grid_size: u64,
    half_length: f64,
    time: f64,
    u: &[C64],
    z: &[C64],
) -> std::io::Result<()> {
    let mut bytes = Vec::with_capacity(8 + 4 + 8 + 16 + 32 * u.len());
    bytes.extend_from_slice(SNAPSHOT_MAGIC);
    bytes.extend_from_slice(&dimension.to_le_bytes());
    bytes.extend_from_slice(&grid_size.to_le_bytes());
    bytes.extend_from_slice(&half_length.to_le_bytes());
    bytes.extend_from_slice(&time.to_le_bytes());
    for field in [u, z] {
        for c in field {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    write_atomic(path, &bytes)
}

pub struct Snapshot {
    pub dimension: u32,
    pub grid_size: u64,
    pub half_length: f64,
    pub time: f64,
    pub u: Vec<C64>,
    pub z: Vec<C64>,
}

pub fn read_snapshot(path: &Path) -> std::io::Result<Snapshot> {
    let bytes = fs::read(path)?;
    let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string());
    if bytes.len() < 8 + 4 + 8 + 16 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file"));
    }
    let dimension = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let grid_size = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let half_length = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let time = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
    let n = grid_size as usize;
    if bytes.len() != 36 + 32 * n {
        return Err(bad("snapshot payload truncated"));
    }
    let read_field = |offset: usize| -> Vec<C64> {
        (0..n)
            .map(|i| {
                let base = offset + 16 * i;
                C64::new(
                    f64::from_le_bytes(bytes[base..base + 8].try_into().unwrap()),
                    f64::from_le_bytes(bytes[base + 8..base + 16].try_into().unwrap()),
                )
            })
            .collect()
    };
    let u = read_field(36);
    let z = read_field(36 + 16 * n);
    Ok(Snapshot { dimension, grid_size, half_length, time, u, z })
}

/// Collects every file under a run directory (one level; runs do not nest).
pub fn inventory(dir: &Path) -> std::io::Result<Vec<(PathBuf, String)>> {
    let mut entries = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            let bytes = fs::read(entry.path())?;
            entries.push((entry.path(), fnv1a_hex(&bytes)));
        }
    }
    entries.sort();
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push_row(vec![fmt_f64(1.5), fmt_f64(-0.25)]);
        t.push_row(vec![fmt_f64(1e-17), fmt_f64(3.0)]);
        let bytes = t.to_bytes();
        let back = CsvTable::parse(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.rows, t.rows);
    }

    #[test]
    fn empty_table_still_has_header() {
        let t = CsvTable::new(&["x", "y", "z"]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(text, "x,y,z\n");
        let back = CsvTable::parse(&text).unwrap();
        assert!(back.rows.is_empty());
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = std::env::temp_dir().join("skgw_snap_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.snp");
        let u = vec![C64::new(1.0, -2.0), C64::new(0.5, 0.25)];
        let z = vec![C64::new(0.0, 1.0), C64::new(-1.0, 0.0)];
        write_snapshot(&path, 1, 2, 16.0, 3.5, &u, &z).unwrap();
        let snap = read_snapshot(&path).unwrap();
        assert_eq!(snap.grid_size, 2);
        assert_eq!(snap.time, 3.5);
        assert_eq!(snap.u, u);
        assert_eq!(snap.z, z);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(fnv1a_hex(b"skgw"), fnv1a_hex(b"skgw"));
        assert_ne!(fnv1a_hex(b"skgw"), fnv1a_hex(b"skgv"));
    }
}
