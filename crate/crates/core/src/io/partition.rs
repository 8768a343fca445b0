use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Partition;

use super::write_bytes;

fn write_pairs(header: &str, rows: impl Iterator<Item = (u64, usize)>, path: &Path) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for (id, class) in rows {
        let _ = writeln!(out, "{id},{class}");
    }
    write_bytes(path, out.as_bytes())
}

fn read_pairs(path: &Path, header: [&str; 2]) -> Result<(Vec<u64>, Vec<usize>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let Some((_, first)) = lines.next() else {
        return Err(Error::EmptyFile { path: path.into() });
    };
    if first.split(',').map(str::trim).ne(header) {
        return Err(Error::parse(path, 1, format!("expected header {:?}", header.join(","))));
    }
    let mut ids = Vec::new();
    let mut classes = Vec::new();
    for (i, line) in lines {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(path, line_no, "expected 2 fields"));
        };
        ids.push(
            a.parse()
                .map_err(|e| Error::parse(path, line_no, format!("{} {a:?}: {e}", header[0])))?,
        );
        classes.push(
            b.parse()
                .map_err(|e| Error::parse(path, line_no, format!("{} {b:?}: {e}", header[1])))?,
        );
    }
    if ids.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Ok((ids, classes))
}

/// Writes `sample_id,class_id` rows in partition order.
pub fn write_partition_csv(partition: &Partition, path: impl AsRef<Path>) -> Result<()> {
    write_pairs(
        "sample_id,class_id",
        partition
            .sample_ids()
            .iter()
            .copied()
            .zip(partition.labels().iter().copied()),
        path.as_ref(),
    )
}

/// Reads a partition CSV. Class ids must be dense.
pub fn load_partition_csv(path: impl AsRef<Path>) -> Result<Partition> {
    let (ids, classes) = read_pairs(path.as_ref(), ["sample_id", "class_id"])?;
    Partition::new(ids, classes)
}

/// Writes `sample_id,place_id` rows for a generated world's true places.
pub fn write_place_csv(sample_ids: &[u64], places: &[usize], path: impl AsRef<Path>) -> Result<()> {
    write_pairs(
        "sample_id,place_id",
        sample_ids.iter().copied().zip(places.iter().copied()),
        path.as_ref(),
    )
}

pub fn load_place_csv(path: impl AsRef<Path>) -> Result<(Vec<u64>, Vec<usize>)> {
    read_pairs(path.as_ref(), ["sample_id", "place_id"])
}
