use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Pose, Trajectory, TrajectorySample};

use super::write_bytes;

pub const TRAJECTORY_HEADER: [&str; 5] = ["sample_id", "timestamp_s", "x_m", "y_m", "heading_rad"];

/// Reads a five-column trajectory CSV (`sample_id,timestamp_s,x_m,y_m,heading_rad`
/// with that header). Rows are sorted by timestamp, ties by sample id, and
/// headings are wrapped into `[-π, π)`.
pub fn load_trajectory_csv(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyFile { path: path.into() });
    }
    if headers.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {:?}, found {:?}", TRAJECTORY_HEADER.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 5 {
            return Err(Error::parse(path, line, format!("expected 5 fields, found {}", record.len())));
        }
        let id: u64 = record[0]
            .parse()
            .map_err(|e| Error::parse(path, line, format!("sample_id {:?}: {e}", &record[0])))?;
        let mut nums = [0.0f64; 4];
        for (k, slot) in nums.iter_mut().enumerate() {
            let field = &record[k + 1];
            *slot = field
                .parse()
                .map_err(|e| Error::parse(path, line, format!("{} {field:?}: {e}", TRAJECTORY_HEADER[k + 1])))?;
            if !slot.is_finite() {
                return Err(Error::parse(path, line, format!("{} is not finite", TRAJECTORY_HEADER[k + 1])));
            }
        }
        let pose = Pose::new(nums[1], nums[2], nums[3]).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let sample = TrajectorySample::new(id, nums[0], pose).map_err(|e| Error::parse(path, line, e.to_string()))?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    Trajectory::new(samples, format!("planar local frame, loaded from {}", path.display()))
}

pub fn write_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let mut out = TRAJECTORY_HEADER.join(",");
    out.push('\n');
    for s in traj.samples() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.sample_id, s.timestamp, s.pose.x, s.pose.y, s.pose.heading
        );
    }
    write_bytes(path.as_ref(), out.as_bytes())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}
