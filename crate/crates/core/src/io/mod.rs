//! On-disk formats: trajectory and partition CSVs, VPCF feature files, report
//! JSON, and SVG partition maps.
//!
//! Writers are byte-deterministic. Loaders reject structurally invalid input
//! rather than repairing it; the one exception is that trajectory rows are
//! re-sorted by timestamp.

mod features;
mod partition;
mod report;
mod svg;
mod trajectory;

pub use features::{decode_vpcf, encode_vpcf, load_features, write_features, VPCF_MAGIC, VPCF_VERSION};
pub use partition::{load_partition_csv, load_place_csv, write_partition_csv, write_place_csv};
pub(crate) use report::six_sig;
pub use report::{load_report_json, write_report_json, ReportConfig, RunReport};
pub use svg::{class_color, render_partition_svg, render_partition_svg_string, SvgOptions};
pub use trajectory::{load_trajectory_csv, write_trajectory_csv, TRAJECTORY_HEADER};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
