//! Colored partition maps: one dot per trajectory sample, colored by class.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Partition, Trajectory};

use super::write_bytes;

const GOLDEN_ANGLE_DEG: f64 = 137.507_764_050_037_86;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub point_radius_px: f64,
    pub width_px: f64,
    pub height_px: f64,
    pub margin_px: f64,
    /// Rotates the whole palette; 0 gives the default colors.
    pub palette_seed: u64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            point_radius_px: 2.0,
            width_px: 800.0,
            height_px: 800.0,
            margin_px: 20.0,
            palette_seed: 0,
        }
    }
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    [r, g, b].map(|v| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8)
}

/// Fill color of a class: hues step by the golden angle so neighbouring ids
/// get well separated colors; lightness alternates over three levels.
pub fn class_color(class_id: usize, palette_seed: u64) -> String {
    let offset = (palette_seed as f64 * 0.618_033_988_749_894_9).fract() * 360.0;
    let hue = (offset + class_id as f64 * GOLDEN_ANGLE_DEG).rem_euclid(360.0);
    let lightness = [0.45, 0.6, 0.35][class_id % 3];
    let [r, g, b] = hsl_to_rgb(hue, 0.75, lightness);
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn render_partition_svg_string(
    traj: &Trajectory,
    partition: &Partition,
    opts: &SvgOptions,
) -> Result<String> {
    if !partition.is_aligned_with(traj) {
        return Err(Error::InvalidConfig(
            "partition does not match the trajectory's samples".into(),
        ));
    }
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in traj.samples() {
        min_x = min_x.min(s.pose.x);
        max_x = max_x.max(s.pose.x);
        min_y = min_y.min(s.pose.y);
        max_y = max_y.max(s.pose.y);
    }
    let inner_w = (opts.width_px - 2.0 * opts.margin_px).max(1.0);
    let inner_h = (opts.height_px - 2.0 * opts.margin_px).max(1.0);
    let span = (max_x - min_x).max(max_y - min_y);
    let scale = if span > 0.0 { (inner_w.min(inner_h)) / span } else { 0.0 };
    let cx = (min_x + max_x) / 2.0;
    let cy = (min_y + max_y) / 2.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width_px,
        h = opts.height_px
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (s, &class) in traj.samples().iter().zip(partition.labels()) {
        // y axis flipped so the map reads north-up
        let px = opts.width_px / 2.0 + (s.pose.x - cx) * scale;
        let py = opts.height_px / 2.0 - (s.pose.y - cy) * scale;
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="{r}" fill="{fill}" data-class="{class}"/>"#,
            r = opts.point_radius_px,
            fill = class_color(class, opts.palette_seed)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_partition_svg(
    traj: &Trajectory,
    partition: &Partition,
    path: impl AsRef<Path>,
    opts: &SvgOptions,
) -> Result<()> {
    let svg = render_partition_svg_string(traj, partition, opts)?;
    write_bytes(path.as_ref(), svg.as_bytes())
}
