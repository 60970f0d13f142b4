//! Whitespace-separated `x y z label [r g b]` text clouds.

use std::io::Write;

use crate::cloud::{LabelMap, LabeledPointCloud, SemanticClass};
use crate::error::{Error, Result};
use crate::geom::Point3;

use super::ReadStats;

pub fn parse_xyz_label(text: &str, map: &LabelMap) -> Result<(LabeledPointCloud, ReadStats)> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut colors = Vec::new();
    let mut with_color = None;
    let mut stats = ReadStats::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = || format!("line {}", i + 1);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let has_rgb = match fields.len() {
            4 => false,
            7 => true,
            n => return Err(Error::parse(loc(), format!("expected 4 or 7 fields, got {n}"))),
        };
        if *with_color.get_or_insert(has_rgb) != has_rgb {
            return Err(Error::parse(loc(), "colour columns present on some lines only"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::parse(loc(), format!("'{s}': {e}")));
        let p = Point3::new(num(fields[0])?, num(fields[1])?, num(fields[2])?);
        if !p.is_finite() {
            return Err(Error::parse(loc(), "non-finite coordinate"));
        }
        let raw_label = num(fields[3])?;
        let class = if raw_label.fract() == 0.0 { map.lookup(raw_label as i64) } else { None };
        labels.push(class.unwrap_or_else(|| {
            stats.unknown_labels += 1;
            SemanticClass::Clutter
        }));
        points.push(p);
        if has_rgb {
            let mut rgb = [0u8; 3];
            for (k, f) in fields[4..7].iter().enumerate() {
                rgb[k] = f.parse().map_err(|_| Error::parse(loc(), format!("bad colour value '{f}'")))?;
            }
            colors.push(rgb);
        }
    }
    let cloud = LabeledPointCloud {
        points,
        labels,
        colors: with_color.unwrap_or(false).then_some(colors),
    };
    Ok((cloud, stats))
}

pub fn write_xyz_label<W: Write>(w: &mut W, cloud: &LabeledPointCloud) -> Result<()> {
    let mut buf = Vec::new();
    for (i, (p, l)) in cloud.points.iter().zip(&cloud.labels).enumerate() {
        let _ = write!(buf, "{} {} {} {}", p.x, p.y, p.z, l.code());
        if let Some(c) = &cloud.colors {
            let [r, g, b] = c[i];
            let _ = write!(buf, " {r} {g} {b}");
        }
        buf.push(b'\n');
    }
    w.write_all(&buf)?;
    Ok(())
}
