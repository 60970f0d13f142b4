//! PLY point clouds with a per-vertex class label.

use std::io::Write;

use crate::cloud::{LabelMap, LabeledPointCloud, SemanticClass};
use crate::error::{Error, Result};
use crate::geom::Point3;

use super::ReadStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
    BinaryBigEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8], big: bool) -> f64 {
        macro_rules! num {
            ($t:ty, $n:expr) => {{
                let arr: [u8; $n] = b[..$n].try_into().unwrap();
                (if big { <$t>::from_be_bytes(arr) } else { <$t>::from_le_bytes(arr) }) as f64
            }};
        }
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => num!(i16, 2),
            Scalar::U16 => num!(u16, 2),
            Scalar::I32 => num!(i32, 4),
            Scalar::U32 => num!(u32, 4),
            Scalar::F32 => num!(f32, 4),
            Scalar::F64 => num!(f64, 8),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_offset: usize,
    body_line: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(format!("byte {pos}"), "unterminated PLY header"))?;
        let raw = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| Error::parse(format!("line {}", line_no + 1), "non-UTF-8 header"))?;
        let line = raw.trim_end_matches('\r').trim();
        pos += end + 1;
        line_no += 1;
        let loc = || format!("line {line_no}");
        let mut tok = line.split_whitespace();
        match tok.next() {
            _ if line_no == 1 => {
                if line != "ply" {
                    return Err(Error::UnsupportedFormat("missing 'ply' magic".into()));
                }
            }
            Some("format") => {
                encoding = Some(match tok.next() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLittleEndian,
                    Some("binary_big_endian") => PlyEncoding::BinaryBigEndian,
                    other => return Err(Error::UnsupportedFormat(format!("PLY format {other:?}"))),
                });
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| Error::parse(loc(), "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::parse(loc(), "element without valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(loc(), "property before any element"))?;
                let t = tok.next().ok_or_else(|| Error::parse(loc(), "property without type"))?;
                let prop = if t == "list" {
                    let count = tok.next().and_then(Scalar::parse);
                    let item = tok.next().and_then(Scalar::parse);
                    match (count, item) {
                        (Some(count), Some(item)) => Property::List { count, item },
                        _ => return Err(Error::parse(loc(), "bad list property types")),
                    }
                } else {
                    let ty = Scalar::parse(t).ok_or_else(|| Error::parse(loc(), format!("unknown type '{t}'")))?;
                    let name = tok.next().ok_or_else(|| Error::parse(loc(), "property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                el.props.push(prop);
            }
            Some("end_header") => break,
            Some(other) => return Err(Error::parse(loc(), format!("unexpected header keyword '{other}'"))),
        }
    }
    Ok(Header {
        encoding: encoding.ok_or_else(|| Error::parse("header", "missing format line"))?,
        elements,
        body_offset: pos,
        body_line: line_no,
    })
}

struct VertexLayout {
    xyz: [usize; 3],
    label: usize,
    rgb: Option<[usize; 3]>,
}

fn vertex_layout(el: &Element) -> Result<VertexLayout> {
    let find = |names: &[&str]| {
        el.props.iter().position(|p| match p {
            Property::Scalar { name, .. } => names.iter().any(|n| name.eq_ignore_ascii_case(n)),
            Property::List { .. } => false,
        })
    };
    let need = |n: &str| find(&[n]).ok_or_else(|| Error::parse("header", format!("vertex property '{n}' missing")));
    let xyz = [need("x")?, need("y")?, need("z")?];
    let label = find(&["label", "class", "scalar_label", "semantic"])
        .ok_or_else(|| Error::parse("header", "vertex label property missing"))?;
    let rgb = match (find(&["red", "r"]), find(&["green", "g"]), find(&["blue", "b"])) {
        (Some(r), Some(g), Some(b)) => Some([r, g, b]),
        _ => None,
    };
    Ok(VertexLayout { xyz, label, rgb })
}

struct Collector<'m> {
    map: &'m LabelMap,
    points: Vec<Point3>,
    labels: Vec<SemanticClass>,
    colors: Vec<[u8; 3]>,
    stats: ReadStats,
}

impl Collector<'_> {
    fn push(&mut self, values: &[f64], layout: &VertexLayout, loc: impl Fn() -> String) -> Result<()> {
        let p = Point3::new(values[layout.xyz[0]], values[layout.xyz[1]], values[layout.xyz[2]]);
        if !p.is_finite() {
            return Err(Error::parse(loc(), "non-finite coordinate"));
        }
        let raw = values[layout.label];
        let class = if raw.fract() == 0.0 { self.map.lookup(raw as i64) } else { None };
        let class = class.unwrap_or_else(|| {
            self.stats.unknown_labels += 1;
            SemanticClass::Clutter
        });
        self.points.push(p);
        self.labels.push(class);
        if let Some(rgb) = layout.rgb {
            self.colors.push(rgb.map(|i| values[i].clamp(0.0, 255.0) as u8));
        }
        Ok(())
    }
}

/// Reads a PLY file held in memory.
pub fn parse_ply(bytes: &[u8], map: &LabelMap) -> Result<(LabeledPointCloud, ReadStats)> {
    let header = parse_header(bytes)?;
    let vertex_idx = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| Error::parse("header", "no vertex element"))?;
    let layout = vertex_layout(&header.elements[vertex_idx])?;
    let n = header.elements[vertex_idx].count;
    let mut out = Collector {
        map,
        points: Vec::with_capacity(n),
        labels: Vec::with_capacity(n),
        colors: Vec::new(),
        stats: ReadStats::default(),
    };
    let body = &bytes[header.body_offset..];
    match header.encoding {
        PlyEncoding::Ascii => read_ascii(body, &header, vertex_idx, &layout, &mut out)?,
        PlyEncoding::BinaryLittleEndian => read_binary(body, &header, vertex_idx, &layout, false, &mut out)?,
        PlyEncoding::BinaryBigEndian => read_binary(body, &header, vertex_idx, &layout, true, &mut out)?,
    }
    let colors = (layout.rgb.is_some()).then_some(out.colors);
    let cloud = LabeledPointCloud {
        points: out.points,
        labels: out.labels,
        colors,
    };
    Ok((cloud, out.stats))
}

fn read_ascii(body: &[u8], header: &Header, vertex_idx: usize, layout: &VertexLayout, out: &mut Collector) -> Result<()> {
    let text = std::str::from_utf8(body).map_err(|_| Error::parse("body", "non-UTF-8 ASCII body"))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    for (ei, el) in header.elements.iter().enumerate() {
        for _ in 0..el.count {
            let (k, line) = lines
                .next()
                .ok_or_else(|| Error::parse(format!("line {}", header.body_line + 1), "unexpected end of file"))?;
            if ei != vertex_idx {
                continue;
            }
            let loc = || format!("line {}", header.body_line + k + 1);
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(loc(), e.to_string()))?;
            if values.len() < el.props.len() {
                return Err(Error::parse(loc(), format!("expected {} values, got {}", el.props.len(), values.len())));
            }
            out.push(&values, layout, loc)?;
        }
        if ei == vertex_idx {
            break;
        }
    }
    Ok(())
}

fn read_binary(
    body: &[u8],
    header: &Header,
    vertex_idx: usize,
    layout: &VertexLayout,
    big: bool,
    out: &mut Collector,
) -> Result<()> {
    let mut pos = 0usize;
    let truncated = |pos: usize| Error::parse(format!("byte {}", header.body_offset + pos), "unexpected end of file");
    let mut values = Vec::new();
    for (ei, el) in header.elements.iter().enumerate() {
        for _ in 0..el.count {
            values.clear();
            let start = pos;
            for prop in &el.props {
                match prop {
                    Property::Scalar { ty, .. } => {
                        let s = ty.size();
                        if pos + s > body.len() {
                            return Err(truncated(pos));
                        }
                        values.push(ty.read(&body[pos..], big));
                        pos += s;
                    }
                    Property::List { count, item } => {
                        if pos + count.size() > body.len() {
                            return Err(truncated(pos));
                        }
                        let n = count.read(&body[pos..], big);
                        pos += count.size();
                        if !(n >= 0.0) {
                            return Err(Error::parse(format!("byte {}", header.body_offset + pos), "negative list length"));
                        }
                        pos += n as usize * item.size();
                        if pos > body.len() {
                            return Err(truncated(pos));
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if ei == vertex_idx {
                out.push(&values, layout, || format!("byte {}", header.body_offset + start))?;
            }
        }
        if ei == vertex_idx {
            break;
        }
    }
    Ok(())
}

/// Writes the cloud with double coordinates, an int label and optional RGB.
pub fn write_ply<W: Write>(w: &mut W, cloud: &LabeledPointCloud, encoding: PlyEncoding) -> Result<()> {
    let fmt = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
        PlyEncoding::BinaryBigEndian => "binary_big_endian",
    };
    let mut head = format!(
        "ply\nformat {fmt} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nproperty int label\n",
        cloud.len()
    );
    if cloud.colors.is_some() {
        head.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    head.push_str("end_header\n");
    w.write_all(head.as_bytes())?;
    let big = encoding == PlyEncoding::BinaryBigEndian;
    let mut buf = Vec::with_capacity(cloud.len() * 31);
    for (i, (p, l)) in cloud.points.iter().zip(&cloud.labels).enumerate() {
        let rgb = cloud.colors.as_ref().map(|c| c[i]);
        if encoding == PlyEncoding::Ascii {
            let _ = write!(buf, "{} {} {} {}", p.x, p.y, p.z, l.code());
            if let Some([r, g, b]) = rgb {
                let _ = write!(buf, " {r} {g} {b}");
            }
            buf.push(b'\n');
        } else {
            for v in [p.x, p.y, p.z] {
                buf.extend_from_slice(&if big { v.to_be_bytes() } else { v.to_le_bytes() });
            }
            let code = l.code() as i32;
            buf.extend_from_slice(&if big { code.to_be_bytes() } else { code.to_le_bytes() });
            if let Some(rgb) = rgb {
                buf.extend_from_slice(&rgb);
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}
