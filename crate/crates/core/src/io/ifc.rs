//! IFC4 export as an ISO-10303-21 physical file, and a small line-level
//! reader of such files for structural checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Hobb;
use crate::model::{BimModel, ColumnShape};

const GUID_CHARS: &[u8; 64] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$";

/// 22-character IFC base-64 encoding of a 128-bit value.
pub fn ifc_guid(value: u128) -> String {
    let mut out = [0u8; 22];
    let mut v = value;
    for c in out.iter_mut().rev() {
        *c = GUID_CHARS[(v & 63) as usize];
        v >>= 6;
    }
    String::from_utf8(out.to_vec()).unwrap()
}

fn real(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        s + "."
    }
}

fn text(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

struct Writer {
    out: String,
    next: usize,
    rng: ChaCha8Rng,
}

impl Writer {
    fn add(&mut self, entity: &str, args: &str) -> usize {
        let id = self.next;
        self.next += 1;
        let _ = writeln!(self.out, "#{id}={entity}({args});");
        id
    }

    fn guid(&mut self) -> String {
        text(&ifc_guid(self.rng.random::<u128>()))
    }

    fn point(&mut self, x: f64, y: f64, z: f64) -> usize {
        self.add("IFCCARTESIANPOINT", &format!("({},{},{})", real(x), real(y), real(z)))
    }

    fn direction(&mut self, x: f64, y: f64, z: f64) -> usize {
        self.add("IFCDIRECTION", &format!("({},{},{})", real(x), real(y), real(z)))
    }
}

struct Shared {
    owner: usize,
    context: usize,
    z_dir: usize,
    profile_pos: usize,
    identity: usize,
}

/// Placement and swept-solid representation for one element.
fn element_geometry(
    w: &mut Writer,
    sh: &Shared,
    parent_placement: usize,
    origin: (f64, f64, f64),
    yaw: f64,
    profile: String,
    height: f64,
) -> (usize, usize) {
    let p = w.point(origin.0, origin.1, origin.2);
    let dir = w.direction(yaw.cos(), yaw.sin(), 0.0);
    let axis = w.add("IFCAXIS2PLACEMENT3D", &format!("#{p},#{},#{dir}", sh.z_dir));
    let placement = w.add("IFCLOCALPLACEMENT", &format!("#{parent_placement},#{axis}"));
    let prof = if profile.starts_with("IFCCIRCLE") {
        w.add("IFCCIRCLEPROFILEDEF", &profile["IFCCIRCLEPROFILEDEF".len()..])
    } else {
        w.add("IFCRECTANGLEPROFILEDEF", &profile["IFCRECTANGLEPROFILEDEF".len()..])
    };
    let solid = w.add(
        "IFCEXTRUDEDAREASOLID",
        &format!("#{prof},#{},#{},{}", sh.identity, sh.z_dir, real(height)),
    );
    let rep = w.add(
        "IFCSHAPEREPRESENTATION",
        &format!("#{},'Body','SweptSolid',(#{solid})", sh.context),
    );
    let pds = w.add("IFCPRODUCTDEFINITIONSHAPE", &format!("$,$,(#{rep})"));
    (placement, pds)
}

fn box_profile(sh: &Shared, b: &Hobb) -> String {
    format!(
        "IFCRECTANGLEPROFILEDEF.AREA.,$,#{},{},{}",
        sh.profile_pos,
        real(b.length),
        real(b.width)
    )
}

/// Serializes `model` as IFC4. Global ids are drawn from a generator seeded
/// with `seed`, so equal inputs give identical files.
pub fn export_ifc_string(model: &BimModel, seed: u64) -> String {
    let mut w = Writer {
        out: String::new(),
        next: 1,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let person = w.add("IFCPERSON", "$,$,'',$,$,$,$,$");
    let org = w.add("IFCORGANIZATION", "$,'bimrecon',$,$,$");
    let pao = w.add("IFCPERSONANDORGANIZATION", &format!("#{person},#{org},$"));
    let app = w.add("IFCAPPLICATION", &format!("#{org},'{}','bimrecon','bimrecon'", env!("CARGO_PKG_VERSION")));
    let owner = w.add("IFCOWNERHISTORY", &format!("#{pao},#{app},$,.ADDED.,$,$,$,0"));
    let len_unit = w.add("IFCSIUNIT", "*,.LENGTHUNIT.,$,.METRE.");
    let ang_unit = w.add("IFCSIUNIT", "*,.PLANEANGLEUNIT.,$,.RADIAN.");
    let units = w.add("IFCUNITASSIGNMENT", &format!("(#{len_unit},#{ang_unit})"));
    let origin = w.point(0.0, 0.0, 0.0);
    let z_dir = w.direction(0.0, 0.0, 1.0);
    let x_dir = w.direction(1.0, 0.0, 0.0);
    let identity = w.add("IFCAXIS2PLACEMENT3D", &format!("#{origin},#{z_dir},#{x_dir}"));
    let context = w.add(
        "IFCGEOMETRICREPRESENTATIONCONTEXT",
        &format!("$,'Model',3,1.E-05,#{identity},$"),
    );
    let origin2 = w.add("IFCCARTESIANPOINT", "(0.,0.)");
    let profile_pos = w.add("IFCAXIS2PLACEMENT2D", &format!("#{origin2},$"));
    let sh = Shared {
        owner,
        context,
        z_dir,
        profile_pos,
        identity,
    };

    let g = w.guid();
    let project = w.add(
        "IFCPROJECT",
        &format!("{g},#{owner},'Project',$,$,$,$,(#{context}),#{units}"),
    );
    let site_pl = w.add("IFCLOCALPLACEMENT", &format!("$,#{identity}"));
    let g = w.guid();
    let site = w.add(
        "IFCSITE",
        &format!("{g},#{owner},'Site',$,$,#{site_pl},$,$,.ELEMENT.,$,$,$,$,$"),
    );
    let bld_pl = w.add("IFCLOCALPLACEMENT", &format!("#{site_pl},#{identity}"));
    let g = w.guid();
    let building = w.add(
        "IFCBUILDING",
        &format!("{g},#{owner},'Building',$,$,#{bld_pl},$,$,.ELEMENT.,$,$,$"),
    );
    let g = w.guid();
    w.add("IFCRELAGGREGATES", &format!("{g},#{owner},$,$,#{project},(#{site})"));
    let g = w.guid();
    w.add("IFCRELAGGREGATES", &format!("{g},#{owner},$,$,#{site},(#{building})"));

    let mut storeys = Vec::new();
    for s in &model.storeys {
        let p = w.point(0.0, 0.0, s.floor_z);
        let axis = w.add("IFCAXIS2PLACEMENT3D", &format!("#{p},#{z_dir},#{x_dir}"));
        let pl = w.add("IFCLOCALPLACEMENT", &format!("#{bld_pl},#{axis}"));
        let g = w.guid();
        let id = w.add(
            "IFCBUILDINGSTOREY",
            &format!(
                "{g},#{owner},{},$,$,#{pl},$,$,.ELEMENT.,{}",
                text(&format!("Storey {}", s.index)),
                real(s.floor_z)
            ),
        );
        storeys.push((id, pl, s.floor_z, Vec::<usize>::new()));
    }
    if !storeys.is_empty() {
        let list: Vec<String> = storeys.iter().map(|s| format!("#{}", s.0)).collect();
        let g = w.guid();
        w.add(
            "IFCRELAGGREGATES",
            &format!("{g},#{owner},$,$,#{building},({})", list.join(",")),
        );
    }

    for wall in &model.walls {
        let Some(st) = storeys.get_mut(wall.storey) else { continue };
        let b = &wall.hobb;
        let (pl, pds) = element_geometry(
            &mut w,
            &sh,
            st.1,
            (b.center.x, b.center.y, b.z_min() - st.2),
            b.yaw,
            box_profile(&sh, b),
            b.height,
        );
        let g = w.guid();
        let id = w.add(
            "IFCWALL",
            &format!(
                "{g},#{},{},$,$,#{pl},#{pds},{},.NOTDEFINED.",
                sh.owner,
                text(&format!("Wall {}", wall.id)),
                text(&wall.id.to_string())
            ),
        );
        st.3.push(id);
    }
    for door in &model.doors {
        let Some(si) = model.door_storey(door) else { continue };
        let st = &mut storeys[si];
        let b = &door.hobb;
        let (pl, pds) = element_geometry(
            &mut w,
            &sh,
            st.1,
            (b.center.x, b.center.y, b.z_min() - st.2),
            b.yaw,
            box_profile(&sh, b),
            b.height,
        );
        let g = w.guid();
        let id = w.add(
            "IFCDOOR",
            &format!(
                "{g},#{},{},{},$,#{pl},#{pds},{},{},{},.DOOR.,$,$",
                sh.owner,
                text(&format!("Door {}", door.id)),
                text(&format!("in wall {}", door.parent_wall_id)),
                text(&door.id.to_string()),
                real(b.height),
                real(b.length)
            ),
        );
        st.3.push(id);
    }
    for col in &model.columns {
        let Some(st) = storeys.get_mut(col.storey) else { continue };
        let (origin, yaw, profile, height) = match &col.shape {
            ColumnShape::Rectangular(b) => ((b.center.x, b.center.y, b.z_min() - st.2), b.yaw, box_profile(&sh, b), b.height),
            ColumnShape::Round(c) => (
                (c.base_center.x, c.base_center.y, c.base_center.z - st.2),
                0.0,
                format!("IFCCIRCLEPROFILEDEF.AREA.,$,#{},{}", sh.profile_pos, real(c.radius)),
                c.height,
            ),
        };
        let (pl, pds) = element_geometry(&mut w, &sh, st.1, origin, yaw, profile, height);
        let g = w.guid();
        let id = w.add(
            "IFCCOLUMN",
            &format!(
                "{g},#{},{},$,$,#{pl},#{pds},{},.COLUMN.",
                sh.owner,
                text(&format!("Column {}", col.id)),
                text(&col.id.to_string())
            ),
        );
        st.3.push(id);
    }
    for (storey, _, _, elements) in &storeys {
        if elements.is_empty() {
            continue;
        }
        let list: Vec<String> = elements.iter().map(|e| format!("#{e}")).collect();
        let g = w.guid();
        w.add(
            "IFCRELCONTAINEDINSPATIALSTRUCTURE",
            &format!("{g},#{owner},$,$,({}),#{storey}", list.join(",")),
        );
    }

    let mut file = String::from("ISO-10303-21;\nHEADER;\n");
    file.push_str("FILE_DESCRIPTION(('ViewDefinition [DesignTransferView]'),'2;1');\n");
    file.push_str("FILE_NAME('model.ifc','1970-01-01T00:00:00',(''),(''),'bimrecon','bimrecon','');\n");
    file.push_str("FILE_SCHEMA(('IFC4'));\nENDSEC;\nDATA;\n");
    file.push_str(&w.out);
    file.push_str("ENDSEC;\nEND-ISO-10303-21;\n");
    file
}

/// Entity types, references and spatial relations recovered from an SPF file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpfSummary {
    pub schema: String,
    pub types: BTreeMap<u64, String>,
    pub counts: BTreeMap<String, usize>,
    /// Relating object → related objects, from IFCRELAGGREGATES.
    pub aggregates: BTreeMap<u64, Vec<u64>>,
    /// Storey → contained elements, from IFCRELCONTAINEDINSPATIALSTRUCTURE.
    pub contained: BTreeMap<u64, Vec<u64>>,
}

impl SpfSummary {
    pub fn count(&self, entity: &str) -> usize {
        self.counts.get(entity).copied().unwrap_or(0)
    }

    /// Every downward path of entity types through the aggregation relations,
    /// starting at each IFCPROJECT.
    pub fn aggregation_paths(&self) -> Vec<Vec<String>> {
        let mut paths = Vec::new();
        for (&id, ty) in &self.types {
            if ty == "IFCPROJECT" {
                self.walk(id, &mut vec![ty.clone()], &mut paths, 0);
            }
        }
        paths
    }

    fn walk(&self, id: u64, path: &mut Vec<String>, out: &mut Vec<Vec<String>>, depth: usize) {
        match self.aggregates.get(&id) {
            Some(children) if depth < 16 => {
                for c in children {
                    path.push(self.types.get(c).cloned().unwrap_or_default());
                    self.walk(*c, path, out, depth + 1);
                    path.pop();
                }
            }
            _ => out.push(path.clone()),
        }
    }

    /// Storeys reachable from the project through site and building.
    pub fn storeys_in_tree(&self) -> Vec<u64> {
        let of_type = |ids: &[u64], t: &str| -> Vec<u64> {
            ids.iter().copied().filter(|i| self.types.get(i).map(String::as_str) == Some(t)).collect()
        };
        let children = |ids: Vec<u64>| -> Vec<u64> {
            ids.iter().flat_map(|i| self.aggregates.get(i).cloned().unwrap_or_default()).collect()
        };
        let projects: Vec<u64> = self.types.iter().filter(|(_, t)| *t == "IFCPROJECT").map(|(i, _)| *i).collect();
        let sites = of_type(&children(projects), "IFCSITE");
        let buildings = of_type(&children(sites), "IFCBUILDING");
        of_type(&children(buildings), "IFCBUILDINGSTOREY")
    }
}

/// Top-level comma split that respects parentheses and quoted strings.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '\'' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            ',' if !quoted && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn refs(s: &str) -> Vec<u64> {
    let mut out = Vec::new();
    let mut quoted = false;
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'\'' => quoted = !quoted,
            b'#' if !quoted => {
                let j = b[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
                if let Ok(v) = s[i + 1..i + 1 + j].parse() {
                    out.push(v);
                }
                i += j;
            }
            _ => {}
        }
        i += 1;
    }
    out
}

/// Reads back a file written by [`export_ifc_string`] (one entity per line),
/// checking that every `#N` reference resolves.
pub fn parse_spf(text: &str) -> Result<SpfSummary> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ISO-10303-21;" => {}
        _ => return Err(Error::parse("line 1", "missing ISO-10303-21 magic")),
    }
    let mut summary = SpfSummary::default();
    let mut bodies: Vec<(usize, u64, String, String)> = Vec::new();
    let mut in_data = false;
    for (i, raw) in lines {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("FILE_SCHEMA((") {
            summary.schema = rest.trim_end_matches(");").trim_end_matches(')').trim_matches('\'').to_string();
        }
        if line == "DATA;" {
            in_data = true;
            continue;
        }
        if line == "ENDSEC;" {
            in_data = false;
            continue;
        }
        if !in_data || line.is_empty() {
            continue;
        }
        let loc = || format!("line {}", i + 1);
        let (id, rest) = line
            .strip_prefix('#')
            .and_then(|l| l.split_once('='))
            .ok_or_else(|| Error::parse(loc(), "expected '#N=ENTITY(...);'"))?;
        let id: u64 = id.parse().map_err(|_| Error::parse(loc(), "bad instance id"))?;
        let open = rest.find('(').ok_or_else(|| Error::parse(loc(), "missing argument list"))?;
        let body = rest[open + 1..]
            .strip_suffix(");")
            .ok_or_else(|| Error::parse(loc(), "entity not terminated by ');'"))?;
        let ty = rest[..open].trim().to_string();
        if summary.types.insert(id, ty.clone()).is_some() {
            return Err(Error::parse(loc(), format!("duplicate instance #{id}")));
        }
        *summary.counts.entry(ty.clone()).or_default() += 1;
        bodies.push((i + 1, id, ty, body.to_string()));
    }
    for (line, _, ty, body) in &bodies {
        if let Some(r) = refs(body).into_iter().find(|r| !summary.types.contains_key(r)) {
            return Err(Error::parse(format!("line {line}"), format!("dangling reference #{r}")));
        }
        let args = split_args(body);
        match ty.as_str() {
            "IFCRELAGGREGATES" if args.len() == 6 => {
                if let Some(&parent) = refs(args[4]).first() {
                    summary.aggregates.entry(parent).or_default().extend(refs(args[5]));
                }
            }
            "IFCRELCONTAINEDINSPATIALSTRUCTURE" if args.len() == 6 => {
                if let Some(&storey) = refs(args[5]).first() {
                    summary.contained.entry(storey).or_default().extend(refs(args[4]));
                }
            }
            _ => {}
        }
    }
    Ok(summary)
}
