//! PLY reader for instance-annotated point clouds.
//!
//! Supports ASCII and binary little-endian files whose vertex element carries
//! the properties x, y, z, red, green, blue, instance_id, semantic_id (extra
//! properties are skipped). PLY has no label table, so instance labels are
//! synthesized as `object_<semantic_id>`; a label map applied later can turn
//! them into canonical names.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::IngestError;
use crate::scene::{PointRecord, ScenePointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<ScalarType> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn byte_len(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 | ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn read_le(self, bytes: &[u8]) -> f64 {
        match self {
            ScalarType::I8 => bytes[0] as i8 as f64,
            ScalarType::U8 => bytes[0] as f64,
            ScalarType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            ScalarType::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            ScalarType::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<(String, ScalarType)>,
}

const REQUIRED: [&str; 8] = ["x", "y", "z", "red", "green", "blue", "instance_id", "semantic_id"];

fn err(path: &Path, location: String, message: impl Into<String>) -> IngestError {
    IngestError::Parse {
        path: path.to_path_buf(),
        location,
        message: message.into(),
    }
}

pub(super) fn load(path: &Path) -> Result<ScenePointCloud, IngestError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;

    // Header is ASCII lines terminated by "end_header".
    let header_end = find_header_end(&bytes)
        .ok_or_else(|| err(path, "byte 0".into(), "missing end_header"))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|e| err(path, format!("byte {}", e.valid_up_to()), "header is not valid ASCII"))?;

    let mut lines = header.lines().enumerate();
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    match lines.next() {
        Some((_, magic)) if magic.trim() == "ply" => {}
        _ => return Err(err(path, "line 1".into(), "not a PLY file (missing magic)")),
    }
    for (line_no, line) in lines {
        let line = line.trim();
        let loc = || format!("line {}", line_no + 1);
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("obj_info") | None => {}
            Some("end_header") => break,
            Some("format") => {
                format = Some(match tokens.next() {
                    Some("ascii") => Format::Ascii,
                    Some("binary_little_endian") => Format::BinaryLittleEndian,
                    Some(other) => return Err(err(path, loc(), format!("unsupported format {other}"))),
                    None => return Err(err(path, loc(), "format line missing arguments")),
                });
            }
            Some("element") => {
                let name = tokens.next().ok_or_else(|| err(path, loc(), "element without name"))?;
                let count: usize = tokens
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(path, loc(), "element without count"))?;
                elements.push(Element { name: name.into(), count, properties: Vec::new() });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| err(path, loc(), "property before any element"))?;
                let type_name = tokens.next().ok_or_else(|| err(path, loc(), "property without type"))?;
                if type_name == "list" {
                    return Err(err(path, loc(), "list properties are not supported for vertices"));
                }
                let scalar = ScalarType::parse(type_name)
                    .ok_or_else(|| err(path, loc(), format!("unknown property type {type_name}")))?;
                let prop_name = tokens.next().ok_or_else(|| err(path, loc(), "property without name"))?;
                element.properties.push((prop_name.into(), scalar));
            }
            Some(other) => return Err(err(path, loc(), format!("unexpected header keyword {other}"))),
        }
    }
    let format = format.ok_or_else(|| err(path, "header".into(), "missing format line"))?;
    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| err(path, "header".into(), "missing vertex element"))?;
    if elements.first().map(|e| e.name.as_str()) != Some("vertex") {
        // Keeping this simple: vertices first is what every producer we ingest emits.
        return Err(err(path, "header".into(), "vertex element must come first"));
    }
    let mut slots = [usize::MAX; 8];
    for (idx, (name, _)) in vertex.properties.iter().enumerate() {
        if let Some(slot) = REQUIRED.iter().position(|r| r == name) {
            slots[slot] = idx;
        }
    }
    if let Some(missing) = REQUIRED.iter().enumerate().find(|(i, _)| slots[*i] == usize::MAX) {
        return Err(err(path, "header".into(), format!("vertex element lacks property {}", missing.1)));
    }

    let body = &bytes[header_end..];
    let rows = match format {
        Format::Ascii => read_ascii_rows(path, body, vertex)?,
        Format::BinaryLittleEndian => read_binary_rows(path, body, vertex, header_end)?,
    };

    let mut points = Vec::with_capacity(rows.len());
    let mut instances: BTreeMap<u32, String> = BTreeMap::new();
    for (row_no, row) in rows.iter().enumerate() {
        let get = |slot: usize| row[slots[slot]];
        let to_id = |v: f64, what: &str| -> Result<u32, IngestError> {
            if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                Err(err(path, format!("vertex {row_no}"), format!("{what} {v} is not a non-negative integer")))
            } else {
                Ok(v as u32)
            }
        };
        let instance_id = to_id(get(6), "instance_id")?;
        let semantic_id = to_id(get(7), "semantic_id")?;
        instances
            .entry(instance_id)
            .or_insert_with(|| format!("object_{semantic_id}"));
        points.push(PointRecord {
            x: get(0),
            y: get(1),
            z: get(2),
            r: get(3) as i32,
            g: get(4) as i32,
            b: get(5) as i32,
            instance_id,
            semantic_id,
        });
    }

    let scene_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scene")
        .to_string();
    Ok(ScenePointCloud {
        scene_id,
        source_dataset: "ply".into(),
        room_type: None,
        instances,
        points,
    })
}

/// Byte offset of the first body byte (after the end_header line).
fn find_header_end(bytes: &[u8]) -> Option<usize> {
    let needle = b"end_header";
    let pos = bytes.windows(needle.len()).position(|w| w == needle)?;
    let mut idx = pos + needle.len();
    // consume to end of line (\n or \r\n)
    while idx < bytes.len() && bytes[idx] != b'\n' {
        idx += 1;
    }
    (idx < bytes.len()).then_some(idx + 1)
}

fn read_ascii_rows(path: &Path, body: &[u8], vertex: &Element) -> Result<Vec<Vec<f64>>, IngestError> {
    let text = std::str::from_utf8(body)
        .map_err(|_| err(path, "body".into(), "ASCII body is not valid UTF-8"))?;
    let mut rows = Vec::with_capacity(vertex.count);
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    for _ in 0..vertex.count {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| err(path, "body".into(), format!("expected {} vertex rows", vertex.count)))?;
        let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let values = values.map_err(|e| err(path, format!("vertex line {}", line_no + 1), e.to_string()))?;
        if values.len() < vertex.properties.len() {
            return Err(err(
                path,
                format!("vertex line {}", line_no + 1),
                format!("expected {} values, found {}", vertex.properties.len(), values.len()),
            ));
        }
        rows.push(values);
    }
    Ok(rows)
}

fn read_binary_rows(
    path: &Path,
    body: &[u8],
    vertex: &Element,
    header_len: usize,
) -> Result<Vec<Vec<f64>>, IngestError> {
    let row_len: usize = vertex.properties.iter().map(|(_, t)| t.byte_len()).sum();
    let needed = row_len * vertex.count;
    if body.len() < needed {
        return Err(err(
            path,
            format!("byte {}", header_len + body.len()),
            format!("truncated body: need {needed} bytes for {} vertices", vertex.count),
        ));
    }
    let mut rows = Vec::with_capacity(vertex.count);
    let mut offset = 0;
    for _ in 0..vertex.count {
        let mut row = Vec::with_capacity(vertex.properties.len());
        for (_, scalar) in &vertex.properties {
            row.push(scalar.read_le(&body[offset..offset + scalar.byte_len()]));
            offset += scalar.byte_len();
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_scene, SceneFormat};
    use crate::scene::validate_scene;

    const ASCII_PLY: &str = "ply\n\
format ascii 1.0\n\
comment three points\n\
element vertex 3\n\
property float x\n\
property float y\n\
property float z\n\
property uchar red\n\
property uchar green\n\
property uchar blue\n\
property int instance_id\n\
property int semantic_id\n\
end_header\n\
0.0 0.0 0.0 255 0 0 0 0\n\
1.0 0.5 0.0 0 255 0 0 0\n\
2.0 2.0 1.0 0 0 255 1 3\n";

    #[test]
    fn reads_ascii_vertices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.ply");
        std::fs::write(&path, ASCII_PLY).unwrap();
        let scene = load_scene(&path, SceneFormat::Ply).unwrap();
        assert_eq!(scene.points.len(), 3);
        assert_eq!(scene.scene_id, "tri");
        assert_eq!(scene.instances[&0], "object_0");
        assert_eq!(scene.instances[&1], "object_3");
        assert_eq!(scene.points[2].b, 255);
        assert!(validate_scene(&scene).is_empty());
    }

    #[test]
    fn reads_binary_little_endian() {
        let header = "ply\n\
format binary_little_endian 1.0\n\
element vertex 2\n\
property double x\n\
property double y\n\
property double z\n\
property uchar red\n\
property uchar green\n\
property uchar blue\n\
property uint instance_id\n\
property uint semantic_id\n\
end_header\n";
        let mut bytes = header.as_bytes().to_vec();
        for (i, p) in [[0.25f64, 1.5, -2.0], [3.0, 4.0, 5.0]].iter().enumerate() {
            for v in p {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            bytes.extend_from_slice(&[10, 20, 30]);
            bytes.extend_from_slice(&(i as u32).to_le_bytes());
            bytes.extend_from_slice(&(i as u32).to_le_bytes());
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bin.ply");
        std::fs::write(&path, bytes).unwrap();
        let scene = load_scene(&path, SceneFormat::Ply).unwrap();
        assert_eq!(scene.points.len(), 2);
        assert_eq!(scene.points[0].x, 0.25);
        assert_eq!(scene.points[1].z, 5.0);
        assert_eq!(scene.points[1].instance_id, 1);
    }

    #[test]
    fn missing_property_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no_inst.ply");
        let text = ASCII_PLY.replace("property int instance_id\n", "");
        std::fs::write(&path, text).unwrap();
        let e = load_scene(&path, SceneFormat::Ply).unwrap_err();
        assert!(e.to_string().contains("instance_id"));
    }

    #[test]
    fn truncated_binary_reports_byte_offset() {
        let header = "ply\nformat binary_little_endian 1.0\nelement vertex 5\n\
property float x\nproperty float y\nproperty float z\n\
property uchar red\nproperty uchar green\nproperty uchar blue\n\
property uint instance_id\nproperty uint semantic_id\nend_header\n";
        let mut bytes = header.as_bytes().to_vec();
        bytes.extend_from_slice(&[0u8; 10]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.ply");
        std::fs::write(&path, bytes).unwrap();
        let e = load_scene(&path, SceneFormat::Ply).unwrap_err();
        match e {
            IngestError::Parse { location, .. } => assert!(location.starts_with("byte ")),
            other => panic!("expected parse error, got {other}"),
        }
    }
}
