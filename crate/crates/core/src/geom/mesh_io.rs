use super::{TriMesh, Vec3};
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

/// On-disk mesh encodings supported by [`load_mesh`] / [`save_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
    PlyBinary,
}

impl MeshFormat {
    /// Format implied by a file extension; PLY defaults to binary.
    pub fn from_path(path: &Path) -> Result<MeshFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::PlyBinary),
            other => Err(Error::UnsupportedFeature {
                path: path.to_path_buf(),
                msg: format!("unknown mesh extension {other:?}; use .obj or .ply"),
            }),
        }
    }
}

/// Loads an OBJ or PLY (ASCII or binary little-endian) triangle mesh.
///
/// Polygon faces are fan-triangulated with a warning. Triangles degenerate
/// below area 1e-12 are dropped after parsing.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mesh = match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("obj") => parse_obj(&name, &bytes)?,
        Some("ply") => parse_ply(&name, &bytes)?,
        other => {
            return Err(Error::UnsupportedFeature {
                path: name.into(),
                msg: format!("unknown mesh extension {other:?}; use .obj or .ply"),
            })
        }
    };
    Ok(mesh.without_degenerate_triangles(1e-12))
}

/// Saves a triangle mesh in the given format.
pub fn save_mesh(mesh: &TriMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut out),
        MeshFormat::PlyAscii => write_ply_ascii(mesh, &mut out),
        MeshFormat::PlyBinary => write_ply_binary(mesh, &mut out),
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

fn parse_obj(path: &str, bytes: &[u8]) -> Result<TriMesh> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err(path, 0, format!("OBJ is not valid UTF-8: {e}")))?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut warned_polygon = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = |axis: &str| -> Result<f64> {
                    tokens
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, format!("vertex missing {axis}")))?
                        .parse::<f64>()
                        .map_err(|e| parse_err(path, lineno, format!("bad {axis} coordinate: {e}")))
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut indices: Vec<u32> = Vec::new();
                for token in tokens {
                    // "i", "i/t", "i/t/n", "i//n" all start with the vertex index.
                    let head = token.split('/').next().unwrap_or("");
                    let value: i64 = head
                        .parse()
                        .map_err(|e| parse_err(path, lineno, format!("bad face index {head:?}: {e}")))?;
                    let resolved = if value < 0 {
                        vertices.len() as i64 + value
                    } else {
                        value - 1
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(parse_err(
                            path,
                            lineno,
                            format!("face index {value} out of range for {} vertices", vertices.len()),
                        ));
                    }
                    indices.push(resolved as u32);
                }
                if indices.len() < 3 {
                    return Err(parse_err(path, lineno, "face with fewer than 3 vertices"));
                }
                if indices.len() > 3 && !warned_polygon {
                    log::warn!("{path}:{lineno}: fan-triangulating {}-gon faces", indices.len());
                    warned_polygon = true;
                }
                for k in 1..indices.len() - 1 {
                    triangles.push([indices[0], indices[k], indices[k + 1]]);
                }
            }
            // Normals, texcoords, groups, materials, smoothing: ignored.
            Some(_) => {}
            None => {}
        }
    }
    Ok(TriMesh::new(vertices, triangles))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PlyScalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl PlyScalar {
    fn parse(name: &str) -> Option<PlyScalar> {
        Some(match name {
            "char" | "int8" => PlyScalar::I8,
            "uchar" | "uint8" => PlyScalar::U8,
            "short" | "int16" => PlyScalar::I16,
            "ushort" | "uint16" => PlyScalar::U16,
            "int" | "int32" => PlyScalar::I32,
            "uint" | "uint32" => PlyScalar::U32,
            "float" | "float32" => PlyScalar::F32,
            "double" | "float64" => PlyScalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            PlyScalar::I8 | PlyScalar::U8 => 1,
            PlyScalar::I16 | PlyScalar::U16 => 2,
            PlyScalar::I32 | PlyScalar::U32 | PlyScalar::F32 => 4,
            PlyScalar::F64 => 8,
        }
    }

    fn read_f64(self, bytes: &[u8]) -> f64 {
        match self {
            PlyScalar::I8 => bytes[0] as i8 as f64,
            PlyScalar::U8 => bytes[0] as f64,
            PlyScalar::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyScalar::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            PlyScalar::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            PlyScalar::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum PlyProperty {
    Scalar { name: String, ty: PlyScalar },
    List { name: String, count: PlyScalar, item: PlyScalar },
}

#[derive(Debug, Clone)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

struct PlyHeader {
    ascii: bool,
    elements: Vec<PlyElement>,
    body_offset: usize,
    header_lines: usize,
}

fn parse_ply_header(path: &str, bytes: &[u8]) -> Result<PlyHeader> {
    let mut offset = 0;
    let mut lineno = 0;
    let mut lines: Vec<(usize, String)> = Vec::new();
    while offset < bytes.len() {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p)
            .ok_or_else(|| parse_err(path, lineno, "unterminated PLY header"))?;
        lineno += 1;
        let line = std::str::from_utf8(&bytes[offset..end])
            .map_err(|_| parse_err(path, lineno, "non-UTF-8 PLY header"))?
            .trim_end_matches('\r')
            .to_string();
        offset = end + 1;
        let done = line.trim() == "end_header";
        lines.push((lineno, line));
        if done {
            break;
        }
    }
    let mut it = lines.iter();
    match it.next() {
        Some((_, magic)) if magic.trim() == "ply" => {}
        _ => return Err(parse_err(path, 1, "missing 'ply' magic")),
    }
    let mut ascii = None;
    let mut elements: Vec<PlyElement> = Vec::new();
    for (lno, line) in it {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            Some("comment") | Some("obj_info") | None => {}
            Some("format") => match tokens.get(1).copied() {
                Some("ascii") => ascii = Some(true),
                Some("binary_little_endian") => ascii = Some(false),
                Some(other) => {
                    return Err(Error::UnsupportedFeature {
                        path: path.into(),
                        msg: format!("PLY format {other:?} (only ascii and binary_little_endian)"),
                    })
                }
                None => return Err(parse_err(path, *lno, "format line missing encoding")),
            },
            Some("element") => {
                let name = tokens
                    .get(1)
                    .ok_or_else(|| parse_err(path, *lno, "element missing name"))?;
                let count: usize = tokens
                    .get(2)
                    .ok_or_else(|| parse_err(path, *lno, "element missing count"))?
                    .parse()
                    .map_err(|e| parse_err(path, *lno, format!("bad element count: {e}")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, *lno, "property before any element"))?;
                if tokens.get(1).copied() == Some("list") {
                    let count = tokens
                        .get(2)
                        .and_then(|t| PlyScalar::parse(t))
                        .ok_or_else(|| parse_err(path, *lno, "bad list count type"))?;
                    let item = tokens
                        .get(3)
                        .and_then(|t| PlyScalar::parse(t))
                        .ok_or_else(|| parse_err(path, *lno, "bad list item type"))?;
                    let name = tokens
                        .get(4)
                        .ok_or_else(|| parse_err(path, *lno, "list property missing name"))?;
                    element.properties.push(PlyProperty::List {
                        name: name.to_string(),
                        count,
                        item,
                    });
                } else {
                    let ty = tokens
                        .get(1)
                        .and_then(|t| PlyScalar::parse(t))
                        .ok_or_else(|| parse_err(path, *lno, "bad property type"))?;
                    let name = tokens
                        .get(2)
                        .ok_or_else(|| parse_err(path, *lno, "property missing name"))?;
                    element.properties.push(PlyProperty::Scalar {
                        name: name.to_string(),
                        ty,
                    });
                }
            }
            Some("end_header") => break,
            Some(other) => return Err(parse_err(path, *lno, format!("unknown header keyword {other:?}"))),
        }
    }
    Ok(PlyHeader {
        ascii: ascii.ok_or_else(|| parse_err(path, 1, "PLY header has no format line"))?,
        elements,
        body_offset: offset,
        header_lines: lines.len(),
    })
}

fn push_ply_face(
    path: &str,
    triangles: &mut Vec<[u32; 3]>,
    vertex_count: usize,
    indices: &[i64],
    lineno: usize,
    warned_polygon: &mut bool,
) -> Result<()> {
    if indices.len() < 3 {
        return Err(parse_err(path, lineno, "face with fewer than 3 vertices"));
    }
    let mut resolved = Vec::with_capacity(indices.len());
    for &v in indices {
        if v < 0 || v >= vertex_count as i64 {
            return Err(parse_err(
                path,
                lineno,
                format!("face index {v} out of range for {vertex_count} vertices"),
            ));
        }
        resolved.push(v as u32);
    }
    if resolved.len() > 3 && !*warned_polygon {
        log::warn!("{path}: fan-triangulating {}-gon faces", resolved.len());
        *warned_polygon = true;
    }
    for k in 1..resolved.len() - 1 {
        triangles.push([resolved[0], resolved[k], resolved[k + 1]]);
    }
    Ok(())
}

fn parse_ply(path: &str, bytes: &[u8]) -> Result<TriMesh> {
    let header = parse_ply_header(path, bytes)?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut warned_polygon = false;

    if header.ascii {
        let text = std::str::from_utf8(&bytes[header.body_offset..])
            .map_err(|_| parse_err(path, header.header_lines, "non-UTF-8 PLY body"))?;
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next_line = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(i, l)| (header.header_lines + i + 1, l))
                .ok_or_else(|| parse_err(path, 0, format!("unexpected end of file reading {what}")))
        };
        for element in &header.elements {
            for _ in 0..element.count {
                let (lineno, line) = next_line(&element.name)?;
                let mut tokens = line.split_whitespace();
                let mut take = |what: &str| -> Result<f64> {
                    tokens
                        .next()
                        .ok_or_else(|| parse_err(path, lineno, format!("missing {what}")))?
                        .parse::<f64>()
                        .map_err(|e| parse_err(path, lineno, format!("bad {what}: {e}")))
                };
                if element.name == "vertex" {
                    let (mut x, mut y, mut z) = (f64::NAN, f64::NAN, f64::NAN);
                    for prop in &element.properties {
                        match prop {
                            PlyProperty::Scalar { name, .. } => {
                                let v = take(name)?;
                                match name.as_str() {
                                    "x" => x = v,
                                    "y" => y = v,
                                    "z" => z = v,
                                    _ => {}
                                }
                            }
                            PlyProperty::List { name, .. } => {
                                let n = take(name)? as usize;
                                for _ in 0..n {
                                    take(name)?;
                                }
                            }
                        }
                    }
                    if x.is_nan() || y.is_nan() || z.is_nan() {
                        return Err(parse_err(path, lineno, "vertex element lacks x/y/z"));
                    }
                    vertices.push(Vec3::new(x, y, z));
                } else if element.name == "face" {
                    for prop in &element.properties {
                        match prop {
                            PlyProperty::List { name, .. }
                                if name == "vertex_indices" || name == "vertex_index" =>
                            {
                                let n = take("face index count")? as usize;
                                let mut indices = Vec::with_capacity(n);
                                for _ in 0..n {
                                    indices.push(take("face index")? as i64);
                                }
                                push_ply_face(
                                    path,
                                    &mut triangles,
                                    vertices.len(),
                                    &indices,
                                    lineno,
                                    &mut warned_polygon,
                                )?;
                            }
                            PlyProperty::List { name, .. } => {
                                let n = take(name)? as usize;
                                for _ in 0..n {
                                    take(name)?;
                                }
                            }
                            PlyProperty::Scalar { name, .. } => {
                                take(name)?;
                            }
                        }
                    }
                } else {
                    // Unknown element: consume and discard the line.
                }
            }
        }
    } else {
        let mut cursor = header.body_offset;
        let read_scalar = |cursor: &mut usize, ty: PlyScalar| -> Result<f64> {
            let end = *cursor + ty.size();
            if end > bytes.len() {
                return Err(parse_err(path, 0, format!("truncated PLY body at byte {cursor}")));
            }
            let v = ty.read_f64(&bytes[*cursor..end]);
            *cursor = end;
            Ok(v)
        };
        for element in &header.elements {
            for _ in 0..element.count {
                if element.name == "vertex" {
                    let (mut x, mut y, mut z) = (f64::NAN, f64::NAN, f64::NAN);
                    for prop in &element.properties {
                        match prop {
                            PlyProperty::Scalar { name, ty } => {
                                let v = read_scalar(&mut cursor, *ty)?;
                                match name.as_str() {
                                    "x" => x = v,
                                    "y" => y = v,
                                    "z" => z = v,
                                    _ => {}
                                }
                            }
                            PlyProperty::List { count, item, .. } => {
                                let n = read_scalar(&mut cursor, *count)? as usize;
                                for _ in 0..n {
                                    read_scalar(&mut cursor, *item)?;
                                }
                            }
                        }
                    }
                    if x.is_nan() || y.is_nan() || z.is_nan() {
                        return Err(parse_err(path, 0, "vertex element lacks x/y/z"));
                    }
                    vertices.push(Vec3::new(x, y, z));
                } else {
                    for prop in &element.properties {
                        match prop {
                            PlyProperty::List { name, count, item }
                                if element.name == "face"
                                    && (name == "vertex_indices" || name == "vertex_index") =>
                            {
                                let n = read_scalar(&mut cursor, *count)? as usize;
                                let mut indices = Vec::with_capacity(n);
                                for _ in 0..n {
                                    indices.push(read_scalar(&mut cursor, *item)? as i64);
                                }
                                push_ply_face(
                                    path,
                                    &mut triangles,
                                    vertices.len(),
                                    &indices,
                                    0,
                                    &mut warned_polygon,
                                )?;
                            }
                            PlyProperty::List { count, item, .. } => {
                                let n = read_scalar(&mut cursor, *count)? as usize;
                                for _ in 0..n {
                                    read_scalar(&mut cursor, *item)?;
                                }
                            }
                            PlyProperty::Scalar { ty, .. } => {
                                read_scalar(&mut cursor, *ty)?;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(TriMesh::new(vertices, triangles))
}

fn write_obj(mesh: &TriMesh, out: &mut Vec<u8>) {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
}

fn ply_header(mesh: &TriMesh, ascii: bool, out: &mut Vec<u8>) {
    let format = if ascii { "ascii" } else { "binary_little_endian" };
    let coord = if ascii { "double" } else { "float" };
    writeln!(out, "ply").unwrap();
    writeln!(out, "format {format} 1.0").unwrap();
    writeln!(out, "element vertex {}", mesh.vertices.len()).unwrap();
    writeln!(out, "property {coord} x").unwrap();
    writeln!(out, "property {coord} y").unwrap();
    writeln!(out, "property {coord} z").unwrap();
    writeln!(out, "element face {}", mesh.triangles.len()).unwrap();
    writeln!(out, "property list uchar uint vertex_indices").unwrap();
    writeln!(out, "end_header").unwrap();
}

fn write_ply_ascii(mesh: &TriMesh, out: &mut Vec<u8>) {
    ply_header(mesh, true, out);
    for v in &mesh.vertices {
        writeln!(out, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
}

fn write_ply_binary(mesh: &TriMesh, out: &mut Vec<u8>) {
    ply_header(mesh, false, out);
    for v in &mesh.vertices {
        out.extend_from_slice(&(v.x as f32).to_le_bytes());
        out.extend_from_slice(&(v.y as f32).to_le_bytes());
        out.extend_from_slice(&(v.z as f32).to_le_bytes());
    }
    for t in &mesh.triangles {
        out.push(3);
        for &i in t {
            out.extend_from_slice(&i.to_le_bytes());
        }
    }
}
