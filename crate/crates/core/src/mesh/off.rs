//! ASCII OFF reading and writing.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{MeshError, SimplicialMesh};
use crate::geometry::Vec3;

/// Non-blank, comment-stripped lines with their 1-based line numbers.
struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_content(&mut self) -> Result<Option<(usize, String)>, MeshError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l.map_err(|e| MeshError::Parse {
                line: self.line,
                message: e.to_string(),
            })?;
            let content = match l.find('#') {
                Some(i) => &l[..i],
                None => &l[..],
            };
            if !content.trim().is_empty() {
                return Ok(Some((self.line, content.trim().to_string())));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String), MeshError> {
        self.next_content()?.ok_or_else(|| MeshError::Parse {
            line: self.line,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MeshError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parses an ASCII OFF stream into a validated mesh.
///
/// The counts may follow `OFF` on the header line or sit on their own line.
/// `#` starts a comment. Structural errors (bad indices, degenerate or
/// non-manifold faces) are reported against the face's source line.
pub fn load_mesh<R: BufRead>(source: R) -> Result<SimplicialMesh, MeshError> {
    let mut lines = Lines {
        inner: source.lines(),
        line: 0,
    };

    let (hline, header) = lines.expect("OFF header")?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("OFF") {
        return Err(parse_err(hline, "missing `OFF` header"));
    }
    let rest: Vec<&str> = toks.collect();
    let (cline, counts): (usize, Vec<String>) = if rest.is_empty() {
        let (l, s) = lines.expect("counts line")?;
        (l, s.split_whitespace().map(str::to_string).collect())
    } else {
        (hline, rest.iter().map(|s| s.to_string()).collect())
    };
    if counts.len() != 3 {
        return Err(parse_err(cline, "counts line must be `V F E`"));
    }
    let nv: usize = parse_num(&counts[0], cline, "vertex count")?;
    let nf: usize = parse_num(&counts[1], cline, "face count")?;
    let _: usize = parse_num(&counts[2], cline, "edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.expect("vertex line")?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(l, "vertex line must have 3 coordinates"));
        }
        let mut p = [0.0; 3];
        for (c, t) in p.iter_mut().zip(&toks) {
            *c = parse_num::<f64>(t, l, "coordinate")?;
            if !c.is_finite() {
                return Err(parse_err(l, "non-finite coordinate"));
            }
        }
        vertices.push(Vec3(p));
    }

    let mut triangles = Vec::with_capacity(nf);
    let mut face_lines = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.expect("face line")?;
        let toks: Vec<&str> = s.split_whitespace().collect();
        let k: usize = parse_num(toks[0], l, "face size")?;
        if k != 3 {
            return Err(parse_err(
                l,
                format!("only triangles are supported, got {k}-gon"),
            ));
        }
        if toks.len() != 4 {
            return Err(parse_err(l, "face line must be `3 i j k`"));
        }
        let mut tri = [0usize; 3];
        for (i, t) in tri.iter_mut().zip(&toks[1..]) {
            *i = parse_num(t, l, "vertex index")?;
        }
        triangles.push(tri);
        face_lines.push(l);
    }
    if let Some((l, _)) = lines.next_content()? {
        return Err(parse_err(l, "trailing content after last face"));
    }

    SimplicialMesh::new(vertices, triangles).map_err(|e| match e.triangle() {
        Some(t) => MeshError::AtLine {
            line: face_lines[t],
            source: Box::new(e),
        },
        None => e,
    })
}

/// Reads an OFF file from disk.
pub fn read_off_file(path: impl AsRef<Path>) -> Result<SimplicialMesh, MeshError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_mesh(std::io::BufReader::new(f))
}

/// Writes `mesh` as ASCII OFF with shortest round-trip coordinates.
pub fn write_off<W: Write>(mesh: &SimplicialMesh, mut out: W) -> std::io::Result<()> {
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", mesh.n_vertices(), mesh.n_triangles())?;
    for v in mesh.vertices() {
        writeln!(out, "{} {} {}", v.x(), v.y(), v.z())?;
    }
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
