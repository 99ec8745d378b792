//! Snapshot, probe and manifest files.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use westervelt_core::mesh::SimplicialMesh;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("field has {got} values, mesh has {expected} vertices")]
    FieldLength { expected: usize, got: usize },
    #[error("probe record for step {step} has {got} values, expected {expected}")]
    RecordWidth {
        step: u64,
        expected: usize,
        got: usize,
    },
    #[error("{path}: line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Triangle surface with one scalar per point, as stored in a snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub points: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub pressure: Vec<f64>,
}

impl Snapshot {
    pub fn from_mesh(mesh: &SimplicialMesh, field: &[f64]) -> Result<Self, OutputError> {
        if field.len() != mesh.n_vertices() {
            return Err(OutputError::FieldLength {
                expected: mesh.n_vertices(),
                got: field.len(),
            });
        }
        Ok(Snapshot {
            points: mesh.vertices().iter().map(|v| v.0).collect(),
            triangles: mesh.triangles().to_vec(),
            pressure: field.to_vec(),
        })
    }

    /// Legacy ASCII VTK text.
    pub fn to_vtk(&self) -> String {
        let (np, nc) = (self.points.len(), self.triangles.len());
        let mut s = String::with_capacity(64 * (np + nc) + 256);
        s.push_str("# vtk DataFile Version 3.0\npressure\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {np} double");
        for [x, y, z] in &self.points {
            let _ = writeln!(s, "{x} {y} {z}");
        }
        let _ = writeln!(s, "CELLS {nc} {}", 4 * nc);
        for [a, b, c] in &self.triangles {
            let _ = writeln!(s, "3 {a} {b} {c}");
        }
        let _ = writeln!(s, "CELL_TYPES {nc}");
        for _ in 0..nc {
            s.push_str("5\n");
        }
        let _ = writeln!(s, "POINT_DATA {np}");
        s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
        for p in &self.pressure {
            let _ = writeln!(s, "{p:.8e}");
        }
        s
    }
}

/// Writes `field` on `mesh` as a legacy ASCII VTK unstructured grid.
pub fn write_snapshot(
    mesh: &SimplicialMesh,
    field: &[f64],
    path: &Path,
) -> Result<(), OutputError> {
    let snap = Snapshot::from_mesh(mesh, field)?;
    fs::write(path, snap.to_vtk()).map_err(io_err(path))
}

struct Tokens<R> {
    lines: std::io::Lines<R>,
    line: usize,
    path: PathBuf,
}

impl<R: BufRead> Tokens<R> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, OutputError> {
        Err(OutputError::Format {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        })
    }

    fn next_line(&mut self) -> Result<String, OutputError> {
        match self.lines.next() {
            Some(l) => {
                self.line += 1;
                l.map_err(io_err(&self.path))
            }
            None => self.fail("unexpected end of file"),
        }
    }

    fn fields(&mut self, n: usize) -> Result<Vec<String>, OutputError> {
        let l = self.next_line()?;
        let f: Vec<String> = l.split_whitespace().map(str::to_string).collect();
        if f.len() != n {
            return self.fail(format!("expected {n} fields, found {}", f.len()));
        }
        Ok(f)
    }

    fn keyword(&mut self, key: &str, args: usize) -> Result<Vec<String>, OutputError> {
        let f = self.fields(args + 1)?;
        if f[0] != key {
            return self.fail(format!("expected `{key}`, found `{}`", f[0]));
        }
        Ok(f[1..].to_vec())
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T, OutputError> {
        s.parse()
            .or_else(|_| self.fail(format!("invalid number `{s}`")))
    }
}

/// Reads a snapshot written by [`write_snapshot`], checking its structure.
pub fn read_snapshot(path: &Path) -> Result<Snapshot, OutputError> {
    let f = fs::File::open(path).map_err(io_err(path))?;
    let mut t = Tokens {
        lines: BufReader::new(f).lines(),
        line: 0,
        path: path.to_path_buf(),
    };
    if !t.next_line()?.starts_with("# vtk DataFile Version") {
        return t.fail("missing VTK signature");
    }
    t.next_line()?;
    if t.next_line()?.trim() != "ASCII" {
        return t.fail("only ASCII files are supported");
    }
    t.keyword("DATASET", 1).and_then(|a| {
        if a[0] == "UNSTRUCTURED_GRID" {
            Ok(())
        } else {
            t.fail("expected UNSTRUCTURED_GRID")
        }
    })?;

    let a = t.keyword("POINTS", 2)?;
    let np: usize = t.num(&a[0])?;
    let mut points = Vec::with_capacity(np);
    for _ in 0..np {
        let f = t.fields(3)?;
        points.push([t.num(&f[0])?, t.num(&f[1])?, t.num(&f[2])?]);
    }

    let a = t.keyword("CELLS", 2)?;
    let nc: usize = t.num(&a[0])?;
    if t.num::<usize>(&a[1])? != 4 * nc {
        return t.fail("cell list size does not match triangle cells");
    }
    let mut triangles = Vec::with_capacity(nc);
    for _ in 0..nc {
        let f = t.fields(4)?;
        if f[0] != "3" {
            return t.fail("only triangle cells are supported");
        }
        let tri = [t.num(&f[1])?, t.num(&f[2])?, t.num(&f[3])?];
        if tri.iter().any(|&i: &usize| i >= np) {
            return t.fail("cell references a missing point");
        }
        triangles.push(tri);
    }

    let a = t.keyword("CELL_TYPES", 1)?;
    if t.num::<usize>(&a[0])? != nc {
        return t.fail("CELL_TYPES count differs from CELLS");
    }
    for _ in 0..nc {
        if t.fields(1)?[0] != "5" {
            return t.fail("cell type must be 5 (triangle)");
        }
    }

    let a = t.keyword("POINT_DATA", 1)?;
    if t.num::<usize>(&a[0])? != np {
        return t.fail("POINT_DATA count differs from POINTS");
    }
    let a = t.keyword("SCALARS", 3)?;
    if a[0] != "pressure" || a[2] != "1" {
        return t.fail("expected a single `pressure` scalar");
    }
    t.keyword("LOOKUP_TABLE", 1)?;
    let mut pressure = Vec::with_capacity(np);
    for _ in 0..np {
        let f = t.fields(1)?;
        pressure.push(t.num(&f[0])?);
    }
    while let Some(l) = t.lines.next() {
        t.line += 1;
        if !l.map_err(io_err(path))?.trim().is_empty() {
            return t.fail("trailing content");
        }
    }
    Ok(Snapshot {
        points,
        triangles,
        pressure,
    })
}

/// Pressure at every probe after one step.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRecord {
    pub step: u64,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Writes probe records as CSV with header `step,time,p_0,...`.
///
/// Floats use the shortest representation that parses back to the same value.
pub fn write_probe(
    records: &[ProbeRecord],
    n_probes: usize,
    path: &Path,
) -> Result<(), OutputError> {
    if let Some(r) = records.iter().find(|r| r.values.len() != n_probes) {
        return Err(OutputError::RecordWidth {
            step: r.step,
            expected: n_probes,
            got: r.values.len(),
        });
    }
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend((0..n_probes).map(|i| format!("p_{i}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(n_probes + 2);
    for r in records {
        row.clear();
        row.push(r.step.to_string());
        row.push(r.time.to_string());
        row.extend(r.values.iter().map(f64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Ordered `key = value` lines followed by one `output = <file>` line per file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io_err(path))?);
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}").map_err(io_err(path))?;
        }
        for o in &self.outputs {
            let name = o.file_name().map(Path::new).unwrap_or(o);
            writeln!(f, "output = {}", name.display()).map_err(io_err(path))?;
        }
        f.flush().map_err(io_err(path))
    }

    /// Parses a manifest; output names are resolved against the manifest's directory.
    pub fn read(path: &Path) -> Result<Self, OutputError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            let Some((k, v)) = line.split_once(" = ") else {
                return Err(OutputError::Format {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected `key = value`".into(),
                });
            };
            if k == "output" {
                m.outputs.push(dir.join(v));
            } else {
                m.push(k, v);
            }
        }
        Ok(m)
    }
}
