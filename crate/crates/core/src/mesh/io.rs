//! Plain-text mesh format.
//!
//! ```text
//! mesh3d <nv> <nt> <nbf>
//! v x y z            (nv lines)
//! t i0 i1 i2 i3 region   (nt lines)
//! f j0 j1 j2 btag    (nbf lines)
//! ```
//!
//! Ids are 0-based, fields whitespace-separated decimal.

use super::SimplicialMesh;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshFormat { line, message: message.into() }
}

/// Parses a mesh from its text representation.
pub fn read_mesh_str(text: &str) -> Result<SimplicialMesh> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or_else(|| format_err(1, "empty file"))?;
    let mut it = header.split_whitespace();
    if it.next() != Some("mesh3d") {
        return Err(format_err(ln + 1, "expected header 'mesh3d <nv> <nt> <nbf>'"));
    }
    let counts: Vec<usize> = it
        .map(|tok| tok.parse().map_err(|_| format_err(ln + 1, format!("bad count '{tok}'"))))
        .collect::<Result<_>>()?;
    if counts.len() != 3 {
        return Err(format_err(ln + 1, "expected three counts"));
    }
    let (nv, nt, nbf) = (counts[0], counts[1], counts[2]);

    let mut vertices = Vec::with_capacity(nv);
    let mut tets = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nbf);

    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or_else(|| format_err(0, "unexpected end of file"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some("v") {
            return Err(format_err(ln + 1, "expected vertex line 'v x y z'"));
        }
        let mut x = [0.0; 3];
        for c in &mut x {
            let tok = it.next().ok_or_else(|| format_err(ln + 1, "missing coordinate"))?;
            *c = tok.parse().map_err(|_| format_err(ln + 1, format!("bad coordinate '{tok}'")))?;
        }
        vertices.push(x);
    }
    for _ in 0..nt {
        let (ln, line) = lines.next().ok_or_else(|| format_err(0, "unexpected end of file"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some("t") {
            return Err(format_err(ln + 1, "expected tet line 't i0 i1 i2 i3 region'"));
        }
        let mut ids = [0usize; 4];
        for id in &mut ids {
            let tok = it.next().ok_or_else(|| format_err(ln + 1, "missing vertex id"))?;
            *id = tok.parse().map_err(|_| format_err(ln + 1, format!("bad vertex id '{tok}'")))?;
        }
        let tok = it.next().ok_or_else(|| format_err(ln + 1, "missing region tag"))?;
        let region =
            tok.parse().map_err(|_| format_err(ln + 1, format!("bad region tag '{tok}'")))?;
        tets.push((ids, region));
    }
    for _ in 0..nbf {
        let (ln, line) = lines.next().ok_or_else(|| format_err(0, "unexpected end of file"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some("f") {
            return Err(format_err(ln + 1, "expected face line 'f j0 j1 j2 btag'"));
        }
        let mut ids = [0usize; 3];
        for id in &mut ids {
            let tok = it.next().ok_or_else(|| format_err(ln + 1, "missing vertex id"))?;
            *id = tok.parse().map_err(|_| format_err(ln + 1, format!("bad vertex id '{tok}'")))?;
        }
        let tok = it.next().ok_or_else(|| format_err(ln + 1, "missing boundary tag"))?;
        let tag = tok.parse().map_err(|_| format_err(ln + 1, format!("bad boundary tag '{tok}'")))?;
        tags.push((ids, tag));
    }
    SimplicialMesh::new(vertices, tets, &tags)
}

/// Reads a mesh file from disk.
pub fn read_mesh(path: impl AsRef<Path>) -> Result<SimplicialMesh> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.as_ref().display())))?;
    read_mesh_str(&text)
}

/// Serializes a mesh to the text format (tagged boundary faces only).
pub fn write_mesh_string(mesh: &SimplicialMesh) -> String {
    let tagged: Vec<usize> = mesh.boundary_faces().filter(|&f| mesh.boundary_tag(f) != 0).collect();
    let mut out = String::new();
    writeln!(out, "mesh3d {} {} {}", mesh.vertex_count(), mesh.tet_count(), tagged.len()).unwrap();
    for v in 0..mesh.vertex_count() {
        let p = mesh.vertex(v);
        writeln!(out, "v {} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for t in 0..mesh.tet_count() {
        let ids = mesh.tet(t);
        writeln!(out, "t {} {} {} {} {}", ids[0], ids[1], ids[2], ids[3], mesh.region(t)).unwrap();
    }
    for f in tagged {
        let ids = mesh.face(f);
        writeln!(out, "f {} {} {} {}", ids[0], ids[1], ids[2], mesh.boundary_tag(f)).unwrap();
    }
    out
}

/// Writes a mesh file to disk.
pub fn write_mesh(mesh: &SimplicialMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), write_mesh_string(mesh))
        .map_err(|e| Error::Spec(format!("cannot write {}: {e}", path.as_ref().display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_mesh;

    #[test]
    fn round_trip_preserves_counts_and_volume() {
        let mesh = generate_box_mesh([1.0, 2.0, 0.5], [2, 2, 2]).unwrap();
        let text = write_mesh_string(&mesh);
        let back = read_mesh_str(&text).unwrap();
        assert_eq!(back.vertex_count(), mesh.vertex_count());
        assert_eq!(back.tet_count(), mesh.tet_count());
        assert!((back.total_volume() - mesh.total_volume()).abs() < 1e-12);
        let tags: Vec<i32> = back.boundary_faces().map(|f| back.boundary_tag(f)).collect();
        assert!(tags.iter().all(|&t| (1..=6).contains(&t)));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "mesh3d 1 0 0\nv 0 0";
        match read_mesh_str(bad) {
            Err(Error::MeshFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
        let bad = "mesh2d 1 1 0";
        assert!(matches!(read_mesh_str(bad), Err(Error::MeshFormat { line: 1, .. })));
    }
}
