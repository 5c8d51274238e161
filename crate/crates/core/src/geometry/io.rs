use std::io::{BufRead, Write};

use super::domain::Domain;
use super::function::{FeFunction, RadialProfile};
use super::mesh::Mesh;
use crate::{Error, Result};

/// Plain-text mesh format:
///
/// ```text
/// nodes <n> triangles <t> boundary <b>
/// x y flag        (n lines, flag 1 on the boundary)
/// i j k           (t lines, 0-based)
/// ```
pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    writeln!(
        out,
        "nodes {} triangles {} boundary {}",
        mesh.num_nodes(),
        mesh.num_triangles(),
        mesh.num_boundary_nodes()
    )?;
    for (x, &b) in mesh.nodes().iter().zip(mesh.boundary_flags()) {
        writeln!(out, "{:e} {:e} {}", x[0], x[1], b as u8)?;
    }
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Inverse of [`write_mesh`]. The domain is not stored in the file and must be supplied.
pub fn read_mesh<R: BufRead>(domain: Domain, input: R) -> Result<Mesh> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() < 4 || tok[0] != "nodes" || tok[2] != "triangles" {
        return Err(Error::Format(format!("bad header {header:?}")));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("count {s:?}: {e}")));
    let n = parse_count(tok[1])?;
    let t = parse_count(tok[3])?;
    let declared_boundary = match tok.get(4..6) {
        Some(["boundary", b]) => Some(parse_count(b)?),
        _ => None,
    };
    let mut nodes = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| Error::Format("truncated node block".into()))??;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Format(format!("node line {line:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}")));
        nodes.push([num(f[0])?, num(f[1])?]);
        flags.push(match f[2] {
            "0" => false,
            "1" => true,
            other => return Err(Error::Format(format!("boundary flag {other:?}"))),
        });
    }
    let mut triangles = Vec::with_capacity(t);
    for _ in 0..t {
        let line = lines.next().ok_or_else(|| Error::Format("truncated triangle block".into()))??;
        let f: Vec<usize> = line.split_whitespace().map(parse_count).collect::<Result<_>>()?;
        if f.len() != 3 {
            return Err(Error::Format(format!("triangle line {line:?}")));
        }
        triangles.push([f[0], f[1], f[2]]);
    }
    if let Some(b) = declared_boundary {
        let actual = flags.iter().filter(|f| **f).count();
        if b != actual {
            return Err(Error::Format(format!("header declares {b} boundary nodes, found {actual}")));
        }
    }
    Mesh::from_parts(domain, nodes, triangles, flags)
}

/// Nodal CSV with header `x,y,u`.
pub fn write_nodal_csv<W: Write>(u: &FeFunction, mut out: W) -> Result<()> {
    writeln!(out, "x,y,u")?;
    for (x, v) in u.mesh().nodes().iter().zip(u.values()) {
        writeln!(out, "{:e},{:e},{:e}", x[0], x[1], v)?;
    }
    Ok(())
}

/// Radial CSV with header `r,u`.
pub fn write_radial_csv<W: Write>(profile: &RadialProfile, mut out: W) -> Result<()> {
    writeln!(out, "r,u")?;
    for (r, v) in profile.radii().zip(profile.values()) {
        writeln!(out, "{r:e},{v:e}")?;
    }
    Ok(())
}
