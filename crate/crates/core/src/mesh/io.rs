//! Plain-text mesh format and legacy VTK export.
//!
//! Text format: a header `dim n_vertices n_elements`, one vertex per line
//! (`x y [z] boundary_flag`, 17 significant digits), then one element per
//! line as 0-based vertex indices.

use std::io::{BufRead, Write};

use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    let d = mesh.dim();
    writeln!(w, "{} {} {}", d, mesh.n_vertices(), mesh.n_elements())?;
    for (i, v) in mesh.raw_vertices().iter().enumerate() {
        for x in &v[..d] {
            write!(w, "{:.16e} ", x)?;
        }
        writeln!(w, "{}", u8::from(mesh.is_boundary(i)))?;
    }
    for el in mesh.elements() {
        let s: Vec<String> = el.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.ok_or_else(|| Error::Parse(format!("line {line}: missing field")))?
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: malformed field")))
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh> {
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut next = || -> Result<(usize, String)> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::Parse("unexpected end of file".into()))?;
        Ok((n, l?))
    };
    let (ln, header) = next()?;
    let mut it = header.split_whitespace();
    let dim: usize = parse(it.next(), ln)?;
    let nv: usize = parse(it.next(), ln)?;
    let ne: usize = parse(it.next(), ln)?;
    if dim != 2 && dim != 3 {
        return Err(Error::Parse(format!("unsupported dimension {dim}")));
    }
    let mut verts = Vec::with_capacity(nv);
    let mut bnd = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next()?;
        let mut it = l.split_whitespace();
        let mut c = [0.0; 3];
        for x in c.iter_mut().take(dim) {
            *x = parse(it.next(), ln)?;
        }
        let flag: u8 = parse(it.next(), ln)?;
        verts.push(Point::from_raw(dim, c));
        bnd.push(flag != 0);
    }
    let mut elems = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = next()?;
        let e: Vec<usize> = l
            .split_whitespace()
            .map(|t| parse(Some(t), ln))
            .collect::<Result<_>>()?;
        elems.push(e);
    }
    Mesh::new(dim, verts, elems, bnd)
}

/// Legacy ASCII VTK unstructured grid, with optional nodal scalar fields.
pub fn write_vtk<W: Write>(mesh: &Mesh, fields: &[(&str, &[f64])], mut w: W) -> Result<()> {
    let d = mesh.dim();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "graded-fem mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.raw_vertices() {
        writeln!(
            w,
            "{:.16e} {:.16e} {:.16e}",
            v[0],
            v[1],
            if d == 3 { v[2] } else { 0.0 }
        )?;
    }
    let ne = mesh.n_elements();
    writeln!(w, "CELLS {} {}", ne, ne * (d + 2))?;
    for el in mesh.elements() {
        let s: Vec<String> = el.iter().map(|i| i.to_string()).collect();
        writeln!(w, "{} {}", d + 1, s.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {ne}")?;
    let ty = if d == 2 { 5 } else { 10 };
    for _ in 0..ne {
        writeln!(w, "{ty}")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
        for (name, vals) in fields {
            if vals.len() != mesh.n_vertices() {
                return Err(Error::InvalidArgument(format!(
                    "field `{name}` has wrong length"
                )));
            }
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in *vals {
                writeln!(w, "{:.16e}", v)?;
            }
        }
    }
    Ok(())
}
