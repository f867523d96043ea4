//! Line-oriented mesh text format:
//!
//! ```text
//! vertices N
//! x y            (N lines)
//! triangles M
//! i j k          (M lines, zero-based)
//! boundary B
//! v0 v1 segment  (B lines)
//! ```

use std::io::{BufRead, Write};

use super::Mesh;
use crate::{Error, Point, Result};

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "vertices {}", mesh.vertices().len())?;
    for p in mesh.vertices() {
        writeln!(w, "{:e} {:e}", p[0], p[1])?;
    }
    writeln!(w, "triangles {}", mesh.triangles().len())?;
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t.v[0], t.v[1], t.v[2])?;
    }
    writeln!(w, "boundary {}", mesh.boundary_edges().len())?;
    for b in mesh.boundary_edges() {
        writeln!(w, "{} {} {}", b.v[0], b.v[1], b.segment)?;
    }
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_tokens(&mut self) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let l = self
                .inner
                .next()
                .ok_or_else(|| Error::Parse { line: self.line, msg: "unexpected end of file".into() })??;
            let toks: Vec<String> = l.split_whitespace().map(str::to_owned).collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let t = self.next_tokens()?;
        if t.len() != 2 || t[0] != key {
            return Err(Error::Parse { line: self.line, msg: format!("expected `{key} <count>`") });
        }
        self.parse(&t[1])
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| Error::Parse { line: self.line, msg: format!("cannot parse `{s}`") })
    }

    fn row<T: std::str::FromStr + Copy + Default, const N: usize>(&mut self) -> Result<[T; N]> {
        let t = self.next_tokens()?;
        if t.len() != N {
            return Err(Error::Parse { line: self.line, msg: format!("expected {N} values, got {}", t.len()) });
        }
        let mut out = [T::default(); N];
        for (o, s) in out.iter_mut().zip(&t) {
            *o = self.parse(s)?;
        }
        Ok(out)
    }
}

pub fn read_mesh<R: BufRead>(r: R) -> Result<Mesh> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    let nv = lines.header("vertices")?;
    let vertices: Vec<Point> = (0..nv).map(|_| lines.row::<f64, 2>()).collect::<Result<_>>()?;
    let nt = lines.header("triangles")?;
    let tris: Vec<[usize; 3]> = (0..nt).map(|_| lines.row::<usize, 3>()).collect::<Result<_>>()?;
    let nb = lines.header("boundary")?;
    let segs: Vec<(usize, usize, usize)> = (0..nb)
        .map(|_| lines.row::<usize, 3>().map(|[a, b, s]| (a, b, s)))
        .collect::<Result<_>>()?;
    Mesh::from_parts(vertices, tris, &segs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, jitter};

    #[test]
    fn round_trip_preserves_geometry_and_segments() {
        let m = jitter(&build_structured(6).unwrap(), 0.2, 9).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_edges(), m.boundary_edges());
    }

    #[test]
    fn reports_bad_lines() {
        let text = "vertices 3\n0 0\n1 0\n0 x\ntriangles 1\n0 1 2\nboundary 0\n";
        match read_mesh(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_segment_is_an_error() {
        let text = "vertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\nboundary 2\n0 1 0\n1 2 1\n";
        assert!(matches!(read_mesh(text.as_bytes()), Err(Error::InvalidMesh(_))));
    }
}
