//! Conforming triangulations of the unit square.
//!
//! Triangles are stored counter-clockwise. Local edge `i` of a triangle is the
//! edge opposite local vertex `i`, i.e. `(v[(i+1)%3], v[(i+2)%3])`, and
//! `neighbors[i]` is the triangle across that edge.

mod io;
mod patches;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Point, Result};

pub use io::{read_mesh, write_mesh};
pub use patches::{build_patches, build_patches_unchecked, patch_bounds, validate_patches, BoundaryPatch, PatchBounds};

/// Side ids of the unit square, counter-clockwise from the bottom.
pub const SIDE_BOTTOM: usize = 0;
pub const SIDE_RIGHT: usize = 1;
pub const SIDE_TOP: usize = 2;
pub const SIDE_LEFT: usize = 3;

/// Default patch length (in boundary edges).
pub const DEFAULT_EDGES_PER_PATCH: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    pub v: [usize; 3],
    pub neighbors: [Option<usize>; 3],
}

/// A mesh edge with its vertex pair sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    pub triangles: [usize; 2],
    /// `false` for boundary edges, in which case `triangles[1] == triangles[0]`.
    pub interior: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    /// Vertices in counter-clockwise order along the owning triangle.
    pub v: [usize; 2],
    pub triangle: usize,
    /// Local edge index inside `triangle`.
    pub local: usize,
    pub segment: usize,
    pub normal: [f64; 2],
    pub length: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshStats {
    pub h: f64,
    pub h_min: f64,
    pub shape_regularity: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub corner_elements: usize,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    on_boundary: Vec<bool>,
    vertex_triangles: Vec<Vec<usize>>,
    corner_elements: Vec<usize>,
    structured: Option<usize>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Side of the unit square an edge lies on, if any.
fn unit_square_side(a: Point, b: Point) -> Option<usize> {
    if a[1] == 0.0 && b[1] == 0.0 {
        Some(SIDE_BOTTOM)
    } else if a[0] == 1.0 && b[0] == 1.0 {
        Some(SIDE_RIGHT)
    } else if a[1] == 1.0 && b[1] == 1.0 {
        Some(SIDE_TOP)
    } else if a[0] == 0.0 && b[0] == 0.0 {
        Some(SIDE_LEFT)
    } else {
        None
    }
}

impl Mesh {
    /// Builds the topology from raw vertices and triangles.
    ///
    /// `segments` assigns a boundary segment id to each boundary edge, keyed by
    /// its (unordered) vertex pair. Triangles given clockwise are reoriented.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        segments: &[(usize, usize, usize)],
    ) -> Result<Self> {
        let seg_map: HashMap<(usize, usize), usize> = segments
            .iter()
            .map(|&(a, b, s)| ((a.min(b), a.max(b)), s))
            .collect();
        Self::build(vertices, triangles, |a, b, _, _| {
            seg_map.get(&(a.min(b), a.max(b))).copied()
        })
    }

    /// Like [`Mesh::from_parts`] but classifies boundary edges by the unit-square side they lie on.
    pub fn from_unit_square(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, |_, _, pa, pb| unit_square_side(pa, pb))
    }

    fn build(
        vertices: Vec<Point>,
        mut tris: Vec<[usize; 3]>,
        segment_of: impl Fn(usize, usize, Point, Point) -> Option<usize>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (k, t) in tris.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {k} references a missing vertex")));
            }
            let a = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if a == 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {k} has zero area")));
            }
            if a < 0.0 {
                t.swap(1, 2);
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = vec![[0usize; 3]; tris.len()];
        for (k, t) in tris.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                let key = (a.min(b), a.max(b));
                match edge_index.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.interior {
                            return Err(Error::InvalidMesh(format!(
                                "edge ({}, {}) shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        edge.triangles[1] = k;
                        edge.interior = true;
                        tri_edges[k][i] = e;
                    }
                    None => {
                        edge_index.insert(key, edges.len());
                        tri_edges[k][i] = edges.len();
                        edges.push(Edge { v: [key.0, key.1], triangles: [k, k], interior: false });
                    }
                }
            }
        }

        let mut triangles: Vec<Triangle> =
            tris.iter().map(|&v| Triangle { v, neighbors: [None; 3] }).collect();
        let mut boundary = Vec::new();
        let mut on_boundary = vec![false; nv];
        for (k, t) in tris.iter().enumerate() {
            for i in 0..3 {
                let e = &edges[tri_edges[k][i]];
                if e.interior {
                    let other = if e.triangles[0] == k { e.triangles[1] } else { e.triangles[0] };
                    triangles[k].neighbors[i] = Some(other);
                } else {
                    let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
                    let (pa, pb) = (vertices[a], vertices[b]);
                    let segment = segment_of(a, b, pa, pb).ok_or_else(|| {
                        Error::InvalidMesh(format!("boundary edge ({a}, {b}) has no segment id"))
                    })?;
                    let length = dist(pa, pb);
                    let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                    boundary.push(BoundaryEdge { v: [a, b], triangle: k, local: i, segment, normal, length });
                }
            }
        }

        let mut vertex_triangles = vec![Vec::new(); nv];
        for (k, t) in tris.iter().enumerate() {
            for &v in t {
                vertex_triangles[v].push(k);
            }
        }
        let corner_elements = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.iter().all(|&v| on_boundary[v]))
            .map(|(k, _)| k)
            .collect();

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            boundary,
            on_boundary,
            vertex_triangles,
            corner_elements,
            structured: None,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Global edge ids of the three local edges of triangle `k`.
    pub fn triangle_edges(&self, k: usize) -> [usize; 3] {
        self.tri_edges[k]
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    /// Triangles with all three vertices on the boundary.
    pub fn corner_elements(&self) -> &[usize] {
        &self.corner_elements
    }

    /// Number of cells per side for meshes produced by [`build_structured`] (and jittered copies).
    pub fn cells_per_side(&self) -> Option<usize> {
        self.structured
    }

    pub fn num_segments(&self) -> usize {
        self.boundary.iter().map(|e| e.segment + 1).max().unwrap_or(0)
    }

    pub fn coords(&self, k: usize) -> [Point; 3] {
        let v = self.triangles[k].v;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn area(&self, k: usize) -> f64 {
        let [a, b, c] = self.coords(k);
        signed_area(a, b, c)
    }

    /// Element diameter, i.e. the longest edge.
    pub fn diameter(&self, k: usize) -> f64 {
        let [a, b, c] = self.coords(k);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn inradius(&self, k: usize) -> f64 {
        let [a, b, c] = self.coords(k);
        2.0 * self.area(k) / (dist(a, b) + dist(b, c) + dist(c, a))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].v;
        dist(self.vertices[a], self.vertices[b])
    }

    pub fn stats(&self) -> MeshStats {
        let (mut h, mut h_min, mut reg) = (0.0f64, f64::INFINITY, 0.0f64);
        for k in 0..self.triangles.len() {
            let hk = self.diameter(k);
            h = h.max(hk);
            h_min = h_min.min(hk);
            reg = reg.max(hk / self.inradius(k));
        }
        MeshStats {
            h,
            h_min,
            shape_regularity: reg,
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            boundary_edges: self.boundary.len(),
            corner_elements: self.corner_elements.len(),
        }
    }

    /// Global mesh size `max_K h_K`.
    pub fn h(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.diameter(k)).fold(0.0, f64::max)
    }

    pub fn min_signed_area(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.area(k)).fold(f64::INFINITY, f64::min)
    }
}

/// Structured triangulation of the unit square with `n` cells per side, each
/// cell split along its `(i, j)–(i+1, j+1)` diagonal.
pub fn build_structured(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cells per side must be >= 2, got {n}")));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            tris.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            tris.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mut mesh = Mesh::from_unit_square(vertices, tris)?;
    mesh.structured = Some(n);
    Ok(mesh)
}

const JITTER_HALVINGS: usize = 30;

/// Moves interior vertices by a seeded random offset of length at most
/// `magnitude * h_min`, keeping connectivity and boundary vertices fixed.
///
/// A displacement that would invert an incident triangle is retried with half
/// the magnitude, at most `JITTER_HALVINGS` times.
pub fn jitter(mesh: &Mesh, magnitude: f64, seed: u64) -> Result<Mesh> {
    if !(0.0..=0.25).contains(&magnitude) {
        return Err(Error::InvalidArgument(format!("jitter magnitude {magnitude} outside [0, 0.25]")));
    }
    let mut out = mesh.clone();
    if magnitude == 0.0 {
        return Ok(out);
    }
    let radius = magnitude * mesh.stats().h_min;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in 0..out.vertices.len() {
        if out.on_boundary[v] {
            continue;
        }
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        let origin = out.vertices[v];
        let mut scale = 1.0;
        let mut placed = false;
        for _ in 0..=JITTER_HALVINGS {
            out.vertices[v] = [origin[0] + scale * r * theta.cos(), origin[1] + scale * r * theta.sin()];
            if out.vertex_triangles[v].iter().all(|&k| out.area(k) > 0.0) {
                placed = true;
                break;
            }
            scale *= 0.5;
        }
        if !placed {
            return Err(Error::InvalidMesh(format!(
                "could not displace vertex {v} without inverting a triangle"
            )));
        }
    }
    for e in out.boundary.iter_mut() {
        let (pa, pb) = (out.vertices[e.v[0]], out.vertices[e.v[1]]);
        e.length = dist(pa, pb);
    }
    Ok(out)
}

/// Default jitter for the perturbed mesh family, as a fraction of `h_min`.
pub const DEFAULT_JITTER: f64 = 0.2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    #[default]
    Structured,
    Jittered,
}

/// A reproducible family of unit-square meshes indexed by cells per side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshFamily {
    pub kind: MeshKind,
    pub jitter: f64,
    pub seed: u64,
}

impl MeshFamily {
    pub fn structured() -> Self {
        MeshFamily { kind: MeshKind::Structured, jitter: 0.0, seed: 0 }
    }

    pub fn jittered(seed: u64) -> Self {
        MeshFamily { kind: MeshKind::Jittered, jitter: DEFAULT_JITTER, seed }
    }

    pub fn build(&self, n: usize) -> Result<Mesh> {
        let m = build_structured(n)?;
        match self.kind {
            MeshKind::Structured => Ok(m),
            // the seed is mixed with n so that levels are not perturbed identically
            MeshKind::Jittered => jitter(&m, self.jitter, self.seed.wrapping_mul(1_000_003).wrapping_add(n as u64)),
        }
    }
}
