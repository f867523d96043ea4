use std::collections::{BTreeSet, HashMap};

use super::Mesh;
use crate::{Error, Result};

/// A run of consecutive boundary edges `F_j` on one straight side together with
/// the boundary elements `P_j` touching it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPatch {
    pub id: usize,
    pub segment: usize,
    /// Indices into [`Mesh::boundary_edges`], in path order.
    pub edges: Vec<usize>,
    /// Path vertices, `edges.len() + 1` of them.
    pub path: Vec<usize>,
    /// Vertices in the open face, i.e. the path without its two end points.
    pub interior_vertices: Vec<usize>,
    /// All triangles with a face or a vertex on the closed face (sorted).
    pub triangles: Vec<usize>,
    pub measure: f64,
}

/// Observed constants of `c1 h <= meas(F_j) <= c2 h`.
#[derive(Clone, Copy, Debug)]
pub struct PatchBounds {
    pub c1: f64,
    pub c2: f64,
}

/// Segment id, ordered boundary edges, and the vertex path along them.
type SegmentPath = (usize, Vec<usize>, Vec<usize>);

/// Orders the boundary edges of each segment into a path.
fn segment_paths(mesh: &Mesh) -> Result<Vec<SegmentPath>> {
    let mut by_segment: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_segments()];
    for (i, e) in mesh.boundary_edges().iter().enumerate() {
        by_segment[e.segment].push(i);
    }
    let mut out = Vec::new();
    for (s, edges) in by_segment.into_iter().enumerate() {
        if edges.is_empty() {
            continue;
        }
        let mut starts: HashMap<usize, usize> = HashMap::new();
        let mut ends: BTreeSet<usize> = BTreeSet::new();
        for &i in &edges {
            let [a, b] = mesh.boundary_edges()[i].v;
            starts.insert(a, i);
            ends.insert(b);
        }
        let first: Vec<usize> =
            edges.iter().map(|&i| mesh.boundary_edges()[i].v[0]).filter(|a| !ends.contains(a)).collect();
        if first.len() != 1 {
            return Err(Error::InvalidMesh(format!("boundary segment {s} is not a single open path")));
        }
        let mut path = vec![first[0]];
        let mut order = Vec::with_capacity(edges.len());
        let mut cur = first[0];
        while let Some(&i) = starts.get(&cur) {
            order.push(i);
            cur = mesh.boundary_edges()[i].v[1];
            path.push(cur);
            if order.len() > edges.len() {
                return Err(Error::InvalidMesh(format!("boundary segment {s} is closed")));
            }
        }
        if order.len() != edges.len() {
            return Err(Error::InvalidMesh(format!("boundary segment {s} is not connected")));
        }
        out.push((s, order, path));
    }
    Ok(out)
}

/// Splits every boundary side into consecutive runs of `edges_per_patch`
/// edges; the last run on a side absorbs the remainder.
pub fn build_patches(mesh: &Mesh, edges_per_patch: usize) -> Result<Vec<BoundaryPatch>> {
    if edges_per_patch < 5 {
        return Err(Error::InvalidArgument(format!(
            "edges_per_patch must be >= 5, got {edges_per_patch}"
        )));
    }
    for (segment, order, _) in segment_paths(mesh)? {
        if order.len() < 5 {
            return Err(Error::InvalidMesh(format!(
                "boundary segment {segment} has {} edges, at least 5 are required",
                order.len()
            )));
        }
    }
    build_patches_unchecked(mesh, edges_per_patch)
}

/// As [`build_patches`] without the minimum-length rule, so that patches violating
/// the patch conditions can be produced for [`validate_patches`] to flag.
pub fn build_patches_unchecked(mesh: &Mesh, edges_per_patch: usize) -> Result<Vec<BoundaryPatch>> {
    if edges_per_patch == 0 {
        return Err(Error::InvalidArgument("edges_per_patch must be positive".into()));
    }
    let mut patches = Vec::new();
    for (segment, order, path) in segment_paths(mesh)? {
        let runs = (order.len() / edges_per_patch).max(1);
        for r in 0..runs {
            let lo = r * edges_per_patch;
            let hi = if r + 1 == runs { order.len() } else { lo + edges_per_patch };
            patches.push(make_patch(mesh, patches.len(), segment, order[lo..hi].to_vec(), path[lo..=hi].to_vec()));
        }
    }
    Ok(patches)
}

pub(crate) fn make_patch(
    mesh: &Mesh,
    id: usize,
    segment: usize,
    edges: Vec<usize>,
    path: Vec<usize>,
) -> BoundaryPatch {
    let triangles: BTreeSet<usize> =
        path.iter().flat_map(|&v| mesh.vertex_triangles(v).iter().copied()).collect();
    let measure = edges.iter().map(|&i| mesh.boundary_edges()[i].length).sum();
    BoundaryPatch {
        id,
        segment,
        interior_vertices: path[1..path.len() - 1].to_vec(),
        edges,
        path,
        triangles: triangles.into_iter().collect(),
        measure,
    }
}

pub fn patch_bounds(mesh: &Mesh, patches: &[BoundaryPatch]) -> PatchBounds {
    let h = mesh.h();
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    for p in patches {
        c1 = c1.min(p.measure / h);
        c2 = c2.max(p.measure / h);
    }
    PatchBounds { c1, c2 }
}

/// Checks the patch conditions; returns one message per violation.
pub fn validate_patches(mesh: &Mesh, patches: &[BoundaryPatch]) -> std::result::Result<(), Vec<String>> {
    let mut problems = Vec::new();
    let mut covered = vec![0usize; mesh.boundary_edges().len()];
    for p in patches {
        if p.interior_vertices.len() < 4 {
            problems.push(format!(
                "patch {} has {} inner nodes (needs at least 4)",
                p.id,
                p.interior_vertices.len()
            ));
        }
        for &e in &p.edges {
            covered[e] += 1;
            if mesh.boundary_edges()[e].segment != p.segment {
                problems.push(format!("patch {} leaves its boundary segment", p.id));
            }
        }
        for w in p.path.windows(2) {
            let ok = p.edges.iter().any(|&e| {
                let v = mesh.boundary_edges()[e].v;
                (v[0] == w[0] && v[1] == w[1]) || (v[0] == w[1] && v[1] == w[0])
            });
            if !ok {
                problems.push(format!("patch {} path is not connected", p.id));
                break;
            }
        }
    }
    for (e, &c) in covered.iter().enumerate() {
        if c != 1 {
            problems.push(format!("boundary edge {e} covered {c} times"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}
