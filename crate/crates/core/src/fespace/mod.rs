//! Continuous Lagrange spaces of order 1 and 2 on a [`Mesh`].

mod basis;
mod export;
mod quadrature;

use std::sync::Arc;

use crate::mesh::Mesh;
use crate::{Error, Point, Result};

pub use basis::{node_barycentric, p2_dof_of_local_edge, shape, ElementGeometry, ShapeValues, P2_EDGE_VERTICES};
pub use export::{write_csv, write_vtk};
pub use quadrature::{quadrature_for, QuadraturePurpose, QuadratureRule};

/// Value, gradient and (elementwise) Laplacian of a function at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub grad: [f64; 2],
    pub lap: f64,
}

impl std::ops::Sub for Sample {
    type Output = Sample;
    fn sub(self, o: Sample) -> Sample {
        Sample {
            value: self.value - o.value,
            grad: [self.grad[0] - o.grad[0], self.grad[1] - o.grad[1]],
            lap: self.lap - o.lap,
        }
    }
}

#[derive(Debug)]
pub struct FeSpace {
    order: usize,
    mesh: Arc<Mesh>,
    elem_dofs: Vec<[usize; 6]>,
    dof_coords: Vec<Point>,
    boundary_dofs: Vec<(usize, usize)>,
    is_boundary: Vec<bool>,
    geometry: Vec<ElementGeometry>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: usize) -> Result<Arc<Self>> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!("polynomial order {order} not supported")));
        }
        let nv = mesh.vertices().len();
        let mut dof_coords: Vec<Point> = mesh.vertices().to_vec();
        // edge dofs numbered by sorted vertex pair
        let mut edge_dof = vec![usize::MAX; mesh.edges().len()];
        if order == 2 {
            let mut order_of: Vec<usize> = (0..mesh.edges().len()).collect();
            order_of.sort_by_key(|&e| mesh.edges()[e].v);
            for (rank, &e) in order_of.iter().enumerate() {
                edge_dof[e] = nv + rank;
            }
            dof_coords.resize(nv + mesh.edges().len(), [0.0, 0.0]);
            for (e, edge) in mesh.edges().iter().enumerate() {
                let (a, b) = (mesh.vertices()[edge.v[0]], mesh.vertices()[edge.v[1]]);
                dof_coords[edge_dof[e]] = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            }
        }
        let mut elem_dofs = Vec::with_capacity(mesh.triangles().len());
        for (k, t) in mesh.triangles().iter().enumerate() {
            let mut d = [0usize; 6];
            d[..3].copy_from_slice(&t.v);
            if order == 2 {
                let te = mesh.triangle_edges(k);
                for (i, &e) in te.iter().enumerate() {
                    d[p2_dof_of_local_edge(i)] = edge_dof[e];
                }
            }
            elem_dofs.push(d);
        }
        let mut is_boundary = vec![false; dof_coords.len()];
        let mut boundary_dofs = Vec::new();
        for b in mesh.boundary_edges() {
            let mut dofs = vec![b.v[0], b.v[1]];
            if order == 2 {
                dofs.push(elem_dofs[b.triangle][p2_dof_of_local_edge(b.local)]);
            }
            for d in dofs {
                if !is_boundary[d] {
                    is_boundary[d] = true;
                    boundary_dofs.push((d, b.segment));
                }
            }
        }
        boundary_dofs.sort_unstable();
        let geometry = (0..mesh.triangles().len()).map(|k| ElementGeometry::new(mesh.coords(k))).collect();
        Ok(Arc::new(FeSpace { order, mesh, elem_dofs, dof_coords, boundary_dofs, is_boundary, geometry }))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn ndofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn dofs_per_element(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    pub fn element_dofs(&self, k: usize) -> &[usize] {
        &self.elem_dofs[k][..self.dofs_per_element()]
    }

    pub fn dof_coords(&self) -> &[Point] {
        &self.dof_coords
    }

    /// Boundary dofs with the segment id of the first boundary edge they were found on.
    pub fn boundary_dofs(&self) -> &[(usize, usize)] {
        &self.boundary_dofs
    }

    pub fn is_boundary_dof(&self, d: usize) -> bool {
        self.is_boundary[d]
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn num_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn shape(&self, k: usize, bary: [f64; 3]) -> ShapeValues {
        shape(self.order, &self.geometry[k], bary)
    }

    /// Barycentric point on local edge `i` of element `k` at edge parameter `s`
    /// (`s = 0` at the first counter-clockwise vertex of the edge).
    pub fn edge_point(i: usize, s: f64) -> [f64; 3] {
        let mut b = [0.0; 3];
        b[(i + 1) % 3] = 1.0 - s;
        b[(i + 2) % 3] = s;
        b
    }
}

/// A coefficient vector bound to a space.
#[derive(Clone, Debug)]
pub struct FeFunction {
    space: Arc<FeSpace>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndofs() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {} does not match {} dofs",
                coeffs.len(),
                space.ndofs()
            )));
        }
        Ok(FeFunction { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.ndofs();
        FeFunction { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval(&self, k: usize, bary: [f64; 3]) -> Sample {
        let s = self.space.shape(k, bary);
        let dofs = self.space.element_dofs(k);
        let mut out = Sample::default();
        for i in 0..s.n {
            let c = self.coeffs[dofs[i]];
            out.value += c * s.val[i];
            out.grad[0] += c * s.grad[i][0];
            out.grad[1] += c * s.grad[i][1];
            out.lap += c * s.lap[i];
        }
        out
    }

    /// `self + alpha * other`; both must live on the same space.
    pub fn axpy(&self, alpha: f64, other: &FeFunction) -> FeFunction {
        assert!(Arc::ptr_eq(&self.space, &other.space), "functions on different spaces");
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + alpha * b).collect();
        FeFunction { space: self.space.clone(), coeffs }
    }

    /// Re-expresses a P1 function in a P2 space on the same mesh (or returns a copy for P1 targets).
    pub fn lift_to(&self, target: &Arc<FeSpace>) -> Result<FeFunction> {
        if !Arc::ptr_eq(self.space.mesh(), target.mesh()) {
            return Err(Error::InvalidArgument("lift requires the same mesh".into()));
        }
        if self.space.order() > target.order() {
            return Err(Error::InvalidArgument("cannot lift into a lower order space".into()));
        }
        let mut out = vec![0.0; target.ndofs()];
        for k in 0..target.num_elements() {
            let nodes = node_barycentric(target.order());
            for (i, &d) in target.element_dofs(k).iter().enumerate() {
                out[d] = self.eval(k, nodes[i]).value;
            }
        }
        FeFunction::new(target.clone(), out)
    }
}

/// Coefficients equal to `u` at the dof coordinates.
pub fn nodal_interpolate(space: &Arc<FeSpace>, u: impl Fn(Point) -> f64) -> FeFunction {
    let coeffs = space.dof_coords().iter().map(|&p| u(p)).collect();
    FeFunction { space: space.clone(), coeffs }
}
