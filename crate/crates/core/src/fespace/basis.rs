use crate::Point;

/// Affine element data: vertex coordinates, area and barycentric gradients.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub coords: [Point; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
    /// Longest edge.
    pub h: f64,
}

impl ElementGeometry {
    pub fn new(coords: [Point; 3]) -> Self {
        let [a, b, c] = coords;
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
        let mut grad_lambda = [[0.0; 2]; 3];
        for i in 0..3 {
            let p = coords[(i + 1) % 3];
            let q = coords[(i + 2) % 3];
            // inward normal of the opposite edge scaled by its length
            grad_lambda[i] = [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)];
        }
        let d = |p: Point, q: Point| (q[0] - p[0]).hypot(q[1] - p[1]);
        ElementGeometry { coords, area, grad_lambda, h: d(a, b).max(d(b, c)).max(d(c, a)) }
    }

    pub fn point(&self, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.coords;
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }
}

/// Local P2 edge dofs: `3 -> (0,1)`, `4 -> (1,2)`, `5 -> (2,0)`.
pub const P2_EDGE_VERTICES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Local P2 dof sitting on local edge `i` (the edge opposite vertex `i`).
pub fn p2_dof_of_local_edge(i: usize) -> usize {
    match i {
        0 => 4,
        1 => 5,
        _ => 3,
    }
}

/// Values, gradients and Laplacians of the local basis at one point.
#[derive(Clone, Debug, Default)]
pub struct ShapeValues {
    pub n: usize,
    pub val: [f64; 6],
    pub grad: [[f64; 2]; 6],
    pub lap: [f64; 6],
}

pub fn shape(order: usize, geom: &ElementGeometry, bary: [f64; 3]) -> ShapeValues {
    let g = &geom.grad_lambda;
    let mut s = ShapeValues::default();
    if order == 1 {
        s.n = 3;
        s.val[..3].copy_from_slice(&bary);
        s.grad[..3].copy_from_slice(g);
        return s;
    }
    s.n = 6;
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    for i in 0..3 {
        let l = bary[i];
        s.val[i] = l * (2.0 * l - 1.0);
        s.grad[i] = [(4.0 * l - 1.0) * g[i][0], (4.0 * l - 1.0) * g[i][1]];
        s.lap[i] = 4.0 * dot(g[i], g[i]);
    }
    for (k, &(i, j)) in P2_EDGE_VERTICES.iter().enumerate() {
        let (li, lj) = (bary[i], bary[j]);
        s.val[3 + k] = 4.0 * li * lj;
        s.grad[3 + k] = [4.0 * (lj * g[i][0] + li * g[j][0]), 4.0 * (lj * g[i][1] + li * g[j][1])];
        s.lap[3 + k] = 8.0 * dot(g[i], g[j]);
    }
    s
}

/// Barycentric coordinates of the local dof nodes.
pub fn node_barycentric(order: usize) -> Vec<[f64; 3]> {
    let mut n = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    if order == 2 {
        n.extend([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property_and_partition_of_unity() {
        let geom = ElementGeometry::new([[0.1, 0.2], [1.3, 0.1], [0.4, 0.9]]);
        for order in [1, 2] {
            let nodes = node_barycentric(order);
            for (j, &b) in nodes.iter().enumerate() {
                let s = shape(order, &geom, b);
                for i in 0..s.n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s.val[i] - expect).abs() < 1e-14);
                }
            }
            let s = shape(order, &geom, [0.2, 0.3, 0.5]);
            let sum: f64 = s.val[..s.n].iter().sum();
            let gsum = s.grad[..s.n].iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!((sum - 1.0).abs() < 1e-14);
            assert!(gsum[0].abs() < 1e-12 && gsum[1].abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let geom = ElementGeometry::new([[0.0, 0.0], [0.7, 0.2], [0.1, 0.8]]);
        // invert the affine map numerically through barycentric shifts
        let b0 = [0.3, 0.3, 0.4];
        let s0 = shape(2, &geom, b0);
        let step = 1e-6;
        for dir in 0..2 {
            let mut dx = [0.0; 2];
            dx[dir] = step;
            let db: Vec<f64> = (0..3).map(|i| geom.grad_lambda[i][0] * dx[0] + geom.grad_lambda[i][1] * dx[1]).collect();
            let bp = [b0[0] + db[0], b0[1] + db[1], b0[2] + db[2]];
            let bm = [b0[0] - db[0], b0[1] - db[1], b0[2] - db[2]];
            let (sp, sm) = (shape(2, &geom, bp), shape(2, &geom, bm));
            for i in 0..6 {
                let fd = (sp.val[i] - sm.val[i]) / (2.0 * step);
                assert!((fd - s0.grad[i][dir]).abs() < 1e-7);
            }
        }
    }
}
