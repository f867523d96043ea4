/// Symmetric quadrature on the reference triangle (area 1/2) or Gauss rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Barycentric coordinates for area rules; `[s, 1 - s, 0]` for edge rules.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraturePurpose {
    Area,
    Edge,
}

impl QuadratureRule {
    /// 12-point rule of degree 6.
    pub fn triangle_degree6() -> Self {
        const ORBITS3: [(f64, f64, f64); 2] = [
            (0.116786275726379, 0.501426509658179, 0.249286745170910),
            (0.050844906370207, 0.873821971016996, 0.063089014491502),
        ];
        const W6: f64 = 0.082851075618374;
        const ABC: [f64; 3] = [0.053145049844817, 0.310352451033784, 0.636502499121399];
        let mut points = Vec::with_capacity(12);
        let mut weights = Vec::with_capacity(12);
        for (w, a, b) in ORBITS3 {
            for p in [[a, b, b], [b, a, b], [b, b, a]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        let [a, b, c] = ABC;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            points.push(p);
            weights.push(0.5 * W6);
        }
        QuadratureRule { points, weights, degree: 6 }
    }

    /// 4-point Gauss–Legendre rule on `[0, 1]` (degree 7).
    pub fn edge_gauss4() -> Self {
        let x = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        let w = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let points = x.iter().map(|&t| {
            let s = 0.5 * (t + 1.0);
            [s, 1.0 - s, 0.0]
        });
        QuadratureRule { points: points.collect(), weights: w.iter().map(|w| 0.5 * w).collect(), degree: 7 }
    }

    /// Edge parameter of point `i` of an edge rule.
    pub fn edge_param(&self, i: usize) -> f64 {
        self.points[i][0]
    }
}

/// The area rule is the same degree-6 rule for both orders.
pub fn quadrature_for(purpose: QuadraturePurpose, order: usize) -> crate::Result<QuadratureRule> {
    if !(1..=2).contains(&order) {
        return Err(crate::Error::InvalidArgument(format!("order {order} not supported")));
    }
    Ok(match purpose {
        QuadraturePurpose::Area => QuadratureRule::triangle_degree6(),
        QuadraturePurpose::Edge => QuadratureRule::edge_gauss4(),
    })
}
