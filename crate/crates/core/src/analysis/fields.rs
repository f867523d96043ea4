use std::f64::consts::PI;

use crate::Point;

/// A smooth scalar field with analytic derivatives.
pub trait Field: Send + Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> [f64; 2];
    fn laplacian(&self, x: Point) -> f64;
}

/// `u = sin(πx) sin(2πy)`, with `−Δu = 5π² u` and `u = 0` on the boundary of the unit square.
#[derive(Clone, Copy, Debug, Default)]
pub struct SineSolution;

impl SineSolution {
    /// The matching Poisson source `5π² u`.
    pub fn source(x: Point) -> f64 {
        5.0 * PI * PI * SineSolution.value(x)
    }
}

impl Field for SineSolution {
    fn value(&self, x: Point) -> f64 {
        (PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        [
            PI * (PI * x[0]).cos() * (2.0 * PI * x[1]).sin(),
            2.0 * PI * (PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
        ]
    }

    fn laplacian(&self, x: Point) -> f64 {
        -5.0 * PI * PI * self.value(x)
    }
}

/// `c0 + c1 x + c2 y + c3 x² + c4 xy + c5 y²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic(pub [f64; 6]);

impl Quadratic {
    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        Quadratic([c0, cx, cy, 0.0, 0.0, 0.0])
    }

    pub fn degree(&self) -> usize {
        if self.0[3..].iter().any(|&c| c != 0.0) {
            2
        } else if self.0[1..3].iter().any(|&c| c != 0.0) {
            1
        } else {
            0
        }
    }
}

impl Field for Quadratic {
    fn value(&self, x: Point) -> f64 {
        let c = &self.0;
        c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1]
    }

    fn gradient(&self, x: Point) -> [f64; 2] {
        let c = &self.0;
        [c[1] + 2.0 * c[3] * x[0] + c[4] * x[1], c[2] + c[4] * x[0] + 2.0 * c[5] * x[1]]
    }

    fn laplacian(&self, _: Point) -> f64 {
        2.0 * (self.0[3] + self.0[5])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_derivatives_match_finite_differences() {
        let u = SineSolution;
        let x = [0.3, 0.7];
        let e = 1e-5;
        let g = u.gradient(x);
        let fd = [
            (u.value([x[0] + e, x[1]]) - u.value([x[0] - e, x[1]])) / (2.0 * e),
            (u.value([x[0], x[1] + e]) - u.value([x[0], x[1] - e])) / (2.0 * e),
        ];
        assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
        assert_eq!(u.value([0.0, 0.4]), 0.0);
    }

    #[test]
    fn quadratic_derivatives() {
        let q = Quadratic([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(q.gradient([1.0, 1.0]), [2.0 + 8.0 + 5.0, 3.0 + 5.0 + 12.0]);
        assert_eq!(q.laplacian([0.0, 0.0]), 20.0);
        assert_eq!(q.degree(), 2);
        assert_eq!(Quadratic::linear(1.0, 0.0, 2.0).degree(), 1);
    }
}
