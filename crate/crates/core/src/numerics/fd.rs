//! Finite-difference weights on uniform stencils (Fornberg's recursion) and
//! per-axis derivative plans with centered interior stencils and shifted
//! stencils near the ends of the axis.

use crate::error::{Error, Result};

/// Weights for the `order`-th derivative at `x0` from samples at `nodes`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more nodes than derivative order");
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Precomputed stencils for one derivative order along one axis of `n` nodes
/// with spacing `h`.
#[derive(Debug, Clone)]
pub struct DerivativePlan {
    pub order: usize,
    /// (first node index, weights) per node
    stencils: Vec<(usize, Vec<f64>)>,
}

/// Number of points of the centered stencil for derivative `order` at accuracy `acc`.
pub fn central_points(order: usize, acc: usize) -> usize {
    2 * order.div_ceil(2) - 1 + acc
}

impl DerivativePlan {
    /// `acc` is the formal accuracy order (2 or 4).
    pub fn new(n: usize, h: f64, order: usize, acc: usize) -> Result<Self> {
        if order == 0 {
            return Ok(Self { order, stencils: (0..n).map(|i| (i, vec![1.0])).collect() });
        }
        let central = central_points(order, acc);
        let shifted = order + acc;
        if n < shifted {
            return Err(Error::Resolution(format!(
                "derivative of order {order} needs {shifted} nodes per axis, grid has {n}"
            )));
        }
        let hw = (central - 1) / 2;
        let offsets: Vec<f64> = (0..central).map(|j| j as f64 - hw as f64).collect();
        let central_w: Vec<f64> = fornberg_weights(0.0, &offsets, order)
            .into_iter()
            .map(|w| w / h.powi(order as i32))
            .collect();
        let mut stencils = Vec::with_capacity(n);
        for i in 0..n {
            if i >= hw && i + hw < n {
                stencils.push((i - hw, central_w.clone()));
            } else {
                let start = if i < hw { 0 } else { n - shifted };
                let nodes: Vec<f64> = (0..shifted).map(|j| (start + j) as f64).collect();
                let w = fornberg_weights(i as f64, &nodes, order)
                    .into_iter()
                    .map(|w| w / h.powi(order as i32))
                    .collect();
                stencils.push((start, w));
            }
        }
        Ok(Self { order, stencils })
    }

    pub fn len(&self) -> usize {
        self.stencils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencils.is_empty()
    }

    pub fn stencil(&self, i: usize) -> (usize, &[f64]) {
        let (s, w) = &self.stencils[i];
        (*s, w)
    }

    /// Applies the plan to a strided line of `data`.
    pub fn apply_line(&self, data: &[f64], offset: usize, stride: usize, i: usize) -> f64 {
        let (s, w) = self.stencil(i);
        w.iter().enumerate().map(|(j, wj)| wj * data[offset + (s + j) * stride]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] + 2.0).abs() < 1e-15);
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn plan_is_exact_on_low_degree_polynomials() {
        let n = 21;
        let h = 0.1;
        for acc in [2, 4] {
            for order in 1..=4 {
                let plan = DerivativePlan::new(n, h, order, acc).unwrap();
                let deg = order + acc - 1;
                let data: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(deg as i32)).collect();
                for i in 0..n {
                    let x = i as f64 * h;
                    let exact: f64 = ((deg - order + 1)..=deg).map(|m| m as f64).product::<f64>()
                        * x.powi((deg - order) as i32);
                    let got = plan.apply_line(&data, 0, 1, i);
                    assert!((got - exact).abs() < 1e-6 * (1.0 + exact.abs()), "acc {acc} order {order} node {i}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn too_few_nodes_is_a_resolution_error() {
        assert!(matches!(DerivativePlan::new(4, 0.1, 3, 2), Err(Error::Resolution(_))));
    }
}
