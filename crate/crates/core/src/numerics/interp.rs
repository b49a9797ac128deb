//! Local Lagrange interpolation on uniform axes.

/// Stencil of a 1D Lagrange interpolant: first node index plus weights for the
/// value and the first derivative.
#[derive(Debug, Clone, Copy)]
pub struct Stencil1 {
    pub start: usize,
    pub len: usize,
    pub w: [f64; 8],
    pub dw: [f64; 8],
}

/// Builds the `points`-node Lagrange stencil (points ≤ 8) for coordinate `x`
/// on the axis `a + i h`, `i = 0..n`. Points outside the axis are clamped to
/// the end stencil (extrapolation). Coordinates within 1e-10·h of a node snap
/// to it so node evaluation reproduces samples exactly.
pub fn lagrange_stencil(a: f64, h: f64, n: usize, x: f64, points: usize) -> Stencil1 {
    let p = points.min(n).max(1);
    let u = (x - a) / h;
    let nearest = u.round();
    let snapped = (u - nearest).abs() < 1e-10 && nearest >= 0.0 && nearest <= (n - 1) as f64;
    let mut st = Stencil1 { start: 0, len: p, w: [0.0; 8], dw: [0.0; 8] };
    let base = (u.floor() as isize) - (p as isize - 1) / 2;
    let start = base.clamp(0, (n - p) as isize) as usize;
    st.start = start;
    let local = u - start as f64;
    if snapped {
        let k = nearest as usize - start;
        if k < p {
            st.w[k] = 1.0;
            // derivative weights still come from the polynomial
            for j in 0..p {
                st.dw[j] = lagrange_dbasis(local, p, j) / h;
            }
            return st;
        }
    }
    for j in 0..p {
        st.w[j] = lagrange_basis(local, p, j);
        st.dw[j] = lagrange_dbasis(local, p, j) / h;
    }
    st
}

fn lagrange_basis(u: f64, p: usize, j: usize) -> f64 {
    let mut v = 1.0;
    for m in 0..p {
        if m != j {
            v *= (u - m as f64) / (j as f64 - m as f64);
        }
    }
    v
}

fn lagrange_dbasis(u: f64, p: usize, j: usize) -> f64 {
    let mut total = 0.0;
    for skip in 0..p {
        if skip == j {
            continue;
        }
        let mut v = 1.0 / (j as f64 - skip as f64);
        for m in 0..p {
            if m != j && m != skip {
                v *= (u - m as f64) / (j as f64 - m as f64);
            }
        }
        total += v;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_reproduces_cubics() {
        let (a, h, n) = (-1.0, 0.1, 21);
        let f = |x: f64| 2.0 * x * x * x - x + 0.5;
        let df = |x: f64| 6.0 * x * x - 1.0;
        let samples: Vec<f64> = (0..n).map(|i| f(a + i as f64 * h)).collect();
        for &x in &[-1.0, -0.97, -0.33, 0.0, 0.42, 0.999, 1.0] {
            let st = lagrange_stencil(a, h, n, x, 4);
            let v: f64 = (0..st.len).map(|j| st.w[j] * samples[st.start + j]).sum();
            let d: f64 = (0..st.len).map(|j| st.dw[j] * samples[st.start + j]).sum();
            assert!((v - f(x)).abs() < 1e-12, "{x}");
            assert!((d - df(x)).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn node_evaluation_is_exact() {
        let st = lagrange_stencil(0.0, 0.3, 11, 0.3 * 7.0, 4);
        let nonzero: Vec<usize> = (0..st.len).filter(|&j| st.w[j] != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(st.start + nonzero[0], 7);
        assert_eq!(st.w[nonzero[0]], 1.0);
    }
}
