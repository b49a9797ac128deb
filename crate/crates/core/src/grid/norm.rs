use super::{Box, GridSection, GridSpec};
use crate::error::Result;
use crate::numerics::fd::DerivativePlan;
use crate::par;
use serde::Serialize;

/// All multi-indices `a ∈ N^m` with `|a| ≤ k`, graded.
pub fn multi_indices(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(m, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, k, &mut Vec::new(), &mut out);
    out.sort_by_key(|a| a.iter().sum::<usize>());
    out
}

/// `∂^order/∂x_axis^order` of every fiber component on the full grid.
pub fn partial_derivative(spec: &GridSpec, fiber: usize, values: &[f64], axis: usize, order: usize, acc: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Ok(values.to_vec());
    }
    let n = spec.counts[axis];
    let plan = DerivativePlan::new(n, spec.spacing(axis), order, acc)?;
    let stride: usize = spec.counts[axis + 1..].iter().product::<usize>() * fiber;
    let mut out = vec![0.0; values.len()];
    par::for_each_chunk_mut(&mut out, stride, |chunk, dst| {
        let (outer, i) = (chunk / n, chunk % n);
        let base = outer * n * stride;
        let (s, w) = plan.stencil(i);
        for (c, d) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * values[base + (s + j) * stride + c];
            }
            *d = acc;
        }
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkNormReport {
    pub k: usize,
    pub r: Option<f64>,
    pub value: f64,
    /// (multi-index, sup over the domain of |D^a e / a!|)
    pub per_index: Vec<(Vec<usize>, f64)>,
}

/// `‖e‖_{k,D}` with second-order differences.
pub fn ck_norm(e: &GridSection, k: usize, domain: &Box) -> Result<CkNormReport> {
    ck_norm_with(e, k, domain, 2)
}

/// Sup over grid nodes in `domain` of the Euclidean norm of all normalized
/// partials `D^a e / a!`, `|a| ≤ k`, computed by finite differences of
/// accuracy `acc` on the whole sampled grid.
pub fn ck_norm_with(e: &GridSection, k: usize, domain: &Box, acc: usize) -> Result<CkNormReport> {
    let spec = &e.spec;
    let m = spec.dim();
    let tol = 1e-9 * (0..m).map(|a| spec.spacing(a)).fold(f64::INFINITY, f64::min);
    let inside: Vec<usize> = (0..spec.len()).filter(|&i| domain.contains(&spec.node(i), tol)).collect();
    let mut sumsq = vec![0.0; inside.len()];
    let mut per_index = Vec::new();
    let mut alpha = Vec::with_capacity(m);
    accumulate(e, k, acc, &inside, &e.values, 0, &mut alpha, &mut sumsq, &mut per_index)?;
    per_index.sort_by_key(|(a, _)| a.iter().sum::<usize>());
    let value = sumsq.iter().fold(0.0, |mx: f64, s| mx.max(s.sqrt()));
    Ok(CkNormReport { k, r: None, value, per_index })
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    e: &GridSection,
    budget: usize,
    acc: usize,
    inside: &[usize],
    cur: &[f64],
    axis: usize,
    alpha: &mut Vec<usize>,
    sumsq: &mut [f64],
    per_index: &mut Vec<(Vec<usize>, f64)>,
) -> Result<()> {
    let fiber = e.fiber;
    if axis == e.dim() {
        let mut mx: f64 = 0.0;
        for (s, &node) in sumsq.iter_mut().zip(inside) {
            let v: f64 = cur[node * fiber..(node + 1) * fiber].iter().map(|x| x * x).sum();
            *s += v;
            mx = mx.max(v.sqrt());
        }
        per_index.push((alpha.clone(), mx));
        return Ok(());
    }
    for order in 0..=budget {
        let d = partial_derivative(&e.spec, fiber, cur, axis, order, acc)?;
        let fact: f64 = (1..=order).map(|i| i as f64).product();
        let d: Vec<f64> = if order == 0 { d } else { d.into_iter().map(|v| v / fact).collect() };
        alpha.push(order);
        accumulate(e, budget - order, acc, inside, &d, axis + 1, alpha, sumsq, per_index)?;
        alpha.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationRatio {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub ratio: f64,
}

/// `‖e‖_j^{k−i} / (‖e‖_i^{k−j} ‖e‖_k^{j−i})` on `domain`; 0 when `e` vanishes.
pub fn interpolation_check(e: &GridSection, i: usize, j: usize, k: usize, domain: &Box) -> Result<InterpolationRatio> {
    assert!(i <= j && j <= k, "interpolation indices must satisfy i <= j <= k");
    let ni = ck_norm(e, i, domain)?.value;
    let nj = ck_norm(e, j, domain)?.value;
    let nk = ck_norm(e, k, domain)?.value;
    let num = nj.powi((k - i) as i32);
    let den = ni.powi((k - j) as i32) * nk.powi((j - i) as i32);
    let ratio = if den == 0.0 { 0.0 } else { num / den };
    Ok(InterpolationRatio { i, j, k, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn multi_index_count() {
        // binomial(m + k, k)
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(1, 4).len(), 5);
    }

    #[test]
    fn zero_and_constant_sections() {
        let spec = GridSpec::uniform(Box::cube(2, 2.0), 21).unwrap();
        let z = GridSection::zeros(spec.clone(), 3);
        assert_eq!(ck_norm(&z, 3, &Box::cube(2, 1.0)).unwrap().value, 0.0);
        let c = GridSection::from_scalar_fn(spec, |_| -2.5);
        assert!((ck_norm(&c, 0, &Box::cube(2, 1.0)).unwrap().value - 2.5).abs() < 1e-15);
        assert!((ck_norm(&c, 1, &Box::cube(2, 1.0)).unwrap().value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn sine_c2_norm() {
        let spec = GridSpec::uniform(Box::cube(1, 2.0), 401).unwrap();
        let e = GridSection::from_scalar_fn(spec, |x| x[0].sin());
        let got = ck_norm(&e, 2, &Box::cube(1, 2.0)).unwrap().value;
        // sup of sqrt(sin^2 + cos^2 + sin^2/4), attained at pi/2
        assert!((got - 1.25f64.sqrt()).abs() < 1e-4, "{got}");
    }

    #[test]
    fn too_high_order_is_resolution_error() {
        let spec = GridSpec::uniform(Box::cube(1, 1.0), 4).unwrap();
        let e = GridSection::from_scalar_fn(spec, |x| x[0]);
        assert!(matches!(ck_norm(&e, 3, &Box::cube(1, 1.0)), Err(Error::Resolution(_))));
    }

    #[test]
    fn interpolation_trivial_cases() {
        let spec = GridSpec::uniform(Box::cube(1, 2.0), 101).unwrap();
        let z = GridSection::zeros(spec.clone(), 1);
        assert_eq!(interpolation_check(&z, 0, 1, 2, &Box::cube(1, 1.0)).unwrap().ratio, 0.0);
        let e = GridSection::from_scalar_fn(spec, |x| (3.0 * x[0]).cos());
        assert_eq!(interpolation_check(&e, 2, 2, 2, &Box::cube(1, 1.0)).unwrap().ratio, 1.0);
    }
}
