use super::{Box, GridSection, GridSpec};
use crate::error::{Error, Result};
use crate::numerics::bump::plateau;
use nalgebra::{DMatrix, DVector};

/// Reflection extension across each face: for distance `d` beyond the face,
/// `E f(b + d) = Σ_j w_j f(b − (j+1) d)`, multiplied by a cutoff that stays 1
/// for `d ≤ plateau` and drops to 0 over the next `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionParams {
    pub width: f64,
    pub plateau: f64,
    /// Derivative order matched across the face.
    pub k_max: usize,
}

impl Default for ExtensionParams {
    fn default() -> Self {
        Self { width: 0.25, plateau: 0.0, k_max: 6 }
    }
}

/// Weights `w_j` with `Σ_j w_j (−(j+1))^m = 1` for `m = 0..=k_max`.
pub fn reflection_weights(k_max: usize) -> Vec<f64> {
    let n = k_max + 1;
    let a = DMatrix::from_fn(n, n, |m, j| (-((j + 1) as f64)).powi(m as i32));
    let rhs = DVector::from_element(n, 1.0);
    let sol = a.lu().solve(&rhs).expect("Vandermonde system with distinct nodes is invertible");
    sol.iter().copied().collect()
}

/// Extends `e` to the lattice nodes (same spacing) inside `k`, which must
/// contain `e`'s domain with a margin beyond the cutoff's support.
pub fn extend(e: &GridSection, k: &Box, params: ExtensionParams) -> Result<GridSection> {
    let m = e.dim();
    if k.dim() != m {
        return Err(Error::Dimension("support box has the wrong dimension".into()));
    }
    let margin = k.margin_to(e.domain());
    if margin <= params.width + params.plateau {
        return Err(Error::Domain(format!(
            "margin {margin:.4} between the section's domain and the support box is below the cutoff reach {}",
            params.width + params.plateau
        )));
    }
    let reach = (params.k_max + 1) as f64 * (params.width + params.plateau);
    for ax in 0..m {
        let len = e.domain().hi[ax] - e.domain().lo[ax];
        if reach > len + 1e-12 {
            return Err(Error::Domain(format!(
                "axis {ax} has length {len}, reflections need {reach}"
            )));
        }
    }
    let w = reflection_weights(params.k_max);
    let mut spec = e.spec.clone();
    let mut values = e.values.clone();
    for ax in 0..m {
        let h = e.spec.spacing(ax);
        let left = ((e.domain().lo[ax] - k.lo[ax]) / h + 1e-9).floor() as usize;
        let right = ((k.hi[ax] - e.domain().hi[ax]) / h + 1e-9).floor() as usize;
        let (lo, hi) = (e.domain().lo[ax], e.domain().hi[ax]);
        let (nv, spec_new, vals) = extend_axis(&spec, &values, e.fiber, ax, left, right, &w, |x| {
            plateau(x, lo - params.plateau, hi + params.plateau, params.width)
        })?;
        debug_assert_eq!(nv, spec_new.len());
        spec = spec_new;
        values = vals;
    }
    Ok(GridSection { spec, fiber: e.fiber, values, interp_points: e.interp_points })
}

#[allow(clippy::too_many_arguments)]
fn extend_axis(
    spec: &GridSpec,
    values: &[f64],
    fiber: usize,
    ax: usize,
    left: usize,
    right: usize,
    w: &[f64],
    cutoff: impl Fn(f64) -> f64,
) -> Result<(usize, GridSpec, Vec<f64>)> {
    let n = spec.counts[ax];
    let h = spec.spacing(ax);
    let mut counts = spec.counts.clone();
    counts[ax] = n + left + right;
    let mut lo = spec.domain.lo.clone();
    let mut hi = spec.domain.hi.clone();
    lo[ax] -= left as f64 * h;
    hi[ax] += right as f64 * h;
    let new_spec = GridSpec::new(Box::new(lo, hi)?, counts.clone())?;
    let inner: usize = counts[ax + 1..].iter().product::<usize>() * fiber;
    let outer: usize = counts[..ax].iter().product();
    let nn = counts[ax];
    let mut out = vec![0.0; outer * nn * inner];
    for q in 0..nn {
        let x = new_spec.coord(ax, q);
        // (source index, weight) pairs
        let terms: Vec<(usize, f64)> = if q >= left && q < left + n {
            vec![(q - left, 1.0)]
        } else {
            let c = cutoff(x);
            if c == 0.0 {
                continue;
            }
            let (d, face_left) = if q < left { (left - q, true) } else { (q - (left + n - 1), false) };
            let mut t = Vec::with_capacity(w.len());
            for (j, wj) in w.iter().enumerate() {
                let off = (j + 1) * d;
                if off > n - 1 {
                    return Err(Error::Domain(format!("reflection on axis {ax} leaves the sampled domain")));
                }
                let src = if face_left { off } else { n - 1 - off };
                t.push((src, wj * c));
            }
            t
        };
        for o in 0..outer {
            let dst = (o * nn + q) * inner;
            for (src, wt) in &terms {
                let s = (o * n + src) * inner;
                for c in 0..inner {
                    out[dst + c] += wt * values[s + c];
                }
            }
        }
    }
    Ok((new_spec.len(), new_spec, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ck_norm;

    #[test]
    fn weights_match_derivatives() {
        let w = reflection_weights(6);
        for m in 0..=6 {
            let s: f64 = w.iter().enumerate().map(|(j, wj)| wj * (-((j + 1) as f64)).powi(m)).sum();
            assert!((s - 1.0).abs() < 1e-9, "moment {m}: {s}");
        }
    }

    #[test]
    fn extension_agrees_inside_and_vanishes_near_boundary() {
        let spec = GridSpec::uniform(Box::cube(2, 1.0), 81).unwrap();
        let e = GridSection::from_scalar_fn(spec, |x| (x[0] + 0.3 * x[1]).cos());
        let k = Box::cube(2, 1.6);
        let ext = extend(&e, &k, ExtensionParams::default()).unwrap();
        let back = ext.restrict(e.domain()).unwrap();
        assert!(back.sub(&e).unwrap().max_abs() < 1e-14);
        assert_eq!(ext.spec.counts, vec![129, 129]);
        let edge = ext.restrict(&Box::new(vec![1.3, -1.5], vec![1.5, 1.5]).unwrap()).unwrap();
        assert_eq!(edge.max_abs(), 0.0);
    }

    #[test]
    fn extension_is_smooth_across_the_face() {
        let spec = GridSpec::uniform(Box::cube(1, 1.0), 401).unwrap();
        let e = GridSection::from_scalar_fn(spec, |x| (2.0 * x[0]).sin());
        let ext = extend(&e, &Box::cube(1, 1.5), ExtensionParams::default()).unwrap();
        let inner = ck_norm(&e, 3, &Box::cube(1, 1.0)).unwrap().value;
        let outer = ck_norm(&ext, 3, ext.domain()).unwrap().value;
        assert!(outer.is_finite() && outer < 1e3 * inner, "{outer} vs {inner}");
    }

    #[test]
    fn insufficient_margin() {
        let spec = GridSpec::uniform(Box::cube(1, 1.0), 41).unwrap();
        let e = GridSection::zeros(spec, 1);
        assert!(matches!(extend(&e, &Box::cube(1, 1.1), ExtensionParams::default()), Err(Error::Domain(_))));
    }
}
