use super::{max_abs, solve_small, Map, NearIdentityMap, DEFAULT_THETA};
use crate::error::{Error, Result};
use crate::grid::{ck_norm, Box, GridSection};
use crate::par;

/// `g ∘ (id + f)` sampled on the grid of `f`. Requires `‖f‖_0 < θ` and the
/// image `(id + f)(B)` inside the domain of `g`.
pub fn compose(g: &GridSection, f: &NearIdentityMap, theta: f64) -> Result<GridSection> {
    if g.dim() != f.dim() {
        return Err(Error::Dimension("composition of maps on different dimensions".into()));
    }
    let f0 = f.disp.max_abs();
    if f0 >= theta {
        return Err(Error::Threshold(format!("‖f‖_0 = {f0:.3e} is not below θ = {theta}")));
    }
    let spec = f.spec().clone();
    let m = spec.dim();
    let vals = par::try_map_range(spec.len(), |i| {
        let mut y = vec![0.0; m];
        f.apply(&spec.node(i), &mut y)?;
        if !g.domain().contains(&y, 1e-12) {
            return Err(Error::Domain(format!("image point {y:?} escapes {:?}", g.domain())));
        }
        Ok(g.eval(&y))
    })?;
    GridSection::new(spec, g.fiber, vals.concat())
}

/// Inverse of `id + g` on `target ⊂ int(C)` with the default θ.
pub fn invert(phi: &NearIdentityMap, target: &Box) -> Result<NearIdentityMap> {
    invert_with(phi, target, DEFAULT_THETA)
}

/// Solves `x + g(x) = y` for every node `y` of `target` (sampled with the
/// spacing of `phi`) by damped Newton iteration, at most 50 steps.
pub fn invert_with(phi: &NearIdentityMap, target: &Box, theta: f64) -> Result<NearIdentityMap> {
    let g1 = ck_norm(&phi.disp, 1, phi.domain())?.value;
    if g1 >= theta {
        return Err(Error::Threshold(format!("‖g‖_1 = {g1:.3e} is not below θ = {theta}")));
    }
    if !phi.domain().contains_box(target, 1e-12) {
        return Err(Error::Domain("target box is not inside the map's domain".into()));
    }
    let m = phi.dim();
    let counts: Vec<usize> = (0..m)
        .map(|ax| (((target.hi[ax] - target.lo[ax]) / phi.spec().spacing(ax)).round() as usize + 1).max(2))
        .collect();
    let spec = crate::grid::GridSpec::new(target.clone(), counts)?;
    let vals = par::try_map_range(spec.len(), |i| {
        let y = spec.node(i);
        let x = newton_preimage(phi, &y)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<f64>>())
    })?;
    NearIdentityMap::new(GridSection::new(spec, m, vals.concat())?)
}

/// `x` with `map(x) = y`, starting from `y − (map(y) − y)`.
pub(crate) fn newton_preimage(map: &dyn Map, y: &[f64]) -> Result<Vec<f64>> {
    let m = map.dim();
    let mut fx = vec![0.0; m];
    let mut jac = vec![0.0; m * m];
    let mut x = y.to_vec();
    if map.apply(y, &mut fx).is_ok() {
        for i in 0..m {
            x[i] = 2.0 * y[i] - fx[i];
        }
    }
    let resid = |x: &[f64], fx: &mut [f64]| -> Result<Vec<f64>> {
        map.apply(x, fx)?;
        Ok(fx.iter().zip(y).map(|(a, b)| a - b).collect())
    };
    let mut r = match resid(&x, &mut fx) {
        Ok(r) => r,
        Err(_) => {
            x = y.to_vec();
            resid(&x, &mut fx)?
        }
    };
    let scale = 1.0 + max_abs(y);
    for _ in 0..50 {
        let rn = max_abs(&r);
        if rn <= 1e-14 * scale {
            return Ok(x);
        }
        map.jacobian(&x, &mut jac)?;
        let dx = solve_small(m, &jac, &r).ok_or_else(|| Error::Inversion(format!("singular Jacobian at {x:?}")))?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - lambda * d).collect();
            if let Ok(rt) = resid(&trial, &mut fx) {
                if max_abs(&rt) < rn {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::Inversion(format!("Newton stalled at {x:?} (residual {rn:.3e})")));
            }
        }
    }
    if max_abs(&r) <= 1e-10 * scale {
        return Ok(x);
    }
    Err(Error::Inversion(format!("Newton did not converge for target {y:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn identity_composition() {
        let spec = GridSpec::uniform(Box::cube(2, 1.0), 21).unwrap();
        let g = GridSection::from_fn(spec.clone(), 1, |x, o| o[0] = x[0] * x[1]);
        let id = NearIdentityMap::identity(spec);
        assert_eq!(compose(&g, &id, 0.05).unwrap(), g);
    }

    #[test]
    fn linear_g_has_no_quadratic_remainder() {
        let big = GridSpec::uniform(Box::cube(1, 2.0), 81).unwrap();
        let g = GridSection::from_fn(big, 1, |x, o| o[0] = 3.0 * x[0] - 1.0);
        let spec = GridSpec::uniform(Box::cube(1, 1.0), 41).unwrap();
        let f = NearIdentityMap::from_displacement(spec, |x, o| o[0] = 0.01 * x[0].sin());
        let gf = compose(&g, &f, 0.05).unwrap();
        for i in 0..gf.spec.len() {
            let x = gf.spec.node(i)[0];
            let lin = 3.0 * x - 1.0 + 3.0 * 0.01 * x.sin();
            assert!((gf.values[i] - lin).abs() < 1e-13);
        }
    }

    #[test]
    fn escape_and_threshold() {
        let g = GridSection::zeros(GridSpec::uniform(Box::cube(1, 1.0), 11).unwrap(), 1);
        let f = NearIdentityMap::from_displacement(GridSpec::uniform(Box::cube(1, 1.0), 11).unwrap(), |_, o| o[0] = 0.01);
        assert!(matches!(compose(&g, &f, 0.05), Err(Error::Domain(_))));
        assert!(matches!(compose(&g, &f, 0.005), Err(Error::Threshold(_))));
    }

    #[test]
    fn inverse_of_translation_and_sine() {
        let spec = GridSpec::uniform(Box::cube(1, 2.0), 801).unwrap();
        let t = NearIdentityMap::from_displacement(spec.clone(), |_, o| o[0] = 0.03);
        let inv = invert(&t, &Box::cube(1, 1.0)).unwrap();
        assert!(inv.disp.values.iter().all(|v| (v + 0.03).abs() < 1e-14));

        let g = NearIdentityMap::from_displacement(spec, |x, o| o[0] = 0.05 * x[0].sin());
        let inv = invert_with(&g, &Box::cube(1, 1.0), 0.1).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..inv.spec().len() {
            let y = inv.spec().node(i);
            let mut x = [0.0];
            inv.apply(&y, &mut x).unwrap();
            worst = worst.max((x[0] + 0.05 * x[0].sin() - y[0]).abs());
        }
        assert!(worst <= 1e-10, "{worst}");
    }
}
