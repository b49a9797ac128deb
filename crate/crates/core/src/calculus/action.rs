use super::flow::{FlowMap, FlowParams, VectorField};
use super::{invert_with, max_abs, solve_small, Map, NearIdentityMap};
use crate::error::{Error, Result};
use crate::grid::{ck_norm, partial_derivative, Box, GridSection, GridSpec};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActParams {
    /// When set, `‖e‖_1` and `‖φ − id‖` on the graph must stay below θ.
    pub theta: Option<f64>,
    /// Largest admissible fiber coordinate of the new section.
    pub fiber_bound: f64,
    /// Also invert the base map on the largest box it certainly covers.
    pub with_inverse: bool,
}

impl Default for ActParams {
    fn default() -> Self {
        Self { theta: None, fiber_bound: 1e6, with_inverse: true }
    }
}

/// The relative base map `z` of an action and, when computed, its inverse.
#[derive(Debug, Clone)]
pub struct CompatibilityCertificate {
    pub base: Box,
    pub base_map: NearIdentityMap,
    pub inverse: Option<NearIdentityMap>,
    /// `max |z(z^{-1}(x)) − x|` over the inverse's grid.
    pub inverse_residual: f64,
}

/// `e·φ` on the grid `w`: for each base point `x` finds `y` with
/// `φ(x, y) = (z, e(z))`, i.e. the graph of `e·φ` is `φ^{-1}(graph e)`.
/// `φ` acts on the total space `R^m × R^n` (`m` base, `n` fiber coordinates).
pub fn act(e: &GridSection, phi: &dyn Map, w: &GridSpec, params: &ActParams) -> Result<(GridSection, CompatibilityCertificate)> {
    let (m, n) = (e.dim(), e.fiber);
    if phi.dim() != m + n || w.dim() != m {
        return Err(Error::Dimension("map, section and target grid dimensions disagree".into()));
    }
    if let Some(theta) = params.theta {
        let e1 = ck_norm(e, 1, e.domain())?.value;
        if e1 >= theta {
            return Err(Error::Threshold(format!("‖e‖_1 = {e1:.3e} is not below θ = {theta}")));
        }
        let d = graph_displacement(e, phi)?;
        if d >= theta {
            return Err(Error::Threshold(format!("|φ − id| on the graph = {d:.3e} is not below θ = {theta}")));
        }
    }
    let rows = par::try_map_range(w.len(), |i| solve_node(e, phi, &w.node(i), params))?;
    let mut yv = Vec::with_capacity(w.len() * n);
    let mut zv = Vec::with_capacity(w.len() * m);
    for (x, (y, z)) in (0..w.len()).map(|i| w.node(i)).zip(rows) {
        yv.extend_from_slice(&y);
        zv.extend(z.iter().zip(&x).map(|(a, b)| a - b));
    }
    let out = GridSection::new(w.clone(), n, yv)?;
    let base_map = NearIdentityMap::new(GridSection::new(w.clone(), m, zv)?)?;
    check_orientation(&base_map)?;
    let (inverse, inverse_residual) = if params.with_inverse { invert_base(&base_map)? } else { (None, f64::NAN) };
    Ok((out, CompatibilityCertificate { base: w.domain.clone(), base_map, inverse, inverse_residual }))
}

fn graph_displacement(e: &GridSection, phi: &dyn Map) -> Result<f64> {
    let (m, n) = (e.dim(), e.fiber);
    let mut worst: f64 = 0.0;
    let mut p = vec![0.0; m + n];
    let mut q = vec![0.0; m + n];
    for i in 0..e.spec.len() {
        p[..m].copy_from_slice(&e.spec.node(i));
        p[m..].copy_from_slice(e.at_node(i));
        phi.apply(&p, &mut q)?;
        worst = worst.max(p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    Ok(worst)
}

fn solve_node(e: &GridSection, phi: &dyn Map, x: &[f64], params: &ActParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (e.dim(), e.fiber);
    let dim = m + n;
    let mut p = vec![0.0; dim];
    let mut q = vec![0.0; dim];
    let mut jac = vec![0.0; dim * dim];
    let mut ez = vec![0.0; n];
    let mut dez = vec![0.0; n * m];
    p[..m].copy_from_slice(x);
    let x_in: Vec<f64> = (0..m).map(|i| x[i].clamp(e.domain().lo[i], e.domain().hi[i])).collect();
    p[m..].copy_from_slice(&e.eval(&x_in));
    // F(y) = φ_fib(x, y) − e(φ_base(x, y))
    let residual = |p: &[f64], q: &mut [f64], ez: &mut [f64], dez: &mut [f64]| -> Result<Vec<f64>> {
        phi.apply(p, q)?;
        if !e.domain().contains(&q[..m], 1e-12) {
            return Err(Error::Domain(format!("base point {:?} leaves the section's domain", &q[..m])));
        }
        e.eval_with_jacobian(&q[..m], ez, dez);
        Ok((0..n).map(|c| q[m + c] - ez[c]).collect())
    };
    let mut r = residual(&p, &mut q, &mut ez, &mut dez)?;
    let scale = 1.0 + max_abs(&p);
    for _ in 0..60 {
        let rn = max_abs(&r);
        if rn <= 1e-14 * scale {
            break;
        }
        phi.jacobian(&p, &mut jac)?;
        // J_cd = ∂_{y_d} φ_fib_c − Σ_a ∂_a e_c ∂_{y_d} φ_base_a
        let mut jy = vec![0.0; n * n];
        for c in 0..n {
            for d in 0..n {
                let mut v = jac[(m + c) * dim + m + d];
                for a in 0..m {
                    v -= dez[c * m + a] * jac[a * dim + m + d];
                }
                jy[c * n + d] = v;
            }
        }
        let dy = solve_small(n, &jy, &r)
            .ok_or_else(|| Error::Incompatible(format!("graph of e·φ is not transversal at x = {x:?}")))?;
        let mut lambda = 1.0;
        loop {
            let mut trial = p.clone();
            for d in 0..n {
                trial[m + d] -= lambda * dy[d];
            }
            if let Ok(rt) = residual(&trial, &mut q, &mut ez, &mut dez) {
                if max_abs(&rt) < rn {
                    p = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(Error::Incompatible(format!("Newton stalled at x = {x:?} (residual {rn:.3e})")));
            }
        }
        if max_abs(&p[m..]) > params.fiber_bound {
            return Err(Error::Domain(format!("fiber coordinate escaped at x = {x:?}")));
        }
    }
    if max_abs(&r) > 1e-10 * scale {
        return Err(Error::Incompatible(format!("no solution of the graph equation at x = {x:?}")));
    }
    phi.apply(&p, &mut q)?;
    Ok((p[m..].to_vec(), q[..m].to_vec()))
}

/// Rejects base maps whose Jacobian determinant changes sign on the grid.
fn check_orientation(z: &NearIdentityMap) -> Result<()> {
    let spec = z.spec();
    let m = spec.dim();
    let mut partials = Vec::with_capacity(m);
    for ax in 0..m {
        partials.push(partial_derivative(spec, m, &z.disp.values, ax, 1, 2)?);
    }
    for node in 0..spec.len() {
        let mut j = vec![0.0; m * m];
        for (ax, p) in partials.iter().enumerate() {
            for c in 0..m {
                j[c * m + ax] = p[node * m + c] + if c == ax { 1.0 } else { 0.0 };
            }
        }
        let det = nalgebra::DMatrix::from_row_slice(m, m, &j).determinant();
        if det <= 0.0 {
            return Err(Error::Incompatible(format!("base map folds near {:?}", spec.node(node))));
        }
    }
    Ok(())
}

fn invert_base(z: &NearIdentityMap) -> Result<(Option<NearIdentityMap>, f64)> {
    let shift = z.disp.max_abs() * 1.01 + 1e-12;
    let Ok(inner) = z.domain().shrink(shift) else {
        return Ok((None, f64::NAN));
    };
    let inv = invert_with(z, &inner, f64::INFINITY)?;
    let m = z.dim();
    let mut worst: f64 = 0.0;
    let (mut a, mut b) = (vec![0.0; m], vec![0.0; m]);
    for i in 0..inv.spec().len() {
        let y = inv.spec().node(i);
        inv.apply(&y, &mut a)?;
        z.apply(&a, &mut b)?;
        worst = worst.max(max_abs(&b.iter().zip(&y).map(|(p, q)| p - q).collect::<Vec<_>>()));
    }
    Ok((Some(inv), worst))
}

/// `δ_b(v) = Db · v_base(x, b(x)) − v_fib(x, b(x))` on the grid of `b`.
/// `v` is evaluated at time 0; every graph point must lie in `total`.
pub fn infinitesimal_action(v: &dyn VectorField, b: &GridSection, total: &Box) -> Result<GridSection> {
    let (m, n) = (b.dim(), b.fiber);
    if v.dim() != m + n {
        return Err(Error::Dimension("vector field must live on the total space".into()));
    }
    let acc = if b.spec.counts.iter().all(|&c| c >= 6) { 4 } else { 2 };
    let mut partials = Vec::with_capacity(m);
    for ax in 0..m {
        partials.push(partial_derivative(&b.spec, n, &b.values, ax, 1, acc)?);
    }
    let vals = par::try_map_range(b.spec.len(), |i| {
        let mut p = b.spec.node(i);
        p.extend_from_slice(b.at_node(i));
        if !total.contains(&p, 1e-12) {
            return Err(Error::Domain(format!("graph point {p:?} outside the field's domain")));
        }
        let mut vv = vec![0.0; m + n];
        v.eval(0.0, &p, &mut vv);
        Ok((0..n)
            .map(|c| (0..m).map(|a| partials[a][i * n + c] * vv[a]).sum::<f64>() - vv[m + c])
            .collect::<Vec<f64>>())
    })?;
    GridSection::new(b.spec.clone(), n, vals.concat())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowActionResidual {
    /// `(k, ‖e·φ_v − e − δ_e(v)‖_k)` on the target grid.
    pub norms: Vec<(usize, f64)>,
}

/// Residual of the first-order expansion of the action of the time-1 flow of `v`.
/// The target grid `w` must be a sub-lattice of `e`'s grid.
pub fn flow_action_residual(
    e: &GridSection,
    v: &dyn VectorField,
    w: &GridSpec,
    total: &Box,
    k_max: usize,
    flow_params: &FlowParams,
) -> Result<FlowActionResidual> {
    let phi = FlowMap { field: v, t0: 0.0, t1: 1.0, inside: total.clone(), params: *flow_params };
    let params = ActParams { with_inverse: false, ..ActParams::default() };
    let (acted, _) = act(e, &phi, w, &params)?;
    let delta = infinitesimal_action(v, e, total)?.restrict(&w.domain)?;
    let base = e.restrict(&w.domain)?;
    let resid = GridSection { values: (0..acted.values.len()).map(|i| acted.values[i] - base.values[i] - delta.values[i]).collect(), ..acted };
    let norms = (0..=k_max).map(|k| Ok((k, ck_norm(&resid, k, &w.domain)?.value))).collect::<Result<_>>()?;
    Ok(FlowActionResidual { norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{FnField, FnMap};

    fn line(n: usize) -> GridSpec {
        GridSpec::uniform(Box::cube(1, 1.0), n).unwrap()
    }

    #[test]
    fn identity_action() {
        let e = GridSection::from_scalar_fn(line(41), |x| 0.1 * x[0] * x[0]);
        let id = FnMap { dim: 2, f: |p: &[f64], o: &mut [f64]| o.copy_from_slice(p) };
        let w = line(41).sub_lattice(&Box::cube(1, 0.5)).unwrap().0;
        let (out, cert) = act(&e, &id, &w, &ActParams::default()).unwrap();
        assert!(out.sub(&e.restrict(&w.domain).unwrap()).unwrap().max_abs() < 1e-15);
        assert!(cert.base_map.disp.max_abs() < 1e-15);
    }

    #[test]
    fn rotation_of_the_axis() {
        let th: f64 = 0.1;
        let e = GridSection::zeros(line(81), 1);
        let rot = FnMap { dim: 2, f: move |p: &[f64], o: &mut [f64]| {
            o[0] = p[0] * th.cos() - p[1] * th.sin();
            o[1] = p[0] * th.sin() + p[1] * th.cos();
        } };
        let w = GridSpec::uniform(Box::cube(1, 0.8), 33).unwrap();
        let (out, cert) = act(&e, &rot, &w, &ActParams::default()).unwrap();
        for i in 0..w.len() {
            let x = w.node(i)[0];
            assert!((out.values[i] + th.tan() * x).abs() < 1e-8);
        }
        assert!(cert.inverse_residual < 1e-9);
    }

    #[test]
    fn fiber_preserving_map_is_pullback() {
        // φ(x, y) = (x + 0.1 sin x, y + 0.05 x): e·φ(x) = e(φ0(x)) − 0.05 x
        let e = GridSection::from_scalar_fn(GridSpec::uniform(Box::cube(1, 1.5), 301).unwrap(), |x| x[0].cos());
        let phi = FnMap { dim: 2, f: |p: &[f64], o: &mut [f64]| {
            o[0] = p[0] + 0.1 * p[0].sin();
            o[1] = p[1] + 0.05 * p[0];
        } };
        let w = GridSpec::uniform(Box::cube(1, 1.0), 41).unwrap();
        let (out, _) = act(&e, &phi, &w, &ActParams::default()).unwrap();
        for i in 0..w.len() {
            let x = w.node(i)[0];
            assert!((out.values[i] - ((x + 0.1 * x.sin()).cos() - 0.05 * x)).abs() < 1e-8);
        }
    }

    #[test]
    fn vertical_and_horizontal_fields() {
        let b = GridSection::from_scalar_fn(line(201), |x| x[0] * x[0]);
        let total = Box::cube(2, 3.0);
        let vert = FnField { dim: 2, f: |_t: f64, p: &[f64], o: &mut [f64]| {
            o[0] = 0.0;
            o[1] = p[0] + 1.0;
        } };
        let d = infinitesimal_action(&vert, &b, &total).unwrap();
        for i in 0..201 {
            assert!((d.values[i] + b.spec.node(i)[0] + 1.0).abs() < 1e-14);
        }
        let horiz = FnField { dim: 2, f: |_t: f64, _p: &[f64], o: &mut [f64]| {
            o[0] = 1.0;
            o[1] = 0.0;
        } };
        let d = infinitesimal_action(&horiz, &b, &total).unwrap();
        for i in 0..201 {
            assert!((d.values[i] - 2.0 * b.spec.node(i)[0]).abs() < 1e-10);
        }
        let flat = GridSection::zeros(line(21), 1);
        assert_eq!(infinitesimal_action(&horiz, &flat, &total).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn incompatible_map() {
        // collapses the fiber direction: no transversal solution
        let e = GridSection::zeros(line(21), 1);
        let phi = FnMap { dim: 2, f: |p: &[f64], o: &mut [f64]| {
            o[0] = p[0];
            o[1] = 0.0 * p[1] + 1.0;
        } };
        let w = GridSpec::uniform(Box::cube(1, 0.5), 11).unwrap();
        assert!(matches!(act(&e, &phi, &w, &ActParams::default()), Err(Error::Incompatible(_))));
    }
}
