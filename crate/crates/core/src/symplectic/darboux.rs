//! Darboux normalization of a planar area form `(1 + g) dx ∧ dy` by the
//! Nash–Moser engine, with the classical Moser path as a reference solver.

use crate::calculus::{flow, infinite_compose, FlowParams, FnField, NearIdentityMap};
use crate::error::{Error, Result};
use crate::grid::{ck_norm, partial_derivative, Box, GridSection, GridSpec, NestedDomain};
use crate::nashmoser::{run, ConstantsSchedule, InstanceConstants, PdeInstance, RunReport, Stopping};
use crate::numerics::quad::gauss_legendre_on;
use crate::par;
use crate::smoothing::{smooth, Mollifier};
use nalgebra::DMatrix;

const QUAD_NODES: usize = 24;

/// `a(x) = ∫_0^1 t g(t x) dt`, so that `d(a · (x dy − y dx)) = g dx ∧ dy`.
pub fn radial_average(g: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64]) -> f64 {
    let (ts, ws) = gauss_legendre_on(QUAD_NODES, 0.0, 1.0);
    ts.iter().zip(&ws).map(|(t, w)| w * t * g(&[t * x[0], t * x[1]])).sum()
}

/// `(1 + g∘φ) det Dφ − 1` on the grid of `φ`, with `Dφ` by fourth-order differences.
pub fn pullback_coefficient(g: &(dyn Fn(&[f64]) -> f64 + Sync), phi: &NearIdentityMap) -> Result<GridSection> {
    let spec = phi.spec().clone();
    if spec.dim() != 2 {
        return Err(Error::Dimension("area forms live in dimension 2".into()));
    }
    let vals = &phi.disp.values;
    let dx = partial_derivative(&spec, 2, vals, 0, 1, 4)?;
    let dy = partial_derivative(&spec, 2, vals, 1, 1, 4)?;
    let out = par::map_range(spec.len(), |i| {
        let x = spec.node(i);
        let y = [x[0] + vals[2 * i], x[1] + vals[2 * i + 1]];
        let det = (1.0 + dx[2 * i]) * (1.0 + dy[2 * i + 1]) - dy[2 * i] * dx[2 * i + 1];
        (1.0 + g(&y)) * det - 1.0
    });
    GridSection::new(spec, 1, out)
}

/// The form `ω_can + g dx ∧ dy` on a square lattice, acted on by
/// time-one flows. Sections are coefficient grids on the lattice boxes of
/// `D_ρ`; generators are vector fields; symmetries are near-identity maps.
#[derive(Debug, Clone)]
pub struct DarbouxInstance {
    base: GridSpec,
    domain: NestedDomain,
    mollifier: Mollifier,
    pub flow_params: FlowParams,
    pub theta: f64,
}

impl DarbouxInstance {
    /// `base` must be a square centered at the origin; it is `D_1`, and
    /// `D_0` is the concentric square of half the width.
    pub fn new(base: GridSpec) -> Result<Self> {
        if base.dim() != 2 {
            return Err(Error::Dimension("Darboux instance is planar".into()));
        }
        let hw = 0.5 * (base.domain.hi[0] - base.domain.lo[0]);
        let centered = (0..2).all(|a| (base.domain.hi[a] + base.domain.lo[a]).abs() < 1e-12 && (base.domain.hi[a] - hw).abs() < 1e-12);
        if !centered {
            return Err(Error::Domain("base grid must be a square centered at the origin".into()));
        }
        let domain = NestedDomain::new(vec![0.0; 2], vec![hw / 2.0; 2], vec![hw / 2.0; 2])?;
        Ok(Self { base, domain, mollifier: Mollifier::default(), flow_params: FlowParams::default(), theta: 1.0 })
    }

    pub fn base(&self) -> &GridSpec {
        &self.base
    }

    pub fn spacing(&self) -> f64 {
        self.base.spacing(0)
    }

    /// `D_ρ`.
    pub fn region(&self, rho: f64) -> Box {
        self.domain.at_unchecked(rho)
    }

    /// Lattice nodes covering `D_ρ` plus two cells, clipped to the base grid.
    /// The extra cells keep maps of later steps inside the domains of earlier ones.
    pub fn lattice(&self, rho: f64) -> Result<GridSpec> {
        let pad = 2.0 * self.spacing() + 1e-9;
        let d = self.region(rho);
        let b = Box::new(
            d.lo.iter().zip(&self.base.domain.lo).map(|(a, l)| (a - pad).max(*l)).collect(),
            d.hi.iter().zip(&self.base.domain.hi).map(|(a, h)| (a + pad).min(*h)).collect(),
        )?;
        Ok(self.base.sub_lattice(&b)?.0)
    }

    /// Lattice nodes inside `D_ρ` exactly.
    pub fn tight_lattice(&self, rho: f64) -> Result<GridSpec> {
        Ok(self.base.sub_lattice(&self.region(rho))?.0)
    }

    /// `g` sampled on the base grid.
    pub fn section<F: Fn(&[f64]) -> f64 + Sync + Send>(&self, g: F) -> GridSection {
        GridSection::from_scalar_fn(self.base.clone(), g)
    }

    fn field(&self, v: &GridSection, r: f64) -> Result<GridSection> {
        if v.fiber != 2 {
            return Err(Error::Dimension("generator must be a planar vector field".into()));
        }
        let _ = r;
        Ok(v.clone())
    }
}

fn sup_on(e: &GridSection, b: &Box) -> f64 {
    e.sup_norm_on(b)
}

impl PdeInstance for DarbouxInstance {
    type Section = GridSection;
    type Generator = GridSection;
    type Symmetry = NearIdentityMap;

    fn name(&self) -> String {
        format!("darboux({}x{})", self.base.counts[0], self.base.counts[1])
    }

    fn constants(&self) -> InstanceConstants {
        InstanceConstants { d: 1, l1: 0, l2: 0 }
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn equation_tolerance(&self) -> f64 {
        1e-8
    }

    fn norm(&self, e: &GridSection, k: usize, r: f64) -> Result<f64> {
        Ok(ck_norm(e, k, &self.region(r))?.value)
    }

    fn scale(&self, e: &GridSection, c: f64) -> GridSection {
        e.scaled(c)
    }

    /// `S_t` while the lattice resolves the kernel (`t ≤ 1/(4h)`), identity beyond.
    fn smooth(&self, e: &GridSection, t: f64, _s: f64) -> Result<GridSection> {
        if t * self.spacing() <= 0.25 {
            smooth(e, t, &self.mollifier)
        } else {
            Ok(e.clone())
        }
    }

    /// `v = a(x) · x` on the lattice of `D_r`; `L_v ω_can = e` for every coefficient `e`.
    fn homotopy(&self, e: &GridSection, _s: f64, r: f64) -> Result<GridSection> {
        let spec = self.lattice(r)?;
        let g = |y: &[f64]| e.eval(y)[0];
        Ok(GridSection::from_fn(spec, 2, |x, o| {
            let a = radial_average(&g, x);
            o[0] = a * x[0];
            o[1] = a * x[1];
        }))
    }

    fn negate(&self, v: GridSection) -> GridSection {
        v.scaled(-1.0)
    }

    fn generator_norm(&self, v: &GridSection, k: usize, r: f64) -> Result<f64> {
        Ok(ck_norm(v, k, &self.region(r))?.value)
    }

    fn flow(&self, v: &GridSection, r: f64, s_next: f64) -> Result<NearIdentityMap> {
        let field = self.field(v, r)?;
        let h = self.spacing();
        let inside = Box::new(field.domain().lo.iter().map(|a| a - 2.0 * h).collect(), field.domain().hi.iter().map(|b| b + 2.0 * h).collect())?;
        flow(&field, 1.0, &self.lattice(s_next)?, &inside, &self.flow_params)
    }

    fn act(&self, e: &GridSection, phi: &NearIdentityMap, _s_next: f64) -> Result<GridSection> {
        pullback_coefficient(&|y: &[f64]| e.eval(y)[0], phi)
    }

    fn compose_all(&self, maps: &[NearIdentityMap], r: f64) -> Result<NearIdentityMap> {
        let target = self.tight_lattice(r)?;
        if maps.is_empty() {
            return Ok(NearIdentityMap::identity(target));
        }
        Ok(infinite_compose(maps, &target)?.map)
    }

    fn symmetry_norm(&self, psi: &NearIdentityMap, k: usize) -> Result<f64> {
        psi.norm(k)
    }

    fn pullback_residual(&self, e: &GridSection, psi: &NearIdentityMap, r: f64) -> Result<f64> {
        Ok(sup_on(&pullback_coefficient(&|y: &[f64]| e.eval(y)[0], psi)?, &self.region(r)))
    }

    /// `d(ω + e)` is a 3-form, which vanishes identically on a surface.
    fn equation_residual(&self, _e: &GridSection, _r: f64) -> Result<f64> {
        Ok(0.0)
    }

    /// `Q = d` is linear, so `Q(e) − δ_0 e = 0`.
    fn quadratic_remainder(&self, _e: &GridSection, _k: usize, _r: f64) -> Result<f64> {
        Ok(0.0)
    }

    /// `sup_{D_r} |div h_1(w) − w|`; the `h_2 δ` term vanishes since `δ w = dw = 0`.
    fn homotopy_residual(&self, w: &GridSection, s: f64, r: f64) -> Result<f64> {
        let v = self.homotopy(w, s, r)?;
        let dx = partial_derivative(&v.spec, 2, &v.values, 0, 1, 4)?;
        let dy = partial_derivative(&v.spec, 2, &v.values, 1, 1, 4)?;
        let region = self.region(r);
        let tol = 1e-9 * self.spacing();
        let mut worst: f64 = 0.0;
        for i in 0..v.spec.len() {
            let x = v.spec.node(i);
            if region.contains(&x, tol) {
                worst = worst.max((dx[2 * i] + dy[2 * i + 1] - w.eval(&x)[0]).abs());
            }
        }
        Ok(worst)
    }

    fn symmetry_json(&self, psi: &NearIdentityMap) -> serde_json::Value {
        serde_json::json!({ "near_identity_map": psi.disp })
    }
}

/// `L` with `Lᵀ W L = W_can` for a constant nondegenerate antisymmetric `W`,
/// by symplectic Gram–Schmidt; `x ↦ L x` pulls `ω_W` back to `ω_can`.
pub fn linear_darboux(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = w.nrows();
    if !m.is_multiple_of(2) || w.ncols() != m {
        return Err(Error::Dimension(format!("ω must be 2n×2n, got {}×{}", m, w.ncols())));
    }
    if (w + w.transpose()).amax() > 1e-12 * w.amax().max(1.0) {
        return Err(Error::Domain("ω is not antisymmetric".into()));
    }
    let n = m / 2;
    let om = |a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>| (a.transpose() * w * b)[0];
    let mut pool: Vec<nalgebra::DVector<f64>> = (0..m).map(|i| nalgebra::DVector::from_fn(m, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    for _ in 0..n {
        let e = pool.remove(0);
        let (idx, val) = pool.iter().enumerate().map(|(i, f)| (i, om(&e, f))).fold((0, 0.0_f64), |b, (i, v)| if v.abs() > b.1.abs() { (i, v) } else { b });
        if val.abs() < 1e-12 {
            return Err(Error::Domain("ω is degenerate".into()));
        }
        let f = pool.remove(idx) / val;
        for u in pool.iter_mut() {
            let (a, b) = (om(u, &f), om(&e, u));
            *u = &*u - &e * a - &f * b;
        }
        es.push(e);
        fs.push(f);
    }
    let mut l = DMatrix::zeros(m, m);
    for i in 0..n {
        l.set_column(i, &es[i]);
        l.set_column(n + i, &fs[i]);
    }
    Ok(l)
}

/// Classical Moser path for `ω_t = ω_can + t g dx∧dy`: integrates
/// `v_t = −a(x) x / (1 + t g(x))` from 0 to 1 on `target`, so that
/// `φ_1^*(ω_can + g dx∧dy) = ω_can`.
pub fn moser_path(g: &(dyn Fn(&[f64]) -> f64 + Sync), target: &GridSpec, inside: &Box, params: &FlowParams) -> Result<NearIdentityMap> {
    let field = FnField {
        dim: 2,
        f: |t: f64, x: &[f64], out: &mut [f64]| {
            let c = -radial_average(g, x) / (1.0 + t * g(x));
            out[0] = c * x[0];
            out[1] = c * x[1];
        },
    };
    flow(&field, 1.0, target, inside, params)
}

/// Outcome of [`darboux_solve`].
#[derive(Debug, Clone)]
pub struct DarbouxSolution {
    pub map: NearIdentityMap,
    /// `sup_{D_{r_∞}} |φ^*ω / ω_can − 1|`.
    pub residual: f64,
    pub run: Option<RunReport>,
}

/// Finds `φ` on `D_{r_∞}` with `φ^*ω = ω_can`, for `ω = f dx∧dy` sampled on a
/// square lattice centered at the origin (the lattice box is `D_1`).
/// Constant `f` is handled by the linear factor alone.
pub fn darboux_solve(omega: &GridSection, schedule: &ConstantsSchedule, stopping: &Stopping) -> Result<DarbouxSolution> {
    if omega.fiber != 1 {
        return Err(Error::Dimension("ω must be given by its dx∧dy coefficient".into()));
    }
    let instance = DarbouxInstance::new(omega.spec.clone())?;
    let (lo, hi) = omega.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if lo <= 0.0 {
        return Err(Error::Domain(format!("ω degenerates or changes orientation (min coefficient {lo:.3e})")));
    }
    let target = instance.tight_lattice(schedule.r_inf())?;
    if hi - lo <= 1e-14 * hi && (lo - 1.0).abs() > 1e-14 {
        let c = 0.5 * (lo + hi);
        let w = DMatrix::from_row_slice(2, 2, &[0.0, c, -c, 0.0]);
        let l = linear_darboux(&w)?;
        let map = NearIdentityMap::from_displacement(target, move |x, o| {
            o[0] = l[(0, 0)] * x[0] + l[(0, 1)] * x[1] - x[0];
            o[1] = l[(1, 0)] * x[0] + l[(1, 1)] * x[1] - x[1];
        });
        let residual = sup_on(&pullback_coefficient(&|_: &[f64]| c - 1.0, &map)?, map.domain());
        return Ok(DarbouxSolution { map, residual, run: None });
    }
    let e = omega.map_values(|v| v - 1.0);
    let (map, report) = run(&instance, e, schedule, stopping)?;
    Ok(DarbouxSolution { residual: report.final_residual, map, run: Some(report) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_average_of_constant() {
        assert!((radial_average(&|_| 3.0, &[0.7, -0.2]) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn linear_factor_is_symplectic() {
        let w = DMatrix::from_row_slice(4, 4, &[0.0, 2.0, 1.0, 0.0, -2.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 3.0, 0.0, -1.0, -3.0, 0.0]);
        let l = linear_darboux(&w).unwrap();
        let can = DMatrix::from_row_slice(4, 4, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        assert!((l.transpose() * &w * &l - can).amax() < 1e-12);
    }

    #[test]
    fn constant_form_needs_no_iteration() {
        let base = GridSpec::uniform(Box::cube(2, 2.0), 33).unwrap();
        let omega = GridSection::from_scalar_fn(base, |_| 2.5);
        let sched = ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, InstanceConstants { d: 1, l1: 0, l2: 0 }, 10).unwrap();
        let sol = darboux_solve(&omega, &sched, &Stopping::new(1e-6)).unwrap();
        assert!(sol.run.is_none());
        assert!(sol.residual < 1e-12);
    }
}
