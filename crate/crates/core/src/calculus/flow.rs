use super::{max_abs, Map, NearIdentityMap};
use crate::error::{Error, Result};
use crate::grid::{ck_norm, Box, GridSection, GridSpec};
use crate::numerics::interp::lagrange_stencil;
use crate::par;

/// Time-dependent vector field on `R^m`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);
}

/// A grid section with fiber `m` over an `m`-dimensional box is an autonomous field.
impl VectorField for GridSection {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.eval_into(x, out)
    }
}

/// Field given by a closure `(t, x, out)`.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.f)(t, x, out)
    }
}

/// The autonomous field `x ↦ v(at, x)`.
pub struct Frozen<'a, V: ?Sized> {
    pub field: &'a V,
    pub at: f64,
}

impl<V: VectorField + ?Sized> VectorField for Frozen<'_, V> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn eval(&self, _t: f64, x: &[f64], out: &mut [f64]) {
        self.field.eval(self.at, x, out)
    }
}

/// Sections `v^{t_i}` on a uniform time grid over `[0, 1]`, interpolated
/// cubically in time.
#[derive(Debug, Clone)]
pub struct TimeDepVectorField {
    pub slices: Vec<GridSection>,
}

impl TimeDepVectorField {
    pub fn new(slices: Vec<GridSection>) -> Result<Self> {
        if slices.len() < 2 {
            return Err(Error::Resolution("need at least two time slices".into()));
        }
        let spec = &slices[0].spec;
        if slices.iter().any(|s| &s.spec != spec || s.fiber != spec.dim()) {
            return Err(Error::Dimension("time slices must share one grid and have fiber = dimension".into()));
        }
        Ok(Self { slices })
    }

    pub fn from_fn<F>(spec: GridSpec, steps: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Sync + Send,
    {
        let m = spec.dim();
        let slices = (0..=steps)
            .map(|i| {
                let t = i as f64 / steps as f64;
                GridSection::from_fn(spec.clone(), m, |x, o| f(t, x, o))
            })
            .collect();
        Self::new(slices)
    }

    /// `sup_t ‖v^t‖_k` over the time grid.
    pub fn sup_norm(&self, k: usize) -> Result<f64> {
        let mut best: f64 = 0.0;
        for s in &self.slices {
            best = best.max(ck_norm(s, k, s.domain())?.value);
        }
        Ok(best)
    }
}

impl VectorField for TimeDepVectorField {
    fn dim(&self) -> usize {
        self.slices[0].dim()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.slices.len();
        let st = lagrange_stencil(0.0, 1.0 / (n - 1) as f64, n, t, 4);
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut tmp = vec![0.0; out.len()];
        for j in 0..st.len {
            if st.w[j] == 0.0 {
                continue;
            }
            self.slices[st.start + j].eval_into(x, &mut tmp);
            for (o, v) in out.iter_mut().zip(&tmp) {
                *o += st.w[j] * v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Target for the Richardson error estimate per trajectory.
    pub tol: f64,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self { tol: 1e-11, min_steps: 8, max_steps: 1 << 16 }
    }
}

fn rk4(v: &dyn VectorField, x0: &[f64], t0: f64, t1: f64, steps: usize, inside: &Box) -> Result<Vec<f64>> {
    let m = x0.len();
    let h = (t1 - t0) / steps as f64;
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    let check = |p: &[f64]| -> Result<()> {
        if inside.contains(p, 1e-12) {
            Ok(())
        } else {
            Err(Error::Escape(format!("trajectory from {x0:?} reached {p:?}")))
        }
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        v.eval(t, &x, &mut k1);
        for i in 0..m {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        check(&tmp)?;
        v.eval(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..m {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        check(&tmp)?;
        v.eval(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..m {
            tmp[i] = x[i] + h * k3[i];
        }
        check(&tmp)?;
        v.eval(t + h, &tmp, &mut k4);
        for i in 0..m {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check(&x)?;
    }
    Ok(x)
}

/// Integrates `x' = v(t, x)` from `t0` to `t1`, doubling the RK4 step count
/// until the Richardson estimate is below tolerance; returns the extrapolated end point.
pub fn flow_point(v: &dyn VectorField, x0: &[f64], t0: f64, t1: f64, inside: &Box, params: &FlowParams) -> Result<Vec<f64>> {
    if t0 == t1 {
        return Ok(x0.to_vec());
    }
    let mut n = params.min_steps;
    let mut coarse = rk4(v, x0, t0, t1, n, inside)?;
    loop {
        let fine = rk4(v, x0, t0, t1, 2 * n, inside)?;
        let diff: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (f - c) / 15.0).collect();
        if max_abs(&diff) <= params.tol * (1.0 + max_abs(&fine)) || 2 * n >= params.max_steps {
            return Ok(fine.iter().zip(&diff).map(|(f, d)| f + d).collect());
        }
        n *= 2;
        coarse = fine;
    }
}

/// `φ_v^t` sampled on the grid `b`, trajectories confined to the domain `c`.
pub fn flow(v: &dyn VectorField, t: f64, b: &GridSpec, c: &Box, params: &FlowParams) -> Result<NearIdentityMap> {
    let m = b.dim();
    if v.dim() != m {
        return Err(Error::Dimension("vector field and grid dimensions differ".into()));
    }
    let vals = par::try_map_range(b.len(), |i| {
        let x = b.node(i);
        let y = flow_point(v, &x, 0.0, t, c, params)?;
        Ok(y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<f64>>())
    })?;
    NearIdentityMap::new(GridSection::new(b.clone(), m, vals.concat())?)
}

/// Flow of a field as a pointwise [`Map`], without sampling on a grid.
pub struct FlowMap<'a> {
    pub field: &'a dyn VectorField,
    pub t0: f64,
    pub t1: f64,
    pub inside: Box,
    pub params: FlowParams,
}

impl Map for FlowMap<'_> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let y = flow_point(self.field, x, self.t0, self.t1, &self.inside, &self.params)?;
        out.copy_from_slice(&y);
        Ok(())
    }
}

/// Errors `‖(φ_v^{t/n})^n − φ_{v^0}^t‖_k` on `b` for each `n` in `splits`,
/// where `φ_v^{t/n}` is the flow of the time-dependent field from 0 to `t/n`
/// and `φ_{v^0}^t` the flow of the field frozen at time 0.
pub fn iterated_flow_convergence(
    v: &dyn VectorField,
    t: f64,
    splits: &[usize],
    b: &GridSpec,
    c: &Box,
    k: usize,
    params: &FlowParams,
) -> Result<Vec<(usize, f64)>> {
    let frozen = Frozen { field: v, at: 0.0 };
    let reference = flow(&frozen, t, b, c, params)?;
    let mut out = Vec::new();
    for &n in splits {
        let m = b.dim();
        let vals = par::try_map_range(b.len(), |i| {
            let x0 = b.node(i);
            let mut x = x0.clone();
            for _ in 0..n {
                x = flow_point(v, &x, 0.0, t / n as f64, c, params)?;
            }
            Ok(x.iter().zip(&x0).map(|(a, b)| a - b).collect::<Vec<f64>>())
        })?;
        let iterated = GridSection::new(b.clone(), m, vals.concat())?;
        let diff = iterated.sub(&reference.disp)?;
        out.push((n, ck_norm(&diff, k, &b.domain)?.value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_translates() {
        let v = FnField { dim: 2, f: |_t: f64, _x: &[f64], o: &mut [f64]| {
            o[0] = 0.1;
            o[1] = -0.2;
        } };
        let b = GridSpec::uniform(Box::cube(2, 1.0), 5).unwrap();
        let phi = flow(&v, 0.5, &b, &Box::cube(2, 2.0), &FlowParams::default()).unwrap();
        for i in 0..b.len() {
            let d = phi.disp.at_node(i);
            assert!((d[0] - 0.05).abs() < 1e-14 && (d[1] + 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_field_matches_matrix_exponential() {
        let a = nalgebra::Matrix2::new(0.1, -0.3, 0.2, 0.05);
        let v = FnField { dim: 2, f: move |_t: f64, x: &[f64], o: &mut [f64]| {
            o[0] = a[(0, 0)] * x[0] + a[(0, 1)] * x[1];
            o[1] = a[(1, 0)] * x[0] + a[(1, 1)] * x[1];
        } };
        let e = (a * 0.7).exp();
        let x = [0.4, -0.9];
        let y = flow_point(&v, &x, 0.0, 0.7, &Box::cube(2, 3.0), &FlowParams::default()).unwrap();
        let want = e * nalgebra::Vector2::new(x[0], x[1]);
        assert!((y[0] - want[0]).abs() < 1e-10 && (y[1] - want[1]).abs() < 1e-10);
    }

    #[test]
    fn escape_is_reported() {
        let v = FnField { dim: 1, f: |_t: f64, _x: &[f64], o: &mut [f64]| o[0] = 5.0 };
        let r = flow_point(&v, &[0.0], 0.0, 1.0, &Box::cube(1, 1.0), &FlowParams::default());
        assert!(matches!(r, Err(Error::Escape(_))));
    }

    #[test]
    fn group_law_for_autonomous_fields() {
        let v = FnField { dim: 1, f: |_t: f64, x: &[f64], o: &mut [f64]| o[0] = 0.3 * x[0].sin() };
        let c = Box::cube(1, 3.0);
        let p = FlowParams::default();
        let x = [0.7];
        let a = flow_point(&v, &flow_point(&v, &x, 0.0, 0.3, &c, &p).unwrap(), 0.0, 0.5, &c, &p).unwrap();
        let b = flow_point(&v, &x, 0.0, 0.8, &c, &p).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);
    }
}
