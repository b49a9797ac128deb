//! Near-identity maps, flows of vector fields and the action of maps on
//! graph sections, with the diagnostics used by the local estimate checks.

mod action;
mod compose;
mod flow;
mod infinite;

pub use action::{act, flow_action_residual, infinitesimal_action, ActParams, CompatibilityCertificate, FlowActionResidual};
pub use compose::{compose, invert, invert_with};
pub use flow::{
    flow, flow_point, iterated_flow_convergence, FlowMap, FlowParams, Frozen, FnField, TimeDepVectorField, VectorField,
};
pub use infinite::{infinite_compose, InfiniteComposition};

use crate::error::{Error, Result};
use crate::grid::{ck_norm, Box, GridSection, GridSpec};
use nalgebra::{DMatrix, DVector};

/// Default smallness threshold θ.
pub const DEFAULT_THETA: f64 = 0.05;

/// A smooth map `R^m → R^m` that can be evaluated pointwise.
pub trait Map: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Row-major Jacobian, `jac[i * m + j] = ∂_j out_i`. Central differences by default.
    fn jacobian(&self, x: &[f64], jac: &mut [f64]) -> Result<()> {
        let m = self.dim();
        let step = 1e-6;
        let mut xp = x.to_vec();
        let (mut fp, mut fm) = (vec![0.0; m], vec![0.0; m]);
        for j in 0..m {
            xp[j] = x[j] + step;
            self.apply(&xp, &mut fp)?;
            xp[j] = x[j] - step;
            self.apply(&xp, &mut fm)?;
            xp[j] = x[j];
            for i in 0..m {
                jac[i * m + j] = (fp[i] - fm[i]) / (2.0 * step);
            }
        }
        Ok(())
    }
}

/// Map given by a closure.
pub struct FnMap<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> Map for FnMap<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(x, out);
        Ok(())
    }
}

/// `id + f` on a box, with the displacement `f` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NearIdentityMap {
    pub disp: GridSection,
}

impl NearIdentityMap {
    pub fn new(disp: GridSection) -> Result<Self> {
        if disp.fiber != disp.dim() {
            return Err(Error::Dimension(format!(
                "displacement has fiber {} over a {}-dimensional base",
                disp.fiber,
                disp.dim()
            )));
        }
        Ok(Self { disp })
    }

    pub fn identity(spec: GridSpec) -> Self {
        let m = spec.dim();
        Self { disp: GridSection::zeros(spec, m) }
    }

    /// Samples `x ↦ x + f(x)` from a displacement function.
    pub fn from_displacement<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        let m = spec.dim();
        Self { disp: GridSection::from_fn(spec, m, f) }
    }

    /// Samples an arbitrary map on the grid of `spec`.
    pub fn sample(spec: GridSpec, map: &dyn Map) -> Result<Self> {
        let m = spec.dim();
        let vals = crate::par::try_map_range(spec.len(), |i| {
            let x = spec.node(i);
            let mut y = vec![0.0; m];
            map.apply(&x, &mut y)?;
            Ok(y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<f64>>())
        })?;
        Ok(Self { disp: GridSection::new(spec, m, vals.concat())? })
    }

    pub fn domain(&self) -> &Box {
        self.disp.domain()
    }

    pub fn spec(&self) -> &GridSpec {
        &self.disp.spec
    }

    /// `‖f‖_{k}` over the whole sampled box.
    pub fn norm(&self, k: usize) -> Result<f64> {
        Ok(ck_norm(&self.disp, k, self.domain())?.value)
    }

    pub fn norm_on(&self, k: usize, b: &Box) -> Result<f64> {
        Ok(ck_norm(&self.disp, k, b)?.value)
    }
}

impl Map for NearIdentityMap {
    fn dim(&self) -> usize {
        self.disp.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let tol = 1e-9;
        if !self.domain().contains(x, tol) {
            return Err(Error::Domain(format!("point {x:?} outside the map's domain {:?}", self.domain())));
        }
        self.disp.eval_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += xi;
        }
        Ok(())
    }

    fn jacobian(&self, x: &[f64], jac: &mut [f64]) -> Result<()> {
        let m = self.dim();
        let mut val = vec![0.0; m];
        self.disp.eval_with_jacobian(x, &mut val, jac);
        for i in 0..m {
            jac[i * m + i] += 1.0;
        }
        Ok(())
    }
}

/// Solves the `m × m` system `a · x = b` (row-major `a`).
pub(crate) fn solve_small(m: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    if m == 1 {
        return if a[0] == 0.0 { None } else { Some(vec![b[0] / a[0]]) };
    }
    let mat = DMatrix::from_row_slice(m, m, a);
    mat.lu().solve(&DVector::from_column_slice(b)).map(|v| v.iter().copied().collect())
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
