use super::Box;
use crate::error::{Error, Result};
use crate::numerics::interp::{lagrange_stencil, Stencil1};
use crate::par;
use serde::{Deserialize, Serialize};

/// Uniform tensor grid on a box: `counts[i]` nodes on axis `i`, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: Box,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(domain: Box, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != domain.dim() {
            return Err(Error::Dimension(format!("{} counts for a {}-dimensional box", counts.len(), domain.dim())));
        }
        if counts.iter().any(|&n| n < 2) {
            return Err(Error::Resolution("every axis needs at least two nodes".into()));
        }
        Ok(Self { domain, counts })
    }

    /// Same count on every axis.
    pub fn uniform(domain: Box, n: usize) -> Result<Self> {
        let m = domain.dim();
        Self::new(domain, vec![n; m])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.domain.hi[axis] - self.domain.lo[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.domain.hi[axis]
        } else {
            self.domain.lo[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Row-major multi-index of a flat node index (last axis fastest).
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for ax in (0..self.dim()).rev() {
            out[ax] = flat % self.counts[ax];
            flat /= self.counts[ax];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        idx.iter().enumerate().map(|(ax, &i)| self.coord(ax, i)).collect()
    }

    /// Grid with the same spacing covering the lattice nodes inside `b`.
    pub fn sub_lattice(&self, b: &Box) -> Result<(GridSpec, Vec<usize>)> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut counts = Vec::new();
        let mut offsets = Vec::new();
        for ax in 0..self.dim() {
            let h = self.spacing(ax);
            let a = self.domain.lo[ax];
            let first = ((b.lo[ax] - a) / h - 1e-9).ceil().max(0.0) as usize;
            let last = (((b.hi[ax] - a) / h + 1e-9).floor() as usize).min(self.counts[ax] - 1);
            if last < first + 1 {
                return Err(Error::Resolution(format!("box {b:?} holds fewer than two nodes on axis {ax}")));
            }
            lo.push(self.coord(ax, first));
            hi.push(self.coord(ax, last));
            counts.push(last - first + 1);
            offsets.push(first);
        }
        Ok((GridSpec::new(Box::new(lo, hi)?, counts)?, offsets))
    }
}

/// Vector-valued function sampled on a [`GridSpec`]; values stored row-major
/// with the fiber index fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    pub spec: GridSpec,
    pub fiber: usize,
    pub values: Vec<f64>,
    /// Points per axis of the local Lagrange interpolant (4 = cubic).
    pub interp_points: usize,
}

impl GridSection {
    pub fn new(spec: GridSpec, fiber: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() * fiber {
            return Err(Error::Dimension(format!(
                "{} values for {} nodes with fiber {}",
                values.len(),
                spec.len(),
                fiber
            )));
        }
        Ok(Self { spec, fiber, values, interp_points: 4 })
    }

    pub fn zeros(spec: GridSpec, fiber: usize) -> Self {
        let n = spec.len() * fiber;
        Self { spec, fiber, values: vec![0.0; n], interp_points: 4 }
    }

    /// Samples `f(x, out)` at every node.
    pub fn from_fn<F>(spec: GridSpec, fiber: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Sync + Send,
    {
        let mut values = vec![0.0; spec.len() * fiber];
        let sp = &spec;
        par::for_each_chunk_mut(&mut values, fiber, |i, out| f(&sp.node(i), out));
        Self { spec, fiber, values, interp_points: 4 }
    }

    pub fn from_scalar_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        Self::from_fn(spec, 1, |x, o| o[0] = f(x))
    }

    pub fn with_interp_points(mut self, p: usize) -> Self {
        self.interp_points = p.clamp(2, 8);
        self
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn domain(&self) -> &Box {
        &self.spec.domain
    }

    pub fn at_node(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.fiber..(flat + 1) * self.fiber]
    }

    fn stencils(&self, x: &[f64]) -> Vec<Stencil1> {
        (0..self.dim())
            .map(|ax| {
                lagrange_stencil(
                    self.spec.domain.lo[ax],
                    self.spec.spacing(ax),
                    self.spec.counts[ax],
                    x[ax],
                    self.interp_points,
                )
            })
            .collect()
    }

    /// Tensor-product Lagrange interpolation at `x`; exact at nodes.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let st = self.stencils(x);
        out.iter_mut().for_each(|o| *o = 0.0);
        self.tensor_sum(&st, None, out);
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.fiber];
        self.eval_into(x, &mut out);
        out
    }

    /// Value and Jacobian (`jac[c * m + ax] = ∂_ax e_c`) of the interpolant at `x`.
    pub fn eval_with_jacobian(&self, x: &[f64], val: &mut [f64], jac: &mut [f64]) {
        let st = self.stencils(x);
        val.iter_mut().for_each(|o| *o = 0.0);
        self.tensor_sum(&st, None, val);
        let m = self.dim();
        let mut col = vec![0.0; self.fiber];
        for ax in 0..m {
            col.iter_mut().for_each(|o| *o = 0.0);
            self.tensor_sum(&st, Some(ax), &mut col);
            for c in 0..self.fiber {
                jac[c * m + ax] = col[c];
            }
        }
    }

    fn tensor_sum(&self, st: &[Stencil1], deriv_axis: Option<usize>, out: &mut [f64]) {
        let m = st.len();
        let mut k = vec![0usize; m];
        let mut idx = vec![0usize; m];
        loop {
            let mut w = 1.0;
            for ax in 0..m {
                w *= if Some(ax) == deriv_axis { st[ax].dw[k[ax]] } else { st[ax].w[k[ax]] };
                idx[ax] = st[ax].start + k[ax];
            }
            if w != 0.0 {
                let flat = self.spec.ravel(&idx);
                for (o, v) in out.iter_mut().zip(self.at_node(flat)) {
                    *o += w * v;
                }
            }
            let mut ax = m;
            loop {
                if ax == 0 {
                    return;
                }
                ax -= 1;
                k[ax] += 1;
                if k[ax] < st[ax].len {
                    break;
                }
                k[ax] = 0;
            }
        }
    }

    /// Resamples onto `spec` by interpolation.
    pub fn resample(&self, spec: GridSpec) -> GridSection {
        GridSection::from_fn(spec, self.fiber, |x, o| self.eval_into(x, o)).with_interp_points(self.interp_points)
    }

    /// Restriction to `b ⊆ domain`: the lattice nodes inside `b` are copied,
    /// and if the faces of `b` are off-lattice the grid is resampled onto
    /// `b` exactly with the same node spacing.
    pub fn restrict(&self, b: &Box) -> Result<GridSection> {
        let tol = 1e-9 * (0..self.dim()).map(|a| self.spec.spacing(a)).fold(f64::INFINITY, f64::min);
        if !self.domain().contains_box(b, tol) {
            return Err(Error::Domain(format!("{b:?} is not contained in {:?}", self.domain())));
        }
        let (mut sub, offsets) = self.spec.sub_lattice(b)?;
        if sub.domain.contains_box(b, tol) {
            sub.domain = b.clone();
            let mut idx = vec![0usize; self.dim()];
            let mut values = Vec::with_capacity(sub.len() * self.fiber);
            for flat in 0..sub.len() {
                sub.unravel(flat, &mut idx);
                for (i, o) in idx.iter_mut().zip(&offsets) {
                    *i += o;
                }
                values.extend_from_slice(self.at_node(self.spec.ravel(&idx)));
            }
            return Ok(GridSection { spec: sub, fiber: self.fiber, values, interp_points: self.interp_points });
        }
        let counts: Vec<usize> = (0..self.dim())
            .map(|ax| (((b.hi[ax] - b.lo[ax]) / self.spec.spacing(ax)).round() as usize + 1).max(2))
            .collect();
        Ok(self.resample(GridSpec::new(b.clone(), counts)?))
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> GridSection {
        GridSection { values: self.values.iter().map(|v| f(*v)).collect(), ..self.clone() }
    }

    pub fn scaled(&self, a: f64) -> GridSection {
        self.map_values(|v| a * v)
    }

    fn check_same(&self, other: &GridSection) -> Result<()> {
        if self.spec != other.spec || self.fiber != other.fiber {
            return Err(Error::Dimension("sections live on different grids".into()));
        }
        Ok(())
    }

    /// `a·self + other`.
    pub fn axpy(&self, a: f64, other: &GridSection) -> Result<GridSection> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + y).collect();
        Ok(GridSection { values, ..self.clone() })
    }

    pub fn add(&self, other: &GridSection) -> Result<GridSection> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridSection) -> Result<GridSection> {
        other.axpy(-1.0, self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest Euclidean fiber norm over the nodes inside `b`.
    pub fn sup_norm_on(&self, b: &Box) -> f64 {
        let tol = 1e-9;
        (0..self.spec.len())
            .filter(|&i| b.contains(&self.spec.node(i), tol))
            .map(|i| self.at_node(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2(n: usize) -> GridSpec {
        GridSpec::uniform(Box::cube(2, 2.0), n).unwrap()
    }

    #[test]
    fn ravel_roundtrip_and_nodes() {
        let s = GridSpec::new(Box::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap(), vec![3, 5]).unwrap();
        let mut idx = [0; 2];
        for f in 0..s.len() {
            s.unravel(f, &mut idx);
            assert_eq!(s.ravel(&idx), f);
        }
        assert_eq!(s.node(7), vec![0.5, 0.0]);
    }

    #[test]
    fn node_evaluation_returns_samples() {
        let e = GridSection::from_fn(spec2(17), 2, |x, o| {
            o[0] = (x[0] * 1.3).sin() * x[1];
            o[1] = x[0].exp();
        });
        for flat in [0, 5, 100, 288] {
            let x = e.spec.node(flat);
            assert_eq!(e.eval(&x), e.at_node(flat).to_vec());
        }
    }

    #[test]
    fn interpolation_and_jacobian_of_cubic() {
        let f = |x: &[f64]| x[0] * x[0] * x[1] - 2.0 * x[1] * x[1] * x[1] + x[0];
        let e = GridSection::from_scalar_fn(spec2(21), f);
        let x = [0.337, -1.21];
        let (mut v, mut j) = ([0.0], [0.0; 2]);
        e.eval_with_jacobian(&x, &mut v, &mut j);
        assert!((v[0] - f(&x)).abs() < 1e-12);
        assert!((j[0] - (2.0 * x[0] * x[1] + 1.0)).abs() < 1e-10);
        assert!((j[1] - (x[0] * x[0] - 6.0 * x[1] * x[1])).abs() < 1e-10);
    }

    #[test]
    fn restrict_linear_function() {
        let e = GridSection::from_scalar_fn(GridSpec::uniform(Box::cube(1, 2.0), 41).unwrap(), |x| x[0]);
        let r = e.restrict(&Box::cube(1, 1.0)).unwrap();
        assert_eq!(r.spec.counts, vec![21]);
        for i in 0..21 {
            assert!((r.values[i] - r.spec.node(i)[0]).abs() < 1e-14);
        }
        let same = e.restrict(e.domain()).unwrap();
        assert_eq!(same, e);
        assert!(e.restrict(&Box::cube(1, 2.5)).is_err());
    }

    #[test]
    fn restrict_off_lattice_resamples() {
        let e = GridSection::from_scalar_fn(GridSpec::uniform(Box::cube(1, 2.0), 41).unwrap(), |x| x[0] * x[0]);
        let b = Box::cube(1, 0.95);
        let r = e.restrict(&b).unwrap();
        assert_eq!(r.domain(), &b);
        for i in 0..r.spec.len() {
            let x = r.spec.node(i)[0];
            assert!((r.values[i] - x * x).abs() < 1e-13);
        }
    }
}
