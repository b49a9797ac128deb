use crate::error::{Error, Result};
use crate::grid::{multi_indices, partial_derivative, Box, GridSpec};
use crate::numerics::fd::DerivativePlan;
use crate::numerics::interp::lagrange_stencil;
use crate::par;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Uniform `n × n` lattice on the square `[−w, w]²` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareGrid {
    pub half_width: f64,
    pub n: usize,
}

impl SquareGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 2 {
            return Err(Error::Resolution(format!("square grid needs w > 0 and n ≥ 2, got w={half_width}, n={n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.half_width
        } else {
            -self.half_width + i as f64 * self.spacing()
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Node `ix * n + iy` as `x + i y`.
    pub fn node(&self, flat: usize) -> C64 {
        C64::new(self.coord(flat / self.n), self.coord(flat % self.n))
    }

    /// Nodes with `|z| ≤ radius`.
    pub fn disk_nodes(&self, radius: f64) -> Vec<usize> {
        let tol = 1e-9 * self.spacing();
        (0..self.len()).filter(|&i| self.node(i).norm() <= radius + tol).collect()
    }

    /// Same-spacing sublattice of the nodes with `|x|, |y| ≤ bound`, and the
    /// index offset of its first node.
    pub fn sub_lattice(&self, bound: f64) -> Result<(SquareGrid, usize)> {
        let h = self.spacing();
        let tol = 1e-9 * h;
        let first = (0..self.n).find(|&i| self.coord(i) >= -bound - tol);
        let Some(first) = first else {
            return Err(Error::Domain(format!("no lattice nodes within |x| ≤ {bound}")));
        };
        let count = self.n - 2 * first;
        if count < 2 {
            return Err(Error::Resolution(format!("sublattice of bound {bound} has fewer than 2 nodes")));
        }
        Ok((SquareGrid { half_width: -self.coord(first), n: count }, first))
    }

    /// Offset of `other` inside this lattice when it is a same-spacing sublattice.
    pub fn lattice_offset(&self, other: &SquareGrid) -> Option<usize> {
        let h = self.spacing();
        if (other.spacing() - h).abs() > 1e-9 * h || other.n > self.n {
            return None;
        }
        let off = (self.half_width - other.half_width) / h;
        let k = off.round();
        ((off - k).abs() < 1e-6 && k >= 0.0 && k as usize + other.n <= self.n).then_some(k as usize)
    }
}

/// Complex function of one complex variable sampled on a square lattice. The
/// values are meaningful on the closed disk `D_radius`, which the lattice
/// covers; nodes outside that disk only serve as finite-difference padding.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridFunction {
    pub grid: SquareGrid,
    pub radius: f64,
    pub values: Vec<C64>,
}

impl ComplexGridFunction {
    pub fn new(grid: SquareGrid, radius: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!("{} values for a {}² grid", values.len(), grid.n)));
        }
        if radius > grid.half_width * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("grid of half-width {} does not cover D_{radius}", grid.half_width)));
        }
        Ok(Self { grid, radius, values })
    }

    /// Samples `f` on the `n × n` lattice of `[−s, s]²`.
    pub fn from_fn<F>(s: f64, n: usize, f: F) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Sync + Send,
    {
        let grid = SquareGrid::new(s, n)?;
        let values = par::map_range(grid.len(), |i| f(grid.node(i)));
        Self::new(grid, s, values)
    }

    pub fn zeros(grid: SquareGrid, radius: f64) -> Result<Self> {
        Self::new(grid, radius, vec![C64::new(0.0, 0.0); grid.len()])
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Bicubic Lagrange interpolation.
    pub fn eval(&self, z: C64) -> C64 {
        let g = &self.grid;
        let (a, h) = (-g.half_width, g.spacing());
        let sx = lagrange_stencil(a, h, g.n, z.re, 4);
        let sy = lagrange_stencil(a, h, g.n, z.im, 4);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..sx.len {
            let row = (sx.start + i) * g.n + sy.start;
            let mut r = C64::new(0.0, 0.0);
            for j in 0..sy.len {
                r += self.values[row + j] * sy.w[j];
            }
            acc += r * sx.w[i];
        }
        acc
    }

    fn partial(&self, axis: usize, acc: usize) -> Result<Vec<C64>> {
        let n = self.grid.n;
        let plan = DerivativePlan::new(n, self.spacing(), 1, acc)?;
        Ok(par::map_range(self.grid.len(), |flat| {
            let (ix, iy) = (flat / n, flat % n);
            let (i, stride, base) = if axis == 0 { (ix, n, iy) } else { (iy, 1, ix * n) };
            let (s, w) = plan.stencil(i);
            w.iter().enumerate().map(|(j, wj)| self.values[base + (s + j) * stride] * *wj).sum()
        }))
    }

    /// `∂̄ = ½(∂_x + i ∂_y)` by fourth-order differences.
    pub fn dbar(&self) -> Result<Self> {
        let dx = self.partial(0, 4)?;
        let dy = self.partial(1, 4)?;
        let values = dx.iter().zip(&dy).map(|(a, b)| 0.5 * (a + C64::i() * b)).collect();
        Self::new(self.grid, self.radius, values)
    }

    /// `∂ = ½(∂_x − i ∂_y)`.
    pub fn dz(&self) -> Result<Self> {
        let dx = self.partial(0, 4)?;
        let dy = self.partial(1, 4)?;
        let values = dx.iter().zip(&dy).map(|(a, b)| 0.5 * (a - C64::i() * b)).collect();
        Self::new(self.grid, self.radius, values)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Dimension("complex grid functions on different lattices".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.grid, self.radius.min(other.radius), values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(self.grid, self.radius.min(other.radius), values)
    }

    /// Values at the nodes of `grid`: picked directly when `grid` is a
    /// sublattice, interpolated otherwise.
    pub fn sample_on(&self, grid: &SquareGrid) -> Vec<C64> {
        if let Some(off) = self.grid.lattice_offset(grid) {
            let n = self.grid.n;
            return (0..grid.len()).map(|i| self.values[(i / grid.n + off) * n + i % grid.n + off]).collect();
        }
        par::map_range(grid.len(), |i| self.eval(grid.node(i)))
    }

    /// Restriction to the sublattice with `|x|, |y| ≤ bound`, meaningful on `D_radius`.
    pub fn restrict(&self, bound: f64, radius: f64) -> Result<Self> {
        let (g, _) = self.grid.sub_lattice(bound)?;
        Self::new(g, radius.min(self.radius).min(g.half_width), self.sample_on(&g))
    }

    /// `sup_{D_radius} |f|` over lattice nodes.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_on(self.radius)
    }

    pub fn sup_norm_on(&self, radius: f64) -> f64 {
        self.grid.disk_nodes(radius).iter().map(|&i| self.values[i].norm()).fold(0.0, f64::max)
    }

    /// `‖f‖_{k}` on `D_radius`: sup over disk nodes of the Euclidean norm of
    /// `D^a f / a!` over real multi-indices `|a| ≤ k` (second-order differences).
    pub fn ck_norm_on(&self, k: usize, radius: f64) -> Result<f64> {
        let g = &self.grid;
        let spec = GridSpec::uniform(Box::cube(2, g.half_width), g.n)?;
        let flat: Vec<f64> = self.values.iter().flat_map(|c| [c.re, c.im]).collect();
        let inside = g.disk_nodes(radius);
        let mut sumsq = vec![0.0; inside.len()];
        for a in multi_indices(2, k) {
            let mut d = partial_derivative(&spec, 2, &flat, 0, a[0], 2)?;
            d = partial_derivative(&spec, 2, &d, 1, a[1], 2)?;
            let fact: f64 = (1..=a[0]).chain(1..=a[1]).map(|i| i as f64).product();
            for (s, &node) in sumsq.iter_mut().zip(&inside) {
                *s += (d[2 * node].powi(2) + d[2 * node + 1].powi(2)) / (fact * fact);
            }
        }
        Ok(sumsq.into_iter().fold(0.0, |m: f64, s| m.max(s.sqrt())))
    }

    pub fn ck_norm(&self, k: usize) -> Result<f64> {
        self.ck_norm_on(k, self.radius)
    }
}
