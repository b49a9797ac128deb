use super::{homotopy_operators, Bracket, CECochain, Homotopy};
use crate::error::{Error, Result};
use crate::exact::{from_f64, to_f64, Q};
use crate::nashmoser::{run, ConstantsSchedule, InstanceConstants, PdeInstance, RunReport, Stopping};
use crate::symplectic::increasing_tuples;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::json;

/// Structure constants in floating point, `c[(i d + j) d + k] = c_{ij}^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatBracket {
    pub dim: usize,
    pub c: Vec<f64>,
}

impl FloatBracket {
    pub fn zero(dim: usize) -> Self {
        Self { dim, c: vec![0.0; dim * dim * dim] }
    }

    pub fn from_exact(mu: &Bracket) -> Self {
        let d = mu.dim();
        let mut out = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out.c[(i * d + j) * d + k] = to_f64(mu.structure_constant(i, j, k));
                }
            }
        }
        out
    }

    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.at(i, j, k);
                }
            }
        }
        out
    }

    /// `(μ·g)(x, y) = g^{−1} μ(gx, gy)`.
    pub fn gl_action(&self, g: &DMatrix<f64>) -> Result<Self> {
        let d = self.dim;
        let gi = g.clone().try_inverse().ok_or_else(|| Error::Singular("group element is not invertible".into()))?;
        let mut out = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                let gx: Vec<f64> = g.column(i).iter().cloned().collect();
                let gy: Vec<f64> = g.column(j).iter().cloned().collect();
                let v = &gi * DVector::from_vec(self.apply(&gx, &gy));
                for k in 0..d {
                    out.c[(i * d + j) * d + k] = v[k];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { dim: self.dim, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { dim: self.dim, c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, c: self.c.iter().map(|a| a * s).collect() }
    }

    /// Coordinates on increasing pairs, matching [`CECochain::to_vector`].
    pub fn coords(&self) -> Vec<f64> {
        let d = self.dim;
        increasing_tuples(d, 2).iter().flat_map(|t| (0..d).map(move |k| (t[0], t[1], k))).map(|(i, j, k)| self.at(i, j, k)).collect()
    }

    pub fn from_coords(dim: usize, v: &[f64]) -> Self {
        let mut out = Self::zero(dim);
        for (n, t) in increasing_tuples(dim, 2).iter().enumerate() {
            for k in 0..dim {
                out.c[(t[0] * dim + t[1]) * dim + k] = v[n * dim + k];
                out.c[(t[1] * dim + t[0]) * dim + k] = -v[n * dim + k];
            }
        }
        out
    }

    /// Euclidean norm of the coordinates.
    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `Jac` on increasing triples.
    pub fn jacobiator(&self) -> Vec<f64> {
        let d = self.dim;
        let unit = |i: usize| -> Vec<f64> { (0..d).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
        let mut out = Vec::new();
        for t in increasing_tuples(d, 3) {
            let (x, y, z) = (unit(t[0]), unit(t[1]), unit(t[2]));
            let a = self.apply(&self.apply(&x, &y), &z);
            let b = self.apply(&self.apply(&y, &z), &x);
            let c = self.apply(&self.apply(&z, &x), &y);
            out.extend((0..d).map(|k| a[k] + b[k] + c[k]));
        }
        out
    }

    /// Exact rational copy of the binary floats.
    pub fn to_exact(&self) -> Result<Bracket> {
        let d = self.dim;
        let v: Vec<Q> = self.coords().iter().map(|x| from_f64(*x)).collect();
        Bracket::from_cochain(CECochain::from_vector(d, 2, &v))
    }
}

fn to_dmatrix(m: &crate::exact::QMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.to_f64())
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// The bracket-deformation problem `Jac(μ + e) = 0` modulo `GL(g)`, with
/// sections `e = ν − μ`, generators in `gl(g)` and symmetries in `GL(g)`.
/// All norms are Euclidean on coordinates and ignore `(k, r)`; smoothing is the identity.
#[derive(Debug, Clone)]
pub struct LieInstance {
    pub mu: Bracket,
    mu_f: FloatBracket,
    homotopy: Homotopy,
    h1: DMatrix<f64>,
    d2: DMatrix<f64>,
    theta: f64,
}

impl LieInstance {
    pub fn new(mu: &Bracket) -> Result<Self> {
        let homotopy = homotopy_operators(mu)?;
        let h1 = to_dmatrix(&homotopy.h1);
        let d2 = to_dmatrix(&homotopy.d2);
        Ok(Self { mu: mu.clone(), mu_f: FloatBracket::from_exact(mu), homotopy, h1, d2, theta: 2.0 })
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn mu_float(&self) -> &FloatBracket {
        &self.mu_f
    }

    pub fn homotopy(&self) -> &Homotopy {
        &self.homotopy
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }
}

impl PdeInstance for LieInstance {
    type Section = FloatBracket;
    type Generator = DMatrix<f64>;
    type Symmetry = DMatrix<f64>;

    fn name(&self) -> String {
        format!("liealg(d={})", self.dim())
    }

    fn constants(&self) -> InstanceConstants {
        InstanceConstants { d: 1, l1: 0, l2: 0 }
    }

    fn theta(&self) -> f64 {
        self.theta
    }

    fn equation_tolerance(&self) -> f64 {
        1e-9
    }

    fn norm(&self, e: &FloatBracket, _k: usize, _r: f64) -> Result<f64> {
        Ok(e.norm())
    }

    fn scale(&self, e: &FloatBracket, c: f64) -> FloatBracket {
        e.scale(c)
    }

    fn smooth(&self, e: &FloatBracket, _t: f64, _s: f64) -> Result<FloatBracket> {
        Ok(e.clone())
    }

    fn homotopy(&self, e: &FloatBracket, _s: f64, _r: f64) -> Result<DMatrix<f64>> {
        let a = &self.h1 * DVector::from_vec(e.coords());
        let d = self.dim();
        // coordinate j d + k is the k-th component of α(e_j)
        Ok(DMatrix::from_fn(d, d, |k, j| a[j * d + k]))
    }

    fn negate(&self, v: DMatrix<f64>) -> DMatrix<f64> {
        -v
    }

    fn generator_norm(&self, v: &DMatrix<f64>, _k: usize, _r: f64) -> Result<f64> {
        Ok(v.norm())
    }

    fn flow(&self, v: &DMatrix<f64>, _r: f64, _s_next: f64) -> Result<DMatrix<f64>> {
        Ok(v.clone().exp())
    }

    fn act(&self, e: &FloatBracket, phi: &DMatrix<f64>, _s_next: f64) -> Result<FloatBracket> {
        Ok(self.mu_f.add(e).gl_action(phi)?.sub(&self.mu_f))
    }

    fn compose_all(&self, maps: &[DMatrix<f64>], _r: f64) -> Result<DMatrix<f64>> {
        let d = self.dim();
        Ok(maps.iter().fold(DMatrix::identity(d, d), |acc, m| acc * m))
    }

    fn symmetry_norm(&self, psi: &DMatrix<f64>, _k: usize) -> Result<f64> {
        let d = self.dim();
        Ok((psi - DMatrix::<f64>::identity(d, d)).norm())
    }

    fn pullback_residual(&self, e: &FloatBracket, psi: &DMatrix<f64>, _r: f64) -> Result<f64> {
        Ok(self.mu_f.add(e).gl_action(psi)?.sub(&self.mu_f).norm())
    }

    fn equation_residual(&self, e: &FloatBracket, _r: f64) -> Result<f64> {
        Ok(l2(&self.mu_f.add(e).jacobiator()))
    }

    /// `Jac(μ + e) − L(e)` with `L = −δ_2` the linearization of `Jac` at `μ`.
    fn quadratic_remainder(&self, e: &FloatBracket, _k: usize, _r: f64) -> Result<f64> {
        let jac = DVector::from_vec(self.mu_f.add(e).jacobiator());
        let lin = -(&self.d2 * DVector::from_vec(e.coords()));
        Ok((jac - lin).norm())
    }

    /// Exact: `w` is converted to rationals and the identity is checked over `Q`.
    fn homotopy_residual(&self, w: &FloatBracket, _s: f64, _r: f64) -> Result<f64> {
        let wq: Vec<Q> = w.coords().iter().map(|x| from_f64(*x)).collect();
        let h = &self.homotopy;
        let a = h.d1.mul_vec(&h.h1.mul_vec(&wq));
        let b = h.h2.mul_vec(&h.d2.mul_vec(&wq));
        let diff: Vec<f64> = a.iter().zip(&b).zip(&wq).map(|((x, y), z)| to_f64(&(&(x + y) - z))).collect();
        Ok(l2(&diff))
    }

    fn symmetry_json(&self, psi: &DMatrix<f64>) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..psi.nrows()).map(|i| psi.row(i).iter().cloned().collect()).collect();
        json!({ "matrix": rows })
    }
}

/// `ν = μ·g_0` with `g_0 = id + A`, `A` random with `‖A‖_F = size`.
pub fn constructed_perturbation<R: Rng>(mu: &Bracket, size: f64, rng: &mut R) -> Result<(FloatBracket, DMatrix<f64>)> {
    let d = mu.dim();
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let n = a.norm();
    let g0 = DMatrix::identity(d, d) + if n > 0.0 { a * (size / n) } else { a };
    Ok((FloatBracket::from_exact(mu).gl_action(&g0)?, g0))
}

/// One Newton correction of `ν` toward `Jac = 0`: `ν + δ_2^+ Jac(ν)`.
pub fn newton_project(instance: &LieInstance, nu: &FloatBracket) -> FloatBracket {
    let h2 = to_dmatrix(&instance.homotopy.h2);
    let c = &h2 * DVector::from_vec(nu.jacobiator());
    nu.add(&FloatBracket::from_coords(nu.dim, c.as_slice()))
}

/// Outcome of [`rigidity_solve`].
#[derive(Debug, Clone)]
pub struct LieSolveReport {
    pub g: DMatrix<f64>,
    /// `‖ν·g − μ‖`.
    pub residual: f64,
    pub jacobi_defect: f64,
    pub run: Option<RunReport>,
}

/// `g` with `ν·g ≈ μ`, by the Nash–Moser run on `e = ν − μ`. `ν = μ`
/// returns the identity without iterating.
pub fn rigidity_solve(mu: &Bracket, nu: &FloatBracket, schedule: &ConstantsSchedule, stopping: &Stopping, jacobi_tol: f64) -> Result<LieSolveReport> {
    if nu.dim != mu.dim() {
        return Err(Error::Dimension(format!("ν on dimension {}, μ on {}", nu.dim, mu.dim())));
    }
    let instance = LieInstance::new(mu)?;
    let d = mu.dim();
    let jacobi_defect = l2(&nu.jacobiator());
    if jacobi_defect > jacobi_tol {
        return Err(Error::Domain(format!("‖Jac(ν)‖ = {jacobi_defect:.3e} exceeds {jacobi_tol:.1e}")));
    }
    let e = nu.sub(instance.mu_float());
    if e.c.iter().all(|x| *x == 0.0) {
        return Ok(LieSolveReport { g: DMatrix::identity(d, d), residual: 0.0, jacobi_defect, run: None });
    }
    let (g, report) = run(&instance, e, schedule, stopping)?;
    let residual = nu.gl_action(&g)?.sub(instance.mu_float()).norm();
    Ok(LieSolveReport { g, residual, jacobi_defect, run: Some(report) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn schedule() -> ConstantsSchedule {
        ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, InstanceConstants { d: 1, l1: 0, l2: 0 }, 25).unwrap()
    }

    #[test]
    fn float_action_matches_exact() {
        let mu = Bracket::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = super::super::random_gl(3, &mut rng);
        let exact = FloatBracket::from_exact(&super::super::gl_action(&mu, &g).unwrap());
        let float = FloatBracket::from_exact(&mu).gl_action(&to_dmatrix(&g)).unwrap();
        assert!(exact.sub(&float).norm() < 1e-12);
    }

    #[test]
    fn recovers_constructed_perturbation() {
        let mu = Bracket::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (nu, _) = constructed_perturbation(&mu, 0.1, &mut rng).unwrap();
        let out = rigidity_solve(&mu, &nu, &schedule(), &Stopping::new(1e-12), 1e-10).unwrap();
        assert!(out.residual <= 1e-10, "residual {}", out.residual);
        assert!(out.run.unwrap().steps <= 25);
    }

    #[test]
    fn zero_deformation_is_identity() {
        let mu = Bracket::su2();
        let out = rigidity_solve(&mu, &FloatBracket::from_exact(&mu), &schedule(), &Stopping::new(1e-12), 1e-10).unwrap();
        assert_eq!(out.g, DMatrix::identity(3, 3));
    }
}
