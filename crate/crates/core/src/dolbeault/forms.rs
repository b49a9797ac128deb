use super::cauchy::cauchy_riemann_with;
use super::function::{ComplexGridFunction, SquareGrid};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

/// One separable term `c · f_1(z^1) ⋯ f_n(z^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: C64,
    pub factors: Vec<ComplexGridFunction>,
}

/// Function on a polydisk stored as a finite sum of tensor products of
/// per-axis grid functions. Every `∂̄_j` and `T_j` acts on one factor, so the
/// resolution per complex axis is that of the factor lattices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolydiskFunction {
    pub n: usize,
    pub terms: Vec<Term>,
}

impl PolydiskFunction {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn product(coef: C64, factors: Vec<ComplexGridFunction>) -> Self {
        Self { n: factors.len(), terms: vec![Term { coef, factors }] }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|t| Term { coef: t.coef * c, factors: t.factors.clone() }).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("polydisk functions in {} and {} variables", self.n, other.n)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { n: self.n, terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    fn map_axis(&self, j: usize, op: impl Fn(&ComplexGridFunction) -> Result<ComplexGridFunction>) -> Result<Self> {
        if j >= self.n {
            return Err(Error::Dimension(format!("axis {j} of a function in {} variables", self.n)));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut factors = t.factors.clone();
                factors[j] = op(&t.factors[j])?;
                Ok(Term { coef: t.coef, factors })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: self.n, terms })
    }

    /// `∂̄_j`.
    pub fn dbar_axis(&self, j: usize) -> Result<Self> {
        self.map_axis(j, |f| f.dbar())
    }

    /// `T^{s,r}_j`, the Cauchy–Riemann operator in the variable `z^j`.
    pub fn cauchy_axis(&self, j: usize, s: f64, r: f64, eps: f64) -> Result<Self> {
        self.map_axis(j, |f| cauchy_riemann_with(f, s, r, eps))
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms.iter().map(|t| t.coef * t.factors.iter().zip(z).map(|(f, zj)| f.eval(*zj)).product::<C64>()).sum()
    }

    /// Sup over the product of the disk nodes `|z^j| ≤ radii[j]` of `grids[j]`.
    pub fn sup_on(&self, grids: &[SquareGrid], radii: &[f64]) -> Result<f64> {
        if grids.len() != self.n || radii.len() != self.n {
            return Err(Error::Dimension("one grid and radius per complex axis".into()));
        }
        let nodes: Vec<Vec<usize>> = grids.iter().zip(radii).map(|(g, r)| g.disk_nodes(*r)).collect();
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        // samples[t][j][k] = coefficient-free factor j of term t at the k-th disk node of axis j
        let samples: Vec<Vec<Vec<C64>>> = self
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .enumerate()
                    .map(|(j, f)| {
                        let v = f.sample_on(&grids[j]);
                        nodes[j].iter().map(|&i| v[i]).collect()
                    })
                    .collect()
            })
            .collect();
        let mut best: f64 = 0.0;
        let mut idx = vec![0usize; self.n];
        if nodes.iter().any(|v| v.is_empty()) {
            return Ok(0.0);
        }
        // partial products over the first n−1 axes, then a sweep over the last
        loop {
            let heads: Vec<C64> = self
                .terms
                .iter()
                .enumerate()
                .map(|(t, term)| term.coef * (0..self.n - 1).map(|j| samples[t][j][idx[j]]).product::<C64>())
                .collect();
            let last = self.n - 1;
            for k in 0..nodes[last].len() {
                let v: C64 = heads.iter().enumerate().map(|(t, hd)| hd * samples[t][last][k]).sum();
                best = best.max(v.norm());
            }
            let mut ax = last;
            loop {
                if ax == 0 {
                    return Ok(best);
                }
                ax -= 1;
                idx[ax] += 1;
                if idx[ax] < nodes[ax].len() {
                    break;
                }
                idx[ax] = 0;
            }
        }
    }
}

/// `β = Σ β_k dz̄^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form01 {
    pub comps: Vec<PolydiskFunction>,
}

/// `γ = Σ_{k<l} γ_{kl} dz̄^k ∧ dz̄^l`, stored for `k < l` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Form02 {
    pub n: usize,
    pub comps: Vec<PolydiskFunction>,
}

fn pair_index(n: usize, k: usize, l: usize) -> usize {
    debug_assert!(k < l && l < n);
    k * n - k * (k + 1) / 2 + (l - k - 1)
}

impl Form01 {
    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn sub(&self, other: &Form01) -> Result<Form01> {
        Ok(Form01 { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &Form01) -> Result<Form01> {
        Ok(Form01 { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect::<Result<_>>()? })
    }

    /// Max over components of the sup on the given product of disks.
    pub fn sup_on(&self, grids: &[SquareGrid], radii: &[f64]) -> Result<f64> {
        self.comps.iter().map(|c| c.sup_on(grids, radii)).try_fold(0.0, |m: f64, v| Ok(m.max(v?)))
    }
}

impl Form02 {
    pub fn zero(n: usize) -> Self {
        Self { n, comps: vec![PolydiskFunction::zero(n); n * n.saturating_sub(1) / 2] }
    }

    /// `γ_{kl}` with `γ_{lk} = −γ_{kl}` and `γ_{kk} = 0`.
    pub fn get(&self, k: usize, l: usize) -> PolydiskFunction {
        match k.cmp(&l) {
            std::cmp::Ordering::Less => self.comps[pair_index(self.n, k, l)].clone(),
            std::cmp::Ordering::Greater => self.comps[pair_index(self.n, l, k)].scale(C64::new(-1.0, 0.0)),
            std::cmp::Ordering::Equal => PolydiskFunction::zero(self.n),
        }
    }

    pub fn sup_on(&self, grids: &[SquareGrid], radii: &[f64]) -> Result<f64> {
        self.comps.iter().map(|c| c.sup_on(grids, radii)).try_fold(0.0, |m: f64, v| Ok(m.max(v?)))
    }
}

/// `∂̄ f = Σ ∂̄_k f dz̄^k`.
pub fn dbar_function(f: &PolydiskFunction) -> Result<Form01> {
    Ok(Form01 { comps: (0..f.n).map(|k| f.dbar_axis(k)).collect::<Result<_>>()? })
}

/// `∂̄ β` with `γ_{kl} = ∂̄_k β_l − ∂̄_l β_k`.
pub fn dbar_form01(beta: &Form01) -> Result<Form02> {
    let n = beta.n();
    let mut out = Form02::zero(n);
    for k in 0..n {
        for l in k + 1..n {
            out.comps[pair_index(n, k, l)] = beta.comps[l].dbar_axis(k)?.sub(&beta.comps[k].dbar_axis(l)?)?;
        }
    }
    Ok(out)
}

/// Applies `Π_{j∈J} T_j ∂̄_j` (in increasing `j`).
fn chain(mut f: PolydiskFunction, subset: &[usize], s: f64, r: f64, eps: f64) -> Result<PolydiskFunction> {
    for &j in subset {
        f = f.dbar_axis(j)?.cauchy_axis(j, s, r, eps)?;
    }
    Ok(f)
}

fn subsets_avoiding(n: usize, avoid: &[usize]) -> Vec<Vec<usize>> {
    let free: Vec<usize> = (0..n).filter(|j| !avoid.contains(j)).collect();
    (0..1usize << free.len())
        .map(|mask| free.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &j)| j).collect())
        .collect()
}

/// `h_1 β = Σ_k Σ_{J∌k} (−1)^{|J|}/(|J|+1) Π_{j∈J} T_j ∂̄_j T_k β_k` on `D^n_r`.
pub fn h1(beta: &Form01, s: f64, r: f64, eps: f64) -> Result<PolydiskFunction> {
    let n = beta.n();
    let mut out = PolydiskFunction::zero(n);
    for k in 0..n {
        let base = beta.comps[k].cauchy_axis(k, s, r, eps)?;
        for subset in subsets_avoiding(n, &[k]) {
            let j = subset.len() as i32;
            let c = (-1f64).powi(j) / (j + 1) as f64;
            out = out.add(&chain(base.clone(), &subset, s, r, eps)?.scale(C64::new(c, 0.0)))?;
        }
    }
    Ok(out)
}

/// Component `k` of `h_2 γ`: `Σ_{l≠k} Σ_{J∌k,l} (−1)^{|J|+1}/((|J|+1)(|J|+2)) Π_{j∈J} T_j ∂̄_j T_l γ_{kl}`.
pub fn h2(gamma: &Form02, s: f64, r: f64, eps: f64) -> Result<Form01> {
    let n = gamma.n;
    let mut comps = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = PolydiskFunction::zero(n);
        for l in (0..n).filter(|&l| l != k) {
            let base = gamma.get(k, l).cauchy_axis(l, s, r, eps)?;
            for subset in subsets_avoiding(n, &[k, l]) {
                let j = subset.len() as i32;
                let c = (-1f64).powi(j + 1) / ((j + 1) * (j + 2)) as f64;
                acc = acc.add(&chain(base.clone(), &subset, s, r, eps)?.scale(C64::new(c, 0.0)))?;
            }
        }
        comps.push(acc);
    }
    Ok(Form01 { comps })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyResidual {
    pub n: usize,
    pub s: f64,
    pub r: f64,
    pub grid: usize,
    /// `‖(∂̄h_1 + h_2∂̄)β − β‖_{0,r}`
    pub absolute: f64,
    /// `‖β‖_{0,r}`
    pub reference: f64,
    pub relative: f64,
}

/// Evaluates both sides of `(∂̄ h_1 + h_2 ∂̄) β = β` on `D^n_r`.
pub fn homotopy_residual(beta: &Form01, s: f64, r: f64, eps: f64) -> Result<HomotopyResidual> {
    let n = beta.n();
    let h1b = h1(beta, s, r, eps)?;
    let lhs = dbar_function(&h1b)?.add(&h2(&dbar_form01(beta)?, s, r, eps)?)?;
    let diff = lhs.sub(beta)?;
    // common output lattice: the r-sublattice of the first factor grid on each axis
    let term = beta
        .comps
        .iter()
        .find_map(|c| c.terms.first())
        .ok_or_else(|| Error::Domain("homotopy residual of the zero form".into()))?;
    let grids = term
        .factors
        .iter()
        .map(|f| Ok(f.grid.sub_lattice(r + 2.0 * f.spacing())?.0))
        .collect::<Result<Vec<_>>>()?;
    let radii = vec![r; n];
    let absolute = diff.sup_on(&grids, &radii)?;
    let reference = beta.sup_on(&grids, &radii)?;
    Ok(HomotopyResidual {
        n,
        s,
        r,
        grid: term.factors[0].grid.n,
        absolute,
        reference,
        relative: if reference > 0.0 { absolute / reference } else { absolute },
    })
}

/// Random `(0,1)`-form whose components are sums of `terms` monomials
/// `Π_j (z^j)^{a_j} (z̄^j)^{b_j}` of total degree ≤ `degree`, sampled on `n_grid`² lattices of `D_s`.
pub fn random_polynomial_form<R: Rng>(n: usize, degree: u32, terms: usize, s: f64, n_grid: usize, rng: &mut R) -> Result<Form01> {
    let mut comps = Vec::with_capacity(n);
    for _ in 0..n {
        let mut f = PolydiskFunction::zero(n);
        for _ in 0..terms {
            let mut left = rng.random_range(0..=degree);
            let mut factors = Vec::with_capacity(n);
            for _ in 0..n {
                let a = rng.random_range(0..=left);
                left -= a;
                let b = rng.random_range(0..=left);
                left -= b;
                factors.push(ComplexGridFunction::from_fn(s, n_grid, move |z| z.powu(a) * z.conj().powu(b))?);
            }
            let coef = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            f = f.add(&PolydiskFunction::product(coef, factors))?;
        }
        comps.push(f);
    }
    Ok(Form01 { comps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(n_grid: usize, f: impl Fn(C64) -> C64 + Sync + Send) -> Form01 {
        let g = ComplexGridFunction::from_fn(1.0, n_grid, f).unwrap();
        Form01 { comps: vec![PolydiskFunction::product(C64::new(1.0, 0.0), vec![g])] }
    }

    #[test]
    fn n1_h1_is_cauchy_riemann() {
        let beta = single(129, |z| z.conj() * z + 1.0);
        let h = h1(&beta, 1.0, 0.5, 0.3).unwrap();
        assert_eq!(h.terms.len(), 1);
        let direct = cauchy_riemann_with(&beta.comps[0].terms[0].factors[0], 1.0, 0.5, 0.3).unwrap();
        assert_eq!(h.terms[0].factors[0], direct);
        let zero = Form01 { comps: vec![PolydiskFunction::zero(1)] };
        assert!(h1(&zero, 1.0, 0.5, 0.3).unwrap().terms.is_empty());
    }

    #[test]
    fn pair_indexing() {
        assert_eq!(pair_index(3, 0, 1), 0);
        assert_eq!(pair_index(3, 0, 2), 1);
        assert_eq!(pair_index(3, 1, 2), 2);
        assert_eq!(subsets_avoiding(3, &[1]).len(), 4);
    }

    #[test]
    fn dbar_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let beta = random_polynomial_form(2, 3, 4, 1.0, 33, &mut rng).unwrap();
        let f = beta.comps[0].clone();
        let gamma = dbar_form01(&dbar_function(&f).unwrap()).unwrap();
        let g = f.terms[0].factors[0].grid;
        assert!(gamma.sup_on(&[g, g], &[1.0, 1.0]).unwrap() < 1e-10);
    }

    #[test]
    fn homotopy_identity_n2_small_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let beta = random_polynomial_form(2, 3, 3, 1.0, 48, &mut rng).unwrap();
        let res = homotopy_residual(&beta, 1.0, 0.5, 0.3).unwrap();
        assert!(res.relative < 1e-2, "{res:?}");
    }

    #[test]
    fn homotopy_identity_n1() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let beta = random_polynomial_form(1, 3, 5, 1.0, 129, &mut rng).unwrap();
        let res = homotopy_residual(&beta, 1.0, 0.5, 0.3).unwrap();
        assert!(res.relative < 1e-3, "{res:?}");
    }
}
