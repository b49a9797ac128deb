//! Lie brackets over the rationals, the Chevalley–Eilenberg complex with
//! adjoint coefficients in degrees 1..3, and its homotopy operators.

mod instance;

pub use instance::{constructed_perturbation, newton_project, rigidity_solve, FloatBracket, LieInstance, LieSolveReport};

use crate::error::{Error, Result};
use crate::exact::{q, q_from_json, QMatrix, Q};
use crate::symplectic::{increasing_tuples, sort_with_sign};
use num::{BigInt, One, Zero};
use rand::Rng;
use serde_json::{json, Value};

/// Alternating map `Λ^q g → g`, `q ∈ {1, 2, 3}`, stored on all ordered basis
/// tuples: `data[flat(idx) * d + k]` is the `k`-th component of `c(e_idx)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CECochain {
    pub dim: usize,
    pub degree: usize,
    data: Vec<Q>,
}

fn flat(idx: &[usize], d: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * d + i)
}

fn all_tuples(d: usize, q: usize) -> Vec<Vec<usize>> {
    (0..d.pow(q as u32))
        .map(|mut f| {
            let mut t = vec![0; q];
            for slot in t.iter_mut().rev() {
                *slot = f % d;
                f /= d;
            }
            t
        })
        .collect()
}

impl CECochain {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, data: vec![Q::zero(); dim.pow(degree as u32) * dim] }
    }

    /// Cochain from its values on increasing tuples, extended by antisymmetry.
    pub fn from_increasing(dim: usize, degree: usize, mut f: impl FnMut(&[usize]) -> Vec<Q>) -> Self {
        let mut c = Self::zero(dim, degree);
        for idx in increasing_tuples(dim, degree) {
            c.set(&idx, &f(&idx));
        }
        c
    }

    /// Sets `c(e_idx) = v` and all permuted slots with the sign of the permutation.
    pub fn set(&mut self, idx: &[usize], v: &[Q]) {
        assert_eq!(idx.len(), self.degree, "cochain arity");
        let d = self.dim;
        for t in all_tuples(d, self.degree) {
            let Some((sorted, sign)) = sort_with_sign(&t) else { continue };
            let Some((want, s0)) = sort_with_sign(idx) else { return };
            if sorted != want {
                continue;
            }
            let base = flat(&t, d) * d;
            for k in 0..d {
                self.data[base + k] = if sign * s0 > 0 { v[k].clone() } else { -v[k].clone() };
            }
        }
    }

    pub fn get(&self, idx: &[usize]) -> &[Q] {
        let base = flat(idx, self.dim) * self.dim;
        &self.data[base..base + self.dim]
    }

    /// `c(x_1, …, x_q)` on arbitrary vectors.
    pub fn eval(&self, args: &[&[Q]]) -> Vec<Q> {
        assert_eq!(args.len(), self.degree, "cochain arity");
        let d = self.dim;
        let mut out = vec![Q::zero(); d];
        for t in all_tuples(d, self.degree) {
            let mut coef = Q::one();
            for (a, &i) in args.iter().zip(&t) {
                if a[i].is_zero() {
                    coef = Q::zero();
                    break;
                }
                coef *= &a[i];
            }
            if coef.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.get(&t)) {
                *o += &coef * v;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Coordinates on increasing tuples, `(tuple, component)` in lexicographic order.
    pub fn to_vector(&self) -> Vec<Q> {
        increasing_tuples(self.dim, self.degree).iter().flat_map(|idx| self.get(idx).to_vec()).collect()
    }

    pub fn from_vector(dim: usize, degree: usize, v: &[Q]) -> Self {
        let tuples = increasing_tuples(dim, degree);
        assert_eq!(v.len(), tuples.len() * dim, "coordinate length");
        let mut c = Self::zero(dim, degree);
        for (n, idx) in tuples.iter().enumerate() {
            c.set(idx, &v[n * dim..(n + 1) * dim]);
        }
        c
    }

    /// Number of coordinates, `C(d, q) · d`.
    pub fn space_dim(dim: usize, degree: usize) -> usize {
        increasing_tuples(dim, degree).len() * dim
    }

    /// A degree-1 cochain from a matrix, `α(e_j) = Σ_k a_{kj} e_k`.
    pub fn from_matrix(a: &QMatrix) -> Self {
        assert!(a.is_square());
        let d = a.rows;
        let mut c = Self::zero(d, 1);
        for j in 0..d {
            c.set(&[j], &a.column(j));
        }
        c
    }

    pub fn to_matrix(&self) -> QMatrix {
        assert_eq!(self.degree, 1);
        QMatrix::from_fn(self.dim, self.dim, |k, j| self.get(&[j])[k].clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        Self { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self { data: self.data.iter().map(|a| a * s).collect(), ..self.clone() }
    }

    pub fn random<R: Rng>(dim: usize, degree: usize, rng: &mut R) -> Self {
        Self::from_increasing(dim, degree, |_| (0..dim).map(|_| small_rational(rng)).collect())
    }
}

fn small_rational<R: Rng>(rng: &mut R) -> Q {
    Q::new(BigInt::from(rng.random_range(-6i64..=6)), BigInt::from(rng.random_range(1i64..=3)))
}

/// Bracket `μ ∈ Hom(Λ²g, g)` by structure constants `[e_i, e_j] = Σ_k c_{ij}^k e_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket(CECochain);

impl Bracket {
    pub fn zero(dim: usize) -> Self {
        Self(CECochain::zero(dim, 2))
    }

    /// From entries `(i, j, k, c_{ij}^k)`; `c_{ji}^k = −c_{ij}^k` is implied.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, usize, Q)]) -> Result<Self> {
        let mut c = CECochain::zero(dim, 2);
        for (i, j, k, v) in entries {
            if *i >= dim || *j >= dim || *k >= dim {
                return Err(Error::Dimension(format!("entry ({i},{j},{k}) outside dimension {dim}")));
            }
            if i == j {
                if !v.is_zero() {
                    return Err(Error::Domain(format!("c_{{{i}{i}}}^{k} ≠ 0 breaks antisymmetry")));
                }
                continue;
            }
            let mut val = c.get(&[*i, *j]).to_vec();
            val[*k] = v.clone();
            c.set(&[*i, *j], &val);
        }
        Ok(Self(c))
    }

    pub fn from_cochain(c: CECochain) -> Result<Self> {
        if c.degree != 2 {
            return Err(Error::Degree(format!("bracket needs a 2-cochain, got degree {}", c.degree)));
        }
        Ok(Self(c))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn cochain(&self) -> &CECochain {
        &self.0
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.0.get(&[i, j])[k]
    }

    /// `μ(x, y)`.
    pub fn apply(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        self.0.eval(&[x, y])
    }

    /// `su(2) ≅ so(3)`: `[e_0, e_1] = e_2` and cyclic.
    pub fn su2() -> Self {
        Self::from_entries(3, &[(0, 1, 2, q(1)), (1, 2, 0, q(1)), (2, 0, 1, q(1))]).unwrap()
    }

    /// `sl(2)`: `[h, e] = 2e`, `[h, f] = −2f`, `[e, f] = h` on `(h, e, f)`.
    pub fn sl2() -> Self {
        Self::from_entries(3, &[(0, 1, 1, q(2)), (0, 2, 2, q(-2)), (1, 2, 0, q(1))]).unwrap()
    }

    /// Heisenberg algebra: `[e_0, e_1] = e_2`.
    pub fn heisenberg() -> Self {
        Self::from_entries(3, &[(0, 1, 2, q(1))]).unwrap()
    }

    pub fn abelian(dim: usize) -> Self {
        Self::zero(dim)
    }

    /// `[e_0, e_i] = w_i e_i` for `i ≥ 1` (`weights[i-1] = w_i`).
    pub fn diagonal_solvable(weights: &[Q]) -> Self {
        let d = weights.len() + 1;
        let entries: Vec<_> = weights.iter().enumerate().map(|(i, w)| (0, i + 1, i + 1, w.clone())).collect();
        Self::from_entries(d, &entries).unwrap()
    }

    /// `μ_1 ⊕ μ_2` on `g_1 ⊕ g_2`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut entries = Vec::new();
        for (m, off) in [(self, 0), (other, a)] {
            for idx in increasing_tuples(m.dim(), 2) {
                for (k, v) in m.0.get(&idx).iter().enumerate() {
                    if !v.is_zero() {
                        entries.push((idx[0] + off, idx[1] + off, k + off, v.clone()));
                    }
                }
            }
        }
        Self::from_entries(a + b, &entries).unwrap()
    }

    /// Random antisymmetric bilinear map (generically not a Lie bracket).
    pub fn random_antisymmetric<R: Rng>(dim: usize, rng: &mut R) -> Self {
        Self(CECochain::random(dim, 2, rng))
    }

    /// `{"dim": d, "entries": [[i, j, k, "p/q"], …]}` over `i < j`.
    pub fn to_json(&self) -> Value {
        let mut entries = Vec::new();
        for idx in increasing_tuples(self.dim(), 2) {
            for (k, v) in self.0.get(&idx).iter().enumerate() {
                if !v.is_zero() {
                    entries.push(json!([idx[0], idx[1], k, v.to_string()]));
                }
            }
        }
        json!({ "dim": self.dim(), "entries": entries })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| Error::Parse("bracket needs \"dim\"".into()))? as usize;
        let raw = v.get("entries").and_then(Value::as_array).ok_or_else(|| Error::Parse("bracket needs \"entries\"".into()))?;
        let mut entries = Vec::with_capacity(raw.len());
        for e in raw {
            let e = e.as_array().filter(|e| e.len() == 4).ok_or_else(|| Error::Parse("entry must be [i, j, k, c]".into()))?;
            let ix = |n: usize| e[n].as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse("entry index must be an integer".into()));
            entries.push((ix(0)?, ix(1)?, ix(2)?, q_from_json(&e[3])?));
        }
        Self::from_entries(dim, &entries)
    }
}

/// `Jac(μ)(x, y, z) = μ(μ(x, y), z) + μ(μ(y, z), x) + μ(μ(z, x), y)`.
pub fn jacobiator(mu: &Bracket) -> CECochain {
    let d = mu.dim();
    let e = |i: usize| -> Vec<Q> { (0..d).map(|k| if k == i { Q::one() } else { Q::zero() }).collect() };
    CECochain::from_increasing(d, 3, |t| {
        let (x, y, z) = (e(t[0]), e(t[1]), e(t[2]));
        let a = mu.apply(&mu.apply(&x, &y), &z);
        let b = mu.apply(&mu.apply(&y, &z), &x);
        let c = mu.apply(&mu.apply(&z, &x), &y);
        (0..d).map(|k| &(&a[k] + &b[k]) + &c[k]).collect()
    })
}

fn unit(d: usize, i: usize) -> Vec<Q> {
    (0..d).map(|k| if k == i { Q::one() } else { Q::zero() }).collect()
}

fn vsub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vadd(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Chevalley–Eilenberg differential with adjoint coefficients:
///
/// `δα(x, y) = μ(αx, y) − μ(αy, x) − α μ(x, y)`,
///
/// `δβ(x, y, z) = μ(x, β(y, z)) − μ(y, β(x, z)) + μ(z, β(x, y))
///              − β(μ(x, y), z) + β(μ(x, z), y) − β(μ(y, z), x)`.
pub fn ce_differential(mu: &Bracket, c: &CECochain) -> Result<CECochain> {
    let d = mu.dim();
    if c.dim != d {
        return Err(Error::Dimension(format!("cochain on a {}-dimensional algebra, bracket on {d}", c.dim)));
    }
    match c.degree {
        1 => Ok(CECochain::from_increasing(d, 2, |t| {
            let (x, y) = (unit(d, t[0]), unit(d, t[1]));
            let ax = c.eval(&[&x]);
            let ay = c.eval(&[&y]);
            let a = mu.apply(&ax, &y);
            let b = mu.apply(&ay, &x);
            let m = c.eval(&[&mu.apply(&x, &y)]);
            vsub(&vsub(&a, &b), &m)
        })),
        2 => Ok(CECochain::from_increasing(d, 3, |t| {
            let (x, y, z) = (unit(d, t[0]), unit(d, t[1]), unit(d, t[2]));
            let b = |u: &[Q], v: &[Q]| c.eval(&[u, v]);
            let mut acc = mu.apply(&x, &b(&y, &z));
            acc = vsub(&acc, &mu.apply(&y, &b(&x, &z)));
            acc = vadd(&acc, &mu.apply(&z, &b(&x, &y)));
            acc = vsub(&acc, &b(&mu.apply(&x, &y), &z));
            acc = vadd(&acc, &b(&mu.apply(&x, &z), &y));
            vsub(&acc, &b(&mu.apply(&y, &z), &x))
        })),
        k => Err(Error::Degree(format!("CE differential implemented on degrees 1 and 2, got {k}"))),
    }
}

/// Matrix of `δ: C^q → C^{q+1}` in the increasing-tuple coordinates.
pub fn differential_matrix(mu: &Bracket, degree: usize) -> Result<QMatrix> {
    let d = mu.dim();
    let n_in = CECochain::space_dim(d, degree);
    let n_out = CECochain::space_dim(d, degree + 1);
    let mut cols = Vec::with_capacity(n_in);
    for j in 0..n_in {
        let e = unit(n_in, j);
        cols.push(ce_differential(mu, &CECochain::from_vector(d, degree, &e))?.to_vector());
    }
    Ok(if n_in == 0 { QMatrix::zeros(n_out, 0) } else { QMatrix::from_columns(n_out, &cols) })
}

/// `(μ·g)(x, y) = g^{−1} μ(gx, gy)`.
pub fn gl_action(mu: &Bracket, g: &QMatrix) -> Result<Bracket> {
    let d = mu.dim();
    if g.rows != d || g.cols != d {
        return Err(Error::Dimension(format!("{}×{} matrix acting on a {d}-dimensional algebra", g.rows, g.cols)));
    }
    let gi = g.inverse()?;
    let c = CECochain::from_increasing(d, 2, |t| gi.mul_vec(&mu.apply(&g.column(t[0]), &g.column(t[1]))));
    Ok(Bracket(c))
}

/// Homotopy operators on `Hom(g, g) → Hom(Λ²g, g) → Hom(Λ³g, g)`.
#[derive(Debug, Clone)]
pub struct Homotopy {
    /// `δ` on degree 1 and 2.
    pub d1: QMatrix,
    pub d2: QMatrix,
    /// `h̃_1 = δ_1^+`, `h̃_2 = δ_2^+`.
    pub h1: QMatrix,
    pub h2: QMatrix,
}

impl Homotopy {
    /// `δ h̃_1 + h̃_2 δ − id` on degree 2.
    pub fn identity_defect(&self) -> QMatrix {
        let n = self.d1.rows;
        &(&(&self.d1 * &self.h1) + &(&self.h2 * &self.d2)) - &QMatrix::identity(n)
    }
}

/// `dim H²(g, ad_μ) = dim ker δ_2 − rank δ_1`.
pub fn betti2(mu: &Bracket) -> Result<usize> {
    let d1 = differential_matrix(mu, 1)?;
    let d2 = differential_matrix(mu, 2)?;
    Ok(d2.cols - d2.rank() - d1.rank())
}

/// Moore–Penrose homotopies: `δ_1 δ_1^+` and `δ_2^+ δ_2` are the orthogonal
/// projections onto `im δ_1` and `(ker δ_2)^⊥`, which sum to the identity
/// exactly when `H² = 0`.
pub fn homotopy_operators(mu: &Bracket) -> Result<Homotopy> {
    if !jacobiator(mu).is_zero() {
        return Err(Error::Domain("μ does not satisfy the Jacobi identity".into()));
    }
    let d1 = differential_matrix(mu, 1)?;
    let d2 = differential_matrix(mu, 2)?;
    let betti = d2.cols - d2.rank() - d1.rank();
    if betti != 0 {
        return Err(Error::NonVanishingH2 { betti });
    }
    let h1 = d1.pseudo_inverse();
    let h2 = d2.pseudo_inverse();
    Ok(Homotopy { d1, d2, h1, h2 })
}

/// Random invertible rational matrix with small entries.
pub fn random_gl<R: Rng>(d: usize, rng: &mut R) -> QMatrix {
    loop {
        let vals: Vec<Q> = (0..d * d).map(|n| if n % (d + 1) == 0 { q(1) + small_rational(rng) } else { small_rational(rng) }).collect();
        let g = QMatrix::from_fn(d, d, |i, j| vals[i * d + j].clone());
        if !g.determinant().is_zero() {
            return g;
        }
    }
}
