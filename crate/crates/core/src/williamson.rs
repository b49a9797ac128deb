//! Hessian Lie algebras at fixed points, the Cartan test in `sp(2n)` and the
//! Williamson type `(e, h, f)` of a Cartan subalgebra.

use crate::error::{Error, Result};
use crate::exact::{q, qf, QMatrix, UPoly, Q};
use crate::symplectic::{canonical_omega, PolyIntegrableSystem, Polynomial};
use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Counts of elliptic, hyperbolic and focus-focus blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 3]", from = "[usize; 3]")]
pub struct WilliamsonType {
    pub e: usize,
    pub h: usize,
    pub f: usize,
}

impl WilliamsonType {
    pub fn new(e: usize, h: usize, f: usize) -> Self {
        Self { e, h, f }
    }

    pub fn n(&self) -> usize {
        self.e + self.h + 2 * self.f
    }

    /// All types with `e + h + 2f = n`.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for f in 0..=n / 2 {
            for h in 0..=n - 2 * f {
                out.push(Self::new(n - 2 * f - h, h, f));
            }
        }
        out
    }
}

impl From<WilliamsonType> for [usize; 3] {
    fn from(t: WilliamsonType) -> Self {
        [t.e, t.h, t.f]
    }
}

impl From<[usize; 3]> for WilliamsonType {
    fn from(a: [usize; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for WilliamsonType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.e, self.h, self.f)
    }
}

/// `(ωA)ᵀ = ωA`.
pub fn is_sp(a: &QMatrix, omega: &QMatrix) -> bool {
    let wa = omega * a;
    wa.transpose() == wa
}

/// `A_i = ω^{−1} H_i` with `H_i` the Hessian of `μ_i` at `x`; requires `dμ_i(x) = 0`.
pub fn hessian_lie_algebra(system: &PolyIntegrableSystem, x: &[Q]) -> Result<Vec<QMatrix>> {
    let dim = system.dim();
    if x.len() != dim {
        return Err(Error::Dimension(format!("point in R^{} for a system on R^{dim}", x.len())));
    }
    let winv = system.omega.inverse()?;
    let mut out = Vec::with_capacity(system.n());
    for (i, f) in system.mu.iter().enumerate() {
        let grad = f.gradient();
        if let Some(j) = grad.iter().position(|g| !g.eval(x).is_zero()) {
            return Err(Error::NotAFixedPoint(format!("∂_{j} μ_{} ≠ 0 at the given point", i + 1)));
        }
        let hess = QMatrix::from_fn(dim, dim, |j, k| grad[j].partial(k).eval(x));
        out.push(&winv * &hess);
    }
    Ok(out)
}

/// Which Cartan axiom holds, with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartanReport {
    pub abelian: bool,
    /// Rank of the span of the `A_i`.
    pub dimension: usize,
    /// Dimension of `{X ∈ sp : [X, A_i] ∈ span(A) ∀i}`.
    pub normalizer_dim: usize,
    pub is_cartan: bool,
    pub failing_axiom: Option<String>,
}

/// Abelian, `n`-dimensional and self-normalizing inside `sp(2n, ω)`.
pub fn is_cartan(a: &[QMatrix], omega: &QMatrix) -> Result<CartanReport> {
    let dim = omega.rows;
    let n = dim / 2;
    if a.iter().any(|m| m.rows != dim || m.cols != dim) {
        return Err(Error::Dimension("matrices must match ω".into()));
    }
    let abelian = a.iter().enumerate().all(|(i, x)| a[i + 1..].iter().all(|y| x.commutator(y).is_zero()));
    let span = QMatrix::from_columns(dim * dim, &a.iter().map(|m| m.data.clone()).collect::<Vec<_>>());
    let dimension = if a.is_empty() { 0 } else { span.rank() };

    // sp(2n) = {ω^{-1} S : S symmetric}
    let winv = omega.inverse()?;
    let mut basis = Vec::new();
    for j in 0..dim {
        for k in j..dim {
            let mut s = QMatrix::zeros(dim, dim);
            s[(j, k)] = q(1);
            s[(k, j)] = q(1);
            basis.push(&winv * &s);
        }
    }
    // unknowns: X-coefficients (basis.len()) then y_{il}, equations [X, A_i] − Σ_l y_il A_l = 0
    let nb = basis.len();
    let na = a.len();
    let unknowns = nb + na * na;
    let mut sys = QMatrix::zeros(na * dim * dim, unknowns);
    for (i, ai) in a.iter().enumerate() {
        for (b, xb) in basis.iter().enumerate() {
            let c = xb.commutator(ai);
            for (e, v) in c.data.iter().enumerate() {
                sys[(i * dim * dim + e, b)] = v.clone();
            }
        }
        for (l, al) in a.iter().enumerate() {
            for (e, v) in al.data.iter().enumerate() {
                sys[(i * dim * dim + e, nb + i * na + l)] = -v;
            }
        }
    }
    let normalizer_dim = if na == 0 {
        nb
    } else {
        let null = sys.nullspace();
        let xs: Vec<Vec<Q>> = null.iter().map(|v| v[..nb].to_vec()).collect();
        if xs.is_empty() {
            0
        } else {
            QMatrix::from_columns(nb, &xs).rank()
        }
    };
    let failing_axiom = if !abelian {
        Some("abelian".to_string())
    } else if dimension != n {
        Some(format!("dimension (span has dimension {dimension}, expected {n})"))
    } else if normalizer_dim != n {
        Some(format!("self-normalizing (normalizer has dimension {normalizer_dim})"))
    } else {
        None
    };
    Ok(CartanReport { abelian, dimension, normalizer_dim, is_cartan: failing_axiom.is_none(), failing_axiom })
}

/// Type from the eigenvalues of a generic combination `A = Σ c_i A_i`: the
/// characteristic polynomial is `q(λ²)`; negative roots of `q` are elliptic
/// pairs, positive roots hyperbolic pairs, complex pairs focus-focus quadruples.
/// Refuses non-Cartan families.
pub fn williamson_type(a: &[QMatrix], omega: &QMatrix) -> Result<WilliamsonType> {
    let rep = is_cartan(a, omega)?;
    if let Some(axiom) = rep.failing_axiom {
        return Err(Error::Degenerate(format!("not a Cartan subalgebra: {axiom}")));
    }
    williamson_type_unchecked(a, 0, 32)
}

/// Classification without the Cartan test, resampling the combination up to
/// `max_resamples` times when `q` has a repeated or zero root.
pub fn williamson_type_unchecked(a: &[QMatrix], seed: u64, max_resamples: usize) -> Result<WilliamsonType> {
    let dim = a.first().map(|m| m.rows).ok_or_else(|| Error::Degenerate("empty family".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_resamples {
        let mut comb = QMatrix::zeros(dim, dim);
        for m in a {
            let c = Q::new(BigInt::from(rng.random_range(1i64..=97)), BigInt::from(rng.random_range(1i64..=13)));
            comb = &comb + &m.scale(&c);
        }
        let Some(qpoly) = comb.charpoly().even_part_in_square() else {
            return Err(Error::Degenerate("characteristic polynomial is not even; input is not in sp(2n)".into()));
        };
        if qpoly.eval(&Q::zero()).is_zero() || !qpoly.is_squarefree() {
            continue;
        }
        return Ok(type_from_q(&qpoly, dim / 2));
    }
    Err(Error::Degenerate(format!("spectrum still degenerate after {max_resamples} combinations")))
}

fn type_from_q(qpoly: &UPoly, n: usize) -> WilliamsonType {
    let zero = Q::zero();
    let e = qpoly.count_real_roots(None, Some(&zero));
    let h = qpoly.count_real_roots(Some(&zero), None);
    WilliamsonType::new(e, h, (n - e - h) / 2)
}

/// Basis of `∩ ker A_i`.
pub fn fixed_point_set(a: &[QMatrix], dim: usize) -> Vec<Vec<Q>> {
    if a.is_empty() {
        let id = QMatrix::identity(dim);
        return (0..dim).map(|j| id.column(j)).collect();
    }
    let stacked = QMatrix::from_fn(a.len() * dim, dim, |r, c| a[r / dim][(r % dim, c)].clone());
    stacked.nullspace()
}

/// Product of elliptic, hyperbolic and focus-focus models on `R^{2n}` with the
/// canonical form: block `k` uses the pair `(x_k, y_k)`.
pub fn normal_model(t: WilliamsonType, n: usize) -> Result<PolyIntegrableSystem> {
    if t.n() != n {
        return Err(Error::Type(format!("type {t} has e + h + 2f = {}, not {n}", t.n())));
    }
    let dim = 2 * n;
    let x = |k: usize| Polynomial::var(dim, k);
    let y = |k: usize| Polynomial::var(dim, n + k);
    let mut mu = Vec::with_capacity(n);
    let mut k = 0;
    for _ in 0..t.e {
        mu.push((&x(k).pow(2) + &y(k).pow(2)).scale(&qf(1, 2)));
        k += 1;
    }
    for _ in 0..t.h {
        mu.push(&x(k) * &y(k));
        k += 1;
    }
    for _ in 0..t.f {
        mu.push(&(&x(k) * &y(k)) + &(&x(k + 1) * &y(k + 1)));
        mu.push(&(&x(k) * &y(k + 1)) - &(&x(k + 1) * &y(k)));
        k += 2;
    }
    PolyIntegrableSystem::new(canonical_omega(n), mu)
}

/// Random exact symplectic matrix for the canonical form: a product of shears
/// `[[I, B], [0, I]]`, `[[I, 0], [C, I]]` (`B`, `C` symmetric) and `diag(M, M^{−T})`.
pub fn random_symplectic<R: Rng>(n: usize, rng: &mut R) -> QMatrix {
    let small = |rng: &mut R| Q::new(BigInt::from(rng.random_range(-3i64..=3)), BigInt::from(rng.random_range(1i64..=3)));
    let sym = |rng: &mut R| {
        let mut b = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = small(rng);
                b[(i, j)] = v.clone();
                b[(j, i)] = v;
            }
        }
        b
    };
    let block = |tl: &QMatrix, tr: &QMatrix, bl: &QMatrix, br: &QMatrix| {
        QMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => tl[(i, j)].clone(),
            (true, false) => tr[(i, j - n)].clone(),
            (false, true) => bl[(i - n, j)].clone(),
            (false, false) => br[(i - n, j - n)].clone(),
        })
    };
    let id = QMatrix::identity(n);
    let zero = QMatrix::zeros(n, n);
    let upper = block(&id, &sym(rng), &zero, &id);
    let lower = block(&id, &zero, &sym(rng), &id);
    // unit upper-triangular M is always invertible
    let mut m = QMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = small(rng);
        }
    }
    let mit = m.inverse().expect("unit triangular").transpose();
    let diag = block(&m, &zero, &zero, &mit);
    &(&upper * &lower) * &diag
}

/// JSON classification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilliamsonReport {
    #[serde(rename = "type")]
    pub kind: WilliamsonType,
    pub cartan: bool,
    pub diagnostics: CartanReport,
    pub fixed_point_set_dim: usize,
}

/// Hessian Lie algebra at `x`, Cartan test and type.
pub fn classify(system: &PolyIntegrableSystem, x: &[Q]) -> Result<WilliamsonReport> {
    let a = hessian_lie_algebra(system, x)?;
    let diagnostics = is_cartan(&a, &system.omega)?;
    if let Some(axiom) = &diagnostics.failing_axiom {
        return Err(Error::Degenerate(format!("not a Cartan subalgebra: {axiom}")));
    }
    let kind = williamson_type_unchecked(&a, 0, 32)?;
    Ok(WilliamsonReport { kind, cartan: true, fixed_point_set_dim: fixed_point_set(&a, system.dim()).len(), diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interleave_to_split(n: usize) -> QMatrix {
        // P maps interleaved (x1,y1,x2,y2,…) coordinates to (x1..xn, y1..yn)
        QMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let target = if j % 2 == 0 { j / 2 } else { n + j / 2 };
            if i == target {
                q(1)
            } else {
                Q::zero()
            }
        })
    }

    #[test]
    fn elliptic_and_hyperbolic_blocks() {
        let a = hessian_lie_algebra(&normal_model(WilliamsonType::new(1, 0, 0), 1).unwrap(), &[q(0), q(0)]).unwrap();
        assert_eq!(a[0], QMatrix::from_i64(2, 2, &[0, -1, 1, 0]));
        let a = hessian_lie_algebra(&normal_model(WilliamsonType::new(0, 1, 0), 1).unwrap(), &[q(0), q(0)]).unwrap();
        assert_eq!(a[0], QMatrix::from_i64(2, 2, &[-1, 0, 0, 1]));
    }

    #[test]
    fn focus_focus_blocks_match_interleaved_form() {
        let s = normal_model(WilliamsonType::new(0, 0, 1), 2).unwrap();
        let a = hessian_lie_algebra(&s, &[q(0), q(0), q(0), q(0)]).unwrap();
        let p = interleave_to_split(2);
        let pinv = p.inverse().unwrap();
        let ff1 = QMatrix::from_i64(4, 4, &[-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1]);
        let ff2 = QMatrix::from_i64(4, 4, &[0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0]);
        assert_eq!(a[0], &(&p * &ff1) * &pinv);
        assert_eq!(a[1], &(&p * &ff2) * &pinv);
    }

    #[test]
    fn zero_hessian_and_not_fixed() {
        let x = Polynomial::var(2, 0);
        let s = PolyIntegrableSystem::canonical(vec![x.pow(3)]).unwrap();
        let a = hessian_lie_algebra(&s, &[q(0), q(0)]).unwrap();
        assert!(a[0].is_zero());
        let rep = is_cartan(&a, &s.omega).unwrap();
        assert!(!rep.is_cartan);
        assert_eq!(fixed_point_set(&a, 2).len(), 2);
        let s = PolyIntegrableSystem::canonical(vec![x]).unwrap();
        assert!(matches!(hessian_lie_algebra(&s, &[q(0), q(0)]), Err(Error::NotAFixedPoint(_))));
    }

    #[test]
    fn types_of_small_models() {
        for (t, n) in [((2, 0, 0), 2), ((1, 1, 0), 2), ((0, 0, 1), 2)] {
            let t = WilliamsonType::from([t.0, t.1, t.2]);
            let s = normal_model(t, n).unwrap();
            let a = hessian_lie_algebra(&s, &vec![q(0); 2 * n]).unwrap();
            assert!(is_cartan(&a, &s.omega).unwrap().is_cartan);
            assert_eq!(williamson_type(&a, &s.omega).unwrap(), t);
            assert!(fixed_point_set(&a, 2 * n).is_empty());
        }
    }

    #[test]
    fn shears_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = canonical_omega(3);
        let s = random_symplectic(3, &mut rng);
        assert_eq!(&(&s.transpose() * &w) * &s, w);
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(normal_model(WilliamsonType::new(1, 0, 1), 2), Err(Error::Type(_))));
    }
}
