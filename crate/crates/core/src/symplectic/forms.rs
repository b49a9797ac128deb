use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::exact::{q, Q};
use rand::Rng;
use std::collections::BTreeMap;

/// Sign of the permutation sorting `idx`, with the sorted tuple; `None` on a
/// repeated index.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Increasing `k`-tuples in `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Polynomial vector field `Σ v_i ∂_i`.
pub type VectorField = Vec<Polynomial>;

/// `v(g) = Σ v_i ∂_i g`.
pub fn lie_derivative(v: &VectorField, g: &Polynomial) -> Polynomial {
    v.iter().enumerate().fold(Polynomial::zero(g.nvars()), |acc, (i, vi)| &acc + &(vi * &g.partial(i)))
}

/// Polynomial-coefficient `p`-form on `R^dim`, `Σ_I a_I dx^I` over increasing
/// index tuples `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyForm {
    dim: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Polynomial>,
}

impl PolyForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, comps: BTreeMap::new() }
    }

    pub fn function(f: Polynomial) -> Self {
        let mut out = Self::zero(f.nvars(), 0);
        out.add_component(&[], f);
        out
    }

    /// `dx^{i_0} ∧ … ∧ dx^{i_{p−1}}` with constant coefficient 1.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut out = Self::zero(dim, idx.len());
        out.add_component(idx, Polynomial::constant(dim, q(1)));
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
        self.comps.iter()
    }

    /// Adds `c dx^idx` for any (not necessarily increasing) index tuple.
    pub fn add_component(&mut self, idx: &[usize], c: Polynomial) {
        assert_eq!(idx.len(), self.degree, "form degree");
        assert_eq!(c.nvars(), self.dim, "coefficient variables");
        let Some((sorted, sign)) = sort_with_sign(idx) else { return };
        let c = if sign < 0 { -&c } else { c };
        let slot = self.comps.entry(sorted.clone()).or_insert_with(|| Polynomial::zero(self.dim));
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.comps.remove(&sorted);
        }
    }

    /// Coefficient of `dx^idx`, antisymmetric in `idx`.
    pub fn get(&self, idx: &[usize]) -> Polynomial {
        match sort_with_sign(idx) {
            Some((s, sign)) => match self.comps.get(&s) {
                Some(c) if sign < 0 => -c,
                Some(c) => c.clone(),
                None => Polynomial::zero(self.dim),
            },
            None => Polynomial::zero(self.dim),
        }
    }

    fn check_same(&self, other: &Self) {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree), "form shape mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for (i, c) in &other.comps {
            out.add_component(i, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { comps: self.comps.iter().map(|(i, c)| (i.clone(), -c)).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Q) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (i, c) in &self.comps {
            out.add_component(i, c.scale(s));
        }
        out
    }

    /// `f ∧ self` for a function `f`.
    pub fn mul_fn(&self, f: &Polynomial) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (i, c) in &self.comps {
            out.add_component(i, f * c);
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "form dimension mismatch");
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (i, a) in &self.comps {
            for (j, b) in &other.comps {
                let idx: Vec<usize> = i.iter().chain(j).cloned().collect();
                out.add_component(&idx, a * b);
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.dim, self.degree + 1);
        for (idx, c) in &self.comps {
            for j in 0..self.dim {
                let dc = c.partial(j);
                if dc.is_zero() {
                    continue;
                }
                let full: Vec<usize> = std::iter::once(j).chain(idx.iter().cloned()).collect();
                out.add_component(&full, dc);
            }
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.d().is_zero()
    }

    /// `α(V_0, …, V_{p−1}) = Σ_I a_I det[dx^{i_b}(V_a)]`.
    pub fn evaluate(&self, fields: &[VectorField]) -> Polynomial {
        assert_eq!(fields.len(), self.degree, "number of vector fields");
        let mut acc = Polynomial::zero(self.dim);
        for (idx, c) in &self.comps {
            let m: Vec<Vec<&Polynomial>> = fields.iter().map(|v| idx.iter().map(|&i| &v[i]).collect()).collect();
            acc = &acc + &(c * &poly_det(&m));
        }
        acc
    }

    /// Interior product `i_V α`.
    pub fn interior(&self, v: &VectorField) -> Self {
        assert!(self.degree > 0, "interior product of a function");
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (idx, c) in &self.comps {
            for (m, &i) in idx.iter().enumerate() {
                let rest: Vec<usize> = idx.iter().enumerate().filter(|(k, _)| *k != m).map(|(_, &j)| j).collect();
                let t = c * &v[i];
                out.add_component(&rest, if m % 2 == 0 { t } else { -&t });
            }
        }
        out
    }

    /// Radial homotopy `P α = Σ_I Σ_m (−1)^m (∫_0^1 t^{p−1} a_I(tx) dt) x^{i_m} dx^{I∖i_m}`,
    /// exact on polynomial coefficients. Requires `dα = 0` and `p ≥ 1`.
    pub fn poincare_homotopy(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Degree("homotopy of a 0-form".into()));
        }
        if !self.is_closed() {
            return Err(Error::NotClosed(format!("{}-form with dα ≠ 0", self.degree)));
        }
        Ok(self.radial_homotopy())
    }

    /// The radial homotopy without the closedness check.
    pub fn radial_homotopy(&self) -> Self {
        let p = self.degree;
        let mut out = Self::zero(self.dim, p.saturating_sub(1));
        if p == 0 {
            return out;
        }
        for (idx, c) in &self.comps {
            let integrated = Polynomial::from_terms(
                self.dim,
                c.terms().map(|(e, a)| (e.clone(), a / q((p as u32 + e.iter().sum::<u32>()) as i64))),
            );
            for (m, &i) in idx.iter().enumerate() {
                let rest: Vec<usize> = idx.iter().enumerate().filter(|(k, _)| *k != m).map(|(_, &j)| j).collect();
                let t = &integrated * &Polynomial::var(self.dim, i);
                out.add_component(&rest, if m % 2 == 0 { t } else { -&t });
            }
        }
        out
    }

    pub fn random<R: Rng>(dim: usize, degree: usize, max_poly_degree: u32, terms: usize, rng: &mut R) -> Self {
        let mut out = Self::zero(dim, degree);
        for idx in increasing_tuples(dim, degree) {
            out.add_component(&idx, Polynomial::random(dim, max_poly_degree, terms, rng));
        }
        out
    }
}

/// Determinant of a small matrix of polynomials by cofactor expansion.
pub fn poly_det(m: &[Vec<&Polynomial>]) -> Polynomial {
    let n = m.len();
    let nvars = m.first().and_then(|r| r.first()).map(|p| p.nvars());
    match n {
        0 => Polynomial::constant(nvars.unwrap_or(0), q(1)),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Polynomial::zero(nvars.unwrap());
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<&Polynomial>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, p)| *p).collect()).collect();
                let t = m[0][j] * &poly_det(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sorting_sign() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((vec![0, 1, 2], 1)));
        assert_eq!(sort_with_sign(&[1, 0]), Some((vec![0, 1], -1)));
        assert_eq!(sort_with_sign(&[1, 1]), None);
        assert_eq!(increasing_tuples(4, 2).len(), 6);
    }

    #[test]
    fn d_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 0..3 {
            let a = PolyForm::random(4, p, 3, 3, &mut rng);
            assert!(a.d().d().is_zero());
        }
    }

    #[test]
    fn area_form_primitive() {
        let a = PolyForm::basis(2, &[0, 1]);
        let p = a.poincare_homotopy().unwrap();
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        assert_eq!(p.get(&[1]), x.scale(&qf(1, 2)));
        assert_eq!(p.get(&[0]), y.scale(&qf(-1, 2)));
        assert_eq!(p.d(), a);
    }

    #[test]
    fn not_closed_is_rejected() {
        let x = Polynomial::var(2, 0);
        let a = PolyForm::basis(2, &[1]).mul_fn(&x);
        assert!(matches!(a.poincare_homotopy(), Err(Error::NotClosed(_))));
    }

    #[test]
    fn evaluate_matches_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = PolyForm::random(3, 2, 2, 2, &mut rng);
        let u: VectorField = (0..3).map(|_| Polynomial::random(3, 1, 2, &mut rng)).collect();
        let v: VectorField = (0..3).map(|_| Polynomial::random(3, 1, 2, &mut rng)).collect();
        let lhs = a.evaluate(&[u.clone(), v.clone()]);
        let rhs = a.interior(&u).evaluate(&[v]);
        assert_eq!(lhs, rhs);
    }
}
