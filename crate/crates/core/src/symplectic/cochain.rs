use super::forms::{increasing_tuples, sort_with_sign, PolyForm};
use super::poly::Polynomial;
use super::system::PolyIntegrableSystem;
use crate::error::{Error, Result};
use rand::Rng;
use std::collections::BTreeMap;

/// Cochain `(α, β) ∈ C^k = Ω^{k+1} ⊕ (Λ^k h* ⊗ C^∞)` of the deformation complex,
/// `h = R^n`. `β` is stored on increasing basis tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformCochain {
    pub degree: usize,
    pub alpha: PolyForm,
    beta: BTreeMap<Vec<usize>, Polynomial>,
    n: usize,
}

impl DeformCochain {
    pub fn zero(dim: usize, n: usize, degree: usize) -> Self {
        Self { degree, alpha: PolyForm::zero(dim, degree + 1), beta: BTreeMap::new(), n }
    }

    pub fn new(alpha: PolyForm, n: usize) -> Result<Self> {
        if alpha.degree() == 0 {
            return Err(Error::Degree("α must have degree k + 1 ≥ 1".into()));
        }
        Ok(Self { degree: alpha.degree() - 1, alpha, beta: BTreeMap::new(), n })
    }

    pub fn lie_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    /// Adds `f` to `β(e_{j_0}, …, e_{j_{k−1}})` (with antisymmetry).
    pub fn add_beta(&mut self, idx: &[usize], f: Polynomial) {
        assert_eq!(idx.len(), self.degree, "β arity");
        assert!(idx.iter().all(|&j| j < self.n), "basis index out of range");
        let Some((sorted, sign)) = sort_with_sign(idx) else { return };
        let f = if sign < 0 { -&f } else { f };
        let slot = self.beta.entry(sorted.clone()).or_insert_with(|| Polynomial::zero(self.alpha.dim()));
        *slot = &*slot + &f;
        if slot.is_zero() {
            self.beta.remove(&sorted);
        }
    }

    pub fn beta(&self, idx: &[usize]) -> Polynomial {
        match sort_with_sign(idx) {
            Some((s, sign)) => match self.beta.get(&s) {
                Some(f) if sign < 0 => -f,
                Some(f) => f.clone(),
                None => Polynomial::zero(self.alpha.dim()),
            },
            None => Polynomial::zero(self.alpha.dim()),
        }
    }

    pub fn beta_entries(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
        self.beta.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_empty()
    }

    /// Random cochain with coefficient degree ≤ `max_poly_degree`.
    pub fn random<R: Rng>(dim: usize, n: usize, degree: usize, max_poly_degree: u32, rng: &mut R) -> Self {
        let mut c = Self::zero(dim, n, degree);
        c.alpha = PolyForm::random(dim, degree + 1, max_poly_degree, 2, rng);
        for idx in increasing_tuples(n, degree) {
            c.add_beta(&idx, Polynomial::random(dim, max_poly_degree, 3, rng));
        }
        c
    }
}

/// `d(α, β) = (−dα, ρ*α + δβ)` with `ρ*α(h_0..h_k) = α(ρ(h_0), …, ρ(h_k))`,
/// `δβ(h_0..h_k) = Σ (−1)^i {μ(h_i), β(h_0..ĥ_i..h_k)}` and `ρ(h)` the
/// derivation `{μ(h), ·}`.
pub fn deformation_differential(c: &DeformCochain, system: &PolyIntegrableSystem) -> Result<DeformCochain> {
    let (dim, n) = (system.dim(), system.n());
    if c.dim() != dim || c.lie_dim() != n {
        return Err(Error::Dimension(format!("cochain on R^{} with h = R^{}, system on R^{dim} with h = R^{n}", c.dim(), c.lie_dim())));
    }
    if c.degree >= dim {
        return Err(Error::Degree(format!("C^{} → C^{} is beyond the complex on R^{dim}", c.degree, c.degree + 1)));
    }
    let k = c.degree;
    let mut out = DeformCochain::zero(dim, n, k + 1);
    out.alpha = c.alpha.d().neg();
    let fields: Vec<_> = (0..n).map(|j| system.basis_action(j)).collect();
    for idx in increasing_tuples(n, k + 1) {
        let vs: Vec<_> = idx.iter().map(|&j| fields[j].clone()).collect();
        let mut acc = c.alpha.evaluate(&vs);
        for (i, &j) in idx.iter().enumerate() {
            let rest: Vec<usize> = idx.iter().enumerate().filter(|(m, _)| *m != i).map(|(_, &v)| v).collect();
            let b = c.beta(&rest);
            if b.is_zero() {
                continue;
            }
            let t = system.bracket(&system.mu[j], &b);
            acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
        }
        out.add_beta(&idx, acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qf};

    fn elliptic() -> PolyIntegrableSystem {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        PolyIntegrableSystem::canonical(vec![(&x.pow(2) + &y.pow(2)).scale(&qf(1, 2))]).unwrap()
    }

    #[test]
    fn delta_of_a_component_vanishes() {
        let s = elliptic();
        let mut c = DeformCochain::zero(2, 1, 0);
        c.add_beta(&[], s.mu[0].clone());
        let d = deformation_differential(&c, &s).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn contraction_with_action_field() {
        // i_{ρ(e_1)}(dx ∧ dy) = −(x dx + y dy)
        let s = elliptic();
        let a = PolyForm::basis(2, &[0, 1]);
        let got = a.interior(&s.basis_action(0));
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let mut want = PolyForm::zero(2, 1);
        want.add_component(&[0], x.scale(&q(-1)));
        want.add_component(&[1], y.scale(&q(-1)));
        assert_eq!(got, want);
        // On C^0 the second component of d(θ, 0) is θ(ρ(e_1)).
        let theta = PolyForm::basis(2, &[0]).mul_fn(&y);
        let d = deformation_differential(&DeformCochain::new(theta.clone(), 1).unwrap(), &s).unwrap();
        assert_eq!(d.beta(&[0]), theta.evaluate(&[s.basis_action(0)]));
        assert_eq!(d.alpha, theta.d().neg());
    }

    #[test]
    fn degree_overflow() {
        let s = elliptic();
        let c = DeformCochain::zero(2, 1, 2);
        assert!(matches!(deformation_differential(&c, &s), Err(Error::Degree(_))));
    }
}
