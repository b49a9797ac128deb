use super::forms::VectorField;
use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::exact::{q, q_from_json, QMatrix, Q};
use num::{BigInt, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

/// Canonical `ω = Σ dx_i ∧ dy_i` in the coordinates `(x_1..x_n, y_1..y_n)`,
/// as the matrix `W` with `ω(u, v) = uᵀ W v`.
pub fn canonical_omega(n: usize) -> QMatrix {
    QMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            q(1)
        } else if i == j + n {
            q(-1)
        } else {
            Q::zero()
        }
    })
}

/// Poisson tensor `P = W^{−T}`, so that `{f, g} = ∇fᵀ P ∇g`.
pub fn poisson_tensor(w: &QMatrix) -> Result<QMatrix> {
    if !w.is_square() || !w.rows.is_multiple_of(2) {
        return Err(Error::Dimension(format!("symplectic matrix must be 2n×2n, got {}×{}", w.rows, w.cols)));
    }
    if w.transpose() != -w {
        return Err(Error::Domain("ω is not antisymmetric".into()));
    }
    let inv = w.inverse().map_err(|_| Error::Domain("ω is degenerate".into()))?;
    Ok(inv.transpose())
}

pub(crate) fn bracket_with(f: &Polynomial, g: &Polynomial, p: &QMatrix) -> Polynomial {
    let df = f.gradient();
    let dg = g.gradient();
    let mut acc = Polynomial::zero(f.nvars());
    for (i, a) in df.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in dg.iter().enumerate() {
            let pij = &p[(i, j)];
            if !pij.is_zero() && !b.is_zero() {
                acc = &acc + &(a * b).scale(pij);
            }
        }
    }
    acc
}

fn check_vars(f: &Polynomial, w: &QMatrix) -> Result<()> {
    if f.nvars() != w.rows {
        return Err(Error::Dimension(format!("polynomial in {} variables, ω of size {}", f.nvars(), w.rows)));
    }
    Ok(())
}

/// `{f, g}_ω = π(df, dg)` with `π = ω^{−1}`; `{x_i, y_i} = 1` for the canonical form.
pub fn poisson_bracket(f: &Polynomial, g: &Polynomial, w: &QMatrix) -> Result<Polynomial> {
    check_vars(f, w)?;
    check_vars(g, w)?;
    Ok(bracket_with(f, g, &poisson_tensor(w)?))
}

/// Hamiltonian vector field `X_f = P ∇f`; for the canonical form
/// `X_f = Σ ∂_{y_i}f ∂_{x_i} − ∂_{x_i}f ∂_{y_i}`, hence `X_f(g) = −{f, g}`.
pub fn hamiltonian_vf(f: &Polynomial, w: &QMatrix) -> Result<VectorField> {
    check_vars(f, w)?;
    Ok(field_with(f, &poisson_tensor(w)?))
}

fn field_with(f: &Polynomial, p: &QMatrix) -> VectorField {
    let df = f.gradient();
    (0..p.rows)
        .map(|i| df.iter().enumerate().fold(Polynomial::zero(f.nvars()), |acc, (j, d)| &acc + &d.scale(&p[(i, j)])))
        .collect()
}

/// Integrable system `(R^{2n}, ω, μ)` with constant `ω` and polynomial `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyIntegrableSystem {
    pub omega: QMatrix,
    pub mu: Vec<Polynomial>,
    poisson: QMatrix,
}

impl PolyIntegrableSystem {
    /// Validates `ω`; involution is checked separately by [`check_integrable`].
    pub fn new(omega: QMatrix, mu: Vec<Polynomial>) -> Result<Self> {
        let poisson = poisson_tensor(&omega)?;
        let n = omega.rows / 2;
        if mu.len() != n {
            return Err(Error::Dimension(format!("{} components for a {}-dimensional space", mu.len(), 2 * n)));
        }
        for f in &mu {
            check_vars(f, &omega)?;
        }
        Ok(Self { omega, mu, poisson })
    }

    pub fn canonical(mu: Vec<Polynomial>) -> Result<Self> {
        let n = mu.first().map(|f| f.nvars() / 2).unwrap_or(0);
        Self::new(canonical_omega(n), mu)
    }

    /// Half the dimension.
    pub fn n(&self) -> usize {
        self.omega.rows / 2
    }

    pub fn dim(&self) -> usize {
        self.omega.rows
    }

    pub fn poisson(&self) -> &QMatrix {
        &self.poisson
    }

    pub fn bracket(&self, f: &Polynomial, g: &Polynomial) -> Polynomial {
        bracket_with(f, g, &self.poisson)
    }

    pub fn hamiltonian(&self, f: &Polynomial) -> VectorField {
        field_with(f, &self.poisson)
    }

    /// Infinitesimal action of `h`: the derivation `{μ(h), ·}` as a vector field,
    /// i.e. `−X_{μ(h)}`.
    pub fn action_field(&self, h: &[Q]) -> VectorField {
        let f = self.mu_of(h);
        self.hamiltonian(&f).iter().map(|c| -c).collect()
    }

    /// `μ(h) = Σ h_i μ_i`.
    pub fn mu_of(&self, h: &[Q]) -> Polynomial {
        self.mu.iter().zip(h).fold(Polynomial::zero(self.dim()), |acc, (m, c)| &acc + &m.scale(c))
    }

    /// Action field of the `j`-th basis vector.
    pub fn basis_action(&self, j: usize) -> VectorField {
        let mut h = vec![Q::zero(); self.n()];
        h[j] = q(1);
        self.action_field(&h)
    }

    /// `{"omega": [["p/q", …], …] (optional), "mu": [polynomial, …]}`; the
    /// number of variables is `2 · len(mu)`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let mu_v = v.get("mu").and_then(Value::as_array).ok_or_else(|| Error::Parse("system needs a \"mu\" list".into()))?;
        let dim = 2 * mu_v.len();
        let mu = mu_v.iter().map(|p| Polynomial::from_json(dim, p)).collect::<Result<Vec<_>>>()?;
        let omega = match v.get("omega") {
            None | Some(Value::Null) => canonical_omega(dim / 2),
            Some(w) => {
                let rows = w.as_array().ok_or_else(|| Error::Parse("omega must be a matrix".into()))?;
                if rows.len() != dim || rows.iter().any(|r| r.as_array().map(|r| r.len()) != Some(dim)) {
                    return Err(Error::Dimension(format!("omega must be {dim}×{dim}")));
                }
                let mut m = QMatrix::zeros(dim, dim);
                for (i, r) in rows.iter().enumerate() {
                    for (j, x) in r.as_array().unwrap().iter().enumerate() {
                        m[(i, j)] = q_from_json(x)?;
                    }
                }
                m
            }
        };
        Self::new(omega, mu)
    }

    pub fn to_json(&self) -> Value {
        let omega: Vec<Vec<String>> = (0..self.dim()).map(|i| (0..self.dim()).map(|j| self.omega[(i, j)].to_string()).collect()).collect();
        json!({ "omega": omega, "mu": self.mu.iter().map(Polynomial::to_json).collect::<Vec<_>>() })
    }
}

/// Outcome of the integrability check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub involutive: bool,
    /// First pair `(i, j)` with `{μ_i, μ_j} ≠ 0`.
    pub failing_pair: Option<(usize, usize)>,
    pub independent: bool,
    /// Point where `dμ_1 ∧ … ∧ dμ_n ≠ 0`.
    pub witness: Option<Vec<String>>,
    pub points_tried: usize,
}

impl IntegrabilityReport {
    pub fn passed(&self) -> bool {
        self.involutive && self.independent
    }
}

/// Exact involution check and independence at random rational points: the
/// Jacobian of `μ` has rank `n` somewhere iff the wedge of the differentials is
/// nonzero on a dense open set.
pub fn check_integrable(system: &PolyIntegrableSystem, seed: u64, points: usize) -> IntegrabilityReport {
    let n = system.n();
    let mut failing_pair = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            if !system.bracket(&system.mu[i], &system.mu[j]).is_zero() {
                failing_pair = Some((i, j));
                break 'outer;
            }
        }
    }
    let grads: Vec<Vec<Polynomial>> = system.mu.iter().map(Polynomial::gradient).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witness = None;
    let mut tried = 0;
    for _ in 0..points {
        tried += 1;
        let x: Vec<Q> =
            (0..system.dim()).map(|_| Q::new(BigInt::from(rng.random_range(-20i64..=20)), BigInt::from(rng.random_range(1i64..=7)))).collect();
        let jac = QMatrix::from_fn(n, system.dim(), |i, j| grads[i][j].eval(&x));
        if jac.rank() == n {
            witness = Some(x.iter().map(|c| c.to_string()).collect());
            break;
        }
    }
    IntegrabilityReport { involutive: failing_pair.is_none(), failing_pair, independent: witness.is_some(), witness, points_tried: tried }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;

    fn xy(n: usize) -> (Vec<Polynomial>, Vec<Polynomial>) {
        ((0..n).map(|i| Polynomial::var(2 * n, i)).collect(), (0..n).map(|i| Polynomial::var(2 * n, n + i)).collect())
    }

    #[test]
    fn canonical_pair() {
        let (x, y) = xy(1);
        let w = canonical_omega(1);
        assert_eq!(poisson_bracket(&x[0], &y[0], &w).unwrap(), Polynomial::constant(2, q(1)));
    }

    #[test]
    fn listed_hamiltonian_fields() {
        let (x, y) = xy(1);
        let w = canonical_omega(1);
        let ell = (&x[0].pow(2) + &y[0].pow(2)).scale(&qf(1, 2));
        assert_eq!(hamiltonian_vf(&ell, &w).unwrap(), vec![y[0].clone(), -&x[0]]);
        let hyp = &x[0] * &y[0];
        assert_eq!(hamiltonian_vf(&hyp, &w).unwrap(), vec![x[0].clone(), -&y[0]]);
        let c = Polynomial::constant(2, q(7));
        assert!(hamiltonian_vf(&c, &w).unwrap().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn dimension_mismatch() {
        let w = canonical_omega(2);
        let f = Polynomial::var(2, 0);
        assert!(matches!(poisson_bracket(&f, &f, &w), Err(Error::Dimension(_))));
    }

    #[test]
    fn degenerate_omega_rejected() {
        let w = QMatrix::zeros(2, 2);
        assert!(matches!(poisson_tensor(&w), Err(Error::Domain(_))));
    }

    #[test]
    fn system_json_round_trip() {
        let (x, y) = xy(1);
        let s = PolyIntegrableSystem::canonical(vec![&x[0] * &y[0]]).unwrap();
        let back = PolyIntegrableSystem::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
