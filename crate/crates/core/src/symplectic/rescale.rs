use super::cochain::{deformation_differential, DeformCochain};
use super::poly::Polynomial;
use super::system::{bracket_with, PolyIntegrableSystem};
use crate::error::{Error, Result};
use crate::exact::{q, QMatrix, Q};
use num::Zero;
use serde::Serialize;

/// `μ(0) = 0` and `dμ(0) = 0` for every component.
pub fn check_fixed_point(system: &PolyIntegrableSystem) -> Result<()> {
    for (i, f) in system.mu.iter().enumerate() {
        if let Some(d) = f.order().filter(|&d| d < 2) {
            return Err(Error::NotAFixedPoint(format!("μ_{} has a term of degree {d} at the origin", i + 1)));
        }
    }
    Ok(())
}

/// `Σ_d r^{d−2} f_d` over homogeneous parts `f_d`, `d ≥ 2`; equals
/// `r^{−2} f(r x)` for `r ≠ 0`.
fn rescale_fn(f: &Polynomial, r: &Q) -> Polynomial {
    Polynomial::from_terms(
        f.nvars(),
        f.terms().map(|(e, c)| {
            let d = e.iter().sum::<u32>() as usize;
            (e.clone(), c * num::pow(r.clone(), d - 2))
        }),
    )
}

/// `(ω^r, μ^r) = (r^{−2}(m^r)^*ω, r^{−2} μ∘m^r)`. For constant `ω` the form is
/// unchanged; at `r = 0` this is the Hessian model.
pub fn rescaling_family(system: &PolyIntegrableSystem, r: &Q) -> Result<PolyIntegrableSystem> {
    check_fixed_point(system)?;
    PolyIntegrableSystem::new(system.omega.clone(), system.mu.iter().map(|f| rescale_fn(f, r)).collect())
}

/// `μ^r` with `r` as the extra last variable.
pub fn rescaling_family_formal(system: &PolyIntegrableSystem) -> Result<Vec<Polynomial>> {
    check_fixed_point(system)?;
    let dim = system.dim();
    Ok(system
        .mu
        .iter()
        .map(|f| {
            Polynomial::from_terms(
                dim + 1,
                f.terms().map(|(e, c)| {
                    let d = e.iter().sum::<u32>();
                    (e.iter().cloned().chain(std::iter::once(d - 2)).collect(), c.clone())
                }),
            )
        })
        .collect())
}

/// Exact check that `{μ_i^r, μ_j^r} = 0` identically in `r`.
pub fn formal_involution(system: &PolyIntegrableSystem) -> Result<bool> {
    let family = rescaling_family_formal(system)?;
    let dim = system.dim();
    let p = system.poisson();
    let ext = QMatrix::from_fn(dim + 1, dim + 1, |i, j| if i < dim && j < dim { p[(i, j)].clone() } else { Q::zero() });
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if !bracket_with(&family[i], &family[j], &ext).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact closedness certificate for the Moser cocycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosednessCertificate {
    pub r: String,
    pub closed: bool,
    pub alpha_zero: bool,
}

/// `c^r = (∂_r ω^r, ∂_r μ^r) ∈ C¹(ω^r, μ^r)` and an exact check of `d c^r = 0`.
pub fn moser_cocycle(system: &PolyIntegrableSystem, r: &Q) -> Result<(DeformCochain, ClosednessCertificate)> {
    let at_r = rescaling_family(system, r)?;
    let (dim, n) = (system.dim(), system.n());
    let mut c = DeformCochain::zero(dim, n, 1);
    for (j, f) in system.mu.iter().enumerate() {
        let dr = Polynomial::from_terms(
            dim,
            f.terms().filter(|(e, _)| e.iter().sum::<u32>() >= 3).map(|(e, a)| {
                let d = e.iter().sum::<u32>() as usize;
                (e.clone(), a * q(d as i64 - 2) * num::pow(r.clone(), d - 3))
            }),
        );
        c.add_beta(&[j], dr);
    }
    let closed = deformation_differential(&c, &at_r)?.is_zero();
    let cert = ClosednessCertificate { r: r.to_string(), closed, alpha_zero: c.alpha.is_zero() };
    Ok((c, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qf;

    fn perturbed_elliptic() -> PolyIntegrableSystem {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        PolyIntegrableSystem::canonical(vec![&(&x.pow(2) + &y.pow(2)).scale(&qf(1, 2)) + &x.pow(3)]).unwrap()
    }

    #[test]
    fn graded_expansion() {
        let s = perturbed_elliptic();
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let quad = (&x.pow(2) + &y.pow(2)).scale(&qf(1, 2));
        let r = qf(2, 3);
        assert_eq!(rescaling_family(&s, &r).unwrap().mu[0], &quad + &x.pow(3).scale(&r));
        assert_eq!(rescaling_family(&s, &Q::zero()).unwrap().mu[0], quad);
        // agrees with r^{-2} μ(r x) away from zero
        assert_eq!(rescaling_family(&s, &r).unwrap().mu[0], s.mu[0].rescale(&r).scale(&(q(1) / (&r * &r))));
    }

    #[test]
    fn fixed_point_required() {
        let x = Polynomial::var(2, 0);
        let s = PolyIntegrableSystem::canonical(vec![x]).unwrap();
        assert!(matches!(rescaling_family(&s, &q(1)), Err(Error::NotAFixedPoint(_))));
    }

    #[test]
    fn cocycle_is_closed() {
        let s = perturbed_elliptic();
        for r in [Q::zero(), qf(1, 2), q(3)] {
            let (c, cert) = moser_cocycle(&s, &r).unwrap();
            assert!(cert.closed && cert.alpha_zero);
            assert_eq!(c.beta(&[0]), Polynomial::var(2, 0).pow(3));
        }
    }
}
