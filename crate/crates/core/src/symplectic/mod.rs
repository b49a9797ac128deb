//! Exact polynomial Poisson calculus on `R^{2n}` with a constant symplectic
//! form, the deformation complex of an integrable system, the rescaling family
//! at a fixed point, and Darboux normalization on grids.

mod cochain;
mod darboux;
mod forms;
mod poly;
mod rescale;
mod system;

pub use darboux::{darboux_solve, linear_darboux, moser_path, pullback_coefficient, radial_average, DarbouxInstance, DarbouxSolution};
pub use cochain::{deformation_differential, DeformCochain};
pub use forms::{increasing_tuples, lie_derivative, poly_det, sort_with_sign, PolyForm, VectorField};
pub use poly::Polynomial;
pub use rescale::{check_fixed_point, formal_involution, moser_cocycle, rescaling_family, rescaling_family_formal, ClosednessCertificate};
pub use system::{canonical_omega, check_integrable, hamiltonian_vf, poisson_bracket, poisson_tensor, IntegrabilityReport, PolyIntegrableSystem};

/// Radial homotopy primitive of a closed polynomial form.
pub fn poincare_homotopy(alpha: &PolyForm) -> crate::Result<PolyForm> {
    alpha.poincare_homotopy()
}
