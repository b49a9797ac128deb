//! Cauchy–Riemann operator and degree-one Dolbeault homotopy operators on
//! disks and polydisks.

mod cauchy;
mod forms;
mod function;

pub use cauchy::{bump_split, cauchy_monomial, cauchy_riemann, cauchy_riemann_with, chi, DEFAULT_EPS};
pub use forms::{
    dbar_form01, dbar_function, h1, h2, homotopy_residual, random_polynomial_form, Form01, Form02, HomotopyResidual,
    PolydiskFunction, Term,
};
pub use function::{ComplexGridFunction, SquareGrid};

use crate::error::Result;
use crate::numerics::fit::loglog_slope;
use serde::Serialize;

/// `‖T^{s,r} f‖_{k,r}` over a range of gaps `s − r` and the log-log slope in the gap.
#[derive(Debug, Clone, Serialize)]
pub struct TameFit {
    pub k: usize,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

pub fn cauchy_tame_fit(f: &ComplexGridFunction, s: f64, gaps: &[f64], k_max: usize, eps: f64) -> Result<Vec<TameFit>> {
    let outs = gaps.iter().map(|g| cauchy_riemann_with(f, s, s - g, eps)).collect::<Result<Vec<_>>>()?;
    (0..=k_max)
        .map(|k| {
            let norms = outs.iter().map(|t| t.ck_norm(k)).collect::<Result<Vec<_>>>()?;
            Ok(TameFit { k, points: gaps.iter().cloned().zip(norms.iter().cloned()).collect(), slope: loglog_slope(gaps, &norms) })
        })
        .collect()
}
