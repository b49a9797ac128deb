//! Discrete function spaces on nested box domains.

mod extend;
mod io;
mod norm;
mod section;

pub use extend::{extend, reflection_weights, ExtensionParams};
pub use io::{read_binary, read_json, write_binary, write_json, write_norm_table, NormRow};
pub use norm::{
    ck_norm, ck_norm_with, interpolation_check, multi_indices, partial_derivative, CkNormReport, InterpolationRatio,
};
pub use section::{GridSection, GridSpec};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed axis-aligned box `Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Box {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Dimension(format!("box bounds of lengths {} and {}", lo.len(), hi.len())));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Domain(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-h, h]^m`.
    pub fn cube(m: usize, h: f64) -> Self {
        Self { lo: vec![-h; m], hi: vec![h; m] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter().enumerate().all(|(i, &v)| v >= self.lo[i] - tol && v <= self.hi[i] + tol)
    }

    /// `other ⊆ self`, up to `tol`.
    pub fn contains_box(&self, other: &Box, tol: f64) -> bool {
        (0..self.dim()).all(|i| other.lo[i] >= self.lo[i] - tol && other.hi[i] <= self.hi[i] + tol)
    }

    /// `other ⊆ interior(self)` with a margin of at least `margin` on every side.
    pub fn contains_with_margin(&self, other: &Box, margin: f64) -> bool {
        (0..self.dim()).all(|i| other.lo[i] - margin > self.lo[i] && other.hi[i] + margin < self.hi[i])
    }

    /// Smallest distance between a face of `other` and the matching face of `self`.
    pub fn margin_to(&self, other: &Box) -> f64 {
        (0..self.dim())
            .flat_map(|i| [other.lo[i] - self.lo[i], self.hi[i] - other.hi[i]])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shrink(&self, d: f64) -> Result<Box> {
        Box::new(self.lo.iter().map(|a| a + d).collect(), self.hi.iter().map(|b| b - d).collect())
    }
}

/// One-parameter family of boxes `D_r`, `r ∈ [0, 1]`, with half-widths
/// `base + r·growth` about a fixed center. Default: `D_r = {|x_i| ≤ 1 + r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedDomain {
    pub center: Vec<f64>,
    pub base: Vec<f64>,
    pub growth: Vec<f64>,
}

impl NestedDomain {
    pub fn standard(m: usize) -> Self {
        Self { center: vec![0.0; m], base: vec![1.0; m], growth: vec![1.0; m] }
    }

    pub fn new(center: Vec<f64>, base: Vec<f64>, growth: Vec<f64>) -> Result<Self> {
        if center.len() != base.len() || base.len() != growth.len() {
            return Err(Error::Dimension("nested domain parameter lengths differ".into()));
        }
        if base.iter().any(|b| *b <= 0.0) || growth.iter().any(|g| *g <= 0.0) {
            return Err(Error::Domain("nested domain needs positive base and growth".into()));
        }
        Ok(Self { center, base, growth })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn check_r(r: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("domain parameter r = {r} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn at(&self, r: f64) -> Result<Box> {
        Self::check_r(r)?;
        Ok(self.at_unchecked(r))
    }

    /// `D_r` without the range check; used by schedules whose radii are
    /// rescaled outside the unit interval.
    pub fn at_unchecked(&self, r: f64) -> Box {
        let half: Vec<f64> = self.base.iter().zip(&self.growth).map(|(b, g)| b + r * g).collect();
        Box {
            lo: self.center.iter().zip(&half).map(|(c, h)| c - h).collect(),
            hi: self.center.iter().zip(&half).map(|(c, h)| c + h).collect(),
        }
    }

    /// `D_r ⊆ interior(D_s)`.
    pub fn strictly_nested(&self, r: f64, s: f64) -> Result<bool> {
        let (dr, ds) = (self.at(r)?, self.at(s)?);
        Ok(r < s && ds.contains_with_margin(&dr, 0.0))
    }

    /// Componentwise C^k norm over `D_r`.
    pub fn ck_norm(&self, e: &GridSection, k: usize, r: f64) -> Result<CkNormReport> {
        let mut rep = ck_norm(e, k, &self.at(r)?)?;
        rep.r = Some(r);
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_validation() {
        assert!(Box::new(vec![0.0], vec![0.0]).is_err());
        assert!(Box::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let b = Box::cube(2, 1.0);
        assert!(b.contains(&[1.0, -1.0], 0.0));
        assert!(!b.contains(&[1.1, 0.0], 0.0));
    }

    #[test]
    fn standard_family() {
        let d = NestedDomain::standard(2);
        assert_eq!(d.at(0.5).unwrap(), Box::cube(2, 1.5));
        assert!(d.at(1.5).is_err());
        assert!(d.strictly_nested(0.2, 0.3).unwrap());
        assert!(!d.strictly_nested(0.3, 0.3).unwrap());
    }
}
