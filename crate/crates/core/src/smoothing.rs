//! Smoothing operators `S_t = restrict ∘ (K_t *) ∘ extend` on box domains.

use crate::error::{Error, Result};
use crate::grid::{ck_norm, extend, Box, ExtensionParams, GridSection};
use crate::numerics::bump::bump;
use crate::numerics::quad::gauss_legendre_on;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Tensor-product kernel `K_t(x) = Π t·k(t x_i)` with
/// `k(u) = bump(u)·p(u²)`, `p` chosen so the moments of orders `1..=moments` vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    /// Highest vanishing moment (even).
    pub moments: usize,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self { moments: 6 }
    }
}

impl Mollifier {
    fn unknowns(&self) -> usize {
        self.moments / 2 + 1
    }

    /// Solves for `p` given sample points `u_j` and quadrature weights `q_j`
    /// so that `Σ q_j bump(u_j) p(u_j²) u_j^{2a} = δ_{a0}`.
    fn solve(&self, u: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        let n = self.unknowns();
        let a = DMatrix::from_fn(n, n, |row, col| {
            u.iter().zip(q).map(|(x, w)| w * bump(*x) * x.powi(2 * (row + col) as i32)).sum::<f64>()
        });
        let mut rhs = DVector::zeros(n);
        rhs[0] = 1.0;
        let c = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Resolution("kernel moment system is singular".into()))?;
        Ok(c.iter().copied().collect())
    }

    /// Polynomial coefficients of the continuous profile (in powers of u²).
    pub fn profile_coefficients(&self) -> Vec<f64> {
        let (u, q) = gauss_legendre_on(200, -1.0, 1.0);
        self.solve(&u, &q).expect("continuous moment system is regular")
    }

    /// Continuous profile `k(u)`; `t·k(t x)` is the 1D kernel at scale `t`.
    pub fn profile(&self, u: f64) -> f64 {
        let c = self.profile_coefficients();
        bump(u) * c.iter().enumerate().map(|(i, ci)| ci * u.powi(2 * i as i32)).sum::<f64>()
    }

    /// Discrete 1D weights `w_j`, `j = −J..=J`, for spacing `h` at scale `t`:
    /// `Σ w_j = 1` and `Σ w_j (j h)^a = 0` for `1 ≤ a ≤ moments`, to rounding.
    pub fn weights(&self, h: f64, t: f64) -> Result<Vec<f64>> {
        if t <= 1.0 {
            return Err(Error::Domain(format!("smoothing scale t = {t} must exceed 1")));
        }
        if h > 1.0 / (4.0 * t) + 1e-12 {
            return Err(Error::Resolution(format!("spacing {h} does not resolve kernel width 1/t = {}", 1.0 / t)));
        }
        let half = (1.0 / (t * h)).ceil() as usize;
        let u: Vec<f64> = (-(half as isize)..=half as isize).map(|j| j as f64 * h * t).collect();
        let ones = vec![1.0; u.len()];
        let c = self.solve(&u, &ones)?;
        Ok(u.iter()
            .map(|x| bump(*x) * c.iter().enumerate().map(|(i, ci)| ci * x.powi(2 * i as i32)).sum::<f64>())
            .collect())
    }
}

/// `S_t e`: extend `e` beyond its domain, convolve with `K_t`, restrict back.
pub fn smooth(e: &GridSection, t: f64, kernel: &Mollifier) -> Result<GridSection> {
    let m = e.dim();
    let mut ext_params = ExtensionParams::default();
    // keep the extension uncut over the kernel window when the reflections fit
    let shortest = (0..m).map(|ax| e.domain().hi[ax] - e.domain().lo[ax]).fold(f64::INFINITY, f64::min);
    let room = shortest / (ext_params.k_max + 1) as f64 - ext_params.width;
    ext_params.plateau = (1.0 / t).min(room).max(0.0);
    let weights: Vec<Vec<f64>> = (0..m).map(|ax| kernel.weights(e.spec.spacing(ax), t)).collect::<Result<_>>()?;
    let hmax = (0..m).map(|ax| e.spec.spacing(ax)).fold(0.0, f64::max);
    let grow = (1.0 / t).max(ext_params.width + ext_params.plateau) * 1.01 + 2.0 * hmax;
    let dom = e.domain();
    let k = Box::new(dom.lo.iter().map(|a| a - grow).collect(), dom.hi.iter().map(|b| b + grow).collect())?;
    let ext = extend(e, &k, ext_params)?;
    let mut vals = ext.values.clone();
    for (ax, w) in weights.iter().enumerate() {
        vals = convolve_axis(&ext, &vals, ax, w);
    }
    let conv = GridSection { values: vals, ..ext };
    conv.restrict(dom)
}

fn convolve_axis(g: &GridSection, vals: &[f64], ax: usize, w: &[f64]) -> Vec<f64> {
    let counts = &g.spec.counts;
    let n = counts[ax];
    let inner: usize = counts[ax + 1..].iter().product::<usize>() * g.fiber;
    let half = (w.len() - 1) / 2;
    let mut out = vec![0.0; vals.len()];
    crate::par::for_each_chunk_mut(&mut out, inner, |chunk, dst| {
        let (o, i) = (chunk / n, chunk % n);
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        for src in lo..=hi {
            // Σ_j w_j f(x − j h): source index i − j
            let wj = w[half + i - src];
            let base = (o * n + src) * inner;
            for (c, d) in dst.iter_mut().enumerate() {
                *d += wj * vals[base + c];
            }
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingRatios {
    pub t: f64,
    pub k: usize,
    pub l: usize,
    /// `‖S_t e‖_k / (t^l ‖e‖_{k−l})`
    pub growth: f64,
    /// `t^l ‖e − S_t e‖_{k−l} / ‖e‖_k`
    pub decay: f64,
}

/// Both normalized smoothing ratios on `e`'s domain; 0 when `e` vanishes.
pub fn smoothing_inequality_check(e: &GridSection, t: f64, k: usize, l: usize, kernel: &Mollifier) -> Result<SmoothingRatios> {
    if l > k || k + 2 > kernel.moments {
        return Err(Error::Degree(format!("need l <= k <= {}, got k = {k}, l = {l}", kernel.moments - 2)));
    }
    let dom = e.domain().clone();
    let se = smooth(e, t, kernel)?;
    let diff = e.sub(&se)?;
    let tl = t.powi(l as i32);
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let growth = ratio(ck_norm(&se, k, &dom)?.value, tl * ck_norm(e, k - l, &dom)?.value);
    let decay = ratio(tl * ck_norm(&diff, k - l, &dom)?.value, ck_norm(e, k, &dom)?.value);
    Ok(SmoothingRatios { t, k, l, growth, decay })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn continuous_profile_moments() {
        let mo = Mollifier::default();
        let (u, q) = gauss_legendre_on(400, -1.0, 1.0);
        for a in 0..=6 {
            let s: f64 = u.iter().zip(&q).map(|(x, w)| w * mo.profile(*x) * x.powi(a)).sum();
            let want = if a == 0 { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-10, "moment {a}: {s}");
        }
    }

    #[test]
    fn discrete_weights_moments() {
        let w = Mollifier::default().weights(0.01, 8.0).unwrap();
        let half = (w.len() - 1) / 2;
        for a in 0..=7 {
            let s: f64 = w.iter().enumerate().map(|(j, wj)| wj * ((j as f64 - half as f64) * 0.01).powi(a)).sum();
            let want = if a == 0 { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-12, "moment {a}: {s}");
        }
    }

    #[test]
    fn under_resolved_kernel() {
        assert!(matches!(Mollifier::default().weights(0.1, 4.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn reproduces_polynomials() {
        let f = |x: &[f64]| 1.0 + x[0] - 2.0 * x[0] * x[1] * x[1] + x[1].powi(5) - 0.3 * x[0].powi(3) * x[1].powi(3);
        let e = GridSection::from_scalar_fn(GridSpec::uniform(Box::cube(2, 2.0), 161).unwrap(), f);
        let s = smooth(&e, 4.0, &Mollifier::default()).unwrap();
        assert!(s.sub(&e).unwrap().max_abs() < 1e-9, "{}", s.sub(&e).unwrap().max_abs());
        // short domain: reflections cannot cover the kernel window, exact away from a 1/t collar
        let e = GridSection::from_scalar_fn(GridSpec::uniform(Box::cube(2, 1.0), 81).unwrap(), f);
        let s = smooth(&e, 4.0, &Mollifier::default()).unwrap();
        let inner = Box::cube(2, 0.75);
        assert!(s.sub(&e).unwrap().sup_norm_on(&inner) < 1e-9);
    }

    #[test]
    fn constant_and_zero() {
        let spec = GridSpec::uniform(Box::cube(1, 2.0), 201).unwrap();
        let c = GridSection::from_scalar_fn(spec.clone(), |_| 2.5);
        let s = smooth(&c, 3.0, &Mollifier::default()).unwrap();
        assert!(s.values.iter().all(|v| (v - 2.5).abs() < 1e-12));
        let z = GridSection::zeros(spec, 1);
        let r = smoothing_inequality_check(&z, 3.0, 2, 1, &Mollifier::default()).unwrap();
        assert_eq!((r.growth, r.decay), (0.0, 0.0));
    }
}
