use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Constants supplied by an instance: operator order `d` and the derivative
/// losses `l_1` (homotopy) and `l_2` (smoothing/action).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceConstants {
    pub d: usize,
    pub l1: usize,
    pub l2: usize,
}

impl InstanceConstants {
    pub fn p(&self) -> usize {
        (self.l1 + 1).max(self.d)
    }

    pub fn q(&self) -> usize {
        (6 * self.l1 + 5).max(4 * self.l2 + 1)
    }

    pub fn l(&self) -> usize {
        (4 * self.l1 + 1).max(self.l1 + self.l2)
    }

    pub fn n(&self) -> usize {
        (self.l1 + 1).max(self.l2 + self.d)
    }
}

/// `t_0`, `b`, the outer radii and every sequence of the iteration up to `ν_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsSchedule {
    pub t0: f64,
    pub b: f64,
    pub s: f64,
    pub r: f64,
    pub constants: InstanceConstants,
    pub p: usize,
    pub q: usize,
    pub l: usize,
    pub n: usize,
    pub nu_max: usize,
    /// `t_ν = t_0^{(3/2)^ν}`.
    pub t: Vec<f64>,
    /// `ε_ν = (s − r)^{b (3/2)^ν}`.
    pub eps: Vec<f64>,
    /// `s_ν`, one longer than the other sequences.
    pub s_seq: Vec<f64>,
    /// `r_ν = s_ν − ½(s − r) 3^{−(ν+1)}`.
    pub r_seq: Vec<f64>,
}

/// `c^ν t_ν^{−μ} < 1`, checked in logarithms.
fn pair_holds(c: f64, mu: f64, t0: f64, nu: usize) -> bool {
    (nu as f64) * c.ln() < mu * 1.5f64.powi(nu as i32) * t0.ln()
}

impl ConstantsSchedule {
    pub fn new(t0: f64, b: f64, s: f64, r: f64, constants: InstanceConstants, nu_max: usize) -> Result<Self> {
        if t0.is_nan() || t0 <= 1.0 {
            return Err(Error::Schedule(format!("t_0 = {t0} must exceed 1")));
        }
        if !(0.0 <= r && r < s && s <= 1.0) {
            return Err(Error::Schedule(format!("radii need 0 ≤ r < s ≤ 1, got r = {r}, s = {s}")));
        }
        if b.is_nan() || b < 0.0 {
            return Err(Error::Schedule(format!("b = {b} must be non-negative")));
        }
        let w = s - r;
        let t = (0..=nu_max).map(|nu| t0.powf(1.5f64.powi(nu as i32))).collect();
        let eps = (0..=nu_max).map(|nu| w.powf(b * 1.5f64.powi(nu as i32))).collect();
        let mut s_seq = vec![s];
        for nu in 0..=nu_max {
            let prev = s_seq[nu];
            s_seq.push(prev - w * 3f64.powi(-(nu as i32 + 1)));
        }
        let r_seq = (0..=nu_max).map(|nu| s_seq[nu] - 0.5 * w * 3f64.powi(-(nu as i32 + 1))).collect();
        Ok(Self {
            t0,
            b,
            s,
            r,
            constants,
            p: constants.p(),
            q: constants.q(),
            l: constants.l(),
            n: constants.n(),
            nu_max,
            t,
            eps,
            s_seq,
            r_seq,
        })
    }

    /// Overrides the low regularity index `p`.
    pub fn with_p(mut self, p: usize) -> Self {
        self.p = p;
        self
    }

    /// Validates `c^ν t_ν^{−μ} < 1` for every configured pair and `ν ≤ ν_max`.
    pub fn validate_pairs(&self, pairs: &[(f64, f64)]) -> Result<()> {
        for &(c, mu) in pairs {
            if c <= 0.0 || mu <= 0.0 {
                return Err(Error::Schedule(format!("pair (c = {c}, μ = {mu}) needs c, μ > 0")));
            }
            if let Some(nu) = (0..=self.nu_max).find(|&nu| !pair_holds(c, mu, self.t0, nu)) {
                return Err(Error::Schedule(format!(
                    "pair (c = {c}, μ = {mu}) violated at ν = {nu} for t_0 = {}; minimal admissible t_0 ≈ {:.6}",
                    self.t0,
                    min_admissible_t0(pairs, self.nu_max)
                )));
            }
        }
        Ok(())
    }

    pub fn r_inf(&self) -> f64 {
        0.5 * (self.s + self.r)
    }

    /// Smoothing parameter `ε_ν^{−1} t_ν`.
    pub fn smoothing_parameter(&self, nu: usize) -> f64 {
        self.t[nu] / self.eps[nu]
    }

    /// `(ε_ν^{−1} t_ν)^{2 l_1 + 1}`, the bound in hypothesis (a)_ν; its inverse bounds (b)_ν.
    pub fn hypothesis_scale(&self, nu: usize) -> f64 {
        self.smoothing_parameter(nu).powi(2 * self.constants.l1 as i32 + 1)
    }

    /// `log(ε_ν^{−1} t_ν)`, finite even where `t_ν` overflows.
    pub fn log_smoothing_parameter(&self, nu: usize) -> f64 {
        1.5f64.powi(nu as i32) * (self.t0.ln() - self.b * (self.s - self.r).ln())
    }

    /// `s_{ν+1} < r_ν < s_ν` for all `ν ≤ min(upto, ν_max)`. Past `ν ≈ 30` the
    /// gaps `3^{−ν}` fall below the spacing of doubles near `s` and the
    /// stored radii coincide.
    pub fn radii_nested(&self, upto: usize) -> bool {
        (0..=upto.min(self.nu_max)).all(|nu| self.s_seq[nu + 1] < self.r_seq[nu] && self.r_seq[nu] < self.s_seq[nu])
    }

    /// `log Π_{j<ν} ε_j^{−1}t_j` against `log (ε_ν^{−1}t_ν)²`.
    pub fn telescoping_logs(&self, nu: usize) -> (f64, f64) {
        let prod: f64 = (0..nu).map(|j| self.log_smoothing_parameter(j)).sum();
        (prod, 2.0 * self.log_smoothing_parameter(nu))
    }

    pub fn telescoping_holds(&self, nu: usize) -> bool {
        let (lhs, rhs) = self.telescoping_logs(nu);
        lhs < rhs
    }
}

/// Smallest `t_0` (to 1e-9 relative) for which all pairs hold up to `ν_max`, by bisection.
pub fn min_admissible_t0(pairs: &[(f64, f64)], nu_max: usize) -> f64 {
    let ok = |t0: f64| pairs.iter().all(|&(c, mu)| (0..=nu_max).all(|nu| pair_holds(c, mu, t0, nu)));
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
    }
    if ok(1.0 + 1e-12) {
        return 1.0;
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Both admissibility bounds with their margins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub norm_p: f64,
    pub bound_p: f64,
    pub norm_pq: f64,
    pub bound_pq: f64,
    /// `bound / norm` for each inequality (∞ for a zero norm).
    pub ratio_p: f64,
    pub ratio_pq: f64,
}

/// `‖e‖_{p,s} < (s−r)^b t_0^{−(2l_1+1)}` and `‖e‖_{p+q,s} < (s−r)^{−b} t_0^{2l_1+1}`, both strict.
pub fn admissibility_from_norms(norm_p: f64, norm_pq: f64, schedule: &ConstantsSchedule) -> Admissibility {
    let k = 2 * schedule.constants.l1 as i32 + 1;
    let w = (schedule.s - schedule.r).powf(schedule.b);
    let bound_p = w * schedule.t0.powi(-k);
    let bound_pq = schedule.t0.powi(k) / w;
    Admissibility {
        admissible: norm_p < bound_p && norm_pq < bound_pq,
        norm_p,
        bound_p,
        norm_pq,
        bound_pq,
        ratio_p: bound_p / norm_p,
        ratio_pq: bound_pq / norm_pq,
    }
}

/// Grid search over `t_0 ∈ {1.2, 1.4, …, 8}`, `b ∈ {1, …, 8}` for the schedule
/// maximizing `min(bound_p/‖e‖_p, bound_pq/‖e‖_pq)`; pairs that fail
/// validation are skipped. Returns `(t_0, b, admissibility)`.
pub fn search_schedule(
    norm_p: f64,
    norm_pq: f64,
    s: f64,
    r: f64,
    constants: InstanceConstants,
    nu_max: usize,
    pairs: &[(f64, f64)],
) -> Result<(f64, f64, Admissibility)> {
    let mut best: Option<(f64, f64, Admissibility)> = None;
    for ti in 0..=34 {
        let t0 = 1.2 + 0.2 * ti as f64;
        for b in 1..=8 {
            let sched = ConstantsSchedule::new(t0, b as f64, s, r, constants, nu_max)?;
            if sched.validate_pairs(pairs).is_err() {
                continue;
            }
            let a = admissibility_from_norms(norm_p, norm_pq, &sched);
            let score = a.ratio_p.min(a.ratio_pq);
            if best.as_ref().is_none_or(|(_, _, prev)| score > prev.ratio_p.min(prev.ratio_pq)) {
                best = Some((t0, b as f64, a));
            }
        }
    }
    best.ok_or_else(|| Error::Schedule("no grid point satisfies the configured pairs".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: InstanceConstants = InstanceConstants { d: 1, l1: 0, l2: 0 };

    #[test]
    fn listed_arithmetic() {
        let s = ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, C, 10).unwrap();
        assert!((s.t[2] - 2f64.powf(2.25)).abs() < 1e-12);
        assert!((s.s_seq[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.r_seq[0] - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.r_inf(), 0.5);
        assert_eq!((s.p, s.q, s.l, s.n), (1, 5, 1, 1));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(ConstantsSchedule::new(1.0, 1.0, 1.0, 0.0, C, 5), Err(Error::Schedule(_))));
        assert!(matches!(ConstantsSchedule::new(2.0, 1.0, 0.5, 0.5, C, 5), Err(Error::Schedule(_))));
    }

    #[test]
    fn pair_validation_and_minimal_t0() {
        let pairs = [(3.0, 1.0)];
        let t_min = min_admissible_t0(&pairs, 30);
        // max over ν of 3^{ν / 1.5^ν} is attained at ν = 2, 3
        assert!((t_min - 3f64.powf(2.0 / 2.25)).abs() < 1e-6);
        let low = ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, C, 30).unwrap();
        let err = low.validate_pairs(&pairs).unwrap_err();
        assert!(err.to_string().contains("c = 3"));
        let high = ConstantsSchedule::new(t_min * 1.01, 1.0, 1.0, 0.0, C, 30).unwrap();
        assert!(high.validate_pairs(&pairs).is_ok());
    }

    #[test]
    fn admissibility_is_strict() {
        let s = ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, C, 5).unwrap();
        assert!(admissibility_from_norms(0.0, 0.0, &s).admissible);
        assert!(!admissibility_from_norms(0.5, 0.0, &s).admissible);
        assert!(admissibility_from_norms(0.4999, 1.0, &s).admissible);
    }
}
