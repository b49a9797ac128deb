//! The fast-convergence iteration `e_{ν+1} = e_ν · φ_{v_ν}`,
//! `v_ν = −h(S_{t_ν} e_ν)`, generic over instances, with its constants
//! schedule, induction-hypothesis monitor and norm ledger.

mod config;
mod schedule;

pub use config::RunConfig;
pub use schedule::{admissibility_from_norms, min_admissible_t0, search_schedule, Admissibility, ConstantsSchedule, InstanceConstants};

use crate::error::{Error, Result};
use serde::Serialize;
use std::io::Write;

/// A PDE with symmetry, normalized so that the base solution is the zero
/// section. Radii are nested-domain parameters; finite-dimensional instances
/// ignore them.
pub trait PdeInstance {
    type Section: Clone;
    type Generator;
    type Symmetry: Clone;

    fn name(&self) -> String;

    fn constants(&self) -> InstanceConstants;

    /// θ of the flow/action thresholds `‖v‖_{1,r_ν} ≤ (r_ν − s_{ν+1}) θ`.
    fn theta(&self) -> f64;

    /// Allowed `‖Q(e_ν)‖` after each step.
    fn equation_tolerance(&self) -> f64;

    /// `‖e‖_{k,r}`.
    fn norm(&self, e: &Self::Section, k: usize, r: f64) -> Result<f64>;

    fn scale(&self, e: &Self::Section, c: f64) -> Self::Section;

    /// `S_t e` on `M_s`.
    fn smooth(&self, e: &Self::Section, t: f64, s: f64) -> Result<Self::Section>;

    /// `h^{s,r}(e)`, a generator on `M_r`.
    fn homotopy(&self, e: &Self::Section, s: f64, r: f64) -> Result<Self::Generator>;

    fn negate(&self, v: Self::Generator) -> Self::Generator;

    fn generator_norm(&self, v: &Self::Generator, k: usize, r: f64) -> Result<f64>;

    /// Time-one flow of `v` (given on `M_r`) on `M_{s_next}`.
    fn flow(&self, v: &Self::Generator, r: f64, s_next: f64) -> Result<Self::Symmetry>;

    /// `(e · φ)|_{M_{s_next}}`.
    fn act(&self, e: &Self::Section, phi: &Self::Symmetry, s_next: f64) -> Result<Self::Section>;

    /// `φ_0 ∘ φ_1 ∘ …` on `M_r`; the identity for an empty list.
    fn compose_all(&self, maps: &[Self::Symmetry], r: f64) -> Result<Self::Symmetry>;

    /// `‖ψ − id‖_k`.
    fn symmetry_norm(&self, psi: &Self::Symmetry, k: usize) -> Result<f64>;

    /// `‖(e · ψ)|_{M_r}‖_0` recomputed from the input section.
    fn pullback_residual(&self, e: &Self::Section, psi: &Self::Symmetry, r: f64) -> Result<f64>;

    /// `‖Q(e)‖_{0,r}`.
    fn equation_residual(&self, e: &Self::Section, r: f64) -> Result<f64>;

    /// `‖Q(e) − δ_0 e‖_{k,r}`.
    fn quadratic_remainder(&self, e: &Self::Section, k: usize, r: f64) -> Result<f64>;

    /// `‖(δ h_1^{s,r} + h_2^{s,r} δ)(w) − w|_{M_r}‖` on a deformation `w`.
    fn homotopy_residual(&self, w: &Self::Section, s: f64, r: f64) -> Result<f64>;

    fn symmetry_json(&self, psi: &Self::Symmetry) -> serde_json::Value;
}

/// One row of the norm ledger. `v_norm_*` are empty on the final row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub nu: usize,
    pub s_nu: f64,
    pub r_nu: f64,
    pub t_nu: f64,
    pub eps_nu: f64,
    pub norm_p: f64,
    pub norm_pq: f64,
    pub v_norm_0: Option<f64>,
    pub v_norm_1: Option<f64>,
    pub hypothesis_a: bool,
    pub hypothesis_b: bool,
    pub residual: f64,
    pub equation_residual: f64,
}

pub fn write_ledger<W: Write>(rows: &[LedgerRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn ledger_csv(rows: &[LedgerRow]) -> String {
    let mut buf = Vec::new();
    write_ledger(rows, &mut buf).expect("in-memory CSV");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

/// Hypotheses (a)_ν and (b)_ν with margins `bound − norm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub a: bool,
    pub b: bool,
    pub margin_a: f64,
    pub margin_b: f64,
}

/// (a)_ν: `‖e_ν‖_{p+q,s_ν} ≤ (ε_ν^{−1}t_ν)^{2l_1+1}`; (b)_ν: `‖e_ν‖_{p,s_ν} ≤ (ε_ν^{−1}t_ν)^{−(2l_1+1)}`.
pub fn monitor(row: &LedgerRow, schedule: &ConstantsSchedule) -> HypothesisReport {
    let scale = schedule.hypothesis_scale(row.nu);
    let (ba, bb) = (scale, 1.0 / scale);
    HypothesisReport { a: row.norm_pq <= ba, b: row.norm_p <= bb, margin_a: ba - row.norm_pq, margin_b: bb - row.norm_p }
}

/// State after ν steps.
pub struct IterationState<I: PdeInstance> {
    pub nu: usize,
    pub e: I::Section,
    pub maps: Vec<I::Symmetry>,
    pub ledger: Vec<LedgerRow>,
}

impl<I: PdeInstance> IterationState<I> {
    pub fn new(e: I::Section) -> Self {
        Self { nu: 0, e, maps: Vec::new(), ledger: Vec::new() }
    }
}

fn observe<I: PdeInstance>(state: &IterationState<I>, instance: &I, schedule: &ConstantsSchedule) -> Result<LedgerRow> {
    let nu = state.nu;
    let s_nu = schedule.s_seq[nu];
    let mut row = LedgerRow {
        nu,
        s_nu,
        r_nu: schedule.r_seq[nu],
        t_nu: schedule.t[nu],
        eps_nu: schedule.eps[nu],
        norm_p: instance.norm(&state.e, schedule.p, s_nu)?,
        norm_pq: instance.norm(&state.e, schedule.p + schedule.q, s_nu)?,
        v_norm_0: None,
        v_norm_1: None,
        hypothesis_a: false,
        hypothesis_b: false,
        residual: instance.norm(&state.e, 0, s_nu)?,
        equation_residual: instance.equation_residual(&state.e, s_nu)?,
    };
    let h = monitor(&row, schedule);
    row.hypothesis_a = h.a;
    row.hypothesis_b = h.b;
    Ok(row)
}

/// One iteration; the ledger row for `ν` is appended here.
pub fn step<I: PdeInstance>(state: IterationState<I>, instance: &I, schedule: &ConstantsSchedule, theta: f64) -> Result<IterationState<I>> {
    let row = observe(&state, instance, schedule)?;
    step_from(state, row, instance, schedule, theta)
}

fn step_from<I: PdeInstance>(
    state: IterationState<I>,
    mut row: LedgerRow,
    instance: &I,
    schedule: &ConstantsSchedule,
    theta: f64,
) -> Result<IterationState<I>> {
    let nu = state.nu;
    if nu >= schedule.nu_max {
        return Err(Error::Step(format!("ν = {nu} is past ν_max = {}", schedule.nu_max)));
    }
    let (s_nu, r_nu, s_next) = (schedule.s_seq[nu], schedule.r_seq[nu], schedule.s_seq[nu + 1]);
    let smoothed = instance.smooth(&state.e, schedule.smoothing_parameter(nu), s_nu)?;
    let v = instance.negate(instance.homotopy(&smoothed, s_nu, r_nu)?);
    let v0 = instance.generator_norm(&v, 0, r_nu)?;
    let v1 = instance.generator_norm(&v, 1, r_nu)?;
    let e1 = instance.norm(&state.e, 1, r_nu)?;
    let threshold = (r_nu - s_next) * theta;
    if v1 > threshold {
        return Err(Error::Step(format!("ν = {nu}: ‖v‖_1 = {v1:.3e} exceeds (r_ν − s_ν+1)θ = {threshold:.3e}")));
    }
    if e1 > threshold {
        return Err(Error::Step(format!("ν = {nu}: ‖e‖_1 = {e1:.3e} exceeds (r_ν − s_ν+1)θ = {threshold:.3e}")));
    }
    let phi = instance.flow(&v, r_nu, s_next)?;
    let e_next = instance.act(&state.e, &phi, s_next)?;
    let q = instance.equation_residual(&e_next, s_next)?;
    if q > instance.equation_tolerance() {
        return Err(Error::Step(format!("ν = {nu}: ‖Q(e_ν+1)‖ = {q:.3e} above tolerance {:.1e}", instance.equation_tolerance())));
    }
    row.v_norm_0 = Some(v0);
    row.v_norm_1 = Some(v1);
    let mut ledger = state.ledger;
    ledger.push(row);
    let mut maps = state.maps;
    maps.push(phi);
    Ok(IterationState { nu: nu + 1, e: e_next, maps, ledger })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MonitorFailure,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stopping {
    /// Residual tolerance on `‖e_ν‖_{0,s_ν}` and on the final pullback residual.
    pub tolerance: f64,
    /// Overrides the instance's θ.
    pub theta: Option<f64>,
    /// A residual above this multiple of the initial one is divergence.
    pub divergence_factor: f64,
}

impl Stopping {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, theta: None, divergence_factor: 1e3 }
    }
}

/// Outcome of a run. `tame_ratios[k] = ‖ψ − id‖_k / ‖e‖_{k+l,s}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub converged: bool,
    pub stop: StopReason,
    pub steps: usize,
    pub final_residual: f64,
    pub tolerance: f64,
    pub t0: f64,
    pub b: f64,
    pub p: usize,
    pub q: usize,
    pub theta: f64,
    pub admissibility: Admissibility,
    pub ledger: Vec<LedgerRow>,
    /// `r_{ν+1} / r_ν` and `r_{ν+1} / r_ν^{1.3}` on the residual column.
    pub step_ratios: Vec<f64>,
    pub superlinear_ratios: Vec<f64>,
    /// `Σ_ν ‖v_ν‖_{k,r_ν}` for `k = 0, 1`.
    pub v_sums: [f64; 2],
    pub psi_norms: [f64; 2],
    pub tame_ratios: [f64; 2],
    pub monitor_held: bool,
}

/// Checks admissibility of `e` for the schedule.
pub fn admissibility_check<I: PdeInstance>(instance: &I, e: &I::Section, schedule: &ConstantsSchedule) -> Result<Admissibility> {
    let np = instance.norm(e, schedule.p, schedule.s)?;
    let npq = instance.norm(e, schedule.p + schedule.q, schedule.s)?;
    Ok(admissibility_from_norms(np, npq, schedule))
}

fn diverged(message: String, ledger: &[LedgerRow]) -> Error {
    Error::Divergence { message, ledger: ledger_csv(ledger) }
}

/// Runs the iteration from `e` until the residual tolerance, a monitor
/// failure or `ν_max`, and composes the flows into `ψ` on `M_{r_∞}`.
pub fn run<I: PdeInstance>(instance: &I, e: I::Section, schedule: &ConstantsSchedule, stopping: &Stopping) -> Result<(I::Symmetry, RunReport)> {
    let adm = admissibility_check(instance, &e, schedule)?;
    if !adm.admissible {
        return Err(Error::Neighborhood(format!(
            "‖e‖_p = {:.3e} (bound {:.3e}), ‖e‖_(p+q) = {:.3e} (bound {:.3e})",
            adm.norm_p, adm.bound_p, adm.norm_pq, adm.bound_pq
        )));
    }
    let theta = stopping.theta.unwrap_or_else(|| instance.theta());
    let e0 = e.clone();
    let mut state = IterationState::<I>::new(e);
    let mut initial = None;
    let stop = loop {
        let row = observe(&state, instance, schedule)?;
        let r0 = *initial.get_or_insert(row.residual);
        if !row.residual.is_finite() || row.residual > stopping.divergence_factor * r0.max(stopping.tolerance) {
            let msg = format!("residual {:.3e} at ν = {} (initial {r0:.3e})", row.residual, row.nu);
            let mut ledger = state.ledger.clone();
            ledger.push(row);
            return Err(diverged(msg, &ledger));
        }
        let stop = if row.residual <= stopping.tolerance {
            Some(StopReason::Converged)
        } else if !(row.hypothesis_a && row.hypothesis_b) {
            Some(StopReason::MonitorFailure)
        } else if state.nu >= schedule.nu_max {
            Some(StopReason::MaxIterations)
        } else {
            None
        };
        if let Some(s) = stop {
            state.ledger.push(row);
            break s;
        }
        let mut ledger = state.ledger.clone();
        ledger.push(row.clone());
        state = match step_from(state, row, instance, schedule, theta) {
            Ok(s) => s,
            Err(err) => return Err(diverged(err.to_string(), &ledger)),
        };
    };
    let r_inf = schedule.r_inf();
    let psi = instance.compose_all(&state.maps, r_inf).map_err(|err| diverged(err.to_string(), &state.ledger))?;
    let final_residual = instance.pullback_residual(&e0, &psi, r_inf)?;
    let ledger = state.ledger;
    let res: Vec<f64> = ledger.iter().map(|r| r.residual).collect();
    let step_ratios = res.windows(2).map(|w| w[1] / w[0]).collect();
    let superlinear_ratios = res.windows(2).map(|w| w[1] / w[0].powf(1.3)).collect();
    let v_sums = [
        ledger.iter().filter_map(|r| r.v_norm_0).sum(),
        ledger.iter().filter_map(|r| r.v_norm_1).sum(),
    ];
    let psi_norms = [instance.symmetry_norm(&psi, 0)?, instance.symmetry_norm(&psi, 1)?];
    let mut tame_ratios = [0.0; 2];
    for (k, t) in tame_ratios.iter_mut().enumerate() {
        let en = instance.norm(&e0, k + schedule.l, schedule.s)?;
        *t = if en > 0.0 { psi_norms[k] / en } else { 0.0 };
    }
    let monitor_held = ledger.iter().all(|r| r.hypothesis_a && r.hypothesis_b);
    let report = RunReport {
        instance: instance.name(),
        converged: final_residual <= stopping.tolerance && monitor_held,
        stop,
        steps: state.maps.len(),
        final_residual,
        tolerance: stopping.tolerance,
        t0: schedule.t0,
        b: schedule.b,
        p: schedule.p,
        q: schedule.q,
        theta,
        admissibility: adm,
        ledger,
        step_ratios,
        superlinear_ratios,
        v_sums,
        psi_norms,
        tame_ratios,
        monitor_held,
    };
    Ok((psi, report))
}

/// `‖Q(e) − δ_0 e‖_{k,r}` and its ratio to `‖e‖_{d,r} ‖e‖_{k+d,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticRatio {
    pub numerator: f64,
    pub ratio: f64,
}

pub fn quadratic_check<I: PdeInstance>(instance: &I, e: &I::Section, k: usize, r: f64) -> Result<QuadraticRatio> {
    let d = instance.constants().d;
    let low = instance.norm(e, d, r)?;
    let theta = instance.theta();
    if low >= theta {
        return Err(Error::Threshold(format!("‖e‖_(d,r) = {low:.3e} is not below θ = {theta}")));
    }
    let numerator = instance.quadratic_remainder(e, k, r)?;
    let denom = low * instance.norm(e, k + d, r)?;
    Ok(QuadraticRatio { numerator, ratio: if denom > 0.0 { numerator / denom } else { 0.0 } })
}

/// Homotopy identity residual on `w`.
pub fn homotopy_contract_check<I: PdeInstance>(instance: &I, w: &I::Section, s: f64, r: f64) -> Result<f64> {
    instance.homotopy_residual(w, s, r)
}
