//! Property suites over random corpora: each returns a table of measured
//! ratios and a pass/fail verdict with the tolerance it was judged against.

use crate::calculus::{flow, flow_action_residual, infinite_compose, iterated_flow_convergence, FlowParams, FnField, NearIdentityMap};
use crate::dolbeault::{cauchy_tame_fit, homotopy_residual, random_polynomial_form, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::exact::Q;
use crate::grid::{ck_norm, interpolation_check, Box, GridSection, GridSpec};
use crate::liealg::{ce_differential, gl_action, jacobiator, random_gl, Bracket, CECochain, FloatBracket, LieInstance};
use crate::nashmoser::{quadratic_check, ConstantsSchedule, InstanceConstants};
use crate::numerics::fit::{fit_constant, loglog_slope, slope};
use crate::smoothing::{smoothing_inequality_check, Mollifier};
use crate::symplectic::{
    canonical_omega, deformation_differential, poisson_bracket, DarbouxInstance, DeformCochain, PolyIntegrableSystem, Polynomial,
};
use crate::williamson::{hessian_lie_algebra, normal_model, random_symplectic, williamson_type, WilliamsonType};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

/// Suites runnable by name.
pub const SUITES: [&str; 9] =
    ["symbolic", "williamson", "smoothing", "interpolation", "dolbeault", "lemmaA", "flows", "composition", "schedule"];

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub passed: bool,
    pub summary: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CheckReport {
    fn new(suite: &str, headers: &[&str]) -> Self {
        Self { suite: suite.into(), passed: true, summary: String::new(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: String) {
        if !self.summary.is_empty() {
            self.summary.push_str("; ");
        }
        self.summary.push_str(&what);
        if !ok {
            self.summary.push_str(" [FAIL]");
        }
        self.passed &= ok;
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Settings shared by the suites; `corpus` is the number of random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub corpus: usize,
    /// Smoothing scales.
    pub t: Vec<f64>,
    /// Polydisk dimension for the Dolbeault suite (1, 2 or 0 for both).
    pub n: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { seed: 1, corpus: 100, t: vec![2.0, 4.0, 8.0, 16.0], n: 0 }
    }
}

pub fn run_suite(name: &str, cfg: &CheckConfig) -> Result<CheckReport> {
    match name {
        "symbolic" => symbolic(cfg),
        "williamson" => williamson(cfg),
        "smoothing" => smoothing(cfg),
        "interpolation" => interpolation(cfg),
        "dolbeault" => dolbeault(cfg),
        "lemmaA" => lemma_a(cfg),
        "flows" => flows(cfg),
        "composition" => composition(cfg),
        "schedule" => schedule(),
        other => Err(Error::Parse(format!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")))),
    }
}

fn need_corpus(cfg: &CheckConfig, min: usize) -> Result<()> {
    if cfg.corpus < min {
        return Err(Error::Domain(format!("corpus of {} samples, need at least {min}", cfg.corpus)));
    }
    Ok(())
}

/// Random `Σ a_j cos(ω_j x + φ_j)` with `ω_j ≤ 4`, sampled on `spec`.
pub fn band_limited_corpus(spec: &GridSpec, size: usize, seed: u64) -> Vec<GridSection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let terms: Vec<(f64, Vec<f64>, f64)> = (0..rng.random_range(1..=4))
                .map(|_| {
                    let w = (0..spec.dim()).map(|_| rng.random_range(-4.0..4.0)).collect();
                    (rng.random_range(-1.0..1.0), w, rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            GridSection::from_scalar_fn(spec.clone(), move |x| {
                terms.iter().map(|(a, w, p)| a * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + p).cos()).sum()
            })
        })
        .collect()
}

fn line(n: usize) -> Result<GridSpec> {
    GridSpec::uniform(Box::cube(1, 2.0), n)
}

fn symbolic(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("symbolic", &["check", "cases", "nonzero"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w = canonical_omega(2);
    let mut bad = 0;
    for _ in 0..50 {
        let [f, g, h] = [0, 1, 2].map(|_| Polynomial::random(4, 3, 3, &mut rng));
        let pb = |a: &Polynomial, b: &Polynomial| poisson_bracket(a, b, &w);
        let jac = &(&pb(&pb(&f, &g)?, &h)? + &pb(&pb(&g, &h)?, &f)?) + &pb(&pb(&h, &f)?, &g)?;
        bad += usize::from(!jac.is_zero());
    }
    rep.rows.push(vec![0.0, 50.0, bad as f64]);
    rep.require(bad == 0, format!("Jacobi identity of the Poisson bracket: {bad}/50 nonzero"));

    let models: Vec<PolyIntegrableSystem> =
        (1..=2).flat_map(|n| WilliamsonType::all(n).into_iter().map(move |t| normal_model(t, n))).collect::<Result<_>>()?;
    let (mut bad, mut cases) = (0, 0);
    for sys in &models {
        for degree in 0..sys.dim() - 1 {
            for _ in 0..3 {
                let c = DeformCochain::random(sys.dim(), sys.n(), degree, 2, &mut rng);
                let dd = deformation_differential(&deformation_differential(&c, sys)?, sys)?;
                bad += usize::from(!dd.is_zero());
                cases += 1;
            }
        }
    }
    rep.rows.push(vec![1.0, cases as f64, bad as f64]);
    rep.require(bad == 0, format!("d² = 0 on the deformation complex: {bad}/{cases} nonzero"));

    let bases = [Bracket::su2(), Bracket::sl2(), Bracket::heisenberg(), Bracket::diagonal_solvable(&[Q::from_integer(1.into()), Q::from_integer(2.into())])];
    let (mut bad, mut cases) = (0, 0);
    for i in 0..50 {
        let base = &bases[i % bases.len()];
        let mu = gl_action(base, &random_gl(base.dim(), &mut rng))?;
        if !jacobiator(&mu).is_zero() {
            bad += 1;
            continue;
        }
        let c = CECochain::random(mu.dim(), 1, &mut rng);
        bad += usize::from(!ce_differential(&mu, &ce_differential(&mu, &c)?)?.is_zero());
        cases += 1;
    }
    rep.rows.push(vec![2.0, cases as f64, bad as f64]);
    rep.require(bad == 0, format!("δ² = 0 on Jacobi brackets: {bad}/{cases} nonzero"));

    let (mut bad, mut cases) = (0, 0);
    for n in 1..=3 {
        for t in WilliamsonType::all(n) {
            let sys = normal_model(t, n)?;
            for i in 0..sys.mu.len() {
                for j in i + 1..sys.mu.len() {
                    bad += usize::from(!sys.bracket(&sys.mu[i], &sys.mu[j]).is_zero());
                    cases += 1;
                }
            }
        }
    }
    rep.rows.push(vec![3.0, cases as f64, bad as f64]);
    rep.require(bad == 0, format!("normal models in involution: {bad}/{cases} nonzero brackets"));
    Ok(rep)
}

fn williamson(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("williamson", &["n", "e", "h", "f", "conjugations_agreeing"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for n in 1..=3 {
        let w = canonical_omega(n);
        let zero = vec![Q::from_integer(0.into()); 2 * n];
        for t in WilliamsonType::all(n) {
            let a = hessian_lie_algebra(&normal_model(t, n)?, &zero)?;
            let direct = williamson_type(&a, &w)?;
            let mut agree = 0;
            for _ in 0..10 {
                let s = random_symplectic(n, &mut rng);
                let si = s.inverse()?;
                let conj: Vec<_> = a.iter().map(|m| &(&si * m) * &s).collect();
                agree += usize::from(williamson_type(&conj, &w)? == t);
            }
            rep.rows.push(vec![n as f64, t.e as f64, t.h as f64, t.f as f64, agree as f64]);
            rep.require(direct == t && agree == 10, format!("{t}: round trip {}, {agree}/10 conjugates", direct == t));
        }
    }
    Ok(rep)
}

fn smoothing(cfg: &CheckConfig) -> Result<CheckReport> {
    need_corpus(cfg, 2)?;
    if cfg.t.is_empty() || cfg.t.iter().any(|t| *t <= 1.0) {
        return Err(Error::Domain("smoothing scales must be > 1".into()));
    }
    let mut rep = CheckReport::new("smoothing", &["sample", "t", "k", "l", "growth", "decay"]);
    let t_max = cfg.t.iter().cloned().fold(0.0, f64::max);
    // h ≤ 1/(4t) on [−2, 2]
    let nodes = ((16.0 * t_max).ceil() as usize + 1).max(257);
    let corpus = band_limited_corpus(&line(nodes)?, cfg.corpus, cfg.seed);
    let kernel = Mollifier::default();
    let half = cfg.corpus / 2;
    for k in 0..=4 {
        let (mut growth, mut decay) = ([Vec::new(), Vec::new()], [Vec::new(), Vec::new()]);
        for (i, e) in corpus.iter().enumerate() {
            let part = usize::from(i >= half);
            for l in 0..=k {
                for &t in &cfg.t {
                    let r = smoothing_inequality_check(e, t, k, l, &kernel)?;
                    growth[part].push(r.growth);
                    decay[part].push(r.decay);
                    rep.rows.push(vec![i as f64, t, k as f64, l as f64, r.growth, r.decay]);
                }
            }
        }
        let g = fit_constant(&growth[0], &growth[1], 2.0);
        let d = fit_constant(&decay[0], &decay[1], 2.0);
        rep.require(
            g.stable && d.stable,
            format!("k={k}: growth c={:.3} (new max {:.3}), decay c={:.3} (new max {:.3})", g.fitted, g.max_validation, d.fitted, d.max_validation),
        );
    }
    Ok(rep)
}

fn interpolation(cfg: &CheckConfig) -> Result<CheckReport> {
    need_corpus(cfg, 1)?;
    let mut rep = CheckReport::new("interpolation", &["i", "j", "k", "max_ratio_coarse", "max_ratio_fine", "relative_change"]);
    let coarse = band_limited_corpus(&line(257)?, cfg.corpus, cfg.seed);
    let fine = band_limited_corpus(&line(513)?, cfg.corpus, cfg.seed);
    let dom = Box::cube(1, 2.0);
    for (i, j, k) in [(0, 1, 2), (0, 2, 4), (1, 2, 3)] {
        let worst = |set: &[GridSection]| -> Result<f64> {
            set.iter().map(|e| Ok(interpolation_check(e, i, j, k, &dom)?.ratio)).try_fold(0.0, |a: f64, r: Result<f64>| Ok(a.max(r?)))
        };
        let (a, b) = (worst(&coarse)?, worst(&fine)?);
        let change = (b - a).abs() / a;
        rep.rows.push(vec![i as f64, j as f64, k as f64, a, b, change]);
        rep.require(a.is_finite() && change < 0.2, format!("({i},{j},{k}): max {a:.4} → {b:.4}, change {:.2}%", 100.0 * change));
    }
    Ok(rep)
}

fn dolbeault(cfg: &CheckConfig) -> Result<CheckReport> {
    let samples = cfg.corpus.min(10);
    need_corpus(cfg, 1)?;
    let mut rep = CheckReport::new("dolbeault", &["n", "sample", "grid", "absolute", "relative", "k", "slope"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (s, r, eps) = (1.0, 0.5, 0.3);
    for (n, grid, tol) in [(1, 256, 1e-3), (2, 64, 1e-2)] {
        if cfg.n != 0 && cfg.n != n {
            continue;
        }
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let beta = random_polynomial_form(n, 3, 4, s, grid, &mut rng)?;
            let res = homotopy_residual(&beta, s, r, eps)?;
            worst = worst.max(res.relative);
            rep.rows.push(vec![n as f64, i as f64, grid as f64, res.absolute, res.relative, f64::NAN, f64::NAN]);
        }
        rep.require(worst <= tol, format!("n={n} at {grid}: max relative residual {worst:.2e} (≤ {tol:.0e})"));
    }
    if cfg.n <= 1 {
        let gaps = [0.1, 0.2, 0.3, 0.4, 0.5];
        let mut min_slope = [f64::INFINITY; 3];
        for i in 0..samples {
            let beta = random_polynomial_form(1, 3, 4, s, 256, &mut rng)?;
            let f = &beta.comps[0].terms;
            let mut g = f[0].factors[0].scale(f[0].coef);
            for t in &f[1..] {
                g = g.add(&t.factors[0].scale(t.coef))?;
            }
            for fit in cauchy_tame_fit(&g, s, &gaps, 2, DEFAULT_EPS)? {
                min_slope[fit.k] = min_slope[fit.k].min(fit.slope);
                rep.rows.push(vec![1.0, i as f64, 256.0, f64::NAN, f64::NAN, fit.k as f64, fit.slope]);
            }
        }
        for (k, m) in min_slope.iter().enumerate() {
            let bound = -(k as f64 + 2.0) - 0.5;
            rep.require(*m >= bound, format!("tame slope k={k}: worst {m:.3} (≥ {bound})"));
        }
    }
    Ok(rep)
}

/// Lie: `‖Q(εe) − δ_0(εe)‖/ε²` across ε; Darboux: the same numerator, which vanishes since `Q` is linear.
fn lemma_a(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut rep = CheckReport::new("lemmaA", &["instance", "sample", "eps", "numerator", "numerator_over_eps2"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lie = LieInstance::new(&Bracket::su2())?;
    let mut spread: f64 = 0.0;
    for i in 0..cfg.corpus.clamp(1, 10) {
        let c: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let e = FloatBracket::from_coords(3, &c);
        let e = e.scale(1.0 / e.norm());
        let vals = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|eps| {
                let q = quadratic_check(&lie, &e.scale(*eps), 0, 0.0)?;
                rep.rows.push(vec![0.0, i as f64, *eps, q.numerator, q.numerator / eps / eps]);
                Ok(q.numerator / eps / eps)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        spread = spread.max(hi / lo - 1.0);
    }
    rep.require(spread <= 0.1, format!("Lie: numerator/ε² spread {:.2e} (≤ 10%)", spread));

    let inst = DarbouxInstance::new(GridSpec::uniform(Box::cube(2, 2.0), 65)?)?;
    let e = inst.section(|x| 0.05 * x[0].sin() * x[1].sin());
    let mut worst: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3] {
        let q = quadratic_check(&inst, &e.scaled(eps), 0, 0.5)?;
        worst = worst.max(q.numerator);
        rep.rows.push(vec![1.0, 0.0, eps, q.numerator, q.numerator / eps / eps]);
    }
    rep.require(worst <= 1e-8, format!("Darboux: numerator {worst:.1e} (≤ 1e-8)"));
    Ok(rep)
}

type Trig = Vec<(f64, [f64; 2], f64)>;

fn random_trig(rng: &mut ChaCha8Rng, comps: usize) -> Vec<Trig> {
    (0..comps)
        .map(|_| {
            (0..3)
                .map(|_| (rng.random_range(-1.0..1.0), [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)], rng.random_range(0.0..6.3)))
                .collect()
        })
        .collect()
}

fn eval_trig(f: &[Trig], scale: f64, x: &[f64], out: &mut [f64]) {
    for (o, terms) in out.iter_mut().zip(f) {
        *o = scale * terms.iter().map(|(a, w, p)| a * (w[0] * x[0] + w[1] * x[1] + p).cos()).sum::<f64>();
    }
}

/// Flow bounds, first-order action expansion and iterated flows.
fn flows(cfg: &CheckConfig) -> Result<CheckReport> {
    need_corpus(cfg, 2)?;
    let mut rep = CheckReport::new("flows", &["part", "sample", "param", "k", "value"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params = FlowParams::default();
    let b = GridSpec::uniform(Box::cube(2, 1.0), 33)?;
    let inside = Box::cube(2, 2.0);

    let samples = cfg.corpus.min(20);
    let mut ratios = vec![[Vec::new(), Vec::new()]; 3];
    for i in 0..samples {
        let f = random_trig(&mut rng, 2);
        let amp = rng.random_range(0.01..0.1);
        let field = FnField { dim: 2, f: |_t: f64, x: &[f64], o: &mut [f64]| eval_trig(&f, amp, x, o) };
        let phi = flow(&field, 1.0, &b, &inside, &params)?;
        let v = GridSection::from_fn(b.clone(), 2, |x, o| eval_trig(&f, amp, x, o));
        for (k, r) in ratios.iter_mut().enumerate() {
            let q = phi.norm(k)? / ck_norm(&v, k, &b.domain)?.value;
            r[usize::from(i >= samples / 2)].push(q);
            rep.rows.push(vec![0.0, i as f64, amp, k as f64, q]);
        }
    }
    for (k, r) in ratios.iter().enumerate() {
        let fit = fit_constant(&r[0], &r[1], 2.0);
        rep.require(fit.stable, format!("‖φ_v‖_{k} ≤ c‖v‖_{k}: c={:.3}, new max {:.3}", fit.fitted, fit.max_validation));
    }

    let base = GridSpec::uniform(Box::cube(1, 1.5), 121)?;
    let w = base.sub_lattice(&Box::cube(1, 0.75))?.0;
    let eps_list = [0.1, 0.05, 0.025, 0.0125];
    let mut worst_dev: f64 = 0.0;
    for i in 0..3 {
        let f = random_trig(&mut rng, 2);
        let g = random_trig(&mut rng, 1);
        let mut norms = vec![Vec::new(); 2];
        for &eps in &eps_list {
            let e = GridSection::from_scalar_fn(base.clone(), |x| {
                let mut o = [0.0];
                eval_trig(&g, eps, &[x[0], 0.0], &mut o);
                o[0]
            });
            let field = FnField { dim: 2, f: |_t: f64, x: &[f64], o: &mut [f64]| eval_trig(&f, eps, x, o) };
            let res = flow_action_residual(&e, &field, &w, &Box::cube(2, 3.0), 1, &params)?;
            for (k, n) in res.norms {
                norms[k].push(n);
                rep.rows.push(vec![1.0, i as f64, eps, k as f64, n]);
            }
        }
        for n in &norms {
            worst_dev = worst_dev.max((loglog_slope(&eps_list, n) - 2.0).abs());
        }
    }
    rep.require(worst_dev <= 0.2, format!("action remainder exponent within 2 ± {worst_dev:.3} (≤ 0.2)"));

    let f = random_trig(&mut rng, 2);
    let field = FnField { dim: 2, f: |t: f64, x: &[f64], o: &mut [f64]| {
        eval_trig(&f, 0.2, x, o);
        o[0] += 0.2 * t * x[1];
        o[1] -= 0.1 * t * t;
    } };
    let splits = [2, 4, 8, 16, 32];
    let errs = iterated_flow_convergence(&field, 1.0, &splits, &GridSpec::uniform(Box::cube(2, 0.5), 9)?, &inside, 0, &params)?;
    let (ns, es): (Vec<f64>, Vec<f64>) = errs.iter().map(|(n, e)| (*n as f64, *e)).unzip();
    for (n, e) in &errs {
        rep.rows.push(vec![2.0, 0.0, *n as f64, 0.0, *e]);
    }
    let sl = loglog_slope(&ns, &es);
    rep.require((sl + 1.0).abs() <= 0.2, format!("iterated flows: slope {sl:.3} (−1 ± 0.2)"));
    Ok(rep)
}

/// Geometric sequences of near-identity maps on shrinking boxes.
fn composition(cfg: &CheckConfig) -> Result<CheckReport> {
    need_corpus(cfg, 2)?;
    let mut rep = CheckReport::new("composition", &["sample", "rate", "tail_rate", "k", "norm_over_sum"]);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = cfg.corpus.min(10);
    let target = GridSpec::uniform(Box::cube(2, 0.5), 17)?;
    let mut ratios = vec![[Vec::new(), Vec::new()]; 2];
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let rate: f64 = rng.random_range(0.2..0.6);
        let amp = rng.random_range(0.01..0.05);
        let f = random_trig(&mut rng, 2);
        let maps: Vec<NearIdentityMap> = (0..12)
            .map(|nu| {
                let f = f.clone();
                let half = 0.5 + 0.5 * 0.5f64.powi(nu);
                let spec = GridSpec::uniform(Box::cube(2, half), 33)?;
                let scale = amp * rate.powi(nu);
                Ok(NearIdentityMap::from_displacement(spec, move |x, o| eval_trig(&f, scale, x, o)))
            })
            .collect::<Result<_>>()?;
        let res = infinite_compose(&maps, &target)?;
        let idx: Vec<f64> = (0..res.increments.len()).map(|j| j as f64).collect();
        let logs: Vec<f64> = res.increments.iter().map(|x| x.ln()).collect();
        let tail = slope(&idx, &logs).exp();
        let dev = (tail.ln() / rate.ln() - 1.0).abs();
        worst = worst.max(dev);
        for (k, r) in ratios.iter_mut().enumerate() {
            let sum: f64 = maps.iter().map(|m| m.norm(k)).sum::<Result<f64>>()?;
            let q = res.map.norm(k)? / sum;
            r[usize::from(i >= samples / 2)].push(q);
            rep.rows.push(vec![i as f64, rate, tail, k as f64, q]);
        }
    }
    rep.require(worst <= 0.1, format!("Cauchy tails: rate exponent off by {:.1}% (≤ 10%)", 100.0 * worst));
    for (k, r) in ratios.iter().enumerate() {
        let fit = fit_constant(&r[0], &r[1], 2.0);
        rep.require(fit.stable, format!("‖ψ‖_{k} ≤ cΣ‖φ_ν‖_{k}: c={:.3}, new max {:.3}", fit.fitted, fit.max_validation));
    }
    Ok(rep)
}

fn schedule() -> Result<CheckReport> {
    let mut rep = CheckReport::new("schedule", &["nu", "s_nu", "r_nu", "log_prod", "log_bound"]);
    let sched = ConstantsSchedule::new(2.0, 1.0, 1.0, 0.0, InstanceConstants { d: 1, l1: 0, l2: 0 }, 40)?;
    for nu in 0..=40 {
        let (a, b) = if nu <= 20 { sched.telescoping_logs(nu) } else { (f64::NAN, f64::NAN) };
        rep.rows.push(vec![nu as f64, sched.s_seq[nu], sched.r_seq[nu], a, b]);
    }
    rep.require(sched.radii_nested(25), "s_(ν+1) < r_ν < s_ν for ν ≤ 25".into());
    let gap = (sched.r_seq[40] - 0.5 * (sched.s + sched.r)).abs();
    rep.require(gap <= 1e-12, format!("|r_40 − (s+r)/2| = {gap:.1e} (≤ 1e-12)"));
    let tele = (0..=20).all(|nu| sched.telescoping_holds(nu));
    rep.require(tele, "telescoping product bound for ν ≤ 20".into());
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_and_unknown_suite() {
        let cfg = CheckConfig { corpus: 0, ..CheckConfig::default() };
        assert!(matches!(run_suite("smoothing", &cfg), Err(Error::Domain(_))));
        assert!(matches!(run_suite("nope", &cfg), Err(Error::Parse(_))));
    }

    #[test]
    fn schedule_suite_passes() {
        let rep = run_suite("schedule", &CheckConfig::default()).unwrap();
        assert!(rep.passed, "{}", rep.summary);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("nu,s_nu,r_nu"));
    }
}
