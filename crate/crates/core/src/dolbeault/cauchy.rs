use super::function::ComplexGridFunction;
use crate::error::{Error, Result};
use crate::numerics::bump::smooth_step_down;
use crate::numerics::quad::{gauss_legendre, gauss_legendre_on};
use crate::par;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Width parameter ε ∈ (0, ½) of the bump split.
pub const DEFAULT_EPS: f64 = 0.3;

/// Radial bump of the split: 1 on `D_{r+ε(s−r)}`, 0 outside `D_{s−ε(s−r)}`.
pub fn chi(s: f64, r: f64, eps: f64, abs_z: f64) -> f64 {
    smooth_step_down((abs_z - (r + eps * (s - r))) / ((1.0 - 2.0 * eps) * (s - r)))
}

fn check_radii(s: f64, r: f64, eps: f64) -> Result<()> {
    if !(0.0 < r && r < s && s <= 1.0) {
        return Err(Error::Domain(format!("need 0 < r < s ≤ 1, got r={r}, s={s}")));
    }
    if !(0.0 < eps && eps < 0.5) {
        return Err(Error::Domain(format!("split width ε must lie in (0, 1/2), got {eps}")));
    }
    Ok(())
}

/// `f = f_1 + f_2` with `f_1 = χ f` supported inside `D_s` and `f_2 = (1 − χ) f`
/// vanishing on `D_{r+ε(s−r)}`.
pub fn bump_split(f: &ComplexGridFunction, s: f64, r: f64, eps: f64) -> Result<(ComplexGridFunction, ComplexGridFunction)> {
    check_radii(s, r, eps)?;
    let g = f.grid;
    let c: Vec<f64> = (0..g.len()).map(|i| chi(s, r, eps, g.node(i).norm())).collect();
    let f1 = f.values.iter().zip(&c).map(|(v, c)| v * c).collect();
    let f2 = f.values.iter().zip(&c).map(|(v, c)| v * (1.0 - c)).collect();
    Ok((ComplexGridFunction::new(g, f.radius, f1)?, ComplexGridFunction::new(g, f.radius, f2)?))
}

/// `T^{s,r} f(z) = (1/π) ∬_{D_s} f(ζ) / (z − ζ) dA(ζ)`, the right inverse of
/// `∂̄` on `D_r`, with the default split width.
pub fn cauchy_riemann(f: &ComplexGridFunction, s: f64, r: f64) -> Result<ComplexGridFunction> {
    cauchy_riemann_with(f, s, r, DEFAULT_EPS)
}

/// Output lives on the input sublattice with `|x|, |y| ≤ r + 2h` and is
/// meaningful on `D_r` (plus two nodes of padding for differences); nodes
/// farther out are set to zero.
pub fn cauchy_riemann_with(f: &ComplexGridFunction, s: f64, r: f64, eps: f64) -> Result<ComplexGridFunction> {
    check_radii(s, r, eps)?;
    let g = f.grid;
    let h = g.spacing();
    if f.radius < s * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("input known on D_{} only, T^{{s,r}} needs D_{s}", f.radius)));
    }
    let r_in = r + eps * (s - r);
    let need = r + 2.0 * h;
    if need + h > r_in {
        return Err(Error::Resolution(format!(
            "spacing {h:.3e} too coarse for the split gap ε(s−r) = {:.3e} (need 3h below it)",
            eps * (s - r)
        )));
    }
    let (out_grid, off) = g.sub_lattice(need)?;
    let (f1, _) = bump_split(f, s, r, eps)?;
    let inner = lattice_transform(&f1.values, g.n, h)?;
    let outer = AnnulusPart::new(f, s, r, eps, need)?;
    let tol = 1e-9 * h;
    let values = par::map_range(out_grid.len(), |i| {
        let z = out_grid.node(i);
        if z.norm() > need + tol {
            return C64::new(0.0, 0.0);
        }
        let src = (i / out_grid.n + off) * g.n + i % out_grid.n + off;
        inner[src] + outer.eval(z)
    });
    ComplexGridFunction::new(out_grid, r, values)
}

/// Piecewise-bicubic cardinal function of the 4-point Lagrange interpolant.
fn cardinal(t: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 {
        (1.0 - a * a) * (2.0 - a) / 2.0
    } else if a < 2.0 {
        -(a - 1.0) * (2.0 - a) * (3.0 - a) / 6.0
    } else {
        0.0
    }
}

const FAR: i64 = 6;
const MULTIPOLE_TERMS: usize = 44;

/// `∬ L(ξ) ξ^k dA` for the tensor cardinal `L`; only `k ≡ 0 mod 4` survive.
fn cardinal_moments() -> Vec<C64> {
    let (x, w) = gauss_legendre(24);
    let mut m = vec![C64::new(0.0, 0.0); MULTIPOLE_TERMS];
    for cx in -2..2 {
        for cy in -2..2 {
            for (xi, wi) in x.iter().zip(&w) {
                for (yj, wj) in x.iter().zip(&w) {
                    let px = cx as f64 + 0.5 * (xi + 1.0);
                    let py = cy as f64 + 0.5 * (yj + 1.0);
                    let lw = cardinal(px) * cardinal(py) * wi * wj * 0.25;
                    let z = C64::new(px, py);
                    let mut zk = C64::new(1.0, 0.0);
                    for mk in m.iter_mut() {
                        *mk += zk * lw;
                        zk *= z;
                    }
                }
            }
        }
    }
    m
}

/// `K(d) = (1/π) ∬ L(ξ) / (d − ξ) dA(ξ)` at the integer offset `d = a + i b`.
fn kernel_entry(a: i64, b: i64, moments: &[C64], g10: &(Vec<f64>, Vec<f64>), g12: &(Vec<f64>, Vec<f64>)) -> C64 {
    let d = C64::new(a as f64, b as f64);
    if a.abs().max(b.abs()) >= FAR {
        let inv = 1.0 / d;
        let mut p = inv;
        let mut acc = C64::new(0.0, 0.0);
        for mk in moments {
            acc += mk * p;
            p *= inv;
        }
        return acc / PI;
    }
    let l = |z: C64| cardinal(z.re) * cardinal(z.im);
    let mut acc = C64::new(0.0, 0.0);
    for cx in -2..2i64 {
        for cy in -2..2i64 {
            let corner = (a == cx || a == cx + 1) && (b == cy || b == cy + 1);
            if !corner {
                let (x, w) = g10;
                for (xi, wi) in x.iter().zip(w) {
                    for (yj, wj) in x.iter().zip(w) {
                        let z = C64::new(cx as f64 + 0.5 * (xi + 1.0), cy as f64 + 0.5 * (yj + 1.0));
                        acc += l(z) / (d - z) * (wi * wj * 0.25);
                    }
                }
                continue;
            }
            // Duffy: split the cell into two triangles with apex d.
            let cs = [
                C64::new(cx as f64, cy as f64),
                C64::new((cx + 1) as f64, cy as f64),
                C64::new((cx + 1) as f64, (cy + 1) as f64),
                C64::new(cx as f64, (cy + 1) as f64),
            ];
            let k = cs.iter().position(|c| *c == d).unwrap();
            let (p1, p2, p3) = (cs[(k + 1) % 4], cs[(k + 2) % 4], cs[(k + 3) % 4]);
            for (p, q) in [(p1, p2), (p2, p3)] {
                let e = p - d;
                let f = q - p;
                let jac = (e.re * f.im - e.im * f.re).abs();
                let (x, w) = g12;
                for (ti, wt) in x.iter().zip(w) {
                    let t = 0.5 * (ti + 1.0);
                    let dir = e + f * t;
                    for (si, ws) in x.iter().zip(w) {
                        let s = 0.5 * (si + 1.0);
                        acc -= l(d + dir * s) / dir * (jac * wt * ws * 0.25);
                    }
                }
            }
        }
    }
    acc / PI
}

struct KernelFft {
    p: usize,
    spectrum: Vec<C64>,
}

fn kernel_fft(n: usize) -> Arc<KernelFft> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<KernelFft>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(k) = cache.lock().unwrap().get(&n) {
        return k.clone();
    }
    let p = (2 * n).next_power_of_two();
    let moments = cardinal_moments();
    let g10 = gauss_legendre(10);
    let g12 = gauss_legendre(12);
    let m = n as i64 - 1;
    let side = (2 * m + 1) as usize;
    let entries = par::map_range(side * side, |i| {
        let a = (i / side) as i64 - m;
        let b = (i % side) as i64 - m;
        kernel_entry(a, b, &moments, &g10, &g12)
    });
    let mut spectrum = vec![C64::new(0.0, 0.0); p * p];
    for (i, v) in entries.into_iter().enumerate() {
        let a = (i / side) as i64 - m;
        let b = (i % side) as i64 - m;
        spectrum[(a.rem_euclid(p as i64) as usize) * p + b.rem_euclid(p as i64) as usize] = v;
    }
    fft2(&mut spectrum, p, false);
    let k = Arc::new(KernelFft { p, spectrum });
    cache.lock().unwrap().insert(n, k.clone());
    k
}

fn fft2(data: &mut [C64], p: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    fft.process(data);
    let mut col = vec![C64::new(0.0, 0.0); p];
    for j in 0..p {
        for i in 0..p {
            col[i] = data[i * p + j];
        }
        fft.process(&mut col);
        for i in 0..p {
            data[i * p + j] = col[i];
        }
    }
}

/// `T` of the bicubic interpolant of compactly supported lattice data, at the lattice nodes.
fn lattice_transform(values: &[C64], n: usize, h: f64) -> Result<Vec<C64>> {
    let k = kernel_fft(n);
    let p = k.p;
    let mut buf = vec![C64::new(0.0, 0.0); p * p];
    for ix in 0..n {
        buf[ix * p..ix * p + n].copy_from_slice(&values[ix * n..(ix + 1) * n]);
    }
    fft2(&mut buf, p, false);
    for (b, s) in buf.iter_mut().zip(&k.spectrum) {
        *b *= s;
    }
    fft2(&mut buf, p, true);
    let scale = h / (p * p) as f64;
    let mut out = Vec::with_capacity(n * n);
    for ix in 0..n {
        out.extend(buf[ix * p..ix * p + n].iter().map(|v| v * scale));
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("non-finite lattice convolution".into()));
    }
    Ok(out)
}

/// `T f_2` on `D_{r_in}` as a Taylor series in `z / r_in` whose coefficients
/// are annulus integrals (Gauss in the radius, trapezoid plus FFT in the angle).
struct AnnulusPart {
    r_in: f64,
    coeffs: Vec<C64>,
}

const MAX_TERMS: usize = 1 << 17;

impl AnnulusPart {
    fn new(f: &ComplexGridFunction, s: f64, r: f64, eps: f64, need: f64) -> Result<Self> {
        let r_in = r + eps * (s - r);
        let r_out = s - eps * (s - r);
        let q = need / r_in;
        let terms = (((1e-15f64).ln() + (1.0 - q).ln()) / q.ln()).ceil().max(8.0) as usize;
        if terms > MAX_TERMS {
            return Err(Error::Quadrature(format!("annulus series needs {terms} terms")));
        }
        let band = (PI * s / f.spacing()).ceil() as usize;
        let m = (terms + 2 * band + 16).next_power_of_two();
        let (mut rho, mut w) = gauss_legendre_on(24, r_in, r_out);
        let (rho2, w2) = gauss_legendre_on(16, r_out, s);
        rho.extend(rho2);
        w.extend(w2);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let rings: Vec<Vec<C64>> = par::map_range(rho.len(), |j| {
            let c = 1.0 - chi(s, r, eps, rho[j]);
            let mut ring: Vec<C64> =
                (0..m).map(|l| f.eval(C64::from_polar(rho[j], 2.0 * PI * l as f64 / m as f64)) * c).collect();
            fft.process(&mut ring);
            ring
        });
        let mut coeffs = vec![C64::new(0.0, 0.0); terms];
        for (j, ring) in rings.iter().enumerate() {
            let ratio = r_in / rho[j];
            let mut pw = w[j] * 2.0 * PI / m as f64;
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c += ring[(k + 1) % m] * pw;
                pw *= ratio;
            }
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Quadrature("non-finite annulus moments".into()));
        }
        Ok(Self { r_in, coeffs })
    }

    fn eval(&self, z: C64) -> C64 {
        let u = z / self.r_in;
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        -acc / PI
    }
}

/// Closed form of `T^{s,·}(ζ^a ζ̄^b)` inside `D_s` (Laurent expansion of the kernel):
/// `z^a z̄^{b+1}/(b+1)` for `a ≤ b`, else `(z^a z̄^{b+1} − s^{2b+2} z^{a−b−1})/(b+1)`.
pub fn cauchy_monomial(a: u32, b: u32, s: f64, z: C64) -> C64 {
    let lead = z.powu(a) * z.conj().powu(b + 1);
    let tail = if a > b { z.powu(a - b - 1) * s.powi(2 * b as i32 + 2) } else { C64::new(0.0, 0.0) };
    (lead - tail) / (b + 1) as f64
}
