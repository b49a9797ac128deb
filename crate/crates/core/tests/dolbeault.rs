use num_complex::Complex64 as C64;
use rigidity_core::dolbeault::{bump_split, cauchy_monomial, cauchy_riemann, ComplexGridFunction, DEFAULT_EPS};

fn sup_error_on_disk(tf: &ComplexGridFunction, r: f64, oracle: impl Fn(C64) -> C64) -> f64 {
    tf.grid.disk_nodes(r).into_iter().map(|i| (tf.values[i] - oracle(tf.grid.node(i))).norm()).fold(0.0, f64::max)
}

#[test]
fn transform_of_monomials_matches_laurent_oracle() {
    let (s, r) = (1.0, 0.5);
    for (a, b) in [(0u32, 0u32), (0, 1), (2, 1), (1, 0)] {
        let f = ComplexGridFunction::from_fn(s, 128, move |z| z.powu(a) * z.conj().powu(b)).unwrap();
        let tf = cauchy_riemann(&f, s, r).unwrap();
        let err = sup_error_on_disk(&tf, r, |z| cauchy_monomial(a, b, s, z));
        assert!(err < 1e-3, "ζ^{a}ζ̄^{b}: {err:e}");
    }
}

#[test]
fn dbar_inverts_the_transform() {
    let (s, r) = (1.0, 0.5);
    let f = ComplexGridFunction::from_fn(s, 256, |z| z.conj()).unwrap();
    let back = cauchy_riemann(&f, s, r).unwrap().dbar().unwrap();
    let err = sup_error_on_disk(&back, r - 0.05, |z| z.conj());
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn bump_split_is_a_partition() {
    let f = ComplexGridFunction::from_fn(1.0, 64, |z| (z * z).exp()).unwrap();
    let (inner, outer) = bump_split(&f, 1.0, 0.5, DEFAULT_EPS).unwrap();
    for i in 0..f.values.len() {
        assert!((inner.values[i] + outer.values[i] - f.values[i]).norm() < 1e-15);
    }
}
