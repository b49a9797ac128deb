use rigidity_core::grid::{ck_norm, extend, Box, ExtensionParams, GridSection, GridSpec};
use rigidity_core::smoothing::{smooth, Mollifier};

#[test]
fn c2_norm_of_sine_matches_closed_form() {
    let spec = GridSpec::uniform(Box::cube(1, 2.0), 401).unwrap();
    let e = GridSection::from_scalar_fn(spec.clone(), |x| x[0].sin());
    let inner = Box::cube(1, 1.8);
    let got = ck_norm(&e, 2, &inner).unwrap().value;
    // normalized derivatives sin, cos, −sin/2 on the same nodes
    let want = (0..spec.len())
        .map(|i| spec.node(i)[0])
        .filter(|x| x.abs() <= 1.8 + 1e-12)
        .map(|x| (x.sin().powi(2) + x.cos().powi(2) + (x.sin() / 2.0).powi(2)).sqrt())
        .fold(0.0, f64::max);
    assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    assert!((got - 1.25f64.sqrt()).abs() < 1e-4);
}

#[test]
fn restriction_never_increases_the_sup() {
    let spec = GridSpec::uniform(Box::cube(2, 2.0), 41).unwrap();
    let e = GridSection::from_scalar_fn(spec, |x| (x[0] - 0.3).exp() * x[1].cos());
    let small = e.restrict(&Box::cube(2, 1.0)).unwrap();
    let big = ck_norm(&e, 0, &Box::cube(2, 2.0)).unwrap().value;
    let sub = ck_norm(&small, 0, &Box::cube(2, 1.0)).unwrap().value;
    assert!(sub <= big);
}

#[test]
fn smoothing_error_decays_like_t_to_minus_two() {
    let spec = GridSpec::uniform(Box::cube(1, 2.0), 801).unwrap();
    let e = GridSection::from_scalar_fn(spec, |x| (8.0 * x[0]).sin());
    let kernel = Mollifier::default();
    let d0 = Box::cube(1, 1.0);
    let errs: Vec<f64> = [2.0, 4.0, 8.0]
        .iter()
        .map(|&t| {
            let s = smooth(&e, t, &kernel).unwrap();
            ck_norm(&e.sub(&s).unwrap(), 0, &d0).unwrap().value
        })
        .collect();
    let slope = (errs[2] / errs[0]).ln() / 4f64.ln();
    assert!(slope <= -2.0, "errors {errs:?}, slope {slope}");
}

#[test]
fn extension_is_linear_and_keeps_constants() {
    let spec = GridSpec::uniform(Box::cube(1, 1.0), 81).unwrap();
    let k = Box::cube(1, 3.0);
    let e1 = GridSection::from_scalar_fn(spec.clone(), |x| x[0].sin());
    let e2 = GridSection::from_scalar_fn(spec.clone(), |x| x[0] * x[0]);
    let p = ExtensionParams::default();
    let lhs = extend(&e1.scaled(2.5).add(&e2).unwrap(), &k, p).unwrap();
    let rhs = extend(&e1, &k, p).unwrap().scaled(2.5).add(&extend(&e2, &k, p).unwrap()).unwrap();
    assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);

    let one = extend(&GridSection::from_scalar_fn(spec, |_| 1.0), &k, p).unwrap();
    for i in 0..one.spec.len() {
        let x = one.spec.node(i)[0];
        if x.abs() <= 1.0 {
            assert!((one.values[i] - 1.0).abs() < 1e-12);
        }
    }
}
