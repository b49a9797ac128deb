use rigidity_core::calculus::{compose, infinite_compose, NearIdentityMap};
use rigidity_core::grid::{Box, GridSection, GridSpec};

fn remainder(eps: f64) -> f64 {
    let outer = GridSpec::uniform(Box::cube(2, 2.0), 81).unwrap();
    let g = GridSection::from_scalar_fn(outer, |x| x[0] * x[0]);
    let inner = GridSpec::uniform(Box::cube(2, 1.0), 41).unwrap();
    let f = NearIdentityMap::from_displacement(inner.clone(), move |x, o| {
        o[0] = eps * x[1].sin();
        o[1] = 0.0;
    });
    let gf = compose(&g, &f, 0.5).unwrap();
    (0..inner.len())
        .map(|i| {
            let x = inner.node(i);
            // g∘(i+f) − g∘i − dg(i)f
            (gf.values[i] - x[0] * x[0] - 2.0 * x[0] * eps * x[1].sin()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn composition_remainder_is_quadratic() {
    let (a, b) = (remainder(1e-2), remainder(1e-3));
    let slope = (a / b).log10();
    assert!((slope - 2.0).abs() < 0.05, "{a:e} {b:e} slope {slope}");
}

#[test]
fn halving_translations_compose_to_their_sum() {
    let spec = GridSpec::uniform(Box::cube(2, 2.0), 21).unwrap();
    let c = [0.1, -0.05];
    let n = 20;
    let maps: Vec<NearIdentityMap> = (1..=n)
        .map(|nu| {
            let w = 0.5f64.powi(nu);
            NearIdentityMap::from_displacement(spec.clone(), move |_, o| {
                o[0] = w * c[0];
                o[1] = w * c[1];
            })
        })
        .collect();
    let target = GridSpec::uniform(Box::cube(2, 1.0), 11).unwrap();
    let inf = infinite_compose(&maps, &target).unwrap();
    let tail = 0.5f64.powi(n) * c[0].hypot(c[1]);
    for i in 0..target.len() {
        let d = inf.map.disp.at_node(i);
        assert!((d[0] - c[0]).abs() <= tail + 1e-12 && (d[1] - c[1]).abs() <= tail + 1e-12);
    }
}
